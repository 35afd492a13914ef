//! # tropwass
//!
//! Wasserstein distances between probability measures that live on tropical
//! projective tori of different dimensions.
//!
//! A measure `mu` on `TPT^m` and a measure `nu` on `TPT^n` (`m < n`) are
//! compared by pushing `nu` down through *simple projections*, max-plus
//! matrices with at most one real entry per column, and transporting against
//! `mu` with the tropical metric as ground cost. The embedding direction is
//! recovered constructively: the best projection splits `TPT^n` into a base
//! and a fibre coordinate, and gluing the optimal plan along that split yields
//! a measure on `TPT^n` that projects exactly onto `mu` at the same cost.
//!
//! ## Layout
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`scalar`], [`trop`], [`point`] | max-plus scalars, canonical torus points, the tropical metric, segments and hulls |
//! | [`matrix`] | tropical matrix maps: application, image membership, surjectivity, types |
//! | [`poly`], [`fibre`] | exact polyhedra, type cells and fibres as polyhedral complexes |
//! | [`simple`] | simple projections, the splitting homeomorphism and its inverse |
//! | [`measure`], [`transport`], [`oracle`] | discrete measures, exact transport, brute-force reference solver |
//! | [`crossdim`] | projection / embedding distances across dimensions |
//! | [`tree`] | Newick ingestion and cophenetic vectors |
//! | [`io`], [`commands`], [`verify`] | file formats, CLI commands, randomized property suites |
//!
//! ## Arithmetic
//!
//! Combinatorial work (types, cells, fibres, dimensions) is tie-sensitive and
//! runs over exact rationals ([`Q`]). Transport and optimisation run over
//! `f64`. Most geometric code is generic over [`Scalar`] so the same routine
//! serves both.

pub mod commands;
pub mod crossdim;
pub mod fibre;
pub mod io;
pub mod matrix;
pub mod measure;
pub mod oracle;
pub mod point;
pub mod poly;
pub mod random;
pub mod scalar;
pub mod simple;
pub mod transport;
pub mod tree;
pub mod trop;
pub mod verify;

mod error;

pub use error::{Error, Result};
pub use matrix::{Membership, TropMatrix, TypeLabel};
pub use measure::{Coupling, DiscreteMeasure};
pub use point::{trop_combination, trop_metric, TropHull, TropPoint};
pub use scalar::{Scalar, Q};
pub use simple::{SimpleProjection, SplitPoint};
pub use trop::Trop;
