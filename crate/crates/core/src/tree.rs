//! Phylogenetic trees and their cophenetic vectors.
//!
//! Branch lengths are exact rationals parsed from the decimal text, so
//! cophenetic vectors and the three-point test are exact. A tree is rooted
//! unless its Newick text starts with `[&U]`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::point::TropPoint;
use crate::scalar::{format_decimal, parse_decimal, Scalar, Q};
use crate::{Error, Result};

/// What to do with an edge that has no `:length`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MissingLength {
    #[default]
    Reject,
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
struct Node {
    label: Option<String>,
    length: Option<Q>,
    children: Vec<usize>,
    parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhyloTree {
    nodes: Vec<Node>,
    root: usize,
    rooted: bool,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    missing: MissingLength,
    nodes: Vec<Node>,
}

const SPECIAL: &[u8] = b"():;,[]'";

impl<'a> Parser<'a> {
    fn error(&self, at: usize, message: impl Into<String>) -> Error {
        let position = if at >= self.bytes.len() {
            self.bytes.len().saturating_sub(1)
        } else {
            at
        };
        Error::Newick {
            position,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_blank(&mut self) -> Result<()> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    let start = self.pos;
                    match self.text[self.pos..].find(']') {
                        Some(k) => self.pos += k + 1,
                        None => return Err(self.error(start, "unterminated comment")),
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_blank()?;
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.describe();
            Err(self.error(self.pos, format!("expected '{}', found {found}", c as char)))
        }
    }

    fn describe(&self) -> String {
        match self.text[self.pos.min(self.text.len())..].chars().next() {
            Some(c) => format!("'{c}'"),
            None => "end of input".into(),
        }
    }

    fn label(&mut self) -> Result<Option<String>> {
        self.skip_blank()?;
        if self.peek() == Some(b'\'') {
            let start = self.pos;
            self.pos += 1;
            let mut out = String::new();
            loop {
                match self.text[self.pos..].find('\'') {
                    None => return Err(self.error(start, "unterminated quoted label")),
                    Some(k) => {
                        out.push_str(&self.text[self.pos..self.pos + k]);
                        self.pos += k + 1;
                        if self.peek() == Some(b'\'') {
                            out.push('\'');
                            self.pos += 1;
                        } else {
                            return Ok(Some(out));
                        }
                    }
                }
            }
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if SPECIAL.contains(&c) || c.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        Ok((self.pos > start).then(|| self.text[start..self.pos].replace('_', " ")))
    }

    fn length(&mut self) -> Result<Option<Q>> {
        self.skip_blank()?;
        if self.peek() != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip_blank()?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || matches!(c, b'.' | b'-' | b'+' | b'e' | b'E') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            let found = self.describe();
            return Err(self.error(self.pos, format!("expected a branch length, found {found}")));
        }
        let v = parse_decimal(&self.text[start..self.pos]).map_err(|_| self.error(start, "malformed branch length"))?;
        if v.is_negative() {
            return Err(self.error(start, "negative branch length"));
        }
        Ok(Some(v))
    }

    fn subtree(&mut self, parent: Option<usize>) -> Result<usize> {
        self.skip_blank()?;
        let id = self.nodes.len();
        self.nodes.push(Node {
            label: None,
            length: None,
            children: Vec::new(),
            parent,
        });
        let start = self.pos;
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                let child = self.subtree(Some(id))?;
                self.nodes[id].children.push(child);
                self.skip_blank()?;
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => {
                        let found = self.describe();
                        return Err(self.error(self.pos, format!("expected ',' or ')', found {found}")));
                    }
                }
            }
            self.nodes[id].label = self.label()?;
        } else {
            match self.label()? {
                Some(l) => self.nodes[id].label = Some(l),
                None => {
                    let found = self.describe();
                    return Err(self.error(start, format!("expected a leaf label or '(', found {found}")));
                }
            }
        }
        let at = self.pos;
        let len = self.length()?;
        if parent.is_some() && len.is_none() {
            match self.missing {
                MissingLength::Reject => return Err(self.error(at, "missing branch length")),
                MissingLength::Zero => self.nodes[id].length = Some(Q::zero()),
            }
        } else {
            self.nodes[id].length = len;
        }
        Ok(id)
    }
}

/// Parses one Newick tree. Error positions are byte offsets into `text`;
/// at end of input the offset of the last character is reported.
pub fn parse_newick(text: &str, missing: MissingLength) -> Result<PhyloTree> {
    let mut p = Parser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
        missing,
        nodes: Vec::new(),
    };
    while p.peek().is_some_and(|c| c.is_ascii_whitespace()) {
        p.pos += 1;
    }
    let mut rooted = true;
    let rest = &text[p.pos..];
    if rest.len() >= 4 && rest[..4].eq_ignore_ascii_case("[&U]") {
        rooted = false;
        p.pos += 4;
    } else if rest.len() >= 4 && rest[..4].eq_ignore_ascii_case("[&R]") {
        p.pos += 4;
    }
    let root = p.subtree(None)?;
    p.expect(b';')?;
    p.skip_blank()?;
    if p.pos < text.len() {
        return Err(p.error(p.pos, "trailing input after ';'"));
    }
    let tree = PhyloTree {
        nodes: p.nodes,
        root,
        rooted,
    };
    tree.check_leaves()?;
    Ok(tree)
}

/// Quotes a label when it cannot be written bare.
fn write_label(label: &str, out: &mut String) {
    let bare = !label.is_empty()
        && label
            .bytes()
            .all(|c| !SPECIAL.contains(&c) && !c.is_ascii_whitespace() && c != b'_');
    if bare {
        out.push_str(label);
    } else {
        out.push('\'');
        out.push_str(&label.replace('\'', "''"));
        out.push('\'');
    }
}

impl PhyloTree {
    fn check_leaves(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for id in self.leaves() {
            match &self.nodes[id].label {
                None => return Err(Error::Tree("unlabelled leaf".into())),
                Some(l) if !seen.insert(l.clone()) => return Err(Error::Tree(format!("duplicate leaf label '{l}'"))),
                _ => {}
            }
        }
        Ok(())
    }

    fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }

    pub fn is_rooted(&self) -> bool {
        self.rooted
    }

    pub fn set_rooted(&mut self, rooted: bool) {
        self.rooted = rooted;
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Leaf labels in lexicographic order.
    pub fn leaf_labels(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .leaves()
            .map(|i| self.nodes[i].label.clone().expect("checked"))
            .collect();
        v.sort();
        v
    }

    fn edge(&self, id: usize) -> Q {
        self.nodes[id].length.clone().unwrap_or_else(Q::zero)
    }

    /// Distance from the root to every node.
    fn depths(&self) -> Vec<Q> {
        let mut d = vec![Q::zero(); self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            for &c in &self.nodes[v].children {
                d[c] = &d[v] + self.edge(c);
                stack.push(c);
            }
        }
        d
    }

    fn ancestors(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while let Some(p) = self.nodes[v].parent {
            out.push(p);
            v = p;
        }
        out
    }

    /// Path length between two nodes.
    fn path_length(&self, depths: &[Q], a: usize, b: usize) -> Q {
        let up: BTreeSet<usize> = self.ancestors(a).into_iter().collect();
        let lca = self
            .ancestors(b)
            .into_iter()
            .find(|v| up.contains(v))
            .expect("connected");
        &depths[a] + &depths[b] - &depths[lca] - &depths[lca]
    }

    /// Newick text, lengths written as exact decimals.
    pub fn to_newick(&self) -> Result<String> {
        let mut out = String::new();
        if !self.rooted {
            out.push_str("[&U]");
        }
        self.write(self.root, &mut out, false)?;
        out.push(';');
        Ok(out)
    }

    fn write(&self, v: usize, out: &mut String, sorted: bool) -> Result<()> {
        let node = &self.nodes[v];
        if !node.children.is_empty() {
            let mut parts = Vec::with_capacity(node.children.len());
            for &c in &node.children {
                let mut s = String::new();
                self.write(c, &mut s, sorted)?;
                parts.push(s);
            }
            if sorted {
                parts.sort();
            }
            out.push('(');
            out.push_str(&parts.join(","));
            out.push(')');
        }
        if let Some(l) = &node.label {
            write_label(l, out);
        }
        if let Some(len) = &node.length {
            let text = format_decimal(len)
                .ok_or_else(|| Error::Tree(format!("branch length {len} has no finite decimal form")))?;
            out.push(':');
            out.push_str(&text);
        }
        Ok(())
    }

    /// Text that is equal for two trees exactly when they are isomorphic
    /// as labelled weighted trees with the same rooted flag.
    pub fn canonical_form(&self) -> Result<String> {
        let mut out = String::from(if self.rooted { "R" } else { "U" });
        self.write(self.root, &mut out, true)?;
        Ok(out)
    }

    pub fn isomorphic(&self, other: &Self) -> Result<bool> {
        Ok(self.canonical_form()? == other.canonical_form()?)
    }

    /// Renames leaves through `map`; labels missing from it are kept.
    pub fn relabel(&self, map: &BTreeMap<String, String>) -> Result<Self> {
        let mut t = self.clone();
        for id in 0..t.nodes.len() {
            if t.nodes[id].children.is_empty() {
                if let Some(new) = t.nodes[id].label.as_ref().and_then(|l| map.get(l)) {
                    t.nodes[id].label = Some(new.clone());
                }
            }
        }
        t.check_leaves()?;
        Ok(t)
    }

    /// True iff every root-to-leaf length agrees within `tol` and the
    /// cophenetic vector passes the three-point test with the same
    /// tolerance. Unrooted trees and trees with fewer than three leaves
    /// are rejected.
    pub fn is_ultrametric(&self, tol: f64) -> Result<bool> {
        if !self.rooted {
            return Err(Error::Tree("ultrametricity needs a rooted tree".into()));
        }
        if self.leaf_count() < 3 {
            return Err(Error::Tree(format!("{} leaves, need at least 3", self.leaf_count())));
        }
        let depths = self.depths();
        let leaf_depths: Vec<f64> = self.leaves().map(|i| depths[i].to_f64()).collect();
        let lo = leaf_depths.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = leaf_depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > tol {
            return Ok(false);
        }
        let cv = cophenetic_vector(self)?;
        Ok(cv.three_point_within(tol))
    }
}

/// Pairwise leaf distances in lexicographic pair order.
#[derive(Clone, Debug, PartialEq)]
pub struct CopheneticVector {
    pub labels: Vec<String>,
    pub distances: Vec<Q>,
}

pub fn cophenetic_vector(tree: &PhyloTree) -> Result<CopheneticVector> {
    let n = tree.leaf_count();
    if n < 3 {
        return Err(Error::Tree(format!("{n} leaves, need at least 3")));
    }
    let mut leaves: Vec<(String, usize)> = tree
        .leaves()
        .map(|i| (tree.nodes[i].label.clone().expect("checked"), i))
        .collect();
    leaves.sort();
    let depths = tree.depths();
    let mut distances = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            distances.push(tree.path_length(&depths, leaves[a].1, leaves[b].1));
        }
    }
    Ok(CopheneticVector {
        labels: leaves.into_iter().map(|(l, _)| l).collect(),
        distances,
    })
}

impl CopheneticVector {
    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    /// Position of the pair `(a, b)`, `a < b`, in the vector.
    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        let n = self.labels.len();
        a * n - a * (a + 1) / 2 + (b - a - 1)
    }

    pub fn pairs(&self) -> Vec<(String, String)> {
        let n = self.labels.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                out.push((self.labels[a].clone(), self.labels[b].clone()));
            }
        }
        out
    }

    pub fn distance(&self, a: usize, b: usize) -> &Q {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        &self.distances[self.pair_index(a, b)]
    }

    pub fn to_point<T: Scalar>(&self) -> Result<TropPoint<T>> {
        let raw = self
            .distances
            .iter()
            .map(|d| T::from_f64(d.to_f64()))
            .collect::<Result<Vec<T>>>()?;
        TropPoint::new(raw)
    }

    /// Exact point in rational coordinates.
    pub fn to_exact_point(&self) -> Result<TropPoint<Q>> {
        TropPoint::new(self.distances.clone())
    }

    /// Every triple has its largest distance attained at least twice.
    pub fn three_point(&self) -> bool {
        self.triples().all(|[x, y, z]| {
            let hi = x.clone().max(y.clone()).max(z.clone());
            [x, y, z].iter().filter(|v| ***v == hi).count() >= 2
        })
    }

    fn three_point_within(&self, tol: f64) -> bool {
        self.triples().all(|t| {
            let mut v = t.map(|q| q.to_f64());
            v.sort_by(f64::total_cmp);
            v[2] - v[1] <= tol
        })
    }

    fn triples(&self) -> impl Iterator<Item = [&Q; 3]> + '_ {
        let n = self.labels.len();
        (0..n).flat_map(move |a| {
            (a + 1..n).flat_map(move |b| {
                (b + 1..n).map(move |c| [self.distance(a, b), self.distance(a, c), self.distance(b, c)])
            })
        })
    }

    /// Four-point condition of tree metrics.
    pub fn four_point(&self) -> bool {
        let n = self.labels.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        let mut s = [
                            self.distance(a, b) + self.distance(c, d),
                            self.distance(a, c) + self.distance(b, d),
                            self.distance(a, d) + self.distance(b, c),
                        ];
                        s.sort();
                        if s[1] != s[2] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Random binary tree on leaves `t1..tn` with lengths in multiples of 1/4.
/// Ultrametric trees get random merge heights; others random edge lengths.
pub fn random_tree<R: Rng>(rng: &mut R, leaves: usize, ultrametric: bool) -> PhyloTree {
    assert!(leaves >= 2);
    let quarter = |rng: &mut R| Q::new(rng.gen_range(1..=8).into(), 4.into());
    let mut nodes: Vec<Node> = (1..=leaves)
        .map(|k| Node {
            label: Some(format!("t{k}")),
            length: None,
            children: Vec::new(),
            parent: None,
        })
        .collect();
    let mut heights: Vec<Q> = vec![Q::zero(); leaves];
    let mut active: Vec<usize> = (0..leaves).collect();
    let mut height = Q::zero();
    while active.len() > 1 {
        active.shuffle(rng);
        let (a, b) = (active.pop().expect("two"), active.pop().expect("two"));
        let id = nodes.len();
        nodes.push(Node {
            label: None,
            length: None,
            children: vec![a, b],
            parent: None,
        });
        if ultrametric {
            height += quarter(rng);
            for c in [a, b] {
                nodes[c].length = Some(&height - &heights[c]);
            }
            heights.push(height.clone());
        } else {
            for c in [a, b] {
                nodes[c].length = Some(quarter(rng));
            }
            heights.push(Q::zero());
        }
        for c in [a, b] {
            nodes[c].parent = Some(id);
        }
        active.push(id);
    }
    let root = active[0];
    PhyloTree {
        nodes,
        root,
        rooted: true,
    }
}

/// One tree per nonblank line.
pub fn parse_newick_lines(text: &str, missing: MissingLength) -> Result<Vec<PhyloTree>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            parse_newick(l, missing).map_err(|e| match e {
                Error::Newick { position, message } => Error::Newick {
                    position,
                    message: format!("line {}: {message}", k + 1),
                },
                other => other,
            })
        })
        .collect()
}

pub fn read_newick_file(path: &Path, missing: MissingLength) -> Result<Vec<PhyloTree>> {
    let text = std::fs::read_to_string(path)?;
    parse_newick_lines(&text, missing)
}

/// Batch manifest: cohorts of Newick files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub cohorts: Vec<Cohort>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Cohort {
    pub label: String,
    pub files: Vec<PathBuf>,
}

impl Manifest {
    /// Reads a manifest; relative file paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut m: Manifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for c in &mut m.cohorts {
            for f in &mut c.files {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        Ok(m)
    }
}

/// Trees of every file, files read in parallel, order preserved.
pub fn read_cohort(files: &[PathBuf], missing: MissingLength) -> Result<Vec<PhyloTree>> {
    let per_file = files
        .par_iter()
        .map(|f| read_newick_file(f, missing))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_file.into_iter().flatten().collect())
}

/// Cophenetic points of a cohort. All trees must share one leaf set.
pub fn cohort_points(trees: &[PhyloTree]) -> Result<Vec<TropPoint<f64>>> {
    let first = trees.first().ok_or(Error::Empty("tree cohort"))?.leaf_labels();
    trees
        .iter()
        .map(|t| {
            if t.leaf_labels() != first {
                return Err(Error::Tree("trees in a cohort must share one leaf set".into()));
            }
            cophenetic_vector(t)?.to_point()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn three_leaf_example() {
        let t = parse_newick("((A:1,B:1):1,C:2);", MissingLength::Reject).unwrap();
        assert!(t.is_rooted());
        assert_eq!(t.leaf_labels(), vec!["A", "B", "C"]);
        let cv = cophenetic_vector(&t).unwrap();
        assert_eq!(cv.distances, vec![q(2), q(4), q(4)]);
        let p: TropPoint<Q> = cv.to_exact_point().unwrap();
        assert_eq!(p, TropPoint::from_i64s(&[0, 2, 2]).unwrap());
        assert!(t.is_ultrametric(1e-12).unwrap());
    }

    #[test]
    fn unbalanced_depths_are_not_ultrametric() {
        let t = parse_newick("((A:1,B:2):1,C:2);", MissingLength::Reject).unwrap();
        assert!(!t.is_ultrametric(1e-12).unwrap());
    }

    #[test]
    fn truncated_input_reports_position() {
        match parse_newick("((A:1,B:1", MissingLength::Reject) {
            Err(Error::Newick { position, .. }) => assert_eq!(position, 8),
            other => panic!("{other:?}"),
        }
        match parse_newick("((A:1,B:1):1,C:2)", MissingLength::Reject) {
            Err(Error::Newick { position, .. }) => assert_eq!(position, 16),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_lengths_follow_policy() {
        assert!(parse_newick("((A,B:1):1,C:2);", MissingLength::Reject).is_err());
        let t = parse_newick("((A,B:1):1,C:2);", MissingLength::Zero).unwrap();
        assert_eq!(cophenetic_vector(&t).unwrap().distances, vec![q(1), q(3), q(4)]);
    }

    #[test]
    fn star_tree_is_origin() {
        let t = parse_newick("(A:1.5,B:1.5,C:1.5,D:1.5);", MissingLength::Reject).unwrap();
        let p: TropPoint<Q> = cophenetic_vector(&t).unwrap().to_exact_point().unwrap();
        assert!(p.is_origin());
    }

    #[test]
    fn unrooted_and_small_trees_rejected_for_ultrametric() {
        let t = parse_newick("[&U](A:1,B:1,C:1);", MissingLength::Reject).unwrap();
        assert!(!t.is_rooted());
        assert!(t.is_ultrametric(0.0).is_err());
        assert!(cophenetic_vector(&t).is_ok());
        let single = parse_newick("A:1;", MissingLength::Reject).unwrap();
        assert!(single.is_ultrametric(0.0).is_err());
        assert!(cophenetic_vector(&single).is_err());
    }

    #[test]
    fn labels_must_be_unique() {
        assert!(parse_newick("(A:1,A:1,C:1);", MissingLength::Reject).is_err());
        assert!(parse_newick("(A:1,:1,C:1);", MissingLength::Reject).is_err());
    }

    #[test]
    fn quoted_labels_and_comments() {
        let t = parse_newick("('it''s':1,[x]B_c:0.25,C:1e0);", MissingLength::Reject).unwrap();
        assert_eq!(t.leaf_labels(), vec!["B c", "C", "it's"]);
        let again = parse_newick(&t.to_newick().unwrap(), MissingLength::Reject).unwrap();
        assert!(t.isomorphic(&again).unwrap());
    }

    #[test]
    fn round_trip_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..100 {
            let t = random_tree(&mut rng, 3 + k % 6, k % 2 == 0);
            let text = t.to_newick().unwrap();
            let back = parse_newick(&text, MissingLength::Reject).unwrap();
            assert!(t.isomorphic(&back).unwrap(), "{text}");
            assert_eq!(cophenetic_vector(&t).unwrap(), cophenetic_vector(&back).unwrap());
        }
    }

    #[test]
    fn isomorphism_ignores_child_order_only() {
        let a = parse_newick("((A:1,B:2):1,C:2);", MissingLength::Reject).unwrap();
        let b = parse_newick("(C:2,(B:2,A:1):1);", MissingLength::Reject).unwrap();
        let c = parse_newick("((A:2,B:1):1,C:2);", MissingLength::Reject).unwrap();
        assert!(a.isomorphic(&b).unwrap());
        assert!(!a.isomorphic(&c).unwrap());
    }

    #[test]
    fn relabelling_permutes_coordinates() {
        let t = parse_newick("((A:1,B:2):3,(C:4,D:5):6);", MissingLength::Reject).unwrap();
        let map: BTreeMap<String, String> = [("A", "D"), ("B", "C"), ("C", "B"), ("D", "A")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let r = t.relabel(&map).unwrap();
        let (cv, cr) = (cophenetic_vector(&t).unwrap(), cophenetic_vector(&r).unwrap());
        let idx = |l: &str| cv.labels.iter().position(|x| x == l).unwrap();
        let ridx = |l: &str| cr.labels.iter().position(|x| x == l).unwrap();
        for a in ["A", "B", "C", "D"] {
            for b in ["A", "B", "C", "D"] {
                if a != b {
                    assert_eq!(cv.distance(idx(a), idx(b)), cr.distance(ridx(&map[a]), ridx(&map[b])));
                }
            }
        }
    }

    #[test]
    fn random_ultrametric_trees_pass_three_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for k in 0..50 {
            let t = random_tree(&mut rng, 3 + k % 5, true);
            let cv = cophenetic_vector(&t).unwrap();
            assert!(cv.three_point() && cv.four_point());
            assert!(t.is_ultrametric(0.0).unwrap());
        }
    }
}
