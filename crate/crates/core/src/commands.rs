//! Command-line commands.
//!
//! Every JSON document written carries the tool name, version, seed and a
//! hash of the configuration and input bytes. Output is deterministic for
//! fixed inputs, seed and flags.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 failed
//! verification.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::crossdim::{w_plus, SearchSpec, StructureMode};
use crate::fibre::{fibre_at, maximal_type_cells, CellDump};
use crate::io;
use crate::matrix::TropMatrix;
use crate::measure::{pushforward, DiscreteMeasure};
use crate::point::TropPoint;
use crate::poly::PolyCell;
use crate::scalar::Scalar;
use crate::simple::SimpleProjection;
use crate::tree::{cohort_points, cophenetic_vector, read_cohort, Manifest, MissingLength, PhyloTree};
use crate::verify;
use crate::{Error, Result, Q};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "tropwass", version, about = "Wasserstein distances across tropical projective tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Projection and embedding distances between two measures or tree cohorts.
    Distance(DistanceArgs),
    /// Run the randomised property suites.
    Verify(VerifyArgs),
    /// Maximal cells of the fibre of a matrix over given points.
    Fibre(FibreArgs),
    /// Full-dimensional type cells of a matrix.
    Typecells(TypecellsArgs),
    /// Image generators of a matrix and optional pushforward of a measure.
    Project(ProjectArgs),
    /// Cophenetic measures of Newick trees.
    Trees2measure(TreesArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Seed recorded in the output and used by randomised steps.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Rational,
    Float,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchArg {
    Auto,
    Exhaustive,
    Local,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MissingArg {
    Reject,
    Zero,
}

impl From<MissingArg> for MissingLength {
    fn from(m: MissingArg) -> Self {
        match m {
            MissingArg::Reject => MissingLength::Reject,
            MissingArg::Zero => MissingLength::Zero,
        }
    }
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    /// Two inputs, each a measure JSON file or a Newick file.
    pub inputs: Vec<PathBuf>,
    /// Cohort manifest; used instead of positional inputs.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Cohort labels to compare (default: the first two).
    #[arg(long)]
    pub cohort: Vec<String>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = SearchArg::Auto)]
    pub search: SearchArg,
    #[arg(long, default_value_t = 2000)]
    pub max_structures: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Descent iterations per start.
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = MissingArg::Reject)]
    pub missing_length: MissingArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FibreArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Point list JSON with the targets.
    #[arg(long)]
    pub point: PathBuf,
    #[arg(long, value_enum, default_value_t = Arithmetic::Rational)]
    pub mode: Arithmetic,
    /// CSV of clipped cell polygons, written when the source torus is 3-dimensional.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TypecellsArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = Arithmetic::Rational)]
    pub mode: Arithmetic,
    /// Cap on row-to-column assignments examined.
    #[arg(long, default_value_t = 100_000)]
    pub limit: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// Matrix JSON or simple projection JSON.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Measure JSON to push forward.
    #[arg(long)]
    pub measure: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Arithmetic::Rational)]
    pub mode: Arithmetic,
    /// CSV of image generators (and pushed atoms) in chart coordinates,
    /// written when the target torus is 3-dimensional.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TreesArgs {
    /// Newick files, one tree per line, pooled into one measure.
    pub files: Vec<PathBuf>,
    /// Cohort manifest; one measure per cohort.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MissingArg::Reject)]
    pub missing_length: MissingArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `args` (program name first) and runs the command.
pub fn execute<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Input(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

enum Failure {
    Usage(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionOrder { .. } | Error::InvalidExponent(_) | Error::NonIntegerExponent(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Input(other),
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn run(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Distance(a) => distance(a, out),
        Command::Verify(a) => verify_cmd(a, out),
        Command::Fibre(a) => match a.mode {
            Arithmetic::Rational => fibre::<Q>(a, out),
            Arithmetic::Float => fibre::<f64>(a, out),
        },
        Command::Typecells(a) => match a.mode {
            Arithmetic::Rational => typecells::<Q>(a, out),
            Arithmetic::Float => typecells::<f64>(a, out),
        },
        Command::Project(a) => match a.mode {
            Arithmetic::Rational => project::<Q>(a, out),
            Arithmetic::Float => project::<f64>(a, out),
        },
        Command::Trees2measure(a) => trees2measure(a, out),
    }
}

/// Hash of the configuration and the bytes of every input file.
fn config_hash(command: &str, config: &Value, inputs: &[&Path]) -> Result<String> {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(serde_json::to_vec(config)?);
    for path in inputs {
        h.update(Sha256::digest(std::fs::read(path)?));
    }
    let digest = h.finalize();
    let mut hex = String::new();
    for b in &digest[..16] {
        let _ = write!(hex, "{b:02x}");
    }
    Ok(hex)
}

fn emit(
    command: &str,
    config: Value,
    inputs: &[&Path],
    output: &OutputArgs,
    body: Value,
    out: &mut dyn Write,
) -> Result<()> {
    let mut doc = Map::new();
    doc.insert("tool".into(), json!("tropwass"));
    doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    doc.insert("command".into(), json!(command));
    doc.insert("seed".into(), json!(output.seed));
    doc.insert("config_hash".into(), json!(config_hash(command, &config, inputs)?));
    doc.insert("config".into(), config);
    if let Value::Object(fields) = body {
        doc.extend(fields);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
    text.push('\n');
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn looks_like_newick(path: &Path) -> Result<bool> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if matches!(ext, "nwk" | "newick" | "tre" | "tree" | "trees") {
        return Ok(true);
    }
    let text = std::fs::read_to_string(path)?;
    Ok(matches!(text.trim_start().chars().next(), Some('(' | '[')))
}

/// A measure file, or a Newick file turned into the uniform measure on its
/// cophenetic vectors.
fn load_measure(path: &Path, missing: MissingLength) -> Result<DiscreteMeasure<f64>> {
    if looks_like_newick(path)? {
        let trees = read_cohort(&[path.to_path_buf()], missing)?;
        DiscreteMeasure::uniform(cohort_points(&trees)?)
    } else {
        io::measure_from_json(&io::read_json(path)?)
    }
}

fn distance(a: &DistanceArgs, out: &mut dyn Write) -> CmdResult {
    let missing = a.missing_length.into();
    let mut inputs: Vec<PathBuf> = Vec::new();
    let (first, second, labels) = match &a.manifest {
        Some(path) => {
            if !a.inputs.is_empty() {
                return Err(Failure::Usage("give either a manifest or two inputs".into()));
            }
            let manifest = Manifest::load(path)?;
            let pick = |label: Option<&String>, k: usize| -> std::result::Result<_, Failure> {
                let cohort = match label {
                    Some(l) => manifest.cohorts.iter().find(|c| &c.label == l),
                    None => manifest.cohorts.get(k),
                };
                cohort.cloned().ok_or_else(|| Failure::Usage(format!("manifest lacks cohort {}", label.cloned().unwrap_or_else(|| (k + 1).to_string()))))
            };
            if a.cohort.len() > 2 || a.cohort.len() == 1 {
                return Err(Failure::Usage("--cohort must be given twice or not at all".into()));
            }
            let c1 = pick(a.cohort.first(), 0)?;
            let c2 = pick(a.cohort.get(1), 1)?;
            inputs.push(path.clone());
            inputs.extend(c1.files.iter().chain(&c2.files).cloned());
            let m1 = DiscreteMeasure::uniform(cohort_points(&read_cohort(&c1.files, missing)?)?)?;
            let m2 = DiscreteMeasure::uniform(cohort_points(&read_cohort(&c2.files, missing)?)?)?;
            (m1, m2, vec![c1.label, c2.label])
        }
        None => {
            if a.inputs.len() != 2 {
                return Err(Failure::Usage(format!("distance needs two inputs, got {}", a.inputs.len())));
            }
            inputs.extend(a.inputs.iter().cloned());
            let m1 = load_measure(&a.inputs[0], missing)?;
            let m2 = load_measure(&a.inputs[1], missing)?;
            let names = a.inputs.iter().map(|p| p.display().to_string()).collect();
            (m1, m2, names)
        }
    };
    if first.dim() == second.dim() {
        return Err(Failure::Usage(format!(
            "both measures live in dimension {}; distances across dimensions need m < n",
            first.dim()
        )));
    }
    let swapped = first.dim() > second.dim();
    let (mu, nu) = if swapped { (&second, &first) } else { (&first, &second) };
    let spec = SearchSpec {
        mode: match a.search {
            SearchArg::Auto => StructureMode::Auto,
            SearchArg::Exhaustive => StructureMode::Exhaustive,
            SearchArg::Local => StructureMode::LocalSearch,
        },
        max_structures: a.max_structures,
        restarts: a.restarts.max(1),
        budget: a.budget,
        seed: a.output.seed,
        ..SearchSpec::default()
    };
    let result = w_plus(mu, nu, a.p, &spec)?;
    let mut body = io::result_to_json(&result, a.p, a.output.seed);
    if let Value::Object(fields) = &mut body {
        fields.insert("swapped".into(), json!(swapped));
        fields.insert("m".into(), json!(mu.dim()));
        fields.insert("n".into(), json!(nu.dim()));
        let (lo, hi) = if swapped { (&labels[1], &labels[0]) } else { (&labels[0], &labels[1]) };
        fields.insert("inputs".into(), json!({"lower": lo, "higher": hi}));
    }
    let config = json!({
        "p": a.p,
        "search": format!("{:?}", a.search).to_lowercase(),
        "max_structures": a.max_structures,
        "restarts": spec.restarts,
        "budget": a.budget,
        "missing_length": format!("{:?}", a.missing_length).to_lowercase(),
        "cohorts": a.cohort,
    });
    let paths: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    emit("distance", config, &paths, &a.output, body, out)?;
    Ok(EXIT_OK)
}

fn verify_cmd(a: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let reports = verify::run_all(a.output.seed, a.trials);
    let all_ok = reports.iter().all(verify::SuiteReport::ok);
    let body = json!({"passed": all_ok, "suites": reports});
    emit("verify", json!({"trials": a.trials}), &[], &a.output, body, out)?;
    Ok(if all_ok { EXIT_OK } else { EXIT_VERIFY })
}

fn box_radius<T: Scalar>(mat: &TropMatrix<T>, points: &[TropPoint<T>]) -> f64 {
    let entries = (0..mat.rows()).flat_map(|i| mat.row(i).iter().filter_map(|e| e.as_real().map(Scalar::to_f64)));
    let coords = points.iter().flat_map(|p| p.coords().iter().map(Scalar::to_f64));
    let spread = entries.chain(coords).fold(0.0f64, |acc, v| acc.max(v.abs()));
    (4.0 * spread + 5.0).ceil()
}

fn polygon_csv<T: Scalar>(cells: &[(String, &PolyCell<T>)], radius: f64) -> String {
    let mut csv = String::from("cell,label,vertex,x,y\n");
    for (k, (label, cell)) in cells.iter().enumerate() {
        for (v, [x, y]) in cell.clip_polygon_2d(radius).iter().enumerate() {
            let _ = writeln!(csv, "{},\"{}\",{},{},{}", k + 1, label, v + 1, x, y);
        }
    }
    csv
}

fn fibre<T: Scalar>(a: &FibreArgs, out: &mut dyn Write) -> CmdResult {
    let mat: TropMatrix<T> = io::matrix_from_json(&io::read_json(&a.matrix)?)?;
    let targets: Vec<TropPoint<T>> = io::points_from_json(&io::read_json(&a.point)?)?;
    let mut fibres = Vec::new();
    let mut plot: Vec<(String, PolyCell<T>)> = Vec::new();
    for (t, y) in targets.iter().enumerate() {
        let f = fibre_at(&mat, y)?;
        let cells: Vec<Value> = f
            .cells
            .iter()
            .map(|c| {
                let mut v = serde_json::to_value(CellDump::new(&c.cell, c.dim)).expect("serialisable");
                v["label"] = json!(c.label.to_one_based());
                v["label_text"] = json!(c.label.to_string());
                v["pinned"] = json!(c.pinned.iter().map(|j| j + 1).collect::<Vec<_>>());
                v
            })
            .collect();
        for c in &f.cells {
            plot.push((format!("target {} {}", t + 1, c.label), c.cell.clone()));
        }
        fibres.push(json!({
            "target": io::point_json(y),
            "in_image": !f.is_empty(),
            "principal": f.principal.iter().map(|v| v.as_ref().map_or(Value::Null, io::scalar_json)).collect::<Vec<_>>(),
            "max_dim": f.max_dim(),
            "cells": cells,
        }));
    }
    if let Some(csv) = &a.csv {
        write_plane_csv(csv, mat.cols(), || {
            let refs: Vec<(String, &PolyCell<T>)> = plot.iter().map(|(l, c)| (l.clone(), c)).collect();
            polygon_csv(&refs, box_radius(&mat, &targets))
        })?;
    }
    let config = json!({"mode": mode_name::<T>(), "csv": a.csv});
    emit("fibre", config, &[&a.matrix, &a.point], &a.output, json!({"fibres": fibres}), out)?;
    Ok(EXIT_OK)
}

fn write_plane_csv(path: &Path, torus_dim: usize, make: impl FnOnce() -> String) -> Result<()> {
    if torus_dim != 3 {
        return Err(Error::Input(format!(
            "plot data needs a 3-coordinate torus (a plane chart), got {torus_dim}"
        )));
    }
    std::fs::write(path, make())?;
    Ok(())
}

fn mode_name<T: Scalar>() -> &'static str {
    if T::EXACT {
        "rational"
    } else {
        "float"
    }
}

fn typecells<T: Scalar>(a: &TypecellsArgs, out: &mut dyn Write) -> CmdResult {
    let mat: TropMatrix<T> = io::matrix_from_json(&io::read_json(&a.matrix)?)?;
    let cells = maximal_type_cells(&mat, a.limit)?;
    let dumps: Vec<CellDump> = cells.iter().map(|c| CellDump::new(c, mat.cols() - 1)).collect();
    if let Some(csv) = &a.csv {
        write_plane_csv(csv, mat.cols(), || {
            let refs: Vec<(String, &PolyCell<T>)> = cells
                .iter()
                .map(|c| (c.label().map(ToString::to_string).unwrap_or_default(), c))
                .collect();
            polygon_csv(&refs, box_radius(&mat, &[]))
        })?;
    }
    let body = json!({"count": dumps.len(), "cells": dumps});
    let config = json!({"mode": mode_name::<T>(), "limit": a.limit, "csv": a.csv});
    emit("typecells", config, &[&a.matrix], &a.output, body, out)?;
    Ok(EXIT_OK)
}

fn project<T: Scalar>(a: &ProjectArgs, out: &mut dyn Write) -> CmdResult {
    let doc = io::read_json(&a.matrix)?;
    let (mat, simple): (TropMatrix<T>, Option<SimpleProjection<T>>) = if doc.get("J").is_some() {
        let p: SimpleProjection<T> = io::simple_from_json(&doc)?;
        (p.to_matrix(), Some(p))
    } else {
        (io::matrix_from_json(&doc)?, None)
    };
    let mut body = Map::new();
    let vertices = match mat.image_vertices() {
        Ok(h) => Some(h.generators().to_vec()),
        Err(Error::InfiniteEntries) => None,
        Err(e) => return Err(e.into()),
    };
    body.insert(
        "image_vertices".into(),
        vertices.as_ref().map_or(Value::Null, |v| io::points_to_json(v)),
    );
    body.insert(
        "image_vertices_chart".into(),
        vertices.as_ref().map_or(Value::Null, |v| {
            Value::Array(
                v.iter()
                    .map(|p| Value::Array(p.chart().iter().map(io::scalar_json).collect()))
                    .collect(),
            )
        }),
    );
    body.insert("surjective".into(), json!(mat.is_surjective()));
    body.insert("simple".into(), json!(simple.is_some() || crate::simple::is_simple_projection(&mat).unwrap_or(false)));
    let mut pushed_atoms = Vec::new();
    let mut inputs: Vec<&Path> = vec![&a.matrix];
    if let Some(path) = &a.measure {
        inputs.push(path);
        let nu: DiscreteMeasure<T> = io::measure_from_json(&io::read_json(path)?)?;
        let pushed = pushforward(&mat, &nu)?;
        pushed_atoms = pushed.support().to_vec();
        body.insert("pushforward".into(), io::measure_to_json(&pushed));
    }
    if let Some(csv) = &a.csv {
        write_plane_csv(csv, mat.rows(), || {
            let mut text = String::from("kind,index,x,y\n");
            for (k, p) in vertices.iter().flatten().enumerate() {
                let c = p.chart();
                let _ = writeln!(text, "vertex,{},{},{}", k + 1, c[0], c[1]);
            }
            for (k, p) in pushed_atoms.iter().enumerate() {
                let c = p.chart();
                let _ = writeln!(text, "atom,{},{},{}", k + 1, c[0], c[1]);
            }
            text
        })?;
    }
    let config = json!({"mode": mode_name::<T>(), "csv": a.csv});
    emit("project", config, &inputs, &a.output, Value::Object(body), out)?;
    Ok(EXIT_OK)
}

fn cohort_json(label: Option<&str>, trees: &[PhyloTree]) -> Result<Value> {
    let measure = DiscreteMeasure::uniform(cohort_points(trees)?)?;
    let cv = cophenetic_vector(&trees[0])?;
    let pairs: Vec<String> = cv.pairs().into_iter().map(|(a, b)| format!("{a}|{b}")).collect();
    Ok(json!({
        "label": label,
        "trees": trees.len(),
        "leaves": cv.labels,
        "pairs": pairs,
        "measure": io::measure_to_json(&measure),
    }))
}

fn trees2measure(a: &TreesArgs, out: &mut dyn Write) -> CmdResult {
    let missing = a.missing_length.into();
    let mut inputs: Vec<PathBuf> = Vec::new();
    let body = match &a.manifest {
        Some(path) => {
            if !a.files.is_empty() {
                return Err(Failure::Usage("give either a manifest or Newick files".into()));
            }
            let manifest = Manifest::load(path)?;
            inputs.push(path.clone());
            let mut cohorts = Vec::new();
            for c in &manifest.cohorts {
                inputs.extend(c.files.iter().cloned());
                cohorts.push(cohort_json(Some(&c.label), &read_cohort(&c.files, missing)?)?);
            }
            json!({"cohorts": cohorts})
        }
        None => {
            if a.files.is_empty() {
                return Err(Failure::Usage("no Newick files given".into()));
            }
            inputs.extend(a.files.iter().cloned());
            let c = cohort_json(None, &read_cohort(&a.files, missing)?)?;
            json!({"cohorts": [c]})
        }
    };
    let config = json!({"missing_length": format!("{:?}", a.missing_length).to_lowercase()});
    let paths: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    emit("trees2measure", config, &paths, &a.output, body, out)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["tropwass"];
        full.extend_from_slice(args);
        let code = execute(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_command_is_usage_error() {
        assert_eq!(run_cli(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_cli(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_file_is_input_error() {
        let (code, _, err) = run_cli(&["typecells", "--matrix", "/nonexistent/m.json"]);
        assert_eq!(code, EXIT_INPUT, "{err}");
    }
}
