//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Trial counts, tolerances and time limits are fixed here. Runs as a plain
//! binary (no test harness) so every line is printed.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use tropwass::commands::{execute, EXIT_OK};
use tropwass::crossdim::SearchSpec;
use tropwass::tree::random_tree;
use tropwass::verify::{self, SuiteReport};

const SEED: u64 = 20_240_917;

const NON_EXPANSIVE_TRIALS: usize = 10_000;
const NON_EXPANSIVE_MAX_DIM: usize = 8;
const NON_EXPANSIVE_LIMIT: Duration = Duration::from_secs(10);
const SURJECTIVITY_TRIALS: usize = 500;
const FIBRE_TRIALS: usize = 200;
const FIBRE_MAX_N: usize = 6;
const SPLIT_TRIALS: usize = 10_000;
const GLUING_TRIALS: usize = 100;
const GLUING_MAX_ATOMS: usize = 20;
const GLUING_LIMIT: Duration = Duration::from_secs(300);
const PLANTED_TRIALS: usize = 50;
const DIRAC_TRIALS: usize = 50;
const ORACLE_TRIALS: usize = 500;
const LIPSCHITZ_TRIALS: usize = 200;
const TREE_TRIALS: usize = 100;
const TREE_PIPELINE_LIMIT: Duration = Duration::from_secs(60);
/// `|w_plus - w_minus|` allowed in the tree pipeline.
const TREE_AGREEMENT_TOL: f64 = 1e-8;

struct Line {
    ok: bool,
    text: String,
}

fn suite_line(number: usize, title: &str, reports: &[SuiteReport], elapsed: Duration, limit: Option<Duration>) -> Line {
    let mut ok = reports.iter().all(SuiteReport::ok);
    let mut parts: Vec<String> = reports
        .iter()
        .map(|r| format!("{} {}/{}", r.name, r.passed, r.trials))
        .collect();
    if let Some(limit) = limit {
        ok &= elapsed <= limit;
        parts.push(format!("{:.1}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()));
    } else {
        parts.push(format!("{:.1}s", elapsed.as_secs_f64()));
    }
    for r in reports {
        for f in &r.failures {
            parts.push(format!("[{}] {f}", r.name));
        }
    }
    Line {
        ok,
        text: format!("{number:>2}. {title}: {}", parts.join("; ")),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["tropwass"];
    full.extend_from_slice(args);
    let code = execute(full, &mut out, &mut err);
    let text = if code == EXIT_OK { out } else { err };
    (code, String::from_utf8(text).expect("utf8"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("write fixture");
    path.to_str().expect("utf8 path").to_string()
}

fn worked_examples(dir: &Path) -> Line {
    let start = Instant::now();
    let mut notes = Vec::new();
    let bounded = write(dir, "bounded.json", r#"{"m":3,"n":3,"entries":[[2,0,0],[-2,2,1],[1,3,-1]]}"#);
    let (code, text) = cli(&["project", "--matrix", &bounded]);
    let vertices_ok = code == EXIT_OK && {
        let doc: Value = serde_json::from_str(&text).expect("json");
        let chart: Vec<Vec<f64>> = serde_json::from_value(doc["image_vertices_chart"].clone()).expect("chart");
        chart == vec![vec![-4.0, -1.0], vec![2.0, 3.0], vec![1.0, -1.0]]
    };
    notes.push(format!("image vertices {}", if vertices_ok { "(-4,-1) (2,3) (1,-1)" } else { "mismatch" }));

    // a - b = -2, a - c = -1, d - e = 5, d - f = 1
    let generic = write(dir, "generic.json", r#"{"m":2,"n":3,"entries":[[0,2,1],[0,-5,-1]]}"#);
    let (code, text) = cli(&["typecells", "--matrix", &generic]);
    let expected: BTreeSet<Vec<Vec<usize>>> = [
        vec![vec![1, 2], vec![], vec![]],
        vec![vec![2], vec![], vec![1]],
        vec![vec![], vec![], vec![1, 2]],
        vec![vec![], vec![1], vec![2]],
        vec![vec![], vec![1, 2], vec![]],
        vec![vec![2], vec![1], vec![]],
    ]
    .into_iter()
    .collect();
    let labels: BTreeSet<Vec<Vec<usize>>> = if code == EXIT_OK {
        let doc: Value = serde_json::from_str(&text).expect("json");
        doc["cells"]
            .as_array()
            .expect("cells")
            .iter()
            .map(|c| serde_json::from_value(c["label"].clone()).expect("label"))
            .collect()
    } else {
        BTreeSet::new()
    };
    let regions_ok = labels == expected;
    notes.push(format!("{} maximal regions, labels {}", labels.len(), if regions_ok { "match" } else { "differ" }));
    Line {
        ok: vertices_ok && regions_ok,
        text: format!(
            "10. worked examples as data: {}; {:.1}s",
            notes.join("; "),
            start.elapsed().as_secs_f64()
        ),
    }
}

fn tree_pipeline(dir: &Path) -> Line {
    let (three_point, t_suite) = timed(|| verify::ultrametric_trees_satisfy_three_point(SEED + 11, TREE_TRIALS));
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let cohort = |rng: &mut ChaCha8Rng, leaves: usize| -> String {
        (0..5)
            .map(|_| random_tree(rng, leaves, true).to_newick().expect("decimal lengths") + "\n")
            .collect()
    };
    write(dir, "four.nwk", &cohort(&mut rng, 4));
    write(dir, "five.nwk", &cohort(&mut rng, 5));
    let manifest = write(
        dir,
        "manifest.json",
        r#"{"cohorts":[{"label":"four","files":["four.nwk"]},{"label":"five","files":["five.nwk"]}]}"#,
    );
    let seed = SEED.to_string();
    let args = [
        "distance",
        "--manifest",
        &manifest,
        "--seed",
        &seed,
        "--max-structures",
        "40",
        "--restarts",
        "2",
        "--budget",
        "20",
    ];
    let (c1, first) = cli(&args);
    let (c2, second) = cli(&args);
    let elapsed = start.elapsed();
    let mut ok = three_point.ok() && c1 == EXIT_OK && c2 == EXIT_OK && first == second;
    let mut detail = format!("exit codes {c1}/{c2}");
    if c1 == EXIT_OK {
        let doc: Value = serde_json::from_str(&first).expect("json");
        let (wm, wp) = (doc["w_minus"].as_f64().unwrap_or(f64::NAN), doc["w_plus"].as_f64().unwrap_or(f64::NAN));
        ok &= wm.is_finite() && wp.is_finite() && (wm - wp).abs() <= TREE_AGREEMENT_TOL;
        detail = format!("w_minus {wm:.6}, w_plus {wp:.6}, identical reruns {}", first == second);
    }
    ok &= elapsed <= TREE_PIPELINE_LIMIT;
    Line {
        ok,
        text: format!(
            "11. tree pipeline: {} {}/{} ({:.1}s); 4 vs 5 leaves: {detail}; {:.1}s (limit {}s){}",
            three_point.name,
            three_point.passed,
            three_point.trials,
            t_suite.as_secs_f64(),
            elapsed.as_secs_f64(),
            TREE_PIPELINE_LIMIT.as_secs(),
            three_point.failures.iter().map(|f| format!("; {f}")).collect::<String>(),
        ),
    }
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut lines = Vec::new();

    let (r, t) = timed(|| verify::matrix_maps_are_non_expansive(SEED + 1, NON_EXPANSIVE_TRIALS, NON_EXPANSIVE_MAX_DIM));
    lines.push(suite_line(1, "non-expansiveness", &[r], t, Some(NON_EXPANSIVE_LIMIT)));

    let (r, t) = timed(|| verify::surjectivity_is_decided_constructively(SEED + 2, SURJECTIVITY_TRIALS));
    lines.push(suite_line(2, "surjectivity", &[r], t, None));

    let (rs, t) = timed(|| {
        vec![
            verify::simple_fibres_have_constant_dimension(SEED + 3, FIBRE_TRIALS, FIBRE_MAX_N),
            verify::non_simple_fibres_vary_in_dimension(SEED + 4, FIBRE_TRIALS, FIBRE_MAX_N),
        ]
    });
    lines.push(suite_line(3, "fibre dimension", &rs, t, None));

    let (r, t) = timed(|| verify::split_is_a_homeomorphism(SEED + 5, SPLIT_TRIALS));
    lines.push(suite_line(4, "homeomorphism", &[r], t, None));

    let quick = verify::quick_spec(SEED);
    let (r, t) = timed(|| verify::gluing_certificate_closes_the_gap(SEED + 6, GLUING_TRIALS, GLUING_MAX_ATOMS, &quick));
    lines.push(suite_line(5, "gluing certificate", &[r], t, Some(GLUING_LIMIT)));

    let zero = verify::zero_spec(SEED);
    let (r, t) = timed(|| verify::planted_projections_are_recovered(SEED + 7, PLANTED_TRIALS, &zero));
    lines.push(suite_line(6, "zero-distance soundness", &[r], t, None));

    let default = SearchSpec {
        seed: SEED,
        ..SearchSpec::default()
    };
    let (r, t) = timed(|| verify::dirac_pairs_are_at_distance_zero(SEED + 8, DIRAC_TRIALS, &default));
    lines.push(suite_line(7, "dirac-dirac", &[r], t, None));

    let (r, t) = timed(|| verify::transport_matches_reference(SEED + 9, ORACLE_TRIALS));
    lines.push(suite_line(8, "transport oracle", &[r], t, None));

    let (r, t) = timed(|| verify::frozen_family_is_lipschitz(SEED + 10, LIPSCHITZ_TRIALS));
    lines.push(suite_line(9, "restricted-family lipschitz", &[r], t, None));

    lines.push(worked_examples(dir.path()));
    lines.push(tree_pipeline(dir.path()));

    let mut failed = 0;
    for line in &lines {
        println!("{} {}", if line.ok { "PASS" } else { "FAIL" }, line.text);
        failed += usize::from(!line.ok);
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
