//! Acceptance checks. Each test prints one `[acceptance] <name>: PASS|FAIL`
//! line to stderr (visible even when output is captured) and then asserts.
//!
//! Benchmark networks are read from `MODDIV_DATA_DIR`, falling back to the
//! repository's `data/` directory.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use moddiv::bench::{self, Dataset};
use moddiv::engine::{self, Algorithm, EngineConfig};
use moddiv::graph::{Graph, Subset, WorkingGraph};
use moddiv::io::{self, Format};
use moddiv::measures;
use moddiv::modularity::{modularity_q, modularity_q_pairwise, Partition};
use moddiv::{cli, fixtures, oracles};

const SEED: u64 = 20_240_601;

fn data_dir() -> PathBuf {
    std::env::var_os("MODDIV_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
            dir.canonicalize().unwrap_or(dir)
        })
}

fn report(name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[acceptance] {name}: {verdict} ({detail})");
}

fn finish(name: &str, failures: &[String], detail: &str) {
    let pass = failures.is_empty();
    let detail = if pass {
        detail.to_string()
    } else {
        format!("{}; {}", failures.join("; "), detail)
    };
    report(name, pass, &detail);
    assert!(pass, "{name}: {detail}");
}

fn load(name: &str) -> Result<(Graph, &'static Dataset), String> {
    let ds = bench::dataset(name).expect("known dataset");
    let dir = data_dir();
    let path = ds
        .locate(&dir)
        .ok_or_else(|| format!("{name}: dataset missing from {} (set MODDIV_DATA_DIR)", dir.display()))?;
    let (g, _) = io::load_graph(&path, Format::from_path(&path)).map_err(|e| format!("{name}: {e}"))?;
    Ok((g, ds))
}

fn run(g: &Graph, algo: Algorithm) -> engine::DetectionResult {
    engine::run(g, algo, &EngineConfig::default()).expect("engine runs")
}

/// Runs `algo` on `name` and checks Q against `min`, collecting failures.
fn check_q(name: &str, algo: Algorithm, min: f64, failures: &mut Vec<String>, notes: &mut Vec<String>) -> Option<f64> {
    match load(name) {
        Err(e) => {
            failures.push(e);
            None
        }
        Ok((g, ds)) => {
            let r = run(&g, algo);
            notes.push(format!(
                "{name} {algo} Q={:.4} k={} ref={:.4}",
                r.best_q,
                r.community_count(),
                ds.reference_q(algo)
            ));
            if r.best_q < min {
                failures.push(format!("{name} {algo} Q={:.4} < {min}", r.best_q));
            }
            Some(r.best_q)
        }
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str, failures: &mut Vec<String>) -> String {
    if elapsed > limit {
        failures.push(format!("{what} took {elapsed:.2?} > {limit:?}"));
    }
    format!("{what} {elapsed:.2?}")
}

#[test]
fn dataset_sizes() {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let start = Instant::now();
    for ds in &bench::DATASETS {
        match load(ds.name) {
            Err(e) => failures.push(e),
            Ok((g, _)) => {
                let got = (g.vertex_count(), g.edge_count());
                if got != (ds.vertices, ds.edges) {
                    failures.push(format!("{} has {got:?}, expected {:?}", ds.name, (ds.vertices, ds.edges)));
                } else {
                    notes.push(format!("{} {:?}", ds.name, got));
                }
                let degree_sum: usize = (0..g.vertex_count()).map(|v| g.degree(v)).sum();
                if degree_sum != 2 * g.edge_count() {
                    failures.push(format!("{} degree sum {degree_sum} != 2m", ds.name));
                }
            }
        }
    }
    notes.push(within(start.elapsed(), Duration::from_secs(1), "loading", &mut failures));
    finish("dataset-sizes", &failures, &notes.join(", "));
}

#[test]
fn karate_quality() {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    match load("karate") {
        Err(e) => failures.push(e),
        Ok((g, _)) => {
            let start = Instant::now();
            for algo in [Algorithm::Ccr, Algorithm::CcrEbr] {
                let r = run(&g, algo);
                notes.push(format!("{algo} Q={:.4} k={}", r.best_q, r.community_count()));
                if r.best_q < 0.40 {
                    failures.push(format!("{algo} Q={:.4} < 0.40", r.best_q));
                }
                if (r.best_q - 0.4197).abs() > 0.0005 {
                    failures.push(format!("{algo} Q={:.4} outside 0.4197 +/- 0.0005", r.best_q));
                }
                if r.community_count() != 4 {
                    failures.push(format!("{algo} found {} communities, expected 4", r.community_count()));
                }
                let q = modularity_q(&g, &r.best_partition).unwrap();
                let pairwise = modularity_q_pairwise(&g, &r.best_partition).unwrap();
                if q != r.best_q || (q - pairwise).abs() > 1e-12 {
                    failures.push(format!("{algo} reported Q {} disagrees with recomputation {q}/{pairwise}", r.best_q));
                }
            }
            notes.push(within(start.elapsed(), Duration::from_secs(1), "runtime", &mut failures));
        }
    }
    finish("karate-quality", &failures, &notes.join(", "));
}

#[test]
fn lesmis_quality() {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let start = Instant::now();
    let ccr = check_q("lesmis", Algorithm::Ccr, 0.52, &mut failures, &mut notes);
    let ebr = check_q("lesmis", Algorithm::CcrEbr, 0.55, &mut failures, &mut notes);
    if let (Some(a), Some(b)) = (ccr, ebr) {
        if b < a {
            failures.push(format!("ccr-ebr Q={b:.4} below ccr Q={a:.4}"));
        }
    }
    notes.push(within(start.elapsed(), Duration::from_secs(5), "runtime", &mut failures));
    finish("lesmis-quality", &failures, &notes.join(", "));
}

#[test]
fn mid_size_networks() {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let start = Instant::now();
    for (name, min) in [("football", 0.59), ("polbooks", 0.51), ("adjnoun", 0.29), ("jazz", 0.43)] {
        check_q(name, Algorithm::CcrEbr, min, &mut failures, &mut notes);
    }
    notes.push(within(start.elapsed(), Duration::from_secs(60), "runtime", &mut failures));
    finish("mid-size-networks", &failures, &notes.join(", "));
}

#[test]
fn email_scale() {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    match load("email") {
        Err(e) => failures.push(e),
        Ok((g, _)) => {
            let start = Instant::now();
            let ccr = run(&g, Algorithm::Ccr);
            notes.push(format!("ccr Q={:.4}", ccr.best_q));
            notes.push(within(start.elapsed(), Duration::from_secs(60), "ccr", &mut failures));
            let start = Instant::now();
            let ebr = run(&g, Algorithm::CcrEbr);
            notes.push(format!("ccr-ebr Q={:.4}", ebr.best_q));
            notes.push(within(start.elapsed(), Duration::from_secs(600), "ccr-ebr", &mut failures));
            if ebr.best_q < 0.54 {
                failures.push(format!("ccr-ebr Q={:.4} < 0.54", ebr.best_q));
            }
        }
    }
    finish("email-scale", &failures, &notes.join(", "));
}

#[test]
fn oracle_equivalences() {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let (vs_naive, sum_law) = oracles::check_betweenness(SEED, 200);
    let reports = [
        oracles::check_q_forms(SEED, 1000),
        oracles::check_move_q(SEED, 10_000, moddiv::modularity::move_q),
        vs_naive,
        sum_law,
        oracles::check_rescoring(SEED, 60),
    ];
    let expected_cases = [1000, 10_000, 200, 200];
    for (r, &want) in reports.iter().zip(&expected_cases) {
        if r.cases != want {
            failures.push(format!("{} ran {} cases, expected {want}", r.name, r.cases));
        }
    }
    for r in &reports {
        notes.push(format!("{} n={} max={:.1e}", r.name, r.cases, r.max_abs_diff));
        if !r.passed() {
            failures.push(format!("{} failed: {:?}", r.name, r.failures.first()));
        }
    }
    finish("oracle-equivalences", &failures, &notes.join(", "));
}

#[test]
fn analytic_fixed_points() {
    let mut failures = Vec::new();
    for g in [fixtures::triangle(), fixtures::barbell(), fixtures::star(4), fixtures::complete(6)] {
        let q = modularity_q(&g, &Partition::single(&g)).unwrap();
        if q != 0.0 {
            failures.push(format!("single community Q={q}"));
        }
    }
    let edge = fixtures::path(2);
    let q = modularity_q(&edge, &Partition::singletons(&edge)).unwrap();
    if q != -0.5 {
        failures.push(format!("single edge singletons Q={q}"));
    }
    for g in [fixtures::star(5), fixtures::path(5), fixtures::barbell()] {
        let t = measures::edge_clustering_g3(&WorkingGraph::new(&g), &Subset::full(g.vertex_count())).unwrap();
        for (e, s) in t.iter() {
            let (u, v) = g.endpoints(e);
            let pendant = g.degree(u) == 1 || g.degree(v) == 1;
            if pendant != s.is_infinite() {
                failures.push(format!("edge ({u},{v}) pendant={pendant} score={s}"));
            }
        }
    }
    finish("analytic-fixed-points", &failures, "single community, single edge, pendant edges");
}

#[test]
fn engine_vs_exhaustion() {
    let mut failures = Vec::new();
    let corpus = oracles::engine_corpus(SEED, 100);
    let mut close = 0;
    for (i, g) in corpus.iter().enumerate() {
        assert!(g.vertex_count() <= 8);
        let (_, best) = oracles::exhaustive_best_partition(g).unwrap();
        for algo in [Algorithm::Ccr, Algorithm::CcrEbr] {
            let r = run(g, algo);
            // the exhaustive optimum is summed pairwise, so allow rounding noise
            if r.best_q > best + 1e-12 {
                failures.push(format!("case {i} {algo}: engine {} > optimum {best}", r.best_q));
            }
        }
        if run(g, Algorithm::CcrEbr).best_q >= 0.9 * best - 1e-12 {
            close += 1;
        }
    }
    if close < 90 {
        failures.push(format!("only {close}/100 cases within 90% of the optimum"));
    }
    for (name, g, want) in [
        ("two_triangles", fixtures::two_triangles(), 0.5),
        ("barbell", fixtures::barbell(), 12.0 / 14.0 - 0.5),
    ] {
        let (_, best) = oracles::exhaustive_best_partition(&g).unwrap();
        if (best - want).abs() > 1e-12 {
            failures.push(format!("{name} optimum {best}, expected {want}"));
        }
        for algo in [Algorithm::Ccr, Algorithm::CcrEbr] {
            let q = run(&g, algo).best_q;
            if (q - best).abs() > 1e-12 {
                failures.push(format!("{name} {algo} Q={q}, optimum {best}"));
            }
        }
    }
    finish("engine-vs-exhaustion", &failures, &format!("100 graphs, {close}/100 within 90% of optimum"));
}

#[test]
fn detect_is_deterministic() {
    let mut failures = Vec::new();
    let input = match bench::dataset("karate").unwrap().locate(&data_dir()) {
        Some(p) => p,
        None => {
            failures.push("karate: dataset missing (set MODDIV_DATA_DIR)".to_string());
            finish("detect-determinism", &failures, "");
            return;
        }
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let args = [
            "moddiv".into(),
            "detect".into(),
            "--input".into(),
            input.clone().into_os_string(),
            "--algo".into(),
            "ccr-ebr".into(),
            "--out-dir".into(),
            dir.path().as_os_str().to_owned(),
            "--no-timestamps".into(),
        ];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = cli::run(args, &mut out, &mut err);
        if code != 0 {
            failures.push(format!("detect exited {code}: {}", String::from_utf8_lossy(&err)));
        }
    }
    let files = ["partition.tsv", "dendrogram.json", "trace.jsonl", "dendrogram.nwk", "manifest.json"];
    for f in files {
        let a = std::fs::read(dirs[0].path().join(f));
        let b = std::fs::read(dirs[1].path().join(f));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b && !a.is_empty() => {}
            (Ok(_), Ok(_)) => failures.push(format!("{f} differs between runs")),
            _ => failures.push(format!("{f} was not written")),
        }
    }
    finish("detect-determinism", &failures, &files.join(", "));
}
