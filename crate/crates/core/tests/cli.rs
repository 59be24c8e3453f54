use std::fs;
use std::path::{Path, PathBuf};

use moddiv::cli;
use moddiv::modularity::{CommunityStats, ModularityError, MoveContext};
use moddiv::oracles::{self, SuiteOptions};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut full = vec!["moddiv"];
    full.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn detect_karate_summary_and_files() {
    let out = tempfile::tempdir().unwrap();
    let input = data("karate.gml");
    let (code, stdout, _) = run(&[
        "detect",
        "--input",
        input.to_str().unwrap(),
        "--algo",
        "ccr-ebr",
        "--out-dir",
        out.path().to_str().unwrap(),
        "--no-timestamps",
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "Q=0.4198 communities=4\n");
    let tsv = fs::read_to_string(out.path().join("partition.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 35);
    assert!(tsv.starts_with("vertex\tcommunity\n1\t0\n"));
    for line in fs::read_to_string(out.path().join("trace.jsonl")).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(["remove", "move", "accept", "reject"].contains(&v["type"].as_str().unwrap()));
        assert!(v["q_after"].is_number());
        assert!(v.get("payload").is_some());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.get("created_unix").is_none());
    assert_eq!(manifest["algorithm"], "ccr-ebr");
    assert_eq!(manifest["config"]["refine_max_passes"], 100);
    let newick = fs::read_to_string(out.path().join("dendrogram.nwk")).unwrap();
    assert!(newick.trim_end().ends_with(";"));
}

#[test]
fn detect_records_timestamp_by_default() {
    let out = tempfile::tempdir().unwrap();
    let input = data("karate.gml");
    let (code, _, _) = run(&[
        "detect",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["created_unix"].is_u64());
}

#[test]
fn detect_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.gml", "graph [ node [ id 1 ] ]");
    let out = dir.path().join("out");
    let (code, _, err) = run(&["detect", "--input", &empty, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("error:"));
    let (code, _, _) = run(&["detect", "--input", "/no/such/file.txt"]);
    assert_eq!(code, 2);
    let bad = write(dir.path(), "bad.gml", "graph [ node [ id 1 ] edge [ source 1 target 9 ] ]");
    let (code, _, err) = run(&["detect", "--input", &bad, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains('9'), "{err}");
}

#[test]
fn detect_config_errors_exit_3() {
    let input = data("karate.gml");
    let input = input.to_str().unwrap();
    let (code, _, err) = run(&["detect", "--input", input, "--algo", "ccr", "--measure", "betweenness"]);
    assert_eq!(code, 3);
    assert!(err.contains("betweenness"), "{err}");
    let (code, _, _) = run(&["detect", "--input", input, "--refine-max-passes", "0"]);
    assert_eq!(code, 3);
    let (code, _, _) = run(&["detect", "--input", input, "--algo", "louvain"]);
    assert_eq!(code, 3);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 3);
}

#[test]
fn help_exits_0() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("detect"));
}

#[test]
fn detect_reads_edge_lists_and_warns_about_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "barbell.txt",
        "# two triangles\na b\nb c\na c\nc d\nd e\ne f\nd f\nf d\n",
    );
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&["detect", "--input", &input, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "Q=0.3571 communities=2\n");
    assert!(err.contains("warning"), "{err}");
    let tsv = fs::read_to_string(out.join("partition.tsv")).unwrap();
    assert_eq!(tsv, "vertex\tcommunity\na\t0\nb\t0\nc\t0\nd\t1\ne\t1\nf\t1\n");
}

#[test]
fn measures_command() {
    let dir = tempfile::tempdir().unwrap();
    let barbell = write(dir.path(), "b.txt", "0 1\n0 2\n1 2\n2 3\n3 4\n3 5\n4 5\n");
    let (code, out, _) = run(&["measures", "--input", &barbell, "--measure", "g3"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().nth(1), Some("2\t3\t0.5"));

    let path = write(dir.path(), "p.txt", "a b\nb c\n");
    let (code, out, _) = run(&["measures", "--input", &path, "--measure", "betweenness"]);
    assert_eq!(code, 0);
    assert_eq!(out, "u\tv\tscore\na\tb\t2\nb\tc\t2\n");

    let star = write(dir.path(), "s.txt", "c x\nc y\nc z\n");
    let (code, out, _) = run(&["measures", "--input", &star]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().skip(1).filter(|l| l.ends_with("\tinf")).count(), 3);

    let (code, _, _) = run(&["measures", "--input", "/no/such.gml"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_passes_and_emits_json() {
    let (code, out, _) = run(&["verify"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["max_abs_diff"].as_f64().unwrap() < 1e-9);
    let names: Vec<&str> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"moveq-vs-recompute"));
}

fn flipped_move_q(
    ctx: &MoveContext,
    a: &CommunityStats,
    b: &CommunityStats,
    m: usize,
) -> Result<f64, ModularityError> {
    moddiv::modularity::move_q(ctx, a, b, m).map(|x| -x)
}

#[test]
fn verify_catches_a_sign_flip() {
    let opts = SuiteOptions {
        move_q: flipped_move_q,
        q_cases: 10,
        move_cases: 200,
        betweenness_cases: 5,
        rescore_cases: 2,
        engine_cases: 3,
    };
    let reports = oracles::run_suite_with(1, &opts);
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    assert_eq!(failed, vec!["moveq-vs-recompute"]);
    let json = serde_json::to_string(&reports).unwrap();
    let back: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(!back[1]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn bench_on_repository_data() {
    let out = tempfile::tempdir().unwrap();
    let dir = data("");
    let (code, stdout, err) = run(&[
        "bench",
        "--data-dir",
        dir.to_str().unwrap(),
        "--algo",
        "ccr",
        "--out-dir",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let karate = stdout.lines().find(|l| l.starts_with("karate\t")).unwrap();
    assert!(karate.starts_with("karate\t34\t78\tccr\t0.4198\t0.4197\t0.4000\t4\tpass\t"), "{karate}");
    let football = stdout.lines().find(|l| l.starts_with("football\t")).unwrap();
    assert!(football.contains("\t0.6001\t-\t"), "{football}");
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("bench.json")).unwrap()).unwrap();
    let rows = rows["rows"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["dataset"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    if err.contains("not found") {
        let (code, _, _) = run(&["bench", "--data-dir", dir.to_str().unwrap(), "--algo", "ccr", "--strict"]);
        assert_eq!(code, 4);
    }
}

#[test]
fn bench_missing_directory_exits_2() {
    let (code, _, err) = run(&["bench", "--data-dir", "/no/such/dir"]);
    assert_eq!(code, 2);
    assert!(err.contains("/no/such/dir"));
}
