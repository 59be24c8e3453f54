//! The `moddiv` command line.
//!
//! Exit codes: 0 success, 1 output or verification failure, 2 input error,
//! 3 configuration error, 4 benchmark threshold failure under `--strict`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bench::{self, BenchError};
use crate::engine::{self, Algorithm, EngineConfig, EngineError};
use crate::export;
use crate::graph::{Graph, Subset, WorkingGraph};
use crate::io::{self, Format, LoadReport};
use crate::measures::{self, MeasureKind};
use crate::oracles;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_STRICT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "moddiv", version, about = "Divisive community detection with modularity refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find communities and write partition, dendrogram and trace files.
    Detect(DetectArgs),
    /// Print per-edge scores as TSV.
    Measures(MeasuresArgs),
    /// Check the fast code paths against slow reference implementations.
    Verify(VerifyArgs),
    /// Run both algorithms on the benchmark networks.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Gml,
    Edgelist,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Gml => Format::Gml,
            FormatArg::Edgelist => Format::EdgeList,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Ccr,
    CcrEbr,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Algorithm {
        match a {
            AlgoArg::Ccr => Algorithm::Ccr,
            AlgoArg::CcrEbr => Algorithm::CcrEbr,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeasureArg {
    G3,
    G4,
    Betweenness,
}

impl From<MeasureArg> for MeasureKind {
    fn from(m: MeasureArg) -> MeasureKind {
        match m {
            MeasureArg::G3 => MeasureKind::ClusteringG3,
            MeasureArg::G4 => MeasureKind::ClusteringG4,
            MeasureArg::Betweenness => MeasureKind::Betweenness,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Graph file (GML or edge list).
    #[arg(long)]
    input: PathBuf,
    /// Input format; guessed from the extension when omitted (.gml is GML,
    /// anything else an edge list).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl InputArgs {
    fn format(&self) -> Format {
        self.format.map_or_else(|| Format::from_path(&self.input), Format::from)
    }
}

#[derive(Debug, Args)]
struct EngineArgs {
    /// Edge measure for the clustering phase.
    #[arg(long, value_enum, default_value = "g3")]
    measure: MeasureArg,
    #[arg(long, default_value_t = 100)]
    refine_max_passes: usize,
    #[arg(long, default_value_t = 1)]
    min_community_size: usize,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            measure: self.measure.into(),
            refine_max_passes: self.refine_max_passes,
            min_community_size: self.min_community_size,
            ..EngineConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "ccr-ebr")]
    algo: AlgoArg,
    #[command(flatten)]
    engine: EngineArgs,
    /// Directory for the output files; created if needed.
    #[arg(long, default_value = "moddiv-out")]
    out_dir: PathBuf,
    /// Leave the creation time out of manifest.json.
    #[arg(long)]
    no_timestamps: bool,
}

#[derive(Debug, Args)]
struct MeasuresArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "g3")]
    measure: MeasureArg,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20_240_601)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory holding the benchmark networks.
    #[arg(long, env = "MODDIV_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    /// Algorithms to run; both when omitted.
    #[arg(long, value_enum)]
    algo: Vec<AlgoArg>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Also write bench.tsv and bench.json here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Exit with status 4 if a threshold is missed or a dataset is absent.
    #[arg(long)]
    strict: bool,
    /// Accepted for symmetry with `detect`; bench output carries no timestamps.
    #[arg(long)]
    no_timestamps: bool,
}

/// Parses `args` (program name first) and runs the command. Returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_CONFIG
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::Detect(a) => detect(a, stdout, stderr),
        Command::Measures(a) => measures_cmd(a, stdout, stderr),
        Command::Verify(a) => verify(a, stdout),
        Command::Bench(a) => bench_cmd(a, stdout, stderr),
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl ToString) -> Failure {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Failure {
        let code = match e {
            EngineError::Config(_) => EXIT_CONFIG,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e)
    }
}

type CmdResult = Result<i32, Failure>;

fn load(input: &InputArgs, stderr: &mut dyn Write) -> Result<(Graph, LoadReport), Failure> {
    let (g, report) = io::load_graph(&input.input, input.format()).map_err(|e| Failure::new(EXIT_INPUT, e))?;
    for w in report.warnings() {
        let _ = writeln!(stderr, "warning: {}: {w}", input.input.display());
    }
    Ok((g, report))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
    Ok(path)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    input: &'a Path,
    format: String,
    algorithm: Algorithm,
    config: &'a EngineConfig,
    outputs: Vec<&'a str>,
    /// Reserved; the engine is deterministic.
    seed: Option<u64>,
    vertices: usize,
    edges: usize,
    q: f64,
    communities: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    created_unix: Option<u64>,
}

const DETECT_OUTPUTS: [&str; 5] = [
    "partition.tsv",
    "partition.json",
    "dendrogram.json",
    "dendrogram.nwk",
    "trace.jsonl",
];

fn detect(a: DetectArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let cfg = a.engine.config();
    cfg.validate().map_err(|e| Failure::new(EXIT_CONFIG, e))?;
    if !cfg.measure.is_clustering() {
        return Err(EngineError::Config(engine::ConfigError::BetweennessForClustering).into());
    }
    let (g, _) = load(&a.input, stderr)?;
    let algo: Algorithm = a.algo.into();
    let result = engine::run(&g, algo, &cfg)?;

    fs::create_dir_all(&a.out_dir)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", a.out_dir.display())))?;
    let p = &result.best_partition;
    let contents = [
        export::partition_tsv(&g, p),
        export::partition_json(&g, p),
        export::dendrogram_json(&g, &result.dendrogram),
        export::dendrogram_newick(&g, &result.dendrogram),
        export::trace_jsonl(&result.history),
    ];
    for (name, text) in DETECT_OUTPUTS.iter().zip(&contents) {
        write_file(&a.out_dir, name, text)?;
    }
    let created_unix = if a.no_timestamps {
        None
    } else {
        SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
    };
    let manifest = RunManifest {
        input: &a.input.input,
        format: a.input.format().to_string(),
        algorithm: algo,
        config: &cfg,
        outputs: DETECT_OUTPUTS.to_vec(),
        seed: None,
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        q: result.best_q,
        communities: result.community_count(),
        created_unix,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&a.out_dir, "manifest.json", &text)?;

    let _ = writeln!(stdout, "Q={:.4} communities={}", result.best_q, result.community_count());
    Ok(EXIT_OK)
}

fn measures_cmd(a: MeasuresArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let (g, _) = load(&a.input, stderr)?;
    let wg = WorkingGraph::new(&g);
    let table = measures::compute(a.measure.into(), &wg, &Subset::full(g.vertex_count()))
        .map_err(|e| Failure::new(EXIT_INPUT, e))?;
    let _ = write!(stdout, "{}", export::measures_tsv(&g, &table));
    Ok(EXIT_OK)
}

fn verify(a: VerifyArgs, stdout: &mut dyn Write) -> CmdResult {
    let reports = oracles::run_suite(a.seed);
    let passed = reports.iter().all(|r| r.passed());
    let doc = json!({
        "seed": a.seed,
        "passed": passed,
        "max_abs_diff": reports.iter().map(|r| r.max_abs_diff).fold(0.0, f64::max),
        "reports": reports,
    });
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}

fn bench_cmd(a: BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let cfg = a.engine.config();
    cfg.validate().map_err(|e| Failure::new(EXIT_CONFIG, e))?;
    let mut algos: Vec<Algorithm> = a.algo.iter().map(|&x| x.into()).collect();
    if algos.is_empty() {
        algos = vec![Algorithm::Ccr, Algorithm::CcrEbr];
    }
    algos.dedup();
    let report = bench::run_bench(&a.data_dir, &algos, &cfg).map_err(|e| match e {
        BenchError::Engine {
            source: EngineError::Config(_),
            ..
        } => Failure::new(EXIT_CONFIG, e),
        other => Failure::new(EXIT_INPUT, other),
    })?;
    for name in &report.missing {
        let _ = writeln!(stderr, "warning: dataset {name} not found in {}", a.data_dir.display());
    }
    let tsv = report.to_tsv();
    let _ = write!(stdout, "{tsv}");
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", dir.display())))?;
        write_file(dir, "bench.tsv", &tsv)?;
        let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
        json.push('\n');
        write_file(dir, "bench.json", &json)?;
    }
    if a.strict && !report.all_passed() {
        return Ok(EXIT_STRICT);
    }
    Ok(EXIT_OK)
}
