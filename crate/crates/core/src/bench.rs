//! Runs both algorithms over the standard benchmark networks and compares the
//! modularity reached with published reference values.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{self, Algorithm, EngineConfig, EngineError};
use crate::io::{self, Format, LoadError};

/// A benchmark network, its expected size, and reference modularity values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dataset {
    pub name: &'static str,
    /// File names tried in order inside the data directory.
    pub files: &'static [&'static str],
    pub vertices: usize,
    pub edges: usize,
    pub q_ccr: f64,
    pub q_ccr_ebr: f64,
    /// Minimum acceptable Q, where one is set.
    pub min_ccr: Option<f64>,
    pub min_ccr_ebr: Option<f64>,
}

impl Dataset {
    pub fn reference_q(&self, algo: Algorithm) -> f64 {
        match algo {
            Algorithm::Ccr => self.q_ccr,
            Algorithm::CcrEbr => self.q_ccr_ebr,
        }
    }

    pub fn threshold(&self, algo: Algorithm) -> Option<f64> {
        match algo {
            Algorithm::Ccr => self.min_ccr,
            Algorithm::CcrEbr => self.min_ccr_ebr,
        }
    }

    /// First candidate file present in `dir`.
    pub fn locate(&self, dir: &Path) -> Option<PathBuf> {
        self.files.iter().map(|f| dir.join(f)).find(|p| p.is_file())
    }
}

// Reference Q values as published for the two algorithms on each network;
// sizes are those of the publicly circulated files.
pub const DATASETS: [Dataset; 7] = [
    Dataset {
        name: "adjnoun",
        files: &["adjnoun.gml", "adjnoun.txt", "adjnoun.edges"],
        vertices: 112,
        edges: 425,
        q_ccr: 0.309,
        q_ccr_ebr: 0.309,
        min_ccr: None,
        min_ccr_ebr: Some(0.29),
    },
    Dataset {
        name: "email",
        files: &["email.gml", "email.txt", "email.edges"],
        vertices: 1133,
        edges: 5451,
        q_ccr: 0.4531,
        q_ccr_ebr: 0.5703,
        min_ccr: None,
        min_ccr_ebr: Some(0.54),
    },
    Dataset {
        name: "football",
        files: &["football.gml", "football.txt", "football.edges"],
        vertices: 115,
        edges: 613,
        q_ccr: 0.6001,
        q_ccr_ebr: 0.6044,
        min_ccr: None,
        min_ccr_ebr: Some(0.59),
    },
    Dataset {
        name: "jazz",
        files: &["jazz.gml", "jazz.txt", "jazz.edges"],
        vertices: 198,
        edges: 2742,
        q_ccr: 0.445,
        q_ccr_ebr: 0.445,
        min_ccr: None,
        min_ccr_ebr: Some(0.43),
    },
    Dataset {
        name: "karate",
        files: &["karate.gml", "karate.txt", "karate.edges"],
        vertices: 34,
        edges: 78,
        q_ccr: 0.4197,
        q_ccr_ebr: 0.4197,
        min_ccr: Some(0.40),
        min_ccr_ebr: Some(0.40),
    },
    Dataset {
        name: "lesmis",
        files: &["lesmis.gml", "lesmis.txt", "lesmis.edges"],
        vertices: 77,
        edges: 254,
        q_ccr: 0.5428,
        q_ccr_ebr: 0.5600,
        min_ccr: Some(0.52),
        min_ccr_ebr: Some(0.55),
    },
    Dataset {
        name: "polbooks",
        files: &["polbooks.gml", "polbooks.txt", "polbooks.edges"],
        vertices: 105,
        edges: 441,
        q_ccr: 0.5269,
        q_ccr_ebr: 0.5269,
        min_ccr: None,
        min_ccr_ebr: Some(0.51),
    },
];

pub fn dataset(name: &str) -> Option<&'static Dataset> {
    DATASETS.iter().find(|d| d.name == name)
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("data directory {0} does not exist")]
    MissingDir(PathBuf),
    #[error("{dataset}: {source}")]
    Load {
        dataset: &'static str,
        #[source]
        source: LoadError,
    },
    #[error("{dataset}: {source}")]
    Engine {
        dataset: &'static str,
        #[source]
        source: EngineError,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub algorithm: Algorithm,
    pub q_obtained: f64,
    pub q_paper: Option<f64>,
    pub threshold: Option<f64>,
    pub communities: usize,
    /// Whether (n, m) match the expected sizes.
    pub sizes_match: bool,
    /// `None` when no threshold applies.
    pub pass: Option<bool>,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub missing: Vec<String>,
}

impl BenchReport {
    /// No row failed its threshold or size check, and nothing was missing.
    pub fn all_passed(&self) -> bool {
        self.missing.is_empty() && self.rows.iter().all(|r| r.pass != Some(false) && r.sizes_match)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("dataset\tn\tm\talgorithm\tq_obtained\tq_paper\tthreshold\tcommunities\tpass\twall_time_ms\n");
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        for r in &self.rows {
            let pass = match (r.sizes_match, r.pass) {
                (false, _) => "fail",
                (true, Some(true)) => "pass",
                (true, Some(false)) => "fail",
                (true, None) => "-",
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.4}\t{}\t{}\t{}\t{}\t{:.1}\n",
                r.dataset,
                r.n,
                r.m,
                r.algorithm,
                r.q_obtained,
                opt(r.q_paper),
                opt(r.threshold),
                r.communities,
                pass,
                r.wall_time_ms
            ));
        }
        out
    }
}

/// Runs `algorithms` on every dataset found in `dir`, in dataset-name order.
/// Datasets without a file are listed in `missing`.
pub fn run_bench(dir: &Path, algorithms: &[Algorithm], cfg: &EngineConfig) -> Result<BenchReport, BenchError> {
    if !dir.is_dir() {
        return Err(BenchError::MissingDir(dir.to_path_buf()));
    }
    let mut report = BenchReport::default();
    for ds in &DATASETS {
        let Some(path) = ds.locate(dir) else {
            report.missing.push(ds.name.to_string());
            continue;
        };
        let (g, _) = io::load_graph(&path, Format::from_path(&path))
            .map_err(|source| BenchError::Load { dataset: ds.name, source })?;
        let sizes_match = (g.vertex_count(), g.edge_count()) == (ds.vertices, ds.edges);
        for &algo in algorithms {
            let start = Instant::now();
            let result =
                engine::run(&g, algo, cfg).map_err(|source| BenchError::Engine { dataset: ds.name, source })?;
            let wall_time_ms = start.elapsed().as_secs_f64() * 1000.0;
            let threshold = ds.threshold(algo);
            report.rows.push(BenchRow {
                dataset: ds.name.to_string(),
                n: g.vertex_count(),
                m: g.edge_count(),
                algorithm: algo,
                q_obtained: result.best_q,
                q_paper: Some(ds.reference_q(algo)),
                threshold,
                communities: result.community_count(),
                sizes_match,
                pass: threshold.map(|t| result.best_q >= t),
                wall_time_ms,
            });
        }
    }
    Ok(report)
}
