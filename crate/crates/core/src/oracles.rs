//! Slow reference implementations and the suite that checks the fast code
//! against them.
//!
//! Everything here favors being obviously correct over being fast, and each
//! entry point refuses inputs big enough to take more than a few seconds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{self, EngineConfig};
use crate::fixtures;
use crate::graph::{EdgeId, Graph, Subset, VertexId, WorkingGraph};
use crate::measures::{self, EdgeScoreTable, MeasureKind};
use crate::modularity::{
    self, apply_move, modularity_q, modularity_q_pairwise, CommunityStats, ModularityError, MoveContext, Partition,
};

pub const MAX_PATH_ENUMERATION: usize = 60;
pub const MAX_EXHAUSTIVE: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} is limited to {limit} vertices, got {n}")]
    TooLarge { what: &'static str, limit: usize, n: usize },
    #[error("cycle order must be 3 or 4, got {0}")]
    BadOrder(usize),
    #[error("graph has no edges")]
    NoEdges,
}

fn guard(what: &'static str, limit: usize, n: usize) -> Result<(), OracleError> {
    if n > limit {
        Err(OracleError::TooLarge { what, limit, n })
    } else {
        Ok(())
    }
}

/// Edge betweenness by listing every shortest path of every pair.
pub fn betweenness_naive(g: &WorkingGraph<'_>, within: &Subset) -> Result<EdgeScoreTable, OracleError> {
    guard("path enumeration", MAX_PATH_ENUMERATION, within.len())?;
    let base = g.base();
    let mut acc = vec![0.0; base.edge_count()];
    let members = within.members();
    for (i, &s) in members.iter().enumerate() {
        let dist = bfs_distances(g, within, s);
        for &t in &members[i + 1..] {
            if dist[t] == usize::MAX {
                continue;
            }
            let mut paths: Vec<Vec<EdgeId>> = Vec::new();
            let mut stack = Vec::new();
            walk_back(g, within, &dist, t, &mut stack, &mut paths);
            let mut through = vec![0usize; base.edge_count()];
            for p in &paths {
                for &e in p {
                    through[e] += 1;
                }
            }
            for (e, &k) in through.iter().enumerate() {
                if k > 0 {
                    acc[e] += k as f64 / paths.len() as f64;
                }
            }
        }
    }
    let mut table = EdgeScoreTable::new(MeasureKind::Betweenness, base.edge_count());
    for e in g.edges_within(within) {
        table.set(e, acc[e]);
    }
    Ok(table)
}

fn bfs_distances(g: &WorkingGraph<'_>, within: &Subset, s: VertexId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.base().vertex_count()];
    dist[s] = 0;
    let mut frontier = vec![s];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for v in frontier {
            for (w, _) in g.neighbors_within(v, within) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// Every shortest path ending at `v`, walked backwards toward the source.
fn walk_back(
    g: &WorkingGraph<'_>,
    within: &Subset,
    dist: &[usize],
    v: VertexId,
    stack: &mut Vec<EdgeId>,
    out: &mut Vec<Vec<EdgeId>>,
) {
    if dist[v] == 0 {
        out.push(stack.clone());
        return;
    }
    for (w, e) in g.neighbors_within(v, within) {
        if dist[w] + 1 == dist[v] {
            stack.push(e);
            walk_back(g, within, dist, w, stack, out);
            stack.pop();
        }
    }
}

/// The best partition over all set partitions of the vertices, scored with
/// the pairwise modularity formula. Ties keep the first one enumerated.
pub fn exhaustive_best_partition(g: &Graph) -> Result<(Partition, f64), OracleError> {
    let n = g.vertex_count();
    guard("exhaustive partitioning", MAX_EXHAUSTIVE, n)?;
    if g.edge_count() == 0 {
        return Err(OracleError::NoEdges);
    }
    // restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[..i])
    let mut a = vec![0usize; n];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let p = Partition::from_assignment(g, a.clone()).expect("sizes match");
        let q = modularity_q_pairwise(g, &p).expect("graph has edges");
        if best.as_ref().is_none_or(|(_, bq)| q > *bq + 1e-12) {
            best = Some((a.clone(), q));
        }
        let mut i = n;
        loop {
            if i <= 1 {
                let (a, q) = best.expect("at least one partition");
                let p = Partition::from_assignment(g, a).expect("sizes match");
                return Ok((p, q));
            }
            i -= 1;
            let max_prefix = a[..i].iter().copied().max().unwrap_or(0);
            if a[i] <= max_prefix {
                a[i] += 1;
                for x in &mut a[i + 1..] {
                    *x = 0;
                }
                break;
            }
        }
    }
}

/// Cycles of length `order` (3 or 4) through `edge`, counted by brute force
/// over live edges.
pub fn cycle_count_naive(g: &WorkingGraph<'_>, edge: EdgeId, order: usize) -> Result<usize, OracleError> {
    let base = g.base();
    let n = base.vertex_count();
    guard("cycle enumeration", MAX_PATH_ENUMERATION, n)?;
    let live = |u: VertexId, v: VertexId| base.find_edge(u, v).is_some_and(|e| !g.is_removed(e));
    let (i, j) = base.endpoints(edge);
    match order {
        3 => Ok((0..n).filter(|&w| w != i && w != j && live(i, w) && live(j, w)).count()),
        4 => {
            let mut count = 0;
            for x in 0..n {
                for y in 0..n {
                    let distinct = x != y && x != i && x != j && y != i && y != j;
                    if distinct && live(j, x) && live(x, y) && live(y, i) {
                        count += 1;
                    }
                }
            }
            Ok(count)
        }
        other => Err(OracleError::BadOrder(other)),
    }
}

/// G(n, p).
pub fn erdos_renyi(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// G(n, p) on top of a random spanning tree, so always connected.
pub fn random_connected(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut order: Vec<VertexId> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        edges.push((parent, order[i]));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Two random connected clusters on `0..n1` and `n1..n1+n2` joined by a single
/// bridge, whose id is returned.
pub fn two_cluster_bridge(n1: usize, n2: usize, p: f64, rng: &mut impl Rng) -> (Graph, EdgeId) {
    let a = random_connected(n1, p, rng);
    let b = random_connected(n2, p, rng);
    let u = rng.gen_range(0..n1);
    let v = n1 + rng.gen_range(0..n2);
    let edges = a
        .edges()
        .iter()
        .copied()
        .chain(b.edges().iter().map(|&(x, y)| (x + n1, y + n1)))
        .chain([(u, v)]);
    let g = Graph::from_edges(n1 + n2, edges);
    let bridge = g.find_edge(u, v).expect("bridge was added");
    (g, bridge)
}

/// Two dense clusters with sparse links between them. Not necessarily
/// connected.
pub fn planted_two_cluster(n: usize, p_in: f64, p_out: f64, rng: &mut impl Rng) -> Graph {
    let half = n / 2;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if (u < half) == (v < half) { p_in } else { p_out };
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub input: String,
    pub expected: f64,
    pub got: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub cases: usize,
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub failures: Vec<Failure>,
}

impl OracleReport {
    fn new(name: &str, tolerance: f64) -> OracleReport {
        OracleReport {
            name: name.to_string(),
            cases: 0,
            max_abs_diff: 0.0,
            tolerance,
            failures: Vec::new(),
        }
    }

    /// Records one comparison. Failures beyond the first 20 are counted in
    /// `max_abs_diff` but not listed.
    fn check(&mut self, input: impl FnOnce() -> String, expected: f64, got: f64) {
        self.cases += 1;
        let diff = if expected == got { 0.0 } else { (expected - got).abs() };
        let diff = if diff.is_nan() { f64::INFINITY } else { diff };
        self.max_abs_diff = self.max_abs_diff.max(diff);
        if diff > self.tolerance && self.failures.len() < 20 {
            self.failures.push(Failure {
                input: input(),
                expected,
                got,
            });
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub type MoveQFn = fn(&MoveContext, &CommunityStats, &CommunityStats, usize) -> Result<f64, ModularityError>;

/// Knobs for [`run_suite_with`]. The defaults are the sizes the acceptance
/// tests pin.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub move_q: MoveQFn,
    pub q_cases: usize,
    pub move_cases: usize,
    pub betweenness_cases: usize,
    pub rescore_cases: usize,
    pub engine_cases: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            move_q: modularity::move_q,
            q_cases: 1000,
            move_cases: 10_000,
            betweenness_cases: 200,
            rescore_cases: 60,
            engine_cases: 100,
        }
    }
}

pub fn run_suite(seed: u64) -> Vec<OracleReport> {
    run_suite_with(seed, &SuiteOptions::default())
}

pub fn run_suite_with(seed: u64, opts: &SuiteOptions) -> Vec<OracleReport> {
    let (vs_naive, sum_law) = check_betweenness(seed, opts.betweenness_cases);
    vec![
        check_q_forms(seed, opts.q_cases),
        check_move_q(seed, opts.move_cases, opts.move_q),
        vs_naive,
        sum_law,
        check_rescoring(seed, opts.rescore_cases),
        check_cycle_counts(seed),
        check_engine_bound(seed, opts.engine_cases),
    ]
}

const DENSITIES: [f64; 3] = [0.1, 0.3, 0.6];

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_partition(g: &Graph, rng: &mut impl Rng) -> Partition {
    let n = g.vertex_count();
    let k = rng.gen_range(1..=n.max(1));
    let assignment = (0..n).map(|_| rng.gen_range(0..k)).collect();
    Partition::from_assignment(g, assignment).expect("sizes match")
}

/// Random graph with at least one edge.
fn random_nonempty(rng: &mut impl Rng, max_n: usize) -> Graph {
    loop {
        let n = rng.gen_range(2..=max_n);
        let p = *DENSITIES.choose(rng).expect("nonempty");
        let g = erdos_renyi(n, p, rng);
        if g.edge_count() > 0 {
            return g;
        }
    }
}

pub fn check_q_forms(seed: u64, cases: usize) -> OracleReport {
    let mut report = OracleReport::new("q-fast-vs-pairwise", 1e-12);
    let mut rng = rng_for(seed, 1);
    for case in 0..cases {
        let g = random_nonempty(&mut rng, 30);
        let p = random_partition(&g, &mut rng);
        let fast = modularity_q(&g, &p).expect("valid input");
        let slow = modularity_q_pairwise(&g, &p).expect("valid input");
        report.check(|| digest(seed, case, &g), slow, fast);
    }
    report
}

pub fn check_move_q(seed: u64, cases: usize, move_q: MoveQFn) -> OracleReport {
    let mut report = OracleReport::new("moveq-vs-recompute", 1e-12);
    let mut rng = rng_for(seed, 2);
    let mut case = 0;
    while case < cases {
        let g = random_nonempty(&mut rng, 30);
        let mut p = random_partition(&g, &mut rng);
        let slots = p.slot_count();
        if slots < 2 {
            continue;
        }
        // a run of moves on the same graph
        for _ in 0..50 {
            if case == cases {
                break;
            }
            let v = rng.gen_range(0..g.vertex_count());
            let mut to = rng.gen_range(0..slots - 1);
            if to >= p.community_of(v) {
                to += 1;
            }
            let ctx = MoveContext::new(&g, &p, v, to);
            let gain = move_q(&ctx, &p.stats(ctx.from), &p.stats(to), g.edge_count()).expect("distinct communities");
            let before = modularity_q(&g, &p).expect("valid input");
            apply_move(&mut p, &ctx);
            let after = modularity_q(&g, &p).expect("valid input");
            report.check(|| format!("{} v={v} {}->{to}", digest(seed, case, &g), ctx.from), after - before, gain);
            case += 1;
        }
    }
    report
}

/// Fast vs naive betweenness, and the sum law, over the same graphs.
pub fn check_betweenness(seed: u64, cases: usize) -> (OracleReport, OracleReport) {
    let mut vs_naive = OracleReport::new("betweenness-vs-naive", 1e-9);
    let mut sum_law = OracleReport::new("betweenness-sum-law", 1e-9);
    let mut rng = rng_for(seed, 3);
    for case in 0..cases {
        let n = rng.gen_range(4..=40);
        let p = *DENSITIES.choose(&mut rng).expect("nonempty");
        let g = random_connected(n, p, &mut rng);
        let wg = WorkingGraph::new(&g);
        let all = Subset::full(n);
        let fast = measures::edge_betweenness(&wg, &all).expect("nonempty");
        let slow = betweenness_naive(&wg, &all).expect("within guard");
        let worst = fast
            .iter()
            .map(|(e, s)| (s - slow.get(e).unwrap_or(f64::NAN)).abs())
            .fold(0.0, f64::max);
        vs_naive.check(|| digest(seed, case, &g), 0.0, worst);

        let total: f64 = fast.iter().map(|(_, s)| s).sum();
        let mut distance_sum = 0usize;
        for s in 0..n {
            let d = bfs_distances(&wg, &all, s);
            distance_sum += d[s + 1..].iter().sum::<usize>();
        }
        sum_law.check(|| digest(seed, case, &g), distance_sum as f64, total);
    }
    (vs_naive, sum_law)
}

/// Incremental clustering rescoring vs full recomputation along random removal
/// sequences. Exact equality is required.
pub fn check_rescoring(seed: u64, cases: usize) -> OracleReport {
    let mut report = OracleReport::new("clustering-incremental-vs-full", 0.0);
    let mut rng = rng_for(seed, 4);
    for case in 0..cases {
        let n = rng.gen_range(4..=40);
        let p = *DENSITIES.choose(&mut rng).expect("nonempty");
        let g = random_connected(n, p, &mut rng);
        let kind = if case % 2 == 0 {
            MeasureKind::ClusteringG3
        } else {
            MeasureKind::ClusteringG4
        };
        // sometimes restrict to a random subset
        let within = if case % 3 == 0 {
            Subset::new(n, (0..n).filter(|_| rng.gen_bool(0.7)))
        } else {
            Subset::full(n)
        };
        if within.is_empty() {
            continue;
        }
        let mut wg = WorkingGraph::new(&g);
        let mut table = measures::compute(kind, &wg, &within).expect("nonempty");
        let mut order: Vec<EdgeId> = (0..g.edge_count()).collect();
        order.shuffle(&mut rng);
        for e in order {
            wg.remove(e);
            table = measures::rescore_after_removal(&table, &wg, e, &within).expect("nonempty");
            let full = measures::compute(kind, &wg, &within).expect("nonempty");
            let same = table == full;
            report.check(
                || format!("{} kind={kind} removed={}", digest(seed, case, &g), wg.removed_edges().len()),
                0.0,
                if same { 0.0 } else { 1.0 },
            );
        }
    }
    report
}

/// Clustering scores rebuilt from brute-force cycle counts.
pub fn check_cycle_counts(seed: u64) -> OracleReport {
    let mut report = OracleReport::new("clustering-vs-cycle-enumeration", 0.0);
    let mut rng = rng_for(seed, 5);
    for case in 0..40 {
        let n = rng.gen_range(4..=30);
        let p = *DENSITIES.choose(&mut rng).expect("nonempty");
        let g = erdos_renyi(n, p, &mut rng);
        let wg = WorkingGraph::new(&g);
        let all = Subset::full(n);
        let g3 = measures::edge_clustering_g3(&wg, &all).expect("nonempty");
        let g4 = measures::edge_clustering_g4(&wg, &all).expect("nonempty");
        for e in 0..g.edge_count() {
            let (i, j) = g.endpoints(e);
            let (ki, kj) = (g.degree(i), g.degree(j));
            let z3 = cycle_count_naive(&wg, e, 3).expect("small");
            let z4 = cycle_count_naive(&wg, e, 4).expect("small");
            let d3 = ki.min(kj) - 1;
            let want3 = if d3 == 0 { f64::INFINITY } else { (z3 + 1) as f64 / d3 as f64 };
            let d4 = (ki - 1) * (kj - 1) - z3;
            let want4 = if d4 == 0 { f64::INFINITY } else { (z4 + 1) as f64 / d4 as f64 };
            report.check(|| format!("{} edge={e} g=3", digest(seed, case, &g)), want3, g3.get(e).unwrap_or(f64::NAN));
            report.check(|| format!("{} edge={e} g=4", digest(seed, case, &g)), want4, g4.get(e).unwrap_or(f64::NAN));
        }
    }
    report
}

/// The engine can never beat the exhaustive optimum. `expected` is the
/// optimum, `got` the amount the engine exceeded it by (0 when it did not).
pub fn check_engine_bound(seed: u64, cases: usize) -> OracleReport {
    let mut report = OracleReport::new("engine-vs-exhaustive", 1e-12);
    for (case, g) in engine_corpus(seed, cases).iter().enumerate() {
        let (_, best) = exhaustive_best_partition(g).expect("small");
        for algo in [engine::Algorithm::Ccr, engine::Algorithm::CcrEbr] {
            let r = engine::run(g, algo, &EngineConfig::default()).expect("valid config");
            let excess = (r.best_q - best).max(0.0);
            report.check(|| format!("{} algo={algo}", digest(seed, case, g)), 0.0, excess);
        }
    }
    for (name, g) in [("two_triangles", fixtures::two_triangles()), ("barbell", fixtures::barbell())] {
        let (_, best) = exhaustive_best_partition(&g).expect("small");
        let r = engine::run_ccr(&g, &EngineConfig::default()).expect("valid config");
        report.check(|| format!("fixture={name}"), best, r.best_q);
    }
    report
}

/// Seeded random connected graphs with 3 to 8 vertices.
pub fn engine_corpus(seed: u64, cases: usize) -> Vec<Graph> {
    let mut rng = rng_for(seed, 6);
    (0..cases)
        .map(|_| {
            let n = rng.gen_range(3..=8);
            let p = *DENSITIES.choose(&mut rng).expect("nonempty");
            random_connected(n, p, &mut rng)
        })
        .collect()
}

fn digest(seed: u64, case: usize, g: &Graph) -> String {
    format!("seed={seed} case={case} n={} m={}", g.vertex_count(), g.edge_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_betweenness_small_cases() {
        let g = fixtures::path(3);
        let t = betweenness_naive(&WorkingGraph::new(&g), &Subset::full(3)).unwrap();
        assert_eq!(t.get(0), Some(2.0));
        assert_eq!(t.get(1), Some(2.0));
        let g = fixtures::complete(4);
        let t = betweenness_naive(&WorkingGraph::new(&g), &Subset::full(4)).unwrap();
        assert!(t.iter().all(|(_, s)| s == 1.0));
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn naive_betweenness_guard() {
        let g = fixtures::path(61);
        assert!(matches!(
            betweenness_naive(&WorkingGraph::new(&g), &Subset::full(61)),
            Err(OracleError::TooLarge { n: 61, .. })
        ));
    }

    #[test]
    fn exhaustive_fixtures() {
        let (p, q) = exhaustive_best_partition(&fixtures::two_triangles()).unwrap();
        assert!((q - 0.5).abs() < 1e-12);
        assert_eq!(p.compact(), vec![0, 0, 0, 1, 1, 1]);
        let (p, q) = exhaustive_best_partition(&fixtures::path(2)).unwrap();
        assert_eq!(p.community_count(), 1);
        assert!(q.abs() < 1e-12);
        let (p, q) = exhaustive_best_partition(&fixtures::triangle()).unwrap();
        assert_eq!(p.community_count(), 1);
        assert!(q.abs() < 1e-12);
        let (_, q) = exhaustive_best_partition(&fixtures::barbell()).unwrap();
        assert!((q - 0.357142857142857).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_guard() {
        assert!(matches!(
            exhaustive_best_partition(&fixtures::path(11)),
            Err(OracleError::TooLarge { n: 11, .. })
        ));
    }

    #[test]
    fn cycle_counts() {
        let g = fixtures::complete(4);
        assert_eq!(cycle_count_naive(&WorkingGraph::new(&g), 0, 3).unwrap(), 2);
        let g = fixtures::cycle(4);
        assert_eq!(cycle_count_naive(&WorkingGraph::new(&g), 0, 4).unwrap(), 1);
        let g = fixtures::cycle(5);
        for e in 0..5 {
            assert_eq!(cycle_count_naive(&WorkingGraph::new(&g), e, 3).unwrap(), 0);
        }
        assert_eq!(
            cycle_count_naive(&WorkingGraph::new(&g), 0, 5),
            Err(OracleError::BadOrder(5))
        );
    }

    #[test]
    fn generators_are_seeded() {
        let a = random_connected(20, 0.1, &mut rng_for(7, 0));
        let b = random_connected(20, 0.1, &mut rng_for(7, 0));
        assert_eq!(a.edges(), b.edges());
        let (g, bridge) = two_cluster_bridge(5, 7, 0.3, &mut rng_for(1, 0));
        let (u, v) = g.endpoints(bridge);
        assert!(u < 5 && v >= 5);
    }

    #[test]
    fn report_flags_differences() {
        let mut r = OracleReport::new("x", 1e-12);
        r.check(|| "a".into(), 1.0, 1.0);
        assert!(r.passed());
        r.check(|| "b".into(), 1.0, 1.1);
        assert!(!r.passed());
        assert_eq!(r.failures[0].input, "b");
        assert_eq!(r.cases, 2);
    }
}
