//! Per-edge scores used to pick the next edge to cut.
//!
//! Betweenness is exact Brandes accumulation over unweighted shortest paths.
//! The clustering coefficients count short cycles through an edge and divide
//! by the most such cycles the endpoint degrees allow:
//!
//! ```text
//! C3(i,j) = (Z3 + 1) / min(k_i - 1, k_j - 1)
//! C4(i,j) = (Z4 + 1) / ((k_i - 1)(k_j - 1) - |N(i) ∩ N(j)|)
//! ```
//!
//! A zero denominator is reported as `f64::INFINITY`, which sorts above every
//! finite score.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, Subset, VertexId, WorkingGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeasureError {
    #[error("cannot score edges of an empty vertex subset")]
    EmptySubset,
    #[error("unknown measure {0:?} (expected betweenness, g3 or g4)")]
    UnknownKind(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Betweenness,
    ClusteringG3,
    ClusteringG4,
}

impl MeasureKind {
    pub fn is_clustering(self) -> bool {
        !matches!(self, MeasureKind::Betweenness)
    }

    /// Clustering kinds cut the lowest score, betweenness the highest.
    pub fn removes_maximum(self) -> bool {
        matches!(self, MeasureKind::Betweenness)
    }
}

impl FromStr for MeasureKind {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "betweenness" | "eb" => Ok(MeasureKind::Betweenness),
            "g3" | "clustering_g3" => Ok(MeasureKind::ClusteringG3),
            "g4" | "clustering_g4" => Ok(MeasureKind::ClusteringG4),
            other => Err(MeasureError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureKind::Betweenness => "betweenness",
            MeasureKind::ClusteringG3 => "g3",
            MeasureKind::ClusteringG4 => "g4",
        })
    }
}

/// Scores indexed by base edge id. Edges that were not scored (deleted, or
/// outside the subset) hold `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeScoreTable {
    pub kind: MeasureKind,
    scores: Vec<Option<f64>>,
}

impl EdgeScoreTable {
    pub fn new(kind: MeasureKind, edge_count: usize) -> EdgeScoreTable {
        EdgeScoreTable {
            kind,
            scores: vec![None; edge_count],
        }
    }

    pub fn get(&self, e: EdgeId) -> Option<f64> {
        self.scores[e]
    }

    pub fn set(&mut self, e: EdgeId, score: f64) {
        self.scores[e] = Some(score);
    }

    pub fn clear(&mut self, e: EdgeId) {
        self.scores[e] = None;
    }

    /// Scored edges in id order.
    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, f64)> + '_ {
        self.scores
            .iter()
            .enumerate()
            .filter_map(|(e, s)| s.map(|s| (e, s)))
    }

    pub fn len(&self) -> usize {
        self.scores.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The edge to cut next: minimum score for clustering kinds, maximum for
    /// betweenness. Scores equal up to floating-point noise count as tied and
    /// the smallest edge id wins.
    pub fn select_for_removal(&self) -> Option<(EdgeId, f64)> {
        let want_max = self.kind.removes_maximum();
        let best = self.iter().map(|(_, s)| s).reduce(|a, b| {
            if want_max {
                a.max(b)
            } else {
                a.min(b)
            }
        })?;
        self.iter().find(|&(_, s)| nearly_equal(s, best))
    }
}

fn nearly_equal(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

pub fn compute(
    kind: MeasureKind,
    g: &WorkingGraph<'_>,
    within: &Subset,
) -> Result<EdgeScoreTable, MeasureError> {
    match kind {
        MeasureKind::Betweenness => edge_betweenness(g, within),
        MeasureKind::ClusteringG3 => edge_clustering_g3(g, within),
        MeasureKind::ClusteringG4 => edge_clustering_g4(g, within),
    }
}

/// Exact edge betweenness inside `within`: for every unordered vertex pair, the
/// fraction of its shortest paths that cross the edge, summed.
pub fn edge_betweenness(g: &WorkingGraph<'_>, within: &Subset) -> Result<EdgeScoreTable, MeasureError> {
    if within.is_empty() {
        return Err(MeasureError::EmptySubset);
    }
    let base = g.base();
    let n = base.vertex_count();
    let mut acc = vec![0.0f64; base.edge_count()];

    let mut dist = vec![usize::MAX; n];
    let mut sigma = vec![0.0f64; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<(VertexId, EdgeId)>> = vec![Vec::new(); n];
    let mut order: Vec<VertexId> = Vec::with_capacity(within.len());
    let mut queue = VecDeque::new();

    for &s in within.members() {
        for &v in &order {
            dist[v] = usize::MAX;
            sigma[v] = 0.0;
            delta[v] = 0.0;
            preds[v].clear();
        }
        order.clear();
        dist[s] = 0;
        sigma[s] = 1.0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for (w, e) in g.neighbors_within(v, within) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push((v, e));
                }
            }
        }
        for &w in order.iter().rev() {
            for &(v, e) in &preds[w] {
                let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                acc[e] += c;
                delta[v] += c;
            }
        }
    }
    let mut table = EdgeScoreTable::new(MeasureKind::Betweenness, base.edge_count());
    for e in g.edges_within(within) {
        // both endpoints served as sources, so every pair was seen twice
        table.set(e, acc[e] / 2.0);
    }
    Ok(table)
}

/// Sorted live neighbor lists restricted to `within`.
fn local_adjacency(g: &WorkingGraph<'_>, within: &Subset) -> Vec<Vec<VertexId>> {
    let n = g.base().vertex_count();
    let mut adj = vec![Vec::new(); n];
    for &v in within.members() {
        adj[v] = g.neighbors_within(v, within).map(|(w, _)| w).collect();
    }
    adj
}

fn common_count(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

fn g3_score(adj: &[Vec<VertexId>], i: VertexId, j: VertexId) -> f64 {
    let (ki, kj) = (adj[i].len(), adj[j].len());
    let denom = ki.min(kj) - 1;
    if denom == 0 {
        return f64::INFINITY;
    }
    let z = common_count(&adj[i], &adj[j]);
    (z + 1) as f64 / denom as f64
}

/// Number of 4-cycles i-j-x-y-i through edge (i, j).
fn four_cycles(adj: &[Vec<VertexId>], i: VertexId, j: VertexId, mark: &mut [bool]) -> usize {
    for &y in &adj[i] {
        mark[y] = true;
    }
    let mut z = 0;
    for &x in &adj[j] {
        if x == i {
            continue;
        }
        for &y in &adj[x] {
            if y != j && mark[y] {
                z += 1;
            }
        }
    }
    for &y in &adj[i] {
        mark[y] = false;
    }
    z
}

fn g4_score(adj: &[Vec<VertexId>], i: VertexId, j: VertexId, mark: &mut [bool]) -> f64 {
    let (ki, kj) = (adj[i].len(), adj[j].len());
    let common = common_count(&adj[i], &adj[j]);
    let denom = (ki - 1) * (kj - 1) - common;
    if denom == 0 {
        return f64::INFINITY;
    }
    let z = four_cycles(adj, i, j, mark);
    (z + 1) as f64 / denom as f64
}

/// Edge clustering coefficient with triangles. Degrees are taken inside
/// `within` over live edges.
pub fn edge_clustering_g3(g: &WorkingGraph<'_>, within: &Subset) -> Result<EdgeScoreTable, MeasureError> {
    if within.is_empty() {
        return Err(MeasureError::EmptySubset);
    }
    let base = g.base();
    let adj = local_adjacency(g, within);
    let mut table = EdgeScoreTable::new(MeasureKind::ClusteringG3, base.edge_count());
    for e in g.edges_within(within) {
        let (i, j) = base.endpoints(e);
        table.set(e, g3_score(&adj, i, j));
    }
    Ok(table)
}

/// Edge clustering coefficient with 4-cycles.
pub fn edge_clustering_g4(g: &WorkingGraph<'_>, within: &Subset) -> Result<EdgeScoreTable, MeasureError> {
    if within.is_empty() {
        return Err(MeasureError::EmptySubset);
    }
    let base = g.base();
    let adj = local_adjacency(g, within);
    let mut mark = vec![false; base.vertex_count()];
    let mut table = EdgeScoreTable::new(MeasureKind::ClusteringG4, base.edge_count());
    for e in g.edges_within(within) {
        let (i, j) = base.endpoints(e);
        table.set(e, g4_score(&adj, i, j, &mut mark));
    }
    Ok(table)
}

/// Updates `prev` after `removed_edge` was deleted from `g`.
///
/// The result always equals a full recomputation. Clustering kinds only
/// rescore edges whose cycle counts or endpoint degrees can have changed:
/// edges touching an endpoint of the removed edge for triangles, and edges
/// touching an endpoint or one of their neighbors for 4-cycles. Betweenness is
/// recomputed from scratch.
pub fn rescore_after_removal(
    prev: &EdgeScoreTable,
    g: &WorkingGraph<'_>,
    removed_edge: EdgeId,
    within: &Subset,
) -> Result<EdgeScoreTable, MeasureError> {
    if within.is_empty() {
        return Err(MeasureError::EmptySubset);
    }
    let base = g.base();
    let (a, b) = base.endpoints(removed_edge);
    if prev.kind == MeasureKind::Betweenness || !within.contains(a) || !within.contains(b) {
        return compute(prev.kind, g, within);
    }
    let mut table = prev.clone();
    table.clear(removed_edge);

    let mut touched = vec![a, b];
    if prev.kind == MeasureKind::ClusteringG4 {
        for v in [a, b] {
            touched.extend(g.neighbors_within(v, within).map(|(w, _)| w));
        }
        touched.sort_unstable();
        touched.dedup();
    }
    let mut local = vec![Vec::new(); base.vertex_count()];
    let mut needed: Vec<VertexId> = Vec::new();
    for &v in &touched {
        needed.push(v);
        needed.extend(g.neighbors_within(v, within).map(|(w, _)| w));
    }
    if prev.kind == MeasureKind::ClusteringG4 {
        // 4-cycle counts walk two steps out from each endpoint
        let frontier = needed.clone();
        for v in frontier {
            needed.extend(g.neighbors_within(v, within).map(|(w, _)| w));
        }
    }
    needed.sort_unstable();
    needed.dedup();
    for &v in &needed {
        local[v] = g.neighbors_within(v, within).map(|(w, _)| w).collect();
    }
    let mut mark = vec![false; base.vertex_count()];
    for &v in &touched {
        for (w, e) in g.neighbors_within(v, within) {
            let (i, j) = (v.min(w), v.max(w));
            let s = match prev.kind {
                MeasureKind::ClusteringG3 => g3_score(&local, i, j),
                _ => g4_score(&local, i, j, &mut mark),
            };
            table.set(e, s);
        }
    }
    Ok(table)
}
