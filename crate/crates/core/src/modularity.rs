//! Modularity of a partition and the gain of moving one vertex.
//!
//! With `E_c` twice the number of edges inside community `c` and `D_c` the
//! total degree of its members,
//!
//! ```text
//! Q = Σ_c E_c / 2m − Σ_c (D_c / 2m)²
//! ```
//!
//! All counts are integers, so [`modularity_q`] evaluates the numerator exactly
//! and divides once.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexId};

pub type CommunityId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModularityError {
    #[error("partition covers {partition} vertices but the graph has {graph}")]
    VertexMismatch { partition: usize, graph: usize },
    #[error("modularity is undefined for a graph without edges")]
    NoEdges,
    #[error("vertex {vertex} already belongs to community {community}")]
    SameCommunity { vertex: VertexId, community: CommunityId },
}

/// Aggregates for one community. `internal2` is twice the number of internal
/// edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityStats {
    pub internal2: u64,
    pub degree: u64,
    pub size: usize,
}

/// Assignment of every vertex to a community, with per-community stats kept in
/// step.
///
/// Community ids are slots: a community keeps its id for its whole life and an
/// emptied one is retired (size 0) rather than renumbered, so ids handed out
/// earlier stay valid. [`Partition::compact`] renumbers to `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<CommunityId>,
    stats: Vec<CommunityStats>,
    total_degree: u64,
}

impl Partition {
    /// Builds a partition from per-vertex community ids. Ids need not be dense;
    /// unused ids below the maximum become retired slots.
    pub fn from_assignment(g: &Graph, assignment: Vec<CommunityId>) -> Result<Partition, ModularityError> {
        if assignment.len() != g.vertex_count() {
            return Err(ModularityError::VertexMismatch {
                partition: assignment.len(),
                graph: g.vertex_count(),
            });
        }
        let slots = assignment.iter().max().map_or(0, |&c| c + 1);
        let mut p = Partition {
            assignment,
            stats: vec![CommunityStats::default(); slots],
            total_degree: 0,
        };
        p.stats = p.recount(g);
        p.total_degree = 2 * g.edge_count() as u64;
        Ok(p)
    }

    /// Every vertex in community 0.
    pub fn single(g: &Graph) -> Partition {
        Partition::from_assignment(g, vec![0; g.vertex_count()]).expect("sizes match")
    }

    /// Vertex `v` in community `v`.
    pub fn singletons(g: &Graph) -> Partition {
        Partition::from_assignment(g, (0..g.vertex_count()).collect()).expect("sizes match")
    }

    pub fn vertex_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_of(&self, v: VertexId) -> CommunityId {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[CommunityId] {
        &self.assignment
    }

    pub fn stats(&self, c: CommunityId) -> CommunityStats {
        self.stats.get(c).copied().unwrap_or_default()
    }

    /// Number of slots ever allocated, live or retired.
    pub fn slot_count(&self) -> usize {
        self.stats.len()
    }

    /// Ids of non-empty communities, ascending.
    pub fn communities(&self) -> Vec<CommunityId> {
        (0..self.stats.len()).filter(|&c| self.stats[c].size > 0).collect()
    }

    pub fn community_count(&self) -> usize {
        self.stats.iter().filter(|s| s.size > 0).count()
    }

    /// Members of `c`, ascending.
    pub fn members(&self, c: CommunityId) -> Vec<VertexId> {
        (0..self.assignment.len()).filter(|&v| self.assignment[v] == c).collect()
    }

    /// Moves `vertices` into a fresh community and returns its id. Stats are
    /// recomputed from scratch.
    pub fn split_off(&mut self, g: &Graph, vertices: &[VertexId]) -> CommunityId {
        let id = self.stats.len();
        self.stats.push(CommunityStats::default());
        for &v in vertices {
            self.assignment[v] = id;
        }
        self.stats = self.recount(g);
        id
    }

    /// Stats rebuilt from the assignment alone, for consistency checks.
    pub fn recount(&self, g: &Graph) -> Vec<CommunityStats> {
        let mut stats = vec![CommunityStats::default(); self.stats.len()];
        for (v, &c) in self.assignment.iter().enumerate() {
            stats[c].size += 1;
            stats[c].degree += g.degree(v) as u64;
        }
        for &(u, v) in g.edges() {
            let c = self.assignment[u];
            if c == self.assignment[v] {
                stats[c].internal2 += 2;
            }
        }
        stats
    }

    pub fn stats_consistent(&self, g: &Graph) -> bool {
        self.recount(g) == self.stats
    }

    /// Copy with communities renumbered `0..k` in order of their smallest
    /// member.
    pub fn compact(&self) -> Vec<CommunityId> {
        let mut map = vec![usize::MAX; self.stats.len()];
        let mut next = 0;
        self.assignment
            .iter()
            .map(|&c| {
                if map[c] == usize::MAX {
                    map[c] = next;
                    next += 1;
                }
                map[c]
            })
            .collect()
    }

    /// Modularity from the maintained stats.
    pub fn q(&self) -> f64 {
        q_from_stats(&self.stats, self.total_degree)
    }
}

fn q_from_stats(stats: &[CommunityStats], two_m: u64) -> f64 {
    if two_m == 0 {
        return 0.0;
    }
    let two_m = two_m as i128;
    let mut num: i128 = 0;
    for s in stats {
        num += s.internal2 as i128 * two_m - (s.degree as i128) * (s.degree as i128);
    }
    num as f64 / (two_m * two_m) as f64
}

fn check(g: &Graph, p: &Partition) -> Result<(), ModularityError> {
    if p.vertex_count() != g.vertex_count() {
        return Err(ModularityError::VertexMismatch {
            partition: p.vertex_count(),
            graph: g.vertex_count(),
        });
    }
    if g.edge_count() == 0 {
        return Err(ModularityError::NoEdges);
    }
    Ok(())
}

/// Community-sum form, recomputed from the assignment (the partition's cached
/// stats are not trusted).
pub fn modularity_q(g: &Graph, p: &Partition) -> Result<f64, ModularityError> {
    check(g, p)?;
    Ok(q_from_stats(&p.recount(g), 2 * g.edge_count() as u64))
}

/// Sum over ordered vertex pairs of `(A_vw − d_v d_w / 2m) δ(c_v, c_w) / 2m`.
/// Quadratic; meant as a reference for [`modularity_q`].
pub fn modularity_q_pairwise(g: &Graph, p: &Partition) -> Result<f64, ModularityError> {
    check(g, p)?;
    let n = g.vertex_count();
    let two_m = 2.0 * g.edge_count() as f64;
    let mut sum = 0.0;
    for v in 0..n {
        for w in 0..n {
            if p.community_of(v) != p.community_of(w) {
                continue;
            }
            let a = if g.has_edge(v, w) { 1.0 } else { 0.0 };
            sum += a - (g.degree(v) * g.degree(w)) as f64 / two_m;
        }
    }
    Ok(sum / two_m)
}

/// Everything about vertex `v` needed to price moving it from `from` to `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveContext {
    pub v: VertexId,
    pub from: CommunityId,
    pub to: CommunityId,
    /// Edges from `v` to the rest of `from`.
    pub e_va: u64,
    /// Edges from `v` into `to`.
    pub e_vb: u64,
    pub d_v: u64,
}

impl MoveContext {
    pub fn new(g: &Graph, p: &Partition, v: VertexId, to: CommunityId) -> MoveContext {
        let from = p.community_of(v);
        let (mut e_va, mut e_vb) = (0, 0);
        for &(w, _) in g.neighbors(v) {
            let c = p.community_of(w);
            if c == from {
                e_va += 1;
            } else if c == to {
                e_vb += 1;
            }
        }
        MoveContext {
            v,
            from,
            to,
            e_va,
            e_vb,
            d_v: g.degree(v) as u64,
        }
    }
}

/// Change in Q from moving `ctx.v` out of A into B:
///
/// ```text
/// (E_VB − E_VA)/m + (D_A·D_V − D_V² − D_B·D_V) / 2m²
/// ```
///
/// where `D_A` still includes `v` and `D_B` does not.
pub fn move_q(
    ctx: &MoveContext,
    a: &CommunityStats,
    b: &CommunityStats,
    total_edges: usize,
) -> Result<f64, ModularityError> {
    if ctx.from == ctx.to {
        return Err(ModularityError::SameCommunity {
            vertex: ctx.v,
            community: ctx.from,
        });
    }
    if total_edges == 0 {
        return Err(ModularityError::NoEdges);
    }
    Ok(move_q_numerator(ctx, a, b, total_edges) as f64 / (2 * total_edges * total_edges) as f64)
}

/// `move_q` scaled by `2m²`, exact.
pub(crate) fn move_q_numerator(ctx: &MoveContext, a: &CommunityStats, b: &CommunityStats, m: usize) -> i128 {
    let m = m as i128;
    let dv = ctx.d_v as i128;
    2 * m * (ctx.e_vb as i128 - ctx.e_va as i128) + dv * (a.degree as i128 - dv - b.degree as i128)
}

/// Applies a move priced by `ctx`, updating stats in O(1). A community left
/// empty is retired.
pub fn apply_move(p: &mut Partition, ctx: &MoveContext) {
    debug_assert_eq!(p.assignment[ctx.v], ctx.from);
    if ctx.to >= p.stats.len() {
        p.stats.resize(ctx.to + 1, CommunityStats::default());
    }
    let a = &mut p.stats[ctx.from];
    a.internal2 -= 2 * ctx.e_va;
    a.degree -= ctx.d_v;
    a.size -= 1;
    let b = &mut p.stats[ctx.to];
    b.internal2 += 2 * ctx.e_vb;
    b.degree += ctx.d_v;
    b.size += 1;
    p.assignment[ctx.v] = ctx.to;
}
