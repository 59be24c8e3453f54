//! Divisive community detection.
//!
//! A work queue holds communities still open for division. Each one is
//! bisected by cutting edges in score order until it falls apart, vertices near
//! the cut are moved wherever they raise modularity, and the split is kept only
//! if global Q went up. [`run_ccr`] does this with an edge clustering
//! coefficient; [`run_ccr_ebr`] then re-divides every resulting community with
//! edge betweenness and finishes with one refinement over the whole graph.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{connected_components, EdgeId, Graph, Subset, VertexId, WorkingGraph};
use crate::measures::{self, MeasureError, MeasureKind};
use crate::modularity::{apply_move, move_q_numerator, CommunityId, MoveContext, Partition};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("refine_max_passes must be at least 1")]
    ZeroPasses,
    #[error("min_community_size must be at least 1")]
    ZeroMinSize,
    #[error("q_improvement_eps must be finite and non-negative, got {0}")]
    BadEps(f64),
    #[error("the clustering phase cannot use edge betweenness; pick g3 or g4")]
    BetweennessForClustering,
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("graph has no edges")]
    NoEdges,
    #[error("community of {size} vertices has no internal edge to cut")]
    NoInternalEdges { size: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    SmallestEdgeId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub measure: MeasureKind,
    /// Upper bound on refinement rounds per call.
    pub refine_max_passes: usize,
    /// Bisections leaving a side smaller than this are rejected.
    pub min_community_size: usize,
    pub tie_break: TieBreak,
    /// A split is kept, and a move applied, only if it gains more than this.
    pub q_improvement_eps: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            measure: MeasureKind::ClusteringG3,
            refine_max_passes: 100,
            min_community_size: 1,
            tie_break: TieBreak::SmallestEdgeId,
            q_improvement_eps: 1e-12,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.refine_max_passes == 0 {
            return Err(ConfigError::ZeroPasses);
        }
        if self.min_community_size == 0 {
            return Err(ConfigError::ZeroMinSize);
        }
        if !self.q_improvement_eps.is_finite() || self.q_improvement_eps < 0.0 {
            return Err(ConfigError::BadEps(self.q_improvement_eps));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ccr")]
    Ccr,
    #[serde(rename = "ccr-ebr")]
    CcrEbr,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ccr" => Ok(Algorithm::Ccr),
            "ccr-ebr" | "ccr_ebr" => Ok(Algorithm::CcrEbr),
            other => Err(format!("unknown algorithm {other:?} (expected ccr or ccr-ebr)")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Ccr => "ccr",
            Algorithm::CcrEbr => "ccr-ebr",
        })
    }
}

pub fn run(g: &Graph, algo: Algorithm, cfg: &EngineConfig) -> Result<DetectionResult, EngineError> {
    match algo {
        Algorithm::Ccr => run_ccr(g, cfg),
        Algorithm::CcrEbr => run_ccr_ebr(g, cfg),
    }
}

/// Vertices that sit next to a cut and are candidates for moving.
///
/// Kept as one set over the whole graph; the borderline of a community is the
/// part of it that lies in that community.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BorderlineSet {
    vertices: BTreeSet<VertexId>,
}

impl BorderlineSet {
    pub fn new() -> BorderlineSet {
        BorderlineSet::default()
    }

    /// Every vertex with a neighbor in another community.
    pub fn from_partition(g: &Graph, p: &Partition) -> BorderlineSet {
        let vertices = (0..g.vertex_count())
            .filter(|&v| {
                let c = p.community_of(v);
                g.neighbors(v).iter().any(|&(w, _)| p.community_of(w) != c)
            })
            .collect();
        BorderlineSet { vertices }
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        self.vertices.insert(v)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// All borderline vertices, ascending.
    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn in_community<'a>(&'a self, p: &'a Partition, c: CommunityId) -> impl Iterator<Item = VertexId> + 'a {
        self.iter().filter(move |&v| p.community_of(v) == c)
    }
}

impl Extend<VertexId> for BorderlineSet {
    fn extend<I: IntoIterator<Item = VertexId>>(&mut self, iter: I) {
        self.vertices.extend(iter)
    }
}

fn serialize_score<S: Serializer>(score: &f64, s: S) -> Result<S::Ok, S::Error> {
    if score.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*score)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Removal {
    pub edge: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    #[serde(serialize_with = "serialize_score")]
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MoveRecord {
    pub vertex: VertexId,
    pub from: CommunityId,
    pub to: CommunityId,
    pub gain: f64,
}

/// The two sides of a bisection, each ascending, ordered by smallest vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Bisection {
    pub sides: [Vec<VertexId>; 2],
    pub removals: Vec<Removal>,
    /// Endpoints of every removed edge.
    pub borderline: BTreeSet<VertexId>,
}

/// Cuts edges of `community` in score order until it splits in two.
///
/// Clustering kinds cut the lowest score, betweenness the highest. Scores are
/// taken over live edges inside the community and refreshed after every cut.
/// Removed edges stay removed in `g`; the caller restores them.
pub fn bisect(g: &mut WorkingGraph<'_>, community: &Subset, measure: MeasureKind) -> Result<Bisection, EngineError> {
    if community.len() < 2 || g.edges_within(community).is_empty() {
        return Err(EngineError::NoInternalEdges { size: community.len() });
    }
    let base = g.base();
    let mut table = measures::compute(measure, g, community)?;
    let mut removals = Vec::new();
    let mut borderline = BTreeSet::new();
    loop {
        let (e, score) = table
            .select_for_removal()
            .expect("a connected community with edges always has a live internal edge");
        let (u, v) = base.endpoints(e);
        g.remove(e);
        removals.push(Removal { edge: e, u, v, score });
        borderline.insert(u);
        borderline.insert(v);
        if !g.reachable(u, v, community) {
            let comps = connected_components(g, Some(community));
            let mut groups = comps.groups().into_iter();
            let first = groups.next().unwrap_or_default();
            // any stragglers (only if the input was disconnected) join the second side
            let second: Vec<VertexId> = {
                let mut rest: Vec<VertexId> = groups.flatten().collect();
                rest.sort_unstable();
                rest
            };
            return Ok(Bisection {
                sides: [first, second],
                removals,
                borderline,
            });
        }
        table = measures::rescore_after_removal(&table, g, e, community)?;
    }
}

/// Moves borderline vertices between adjacent communities while that raises Q.
///
/// Works in rounds. Within a round the single best positive move among
/// borderline vertices not yet moved that round is applied, repeatedly, until
/// none is left; ties go to the smaller vertex, then the smaller destination
/// id. A moved vertex stays borderline, and its neighbors left behind in the
/// source community become borderline. Stops after a round without moves or
/// after `refine_max_passes` rounds.
pub fn refine(g: &Graph, p: &mut Partition, borderline: &mut BorderlineSet, cfg: &EngineConfig) -> Vec<MoveRecord> {
    refine_traced(g, p, borderline, cfg).into_iter().map(|(mv, _)| mv).collect()
}

/// [`refine`], also returning Q after each move.
fn refine_traced(
    g: &Graph,
    p: &mut Partition,
    borderline: &mut BorderlineSet,
    cfg: &EngineConfig,
) -> Vec<(MoveRecord, f64)> {
    let m = g.edge_count();
    let mut moves = Vec::new();
    if m == 0 {
        return moves;
    }
    let scale = (2 * m * m) as f64;
    let mut counts: HashMap<CommunityId, u64> = HashMap::new();
    for _ in 0..cfg.refine_max_passes {
        let mut moved = vec![false; g.vertex_count()];
        let mut any = false;
        loop {
            let mut best: Option<(i128, VertexId, CommunityId)> = None;
            for v in borderline.iter() {
                if moved[v] {
                    continue;
                }
                let a = p.community_of(v);
                counts.clear();
                for &(w, _) in g.neighbors(v) {
                    *counts.entry(p.community_of(w)).or_default() += 1;
                }
                let e_va = counts.get(&a).copied().unwrap_or(0);
                let mut targets: Vec<(CommunityId, u64)> =
                    counts.iter().filter(|&(&c, _)| c != a).map(|(&c, &k)| (c, k)).collect();
                targets.sort_unstable();
                for (b, e_vb) in targets {
                    let ctx = MoveContext {
                        v,
                        from: a,
                        to: b,
                        e_va,
                        e_vb,
                        d_v: g.degree(v) as u64,
                    };
                    let num = move_q_numerator(&ctx, &p.stats(a), &p.stats(b), m);
                    if best.is_none_or(|(bn, _, _)| num > bn) {
                        best = Some((num, v, b));
                    }
                }
            }
            let Some((num, v, b)) = best else { break };
            let gain = num as f64 / scale;
            if gain <= cfg.q_improvement_eps {
                break;
            }
            let ctx = MoveContext::new(g, p, v, b);
            apply_move(p, &ctx);
            moved[v] = true;
            any = true;
            borderline.insert(v);
            for &(w, _) in g.neighbors(v) {
                if p.community_of(w) == ctx.from {
                    borderline.insert(w);
                }
            }
            let record = MoveRecord {
                vertex: v,
                from: ctx.from,
                to: b,
                gain,
            };
            moves.push((record, p.q()));
        }
        if !any {
            break;
        }
    }
    moves
}

/// One step of a run, in the order it happened. Events from a tentative split
/// that was later rolled back stay in the history, followed by the `reject`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", content = "payload", rename_all = "lowercase")]
pub enum Event {
    Remove {
        community: CommunityId,
        #[serde(flatten)]
        removal: Removal,
    },
    Move(MoveRecord),
    /// A community was split, either by a kept bisection or because it was no
    /// longer connected.
    Accept {
        community: CommunityId,
        created: Vec<CommunityId>,
        phase: Phase,
        q_before: f64,
    },
    Reject {
        community: CommunityId,
        phase: Phase,
        q_tentative: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistoryEntry {
    #[serde(flatten)]
    pub event: Event,
    /// Q of the partition in force right after the event.
    pub q_after: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// The whole graph or its connected pieces.
    Components,
    Clustering,
    Betweenness,
    /// The closing refinement over the whole graph.
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DendrogramNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Community id at the time the node was created.
    pub community: CommunityId,
    /// Members when the node was created. Later refinement can move vertices
    /// across node boundaries; the trace holds the exact partitions.
    pub members: Vec<VertexId>,
    /// Global Q when the node was created.
    pub q: f64,
    /// How this node was split, if it was.
    pub split_phase: Option<Phase>,
    /// Refinement moves applied while splitting this node.
    pub moves: Vec<MoveRecord>,
    pub children: Vec<usize>,
}

/// A partition the run passed through.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub q: f64,
    pub communities: usize,
    pub phase: Phase,
    /// Community per vertex, numbered by smallest member.
    pub assignment: Vec<CommunityId>,
}

/// Split tree rooted at the whole vertex set, plus the Q trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dendrogram {
    pub nodes: Vec<DendrogramNode>,
    pub trace: Vec<TraceEntry>,
    /// Moves made by the closing whole-graph refinement.
    pub final_moves: Vec<MoveRecord>,
}

impl Dendrogram {
    pub fn root(&self) -> &DendrogramNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &DendrogramNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    /// A single node holding every vertex, with the trace entry for it.
    pub fn trivial(g: &Graph) -> Dendrogram {
        let n = g.vertex_count();
        let q = if g.edge_count() == 0 { 0.0 } else { Partition::single(g).q() };
        Dendrogram {
            nodes: vec![DendrogramNode {
                id: 0,
                parent: None,
                community: 0,
                members: (0..n).collect(),
                q,
                split_phase: None,
                moves: Vec::new(),
                children: Vec::new(),
            }],
            trace: vec![TraceEntry {
                q,
                communities: 1,
                phase: Phase::Components,
                assignment: vec![0; n],
            }],
            final_moves: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DetectionResult {
    pub best_partition: Partition,
    pub best_q: f64,
    pub dendrogram: Dendrogram,
    pub history: Vec<HistoryEntry>,
}

impl DetectionResult {
    pub fn community_count(&self) -> usize {
        self.best_partition.community_count()
    }
}

/// The partition with the highest Q along the trace; ties go to fewer
/// communities, then to the earlier entry.
pub fn best_cut(d: &Dendrogram, g: &Graph) -> Partition {
    let best = d
        .trace
        .iter()
        .reduce(|best, t| {
            if t.q > best.q || (t.q == best.q && t.communities < best.communities) {
                t
            } else {
                best
            }
        })
        .expect("a dendrogram always has at least one trace entry");
    Partition::from_assignment(g, best.assignment.clone()).expect("trace assignments cover the graph")
}

struct Run<'g> {
    g: &'g Graph,
    cfg: &'g EngineConfig,
    wg: WorkingGraph<'g>,
    p: Partition,
    border: BorderlineSet,
    history: Vec<HistoryEntry>,
    dendro: Dendrogram,
    leaf_of: HashMap<CommunityId, usize>,
}

impl<'g> Run<'g> {
    fn start(g: &'g Graph, cfg: &'g EngineConfig) -> Run<'g> {
        let wg = WorkingGraph::new(g);
        let comps = connected_components(&wg, None);
        let assignment = comps.labels.iter().map(|l| l.expect("full labeling")).collect();
        let p = Partition::from_assignment(g, assignment).expect("sizes match");
        let mut dendro = Dendrogram::trivial(g);
        let mut leaf_of = HashMap::from([(0, 0)]);
        if comps.count > 1 {
            leaf_of.clear();
            for c in 0..comps.count {
                let id = push_child(&mut dendro, 0, c, p.members(c), p.q());
                leaf_of.insert(c, id);
            }
            dendro.nodes[0].split_phase = Some(Phase::Components);
            dendro.trace.push(trace_entry(&p, Phase::Components));
        }
        let mut run = Run {
            g,
            cfg,
            wg,
            p,
            border: BorderlineSet::new(),
            history: Vec::new(),
            dendro,
            leaf_of,
        };
        if comps.count > 1 {
            run.log(Event::Accept {
                community: 0,
                created: (1..comps.count).collect(),
                phase: Phase::Components,
                q_before: 0.0,
            });
        }
        run
    }

    fn log(&mut self, event: Event) {
        let q_after = self.p.q();
        self.history.push(HistoryEntry { event, q_after });
    }

    fn divide(&mut self, initial: Vec<CommunityId>, measure: MeasureKind, phase: Phase) -> Result<(), EngineError> {
        let mut queue: VecDeque<CommunityId> = initial.into();
        while let Some(c) = queue.pop_front() {
            let stats = self.p.stats(c);
            if stats.size < 2 || stats.internal2 == 0 {
                continue;
            }
            let subset = Subset::new(self.g.vertex_count(), self.p.members(c));
            let comps = connected_components(&WorkingGraph::new(self.g), Some(&subset));
            if comps.count > 1 {
                let q_before = self.p.q();
                let groups = comps.groups();
                let created: Vec<CommunityId> = groups[1..].iter().map(|grp| self.p.split_off(self.g, grp)).collect();
                self.record_split(c, &created, phase, Vec::new());
                self.log(Event::Accept {
                    community: c,
                    created: created.clone(),
                    phase,
                    q_before,
                });
                queue.push_back(c);
                queue.extend(created);
                continue;
            }

            let q_before = self.p.q();
            let saved = (self.p.clone(), self.border.clone());
            let bisection = bisect(&mut self.wg, &subset, measure);
            self.wg.restore_all();
            let bisection = bisection?;
            for &removal in &bisection.removals {
                self.log(Event::Remove { community: c, removal });
            }
            let small = bisection.sides.iter().any(|s| s.len() < self.cfg.min_community_size);
            let mut moves = Vec::new();
            let mut created = None;
            if !small {
                created = Some(self.p.split_off(self.g, &bisection.sides[1]));
                self.border.extend(bisection.borderline.iter().copied());
                moves = self.refine_logged(None);
            }
            let q_tentative = self.p.q();
            match created {
                Some(new) if q_tentative > q_before + self.cfg.q_improvement_eps => {
                    self.record_split(c, &[new], phase, moves);
                    self.log(Event::Accept {
                        community: c,
                        created: vec![new],
                        phase,
                        q_before,
                    });
                    queue.push_back(c);
                    queue.push_back(new);
                }
                _ => {
                    (self.p, self.border) = saved;
                    self.log(Event::Reject {
                        community: c,
                        phase,
                        q_tentative,
                    });
                }
            }
        }
        Ok(())
    }

    /// Refines over the current borderline set, or over `border` if given,
    /// logging each move.
    fn refine_logged(&mut self, border: Option<BorderlineSet>) -> Vec<MoveRecord> {
        let mut border = border.unwrap_or_else(|| std::mem::take(&mut self.border));
        let traced = refine_traced(self.g, &mut self.p, &mut border, self.cfg);
        self.border = border;
        traced
            .into_iter()
            .map(|(mv, q_after)| {
                self.history.push(HistoryEntry {
                    event: Event::Move(mv),
                    q_after,
                });
                mv
            })
            .collect()
    }

    fn record_split(&mut self, c: CommunityId, created: &[CommunityId], phase: Phase, moves: Vec<MoveRecord>) {
        let parent = self.leaf_of[&c];
        let q = self.p.q();
        self.dendro.nodes[parent].split_phase = Some(phase);
        self.dendro.nodes[parent].moves = moves;
        for &id in std::iter::once(&c).chain(created) {
            let node = push_child(&mut self.dendro, parent, id, self.p.members(id), q);
            self.leaf_of.insert(id, node);
        }
        self.dendro.trace.push(trace_entry(&self.p, phase));
    }

    fn communities_by_smallest_member(&self) -> Vec<CommunityId> {
        let mut seen = vec![false; self.p.slot_count()];
        let mut out = Vec::new();
        for &c in self.p.assignment() {
            if !seen[c] {
                seen[c] = true;
                out.push(c);
            }
        }
        out
    }

    fn finish(self) -> DetectionResult {
        let best_partition = best_cut(&self.dendro, self.g);
        let best_q = best_partition.q();
        DetectionResult {
            best_partition,
            best_q,
            dendrogram: self.dendro,
            history: self.history,
        }
    }
}

fn push_child(d: &mut Dendrogram, parent: usize, community: CommunityId, members: Vec<VertexId>, q: f64) -> usize {
    let id = d.nodes.len();
    d.nodes.push(DendrogramNode {
        id,
        parent: Some(parent),
        community,
        members,
        q,
        split_phase: None,
        moves: Vec::new(),
        children: Vec::new(),
    });
    d.nodes[parent].children.push(id);
    id
}

fn trace_entry(p: &Partition, phase: Phase) -> TraceEntry {
    TraceEntry {
        q: p.q(),
        communities: p.community_count(),
        phase,
        assignment: p.compact(),
    }
}

fn prepare(g: &Graph, cfg: &EngineConfig) -> Result<(), EngineError> {
    cfg.validate()?;
    if !cfg.measure.is_clustering() {
        return Err(ConfigError::BetweennessForClustering.into());
    }
    if g.edge_count() == 0 {
        return Err(EngineError::NoEdges);
    }
    Ok(())
}

/// Recursive bisection by edge clustering coefficient (`cfg.measure`) with
/// refinement, keeping a split only when global Q improves.
pub fn run_ccr(g: &Graph, cfg: &EngineConfig) -> Result<DetectionResult, EngineError> {
    prepare(g, cfg)?;
    let mut run = Run::start(g, cfg);
    let initial = run.communities_by_smallest_member();
    run.divide(initial, cfg.measure, Phase::Clustering)?;
    Ok(run.finish())
}

/// [`run_ccr`], then the same recursion over each resulting community using
/// edge betweenness, then one refinement over every vertex that has a neighbor
/// in another community.
pub fn run_ccr_ebr(g: &Graph, cfg: &EngineConfig) -> Result<DetectionResult, EngineError> {
    prepare(g, cfg)?;
    let mut run = Run::start(g, cfg);
    let initial = run.communities_by_smallest_member();
    run.divide(initial, cfg.measure, Phase::Clustering)?;
    let second = run.communities_by_smallest_member();
    run.divide(second, MeasureKind::Betweenness, Phase::Betweenness)?;

    let border = BorderlineSet::from_partition(g, &run.p);
    let moves = run.refine_logged(Some(border));
    if !moves.is_empty() {
        run.dendro.final_moves = moves;
        run.dendro.trace.push(trace_entry(&run.p, Phase::Global));
    }
    Ok(run.finish())
}
