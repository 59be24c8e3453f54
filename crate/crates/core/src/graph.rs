//! Simple undirected graphs, an edge-deletion overlay, and connectivity.
//!
//! [`Graph`] is immutable once built. Vertex ids are dense (`0..n`) and assigned
//! in first-appearance order by [`GraphBuilder`]; edge ids are dense (`0..m`) in
//! insertion order. Everything downstream breaks ties on these ids, which is what
//! makes a run reproducible bit for bit.

use std::collections::{HashMap, HashSet, VecDeque};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Counts of input records dropped while canonicalizing to a simple graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CanonReport {
    pub duplicates: usize,
    pub self_loops: usize,
}

/// Immutable simple undirected graph.
#[derive(Clone, Debug)]
pub struct Graph {
    labels: Vec<Option<String>>,
    edges: Vec<(VertexId, VertexId)>,
    // (neighbor, edge id), sorted by neighbor
    adj: Vec<Vec<(VertexId, EdgeId)>>,
}

impl Graph {
    /// Builds a graph on `n` unlabeled vertices, silently dropping loops and
    /// repeated pairs. Mostly useful for tests and generators.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Graph {
        let mut b = GraphBuilder::with_vertices(n);
        for (u, v) in edges {
            b.add_edge(u, v);
        }
        b.build().0
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    /// Neighbors of `v` with the connecting edge id, ascending by neighbor.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[v]
    }

    /// Endpoints of edge `e`, smaller id first.
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn find_edge(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let row = self.adj.get(u)?;
        row.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| row[i].1)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.find_edge(u, v).is_some()
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels[v].as_deref()
    }

    /// The vertex label if there is one, otherwise its numeric id.
    pub fn display_label(&self, v: VertexId) -> String {
        match &self.labels[v] {
            Some(l) => l.clone(),
            None => v.to_string(),
        }
    }

    pub fn total_degree(&self) -> usize {
        2 * self.edges.len()
    }
}

/// Incremental construction with first-appearance id assignment and
/// simple-graph canonicalization.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    index: HashMap<String, VertexId>,
    labels: Vec<Option<String>>,
    edges: Vec<(VertexId, VertexId)>,
    seen: HashSet<(VertexId, VertexId)>,
    report: CanonReport,
}

impl GraphBuilder {
    pub fn new() -> GraphBuilder {
        GraphBuilder::default()
    }

    /// Starts with `n` unlabeled vertices `0..n`.
    pub fn with_vertices(n: usize) -> GraphBuilder {
        GraphBuilder {
            labels: vec![None; n],
            ..GraphBuilder::default()
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn add_vertex(&mut self, label: Option<String>) -> VertexId {
        let id = self.labels.len();
        self.labels.push(label);
        id
    }

    /// Id for a textual token, creating a labeled vertex on first sight.
    pub fn vertex_for_token(&mut self, token: &str) -> VertexId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.add_vertex(Some(token.to_string()));
        self.index.insert(token.to_string(), id);
        id
    }

    /// Adds `{u, v}` unless it is a loop or already present. Returns whether the
    /// edge was kept.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        assert!(
            u < self.labels.len() && v < self.labels.len(),
            "edge ({u}, {v}) references a vertex that was never added"
        );
        if u == v {
            self.report.self_loops += 1;
            return false;
        }
        let key = (u.min(v), u.max(v));
        if !self.seen.insert(key) {
            self.report.duplicates += 1;
            return false;
        }
        self.edges.push(key);
        true
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn build(self) -> (Graph, CanonReport) {
        let n = self.labels.len();
        let mut adj = vec![Vec::new(); n];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        let graph = Graph {
            labels: self.labels,
            edges: self.edges,
            adj,
        };
        (graph, self.report)
    }
}

/// A set of vertices with O(1) membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subset {
    members: Vec<VertexId>,
    mask: Vec<bool>,
}

impl Subset {
    pub fn new(n: usize, members: impl IntoIterator<Item = VertexId>) -> Subset {
        let mut mask = vec![false; n];
        let mut list = Vec::new();
        for v in members {
            if !mask[v] {
                mask[v] = true;
                list.push(v);
            }
        }
        list.sort_unstable();
        Subset { members: list, mask }
    }

    pub fn full(n: usize) -> Subset {
        Subset {
            members: (0..n).collect(),
            mask: vec![true; n],
        }
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.mask[v]
    }

    /// Members in ascending order.
    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A [`Graph`] minus a set of deleted edges.
///
/// Deletions are recorded so they can be undone in O(removed).
#[derive(Clone, Debug)]
pub struct WorkingGraph<'g> {
    base: &'g Graph,
    removed: Vec<bool>,
    removed_list: Vec<EdgeId>,
}

impl<'g> WorkingGraph<'g> {
    pub fn new(base: &'g Graph) -> WorkingGraph<'g> {
        WorkingGraph {
            base,
            removed: vec![false; base.edge_count()],
            removed_list: Vec::new(),
        }
    }

    pub fn base(&self) -> &'g Graph {
        self.base
    }

    /// Deletes `e`. Returns false if it was already gone.
    pub fn remove(&mut self, e: EdgeId) -> bool {
        if self.removed[e] {
            return false;
        }
        self.removed[e] = true;
        self.removed_list.push(e);
        true
    }

    /// Brings every deleted edge back.
    pub fn restore_all(&mut self) {
        for e in self.removed_list.drain(..) {
            self.removed[e] = false;
        }
    }

    #[inline]
    pub fn is_removed(&self, e: EdgeId) -> bool {
        self.removed[e]
    }

    /// Deleted edges in deletion order.
    pub fn removed_edges(&self) -> &[EdgeId] {
        &self.removed_list
    }

    /// Live neighbors of `v`, ascending.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId)> + '_ {
        self.base.adj[v]
            .iter()
            .copied()
            .filter(move |&(_, e)| !self.removed[e])
    }

    /// Live neighbors of `v` that lie in `within`.
    pub fn neighbors_within<'a>(
        &'a self,
        v: VertexId,
        within: &'a Subset,
    ) -> impl Iterator<Item = (VertexId, EdgeId)> + 'a {
        self.neighbors(v).filter(move |&(w, _)| within.contains(w))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).count()
    }

    pub fn degree_within(&self, v: VertexId, within: &Subset) -> usize {
        self.neighbors_within(v, within).count()
    }

    /// Live edges with both endpoints in `within`, ascending by id.
    pub fn edges_within(&self, within: &Subset) -> Vec<EdgeId> {
        let mut out = Vec::new();
        for &u in within.members() {
            for (w, e) in self.neighbors_within(u, within) {
                if u < w {
                    out.push(e);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether `from` reaches `to` over live edges inside `within`.
    pub fn reachable(&self, from: VertexId, to: VertexId, within: &Subset) -> bool {
        if from == to {
            return true;
        }
        let mut seen = HashSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for (w, _) in self.neighbors_within(v, within) {
                if w == to {
                    return true;
                }
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        false
    }
}

/// Connected-component ids per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    /// `None` for vertices outside the queried subset.
    pub labels: Vec<Option<usize>>,
    pub count: usize,
}

impl ComponentLabeling {
    /// Vertex lists per component; components are numbered by their smallest
    /// vertex, so the result is ordered that way too.
    pub fn groups(&self) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, l) in self.labels.iter().enumerate() {
            if let Some(c) = l {
                out[*c].push(v);
            }
        }
        out
    }
}

/// Labels the components of `g`, optionally restricted to `within`.
pub fn connected_components(g: &WorkingGraph<'_>, within: Option<&Subset>) -> ComponentLabeling {
    let n = g.base().vertex_count();
    let full;
    let within = match within {
        Some(s) => s,
        None => {
            full = Subset::full(n);
            &full
        }
    };
    let mut labels = vec![None; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for &s in within.members() {
        if labels[s].is_some() {
            continue;
        }
        labels[s] = Some(count);
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for (w, _) in g.neighbors_within(v, within) {
                if labels[w].is_none() {
                    labels[w] = Some(count);
                    queue.push_back(w);
                }
            }
        }
        count += 1;
    }
    ComponentLabeling { labels, count }
}
