//! Small named graphs used in tests, docs and the oracle suite.

use crate::graph::Graph;

/// K3 on vertices 0, 1, 2.
pub fn triangle() -> Graph {
    complete(3)
}

/// Path 0-1-...-(n-1).
pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|v| (v - 1, v)))
}

/// Center 0 joined to leaves `1..=leaves`.
pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v)))
}

/// Cycle on `n >= 3` vertices.
pub fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n)))
}

pub fn complete(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

/// Triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
pub fn barbell() -> Graph {
    Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)])
}

/// Triangles {0,1,2} and {3,4,5} with nothing between them.
pub fn two_triangles() -> Graph {
    Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
}
