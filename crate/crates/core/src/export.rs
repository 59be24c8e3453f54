//! Text renderings of partitions, run histories, dendrograms and edge scores.
//!
//! Every function here is a pure function of its inputs, so identical runs give
//! byte-identical files.

use serde::Serialize;
use serde_json::json;

use crate::engine::{Dendrogram, DendrogramNode, HistoryEntry};
use crate::graph::Graph;
use crate::measures::EdgeScoreTable;
use crate::modularity::Partition;

/// `vertex<TAB>community`, one line per vertex in id order, communities
/// numbered from 0 by smallest member.
pub fn partition_tsv(g: &Graph, p: &Partition) -> String {
    let mut out = String::from("vertex\tcommunity\n");
    for (v, c) in p.compact().into_iter().enumerate() {
        out.push_str(&format!("{}\t{}\n", g.display_label(v), c));
    }
    out
}

#[derive(Serialize)]
struct CommunityRecord {
    id: usize,
    size: usize,
    internal_edges: u64,
    total_degree: u64,
    members: Vec<String>,
}

/// Q plus per-community stats and members.
pub fn partition_json(g: &Graph, p: &Partition) -> String {
    let compact = p.compact();
    let k = p.community_count();
    let mut communities: Vec<CommunityRecord> = (0..k)
        .map(|id| CommunityRecord {
            id,
            size: 0,
            internal_edges: 0,
            total_degree: 0,
            members: Vec::new(),
        })
        .collect();
    for (v, &c) in compact.iter().enumerate() {
        let stats = p.stats(p.community_of(v));
        let rec = &mut communities[c];
        rec.size = stats.size;
        rec.internal_edges = stats.internal2 / 2;
        rec.total_degree = stats.degree;
        rec.members.push(g.display_label(v));
    }
    let doc = json!({
        "q": p.q(),
        "community_count": k,
        "communities": communities,
    });
    pretty(&doc)
}

/// One JSON object per line: `{"type", "payload", "q_after"}`.
pub fn trace_jsonl(history: &[HistoryEntry]) -> String {
    let mut out = String::new();
    for entry in history {
        out.push_str(&serde_json::to_string(entry).expect("history serializes"));
        out.push('\n');
    }
    out
}

/// The split tree and Q trace as one JSON document, with vertex labels.
pub fn dendrogram_json(g: &Graph, d: &Dendrogram) -> String {
    let labels: Vec<String> = (0..g.vertex_count()).map(|v| g.display_label(v)).collect();
    let doc = json!({
        "labels": labels,
        "nodes": d.nodes,
        "trace": d.trace,
        "final_moves": d.final_moves,
    });
    pretty(&doc)
}

/// Newick text for the split tree. Internal nodes are named `n<id>`; each leaf
/// lists the member labels of its community, named `c<community>`.
pub fn dendrogram_newick(g: &Graph, d: &Dendrogram) -> String {
    let mut out = String::new();
    write_newick(g, d, d.root(), &mut out);
    out.push_str(";\n");
    out
}

fn write_newick(g: &Graph, d: &Dendrogram, node: &DendrogramNode, out: &mut String) {
    out.push('(');
    if node.children.is_empty() {
        let names: Vec<String> = node.members.iter().map(|&v| newick_label(&g.display_label(v))).collect();
        out.push_str(&names.join(","));
        out.push_str(&format!(")c{}", node.community));
    } else {
        for (i, &child) in node.children.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_newick(g, d, &d.nodes[child], out);
        }
        out.push_str(&format!(")n{}", node.id));
    }
}

fn newick_label(s: &str) -> String {
    let plain = !s.is_empty()
        && s
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | '[' | ']' | '\'' | ':' | ';' | ','));
    if plain {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', "''"))
    }
}

/// `u<TAB>v<TAB>score` by vertex label, ascending by score then edge id. The
/// infinite sentinel prints as `inf`.
pub fn measures_tsv(g: &Graph, table: &EdgeScoreTable) -> String {
    let mut rows: Vec<(usize, f64)> = table.iter().collect();
    rows.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut out = String::from("u\tv\tscore\n");
    for (e, s) in rows {
        let (u, v) = g.endpoints(e);
        out.push_str(&format!("{}\t{}\t{}\n", g.display_label(u), g.display_label(v), format_score(s)));
    }
    out
}

pub fn format_score(s: f64) -> String {
    if s.is_infinite() {
        "inf".to_string()
    } else {
        format!("{s}")
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}
