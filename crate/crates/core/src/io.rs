//! Edge-list and GML ingestion.
//!
//! Both loaders canonicalize to a simple undirected [`Graph`]: loops and
//! repeated pairs are dropped and counted in the [`LoadReport`].

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{CanonReport, Graph, GraphBuilder, VertexId};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected 2 vertex tokens, found {found}")]
    BadLine { line: usize, found: usize },
    #[error("graph has no edges after removing loops and duplicates")]
    NoEdges,
    #[error("malformed GML at line {line}: {message}")]
    Gml { line: usize, message: String },
    #[error("edge references unknown node id {id}")]
    UnknownNode { id: i64 },
    #[error("node id {id} is declared twice")]
    DuplicateNode { id: i64 },
    #[error("unknown graph format {0:?} (expected gml or edgelist)")]
    UnknownFormat(String),
}

/// What canonicalization and parsing discarded or ignored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub duplicates: usize,
    pub self_loops: usize,
    /// Distinct unrecognized GML keys, as `scope.key`, in first-seen order.
    pub unknown_keys: Vec<String>,
    /// True when a GML file declared `directed 1`.
    pub directed_input: bool,
}

impl LoadReport {
    fn absorb(&mut self, canon: CanonReport) {
        self.duplicates += canon.duplicates;
        self.self_loops += canon.self_loops;
    }

    pub fn is_clean(&self) -> bool {
        self.duplicates == 0 && self.self_loops == 0 && self.unknown_keys.is_empty()
    }

    /// One line per warning, suitable for stderr.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.duplicates > 0 {
            out.push(format!("dropped {} duplicate edge(s)", self.duplicates));
        }
        if self.self_loops > 0 {
            out.push(format!("dropped {} self-loop(s)", self.self_loops));
        }
        if self.directed_input {
            out.push("input declared directed; edges were symmetrized".to_string());
        }
        for k in &self.unknown_keys {
            out.push(format!("ignored unknown GML key {k}"));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Gml,
    EdgeList,
}

impl Format {
    /// Guesses from the extension: `.gml` is GML, anything else an edge list.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("gml") => Format::Gml,
            _ => Format::EdgeList,
        }
    }
}

impl FromStr for Format {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gml" => Ok(Format::Gml),
            "edgelist" | "edge-list" => Ok(Format::EdgeList),
            other => Err(LoadError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Gml => "gml",
            Format::EdgeList => "edgelist",
        })
    }
}

#[derive(Clone, Debug)]
pub struct EdgeListOptions {
    /// Field separator; `None` splits on any whitespace.
    pub delimiter: Option<char>,
    pub comment_prefix: String,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        EdgeListOptions {
            delimiter: None,
            comment_prefix: "#".to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_graph(path: &Path, format: Format) -> Result<(Graph, LoadReport), LoadError> {
    match format {
        Format::Gml => load_gml(path),
        Format::EdgeList => load_edge_list(path, &EdgeListOptions::default()),
    }
}

pub fn load_edge_list(
    path: &Path,
    options: &EdgeListOptions,
) -> Result<(Graph, LoadReport), LoadError> {
    parse_edge_list(&read(path)?, options)
}

pub fn parse_edge_list(
    text: &str,
    options: &EdgeListOptions,
) -> Result<(Graph, LoadReport), LoadError> {
    let mut builder = GraphBuilder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty()
            || (!options.comment_prefix.is_empty() && line.starts_with(&options.comment_prefix))
        {
            continue;
        }
        let tokens: Vec<&str> = match options.delimiter {
            Some(d) => line.split(d).map(str::trim).filter(|t| !t.is_empty()).collect(),
            None => line.split_whitespace().collect(),
        };
        if tokens.len() != 2 {
            return Err(LoadError::BadLine {
                line: i + 1,
                found: tokens.len(),
            });
        }
        let u = builder.vertex_for_token(tokens[0]);
        let v = builder.vertex_for_token(tokens[1]);
        builder.add_edge(u, v);
    }
    finish(builder, LoadReport::default())
}

fn finish(builder: GraphBuilder, mut report: LoadReport) -> Result<(Graph, LoadReport), LoadError> {
    if builder.edge_count() == 0 {
        return Err(LoadError::NoEdges);
    }
    let (g, canon) = builder.build();
    report.absorb(canon);
    Ok((g, report))
}

/// Writes `g` as a two-column edge list using display labels.
pub fn to_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for &(u, v) in g.edges() {
        out.push_str(&g.display_label(u));
        out.push('\t');
        out.push_str(&g.display_label(v));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// GML

#[derive(Clone, Debug, PartialEq)]
enum GmlValue {
    Int(i64),
    Real(f64),
    Str(String),
    List(Vec<(String, GmlValue, usize)>),
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Key(String),
    Int(i64),
    Real(f64),
    Str(String),
    Open,
    Close,
}

fn gml_err(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Gml {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, LoadError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => {
                // comment to end of line
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '[' => {
                chars.next();
                out.push((Token::Open, line));
            }
            ']' => {
                chars.next();
                out.push((Token::Close, line));
            }
            '"' => {
                chars.next();
                let start = line;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\n') => {
                            line += 1;
                            s.push('\n');
                        }
                        Some(c) => s.push(c),
                        None => return Err(gml_err(start, "unterminated string")),
                    }
                }
                out.push((Token::Str(s), start));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Token::Key(s), line));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || matches!(c, '-' | '+' | '.') {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if let Ok(i) = s.parse::<i64>() {
                    out.push((Token::Int(i), line));
                } else if let Ok(x) = s.parse::<f64>() {
                    out.push((Token::Real(x), line));
                } else {
                    return Err(gml_err(line, format!("bad number {s:?}")));
                }
            }
            other => return Err(gml_err(line, format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

fn parse_list(
    tokens: &[(Token, usize)],
    pos: &mut usize,
    nested: bool,
) -> Result<Vec<(String, GmlValue, usize)>, LoadError> {
    let mut items = Vec::new();
    loop {
        let Some((tok, line)) = tokens.get(*pos) else {
            if nested {
                let line = tokens.last().map_or(1, |t| t.1);
                return Err(gml_err(line, "missing ']'"));
            }
            return Ok(items);
        };
        let line = *line;
        match tok {
            Token::Close if nested => {
                *pos += 1;
                return Ok(items);
            }
            Token::Key(k) => {
                *pos += 1;
                let Some((val, vline)) = tokens.get(*pos) else {
                    return Err(gml_err(line, format!("key {k:?} has no value")));
                };
                let value = match val {
                    Token::Int(i) => GmlValue::Int(*i),
                    Token::Real(x) => GmlValue::Real(*x),
                    Token::Str(s) => GmlValue::Str(s.clone()),
                    Token::Open => {
                        *pos += 1;
                        let inner = parse_list(tokens, pos, true)?;
                        items.push((k.clone(), GmlValue::List(inner), line));
                        continue;
                    }
                    _ => return Err(gml_err(*vline, format!("key {k:?} has no value"))),
                };
                *pos += 1;
                items.push((k.clone(), value, line));
            }
            _ => return Err(gml_err(line, "expected a key")),
        }
    }
}

fn note_unknown(report: &mut LoadReport, scope: &str, key: &str) {
    let k = format!("{scope}.{key}");
    if !report.unknown_keys.contains(&k) {
        report.unknown_keys.push(k);
    }
}

fn int_field(items: &[(String, GmlValue, usize)], key: &str, scope: &str, line: usize) -> Result<i64, LoadError> {
    match items.iter().find(|(k, _, _)| k == key) {
        Some((_, GmlValue::Int(i), _)) => Ok(*i),
        Some((_, _, l)) => Err(gml_err(*l, format!("{scope} {key} must be an integer"))),
        None => Err(gml_err(line, format!("{scope} without {key}"))),
    }
}

pub fn load_gml(path: &Path) -> Result<(Graph, LoadReport), LoadError> {
    parse_gml(&read(path)?)
}

/// Parses the `graph [ node [ id N label "..." ] edge [ source N target N ] ]`
/// subset of GML. Unknown keys are ignored and listed in the report.
pub fn parse_gml(text: &str) -> Result<(Graph, LoadReport), LoadError> {
    let tokens = tokenize(text)?;
    let mut pos = 0;
    let top = parse_list(&tokens, &mut pos, false)?;
    let graph_items = top
        .iter()
        .find_map(|(k, v, _)| match (k.as_str(), v) {
            ("graph", GmlValue::List(items)) => Some(items),
            _ => None,
        })
        .ok_or_else(|| gml_err(1, "no graph [ ... ] block"))?;

    let mut report = LoadReport::default();
    let mut builder = GraphBuilder::new();
    let mut ids: std::collections::HashMap<i64, VertexId> = Default::default();
    let mut edges = Vec::new();

    for (key, value, line) in graph_items {
        match (key.as_str(), value) {
            ("node", GmlValue::List(items)) => {
                let id = int_field(items, "id", "node", *line)?;
                let mut label = None;
                for (k, v, _) in items {
                    match (k.as_str(), v) {
                        ("id", _) => {}
                        ("label", GmlValue::Str(s)) => label = Some(s.clone()),
                        ("label", GmlValue::Int(i)) => label = Some(i.to_string()),
                        _ => note_unknown(&mut report, "node", k),
                    }
                }
                if ids.contains_key(&id) {
                    return Err(LoadError::DuplicateNode { id });
                }
                let v = builder.add_vertex(Some(label.unwrap_or_else(|| id.to_string())));
                ids.insert(id, v);
            }
            ("edge", GmlValue::List(items)) => {
                let s = int_field(items, "source", "edge", *line)?;
                let t = int_field(items, "target", "edge", *line)?;
                for (k, _, _) in items {
                    if k != "source" && k != "target" {
                        note_unknown(&mut report, "edge", k);
                    }
                }
                edges.push((s, t));
            }
            ("directed", GmlValue::Int(d)) => report.directed_input = *d != 0,
            _ => note_unknown(&mut report, "graph", key),
        }
    }
    for (s, t) in edges {
        let u = *ids.get(&s).ok_or(LoadError::UnknownNode { id: s })?;
        let v = *ids.get(&t).ok_or(LoadError::UnknownNode { id: t })?;
        builder.add_edge(u, v);
    }
    finish(builder, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_triangle() {
        let (g, r) = parse_edge_list("a b\nb c\na c", &EdgeListOptions::default()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 3));
        assert!(r.is_clean());
    }

    #[test]
    fn edge_list_dedup_counts() {
        let (g, r) = parse_edge_list("a b\nb a\na a", &EdgeListOptions::default()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        assert_eq!((r.duplicates, r.self_loops), (1, 1));
    }

    #[test]
    fn edge_list_first_appearance_ids() {
        let (g, _) = parse_edge_list("# hi\nz y\n\ny x\n", &EdgeListOptions::default()).unwrap();
        assert_eq!(g.label(0), Some("z"));
        assert_eq!(g.label(2), Some("x"));
    }

    #[test]
    fn edge_list_delimiter() {
        let opts = EdgeListOptions {
            delimiter: Some(','),
            comment_prefix: "%".into(),
        };
        let (g, _) = parse_edge_list("%c\nnew york,boston\nboston,dc\n", &opts).unwrap();
        assert_eq!(g.label(0), Some("new york"));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn edge_list_errors() {
        let o = EdgeListOptions::default();
        assert!(matches!(
            parse_edge_list("a b c\n", &o),
            Err(LoadError::BadLine { line: 1, found: 3 })
        ));
        assert!(matches!(parse_edge_list("a a\n# x\n", &o), Err(LoadError::NoEdges)));
    }

    #[test]
    fn gml_basic_with_labels() {
        let text = r#"Creator "x"
graph [
  directed 0
  node [ id 10 label "ten" value 3 ]
  node [ id 20 label "twenty" ]
  node [ id 30 ]
  edge [ source 10 target 20 ]
  edge [ source 20 target 30 value 2.5 ]
  edge [ source 30 target 20 ]
]"#;
        let (g, r) = parse_gml(text).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
        assert_eq!(g.label(0), Some("ten"));
        assert_eq!(g.label(2), Some("30"));
        assert_eq!(r.duplicates, 1);
        assert_eq!(r.unknown_keys, vec!["node.value", "edge.value"]);
    }

    #[test]
    fn gml_directed_is_symmetrized() {
        let text = "graph [ directed 1 node [ id 0 ] node [ id 1 ] edge [ source 0 target 1 ] edge [ source 1 target 0 ] ]";
        let (g, r) = parse_gml(text).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(r.directed_input);
        assert_eq!(r.duplicates, 1);
    }

    #[test]
    fn gml_unknown_node_names_the_id() {
        let text = "graph [ node [ id 0 ] node [ id 1 ] edge [ source 0 target 7 ] ]";
        let err = parse_gml(text).unwrap_err();
        assert!(matches!(err, LoadError::UnknownNode { id: 7 }));
        assert!(err.to_string().contains('7'));
    }

    #[test]
    fn gml_malformed() {
        assert!(matches!(parse_gml("graph [ node [ id 0 ]"), Err(LoadError::Gml { .. })));
        assert!(matches!(parse_gml("graph [ node [ id \"x ] ]"), Err(LoadError::Gml { .. })));
        assert!(matches!(parse_gml("nothing 1"), Err(LoadError::Gml { .. })));
        assert!(matches!(parse_gml("graph [ node [ label \"a\" ] ]"), Err(LoadError::Gml { .. })));
        assert!(matches!(
            parse_gml("graph [ node [ id 1 ] node [ id 1 ] ]"),
            Err(LoadError::DuplicateNode { id: 1 })
        ));
        assert!(matches!(parse_gml("graph [ node [ id 1 ] ]"), Err(LoadError::NoEdges)));
    }

    #[test]
    fn edge_list_export_reloads() {
        let (g, _) = parse_edge_list("a b\nb c\nc d\nd a\na c\n", &EdgeListOptions::default()).unwrap();
        let (h, _) = parse_edge_list(&to_edge_list(&g), &EdgeListOptions::default()).unwrap();
        assert_eq!(g.edges(), h.edges());
        for v in 0..g.vertex_count() {
            assert_eq!(g.label(v), h.label(v));
        }
    }
}
