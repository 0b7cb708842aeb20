//! Text formats for graphs.
//!
//! Edge list: one arc per line, `src dst [weight]` separated by whitespace,
//! weight defaulting to 1. A line `# undirected` anywhere in the file marks
//! the graph undirected; other `#` lines are comments. The vertex count is
//! one more than the largest index mentioned.
//!
//! JSON: `{ "n": 3, "undirected": false, "arcs": [[0, 1, 1.0], ...] }`, where
//! the weight element of an arc may be omitted.

use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::{Arc, WeightedDigraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Json,
}

impl GraphFormat {
    /// Guesses the format from a file name: `.json` is JSON, anything else an
    /// edge list.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => GraphFormat::Json,
            _ => GraphFormat::EdgeList,
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list" | "edges" | "edgelist" => Ok(GraphFormat::EdgeList),
            "json" => Ok(GraphFormat::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown graph format {other:?}"
            ))),
        }
    }
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<WeightedDigraph> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(text),
        GraphFormat::Json => parse_json(text),
    }
}

fn parse_edge_list(text: &str) -> Result<WeightedDigraph> {
    let mut undirected = false;
    let mut arcs = Vec::new();
    let mut n = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if comment.trim().eq_ignore_ascii_case("undirected") {
                undirected = true;
            }
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(format!("expected `src dst [weight]`, got {line:?}")));
        }
        let index = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("invalid vertex index {s:?}")))
        };
        let source = index(fields[0])?;
        let target = index(fields[1])?;
        let weight = match fields.get(2) {
            Some(w) => w
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite())
                .ok_or_else(|| err(format!("invalid weight {w:?}")))?,
            None => 1.0,
        };
        if weight < 0.0 {
            return Err(err("negative weight".into()));
        }
        n = n.max(source + 1).max(target + 1);
        arcs.push(Arc {
            source,
            target,
            weight,
        });
    }
    if arcs.is_empty() {
        return Err(Error::Validation("no arcs".into()));
    }
    WeightedDigraph::new(n, arcs, undirected)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonGraph {
    n: usize,
    #[serde(default)]
    undirected: bool,
    arcs: Vec<Vec<f64>>,
}

fn parse_json(text: &str) -> Result<WeightedDigraph> {
    let doc: JsonGraph = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let lines = arc_lines(text);
    let mut arcs = Vec::with_capacity(doc.arcs.len());
    for (k, entry) in doc.arcs.iter().enumerate() {
        let err = |message: String| Error::Parse {
            line: lines.get(k).copied().unwrap_or(1),
            message: format!("arc #{k}: {message}"),
        };
        if !(2..=3).contains(&entry.len()) {
            return Err(err("expected [src, dst, weight]".into()));
        }
        let index = |x: f64| {
            if x >= 0.0 && x.fract() == 0.0 && (x as usize) < doc.n {
                Ok(x as usize)
            } else {
                Err(err(format!(
                    "vertex index {x} out of range for n = {}",
                    doc.n
                )))
            }
        };
        let source = index(entry[0])?;
        let target = index(entry[1])?;
        let weight = entry.get(2).copied().unwrap_or(1.0);
        if weight < 0.0 {
            return Err(err("negative weight".into()));
        }
        arcs.push(Arc {
            source,
            target,
            weight,
        });
    }
    WeightedDigraph::new(doc.n, arcs, doc.undirected)
}

/// 1-based line of each element of the top-level `"arcs"` array.
fn arc_lines(text: &str) -> Vec<usize> {
    let Some(start) = text.find("\"arcs\"") else {
        return Vec::new();
    };
    let mut line = 1 + text[..start].matches('\n').count();
    let mut depth = 0usize;
    let mut out = Vec::new();
    for c in text[start..].chars() {
        match c {
            '\n' => line += 1,
            '[' => {
                depth += 1;
                if depth == 2 {
                    out.push(line);
                }
            }
            ']' => {
                if depth <= 1 {
                    break;
                }
                depth -= 1;
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directed_cycle_from_edge_list() {
        let g = parse_graph("0 1 1\n1 2 1\n2 0 1", GraphFormat::EdgeList).unwrap();
        assert_eq!(g.n(), 3);
        assert!(!g.is_undirected());
        assert_eq!(g.arcs().len(), 3);
        assert_eq!(g.weight(2, 0), 1.0);
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn undirected_header_symmetrizes() {
        let g = parse_graph("# undirected\n0 1 1\n1 2 1", GraphFormat::EdgeList).unwrap();
        assert!(g.is_undirected());
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.volume(), 4.0);
        assert_eq!(g.weight(1, 0), 1.0);
    }

    #[test]
    fn default_weight_and_comments() {
        let g = parse_graph("# a comment\n0 1\n\n1 0 2.5\n", GraphFormat::EdgeList).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 2.5);
    }

    #[test]
    fn negative_weight_names_line() {
        let err = parse_graph("0 1 -2", GraphFormat::EdgeList).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 1,
                message: "negative weight".into()
            }
        );
        let err = parse_graph("0 1\n1 0\n1 2 -1", GraphFormat::EdgeList).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse_graph("0 1 1 1", GraphFormat::EdgeList),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_graph("0 1\n-1 0", GraphFormat::EdgeList),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("0 x", GraphFormat::EdgeList),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn zero_out_weight_is_validation_error() {
        assert!(matches!(
            parse_graph("0 1 1", GraphFormat::EdgeList),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn json_round() {
        let g = parse_graph(
            r#"{"n": 3, "undirected": true, "arcs": [[0, 1, 1], [1, 2]]}"#,
            GraphFormat::Json,
        )
        .unwrap();
        assert_eq!(g.volume(), 4.0);
    }

    #[test]
    fn json_errors_carry_lines() {
        let text = "{\n  \"n\": 2,\n  \"arcs\": [\n    [0, 1, 1],\n    [1, 5, 1]\n  ]\n}";
        let err = parse_graph(text, GraphFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err:?}");

        let text = "{\n  \"n\": 2,\n  \"arcs\": [[0, 1, -1]]\n}";
        let err = parse_graph(text, GraphFormat::Json).unwrap_err();
        assert!(
            matches!(&err, Error::Parse { line: 3, message } if message.contains("negative weight"))
        );

        let err = parse_graph("{\"n\": 2,\n \"arcs\": [[0, 1,]]}", GraphFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
