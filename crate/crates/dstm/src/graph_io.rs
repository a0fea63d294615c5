//! Structure-graph export: Graphviz DOT for viewing, JSON for tools.
//!
//! The JSON form is the serde encoding of [`StructureGraph`]:
//! `{"nodes": [...], "dynamic_edges": [...], "static_edges": [...]}` where a
//! node is `{id, epoch, epoch_label, kind, index, label, keywords}` and an
//! edge is `{from, to, weight}`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use dstm_core::structure::{NodeKind, StructureGraph};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    Json,
}

impl FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            _ => Err(format!("unknown graph format {s:?} (expected dot or json)")),
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn to_dot(graph: &StructureGraph) -> String {
    let mut out = String::from("digraph topics {\n  rankdir=LR;\n  node [shape=box];\n");
    let mut epochs: Vec<(usize, &str)> = graph.nodes.iter().map(|n| (n.epoch, n.epoch_label.as_str())).collect();
    epochs.dedup();
    for (t, label) in epochs {
        let _ = writeln!(out, "  subgraph cluster_{t} {{");
        let _ = writeln!(out, "    label={};", quote(label));
        for n in graph.nodes.iter().filter(|n| n.epoch == t) {
            match n.kind {
                NodeKind::Subtopic => {
                    let words: Vec<&str> = n.keywords.iter().map(|k| k.word.as_str()).collect();
                    let text = if n.label.is_empty() || words.first() == Some(&n.label.as_str()) {
                        words.join("\n")
                    } else {
                        format!("[{}]\n{}", n.label, words.join("\n"))
                    };
                    let _ = writeln!(out, "    {} [label={}];", quote(&n.id), quote(&text));
                }
                NodeKind::Supertopic => {
                    let _ = writeln!(out, "    {} [shape=point, width=0.15];", quote(&n.id));
                }
            }
        }
        out.push_str("  }\n");
    }
    for e in &graph.dynamic_edges {
        let _ = writeln!(
            out,
            "  {} -> {} [style=solid, weight={}, label={}];",
            quote(&e.from),
            quote(&e.to),
            e.weight,
            quote(&format!("{:.1}", e.weight))
        );
    }
    for e in &graph.static_edges {
        let _ = writeln!(out, "  {} -> {} [style=dashed, weight={}];", quote(&e.from), quote(&e.to), e.weight);
    }
    out.push_str("}\n");
    out
}

pub fn to_json(graph: &StructureGraph) -> String {
    let mut s = serde_json::to_string_pretty(graph).expect("graph serializes");
    s.push('\n');
    s
}

pub fn write_graph(graph: &StructureGraph, path: &Path, format: GraphFormat) -> Result<()> {
    let text = match format {
        GraphFormat::Dot => to_dot(graph),
        GraphFormat::Json => to_json(graph),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_graph_json(path: &Path) -> Result<StructureGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}
