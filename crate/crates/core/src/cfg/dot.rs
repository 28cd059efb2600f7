use std::fmt::Write;

use super::cutset::CutSet;
use super::graph::{NodeKind, TransitionGraph};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering; one `node` line per graph node, cut-points drawn doubled.
pub fn to_dot(g: &TransitionGraph, cut: Option<&CutSet>) -> String {
    let mut out = String::from("digraph transitions {\n  node [shape=circle];\n");
    for (i, n) in g.nodes.iter().enumerate() {
        let shape = match n.kind {
            NodeKind::Err => "box",
            _ if cut.is_some_and(|c| c.contains(i)) => "doublecircle",
            _ => "circle",
        };
        let _ = writeln!(out, "  \"{}\" [shape={shape}];", escape(&n.name));
    }
    for (i, e) in g.edges.iter().enumerate() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            escape(&g.nodes[e.from].name),
            escape(&g.nodes[e.to].name),
            escape(&g.edge_text(i))
        );
    }
    out.push_str("}\n");
    out
}
