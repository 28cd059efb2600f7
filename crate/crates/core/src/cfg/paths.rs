use std::collections::BTreeMap;

use super::cutset::CutSet;
use super::graph::{CfgError, EdgeId, EdgeKind, NodeId, TransitionGraph};

pub const DEFAULT_PATH_CAP: usize = 10_000;

/// A path between adjacent cut-points with no cut-point in its interior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationPath {
    pub from: NodeId,
    pub to: NodeId,
    pub edges: Vec<EdgeId>,
}

impl VerificationPath {
    /// Node sequence `from, ..., to`.
    pub fn nodes(&self, g: &TransitionGraph) -> Vec<NodeId> {
        let mut out = vec![self.from];
        out.extend(self.edges.iter().map(|&e| g.edges[e].to));
        out
    }

    pub fn describe(&self, g: &TransitionGraph) -> String {
        let mut s = g.nodes[self.from].name.clone();
        for &e in &self.edges {
            s.push_str(&format!(" -[{}]-> {}", g.edge_text(e), g.nodes[g.edges[e].to].name));
        }
        s
    }

    pub fn is_call(&self, g: &TransitionGraph) -> bool {
        self.edges.len() == 1 && g.edges[self.edges[0]].kind == EdgeKind::Call
    }

    pub fn is_assert(&self, g: &TransitionGraph) -> bool {
        self.edges.len() == 1 && g.edges[self.edges[0]].kind == EdgeKind::AssertPass
    }
}

/// All verification paths, ordered by start cut-point then depth-first edge order.
/// Edges into `err` are not followed; assert edges are covered by their pass edge.
pub fn enumerate_verification_paths(
    g: &TransitionGraph,
    cut: &CutSet,
    cap: usize,
) -> Result<Vec<VerificationPath>, CfgError> {
    let mut out = Vec::new();
    for &start in &cut.points {
        let mut counts: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut path = Vec::new();
        let mut on_path = vec![false; g.nodes.len()];
        on_path[start] = true;
        walk(g, cut, cap, start, start, &mut path, &mut on_path, &mut counts, &mut out)?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    g: &TransitionGraph,
    cut: &CutSet,
    cap: usize,
    start: NodeId,
    at: NodeId,
    path: &mut Vec<EdgeId>,
    on_path: &mut [bool],
    counts: &mut BTreeMap<NodeId, usize>,
    out: &mut Vec<VerificationPath>,
) -> Result<(), CfgError> {
    for &e in g.out_edges(at) {
        let edge = g.edges[e];
        if edge.kind == EdgeKind::AssertFail {
            continue;
        }
        path.push(e);
        if cut.contains(edge.to) {
            let c = counts.entry(edge.to).or_insert(0);
            *c += 1;
            if *c > cap {
                return Err(CfgError::PathOverflow {
                    from: g.nodes[start].name.clone(),
                    to: g.nodes[edge.to].name.clone(),
                    cap,
                });
            }
            out.push(VerificationPath {
                from: start,
                to: edge.to,
                edges: path.clone(),
            });
        } else if !on_path[edge.to] {
            on_path[edge.to] = true;
            walk(g, cut, cap, start, edge.to, path, on_path, counts, out)?;
            on_path[edge.to] = false;
        }
        path.pop();
    }
    Ok(())
}
