use std::collections::BTreeSet;

use super::graph::{EdgeKind, NodeId, TransitionGraph};

/// Cut-points anchoring inductive assertions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSet {
    pub points: BTreeSet<NodeId>,
}

impl CutSet {
    pub fn contains(&self, n: NodeId) -> bool {
        self.points.contains(&n)
    }
}

/// Entries, exits, and both endpoints of every call and assert edge.
pub fn mandatory_cutpoints(g: &TransitionGraph) -> BTreeSet<NodeId> {
    let mut out = BTreeSet::new();
    for p in &g.procs {
        out.insert(p.entry);
        out.insert(p.exit);
    }
    for e in &g.edges {
        if matches!(e.kind, EdgeKind::Call | EdgeKind::AssertPass) {
            out.insert(e.from);
            out.insert(e.to);
        }
    }
    out
}

/// Mandatory points plus loop headers found by back edges, then pruned so that
/// no header can be dropped without leaving a cycle uncut.
pub fn compute_cutset(g: &TransitionGraph) -> CutSet {
    let mandatory = mandatory_cutpoints(g);
    let mut points = mandatory.clone();
    for p in &g.procs {
        points.extend(back_edge_targets(g, p.entry));
    }
    let headers: Vec<NodeId> = points.difference(&mandatory).copied().collect();
    for h in headers {
        points.remove(&h);
        if has_uncut_cycle(g, &points) {
            points.insert(h);
        }
    }
    CutSet { points }
}

fn back_edge_targets(g: &TransitionGraph, root: NodeId) -> Vec<NodeId> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; g.nodes.len()];
    let mut targets = Vec::new();
    let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
    state[root] = 1;
    while let Some(&mut (n, ref mut i)) = stack.last_mut() {
        let outs = g.out_edges(n);
        if *i < outs.len() {
            let m = g.edges[outs[*i]].to;
            *i += 1;
            match state[m] {
                0 => {
                    state[m] = 1;
                    stack.push((m, 0));
                }
                1 => targets.push(m),
                _ => {}
            }
        } else {
            state[n] = 2;
            stack.pop();
        }
    }
    targets
}

/// True if some cycle avoids every point of `cut`.
pub fn has_uncut_cycle(g: &TransitionGraph, cut: &BTreeSet<NodeId>) -> bool {
    let n = g.nodes.len();
    let live = |v: NodeId| !cut.contains(&v);
    let mut indeg = vec![0usize; n];
    for e in &g.edges {
        if live(e.from) && live(e.to) {
            indeg[e.to] += 1;
        }
    }
    let mut queue: Vec<NodeId> = (0..n).filter(|&v| live(v) && indeg[v] == 0).collect();
    let mut removed = 0;
    while let Some(v) = queue.pop() {
        removed += 1;
        for &e in g.out_edges(v) {
            let w = g.edges[e].to;
            if live(w) {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
    }
    removed < (0..n).filter(|&v| live(v)).count()
}

/// Names of the violated cut-set conditions, empty when the set is valid.
pub fn validate_cutset(g: &TransitionGraph, cut: &CutSet) -> Vec<String> {
    let mut problems = Vec::new();
    for p in &g.procs {
        for (what, n) in [("entry", p.entry), ("exit", p.exit)] {
            if !cut.contains(n) {
                problems.push(format!("{what} of '{}' is not a cut-point", p.name));
            }
        }
    }
    for e in &g.edges {
        let what = match e.kind {
            EdgeKind::Call => "call",
            EdgeKind::AssertPass => "assert",
            _ => continue,
        };
        for n in [e.from, e.to] {
            if !cut.contains(n) {
                problems.push(format!(
                    "{what} edge endpoint '{}' is not a cut-point",
                    g.nodes[n].name
                ));
            }
        }
    }
    if has_uncut_cycle(g, &cut.points) {
        problems.push("some cycle contains no cut-point".into());
    }
    problems
}
