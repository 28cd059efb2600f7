use std::collections::HashMap;

use thiserror::Error;

use crate::lang::{BoolExpr, Label, LabeledStatement, Program, Statement};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfgError {
    #[error("goto target '{label}' not found in procedure '{proc}'")]
    UnknownLabel { proc: String, label: String },
    #[error("node '{0}' is not on any path from its procedure's entry to its exit")]
    Disconnected(String),
    #[error("more than {cap} verification paths between '{from}' and '{to}'")]
    PathOverflow { from: String, to: String, cap: usize },
}

/// Statement at a graph node, with structured statements reduced to their branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeStmt {
    Skip,
    Assign {
        targets: Vec<String>,
        values: Vec<BoolExpr>,
    },
    /// Two-way branch of an if/while/conditional jump; `None` is the `*` guard.
    Branch { guard: Option<BoolExpr> },
    Assume(BoolExpr),
    Assert(BoolExpr),
    Call { callee: String, args: Vec<BoolExpr> },
    Return,
    Goto,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Stmt { label: Label, stmt: NodeStmt },
    Exit,
    Err,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub name: String,
    /// Owning procedure; the shared `err` node reports procedure 0.
    pub proc: usize,
    pub kind: NodeKind,
}

impl Node {
    pub fn stmt(&self) -> Option<&NodeStmt> {
        match &self.kind {
            NodeKind::Stmt { stmt, .. } => Some(stmt),
            _ => None,
        }
    }

    pub fn label(&self) -> Option<&Label> {
        match &self.kind {
            NodeKind::Stmt { label, .. } => Some(label),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// Fall-through of skip, assign, assume and goto.
    Seq,
    /// `true` is the edge taken when the guard holds.
    Branch(bool),
    AssertPass,
    AssertFail,
    Call,
    Return,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone)]
pub struct ProcGraph {
    pub name: String,
    pub entry: NodeId,
    pub exit: NodeId,
    /// Statement nodes in pre-order, then the exit node.
    pub nodes: Vec<NodeId>,
}

/// Transition graphs of all procedures sharing one `err` node.
#[derive(Debug, Clone)]
pub struct TransitionGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub procs: Vec<ProcGraph>,
    pub err: NodeId,
    out: Vec<Vec<EdgeId>>,
    inc: Vec<Vec<EdgeId>>,
}

impl TransitionGraph {
    pub fn out_edges(&self, n: NodeId) -> &[EdgeId] {
        &self.out[n]
    }

    pub fn in_edges(&self, n: NodeId) -> &[EdgeId] {
        &self.inc[n]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Node of a statement label within a procedure.
    pub fn node_of(&self, proc: usize, label: &Label) -> Option<NodeId> {
        self.procs[proc]
            .nodes
            .iter()
            .copied()
            .find(|&n| self.nodes[n].label() == Some(label))
    }

    /// Statement nodes (program locations) of all procedures, in textual order.
    pub fn locations(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.procs
            .iter()
            .flat_map(|p| p.nodes.iter().copied())
            .filter(|&n| matches!(self.nodes[n].kind, NodeKind::Stmt { .. }))
    }

    /// Human-readable label of an edge, in the guarded-command style of the source.
    pub fn edge_text(&self, e: EdgeId) -> String {
        let edge = self.edges[e];
        let stmt = self.nodes[edge.from].stmt();
        match (edge.kind, stmt) {
            (EdgeKind::Branch(taken), Some(NodeStmt::Branch { guard })) => match guard {
                None => "assume(true)".into(),
                Some(g) if taken => format!("assume({g})"),
                Some(g) => format!("assume({})", g.negated()),
            },
            (EdgeKind::AssertPass, Some(NodeStmt::Assert(g))) => format!("assert({g})"),
            (EdgeKind::AssertFail, Some(NodeStmt::Assert(g))) => {
                format!("assume({})", g.negated())
            }
            (_, Some(NodeStmt::Skip)) => "skip".into(),
            (_, Some(NodeStmt::Goto)) => "goto".into(),
            (_, Some(NodeStmt::Return)) => "return".into(),
            (_, Some(NodeStmt::Assume(g))) => format!("assume({g})"),
            (_, Some(NodeStmt::Assign { targets, values })) => format!(
                "{} := {}",
                targets.join(", "),
                values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
            ),
            (_, Some(NodeStmt::Call { callee, args })) => format!(
                "call {callee}({})",
                args.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
            ),
            _ => String::new(),
        }
    }

    fn add_edge(&mut self, from: NodeId, to: NodeId, kind: EdgeKind) {
        let id = self.edges.len();
        self.edges.push(Edge { from, to, kind });
        self.out[from].push(id);
        self.inc[to].push(id);
    }
}

fn flatten(stmt: &Statement) -> NodeStmt {
    match stmt {
        Statement::Skip => NodeStmt::Skip,
        Statement::Assign { targets, values } => NodeStmt::Assign {
            targets: targets.clone(),
            values: values.clone(),
        },
        Statement::If { guard, .. }
        | Statement::IfGoto { guard, .. }
        | Statement::While { guard, .. } => NodeStmt::Branch {
            guard: (*guard != BoolExpr::Star).then(|| guard.clone()),
        },
        Statement::Assume(g) => NodeStmt::Assume(g.clone()),
        Statement::Assert(g) => NodeStmt::Assert(g.clone()),
        Statement::Call { callee, args } => NodeStmt::Call {
            callee: callee.clone(),
            args: args.clone(),
        },
        Statement::Return => NodeStmt::Return,
        Statement::Goto(_) => NodeStmt::Goto,
    }
}

struct Builder<'a> {
    g: TransitionGraph,
    ids: HashMap<&'a Label, NodeId>,
    proc: usize,
    proc_name: &'a str,
    exit: NodeId,
}

impl<'a> Builder<'a> {
    fn seq(&mut self, seq: &'a [LabeledStatement], after: NodeId) -> Result<(), CfgError> {
        for (i, ls) in seq.iter().enumerate() {
            let next = seq.get(i + 1).map_or(after, |n| self.ids[&n.label]);
            self.stmt(ls, next)?;
        }
        Ok(())
    }

    fn target(&self, l: &Label) -> Result<NodeId, CfgError> {
        self.ids.get(l).copied().ok_or_else(|| CfgError::UnknownLabel {
            proc: self.proc_name.to_string(),
            label: l.to_string(),
        })
    }

    fn stmt(&mut self, ls: &'a LabeledStatement, next: NodeId) -> Result<(), CfgError> {
        let me = self.ids[&ls.label];
        let first = |b: &[LabeledStatement], ids: &HashMap<&Label, NodeId>| {
            b.first().map_or(next, |s| ids[&s.label])
        };
        match &ls.stmt {
            Statement::Skip | Statement::Assign { .. } | Statement::Assume(_) => {
                self.g.add_edge(me, next, EdgeKind::Seq)
            }
            Statement::Assert(_) => {
                self.g.add_edge(me, next, EdgeKind::AssertPass);
                let err = self.g.err;
                self.g.add_edge(me, err, EdgeKind::AssertFail);
            }
            Statement::Call { .. } => self.g.add_edge(me, next, EdgeKind::Call),
            Statement::Return => {
                let exit = self.exit;
                self.g.add_edge(me, exit, EdgeKind::Return)
            }
            Statement::Goto(targets) => {
                for t in targets {
                    let to = self.target(t)?;
                    self.g.add_edge(me, to, EdgeKind::Seq);
                }
            }
            Statement::IfGoto { target, .. } => {
                let to = self.target(target)?;
                self.g.add_edge(me, to, EdgeKind::Branch(true));
                self.g.add_edge(me, next, EdgeKind::Branch(false));
            }
            Statement::If {
                then_branch,
                else_branch,
                ..
            } => {
                let t = first(then_branch, &self.ids);
                let f = first(else_branch, &self.ids);
                self.g.add_edge(me, t, EdgeKind::Branch(true));
                self.g.add_edge(me, f, EdgeKind::Branch(false));
                self.seq(then_branch, next)?;
                self.seq(else_branch, next)?;
            }
            Statement::While { body, .. } => {
                let t = first(body, &self.ids);
                self.g.add_edge(me, t, EdgeKind::Branch(true));
                self.g.add_edge(me, next, EdgeKind::Branch(false));
                self.seq(body, me)?;
            }
        }
        Ok(())
    }
}

/// Build the transition graph. Nodes are numbered procedure by procedure
/// (statements in pre-order, then the exit), with `err` last.
pub fn build_transition_graph(p: &Program) -> Result<TransitionGraph, CfgError> {
    let mut nodes = Vec::new();
    let mut procs = Vec::new();
    for (pi, proc) in p.procedures.iter().enumerate() {
        let qualify = |l: &str| {
            if pi == 0 {
                l.to_string()
            } else {
                format!("{}.{l}", proc.name)
            }
        };
        let mut ids = Vec::new();
        for ls in proc.statements() {
            ids.push(nodes.len());
            nodes.push(Node {
                name: qualify(ls.label.as_str()),
                proc: pi,
                kind: NodeKind::Stmt {
                    label: ls.label.clone(),
                    stmt: flatten(&ls.stmt),
                },
            });
        }
        let exit = nodes.len();
        nodes.push(Node {
            name: qualify("exit"),
            proc: pi,
            kind: NodeKind::Exit,
        });
        ids.push(exit);
        procs.push(ProcGraph {
            name: proc.name.clone(),
            entry: ids[0],
            exit,
            nodes: ids,
        });
    }
    let err = nodes.len();
    nodes.push(Node {
        name: "err".into(),
        proc: 0,
        kind: NodeKind::Err,
    });
    let n = nodes.len();
    let g = TransitionGraph {
        nodes,
        edges: Vec::new(),
        procs,
        err,
        out: vec![Vec::new(); n],
        inc: vec![Vec::new(); n],
    };
    let mut b = Builder {
        g,
        ids: HashMap::new(),
        proc: 0,
        proc_name: "",
        exit: 0,
    };
    for (pi, proc) in p.procedures.iter().enumerate() {
        b.proc = pi;
        b.proc_name = &proc.name;
        b.exit = b.g.procs[pi].exit;
        b.ids = proc
            .statements()
            .into_iter()
            .zip(b.g.procs[pi].nodes.iter().copied())
            .map(|(ls, id)| (&ls.label, id))
            .collect();
        b.seq(&proc.body, b.exit)?;
    }
    let g = b.g;
    check_connected(&g)?;
    Ok(g)
}

fn check_connected(g: &TransitionGraph) -> Result<(), CfgError> {
    for pg in &g.procs {
        let fwd = reach(g, pg.entry, true);
        let bwd = reach(g, pg.exit, false);
        for &n in &pg.nodes {
            if !fwd[n] || !bwd[n] {
                return Err(CfgError::Disconnected(g.nodes[n].name.clone()));
            }
        }
    }
    Ok(())
}

fn reach(g: &TransitionGraph, start: NodeId, forward: bool) -> Vec<bool> {
    let mut seen = vec![false; g.nodes.len()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        let edges = if forward { g.out_edges(n) } else { g.in_edges(n) };
        for &e in edges {
            let m = if forward { g.edges[e].to } else { g.edges[e].from };
            if !seen[m] {
                seen[m] = true;
                stack.push(m);
            }
        }
    }
    seen
}
