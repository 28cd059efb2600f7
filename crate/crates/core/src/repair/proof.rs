//! Independent check of an inductive proof.
//!
//! Sets of concrete valuations are pushed along every verification path of the
//! program, using the expression evaluator rather than any encoding, so this
//! can validate repairs produced by either solver route.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cfg::{
    build_transition_graph, enumerate_verification_paths, validate_cutset, CfgError, CutSet, EdgeKind,
    NodeId, NodeStmt, TransitionGraph, DEFAULT_PATH_CAP,
};
use crate::lang::eval::{possible_values, MAY_FALSE, MAY_TRUE};
use crate::lang::{eval, expr_to_string, BoolExpr, EvalError, Program, Valuation};

use super::space::{assertion_layouts, Layout};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error("no node named '{0}'")]
    UnknownNode(String),
    #[error("invalid cut-set: {0}")]
    InvalidCutSet(String),
    #[error("assertion at {node} mentions '{var}', which is not in scope there")]
    OutOfScope { node: String, var: String },
    #[error("verification condition fails on {path}: {reason} (state {state})")]
    Failed { path: String, reason: String, state: String },
}

fn render(v: &Valuation) -> String {
    v.iter()
        .map(|(k, b)| format!("{k}={}", u8::from(*b)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn all_valuations(vars: &[String]) -> Vec<Valuation> {
    (0..1u64 << vars.len())
        .map(|r| vars.iter().enumerate().map(|(i, v)| (v.clone(), r >> i & 1 == 1)).collect())
        .collect()
}

fn holds(e: &BoolExpr, v: &Valuation) -> bool {
    eval(e, v).expect("scope checked")
}

fn may(e: &BoolExpr, v: &Valuation) -> Result<u8, EvalError> {
    possible_values(e, &|x| v.get(x).copied())
}

struct Checker<'a> {
    p: &'a Program,
    g: TransitionGraph,
    layouts: Vec<Layout>,
    inv: BTreeMap<NodeId, BoolExpr>,
}

impl Checker<'_> {
    fn layout(&self, n: NodeId) -> &Layout {
        &self.layouts[self.g.nodes[n].proc]
    }

    fn satisfying(&self, n: NodeId) -> Vec<Valuation> {
        all_valuations(&self.layout(n).vars)
            .into_iter()
            .filter(|v| holds(&self.inv[&n], v))
            .collect()
    }

    fn fail(&self, path: String, reason: impl Into<String>, state: &Valuation) -> ProofError {
        ProofError::Failed {
            path,
            reason: reason.into(),
            state: render(state),
        }
    }

    fn step(&self, node: NodeId, kind: EdgeKind, s: &Valuation) -> Vec<Valuation> {
        let stmt = self.g.nodes[node].stmt().expect("path edges leave statements");
        let admits = |g: &BoolExpr, want: bool| {
            let m = may(g, s).expect("validated program");
            m & if want { MAY_TRUE } else { MAY_FALSE } != 0
        };
        match stmt {
            NodeStmt::Branch { guard: Some(g) } => {
                let want = kind != EdgeKind::Branch(false);
                if admits(g, want) {
                    vec![s.clone()]
                } else {
                    vec![]
                }
            }
            NodeStmt::Assume(g) | NodeStmt::Assert(g) => {
                if admits(g, true) {
                    vec![s.clone()]
                } else {
                    vec![]
                }
            }
            NodeStmt::Assign { targets, values } => {
                let mut out = vec![s.clone()];
                for (t, e) in targets.iter().zip(values) {
                    let m = may(e, s).expect("validated program");
                    out = out
                        .into_iter()
                        .flat_map(|v| {
                            [false, true]
                                .into_iter()
                                .filter(move |&b| m & if b { MAY_TRUE } else { MAY_FALSE } != 0)
                                .map(move |b| {
                                    let mut w = v.clone();
                                    w.insert(t.clone(), b);
                                    w
                                })
                        })
                        .collect();
                }
                out
            }
            _ => vec![s.clone()],
        }
    }

    fn check_call(&self, from: NodeId, to: NodeId, path: String) -> Result<(), ProofError> {
        let Some(NodeStmt::Call { callee, args }) = self.g.nodes[from].stmt() else { unreachable!() };
        let ci = self.p.procedure_index(callee).expect("validated program");
        let proc = &self.p.procedures[ci];
        let cl = &self.layouts[ci];
        let (entry, exit) = (self.g.procs[ci].entry, self.g.procs[ci].exit);
        let globals = &self.p.globals;
        let fresh: Vec<String> = proc.locals[proc.formals.len()..].to_vec();
        let exits = self.satisfying(exit);
        for s in self.satisfying(from) {
            let actuals: Vec<bool> = args.iter().map(|a| holds(a, &s)).collect();
            let mut base: Valuation = globals.iter().map(|g| (g.clone(), s[g])).collect();
            for (i, &(f, gh)) in cl.ghosts.iter().enumerate() {
                base.insert(cl.vars[f].clone(), actuals[i]);
                base.insert(cl.vars[gh].clone(), actuals[i]);
            }
            for z in all_valuations(&fresh) {
                let mut v = base.clone();
                v.extend(z);
                if !holds(&self.inv[&entry], &v) {
                    return Err(self.fail(path, "callee entry assertion does not hold", &v));
                }
            }
            for t in &exits {
                let ghosts_match = cl.ghosts.iter().enumerate().all(|(i, &(_, gh))| t[&cl.vars[gh]] == actuals[i]);
                if !ghosts_match {
                    continue;
                }
                let mut back = s.clone();
                for gname in globals {
                    back.insert(gname.clone(), t[gname]);
                }
                if !holds(&self.inv[&to], &back) {
                    return Err(self.fail(path, "assertion after the call does not hold", &back));
                }
            }
        }
        Ok(())
    }
}

/// Check that `assertions`, keyed by node name, form an inductive proof of
/// partial correctness. Their keys are taken as the cut-set.
pub fn check_proof(p: &Program, assertions: &BTreeMap<String, BoolExpr>) -> Result<(), ProofError> {
    let g = build_transition_graph(p)?;
    let layouts = assertion_layouts(p);
    let mut inv = BTreeMap::new();
    for (name, e) in assertions {
        let n = g.node_by_name(name).ok_or_else(|| ProofError::UnknownNode(name.clone()))?;
        let layout = &layouts[g.nodes[n].proc];
        if let Some(v) = e.vars().into_iter().find(|v| layout.index(v).is_none()) {
            return Err(ProofError::OutOfScope {
                node: name.clone(),
                var: v.to_string(),
            });
        }
        inv.insert(n, e.clone());
    }
    let cut = CutSet {
        points: inv.keys().copied().collect::<BTreeSet<_>>(),
    };
    let problems = validate_cutset(&g, &cut);
    if !problems.is_empty() {
        return Err(ProofError::InvalidCutSet(problems.join("; ")));
    }
    let paths = enumerate_verification_paths(&g, &cut, DEFAULT_PATH_CAP)?;
    let ck = Checker {
        p,
        g,
        layouts,
        inv,
    };

    let main_entry = ck.g.procs[0].entry;
    if let Some(v) = all_valuations(&ck.layout(main_entry).vars)
        .into_iter()
        .find(|v| !holds(&ck.inv[&main_entry], v))
    {
        return Err(ck.fail(ck.g.nodes[main_entry].name.clone(), "entry assertion of main is not valid", &v));
    }

    for path in &paths {
        let desc = path.describe(&ck.g);
        if path.is_call(&ck.g) {
            ck.check_call(path.from, path.to, desc)?;
            continue;
        }
        if path.is_assert(&ck.g) {
            let Some(NodeStmt::Assert(a)) = ck.g.nodes[path.from].stmt() else { unreachable!() };
            for s in ck.satisfying(path.from) {
                if !holds(a, &s) {
                    return Err(ck.fail(desc, format!("assertion {} fails", expr_to_string(a)), &s));
                }
            }
        }
        let mut states: BTreeSet<Valuation> = ck.satisfying(path.from).into_iter().collect();
        for &e in &path.edges {
            let edge = ck.g.edges[e];
            states = states.iter().flat_map(|s| ck.step(edge.from, edge.kind, s)).collect();
        }
        if let Some(s) = states.iter().find(|s| !holds(&ck.inv[&path.to], s)) {
            return Err(ck.fail(desc, "target assertion does not hold", s));
        }
    }
    Ok(())
}
