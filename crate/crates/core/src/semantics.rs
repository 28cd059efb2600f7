//! Explicit-state interpreter for Boolean programs.
//!
//! Explores every initial valuation and every nondeterministic choice
//! breadth-first and reports whether some finite execution reaches `err`.
//! It is deliberately independent of the repair encoding and serves as the
//! correctness oracle in tests.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::cfg::{build_transition_graph, CfgError, EdgeKind, NodeId, NodeKind, NodeStmt, TransitionGraph};
use crate::lang::eval::{MAY_FALSE, MAY_TRUE};
use crate::lang::{Compiled, Program, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error("program has {0} variables; the interpreter supports at most 64")]
    TooManyVariables(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Longest execution explored, in transitions.
    pub max_depth: usize,
    pub max_stack: usize,
    /// Cap on distinct configurations visited.
    pub max_states: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_depth: 10_000,
            max_stack: 8,
            max_states: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OracleOptions {
    pub bounds: Bounds,
    /// Treat executions blocked by a failing `assume` as violations.
    pub strict_stuck: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    pub ret: NodeId,
    /// Caller locals at the time of the call.
    pub saved: u64,
}

/// `(location, valuation, stack)`. Bits of out-of-scope variables are zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    pub node: NodeId,
    pub bits: u64,
    pub stack: Vec<Frame>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    PartiallyCorrect,
    ErrorReached(Vec<Config>),
    StuckReached(Vec<Config>),
    BoundExceeded,
}

impl Verdict {
    pub fn is_correct(&self) -> bool {
        *self == Verdict::PartiallyCorrect
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::PartiallyCorrect => "partially correct",
            Verdict::ErrorReached(_) => "error reachable",
            Verdict::StuckReached(_) => "blocked execution reachable",
            Verdict::BoundExceeded => "bound exceeded",
        })
    }
}

enum Code {
    Plain,
    Assign { targets: Vec<u32>, values: Vec<Compiled> },
    Guarded(Option<Compiled>),
    Call { callee: usize, args: Vec<Compiled> },
}

/// Program prepared for execution over a `u64` state.
pub struct Machine {
    pub graph: TransitionGraph,
    vars: Vec<String>,
    code: Vec<Code>,
    global_mask: u64,
    local_mask: Vec<u64>,
    formals: Vec<Vec<u32>>,
    fresh_locals: Vec<Vec<u32>>,
    scope: Vec<Vec<u32>>,
}

fn mask(ix: &[u32]) -> u64 {
    ix.iter().fold(0, |m, &i| m | 1 << i)
}

/// All assignments to the bits `ix` on top of `base`.
fn enumerate(base: u64, ix: &[u32]) -> impl Iterator<Item = u64> + '_ {
    (0..1u64 << ix.len()).map(move |k| {
        ix.iter()
            .enumerate()
            .fold(base, |b, (j, &i)| if k >> j & 1 == 1 { b | 1 << i } else { b })
    })
}

impl Machine {
    pub fn new(p: &Program) -> Result<Self, SemanticsError> {
        let vars: Vec<String> = p.all_variables().into_iter().map(String::from).collect();
        if vars.len() > 64 {
            return Err(SemanticsError::TooManyVariables(vars.len()));
        }
        let graph = build_transition_graph(p)?;
        let index: HashMap<&str, u32> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i as u32))
            .collect();
        let ix = |names: &[String]| -> Vec<u32> { names.iter().map(|n| index[n.as_str()]).collect() };
        let look = |v: &str| index.get(v).map(|&i| i as usize);
        let compile = |e| Compiled::new(e, &look).expect("validated program");
        let code = graph
            .nodes
            .iter()
            .map(|n| match n.stmt() {
                Some(NodeStmt::Assign { targets, values }) => Code::Assign {
                    targets: ix(targets),
                    values: values.iter().map(compile).collect(),
                },
                Some(NodeStmt::Branch { guard }) => Code::Guarded(guard.as_ref().map(compile)),
                Some(NodeStmt::Assume(g)) | Some(NodeStmt::Assert(g)) => {
                    Code::Guarded(Some(compile(g)))
                }
                Some(NodeStmt::Call { callee, args }) => Code::Call {
                    callee: p.procedure_index(callee).expect("validated program"),
                    args: args.iter().map(compile).collect(),
                },
                _ => Code::Plain,
            })
            .collect();
        let globals = ix(&p.globals);
        let mut local_mask = Vec::new();
        let mut formals = Vec::new();
        let mut fresh_locals = Vec::new();
        let mut scope = Vec::new();
        for q in &p.procedures {
            let locals = ix(&q.locals);
            local_mask.push(mask(&locals));
            formals.push(ix(&q.formals));
            fresh_locals.push(
                q.locals
                    .iter()
                    .filter(|l| !q.formals.contains(l))
                    .map(|l| index[l.as_str()])
                    .collect(),
            );
            scope.push(globals.iter().chain(&locals).copied().collect());
        }
        Ok(Machine {
            graph,
            global_mask: mask(&globals),
            vars,
            code,
            local_mask,
            formals,
            fresh_locals,
            scope,
        })
    }

    pub fn initial_configs(&self) -> Vec<Config> {
        let entry = self.graph.procs[0].entry;
        enumerate(0, &self.scope[0])
            .map(|bits| Config {
                node: entry,
                bits,
                stack: Vec::new(),
            })
            .collect()
    }

    /// True for `exit` of `main` with an empty stack and for `err`.
    pub fn is_terminal(&self, c: &Config) -> bool {
        c.node == self.graph.err || (c.node == self.graph.procs[0].exit && c.stack.is_empty())
    }

    /// Successor configurations; empty for terminal and blocked configurations.
    pub fn step(&self, c: &Config) -> Vec<Config> {
        let g = &self.graph;
        let mut out = Vec::new();
        let node = &g.nodes[c.node];
        match node.kind {
            NodeKind::Err => return out,
            NodeKind::Exit => {
                if let Some((frame, rest)) = c.stack.split_last() {
                    out.push(Config {
                        node: frame.ret,
                        bits: c.bits & self.global_mask | frame.saved,
                        stack: rest.to_vec(),
                    });
                }
                return out;
            }
            NodeKind::Stmt { .. } => {}
        }
        let at = |to: NodeId, bits: u64| Config {
            node: to,
            bits,
            stack: c.stack.clone(),
        };
        for &e in g.out_edges(c.node) {
            let edge = g.edges[e];
            match (&self.code[c.node], edge.kind) {
                (Code::Assign { targets, values }, _) => {
                    let sets: Vec<u8> = values.iter().map(|v| v.values(c.bits)).collect();
                    let base = targets.iter().fold(c.bits, |b, &i| b & !(1 << i));
                    let mut states = vec![base];
                    for (&t, &s) in targets.iter().zip(&sets) {
                        let mut next = Vec::new();
                        for b in states {
                            if s & MAY_FALSE != 0 {
                                next.push(b);
                            }
                            if s & MAY_TRUE != 0 {
                                next.push(b | 1 << t);
                            }
                        }
                        states = next;
                    }
                    out.extend(states.into_iter().map(|b| at(edge.to, b)));
                }
                (Code::Guarded(guard), kind) => {
                    let want = !matches!(kind, EdgeKind::Branch(false) | EdgeKind::AssertFail);
                    let ok = match (guard, kind) {
                        (None, _) => true,
                        (Some(gd), _) => gd.eval(c.bits) == want,
                    };
                    if ok {
                        out.push(at(edge.to, c.bits));
                    }
                }
                (Code::Call { callee, args }, _) => {
                    let mut base = c.bits & self.global_mask;
                    for (&f, a) in self.formals[*callee].iter().zip(args) {
                        if a.eval(c.bits) {
                            base |= 1 << f;
                        }
                    }
                    let caller = node.proc;
                    let mut stack = c.stack.clone();
                    stack.push(Frame {
                        ret: edge.to,
                        saved: c.bits & self.local_mask[caller],
                    });
                    let entry = g.procs[*callee].entry;
                    for bits in enumerate(base, &self.fresh_locals[*callee]) {
                        out.push(Config {
                            node: entry,
                            bits,
                            stack: stack.clone(),
                        });
                    }
                }
                (Code::Plain, _) => out.push(at(edge.to, c.bits)),
            }
        }
        out
    }

    /// Breadth-first exploration of all executions up to the bounds.
    pub fn check(&self, opts: &OracleOptions) -> Verdict {
        let b = opts.bounds;
        let mut parent: HashMap<Config, Option<Config>> = HashMap::new();
        let mut queue: VecDeque<(Config, usize)> = VecDeque::new();
        for c in self.initial_configs() {
            if !parent.contains_key(&c) {
                parent.insert(c.clone(), None);
                queue.push_back((c, 0));
            }
        }
        let mut bounded = false;
        while let Some((c, depth)) = queue.pop_front() {
            if c.node == self.graph.err {
                return Verdict::ErrorReached(trace(&parent, c));
            }
            if self.is_terminal(&c) {
                continue;
            }
            let succ = self.step(&c);
            if succ.is_empty() {
                if opts.strict_stuck {
                    return Verdict::StuckReached(trace(&parent, c));
                }
                continue;
            }
            if depth >= b.max_depth {
                bounded = true;
                continue;
            }
            for s in succ {
                if s.stack.len() > b.max_stack || parent.len() >= b.max_states {
                    bounded = true;
                    continue;
                }
                if !parent.contains_key(&s) {
                    parent.insert(s.clone(), Some(c.clone()));
                    queue.push_back((s, depth + 1));
                }
            }
        }
        if bounded {
            Verdict::BoundExceeded
        } else {
            Verdict::PartiallyCorrect
        }
    }

    /// Reachable `(location, valuation)` pairs, ignoring the stack.
    pub fn reachable_states(&self, opts: &OracleOptions) -> HashMap<NodeId, HashSet<u64>> {
        let mut seen: HashSet<Config> = HashSet::new();
        let mut queue: VecDeque<Config> = self.initial_configs().into_iter().collect();
        seen.extend(queue.iter().cloned());
        while let Some(c) = queue.pop_front() {
            for s in self.step(&c) {
                if s.stack.len() <= opts.bounds.max_stack
                    && seen.len() < opts.bounds.max_states
                    && seen.insert(s.clone())
                {
                    queue.push_back(s);
                }
            }
        }
        let mut out: HashMap<NodeId, HashSet<u64>> = HashMap::new();
        for c in seen {
            out.entry(c.node).or_default().insert(c.bits);
        }
        out
    }

    /// Index of a variable in the state bits.
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Valuation of the variables in scope at a configuration's location.
    pub fn valuation(&self, c: &Config) -> Valuation {
        let proc = self.graph.nodes[c.node].proc;
        let scope = if c.node == self.graph.err { &self.scope[0] } else { &self.scope[proc] };
        scope
            .iter()
            .map(|&i| (self.vars[i as usize].clone(), c.bits >> i & 1 == 1))
            .collect()
    }

    /// `location b0=1 b1=0 [depth n]`
    pub fn render(&self, c: &Config) -> String {
        let proc = self.graph.nodes[c.node].proc;
        let mut s = self.graph.nodes[c.node].name.clone();
        for &i in &self.scope[proc] {
            s.push_str(&format!(" {}={}", self.vars[i as usize], c.bits >> i & 1));
        }
        if !c.stack.is_empty() {
            s.push_str(&format!(" [depth {}]", c.stack.len()));
        }
        s
    }
}

fn trace(parent: &HashMap<Config, Option<Config>>, last: Config) -> Vec<Config> {
    let mut out = vec![last];
    while let Some(Some(p)) = parent.get(out.last().unwrap()) {
        out.push(p.clone());
    }
    out.reverse();
    out
}

pub fn check_partial_correctness(
    p: &Program,
    opts: &OracleOptions,
) -> Result<Verdict, SemanticsError> {
    Ok(Machine::new(p)?.check(opts))
}
