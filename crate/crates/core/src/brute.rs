//! Exhaustive repair search, used as an oracle for the solver-based engine.
//!
//! Every update function within the budget is tried. For each one, the
//! question is whether truth tables for its unknown expressions exist that
//! make the program correct. Two procedures answer it:
//!
//! * [`TableSearch::Enumerate`] fills tables lazily: reachability is explored
//!   with the rows decided so far, and the search branches on a row only when
//!   an execution reaches it.
//! * [`TableSearch::Game`] solves a safety game on the explicit state graph.
//!   In a single procedure a table row is indexed by the full state, so a
//!   table is exactly a memoryless strategy at its location, and memoryless
//!   strategies suffice for safety.
//!
//! Limited to single-procedure programs.

use std::collections::{HashSet, VecDeque};

use crate::cfg::{build_transition_graph, EdgeKind, NodeId, NodeKind, NodeStmt, TransitionGraph};
use crate::lang::eval::{MAY_FALSE, MAY_TRUE};
use crate::lang::{Compiled, Program};
use crate::repair::space::statement_type;
use crate::repair::{applicable_schemas, CostModel, UpdateSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSearch {
    /// Give up (return `None`) after this many reachability explorations.
    Enumerate { max_steps: usize },
    Game,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteResult {
    /// A repairing update function, by location name, if one exists.
    pub update: Option<Vec<(String, UpdateSchema)>>,
    pub update_functions_tried: usize,
}

enum Code {
    Plain,
    Assign(Vec<(usize, Compiled)>),
    Guard(Option<Compiled>),
}

struct Ctx {
    g: TransitionGraph,
    codes: Vec<Code>,
    nvars: usize,
    locs: Vec<NodeId>,
    loc_index: Vec<Option<usize>>,
}

/// Partial truth tables for the unknowns of one update function.
#[derive(Clone)]
struct Tables {
    /// Per location: guard table, or one table per variable for assign->assign.
    rows: Vec<Vec<Vec<Option<bool>>>>,
}

enum Explore {
    Correct,
    Incorrect,
    /// Need a value for row `row` of table `k` at location `loc`.
    Undecided { loc: usize, k: usize, row: usize },
}

impl Ctx {
    fn new(p: &Program) -> Self {
        assert!(p.procedures.len() == 1, "the exhaustive search handles single-procedure programs");
        let g = build_transition_graph(p).expect("valid program");
        let vars = p.inscope(0);
        let idx = |v: &str| vars.iter().position(|x| x == v);
        let codes = g
            .nodes
            .iter()
            .map(|n| match n.stmt() {
                Some(NodeStmt::Assign { targets, values }) => Code::Assign(
                    targets
                        .iter()
                        .zip(values)
                        .map(|(t, e)| (idx(t).unwrap(), Compiled::new(e, &idx).unwrap()))
                        .collect(),
                ),
                Some(NodeStmt::Branch { guard }) => Code::Guard(guard.as_ref().map(|e| Compiled::new(e, &idx).unwrap())),
                Some(NodeStmt::Assume(e)) | Some(NodeStmt::Assert(e)) => Code::Guard(Some(Compiled::new(e, &idx).unwrap())),
                Some(NodeStmt::Call { .. }) => panic!("the exhaustive search handles call-free programs"),
                _ => Code::Plain,
            })
            .collect();
        let locs: Vec<NodeId> = g.locations().collect();
        let mut loc_index = vec![None; g.nodes.len()];
        for (i, &n) in locs.iter().enumerate() {
            loc_index[n] = Some(i);
        }
        Ctx {
            g,
            codes,
            nvars: vars.len(),
            locs,
            loc_index,
        }
    }

    fn explore(&self, update: &[UpdateSchema], t: &Tables) -> Explore {
        let entry = self.g.procs[0].entry;
        let mut seen: HashSet<(NodeId, u64)> = HashSet::new();
        let mut queue = VecDeque::new();
        for r in 0..1u64 << self.nvars {
            seen.insert((entry, r));
            queue.push_back((entry, r));
        }
        while let Some((n, s)) = queue.pop_front() {
            if n == self.g.err {
                return Explore::Incorrect;
            }
            let Some(li) = self.loc_index[n] else { continue };
            let u = update[li];
            let mut next: Vec<(NodeId, u64)> = Vec::new();
            for &e in self.g.out_edges(n) {
                let edge = self.g.edges[e];
                match (&self.codes[n], u) {
                    (_, UpdateSchema::AssignToSkip | UpdateSchema::AssumeToSkip) => next.push((edge.to, s)),
                    (Code::Guard(_), UpdateSchema::AssumeToAssume) => {
                        let want = edge.kind != EdgeKind::Branch(false);
                        match t.rows[li][0][s as usize] {
                            None => return Explore::Undecided { loc: li, k: 0, row: s as usize },
                            Some(v) if v == want => next.push((edge.to, s)),
                            Some(_) => {}
                        }
                    }
                    (Code::Assign(_), UpdateSchema::AssignToAssign) => {
                        let mut out = 0u64;
                        for k in 0..self.nvars {
                            match t.rows[li][k][s as usize] {
                                None => return Explore::Undecided { loc: li, k, row: s as usize },
                                Some(v) => out |= u64::from(v) << k,
                            }
                        }
                        next.push((edge.to, out));
                    }
                    _ => {
                        next = self.id_successors(n, s);
                        break;
                    }
                }
            }
            for st in next {
                if seen.insert(st) {
                    queue.push_back(st);
                }
            }
        }
        Explore::Correct
    }

    /// Whether some completion of the partial tables makes the program correct.
    fn search(&self, update: &[UpdateSchema], t: &mut Tables, budget: &mut usize) -> Option<bool> {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        match self.explore(update, t) {
            Explore::Correct => Some(true),
            Explore::Incorrect => Some(false),
            Explore::Undecided { loc, k, row } => {
                for v in [false, true] {
                    t.rows[loc][k][row] = Some(v);
                    match self.search(update, t, budget) {
                        Some(true) => return Some(true),
                        None => return None,
                        Some(false) => {}
                    }
                }
                t.rows[loc][k][row] = None;
                Some(false)
            }
        }
    }

    /// Successor sets the controller can choose between at `(n, s)`; the
    /// environment then picks any member of the chosen set.
    fn choices(&self, n: NodeId, s: u64, u: UpdateSchema) -> Vec<Vec<(NodeId, u64)>> {
        let edges: Vec<_> = self.g.out_edges(n).iter().map(|&e| self.g.edges[e]).collect();
        match (&self.codes[n], u) {
            (_, UpdateSchema::AssignToSkip | UpdateSchema::AssumeToSkip) => {
                vec![edges.iter().map(|e| (e.to, s)).collect()]
            }
            (Code::Guard(_), UpdateSchema::AssumeToAssume) => [true, false]
                .into_iter()
                .map(|v| {
                    edges
                        .iter()
                        .filter(|e| (e.kind != EdgeKind::Branch(false)) == v)
                        .map(|e| (e.to, s))
                        .collect()
                })
                .collect(),
            (Code::Assign(_), UpdateSchema::AssignToAssign) => (0..1u64 << self.nvars)
                .map(|r| edges.iter().map(|e| (e.to, r)).collect())
                .collect(),
            _ => vec![self.id_successors(n, s)],
        }
    }

    fn id_successors(&self, n: NodeId, s: u64) -> Vec<(NodeId, u64)> {
        let mut next = Vec::new();
        for &e in self.g.out_edges(n) {
            let edge = self.g.edges[e];
            match &self.codes[n] {
                Code::Guard(g) => {
                    let want = !matches!(edge.kind, EdgeKind::Branch(false) | EdgeKind::AssertFail);
                    if g.as_ref().is_none_or(|g| g.eval(s) == want) {
                        next.push((edge.to, s));
                    }
                }
                Code::Assign(items) => {
                    let mut rows = vec![s];
                    for (tgt, e) in items {
                        let vs = e.values(s);
                        rows = rows
                            .into_iter()
                            .flat_map(|r| {
                                let base = r & !(1 << tgt);
                                [(MAY_FALSE, base), (MAY_TRUE, base | 1 << tgt)]
                                    .into_iter()
                                    .filter(move |(m, _)| vs & m != 0)
                                    .map(|(_, r)| r)
                            })
                            .collect();
                    }
                    next.extend(rows.into_iter().map(|r| (edge.to, r)));
                }
                Code::Plain => next.push((edge.to, s)),
            }
        }
        next
    }

    /// Whether the controller can keep every execution away from `err`.
    fn game(&self, update: &[UpdateSchema]) -> bool {
        let rows = 1usize << self.nvars;
        let idx = |n: NodeId, s: u64| n * rows + s as usize;
        let mut losing = vec![false; self.g.nodes.len() * rows];
        for s in 0..rows {
            losing[idx(self.g.err, s as u64)] = true;
        }
        let choices: Vec<Vec<Vec<Vec<(NodeId, u64)>>>> = (0..self.g.nodes.len())
            .map(|n| {
                (0..rows as u64)
                    .map(|s| match self.loc_index[n] {
                        Some(li) => self.choices(n, s, update[li]),
                        None => vec![vec![]],
                    })
                    .collect()
            })
            .collect();
        loop {
            let mut changed = false;
            for n in 0..self.g.nodes.len() {
                if n == self.g.err {
                    continue;
                }
                for s in 0..rows {
                    if losing[idx(n, s as u64)] {
                        continue;
                    }
                    let lost = choices[n][s]
                        .iter()
                        .all(|c| c.iter().any(|&(m, r)| losing[idx(m, r)]));
                    if lost {
                        losing[idx(n, s as u64)] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let entry = self.g.procs[0].entry;
        (0..rows as u64).all(|s| !losing[idx(entry, s)])
    }

    fn tables_for(&self, update: &[UpdateSchema]) -> Tables {
        let rows = 1usize << self.nvars;
        Tables {
            rows: update
                .iter()
                .map(|u| match u {
                    UpdateSchema::AssumeToAssume => vec![vec![None; rows]],
                    UpdateSchema::AssignToAssign => vec![vec![None; rows]; self.nvars],
                    _ => vec![],
                })
                .collect(),
        }
    }
}

/// Search all update functions of cost at most the model's budget, cheapest
/// first. `None` if the search exceeds `max_steps` explorations.
pub fn brute_force_repair(p: &Program, cm: &CostModel, search: TableSearch) -> Option<BruteResult> {
    let ctx = Ctx::new(p);
    let enabled = cm.enabled();
    let options: Vec<Vec<(UpdateSchema, u32)>> = ctx
        .locs
        .iter()
        .map(|&n| {
            let NodeKind::Stmt { stmt, .. } = &ctx.g.nodes[n].kind else { unreachable!() };
            applicable_schemas(statement_type(stmt), &enabled)
                .into_iter()
                .map(|u| (u, cm.cost(u, &ctx.g.nodes[n].name)))
                .filter(|&(_, c)| c <= cm.budget)
                .collect()
        })
        .collect();
    let mut all = Vec::new();
    let mut cur = Vec::new();
    enumerate(&options, cm.budget, 0, &mut cur, &mut all);
    all.sort_by_key(|(_, c)| *c);
    let mut steps = match search {
        TableSearch::Enumerate { max_steps } => max_steps,
        TableSearch::Game => 0,
    };
    let mut tried = 0;
    for (update, _) in all {
        tried += 1;
        let verdict = match search {
            TableSearch::Enumerate { .. } => ctx.search(&update, &mut ctx.tables_for(&update), &mut steps),
            TableSearch::Game => Some(ctx.game(&update)),
        };
        match verdict {
            None => return None,
            Some(true) => {
                let named = ctx
                    .locs
                    .iter()
                    .zip(&update)
                    .map(|(&n, &u)| (ctx.g.nodes[n].name.clone(), u))
                    .collect();
                return Some(BruteResult {
                    update: Some(named),
                    update_functions_tried: tried,
                });
            }
            Some(false) => {}
        }
    }
    Some(BruteResult {
        update: None,
        update_functions_tried: tried,
    })
}

fn enumerate(
    options: &[Vec<(UpdateSchema, u32)>],
    left: u32,
    i: usize,
    cur: &mut Vec<UpdateSchema>,
    out: &mut Vec<(Vec<UpdateSchema>, u32)>,
) {
    if i == options.len() {
        let cost = 0;
        out.push((cur.clone(), cost));
        return;
    }
    for &(u, c) in &options[i] {
        if c <= left {
            cur.push(u);
            let before = out.len();
            enumerate(options, left - c, i + 1, cur, out);
            for item in &mut out[before..] {
                item.1 += c;
            }
            cur.pop();
        }
    }
}
