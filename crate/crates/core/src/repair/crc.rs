//! Repairability as an exists-forall problem.
//!
//! Unknowns are the cut-point assertions and unknown expressions (as
//! uninterpreted Boolean functions), one selector per location option, and one
//! cost counter per location. Each verification path contributes constraints
//! that must hold for every valuation of the variable copies they mention.

use std::collections::{BTreeMap, HashMap};

use crate::cfg::{EdgeKind, NodeId, NodeStmt};
use crate::lang::BoolExpr;

use super::schema::UpdateSchema;
use super::sp::{sp_guarded, Effect, PathAssertion, Rhs};
use super::space::{sym, Layout, RepairModel, RepairSpace};
use super::term::{CopyVar, Term, TermEnv};

/// A formula that must hold for all values of its copy variables.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub path: String,
    pub body: Term,
}

impl Constraint {
    pub fn vars(&self) -> Vec<CopyVar> {
        let mut v = self.body.copy_vars();
        v.sort();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDecl {
    pub name: String,
    pub arity: usize,
}

/// `counter = prev + sum of costs of the selected options` (prev absent means 0).
#[derive(Debug, Clone)]
pub struct CostStep {
    pub counter: String,
    pub prev: Vec<String>,
    pub terms: Vec<(Option<String>, u32)>,
}

#[derive(Debug, Clone)]
pub struct ExistsForallProblem {
    pub functions: Vec<FunctionDecl>,
    /// Exactly one selector of each group is true.
    pub selectors: Vec<Vec<String>>,
    pub costs: Vec<CostStep>,
    /// Counter holding the total cost, bounded by `budget`.
    pub total: String,
    pub budget: u32,
    pub constraints: Vec<Constraint>,
}

fn selector(space: &RepairSpace, li: usize, u: UpdateSchema) -> Option<Term> {
    (space.locations[li].options.len() > 1).then(|| Term::Sel(space.selector_name(li, u)))
}

fn assertion_at(space: &RepairSpace, node: NodeId, args: Vec<Term>) -> Term {
    Term::apply(space.assertion_name(node), args)
}

fn layout_at(layout: &Layout, copy: usize) -> Vec<Term> {
    layout.vars.iter().map(|v| Term::var(v.clone(), copy)).collect()
}

fn unknown(space: &RepairSpace, k: usize, copy: usize) -> Term {
    let u = &space.unknowns[k];
    Term::apply(u.name.clone(), u.scope.iter().map(|v| Term::var(v.clone(), copy)).collect())
}

fn rhs(e: &BoolExpr, copy: usize) -> Rhs {
    match e {
        BoolExpr::Star => Rhs::Star,
        BoolExpr::Choose(a, b) => Rhs::Choose(Term::from_expr(a, copy), Term::from_expr(b, copy)),
        e => Rhs::Det(Term::from_expr(e, copy)),
    }
}

/// Effect of option `u` at the edge leaving `node`, over copy `copy`.
fn effect(space: &RepairSpace, node: NodeId, kind: EdgeKind, u: UpdateSchema, copy: usize) -> Effect {
    let li = space.loc_of[&node];
    let loc = &space.locations[li];
    let polarity = |t: Term| if kind == EdgeKind::Branch(false) { Term::not(t) } else { t };
    match u {
        UpdateSchema::AssignToSkip | UpdateSchema::CallToSkip | UpdateSchema::AssumeToSkip => Effect::Frame,
        UpdateSchema::AssumeToAssume => Effect::Assume(polarity(unknown(space, loc.guard.unwrap(), copy))),
        UpdateSchema::AssignToAssign => Effect::Assign(
            loc.assigns
                .iter()
                .zip(space.layouts[loc.proc].scope())
                .map(|(&k, v)| (v.clone(), Rhs::Det(unknown(space, k, copy))))
                .collect(),
        ),
        UpdateSchema::CallToCall => unreachable!("calls form their own paths"),
        UpdateSchema::Id => match space.graph.nodes[node].stmt().expect("location") {
            NodeStmt::Branch { guard: Some(g) } => Effect::Assume(polarity(Term::from_expr(g, copy))),
            NodeStmt::Assume(g) => Effect::Assume(Term::from_expr(g, copy)),
            NodeStmt::Assign { targets, values } => Effect::Assign(
                targets
                    .iter()
                    .zip(values)
                    .map(|(t, e)| (t.clone(), rhs(e, copy)))
                    .collect(),
            ),
            _ => Effect::Frame,
        },
    }
}

/// Path assertion at the end of a path without calls or asserts.
pub fn path_assertion(space: &RepairSpace, pi: usize) -> PathAssertion {
    let path = &space.paths[pi];
    let layout = space.layout_of(path.from);
    let mut a = PathAssertion::start(layout.vars.clone(), assertion_at(space, path.from, layout_at(layout, 0)));
    for (t, &e) in path.edges.iter().enumerate() {
        let edge = space.graph.edges[e];
        let li = space.loc_of[&edge.from];
        let options: Vec<(Option<Term>, Effect)> = space.locations[li]
            .options
            .iter()
            .map(|o| (selector(space, li, o.schema), effect(space, edge.from, edge.kind, o.schema, t)))
            .collect();
        a = sp_guarded(&options, &a);
    }
    a
}

/// Constraints contributed by one verification path.
pub fn build_crc(space: &RepairSpace, pi: usize) -> Vec<Constraint> {
    let path = &space.paths[pi];
    let desc = path.describe(&space.graph);
    let g = &space.graph;
    let layout = space.layout_of(path.from);
    let mk = |body| Constraint {
        path: desc.clone(),
        body,
    };
    if path.is_assert(g) {
        let Some(NodeStmt::Assert(a)) = g.nodes[path.from].stmt() else { unreachable!() };
        let here = layout_at(layout, 0);
        return vec![mk(Term::implies(
            assertion_at(space, path.from, here.clone()),
            Term::and([Term::from_expr(a, 0), assertion_at(space, path.to, here)]),
        ))];
    }
    if path.is_call(g) {
        return call_crc(space, path.from, path.to, &desc);
    }
    let a = path_assertion(space, pi);
    let target = assertion_at(space, path.to, a.current());
    a.disjuncts
        .iter()
        .map(|d| mk(Term::implies(a.disjunct_term(d), target.clone())))
        .collect()
}

fn call_crc(space: &RepairSpace, from: NodeId, to: NodeId, desc: &str) -> Vec<Constraint> {
    let Some(NodeStmt::Call { callee, args }) = space.graph.nodes[from].stmt() else { unreachable!() };
    let li = space.loc_of[&from];
    let loc = &space.locations[li];
    let ci = space.program.procedure_index(callee).unwrap();
    let caller = space.layout_of(from);
    let cl = &space.layouts[ci];
    let proc = &space.program.procedures[ci];
    let n_globals = space.program.globals.len();

    let has = |u| loc.option_index(u).is_some();
    let actuals: Vec<Term> = args
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let given = Term::from_expr(a, 0);
            if has(UpdateSchema::CallToCall) {
                let new = unknown(space, loc.args[k], 0);
                match selector(space, li, UpdateSchema::CallToCall) {
                    Some(s) => Term::ite(s, new, given),
                    None => new,
                }
            } else {
                given
            }
        })
        .collect();
    let skip = if has(UpdateSchema::CallToSkip) {
        selector(space, li, UpdateSchema::CallToSkip).unwrap_or(Term::Const(true))
    } else {
        Term::Const(false)
    };
    let pre = assertion_at(space, from, layout_at(caller, 0));

    // Entry: globals as they are, formals and their ghosts take the actuals,
    // other locals are arbitrary.
    let ghost_pos: HashMap<usize, usize> = cl.ghosts.iter().enumerate().map(|(k, &(_, g))| (g, k)).collect();
    let entry_args: Vec<Term> = cl
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if i < n_globals {
                Term::var(v.clone(), 0)
            } else if i < n_globals + proc.formals.len() {
                actuals[i - n_globals].clone()
            } else if let Some(&k) = ghost_pos.get(&i) {
                actuals[k].clone()
            } else {
                Term::var(v.clone(), 1)
            }
        })
        .collect();
    let entry = Term::implies(
        Term::and([Term::not(skip.clone()), pre.clone()]),
        assertion_at(space, space.graph.procs[ci].entry, entry_args),
    );

    // Exit: any callee exit state whose ghosts match the actuals; the caller
    // keeps its locals and takes the callee's globals.
    let ghosts_match = Term::and(
        cl.ghosts
            .iter()
            .enumerate()
            .map(|(k, &(_, g))| Term::iff(Term::var(cl.vars[g].clone(), 1), actuals[k].clone())),
    );
    let post_args: Vec<Term> = caller
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| Term::var(v.clone(), usize::from(i < n_globals)))
        .collect();
    let exit = Term::implies(
        Term::and([
            Term::not(skip.clone()),
            pre.clone(),
            assertion_at(space, space.graph.procs[ci].exit, layout_at(cl, 1)),
            ghosts_match,
        ]),
        assertion_at(space, to, post_args),
    );

    let skipped = Term::implies(
        Term::and([skip, pre]),
        assertion_at(space, to, layout_at(caller, 0)),
    );
    [entry, exit, skipped]
        .into_iter()
        .filter(|t| *t != Term::Const(true))
        .map(|body| Constraint {
            path: desc.to_string(),
            body,
        })
        .collect()
}

/// The whole repairability problem at the space's budget.
pub fn build_repairability_formula(space: &RepairSpace) -> ExistsForallProblem {
    let mut functions: Vec<FunctionDecl> = space
        .cut
        .points
        .iter()
        .map(|&k| FunctionDecl {
            name: space.assertion_name(k),
            arity: space.layout_of(k).len(),
        })
        .collect();
    functions.extend(space.unknowns.iter().map(|u| FunctionDecl {
        name: u.name.clone(),
        arity: u.scope.len(),
    }));
    let selectors = (0..space.locations.len())
        .filter(|&li| space.locations[li].options.len() > 1)
        .map(|li| {
            space.locations[li]
                .options
                .iter()
                .map(|o| space.selector_name(li, o.schema))
                .collect()
        })
        .collect();

    let mut costs = Vec::new();
    let mut exits = Vec::new();
    for (pi, pg) in space.graph.procs.iter().enumerate() {
        let mut prev: Vec<String> = Vec::new();
        let mut terms: Vec<(Option<String>, u32)> = Vec::new();
        for (li, loc) in space.locations.iter().enumerate().filter(|(_, l)| l.proc == pi) {
            let counter = format!("C_{}", sym(&loc.name));
            costs.push(CostStep {
                counter: counter.clone(),
                prev: prev.clone(),
                terms: std::mem::take(&mut terms),
            });
            prev = vec![counter];
            terms = loc
                .options
                .iter()
                .filter(|o| o.cost > 0)
                .map(|o| (selector(space, li, o.schema).map(|_| space.selector_name(li, o.schema)), o.cost))
                .collect();
        }
        let exit = format!("C_{}", sym(&space.graph.nodes[pg.exit].name));
        if pi == 0 {
            // filled in below, once every other exit counter exists
            exits.push((exit, prev, terms));
        } else {
            costs.push(CostStep {
                counter: exit.clone(),
                prev,
                terms,
            });
            exits.push((exit, vec![], vec![]));
        }
    }
    let (total, mut prev, terms) = exits[0].clone();
    prev.extend(exits[1..].iter().map(|e| e.0.clone()));
    costs.push(CostStep {
        counter: total.clone(),
        prev,
        terms,
    });

    let main_layout = &space.layouts[0];
    let mut constraints = vec![Constraint {
        path: "entry of main".into(),
        body: assertion_at(space, space.graph.procs[0].entry, layout_at(main_layout, 0)),
    }];
    for pi in 0..space.paths.len() {
        constraints.extend(build_crc(space, pi));
    }
    ExistsForallProblem {
        functions,
        selectors,
        costs,
        total,
        budget: space.budget,
        constraints,
    }
}

/// A candidate solution as an interpretation of the problem's unknowns.
pub struct ModelEnv<'a> {
    tables: HashMap<String, &'a [bool]>,
    selectors: HashMap<String, bool>,
    pub vars: BTreeMap<CopyVar, bool>,
}

impl<'a> ModelEnv<'a> {
    pub fn new(space: &RepairSpace, m: &'a RepairModel) -> Self {
        let mut tables: HashMap<String, &'a [bool]> = HashMap::new();
        for (&k, t) in &m.assertions {
            tables.insert(space.assertion_name(k), t);
        }
        for (u, t) in space.unknowns.iter().zip(&m.tables) {
            tables.insert(u.name.clone(), t);
        }
        let mut selectors = HashMap::new();
        for (li, loc) in space.locations.iter().enumerate() {
            for o in &loc.options {
                selectors.insert(space.selector_name(li, o.schema), m.choice[li] == o.schema);
            }
        }
        ModelEnv {
            tables,
            selectors,
            vars: BTreeMap::new(),
        }
    }

    pub fn cost_of(&self, step: &CostStep, counters: &HashMap<String, u32>) -> u32 {
        let prev: u32 = step.prev.iter().map(|p| counters[p]).sum();
        let own: u32 = step
            .terms
            .iter()
            .filter(|(s, _)| s.as_ref().is_none_or(|s| self.selectors[s]))
            .map(|(_, c)| c)
            .sum();
        prev + own
    }
}

impl TermEnv for ModelEnv<'_> {
    fn var(&self, v: &CopyVar) -> bool {
        self.vars[v]
    }

    fn apply(&self, func: &str, args: &[bool]) -> bool {
        let row = args.iter().enumerate().fold(0usize, |r, (i, &b)| r | (usize::from(b) << i));
        self.tables[func][row]
    }

    fn sel(&self, name: &str) -> bool {
        self.selectors[name]
    }
}

impl ExistsForallProblem {
    /// Check a model against every constraint by enumerating all values of
    /// the universally quantified copies. Constraints over more than
    /// `max_vars` copies are reported as unchecked.
    pub fn check_model(&self, space: &RepairSpace, m: &RepairModel, max_vars: usize) -> Result<(), String> {
        let mut env = ModelEnv::new(space, m);
        let mut counters = HashMap::new();
        for step in &self.costs {
            let c = env.cost_of(step, &counters);
            counters.insert(step.counter.clone(), c);
        }
        if counters[&self.total] > self.budget {
            return Err(format!("total cost {} exceeds {}", counters[&self.total], self.budget));
        }
        for c in &self.constraints {
            let vars = c.vars();
            if vars.len() > max_vars {
                return Err(format!("constraint on {} has {} variables", c.path, vars.len()));
            }
            for row in 0..1u64 << vars.len() {
                env.vars = vars.iter().enumerate().map(|(i, v)| (v.clone(), row >> i & 1 == 1)).collect();
                if !c.body.eval(&env) {
                    let state: Vec<String> = env.vars.iter().map(|(v, b)| format!("{}={}", v.symbol(), u8::from(*b))).collect();
                    return Err(format!("{} fails at {}", c.path, state.join(" ")));
                }
            }
        }
        Ok(())
    }
}
