use std::collections::{BTreeMap, HashMap, HashSet};

use crate::cfg::{
    build_transition_graph, compute_cutset, enumerate_verification_paths, validate_cutset, CutSet,
    NodeId, NodeStmt, TransitionGraph, VerificationPath,
};
use crate::lang::{Program, StatementType};

use super::schema::{applicable_schemas, CostModel, UpdateSchema};
use super::RepairError;

/// Variables an assertion of a procedure ranges over: the in-scope variables,
/// followed by one ghost copy per formal holding its value on entry.
#[derive(Debug, Clone)]
pub struct Layout {
    pub vars: Vec<String>,
    /// Number of in-scope (non-ghost) variables; they occupy the low bits of a row.
    pub n_scope: usize,
    /// `(formal position in vars, ghost position in vars)`
    pub ghosts: Vec<(usize, usize)>,
}

impl Layout {
    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn rows(&self) -> usize {
        1 << self.vars.len()
    }

    pub fn scope_rows(&self) -> usize {
        1 << self.n_scope
    }

    pub fn index(&self, v: &str) -> Option<usize> {
        self.vars.iter().position(|x| x == v)
    }

    pub fn scope(&self) -> &[String] {
        &self.vars[..self.n_scope]
    }

    pub fn scope_mask(&self) -> u64 {
        (1u64 << self.n_scope) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownRole {
    /// Guard of a branch or `assume`; a branch's false edge uses its negation.
    Guard,
    /// New value of an in-scope variable under `assign->assign`.
    Assign(String),
    /// Actual argument of a call under `call->call`.
    Arg(usize),
}

/// Unknown Boolean expression, represented by its truth table over `scope`.
#[derive(Debug, Clone)]
pub struct UnknownExpr {
    pub name: String,
    pub location: usize,
    pub role: UnknownRole,
    /// Row bit `i` is the value of `scope[i]`.
    pub scope: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocOption {
    pub schema: UpdateSchema,
    pub cost: u32,
}

/// A modifiable program location with the updates allowed there.
#[derive(Debug, Clone)]
pub struct Location {
    pub node: NodeId,
    pub name: String,
    pub proc: usize,
    pub ty: StatementType,
    /// Always starts with `id`; options costing more than the budget are dropped.
    pub options: Vec<LocOption>,
    pub guard: Option<usize>,
    pub assigns: Vec<usize>,
    pub args: Vec<usize>,
}

impl Location {
    pub fn option_index(&self, u: UpdateSchema) -> Option<usize> {
        self.options.iter().position(|o| o.schema == u)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpaceOptions {
    pub path_cap: usize,
}

impl Default for SpaceOptions {
    fn default() -> Self {
        SpaceOptions {
            path_cap: crate::cfg::DEFAULT_PATH_CAP,
        }
    }
}

/// Everything both encodings share: graph, cut-set, paths, layouts, locations and unknowns.
#[derive(Debug, Clone)]
pub struct RepairSpace {
    pub program: Program,
    pub graph: TransitionGraph,
    pub cut: CutSet,
    pub paths: Vec<VerificationPath>,
    pub layouts: Vec<Layout>,
    pub locations: Vec<Location>,
    pub loc_of: HashMap<NodeId, usize>,
    pub unknowns: Vec<UnknownExpr>,
    pub budget: u32,
}

pub fn statement_type(s: &NodeStmt) -> StatementType {
    match s {
        NodeStmt::Skip => StatementType::Skip,
        NodeStmt::Assign { .. } => StatementType::Assign,
        NodeStmt::Branch { .. } | NodeStmt::Assume(_) => StatementType::Assume,
        NodeStmt::Assert(_) => StatementType::Assert,
        NodeStmt::Call { .. } => StatementType::Call,
        NodeStmt::Return => StatementType::Return,
        NodeStmt::Goto => StatementType::Goto,
    }
}

/// Symbol-safe rendering of a location name.
pub fn sym(name: &str) -> String {
    name.replace('.', "_")
}

fn ghost_name(formal: &str, taken: &HashSet<String>) -> String {
    let mut g = format!("{formal}__entry");
    while taken.contains(&g) {
        g.push('_');
    }
    g
}

/// Assertion layout of every procedure. Ghost names avoid all program variables.
pub fn assertion_layouts(p: &Program) -> Vec<Layout> {
    let mut taken: HashSet<String> = p.all_variables().into_iter().map(String::from).collect();
    (0..p.procedures.len())
        .map(|i| {
            let mut vars = p.inscope(i);
            let n_scope = vars.len();
            let mut ghosts = Vec::new();
            for f in &p.procedures[i].formals {
                let g = ghost_name(f, &taken);
                taken.insert(g.clone());
                let fi = vars.iter().position(|v| v == f).expect("formal in scope");
                ghosts.push((fi, vars.len()));
                vars.push(g);
            }
            Layout {
                vars,
                n_scope,
                ghosts,
            }
        })
        .collect()
}

impl RepairSpace {
    pub fn new(p: &Program, cm: &CostModel, opts: &SpaceOptions) -> Result<Self, RepairError> {
        let graph = build_transition_graph(p)?;
        let cut = compute_cutset(&graph);
        Self::with_cutset(p, graph, cut, cm, opts)
    }

    pub fn with_cutset(
        p: &Program,
        graph: TransitionGraph,
        cut: CutSet,
        cm: &CostModel,
        opts: &SpaceOptions,
    ) -> Result<Self, RepairError> {
        let problems = validate_cutset(&graph, &cut);
        if !problems.is_empty() {
            return Err(RepairError::InvalidCutSet(problems.join("; ")));
        }
        let paths = enumerate_verification_paths(&graph, &cut, opts.path_cap)?;
        let layouts = assertion_layouts(p);
        let enabled = cm.enabled();
        let mut locations = Vec::new();
        let mut unknowns = Vec::new();
        let mut loc_of = HashMap::new();
        for node in graph.locations() {
            let n = &graph.nodes[node];
            let stmt = n.stmt().expect("location");
            let ty = statement_type(stmt);
            let options: Vec<LocOption> = applicable_schemas(ty, &enabled)
                .into_iter()
                .map(|u| LocOption {
                    schema: u,
                    cost: cm.cost(u, &n.name),
                })
                .filter(|o| o.cost <= cm.budget)
                .collect();
            let li = locations.len();
            let scope = layouts[n.proc].scope().to_vec();
            let mut new_unknown = |suffix: String, role: UnknownRole| {
                unknowns.push(UnknownExpr {
                    name: format!("f_{}{suffix}", sym(&n.name)),
                    location: li,
                    role,
                    scope: scope.clone(),
                });
                unknowns.len() - 1
            };
            let has = |u| options.iter().any(|o: &LocOption| o.schema == u);
            let guard = has(UpdateSchema::AssumeToAssume).then(|| new_unknown(String::new(), UnknownRole::Guard));
            let assigns = if has(UpdateSchema::AssignToAssign) {
                scope
                    .iter()
                    .map(|v| new_unknown(format!("_{v}"), UnknownRole::Assign(v.clone())))
                    .collect()
            } else {
                Vec::new()
            };
            let args = match stmt {
                NodeStmt::Call { args, .. } if has(UpdateSchema::CallToCall) => (0..args.len())
                    .map(|k| new_unknown(format!("_arg{k}"), UnknownRole::Arg(k)))
                    .collect(),
                _ => Vec::new(),
            };
            loc_of.insert(node, li);
            locations.push(Location {
                node,
                name: n.name.clone(),
                proc: n.proc,
                ty,
                options,
                guard,
                assigns,
                args,
            });
        }
        Ok(RepairSpace {
            program: p.clone(),
            graph,
            cut,
            paths,
            layouts,
            locations,
            loc_of,
            unknowns,
            budget: cm.budget,
        })
    }

    pub fn layout_of(&self, node: NodeId) -> &Layout {
        &self.layouts[self.graph.nodes[node].proc]
    }

    pub fn location_at(&self, node: NodeId) -> Option<&Location> {
        self.loc_of.get(&node).map(|&i| &self.locations[i])
    }

    /// Symbol of the assertion at a cut-point.
    pub fn assertion_name(&self, node: NodeId) -> String {
        format!("I_{}", sym(&self.graph.nodes[node].name))
    }

    pub fn selector_name(&self, loc: usize, u: UpdateSchema) -> String {
        format!("R_{}_{}", sym(&self.locations[loc].name), u.tag())
    }
}

/// Solver-independent solution of the repair problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairModel {
    /// Chosen schema per location (index into `RepairSpace::locations`).
    pub choice: Vec<UpdateSchema>,
    /// Truth table per unknown expression.
    pub tables: Vec<Vec<bool>>,
    /// Truth table per cut-point over its layout.
    pub assertions: BTreeMap<NodeId, Vec<bool>>,
}

impl RepairModel {
    pub fn total_cost(&self, space: &RepairSpace) -> u32 {
        space
            .locations
            .iter()
            .zip(&self.choice)
            .map(|(l, u)| l.options.iter().find(|o| o.schema == *u).map_or(0, |o| o.cost))
            .sum()
    }
}
