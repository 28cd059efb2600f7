use std::collections::BTreeMap;

use serde::Serialize;

use crate::lang::{stmt_summary, BoolExpr, Label, Program, Statement};

use super::schema::UpdateSchema;
use super::space::{RepairModel, RepairSpace, UnknownRole};
use super::synth::synthesize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModifiedStatement {
    pub location: String,
    pub schema: UpdateSchema,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocationCost {
    pub location: String,
    pub schema: UpdateSchema,
    pub cost: u32,
    /// Cost of the updates textually before this location in its procedure.
    pub cumulative: u32,
}

/// A repaired program together with its proof and cost bookkeeping.
#[derive(Debug, Clone)]
pub struct RepairSolution {
    pub program: Program,
    /// Update chosen at every location, keyed by qualified location name.
    pub update: BTreeMap<String, UpdateSchema>,
    pub modified: Vec<ModifiedStatement>,
    /// Inductive assertion per cut-point, keyed by node name.
    pub assertions: BTreeMap<String, BoolExpr>,
    pub costs: Vec<LocationCost>,
    /// Cumulative cost at each procedure's entry and exit; the exit of `main`
    /// carries the total over all procedures.
    pub boundary_costs: BTreeMap<String, u32>,
    pub total_cost: u32,
    pub budget: u32,
    pub model: RepairModel,
}

impl RepairSolution {
    pub fn count(&self, schema: UpdateSchema) -> usize {
        self.update.values().filter(|&&u| u == schema).count()
    }

    /// Number of non-identity updates.
    pub fn changes(&self) -> usize {
        self.update.values().filter(|&&u| u != UpdateSchema::Id).count()
    }
}

fn table_expr(space: &RepairSpace, model: &RepairModel, unknown: usize) -> BoolExpr {
    synthesize(&model.tables[unknown], &space.unknowns[unknown].scope)
}

/// Rewrite every location whose update is not `id`.
pub fn extract_program(space: &RepairSpace, model: &RepairModel) -> Program {
    let mut p = space.program.clone();
    for (li, loc) in space.locations.iter().enumerate() {
        let u = model.choice[li];
        if u == UpdateSchema::Id {
            continue;
        }
        let label: Label = space.graph.nodes[loc.node].label().unwrap().clone();
        let stmt = &mut p.procedures[loc.proc]
            .find_mut(&label)
            .expect("location exists")
            .stmt;
        rewrite(space, model, li, u, stmt);
    }
    p
}

fn rewrite(space: &RepairSpace, model: &RepairModel, li: usize, u: UpdateSchema, stmt: &mut Statement) {
    let loc = &space.locations[li];
    match u {
        UpdateSchema::Id => {}
        UpdateSchema::AssignToSkip | UpdateSchema::CallToSkip => *stmt = Statement::Skip,
        UpdateSchema::AssumeToSkip => match stmt {
            Statement::Assume(_) => *stmt = Statement::Skip,
            Statement::If { guard, .. }
            | Statement::IfGoto { guard, .. }
            | Statement::While { guard, .. } => *guard = BoolExpr::Star,
            _ => unreachable!(),
        },
        UpdateSchema::AssumeToAssume => {
            let e = table_expr(space, model, loc.guard.unwrap());
            match stmt {
                Statement::Assume(g) => *g = e,
                Statement::If { guard, .. }
                | Statement::IfGoto { guard, .. }
                | Statement::While { guard, .. } => *guard = e,
                _ => unreachable!(),
            }
        }
        UpdateSchema::AssignToAssign => {
            let mut targets = Vec::new();
            let mut values = Vec::new();
            for &k in &loc.assigns {
                let UnknownRole::Assign(v) = &space.unknowns[k].role else { unreachable!() };
                let e = table_expr(space, model, k);
                if e != BoolExpr::var(v.clone()) {
                    targets.push(v.clone());
                    values.push(e);
                }
            }
            if targets.is_empty() {
                // Keep the statement an assignment even when it changes nothing.
                let v = space.layouts[loc.proc].vars[0].clone();
                targets.push(v.clone());
                values.push(BoolExpr::var(v));
            }
            *stmt = Statement::Assign { targets, values };
        }
        UpdateSchema::CallToCall => {
            let Statement::Call { args, .. } = stmt else { unreachable!() };
            *args = loc.args.iter().map(|&k| table_expr(space, model, k)).collect();
        }
    }
}

/// Assemble the full solution report from a model.
pub fn build_solution(space: &RepairSpace, model: RepairModel) -> RepairSolution {
    let program = extract_program(space, &model);
    let mut update = BTreeMap::new();
    let mut modified = Vec::new();
    let mut costs = Vec::new();
    let mut proc_running = vec![0u32; space.program.procedures.len()];
    for (li, loc) in space.locations.iter().enumerate() {
        let u = model.choice[li];
        update.insert(loc.name.clone(), u);
        let cost = loc.options.iter().find(|o| o.schema == u).map_or(0, |o| o.cost);
        costs.push(LocationCost {
            location: loc.name.clone(),
            schema: u,
            cost,
            cumulative: proc_running[loc.proc],
        });
        proc_running[loc.proc] += cost;
        if u != UpdateSchema::Id {
            let label = space.graph.nodes[loc.node].label().unwrap();
            let before = stmt_summary(&space.program.procedures[loc.proc].find(label).unwrap().stmt);
            let after = stmt_summary(&program.procedures[loc.proc].find(label).unwrap().stmt);
            modified.push(ModifiedStatement {
                location: loc.name.clone(),
                schema: u,
                before,
                after,
            });
        }
    }
    let total_cost: u32 = proc_running.iter().sum();
    let mut boundary_costs = BTreeMap::new();
    for (i, pg) in space.graph.procs.iter().enumerate() {
        boundary_costs.insert(space.graph.nodes[pg.entry].name.clone(), 0);
        let exit = if i == 0 { total_cost } else { proc_running[i] };
        boundary_costs.insert(space.graph.nodes[pg.exit].name.clone(), exit);
    }
    let assertions = model
        .assertions
        .iter()
        .map(|(&k, table)| {
            let layout = space.layout_of(k);
            (space.graph.nodes[k].name.clone(), synthesize(table, &layout.vars))
        })
        .collect();
    RepairSolution {
        program,
        update,
        modified,
        assertions,
        costs,
        boundary_costs,
        total_cost,
        budget: space.budget,
        model,
    }
}
