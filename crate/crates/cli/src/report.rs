//! JSON and text renderings of repair and concretization results.

use std::collections::BTreeMap;
use std::time::Duration;

use serde_json::{json, Value};

use bprepair::cfg::build_transition_graph;
use bprepair::concretize::{ConcreteReport, ConcreteSet};
use bprepair::lang::StatementType;
use bprepair::repair::{Attempt, RepairSolution, UpdateSchema};
use bprepair::Rational;

pub fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

pub fn attempt_json(a: &Attempt) -> Value {
    json!({
        "budget": a.budget,
        "repaired": a.repaired,
        "query_ms": ms(a.query_time),
        "solve_ms": ms(a.solve_time),
        "sat_vars": a.stats.vars,
        "sat_clauses": a.stats.clauses,
    })
}

/// Non-identity updates per source statement type, the `# Asg` / `# Asm` columns.
pub fn schema_counts(sol: &RepairSolution) -> (usize, usize, usize) {
    let of = |ty| {
        sol.update
            .values()
            .filter(|u| **u != UpdateSchema::Id && u.source() == Some(ty))
            .count()
    };
    (of(StatementType::Assign), of(StatementType::Assume), of(StatementType::Call))
}

/// Entry node of every procedure with its assertion and cumulative cost.
fn entries(sol: &RepairSolution) -> Vec<Value> {
    let Ok(g) = build_transition_graph(&sol.program) else { return Vec::new() };
    g.procs
        .iter()
        .map(|pg| {
            let name = &g.nodes[pg.entry].name;
            json!({
                "procedure": pg.name,
                "node": name,
                "assertion": sol.assertions.get(name).map(|e| e.to_string()),
                "cost": sol.boundary_costs.get(name),
            })
        })
        .collect()
}

pub fn solution_json(sol: &RepairSolution) -> Value {
    let (asg, asm, call) = schema_counts(sol);
    let mut per_schema: BTreeMap<&str, usize> = BTreeMap::new();
    for u in sol.update.values().filter(|u| **u != UpdateSchema::Id) {
        *per_schema.entry(u.name()).or_default() += 1;
    }
    json!({
        "budget": sol.budget,
        "total_cost": sol.total_cost,
        "counts": { "asg": asg, "asm": asm, "call": call, "per_schema": per_schema },
        "modified": sol.modified,
        "costs": sol.costs,
        "boundary_costs": sol.boundary_costs,
        "entries": entries(sol),
        "assertions": sol.assertions.iter().map(|(k, v)| (k.clone(), v.to_string())).collect::<BTreeMap<_, _>>(),
    })
}

pub fn diff_text(sol: &RepairSolution) -> String {
    sol.modified
        .iter()
        .map(|m| format!("{} [{}]\n- {}\n+ {}\n", m.location, m.schema, m.before, m.after))
        .collect()
}

pub fn solution_text(sol: &RepairSolution) -> String {
    let (asg, asm, call) = schema_counts(sol);
    let mut out = format!(
        "repaired at budget {}: total cost {}, # asg {asg}, # asm {asm}, # call {call}\n",
        sol.budget, sol.total_cost
    );
    for m in &sol.modified {
        out += &format!("  {}: {} -> {}  [{}]\n", m.location, m.before, m.after, m.schema);
    }
    out += "proof:\n";
    for (k, v) in &sol.assertions {
        out += &format!("  I[{k}] = {v}\n");
    }
    out
}

fn set_json(set: &ConcreteSet<Rational>) -> Value {
    match set {
        ConcreteSet::Found(v) => json!({ "status": "found", "statements": v.iter().map(|s| s.to_string()).collect::<Vec<_>>() }),
        ConcreteSet::Empty => json!({ "status": "empty" }),
        ConcreteSet::Unknown(why) => json!({ "status": "unknown", "reason": why }),
    }
}

pub fn concretization_json(rep: &ConcreteReport<Rational>) -> Value {
    json!({
        "changes": rep.changes.iter().map(|c| json!({
            "location": c.location,
            "schema": c.schema,
            "boolean": c.boolean,
            "templated": c.templated,
            "result": set_json(&c.result),
        })).collect::<Vec<_>>(),
        "assertions": rep.assertions.iter().map(|(k, v)| (k.clone(), v.to_string())).collect::<BTreeMap<_, _>>(),
    })
}

pub fn concretization_text(rep: &ConcreteReport<Rational>) -> String {
    let mut out = String::from("concretization:\n");
    for c in &rep.changes {
        let result = match &c.result {
            ConcreteSet::Found(v) => v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" | "),
            ConcreteSet::Empty => "(no concrete statement)".to_string(),
            ConcreteSet::Unknown(why) => format!("(undecided: {why})"),
        };
        out += &format!("  {}: {} => {result}\n", c.location, c.boolean);
    }
    for (k, v) in &rep.assertions {
        out += &format!("  γ(I[{k}]) = {v}\n");
    }
    out
}
