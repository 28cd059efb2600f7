//! Lifting Boolean repairs back to linear-arithmetic statements.
//!
//! A [`PredicateMap`] gives the concrete predicate each Boolean variable
//! abstracts. Guards, assumptions and call arguments are mapped through it
//! directly; assignments, and anything constrained by a [`Template`], are
//! solved for as `∃ params ∀ state` queries with
//! [`exists_forall`](crate::arith::exists_forall).

mod simplify;
mod template;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{parse_formula, ArithParseError, Atom, EfOptions, Formula, LinExpr, Scalar, Sort};
use crate::lang::{BinOp, BoolExpr, Program, Statement};
use crate::repair::{RepairSolution, UpdateSchema};

pub use simplify::simplify;
pub use template::{
    concretize_assign, concretize_assign_templated, concretize_assume_templated, concretize_call_templated,
    emit_assign_query, emit_guard_query, Template, TemplateSpec,
};

#[derive(Debug, Error)]
pub enum ConcretizeError {
    #[error("predicate map: {0}")]
    Json(#[from] serde_json::Error),
    #[error("predicate for '{var}': {source}")]
    Predicate { var: String, source: ArithParseError },
    #[error("predicate for '{pred}' mentions undeclared variable '{var}'")]
    Undeclared { pred: String, var: String },
    #[error("Boolean variable '{0}' has no predicate")]
    Unmapped(String),
    #[error("nondeterministic expression '{0}' has no concrete counterpart")]
    Nondeterministic(String),
    #[error("cannot concretize {what} this way")]
    Unsupported { what: String },
    #[error("no statement at location '{0}'")]
    UnknownLocation(String),
    #[error("template: {0}")]
    Template(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    pub sort: Sort,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PredicateMapFile {
    variables: Vec<VarDecl>,
    predicates: BTreeMap<String, String>,
}

/// γ: the concrete predicate behind each Boolean variable.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateMap<S> {
    pub sorts: BTreeMap<String, Sort>,
    pub predicates: BTreeMap<String, Formula<S>>,
}

impl<S: Scalar> PredicateMap<S> {
    pub fn new(vars: &[(&str, Sort)], predicates: &[(&str, &str)]) -> Result<Self, ConcretizeError> {
        let file = PredicateMapFile {
            variables: vars
                .iter()
                .map(|(n, s)| VarDecl {
                    name: n.to_string(),
                    sort: *s,
                })
                .collect(),
            predicates: predicates.iter().map(|(b, p)| (b.to_string(), p.to_string())).collect(),
        };
        Self::from_file(file)
    }

    /// `{"variables": [{"name": "x", "sort": "int"}], "predicates": {"b0": "x <= 1"}}`
    pub fn from_json(text: &str) -> Result<Self, ConcretizeError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    fn from_file(file: PredicateMapFile) -> Result<Self, ConcretizeError> {
        let sorts: BTreeMap<String, Sort> = file.variables.into_iter().map(|d| (d.name, d.sort)).collect();
        let mut predicates = BTreeMap::new();
        for (b, text) in file.predicates {
            let f: Formula<S> = parse_formula(&text).map_err(|source| ConcretizeError::Predicate {
                var: b.clone(),
                source,
            })?;
            if let Some(v) = f.vars().into_iter().find(|v| !sorts.contains_key(v)) {
                return Err(ConcretizeError::Undeclared { pred: b, var: v });
            }
            predicates.insert(b, f);
        }
        Ok(PredicateMap { sorts, predicates })
    }

    /// Every Boolean variable of `p` must be mapped.
    pub fn check_program(&self, p: &Program) -> Result<(), ConcretizeError> {
        let mut names: Vec<&String> = p.globals.iter().collect();
        for proc in &p.procedures {
            names.extend(proc.formals.iter().chain(&proc.locals));
        }
        match names.into_iter().find(|v| !self.predicates.contains_key(*v)) {
            Some(v) => Err(ConcretizeError::Unmapped(v.clone())),
            None => Ok(()),
        }
    }

    pub fn predicate(&self, b: &str) -> Result<&Formula<S>, ConcretizeError> {
        self.predicates.get(b).ok_or_else(|| ConcretizeError::Unmapped(b.to_string()))
    }

    /// γ extended homomorphically to deterministic Boolean expressions.
    pub fn gamma(&self, e: &BoolExpr) -> Result<Formula<S>, ConcretizeError> {
        Ok(match e {
            BoolExpr::Const(b) => Formula::Const(*b),
            BoolExpr::Var(v) => self.predicate(v)?.clone(),
            BoolExpr::Not(a) => Formula::not(self.gamma(a)?),
            BoolExpr::Binary(op, a, b) => {
                let (a, b) = (self.gamma(a)?, self.gamma(b)?);
                match op {
                    BinOp::And => Formula::and([a, b]),
                    BinOp::Or => Formula::or([a, b]),
                    BinOp::Implies => Formula::implies(a, b),
                    BinOp::Eq => Formula::iff(a, b),
                    BinOp::Ne => Formula::not(Formula::iff(a, b)),
                }
            }
            BoolExpr::Star | BoolExpr::Choose(..) => {
                return Err(ConcretizeError::Nondeterministic(crate::lang::expr_to_string(e)))
            }
        })
    }

    /// Simplified γ(e).
    pub fn concretize_expr(&self, e: &BoolExpr) -> Result<Formula<S>, ConcretizeError> {
        Ok(simplify(&self.gamma(e)?, &self.sorts))
    }
}

/// A concrete condition: a simplified predicate, or an instantiated template
/// atom kept in its `c0 + Σ c_p*v_p <= 0` shape.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition<S> {
    Pred(Formula<S>),
    Template(Atom<S>),
}

impl<S: Scalar> Condition<S> {
    pub fn formula(&self) -> Formula<S> {
        match self {
            Condition::Pred(f) => f.clone(),
            Condition::Template(a) => Formula::Atom(a.clone()),
        }
    }
}

impl<S: Scalar> fmt::Display for Condition<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Pred(p) => write!(f, "{p}"),
            Condition::Template(a) => f.write_str(&a.raw()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConcreteStmt<S> {
    Skip,
    Assume(Condition<S>),
    /// Guard of a branch (if, while, or conditional jump).
    Guard(Condition<S>),
    Assign {
        targets: Vec<String>,
        values: Vec<LinExpr<S>>,
    },
    Call {
        callee: String,
        args: Vec<Condition<S>>,
    },
}

impl<S: Scalar> fmt::Display for ConcreteStmt<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcreteStmt::Skip => write!(f, "skip"),
            ConcreteStmt::Assume(c) => write!(f, "assume({c})"),
            ConcreteStmt::Guard(c) => write!(f, "if ({c})"),
            ConcreteStmt::Assign { targets, values } => {
                let vals: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "{} := {}", targets.join(", "), vals.join(", "))
            }
            ConcreteStmt::Call { callee, args } => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "call {callee}({})", args.join(", "))
            }
        }
    }
}

/// Γ(s): possibly empty, or undecided within the solver limits.
#[derive(Debug, Clone, PartialEq)]
pub enum ConcreteSet<S> {
    Found(Vec<ConcreteStmt<S>>),
    Empty,
    Unknown(String),
}

impl<S> ConcreteSet<S> {
    pub fn first(&self) -> Option<&ConcreteStmt<S>> {
        match self {
            ConcreteSet::Found(v) => v.first(),
            _ => None,
        }
    }
}

fn guard_of(stmt: &Statement) -> Option<&BoolExpr> {
    match stmt {
        Statement::If { guard, .. } | Statement::While { guard, .. } | Statement::IfGoto { guard, .. } => {
            Some(guard)
        }
        _ => None,
    }
}

/// Γ for skip, assume, branch guards and calls: map every expression through γ.
pub fn concretize_simple<S: Scalar>(stmt: &Statement, gm: &PredicateMap<S>) -> Result<ConcreteStmt<S>, ConcretizeError> {
    Ok(match stmt {
        Statement::Skip => ConcreteStmt::Skip,
        Statement::Assume(g) => ConcreteStmt::Assume(Condition::Pred(gm.concretize_expr(g)?)),
        Statement::Call { callee, args } => ConcreteStmt::Call {
            callee: callee.clone(),
            args: args
                .iter()
                .map(|a| gm.concretize_expr(a).map(Condition::Pred))
                .collect::<Result<_, _>>()?,
        },
        s => match guard_of(s) {
            Some(BoolExpr::Star) => return Err(ConcretizeError::Nondeterministic("*".into())),
            Some(g) => ConcreteStmt::Guard(Condition::Pred(gm.concretize_expr(g)?)),
            None => {
                return Err(ConcretizeError::Unsupported {
                    what: crate::lang::stmt_summary(s),
                })
            }
        },
    })
}

/// γ(I) at every cut-point, simplified.
pub fn concretize_proof<S: Scalar>(
    assertions: &BTreeMap<String, BoolExpr>,
    gm: &PredicateMap<S>,
) -> Result<BTreeMap<String, Formula<S>>, ConcretizeError> {
    assertions
        .iter()
        .map(|(k, e)| Ok((k.clone(), gm.concretize_expr(e)?)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ConcretizeOptions<S> {
    pub ef: EfOptions,
    /// Members of Γ to enumerate per statement.
    pub models: usize,
    /// Template for every modified location, unless overridden in `per_location`.
    pub template: Option<Template<S>>,
    pub per_location: BTreeMap<String, Template<S>>,
}

impl<S> Default for ConcretizeOptions<S> {
    fn default() -> Self {
        ConcretizeOptions {
            ef: EfOptions::default(),
            models: 1,
            template: None,
            per_location: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConcreteChange<S> {
    pub location: String,
    pub schema: UpdateSchema,
    /// The repaired Boolean statement.
    pub boolean: String,
    pub templated: bool,
    pub result: ConcreteSet<S>,
}

#[derive(Debug, Clone)]
pub struct ConcreteReport<S> {
    pub changes: Vec<ConcreteChange<S>>,
    pub assertions: BTreeMap<String, Formula<S>>,
}

/// Find a statement by qualified location name (`label`, or `proc.label`
/// outside `main`).
pub fn statement_at<'p>(p: &'p Program, location: &str) -> Option<&'p Statement> {
    let (proc, label) = match location.split_once('.') {
        Some((proc, label)) => (p.procedures.iter().find(|q| q.name == proc)?, label),
        None => (p.main(), location),
    };
    proc.statements()
        .into_iter()
        .find(|s| s.label.as_str() == label)
        .map(|s| &s.stmt)
}

/// Concretize one repaired statement, with or without a template.
pub fn concretize_statement<S: Scalar>(
    stmt: &Statement,
    gm: &PredicateMap<S>,
    template: Option<&Template<S>>,
    opts: &ConcretizeOptions<S>,
) -> Result<ConcreteSet<S>, ConcretizeError> {
    match (stmt, template) {
        (Statement::Assign { targets, values }, None) => concretize_assign(targets, values, gm, opts),
        (Statement::Assign { targets, values }, Some(t)) => {
            concretize_assign_templated(targets, values, gm, t, opts)
        }
        (Statement::Assume(g), Some(t)) => concretize_assume_templated(g, gm, t, opts, ConcreteStmt::Assume),
        (Statement::Call { callee, args }, Some(t)) => concretize_call_templated(callee, args, gm, t, opts),
        (s, Some(t)) if guard_of(s).is_some() => {
            concretize_assume_templated(guard_of(s).unwrap(), gm, t, opts, ConcreteStmt::Guard)
        }
        (s, _) => Ok(ConcreteSet::Found(vec![concretize_simple(s, gm)?])),
    }
}

/// Concretize every modified statement of a repair and its proof. Statements
/// are independent queries and run on separate threads.
pub fn concretize_solution<S: Scalar + Send + Sync>(
    sol: &RepairSolution,
    gm: &PredicateMap<S>,
    opts: &ConcretizeOptions<S>,
) -> Result<ConcreteReport<S>, ConcretizeError> {
    gm.check_program(&sol.program)?;
    let jobs: Vec<(&crate::repair::ModifiedStatement, &Statement, Option<&Template<S>>)> = sol
        .modified
        .iter()
        .map(|m| {
            let stmt = statement_at(&sol.program, &m.location)
                .ok_or_else(|| ConcretizeError::UnknownLocation(m.location.clone()))?;
            let t = opts.per_location.get(&m.location).or(opts.template.as_ref());
            Ok((m, stmt, t))
        })
        .collect::<Result<_, ConcretizeError>>()?;
    let results: Vec<Result<ConcreteSet<S>, ConcretizeError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(_, stmt, t)| scope.spawn(move || concretize_statement(stmt, gm, *t, opts)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("concretization job panicked")).collect()
    });
    let mut changes = Vec::new();
    for ((m, _, t), r) in jobs.iter().zip(results) {
        changes.push(ConcreteChange {
            location: m.location.clone(),
            schema: m.schema,
            boolean: m.after.clone(),
            templated: t.is_some(),
            result: r?,
        });
    }
    Ok(ConcreteReport {
        changes,
        assertions: concretize_proof(&sol.assertions, gm)?,
    })
}
