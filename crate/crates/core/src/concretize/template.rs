//! Concretization as `∃ params ∀ state` queries.
//!
//! A concrete assignment must make every assigned predicate take the value of
//! its abstract right-hand side, and leave every other predicate over the
//! assigned variables unchanged. Guards under a template must be equivalent
//! to one linear atom `c0 + Σ c_p*v_p <= 0`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Condition, ConcreteSet, ConcreteStmt, ConcretizeError, ConcretizeOptions, PredicateMap};
use crate::arith::{
    exists_forall, parse_term, smt_scalar, Atom, EfMatrix, EfResult, Formula, LinExpr, Model, Rel, Scalar, Sort,
};
use crate::lang::BoolExpr;
use crate::repair::smtlib::symbol;

/// Shape of a synthesized expression `c0 + Σ c_p*v_p`, with some coefficients
/// possibly fixed in advance.
#[derive(Debug, Clone, PartialEq)]
pub struct Template<S> {
    /// Variables the expression may mention; `None` means every relevant one.
    pub vars: Option<Vec<String>>,
    /// Coefficients fixed in advance, by variable.
    pub fixed: BTreeMap<String, S>,
    /// Fixed constant term.
    pub constant: Option<S>,
    /// Integer parameters only. Expressions assigned to integer variables
    /// always use integer parameters.
    pub integer: bool,
}

/// Serialized form of a [`Template`], with numbers as text:
/// `{"vars": ["x"], "fixed": {"x": "-1"}, "integer": true}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TemplateSpec {
    #[serde(default)]
    pub vars: Option<Vec<String>>,
    #[serde(default)]
    pub fixed: BTreeMap<String, String>,
    #[serde(default)]
    pub constant: Option<String>,
    #[serde(default)]
    pub integer: bool,
}

impl<S: Scalar> Template<S> {
    pub fn linear() -> Self {
        Template {
            vars: None,
            fixed: BTreeMap::new(),
            constant: None,
            integer: false,
        }
    }

    pub fn constant() -> Self {
        Template {
            vars: Some(Vec::new()),
            ..Self::linear()
        }
    }

    pub fn integer(mut self) -> Self {
        self.integer = true;
        self
    }

    /// `linear`, `linear-int`, `const` or `const-int`.
    pub fn named(name: &str) -> Option<Self> {
        Some(match name {
            "linear" => Self::linear(),
            "linear-int" => Self::linear().integer(),
            "const" => Self::constant(),
            "const-int" => Self::constant().integer(),
            _ => return None,
        })
    }

    pub fn from_spec(spec: &TemplateSpec) -> Result<Self, ConcretizeError> {
        let num = |s: &str| -> Result<S, ConcretizeError> {
            let t: LinExpr<S> = parse_term(s).map_err(|e| ConcretizeError::Template(e.to_string()))?;
            if t.is_constant() {
                Ok(t.constant)
            } else {
                Err(ConcretizeError::Template(format!("'{s}' is not a number")))
            }
        };
        Ok(Template {
            vars: spec.vars.clone(),
            fixed: spec
                .fixed
                .iter()
                .map(|(v, c)| Ok((v.clone(), num(c)?)))
                .collect::<Result<_, ConcretizeError>>()?,
            constant: spec.constant.as_deref().map(num).transpose()?,
            integer: spec.integer,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Coef<S> {
    Param(String),
    Fixed(S),
}

/// A template instantiated for one expression.
#[derive(Debug, Clone)]
struct Shape<S> {
    constant: Coef<S>,
    coeffs: Vec<(String, Coef<S>)>,
}

impl<S: Scalar> Shape<S> {
    fn new(t: &Template<S>, index: usize, default_vars: &[String]) -> Self {
        let mut vars: BTreeSet<String> = t.vars.clone().unwrap_or_else(|| default_vars.to_vec()).into_iter().collect();
        vars.extend(t.fixed.keys().cloned());
        let coeffs = vars
            .into_iter()
            .map(|v| {
                let c = match t.fixed.get(&v) {
                    Some(k) => Coef::Fixed(k.clone()),
                    None => Coef::Param(format!("$c{index}.{v}")),
                };
                (v, c)
            })
            .collect();
        let constant = match &t.constant {
            Some(k) => Coef::Fixed(k.clone()),
            None => Coef::Param(format!("$c{index}.0")),
        };
        Shape { constant, coeffs }
    }

    fn params(&self) -> Vec<String> {
        std::iter::once(&self.constant)
            .chain(self.coeffs.iter().map(|(_, c)| c))
            .filter_map(|c| match c {
                Coef::Param(p) => Some(p.clone()),
                Coef::Fixed(_) => None,
            })
            .collect()
    }

    fn coef_at(c: &Coef<S>, scale: S) -> LinExpr<S> {
        match c {
            Coef::Param(p) => LinExpr::term(scale, p.clone()),
            Coef::Fixed(k) => LinExpr::constant(k.clone() * scale),
        }
    }

    /// The expression at a concrete state, as a term over the parameters.
    fn at_point(&self, point: &Model<S>) -> LinExpr<S> {
        let mut e = Self::coef_at(&self.constant, S::one());
        for (v, c) in &self.coeffs {
            let x = point.get(v).cloned().unwrap_or_else(S::zero);
            e = e.add(&Self::coef_at(c, x));
        }
        e
    }

    /// The expression for fixed parameters, as a term over the state.
    fn at_params(&self, params: &Model<S>) -> LinExpr<S> {
        let value = |c: &Coef<S>| match c {
            Coef::Param(p) => params.get(p).cloned().unwrap_or_else(S::zero),
            Coef::Fixed(k) => k.clone(),
        };
        let mut e = LinExpr::constant(value(&self.constant));
        for (v, c) in &self.coeffs {
            e = e.add(&LinExpr::term(value(c), v.clone()));
        }
        e
    }

    fn smt(&self) -> String {
        let coef = |c: &Coef<S>| match c {
            Coef::Param(p) => symbol(p),
            Coef::Fixed(k) => smt_scalar(k),
        };
        let mut parts = vec![coef(&self.constant)];
        for (v, c) in &self.coeffs {
            parts.push(format!("(* {} {})", coef(c), symbol(v)));
        }
        format!("(+ {})", parts.join(" "))
    }
}

/// What a concrete assignment must achieve.
struct AssignQuery<S> {
    /// (predicate after the assignment, its required value before it)
    eqs: Vec<(Formula<S>, Formula<S>)>,
    /// Concrete variables the assignment may change.
    touched: Vec<String>,
}

impl<S: Scalar> AssignQuery<S> {
    fn new(targets: &[String], values: &[BoolExpr], gm: &PredicateMap<S>) -> Result<Self, ConcretizeError> {
        let mut eqs = Vec::new();
        let mut touched = BTreeSet::new();
        for (b, e) in targets.iter().zip(values) {
            let post = gm.predicate(b)?.clone();
            touched.extend(post.vars());
            eqs.push((post, gm.gamma(e)?));
        }
        // Predicates of unassigned variables over changed state must keep their value.
        for (b, pred) in &gm.predicates {
            if !targets.contains(b) && pred.vars().iter().any(|v| touched.contains(v)) {
                eqs.push((pred.clone(), pred.clone()));
            }
        }
        Ok(AssignQuery {
            eqs,
            touched: touched.into_iter().collect(),
        })
    }

    fn univ(&self, gm: &PredicateMap<S>) -> BTreeMap<String, Sort> {
        let mut vars = BTreeSet::new();
        for (a, b) in &self.eqs {
            vars.extend(a.vars());
            vars.extend(b.vars());
        }
        vars.into_iter().map(|v| (v.clone(), sort(gm, &v))).collect()
    }
}

fn sort<S>(gm: &PredicateMap<S>, v: &str) -> Sort {
    gm.sorts.get(v).copied().unwrap_or(Sort::Real)
}

struct AssignMatrix<'a, S> {
    eqs: &'a [(Formula<S>, Formula<S>)],
    shapes: &'a BTreeMap<String, Shape<S>>,
}

impl<S: Scalar> EfMatrix<S> for AssignMatrix<'_, S> {
    fn at_point(&self, point: &Model<S>) -> Formula<S> {
        let sub = self.shapes.iter().map(|(v, h)| (v.clone(), h.at_point(point))).collect();
        Formula::and(
            self.eqs
                .iter()
                .map(|(post, pre)| Formula::iff(post.substitute(&sub).bind(point), pre.bind(point)))
                .collect::<Vec<_>>(),
        )
    }

    fn at_params(&self, params: &Model<S>) -> Formula<S> {
        let sub = self.shapes.iter().map(|(v, h)| (v.clone(), h.at_params(params))).collect();
        Formula::and(
            self.eqs
                .iter()
                .map(|(post, pre)| Formula::iff(post.substitute(&sub), pre.clone()))
                .collect::<Vec<_>>(),
        )
    }
}

struct GuardMatrix<'a, S> {
    target: &'a Formula<S>,
    shape: &'a Shape<S>,
}

impl<S: Scalar> EfMatrix<S> for GuardMatrix<'_, S> {
    fn at_point(&self, point: &Model<S>) -> Formula<S> {
        Formula::iff(Formula::atom(self.shape.at_point(point), Rel::Le), self.target.bind(point))
    }

    fn at_params(&self, params: &Model<S>) -> Formula<S> {
        Formula::iff(Formula::atom(self.shape.at_params(params), Rel::Le), self.target.clone())
    }
}

/// Run the ∃∀ loop, blocking earlier answers to enumerate up to `models` of them.
fn solve_models<S: Scalar>(
    params: &BTreeMap<String, Sort>,
    univ: &BTreeMap<String, Sort>,
    matrix: &impl EfMatrix<S>,
    opts: &ConcretizeOptions<S>,
) -> Result<Vec<Model<S>>, String> {
    let mut found: Vec<Model<S>> = Vec::new();
    while found.len() < opts.models.max(1) {
        match exists_forall(params, univ, matrix, &found, &opts.ef) {
            EfResult::Found { params: m, .. } => {
                let repeat = found.contains(&m);
                found.push(m);
                if repeat || params.is_empty() {
                    break;
                }
            }
            EfResult::Empty { .. } => break,
            EfResult::Unknown(why) if found.is_empty() => return Err(why),
            EfResult::Unknown(_) => break,
        }
    }
    found.dedup();
    Ok(found)
}

fn shapes_for<S: Scalar>(
    q: &AssignQuery<S>,
    gm: &PredicateMap<S>,
    t: &Template<S>,
) -> (BTreeMap<String, Shape<S>>, BTreeMap<String, Sort>) {
    let univ = q.univ(gm);
    let mut shapes = BTreeMap::new();
    let mut params = BTreeMap::new();
    for (i, v) in q.touched.iter().enumerate() {
        // Integer targets only read integer variables, through integer parameters.
        let int = sort(gm, v) == Sort::Int;
        let vars: Vec<String> = univ
            .iter()
            .filter(|(_, s)| !int || **s == Sort::Int)
            .map(|(u, _)| u.clone())
            .collect();
        let shape = Shape::new(t, i, &vars);
        let psort = if int || t.integer { Sort::Int } else { Sort::Real };
        for p in shape.params() {
            params.insert(p, psort);
        }
        shapes.insert(v.clone(), shape);
    }
    (shapes, params)
}

fn assign_stmt<S: Scalar>(shapes: &BTreeMap<String, Shape<S>>, m: &Model<S>) -> ConcreteStmt<S> {
    let (mut targets, mut values) = (Vec::new(), Vec::new());
    for (v, h) in shapes {
        let e = h.at_params(m);
        // v := v changes nothing
        if e != LinExpr::var(v.clone()) {
            targets.push(v.clone());
            values.push(e);
        }
    }
    if targets.is_empty() {
        ConcreteStmt::Skip
    } else {
        ConcreteStmt::Assign { targets, values }
    }
}

fn solve_assign<S: Scalar>(
    q: &AssignQuery<S>,
    gm: &PredicateMap<S>,
    t: &Template<S>,
    opts: &ConcretizeOptions<S>,
) -> ConcreteSet<S> {
    let (shapes, params) = shapes_for(q, gm, t);
    let matrix = AssignMatrix {
        eqs: &q.eqs,
        shapes: &shapes,
    };
    match solve_models(&params, &q.univ(gm), &matrix, opts) {
        Ok(ms) if ms.is_empty() => ConcreteSet::Empty,
        Ok(ms) => ConcreteSet::Found(ms.iter().map(|m| assign_stmt(&shapes, m)).collect()),
        Err(why) => ConcreteSet::Unknown(why),
    }
}

/// Γ of `targets := values` with no template: try leaving the state alone,
/// then constant right-hand sides, then linear ones.
pub fn concretize_assign<S: Scalar>(
    targets: &[String],
    values: &[BoolExpr],
    gm: &PredicateMap<S>,
    opts: &ConcretizeOptions<S>,
) -> Result<ConcreteSet<S>, ConcretizeError> {
    let q = AssignQuery::new(targets, values, gm)?;
    let identity = Template {
        vars: Some(Vec::new()),
        fixed: BTreeMap::new(),
        constant: Some(S::zero()),
        integer: false,
    };
    let mut unknown = None;
    for (i, t) in [Template::constant(), Template::linear()].into_iter().enumerate() {
        // The identity rung: each touched variable keeps its own value.
        if i == 0 {
            let mut keep = identity.clone();
            let shapes: BTreeMap<String, Shape<S>> = q
                .touched
                .iter()
                .map(|v| {
                    keep.fixed = [(v.clone(), S::one())].into();
                    (v.clone(), Shape::new(&keep, 0, &[]))
                })
                .collect();
            let matrix = AssignMatrix {
                eqs: &q.eqs,
                shapes: &shapes,
            };
            if let Ok(ms) = solve_models(&BTreeMap::new(), &q.univ(gm), &matrix, opts) {
                if !ms.is_empty() {
                    return Ok(ConcreteSet::Found(vec![ConcreteStmt::Skip]));
                }
            }
        }
        match solve_assign(&q, gm, &t, opts) {
            ConcreteSet::Empty => {}
            ConcreteSet::Unknown(why) => unknown = Some(why),
            found => return Ok(found),
        }
    }
    Ok(match unknown {
        Some(why) => ConcreteSet::Unknown(why),
        None => ConcreteSet::Empty,
    })
}

/// Γ of `targets := values` with every right-hand side drawn from `t`.
pub fn concretize_assign_templated<S: Scalar>(
    targets: &[String],
    values: &[BoolExpr],
    gm: &PredicateMap<S>,
    t: &Template<S>,
    opts: &ConcretizeOptions<S>,
) -> Result<ConcreteSet<S>, ConcretizeError> {
    let q = AssignQuery::new(targets, values, gm)?;
    Ok(solve_assign(&q, gm, t, opts))
}

fn guard_shape<S: Scalar>(
    target: &Formula<S>,
    gm: &PredicateMap<S>,
    t: &Template<S>,
    index: usize,
) -> (Shape<S>, BTreeMap<String, Sort>, BTreeMap<String, Sort>) {
    // A variable the predicate does not mention cannot occur in an equivalent atom.
    let vars: Vec<String> = target.vars().into_iter().collect();
    let shape = Shape::new(t, index, &vars);
    let psort = if t.integer { Sort::Int } else { Sort::Real };
    let params = shape.params().into_iter().map(|p| (p, psort)).collect();
    let mut univ: BTreeMap<String, Sort> = vars.iter().map(|v| (v.clone(), sort(gm, v))).collect();
    for (v, _) in &shape.coeffs {
        univ.insert(v.clone(), sort(gm, v));
    }
    (shape, params, univ)
}

fn guard_atoms<S: Scalar>(
    g: &BoolExpr,
    gm: &PredicateMap<S>,
    t: &Template<S>,
    opts: &ConcretizeOptions<S>,
    index: usize,
) -> Result<Result<Vec<Atom<S>>, String>, ConcretizeError> {
    let target = gm.gamma(g)?;
    let (shape, params, univ) = guard_shape(&target, gm, t, index);
    let matrix = GuardMatrix {
        target: &target,
        shape: &shape,
    };
    Ok(solve_models(&params, &univ, &matrix, opts).map(|ms| {
        ms.iter()
            .map(|m| Atom {
                expr: shape.at_params(m),
                rel: Rel::Le,
            })
            .collect()
    }))
}

/// Γ of `assume(g)` (or a branch guard, via `wrap`) as one template atom.
pub fn concretize_assume_templated<S: Scalar>(
    g: &BoolExpr,
    gm: &PredicateMap<S>,
    t: &Template<S>,
    opts: &ConcretizeOptions<S>,
    wrap: fn(Condition<S>) -> ConcreteStmt<S>,
) -> Result<ConcreteSet<S>, ConcretizeError> {
    Ok(match guard_atoms(g, gm, t, opts, 0)? {
        Ok(atoms) if atoms.is_empty() => ConcreteSet::Empty,
        Ok(atoms) => ConcreteSet::Found(atoms.into_iter().map(|a| wrap(Condition::Template(a))).collect()),
        Err(why) => ConcreteSet::Unknown(why),
    })
}

/// Γ of a call with every argument a template atom; empty if any argument is.
pub fn concretize_call_templated<S: Scalar>(
    callee: &str,
    args: &[BoolExpr],
    gm: &PredicateMap<S>,
    t: &Template<S>,
    opts: &ConcretizeOptions<S>,
) -> Result<ConcreteSet<S>, ConcretizeError> {
    let one = ConcretizeOptions {
        models: 1,
        ..opts.clone()
    };
    let mut out = Vec::new();
    for (i, a) in args.iter().enumerate() {
        match guard_atoms(a, gm, t, &one, i)? {
            Ok(atoms) => match atoms.into_iter().next() {
                Some(atom) => out.push(Condition::Template(atom)),
                None => return Ok(ConcreteSet::Empty),
            },
            Err(why) => return Ok(ConcreteSet::Unknown(why)),
        }
    }
    Ok(ConcreteSet::Found(vec![ConcreteStmt::Call {
        callee: callee.to_string(),
        args: out,
    }]))
}

fn script(params: &BTreeMap<String, Sort>, univ: &BTreeMap<String, Sort>, matrix: String) -> String {
    let mut out = String::from("(set-logic ALL)\n");
    for (p, s) in params {
        out += &format!("(declare-const {} {})\n", symbol(p), s.smt());
    }
    let binders: Vec<String> = univ.iter().map(|(v, s)| format!("({} {})", symbol(v), s.smt())).collect();
    if binders.is_empty() {
        out += &format!("(assert {matrix})\n");
    } else {
        out += &format!("(assert (forall ({}) {matrix}))\n", binders.join(" "));
    }
    out + "(check-sat)\n(get-model)\n"
}

/// SMT-LIB script of the query behind [`concretize_assume_templated`].
pub fn emit_guard_query<S: Scalar>(g: &BoolExpr, gm: &PredicateMap<S>, t: &Template<S>) -> Result<String, ConcretizeError> {
    let target = gm.gamma(g)?;
    let (shape, params, univ) = guard_shape(&target, gm, t, 0);
    let matrix = format!("(= (<= {} 0) {})", shape.smt(), target.smt_with(&|v: &str| symbol(v)));
    Ok(script(&params, &univ, matrix))
}

/// SMT-LIB script of the query behind [`concretize_assign_templated`]
/// (linear template when `t` is `None`).
pub fn emit_assign_query<S: Scalar>(
    targets: &[String],
    values: &[BoolExpr],
    gm: &PredicateMap<S>,
    t: Option<&Template<S>>,
) -> Result<String, ConcretizeError> {
    let q = AssignQuery::new(targets, values, gm)?;
    let (shapes, params) = shapes_for(&q, gm, t.unwrap_or(&Template::linear()));
    let sub = |v: &str| shapes.get(v).map_or_else(|| symbol(v), |h| h.smt());
    let parts: Vec<String> = q
        .eqs
        .iter()
        .map(|(post, pre)| format!("(= {} {})", post.smt_with(&sub), pre.smt_with(&|v: &str| symbol(v))))
        .collect();
    Ok(script(&params, &q.univ(gm), format!("(and {})", parts.join(" "))))
}
