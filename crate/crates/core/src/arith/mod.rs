//! Linear arithmetic over an exact scalar type: terms, quantifier-free
//! formulas, a text parser, and a small decision procedure.
//!
//! Everything here is generic over [`Scalar`]; the crate root fixes the usual
//! instantiation with big rationals.

mod parse;
mod solve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Debug, Display};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed};
use serde::{Deserialize, Serialize};

pub use parse::{parse_formula, parse_term, ArithParseError};
pub use solve::{check_sat, equivalent, exists_forall, valid, EfMatrix, EfOptions, EfResult, SatResult, SolveLimits};

/// Exact ordered field with integer rounding.
pub trait Scalar: Clone + Ord + Debug + Display + Num + Signed {
    fn from_i64(n: i64) -> Self;
    fn floor(&self) -> Self;
    fn ceil(&self) -> Self;
    fn is_integer(&self) -> bool;
    fn numer_denom(&self) -> (Self, Self);
}

impl<T> Scalar for Ratio<T>
where
    T: Clone + Integer + Signed + FromPrimitive + Debug + Display,
{
    fn from_i64(n: i64) -> Self {
        Ratio::from_integer(T::from_i64(n).expect("integer fits the scalar type"))
    }
    fn floor(&self) -> Self {
        Ratio::floor(self)
    }
    fn ceil(&self) -> Self {
        Ratio::ceil(self)
    }
    fn is_integer(&self) -> bool {
        Ratio::is_integer(self)
    }
    fn numer_denom(&self) -> (Self, Self) {
        (Ratio::from_integer(self.numer().clone()), Ratio::from_integer(self.denom().clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Int,
    Real,
}

impl Sort {
    pub fn smt(self) -> &'static str {
        match self {
            Sort::Int => "Int",
            Sort::Real => "Real",
        }
    }
}

pub type Model<S> = BTreeMap<String, S>;

/// `constant + Σ coeff·var`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinExpr<S> {
    pub coeffs: BTreeMap<String, S>,
    pub constant: S,
}

impl<S: Scalar> LinExpr<S> {
    pub fn constant(c: S) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn zero() -> Self {
        Self::constant(S::zero())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::term(S::one(), name)
    }

    pub fn term(c: S, name: impl Into<String>) -> Self {
        let mut e = Self::zero();
        e.add_term(c, name.into());
        e
    }

    fn add_term(&mut self, c: S, name: String) {
        let sum = self.coeffs.get(&name).cloned().unwrap_or_else(S::zero) + c;
        if sum.is_zero() {
            self.coeffs.remove(&name);
        } else {
            self.coeffs.insert(name, sum);
        }
    }

    pub fn coeff(&self, v: &str) -> S {
        self.coeffs.get(v).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.constant = out.constant + o.constant.clone();
        for (v, c) in &o.coeffs {
            out.add_term(c.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }

    pub fn scale(&self, k: &S) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c.clone() * k.clone())).collect(),
            constant: self.constant.clone() * k.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Replace variables by terms; unmapped variables stay.
    pub fn substitute(&self, m: &BTreeMap<String, LinExpr<S>>) -> Self {
        let mut out = Self::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match m.get(v) {
                Some(e) => out = out.add(&e.scale(c)),
                None => out.add_term(c.clone(), v.clone()),
            }
        }
        out
    }

    pub fn eval(&self, env: &Model<S>) -> Option<S> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc = acc + c.clone() * env.get(v)?.clone();
        }
        Some(acc)
    }

    /// Partial evaluation: variables in `env` become constants.
    pub fn bind(&self, env: &Model<S>) -> Self {
        let m = env.iter().map(|(k, v)| (k.clone(), Self::constant(v.clone()))).collect();
        self.substitute(&m)
    }
}

fn fmt_coeff<S: Scalar>(f: &mut fmt::Formatter<'_>, c: &S) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{c}")
    } else {
        write!(f, "({c})")
    }
}

impl<S: Scalar> Display for LinExpr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let neg = c.is_negative();
            let mag = c.abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            if !mag.is_one() {
                fmt_coeff(f, &mag)?;
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        let k = &self.constant;
        if first {
            fmt_coeff(f, k)
        } else if k.is_zero() {
            Ok(())
        } else {
            write!(f, " {} ", if k.is_negative() { '-' } else { '+' })?;
            fmt_coeff(f, &k.abs())
        }
    }
}

/// Relation of an atom `expr rel 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Le,
    Lt,
    Eq,
    Ne,
}

impl Rel {
    pub fn negated(self) -> Rel {
        match self {
            Rel::Le => Rel::Lt,
            Rel::Lt => Rel::Le,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
        }
    }

    fn holds<S: Scalar>(self, v: &S) -> bool {
        match self {
            Rel::Le => !v.is_positive(),
            Rel::Lt => v.is_negative(),
            Rel::Eq => v.is_zero(),
            Rel::Ne => !v.is_zero(),
        }
    }
}

/// `expr rel 0`, scaled so the first variable has coefficient ±1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom<S> {
    pub expr: LinExpr<S>,
    pub rel: Rel,
}

impl<S: Scalar> Atom<S> {
    fn normalized(expr: LinExpr<S>, rel: Rel) -> Self {
        let lead = expr.coeffs.values().next().cloned();
        let expr = match lead {
            Some(c) => {
                // Equalities are sign-free, so make their leading coefficient positive.
                let k = if matches!(rel, Rel::Eq | Rel::Ne) {
                    S::one() / c
                } else {
                    S::one() / c.abs()
                };
                expr.scale(&k)
            }
            None => expr,
        };
        Atom { expr, rel }
    }

    pub fn negated(&self) -> Self {
        match self.rel {
            // not (e <= 0)  <=>  -e < 0
            Rel::Le | Rel::Lt => Atom::normalized(self.expr.neg(), self.rel.negated()),
            Rel::Eq | Rel::Ne => Atom {
                expr: self.expr.clone(),
                rel: self.rel.negated(),
            },
        }
    }

    pub fn eval(&self, env: &Model<S>) -> Option<bool> {
        Some(self.rel.holds(&self.expr.eval(env)?))
    }

    /// The atom in template form `c0 + Σ c_p*v_p <= 0` (or `<`, `==`, `!=`).
    pub fn raw(&self) -> String {
        let op = match self.rel {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "==",
            Rel::Ne => "!=",
        };
        format!("{} {op} 0", self.expr)
    }
}

impl<S: Scalar> Display for Atom<S> {
    /// Variables on the left with a positive leading coefficient, constant on the right.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flip = self.expr.coeffs.values().next().is_some_and(|c| c.is_negative());
        let e = if flip { self.expr.neg() } else { self.expr.clone() };
        let op = match (self.rel, flip) {
            (Rel::Le, false) => "<=",
            (Rel::Le, true) => ">=",
            (Rel::Lt, false) => "<",
            (Rel::Lt, true) => ">",
            (Rel::Eq, _) => "==",
            (Rel::Ne, _) => "!=",
        };
        let lhs = LinExpr {
            coeffs: e.coeffs.clone(),
            constant: S::zero(),
        };
        write!(f, "{lhs} {op} ")?;
        fmt_coeff(f, &-e.constant)
    }
}

/// Quantifier-free formula over linear atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula<S> {
    Const(bool),
    Atom(Atom<S>),
    Not(Box<Formula<S>>),
    And(Vec<Formula<S>>),
    Or(Vec<Formula<S>>),
    Iff(Box<Formula<S>>, Box<Formula<S>>),
}

impl<S: Scalar> Formula<S> {
    pub fn atom(expr: LinExpr<S>, rel: Rel) -> Self {
        if expr.is_constant() {
            return Formula::Const(rel.holds(&expr.constant));
        }
        Formula::Atom(Atom::normalized(expr, rel))
    }

    pub fn le(a: &LinExpr<S>, b: &LinExpr<S>) -> Self {
        Self::atom(a.sub(b), Rel::Le)
    }
    pub fn lt(a: &LinExpr<S>, b: &LinExpr<S>) -> Self {
        Self::atom(a.sub(b), Rel::Lt)
    }
    pub fn ge(a: &LinExpr<S>, b: &LinExpr<S>) -> Self {
        Self::le(b, a)
    }
    pub fn gt(a: &LinExpr<S>, b: &LinExpr<S>) -> Self {
        Self::lt(b, a)
    }
    pub fn eq(a: &LinExpr<S>, b: &LinExpr<S>) -> Self {
        Self::atom(a.sub(b), Rel::Eq)
    }
    pub fn ne(a: &LinExpr<S>, b: &LinExpr<S>) -> Self {
        Self::atom(a.sub(b), Rel::Ne)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        match f {
            Formula::Const(b) => Formula::Const(!b),
            Formula::Not(g) => *g,
            Formula::Atom(a) => Formula::Atom(a.negated()),
            g => Formula::Not(Box::new(g)),
        }
    }

    pub fn and(items: impl IntoIterator<Item = Self>) -> Self {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::Const(true) => {}
                Formula::Const(false) => return Formula::Const(false),
                Formula::And(v) => out.extend(v),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::Const(true),
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(items: impl IntoIterator<Item = Self>) -> Self {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::Const(false) => {}
                Formula::Const(true) => return Formula::Const(true),
                Formula::Or(v) => out.extend(v),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::Const(false),
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn iff(a: Self, b: Self) -> Self {
        match (a, b) {
            (Formula::Const(true), g) | (g, Formula::Const(true)) => g,
            (Formula::Const(false), g) | (g, Formula::Const(false)) => Self::not(g),
            (a, b) if a == b => Formula::Const(true),
            (a, b) => Formula::Iff(Box::new(a), Box::new(b)),
        }
    }

    pub fn implies(a: Self, b: Self) -> Self {
        Self::or([Self::not(a), b])
    }

    pub fn eval(&self, env: &Model<S>) -> Option<bool> {
        Some(match self {
            Formula::Const(b) => *b,
            Formula::Atom(a) => a.eval(env)?,
            Formula::Not(g) => !g.eval(env)?,
            Formula::And(v) => {
                let mut r = true;
                for g in v {
                    r &= g.eval(env)?;
                }
                r
            }
            Formula::Or(v) => {
                let mut r = false;
                for g in v {
                    r |= g.eval(env)?;
                }
                r
            }
            Formula::Iff(a, b) => a.eval(env)? == b.eval(env)?,
        })
    }

    pub fn atoms(&self) -> Vec<&Atom<S>> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom<S>)) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) => g.visit_atoms(f),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| g.visit_atoms(f)),
            Formula::Iff(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| out.extend(a.expr.vars().cloned()));
        out
    }

    /// Rebuild with every atom mapped through `f`, re-simplifying as it goes.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Atom<S>) -> Formula<S>) -> Self {
        match self {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Atom(a) => f(a),
            Formula::Not(g) => Self::not(g.map_atoms(f)),
            Formula::And(v) => Self::and(v.iter().map(|g| g.map_atoms(f)).collect::<Vec<_>>()),
            Formula::Or(v) => Self::or(v.iter().map(|g| g.map_atoms(f)).collect::<Vec<_>>()),
            Formula::Iff(a, b) => Self::iff(a.map_atoms(f), b.map_atoms(f)),
        }
    }

    pub fn substitute(&self, m: &BTreeMap<String, LinExpr<S>>) -> Self {
        self.map_atoms(&mut |a| Self::atom(a.expr.substitute(m), a.rel))
    }

    pub fn bind(&self, env: &Model<S>) -> Self {
        self.map_atoms(&mut |a| Self::atom(a.expr.bind(env), a.rel))
    }

    /// Negation normal form with only `<=`, `<` and `==` atoms.
    pub fn nnf(&self) -> Self {
        self.nnf_pol(true)
    }

    fn nnf_pol(&self, pos: bool) -> Self {
        match self {
            Formula::Const(b) => Formula::Const(*b == pos),
            Formula::Atom(a) => {
                let a = if pos { a.clone() } else { a.negated() };
                match a.rel {
                    Rel::Ne => Self::or([
                        Self::atom(a.expr.clone(), Rel::Lt),
                        Self::atom(a.expr.neg(), Rel::Lt),
                    ]),
                    _ => Formula::Atom(a),
                }
            }
            Formula::Not(g) => g.nnf_pol(!pos),
            Formula::And(v) if pos => Self::and(v.iter().map(|g| g.nnf_pol(true)).collect::<Vec<_>>()),
            Formula::And(v) => Self::or(v.iter().map(|g| g.nnf_pol(false)).collect::<Vec<_>>()),
            Formula::Or(v) if pos => Self::or(v.iter().map(|g| g.nnf_pol(true)).collect::<Vec<_>>()),
            Formula::Or(v) => Self::and(v.iter().map(|g| g.nnf_pol(false)).collect::<Vec<_>>()),
            Formula::Iff(a, b) => Self::or([
                Self::and([a.nnf_pol(true), b.nnf_pol(pos)]),
                Self::and([a.nnf_pol(false), b.nnf_pol(!pos)]),
            ]),
        }
    }

    /// SMT-LIB rendering.
    pub fn smt(&self) -> String {
        self.smt_with(&|v: &str| v.to_string())
    }

    /// SMT-LIB rendering with each variable replaced by `var(name)`.
    pub fn smt_with(&self, var: &impl Fn(&str) -> String) -> String {
        let join = |v: &[Formula<S>]| v.iter().map(|g| g.smt_with(var)).collect::<Vec<_>>().join(" ");
        match self {
            Formula::Const(b) => b.to_string(),
            Formula::Atom(a) => {
                let op = match a.rel {
                    Rel::Le => "<=",
                    Rel::Lt => "<",
                    Rel::Eq | Rel::Ne => "=",
                };
                let s = format!("({op} {} 0)", smt_term_with(&a.expr, var));
                if a.rel == Rel::Ne {
                    format!("(not {s})")
                } else {
                    s
                }
            }
            Formula::Not(g) => format!("(not {})", g.smt_with(var)),
            Formula::And(v) => format!("(and {})", join(v)),
            Formula::Or(v) => format!("(or {})", join(v)),
            Formula::Iff(a, b) => format!("(= {} {})", a.smt_with(var), b.smt_with(var)),
        }
    }
}

pub fn smt_scalar<S: Scalar>(c: &S) -> String {
    let (n, d) = c.numer_denom();
    let lit = |x: &S| {
        if x.is_negative() {
            format!("(- {})", x.abs())
        } else {
            x.to_string()
        }
    };
    if d.is_one() {
        lit(&n)
    } else {
        format!("(/ {} {})", lit(&n), d)
    }
}

pub fn smt_term<S: Scalar>(e: &LinExpr<S>) -> String {
    smt_term_with(e, &|v: &str| v.to_string())
}

pub fn smt_term_with<S: Scalar>(e: &LinExpr<S>, var: &impl Fn(&str) -> String) -> String {
    let mut parts = Vec::new();
    for (v, c) in &e.coeffs {
        if c.is_one() {
            parts.push(var(v));
        } else {
            parts.push(format!("(* {} {})", smt_scalar(c), var(v)));
        }
    }
    if !e.constant.is_zero() || parts.is_empty() {
        parts.push(smt_scalar(&e.constant));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn prec<S>(f: &Formula<S>) -> u8 {
    match f {
        Formula::Iff(..) => 0,
        Formula::Or(_) => 1,
        Formula::And(_) => 2,
        _ => 3,
    }
}

impl<S: Scalar> Display for Formula<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, g: &Formula<S>, min: u8| {
            if prec(g) < min {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        };
        match self {
            Formula::Const(b) => write!(f, "{b}"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => {
                write!(f, "!")?;
                child(f, g, 3)
            }
            Formula::And(v) | Formula::Or(v) => {
                let (op, p) = if matches!(self, Formula::And(_)) {
                    (" && ", 3)
                } else {
                    (" || ", 2)
                };
                for (i, g) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{op}")?;
                    }
                    child(f, g, p)?;
                }
                Ok(())
            }
            Formula::Iff(a, b) => {
                child(f, a, 1)?;
                write!(f, " <-> ")?;
                child(f, b, 1)
            }
        }
    }
}
