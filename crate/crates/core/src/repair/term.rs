//! Formulas over copies of program variables, unknown functions and selectors.

use std::fmt;

use crate::lang::{BinOp, BoolExpr};

/// Program variable `var` as it stands after `copy` steps of a path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CopyVar {
    pub var: String,
    pub copy: usize,
}

impl CopyVar {
    pub fn new(var: impl Into<String>, copy: usize) -> Self {
        CopyVar { var: var.into(), copy }
    }

    pub fn symbol(&self) -> String {
        format!("{}@{}", self.var, self.copy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(bool),
    Var(CopyVar),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    Iff(Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    /// Application of an unknown expression or assertion, given by its truth table.
    Apply { func: String, args: Vec<Term> },
    /// Selector: true iff a location takes a given update.
    Sel(String),
}

/// Interpretation of the free symbols of a term.
pub trait TermEnv {
    fn var(&self, v: &CopyVar) -> bool;
    fn apply(&self, func: &str, args: &[bool]) -> bool;
    fn sel(&self, name: &str) -> bool;
}

impl Term {
    pub fn var(var: impl Into<String>, copy: usize) -> Term {
        Term::Var(CopyVar::new(var, copy))
    }

    pub fn not(t: Term) -> Term {
        match t {
            Term::Const(b) => Term::Const(!b),
            Term::Not(a) => *a,
            t => Term::Not(Box::new(t)),
        }
    }

    pub fn and(items: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in items {
            match t {
                Term::Const(true) => {}
                Term::Const(false) => return Term::Const(false),
                Term::And(xs) => out.extend(xs),
                t => out.push(t),
            }
        }
        match out.len() {
            0 => Term::Const(true),
            1 => out.pop().unwrap(),
            _ => Term::And(out),
        }
    }

    pub fn or(items: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in items {
            match t {
                Term::Const(false) => {}
                Term::Const(true) => return Term::Const(true),
                Term::Or(xs) => out.extend(xs),
                t => out.push(t),
            }
        }
        match out.len() {
            0 => Term::Const(false),
            1 => out.pop().unwrap(),
            _ => Term::Or(out),
        }
    }

    pub fn implies(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Const(false), _) | (_, Term::Const(true)) => Term::Const(true),
            (Term::Const(true), b) => b,
            (a, Term::Const(false)) => Term::not(a),
            (a, b) => Term::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn iff(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Const(true), t) | (t, Term::Const(true)) => t,
            (Term::Const(false), t) | (t, Term::Const(false)) => Term::not(t),
            (a, b) if a == b => Term::Const(true),
            (a, b) => Term::Iff(Box::new(a), Box::new(b)),
        }
    }

    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        match c {
            Term::Const(true) => t,
            Term::Const(false) => e,
            _ if t == e => t,
            c => Term::Ite(Box::new(c), Box::new(t), Box::new(e)),
        }
    }

    pub fn apply(func: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Apply { func: func.into(), args }
    }

    /// A deterministic program expression over the variables at `copy`.
    pub fn from_expr(e: &BoolExpr, copy: usize) -> Term {
        match e {
            BoolExpr::Const(b) => Term::Const(*b),
            BoolExpr::Var(v) => Term::var(v.clone(), copy),
            BoolExpr::Not(a) => Term::not(Term::from_expr(a, copy)),
            BoolExpr::Binary(op, a, b) => {
                let (a, b) = (Term::from_expr(a, copy), Term::from_expr(b, copy));
                match op {
                    BinOp::And => Term::and([a, b]),
                    BinOp::Or => Term::or([a, b]),
                    BinOp::Implies => Term::implies(a, b),
                    BinOp::Eq => Term::iff(a, b),
                    BinOp::Ne => Term::not(Term::iff(a, b)),
                }
            }
            BoolExpr::Star | BoolExpr::Choose(..) => panic!("nondeterministic expression has no term"),
        }
    }

    pub fn eval(&self, env: &impl TermEnv) -> bool {
        match self {
            Term::Const(b) => *b,
            Term::Var(v) => env.var(v),
            Term::Not(a) => !a.eval(env),
            Term::And(xs) => xs.iter().all(|x| x.eval(env)),
            Term::Or(xs) => xs.iter().any(|x| x.eval(env)),
            Term::Implies(a, b) => !a.eval(env) || b.eval(env),
            Term::Iff(a, b) => a.eval(env) == b.eval(env),
            Term::Ite(c, t, e) => {
                if c.eval(env) {
                    t.eval(env)
                } else {
                    e.eval(env)
                }
            }
            Term::Apply { func, args } => {
                let vals: Vec<bool> = args.iter().map(|a| a.eval(env)).collect();
                env.apply(func, &vals)
            }
            Term::Sel(s) => env.sel(s),
        }
    }

    /// Every copy variable occurring in the term, in first-occurrence order.
    pub fn copy_vars(&self) -> Vec<CopyVar> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let Term::Var(v) = t {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    /// Highest copy index mentioned, if any variable occurs.
    pub fn max_copy(&self) -> Option<usize> {
        self.copy_vars().iter().map(|v| v.copy).max()
    }

    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Not(a) => a.visit(f),
            Term::And(xs) | Term::Or(xs) => xs.iter().for_each(|x| x.visit(f)),
            Term::Implies(a, b) | Term::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Ite(c, t, e) => {
                c.visit(f);
                t.visit(f);
                e.visit(f);
            }
            Term::Apply { args, .. } => args.iter().for_each(|x| x.visit(f)),
            Term::Const(_) | Term::Var(_) | Term::Sel(_) => {}
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// SMT-LIB 2 rendering.
    pub fn smt(&self) -> String {
        let mut s = String::new();
        self.write_smt(&mut s);
        s
    }

    fn write_smt(&self, s: &mut String) {
        let list = |s: &mut String, head: &str, xs: &[&Term]| {
            s.push('(');
            s.push_str(head);
            for x in xs {
                s.push(' ');
                x.write_smt(s);
            }
            s.push(')');
        };
        match self {
            Term::Const(true) => s.push_str("true"),
            Term::Const(false) => s.push_str("false"),
            Term::Var(v) => s.push_str(&v.symbol()),
            Term::Sel(n) => s.push_str(n),
            Term::Not(a) => list(s, "not", &[a]),
            Term::And(xs) => list(s, "and", &xs.iter().collect::<Vec<_>>()),
            Term::Or(xs) => list(s, "or", &xs.iter().collect::<Vec<_>>()),
            Term::Implies(a, b) => list(s, "=>", &[a, b]),
            Term::Iff(a, b) => list(s, "=", &[a, b]),
            Term::Ite(c, t, e) => list(s, "ite", &[c, t, e]),
            Term::Apply { func, args } if args.is_empty() => s.push_str(func),
            Term::Apply { func, args } => list(s, func, &args.iter().collect::<Vec<_>>()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.smt())
    }
}
