use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{BinOp, BoolExpr};

pub type Valuation = BTreeMap<String, bool>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error("expression is nondeterministic")]
    Nondeterministic,
}

pub fn eval(e: &BoolExpr, env: &Valuation) -> Result<bool, EvalError> {
    eval_with(e, &|v| env.get(v).copied())
}

/// Evaluate a deterministic expression with a variable lookup.
pub fn eval_with(e: &BoolExpr, env: &impl Fn(&str) -> Option<bool>) -> Result<bool, EvalError> {
    match e {
        BoolExpr::Const(b) => Ok(*b),
        BoolExpr::Var(v) => env(v).ok_or_else(|| EvalError::Unbound(v.clone())),
        BoolExpr::Not(a) => Ok(!eval_with(a, env)?),
        BoolExpr::Binary(op, a, b) => Ok(op.apply(eval_with(a, env)?, eval_with(b, env)?)),
        BoolExpr::Star | BoolExpr::Choose(..) => Err(EvalError::Nondeterministic),
    }
}

/// Set of values an expression may take, as a bitmask: bit 0 = false possible, bit 1 = true possible.
pub type ValueSet = u8;
pub const MAY_FALSE: ValueSet = 1;
pub const MAY_TRUE: ValueSet = 2;

pub fn value_set(b: bool) -> ValueSet {
    if b {
        MAY_TRUE
    } else {
        MAY_FALSE
    }
}

/// Possible values of an assignment right-hand side.
pub fn possible_values(
    e: &BoolExpr,
    env: &impl Fn(&str) -> Option<bool>,
) -> Result<ValueSet, EvalError> {
    match e {
        BoolExpr::Star => Ok(MAY_FALSE | MAY_TRUE),
        BoolExpr::Choose(a, b) => {
            if eval_with(a, env)? {
                Ok(MAY_TRUE)
            } else if eval_with(b, env)? {
                Ok(MAY_FALSE)
            } else {
                Ok(MAY_FALSE | MAY_TRUE)
            }
        }
        e => Ok(value_set(eval_with(e, env)?)),
    }
}

/// An expression with variables resolved to bit positions of a `u64` state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compiled {
    Const(bool),
    Var(u32),
    Not(Box<Compiled>),
    Binary(BinOp, Box<Compiled>, Box<Compiled>),
    Star,
    Choose(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    pub fn new(e: &BoolExpr, index: &impl Fn(&str) -> Option<usize>) -> Result<Self, EvalError> {
        Ok(match e {
            BoolExpr::Const(b) => Compiled::Const(*b),
            BoolExpr::Var(v) => {
                let i = index(v).ok_or_else(|| EvalError::Unbound(v.clone()))?;
                assert!(i < 64, "state wider than 64 variables");
                Compiled::Var(i as u32)
            }
            BoolExpr::Not(a) => Compiled::Not(Box::new(Self::new(a, index)?)),
            BoolExpr::Binary(op, a, b) => {
                Compiled::Binary(*op, Box::new(Self::new(a, index)?), Box::new(Self::new(b, index)?))
            }
            BoolExpr::Star => Compiled::Star,
            BoolExpr::Choose(a, b) => {
                Compiled::Choose(Box::new(Self::new(a, index)?), Box::new(Self::new(b, index)?))
            }
        })
    }

    /// Evaluate a deterministic expression; panics on `*`/choose.
    pub fn eval(&self, bits: u64) -> bool {
        match self {
            Compiled::Const(b) => *b,
            Compiled::Var(i) => bits >> i & 1 == 1,
            Compiled::Not(a) => !a.eval(bits),
            Compiled::Binary(op, a, b) => op.apply(a.eval(bits), b.eval(bits)),
            Compiled::Star | Compiled::Choose(..) => panic!("eval of nondeterministic expression"),
        }
    }

    pub fn values(&self, bits: u64) -> ValueSet {
        match self {
            Compiled::Star => MAY_FALSE | MAY_TRUE,
            Compiled::Choose(a, b) => {
                if a.eval(bits) {
                    MAY_TRUE
                } else if b.eval(bits) {
                    MAY_FALSE
                } else {
                    MAY_FALSE | MAY_TRUE
                }
            }
            e => value_set(e.eval(bits)),
        }
    }
}

/// Truth table of a deterministic expression over an ordered variable list (row bit i = vars[i]).
pub fn truth_table(e: &BoolExpr, vars: &[String]) -> Result<Vec<bool>, EvalError> {
    let c = Compiled::new(e, &|v| vars.iter().position(|x| x == v))?;
    if !e.is_deterministic() {
        return Err(EvalError::Nondeterministic);
    }
    Ok((0..1u64 << vars.len()).map(|row| c.eval(row)).collect())
}

/// Logical equivalence of two deterministic expressions by exhaustive evaluation.
pub fn equivalent(a: &BoolExpr, b: &BoolExpr) -> Result<bool, EvalError> {
    let mut vars: Vec<String> = a.vars().union(&b.vars()).map(|s| s.to_string()).collect();
    vars.sort();
    Ok(truth_table(a, &vars)? == truth_table(b, &vars)?)
}
