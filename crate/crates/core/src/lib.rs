//! Cost-aware repair of Boolean programs.
//!
//! A program is parsed ([`lang`]), turned into a transition graph with a
//! cut-set and verification paths ([`cfg`]), and repaired by searching for an
//! update of its statements, within a cost budget, together with inductive
//! assertions proving partial correctness ([`repair`]). [`semantics`] is an
//! explicit-state interpreter used as an independent oracle, and
//! [`concretize`] lifts Boolean repairs to linear-arithmetic statements.

pub mod lang;
pub mod cfg;
pub mod semantics;
pub mod repair;
pub mod arith;
pub mod gen;
pub mod brute;
pub mod concretize;

/// Exact rationals, the default scalar of the arithmetic layer.
pub type Rational = num_rational::BigRational;
pub type LinearTerm = arith::LinExpr<Rational>;
pub type Predicate = arith::Formula<Rational>;
