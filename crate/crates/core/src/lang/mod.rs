//! Boolean program syntax: AST, parser, pretty-printer, validator and evaluator.
//!
//! Surface syntax, one program per file:
//!
//! ```text
//! decl b0, b1;
//! main() begin
//!   decl t;
//!   l1: if (!b0) goto l3;
//!   l2: b0, t := *, choose(b1, !b1);
//!   l3: while (*) do b1 := b0 | t; skip; od;
//!   l4: call f(b0 & b1);
//!   l5: assert(b0 => b1);
//! end
//! f(x) begin assume(x); return; end
//! ```

pub mod ast;
pub mod diag;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod validate;

pub use ast::*;
pub use diag::{DiagCode, Diagnostic, Diagnostics, Level};
pub use eval::{equivalent, eval, eval_with, truth_table, Compiled, EvalError, Valuation};
pub use parser::{parse_expr, parse_program, parse_unvalidated, SourceMap};
pub use printer::{expr_to_string, pretty_print, stmt_summary};
pub use validate::validate;
