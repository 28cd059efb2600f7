use std::fmt::Write;

use super::ast::*;

fn prec(e: &BoolExpr) -> u8 {
    match e {
        BoolExpr::Binary(BinOp::Implies, ..) => 1,
        BoolExpr::Binary(BinOp::Eq | BinOp::Ne, ..) => 2,
        BoolExpr::Binary(BinOp::Or, ..) => 3,
        BoolExpr::Binary(BinOp::And, ..) => 4,
        BoolExpr::Not(_) => 5,
        _ => 6,
    }
}

fn wrap(out: &mut String, e: &BoolExpr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &BoolExpr) {
    match e {
        BoolExpr::Const(true) => out.push_str("true"),
        BoolExpr::Const(false) => out.push_str("false"),
        BoolExpr::Var(v) => out.push_str(v),
        BoolExpr::Star => out.push('*'),
        BoolExpr::Not(inner) => {
            out.push('!');
            wrap(out, inner, prec(inner) < 5);
        }
        BoolExpr::Choose(a, b) => {
            out.push_str("choose(");
            write_expr(out, a);
            out.push_str(", ");
            write_expr(out, b);
            out.push(')');
        }
        BoolExpr::Binary(op, a, b) => {
            let p = prec(e);
            let (lp, rp) = match op {
                BinOp::Implies => (prec(a) <= p, prec(b) < p),
                BinOp::Eq | BinOp::Ne => (prec(a) <= p, prec(b) <= p),
                BinOp::And | BinOp::Or => (prec(a) < p, prec(b) <= p),
            };
            wrap(out, a, lp);
            let _ = write!(out, " {} ", op.symbol());
            wrap(out, b, rp);
        }
    }
}

/// Render an expression with the minimal parentheses needed to reparse it identically.
pub fn expr_to_string(e: &BoolExpr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

impl std::fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&expr_to_string(self))
    }
}

fn join_exprs(es: &[BoolExpr]) -> String {
    es.iter().map(expr_to_string).collect::<Vec<_>>().join(", ")
}

/// One-line rendering of a statement header (compound bodies elided).
pub fn stmt_summary(s: &Statement) -> String {
    match s {
        Statement::Skip => "skip".into(),
        Statement::Assign { targets, values } => {
            format!("{} := {}", targets.join(", "), join_exprs(values))
        }
        Statement::If { guard, .. } => format!("if ({guard}) then ... fi"),
        Statement::IfGoto { guard, target } => format!("if ({guard}) goto {target}"),
        Statement::While { guard, .. } => format!("while ({guard}) do ... od"),
        Statement::Assume(g) => format!("assume({g})"),
        Statement::Assert(g) => format!("assert({g})"),
        Statement::Call { callee, args } => format!("call {callee}({})", join_exprs(args)),
        Statement::Return => "return".into(),
        Statement::Goto(ts) => format!(
            "goto {}",
            ts.iter().map(Label::as_str).collect::<Vec<_>>().join(" or ")
        ),
    }
}

fn write_seq(out: &mut String, seq: &[LabeledStatement], depth: usize) {
    for ls in seq {
        let pad = "  ".repeat(depth);
        let _ = write!(out, "{pad}{}: ", ls.label);
        match &ls.stmt {
            Statement::If {
                guard,
                then_branch,
                else_branch,
            } => {
                let _ = writeln!(out, "if ({guard}) then");
                write_seq(out, then_branch, depth + 1);
                if !else_branch.is_empty() {
                    let _ = writeln!(out, "{pad}else");
                    write_seq(out, else_branch, depth + 1);
                }
                let _ = writeln!(out, "{pad}fi;");
            }
            Statement::While { guard, body } => {
                let _ = writeln!(out, "while ({guard}) do");
                write_seq(out, body, depth + 1);
                let _ = writeln!(out, "{pad}od;");
            }
            s => {
                let _ = writeln!(out, "{};", stmt_summary(s));
            }
        }
    }
}

/// Canonical source text. Every statement is printed with its label.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    if !p.globals.is_empty() {
        let _ = writeln!(out, "decl {};", p.globals.join(", "));
        out.push('\n');
    }
    for (i, proc) in p.procedures.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{}({}) begin", proc.name, proc.formals.join(", "));
        let locals: Vec<&str> = proc
            .locals
            .iter()
            .filter(|l| !proc.formals.contains(l))
            .map(String::as_str)
            .collect();
        if !locals.is_empty() {
            let _ = writeln!(out, "  decl {};", locals.join(", "));
        }
        write_seq(&mut out, &proc.body, 1);
        out.push_str("end\n");
    }
    out
}
