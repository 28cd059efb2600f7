use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::diag::{DiagCode, Diagnostic, Diagnostics};
use super::parser::SourceMap;

/// Check all program invariants on an AST built without the parser.
pub fn validate(p: &Program) -> Result<(), Diagnostics> {
    validate_with_positions(p, &SourceMap::default())
}

pub(crate) fn validate_with_positions(p: &Program, map: &SourceMap) -> Result<(), Diagnostics> {
    let mut v = Validator {
        p,
        map,
        out: Vec::new(),
    };
    v.run();
    if v.out.is_empty() {
        Ok(())
    } else {
        v.out.sort_by_key(|d| (d.line, d.col));
        Err(Diagnostics(v.out))
    }
}

struct Validator<'a> {
    p: &'a Program,
    map: &'a SourceMap,
    out: Vec<Diagnostic>,
}

impl<'a> Validator<'a> {
    fn report(&mut self, code: DiagCode, pos: (usize, usize), msg: String) {
        self.out.push(Diagnostic::error(code, pos, msg));
    }

    fn proc_pos(&self, name: &str) -> (usize, usize) {
        self.map.procedures.get(name).copied().unwrap_or((0, 0))
    }

    fn run(&mut self) {
        let p = self.p;
        if !p.procedures.iter().any(|q| q.name == "main") {
            self.report(DiagCode::MissingMain, (1, 1), "no procedure named 'main'".into());
        }
        let mut procs = HashSet::new();
        for q in &p.procedures {
            if !procs.insert(q.name.as_str()) {
                let pos = self.proc_pos(&q.name);
                self.report(
                    DiagCode::DuplicateName,
                    pos,
                    format!("procedure '{}' defined twice", q.name),
                );
            }
        }
        let mut names: HashSet<&str> = HashSet::new();
        for g in &p.globals {
            if !names.insert(g) {
                let pos = self.map.globals.get(g).copied().unwrap_or((0, 0));
                self.report(
                    DiagCode::DuplicateName,
                    pos,
                    format!("variable '{g}' declared twice"),
                );
            }
        }
        for q in &p.procedures {
            for l in &q.locals {
                if !names.insert(l) {
                    let pos = self.proc_pos(&q.name);
                    self.report(
                        DiagCode::DuplicateName,
                        pos,
                        format!("variable '{l}' in '{}' clashes with another declaration", q.name),
                    );
                }
            }
        }
        for (i, q) in p.procedures.iter().enumerate() {
            self.procedure(i, q);
        }
    }

    fn procedure(&mut self, idx: usize, q: &Procedure) {
        if q.body.is_empty() {
            let pos = self.proc_pos(&q.name);
            self.report(
                DiagCode::EmptyBody,
                pos,
                format!("procedure '{}' has no statements", q.name),
            );
        }
        let scope: HashSet<String> = self.p.inscope(idx).into_iter().collect();
        let mut labels: HashMap<&Label, ()> = HashMap::new();
        let stmts = q.statements();
        for ls in &stmts {
            let pos = self.stmt_pos(&q.name, &ls.label);
            if ls.label.as_str() == "exit" || ls.label.as_str() == "err" {
                self.report(
                    DiagCode::ReservedLabel,
                    pos,
                    format!("label '{}' is reserved", ls.label),
                );
            }
            if labels.insert(&ls.label, ()).is_some() {
                self.report(
                    DiagCode::DuplicateLabel,
                    pos,
                    format!("label '{}' used twice in '{}'", ls.label, q.name),
                );
            }
        }
        for ls in &stmts {
            let pos = self.stmt_pos(&q.name, &ls.label);
            self.statement(&ls.stmt, pos, &scope, &labels);
        }
    }

    fn stmt_pos(&self, proc: &str, label: &Label) -> (usize, usize) {
        self.map
            .statements
            .get(&(proc.to_string(), label.clone()))
            .copied()
            .unwrap_or((0, 0))
    }

    fn vars_in_scope(&mut self, e: &BoolExpr, pos: (usize, usize), scope: &HashSet<String>) {
        for v in e.vars() {
            if !scope.contains(v) {
                self.report(
                    DiagCode::UnknownVariable,
                    pos,
                    format!("variable '{v}' is not in scope"),
                );
            }
        }
    }

    fn guard(&mut self, g: &BoolExpr, pos: (usize, usize), scope: &HashSet<String>) {
        if *g != BoolExpr::Star && !g.is_deterministic() {
            self.report(
                DiagCode::NondeterministicGuard,
                pos,
                format!("branch guard '{g}' must be '*' or deterministic"),
            );
        }
        self.vars_in_scope(g, pos, scope);
    }

    fn statement(
        &mut self,
        s: &Statement,
        pos: (usize, usize),
        scope: &HashSet<String>,
        labels: &HashMap<&Label, ()>,
    ) {
        match s {
            Statement::Skip | Statement::Return => {}
            Statement::Assign { targets, values } => {
                if targets.len() != values.len() {
                    self.report(
                        DiagCode::AssignArityMismatch,
                        pos,
                        format!(
                            "{} targets but {} values in assignment",
                            targets.len(),
                            values.len()
                        ),
                    );
                }
                let mut seen = HashSet::new();
                for t in targets {
                    if !seen.insert(t) {
                        self.report(
                            DiagCode::DuplicateAssignTarget,
                            pos,
                            format!("'{t}' assigned twice in one statement"),
                        );
                    }
                    if !scope.contains(t) {
                        self.report(
                            DiagCode::UnknownVariable,
                            pos,
                            format!("variable '{t}' is not in scope"),
                        );
                    }
                }
                for v in values {
                    if !v.is_well_formed_rhs() {
                        self.report(
                            DiagCode::NondeterministicExpression,
                            pos,
                            format!("'{v}' mixes '*' or choose into a larger expression"),
                        );
                    }
                    self.vars_in_scope(v, pos, scope);
                }
            }
            Statement::If { guard, .. } | Statement::While { guard, .. } => {
                self.guard(guard, pos, scope);
                if let Statement::While { body, .. } = s {
                    if !matches!(body.last(), Some(LabeledStatement { stmt: Statement::Skip, .. })) {
                        self.report(
                            DiagCode::LoopBodyNotSkip,
                            pos,
                            "the last statement of a loop body must be 'skip'".into(),
                        );
                    }
                }
            }
            Statement::IfGoto { guard, target } => {
                self.guard(guard, pos, scope);
                self.label(target, pos, labels);
            }
            Statement::Assume(g) => {
                if !g.is_deterministic() {
                    self.report(
                        DiagCode::NondeterministicAssumeGuard,
                        pos,
                        format!("assume guard '{g}' must be deterministic"),
                    );
                }
                self.vars_in_scope(g, pos, scope);
            }
            Statement::Assert(g) => {
                if !g.is_deterministic() {
                    self.report(
                        DiagCode::NondeterministicAssertGuard,
                        pos,
                        format!("assert guard '{g}' must be deterministic"),
                    );
                }
                self.vars_in_scope(g, pos, scope);
            }
            Statement::Call { callee, args } => {
                if callee == "main" {
                    self.report(DiagCode::MainCalled, pos, "'main' cannot be called".into());
                }
                match self.p.procedures.iter().find(|q| &q.name == callee) {
                    None => self.report(
                        DiagCode::UnknownProcedure,
                        pos,
                        format!("call to undefined procedure '{callee}'"),
                    ),
                    Some(q) if q.formals.len() != args.len() => self.report(
                        DiagCode::ArityMismatch,
                        pos,
                        format!(
                            "'{callee}' expects {} arguments, got {}",
                            q.formals.len(),
                            args.len()
                        ),
                    ),
                    Some(_) => {}
                }
                for a in args {
                    if !a.is_deterministic() {
                        self.report(
                            DiagCode::NondeterministicExpression,
                            pos,
                            format!("call argument '{a}' must be deterministic"),
                        );
                    }
                    self.vars_in_scope(a, pos, scope);
                }
            }
            Statement::Goto(targets) => {
                for t in targets {
                    self.label(t, pos, labels);
                }
            }
        }
    }

    fn label(&mut self, t: &Label, pos: (usize, usize), labels: &HashMap<&Label, ()>) {
        if !labels.contains_key(t) {
            self.report(
                DiagCode::UnknownLabel,
                pos,
                format!("jump to undefined label '{t}'"),
            );
        }
    }
}
