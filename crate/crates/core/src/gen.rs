//! Seeded random Boolean programs and mutants, for test corpora and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lang::{BinOp, BoolExpr, Label, LabeledStatement, Procedure, Program, Statement};
use crate::repair::synthesize;
use crate::semantics::{check_partial_correctness, Machine, OracleOptions};

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub vars: usize,
    /// Upper bound on statements, counting nested ones and the final assert.
    pub statements: usize,
    pub loops: usize,
    /// Allow `*` on assignment right-hand sides and as branch guards.
    pub nondeterminism: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            vars: 3,
            statements: 10,
            loops: 1,
            nondeterminism: true,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    vars: Vec<String>,
    cfg: GenConfig,
    next_label: usize,
    loops_left: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn label(&mut self) -> Label {
        self.next_label += 1;
        Label::new(format!("l{}", self.next_label))
    }

    fn var(&mut self) -> BoolExpr {
        BoolExpr::var(self.vars.choose(self.rng).unwrap().clone())
    }

    fn literal(&mut self) -> BoolExpr {
        let v = self.var();
        if self.rng.gen_bool(0.5) {
            BoolExpr::not(v)
        } else {
            v
        }
    }

    fn expr(&mut self) -> BoolExpr {
        match self.rng.gen_range(0..10) {
            0 => BoolExpr::Const(self.rng.gen_bool(0.5)),
            1..=4 => self.literal(),
            _ => {
                let op = *[BinOp::And, BinOp::Or, BinOp::Eq, BinOp::Ne, BinOp::Implies]
                    .choose(self.rng)
                    .unwrap();
                let (a, b) = (self.literal(), self.literal());
                BoolExpr::binary(op, a, b)
            }
        }
    }

    fn rhs(&mut self) -> BoolExpr {
        if self.cfg.nondeterminism && self.rng.gen_bool(0.2) {
            BoolExpr::Star
        } else {
            self.expr()
        }
    }

    fn guard(&mut self) -> BoolExpr {
        if self.cfg.nondeterminism && self.rng.gen_bool(0.15) {
            BoolExpr::Star
        } else {
            self.expr()
        }
    }

    fn assign(&mut self) -> Statement {
        let n = if self.vars.len() > 1 && self.rng.gen_bool(0.3) { 2 } else { 1 };
        let mut targets: Vec<String> = self.vars.choose_multiple(self.rng, n).cloned().collect();
        targets.sort();
        let values = (0..n).map(|_| self.rhs()).collect();
        Statement::Assign { targets, values }
    }

    /// A block of at most `budget` statements (at least one).
    fn block(&mut self, budget: usize) -> Vec<LabeledStatement> {
        let mut out = Vec::new();
        let mut left = budget;
        while left > 0 {
            if !out.is_empty() && self.rng.gen_bool(0.25) {
                break;
            }
            let label = self.label();
            let roll = self.rng.gen_range(0..10);
            let stmt = if roll < 2 && left >= 3 {
                let inner = left - 1;
                let t = self.rng.gen_range(1..inner);
                let then_branch = self.block(t);
                let used = count(&then_branch);
                let else_branch = if self.rng.gen_bool(0.7) {
                    self.block(inner - used)
                } else {
                    Vec::new()
                };
                left -= count(&else_branch);
                left -= used;
                Statement::If {
                    guard: self.guard(),
                    then_branch,
                    else_branch,
                }
            } else if roll < 4 && left >= 2 && self.loops_left > 0 {
                self.loops_left -= 1;
                let mut body = if left >= 3 { self.block(left - 2) } else { Vec::new() };
                let skip = self.label();
                body.push(LabeledStatement::new(skip, Statement::Skip));
                left -= count(&body);
                Statement::While {
                    guard: self.guard(),
                    body,
                }
            } else if roll < 5 && self.rng.gen_bool(0.4) {
                Statement::Assume(self.expr())
            } else if roll < 6 {
                Statement::Skip
            } else {
                self.assign()
            };
            left -= 1;
            out.push(LabeledStatement::new(label, stmt));
        }
        out
    }
}

fn count(b: &[LabeledStatement]) -> usize {
    b.iter()
        .map(|s| {
            1 + match &s.stmt {
                Statement::If {
                    then_branch,
                    else_branch,
                    ..
                } => count(then_branch) + count(else_branch),
                Statement::While { body, .. } => count(body),
                _ => 0,
            }
        })
        .sum()
}

fn var_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("b{i}")).collect()
}

/// A random single-procedure program ending in `assert(check)`.
pub fn random_program(rng: &mut impl Rng, cfg: &GenConfig, check: Option<BoolExpr>) -> Program {
    let vars = var_names(cfg.vars);
    let mut g = Gen {
        rng,
        vars: vars.clone(),
        cfg: *cfg,
        next_label: 0,
        loops_left: cfg.loops,
    };
    let mut body = g.block(cfg.statements.saturating_sub(1).max(1));
    let check = check.unwrap_or_else(|| g.expr());
    let label = g.label();
    body.push(LabeledStatement::new(label, Statement::Assert(check)));
    Program {
        globals: vars,
        procedures: vec![Procedure {
            name: "main".into(),
            formals: vec![],
            locals: vec![],
            body,
        }],
    }
}

/// States (as rows over the globals) that reach the final assert.
fn states_at_end(p: &Program) -> Vec<u64> {
    let m = Machine::new(p).expect("generated programs are valid");
    let last = p.main().body.last().unwrap().label.clone();
    let node = m.graph.node_of(0, &last).unwrap();
    let mut out: Vec<u64> = m
        .reachable_states(&OracleOptions::default())
        .remove(&node)
        .unwrap_or_default()
        .into_iter()
        .collect();
    out.sort();
    out
}

/// A random program whose final assertion holds on every execution.
pub fn correct_program(rng: &mut impl Rng, cfg: &GenConfig) -> Program {
    let mut p = random_program(rng, cfg, Some(BoolExpr::Const(true)));
    let reach = states_at_end(&p);
    let vars = var_names(cfg.vars);
    // Either the exact reachable set or a two-literal clause over distinct
    // variables that holds there; both are tight enough for mutations to break.
    let exact = |reach: &[u64]| {
        let table: Vec<bool> = (0..1u64 << cfg.vars).map(|r| reach.contains(&r)).collect();
        synthesize(&table, &vars)
    };
    let mut check = None;
    if cfg.vars >= 2 && rng.gen_bool(0.5) {
        for _ in 0..20 {
            let mut pick: Vec<usize> = (0..cfg.vars).collect();
            pick.shuffle(rng);
            let lit = |i: usize, neg: bool| {
                let v = BoolExpr::var(vars[i].clone());
                if neg {
                    BoolExpr::not(v)
                } else {
                    v
                }
            };
            let (na, nb) = (rng.gen_bool(0.5), rng.gen_bool(0.5));
            let e = BoolExpr::or(lit(pick[0], na), lit(pick[1], nb));
            let holds = reach
                .iter()
                .all(|&r| (r >> pick[0] & 1 == 1) != na || (r >> pick[1] & 1 == 1) != nb);
            if holds && !reach.is_empty() {
                check = Some(e);
                break;
            }
        }
    }
    let check = check.unwrap_or_else(|| exact(&reach));
    if let Some(last) = p.procedures[0].body.last_mut() {
        last.stmt = Statement::Assert(check);
    }
    p
}

/// Apply one random change to a guard, right-hand side or statement.
pub fn mutate(rng: &mut impl Rng, p: &Program) -> Program {
    let mut q = p.clone();
    let vars = q.globals.clone();
    let labels: Vec<Label> = q.main().statements().iter().map(|s| s.label.clone()).collect();
    let candidates: Vec<Label> = labels
        .into_iter()
        .filter(|l| {
            let s = &q.main().find(l).unwrap().stmt;
            !matches!(s, Statement::Assert(_) | Statement::Skip)
        })
        .collect();
    let Some(label) = candidates.choose(rng).cloned() else { return q };
    let mut g = Gen {
        rng,
        vars,
        cfg: GenConfig {
            nondeterminism: false,
            ..GenConfig::default()
        },
        next_label: 0,
        loops_left: 0,
    };
    let stmt = &mut q.procedures[0].find_mut(&label).unwrap().stmt;
    match stmt {
        Statement::If { guard, .. } | Statement::While { guard, .. } | Statement::IfGoto { guard, .. } => {
            *guard = if g.rng.gen_bool(0.5) && *guard != BoolExpr::Star {
                guard.negated()
            } else {
                g.expr()
            };
        }
        Statement::Assume(e) => *e = g.expr(),
        Statement::Assign { values, .. } => {
            let i = g.rng.gen_range(0..values.len());
            values[i] = if g.rng.gen_bool(0.5) && values[i].is_deterministic() {
                values[i].negated()
            } else {
                g.expr()
            };
        }
        _ => {}
    }
    q
}

/// `count` (seed, mutant) pairs from one master seed. Mutants are retried
/// until the interpreter finds an error, up to a few attempts per seed.
pub fn mutant_corpus(seed: u64, count: usize, cfg: &GenConfig) -> Vec<(Program, Program)> {
    let mut r = rng(seed);
    let opts = OracleOptions::default();
    (0..count)
        .map(|_| {
            let p = correct_program(&mut r, cfg);
            let mut m = mutate(&mut r, &p);
            for _ in 0..20 {
                let wrong = check_partial_correctness(&m, &opts).is_ok_and(|v| !v.is_correct());
                if wrong {
                    break;
                }
                m = mutate(&mut r, &p);
            }
            (p, m)
        })
        .collect()
}
