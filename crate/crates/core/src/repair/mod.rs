//! Cost-aware repair.
//!
//! A [`RepairSpace`] fixes the graph, cut-set, verification paths, modifiable
//! locations and unknown expressions of a program under a cost model. The
//! repairability question is then answered either by expanding it into one
//! propositional formula ([`expand`]) or by handing an exists-forall SMT-LIB
//! script to an external solver ([`smtlib`]). Either way the model is turned
//! into a repaired program plus inductive assertions ([`extract`]) and
//! re-checked by [`proof::check_proof`] before it is returned.

pub mod cnf;
pub mod crc;
pub mod expand;
pub mod extract;
pub mod proof;
pub mod schema;
pub mod smtlib;
pub mod sp;
pub mod space;
pub mod synth;
pub mod term;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cfg::CfgError;
use crate::lang::Program;

pub use expand::EncodingStats;
pub use extract::{build_solution, extract_program, LocationCost, ModifiedStatement, RepairSolution};
pub use proof::{check_proof, ProofError};
pub use schema::{applicable_schemas, CostModel, CostModelError, CostOverride, UpdateSchema};
pub use space::{RepairModel, RepairSpace, SpaceOptions};
pub use synth::synthesize;

#[derive(Debug, Error)]
pub enum RepairError {
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error("invalid cut-set: {0}")]
    InvalidCutSet(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("cannot read solver model: {0}")]
    ModelParse(String),
    #[error("solver model does not check: {0}")]
    ModelCheck(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Eliminate the universal quantifier by expansion and call the built-in SAT solver.
    #[default]
    Expand,
    /// Emit an SMT-LIB script and run an external solver on it.
    External,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Program and arguments; the script is passed on standard input.
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            command: vec!["z3".into(), "-in".into(), "-smt2".into()],
            timeout: Duration::from_secs(60),
        }
    }
}

/// Shape of the script handed to an external solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmtForm {
    /// Uninterpreted functions under `forall`.
    #[default]
    Quantified,
    /// The expanded propositional encoding.
    Expanded,
}

#[derive(Debug, Clone, Default)]
pub struct RepairOptions {
    pub strategy: Strategy,
    pub smt_form: SmtForm,
    pub space: SpaceOptions,
    pub solver: SolverConfig,
}

/// One solver call at a fixed budget.
#[derive(Debug, Clone)]
pub struct Attempt {
    pub budget: u32,
    pub repaired: bool,
    pub query_time: Duration,
    pub solve_time: Duration,
    pub stats: EncodingStats,
}

#[derive(Debug, Clone)]
pub struct RepairRun {
    pub attempts: Vec<Attempt>,
    pub solution: Option<RepairSolution>,
}

impl RepairRun {
    pub fn query_time(&self) -> Duration {
        self.attempts.iter().map(|a| a.query_time).sum()
    }

    pub fn solve_time(&self) -> Duration {
        self.attempts.iter().map(|a| a.solve_time).sum()
    }
}

/// Decide repairability at the space's budget and return a raw model if one exists.
pub fn solve_space(space: &RepairSpace, opts: &RepairOptions) -> Result<(Option<RepairModel>, Attempt), RepairError> {
    match opts.strategy {
        Strategy::Expand => {
            let start = Instant::now();
            let enc = expand::encode(space);
            let query_time = start.elapsed();
            let stats = enc.stats();
            let (model, solve_time) = match enc.cnf.solve() {
                cnf::SatOutcome::Sat(values, t) => (Some(enc.decode(space, &values)), t),
                cnf::SatOutcome::Unsat(t) => (None, t),
            };
            let attempt = Attempt {
                budget: space.budget,
                repaired: model.is_some(),
                query_time,
                solve_time,
                stats,
            };
            Ok((model, attempt))
        }
        Strategy::External => {
            let start = Instant::now();
            let (script, enc) = match opts.smt_form {
                SmtForm::Quantified => (smtlib::emit_quantified(&crc::build_repairability_formula(space)), None),
                SmtForm::Expanded => {
                    let enc = expand::encode(space);
                    (smtlib::emit_expanded(&enc), Some(enc))
                }
            };
            let query_time = start.elapsed();
            let stats = match &enc {
                Some(e) => e.stats(),
                None => EncodingStats::default(),
            };
            let (out, solve_time) = smtlib::run_solver(&opts.solver, &script)?;
            let model = match smtlib::parse_response(&out)? {
                smtlib::SmtAnswer::Unsat => None,
                smtlib::SmtAnswer::Unknown(why) => return Err(RepairError::Solver(why)),
                smtlib::SmtAnswer::Sat(m) => Some(match &enc {
                    Some(e) => e.decode(space, &smtlib::decode_expanded(e, &m)?),
                    None => smtlib::decode_quantified(space, &m)?,
                }),
            };
            let attempt = Attempt {
                budget: space.budget,
                repaired: model.is_some(),
                query_time,
                solve_time,
                stats,
            };
            Ok((model, attempt))
        }
    }
}

/// Solve at one budget; a returned solution has been re-checked.
pub fn solve_repair(
    p: &Program,
    cm: &CostModel,
    opts: &RepairOptions,
) -> Result<(Option<RepairSolution>, Attempt), RepairError> {
    let start = Instant::now();
    let space = RepairSpace::new(p, cm, &opts.space)?;
    let setup = start.elapsed();
    let (model, mut attempt) = solve_space(&space, opts)?;
    attempt.query_time += setup;
    let Some(model) = model else { return Ok((None, attempt)) };
    let solution = build_solution(&space, model);
    recheck(cm, &solution)?;
    Ok((Some(solution), attempt))
}

fn recheck(cm: &CostModel, s: &RepairSolution) -> Result<(), RepairError> {
    let recomputed: u32 = s.update.iter().map(|(loc, &u)| cm.cost(u, loc)).sum();
    if recomputed != s.total_cost || recomputed > cm.budget {
        return Err(RepairError::ModelCheck(format!(
            "cost {recomputed} (reported {}) against budget {}",
            s.total_cost, cm.budget
        )));
    }
    check_proof(&s.program, &s.assertions).map_err(|e| RepairError::ModelCheck(e.to_string()))
}

/// Try budgets `start, start + 1, ..., cap` until a repair is found. With
/// `minimal`, the returned solution has the least total cost: failures at
/// lower budgets already bound it from below, and budgets under `start` are
/// binary-searched.
pub fn repair_with_budget(
    p: &Program,
    cm: &CostModel,
    start: u32,
    cap: u32,
    minimal: bool,
    opts: &RepairOptions,
) -> Result<RepairRun, RepairError> {
    let mut attempts = Vec::new();
    let mut budget = start;
    loop {
        let (solution, attempt) = solve_repair(p, &cm.clone().with_budget(budget), opts)?;
        attempts.push(attempt);
        if let Some(mut best) = solution {
            if minimal {
                let mut lo = if budget > start { budget } else { 0 };
                let mut hi = best.total_cost;
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    let (s, a) = solve_repair(p, &cm.clone().with_budget(mid), opts)?;
                    attempts.push(a);
                    match s {
                        Some(s) => {
                            hi = s.total_cost;
                            best = s;
                        }
                        None => lo = mid + 1,
                    }
                }
            }
            return Ok(RepairRun {
                attempts,
                solution: Some(best),
            });
        }
        if budget >= cap {
            return Ok(RepairRun {
                attempts,
                solution: None,
            });
        }
        budget += 1;
    }
}
