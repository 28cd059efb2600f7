//! Command-line driver: parse, graph, run, verify, repair, concretize and
//! emit-smt over Boolean programs.
//!
//! Every command returns an [`Outcome`] holding a human-readable report and a
//! JSON one; with `--out DIR` both are written as `report.txt` and
//! `report.json` next to the command's artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bprepair::cfg::{build_transition_graph, compute_cutset, enumerate_verification_paths, to_dot};
use bprepair::concretize::{
    concretize_solution, emit_assign_query, emit_guard_query, statement_at, ConcretizeOptions, PredicateMap, Template,
    TemplateSpec,
};
use bprepair::lang::{parse_expr, parse_program, BoolExpr, Program, Statement};
use bprepair::repair::crc::build_repairability_formula;
use bprepair::repair::expand::encode;
use bprepair::repair::smtlib::{emit_expanded, emit_quantified};
use bprepair::repair::{
    check_proof, repair_with_budget, CostModel, RepairError, RepairOptions, RepairSpace, SmtForm, SolverConfig,
    SpaceOptions, Strategy,
};
use bprepair::semantics::{check_partial_correctness, Bounds, OracleOptions, Verdict};
use bprepair::Rational;

pub mod report;

use report::{concretization_json, concretization_text, solution_json, solution_text};

#[derive(Debug, Parser)]
#[command(name = "bprepair", version, about = "Cost-aware repair of Boolean programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a program, printing it back in normal form.
    Parse(Common),
    /// Transition graph in Graphviz DOT, cut-points doubled.
    Graph(Common),
    /// Explore every execution with the explicit-state interpreter.
    Run(Common),
    /// Check inductive assertions (a JSON map from node name to expression).
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        proof: PathBuf,
    },
    /// Repair within a budget, iterating the budget up to a cap.
    Repair(RepairArgs),
    /// Repair, then lift the repair and its proof to the concrete level.
    Concretize(RepairArgs),
    /// Write the solver script of one repair or concretization query.
    EmitSmt {
        #[command(flatten)]
        job: RepairArgs,
        #[arg(long, value_enum, default_value_t = Form::Quantified)]
        form: Form,
        /// Emit the concretization query of this statement instead.
        #[arg(long, value_name = "LOCATION")]
        at: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    pub program: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Longest execution the interpreter explores.
    #[arg(long, value_name = "N", default_value_t = Bounds::default().max_depth)]
    pub oracle_depth: usize,
    /// Count executions blocked by an `assume` as failures.
    #[arg(long)]
    pub strict_stuck: bool,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "FILE")]
    pub cost_model: Option<PathBuf>,
    /// First budget tried.
    #[arg(long, default_value_t = 1)]
    pub budget: u32,
    /// Last budget tried; defaults to the first.
    #[arg(long)]
    pub budget_cap: Option<u32>,
    /// Return a repair of least total cost.
    #[arg(long)]
    pub minimal: bool,
    #[arg(long, value_enum, default_value_t = StrategyArg::Expand)]
    pub strategy: StrategyArg,
    /// External solver command line; reads the script on stdin.
    #[arg(long, value_name = "STR")]
    pub solver_cmd: Option<String>,
    #[arg(long, value_enum, default_value_t = Form::Quantified)]
    pub smt_form: Form,
    #[arg(long, value_name = "SECS", default_value_t = 60)]
    pub solver_timeout: u64,
    #[arg(long, value_name = "FILE")]
    pub predicate_map: Option<PathBuf>,
    /// `linear`, `linear-int`, `const`, `const-int`, or a JSON file mapping
    /// locations (`*` for the rest) to template specs.
    #[arg(long, value_name = "NAME")]
    pub template: Option<String>,
    /// Members of each concrete statement set to enumerate.
    #[arg(long, default_value_t = 1)]
    pub models: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Expand,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Quantified,
    Expanded,
}

/// How a command ended; [`Status::code`] is the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// The program is not partially correct, or the proof does not check.
    Violated,
    Unrepairable,
    InputError,
    SolverFailure,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Violated => 1,
            Status::Unrepairable => 2,
            Status::InputError => 3,
            Status::SolverFailure => 4,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub text: String,
    pub json: Value,
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: anyhow::Error,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

fn input(error: anyhow::Error) -> Failure {
    Failure {
        status: Status::InputError,
        error,
    }
}

fn repair_failure(e: RepairError) -> Failure {
    let status = match e {
        RepairError::Cfg(_) | RepairError::InvalidCutSet(_) => Status::InputError,
        _ => Status::SolverFailure,
    };
    Failure {
        status,
        error: anyhow::Error::new(e).context("repair"),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(input)
}

pub fn load_program(path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    parse_program(&text).map_err(|d| input(anyhow!("parse: {}", d.render(&path.display().to_string()))))
}

impl Common {
    fn oracle(&self) -> OracleOptions {
        OracleOptions {
            bounds: Bounds {
                max_depth: self.oracle_depth,
                ..Bounds::default()
            },
            strict_stuck: self.strict_stuck,
        }
    }
}

impl RepairArgs {
    fn cost_model(&self) -> Result<CostModel, Failure> {
        match &self.cost_model {
            None => Ok(CostModel::default()),
            Some(p) => CostModel::from_json(&read(p)?)
                .with_context(|| format!("cost model {}", p.display()))
                .map_err(input),
        }
    }

    fn options(&self) -> Result<RepairOptions, Failure> {
        let strategy = match self.strategy {
            StrategyArg::Expand => Strategy::Expand,
            StrategyArg::External => Strategy::External,
        };
        let mut solver = SolverConfig {
            timeout: Duration::from_secs(self.solver_timeout),
            ..SolverConfig::default()
        };
        match (&self.solver_cmd, strategy) {
            (Some(cmd), _) => solver.command = cmd.split_whitespace().map(String::from).collect(),
            (None, Strategy::External) => {
                return Err(input(anyhow!("the external strategy needs --solver-cmd")));
            }
            (None, Strategy::Expand) => {}
        }
        Ok(RepairOptions {
            strategy,
            smt_form: match self.smt_form {
                Form::Quantified => SmtForm::Quantified,
                Form::Expanded => SmtForm::Expanded,
            },
            space: SpaceOptions::default(),
            solver,
        })
    }

    fn predicate_map(&self) -> Result<Option<PredicateMap<Rational>>, Failure> {
        let Some(p) = &self.predicate_map else { return Ok(None) };
        PredicateMap::from_json(&read(p)?)
            .with_context(|| format!("predicate map {}", p.display()))
            .map(Some)
            .map_err(input)
    }

    fn concretize_options(&self) -> Result<ConcretizeOptions<Rational>, Failure> {
        let mut opts = ConcretizeOptions {
            models: self.models,
            ..ConcretizeOptions::default()
        };
        let Some(t) = &self.template else { return Ok(opts) };
        if let Some(named) = Template::named(t) {
            opts.template = Some(named);
            return Ok(opts);
        }
        let text = read(Path::new(t))?;
        let value: Value = serde_json::from_str(&text)
            .with_context(|| format!("template file {t}"))
            .map_err(input)?;
        let spec_keys = ["vars", "fixed", "constant", "integer"];
        let specs: BTreeMap<String, TemplateSpec> =
            if value.as_object().is_some_and(|o| o.keys().any(|k| spec_keys.contains(&k.as_str()))) {
                [("*".to_string(), serde_json::from_value(value).map_err(|e| input(e.into()))?)].into()
            } else {
                serde_json::from_value(value).map_err(|e| input(e.into()))?
            };
        for (loc, spec) in specs {
            let t = Template::from_spec(&spec)
                .with_context(|| format!("template for {loc}"))
                .map_err(input)?;
            if loc == "*" {
                opts.template = Some(t);
            } else {
                opts.per_location.insert(loc, t);
            }
        }
        Ok(opts)
    }
}

/// Run one command. Artifacts go to `--out` when given.
pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let (outcome, out) = match &cli.command {
        Command::Parse(c) => (cmd_parse(c)?, &c.out),
        Command::Graph(c) => (cmd_graph(c)?, &c.out),
        Command::Run(c) => (cmd_run(c)?, &c.out),
        Command::Verify { common, proof } => (cmd_verify(common, proof)?, &common.out),
        Command::Repair(a) => (cmd_repair(a, false)?, &a.common.out),
        Command::Concretize(a) => (cmd_repair(a, true)?, &a.common.out),
        Command::EmitSmt { job, form, at } => (cmd_emit_smt(job, *form, at.as_deref())?, &job.common.out),
    };
    if let Some(dir) = out {
        write(dir, "report.txt", &outcome.text)?;
        let json = serde_json::to_string_pretty(&outcome.json).expect("report serializes");
        write(dir, "report.json", &json)?;
    }
    Ok(outcome)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, text))
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(input)?;
    Ok(path)
}

/// Write an artifact if `--out` was given, returning its path.
fn artifact(out: &Option<PathBuf>, name: &str, text: &str) -> Result<Option<String>, Failure> {
    match out {
        Some(dir) => Ok(Some(write(dir, name, text)?.display().to_string())),
        None => Ok(None),
    }
}

pub fn cmd_parse(c: &Common) -> Result<Outcome, Failure> {
    let p = load_program(&c.program)?;
    let text = bprepair::lang::pretty_print(&p);
    let json = json!({
        "command": "parse",
        "program": c.program.display().to_string(),
        "globals": p.globals,
        "procedures": p.procedures.iter().map(|q| q.name.clone()).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        status: Status::Success,
        text,
        json,
    })
}

pub fn cmd_graph(c: &Common) -> Result<Outcome, Failure> {
    let p = load_program(&c.program)?;
    let g = build_transition_graph(&p).context("graph").map_err(input)?;
    let cut = compute_cutset(&g);
    let paths = enumerate_verification_paths(&g, &cut, SpaceOptions::default().path_cap)
        .context("graph")
        .map_err(input)?;
    let dot = to_dot(&g, Some(&cut));
    let dot_path = artifact(&c.out, "graph.dot", &dot)?;
    let json = json!({
        "command": "graph",
        "program": c.program.display().to_string(),
        "nodes": g.nodes.len(),
        "edges": g.edges.len(),
        "cutpoints": cut.points.iter().map(|&n| g.nodes[n].name.clone()).collect::<Vec<_>>(),
        "paths": paths.iter().map(|pi| pi.describe(&g)).collect::<Vec<_>>(),
        "artifacts": dot_path.into_iter().collect::<Vec<_>>(),
    });
    Ok(Outcome {
        status: Status::Success,
        text: dot,
        json,
    })
}

pub fn cmd_run(c: &Common) -> Result<Outcome, Failure> {
    let p = load_program(&c.program)?;
    let verdict = check_partial_correctness(&p, &c.oracle()).context("run").map_err(input)?;
    let mut text = format!("{}: {verdict}\n", c.program.display());
    let witness = match &verdict {
        Verdict::ErrorReached(t) | Verdict::StuckReached(t) => {
            let m = bprepair::semantics::Machine::new(&p).expect("already built");
            let lines: Vec<String> = t.iter().map(|cfg| m.render(cfg)).collect();
            for l in &lines {
                text += &format!("  {l}\n");
            }
            lines
        }
        _ => Vec::new(),
    };
    let status = match verdict {
        Verdict::PartiallyCorrect => Status::Success,
        Verdict::BoundExceeded => Status::SolverFailure,
        _ => Status::Violated,
    };
    let json = json!({
        "command": "run",
        "program": c.program.display().to_string(),
        "verdict": verdict.to_string(),
        "trace": witness,
    });
    Ok(Outcome { status, text, json })
}

/// Reads either a flat `{node: expr}` map or a report with an `assertions` field.
pub fn load_proof(path: &Path) -> Result<BTreeMap<String, BoolExpr>, Failure> {
    let value: Value = serde_json::from_str(&read(path)?)
        .with_context(|| format!("proof {}", path.display()))
        .map_err(input)?;
    let map = value.get("assertions").cloned().unwrap_or(value);
    let raw: BTreeMap<String, String> = serde_json::from_value(map)
        .with_context(|| format!("proof {}: expected a map from node to expression", path.display()))
        .map_err(input)?;
    raw.into_iter()
        .map(|(k, e)| {
            parse_expr(&e)
                .map(|x| (k.clone(), x))
                .map_err(|d| input(anyhow!("proof {}: assertion at {k}: {}", path.display(), d.message)))
        })
        .collect()
}

pub fn cmd_verify(c: &Common, proof: &Path) -> Result<Outcome, Failure> {
    let p = load_program(&c.program)?;
    let assertions = load_proof(proof)?;
    let (status, verdict) = match check_proof(&p, &assertions) {
        Ok(()) => (Status::Success, "valid".to_string()),
        Err(bprepair::repair::ProofError::Failed { path, reason, state }) => {
            (Status::Violated, format!("invalid: {reason} on {path} (state {state})"))
        }
        Err(e) => return Err(input(anyhow::Error::new(e).context("verify"))),
    };
    Ok(Outcome {
        status,
        text: format!("{}: {verdict}\n", c.program.display()),
        json: json!({
            "command": "verify",
            "program": c.program.display().to_string(),
            "proof": proof.display().to_string(),
            "verdict": verdict,
        }),
    })
}

pub fn cmd_repair(a: &RepairArgs, concretize: bool) -> Result<Outcome, Failure> {
    let p = load_program(&a.common.program)?;
    let cm = a.cost_model()?;
    let opts = a.options()?;
    let gm = a.predicate_map()?;
    if concretize && gm.is_none() {
        return Err(input(anyhow!("concretize needs --predicate-map")));
    }
    if let Some(gm) = &gm {
        gm.check_program(&p).context("predicate map").map_err(input)?;
    }
    let copts = a.concretize_options()?;
    let cap = a.budget_cap.unwrap_or(a.budget).max(a.budget);
    let run = repair_with_budget(&p, &cm, a.budget, cap, a.minimal, &opts).map_err(repair_failure)?;

    let mut json = json!({
        "command": if concretize { "concretize" } else { "repair" },
        "program": a.common.program.display().to_string(),
        "strategy": format!("{:?}", opts.strategy).to_lowercase(),
        "budgets_tried": run.attempts.iter().map(|t| t.budget).collect::<Vec<_>>(),
        "attempts": run.attempts.iter().map(report::attempt_json).collect::<Vec<_>>(),
        "query_ms": report::ms(run.query_time()),
        "solve_ms": report::ms(run.solve_time()),
    });
    let mut text = format!(
        "{}: budgets tried {:?}; query {:.3} ms, solve {:.3} ms\n",
        a.common.program.display(),
        run.attempts.iter().map(|t| t.budget).collect::<Vec<_>>(),
        report::ms(run.query_time()),
        report::ms(run.solve_time())
    );
    let Some(sol) = run.solution else {
        text += &format!("unrepairable within budget {cap}\n");
        json["verdict"] = json!("unrepairable");
        return Ok(Outcome {
            status: Status::Unrepairable,
            text,
            json,
        });
    };
    json["verdict"] = json!("repaired");
    report::merge(&mut json, solution_json(&sol));
    text += &solution_text(&sol);

    let out = &a.common.out;
    let mut artifacts = Vec::new();
    artifacts.extend(artifact(out, "repaired.bp", &bprepair::lang::pretty_print(&sol.program))?);
    let proof: BTreeMap<&String, String> = sol.assertions.iter().map(|(k, v)| (k, v.to_string())).collect();
    let proof_text = serde_json::to_string_pretty(&proof).expect("proof serializes");
    artifacts.extend(artifact(out, "proof.json", &proof_text)?);
    artifacts.extend(artifact(out, "diff.txt", &report::diff_text(&sol))?);

    if let Some(gm) = &gm {
        let rep = concretize_solution(&sol, gm, &copts)
            .context("concretize")
            .map_err(input)?;
        json["concretization"] = concretization_json(&rep);
        text += &concretization_text(&rep);
    }
    json["artifacts"] = json!(artifacts);
    Ok(Outcome {
        status: Status::Success,
        text,
        json,
    })
}

pub fn cmd_emit_smt(a: &RepairArgs, form: Form, at: Option<&str>) -> Result<Outcome, Failure> {
    let p = load_program(&a.common.program)?;
    let script = match at {
        None => {
            let cm = a.cost_model()?.with_budget(a.budget);
            let space = RepairSpace::new(&p, &cm, &SpaceOptions::default()).map_err(repair_failure)?;
            match form {
                Form::Quantified => emit_quantified(&build_repairability_formula(&space)),
                Form::Expanded => emit_expanded(&encode(&space)),
            }
        }
        Some(loc) => {
            let gm = a
                .predicate_map()?
                .ok_or_else(|| input(anyhow!("--at needs --predicate-map")))?;
            let stmt = statement_at(&p, loc).ok_or_else(|| input(anyhow!("no statement at {loc}")))?;
            let copts = a.concretize_options()?;
            let t = copts.per_location.get(loc).or(copts.template.as_ref());
            let linear = Template::linear();
            let emitted = match stmt {
                Statement::Assign { targets, values } => emit_assign_query(targets, values, &gm, t),
                Statement::Assume(g) => emit_guard_query(g, &gm, t.unwrap_or(&linear)),
                s if s.branch_guard().is_some() => {
                    emit_guard_query(s.branch_guard().unwrap(), &gm, t.unwrap_or(&linear))
                }
                other => {
                    return Err(input(anyhow!(
                        "no concretization query for `{}`",
                        bprepair::lang::stmt_summary(other)
                    )))
                }
            };
            emitted.context("emit-smt").map_err(input)?
        }
    };
    let path = artifact(&a.common.out, "query.smt2", &script)?;
    Ok(Outcome {
        status: Status::Success,
        json: json!({
            "command": "emit-smt",
            "program": a.common.program.display().to_string(),
            "budget": a.budget,
            "location": at,
            "artifacts": path.into_iter().collect::<Vec<_>>(),
        }),
        text: script,
    })
}
