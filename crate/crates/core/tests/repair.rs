use bprepair::lang::parse_program;
use bprepair::repair::{repair_with_budget, solve_repair, CostModel, RepairOptions, UpdateSchema};
use bprepair::semantics::{check_partial_correctness, OracleOptions};

const FIG1: &str = include_str!("../../../samples/fig1.bp");

fn fig1_costs(budget: u32) -> CostModel {
    CostModel::default()
        .enable_only(&[UpdateSchema::AssignToAssign, UpdateSchema::AssumeToAssume])
        .with_budget(budget)
}

#[test]
fn fig1_needs_two_guard_changes() {
    let p = parse_program(FIG1).unwrap();
    let opts = RepairOptions::default();
    let (none, _) = solve_repair(&p, &fig1_costs(1), &opts).unwrap();
    assert!(none.is_none());
    let (sol, _) = solve_repair(&p, &fig1_costs(2), &opts).unwrap();
    let sol = sol.expect("repairable at budget 2");
    assert_eq!(sol.count(UpdateSchema::AssumeToAssume), 2);
    assert_eq!(sol.count(UpdateSchema::AssignToAssign), 0);
    assert_eq!(sol.total_cost, 2);
    for m in &sol.modified {
        println!("{}: {} -> {}", m.location, m.before, m.after);
    }
    for (k, v) in &sol.assertions {
        println!("I[{k}] = {v}");
    }
    assert!(check_partial_correctness(&sol.program, &OracleOptions::default()).unwrap().is_correct());
}

#[test]
fn budget_iteration_stops_at_two() {
    let p = parse_program(FIG1).unwrap();
    let run = repair_with_budget(&p, &fig1_costs(0), 1, 3, false, &RepairOptions::default()).unwrap();
    let budgets: Vec<u32> = run.attempts.iter().map(|a| a.budget).collect();
    assert_eq!(budgets, [1, 2]);
    assert!(run.solution.is_some());
}

mod symbolic {
    use super::*;
    use bprepair::repair::crc::build_repairability_formula;
    use bprepair::repair::{solve_space, RepairSpace, SpaceOptions, SmtForm, Strategy};

    #[test]
    fn expand_model_satisfies_quantified_constraints() {
        let p = parse_program(FIG1).unwrap();
        let space = RepairSpace::new(&p, &fig1_costs(2), &SpaceOptions::default()).unwrap();
        let (model, _) = solve_space(&space, &RepairOptions::default()).unwrap();
        let model = model.unwrap();
        let problem = build_repairability_formula(&space);
        problem.check_model(&space, &model, 20).unwrap();
    }

    #[test]
    fn external_quantified_and_expanded() {
        if std::process::Command::new("z3").arg("-version").output().is_err() {
            eprintln!("z3 not found; skipping");
            return;
        }
        let p = parse_program(FIG1).unwrap();
        for form in [SmtForm::Quantified, SmtForm::Expanded] {
            let opts = RepairOptions {
                strategy: Strategy::External,
                smt_form: form,
                ..Default::default()
            };
            let (none, _) = solve_repair(&p, &fig1_costs(1), &opts).unwrap();
            assert!(none.is_none(), "{form:?}");
            let (sol, _) = solve_repair(&p, &fig1_costs(2), &opts).unwrap();
            let sol = sol.unwrap();
            for m in &sol.modified {
                println!("{form:?} {}: {} -> {}", m.location, m.before, m.after);
            }
            assert_eq!(sol.count(UpdateSchema::AssumeToAssume), 2);
        }
    }
}

mod pieces {
    use super::*;
    use bprepair::lang::eval_with;
    use bprepair::repair::sp::{sp, Effect, PathAssertion, Rhs};
    use bprepair::repair::term::{CopyVar, Term, TermEnv};
    use bprepair::repair::{check_proof, synthesize, ProofError};
    use proptest::prelude::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn vars(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("b{i}")).collect()
    }

    #[test]
    fn or_table_synthesizes_to_or() {
        let e = synthesize(&[false, true, true, true], &vars(2));
        for row in 0..4u32 {
            let v = eval_with(&e, &|n| Some(row >> (n[1..].parse::<u32>().unwrap()) & 1 == 1)).unwrap();
            assert_eq!(v, row != 0, "{e}");
        }
    }

    proptest! {
        #[test]
        fn synthesis_reproduces_table(bits in proptest::collection::vec(any::<bool>(), 8)) {
            let e = synthesize(&bits, &vars(3));
            for (row, want) in bits.iter().enumerate() {
                let got = eval_with(&e, &|n| Some(row >> n[1..].parse::<usize>().unwrap() & 1 == 1)).unwrap();
                prop_assert_eq!(got, *want);
            }
        }
    }

    /// Interprets copy `k` variables from a vector of valuations, one per copy.
    struct Copies(Vec<u32>);

    impl TermEnv for Copies {
        fn var(&self, v: &CopyVar) -> bool {
            self.0[v.copy] >> v.var[1..].parse::<u32>().unwrap() & 1 == 1
        }
        fn apply(&self, _: &str, _: &[bool]) -> bool {
            unreachable!()
        }
        fn sel(&self, _: &str) -> bool {
            unreachable!()
        }
    }

    /// Final states admitted by `a` over `n` vars, enumerating intermediate copies.
    fn image(a: &PathAssertion, n: usize) -> BTreeSet<u32> {
        let rows = 1u32 << n;
        let mut out = BTreeSet::new();
        let mut copies = vec![0u32; a.copy + 1];
        loop {
            if a.to_term().eval(&Copies(copies.clone())) {
                out.insert(copies[a.copy]);
            }
            let mut i = 0;
            loop {
                if i == copies.len() {
                    return out;
                }
                copies[i] += 1;
                if copies[i] < rows {
                    break;
                }
                copies[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn havoc_of_all_vars_reaches_everything() {
        let vs = vars(3);
        let start = PathAssertion::start(vs.clone(), Term::var("b0", 0));
        let havoc = Effect::Assign(vs.iter().map(|v| (v.clone(), Rhs::Star)).collect());
        let a = sp(&havoc, &start);
        assert!(a.is_normal());
        assert_eq!(image(&a, 3), (0..8).collect());
    }

    fn effect(n: usize) -> impl Strategy<Value = Effect> {
        let lit = (0..n, any::<bool>()).prop_map(|(i, neg)| {
            let t = Term::var(format!("b{i}"), 0);
            if neg {
                Term::not(t)
            } else {
                t
            }
        });
        let rhs = prop_oneof![
            lit.clone().prop_map(Rhs::Det),
            Just(Rhs::Star),
            (lit.clone(), lit.clone()).prop_map(|(a, b)| Rhs::Choose(a, b)),
        ];
        prop_oneof![
            Just(Effect::Frame),
            lit.prop_map(Effect::Assume),
            proptest::collection::btree_map(0..n, rhs, 1..=n)
                .prop_map(|m| Effect::Assign(m.into_iter().map(|(i, r)| (format!("b{i}"), r)).collect())),
        ]
    }

    /// Rewrites an effect written over copy 0 to read copy `k`.
    fn at_copy(e: &Effect, k: usize) -> Effect {
        fn t(x: &Term, k: usize) -> Term {
            match x {
                Term::Var(v) => Term::var(v.var.clone(), k),
                Term::Not(a) => Term::not(t(a, k)),
                other => other.clone(),
            }
        }
        let r = |x: &Rhs| match x {
            Rhs::Det(a) => Rhs::Det(t(a, k)),
            Rhs::Star => Rhs::Star,
            Rhs::Choose(a, b) => Rhs::Choose(t(a, k), t(b, k)),
        };
        match e {
            Effect::Frame => Effect::Frame,
            Effect::Assume(g) => Effect::Assume(t(g, k)),
            Effect::Assign(items) => Effect::Assign(items.iter().map(|(v, x)| (v.clone(), r(x))).collect()),
        }
    }

    /// Concrete successors of one state under one effect.
    fn step(e: &Effect, s: u32) -> BTreeSet<u32> {
        let val = |x: &Term| x.eval(&Copies(vec![s]));
        match e {
            Effect::Frame => [s].into(),
            Effect::Assume(g) => if val(g) { [s].into() } else { BTreeSet::new() },
            Effect::Assign(items) => {
                let mut out: BTreeSet<u32> = [s].into();
                for (v, x) in items {
                    let bit = 1 << v[1..].parse::<u32>().unwrap();
                    let choices: Vec<bool> = match x {
                        Rhs::Det(a) => vec![val(a)],
                        Rhs::Star => vec![true, false],
                        Rhs::Choose(a, b) => match (val(a), val(b)) {
                            (true, _) => vec![true],
                            (false, true) => vec![false],
                            (false, false) => vec![true, false],
                        },
                    };
                    out = out
                        .iter()
                        .flat_map(|&o| choices.iter().map(move |&c| if c { o | bit } else { o & !bit }))
                        .collect();
                }
                out
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sp_matches_concrete_image(init in 0u32..8, effs in proptest::collection::vec(effect(3), 1..=2)) {
            let vs = vars(3);
            let start_term = Term::and((0..3).map(|i| {
                let t = Term::var(format!("b{i}"), 0);
                if init >> i & 1 == 1 { t } else { Term::not(t) }
            }));
            let mut a = PathAssertion::start(vs, start_term);
            let mut states: BTreeSet<u32> = [init].into();
            for (k, e) in effs.iter().enumerate() {
                a = sp(&at_copy(e, k), &a);
                prop_assert!(a.is_normal());
                states = states.iter().flat_map(|&s| step(e, s)).collect();
            }
            prop_assert_eq!(image(&a, 3), states);
        }
    }

    #[test]
    fn trivial_assertions_do_not_prove_a_buggy_program() {
        let p = parse_program("decl a; main() begin l1: a := *; l2: assert(a); end").unwrap();
        let inv: BTreeMap<String, BoolExpr> =
            [("l1", BoolExpr::Const(true)), ("l2", BoolExpr::Const(true)), ("exit", BoolExpr::Const(true))]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
        assert!(matches!(check_proof(&p, &inv), Err(ProofError::Failed { .. })));
        let mut missing = inv.clone();
        missing.remove("l1");
        assert!(check_proof(&p, &missing).is_err());
    }

    use bprepair::lang::BoolExpr;
}

#[test]
fn zero_budget_keeps_a_correct_program() {
    let p = parse_program("decl a, b; main() begin l1: a := b; l2: assume(a); l3: assert(b); end").unwrap();
    let (sol, _) = solve_repair(&p, &CostModel::default().with_budget(0), &RepairOptions::default()).unwrap();
    let sol = sol.unwrap();
    assert_eq!(sol.changes(), 0);
    assert!(sol.update.values().all(|u| *u == UpdateSchema::Id));
    assert_eq!(sol.program, p);
}

#[test]
fn repaired_program_needs_no_further_repair() {
    let p = parse_program(FIG1).unwrap();
    let (sol, _) = solve_repair(&p, &fig1_costs(2), &RepairOptions::default()).unwrap();
    let again = sol.unwrap().program;
    let (sol2, _) = solve_repair(&again, &fig1_costs(0), &RepairOptions::default()).unwrap();
    assert_eq!(sol2.unwrap().changes(), 0);
}

const CALLS: &str = "decl g;
main() begin
  l1: g := false;
  l2: call f(true);
  l3: assert(g);
end
f(x) begin
  m1: g := !x;
end";

#[test]
fn repairs_through_a_call() {
    let p = parse_program(CALLS).unwrap();
    assert!(!check_partial_correctness(&p, &OracleOptions::default()).unwrap().is_correct());
    let (none, _) = solve_repair(&p, &CostModel::default().with_budget(0), &RepairOptions::default()).unwrap();
    assert!(none.is_none());
    let (sol, _) = solve_repair(&p, &CostModel::default().with_budget(1), &RepairOptions::default()).unwrap();
    let sol = sol.expect("one change suffices");
    assert_eq!(sol.total_cost, 1);
    assert!(check_partial_correctness(&sol.program, &OracleOptions::default()).unwrap().is_correct());
    bprepair::repair::check_proof(&sol.program, &sol.assertions).unwrap();
    assert!(sol.assertions.keys().any(|k| k.starts_with("f.")));
}
