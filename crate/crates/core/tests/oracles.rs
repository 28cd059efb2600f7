//! The SAT-based engine against the exhaustive search and the interpreter.

use bprepair::brute::{brute_force_repair, TableSearch};
use bprepair::gen::{mutant_corpus, GenConfig};
use bprepair::lang::pretty_print;
use bprepair::repair::{check_proof, solve_repair, CostModel, RepairOptions};
use bprepair::repair::UpdateSchema;
use bprepair::semantics::{check_partial_correctness, OracleOptions};

fn cost_models() -> Vec<(u32, CostModel)> {
    let mut out = Vec::new();
    for budget in 0..=2 {
        out.push((budget, CostModel::default().with_budget(budget)));
        for only in [UpdateSchema::AssumeToAssume, UpdateSchema::AssignToSkip] {
            out.push((budget, CostModel::default().enable_only(&[only]).with_budget(budget)));
        }
    }
    out
}

#[test]
fn engine_agrees_with_exhaustive_search() {
    let cfg = GenConfig {
        vars: 3,
        statements: 10,
        loops: 1,
        nondeterminism: true,
    };
    let mut repaired = 0;
    let mut unrepairable = 0;
    for (i, (_, m)) in mutant_corpus(7, 40, &cfg).into_iter().enumerate() {
        for (budget, cm) in cost_models() {
            let (sol, _) = solve_repair(&m, &cm, &RepairOptions::default()).unwrap();
            let brute = brute_force_repair(&m, &cm, TableSearch::Game).expect("search finishes");
            assert_eq!(
                sol.is_some(),
                brute.update.is_some(),
                "program {i} at budget {budget}:\n{}\nbrute: {:?}",
                pretty_print(&m),
                brute.update
            );
            if let Some(s) = sol {
                repaired += 1;
                check_proof(&s.program, &s.assertions).unwrap();
                assert!(check_partial_correctness(&s.program, &OracleOptions::default()).unwrap().is_correct());
                assert!(s.total_cost <= budget);
            } else {
                unrepairable += 1;
            }
        }
    }
    println!("repaired {repaired}, unrepairable {unrepairable}");
}

#[test]
fn game_search_matches_table_enumeration() {
    let cfg = GenConfig {
        vars: 2,
        statements: 7,
        loops: 1,
        nondeterminism: true,
    };
    let mut decided = 0;
    for (_, m) in mutant_corpus(11, 40, &cfg) {
        for budget in 0..=2 {
            let cm = CostModel::default().with_budget(budget);
            let game = brute_force_repair(&m, &cm, TableSearch::Game).unwrap();
            if let Some(e) = brute_force_repair(&m, &cm, TableSearch::Enumerate { max_steps: 100_000 }) {
                assert_eq!(game.update.is_some(), e.update.is_some(), "{}", pretty_print(&m));
                decided += 1;
            }
        }
    }
    assert!(decided >= 100, "only {decided} instances enumerated to completion");
}
