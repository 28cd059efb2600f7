use std::path::{Path, PathBuf};
use std::process::Command;

use bprepair::brute::{brute_force_repair, TableSearch};
use bprepair::lang::parse_program;
use bprepair::repair::CostModel;

const BIN: &str = env!("CARGO_BIN_EXE_bprepair");

fn samples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples")
}

fn fig1() -> String {
    samples().join("fig1.bp").display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn guards_only(dir: &Path) -> String {
    write(
        dir,
        "cm.json",
        r#"{"disabled_schemas": ["assign->skip", "call->call", "call->skip", "assume->skip"]}"#,
    )
}

fn bprepair(args: &[&str]) -> (i32, String, serde_json::Value) {
    let out_dir = tempfile::tempdir().unwrap();
    let out = out_dir.path().display().to_string();
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", &out]);
    let o = Command::new(BIN).args(&full).output().unwrap();
    let report = std::fs::read_to_string(out_dir.path().join("report.json"))
        .map(|t| serde_json::from_str(&t).unwrap())
        .unwrap_or(serde_json::Value::Null);
    let text = String::from_utf8_lossy(&o.stdout).to_string() + &String::from_utf8_lossy(&o.stderr);
    (o.status.code().unwrap(), text, report)
}

#[test]
fn graph_has_ten_nodes() {
    let (code, dot, report) = bprepair(&["graph", &fig1()]);
    assert_eq!(code, 0);
    assert_eq!(report["nodes"], 10);
    assert_eq!(dot.matches("shape=").count(), 11, "one line per node plus the default");
}

#[test]
fn fig1_repairs_at_two_with_two_guard_changes() {
    let dir = tempfile::tempdir().unwrap();
    let cm = guards_only(dir.path());
    let (code, text, r) = bprepair(&["repair", &fig1(), "--cost-model", &cm, "--budget", "1", "--budget-cap", "3"]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(r["budgets_tried"], serde_json::json!([1, 2]));
    assert_eq!(r["counts"]["asm"], 2);
    assert_eq!(r["counts"]["asg"], 0);
    assert_eq!(r["total_cost"], 2);
    // Counts reconcile with the modified statements and the exit cost.
    assert_eq!(r["modified"].as_array().unwrap().len(), 2);
    assert_eq!(r["boundary_costs"]["exit"], r["total_cost"]);
    assert_eq!(r["entries"][0]["assertion"], "true");
    assert_eq!(r["entries"][0]["cost"], 0);
}

#[test]
fn correct_program_needs_no_budget() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "ok.bp", "decl b;\nmain() begin\n  l1: b := true;\n  l2: assert(b);\nend\n");
    let (code, text, r) = bprepair(&["repair", &p, "--budget", "0"]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(r["budgets_tried"], serde_json::json!([0]));
    assert_eq!(r["modified"], serde_json::json!([]));
}

#[test]
fn unrepairable_reports_every_budget() {
    let dir = tempfile::tempdir().unwrap();
    let src = "decl b;\nmain() begin\n  l1: b := true;\n  l2: assert(false);\nend\n";
    let p = write(dir.path(), "bad.bp", src);
    let (code, _, r) = bprepair(&["repair", &p, "--budget", "0", "--budget-cap", "3"]);
    assert_eq!(code, 2);
    assert_eq!(r["verdict"], "unrepairable");
    assert_eq!(r["budgets_tried"], serde_json::json!([0, 1, 2, 3]));
    // The exhaustive search agrees nothing within the cap repairs it.
    let prog = parse_program(src).unwrap();
    let brute = brute_force_repair(&prog, &CostModel::default().with_budget(3), TableSearch::Game).unwrap();
    assert!(brute.update.is_none());
}

#[test]
fn repaired_output_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let cm = guards_only(dir.path());
    let out = dir.path().join("first");
    let out_s = out.display().to_string();
    let o = Command::new(BIN)
        .args(["repair", &fig1(), "--cost-model", &cm, "--budget-cap", "3", "--out", &out_s])
        .output()
        .unwrap();
    assert!(o.status.success());
    let repaired = out.join("repaired.bp").display().to_string();
    let (code, _, r) = bprepair(&["repair", &repaired, "--budget", "0"]);
    assert_eq!(code, 0);
    assert_eq!(r["total_cost"], 0);

    // The emitted proof checks against the emitted program.
    let proof = out.join("proof.json").display().to_string();
    let (code, text, _) = bprepair(&["verify", &repaired, "--proof", &proof]);
    assert_eq!(code, 0, "{text}");
    // ... and not against the original.
    let (code, _, _) = bprepair(&["verify", &fig1(), "--proof", &proof]);
    assert_eq!(code, 1);
}

#[test]
fn verify_straight_line_with_forward_assertions() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "line.bp",
        "decl a, b;\nmain() begin\n  l1: a := true;\n  l2: b := !a;\n  l3: assert(a & !b);\nend\n",
    );
    let proof = write(dir.path(), "proof.json", r#"{"l1": "true", "l3": "a & !b", "exit": "a & !b"}"#);
    let (code, text, r) = bprepair(&["verify", &p, "--proof", &proof]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(r["verdict"], "valid");
}

#[test]
fn input_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "broken.bp", "decl b;\nmain() begin\n  l1: b := ;\nend\n");
    let (code, text, _) = bprepair(&["parse", &p]);
    assert_eq!(code, 3);
    assert!(text.contains("error"), "{text}");
    let (code, _, _) = bprepair(&["repair", &fig1(), "--strategy", "external"]);
    assert_eq!(code, 3, "external strategy without a solver command");
    let (code, _, _) = bprepair(&["concretize", &fig1()]);
    assert_eq!(code, 3, "concretize without a predicate map");
}

#[test]
fn run_finds_the_violation() {
    let (code, text, r) = bprepair(&["run", &fig1()]);
    assert_eq!(code, 1);
    assert_eq!(r["verdict"], "error reachable");
    assert!(text.contains("err"));
    let (code, _, _) = bprepair(&["run", &samples().join("fig1_repaired.bp").display().to_string()]);
    assert_eq!(code, 0);
}

fn z3() -> Option<String> {
    let ok = Command::new("z3").arg("-version").output().is_ok_and(|o| o.status.success());
    ok.then(|| "z3 -in -smt2".to_string())
}

#[test]
fn emitted_script_is_sat_at_budget_two() {
    let Some(z3) = z3() else {
        eprintln!("z3 not found; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let cm = guards_only(dir.path());
    for form in ["quantified", "expanded"] {
        for (budget, want) in [("2", "sat"), ("1", "unsat")] {
            let (code, script, _) =
                bprepair(&["emit-smt", &fig1(), "--cost-model", &cm, "--budget", budget, "--form", form]);
            assert_eq!(code, 0);
            let path = write(dir.path(), "q.smt2", &script);
            let o = Command::new("z3").arg(&path).output().unwrap();
            let first = String::from_utf8_lossy(&o.stdout).lines().next().unwrap_or("").to_string();
            assert_eq!(first, want, "{form} at budget {budget}");
        }
    }
    // The external strategy agrees with the built-in one.
    let (code, text, r) = bprepair(&[
        "repair", &fig1(), "--cost-model", &cm, "--budget-cap", "3", "--strategy", "external", "--solver-cmd", &z3,
    ]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(r["total_cost"], 2);
}

#[test]
fn concretize_and_emit_concretization_queries() {
    let dir = tempfile::tempdir().unwrap();
    let cm = guards_only(dir.path());
    let gm = write(
        dir.path(),
        "gm.json",
        r#"{"variables": [{"name": "x", "sort": "int"}],
            "predicates": {"b0": "x <= 1", "b1": "x == 1", "b2": "x <= 0"}}"#,
    );
    let (code, text, r) = bprepair(&[
        "concretize", &fig1(), "--cost-model", &cm, "--budget-cap", "3", "--predicate-map", &gm,
    ]);
    assert_eq!(code, 0, "{text}");
    let changes = r["concretization"]["changes"].as_array().unwrap();
    assert_eq!(changes.len(), 2);
    assert!(changes.iter().all(|c| c["result"]["status"] == "found"));

    let guarded = write(dir.path(), "g.bp", "decl b0, b1, b2;\nmain() begin\n  l1: assume(b0);\n  l2: assert(b0);\nend\n");
    let (code, script, _) = bprepair(&["emit-smt", &guarded, "--predicate-map", &gm, "--at", "l1"]);
    assert_eq!(code, 0);
    assert!(script.contains("forall") && script.contains("(check-sat)"), "{script}");
    if z3().is_some() {
        let path = write(dir.path(), "g.smt2", &script);
        let o = Command::new("z3").arg(&path).output().unwrap();
        assert!(String::from_utf8_lossy(&o.stdout).starts_with("sat"));
    }
}
