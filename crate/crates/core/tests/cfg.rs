use std::collections::BTreeSet;

use bprepair::cfg::*;
use bprepair::lang::parse_program;

const FIG1: &str = include_str!("../../../samples/fig1.bp");

fn names(g: &TransitionGraph, ns: impl IntoIterator<Item = NodeId>) -> Vec<String> {
    ns.into_iter().map(|n| g.nodes[n].name.clone()).collect()
}

#[test]
fn loop_example_graph_shape() {
    let p = parse_program(FIG1).unwrap();
    let g = build_transition_graph(&p).unwrap();
    assert_eq!(g.nodes.len(), 10);
    let mut got: Vec<String> = g
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            format!(
                "{} -[{}]-> {}",
                g.nodes[e.from].name,
                g.edge_text(i),
                g.nodes[e.to].name
            )
        })
        .collect();
    got.sort();
    let mut want = vec![
        "l1 -[assume(!b2)]-> l5",
        "l1 -[assume(b2)]-> l2",
        "l2 -[assume(true)]-> l0",
        "l2 -[assume(true)]-> l3",
        "l3 -[b0, b1, b2 := *, *, *]-> l4",
        "l4 -[goto]-> l2",
        "l0 -[goto]-> l7",
        "l5 -[assume(!b1)]-> l7",
        "l5 -[assume(b1)]-> l6",
        "l6 -[b0, b1, b2 := *, *, *]-> l7",
        "l7 -[assert(!b0)]-> exit",
        "l7 -[assume(b0)]-> err",
    ];
    want.sort();
    assert_eq!(got, want);
    assert_eq!(g.nodes[g.procs[0].entry].name, "l1");
}

#[test]
fn skip_program_graph() {
    let g = build_transition_graph(&parse_program("main() begin skip; end").unwrap()).unwrap();
    assert_eq!(g.nodes.len(), 3);
    assert_eq!(g.edges.len(), 1);
    assert_eq!(g.in_edges(g.err).len(), 0);
    let cut = compute_cutset(&g);
    assert_eq!(cut.points, BTreeSet::from([g.procs[0].entry, g.procs[0].exit]));
    let paths = enumerate_verification_paths(&g, &cut, DEFAULT_PATH_CAP).unwrap();
    assert_eq!(paths.len(), 1);
}

#[test]
fn loop_example_cutset_and_paths() {
    let g = build_transition_graph(&parse_program(FIG1).unwrap()).unwrap();
    let cut = compute_cutset(&g);
    assert_eq!(names(&g, cut.points.iter().copied()), vec!["l1", "l2", "l7", "exit"]);
    assert!(validate_cutset(&g, &cut).is_empty());
    let paths = enumerate_verification_paths(&g, &cut, DEFAULT_PATH_CAP).unwrap();
    let mut got: Vec<Vec<String>> = paths.iter().map(|p| names(&g, p.nodes(&g))).collect();
    got.sort();
    let mut want: Vec<Vec<String>> = [
        vec!["l1", "l2"],
        vec!["l2", "l3", "l4", "l2"],
        vec!["l2", "l0", "l7"],
        vec!["l1", "l5", "l7"],
        vec!["l1", "l5", "l6", "l7"],
        vec!["l7", "exit"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    want.sort();
    assert_eq!(got, want);
}

#[test]
fn cutset_validator_rejects_missing_points() {
    let g = build_transition_graph(&parse_program(FIG1).unwrap()).unwrap();
    let mut cut = compute_cutset(&g);
    cut.points.remove(&g.node_by_name("l2").unwrap());
    assert_eq!(validate_cutset(&g, &cut), vec!["some cycle contains no cut-point"]);
    cut.points.remove(&g.node_by_name("l7").unwrap());
    assert_eq!(validate_cutset(&g, &cut).len(), 2);
}

#[test]
fn structured_constructs_and_calls() {
    let src = "decl a;
      main() begin
        l1: while (a) do l2: call f(a); l3: skip; od;
        l4: if (*) then l5: a := false; else l6: return; fi;
        l7: assert(!a);
      end
      f(x) begin m1: a := x; end";
    let g = build_transition_graph(&parse_program(src).unwrap()).unwrap();
    // 7 main statements + 1 in f + 2 exits + err
    assert_eq!(g.nodes.len(), 11);
    let id = |n: &str| g.node_by_name(n).unwrap();
    let succ = |n: &str| -> Vec<String> {
        let mut v: Vec<String> = g
            .out_edges(id(n))
            .iter()
            .map(|&e| g.nodes[g.edges[e].to].name.clone())
            .collect();
        v.sort();
        v
    };
    assert_eq!(succ("l1"), vec!["l2", "l4"]);
    assert_eq!(succ("l3"), vec!["l1"]);
    assert_eq!(succ("l4"), vec!["l5", "l6"]);
    assert_eq!(succ("l6"), vec!["exit"]);
    assert_eq!(succ("f.m1"), vec!["f.exit"]);
    let cut = compute_cutset(&g);
    assert!(validate_cutset(&g, &cut).is_empty());
    // The loop is already cut by the call endpoints l2 and l3.
    assert_eq!(cut.points, mandatory_cutpoints(&g));
    let paths = enumerate_verification_paths(&g, &cut, DEFAULT_PATH_CAP).unwrap();
    assert!(paths.iter().any(|p| p.is_call(&g)));
    assert!(paths.iter().any(|p| p.is_assert(&g)));
}

#[test]
fn unreachable_statement_is_rejected() {
    let p = parse_program("main() begin return; l2: skip; end").unwrap();
    assert_eq!(
        build_transition_graph(&p).unwrap_err(),
        CfgError::Disconnected("l2".into())
    );
}

#[test]
fn path_cap_is_enforced() {
    // k sequential diamonds give 2^k paths between entry and exit.
    let mut body = String::new();
    for i in 0..6 {
        body.push_str(&format!("if (*) then a := true; else a := false; fi; // {i}\n"));
    }
    let src = format!("decl a; main() begin {body} end");
    let g = build_transition_graph(&parse_program(&src).unwrap()).unwrap();
    let cut = compute_cutset(&g);
    assert_eq!(enumerate_verification_paths(&g, &cut, 64).unwrap().len(), 64);
    assert!(matches!(
        enumerate_verification_paths(&g, &cut, 63),
        Err(CfgError::PathOverflow { cap: 63, .. })
    ));
}

#[test]
fn dot_output_lists_every_node() {
    let g = build_transition_graph(&parse_program(FIG1).unwrap()).unwrap();
    let dot = to_dot(&g, Some(&compute_cutset(&g)));
    assert_eq!(dot.lines().filter(|l| l.contains("\" [shape=")).count(), 10);
    assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 12);
}
