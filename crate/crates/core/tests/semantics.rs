use std::collections::HashSet;

use bprepair::lang::parse_program;
use bprepair::semantics::*;

const FIG1: &str = include_str!("../../../samples/fig1.bp");
const FIG1_REPAIRED: &str = include_str!("../../../samples/fig1_repaired.bp");

fn machine(src: &str) -> Machine {
    Machine::new(&parse_program(src).unwrap()).unwrap()
}

fn config(m: &Machine, node: &str, vals: &[(&str, bool)]) -> Config {
    let bits = vals.iter().fold(0u64, |b, (v, x)| {
        if *x {
            b | 1 << m.var_index(v).unwrap()
        } else {
            b
        }
    });
    Config {
        node: m.graph.node_by_name(node).unwrap(),
        bits,
        stack: Vec::new(),
    }
}

#[test]
fn failing_assert_steps_to_err() {
    let m = machine(FIG1);
    let c = config(&m, "l7", &[("b0", true)]);
    let succ = m.step(&c);
    assert_eq!(succ.len(), 1);
    assert_eq!(succ[0].node, m.graph.err);
    let c = config(&m, "l7", &[("b0", false)]);
    assert_eq!(m.graph.nodes[m.step(&c)[0].node].name, "exit");
}

#[test]
fn skip_has_single_successor() {
    let m = machine("decl a; main() begin l1: skip; l2: skip; end");
    for a in [false, true] {
        let c = config(&m, "l1", &[("a", a)]);
        let succ = m.step(&c);
        assert_eq!(succ, vec![config(&m, "l2", &[("a", a)])]);
    }
}

#[test]
fn havoc_assignment_has_two_successors() {
    let m = machine("decl a, b; main() begin l1: a := *; l2: skip; end");
    for bits in 0..4u64 {
        let c = Config {
            node: m.graph.node_by_name("l1").unwrap(),
            bits,
            stack: vec![],
        };
        let succ = m.step(&c);
        assert_eq!(succ.len(), 2);
        let b_bit = 1 << m.var_index("b").unwrap();
        assert!(succ.iter().all(|s| s.bits & b_bit == bits & b_bit));
        assert_ne!(succ[0].bits, succ[1].bits);
    }
}

#[test]
fn parallel_assignment_reads_old_values() {
    let m = machine("decl a, b; main() begin l1: a, b := b, a; l2: skip; end");
    let c = config(&m, "l1", &[("a", true), ("b", false)]);
    assert_eq!(m.step(&c), vec![config(&m, "l2", &[("a", false), ("b", true)])]);
}

#[test]
fn loop_example_reaches_error_through_l5() {
    let m = machine(FIG1);
    let Verdict::ErrorReached(trace) = m.check(&OracleOptions::default()) else {
        panic!("expected a counterexample");
    };
    let names: Vec<&str> = trace.iter().map(|c| m.graph.nodes[c.node].name.as_str()).collect();
    assert_eq!(names, vec!["l1", "l5", "l7", "err"]);
    let v = m.valuation(&trace[0]);
    assert_eq!((v["b0"], v["b1"], v["b2"]), (true, false, false));
    // The counterexample replays under step.
    for w in trace.windows(2) {
        assert!(m.step(&w[0]).contains(&w[1]));
    }
}

#[test]
fn repaired_loop_example_is_correct() {
    let m = machine(FIG1_REPAIRED);
    assert_eq!(m.check(&OracleOptions::default()), Verdict::PartiallyCorrect);
}

#[test]
fn trivial_assert_is_correct_at_any_bound() {
    let p = parse_program("main() begin assert(true); end").unwrap();
    for depth in [0, 1, 5] {
        let opts = OracleOptions {
            bounds: Bounds {
                max_depth: depth,
                ..Bounds::default()
            },
            ..OracleOptions::default()
        };
        let v = check_partial_correctness(&p, &opts).unwrap();
        assert!(v == Verdict::PartiallyCorrect || (depth == 0 && v == Verdict::BoundExceeded));
    }
    assert!(check_partial_correctness(&p, &OracleOptions::default())
        .unwrap()
        .is_correct());
}

#[test]
fn blocked_executions_only_count_in_strict_mode() {
    let p = parse_program("decl a; main() begin assume(a); assert(a); end").unwrap();
    let lax = check_partial_correctness(&p, &OracleOptions::default()).unwrap();
    assert_eq!(lax, Verdict::PartiallyCorrect);
    let strict = OracleOptions {
        strict_stuck: true,
        ..OracleOptions::default()
    };
    assert!(matches!(
        check_partial_correctness(&p, &strict).unwrap(),
        Verdict::StuckReached(_)
    ));
}

#[test]
fn calls_bind_formals_and_restore_locals() {
    let src = "decl g;
      main() begin
        decl t;
        l1: t := true;
        l2: call f(!g);
        l3: assert(t);
        l4: assert(g != old);
      end
      f(x) begin decl old; m1: g := x; end";
    // `old` is a local of f and is not visible in main.
    assert!(parse_program(src).is_err());
    let src = "decl g, h;
      main() begin
        decl t;
        l1: t, h := true, g;
        l2: call f(!g);
        l3: assert(t & (g != h));
      end
      f(x) begin decl u; m1: g, u := x, false; end";
    let m = machine(src);
    assert_eq!(m.check(&OracleOptions::default()), Verdict::PartiallyCorrect);
    let l2 = config(&m, "l2", &[("t", true)]);
    let succ = m.step(&l2);
    // the callee's non-formal local starts with either value
    assert_eq!(succ.len(), 2);
    assert!(succ.iter().all(|c| c.stack.len() == 1 && m.valuation(c)["x"]));
}

#[test]
fn unbounded_recursion_hits_stack_bound() {
    let src = "decl g; main() begin call f(); end f() begin if (*) then call f(); fi; end";
    let p = parse_program(src).unwrap();
    assert_eq!(
        check_partial_correctness(&p, &OracleOptions::default()).unwrap(),
        Verdict::BoundExceeded
    );
    let src = "decl g; main() begin call f(); assert(g); end
               f() begin if (*) then call f(); else g := false; fi; end";
    let p = parse_program(src).unwrap();
    assert!(matches!(
        check_partial_correctness(&p, &OracleOptions::default()).unwrap(),
        Verdict::ErrorReached(_)
    ));
}

#[test]
fn exploration_is_deterministic() {
    let m = machine(FIG1);
    let a = m.check(&OracleOptions::default());
    let b = machine(FIG1).check(&OracleOptions::default());
    assert_eq!(a, b);
}

#[test]
fn reachable_states_are_closed_under_step() {
    let m = machine(FIG1_REPAIRED);
    let opts = OracleOptions::default();
    let reach = m.reachable_states(&opts);
    let mut all: HashSet<(usize, u64)> = HashSet::new();
    for (n, set) in &reach {
        all.extend(set.iter().map(|&b| (*n, b)));
    }
    for &(node, bits) in &all {
        for s in m.step(&Config {
            node,
            bits,
            stack: vec![],
        }) {
            assert!(all.contains(&(s.node, s.bits)));
        }
    }
    assert!(!reach.contains_key(&m.graph.err));
}
