use bprepair::lang::*;

const FIG1: &str = include_str!("../../../samples/fig1.bp");

fn vals(pairs: &[(&str, bool)]) -> Valuation {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn parses_loop_example() {
    let p = parse_program(FIG1).unwrap();
    assert_eq!(p.procedures.len(), 1);
    assert_eq!(p.globals, vec!["b0", "b1", "b2"]);
    assert_eq!(p.statement_count(), 8);
    let l1 = p.main().find(&"l1".into()).unwrap();
    assert_eq!(
        l1.stmt,
        Statement::IfGoto {
            guard: BoolExpr::not(BoolExpr::var("b2")),
            target: "l5".into()
        }
    );
}

#[test]
fn minimal_program() {
    let p = parse_program("main() begin skip; end").unwrap();
    assert_eq!(p.statement_count(), 1);
    assert_eq!(p.main().body[0].stmt, Statement::Skip);
    assert_eq!(p.main().body[0].label.as_str(), "l_auto_0");
}

#[test]
fn auto_labels_avoid_explicit_ones() {
    let p = parse_program("main() begin skip; l_auto_0: skip; end").unwrap();
    let labels: Vec<_> = p.main().body.iter().map(|s| s.label.as_str()).collect();
    assert_eq!(labels, vec!["l_auto_1", "l_auto_0"]);
}

#[test]
fn nondeterministic_assert_rejected() {
    let err = parse_program("main() begin assert(*); end").unwrap_err();
    assert!(err.has_code(DiagCode::NondeterministicAssertGuard));
}

#[test]
fn diagnostics_for_invariant_violations() {
    let cases: &[(&str, DiagCode)] = &[
        ("f() begin skip; end", DiagCode::MissingMain),
        ("main() begin call main(); end", DiagCode::MainCalled),
        ("decl a, a; main() begin skip; end", DiagCode::DuplicateName),
        ("decl a; main() begin decl a; skip; end", DiagCode::DuplicateName),
        ("main() begin x: skip; x: skip; end", DiagCode::DuplicateLabel),
        ("main() begin exit: skip; end", DiagCode::ReservedLabel),
        ("main() begin assume(q); end", DiagCode::UnknownVariable),
        ("main() begin call g(); end", DiagCode::UnknownProcedure),
        ("decl a; main() begin call g(a); end g() begin skip; end", DiagCode::ArityMismatch),
        ("decl a; main() begin a := true, false; end", DiagCode::AssignArityMismatch),
        ("decl a; main() begin a, a := true, false; end", DiagCode::DuplicateAssignTarget),
        ("decl a; main() begin assume(choose(a, a)); end", DiagCode::NondeterministicAssumeGuard),
        ("decl a; main() begin if (a | *) then skip; fi; end", DiagCode::NondeterministicGuard),
        ("decl a; main() begin a := !*; end", DiagCode::NondeterministicExpression),
        ("decl a; main() begin while (a) do a := false; od; end", DiagCode::LoopBodyNotSkip),
        ("main() begin goto nowhere; end", DiagCode::UnknownLabel),
        ("main() begin end", DiagCode::EmptyBody),
    ];
    for (src, code) in cases {
        let err = parse_program(src).expect_err(src);
        assert!(err.has_code(*code), "{src}: {err}");
    }
}

#[test]
fn syntax_error_position() {
    let err = parse_program("main() begin\n  skip\nend").unwrap_err();
    assert_eq!(err.0.len(), 1);
    let d = &err.0[0];
    assert_eq!(d.code, DiagCode::SyntaxError);
    assert_eq!((d.line, d.col), (3, 1));
    assert!(d.render("t.bp").starts_with("ERROR:t.bp:3:1:SyntaxError:"));
}

#[test]
fn then_goto_forms() {
    let p = parse_program(
        "decl a; main() begin
           l1: if (a) then goto l3;
           l2: if (a) then goto l3; fi;
           l3: skip;
         end",
    )
    .unwrap();
    assert!(matches!(p.main().body[0].stmt, Statement::IfGoto { .. }));
    assert!(matches!(p.main().body[1].stmt, Statement::If { .. }));
}

#[test]
fn round_trip_loop_example() {
    let p = parse_program(FIG1).unwrap();
    let text = pretty_print(&p);
    let q = parse_program(&text).unwrap();
    assert_eq!(p, q);
    assert_eq!(pretty_print(&q), text);
}

#[test]
fn round_trip_skip_program_is_byte_identical() {
    let text = pretty_print(&parse_program("main() begin skip; end").unwrap());
    assert_eq!(text, "main() begin\n  l_auto_0: skip;\nend\n");
    assert_eq!(pretty_print(&parse_program(&text).unwrap()), text);
}

#[test]
fn round_trip_nested_constructs() {
    let src = "decl a, b;
      main() begin
        decl t;
        l1: if (a) then
          l2: if (b) goto l5;
          l3: if (b) then l4: goto l5; fi;
        else
          l6: while (*) do t := choose(a, b => a); l7: skip; od;
        fi;
        l5: call f(a = b, (a | b) & !t);
        l8: a, b := *, a => (b => a);
      end
      f(x, y) begin assume(x != y); return; end";
    let p = parse_program(src).unwrap();
    assert_eq!(p, parse_program(&pretty_print(&p)).unwrap());
}

#[test]
fn expression_printing_is_minimal_and_faithful() {
    for src in [
        "a | b | c",
        "a | (b | c)",
        "(a => b) => c",
        "a => b => c",
        "!(a & b) = (c != a)",
        "!!a",
        "(a = b) = c",
    ] {
        let e = parse_expr(src).unwrap();
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{src}");
    }
    assert_eq!(parse_expr("a | (b | c)").unwrap().to_string(), "a | (b | c)");
    assert_eq!(parse_expr("((a)) & b").unwrap().to_string(), "a & b");
}

#[test]
fn eval_examples() {
    let e = parse_expr("!b2").unwrap();
    assert!(eval(&e, &vals(&[("b2", false)])).unwrap());
    let e = parse_expr("b0 | b1 | !b2").unwrap();
    assert!(eval(&e, &vals(&[("b0", false), ("b1", false), ("b2", false)])).unwrap());
    assert_eq!(
        eval(&parse_expr("q").unwrap(), &Valuation::new()),
        Err(EvalError::Unbound("q".into()))
    );
    assert_eq!(
        eval(&BoolExpr::Star, &Valuation::new()),
        Err(EvalError::Nondeterministic)
    );
}

#[test]
fn binary_operators_match_truth_table_oracle() {
    // rows: (a, b) = FF, FT, TF, TT
    let table: &[(&str, [bool; 4])] = &[
        ("a & b", [false, false, false, true]),
        ("a | b", [false, true, true, true]),
        ("a => b", [true, true, false, true]),
        ("a = b", [true, false, false, true]),
        ("a != b", [false, true, true, false]),
        ("!a", [true, true, false, false]),
        ("a ∧ ¬b", [false, false, true, false]),
        ("a ⇒ b ∨ a", [true, true, true, true]),
    ];
    for (src, expected) in table {
        let e = parse_expr(src).unwrap();
        for (i, (a, b)) in [(false, false), (false, true), (true, false), (true, true)]
            .into_iter()
            .enumerate()
        {
            let got = eval(&e, &vals(&[("a", a), ("b", b)])).unwrap();
            assert_eq!(got, expected[i], "{src} at a={a} b={b}");
        }
    }
}

#[test]
fn choose_values() {
    use bprepair::lang::eval::{possible_values, MAY_FALSE, MAY_TRUE};
    let e = parse_expr("choose(a, b)").unwrap();
    let at = |a, b| possible_values(&e, &|v: &str| Some(if v == "a" { a } else { b })).unwrap();
    assert_eq!(at(true, true), MAY_TRUE);
    assert_eq!(at(false, true), MAY_FALSE);
    assert_eq!(at(false, false), MAY_FALSE | MAY_TRUE);
}
