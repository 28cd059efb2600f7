use std::collections::BTreeMap;

use bprepair::arith::{parse_formula, parse_term, Formula, Sort};
use bprepair::concretize::{
    concretize_assign, concretize_assign_templated, concretize_assume_templated, concretize_call_templated,
    concretize_proof, concretize_simple, simplify, ConcreteSet, ConcreteStmt, ConcretizeOptions, PredicateMap,
    Template,
};
use bprepair::lang::{parse_expr, BoolExpr, Statement};
use bprepair::{Predicate, Rational};
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn e(s: &str) -> BoolExpr {
    parse_expr(s).unwrap()
}

fn fig1() -> PredicateMap<Rational> {
    PredicateMap::new(&[("x", Sort::Int)], &[("b0", "x <= 1"), ("b1", "x == 1"), ("b2", "x <= 0")]).unwrap()
}

fn opts() -> ConcretizeOptions<Rational> {
    ConcretizeOptions::default()
}

fn point(x: i64) -> BTreeMap<String, Rational> {
    [("x".to_string(), q(x))].into()
}

/// Substitution oracle for an assignment: at every sampled state, each target
/// predicate after the update equals the abstract right-hand side before it,
/// and every other predicate keeps its value.
fn assignment_holds(gm: &PredicateMap<Rational>, targets: &[&str], values: &[&str], stmt: &ConcreteStmt<Rational>) {
    let (vars, exprs) = match stmt {
        ConcreteStmt::Assign { targets, values } => (targets.clone(), values.clone()),
        ConcreteStmt::Skip => (Vec::new(), Vec::new()),
        other => panic!("not an assignment: {other}"),
    };
    for x in -20..=20 {
        let pre = point(x);
        let mut post = pre.clone();
        for (v, h) in vars.iter().zip(&exprs) {
            post.insert(v.clone(), h.eval(&pre).unwrap());
        }
        for (b, pred) in &gm.predicates {
            let want = match targets.iter().position(|t| t == b) {
                Some(i) => gm.gamma(&e(values[i])).unwrap().eval(&pre).unwrap(),
                None => pred.eval(&pre).unwrap(),
            };
            assert_eq!(pred.eval(&post).unwrap(), want, "{stmt} breaks {b} at x = {x}");
        }
    }
}

fn equivalent_on_grid(a: &Predicate, b: &Predicate) -> bool {
    (-20..=20).all(|x| a.eval(&point(x)) == b.eval(&point(x)))
}

fn found(set: ConcreteSet<Rational>) -> Vec<ConcreteStmt<Rational>> {
    match set {
        ConcreteSet::Found(v) => v,
        other => panic!("expected a concrete statement, got {other:?}"),
    }
}

#[test]
fn simplifies_the_repaired_guards() {
    let gm = fig1();
    let show = |s: &str| gm.concretize_expr(&e(s)).unwrap().to_string();
    assert_eq!(show("b0 || b1 || !b2"), "true");
    assert_eq!(show("b0 || b1 || b2"), "x <= 1");
    assert_eq!(show("!b0"), "x > 1");
    assert_eq!(show("b1 && b2"), "false");
    assert_eq!(show("!b1"), "x != 1");

    let sorts = BTreeMap::new();
    let f = |s: &str| -> Predicate { parse_formula(s).unwrap() };
    assert_eq!(simplify(&f("x <= 2 || false"), &sorts), f("x <= 2"));
    assert_eq!(simplify(&f("x <= 2 && x <= 3"), &sorts), f("x <= 2"));
    assert_eq!(simplify(&f("(x <= 2 || y > 0) && x <= 2"), &sorts), f("x <= 2"));
    // Only the integers make the gap vanish.
    let ints = [("x".to_string(), Sort::Int)].into();
    assert_eq!(simplify(&f("x <= 0 || x >= 1"), &ints), f("true"));
    assert_eq!(simplify(&f("x <= 0 || x >= 1"), &sorts), f("x <= 0 || x >= 1"));
}

#[test]
fn simple_statements() {
    let gm = fig1();
    let show = |s: Statement| concretize_simple(&s, &gm).unwrap().to_string();
    assert_eq!(show(Statement::Assume(e("b0 || b1 || !b2"))), "assume(true)");
    assert_eq!(show(Statement::Assume(e("b0 || b1 || b2"))), "assume(x <= 1)");
    assert_eq!(show(Statement::Skip), "skip");
    let star = Statement::Assume(e("*"));
    assert!(concretize_simple(&star, &gm).is_err());
}

#[test]
fn assignments_via_substitution() {
    let gm = PredicateMap::new(&[("x", Sort::Int)], &[("b", "x <= 0")]).unwrap();
    let out = found(concretize_assign(&["b".into()], &[e("true")], &gm, &opts()).unwrap());
    assignment_holds(&gm, &["b"], &["true"], &out[0]);
    assert_eq!(out[0].to_string(), "x := 0");

    let gm = fig1();
    let targets = ["b0", "b1", "b2"];
    let values = ["true", "false", "true"];
    let owned: Vec<String> = targets.iter().map(|s| s.to_string()).collect();
    let vals: Vec<BoolExpr> = values.iter().map(|s| e(s)).collect();
    let more = ConcretizeOptions {
        models: 3,
        ..opts()
    };
    let out = found(concretize_assign(&owned, &vals, &gm, &more).unwrap());
    assert!(out.len() > 1, "blocking enumerates several members: {out:?}");
    for s in &out {
        assignment_holds(&gm, &targets, &values, s);
    }
    assert!(["x := 0", "x := -1"].contains(&out[0].to_string().as_str()), "{}", out[0]);

    // The identity abstract update needs no concrete change.
    let out = found(concretize_assign(&["b0".into()], &[e("b0")], &gm, &opts()).unwrap());
    assert_eq!(out, vec![ConcreteStmt::Skip]);
    // x can't satisfy x <= 1 and x > 1 at once.
    let gm2 = PredicateMap::new(&[("x", Sort::Int)], &[("a", "x <= 1"), ("b", "x > 1")]).unwrap();
    let r = concretize_assign(&["a".into(), "b".into()], &[e("true"), e("true")], &gm2, &opts()).unwrap();
    assert_eq!(r, ConcreteSet::Empty);
}

#[test]
fn guard_templates() {
    let gm = PredicateMap::new(&[("x", Sort::Int)], &[("b", "x <= 1"), ("t", "0 <= 0"), ("e", "x == 1")]).unwrap();
    let t = Template::linear();
    let atom = |g: &str| concretize_assume_templated(&e(g), &gm, &t, &opts(), ConcreteStmt::Assume).unwrap();

    let out = found(atom("b"));
    assert_eq!(out[0].to_string(), "assume(x - 1 <= 0)");
    let ConcreteStmt::Assume(c) = &out[0] else { panic!() };
    assert!(equivalent_on_grid(&c.formula(), gm.predicate("b").unwrap()));

    assert_eq!(found(atom("t"))[0].to_string(), "assume(0 <= 0)");
    assert_eq!(atom("e"), ConcreteSet::Empty);
    // The negation of an atom is not a <= atom over the reals, but is over the integers.
    let ConcreteStmt::Assume(c) = &found(atom("!b"))[0] else { panic!() };
    assert!(equivalent_on_grid(&c.formula(), &gm.gamma(&e("!b")).unwrap()), "{c}");
    let int = Template::linear().integer();
    let out = concretize_assume_templated(&e("!b"), &gm, &int, &opts(), ConcreteStmt::Assume).unwrap();
    assert_eq!(found(out)[0].to_string(), "assume(-x + 2 <= 0)");
}

#[test]
fn call_templates() {
    let gm = fig1();
    let t = Template::linear();
    let out = found(concretize_call_templated("F", &[e("b0")], &gm, &t, &opts()).unwrap());
    assert_eq!(out[0].to_string(), "call F(x - 1 <= 0)");
    let r = concretize_call_templated("F", &[e("b0"), e("b1")], &gm, &t, &opts()).unwrap();
    assert_eq!(r, ConcreteSet::Empty);
}

#[test]
fn assignment_templates() {
    // Swapping the two sides of x = 5 is the reflection x := 10 - x.
    let gm = PredicateMap::new(&[("x", Sort::Int)], &[("b0", "x <= 5"), ("b1", "x >= 5")]).unwrap();
    let reflect = Template {
        vars: Some(vec!["x".into()]),
        fixed: [("x".to_string(), q(-1))].into(),
        constant: None,
        integer: true,
    };
    let out = found(
        concretize_assign_templated(&["b0".into(), "b1".into()], &[e("b1"), e("b0")], &gm, &reflect, &opts())
            .unwrap(),
    );
    assert_eq!(out[0].to_string(), "x := -x + 10");
    assignment_holds(&gm, &["b0", "b1"], &["b1", "b0"], &out[0]);

    // Constant template: every c0 <= 0 works and each one found does.
    let gm = PredicateMap::new(&[("x", Sort::Int)], &[("b", "x <= 0")]).unwrap();
    let more = ConcretizeOptions {
        models: 4,
        ..opts()
    };
    let out = found(
        concretize_assign_templated(&["b".into()], &[e("true")], &gm, &Template::constant(), &more).unwrap(),
    );
    assert_eq!(out.len(), 4);
    for s in &out {
        let ConcreteStmt::Assign { values, .. } = s else { panic!("{s}") };
        assert!(values[0].is_constant() && values[0].constant <= q(0), "{s}");
        assignment_holds(&gm, &["b"], &["true"], s);
    }
    // Template output stays in the grammar.
    for s in &out {
        let text = s.to_string();
        let rhs = text.split(":= ").nth(1).unwrap();
        assert!(parse_term::<Rational>(rhs).is_ok(), "{text}");
    }
}

#[test]
fn proofs() {
    let gm = fig1();
    let inv: BTreeMap<String, BoolExpr> = [("l2".to_string(), e("!b0")), ("l1".to_string(), e("true"))].into();
    let out = concretize_proof(&inv, &gm).unwrap();
    assert_eq!(out["l2"].to_string(), "x > 1");
    assert_eq!(out["l1"], Formula::Const(true));
}

fn bool_expr() -> impl Strategy<Value = BoolExpr> {
    let leaf = prop_oneof![
        (0..3usize).prop_map(|i| BoolExpr::var(format!("b{i}"))),
        any::<bool>().prop_map(BoolExpr::Const),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(BoolExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| e(&format!("({a}) && ({b})"))),
            (inner.clone(), inner).prop_map(|(a, b)| e(&format!("({a}) || ({b})"))),
        ]
    })
}

proptest! {
    #[test]
    fn proof_concretization_agrees_with_the_abstraction(i in bool_expr()) {
        let gm = fig1();
        let inv: BTreeMap<String, BoolExpr> = [("l".to_string(), i.clone())].into();
        let out = concretize_proof(&inv, &gm).unwrap();
        for x in -6..=6 {
            let val: BTreeMap<String, bool> = gm
                .predicates
                .iter()
                .map(|(b, p)| (b.clone(), p.eval(&point(x)).unwrap()))
                .collect();
            let abs = bprepair::lang::eval(&i, &val).unwrap();
            prop_assert_eq!(out["l"].eval(&point(x)), Some(abs), "{} at x = {}", i, x);
        }
    }
}
