use std::collections::BTreeMap;

use bprepair::arith::{check_sat, parse_formula, parse_term, valid, Formula, LinExpr, Rel, SatResult, SolveLimits, Sort};
use bprepair::{Predicate, Rational};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn ints(vs: &[&str]) -> BTreeMap<String, Sort> {
    vs.iter().map(|v| (v.to_string(), Sort::Int)).collect()
}

fn f(s: &str) -> Predicate {
    parse_formula(s).unwrap()
}

#[test]
fn parses_and_prints() {
    for (src, shown) in [
        ("x <= 1", "x <= 1"),
        ("x ≤ 1", "x <= 1"),
        ("!(x <= 1)", "x > 1"),
        ("¬(x ≤ 1)", "x > 1"),
        ("2*x + 4 <= 0", "x <= -2"),
        ("x == 1", "x == 1"),
        ("x = 1", "x == 1"),
        ("1 == x", "x == 1"),
        ("x - y < 1/2", "x - y < (1/2)"),
        ("x + 0.5 >= y", "x - y >= (-1/2)"),
        ("(x <= 1) || (x == 1) && y > 0", "x <= 1 || x == 1 && y > 0"),
        ("(x + 1) * 3 != 2*y", "x - (2/3)*y != -1"),
        ("true && x <= 0", "x <= 0"),
    ] {
        let p = f(src);
        assert_eq!(p.to_string(), shown, "{src}");
        assert_eq!(f(&p.to_string()), p, "reparse of {src}");
    }
    assert!(parse_formula::<Rational>("x * y <= 0").is_err());
    assert!(parse_formula::<Rational>("x <= ").is_err());
    assert_eq!(parse_term::<Rational>("-x + 10").unwrap().to_string(), "-x + 10");
}

#[test]
fn generic_over_the_scalar() {
    type Small = num_rational::Ratio<i64>;
    let p: Formula<Small> = parse_formula("x <= 1 && x > 0").unwrap();
    let r = check_sat(&p, &ints(&["x"]), &SolveLimits::default());
    assert_eq!(r, SatResult::Sat([("x".to_string(), Small::from_integer(1))].into()));
}

#[test]
fn integer_reasoning() {
    let lim = SolveLimits::default();
    let x = ints(&["x", "y"]);
    // No integer strictly between 0 and 1, but a real one.
    assert!(check_sat(&f("x > 0 && x < 1"), &x, &lim).is_unsat());
    assert!(check_sat(&f("x > 0 && x < 1"), &BTreeMap::new(), &lim).is_sat());
    assert!(check_sat(&f("2*x == 2*y + 1"), &x, &lim).is_unsat());
    assert!(check_sat(&f("3*x + 3*y == 2 || x - y == 7"), &x, &lim).is_sat());
    assert_eq!(valid(&f("x <= 0 || x >= 1"), &x, &lim), Some(true));
    assert_eq!(valid(&f("x <= 0 || x >= 1"), &BTreeMap::new(), &lim), Some(false));
    assert_eq!(valid(&f("(x <= 1 || x == 1 || !(x <= 0)) <-> true"), &x, &lim), Some(true));
}

fn atom_strategy() -> impl Strategy<Value = Predicate> {
    (-3i64..=3, -3i64..=3, -6i64..=6, 0..4usize).prop_map(|(a, b, c, r)| {
        let e = LinExpr::term(q(a), "x").add(&LinExpr::term(q(b), "y")).add(&LinExpr::constant(q(c)));
        Formula::atom(e, [Rel::Le, Rel::Lt, Rel::Eq, Rel::Ne][r])
    })
}

fn formula_strategy() -> impl Strategy<Value = Predicate> {
    atom_strategy().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 1..3).prop_map(Formula::and),
            proptest::collection::vec(inner.clone(), 1..3).prop_map(Formula::or),
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
}

/// Any grid witness of a formula whose atoms have small coefficients.
fn grid_witness(p: &Predicate, r: i64) -> Option<(i64, i64)> {
    (-r..=r).flat_map(|x| (-r..=r).map(move |y| (x, y))).find(|&(x, y)| {
        let env = [("x".to_string(), q(x)), ("y".to_string(), q(y))].into();
        p.eval(&env).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]
    #[test]
    fn integer_sat_agrees_with_grid(p in formula_strategy()) {
        let r = check_sat(&p, &ints(&["x", "y"]), &SolveLimits::default());
        match r {
            SatResult::Sat(m) => {
                prop_assert!(m.values().all(|v| v.is_integer()));
                let env = [("x".to_string(), m.get("x").cloned().unwrap_or(q(0))), ("y".to_string(), m.get("y").cloned().unwrap_or(q(0)))].into();
                prop_assert!(p.eval(&env).unwrap(), "model {:?} of {}", m, p);
            }
            SatResult::Unsat => prop_assert!(grid_witness(&p, 12).is_none(), "missed witness of {}", p),
            SatResult::Unknown => prop_assert!(false, "undecided: {}", p),
        }
    }

    #[test]
    fn real_models_satisfy(p in formula_strategy()) {
        if let SatResult::Sat(m) = check_sat(&p, &BTreeMap::new(), &SolveLimits::default()) {
            let env = [("x".to_string(), m.get("x").cloned().unwrap_or(q(0))), ("y".to_string(), m.get("y").cloned().unwrap_or(q(0)))].into();
            prop_assert!(p.eval(&env).unwrap(), "model {:?} of {}", m, p);
        } else {
            // Every integer witness is a real witness.
            prop_assert!(grid_witness(&p, 12).is_none());
        }
    }

    #[test]
    fn display_round_trips(p in formula_strategy()) {
        let back: Predicate = parse_formula(&p.to_string()).unwrap();
        for x in -4i64..=4 {
            for y in -4i64..=4 {
                let env = [("x".to_string(), q(x)), ("y".to_string(), q(y))].into();
                prop_assert_eq!(back.eval(&env), p.eval(&env));
            }
        }
    }
}

#[test]
fn models_prefer_small_values() {
    let r = check_sat(&f("x >= 3 && y <= -2 && x + y >= 0"), &ints(&["x", "y"]), &SolveLimits::default());
    let SatResult::Sat(m) = r else { panic!() };
    let x = m["x"].to_integer().to_i64().unwrap();
    let y = m["y"].to_integer().to_i64().unwrap();
    assert!(x >= 3 && y <= -2 && x + y >= 0);
    assert!(x.abs() <= 3 && y.abs() <= 3, "{x} {y}");
}
