//! Equivalence-preserving cleanup of concrete predicates: constant folding,
//! complements, absorption, and interval reasoning for subformulas over a
//! single variable.

use std::collections::BTreeMap;

use crate::arith::{check_sat, valid, Formula, LinExpr, Model, SatResult, Scalar, SolveLimits, Sort};

pub fn simplify<S: Scalar>(f: &Formula<S>, sorts: &BTreeMap<String, Sort>) -> Formula<S> {
    let f = intervals(&structural(f), sorts);
    if matches!(f, Formula::Const(_)) || f.atoms().len() > 12 {
        return f;
    }
    let lim = SolveLimits::default();
    if valid(&f, sorts, &lim) == Some(true) {
        return Formula::Const(true);
    }
    if check_sat(&f, sorts, &lim) == SatResult::Unsat {
        return Formula::Const(false);
    }
    f
}

fn structural<S: Scalar>(f: &Formula<S>) -> Formula<S> {
    match f {
        Formula::Const(_) | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(structural(g)),
        Formula::Iff(a, b) => Formula::iff(structural(a), structural(b)),
        Formula::And(v) => junction(v, true),
        Formula::Or(v) => junction(v, false),
    }
}

/// Simplify a conjunction (`is_and`) or disjunction.
fn junction<S: Scalar>(items: &[Formula<S>], is_and: bool) -> Formula<S> {
    let build = |v: Vec<Formula<S>>| if is_and { Formula::and(v) } else { Formula::or(v) };
    let flat = build(items.iter().map(structural).collect());
    let kids = match (&flat, is_and) {
        (Formula::And(v), true) | (Formula::Or(v), false) => v.clone(),
        _ => return flat,
    };
    let mut out: Vec<Formula<S>> = Vec::new();
    for k in kids {
        if !out.contains(&k) {
            out.push(k);
        }
    }
    // a & !a, a | !a
    if out.iter().any(|k| out.contains(&Formula::not(k.clone()))) {
        return Formula::Const(!is_and);
    }
    // a & (a | b) = a, a | (a & b) = a
    let absorbed = |k: &Formula<S>| {
        let inner = match (k, is_and) {
            (Formula::Or(w), true) | (Formula::And(w), false) => w,
            _ => return false,
        };
        inner.iter().any(|w| out.contains(w))
    };
    let kept: Vec<Formula<S>> = out.iter().filter(|k| !absorbed(k)).cloned().collect();
    build(kept)
}

fn single_var<S: Scalar>(f: &Formula<S>) -> Option<String> {
    let vars = f.vars();
    if vars.len() == 1 {
        vars.into_iter().next()
    } else {
        None
    }
}

fn intervals<S: Scalar>(f: &Formula<S>, sorts: &BTreeMap<String, Sort>) -> Formula<S> {
    if let Some(x) = single_var(f) {
        let sort = sorts.get(&x).copied().unwrap_or(Sort::Real);
        return interval_form(f, &x, sort);
    }
    match f {
        Formula::Not(g) => Formula::not(intervals(g, sorts)),
        Formula::Iff(a, b) => Formula::iff(intervals(a, sorts), intervals(b, sorts)),
        Formula::And(v) | Formula::Or(v) => {
            let is_and = matches!(f, Formula::And(_));
            let kids: Vec<Formula<S>> = v.iter().map(|g| intervals(g, sorts)).collect();
            // Merge siblings over the same single variable.
            let mut groups: BTreeMap<String, Vec<Formula<S>>> = BTreeMap::new();
            let mut rest = Vec::new();
            for k in kids {
                match single_var(&k) {
                    Some(x) => groups.entry(x).or_default().push(k),
                    None => rest.push(k),
                }
            }
            let mut out = Vec::new();
            for (x, g) in groups {
                let sort = sorts.get(&x).copied().unwrap_or(Sort::Real);
                let joined = if is_and { Formula::and(g) } else { Formula::or(g) };
                out.push(interval_form(&joined, &x, sort));
            }
            out.extend(rest);
            if is_and {
                Formula::and(out)
            } else {
                Formula::or(out)
            }
        }
        _ => f.clone(),
    }
}

#[derive(Debug, Clone)]
enum Piece<S> {
    Below(S),
    Point(S),
    Between(S, S),
    Above(S),
}

/// Exact description of the set of `x` satisfying `f`, as a union of intervals
/// bounded by the constants of its atoms. Over the integers, pieces holding no
/// integer may go either way and are merged into their neighbours when that
/// saves an interval.
fn interval_form<S: Scalar>(f: &Formula<S>, x: &str, sort: Sort) -> Formula<S> {
    let mut points: Vec<S> = f
        .atoms()
        .iter()
        .map(|a| {
            let c = a.expr.coeff(x);
            -a.expr.constant.clone() / c
        })
        .collect();
    points.sort();
    points.dedup();
    if points.is_empty() {
        return f.clone();
    }
    let at = |v: S| {
        let env: Model<S> = [(x.to_string(), v)].into();
        f.eval(&env).expect("single-variable formula")
    };
    let two = S::from_i64(2);
    let mut pieces = vec![Piece::Below(points[0].clone())];
    for (i, p) in points.iter().enumerate() {
        pieces.push(Piece::Point(p.clone()));
        match points.get(i + 1) {
            Some(q) => pieces.push(Piece::Between(p.clone(), q.clone())),
            None => pieces.push(Piece::Above(p.clone())),
        }
    }
    let mut values: Vec<Option<bool>> = pieces
        .iter()
        .map(|pc| match pc {
            Piece::Below(b) => Some(at(b.clone() - S::one())),
            Piece::Above(b) => Some(at(b.clone() + S::one())),
            Piece::Point(b) => (sort == Sort::Real || b.is_integer()).then(|| at(b.clone())),
            Piece::Between(a, b) => {
                let has_int = a.floor() + S::one() < *b;
                (sort == Sort::Real || has_int).then(|| at((a.clone() + b.clone()) / two.clone()))
            }
        })
        .collect();
    let mut i = 0;
    while i < values.len() {
        if values[i].is_none() {
            let mut j = i;
            while values[j].is_none() {
                j += 1;
            }
            let fill = values[i - 1] == Some(true) && values[j] == Some(true);
            for v in &mut values[i..j] {
                *v = Some(fill);
            }
            i = j;
        }
        i += 1;
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if *v == Some(true) {
            match runs.last_mut() {
                Some((_, end)) if *end + 1 == i => *end = i,
                _ => runs.push((i, i)),
            }
        }
    }
    let var = LinExpr::var(x.to_string());
    let k = |c: &S| LinExpr::constant(c.clone());
    if let [(0, a), (b, last)] = runs[..] {
        if last == pieces.len() - 1 && b == a + 2 {
            if let Piece::Point(p) = &pieces[a + 1] {
                return Formula::ne(&var, &k(p));
            }
        }
    }
    Formula::or(runs.into_iter().map(|(s, e)| {
        let lo = match &pieces[s] {
            Piece::Below(_) => None,
            Piece::Point(p) => Some((p, false)),
            Piece::Between(a, _) | Piece::Above(a) => Some((a, true)),
        };
        let hi = match &pieces[e] {
            Piece::Above(_) => None,
            Piece::Point(p) => Some((p, false)),
            Piece::Between(_, b) | Piece::Below(b) => Some((b, true)),
        };
        match (lo, hi) {
            (Some((a, false)), Some((b, false))) if a == b => Formula::eq(&var, &k(a)),
            (lo, hi) => Formula::and([
                lo.map_or(Formula::Const(true), |(a, open)| {
                    if open {
                        Formula::gt(&var, &k(a))
                    } else {
                        Formula::ge(&var, &k(a))
                    }
                }),
                hi.map_or(Formula::Const(true), |(b, open)| {
                    if open {
                        Formula::lt(&var, &k(b))
                    } else {
                        Formula::le(&var, &k(b))
                    }
                }),
            ]),
        }
    }))
}
