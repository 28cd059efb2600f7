//! Satisfiability of linear formulas over integer and real variables, and a
//! counterexample-guided loop for `∃ params ∀ vars` queries.
//!
//! Conjunctions are decided by Fourier–Motzkin elimination with a model read
//! back by substitution; integer variables are handled by branch and bound on
//! the real relaxation after tightening integer atoms. Disjunctions are split
//! lazily with a feasibility check before each split.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use super::{Atom, Formula, LinExpr, Model, Rel, Scalar, Sort};

#[derive(Debug, Clone)]
pub struct SolveLimits {
    /// Branch-and-bound nodes per conjunction.
    pub branch_nodes: usize,
    /// Conjunctions examined per query.
    pub leaves: usize,
    /// Give up (answer unknown) once this instant has passed.
    pub deadline: Option<Instant>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            branch_nodes: 500,
            leaves: 20_000,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SatResult<S> {
    Sat(Model<S>),
    Unsat,
    Unknown,
}

impl<S> SatResult<S> {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat)
    }
}

fn sort_of(sorts: &BTreeMap<String, Sort>, v: &str) -> Sort {
    sorts.get(v).copied().unwrap_or(Sort::Real)
}

/// Decide `f`. Variables missing from `sorts` are real. A model assigns every
/// variable of `f`.
pub fn check_sat<S: Scalar>(f: &Formula<S>, sorts: &BTreeMap<String, Sort>, limits: &SolveLimits) -> SatResult<S> {
    let nnf = f.nnf();
    let mut s = Search {
        sorts,
        limits,
        leaves: 0,
        unknown: false,
    };
    match s.dfs(vec![&nnf], Vec::new()) {
        Some(mut m) => {
            for v in f.vars() {
                m.entry(v).or_insert_with(S::zero);
            }
            SatResult::Sat(m)
        }
        None if s.unknown => SatResult::Unknown,
        None => SatResult::Unsat,
    }
}

/// `Some(true)` if `f` holds everywhere, `None` if undecided.
pub fn valid<S: Scalar>(f: &Formula<S>, sorts: &BTreeMap<String, Sort>, limits: &SolveLimits) -> Option<bool> {
    match check_sat(&Formula::not(f.clone()), sorts, limits) {
        SatResult::Sat(_) => Some(false),
        SatResult::Unsat => Some(true),
        SatResult::Unknown => None,
    }
}

pub fn equivalent<S: Scalar>(
    a: &Formula<S>,
    b: &Formula<S>,
    sorts: &BTreeMap<String, Sort>,
    limits: &SolveLimits,
) -> Option<bool> {
    valid(&Formula::iff(a.clone(), b.clone()), sorts, limits)
}

struct Search<'a> {
    sorts: &'a BTreeMap<String, Sort>,
    limits: &'a SolveLimits,
    leaves: usize,
    unknown: bool,
}

enum Outcome<S> {
    Sat(Model<S>),
    Unsat,
    Unknown,
}

impl Search<'_> {
    fn dfs<S: Scalar>(&mut self, mut pending: Vec<&Formula<S>>, mut lits: Vec<Atom<S>>) -> Option<Model<S>> {
        loop {
            // Work on everything but disjunctions first.
            let next = pending.iter().position(|f| !matches!(f, Formula::Or(_)));
            let Some(i) = next else { break };
            match pending.swap_remove(i) {
                Formula::Const(true) => {}
                Formula::Const(false) => return None,
                Formula::Atom(a) => lits.push(a.clone()),
                Formula::And(v) => pending.extend(v.iter()),
                other => unreachable!("not in negation normal form: {other:?}"),
            }
        }
        let late = self.leaves.is_multiple_of(64) && self.limits.deadline.is_some_and(|d| Instant::now() > d);
        if self.leaves >= self.limits.leaves || late {
            self.unknown = true;
            return None;
        }
        if pending.is_empty() {
            return self.leaf(&lits);
        }
        // Prune before splitting.
        match self.conj(&lits) {
            Outcome::Unsat => return None,
            Outcome::Unknown => {
                self.unknown = true;
                return None;
            }
            Outcome::Sat(_) => {}
        }
        let Formula::Or(alts) = pending.pop().unwrap() else { unreachable!() };
        for alt in alts {
            let mut p = pending.clone();
            p.push(alt);
            if let Some(m) = self.dfs(p, lits.clone()) {
                return Some(m);
            }
        }
        None
    }

    fn leaf<S: Scalar>(&mut self, lits: &[Atom<S>]) -> Option<Model<S>> {
        match self.conj(lits) {
            Outcome::Sat(m) => Some(m),
            Outcome::Unsat => None,
            Outcome::Unknown => {
                self.unknown = true;
                None
            }
        }
    }

    fn conj<S: Scalar>(&mut self, lits: &[Atom<S>]) -> Outcome<S> {
        self.leaves += 1;
        let mut atoms = Vec::new();
        for a in lits {
            match tighten(a, self.sorts) {
                Some(a) => atoms.push(a),
                None => return Outcome::Unsat,
            }
        }
        let mut nodes = 0;
        self.branch(atoms, &mut nodes)
    }

    fn branch<S: Scalar>(&self, atoms: Vec<Atom<S>>, nodes: &mut usize) -> Outcome<S> {
        let Some(m) = fm_model(&atoms, self.sorts) else {
            return Outcome::Unsat;
        };
        let frac = m
            .iter()
            .find(|(v, x)| sort_of(self.sorts, v) == Sort::Int && !x.is_integer());
        let Some((v, x)) = frac else {
            return Outcome::Sat(m);
        };
        if *nodes >= self.limits.branch_nodes {
            return Outcome::Unknown;
        }
        *nodes += 1;
        let var = LinExpr::var(v.clone());
        let down = Atom::normalized(var.sub(&LinExpr::constant(x.floor())), Rel::Le);
        let up = Atom::normalized(LinExpr::constant(x.ceil()).sub(&var), Rel::Le);
        let mut unknown = false;
        for extra in [down, up] {
            let mut next = atoms.clone();
            next.push(extra);
            match self.branch(next, nodes) {
                Outcome::Sat(m) => return Outcome::Sat(m),
                Outcome::Unknown => unknown = true,
                Outcome::Unsat => {}
            }
        }
        if unknown {
            Outcome::Unknown
        } else {
            Outcome::Unsat
        }
    }
}

fn gcd<S: Scalar>(a: S, b: S) -> S {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        let r = a % b.clone();
        a = b;
        b = r;
    }
    a
}

/// Strengthen an atom whose variables are all integers: integral coefficients,
/// `<` turned into `<=`, coefficients divided by their gcd with the constant
/// rounded. `None` if the atom has no integer solution.
fn tighten<S: Scalar>(a: &Atom<S>, sorts: &BTreeMap<String, Sort>) -> Option<Atom<S>> {
    if !a.expr.vars().all(|v| sort_of(sorts, v) == Sort::Int) {
        return Some(a.clone());
    }
    let denoms = a
        .expr
        .coeffs
        .values()
        .chain(std::iter::once(&a.expr.constant))
        .map(|c| c.numer_denom().1);
    let lcm = denoms.fold(S::one(), |acc, d| {
        let g = gcd(acc.clone(), d.clone());
        acc * d / g
    });
    let mut e = a.expr.scale(&lcm);
    let mut rel = a.rel;
    if rel == Rel::Lt {
        e.constant = e.constant + S::one();
        rel = Rel::Le;
    }
    let g = e.coeffs.values().cloned().fold(S::zero(), gcd);
    if g.is_zero() {
        return Some(Atom { expr: e, rel });
    }
    let k = e.constant.clone() / g.clone();
    match rel {
        Rel::Le => {
            let mut e = e.scale(&(S::one() / g));
            e.constant = k.ceil();
            Some(Atom { expr: e, rel })
        }
        Rel::Eq if !k.is_integer() => None,
        _ => Some(Atom {
            expr: e.scale(&(S::one() / g)),
            rel,
        }),
    }
}

/// `e <= 0` (or `< 0` when strict).
type Ineq<S> = (LinExpr<S>, bool);

/// Keep the tightest constraint per direction.
fn dedupe<S: Scalar>(ineqs: Vec<Ineq<S>>) -> Vec<Ineq<S>> {
    let mut best: BTreeMap<BTreeMap<String, S>, (S, bool)> = BTreeMap::new();
    for (e, strict) in ineqs {
        let lead = e.coeffs.values().next().unwrap().abs();
        let e = e.scale(&(S::one() / lead));
        let entry = best.entry(e.coeffs).or_insert((e.constant.clone(), strict));
        if e.constant > entry.0 || (e.constant == entry.0 && strict) {
            *entry = (e.constant, strict);
        }
    }
    best.into_iter()
        .map(|(coeffs, (constant, strict))| (LinExpr { coeffs, constant }, strict))
        .collect()
}

/// A real model of a conjunction of atoms without `!=`, or `None`.
fn fm_model<S: Scalar>(atoms: &[Atom<S>], sorts: &BTreeMap<String, Sort>) -> Option<Model<S>> {
    let mut eqs = Vec::new();
    let mut ineqs: Vec<Ineq<S>> = Vec::new();
    let mut all_vars = Vec::new();
    for a in atoms {
        all_vars.extend(a.expr.vars().cloned());
        match a.rel {
            Rel::Le => ineqs.push((a.expr.clone(), false)),
            Rel::Lt => ineqs.push((a.expr.clone(), true)),
            Rel::Eq => eqs.push(a.expr.clone()),
            Rel::Ne => unreachable!("disequalities are split before this point"),
        }
    }

    // Gaussian elimination of equalities, preferring real variables.
    let mut defs: Vec<(String, LinExpr<S>)> = Vec::new();
    while let Some(e) = eqs.pop() {
        if e.is_constant() {
            if !e.constant.is_zero() {
                return None;
            }
            continue;
        }
        let x = e
            .vars()
            .find(|v| sort_of(sorts, v) == Sort::Real)
            .or_else(|| e.vars().next())
            .unwrap()
            .clone();
        let c = e.coeff(&x);
        let def = e.sub(&LinExpr::term(c.clone(), x.clone())).scale(&(-S::one() / c));
        let m = BTreeMap::from([(x.clone(), def.clone())]);
        for q in eqs.iter_mut() {
            *q = q.substitute(&m);
        }
        for (q, _) in ineqs.iter_mut() {
            *q = q.substitute(&m);
        }
        for (_, d) in defs.iter_mut() {
            *d = d.substitute(&m);
        }
        defs.push((x, def));
    }

    // Fourier–Motzkin projection, remembering the constraints on each variable.
    let mut eliminated: Vec<(String, Vec<Ineq<S>>)> = Vec::new();
    loop {
        let mut live = Vec::new();
        for (e, strict) in ineqs {
            if e.is_constant() {
                let ok = if strict {
                    e.constant.is_negative()
                } else {
                    !e.constant.is_positive()
                };
                if !ok {
                    return None;
                }
            } else {
                live.push((e, strict));
            }
        }
        ineqs = dedupe(live);
        if ineqs.is_empty() {
            break;
        }
        let mut counts: BTreeMap<&String, (usize, usize)> = BTreeMap::new();
        for (e, _) in &ineqs {
            for (v, c) in &e.coeffs {
                let slot = counts.entry(v).or_default();
                if c.is_positive() {
                    slot.1 += 1;
                } else {
                    slot.0 += 1;
                }
            }
        }
        let x = counts
            .iter()
            .min_by_key(|(_, (lo, hi))| lo * hi)
            .map(|(v, _)| (*v).clone())
            .unwrap();
        let (with, without): (Vec<_>, Vec<_>) = ineqs.into_iter().partition(|(e, _)| !e.coeff(&x).is_zero());
        let mut next = without;
        for (lo, ls) in with.iter().filter(|(e, _)| e.coeff(&x).is_negative()) {
            for (hi, hs) in with.iter().filter(|(e, _)| e.coeff(&x).is_positive()) {
                let a = hi.scale(&(S::one() / hi.coeff(&x)));
                let b = lo.scale(&(S::one() / -lo.coeff(&x)));
                next.push((a.add(&b), *ls || *hs));
            }
        }
        eliminated.push((x, with));
        ineqs = next;
    }

    let mut m: Model<S> = Model::new();
    for (x, cons) in eliminated.iter().rev() {
        let mut lo: Option<(S, bool)> = None;
        let mut hi: Option<(S, bool)> = None;
        for (e, strict) in cons {
            let a = e.coeff(x);
            let mut rest = e.clone();
            rest.coeffs.remove(x);
            for v in rest.vars() {
                if !m.contains_key(v) {
                    m.insert(v.clone(), S::zero());
                }
            }
            // a*x + r <= 0  =>  x <= -r/a (a > 0) or x >= -r/a (a < 0)
            let bound = -rest.eval(&m).unwrap() / a.clone();
            if a.is_positive() {
                if hi.as_ref().is_none_or(|(h, hs)| bound < *h || (bound == *h && *strict && !hs)) {
                    hi = Some((bound, *strict));
                }
            } else if lo.as_ref().is_none_or(|(l, ls)| bound > *l || (bound == *l && *strict && !ls)) {
                lo = Some((bound, *strict));
            }
        }
        m.insert(x.clone(), pick(lo, hi));
    }
    for (x, def) in defs.iter().rev() {
        for v in def.vars() {
            if !m.contains_key(v) {
                m.insert(v.clone(), S::zero());
            }
        }
        let val = def.eval(&m).unwrap();
        m.insert(x.clone(), val);
    }
    for v in all_vars {
        m.entry(v).or_insert_with(S::zero);
    }
    Some(m)
}

/// A value inside the bounds, preferring zero, then the integer closest to zero.
fn pick<S: Scalar>(lo: Option<(S, bool)>, hi: Option<(S, bool)>) -> S {
    let fits = |v: &S| {
        lo.as_ref().is_none_or(|(l, s)| if *s { v > l } else { v >= l })
            && hi.as_ref().is_none_or(|(h, s)| if *s { v < h } else { v <= h })
    };
    let zero = S::zero();
    if fits(&zero) {
        return zero;
    }
    let candidate = match (&lo, &hi) {
        (Some((l, _)), _) if *l >= zero => {
            let c = l.ceil();
            if fits(&c) {
                c
            } else {
                c + S::one()
            }
        }
        (_, Some((h, _))) => {
            let f = h.floor();
            if fits(&f) {
                f
            } else {
                f - S::one()
            }
        }
        _ => unreachable!("zero fits when there are no bounds"),
    };
    if fits(&candidate) {
        return candidate;
    }
    // No integer inside: take the midpoint, or the point itself.
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) => (l + h) / S::from_i64(2),
        (Some((l, _)), None) => l + S::one(),
        (None, Some((h, _))) => h - S::one(),
        (None, None) => S::zero(),
    }
}

/// A quantifier-free matrix whose two partial instantiations are linear.
pub trait EfMatrix<S> {
    /// The matrix at a point of the universal variables, over the parameters.
    fn at_point(&self, point: &Model<S>) -> Formula<S>;
    /// The matrix at fixed parameters, over the universal variables.
    fn at_params(&self, params: &Model<S>) -> Formula<S>;
}

#[derive(Debug, Clone)]
pub struct EfOptions {
    /// Successive bounds on parameter magnitudes; a final unbounded round follows.
    pub bounds: Vec<i64>,
    pub max_rounds: usize,
    pub limits: SolveLimits,
    /// Wall-clock budget for the whole search.
    pub timeout: Option<Duration>,
}

impl Default for EfOptions {
    fn default() -> Self {
        EfOptions {
            bounds: vec![1, 4, 16, 128, 1024],
            max_rounds: 200,
            limits: SolveLimits::default(),
            timeout: Some(Duration::from_secs(10)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EfResult<S> {
    Found { params: Model<S>, rounds: usize },
    /// No parameter values satisfy the matrix at the points seen so far, hence none at all.
    Empty { points: Vec<Model<S>> },
    Unknown(String),
}

/// Counterexample-guided search for parameter values making the matrix valid,
/// other than the `blocked` ones.
pub fn exists_forall<S: Scalar>(
    params: &BTreeMap<String, Sort>,
    univ: &BTreeMap<String, Sort>,
    matrix: &impl EfMatrix<S>,
    blocked: &[Model<S>],
    opts: &EfOptions,
) -> EfResult<S> {
    let complete = |mut m: Model<S>, vars: &BTreeMap<String, Sort>| {
        for v in vars.keys() {
            m.entry(v.clone()).or_insert_with(S::zero);
        }
        m
    };
    let mut points = vec![complete(Model::new(), univ)];
    let mut rounds = 0;
    let mut limits = opts.limits.clone();
    if let Some(t) = opts.timeout {
        let d = Instant::now() + t;
        limits.deadline = Some(limits.deadline.map_or(d, |e| e.min(d)));
    }
    let out_of_time = || limits.deadline.is_some_and(|d| Instant::now() > d);
    let bounds: Vec<Option<S>> = opts
        .bounds
        .iter()
        .map(|b| Some(S::from_i64(*b)))
        .chain(std::iter::once(None))
        .collect();
    for bound in bounds {
        loop {
            rounds += 1;
            if rounds > opts.max_rounds {
                return EfResult::Unknown(format!("no answer after {} rounds", opts.max_rounds));
            }
            if out_of_time() {
                return EfResult::Unknown(format!("no answer within the time budget after {rounds} rounds"));
            }
            let mut cs: Vec<Formula<S>> = points.iter().map(|p| matrix.at_point(p)).collect();
            for b in blocked {
                cs.push(Formula::or(params.keys().map(|c| {
                    let v = LinExpr::var(c.clone());
                    Formula::ne(&v, &LinExpr::constant(b.get(c).cloned().unwrap_or_else(S::zero)))
                })));
            }
            if let Some(b) = &bound {
                for c in params.keys() {
                    let v = LinExpr::var(c.clone());
                    cs.push(Formula::le(&v, &LinExpr::constant(b.clone())));
                    cs.push(Formula::ge(&v, &LinExpr::constant(-b.clone())));
                }
            }
            let cand = match check_sat(&Formula::and(cs), params, &limits) {
                SatResult::Sat(m) => complete(m, params),
                SatResult::Unsat if bound.is_none() => return EfResult::Empty { points },
                SatResult::Unknown if bound.is_none() || out_of_time() => {
                    return EfResult::Unknown("candidate query undecided".into());
                }
                _ => break,
            };
            match check_sat(&Formula::not(matrix.at_params(&cand)), univ, &limits) {
                SatResult::Unsat => return EfResult::Found { params: cand, rounds },
                SatResult::Sat(cex) => points.push(complete(cex, univ)),
                SatResult::Unknown => return EfResult::Unknown("verification query undecided".into()),
            }
        }
    }
    unreachable!("the unbounded round always returns")
}
