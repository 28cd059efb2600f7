//! Strongest postconditions along a path, in normal form.
//!
//! A path assertion at copy `k` is a disjunction of
//! `rho /\ (b1@k = xi1) /\ ... /\ (bn@k = xin)` where `rho` and every `xi`
//! mention only copies below `k` (at the start of a path, `rho` is the cut-point
//! assertion over copy 0 and there are no equalities). Taking a step folds the
//! equalities into `rho` and defines copy `k + 1`.

use std::collections::BTreeMap;

use super::term::{CopyVar, Term};

/// Right-hand side of one assigned variable, over the current copy.
#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Det(Term),
    Star,
    /// `choose(a, b)`
    Choose(Term, Term),
}

/// What one update of one statement does to the state, over the current copy.
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    Frame,
    Assume(Term),
    /// Simultaneous assignment; unlisted variables keep their value.
    Assign(Vec<(String, Rhs)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disjunct {
    pub rho: Vec<Term>,
    /// Defining equality of each variable at the assertion's copy; empty at copy 0.
    pub eqs: BTreeMap<String, Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathAssertion {
    pub copy: usize,
    pub vars: Vec<String>,
    pub disjuncts: Vec<Disjunct>,
}

impl PathAssertion {
    pub fn start(vars: Vec<String>, assertion: Term) -> Self {
        PathAssertion {
            copy: 0,
            vars,
            disjuncts: vec![Disjunct {
                rho: vec![assertion],
                eqs: BTreeMap::new(),
            }],
        }
    }

    pub fn current(&self) -> Vec<Term> {
        self.vars.iter().map(|v| Term::var(v.clone(), self.copy)).collect()
    }

    pub fn to_term(&self) -> Term {
        Term::or(self.disjuncts.iter().map(|d| self.disjunct_term(d)))
    }

    pub fn disjunct_term(&self, d: &Disjunct) -> Term {
        let eqs = d
            .eqs
            .iter()
            .map(|(v, xi)| Term::iff(Term::var(v.clone(), self.copy), xi.clone()));
        Term::and(d.rho.iter().cloned().chain(eqs))
    }

    /// Whether the assertion has the normal form described in the module docs.
    pub fn is_normal(&self) -> bool {
        let below = |t: &Term, k: usize| t.copy_vars().iter().all(|v: &CopyVar| v.copy < k);
        self.disjuncts.iter().all(|d| {
            if self.copy == 0 {
                return d.eqs.is_empty() && d.rho.iter().all(|t| below(t, 1));
            }
            d.eqs.len() == self.vars.len()
                && self.vars.iter().all(|v| d.eqs.contains_key(v))
                && d.eqs.values().all(|t| below(t, self.copy))
                && d.rho.iter().all(|t| below(t, self.copy))
        })
    }
}

/// Alternatives of one effect: extra path condition and new values.
fn alternatives(e: &Effect) -> Vec<(Vec<Term>, BTreeMap<String, Term>)> {
    match e {
        Effect::Frame => vec![(vec![], BTreeMap::new())],
        Effect::Assume(g) => vec![(vec![g.clone()], BTreeMap::new())],
        Effect::Assign(items) => {
            let mut alts = vec![(Vec::new(), BTreeMap::new())];
            for (v, rhs) in items {
                let mut next = Vec::new();
                for (cond, vals) in alts {
                    let mut push = |extra: Option<Term>, val: Term| {
                        let mut c: Vec<Term> = cond.clone();
                        c.extend(extra);
                        let mut m: BTreeMap<String, Term> = vals.clone();
                        m.insert(v.clone(), val);
                        next.push((c, m));
                    };
                    match rhs {
                        Rhs::Det(t) => push(None, t.clone()),
                        Rhs::Star => {
                            push(None, Term::Const(true));
                            push(None, Term::Const(false));
                        }
                        // true is possible unless only the second operand holds
                        Rhs::Choose(a, b) => {
                            push(Some(Term::or([a.clone(), Term::not(b.clone())])), Term::Const(true));
                            push(Some(Term::not(a.clone())), Term::Const(false));
                        }
                    }
                }
                alts = next;
            }
            alts
        }
    }
}

/// Strongest postcondition of a single effect.
pub fn sp(effect: &Effect, a: &PathAssertion) -> PathAssertion {
    sp_guarded(&[(None, effect.clone())], a)
}

/// Strongest postcondition of a location whose update is chosen by selectors.
/// Exactly one selector is assumed true; a `None` selector means the option is
/// the only one.
pub fn sp_guarded(options: &[(Option<Term>, Effect)], a: &PathAssertion) -> PathAssertion {
    let k = a.copy;
    let alts: Vec<Vec<(Vec<Term>, BTreeMap<String, Term>)>> =
        options.iter().map(|(_, e)| alternatives(e)).collect();
    let mut disjuncts = Vec::new();
    for d in &a.disjuncts {
        let mut base = d.rho.clone();
        base.extend(d.eqs.iter().map(|(v, xi)| Term::iff(Term::var(v.clone(), k), xi.clone())));
        // One choice of alternative per option.
        let mut picks: Vec<Vec<usize>> = vec![vec![]];
        for opt in &alts {
            picks = picks
                .into_iter()
                .flat_map(|p| {
                    (0..opt.len()).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        for pick in picks {
            let mut rho = base.clone();
            for (oi, (sel, _)) in options.iter().enumerate() {
                let cond = Term::and(alts[oi][pick[oi]].0.iter().cloned());
                rho.push(match sel {
                    Some(s) => Term::implies(s.clone(), cond),
                    None => cond,
                });
            }
            let eqs = a
                .vars
                .iter()
                .map(|v| {
                    let value = |oi: usize| {
                        alts[oi][pick[oi]]
                            .1
                            .get(v)
                            .cloned()
                            .unwrap_or_else(|| Term::var(v.clone(), k))
                    };
                    let n = options.len();
                    let mut t = value(n - 1);
                    for oi in (0..n - 1).rev() {
                        let s = options[oi].0.clone().expect("several options need selectors");
                        t = Term::ite(s, value(oi), t);
                    }
                    (v.clone(), t)
                })
                .collect();
            let rho: Vec<Term> = rho.into_iter().filter(|t| *t != Term::Const(true)).collect();
            if rho.contains(&Term::Const(false)) {
                continue;
            }
            disjuncts.push(Disjunct { rho, eqs });
        }
    }
    PathAssertion {
        copy: k + 1,
        vars: a.vars.clone(),
        disjuncts,
    }
}
