//! Readable expressions from truth tables.

use crate::lang::BoolExpr;

/// Tables over at most this many variables are minimized; larger ones are
/// rendered by Shannon expansion.
pub const MINIMIZE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Cube {
    value: u32,
    /// Bits set here are "don't care".
    free: u32,
}

impl Cube {
    fn covers(self, m: u32) -> bool {
        m & !self.free == self.value
    }

    fn literals(self, n: usize) -> usize {
        n - self.free.count_ones() as usize
    }
}

fn prime_implicants(minterms: &[u32]) -> Vec<Cube> {
    let mut current: Vec<Cube> = minterms.iter().map(|&m| Cube { value: m, free: 0 }).collect();
    let mut primes = Vec::new();
    while !current.is_empty() {
        current.sort();
        current.dedup();
        let mut used = vec![false; current.len()];
        let mut next = Vec::new();
        for i in 0..current.len() {
            for j in i + 1..current.len() {
                let (a, b) = (current[i], current[j]);
                if a.free != b.free {
                    continue;
                }
                let diff = a.value ^ b.value;
                if diff.count_ones() == 1 {
                    used[i] = true;
                    used[j] = true;
                    next.push(Cube {
                        value: a.value & !diff,
                        free: a.free | diff,
                    });
                }
            }
        }
        for (c, u) in current.iter().zip(&used) {
            if !u {
                primes.push(*c);
            }
        }
        current = next;
    }
    primes.sort();
    primes.dedup();
    primes
}

/// Essential primes first, then greedily the prime covering most remaining minterms.
fn cover(minterms: &[u32], primes: &[Cube], n: usize) -> Vec<Cube> {
    let mut chosen: Vec<Cube> = Vec::new();
    let mut left: Vec<u32> = minterms.to_vec();
    for &m in minterms {
        let covering: Vec<&Cube> = primes.iter().filter(|p| p.covers(m)).collect();
        if covering.len() == 1 && !chosen.contains(covering[0]) {
            chosen.push(*covering[0]);
        }
    }
    left.retain(|&m| !chosen.iter().any(|c| c.covers(m)));
    while !left.is_empty() {
        let best = primes
            .iter()
            .filter(|p| !chosen.contains(p))
            .max_by_key(|p| {
                let k = left.iter().filter(|&&m| p.covers(m)).count();
                (k, usize::MAX - p.literals(n))
            })
            .copied()
            .expect("primes cover all minterms");
        chosen.push(best);
        left.retain(|&m| !best.covers(m));
    }
    chosen.sort_by_key(|c| (c.literals(n), c.value));
    chosen
}

fn cube_expr(c: Cube, vars: &[String]) -> BoolExpr {
    BoolExpr::and_all((0..vars.len()).filter(|i| c.free >> i & 1 == 0).map(|i| {
        let v = BoolExpr::var(vars[i].clone());
        if c.value >> i & 1 == 1 {
            v
        } else {
            BoolExpr::not(v)
        }
    }))
}

/// Expression equivalent to `table`, where row bit `i` is the value of `vars[i]`.
pub fn synthesize(table: &[bool], vars: &[String]) -> BoolExpr {
    assert_eq!(table.len(), 1 << vars.len(), "table size must match variable count");
    if table.iter().all(|&b| b) {
        return BoolExpr::Const(true);
    }
    if table.iter().all(|&b| !b) {
        return BoolExpr::Const(false);
    }
    if vars.len() > MINIMIZE_LIMIT {
        return shannon(table, vars);
    }
    let minterms: Vec<u32> = (0..table.len() as u32).filter(|&r| table[r as usize]).collect();
    let primes = prime_implicants(&minterms);
    let sop = BoolExpr::or_all(cover(&minterms, &primes, vars.len()).into_iter().map(|c| cube_expr(c, vars)));
    // A single product of the complement may read better, e.g. !(a & b) vs !a | !b.
    let zeros: Vec<u32> = (0..table.len() as u32).filter(|&r| !table[r as usize]).collect();
    let neg = cover(&zeros, &prime_implicants(&zeros), vars.len());
    if neg.len() == 1 && neg[0].literals(vars.len()) > 1 && size(&sop) > neg[0].literals(vars.len()) + 1 {
        return BoolExpr::not(cube_expr(neg[0], vars));
    }
    sop
}

fn size(e: &BoolExpr) -> usize {
    match e {
        BoolExpr::Const(_) | BoolExpr::Var(_) | BoolExpr::Star => 1,
        BoolExpr::Not(a) => size(a),
        BoolExpr::Binary(_, a, b) | BoolExpr::Choose(a, b) => size(a) + size(b),
    }
}

fn shannon(table: &[bool], vars: &[String]) -> BoolExpr {
    let n = vars.len();
    if table.iter().all(|&b| b) {
        return BoolExpr::Const(true);
    }
    if table.iter().all(|&b| !b) {
        return BoolExpr::Const(false);
    }
    let half = 1 << (n - 1);
    let (lo, hi) = table.split_at(half);
    let v = BoolExpr::var(vars[n - 1].clone());
    if lo == hi {
        return shannon(lo, &vars[..n - 1]);
    }
    let e0 = shannon(lo, &vars[..n - 1]);
    let e1 = shannon(hi, &vars[..n - 1]);
    match (&e0, &e1) {
        (BoolExpr::Const(false), BoolExpr::Const(true)) => v,
        (BoolExpr::Const(true), BoolExpr::Const(false)) => BoolExpr::not(v),
        (BoolExpr::Const(false), _) => BoolExpr::and(v, e1),
        (_, BoolExpr::Const(true)) => BoolExpr::or(v, e0),
        (BoolExpr::Const(true), _) => BoolExpr::or(BoolExpr::not(v), e1),
        (_, BoolExpr::Const(false)) => BoolExpr::and(BoolExpr::not(v), e0),
        _ => BoolExpr::or(BoolExpr::and(v.clone(), e1), BoolExpr::and(BoolExpr::not(v), e0)),
    }
}
