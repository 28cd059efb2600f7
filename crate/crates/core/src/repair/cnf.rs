use std::time::{Duration, Instant};

use varisat::{CnfFormula, ExtendFormula, Lit, Solver};

/// Clause database with named variables; literals are DIMACS-style nonzero integers.
#[derive(Debug, Clone, Default)]
pub struct Cnf {
    pub names: Vec<String>,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn var(&mut self, name: impl Into<String>) -> i32 {
        self.names.push(name.into());
        self.names.len() as i32
    }

    pub fn vars(&mut self, prefix: &str, n: usize) -> Vec<i32> {
        (0..n).map(|i| self.var(format!("{prefix}[{i}]"))).collect()
    }

    pub fn clause(&mut self, lits: impl IntoIterator<Item = i32>) {
        self.clauses.push(lits.into_iter().collect());
    }

    pub fn unit(&mut self, lit: i32) {
        self.clauses.push(vec![lit]);
    }

    pub fn exactly_one(&mut self, lits: &[i32]) {
        self.clause(lits.iter().copied());
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                self.clause([-lits[i], -lits[j]]);
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn solve(&self) -> SatOutcome {
        let start = Instant::now();
        let mut formula = CnfFormula::new();
        formula.set_var_count(self.num_vars());
        let mut buf = Vec::new();
        for c in &self.clauses {
            buf.clear();
            buf.extend(c.iter().map(|&l| Lit::from_dimacs(l as isize)));
            formula.add_clause(&buf);
        }
        let mut solver = Solver::new();
        solver.add_formula(&formula);
        let sat = solver.solve().expect("in-process solver does not fail");
        let elapsed = start.elapsed();
        if !sat {
            return SatOutcome::Unsat(elapsed);
        }
        let mut values = vec![false; self.num_vars() + 1];
        for lit in solver.model().unwrap_or_default() {
            let v = lit.to_dimacs();
            values[v.unsigned_abs()] = v > 0;
        }
        SatOutcome::Sat(values, elapsed)
    }
}

#[derive(Debug, Clone)]
pub enum SatOutcome {
    /// Values indexed by variable number (index 0 unused).
    Sat(Vec<bool>, Duration),
    Unsat(Duration),
}
