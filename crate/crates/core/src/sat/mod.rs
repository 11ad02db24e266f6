//! CNF data structures and a complete CDCL satisfiability engine.
//!
//! Every analysis check in this crate bottoms out in a query against this
//! module. Literals at the formula level are DIMACS-style signed integers
//! (variable indices start at 1); the solver packs them internally.

mod dimacs;
mod external;
mod solver;

pub use dimacs::{read_dimacs, write_dimacs, DimacsError};
pub use external::ExternalSolver;
pub use solver::{Solver, SolverConfig};

use std::time::{Duration, Instant};

/// CNF formula over variables `1..=num_vars`; clauses are lists of signed
/// variable indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize) -> CnfFormula {
        CnfFormula { num_vars, clauses: Vec::new() }
    }

    /// Adds a clause, deduplicating literals and dropping tautologies.
    /// Variable 0 is not a legal literal.
    pub fn add_clause(&mut self, lits: &[i32]) {
        let mut clause: Vec<i32> = Vec::with_capacity(lits.len());
        for &l in lits {
            assert!(l != 0, "literal 0 is reserved for clause termination");
            if clause.contains(&-l) {
                return; // tautology
            }
            if !clause.contains(&l) {
                clause.push(l);
            }
            self.num_vars = self.num_vars.max(l.unsigned_abs() as usize);
        }
        self.clauses.push(clause);
    }

    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| clause_satisfied(c, model))
    }
}

pub(crate) fn clause_satisfied(clause: &[i32], model: &[bool]) -> bool {
    clause.iter().any(|&l| lit_satisfied(l, model))
}

pub(crate) fn lit_satisfied(l: i32, model: &[bool]) -> bool {
    let v = model[l.unsigned_abs() as usize - 1];
    if l > 0 {
        v
    } else {
        !v
    }
}

/// Query outcome. `Timeout` is a result, not an error; it feeds the EX
/// statistic of reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Sat,
    Unsat,
    Timeout,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct SatResult {
    pub status: Status,
    /// Total assignment, present iff `status == Sat`. Index `v` holds the
    /// value of variable `v + 1`. Verified clause-by-clause before return.
    pub model: Option<Vec<bool>>,
    pub stats: QueryStats,
}

/// Resource limit for one query: a deterministic conflict budget plus a
/// wall-clock backstop.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub max_conflicts: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget::default()
    }

    pub fn conflicts(n: u64) -> Budget {
        Budget { max_conflicts: Some(n), deadline: None }
    }
}

/// Solves a standalone formula with a fresh solver.
pub fn solve_formula(f: &CnfFormula, assumptions: &[i32], budget: &Budget) -> SatResult {
    let mut solver = Solver::new(SolverConfig::default());
    solver.load(f);
    solver.solve(assumptions, budget)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("satisfiability budget exhausted")]
pub struct TimeoutError;

/// Entailment via refutation: true iff `f and cube and (negation of every
/// cube in negated)` is unsatisfiable, i.e. `f and cube` entails the
/// disjunction of the negated cubes.
pub fn entails(
    f: &CnfFormula,
    cube: &[i32],
    negated: &[&[i32]],
    budget: &Budget,
) -> Result<bool, TimeoutError> {
    let mut query = f.clone();
    for neg in negated {
        let clause: Vec<i32> = neg.iter().map(|&l| -l).collect();
        if clause.is_empty() {
            return Ok(true); // negating the empty cube yields the empty clause
        }
        query.add_clause(&clause);
    }
    for &l in cube {
        query.num_vars = query.num_vars.max(l.unsigned_abs() as usize);
    }
    match solve_formula(&query, cube, budget).status {
        Status::Unsat => Ok(true),
        Status::Sat => Ok(false),
        Status::Timeout => Err(TimeoutError),
    }
}
