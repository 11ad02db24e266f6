//! Decision-set checks: preprocessing, negative-overlap enumeration,
//! default-rule reachability, rule and literal redundancy, iterative
//! simplification and equivalence.
//!
//! Every check is one satisfiability query against B. A `Checker` keeps one
//! incremental solver over B and activates the per-rule negated-body clauses
//! through selector variables assumed per query; a fresh-solver mode exists
//! so the two strategies can be tested against each other. Positive answers
//! ship a witness assignment, negative ones a replayable certificate.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::background::BackgroundKnowledge;
use crate::model::{AtomAssignment, Cube, DecisionSet, Literal, Rule, RuleIdx};
use crate::sat::{Budget, CnfFormula, SatResult, Solver, SolverConfig, Status};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("rule {0} not present in the decision set")]
    NoSuchRule(RuleIdx),
    #[error("literal position {pos} out of range for rule {rule}")]
    NoSuchLiteral { rule: RuleIdx, pos: usize },
    #[error("literal redundancy requires a body with at least two literals")]
    BodyTooShort,
    #[error("equivalence requires the same default outcome on both sides")]
    DefaultMismatch,
}

/// Order in which simplification visits rules and literal positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderPolicy {
    /// Ascending rule index, then ascending literal position.
    #[default]
    Ascending,
    Descending,
}

impl OrderPolicy {
    pub(crate) fn order<T>(&self, mut items: Vec<T>) -> Vec<T> {
        if *self == OrderPolicy::Descending {
            items.reverse();
        }
        items
    }
}

#[derive(Debug, Clone)]
pub struct CheckerConfig {
    pub solver: SolverConfig,
    /// Reuse one incremental solver over B across queries. Answers must not
    /// depend on this; the fresh mode exists for differential testing.
    pub reuse_solver: bool,
    pub jobs: usize,
    /// Also enumerate positive (same-outcome) overlap pairs.
    pub positive_overlap: bool,
    pub order: OrderPolicy,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig {
            solver: SolverConfig::default(),
            reuse_solver: true,
            jobs: 1,
            positive_overlap: false,
            order: OrderPolicy::Ascending,
        }
    }
}

/// Splits a per-model budget into per-query sub-budgets: each query gets
/// `remaining / pending` conflicts (floor one) plus the shared deadline.
#[derive(Debug, Clone)]
pub struct BudgetPlanner {
    pub deadline: Option<Instant>,
    pub conflicts_left: Option<u64>,
}

impl BudgetPlanner {
    pub fn unlimited() -> BudgetPlanner {
        BudgetPlanner { deadline: None, conflicts_left: None }
    }

    pub fn new(wall: Option<Duration>, conflicts: Option<u64>) -> BudgetPlanner {
        BudgetPlanner { deadline: wall.map(|d| Instant::now() + d), conflicts_left: conflicts }
    }

    pub fn query_budget(&self, pending: u64) -> Budget {
        Budget {
            max_conflicts: self
                .conflicts_left
                .map(|left| (left / pending.max(1)).max(1)),
            deadline: self.deadline,
        }
    }

    pub fn consume(&mut self, conflicts: u64) {
        if let Some(left) = &mut self.conflicts_left {
            *left = left.saturating_sub(conflicts);
        }
    }

    pub fn exhausted(&self) -> bool {
        self.conflicts_left == Some(0)
            || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// The UNSAT query that proved a finding; replaying it must yield UNSAT.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    #[serde(skip)]
    pub formula: CnfFormula,
    pub assumptions: Vec<i32>,
    pub expected: Status,
    pub clause_count: usize,
}

impl Certificate {
    pub fn replay(&self, budget: &Budget) -> Status {
        crate::sat::solve_formula(&self.formula, &self.assumptions, budget).status
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapKind {
    Negative,
    Positive,
}

#[derive(Debug, Clone)]
pub struct OverlapPair {
    pub i: RuleIdx,
    pub j: RuleIdx,
    pub kind: OverlapKind,
    /// A valid point on which both rules fire.
    pub witness: AtomAssignment,
}

#[derive(Debug, Clone, Default)]
pub struct OverlapReport {
    pub negative: Vec<OverlapPair>,
    pub positive: Vec<OverlapPair>,
    pub undecided: Vec<(RuleIdx, RuleIdx)>,
    /// Number of rule pairs with differing outcomes (PO's denominator).
    pub total_cross_pairs: u64,
    pub sat_calls: u64,
}

impl OverlapReport {
    pub fn negative_involving(&self, k: RuleIdx) -> Option<&OverlapPair> {
        self.negative.iter().find(|p| p.i == k || p.j == k)
    }

    pub fn undecided_involving(&self, k: RuleIdx) -> Option<(RuleIdx, RuleIdx)> {
        self.undecided.iter().copied().find(|(i, j)| *i == k || *j == k)
    }

    pub fn has_negative(&self) -> bool {
        !self.negative.is_empty()
    }
}

#[derive(Debug, Clone)]
pub enum Reachability {
    Reachable(AtomAssignment),
    Unreachable(Certificate),
    Undecided,
}

#[derive(Debug, Clone)]
pub enum RuleVerdict {
    Redundant(Certificate),
    /// Witness: a valid point covered by the rule but by no same-outcome
    /// sibling.
    NotRedundant(AtomAssignment),
    Undecided,
}

#[derive(Debug, Clone)]
pub enum LiteralVerdict {
    NotRedundant,
    Local(Certificate),
    Global(Certificate),
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    RedundantRule,
    LocalLiteral,
    GlobalLiteral,
}

#[derive(Debug, Clone, Serialize)]
pub struct RedundancyFinding {
    pub rule: RuleIdx,
    /// Literal position at removal time, for literal findings.
    pub position: Option<usize>,
    pub literal: Option<Literal>,
    pub kind: FindingKind,
    pub certificate: Certificate,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct CheckerStats {
    pub sat_calls: u64,
    pub conflicts: u64,
    pub timeouts: u64,
}

/// Query engine over one decision set and one background knowledge.
pub struct Checker<'a> {
    ds: &'a DecisionSet,
    bk: &'a BackgroundKnowledge,
    config: CheckerConfig,
    solver: Option<Solver>,
    selectors: HashMap<RuleIdx, i32>,
    pub stats: CheckerStats,
}

impl<'a> Checker<'a> {
    pub fn new(ds: &'a DecisionSet, bk: &'a BackgroundKnowledge, config: CheckerConfig) -> Self {
        Checker { ds, bk, config, solver: None, selectors: HashMap::new(), stats: CheckerStats::default() }
    }

    fn rule(&self, idx: RuleIdx) -> Result<&'a Rule, AnalysisError> {
        self.ds.rule(idx).ok_or(AnalysisError::NoSuchRule(idx))
    }

    fn cube_assumptions(&self, cube: &Cube) -> Vec<i32> {
        cube.literals()
            .iter()
            .map(|l| self.bk.table().dimacs_of(l).expect("rule atoms are registered"))
            .collect()
    }

    /// Runs one query: B, the given assumption cube, and the negated bodies
    /// of `negate` as clauses.
    fn query(&mut self, assumptions: &[i32], negate: &[RuleIdx], budget: &Budget) -> SatResult {
        self.stats.sat_calls += 1;
        let result = if self.config.reuse_solver {
            self.query_incremental(assumptions, negate, budget)
        } else {
            self.query_fresh(assumptions, negate, budget)
        };
        self.stats.conflicts += result.stats.conflicts;
        if result.status == Status::Timeout {
            self.stats.timeouts += 1;
        }
        result
    }

    fn query_incremental(
        &mut self,
        assumptions: &[i32],
        negate: &[RuleIdx],
        budget: &Budget,
    ) -> SatResult {
        if self.solver.is_none() {
            let mut solver = Solver::new(self.config.solver.clone());
            solver.load(&self.bk.to_formula());
            solver.ensure_vars(self.bk.table().len());
            self.solver = Some(solver);
        }
        let mut assumps = assumptions.to_vec();
        for &idx in negate {
            let sel = self.selector_for(idx);
            assumps.push(sel);
        }
        self.solver.as_mut().unwrap().solve(&assumps, budget)
    }

    /// Selector variable guarding the negated-body clause of a rule: the
    /// clause `(!sel or !l1 or ... or !lm)` is active only when `sel` is
    /// assumed, so one solver serves every query shape.
    fn selector_for(&mut self, idx: RuleIdx) -> i32 {
        if let Some(&sel) = self.selectors.get(&idx) {
            return sel;
        }
        let rule = self.ds.rule(idx).expect("selector for a present rule");
        let solver = self.solver.as_mut().unwrap();
        let sel = solver.new_var();
        let mut clause = vec![-sel];
        for l in rule.body.literals() {
            clause.push(-self.bk.table().dimacs_of(l).expect("registered atom"));
        }
        solver.add_clause_dimacs(&clause);
        self.selectors.insert(idx, sel);
        sel
    }

    fn query_fresh(&mut self, assumptions: &[i32], negate: &[RuleIdx], budget: &Budget) -> SatResult {
        let f = self.materialize(negate);
        let mut solver = Solver::new(self.config.solver.clone());
        solver.load(&f);
        solver.ensure_vars(self.bk.table().len());
        solver.solve(assumptions, budget)
    }

    /// B plus plain negated-body clauses; also the certificate formula.
    fn materialize(&self, negate: &[RuleIdx]) -> CnfFormula {
        let mut f = self.bk.to_formula();
        for &idx in negate {
            let rule = self.ds.rule(idx).expect("negated rule present");
            let clause: Vec<i32> = rule
                .body
                .literals()
                .iter()
                .map(|l| -self.bk.table().dimacs_of(l).expect("registered atom"))
                .collect();
            f.add_clause(&clause);
        }
        f
    }

    fn certificate(&self, assumptions: Vec<i32>, negate: &[RuleIdx]) -> Certificate {
        let formula = self.materialize(negate);
        let clause_count = formula.clauses.len();
        Certificate { formula, assumptions, expected: Status::Unsat, clause_count }
    }

    fn witness(&self, model: &[bool]) -> AtomAssignment {
        AtomAssignment { values: model[..self.bk.table().len()].to_vec() }
    }

    /// Does the rule fire on at least one valid input?
    pub fn rule_fires(&mut self, idx: RuleIdx, budget: &Budget) -> Result<Status, AnalysisError> {
        let rule = self.rule(idx)?;
        let assumptions = self.cube_assumptions(&rule.body);
        Ok(self.query(&assumptions, &[], budget).status)
    }

    /// All negative overlap pairs, iterating distinct-outcome groups
    /// pairwise: exactly one satisfiability call per differing-outcome rule
    /// pair. Results are merged in deterministic pair order regardless of
    /// the worker count.
    pub fn overlap_pairs(&mut self, planner: &mut BudgetPlanner) -> OverlapReport {
        let outcomes = self.ds.distinct_outcomes();
        let groups: Vec<Vec<RuleIdx>> = outcomes
            .iter()
            .map(|o| {
                self.ds
                    .rules()
                    .iter()
                    .filter(|r| &r.outcome == o)
                    .map(|r| r.idx)
                    .collect()
            })
            .collect();
        let mut tasks: Vec<(RuleIdx, RuleIdx, OverlapKind)> = Vec::new();
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                for &i in &groups[a] {
                    for &j in &groups[b] {
                        tasks.push((i, j, OverlapKind::Negative));
                    }
                }
            }
        }
        let total_cross_pairs = tasks.len() as u64;
        if self.config.positive_overlap {
            for group in &groups {
                for (a, &i) in group.iter().enumerate() {
                    for &j in group.iter().skip(a + 1) {
                        tasks.push((i, j, OverlapKind::Positive));
                    }
                }
            }
        }

        let outcomes_of_task = |task: &(RuleIdx, RuleIdx, OverlapKind)| (task.0, task.1, task.2);
        let results: Vec<(Status, Option<AtomAssignment>, u64)> = if self.config.jobs > 1 {
            self.solve_pairs_parallel(&tasks, planner)
        } else {
            let mut out = Vec::with_capacity(tasks.len());
            for task in &tasks {
                let pending = (tasks.len() - out.len()) as u64;
                let budget = planner.query_budget(pending);
                let r = self.check_pair(task.0, task.1, &budget);
                planner.consume(r.2);
                out.push(r);
            }
            out
        };

        let mut report = OverlapReport { total_cross_pairs, ..OverlapReport::default() };
        report.sat_calls = tasks.len() as u64;
        for (task, (status, witness, _)) in tasks.iter().zip(results) {
            let (i, j, kind) = outcomes_of_task(task);
            match status {
                Status::Sat => {
                    let pair = OverlapPair { i, j, kind, witness: witness.unwrap() };
                    match kind {
                        OverlapKind::Negative => report.negative.push(pair),
                        OverlapKind::Positive => report.positive.push(pair),
                    }
                }
                Status::Unsat => {}
                Status::Timeout => report.undecided.push((i, j)),
            }
        }
        report
    }

    fn check_pair(&mut self, i: RuleIdx, j: RuleIdx, budget: &Budget) -> (Status, Option<AtomAssignment>, u64) {
        let mut assumptions = self.cube_assumptions(&self.ds.rule(i).unwrap().body);
        assumptions.extend(self.cube_assumptions(&self.ds.rule(j).unwrap().body));
        // Pair queries always run on pair-independent solver state: witness
        // models must not depend on how pairs are chunked over workers, so
        // that reports are byte-stable regardless of parallelism.
        self.stats.sat_calls += 1;
        let r = self.query_fresh(&assumptions, &[], budget);
        self.stats.conflicts += r.stats.conflicts;
        if r.status == Status::Timeout {
            self.stats.timeouts += 1;
        }
        let witness = r.model.as_deref().map(|m| self.witness(m));
        (r.status, witness, r.stats.conflicts)
    }

    fn solve_pairs_parallel(
        &mut self,
        tasks: &[(RuleIdx, RuleIdx, OverlapKind)],
        planner: &mut BudgetPlanner,
    ) -> Vec<(Status, Option<AtomAssignment>, u64)> {
        let budget = planner.query_budget(tasks.len() as u64);
        let jobs = self.config.jobs.max(1).min(tasks.len().max(1));
        let chunk = tasks.len().div_ceil(jobs);
        let ds = self.ds;
        let bk = self.bk;
        let config = &self.config;
        let mut results: Vec<(Status, Option<AtomAssignment>, u64)> = Vec::with_capacity(tasks.len());
        let chunks: Vec<Vec<(Status, Option<AtomAssignment>, u64)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = tasks
                .chunks(chunk.max(1))
                .map(|slice| {
                    scope.spawn(move || {
                        let mut worker = Checker::new(ds, bk, config.clone());
                        slice
                            .iter()
                            .map(|&(i, j, _)| worker.check_pair(i, j, &budget))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("overlap worker")).collect()
        });
        for c in chunks {
            for r in c {
                planner.consume(r.2);
                self.stats.sat_calls += 1;
                results.push(r);
            }
        }
        results
    }

    /// One call on B plus one negated-body clause per rule: a model is a
    /// valid point firing no rule.
    pub fn default_reachable(&mut self, planner: &mut BudgetPlanner) -> Reachability {
        let negate: Vec<RuleIdx> = self.ds.rules().iter().map(|r| r.idx).collect();
        let budget = planner.query_budget(1);
        let r = self.query(&[], &negate, &budget);
        planner.consume(r.stats.conflicts);
        match r.status {
            Status::Sat => Reachability::Reachable(self.witness(r.model.as_deref().unwrap())),
            Status::Unsat => Reachability::Unreachable(self.certificate(vec![], &negate)),
            Status::Timeout => Reachability::Undecided,
        }
    }

    /// Redundancy of one rule: B and its body must entail the disjunction of
    /// its same-outcome siblings, checked as one UNSAT query.
    pub fn rule_redundant(
        &mut self,
        idx: RuleIdx,
        planner: &mut BudgetPlanner,
    ) -> Result<RuleVerdict, AnalysisError> {
        let rule = self.rule(idx)?;
        let siblings: Vec<RuleIdx> = self.ds.siblings(idx).iter().map(|r| r.idx).collect();
        let assumptions = self.cube_assumptions(&rule.body);
        let budget = planner.query_budget(1);
        let r = self.query(&assumptions, &siblings, &budget);
        planner.consume(r.stats.conflicts);
        Ok(match r.status {
            Status::Unsat => RuleVerdict::Redundant(self.certificate(assumptions, &siblings)),
            Status::Sat => RuleVerdict::NotRedundant(self.witness(r.model.as_deref().unwrap())),
            Status::Timeout => RuleVerdict::Undecided,
        })
    }

    /// Literal redundancy: local first (rest of the body entails the
    /// literal under B), then global (the flipped body lands inside the
    /// same-outcome siblings), exactly in that order.
    pub fn literal_redundant(
        &mut self,
        idx: RuleIdx,
        pos: usize,
        planner: &mut BudgetPlanner,
    ) -> Result<LiteralVerdict, AnalysisError> {
        let rule = self.rule(idx)?;
        if rule.body.len() < 2 {
            return Err(AnalysisError::BodyTooShort);
        }
        if pos >= rule.body.len() {
            return Err(AnalysisError::NoSuchLiteral { rule: idx, pos });
        }
        // The flipped body is the assumption cube of both checks.
        let flipped = rule.body.flipped(pos);
        let assumptions = self.cube_assumptions(&flipped);

        let budget = planner.query_budget(2);
        let local = self.query(&assumptions, &[], &budget);
        planner.consume(local.stats.conflicts);
        match local.status {
            Status::Unsat => {
                return Ok(LiteralVerdict::Local(self.certificate(assumptions, &[])));
            }
            Status::Timeout => return Ok(LiteralVerdict::Undecided),
            Status::Sat => {}
        }

        let siblings: Vec<RuleIdx> = self.ds.siblings(idx).iter().map(|r| r.idx).collect();
        let budget = planner.query_budget(1);
        let global = self.query(&assumptions, &siblings, &budget);
        planner.consume(global.stats.conflicts);
        Ok(match global.status {
            Status::Unsat => LiteralVerdict::Global(self.certificate(assumptions, &siblings)),
            Status::Sat => LiteralVerdict::NotRedundant,
            Status::Timeout => LiteralVerdict::Undecided,
        })
    }
}

/// Removes exact-duplicate bodies with equal outcomes and rules that never
/// fire on a valid input. Rules whose never-fires check timed out are kept
/// and listed as unverified.
pub struct Preprocessed {
    pub ds: DecisionSet,
    pub removed: Vec<RemovedRule>,
    pub unverified: Vec<RuleIdx>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemovedRule {
    pub idx: RuleIdx,
    pub reason: RemovalReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalReason {
    DuplicateOf(RuleIdx),
    NeverFires,
}

pub fn preprocess(
    ds: &DecisionSet,
    bk: &BackgroundKnowledge,
    config: &CheckerConfig,
    planner: &mut BudgetPlanner,
) -> Preprocessed {
    let mut removed = Vec::new();
    let mut unverified = Vec::new();
    let mut kept: Vec<Rule> = Vec::new();
    for rule in ds.rules() {
        if let Some(first) = kept
            .iter()
            .find(|k| k.outcome == rule.outcome && k.body.same_set(&rule.body))
        {
            removed.push(RemovedRule { idx: rule.idx, reason: RemovalReason::DuplicateOf(first.idx) });
        } else {
            kept.push(rule.clone());
        }
    }
    let deduped = ds.replace_rules(kept.clone());
    let mut checker = Checker::new(&deduped, bk, config.clone());
    let mut fired: Vec<Rule> = Vec::new();
    for (i, rule) in kept.iter().enumerate() {
        let pending = (kept.len() - i) as u64;
        let budget = planner.query_budget(pending);
        let assumptions = checker.cube_assumptions(&rule.body);
        let r = checker.query(&assumptions, &[], &budget);
        planner.consume(r.stats.conflicts);
        match r.status {
            Status::Sat => fired.push(rule.clone()),
            Status::Unsat => {
                removed.push(RemovedRule { idx: rule.idx, reason: RemovalReason::NeverFires })
            }
            Status::Timeout => {
                unverified.push(rule.idx);
                fired.push(rule.clone());
            }
        }
    }
    Preprocessed { ds: ds.replace_rules(fired), removed, unverified }
}

/// Fixed-point simplification: redundant rules are removed one at a time
/// (re-checking after each removal), then redundant literals one at a time;
/// the two phases repeat until neither changes anything, so the result has
/// no redundant rule and no redundant literal. Different orders may yield
/// different, equally valid, decision sets.
pub struct Simplified {
    pub ds: DecisionSet,
    pub findings: Vec<RedundancyFinding>,
    /// False when a timeout left the simplification partial.
    pub complete: bool,
}

pub fn simplify(
    ds: &DecisionSet,
    bk: &BackgroundKnowledge,
    config: &CheckerConfig,
    planner: &mut BudgetPlanner,
) -> Simplified {
    let mut current = ds.clone();
    let mut findings = Vec::new();
    let mut complete = true;
    loop {
        let mut changed = false;
        // Rule phase.
        'rules: loop {
            let order = config.order.order(current.rules().iter().map(|r| r.idx).collect());
            for idx in order {
                let mut checker = Checker::new(&current, bk, config.clone());
                match checker.rule_redundant(idx, planner).expect("index from current set") {
                    RuleVerdict::Redundant(certificate) => {
                        findings.push(RedundancyFinding {
                            rule: idx,
                            position: None,
                            literal: None,
                            kind: FindingKind::RedundantRule,
                            certificate,
                        });
                        current = current.without_rule(idx);
                        changed = true;
                        continue 'rules;
                    }
                    RuleVerdict::Undecided => complete = false,
                    RuleVerdict::NotRedundant(_) => {}
                }
            }
            break;
        }
        // Literal phase.
        'literals: loop {
            let rule_order = config.order.order(current.rules().iter().map(|r| r.idx).collect());
            for idx in rule_order {
                let body_len = current.rule(idx).unwrap().body.len();
                if body_len < 2 {
                    continue;
                }
                let positions = config.order.order((0..body_len).collect());
                for pos in positions {
                    let mut checker = Checker::new(&current, bk, config.clone());
                    let verdict = checker
                        .literal_redundant(idx, pos, planner)
                        .expect("position from current body");
                    let kind = match verdict {
                        LiteralVerdict::Local(_) => FindingKind::LocalLiteral,
                        LiteralVerdict::Global(_) => FindingKind::GlobalLiteral,
                        LiteralVerdict::Undecided => {
                            complete = false;
                            continue;
                        }
                        LiteralVerdict::NotRedundant => continue,
                    };
                    let certificate = match verdict {
                        LiteralVerdict::Local(c) | LiteralVerdict::Global(c) => c,
                        _ => unreachable!(),
                    };
                    let literal = current.rule(idx).unwrap().body.literals()[pos].clone();
                    findings.push(RedundancyFinding {
                        rule: idx,
                        position: Some(pos),
                        literal: Some(literal),
                        kind,
                        certificate,
                    });
                    current = current.without_literal(idx, pos);
                    changed = true;
                    continue 'literals;
                }
            }
            break;
        }
        if !changed {
            break;
        }
    }
    Simplified { ds: current, findings, complete }
}

#[derive(Debug, Clone)]
pub enum EquivVerdict {
    Equivalent,
    /// An outcome whose cover sets differ, with a point in the difference.
    NotEquivalent { outcome: crate::model::Outcome, witness: AtomAssignment },
    Undecided,
}

/// Decision-set equivalence: for each outcome, mutual entailment of the
/// disjunction of same-outcome bodies under B, two UNSAT queries per
/// outcome. The disjunctions are encoded with auxiliary selector variables.
pub fn equivalent(
    ds1: &DecisionSet,
    ds2: &DecisionSet,
    bk: &BackgroundKnowledge,
    config: &CheckerConfig,
    planner: &mut BudgetPlanner,
) -> Result<EquivVerdict, AnalysisError> {
    if ds1.default_outcome != ds2.default_outcome {
        return Err(AnalysisError::DefaultMismatch);
    }
    let mut outcomes = ds1.distinct_outcomes();
    for o in ds2.distinct_outcomes() {
        if !outcomes.contains(&o) {
            outcomes.push(o);
        }
    }
    let mut undecided = false;
    for o in &outcomes {
        for (from, to) in [(ds1, ds2), (ds2, ds1)] {
            let sources: Vec<&Rule> = from.rules().iter().filter(|r| &r.outcome == o).collect();
            let sinks: Vec<&Rule> = to.rules().iter().filter(|r| &r.outcome == o).collect();
            if sources.is_empty() {
                continue; // empty cover is included in anything
            }
            let mut f = bk.to_formula();
            let atom_count = bk.table().len();
            f.num_vars = f.num_vars.max(atom_count);
            // Selector t_r per source rule: t_r implies the body; at least
            // one t_r holds.
            let mut any: Vec<i32> = Vec::new();
            for (k, rule) in sources.iter().enumerate() {
                let t = (atom_count + k + 1) as i32;
                any.push(t);
                for lit in rule.body.literals() {
                    let l = bk.table().dimacs_of(lit).expect("registered atom");
                    f.add_clause(&[-t, l]);
                }
            }
            f.add_clause(&any);
            for rule in &sinks {
                let clause: Vec<i32> = rule
                    .body
                    .literals()
                    .iter()
                    .map(|l| -bk.table().dimacs_of(l).expect("registered atom"))
                    .collect();
                f.add_clause(&clause);
            }
            let budget = planner.query_budget(1);
            let mut solver = Solver::new(config.solver.clone());
            solver.load(&f);
            let r = solver.solve(&[], &budget);
            planner.consume(r.stats.conflicts);
            match r.status {
                Status::Unsat => {}
                Status::Sat => {
                    let model = r.model.unwrap();
                    return Ok(EquivVerdict::NotEquivalent {
                        outcome: o.clone(),
                        witness: AtomAssignment { values: model[..atom_count].to_vec() },
                    });
                }
                Status::Timeout => undecided = true,
            }
        }
    }
    Ok(if undecided { EquivVerdict::Undecided } else { EquivVerdict::Equivalent })
}

/// Convenience wrappers running one check with a fresh engine.
pub fn overlap_pairs(
    ds: &DecisionSet,
    bk: &BackgroundKnowledge,
    config: &CheckerConfig,
    planner: &mut BudgetPlanner,
) -> OverlapReport {
    Checker::new(ds, bk, config.clone()).overlap_pairs(planner)
}

pub fn default_reachable(ds: &DecisionSet, bk: &BackgroundKnowledge) -> Reachability {
    Checker::new(ds, bk, CheckerConfig::default())
        .default_reachable(&mut BudgetPlanner::unlimited())
}

pub fn rule_redundant(
    ds: &DecisionSet,
    bk: &BackgroundKnowledge,
    idx: RuleIdx,
) -> Result<RuleVerdict, AnalysisError> {
    Checker::new(ds, bk, CheckerConfig::default())
        .rule_redundant(idx, &mut BudgetPlanner::unlimited())
}

pub fn literal_redundant(
    ds: &DecisionSet,
    bk: &BackgroundKnowledge,
    idx: RuleIdx,
    pos: usize,
) -> Result<LiteralVerdict, AnalysisError> {
    Checker::new(ds, bk, CheckerConfig::default())
        .literal_redundant(idx, pos, &mut BudgetPlanner::unlimited())
}
