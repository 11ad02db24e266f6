//! Abductive explanations read off fired rules.
//!
//! For an all-equality rule body, absence of negative overlap makes the
//! rule's feature set a sufficient reason (WAXp) for the prediction;
//! absence of redundant literals upgrades it to a subset-minimal one (AXp).
//! When a precondition fails the functions refuse and name the failing
//! condition together with a replayable certificate; no weakened guarantee
//! is ever returned.

// Refusals carry their full certificates by value; the variants are big
// on purpose.
#![allow(clippy::result_large_err)]

use std::collections::BTreeSet;

use serde::Serialize;

use crate::analysis::{
    BudgetPlanner, Certificate, Checker, CheckerConfig, FindingKind, LiteralVerdict,
    OverlapReport,
};
use crate::background::BackgroundKnowledge;
use crate::model::{
    AtomAssignment, AtomOp, DecisionSet, FeatureId, FeatureSpace, Literal, Outcome, Rule, RuleIdx,
    Value,
};
use crate::oracle::{self, Oracle, OracleError};
use crate::sat::{CnfFormula, Solver, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ExplanationKind {
    Waxp,
    Axp,
}

/// The instance being explained: a concrete point and its prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub point: Vec<Value>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct Explanation {
    pub kind: ExplanationKind,
    /// Features whose fixed values force the prediction.
    pub features: BTreeSet<FeatureId>,
    /// The rule that fired and justified the explanation.
    pub rule: RuleIdx,
    pub instance: Instance,
}

impl Explanation {
    pub fn feature_names(&self, space: &FeatureSpace) -> Vec<String> {
        self.features.iter().map(|&f| space.get(f).name.clone()).collect()
    }
}

/// Why an explanation was not produced. Every variant carries enough to
/// replay the decision.
#[derive(Debug, Clone)]
pub enum Refusal {
    NoSuchRule { rule: RuleIdx },
    /// The propositions are stated for equality cubes only.
    NonEqualityBody { rule: RuleIdx, literal: Literal },
    RuleDoesNotFire { rule: RuleIdx },
    /// The point falsifies the background knowledge.
    InvalidInstance,
    NegativeOverlap { pair: (RuleIdx, RuleIdx), witness: AtomAssignment },
    OverlapUndecided { pair: (RuleIdx, RuleIdx) },
    RedundantLiteral {
        rule: RuleIdx,
        position: usize,
        literal: Literal,
        kind: FindingKind,
        certificate: Certificate,
    },
    RedundancyUndecided { rule: RuleIdx, position: usize },
    /// Dropping this feature (or everything, for single-literal bodies)
    /// still forces the prediction through the default rule, so the rule's
    /// feature set is not subset-minimal.
    NotMinimal { rule: RuleIdx, droppable: Vec<FeatureId>, certificates: Vec<Certificate> },
    MinimalityUndecided { rule: RuleIdx },
}

impl Refusal {
    pub fn reason(&self) -> &'static str {
        match self {
            Refusal::NoSuchRule { .. } => "no such rule",
            Refusal::NonEqualityBody { .. } => "proposition precondition violated",
            Refusal::RuleDoesNotFire { .. } => "rule does not fire on the instance",
            Refusal::InvalidInstance => "instance falsifies the background knowledge",
            Refusal::NegativeOverlap { .. } => "negative overlap",
            Refusal::OverlapUndecided { .. } => "overlap undecided within budget",
            Refusal::RedundantLiteral { .. } => "redundant literal in the rule body",
            Refusal::RedundancyUndecided { .. } => "literal redundancy undecided within budget",
            Refusal::NotMinimal { .. } => "feature set not subset-minimal",
            Refusal::MinimalityUndecided { .. } => "minimality gate undecided within budget",
        }
    }
}

fn find_rule(ds: &DecisionSet, k: RuleIdx) -> Result<&Rule, Refusal> {
    ds.rule(k).ok_or(Refusal::NoSuchRule { rule: k })
}

fn equality_features(rule: &Rule) -> Result<BTreeSet<FeatureId>, Refusal> {
    let mut features = BTreeSet::new();
    for lit in rule.body.literals() {
        if !(lit.positive && lit.atom.op == AtomOp::Eq) {
            return Err(Refusal::NonEqualityBody { rule: rule.idx, literal: lit.clone() });
        }
        features.insert(lit.atom.feature);
    }
    Ok(features)
}

fn point_is_valid(bk: &BackgroundKnowledge, point: &[Value]) -> bool {
    bk.user_clauses()
        .iter()
        .all(|clause| clause.iter().any(|l| oracle::eval_literal(point, l)))
}

/// The features of a fired all-equality rule as a weak abductive
/// explanation, provided no negative overlap involves the rule.
pub fn waxp_from_rule(
    ds: &DecisionSet,
    bk: &BackgroundKnowledge,
    k: RuleIdx,
    point: &[Value],
    overlap: &OverlapReport,
) -> Result<Explanation, Refusal> {
    let rule = find_rule(ds, k)?;
    let features = equality_features(rule)?;
    if !point_is_valid(bk, point) {
        return Err(Refusal::InvalidInstance);
    }
    if !oracle::eval_cube(point, &rule.body) {
        return Err(Refusal::RuleDoesNotFire { rule: k });
    }
    if let Some(pair) = overlap.undecided_involving(k) {
        return Err(Refusal::OverlapUndecided { pair });
    }
    if let Some(p) = overlap.negative_involving(k) {
        return Err(Refusal::NegativeOverlap { pair: (p.i, p.j), witness: p.witness.clone() });
    }
    Ok(Explanation {
        kind: ExplanationKind::Waxp,
        features,
        rule: k,
        instance: Instance { point: point.to_vec(), outcome: rule.outcome.clone() },
    })
}

/// The features of a fired all-equality rule as a subset-minimal abductive
/// explanation: requires no negative overlap anywhere and no redundant
/// literal in the body, plus a gate closing the default-rule route that the
/// redundancy conditions do not cover.
pub fn axp_from_rule(
    ds: &DecisionSet,
    bk: &BackgroundKnowledge,
    k: RuleIdx,
    point: &[Value],
    overlap: &OverlapReport,
    config: &CheckerConfig,
    planner: &mut BudgetPlanner,
) -> Result<Explanation, Refusal> {
    let rule = find_rule(ds, k)?;
    let features = equality_features(rule)?;
    if !point_is_valid(bk, point) {
        return Err(Refusal::InvalidInstance);
    }
    if !oracle::eval_cube(point, &rule.body) {
        return Err(Refusal::RuleDoesNotFire { rule: k });
    }
    // The stronger, global reading: any negative overlap refuses.
    if let Some((i, j)) = overlap.undecided.first().copied() {
        return Err(Refusal::OverlapUndecided { pair: (i, j) });
    }
    if let Some(p) = overlap.negative.first() {
        return Err(Refusal::NegativeOverlap { pair: (p.i, p.j), witness: p.witness.clone() });
    }
    if rule.body.len() >= 2 {
        let mut checker = Checker::new(ds, bk, config.clone());
        for pos in 0..rule.body.len() {
            match checker.literal_redundant(k, pos, planner).expect("pos in range") {
                LiteralVerdict::NotRedundant => {}
                LiteralVerdict::Undecided => {
                    return Err(Refusal::RedundancyUndecided { rule: k, position: pos })
                }
                LiteralVerdict::Local(certificate) => {
                    return Err(Refusal::RedundantLiteral {
                        rule: k,
                        position: pos,
                        literal: rule.body.literals()[pos].clone(),
                        kind: FindingKind::LocalLiteral,
                        certificate,
                    })
                }
                LiteralVerdict::Global(certificate) => {
                    return Err(Refusal::RedundantLiteral {
                        rule: k,
                        position: pos,
                        literal: rule.body.literals()[pos].clone(),
                        kind: FindingKind::GlobalLiteral,
                        certificate,
                    })
                }
            }
        }
    }
    minimality_gate(ds, bk, rule, config, planner)?;
    Ok(Explanation {
        kind: ExplanationKind::Axp,
        features,
        rule: k,
        instance: Instance { point: point.to_vec(), outcome: rule.outcome.clone() },
    })
}

/// Irredundant literals guarantee that no rule-covered route shrinks the
/// explanation, but when the default outcome coincides with the rule's,
/// dropping a feature can still force the prediction through points where
/// no rule fires. These queries close exactly that hole.
fn minimality_gate(
    ds: &DecisionSet,
    bk: &BackgroundKnowledge,
    rule: &Rule,
    config: &CheckerConfig,
    planner: &mut BudgetPlanner,
) -> Result<(), Refusal> {
    let diff_rules: Vec<&Rule> =
        ds.rules().iter().filter(|r| r.outcome != rule.outcome).collect();
    let default_same = ds.default_outcome == rule.outcome;
    if rule.body.len() == 1 {
        // The empty set must not already be sufficient: some valid point
        // has to reach a different outcome.
        let mut certificates = Vec::new();
        let diff = disjunction_reachable(bk, &diff_rules, &[], config, planner)
            .map_err(|_| Refusal::MinimalityUndecided { rule: rule.idx })?;
        match diff {
            ReachVerdict::Reachable => return Ok(()),
            ReachVerdict::Unreachable(c) => certificates.push(c),
        }
        if !default_same {
            let mut checker = Checker::new(ds, bk, config.clone());
            match checker.default_reachable(planner) {
                crate::analysis::Reachability::Reachable(_) => return Ok(()),
                crate::analysis::Reachability::Unreachable(c) => certificates.push(c),
                crate::analysis::Reachability::Undecided => {
                    return Err(Refusal::MinimalityUndecided { rule: rule.idx })
                }
            }
        }
        return Err(Refusal::NotMinimal {
            rule: rule.idx,
            droppable: rule.body.literals().iter().map(|l| l.atom.feature).collect(),
            certificates,
        });
    }
    if !default_same {
        return Ok(()); // the redundancy conditions already imply minimality
    }
    for pos in 0..rule.body.len() {
        let rest = rule.body.without(pos);
        let assumptions: Vec<i32> = rest
            .literals()
            .iter()
            .map(|l| bk.table().dimacs_of(l).expect("registered atom"))
            .collect();
        let verdict = disjunction_reachable(bk, &diff_rules, &assumptions, config, planner)
            .map_err(|_| Refusal::MinimalityUndecided { rule: rule.idx })?;
        if let ReachVerdict::Unreachable(certificate) = verdict {
            // No different outcome is reachable under the shrunk cube, so
            // the shrunk feature set is already sufficient.
            return Err(Refusal::NotMinimal {
                rule: rule.idx,
                droppable: vec![rule.body.literals()[pos].atom.feature],
                certificates: vec![certificate],
            });
        }
    }
    Ok(())
}

enum ReachVerdict {
    Reachable,
    Unreachable(Certificate),
}

struct GateTimeout;

/// Is `B and assumptions and (body_1 or ... or body_z)` satisfiable?
/// Encoded with one selector per body, like the equivalence check.
fn disjunction_reachable(
    bk: &BackgroundKnowledge,
    bodies: &[&Rule],
    assumptions: &[i32],
    config: &CheckerConfig,
    planner: &mut BudgetPlanner,
) -> Result<ReachVerdict, GateTimeout> {
    let atom_count = bk.table().len();
    let mut f: CnfFormula = bk.to_formula();
    f.num_vars = f.num_vars.max(atom_count);
    let mut any: Vec<i32> = Vec::new();
    for (k, rule) in bodies.iter().enumerate() {
        let t = (atom_count + k + 1) as i32;
        any.push(t);
        for lit in rule.body.literals() {
            f.add_clause(&[-t, bk.table().dimacs_of(lit).expect("registered atom")]);
        }
    }
    if any.is_empty() {
        // Empty disjunction is false: trivially unreachable.
        let mut unsat = CnfFormula::new(atom_count);
        unsat.clauses.push(Vec::new());
        return Ok(ReachVerdict::Unreachable(Certificate {
            clause_count: unsat.clauses.len(),
            formula: unsat,
            assumptions: assumptions.to_vec(),
            expected: Status::Unsat,
        }));
    }
    f.add_clause(&any);
    let budget = planner.query_budget(1);
    let mut solver = Solver::new(config.solver.clone());
    solver.load(&f);
    let r = solver.solve(assumptions, &budget);
    planner.consume(r.stats.conflicts);
    match r.status {
        Status::Sat => Ok(ReachVerdict::Reachable),
        Status::Unsat => Ok(ReachVerdict::Unreachable(Certificate {
            clause_count: f.clauses.len(),
            formula: f,
            assumptions: assumptions.to_vec(),
            expected: Status::Unsat,
        })),
        Status::Timeout => Err(GateTimeout),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyVerdict {
    ValidAxp,
    ValidWaxp,
    Invalid,
}

/// Independent check of an explanation against the grid: sufficiency over
/// every valid point agreeing on the features, and exhaustive proper-subset
/// enumeration for minimality. Refuses (with a size estimate) above the
/// cell bound rather than approximating.
pub fn verify_explanation(
    ds: &DecisionSet,
    bk: &BackgroundKnowledge,
    explanation: &Explanation,
    cell_bound: usize,
) -> Result<VerifyVerdict, OracleError> {
    let oracle = Oracle::new(ds, bk, cell_bound)?;
    let Instance { point, outcome } = &explanation.instance;
    if !oracle.is_waxp(&explanation.features, point, outcome) {
        return Ok(VerifyVerdict::Invalid);
    }
    if oracle.is_axp(&explanation.features, point, outcome) {
        return Ok(VerifyVerdict::ValidAxp);
    }
    Ok(VerifyVerdict::ValidWaxp)
}
