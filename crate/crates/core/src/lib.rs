//! SAT-based auditing of rule-based models.
//!
//! Detects negative overlap, rule redundancy and local/global literal
//! redundancy in decision sets (including decision trees converted to rules
//! and anchor-style explanation rules) by satisfiability queries against an
//! automatically constructed background theory, and extracts abductive
//! explanations when the sufficiency conditions hold. A brute-force grid
//! oracle provides independent ground truth for every verdict.

pub mod analysis;
pub mod background;
pub mod decimal;
pub mod explain;
pub mod fixtures;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod sat;
pub mod testgen;

pub use analysis::{
    default_reachable, equivalent, literal_redundant, overlap_pairs, preprocess, rule_redundant,
    simplify, Checker, CheckerConfig, OrderPolicy, OverlapPair, RedundancyFinding,
};
pub use background::{
    build_alg2, build_complete_order, collect_atoms, merge_user_constraints, AtomTable,
    BackgroundKnowledge, BkMode,
};
pub use decimal::Decimal;
pub use model::{
    canonicalize, predict, AtomAssignment, Cube, DecisionSet, Feature, FeatureId, FeatureKind,
    FeatureSpace, Literal, Outcome, Prediction, RelOp, Rule, RuleIdx, TieBreak, Value,
};
pub use oracle::{eval_literal, FiniteGrid, Oracle};
pub use pipeline::{audit, AuditConfig, AuditOutcome};
pub use report::AuditReport;
pub use sat::{Budget, CnfFormula, SatResult, Solver, SolverConfig, Status};
