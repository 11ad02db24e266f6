//! Rule-based model representation: features, literals, cubes, rules and
//! decision sets, plus the classifier semantics over them.
//!
//! Literals are stored in canonical form: the only atoms are `(f = v)`,
//! `(f > v)` and `(f >= v)`; the operators `!=`, `<=` and `<` become negated
//! atoms. All types are immutable after construction.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::background::BackgroundKnowledge;
use crate::decimal::Decimal;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("operator {op} is not admissible for categorical feature {feature:?}")]
    InadmissibleOperator { feature: String, op: RelOp },
    #[error("value type does not match kind of feature {0:?}")]
    ValueKindMismatch(String),
    #[error("rule body contains both a literal and its negation: {0}")]
    ContradictoryBody(String),
    #[error("non-default rule has an empty body")]
    EmptyBody,
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("rule index {0} out of range")]
    RuleIndexOutOfRange(usize),
}

/// Dense feature identifier; index into [`FeatureSpace::features`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureId(pub usize);

impl fmt::Debug for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub id: FeatureId,
    pub name: String,
    pub kind: FeatureKind,
}

/// The declared feature set; ids are positions, names are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureSpace {
    features: Vec<Feature>,
    by_name: HashMap<String, FeatureId>,
}

impl FeatureSpace {
    pub fn new() -> FeatureSpace {
        FeatureSpace::default()
    }

    /// Adds a feature, or returns the existing id when the name is known.
    pub fn declare(&mut self, name: &str, kind: FeatureKind) -> FeatureId {
        if let Some(&id) = self.by_name.get(name) {
            return id;
        }
        let id = FeatureId(self.features.len());
        self.features.push(Feature { id, name: name.to_string(), kind });
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<FeatureId> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, id: FeatureId) -> &Feature {
        &self.features[id.0]
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter()
    }
}

/// A feature-space value: exact decimal for numeric features, token for
/// categorical ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Value {
    Num(Decimal),
    Cat(String),
}

impl Value {
    pub fn num(v: i64) -> Value {
        Value::Num(Decimal::from_int(v))
    }

    pub fn cat(s: &str) -> Value {
        Value::Cat(s.to_string())
    }

    pub fn is_num(&self) -> bool {
        matches!(self, Value::Num(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(d) => write!(f, "{}", d),
            Value::Cat(s) => write!(f, "{}", s),
        }
    }
}

/// Surface relational operator as written in rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn parse(s: &str) -> Option<RelOp> {
        Some(match s {
            "=" | "==" => RelOp::Eq,
            "!=" | "<>" => RelOp::Ne,
            "<" => RelOp::Lt,
            "<=" => RelOp::Le,
            ">" => RelOp::Gt,
            ">=" => RelOp::Ge,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Ne => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }
}

impl fmt::Display for RelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Canonical atom operator; `!=`, `<=`, `<` live as negated atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AtomOp {
    Eq,
    Gt,
    Ge,
}

impl AtomOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AtomOp::Eq => "=",
            AtomOp::Gt => ">",
            AtomOp::Ge => ">=",
        }
    }
}

/// Canonical threshold atom `(feature op value)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Atom {
    pub feature: FeatureId,
    pub op: AtomOp,
    pub value: Value,
}

/// Canonical literal: an atom or its negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn negated(&self) -> Literal {
        Literal { atom: self.atom.clone(), positive: !self.positive }
    }

    /// The operator this literal prints as (the inverse of canonicalization).
    pub fn surface_op(&self) -> RelOp {
        match (self.atom.op, self.positive) {
            (AtomOp::Eq, true) => RelOp::Eq,
            (AtomOp::Eq, false) => RelOp::Ne,
            (AtomOp::Gt, true) => RelOp::Gt,
            (AtomOp::Gt, false) => RelOp::Le,
            (AtomOp::Ge, true) => RelOp::Ge,
            (AtomOp::Ge, false) => RelOp::Lt,
        }
    }

    pub fn display<'a>(&'a self, space: &'a FeatureSpace) -> LiteralDisplay<'a> {
        LiteralDisplay { lit: self, space }
    }
}

pub struct LiteralDisplay<'a> {
    lit: &'a Literal,
    space: &'a FeatureSpace,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} {} {})",
            self.space.get(self.lit.atom.feature).name,
            self.lit.surface_op(),
            self.lit.atom.value
        )
    }
}

/// Canonicalizes a raw `(feature op value)` condition into atom + polarity.
///
/// Categorical features admit only `=` and `!=`; numeric features admit all
/// six operators. Canonicalization of an already-canonical literal's surface
/// form is the identity.
pub fn canonicalize(
    feature: &Feature,
    op: RelOp,
    value: Value,
) -> Result<Literal, ModelError> {
    match (feature.kind, &value) {
        (FeatureKind::Numeric, Value::Num(_)) | (FeatureKind::Categorical, Value::Cat(_)) => {}
        _ => return Err(ModelError::ValueKindMismatch(feature.name.clone())),
    }
    if feature.kind == FeatureKind::Categorical && !matches!(op, RelOp::Eq | RelOp::Ne) {
        return Err(ModelError::InadmissibleOperator { feature: feature.name.clone(), op });
    }
    let feature = feature.id;
    let lit = match op {
        RelOp::Eq => Literal { atom: Atom { feature, op: AtomOp::Eq, value }, positive: true },
        RelOp::Ne => Literal { atom: Atom { feature, op: AtomOp::Eq, value }, positive: false },
        RelOp::Gt => Literal { atom: Atom { feature, op: AtomOp::Gt, value }, positive: true },
        RelOp::Le => Literal { atom: Atom { feature, op: AtomOp::Gt, value }, positive: false },
        RelOp::Ge => Literal { atom: Atom { feature, op: AtomOp::Ge, value }, positive: true },
        RelOp::Lt => Literal { atom: Atom { feature, op: AtomOp::Ge, value }, positive: false },
    };
    Ok(lit)
}

/// Conjunction of canonical literals. Duplicates are dropped; a literal and
/// its negation in the same cube is rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Cube {
    literals: Vec<Literal>,
}

impl Cube {
    pub fn new(literals: Vec<Literal>) -> Result<Cube, ModelError> {
        let mut out: Vec<Literal> = Vec::with_capacity(literals.len());
        for lit in literals {
            if out.contains(&lit) {
                continue;
            }
            if out.iter().any(|l| l.atom == lit.atom && l.positive != lit.positive) {
                return Err(ModelError::ContradictoryBody(format!("{:?}", lit.atom)));
            }
            out.push(lit);
        }
        Ok(Cube { literals: out })
    }

    pub fn empty() -> Cube {
        Cube::default()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Body with the literal at `pos` removed.
    pub fn without(&self, pos: usize) -> Cube {
        let mut lits = self.literals.clone();
        lits.remove(pos);
        Cube { literals: lits }
    }

    /// Body with the literal at `pos` flipped (the flipped body used by the global-redundancy check).
    pub fn flipped(&self, pos: usize) -> Cube {
        let mut lits = self.literals.clone();
        lits[pos] = lits[pos].negated();
        Cube { literals: lits }
    }

    /// Order-insensitive equality, used for duplicate-rule detection.
    pub fn same_set(&self, other: &Cube) -> bool {
        self.literals.len() == other.literals.len()
            && self.literals.iter().all(|l| other.literals.contains(l))
    }
}

/// Class label or exact numeric prediction. Equality is exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Class(String),
    Num(Decimal),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Class(s) => write!(f, "{}", s),
            Outcome::Num(d) => write!(f, "{}", d),
        }
    }
}

/// Stable 1-based rule index; reports always refer to the original position,
/// also after preprocessing removed other rules.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleIdx(pub usize);

impl fmt::Debug for RuleIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

impl fmt::Display for RuleIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub idx: RuleIdx,
    pub body: Cube,
    pub outcome: Outcome,
}

/// Tie-breaking strategy for points firing rules with different outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Surface the ambiguity instead of hiding it (default).
    #[default]
    ReportAmbiguity,
    LowestRuleIndex,
    MajorityThenLowestIndex,
}

/// Unordered rule set + default rule. Rules keep their original indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionSet {
    pub features: FeatureSpace,
    rules: Vec<Rule>,
    pub default_outcome: Outcome,
    /// Set when the default was synthesized (tree conversion) and is
    /// expected to be unreachable.
    pub default_is_sentinel: bool,
    pub tie_break: TieBreak,
}

impl Serialize for FeatureSpace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.features.serialize(serializer)
    }
}

impl DecisionSet {
    pub fn new(
        features: FeatureSpace,
        bodies: Vec<(Cube, Outcome)>,
        default_outcome: Outcome,
    ) -> Result<DecisionSet, ModelError> {
        let mut rules = Vec::with_capacity(bodies.len());
        for (i, (body, outcome)) in bodies.into_iter().enumerate() {
            if body.is_empty() {
                return Err(ModelError::EmptyBody);
            }
            rules.push(Rule { idx: RuleIdx(i + 1), body, outcome });
        }
        Ok(DecisionSet {
            features,
            rules,
            default_outcome,
            default_is_sentinel: false,
            tie_break: TieBreak::default(),
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, idx: RuleIdx) -> Option<&Rule> {
        self.rules.iter().find(|r| r.idx == idx)
    }

    pub fn with_tie_break(mut self, tb: TieBreak) -> DecisionSet {
        self.tie_break = tb;
        self
    }

    /// Same-outcome rules other than `idx` (the sibling set of the redundancy checks).
    pub fn siblings(&self, idx: RuleIdx) -> Vec<&Rule> {
        let Some(rule) = self.rule(idx) else { return Vec::new() };
        self.rules
            .iter()
            .filter(|r| r.idx != idx && r.outcome == rule.outcome)
            .collect()
    }

    /// Copy with the given rule dropped; remaining indices untouched.
    pub fn without_rule(&self, idx: RuleIdx) -> DecisionSet {
        let mut ds = self.clone();
        ds.rules.retain(|r| r.idx != idx);
        ds
    }

    /// Copy with rule `idx`'s literal at `pos` removed.
    pub fn without_literal(&self, idx: RuleIdx, pos: usize) -> DecisionSet {
        let mut ds = self.clone();
        for r in &mut ds.rules {
            if r.idx == idx {
                r.body = r.body.without(pos);
            }
        }
        ds
    }

    pub(crate) fn replace_rules(&self, rules: Vec<Rule>) -> DecisionSet {
        let mut ds = self.clone();
        ds.rules = rules;
        ds
    }

    /// Distinct outcomes of non-default rules, in first-appearance order.
    /// Its length is the NP statistic.
    pub fn distinct_outcomes(&self) -> Vec<Outcome> {
        let mut out: Vec<Outcome> = Vec::new();
        for r in &self.rules {
            if !out.contains(&r.outcome) {
                out.push(r.outcome.clone());
            }
        }
        out
    }

    /// Sum of rule body sizes (total literal occurrence count).
    pub fn literal_total(&self) -> usize {
        self.rules.iter().map(|r| r.body.len()).sum()
    }

    /// Number of distinct literals across rule bodies (the RS statistic).
    pub fn distinct_literal_count(&self) -> usize {
        let mut seen: Vec<&Literal> = Vec::new();
        for r in &self.rules {
            for l in r.body.literals() {
                if !seen.contains(&l) {
                    seen.push(l);
                }
            }
        }
        seen.len()
    }

    /// Maximum rule body size (the RM statistic).
    pub fn max_rule_size(&self) -> usize {
        self.rules.iter().map(|r| r.body.len()).max().unwrap_or(0)
    }
}

/// Total truth assignment to the atoms of a background knowledge's atom
/// table; `values[v]` is the truth value of atom variable `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomAssignment {
    pub values: Vec<bool>,
}

impl AtomAssignment {
    pub fn satisfies_literal(&self, var: usize, positive: bool) -> bool {
        self.values[var] == positive
    }
}

/// Prediction of a decision set on a point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Prediction {
    /// The point falsifies the background knowledge (the dummy value).
    Invalid,
    /// No rule fired; the default outcome applies.
    Default(Outcome),
    /// One or more rules fired and they agree (or a tie-break resolved them).
    Fired(Outcome),
    /// Rules with different outcomes fired under `TieBreak::ReportAmbiguity`;
    /// carries the distinct fired outcomes in first-fired order.
    Ambiguous(Vec<Outcome>),
}

/// Classifier semantics of a decision set on an atom-level point.
///
/// Returns [`Prediction::Invalid`] exactly when the point falsifies `bk`
/// (including its user constraints). "No rule fires" is meant strictly: all
/// rule bodies evaluate false.
pub fn predict(ds: &DecisionSet, point: &AtomAssignment, bk: &BackgroundKnowledge) -> Prediction {
    if !bk.assignment_is_valid(point) {
        return Prediction::Invalid;
    }
    let fired: Vec<&Rule> = ds
        .rules
        .iter()
        .filter(|r| {
            r.body.literals().iter().all(|lit| {
                let var = bk
                    .table()
                    .var_of(&lit.atom)
                    .expect("rule atom must be registered in the atom table");
                point.satisfies_literal(var, lit.positive)
            })
        })
        .collect();
    if fired.is_empty() {
        return Prediction::Default(ds.default_outcome.clone());
    }
    let mut outcomes: Vec<&Outcome> = Vec::new();
    for r in &fired {
        if !outcomes.contains(&&r.outcome) {
            outcomes.push(&r.outcome);
        }
    }
    if outcomes.len() == 1 {
        return Prediction::Fired(outcomes[0].clone());
    }
    match ds.tie_break {
        TieBreak::ReportAmbiguity => {
            Prediction::Ambiguous(outcomes.into_iter().cloned().collect())
        }
        TieBreak::LowestRuleIndex => Prediction::Fired(fired[0].outcome.clone()),
        TieBreak::MajorityThenLowestIndex => {
            let best = outcomes
                .iter()
                .max_by_key(|o| {
                    let count = fired.iter().filter(|r| &r.outcome == **o).count();
                    // Earlier-firing outcomes win ties.
                    let first = fired.iter().position(|r| &r.outcome == **o).unwrap();
                    (count, usize::MAX - first)
                })
                .unwrap();
            Prediction::Fired((*best).clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{self, BkMode};

    fn numeric_space(names: &[&str]) -> FeatureSpace {
        let mut s = FeatureSpace::new();
        for n in names {
            s.declare(n, FeatureKind::Numeric);
        }
        s
    }

    #[test]
    fn canonicalize_examples() {
        let mut space = FeatureSpace::new();
        space.declare("size", FeatureKind::Numeric);
        space.declare("weight", FeatureKind::Numeric);
        space.declare("age", FeatureKind::Numeric);

        // (size != 140) -> not (size = 140)
        let l = canonicalize(space.get(FeatureId(0)), RelOp::Ne, Value::num(140)).unwrap();
        assert!(!l.positive);
        assert_eq!(l.atom.op, AtomOp::Eq);

        // (weight < 85) -> not (weight >= 85)
        let l = canonicalize(space.get(FeatureId(1)), RelOp::Lt, Value::num(85)).unwrap();
        assert!(!l.positive);
        assert_eq!(l.atom.op, AtomOp::Ge);

        // (age > 10) stays positive
        let l = canonicalize(space.get(FeatureId(2)), RelOp::Gt, Value::num(10)).unwrap();
        assert!(l.positive);
        assert_eq!(l.atom.op, AtomOp::Gt);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let mut space = FeatureSpace::new();
        space.declare("x", FeatureKind::Numeric);
        space.declare("c", FeatureKind::Categorical);
        let feats = [
            (FeatureId(0), Value::num(7)),
            (FeatureId(1), Value::cat("blue")),
        ];
        for (fid, v) in feats {
            for op in [RelOp::Eq, RelOp::Ne, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge] {
                let feat = space.get(fid);
                let Ok(l) = canonicalize(feat, op, v.clone()) else {
                    continue; // inadmissible op for the kind
                };
                let again = canonicalize(feat, l.surface_op(), l.atom.value.clone()).unwrap();
                assert_eq!(l, again);
            }
        }
    }

    #[test]
    fn categorical_rejects_order_ops() {
        let mut space = FeatureSpace::new();
        space.declare("color", FeatureKind::Categorical);
        let err = canonicalize(space.get(FeatureId(0)), RelOp::Lt, Value::cat("blue"));
        assert!(matches!(err, Err(ModelError::InadmissibleOperator { .. })));
    }

    #[test]
    fn cube_rejects_contradiction() {
        let space = numeric_space(&["x"]);
        let a = canonicalize(space.get(FeatureId(0)), RelOp::Gt, Value::num(5)).unwrap();
        let na = a.negated();
        assert!(Cube::new(vec![a.clone(), na]).is_err());
        // duplicates collapse
        let c = Cube::new(vec![a.clone(), a]).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn distinct_outcomes_order() {
        let space = numeric_space(&["x"]);
        let lit = |v: i64| {
            Cube::new(vec![
                canonicalize(space.get(FeatureId(0)), RelOp::Gt, Value::num(v)).unwrap(),
            ])
            .unwrap()
        };
        let o = |s: &str| Outcome::Class(s.to_string());
        let ds = DecisionSet::new(
            space.clone(),
            vec![
                (lit(1), o("a")),
                (lit(2), o("b")),
                (lit(3), o("a")),
                (lit(4), o("c")),
                (lit(5), o("b")),
            ],
            o("z"),
        )
        .unwrap();
        assert_eq!(ds.distinct_outcomes(), vec![o("a"), o("b"), o("c")]);

        let single = DecisionSet::new(
            space.clone(),
            vec![(lit(1), o("a")), (lit(2), o("a"))],
            o("z"),
        )
        .unwrap();
        assert_eq!(single.distinct_outcomes().len(), 1);
    }

    #[test]
    fn predict_default_on_empty_set() {
        let space = numeric_space(&["x"]);
        let ds = DecisionSet::new(space, vec![], Outcome::Class("d".into())).unwrap();
        let bk = background::build(background::collect_atoms(&ds, &[]), BkMode::CompleteOrder);
        let point = AtomAssignment { values: vec![] };
        assert_eq!(predict(&ds, &point, &bk), Prediction::Default(Outcome::Class("d".into())));
    }

    /// Builds the atom assignment of a concrete point by arithmetic
    /// evaluation of every registered atom.
    fn assignment_for(
        ds: &DecisionSet,
        bk: &BackgroundKnowledge,
        values: &[(&str, Value)],
    ) -> AtomAssignment {
        let point: Vec<Value> = ds
            .features
            .iter()
            .map(|f| {
                values
                    .iter()
                    .find(|(n, _)| *n == f.name)
                    .map(|(_, v)| v.clone())
                    .expect("every feature assigned")
            })
            .collect();
        let values = bk
            .table()
            .atoms()
            .iter()
            .map(|a| crate::oracle::eval_literal(&point, &Literal { atom: a.clone(), positive: true }))
            .collect();
        AtomAssignment { values }
    }

    #[test]
    fn predict_example1_point() {
        // salary 1, age 18, size 140, weight 85, color other: the second
        // rule fires and nothing disagrees.
        let (ds, bk) = crate::fixtures::example1_with_bk(BkMode::CompleteOrder);
        let point = assignment_for(
            &ds,
            &bk,
            &[
                ("salary", Value::num(1)),
                ("size", Value::num(140)),
                ("age", Value::num(18)),
                ("color", Value::cat("_other")),
                ("weight", Value::num(85)),
            ],
        );
        assert_eq!(predict(&ds, &point, &bk), Prediction::Fired(Outcome::Class("1".into())));
    }

    #[test]
    fn predict_invalid_point_is_lambda() {
        // salary > 0 true but age >= 18 false violates the biconditional.
        let (ds, bk) = crate::fixtures::example1_with_bk(BkMode::CompleteOrder);
        let point = assignment_for(
            &ds,
            &bk,
            &[
                ("salary", Value::num(1)),
                ("size", Value::num(100)),
                ("age", Value::num(12)),
                ("color", Value::cat("_other")),
                ("weight", Value::num(70)),
            ],
        );
        assert_eq!(predict(&ds, &point, &bk), Prediction::Invalid);
    }

    #[test]
    fn tie_breaking_strategies() {
        // Three rules fire on x=5: outcomes a, b, b.
        let space = numeric_space(&["x"]);
        let body = |v: i64| {
            Cube::new(vec![
                canonicalize(space.get(FeatureId(0)), RelOp::Gt, Value::num(v)).unwrap(),
            ])
            .unwrap()
        };
        let o = |s: &str| Outcome::Class(s.to_string());
        let bodies = vec![(body(0), o("a")), (body(1), o("b")), (body(2), o("b"))];
        let ds = DecisionSet::new(space.clone(), bodies, o("z")).unwrap();
        let bk = background::build(background::collect_atoms(&ds, &[]), BkMode::CompleteOrder);
        let fire_all = AtomAssignment { values: vec![true, true, true] };
        assert_eq!(
            predict(&ds, &fire_all, &bk),
            Prediction::Ambiguous(vec![o("a"), o("b")])
        );
        let lowest = ds.clone().with_tie_break(TieBreak::LowestRuleIndex);
        assert_eq!(predict(&lowest, &fire_all, &bk), Prediction::Fired(o("a")));
        let majority = ds.with_tie_break(TieBreak::MajorityThenLowestIndex);
        assert_eq!(predict(&majority, &fire_all, &bk), Prediction::Fired(o("b")));
    }
}
