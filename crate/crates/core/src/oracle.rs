//! Brute-force ground truth over a finite interval-representative grid.
//!
//! Numeric features get one representative per region of the threshold
//! arrangement: every mentioned threshold, the exact midpoint between each
//! consecutive pair, one value below the minimum and one above the maximum.
//! Categorical features get every mentioned token plus one fresh "other"
//! token. Two grid points satisfy the same mentioned atoms iff they share a
//! cell, and every arithmetically satisfiable combination of mentioned atoms
//! is realized by some cell, so exhaustive enumeration decides cover,
//! overlap, redundancy, equivalence and explanation validity exactly.
//!
//! Validity of a point is decided by evaluating the user constraint clauses
//! arithmetically, never through the CNF encoding under test.

use std::collections::BTreeSet;

use crate::background::{AtomTable, BackgroundKnowledge};
use crate::model::{
    AtomAssignment, AtomOp, Cube, DecisionSet, FeatureId, FeatureKind, FeatureSpace, Literal,
    Outcome, Prediction, Rule, RuleIdx, TieBreak, Value,
};

pub const DEFAULT_CELL_BOUND: usize = 1_000_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("grid has {cells} cells, above the bound of {bound}")]
    GridTooLarge { cells: u128, bound: usize },
    #[error("rule index {0} not present in the decision set")]
    NoSuchRule(RuleIdx),
    #[error("literal position {pos} out of range for rule {rule}")]
    NoSuchLiteral { rule: RuleIdx, pos: usize },
}

/// Arithmetic literal evaluation: exact comparison, independent of any SAT
/// encoding. `point` assigns one representative value per feature.
pub fn eval_literal(point: &[Value], lit: &Literal) -> bool {
    let value = &point[lit.atom.feature.0];
    let atom_true = match (lit.atom.op, value, &lit.atom.value) {
        (AtomOp::Eq, v, t) => v == t,
        (AtomOp::Gt, Value::Num(v), Value::Num(t)) => v > t,
        (AtomOp::Ge, Value::Num(v), Value::Num(t)) => v >= t,
        // Order atoms never arise on categorical features.
        (AtomOp::Gt | AtomOp::Ge, _, _) => false,
    };
    atom_true == lit.positive
}

pub fn eval_cube(point: &[Value], cube: &Cube) -> bool {
    cube.literals().iter().all(|l| eval_literal(point, l))
}

/// Interval reasoning over the rationals: is a conjunction of canonical
/// literals satisfiable by *some* value per feature? Used as the arithmetic
/// arbiter for background-encoding completeness checks.
pub fn cube_satisfiable(lits: &[Literal]) -> bool {
    let mut features: Vec<FeatureId> = lits.iter().map(|l| l.atom.feature).collect();
    features.sort();
    features.dedup();
    features.iter().all(|&f| {
        feature_satisfiable(lits.iter().filter(|l| l.atom.feature == f))
    })
}

fn feature_satisfiable<'a>(lits: impl Iterator<Item = &'a Literal>) -> bool {
    // Bounds are (value, strict); eq pins the value, neq excludes points.
    let mut lower: Option<(&Value, bool)> = None;
    let mut upper: Option<(&Value, bool)> = None;
    let mut eq: Option<&Value> = None;
    let mut neq: Vec<&Value> = Vec::new();
    for l in lits {
        let v = &l.atom.value;
        match (l.atom.op, l.positive) {
            (AtomOp::Eq, true) => {
                if eq.is_some_and(|e| e != v) {
                    return false;
                }
                eq = Some(v);
            }
            (AtomOp::Eq, false) => neq.push(v),
            (AtomOp::Gt, true) => tighten_lower(&mut lower, v, true),
            (AtomOp::Gt, false) => tighten_upper(&mut upper, v, false), // x <= v
            (AtomOp::Ge, true) => tighten_lower(&mut lower, v, false),
            (AtomOp::Ge, false) => tighten_upper(&mut upper, v, true), // x < v
        }
    }
    if let Some(e) = eq {
        if neq.contains(&e) {
            return false;
        }
        let above = lower.is_none_or(|(lo, strict)| if strict { e > lo } else { e >= lo });
        let below = upper.is_none_or(|(hi, strict)| if strict { e < hi } else { e <= hi });
        return above && below;
    }
    match (lower, upper) {
        (Some((lo, ls)), Some((hi, hs))) => {
            if lo > hi {
                return false;
            }
            if lo == hi {
                // Single point, realizable only if both bounds are closed
                // and the point is not excluded.
                return !ls && !hs && !neq.contains(&lo);
            }
            // Dense domain: a nonempty open interval has infinitely many
            // rationals, finitely many exclusions cannot empty it.
            true
        }
        // Categorical features only produce eq/neq constraints; with no
        // required value a fresh token always exists (open-world domains),
        // and unbounded numeric rays are infinite.
        _ => true,
    }
}

fn tighten_lower<'a>(bound: &mut Option<(&'a Value, bool)>, v: &'a Value, strict: bool) {
    let stronger = match bound {
        None => true,
        Some((cur, cur_strict)) => v > *cur || (v == *cur && strict && !*cur_strict),
    };
    if stronger {
        *bound = Some((v, strict));
    }
}

fn tighten_upper<'a>(bound: &mut Option<(&'a Value, bool)>, v: &'a Value, strict: bool) {
    let stronger = match bound {
        None => true,
        Some((cur, cur_strict)) => v < *cur || (v == *cur && strict && !*cur_strict),
    };
    if stronger {
        *bound = Some((v, strict));
    }
}

/// Fixed-size bit vector for cell sets.
#[derive(Clone, PartialEq, Eq)]
pub(crate) struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    fn zeros(len: usize) -> Bits {
        Bits { len, words: vec![0; len.div_ceil(64)] }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// The interval-representative grid: per-feature representative values and
/// lazy mixed-radix cell enumeration.
#[derive(Debug, Clone)]
pub struct FiniteGrid {
    values: Vec<Vec<Value>>,
    strides: Vec<usize>,
    len: usize,
}

impl FiniteGrid {
    pub fn build(
        space: &FeatureSpace,
        table: &AtomTable,
        cell_bound: usize,
    ) -> Result<FiniteGrid, OracleError> {
        let mut values: Vec<Vec<Value>> = Vec::with_capacity(space.len());
        for feature in space.iter() {
            let mentioned = table.feature_values(feature.id);
            values.push(match feature.kind {
                FeatureKind::Numeric => numeric_representatives(&mentioned),
                FeatureKind::Categorical => categorical_representatives(&mentioned),
            });
        }
        let mut cells: u128 = 1;
        for v in &values {
            cells = cells.saturating_mul(v.len() as u128);
        }
        if cells > cell_bound as u128 {
            return Err(OracleError::GridTooLarge { cells, bound: cell_bound });
        }
        let len = cells as usize;
        let mut strides = vec![0usize; values.len()];
        let mut stride = 1usize;
        for (i, v) in values.iter().enumerate() {
            strides[i] = stride;
            stride *= v.len();
        }
        Ok(FiniteGrid { values, strides, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn feature_representatives(&self, f: FeatureId) -> &[Value] {
        &self.values[f.0]
    }

    /// Value of one feature at a cell, without materializing the point.
    pub fn value_at(&self, cell: usize, f: FeatureId) -> &Value {
        let digit = cell / self.strides[f.0] % self.values[f.0].len();
        &self.values[f.0][digit]
    }

    pub fn point(&self, cell: usize) -> Vec<Value> {
        (0..self.values.len()).map(|f| self.value_at(cell, FeatureId(f)).clone()).collect()
    }

    /// Atom-level view of a cell, aligned to the table's variables.
    pub fn atom_assignment(&self, table: &AtomTable, cell: usize) -> AtomAssignment {
        let values = table
            .atoms()
            .iter()
            .map(|a| {
                eval_literal_at(self, cell, &Literal { atom: a.clone(), positive: true })
            })
            .collect();
        AtomAssignment { values }
    }

    /// Lifts an atom-level assignment to a representative numeric point, or
    /// `None` when the assignment is arithmetically infeasible (possible for
    /// models of an incomplete encoding).
    pub fn lift(&self, table: &AtomTable, assignment: &AtomAssignment) -> Option<Vec<Value>> {
        let mut point: Vec<Value> = Vec::with_capacity(self.values.len());
        for f in 0..self.values.len() {
            let lits: Vec<Literal> = table
                .atoms()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.feature.0 == f)
                .map(|(v, a)| Literal { atom: a.clone(), positive: assignment.values[v] })
                .collect();
            let rep = self.values[f]
                .iter()
                .find(|candidate| {
                    lits.iter().all(|l| eval_single(candidate, l))
                })?;
            point.push(rep.clone());
        }
        Some(point)
    }
}

fn eval_single(value: &Value, lit: &Literal) -> bool {
    let atom_true = match (lit.atom.op, value, &lit.atom.value) {
        (AtomOp::Eq, v, t) => v == t,
        (AtomOp::Gt, Value::Num(v), Value::Num(t)) => v > t,
        (AtomOp::Ge, Value::Num(v), Value::Num(t)) => v >= t,
        (AtomOp::Gt | AtomOp::Ge, _, _) => false,
    };
    atom_true == lit.positive
}

fn eval_literal_at(grid: &FiniteGrid, cell: usize, lit: &Literal) -> bool {
    eval_single(grid.value_at(cell, lit.atom.feature), lit)
}

fn numeric_representatives(mentioned: &[Value]) -> Vec<Value> {
    let thresholds: Vec<_> = mentioned
        .iter()
        .map(|v| match v {
            Value::Num(d) => *d,
            Value::Cat(_) => unreachable!("categorical value on numeric feature"),
        })
        .collect();
    if thresholds.is_empty() {
        return vec![Value::Num(crate::decimal::Decimal::ZERO)];
    }
    let mut out = Vec::with_capacity(thresholds.len() * 2 + 1);
    out.push(Value::Num(thresholds[0].minus_one()));
    for (i, &t) in thresholds.iter().enumerate() {
        out.push(Value::Num(t));
        if let Some(&next) = thresholds.get(i + 1) {
            out.push(Value::Num(t.midpoint(next)));
        }
    }
    out.push(Value::Num(thresholds[thresholds.len() - 1].plus_one()));
    out
}

fn categorical_representatives(mentioned: &[Value]) -> Vec<Value> {
    let mut out = mentioned.to_vec();
    let mut other = "_other".to_string();
    while out.contains(&Value::Cat(other.clone())) {
        other.push('_');
    }
    out.push(Value::Cat(other));
    out
}

/// Oracle verdict on a literal, mirroring the SAT-side classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiteralRedundancy {
    NotRedundant,
    Local,
    Global,
}

/// Exhaustive semantics of one decision set under one background knowledge.
///
/// Verdicts are computed from the cover-set definitions directly (set
/// equality over enumerated cells), not from the entailment conditions the
/// SAT path uses, so the two sides can arbitrate each other.
pub struct Oracle<'a> {
    ds: &'a DecisionSet,
    bk: &'a BackgroundKnowledge,
    grid: FiniteGrid,
    valid: Bits,
    body: Vec<Bits>,
}

impl<'a> Oracle<'a> {
    pub fn new(
        ds: &'a DecisionSet,
        bk: &'a BackgroundKnowledge,
        cell_bound: usize,
    ) -> Result<Oracle<'a>, OracleError> {
        let grid = FiniteGrid::build(&ds.features, bk.table(), cell_bound)?;
        let mut valid = Bits::zeros(grid.len());
        for cell in 0..grid.len() {
            let ok = bk.user_clauses().iter().all(|clause| {
                clause.iter().any(|l| eval_literal_at(&grid, cell, l))
            });
            if ok {
                valid.set(cell);
            }
        }
        let body = ds
            .rules()
            .iter()
            .map(|r| {
                let mut bits = Bits::zeros(grid.len());
                for cell in 0..grid.len() {
                    if r.body.literals().iter().all(|l| eval_literal_at(&grid, cell, l)) {
                        bits.set(cell);
                    }
                }
                bits
            })
            .collect();
        Ok(Oracle { ds, bk, grid, valid, body })
    }

    pub fn grid(&self) -> &FiniteGrid {
        &self.grid
    }

    pub fn cell_is_valid(&self, cell: usize) -> bool {
        self.valid.get(cell)
    }

    pub fn valid_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.valid.iter_ones()
    }

    fn cube_bits(&self, cube: &Cube) -> Bits {
        let mut bits = Bits::zeros(self.grid.len());
        for cell in 0..self.grid.len() {
            if cube.literals().iter().all(|l| eval_literal_at(&self.grid, cell, l)) {
                bits.set(cell);
            }
        }
        bits
    }

    /// cov(X, L, B): valid cells whose point satisfies the cube.
    pub fn cover(&self, cube: &Cube) -> Vec<usize> {
        self.cube_bits(cube).and(&self.valid).iter_ones().collect()
    }

    pub fn cover_count(&self, cube: &Cube) -> usize {
        self.cube_bits(cube).and(&self.valid).count()
    }

    fn rule_pos(&self, idx: RuleIdx) -> Result<usize, OracleError> {
        self.ds
            .rules()
            .iter()
            .position(|r| r.idx == idx)
            .ok_or(OracleError::NoSuchRule(idx))
    }

    /// Do two rules overlap: is some valid point covered by both bodies?
    pub fn overlap(&self, i: RuleIdx, j: RuleIdx) -> Result<bool, OracleError> {
        let (pi, pj) = (self.rule_pos(i)?, self.rule_pos(j)?);
        Ok(!self.body[pi].and(&self.body[pj]).and(&self.valid).is_empty())
    }

    pub fn rule_fires_somewhere(&self, i: RuleIdx) -> Result<bool, OracleError> {
        let p = self.rule_pos(i)?;
        Ok(!self.body[p].and(&self.valid).is_empty())
    }

    /// A valid cell firing no rule, if one exists.
    pub fn default_witness(&self) -> Option<usize> {
        let mut fired = Bits::zeros(self.grid.len());
        for b in &self.body {
            fired.or_assign(b);
        }
        self.valid
            .iter_ones()
            .find(|&cell| !fired.get(cell))
    }

    /// S_DS(o): valid cells covered by some rule with outcome `o`.
    fn outcome_set(&self, rules: &[Rule], o: &Outcome) -> Bits {
        let mut s = Bits::zeros(self.grid.len());
        for r in rules {
            if &r.outcome == o {
                s.or_assign(&self.cube_bits(&r.body));
            }
        }
        s.and(&self.valid)
    }

    /// Decision-set equivalence per definition: S sets agree for every
    /// outcome. `other` must mention only atoms present in the grid's table.
    pub fn equivalent(&self, other: &DecisionSet) -> bool {
        debug_assert!(other
            .rules()
            .iter()
            .all(|r| r.body.literals().iter().all(|l| self.bk.table().var_of(&l.atom).is_some())));
        let mut outcomes = self.ds.distinct_outcomes();
        for o in other.distinct_outcomes() {
            if !outcomes.contains(&o) {
                outcomes.push(o);
            }
        }
        outcomes.iter().all(|o| {
            self.outcome_set(self.ds.rules(), o) == self.outcome_set(other.rules(), o)
        })
    }

    /// Union of cached rule covers for one outcome, optionally excluding a
    /// rule, restricted to valid cells.
    fn cached_outcome_set(&self, o: &Outcome, exclude: Option<RuleIdx>) -> Bits {
        let mut s = Bits::zeros(self.grid.len());
        for (p, r) in self.ds.rules().iter().enumerate() {
            if &r.outcome == o && exclude != Some(r.idx) {
                s.or_assign(&self.body[p]);
            }
        }
        s.and(&self.valid)
    }

    /// Rule redundancy per definition: dropping the rule leaves an
    /// equivalent decision set. Only the rule's own outcome set can change,
    /// so the check compares that cover set with and without the rule.
    pub fn rule_redundant(&self, i: RuleIdx) -> Result<bool, OracleError> {
        let p = self.rule_pos(i)?;
        let o = &self.ds.rules()[p].outcome;
        Ok(self.cached_outcome_set(o, None) == self.cached_outcome_set(o, Some(i)))
    }

    /// Literal redundancy per definition (equivalence of the decision set
    /// with the literal dropped), classified as local when the flipped body
    /// covers no valid point.
    pub fn literal_redundant(
        &self,
        i: RuleIdx,
        pos: usize,
    ) -> Result<LiteralRedundancy, OracleError> {
        let p = self.rule_pos(i)?;
        let rule = &self.ds.rules()[p];
        if pos >= rule.body.len() {
            return Err(OracleError::NoSuchLiteral { rule: i, pos });
        }
        // Only this rule's outcome set can differ between the two sets.
        let mut with_original = self.cached_outcome_set(&rule.outcome, Some(i));
        let mut with_shrunk = with_original.clone();
        with_original.or_assign(&self.body[p].and(&self.valid));
        with_shrunk.or_assign(&self.cube_bits(&rule.body.without(pos)).and(&self.valid));
        if with_original != with_shrunk {
            return Ok(LiteralRedundancy::NotRedundant);
        }
        let flipped = self.cube_bits(&rule.body.flipped(pos)).and(&self.valid);
        Ok(if flipped.is_empty() {
            LiteralRedundancy::Local
        } else {
            LiteralRedundancy::Global
        })
    }

    /// Classifier semantics on a cell, computed arithmetically.
    pub fn kappa(&self, cell: usize) -> Prediction {
        if !self.valid.get(cell) {
            return Prediction::Invalid;
        }
        let fired: Vec<&Rule> = self
            .ds
            .rules()
            .iter()
            .enumerate()
            .filter(|(p, _)| self.body[*p].get(cell))
            .map(|(_, r)| r)
            .collect();
        if fired.is_empty() {
            return Prediction::Default(self.ds.default_outcome.clone());
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
        match self.ds.tie_break {
            TieBreak::ReportAmbiguity => {
                Prediction::Ambiguous(outcomes.into_iter().cloned().collect())
            }
            TieBreak::LowestRuleIndex => Prediction::Fired(fired[0].outcome.clone()),
            TieBreak::MajorityThenLowestIndex => {
                let best = outcomes
                    .iter()
                    .max_by_key(|o| {
                        let count = fired.iter().filter(|r| &r.outcome == **o).count();
                        let first = fired.iter().position(|r| &r.outcome == **o).unwrap();
                        (count, usize::MAX - first)
                    })
                    .unwrap();
                Prediction::Fired((*best).clone())
            }
        }
    }

    fn prediction_is(&self, cell: usize, c: &Outcome) -> bool {
        match self.kappa(cell) {
            Prediction::Fired(o) | Prediction::Default(o) => &o == c,
            _ => false,
        }
    }

    /// Sufficiency: over every valid cell agreeing with `point` on the
    /// features in `x`, the prediction is `c`.
    pub fn is_waxp(&self, x: &BTreeSet<FeatureId>, point: &[Value], c: &Outcome) -> bool {
        self.valid.iter_ones().all(|cell| {
            let agrees = x.iter().all(|&f| self.grid.value_at(cell, f) == &point[f.0]);
            !agrees || self.prediction_is(cell, c)
        })
    }

    /// Subset-minimal sufficiency, by exhaustive proper-subset enumeration.
    pub fn is_axp(&self, x: &BTreeSet<FeatureId>, point: &[Value], c: &Outcome) -> bool {
        if !self.is_waxp(x, point, c) {
            return false;
        }
        let feats: Vec<FeatureId> = x.iter().copied().collect();
        let n = feats.len();
        for mask in 0..(1u32 << n) - 1 {
            let subset: BTreeSet<FeatureId> = feats
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &f)| f)
                .collect();
            if subset.len() < n && self.is_waxp(&subset, point, c) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{self, BkMode};
    use crate::fixtures;
    use crate::model::{canonicalize, RelOp};

    #[test]
    fn eval_literal_boundaries() {
        let mut space = FeatureSpace::new();
        let w = space.declare("weight", FeatureKind::Numeric);
        let c = space.declare("color", FeatureKind::Categorical);
        let ge85 = canonicalize(space.get(w), RelOp::Ge, Value::num(85)).unwrap();
        let gt85 = canonicalize(space.get(w), RelOp::Gt, Value::num(85)).unwrap();
        let blue = canonicalize(space.get(c), RelOp::Eq, Value::cat("blue")).unwrap();

        let p87 = vec![Value::num(87), Value::cat("red")];
        assert!(eval_literal(&p87, &ge85));
        let p85 = vec![Value::num(85), Value::cat("_other")];
        assert!(!eval_literal(&p85, &gt85));
        assert!(eval_literal(&p85, &ge85));
        assert!(!eval_literal(&p85, &blue));
    }

    #[test]
    fn grid_shape_example1() {
        let (ds, bk) = fixtures::example1_with_bk(BkMode::CompleteOrder);
        let grid = FiniteGrid::build(&ds.features, bk.table(), DEFAULT_CELL_BOUND).unwrap();
        // salary 3, size 5, age 5 (user constraint registered age >= 18),
        // color 2, weight 7.
        assert_eq!(grid.len(), 3 * 5 * 5 * 2 * 7);
        let wid = ds.features.lookup("weight").unwrap();
        let reps: Vec<String> =
            grid.feature_representatives(wid).iter().map(|v| v.to_string()).collect();
        assert_eq!(reps, ["79", "80", "82.5", "85", "87.5", "90", "91"]);
    }

    #[test]
    fn cell_bound_is_enforced() {
        let (ds, bk) = fixtures::example1_with_bk(BkMode::CompleteOrder);
        let err = FiniteGrid::build(&ds.features, bk.table(), 10).unwrap_err();
        assert!(matches!(err, OracleError::GridTooLarge { .. }));
    }

    #[test]
    fn cover_empty_cube_is_all_valid() {
        let (ds, bk) = fixtures::example1_with_bk(BkMode::CompleteOrder);
        let oracle = Oracle::new(&ds, &bk, DEFAULT_CELL_BOUND).unwrap();
        let all_valid = oracle.valid_cells().count();
        assert!(all_valid > 0);
        assert_eq!(oracle.cover(&Cube::empty()).len(), all_valid);
    }

    #[test]
    fn cover_contradictory_cube_is_empty() {
        let (ds, bk) = fixtures::example1_with_bk(BkMode::CompleteOrder);
        let oracle = Oracle::new(&ds, &bk, DEFAULT_CELL_BOUND).unwrap();
        let w = ds.features.lookup("weight").unwrap();
        let gt = canonicalize(ds.features.get(w), RelOp::Gt, Value::num(85)).unwrap();
        let lt = canonicalize(ds.features.get(w), RelOp::Lt, Value::num(85)).unwrap();
        let cube = Cube::new(vec![gt, lt]).unwrap();
        assert_eq!(oracle.cover_count(&cube), 0);
    }

    #[test]
    fn cover_of_example1_rule4() {
        let (ds, bk) = fixtures::example1_with_bk(BkMode::CompleteOrder);
        let oracle = Oracle::new(&ds, &bk, DEFAULT_CELL_BOUND).unwrap();
        let body = &ds.rules()[3].body;
        let cells = oracle.cover(body);
        assert!(!cells.is_empty());
        for cell in cells {
            let point = oracle.grid().point(cell);
            assert!(eval_cube(&point, body));
            assert!(oracle.cell_is_valid(cell));
        }
    }

    #[test]
    fn example1_overlap_pairs() {
        let (ds, bk) = fixtures::example1_with_bk(BkMode::CompleteOrder);
        let oracle = Oracle::new(&ds, &bk, DEFAULT_CELL_BOUND).unwrap();
        assert!(!oracle.overlap(RuleIdx(3), RuleIdx(4)).unwrap());
        assert!(oracle.overlap(RuleIdx(1), RuleIdx(4)).unwrap());
        assert!(oracle.overlap(RuleIdx(2), RuleIdx(4)).unwrap());
    }

    #[test]
    fn example1_rule3_not_redundant() {
        // A valid point with color != blue and size != 140 satisfies the
        // third body but neither of its siblings.
        let (ds, bk) = fixtures::example1_with_bk(BkMode::CompleteOrder);
        let oracle = Oracle::new(&ds, &bk, DEFAULT_CELL_BOUND).unwrap();
        assert!(!oracle.rule_redundant(RuleIdx(3)).unwrap());
    }

    #[test]
    fn example3_literal_verdicts() {
        let (ds, bk) = fixtures::example3_with_bk(BkMode::CompleteOrder);
        let oracle = Oracle::new(&ds, &bk, DEFAULT_CELL_BOUND).unwrap();
        // f in the third body is locally redundant.
        assert_eq!(oracle.literal_redundant(RuleIdx(3), 2).unwrap(), LiteralRedundancy::Local);
        // b in the first body is globally redundant, and symmetrically w.
        assert_eq!(oracle.literal_redundant(RuleIdx(1), 1).unwrap(), LiteralRedundancy::Global);
        assert_eq!(oracle.literal_redundant(RuleIdx(2), 1).unwrap(), LiteralRedundancy::Global);
        // a is not redundant anywhere.
        assert_eq!(
            oracle.literal_redundant(RuleIdx(1), 0).unwrap(),
            LiteralRedundancy::NotRedundant
        );
    }

    #[test]
    fn singleton_grid_direct_evaluation() {
        let mut space = FeatureSpace::new();
        space.declare("x", FeatureKind::Numeric);
        let ds = DecisionSet::new(space, vec![], Outcome::Class("d".into())).unwrap();
        let bk = background::build(background::collect_atoms(&ds, &[]), BkMode::CompleteOrder);
        let oracle = Oracle::new(&ds, &bk, DEFAULT_CELL_BOUND).unwrap();
        assert_eq!(oracle.grid().len(), 1);
        assert_eq!(oracle.kappa(0), Prediction::Default(Outcome::Class("d".into())));
        assert!(oracle.default_witness().is_some());
    }

    #[test]
    fn lift_overlap_witness_to_numeric_point() {
        let (ds, bk) = fixtures::example1_with_bk(BkMode::CompleteOrder);
        let report = crate::analysis::overlap_pairs(
            &ds,
            &bk,
            &crate::analysis::CheckerConfig::default(),
            &mut crate::analysis::BudgetPlanner::unlimited(),
        );
        let grid = FiniteGrid::build(&ds.features, bk.table(), DEFAULT_CELL_BOUND).unwrap();
        for pair in &report.negative {
            let point = grid.lift(bk.table(), &pair.witness).expect("witness is realizable");
            let body_i = &ds.rule(pair.i).unwrap().body;
            let body_j = &ds.rule(pair.j).unwrap().body;
            assert!(eval_cube(&point, body_i) && eval_cube(&point, body_j));
        }
    }

    #[test]
    fn lift_rejects_arithmetically_infeasible_assignments() {
        // Under the basic alg2 construction the weight atoms are unlinked, so
        // (w > 90) true with (w >= 85) false is a CNF model without any
        // arithmetic witness; lifting must refuse it.
        let mut space = FeatureSpace::new();
        let w = space.declare("w", FeatureKind::Numeric);
        let mut table = crate::background::AtomTable::new(space.len());
        table.register(&crate::model::Atom { feature: w, op: AtomOp::Gt, value: Value::num(90) });
        table.register(&crate::model::Atom { feature: w, op: AtomOp::Ge, value: Value::num(85) });
        let grid = FiniteGrid::build(&space, &table, DEFAULT_CELL_BOUND).unwrap();
        let infeasible = AtomAssignment { values: vec![true, false] };
        assert!(grid.lift(&table, &infeasible).is_none());
        let feasible = AtomAssignment { values: vec![true, true] };
        let point = grid.lift(&table, &feasible).unwrap();
        assert_eq!(point[0], Value::num(91));
    }

    #[test]
    fn grid_realizes_arithmetic_satisfiability() {
        // Randomized: any conjunction of mentioned atoms is satisfiable over
        // the rationals iff some grid point realizes it.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut space = FeatureSpace::new();
        let x = space.declare("x", FeatureKind::Numeric);
        let y = space.declare("y", FeatureKind::Numeric);
        let c = space.declare("c", FeatureKind::Categorical);
        let mut table = crate::background::AtomTable::new(space.len());
        let mut atoms = Vec::new();
        for v in [3i64, 7, 11] {
            for op in [AtomOp::Eq, AtomOp::Gt, AtomOp::Ge] {
                for f in [x, y] {
                    let a = crate::model::Atom { feature: f, op, value: Value::num(v) };
                    table.register(&a);
                    atoms.push(a);
                }
            }
        }
        for tok in ["red", "blue"] {
            let a = crate::model::Atom { feature: c, op: AtomOp::Eq, value: Value::cat(tok) };
            table.register(&a);
            atoms.push(a);
        }
        let grid = FiniteGrid::build(&space, &table, DEFAULT_CELL_BOUND).unwrap();
        for _ in 0..2000 {
            let k = rng.gen_range(1..=6);
            let mut lits = Vec::new();
            for _ in 0..k {
                let a = atoms[rng.gen_range(0..atoms.len())].clone();
                lits.push(Literal { atom: a, positive: rng.gen_bool(0.5) });
            }
            let arith = cube_satisfiable(&lits);
            let grid_sat = (0..grid.len()).any(|cell| {
                lits.iter().all(|l| eval_literal_at(&grid, cell, l))
            });
            assert_eq!(arith, grid_sat, "disagreement on {:?}", lits);
        }
    }
}
