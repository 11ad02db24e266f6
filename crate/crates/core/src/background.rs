//! Construction of the background knowledge B as CNF over threshold atoms.
//!
//! Two modes exist. `Alg2` emits the core domain-coherence clause families
//! (equality exclusion, per-operator threshold chains, same-value operator
//! links), instantiated only over atoms that actually occur. `CompleteOrder` (the default) additionally emits every
//! pairwise implication and exclusion that is arithmetically valid between
//! same-feature atoms, which makes CNF satisfiability of atom conjunctions
//! coincide with arithmetic satisfiability over ordered domains.
//!
//! `<=` and `<` are handled by literal polarity rather than by shifting
//! thresholds by one, so the encoding is valid on dense domains too.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::model::{Atom, AtomAssignment, AtomOp, Cube, DecisionSet, FeatureId, Literal, Value};
use crate::model::FeatureSpace;
use crate::sat::CnfFormula;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BackgroundError {
    #[error("user constraint clause is empty")]
    EmptyUserClause,
}

/// Bijection between canonical atoms and Boolean variables, plus the
/// per-feature value lists and relation sets the clause families range over.
#[derive(Debug, Clone, Default)]
pub struct AtomTable {
    atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
    num_features: usize,
}

impl AtomTable {
    pub fn new(num_features: usize) -> AtomTable {
        AtomTable { atoms: Vec::new(), index: HashMap::new(), num_features }
    }

    pub fn register(&mut self, atom: &Atom) -> usize {
        if let Some(&v) = self.index.get(atom) {
            return v;
        }
        let v = self.atoms.len();
        self.atoms.push(atom.clone());
        self.index.insert(atom.clone(), v);
        self.num_features = self.num_features.max(atom.feature.0 + 1);
        v
    }

    /// Variable index (0-based) of a registered atom.
    pub fn var_of(&self, atom: &Atom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    /// Registered literal as a DIMACS literal (1-based, sign = polarity).
    pub fn dimacs_of(&self, lit: &Literal) -> Option<i32> {
        let v = self.var_of(&lit.atom)? as i32 + 1;
        Some(if lit.positive { v } else { -v })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Val_f: distinct mentioned values of a feature, strictly increasing
    /// (numeric order, or lexicographic for categorical tokens).
    pub fn feature_values(&self, f: FeatureId) -> Vec<Value> {
        let mut vals: Vec<Value> = Vec::new();
        for a in &self.atoms {
            if a.feature == f && !vals.contains(&a.value) {
                vals.push(a.value.clone());
            }
        }
        vals.sort();
        vals
    }

    /// Relations_f: canonical operators mentioned for a feature.
    pub fn feature_relations(&self, f: FeatureId) -> BTreeSet<AtomOp> {
        self.atoms.iter().filter(|a| a.feature == f).map(|a| a.op).collect()
    }

    fn var_at(&self, f: FeatureId, op: AtomOp, value: &Value) -> Option<i32> {
        self.index
            .get(&Atom { feature: f, op, value: value.clone() })
            .map(|&v| v as i32 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BkMode {
    Alg2,
    #[default]
    CompleteOrder,
}

/// CNF of domain-coherence clauses plus user constraints (the symbol B).
/// Immutable once built; `merge_user_constraints` returns a new value.
#[derive(Debug, Clone)]
pub struct BackgroundKnowledge {
    mode: BkMode,
    table: AtomTable,
    clauses: Vec<Vec<i32>>,
    n_coherence: usize,
    user_clauses: Vec<Vec<Literal>>,
}

/// Registers every canonical atom occurring in a rule body or extra cube.
pub fn collect_atoms(ds: &DecisionSet, extra: &[Cube]) -> AtomTable {
    let mut table = AtomTable::new(ds.features.len());
    for rule in ds.rules() {
        for lit in rule.body.literals() {
            table.register(&lit.atom);
        }
    }
    for cube in extra {
        for lit in cube.literals() {
            table.register(&lit.atom);
        }
    }
    table
}

pub fn build(table: AtomTable, mode: BkMode) -> BackgroundKnowledge {
    let clauses = coherence_clauses(&table, mode);
    BackgroundKnowledge {
        mode,
        n_coherence: clauses.len(),
        table,
        clauses,
        user_clauses: Vec::new(),
    }
}

pub fn build_alg2(table: AtomTable) -> BackgroundKnowledge {
    build(table, BkMode::Alg2)
}

pub fn build_complete_order(table: AtomTable) -> BackgroundKnowledge {
    build(table, BkMode::CompleteOrder)
}

/// B' = B and the user CNF. New atoms in user literals are registered and the
/// coherence clauses regenerated over the extended table; duplicate clauses
/// are suppressed.
pub fn merge_user_constraints(
    bk: &BackgroundKnowledge,
    user: &[Vec<Literal>],
) -> Result<BackgroundKnowledge, BackgroundError> {
    let mut table = bk.table.clone();
    let mut all_user: Vec<Vec<Literal>> = bk.user_clauses.clone();
    for clause in user {
        if clause.is_empty() {
            return Err(BackgroundError::EmptyUserClause);
        }
        for lit in clause {
            table.register(&lit.atom);
        }
        all_user.push(clause.clone());
    }
    let mut clauses = coherence_clauses(&table, bk.mode);
    let n_coherence = clauses.len();
    let mut seen: HashSet<Vec<i32>> = clauses.iter().cloned().collect();
    for clause in &all_user {
        let mut c: Vec<i32> = clause
            .iter()
            .map(|l| table.dimacs_of(l).expect("user atom registered above"))
            .collect();
        c.sort_unstable_by_key(|l| (l.unsigned_abs(), *l < 0));
        c.dedup();
        if c.iter().any(|&l| c.contains(&-l)) {
            continue; // tautological user clause constrains nothing
        }
        if seen.insert(c.clone()) {
            clauses.push(c);
        }
    }
    Ok(BackgroundKnowledge { mode: bk.mode, table, clauses, n_coherence, user_clauses: all_user })
}

impl BackgroundKnowledge {
    pub fn mode(&self) -> BkMode {
        self.mode
    }

    pub fn table(&self) -> &AtomTable {
        &self.table
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Clause count: the BS statistic.
    pub fn size(&self) -> usize {
        self.clauses.len()
    }

    pub fn coherence_clauses_slice(&self) -> &[Vec<i32>] {
        &self.clauses[..self.n_coherence]
    }

    /// User constraints in literal form, as supplied (used by the oracle to
    /// evaluate validity arithmetically, independent of this encoding).
    pub fn user_clauses(&self) -> &[Vec<Literal>] {
        &self.user_clauses
    }

    pub fn to_formula(&self) -> CnfFormula {
        let mut f = CnfFormula::new(self.table.len());
        for c in &self.clauses {
            f.add_clause(c);
        }
        f.num_vars = f.num_vars.max(self.table.len());
        f
    }

    /// True iff the atom assignment satisfies every clause of B.
    pub fn assignment_is_valid(&self, point: &AtomAssignment) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = point.values[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }

    /// `c atom <var> <feature> <op> <value>` legend lines for DIMACS export.
    pub fn dimacs_legend(&self, space: &FeatureSpace) -> Vec<String> {
        self.table
            .atoms()
            .iter()
            .enumerate()
            .map(|(v, a)| {
                format!(
                    "atom {} {} {} {}",
                    v + 1,
                    space.get(a.feature).name,
                    a.op.symbol(),
                    a.value
                )
            })
            .collect()
    }
}

fn sorted(mut clause: Vec<i32>) -> Vec<i32> {
    clause.sort_unstable_by_key(|l| (l.unsigned_abs(), *l < 0));
    clause
}

/// Deterministic clause generation: same table, same byte-identical list.
fn coherence_clauses(table: &AtomTable, mode: BkMode) -> Vec<Vec<i32>> {
    let mut out: Vec<Vec<i32>> = Vec::new();
    let mut seen: HashSet<Vec<i32>> = HashSet::new();
    let mut push = |out: &mut Vec<Vec<i32>>, clause: Vec<i32>| {
        let c = sorted(clause);
        if seen.insert(c.clone()) {
            out.push(c);
        }
    };
    for f in 0..table.num_features() {
        let f = FeatureId(f);
        let vals = table.feature_values(f);
        let rels = table.feature_relations(f);
        let var = |op: AtomOp, v: &Value| table.var_at(f, op, v);
        let n = vals.len();

        // '=' family: pairwise exclusion.
        if rels.contains(&AtomOp::Eq) {
            for i in 0..n {
                for j in i + 1..n {
                    if let (Some(a), Some(b)) = (var(AtomOp::Eq, &vals[i]), var(AtomOp::Eq, &vals[j])) {
                        push(&mut out, vec![-a, -b]);
                    }
                }
            }
        }
        // '>' chain over consecutive values.
        if rels.contains(&AtomOp::Gt) {
            for pair in vals.windows(2) {
                if let (Some(hi), Some(lo)) = (var(AtomOp::Gt, &pair[1]), var(AtomOp::Gt, &pair[0])) {
                    push(&mut out, vec![-hi, lo]);
                }
            }
        }
        // '>=' chain.
        if rels.contains(&AtomOp::Ge) {
            for pair in vals.windows(2) {
                if let (Some(hi), Some(lo)) = (var(AtomOp::Ge, &pair[1]), var(AtomOp::Ge, &pair[0])) {
                    push(&mut out, vec![-hi, lo]);
                }
            }
        }
        // {=, >=} links.
        if rels.contains(&AtomOp::Eq) && rels.contains(&AtomOp::Ge) {
            for v in &vals {
                if let (Some(eq), Some(ge)) = (var(AtomOp::Eq, v), var(AtomOp::Ge, v)) {
                    push(&mut out, vec![-eq, ge]);
                }
            }
            for i in 0..n.saturating_sub(1) {
                if let (Some(eq), Some(ge)) = (var(AtomOp::Eq, &vals[i]), var(AtomOp::Ge, &vals[i + 1])) {
                    push(&mut out, vec![-eq, -ge]);
                }
            }
        }
        // {=, >} links.
        if rels.contains(&AtomOp::Eq) && rels.contains(&AtomOp::Gt) {
            for v in &vals {
                if let (Some(eq), Some(gt)) = (var(AtomOp::Eq, v), var(AtomOp::Gt, v)) {
                    push(&mut out, vec![-eq, -gt]);
                }
            }
            for i in 0..n.saturating_sub(1) {
                if let (Some(eq), Some(gt)) = (var(AtomOp::Eq, &vals[i + 1]), var(AtomOp::Gt, &vals[i])) {
                    push(&mut out, vec![-eq, gt]);
                }
            }
        }
        // {>=, >} same-value link.
        if rels.contains(&AtomOp::Ge) && rels.contains(&AtomOp::Gt) {
            for v in &vals {
                if let (Some(gt), Some(ge)) = (var(AtomOp::Gt, v), var(AtomOp::Ge, v)) {
                    push(&mut out, vec![-gt, ge]);
                }
            }
        }
        // {=, >=, >} completion: (x >= v) -> (x = v) or (x > v).
        if rels.contains(&AtomOp::Eq) && rels.contains(&AtomOp::Ge) && rels.contains(&AtomOp::Gt) {
            for v in &vals {
                if let (Some(ge), Some(eq), Some(gt)) =
                    (var(AtomOp::Ge, v), var(AtomOp::Eq, v), var(AtomOp::Gt, v))
                {
                    push(&mut out, vec![-ge, eq, gt]);
                }
            }
        }

        if mode == BkMode::CompleteOrder {
            // Every arithmetically valid implication/exclusion between
            // registered same-feature atoms. With the completion clause
            // above this is sound and complete for the mentioned atoms.
            let feature_atoms: Vec<(usize, &Atom)> = table
                .atoms()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.feature == f)
                .collect();
            for (i, (va, a)) in feature_atoms.iter().enumerate() {
                for (vb, b) in feature_atoms.iter().skip(i + 1) {
                    let (la, lb) = (*va as i32 + 1, *vb as i32 + 1);
                    if atom_implies(a, b) {
                        push(&mut out, vec![-la, lb]);
                    }
                    if atom_implies(b, a) {
                        push(&mut out, vec![-lb, la]);
                    }
                    if atoms_disjoint(a, b) {
                        push(&mut out, vec![-la, -lb]);
                    }
                }
            }
        }
    }
    out
}

/// Denotation inclusion over a dense ordered domain:
/// `(f = v)` is `{v}`, `(f > v)` is `(v, inf)`, `(f >= v)` is `[v, inf)`.
fn atom_implies(a: &Atom, b: &Atom) -> bool {
    use AtomOp::*;
    if a == b {
        return true;
    }
    let (va, vb) = (&a.value, &b.value);
    match (a.op, b.op) {
        (Eq, Eq) => false, // distinct atoms, distinct values
        (Eq, Gt) => va > vb,
        (Eq, Ge) => va >= vb,
        (Gt, Gt) => va >= vb,
        (Gt, Ge) => va >= vb,
        (Ge, Ge) => va >= vb,
        (Ge, Gt) => va > vb,
        (Gt, Eq) | (Ge, Eq) => false,
    }
}

fn atoms_disjoint(a: &Atom, b: &Atom) -> bool {
    use AtomOp::*;
    let (va, vb) = (&a.value, &b.value);
    match (a.op, b.op) {
        (Eq, Eq) => va != vb,
        (Eq, Gt) => va <= vb,
        (Gt, Eq) => vb <= va,
        (Eq, Ge) => va < vb,
        (Ge, Eq) => vb < va,
        // Two upward-unbounded sets always intersect.
        (Gt, Gt) | (Gt, Ge) | (Ge, Gt) | (Ge, Ge) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{canonicalize, DecisionSet, FeatureKind, Outcome, RelOp};

    fn lit(space: &FeatureSpace, name: &str, op: RelOp, v: Value) -> Literal {
        let id = space.lookup(name).unwrap();
        canonicalize(space.get(id), op, v).unwrap()
    }

    fn table_for(atoms: &[(&str, AtomOp, i64)]) -> (AtomTable, FeatureSpace) {
        let mut space = FeatureSpace::new();
        let mut table = AtomTable::new(0);
        for (name, op, v) in atoms {
            let id = space.declare(name, FeatureKind::Numeric);
            table.register(&Atom { feature: id, op: *op, value: Value::num(*v) });
        }
        table.num_features = table.num_features.max(space.len());
        (table, space)
    }

    #[test]
    fn collect_atoms_example1_weight() {
        let ds = crate::fixtures::example1();
        let table = collect_atoms(&ds, &[]);
        let wid = ds.features.lookup("weight").unwrap();
        assert_eq!(
            table.feature_values(wid),
            vec![Value::num(80), Value::num(85), Value::num(90)]
        );
        let rels = table.feature_relations(wid);
        assert_eq!(rels, [AtomOp::Gt, AtomOp::Ge].into_iter().collect());
    }

    #[test]
    fn collect_atoms_empty_and_duplicates() {
        let space = FeatureSpace::new();
        let ds = DecisionSet::new(space, vec![], Outcome::Class("d".into())).unwrap();
        assert!(collect_atoms(&ds, &[]).is_empty());

        let mut space = FeatureSpace::new();
        space.declare("x", FeatureKind::Numeric);
        let l = lit(&space, "x", RelOp::Gt, Value::num(1));
        let ds = DecisionSet::new(
            space,
            vec![
                (Cube::new(vec![l.clone()]).unwrap(), Outcome::Class("a".into())),
                (Cube::new(vec![l.clone()]).unwrap(), Outcome::Class("b".into())),
            ],
            Outcome::Class("d".into()),
        )
        .unwrap();
        assert_eq!(collect_atoms(&ds, &[]).len(), 1);
    }

    #[test]
    fn alg2_equality_pair_exclusion() {
        let (table, _) = table_for(&[("f", AtomOp::Eq, 17), ("f", AtomOp::Eq, 30)]);
        let bk = build_alg2(table);
        assert_eq!(bk.clauses(), &[vec![-1, -2]]);
    }

    #[test]
    fn alg2_gt_chain() {
        let (table, _) = table_for(&[("f", AtomOp::Gt, 80), ("f", AtomOp::Gt, 90)]);
        let bk = build_alg2(table);
        // (f > 90) -> (f > 80)
        assert_eq!(bk.clauses(), &[vec![1, -2]]);
    }

    #[test]
    fn alg2_ge_gt_same_value_link() {
        let (table, _) = table_for(&[("f", AtomOp::Ge, 85), ("f", AtomOp::Gt, 85)]);
        let bk = build_alg2(table);
        // (f > 85) -> (f >= 85)
        assert_eq!(bk.clauses(), &[vec![1, -2]]);
    }

    #[test]
    fn complete_order_bridges_operators() {
        // age atoms {(age >= 18), (age > 10)}: Alg2 emits nothing, the
        // closure adds (age >= 18) -> (age > 10).
        let (table, _) = table_for(&[("age", AtomOp::Ge, 18), ("age", AtomOp::Gt, 10)]);
        let alg2 = build(table.clone(), BkMode::Alg2);
        assert!(alg2.clauses().is_empty());
        let complete = build(table, BkMode::CompleteOrder);
        assert!(complete.clauses().contains(&vec![-1, 2]));
    }

    #[test]
    fn complete_order_weight_chain() {
        let (table, _) = table_for(&[
            ("w", AtomOp::Gt, 80),
            ("w", AtomOp::Ge, 85),
            ("w", AtomOp::Gt, 90),
        ]);
        let bk = build(table, BkMode::CompleteOrder);
        // (w >= 85) -> (w > 80) and (w > 90) -> (w >= 85)
        assert!(bk.clauses().contains(&vec![1, -2]));
        assert!(bk.clauses().contains(&vec![2, -3]));
    }

    #[test]
    fn single_atom_modes_agree() {
        let (table, _) = table_for(&[("f", AtomOp::Gt, 5)]);
        let a = build(table.clone(), BkMode::Alg2);
        let b = build(table, BkMode::CompleteOrder);
        assert_eq!(a.clauses(), b.clauses());
    }

    #[test]
    fn mode_monotonicity() {
        let (table, _) = table_for(&[
            ("f", AtomOp::Eq, 10),
            ("f", AtomOp::Gt, 10),
            ("f", AtomOp::Ge, 20),
            ("f", AtomOp::Eq, 20),
            ("g", AtomOp::Ge, 1),
            ("g", AtomOp::Gt, 3),
        ]);
        let alg2 = build(table.clone(), BkMode::Alg2);
        let complete = build(table, BkMode::CompleteOrder);
        for c in alg2.clauses() {
            assert!(complete.clauses().contains(c), "missing {:?}", c);
        }
    }

    #[test]
    fn deterministic_generation() {
        let mk = || {
            let (table, _) = table_for(&[
                ("f", AtomOp::Eq, 10),
                ("f", AtomOp::Gt, 10),
                ("f", AtomOp::Ge, 10),
                ("g", AtomOp::Ge, 1),
            ]);
            build(table, BkMode::CompleteOrder).clauses().to_vec()
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn merge_user_constraints_examples() {
        let ds = crate::fixtures::example1();
        let table = collect_atoms(&ds, &[]);
        let bk = build(table, BkMode::CompleteOrder);
        let space = &ds.features;
        // (salary > 0) <-> (age >= 18) splits into two clauses; (age >= 18)
        // is a fresh atom and gets registered.
        let salary = lit(space, "salary", RelOp::Gt, Value::num(0));
        let age18 = lit(space, "age", RelOp::Ge, Value::num(18));
        let before_atoms = bk.table().len();
        let merged = merge_user_constraints(
            &bk,
            &[
                vec![salary.negated(), age18.clone()],
                vec![salary.clone(), age18.negated()],
            ],
        )
        .unwrap();
        assert_eq!(merged.table().len(), before_atoms + 1);
        assert_eq!(merged.size(), merged.coherence_clauses_slice().len() + 2);

        // Empty user CNF leaves B unchanged.
        let same = merge_user_constraints(&bk, &[]).unwrap();
        assert_eq!(same.clauses(), bk.clauses());

        // A user clause duplicating a coherence clause is suppressed.
        let w90 = lit(space, "weight", RelOp::Gt, Value::num(90));
        let w85 = lit(space, "weight", RelOp::Ge, Value::num(85));
        let dup = merge_user_constraints(&bk, &[vec![w90.negated(), w85.clone()]]).unwrap();
        assert_eq!(dup.size(), bk.size());
    }

    #[test]
    fn complete_order_is_satisfiable() {
        let (table, _) = table_for(&[
            ("f", AtomOp::Eq, 10),
            ("f", AtomOp::Gt, 10),
            ("f", AtomOp::Ge, 20),
            ("g", AtomOp::Eq, 0),
        ]);
        let bk = build(table, BkMode::CompleteOrder);
        let r = crate::sat::solve_formula(&bk.to_formula(), &[], &crate::sat::Budget::unlimited());
        assert_eq!(r.status, crate::sat::Status::Sat);
    }
}
