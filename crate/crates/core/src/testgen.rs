//! Random instance generators and brute-force reference deciders, shared by
//! the randomized test suites and the benches.

use rand::Rng;

use crate::background::AtomTable;
use crate::ingest::{ParsedModel, Task, TreeExport, TreeNode};
use crate::model::{
    canonicalize, Cube, DecisionSet, FeatureKind, FeatureSpace, Literal, Outcome, RelOp, Value,
};
use crate::sat::CnfFormula;

/// Truth-table satisfiability for small formulas.
pub fn truth_table_satisfiable(f: &CnfFormula) -> Option<Vec<bool>> {
    assert!(f.num_vars <= 20, "truth table only for small formulas");
    for bits in 0u64..1 << f.num_vars {
        let model: Vec<bool> = (0..f.num_vars).map(|v| bits >> v & 1 == 1).collect();
        if f.is_satisfied_by(&model) {
            return Some(model);
        }
    }
    None
}

pub fn random_formula(rng: &mut impl Rng, max_vars: usize) -> CnfFormula {
    let vars = rng.gen_range(1..=max_vars);
    let clauses = rng.gen_range(1..=3 * vars);
    let mut f = CnfFormula::new(vars);
    for _ in 0..clauses {
        let len = rng.gen_range(1..=3.min(vars));
        let clause: Vec<i32> = (0..len)
            .map(|_| {
                let v = rng.gen_range(1..=vars) as i32;
                if rng.gen_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        f.add_clause(&clause);
    }
    f
}

#[derive(Debug, Clone)]
pub struct ModelGenConfig {
    pub max_features: usize,
    pub max_thresholds: usize,
    pub max_rules: usize,
    pub max_body: usize,
    pub max_outcomes: usize,
    pub categorical_prob: f64,
    pub user_clause_prob: f64,
    /// Restrict rule bodies to positive equality literals (the shape the
    /// explanation propositions cover).
    pub equality_only: bool,
}

impl Default for ModelGenConfig {
    fn default() -> Self {
        ModelGenConfig {
            max_features: 4,
            max_thresholds: 4,
            max_rules: 8,
            max_body: 4,
            max_outcomes: 3,
            categorical_prob: 0.3,
            user_clause_prob: 0.4,
            equality_only: false,
        }
    }
}

const TOKENS: [&str; 4] = ["red", "green", "blue", "grey"];

/// A random decision set with occasional user constraint clauses over its
/// own literals.
pub fn random_model(rng: &mut impl Rng, cfg: &ModelGenConfig) -> ParsedModel {
    let mut space = FeatureSpace::new();
    let n_features = rng.gen_range(2..=cfg.max_features.max(2));
    let mut pools: Vec<Vec<Value>> = Vec::new();
    for i in 0..n_features {
        let kind = if cfg.equality_only || rng.gen_bool(cfg.categorical_prob) {
            FeatureKind::Categorical
        } else {
            FeatureKind::Numeric
        };
        space.declare(&format!("f{}", i), kind);
        let pool = match kind {
            FeatureKind::Numeric => {
                let k = rng.gen_range(1..=cfg.max_thresholds);
                let mut vals: Vec<i64> = Vec::new();
                while vals.len() < k {
                    let v = rng.gen_range(0..20);
                    if !vals.contains(&v) {
                        vals.push(v);
                    }
                }
                vals.into_iter().map(Value::num).collect()
            }
            FeatureKind::Categorical => {
                let k = rng.gen_range(1..=3);
                TOKENS.iter().take(k).map(|t| Value::cat(t)).collect()
            }
        };
        pools.push(pool);
    }

    let random_literal = |rng: &mut dyn rand::RngCore, feature: usize| -> Literal {
        let f = space.get(crate::model::FeatureId(feature));
        let value = pools[feature][rng.gen_range(0..pools[feature].len())].clone();
        let op = if cfg.equality_only {
            RelOp::Eq
        } else {
            match f.kind {
                FeatureKind::Categorical => [RelOp::Eq, RelOp::Ne][rng.gen_range(0..2)],
                FeatureKind::Numeric => {
                    let ops = [RelOp::Eq, RelOp::Ne, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge];
                    ops[rng.gen_range(0..ops.len())]
                }
            }
        };
        canonicalize(f, op, value).expect("admissible by construction")
    };

    let n_rules = rng.gen_range(1..=cfg.max_rules);
    let n_outcomes = rng.gen_range(2..=cfg.max_outcomes.max(2));
    let mut bodies: Vec<(Cube, Outcome)> = Vec::new();
    for _ in 0..n_rules {
        let body_len = rng.gen_range(1..=cfg.max_body.min(n_features));
        // Distinct features per body avoid syntactic contradictions and
        // match how rule learners emit conditions.
        let mut features: Vec<usize> = (0..n_features).collect();
        for i in (1..features.len()).rev() {
            features.swap(i, rng.gen_range(0..=i));
        }
        features.truncate(body_len);
        let lits: Vec<Literal> = features.iter().map(|&f| random_literal(rng, f)).collect();
        let cube = Cube::new(lits).expect("distinct features cannot contradict");
        let outcome = Outcome::Class(format!("c{}", rng.gen_range(0..n_outcomes)));
        bodies.push((cube, outcome));
    }
    let default = Outcome::Class(format!("c{}", rng.gen_range(0..n_outcomes)));
    let ds = DecisionSet::new(space, bodies, default).expect("bodies are non-empty");

    let mut user_clauses: Vec<Vec<Literal>> = Vec::new();
    if rng.gen_bool(cfg.user_clause_prob) {
        let mentioned: Vec<Literal> = ds
            .rules()
            .iter()
            .flat_map(|r| r.body.literals().iter().cloned())
            .collect();
        if mentioned.len() >= 2 {
            for _ in 0..rng.gen_range(1..=2) {
                let a = mentioned[rng.gen_range(0..mentioned.len())].clone();
                let b = mentioned[rng.gen_range(0..mentioned.len())].clone();
                let a = if rng.gen_bool(0.5) { a.negated() } else { a };
                let b = if rng.gen_bool(0.5) { b.negated() } else { b };
                user_clauses.push(vec![a, b]);
            }
        }
    }
    ParsedModel { ds, user_clauses, task: Task::Classification }
}

/// A random conjunction of registered atoms with random polarities.
pub fn random_conjunction(rng: &mut impl Rng, table: &AtomTable, max_len: usize) -> Vec<Literal> {
    let atoms = table.atoms();
    if atoms.is_empty() {
        return Vec::new();
    }
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| Literal {
            atom: atoms[rng.gen_range(0..atoms.len())].clone(),
            positive: rng.gen_bool(0.5),
        })
        .collect()
}

/// A random binary decision tree over numeric features whose every leaf is
/// reachable: thresholds are always drawn strictly inside the feasible
/// integer range of the branch.
pub fn random_tree(rng: &mut impl Rng, max_depth: usize) -> TreeExport {
    let n_features = rng.gen_range(2..=3);
    let bounds: Vec<(i64, i64)> = vec![(0, 1000); n_features];
    let root = gen_node(rng, max_depth, &bounds);
    let features = (0..n_features)
        .map(|i| (format!("f{}", i), FeatureKind::Numeric))
        .collect();
    TreeExport { root, task: Task::Classification, features }
}

fn gen_node(rng: &mut impl Rng, depth: usize, bounds: &[(i64, i64)]) -> TreeNode {
    let splittable: Vec<usize> =
        (0..bounds.len()).filter(|&f| bounds[f].0 < bounds[f].1).collect();
    if depth == 0 || splittable.is_empty() || rng.gen_bool(0.25) {
        return TreeNode::Leaf { outcome: format!("{}", rng.gen_range(0..3)) };
    }
    let f = splittable[rng.gen_range(0..splittable.len())];
    let (lo, hi) = bounds[f];
    // Split on (f > t) with lo <= t < hi: the right branch keeps the
    // integers in [t+1, hi], the left branch [lo, t]; both are non-empty.
    let t = rng.gen_range(lo..hi);
    let mut right_bounds = bounds.to_vec();
    right_bounds[f] = (t + 1, hi);
    let mut left_bounds = bounds.to_vec();
    left_bounds[f] = (lo, t);
    TreeNode::Split {
        feature: format!("f{}", f),
        op: RelOp::Gt,
        value: t.to_string(),
        left: Box::new(gen_node(rng, depth - 1, &left_bounds)),
        right: Box::new(gen_node(rng, depth - 1, &right_bounds)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_models_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = ModelGenConfig::default();
        for _ in 0..50 {
            let m = random_model(&mut rng, &cfg);
            assert!(!m.ds.rules().is_empty());
            let bk = crate::pipeline::build_background(&m, crate::background::BkMode::CompleteOrder)
                .unwrap();
            assert!(!bk.table().is_empty());
        }
    }

    #[test]
    fn random_trees_have_reachable_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let tree = random_tree(&mut rng, 5);
            let m = crate::ingest::tree_to_rules(&tree).unwrap();
            let bk = crate::pipeline::build_background(&m, crate::background::BkMode::CompleteOrder)
                .unwrap();
            let mut checker = crate::analysis::Checker::new(
                &m.ds,
                &bk,
                crate::analysis::CheckerConfig::default(),
            );
            for rule in m.ds.rules() {
                let status = checker
                    .rule_fires(rule.idx, &crate::sat::Budget::unlimited())
                    .unwrap();
                assert_eq!(status, crate::sat::Status::Sat, "leaf of {} unreachable", rule.idx);
            }
        }
    }

    #[test]
    fn truth_table_finds_models() {
        let mut f = CnfFormula::new(3);
        f.add_clause(&[1, 2]);
        f.add_clause(&[-1, 3]);
        let m = truth_table_satisfiable(&f).unwrap();
        assert!(f.is_satisfied_by(&m));
        f.add_clause(&[-3]);
        f.add_clause(&[-2]);
        f.add_clause(&[1]);
        assert!(truth_table_satisfiable(&f).is_none());
    }
}
