//! Small hand-built decision sets used across tests, benches and docs.

use crate::background::{self, BackgroundKnowledge, BkMode};
use crate::model::{
    canonicalize, Cube, DecisionSet, FeatureKind, FeatureSpace, Literal, Outcome, RelOp, Value,
};

fn lit(space: &FeatureSpace, name: &str, op: RelOp, v: Value) -> Literal {
    let id = space.lookup(name).expect("declared feature");
    canonicalize(space.get(id), op, v).expect("admissible literal")
}

/// Salary/size/age/color/weight decision set: four rules, two outcomes,
/// one negative overlap against the weight-based 0-rule.
pub fn example1() -> DecisionSet {
    let mut space = FeatureSpace::new();
    for (name, kind) in [
        ("salary", FeatureKind::Numeric),
        ("size", FeatureKind::Numeric),
        ("age", FeatureKind::Numeric),
        ("color", FeatureKind::Categorical),
        ("weight", FeatureKind::Numeric),
    ] {
        space.declare(name, kind);
    }
    let o = |s: &str| Outcome::Class(s.to_string());
    let body = |lits: Vec<Literal>| Cube::new(lits).unwrap();
    let r1 = body(vec![
        lit(&space, "salary", RelOp::Gt, Value::num(0)),
        lit(&space, "size", RelOp::Ne, Value::num(140)),
        lit(&space, "age", RelOp::Gt, Value::num(10)),
        lit(&space, "color", RelOp::Eq, Value::cat("blue")),
        lit(&space, "weight", RelOp::Gt, Value::num(80)),
    ]);
    let r2 = body(vec![
        lit(&space, "salary", RelOp::Gt, Value::num(0)),
        lit(&space, "size", RelOp::Eq, Value::num(140)),
    ]);
    let r3 = body(vec![
        lit(&space, "salary", RelOp::Gt, Value::num(0)),
        lit(&space, "weight", RelOp::Gt, Value::num(90)),
    ]);
    let r4 = body(vec![
        lit(&space, "size", RelOp::Gt, Value::num(120)),
        lit(&space, "weight", RelOp::Lt, Value::num(85)),
    ]);
    DecisionSet::new(
        space,
        vec![(r1, o("1")), (r2, o("1")), (r3, o("1")), (r4, o("0"))],
        o("0"),
    )
    .unwrap()
}

/// The five user constraint clauses of [`example1`]: the salary/age
/// biconditional split in two, plus three single-implication clauses.
pub fn example1_user_clauses(ds: &DecisionSet) -> Vec<Vec<Literal>> {
    let s = &ds.features;
    let salary = lit(s, "salary", RelOp::Gt, Value::num(0));
    let age18 = lit(s, "age", RelOp::Ge, Value::num(18));
    let size_eq = lit(s, "size", RelOp::Eq, Value::num(140));
    let size_gt = lit(s, "size", RelOp::Gt, Value::num(120));
    let w90 = lit(s, "weight", RelOp::Gt, Value::num(90));
    let w85 = lit(s, "weight", RelOp::Ge, Value::num(85));
    let w80 = lit(s, "weight", RelOp::Gt, Value::num(80));
    vec![
        vec![salary.negated(), age18.clone()],
        vec![salary, age18.negated()],
        vec![size_eq.negated(), size_gt],
        vec![w90.negated(), w85.clone()],
        vec![w85.negated(), w80],
    ]
}

/// [`example1`] with its background knowledge built in the given mode.
pub fn example1_with_bk(mode: BkMode) -> (DecisionSet, BackgroundKnowledge) {
    let ds = example1();
    let bk = background::build(background::collect_atoms(&ds, &[]), mode);
    let bk = background::merge_user_constraints(&bk, &example1_user_clauses(&ds)).unwrap();
    (ds, bk)
}

/// Propositional three-rule decision set with `B = (b or w) and (not d or f)`;
/// `f` is locally redundant in the third rule and both `b` and `w` are
/// globally redundant in the first two.
pub fn example3() -> DecisionSet {
    let mut space = FeatureSpace::new();
    for name in ["a", "b", "w", "c", "d", "f"] {
        space.declare(name, FeatureKind::Categorical);
    }
    let on = |s: &FeatureSpace, n: &str| lit(s, n, RelOp::Eq, Value::cat("on"));
    let o = |s: &str| Outcome::Class(s.to_string());
    let r1 = Cube::new(vec![on(&space, "a"), on(&space, "b")]).unwrap();
    let r2 = Cube::new(vec![on(&space, "a"), on(&space, "w")]).unwrap();
    let r3 = Cube::new(vec![on(&space, "c"), on(&space, "d"), on(&space, "f")]).unwrap();
    DecisionSet::new(space, vec![(r1, o("o1")), (r2, o("o1")), (r3, o("o2"))], o("o0")).unwrap()
}

pub fn example3_user_clauses(ds: &DecisionSet) -> Vec<Vec<Literal>> {
    let s = &ds.features;
    let on = |n: &str| lit(s, n, RelOp::Eq, Value::cat("on"));
    vec![
        vec![on("b"), on("w")],
        vec![on("d").negated(), on("f")],
    ]
}

pub fn example3_with_bk(mode: BkMode) -> (DecisionSet, BackgroundKnowledge) {
    let ds = example3();
    let bk = background::build(background::collect_atoms(&ds, &[]), mode);
    let bk = background::merge_user_constraints(&bk, &example3_user_clauses(&ds)).unwrap();
    (ds, bk)
}
