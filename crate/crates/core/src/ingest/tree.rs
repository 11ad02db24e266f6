//! Decision-tree exports and their conversion to decision sets: every
//! root-to-leaf path becomes one rule, so the default rule never fires.

use serde_json::Value as Json;

use super::{IngestError, ParsedModel, Task};
use crate::model::{
    canonicalize, Cube, DecisionSet, FeatureKind, FeatureSpace, Literal, Outcome, RelOp,
};

/// Default outcome used for converted trees; the synthesized default is
/// expected to be unreachable and reported as such.
pub const SENTINEL_DEFAULT: &str = "__no_default__";

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// `right` is taken when the split condition holds, `left` otherwise.
    Split { feature: String, op: RelOp, value: String, left: Box<TreeNode>, right: Box<TreeNode> },
    Leaf { outcome: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeExport {
    pub root: TreeNode,
    pub task: Task,
    /// Declared feature kinds; inferred from split shapes when absent.
    pub features: Vec<(String, FeatureKind)>,
}

pub fn parse_tree_str(text: &str) -> Result<TreeExport, IngestError> {
    let doc: Json =
        serde_json::from_str(text).map_err(|e| IngestError::Document(e.to_string()))?;
    let obj = doc.as_object().ok_or_else(|| IngestError::Document("expected object".into()))?;
    let (task, declared, tree_json) = if let Some(tree) = obj.get("tree") {
        let task = match obj.get("task").and_then(|t| t.as_str()) {
            Some("regression") => Task::Regression,
            _ => Task::Classification,
        };
        let mut declared = Vec::new();
        if let Some(features) = obj.get("features").and_then(|f| f.as_array()) {
            for f in features {
                let name = f
                    .get("name")
                    .and_then(|n| n.as_str())
                    .ok_or_else(|| IngestError::Document("feature without name".into()))?;
                let kind = match f.get("kind").and_then(|k| k.as_str()) {
                    Some("numeric") => FeatureKind::Numeric,
                    Some("categorical") => FeatureKind::Categorical,
                    other => {
                        return Err(IngestError::Document(format!("bad feature kind {:?}", other)))
                    }
                };
                declared.push((name.to_string(), kind));
            }
        }
        (task, declared, tree)
    } else {
        (Task::Classification, Vec::new(), &doc)
    };
    let root = parse_node(tree_json)?;
    let features = if declared.is_empty() { infer_features(&root) } else { declared };
    Ok(TreeExport { root, task, features })
}

fn parse_node(json: &Json) -> Result<TreeNode, IngestError> {
    let obj = json
        .as_object()
        .ok_or_else(|| IngestError::Document("malformed node: expected object".into()))?;
    if let Some(leaf) = obj.get("leaf") {
        let outcome = match leaf {
            Json::String(s) => s.clone(),
            other => other.to_string(),
        };
        return Ok(TreeNode::Leaf { outcome });
    }
    let feature = obj
        .get("feature")
        .and_then(|f| f.as_str())
        .ok_or_else(|| IngestError::Document("malformed node: missing feature".into()))?;
    let op = obj
        .get("op")
        .and_then(|o| o.as_str())
        .and_then(RelOp::parse)
        .ok_or_else(|| IngestError::Document("malformed node: missing or bad op".into()))?;
    let value = match obj
        .get("value")
        .ok_or_else(|| IngestError::Document("malformed node: missing value".into()))?
    {
        Json::String(s) => s.clone(),
        other => other.to_string(),
    };
    let left = obj
        .get("left")
        .ok_or_else(|| IngestError::Document("malformed node: missing left child".into()))?;
    let right = obj
        .get("right")
        .ok_or_else(|| IngestError::Document("malformed node: missing right child".into()))?;
    Ok(TreeNode::Split {
        feature: feature.to_string(),
        op,
        value,
        left: Box::new(parse_node(left)?),
        right: Box::new(parse_node(right)?),
    })
}

/// A feature is numeric when any split uses an order operator or a numeric
/// value; equality splits on non-numeric tokens make it categorical.
fn infer_features(root: &TreeNode) -> Vec<(String, FeatureKind)> {
    let mut out: Vec<(String, FeatureKind)> = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if let TreeNode::Split { feature, op, value, left, right } = node {
            let numeric = !matches!(op, RelOp::Eq | RelOp::Ne)
                || value.parse::<crate::decimal::Decimal>().is_ok();
            match out.iter_mut().find(|(n, _)| n == feature) {
                Some((_, kind)) => {
                    if numeric {
                        *kind = FeatureKind::Numeric;
                    }
                }
                None => out.push((
                    feature.clone(),
                    if numeric { FeatureKind::Numeric } else { FeatureKind::Categorical },
                )),
            }
            stack.push(right);
            stack.push(left);
        }
    }
    out
}

pub fn serialize_tree(export: &TreeExport) -> String {
    fn node_json(node: &TreeNode) -> Json {
        match node {
            TreeNode::Leaf { outcome } => serde_json::json!({ "leaf": outcome }),
            TreeNode::Split { feature, op, value, left, right } => serde_json::json!({
                "feature": feature,
                "op": op.symbol(),
                "value": value,
                "left": node_json(left),
                "right": node_json(right),
            }),
        }
    }
    let features: Vec<Json> = export
        .features
        .iter()
        .map(|(name, kind)| {
            serde_json::json!({
                "name": name,
                "kind": match kind {
                    FeatureKind::Numeric => "numeric",
                    FeatureKind::Categorical => "categorical",
                },
            })
        })
        .collect();
    let doc = serde_json::json!({
        "task": match export.task {
            Task::Classification => "classification",
            Task::Regression => "regression",
        },
        "features": features,
        "tree": node_json(&export.root),
    });
    serde_json::to_string_pretty(&doc).expect("tree document serializes")
}

/// One rule per root-to-leaf path: the right child contributes the split
/// literal, the left child its negation. The default outcome is a sentinel;
/// reachability analysis must subsequently report it unreachable.
pub fn tree_to_rules(export: &TreeExport) -> Result<ParsedModel, IngestError> {
    let mut space = FeatureSpace::new();
    for (name, kind) in &export.features {
        space.declare(name, *kind);
    }
    // A degenerate single-leaf tree is an empty-body rule, which a decision
    // set cannot hold; it becomes a default-only set with that outcome.
    if let TreeNode::Leaf { outcome } = &export.root {
        let ctx = super::LineCtx { line: 0, space: &space };
        let outcome = super::parse_outcome(&ctx, outcome, export.task)?;
        let ds = DecisionSet::new(space, vec![], outcome)
            .map_err(|source| IngestError::Model { line: 0, source })?;
        return Ok(ParsedModel { ds, user_clauses: vec![], task: export.task });
    }
    let mut bodies: Vec<(Cube, Outcome)> = Vec::new();
    let mut path: Vec<Literal> = Vec::new();
    collect_paths(&space, export.task, &export.root, &mut path, &mut bodies)?;
    let sentinel = match export.task {
        Task::Classification => Outcome::Class(SENTINEL_DEFAULT.to_string()),
        // Regression leaves are numeric; a class-typed sentinel can never
        // collide with them.
        Task::Regression => Outcome::Class(SENTINEL_DEFAULT.to_string()),
    };
    let mut ds = DecisionSet::new(space, bodies, sentinel)
        .map_err(|source| IngestError::Model { line: 0, source })?;
    ds.default_is_sentinel = true;
    Ok(ParsedModel { ds, user_clauses: vec![], task: export.task })
}

fn collect_paths(
    space: &FeatureSpace,
    task: Task,
    node: &TreeNode,
    path: &mut Vec<Literal>,
    bodies: &mut Vec<(Cube, Outcome)>,
) -> Result<(), IngestError> {
    match node {
        TreeNode::Leaf { outcome } => {
            let ctx = super::LineCtx { line: 0, space };
            let outcome = super::parse_outcome(&ctx, outcome, task)?;
            // A path holding a literal and its negation covers nothing; such
            // a leaf is unreachable and contributes no rule.
            if let Ok(cube) = Cube::new(path.clone()) {
                bodies.push((cube, outcome));
            }
            Ok(())
        }
        TreeNode::Split { feature, op, value, left, right } => {
            let ctx = super::LineCtx { line: 0, space };
            let id = space.lookup(feature).ok_or_else(|| IngestError::UndeclaredFeature {
                line: 0,
                name: feature.clone(),
            })?;
            let kind = space.get(id).kind;
            let val = super::parse_value(&ctx, kind, value)?;
            let lit = canonicalize(space.get(id), *op, val)
                .map_err(|source| IngestError::Model { line: 0, source })?;
            path.push(lit.clone());
            collect_paths(space, task, right, path, bodies)?;
            path.pop();
            path.push(lit.negated());
            collect_paths(space, task, left, path, bodies)?;
            path.pop();
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AtomOp, Value};

    #[test]
    fn depth_one_split() {
        let export = parse_tree_str(
            r#"{"feature": "x", "op": ">", "value": 5,
                "left": {"leaf": 0}, "right": {"leaf": 1}}"#,
        )
        .unwrap();
        let m = tree_to_rules(&export).unwrap();
        assert_eq!(m.ds.rules().len(), 2);
        // Right child takes the split literal.
        let r_true = &m.ds.rules()[0];
        assert_eq!(r_true.outcome, Outcome::Class("1".into()));
        let lit = &r_true.body.literals()[0];
        assert!(lit.positive);
        assert_eq!(lit.atom.op, AtomOp::Gt);
        assert_eq!(lit.atom.value, Value::num(5));
        let r_false = &m.ds.rules()[1];
        assert_eq!(r_false.outcome, Outcome::Class("0".into()));
        assert!(!r_false.body.literals()[0].positive);
        assert!(m.ds.default_is_sentinel);
    }

    #[test]
    fn single_leaf_becomes_default_only() {
        let export = parse_tree_str(r#"{"leaf": "yes"}"#).unwrap();
        let m = tree_to_rules(&export).unwrap();
        assert!(m.ds.rules().is_empty());
        assert_eq!(m.ds.default_outcome, Outcome::Class("yes".into()));
        assert!(!m.ds.default_is_sentinel);
    }

    #[test]
    fn malformed_node_is_rejected() {
        let err = parse_tree_str(r#"{"feature": "x", "op": ">", "value": 1, "left": {"leaf": 0}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("missing right child"));
    }

    #[test]
    fn kind_inference() {
        let export = parse_tree_str(
            r#"{"feature": "color", "op": "=", "value": "blue",
                "left": {"leaf": "a"},
                "right": {"feature": "size", "op": "<=", "value": "10",
                          "left": {"leaf": "b"}, "right": {"leaf": "c"}}}"#,
        )
        .unwrap();
        assert_eq!(
            export.features,
            vec![
                ("color".to_string(), FeatureKind::Categorical),
                ("size".to_string(), FeatureKind::Numeric)
            ]
        );
    }

    #[test]
    fn roundtrip_via_serialize() {
        let export = parse_tree_str(
            r#"{"feature": "x", "op": ">=", "value": "2.5",
                "left": {"leaf": "no"}, "right": {"leaf": "yes"}}"#,
        )
        .unwrap();
        let text = serialize_tree(&export);
        let back = parse_tree_str(&text).unwrap();
        assert_eq!(back, export);
    }
}
