//! Anchor-explanation dumps: one JSON record per line, each anchor a
//! predicate list plus the predicted class. Anchors become rules so the
//! overlap analysis can find conflicting anchors.

use serde_json::Value as Json;

use super::{IngestError, ParsedModel, Task};
use crate::model::{
    canonicalize, Cube, DecisionSet, FeatureKind, FeatureSpace, Outcome, RelOp,
};

type AnchorRecord = (Vec<(String, RelOp, String)>, String);

/// Parses `{"predicates": [{"feature", "op", "value"}...], "class": c}`
/// JSON lines. Identical anchors (same canonical predicate set and class)
/// are deduplicated; the remaining count is the NR statistic.
pub fn parse_anchors_str(text: &str) -> Result<ParsedModel, IngestError> {
    let mut records: Vec<AnchorRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let doc: Json = serde_json::from_str(line).map_err(|e| IngestError::Syntax {
            line: i + 1,
            msg: format!("malformed anchor record: {}", e),
        })?;
        let record = (|| -> Option<AnchorRecord> {
            let obj = doc.as_object()?;
            let class = match obj.get("class")? {
                Json::String(s) => s.clone(),
                other => other.to_string(),
            };
            let mut predicates = Vec::new();
            for p in obj.get("predicates")?.as_array()? {
                let feature = p.get("feature")?.as_str()?.to_string();
                let op = RelOp::parse(p.get("op")?.as_str()?)?;
                let value = match p.get("value")? {
                    Json::String(s) => s.clone(),
                    other => other.to_string(),
                };
                predicates.push((feature, op, value));
            }
            Some((predicates, class))
        })()
        .ok_or_else(|| IngestError::Syntax {
            line: i + 1,
            msg: "malformed anchor record: expected predicates list and class".to_string(),
        })?;
        if record.0.is_empty() {
            return Err(IngestError::Syntax {
                line: i + 1,
                msg: "anchor with no predicates".to_string(),
            });
        }
        records.push(record);
    }

    // Infer feature kinds across all records before building literals.
    let mut space = FeatureSpace::new();
    let mut inferred: Vec<(String, FeatureKind)> = Vec::new();
    for (predicates, _) in &records {
        for (feature, op, value) in predicates {
            let numeric = !matches!(op, RelOp::Eq | RelOp::Ne)
                || value.parse::<crate::decimal::Decimal>().is_ok();
            match inferred.iter_mut().find(|(n, _)| n == feature) {
                Some((_, kind)) => {
                    if numeric {
                        *kind = FeatureKind::Numeric;
                    }
                }
                None => inferred.push((
                    feature.clone(),
                    if numeric { FeatureKind::Numeric } else { FeatureKind::Categorical },
                )),
            }
        }
    }
    for (name, kind) in &inferred {
        space.declare(name, *kind);
    }

    let ctx = super::LineCtx { line: 0, space: &space };
    let mut bodies: Vec<(Cube, Outcome)> = Vec::new();
    for (predicates, class) in &records {
        let mut lits = Vec::with_capacity(predicates.len());
        for (feature, op, value) in predicates {
            let id = space.lookup(feature).expect("inferred above");
            let val = super::parse_value(&ctx, space.get(id).kind, value)?;
            let lit = canonicalize(space.get(id), *op, val)
                .map_err(|source| IngestError::Model { line: 0, source })?;
            lits.push(lit);
        }
        let cube = Cube::new(lits).map_err(|source| IngestError::Model { line: 0, source })?;
        let outcome = Outcome::Class(class.clone());
        if !bodies.iter().any(|(b, o)| o == &outcome && b.same_set(&cube)) {
            bodies.push((cube, outcome));
        }
    }
    let mut ds = DecisionSet::new(
        space,
        bodies,
        Outcome::Class(super::tree::SENTINEL_DEFAULT.to_string()),
    )
    .map_err(|source| IngestError::Model { line: 0, source })?;
    ds.default_is_sentinel = true;
    Ok(ParsedModel { ds, user_clauses: vec![], task: Task::Classification })
}

/// JSON-lines text that parses back to the same anchor set.
pub fn serialize_anchors(model: &ParsedModel) -> String {
    let space = &model.ds.features;
    let mut out = String::new();
    for rule in model.ds.rules() {
        let predicates: Vec<Json> = rule
            .body
            .literals()
            .iter()
            .map(|l| {
                serde_json::json!({
                    "feature": space.get(l.atom.feature).name,
                    "op": l.surface_op().symbol(),
                    "value": l.atom.value.to_string(),
                })
            })
            .collect();
        let line = serde_json::json!({
            "predicates": predicates,
            "class": rule.outcome.to_string(),
        });
        out.push_str(&serde_json::to_string(&line).expect("anchor serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AtomOp;

    #[test]
    fn disjoint_anchors_become_rules() {
        let text = r#"
{"predicates": [{"feature": "age", "op": ">", "value": 30}], "class": ">50K"}
{"predicates": [{"feature": "hours", "op": "<=", "value": 20}], "class": "<=50K"}
"#;
        let m = parse_anchors_str(text).unwrap();
        assert_eq!(m.ds.rules().len(), 2);
        assert!(m.ds.default_is_sentinel);
    }

    #[test]
    fn identical_anchors_deduplicate() {
        let text = r#"
{"predicates": [{"feature": "age", "op": ">", "value": 30}], "class": "1"}
{"predicates": [{"feature": "age", "op": ">", "value": 30}], "class": "1"}
"#;
        let m = parse_anchors_str(text).unwrap();
        assert_eq!(m.ds.rules().len(), 1);
    }

    #[test]
    fn le_and_lt_predicates_canonicalize_to_polarity() {
        let text = r#"{"predicates": [{"feature": "age", "op": "<", "value": 30}], "class": "1"}"#;
        let m = parse_anchors_str(text).unwrap();
        let lit = &m.ds.rules()[0].body.literals()[0];
        assert!(!lit.positive);
        assert_eq!(lit.atom.op, AtomOp::Ge);
    }

    #[test]
    fn malformed_record_is_rejected() {
        let err = parse_anchors_str(r#"{"class": "1"}"#).unwrap_err();
        assert!(err.to_string().contains("malformed anchor record"));
    }

    #[test]
    fn roundtrip() {
        let text = r#"{"predicates": [{"feature": "sex", "op": "=", "value": "male"}, {"feature": "age", "op": ">=", "value": "31.5"}], "class": "1"}"#;
        let m = parse_anchors_str(text).unwrap();
        let out = serialize_anchors(&m);
        let back = parse_anchors_str(&out).unwrap();
        assert_eq!(back.ds, m.ds);
    }
}
