//! Parsing rule models from files: the native rule DSL, decision-tree
//! exports (paths become rules) and anchor-explanation dumps.
//!
//! The DSL is line-oriented:
//!
//! ```text
//! rulefile v1
//! task classification
//! feature weight numeric
//! feature color categorical
//! background (weight > 90) -> (weight >= 85)
//! background (color = blue) | (weight <= 80)
//! rule (weight > 90) & (color = blue) => 1
//! default 0
//! ```
//!
//! `background` lines accept a clause of `|`-separated literals, a single
//! implication `lit -> lit`, or a biconditional `lit <-> lit` (two clauses).
//! A structured JSON form of the same content is accepted as well; both
//! parse into the same model and `serialize` regenerates the canonical DSL.

mod anchors;
mod tree;

pub use anchors::{parse_anchors_str, serialize_anchors};
pub use tree::{parse_tree_str, serialize_tree, tree_to_rules, TreeExport, TreeNode, SENTINEL_DEFAULT};

use std::path::Path;

use crate::model::{
    canonicalize, Cube, DecisionSet, FeatureKind, FeatureSpace, Literal, ModelError, Outcome,
    RelOp, Value,
};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: literal on undeclared feature {name:?}")]
    UndeclaredFeature { line: usize, name: String },
    #[error("line {line}: duplicate default rule")]
    DuplicateDefault { line: usize },
    #[error("missing default outcome")]
    MissingDefault,
    #[error("missing 'rulefile v1' header")]
    MissingHeader,
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
    #[error("invalid document: {0}")]
    Document(String),
    #[error("io error reading {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    #[default]
    Classification,
    Regression,
}

/// A parsed rule model: the decision set plus its user background clauses.
#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub ds: DecisionSet,
    pub user_clauses: Vec<Vec<Literal>>,
    pub task: Task,
}

/// File kinds the tool ingests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    #[default]
    Rules,
    Tree,
    Anchors,
}

pub fn parse_path(path: &Path, kind: InputKind) -> Result<ParsedModel, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    match kind {
        InputKind::Rules => parse_rules_str(&text),
        InputKind::Tree => {
            let export = parse_tree_str(&text)?;
            tree_to_rules(&export)
        }
        InputKind::Anchors => parse_anchors_str(&text),
    }
}

pub fn parse_rules_str(text: &str) -> Result<ParsedModel, IngestError> {
    if text.trim_start().starts_with('{') {
        return parse_rules_json(text);
    }
    parse_rules_dsl(text)
}

struct LineCtx<'a> {
    line: usize,
    space: &'a FeatureSpace,
}

impl LineCtx<'_> {
    fn syntax(&self, msg: impl Into<String>) -> IngestError {
        IngestError::Syntax { line: self.line, msg: msg.into() }
    }
}

fn parse_rules_dsl(text: &str) -> Result<ParsedModel, IngestError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let header = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .ok_or(IngestError::MissingHeader)?;
    if header.1 != "rulefile v1" {
        return Err(IngestError::MissingHeader);
    }
    let mut task = Task::Classification;
    let mut space = FeatureSpace::new();
    let mut background: Vec<Vec<Literal>> = Vec::new();
    let mut bodies: Vec<(Cube, Outcome)> = Vec::new();
    let mut default: Option<(usize, Outcome)> = None;
    for (line, raw) in lines {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (directive, rest) = match content.split_once(char::is_whitespace) {
            Some((d, r)) => (d, r.trim()),
            None => (content, ""),
        };
        let ctx = LineCtx { line, space: &space };
        match directive {
            "task" => {
                task = match rest {
                    "classification" => Task::Classification,
                    "regression" => Task::Regression,
                    other => return Err(ctx.syntax(format!("unknown task {:?}", other))),
                };
            }
            "feature" => {
                let (name, kind) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| ctx.syntax("expected: feature <name> <numeric|categorical>"))?;
                let kind = match kind.trim() {
                    "numeric" => FeatureKind::Numeric,
                    "categorical" => FeatureKind::Categorical,
                    other => return Err(ctx.syntax(format!("unknown feature kind {:?}", other))),
                };
                space.declare(name.trim(), kind);
            }
            "background" => {
                let ctx = LineCtx { line, space: &space };
                background.extend(parse_background_expr(&ctx, rest)?);
            }
            "rule" => {
                let ctx = LineCtx { line, space: &space };
                let (body, outcome) = rest
                    .split_once("=>")
                    .ok_or_else(|| ctx.syntax("expected: rule <literals> => <outcome>"))?;
                let lits = body
                    .split('&')
                    .map(|s| parse_literal(&ctx, s))
                    .collect::<Result<Vec<_>, _>>()?;
                let cube = Cube::new(lits)
                    .map_err(|source| IngestError::Model { line, source })?;
                bodies.push((cube, parse_outcome(&ctx, outcome.trim(), task)?));
            }
            "default" => {
                if default.is_some() {
                    return Err(IngestError::DuplicateDefault { line });
                }
                let ctx = LineCtx { line, space: &space };
                default = Some((line, parse_outcome(&ctx, rest, task)?));
            }
            other => {
                return Err(ctx.syntax(format!("unknown directive {:?}", other)));
            }
        }
    }
    let (_, default) = default.ok_or(IngestError::MissingDefault)?;
    let ds = DecisionSet::new(space, bodies, default)
        .map_err(|source| IngestError::Model { line: 0, source })?;
    Ok(ParsedModel { ds, user_clauses: background, task })
}

fn parse_background_expr(ctx: &LineCtx, expr: &str) -> Result<Vec<Vec<Literal>>, IngestError> {
    if let Some((a, b)) = expr.split_once("<->") {
        let la = parse_literal(ctx, a)?;
        let lb = parse_literal(ctx, b)?;
        return Ok(vec![vec![la.negated(), lb.clone()], vec![la, lb.negated()]]);
    }
    if let Some((a, b)) = expr.split_once("->") {
        let la = parse_literal(ctx, a)?;
        let lb = parse_literal(ctx, b)?;
        return Ok(vec![vec![la.negated(), lb]]);
    }
    let clause = expr
        .split('|')
        .map(|s| parse_literal(ctx, s))
        .collect::<Result<Vec<_>, _>>()?;
    if clause.is_empty() {
        return Err(ctx.syntax("empty background clause"));
    }
    Ok(vec![clause])
}

/// `[!] [(] name op value [)]` with op one of `= != < <= > >=`.
fn parse_literal(ctx: &LineCtx, text: &str) -> Result<Literal, IngestError> {
    let mut s = text.trim();
    let mut negate = false;
    if let Some(rest) = s.strip_prefix('!') {
        // Distinguish a negation prefix from the != operator inside.
        if rest.trim_start().starts_with('(') {
            negate = true;
            s = rest.trim();
        }
    }
    if s.starts_with('(') && s.ends_with(')') {
        s = s[1..s.len() - 1].trim();
    }
    let op_start = s
        .find(|c| ['=', '!', '<', '>'].contains(&c))
        .ok_or_else(|| ctx.syntax(format!("no relational operator in literal {:?}", text)))?;
    let name = s[..op_start].trim();
    let rest = &s[op_start..];
    let (op_str, value_str) = ["<->", ">=", "<=", "!=", "<>", "==", "=", ">", "<"]
        .iter()
        .find_map(|op| rest.strip_prefix(op).map(|v| (*op, v.trim())))
        .ok_or_else(|| ctx.syntax(format!("unknown operator in literal {:?}", text)))?;
    let op = RelOp::parse(op_str)
        .ok_or_else(|| ctx.syntax(format!("unknown operator {:?}", op_str)))?;
    let id = ctx
        .space
        .lookup(name)
        .ok_or_else(|| IngestError::UndeclaredFeature { line: ctx.line, name: name.to_string() })?;
    let feature = ctx.space.get(id);
    let value = parse_value(ctx, feature.kind, value_str)?;
    let lit = canonicalize(feature, op, value)
        .map_err(|source| IngestError::Model { line: ctx.line, source })?;
    Ok(if negate { lit.negated() } else { lit })
}

fn parse_value(ctx: &LineCtx, kind: FeatureKind, text: &str) -> Result<Value, IngestError> {
    let text = text.trim();
    match kind {
        FeatureKind::Numeric => text
            .parse()
            .map(Value::Num)
            .map_err(|e| ctx.syntax(format!("bad numeric value {:?}: {}", text, e))),
        FeatureKind::Categorical => {
            let token = text.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(text);
            if token.is_empty() {
                return Err(ctx.syntax("empty categorical value"));
            }
            Ok(Value::Cat(token.to_string()))
        }
    }
}

fn parse_outcome(ctx: &LineCtx, text: &str, task: Task) -> Result<Outcome, IngestError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ctx.syntax("empty outcome"));
    }
    match task {
        Task::Classification => {
            let token = text.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(text);
            Ok(Outcome::Class(token.to_string()))
        }
        Task::Regression => text
            .parse()
            .map(Outcome::Num)
            .map_err(|e| ctx.syntax(format!("bad numeric outcome {:?}: {}", text, e))),
    }
}

/// Canonical DSL text for a model; `parse_rules_str` of the output
/// reproduces the model exactly.
pub fn serialize_rules(model: &ParsedModel) -> String {
    let space = &model.ds.features;
    let mut out = String::from("rulefile v1\n");
    out.push_str(&format!(
        "task {}\n\n",
        match model.task {
            Task::Classification => "classification",
            Task::Regression => "regression",
        }
    ));
    for f in space.iter() {
        let kind = match f.kind {
            FeatureKind::Numeric => "numeric",
            FeatureKind::Categorical => "categorical",
        };
        out.push_str(&format!("feature {} {}\n", f.name, kind));
    }
    if !model.user_clauses.is_empty() {
        out.push('\n');
        for clause in &model.user_clauses {
            let lits: Vec<String> =
                clause.iter().map(|l| l.display(space).to_string()).collect();
            out.push_str(&format!("background {}\n", lits.join(" | ")));
        }
    }
    out.push('\n');
    for rule in model.ds.rules() {
        let lits: Vec<String> =
            rule.body.literals().iter().map(|l| l.display(space).to_string()).collect();
        out.push_str(&format!("rule {} => {}\n", lits.join(" & "), rule.outcome));
    }
    out.push_str(&format!("default {}\n", model.ds.default_outcome));
    out
}

fn parse_rules_json(text: &str) -> Result<ParsedModel, IngestError> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| IngestError::Document(e.to_string()))?;
    let obj = doc.as_object().ok_or_else(|| IngestError::Document("expected object".into()))?;
    let task = match obj.get("task").and_then(|t| t.as_str()) {
        Some("regression") => Task::Regression,
        _ => Task::Classification,
    };
    let mut space = FeatureSpace::new();
    for f in obj
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or_else(|| IngestError::Document("missing features array".into()))?
    {
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
        space.declare(name, kind);
    }
    let ctx = LineCtx { line: 0, space: &space };
    let json_literal = |v: &serde_json::Value| -> Result<Literal, IngestError> {
        let name = v
            .get("feature")
            .and_then(|n| n.as_str())
            .ok_or_else(|| IngestError::Document("literal without feature".into()))?;
        let op = v
            .get("op")
            .and_then(|o| o.as_str())
            .and_then(RelOp::parse)
            .ok_or_else(|| IngestError::Document("literal with bad op".into()))?;
        let id = space
            .lookup(name)
            .ok_or_else(|| IngestError::UndeclaredFeature { line: 0, name: name.to_string() })?;
        let raw = v.get("value").ok_or_else(|| IngestError::Document("literal without value".into()))?;
        let text = match raw {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let value = parse_value(&ctx, space.get(id).kind, &text)?;
        canonicalize(space.get(id), op, value)
            .map_err(|source| IngestError::Model { line: 0, source })
    };
    let mut background = Vec::new();
    if let Some(bg) = obj.get("background").and_then(|b| b.as_array()) {
        for clause in bg {
            let lits = clause
                .as_array()
                .ok_or_else(|| IngestError::Document("background clause must be an array".into()))?
                .iter()
                .map(json_literal)
                .collect::<Result<Vec<_>, _>>()?;
            background.push(lits);
        }
    }
    let mut bodies = Vec::new();
    for rule in obj
        .get("rules")
        .and_then(|r| r.as_array())
        .ok_or_else(|| IngestError::Document("missing rules array".into()))?
    {
        let lits = rule
            .get("if")
            .and_then(|b| b.as_array())
            .ok_or_else(|| IngestError::Document("rule without 'if' array".into()))?
            .iter()
            .map(json_literal)
            .collect::<Result<Vec<_>, _>>()?;
        let cube = Cube::new(lits).map_err(|source| IngestError::Model { line: 0, source })?;
        let outcome_raw = rule
            .get("then")
            .ok_or_else(|| IngestError::Document("rule without 'then'".into()))?;
        let text = match outcome_raw {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        bodies.push((cube, parse_outcome(&ctx, &text, task)?));
    }
    let default_raw =
        obj.get("default").ok_or(IngestError::MissingDefault)?;
    let text = match default_raw {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let default = parse_outcome(&ctx, &text, task)?;
    let ds = DecisionSet::new(space, bodies, default)
        .map_err(|source| IngestError::Model { line: 0, source })?;
    Ok(ParsedModel { ds, user_clauses: background, task })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    pub(crate) const EXAMPLE1_DSL: &str = "\
rulefile v1
task classification

feature salary numeric
feature size numeric
feature age numeric
feature color categorical
feature weight numeric

# constraints on valid inputs
background (salary > 0) <-> (age >= 18)
background (size = 140) -> (size > 120)
background (weight > 90) -> (weight >= 85)
background (weight >= 85) -> (weight > 80)

rule (salary > 0) & (size != 140) & (age > 10) & (color = blue) & (weight > 80) => 1
rule (salary > 0) & (size = 140) => 1
rule (salary > 0) & (weight > 90) => 1
rule (size > 120) & (weight < 85) => 0
default 0
";

    #[test]
    fn parses_example1() {
        let m = parse_rules_str(EXAMPLE1_DSL).unwrap();
        assert_eq!(m.ds.rules().len(), 4);
        // The biconditional splits in two: five user clauses total.
        assert_eq!(m.user_clauses.len(), 5);
        assert_eq!(m.ds, fixtures::example1());
        assert_eq!(m.user_clauses, fixtures::example1_user_clauses(&m.ds));
    }

    #[test]
    fn empty_rules_section_gives_default_only() {
        let m = parse_rules_str("rulefile v1\nfeature x numeric\ndefault 0\n").unwrap();
        assert!(m.ds.rules().is_empty());
        assert_eq!(m.ds.default_outcome, Outcome::Class("0".into()));
    }

    #[test]
    fn undeclared_feature_is_named() {
        let err = parse_rules_str("rulefile v1\nrule (ghost > 1) => 1\ndefault 0\n").unwrap_err();
        match err {
            IngestError::UndeclaredFeature { name, line } => {
                assert_eq!(name, "ghost");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn duplicate_default_rejected() {
        let err = parse_rules_str("rulefile v1\ndefault 0\ndefault 1\n").unwrap_err();
        assert!(matches!(err, IngestError::DuplicateDefault { line: 3 }));
    }

    #[test]
    fn roundtrip_canonical() {
        let m = parse_rules_str(EXAMPLE1_DSL).unwrap();
        let text = serialize_rules(&m);
        let back = parse_rules_str(&text).unwrap();
        assert_eq!(back.ds, m.ds);
        assert_eq!(back.user_clauses, m.user_clauses);
        // Serialization of the reparsed model is byte-identical.
        assert_eq!(serialize_rules(&back), text);
    }

    #[test]
    fn json_form_matches_dsl() {
        let json = r#"{
            "format": "rulefile", "version": 1, "task": "classification",
            "features": [
                {"name": "salary", "kind": "numeric"},
                {"name": "size", "kind": "numeric"}
            ],
            "background": [
                [{"feature": "salary", "op": "<=", "value": 0},
                 {"feature": "size", "op": ">", "value": "120"}]
            ],
            "rules": [
                {"if": [{"feature": "salary", "op": ">", "value": 0}], "then": 1}
            ],
            "default": 0
        }"#;
        let m = parse_rules_str(json).unwrap();
        assert_eq!(m.ds.rules().len(), 1);
        assert_eq!(m.user_clauses.len(), 1);
        let dsl = serialize_rules(&m);
        let back = parse_rules_str(&dsl).unwrap();
        assert_eq!(back.ds, m.ds);
    }

    #[test]
    fn random_models_roundtrip() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let cfg = crate::testgen::ModelGenConfig::default();
        for _ in 0..100 {
            let m = crate::testgen::random_model(&mut rng, &cfg);
            let text = serialize_rules(&m);
            let back = parse_rules_str(&text).unwrap_or_else(|e| panic!("{}\n{}", e, text));
            assert_eq!(back.ds, m.ds);
            assert_eq!(back.user_clauses, m.user_clauses);
        }
    }

    #[test]
    fn regression_outcomes_are_exact() {
        let m = parse_rules_str(
            "rulefile v1\ntask regression\nfeature x numeric\nrule (x > 1) => 2.50\ndefault 0.1\n",
        )
        .unwrap();
        assert_eq!(m.task, Task::Regression);
        assert_eq!(
            m.ds.rules()[0].outcome,
            Outcome::Num("2.5".parse().unwrap())
        );
    }
}
