//! End-to-end tests of the ruleaudit binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ruleaudit"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn audit_reports_negative_overlap_with_exit_2() {
    let out = run(&["audit", "--input", fixture("example1.rules").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("(R1, R4)"), "missing overlap pair in: {text}");
    assert!(text.contains("NR 4"));
}

#[test]
fn audit_converted_tree_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("model.tree.json");
    std::fs::write(
        &tree,
        r#"{"feature": "x", "op": ">", "value": 5,
            "left": {"leaf": "a"},
            "right": {"feature": "y", "op": ">=", "value": 2,
                      "left": {"leaf": "b"}, "right": {"leaf": "a"}}}"#,
    )
    .unwrap();
    let out = run(&["audit", "--input", tree.to_str().unwrap(), "--kind", "tree"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("default-reachable no"), "tree default must be unreachable: {text}");
}

#[test]
fn audit_unreadable_input_is_exit_1() {
    let out = run(&["audit", "--input", "/nonexistent/model.rules"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn audit_jsonl_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let out = run(&[
            "audit",
            "--input",
            fixture("example1.rules").to_str().unwrap(),
            "--format",
            "jsonl",
            "--jobs",
            "1",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn reports_are_byte_stable_across_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for jobs in ["1", "3"] {
        let path = dir.path().join(format!("jobs{jobs}.jsonl"));
        let out = run(&[
            "audit",
            "--input",
            fixture("example1.rules").to_str().unwrap(),
            "--format",
            "jsonl",
            "--jobs",
            jobs,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "worker count leaked into the report");
}

#[test]
fn env_variables_mirror_flags() {
    let out = bin()
        .args(["audit", "--input", fixture("example1.rules").to_str().unwrap()])
        .env("RULEAUDIT_FORMAT", "csv")
        .output()
        .unwrap();
    let text = stdout(&out);
    assert!(text.starts_with("model,task,"), "env override ignored: {text}");
}

#[test]
fn explain_refuses_non_equality_bodies() {
    let out = run(&[
        "explain",
        "--input",
        fixture("example1.rules").to_str().unwrap(),
        "--point",
        "salary=1,size=140,age=18,color=blue,weight=85",
        "--format",
        "jsonl",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(
        doc["axp_refusal"]["reason"].as_str(),
        Some("proposition precondition violated")
    );
}

#[test]
fn explain_produces_axp_on_clean_model() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("clean.rules");
    std::fs::write(
        &rules,
        "rulefile v1\n\
         feature x1 categorical\n\
         feature x2 categorical\n\
         background !(x1 = a) | !(x2 = b)\n\
         rule (x1 = a) => 1\n\
         rule (x2 = b) => 0\n\
         default 0\n",
    )
    .unwrap();
    let out = run(&[
        "explain",
        "--input",
        rules.to_str().unwrap(),
        "--point",
        "x1=a,x2=c",
        "--format",
        "jsonl",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(doc["axp"]["kind"].as_str(), Some("AXP"));
    assert_eq!(doc["axp"]["features"], serde_json::json!(["x1"]));
    assert_eq!(doc["axp"]["outcome"].as_str(), Some("1"));
}

#[test]
fn explain_names_the_overlapping_pair() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("overlapping.rules");
    std::fs::write(
        &rules,
        "rulefile v1\n\
         feature x1 categorical\n\
         feature x2 categorical\n\
         rule (x1 = a) => 1\n\
         rule (x2 = b) => 0\n\
         default 0\n",
    )
    .unwrap();
    let out = run(&[
        "explain",
        "--input",
        rules.to_str().unwrap(),
        "--point",
        "x1=a,x2=c",
        "--format",
        "jsonl",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(doc["axp_refusal"]["reason"].as_str(), Some("negative overlap"));
    assert_eq!(doc["axp_refusal"]["pair"], serde_json::json!([1, 2]));
    // The WAXp needs only overlap freedom involving the fired rule, which
    // fails here too: the pair involves rule 1.
    assert_eq!(doc["waxp_refusal"]["pair"], serde_json::json!([1, 2]));
}

#[test]
fn explain_refuses_points_firing_no_rule() {
    let out = run(&[
        "explain",
        "--input",
        fixture("example1.rules").to_str().unwrap(),
        "--point",
        "salary=0,size=100,age=10,color=red,weight=70",
        "--format",
        "jsonl",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!(doc["refusal"]["reason"]
        .as_str()
        .unwrap()
        .contains("default outcome is out of scope"));
}

#[test]
fn simplify_removes_redundancies_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("simplified.rules");
    let out = run(&[
        "simplify",
        "--input",
        fixture("example3.rules").to_str().unwrap(),
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_file).unwrap();
    // f is gone from the o2 rule and b from the o1 rules (the background
    // section still mentions them, only rule bodies shrink).
    let rule_lines: Vec<&str> = text.lines().filter(|l| l.starts_with("rule ")).collect();
    assert!(
        rule_lines.iter().all(|l| !l.contains("(f = on)") && !l.contains("(b = on)")),
        "redundant literals must be removed: {text}"
    );
    let log = std::fs::read_to_string(dir.path().join("simplified.rules.log.jsonl")).unwrap();
    assert!(log.contains("local-literal"));
    assert!(log.contains("global-literal"));
    // The simplified file parses; re-auditing finds no redundancy left
    // (the negative overlap between the two outcomes remains, as it must:
    // simplification preserves equivalence).
    let audit = run(&[
        "audit",
        "--input",
        out_file.to_str().unwrap(),
        "--format",
        "jsonl",
    ]);
    assert_eq!(audit.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_str(stdout(&audit).trim()).unwrap();
    assert_eq!(doc["ir"].as_u64(), Some(0));
    assert_eq!(doc["il"].as_u64(), Some(0));
    assert_eq!(doc["ig"].as_u64(), Some(0));
}

#[test]
fn export_cnf_carries_atom_legend() {
    let out = run(&[
        "export-cnf",
        "--input",
        fixture("example1.rules").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("c atom 1 salary > 0"), "legend missing: {text}");
    assert!(text.contains("p cnf "));
}

/// Brute-force DIMACS solver used as the "external" cross-check engine.
const BRUTE_DIMACS_PY: &str = r#"#!/usr/bin/env python3
import sys

def main():
    clauses, acc, nvars = [], [], 0
    for line in open(sys.argv[1]):
        tok = line.split()
        if not tok or tok[0] == "c":
            continue
        if tok[0] == "p":
            nvars = int(tok[2])
            continue
        for t in tok:
            lit = int(t)
            if lit == 0:
                clauses.append(acc)
                acc = []
            else:
                acc.append(lit)
    for bits in range(1 << nvars):
        if all(any((bits >> (abs(l) - 1)) & 1 == (1 if l > 0 else 0) for l in cl) for cl in clauses):
            print("s SATISFIABLE")
            return
    print("s UNSATISFIABLE")

main()
"#;

#[test]
fn external_solver_cross_check_agrees() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("brute_dimacs.py");
    std::fs::write(&script, BRUTE_DIMACS_PY).unwrap();
    std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
    let out = run(&[
        "audit",
        "--input",
        fixture("example1.rules").to_str().unwrap(),
        "--ext-solver",
        script.to_str().unwrap(),
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(2), "stderr: {stderr}");
    assert!(
        stderr.contains("external solver agreed on 3 overlap queries"),
        "cross-check not reported: {stderr}"
    );
}

#[test]
fn aggregate_groups_by_model_tag() {
    let dir = tempfile::tempdir().unwrap();
    for (tag, file) in [("expA", "a.jsonl"), ("expA", "b.jsonl"), ("expB", "c.jsonl")] {
        let path = dir.path().join(file);
        let out = run(&[
            "audit",
            "--input",
            fixture("example1.rules").to_str().unwrap(),
            "--format",
            "jsonl",
            "--model-tag",
            tag,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2));
    }
    let out = run(&[
        "aggregate",
        "--input",
        dir.path().to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "header + one row per tag: {text}");
    assert!(lines[1].starts_with("expA,2,0,4.000"));
    assert!(lines[2].starts_with("expB,1,0,4.000"));
}
