//! Per-model audit statistics and their serialization.
//!
//! Field definitions (one report per decision set):
//! NR rules after preprocessing; NP distinct outcomes; NO negative-overlap
//! pairs; Total differing-outcome pairs; PO = 100*NO/Total; TO/TB/TC/TR wall
//! seconds for overlap / background build / rule redundancy / literal
//! redundancy; BS background clause count; RS distinct literals across rule
//! bodies; RM maximum rule size; NL total literal occurrences; IR/IL/IG
//! redundant rule / locally / globally redundant literal counts; PL/PG the
//! corresponding percentages of NL; EX true when any query timed out.

use serde::Serialize;

use crate::analysis::{
    FindingKind, OrderPolicy, OverlapKind, OverlapReport, RedundancyFinding, RemovedRule,
};
use crate::background::{BackgroundKnowledge, BkMode};
use crate::ingest::Task;
use crate::model::{AtomAssignment, DecisionSet, TieBreak};

#[derive(Debug, Clone, Serialize)]
pub struct WitnessEntry {
    pub atom: String,
    pub value: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapRecord {
    pub i: usize,
    pub j: usize,
    pub kind: OverlapKind,
    pub outcome_i: String,
    pub outcome_j: String,
    pub witness: Vec<WitnessEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FindingRecord {
    pub kind: FindingKind,
    pub rule: usize,
    pub position: Option<usize>,
    pub literal: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub model: String,
    pub task: Task,
    pub bk_mode: BkMode,
    pub tie_break: TieBreak,
    pub order_policy: OrderPolicy,
    pub seed: u64,
    pub nr: usize,
    pub np: usize,
    pub no: usize,
    pub total: u64,
    pub po: f64,
    /// Set when Total = 0, in which case PO is reported as 0 by convention.
    pub no_cross_outcome_pairs: bool,
    pub undecided_pairs: usize,
    pub to_s: f64,
    pub tb_s: f64,
    pub tc_s: f64,
    pub tr_s: f64,
    pub bs: usize,
    pub rs: usize,
    pub rm: usize,
    pub nl: usize,
    pub ir: usize,
    pub il: usize,
    pub ig: usize,
    pub pl: f64,
    pub pg: f64,
    pub undecided_rules: usize,
    pub undecided_literals: usize,
    pub ex: bool,
    pub kept_unverified: usize,
    pub removed_duplicates: usize,
    pub removed_never_fires: usize,
    pub default_reachable: Option<bool>,
    pub default_is_sentinel: bool,
    /// Default-only decision set: no rules survived (or none existed).
    pub degenerate: bool,
    pub overlaps: Vec<OverlapRecord>,
    pub findings: Vec<FindingRecord>,
}

pub struct ReportInputs<'a> {
    pub model: String,
    pub task: Task,
    pub tie_break: TieBreak,
    pub order_policy: OrderPolicy,
    pub seed: u64,
    /// Decision set after preprocessing (carries NR/NP/RS/RM/NL).
    pub ds: &'a DecisionSet,
    /// Decision set the literal scan ran on (after rule removal).
    pub scanned: &'a DecisionSet,
    pub bk: &'a BackgroundKnowledge,
    pub removed: &'a [RemovedRule],
    pub kept_unverified: usize,
    pub overlap: &'a OverlapReport,
    pub default_reachable: Option<bool>,
    pub rule_findings: &'a [RedundancyFinding],
    pub undecided_rules: usize,
    pub literal_findings: &'a [RedundancyFinding],
    pub undecided_literals: usize,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Timings {
    pub to_s: f64,
    pub tb_s: f64,
    pub tc_s: f64,
    pub tr_s: f64,
}

impl Timings {
    fn rounded_ms(x: f64) -> f64 {
        (x * 1000.0).round() / 1000.0
    }
}

fn witness_entries(bk: &BackgroundKnowledge, witness: &AtomAssignment, ds: &DecisionSet) -> Vec<WitnessEntry> {
    bk.table()
        .atoms()
        .iter()
        .enumerate()
        .map(|(v, a)| WitnessEntry {
            atom: format!(
                "{} {} {}",
                ds.features.get(a.feature).name,
                a.op.symbol(),
                a.value
            ),
            value: witness.values[v],
        })
        .collect()
}

fn finding_record(ds: &DecisionSet, f: &RedundancyFinding) -> FindingRecord {
    FindingRecord {
        kind: f.kind,
        rule: f.rule.0,
        position: f.position,
        literal: f.literal.as_ref().map(|l| l.display(&ds.features).to_string()),
    }
}

/// Computes every statistic from the analysis outputs. The report is a pure
/// function of its inputs: identical findings and timings reproduce an
/// identical report.
pub fn build_report(inputs: ReportInputs<'_>) -> AuditReport {
    let ds = inputs.ds;
    let overlap = inputs.overlap;
    let no = overlap.negative.len();
    let total = overlap.total_cross_pairs.saturating_sub(overlap.undecided.len() as u64);
    let no_cross = total == 0;
    let po = if no_cross { 0.0 } else { 100.0 * no as f64 / total as f64 };
    let nl = inputs.scanned.literal_total();
    let il = inputs
        .literal_findings
        .iter()
        .filter(|f| f.kind == FindingKind::LocalLiteral)
        .count();
    let ig = inputs
        .literal_findings
        .iter()
        .filter(|f| f.kind == FindingKind::GlobalLiteral)
        .count();
    let pct = |n: usize| if nl == 0 { 0.0 } else { 100.0 * n as f64 / nl as f64 };
    let ex = !overlap.undecided.is_empty()
        || inputs.undecided_rules > 0
        || inputs.undecided_literals > 0
        || inputs.kept_unverified > 0;
    let mut overlaps: Vec<OverlapRecord> = Vec::new();
    for pair in overlap.negative.iter().chain(overlap.positive.iter()) {
        overlaps.push(OverlapRecord {
            i: pair.i.0,
            j: pair.j.0,
            kind: pair.kind,
            outcome_i: ds.rule(pair.i).map(|r| r.outcome.to_string()).unwrap_or_default(),
            outcome_j: ds.rule(pair.j).map(|r| r.outcome.to_string()).unwrap_or_default(),
            witness: witness_entries(inputs.bk, &pair.witness, ds),
        });
    }
    let findings = inputs
        .rule_findings
        .iter()
        .chain(inputs.literal_findings.iter())
        .map(|f| finding_record(ds, f))
        .collect();
    AuditReport {
        model: inputs.model,
        task: inputs.task,
        bk_mode: inputs.bk.mode(),
        tie_break: inputs.tie_break,
        order_policy: inputs.order_policy,
        seed: inputs.seed,
        nr: ds.rules().len(),
        np: ds.distinct_outcomes().len(),
        no,
        total,
        po,
        no_cross_outcome_pairs: no_cross,
        undecided_pairs: overlap.undecided.len(),
        to_s: Timings::rounded_ms(inputs.timings.to_s),
        tb_s: Timings::rounded_ms(inputs.timings.tb_s),
        tc_s: Timings::rounded_ms(inputs.timings.tc_s),
        tr_s: Timings::rounded_ms(inputs.timings.tr_s),
        bs: inputs.bk.size(),
        rs: ds.distinct_literal_count(),
        rm: ds.max_rule_size(),
        nl,
        ir: inputs.rule_findings.len(),
        il,
        ig,
        pl: pct(il),
        pg: pct(ig),
        undecided_rules: inputs.undecided_rules,
        undecided_literals: inputs.undecided_literals,
        ex,
        kept_unverified: inputs.kept_unverified,
        removed_duplicates: inputs
            .removed
            .iter()
            .filter(|r| matches!(r.reason, crate::analysis::RemovalReason::DuplicateOf(_)))
            .count(),
        removed_never_fires: inputs
            .removed
            .iter()
            .filter(|r| matches!(r.reason, crate::analysis::RemovalReason::NeverFires))
            .count(),
        default_reachable: inputs.default_reachable,
        default_is_sentinel: ds.default_is_sentinel,
        degenerate: ds.rules().is_empty(),
        overlaps,
        findings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Human,
    Jsonl,
    Csv,
}

pub const CSV_HEADER: &str = "model,task,nr,np,no,total,po,undecided_pairs,to_s,tb_s,tc_s,tr_s,\
bs,rs,rm,nl,ir,il,ig,pl,pg,ex,default_reachable,degenerate";

impl AuditReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_csv_row(&self) -> String {
        let reach = match self.default_reachable {
            Some(true) => "yes",
            Some(false) => "no",
            None => "unknown",
        };
        format!(
            "{},{},{},{},{},{},{:.6},{},{:.3},{:.3},{:.3},{:.3},{},{},{},{},{},{},{},{:.6},{:.6},{},{},{}",
            csv_escape(&self.model),
            match self.task {
                Task::Classification => "classification",
                Task::Regression => "regression",
            },
            self.nr,
            self.np,
            self.no,
            self.total,
            self.po,
            self.undecided_pairs,
            self.to_s,
            self.tb_s,
            self.tc_s,
            self.tr_s,
            self.bs,
            self.rs,
            self.rm,
            self.nl,
            self.ir,
            self.il,
            self.ig,
            self.pl,
            self.pg,
            self.ex,
            reach,
            self.degenerate,
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", CSV_HEADER, self.to_csv_row())
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "model {}   task {:?}   bk-mode {:?}   seed {}\n",
            self.model, self.task, self.bk_mode, self.seed
        ));
        out.push_str(&format!(
            "NR {:<5} NP {:<4} NO {:<4} Total {:<6} PO {:>8.3}%  undecided-pairs {}\n",
            self.nr, self.np, self.no, self.total, self.po, self.undecided_pairs
        ));
        if self.no_cross_outcome_pairs {
            out.push_str("  (no differing-outcome rule pairs; PO reported as 0)\n");
        }
        out.push_str(&format!(
            "RS {:<5} RM {:<4} NL {:<4} BS {:<6}\n",
            self.rs, self.rm, self.nl, self.bs
        ));
        out.push_str(&format!(
            "IR {:<5} IL {:<4} PL {:>7.3}%  IG {:<4} PG {:>7.3}%\n",
            self.ir, self.il, self.pl, self.ig, self.pg
        ));
        out.push_str(&format!(
            "TO {:.3}s  TB {:.3}s  TC {:.3}s  TR {:.3}s  EX {}\n",
            self.to_s, self.tb_s, self.tc_s, self.tr_s, self.ex
        ));
        let reach = match self.default_reachable {
            Some(true) => "yes",
            Some(false) => "no",
            None => "unknown",
        };
        out.push_str(&format!(
            "default-reachable {}   sentinel-default {}   degenerate {}\n",
            reach, self.default_is_sentinel, self.degenerate
        ));
        if self.removed_duplicates + self.removed_never_fires + self.kept_unverified > 0 {
            out.push_str(&format!(
                "preprocess: removed {} duplicate(s), {} never-firing, {} unverified\n",
                self.removed_duplicates, self.removed_never_fires, self.kept_unverified
            ));
        }
        if !self.overlaps.is_empty() {
            out.push_str("overlap pairs:\n");
            for o in &self.overlaps {
                out.push_str(&format!(
                    "  {:?} (R{}, R{})  outcomes {} / {}\n",
                    o.kind, o.i, o.j, o.outcome_i, o.outcome_j
                ));
            }
        }
        if !self.findings.is_empty() {
            out.push_str("redundancy findings:\n");
            for f in &self.findings {
                match (&f.literal, f.position) {
                    (Some(lit), Some(pos)) => out.push_str(&format!(
                        "  {:?} R{} position {} {}\n",
                        f.kind, f.rule, pos, lit
                    )),
                    _ => out.push_str(&format!("  {:?} R{}\n", f.kind, f.rule)),
                }
            }
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Human => self.to_human(),
            ReportFormat::Jsonl => format!("{}\n", self.to_json_line()),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One aggregate row per model tag: instance statistics averaged over the
/// reports that did not time out, and IR/IL/IG as instance counts. PL/PG
/// average only over instances that exhibit the respective redundancy.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub model: String,
    pub ds: usize,
    pub ex: usize,
    pub nr: f64,
    pub np: f64,
    pub no: f64,
    pub po: f64,
    pub to_s: f64,
    pub tb_s: f64,
    pub tc_s: f64,
    pub tr_s: f64,
    pub bs: f64,
    pub rs: f64,
    pub rm: f64,
    pub ir: usize,
    pub il: usize,
    pub pl: f64,
    pub ig: usize,
    pub pg: f64,
}

pub fn aggregate(lines: &[serde_json::Value]) -> Vec<AggregateRow> {
    let mut tags: Vec<String> = Vec::new();
    for v in lines {
        if let Some(m) = v.get("model").and_then(|m| m.as_str()) {
            if !tags.iter().any(|t| t == m) {
                tags.push(m.to_string());
            }
        }
    }
    let num = |v: &serde_json::Value, k: &str| v.get(k).and_then(|x| x.as_f64()).unwrap_or(0.0);
    let count = |v: &serde_json::Value, k: &str| num(v, k) as usize;
    tags.into_iter()
        .map(|tag| {
            let all: Vec<&serde_json::Value> = lines
                .iter()
                .filter(|v| v.get("model").and_then(|m| m.as_str()) == Some(tag.as_str()))
                .collect();
            let ex = all
                .iter()
                .filter(|v| v.get("ex").and_then(|e| e.as_bool()).unwrap_or(false))
                .count();
            // Only experiments that finished inside the budget are averaged.
            let done: Vec<&&serde_json::Value> = all
                .iter()
                .filter(|v| !v.get("ex").and_then(|e| e.as_bool()).unwrap_or(false))
                .collect();
            let mean = |k: &str| {
                if done.is_empty() {
                    0.0
                } else {
                    done.iter().map(|v| num(v, k)).sum::<f64>() / done.len() as f64
                }
            };
            let flagged_mean = |flag: &str, k: &str| {
                let flagged: Vec<_> =
                    done.iter().filter(|v| count(v, flag) > 0).collect();
                if flagged.is_empty() {
                    0.0
                } else {
                    flagged.iter().map(|v| num(v, k)).sum::<f64>() / flagged.len() as f64
                }
            };
            AggregateRow {
                model: tag,
                ds: all.len(),
                ex,
                nr: mean("nr"),
                np: mean("np"),
                no: mean("no"),
                po: mean("po"),
                to_s: mean("to_s"),
                tb_s: mean("tb_s"),
                tc_s: mean("tc_s"),
                tr_s: mean("tr_s"),
                bs: mean("bs"),
                rs: mean("rs"),
                rm: mean("rm"),
                ir: done.iter().filter(|v| count(v, "ir") > 0).count(),
                il: done.iter().filter(|v| count(v, "il") > 0).count(),
                pl: flagged_mean("il", "pl"),
                ig: done.iter().filter(|v| count(v, "ig") > 0).count(),
                pg: flagged_mean("ig", "pg"),
            }
        })
        .collect()
}

pub const AGGREGATE_CSV_HEADER: &str =
    "model,ds,ex,nr,np,no,po,to_s,tb_s,tc_s,tr_s,bs,rs,rm,ir,il,pl,ig,pg";

impl AggregateRow {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{:.3},{:.3},{:.3},{:.6},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{},{},{:.6},{},{:.6}",
            csv_escape(&self.model),
            self.ds,
            self.ex,
            self.nr,
            self.np,
            self.no,
            self.po,
            self.to_s,
            self.tb_s,
            self.tc_s,
            self.tr_s,
            self.bs,
            self.rs,
            self.rm,
            self.ir,
            self.il,
            self.pl,
            self.ig,
            self.pg,
        )
    }

    pub fn to_human(&self) -> String {
        format!(
            "{:<16} DS {:<4} EX {:<3} NR {:>7.1} NP {:>5.1} NO {:>7.1} PO {:>7.3}% IR {:<3} IL {:<3} PL {:>6.2}% IG {:<3} PG {:>6.2}%",
            self.model, self.ds, self.ex, self.nr, self.np, self.no, self.po,
            self.ir, self.il, self.pl, self.ig, self.pg
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_escape_quotes() {
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn header_matches_row_arity() {
        let cols = CSV_HEADER.split(',').count();
        // Build a row through the pipeline in pipeline tests; here check a
        // synthetic row has the same arity.
        let report = crate::pipeline::tests::example1_report();
        assert_eq!(report.to_csv_row().split(',').count(), cols);
    }

    #[test]
    fn human_table_stays_narrow() {
        let report = crate::pipeline::tests::example1_report();
        for line in report.to_human().lines() {
            assert!(line.len() <= 120, "line too wide: {line}");
        }
    }

    #[test]
    fn jsonl_roundtrips_through_generic_parser() {
        let report = crate::pipeline::tests::example1_report();
        let v: serde_json::Value = serde_json::from_str(&report.to_json_line()).unwrap();
        assert_eq!(v.get("nr").and_then(|x| x.as_u64()), Some(4));
        assert_eq!(v.get("rs").and_then(|x| x.as_u64()), Some(9));
    }

    #[test]
    fn aggregate_groups_and_excludes_timeouts() {
        let mk = |model: &str, ex: bool, nr: f64, il: usize| {
            serde_json::json!({
                "model": model, "ex": ex, "nr": nr, "np": 2.0, "no": 1.0, "po": 50.0,
                "to_s": 0.0, "tb_s": 0.0, "tc_s": 0.0, "tr_s": 0.0,
                "bs": 3.0, "rs": 4.0, "rm": 2.0, "ir": 0, "il": il, "pl": if il > 0 { 10.0 } else { 0.0 },
                "ig": 0, "pg": 0.0,
            })
        };
        let rows = aggregate(&[
            mk("a", false, 10.0, 0),
            mk("a", false, 20.0, 2),
            mk("a", true, 999.0, 9),
            mk("b", false, 4.0, 0),
        ]);
        assert_eq!(rows.len(), 2);
        let a = &rows[0];
        assert_eq!(a.model, "a");
        assert_eq!(a.ds, 3);
        assert_eq!(a.ex, 1);
        assert!((a.nr - 15.0).abs() < 1e-9, "timed-out instance must not count");
        assert_eq!(a.il, 1);
        assert!((a.pl - 10.0).abs() < 1e-9, "PL averages only flagged instances");
    }
}
