//! Command-line front door: ingest, background construction, analysis,
//! explanation and reporting, with per-model budgets.
//!
//! Exit codes for `audit`: 0 clean, 2 negative overlap found, 3 timeout,
//! 1 on I/O or parse errors. Every flag can also be set through an
//! environment variable with the `RULEAUDIT_` prefix.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ruleaudit_core::analysis::{CheckerConfig, OrderPolicy};
use ruleaudit_core::background::BkMode;
use ruleaudit_core::explain::{axp_from_rule, waxp_from_rule, Explanation, Refusal};
use ruleaudit_core::ingest::{self, InputKind, ParsedModel};
use ruleaudit_core::model::{RuleIdx, TieBreak, Value};
use ruleaudit_core::oracle::eval_cube;
use ruleaudit_core::pipeline::{audit, build_background, AuditConfig};
use ruleaudit_core::report::{ReportFormat, AGGREGATE_CSV_HEADER};
use ruleaudit_core::sat::{write_dimacs, ExternalSolver, SolverConfig};

#[derive(Parser)]
#[command(name = "ruleaudit", version, about = "SAT-based audits of rule-based models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit a model: overlap, redundant rules, redundant literals.
    Audit(AuditArgs),
    /// Explain one instance through a fired rule (AXp/WAXp or refusal).
    Explain(ExplainArgs),
    /// Remove redundant rules and literals, writing an equivalent model.
    Simplify(SimplifyArgs),
    /// Export the background knowledge as DIMACS CNF with an atom legend.
    ExportCnf(ExportArgs),
    /// Average per-model reports (JSON lines) into one row per model tag.
    Aggregate(AggregateArgs),
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Input model file.
    #[arg(long, env = "RULEAUDIT_INPUT")]
    input: PathBuf,
    /// Input kind.
    #[arg(long, value_enum, default_value_t = KindOpt::Rules, env = "RULEAUDIT_KIND")]
    kind: KindOpt,
    /// Background knowledge mode.
    #[arg(long, value_enum, default_value_t = BkModeOpt::CompleteOrder, env = "RULEAUDIT_BK_MODE")]
    bk_mode: BkModeOpt,
    /// Per-model wall-clock budget in seconds.
    #[arg(long, default_value_t = 3600, env = "RULEAUDIT_BUDGET_SECS")]
    budget_secs: u64,
    /// Per-model conflict budget (deterministic; 0 = unlimited).
    #[arg(long, default_value_t = 0, env = "RULEAUDIT_BUDGET_CONFLICTS")]
    budget_conflicts: u64,
    /// Tie-breaking strategy of the classifier semantics.
    #[arg(long, value_enum, default_value_t = TieBreakOpt::ReportAmbiguity, env = "RULEAUDIT_TIE_BREAK")]
    tie_break: TieBreakOpt,
    /// Order in which simplification visits rules and literals.
    #[arg(long, value_enum, default_value_t = OrderOpt::Ascending, env = "RULEAUDIT_ORDER_POLICY")]
    order_policy: OrderOpt,
    /// Worker threads for pair checks.
    #[arg(long, default_value_t = 1, env = "RULEAUDIT_JOBS")]
    jobs: usize,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatOpt::Human, env = "RULEAUDIT_FORMAT")]
    format: FormatOpt,
    /// Output path (stdout when absent).
    #[arg(long, env = "RULEAUDIT_OUT")]
    out: Option<PathBuf>,
    /// Solver seed (affects branching order only, never answers).
    #[arg(long, default_value_t = 0, env = "RULEAUDIT_SEED")]
    seed: u64,
    /// Timing fields: `none` keeps reports byte-reproducible, `wall`
    /// measures real durations.
    #[arg(long, value_enum, default_value_t = TimingsOpt::None, env = "RULEAUDIT_TIMINGS")]
    timings: TimingsOpt,
    /// Also enumerate positive (same-outcome) overlap.
    #[arg(long, default_value_t = false, env = "RULEAUDIT_POSITIVE_OVERLAP")]
    positive_overlap: bool,
    /// External DIMACS solver executable to cross-check audit queries.
    #[arg(long, env = "RULEAUDIT_EXT_SOLVER")]
    ext_solver: Option<PathBuf>,
    /// Model tag used in reports (defaults to the input file stem).
    #[arg(long, env = "RULEAUDIT_MODEL_TAG")]
    model_tag: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindOpt {
    Rules,
    Tree,
    Anchors,
}

#[derive(Clone, Copy, ValueEnum)]
enum BkModeOpt {
    Alg2,
    CompleteOrder,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreakOpt {
    ReportAmbiguity,
    LowestIndex,
    Majority,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderOpt {
    Ascending,
    Descending,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatOpt {
    Human,
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimingsOpt {
    None,
    Wall,
}

impl CommonOpts {
    fn kind(&self) -> InputKind {
        match self.kind {
            KindOpt::Rules => InputKind::Rules,
            KindOpt::Tree => InputKind::Tree,
            KindOpt::Anchors => InputKind::Anchors,
        }
    }

    fn audit_config(&self) -> AuditConfig {
        AuditConfig {
            bk_mode: match self.bk_mode {
                BkModeOpt::Alg2 => BkMode::Alg2,
                BkModeOpt::CompleteOrder => BkMode::CompleteOrder,
            },
            checker: CheckerConfig {
                solver: SolverConfig { seed: self.seed, ..SolverConfig::default() },
                reuse_solver: true,
                jobs: self.jobs.max(1),
                positive_overlap: self.positive_overlap,
                order: match self.order_policy {
                    OrderOpt::Ascending => OrderPolicy::Ascending,
                    OrderOpt::Descending => OrderPolicy::Descending,
                },
            },
            tie_break: match self.tie_break {
                TieBreakOpt::ReportAmbiguity => TieBreak::ReportAmbiguity,
                TieBreakOpt::LowestIndex => TieBreak::LowestRuleIndex,
                TieBreakOpt::Majority => TieBreak::MajorityThenLowestIndex,
            },
            budget_secs: Some(self.budget_secs.max(1)),
            budget_conflicts: (self.budget_conflicts > 0).then_some(self.budget_conflicts),
            measure_timings: matches!(self.timings, TimingsOpt::Wall),
        }
    }

    fn format(&self) -> ReportFormat {
        match self.format {
            FormatOpt::Human => ReportFormat::Human,
            FormatOpt::Jsonl => ReportFormat::Jsonl,
            FormatOpt::Csv => ReportFormat::Csv,
        }
    }

    fn tag(&self) -> String {
        self.model_tag.clone().unwrap_or_else(|| {
            self.input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "model".to_string())
        })
    }

    fn parse_input(&self) -> Result<ParsedModel> {
        ingest::parse_path(&self.input, self.kind())
            .with_context(|| format!("failed to parse {}", self.input.display()))
    }

    fn write_output(&self, content: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, content)
                .with_context(|| format!("failed to write {}", path.display()))?,
            None => print!("{}", content),
        }
        Ok(())
    }
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// The instance, as comma-separated feature assignments:
    /// "salary=1,age=18,color=blue".
    #[arg(long, env = "RULEAUDIT_POINT")]
    point: String,
    /// Explain through this rule (1-based); default: the lowest-index
    /// rule firing on the instance.
    #[arg(long, env = "RULEAUDIT_RULE")]
    rule: Option<usize>,
    /// Which explanation to attempt.
    #[arg(long, value_enum, default_value_t = ExplOpt::Auto, env = "RULEAUDIT_EXPLANATION")]
    explanation: ExplOpt,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExplOpt {
    Auto,
    Axp,
    Waxp,
}

#[derive(Args)]
struct SimplifyArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Findings log path (JSON lines); defaults to `<out>.log.jsonl`.
    #[arg(long, env = "RULEAUDIT_LOG")]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct AggregateArgs {
    /// Directory of JSON-lines report files (or a single file).
    #[arg(long, env = "RULEAUDIT_INPUT")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatOpt::Human, env = "RULEAUDIT_FORMAT")]
    format: FormatOpt,
    #[arg(long, env = "RULEAUDIT_OUT")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Audit(args) => cmd_audit(args),
        Command::Explain(args) => cmd_explain(args),
        Command::Simplify(args) => cmd_simplify(args),
        Command::ExportCnf(args) => cmd_export_cnf(args),
        Command::Aggregate(args) => cmd_aggregate(args),
    };
    match run {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {:#}", err);
            ExitCode::from(1)
        }
    }
}

fn cmd_audit(args: AuditArgs) -> Result<ExitCode> {
    let model = args.common.parse_input()?;
    let config = args.common.audit_config();
    let outcome = audit(&model, &args.common.tag(), &config)?;
    if let Some(path) = &args.common.ext_solver {
        cross_check_queries(&outcome, path)?;
    }
    args.common.write_output(&outcome.report.render(args.common.format()))?;
    Ok(ExitCode::from(outcome.exit_code() as u8))
}

/// Replays the audit's overlap queries through an external DIMACS solver
/// and compares answers.
fn cross_check_queries(
    outcome: &ruleaudit_core::pipeline::AuditOutcome,
    solver_path: &Path,
) -> Result<()> {
    let external = ExternalSolver::new(solver_path);
    let bk = &outcome.bk;
    let ds = &outcome.ds;
    let mut checked = 0usize;
    for (a, ra) in ds.rules().iter().enumerate() {
        for rb in ds.rules().iter().skip(a + 1) {
            if ra.outcome == rb.outcome {
                continue;
            }
            let mut f = bk.to_formula();
            for lit in ra.body.literals().iter().chain(rb.body.literals()) {
                f.add_clause(&[bk.table().dimacs_of(lit).expect("registered atom")]);
            }
            let ours = outcome
                .overlap
                .negative
                .iter()
                .any(|p| (p.i, p.j) == (ra.idx, rb.idx) || (p.i, p.j) == (rb.idx, ra.idx));
            let theirs = external
                .solve(&f)
                .with_context(|| format!("external solver on pair ({}, {})", ra.idx, rb.idx))?;
            let theirs_sat = theirs == ruleaudit_core::sat::Status::Sat;
            if ours != theirs_sat {
                bail!(
                    "external solver disagrees on pair ({}, {}): ours={} theirs={}",
                    ra.idx,
                    rb.idx,
                    ours,
                    theirs_sat
                );
            }
            checked += 1;
        }
    }
    eprintln!("external solver agreed on {} overlap queries", checked);
    Ok(())
}

fn parse_point(model: &ParsedModel, text: &str) -> Result<Vec<Value>> {
    let space = &model.ds.features;
    let mut values: Vec<Option<Value>> = vec![None; space.len()];
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, raw) = part
            .split_once('=')
            .with_context(|| format!("expected name=value, got {:?}", part))?;
        let id = space
            .lookup(name.trim())
            .with_context(|| format!("unknown feature {:?}", name.trim()))?;
        let value = match space.get(id).kind {
            ruleaudit_core::model::FeatureKind::Numeric => Value::Num(
                raw.trim()
                    .parse()
                    .with_context(|| format!("bad numeric value {:?} for {}", raw, name))?,
            ),
            ruleaudit_core::model::FeatureKind::Categorical => Value::Cat(raw.trim().to_string()),
        };
        values[id.0] = Some(value);
    }
    let missing: Vec<&str> = space
        .iter()
        .filter(|f| values[f.id.0].is_none())
        .map(|f| f.name.as_str())
        .collect();
    if !missing.is_empty() {
        bail!("instance leaves features unassigned: {}", missing.join(", "));
    }
    Ok(values.into_iter().map(|v| v.unwrap()).collect())
}

fn refusal_json(model: &ParsedModel, refusal: &Refusal) -> serde_json::Value {
    let space = &model.ds.features;
    let mut v = serde_json::json!({ "reason": refusal.reason() });
    match refusal {
        Refusal::NegativeOverlap { pair, .. } => {
            v["pair"] = serde_json::json!([pair.0 .0, pair.1 .0]);
        }
        Refusal::OverlapUndecided { pair } => {
            v["pair"] = serde_json::json!([pair.0 .0, pair.1 .0]);
        }
        Refusal::RedundantLiteral { rule, position, literal, kind, certificate } => {
            v["rule"] = serde_json::json!(rule.0);
            v["position"] = serde_json::json!(position);
            v["literal"] = serde_json::json!(literal.display(space).to_string());
            v["kind"] = serde_json::to_value(kind).unwrap();
            v["certificate"] = serde_json::to_value(certificate).unwrap();
        }
        Refusal::NonEqualityBody { rule, literal } => {
            v["rule"] = serde_json::json!(rule.0);
            v["literal"] = serde_json::json!(literal.display(space).to_string());
        }
        Refusal::NotMinimal { rule, droppable, certificates } => {
            v["rule"] = serde_json::json!(rule.0);
            v["droppable"] = serde_json::json!(droppable
                .iter()
                .map(|f| space.get(*f).name.clone())
                .collect::<Vec<_>>());
            v["certificates"] = serde_json::to_value(certificates).unwrap();
        }
        _ => {}
    }
    v
}

fn explanation_json(model: &ParsedModel, e: &Explanation) -> serde_json::Value {
    serde_json::json!({
        "kind": e.kind,
        "features": e.feature_names(&model.ds.features),
        "rule": e.rule.0,
        "outcome": e.instance.outcome.to_string(),
    })
}

fn cmd_explain(args: ExplainArgs) -> Result<ExitCode> {
    let model = args.common.parse_input()?;
    let config = args.common.audit_config();
    let point = parse_point(&model, &args.point)?;

    // Audit artifacts computed on the fly.
    let bk = build_background(&model, config.bk_mode)?;
    let mut planner = config.planner();
    let pre = ruleaudit_core::analysis::preprocess(&model.ds, &bk, &config.checker, &mut planner);
    let ds = pre.ds.with_tie_break(config.tie_break);
    let overlap = ruleaudit_core::analysis::overlap_pairs(&ds, &bk, &config.checker, &mut planner);

    let rule_idx = match args.rule {
        Some(k) => RuleIdx(k),
        None => match ds.rules().iter().find(|r| eval_cube(&point, &r.body)) {
            Some(r) => r.idx,
            None => {
                // Default-outcome predictions are outside the propositions.
                let doc = serde_json::json!({
                    "instance": args.point,
                    "refusal": {"reason": "no rule fires on the instance; the default outcome is out of scope"},
                });
                args.common.write_output(&format!("{}\n", doc))?;
                return Ok(ExitCode::from(0));
            }
        },
    };

    let mut doc = serde_json::json!({ "instance": args.point, "rule": rule_idx.0 });
    let attempt_axp = matches!(args.explanation, ExplOpt::Auto | ExplOpt::Axp);
    let attempt_waxp = matches!(args.explanation, ExplOpt::Auto | ExplOpt::Waxp);
    let mut produced = false;
    if attempt_axp {
        match axp_from_rule(&ds, &bk, rule_idx, &point, &overlap, &config.checker, &mut planner) {
            Ok(e) => {
                doc["axp"] = explanation_json(&model, &e);
                produced = true;
            }
            Err(r) => {
                doc["axp_refusal"] = refusal_json(&model, &r);
            }
        }
    }
    if attempt_waxp && !(produced && matches!(args.explanation, ExplOpt::Auto)) {
        match waxp_from_rule(&ds, &bk, rule_idx, &point, &overlap) {
            Ok(e) => doc["waxp"] = explanation_json(&model, &e),
            Err(r) => doc["waxp_refusal"] = refusal_json(&model, &r),
        }
    }
    match args.common.format {
        FormatOpt::Human => {
            let mut out = String::new();
            out.push_str(&format!("instance: {}\nrule: R{}\n", args.point, rule_idx.0));
            for key in ["axp", "waxp"] {
                if let Some(e) = doc.get(key) {
                    out.push_str(&format!(
                        "{}: features {} (outcome {})\n",
                        key.to_uppercase(),
                        e["features"],
                        e["outcome"]
                    ));
                }
                if let Some(r) = doc.get(format!("{}_refusal", key).as_str()) {
                    out.push_str(&format!("{} refused: {}\n", key.to_uppercase(), r));
                }
            }
            args.common.write_output(&out)?;
        }
        _ => args.common.write_output(&format!("{}\n", doc))?,
    }
    Ok(ExitCode::from(0))
}

fn cmd_simplify(args: SimplifyArgs) -> Result<ExitCode> {
    let model = args.common.parse_input()?;
    let config = args.common.audit_config();
    let bk = build_background(&model, config.bk_mode)?;
    let mut planner = config.planner();
    let pre = ruleaudit_core::analysis::preprocess(&model.ds, &bk, &config.checker, &mut planner);
    let simplified =
        ruleaudit_core::analysis::simplify(&pre.ds, &bk, &config.checker, &mut planner);
    let out_model = ParsedModel {
        ds: simplified.ds.clone(),
        user_clauses: model.user_clauses.clone(),
        task: model.task,
    };
    args.common.write_output(&ingest::serialize_rules(&out_model))?;

    let mut log = String::new();
    for f in &simplified.findings {
        let record = serde_json::json!({
            "kind": f.kind,
            "rule": f.rule.0,
            "position": f.position,
            "literal": f.literal.as_ref().map(|l| l.display(&model.ds.features).to_string()),
        });
        log.push_str(&format!("{}\n", record));
    }
    if !simplified.complete {
        log.push_str("{\"warning\":\"budget exhausted; simplification is partial\"}\n");
    }
    let log_path = args.log.clone().or_else(|| {
        args.common.out.as_ref().map(|p| {
            let mut q = p.clone().into_os_string();
            q.push(".log.jsonl");
            PathBuf::from(q)
        })
    });
    match log_path {
        Some(path) => std::fs::write(&path, log)
            .with_context(|| format!("failed to write {}", path.display()))?,
        None => eprint!("{}", log),
    }
    Ok(ExitCode::from(if simplified.complete { 0 } else { 3 }))
}

fn cmd_export_cnf(args: ExportArgs) -> Result<ExitCode> {
    let model = args.common.parse_input()?;
    let config = args.common.audit_config();
    let bk = build_background(&model, config.bk_mode)?;
    let mut buf: Vec<u8> = Vec::new();
    write_dimacs(&bk.to_formula(), &bk.dimacs_legend(&model.ds.features), &mut buf)?;
    args.common.write_output(std::str::from_utf8(&buf).expect("dimacs is ascii"))?;
    Ok(ExitCode::from(0))
}

fn cmd_aggregate(args: AggregateArgs) -> Result<ExitCode> {
    let mut paths: Vec<PathBuf> = Vec::new();
    if args.input.is_dir() {
        for entry in std::fs::read_dir(&args.input)
            .with_context(|| format!("failed to read {}", args.input.display()))?
        {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "jsonl" || e == "json") {
                paths.push(path);
            }
        }
        paths.sort();
    } else {
        paths.push(args.input.clone());
    }
    let mut lines: Vec<serde_json::Value> = Vec::new();
    for path in &paths {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("failed to read {}", path.display()))?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            lines.push(
                serde_json::from_str(line)
                    .with_context(|| format!("bad report line in {}", path.display()))?,
            );
        }
    }
    let rows = ruleaudit_core::report::aggregate(&lines);
    let mut out = String::new();
    match args.format {
        FormatOpt::Csv | FormatOpt::Jsonl => {
            out.push_str(AGGREGATE_CSV_HEADER);
            out.push('\n');
            for row in &rows {
                out.push_str(&row.to_csv_row());
                out.push('\n');
            }
        }
        FormatOpt::Human => {
            for row in &rows {
                out.push_str(&row.to_human());
                out.push('\n');
            }
        }
    }
    match &args.out {
        Some(path) => std::fs::write(path, out)
            .with_context(|| format!("failed to write {}", path.display()))?,
        None => {
            std::io::stdout().write_all(out.as_bytes())?;
        }
    }
    Ok(ExitCode::from(0))
}
