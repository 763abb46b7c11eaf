//! `clothgrasp`: command-line front end for the cloth-grasp library.
//!
//! Exit status: 0 success, 1 diagnostics with errors (or a failed query),
//! 2 usage error, 3 internal error.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use cloth_grasp::corpus::{validate_corpus, validate_task, Corpus, Diagnostic, GripperProfile};
use cloth_grasp::planner::{
    feasibility_matrix, find_plan_bounded, task_feasible, CostWeights, EnvContext, FeasibilityEntry, DEFAULT_BUDGET,
};
use cloth_grasp::stats::{
    coverage_report_with, enumerate_grasps_with, grasp_instance_tally, paper_totals, primitive_row_tally,
    primitive_tally, task_distribution, EnumerationBounds, TallyReport, DEFAULT_ENUMERATION_CAP,
};
use cloth_grasp::{
    classify_transition, explain_transition, opposition_couples, parse_grasp_with_hands, print_grasp, vf_count,
    Execution, GraspState, HandAssignment, TransitionFlags,
};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "clothgrasp",
    version,
    about = "Grasp notation, primitive classification, corpus checks and regrasp planning for cloth manipulation"
)]
struct Cli {
    /// Directory holding the five corpus documents; the embedded reference
    /// corpus is used when neither this nor GRASP_CORPUS_DIR is set.
    #[arg(long, global = true, env = "GRASP_CORPUS_DIR", value_name = "DIR")]
    corpus: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Run batch work on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Report {
    Grasps,
    Primitives,
    Tasks,
    Coverage,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a grasp expression and show its structure.
    Parse {
        grasp: String,
        #[arg(long, default_value_t = 2)]
        hands: u8,
    },
    /// Print the canonical form of a grasp expression.
    Print {
        grasp: String,
        #[arg(long, default_value_t = 2)]
        hands: u8,
    },
    /// Classify the transition between two grasps.
    Classify {
        #[arg(long)]
        pre: String,
        #[arg(long)]
        post: String,
        /// The cloth slides through an unchanged grasp.
        #[arg(long)]
        sliding: bool,
        /// The cloth state changes (folding, flattening, ...).
        #[arg(long)]
        cloth_changed: bool,
        /// The contact moves to another point of the cloth.
        #[arg(long)]
        point_changed: bool,
        /// Also print the rule trace.
        #[arg(long)]
        explain: bool,
    },
    /// Validate the corpus, or a single task script.
    Validate {
        #[arg(long)]
        task: Option<String>,
    },
    /// Find a minimum-cost primitive sequence between two grasps.
    Plan {
        #[arg(long)]
        start: String,
        #[arg(long)]
        goal: String,
        /// Grippers per hand, e.g. `H1=b,H2=u`, or one id for every hand.
        #[arg(long, value_name = "SPEC")]
        gripper: String,
        /// Environment items: table, hook, edge, hanger.
        #[arg(long, value_delimiter = ',', default_value = "table")]
        env: Vec<String>,
        /// Cost per primitive type, e.g. `Ex=1,RG=2`; unlisted types cost 1.
        #[arg(long, default_value = "")]
        weights: String,
        #[arg(long, default_value_t = 2)]
        hands: u8,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Reproduce corpus tallies or the coverage of the grasp space.
    Stats {
        #[arg(long, value_enum)]
        report: Report,
        /// Bounds for the coverage report.
        #[arg(long, default_value_t = 3)]
        max_vfs: usize,
        #[arg(long, default_value_t = 3)]
        max_units: usize,
        #[arg(long, default_value_t = 2)]
        hands: u8,
    },
    /// List every canonical grasp within bounds.
    Enumerate {
        #[arg(long, default_value_t = 3)]
        max_vfs: usize,
        #[arg(long, default_value_t = 3)]
        max_units: usize,
        #[arg(long, default_value_t = 2)]
        hands: u8,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Which grippers (the same on every hand) can realize which tasks.
    Feasible {
        #[arg(long, value_delimiter = ',', default_value = "table")]
        env: Vec<String>,
        #[arg(long)]
        task: Option<String>,
        #[arg(long)]
        gripper: Option<String>,
        #[arg(long, default_value_t = 2)]
        hands: u8,
    },
}

enum Failure {
    /// Errors about the input data; exit 1.
    Diagnostics(String),
    /// Bad arguments; exit 2.
    Usage(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(e.into())
    }
}

type Outcome = Result<bool, Failure>;

#[derive(Debug, Serialize, Deserialize)]
struct UnitReport {
    unit: String,
    assignment: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParseReport {
    canonical: GraspState,
    hands_used: usize,
    unit_count: usize,
    vf_count: usize,
    opposition_couples: usize,
    single_extrinsic: bool,
    involves_tool: bool,
    units: Vec<UnitReport>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ValidationReport {
    errors: usize,
    warnings: usize,
    diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PrimitiveStats {
    by_type: TallyReport,
    by_row: TallyReport,
}

#[derive(Debug, Serialize, Deserialize)]
struct TaskStats {
    by_task: TallyReport,
    by_paper: TallyReport,
}

struct Ctx {
    corpus_dir: Option<PathBuf>,
    format: Format,
    exec: Execution,
    out: io::StdoutLock<'static>,
}

impl Ctx {
    fn corpus(&self) -> Result<Corpus, Failure> {
        match &self.corpus_dir {
            Some(dir) => Corpus::load_dir(dir).map_err(|e| Failure::Diagnostics(format!("error: {e}"))),
            None => Ok(Corpus::reference()),
        }
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).context("serializing output")?;
        writeln!(self.out, "{text}")?;
        Ok(())
    }

    fn text(&mut self, text: &str) -> Result<(), Failure> {
        if text.ends_with('\n') {
            write!(self.out, "{text}")?;
        } else {
            writeln!(self.out, "{text}")?;
        }
        Ok(())
    }
}

fn grasp(text: &str, hands: u8) -> Result<GraspState, Failure> {
    parse_grasp_with_hands(text, hands).map_err(|e| Failure::Diagnostics(format!("error: grasp \"{text}\": {e}")))
}

fn assignment(a: HandAssignment) -> String {
    match a {
        HandAssignment::Hand(h) => h.to_string(),
        HandAssignment::Shared(h) => format!("{h} (sh)"),
        HandAssignment::Bimanual => "bm".into(),
        HandAssignment::Environment => "environment".into(),
    }
}

fn cmd_parse(ctx: &mut Ctx, text: &str, hands: u8) -> Outcome {
    let s = grasp(text, hands)?;
    let report = ParseReport {
        canonical: s.clone(),
        hands_used: s.hands_used(),
        unit_count: s.unit_count(),
        vf_count: vf_count(&s),
        opposition_couples: opposition_couples(&s),
        single_extrinsic: s.is_single_extrinsic(),
        involves_tool: s.involves_tool(),
        units: s
            .units()
            .into_iter()
            .map(|a| UnitReport { unit: a.unit.to_string(), assignment: assignment(a.assignment) })
            .collect(),
    };
    if ctx.format == Format::Json {
        ctx.json(&report)?;
        return Ok(true);
    }
    let mut out = format!("{}\n", print_grasp(&s));
    for u in &report.units {
        out.push_str(&format!("  unit {:<6} {}\n", u.unit, u.assignment));
    }
    out.push_str(&format!(
        "  hands used {}, units {}, virtual fingers {}, opposition couples {}\n",
        report.hands_used, report.unit_count, report.vf_count, report.opposition_couples
    ));
    ctx.text(&out)?;
    Ok(true)
}

fn cmd_print(ctx: &mut Ctx, text: &str, hands: u8) -> Outcome {
    let s = grasp(text, hands)?;
    if ctx.format == Format::Json {
        ctx.json(&s)?;
    } else {
        ctx.text(&print_grasp(&s))?;
    }
    Ok(true)
}

fn cmd_classify(ctx: &mut Ctx, pre: &str, post: &str, flags: TransitionFlags, explain: bool) -> Outcome {
    let (pre, post) = (grasp(pre, 2)?, grasp(post, 2)?);
    let result = classify_transition(&pre, &post, flags).map_err(|e| Failure::Diagnostics(format!("error: {e}")))?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if ctx.format == Format::Json {
        ctx.json(&result)?;
    } else if explain {
        let trace = explain_transition(&pre, &post, flags).map_err(|e| Failure::Diagnostics(format!("error: {e}")))?;
        ctx.text(&format!("{}\n{trace}", result.primitive))?;
    } else {
        ctx.text(result.primitive.as_str())?;
    }
    Ok(true)
}

fn cmd_validate(ctx: &mut Ctx, task: Option<&str>) -> Outcome {
    let corpus = ctx.corpus()?;
    let diagnostics = match task {
        Some(id) => {
            let t = corpus.task(id).ok_or_else(|| Failure::Usage(format!("unknown task \"{id}\"")))?;
            validate_task(t)
        }
        None => validate_corpus(&corpus),
    };
    let errors = diagnostics.iter().filter(|d| d.is_error()).count();
    let report = ValidationReport { errors, warnings: diagnostics.len() - errors, diagnostics };
    if ctx.format == Format::Json {
        ctx.json(&report)?;
    } else {
        let mut out: String = report.diagnostics.iter().map(|d| format!("{d}\n")).collect();
        out.push_str(&format!("{} errors, {} warnings\n", report.errors, report.warnings));
        ctx.text(&out)?;
    }
    Ok(errors == 0)
}

fn profiles_for(corpus: &Corpus, spec: &str, hands: u8) -> Result<Vec<GripperProfile>, Failure> {
    let lookup =
        |id: &str| corpus.gripper(id).cloned().ok_or_else(|| Failure::Usage(format!("unknown gripper \"{id}\"")));
    let spec = spec.trim();
    if !spec.contains('=') {
        let g = lookup(spec)?;
        return Ok(vec![g; hands as usize]);
    }
    let mut slots: Vec<Option<GripperProfile>> = vec![None; hands as usize];
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (hand, id) =
            part.split_once('=').ok_or_else(|| Failure::Usage(format!("\"{part}\" is not of the form H1=<id>")))?;
        let n: usize = hand
            .trim()
            .strip_prefix('H')
            .and_then(|n| n.parse().ok())
            .filter(|&n| n >= 1 && n <= hands as usize)
            .ok_or_else(|| Failure::Usage(format!("\"{hand}\" is not a hand (H1..H{hands})")))?;
        slots[n - 1] = Some(lookup(id.trim())?);
    }
    Ok(slots
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.unwrap_or_else(|| GripperProfile {
                id: format!("none-H{}", i + 1),
                name: "no gripper".into(),
                source_refs: vec![],
                capabilities: vec![],
                notes: None,
            })
        })
        .collect())
}

fn env_for(names: &[String], hands: u8) -> Result<EnvContext, Failure> {
    if hands == 0 {
        return Err(Failure::Usage("--hands must be at least 1".into()));
    }
    EnvContext::from_names(names.iter().map(String::as_str), hands).map_err(Failure::Usage)
}

#[allow(clippy::too_many_arguments)]
fn cmd_plan(
    ctx: &mut Ctx,
    start: &str,
    goal: &str,
    gripper: &str,
    env: &[String],
    weights: &str,
    hands: u8,
    budget: usize,
) -> Outcome {
    let weights: CostWeights = weights.parse().map_err(|e: cloth_grasp::PlanError| Failure::Usage(e.to_string()))?;
    let env = env_for(env, hands)?;
    let (start, goal) = (grasp(start, hands)?, grasp(goal, hands)?);
    let corpus = ctx.corpus()?;
    let profiles = profiles_for(&corpus, gripper, hands)?;
    let plan = find_plan_bounded(&start, &goal, &profiles, &env, &weights, budget)
        .map_err(|e| Failure::Diagnostics(format!("error: {e}")))?;
    if ctx.format == Format::Json {
        ctx.json(&plan)?;
    } else {
        ctx.text(&plan.to_text())?;
    }
    Ok(true)
}

fn cmd_stats(ctx: &mut Ctx, report: Report, bounds: EnumerationBounds) -> Outcome {
    let corpus = ctx.corpus()?;
    let json = ctx.format == Format::Json;
    match report {
        Report::Grasps => {
            let t = grasp_instance_tally(&corpus);
            if json {
                ctx.json(&t)?;
            } else {
                ctx.text(&t.to_string())?;
            }
        }
        Report::Primitives => {
            let s = PrimitiveStats { by_type: primitive_tally(&corpus), by_row: primitive_row_tally(&corpus) };
            if json {
                ctx.json(&s)?;
            } else {
                ctx.text(&format!("{}\n{}\n{}", s.by_row, s.by_type, s.by_type.summary_line()))?;
            }
        }
        Report::Tasks => {
            let s = TaskStats { by_task: task_distribution(&corpus), by_paper: paper_totals(&corpus) };
            if json {
                ctx.json(&s)?;
            } else {
                ctx.text(&format!("{}\n{}", s.by_task, s.by_paper))?;
            }
        }
        Report::Coverage => {
            let r = coverage_report_with(&corpus, bounds, DEFAULT_ENUMERATION_CAP, ctx.exec)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            if json {
                ctx.json(&r)?;
            } else {
                ctx.text(&r.to_string())?;
            }
        }
    }
    Ok(true)
}

fn cmd_enumerate(ctx: &mut Ctx, bounds: EnumerationBounds, cap: usize) -> Outcome {
    let all = enumerate_grasps_with(bounds, cap, ctx.exec).map_err(|e| match e {
        cloth_grasp::EnumerationError::InvalidBounds(_) => Failure::Usage(e.to_string()),
        cloth_grasp::EnumerationError::BoundExceeded { .. } => Failure::Diagnostics(format!("error: {e}")),
    })?;
    if ctx.format == Format::Json {
        ctx.json(&all)?;
    } else {
        let out: String = all.iter().map(|s| format!("{s}\n")).collect();
        ctx.text(&out)?;
    }
    Ok(true)
}

fn cmd_feasible(ctx: &mut Ctx, env: &[String], task: Option<&str>, gripper: Option<&str>, hands: u8) -> Outcome {
    let env = env_for(env, hands)?;
    let corpus = ctx.corpus()?;
    if let Some(id) = task {
        corpus.task(id).ok_or_else(|| Failure::Usage(format!("unknown task \"{id}\"")))?;
    }
    let entries: Vec<FeasibilityEntry> = match gripper {
        Some(spec) => {
            let profiles = profiles_for(&corpus, spec, hands)?;
            corpus
                .tasks
                .iter()
                .map(|t| FeasibilityEntry {
                    gripper_id: spec.to_string(),
                    task_id: t.id.clone(),
                    result: task_feasible(t, &profiles, &env),
                })
                .collect()
        }
        None => feasibility_matrix(&corpus, &env, ctx.exec),
    };
    let entries: Vec<FeasibilityEntry> = entries.into_iter().filter(|e| task.is_none_or(|t| e.task_id == t)).collect();
    if ctx.format == Format::Json {
        ctx.json(&entries)?;
    } else {
        let mut out = String::new();
        for e in &entries {
            let verdict = if e.result.feasible { "feasible".to_string() } else { "infeasible".to_string() };
            out.push_str(&format!("gripper {} task {}: {verdict}", e.gripper_id, e.task_id));
            if let Some(r) = &e.result.reason {
                out.push_str(&format!(" ({r})"));
            }
            out.push('\n');
        }
        ctx.text(&out)?;
    }
    Ok(true)
}

fn run(cli: Cli) -> Outcome {
    let mut ctx = Ctx {
        corpus_dir: cli.corpus,
        format: cli.format,
        exec: if cli.sequential { Execution::Sequential } else { Execution::Parallel },
        out: io::stdout().lock(),
    };
    let ok = match cli.command {
        Command::Parse { grasp, hands } => cmd_parse(&mut ctx, &grasp, hands)?,
        Command::Print { grasp, hands } => cmd_print(&mut ctx, &grasp, hands)?,
        Command::Classify { pre, post, sliding, cloth_changed, point_changed, explain } => {
            let flags = TransitionFlags { sliding, cloth_changed, grasp_point_changed: point_changed };
            cmd_classify(&mut ctx, &pre, &post, flags, explain)?
        }
        Command::Validate { task } => cmd_validate(&mut ctx, task.as_deref())?,
        Command::Plan { start, goal, gripper, env, weights, hands, budget } => {
            cmd_plan(&mut ctx, &start, &goal, &gripper, &env, &weights, hands, budget)?
        }
        Command::Stats { report, max_vfs, max_units, hands } => {
            cmd_stats(&mut ctx, report, EnumerationBounds::new(max_vfs, max_units, hands))?
        }
        Command::Enumerate { max_vfs, max_units, hands, cap } => {
            cmd_enumerate(&mut ctx, EnumerationBounds::new(max_vfs, max_units, hands), cap)?
        }
        Command::Feasible { env, task, gripper, hands } => {
            cmd_feasible(&mut ctx, &env, task.as_deref(), gripper.as_deref(), hands)?
        }
    };
    ctx.out.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Diagnostics(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
            ExitCode::from(2)
        }
        Err(Failure::Internal(e))
            if e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(3)
        }
    }
}
