//! Command-line front end for the Paxos model checker.
//!
//! Exit statuses: 0 safe / success, 1 usage or configuration error,
//! 2 unsafe (violation found), 3 inconclusive (a bound truncated the
//! search), 4 encoding disagreement in `compare`.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use paxos_mc_core::explore::{build_lts, Lts, Model, TraceStep};
use paxos_mc_core::graph::dot::to_dot;
use paxos_mc_core::graph::GraphState;
use paxos_mc_core::{
    compare_encodings, explore, majority_bound, ExplorationConfig, ExplorationReport, GraphModel,
    ProtocolConfig, ReportVerdict, Strategy, VectorModel,
};

const EXIT_SAFE: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_UNSAFE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_DISAGREEMENT: u8 = 4;

/// Environment variable read for the default worker count.
const WORKERS_ENV: &str = "PAXOS_MC_WORKERS";

#[derive(Parser)]
#[command(
    name = "paxos-mc",
    version,
    about = "Explicit-state model checker for single-decree Paxos",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explore one instance and report Safe / Unsafe with a trace.
    Check(CheckArgs),
    /// Explore under both encodings and report the state-count ratio.
    Compare(CompareArgs),
    /// Export the state space (or a single state) as DOT.
    ExportDot(ExportDotArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Number of proposer processes.
    #[arg(long)]
    proposers: u32,
    /// Number of acceptor processes.
    #[arg(long)]
    acceptors: u32,
    /// Quorum size; defaults to the smallest theoretically safe majority.
    #[arg(long)]
    maj: Option<u32>,
}

impl InstanceArgs {
    fn config(&self) -> Result<ProtocolConfig, String> {
        let maj = self.maj.unwrap_or_else(|| majority_bound(self.acceptors));
        ProtocolConfig::new(self.proposers, self.acceptors, maj).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct BoundArgs {
    /// Stop after storing this many states.
    #[arg(long)]
    max_states: Option<usize>,
    /// Stop expanding beyond this depth.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Worker threads for BFS expansion; defaults to $PAXOS_MC_WORKERS or 1.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Encoding {
    Graph,
    Vector,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Bfs,
    Dfs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// State encoding to explore.
    #[arg(long, value_enum, default_value_t = Encoding::Graph)]
    encoding: Encoding,
    /// Exploration strategy: full bfs or dfs halting on the first violation.
    #[arg(long, value_enum, default_value_t = StrategyArg::Bfs)]
    strategy: StrategyArg,
    /// Re-check model invariants on every state and transition.
    #[arg(long)]
    audit: bool,
    #[command(flatten)]
    bounds: BoundArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    bounds: BoundArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ExportDotArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Only the graph encoding can be exported.
    #[arg(long, value_enum, default_value_t = Encoding::Graph)]
    encoding: Encoding,
    /// Export this single state (BFS discovery index) instead of the LTS.
    #[arg(long, conflicts_with = "initial")]
    state: Option<usize>,
    /// Export the initial configuration graph, before value initialization.
    #[arg(long)]
    initial: bool,
    /// Stop after storing this many states.
    #[arg(long)]
    max_states: Option<usize>,
    /// Write the DOT output here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_SAFE,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Check(args) => run_check(args),
        Command::Compare(args) => run_compare(args),
        Command::ExportDot(args) => run_export_dot(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn exploration_config(strategy: Strategy, audit: bool, bounds: &BoundArgs) -> ExplorationConfig {
    let workers = bounds.workers.unwrap_or_else(default_workers);
    ExplorationConfig {
        strategy,
        max_states: bounds.max_states,
        max_depth: bounds.max_depth,
        audit,
        workers,
    }
}

fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    }
}

fn verdict_exit(verdict: ReportVerdict) -> u8 {
    match verdict {
        ReportVerdict::Safe => EXIT_SAFE,
        ReportVerdict::Unsafe => EXIT_UNSAFE,
        ReportVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn run_check(args: CheckArgs) -> Result<u8, String> {
    let cfg = args.instance.config()?;
    let strategy = match args.strategy {
        StrategyArg::Bfs => Strategy::FullBfs,
        StrategyArg::Dfs => Strategy::DfsHaltOnViolation,
    };
    let ecfg = exploration_config(strategy, args.audit, &args.bounds);
    let report = match args.encoding {
        Encoding::Graph => explore(&GraphModel::new(cfg), &ecfg),
        Encoding::Vector => explore(&VectorModel::new(cfg), &ecfg),
    }
    .map_err(|e| e.to_string())?;
    let rendered = match args.output.format {
        Format::Json => report.to_json(),
        Format::Text => render_report_text(&cfg, &report),
    };
    emit(&args.output.output, &rendered)?;
    Ok(verdict_exit(report.verdict))
}

fn render_report_text(cfg: &ProtocolConfig, report: &ExplorationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "instance: {} proposers, {} acceptors, maj {}",
        cfg.num_proposers, cfg.num_acceptors, cfg.maj
    );
    let _ = writeln!(out, "verdict: {:?}", report.verdict);
    if let Some(v) = &report.violation {
        let _ = writeln!(out, "violation: {v}");
    }
    let _ = writeln!(
        out,
        "states: {}  transitions: {}  max depth: {}",
        report.states_stored, report.transitions, report.max_depth_reached
    );
    if let Some(trace) = &report.trace {
        let _ = writeln!(out, "counterexample ({} steps):", trace.len() - 1);
        render_trace(&mut out, trace);
    }
    out
}

/// Numbered transition labels; each step shows the state change as a
/// line diff of the two dumps rather than the full dumps.
fn render_trace(out: &mut String, trace: &[TraceStep]) {
    for (i, pair) in trace.windows(2).enumerate() {
        let _ = writeln!(out, "  {:2}. {}", i + 1, pair[1].label);
        for line in line_diff(&pair[0].state, &pair[1].state) {
            let _ = writeln!(out, "      {line}");
        }
    }
}

/// Multiset difference of lines: `-` for removed, `+` for added.
fn line_diff(before: &str, after: &str) -> Vec<String> {
    let old: Vec<&str> = before.lines().collect();
    let mut removed = old.clone();
    let mut diff = Vec::new();
    for line in after.lines() {
        match removed.iter().position(|&l| l == line) {
            Some(idx) => {
                removed.remove(idx);
            }
            None => diff.push(format!("+ {line}")),
        }
    }
    for line in removed {
        if old.contains(&line) {
            diff.push(format!("- {line}"));
        }
    }
    diff
}

fn run_compare(args: CompareArgs) -> Result<u8, String> {
    let cfg = args.instance.config()?;
    let ecfg = exploration_config(Strategy::FullBfs, false, &args.bounds);
    let cmp = match compare_encodings(&cfg, &ecfg) {
        Ok(cmp) => cmp,
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(EXIT_DISAGREEMENT);
        }
    };
    let rendered = match args.output.format {
        Format::Json => cmp.to_json(),
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "instance: {} proposers, {} acceptors, maj {}",
                cfg.num_proposers, cfg.num_acceptors, cfg.maj
            );
            let _ = writeln!(out, "encoding  verdict       states  transitions");
            for (name, r) in [("graph", &cmp.graph), ("vector", &cmp.vector)] {
                let _ = writeln!(
                    out,
                    "{name:<9} {:<12} {:>7}  {:>11}",
                    format!("{:?}", r.verdict),
                    r.states_stored,
                    r.transitions
                );
            }
            let _ = writeln!(out, "state ratio (vector/graph): {:.2}", cmp.state_ratio);
            out
        }
    };
    emit(&args.output.output, &rendered)?;
    if cmp.inconclusive() {
        return Ok(EXIT_INCONCLUSIVE);
    }
    Ok(EXIT_SAFE)
}

fn run_export_dot(args: ExportDotArgs) -> Result<u8, String> {
    if args.encoding == Encoding::Vector {
        return Err("DOT export supports only --encoding graph".into());
    }
    let cfg = args.instance.config()?;
    if args.initial {
        let dot = to_dot(&GraphState::initial(&cfg));
        emit(&args.output, &dot)?;
        return Ok(EXIT_SAFE);
    }
    let model = GraphModel::new(cfg);
    let lts = build_lts(&model, args.max_states).map_err(|e| e.to_string())?;
    match args.state {
        Some(idx) => {
            let state = lts.states.get(idx).ok_or_else(|| {
                format!("state index {idx} out of range (0..{})", lts.states.len())
            })?;
            emit(&args.output, &model.dump(state))?;
        }
        None => emit(&args.output, &lts_dot(&lts))?,
    }
    Ok(EXIT_SAFE)
}

/// The explored LTS as DOT: one node per canonical state, labeled by a
/// short hash of its certificate; edges carry the rule labels.
fn lts_dot(lts: &Lts<GraphState>) -> String {
    let mut out = String::from("digraph lts {\n");
    for (idx, key) in lts.keys.iter().enumerate() {
        let mut h = DefaultHasher::new();
        key.hash(&mut h);
        let _ = writeln!(out, "  s{idx} [label=\"{idx}:{:016x}\"];", h.finish());
    }
    for (src, label, dst) in &lts.edges {
        let _ = writeln!(out, "  s{src} -> s{dst} [label=\"{label}\"];");
    }
    out.push_str("}\n");
    out
}
