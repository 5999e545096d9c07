//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 on validation errors (arguments,
//! configuration, output directory), 2 on runtime failures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};
use exprtune::config::{parse_instance_set, TunerConfigFile};
use exprtune::io::{prepare_out_dir, resolve_out_dir, write_atomic};
use exprtune::oracle;
use exprtune::reports::{
    evaluation_csv, EliteReportDoc, EvaluationDoc, MergedSummaryDoc,
};
use exprtune::runner::{evaluate_expressions_parallel, train_protocol_parallel, worker_pool};
use exprtune_core::expr::{Dialect, Expr};
use exprtune_core::harness::ElitePool;
use exprtune_core::problems::{ProblemInstance, ProblemKind};
use exprtune_core::solvers::SolverKind;

#[derive(Parser)]
#[command(
    name = "exprtune",
    about = "Tunes algorithm parameters as expressions of instance features",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the training protocol and write an elite report.
    Tune(TuneArgs),
    /// Evaluate an expression family on an instance set.
    Eval(EvalArgs),
    /// Merge previously written reports into one summary document.
    Report(ReportArgs),
    /// Run a solver runtime oracle and compare against its known value.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct TuneArgs {
    /// Tuner configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Configuration overrides, e.g. --set generations=50.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Number of tuning runs to merge.
    #[arg(long, default_value_t = 10)]
    tuner_runs: usize,
    /// Frequency pool: the top 5 per run or whole final populations.
    #[arg(long, default_value = "top5")]
    pool: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Expression to evaluate (repeatable).
    #[arg(long = "expr", value_name = "EXPR", required = true)]
    exprs: Vec<String>,
    /// Problem name: onemax, binvalue, leadingones or jump.
    #[arg(long)]
    problem: String,
    /// Target algorithm: ea or rls.
    #[arg(long, default_value = "ea")]
    solver: String,
    /// Budget formula (budget dialect), e.g. "0.8*n^2".
    #[arg(long)]
    budget: String,
    /// Comma-separated instance sizes, e.g. 750,1000.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Instance-set file (JSON), alternative to --sizes.
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Runs per (expression, instance) cell.
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Report files or directories to merge.
    #[arg(long = "inputs", value_name = "PATH", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Which check to run; see --list.
    #[arg(long)]
    check: Option<String>,
    /// List the available checks.
    #[arg(long)]
    list: bool,
    /// Instance size override.
    #[arg(long)]
    n: Option<usize>,
    /// Run count override.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory (default: $EXPRTUNE_OUT or ./exprtune-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism). Results are
    /// identical at any worker count.
    #[arg(long)]
    workers: Option<usize>,
}

/// Failures classified by exit code.
enum CliError {
    /// Bad arguments, configuration, or output location: exit 1.
    Validation(anyhow::Error),
    /// The run itself failed (or an oracle check did not pass): exit 2.
    Runtime(anyhow::Error),
}

type CliResult = Result<(), CliError>;

fn validation<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Validation(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Tune(args) => cmd_tune(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Report(args) => cmd_report(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Resolves and prepares the output directory (validation failures).
fn out_dir(common: &CommonArgs) -> Result<PathBuf, CliError> {
    let dir = resolve_out_dir(common.out.as_deref());
    prepare_out_dir(&dir).map_err(validation)?;
    Ok(dir)
}

fn cmd_tune(args: TuneArgs) -> CliResult {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read configuration {}", args.config.display()))
        .map_err(validation)?;
    let mut file = TunerConfigFile::from_json(&text, &args.set).map_err(validation)?;
    if let Some(seed) = args.seed {
        file.seed = seed;
    }
    let elite_pool = ElitePool::from_name(&args.pool)
        .ok_or_else(|| validation(anyhow!("--pool must be top5 or full")))?;
    if args.tuner_runs == 0 {
        return Err(validation(anyhow!("--tuner-runs must be at least 1")));
    }
    let config = file.to_engine().map_err(validation)?;
    let dir = out_dir(&args.common)?;
    let pool = worker_pool(args.common.workers).map_err(validation)?;

    let report = train_protocol_parallel(&pool, &config, args.tuner_runs, elite_pool)
        .map_err(runtime)?;
    let doc = EliteReportDoc::new(&file, &report);
    let path = dir.join("elite_report.json");
    let json = serde_json::to_string_pretty(&doc).map_err(runtime)?;
    write_atomic(&path, json.as_bytes()).map_err(runtime)?;

    println!(
        "tuned {} / {} with budget {} ({} runs, pool {})",
        file.problem, file.solver, file.budget, report.tuner_runs, report.pool.name()
    );
    for entry in report.top(3) {
        println!(
            "  {}  frequency {}/{}  mean score {:.4}",
            entry.expression,
            entry.frequency,
            report.pool_size,
            entry.mean_score()
        );
    }
    println!("report written to {}", path.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult {
    let solver = SolverKind::from_name(&args.solver)
        .ok_or_else(|| validation(anyhow!("unknown solver `{}` (expected ea or rls)", args.solver)))?;
    let problem = ProblemKind::from_name(&args.problem)
        .ok_or_else(|| validation(anyhow!("unknown problem `{}`", args.problem)))?;
    let budget = Expr::parse(&args.budget, Dialect::Budget)
        .map_err(|e| validation(anyhow!("budget expression: {e}")))?;
    let expressions: Vec<Expr> = args
        .exprs
        .iter()
        .map(|text| {
            Expr::parse(text, Dialect::Gp)
                .map_err(|e| validation(anyhow!("expression `{text}`: {e}")))
        })
        .collect::<Result<_, _>>()?;

    let instances: Vec<ProblemInstance> = match (&args.instances, args.sizes.is_empty()) {
        (Some(path), true) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read instance set {}", path.display()))
                .map_err(validation)?;
            parse_instance_set(&text).map_err(validation)?
        }
        (None, false) => {
            if problem == ProblemKind::Jump {
                return Err(validation(anyhow!(
                    "jump instances need both m and n; use --instances with a JSON instance set"
                )));
            }
            args.sizes
                .iter()
                .map(|&n| ProblemInstance::new(problem, n).map_err(|e| validation(anyhow!("{e}"))))
                .collect::<Result<_, _>>()?
        }
        (None, true) => {
            return Err(validation(anyhow!("provide --sizes or --instances")));
        }
        (Some(_), false) => {
            return Err(validation(anyhow!("--sizes and --instances are mutually exclusive")));
        }
    };
    for inst in &instances {
        if inst.kind() != problem {
            return Err(validation(anyhow!(
                "instance {inst} does not belong to problem {problem}"
            )));
        }
    }
    if args.runs == 0 {
        return Err(validation(anyhow!("--runs must be at least 1")));
    }

    let dir = out_dir(&args.common)?;
    let pool = worker_pool(args.common.workers).map_err(validation)?;
    let table = evaluate_expressions_parallel(
        &pool,
        solver,
        &expressions,
        &instances,
        &budget,
        args.runs,
        args.seed,
    )
    .map_err(runtime)?;

    let doc = EvaluationDoc::new(&table, &instances);
    let csv = evaluation_csv(&table, &doc.config);
    let csv_path = dir.join("evaluation.csv");
    write_atomic(&csv_path, csv.as_bytes()).map_err(runtime)?;
    let json_path = dir.join("evaluation_summary.json");
    let json = serde_json::to_string_pretty(&doc).map_err(runtime)?;
    write_atomic(&json_path, json.as_bytes()).map_err(runtime)?;

    println!(
        "evaluated {} expressions on {} instances, {} runs each (budget {})",
        expressions.len(),
        instances.len(),
        args.runs,
        args.budget
    );
    for row in &doc.rows {
        println!(
            "  {} on {}: median {:.4}",
            row.expression,
            exprtune::reports::features_token_of(&row.instance),
            row.normalized_fitness.median
        );
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn collect_json_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut in_dir: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("cannot list {}", input.display()))
                .map_err(validation)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                .collect();
            in_dir.sort();
            files.extend(in_dir);
        } else if input.is_file() {
            files.push(input.clone());
        } else {
            return Err(validation(anyhow!("input {} does not exist", input.display())));
        }
    }
    if files.is_empty() {
        return Err(validation(anyhow!("no report files found in the given inputs")));
    }
    Ok(files)
}

fn cmd_report(args: ReportArgs) -> CliResult {
    let files = collect_json_files(&args.inputs)?;
    let mut merged = MergedSummaryDoc::default();
    for path in &files {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(validation)?;
        let key = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        if let Ok(doc) = serde_json::from_str::<EliteReportDoc>(&text) {
            merged.elites.insert(key, doc);
        } else if let Ok(doc) = serde_json::from_str::<EvaluationDoc>(&text) {
            merged.evaluations.insert(key, doc);
        } else {
            return Err(validation(anyhow!(
                "{} is neither an elite report nor an evaluation summary",
                path.display()
            )));
        }
    }
    let dir = out_dir(&args.common)?;
    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&merged).map_err(runtime)?;
    write_atomic(&path, json.as_bytes()).map_err(runtime)?;
    println!(
        "merged {} elite reports and {} evaluation summaries into {}",
        merged.elites.len(),
        merged.evaluations.len(),
        path.display()
    );
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> CliResult {
    if args.list {
        for name in oracle::CHECK_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let check = args
        .check
        .ok_or_else(|| validation(anyhow!("provide --check NAME or --list")))?;
    let outcome = oracle::run_check(&check, args.n, args.runs, args.seed).map_err(validation)?;
    println!("{}", outcome.detail);
    if outcome.tolerance > 0.0 {
        println!(
            "oracle {}: measured {:.2}, expected {:.2} +- {:.2} -> {}",
            outcome.name,
            outcome.measured,
            outcome.expected,
            outcome.tolerance,
            if outcome.pass { "PASS" } else { "FAIL" }
        );
    } else {
        println!(
            "oracle {}: measured {:.4}, required {:.4} -> {}",
            outcome.name,
            outcome.measured,
            outcome.expected,
            if outcome.pass { "PASS" } else { "FAIL" }
        );
    }
    if outcome.pass {
        Ok(())
    } else {
        Err(runtime(anyhow!("oracle check {} failed", outcome.name)))
    }
}
