//! Command-line front end for Shapley-value attribution of database facts.
//!
//! Every ranking subcommand reads one instance — DNF lineage text, a Boolean
//! circuit in JSON, or a DIMACS CNF (optionally paired with an already
//! compiled `.nnf` circuit) — runs one of the library's methods, and writes
//! a CSV or JSON report. `bench` scores several methods against the exact
//! values over a whole corpus directory; `metrics` compares two saved
//! reports.
//!
//! Exit status: 0 on success, 1 on bad input or an internal failure, 2 when
//! a time or node budget tripped and no fallback was allowed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use shapfacts::bench::{hybrid_cnf, DEFAULT_HYBRID_TIMEOUT};
use shapfacts::circuit::BooleanCircuit;
use shapfacts::cnf::{tseytin, CnfFormula, VarId, VarMap};
use shapfacts::compile::compile;
use shapfacts::ddnnf::Ddnnf;
use shapfacts::inexact::{cnf_proxy, kernel_shap, monte_carlo, SampleBudget};
use shapfacts::limits::Limits;
use shapfacts::lineage::{
    brute_force_shapley_all, Assignment, Database, DnfLineage, FactId, FnGame, SetFunction,
    MAX_GAME_FACTS,
};
use shapfacts::metrics::RankingComparison;
use shapfacts::pqe::{prob_ddnnf, shapley_all_via_pqe, slices_via_vandermonde, ProbabilityMap};
use shapfacts::report::{rational_to_f64, Method, ReportEntry, ReportMeta, ShapleyReport};
use shapfacts::shapley::shapley_all;
use shapfacts::Error as LibError;

/// Overrides the rayon thread count when set.
const THREADS_ENV: &str = "SHAPFACTS_THREADS";
/// Overrides the default budget (milliseconds) of `hybrid` and `bench`.
const TIMEOUT_ENV: &str = "SHAPFACTS_TIMEOUT_MS";

#[derive(Parser)]
#[command(
    name = "shapfacts",
    version,
    about = "Shapley-value attribution for database facts from Boolean lineage"
)]
struct Cli {
    /// Print progress notes to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact values by knowledge compilation and stratified model counting.
    Exact(ExactArgs),
    /// Exact values via probability evaluation and interpolation; can also
    /// evaluate the query probability under a given probability map.
    Pqe(PqeArgs),
    /// Exact values by enumerating every coalition (small instances only).
    Brute(CommonArgs),
    /// Clause-structure scores read directly off the CNF encoding.
    Proxy(CommonArgs),
    /// Estimates from sampled permutations.
    Mc(SampleArgs),
    /// Estimates from a weighted least-squares fit over sampled coalitions.
    Kshap(SampleArgs),
    /// Exact values under a budget, clause-structure scores when it trips.
    Hybrid(HybridArgs),
    /// Compile an instance and emit the CNF/NNF intermediates.
    Compile(CompileArgs),
    /// Score several methods against the exact values over a corpus
    /// directory, one CSV row per instance and method.
    Bench(BenchArgs),
    /// Compare an estimated report against a reference report.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Instance file to read.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,

    /// Input format; inferred from the extension when omitted
    /// (.dnf, .json, .cnf/.dimacs).
    #[arg(long, value_enum, value_name = "FORMAT")]
    format: Option<InputFormat>,

    /// Compiled circuit accompanying a DIMACS file (implies
    /// `--format dimacs+nnf`).
    #[arg(long, value_name = "PATH")]
    nnf: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, value_enum, value_name = "FORMAT", default_value_t = ReportFormat::Csv)]
    report: ReportFormat,
}

#[derive(Args)]
struct LimitArgs {
    /// Wall-clock budget in seconds (fractions allowed); `inf` or `none`
    /// disables the deadline.
    #[arg(long, value_name = "SECONDS")]
    timeout: Option<String>,

    /// Abort compilation after this many circuit nodes.
    #[arg(long, value_name = "NODES")]
    node_budget: Option<u64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    /// Lineage text: a fact table followed by monomials.
    Dnf,
    /// Boolean circuit in JSON.
    Circuit,
    /// CNF in DIMACS text, fact labels in `c endo` comments.
    Dimacs,
    /// DIMACS plus an already-compiled circuit in NNF text.
    #[value(name = "dimacs+nnf")]
    DimacsNnf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct PqeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    limits: LimitArgs,

    /// Two-column `fact_id probability` file; evaluates the query
    /// probability under it instead of computing Shapley values.
    #[arg(long, value_name = "PATH")]
    probabilities: Option<PathBuf>,

    /// Also write the per-size slice counts as JSON to this file.
    #[arg(long, value_name = "PATH")]
    slices_out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// Samples drawn per fact.
    #[arg(long, value_name = "N", default_value_t = 100)]
    samples_per_fact: usize,

    /// RNG seed; identical seeds give identical reports.
    #[arg(long, value_name = "SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct HybridArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    limits: LimitArgs,

    /// Exit with status 2 when the budget trips instead of falling back to
    /// the clause-structure scores.
    #[arg(long)]
    no_fallback: bool,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    limits: LimitArgs,

    /// Write `encoding.cnf`, `compiled.nnf`, and `purged.nnf` into this
    /// directory (created if missing) and print a size summary.
    #[arg(long, value_name = "DIR")]
    emit_dir: Option<PathBuf>,

    /// Without --emit-dir: write the purged circuit here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory holding `.dnf` instances.
    #[arg(long, value_name = "DIR")]
    corpus: PathBuf,

    /// Comma-separated methods to score on every instance.
    #[arg(
        long,
        value_delimiter = ',',
        value_name = "LIST",
        default_values_t = vec![
            BenchMethod::Exact,
            BenchMethod::Proxy,
            BenchMethod::Mc,
            BenchMethod::Kshap,
        ]
    )]
    methods: Vec<BenchMethod>,

    /// Samples per fact for the sampling methods.
    #[arg(long, value_name = "N", default_value_t = 20)]
    samples_per_fact: usize,

    /// RNG seed for the sampling methods.
    #[arg(long, value_name = "SEED", default_value_t = 0)]
    seed: u64,

    /// Budget for the exact reference run on each instance; instances whose
    /// reference run trips it are skipped with a note on stderr.
    #[arg(long, value_name = "SECONDS")]
    timeout: Option<String>,

    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BenchMethod {
    Exact,
    Proxy,
    Mc,
    Kshap,
}

impl BenchMethod {
    fn tag(self) -> &'static str {
        match self {
            BenchMethod::Exact => "exact",
            BenchMethod::Proxy => "proxy",
            BenchMethod::Mc => "mc",
            BenchMethod::Kshap => "kshap",
        }
    }
}

impl std::fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Args)]
struct MetricsArgs {
    /// Reference report (JSON).
    #[arg(long, value_name = "PATH")]
    truth: PathBuf,

    /// Report to score against the reference (JSON).
    #[arg(long, value_name = "PATH")]
    estimate: PathBuf,

    /// Write the metric block here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// An error plus the process exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

type CliResult<T> = Result<T, Failure>;

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

/// A file that failed to load or parse: exit status 1, message prefixed with
/// the offending path (parse errors already carry the line number).
fn load_failure(path: &Path, err: impl std::fmt::Display) -> Failure {
    Failure {
        code: 1,
        message: format!("{}: {}", path.display(), err),
    }
}

/// A computation that started but did not finish: budget trips map to exit
/// status 2, everything else to 1.
fn run_failure(err: LibError) -> Failure {
    let code = match err {
        LibError::DeadlineExceeded | LibError::BudgetExhausted { .. } => 2,
        _ => 1,
    };
    Failure {
        code,
        message: err.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Err(message) = init_thread_pool() {
        eprintln!("error: {message}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn init_thread_pool() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    if threads == 0 {
        return Err(format!("{THREADS_ENV} must be a positive integer, got `0`"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("could not size the thread pool: {e}"))
}

fn run(cli: Cli) -> CliResult<()> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Exact(args) => cmd_exact(args, verbose),
        Command::Pqe(args) => cmd_pqe(args, verbose),
        Command::Brute(args) => cmd_brute(args),
        Command::Proxy(args) => cmd_proxy(args),
        Command::Mc(args) => cmd_sampled(args, Sampler::Permutations),
        Command::Kshap(args) => cmd_sampled(args, Sampler::Regression),
        Command::Hybrid(args) => cmd_hybrid(args, verbose),
        Command::Compile(args) => cmd_compile(args),
        Command::Bench(args) => cmd_bench(args, verbose),
        Command::Metrics(args) => cmd_metrics(args),
    }
}

/// One loaded instance, in whichever representation the input file used.
enum Instance {
    Lineage(DnfLineage),
    Circuit(BooleanCircuit),
    Cnf(CnfFormula),
    Compiled { cnf: CnfFormula, circuit: Ddnnf },
}

fn resolve_format(args: &InputArgs) -> CliResult<InputFormat> {
    if let Some(format) = args.format {
        if format == InputFormat::DimacsNnf && args.nnf.is_none() {
            return Err(Failure::input("--format dimacs+nnf needs --nnf <PATH>"));
        }
        if format != InputFormat::DimacsNnf && args.nnf.is_some() {
            return Err(Failure::input("--nnf only applies to --format dimacs+nnf"));
        }
        return Ok(format);
    }
    if args.nnf.is_some() {
        return Ok(InputFormat::DimacsNnf);
    }
    match args.input.extension().and_then(|e| e.to_str()) {
        Some("dnf") => Ok(InputFormat::Dnf),
        Some("json") => Ok(InputFormat::Circuit),
        Some("cnf") | Some("dimacs") => Ok(InputFormat::Dimacs),
        _ => Err(Failure::input(format!(
            "cannot infer the format of `{}`; pass --format",
            args.input.display()
        ))),
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| load_failure(path, e))
}

fn load_instance(args: &InputArgs) -> CliResult<Instance> {
    let format = resolve_format(args)?;
    let text = read_file(&args.input)?;
    match format {
        InputFormat::Dnf => DnfLineage::parse(&text)
            .map(Instance::Lineage)
            .map_err(|e| load_failure(&args.input, e)),
        InputFormat::Circuit => BooleanCircuit::from_json(&text)
            .map(Instance::Circuit)
            .map_err(|e| load_failure(&args.input, e)),
        InputFormat::Dimacs => CnfFormula::parse_dimacs(&text)
            .map(Instance::Cnf)
            .map_err(|e| load_failure(&args.input, e)),
        InputFormat::DimacsNnf => {
            let cnf =
                CnfFormula::parse_dimacs(&text).map_err(|e| load_failure(&args.input, e))?;
            let nnf_path = args.nnf.as_ref().expect("checked in resolve_format");
            let nnf_text = read_file(nnf_path)?;
            let circuit = Ddnnf::parse_nnf(&nnf_text, cnf.var_map().clone())
                .map_err(|e| load_failure(nnf_path, e))?;
            Ok(Instance::Compiled { cnf, circuit })
        }
    }
}

/// The CNF encoding of the instance. Exogenous facts are pinned to true
/// before encoding, so the clauses range over endogenous facts and
/// auxiliary variables only.
fn encode(instance: &Instance) -> CliResult<CnfFormula> {
    match instance {
        Instance::Lineage(lineage) => {
            tseytin(&BooleanCircuit::from_dnf(lineage).fix_exogenous()).map_err(run_failure)
        }
        Instance::Circuit(circuit) => tseytin(&circuit.fix_exogenous()).map_err(run_failure),
        Instance::Cnf(cnf) | Instance::Compiled { cnf, .. } => Ok(cnf.clone()),
    }
}

/// Compiles (or reuses) the tractable circuit and strips its auxiliary
/// variables, leaving a circuit over the endogenous facts alone.
fn compiled_query(instance: &Instance, limits: &Limits, verbose: bool) -> CliResult<Ddnnf> {
    let compiled = match instance {
        Instance::Compiled { circuit, .. } => circuit.clone(),
        other => {
            let cnf = encode(other)?;
            compile(&cnf, limits).map_err(run_failure)?
        }
    };
    if verbose {
        eprintln!(
            "compiled: {} nodes, {} edges",
            compiled.len(),
            compiled.edge_count()
        );
    }
    Ok(compiled.purge_tseytin())
}

fn parse_timeout(raw: &str) -> CliResult<Option<Duration>> {
    let trimmed = raw.trim();
    if trimmed.eq_ignore_ascii_case("inf")
        || trimmed.eq_ignore_ascii_case("none")
        || trimmed.eq_ignore_ascii_case("unlimited")
    {
        return Ok(None);
    }
    let seconds: f64 = trimmed.parse().map_err(|_| {
        Failure::input(format!("invalid timeout `{raw}`: expected seconds or `inf`"))
    })?;
    if !seconds.is_finite() || seconds < 0.0 {
        return Err(Failure::input(format!(
            "invalid timeout `{raw}`: expected a non-negative number of seconds"
        )));
    }
    Ok(Some(Duration::from_secs_f64(seconds)))
}

/// Default budget for `hybrid` and `bench`: the `SHAPFACTS_TIMEOUT_MS`
/// variable when set, the built-in default otherwise.
fn default_budget() -> CliResult<Duration> {
    match std::env::var(TIMEOUT_ENV) {
        Ok(raw) => raw.trim().parse::<u64>().map(Duration::from_millis).map_err(|_| {
            Failure::input(format!(
                "{TIMEOUT_ENV} must be an integer number of milliseconds, got `{raw}`"
            ))
        }),
        Err(_) => Ok(DEFAULT_HYBRID_TIMEOUT),
    }
}

fn build_limits(args: &LimitArgs, default_timeout: Option<Duration>) -> CliResult<Limits> {
    let timeout = match &args.timeout {
        Some(raw) => parse_timeout(raw)?,
        None => default_timeout,
    };
    let mut limits = match timeout {
        Some(timeout) => Limits::with_timeout(timeout),
        None => Limits::none(),
    };
    limits.node_budget = args.node_budget;
    Ok(limits)
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_report(report: &ShapleyReport, output: &OutputArgs, started: Instant) -> CliResult<()> {
    let text = match output.report {
        ReportFormat::Csv => report.to_csv().map_err(run_failure)?,
        ReportFormat::Json => {
            let meta = ReportMeta {
                generated_at: unix_now(),
                wall_ms: started.elapsed().as_millis() as u64,
            };
            let mut text = report.to_json(Some(&meta));
            text.push('\n');
            text
        }
    };
    write_output(output.out.as_deref(), &text)
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| load_failure(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn label_of(db: &Database, fact: FactId) -> String {
    db.get(fact).map(|f| f.label.clone()).unwrap_or_default()
}

fn var_label(var_map: &VarMap, fact: FactId) -> String {
    var_map
        .label(VarId(fact.0))
        .map(str::to_string)
        .unwrap_or_default()
}

/// Runs `action` against the instance's coalition game. The game and the
/// label lookup borrow instance-local state, hence the callback shape.
fn with_game<T>(
    instance: &Instance,
    action: impl FnOnce(&dyn SetFunction, &dyn Fn(FactId) -> String) -> CliResult<T>,
) -> CliResult<T> {
    match instance {
        Instance::Lineage(lineage) => {
            let game = lineage.endo_game().map_err(run_failure)?;
            let db = lineage.database();
            action(&game, &|fact| label_of(db, fact))
        }
        Instance::Circuit(circuit) => {
            let fixed = circuit.fix_exogenous();
            let players = fixed.database().endogenous_ids();
            if players.len() > MAX_GAME_FACTS {
                return Err(Failure::input(format!(
                    "the circuit has {} endogenous facts; coalition games support at most {}",
                    players.len(),
                    MAX_GAME_FACTS
                )));
            }
            let order = players.clone();
            let game = FnGame::new(players, |coalition| {
                let assignment: Assignment = order
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| coalition >> i & 1 == 1)
                    .map(|(_, &fact)| fact)
                    .collect();
                fixed.evaluate(&assignment)
            });
            let db = fixed.database();
            action(&game, &|fact| label_of(db, fact))
        }
        Instance::Cnf(_) | Instance::Compiled { .. } => {
            let query = compiled_query(instance, &Limits::none(), false)?;
            let game = query.game().map_err(run_failure)?;
            let var_map = query.var_map();
            action(&game, &|fact| var_label(var_map, fact))
        }
    }
}

fn cmd_exact(args: ExactArgs, verbose: bool) -> CliResult<()> {
    let started = Instant::now();
    let instance = load_instance(&args.input)?;
    let limits = build_limits(&args.limits, None)?;
    let query = compiled_query(&instance, &limits, verbose)?;
    let report = shapley_all(&query, &limits).map_err(run_failure)?;
    write_report(&report, &args.output, started)
}

fn cmd_pqe(args: PqeArgs, verbose: bool) -> CliResult<()> {
    let started = Instant::now();
    let instance = load_instance(&args.input)?;
    let limits = build_limits(&args.limits, None)?;
    let query = compiled_query(&instance, &limits, verbose)?;
    if let Some(path) = &args.probabilities {
        let probs =
            ProbabilityMap::parse(&read_file(path)?).map_err(|e| load_failure(path, e))?;
        let p = prob_ddnnf(&query, &probs).map_err(run_failure)?;
        let line = format!(
            "probability {}/{} ({})\n",
            p.numer(),
            p.denom(),
            rational_to_f64(&p)
        );
        return write_output(args.output.out.as_deref(), &line);
    }
    if let Some(path) = &args.slices_out {
        let slices = slices_via_vandermonde(&query).map_err(run_failure)?;
        let mut text = slices.to_json();
        text.push('\n');
        fs::write(path, text).map_err(|e| load_failure(path, e))?;
    }
    let report = shapley_all_via_pqe(&query).map_err(run_failure)?;
    write_report(&report, &args.output, started)
}

fn cmd_brute(args: CommonArgs) -> CliResult<()> {
    let started = Instant::now();
    let instance = load_instance(&args.input)?;
    let report = with_game(&instance, |game, labels| {
        let values = brute_force_shapley_all(&game).map_err(run_failure)?;
        let entries = values
            .into_iter()
            .map(|(fact, value)| ReportEntry {
                fact,
                label: labels(fact),
                value,
            })
            .collect();
        Ok(ShapleyReport::new(Method::Brute, entries))
    })?;
    write_report(&report, &args.output, started)
}

fn cmd_proxy(args: CommonArgs) -> CliResult<()> {
    let started = Instant::now();
    let instance = load_instance(&args.input)?;
    let cnf = encode(&instance)?;
    let report = cnf_proxy(&cnf).map_err(run_failure)?.into_report();
    write_report(&report, &args.output, started)
}

enum Sampler {
    Permutations,
    Regression,
}

fn cmd_sampled(args: SampleArgs, sampler: Sampler) -> CliResult<()> {
    let started = Instant::now();
    let instance = load_instance(&args.input)?;
    let budget = SampleBudget::new(args.samples_per_fact, args.seed).map_err(run_failure)?;
    let report = with_game(&instance, |game, labels| {
        match sampler {
            Sampler::Permutations => monte_carlo(&game, labels, &budget),
            Sampler::Regression => kernel_shap(&game, labels, &budget),
        }
        .map_err(run_failure)
    })?;
    write_report(&report, &args.output, started)
}

fn cmd_hybrid(args: HybridArgs, verbose: bool) -> CliResult<()> {
    let started = Instant::now();
    let instance = load_instance(&args.input)?;
    let cnf = encode(&instance)?;
    let limits = build_limits(&args.limits, Some(default_budget()?))?;
    let report = if args.no_fallback {
        let query = compile(&cnf, &limits).map_err(run_failure)?.purge_tseytin();
        shapley_all(&query, &limits).map_err(run_failure)?
    } else {
        hybrid_cnf(&cnf, &limits).map_err(run_failure)?
    };
    if verbose {
        if let Some(reason) = report.fallback_reason() {
            eprintln!("fell back to clause-structure scores: {reason}");
        }
    }
    write_report(&report, &args.output, started)
}

fn cmd_compile(args: CompileArgs) -> CliResult<()> {
    let instance = load_instance(&args.input)?;
    let cnf = encode(&instance)?;
    let limits = build_limits(&args.limits, None)?;
    let compiled = match &instance {
        Instance::Compiled { circuit, .. } => circuit.clone(),
        _ => compile(&cnf, &limits).map_err(run_failure)?,
    };
    let purged = compiled.purge_tseytin();
    match &args.emit_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| load_failure(dir, e))?;
            let files = [
                (dir.join("encoding.cnf"), cnf.write_dimacs()),
                (dir.join("compiled.nnf"), compiled.write_nnf()),
                (dir.join("purged.nnf"), purged.write_nnf()),
            ];
            for (path, text) in &files {
                fs::write(path, text).map_err(|e| load_failure(path, e))?;
            }
            println!(
                "encoding: {} variables, {} clauses",
                cnf.num_vars(),
                cnf.clauses().len()
            );
            println!(
                "compiled: {} nodes, {} edges",
                compiled.len(),
                compiled.edge_count()
            );
            println!("purged: {} nodes, {} edges", purged.len(), purged.edge_count());
            Ok(())
        }
        None => write_output(args.out.as_deref(), &purged.write_nnf()),
    }
}

struct BenchRow {
    instance: String,
    method: &'static str,
    wall_ms: f64,
    comparison: RankingComparison,
}

fn cmd_bench(args: BenchArgs, verbose: bool) -> CliResult<()> {
    let mut files: Vec<PathBuf> = fs::read_dir(&args.corpus)
        .map_err(|e| load_failure(&args.corpus, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("dnf"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::input(format!(
            "no .dnf instances in `{}`",
            args.corpus.display()
        )));
    }
    let timeout = match &args.timeout {
        Some(raw) => parse_timeout(raw)?,
        None => Some(default_budget()?),
    };

    let results: Vec<CliResult<Vec<BenchRow>>> = files
        .par_iter()
        .map(|path| bench_instance(path, &args, timeout, verbose))
        .collect();

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "instance", "method", "wall_ms", "ndcg", "p_at_1", "p_at_3", "p_at_5", "p_at_10",
            "l1", "l2",
        ])
        .map_err(csv_failure)?;
    for rows in results {
        for row in rows? {
            let cmp = &row.comparison;
            let record: Vec<String> = vec![
                row.instance.clone(),
                row.method.to_string(),
                row.wall_ms.to_string(),
                cmp.ndcg().to_string(),
                precision_cell(cmp, 1),
                precision_cell(cmp, 3),
                precision_cell(cmp, 5),
                precision_cell(cmp, 10),
                rational_to_f64(cmp.l1()).to_string(),
                rational_to_f64(cmp.l2()).to_string(),
            ];
            writer.write_record(&record).map_err(csv_failure)?;
        }
    }
    let bytes = writer.into_inner().expect("in-memory writer cannot fail");
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    write_output(args.out.as_deref(), &text)
}

fn precision_cell(cmp: &RankingComparison, k: usize) -> String {
    cmp.precision(k).map(|p| p.to_string()).unwrap_or_default()
}

fn csv_failure(err: csv::Error) -> Failure {
    Failure::input(format!("csv error: {err}"))
}

fn bench_instance(
    path: &Path,
    args: &BenchArgs,
    timeout: Option<Duration>,
    verbose: bool,
) -> CliResult<Vec<BenchRow>> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance")
        .to_string();
    let text = read_file(path)?;
    let lineage = DnfLineage::parse(&text).map_err(|e| load_failure(path, e))?;
    let cnf = tseytin(&BooleanCircuit::from_dnf(&lineage).fix_exogenous()).map_err(run_failure)?;
    let game = lineage.endo_game().map_err(run_failure)?;
    let db = lineage.database();

    let exact_started = Instant::now();
    let limits = match timeout {
        Some(timeout) => Limits::with_timeout(timeout),
        None => Limits::none(),
    };
    let truth = compile(&cnf, &limits)
        .map(|compiled| compiled.purge_tseytin())
        .and_then(|query| shapley_all(&query, &limits));
    let truth = match truth {
        Ok(report) => report,
        Err(LibError::DeadlineExceeded) | Err(LibError::BudgetExhausted { .. }) => {
            eprintln!(
                "skipping `{}`: the exact reference run exceeded its budget",
                path.display()
            );
            return Ok(Vec::new());
        }
        Err(err) => return Err(run_failure(err)),
    };
    let exact_wall = exact_started.elapsed();
    if verbose {
        eprintln!(
            "{name}: exact reference took {:.1} ms",
            exact_wall.as_secs_f64() * 1e3
        );
    }

    let budget = SampleBudget::new(args.samples_per_fact, args.seed).map_err(run_failure)?;
    let mut rows = Vec::new();
    for &method in &args.methods {
        let started = Instant::now();
        let (estimate, wall) = match method {
            BenchMethod::Exact => (None, exact_wall),
            BenchMethod::Proxy => (
                Some(cnf_proxy(&cnf).map_err(run_failure)?.into_report()),
                started.elapsed(),
            ),
            BenchMethod::Mc => (
                Some(monte_carlo(&game, |f| label_of(db, f), &budget).map_err(run_failure)?),
                started.elapsed(),
            ),
            BenchMethod::Kshap => (
                Some(kernel_shap(&game, |f| label_of(db, f), &budget).map_err(run_failure)?),
                started.elapsed(),
            ),
        };
        let comparison = match &estimate {
            Some(report) => RankingComparison::compare(&truth, report),
            None => RankingComparison::compare(&truth, &truth),
        }
        .map_err(run_failure)?;
        rows.push(BenchRow {
            instance: name.clone(),
            method: method.tag(),
            wall_ms: wall.as_secs_f64() * 1e3,
            comparison,
        });
    }
    Ok(rows)
}

fn cmd_metrics(args: MetricsArgs) -> CliResult<()> {
    let (truth, _) = ShapleyReport::from_json(&read_file(&args.truth)?)
        .map_err(|e| load_failure(&args.truth, e))?;
    let (estimate, _) = ShapleyReport::from_json(&read_file(&args.estimate)?)
        .map_err(|e| load_failure(&args.estimate, e))?;
    let cmp = RankingComparison::compare(&truth, &estimate).map_err(run_failure)?;
    let mut block = String::new();
    block.push_str(&format!("ndcg {}\n", cmp.ndcg()));
    for &(k, p) in cmp.precision_at() {
        block.push_str(&format!("p@{k} {p}\n"));
    }
    let (l1, l2) = (cmp.l1(), cmp.l2());
    block.push_str(&format!(
        "l1 {}/{} ({})\n",
        l1.numer(),
        l1.denom(),
        rational_to_f64(l1)
    ));
    block.push_str(&format!(
        "l2 {}/{} ({})\n",
        l2.numer(),
        l2.denom(),
        rational_to_f64(l2)
    ));
    write_output(args.out.as_deref(), &block)
}
