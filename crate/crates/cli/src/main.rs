mod export;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use decpomdp_pbp::check::{self, CheckOutcome};
use decpomdp_pbp::dp::{
    best_response, compression_report, pbp_iterate_with, verify_equilibrium_with, DpError, Mode, StageCompression,
    Tolerances, VerificationReport,
};
use decpomdp_pbp::model::{load_problem, separated_parts, ModelError, ProblemSpec};
use decpomdp_pbp::oracle::{
    centralized_pomdp_solve, common_info_dp, enumerate_team_optimal, exact_payoff, monte_carlo_payoff,
};
use decpomdp_pbp::{build_scenario, EquilibriumReport, ScenarioId, StrategyProfile};
use log::info;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "decpomdp-pbp", version, about = "Person-by-person DP for decentralized POMDPs with delayed sharing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate to a person-by-person fixed point and write the report.
    Solve(RunArgs),
    /// Check a profile against the best-response and exhaustive-Bayes oracles.
    Verify(ProfileArgs),
    /// Write value tables, strategies and posteriors keyed by realization tuples.
    Export(ProfileArgs),
    /// Compare the solved payoff with brute-force and global benchmarks.
    Oracle(OracleArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["scenario", "file"])))]
struct RunArgs {
    /// Built-in scenario: paper_example, separated or random.
    #[arg(long)]
    scenario: Option<String>,
    /// Problem document (JSON).
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, default_value = "time_first")]
    mode: Mode,
    #[arg(long, default_value_t = 100)]
    max_outer: usize,
    /// Seed for random scenarios, random initial profiles and Monte Carlo.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial profile of the iteration.
    #[arg(long, value_enum, default_value_t = Init::Lowest)]
    init: Init,
    /// Worker threads (defaults to one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Output file; a directory for CSV exports. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Profile to use instead of solving: a solve report or a bare profile.
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
}

#[derive(Args)]
struct TolArgs {
    /// Relative slack under which two actions count as tied.
    #[arg(long, default_value_t = 1e-12, value_parser = positive)]
    tie_tol: f64,
    /// Largest best-response gap accepted as an equilibrium.
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    eq_tol: f64,
    /// Posterior agreement with exhaustive Bayes.
    #[arg(long, default_value_t = 1e-12, value_parser = positive)]
    filter_tol: f64,
    /// Agreement of next-posterior laws within a (xi, delta, u) group.
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    group_tol: f64,
    /// Agreement between payoffs computed along different paths.
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    payoff_tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Lowest,
    Random,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("tolerance must be positive".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug)]
enum CliError {
    /// Rejected input: exit code 2.
    Usage(String),
    /// The run completed but a check failed, or the solver gave up: exit code 1.
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<DpError> for CliError {
    fn from(e: DpError) -> Self {
        CliError::Failed(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

struct Loaded {
    name: String,
    scenario: Option<ScenarioId>,
    spec: ProblemSpec<f64>,
}

impl RunArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances { tie: self.tol.tie_tol, equilibrium: self.tol.eq_tol }
    }

    fn load(&self) -> Result<Loaded> {
        match (&self.scenario, &self.file) {
            (Some(name), None) => {
                let id = ScenarioId::from_name(name, self.seed)?;
                Ok(Loaded { name: id.to_string(), scenario: Some(id), spec: build_scenario(id)? })
            }
            (None, Some(path)) => Ok(Loaded { name: path.display().to_string(), scenario: None, spec: load_problem(path)? }),
            _ => Err(CliError::Usage("give exactly one of --scenario and --file".into())),
        }
    }

    fn solve(&self, p: &Loaded) -> Result<EquilibriumReport> {
        let pattern = p.spec.pattern();
        let initial = match self.init {
            Init::Lowest => StrategyProfile::lowest_index(&pattern),
            Init::Random => StrategyProfile::random(&pattern, self.seed),
        };
        info!("solving {} in {} mode", p.name, self.mode);
        Ok(pbp_iterate_with(&p.spec, &initial, self.mode, self.max_outer, self.tolerances())?)
    }

    fn json_only(&self, command: &str) -> Result<()> {
        match self.format {
            Format::Json => Ok(()),
            Format::Csv => Err(CliError::Usage(format!("{command} writes JSON only; CSV is available for export"))),
        }
    }
}

fn read_profile(path: &Path, spec: &ProblemSpec<f64>) -> Result<StrategyProfile> {
    let usage = |m: String| CliError::Usage(format!("{}: {m}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| usage(e.to_string()))?;
    let mut doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| usage(e.to_string()))?;
    if let Some(inner) = doc.get_mut("profile") {
        doc = inner.take();
    }
    let profile: StrategyProfile = serde_json::from_value(doc).map_err(|e| usage(e.to_string()))?;
    if !profile.fits(&spec.pattern()) {
        return Err(usage("profile does not match the problem's information spaces".into()));
    }
    Ok(profile)
}

fn profile_for(args: &ProfileArgs, p: &Loaded) -> Result<StrategyProfile> {
    match &args.profile {
        Some(path) => read_profile(path, &p.spec),
        None => Ok(args.run.solve(p)?.profile),
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Failed(e.to_string()))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn cmd_solve(args: &RunArgs) -> Result<()> {
    args.json_only("solve")?;
    let p = args.load()?;
    let report = args.solve(&p)?;
    eprintln!("{}: payoff {:.9} after {} sweeps ({})", p.name, report.payoff, report.sweeps, report.mode);
    write_out(args.out.as_deref(), &to_json(&report))?;
    if !report.converged {
        return Err(CliError::Failed(format!("best-response gaps {:?} exceed {:e}", report.gaps, args.tol.eq_tol)));
    }
    Ok(())
}

#[derive(Serialize)]
struct CompressionSummary {
    /// `xi` when nothing is ever shared, `xi_delta` otherwise.
    statistic: &'static str,
    terminal_consistent: bool,
    transition_equal: bool,
    stages: Vec<StageCompression>,
}

#[derive(Serialize)]
struct VerifyReport {
    problem: String,
    passed: bool,
    equilibrium: VerificationReport<f64>,
    checks: Vec<CheckOutcome>,
    compression: CompressionSummary,
}

fn cmd_verify(args: &ProfileArgs) -> Result<()> {
    let run = &args.run;
    run.json_only("verify")?;
    let p = run.load()?;
    let spec = &p.spec;
    let profile = profile_for(args, &p)?;
    let equilibrium = verify_equilibrium_with(spec, &profile, run.tolerances())?;
    let mut checks = check::posteriors(spec, &profile, run.tol.filter_tol);
    checks.push(check::payoff(spec, &profile, run.tol.payoff_tol)?);
    checks.push(check::markov_grouping(spec, &profile, run.tol.group_tol));
    let values = (0..spec.num_agents())
        .map(|k| best_response(spec, &profile, k).map(|br| br.table))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let c = compression_report(spec, &profile, &values);
    let pattern = spec.pattern();
    let compression = CompressionSummary {
        statistic: if (1..=spec.horizon).all(|t| pattern.shared_len(t) == 0) { "xi" } else { "xi_delta" },
        terminal_consistent: c.terminal_consistent(),
        transition_equal: c.transition_equal(),
        stages: c.stages,
    };

    let mut failures = Vec::new();
    for (k, (dp, ex)) in equilibrium.dp_gaps.iter().zip(&equilibrium.oracle_gaps).enumerate() {
        if *dp > run.tol.eq_tol || *ex > run.tol.eq_tol {
            failures.push(format!("equilibrium agent {}: dp gap {dp:.3e}, oracle gap {ex:.3e}", k + 1));
        }
    }
    for c in &checks {
        for m in &c.mismatches {
            let agent = m.agent.map(|a| format!(" agent {a}")).unwrap_or_default();
            failures.push(format!("{}{agent} stage {} ({}): delta {:.3e}", m.check, m.stage, m.realization.join(","), m.delta));
        }
    }
    if !compression.terminal_consistent {
        failures.push("compression: terminal values or argmin sets differ within a group".into());
    }
    if !compression.transition_equal {
        failures.push("compression: stage measures differ within a group".into());
    }

    let report = VerifyReport { problem: p.name.clone(), passed: failures.is_empty(), equilibrium, checks, compression };
    write_out(run.out.as_deref(), &to_json(&report))?;
    for c in &report.checks {
        eprintln!("{:<24} {:>6} checked, {} mismatches", c.name, c.checked, c.mismatches.len());
    }
    eprintln!(
        "payoff {:.9}, gaps dp {:?} oracle {:?}",
        report.equilibrium.payoff, report.equilibrium.dp_gaps, report.equilibrium.oracle_gaps
    );
    if failures.is_empty() {
        eprintln!("verification passed");
        Ok(())
    } else {
        for f in &failures {
            eprintln!("FAIL {f}");
        }
        Err(CliError::Failed(format!("{} verification failures", failures.len())))
    }
}

fn cmd_export(args: &ProfileArgs) -> Result<()> {
    let run = &args.run;
    let p = run.load()?;
    let profile = profile_for(args, &p)?;
    let data = export::build(&p.spec, &profile, p.name.clone())?;
    match run.format {
        Format::Json => write_out(run.out.as_deref(), &to_json(&data)),
        Format::Csv => {
            let dir = run.out.as_deref().ok_or_else(|| CliError::Usage("CSV export needs --out DIR".into()))?;
            export::write_csv(&data, dir).map_err(|e| CliError::Failed(format!("{}: {e}", dir.display())))
        }
    }?;
    eprintln!("{}: exported {} value rows, payoff {:.9}", p.name, data.values.len(), data.payoff);
    Ok(())
}

#[derive(Serialize, Default)]
struct Benchmark {
    #[serde(skip_serializing_if = "Option::is_none")]
    payoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
}

impl Benchmark {
    fn from<E: fmt::Display>(r: std::result::Result<f64, E>) -> Self {
        match r {
            Ok(v) => Benchmark { payoff: Some(v), skipped: None },
            Err(e) => Benchmark { payoff: None, skipped: Some(e.to_string()) },
        }
    }
}

#[derive(Serialize)]
struct MonteCarlo {
    samples: usize,
    seed: u64,
    mean: f64,
    stderr: f64,
    z: f64,
}

#[derive(Serialize)]
struct OracleReport {
    problem: String,
    passed: bool,
    pbp_payoff: f64,
    exact_payoff: f64,
    monte_carlo: MonteCarlo,
    team_optimal: Benchmark,
    common_information: Benchmark,
    centralized_pomdp: Benchmark,
    #[serde(skip_serializing_if = "Option::is_none")]
    separated_sum: Option<f64>,
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let run = &args.run;
    run.json_only("oracle")?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let p = run.load()?;
    let spec = &p.spec;
    let report = run.solve(&p)?;
    let exact = exact_payoff(spec, &report.profile);
    let (mean, stderr) = monte_carlo_payoff(spec, &report.profile, args.samples, run.seed);
    let z = if stderr > 0.0 { (mean - exact) / stderr } else { 0.0 };
    let team = Benchmark::from(enumerate_team_optimal(spec).map(|s| s.payoff));
    let common = Benchmark::from(common_info_dp(spec).map(|s| s.payoff));
    let pomdp = Benchmark::from(centralized_pomdp_solve(spec).map(|s| s.value));
    let separated_sum = match p.scenario {
        Some(ScenarioId::Separated { subproblems, seed }) => Some(
            separated_parts::<f64>(subproblems, seed)
                .iter()
                .map(|part| centralized_pomdp_solve(part).map(|s| s.value))
                .sum::<std::result::Result<f64, _>>()
                .map_err(|e| CliError::Failed(e.to_string()))?,
        ),
        _ => None,
    };

    let tol = run.tol.payoff_tol;
    let mut failures = Vec::new();
    if (exact - report.payoff).abs() > tol {
        failures.push(format!("exact payoff {exact} differs from the DP payoff {}", report.payoff));
    }
    if z.abs() > 4.0 {
        failures.push(format!("Monte Carlo mean {mean} is {z:.2} standard errors from {exact}"));
    }
    if let Some(v) = team.payoff {
        if v > report.payoff + tol {
            failures.push(format!("team optimum {v} exceeds the person-by-person payoff {}", report.payoff));
        }
    }
    if let (Some(a), Some(b)) = (team.payoff, common.payoff) {
        if (a - b).abs() > tol {
            failures.push(format!("team optimum {a} and common-information optimum {b} differ"));
        }
    }
    if let Some(v) = pomdp.payoff {
        if (v - report.payoff).abs() > tol {
            failures.push(format!("centralized optimum {v} differs from the single-agent payoff {}", report.payoff));
        }
    }
    if let Some(v) = separated_sum {
        if (v - report.payoff).abs() > tol {
            failures.push(format!("sum of sub-problem optima {v} differs from the payoff {}", report.payoff));
        }
    }

    let out = OracleReport {
        problem: p.name.clone(),
        passed: failures.is_empty(),
        pbp_payoff: report.payoff,
        exact_payoff: exact,
        monte_carlo: MonteCarlo { samples: args.samples, seed: run.seed, mean, stderr, z },
        team_optimal: team,
        common_information: common,
        centralized_pomdp: pomdp,
        separated_sum,
    };
    write_out(run.out.as_deref(), &to_json(&out))?;
    eprintln!("{}: payoff {:.9}, exact {:.9}, Monte Carlo {mean:.5} +- {stderr:.5}", p.name, report.payoff, exact);
    if failures.is_empty() {
        Ok(())
    } else {
        for f in &failures {
            eprintln!("FAIL {f}");
        }
        Err(CliError::Failed(format!("{} oracle mismatches", failures.len())))
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = match &cli.command {
        Command::Solve(a) => a.threads,
        Command::Verify(a) | Command::Export(a) => a.run.threads,
        Command::Oracle(a) => a.run.threads,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Export(a) => cmd_export(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("DECPOMDP_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Failed(_) => 1,
                CliError::Usage(_) => 2,
            })
        }
    }
}
