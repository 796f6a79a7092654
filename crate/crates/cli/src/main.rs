//! Command-line interface: single runs, batch benchmarks over a fixture
//! directory, bandit regret simulation, numeric identity checks, and the
//! analysis CSVs.
//!
//! Exit codes: 0 success; 1 runtime failure (including a search that
//! exhausts without a plan); 2 missing file; 3 parse or grounding error;
//! 4 unsupported PDDL feature.

mod analyze;
mod record;
mod runner;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use banditplan::bandit::{BoundPolicy, Mode, PolicyKind};
use banditplan::heuristics::HeuristicKind;
use banditplan::regret::{compare_policies, verify_chi2_df2, verify_subgaussian_norm, GaussianArm};
use banditplan::search::Algorithm;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use runner::{RunConfig, SearchParams};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("{0}")]
    Pddl(banditplan::PddlError),
    #[error("{0}")]
    Unsupported(banditplan::PddlError),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn from_pddl(e: banditplan::PddlError) -> Self {
        match e {
            banditplan::PddlError::Unsupported { .. } => CliError::Unsupported(e),
            _ => CliError::Pddl(e),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::NotFound(_) => 2,
            CliError::Pddl(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "banditplan",
    version,
    about = "Classical planning with bandit-based tree search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one domain/problem pair, one record per seed
    /// as JSONL on stdout.
    Run(RunArgs),
    /// Run the cross product instances x algorithms x seeds over a suite
    /// directory, appending JSONL records; resumes if the file exists.
    Bench(BenchArgs),
    /// Simulate bandit policies on Gaussian arms and report final regret.
    Regret(RegretArgs),
    /// Numerically check the sub-Gaussian norm constant and the
    /// two-degree chi-squared quantile identity.
    Verify(VerifyArgs),
    /// Cumulative solved-instances histogram over log-spaced expansion
    /// thresholds, as CSV.
    Histogram(HistogramArgs),
    /// Per-instance comparison of two algorithms on mutually solved
    /// instances, as CSV.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SearchOpts {
    /// Algorithm id(s): gbfs|guct|guct01|guct-normal|guct-normal2|
    /// guct-star|guct01-star|guct-normal-star|guct-normal2-star.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<String>,
    /// Heuristic: ff|add|hmax|gc|blind.
    #[arg(long, default_value = "ff")]
    heuristic: String,
    /// Exploration coefficient for the fixed-coefficient policies.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Expansion budget per run.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    /// Seeds, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2, 3, 4])]
    seeds: Vec<u64>,
    /// Per-run wall-clock guard in seconds; 0 disables it.
    #[arg(long, default_value_t = 900)]
    deadline_s: u64,
}

impl SearchOpts {
    fn algorithms(&self) -> Result<Vec<Algorithm>, CliError> {
        if self.algo.is_empty() {
            return Err(CliError::Other("--algo is required".to_string()));
        }
        if !self.c.is_finite() || self.c <= 0.0 {
            return Err(CliError::Other(format!(
                "--c must be positive, got {}",
                self.c
            )));
        }
        self.algo
            .iter()
            .filter(|id| !id.is_empty())
            .map(|id| Algorithm::from_id(id, self.c).map_err(CliError::Other))
            .collect()
    }

    fn heuristic(&self) -> Result<HeuristicKind, CliError> {
        self.heuristic.parse().map_err(CliError::Other)
    }

    fn deadline(&self) -> Option<Duration> {
        (self.deadline_s > 0).then(|| Duration::from_secs(self.deadline_s))
    }

    fn params(&self) -> Result<SearchParams, CliError> {
        if self.budget == 0 {
            return Err(CliError::Other("--budget must be at least 1".to_string()));
        }
        Ok(SearchParams {
            heuristic: self.heuristic()?,
            budget: self.budget,
            seeds: self.seeds.clone(),
            deadline: self.deadline(),
        })
    }

    fn config(&self, algorithm: Algorithm) -> Result<RunConfig, CliError> {
        Ok(RunConfig {
            algorithm,
            params: self.params()?,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    search: SearchOpts,
    /// Write the first plan found to this file, VAL style.
    #[arg(long)]
    out: Option<PathBuf>,
    domain: PathBuf,
    problem: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    search: SearchOpts,
    /// Records file (JSONL), appended to and used for resumption.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory of (domain.pddl, p*.pddl) groups.
    suite: PathBuf,
}

#[derive(Args)]
struct RegretArgs {
    /// Arms as mu:sigma pairs, comma separated, e.g. 0:1,1:1.
    #[arg(long)]
    arms: String,
    /// Policies: ucb1|ucb1-01|ucb1-normal|ucb1-normal2, comma separated.
    #[arg(long, value_delimiter = ',',
          default_values_t = vec!["ucb1".to_string(), "ucb1-normal2".to_string()])]
    policy: Vec<String>,
    /// Exploration coefficient for ucb1 and ucb1-01.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Trials per run.
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    /// Number of seeds (runs seeds 0..N per policy).
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Write regret curves (CSV: policy,seed,t,cum_regret).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Scales to check against sqrt(8/3)*sigma.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0])]
    sigma: Vec<f64>,
    /// Quantile probabilities to check against -2 ln(alpha); the default
    /// includes e^-2.
    #[arg(long, value_delimiter = ',',
          default_values_t = vec![0.5, 0.05, 0.135_335_283_236_612_7])]
    alpha: Vec<f64>,
}

#[derive(Args)]
struct HistogramArgs {
    /// Records file (JSONL).
    records: PathBuf,
    /// Upper end of the log-spaced threshold grid.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Records file (JSONL).
    records: PathBuf,
    /// First algorithm id.
    algo_a: String,
    /// Second algorithm id.
    algo_b: String,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Regret(args) => cmd_regret(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Histogram(args) => cmd_histogram(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, CliError> {
    let algorithms = args.search.algorithms()?;
    if algorithms.len() != 1 {
        return Err(CliError::Other(
            "run takes exactly one --algo; use bench for batches".to_string(),
        ));
    }
    let instance = runner::load_instance(&args.domain, &args.problem)?;
    let config = args.search.config(algorithms[0])?;
    let (records, plan) = runner::run_seeds(&instance, &config);

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for record in &records {
        let line = serde_json::to_string(record).expect("records serialize");
        writeln!(out, "{line}").map_err(|e| CliError::Other(e.to_string()))?;
    }
    if let (Some(path), Some(plan)) = (&args.out, &plan) {
        let file = File::create(path)
            .map_err(|e| CliError::Other(format!("creating {}: {e}", path.display())))?;
        instance
            .task
            .write_plan(plan, BufWriter::new(file))
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    let all_ok = records
        .iter()
        .all(|r| r.outcome == "plan" || r.outcome == "budget_reached");
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, CliError> {
    let algorithms = args.search.algorithms()?;
    let params = args.search.params()?;
    runner::bench(&args.suite, &algorithms, &params, &args.out, args.jobs)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_arms(spec: &str) -> Result<Vec<GaussianArm>, CliError> {
    spec.split(',')
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (mu, sigma) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Other(format!("arm `{pair}` is not mu:sigma")))?;
            let mu: f64 = mu
                .trim()
                .parse()
                .map_err(|_| CliError::Other(format!("bad mean in `{pair}`")))?;
            let sigma: f64 = sigma
                .trim()
                .parse()
                .map_err(|_| CliError::Other(format!("bad sigma in `{pair}`")))?;
            if sigma < 0.0 {
                return Err(CliError::Other(format!("negative sigma in `{pair}`")));
            }
            Ok(GaussianArm::new(mu, sigma))
        })
        .collect()
}

fn parse_policy(id: &str, c: f64) -> Result<(String, BoundPolicy), CliError> {
    let kind = match id {
        "ucb1" => PolicyKind::Ucb1 { c },
        "ucb1-01" => PolicyKind::Ucb1ZeroOne { c },
        "ucb1-normal" => PolicyKind::Ucb1Normal,
        "ucb1-normal2" => PolicyKind::Ucb1Normal2,
        other => {
            return Err(CliError::Other(format!(
                "unknown policy `{other}`, expected ucb1|ucb1-01|ucb1-normal|ucb1-normal2"
            )))
        }
    };
    Ok((
        id.to_string(),
        BoundPolicy {
            kind,
            mode: Mode::Maximize,
        },
    ))
}

fn cmd_regret(args: RegretArgs) -> Result<ExitCode, CliError> {
    let arms = parse_arms(&args.arms)?;
    if arms.is_empty() {
        return Err(CliError::Other("--arms needs at least one arm".to_string()));
    }
    if args.horizon < arms.len() as u64 {
        return Err(CliError::Other(
            "--horizon must be at least the number of arms".to_string(),
        ));
    }
    if args.seeds == 0 {
        return Err(CliError::Other("--seeds must be at least 1".to_string()));
    }
    if !args.c.is_finite() || args.c <= 0.0 {
        return Err(CliError::Other("--c must be positive".to_string()));
    }
    let policies: Vec<(String, BoundPolicy)> = args
        .policy
        .iter()
        .map(|id| parse_policy(id, args.c))
        .collect::<Result<_, _>>()?;
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let comparison = compare_policies(&arms, &policies, args.horizon, &seeds);

    println!("policy,mean_final_regret,std_final_regret");
    for row in &comparison.summaries {
        println!(
            "{},{},{}",
            row.policy, row.mean_final_regret, row.std_final_regret
        );
    }
    if let Some(path) = &args.out {
        let file = File::create(path)
            .map_err(|e| CliError::Other(format!("creating {}: {e}", path.display())))?;
        banditplan::regret::write_curves_csv(&comparison.traces, BufWriter::new(file))
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let mut all_ok = true;
    println!("check,input,got,expected,abs_error,status");
    for &sigma in &args.sigma {
        if sigma <= 0.0 {
            return Err(CliError::Other("--sigma must be positive".to_string()));
        }
        let got = verify_subgaussian_norm(sigma);
        let expected = (8.0f64 / 3.0).sqrt() * sigma;
        let err = (got - expected).abs();
        let ok = err <= 1e-3 * expected;
        all_ok &= ok;
        println!(
            "subgaussian_norm,{sigma},{got},{expected},{err},{}",
            if ok { "pass" } else { "FAIL" }
        );
    }
    for &alpha in &args.alpha {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(CliError::Other("--alpha must lie in (0,1)".to_string()));
        }
        let got = verify_chi2_df2(alpha);
        let expected = -2.0 * alpha.ln();
        let err = (got - expected).abs();
        let ok = err <= 1e-9;
        all_ok &= ok;
        println!(
            "chi2_df2,{alpha},{got},{expected},{err},{}",
            if ok { "pass" } else { "FAIL" }
        );
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn with_output<F>(out: Option<&PathBuf>, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Other(format!("creating {}: {e}", path.display())))?;
            let mut writer = BufWriter::new(file);
            write(&mut writer).map_err(|e| CliError::Other(e.to_string()))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| CliError::Other(e.to_string()))
        }
    }
}

fn read_records_cli(path: &Path) -> Result<Vec<record::BenchRecord>, CliError> {
    record::read_records(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::NotFound(path.display().to_string())
        } else {
            CliError::Other(e.to_string())
        }
    })
}

fn cmd_histogram(args: HistogramArgs) -> Result<ExitCode, CliError> {
    let records = read_records_cli(&args.records)?;
    with_output(args.out.as_ref(), |w| {
        analyze::histogram(&records, args.budget, w)
    })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode, CliError> {
    for id in [&args.algo_a, &args.algo_b] {
        Algorithm::from_id(id, 1.0).map_err(CliError::Other)?;
    }
    let records = read_records_cli(&args.records)?;
    with_output(args.out.as_ref(), |w| {
        analyze::compare(&records, &args.algo_a, &args.algo_b, w)
    })?;
    Ok(ExitCode::SUCCESS)
}
