use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use epsurr::experiment::{generate_instance, run_trials, write_trials_csv, ExperimentConfig};
use epsurr::matrix::io::{read_matrix, write_matrix};
use epsurr::matrix::{max_abs, spectral_norm};
use epsurr::solver::{default_schedule, gep_mscra, DecompositionInstance, Schedule, SolverOptions};
use epsurr::verify::{verify_suite, Level};
use epsurr::{Error, PhiSpec};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "epsurr",
    version,
    about = "Low-rank plus sparse decomposition with Lipschitz surrogates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the seed in the configuration
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads for independent trials (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Output file or directory, depending on the subcommand
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Depth of the verification suite
    #[arg(long, global = true, value_name = "LEVEL", default_value = "fast")]
    level: Level,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write M, M_R and M_S for one synthetic trial into a directory
    Generate {
        /// Trial index, selecting the random stream
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Decompose a matrix read from disk
    Solve,
    /// Run the synthetic study and write per-trial CSV
    Experiment,
    /// Run the oracle and invariant checks
    Verify,
}

/// Input to `solve`. Relative matrix paths resolve against the config file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    matrix: PathBuf,
    /// Spectral-norm radius; defaults to `10‖M‖`.
    #[serde(default)]
    gamma1: Option<f64>,
    /// Entrywise radius; defaults to `10‖M‖∞`.
    #[serde(default)]
    gamma2: Option<f64>,
    #[serde(default)]
    phi: PhiSpec,
    #[serde(default)]
    schedule: Option<Schedule>,
    #[serde(default = "SolverOptions::standard")]
    solver: SolverOptions,
}

#[derive(Debug)]
enum Failure {
    BadInput(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SvdFailure(_) | Error::Infeasible => Failure::Check(e.to_string()),
            _ => Failure::BadInput(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::BadInput(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("epsurr: {msg}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(Failure::BadInput(msg)) => {
            eprintln!("epsurr: {msg}");
            ExitCode::from(EXIT_BAD_INPUT)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::BadInput("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::BadInput(e.to_string()))?;
    }
    match cli.command {
        Command::Generate { trial } => generate(cli, trial),
        Command::Solve => solve(cli),
        Command::Experiment => experiment(cli),
        Command::Verify => verify(cli),
    }
}

fn require_config(cli: &Cli) -> Result<&Path, Failure> {
    cli.config
        .as_deref()
        .ok_or_else(|| Failure::BadInput("--config PATH is required".into()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))
}

fn experiment_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut config: ExperimentConfig = read_json(require_config(cli)?)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn generate(cli: &Cli, trial: u64) -> Result<(), Failure> {
    let config = experiment_config(cli)?;
    let dir = cli.output.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let inst = generate_instance(&config, trial);
    for (name, m) in [
        ("m.csv", &inst.m),
        ("m_r.csv", &inst.m_r),
        ("m_s.csv", &inst.m_s),
    ] {
        write_matrix(dir.join(name), m.view())?;
    }
    eprintln!("wrote m.csv, m_r.csv, m_s.csv to {}", dir.display());
    Ok(())
}

fn solve(cli: &Cli) -> Result<(), Failure> {
    let path = require_config(cli)?;
    let config: SolveConfig = read_json(path)?;
    let matrix_path = match path.parent() {
        Some(base) if config.matrix.is_relative() => base.join(&config.matrix),
        _ => config.matrix.clone(),
    };
    let m = read_matrix(&matrix_path)
        .map_err(|e| Failure::BadInput(format!("{}: {e}", matrix_path.display())))?;
    let gamma1 = match config.gamma1 {
        Some(g) => g,
        None => 10.0 * spectral_norm(m.view())?,
    };
    let gamma2 = match config.gamma2 {
        Some(g) => g,
        None => 10.0 * max_abs(m.view()),
    };
    let n = m.nrows().max(m.ncols());
    let schedule = config.schedule.unwrap_or_else(|| default_schedule(n));
    schedule.validate()?;
    let problem = DecompositionInstance::with_radii(
        m,
        gamma1.max(f64::MIN_POSITIVE),
        gamma2.max(f64::MIN_POSITIVE),
    )?;
    let report = gep_mscra(&problem, &config.phi, &schedule, &config.solver)?;

    let dir = cli.output.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    write_matrix(dir.join("x_hat.csv"), report.x_hat.view())?;
    write_matrix(dir.join("y_hat.csv"), report.y_hat.view())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Check(e.to_string()))?;
    fs::write(dir.join("report.json"), json)?;
    eprintln!(
        "rank {}, {} nonzeros, {} stages, status {}",
        report.final_rank,
        report.final_sparsity,
        report.outer_iters,
        report.status.label()
    );
    if !report.certificates_hold(problem.gamma1(), problem.gamma2()) {
        return Err(Failure::Check("stage certificates did not hold".into()));
    }
    Ok(())
}

fn experiment(cli: &Cli) -> Result<(), Failure> {
    let mut config = experiment_config(cli)?;
    if let Some(out) = &cli.output {
        config.output_path = Some(out.to_string_lossy().into_owned());
    }
    let result = run_trials(&config)?;
    if config.output_path.is_none() {
        let stdout = io::stdout();
        write_trials_csv(stdout.lock(), &result.records, &result.means)?;
    }
    let failed: Vec<usize> = result
        .records
        .iter()
        .filter(|r| r.failed() || !r.certificates_ok)
        .map(|r| r.trial)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "trials {failed:?} errored or failed their certificates"
        )))
    }
}

fn verify(cli: &Cli) -> Result<(), Failure> {
    let report = verify_suite(cli.level);
    let mut stdout = io::stdout().lock();
    for check in &report.checks {
        writeln!(stdout, "{check}")?;
    }
    if let Some(out) = &cli.output {
        let json =
            serde_json::to_string_pretty(&report).map_err(|e| Failure::Check(e.to_string()))?;
        fs::write(out, json)?;
    }
    let failed = report.failures().count();
    if failed == 0 {
        writeln!(
            stdout,
            "all {} checks passed ({})",
            report.checks.len(),
            report.level
        )?;
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{failed} of {} checks failed",
            report.checks.len()
        )))
    }
}
