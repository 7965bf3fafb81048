//! The `qest` command line.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 on runtime failure
//! (including a failed `verify-bounds` sweep).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::bloch::Dim;
use crate::error::QestError;
use crate::estimate::Protocol;
use crate::fisherinfo::verify_bounds;
use crate::harness::io::{
    parse_config, parse_grid, prior_from_str, read_csv_file, summary_json, to_json_pretty, write_csv_file,
};
use crate::harness::{fit_scaling, gap_report, run_experiment, ExperimentConfig};
use crate::measure::derive_stream;
use crate::prior::sample_state;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "QEST_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qest", version, about = "Separable vs collective qubit state estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write CSV plus JSON summary.
    Run(RunArgs),
    /// Fit 1 - F = a N^-b to a run CSV.
    Fit(FitArgs),
    /// Compare a run CSV with the separable and collective constants.
    Gap(GapArgs),
    /// Check the Fisher-information bounds on random interior points.
    VerifyBounds(VerifyArgs),
    /// Emit prior draws as CSV.
    SamplePrior(SampleArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// adaptive | tomography
    #[arg(long)]
    protocol: Option<String>,
    /// bures | uniform | point:<r0>
    #[arg(long)]
    prior: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated copy counts, strictly increasing.
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 = automatic.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GapArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to the prior recorded in the CSV.
    #[arg(long)]
    prior: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, default_value = "bures")]
    prior: String,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<QestError> for Failure {
    fn from(e: QestError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult = Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => 1,
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, stdout),
        Command::Fit(a) => cmd_fit(a, stdout),
        Command::Gap(a) => cmd_gap(a, stdout),
        Command::VerifyBounds(a) => cmd_verify(a, stdout),
        Command::SamplePrior(a) => cmd_sample(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Validation(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

fn invalid(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Validation(format!("--{flag}: {msg}"))
}

fn parse_dim(flag: &str, d: usize) -> Result<Dim, Failure> {
    Dim::try_from(d).map_err(|e| invalid(flag, e))
}

fn parsed<T: std::str::FromStr>(flag: &str, raw: &str) -> Result<T, Failure> {
    raw.trim()
        .parse()
        .map_err(|_| invalid(flag, format!("invalid value `{raw}`")))
}

fn build_config(a: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let file = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| invalid("config", e))?
        }
        None => Default::default(),
    };
    let get = |key: &str| file.get(key).map(String::as_str);

    let d = match (a.d, get("d")) {
        (Some(d), _) => d,
        (None, Some(raw)) => parsed("d", raw)?,
        (None, None) => 3,
    };
    let dim = parse_dim("d", d)?;
    let protocol: Protocol = match (&a.protocol, get("protocol")) {
        (Some(p), _) => p.parse().map_err(|e| invalid("protocol", e))?,
        (None, Some(p)) => p.parse().map_err(|e| invalid("protocol", e))?,
        (None, None) => Protocol::Adaptive,
    };
    let prior_str = a.prior.as_deref().or(get("prior")).unwrap_or("bures");
    let prior = prior_from_str(prior_str, dim).map_err(|e| invalid("prior", e))?;

    let mut cfg = ExperimentConfig::new(protocol, prior);
    if let Some(g) = a.n_grid.as_deref().or(get("n_grid")) {
        cfg.n_grid = parse_grid(g).map_err(|e| invalid("n-grid", e))?;
    }
    cfg.trials = match (a.trials, get("trials")) {
        (Some(t), _) => t,
        (None, Some(raw)) => parsed("trials", raw)?,
        (None, None) => cfg.trials,
    };
    cfg.alpha = match (a.alpha, get("alpha")) {
        (Some(x), _) => x,
        (None, Some(raw)) => parsed("alpha", raw)?,
        (None, None) => cfg.alpha,
    };
    cfg.master_seed = match (a.seed, get("seed")) {
        (Some(s), _) => s,
        (None, Some(raw)) => parsed("seed", raw)?,
        (None, None) => 0,
    };
    cfg.threads = match (a.threads, get("threads")) {
        (Some(t), _) => t,
        (None, Some(raw)) => parsed("threads", raw)?,
        (None, None) => match std::env::var(THREADS_ENV) {
            Ok(raw) => parsed("threads", &raw)?,
            Err(_) => 0,
        },
    };
    cfg.out_path = Some(
        a.out
            .clone()
            .or_else(|| get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("run.csv")),
    );
    cfg.validate().map_err(|e| match &e {
        QestError::InvalidParameter { name, .. } => invalid(name, e.to_string()),
        _ => Failure::from(e),
    })?;
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn cmd_run(a: RunArgs, stdout: &mut dyn Write) -> CliResult {
    let cfg = build_config(&a)?;
    let table = run_experiment(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    let out = cfg.out_path.clone().expect("out path set by build_config");
    write_csv_file(&table, &out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    let json_path = out.with_extension("json");
    write_text(&json_path, &(to_json_pretty(&summary_json(&cfg, &table))? + "\n"))?;
    writeln!(stdout, "wrote {} and {}", out.display(), json_path.display())?;
    for r in &table.rows {
        writeln!(
            stdout,
            "N = {:>6}  mean_fidelity = {:.8}  N(1-F) = {:.4} +/- {}",
            r.n,
            r.mean_fidelity,
            r.scaled_risk,
            r.scaled_risk_err.map_or_else(|| "NA".into(), |e| format!("{e:.4}")),
        )?;
    }
    Ok(0)
}

fn cmd_fit(a: FitArgs, stdout: &mut dyn Write) -> CliResult {
    let table = read_csv_file(&a.input)?;
    let fit = fit_scaling(&table)?;
    let text = to_json_pretty(&fit)? + "\n";
    if let Some(out) = &a.out {
        write_text(out, &text)?;
    }
    write!(stdout, "{text}")?;
    Ok(0)
}

fn cmd_gap(a: GapArgs, stdout: &mut dyn Write) -> CliResult {
    let table = read_csv_file(&a.input)?;
    let dim = match a.d {
        Some(d) => parse_dim("d", d)?,
        None => table.dim,
    };
    let prior_str = a.prior.clone().unwrap_or_else(|| table.prior.to_string());
    let prior = prior_from_str(&prior_str, dim).map_err(|e| invalid("prior", e))?;
    let report = gap_report(&table, &prior, dim);
    let text = to_json_pretty(&report)? + "\n";
    if let Some(out) = &a.out {
        write_text(out, &text)?;
    }
    write!(stdout, "{text}")?;
    Ok(0)
}

fn cmd_verify(a: VerifyArgs, stdout: &mut dyn Write) -> CliResult {
    let dim = parse_dim("d", a.d)?;
    if a.sweeps == 0 {
        return Err(invalid("sweeps", "must be at least 1"));
    }
    let checks = verify_bounds(dim, a.sweeps, a.seed)?;
    let mut text = String::from("index,r,theta,phi,gm_axis,dual_axis,gm_lab,dual_lab,pass\n");
    for c in &checks {
        text.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            c.index, c.r, c.theta, c.phi, c.axis.gm, c.axis.dual, c.lab.gm, c.lab.dual, c.pass
        ));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    match &a.out {
        Some(out) => write_text(out, &text)?,
        None => write!(stdout, "{text}")?,
    }
    writeln!(stdout, "# {} of {} sweep points pass", checks.len() - failed, checks.len())?;
    Ok(if failed == 0 { 0 } else { 2 })
}

fn cmd_sample(a: SampleArgs, stdout: &mut dyn Write) -> CliResult {
    let dim = parse_dim("d", a.d)?;
    let prior = prior_from_str(&a.prior, dim).map_err(|e| invalid("prior", e))?;
    let mut text = String::from("r,nx,ny,nz\n");
    for k in 0..a.count {
        let s = sample_state(&prior, &mut derive_stream(a.seed, k));
        let n = s.direction();
        text.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", s.r(), n.x, n.y, n.z));
    }
    match &a.out {
        Some(out) => write_text(out, &text)?,
        None => write!(stdout, "{text}")?,
    }
    Ok(0)
}
