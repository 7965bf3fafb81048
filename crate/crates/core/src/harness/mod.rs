//! Experiment orchestration: Monte Carlo sweeps over a grid of sample sizes,
//! power-law fits, the separable-vs-collective gap report and file formats.

mod fit;
mod gap;
pub mod io;

use std::path::PathBuf;

use rayon::prelude::*;

use crate::bloch::Dim;
use crate::error::{QestError, Result};
use crate::estimate::{run_adaptive_trial, run_trial, split_copies, AdaptiveConfig, Protocol, DEFAULT_ALPHA};
use crate::measure::derive_stream;
use crate::prior::{PriorKind, PriorSpec};

pub use fit::{fit_scaling, ScalingFit};
pub use gap::{gap_report, GapReport, GapRow};

/// Grid used for reproduction runs when none is given.
pub const DEFAULT_GRID: [u64; 5] = [256, 512, 1024, 2048, 4096];
pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub prior: PriorSpec,
    pub n_grid: Vec<u64>,
    pub trials: u64,
    pub alpha: f64,
    pub master_seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub out_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(protocol: Protocol, prior: PriorSpec) -> Self {
        ExperimentConfig {
            protocol,
            prior,
            n_grid: DEFAULT_GRID.to_vec(),
            trials: DEFAULT_TRIALS,
            alpha: DEFAULT_ALPHA,
            master_seed: 0,
            threads: 0,
            out_path: None,
        }
    }

    pub fn dim(&self) -> Dim {
        self.prior.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(QestError::param("n-grid", "must not be empty"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QestError::param("n-grid", "must be strictly increasing"));
        }
        if self.trials == 0 {
            return Err(QestError::param("trials", "must be at least 1"));
        }
        if !(self.alpha > 0.5 && self.alpha < 1.0) {
            return Err(QestError::param("alpha", format!("must lie in (1/2, 1), got {}", self.alpha)));
        }
        let d = self.dim().get() as u64;
        for &n in &self.n_grid {
            match self.protocol {
                Protocol::Adaptive => {
                    split_copies(n, self.alpha, self.dim())?;
                }
                Protocol::Tomography if n < d => {
                    return Err(QestError::param("n-grid", format!("tomography needs N >= {d}, got {n}")));
                }
                Protocol::Tomography => {}
            }
        }
        Ok(())
    }
}

/// Per-N Monte Carlo summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub n: u64,
    pub trials: u64,
    pub mean_fidelity: f64,
    /// `None` when `trials = 1`.
    pub std_err: Option<f64>,
    pub scaled_risk: f64,
    pub scaled_risk_err: Option<f64>,
}

impl RunRow {
    pub fn new(n: u64, trials: u64, mean_fidelity: f64, std_err: Option<f64>) -> Self {
        let nf = n as f64;
        RunRow {
            n,
            trials,
            mean_fidelity,
            std_err,
            scaled_risk: nf * (1.0 - mean_fidelity),
            scaled_risk_err: std_err.map(|e| nf * e),
        }
    }

    /// Summarizes fidelity samples with a two-pass mean and variance.
    pub fn from_samples(n: u64, samples: &[f64]) -> Self {
        let k = samples.len();
        let mean = samples.iter().sum::<f64>() / k as f64;
        let std_err = (k >= 2).then(|| {
            let ss: f64 = samples.iter().map(|f| (f - mean).powi(2)).sum();
            (ss / (k - 1) as f64 / k as f64).sqrt()
        });
        Self::new(n, k as u64, mean, std_err)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTable {
    pub protocol: Protocol,
    pub dim: Dim,
    pub prior: PriorKind,
    pub alpha: f64,
    pub rows: Vec<RunRow>,
}

/// Runs `trials` independent trials per grid point. Trial `t` at grid index
/// `g` uses stream `g * trials + t` of the master seed, so the table is the
/// same for any thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunTable> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| QestError::Io(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        cfg.n_grid
            .iter()
            .enumerate()
            .map(|(g, &n)| {
                let base = g as u64 * cfg.trials;
                let samples = simulate_point(cfg, n, base)?;
                Ok(RunRow::from_samples(n, &samples))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(RunTable {
        protocol: cfg.protocol,
        dim: cfg.dim(),
        prior: cfg.prior.kind(),
        alpha: cfg.alpha,
        rows,
    })
}

fn simulate_point(cfg: &ExperimentConfig, n: u64, base: u64) -> Result<Vec<f64>> {
    let seed = cfg.master_seed;
    match cfg.protocol {
        Protocol::Adaptive => {
            let acfg = AdaptiveConfig::new(n, cfg.alpha, cfg.dim())?;
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_adaptive_trial(&acfg, &cfg.prior, &mut derive_stream(seed, base + t)))
                .collect()
        }
        Protocol::Tomography => (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg.protocol, &cfg.prior, n, cfg.alpha, &mut derive_stream(seed, base + t)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(trials: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(Protocol::Adaptive, PriorSpec::bures(Dim::Three));
        c.n_grid = vec![64, 128];
        c.trials = trials;
        c.master_seed = 3;
        c
    }

    #[test]
    fn single_trial_has_no_error_bar() {
        let t = run_experiment(&cfg(1)).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.std_err.is_none() && r.scaled_risk_err.is_none()));
    }

    #[test]
    fn validation() {
        let mut c = cfg(10);
        c.n_grid = vec![128, 64];
        assert!(run_experiment(&c).is_err());
        let mut c = cfg(10);
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = cfg(10);
        c.n_grid = vec![6];
        assert!(c.validate().is_err());
        let mut c = cfg(10);
        c.alpha = 0.4;
        assert!(c.validate().is_err());
    }

    #[test]
    fn scaled_risk_consistent() {
        let t = run_experiment(&cfg(500)).unwrap();
        for r in &t.rows {
            assert!((r.scaled_risk - r.n as f64 * (1.0 - r.mean_fidelity)).abs() < 1e-12);
            assert!(r.std_err.unwrap() > 0.0);
            assert!((0.0..=1.0).contains(&r.mean_fidelity));
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut a = cfg(2000);
        a.threads = 1;
        let mut b = a.clone();
        b.threads = 4;
        assert_eq!(run_experiment(&a).unwrap(), run_experiment(&b).unwrap());
    }

    #[test]
    fn std_err_shrinks_with_trials() {
        let mut c = cfg(20_000);
        c.n_grid = vec![256];
        let small = run_experiment(&c).unwrap().rows[0].std_err.unwrap();
        c.trials = 40_000;
        c.master_seed = 11;
        let large = run_experiment(&c).unwrap().rows[0].std_err.unwrap();
        let ratio = small / large;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.15, "ratio {ratio}");
    }
}
