//! Estimation protocols: the one-step adaptive LOCC scheme and fixed-axis
//! tomography.
//!
//! The adaptive scheme spends `N0 = N^alpha` copies on lab-axis tomography to
//! get a rough direction `n0`, then measures the remaining copies along `n0`
//! and `d - 1` axes transverse to it. With `chi_i = 2 alpha_i - 1` the estimate
//! is `R = chi_z`, `sin(theta) = sqrt(chi_x^2 + chi_y^2) / R`,
//! `tan(phi) = chi_y / chi_x`, all in the adapted frame.

use std::fmt;
use std::str::FromStr;

use crate::bloch::{fidelity, BlochState, Dim, Frame, Vec3};
use crate::error::{QestError, Result};
use crate::measure::{sample_counts, RngStream, ShotRecord};
use crate::prior::{sample_state, PriorSpec};

/// Default exponent for the step-one budget `N0 = N^alpha`.
pub const DEFAULT_ALPHA: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Adaptive,
    Tomography,
}

impl FromStr for Protocol {
    type Err = QestError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "adaptive" => Ok(Protocol::Adaptive),
            "tomography" => Ok(Protocol::Tomography),
            other => Err(QestError::param(
                "protocol",
                format!("expected `adaptive` or `tomography`, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Adaptive => "adaptive",
            Protocol::Tomography => "tomography",
        })
    }
}

/// Copy budget of the adaptive protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopySplit {
    /// Copies spent on the rough direction, a multiple of `d`.
    pub n0: u64,
    pub per_axis_step1: u64,
    /// Shots per axis in step two.
    pub n1: u64,
    /// Discarded copies, at most `d - 1`.
    pub leftover: u64,
}

/// `N0 = d ceil(N^alpha / d)`, `N1 = floor((N - N0) / d)`.
pub fn split_copies(n: u64, alpha: f64, dim: Dim) -> Result<CopySplit> {
    check_alpha(alpha)?;
    let d = dim.get() as u64;
    let n0 = d * ((n as f64).powf(alpha) / d as f64).ceil().max(1.0) as u64;
    if n0 >= n || (n - n0) / d == 0 {
        return Err(QestError::SampleTooSmall { n, n0, d: dim.get() });
    }
    let n1 = (n - n0) / d;
    Ok(CopySplit {
        n0,
        per_axis_step1: n0 / d,
        n1,
        leftover: n - n0 - d * n1,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.5 && alpha < 1.0 {
        Ok(())
    } else {
        Err(QestError::param("alpha", format!("must lie in (1/2, 1), got {alpha}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub n: u64,
    pub alpha: f64,
    pub dim: Dim,
    split: CopySplit,
}

impl AdaptiveConfig {
    pub fn new(n: u64, alpha: f64, dim: Dim) -> Result<Self> {
        let split = split_copies(n, alpha, dim)?;
        Ok(AdaptiveConfig { n, alpha, dim, split })
    }

    pub fn split(&self) -> CopySplit {
        self.split
    }
}

/// Estimated state `(R, n_hat)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate(BlochState);

impl Estimate {
    pub fn purity(&self) -> f64 {
        self.0.r()
    }

    pub fn direction(&self) -> Vec3 {
        self.0.direction()
    }

    pub fn state(&self) -> &BlochState {
        &self.0
    }

    pub fn into_state(self) -> BlochState {
        self.0
    }
}

/// Step-two outcome means. `y` is 0 and unused for `Dim::Two`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

fn lab_records(truth: &BlochState, shots: u64, rng: &mut RngStream) -> Vec<ShotRecord> {
    truth
        .dim()
        .lab_axes()
        .iter()
        .map(|a| sample_counts(truth, a, shots, rng))
        .collect()
}

/// Normalized frequency vector `v = sum_i (2 alpha_i - 1) a_i` over the
/// lab-axis records (`x, y, z`, or `x, z` for `Dim::Two`). Falls back to `z`
/// when `v = 0`.
pub fn rough_direction(records: &[ShotRecord], dim: Dim) -> Result<Vec3> {
    check_record_count(records, dim)?;
    let shots = records[0].n_shots;
    if let Some(bad) = records.iter().find(|r| r.n_shots != shots) {
        return Err(QestError::ShotMismatch { expected: shots, got: bad.n_shots });
    }
    let v: Vec3 = records.iter().map(|r| r.axis * r.chi()).sum();
    let norm = v.norm();
    Ok(if norm == 0.0 { Vec3::z() } else { v / norm })
}

fn check_record_count(records: &[ShotRecord], dim: Dim) -> Result<()> {
    if records.len() != dim.get() {
        return Err(QestError::param(
            "records",
            format!("expected {} axis records, got {}", dim.get(), records.len()),
        ));
    }
    Ok(())
}

/// `chi = 2 alpha - 1` per frame axis; records ordered `x, y, z` (`x, z` for
/// `Dim::Two`), each with exactly `n1 > 0` shots.
pub fn chi_from_counts(records: &[ShotRecord], n1: u64, dim: Dim) -> Result<Chi> {
    if n1 == 0 {
        return Err(QestError::param("N1", "step two needs at least one shot per axis"));
    }
    check_record_count(records, dim)?;
    if let Some(bad) = records.iter().find(|r| r.n_shots != n1) {
        return Err(QestError::ShotMismatch { expected: n1, got: bad.n_shots });
    }
    Ok(match dim {
        Dim::Three => Chi {
            x: records[0].chi(),
            y: records[1].chi(),
            z: records[2].chi(),
        },
        Dim::Two => Chi {
            x: records[0].chi(),
            y: 0.0,
            z: records[1].chi(),
        },
    })
}

/// Maps step-two means to an estimate in the lab frame.
///
/// `R = clamp(chi_z, 0, 1)`. The transverse part `(chi_x, chi_y) / R` is
/// `sin(theta)(cos phi, sin phi)`; when its length exceeds one it is rescaled
/// to unit length (`theta = pi/2`). `R = 0` gives `n_hat = frame.z`.
pub fn chi_to_estimate(chi: Chi, frame: &Frame, dim: Dim) -> Estimate {
    let clean = |v: f64| if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 };
    let (cx, cz) = (clean(chi.x), clean(chi.z));
    let cy = match dim {
        Dim::Three => clean(chi.y),
        Dim::Two => 0.0,
    };
    let big_r = cz.clamp(0.0, 1.0);
    if big_r == 0.0 {
        return Estimate(BlochState::from_parts(0.0, frame.z, dim));
    }
    let (mut tx, mut ty) = (cx / big_r, cy / big_r);
    let s = tx.hypot(ty);
    if s > 1.0 {
        tx /= s;
        ty /= s;
    }
    let cos_theta = (1.0 - (tx * tx + ty * ty)).max(0.0).sqrt();
    let mut n_hat = frame.to_lab(Vec3::new(tx, ty, cos_theta));
    if dim == Dim::Two {
        n_hat.y = 0.0;
    }
    let n_hat = n_hat.normalize();
    Estimate(BlochState::from_parts(big_r, n_hat, dim))
}

/// Runs both protocol steps against `truth`, which enters only through the
/// simulated measurement counts.
pub fn adaptive_estimate(cfg: &AdaptiveConfig, truth: &BlochState, rng: &mut RngStream) -> Result<Estimate> {
    let dim = cfg.dim;
    if truth.dim() != dim {
        return Err(QestError::param("state", "state dimension differs from protocol dimension"));
    }
    let split = cfg.split;
    let step_one = lab_records(truth, split.per_axis_step1, rng);
    let n0 = rough_direction(&step_one, dim)?;
    let frame = Frame::from_z(n0, dim)?;
    let step_two: Vec<ShotRecord> = frame
        .measured_axes(dim)
        .iter()
        .map(|a| sample_counts(truth, a, split.n1, rng))
        .collect();
    let chi = chi_from_counts(&step_two, split.n1, dim)?;
    Ok(chi_to_estimate(chi, &frame, dim))
}

/// Ball projection of the raw lab-axis vector `v_i = 2 alpha_i - 1`.
pub fn project_to_ball(v: Vec3, dim: Dim) -> Estimate {
    let norm = v.norm();
    if norm == 0.0 {
        return Estimate(BlochState::maximally_mixed(dim));
    }
    let mut n = v / norm;
    if dim == Dim::Two {
        n.y = 0.0;
    }
    Estimate(BlochState::from_parts(norm.min(1.0), n, dim))
}

/// Fixed-axis tomography with `floor(N / d)` shots per lab axis.
pub fn tomography_estimate(n: u64, dim: Dim, truth: &BlochState, rng: &mut RngStream) -> Result<Estimate> {
    let d = dim.get() as u64;
    if n < d {
        return Err(QestError::param("N", format!("tomography needs N >= d = {d}, got {n}")));
    }
    if truth.dim() != dim {
        return Err(QestError::param("state", "state dimension differs from protocol dimension"));
    }
    let records = lab_records(truth, n / d, rng);
    let v: Vec3 = records.iter().map(|r| r.axis * r.chi()).sum();
    Ok(project_to_ball(v, dim))
}

/// One Monte Carlo sample of the mean-fidelity integrand: draw a state from
/// the prior, estimate it, return the fidelity.
pub fn run_trial(protocol: Protocol, prior: &PriorSpec, n: u64, alpha: f64, rng: &mut RngStream) -> Result<f64> {
    let truth = sample_state(prior, rng);
    let estimate = match protocol {
        Protocol::Adaptive => {
            let cfg = AdaptiveConfig::new(n, alpha, prior.dim())?;
            adaptive_estimate(&cfg, &truth, rng)?
        }
        Protocol::Tomography => tomography_estimate(n, prior.dim(), &truth, rng)?,
    };
    Ok(fidelity(&truth, estimate.state()))
}

/// Like [`run_trial`] with a pre-validated adaptive config, for hot loops.
pub(crate) fn run_adaptive_trial(cfg: &AdaptiveConfig, prior: &PriorSpec, rng: &mut RngStream) -> Result<f64> {
    let truth = sample_state(prior, rng);
    let estimate = adaptive_estimate(cfg, &truth, rng)?;
    Ok(fidelity(&truth, estimate.state()))
}
