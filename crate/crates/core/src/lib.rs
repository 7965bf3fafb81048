//! Simulation of separable (LOCC) and fixed-axis qubit state estimation.
//!
//! The crate reproduces the asymptotic fidelity gap between separable and
//! collective qubit mixed-state estimation by Monte Carlo:
//!
//! - [`bloch`]: Bloch-vector states, 4-vector fidelity, measurement frames.
//! - [`prior`]: isotropic priors with Bures, point or uniform purity laws.
//! - [`measure`]: projective spin measurements and reproducible RNG streams.
//! - [`estimate`]: the one-step adaptive protocol and fixed-axis tomography.
//! - [`fisherinfo`]: quantum/classical Fisher information and the
//!   separable-measurement bounds.
//! - [`harness`]: experiment sweeps, scaling fits, gap reports and file I/O.
//! - [`cli`]: the `qest` command-line front end.

pub mod bloch;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod fisherinfo;
pub mod harness;
pub mod measure;
pub mod prior;

pub use bloch::{fidelity, four_vector, BlochState, Dim, FourVector, Frame, Vec3};
pub use error::{QestError, Result};
pub use estimate::{
    adaptive_estimate, chi_from_counts, chi_to_estimate, rough_direction, run_trial,
    split_copies, tomography_estimate, AdaptiveConfig, Chi, CopySplit, Estimate, Protocol,
};
pub use fisherinfo::{
    bound_stats, collective_bound, fisher_scheme, fisher_single_axis, predicted_fidelity, qfi,
    BoundStats, InfoMatrix, SchemeSpec,
};
pub use harness::{
    fit_scaling, gap_report, run_experiment, ExperimentConfig, GapReport, RunRow, RunTable,
    ScalingFit,
};
pub use measure::{derive_stream, outcome_prob, sample_counts, RngStream, ShotRecord};
pub use prior::{mean_purity, sample_direction, sample_purity, sample_state, PriorKind, PriorSpec};
