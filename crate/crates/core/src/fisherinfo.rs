//! Quantum and classical Fisher information in spherical coordinates
//! `(r, theta, phi)` and the separable-measurement bounds
//! `tr{H^-1 I} <= 1` and `tr{H I^-1} >= d^2`.
//!
//! For `Dim::Two` states live in the x-z plane, `n = (sin theta, 0, cos theta)`,
//! and the coordinates are `(r, theta)`; this chart has no pole.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bloch::{Dim, Frame, Vec3};
use crate::error::{QestError, Result};
use crate::measure::derive_stream;
use crate::prior::{mean_purity, sample_direction, PriorSpec};

/// Largest condition number accepted by matrix inversion.
pub const MAX_CONDITION: f64 = 1e12;

const POLE_TOL: f64 = 1e-12;

/// Symmetric `d x d` information matrix in coordinate order `(r, theta[, phi])`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    dim: Dim,
    m: DMatrix<f64>,
}

impl InfoMatrix {
    pub fn zeros(dim: Dim) -> Self {
        InfoMatrix {
            dim,
            m: DMatrix::zeros(dim.get(), dim.get()),
        }
    }

    pub fn from_matrix(dim: Dim, m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != dim.get() || m.ncols() != dim.get() {
            return Err(QestError::param("matrix", format!("expected {0}x{0}", dim.get())));
        }
        Ok(InfoMatrix { dim, m })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn scaled(&self, s: f64) -> Self {
        InfoMatrix { dim: self.dim, m: &self.m * s }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (&self.m - self.m.transpose()).amax() <= tol
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Inverse, or `IllConditioned` if the condition number exceeds
    /// [`MAX_CONDITION`].
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let ev = self.eigenvalues();
        let largest = ev.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        let smallest = ev.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
        let cond = if smallest == 0.0 { f64::INFINITY } else { largest / smallest };
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(QestError::IllConditioned(cond));
        }
        self.m.clone().try_inverse().ok_or(QestError::IllConditioned(cond))
    }
}

impl std::ops::Sub for &InfoMatrix {
    type Output = InfoMatrix;

    fn sub(self, rhs: &InfoMatrix) -> InfoMatrix {
        InfoMatrix { dim: self.dim, m: &self.m - &rhs.m }
    }
}

/// Direction for spherical angles; `phi` is ignored for `Dim::Two`.
pub fn direction(theta: f64, phi: f64, dim: Dim) -> Vec3 {
    match dim {
        Dim::Three => Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()),
        Dim::Two => Vec3::new(theta.sin(), 0.0, theta.cos()),
    }
}

/// Partial derivatives of the direction with respect to the angles.
fn direction_derivatives(theta: f64, phi: f64, dim: Dim) -> Vec<Vec3> {
    let (st, ct) = theta.sin_cos();
    match dim {
        Dim::Three => {
            let (sp, cp) = phi.sin_cos();
            vec![Vec3::new(ct * cp, ct * sp, -st), Vec3::new(-st * sp, st * cp, 0.0)]
        }
        Dim::Two => vec![Vec3::new(ct, 0.0, -st)],
    }
}

/// Quantum Fisher information `diag[1/(1-r^2), r^2, r^2 sin^2 theta]`.
pub fn qfi(r: f64, theta: f64, dim: Dim) -> Result<InfoMatrix> {
    if !(r > 0.0 && r < 1.0) {
        return Err(QestError::PurityBoundary(r));
    }
    let mut diag = vec![1.0 / ((1.0 - r) * (1.0 + r)), r * r];
    if dim == Dim::Three {
        let s = theta.sin();
        if s.abs() <= POLE_TOL {
            return Err(QestError::PoleSingularity(theta));
        }
        diag.push(r * r * s * s);
    }
    Ok(InfoMatrix {
        dim,
        m: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
    })
}

/// Per-copy classical Fisher information of measuring `axis . sigma`:
/// `I = g g^T / (1 - m^2)` with `m = r n . axis` and `g = grad m`.
pub fn fisher_single_axis(r: f64, theta: f64, phi: f64, axis: &Vec3, dim: Dim) -> Result<InfoMatrix> {
    if !(0.0..=1.0).contains(&r) {
        return Err(QestError::param("purity", format!("r = {r} outside [0, 1]")));
    }
    let n = direction(theta, phi, dim);
    let m = r * n.dot(axis);
    let p_min = ((1.0 - m.abs()) / 2.0).max(0.0);
    if p_min <= 1e-15 {
        return Err(QestError::DivergentFisher(p_min));
    }
    let mut g = vec![n.dot(axis)];
    g.extend(direction_derivatives(theta, phi, dim).iter().map(|dn| r * dn.dot(axis)));
    let g = nalgebra::DVector::from_vec(g);
    let denom = (1.0 - m) * (1.0 + m);
    Ok(InfoMatrix {
        dim,
        m: &g * g.transpose() / denom,
    })
}

/// Weighted projective-axis measurement scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    components: Vec<(Vec3, f64)>,
}

impl SchemeSpec {
    pub fn new(components: Vec<(Vec3, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(QestError::param("scheme", "needs at least one axis"));
        }
        let total: f64 = components.iter().map(|c| c.1).sum();
        if components.iter().any(|c| c.1.is_nan() || c.1 < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(QestError::param("scheme", format!("weights must be >= 0 and sum to 1, sum = {total}")));
        }
        let components = components
            .into_iter()
            .map(|(a, w)| {
                let norm = a.norm();
                if norm == 0.0 || !norm.is_finite() {
                    Err(QestError::DegenerateDirection)
                } else {
                    Ok((a / norm, w))
                }
            })
            .collect::<Result<_>>()?;
        Ok(SchemeSpec { components })
    }

    pub fn single(axis: Vec3) -> Result<Self> {
        Self::new(vec![(axis, 1.0)])
    }

    /// Equal weights on the lab axes of the model.
    pub fn lab_axes(dim: Dim) -> Self {
        Self::frame_axes(&Frame::lab(), dim)
    }

    /// Equal weights on the axes a frame contributes in the model dimension.
    pub fn frame_axes(frame: &Frame, dim: Dim) -> Self {
        let w = 1.0 / dim.as_f64();
        SchemeSpec {
            components: frame.measured_axes(dim).into_iter().map(|a| (a, w)).collect(),
        }
    }

    pub fn components(&self) -> &[(Vec3, f64)] {
        &self.components
    }
}

pub fn fisher_scheme(r: f64, theta: f64, phi: f64, scheme: &SchemeSpec, dim: Dim) -> Result<InfoMatrix> {
    let mut total = InfoMatrix::zeros(dim);
    for (axis, w) in &scheme.components {
        total.m += fisher_single_axis(r, theta, phi, axis, dim)?.m * *w;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundStats {
    /// `tr{H^-1 I}`, at most 1 for separable measurements.
    pub gm: f64,
    /// `tr{H I^-1}`, `+inf` for rank-deficient `I`.
    pub dual: f64,
}

pub fn bound_stats(h: &InfoMatrix, i: &InfoMatrix) -> Result<BoundStats> {
    let h_inv = h.inverse()?;
    let gm = (&h_inv * &i.m).trace();
    let dual = match i.inverse() {
        Ok(i_inv) => (&h.m * i_inv).trace(),
        Err(_) => f64::INFINITY,
    };
    Ok(BoundStats { gm, dual })
}

/// Asymptotic pointwise fidelity `1 - tr{H I^-1} / (4N)`.
pub fn predicted_fidelity(h: &InfoMatrix, i: &InfoMatrix, n: u64) -> Result<f64> {
    let i_inv = i.inverse()?;
    let dual = (&h.m * i_inv).trace();
    Ok(1.0 - dual / (4.0 * n as f64))
}

/// Separable-measurement constant `lim N(1 - F) = d^2 / 4`.
pub fn separable_constant(dim: Dim) -> f64 {
    dim.as_f64().powi(2) / 4.0
}

/// Collective constant: `(3 + 2 rbar) / 4` for d = 3 and `1/2` for d = 2.
pub fn collective_constant(prior: &PriorSpec, dim: Dim) -> f64 {
    match dim {
        Dim::Three => (3.0 + 2.0 * mean_purity(prior)) / 4.0,
        Dim::Two => 0.5,
    }
}

/// Asymptotic optimal collective fidelity `1 - collective_constant / N`.
pub fn collective_bound(prior: &PriorSpec, dim: Dim, n: u64) -> f64 {
    1.0 - collective_constant(prior, dim) / n as f64
}

/// One sweep point checked by [`verify_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub index: usize,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    /// Single random projective axis.
    pub axis: BoundStats,
    /// Equal-weight lab-axes scheme.
    pub lab: BoundStats,
    pub pass: bool,
}

/// Tolerances used by [`verify_bounds`].
pub const GM_TOL: f64 = 1e-9;
pub const DUAL_TOL: f64 = 1e-6;

/// Random interior sweep: `r in [0.05, 0.95]`, `theta` at least 0.1 from the
/// poles (d = 3), a random axis (in-plane for d = 2) and the lab-axes scheme.
/// Point `k` draws from stream `k` of `seed`.
pub fn verify_bounds(dim: Dim, sweeps: usize, seed: u64) -> Result<Vec<BoundCheck>> {
    let d2 = dim.as_f64().powi(2);
    (0..sweeps)
        .map(|k| {
            let mut rng = derive_stream(seed, k as u64);
            let r = 0.05 + 0.9 * rng.uniform();
            let (theta, phi) = match dim {
                Dim::Three => (0.1 + (PI - 0.2) * rng.uniform(), TAU * rng.uniform()),
                Dim::Two => (TAU * rng.uniform(), 0.0),
            };
            let h = qfi(r, theta, dim)?;
            let axis = sample_direction(dim, &mut rng);
            let axis = bound_stats(&h, &fisher_single_axis(r, theta, phi, &axis, dim)?)?;
            let lab = bound_stats(&h, &fisher_scheme(r, theta, phi, &SchemeSpec::lab_axes(dim), dim)?)?;
            let projective_ok = (axis.gm - 1.0).abs() <= GM_TOL;
            let lab_ok = lab.gm <= 1.0 + GM_TOL && lab.dual >= d2 - DUAL_TOL;
            let axis_dual_ok = axis.dual >= d2 - DUAL_TOL;
            Ok(BoundCheck {
                index: k,
                r,
                theta,
                phi,
                axis,
                lab,
                pass: projective_ok && lab_ok && axis_dual_ok,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(m: &InfoMatrix) -> Vec<f64> {
        (0..m.dim().get()).map(|i| m.get(i, i)).collect()
    }

    #[test]
    fn qfi_examples() {
        let h = qfi(0.5, PI / 2.0, Dim::Three).unwrap();
        let d = diag(&h);
        assert!((d[0] - 4.0 / 3.0).abs() < 1e-15 && d[1] == 0.25 && (d[2] - 0.25).abs() < 1e-15);
        assert_eq!(diag(&qfi(0.5, 0.3, Dim::Two).unwrap()).len(), 2);
        assert!((qfi(0.999, 1.0, Dim::Three).unwrap().get(0, 0) - 1.0 / (1.0 - 0.998001)).abs() < 1e-9);
        assert_eq!(qfi(0.0, 1.0, Dim::Three), Err(QestError::PurityBoundary(0.0)));
        assert_eq!(qfi(1.0, 1.0, Dim::Three), Err(QestError::PurityBoundary(1.0)));
        assert!(matches!(qfi(0.5, 0.0, Dim::Three), Err(QestError::PoleSingularity(_))));
        assert!(qfi(0.5, 0.0, Dim::Two).is_ok());
    }

    #[test]
    fn single_axis_closed_form() {
        let (r, theta, phi) = (0.6, 0.8, 1.3);
        let i = fisher_single_axis(r, theta, phi, &Vec3::z(), Dim::Three).unwrap();
        let c = theta.cos();
        assert!((i.get(0, 0) - c * c / (1.0 - r * r * c * c)).abs() < 1e-14);
        let i = fisher_single_axis(r, 0.0, 0.0, &Vec3::z(), Dim::Two).unwrap();
        assert!((i.get(0, 0) - 1.0 / (1.0 - r * r)).abs() < 1e-14);
        let ev = i.eigenvalues();
        assert!(ev[0].abs() < 1e-12, "rank one");
    }

    #[test]
    fn divergent_when_outcome_certain() {
        let n = direction(0.7, 0.2, Dim::Three);
        assert!(matches!(
            fisher_single_axis(1.0, 0.7, 0.2, &n, Dim::Three),
            Err(QestError::DivergentFisher(_))
        ));
    }

    #[test]
    fn scheme_examples() {
        let axis = Vec3::new(0.3, -0.4, 0.8).normalize();
        let single = fisher_single_axis(0.5, 0.9, 0.4, &axis, Dim::Three).unwrap();
        let s = fisher_scheme(0.5, 0.9, 0.4, &SchemeSpec::single(axis).unwrap(), Dim::Three).unwrap();
        assert!((s.matrix() - single.matrix()).amax() < 1e-15);
        let split = SchemeSpec::new(vec![(axis, 0.4), (axis, 0.6)]).unwrap();
        let s = fisher_scheme(0.5, 0.9, 0.4, &split, Dim::Three).unwrap();
        assert!((s.matrix() - single.matrix()).amax() < 1e-15);

        let lab = fisher_scheme(0.5, PI / 4.0, 0.3, &SchemeSpec::lab_axes(Dim::Three), Dim::Three).unwrap();
        assert!(lab.is_symmetric(1e-10));
        assert!(lab.min_eigenvalue() > 1e-3, "full rank");
        assert!(SchemeSpec::new(vec![(axis, 0.5)]).is_err());
        assert!(SchemeSpec::new(vec![(axis, 1.5), (axis, -0.5)]).is_err());
    }

    #[test]
    fn bound_stats_examples() {
        let h = qfi(0.4, 1.1, Dim::Three).unwrap();
        let b = bound_stats(&h, &h.scaled(1.0 / 3.0)).unwrap();
        assert!((b.gm - 1.0).abs() < 1e-12 && (b.dual - 9.0).abs() < 1e-12);
        let i = fisher_single_axis(0.4, 1.1, 2.0, &Vec3::new(1.0, 2.0, -0.5).normalize(), Dim::Three).unwrap();
        let b = bound_stats(&h, &i).unwrap();
        assert!((b.gm - 1.0).abs() < 1e-9);
        assert!(b.dual.is_infinite());
        let singular = InfoMatrix::zeros(Dim::Three);
        assert!(bound_stats(&singular, &h).is_err());
    }

    #[test]
    fn predicted_fidelity_examples() {
        let h = qfi(0.4, 1.1, Dim::Three).unwrap();
        let f = predicted_fidelity(&h, &h.scaled(1.0 / 3.0), 100).unwrap();
        assert!((f - 0.9775).abs() < 1e-12);
        let h2 = qfi(0.4, 1.1, Dim::Two).unwrap();
        let f = predicted_fidelity(&h2, &h2.scaled(0.5), 1000).unwrap();
        assert!((f - 0.999).abs() < 1e-12);
        let rank_one = fisher_single_axis(0.4, 1.1, 0.0, &Vec3::z(), Dim::Three).unwrap();
        assert!(predicted_fidelity(&h, &rank_one, 10).is_err());
    }

    #[test]
    fn adapted_frame_scheme_saturates_dual_bound() {
        // Frame aligned with the state: I = H / d.
        for dim in [Dim::Two, Dim::Three] {
            let (r, theta, phi) = (0.5, 1e-3, 0.4);
            let frame = Frame::from_z(direction(theta, phi, dim), dim).unwrap();
            let h = qfi(r, theta, dim).unwrap();
            let i = fisher_scheme(r, theta, phi, &SchemeSpec::frame_axes(&frame, dim), dim).unwrap();
            let b = bound_stats(&h, &i).unwrap();
            let d2 = dim.as_f64().powi(2);
            assert!((b.dual - d2).abs() < 1e-6, "{dim}: {}", b.dual);
            assert!((b.gm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn collective_examples() {
        assert!((collective_bound(&PriorSpec::bures(Dim::Two), Dim::Two, 100) - 0.995).abs() < 1e-15);
        // Bures mean purity at d = 3 is 8 / (3 pi).
        let f = collective_bound(&PriorSpec::bures(Dim::Three), Dim::Three, 1000);
        assert!((f - (1.0 - (3.0 + 16.0 / (3.0 * PI)) / 4000.0)).abs() < 1e-12);
        assert!((collective_constant(&PriorSpec::bures(Dim::Three), Dim::Three) - 1.1744131815783876).abs() < 1e-10);
        let p = PriorSpec::point(2.0 / (3.0 * PI), Dim::Three).unwrap();
        assert!((collective_constant(&p, Dim::Three) - 0.85610).abs() < 1e-5);
        let p0 = PriorSpec::point(0.0, Dim::Three).unwrap();
        assert!((collective_bound(&p0, Dim::Three, 40) - (1.0 - 3.0 / 160.0)).abs() < 1e-15);
    }

    #[test]
    fn sweeps_pass() {
        for dim in [Dim::Two, Dim::Three] {
            let checks = verify_bounds(dim, 200, 7).unwrap();
            assert_eq!(checks.len(), 200);
            assert!(checks.iter().all(|c| c.pass));
            for c in &checks {
                assert!(c.lab.gm * c.lab.dual >= dim.as_f64().powi(2) - 1e-6);
            }
        }
    }
}
