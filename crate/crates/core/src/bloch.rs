//! Qubit states in Bloch form, the 4-vector fidelity and measurement frames.
//!
//! A qubit density matrix is `rho = (1 + r n . sigma) / 2` with purity
//! `r in [0, 1]` and unit direction `n`. Attaching `t = sqrt(1 - r^2)` gives a
//! unit Euclidean 4-vector `(t, r n)`, and the Uhlmann fidelity of two qubit
//! states is `(1 + a . b) / 2` for their 4-vectors `a`, `b`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{QestError, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Tolerance on unit norms and orthogonality.
pub const UNIT_TOL: f64 = 1e-12;

/// Model dimension: the full Bloch ball (`Three`) or its equatorial disc
/// (`Two`), fixed to the x-z plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn get(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.get() as f64
    }

    /// The fixed lab axes measured by tomography: `x, y, z` for `Three`,
    /// `x, z` for `Two`.
    pub fn lab_axes(self) -> Vec<Vec3> {
        match self {
            Dim::Two => vec![Vec3::x(), Vec3::z()],
            Dim::Three => vec![Vec3::x(), Vec3::y(), Vec3::z()],
        }
    }
}

impl TryFrom<usize> for Dim {
    type Error = QestError;

    fn try_from(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(QestError::param("d", format!("must be 2 or 3, got {other}"))),
        }
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.get()
    }
}

impl FromStr for Dim {
    type Err = QestError;

    fn from_str(s: &str) -> Result<Self> {
        let d: usize = s
            .trim()
            .parse()
            .map_err(|_| QestError::param("d", format!("must be 2 or 3, got `{s}`")))?;
        Dim::try_from(d)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// A qubit density matrix given by purity and direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    r: f64,
    n: Vec3,
    dim: Dim,
}

impl BlochState {
    /// Builds a state from purity and direction. The direction is normalized;
    /// for `Dim::Two` it must lie in the x-z plane (its y-component is then
    /// set to exactly zero).
    pub fn new(r: f64, n: Vec3, dim: Dim) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(QestError::param("purity", format!("r = {r} outside [0, 1]")));
        }
        let n = normalize_for(n, dim)?;
        Ok(BlochState { r, n, dim })
    }

    /// Builds a state from a Bloch vector of length at most one. The zero
    /// vector maps to the maximally mixed state with direction `z`.
    pub fn from_bloch_vector(v: Vec3, dim: Dim) -> Result<Self> {
        let r = v.norm();
        if r == 0.0 {
            return Ok(Self::maximally_mixed(dim));
        }
        if r > 1.0 + UNIT_TOL {
            return Err(QestError::param("bloch vector", format!("length {r} exceeds 1")));
        }
        Self::new(r.min(1.0), v / r, dim)
    }

    pub fn maximally_mixed(dim: Dim) -> Self {
        BlochState {
            r: 0.0,
            n: Vec3::z(),
            dim,
        }
    }

    /// Constructor for values already known to satisfy the invariants.
    pub(crate) fn from_parts(r: f64, n: Vec3, dim: Dim) -> Self {
        debug_assert!((0.0..=1.0).contains(&r));
        debug_assert!((n.norm() - 1.0).abs() <= UNIT_TOL);
        debug_assert!(dim == Dim::Three || n.y == 0.0);
        BlochState { r, n, dim }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn direction(&self) -> Vec3 {
        self.n
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn bloch_vector(&self) -> Vec3 {
        self.n * self.r
    }

    pub fn four_vector(&self) -> FourVector {
        four_vector(self)
    }

    /// The 2x2 density matrix `(1 + r n . sigma) / 2`.
    pub fn density_matrix(&self) -> Matrix2<Complex<f64>> {
        let v = self.bloch_vector();
        let c = |re: f64, im: f64| Complex::new(re, im);
        Matrix2::new(
            c((1.0 + v.z) / 2.0, 0.0),
            c(v.x / 2.0, -v.y / 2.0),
            c(v.x / 2.0, v.y / 2.0),
            c((1.0 - v.z) / 2.0, 0.0),
        )
    }
}

fn normalize_for(n: Vec3, dim: Dim) -> Result<Vec3> {
    let norm = n.norm();
    if !norm.is_finite() || norm == 0.0 {
        return Err(QestError::DegenerateDirection);
    }
    let mut n = n / norm;
    if dim == Dim::Two {
        if n.y.abs() > 1e-9 {
            return Err(QestError::param(
                "direction",
                format!("d = 2 states lie in the x-z plane, got n_y = {}", n.y),
            ));
        }
        n.y = 0.0;
        n /= n.norm();
    }
    Ok(n)
}

/// The unit 4-vector `(sqrt(1 - r^2), r n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourVector {
    pub t: f64,
    pub v: Vec3,
}

impl FourVector {
    pub fn dot(&self, other: &FourVector) -> f64 {
        self.t * other.t + self.v.dot(&other.v)
    }

    pub fn norm_squared(&self) -> f64 {
        self.t * self.t + self.v.norm_squared()
    }
}

pub fn four_vector(s: &BlochState) -> FourVector {
    // (1 - r)(1 + r) keeps precision near r = 1.
    let t = ((1.0 - s.r) * (1.0 + s.r)).max(0.0).sqrt();
    FourVector {
        t,
        v: s.bloch_vector(),
    }
}

/// Uhlmann fidelity `(tr sqrt(sqrt(b) a sqrt(b)))^2 = (1 + a4 . b4) / 2`.
pub fn fidelity(a: &BlochState, b: &BlochState) -> f64 {
    ((1.0 + a.four_vector().dot(&b.four_vector())) / 2.0).clamp(0.0, 1.0)
}

/// A right-handed orthonormal measurement frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
}

impl Frame {
    pub fn lab() -> Self {
        Frame {
            x: Vec3::x(),
            y: Vec3::y(),
            z: Vec3::z(),
        }
    }

    /// Frame with `z = n0`, for the given model dimension.
    ///
    /// For `Dim::Three` this is [`frame_from_z`]. For `Dim::Two` the
    /// transverse axis `x` is kept in the x-z plane, `x = (n0_z, 0, -n0_x)`,
    /// and `y` is the lab y-axis, so every axis that is measured stays in the
    /// model plane.
    pub fn from_z(n0: Vec3, dim: Dim) -> Result<Self> {
        match dim {
            Dim::Three => frame_from_z(n0),
            Dim::Two => {
                let z = normalize_for(n0, Dim::Two)?;
                let x = Vec3::new(z.z, 0.0, -z.x);
                Ok(Frame { x, y: Vec3::y(), z })
            }
        }
    }

    /// Axes measured in the transverse-plus-longitudinal step, ordered
    /// `x, y, z` (`x, z` for `Dim::Two`).
    pub fn measured_axes(&self, dim: Dim) -> Vec<Vec3> {
        match dim {
            Dim::Two => vec![self.x, self.z],
            Dim::Three => vec![self.x, self.y, self.z],
        }
    }

    /// Maps frame-local coordinates to the lab frame.
    pub fn to_lab(&self, local: Vec3) -> Vec3 {
        self.x * local.x + self.y * local.y + self.z * local.z
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let unit = |v: &Vec3| (v.norm() - 1.0).abs() <= tol;
        unit(&self.x)
            && unit(&self.y)
            && unit(&self.z)
            && self.x.dot(&self.y).abs() <= tol
            && self.x.dot(&self.z).abs() <= tol
            && self.y.dot(&self.z).abs() <= tol
            && (self.x.cross(&self.y) - self.z).norm() <= tol
    }
}

/// Builds a deterministic right-handed frame with `z = n0`.
///
/// `x` is the Gram-Schmidt projection of a helper axis, `(1, 0, 0)` unless
/// `|n0_x| > 0.9` in which case `(0, 1, 0)`; `y = z x x`.
pub fn frame_from_z(n0: Vec3) -> Result<Frame> {
    let z = normalize_for(n0, Dim::Three)?;
    let helper = if z.x.abs() > 0.9 { Vec3::y() } else { Vec3::x() };
    let x = (helper - z * helper.dot(&z)).normalize();
    let y = z.cross(&x);
    Ok(Frame { x, y, z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(r: f64, n: [f64; 3]) -> BlochState {
        BlochState::new(r, Vec3::from(n), Dim::Three).unwrap()
    }

    #[test]
    fn four_vector_examples() {
        let fv = state(0.0, [0.0, 0.0, 1.0]).four_vector();
        assert_eq!((fv.t, fv.v), (1.0, Vec3::zeros()));
        let fv = state(1.0, [1.0, 0.0, 0.0]).four_vector();
        assert_eq!((fv.t, fv.v), (0.0, Vec3::x()));
        let fv = state(0.6, [0.0, 0.0, 1.0]).four_vector();
        assert!((fv.t - 0.8).abs() < 1e-15);
        assert!((fv.v - Vec3::new(0.0, 0.0, 0.6)).norm() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let a = state(0.37, [0.2, -0.5, 0.7]);
        assert!((fidelity(&a, &a) - 1.0).abs() < 1e-15);
        let up = state(1.0, [0.0, 0.0, 1.0]);
        let down = state(1.0, [0.0, 0.0, -1.0]);
        assert_eq!(fidelity(&up, &down), 0.0);
        let mixed = state(0.0, [0.3, 0.1, 0.2]);
        assert_eq!(fidelity(&mixed, &up), 0.5);
    }

    #[test]
    fn dim_two_states_stay_in_plane() {
        let s = BlochState::new(0.5, Vec3::new(1.0, 0.0, 1.0), Dim::Two).unwrap();
        assert_eq!(s.direction().y, 0.0);
        assert!(BlochState::new(0.5, Vec3::new(0.0, 1.0, 0.0), Dim::Two).is_err());
    }

    #[test]
    fn rejects_bad_states() {
        assert!(BlochState::new(1.1, Vec3::z(), Dim::Three).is_err());
        assert!(BlochState::new(-0.1, Vec3::z(), Dim::Three).is_err());
        assert_eq!(
            BlochState::new(0.5, Vec3::zeros(), Dim::Three),
            Err(QestError::DegenerateDirection)
        );
    }

    #[test]
    fn frame_examples() {
        let f = frame_from_z(Vec3::z()).unwrap();
        assert_eq!(f.z, Vec3::z());
        assert!(f.is_orthonormal(UNIT_TOL));
        let f = frame_from_z(Vec3::x()).unwrap();
        assert_eq!(f.z, Vec3::x());
        assert!(f.is_orthonormal(UNIT_TOL));
        assert_eq!(frame_from_z(Vec3::zeros()), Err(QestError::DegenerateDirection));
    }

    #[test]
    fn planar_frame_keeps_axes_in_plane() {
        for k in 0..64 {
            let a = k as f64 * std::f64::consts::TAU / 64.0;
            let f = Frame::from_z(Vec3::new(a.sin(), 0.0, a.cos()), Dim::Two).unwrap();
            assert!(f.is_orthonormal(UNIT_TOL));
            assert_eq!(f.x.y, 0.0);
            assert_eq!(f.z.y, 0.0);
        }
    }

    fn unit() -> impl Strategy<Value = Vec3> {
        (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
            let s = (1.0 - z * z).sqrt();
            Vec3::new(s * phi.cos(), s * phi.sin(), z)
        })
    }

    proptest! {
        #[test]
        fn frames_are_orthonormal_and_deterministic(n in unit(), scale in 0.5f64..2.0) {
            let f = frame_from_z(n * scale).unwrap();
            prop_assert!(f.is_orthonormal(UNIT_TOL));
            prop_assert_eq!(f, frame_from_z(n * scale).unwrap());
        }

        #[test]
        fn fidelity_symmetric_and_bounded(
            ra in 0.0f64..=1.0, na in unit(), rb in 0.0f64..=1.0, nb in unit()
        ) {
            let a = BlochState::new(ra, na, Dim::Three).unwrap();
            let b = BlochState::new(rb, nb, Dim::Three).unwrap();
            let f = fidelity(&a, &b);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert_eq!(f, fidelity(&b, &a));
            let fv = a.four_vector();
            prop_assert!((fv.norm_squared() - 1.0).abs() < UNIT_TOL);
        }
    }
}
