//! Priors `d rho = dr w(r) dn` over qubit states: isotropic directions and a
//! purity density `w(r)`.
//!
//! The Bures density is `w(r) = c_d r^{d-1} / sqrt(1 - r^2)` with
//! `c_3 = 4 / pi` and `c_2 = 1`. It diverges integrably at `r = 1`, so both
//! the sampler and the moment quadrature work in the angle `u` with
//! `r = sin u`, where the density of `u` is the smooth `c_d sin^{d-1} u`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::bloch::{BlochState, Dim, Vec3};
use crate::error::{QestError, Result};
use crate::measure::RngStream;

const BURES_TABLE_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorKind {
    Bures,
    /// Every state has purity `r0`.
    Point(f64),
    /// `w(r) = 1`; diagnostics only.
    Uniform,
}

impl FromStr for PriorKind {
    type Err = QestError;

    /// Parses `bures`, `uniform` or `point:<r0>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "bures" => Ok(PriorKind::Bures),
            "uniform" => Ok(PriorKind::Uniform),
            _ => {
                let r0 = s
                    .strip_prefix("point:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| {
                        QestError::param(
                            "prior",
                            format!("expected `bures`, `uniform` or `point:<r0>`, got `{s}`"),
                        )
                    })?;
                Ok(PriorKind::Point(r0))
            }
        }
    }
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorKind::Bures => f.write_str("bures"),
            PriorKind::Uniform => f.write_str("uniform"),
            PriorKind::Point(r0) => write!(f, "point:{r0}"),
        }
    }
}

/// An immutable prior, including the precomputed Bures inverse-CDF table.
#[derive(Debug, Clone)]
pub struct PriorSpec {
    kind: PriorKind,
    dim: Dim,
    table: Option<Arc<InverseCdfTable>>,
}

impl PartialEq for PriorSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.dim == other.dim
    }
}

impl PriorSpec {
    pub fn new(kind: PriorKind, dim: Dim) -> Result<Self> {
        if let PriorKind::Point(r0) = kind {
            if !(0.0..=1.0).contains(&r0) {
                return Err(QestError::param("prior", format!("point purity {r0} outside [0, 1]")));
            }
        }
        let table = match kind {
            PriorKind::Bures => Some(Arc::new(InverseCdfTable::bures(dim))),
            _ => None,
        };
        Ok(PriorSpec { kind, dim, table })
    }

    pub fn bures(dim: Dim) -> Self {
        Self::new(PriorKind::Bures, dim).expect("bures prior is always valid")
    }

    pub fn point(r0: f64, dim: Dim) -> Result<Self> {
        Self::new(PriorKind::Point(r0), dim)
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Purity density `w(r)` on `[0, 1)`; point priors have no density and
    /// return 0.
    pub fn density(&self, r: f64) -> f64 {
        if !(0.0..1.0).contains(&r) {
            return 0.0;
        }
        match self.kind {
            PriorKind::Bures => bures_constant(self.dim) * r.powi(self.dim.get() as i32 - 1) / (1.0 - r * r).sqrt(),
            PriorKind::Uniform => 1.0,
            PriorKind::Point(_) => 0.0,
        }
    }

    /// Purity CDF. For Bures: `(2/pi)(asin r - r sqrt(1-r^2))` at d = 3 and
    /// `1 - sqrt(1 - r^2)` at d = 2.
    pub fn cdf(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, 1.0);
        match self.kind {
            PriorKind::Bures => bures_angle_cdf(r.asin(), self.dim),
            PriorKind::Uniform => r,
            PriorKind::Point(r0) => {
                if r >= r0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn bures_constant(dim: Dim) -> f64 {
    // 2 Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2))
    match dim {
        Dim::Two => 1.0,
        Dim::Three => 4.0 / PI,
    }
}

/// CDF of `u = asin r` under the Bures prior.
fn bures_angle_cdf(u: f64, dim: Dim) -> f64 {
    match dim {
        Dim::Two => 1.0 - u.cos(),
        Dim::Three => (2.0 / PI) * (u - u.sin() * u.cos()),
    }
}

/// Inverse CDF of `u = asin r` tabulated at equally spaced probabilities.
#[derive(Debug)]
struct InverseCdfTable {
    dim: Dim,
    /// `angles[j]` solves `G(u) = j / (len - 1)`.
    angles: Vec<f64>,
}

impl InverseCdfTable {
    fn bures(dim: Dim) -> Self {
        let last = (BURES_TABLE_SIZE - 1) as f64;
        let angles = (0..BURES_TABLE_SIZE)
            .map(|j| {
                let q = j as f64 / last;
                let (mut lo, mut hi) = (0.0, FRAC_PI_2);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if bures_angle_cdf(mid, dim) < q {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        InverseCdfTable { dim, angles }
    }

    /// Angle with CDF `q in [0, 1)`: bracket from the table, one bisection
    /// step, then linear interpolation in the halved bracket.
    fn angle(&self, q: f64) -> f64 {
        let last = (self.angles.len() - 1) as f64;
        let pos = q * last;
        let j = (pos as usize).min(self.angles.len() - 2);
        let (mut lo, mut hi) = (self.angles[j], self.angles[j + 1]);
        let (mut glo, mut ghi) = (j as f64 / last, (j + 1) as f64 / last);
        let mid = 0.5 * (lo + hi);
        let gmid = bures_angle_cdf(mid, self.dim);
        if gmid < q {
            lo = mid;
            glo = gmid;
        } else {
            hi = mid;
            ghi = gmid;
        }
        if ghi > glo {
            lo + (q - glo) / (ghi - glo) * (hi - lo)
        } else {
            lo
        }
    }
}

pub fn sample_purity(prior: &PriorSpec, rng: &mut RngStream) -> f64 {
    match prior.kind {
        PriorKind::Point(r0) => r0,
        PriorKind::Uniform => rng.uniform(),
        PriorKind::Bures => {
            let table = prior.table.as_ref().expect("bures prior carries its table");
            table.angle(rng.uniform()).sin().clamp(0.0, 1.0)
        }
    }
}

/// Isotropic direction on the sphere (`Three`) or uniform angle in the x-z
/// plane (`Two`).
pub fn sample_direction(dim: Dim, rng: &mut RngStream) -> Vec3 {
    match dim {
        Dim::Three => {
            let z = 2.0 * rng.uniform() - 1.0;
            let phi = TAU * rng.uniform();
            let s = ((1.0 - z) * (1.0 + z)).sqrt();
            Vec3::new(s * phi.cos(), s * phi.sin(), z)
        }
        Dim::Two => {
            let a = TAU * rng.uniform();
            Vec3::new(a.sin(), 0.0, a.cos())
        }
    }
}

/// Draws a signal state: purity first, then direction.
pub fn sample_state(prior: &PriorSpec, rng: &mut RngStream) -> BlochState {
    let r = sample_purity(prior, rng);
    let n = sample_direction(prior.dim, rng);
    BlochState::from_parts(r, n, prior.dim)
}

/// Prior mean purity `int_0^1 r w(r) dr`, by adaptive Simpson in `u = asin r`.
pub fn mean_purity(prior: &PriorSpec) -> f64 {
    let dim = prior.dim;
    match prior.kind {
        PriorKind::Point(r0) => r0,
        PriorKind::Uniform => 0.5,
        PriorKind::Bures => {
            let c = bures_constant(dim);
            let k = dim.get() as i32;
            // r w(r) dr = c sin^d u du
            adaptive_simpson(&|u: f64| c * u.sin().powi(k), 0.0, FRAC_PI_2, 1e-13)
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::derive_stream;

    /// Composite midpoint rule directly in `r`, resolving the endpoint
    /// singularity with a fine geometric grid toward `r = 1`.
    fn quadrature_oracle(f: impl Fn(f64) -> f64) -> f64 {
        let mut total = 0.0;
        let mut lo = 0.0;
        let mut hi = 0.5;
        while 1.0 - lo > 1e-15 {
            let steps = 20_000;
            let h = (hi - lo) / steps as f64;
            total += (0..steps).map(|i| f(lo + (i as f64 + 0.5) * h) * h).sum::<f64>();
            lo = hi;
            hi = 1.0 - (1.0 - hi) / 2.0;
        }
        total
    }

    #[test]
    fn parses_kind_strings() {
        assert_eq!("bures".parse::<PriorKind>().unwrap(), PriorKind::Bures);
        assert_eq!("uniform".parse::<PriorKind>().unwrap(), PriorKind::Uniform);
        assert_eq!("point:0.25".parse::<PriorKind>().unwrap(), PriorKind::Point(0.25));
        assert!("point:x".parse::<PriorKind>().is_err());
        assert!("gauss".parse::<PriorKind>().is_err());
        assert!(PriorSpec::point(1.5, Dim::Three).is_err());
        for s in ["bures", "uniform", "point:0.5"] {
            assert_eq!(s.parse::<PriorKind>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn densities_normalized() {
        for dim in [Dim::Two, Dim::Three] {
            let p = PriorSpec::bures(dim);
            let mass = quadrature_oracle(|r| p.density(r));
            assert!((mass - 1.0).abs() < 1e-6, "{dim}: {mass}");
        }
    }

    #[test]
    fn mean_purity_values() {
        let p = PriorSpec::point(0.3, Dim::Three).unwrap();
        assert_eq!(mean_purity(&p), 0.3);
        // (4/pi) int r^3 / sqrt(1 - r^2) dr = 8 / (3 pi)
        let b3 = mean_purity(&PriorSpec::bures(Dim::Three));
        assert!((b3 - 8.0 / (3.0 * PI)).abs() < 1e-12, "{b3}");
        let p3 = PriorSpec::bures(Dim::Three);
        let q = quadrature_oracle(|r| r * p3.density(r));
        assert!((q - b3).abs() < 1e-6, "{q}");
        let b2 = mean_purity(&PriorSpec::bures(Dim::Two));
        assert!((b2 - PI / 4.0).abs() < 1e-10, "{b2}");
        // independent check in r, singular endpoint included
        let p2 = PriorSpec::bures(Dim::Two);
        let q = quadrature_oracle(|r| r * p2.density(r));
        assert!((q - PI / 4.0).abs() < 1e-6, "{q}");
    }

    #[test]
    fn cdf_matches_density() {
        let p = PriorSpec::bures(Dim::Three);
        let h = 1e-6;
        for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let numeric = (p.cdf(r + h) - p.cdf(r - h)) / (2.0 * h);
            assert!((numeric - p.density(r)).abs() < 1e-6);
        }
    }

    #[test]
    fn inverse_table_round_trips() {
        for dim in [Dim::Two, Dim::Three] {
            let table = InverseCdfTable::bures(dim);
            for k in 1..1000 {
                let q = k as f64 / 1000.0 + 1.234e-5;
                let u = table.angle(q);
                assert!((bures_angle_cdf(u, dim) - q).abs() < 1e-5, "{dim} q={q}");
            }
        }
    }

    #[test]
    fn point_prior_is_exact() {
        let p = PriorSpec::point(0.5, Dim::Three).unwrap();
        let mut rng = derive_stream(0, 0);
        assert!((0..100).all(|_| sample_purity(&p, &mut rng) == 0.5));
    }

    #[test]
    fn bures_cdf_agreement() {
        let draws = 1_000_000;
        for dim in [Dim::Two, Dim::Three] {
            let p = PriorSpec::bures(dim);
            let mut rng = derive_stream(5, dim.get() as u64);
            let samples: Vec<f64> = (0..draws).map(|_| sample_purity(&p, &mut rng)).collect();
            for k in 1..10 {
                let x = k as f64 / 10.0;
                let emp = samples.iter().filter(|&&r| r <= x).count() as f64 / draws as f64;
                let cdf = p.cdf(x);
                let se = (cdf * (1.0 - cdf) / draws as f64).sqrt();
                assert!((emp - cdf).abs() < 5.0 * se, "{dim} x={x}: {emp} vs {cdf}");
            }
            let mean = samples.iter().sum::<f64>() / draws as f64;
            let var = samples.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let se = (var / draws as f64).sqrt();
            assert!((mean - mean_purity(&p)).abs() < 4.0 * se);
        }
    }

    #[test]
    fn direction_moments() {
        let draws = 1_000_000;
        let mut rng = derive_stream(17, 0);
        let mut sum = Vec3::zeros();
        let mut second = nalgebra::Matrix3::<f64>::zeros();
        let mut cap = 0usize;
        for _ in 0..draws {
            let n = sample_direction(Dim::Three, &mut rng);
            assert!((n.norm() - 1.0).abs() < 1e-12);
            sum += n;
            second += n * n.transpose();
            if n.z > 0.5 {
                cap += 1;
            }
        }
        let mean = sum / draws as f64;
        // per-component variance of an isotropic unit vector is 1/3
        let se = (1.0 / 3.0 / draws as f64).sqrt();
        assert!(mean.iter().all(|m| m.abs() < 4.0 * se), "{mean}");
        let second = second / draws as f64;
        // var(n_i^2) = 1/5 - 1/9, var(n_i n_j) = 1/15
        for i in 0..3 {
            for j in 0..3 {
                let (target, v) = if i == j { (1.0 / 3.0, 4.0 / 45.0) } else { (0.0, 1.0 / 15.0) };
                let se = (v / draws as f64).sqrt();
                assert!((second[(i, j)] - target).abs() < 4.0 * se);
            }
        }
        let frac = cap as f64 / draws as f64;
        let se = (0.25 * 0.75 / draws as f64).sqrt();
        assert!((frac - 0.25).abs() < 3.0 * se, "{frac}");
    }

    #[test]
    fn planar_directions() {
        let mut rng = derive_stream(3, 3);
        for _ in 0..1000 {
            let n = sample_direction(Dim::Two, &mut rng);
            assert_eq!(n.y, 0.0);
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
    }
}
