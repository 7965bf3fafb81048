use serde::{Deserialize, Serialize};

use super::RunTable;
use crate::error::{QestError, Result};

/// Power law `1 - F = a N^-b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub a: f64,
    pub b: f64,
    pub a_err: f64,
    pub b_err: f64,
    /// Weighted residual sum of squares per degree of freedom.
    pub gof: f64,
}

/// Weighted least squares of `ln(1 - F)` on `ln N`.
///
/// Each point is weighted by `((1 - F) / std_err)^2`, the inverse variance of
/// `ln(1 - F)` to first order. If any row lacks a positive standard error all
/// points get unit weight. Standard errors come from the inverse normal
/// matrix.
pub fn fit_scaling(table: &RunTable) -> Result<ScalingFit> {
    let rows = &table.rows;
    if rows.len() < 3 {
        return Err(QestError::TooFewRows(rows.len()));
    }
    if let Some(r) = rows.iter().find(|r| r.mean_fidelity >= 1.0) {
        return Err(QestError::DegenerateRisk(r.n));
    }
    let weighted = rows.iter().all(|r| r.std_err.is_some_and(|e| e > 0.0));
    let points: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| {
            let risk = 1.0 - r.mean_fidelity;
            let w = if weighted { (risk / r.std_err.unwrap()).powi(2) } else { 1.0 };
            ((r.n as f64).ln(), risk.ln(), w)
        })
        .collect();

    let sw: f64 = points.iter().map(|p| p.2).sum();
    let xm = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ym = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - xm).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;

    let rss: f64 = points
        .iter()
        .map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let dof = (points.len() - 2) as f64;
    let gof = rss / dof;
    // Absolute weights give a covariance directly; unit weights are rescaled
    // by the residual variance.
    let scale = if weighted { 1.0 } else { gof };
    let slope_var = scale / sxx;
    let intercept_var = scale * (1.0 / sw + xm * xm / sxx);

    let a = intercept.exp();
    Ok(ScalingFit {
        a,
        b: -slope,
        a_err: a * intercept_var.sqrt(),
        b_err: slope_var.sqrt(),
        gof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::Dim;
    use crate::estimate::Protocol;
    use crate::harness::RunRow;
    use crate::prior::PriorKind;
    use proptest::prelude::*;

    fn table(rows: Vec<RunRow>) -> RunTable {
        RunTable {
            protocol: Protocol::Adaptive,
            dim: Dim::Three,
            prior: PriorKind::Bures,
            alpha: 0.7,
            rows,
        }
    }

    fn planted(a: f64, b: f64, grid: &[u64], err: Option<f64>) -> RunTable {
        table(
            grid.iter()
                .map(|&n| RunRow::new(n, 1000, 1.0 - a * (n as f64).powf(-b), err.map(|e| e / n as f64)))
                .collect(),
        )
    }

    #[test]
    fn recovers_exact_laws() {
        let fit = fit_scaling(&planted(2.25, 1.0, &[256, 1024, 4096], Some(0.01))).unwrap();
        assert!((fit.b - 1.0).abs() < 1e-10 && (fit.a - 2.25).abs() < 1e-10, "{fit:?}");
        let fit = fit_scaling(&planted(0.5, 0.75, &[256, 1024, 4096], None)).unwrap();
        assert!((fit.b - 0.75).abs() < 1e-10 && (fit.a - 0.5).abs() < 1e-10);
        assert!(fit.gof < 1e-20);
    }

    #[test]
    fn errors() {
        let t = planted(1.0, 1.0, &[256, 1024], None);
        assert_eq!(fit_scaling(&t), Err(QestError::TooFewRows(2)));
        let mut t = planted(1.0, 1.0, &[256, 1024, 4096], None);
        t.rows[1] = RunRow::new(1024, 10, 1.0, Some(0.0));
        assert_eq!(fit_scaling(&t), Err(QestError::DegenerateRisk(1024)));
    }

    proptest! {
        #[test]
        fn planted_power_laws_recovered(a in 0.01f64..10.0, b in 0.3f64..1.5) {
            let fit = fit_scaling(&planted(a, b, &[128, 300, 1000, 5000], Some(0.02))).unwrap();
            prop_assert!((fit.b - b).abs() < 1e-9);
            prop_assert!((fit.a / a - 1.0).abs() < 1e-9);
        }
    }
}
