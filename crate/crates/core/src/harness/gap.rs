use serde::Serialize;

use super::RunTable;
use crate::bloch::Dim;
use crate::fisherinfo::{collective_constant, separable_constant};
use crate::prior::PriorSpec;

/// How many scaled-risk standard errors must separate a measured point from
/// the collective constant.
pub const GAP_SIGMAS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub scaled_risk: f64,
    pub scaled_risk_err: Option<f64>,
    /// `scaled_risk - 10 err > collective_constant`.
    pub above_collective: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub d: usize,
    pub prior: String,
    pub separable_constant: f64,
    pub collective_constant: f64,
    pub rows: Vec<GapRow>,
    /// `above_collective` at the largest N.
    pub gap_demonstrated: bool,
}

/// Compares each scaled risk `N(1 - F)` with the separable constant `d^2/4`
/// and the collective constant. Rows without an error bar never count as
/// above the collective constant.
pub fn gap_report(table: &RunTable, prior: &PriorSpec, dim: Dim) -> GapReport {
    let collective = collective_constant(prior, dim);
    let rows: Vec<GapRow> = table
        .rows
        .iter()
        .map(|r| GapRow {
            n: r.n,
            scaled_risk: r.scaled_risk,
            scaled_risk_err: r.scaled_risk_err,
            above_collective: r
                .scaled_risk_err
                .is_some_and(|e| r.scaled_risk - GAP_SIGMAS * e > collective),
        })
        .collect();
    let gap_demonstrated = rows
        .iter()
        .max_by_key(|r| r.n)
        .is_some_and(|r| r.above_collective);
    GapReport {
        d: dim.get(),
        prior: prior.kind().to_string(),
        separable_constant: separable_constant(dim),
        collective_constant: collective,
        rows,
        gap_demonstrated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::Protocol;
    use crate::harness::RunRow;
    use crate::prior::PriorKind;

    fn table(risk: f64, err: f64, dim: Dim) -> RunTable {
        RunTable {
            protocol: Protocol::Adaptive,
            dim,
            prior: PriorKind::Bures,
            alpha: 0.7,
            rows: [256u64, 1024, 4096]
                .iter()
                .map(|&n| RunRow::new(n, 100, 1.0 - risk / n as f64, Some(err / n as f64)))
                .collect(),
        }
    }

    #[test]
    fn constants() {
        let r = gap_report(&table(2.25, 0.01, Dim::Three), &PriorSpec::bures(Dim::Three), Dim::Three);
        assert!((r.collective_constant - (3.0 + 16.0 / (3.0 * std::f64::consts::PI)) / 4.0).abs() < 1e-12);
        assert_eq!(r.separable_constant, 2.25);
        assert!(r.gap_demonstrated);
        let r = gap_report(&table(1.0, 0.01, Dim::Two), &PriorSpec::bures(Dim::Two), Dim::Two);
        assert_eq!((r.separable_constant, r.collective_constant), (1.0, 0.5));
    }

    #[test]
    fn noisy_table_does_not_demonstrate_gap() {
        let r = gap_report(&table(1.0, 0.05, Dim::Three), &PriorSpec::bures(Dim::Three), Dim::Three);
        assert!(!r.gap_demonstrated);
        let mut t = table(2.25, 0.01, Dim::Three);
        for row in &mut t.rows {
            *row = RunRow::new(row.n, 1, row.mean_fidelity, None);
        }
        assert!(!gap_report(&t, &PriorSpec::bures(Dim::Three), Dim::Three).gap_demonstrated);
    }
}
