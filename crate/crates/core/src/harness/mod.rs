//! Convergence tables, empirical rates and roundoff-floor comparisons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HfpError, Result};
use crate::oracles::{GeometricKernelCase, Profile, ReferenceOptions, ThetaCase};
use crate::quadrature::{roundoff_floor, t_hat, RuleSpec};

/// Unit roundoff of IEEE double precision.
pub const UNIT_ROUNDOFF: f64 = 1.0 / 9007199254740992.0;

/// Rows are pre-floor while `error > PRE_FLOOR_FACTOR · floor`.
pub const PRE_FLOOR_FACTOR: f64 = 100.0;

/// Minimum number of pre-floor rows for a rate fit.
pub const MIN_RATE_ROWS: usize = 3;

/// Slopes above this are reported as floor-dominated.
const FLAT_SLOPE: f64 = -0.01;

/// Where the reference value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// `exact_supersingular` or a Fourier-mode sum.
    ClosedForm,
    /// `hfp_reference`.
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDescriptor {
    pub m: u32,
    pub s: u32,
    /// Poisson parameter, absent for trigonometric densities.
    pub eta: Option<f64>,
    pub t: f64,
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub value: f64,
    pub error: f64,
    /// `roundoff_floor` at this row, with the finest grid of the rule.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub case: CaseDescriptor,
    pub oracle: OracleKind,
    pub oracle_value: f64,
    pub rows: Vec<ReportRow>,
    /// Least-squares slope of `ln(error)` against `n` over the pre-floor rows.
    pub fitted_rate: Option<f64>,
    pub floor_dominated: bool,
    /// Floor estimate at the largest `n`.
    pub floor_estimate: f64,
}

/// Sup-norm estimates of `g`, `g'` and `g'''` on the fundamental interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GNorms {
    pub g: f64,
    pub gp: f64,
    pub gppp: f64,
}

impl GNorms {
    pub fn zero() -> Self {
        Self { g: 0.0, gp: 0.0, gppp: 0.0 }
    }

    /// Sampled on `samples` interior points, derivatives by central differences.
    pub fn estimate(case: &ThetaCase, samples: usize) -> Self {
        let samples = samples.max(16);
        let (a, b) = (case.a, case.b);
        let h = (b - a) / samples as f64;
        let g = |x: f64| case.g(x);
        let mut norms = Self::zero();
        for i in 2..samples - 1 {
            let x = a + i as f64 * h;
            let (m2, m1, p1, p2) = (g(x - 2.0 * h), g(x - h), g(x + h), g(x + 2.0 * h));
            norms.g = norms.g.max(g(x).abs());
            norms.gp = norms.gp.max(((p1 - m1) / (2.0 * h)).abs());
            norms.gppp = norms.gppp.max(((p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h)).abs());
        }
        norms
    }

    pub fn floor(&self, period: f64, n: usize, u: f64) -> f64 {
        roundoff_floor(self.g, self.gp, self.gppp, period, n, u)
    }
}

/// A convergence case: integrand family plus rule level.
#[derive(Debug, Clone)]
pub struct HarnessCase {
    pub theta: ThetaCase,
    pub s: u32,
    pub reference: ReferenceOptions,
}

impl HarnessCase {
    pub fn new(theta: ThetaCase, s: u32) -> Self {
        Self { theta, s, reference: ReferenceOptions::default() }
    }

    /// The `m = 3`, `T = 2π` Poisson family with a closed-form value.
    pub fn geometric(eta: f64, t: f64, s: u32) -> Result<Self> {
        Ok(Self::new(GeometricKernelCase::new(eta, t)?.case(), s))
    }

    pub fn descriptor(&self) -> CaseDescriptor {
        let eta = match self.theta.profile {
            Profile::Poisson { eta } => Some(eta),
            Profile::Trig(_) => None,
        };
        CaseDescriptor {
            m: self.theta.m,
            s: self.s,
            eta,
            t: self.theta.t,
            period: self.theta.period(),
        }
    }

    pub fn oracle(&self) -> Result<(OracleKind, f64)> {
        match self.theta.exact()? {
            Some(v) => Ok((OracleKind::ClosedForm, v)),
            None => Ok((OracleKind::Reference, self.theta.reference(&self.reference)?)),
        }
    }
}

/// Effective grid size of `T̂^(s)_n` for the floor model.
fn finest_grid(s: u32, n: usize) -> usize {
    n << s
}

/// One row per `n`, sorted, errors against the case oracle.
pub fn convergence_table(case: &HarnessCase, n_list: &[usize]) -> Result<ConvergenceReport> {
    let mut ns: Vec<usize> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() {
        return Err(HfpError::InvalidParameter("empty n list".into()));
    }
    let (oracle, exact) = case.oracle()?;
    let m = case.theta.m;
    let integrand = case.theta.integrand(m as usize + 1)?;
    let norms = GNorms::estimate(&case.theta, 2048);
    let period = case.theta.period();

    let rows = ns
        .par_iter()
        .map(|&n| {
            let spec = RuleSpec::preferred(m, case.s, n)?;
            let value = t_hat(&spec, &integrand)?;
            Ok(ReportRow {
                n,
                value,
                error: (value - exact).abs(),
                floor: norms.floor(period, finest_grid(case.s, n), UNIT_ROUNDOFF),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let floor_estimate = rows.last().map_or(0.0, |r| r.floor);
    let mut report = ConvergenceReport {
        case: case.descriptor(),
        oracle,
        oracle_value: exact,
        rows,
        fitted_rate: None,
        floor_dominated: false,
        floor_estimate,
    };
    if let Ok(fit) = empirical_rate(&report) {
        report.fitted_rate = Some(fit.slope);
        report.floor_dominated = fit.floor_dominated;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub rows_used: usize,
    pub floor_dominated: bool,
}

/// `(n, ln error)` least-squares slope.
pub fn fit_log_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of `ln(error)` against `n` over rows with `error > 100 · floor`.
pub fn empirical_rate(report: &ConvergenceReport) -> Result<RateFit> {
    let points: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.error > PRE_FLOOR_FACTOR * r.floor && r.error > 0.0)
        .map(|r| (r.n as f64, r.error.ln()))
        .collect();
    if points.len() < MIN_RATE_ROWS {
        return Err(HfpError::InsufficientPreFloorData {
            usable: points.len(),
            needed: MIN_RATE_ROWS,
        });
    }
    let slope = fit_log_slope(&points);
    Ok(RateFit {
        slope,
        rows_used: points.len(),
        floor_dominated: slope > FLAT_SLOPE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorCheckOptions {
    pub safety: f64,
    pub u: f64,
    /// First `n` of the plateau. `None` starts it at the first row whose
    /// error drops by less than 10× from the previous row.
    pub plateau_from: Option<usize>,
}

impl Default for FloorCheckOptions {
    fn default() -> Self {
        Self { safety: 100.0, u: UNIT_ROUNDOFF, plateau_from: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorCheck {
    pub plateau_rows: Vec<usize>,
    /// Largest error on the plateau.
    pub plateau: f64,
    /// Largest `error / floor(n)` on the plateau.
    pub worst_ratio: f64,
    pub safety: f64,
    pub within_bound: bool,
}

fn plateau_start(rows: &[ReportRow]) -> usize {
    rows.windows(2)
        .position(|w| w[1].error > 0.1 * w[0].error)
        .map_or(rows.len().saturating_sub(1), |i| i + 1)
}

/// Compares the observed plateau with `safety · K(n)·u·n²` row by row.
pub fn floor_check(report: &ConvergenceReport, norms: &GNorms, opts: &FloorCheckOptions) -> FloorCheck {
    let start = match opts.plateau_from {
        Some(n0) => report.rows.iter().position(|r| r.n >= n0).unwrap_or(report.rows.len()),
        None => plateau_start(&report.rows),
    };
    let rows = &report.rows[start..];
    let mut plateau = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for r in rows {
        let bound = norms.floor(report.case.period, finest_grid(report.case.s, r.n), opts.u);
        plateau = plateau.max(r.error);
        let ratio = if r.error == 0.0 { 0.0 } else { r.error / bound };
        worst_ratio = worst_ratio.max(ratio);
    }
    FloorCheck {
        plateau_rows: rows.iter().map(|r| r.n).collect(),
        plateau,
        worst_ratio,
        safety: opts.safety,
        within_bound: worst_ratio <= opts.safety,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report_from(errors: &[(usize, f64)], floor: f64) -> ConvergenceReport {
        ConvergenceReport {
            case: CaseDescriptor { m: 3, s: 0, eta: Some(0.5), t: 1.0, period: 2.0 * std::f64::consts::PI },
            oracle: OracleKind::ClosedForm,
            oracle_value: 0.0,
            rows: errors
                .iter()
                .map(|&(n, error)| ReportRow { n, value: error, error, floor })
                .collect(),
            fitted_rate: None,
            floor_dominated: false,
            floor_estimate: floor,
        }
    }

    #[test]
    fn table_examples() {
        let case = HarnessCase::geometric(0.5, 1.0, 0).unwrap();
        let r = convergence_table(&case, &[40, 20]).unwrap();
        assert_eq!(r.rows[0].n, 20);
        assert!((r.rows[0].error / 2.10e-5 - 1.0).abs() < 0.05, "{}", r.rows[0].error);
        assert!((r.rows[1].error / 2.27e-11 - 1.0).abs() < 0.2, "{}", r.rows[1].error);

        let case = HarnessCase::geometric(0.5, 1.0, 2).unwrap();
        let r = convergence_table(&case, &[10]).unwrap();
        assert!((r.rows[0].error / 1.75e-2 - 1.0).abs() < 0.05, "{}", r.rows[0].error);
    }

    #[test]
    fn rate_of_geometric_errors() {
        let rows: Vec<_> = (1..=4).map(|k| (10 * k, 0.5f64.powi(10 * k as i32))).collect();
        let fit = empirical_rate(&report_from(&rows, 1e-16)).unwrap();
        assert!((fit.slope - 0.5f64.ln()).abs() < 1e-12);
        assert!(!fit.floor_dominated);
    }

    #[test]
    fn flat_rows_are_floor_dominated() {
        let rows: Vec<_> = (1..=4).map(|k| (10 * k, 1e-3)).collect();
        let fit = empirical_rate(&report_from(&rows, 1e-16)).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!(fit.floor_dominated);
    }

    #[test]
    fn too_few_rows() {
        let rows = [(10, 1e-3), (20, 1e-6), (30, 1e-13)];
        let err = empirical_rate(&report_from(&rows, 1e-14)).unwrap_err();
        assert!(matches!(err, HfpError::InsufficientPreFloorData { usable: 2, needed: 3 }));
    }

    #[test]
    fn zero_integrand_plateau() {
        let rows = [(10, 0.0), (20, 0.0)];
        let check = floor_check(&report_from(&rows, 0.0), &GNorms::zero(), &FloorCheckOptions::default());
        assert_eq!(check.plateau, 0.0);
        assert!(check.within_bound);
    }

    #[test]
    fn plateau_starts_where_decay_stops() {
        let rows = [(10, 1e-3), (20, 1e-8), (30, 2e-14), (40, 3e-14), (50, 1e-14)];
        assert_eq!(plateau_start(&report_from(&rows, 1e-16).rows), 3);
    }
}
