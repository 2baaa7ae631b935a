//! Collocation solvers for periodic supersingular integral equations
//!
//! ```text
//! λ φ(t) + ∫̄_a^b K(t, x) φ(x) dx = w(t),   K(t, x) = U(t, x)/(x - t)³.
//! ```
//!
//! The simple approach collocates the derivative-free rule `T̂^(2)_{3,n}` at
//! `4n` equispaced nodes. The advanced approach uses `T̂^(0)_{3,n}` on `n`
//! nodes and replaces the derivatives of `φ` in its correction terms by
//! derivatives of the trigonometric interpolant.

mod dirichlet;
mod solve;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dirichlet::{dirichlet_kernel, dirichlet_kernel_deriv};
pub use solve::{solve_collocation, CollocationSolution};

use crate::error::{HfpError, Result};
use crate::quadrature::{t_hat, Evaluator, PeriodicIntegrand, RulePath, RuleSpec};

pub type KernelEvaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type DiagonalEvaluator = Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>;

/// `K(t, x) = U(t, x)/(x - t)³` on `[a, b]²`, `T = b - a`.
///
/// `U(t, x)` is only ever called with `|x - t| <= T/2`; `K` extended from
/// there must be `T`-periodic in `x`.
#[derive(Clone)]
pub struct PeriodicKernel {
    u: KernelEvaluator,
    diag: Option<DiagonalEvaluator>,
    a: f64,
    b: f64,
}

impl fmt::Debug for PeriodicKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicKernel")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("has_diagonal", &self.diag.is_some())
            .finish_non_exhaustive()
    }
}

impl PeriodicKernel {
    pub fn new<U>(a: f64, b: f64, u: U) -> Result<Self>
    where
        U: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(HfpError::InvalidParameter(format!(
                "need a finite interval a < b, got [{a}, {b}]"
            )));
        }
        Ok(Self {
            u: Arc::new(u),
            diag: None,
            a,
            b,
        })
    }

    /// Attach `t ↦ [U_0(t,t), U_1(t,t), U_2(t,t), U_3(t,t)]`, `U_k = ∂_x^k U`.
    pub fn with_diagonal<D>(mut self, diag: D) -> Self
    where
        D: Fn(f64) -> [f64; 4] + Send + Sync + 'static,
    {
        self.diag = Some(Arc::new(diag));
        self
    }

    /// `K(t, x) = cos(π(x-t)/T)/sin³(π(x-t)/T)`.
    pub fn cos_over_sin_cubed(a: f64, b: f64) -> Result<Self> {
        let period = b - a;
        let c = std::f64::consts::PI / period;
        let u0 = c.powi(-3);
        Ok(Self::new(a, b, move |t, x| {
            let y = x - t;
            if y == 0.0 {
                return u0;
            }
            let z = c * y;
            (y / z.sin()).powi(3) * z.cos()
        })?
        .with_diagonal(move |_| [u0, 0.0, 0.0, 0.0]))
    }

    /// `K ≡ 0`.
    pub fn zero(a: f64, b: f64) -> Result<Self> {
        Ok(Self::new(a, b, |_, _| 0.0)?.with_diagonal(|_| [0.0; 4]))
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn period(&self) -> f64 {
        self.b - self.a
    }

    pub fn u(&self, t: f64, x: f64) -> f64 {
        (self.u)(t, x)
    }

    pub fn has_diagonal(&self) -> bool {
        self.diag.is_some()
    }

    pub fn diagonal(&self, t: f64) -> Result<[f64; 4]> {
        self.diag
            .as_ref()
            .map(|d| d(t))
            .ok_or(HfpError::MissingDiagonalDerivatives)
    }

    /// `K(t, t + y)` with `y` reduced to `[-T/2, T/2)`.
    pub fn kernel_at_offset(&self, t: f64, y: f64) -> f64 {
        let period = self.period();
        let d = y - period * ((y + 0.5 * period) / period).floor();
        (self.u)(t, t + d) / (d * d * d)
    }

    /// `K(t, t + kT/total)` with `k` reduced to `[-total/2, total/2)` before
    /// scaling, which keeps the distance to `t` exact to one rounding.
    pub fn kernel_at_node(&self, t: f64, k: i64, total: usize) -> f64 {
        let n = total as i64;
        let mut r = k.rem_euclid(n);
        if 2 * r >= n {
            r -= n;
        }
        let d = r as f64 * self.period() / total as f64;
        (self.u)(t, t + d) / (d * d * d)
    }

    pub fn kernel(&self, t: f64, x: f64) -> f64 {
        self.kernel_at_offset(t, x - t)
    }

    /// `f(x) = K(t, x) φ(x)` on `[t - T/2, t + T/2]`, as a quadrature integrand.
    pub fn integrand_at(&self, t: f64, phi: Evaluator) -> Result<PeriodicIntegrand> {
        let half = 0.5 * self.period();
        let u = self.u.clone();
        PeriodicIntegrand::new(3, t, t - half, t + half, move |x| u(t, x) * phi(x))
    }
}

/// Which collocation scheme assembled a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    Simple,
    Advanced,
}

impl std::str::FromStr for Approach {
    type Err = HfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Self::Simple),
            "advanced" => Ok(Self::Advanced),
            other => Err(HfpError::InvalidParameter(format!("unknown approach '{other}'"))),
        }
    }
}

/// Dense collocation system `K̂ φ̂ = w`.
#[derive(Debug, Clone)]
pub struct CollocationSystem {
    pub approach: Approach,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub matrix: DMatrix<f64>,
    pub rhs: Vec<f64>,
}

/// `ε_ij` of the simple scheme: 8 when `|i - j - 2| ≡ 0 (mod 4)`, -2 when
/// `|i - j - 1|` is even, 0 otherwise.
pub fn epsilon_weight(i: i64, j: i64) -> i32 {
    if (i - j - 2).rem_euclid(4) == 0 {
        8
    } else if (i - j - 1).rem_euclid(2) == 0 {
        -2
    } else {
        0
    }
}

fn rows_to_matrix(n: usize, rows: Vec<Vec<f64>>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(n, n, rows.into_iter().flatten())
}

fn check_value(v: f64, index: usize, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(HfpError::EvaluationFailed { index, x })
    }
}

/// Simple scheme on `x_j = a + jĥ`, `ĥ = T/(4n)`, `j = 1..4n`:
/// `K̂_ij = ε_ij ĥ K(x_i, x_j) + λ δ_ij`.
pub fn build_simple_system<W>(kernel: &PeriodicKernel, w: W, lambda: f64, n: usize) -> Result<CollocationSystem>
where
    W: Fn(f64) -> Result<f64> + Sync,
{
    if n < 2 {
        return Err(HfpError::InvalidParameter(format!("simple approach needs n >= 2, got {n}")));
    }
    let size = 4 * n;
    let period = kernel.period();
    let step = period / size as f64;
    let grid: Vec<f64> = (1..=size).map(|j| kernel.a + j as f64 * step).collect();

    let rows: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map(|i| {
            let t = grid[i];
            let mut row = vec![0.0; size];
            for (j, slot) in row.iter_mut().enumerate() {
                if i == j {
                    *slot = lambda;
                    continue;
                }
                let eps = epsilon_weight(i as i64, j as i64);
                if eps == 0 {
                    continue;
                }
                let kv = check_value(kernel.kernel_at_node(t, j as i64 - i as i64, size), j, grid[j])?;
                *slot = eps as f64 * step * kv;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let rhs = grid
        .par_iter()
        .map(|&x| w(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(CollocationSystem {
        approach: Approach::Simple,
        lambda,
        grid,
        matrix: rows_to_matrix(size, rows),
        rhs,
    })
}

/// `(A_0, A_1, A_2, A_3)` at `t` for step `h`.
pub fn ak_coefficients(kernel: &PeriodicKernel, t: f64, h: f64) -> Result<[f64; 4]> {
    let [u0, u1, u2, u3] = kernel.diagonal(t)?;
    let p = std::f64::consts::PI.powi(2) / 3.0;
    Ok([
        -p * u1 / h + u3 * h / 6.0,
        -p * u0 / h + u2 * h / 2.0,
        u1 * h / 2.0,
        u0 * h / 6.0,
    ])
}

/// Advanced scheme on `x_j = a + jh`, `h = T/n`, `j = 0..n-1`:
/// `K̂_ij = [λ + A_0(x_i)] δ_ij + h K(x_i, x_j)(1 - δ_ij) + Σ_k A_k(x_i) D_n^{(k)}(x_i - x_j)`.
pub fn build_advanced_system<W>(kernel: &PeriodicKernel, w: W, lambda: f64, n: usize) -> Result<CollocationSystem>
where
    W: Fn(f64) -> Result<f64> + Sync,
{
    if n % 2 == 1 {
        return Err(HfpError::OddDirichletOrder(n));
    }
    if n < 4 {
        return Err(HfpError::InvalidParameter(format!("advanced approach needs n >= 4, got {n}")));
    }
    if !kernel.has_diagonal() {
        return Err(HfpError::MissingDiagonalDerivatives);
    }
    let period = kernel.period();
    let h = period / n as f64;
    let grid: Vec<f64> = (0..n).map(|j| kernel.a + j as f64 * h).collect();

    // D_n^{(k)}(i h - j h) depends on (i - j) mod n only
    let dn: Vec<[f64; 3]> = (0..n)
        .map(|d| {
            let y = d as f64 * period / n as f64;
            Ok([
                dirichlet_kernel_deriv(1, n, y, period)?,
                dirichlet_kernel_deriv(2, n, y, period)?,
                dirichlet_kernel_deriv(3, n, y, period)?,
            ])
        })
        .collect::<Result<_>>()?;

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = grid[i];
            let a = ak_coefficients(kernel, t, h)?;
            let mut row = vec![0.0; n];
            for (j, slot) in row.iter_mut().enumerate() {
                let d = &dn[(i as i64 - j as i64).rem_euclid(n as i64) as usize];
                let interp = a[1] * d[0] + a[2] * d[1] + a[3] * d[2];
                *slot = if i == j {
                    lambda + a[0] + interp
                } else {
                    let kv = check_value(kernel.kernel_at_node(t, j as i64 - i as i64, n), j, grid[j])?;
                    h * kv + interp
                };
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let rhs = grid
        .par_iter()
        .map(|&x| w(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(CollocationSystem {
        approach: Approach::Advanced,
        lambda,
        grid,
        matrix: rows_to_matrix(n, rows),
        rhs,
    })
}

/// Assemble and solve with the chosen approach.
pub fn solve_integral_equation<W>(
    kernel: &PeriodicKernel,
    w: W,
    lambda: f64,
    n: usize,
    approach: Approach,
) -> Result<CollocationSolution>
where
    W: Fn(f64) -> Result<f64> + Sync,
{
    let system = match approach {
        Approach::Simple => build_simple_system(kernel, w, lambda, n)?,
        Approach::Advanced => build_advanced_system(kernel, w, lambda, n)?,
    };
    solve_collocation(&system)
}

/// `w(t) = λ φ(t) + ∫̄ K(t, x) φ(x) dx` with the integral from `T̂^(2)_{3,N}`,
/// `N` doubled until successive values agree.
#[derive(Clone)]
pub struct ManufacturedRhs {
    kernel: PeriodicKernel,
    phi: Evaluator,
    lambda: f64,
    n_start: usize,
    n_max: usize,
    tol: f64,
}

impl fmt::Debug for ManufacturedRhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedRhs")
            .field("kernel", &self.kernel)
            .field("lambda", &self.lambda)
            .field("n_start", &self.n_start)
            .field("n_max", &self.n_max)
            .field("tol", &self.tol)
            .finish_non_exhaustive()
    }
}

/// See [`ManufacturedRhs`].
pub fn manufactured_rhs(kernel: &PeriodicKernel, phi: Evaluator, lambda: f64, n_start: usize) -> ManufacturedRhs {
    ManufacturedRhs {
        kernel: kernel.clone(),
        phi,
        lambda,
        n_start: n_start.max(2),
        n_max: 1 << 12,
        tol: 1e-12,
    }
}

impl ManufacturedRhs {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Inner integral `∫̄ K(t, x) φ(x) dx`.
    ///
    /// `n` doubles until successive values agree to `tol·max(1, |v|)`. The
    /// roundoff floor of the rule grows with `n`, so once the change starts
    /// growing the coarser value of the closest pair is returned, provided
    /// that pair agrees to `FLOOR_ACCEPT·max(1, |v|)`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        const FLOOR_ACCEPT: f64 = 1e-10;
        let integrand = self.kernel.integrand_at(t, self.phi.clone())?;
        let rule = |n| t_hat(&RuleSpec::new(3, 2, n, RulePath::Compact)?, &integrand);
        let mut n = self.n_start;
        let mut prev = rule(n)?;
        let mut best: Option<(f64, f64)> = None;
        loop {
            let next_n = 2 * n;
            let cur = rule(next_n)?;
            let change = (cur - prev).abs();
            let scale = cur.abs().max(1.0);
            if change <= self.tol * scale {
                return Ok(prev);
            }
            match best {
                Some((best_change, value)) if change > best_change => {
                    if best_change <= FLOOR_ACCEPT * scale {
                        return Ok(value);
                    }
                }
                _ => best = Some((change, prev)),
            }
            if next_n >= self.n_max {
                return Err(HfpError::RhsNotConverged { t, n: next_n, change });
            }
            n = next_n;
            prev = cur;
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.lambda * (self.phi)(t) + self.integral(t)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon_weight(5, 3), 8);
        assert_eq!(epsilon_weight(4, 4), 0);
        assert_eq!(epsilon_weight(4, 3), -2);
        assert_eq!(epsilon_weight(7, 3), 0);
        assert_eq!(epsilon_weight(3, 5), 8);
        assert_eq!(epsilon_weight(3, 4), -2);
    }

    #[test]
    fn epsilon_row_sum() {
        for n in [2usize, 3, 5] {
            let size = 4 * n as i64;
            for i in 1..=size {
                let s: i64 = (1..=size).map(|j| epsilon_weight(i, j) as i64).sum();
                assert_eq!(s, 4 * n as i64);
            }
        }
    }

    #[test]
    fn ak_examples() {
        let one = PeriodicKernel::new(0.0, 2.0 * PI, |_, _| 1.0)
            .unwrap()
            .with_diagonal(|_| [1.0, 0.0, 0.0, 0.0]);
        let a = ak_coefficients(&one, 0.5, 0.1).unwrap();
        assert_eq!(a[0], 0.0);
        assert!((a[1] + 10.0 * PI * PI / 3.0).abs() < 1e-12);
        assert_eq!(a[2], 0.0);
        assert!((a[3] - 1.0 / 60.0).abs() < 1e-15);

        let cosine = PeriodicKernel::new(0.0, 2.0 * PI, |t, x| (x - t).cos())
            .unwrap()
            .with_diagonal(|_| [1.0, 0.0, -1.0, 0.0]);
        let h = 0.2;
        let a = ak_coefficients(&cosine, 1.0, h).unwrap();
        assert!((a[1] - (-PI * PI / 3.0 / h - h / 2.0)).abs() < 1e-12);

        let bare = PeriodicKernel::new(0.0, 1.0, |_, _| 1.0).unwrap();
        assert!(matches!(
            ak_coefficients(&bare, 0.5, 0.1),
            Err(HfpError::MissingDiagonalDerivatives)
        ));
    }

    #[test]
    fn simple_system_shape() {
        let kernel = PeriodicKernel::cos_over_sin_cubed(0.0, 2.0 * PI).unwrap();
        let sys = build_simple_system(&kernel, |x| Ok(x.cos()), 1.5, 3).unwrap();
        assert_eq!(sys.matrix.nrows(), 12);
        for i in 0..12 {
            assert_eq!(sys.matrix[(i, i)], 1.5);
        }
        assert!(sys.matrix.iter().all(|v| v.is_finite()));
        assert!(build_simple_system(&kernel, |_| Ok(0.0), 1.0, 1).is_err());
    }

    #[test]
    fn advanced_system_diagonal_with_unit_u() {
        let one = PeriodicKernel::new(0.0, 2.0 * PI, |_, _| 1.0)
            .unwrap()
            .with_diagonal(|_| [1.0, 0.0, 0.0, 0.0]);
        let sys = build_advanced_system(&one, |_| Ok(0.0), 2.0, 8).unwrap();
        // A_0 = A_2 = 0 and the odd derivatives of D_n vanish at 0
        for i in 0..8 {
            assert!((sys.matrix[(i, i)] - 2.0).abs() < 1e-12, "{}", sys.matrix[(i, i)]);
        }
        assert!(matches!(
            build_advanced_system(&one, |_| Ok(0.0), 1.0, 7),
            Err(HfpError::OddDirichletOrder(7))
        ));
        let bare = PeriodicKernel::new(0.0, 2.0 * PI, |_, _| 1.0).unwrap();
        assert!(matches!(
            build_advanced_system(&bare, |_| Ok(0.0), 1.0, 8),
            Err(HfpError::MissingDiagonalDerivatives)
        ));
    }

    #[test]
    fn zero_kernel_returns_rhs() {
        let kernel = PeriodicKernel::zero(0.0, 2.0 * PI).unwrap();
        for approach in [Approach::Simple, Approach::Advanced] {
            let sol = solve_integral_equation(&kernel, |x| Ok(x.sin() + 2.0), 1.0, 4, approach).unwrap();
            for (x, v) in sol.grid.iter().zip(&sol.values) {
                assert_eq!(*v, x.sin() + 2.0);
            }
        }
    }

    #[test]
    fn manufactured_trivial_cases() {
        let kernel = PeriodicKernel::zero(0.0, 2.0 * PI).unwrap();
        let rhs = manufactured_rhs(&kernel, Arc::new(|x: f64| x.cos()), 1.0, 8);
        assert!((rhs.value(0.3).unwrap() - 0.3f64.cos()).abs() < 1e-15);
        let k = PeriodicKernel::cos_over_sin_cubed(0.0, 2.0 * PI).unwrap();
        let rhs = manufactured_rhs(&k, Arc::new(|_| 0.0), 1.0, 8);
        assert_eq!(rhs.value(1.0).unwrap(), 0.0);
    }
}
