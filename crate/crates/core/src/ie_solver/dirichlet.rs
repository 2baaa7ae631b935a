//! The cardinal trigonometric kernel `D_n(y) = (1/n) sin(nπy/T) cot(πy/T)`
//! for even `n`, and its first three derivatives.

use std::f64::consts::PI;

use crate::error::{HfpError, Result};
use crate::series::PowerSeries;

/// Terms of the power series used near the removable singularities.
const SERIES_TERMS: usize = 24;

fn check_order(n: usize) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        return Err(HfpError::OddDirichletOrder(n));
    }
    Ok(())
}

/// `v = πy/T` reduced to `[-π/2, π/2]`. For even `n`,
/// `sin(nw) cot(w)` has period `π` in `w`, so this loses nothing.
fn reduced_angle(y: f64, period: f64) -> f64 {
    let w = PI * y / period;
    w - PI * (w / PI).round()
}

/// `d^k/dv^k [sin(nv) cot(v)]` from the closed form.
fn closed_form(k: usize, n: f64, v: f64) -> f64 {
    let (s, c) = (n * v).sin_cos();
    // derivatives of sin(nv)
    let sd = [s, n * c, -n * n * s, -n * n * n * c];
    let cot = v.cos() / v.sin();
    let csc2 = 1.0 + cot * cot;
    // derivatives of cot(v)
    let cd = [
        cot,
        -csc2,
        2.0 * csc2 * cot,
        -2.0 * csc2 * (csc2 + 2.0 * cot * cot),
    ];
    const BINOM: [[f64; 4]; 4] = [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0],
        [1.0, 3.0, 3.0, 1.0],
    ];
    (0..=k).map(|j| BINOM[k][j] * sd[j] * cd[k - j]).sum()
}

/// `sin(nv) cot(v) = [sin(nv)/v] · [cos v · v/sin v]` as a power series in `v`.
fn series(n: f64) -> PowerSeries {
    let sinc = PowerSeries::sinc_scaled(n, SERIES_TERMS);
    let vcot = &PowerSeries::cos_scaled(1.0, SERIES_TERMS) * &PowerSeries::sinc_scaled(1.0, SERIES_TERMS).recip();
    &sinc * &vcot
}

fn derivative_in_v(k: usize, n: usize, v: f64) -> f64 {
    let nf = n as f64;
    if v.abs() < 1.0 / nf {
        series(nf).eval_derivative(k, v)
    } else {
        closed_form(k, nf, v)
    }
}

/// `D_n(y)`, equal to 1 at multiples of `T`.
pub fn dirichlet_kernel(n: usize, y: f64, period: f64) -> Result<f64> {
    dirichlet_kernel_deriv(0, n, y, period)
}

/// `D_n^{(k)}(y)`, `k <= 3`.
pub fn dirichlet_kernel_deriv(k: usize, n: usize, y: f64, period: f64) -> Result<f64> {
    check_order(n)?;
    if k > 3 {
        return Err(HfpError::InvalidParameter(format!(
            "derivative order must be <= 3, got {k}"
        )));
    }
    if !(period.is_finite() && period > 0.0) {
        return Err(HfpError::InvalidParameter(format!("period must be > 0, got {period}")));
    }
    let v = reduced_angle(y, period);
    let scale = (PI / period).powi(k as i32) / n as f64;
    Ok(scale * derivative_in_v(k, n, v))
}
