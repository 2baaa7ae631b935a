//! Closed-form values and an independent brute-force reference for
//! finite-part integrals.
//!
//! The closed forms cover the kernels
//! `θ_m(y) = cos(πy/T)/sin^m(πy/T)` (odd `m`) and `1/sin^m(πy/T)` (even `m`)
//! against Fourier modes, which gives exact values for any trigonometric
//! density and for the Poisson-kernel density `u(x) = Σ η^k cos kx`.
//! [`hfp_reference`] makes no use of either: it subtracts a Taylor polynomial
//! at `t`, integrates the regular remainder with Gauss–Legendre panels, and
//! adds the finite parts of the subtracted monomials back in closed form.

mod family;

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

pub use family::{default_interval, GeometricKernelCase, Profile, ThetaCase, TrigPolynomial};

use crate::error::{HfpError, Result};
use crate::quadrature::factorial;

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta.abs() < 1.0 {
        Ok(())
    } else {
        Err(HfpError::Domain(format!("|eta| must be < 1, got {eta}")))
    }
}

/// `u(x) = (1 - η cos x)/(1 - 2η cos x + η²) = Σ_{k>=0} η^k cos kx`.
pub fn poisson_u(eta: f64, x: f64) -> Result<f64> {
    check_eta(eta)?;
    let c = x.cos();
    Ok((1.0 - eta * c) / (1.0 - 2.0 * eta * c + eta * eta))
}

/// Coefficients of the Eulerian polynomial `A_k(w) = Σ_j A(k, j) w^j`.
fn eulerian_row(k: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for n in 2..=k {
        let mut next = vec![0.0; n];
        for (j, slot) in next.iter_mut().enumerate() {
            let keep = if j < row.len() { (j + 1) as f64 * row[j] } else { 0.0 };
            let carry = if j >= 1 && j - 1 < row.len() {
                (n - j) as f64 * row[j - 1]
            } else {
                0.0
            };
            *slot = keep + carry;
        }
        row = next;
    }
    row
}

/// `Li_{-k}(w) = Σ_{j>=1} j^k w^j = w A_k(w)/(1 - w)^{k+1}`.
fn polylog_neg(k: usize, w: Complex64) -> Complex64 {
    if k == 0 {
        return w / (1.0 - w);
    }
    let a = eulerian_row(k)
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c);
    w * a / (1.0 - w).powi(k as i32 + 1)
}

/// `u^{(k)}(x)` for the Poisson density, any order.
pub fn poisson_u_derivative(eta: f64, x: f64, k: usize) -> Result<f64> {
    check_eta(eta)?;
    if k == 0 {
        return poisson_u(eta, x);
    }
    // d^k/dx^k 1/(1 - η e^{ix}) = i^k Li_{-k}(η e^{ix})
    let w = Complex64::from_polar(eta, x);
    let ik = Complex64::i().powi(k as i32);
    Ok((ik * polylog_neg(k, w)).re)
}

/// Finite-part value of `∫̄_{-π}^{π} cos((x-t)/2)/sin³((x-t)/2) · u(x) dx` for
/// the Poisson density: `4π Im[w(1+w)/(1-w)³]`, `w = η e^{it}`.
pub fn exact_supersingular(eta: f64, t: f64) -> Result<f64> {
    check_eta(eta)?;
    let w = Complex64::from_polar(eta, t);
    Ok(4.0 * PI * (w * (1.0 + w) / (1.0 - w).powi(3)).im)
}

/// Partial sum `4π Σ_{k=1}^{terms} η^k k² sin(kt)` of the same value.
pub fn exact_supersingular_series(eta: f64, t: f64, terms: usize) -> Result<f64> {
    check_eta(eta)?;
    let mut acc = 0.0;
    let mut p = 1.0;
    for k in 1..=terms {
        p *= eta;
        let kf = k as f64;
        acc += p * kf * kf * (kf * t).sin();
    }
    Ok(4.0 * PI * acc)
}

/// Bound on the tail of [`exact_supersingular_series`] after `terms` terms:
/// `4π |η|^{M+1} (M+1)² · 2/(1-|η|)`.
pub fn supersingular_series_tail_bound(eta: f64, terms: usize) -> f64 {
    let e = eta.abs();
    let next = (terms + 1) as f64;
    4.0 * PI * e.powf(next) * next * next * 2.0 / (1.0 - e)
}

/// `∫̄_0^{2π} cos((x-t)/2)/sin³((x-t)/2) e^{ikx} dx = -sgn(k) i 4π k² e^{ikt}`.
pub fn fourier_mode_hfp(mode: i64, t: f64) -> Complex64 {
    let k = mode as f64;
    let sgn = k.signum() * if mode == 0 { 0.0 } else { 1.0 };
    Complex64::new(0.0, -sgn * 4.0 * PI * k * k) * Complex64::from_polar(1.0, k * t)
}

/// `∫̄ θ_m(x - t) e^{2πikx/T} dx` over one period, for `m <= 4`.
///
/// With `T = 2π` the values are `2πi sgn(k)`, `-4π|k|`, `-4πi sgn(k) k²`
/// and `(8π/3)(|k|³ - |k|)` times `e^{ikt}`; each follows from the previous
/// one by differentiating in `t`. A general period rescales by `T/(2π)`.
pub fn theta_mode_hfp(m: u32, mode: i64, t: f64, period: f64) -> Result<Complex64> {
    let k = mode as f64;
    let ak = k.abs();
    let sgn = if mode == 0 { 0.0 } else { k.signum() };
    let base = match m {
        1 => Complex64::new(0.0, 2.0 * PI * sgn),
        2 => Complex64::new(-4.0 * PI * ak, 0.0),
        3 => Complex64::new(0.0, -4.0 * PI * sgn * k * k),
        4 => Complex64::new(8.0 * PI / 3.0 * (ak * ak * ak - ak), 0.0),
        _ => {
            return Err(HfpError::InvalidParameter(format!(
                "closed-form mode integrals are available for m <= 4, got {m}"
            )))
        }
    };
    let phase = Complex64::from_polar(1.0, 2.0 * PI * k * t / period);
    Ok(base * phase * (period / (2.0 * PI)))
}

/// `∫̄_a^b (x - t)^p dx`.
pub fn hfp_power_integral(p: i32, a: f64, b: f64, t: f64) -> f64 {
    if p == -1 {
        ((b - t) / (t - a)).ln()
    } else {
        let q = p + 1;
        ((b - t).powi(q) - (a - t).powi(q)) / q as f64
    }
}

/// Settings for [`hfp_reference`].
#[derive(Debug, Clone, Copy)]
pub struct ReferenceOptions {
    /// `K`: the subtracted polynomial has degree `m + K - 1`.
    pub smoothing_order: usize,
    /// Relative change between panel doublings accepted as converged.
    pub tol: f64,
    pub gauss_points: usize,
    pub max_panels: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            smoothing_order: 4,
            tol: 1e-12,
            gauss_points: 20,
            max_panels: 1 << 14,
        }
    }
}

/// Finite-part integral `∫̄_a^b g(x)/(x-t)^m dx` by Taylor subtraction.
///
/// `derivs[i] = g^{(i)}(t)`; at least `m + K` values (orders `0..m+K-1`) are
/// required. Any further values are used on a small interval around `t`,
/// where the remainder is summed from its Taylor series instead of being
/// formed by cancellation.
pub fn hfp_reference<G>(
    g: &G,
    derivs: &[f64],
    m: u32,
    a: f64,
    b: f64,
    t: f64,
    opts: &ReferenceOptions,
) -> Result<f64>
where
    G: Fn(f64) -> f64 + ?Sized,
{
    let coeffs: Vec<f64> = derivs
        .iter()
        .enumerate()
        .map(|(i, d)| d / factorial(i))
        .collect();
    reference_from_taylor(g, &coeffs, m, a, b, t, opts)
}

/// As [`hfp_reference`], with Taylor coefficients `c_i = g^{(i)}(t)/i!`.
pub fn reference_from_taylor<G>(
    g: &G,
    coeffs: &[f64],
    m: u32,
    a: f64,
    b: f64,
    t: f64,
    opts: &ReferenceOptions,
) -> Result<f64>
where
    G: Fn(f64) -> f64 + ?Sized,
{
    if m == 0 {
        return Err(HfpError::InvalidParameter("m must be >= 1".into()));
    }
    if !(a < t && t < b) {
        return Err(HfpError::InvalidParameter(format!(
            "need a < t < b, got a = {a}, t = {t}, b = {b}"
        )));
    }
    if opts.smoothing_order < 2 {
        return Err(HfpError::InvalidParameter("smoothing order K must be >= 2".into()));
    }
    if opts.gauss_points == 0 {
        return Err(HfpError::InvalidParameter("gauss_points must be >= 1".into()));
    }
    let mi = m as usize;
    let p = mi + opts.smoothing_order; // subtracted orders 0..p
    if coeffs.len() < p {
        return Err(HfpError::MissingDerivatives {
            needed: p - 1,
            available: coeffs.len(),
        });
    }
    let subtracted = &coeffs[..p];

    let closed: f64 = subtracted
        .iter()
        .enumerate()
        .map(|(i, c)| c * hfp_power_integral(i as i32 - m as i32, a, b, t))
        .sum();

    let delta = inner_radius(coeffs, mi, p, a, b, t);
    // ∫_{-δ}^{δ} Σ_{i>=p} c_i y^{i-m} dy
    let inner: f64 = coeffs
        .iter()
        .enumerate()
        .skip(p)
        .filter(|(i, _)| (i - mi) % 2 == 0)
        .map(|(i, c)| {
            let q = (i - mi + 1) as i32;
            2.0 * c * delta.powi(q) / q as f64
        })
        .sum();

    let remainder = |x: f64| {
        let y = x - t;
        let poly = subtracted.iter().rev().fold(0.0, |acc, c| acc * y + c);
        (g(x) - poly) / y.powi(m as i32)
    };
    let outer = panel_integral(&remainder, &[(a, t - delta), (t + delta, b)], opts)?;

    Ok(closed + inner + outer)
}

/// Radius of the interval around `t` handled by the Taylor tail: the
/// halving step from `min(T/64, distance to the ends / 2)` that balances
/// cancellation noise `~ u·|g|·δ^{1-m}` against the truncated tail.
fn inner_radius(coeffs: &[f64], m: usize, p: usize, a: f64, b: f64, t: f64) -> f64 {
    let period = b - a;
    let start = (period / 64.0).min(0.5 * (t - a)).min(0.5 * (b - t));
    let len = coeffs.len();
    let scale = coeffs[0].abs() + coeffs[1..].iter().take(2).map(|c| c.abs()).sum::<f64>();
    let scale = scale.max(f64::MIN_POSITIVE);
    let cost = |d: f64| {
        let noise = f64::EPSILON * scale * d.powi(1 - m as i32).max(1.0);
        let last = len - 1;
        let mut trunc = coeffs[last].abs() * d.powi((last + 1 - m) as i32);
        if last > p {
            trunc += coeffs[last - 1].abs() * d.powi((last - m) as i32);
        }
        noise + trunc
    };
    let mut best = start;
    let mut best_cost = cost(start);
    let mut d = start;
    for _ in 0..40 {
        d *= 0.5;
        let c = cost(d);
        if c < best_cost {
            best = d;
            best_cost = c;
        }
    }
    best
}

/// Gauss–Legendre panels on each segment, doubling the panel count until
/// the total changes by less than `tol · max(1, |Q|)`.
fn panel_integral<F>(f: &F, segments: &[(f64, f64)], opts: &ReferenceOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let degree = NonZeroUsize::new(opts.gauss_points)
        .ok_or_else(|| HfpError::InvalidParameter("gauss_points must be >= 1".into()))?;
    let rule = GaussLegendre::new(degree);
    let eval = |panels: usize| -> f64 {
        let mut total = 0.0;
        for &(lo, hi) in segments {
            if hi <= lo {
                continue;
            }
            let w = (hi - lo) / panels as f64;
            for k in 0..panels {
                let x0 = lo + k as f64 * w;
                let x1 = if k + 1 == panels { hi } else { x0 + w };
                total += rule.integrate(x0, x1, f);
            }
        }
        total
    };
    let mut panels = 1;
    let mut prev = eval(panels);
    let mut change = f64::INFINITY;
    while panels < opts.max_panels {
        panels *= 2;
        let cur = eval(panels);
        change = (cur - prev).abs();
        if change <= opts.tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(HfpError::ReferenceNotConverged {
        change,
        tol: opts.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_u(0.0, 1.234).unwrap(), 1.0);
        assert!((poisson_u(0.5, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((poisson_u(0.5, PI).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(poisson_u(1.0, 0.0), Err(HfpError::Domain(_))));
        assert!(matches!(exact_supersingular(-1.5, 0.0), Err(HfpError::Domain(_))));
    }

    #[test]
    fn poisson_derivatives_match_mode_sum() {
        for &(eta, x) in &[(0.3, 1.0), (0.5, -2.0), (-0.4, 0.3)] {
            for k in 0..12usize {
                let mut direct = 0.0;
                let mut magnitude = 0.0;
                let mut p = 1.0;
                for j in 0..400 {
                    let jf = j as f64;
                    let term = p * jf.powi(k as i32) * (jf * x + k as f64 * PI / 2.0).cos();
                    direct += term;
                    magnitude += term.abs();
                    p *= eta;
                }
                let v = poisson_u_derivative(eta, x, k).unwrap();
                // the direct sum itself is only good to a few ulps of its largest terms
                assert!(
                    (v - direct).abs() < 1e-14 * magnitude.max(1.0),
                    "eta={eta} x={x} k={k}: {v} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn supersingular_closed_form_matches_series() {
        for &eta in &[0.1, 0.3, 0.5, -0.6] {
            for &t in &[0.0, 0.4, 1.0, 2.5, -1.3] {
                let mut terms = 1;
                while supersingular_series_tail_bound(eta, terms) > 1e-16 {
                    terms += 1;
                }
                let closed = exact_supersingular(eta, t).unwrap();
                let series = exact_supersingular_series(eta, t, terms).unwrap();
                let bound = supersingular_series_tail_bound(eta, terms);
                assert!(
                    (closed - series).abs() <= bound + 1e-13 * closed.abs().max(1.0),
                    "eta={eta} t={t}: {closed} vs {series}"
                );
            }
        }
        assert_eq!(exact_supersingular(0.0, 1.0).unwrap(), 0.0);
        assert!(exact_supersingular(0.4, 0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn fourier_mode_examples() {
        assert_eq!(fourier_mode_hfp(0, 0.7), Complex64::new(0.0, 0.0));
        let v = fourier_mode_hfp(1, 0.0);
        assert!((v - Complex64::new(0.0, -4.0 * PI)).norm() < 1e-14);
        let v = fourier_mode_hfp(-2, 0.0);
        assert!((v - Complex64::new(0.0, 16.0 * PI)).norm() < 1e-13);
        for k in -4..=4 {
            let a = fourier_mode_hfp(k, 0.9);
            let b = theta_mode_hfp(3, k, 0.9, 2.0 * PI).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn power_integral_examples() {
        assert_eq!(hfp_power_integral(-3, 0.0, 2.0, 1.0), 0.0);
        assert!((hfp_power_integral(-1, 0.0, 3.0, 1.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(hfp_power_integral(0, 0.0, 2.0, 1.0), 2.0);
    }

    #[test]
    fn reference_examples() {
        let opts = ReferenceOptions::default();
        let v = hfp_reference(&|_| 1.0, &[1.0, 0.0, 0.0, 0.0, 0.0], 1, 0.0, 3.0, 1.0, &opts).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-12, "{v}");
        let v = hfp_reference(&|x| x, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0], 2, 0.0, 2.0, 1.0, &opts).unwrap();
        assert!((v + 2.0).abs() < 1e-12, "{v}");
        // integrand odd about t on a symmetric interval
        let g = |x: f64| (x - 0.5).cos();
        let d = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0];
        let v = hfp_reference(&g, &d, 3, -1.5, 2.5, 0.5, &opts).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
        let g = |x: f64| (x - 0.5).sin();
        let d = [0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0];
        let v = hfp_reference(&g, &d, 2, -1.5, 2.5, 0.5, &opts).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
    }

    #[test]
    fn reference_requires_enough_derivatives() {
        let opts = ReferenceOptions::default();
        assert!(matches!(
            hfp_reference(&|_| 1.0, &[1.0, 0.0, 0.0], 3, 0.0, 1.0, 0.5, &opts),
            Err(HfpError::MissingDerivatives { needed: 6, available: 3 })
        ));
    }

    #[test]
    fn eulerian_rows() {
        assert_eq!(eulerian_row(1), vec![1.0]);
        assert_eq!(eulerian_row(3), vec![1.0, 4.0, 1.0]);
        assert_eq!(eulerian_row(4), vec![1.0, 11.0, 11.0, 1.0]);
    }
}
