//! Integrands `f(x) = θ_m(x - t) u(x)` with a periodic density `u`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    check_eta, exact_supersingular, poisson_u, poisson_u_derivative, reference_from_taylor,
    theta_mode_hfp, ReferenceOptions,
};
use crate::error::{HfpError, Result};
use crate::quadrature::{factorial, Evaluator, PeriodicIntegrand};
use crate::series::PowerSeries;

/// Taylor terms of `g` used by the reference integrator.
const REFERENCE_TAYLOR_TERMS: usize = 40;

/// `u(x) = a_0 + Σ_{k>=1} a_k cos(kωx) + b_k sin(kωx)`, `ω = 2π/T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub period: f64,
    /// `a_0, a_1, …`
    pub cos: Vec<f64>,
    /// `b_1, b_2, …`
    pub sin: Vec<f64>,
}

impl TrigPolynomial {
    pub fn new(period: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(HfpError::InvalidParameter(format!("period must be > 0, got {period}")));
        }
        if cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(HfpError::InvalidParameter("coefficients must be finite".into()));
        }
        Ok(Self { period, cos, sin })
    }

    pub fn degree(&self) -> usize {
        self.cos.len().saturating_sub(1).max(self.sin.len())
    }

    fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `u^{(k)}(x)`.
    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        let w = self.omega();
        let shift = k as f64 * PI / 2.0;
        let mut acc = if k == 0 { self.cos.first().copied().unwrap_or(0.0) } else { 0.0 };
        for (j, a) in self.cos.iter().enumerate().skip(1) {
            let f = j as f64 * w;
            acc += a * f.powi(k as i32) * (f * x + shift).cos();
        }
        for (j, b) in self.sin.iter().enumerate() {
            let f = (j + 1) as f64 * w;
            acc += b * f.powi(k as i32) * (f * x + shift).sin();
        }
        acc
    }

    /// Complex coefficients `c_k` of `u = Σ c_k e^{ikωx}`.
    pub fn modes(&self) -> Vec<(i64, Complex64)> {
        let mut out = Vec::new();
        for k in 0..=self.degree() {
            let a = self.cos.get(k).copied().unwrap_or(0.0);
            let b = if k == 0 { 0.0 } else { self.sin.get(k - 1).copied().unwrap_or(0.0) };
            if k == 0 {
                out.push((0, Complex64::new(a, 0.0)));
            } else {
                out.push((k as i64, Complex64::new(a, -b) * 0.5));
                out.push((-(k as i64), Complex64::new(a, b) * 0.5));
            }
        }
        out
    }
}

/// The smooth factor `u(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `Σ_{k>=0} η^k cos(kωx)`
    Poisson { eta: f64 },
    Trig(TrigPolynomial),
}

impl Profile {
    pub fn poisson(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self::Poisson { eta })
    }

    /// `u^{(k)}(x)` for a density of period `period`.
    pub fn derivative(&self, x: f64, k: usize, period: f64) -> f64 {
        match self {
            Self::Poisson { eta } => {
                let w = 2.0 * PI / period;
                w.powi(k as i32) * poisson_u_derivative(*eta, w * x, k).unwrap_or(f64::NAN)
            }
            Self::Trig(p) => p.derivative(x, k),
        }
    }

    pub fn value(&self, x: f64, period: f64) -> f64 {
        match self {
            Self::Poisson { eta } => poisson_u(*eta, 2.0 * PI * x / period).unwrap_or(f64::NAN),
            Self::Trig(p) => p.value(x),
        }
    }
}

/// `f(x) = θ_m(x - t) u(x)` on `[a, b]`, `T = b - a`, with
/// `θ_m(y) = cos(πy/T)/sin^m(πy/T)` for odd `m` and `1/sin^m(πy/T)` for even `m`.
///
/// In the `g(x)/(x - t)^m` form, `g(x) = y^m θ_m(y) u(x)` with `y = x - t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCase {
    pub m: u32,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub profile: Profile,
}

impl ThetaCase {
    pub fn new(m: u32, t: f64, a: f64, b: f64, profile: Profile) -> Result<Self> {
        if m == 0 {
            return Err(HfpError::InvalidParameter("m must be >= 1".into()));
        }
        if !(a.is_finite() && b.is_finite() && a < t && t < b) {
            return Err(HfpError::InvalidParameter(format!(
                "need a < t < b, got a = {a}, t = {t}, b = {b}"
            )));
        }
        match &profile {
            Profile::Poisson { eta } => check_eta(*eta)?,
            Profile::Trig(p) => {
                if (p.period - (b - a)).abs() > 1e-12 * p.period {
                    return Err(HfpError::InvalidParameter(format!(
                        "density period {} differs from b - a = {}",
                        p.period,
                        b - a
                    )));
                }
            }
        }
        Ok(Self { m, t, a, b, profile })
    }

    pub fn period(&self) -> f64 {
        self.b - self.a
    }

    /// `θ_m(y)`.
    pub fn theta(&self, y: f64) -> f64 {
        let z = PI * y / self.period();
        let s = z.sin().powi(self.m as i32);
        if self.m % 2 == 1 {
            z.cos() / s
        } else {
            1.0 / s
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        self.theta(x - self.t) * self.profile.value(x, self.period())
    }

    pub fn g(&self, x: f64) -> f64 {
        g_value(self.m, self.t, self.period(), &self.profile, x)
    }

    pub fn evaluator(&self) -> Evaluator {
        let (m, t, period, profile) = (self.m, self.t, self.period(), self.profile.clone());
        Arc::new(move |x| g_value(m, t, period, &profile, x))
    }

    /// Taylor coefficients `c_i = g^{(i)}(t)/i!`, `i < len`.
    pub fn taylor(&self, len: usize) -> Vec<f64> {
        let len = len.max(1);
        let period = self.period();
        let c = PI / period;
        // (y / sin(cy))^m, times cos(cy) for odd m
        let mut kernel = PowerSeries::sinc_scaled(c, len).recip().powi(self.m);
        if self.m % 2 == 1 {
            kernel = &kernel * &PowerSeries::cos_scaled(c, len);
        }
        let u = PowerSeries::new(
            (0..len)
                .map(|k| self.profile.derivative(self.t, k, period) / factorial(k))
                .collect(),
        );
        (&kernel * &u).into_coeffs()
    }

    /// `[g(t), g'(t), …]`, `count` values.
    pub fn derivatives(&self, count: usize) -> Vec<f64> {
        self.taylor(count)
            .into_iter()
            .enumerate()
            .map(|(i, c)| c * factorial(i))
            .take(count)
            .collect()
    }

    /// The quadrature integrand with `deriv_count` derivative values attached
    /// (none when zero).
    pub fn integrand(&self, deriv_count: usize) -> Result<PeriodicIntegrand> {
        let base = PeriodicIntegrand::from_evaluator(self.m, self.t, self.a, self.b, self.evaluator())?;
        Ok(if deriv_count > 0 {
            base.with_derivatives(self.derivatives(deriv_count))
        } else {
            base
        })
    }

    /// Closed-form value for `m <= 4`, `None` otherwise.
    pub fn exact(&self) -> Result<Option<f64>> {
        if self.m > 4 {
            return Ok(None);
        }
        let period = self.period();
        let value = match &self.profile {
            Profile::Poisson { eta } if self.m == 3 => {
                let w = 2.0 * PI / period;
                exact_supersingular(*eta, w * self.t)? * period / (2.0 * PI)
            }
            Profile::Poisson { eta } => {
                let mut acc = theta_mode_hfp(self.m, 0, self.t, period)?.re;
                let mut p = 1.0;
                for k in 1..10_000i64 {
                    p *= eta;
                    let kf = k as f64;
                    if p.abs() * kf.powi(3) < 1e-20 {
                        break;
                    }
                    let pair = theta_mode_hfp(self.m, k, self.t, period)?
                        + theta_mode_hfp(self.m, -k, self.t, period)?;
                    acc += 0.5 * p * pair.re;
                }
                acc
            }
            Profile::Trig(poly) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, c) in poly.modes() {
                    acc += c * theta_mode_hfp(self.m, k, self.t, period)?;
                }
                acc.re
            }
        };
        Ok(Some(value))
    }

    /// Brute-force value from the Taylor-subtraction integrator.
    pub fn reference(&self, opts: &ReferenceOptions) -> Result<f64> {
        let coeffs = self.taylor(REFERENCE_TAYLOR_TERMS.max(self.m as usize + opts.smoothing_order));
        let g = |x: f64| self.g(x);
        reference_from_taylor(&g, &coeffs, self.m, self.a, self.b, self.t, opts)
    }
}

fn g_value(m: u32, t: f64, period: f64, profile: &Profile, x: f64) -> f64 {
    let y = x - t;
    let u = profile.value(x, period);
    if y == 0.0 {
        return (period / PI).powi(m as i32) * u;
    }
    let z = PI * y / period;
    let ratio = (y / z.sin()).powi(m as i32);
    if m % 2 == 1 {
        ratio * z.cos() * u
    } else {
        ratio * u
    }
}

/// `[a, a + T]` with `a ≡ -T/2 (mod T)` containing `t` in its interior, or
/// `[t - T/2, t + T/2]` when `t` falls on such an endpoint.
pub fn default_interval(t: f64, period: f64) -> (f64, f64) {
    let a = -0.5 * period + period * ((t + 0.5 * period) / period).floor();
    if a < t && t < a + period {
        (a, a + period)
    } else {
        (t - 0.5 * period, t + 0.5 * period)
    }
}

/// `f(x) = cos((x-t)/2)/sin³((x-t)/2) · u(x)` with the Poisson density,
/// `T = 2π`, on `[-π, π]` shifted by a period if needed to contain `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricKernelCase {
    pub eta: f64,
    pub t: f64,
}

impl GeometricKernelCase {
    pub const PERIOD: f64 = 2.0 * PI;

    pub fn new(eta: f64, t: f64) -> Result<Self> {
        check_eta(eta)?;
        if !t.is_finite() {
            return Err(HfpError::InvalidParameter("t must be finite".into()));
        }
        Ok(Self { eta, t })
    }

    pub fn exact(&self) -> Result<f64> {
        exact_supersingular(self.eta, self.t)
    }

    pub fn case(&self) -> ThetaCase {
        let (a, b) = default_interval(self.t, Self::PERIOD);
        ThetaCase {
            m: 3,
            t: self.t,
            a,
            b,
            profile: Profile::Poisson { eta: self.eta },
        }
    }

    /// `[g(t), …, g'''(t)] = 8 [u(t), …, u'''(t)]`.
    pub fn g_derivatives(&self) -> Vec<f64> {
        (0..4)
            .map(|i| 8.0 * poisson_u_derivative(self.eta, self.t, i).unwrap_or(f64::NAN))
            .collect()
    }

    /// Integrand carrying `g(t), …, g'''(t)`.
    pub fn integrand(&self) -> Result<PeriodicIntegrand> {
        Ok(self.case().integrand(0)?.with_derivatives(self.g_derivatives()))
    }
}
