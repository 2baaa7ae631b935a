//! Trapezoidal-type rules for Hadamard finite-part integrals
//! `∫̄_a^b g(x)/(x-t)^m dx` with a `T`-periodic integrand, `T = b - a`.
//!
//! `T̂^(0)_{m,n}` is the plain trapezoidal sum over the nodes `t + jh` with the
//! Euler–Maclaurin correction subtracted. Higher levels `T̂^(s)_{m,n}` combine
//! `T̂^(0)` at `n, 2n, …, 2^s n` so that the derivative corrections cancel one
//! power of `h` at a time; the compact forms in [`compact`] are the same rules
//! written directly as weighted offset sums.

mod compact;
mod extrapolation;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use compact::{compact_rule, is_compact_pair, CompactRule, DerivCorrection, NodeFamily, PiMultiple};
pub use extrapolation::{extrapolation_weights, ExtrapolationWeights};

use crate::em_constants;
use crate::error::{HfpError, Result};

/// A scalar evaluator shared across threads.
pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `f(x) = g(x)/(x-t)^m`, `T`-periodic with fundamental interval `[a, b]`.
#[derive(Clone)]
pub struct PeriodicIntegrand {
    m: u32,
    t: f64,
    a: f64,
    b: f64,
    g: Evaluator,
    g_derivs: Option<Vec<f64>>,
}

impl fmt::Debug for PeriodicIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicIntegrand")
            .field("m", &self.m)
            .field("t", &self.t)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("g_derivs", &self.g_derivs)
            .finish_non_exhaustive()
    }
}

impl PeriodicIntegrand {
    pub fn new<G>(m: u32, t: f64, a: f64, b: f64, g: G) -> Result<Self>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_evaluator(m, t, a, b, Arc::new(g))
    }

    pub fn from_evaluator(m: u32, t: f64, a: f64, b: f64, g: Evaluator) -> Result<Self> {
        if m == 0 {
            return Err(HfpError::InvalidParameter("singularity order m must be >= 1".into()));
        }
        if !(a.is_finite() && b.is_finite() && t.is_finite()) {
            return Err(HfpError::InvalidParameter("a, b and t must be finite".into()));
        }
        if !(a < t && t < b) {
            return Err(HfpError::InvalidParameter(format!(
                "singular point must satisfy a < t < b, got a = {a}, t = {t}, b = {b}"
            )));
        }
        Ok(Self {
            m,
            t,
            a,
            b,
            g,
            g_derivs: None,
        })
    }

    /// Attach `[g(t), g'(t), …]`.
    pub fn with_derivatives(mut self, derivs: Vec<f64>) -> Self {
        self.g_derivs = Some(derivs);
        self
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn period(&self) -> f64 {
        self.b - self.a
    }

    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    pub fn g_evaluator(&self) -> &Evaluator {
        &self.g
    }

    pub fn derivatives(&self) -> Option<&[f64]> {
        self.g_derivs.as_deref()
    }

    /// `g^(k)(t)`, or an error naming the highest order the caller needs.
    pub fn derivative(&self, k: usize, needed: usize) -> Result<f64> {
        let available = self.g_derivs.as_ref().map_or(0, Vec::len);
        self.g_derivs
            .as_ref()
            .and_then(|d| d.get(k).copied())
            .ok_or(HfpError::MissingDerivatives { needed, available })
    }

    pub fn wrap(&self, x: f64) -> f64 {
        wrap_to_fundamental(x, self.a, self.b)
    }

    /// `f(t + y)`; the denominator is formed from `y` directly so that nodes
    /// close to `t` do not lose digits to `x - t` cancellation.
    pub fn f_at_offset(&self, y: f64) -> f64 {
        let period = self.period();
        let x = self.t + y;
        let shifts = ((x - self.a) / period).floor();
        let mut x_hat = x - shifts * period;
        let mut d = y - shifts * period;
        if x_hat >= self.b {
            x_hat -= period;
            d -= period;
        } else if x_hat < self.a {
            x_hat += period;
            d += period;
        }
        (self.g)(x_hat) / d.powi(self.m as i32)
    }

    /// Offset of the node `t + kT/total` from `t` after wrapping into `[a, b)`.
    ///
    /// The index is reduced by whole periods before it is scaled, so a node
    /// that wraps around to just below `t` keeps full relative accuracy in
    /// its distance to `t`.
    pub fn node_offset(&self, k: i64, total: usize) -> f64 {
        let period = self.period();
        let n = total as i64;
        let y = k as f64 * period / total as f64;
        let shifts = ((self.t + y - self.a) / period).floor() as i64;
        let reduced = k - shifts * n;
        reduced as f64 * period / total as f64
    }

    /// `f(t + kT/total)`, see [`Self::node_offset`].
    pub fn f_at_node(&self, k: i64, total: usize) -> f64 {
        let d = self.node_offset(k, total);
        let x = (self.t + d).clamp(self.a, self.b);
        (self.g)(x) / d.powi(self.m as i32)
    }

    /// `f(x)`, with `x` first wrapped into `[a, b)`.
    pub fn f(&self, x: f64) -> f64 {
        self.f_at_offset(x - self.t)
    }
}

/// `x - kT ∈ [a, b)` for the unique integer `k`.
pub fn wrap_to_fundamental(x: f64, a: f64, b: f64) -> f64 {
    let period = b - a;
    let mut r = x - ((x - a) / period).floor() * period;
    if r >= b {
        r -= period;
    }
    if r < a {
        r += period;
    }
    r
}

/// Which evaluation route `t_hat` takes for `s >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RulePath {
    /// Closed-form offset sums (derivative-free where the rule allows it).
    Compact,
    /// `Σ_k α_k T̂^(0)_{m, 2^k n}`.
    Generic,
}

impl std::str::FromStr for RulePath {
    type Err = HfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compact" => Ok(Self::Compact),
            "generic" => Ok(Self::Generic),
            other => Err(HfpError::InvalidParameter(format!("unknown rule path '{other}'"))),
        }
    }
}

/// Selects `T̂^(s)_{m,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub m: u32,
    pub s: u32,
    pub n: usize,
    pub path: RulePath,
}

impl RuleSpec {
    pub fn new(m: u32, s: u32, n: usize, path: RulePath) -> Result<Self> {
        let spec = Self { m, s, n, path };
        spec.validate()?;
        Ok(spec)
    }

    /// Compact when the table has the pair, generic otherwise.
    pub fn preferred(m: u32, s: u32, n: usize) -> Result<Self> {
        let path = if is_compact_pair(m, s) {
            RulePath::Compact
        } else {
            RulePath::Generic
        };
        Self::new(m, s, n, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(HfpError::InvalidParameter("m must be >= 1".into()));
        }
        if self.n == 0 {
            return Err(HfpError::InvalidParameter("n must be >= 1".into()));
        }
        if self.path == RulePath::Compact && !is_compact_pair(self.m, self.s) {
            return Err(HfpError::UnsupportedCompactRule { m: self.m, s: self.s });
        }
        Ok(())
    }

    pub fn h(&self, period: f64) -> f64 {
        period / self.n as f64
    }
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `Σ f(t + (first + stride·i)·T/(n·d))` for `i = 0..count`, unscaled.
pub(crate) fn offset_sum(
    integrand: &PeriodicIntegrand,
    n: usize,
    divisor: usize,
    first: usize,
    stride: usize,
    count: usize,
) -> Result<f64> {
    let total = n * divisor;
    let mut acc = CompensatedSum::default();
    for i in 0..count {
        let k = (first + stride * i) as i64;
        let v = integrand.f_at_node(k, total);
        if !v.is_finite() {
            return Err(HfpError::EvaluationFailed {
                index: i,
                x: integrand.t() + integrand.node_offset(k, total),
            });
        }
        acc.add(v);
    }
    Ok(acc.value())
}

/// `T̃_{m,n}[f] = h Σ_{j=1}^{n-1} f(t + jh)`, `h = T/n`.
pub fn plain_trap_sum(integrand: &PeriodicIntegrand, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(HfpError::InvalidParameter("n must be >= 1".into()));
    }
    let h = integrand.period() / n as f64;
    Ok(h * offset_sum(integrand, n, 1, 1, 1, n - 1)?)
}

/// Offset sums on the refined half-step grids.
///
/// Level 1 is `h Σ_{j=1}^{n} f(t + jh - h/2)`, level 2 is
/// `(h/2) Σ_{j=1}^{2n} f(t + jh/2 - h/4)`, and in general level `L` uses step
/// `h/2^{L-1}` shifted by half a step.
pub fn midpoint_sum(integrand: &PeriodicIntegrand, n: usize, level: u32) -> Result<f64> {
    if n == 0 {
        return Err(HfpError::InvalidParameter("n must be >= 1".into()));
    }
    if level == 0 || level > 20 {
        return Err(HfpError::InvalidParameter(format!(
            "midpoint level must be in 1..=20, got {level}"
        )));
    }
    let d = 1usize << level; // finest substep h/d
    let step = integrand.period() / (n * (d / 2)) as f64;
    Ok(step * offset_sum(integrand, n, d, 1, 2, n * d / 2)?)
}

/// The finite Euler–Maclaurin correction that `T̃_{m,n}` carries:
///
/// * `m = 2r`:   `2 Σ_{i=0}^{r} g^{(2i)}(t)/(2i)! ζ(2r-2i) h^{-2r+2i+1}`
/// * `m = 2r+1`: `2 Σ_{i=0}^{r} g^{(2i+1)}(t)/(2i+1)! ζ(2r-2i) h^{-2r+2i+1}`
pub fn correction_sum(integrand: &PeriodicIntegrand, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(HfpError::InvalidParameter("n must be >= 1".into()));
    }
    let m = integrand.m() as usize;
    let h = integrand.period() / n as f64;
    let r = m / 2;
    let parity = m % 2; // derivative offset: even m uses g^(2i), odd m uses g^(2i+1)
    let mut acc = CompensatedSum::default();
    for i in 0..=r {
        let order = 2 * i + parity;
        let gk = integrand.derivative(order, m)?;
        let zeta = em_constants::zeta_at(2 * (r - i) as i64)?;
        let power = -2 * r as i32 + 2 * i as i32 + 1;
        acc.add(2.0 * gk / factorial(order) * zeta * h.powi(power));
    }
    Ok(acc.value())
}

/// `T̂^(0)_{m,n}[f] = T̃_{m,n}[f] - correction`.
fn t_hat_base(integrand: &PeriodicIntegrand, n: usize) -> Result<f64> {
    Ok(plain_trap_sum(integrand, n)? - correction_sum(integrand, n)?)
}

/// Evaluate `T̂^(s)_{m,n}[f]`.
pub fn t_hat(spec: &RuleSpec, integrand: &PeriodicIntegrand) -> Result<f64> {
    spec.validate()?;
    if spec.m != integrand.m() {
        return Err(HfpError::InvalidParameter(format!(
            "rule is for m = {} but the integrand has m = {}",
            spec.m,
            integrand.m()
        )));
    }
    if spec.s == 0 {
        return t_hat_base(integrand, spec.n);
    }
    match spec.path {
        RulePath::Compact => compact_rule(spec.m, spec.s)?.evaluate(integrand, spec.n),
        RulePath::Generic => {
            let weights = extrapolation_weights(spec.s);
            let mut acc = CompensatedSum::default();
            for (k, alpha) in weights.as_f64().iter().enumerate() {
                acc.add(alpha * t_hat_base(integrand, spec.n << k)?);
            }
            Ok(acc.value())
        }
    }
}

/// `K(n)·u·n²` with
/// `K(n) = 2ζ(3)‖g‖/T² + π²‖g'‖/(3Tn) + T‖g'''‖/(6n³)`,
/// the roundoff envelope of `T̂^(0)_{3,n}` in arithmetic with unit roundoff `u`.
pub fn roundoff_floor(g_norm: f64, gp_norm: f64, gppp_norm: f64, period: f64, n: usize, u: f64) -> f64 {
    let nf = n as f64;
    let zeta3 = em_constants::default_table().zeta3();
    let k = 2.0 * zeta3 / (period * period) * g_norm
        + std::f64::consts::PI.powi(2) / (3.0 * period * nf) * gp_norm
        + period / (6.0 * nf.powi(3)) * gppp_norm;
    k * u * nf * nf
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}
