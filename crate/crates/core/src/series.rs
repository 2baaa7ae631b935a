//! Truncated power series in one variable with `f64` coefficients.

use std::ops::Mul;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
}

impl PowerSeries {
    /// Coefficients `c_0, c_1, …`; the series is truncated after `coeffs.len()` terms.
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "power series needs at least one term");
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `sin(a z)/z`, truncated to `len` terms.
    pub fn sinc_scaled(a: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        let mut term = a; // a^{2j+1}/(2j+1)!
        for (j, slot) in c.iter_mut().enumerate().step_by(2) {
            let p = j; // power of z
            *slot = term;
            let k = p as f64;
            term *= -a * a / ((k + 2.0) * (k + 3.0));
        }
        Self::new(c)
    }

    /// `cos(a z)`, truncated to `len` terms.
    pub fn cos_scaled(a: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        let mut term = 1.0;
        for (j, slot) in c.iter_mut().enumerate().step_by(2) {
            *slot = term;
            let k = j as f64;
            term *= -a * a / ((k + 1.0) * (k + 2.0));
        }
        Self::new(c)
    }

    /// `1/self`; requires a nonzero constant term.
    pub fn recip(&self) -> Self {
        let n = self.len();
        let c0 = self.coeffs[0];
        assert!(c0 != 0.0, "reciprocal of a series with zero constant term");
        let mut r = vec![0.0; n];
        r[0] = 1.0 / c0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.coeffs[j] * r[k - j]).sum();
            r[k] = -s / c0;
        }
        Self::new(r)
    }

    pub fn powi(&self, p: u32) -> Self {
        let mut acc = Self::new({
            let mut v = vec![0.0; self.len()];
            v[0] = 1.0;
            v
        });
        for _ in 0..p {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `z -> s z`.
    pub fn scale_argument(&self, s: f64) -> Self {
        let mut f = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * f;
                f *= s;
                v
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Value of the truncated series at `z`.
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    /// `d^k/dz^k` of the truncated series at `z`.
    pub fn eval_derivative(&self, k: usize, z: f64) -> f64 {
        let n = self.len();
        if k >= n {
            return 0.0;
        }
        let mut acc = 0.0;
        for j in (k..n).rev() {
            let falling: f64 = ((j - k + 1)..=j).map(|v| v as f64).product();
            acc = acc * z + self.coeffs[j] * falling;
        }
        acc
    }
}

impl Mul for &PowerSeries {
    type Output = PowerSeries;

    fn mul(self, rhs: &PowerSeries) -> PowerSeries {
        let n = self.len().min(rhs.len());
        let mut out = vec![0.0; n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            for (j, b) in rhs.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        PowerSeries::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_over_sin_z() {
        // z/sin z = 1 + z²/6 + 7 z⁴/360 + 31 z⁶/15120 + …
        let s = PowerSeries::sinc_scaled(1.0, 8).recip();
        let c = s.coeffs();
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!((c[2] - 1.0 / 6.0).abs() < 1e-15);
        assert!((c[4] - 7.0 / 360.0).abs() < 1e-15);
        assert!((c[6] - 31.0 / 15120.0).abs() < 1e-16);
        assert_eq!(c[1], 0.0);
    }

    #[test]
    fn cubed_cosine_ratio_has_no_quadratic_term() {
        // z³ cos z / sin³ z = 1 + O(z⁴)
        let len = 8;
        let r = PowerSeries::sinc_scaled(1.0, len).recip().powi(3);
        let g = &r * &PowerSeries::cos_scaled(1.0, len);
        assert!((g.coeffs()[0] - 1.0).abs() < 1e-15);
        for j in 1..4 {
            assert!(g.coeffs()[j].abs() < 1e-15, "c_{j} = {}", g.coeffs()[j]);
        }
        assert!((g.coeffs()[4] + 1.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_evaluation() {
        // 1 + 2z + 3z²
        let p = PowerSeries::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.eval_derivative(1, 2.0), 14.0);
        assert_eq!(p.eval_derivative(2, 2.0), 6.0);
        assert_eq!(p.eval_derivative(3, 2.0), 0.0);
    }
}
