//! Closed forms of `T̂^(s)_{m,n}` for `m <= 4`, written as node families on
//! the finest substep `ĥ = h/d` plus derivative corrections at `t`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::{offset_sum, CompensatedSum, PeriodicIntegrand};
use crate::error::{HfpError, Result};

/// `rational · π^pi_power`, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiMultiple {
    pub rational: BigRational,
    pub pi_power: u32,
}

impl PiMultiple {
    fn new(num: i64, den: i64, pi_power: u32) -> Self {
        Self {
            rational: BigRational::new(BigInt::from(num), BigInt::from(den)),
            pi_power,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.rational.to_f64().unwrap_or(f64::NAN) * PI.powi(self.pi_power as i32)
    }
}

/// Adds `coeff · g^(order)(t) · h^power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivCorrection {
    pub order: usize,
    pub coeff: PiMultiple,
    pub power: i32,
}

/// Nodes `t + (first + stride·i)·ĥ`, `i = 0 .. per_n·n - deficit`, each with
/// weight `weight·ĥ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeFamily {
    pub first: usize,
    pub stride: usize,
    pub per_n: usize,
    pub deficit: usize,
    pub weight: BigRational,
}

impl NodeFamily {
    fn new(first: usize, stride: usize, per_n: usize, deficit: usize, num: i64, den: i64) -> Self {
        Self {
            first,
            stride,
            per_n,
            deficit,
            weight: BigRational::new(BigInt::from(num), BigInt::from(den)),
        }
    }

    pub fn count(&self, n: usize) -> usize {
        (self.per_n * n).saturating_sub(self.deficit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactRule {
    pub m: u32,
    pub s: u32,
    /// `ĥ = h / substeps`
    pub substeps: usize,
    pub families: Vec<NodeFamily>,
    pub deriv_corrections: Vec<DerivCorrection>,
}

/// Node layout of a compact rule at a given `n`, in units of `ĥ`.
#[derive(Debug, Clone, Serialize)]
pub struct NodeLayout {
    pub fine_step: f64,
    pub offsets: Vec<usize>,
    pub weights: Vec<f64>,
}

impl CompactRule {
    /// Highest derivative order the corrections read, if any.
    pub fn max_derivative(&self) -> Option<usize> {
        self.deriv_corrections.iter().map(|c| c.order).max()
    }

    pub fn is_derivative_free(&self) -> bool {
        self.deriv_corrections.is_empty()
    }

    pub fn layout(&self, n: usize, period: f64) -> NodeLayout {
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for fam in &self.families {
            let w = fam.weight.to_f64().unwrap_or(f64::NAN);
            for i in 0..fam.count(n) {
                offsets.push(fam.first + fam.stride * i);
                weights.push(w);
            }
        }
        NodeLayout {
            fine_step: period / (n * self.substeps) as f64,
            offsets,
            weights,
        }
    }

    pub fn evaluate(&self, integrand: &PeriodicIntegrand, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(HfpError::InvalidParameter("n must be >= 1".into()));
        }
        if integrand.m() != self.m {
            return Err(HfpError::InvalidParameter(format!(
                "compact rule for m = {} applied to an integrand with m = {}",
                self.m,
                integrand.m()
            )));
        }
        let period = integrand.period();
        let h = period / n as f64;
        let fine = h / self.substeps as f64;
        let needed = self.max_derivative().unwrap_or(0);

        let mut acc = CompensatedSum::default();
        for fam in &self.families {
            let s = offset_sum(integrand, n, self.substeps, fam.first, fam.stride, fam.count(n))?;
            acc.add(fam.weight.to_f64().unwrap_or(f64::NAN) * fine * s);
        }
        for c in &self.deriv_corrections {
            let gk = integrand.derivative(c.order, needed)?;
            acc.add(c.coeff.to_f64() * gk * h.powi(c.power));
        }
        Ok(acc.value())
    }
}

const COMPACT_PAIRS: [(u32, u32); 12] = [
    (1, 0),
    (1, 1),
    (2, 0),
    (2, 1),
    (2, 2),
    (3, 0),
    (3, 1),
    (3, 2),
    (4, 0),
    (4, 1),
    (4, 2),
    (4, 3),
];

pub fn is_compact_pair(m: u32, s: u32) -> bool {
    COMPACT_PAIRS.contains(&(m, s))
}

fn corr(order: usize, num: i64, den: i64, pi_power: u32, power: i32) -> DerivCorrection {
    DerivCorrection {
        order,
        coeff: PiMultiple::new(num, den, pi_power),
        power,
    }
}

/// `h Σ_{j=1}^{n-1} f(t + jh)`
fn plain() -> (usize, Vec<NodeFamily>) {
    (1, vec![NodeFamily::new(1, 1, 1, 1, 1, 1)])
}

/// `h Σ_{j=1}^{n} f(t + jh - h/2)`
fn midpoint() -> (usize, Vec<NodeFamily>) {
    (2, vec![NodeFamily::new(1, 2, 1, 0, 2, 1)])
}

/// `2h Σ_{j=1}^{n} f(t + jh - h/2) - (h/2) Σ_{j=1}^{2n} f(t + jh/2 - h/4)`
fn two_level() -> (usize, Vec<NodeFamily>) {
    (
        4,
        vec![
            NodeFamily::new(2, 4, 1, 0, 8, 1),
            NodeFamily::new(1, 2, 2, 0, -2, 1),
        ],
    )
}

/// `(16h/7) Σ_{n} f(t + jh - h/2) - (5h/7) Σ_{2n} f(t + jh/2 - h/4) + (h/28) Σ_{4n} f(t + jh/4 - h/8)`
fn three_level() -> (usize, Vec<NodeFamily>) {
    (
        8,
        vec![
            NodeFamily::new(4, 8, 1, 0, 128, 7),
            NodeFamily::new(2, 4, 2, 0, -40, 7),
            NodeFamily::new(1, 2, 4, 0, 2, 7),
        ],
    )
}

/// Descriptor for the tabulated pair `(m, s)`.
pub fn compact_rule(m: u32, s: u32) -> Result<CompactRule> {
    let ((substeps, families), deriv_corrections) = match (m, s) {
        (1, 0) => (plain(), vec![corr(1, 1, 1, 0, 1)]),
        (1, 1) => (midpoint(), vec![]),
        (2, 0) => (
            plain(),
            vec![corr(0, -1, 3, 2, -1), corr(2, 1, 2, 0, 1)],
        ),
        (2, 1) => (midpoint(), vec![corr(0, -1, 1, 2, -1)]),
        (2, 2) => (two_level(), vec![]),
        (3, 0) => (
            plain(),
            vec![corr(1, -1, 3, 2, -1), corr(3, 1, 6, 0, 1)],
        ),
        (3, 1) => (midpoint(), vec![corr(1, -1, 1, 2, -1)]),
        (3, 2) => (two_level(), vec![]),
        (4, 0) => (
            plain(),
            vec![
                corr(0, -1, 45, 4, -3),
                corr(2, -1, 6, 2, -1),
                corr(4, 1, 24, 0, 1),
            ],
        ),
        (4, 1) => (
            midpoint(),
            vec![corr(0, -1, 3, 4, -3), corr(2, -1, 2, 2, -1)],
        ),
        (4, 2) => (two_level(), vec![corr(0, 2, 1, 4, -3)]),
        (4, 3) => (three_level(), vec![]),
        _ => return Err(HfpError::UnsupportedCompactRule { m, s }),
    };
    Ok(CompactRule {
        m,
        s,
        substeps,
        families,
        deriv_corrections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supersingular_two_level_layout() {
        let rule = compact_rule(3, 2).unwrap();
        assert!(rule.is_derivative_free());
        let n = 5;
        let layout = rule.layout(n, 1.0);
        assert_eq!(rule.substeps, 4);
        let coarse: Vec<_> = layout
            .offsets
            .iter()
            .zip(&layout.weights)
            .filter(|(_, w)| **w == 8.0)
            .map(|(o, _)| *o)
            .collect();
        assert_eq!(coarse, (1..=n).map(|j| 4 * j - 2).collect::<Vec<_>>());
        let fine: Vec<_> = layout
            .offsets
            .iter()
            .zip(&layout.weights)
            .filter(|(_, w)| **w == -2.0)
            .map(|(o, _)| *o)
            .collect();
        assert_eq!(fine, (1..=2 * n).map(|j| 2 * j - 1).collect::<Vec<_>>());
    }

    #[test]
    fn tabulated_corrections() {
        let r21 = compact_rule(2, 1).unwrap();
        assert_eq!(r21.deriv_corrections, vec![corr(0, -1, 1, 2, -1)]);
        assert!((r21.deriv_corrections[0].coeff.to_f64() + PI * PI).abs() < 1e-15);

        let r42 = compact_rule(4, 2).unwrap();
        assert_eq!(r42.families.len(), 2);
        assert_eq!(r42.deriv_corrections.len(), 1);
        let c = &r42.deriv_corrections[0];
        assert_eq!((c.order, c.power), (0, -3));
        assert!((c.coeff.to_f64() - 2.0 * PI.powi(4)).abs() < 1e-12);

        let r11 = compact_rule(1, 1).unwrap();
        assert!(r11.is_derivative_free());
        assert_eq!(r11.families.len(), 1);
    }

    #[test]
    fn node_weights_sum_to_period() {
        // Each rule integrates the smooth part with total weight T.
        for &(m, s) in COMPACT_PAIRS.iter().filter(|p| p.1 > 0) {
            let rule = compact_rule(m, s).unwrap();
            let layout = rule.layout(6, 2.0);
            let total: f64 = layout.weights.iter().sum::<f64>() * layout.fine_step;
            assert!((total - 2.0).abs() < 1e-12, "({m},{s}): {total}");
        }
    }

    #[test]
    fn unsupported_pairs() {
        for (m, s) in [(1, 2), (3, 3), (5, 0), (0, 0)] {
            assert!(matches!(
                compact_rule(m, s),
                Err(HfpError::UnsupportedCompactRule { .. })
            ));
        }
    }
}
