//! Bernoulli numbers and the zeta values that enter the trapezoidal
//! correction sums.
//!
//! Bernoulli numbers are held as exact rationals and only converted to `f64`
//! when a zeta value is formed.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{HfpError, Result};

/// Default largest `k` for which `B_{2k}` and `ζ(2k)` are tabulated.
pub const DEFAULT_MAX_ORDER: usize = 16;

/// Tabulated Bernoulli numbers and zeta values. Immutable once built.
#[derive(Debug, Clone)]
pub struct ZetaTable {
    max_order: usize,
    /// `[ζ(0), ζ(2), …, ζ(2·max_order)]`
    even_values: Vec<f64>,
    zeta3: f64,
    /// `[B_0, B_2, B_4, …, B_{2·max_order}]`
    bernoulli_even: Vec<BigRational>,
}

impl ZetaTable {
    pub fn new(max_order: usize) -> Self {
        let all = bernoulli_sequence(2 * max_order);
        let bernoulli_even: Vec<BigRational> = all.into_iter().step_by(2).collect();

        let mut even_values = Vec::with_capacity(max_order + 1);
        even_values.push(-0.5);
        for k in 1..=max_order {
            even_values.push(zeta_even_from_bernoulli(k, &bernoulli_even[k]));
        }

        Self {
            max_order,
            even_values,
            zeta3: apery_constant(),
            bernoulli_even,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Exact `B_{2k}`.
    pub fn bernoulli_even(&self, k: usize) -> Result<BigRational> {
        self.bernoulli_even
            .get(k)
            .cloned()
            .ok_or(HfpError::OrderTooLarge {
                requested: k,
                max: self.max_order,
            })
    }

    /// `ζ(j)` for `j = 0`, even `j`, or `j = 3`.
    pub fn zeta_at(&self, j: i64) -> Result<f64> {
        match j {
            0 => Ok(-0.5),
            3 => Ok(self.zeta3),
            j if j < 0 && j % 2 == 0 => Ok(0.0),
            j if j > 0 && j % 2 == 0 => {
                let k = (j / 2) as usize;
                self.even_values
                    .get(k)
                    .copied()
                    .ok_or(HfpError::OrderTooLarge {
                        requested: k,
                        max: self.max_order,
                    })
            }
            _ => Err(HfpError::UnsupportedZetaArgument(j)),
        }
    }

    pub fn zeta3(&self) -> f64 {
        self.zeta3
    }

    pub fn even_values(&self) -> &[f64] {
        &self.even_values
    }
}

impl Default for ZetaTable {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_ORDER)
    }
}

/// Shared table with the default maximum order.
pub fn default_table() -> &'static ZetaTable {
    static TABLE: OnceLock<ZetaTable> = OnceLock::new();
    TABLE.get_or_init(ZetaTable::default)
}

/// Exact `B_{2k}` from the default table.
pub fn bernoulli_even(k: usize) -> Result<BigRational> {
    default_table().bernoulli_even(k)
}

/// `B_1 = -1/2`.
pub fn bernoulli_one() -> BigRational {
    BigRational::new(BigInt::from(-1), BigInt::from(2))
}

/// `ζ(j)` from the default table.
pub fn zeta_at(j: i64) -> Result<f64> {
    default_table().zeta_at(j)
}

/// `B_0 … B_max` from `Σ_{j=0}^{n} C(n+1, j) B_j = 0`.
fn bernoulli_sequence(max: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(max + 1);
    b.push(BigRational::one());
    for n in 1..=max {
        // row of C(n+1, j) for j = 0..n
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(n + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
    }
    b
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `ζ(2k) = (-1)^{k+1} (2π)^{2k} / (2 (2k)!) · B_{2k}`
fn zeta_even_from_bernoulli(k: usize, b2k: &BigRational) -> f64 {
    let mut scale = 0.5;
    for i in 1..=2 * k {
        scale *= 2.0 * PI / i as f64;
    }
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * scale * rational_to_f64(b2k)
}

/// `ζ(3)` from a partial sum with the Euler–Maclaurin tail.
fn apery_constant() -> f64 {
    const N: usize = 64;
    let n = N as f64;
    let tail = 1.0 / (2.0 * n * n) + 1.0 / (2.0 * n.powi(3)) + 1.0 / (4.0 * n.powi(4))
        - 1.0 / (12.0 * n.powi(6))
        + 1.0 / (12.0 * n.powi(8));
    // double-double accumulation, smallest terms first
    let (mut hi, mut lo) = (tail, 0.0f64);
    for k in (1..N).rev() {
        let c = (k as f64).powi(3); // exact
        let r = 1.0 / c;
        let r_lo = (-r).mul_add(c, 1.0) / c;
        let s = hi + r;
        let bb = s - hi;
        lo += (hi - (s - bb)) + (r - bb) + r_lo;
        hi = s;
    }
    hi + lo
}
