use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact coefficients `α_0 … α_s` with `T̂^(s)_{m,n} = Σ_k α_k T̂^(0)_{m,2^k n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtrapolationWeights {
    weights: Vec<BigRational>,
}

impl ExtrapolationWeights {
    pub fn level(&self) -> u32 {
        (self.weights.len() - 1) as u32
    }

    pub fn exact(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn sum(&self) -> BigRational {
        self.weights.iter().fold(BigRational::zero(), |acc, w| acc + w)
    }
}

/// Power of `h` removed at elimination step `j` (1-based): `h^1, h^-1, h^-3, …`.
fn eliminated_power(j: u32) -> i32 {
    3 - 2 * j as i32
}

/// Weights for `s` elimination steps on the doubling sequence `n, 2n, …, 2^s n`.
///
/// A step that removes `c h^p` replaces `A_n` by
/// `(A_{2n} - 2^{-p} A_n) / (1 - 2^{-p})`; the weights are the coefficients
/// this recursion accumulates on the base sequence.
pub fn extrapolation_weights(s: u32) -> ExtrapolationWeights {
    let mut weights = vec![BigRational::one()];
    for j in 1..=s {
        let p = eliminated_power(j);
        // 2^{-p} as an exact rational
        let two = BigInt::from(2);
        let ratio = if p >= 0 {
            BigRational::new(BigInt::one(), num_traits::pow(two, p as usize))
        } else {
            BigRational::from_integer(num_traits::pow(two, (-p) as usize))
        };
        let denom = BigRational::one() - &ratio;
        let mut next = vec![BigRational::zero(); weights.len() + 1];
        for (k, w) in weights.iter().enumerate() {
            // coarse copy: -2^{-p} A_n ; fine copy: A_{2n} shifts the index by one
            next[k] -= &ratio * w;
            next[k + 1] += w;
        }
        weights = next.into_iter().map(|w| w / &denom).collect();
    }
    ExtrapolationWeights { weights }
}
