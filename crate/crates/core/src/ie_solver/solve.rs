use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::CollocationSystem;
use crate::error::{HfpError, Result};

/// Solution of a collocation system.
#[derive(Debug, Clone, Serialize)]
pub struct CollocationSolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `max_i |(K̂ φ̂ - w)_i|`
    pub residual: f64,
    /// 1-norm condition number `‖K̂‖₁ ‖K̂⁻¹‖₁`
    pub condition: f64,
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU solve with partial pivoting.
pub fn solve_collocation(system: &CollocationSystem) -> Result<CollocationSolution> {
    let a = &system.matrix;
    if !a.is_square() || a.nrows() != system.rhs.len() {
        return Err(HfpError::InvalidParameter(format!(
            "system is {}x{} with {} right-hand side values",
            a.nrows(),
            a.ncols(),
            system.rhs.len()
        )));
    }
    let lu = a.clone().lu();
    let inverse = lu
        .try_inverse()
        .ok_or(HfpError::SingularSystem { condition: f64::INFINITY })?;
    let condition = one_norm(a) * one_norm(&inverse);
    if !condition.is_finite() || condition * f64::EPSILON >= 1.0 {
        return Err(HfpError::SingularSystem { condition });
    }
    let w = DVector::from_column_slice(&system.rhs);
    let phi = lu
        .solve(&w)
        .ok_or(HfpError::SingularSystem { condition })?;
    let residual = (a * &phi - &w).amax();
    Ok(CollocationSolution {
        grid: system.grid.clone(),
        values: phi.iter().copied().collect(),
        residual,
        condition,
    })
}
