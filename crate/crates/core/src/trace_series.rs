//! Partial sums of `-Σ_n (1/n) tr{(P Q̄)^n}` for an occupied projection `P`
//! and an unoccupied projection `Q̄`.
//!
//! With `C` the block of overlaps between occupied and unoccupied vectors,
//! `tr{(P Q̄)^n} = tr{(C Cᵀ)^n}`, so everything reduces to the Gram matrix
//! `X = C Cᵀ`, whose eigenvalues lie in `[0, 1]`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    /// Partial sum `-Σ_{n≤n_max} (1/n) tr X^n`.
    pub value: f64,
    /// Bound on the omitted terms `n > n_max`.
    pub tail_bound: f64,
    /// Largest singular value of `P Q̄`.
    pub top_singular_value: f64,
    pub terms: usize,
}

fn top_eigenvalue(x: &DMatrix<f64>) -> Result<f64> {
    if x.nrows() == 0 {
        return Ok(0.0);
    }
    let eig = SymmetricEigen::try_new(x.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::numerical("symmetric eigensolver did not converge"))?;
    Ok(eig.eigenvalues.max().max(0.0))
}

fn tail(trace: f64, x_max: f64, n_max: usize) -> f64 {
    if trace == 0.0 {
        return 0.0;
    }
    trace * x_max.powi(n_max as i32) / ((n_max as f64 + 1.0) * (1.0 - x_max))
}

fn check_inputs(x: &DMatrix<f64>, n_max: usize) -> Result<f64> {
    if n_max == 0 {
        return Err(Error::precondition("series needs at least one term"));
    }
    if !x.is_square() {
        return Err(Error::precondition("Gram matrix must be square"));
    }
    let x_max = top_eigenvalue(x)?;
    if x_max >= 1.0 {
        return Err(Error::Divergence {
            singular_value: x_max.sqrt(),
        });
    }
    Ok(x_max)
}

/// Evaluates the series by repeated multiplication `X, X², X³, …`.
pub fn by_matrix_powers(x: &DMatrix<f64>, n_max: usize) -> Result<TraceSeries> {
    let x_max = check_inputs(x, n_max)?;
    let mut power = x.clone();
    let mut value = 0.0;
    for n in 1..=n_max {
        value -= power.trace() / n as f64;
        if n < n_max {
            power = &power * x;
        }
    }
    Ok(TraceSeries {
        value,
        tail_bound: tail(x.trace(), x_max, n_max),
        top_singular_value: x_max.sqrt(),
        terms: n_max,
    })
}

/// Evaluates the series through the eigenvalues of `X`, using
/// `tr X^n = Σ_i x_i^n`.
pub fn by_eigenvalues(x: &DMatrix<f64>, n_max: usize) -> Result<TraceSeries> {
    if n_max == 0 {
        return Err(Error::precondition("series needs at least one term"));
    }
    if x.nrows() == 0 {
        return Ok(TraceSeries {
            value: 0.0,
            tail_bound: 0.0,
            top_singular_value: 0.0,
            terms: n_max,
        });
    }
    let eig = SymmetricEigen::try_new(x.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::numerical("symmetric eigensolver did not converge"))?;
    let eigs: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let x_max = eigs.iter().copied().fold(0.0, f64::max);
    if x_max >= 1.0 {
        return Err(Error::Divergence {
            singular_value: x_max.sqrt(),
        });
    }
    let mut powers = eigs.clone();
    let mut value = 0.0;
    for n in 1..=n_max {
        let trace: f64 = powers.iter().sum();
        value -= trace / n as f64;
        for (p, e) in powers.iter_mut().zip(&eigs) {
            *p *= e;
        }
    }
    let trace: f64 = eigs.iter().sum();
    Ok(TraceSeries {
        value,
        tail_bound: tail(trace, x_max, n_max),
        top_singular_value: x_max.sqrt(),
        terms: n_max,
    })
}
