//! Dense log-determinants and summation helpers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Growth factor above which partial pivoting is considered untrustworthy.
pub const GROWTH_LIMIT: f64 = 1e8;

/// Which pivoting strategy produced a [`LogDet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pivoting {
    Partial,
    Full,
}

/// Determinant in log-magnitude plus sign form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    /// `ln |det|`
    pub log_abs: f64,
    /// `+1.0` or `-1.0`
    pub sign: f64,
    /// `max |U_ij| / max |A_ij|` of the elimination that was kept.
    pub growth: f64,
    pub pivoting: Pivoting,
}

impl LogDet {
    /// The determinant itself; under/overflows for large matrices.
    pub fn value(&self) -> f64 {
        self.sign * self.log_abs.exp()
    }
}

/// `ln |det A|` by LU with partial pivoting, falling back to full pivoting
/// when the growth factor exceeds [`GROWTH_LIMIT`].
///
/// An empty matrix has determinant 1. A pivot that is exactly zero (or a
/// non-finite entry) is reported as a numerical failure, never as `-inf`.
pub fn log_det(a: &DMatrix<f64>) -> Result<LogDet> {
    if a.nrows() != a.ncols() {
        return Err(Error::precondition(format!(
            "determinant of a non-square {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite matrix entry"));
    }
    let partial = lu_log_det(a.clone(), Pivoting::Partial)?;
    if partial.growth <= GROWTH_LIMIT {
        return Ok(partial);
    }
    lu_log_det(a.clone(), Pivoting::Full)
}

/// LU elimination with an explicit pivoting strategy.
pub fn lu_log_det(mut a: DMatrix<f64>, pivoting: Pivoting) -> Result<LogDet> {
    let n = a.nrows();
    let scale = a.amax();
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    let mut u_max: f64 = 0.0;

    for k in 0..n {
        let (pr, pc) = match pivoting {
            Pivoting::Partial => {
                let mut best = k;
                for i in k + 1..n {
                    if a[(i, k)].abs() > a[(best, k)].abs() {
                        best = i;
                    }
                }
                (best, k)
            }
            Pivoting::Full => {
                let mut best = (k, k);
                for j in k..n {
                    for i in k..n {
                        if a[(i, j)].abs() > a[best].abs() {
                            best = (i, j);
                        }
                    }
                }
                best
            }
        };
        if pr != k {
            a.swap_rows(pr, k);
            sign = -sign;
        }
        if pc != k {
            a.swap_columns(pc, k);
            sign = -sign;
        }
        let pivot = a[(k, k)];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::numerical(format!(
                "matrix is singular to working precision (pivot {k} of {n})"
            )));
        }
        if pivot < 0.0 {
            sign = -sign;
        }
        log_abs += pivot.abs().ln();

        for i in k + 1..n {
            a[(i, k)] /= pivot;
        }
        for j in k + 1..n {
            let ukj = a[(k, j)];
            if ukj == 0.0 {
                continue;
            }
            // column-major: the inner loop walks contiguous memory
            let (head, tail) = a.as_mut_slice().split_at_mut(j * n);
            let lcol = &head[k * n + k + 1..k * n + n];
            let col = &mut tail[k + 1..n];
            for (c, l) in col.iter_mut().zip(lcol) {
                *c -= l * ukj;
            }
        }
        for j in k..n {
            u_max = u_max.max(a[(k, j)].abs());
        }
    }

    let growth = if scale > 0.0 { u_max / scale } else { 1.0 };
    Ok(LogDet {
        log_abs,
        sign,
        growth,
        pivoting,
    })
}

/// `ln |1 + x|`, accurate for small `x`.
pub fn ln_abs_1p(x: f64) -> f64 {
    if x > -1.0 {
        x.ln_1p()
    } else {
        (1.0 + x).abs().ln()
    }
}

/// Pairwise (cascade) summation; the reduction tree only depends on the
/// length of the input.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
