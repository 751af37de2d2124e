//! Eigenvalue-only representation of the overlap determinant of a rank-one
//! perturbed pair, and the Cauchy determinant it rests on.
//!
//! For strictly interlacing spectra `a` (unperturbed) and `b` (perturbed),
//!
//! ```text
//! |det ⟨φ_j, ψ_k⟩|²_{j,k≤N} = ∏_{j≤N} ∏_{k>N} |b_k - a_j||a_k - b_j| / (|a_k - a_j||b_k - b_j|)
//! ```
//!
//! Each factor is `|1 + x_jk|` with
//! `x_jk = (b_k - a_k)(a_j - b_j) / ((a_k - a_j)(b_k - b_j))`, which is how it
//! is accumulated: the factors approach 1 like `1/(k-j)²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ln_abs_1p, pairwise_sum};

/// Access to an interlaced spectrum pair through the differences the
/// product formula needs. Indices are 1-based.
///
/// Implementors can compute these differences more accurately than by
/// subtracting stored eigenvalues.
pub trait Interlaced {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `b_n - a_n`
    fn shift(&self, n: usize) -> f64;

    /// `a_k - a_j`
    fn unperturbed_gap(&self, k: usize, j: usize) -> f64;

    /// `b_k - b_j`
    fn perturbed_gap(&self, k: usize, j: usize) -> f64;

    /// The factor excess `x_jk`; the product factor is `|1 + x_jk|`.
    fn factor_excess(&self, j: usize, k: usize) -> f64 {
        -self.shift(k) * self.shift(j) / (self.unperturbed_gap(k, j) * self.perturbed_gap(k, j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `b_1 > a_1 > b_2 > a_2 > ⋯` (eigenvalues of positive operators
    /// listed from the top).
    Decreasing,
    /// `b_1 < a_1 < b_2 < a_2 < ⋯` (Schrödinger levels listed from the
    /// bottom).
    Increasing,
}

/// Two finite eigenvalue sequences with their ordering convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPair {
    unperturbed: Vec<f64>,
    perturbed: Vec<f64>,
    orientation: Orientation,
}

impl SpectrumPair {
    /// Requires equal lengths and no value shared between the sequences.
    pub fn new(unperturbed: Vec<f64>, perturbed: Vec<f64>, orientation: Orientation) -> Result<Self> {
        if unperturbed.len() != perturbed.len() {
            return Err(Error::precondition(format!(
                "spectra of different lengths ({} vs {})",
                unperturbed.len(),
                perturbed.len()
            )));
        }
        for (j, a) in unperturbed.iter().enumerate() {
            for (k, b) in perturbed.iter().enumerate() {
                if a == b {
                    return Err(Error::precondition(format!(
                        "unperturbed value {} and perturbed value {} coincide ({a})",
                        j + 1,
                        k + 1
                    )));
                }
            }
        }
        Ok(SpectrumPair {
            unperturbed,
            perturbed,
            orientation,
        })
    }

    pub fn unperturbed(&self) -> &[f64] {
        &self.unperturbed
    }

    pub fn perturbed(&self) -> &[f64] {
        &self.perturbed
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Smallest gap between consecutive members of the merged sequence
    /// `b_1, a_1, b_2, a_2, ...`, signed so that strict interlacing in the
    /// pair's orientation gives a positive value.
    pub fn interlacing_margin(&self) -> f64 {
        let merged: Vec<f64> = self
            .perturbed
            .iter()
            .zip(&self.unperturbed)
            .flat_map(|(b, a)| [*b, *a])
            .collect();
        let sign = match self.orientation {
            Orientation::Decreasing => -1.0,
            Orientation::Increasing => 1.0,
        };
        merged
            .windows(2)
            .map(|w| sign * (w[1] - w[0]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_strictly_interlaced(&self) -> bool {
        self.interlacing_margin() > 0.0
    }
}

impl Interlaced for SpectrumPair {
    fn len(&self) -> usize {
        self.unperturbed.len()
    }

    fn shift(&self, n: usize) -> f64 {
        self.perturbed[n - 1] - self.unperturbed[n - 1]
    }

    fn unperturbed_gap(&self, k: usize, j: usize) -> f64 {
        self.unperturbed[k - 1] - self.unperturbed[j - 1]
    }

    fn perturbed_gap(&self, k: usize, j: usize) -> f64 {
        self.perturbed[k - 1] - self.perturbed[j - 1]
    }
}

/// `ln` of the double product over `j ≤ n`, `n < k ≤ k_max`.
///
/// Rows are accumulated in parallel and reduced pairwise, so the result does
/// not depend on the number of threads.
pub fn log_product<S: Interlaced + Sync + ?Sized>(spectra: &S, n: usize, k_max: usize) -> Result<f64> {
    if k_max > spectra.len() {
        return Err(Error::precondition(format!(
            "truncation {k_max} exceeds the {} available levels",
            spectra.len()
        )));
    }
    if n > k_max {
        return Err(Error::precondition(format!("N = {n} exceeds truncation {k_max}")));
    }
    let rows: Result<Vec<f64>> = (1..=n)
        .into_par_iter()
        .map(|j| {
            let terms: Vec<f64> = (n + 1..=k_max).map(|k| spectra.factor_excess(j, k)).collect();
            if let Some(pos) = terms.iter().position(|x| !x.is_finite() || *x == -1.0) {
                return Err(Error::precondition(format!(
                    "degenerate factor at (j, k) = ({j}, {}): eigenvalues coincide",
                    n + 1 + pos
                )));
            }
            let logs: Vec<f64> = terms.into_iter().map(ln_abs_1p).collect();
            Ok(pairwise_sum(&logs))
        })
        .collect();
    Ok(pairwise_sum(&rows?))
}

/// `|det ⟨φ_j, ψ_k⟩|²` from eigenvalues alone; exact for a finite pair
/// (`k` runs to the end of the sequences).
pub fn product_overlap(spectra: &SpectrumPair, n: usize) -> Result<f64> {
    if n > spectra.len() {
        return Err(Error::precondition(format!(
            "N = {n} exceeds dimension {}",
            spectra.len()
        )));
    }
    if !spectra.is_strictly_interlaced() {
        return Err(Error::precondition("spectra are not strictly interlaced"));
    }
    Ok(log_product(spectra, n, spectra.len())?.exp())
}

/// `ln |det(1/(b_k - a_j))|²` over the leading `n × n` block, by the
/// Cauchy closed form
/// `∏_{j≠k} |b_k - b_j||a_j - a_k| / ∏_{j,k} |b_k - a_j|²`.
pub fn log_cauchy_determinant(alphas: &[f64], betas: &[f64], n: usize) -> Result<f64> {
    if n > alphas.len() || n > betas.len() {
        return Err(Error::precondition(format!(
            "N = {n} exceeds the supplied sequences ({}, {})",
            alphas.len(),
            betas.len()
        )));
    }
    let (a, b) = (&alphas[..n], &betas[..n]);
    let mut numer = Vec::with_capacity(n * n);
    let mut denom = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let cross = (b[k] - a[j]).abs();
            if cross == 0.0 {
                return Err(Error::precondition(format!("beta_{} equals alpha_{}", k + 1, j + 1)));
            }
            denom.push(2.0 * cross.ln());
            if j != k {
                let db = (b[k] - b[j]).abs();
                let da = (a[j] - a[k]).abs();
                if db == 0.0 || da == 0.0 {
                    return Err(Error::precondition("sequence entries are not pairwise distinct"));
                }
                numer.push(db.ln() + da.ln());
            }
        }
    }
    Ok(pairwise_sum(&numer) - pairwise_sum(&denom))
}

/// `|det(1/(b_k - a_j))|²` over the leading `n × n` block.
pub fn cauchy_determinant(alphas: &[f64], betas: &[f64], n: usize) -> Result<f64> {
    log_cauchy_determinant(alphas, betas, n).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::log_det;
    use nalgebra::DMatrix;

    #[test]
    fn cauchy_one_by_one() {
        assert!((cauchy_determinant(&[2.0], &[3.0], 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cauchy_two_by_two_matches_direct_determinant() {
        let (a, b) = ([1.0, 2.0], [4.0, 6.0]);
        // det [[1/3, 1/5], [1/2, 1/4]] = 1/12 - 1/10
        let direct: f64 = 1.0 / 3.0 * 0.25 - 0.2 * 0.5;
        let value = cauchy_determinant(&a, &b, 2).unwrap();
        assert!((value - direct * direct).abs() < 1e-15);
    }

    #[test]
    fn cauchy_eight_by_eight_matches_lu() {
        let a: Vec<f64> = (0..8).map(|i| 0.3 + 1.1 * i as f64).collect();
        let b: Vec<f64> = (0..8).map(|i| 0.9 + 1.3 * i as f64 + 0.01 * (i * i) as f64).collect();
        let m = DMatrix::from_fn(8, 8, |j, k| 1.0 / (b[k] - a[j]));
        let lu = 2.0 * log_det(&m).unwrap().log_abs;
        let closed = log_cauchy_determinant(&a, &b, 8).unwrap();
        assert!((lu - closed).abs() < 1e-8 * closed.abs().max(1.0));
    }

    #[test]
    fn cauchy_rejects_coincidence() {
        assert!(matches!(
            cauchy_determinant(&[1.0, 2.0], &[2.0, 3.0], 2),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            cauchy_determinant(&[1.0, 1.0], &[2.0, 3.0], 2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn empty_product_is_one() {
        let pair = SpectrumPair::new(vec![2.0, 1.0], vec![3.0, 1.5], Orientation::Decreasing).unwrap();
        assert_eq!(product_overlap(&pair, 0).unwrap(), 1.0);
    }

    #[test]
    fn coincident_values_are_rejected() {
        let r = SpectrumPair::new(vec![3.0, 1.0], vec![4.0, 3.0], Orientation::Decreasing);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn non_interlaced_pair_is_rejected() {
        let pair = SpectrumPair::new(vec![3.0, 2.0], vec![4.0, 3.5], Orientation::Decreasing).unwrap();
        assert!(!pair.is_strictly_interlaced());
        assert!(product_overlap(&pair, 1).is_err());
    }

    #[test]
    fn two_level_closed_form() {
        // For two levels the single factor is (b2-a1)(a2-b1)/((a2-a1)(b2-b1)).
        let (a1, a2, b1, b2) = (2.0, 0.5, 3.0, 1.0);
        let pair = SpectrumPair::new(vec![a1, a2], vec![b1, b2], Orientation::Decreasing).unwrap();
        let expected = ((b2 - a1) * (a2 - b1) / ((a2 - a1) * (b2 - b1))).abs();
        assert!((product_overlap(&pair, 1).unwrap() - expected).abs() < 1e-15);
    }
}
