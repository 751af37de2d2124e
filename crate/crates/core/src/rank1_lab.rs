//! Finite-dimensional rank-one perturbations `B = A + φφᵀ`.
//!
//! Every identity that links the overlap determinant to eigenvalues is exact
//! for matrices, so this module checks each of them against brute-force
//! dense linear algebra: eigenvectors, Gram determinants and linear solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{log_det, pairwise_sum};
use crate::product::{Orientation, SpectrumPair};
use crate::trace_series::{self, TraceSeries};

pub const MIN_DIMENSION: usize = 2;
pub const MAX_DIMENSION: usize = 64;

const MAX_ATTEMPTS: usize = 64;
const SPECTRUM_LOW: f64 = 0.1;
const SPECTRUM_HIGH: f64 = 10.0;
const PERTURBATION_SCALE: f64 = 1.5;

/// Minimum relative gap between an eigenvalue and its neighbours, in the
/// base spectrum and in the merged interlaced sequence of a generated pair.
/// Eigenvectors lose about `ε/gap` digits, so this keeps the Gram and
/// residue identities checkable at the `1e-9` level.
pub const MIN_RELATIVE_GAP: f64 = 1e-6;

/// A positive-definite matrix and the vector of its rank-one perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedPair {
    base: DMatrix<f64>,
    perturbation: DVector<f64>,
    seed: Option<u64>,
}

/// Eigen-decomposition of both operators, eigenvalues decreasing.
#[derive(Debug, Clone)]
pub struct PairEigen {
    pub alphas: Vec<f64>,
    pub base_vectors: DMatrix<f64>,
    pub betas: Vec<f64>,
    pub perturbed_vectors: DMatrix<f64>,
}

impl PairEigen {
    pub fn spectra(&self) -> Result<SpectrumPair> {
        SpectrumPair::new(self.alphas.clone(), self.betas.clone(), Orientation::Decreasing)
    }
}

fn sorted_eigen(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, 1e-15, 10_000)
        .ok_or_else(|| Error::numerical("symmetric eigensolver did not converge"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Generates a reproducible pair: `A = Q D Qᵀ` with `Q` orthogonal from the
/// QR factorisation of a Gaussian matrix and `D` log-uniform on
/// `[0.1, 10]`, plus a Gaussian perturbation vector.
///
/// Candidates with nearly degenerate spectra, a perturbation nearly
/// orthogonal to some eigenvector, or weak interlacing are redrawn; after a
/// bounded number of attempts generation fails instead of returning a
/// degenerate pair.
pub fn generate_pair(dimension: usize, seed: u64) -> Result<PerturbedPair> {
    if !(MIN_DIMENSION..=MAX_DIMENSION).contains(&dimension) {
        return Err(Error::precondition(format!(
            "dimension {dimension} outside {MIN_DIMENSION}..={MAX_DIMENSION}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let gauss = DMatrix::from_fn(dimension, dimension, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = gauss.qr().q();
        let (ln_lo, ln_hi) = (SPECTRUM_LOW.ln(), SPECTRUM_HIGH.ln());
        let d = DVector::from_fn(dimension, |_, _| rng.random_range(ln_lo..ln_hi).exp());
        let a = &q * DMatrix::from_diagonal(&d) * q.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let scale = PERTURBATION_SCALE / (dimension as f64).sqrt();
        let phi = DVector::from_fn(dimension, |_, _| scale * rng.sample::<f64, _>(StandardNormal));

        let pair = match PerturbedPair::from_parts(a, phi) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let eig = pair.eigen()?;
        let radius = eig.betas[0].abs().max(eig.alphas[0].abs());
        let spectra = eig.spectra();
        match spectra {
            Ok(s) if s.interlacing_margin() > MIN_RELATIVE_GAP * radius => {
                return Ok(PerturbedPair {
                    seed: Some(seed),
                    ..pair
                })
            }
            _ => continue,
        }
    }
    Err(Error::numerical(format!(
        "could not generate a non-degenerate pair of dimension {dimension} from seed {seed}"
    )))
}

impl PerturbedPair {
    /// Validates symmetry, positivity, spectral gaps and cyclicity of an
    /// explicitly supplied pair.
    pub fn from_parts(base: DMatrix<f64>, perturbation: DVector<f64>) -> Result<Self> {
        let n = base.nrows();
        if !base.is_square() || perturbation.len() != n || n == 0 {
            return Err(Error::precondition("base matrix and perturbation shapes disagree"));
        }
        let asym = (&base - base.transpose()).amax();
        if asym > 1e-12 * base.amax() {
            return Err(Error::precondition(format!("base matrix is not symmetric (defect {asym:e})")));
        }
        let (alphas, vectors) = sorted_eigen(base.clone())?;
        let radius = alphas[0].abs().max(alphas[n - 1].abs());
        if alphas[n - 1] <= 0.0 {
            return Err(Error::precondition("base matrix is not positive definite"));
        }
        let min_gap = alphas.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
        if min_gap <= MIN_RELATIVE_GAP * radius {
            return Err(Error::precondition(format!(
                "base spectrum nearly degenerate (gap {min_gap:e})"
            )));
        }
        let norm = perturbation.norm();
        if norm == 0.0 {
            return Err(Error::precondition("perturbation vanishes"));
        }
        let components = vectors.transpose() * &perturbation;
        if components.iter().any(|c| c.abs() < 1e-6 * norm) {
            return Err(Error::precondition("perturbation is not cyclic for the base matrix"));
        }
        Ok(PerturbedPair {
            base,
            perturbation,
            seed: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.base.nrows()
    }

    pub fn base_matrix(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn perturbation(&self) -> &DVector<f64> {
        &self.perturbation
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `B = A + φφᵀ`
    pub fn perturbed_matrix(&self) -> DMatrix<f64> {
        &self.base + &self.perturbation * self.perturbation.transpose()
    }

    /// The same base matrix with the perturbation multiplied by `factor`.
    /// Only shape checks apply: a tiny perturbation leaves the two spectra
    /// indistinguishable in floating point.
    pub fn with_scaled_perturbation(&self, factor: f64) -> PerturbedPair {
        PerturbedPair {
            base: self.base.clone(),
            perturbation: &self.perturbation * factor,
            seed: self.seed,
        }
    }

    /// `(R A Rᵀ, R φ)` for an orthogonal `R`.
    pub fn conjugated(&self, rotation: &DMatrix<f64>) -> PerturbedPair {
        let base = rotation * &self.base * rotation.transpose();
        PerturbedPair {
            base: (&base + base.transpose()) * 0.5,
            perturbation: rotation * &self.perturbation,
            seed: self.seed,
        }
    }

    pub fn eigen(&self) -> Result<PairEigen> {
        let (alphas, base_vectors) = sorted_eigen(self.base.clone())?;
        let (betas, perturbed_vectors) = sorted_eigen(self.perturbed_matrix())?;
        Ok(PairEigen {
            alphas,
            base_vectors,
            betas,
            perturbed_vectors,
        })
    }
}

fn check_occupation(pair: &PerturbedPair, n: usize) -> Result<()> {
    if n > pair.dimension() {
        return Err(Error::precondition(format!(
            "N = {n} exceeds dimension {}",
            pair.dimension()
        )));
    }
    Ok(())
}

/// `ln |det ⟨φ_j, ψ_k⟩|²` over the top `n` eigenvectors of each matrix.
pub fn log_gram_overlap(pair: &PerturbedPair, n: usize) -> Result<f64> {
    check_occupation(pair, n)?;
    let eig = pair.eigen()?;
    let occupied_a = eig.base_vectors.columns(0, n);
    let occupied_b = eig.perturbed_vectors.columns(0, n);
    let gram = occupied_a.transpose() * occupied_b;
    Ok(2.0 * log_det(&gram)?.log_abs)
}

/// `|det ⟨φ_j, ψ_k⟩|²` from eigenvectors (dense eigendecomposition, then a
/// pivoted log-determinant).
pub fn gram_overlap(pair: &PerturbedPair, n: usize) -> Result<f64> {
    log_gram_overlap(pair, n).map(f64::exp)
}

/// One evaluation point of [`resolvent_product_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventSample {
    pub z: f64,
    /// `(⟨φ,(A-z)⁻¹φ⟩ + 1) / G(z)`
    pub a_ratio: f64,
    /// `(⟨φ,(B-z)⁻¹φ⟩ - 1) / F(z)`
    pub b_ratio: f64,
    /// `F(z)·G(z) - 1`
    pub product_defect: f64,
    /// `(⟨φ,(B-z)⁻¹φ⟩ - 1)(⟨φ,(A-z)⁻¹φ⟩ + 1) + 1`
    pub identity_defect: f64,
}

/// Constants `a`, `b` relating resolvent matrix elements to the eigenvalue
/// products `G(z) = ∏(β_k - z)/(α_k - z)` and `F(z) = ∏(α_k - z)/(β_k - z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventProductFit {
    pub a: f64,
    pub b: f64,
    pub samples: Vec<ResolventSample>,
}

impl ResolventProductFit {
    pub fn sample_points(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.z).collect()
    }

    pub fn max_ratio_spread(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.a_ratio - self.a).abs().max((s.b_ratio - self.b).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_product_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.product_defect.abs()).fold(0.0, f64::max)
    }

    pub fn max_identity_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.identity_defect.abs()).fold(0.0, f64::max)
    }
}

/// Twenty points log-spaced on `[-100, -0.5]`.
pub fn default_z_samples() -> Vec<f64> {
    let (lo, hi) = (0.5f64.ln(), 100f64.ln());
    (0..20).map(|i| -(lo + (hi - lo) * i as f64 / 19.0).exp()).collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// `⟨φ, (M - z)⁻¹ φ⟩` by a dense linear solve.
fn resolvent_element(m: &DMatrix<f64>, phi: &DVector<f64>, z: f64) -> Result<f64> {
    let shifted = m - DMatrix::identity(m.nrows(), m.ncols()) * z;
    let x = shifted
        .lu()
        .solve(phi)
        .ok_or_else(|| Error::numerical(format!("resolvent at z = {z} is singular")))?;
    Ok(phi.dot(&x))
}

pub fn resolvent_product_fit(pair: &PerturbedPair, sample_z: &[f64]) -> Result<ResolventProductFit> {
    if sample_z.is_empty() {
        return Err(Error::precondition("no sample points"));
    }
    let eig = pair.eigen()?;
    let bottom = eig.alphas.last().unwrap().min(*eig.betas.last().unwrap());
    let b_matrix = pair.perturbed_matrix();
    let phi = pair.perturbation();

    let mut samples = Vec::with_capacity(sample_z.len());
    for &z in sample_z {
        if !(z < bottom) {
            return Err(Error::precondition(format!(
                "z = {z} is not below both spectra (bottom {bottom})"
            )));
        }
        let g: f64 = eig
            .betas
            .iter()
            .zip(&eig.alphas)
            .map(|(b, a)| ((b - z) / (a - z)).ln())
            .sum::<f64>()
            .exp();
        let f: f64 = eig
            .alphas
            .iter()
            .zip(&eig.betas)
            .map(|(a, b)| ((a - z) / (b - z)).ln())
            .sum::<f64>()
            .exp();
        let lhs_a = resolvent_element(pair.base_matrix(), phi, z)? + 1.0;
        let lhs_b = resolvent_element(&b_matrix, phi, z)? - 1.0;
        samples.push(ResolventSample {
            z,
            a_ratio: lhs_a / g,
            b_ratio: lhs_b / f,
            product_defect: f * g - 1.0,
            identity_defect: lhs_b * lhs_a + 1.0,
        });
    }
    let a = median(&samples.iter().map(|s| s.a_ratio).collect::<Vec<_>>());
    let b = median(&samples.iter().map(|s| s.b_ratio).collect::<Vec<_>>());
    Ok(ResolventProductFit { a, b, samples })
}

/// Both sides of the residue identity for the weights of `φ` on the
/// eigenvectors: `(direct, from_eigenvalues)` with
///
/// ```text
/// direct           = |⟨φ_j, φ⟩|² |⟨ψ_k, φ⟩|²
/// from_eigenvalues = |β_j - α_j||α_k - β_k| ∏_{l≠j} |β_l - α_j|/|α_l - α_j|
///                                            ∏_{l≠k} |α_l - β_k|/|β_l - β_k|
/// ```
pub fn residue_weights(pair: &PerturbedPair, j: usize, k: usize) -> Result<(f64, f64)> {
    let dim = pair.dimension();
    if j == 0 || k == 0 || j > dim || k > dim {
        return Err(Error::precondition(format!("(j, k) = ({j}, {k}) outside 1..={dim}")));
    }
    let eig = pair.eigen()?;
    let phi = pair.perturbation();
    let wj = eig.base_vectors.column(j - 1).dot(phi);
    let wk = eig.perturbed_vectors.column(k - 1).dot(phi);
    let direct = (wj * wj) * (wk * wk);

    let (a, b) = (&eig.alphas, &eig.betas);
    let (j0, k0) = (j - 1, k - 1);
    let mut logs = vec![(b[j0] - a[j0]).abs().ln(), (a[k0] - b[k0]).abs().ln()];
    for l in (0..dim).filter(|&l| l != j0) {
        logs.push((b[l] - a[j0]).abs().ln() - (a[l] - a[j0]).abs().ln());
    }
    for l in (0..dim).filter(|&l| l != k0) {
        logs.push((a[l] - b[k0]).abs().ln() - (b[l] - b[k0]).abs().ln());
    }
    Ok((direct, pairwise_sum(&logs).exp()))
}

/// `-Σ_{n≤n_max} (1/n) tr{(P Q̄)^n}`, with `P` onto the top `n` eigenvectors
/// of `A` and `Q̄` onto the remaining eigenvectors of `B`.
pub fn trace_series_log_overlap(pair: &PerturbedPair, n: usize, n_max: usize) -> Result<TraceSeries> {
    check_occupation(pair, n)?;
    let dim = pair.dimension();
    let eig = pair.eigen()?;
    let occupied = eig.base_vectors.columns(0, n);
    let unoccupied = eig.perturbed_vectors.columns(n, dim - n);
    let block = occupied.transpose() * unoccupied;
    let gram = &block * block.transpose();
    trace_series::by_matrix_powers(&gram, n_max)
}

/// Tolerances of the property suite run by [`verify_properties`].
pub mod tolerance {
    /// `|ln product - ln gram| / max(1, |ln gram|)`
    pub const ORACLE: f64 = 1e-9;
    /// Interlacing margin relative to the spectral radius.
    pub const INTERLACING: f64 = 1e-10;
    pub const AB: f64 = 1e-8;
    pub const FG: f64 = 1e-10;
    pub const RESOLVENT_IDENTITY: f64 = 1e-9;
    pub const RESIDUE: f64 = 1e-9;
    /// Added to the reported geometric tail.
    pub const TRACE_SERIES: f64 = 1e-8;
    pub const BASIS: f64 = 1e-10;
}

/// Outcome of one property over every pair exercised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    /// Largest residual seen, in the units the tolerance is stated in. For
    /// `interlacing` this is the smallest relative margin instead, which
    /// must exceed the tolerance.
    pub max_residual: f64,
    pub tolerance: f64,
    pub cases: usize,
}

#[derive(Debug, Clone, Copy)]
struct Tally {
    worst: f64,
    cases: usize,
}

impl Default for Tally {
    fn default() -> Self {
        Tally {
            worst: f64::NEG_INFINITY,
            cases: 0,
        }
    }
}

impl Tally {
    fn record(&mut self, residual: f64) {
        // NaN residuals must fail the property, so they are kept as +inf.
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        self.worst = self.worst.max(r);
        self.cases += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.worst = self.worst.max(other.worst);
        self.cases += other.cases;
        self
    }
}

const PROPERTY_NAMES: [&str; 8] = [
    "product_equals_gram",
    "interlacing",
    "resolvent_ab",
    "resolvent_fg",
    "resolvent_identity",
    "residue_weights",
    "trace_series_converges",
    "basis_invariance",
];

const PROPERTY_TOLERANCES: [f64; 8] = [
    tolerance::ORACLE,
    tolerance::INTERLACING,
    tolerance::AB,
    tolerance::FG,
    tolerance::RESOLVENT_IDENTITY,
    tolerance::RESIDUE,
    tolerance::TRACE_SERIES,
    tolerance::BASIS,
];

fn random_rotation(dimension: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    DMatrix::from_fn(dimension, dimension, |_, _| rng.sample::<f64, _>(StandardNormal))
        .qr()
        .q()
}

fn check_pair(dimension: usize, seed: u64, z_samples: &[f64]) -> Result<[Tally; 8]> {
    let mut t = [Tally::default(); 8];
    let pair = generate_pair(dimension, seed)?;
    let eig = pair.eigen()?;
    let spectra = eig.spectra()?;

    let full_gram = eig.base_vectors.transpose() * &eig.perturbed_vectors;
    for n in 1..dimension {
        let gram = 2.0 * log_det(&full_gram.view((0, 0), (n, n)).into_owned())?.log_abs;
        let product = crate::product::log_product(&spectra, n, dimension)?;
        t[0].record((product - gram).abs() / gram.abs().max(1.0));
    }

    let radius = eig.betas[0].abs().max(eig.alphas[0].abs());
    // the margin must stay large, so its negative is the residual
    t[1].record(-spectra.interlacing_margin() / radius);

    let fit = resolvent_product_fit(&pair, z_samples)?;
    t[2].record((fit.a * fit.b + 1.0).abs());
    for s in &fit.samples {
        t[3].record(s.product_defect.abs());
        t[4].record(s.identity_defect.abs());
    }

    for j in 1..=dimension {
        for k in 1..=dimension {
            let (direct, from_eigs) = residue_weights(&pair, j, k)?;
            t[5].record((direct - from_eigs).abs() / direct.abs().max(from_eigs.abs()));
        }
    }

    let n = dimension / 2;
    let series = trace_series_log_overlap(&pair, n, 60)?;
    let exact = log_gram_overlap(&pair, n)?;
    t[6].record(((series.value - exact).abs() - series.tail_bound).max(0.0));

    let rotated = pair.conjugated(&random_rotation(dimension, seed));
    t[7].record((gram_overlap(&rotated, n)? - exact.exp()).abs());
    Ok(t)
}

/// Runs the finite-dimensional property suite over every dimension in
/// `dimensions` and every seed in `seeds`.
pub fn verify_properties(dimensions: std::ops::RangeInclusive<usize>, seeds: &[u64]) -> Result<Vec<PropertyCheck>> {
    let z = default_z_samples();
    let cases: Vec<(usize, u64)> = dimensions.flat_map(|d| seeds.iter().map(move |&s| (d, s))).collect();
    let tallies: Vec<[Tally; 8]> = cases
        .par_iter()
        .map(|&(d, s)| check_pair(d, s, &z).map_err(|e| e.context(&format!("dimension {d}, seed {s}"))))
        .collect::<Result<_>>()?;
    let totals = tallies.into_iter().fold([Tally::default(); 8], |acc, t| {
        std::array::from_fn(|i| acc[i].merge(t[i]))
    });
    Ok(totals
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let tol = PROPERTY_TOLERANCES[i];
            let (residual, passed) = if i == 1 {
                (-t.worst, -t.worst > tol)
            } else {
                (t.worst, t.worst <= tol)
            };
            PropertyCheck {
                name: PROPERTY_NAMES[i].to_string(),
                passed,
                max_residual: residual,
                tolerance: tol,
                cases: t.cases,
            }
        })
        .collect())
}
