//! `ln |S_L^N|²` for the δ model by three independent routes.
//!
//! * [`overlap_direct`]: pivoted log-determinant of the `N × N` matrix of
//!   closed-form eigenfunction overlaps.
//! * [`overlap_product`]: the eigenvalue-only double product, truncated at
//!   `k ≤ K`, with a bound on the omitted factors.
//! * [`overlap_trace_series`]: `-Σ (1/n) tr{(B Bᵀ)^n}` over the
//!   occupied/unoccupied overlap block `B`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delta_model::{DeltaModel, ModeSpectrum};
use crate::error::{Error, Result};
use crate::linalg::log_det;
use crate::product::{log_product, Interlaced};
use crate::trace_series;

/// Slack on the bound `ln |S|² ≤ 0`.
pub const UNIT_BOUND_SLACK: f64 = 1e-9;

/// Default truncation multiplier of the product route, `K = 4N`.
pub const DEFAULT_TRUNCATION_MULTIPLIER: usize = 4;

/// Default number of trace-series terms.
pub const DEFAULT_SERIES_TERMS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Product,
    TraceSeries,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Direct, Method::Product, Method::TraceSeries];

    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Product => "product",
            Method::TraceSeries => "trace_series",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "product" => Ok(Method::Product),
            "trace" | "trace_series" => Ok(Method::TraceSeries),
            other => Err(Error::precondition(format!(
                "unknown method '{other}' (expected direct, product or trace)"
            ))),
        }
    }
}

/// One evaluation of `ln |S_L^N|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapResult {
    pub log_overlap_sq: f64,
    pub method: Method,
    #[serde(rename = "N")]
    pub n: usize,
    /// Number of perturbed levels used (`N` for the direct route).
    #[serde(rename = "K")]
    pub k: usize,
    /// Bound on `|exact - log_overlap_sq|` from truncation; zero for the
    /// direct route.
    pub tail_bound: f64,
    pub model: DeltaModel,
}

fn check_unit_bound(value: f64, method: Method) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::numerical(format!("{method} route produced {value}")));
    }
    if value > UNIT_BOUND_SLACK {
        return Err(Error::InvariantViolation(format!(
            "{method} route gave ln|S|^2 = {value:e} > 0"
        )));
    }
    Ok(value)
}

fn solved(model: &DeltaModel, depth: usize) -> Result<ModeSpectrum> {
    let spectrum = ModeSpectrum::solve(&model.system, depth)?;
    if !spectrum.is_interlaced() {
        return Err(Error::InvariantViolation(
            "solved spectra are not strictly interlaced".into(),
        ));
    }
    Ok(spectrum)
}

/// The `rows × cols` block of closed-form overlaps `⟨φ_j, ψ_k⟩` with
/// `j ∈ row_start+1 ..= row_start+rows`, `k ∈ col_start+1 ..= col_start+cols`.
pub fn overlap_block(
    spectrum: &ModeSpectrum,
    row_start: usize,
    rows: usize,
    col_start: usize,
    cols: usize,
) -> Result<DMatrix<f64>> {
    if row_start + rows > spectrum.n_max() || col_start + cols > spectrum.n_max() {
        return Err(Error::precondition(format!(
            "block exceeds the {} solved modes",
            spectrum.n_max()
        )));
    }
    let data: Result<Vec<Vec<f64>>> = (0..cols)
        .into_par_iter()
        .map(|c| {
            let k = col_start + c + 1;
            (0..rows)
                .map(|r| {
                    let j = row_start + r + 1;
                    spectrum.check_nondegenerate(j, k)?;
                    Ok(spectrum.entry_unchecked(j, k))
                })
                .collect()
        })
        .collect();
    let data: Vec<f64> = data?.into_iter().flatten().collect();
    Ok(DMatrix::from_vec(rows, cols, data))
}

/// Direct route: `2 ln |det ⟨φ_j, ψ_k⟩|` over `j, k ≤ N`.
pub fn overlap_direct(model: &DeltaModel, n: usize) -> Result<OverlapResult> {
    if n == 0 {
        return Err(Error::precondition("N must be at least 1"));
    }
    let spectrum = solved(model, n)?;
    let matrix = overlap_block(&spectrum, 0, n, 0, n)?;
    let det = log_det(&matrix)?;
    Ok(OverlapResult {
        log_overlap_sq: check_unit_bound(2.0 * det.log_abs, Method::Direct)?,
        method: Method::Direct,
        n,
        k: n,
        tail_bound: 0.0,
        model: *model,
    })
}

/// Bound on `|ln ∏_{j≤N, k>K} |1 + x_jk||` for the δ model.
///
/// Rows `j ≥ 2` (and `j = 1` without a bound state) obey
/// `|x_jk| ≤ 2/(k-j)²`, whose tail is at most `2/(K-j)` per row. The
/// bound-state row satisfies
/// `|x_1k| ≤ 2(λ_1 - μ_1)L²/(π²(k-1)³)`, summing to
/// `(λ_1 - μ_1)L²/(π²(K-1)²)`. The `1/(1 - max|x|)` factor converts the
/// bound on `Σ|x|` into one on `Σ|ln(1+x)|`.
pub fn product_tail_bound(spectrum: &ModeSpectrum, n: usize, k: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let first = first_bounded_row(spectrum);
    let mut sum: f64 = (first..=n).map(|j| 2.0 / (k - j) as f64).sum();
    let mut x_max = 2.0 / ((k + 1 - n) as f64).powi(2);
    if first == 2 {
        let length = spectrum.system().length();
        let c = (spectrum.lambda(1) - spectrum.mu(1)) * length * length / (std::f64::consts::PI.powi(2));
        let km1 = (k - 1) as f64;
        sum += c / (km1 * km1);
        x_max = x_max.max(2.0 * c / (km1 * km1 * km1));
    }
    if x_max >= 1.0 {
        return f64::INFINITY;
    }
    sum / (1.0 - x_max)
}

fn first_bounded_row(spectrum: &ModeSpectrum) -> usize {
    if spectrum.bound_state().is_some() {
        2
    } else {
        1
    }
}

/// Product route truncated at `K` perturbed levels.
pub fn overlap_product(model: &DeltaModel, n: usize, k: usize) -> Result<OverlapResult> {
    if k <= n {
        return Err(Error::precondition(format!("truncation K = {k} must exceed N = {n}")));
    }
    let spectrum = solved(model, k)?;
    let value = log_product(&spectrum, n, k)?;
    Ok(OverlapResult {
        log_overlap_sq: check_unit_bound(value, Method::Product)?,
        method: Method::Product,
        n,
        k,
        tail_bound: product_tail_bound(&spectrum, n, k),
        model: *model,
    })
}

/// Smallest `K` whose [`product_tail_bound`] is below `target`, from the
/// leading behaviour `2N/(K-N)`.
pub fn truncation_for_tail(n: usize, target: f64) -> Result<usize> {
    if !(target > 0.0) {
        return Err(Error::precondition("tail target must be positive"));
    }
    Ok(n + (2.0 * n as f64 / target).ceil() as usize + 1)
}

/// Trace-series route with a `K`-truncated unoccupied block and `n_max`
/// terms. The reported tail bound covers only the omitted series terms.
pub fn overlap_trace_series(model: &DeltaModel, n: usize, k: usize, n_max: usize) -> Result<OverlapResult> {
    if k <= n {
        return Err(Error::precondition(format!("truncation K = {k} must exceed N = {n}")));
    }
    let spectrum = solved(model, k)?;
    let block = overlap_block(&spectrum, 0, n, n, k - n)?;
    let gram = &block * block.transpose();
    let series = trace_series::by_eigenvalues(&gram, n_max)?;
    Ok(OverlapResult {
        log_overlap_sq: check_unit_bound(series.value, Method::TraceSeries)?,
        method: Method::TraceSeries,
        n,
        k,
        tail_bound: series.tail_bound,
        model: *model,
    })
}

/// Runs `method` with the default truncation `K = multiplier·N` and
/// [`DEFAULT_SERIES_TERMS`] series terms.
pub fn overlap(model: &DeltaModel, method: Method, n: usize, multiplier: usize) -> Result<OverlapResult> {
    if multiplier < 2 && method != Method::Direct {
        return Err(Error::precondition("truncation multiplier must be at least 2"));
    }
    match method {
        Method::Direct => overlap_direct(model, n),
        Method::Product => overlap_product(model, n, multiplier * n.max(1)),
        Method::TraceSeries => overlap_trace_series(model, n, multiplier * n.max(1), DEFAULT_SERIES_TERMS),
    }
}

/// Worst ratio `|x_jk|·(k-j)²/2` over the rows covered by the factor bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorBoundReport {
    pub max_ratio: f64,
    pub worst_j: usize,
    pub worst_k: usize,
    /// First row checked (`2` when the bound-state row is excluded).
    pub first_row: usize,
}

impl FactorBoundReport {
    pub fn holds(&self) -> bool {
        self.max_ratio <= 1.0
    }
}

/// Evaluates every factor excess for `j ≤ N < k ≤ K` against
/// `|x_jk| ≤ 2/(k-j)²`. The bound-state row has no such bound and is
/// skipped.
pub fn check_factor_bounds(spectrum: &ModeSpectrum, n: usize, k_max: usize) -> Result<FactorBoundReport> {
    if k_max > spectrum.n_max() || n >= k_max {
        return Err(Error::precondition("need N < K ≤ solved depth"));
    }
    let first = first_bounded_row(spectrum);
    let worst = (first..=n)
        .into_par_iter()
        .map(|j| {
            (n + 1..=k_max)
                .map(|k| {
                    let d = (k - j) as f64;
                    (spectrum.factor_excess(j, k).abs() * d * d / 2.0, j, k)
                })
                .fold((0.0, j, n + 1), |a, b| if b.0 > a.0 { b } else { a })
        })
        .reduce(|| (0.0, 0, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    Ok(FactorBoundReport {
        max_ratio: worst.0,
        worst_j: worst.1,
        worst_k: worst.2,
        first_row: first,
    })
}
