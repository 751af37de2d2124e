//! Thermodynamic-limit sweeps, decay-exponent fits and the stage-by-stage
//! decomposition of `ln |S_L^N|²` into `-ζ(E) ln L + O(1)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delta_model::{particle_number_l0, phase_shift_unchecked, DeltaModel, ModeSpectrum, PerturbedMode};
use crate::error::{Error, Result};
use crate::linalg::{ln_abs_1p, pairwise_sum};
use crate::overlap_engine::{
    overlap_direct, overlap_product, overlap_trace_series, truncation_for_tail, Method, DEFAULT_SERIES_TERMS,
};
use crate::product::Interlaced;
use crate::quad::{integrate_2d, Tolerance};

fn check_energy(energy: f64) -> Result<()> {
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::precondition(format!("energy must be positive, got {energy}")));
    }
    Ok(())
}

/// Decay exponent `ζ(E) = δ_α(√E)²/π²`.
pub fn zeta(energy: f64, alpha: f64) -> Result<f64> {
    check_energy(energy)?;
    let d = phase_shift_unchecked(energy.sqrt(), alpha);
    Ok(d * d / (PI * PI))
}

/// The weaker exponent `γ(E) = arcsin(sin δ_α(√E))²/π²`, which equals `ζ`
/// for `δ ≤ π/2` and `(π - δ)²/π²` above.
pub fn gamma(energy: f64, alpha: f64) -> Result<f64> {
    check_energy(energy)?;
    let d = phase_shift_unchecked(energy.sqrt(), alpha);
    let folded = if d <= FRAC_PI_2 { d } else { PI - d };
    Ok(folded * folded / (PI * PI))
}

/// How the particle number grows with the box length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `N = ⌊√E·L/π⌋`
    #[default]
    Default,
    /// `N = ⌊√E·L/π⌋ + k`
    Offset(i64),
}

impl Schedule {
    /// Particle number at length `L`; at least two particles are required.
    pub fn particles(self, energy: f64, length: f64) -> Result<usize> {
        let base = particle_number_l0(energy, length)? as i64;
        let n = match self {
            Schedule::Default => base,
            Schedule::Offset(k) => base + k,
        };
        if n < 2 {
            return Err(Error::regime(format!(
                "schedule {self} gives N = {n} < 2 at L = {length}"
            )));
        }
        Ok(n as usize)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Default => f.write_str("default"),
            Schedule::Offset(k) => write!(f, "offset:{k}"),
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "default" {
            return Ok(Schedule::Default);
        }
        s.strip_prefix("offset:")
            .and_then(|k| k.parse().ok())
            .map(Schedule::Offset)
            .ok_or_else(|| Error::precondition(format!("invalid schedule '{s}' (expected default or offset:<int>)")))
    }
}

/// One point of a thermodynamic-limit sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub log_overlap_sq: f64,
    /// `ln |S|² / ln L`
    pub ratio: f64,
    /// Slope of `ln |S|²` against `ln L` from the previous record; absent for
    /// the first one.
    pub local_slope: Option<f64>,
    pub method: Method,
}

/// Builds records from precomputed values, filling in ratios and
/// consecutive-difference slopes.
pub fn records_from_values(points: &[(f64, usize, f64)], method: Method) -> Result<Vec<SweepRecord>> {
    let mut out: Vec<SweepRecord> = Vec::with_capacity(points.len());
    for &(length, n, value) in points {
        if !(length > 1.0) {
            return Err(Error::precondition(format!(
                "ratio ln|S|^2/ln L needs L > 1, got {length}"
            )));
        }
        let local_slope = out
            .last()
            .map(|prev| (value - prev.log_overlap_sq) / (length.ln() - prev.length.ln()));
        out.push(SweepRecord {
            length,
            n,
            log_overlap_sq: value,
            ratio: value / length.ln(),
            local_slope,
            method,
        });
    }
    Ok(out)
}

/// Parses `start:stop:factor` (geometric ladder) or a comma-separated list.
pub fn parse_lengths(text: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::precondition(format!("invalid length list '{text}': {what}"));
    let lengths: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:factor"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("non-numeric field"))?;
        let (start, stop, factor) = (nums[0], nums[1], nums[2]);
        if !(start > 0.0) || !(factor > 1.0) || !(stop >= start) || !stop.is_finite() {
            return Err(bad("need 0 < start <= stop and factor > 1"));
        }
        let mut out = Vec::new();
        let mut i = 0;
        loop {
            let l = start * factor.powi(i);
            if l > stop * (1.0 + 1e-12) {
                break;
            }
            out.push(l);
            i += 1;
        }
        out
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("non-numeric entry"))?
    };
    check_lengths(&lengths)?;
    Ok(lengths)
}

fn check_lengths(lengths: &[f64]) -> Result<()> {
    if lengths.is_empty() {
        return Err(Error::precondition("no lengths given"));
    }
    if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::precondition("lengths must be positive and finite"));
    }
    if lengths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::precondition("lengths must be strictly increasing"));
    }
    Ok(())
}

/// Engine settings shared by all points of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub method: Method,
    pub schedule: Schedule,
    /// `K = multiplier·N` for the truncated routes. Without it the product
    /// route picks `K` so that its tail bound is at most
    /// [`SWEEP_TAIL_TARGET`], and the trace route uses `K = 16N`.
    pub truncation_multiplier: Option<usize>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            method: Method::Direct,
            schedule: Schedule::Default,
            truncation_multiplier: None,
        }
    }
}

pub const SWEEP_TAIL_TARGET: f64 = 0.01;

fn evaluate(model: &DeltaModel, n: usize, settings: &SweepSettings) -> Result<f64> {
    let result = match settings.method {
        Method::Direct => overlap_direct(model, n)?,
        Method::Product => {
            let k = match settings.truncation_multiplier {
                Some(m) => m * n,
                None => truncation_for_tail(n, SWEEP_TAIL_TARGET)?,
            };
            overlap_product(model, n, k)?
        }
        Method::TraceSeries => {
            let k = settings.truncation_multiplier.unwrap_or(16) * n;
            overlap_trace_series(model, n, k, DEFAULT_SERIES_TERMS)?
        }
    };
    Ok(result.log_overlap_sq)
}

/// Evaluates `ln |S_L^N|²` along a ladder of lengths. Points are computed
/// concurrently; records come back ordered by `L`.
pub fn sweep(energy: f64, alpha: f64, lengths: &[f64], settings: &SweepSettings) -> Result<Vec<SweepRecord>> {
    check_energy(energy)?;
    check_lengths(lengths)?;
    let points: Result<Vec<(f64, usize, f64)>> = lengths
        .par_iter()
        .map(|&length| {
            let tag = format!("L = {length}");
            let model = DeltaModel::new(alpha, length, energy).map_err(|e| e.context(&tag))?;
            let n = settings.schedule.particles(energy, length).map_err(|e| e.context(&tag))?;
            let value = evaluate(&model, n, settings).map_err(|e| e.context(&tag))?;
            Ok((length, n, value))
        })
        .collect();
    records_from_values(&points?, settings.method)
}

/// Least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::precondition("line fit needs two or more paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::precondition("line fit needs distinct abscissae"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    Ok(LineFit {
        slope,
        intercept,
        residuals,
    })
}

/// Measured decay against the predicted exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub zeta: f64,
    pub gamma: f64,
    /// Least-squares slope of `ln |S|²` against `ln L`.
    pub fitted_slope_ls: f64,
    pub intercept_ls: f64,
    /// Consecutive-difference slope of the last two records.
    pub fitted_slope_diff: f64,
    /// Least-squares residuals, one per record.
    pub residuals: Vec<f64>,
}

impl ExponentReport {
    /// `|fitted_slope_diff + ζ| / ζ`
    pub fn relative_error(&self) -> f64 {
        (self.fitted_slope_diff + self.zeta).abs() / self.zeta
    }
}

/// Fits the decay exponent from sweep records of the model `(energy, alpha)`.
pub fn fit_exponent(records: &[SweepRecord], energy: f64, alpha: f64) -> Result<ExponentReport> {
    if records.len() < 3 {
        return Err(Error::precondition(format!(
            "exponent fit needs at least 3 records, got {}",
            records.len()
        )));
    }
    let xs: Vec<f64> = records.iter().map(|r| r.length.ln()).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.log_overlap_sq).collect();
    let line = fit_line(&xs, &ys)?;
    let m = records.len();
    let fitted_slope_diff = (ys[m - 1] - ys[m - 2]) / (xs[m - 1] - xs[m - 2]);
    Ok(ExponentReport {
        zeta: zeta(energy, alpha)?,
        gamma: gamma(energy, alpha)?,
        fitted_slope_ls: line.slope,
        intercept_ls: line.intercept,
        fitted_slope_diff,
        residuals: line.residuals,
    })
}

/// Knobs of [`appendix_decomposition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixSettings {
    /// The infinite `k`-sums of the linearised stages stop at
    /// `multiplier·N`; the omitted part is `O((N/K)²)` and stays bounded.
    pub truncation_multiplier: usize,
    /// Relative tolerance of the 2D quadratures.
    pub rel_tol: f64,
}

impl Default for AppendixSettings {
    fn default() -> Self {
        AppendixSettings {
            truncation_multiplier: 20,
            rel_tol: 1e-8,
        }
    }
}

/// The chain of approximations leading from `ln |S|²` to `-ζ ln L`.
///
/// All sums except `stage_exact` run over `2 ≤ j ≤ N`; the `j = 1` row of
/// the product is reported separately as `first_row`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixDecomposition {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    /// `ln |S|²` by the direct route.
    pub stage_exact: f64,
    /// First-order sum in the offsets `g_k = -δ(√μ_k)/π`.
    pub stage_linearized: f64,
    /// The same sum with `δ_k = -δ(√λ_k)/π`.
    pub stage_lambda: f64,
    /// `-Σ_{j≤N<k≤2N} 4jkδ_jδ_k/(k²-j²)²`
    pub stage_kernel: f64,
    /// `-(1/π²)∬ 4xy δ(πx)δ(πy)/(y²-x²)²`
    pub stage_integral: f64,
    /// `-ζ(E) ln L`
    pub stage_final: f64,
    /// `ln` of the `j = 1` row of the product, `k > N`.
    pub first_row: f64,
    /// `∬ 1/(y-x)²` over the same rectangle.
    pub bare_integral: f64,
}

impl AppendixDecomposition {
    pub const STAGE_NAMES: [&'static str; 6] = ["exact", "linearized", "lambda", "kernel", "integral", "final"];

    pub fn stages(&self) -> [f64; 6] {
        [
            self.stage_exact,
            self.stage_linearized,
            self.stage_lambda,
            self.stage_kernel,
            self.stage_integral,
            self.stage_final,
        ]
    }

    /// Differences of consecutive stages, `stage[i] - stage[i+1]`.
    pub fn adjacent_differences(&self) -> [f64; 5] {
        let s = self.stages();
        std::array::from_fn(|i| s[i] - s[i + 1])
    }

    pub fn bare_integral_minus_log_length(&self) -> f64 {
        self.bare_integral - self.length.ln()
    }
}

/// `-δ(√λ_k)/π` for `k = 1..=n`.
pub fn lambda_phase_sequence(alpha: f64, length: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| -phase_shift_unchecked(k as f64 * PI / length, alpha) / PI)
        .collect()
}

/// `-Σ_{j=2}^{N} Σ_{k=N+1}^{K} (2j a_j + a_j²)(2k a_k + a_k²)/(((k+a_k)² - (j+a_j)²)(k² - j²))`
/// for a sequence `a` indexed from 1.
fn linearized_sum(a: &[f64], n: usize, k_max: usize) -> f64 {
    let rows: Vec<f64> = (2..=n)
        .into_par_iter()
        .map(|j| {
            let aj = a[j - 1];
            let jf = j as f64;
            let left = 2.0 * jf * aj + aj * aj;
            let terms: Vec<f64> = (n + 1..=k_max)
                .map(|k| {
                    let ak = a[k - 1];
                    let kf = k as f64;
                    let right = 2.0 * kf * ak + ak * ak;
                    let shifted = ((kf + ak) - (jf + aj)) * ((kf + ak) + (jf + aj));
                    -left * right / (shifted * (kf - jf) * (kf + jf))
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows)
}

fn kernel_sum(d: &[f64], n: usize) -> f64 {
    let rows: Vec<f64> = (2..=n)
        .into_par_iter()
        .map(|j| {
            let jf = j as f64;
            let terms: Vec<f64> = (n + 1..=2 * n)
                .map(|k| {
                    let kf = k as f64;
                    let gap = (kf - jf) * (kf + jf);
                    -4.0 * jf * kf * d[j - 1] * d[k - 1] / (gap * gap)
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows)
}

/// Breakpoints `edge ± m/L` for `m = 1, 2, 4, …` inside `(lo, hi)`, which
/// resolve the `1/L`-wide peak near the corner of the rectangle.
fn corner_breakpoints(edge: f64, direction: f64, length: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut m = 1.0;
    loop {
        let p = edge + direction * m / length;
        if !(p > lo && p < hi) {
            break;
        }
        out.push(p);
        m *= 2.0;
    }
    out
}

fn rectangle_integral<F>(f: F, n: usize, length: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let x1 = n as f64 / length;
    let y0 = (n + 1) as f64 / length;
    let y1 = 2.0 * n as f64 / length;
    let x_breaks = corner_breakpoints(x1, -1.0, length, 0.0, x1);
    let y_breaks = corner_breakpoints(y0, 1.0, length, y0, y1);
    let tol = Tolerance {
        abs: 1e-12,
        rel: rel_tol,
        max_intervals: 4000,
    };
    integrate_2d(f, (0.0, x1), (y0, y1), &x_breaks, |_| y_breaks.clone(), tol).map(|e| e.value)
}

/// `ln` of the product row `j = 1`, `N < k ≤ K`.
fn first_row_log(spectrum: &ModeSpectrum, n: usize, k_max: usize) -> f64 {
    let logs: Vec<f64> = (n + 1..=k_max).map(|k| ln_abs_1p(spectrum.factor_excess(1, k))).collect();
    pairwise_sum(&logs)
}

/// Evaluates every stage at one length with the default particle number.
pub fn appendix_decomposition(
    energy: f64,
    alpha: f64,
    length: f64,
    settings: &AppendixSettings,
) -> Result<AppendixDecomposition> {
    let model = DeltaModel::new(alpha, length, energy)?;
    let n = model.default_particles()?;
    if n < 3 {
        return Err(Error::regime(format!("appendix stages need N >= 3, got {n} at L = {length}")));
    }
    if settings.truncation_multiplier < 2 {
        return Err(Error::precondition("appendix truncation multiplier must be at least 2"));
    }
    let k_max = settings.truncation_multiplier * n;

    let stage_exact = overlap_direct(&model, n)?.log_overlap_sq;

    let spectrum = ModeSpectrum::solve(&model.system, k_max)?;
    let g: Vec<f64> = spectrum
        .modes()
        .iter()
        .map(|m| match m {
            // the bound-state entry is never read: sums start at j = 2
            PerturbedMode::Bound(_) => f64::NAN,
            PerturbedMode::Scattering(s) => -s.offset / PI,
        })
        .collect();
    let stage_linearized = linearized_sum(&g, n, k_max);

    let d = lambda_phase_sequence(alpha, length, k_max);
    let stage_lambda = linearized_sum(&d, n, k_max);
    let stage_kernel = kernel_sum(&d, n);

    let delta = |x: f64| phase_shift_unchecked(x, alpha);
    let stage_integral = -rectangle_integral(
        |x, y| {
            let gap = (y - x) * (y + x);
            4.0 * x * y * delta(PI * x) * delta(PI * y) / (gap * gap)
        },
        n,
        length,
        settings.rel_tol,
    )? / (PI * PI);
    let bare_integral = rectangle_integral(|x, y| (y - x).powi(-2), n, length, settings.rel_tol)?;

    Ok(AppendixDecomposition {
        length,
        n,
        k: k_max,
        stage_exact,
        stage_linearized,
        stage_lambda,
        stage_kernel,
        stage_integral,
        stage_final: -zeta(energy, alpha)? * length.ln(),
        first_row: first_row_log(&spectrum, n, k_max),
        bare_integral,
    })
}

/// Decompositions along a ladder of lengths, computed concurrently.
pub fn appendix_ladder(
    energy: f64,
    alpha: f64,
    lengths: &[f64],
    settings: &AppendixSettings,
) -> Result<Vec<AppendixDecomposition>> {
    check_lengths(lengths)?;
    lengths
        .par_iter()
        .map(|&l| appendix_decomposition(energy, alpha, l, settings).map_err(|e| e.context(&format!("L = {l}"))))
        .collect()
}

/// Fitted slopes against `ln L` of each adjacent-stage difference and of
/// `stage_exact` itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSlopes {
    pub difference_slopes: [f64; 5],
    pub exact_slope: f64,
}

pub fn stage_slopes(ladder: &[AppendixDecomposition]) -> Result<StageSlopes> {
    let xs: Vec<f64> = ladder.iter().map(|d| d.length.ln()).collect();
    let diffs: Vec<[f64; 5]> = ladder.iter().map(|d| d.adjacent_differences()).collect();
    let mut difference_slopes = [0.0; 5];
    for (i, slot) in difference_slopes.iter_mut().enumerate() {
        let ys: Vec<f64> = diffs.iter().map(|d| d[i]).collect();
        *slot = fit_line(&xs, &ys)?.slope;
    }
    let exact: Vec<f64> = ladder.iter().map(|d| d.stage_exact).collect();
    Ok(StageSlopes {
        difference_slopes,
        exact_slope: fit_line(&xs, &exact)?.slope,
    })
}
