//! The s-wave channel of the free and δ-perturbed Laplacian on `(0, L)`.
//!
//! Both operators act as `-d²/dx²` with a Dirichlet condition at `L`. The
//! free one is Dirichlet at the origin, the perturbed one satisfies
//! `-4πα f(0+) + f'(0+) = 0`. Units are natural (`ħ = 2m = 1`), so an
//! eigenvalue `k²` has wavenumber `k`.
//!
//! Every positive perturbed eigenvalue is stored through its phase offset
//! `t_n = nπ - √μ_n·L`, which equals the phase shift `δ_α(√μ_n)`. Working
//! with offsets instead of raw eigenvalues keeps eigenvalue differences such
//! as `λ_k - μ_j` free of cancellation at large mode numbers.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::product::Interlaced;
use crate::roots::newton_bisect;

pub const FOUR_PI: f64 = 4.0 * PI;

/// Required margin of `4π|α|L` above 1 for attractive couplings.
pub const BOUND_STATE_MARGIN: f64 = 1e-6;

/// `λ_n = (nπ/L)²`, the Dirichlet eigenvalues of the free channel.
pub fn lambda_n(n: usize, length: f64) -> f64 {
    let k = n as f64 * PI / length;
    k * k
}

/// Scattering phase shift `δ_α(k)` of the s-wave δ interaction.
///
/// `arctan(k/(4πα))` for `α > 0`, `π - arctan(k/(4π|α|))` for `α < 0` and
/// `π/2` at `α = 0`. The result always lies in `(0, π)`.
pub fn phase_shift(k: f64, alpha: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::precondition(format!("phase shift needs k > 0, got {k}")));
    }
    Ok(phase_shift_unchecked(k, alpha))
}

pub(crate) fn phase_shift_unchecked(k: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        FRAC_PI_2
    } else if alpha > 0.0 {
        (k / (FOUR_PI * alpha)).atan()
    } else {
        PI - (k / (FOUR_PI * -alpha)).atan()
    }
}

/// `dδ_α/dk`.
pub fn phase_shift_derivative(k: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let c = FOUR_PI * alpha;
    let r = k / c;
    1.0 / (c * (1.0 + r * r))
}

/// Coupling and box length of the s-wave problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaBox {
    alpha: f64,
    length: f64,
}

impl DeltaBox {
    /// Validates `L > 0` and, for `α < 0`, the bound-state regime
    /// `4π|α|L > 1`. Below that threshold the box has no negative eigenvalue
    /// and the finite-volume problem is outside the supported regime.
    pub fn new(alpha: f64, length: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::precondition(format!("alpha must be finite, got {alpha}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::precondition(format!("length must be positive, got {length}")));
        }
        if alpha < 0.0 {
            let strength = FOUR_PI * -alpha * length;
            if strength <= 1.0 + BOUND_STATE_MARGIN {
                return Err(Error::regime(format!(
                    "attractive coupling needs 4π|alpha|L > 1 for a bound state, got 4π|alpha|L = {strength:.6} \
                     (alpha = {alpha}, length = {length})"
                )));
            }
        }
        Ok(DeltaBox { alpha, length })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn has_bound_state(&self) -> bool {
        self.alpha < 0.0
    }

    pub fn phase_shift(&self, k: f64) -> f64 {
        phase_shift_unchecked(k, self.alpha)
    }
}

/// The s-wave problem together with a Fermi energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaModel {
    #[serde(flatten)]
    pub system: DeltaBox,
    energy: f64,
}

impl DeltaModel {
    pub fn new(alpha: f64, length: f64, energy: f64) -> Result<Self> {
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::precondition(format!("energy must be positive, got {energy}")));
        }
        Ok(DeltaModel {
            system: DeltaBox::new(alpha, length)?,
            energy,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.system.alpha
    }

    pub fn length(&self) -> f64 {
        self.system.length
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Particle number of the default thermodynamic schedule.
    pub fn default_particles(&self) -> Result<usize> {
        particle_number_l0(self.energy, self.system.length)
    }
}

/// Default s-wave particle number `⌊√E·L/π⌋`.
pub fn particle_number_l0(energy: f64, length: f64) -> Result<usize> {
    if !(energy > 0.0) || !(length > 0.0) {
        return Err(Error::precondition(format!(
            "particle number needs E > 0 and L > 0, got E = {energy}, L = {length}"
        )));
    }
    let n = (energy.sqrt() * length / PI).floor();
    if n < 1.0 {
        return Err(Error::regime(format!(
            "no occupied s-wave level: floor(sqrt(E)·L/π) = 0 for E = {energy}, L = {length}"
        )));
    }
    Ok(n as usize)
}

/// A positive perturbed eigenvalue `μ_n = q²` with eigenfunction
/// `sin(q x + θ)/‖·‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMode {
    pub n: usize,
    /// `q = √μ_n`
    pub wavenumber: f64,
    /// `t_n = nπ - qL = δ_α(q)`
    pub offset: f64,
    /// Prüfer phase at the origin.
    pub theta: f64,
    /// `‖sin(q·+θ)‖₂`
    pub norm: f64,
}

/// The negative eigenvalue `μ_1 = -κ²` of an attractive coupling, with
/// eigenfunction `sinh(κ(L - x))/‖·‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMode {
    pub kappa: f64,
    /// `‖sinh(κ(L-·))‖₂ · e^{-κL}`; the exponential is factored out so
    /// deep bound states do not overflow.
    pub scaled_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbedMode {
    Bound(BoundMode),
    Scattering(ScatteringMode),
}

/// Solves the `n`-th positive perturbed eigenvalue.
///
/// The quantisation condition is `√μ_n·L + δ_α(√μ_n) = nπ`. It is solved for
/// the offset `t = δ_α((nπ - t)/L)` on `[0, π]`, which is monotone as long as
/// `4π|α|L > 1`. For `α < 0` the index `n = 1` belongs to the bound state and
/// is rejected here.
pub fn solve_scattering_mode(n: usize, system: &DeltaBox) -> Result<ScatteringMode> {
    if n == 0 {
        return Err(Error::precondition("mode index starts at 1"));
    }
    if system.has_bound_state() && n == 1 {
        return Err(Error::precondition(
            "for alpha < 0 the first perturbed level is the bound state",
        ));
    }
    let alpha = system.alpha;
    let length = system.length;
    let npi = n as f64 * PI;

    let offset = if alpha == 0.0 {
        FRAC_PI_2
    } else {
        newton_bisect(
            |t| {
                let k = (npi - t) / length;
                let h = t - phase_shift_unchecked(k, alpha);
                let dh = 1.0 + phase_shift_derivative(k, alpha) / length;
                (h, dh)
            },
            0.0,
            PI,
            1e-15,
        )?
    };
    let wavenumber = (npi - offset) / length;
    if !(wavenumber > 0.0) {
        return Err(Error::numerical(format!("mode {n} has non-positive wavenumber")));
    }
    let theta = if alpha < 0.0 { offset - PI } else { offset };
    let norm_sq = 0.5 * length + (2.0 * offset).sin() / (4.0 * wavenumber);
    Ok(ScatteringMode {
        n,
        wavenumber,
        offset,
        theta,
        norm: norm_sq.sqrt(),
    })
}

/// `μ_n` for a positive level.
pub fn solve_mu(n: usize, system: &DeltaBox) -> Result<f64> {
    let m = solve_scattering_mode(n, system)?;
    Ok(m.wavenumber * m.wavenumber)
}

/// Decay rate `κ` of the bound state, from `κ·coth(κL) = 4π|α|`.
pub fn solve_bound_state(system: &DeltaBox) -> Result<f64> {
    let alpha = system.alpha;
    let length = system.length;
    let c = FOUR_PI * -alpha;
    if !(alpha < 0.0) || c * length <= 1.0 {
        return Err(Error::regime(format!(
            "no bound state: needs alpha < 0 and 4π|alpha|L > 1 (alpha = {alpha}, length = {length})"
        )));
    }
    // Solve u·coth(u) = cL in u = κL; u ∈ (0, cL).
    let target = c * length;
    let u = newton_bisect(
        |u| {
            let (h, dh) = u_coth_u(u);
            (h - target, dh)
        },
        0.0,
        target,
        1e-15 * target,
    )?;
    Ok(u / length)
}

/// `u·coth(u)` and its derivative, with the `u → 0` limit handled.
fn u_coth_u(u: f64) -> (f64, f64) {
    if u < 1e-4 {
        let u2 = u * u;
        return (1.0 + u2 / 3.0 - u2 * u2 / 45.0, 2.0 * u / 3.0 - 4.0 * u2 * u / 45.0);
    }
    let coth = 1.0 / u.tanh();
    let csch2 = if u > 350.0 { 0.0 } else { 1.0 / u.sinh().powi(2) };
    (u * coth, coth - u * csch2)
}

fn bound_mode(system: &DeltaBox) -> Result<BoundMode> {
    let kappa = solve_bound_state(system)?;
    let length = system.length;
    let u = kappa * length;
    // ‖·‖² = (sinh(2u)/(2κ) - L)/2 = (L/2)·(sinh(2u)/(2u) - 1)
    let scaled_sq = if u < 0.5 {
        let w2 = 4.0 * u * u;
        let mut term = 1.0;
        let mut series = 0.0;
        for m in 1..20 {
            term *= w2 / ((2 * m) as f64 * (2 * m + 1) as f64);
            series += term;
        }
        0.5 * length * series * (-2.0 * u).exp()
    } else {
        -(-4.0 * u).exp_m1() / (8.0 * kappa) - 0.5 * length * (-2.0 * u).exp()
    };
    Ok(BoundMode {
        kappa,
        scaled_norm: scaled_sq.sqrt(),
    })
}

/// The solved s-wave spectra of both operators up to a truncation depth.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    system: DeltaBox,
    modes: Vec<PerturbedMode>,
}

impl ModeSpectrum {
    /// Solves modes `1..=n_max` of the perturbed operator. Roots are
    /// independent and solved in parallel.
    pub fn solve(system: &DeltaBox, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::precondition("spectrum needs at least one mode"));
        }
        let first = usize::from(system.has_bound_state()) + 1;
        let mut modes = Vec::with_capacity(n_max);
        if system.has_bound_state() {
            modes.push(PerturbedMode::Bound(bound_mode(system)?));
        }
        let scattering: Result<Vec<_>> = (first..=n_max)
            .into_par_iter()
            .map(|n| solve_scattering_mode(n, system).map(PerturbedMode::Scattering))
            .collect();
        modes.extend(scattering?);
        Ok(ModeSpectrum {
            system: *system,
            modes,
        })
    }

    pub fn system(&self) -> &DeltaBox {
        &self.system
    }

    pub fn n_max(&self) -> usize {
        self.modes.len()
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.modes.len() {
            return Err(Error::precondition(format!(
                "mode index {n} outside 1..={}",
                self.modes.len()
            )));
        }
        Ok(())
    }

    /// Mode `n` (1-based). Panics when out of range.
    pub fn mode(&self, n: usize) -> &PerturbedMode {
        &self.modes[n - 1]
    }

    pub fn modes(&self) -> &[PerturbedMode] {
        &self.modes
    }

    pub fn bound_state(&self) -> Option<BoundMode> {
        match self.modes.first() {
            Some(PerturbedMode::Bound(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn sqrt_lambda(&self, n: usize) -> f64 {
        n as f64 * PI / self.system.length
    }

    pub fn lambda(&self, n: usize) -> f64 {
        lambda_n(n, self.system.length)
    }

    pub fn mu(&self, n: usize) -> f64 {
        match self.mode(n) {
            PerturbedMode::Bound(b) => -b.kappa * b.kappa,
            PerturbedMode::Scattering(m) => m.wavenumber * m.wavenumber,
        }
    }

    /// Prüfer phase `θ_n`; `None` for the bound state.
    pub fn theta(&self, n: usize) -> Option<f64> {
        match self.mode(n) {
            PerturbedMode::Bound(_) => None,
            PerturbedMode::Scattering(m) => Some(m.theta),
        }
    }

    /// Residual of the quantisation condition, `√μ_n·L + δ_α(√μ_n) - nπ`
    /// for positive levels and `κ·coth(κL) - 4π|α|` for the bound state.
    pub fn residual(&self, n: usize) -> f64 {
        let length = self.system.length;
        match self.mode(n) {
            PerturbedMode::Bound(b) => {
                let (h, _) = u_coth_u(b.kappa * length);
                h / length - FOUR_PI * -self.system.alpha
            }
            PerturbedMode::Scattering(m) => {
                m.wavenumber * length + self.system.phase_shift(m.wavenumber) - n as f64 * PI
            }
        }
    }

    /// Strict interlacing `μ_1 < λ_1 < μ_2 < λ_2 < ⋯` over the solved prefix.
    pub fn is_interlaced(&self) -> bool {
        (1..=self.n_max()).all(|n| {
            let below = self.mu(n) < self.lambda(n);
            let above = n == self.n_max() || self.lambda(n) < self.mu(n + 1);
            below && above
        })
    }

    /// `(φ_n(x), ψ_n(x))`, the normalised free and perturbed eigenfunctions.
    pub fn eigenfunctions(&self, n: usize, x: f64) -> Result<(f64, f64)> {
        self.check_index(n)?;
        let length = self.system.length;
        if !(0.0..=length).contains(&x) {
            return Err(Error::precondition(format!("x = {x} outside [0, {length}]")));
        }
        let phi = (2.0 / length).sqrt() * (self.sqrt_lambda(n) * x).sin();
        let psi = match self.mode(n) {
            PerturbedMode::Scattering(m) => (m.wavenumber * x + m.theta).sin() / m.norm,
            PerturbedMode::Bound(b) => {
                // sinh(κ(L-x)) e^{-κL} = e^{-κx}(1 - e^{-2κ(L-x)})/2
                let decay = (-b.kappa * x).exp();
                -(-2.0 * b.kappa * (length - x)).exp_m1() * decay / (2.0 * b.scaled_norm)
            }
        };
        Ok((phi, psi))
    }

    /// `(φ_n'(x), ψ_n'(x))`.
    pub fn eigenfunction_derivatives(&self, n: usize, x: f64) -> Result<(f64, f64)> {
        self.check_index(n)?;
        let length = self.system.length;
        if !(0.0..=length).contains(&x) {
            return Err(Error::precondition(format!("x = {x} outside [0, {length}]")));
        }
        let p = self.sqrt_lambda(n);
        let dphi = (2.0 / length).sqrt() * p * (p * x).cos();
        let dpsi = match self.mode(n) {
            PerturbedMode::Scattering(m) => m.wavenumber * (m.wavenumber * x + m.theta).cos() / m.norm,
            PerturbedMode::Bound(b) => {
                let decay = (-b.kappa * x).exp();
                -b.kappa * (1.0 + (-2.0 * b.kappa * (length - x)).exp()) * decay / (2.0 * b.scaled_norm)
            }
        };
        Ok((dphi, dpsi))
    }

    /// `⟨φ_j, ψ_k⟩` in closed form.
    ///
    /// Green's identity reduces the integral to boundary terms; those at `L`
    /// vanish because `pL ∈ πℤ` and `qL + θ ∈ πℤ`, leaving
    /// `p·sin θ/(p² - q²)` for a positive level and `p·sinh(κL)/(p² + κ²)`
    /// for the bound state.
    pub fn overlap_entry(&self, j: usize, k: usize) -> Result<f64> {
        self.check_index(j)?;
        self.check_index(k)?;
        Ok(self.entry_unchecked(j, k))
    }

    pub(crate) fn entry_unchecked(&self, j: usize, k: usize) -> f64 {
        let length = self.system.length;
        let p = self.sqrt_lambda(j);
        let amp = (2.0 / length).sqrt();
        match self.mode(k) {
            PerturbedMode::Scattering(m) => {
                // p - q = ((j - k)π + t_k)/L without cancellation
                let diff = ((j as f64 - k as f64) * PI + m.offset) / length;
                amp * p * m.theta.sin() / (diff * (p + m.wavenumber) * m.norm)
            }
            PerturbedMode::Bound(b) => {
                let sinh_scaled = -(-2.0 * b.kappa * length).exp_m1() / 2.0;
                amp * p * sinh_scaled / ((p * p + b.kappa * b.kappa) * b.scaled_norm)
            }
        }
    }

    /// Guard for the degenerate denominator `p = q`, which interlacing rules
    /// out.
    pub(crate) fn check_nondegenerate(&self, j: usize, k: usize) -> Result<()> {
        if let PerturbedMode::Scattering(m) = self.mode(k) {
            let diff = (j as f64 - k as f64) * PI + m.offset;
            if diff == 0.0 {
                return Err(Error::InvariantViolation(format!(
                    "free level {j} coincides with perturbed level {k}"
                )));
            }
        }
        Ok(())
    }

    /// Defect of the first-order expansion of `δ_α(√μ_n)` around `√λ_n`,
    /// multiplied by `L`:
    /// `L·|δ(√μ_n) - δ(√λ_n) + δ'(√λ_n)·δ(√λ_n)/L|`.
    pub fn phase_expansion_defect(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        let m = match self.mode(n) {
            PerturbedMode::Scattering(m) => m,
            PerturbedMode::Bound(_) => {
                return Err(Error::precondition("phase expansion needs a non-negative level"))
            }
        };
        let length = self.system.length;
        let alpha = self.system.alpha;
        let k = self.sqrt_lambda(n);
        let d = phase_shift_unchecked(k, alpha);
        let dd = phase_shift_derivative(k, alpha);
        Ok((m.offset - d + dd * d / length).abs() * length)
    }
}

impl Interlaced for ModeSpectrum {
    fn len(&self) -> usize {
        self.n_max()
    }

    fn shift(&self, n: usize) -> f64 {
        let p = self.sqrt_lambda(n);
        match self.mode(n) {
            PerturbedMode::Bound(b) => -(b.kappa * b.kappa) - p * p,
            PerturbedMode::Scattering(m) => -(m.offset / self.system.length) * (m.wavenumber + p),
        }
    }

    fn unperturbed_gap(&self, k: usize, j: usize) -> f64 {
        let scale = PI / self.system.length;
        (k as f64 - j as f64) * (k + j) as f64 * scale * scale
    }

    fn perturbed_gap(&self, k: usize, j: usize) -> f64 {
        match (self.mode(k), self.mode(j)) {
            (PerturbedMode::Scattering(a), PerturbedMode::Scattering(b)) => {
                let diff = ((k as f64 - j as f64) * PI - (a.offset - b.offset)) / self.system.length;
                diff * (a.wavenumber + b.wavenumber)
            }
            _ => self.mu(k) - self.mu(j),
        }
    }
}
