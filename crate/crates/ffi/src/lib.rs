//! C ABI over the `deltaoverlap` library.
//!
//! Every fallible function returns a [`DovStatus`] and writes its result
//! through an out-pointer. On failure the out-pointer is left untouched and
//! a description is available from [`dov_last_error_message`] on the same
//! thread. Models and spectra are opaque handles created by `*_new` /
//! `*_solve` and released with the matching `*_free`.
//!
//! Panics never cross the boundary; they are reported as
//! [`DovStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use deltaoverlap::delta_model::{phase_shift, DeltaBox, DeltaModel, ModeSpectrum};
use deltaoverlap::overlap_engine::{self, Method};
use deltaoverlap::{asymptotics, rank1_lab, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DovStatus {
    Ok = 0,
    /// An argument violates a precondition (for example `N > K`).
    InvalidArgument = 1,
    /// Parameters outside the supported regime, such as an attractive
    /// coupling too weak to bind in the given box.
    Regime = 2,
    /// Root finding, quadrature, a determinant or a series failed.
    Numerical = 3,
    /// A required pointer argument was null.
    NullPointer = 4,
    /// An internal panic was caught.
    Panic = 5,
}

/// Route used by [`dov_overlap`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DovMethod {
    Direct = 0,
    Product = 1,
    TraceSeries = 2,
}

impl From<DovMethod> for Method {
    fn from(m: DovMethod) -> Self {
        match m {
            DovMethod::Direct => Method::Direct,
            DovMethod::Product => Method::Product,
            DovMethod::TraceSeries => Method::TraceSeries,
        }
    }
}

/// Value returned by [`dov_overlap`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DovOverlap {
    /// `ln |S_L^N|²`
    pub log_overlap_sq: f64,
    /// Truncation error bound (zero for the direct route).
    pub tail_bound: f64,
    pub particles: usize,
    pub truncation: usize,
    pub method: DovMethod,
}

/// Coupling, box length and Fermi energy.
pub struct DovModel(DeltaModel);

/// Solved s-wave spectra of the free and perturbed operators.
pub struct DovSpectrum(ModeSpectrum);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DovStatus {
    match e {
        Error::Precondition(_) => DovStatus::InvalidArgument,
        Error::Regime(_) => DovStatus::Regime,
        _ => DovStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> DovStatus
where
    F: FnOnce() -> Result<(), DovStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DovStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            DovStatus::Panic
        }
    }
}

fn fail(e: Error) -> DovStatus {
    let status = status_of(&e);
    set_last_error(e.to_string());
    status
}

fn null(what: &str) -> DovStatus {
    set_last_error(format!("{what} is null"));
    DovStatus::NullPointer
}

/// Writes `value` through `out`.
///
/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn store<T>(out: *mut T, value: T, what: &str) -> Result<(), DovStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Borrows the object behind a handle.
///
/// # Safety
/// `handle` must be null or a live handle of the right type.
unsafe fn borrow<'a, T>(handle: *const T, what: &str) -> Result<&'a T, DovStatus> {
    handle.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null if none failed.
/// The string stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dov_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dov_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a model. Attractive couplings need `4π|alpha|·length > 1`.
///
/// # Safety
/// `out` must be valid for writing a pointer. The handle written there must
/// be released with [`dov_model_free`].
#[no_mangle]
pub unsafe extern "C" fn dov_model_new(alpha: f64, length: f64, energy: f64, out: *mut *mut DovModel) -> DovStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = DeltaModel::new(alpha, length, energy).map_err(fail)?;
        out.write(Box::into_raw(Box::new(DovModel(model))));
        Ok(())
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`dov_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dov_model_free(model: *mut DovModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Default particle number `⌊√E·L/π⌋` of the model.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dov_model_default_particles(model: *const DovModel, out: *mut usize) -> DovStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let n = m.0.default_particles().map_err(fail)?;
        store(out, n, "out")
    })
}

/// `ln |S_L^N|²` of the model with `particles` fermions.
///
/// `truncation` is the number of perturbed levels `K > N` used by the
/// product and trace routes and `terms` the number of trace-series terms;
/// both are ignored by the direct route.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dov_overlap(
    model: *const DovModel,
    method: DovMethod,
    particles: usize,
    truncation: usize,
    terms: usize,
    out: *mut DovOverlap,
) -> DovStatus {
    guard(|| {
        let m = &borrow(model, "model")?.0;
        let r = match method {
            DovMethod::Direct => overlap_engine::overlap_direct(m, particles),
            DovMethod::Product => overlap_engine::overlap_product(m, particles, truncation),
            DovMethod::TraceSeries => overlap_engine::overlap_trace_series(m, particles, truncation, terms),
        }
        .map_err(fail)?;
        store(
            out,
            DovOverlap {
                log_overlap_sq: r.log_overlap_sq,
                tail_bound: r.tail_bound,
                particles: r.n,
                truncation: r.k,
                method,
            },
            "out",
        )
    })
}

/// Scattering phase shift `δ_α(k)` for `k > 0`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dov_phase_shift(k: f64, alpha: f64, out: *mut f64) -> DovStatus {
    guard(|| store(out, phase_shift(k, alpha).map_err(fail)?, "out"))
}

/// Decay exponent `ζ(E) = δ_α(√E)²/π²`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dov_zeta(energy: f64, alpha: f64, out: *mut f64) -> DovStatus {
    guard(|| store(out, asymptotics::zeta(energy, alpha).map_err(fail)?, "out"))
}

/// The weaker exponent `γ(E)`, equal to `ζ(E)` when `δ_α(√E) ≤ π/2`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dov_gamma(energy: f64, alpha: f64, out: *mut f64) -> DovStatus {
    guard(|| store(out, asymptotics::gamma(energy, alpha).map_err(fail)?, "out"))
}

/// Solves levels `1..=modes` of both operators.
///
/// # Safety
/// `out` must be valid for writing a pointer. The handle must be released
/// with [`dov_spectrum_free`].
#[no_mangle]
pub unsafe extern "C" fn dov_spectrum_solve(
    alpha: f64,
    length: f64,
    modes: usize,
    out: *mut *mut DovSpectrum,
) -> DovStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let system = DeltaBox::new(alpha, length).map_err(fail)?;
        let spectrum = ModeSpectrum::solve(&system, modes).map_err(fail)?;
        out.write(Box::into_raw(Box::new(DovSpectrum(spectrum))));
        Ok(())
    })
}

/// Releases a spectrum; null is ignored.
///
/// # Safety
/// `spectrum` must be null or a handle from [`dov_spectrum_solve`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn dov_spectrum_free(spectrum: *mut DovSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of solved levels; 0 for a null handle.
///
/// # Safety
/// `spectrum` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dov_spectrum_len(spectrum: *const DovSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.n_max())
}

/// Level `n` (1-based): free eigenvalue `λ_n` and perturbed eigenvalue `μ_n`
/// (negative for the bound state).
///
/// # Safety
/// `spectrum` must be a live handle; `lambda` and `mu` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dov_spectrum_level(
    spectrum: *const DovSpectrum,
    n: usize,
    lambda: *mut f64,
    mu: *mut f64,
) -> DovStatus {
    guard(|| {
        let s = &borrow(spectrum, "spectrum")?.0;
        if n == 0 || n > s.n_max() {
            return Err(fail(Error::Precondition(format!("level {n} outside 1..={}", s.n_max()))));
        }
        if lambda.is_null() || mu.is_null() {
            return Err(null("lambda/mu"));
        }
        lambda.write(s.lambda(n));
        mu.write(s.mu(n));
        Ok(())
    })
}

/// Closed-form overlap `⟨φ_j, ψ_k⟩` of normalised eigenfunctions.
///
/// # Safety
/// `spectrum` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dov_spectrum_overlap_entry(
    spectrum: *const DovSpectrum,
    j: usize,
    k: usize,
    out: *mut f64,
) -> DovStatus {
    guard(|| {
        let s = &borrow(spectrum, "spectrum")?.0;
        store(out, s.overlap_entry(j, k).map_err(fail)?, "out")
    })
}

/// `|det ⟨φ_j, ψ_k⟩|²` over the top `n` eigenvectors of a random pair
/// `(A, A + φφᵀ)` generated from `seed`, by eigenvectors (`by_eigenvalues`
/// = 0) or by the eigenvalue-only product (`by_eigenvalues` ≠ 0).
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dov_random_pair_overlap(
    dimension: usize,
    seed: u64,
    n: usize,
    by_eigenvalues: i32,
    out: *mut f64,
) -> DovStatus {
    guard(|| {
        let pair = rank1_lab::generate_pair(dimension, seed).map_err(fail)?;
        let value = if by_eigenvalues != 0 {
            let spectra = pair.eigen().and_then(|e| e.spectra()).map_err(fail)?;
            deltaoverlap::product::product_overlap(&spectra, n).map_err(fail)?
        } else {
            rank1_lab::gram_overlap(&pair, n).map_err(fail)?
        };
        store(out, value, "out")
    })
}
