//! Bracketed root finding for monotone scalar equations.

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;

/// Fraction of the initial bracket that bisection reduces to before
/// switching to Newton steps.
const BISECTION_PHASE: f64 = 1e-3;

/// Finds the root of `f` inside `[lo, hi]`, where `f` returns the value and
/// the derivative.
///
/// The bracket must contain a sign change. The iteration bisects until the
/// bracket has shrunk by [`BISECTION_PHASE`], then takes Newton steps and
/// falls back to bisection whenever a step would leave the bracket. It stops
/// once a step is below `xtol` (absolute) or the function vanishes exactly.
pub fn newton_bisect<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::numerical(format!(
            "no sign change on bracket [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    let rising = flo < 0.0;
    let width0 = hi - lo;

    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERATIONS {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(Error::numerical(format!("non-finite residual at {x}")));
        }
        if (fx < 0.0) == rising {
            lo = x;
        } else {
            hi = x;
        }

        let newton = x - fx / dfx;
        let next = if hi - lo > BISECTION_PHASE * width0
            || !newton.is_finite()
            || newton <= lo
            || newton >= hi
        {
            0.5 * (lo + hi)
        } else {
            newton
        };
        let step = (next - x).abs();
        x = next;
        if step <= xtol || hi - lo <= xtol {
            return Ok(x);
        }
    }
    Err(Error::numerical(format!(
        "root finder did not converge in {MAX_ITERATIONS} iterations (bracket [{lo}, {hi}])"
    )))
}
