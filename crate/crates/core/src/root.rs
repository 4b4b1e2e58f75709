//! Bracketing bisection for monotone scalar functions.

use crate::error::{Error, Result};

/// Stopping rules for [`bisect`] and [`expand_upper`].
#[derive(Debug, Clone, Copy)]
pub struct BisectOptions {
    /// Stop once `|f(x)| <= residual_tol`.
    pub residual_tol: f64,
    pub max_iter: usize,
    pub max_doublings: usize,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-12,
            max_iter: 200,
            max_doublings: 200,
        }
    }
}

/// Grow `hi` by doubling (from `lo`) until `f(hi)` has the opposite sign of
/// `f(lo)`. Returns the bracket `(lo, hi)`, where `lo` is moved up to the
/// last sub-bracket point.
pub fn expand_upper<F>(f: &F, lo: f64, hi: f64, opts: &BisectOptions) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let f_lo = f(lo);
    let mut a = lo;
    let mut b = hi;
    for _ in 0..=opts.max_doublings {
        let f_b = f(b);
        if f_b == 0.0 || f_b.signum() != f_lo.signum() {
            return Ok((a, b));
        }
        a = b;
        b = lo + 2.0 * (b - lo);
        if !b.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence(format!(
        "no sign change found above {lo} after {} doublings",
        opts.max_doublings
    )))
}

/// Grow the symmetric bracket `[-w, w]` around 0 until `f` changes sign.
pub fn expand_symmetric<F>(f: &F, w0: f64, opts: &BisectOptions) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut w = w0;
    for _ in 0..=opts.max_doublings {
        let (fa, fb) = (f(-w), f(w));
        if fa == 0.0 || fb == 0.0 || fa.signum() != fb.signum() {
            return Ok((-w, w));
        }
        w *= 2.0;
    }
    Err(Error::NoConvergence(format!(
        "no sign change within ±{w} after {} doublings",
        opts.max_doublings
    )))
}

/// Bisection on a bracket `[lo, hi]` whose endpoint values differ in sign.
///
/// Returns the midpoint with the smallest residual seen. Stops on the
/// residual tolerance, on the iteration cap, or when the bracket can no
/// longer be split in floating point.
pub fn bisect<F>(f: &F, lo: f64, hi: f64, opts: &BisectOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut f_a = f(a);
    let f_b = f(b);
    if f_a == 0.0 {
        return Ok(a);
    }
    if f_b == 0.0 {
        return Ok(b);
    }
    if f_a.signum() == f_b.signum() {
        return Err(Error::NoConvergence(format!(
            "bracket [{lo}, {hi}] does not straddle a root ({f_a}, {f_b})"
        )));
    }
    let mut best = (f64::INFINITY, a);
    for _ in 0..opts.max_iter {
        let mid = 0.5 * (a + b);
        let f_mid = f(mid);
        if f_mid.abs() < best.0 {
            best = (f_mid.abs(), mid);
        }
        if f_mid.abs() <= opts.residual_tol || mid <= a || mid >= b {
            break;
        }
        if f_mid.signum() == f_a.signum() {
            a = mid;
            f_a = f_mid;
        } else {
            b = mid;
        }
    }
    Ok(best.1)
}
