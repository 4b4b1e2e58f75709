//! Log-domain helpers shared by every probability computation in the crate.

/// `log Σ exp(x_i)` with max subtraction. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    log_sum_exp_iter(xs.iter().copied())
}

/// Iterator version of [`log_sum_exp`]; the iterator is consumed twice via
/// `Clone`.
pub fn log_sum_exp_iter<I>(xs: I) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(1 - exp(x))` for `x <= 0`, accurate on both ends of the range.
pub fn log1m_exp(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x == 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `log(a^n - b^n)` given `ln a` and `ln b` with `0 < b <= a <= 1`, where `n`
/// may be any positive real. `ln b = -inf` is allowed.
///
/// Evaluated as `n ln a + log(-expm1(n (ln b - ln a)))` so that huge `n`
/// neither overflows nor cancels.
pub fn log_power_gap(ln_a: f64, ln_b: f64, n: f64) -> f64 {
    debug_assert!(ln_b <= ln_a);
    let gap = n * (ln_b - ln_a);
    if gap == 0.0 {
        return f64::NEG_INFINITY;
    }
    n * ln_a + (-gap.exp_m1()).ln()
}
