//! Entropy, cross entropy, KL divergence and Rényi cross entropy, in nats.

use crate::dist::CategoricalDistribution;
use crate::error::{Error, Result};
use crate::logspace::log_sum_exp_iter;

/// Half-width of the window around order 1 inside which
/// [`renyi_cross_entropy`] returns the ordinary cross entropy.
pub const RENYI_UNIT_WINDOW: f64 = 1e-6;

/// `H(p‖q) = Σ_k p_k log(1/q_k)`.
pub fn cross_entropy(p: &CategoricalDistribution, q: &CategoricalDistribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    Ok(p.probs()
        .iter()
        .zip(q.log_probs())
        .map(|(pk, lq)| -pk * lq)
        .sum())
}

/// `D(p‖q) = Σ_k p_k log(p_k/q_k)`.
pub fn kl_divergence(p: &CategoricalDistribution, q: &CategoricalDistribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    let kl: f64 = p
        .probs()
        .iter()
        .zip(p.log_probs().iter().zip(q.log_probs()))
        .map(|(pk, (lp, lq))| pk * (lp - lq))
        .sum();
    // Rounding can leave a -1e-17 residue for p == q.
    Ok(kl.max(0.0))
}

/// `H(p) = H(p‖p)`.
pub fn entropy(p: &CategoricalDistribution) -> f64 {
    p.probs()
        .iter()
        .zip(p.log_probs())
        .map(|(pk, lp)| -pk * lp)
        .sum()
}

/// Rényi cross entropy of order `t > 0`:
/// `H_t(p‖q) = log(Σ_k p_k q_k^(t-1)) / (1 - t)`.
///
/// Within [`RENYI_UNIT_WINDOW`] of `t = 1` the continuous extension, the
/// ordinary cross entropy, is returned.
pub fn renyi_cross_entropy(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    t: f64,
) -> Result<f64> {
    p.check_same_alphabet(q)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositiveOrder(t));
    }
    if (t - 1.0).abs() < RENYI_UNIT_WINDOW {
        return cross_entropy(p, q);
    }
    let lse = log_sum_exp_iter(
        p.log_probs()
            .iter()
            .zip(q.log_probs())
            .map(|(lp, lq)| lp + (t - 1.0) * lq),
    );
    Ok(lse / (1.0 - t))
}
