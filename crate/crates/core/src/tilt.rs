//! The mismatched-tilt family and the closed-form KL-constrained optimum.
//!
//! With reward `r(y) = log q(y)`, the policy maximising expected reward
//! subject to `D(φ‖p) <= Δ` is the tilt
//!
//! ```text
//! T(q, p, α)(k) = p_k q_k^α / Σ_j p_j q_j^α
//! ```
//!
//! at the unique `α >= 0` that spends the whole budget. As `α` grows the tilt
//! slides from `p` towards the maximisers of `q`, so both the KL cost and the
//! expected reward are monotone in `α`, and every inversion here is a scalar
//! bisection.

use crate::dist::CategoricalDistribution;
use crate::error::{Error, Result};
use crate::metrics::{cross_entropy, kl_divergence};
use crate::root::{bisect, expand_symmetric, expand_upper, BisectOptions};

/// Budgets closer than this to [`max_achievable_kl`] are rejected.
pub const FEASIBILITY_MARGIN: f64 = 1e-9;

/// Contract on `|D(φ‖p) - Δ|` for [`solve_alpha_for_kl`] and on
/// `|H(T‖q) - t|` for [`solve_beta_for_reward`].
pub const SOLVER_RESIDUAL: f64 = 1e-10;

/// Relative margin (of the reward range) excluded at both ends of the
/// achievable per-symbol reward interval.
pub const TARGET_EDGE_MARGIN: f64 = 1e-6;

const LOG_TIE_TOL: f64 = 1e-14;

/// Solution of the KL-constrained reward maximisation at one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltSolution {
    pub alpha: f64,
    pub phi: CategoricalDistribution,
    /// `D(φ‖p)` at the returned `alpha`.
    pub achieved_kl: f64,
    /// `E_φ[log q] = -H(φ‖q)`.
    pub expected_reward: f64,
}

/// One point of a reward-KL tradeoff curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub delta: f64,
    pub alpha: f64,
    pub expected_reward: f64,
}

/// `T(q, p, alpha)`, computed as `log p_k + alpha log q_k` followed by
/// log-sum-exp normalisation. `alpha = 0` returns `p` unchanged.
pub fn mismatched_tilt(
    q: &CategoricalDistribution,
    p: &CategoricalDistribution,
    alpha: f64,
) -> Result<CategoricalDistribution> {
    p.check_same_alphabet(q)?;
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("tilt parameter {alpha} is not finite")));
    }
    if alpha == 0.0 {
        return Ok(p.clone());
    }
    // Shift log q by its value at the heaviest exponent before scaling, so
    // large |alpha| multiplies small differences rather than large logs.
    let anchor = q
        .log_probs()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, |m, lq| m.max(alpha * lq))
        / alpha;
    let logs: Vec<f64> = p
        .log_probs()
        .iter()
        .zip(q.log_probs())
        .map(|(lp, lq)| lp + alpha * (lq - anchor))
        .collect();
    CategoricalDistribution::from_log_weights(&logs)
}

/// Expected per-symbol reward `-H(dist‖q)`.
pub fn expected_reward(dist: &CategoricalDistribution, q: &CategoricalDistribution) -> Result<f64> {
    Ok(-cross_entropy(dist, q)?)
}

/// True when `q` is uniform, so that every tilt of `p` equals `p`.
pub fn is_degenerate(q: &CategoricalDistribution) -> bool {
    let lq = q.log_probs();
    let max = lq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    lq.iter().all(|&l| max - l <= LOG_TIE_TOL)
}

/// Supremum of `D(T(q,p,α)‖p)` over `α >= 0`: `log(1 / Σ_{k∈J} p_k)` where
/// `J` is the set of maximisers of `q`.
pub fn max_achievable_kl(q: &CategoricalDistribution, p: &CategoricalDistribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    let lq = q.log_probs();
    let max = lq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mass: f64 = lq
        .iter()
        .zip(p.probs())
        .filter(|(l, _)| max - **l <= LOG_TIE_TOL)
        .map(|(_, pk)| pk)
        .sum();
    Ok(-mass.ln().min(0.0))
}

/// Find `α(Δ) >= 0` with `D(T(q,p,α)‖p) = Δ`.
///
/// The upper end of the bracket starts at 1 and doubles until the KL
/// residual changes sign; bisection then runs to a `1e-12` residual.
pub fn solve_alpha_for_kl(
    q: &CategoricalDistribution,
    p: &CategoricalDistribution,
    delta: f64,
) -> Result<TiltSolution> {
    p.check_same_alphabet(q)?;
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("KL budget {delta} must be a finite non-negative number")));
    }
    if delta == 0.0 {
        return solution_at(q, p, 0.0);
    }
    if is_degenerate(q) {
        return Err(Error::DegenerateFamily);
    }
    let max = max_achievable_kl(q, p)?;
    if delta >= max - FEASIBILITY_MARGIN {
        return Err(Error::InfeasibleBudget {
            delta,
            max,
            margin: FEASIBILITY_MARGIN,
        });
    }
    let residual = |alpha: f64| -> f64 {
        let phi = mismatched_tilt(q, p, alpha).expect("validated alphabets");
        kl_divergence(&phi, p).expect("validated alphabets") - delta
    };
    let opts = BisectOptions::default();
    let (lo, hi) = expand_upper(&residual, 0.0, 1.0, &opts)?;
    let alpha = bisect(&residual, lo, hi, &opts)?;
    let sol = solution_at(q, p, alpha)?;
    // Near saturation the KL can jump by more than the tolerance between
    // adjacent floats of alpha; a root pinned to one ulp is as good as it gets.
    let r = sol.achieved_kl - delta;
    let pinned = [alpha.next_down(), alpha.next_up()]
        .iter()
        .any(|&a| residual(a).signum() != r.signum());
    if r.abs() > SOLVER_RESIDUAL && !pinned {
        return Err(Error::NoConvergence(format!(
            "alpha = {alpha} leaves KL residual {}",
            sol.achieved_kl - delta
        )));
    }
    Ok(sol)
}

fn solution_at(
    q: &CategoricalDistribution,
    p: &CategoricalDistribution,
    alpha: f64,
) -> Result<TiltSolution> {
    let phi = mismatched_tilt(q, p, alpha)?;
    Ok(TiltSolution {
        alpha,
        achieved_kl: kl_divergence(&phi, p)?,
        expected_reward: expected_reward(&phi, q)?,
        phi,
    })
}

/// Open interval of per-symbol values `-(1/m) log q^m(y^m)` that tilts of
/// `p` can reach as mean: `(min_k log 1/q_k, max_k log 1/q_k)`.
pub fn reward_target_range(q: &CategoricalDistribution) -> (f64, f64) {
    let lq = q.log_probs();
    let lo = -lq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hi = -lq.iter().copied().fold(f64::INFINITY, f64::min);
    (lo, hi)
}

/// Find `β ∈ ℝ` with `H(T(q,p,β)‖q) = t`. The left side is strictly
/// decreasing in `β`.
pub fn solve_beta_for_reward(
    q: &CategoricalDistribution,
    p: &CategoricalDistribution,
    t: f64,
) -> Result<f64> {
    p.check_same_alphabet(q)?;
    let (lo, hi) = reward_target_range(q);
    let margin = TARGET_EDGE_MARGIN * (hi - lo);
    if is_degenerate(q) || !(t > lo + margin && t < hi - margin) {
        return Err(Error::TargetOutOfRange { target: t, lo, hi });
    }
    let residual = |beta: f64| -> f64 {
        let tilt = mismatched_tilt(q, p, beta).expect("validated alphabets");
        cross_entropy(&tilt, q).expect("validated alphabets") - t
    };
    if residual(0.0) == 0.0 {
        return Ok(0.0);
    }
    let opts = BisectOptions::default();
    let (a, b) = expand_symmetric(&residual, 1.0, &opts)?;
    let beta = bisect(&residual, a, b, &opts)?;
    let r = residual(beta);
    let pinned = [beta.next_down(), beta.next_up()]
        .iter()
        .any(|&b| residual(b).signum() != r.signum());
    if r.abs() > SOLVER_RESIDUAL && !pinned {
        return Err(Error::NoConvergence(format!("beta = {beta} leaves residual {r}")));
    }
    Ok(beta)
}

/// Expected reward of the optimal policy at each budget in `deltas`.
pub fn tradeoff_curve(
    q: &CategoricalDistribution,
    p: &CategoricalDistribution,
    deltas: &[f64],
) -> Result<Vec<TradeoffPoint>> {
    deltas
        .iter()
        .map(|&delta| {
            let sol = solve_alpha_for_kl(q, p, delta)?;
            Ok(TradeoffPoint {
                delta,
                alpha: sol.alpha,
                expected_reward: sol.expected_reward,
            })
        })
        .collect()
}

/// L∞ distance between `T(q, T(q,p,α), β)` and `T(q, p, α+β)`; the family
/// is closed under composition so this is zero up to rounding.
pub fn tilt_compose_check(
    q: &CategoricalDistribution,
    p: &CategoricalDistribution,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let nested = mismatched_tilt(q, &mismatched_tilt(q, p, alpha)?, beta)?;
    let direct = mismatched_tilt(q, p, alpha + beta)?;
    nested.max_abs_diff(&direct)
}
