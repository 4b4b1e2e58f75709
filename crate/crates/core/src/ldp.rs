//! Rate functions and scaled cumulants of the per-symbol reward.
//!
//! For `Y^m ~ φ_δ^m` the per-symbol negative log-likelihood
//! `-(1/m) log q^m(Y^m)` obeys a large deviation principle with rate
//!
//! ```text
//! J_δ(t) = D(T(q, p, β(t)) ‖ φ_δ),   H(T(q, p, β(t)) ‖ q) = t
//! ```
//!
//! and `δ = 0` recovers the mismatched-information rate with base `p`. The
//! scaled cumulants are Rényi cross entropies, `-H_{1+ρ}(φ_δ‖q)`, and the
//! identity is exact at every `m` because the law is a product.

use rayon::prelude::*;

use crate::bon::{log_expectation, BonSampler, PolicyTag, TypeLaw};
use crate::dist::{CategoricalDistribution, SymbolSampler};
use crate::error::{Error, Result};
use crate::logspace::log_sum_exp_iter;
use crate::metrics::{cross_entropy, kl_divergence, renyi_cross_entropy};
use crate::seed::SeedSpec;
use crate::tilt::{mismatched_tilt, reward_target_range, solve_alpha_for_kl, solve_beta_for_reward};

/// Default Monte Carlo window half-width.
pub const DEFAULT_WINDOW: f64 = 0.05;

/// One evaluation of a rate function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    /// Per-symbol negative log-likelihood under `q`, in nats.
    pub t: f64,
    pub beta: f64,
    pub rate: f64,
}

/// One evaluation of the scaled reward cumulant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantPoint {
    pub rho: f64,
    pub value: f64,
}

/// Mean of the per-symbol statistic under `φ_δ`, `H(φ_δ‖q)`; the rate
/// vanishes there.
pub fn aligned_mean(p: &CategoricalDistribution, q: &CategoricalDistribution, delta: f64) -> Result<f64> {
    let sol = solve_alpha_for_kl(q, p, delta)?;
    cross_entropy(&sol.phi, q)
}

/// `J_δ(t)`. With `delta = 0` the base is `p` itself.
pub fn rate_function(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    delta: f64,
    t: f64,
) -> Result<RatePoint> {
    let base = solve_alpha_for_kl(q, p, delta)?.phi;
    let beta = solve_beta_for_reward(q, p, t)?;
    let tilt = mismatched_tilt(q, p, beta)?;
    Ok(RatePoint {
        t,
        beta,
        rate: kl_divergence(&tilt, &base)?,
    })
}

/// `E_{δ,ρ} = -H_{1+ρ}(φ_δ‖q)`; below `ρ = 1e-6` the continuous extension
/// `-H(φ_δ‖q)` (the expected per-symbol reward).
pub fn scaled_cumulant(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    delta: f64,
    rho: f64,
) -> Result<CumulantPoint> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("cumulant order {rho} must be non-negative")));
    }
    let phi = solve_alpha_for_kl(q, p, delta)?.phi;
    Ok(CumulantPoint {
        rho,
        value: -renyi_cross_entropy(&phi, q, 1.0 + rho)?,
    })
}

/// Both sides of the finite-`m` cumulant identity:
/// `(1/(mρ)) log E_{φ_δ^m}[exp(ρ r(Y^m))]` by exact type-class summation, and
/// `-H_{1+ρ}(φ_δ‖q)`.
pub fn finite_m_cumulant_check(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    delta: f64,
    rho: f64,
    m: u32,
) -> Result<(f64, f64)> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("cumulant order {rho} must be positive")));
    }
    let phi = solve_alpha_for_kl(q, p, delta)?.phi;
    let law = TypeLaw::product(&phi, m, PolicyTag::Aligned)?;
    let log_mgf = log_expectation(&law, |tau| rho * tau.dot(q.log_probs()));
    let lhs = log_mgf / (m as f64 * rho);
    let rhs = -renyi_cross_entropy(&phi, q, 1.0 + rho)?;
    Ok((lhs, rhs))
}

/// Where Monte Carlo sequences come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeviationSource {
    /// `φ_δ^m`, the optimal aligned model.
    Aligned,
    /// Best-of-N over length-`m` sequences from `p`.
    BestOfN { n: u64 },
}

/// Outcome of a Monte Carlo deviation estimate. `rate` is `None` when no
/// trial landed in the window; that case is reported, never replaced by
/// infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationEstimate {
    pub hits: u64,
    pub trials: u64,
    pub rate: Option<f64>,
}

impl DeviationEstimate {
    pub fn is_defined(&self) -> bool {
        self.rate.is_some()
    }
}

/// `-(1/m) log P(|-(1/m) log q^m(Y^m) - t| < eps)` estimated from `trials`
/// sequences of `φ_δ^m`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_deviation_rate(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    delta: f64,
    t: f64,
    eps: f64,
    m: usize,
    trials: u64,
    seed: SeedSpec,
) -> Result<DeviationEstimate> {
    deviation_rate_from(p, q, delta, DeviationSource::Aligned, t, eps, m, trials, seed)
}

/// [`empirical_deviation_rate`] with a selectable sequence source. Trial `i`
/// always uses `seed.derive(i)`, so the estimate does not depend on the
/// number of worker threads.
#[allow(clippy::too_many_arguments)]
pub fn deviation_rate_from(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    delta: f64,
    source: DeviationSource,
    t: f64,
    eps: f64,
    m: usize,
    trials: u64,
    seed: SeedSpec,
) -> Result<DeviationEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::EmptySequence);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("window half-width {eps} must be positive")));
    }
    let neg_log_q: Vec<f64> = q.log_probs().iter().map(|l| -l).collect();
    let in_window = |symbols: &[usize]| {
        let stat = symbols.iter().map(|&y| neg_log_q[y]).sum::<f64>() / m as f64;
        (stat - t).abs() < eps
    };

    let hits: u64 = match source {
        DeviationSource::Aligned => {
            let phi = solve_alpha_for_kl(q, p, delta)?.phi;
            let sampler = SymbolSampler::new(&phi);
            (0..trials)
                .into_par_iter()
                .map_init(
                    || vec![0usize; m],
                    |buf, i| {
                        sampler.fill(&mut seed.derive(i).rng(), buf);
                        in_window(buf) as u64
                    },
                )
                .sum()
        }
        DeviationSource::BestOfN { n } => {
            if n == 0 {
                return Err(Error::InvalidN("N must be at least 1".into()));
            }
            let sampler = SymbolSampler::new(p);
            let bon = BonSampler::new(&sampler, q.log_probs(), m, n);
            (0..trials)
                .into_par_iter()
                .map(|i| -> Result<u64> {
                    let seq = bon.draw(&mut seed.derive(i).rng())?;
                    Ok(in_window(seq.symbols()) as u64)
                })
                .sum::<Result<u64>>()?
        }
    };
    let rate = (hits > 0).then(|| -((hits as f64) / (trials as f64)).ln() / m as f64);
    Ok(DeviationEstimate { hits, trials, rate })
}

/// Rate at `t` recovered as a Legendre transform of the cumulant curve,
/// `sup_γ { -γ t - log Σ_k φ_k q_k^γ }`, by a derivative-free search: a grid
/// whose span doubles until the maximiser is interior, then golden-section
/// refinement until successive values differ by less than `1e-12`.
///
/// It never calls the `β` solver and serves as an independent check on
/// [`rate_function`].
pub fn legendre_oracle(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    delta: f64,
    t: f64,
) -> Result<f64> {
    let (lo, hi) = reward_target_range(q);
    let margin = crate::tilt::TARGET_EDGE_MARGIN * (hi - lo);
    if !(t > lo + margin && t < hi - margin) {
        return Err(Error::TargetOutOfRange { target: t, lo, hi });
    }
    let phi = solve_alpha_for_kl(q, p, delta)?.phi;
    let objective = |gamma: f64| {
        let log_mgf = log_sum_exp_iter(
            phi.log_probs()
                .iter()
                .zip(q.log_probs())
                .map(|(lf, lq)| lf + gamma * lq),
        );
        -gamma * t - log_mgf
    };

    const GRID: usize = 40;
    let mut span = 1.0f64;
    let (mut a, mut b) = (-span, span);
    for _ in 0..64 {
        let step = 2.0 * span / GRID as f64;
        let (best_i, _) = (0..=GRID)
            .map(|i| (i, objective(-span + step * i as f64)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_i > 0 && best_i < GRID {
            a = -span + step * (best_i as f64 - 1.0);
            b = -span + step * (best_i as f64 + 1.0);
            break;
        }
        span *= 2.0;
        a = -span;
        b = span;
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..300 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
        let current = fc.max(fd);
        if (current - prev).abs() < 1e-12 && (b - a) < 1e-9 * (1.0 + a.abs()) {
            break;
        }
        prev = current;
    }
    Ok(fc.max(fd).max(0.0))
}
