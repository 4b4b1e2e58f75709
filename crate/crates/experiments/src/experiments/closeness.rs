//! Any model inside the KL ball whose expected reward is within `ε` of the
//! optimum is within `α(Δ)·ε` of the optimum in KL.

use aligntilt::metrics::{cross_entropy, kl_divergence};
use aligntilt::tilt::{is_degenerate, max_achievable_kl, solve_alpha_for_kl};
use aligntilt::{CategoricalDistribution, SeedSpec};
use rand::Rng;
use rayon::prelude::*;

use super::{flat_dirichlet, required};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::report::{fmt_f64, Check, ExperimentOutput, ExperimentReport, Table};

pub const BOUND_SLACK: f64 = 1e-9;
/// Halvings of the step toward a random point before a candidate is dropped.
pub const MAX_HALVINGS: u32 = 60;
/// Attempts allowed per requested accepted trial.
pub const ATTEMPTS_PER_TRIAL: u64 = 20;
/// `ε` below this (negative, from rounding) fails the premise.
const EPS_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosenessTrial {
    pub attempt: u64,
    pub k: usize,
    pub delta: f64,
    pub alpha: f64,
    pub eps: f64,
    pub kl_psi_phi: f64,
    pub bound: f64,
    /// The same bound evaluated at `ψ = p`.
    pub reference_slack: f64,
}

fn mix(a: &CategoricalDistribution, b: &CategoricalDistribution, s: f64) -> Result<CategoricalDistribution> {
    let w: Vec<f64> = a
        .probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (1.0 - s) * x + s * y)
        .collect();
    Ok(CategoricalDistribution::from_weights(&w)?)
}

/// One attempt; `None` when the premises could not be met.
fn attempt(index: u64, seed: SeedSpec) -> Result<Option<ClosenessTrial>> {
    let mut rng = seed.rng();
    let k = if index.is_multiple_of(2) { 3 } else { 10 };
    let p = flat_dirichlet(k, &mut rng)?;
    let q = flat_dirichlet(k, &mut rng)?;
    if is_degenerate(&q) {
        return Ok(None);
    }
    let delta = rng.random_range(0.05..0.95) * max_achievable_kl(&q, &p)?;
    let sol = solve_alpha_for_kl(&q, &p, delta)?;
    let h_phi = cross_entropy(&sol.phi, &q)?;
    let target = flat_dirichlet(k, &mut rng)?;

    let mut step = 1.0;
    for _ in 0..MAX_HALVINGS {
        let psi = mix(&sol.phi, &target, step)?;
        let eps = cross_entropy(&psi, &q)? - h_phi;
        if kl_divergence(&psi, &p)? <= delta && eps >= EPS_FLOOR {
            let eps = eps.max(0.0);
            let eps_p = cross_entropy(&p, &q)? - h_phi;
            return Ok(Some(ClosenessTrial {
                attempt: index,
                k,
                delta,
                alpha: sol.alpha,
                eps,
                kl_psi_phi: kl_divergence(&psi, &sol.phi)?,
                bound: sol.alpha * eps,
                reference_slack: sol.alpha * eps_p - kl_divergence(&p, &sol.phi)?,
            }));
        }
        step *= 0.5;
    }
    Ok(None)
}

pub fn run_closeness_bound(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let trials = required(&config.trials, "trials")?;
    let master = SeedSpec::new(config.seed());
    let mut report = ExperimentReport::new(Experiment::ClosenessBound, config);

    // Attempts run in parallel batches; the accepted set is the first
    // `trials` accepted attempts in index order, independent of threading.
    let max_attempts = trials.saturating_mul(ATTEMPTS_PER_TRIAL);
    let mut accepted: Vec<ClosenessTrial> = Vec::with_capacity(trials as usize);
    let mut next = 0u64;
    while (accepted.len() as u64) < trials && next < max_attempts {
        let batch = (trials - accepted.len() as u64).max(64).min(max_attempts - next);
        let results: Vec<Option<ClosenessTrial>> = (next..next + batch)
            .into_par_iter()
            .map(|i| attempt(i, master.derive(i)))
            .collect::<Result<_>>()?;
        next += batch;
        accepted.extend(results.into_iter().flatten());
    }
    accepted.truncate(trials as usize);
    let attempts_used = accepted.last().map_or(next, |t| t.attempt + 1);
    let skipped = attempts_used - accepted.len() as u64;

    let mut table = Table::new(
        "closeness_bound",
        &["attempt", "k", "delta", "alpha", "eps", "kl_psi_phi", "bound", "slack"],
    );
    for t in &accepted {
        table.push([
            t.attempt.to_string(),
            t.k.to_string(),
            fmt_f64(t.delta),
            fmt_f64(t.alpha),
            fmt_f64(t.eps),
            fmt_f64(t.kl_psi_phi),
            fmt_f64(t.bound),
            fmt_f64(t.bound - t.kl_psi_phi),
        ]);
    }

    let violations = accepted
        .iter()
        .filter(|t| t.kl_psi_phi > t.bound + BOUND_SLACK)
        .count();
    let reference_violations = accepted
        .iter()
        .filter(|t| t.reference_slack < -BOUND_SLACK)
        .count();
    let worst_excess = accepted
        .iter()
        .map(|t| t.kl_psi_phi - t.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    report.metric("accepted", accepted.len());
    report.metric("skipped", skipped);
    report.metric("violations", violations);
    report.metric("reference_violations", reference_violations);
    report.metric("worst_excess", worst_excess);

    report.check(Check::holds(
        "accepted_trials",
        accepted.len() as u64 == trials,
        format!("{} of {trials} accepted, {skipped} skipped", accepted.len()),
    ));
    report.check(Check::at_most("violations", violations as f64, 0.0));
    report.check(Check::at_most("reference_violations", reference_violations as f64, 0.0));

    Ok(ExperimentOutput {
        report,
        tables: vec![table],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_itself_meets_bound_with_equality() {
        let p = CategoricalDistribution::from_weights(&[0.2, 0.3, 0.5]).unwrap();
        let q = CategoricalDistribution::from_weights(&[6.0, 1.0, 2.0]).unwrap();
        let sol = solve_alpha_for_kl(&q, &p, 0.1).unwrap();
        let psi = mix(&sol.phi, &p, 0.0).unwrap();
        assert!(kl_divergence(&psi, &sol.phi).unwrap() < 1e-15);
    }

    #[test]
    fn small_run_passes() {
        let cfg = ExperimentConfig {
            trials: Some(50),
            ..Default::default()
        }
        .resolved(Experiment::ClosenessBound)
        .unwrap();
        let out = run_closeness_bound(&cfg).unwrap();
        assert!(out.report.passed, "{:?}", out.report.checks);
        assert_eq!(out.tables[0].rows.len(), 50);
    }
}
