//! Best-of-N with `N = exp(mδ)` against the optimal aligned model at the same
//! budget, as the sequence length grows.

use aligntilt::bon::{bon_type_law, BonConfig};
use aligntilt::metrics::cross_entropy;
use aligntilt::tilt::solve_alpha_for_kl;

use super::{distribution, required};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::report::{fmt_f64, Check, ExperimentOutput, ExperimentReport, Table};

pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub m: u32,
    pub log_n: f64,
    pub kl_rate_to_optimal: f64,
    /// Total (not per-symbol) `D(π_N^m ‖ p^m)`.
    pub kl_to_reference: f64,
    /// `log N = mδ`.
    pub kl_bound: f64,
    /// Per-symbol expected reward of best-of-N minus that of `φ_δ`.
    pub reward_gap: f64,
    pub type_l1: f64,
}

pub fn run_equivalence_scan(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p = distribution(&config.p, "p")?;
    let q = distribution(&config.q, "q")?;
    let delta = required(&config.delta, "delta")?;
    let grid = required(&config.m_grid, "m_grid")?;
    let mut report = ExperimentReport::new(Experiment::EquivalenceScan, config);

    let sol = solve_alpha_for_kl(&q, &p, delta)?;
    let optimal_reward = -cross_entropy(&sol.phi, &q)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &m in &grid {
        let log_n = m as f64 * delta;
        let law = bon_type_law(&p, &q, m, &BonConfig::with_log_n(log_n)?)?;
        let mf = m as f64;
        let expected = law.expected_type();
        rows.push(ScanRow {
            m,
            log_n,
            kl_rate_to_optimal: law.kl_to_product(&sol.phi)? / mf,
            kl_to_reference: law.kl_to_product(&p)?,
            kl_bound: log_n,
            reward_gap: law.expected_additive(q.log_probs()) / mf - optimal_reward,
            type_l1: expected
                .iter()
                .zip(sol.phi.probs())
                .map(|(a, b)| (a - b).abs())
                .sum(),
        });
    }

    let mut table = Table::new(
        "equivalence_scan",
        &["m", "logN", "kl_rate_to_optimal", "kl_to_reference", "kl_bound", "reward_gap", "type_l1"],
    );
    for r in &rows {
        table.push([
            r.m.to_string(),
            fmt_f64(r.log_n),
            fmt_f64(r.kl_rate_to_optimal),
            fmt_f64(r.kl_to_reference),
            fmt_f64(r.kl_bound),
            fmt_f64(r.reward_gap),
            fmt_f64(r.type_l1),
        ]);
    }

    let rates: Vec<f64> = rows.iter().map(|r| r.kl_rate_to_optimal).collect();
    report.metric("alpha", sol.alpha);
    report.metric("kl_rate_to_optimal", &rates);

    let worst_bound = rows
        .iter()
        .map(|r| r.kl_to_reference - r.kl_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    report.check(Check::at_most("kl_to_reference_within_log_n", worst_bound, BOUND_SLACK));

    if delta == 0.0 {
        let worst = rates.iter().copied().fold(0.0, f64::max);
        report.check(Check::at_most("zero_budget_rates_vanish", worst, 0.0));
    } else if let (Some(first), Some(last)) = (rates.first(), rates.last()) {
        let decreasing = rates.windows(2).all(|w| w[1] < w[0]);
        report.check(Check::holds(
            "kl_rate_strictly_decreasing",
            decreasing,
            format!("{rates:?}"),
        ));
        report.check(Check::at_most("kl_rate_halved", *last, 0.5 * first));
    }

    Ok(ExperimentOutput {
        report,
        tables: vec![table],
    })
}
