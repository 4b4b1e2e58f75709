//! Best-of-N on a flat alphabet with random `p` and `q`: how far is `π_N`
//! from the aligned model at its own KL budget?

use aligntilt::bon::bon_exact_pmf;
use aligntilt::metrics::kl_divergence;
use aligntilt::tilt::{max_achievable_kl, solve_alpha_for_kl, FEASIBILITY_MARGIN};
use aligntilt::SeedSpec;
use rayon::prelude::*;

use super::{flat_dirichlet, required};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{ExperimentError, Result};
use crate::report::{fmt_f64, Check, ExperimentOutput, ExperimentReport, Table};

/// When `D(π_N‖p)` reaches the largest budget the tilt family can realise
/// (best-of-N concentrating on the top-reward symbol), the budget is pulled
/// back by this much below the solver's feasibility edge.
pub const SATURATION_BACKOFF: f64 = 2.0 * FEASIBILITY_MARGIN;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphabetRow {
    pub seed_index: u64,
    pub n: u64,
    pub delta: f64,
    pub alpha: f64,
    pub kl_to_optimal: f64,
    pub clamped: bool,
}

fn one_seed(k: usize, n_grid: &[u64], seed: SeedSpec, index: u64) -> Result<Vec<AlphabetRow>> {
    let mut rng = seed.rng();
    let p = flat_dirichlet(k, &mut rng)?;
    let q = flat_dirichlet(k, &mut rng)?;
    let rewards = q.log_probs().to_vec();
    let delta_max = max_achievable_kl(&q, &p)?;
    n_grid
        .iter()
        .map(|&n| {
            let pi = bon_exact_pmf(&p, &rewards, n)?;
            let raw = kl_divergence(&pi, &p)?;
            let limit = delta_max - SATURATION_BACKOFF;
            let clamped = raw > limit;
            let delta = if clamped { limit } else { raw };
            let sol = solve_alpha_for_kl(&q, &p, delta)?;
            Ok(AlphabetRow {
                seed_index: index,
                n,
                delta,
                alpha: sol.alpha,
                kl_to_optimal: kl_divergence(&pi, &sol.phi)?,
                clamped,
            })
        })
        .collect()
}

pub fn run_random_alphabet(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let k = required(&config.k, "k")?;
    if k < 2 {
        return Err(ExperimentError::Config(format!("k = {k}: need at least two symbols")));
    }
    let seeds = required(&config.seeds, "seeds")?;
    let n_grid = required(&config.n_grid, "n_grid")?;
    let master = SeedSpec::new(config.seed());
    let mut report = ExperimentReport::new(Experiment::RandomAlphabet, config);

    let per_seed: Vec<Vec<AlphabetRow>> = (0..seeds)
        .into_par_iter()
        .map(|i| one_seed(k, &n_grid, master.derive(i), i))
        .collect::<Result<_>>()?;
    let rows: Vec<AlphabetRow> = per_seed.into_iter().flatten().collect();

    let mut table = Table::new(
        "random_alphabet",
        &["seed_index", "n", "delta", "alpha", "kl_to_optimal", "clamped"],
    );
    for r in &rows {
        table.push([
            r.seed_index.to_string(),
            r.n.to_string(),
            fmt_f64(r.delta),
            fmt_f64(r.alpha),
            fmt_f64(r.kl_to_optimal),
            r.clamped.to_string(),
        ]);
    }

    let max_kl = rows.iter().map(|r| r.kl_to_optimal).fold(0.0, f64::max);
    let worst = rows
        .iter()
        .max_by(|a, b| a.kl_to_optimal.total_cmp(&b.kl_to_optimal))
        .copied();
    report.metric("max_kl_to_optimal", max_kl);
    if let Some(w) = worst {
        report.metric("worst_seed_index", w.seed_index);
        report.metric("worst_n", w.n);
    }
    report.metric("clamped_rows", rows.iter().filter(|r| r.clamped).count());

    let n1 = rows
        .iter()
        .filter(|r| r.n == 1)
        .map(|r| r.kl_to_optimal)
        .fold(0.0, f64::max);
    if n_grid.contains(&1) {
        report.check(Check::at_most("n1_is_reference", n1, 0.0));
    }
    if let Some(threshold) = config.threshold {
        report.check(Check::at_most("max_kl_to_optimal", max_kl, threshold));
    }

    Ok(ExperimentOutput {
        report,
        tables: vec![table],
    })
}
