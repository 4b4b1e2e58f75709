//! Exact rate function, its Legendre-transform check, and Monte Carlo
//! deviation rates for the per-symbol reward under `φ_δ^m`.

use aligntilt::ldp::{aligned_mean, deviation_rate_from, legendre_oracle, rate_function, DeviationSource};
use aligntilt::SeedSpec;

use super::{distribution, required};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::report::{fmt_f64, Check, ExperimentOutput, ExperimentReport, Table};

pub const ORACLE_TOL: f64 = 1e-5;
pub const MEAN_TOL: f64 = 1e-10;
/// Monte Carlo is only held to the band where the exact rate is at most this.
pub const MC_RATE_CEILING: f64 = 3.0;
/// Offsets from the mean used when no `t_grid` is given.
pub const DEFAULT_OFFSETS: [f64; 5] = [-0.1, -0.05, 0.0, 0.05, 0.1];

/// Allowed gap between empirical and exact rates: the window width plus the
/// resolution `log(trials)/m` of a hit frequency.
pub fn mc_band(eps: f64, trials: u64, m: usize) -> f64 {
    eps + (trials as f64).ln() / m as f64
}

fn rate_cell(r: Option<f64>) -> String {
    r.map_or_else(|| "undefined".to_string(), fmt_f64)
}

pub fn run_ldp_probe(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p = distribution(&config.p, "p")?;
    let q = distribution(&config.q, "q")?;
    let delta = required(&config.delta, "delta")?;
    let m = required(&config.m, "m")? as usize;
    let trials = required(&config.trials, "trials")?;
    let eps = required(&config.eps, "eps")?;
    let bon_mode = config.bon_mode.unwrap_or(false);
    let bon_m = required(&config.bon_m, "bon_m")? as usize;
    let mut report = ExperimentReport::new(Experiment::LdpProbe, config);

    let mean = aligned_mean(&p, &q, delta)?;
    let grid = match &config.t_grid {
        Some(g) => g.clone(),
        None => DEFAULT_OFFSETS.iter().map(|d| mean + d).collect(),
    };
    let master = SeedSpec::new(config.seed());
    // Best-of-N with N = exp(m δ), rounded to an integer count.
    let bon_n = (bon_m as f64 * delta).exp().round().max(1.0) as u64;
    let band = mc_band(eps, trials, m);

    let mut header = vec!["t", "exact_rate", "legendre_rate", "empirical_rate", "hits", "trials"];
    if bon_mode {
        header.extend(["bon_empirical_rate", "bon_hits"]);
    }
    let mut table = Table::new("ldp_probe", &header);

    let mut worst_oracle: f64 = 0.0;
    let mut worst_mc: f64 = 0.0;
    let mut undefined_in_band = 0usize;
    for (i, &t) in grid.iter().enumerate() {
        let exact = rate_function(&p, &q, delta, t)?.rate;
        let oracle = legendre_oracle(&p, &q, delta, t)?;
        worst_oracle = worst_oracle.max((exact - oracle).abs());
        let mc = deviation_rate_from(
            &p,
            &q,
            delta,
            DeviationSource::Aligned,
            t,
            eps,
            m,
            trials,
            master.derive(2 * i as u64),
        )?;
        if exact <= MC_RATE_CEILING {
            match mc.rate {
                Some(r) => worst_mc = worst_mc.max((r - exact).abs()),
                None => undefined_in_band += 1,
            }
        }
        let mut row = vec![
            fmt_f64(t),
            fmt_f64(exact),
            fmt_f64(oracle),
            rate_cell(mc.rate),
            mc.hits.to_string(),
            mc.trials.to_string(),
        ];
        if bon_mode {
            let bon = deviation_rate_from(
                &p,
                &q,
                delta,
                DeviationSource::BestOfN { n: bon_n },
                t,
                eps,
                bon_m,
                trials,
                master.derive(2 * i as u64 + 1),
            )?;
            row.push(rate_cell(bon.rate));
            row.push(bon.hits.to_string());
        }
        table.push(row);
    }

    let at_mean = rate_function(&p, &q, delta, mean)?.rate;
    report.metric("mean", mean);
    report.metric("rate_at_mean", at_mean);
    report.metric("t_grid", &grid);
    report.metric("mc_band", band);
    report.metric("max_oracle_gap", worst_oracle);
    report.metric("max_mc_gap", worst_mc);
    if bon_mode {
        report.metric("bon_n", bon_n);
    }

    report.check(Check::at_most("rate_vanishes_at_mean", at_mean, MEAN_TOL));
    report.check(Check::at_most("exact_vs_legendre", worst_oracle, ORACLE_TOL));
    report.check(Check::at_most("monte_carlo_band", worst_mc, band));
    report.check(Check::at_most(
        "undefined_only_beyond_ceiling",
        undefined_in_band as f64,
        0.0,
    ));

    Ok(ExperimentOutput {
        report,
        tables: vec![table],
    })
}
