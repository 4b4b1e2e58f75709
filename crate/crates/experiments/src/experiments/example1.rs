//! Best-of-2 over length-2 sequences of a ternary source: the joint law is
//! exchangeable but not a product.

use aligntilt::bon::{bon_enumeration_oracle, bon_type_law, BonConfig};

use super::{distribution, required};
use crate::config::{Experiment, ExperimentConfig, FIGURE_P};
use crate::error::Result;
use crate::report::{fmt_f64, Check, ExperimentOutput, ExperimentReport, Table};

/// The published joint PMF for the default inputs.
pub const TABLE: [[f64; 3]; 3] = [
    [49.0 / 625.0, 21.0 / 250.0, 43.0 / 250.0],
    [21.0 / 250.0, 81.0 / 10000.0, 9.0 / 125.0],
    [43.0 / 250.0, 9.0 / 125.0, 103.0 / 400.0],
];

/// First-symbol marginal `P(y_1 = 0)` for the default inputs.
pub const MARGINAL: f64 = 209.0 / 625.0;

pub const TOLERANCE: f64 = 1e-12;

/// `49/625 != (209/625)^2`, decided in integers: `49 · 625² ≠ 209² · 625`.
pub fn non_product_witness() -> bool {
    let lhs: u64 = 49 * 625 * 625;
    let rhs: u64 = 209 * 209 * 625;
    lhs != rhs
}

pub fn run_example1(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p = distribution(&config.p, "p")?;
    let q = distribution(&config.q, "q")?;
    let n = required(&config.n, "n")?;
    let m = 2;
    let k = p.len();
    let mut report = ExperimentReport::new(Experiment::Example1, config);

    let law = bon_type_law(&p, &q, m, &BonConfig::with_n(n)?)?;
    let joint = law.sequence_pmf()?;
    let is_default = p.len() == 3
        && p.max_abs_diff(&aligntilt::dist::make_distribution(&FIGURE_P)?)? == 0.0
        && q.max_abs_diff(&aligntilt::dist::make_distribution(&[6.0, 1.0, 2.0])?)? == 0.0
        && n == 2;

    let mut table = Table::new("example1_joint", &["y1", "y2", "probability", "published", "abs_error"]);
    let mut max_dev: f64 = 0.0;
    for y1 in 0..k {
        for y2 in 0..k {
            let v = joint[y1 * k + y2];
            let (published, err) = if is_default {
                let t = TABLE[y1][y2];
                max_dev = max_dev.max((v - t).abs());
                (fmt_f64(t), fmt_f64((v - t).abs()))
            } else {
                (String::new(), String::new())
            };
            table.push([y1.to_string(), y2.to_string(), fmt_f64(v), published, err]);
        }
    }
    let marginals: Vec<f64> = (0..k).map(|y1| (0..k).map(|y2| joint[y1 * k + y2]).sum()).collect();
    let product_gap = (joint[0] - marginals[0] * marginals[0]).abs();
    report.metric("joint", &joint);
    report.metric("marginal_first_symbol", &marginals);
    report.metric("product_gap_at_00", product_gap);

    if is_default {
        report.metric("max_table_deviation", max_dev);
        report.check(Check::at_most("table_max_abs_error", max_dev, TOLERANCE));
        report.check(Check::at_most(
            "marginal_209_over_625",
            (marginals[0] - MARGINAL).abs(),
            TOLERANCE,
        ));
        report.check(Check::holds(
            "non_product_witness",
            non_product_witness(),
            "49/625 != (209/625)^2 in exact integer arithmetic",
        ));
    }

    // The oracle is only feasible for small N; beyond its cap the check is
    // skipped rather than failed.
    let oracle = u32::try_from(n)
        .map_err(|_| aligntilt::Error::InvalidN(format!("N = {n} too large for the oracle")))
        .and_then(|n32| bon_enumeration_oracle(&p, &q, m, n32));
    match oracle {
        Ok(oracle) => {
            let dev = oracle
                .iter()
                .zip(&joint)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            report.metric("max_oracle_deviation", dev);
            report.check(Check::at_most("oracle_agreement", dev, TOLERANCE));
        }
        Err(aligntilt::Error::SizeOverflow { .. } | aligntilt::Error::InvalidN(_)) => {
            report.metric("max_oracle_deviation", "skipped: enumeration too large");
        }
        Err(e) => return Err(e.into()),
    }

    Ok(ExperimentOutput {
        report,
        tables: vec![table],
    })
}
