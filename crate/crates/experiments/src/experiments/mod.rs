//! The six experiments. Each `run_*` function takes a resolved config and
//! returns its report and tables without touching the filesystem.

use std::time::Instant;

use aligntilt::CategoricalDistribution;
use rand::Rng;
use rand_distr::Exp1;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{ExperimentError, Result};
use crate::report::ExperimentOutput;

mod closeness;
mod equivalence;
mod example1;
mod ldp_probe;
mod random_alphabet;
mod ternary;

pub use closeness::run_closeness_bound;
pub use equivalence::run_equivalence_scan;
pub use example1::run_example1;
pub use ldp_probe::run_ldp_probe;
pub use random_alphabet::run_random_alphabet;
pub use ternary::run_ternary_figure;

/// Smallest coordinate accepted from a Dirichlet draw.
pub const DIRICHLET_FLOOR: f64 = 1e-12;

/// Resolve defaults, run, and stamp the wall-clock duration.
pub fn run(experiment: Experiment, config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let config = config.resolved(experiment)?;
    let start = Instant::now();
    let mut out = match experiment {
        Experiment::Example1 => run_example1(&config),
        Experiment::TernaryFigure => run_ternary_figure(&config),
        Experiment::EquivalenceScan => run_equivalence_scan(&config),
        Experiment::RandomAlphabet => run_random_alphabet(&config),
        Experiment::ClosenessBound => run_closeness_bound(&config),
        Experiment::LdpProbe => run_ldp_probe(&config),
    }?;
    out.report.duration = start.elapsed();
    Ok(out)
}

/// A draw from the flat Dirichlet on the `k`-simplex (normalised unit
/// exponentials), redrawn while any coordinate falls below
/// [`DIRICHLET_FLOOR`].
pub fn flat_dirichlet<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<CategoricalDistribution> {
    loop {
        let w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = w.iter().sum();
        if w.iter().all(|x| x / total >= DIRICHLET_FLOOR) {
            return Ok(CategoricalDistribution::from_weights(&w)?);
        }
    }
}

pub(crate) fn required<T: Clone>(value: &Option<T>, name: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| ExperimentError::Config(format!("missing `{name}`")))
}

pub(crate) fn distribution(weights: &Option<Vec<f64>>, name: &str) -> Result<CategoricalDistribution> {
    let w = required(weights, name)?;
    CategoricalDistribution::from_weights(&w)
        .map_err(|e| ExperimentError::Config(format!("`{name}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use aligntilt::SeedSpec;

    #[test]
    fn dirichlet_is_normalised_and_reproducible() {
        let a = flat_dirichlet(16, &mut SeedSpec::new(3).rng()).unwrap();
        let b = flat_dirichlet(16, &mut SeedSpec::new(3).rng()).unwrap();
        assert_eq!(a, b);
        assert!((a.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_first_coordinate_mean() {
        // Flat Dirichlet on K symbols: each coordinate has mean 1/K.
        let mut rng = SeedSpec::new(11).rng();
        let n = 20_000;
        let mean = (0..n)
            .map(|_| flat_dirichlet(4, &mut rng).unwrap().prob(0))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.25).abs() < 0.01, "{mean}");
    }
}
