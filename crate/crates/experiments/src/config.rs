//! Experiment configuration: a flat key-value TOML file, overridden by CLI
//! flags, with per-experiment defaults filled in before a run so that the
//! persisted report records exactly what was computed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ALIGN_OUT_DIR";

/// Reference distribution shared by `example1` and the ternary figure.
pub const FIGURE_P: [f64; 3] = [0.2, 0.3, 0.5];
/// Reward distribution of the ternary figure.
pub const FIGURE_Q: [f64; 3] = [2.0 / 3.0, 1.0 / 9.0, 2.0 / 9.0];
pub const FIGURE_DELTA: f64 = 0.11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Example1,
    TernaryFigure,
    EquivalenceScan,
    RandomAlphabet,
    ClosenessBound,
    LdpProbe,
}

impl Experiment {
    /// Stem used for output file names.
    pub fn slug(&self) -> &'static str {
        match self {
            Experiment::Example1 => "example1",
            Experiment::TernaryFigure => "ternary_figure",
            Experiment::EquivalenceScan => "equivalence_scan",
            Experiment::RandomAlphabet => "random_alphabet",
            Experiment::ClosenessBound => "closeness_bound",
            Experiment::LdpProbe => "ldp_probe",
        }
    }
}

/// Every knob any experiment reads. Unset fields take the experiment's
/// default in [`ExperimentConfig::resolved`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    /// Reference weights (normalised on use).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    /// Reward-distribution weights; the reward of symbol k is `log q_k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Number of random (p, q) draws.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_max: Option<f64>,
    /// ldp-probe: also sample from best-of-N and report its empirical curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bon_mode: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bon_m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(&mut self, other: &ExperimentConfig) {
        merge_fields!(self, other; experiment, p, q, k, m, n, delta, m_grid, n_grid, t_grid,
            eps, trials, seeds, threshold, rays, alpha_max, bon_mode, bon_m, seed, output_dir);
    }

    /// Fill every field the experiment reads with its default.
    pub fn resolved(&self, experiment: Experiment) -> Result<Self> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(ExperimentError::Config(format!(
                    "config is for {:?} but {:?} was requested",
                    e, experiment
                )));
            }
        }
        let mut c = self.clone();
        c.experiment = Some(experiment);
        c.seed.get_or_insert(0);
        c.output_dir.get_or_insert_with(default_output_dir);
        match experiment {
            Experiment::Example1 => {
                c.p.get_or_insert_with(|| FIGURE_P.to_vec());
                c.q.get_or_insert_with(|| vec![6.0, 1.0, 2.0]);
                c.n.get_or_insert(2);
            }
            Experiment::TernaryFigure => {
                c.p.get_or_insert_with(|| FIGURE_P.to_vec());
                c.q.get_or_insert_with(|| FIGURE_Q.to_vec());
                c.delta.get_or_insert(FIGURE_DELTA);
                c.m.get_or_insert(10);
                c.n.get_or_insert(3);
                c.rays.get_or_insert(360);
                c.alpha_max.get_or_insert(20.0);
            }
            Experiment::EquivalenceScan => {
                c.p.get_or_insert_with(|| FIGURE_P.to_vec());
                c.q.get_or_insert_with(|| FIGURE_Q.to_vec());
                c.delta.get_or_insert(FIGURE_DELTA);
                c.m_grid.get_or_insert_with(|| vec![5, 10, 20, 40, 80, 160]);
            }
            Experiment::RandomAlphabet => {
                let k = *c.k.get_or_insert(1024);
                c.seeds.get_or_insert(20);
                c.n_grid.get_or_insert_with(|| geometric_n_grid(12, 1000));
                if c.threshold.is_none() {
                    c.threshold = default_alphabet_threshold(k);
                }
            }
            Experiment::ClosenessBound => {
                c.trials.get_or_insert(1000);
            }
            Experiment::LdpProbe => {
                c.p.get_or_insert_with(|| FIGURE_P.to_vec());
                c.q.get_or_insert_with(|| FIGURE_Q.to_vec());
                c.delta.get_or_insert(FIGURE_DELTA);
                c.m.get_or_insert(400);
                c.trials.get_or_insert(100_000);
                c.eps.get_or_insert(aligntilt::ldp::DEFAULT_WINDOW);
                c.bon_mode.get_or_insert(false);
                c.bon_m.get_or_insert(40);
            }
        }
        Ok(c)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// `$ALIGN_OUT_DIR`, or `out` when unset.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// `points` values of `N` spaced geometrically on `[1, max]`, rounded to
/// integers and de-duplicated.
pub fn geometric_n_grid(points: usize, max: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (0..points)
        .map(|i| {
            let x = (max as f64).powf(i as f64 / (points - 1) as f64);
            x.round().max(1.0) as u64
        })
        .collect();
    grid.dedup();
    grid
}

/// Thresholds on `max D(π_N‖φ_Δ)`: 0.01 for alphabets above 1000 symbols,
/// 0.5 below 10, none in between.
pub fn default_alphabet_threshold(k: usize) -> Option<f64> {
    if k > 1000 {
        Some(0.01)
    } else if k < 10 {
        Some(0.5)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_merge() {
        let c = ExperimentConfig::from_toml_str(
            "experiment = \"equivalence_scan\"\ndelta = 0.2\nm_grid = [3, 6]\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(c.experiment, Some(Experiment::EquivalenceScan));
        assert_eq!(c.m_grid, Some(vec![3, 6]));
        let mut base = c.clone();
        base.merge(&ExperimentConfig {
            delta: Some(0.3),
            ..Default::default()
        });
        assert_eq!(base.delta, Some(0.3));
        assert_eq!(base.seed, Some(9));
        let text = toml::to_string(&base).unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), base);
    }

    #[test]
    fn rejects_unknown_keys_and_mismatched_experiment() {
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
        let c = ExperimentConfig {
            experiment: Some(Experiment::Example1),
            ..Default::default()
        };
        assert!(c.resolved(Experiment::LdpProbe).is_err());
    }

    #[test]
    fn n_grid_shape() {
        let g = geometric_n_grid(12, 1000);
        assert_eq!(g, vec![1, 2, 4, 7, 12, 23, 43, 81, 152, 285, 534, 1000]);
    }

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::default().resolved(Experiment::RandomAlphabet).unwrap();
        assert_eq!(c.k, Some(1024));
        assert_eq!(c.threshold, Some(0.01));
        assert_eq!(c.seed, Some(0));
        let c = ExperimentConfig {
            k: Some(8),
            ..Default::default()
        }
        .resolved(Experiment::RandomAlphabet)
        .unwrap();
        assert_eq!(c.threshold, Some(0.5));
    }
}
