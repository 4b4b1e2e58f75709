//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::experiments::run;
use crate::report::persist;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "aligntilt", version, about = "Reproducible alignment experiments: best-of-N versus the tilted optimum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML file with experiment settings; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: $ALIGN_OUT_DIR, else ./out).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct Pair {
    /// Reference weights, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    /// Reward-distribution weights, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Best-of-2 joint law over pairs of ternary symbols.
    Example1 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        n: Option<u64>,
    },
    /// KL contour, reward contour, aligned family and best-of-N type on the simplex.
    TernaryFigure {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        rays: Option<usize>,
        #[arg(long)]
        alpha_max: Option<f64>,
    },
    /// Best-of-N with N = exp(m delta) against the aligned model, over m.
    EquivalenceScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        m_grid: Option<Vec<u32>>,
    },
    /// KL from best-of-N to the aligned model for random p, q.
    RandomAlphabet {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<u64>>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Closeness of near-optimal models to the aligned model.
    ClosenessBound {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Rate function, Legendre check and Monte Carlo deviation rates.
    LdpProbe {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t_grid: Option<Vec<f64>>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Also sample best-of-N and report its curve (no pass/fail).
        #[arg(long)]
        bon_mode: bool,
        #[arg(long)]
        bon_m: Option<u32>,
    },
}

impl Command {
    /// The experiment, the common flags, and the flag overrides.
    pub fn split(self) -> (Experiment, Common, ExperimentConfig) {
        let mut o = ExperimentConfig::default();
        let (experiment, common) = match self {
            Command::Example1 { common, pair, n } => {
                (o.p, o.q, o.n) = (pair.p, pair.q, n);
                (Experiment::Example1, common)
            }
            Command::TernaryFigure { common, pair, delta, m, n, rays, alpha_max } => {
                (o.p, o.q, o.delta, o.m, o.n) = (pair.p, pair.q, delta, m, n);
                (o.rays, o.alpha_max) = (rays, alpha_max);
                (Experiment::TernaryFigure, common)
            }
            Command::EquivalenceScan { common, pair, delta, m_grid } => {
                (o.p, o.q, o.delta, o.m_grid) = (pair.p, pair.q, delta, m_grid);
                (Experiment::EquivalenceScan, common)
            }
            Command::RandomAlphabet { common, k, seeds, n_grid, threshold } => {
                (o.k, o.seeds, o.n_grid, o.threshold) = (k, seeds, n_grid, threshold);
                (Experiment::RandomAlphabet, common)
            }
            Command::ClosenessBound { common, trials } => {
                o.trials = trials;
                (Experiment::ClosenessBound, common)
            }
            Command::LdpProbe { common, pair, delta, m, t_grid, eps, trials, bon_mode, bon_m } => {
                (o.p, o.q, o.delta, o.m, o.t_grid) = (pair.p, pair.q, delta, m, t_grid);
                (o.eps, o.trials, o.bon_m) = (eps, trials, bon_m);
                o.bon_mode = bon_mode.then_some(true);
                (Experiment::LdpProbe, common)
            }
        };
        o.seed = common.seed;
        o.output_dir = common.out.clone();
        (experiment, common, o)
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<bool> {
    let (experiment, common, overrides) = command.split();
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.merge(&overrides);
    let mut output = run(experiment, &config)?;
    let dir = output
        .report
        .config
        .output_dir
        .clone()
        .unwrap_or_else(crate::config::default_output_dir);
    let written = persist(&mut output, &dir)?;

    let report = &output.report;
    let _ = writeln!(stdout, "{} (seed {})", experiment.slug(), report.seed);
    for c in &report.checks {
        let tag = if c.passed { "ok" } else { "FAILED" };
        let _ = writeln!(stdout, "  [{tag}] {}: {}", c.name, c.detail);
    }
    for path in written {
        let _ = writeln!(stdout, "  wrote {}", path.display());
    }
    Ok(report.passed)
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
