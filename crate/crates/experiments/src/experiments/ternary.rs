//! Ternary-simplex picture of one alignment problem: the KL ball around `p`,
//! the reward line through `φ_Δ`, the aligned family, and the best-of-N
//! expected type.

use aligntilt::bon::{bon_expected_type, bon_type_law, BonConfig};
use aligntilt::metrics::{cross_entropy, kl_divergence};
use aligntilt::tilt::{mismatched_tilt, solve_alpha_for_kl};

use super::{distribution, required};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{ExperimentError, Result};
use crate::geometry::{distance_to_line, kl_contour, kl_contour_point, linear_contour_segment, Point};
use crate::report::{fmt_f64, Check, ExperimentOutput, ExperimentReport, Table};

pub const ON_CONTOUR_TOL: f64 = 1e-8;
/// Points on the aligned-family polyline.
pub const FAMILY_POINTS: usize = 201;

const HEADER: [&str; 4] = ["x_bary1", "x_bary2", "x_bary3", "curve_tag"];

fn push_point(t: &mut Table, x: &Point, tag: &str) {
    t.push([fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(x[2]), tag.to_string()]);
}

fn as_point(v: &[f64]) -> Point {
    [v[0], v[1], v[2]]
}

fn l1(a: &Point, b: &Point) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).sum()
}

pub fn run_ternary_figure(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p = distribution(&config.p, "p")?;
    let q = distribution(&config.q, "q")?;
    if p.len() != 3 || q.len() != 3 {
        return Err(ExperimentError::Config("ternary-figure needs three-symbol p and q".into()));
    }
    let delta = required(&config.delta, "delta")?;
    let m = required(&config.m, "m")?;
    let n = required(&config.n, "n")?;
    let rays = required(&config.rays, "rays")?;
    let alpha_max = required(&config.alpha_max, "alpha_max")?;
    let mut report = ExperimentReport::new(Experiment::TernaryFigure, config);

    let sol = solve_alpha_for_kl(&q, &p, delta)?;
    let phi = as_point(sol.phi.probs());
    let pv = as_point(p.probs());
    let costs: Point = as_point(&q.log_probs().iter().map(|l| -l).collect::<Vec<_>>());
    let level = cross_entropy(&sol.phi, &q)?;

    let mut kl = Table::new("ternary_kl_contour", &HEADER);
    let contour = kl_contour(&p, delta, rays)?;
    for (x, inside) in &contour {
        push_point(&mut kl, x, if *inside { "kl_contour" } else { "kl_contour_boundary" });
    }

    let mut reward = Table::new("ternary_reward_contour", &HEADER);
    let segment = linear_contour_segment(&costs, level);
    if let Some((a, b)) = segment {
        push_point(&mut reward, &a, "reward_contour");
        push_point(&mut reward, &b, "reward_contour");
    }

    let mut family = Table::new("ternary_aligned_family", &HEADER);
    for i in 0..FAMILY_POINTS {
        let alpha = alpha_max * i as f64 / (FAMILY_POINTS - 1) as f64;
        let x = as_point(mismatched_tilt(&q, &p, alpha)?.probs());
        push_point(&mut family, &x, "aligned_family");
    }

    let law = bon_type_law(&p, &q, m, &BonConfig::with_n(n)?)?;
    let bon = as_point(&bon_expected_type(&law));
    let mut points = Table::new("ternary_points", &HEADER);
    push_point(&mut points, &pv, "p");
    push_point(&mut points, &phi, "phi_delta");
    push_point(&mut points, &bon, "bon_expected_type");

    // φ on the KL contour: the divergence residual, and the distance to the
    // ray-traced contour point in φ's own direction.
    let kl_residual = (kl_divergence(&sol.phi, &p)? - delta).abs();
    let dir_len = crate::geometry::dist(&phi, &pv);
    let traced_gap = if dir_len > 0.0 {
        let dir = [0, 1, 2].map(|i| (phi[i] - pv[i]) / dir_len);
        crate::geometry::dist(&kl_contour_point(&p, &dir, delta)?.0, &phi)
    } else {
        0.0
    };
    let reward_gap = match segment {
        Some((a, b)) => distance_to_line(&phi, &a, &b),
        None => f64::INFINITY,
    };
    let bon_l1 = l1(&bon, &phi);
    let p_l1 = l1(&pv, &phi);

    report.metric("alpha", sol.alpha);
    report.metric("phi_delta", phi);
    report.metric("reward_level", level);
    report.metric("bon_expected_type", bon);
    report.metric("bon_l1_to_phi", bon_l1);
    report.metric("p_l1_to_phi", p_l1);
    report.metric("kl_contour_residual_at_phi", kl_residual);
    report.metric("traced_contour_gap_at_phi", traced_gap);
    report.metric("reward_contour_gap_at_phi", reward_gap);

    report.check(Check::at_most("phi_on_kl_contour", kl_residual, ON_CONTOUR_TOL));
    report.check(Check::at_most("phi_on_traced_kl_contour", traced_gap, ON_CONTOUR_TOL));
    report.check(Check::at_most("phi_on_reward_contour", reward_gap, ON_CONTOUR_TOL));
    if delta > 0.0 {
        report.check(Check::holds(
            "bon_closer_than_reference",
            bon_l1 < p_l1,
            format!("L1(bon, phi) = {bon_l1:e} vs L1(p, phi) = {p_l1:e}"),
        ));
    }

    Ok(ExperimentOutput {
        report,
        tables: vec![kl, reward, family, points],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass_and_fixture() {
        let cfg = ExperimentConfig::default().resolved(Experiment::TernaryFigure).unwrap();
        let out = run_ternary_figure(&cfg).unwrap();
        assert!(out.report.passed, "{:?}", out.report.checks);
        assert_eq!(out.table("ternary_kl_contour").unwrap().rows.len(), 361);
        let l1 = out.report.metrics["bon_l1_to_phi"].as_f64().unwrap();
        assert!((l1 - BON_L1_FIXTURE).abs() < 1e-9, "{l1}");
    }

    // Rational-arithmetic level sum at m = 10, N = 3 against a 40-digit φ.
    const BON_L1_FIXTURE: f64 = 0.183_849_442_522_916_6;

    #[test]
    fn zero_budget_collapses() {
        let cfg = ExperimentConfig {
            delta: Some(0.0),
            ..Default::default()
        }
        .resolved(Experiment::TernaryFigure)
        .unwrap();
        let out = run_ternary_figure(&cfg).unwrap();
        assert!(out.report.passed);
        let phi = out.report.metrics["phi_delta"].as_array().unwrap();
        let p = crate::config::FIGURE_P;
        for i in 0..3 {
            assert_eq!(phi[i].as_f64().unwrap(), p[i]);
        }
    }
}
