//! Contours on the ternary probability simplex, in barycentric coordinates.
//!
//! The KL ball `{v : D(v‖p) = Δ}` is star-shaped around `p` (the divergence
//! is convex and zero at `p`, so it increases along every ray), which lets us
//! trace it by one-dimensional root finding along rays. The reward contour
//! `{w : H(w‖q) = c}` is the intersection of a line with the simplex.

use aligntilt::metrics::kl_divergence;
use aligntilt::root::{bisect, BisectOptions};
use aligntilt::CategoricalDistribution;

use crate::error::Result;

pub type Point = [f64; 3];

/// Radial tolerance used when tracing the KL contour.
pub const RADIAL_TOL: f64 = 1e-10;

fn kl_point(v: &Point, p: &CategoricalDistribution) -> f64 {
    match CategoricalDistribution::from_weights(v) {
        Ok(d) => kl_divergence(&d, p).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    }
}

/// Unit direction in the plane `Σ x = 0` at angle `theta`.
pub fn plane_direction(theta: f64) -> Point {
    let e1 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let e2 = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    let (s, c) = theta.sin_cos();
    [0, 1, 2].map(|i| c * e1[i] + s * e2[i])
}

/// Where the ray `p + r·dir` meets the KL contour at level `delta`, and
/// whether it met it before the simplex boundary. Rays that leave the
/// simplex first return the boundary point and `false`.
pub fn kl_contour_point(p: &CategoricalDistribution, dir: &Point, delta: f64) -> Result<(Point, bool)> {
    let pv = [p.prob(0), p.prob(1), p.prob(2)];
    let r_max = (0..3)
        .filter(|&i| dir[i] < 0.0)
        .map(|i| pv[i] / -dir[i])
        .fold(f64::INFINITY, f64::min);
    let at = |r: f64| -> Point { [0, 1, 2].map(|i| pv[i] + r * dir[i]) };
    let r_edge = r_max * (1.0 - 1e-12);
    let f = |r: f64| kl_point(&at(r), p) - delta;
    if f(r_edge) < 0.0 {
        return Ok((at(r_edge), false));
    }
    let opts = BisectOptions {
        residual_tol: 0.0,
        max_iter: 200,
        max_doublings: 0,
    };
    // Bisection in r to the radial tolerance: stop when the bracket is that
    // narrow rather than on the residual.
    let mut lo = 0.0;
    let mut hi = r_edge;
    while hi - lo > RADIAL_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = bisect(&f, lo, hi, &opts).unwrap_or(0.5 * (lo + hi));
    Ok((at(r), true))
}

/// The KL contour traced along `rays` equally spaced directions; the first
/// point is repeated at the end to close the polyline.
pub fn kl_contour(p: &CategoricalDistribution, delta: f64, rays: usize) -> Result<Vec<(Point, bool)>> {
    let mut pts = Vec::with_capacity(rays + 1);
    for i in 0..rays {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / rays as f64;
        pts.push(kl_contour_point(p, &plane_direction(theta), delta)?);
    }
    if let Some(first) = pts.first().copied() {
        pts.push(first);
    }
    Ok(pts)
}

/// Endpoints of `{w in simplex : Σ_k w_k c_k = level}` for per-symbol costs
/// `c` (here `c_k = log 1/q_k`), or `None` if the line misses the simplex.
pub fn linear_contour_segment(costs: &Point, level: f64) -> Option<(Point, Point)> {
    let mut ends: Vec<Point> = Vec::new();
    for (i, j) in [(0usize, 1usize), (1, 2), (0, 2)] {
        let (ci, cj) = (costs[i], costs[j]);
        if (ci - cj).abs() < 1e-300 {
            continue;
        }
        let s = (level - cj) / (ci - cj);
        if (-1e-12..=1.0 + 1e-12).contains(&s) {
            let s = s.clamp(0.0, 1.0);
            let mut w = [0.0; 3];
            w[i] = s;
            w[j] = 1.0 - s;
            if !ends.iter().any(|e| dist(e, &w) < 1e-12) {
                ends.push(w);
            }
        }
    }
    (ends.len() >= 2).then(|| (ends[0], ends[1]))
}

pub fn dist(a: &Point, b: &Point) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

/// Euclidean distance from `x` to the line through `a` and `b`.
pub fn distance_to_line(x: &Point, a: &Point, b: &Point) -> f64 {
    let d = [0, 1, 2].map(|i| b[i] - a[i]);
    let v = [0, 1, 2].map(|i| x[i] - a[i]);
    let dd: f64 = d.iter().map(|z| z * z).sum();
    let t: f64 = v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / dd;
    let perp = [0, 1, 2].map(|i| v[i] - t * d[i]);
    perp.iter().map(|z| z * z).sum::<f64>().sqrt()
}
