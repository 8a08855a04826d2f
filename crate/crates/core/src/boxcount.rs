//! Box-counting dimension estimates.
//!
//! Boxes of side `delta` are centered on the lattice `delta Z^d`, so a point
//! `x` falls in the box with index `floor(x / delta + 1/2)`. The estimate is
//! the least-squares slope of `log N(delta)` against `log(1/delta)`.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountReport {
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub reliable: bool,
}

pub const MIN_POINTS: usize = 1000;
pub const MIN_SCALES: usize = 4;
pub const RESIDUAL_LIMIT: f64 = 0.1;

fn count_at(points: &[Point], delta: f64) -> usize {
    let set: HashSet<Vec<i64>> =
        points.iter().map(|x| x.iter().map(|&v| (v / delta + 0.5).floor() as i64).collect()).collect();
    set.len()
}

/// Occupied box counts per scale.
pub fn box_counts(points: &[Point], scales: &[f64]) -> Vec<usize> {
    scales.par_iter().map(|&d| count_at(points, d)).collect()
}

/// Unweighted least squares `y = a + b x`; returns `(b, a, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    (b, a, (ss / n).sqrt())
}

pub fn box_counting_dimension(points: &[Point], scales: &[f64]) -> Result<BoxCountReport> {
    if points.len() < MIN_POINTS {
        return Err(Error::InvalidParams(format!("{} points, need at least {MIN_POINTS}", points.len())));
    }
    if scales.len() < MIN_SCALES || scales.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::DegenerateScales(format!("need {MIN_SCALES} positive scales, got {scales:?}")));
    }
    let counts = box_counts(points, scales);
    let distinct: HashSet<usize> = counts.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::DegenerateScales(format!("counts {counts:?} take fewer than 2 distinct values")));
    }
    let x: Vec<f64> = scales.iter().map(|d| (1.0 / d).ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept, residual) = linear_fit(&x, &y);
    Ok(BoxCountReport {
        scales: scales.to_vec(),
        counts,
        slope,
        intercept,
        residual,
        reliable: residual <= RESIDUAL_LIMIT,
    })
}

/// `ratio^j` for `j = 1..=count`.
pub fn geometric_scales(ratio: f64, count: usize) -> Vec<f64> {
    (1..=count as i32).map(|j| ratio.powi(j)).collect()
}

/// Left endpoints of the middle-third Cantor intervals at `depth`.
pub fn cantor_points(depth: u32) -> Vec<Point> {
    let mut pts = vec![0.0f64];
    let mut len = 1.0;
    for _ in 0..depth {
        len /= 3.0;
        pts = pts.iter().flat_map(|&x| [x, x + 2.0 * len]).collect();
    }
    pts.into_iter().map(|x| vec![x]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_is_one_dimensional() {
        let pts: Vec<Point> = (0..10_000).map(|i| vec![i as f64 / 9999.0]).collect();
        let r = box_counting_dimension(&pts, &geometric_scales(0.5, 9)[1..]).unwrap();
        assert!((r.slope - 1.0).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn cantor_control() {
        let r = box_counting_dimension(&cantor_points(10), &geometric_scales(1.0 / 3.0, 8)).unwrap();
        assert!((r.slope - 2f64.ln() / 3f64.ln()).abs() < 1e-3, "{r:?}");
        assert!(r.reliable);
    }

    #[test]
    fn degenerate_inputs() {
        let pts: Vec<Point> = (0..2000).map(|_| vec![0.25]).collect();
        assert!(matches!(box_counting_dimension(&pts, &[0.1, 0.01, 0.001, 1e-4]), Err(Error::DegenerateScales(_))));
        assert!(box_counting_dimension(&pts[..10], &[0.1, 0.01, 0.001, 1e-4]).is_err());
        assert!(box_counting_dimension(&cantor_points(10), &[0.1, 0.01]).is_err());
    }

    #[test]
    fn fit_exact_line() {
        let (b, a, r) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((b - 2.0).abs() < 1e-15 && (a - 1.0).abs() < 1e-15 && r < 1e-15);
    }
}
