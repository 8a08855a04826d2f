//! The mandala point system: a self-similar model of the tree endpoints in
//! `R^{n-1}`, its similarity maps and dimension formulas.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{dist, Point};
use crate::params::ConstructionParams;
use crate::sequences::{alpha0, alpha_seq, t_seq};
use crate::tree::Address;

/// `sign(j) e_{|j|}` in `R^{n-1}` (zero for `j = 0`).
fn letter_direction(j: i32, dim: usize) -> Point {
    let mut u = vec![0.0; dim];
    if j != 0 {
        u[j.unsigned_abs() as usize - 1] = j.signum() as f64;
    }
    u
}

/// `y_{j_1..j_m} = sum_i 2 alpha_i u_{j_i}`.
pub fn mandala_point(addr: &Address, p: &ConstructionParams) -> Result<Point> {
    addr.check(p.n)?;
    let mut y = vec![0.0; p.n - 1];
    for (i, &j) in addr.0.iter().enumerate() {
        if j != 0 {
            let a = alpha_seq(i as u32 + 1, p)?;
            y[j.unsigned_abs() as usize - 1] += 2.0 * a * j.signum() as f64;
        }
    }
    Ok(y)
}

/// All mandala points of depth `m` in lexicographic address order.
pub fn mandala_sample(m: usize, p: &ConstructionParams) -> Result<Vec<Point>> {
    use rayon::prelude::*;
    alpha0(p)?;
    let count = (p.branching() as u64).pow(m as u32);
    (0..count).into_par_iter().map(|idx| mandala_point(&Address::from_index(idx, m, p.n), p)).collect()
}

/// `x -> ratio * x + translation`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityMap {
    pub ratio: f64,
    pub translation: Point,
}

impl SimilarityMap {
    pub fn apply(&self, x: &[f64]) -> Point {
        x.iter().zip(&self.translation).map(|(xi, ti)| self.ratio * xi + ti).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilaritySystem {
    pub maps: Vec<SimilarityMap>,
    /// Open-set candidate.
    pub open_set: Ball,
}

impl SimilaritySystem {
    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    /// Apply the maps of `letters` (outermost first) to `x`.
    pub fn compose(&self, letters: &[usize], x: &[f64]) -> Point {
        letters.iter().rev().fold(x.to_vec(), |y, &j| self.maps[j].apply(&y))
    }
}

/// Index of letter `j` in the map list of [`mandala_system`].
pub fn letter_index(j: i32, n: usize) -> usize {
    (j + n as i32 - 1) as usize
}

/// `2n - 1` maps of ratio `3^{1-k}`, letters in increasing order, with
/// `V = B(o, alpha_0 - t_0)`.
pub fn mandala_system(p: &ConstructionParams) -> Result<SimilaritySystem> {
    let a0 = alpha0(p)?;
    let a1 = alpha_seq(1, p)?;
    let c = t_seq(1, p);
    let dim = p.n - 1;
    let top = p.n as i32 - 1;
    let maps = (-top..=top)
        .map(|j| SimilarityMap { ratio: c, translation: crate::geometry::scale(&letter_direction(j, dim), 2.0 * a1) })
        .collect();
    Ok(SimilaritySystem { maps, open_set: Ball { center: vec![0.0; dim], radius: a0 - t_seq(0, p) } })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscReport {
    pub pass: bool,
    /// min of the two margins below; positive means pass.
    pub margin: f64,
    pub containment_margin: f64,
    pub separation_margin: f64,
    pub worst_containment: Option<usize>,
    pub worst_pair: Option<(usize, usize)>,
}

/// Checks that every image ball lies inside `V` and that image balls are
/// pairwise disjoint, using centers and radii.
pub fn check_open_set_condition(sys: &SimilaritySystem) -> OscReport {
    let v = &sys.open_set;
    let images: Vec<Ball> =
        sys.maps.iter().map(|m| Ball { center: m.apply(&v.center), radius: m.ratio * v.radius }).collect();
    let mut containment_margin = f64::INFINITY;
    let mut worst_containment = None;
    for (i, b) in images.iter().enumerate() {
        let m = v.radius - (dist(&b.center, &v.center) + b.radius);
        if m < containment_margin {
            containment_margin = m;
            worst_containment = Some(i);
        }
    }
    let mut separation_margin = f64::INFINITY;
    let mut worst_pair = None;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            let m = dist(&images[i].center, &images[j].center) - images[i].radius - images[j].radius;
            if m < separation_margin {
                separation_margin = m;
                worst_pair = Some((i, j));
            }
        }
    }
    let margin = containment_margin.min(separation_margin);
    OscReport { pass: margin > 0.0, margin, containment_margin, separation_margin, worst_containment, worst_pair }
}

/// Solve `sum c_j^s = 1`. Equal ratios use `log(count)/log(1/c)`.
pub fn moran_from_ratios(ratios: &[f64], tol: f64) -> f64 {
    assert!(!ratios.is_empty() && ratios.iter().all(|&c| c > 0.0 && c < 1.0), "ratios must lie in (0,1)");
    let c0 = ratios[0];
    if ratios.iter().all(|&c| c == c0) {
        return (ratios.len() as f64).ln() / (1.0 / c0).ln();
    }
    let f = |s: f64| ratios.iter().map(|c| c.powf(s)).sum::<f64>() - 1.0;
    // f is strictly decreasing with f(0) = count - 1 >= 0
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < tol || hi - lo < 1e-15 {
            return mid;
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn moran_dimension(sys: &SimilaritySystem, tol: f64) -> f64 {
    moran_from_ratios(&sys.ratios(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionReport {
    pub s: f64,
    /// `1 < s < 2`
    pub in_open_range: bool,
}

/// `s = log(2n-1) / ((k-1) log 3)`; exact when `2n-1` is a power of 3.
pub fn analytic_dimension(k: u32, n: usize) -> DimensionReport {
    let b = 2 * n as u64 - 1;
    let mut e = 0u32;
    let mut v = b;
    while v.is_multiple_of(3) {
        v /= 3;
        e += 1;
    }
    let s = if v == 1 { e as f64 / (k - 1) as f64 } else { (b as f64).ln() / ((k - 1) as f64 * 3f64.ln()) };
    DimensionReport { s, in_open_range: s > 1.0 && s < 2.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalN {
    pub n: usize,
    pub integral: bool,
    /// Exclusive bounds on `n` for `1 < s < 2`.
    pub lower: f64,
    pub upper: f64,
    pub in_range: bool,
}

/// `n = (3^{k-1} + 3) / 2`.
pub fn canonical_n(k: u32) -> CanonicalN {
    let p = 3u64.pow(k - 1);
    let num = p + 3;
    let n = (num / 2) as usize;
    let lower = p as f64 / 2.0;
    let upper = ((p as f64) * (p as f64) + 1.0) / 2.0;
    CanonicalN { n, integral: num.is_multiple_of(2), lower, upper, in_range: (n as f64) > lower && (n as f64) < upper }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn p(k: u32, n: usize) -> ConstructionParams {
        ConstructionParams::new(k, n, FRAC_PI_4, 0.1).unwrap()
    }

    #[test]
    fn mandala_examples() {
        let p = p(3, 6);
        assert_eq!(mandala_point(&Address(vec![0]), &p).unwrap(), vec![0.0; 5]);
        let y1 = mandala_point(&Address(vec![1]), &p).unwrap();
        assert!((y1[0] - 1.0 / 3.0).abs() < 1e-15);
        let y11 = mandala_point(&Address(vec![1, 1]), &p).unwrap();
        assert!((y11[0] - 10.0 / 27.0).abs() < 1e-15);
        let ym = mandala_point(&Address(vec![-3, 2]), &p).unwrap();
        assert!((ym[2] + 1.0 / 3.0).abs() < 1e-15 && (ym[1] - 1.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn k2_is_degenerate() {
        let p = p(2, 3);
        assert!(mandala_point(&Address(vec![1]), &p).is_err());
        assert!(mandala_system(&p).is_err());
    }

    #[test]
    fn system_shape_and_osc() {
        let s = mandala_system(&p(3, 6)).unwrap();
        assert_eq!(s.maps.len(), 11);
        assert!(s.ratios().iter().all(|&c| (c - 1.0 / 9.0).abs() < 1e-17));
        let zero = &s.maps[letter_index(0, 6)];
        assert_eq!(zero.apply(&[0.0; 5]), vec![0.0; 5]);
        let r = check_open_set_condition(&s);
        assert!(r.pass);
        let t1 = 1.0 / 9.0;
        assert!((r.containment_margin - t1).abs() < 1e-12);
        assert!((r.separation_margin - 2.0 * t1).abs() < 1e-12);
    }

    #[test]
    fn osc_failures() {
        let s = mandala_system(&p(3, 3)).unwrap();
        let mut dup = s.clone();
        dup.maps.push(dup.maps[0].clone());
        assert!(!check_open_set_condition(&dup).pass);
        let mut fat = s.clone();
        for m in &mut fat.maps {
            m.ratio *= 4.0;
        }
        let r = check_open_set_condition(&fat);
        assert!(!r.pass && r.containment_margin < 0.0);
    }

    #[test]
    fn composition_matches_points() {
        let p = p(3, 3);
        let s = mandala_system(&p).unwrap();
        for idx in 0..125 {
            let a = Address::from_index(idx, 3, 3);
            let letters: Vec<usize> = a.0.iter().map(|&j| letter_index(j, 3)).collect();
            let y = s.compose(&letters, &[0.0, 0.0]);
            assert!(dist(&y, &mandala_point(&a, &p).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn moran_examples() {
        assert!((moran_from_ratios(&[1.0 / 3.0; 5], 1e-14) - 1.4649735207179272).abs() < 1e-14);
        assert_eq!(moran_from_ratios(&[0.3], 1e-14), 0.0);
        assert!((moran_from_ratios(&[0.5; 4], 1e-14) - 2.0).abs() < 1e-15);
        // unequal: 1/2 + 1/4 solved by golden-ratio power
        let s = moran_from_ratios(&[0.5, 0.25], 1e-14);
        assert!((0.5f64.powf(s) + 0.25f64.powf(s) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn analytic_and_canonical() {
        assert!((analytic_dimension(2, 3).s - 1.4649735207179272).abs() < 1e-15);
        assert!((analytic_dimension(3, 6).s - 1.091329169322069).abs() < 1e-15);
        let b = analytic_dimension(3, 5);
        assert_eq!(b.s, 1.0);
        assert!(!b.in_open_range);
        assert_eq!(canonical_n(2).n, 3);
        assert_eq!(canonical_n(3).n, 6);
        assert_eq!(canonical_n(4).n, 15);
        for k in 2..10 {
            let c = canonical_n(k);
            assert!(c.integral && c.in_range);
            assert!(analytic_dimension(k, c.n).in_open_range);
        }
    }
}
