//! The scalar sequences `t_i`, `l_i`, `r_i`, `alpha_i` that drive every
//! construction, with certified truncation of the infinite sums.
//!
//! ```text
//! t_i = 3^{-(k-1) i}
//! l_i = t_i / sin(phi 3^{-i})
//! r_i = sum_{v > i} l_v cos(phi 3^{-v})      (i >= -1)
//! alpha_i = alpha_0 3^{-(k-1) i},  alpha_0 = 3^{k-2} / (3^{k-2} - 1)
//! ```
//!
//! For `k = 2` the edge lengths tend to `1/phi`, so `r` and the total length
//! diverge and `alpha_0` has a zero denominator. Those operations report
//! the fact instead of returning numbers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ConstructionParams;

/// A value with an absolute truncation error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounded {
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeLength {
    Finite { value: f64, bound: f64 },
    Divergent,
}

impl TreeLength {
    pub fn value(&self) -> Option<f64> {
        match self {
            TreeLength::Finite { value, .. } => Some(*value),
            TreeLength::Divergent => None,
        }
    }
}

fn pow3(e: i64) -> f64 {
    3f64.powi(e as i32)
}

/// `sin(x)/x`, series form for small arguments.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

pub fn t_seq(i: u32, p: &ConstructionParams) -> f64 {
    pow3(-((p.k as i64 - 1) * i as i64))
}

/// Evaluated as `3^{(2-k) i} / (phi sinc(phi 3^{-i}))`, which never forms the
/// underflowing quotient of two tiny numbers.
pub fn l_seq(i: u32, p: &ConstructionParams) -> f64 {
    let x = p.phi * pow3(-(i as i64));
    pow3((2 - p.k as i64) * i as i64) / (p.phi * sinc(x))
}

/// Angle `phi / 3^i` of the branches at depth `i`.
pub fn branch_angle(i: u32, p: &ConstructionParams) -> f64 {
    p.phi * pow3(-(i as i64))
}

fn ratio_bound(p: &ConstructionParams) -> f64 {
    pow3(2 - p.k as i64)
}

/// Sum `sum_{v >= from} term(v)` for a positive series whose terms are
/// dominated by `l_v`, stopping once the geometric tail bound is below
/// `tol * partial`. Returns the value, the bound and the last index used.
fn sum_dominated_by_l<F: Fn(u32) -> f64>(from: u32, p: &ConstructionParams, tol: f64, term: F) -> (f64, f64, u32) {
    let rho = ratio_bound(p);
    let mut sum = 0.0;
    let mut v = from;
    loop {
        sum += term(v);
        let tail = l_seq(v + 1, p) / (1.0 - rho);
        if tail <= tol * sum || tail == 0.0 {
            return (sum, tail, v);
        }
        v += 1;
    }
}

pub fn r_seq(i: i32, p: &ConstructionParams) -> Result<Bounded> {
    if p.k == 2 {
        return Err(Error::DivergentSeries { k: p.k });
    }
    if i < -1 {
        return Err(Error::InvalidParams(format!("r index {i} < -1")));
    }
    let (value, bound, _) = sum_dominated_by_l((i + 1) as u32, p, p.tail_tol, |v| {
        l_seq(v, p) * branch_angle(v, p).cos()
    });
    Ok(Bounded { value, bound })
}

pub fn alpha0(p: &ConstructionParams) -> Result<f64> {
    if p.k == 2 {
        return Err(Error::DegenerateAlpha { k: p.k });
    }
    let a = pow3(p.k as i64 - 2);
    Ok(a / (a - 1.0))
}

pub fn alpha_seq(i: u32, p: &ConstructionParams) -> Result<f64> {
    Ok(alpha0(p)? * t_seq(i, p))
}

pub fn total_tree_length(p: &ConstructionParams) -> TreeLength {
    if p.k == 2 {
        return TreeLength::Divergent;
    }
    let (value, bound, _) = sum_dominated_by_l(0, p, p.tail_tol, |v| l_seq(v, p));
    TreeLength::Finite { value, bound }
}

/// Cached sequence values for indices `0..=max_index` (and `r_{-1}`).
#[derive(Debug, Clone, Serialize)]
pub struct SequenceTables {
    pub params: ConstructionParams,
    pub max_index: u32,
    pub t: Vec<f64>,
    pub l: Vec<f64>,
    /// `r[i + 1]` holds `r_i`, so `r[0]` is `r_{-1}`.
    pub r: Vec<f64>,
    /// Absolute truncation bound shared by every `r` entry.
    pub r_bound: f64,
    pub alpha: Option<Vec<f64>>,
}

impl SequenceTables {
    /// `r` is obtained from one truncated sum at the top index followed by the
    /// exact backward recursion `r_{i-1} = r_i + l_i cos(phi/3^i)`, so
    /// consecutive radii differ by exactly the projected edge length.
    pub fn build(p: &ConstructionParams, max_index: u32) -> Result<Self> {
        p.validate()?;
        if p.k == 2 {
            return Err(Error::DivergentSeries { k: p.k });
        }
        let t: Vec<f64> = (0..=max_index).map(|i| t_seq(i, p)).collect();
        let l: Vec<f64> = (0..=max_index).map(|i| l_seq(i, p)).collect();
        let top = r_seq(max_index as i32, p)?;
        let mut r = vec![0.0; max_index as usize + 2];
        r[max_index as usize + 1] = top.value;
        for i in (0..=max_index as usize).rev() {
            r[i] = r[i + 1] + l[i] * branch_angle(i as u32, p).cos();
        }
        let alpha = Some((0..=max_index).map(|i| alpha_seq(i, p)).collect::<Result<Vec<_>>>()?);
        Ok(Self { params: *p, max_index, t, l, r, r_bound: top.bound, alpha })
    }

    /// `r_i` for `-1 <= i <= max_index`.
    pub fn r_at(&self, i: i32) -> f64 {
        self.r[(i + 1) as usize]
    }
}
