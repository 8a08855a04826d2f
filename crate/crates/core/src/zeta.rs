//! Finite-difference probe of the regularity of the hull's radius function
//! at an endpoint of the tree.
//!
//! At depth `m` the radius varies by at most the distance sum
//! `D_m = sum_{i >= m} 3^{-(k-1) i} tan(phi 3^{-i} / 2)` over a window of
//! width `h_m = phi 3^{-(m-1)} (r_{m-1} + eps)`. The ratio `D_m / h_m^r`
//! tends to 0 for `r < k`, stays bounded for `r = k` and blows up for `r > k`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ConstructionParams;
use crate::sequences::r_seq;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaRatio {
    pub m: u32,
    pub r: u32,
    pub h: f64,
    /// First term of the distance sum over `h^r`.
    pub leading: f64,
    /// Full distance sum over `h^r`.
    pub tail: f64,
    pub tail_bound: f64,
    /// `tail` times the `2^{k-1}` prefactor.
    pub prefactor_k: f64,
    /// `tail` times the binomial `2^{r-1}` prefactor.
    pub prefactor_r: f64,
}

fn distance_term(i: u32, p: &ConstructionParams) -> f64 {
    let s = 3f64.powi(-(i as i32));
    s.powi(p.k as i32 - 1) * (0.5 * p.phi * s).tan()
}

/// `D_m` with an absolute bound on the dropped tail. Consecutive terms shrink
/// by at least `3^{-k}`.
pub fn distance_sum(m: u32, p: &ConstructionParams) -> (f64, f64) {
    let q = 3f64.powi(-(p.k as i32));
    let mut sum = 0.0;
    let mut i = m;
    loop {
        let t = distance_term(i, p);
        sum += t;
        let next = distance_term(i + 1, p);
        let bound = next / (1.0 - q);
        if bound <= p.tail_tol * sum || i > m + 200 {
            return (sum + next, bound);
        }
        i += 1;
    }
}

pub fn window(m: u32, p: &ConstructionParams) -> Result<f64> {
    let r = r_seq(m as i32 - 1, p)?;
    Ok(p.phi * 3f64.powi(1 - m as i32) * (r.value + p.epsilon))
}

pub fn zeta_ratio(m: u32, r: u32, p: &ConstructionParams) -> Result<ZetaRatio> {
    if p.k == 2 {
        return Err(Error::DivergentSeries { k: 2 });
    }
    if m < 1 || r < 1 {
        return Err(Error::InvalidParams(format!("zeta ratio needs m >= 1 and r >= 1, got m={m}, r={r}")));
    }
    let h = window(m, p)?;
    let hr = h.powi(r as i32);
    let (d, bound) = distance_sum(m, p);
    let tail = d / hr;
    Ok(ZetaRatio {
        m,
        r,
        h,
        leading: distance_term(m, p) / hr,
        tail,
        tail_bound: bound / hr,
        prefactor_k: tail * 2f64.powi(p.k as i32 - 1),
        prefactor_r: tail * 2f64.powi(r as i32 - 1),
    })
}

/// `(1/2) 3^{-k} phi^{1-k} eps^{-k}`, the limit of the leading ratio at `r = k`.
pub fn closed_form_bound(p: &ConstructionParams) -> f64 {
    let k = p.k as i32;
    0.5 * 3f64.powi(-k) * p.phi.powi(1 - k) * p.epsilon.powi(-k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Vanishing,
    Bounded,
    Diverging,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::Vanishing => "vanishing",
            Trend::Bounded => "bounded",
            Trend::Diverging => "diverging",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendFit {
    pub r: u32,
    /// Per-level growth factor `exp(slope)` of the log-linear fit.
    pub growth: f64,
    pub log_residual: f64,
    pub class: Trend,
    pub sup: f64,
    pub last: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub k: u32,
    pub r_max: u32,
    pub m_max: u32,
    pub bound: f64,
    /// `bound / (1 - 3^{-k})`, the limit of the full-sum ratio at `r = k`.
    pub tail_limit: f64,
    pub table: Vec<ZetaRatio>,
    pub trends: Vec<TrendFit>,
    /// Classes are vanishing below `k`, bounded at `k`, diverging above.
    pub boundary_at_k: bool,
    /// Supremum of the leading ratio at `r = k` within `1.001 * bound`.
    pub bounded_within: bool,
}

impl ProbeReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,r,ratio,tail,prefactor_k,prefactor_r,trend\n");
        for z in &self.table {
            let class = self.trends.iter().find(|t| t.r == z.r).map(|t| t.class.as_str()).unwrap_or("");
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                z.m,
                z.r,
                crate::export::sig17(z.leading),
                crate::export::sig17(z.tail),
                crate::export::sig17(z.prefactor_k),
                crate::export::sig17(z.prefactor_r),
                class
            ));
        }
        s
    }
}

fn fit_trend(r: u32, rows: &[ZetaRatio], m_max: u32) -> TrendFit {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|z| z.m >= (m_max / 2).max(1)).map(|z| (z.m as f64, z.leading.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let resid = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    let growth = slope.exp();
    let class = if growth < 0.9 {
        Trend::Vanishing
    } else if growth > 1.1 {
        Trend::Diverging
    } else {
        Trend::Bounded
    };
    TrendFit {
        r,
        growth,
        log_residual: resid,
        class,
        sup: rows.iter().map(|z| z.leading).fold(0.0, f64::max),
        last: rows.last().map(|z| z.leading).unwrap_or(f64::NAN),
    }
}

pub fn differentiability_probe(r_max: u32, m_max: u32, p: &ConstructionParams) -> Result<ProbeReport> {
    if m_max < 4 || r_max < 1 {
        return Err(Error::InvalidParams(format!("probe needs m_max >= 4 and r_max >= 1, got {m_max}, {r_max}")));
    }
    let cells: Vec<(u32, u32)> = (1..=r_max).flat_map(|r| (1..=m_max).map(move |m| (m, r))).collect();
    let table = cells.par_iter().map(|&(m, r)| zeta_ratio(m, r, p)).collect::<Result<Vec<_>>>()?;
    let trends: Vec<TrendFit> = (1..=r_max)
        .map(|r| {
            let rows: Vec<ZetaRatio> = table.iter().filter(|z| z.r == r).copied().collect();
            fit_trend(r, &rows, m_max)
        })
        .collect();
    let boundary_at_k = trends.iter().all(|t| {
        t.class
            == match t.r.cmp(&p.k) {
                std::cmp::Ordering::Less => Trend::Vanishing,
                std::cmp::Ordering::Equal => Trend::Bounded,
                std::cmp::Ordering::Greater => Trend::Diverging,
            }
    });
    let bound = closed_form_bound(p);
    let bounded_within = trends.iter().filter(|t| t.r == p.k).all(|t| t.sup <= bound * 1.001);
    Ok(ProbeReport {
        k: p.k,
        r_max,
        m_max,
        bound,
        tail_limit: bound / (1.0 - 3f64.powi(-(p.k as i32))),
        table,
        trends,
        boundary_at_k,
        bounded_within,
    })
}
