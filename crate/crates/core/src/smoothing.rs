//! Smoothing of a cone/cap seam in the meridian plane.
//!
//! Coordinates are rotated so the cone generator is the horizontal line
//! `y = d`, the big sphere's tangency point sits at `x = 0` and the small
//! sphere's at `x = x_c`. The seam profile replaces the corner-free but only
//! C¹ curve `max(f1, d-line, f2)` by
//!
//! ```text
//! F = F1 on [0, x_q],   F = y_b on [x_q, x_s],   F = F2 on [x_s, x_c]
//! F1(x) = d + int_0^x (1 - g_{x_q}(t)) f1'(t) dt
//! F2(x) = d - int_x^{x_c} g_{x_c - x_s}(t - x_s) f2'(t) dt
//! ```
//!
//! with `f1`, `f2` the two circular arcs. Curvature is `F'' / (1 + F'^2)^{3/2}`,
//! so the upper arc of a circle of radius `R` has curvature `-1/R`.

use serde::Serialize;

use crate::bumps::{g_sigma, g_sigma_prime};
use crate::error::{Error, Result};
use crate::params::ConstructionParams;
use crate::quadrature::integrate;
use crate::sequences::SequenceTables;

const QUAD_TOL: f64 = 1e-13;
pub const DEFAULT_FRACTION: f64 = 0.5;

/// Two circles of radii `r1 > r2` with centers `l` apart, and their common
/// tangent line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeamGeometry {
    pub r1: f64,
    pub r2: f64,
    pub l: f64,
    /// Angle between the center line and the tangency normals.
    pub psi: f64,
    /// Tangent length between the two tangency points.
    pub x_c: f64,
}

impl SeamGeometry {
    pub fn from_circles(r1: f64, r2: f64, l: f64) -> Result<Self> {
        let dr = r1 - r2;
        if !(r2 > 0.0 && dr > 0.0 && l > dr) {
            return Err(Error::InvalidParams(format!("circles r1={r1}, r2={r2}, l={l} have no outer tangent")));
        }
        let psi = (dr / l).acos();
        Ok(Self { r1, r2, l, psi, x_c: l * psi.sin() })
    }

    /// Dilated root seam of the demo hull.
    pub fn demo(eps: f64) -> Result<Self> {
        Self::from_circles(crate::hull::DEMO_R + eps, crate::hull::DEMO_RHO + eps, 1.0)
    }

    /// Dilated root seam of the series hull: radii `r_{-1} + eps`, `r_0 + eps`.
    pub fn from_params(p: &ConstructionParams) -> Result<Self> {
        let t = SequenceTables::build(p, 0)?;
        Self::from_circles(t.r_at(-1) + p.epsilon, t.r_at(0) + p.epsilon, t.l[0])
    }

    pub fn d(&self) -> f64 {
        self.r1
    }

    pub fn f1(&self, x: f64) -> f64 {
        (self.r1 * self.r1 - x * x).sqrt()
    }

    pub fn f1_prime(&self, x: f64) -> f64 {
        -x / self.f1(x)
    }

    pub fn f1_second(&self, x: f64) -> f64 {
        -self.r1 * self.r1 / self.f1(x).powi(3)
    }

    fn root2(&self, x: f64) -> f64 {
        let u = x - self.x_c;
        self.r2 * self.r2 - u * u
    }

    /// `-inf` outside the small circle's shadow.
    pub fn f2(&self, x: f64) -> f64 {
        let q = self.root2(x);
        if q < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.r1 - self.r2 + q.sqrt()
        }
    }

    pub fn f2_prime(&self, x: f64) -> f64 {
        -(x - self.x_c) / self.root2(x).sqrt()
    }

    pub fn f2_second(&self, x: f64) -> f64 {
        -self.r2 * self.r2 / self.root2(x).powf(1.5)
    }

    /// Where the two arcs cross inside `(0, x_c)`.
    pub fn x_r(&self) -> f64 {
        bisect(|x| self.f1(x) - self.f2(x), 0.0, self.x_c)
    }

    /// Rotated-frame point to the meridian half-plane with the big center at
    /// the origin and the small center at `(l, 0)`.
    pub fn to_meridian(&self, x: f64, y: f64) -> [f64; 2] {
        let (s, c) = self.psi.sin_cos();
        [x * s + y * c, -x * c + y * s]
    }

    pub fn vector_to_meridian(&self, vx: f64, vy: f64) -> [f64; 2] {
        let (s, c) = self.psi.sin_cos();
        [vx * s + vy * c, -vx * c + vy * s]
    }
}

/// Root of a function positive at `a` and negative at `b`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothedProfile {
    pub seam: SeamGeometry,
    pub x_r: f64,
    pub x_q: f64,
    pub x_s: f64,
    pub y_b: f64,
    /// Lower end of the admissible interval `(y_low, d)` for `y_b`.
    pub y_low: f64,
    pub fraction: f64,
}

/// `F1(x; x_q) = f1(x) - int_0^x g_{x_q} f1'`, equal to the defining integral
/// and exact wherever `g` vanishes.
fn f1_smoothed(seam: &SeamGeometry, x: f64, xq: f64) -> f64 {
    seam.f1(x) - integrate(|t| g_sigma(t, xq) * seam.f1_prime(t), 0.0, x, QUAD_TOL).value
}

/// `F2(x; x_s) = f2(x) + int_x^{x_c} (1 - g) f2'`.
fn f2_smoothed(seam: &SeamGeometry, x: f64, xs: f64) -> f64 {
    let w = seam.x_c - xs;
    seam.f2(x) + integrate(|t| (1.0 - g_sigma(t - xs, w)) * seam.f2_prime(t), x, seam.x_c, QUAD_TOL).value
}

impl SmoothedProfile {
    /// `y_b = d - fraction (d - y_low)`, then `x_q`, `x_s` by bisection.
    pub fn build(seam: SeamGeometry, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParams(format!("fraction {fraction} outside (0, 1)")));
        }
        let x_r = seam.x_r();
        let d = seam.d();
        let y1 = f1_smoothed(&seam, x_r, x_r);
        let y2 = f2_smoothed(&seam, x_r, x_r);
        let y_low = y1.max(y2);
        if !(y_low < d) || !(x_r > 0.0 && x_r < seam.x_c) {
            return Err(Error::NoAdmissibleYb { lo: y_low, hi: d });
        }
        let y_b = d - fraction * (d - y_low);
        // Y1 decreases from d, Y2 increases to d
        let x_q = bisect(|xq| f1_smoothed(&seam, xq, xq) - y_b, 0.0, x_r);
        let x_s = bisect(|xs| y_b - f2_smoothed(&seam, xs, xs), x_r, seam.x_c);
        Ok(Self { seam, x_r, x_q, x_s, y_b, y_low, fraction })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = &self.seam;
        if x <= 0.0 {
            s.f1(x)
        } else if x <= self.x_q {
            f1_smoothed(s, x, self.x_q)
        } else if x < self.x_s {
            self.y_b
        } else if x < s.x_c {
            f2_smoothed(s, x, self.x_s)
        } else {
            s.f2(x)
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        let s = &self.seam;
        if x <= 0.0 {
            s.f1_prime(x)
        } else if x <= self.x_q {
            (1.0 - g_sigma(x, self.x_q)) * s.f1_prime(x)
        } else if x < self.x_s {
            0.0
        } else if x < s.x_c {
            g_sigma(x - self.x_s, s.x_c - self.x_s) * s.f2_prime(x)
        } else {
            s.f2_prime(x)
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        let s = &self.seam;
        if x <= 0.0 {
            s.f1_second(x)
        } else if x <= self.x_q {
            let g = g_sigma(x, self.x_q);
            -g_sigma_prime(x, self.x_q) * s.f1_prime(x) + (1.0 - g) * s.f1_second(x)
        } else if x < self.x_s {
            0.0
        } else if x < s.x_c {
            let w = s.x_c - self.x_s;
            let u = x - self.x_s;
            g_sigma_prime(u, w) * s.f2_prime(x) + g_sigma(u, w) * s.f2_second(x)
        } else {
            s.f2_second(x)
        }
    }

    /// Inward unit normal in the rotated frame.
    pub fn inward_normal(&self, x: f64) -> [f64; 2] {
        let fp = self.d1(x);
        let n = (1.0 + fp * fp).sqrt();
        [fp / n, -1.0 / n]
    }

    pub fn to_svg(&self) -> String {
        let s = &self.seam;
        let n = 400;
        let xs: Vec<f64> = (0..=n).map(|i| s.x_c * i as f64 / n as f64).collect();
        let curve = |f: &dyn Fn(f64) -> f64| xs.iter().map(|&x| [x, f(x)]).filter(|p| p[1].is_finite()).collect::<Vec<_>>();
        let big = curve(&|x| s.f1(x));
        let small = curve(&|x| s.f2(x));
        let prof = curve(&|x| self.eval(x));
        let lo = big.iter().chain(&small).map(|p| p[1]).fold(f64::INFINITY, f64::min).max(s.d() - s.x_c);
        let mut svg = crate::export::Svg::fit([[0.0, lo], [s.x_c, s.d()]]);
        svg.polyline(&[[0.0, s.d()], [s.x_c, s.d()]], "gray", 1.0);
        svg.polyline(&big, "blue", 1.0);
        svg.polyline(&small, "green", 1.0);
        svg.polyline(&prof, "red", 2.0);
        svg.finish()
    }
}

pub fn smooth_profile(seam: SeamGeometry) -> Result<SmoothedProfile> {
    SmoothedProfile::build(seam, DEFAULT_FRACTION)
}

/// Signed curvature `F'' / (1 + F'^2)^{3/2}` from analytic derivatives.
pub fn curvature(profile: &SmoothedProfile, x: f64) -> f64 {
    let fp = profile.d1(x);
    profile.d2(x) / (1.0 + fp * fp).powf(1.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub grid_points: usize,
    pub monotone: bool,
    pub endpoint_value_error: f64,
    pub endpoint_derivative: f64,
    /// `min(d - F, F - max(f1, f2))` over the grid.
    pub sandwich_margin: f64,
    pub sandwich_ok: bool,
    /// `min(k_F - k_f1)` on `[0, x_s]` and `min(k_F - k_f2)` on `[x_s, x_c]`.
    pub curvature_margin_f1: f64,
    pub curvature_margin_f2: f64,
    pub curvature_ok: bool,
    pub normals: usize,
    pub normal_crossings: usize,
    pub pass: bool,
}

/// Proper intersection of segments `p0 p1` and `q0 q1`, ignoring contacts
/// within `tau` of an endpoint (in segment parameter).
fn segments_cross(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2], tau: f64) -> bool {
    let r = [p1[0] - p0[0], p1[1] - p0[1]];
    let s = [q1[0] - q0[0], q1[1] - q0[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den.abs() < 1e-300 {
        return false;
    }
    let w = [q0[0] - p0[0], q0[1] - p0[1]];
    let t = (w[0] * s[1] - w[1] * s[0]) / den;
    let u = (w[0] * r[1] - w[1] * r[0]) / den;
    t > tau && t < 1.0 - tau && u > tau && u < 1.0 - tau
}

pub const GRID_POINTS: usize = 1000;
pub const NORMAL_SAMPLES: usize = 200;

pub fn verify_profile(profile: &SmoothedProfile) -> ProfileReport {
    let s = &profile.seam;
    let d = s.d();
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| s.x_c * i as f64 / (GRID_POINTS - 1) as f64).collect();
    let mut monotone = true;
    let mut sandwich_margin = f64::INFINITY;
    let mut cm1 = f64::INFINITY;
    let mut cm2 = f64::INFINITY;
    for &x in &grid {
        let f = profile.eval(x);
        let lower = s.f1(x).max(s.f2(x));
        sandwich_margin = sandwich_margin.min(d - f).min(f - lower);
        let fp = profile.d1(x);
        if (x < profile.x_q && fp > 1e-15) || (x > profile.x_s && fp < -1e-15) {
            monotone = false;
        }
        let k = curvature(profile, x);
        if x <= profile.x_s {
            cm1 = cm1.min(k + 1.0 / s.r1);
        } else {
            cm2 = cm2.min(k + 1.0 / s.r2);
        }
    }
    let endpoint_value_error = (profile.eval(0.0) - d).abs().max((profile.eval(s.x_c) - d).abs());
    let endpoint_derivative = profile.d1(0.0).abs().max(profile.d1(s.x_c).abs());

    // inward normals down to the axis, in meridian coordinates
    let segs: Vec<([f64; 2], [f64; 2])> = (0..NORMAL_SAMPLES)
        .map(|i| {
            let x = s.x_c * (i as f64 + 0.5) / NORMAL_SAMPLES as f64;
            let p = s.to_meridian(x, profile.eval(x));
            let nrm = profile.inward_normal(x);
            let v = s.vector_to_meridian(nrm[0], nrm[1]);
            let t = -p[1] / v[1];
            (p, [p[0] + t * v[0], 0.0])
        })
        .collect();
    let mut crossings = 0;
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if segments_cross(segs[i].0, segs[i].1, segs[j].0, segs[j].1, 1e-7) {
                crossings += 1;
            }
        }
    }
    let sandwich_ok = sandwich_margin >= -1e-12;
    let curvature_ok = cm1 >= -1e-9 && cm2 >= -1e-9;
    ProfileReport {
        grid_points: grid.len(),
        monotone,
        endpoint_value_error,
        endpoint_derivative,
        sandwich_margin,
        sandwich_ok,
        curvature_margin_f1: cm1,
        curvature_margin_f2: cm2,
        curvature_ok,
        normals: segs.len(),
        normal_crossings: crossings,
        pass: monotone
            && sandwich_ok
            && curvature_ok
            && crossings == 0
            && endpoint_derivative < 1e-9
            && endpoint_value_error < 1e-9,
    }
}
