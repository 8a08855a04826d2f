//! Randers metrics `F = alpha + beta` over a flat base, with magnetic fields
//! `beta = -h(s) ds` built from bump profiles.
//!
//! Sign convention: moving inward decreases the region coordinate `s`, so
//! `beta` is positive on inward motion and inward rays get longer by `int h`.
//!
//! The demo domain is the hull of `B(o, sqrt2)` and `B((1,0), sqrt2/2)`,
//! dilated by `eps`. It splits into
//!
//! - region 1: the sector of the big ball with `theta` in `[pi/4, 7pi/4]`,
//! - region 2: two strips under the tangent segments, coordinates
//!   `u = x -+ y`, `rho = (x +- y - 1)/sqrt2`,
//! - region 3: the sector of the small ball with `theta` in `[-pi/4, pi/4]`,
//! - the core square `|x - 1/2| + |y| <= 1/2`, where `beta = 0`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, SQRT_2};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bumps::BumpH;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, simpson};

const SEAM_TOL: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-13;

/// `k`-th point of the base-`b` radical inverse sequence.
pub fn radical_inverse(mut k: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut x = 0.0;
    while k > 0 {
        x += (k % b) as f64 * f;
        k /= b;
        f *= inv;
    }
    x
}

pub fn halton2(i: u64) -> [f64; 2] {
    [radical_inverse(i + 1, 2), radical_inverse(i + 1, 3)]
}

/// A bump profile stretched over `[a, b]`: the bump's `[-1, 1]` maps onto
/// the interval, so `h` vanishes near both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagneticProfile {
    pub bump: BumpH,
    pub a: f64,
    pub b: f64,
}

impl MagneticProfile {
    pub fn new(bump: BumpH, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidParams(format!("profile interval [{a}, {b}] is empty")));
        }
        Ok(Self { bump, a, b })
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.a || s >= self.b {
            return 0.0;
        }
        self.bump.eval((2.0 * s - self.a - self.b) / (self.b - self.a))
    }

    pub fn peak(&self) -> f64 {
        self.bump.c
    }

    fn support(&self) -> (f64, f64) {
        let mid = 0.5 * (self.a + self.b);
        let half = 0.5 * (self.b - self.a) * self.bump.delta;
        (mid - half, mid + half)
    }

    /// `int_a^s h`.
    pub fn antiderivative(&self, s: f64) -> f64 {
        let (lo, hi) = self.support();
        let s = s.clamp(lo, hi);
        if s <= lo {
            return 0.0;
        }
        integrate(|t| self.eval(t), lo, s, QUAD_TOL).value
    }

    pub fn integral(&self) -> f64 {
        self.antiderivative(self.b)
    }

    /// Same integral by adaptive Simpson, as an independent check.
    pub fn integral_simpson(&self) -> f64 {
        let (lo, hi) = self.support();
        simpson(|t| self.eval(t), lo, hi, 1e-13).value
    }
}

/// Length of a unit-speed ray through the whole profile interval:
/// `(b - a) + int h`.
pub fn ray_length_closed_form(profile: &MagneticProfile) -> f64 {
    (profile.b - profile.a) + profile.integral()
}

pub fn ray_length_closed_form_simpson(profile: &MagneticProfile) -> f64 {
    (profile.b - profile.a) + profile.integral_simpson()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Cartesian,
    /// `(r, theta)` with `a = diag(1, r^2)`.
    Polar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    One,
    TwoUpper,
    TwoLower,
    Three,
    Core,
}

impl Region {
    pub fn id(&self) -> u8 {
        match self {
            Region::One => 1,
            Region::TwoUpper | Region::TwoLower => 2,
            Region::Three => 3,
            Region::Core => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub region: Region,
    /// `(r1, theta)`, `(rho, u)`, `(r2, theta)`, or the point itself in the core.
    pub coords: [f64; 2],
    pub seam: bool,
}

/// Region tests of the dilated demo domain, used independently of each other.
pub fn region_memberships(p: [f64; 2], eps: f64) -> Vec<Region> {
    let [x, y] = p;
    let big = SQRT_2 + eps;
    let small = FRAC_1_SQRT_2 + eps;
    let mut out = Vec::new();
    let r1 = x.hypot(y);
    if r1 <= big && y.abs() >= x - SEAM_TOL {
        out.push(Region::One);
    }
    for (region, sy) in [(Region::TwoUpper, 1.0), (Region::TwoLower, -1.0)] {
        let u = x - sy * y;
        let rho = (x + sy * y - 1.0) * FRAC_1_SQRT_2;
        if sy * y >= -SEAM_TOL && (-SEAM_TOL..=1.0 + SEAM_TOL).contains(&u) && (-SEAM_TOL..=small).contains(&rho) {
            out.push(region);
        }
    }
    let (dx, r2) = (x - 1.0, (x - 1.0).hypot(y));
    if r2 <= small && dx >= y.abs() - SEAM_TOL {
        out.push(Region::Three);
    }
    if (x - 0.5).abs() + y.abs() <= 0.5 + SEAM_TOL {
        out.push(Region::Core);
    }
    out
}

pub fn classify_region(p: [f64; 2], eps: f64) -> Result<Classification> {
    let [x, y] = p;
    let big = SQRT_2 + eps;
    let small = FRAC_1_SQRT_2 + eps;
    let r1 = x.hypot(y);
    let theta = y.atan2(x);
    let on_diag = (y.abs() - x).abs() * FRAC_1_SQRT_2 < SEAM_TOL;
    if theta.abs() >= FRAC_PI_4 - 1e-15 || on_diag && x >= 0.0 {
        if theta.abs() >= FRAC_PI_4 - 1e-15 && r1 <= big + SEAM_TOL {
            let t = if theta < 0.0 { theta + 2.0 * PI } else { theta };
            return Ok(Classification { region: Region::One, coords: [r1, t], seam: on_diag });
        }
        if theta.abs() >= FRAC_PI_4 - 1e-15 {
            return Err(Error::OutsideDomain(p.to_vec()));
        }
    }
    let sy = if y >= 0.0 { 1.0 } else { -1.0 };
    let u = x - sy * y;
    let rho = (x + sy * y - 1.0) * FRAC_1_SQRT_2;
    if (0.0..=1.0).contains(&u) && (0.0..=small + SEAM_TOL).contains(&rho) {
        let seam = on_diag || (u - 1.0).abs() * FRAC_1_SQRT_2 < SEAM_TOL || rho.abs() < SEAM_TOL;
        let region = if sy > 0.0 { Region::TwoUpper } else { Region::TwoLower };
        return Ok(Classification { region, coords: [rho, u], seam });
    }
    let r2 = (x - 1.0).hypot(y);
    if u > 1.0 && r2 <= small + SEAM_TOL {
        let seam = (u - 1.0).abs() * FRAC_1_SQRT_2 < SEAM_TOL || r2 < SEAM_TOL;
        return Ok(Classification { region: Region::Three, coords: [r2, y.atan2(x - 1.0)], seam });
    }
    if rho < 0.0 {
        return Ok(Classification { region: Region::Core, coords: p, seam: on_diag || rho.abs() < SEAM_TOL });
    }
    Err(Error::OutsideDomain(p.to_vec()))
}

/// Whether `p` lies in the dilated demo domain.
pub fn in_demo_domain(p: [f64; 2], eps: f64) -> bool {
    classify_region(p, eps).is_ok()
}

/// The assembled field on the dilated demo domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemoField {
    pub eps: f64,
    /// Profile in `r1`, supported in `[1/sqrt2, sqrt2 + eps]`.
    pub h1: MagneticProfile,
    /// Profile in `rho`, supported in `[0, sqrt2/2 + eps]`.
    pub h2: MagneticProfile,
    /// Profile in `r2`, supported in `[0, sqrt2/2 + eps]`.
    pub h3: MagneticProfile,
}

/// Field from the same bump in all three regions, which is what continuity
/// across the seams forces.
pub fn demo_field(bump: BumpH, eps: f64) -> Result<DemoField> {
    let small = FRAC_1_SQRT_2 + eps;
    assemble_beta(
        MagneticProfile::new(bump, FRAC_1_SQRT_2, SQRT_2 + eps)?,
        MagneticProfile::new(bump, 0.0, small)?,
        MagneticProfile::new(bump, 0.0, small)?,
        eps,
    )
}

pub fn assemble_beta(h1: MagneticProfile, h2: MagneticProfile, h3: MagneticProfile, eps: f64) -> Result<DemoField> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParams(format!("epsilon = {eps} must be non-negative")));
    }
    let small = FRAC_1_SQRT_2 + eps;
    for h in [&h1, &h2, &h3] {
        if h.peak() >= 1.0 {
            return Err(Error::AmplitudeTooLarge(h.peak()));
        }
        if h.eval(h.a) != 0.0 || h.eval(h.b) != 0.0 {
            return Err(Error::SeamMismatch(format!("profile on [{}, {}] does not vanish at its ends", h.a, h.b)));
        }
    }
    let fits = |h: &MagneticProfile, lo: f64, hi: f64| h.a >= lo - SEAM_TOL && h.b <= hi + SEAM_TOL;
    if !fits(&h1, FRAC_1_SQRT_2, SQRT_2 + eps) || !fits(&h2, 0.0, small) || !fits(&h3, 0.0, small) {
        return Err(Error::SeamMismatch("profile interval leaves its region".into()));
    }
    // region 1/2 seam: r1 = rho + 1/sqrt2; region 2/3 seam: r2 = rho
    for i in 0..=400 {
        let s = small * i as f64 / 400.0;
        let (a, b, c) = (h1.eval(s + FRAC_1_SQRT_2), h2.eval(s), h3.eval(s));
        if (a - b).abs() > 1e-12 || (b - c).abs() > 1e-12 {
            return Err(Error::SeamMismatch(format!("profiles disagree at seam offset {s}: {a}, {b}, {c}")));
        }
    }
    Ok(DemoField { eps, h1, h2, h3 })
}

impl DemoField {
    /// Cartesian coefficients `(b_x, b_y)`.
    pub fn beta(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let c = classify_region(p, self.eps)?;
        let [x, y] = p;
        Ok(match c.region {
            Region::One => {
                let r = c.coords[0];
                let h = self.h1.eval(r);
                if h == 0.0 { [0.0, 0.0] } else { [-h * x / r, -h * y / r] }
            }
            Region::TwoUpper => {
                let h = self.h2.eval(c.coords[0]) * FRAC_1_SQRT_2;
                [-h, -h]
            }
            Region::TwoLower => {
                let h = self.h2.eval(c.coords[0]) * FRAC_1_SQRT_2;
                [-h, h]
            }
            Region::Three => {
                let r = c.coords[0];
                let h = self.h3.eval(r);
                if h == 0.0 { [0.0, 0.0] } else { [-h * (x - 1.0) / r, -h * y / r] }
            }
            Region::Core => [0.0, 0.0],
        })
    }

    /// Global potential with `d psi = beta`.
    pub fn potential(&self, p: [f64; 2]) -> Result<f64> {
        let c = classify_region(p, self.eps)?;
        Ok(match c.region {
            Region::One => -self.h1.antiderivative(c.coords[0]),
            Region::TwoUpper | Region::TwoLower => -self.h2.antiderivative(c.coords[0]),
            Region::Three => -self.h3.antiderivative(c.coords[0]),
            Region::Core => 0.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricDomain {
    Plane,
    /// Polar disk `r <= radius`.
    Ball { radius: f64 },
    DemoHull { eps: f64 },
}

pub type CustomBeta = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub enum BetaField {
    Zero,
    /// Polar `beta = -h(1 - r) dr` on the unit ball.
    BallRadial(MagneticProfile),
    Demo(DemoField),
    Custom(CustomBeta),
}

impl std::fmt::Debug for BetaField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BetaField::Zero => write!(f, "Zero"),
            BetaField::BallRadial(h) => write!(f, "BallRadial({h:?})"),
            BetaField::Demo(d) => write!(f, "Demo({d:?})"),
            BetaField::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandersMetric {
    pub chart: Chart,
    pub field: BetaField,
    pub domain: MetricDomain,
}

impl RandersMetric {
    pub fn euclidean() -> Self {
        Self { chart: Chart::Cartesian, field: BetaField::Zero, domain: MetricDomain::Plane }
    }

    /// Unit ball in polar coordinates with a radial field; `h` is a profile
    /// in the depth `1 - r`.
    pub fn ball(h: MagneticProfile) -> Self {
        Self { chart: Chart::Polar, field: BetaField::BallRadial(h), domain: MetricDomain::Ball { radius: 1.0 } }
    }

    pub fn demo(field: DemoField) -> Self {
        Self { chart: Chart::Cartesian, domain: MetricDomain::DemoHull { eps: field.eps }, field: BetaField::Demo(field) }
    }

    pub fn custom(chart: Chart, domain: MetricDomain, f: CustomBeta) -> Self {
        Self { chart, field: BetaField::Custom(f), domain }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        match self.domain {
            MetricDomain::Plane => true,
            MetricDomain::Ball { radius } => match self.chart {
                Chart::Polar => x[0] >= 0.0 && x[0] <= radius + SEAM_TOL,
                Chart::Cartesian => x[0].hypot(x[1]) <= radius + SEAM_TOL,
            },
            MetricDomain::DemoHull { eps } => in_demo_domain(x, eps),
        }
    }

    fn check(&self, x: [f64; 2]) -> Result<()> {
        if self.contains(x) { Ok(()) } else { Err(Error::OutsideDomain(x.to_vec())) }
    }

    /// Diagonal of `a`.
    pub fn a(&self, x: [f64; 2]) -> [f64; 2] {
        match self.chart {
            Chart::Cartesian => [1.0, 1.0],
            Chart::Polar => [1.0, x[0] * x[0]],
        }
    }

    /// Chart coefficients `(b_1, b_2)`.
    pub fn b(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        match &self.field {
            BetaField::Zero => Ok([0.0, 0.0]),
            BetaField::BallRadial(h) => Ok([-h.eval(1.0 - x[0]), 0.0]),
            BetaField::Demo(d) => d.beta(x),
            BetaField::Custom(f) => Ok(f(x)),
        }
    }

    pub fn alpha(&self, x: [f64; 2], y: [f64; 2]) -> f64 {
        let a = self.a(x);
        (a[0] * y[0] * y[0] + a[1] * y[1] * y[1]).sqrt()
    }

    pub fn beta(&self, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
        let b = self.b(x)?;
        Ok(b[0] * y[0] + b[1] * y[1])
    }

    /// `|beta|_a = sqrt(a^{ij} b_i b_j)`.
    pub fn beta_norm(&self, x: [f64; 2]) -> Result<f64> {
        let a = self.a(x);
        let b = self.b(x)?;
        let t2 = if b[1] == 0.0 { 0.0 } else { b[1] * b[1] / a[1] };
        Ok((b[0] * b[0] / a[0] + t2).sqrt())
    }

    /// Scalar potential `psi` with `d psi = beta`, when the field is exact.
    pub fn potential(&self, x: [f64; 2]) -> Option<f64> {
        match &self.field {
            BetaField::Zero => Some(0.0),
            BetaField::BallRadial(h) => Some(h.antiderivative(1.0 - x[0])),
            BetaField::Demo(d) => d.potential(x).ok(),
            BetaField::Custom(_) => None,
        }
    }
}

pub fn randers_norm(metric: &RandersMetric, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    let norm = metric.beta_norm(x)?;
    if norm >= 1.0 {
        return Err(Error::PositivityViolated { norm });
    }
    Ok(metric.alpha(x, y) + metric.beta(x, y)?)
}

/// Deterministic low-discrepancy chart points inside the metric's domain.
pub fn domain_samples(metric: &RandersMetric, count: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let [u, v] = halton2(i);
        i += 1;
        let p = match metric.domain {
            MetricDomain::Plane => [u, v],
            MetricDomain::Ball { radius } => {
                let r = radius * u.sqrt();
                let t = 2.0 * PI * v;
                match metric.chart {
                    Chart::Polar => [r, t],
                    Chart::Cartesian => [r * t.cos(), r * t.sin()],
                }
            }
            MetricDomain::DemoHull { eps } => {
                let big = SQRT_2 + eps;
                let xmax = 1.0 + FRAC_1_SQRT_2 + eps;
                let p = [-big + u * (big + xmax), big * (2.0 * v - 1.0)];
                if !in_demo_domain(p, eps) {
                    continue;
                }
                p
            }
        };
        out.push(p);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub samples: usize,
    pub sup_norm: f64,
    pub margin: f64,
    pub pass: bool,
}

pub fn positivity_check(metric: &RandersMetric, samples: usize) -> Result<PositivityReport> {
    let pts = domain_samples(metric, samples);
    let norms = pts.par_iter().map(|&x| metric.beta_norm(x)).collect::<Result<Vec<_>>>()?;
    let sup = norms.into_iter().fold(0.0, f64::max);
    Ok(PositivityReport { samples, sup_norm: sup, margin: 1.0 - sup, pass: sup < 1.0 })
}

pub const CLOSEDNESS_STEP: f64 = 1e-5;

fn d5<F: Fn(f64) -> f64>(f: F, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// Max of `|d_1 b_2 - d_2 b_1|` over the samples, by fourth-order central
/// differences with step `CLOSEDNESS_STEP`.
pub fn closedness_residual(metric: &RandersMetric, samples: &[[f64; 2]]) -> Result<f64> {
    let h = CLOSEDNESS_STEP;
    let res = samples
        .par_iter()
        .map(|&x| -> Result<f64> {
            let b = |p: [f64; 2]| metric.b(p).unwrap_or([f64::NAN, f64::NAN]);
            let d1b2 = d5(|t| b([x[0] + t, x[1]])[1], h);
            let d2b1 = d5(|t| b([x[0], x[1] + t])[0], h);
            let r = (d1b2 - d2b1).abs();
            Ok(if r.is_nan() { 0.0 } else { r })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lengths {
    pub riemannian: f64,
    pub finslerian: f64,
}

/// Composite midpoint rule over an ordered sample of chart points, with
/// tangents from consecutive differences.
pub fn curve_length(metric: &RandersMetric, pts: &[[f64; 2]]) -> Result<Lengths> {
    for &p in pts {
        metric.check(p)?;
    }
    let mut ra = 0.0;
    let mut fi = 0.0;
    for w in pts.windows(2) {
        let m = [0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1])];
        let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
        let a = metric.alpha(m, d);
        ra += a;
        fi += a + metric.beta(m, d)?;
    }
    Ok(Lengths { riemannian: ra, finslerian: fi })
}

/// Lengths of the chart segment `p -> q` by adaptive quadrature.
pub fn segment_length(metric: &RandersMetric, p: [f64; 2], q: [f64; 2]) -> Result<Lengths> {
    metric.check(p)?;
    metric.check(q)?;
    let d = [q[0] - p[0], q[1] - p[1]];
    let at = |t: f64| [p[0] + t * d[0], p[1] + t * d[1]];
    let ra = integrate(|t| metric.alpha(at(t), d), 0.0, 1.0, QUAD_TOL).value;
    let be = integrate(|t| metric.beta(at(t), d).unwrap_or(f64::NAN), 0.0, 1.0, QUAD_TOL).value;
    if be.is_nan() {
        return Err(Error::OutsideDomain(p.to_vec()));
    }
    Ok(Lengths { riemannian: ra, finslerian: ra + be })
}

pub fn path_length(metric: &RandersMetric, vertices: &[[f64; 2]]) -> Result<Lengths> {
    let mut total = Lengths { riemannian: 0.0, finslerian: 0.0 };
    for w in vertices.windows(2) {
        let l = segment_length(metric, w[0], w[1])?;
        total.riemannian += l.riemannian;
        total.finslerian += l.finslerian;
    }
    Ok(total)
}

/// `(F - alpha length) - (psi(end) - psi(start))` for a polygonal path.
pub fn potential_defect(metric: &RandersMetric, vertices: &[[f64; 2]]) -> Result<f64> {
    let l = path_length(metric, vertices)?;
    let (Some(a), Some(b)) = (vertices.first(), vertices.last()) else {
        return Err(Error::EmptySet);
    };
    let psi = |x: [f64; 2]| {
        metric.potential(x).ok_or_else(|| Error::InvalidParams("field has no potential".into()))
    };
    Ok((l.finslerian - l.riemannian) - (psi(*b)? - psi(*a)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartRay {
    pub family: String,
    pub start: [f64; 2],
    pub end: [f64; 2],
}

/// `count` inward radial rays of the unit ball, boundary to centre.
pub fn ball_rays(count: usize) -> Vec<ChartRay> {
    (0..count)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / count as f64;
            ChartRay { family: "ball".into(), start: [1.0, t], end: [0.0, t] }
        })
        .collect()
}

/// Boundary-orthogonal inward rays of the dilated demo domain, grouped by
/// the region they cross: region 1 to `o`, region 3 to `(1, 0)`, region 2
/// across the strip.
pub fn demo_ray_families(eps: f64, per_family: usize) -> Vec<Vec<ChartRay>> {
    let big = SQRT_2 + eps;
    let small = FRAC_1_SQRT_2 + eps;
    let frac = |j: usize| (j as f64 + 0.5) / per_family as f64;
    let one = (0..per_family)
        .map(|j| {
            let t = FRAC_PI_4 + 1.5 * PI * frac(j);
            ChartRay { family: "region1".into(), start: [big * t.cos(), big * t.sin()], end: [0.0, 0.0] }
        })
        .collect();
    let three = (0..per_family)
        .map(|j| {
            let t = -FRAC_PI_4 + 0.5 * PI * frac(j);
            ChartRay { family: "region3".into(), start: [1.0 + small * t.cos(), small * t.sin()], end: [1.0, 0.0] }
        })
        .collect();
    let two = (0..per_family)
        .map(|j| {
            let u = frac(j);
            let sy = if j % 2 == 0 { 1.0 } else { -1.0 };
            // rho = small on the tangent segment, 0 on the core edge
            let at = |rho: f64| {
                let s = rho * SQRT_2 + 1.0;
                [0.5 * (s + u), sy * 0.5 * (s - u)]
            };
            ChartRay { family: "region2".into(), start: at(small), end: at(0.0) }
        })
        .collect();
    vec![one, two, three]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualLengthReport {
    pub count: usize,
    pub mean: f64,
    pub max_deviation: f64,
    pub pass: bool,
    #[serde(skip)]
    pub lengths: Vec<Lengths>,
}

impl EqualLengthReport {
    pub fn from_lengths(lengths: Vec<Lengths>) -> Self {
        let n = lengths.len();
        let mean = lengths.iter().map(|l| l.finslerian).sum::<f64>() / n.max(1) as f64;
        let max_deviation = lengths.iter().map(|l| (l.finslerian - mean).abs()).fold(0.0, f64::max);
        Self { count: n, mean, max_deviation, pass: n > 0 && max_deviation < 1e-6, lengths }
    }
}

pub fn equal_length_check(metric: &RandersMetric, rays: &[ChartRay]) -> Result<EqualLengthReport> {
    let lengths = rays.par_iter().map(|r| segment_length(metric, r.start, r.end)).collect::<Result<Vec<_>>>()?;
    Ok(EqualLengthReport::from_lengths(lengths))
}

pub fn rays_csv(rays: &[ChartRay], lengths: &[Lengths]) -> String {
    let mut s = String::from("family,index,riemannian,finslerian\n");
    let mut idx = std::collections::HashMap::<&str, usize>::new();
    for (r, l) in rays.iter().zip(lengths) {
        let i = idx.entry(&r.family).or_default();
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.family,
            i,
            crate::export::sig17(l.riemannian),
            crate::export::sig17(l.finslerian)
        ));
        *i += 1;
    }
    s
}

/// Inward ball ray stopped at depth `depth`, with its exact Finsler length.
/// Stopping inside the bump breaks the symmetry that makes the midpoint rule
/// exact on full rays.
pub fn partial_ball_ray(profile: &MagneticProfile, depth: f64) -> (ChartRay, f64) {
    let ray = ChartRay { family: "ball".into(), start: [1.0, 0.0], end: [1.0 - depth, 0.0] };
    (ray, depth + profile.antiderivative(depth))
}

/// Observed orders `log2(e_N / e_2N)` of `curve_length` on a straight ray
/// against a reference value, for `N = n0, 2 n0, ...`.
pub fn convergence_orders(metric: &RandersMetric, ray: &ChartRay, exact: f64, n0: usize, levels: usize) -> Result<Vec<f64>> {
    let errs = (0..levels)
        .map(|j| {
            let n = n0 << j;
            let pts: Vec<[f64; 2]> = (0..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    [ray.start[0] + t * (ray.end[0] - ray.start[0]), ray.start[1] + t * (ray.end[1] - ray.start[1])]
                })
                .collect();
            curve_length(metric, &pts).map(|l| (l.finslerian - exact).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    // errors at rounding level count as converged
    Ok(errs.windows(2).map(|w| if w[1] < 1e-14 { f64::INFINITY } else { (w[0] / w[1]).log2() }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub family: String,
    pub count: usize,
    pub mean: f64,
    pub expected: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandersReport {
    pub c: f64,
    pub delta: f64,
    pub eps: f64,
    pub positivity: PositivityReport,
    pub closedness_residual: f64,
    pub ball_rays: usize,
    pub ball_expected: f64,
    pub ball_max_error: f64,
    pub ball_deviation: f64,
    pub convergence_orders: Vec<f64>,
    pub families: Vec<FamilyReport>,
    pub max_potential_defect: f64,
    pub pass: bool,
}

/// The standard battery: ball rays, demo-domain families, positivity,
/// closedness and the potential identity on Halton polygonal paths.
pub fn randers_report(bump: BumpH, eps: f64, rays: usize, paths: usize) -> Result<(RandersReport, String)> {
    let profile = MagneticProfile::new(bump, 0.0, 1.0)?;
    let ball = RandersMetric::ball(profile);
    let ball_rays = ball_rays(rays);
    let eq = equal_length_check(&ball, &ball_rays)?;
    let expected = ray_length_closed_form(&profile);
    let ball_max_error = eq.lengths.iter().map(|l| (l.finslerian - expected).abs()).fold(0.0, f64::max);
    let (partial, partial_len) = partial_ball_ray(&profile, 0.6);
    let orders = convergence_orders(&ball, &partial, partial_len, 8, 4)?;

    let field = demo_field(bump, eps)?;
    let demo = RandersMetric::demo(field);
    let positivity = positivity_check(&demo, 4096)?;
    let closed = closedness_residual(&demo, &domain_samples(&demo, 2048))?;

    let mut csv_rays = ball_rays.clone();
    let mut csv_lengths = eq.lengths.clone();
    let mut families = Vec::new();
    for fam in demo_ray_families(eps, 64) {
        let rep = equal_length_check(&demo, &fam)?;
        let name = fam[0].family.clone();
        let expected = match name.as_str() {
            "region1" => SQRT_2 + eps + field.h1.integral(),
            "region2" => ray_length_closed_form(&field.h2),
            _ => ray_length_closed_form(&field.h3),
        };
        families.push(FamilyReport {
            pass: rep.pass && (rep.mean - expected).abs() < 1e-6,
            family: name,
            count: rep.count,
            mean: rep.mean,
            expected,
            max_deviation: rep.max_deviation,
        });
        csv_rays.extend(fam);
        csv_lengths.extend(rep.lengths);
    }

    let mut defect: f64 = 0.0;
    for j in 0..paths {
        let verts: Vec<[f64; 2]> = (0..4).map(|i| region_one_point(halton2((4 * j + i) as u64), eps)).collect();
        defect = defect.max(potential_defect(&demo, &verts)?.abs());
    }

    let pass = eq.pass
        && ball_max_error < 1e-6
        && orders.iter().all(|&o| o >= 1.9)
        && positivity.pass
        && closed < 1e-8
        && families.iter().all(|f| f.pass)
        && defect < 1e-8;
    let report = RandersReport {
        c: bump.c,
        delta: bump.delta,
        eps,
        positivity,
        closedness_residual: closed,
        ball_rays: rays,
        ball_expected: expected,
        ball_max_error,
        ball_deviation: eq.max_deviation,
        convergence_orders: orders,
        families,
        max_potential_defect: defect,
        pass,
    };
    Ok((report, rays_csv(&csv_rays, &csv_lengths)))
}

/// Map a unit-square sample into region 1 of the dilated demo domain.
pub fn region_one_point(uv: [f64; 2], eps: f64) -> [f64; 2] {
    let r = (SQRT_2 + eps) * uv[0].sqrt();
    let t = FRAC_PI_4 + 1.5 * PI * uv[1];
    [r * t.cos(), r * t.sin()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> BumpH {
        BumpH::new(0.5, 0.5).unwrap()
    }

    #[test]
    fn halton_points() {
        assert_eq!(halton2(0), [0.5, 1.0 / 3.0]);
        assert_eq!(halton2(1), [0.25, 2.0 / 3.0]);
        assert!((radical_inverse(3, 2) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn norm_basics() {
        let e = RandersMetric::euclidean();
        assert_eq!(randers_norm(&e, [0.3, 0.2], [0.6, 0.8]).unwrap(), 1.0);
        let h = MagneticProfile::new(bump(), 0.0, 1.0).unwrap();
        let m = RandersMetric::ball(h);
        // depth 0.5 is the bump's centre
        let x = [0.5, 1.0];
        assert!((randers_norm(&m, x, [-1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
        assert!((randers_norm(&m, x, [1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        let y = [0.3, -0.7];
        let f = randers_norm(&m, [0.4, 2.0], y).unwrap();
        let g = randers_norm(&m, [0.4, 2.0], [2.5 * y[0], 2.5 * y[1]]).unwrap();
        assert!((g - 2.5 * f).abs() < 1e-12);
    }

    #[test]
    fn positivity_gate() {
        let m = RandersMetric::ball(MagneticProfile::new(BumpH::unchecked(1.2, 0.5), 0.0, 1.0).unwrap());
        assert!(!positivity_check(&m, 2000).unwrap().pass);
        assert!(matches!(randers_norm(&m, [0.5, 0.0], [1.0, 0.0]), Err(Error::PositivityViolated { .. })));
        let rep = positivity_check(&RandersMetric::ball(MagneticProfile::new(bump(), 0.0, 1.0).unwrap()), 2000).unwrap();
        assert!(rep.pass && (rep.margin - 0.5).abs() < 1e-3);
        let z = positivity_check(&RandersMetric::euclidean(), 10).unwrap();
        assert_eq!(z.margin, 1.0);
    }

    #[test]
    fn classification_examples() {
        let c = classify_region([-1.0, 0.0], 0.0).unwrap();
        assert_eq!(c.region, Region::One);
        assert!((c.coords[1] - PI).abs() < 1e-15);
        let c = classify_region([1.3, 0.0], 0.0).unwrap();
        assert_eq!(c.region, Region::Three);
        assert!((c.coords[0] - 0.3).abs() < 1e-15 && c.coords[1] == 0.0);
        let c = classify_region([1.0, 0.5], 0.0).unwrap();
        assert_eq!(c.region, Region::TwoUpper);
        assert_eq!(classify_region([0.5, 0.0], 0.0).unwrap().region, Region::Core);
        assert!(classify_region([0.75, 0.75], 0.0).unwrap().seam);
        assert!(matches!(classify_region([2.0, 0.0], 0.0), Err(Error::OutsideDomain(_))));
        assert!(matches!(classify_region([1.0, 1.0], 0.0), Ok(Classification { region: Region::One, .. })));
        assert!(classify_region([1.0, 1.05], 0.1).is_ok());
    }

    #[test]
    fn region_cover() {
        let m = RandersMetric::demo(demo_field(bump(), 0.1).unwrap());
        for p in domain_samples(&m, 20000) {
            let c = classify_region(p, 0.1).unwrap();
            let mem = region_memberships(p, 0.1);
            if !c.seam {
                assert_eq!(mem, vec![c.region], "{p:?}");
            } else {
                assert!(mem.contains(&c.region));
            }
        }
    }

    #[test]
    fn beta_vanishes_on_seams_and_boundary() {
        let d = demo_field(bump(), 0.1).unwrap();
        for i in 0..=50 {
            let s = i as f64 / 50.0;
            let t = FRAC_PI_4 + 1.5 * PI * s;
            let big = SQRT_2 + 0.1;
            assert_eq!(d.beta([big * t.cos(), big * t.sin()]).unwrap(), [0.0, 0.0]);
            // inner edge of the strips
            assert_eq!(d.beta([0.5 + 0.5 * s, 0.5 - 0.5 * s]).unwrap(), [0.0, 0.0]);
        }
        // seam 1/2: both sides agree
        for i in 1..20 {
            let r = FRAC_1_SQRT_2 + 0.8 * i as f64 / 20.0;
            let p = [r * FRAC_1_SQRT_2, r * FRAC_1_SQRT_2];
            let a = d.beta([p[0] - 1e-9, p[1] + 1e-9]).unwrap();
            let b = d.beta([p[0] + 1e-9, p[1] - 1e-9]).unwrap();
            assert!((a[0] - b[0]).abs() < 1e-7 && (a[1] - b[1]).abs() < 1e-7);
        }
    }

    #[test]
    fn region_one_is_radial() {
        let d = demo_field(bump(), 0.1).unwrap();
        let p: [f64; 2] = [-1.2, 0.3];
        let r = p[0].hypot(p[1]);
        let b = d.beta(p).unwrap();
        let h = d.h1.eval(r);
        assert_eq!(b, [-h * p[0] / r, -h * p[1] / r]);
    }

    #[test]
    fn mismatched_profiles_rejected() {
        let small = FRAC_1_SQRT_2 + 0.1;
        let h1 = MagneticProfile::new(bump(), FRAC_1_SQRT_2, SQRT_2 + 0.1).unwrap();
        let h2 = MagneticProfile::new(BumpH::new(0.3, 0.5).unwrap(), 0.0, small).unwrap();
        let h3 = MagneticProfile::new(bump(), 0.0, small).unwrap();
        assert!(matches!(assemble_beta(h1, h2, h3, 0.1), Err(Error::SeamMismatch(_))));
        let big = MagneticProfile::new(BumpH::unchecked(1.5, 0.5), 0.0, small).unwrap();
        assert!(matches!(assemble_beta(h1, big, h3, 0.1), Err(Error::AmplitudeTooLarge(_))));
    }

    #[test]
    fn closedness() {
        let m = RandersMetric::demo(demo_field(bump(), 0.1).unwrap());
        let pts = domain_samples(&m, 1000);
        assert!(closedness_residual(&m, &pts).unwrap() < 1e-8);
        let f: CustomBeta = Arc::new(|x: [f64; 2]| [0.0, 0.1 * x[0]]);
        let bad = RandersMetric::custom(Chart::Polar, MetricDomain::Ball { radius: 1.0 }, f);
        let pts = domain_samples(&bad, 100);
        assert!((closedness_residual(&bad, &pts).unwrap() - 0.1).abs() < 1e-8);
        assert_eq!(closedness_residual(&RandersMetric::euclidean(), &pts).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_oracles() {
        let h = MagneticProfile::new(BumpH::new(0.5, 0.25).unwrap(), 0.0, 1.0).unwrap();
        let a = ray_length_closed_form(&h);
        let b = ray_length_closed_form_simpson(&h);
        assert!((a - b).abs() < 1e-10);
        let h2 = MagneticProfile::new(BumpH::unchecked(1.0, 0.25), 0.0, 1.0).unwrap();
        assert!((h2.integral() - 2.0 * h.integral()).abs() < 1e-12);
        // g(s) + g(1 - s) = 1 makes the area c delta (b - a) / 2
        assert!((h.integral() - 0.5 * 0.5 * 0.25).abs() < 1e-13);
        let z = MagneticProfile::new(BumpH::unchecked(0.0, 0.25), 0.0, 1.0).unwrap();
        assert_eq!(ray_length_closed_form(&z), 1.0);
    }

    #[test]
    fn ball_rays_and_reversal() {
        let h = MagneticProfile::new(bump(), 0.0, 1.0).unwrap();
        let m = RandersMetric::ball(h);
        let l = segment_length(&m, [1.0, 0.3], [0.0, 0.3]).unwrap();
        let ih = h.integral();
        assert!((l.riemannian - 1.0).abs() < 1e-14);
        assert!((l.finslerian - (1.0 + ih)).abs() < 1e-12);
        let back = segment_length(&m, [0.0, 0.3], [1.0, 0.3]).unwrap();
        assert!((back.finslerian - (1.0 - ih)).abs() < 1e-12);
        let rep = equal_length_check(&m, &ball_rays(360)).unwrap();
        assert!(rep.pass && (rep.mean - ray_length_closed_form(&h)).abs() < 1e-10);
        let mut lengths = rep.lengths.clone();
        lengths[7].finslerian += 1e-3;
        let bad = EqualLengthReport::from_lengths(lengths);
        assert!(!bad.pass && (bad.max_deviation - 1e-3).abs() < 1e-5);
    }

    #[test]
    fn midpoint_converges() {
        let h = MagneticProfile::new(bump(), 0.0, 1.0).unwrap();
        let m = RandersMetric::ball(h);
        let (ray, exact) = partial_ball_ray(&h, 0.6);
        let orders = convergence_orders(&m, &ray, exact, 8, 4).unwrap();
        assert!(orders.iter().all(|&o| o >= 1.9 && o.is_finite()), "{orders:?}");
        let flat = RandersMetric::euclidean();
        let l = curve_length(&flat, &[[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!((l.riemannian, l.finslerian), (1.0, 1.0));
        assert!(matches!(curve_length(&m, &[[1.5, 0.0], [0.0, 0.0]]), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn full_report() {
        let (rep, csv) = randers_report(bump(), 0.1, 360, 20).unwrap();
        assert!(rep.pass, "{rep:#?}");
        assert_eq!(csv.lines().count(), 1 + 360 + 3 * 64);
    }
}
