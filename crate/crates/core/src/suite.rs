//! The full verification battery, one entry per checked property.

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use serde::Serialize;

use crate::boxcount::{box_counting_dimension, cantor_points, geometric_scales};
use crate::bumps::BumpH;
use crate::cutlocus::{verify_cut_locus, CutLocusTolerances, TreeGeometry};
use crate::error::{Error, Result};
use crate::hull::{assemble_boundary, assemble_demo, dilate, tangency_residual, Skeleton};
use crate::params::ConstructionParams;
use crate::randers::{
    ball_rays, convergence_orders, demo_field, equal_length_check, halton2, partial_ball_ray, potential_defect,
    ray_length_closed_form, region_one_point, MagneticProfile, RandersMetric,
};
use crate::selfsim::{analytic_dimension, mandala_sample, mandala_system, moran_dimension};
use crate::sequences::{alpha0, alpha_seq, r_seq, t_seq, total_tree_length, TreeLength};
use crate::smoothing::{smooth_profile, verify_profile, SeamGeometry};
use crate::tree::{build_tree, verify_sphere_invariant};
use crate::zeta::{differentiability_probe, zeta_ratio};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub k: u32,
    /// Skeleton depth for the cone tangency check.
    pub depth: usize,
    /// Medial-axis grid resolution.
    pub resolution: usize,
    pub phi: f64,
    pub epsilon: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { k: 3, depth: 2, resolution: 512, phi: FRAC_PI_4, epsilon: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {} ({:.3} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "dimension closed form"),
    (2, "box counting vs Moran"),
    (3, "alpha recursion"),
    (4, "tree sphere invariant"),
    (5, "cone tangency"),
    (6, "cut locus at depth 0"),
    (7, "dilatation invariance"),
    (8, "smoothing profile"),
    (9, "differentiability probe"),
    (10, "Randers equal length"),
    (11, "potential exactness"),
    (12, "regime guards"),
];

fn timed(id: u32, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let name = CRITERIA[id as usize - 1].1;
    let start = Instant::now();
    let (pass, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id, name, pass, detail, seconds: start.elapsed().as_secs_f64() }
}

fn params(k: u32, n: usize, cfg: &SuiteConfig) -> Result<ConstructionParams> {
    ConstructionParams::new(k, n, cfg.phi, cfg.epsilon)
}

pub fn dimension_closed_form() -> CriterionResult {
    timed(1, || {
        let start = Instant::now();
        let s = analytic_dimension(2, 3).s;
        let us = start.elapsed().as_secs_f64() * 1e6;
        let pass = (s - 1.46497).abs() < 5e-6 && (s - 5f64.ln() / 3f64.ln()).abs() < 1e-15 && us < 1000.0;
        Ok((pass, format!("s = {s:.6}, under 1 ms: {}", us < 1000.0)))
    })
}

pub fn box_counting(cfg: &SuiteConfig) -> CriterionResult {
    timed(2, || {
        let p = params(3, 6, cfg)?;
        let pts = mandala_sample(4, &p)?;
        let rep = box_counting_dimension(&pts, &geometric_scales(1.0 / 9.0, 4))?;
        let cantor = box_counting_dimension(&cantor_points(10), &geometric_scales(1.0 / 3.0, 8))?;
        let target = moran_dimension(&mandala_system(&p)?, 1e-14);
        let c_target = 2f64.ln() / 3f64.ln();
        let pass = pts.len() == 14641 && (rep.slope - target).abs() < 0.05 && (cantor.slope - c_target).abs() < 0.05;
        Ok((pass, format!("{} points, slope {:.5} (Moran {target:.6}), Cantor {:.5}", pts.len(), rep.slope, cantor.slope)))
    })
}

pub fn alpha_recursion(cfg: &SuiteConfig) -> CriterionResult {
    timed(3, || {
        let mut worst: f64 = 0.0;
        for k in 3..=5 {
            let p = params(k, 3, cfg)?;
            for i in 0..=20 {
                let a = alpha_seq(i, &p)?;
                let rhs = 3.0 * alpha_seq(i + 1, &p)? + t_seq(i, &p);
                worst = worst.max((a - rhs).abs() / a);
            }
        }
        Ok((worst <= 1e-12, format!("max relative defect {worst:.2e}")))
    })
}

pub fn sphere_invariant(cfg: &SuiteConfig) -> CriterionResult {
    timed(4, || {
        let mut worst: f64 = 0.0;
        let mut nodes = 0;
        for n in [3, 6] {
            let p = params(cfg.k, n, cfg)?;
            let rep = verify_sphere_invariant(&build_tree(4, &p)?);
            worst = worst.max(rep.max_residual);
            nodes += rep.checked;
        }
        Ok((worst < 1e-9, format!("{nodes} nodes, max residual {worst:.2e}")))
    })
}

/// Every cone against the spheres at both ends of its segment.
fn skeleton_tangency(sk: &Skeleton) -> f64 {
    let mut worst: f64 = 0.0;
    for nd in &sk.nodes {
        if let (Some(cone), Some(pi)) = (&nd.cone, nd.parent) {
            worst = worst.max(tangency_residual(cone, &nd.sphere)).max(tangency_residual(cone, &sk.nodes[pi].sphere));
        }
    }
    worst
}

pub fn cone_tangency(cfg: &SuiteConfig) -> CriterionResult {
    timed(5, || {
        let demo = assemble_demo(2).max_tangency_residual().max(assemble_demo(3).max_tangency_residual());
        let mut series: f64 = 0.0;
        for n in [3, 6] {
            let p = params(cfg.k, n, cfg)?;
            series = series.max(assemble_boundary(0, &p)?.max_tangency_residual());
            series = series.max(skeleton_tangency(&Skeleton::from_params(cfg.depth, &p)?));
        }
        let pass = demo < 1e-9 && series < 1e-9;
        Ok((pass, format!("demo {demo:.2e}, k={} skeletons to depth {} {series:.2e}", cfg.k, cfg.depth)))
    })
}

fn cut_locus_line(eps: Option<f64>, cfg: &SuiteConfig) -> Result<(bool, String)> {
    let base = assemble_demo(2);
    let tree = TreeGeometry::from_skeleton(&base.skeleton);
    let surface = match eps {
        Some(e) => dilate(&base, e)?.surface,
        None => base,
    };
    let tol = CutLocusTolerances { resolution: cfg.resolution, ..Default::default() };
    let rep = verify_cut_locus(&surface, &tree, &tol)?;
    let cells = rep.medial.as_ref().map_or(f64::NAN, |m| m.hausdorff_cells);
    Ok((
        rep.pass,
        format!(
            "{}hausdorff {cells:.3} cells on {}^2, ray spread {:.1e}, tree deviation {:.1e}",
            eps.map(|e| format!("eps {e}: ")).unwrap_or_default(),
            cfg.resolution,
            rep.concentration.max_spread,
            rep.max_tree_deviation
        ),
    ))
}

pub fn cut_locus(cfg: &SuiteConfig) -> CriterionResult {
    timed(6, || cut_locus_line(None, cfg))
}

pub fn dilatation(cfg: &SuiteConfig) -> CriterionResult {
    timed(7, || {
        let (a, da) = cut_locus_line(Some(0.05), cfg)?;
        let (b, db) = cut_locus_line(Some(0.1), cfg)?;
        Ok((a && b, format!("{da}; {db}")))
    })
}

pub fn smoothing(cfg: &SuiteConfig) -> CriterionResult {
    timed(8, || {
        let mut pass = true;
        let mut parts = Vec::new();
        let seams = [("demo", SeamGeometry::demo(cfg.epsilon)?), ("series", SeamGeometry::from_params(&params(cfg.k, 3, cfg)?)?)];
        for (name, seam) in seams {
            let rep = verify_profile(&smooth_profile(seam)?);
            pass &= rep.pass && rep.normals == 200 && rep.grid_points == 1000;
            parts.push(format!(
                "{name}: |F'| {:.1e}, sandwich {:.2e}, curvature {:.2e}/{:.2e}, crossings {}",
                rep.endpoint_derivative,
                rep.sandwich_margin,
                rep.curvature_margin_f1,
                rep.curvature_margin_f2,
                rep.normal_crossings
            ));
        }
        Ok((pass, parts.join("; ")))
    })
}

pub fn probe(cfg: &SuiteConfig) -> CriterionResult {
    timed(9, || {
        let p = params(3, 3, cfg)?;
        let rep = differentiability_probe(4, 12, &p)?;
        let classes: Vec<&str> = rep.trends.iter().map(|t| t.class.as_str()).collect();
        let sup = rep.trends[2].sup;
        Ok((
            rep.boundary_at_k && rep.bounded_within,
            format!("classes {}, r=3 sup {sup:.4} vs bound {:.4}", classes.join("/"), rep.bound),
        ))
    })
}

fn ball_profile() -> Result<MagneticProfile> {
    MagneticProfile::new(BumpH::new(0.5, 0.5)?, 0.0, 1.0)
}

pub fn equal_length() -> CriterionResult {
    timed(10, || {
        let h = ball_profile()?;
        let m = RandersMetric::ball(h);
        let rep = equal_length_check(&m, &ball_rays(360))?;
        let expected = ray_length_closed_form(&h);
        let err = rep.lengths.iter().map(|l| (l.finslerian - expected).abs()).fold(0.0, f64::max);
        let (ray, exact) = partial_ball_ray(&h, 0.6);
        let orders = convergence_orders(&m, &ray, exact, 8, 4)?;
        let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
        Ok((
            rep.count == 360 && err < 1e-6 && min_order >= 1.9,
            format!("360 rays, max |L - (1 + int h)| {err:.2e}, min order {min_order:.3}"),
        ))
    })
}

pub fn potential_exactness(cfg: &SuiteConfig) -> CriterionResult {
    timed(11, || {
        let metric = RandersMetric::demo(demo_field(BumpH::new(0.5, 0.5)?, cfg.epsilon)?);
        let mut worst: f64 = 0.0;
        for j in 0..100u64 {
            let verts: Vec<[f64; 2]> = (0..5).map(|i| region_one_point(halton2(5 * j + i), cfg.epsilon)).collect();
            worst = worst.max(potential_defect(&metric, &verts)?.abs());
        }
        Ok((worst < 1e-8, format!("100 paths, max defect {worst:.2e}")))
    })
}

pub fn regime_guards() -> CriterionResult {
    timed(12, || {
        let p = ConstructionParams::new(2, 3, FRAC_PI_4, 0.1)?;
        let checks = [
            matches!(r_seq(0, &p), Err(Error::DivergentSeries { k: 2 })),
            matches!(alpha0(&p), Err(Error::DegenerateAlpha { k: 2 })),
            total_tree_length(&p) == TreeLength::Divergent,
            mandala_system(&p).is_err(),
            assemble_boundary(0, &p).is_err(),
            matches!(zeta_ratio(3, 2, &p), Err(Error::DivergentSeries { k: 2 })),
        ];
        let ok = checks.iter().filter(|&&c| c).count();
        Ok((ok == checks.len(), format!("{ok}/{} k=2 operations refused", checks.len())))
    })
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    vec![
        dimension_closed_form(),
        box_counting(cfg),
        alpha_recursion(cfg),
        sphere_invariant(cfg),
        cone_tangency(cfg),
        cut_locus(cfg),
        dilatation(cfg),
        smoothing(cfg),
        probe(cfg),
        equal_length(),
        potential_exactness(cfg),
        regime_guards(),
    ]
}
