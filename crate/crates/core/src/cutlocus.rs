//! Checks that the inward cut locus of a hull is its tree: a grid medial-axis
//! extraction (2D/3D) and, in any dimension, focusing of inward normal rays.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{axpy, closest_approach, dist, point_segment_distance, scale, Point};
use crate::hull::{cap_directions, ring_directions, BoundarySurface, Patch, Skeleton};

/// Two candidates count as equally near when their distances differ by less than this.
pub const DELTA_D: f64 = 1e-6;
/// ... and as distinct when farther apart than this many grid cells.
pub const DELTA_S_CELLS: f64 = 10.0;

/// A closed boundary with signed distance and local nearest-point candidates.
pub trait Boundary: Sync {
    fn dim(&self) -> usize;
    fn signed_distance(&self, x: &[f64]) -> f64;
    /// Points of the boundary that include every nearest point of `x`.
    fn nearest_candidates(&self, x: &[f64]) -> Vec<Point>;
    fn bounding_box(&self) -> (Point, Point);
}

impl Boundary for BoundarySurface {
    fn dim(&self) -> usize {
        self.dim
    }

    fn signed_distance(&self, x: &[f64]) -> f64 {
        BoundarySurface::signed_distance(self, x)
    }

    fn nearest_candidates(&self, x: &[f64]) -> Vec<Point> {
        self.patches.iter().flat_map(|p| p.candidates(x)).collect()
    }

    fn bounding_box(&self) -> (Point, Point) {
        BoundarySurface::bounding_box(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedialAxisSample {
    pub resolution: usize,
    pub cell: f64,
    pub points: Vec<Point>,
    /// Largest separation among the equally-near boundary points.
    pub spreads: Vec<f64>,
}

/// Grid nodes `h * Z^d` inside the bounding box, `h = extent / resolution`.
fn grid_axes(lo: &[f64], hi: &[f64], h: f64) -> Vec<Vec<f64>> {
    lo.iter()
        .zip(hi)
        .map(|(&a, &b)| ((a / h).ceil() as i64..=(b / h).floor() as i64).map(|i| i as f64 * h).collect())
        .collect()
}

fn classify<B: Boundary>(b: &B, x: &[f64], sep: f64) -> Option<f64> {
    if !(b.signed_distance(x) < 0.0) {
        return None;
    }
    let cands = b.nearest_candidates(x);
    let d: Vec<f64> = cands.iter().map(|c| dist(x, c)).collect();
    let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
    let near: Vec<&Point> = cands.iter().zip(&d).filter(|(_, &di)| di <= dmin + DELTA_D).map(|(c, _)| c).collect();
    let mut spread: f64 = 0.0;
    for i in 0..near.len() {
        for j in i + 1..near.len() {
            spread = spread.max(dist(near[i], near[j]));
        }
    }
    (spread > sep).then_some(spread)
}

pub fn medial_axis<B: Boundary>(b: &B, resolution: usize) -> Result<MedialAxisSample> {
    let dim = b.dim();
    if !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if resolution < 64 {
        return Err(Error::InvalidParams(format!("resolution {resolution} < 64")));
    }
    let (lo, hi) = b.bounding_box();
    let extent = lo.iter().zip(&hi).map(|(a, c)| c - a).fold(0.0, f64::max);
    let h = extent / resolution as f64;
    let axes = grid_axes(&lo, &hi, h);
    let sep = DELTA_S_CELLS * h;
    // parallel over the first axis, rows merged in index order
    let rows: Vec<Vec<(Point, f64)>> = axes[0]
        .par_iter()
        .map(|&x0| {
            let mut out = Vec::new();
            let mut visit = |x: Point| {
                if let Some(s) = classify(b, &x, sep) {
                    out.push((x, s));
                }
            };
            if dim == 2 {
                for &x1 in &axes[1] {
                    visit(vec![x0, x1]);
                }
            } else {
                for &x1 in &axes[1] {
                    for &x2 in &axes[2] {
                        visit(vec![x0, x1, x2]);
                    }
                }
            }
            out
        })
        .collect();
    let (points, spreads) = rows.into_iter().flatten().unzip();
    Ok(MedialAxisSample { resolution, cell: h, points, spreads })
}

pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let directed = |p: &[Point], q: &[Point]| {
        p.par_iter().map(|x| q.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min)).reduce(|| 0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// The expected cut locus: segments plus isolated points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeGeometry {
    pub segments: Vec<(Point, Point)>,
    pub points: Vec<Point>,
}

impl TreeGeometry {
    pub fn from_skeleton(sk: &Skeleton) -> Self {
        let segments = sk.segments();
        let points = if segments.is_empty() { sk.nodes.iter().map(|n| n.sphere.center.clone()).collect() } else { vec![] };
        Self { segments, points }
    }

    pub fn from_tree(t: &crate::tree::TreeApprox) -> Self {
        Self { segments: t.segments().into_iter().map(|s| (s.start, s.end)).collect(), points: vec![] }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let a = self.segments.iter().map(|(p, q)| point_segment_distance(x, p, q)).fold(f64::INFINITY, f64::min);
        self.points.iter().map(|p| dist(x, p)).fold(a, f64::min)
    }

    /// Points along every segment at spacing at most `spacing`.
    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        let mut out = self.points.clone();
        for (p, q) in &self.segments {
            let n = (dist(p, q) / spacing).ceil().max(1.0) as usize;
            for i in 0..=n {
                let t = i as f64 / n as f64;
                out.push(p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayFamily {
    pub patch: usize,
    pub kind: &'static str,
    /// Latitude fraction along the generator for cone families.
    pub latitude: Option<f64>,
    pub rays: usize,
    pub arrival: Point,
    pub spread: f64,
    pub expected: Point,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub families: Vec<RayFamily>,
    pub max_spread: f64,
    pub max_deviation: f64,
}

/// Arrival point and spread of lines `origins[i] + t dirs[i]`.
fn focus(origins: &[Point], dirs: &[Point]) -> (Point, f64) {
    let mut mids = Vec::new();
    let mut gap: f64 = 0.0;
    for i in 0..origins.len() {
        for j in i + 1..origins.len() {
            if let Some((a, b)) = closest_approach(&origins[i], &dirs[i], &origins[j], &dirs[j]) {
                gap = gap.max(dist(&a, &b));
                mids.push(axpy(&a, 0.5, &crate::geometry::sub(&b, &a)));
            }
        }
    }
    if mids.is_empty() {
        return (origins.first().cloned().unwrap_or_default(), f64::INFINITY);
    }
    let n = mids.len() as f64;
    let dim = mids[0].len();
    let arrival: Point = (0..dim).map(|k| mids.iter().map(|m| m[k]).sum::<f64>() / n).collect();
    let scatter = mids.iter().map(|m| dist(m, &arrival)).fold(0.0, f64::max);
    (arrival, gap.max(scatter))
}

fn family(surface: &BoundarySurface, patch: usize, latitude: Option<f64>, pts: Vec<Point>, expected: Point) -> RayFamily {
    let dirs: Vec<Point> = pts.iter().map(|x| scale(&surface.patches[patch].outward_normal(x), -1.0)).collect();
    let (arrival, spread) = focus(&pts, &dirs);
    RayFamily {
        patch,
        kind: surface.patches[patch].kind(),
        latitude,
        rays: pts.len(),
        deviation: dist(&arrival, &expected),
        arrival,
        spread,
        expected,
    }
}

/// Shoot inward normals from latitude circles of every cone patch and from
/// every cap; report where each family focuses.
pub fn ray_concentration(surface: &BoundarySurface, samples_per_patch: usize) -> ConcentrationReport {
    let n = samples_per_patch.max(1);
    let jobs: Vec<(usize, Option<f64>)> = surface
        .patches
        .iter()
        .enumerate()
        .flat_map(|(i, p)| match p {
            Patch::Frustum(_) => (0..n).map(|k| (i, Some((k as f64 + 0.5) / n as f64))).collect::<Vec<_>>(),
            Patch::Cap(_) => vec![(i, None)],
        })
        .collect();
    let families: Vec<RayFamily> = jobs
        .par_iter()
        .map(|&(i, lat)| match (&surface.patches[i], lat) {
            (Patch::Frustum(f), Some(t)) => {
                let pts = ring_directions(&f.axis).iter().map(|e| f.point_at(t, e)).collect();
                family(surface, i, lat, pts, f.focus_at(t))
            }
            (Patch::Cap(c), _) => {
                let pts = cap_directions(c, n).iter().map(|u| axpy(&c.center, c.radius, u)).collect();
                family(surface, i, None, pts, c.center.clone())
            }
            _ => unreachable!(),
        })
        .collect();
    let max_spread = families.iter().map(|f| f.spread).fold(0.0, f64::max);
    let max_deviation = families.iter().map(|f| f.deviation).fold(0.0, f64::max);
    ConcentrationReport { families, max_spread, max_deviation }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutLocusTolerances {
    /// Hausdorff tolerance in grid cells.
    pub hausdorff_cells: f64,
    /// Spread and tree-deviation tolerance for ray families.
    pub concentration: f64,
    pub resolution: usize,
    pub rays_per_patch: usize,
}

impl Default for CutLocusTolerances {
    fn default() -> Self {
        Self { hausdorff_cells: 2.0, concentration: 1e-9, resolution: 512, rays_per_patch: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedialSummary {
    pub resolution: usize,
    pub cell: f64,
    pub points: usize,
    pub hausdorff: f64,
    pub hausdorff_cells: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutLocusReport {
    pub medial: Option<MedialSummary>,
    pub concentration: ConcentrationReport,
    /// Largest distance from a ray arrival to the tree.
    pub max_tree_deviation: f64,
    pub pass: bool,
}

/// Grid medial axis (dimensions 2 and 3) plus ray focusing (any dimension).
pub fn verify_cut_locus(surface: &BoundarySurface, tree: &TreeGeometry, tol: &CutLocusTolerances) -> Result<CutLocusReport> {
    verify_with_medial(surface, tree, tol).map(|(r, _)| r)
}

/// As [`verify_cut_locus`], also returning the medial sample.
pub fn verify_with_medial(
    surface: &BoundarySurface,
    tree: &TreeGeometry,
    tol: &CutLocusTolerances,
) -> Result<(CutLocusReport, Option<MedialAxisSample>)> {
    let mut pass = true;
    let mut sample = None;
    let medial = if surface.dim <= 3 {
        let m = medial_axis(surface, tol.resolution)?;
        let h = if m.points.is_empty() { f64::INFINITY } else { hausdorff_distance(&m.points, &tree.sample(0.25 * m.cell))? };
        pass &= h < tol.hausdorff_cells * m.cell;
        let s = MedialSummary {
            resolution: m.resolution,
            cell: m.cell,
            points: m.points.len(),
            hausdorff: h,
            hausdorff_cells: h / m.cell,
        };
        sample = Some(m);
        Some(s)
    } else {
        None
    };
    let concentration = ray_concentration(surface, tol.rays_per_patch);
    let max_tree_deviation = concentration.families.iter().map(|f| tree.distance(&f.arrival)).fold(0.0, f64::max);
    pass &= concentration.max_spread < tol.concentration && max_tree_deviation < tol.concentration;
    Ok((CutLocusReport { medial, concentration, max_tree_deviation, pass }, sample))
}

/// 2D overlay: boundary, medial sample and tree.
pub fn overlay_svg(surface: &BoundarySurface, medial: &[Point], tree: &TreeGeometry) -> String {
    let (lo, hi) = surface.bounding_box();
    let mut svg = crate::export::Svg::fit([[lo[0], lo[1]], [hi[0], hi[1]]]);
    for piece in surface.outline_2d(720) {
        svg.polyline(&piece, "black", 1.5);
    }
    for (p, q) in &tree.segments {
        svg.line([p[0], p[1]], [q[0], q[1]], "blue", 3.0);
    }
    for x in medial {
        svg.dot([x[0], x[1]], 1.2, "red");
    }
    svg.finish()
}
