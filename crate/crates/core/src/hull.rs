//! Convex C¹ hulls assembled from spherical caps and truncated cones.
//!
//! A [`Skeleton`] is a rooted tree of balls. Each edge contributes the
//! truncated cone tangent to both end spheres; each node contributes the part
//! of its sphere left after cutting the hole of every outgoing cone and
//! keeping only the region beyond its incoming cone. The boundary of the
//! union of the pairwise convex hulls is the union of these patches, which
//! meet tangentially along circles.

use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{
    angle, any_orthogonal, axpy, dist, dot, norm, normalize, orthonormal_complement, scale, sub, unit, Point,
};
use crate::params::ConstructionParams;
use crate::sequences::{branch_angle, r_seq, SequenceTables};
use crate::tree::{build_tree, node_position, Address};

pub const TANGENCY_TOL: f64 = 1e-9;
const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sphere {
    pub center: Point,
    pub radius: f64,
    pub address: Option<Address>,
    /// `-1` for the sphere about the origin.
    pub level: i32,
}

/// One nappe of a right circular cone. The surface opens from `vertex`
/// in direction `-axis`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cone {
    pub vertex: Point,
    pub axis: Point,
    pub half_angle: f64,
    pub address: Address,
}

impl Cone {
    /// Cone tangent to two spheres, the larger at `parent`.
    pub fn tangent(parent: &Sphere, child: &Sphere, address: Address) -> Result<Cone> {
        let d = sub(&child.center, &parent.center);
        let l = norm(&d);
        let dr = parent.radius - child.radius;
        if !(dr > 0.0 && l > dr) {
            return Err(Error::InvalidParams(format!(
                "no tangent cone: radii {} > {} and distance {l} required",
                parent.radius, child.radius
            )));
        }
        let axis = scale(&d, 1.0 / l);
        let cos_psi = dr / l;
        Ok(Cone {
            vertex: axpy(&parent.center, parent.radius / cos_psi, &axis),
            axis,
            half_angle: FRAC_PI_2 - cos_psi.acos(),
            address,
        })
    }

    /// Exact distance from `x` to the lateral surface, by reduction to the
    /// meridian half-plane.
    pub fn lateral_distance(&self, x: &[f64]) -> f64 {
        let v = sub(x, &self.vertex);
        let s = -dot(&v, &self.axis);
        let w = norm(&axpy(&v, s, &self.axis));
        let (sb, cb) = self.half_angle.sin_cos();
        let t = s * cb + w * sb;
        if t >= 0.0 {
            (w * cb - s * sb).abs()
        } else {
            s.hypot(w)
        }
    }

    /// Base angle `psi = pi/2 - half_angle` between axis and sphere normal
    /// along the tangency circles.
    pub fn psi(&self) -> f64 {
        FRAC_PI_2 - self.half_angle
    }
}

/// `| distance(center, cone) - radius |`
pub fn tangency_residual(cone: &Cone, sphere: &Sphere) -> f64 {
    (cone.lateral_distance(&sphere.center) - sphere.radius).abs()
}

/// Cone of the segment with this address, vertex at distance
/// `(r_{m-1} + offset) / cos(phi/3^m)` from the parent node.
pub fn cone_for_segment_offset(addr: &Address, p: &ConstructionParams, offset: f64) -> Result<Cone> {
    let m = addr.depth();
    let r_parent = r_seq(m as i32 - 1, p)?.value + offset;
    let child = node_position(addr, p)?;
    let parent = match addr.parent() {
        Some(a) => node_position(&a, p)?,
        None => vec![0.0; p.n],
    };
    let axis = normalize(&sub(&child, &parent)).expect("segment has positive length");
    let psi = branch_angle(m as u32, p);
    Ok(Cone {
        vertex: axpy(&parent, r_parent / psi.cos(), &axis),
        axis,
        half_angle: FRAC_PI_2 - psi,
        address: addr.clone(),
    })
}

pub fn cone_for_segment(addr: &Address, p: &ConstructionParams) -> Result<Cone> {
    cone_for_segment_offset(addr, p, 0.0)
}

pub const DEMO_R: f64 = std::f64::consts::SQRT_2;
pub const DEMO_RHO: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkeletonNode {
    pub sphere: Sphere,
    pub parent: Option<usize>,
    /// Cone of the incoming edge.
    pub cone: Option<Cone>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skeleton {
    pub dim: usize,
    pub nodes: Vec<SkeletonNode>,
    /// Number of tree levels below the root edge.
    pub depth: usize,
}

impl Skeleton {
    pub fn ball(center: Point, radius: f64) -> Self {
        let dim = center.len();
        Self {
            dim,
            nodes: vec![SkeletonNode {
                sphere: Sphere { center, radius, address: None, level: -1 },
                parent: None,
                cone: None,
            }],
            depth: 0,
        }
    }

    /// Balls with explicit parents; the cones are the common tangent cones.
    /// Parents must precede children.
    pub fn from_spheres(spheres: Vec<(Point, f64, Option<usize>)>) -> Result<Self> {
        let dim = spheres.first().ok_or(Error::EmptySet)?.0.len();
        let mut nodes: Vec<SkeletonNode> = Vec::with_capacity(spheres.len());
        let mut levels: Vec<i32> = Vec::new();
        for (i, (center, radius, parent)) in spheres.into_iter().enumerate() {
            if center.len() != dim {
                return Err(Error::InvalidParams("mixed dimensions".into()));
            }
            let level = match parent {
                Some(pi) if pi < i => levels[pi] + 1,
                Some(_) => return Err(Error::InvalidParams("parent after child".into())),
                None => -1,
            };
            levels.push(level);
            let address = parent.map(|pi| match &nodes[pi].sphere.address {
                Some(a) => a.child(nodes.iter().filter(|nd| nd.parent == Some(pi)).count() as i32),
                None => Address::root(),
            });
            let sphere = Sphere { center, radius, address, level };
            let cone = match parent {
                Some(pi) => Some(Cone::tangent(&nodes[pi].sphere, &sphere, sphere.address.clone().unwrap())?),
                None => None,
            };
            nodes.push(SkeletonNode { sphere, parent, cone });
        }
        let depth = levels.iter().copied().max().unwrap_or(-1).max(0) as usize;
        Ok(Self { dim, nodes, depth })
    }

    /// `S(o, sqrt 2)` and `S((1,0,..), sqrt 2 / 2)`: a root cone with half-angle `pi/4`.
    pub fn demo(dim: usize) -> Self {
        Self::from_spheres(vec![(vec![0.0; dim], DEMO_R, None), (unit(dim, 0), DEMO_RHO, Some(0))])
            .expect("demo spheres admit a tangent cone")
    }

    /// The hull skeleton `H_m`: origin ball of radius `r_{-1}`, `q` with `r_0`,
    /// every depth-`i` tree node with `r_i`; cones from the segment formula.
    pub fn from_params(depth: usize, p: &ConstructionParams) -> Result<Self> {
        let tab = SequenceTables::build(p, depth as u32)?;
        let tree = build_tree(depth, p)?;
        let mut nodes = vec![SkeletonNode {
            sphere: Sphere { center: tree.origin.clone(), radius: tab.r_at(-1), address: None, level: -1 },
            parent: None,
            cone: None,
        }];
        for nd in &tree.nodes {
            nodes.push(SkeletonNode {
                sphere: Sphere {
                    center: nd.position.clone(),
                    radius: tab.r_at(nd.depth as i32),
                    address: Some(nd.address.clone()),
                    level: nd.depth as i32,
                },
                parent: Some(nd.parent.map_or(0, |pi| pi + 1)),
                cone: Some(cone_for_segment(&nd.address, p)?),
            });
        }
        Ok(Self { dim: p.n, nodes, depth })
    }

    /// Every radius grows by `eps`; cone axes and angles are kept and the
    /// vertices slide outward along the axis.
    pub fn dilated(&self, eps: f64) -> Self {
        let mut out = self.clone();
        for nd in &mut out.nodes {
            nd.sphere.radius += eps;
        }
        for nd in &mut out.nodes {
            if let Some(cone) = nd.cone.as_mut() {
                cone.vertex = axpy(&cone.vertex, eps / cone.psi().cos(), &cone.axis);
            }
        }
        out
    }

    pub fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(move |(_, nd)| nd.parent == Some(i)).map(|(j, _)| j)
    }

    /// Tree segments between ball centers.
    pub fn segments(&self) -> Vec<(Point, Point)> {
        self.nodes
            .iter()
            .filter_map(|nd| nd.parent.map(|pi| (self.nodes[pi].sphere.center.clone(), nd.sphere.center.clone())))
            .collect()
    }
}

/// A circle in `R^n`: center, radius and the unit normal of its 2-plane
/// (in `n > 3` the circle is the `(n-2)`-sphere orthogonal to `normal`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
    pub normal: Point,
}

impl Circle {
    pub fn distance(&self, x: &[f64]) -> f64 {
        let v = sub(x, &self.center);
        let h = dot(&v, &self.normal);
        let radial = norm(&axpy(&v, -h, &self.normal));
        h.hypot(radial - self.radius)
    }
}

/// Spherical cap, possibly with holes. Allowed directions `u` from the center
/// satisfy `angle(u, keep.axis) <= keep.angle` and `angle(u, hole.axis) >= hole.angle`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapPatch {
    pub center: Point,
    pub radius: f64,
    pub keep: Option<AngularDisk>,
    pub holes: Vec<AngularDisk>,
    pub node: usize,
    pub level: i32,
    pub address: Option<Address>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularDisk {
    pub axis: Point,
    pub angle: f64,
}

/// Truncated cone between the tangency circles on the parent and child
/// spheres, described in the meridian half-plane `(s, w)` of the axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrustumPatch {
    pub base: Point,
    pub axis: Point,
    pub length: f64,
    pub parent_radius: f64,
    pub child_radius: f64,
    pub psi: f64,
    pub cone: Cone,
    pub node: usize,
    pub level: i32,
    pub address: Option<Address>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Patch {
    Cap(CapPatch),
    Frustum(FrustumPatch),
}

fn project_to_segment_2d(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (a.0 + t * dx, a.1 + t * dy)
}

impl FrustumPatch {
    fn ends(&self) -> ((f64, f64), (f64, f64)) {
        let (s, c) = self.psi.sin_cos();
        ((self.parent_radius * c, self.parent_radius * s), (self.length + self.child_radius * c, self.child_radius * s))
    }

    /// `(s, w, e_w)`; `e_w` is arbitrary on the axis.
    fn meridian(&self, x: &[f64]) -> (f64, f64, Point) {
        let v = sub(x, &self.base);
        let s = dot(&v, &self.axis);
        let radial = axpy(&v, -s, &self.axis);
        let w = norm(&radial);
        let e = if w > 1e-300 { scale(&radial, 1.0 / w) } else { any_orthogonal(&self.axis) };
        (s, w, e)
    }

    fn lift(&self, s: f64, w: f64, e: &[f64]) -> Point {
        axpy(&axpy(&self.base, s, &self.axis), w, e)
    }

    pub fn nearest(&self, x: &[f64]) -> Point {
        let (s, w, e) = self.meridian(x);
        let (a, b) = self.ends();
        let (ps, pw) = project_to_segment_2d((s, w), a, b);
        self.lift(ps, pw, &e)
    }

    pub fn outward_normal_dir(&self, e_w: &[f64]) -> Point {
        let (sn, cs) = self.psi.sin_cos();
        axpy(&scale(&self.axis, cs), sn, e_w)
    }

    pub fn circles(&self) -> (Circle, Circle) {
        let (sn, cs) = self.psi.sin_cos();
        let c0 = Circle {
            center: axpy(&self.base, self.parent_radius * cs, &self.axis),
            radius: self.parent_radius * sn,
            normal: self.axis.clone(),
        };
        let c1 = Circle {
            center: axpy(&self.base, self.length + self.child_radius * cs, &self.axis),
            radius: self.child_radius * sn,
            normal: self.axis.clone(),
        };
        (c0, c1)
    }

    /// Point on the latitude at fraction `f` of the generator, in direction `e_w`.
    pub fn point_at(&self, f: f64, e_w: &[f64]) -> Point {
        let (a, b) = self.ends();
        self.lift(a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1), e_w)
    }

    /// Axis point reached by the inward normal from latitude fraction `f`.
    pub fn focus_at(&self, f: f64) -> Point {
        let (a, b) = self.ends();
        let s = a.0 + f * (b.0 - a.0);
        let w = a.1 + f * (b.1 - a.1);
        axpy(&self.base, s - w / self.psi.tan(), &self.axis)
    }
}

impl CapPatch {
    pub fn allows(&self, u: &[f64]) -> bool {
        if let Some(k) = &self.keep {
            if angle(u, &k.axis) > k.angle {
                return false;
            }
        }
        self.holes.iter().all(|h| angle(u, &h.axis) >= h.angle)
    }

    /// Allowed direction closest to the unit vector `u`.
    pub fn nearest_direction(&self, u: &[f64]) -> Point {
        let onto_rim = |disk: &AngularDisk| {
            let perp = axpy(u, -dot(u, &disk.axis), &disk.axis);
            let perp = normalize(&perp).unwrap_or_else(|| any_orthogonal(&disk.axis));
            let (s, c) = disk.angle.sin_cos();
            axpy(&scale(&disk.axis, c), s, &perp)
        };
        if let Some(k) = &self.keep {
            if angle(u, &k.axis) > k.angle {
                return onto_rim(k);
            }
        }
        for h in &self.holes {
            if angle(u, &h.axis) < h.angle {
                return onto_rim(h);
            }
        }
        u.to_vec()
    }

    /// A direction guaranteed to be allowed.
    pub fn interior_direction(&self) -> Point {
        match (&self.keep, self.holes.first()) {
            (Some(k), _) => k.axis.clone(),
            (None, Some(h)) => scale(&h.axis, -1.0),
            (None, None) => unit(self.center.len(), 0),
        }
    }

    fn direction_of(&self, x: &[f64]) -> Point {
        normalize(&sub(x, &self.center)).unwrap_or_else(|| self.interior_direction())
    }

    pub fn nearest(&self, x: &[f64]) -> Point {
        let u = self.nearest_direction(&self.direction_of(x));
        axpy(&self.center, self.radius, &u)
    }

    pub fn circles(&self) -> Vec<Circle> {
        let mut out = Vec::new();
        let rim = |d: &AngularDisk| {
            let (s, c) = d.angle.sin_cos();
            Circle { center: axpy(&self.center, self.radius * c, &d.axis), radius: self.radius * s, normal: d.axis.clone() }
        };
        if let Some(k) = &self.keep {
            out.push(rim(k));
        }
        out.extend(self.holes.iter().map(rim));
        out
    }
}

impl Patch {
    pub fn nearest(&self, x: &[f64]) -> Point {
        match self {
            Patch::Cap(c) => c.nearest(x),
            Patch::Frustum(f) => f.nearest(x),
        }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        dist(x, &self.nearest(x))
    }

    /// Nearest point plus the nearest point seen from the opposite side
    /// (mirror radial direction for cones, antipodal direction for caps).
    pub fn candidates(&self, x: &[f64]) -> [Point; 2] {
        match self {
            Patch::Cap(c) => {
                let u = c.direction_of(x);
                let v = scale(&u, -1.0);
                [
                    axpy(&c.center, c.radius, &c.nearest_direction(&u)),
                    axpy(&c.center, c.radius, &c.nearest_direction(&v)),
                ]
            }
            Patch::Frustum(f) => {
                let (s, w, e) = f.meridian(x);
                let (a, b) = f.ends();
                let (ps, pw) = project_to_segment_2d((s, w), a, b);
                let (qs, qw) = project_to_segment_2d((s, -w), a, b);
                [f.lift(ps, pw, &e), f.lift(qs, qw, &scale(&e, -1.0))]
            }
        }
    }

    /// Outward unit normal at a point of (or near) the patch.
    pub fn outward_normal(&self, x: &[f64]) -> Point {
        match self {
            Patch::Cap(c) => c.direction_of(&c.nearest(x)),
            Patch::Frustum(f) => {
                let (_, _, e) = f.meridian(x);
                f.outward_normal_dir(&e)
            }
        }
    }

    pub fn circles(&self) -> Vec<Circle> {
        match self {
            Patch::Cap(c) => c.circles(),
            Patch::Frustum(f) => {
                let (a, b) = f.circles();
                vec![a, b]
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Patch::Cap(_) => "cap",
            Patch::Frustum(_) => "frustum",
        }
    }

    pub fn node(&self) -> usize {
        match self {
            Patch::Cap(c) => c.node,
            Patch::Frustum(f) => f.node,
        }
    }

    /// Deterministic sample of patch points.
    pub fn sample(&self, per_family: usize) -> Vec<Point> {
        let mut out = Vec::new();
        match self {
            Patch::Frustum(f) => {
                let dirs = ring_directions(&f.axis);
                for i in 0..per_family {
                    let t = (i as f64 + 0.5) / per_family as f64;
                    for e in &dirs {
                        out.push(f.point_at(t, e));
                    }
                }
            }
            Patch::Cap(c) => {
                for u in cap_directions(c, per_family) {
                    out.push(axpy(&c.center, c.radius, &u));
                }
            }
        }
        out
    }
}

/// Unit vectors orthogonal to `axis`: the complement basis, its negatives and
/// normalized pairwise sums and differences.
pub fn ring_directions(axis: &[f64]) -> Vec<Point> {
    let basis = orthonormal_complement(axis);
    let mut out = Vec::new();
    for b in &basis {
        out.push(b.clone());
        out.push(scale(b, -1.0));
    }
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let v = axpy(&scale(&basis[i], si), sj, &basis[j]);
                out.push(normalize(&v).unwrap());
            }
        }
    }
    out
}

/// Allowed directions of a cap on a few polar rings about its main axis.
pub fn cap_directions(c: &CapPatch, rings: usize) -> Vec<Point> {
    let (axis, max_angle) = match (&c.keep, c.holes.first()) {
        (Some(k), _) => (k.axis.clone(), k.angle),
        (None, Some(h)) => (scale(&h.axis, -1.0), std::f64::consts::PI),
        (None, None) => (unit(c.center.len(), 0), std::f64::consts::PI),
    };
    let mut out = vec![];
    if c.allows(&axis) {
        out.push(axis.clone());
    }
    let ring = ring_directions(&axis);
    for i in 1..=rings {
        let th = max_angle * i as f64 / (rings as f64 + 1.0);
        let (s, co) = th.sin_cos();
        for e in &ring {
            let u = axpy(&scale(&axis, co), s, e);
            if c.allows(&u) {
                out.push(u);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Seam {
    pub patches: (usize, usize),
    pub circle: Circle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySurface {
    pub dim: usize,
    pub depth: usize,
    pub patches: Vec<Patch>,
    pub seams: Vec<Seam>,
    pub skeleton: Skeleton,
}

struct Edge {
    base: Point,
    axis: Point,
    length: f64,
    r0: f64,
    r1: f64,
    psi: f64,
}

fn edge_of(sk: &Skeleton, i: usize) -> Option<Edge> {
    let nd = &sk.nodes[i];
    let pi = nd.parent?;
    let cone = nd.cone.as_ref()?;
    let base = sk.nodes[pi].sphere.center.clone();
    Some(Edge {
        length: dist(&base, &nd.sphere.center),
        base,
        axis: cone.axis.clone(),
        r0: sk.nodes[pi].sphere.radius,
        r1: nd.sphere.radius,
        psi: cone.psi(),
    })
}

fn label(sk: &Skeleton, i: usize) -> String {
    match &sk.nodes[i].sphere.address {
        Some(a) => format!("node {i} {a}"),
        None => format!("node {i}"),
    }
}

/// Assemble the patches of the hull of a skeleton, checking cone/sphere
/// tangency and that the holes cut from each cap are disjoint and inside it.
pub fn assemble_from_skeleton(sk: &Skeleton) -> Result<BoundarySurface> {
    let n = sk.nodes.len();
    for i in 0..n {
        if let (Some(pi), Some(cone)) = (sk.nodes[i].parent, &sk.nodes[i].cone) {
            for s in [&sk.nodes[pi].sphere, &sk.nodes[i].sphere] {
                let r = tangency_residual(cone, s);
                if !(r < TANGENCY_TOL) {
                    return Err(Error::TangencyViolation { what: label(sk, i), residual: r });
                }
            }
        }
    }
    let edges: Vec<Option<Edge>> = (0..n).map(|i| edge_of(sk, i)).collect();
    let mut patches = Vec::new();
    let mut cap_index = vec![0usize; n];
    let mut frustum_index = vec![usize::MAX; n];
    for i in 0..n {
        let nd = &sk.nodes[i];
        if let Some(e) = &edges[i] {
            frustum_index[i] = patches.len();
            patches.push(Patch::Frustum(FrustumPatch {
                base: e.base.clone(),
                axis: e.axis.clone(),
                length: e.length,
                parent_radius: e.r0,
                child_radius: e.r1,
                psi: e.psi,
                cone: nd.cone.clone().unwrap(),
                node: i,
                level: nd.sphere.level,
                address: nd.sphere.address.clone(),
            }));
        }
        let keep = edges[i].as_ref().map(|e| AngularDisk { axis: e.axis.clone(), angle: e.psi });
        let kids: Vec<usize> = sk.children(i).collect();
        let holes: Vec<AngularDisk> = kids
            .iter()
            .map(|&c| {
                let e = edges[c].as_ref().expect("child edge");
                AngularDisk { axis: e.axis.clone(), angle: e.psi }
            })
            .collect();
        for (a, ha) in holes.iter().enumerate() {
            if let Some(k) = &keep {
                if angle(&ha.axis, &k.axis) + ha.angle > k.angle + ANGLE_SLACK {
                    return Err(Error::OverlappingHoles {
                        what: format!("{}: hole of {} leaves the cap", label(sk, i), label(sk, kids[a])),
                    });
                }
            }
            for (b, hb) in holes.iter().enumerate().skip(a + 1) {
                if angle(&ha.axis, &hb.axis) < ha.angle + hb.angle - ANGLE_SLACK {
                    return Err(Error::OverlappingHoles {
                        what: format!("{}: holes of {} and {} intersect", label(sk, i), label(sk, kids[a]), label(sk, kids[b])),
                    });
                }
            }
        }
        cap_index[i] = patches.len();
        patches.push(Patch::Cap(CapPatch {
            center: nd.sphere.center.clone(),
            radius: nd.sphere.radius,
            keep,
            holes,
            node: i,
            level: nd.sphere.level,
            address: nd.sphere.address.clone(),
        }));
    }
    let mut seams = Vec::new();
    for i in 0..n {
        if let (Some(pi), Some(Patch::Frustum(f))) = (sk.nodes[i].parent, patches.get(frustum_index[i])) {
            let (c0, c1) = f.circles();
            seams.push(Seam { patches: (cap_index[pi], frustum_index[i]), circle: c0 });
            seams.push(Seam { patches: (frustum_index[i], cap_index[i]), circle: c1 });
        }
    }
    Ok(BoundarySurface { dim: sk.dim, depth: sk.depth, patches, seams, skeleton: sk.clone() })
}

/// `partial H_m` for the construction parameters.
pub fn assemble_boundary(depth: usize, p: &ConstructionParams) -> Result<BoundarySurface> {
    assemble_from_skeleton(&Skeleton::from_params(depth, p)?)
}

/// Depth-0 hull of the demo spheres.
pub fn assemble_demo(dim: usize) -> BoundarySurface {
    assemble_from_skeleton(&Skeleton::demo(dim)).expect("demo geometry is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalInfo {
    pub normal: Point,
    pub patch: usize,
    pub on_seam: bool,
}

impl BoundarySurface {
    /// Index and distance of the closest patch.
    pub fn closest_patch(&self, x: &[f64]) -> (usize, f64) {
        self.patches
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.distance(x)))
            .fold((0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc })
    }

    pub fn unsigned_distance(&self, x: &[f64]) -> f64 {
        self.closest_patch(x).1
    }

    /// Membership in the union of edge hulls (or the single ball).
    pub fn contains(&self, x: &[f64]) -> bool {
        self.inside_value(x) < 0.0
    }

    /// Negative inside, via `min_lambda |x - c(lambda)| - r(lambda)` per edge.
    fn inside_value(&self, x: &[f64]) -> f64 {
        let sk = &self.skeleton;
        let mut best = f64::INFINITY;
        let mut any_edge = false;
        for i in 0..sk.nodes.len() {
            if let Some(e) = edge_of(sk, i) {
                any_edge = true;
                let v = sub(x, &e.base);
                let s = dot(&v, &e.axis);
                let w = norm(&axpy(&v, -s, &e.axis));
                let lam = ((s - w / e.psi.tan()) / e.length).clamp(0.0, 1.0);
                let val = (s - lam * e.length).hypot(w) - (e.r0 + lam * (e.r1 - e.r0));
                best = best.min(val);
            }
        }
        if !any_edge {
            for nd in &sk.nodes {
                best = best.min(dist(x, &nd.sphere.center) - nd.sphere.radius);
            }
        }
        best
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let d = self.unsigned_distance(x);
        if self.contains(x) {
            -d
        } else {
            d
        }
    }

    pub fn inward_normal(&self, x: &[f64]) -> NormalInfo {
        let (i, _) = self.closest_patch(x);
        let normal = scale(&self.patches[i].outward_normal(x), -1.0);
        let on_seam = self.seams.iter().any(|s| s.circle.distance(x) < 1e-6);
        NormalInfo { normal, patch: i, on_seam }
    }

    /// Largest angle between the outward normals of the two patches at
    /// sampled points of every seam circle.
    pub fn seam_mismatch(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.seams {
            for e in ring_directions(&s.circle.normal) {
                let p = axpy(&s.circle.center, s.circle.radius, &e);
                let n0 = self.patches[s.patches.0].outward_normal(&p);
                let n1 = self.patches[s.patches.1].outward_normal(&p);
                worst = worst.max(angle(&n0, &n1));
            }
        }
        worst
    }

    /// Largest tangency residual over all cone/sphere pairs.
    pub fn max_tangency_residual(&self) -> f64 {
        let sk = &self.skeleton;
        let mut worst: f64 = 0.0;
        for nd in &sk.nodes {
            if let (Some(pi), Some(c)) = (nd.parent, &nd.cone) {
                worst = worst.max(tangency_residual(c, &sk.nodes[pi].sphere));
                worst = worst.max(tangency_residual(c, &nd.sphere));
            }
        }
        worst
    }

    /// Axis-aligned bounding box of the balls.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for nd in &self.skeleton.nodes {
            for k in 0..self.dim {
                lo[k] = lo[k].min(nd.sphere.center[k] - nd.sphere.radius);
                hi[k] = hi[k].max(nd.sphere.center[k] + nd.sphere.radius);
            }
        }
        (lo, hi)
    }

    pub fn patch_inventory(&self) -> serde_json::Value {
        let items: Vec<serde_json::Value> = self
            .patches
            .iter()
            .map(|p| match p {
                Patch::Cap(c) => serde_json::json!({
                    "type": if c.holes.is_empty() { "cap" } else { "cap_with_holes" },
                    "level": c.level,
                    "address": c.address.as_ref().map(|a| a.0.clone()),
                    "center": c.center,
                    "radius": c.radius,
                    "keep": c.keep,
                    "holes": c.holes,
                }),
                Patch::Frustum(f) => serde_json::json!({
                    "type": "truncated_cone",
                    "level": f.level,
                    "address": f.address.as_ref().map(|a| a.0.clone()),
                    "vertex": f.cone.vertex,
                    "axis": f.axis,
                    "half_angle": f.cone.half_angle,
                    "parent_radius": f.parent_radius,
                    "child_radius": f.child_radius,
                    "length": f.length,
                }),
            })
            .collect();
        serde_json::json!({ "dim": self.dim, "depth": self.depth, "patch_count": self.patches.len(), "patches": items })
    }

    /// Triangulated patches as Wavefront OBJ (3D only), counterclockwise seen
    /// from outside. `res` is the number of azimuthal divisions.
    pub fn to_obj(&self, res: usize) -> Result<String> {
        if self.dim != 3 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        let res = res.max(8);
        let mut verts: Vec<Point> = Vec::new();
        let mut tris: Vec<[usize; 3]> = Vec::new();
        for (pi, patch) in self.patches.iter().enumerate() {
            let grid: Vec<Vec<Point>> = match patch {
                Patch::Frustum(f) => {
                    let basis = orthonormal_complement(&f.axis);
                    (0..=1)
                        .map(|t| {
                            (0..=res)
                                .map(|k| {
                                    let a = 2.0 * std::f64::consts::PI * k as f64 / res as f64;
                                    let e = axpy(&scale(&basis[0], a.cos()), a.sin(), &basis[1]);
                                    f.point_at(t as f64, &e)
                                })
                                .collect()
                        })
                        .collect()
                }
                Patch::Cap(c) => {
                    let (axis, max_angle) = match (&c.keep, c.holes.first()) {
                        (Some(k), _) => (k.axis.clone(), k.angle),
                        (None, Some(h)) => (scale(&h.axis, -1.0), std::f64::consts::PI - h.angle),
                        (None, None) => (unit(3, 0), std::f64::consts::PI),
                    };
                    let basis = orthonormal_complement(&axis);
                    let rings = (res / 2).max(4);
                    (0..=rings)
                        .map(|r| {
                            let th = max_angle * r as f64 / rings as f64;
                            (0..=res)
                                .map(|k| {
                                    let a = 2.0 * std::f64::consts::PI * k as f64 / res as f64;
                                    let e = axpy(&scale(&basis[0], a.cos()), a.sin(), &basis[1]);
                                    axpy(&c.center, c.radius, &axpy(&scale(&axis, th.cos()), th.sin(), &e))
                                })
                                .collect()
                        })
                        .collect()
                }
            };
            let base = verts.len();
            let cols = res + 1;
            for row in &grid {
                verts.extend(row.iter().cloned());
            }
            for r in 0..grid.len() - 1 {
                for k in 0..res {
                    let i00 = base + r * cols + k;
                    let i01 = i00 + 1;
                    let i10 = i00 + cols;
                    let i11 = i10 + 1;
                    for tri in [[i00, i10, i11], [i00, i11, i01]] {
                        let (a, b, c) = (&verts[tri[0]], &verts[tri[1]], &verts[tri[2]]);
                        let ab = sub(b, a);
                        let ac = sub(c, a);
                        let nrm = [
                            ab[1] * ac[2] - ab[2] * ac[1],
                            ab[2] * ac[0] - ab[0] * ac[2],
                            ab[0] * ac[1] - ab[1] * ac[0],
                        ];
                        if norm(&nrm) < 1e-14 {
                            continue;
                        }
                        let cen: Point = (0..3).map(|d| (a[d] + b[d] + c[d]) / 3.0).collect();
                        if let Patch::Cap(cp) = patch {
                            if !cp.allows(&normalize(&sub(&cen, &cp.center)).unwrap()) {
                                continue;
                            }
                        }
                        let out = self.patches[pi].outward_normal(&cen);
                        if dot(&nrm, &out) >= 0.0 {
                            tris.push(tri);
                        } else {
                            tris.push([tri[0], tri[2], tri[1]]);
                        }
                    }
                }
            }
        }
        let mut s = String::new();
        let _ = writeln!(s, "# {} patches, {} vertices, {} triangles", self.patches.len(), verts.len(), tris.len());
        for v in &verts {
            let _ = writeln!(
                s,
                "v {} {} {}",
                crate::export::sig17(v[0]),
                crate::export::sig17(v[1]),
                crate::export::sig17(v[2])
            );
        }
        for t in &tris {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        Ok(s)
    }

    /// Outline of the 2D meridian section (dim 2 only): densely sampled
    /// boundary polyline pieces.
    pub fn outline_2d(&self, per_patch: usize) -> Vec<Vec<[f64; 2]>> {
        let mut out = Vec::new();
        for p in &self.patches {
            match p {
                Patch::Frustum(f) => {
                    for e in ring_directions(&f.axis) {
                        out.push(vec![
                            { let x = f.point_at(0.0, &e); [x[0], x[1]] },
                            { let x = f.point_at(1.0, &e); [x[0], x[1]] },
                        ]);
                    }
                }
                Patch::Cap(c) => {
                    let mut piece = Vec::new();
                    for k in 0..=per_patch {
                        let a = 2.0 * std::f64::consts::PI * k as f64 / per_patch as f64;
                        let u = [a.cos(), a.sin()];
                        if c.allows(&u) {
                            piece.push([c.center[0] + c.radius * u[0], c.center[1] + c.radius * u[1]]);
                        } else if piece.len() > 1 {
                            out.push(std::mem::take(&mut piece));
                        } else {
                            piece.clear();
                        }
                    }
                    if piece.len() > 1 {
                        out.push(piece);
                    }
                }
            }
        }
        out
    }
}

/// Parallel surface at distance `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilatedBall {
    pub base: BoundarySurface,
    pub epsilon: f64,
    pub surface: BoundarySurface,
}

pub fn dilate(surface: &BoundarySurface, eps: f64) -> Result<DilatedBall> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("epsilon = {eps} must be positive")));
    }
    let grown = assemble_from_skeleton(&surface.skeleton.dilated(eps))?;
    Ok(DilatedBall { base: surface.clone(), epsilon: eps, surface: grown })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    /// Depth-1 skeleton around the demo spheres with five children at
    /// `beta = pi/8`, child cones of base angle `pi/24`.
    pub(crate) fn wide_depth_one() -> Skeleton {
        let beta = std::f64::consts::PI / 8.0;
        let psi = std::f64::consts::PI / 24.0;
        let len = 0.3;
        let rho = DEMO_RHO - len * psi.cos();
        let mut spheres = vec![(vec![0.0, 0.0, 0.0], DEMO_R, None), (vec![1.0, 0.0, 0.0], DEMO_RHO, Some(0))];
        for (j, plane) in [(0i32, 1usize), (1, 1), (-1, 1), (1, 2), (-1, 2)] {
            let th = beta * j as f64;
            let mut d = vec![th.cos(), 0.0, 0.0];
            d[plane] += th.sin();
            spheres.push((axpy(&[1.0, 0.0, 0.0], len, &d), rho, Some(1)));
        }
        Skeleton::from_spheres(spheres).unwrap()
    }

    #[test]
    fn demo_cone_and_tangency() {
        let s = Skeleton::demo(2);
        let cone = s.nodes[1].cone.as_ref().unwrap();
        assert!(dist(&cone.vertex, &[2.0, 0.0]) < 1e-15);
        assert!((cone.half_angle - FRAC_PI_4).abs() < 1e-15);
        assert!(tangency_residual(cone, &s.nodes[0].sphere) < 1e-12);
        assert!(tangency_residual(cone, &s.nodes[1].sphere) < 1e-12);
        let mut fat = s.nodes[1].sphere.clone();
        fat.radius += 1e-3;
        assert!((tangency_residual(cone, &fat) - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn series_cones() {
        let p = ConstructionParams::new(3, 3, FRAC_PI_4, 0.1).unwrap();
        for a in [Address::root(), Address(vec![1]), Address(vec![-2, 1])] {
            let c = cone_for_segment(&a, &p).unwrap();
            let m = a.depth() as u32;
            assert!((c.half_angle - (FRAC_PI_2 - branch_angle(m, &p))).abs() < 1e-15);
            let child = node_position(&a, &p).unwrap();
            let parent = a.parent().map_or(vec![0.0; 3], |b| node_position(&b, &p).unwrap());
            let cross = crate::geometry::point_segment_distance(&c.vertex, &parent, &axpy(&parent, 10.0, &c.axis));
            assert!(cross < 1e-12);
            let _ = child;
        }
        let p2 = ConstructionParams::new(2, 3, FRAC_PI_4, 0.1).unwrap();
        assert!(matches!(cone_for_segment(&Address::root(), &p2), Err(Error::DivergentSeries { .. })));
    }

    #[test]
    fn depth_zero_patches() {
        let s = assemble_demo(2);
        assert_eq!(s.patches.len(), 3);
        assert_eq!(s.patches.iter().map(Patch::kind).collect::<Vec<_>>(), ["cap", "frustum", "cap"]);
        assert_eq!(s.seams.len(), 2);
        assert!(s.seam_mismatch() < 1e-12);
        let p = ConstructionParams::new(3, 4, FRAC_PI_4, 0.1).unwrap();
        let s = assemble_boundary(0, &p).unwrap();
        assert_eq!(s.patches.len(), 3);
        assert!(s.max_tangency_residual() < 1e-12);
    }

    #[test]
    fn series_depth_one_holes_overlap() {
        let p = ConstructionParams::new(3, 3, FRAC_PI_4, 0.1).unwrap();
        assert!(matches!(assemble_boundary(1, &p), Err(Error::OverlappingHoles { .. })));
        // tangency itself holds at every level
        let sk = Skeleton::from_params(3, &p).unwrap();
        for nd in &sk.nodes[1..] {
            let c = nd.cone.as_ref().unwrap();
            assert!(tangency_residual(c, &nd.sphere) < 1e-12);
            assert!(tangency_residual(c, &sk.nodes[nd.parent.unwrap()].sphere) < 1e-12);
        }
    }

    #[test]
    fn depth_one_thirteen_patches() {
        let s = assemble_from_skeleton(&wide_depth_one()).unwrap();
        assert_eq!(s.patches.len(), 13);
        let holes: usize = s.patches.iter().map(|p| if let Patch::Cap(c) = p { c.holes.len() } else { 0 }).sum();
        assert_eq!(holes, 6);
        assert!(s.seam_mismatch() < 1e-9);
        assert!(s.max_tangency_residual() < 1e-12);
    }

    #[test]
    fn depth_one_keeps_untouched_patches() {
        let d0 = assemble_demo(3);
        let d1 = assemble_from_skeleton(&wide_depth_one()).unwrap();
        assert_eq!(d0.patches[0], d1.patches[0]);
        assert_eq!(d0.patches[1], d1.patches[1]);
    }

    #[test]
    fn signed_distance_examples() {
        let s = assemble_demo(2);
        assert!((s.signed_distance(&[0.0, 0.0]) + SQRT_2).abs() < 1e-15);
        for p in &s.patches {
            for x in p.sample(7) {
                assert!(s.signed_distance(&x).abs() < 1e-9, "{x:?}");
            }
        }
        let far = [30.0, 0.0];
        let d = s.signed_distance(&far);
        assert!(d > 0.0 && (d - (30.0 - 1.0 - DEMO_RHO)).abs() < 1e-9);
    }

    #[test]
    fn normals() {
        let s = assemble_demo(2);
        let n = s.inward_normal(&[-SQRT_2, 0.0]);
        assert!(dist(&n.normal, &[1.0, 0.0]) < 1e-15 && !n.on_seam);
        // cone point: inward normal reaches the axis at u
        let f = match &s.patches[1] {
            Patch::Frustum(f) => f.clone(),
            _ => unreachable!(),
        };
        let x = f.point_at(0.3, &[0.0, 1.0]);
        let nn = s.inward_normal(&x).normal;
        let t = -x[1] / nn[1];
        let hit = axpy(&x, t, &nn);
        assert!(hit[1].abs() < 1e-15 && dist(&hit, &f.focus_at(0.3)) < 1e-12);
        let seam = s.inward_normal(&[1.0, 1.0]);
        assert!(seam.on_seam);
        assert!(angle(&seam.normal, &[-FRAC_PI_4.cos(), -FRAC_PI_4.sin()]) < 1e-6);
    }

    #[test]
    fn dilation() {
        let s = assemble_demo(2);
        let d = dilate(&s, 0.1).unwrap();
        for p in &s.patches {
            for x in p.sample(5) {
                assert!((d.surface.signed_distance(&x) + 0.1).abs() < 1e-9);
                let a = s.inward_normal(&x).normal;
                let y = axpy(&x, -0.1, &a);
                let b = d.surface.inward_normal(&y).normal;
                assert!(dist(&a, &b) < 1e-12);
            }
        }
        match &d.surface.patches[0] {
            Patch::Cap(c) => assert_eq!(c.radius, SQRT_2 + 0.1),
            _ => unreachable!(),
        }
        assert!(d.surface.max_tangency_residual() < 1e-12);
    }

    #[test]
    fn dilation_matches_offset_radii() {
        let p = ConstructionParams::new(3, 3, FRAC_PI_4, 0.1).unwrap();
        let sk = Skeleton::from_params(0, &p).unwrap().dilated(0.1);
        let direct = cone_for_segment_offset(&Address::root(), &p, 0.1).unwrap();
        assert!(dist(&sk.nodes[1].cone.as_ref().unwrap().vertex, &direct.vertex) < 1e-12);
    }

    #[test]
    fn obj_export() {
        let s = assemble_demo(3);
        let obj = s.to_obj(16).unwrap();
        assert!(obj.lines().filter(|l| l.starts_with("f ")).count() > 100);
        assert!(assemble_demo(2).to_obj(16).is_err());
        assert_eq!(s.patch_inventory()["patch_count"], 3);
    }
}
