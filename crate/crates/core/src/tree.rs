//! Finite approximations `IT_m` of the infinite branching tree.
//!
//! The root segment runs from the origin `o` to `q = (l_0, 0, ..., 0)`. Every
//! node at depth `i - 1` sprouts `2n - 1` children at distance `l_i`,
//! indexed by letters `j in {-(n-1), ..., n-1}`: letter `0` continues
//! straight, letter `j != 0` bends by `sign(j) phi / 3^i` towards `e_{|j|+1}`.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{dist, Point};
use crate::params::ConstructionParams;
use crate::sequences::{branch_angle, l_seq};

pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// A finite word `j_1 ... j_m`; ordered lexicographically by letter value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Address(pub Vec<i32>);

impl Address {
    pub fn root() -> Self {
        Address(Vec::new())
    }

    pub fn new(letters: &[i32], n: usize) -> Result<Self> {
        let a = Address(letters.to_vec());
        a.check(n)?;
        Ok(a)
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let top = n as i32 - 1;
        match self.0.iter().find(|j| j.abs() > top) {
            Some(&letter) => Err(Error::AlphabetOutOfRange { letter, n }),
            None => Ok(()),
        }
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn parent(&self) -> Option<Address> {
        if self.0.is_empty() {
            None
        } else {
            Some(Address(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, j: i32) -> Address {
        let mut w = self.0.clone();
        w.push(j);
        Address(w)
    }

    /// Address with mixed-radix index `idx` among all words of length `m`
    /// in lexicographic order.
    pub fn from_index(mut idx: u64, m: usize, n: usize) -> Address {
        let b = (2 * n - 1) as u64;
        let mut w = vec![0i32; m];
        for slot in w.iter_mut().rev() {
            *slot = (idx % b) as i32 - (n as i32 - 1);
            idx /= b;
        }
        Address(w)
    }

    pub fn letters_joined(&self, sep: &str) -> String {
        self.0.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(sep)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.letters_joined(","))
    }
}

/// Rotate `p` about the affine subspace through `center` orthogonal to the
/// coordinate plane `(a, b)` (1-based). Positive angles turn `e_a` towards `e_b`.
pub fn rotate(p: &[f64], center: &[f64], plane: (usize, usize), theta: f64) -> Point {
    let (a, b) = (plane.0 - 1, plane.1 - 1);
    assert!(a != b && a < p.len() && b < p.len(), "bad rotation plane {plane:?}");
    let mut out = p.to_vec();
    rotate_in_place(&mut out, center[a], center[b], a, b, theta);
    out
}

#[inline]
fn rotate_in_place(x: &mut [f64], ca: f64, cb: f64, a: usize, b: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    let u = x[a] - ca;
    let v = x[b] - cb;
    x[a] = ca + c * u - s * v;
    x[b] = cb + s * u + c * v;
}

fn lengths(m: usize, p: &ConstructionParams) -> Vec<f64> {
    (0..=m as u32).map(|i| l_seq(i, p)).collect()
}

fn position_with(addr: &Address, p: &ConstructionParams, l: &[f64]) -> Point {
    let m = addr.depth();
    let mut x = vec![0.0; p.n];
    // spine partial sums: spine[i] = sum_{v < i} l_v
    let mut spine = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    for &lv in l.iter().take(m + 1) {
        spine.push(acc);
        acc += lv;
    }
    x[0] = acc;
    for i in (1..=m).rev() {
        let j = addr.0[i - 1];
        if j != 0 {
            let theta = branch_angle(i as u32, p).copysign(j as f64);
            rotate_in_place(&mut x, spine[i], 0.0, 0, j.unsigned_abs() as usize, theta);
        }
    }
    x
}

/// Position of the node `q_{j_1 ... j_m}`; the empty address gives `q`.
pub fn node_position(addr: &Address, p: &ConstructionParams) -> Result<Point> {
    addr.check(p.n)?;
    Ok(position_with(addr, p, &lengths(addr.depth(), p)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeNode {
    pub address: Address,
    pub position: Point,
    pub depth: usize,
    /// Index of the parent in [`TreeApprox::nodes`]; `None` means the origin.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
    pub address: Address,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ray {
    pub origin: Point,
    pub direction: Point,
    pub address: Address,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeApprox {
    pub params: ConstructionParams,
    pub depth: usize,
    pub origin: Point,
    /// `q` first, then depth 1, 2, ... each in lexicographic order.
    pub nodes: Vec<TreeNode>,
}

fn level_count(b: u128, m: usize) -> u128 {
    b.saturating_pow(m as u32)
}

/// Total node count `1 + sum_{i=0..m} (2n-1)^i`, saturating.
pub fn node_count(m: usize, n: usize) -> u128 {
    let b = (2 * n - 1) as u128;
    (0..=m).fold(1u128, |acc, i| acc.saturating_add(level_count(b, i)))
}

impl TreeApprox {
    pub fn node_count(&self) -> usize {
        1 + self.nodes.len()
    }

    pub fn parent_position(&self, idx: usize) -> &[f64] {
        match self.nodes[idx].parent {
            Some(pi) => &self.nodes[pi].position,
            None => &self.origin,
        }
    }

    pub fn segments(&self) -> Vec<Segment> {
        (0..self.nodes.len())
            .map(|i| Segment {
                start: self.parent_position(i).to_vec(),
                end: self.nodes[i].position.clone(),
                address: self.nodes[i].address.clone(),
            })
            .collect()
    }

    pub fn rays(&self) -> Vec<Ray> {
        self.segments()
            .into_iter()
            .map(|s| {
                let d = crate::geometry::sub(&s.end, &s.start);
                let len = crate::geometry::norm(&d);
                Ray { origin: s.start, direction: crate::geometry::scale(&d, 1.0 / len), address: s.address }
            })
            .collect()
    }

    pub fn endpoints(&self) -> Vec<Point> {
        self.nodes.iter().filter(|nd| nd.depth == self.depth).map(|nd| nd.position.clone()).collect()
    }

    /// One CSV row per node (origin first): depth, letters joined by `;`,
    /// coordinates with 17 significant digits. The origin has depth -1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("depth,address");
        for i in 1..=self.params.n {
            s.push_str(&format!(",x{i}"));
        }
        s.push('\n');
        let row = |s: &mut String, depth: i64, addr: &str, x: &[f64]| {
            s.push_str(&format!("{depth},{addr}"));
            for v in x {
                s.push(',');
                s.push_str(&crate::export::sig17(*v));
            }
            s.push('\n');
        };
        row(&mut s, -1, "o", &self.origin);
        for nd in &self.nodes {
            row(&mut s, nd.depth as i64, &nd.address.letters_joined(";"), &nd.position);
        }
        s
    }

    /// Segments projected onto the coordinate plane `(a, b)` (0-based).
    pub fn to_svg(&self, plane: (usize, usize)) -> String {
        let (a, b) = plane;
        let segs = self.segments();
        let proj = |x: &[f64]| [x[a], x[b]];
        let mut svg = crate::export::Svg::fit(segs.iter().flat_map(|s| [proj(&s.start), proj(&s.end)]));
        for s in &segs {
            let w = 2.0 / (1.0 + s.address.depth() as f64);
            svg.line(proj(&s.start), proj(&s.end), "black", w);
        }
        svg.finish()
    }
}

pub fn build_tree(m: usize, p: &ConstructionParams) -> Result<TreeApprox> {
    build_tree_with_cap(m, p, DEFAULT_NODE_CAP)
}

pub fn build_tree_with_cap(m: usize, p: &ConstructionParams, cap: u64) -> Result<TreeApprox> {
    p.validate()?;
    let total = node_count(m, p.n);
    if total > cap as u128 {
        return Err(Error::BudgetExceeded { nodes: total, cap });
    }
    let l = lengths(m, p);
    let b = p.branching() as u64;
    let mut nodes = Vec::with_capacity(total as usize - 1);
    nodes.push(TreeNode { address: Address::root(), position: position_with(&Address::root(), p, &l), depth: 0, parent: None });
    let mut prev_offset = 0usize;
    for d in 1..=m {
        let count = b.pow(d as u32);
        let offset = nodes.len();
        let level: Vec<TreeNode> = (0..count)
            .into_par_iter()
            .map(|idx| {
                let address = Address::from_index(idx, d, p.n);
                let position = position_with(&address, p, &l);
                TreeNode { address, position, depth: d, parent: Some(prev_offset + (idx / b) as usize) }
            })
            .collect();
        nodes.extend(level);
        prev_offset = offset;
    }
    Ok(TreeApprox { params: *p, depth: m, origin: vec![0.0; p.n], nodes })
}

/// Positions of all depth-`m` nodes in lexicographic order.
pub fn endpoint_sample(m: usize, p: &ConstructionParams) -> Result<Vec<Point>> {
    p.validate()?;
    let b = p.branching() as u128;
    let count = level_count(b, m);
    if count > DEFAULT_NODE_CAP as u128 {
        return Err(Error::BudgetExceeded { nodes: count, cap: DEFAULT_NODE_CAP });
    }
    let l = lengths(m, p);
    let pts: Vec<Point> =
        (0..count as u64).into_par_iter().map(|idx| position_with(&Address::from_index(idx, m, p.n), p, &l)).collect();
    if let Some((i, j)) = find_collision(&pts, 1e-12) {
        return Err(Error::DegenerateCollision {
            a: Address::from_index(i as u64, m, p.n),
            b: Address::from_index(j as u64, m, p.n),
        });
    }
    Ok(pts)
}

/// First pair of points closer than `tol`, by a sweep over the first coordinate.
pub fn find_collision(pts: &[Point], tol: f64) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(a.cmp(&b)));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if pts[j][0] - pts[i][0] > tol {
                break;
            }
            if dist(&pts[i], &pts[j]) <= tol {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereReport {
    pub max_residual: f64,
    pub worst: Option<Address>,
    pub checked: usize,
    pub pass: bool,
}

/// Max over parent/child pairs of `| |child - parent| - l_m |`.
pub fn verify_sphere_invariant(tree: &TreeApprox) -> SphereReport {
    let l = lengths(tree.depth, &tree.params);
    let mut max_residual = 0.0;
    let mut worst = None;
    for (i, nd) in tree.nodes.iter().enumerate() {
        let r = (dist(&nd.position, tree.parent_position(i)) - l[nd.depth]).abs();
        if r > max_residual || r.is_nan() {
            max_residual = r;
            worst = Some(nd.address.clone());
        }
    }
    SphereReport { max_residual, worst, checked: tree.nodes.len(), pass: max_residual < 1e-9 }
}
