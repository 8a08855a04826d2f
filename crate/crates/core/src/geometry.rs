//! Small dense-vector helpers. Points are plain `Vec<f64>`.

pub type Point = Vec<f64>;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Point {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
#[inline]
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn normalize(a: &[f64]) -> Option<Point> {
    let l = norm(a);
    if l > 0.0 && l.is_finite() {
        Some(scale(a, 1.0 / l))
    } else {
        None
    }
}

pub fn unit(n: usize, axis: usize) -> Point {
    let mut e = vec![0.0; n];
    e[axis] = 1.0;
    e
}

/// Angle between two nonzero vectors, robust near 0 and pi.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    let u = scale(a, 1.0 / na);
    let v = scale(b, 1.0 / nb);
    let s = norm(&sub(&u, &v));
    let t = norm(&add(&u, &v));
    2.0 * s.atan2(t)
}

/// Some unit vector orthogonal to `a` (assumed unit).
pub fn any_orthogonal(a: &[f64]) -> Point {
    let n = a.len();
    let mut best = 0;
    for i in 1..n {
        if a[i].abs() < a[best].abs() {
            best = i;
        }
    }
    let e = unit(n, best);
    let v = axpy(&e, -dot(&e, a), a);
    normalize(&v).expect("orthogonal complement is nonempty for n >= 2")
}

/// Orthonormal basis of the complement of unit vector `a` (Gram-Schmidt).
pub fn orthonormal_complement(a: &[f64]) -> Vec<Point> {
    let n = a.len();
    let mut basis: Vec<Point> = vec![a.to_vec()];
    for i in 0..n {
        let mut v = unit(n, i);
        for b in &basis {
            let c = dot(&v, b);
            v = axpy(&v, -c, b);
        }
        if let Some(u) = normalize(&v) {
            if norm(&v) > 1e-8 {
                basis.push(u);
            }
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Distance from `x` to the segment `[a, b]`.
pub fn point_segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(&ab, &ab);
    if l2 == 0.0 {
        return dist(x, a);
    }
    let t = (dot(&sub(x, a), &ab) / l2).clamp(0.0, 1.0);
    dist(x, &axpy(a, t, &ab))
}

/// Closest points between the lines `p + s u` and `q + t v`.
/// Returns `None` for parallel lines.
pub fn closest_approach(p: &[f64], u: &[f64], q: &[f64], v: &[f64]) -> Option<(Point, Point)> {
    let w = sub(p, q);
    let a = dot(u, u);
    let b = dot(u, v);
    let c = dot(v, v);
    let d = dot(u, &w);
    let e = dot(v, &w);
    let den = a * c - b * b;
    if den.abs() <= 1e-14 * a * c {
        return None;
    }
    let s = (b * e - c * d) / den;
    let t = (a * e - b * d) / den;
    Some((axpy(p, s, u), axpy(q, t, v)))
}
