//! Adaptive quadrature: Gauss-Kronrod (7/15) with local bisection, and
//! adaptive Simpson as an independent cross-check.

#![allow(clippy::excessive_precision)]

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    /// Sum of local error estimates.
    pub error: f64,
    pub evals: usize,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 48;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn gk_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32, out: &mut Quad) {
    let (k, err) = gk15(f, a, b);
    out.evals += 15;
    let m = 0.5 * (a + b);
    if err <= tol || depth >= MAX_DEPTH || m <= a || m >= b {
        out.value += k;
        out.error += err;
        return;
    }
    gk_rec(f, a, m, 0.5 * tol, depth + 1, out);
    gk_rec(f, m, b, 0.5 * tol, depth + 1, out);
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quad {
    let mut out = Quad { value: 0.0, error: 0.0, evals: 0 };
    if a == b {
        return out;
    }
    if b < a {
        let q = integrate(f, b, a, tol);
        return Quad { value: -q.value, ..q };
    }
    gk_rec(&f, a, b, tol, 0, &mut out);
    out
}

/// Integrate over `[a, b]` split at the given interior break points.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Quad {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let share = tol / (pts.len() - 1) as f64;
    let mut out = Quad { value: 0.0, error: 0.0, evals: 0 };
    for w in pts.windows(2) {
        let q = integrate(&f, w[0], w[1], share);
        out.value += q.value;
        out.error += q.error;
        out.evals += q.evals;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut Quad,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    out.evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= 2 * MAX_DEPTH || (depth >= 4 && delta.abs() <= 15.0 * tol) {
        out.value += left + right + delta / 15.0;
        out.error += delta.abs() / 15.0;
        return;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, out);
    simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, out);
}

/// Adaptive Simpson with Richardson correction. Forces four levels of
/// subdivision before accepting, so narrow features are not skipped.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quad {
    let mut out = Quad { value: 0.0, error: 0.0, evals: 3 };
    if a == b {
        return out;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 0, &mut out);
    out
}

/// Composite trapezoid on uniform samples with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let q = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1e-13);
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn smooth_functions() {
        let q = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-13);
        assert!((q.value - 2.0).abs() < 1e-13);
        let s = simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-13);
        assert!((s.value - 2.0).abs() < 1e-12);
        let q = integrate(|x: f64| (-x * x).exp(), 0.0, 5.0, 1e-14);
        let s = simpson(|x: f64| (-x * x).exp(), 0.0, 5.0, 1e-14);
        assert!((q.value - s.value).abs() < 1e-12);
    }

    #[test]
    fn reversed_and_pieces() {
        let q = integrate(|x| x, 1.0, 0.0, 1e-14);
        assert!((q.value + 0.5).abs() < 1e-15);
        let p = integrate_pieces(|x: f64| x.abs(), -1.0, 1.0, &[0.0], 1e-14);
        assert!((p.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let v: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64 / 10.0 + 1.0).collect();
        assert!((trapezoid(&v, 0.1) - 2.0).abs() < 1e-14);
    }
}
