//! Adaptive quadrature built on the 7-15 Gauss–Kronrod pair.
//!
//! Worst-panel-first subdivision with the QUADPACK-style error rescaling
//! (`(200 e / resasc)^1.5`), in four variants: scalar and fixed-size-vector
//! integrands, over an interval or a rectangle. The vector variants exist for
//! the estimating equations, whose two or three components share every
//! expensive factor of the integrand; panels are subdivided until the *worst
//! component's* error bound passes the tolerance test.
//!
//! Integrands weighted by the standard normal density are expected to arrive
//! already truncated by the caller (see [`QuadratureSpec::truncation_bound`]);
//! nothing here assumes a weight function.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and the truncation half-width shared by quadrature users.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Half-width of the box substituted for the real line when integrating
    /// standard-normal-weighted integrands; the omitted mass at 8 is < 1.3e-15.
    pub truncation_bound: f64,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, truncation_bound: f64) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerances must be positive, got abs={abs_tol}, rel={rel_tol}"
            )));
        }
        if !(truncation_bound >= 6.0) {
            return Err(Error::InvalidInput(format!(
                "truncation bound must be at least 6, got {truncation_bound}"
            )));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            truncation_bound,
        })
    }

    /// Looser default for double integrals (each panel costs 225 evaluations).
    pub fn two_dim() -> Self {
        Self {
            abs_tol: 1e-8,
            ..Self::default()
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            truncation_bound: 8.0,
        }
    }
}

// 15-point Kronrod abscissae (positive half, descending) and weights; the odd
// indices (plus the center) form the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120812639207,
    0.949107912342758524526,
    0.864864423359769072790,
    0.741531185599394439864,
    0.586087235467691130294,
    0.405845151377397166907,
    0.207784955007898467601,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224964,
    0.063092092629978553291,
    0.104790010322250183840,
    0.140653259715525918745,
    0.169004726639267902827,
    0.190350578064785409913,
    0.204432940075298892414,
    0.209482141084727828013,
];
const WG: [f64; 4] = [
    0.129484966168869693271,
    0.279705391489276667901,
    0.381830050505118944950,
    0.417959183673469387755,
];

/// All 15 nodes of the Kronrod rule on [-1, 1], with Kronrod and Gauss weights
/// (Gauss weight zero where the node is Kronrod-only).
fn nodes15() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    let mut k = 0;
    for i in 0..7 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[k] = (-XGK[i], WGK[i], wg);
        out[k + 1] = (XGK[i], WGK[i], wg);
        k += 2;
    }
    out[14] = (0.0, WGK[7], WG[3]);
    out
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    let tiny = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > tiny {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

#[derive(Debug)]
struct Panel<T> {
    err: f64,
    bounds: T,
    value: Vec<f64>,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

const MAX_PANELS_1D: usize = 1024;
const MAX_PANELS_2D: usize = 16384;

/// 7-15 rule on one interval. Returns (per-component value, worst error, resabs).
fn qk15_vec<const N: usize>(f: &impl Fn(f64) -> [f64; N], a: f64, b: f64) -> ([f64; N], f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [[0.0; N]; 15];
    let nodes = nodes15();
    for (slot, (x, _, _)) in fv.iter_mut().zip(nodes.iter()) {
        *slot = f(center + half * x);
    }
    let mut worst = 0.0f64;
    let mut value = [0.0; N];
    for c in 0..N {
        let mut resk = 0.0;
        let mut resg = 0.0;
        let mut resabs = 0.0;
        for (i, (_, wk, wg)) in nodes.iter().enumerate() {
            resk += wk * fv[i][c];
            resg += wg * fv[i][c];
            resabs += wk * fv[i][c].abs();
        }
        let reskh = resk * 0.5;
        let mut resasc = 0.0;
        for (i, (_, wk, _)) in nodes.iter().enumerate() {
            resasc += wk * (fv[i][c] - reskh).abs();
        }
        let err = rescale_error((resk - resg) * half, resabs * half, resasc * half);
        value[c] = resk * half;
        worst = worst.max(err);
    }
    (value, worst)
}

pub fn integrate_1d_vec<const N: usize>(
    f: impl Fn(f64) -> [f64; N],
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<[f64; N]> {
    if !(a < b) {
        return Err(Error::InvalidInput(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let mut heap: BinaryHeap<Panel<(f64, f64)>> = BinaryHeap::new();
    let (v0, e0) = qk15_vec(&f, a, b);
    heap.push(Panel {
        err: e0,
        bounds: (a, b),
        value: v0.to_vec(),
    });
    let mut total_err = e0;

    while heap.len() < MAX_PANELS_1D {
        let total: f64 = sum_component_abs_max(&heap, N);
        if total_err <= spec.abs_tol.max(spec.rel_tol * total) {
            break;
        }
        let worst = heap.pop().expect("heap cannot be empty here");
        let (pa, pb) = worst.bounds;
        total_err -= worst.err;
        let mid = 0.5 * (pa + pb);
        for (la, lb) in [(pa, mid), (mid, pb)] {
            let (v, e) = qk15_vec(&f, la, lb);
            total_err += e;
            heap.push(Panel {
                err: e,
                bounds: (la, lb),
                value: v.to_vec(),
            });
        }
    }

    let mut out = [0.0; N];
    for p in heap.iter() {
        for (acc, v) in out.iter_mut().zip(&p.value) {
            *acc += v;
        }
    }
    let total: f64 = out.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if total_err > spec.abs_tol.max(spec.rel_tol * total) {
        return Err(Error::QuadratureNonConvergence {
            estimate: out[0],
            error_bound: total_err,
        });
    }
    Ok(out)
}

pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(integrate_1d_vec(|x| [f(x)], a, b, spec)?[0])
}

/// Tensor 7-15 rule on a rectangle.
fn qk15_2d_vec<const N: usize>(
    f: &impl Fn(f64, f64) -> [f64; N],
    rect: (f64, f64, f64, f64),
) -> ([f64; N], f64) {
    let (ax, bx, ay, by) = rect;
    let (cx, hx) = (0.5 * (ax + bx), 0.5 * (bx - ax));
    let (cy, hy) = (0.5 * (ay + by), 0.5 * (by - ay));
    let nodes = nodes15();
    let mut fv = [[[0.0; N]; 15]; 15];
    for (i, (xi, _, _)) in nodes.iter().enumerate() {
        for (j, (yj, _, _)) in nodes.iter().enumerate() {
            fv[i][j] = f(cx + hx * xi, cy + hy * yj);
        }
    }
    let area = hx * hy;
    let mut value = [0.0; N];
    let mut worst = 0.0f64;
    for c in 0..N {
        let mut resk = 0.0;
        let mut resg = 0.0;
        let mut resabs = 0.0;
        for (i, (_, wki, wgi)) in nodes.iter().enumerate() {
            for (j, (_, wkj, wgj)) in nodes.iter().enumerate() {
                let v = fv[i][j][c];
                resk += wki * wkj * v;
                resg += wgi * wgj * v;
                resabs += wki * wkj * v.abs();
            }
        }
        let reskh = resk / 4.0; // mean over the [-1,1]^2 reference square
        let mut resasc = 0.0;
        for (i, (_, wki, _)) in nodes.iter().enumerate() {
            for (j, (_, wkj, _)) in nodes.iter().enumerate() {
                resasc += wki * wkj * (fv[i][j][c] - reskh).abs();
            }
        }
        let err = rescale_error((resk - resg) * area, resabs * area, resasc * area);
        value[c] = resk * area;
        worst = worst.max(err);
    }
    (value, worst)
}

pub fn integrate_2d_vec<const N: usize>(
    f: impl Fn(f64, f64) -> [f64; N],
    x_range: (f64, f64),
    y_range: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<[f64; N]> {
    let (ax, bx) = x_range;
    let (ay, by) = y_range;
    if !(ax < bx && ay < by) {
        return Err(Error::InvalidInput(format!(
            "rectangle must have positive extent, got x [{ax}, {bx}], y [{ay}, {by}]"
        )));
    }
    let mut heap: BinaryHeap<Panel<(f64, f64, f64, f64)>> = BinaryHeap::new();
    let rect = (ax, bx, ay, by);
    let (v0, e0) = qk15_2d_vec(&f, rect);
    heap.push(Panel {
        err: e0,
        bounds: rect,
        value: v0.to_vec(),
    });
    let mut total_err = e0;

    while heap.len() < MAX_PANELS_2D {
        let total: f64 = sum_component_abs_max(&heap, N);
        if total_err <= spec.abs_tol.max(spec.rel_tol * total) {
            break;
        }
        let worst = heap.pop().expect("heap cannot be empty here");
        let (pax, pbx, pay, pby) = worst.bounds;
        total_err -= worst.err;
        // halve the longer side
        let children = if pbx - pax >= pby - pay {
            let m = 0.5 * (pax + pbx);
            [(pax, m, pay, pby), (m, pbx, pay, pby)]
        } else {
            let m = 0.5 * (pay + pby);
            [(pax, pbx, pay, m), (pax, pbx, m, pby)]
        };
        for r in children {
            let (v, e) = qk15_2d_vec(&f, r);
            total_err += e;
            heap.push(Panel {
                err: e,
                bounds: r,
                value: v.to_vec(),
            });
        }
    }

    let mut out = [0.0; N];
    for p in heap.iter() {
        for (acc, v) in out.iter_mut().zip(&p.value) {
            *acc += v;
        }
    }
    let total: f64 = out.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if total_err > spec.abs_tol.max(spec.rel_tol * total) {
        return Err(Error::QuadratureNonConvergence {
            estimate: out[0],
            error_bound: total_err,
        });
    }
    Ok(out)
}

pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(integrate_2d_vec(|x, y| [f(x, y)], x_range, y_range, spec)?[0])
}

// Largest per-component absolute total over the current panel set, used for
// the relative part of the stopping test.
fn sum_component_abs_max<T>(heap: &BinaryHeap<Panel<T>>, n: usize) -> f64 {
    let mut sums = vec![0.0; n];
    for p in heap.iter() {
        for (s, v) in sums.iter_mut().zip(p.value.iter()) {
            *s += v;
        }
    }
    sums.iter().map(|v| v.abs()).fold(0.0, f64::max)
}
