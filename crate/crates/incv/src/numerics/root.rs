//! Scalar root bracketing (Brent) and small nonlinear systems (damped Newton
//! with a forward-difference Jacobian). Both report iteration counts and the
//! final residual so callers can surface solver trouble instead of silently
//! using a bad value.

use crate::error::{Error, Result, SolverReport};

const MAX_BRENT_ITERS: usize = 200;

/// Brent's method on a sign-changing bracket. Stops when the bracket width
/// shrinks below `tol` (plus machine-precision slack) or the residual hits
/// zero; the report carries the residual at the returned point.
pub fn find_root(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, SolverReport)> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok((
            a,
            SolverReport {
                converged: true,
                iterations: 0,
                residual_norm: 0.0,
            },
        ));
    }
    if fb == 0.0 {
        return Ok((
            b,
            SolverReport {
                converged: true,
                iterations: 0,
                residual_norm: 0.0,
            },
        ));
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            flo: fa,
            fhi: fb,
        });
    }

    let (mut c, mut fc) = (a, fa);
    let (mut d, mut e) = (b - a, b - a);
    for iter in 1..=MAX_BRENT_ITERS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok((
                b,
                SolverReport {
                    converged: true,
                    iterations: iter,
                    residual_norm: fb.abs(),
                },
            ));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic / secant step
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0));
                q = (q0 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::SolverDiverged {
        report: SolverReport {
            converged: false,
            iterations: MAX_BRENT_ITERS,
            residual_norm: fb.abs(),
        },
    })
}

const MAX_NEWTON_ITERS: usize = 100;
const MAX_HALVINGS: usize = 25;

/// Damped Newton on `g(v) = 0`, converged when `||g||_inf <= tol`. The
/// integrand-backed systems this serves can themselves fail (quadrature), so
/// `g` is fallible. A singular Jacobian triggers a perturb-and-retry rather
/// than NaN propagation.
pub fn solve_system<const N: usize>(
    g: impl Fn(&[f64; N]) -> Result<[f64; N]>,
    start: [f64; N],
    tol: f64,
) -> Result<([f64; N], SolverReport)> {
    let mut x = start;
    let mut gx = g(&x)?;
    let mut best_norm = inf_norm(&gx);
    let mut perturbations = 0;

    for iter in 1..=MAX_NEWTON_ITERS {
        if best_norm <= tol {
            return Ok((
                x,
                SolverReport {
                    converged: true,
                    iterations: iter - 1,
                    residual_norm: best_norm,
                },
            ));
        }
        // forward-difference Jacobian, column j = (g(x + h e_j) - g(x)) / h
        let mut jac = [[0.0; N]; N];
        for j in 0..N {
            let h = 1e-6 * (1.0 + x[j].abs());
            let mut xj = x;
            xj[j] += h;
            let gj = g(&xj)?;
            for i in 0..N {
                jac[i][j] = (gj[i] - gx[i]) / h;
            }
        }
        let rhs = gx.map(|v| -v);
        let step = match solve_linear(jac, rhs) {
            Some(s) => s,
            None => {
                // singular Jacobian: nudge the iterate and try again
                perturbations += 1;
                if perturbations > 3 {
                    return Err(Error::SolverDiverged {
                        report: SolverReport {
                            converged: false,
                            iterations: iter,
                            residual_norm: best_norm,
                        },
                    });
                }
                for v in x.iter_mut() {
                    *v += 1e-4 * (1.0 + v.abs());
                }
                gx = g(&x)?;
                best_norm = inf_norm(&gx);
                continue;
            }
        };

        // halve the step until the residual actually decreases
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let mut xt = x;
            for i in 0..N {
                xt[i] += lambda * step[i];
            }
            if let Ok(gt) = g(&xt) {
                let nt = inf_norm(&gt);
                if nt.is_finite() && nt < best_norm {
                    x = xt;
                    gx = gt;
                    best_norm = nt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::SolverDiverged {
                report: SolverReport {
                    converged: false,
                    iterations: iter,
                    residual_norm: best_norm,
                },
            });
        }
    }
    if best_norm <= tol {
        return Ok((
            x,
            SolverReport {
                converged: true,
                iterations: MAX_NEWTON_ITERS,
                residual_norm: best_norm,
            },
        ));
    }
    Err(Error::SolverDiverged {
        report: SolverReport {
            converged: false,
            iterations: MAX_NEWTON_ITERS,
            residual_norm: best_norm,
        },
    })
}

fn inf_norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting; None on a (numerically)
/// singular matrix. N is 2 or 3 here, so no fancier factorization is needed.
#[allow(clippy::needless_range_loop)] // forward elimination reads two rows of `a` at once
fn solve_linear<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot_row = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..N {
            let m = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut s = b[row];
        for k in row + 1..N {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}
