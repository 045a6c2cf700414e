//! Shared numerical machinery: intervals, root finding, quadrature,
//! quasi-random probes and a small dense BFGS.

use crate::error::{Error, Result};

/// Interior margin used when testing membership in open domains.
pub const DOMAIN_MARGIN: f64 = 1e-12;

/// An open interval of the real line, possibly unbounded on either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    pub const NEGATIVE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: 0.0,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    /// Membership with the interior margin of the crate.
    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && x > self.lo + DOMAIN_MARGIN && x < self.hi - DOMAIN_MARGIN
    }

    /// Intersection of two intervals.
    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// A finite closed box inside the interval, suitable for probing: at
    /// most 2·clip wide, anchored at the nearest finite end.
    pub fn probe_box(&self, clip: f64) -> (f64, f64) {
        let margin = 0.05 * clip;
        let (lo, hi) = match (self.lo.is_finite(), self.hi.is_finite()) {
            (false, false) => (-clip, clip),
            (true, false) => (self.lo + margin, self.lo + margin + 2.0 * clip),
            (false, true) => (self.hi - margin - 2.0 * clip, self.hi - margin),
            (true, true) => {
                let m = margin.min(0.05 * (self.hi - self.lo));
                let lo = self.lo + m;
                (lo, (self.hi - m).min(lo + 2.0 * clip))
            }
        };
        (lo, hi.max(lo + 1e-6))
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Bisection on [lo, hi]; requires a sign change. Stops when the residual
/// drops below `tol` or after `max_iter` halvings.
///
/// Returns (root, iterations).
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok((lo, 0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Precondition(format!(
            "no sign change on bracket [{lo}, {hi}]: f(lo) = {flo:.3e}, f(hi) = {fhi:.3e}"
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for it in 0..max_iter {
        mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid.abs() < tol || (hi - lo).abs() < f64::EPSILON * (1.0 + mid.abs()) {
            return Ok((mid, it + 1));
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok((mid, max_iter))
}

/// Adaptive Simpson quadrature of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
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
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Deterministic low-discrepancy points in a box, one `Vec<f64>` per point.
/// Kronecker sequence with square-root-of-prime increments.
pub fn probe_points(count: usize, box_lo: &[f64], box_hi: &[f64]) -> Vec<Vec<f64>> {
    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    let d = box_lo.len();
    (1..=count)
        .map(|n| {
            (0..d)
                .map(|j| {
                    let alpha = PRIMES[j % PRIMES.len()].sqrt();
                    let t = (n as f64 * alpha).fract();
                    box_lo[j] + t * (box_hi[j] - box_lo[j])
                })
                .collect()
        })
        .collect()
}

/// Central finite-difference gradient with per-coordinate step
/// `h = step_scale * (1 + |x_j|)`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], step_scale: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = step_scale * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        g[j] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Result of a BFGS run.
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Dense BFGS with Armijo backtracking and finite-difference gradients.
/// Designed for the very small dimensions of this crate (d + 0..3).
///
/// `feasible` rejects line-search trial points outside the domain.
pub fn bfgs_minimize<F, P>(
    f: F,
    feasible: P,
    x0: &[f64],
    fd_step: f64,
    grad_tol: f64,
    max_iter: usize,
) -> BfgsOutcome
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&[f64]) -> bool,
{
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = fd_gradient(&f, &x, fd_step);
    // inverse Hessian approximation, row-major identity
    let mut h = vec![0.0; d * d];
    for j in 0..d {
        h[j * d + j] = 1.0;
    }
    let mut iters = 0;
    for _ in 0..max_iter {
        iters += 1;
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm < grad_tol * (1.0 + fx.abs()) {
            break;
        }
        // direction p = -H g
        let mut p = vec![0.0; d];
        for i in 0..d {
            p[i] = -(0..d).map(|j| h[i * d + j] * g[j]).sum::<f64>();
        }
        let slope: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // reset to steepest descent
            for i in 0..d {
                p[i] = -g[i];
                for j in 0..d {
                    h[i * d + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        // backtracking
        let mut t = 1.0;
        let mut xn = vec![0.0; d];
        let mut fn_ = f64::INFINITY;
        let mut ok = false;
        for _ in 0..60 {
            for i in 0..d {
                xn[i] = x[i] + t * p[i];
            }
            if feasible(&xn) {
                fn_ = f(&xn);
                if fn_ <= fx + 1e-4 * t * slope.min(0.0) && fn_.is_finite() {
                    ok = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !ok {
            break;
        }
        let gn = fd_gradient(&f, &xn, fd_step);
        // BFGS update of the inverse Hessian
        let s: Vec<f64> = (0..d).map(|i| xn[i] - x[i]).collect();
        let y: Vec<f64> = (0..d).map(|i| gn[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let mut hy = vec![0.0; d];
            for i in 0..d {
                hy[i] = (0..d).map(|j| h[i * d + j] * y[j]).sum();
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..d {
                for j in 0..d {
                    h[i * d + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + rho * rho * yhy * s[i] * s[j]
                        + rho * s[i] * s[j];
                }
            }
        }
        let stalled = s.iter().all(|v| v.abs() < 1e-15 * (1.0 + fx.abs()));
        x = xn;
        fx = fn_;
        g = gn;
        if stalled {
            break;
        }
    }
    BfgsOutcome {
        x,
        value: fx,
        iterations: iters,
    }
}

/// Damped Newton iterations on a square system `G(x) = 0` with a
/// finite-difference Jacobian. Used to polish solver outputs.
pub fn newton_polish<G, P>(
    g: G,
    feasible: P,
    x0: &[f64],
    fd_step: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize)
where
    G: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> bool,
{
    use nalgebra::{DMatrix, DVector};
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut iters = 0;
    for _ in 0..max_iter {
        iters += 1;
        let gx = g(&x);
        let norm = gx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm < tol {
            break;
        }
        // finite-difference Jacobian
        let mut jac = DMatrix::zeros(d, d);
        let mut xp = x.clone();
        for j in 0..d {
            let h = fd_step * (1.0 + x[j].abs());
            xp[j] = x[j] + h;
            let gp = g(&xp);
            xp[j] = x[j] - h;
            let gm = g(&xp);
            xp[j] = x[j];
            for i in 0..d {
                jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(d, gx.iter().copied());
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        // damping: halve until the residual does not grow
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let xn: Vec<f64> = (0..d).map(|i| x[i] - t * step[i]).collect();
            if feasible(&xn) {
                let gn = g(&xn);
                let nn = gn.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if nn < norm {
                    x = xn;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, iters)
}

/// Ordinary least squares of y on x; returns (slope, intercept, r_squared).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, intercept, r2)
}

/// Euclidean norm of a slice.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
