//! Catalog of strictly convex twice-differentiable generators with exact
//! gradients, Hessians and inverse gradients.
//!
//! Scalar generators apply coordinate-wise in ℝ^d (they are separable);
//! the general quadratic form ½ xᵀQx is the one non-separable entry.
//! Every entry knows its open domain and the image of its gradient, which
//! doubles as the domain of its convex conjugate.

use std::f64::consts::E;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::numerics::{bisect, integrate, Interval};
use crate::sample::Sample;

/// A strictly convex generator φ.
#[derive(Debug, Clone)]
pub enum Generator {
    /// φ(x) = -ln x on (0, ∞)
    NegLog,
    /// φ(x) = 1/x on (0, ∞)
    Inverse,
    /// φ(x) = x² on ℝ
    Square,
    /// φ(x) = ½ x² on ℝ (identity gradient)
    HalfSquare,
    /// φ(x) = x^p on (0, ∞), p ≥ 2
    Power(f64),
    /// φ(x) = eˣ on ℝ
    Exp,
    /// φ(x) = x ln x on (0, ∞)
    XLogX,
    /// φ(x) = x eˣ on (-1, ∞)
    XExpX,
    /// φ(x) = ½ xᵀQx with Q symmetric positive definite
    Quadratic(QuadraticForm),
    /// The graph of a·x² rotated by angle theta, re-read as a function graph.
    RotatedQuadratic { a: f64, theta: f64 },
    /// Convex conjugate of a separable generator, evaluated through the
    /// inverse-gradient identity φ*(y) = y·(∇φ)⁻¹(y) − φ((∇φ)⁻¹(y)).
    Conjugate(Box<Generator>),
    /// Generator whose gradient is ∇outer ∘ ∇inner (separable only); the
    /// value is recovered by quadrature from `anchor`, which leaves Bregman
    /// divergences unchanged.
    GradComposed {
        outer: Box<Generator>,
        inner: Box<Generator>,
        anchor: f64,
    },
}

/// Dense symmetric positive definite quadratic form.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    q: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl QuadraticForm {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::InvalidInput("quadratic matrix is not square".into()));
        }
        let sym_defect = (&q - q.transpose()).abs().max();
        if sym_defect > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "quadratic matrix not symmetric: defect {sym_defect:.3e}"
            )));
        }
        let chol = Cholesky::new(q.clone())
            .ok_or_else(|| Error::InvalidInput("quadratic matrix not positive definite".into()))?;
        Ok(QuadraticForm { q, chol })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    fn solve(&self, y: &[f64]) -> Vec<f64> {
        let v = DVector::from_iterator(y.len(), y.iter().copied());
        self.chol.solve(&v).iter().copied().collect()
    }
}

impl PartialEq for QuadraticForm {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}

/// Branch selector for even generators whose φ-mean is double valued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Positive,
    Negative,
}

impl Generator {
    pub fn power(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 1.0 {
            return Err(Error::InvalidInput(format!(
                "power generator needs p > 1, got {p}"
            )));
        }
        Ok(Generator::Power(p))
    }

    pub fn quadratic(q: DMatrix<f64>) -> Result<Self> {
        Ok(Generator::Quadratic(QuadraticForm::new(q)?))
    }

    /// The rotated graph of a·x²; valid while the rotated curve remains a
    /// function graph, which the domain encodes.
    pub fn rotated_quadratic(a: f64, theta: f64) -> Result<Self> {
        if a.is_nan() || a <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "rotated quadratic needs a > 0, got {a}"
            )));
        }
        if theta.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidInput(format!(
                "rotation angle {theta} too large"
            )));
        }
        Ok(Generator::RotatedQuadratic { a, theta })
    }

    /// Convex conjugate. Closed form for quadratics, involutive, and the
    /// inverse-gradient identity for everything else.
    pub fn conjugate(&self) -> Generator {
        match self {
            Generator::HalfSquare => Generator::HalfSquare,
            Generator::Quadratic(q) => {
                let inv = q.chol.inverse();
                Generator::Quadratic(QuadraticForm::new(inv).expect("inverse of SPD is SPD"))
            }
            Generator::Conjugate(inner) => (**inner).clone(),
            g => Generator::Conjugate(Box::new(g.clone())),
        }
    }

    /// Generator with gradient ∇outer ∘ ∇inner (both separable).
    pub fn grad_composed(outer: Generator, inner: Generator) -> Result<Self> {
        if !outer.separable() || !inner.separable() {
            return Err(Error::UnsupportedComposition(
                "gradient composition needs separable generators".into(),
            ));
        }
        let needed = inner.grad_image1().intersect(&outer.domain1());
        if needed.lo >= needed.hi {
            return Err(Error::UnsupportedComposition(format!(
                "gradient image {} of inner never meets domain {} of outer",
                inner.grad_image1(),
                outer.domain1()
            )));
        }
        let gen = Generator::GradComposed {
            outer: Box::new(outer),
            inner: Box::new(inner),
            anchor: 0.0,
        };
        let (lo, hi) = gen.domain1().probe_box(2.0);
        let anchor = 0.5 * (lo + hi);
        match gen {
            Generator::GradComposed { outer, inner, .. } => Ok(Generator::GradComposed {
                outer,
                inner,
                anchor,
            }),
            _ => unreachable!(),
        }
    }

    /// True when the generator applies coordinate-wise.
    pub fn separable(&self) -> bool {
        !matches!(self, Generator::Quadratic(_))
    }

    /// Fixed dimension, if the generator has one.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            Generator::Quadratic(q) => Some(q.dim()),
            _ => None,
        }
    }

    /// Open domain of one coordinate (separable generators only).
    pub fn domain1(&self) -> Interval {
        match self {
            Generator::NegLog | Generator::Inverse | Generator::Power(_) | Generator::XLogX => {
                Interval::POSITIVE
            }
            Generator::Square | Generator::HalfSquare | Generator::Exp => Interval::REAL,
            Generator::XExpX => Interval::new(-1.0, f64::INFINITY),
            Generator::Quadratic(_) => Interval::REAL,
            Generator::RotatedQuadratic { a, theta } => {
                let (s, c) = theta.sin_cos();
                if *theta == 0.0 {
                    Interval::REAL
                } else if s > 0.0 {
                    Interval::new(f64::NEG_INFINITY, c * c / (4.0 * a * s))
                } else {
                    Interval::new(c * c / (4.0 * a * s), f64::INFINITY)
                }
            }
            Generator::Conjugate(inner) => inner.grad_image1(),
            Generator::GradComposed { outer, inner, .. } => {
                let needed = inner.grad_image1().intersect(&outer.domain1());
                let inner_dom = inner.domain1();
                let lo = if needed.lo > inner.grad_image1().lo {
                    let eps = 1e-9 * (1.0 + needed.lo.abs());
                    inner.inv_grad1(needed.lo + eps).unwrap_or(inner_dom.lo)
                } else {
                    inner_dom.lo
                };
                let hi = if needed.hi < inner.grad_image1().hi {
                    let eps = 1e-9 * (1.0 + needed.hi.abs());
                    inner.inv_grad1(needed.hi - eps).unwrap_or(inner_dom.hi)
                } else {
                    inner_dom.hi
                };
                Interval::new(lo, hi)
            }
        }
    }

    /// Image of the scalar derivative; also the conjugate's domain.
    pub fn grad_image1(&self) -> Interval {
        match self {
            Generator::NegLog | Generator::Inverse => Interval::NEGATIVE,
            Generator::Square | Generator::HalfSquare | Generator::XLogX => Interval::REAL,
            Generator::Power(_) | Generator::Exp | Generator::XExpX => Interval::POSITIVE,
            Generator::Quadratic(_) => Interval::REAL,
            Generator::RotatedQuadratic { theta, .. } => {
                let (s, c) = theta.sin_cos();
                if *theta == 0.0 {
                    Interval::REAL
                } else if s > 0.0 {
                    Interval::new(-c / s, f64::INFINITY)
                } else {
                    Interval::new(f64::NEG_INFINITY, -c / s)
                }
            }
            Generator::Conjugate(inner) => inner.domain1(),
            Generator::GradComposed { outer, inner, .. } => {
                let needed = inner.grad_image1().intersect(&outer.domain1());
                let outer_img = outer.grad_image1();
                let lo = if needed.lo > outer.domain1().lo && needed.lo.is_finite() {
                    outer.grad1(needed.lo).unwrap_or(outer_img.lo)
                } else {
                    outer_img.lo
                };
                let hi = if needed.hi < outer.domain1().hi && needed.hi.is_finite() {
                    outer.grad1(needed.hi).unwrap_or(outer_img.hi)
                } else {
                    outer_img.hi
                };
                Interval::new(lo, hi)
            }
        }
    }

    fn check1(&self, x: f64) -> Result<f64> {
        if self.domain1().contains(x) {
            Ok(x)
        } else {
            Err(Error::domain(
                0,
                x,
                format!("{self} domain {}", self.domain1()),
            ))
        }
    }

    /// φ at one coordinate.
    pub fn eval1(&self, x: f64) -> Result<f64> {
        let x = self.check1(x)?;
        Ok(match self {
            Generator::NegLog => -x.ln(),
            Generator::Inverse => 1.0 / x,
            Generator::Square => x * x,
            Generator::HalfSquare => 0.5 * x * x,
            Generator::Power(p) => x.powf(*p),
            Generator::Exp => x.exp(),
            Generator::XLogX => x * x.ln(),
            Generator::XExpX => x * x.exp(),
            Generator::Quadratic(_) => unreachable!("quadratic is not separable"),
            Generator::RotatedQuadratic { a, theta } => {
                let (s, c) = theta.sin_cos();
                let t = rotated_abscissa(*a, s, c, x);
                t * s + a * t * t * c
            }
            Generator::Conjugate(inner) => {
                let t = inner.inv_grad1(x)?;
                x * t - inner.eval1(t)?
            }
            Generator::GradComposed { anchor, .. } => {
                integrate(&|t| self.grad1(t).unwrap_or(f64::NAN), *anchor, x, 1e-13)
            }
        })
    }

    /// φ′ at one coordinate.
    pub fn grad1(&self, x: f64) -> Result<f64> {
        let x = self.check1(x)?;
        Ok(match self {
            Generator::NegLog => -1.0 / x,
            Generator::Inverse => -1.0 / (x * x),
            Generator::Square => 2.0 * x,
            Generator::HalfSquare => x,
            Generator::Power(p) => p * x.powf(p - 1.0),
            Generator::Exp => x.exp(),
            Generator::XLogX => 1.0 + x.ln(),
            Generator::XExpX => (1.0 + x) * x.exp(),
            Generator::Quadratic(_) => unreachable!("quadratic is not separable"),
            Generator::RotatedQuadratic { a, theta } => {
                let (s, c) = theta.sin_cos();
                let t = rotated_abscissa(*a, s, c, x);
                (s + 2.0 * a * t * c) / (c - 2.0 * a * t * s)
            }
            Generator::Conjugate(inner) => inner.inv_grad1(x)?,
            Generator::GradComposed { outer, inner, .. } => outer.grad1(inner.grad1(x)?)?,
        })
    }

    /// φ″ at one coordinate; strictly positive on the domain.
    pub fn hess1(&self, x: f64) -> Result<f64> {
        let x = self.check1(x)?;
        Ok(match self {
            Generator::NegLog => 1.0 / (x * x),
            Generator::Inverse => 2.0 / (x * x * x),
            Generator::Square => 2.0,
            Generator::HalfSquare => 1.0,
            Generator::Power(p) => p * (p - 1.0) * x.powf(p - 2.0),
            Generator::Exp => x.exp(),
            Generator::XLogX => 1.0 / x,
            Generator::XExpX => (2.0 + x) * x.exp(),
            Generator::Quadratic(_) => unreachable!("quadratic is not separable"),
            Generator::RotatedQuadratic { a, theta } => {
                let (s, c) = theta.sin_cos();
                let t = rotated_abscissa(*a, s, c, x);
                let disc = c - 2.0 * a * t * s;
                2.0 * a / (disc * disc * disc)
            }
            Generator::Conjugate(inner) => 1.0 / inner.hess1(inner.inv_grad1(x)?)?,
            Generator::GradComposed { outer, inner, .. } => {
                outer.hess1(inner.grad1(x)?)? * inner.hess1(x)?
            }
        })
    }

    /// (φ′)⁻¹ at one coordinate. Errors when y is outside the gradient image.
    pub fn inv_grad1(&self, y: f64) -> Result<f64> {
        if !self.grad_image1().contains(y) {
            return Err(Error::range(
                y,
                format!("gradient of {self}, image {}", self.grad_image1()),
            ));
        }
        Ok(match self {
            Generator::NegLog => -1.0 / y,
            Generator::Inverse => (-1.0 / y).sqrt(),
            Generator::Square => 0.5 * y,
            Generator::HalfSquare => y,
            Generator::Power(p) => (y / p).powf(1.0 / (p - 1.0)),
            Generator::Exp => y.ln(),
            Generator::XLogX => (y - 1.0).exp(),
            Generator::XExpX => lambert_w(y * E)? - 1.0,
            Generator::Quadratic(_) => unreachable!("quadratic is not separable"),
            Generator::RotatedQuadratic { a, theta } => {
                let (s, c) = theta.sin_cos();
                let t = (y * c - s) / (2.0 * a * (c + y * s));
                t * c - a * t * t * s
            }
            Generator::Conjugate(inner) => inner.grad1(y)?,
            Generator::GradComposed { outer, inner, .. } => inner.inv_grad1(outer.inv_grad1(y)?)?,
        })
    }

    /// Validate a point against the domain.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if let Some(d) = self.fixed_dim() {
            if x.len() != d {
                return Err(Error::InvalidInput(format!(
                    "point of dimension {} for generator of dimension {d}",
                    x.len()
                )));
            }
        }
        match self {
            Generator::Quadratic(_) => {
                if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                    return Err(Error::domain(i, *v, "quadratic form"));
                }
            }
            _ => {
                let dom = self.domain1();
                for (i, v) in x.iter().enumerate() {
                    if !dom.contains(*v) {
                        return Err(Error::domain(i, *v, format!("{self} domain {dom}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// φ(x).
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            Generator::Quadratic(q) => {
                self.check_point(x)?;
                let v = DVector::from_iterator(x.len(), x.iter().copied());
                Ok(0.5 * (&q.q * &v).dot(&v))
            }
            _ => x.iter().try_fold(0.0, |acc, &c| Ok(acc + self.eval1(c)?)),
        }
    }

    /// ∇φ(x).
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Generator::Quadratic(q) => {
                self.check_point(x)?;
                let v = DVector::from_iterator(x.len(), x.iter().copied());
                Ok((&q.q * v).iter().copied().collect())
            }
            _ => x.iter().map(|&c| self.grad1(c)).collect(),
        }
    }

    /// Hφ(x)·z.
    pub fn hess_apply(&self, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        match self {
            Generator::Quadratic(q) => {
                self.check_point(x)?;
                let v = DVector::from_iterator(z.len(), z.iter().copied());
                Ok((&q.q * v).iter().copied().collect())
            }
            _ => x
                .iter()
                .zip(z)
                .map(|(&c, &zj)| Ok(self.hess1(c)? * zj))
                .collect(),
        }
    }

    /// zᵀ Hφ(x) w.
    pub fn hess_quad(&self, x: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        let hz = self.hess_apply(x, w)?;
        Ok(z.iter().zip(&hz).map(|(a, b)| a * b).sum())
    }

    /// Smallest eigenvalue of Hφ(x) (diagonal for separable generators).
    pub fn hess_min_eig(&self, x: &[f64]) -> Result<f64> {
        match self {
            Generator::Quadratic(q) => {
                let eig = q.q.clone().symmetric_eigen();
                Ok(eig
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min))
            }
            _ => x
                .iter()
                .map(|&c| self.hess1(c))
                .try_fold(f64::INFINITY, |m, h| Ok(m.min(h?))),
        }
    }

    /// (∇φ)⁻¹(y).
    pub fn inv_grad(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            Generator::Quadratic(q) => {
                if y.len() != q.dim() {
                    return Err(Error::InvalidInput(format!(
                        "dual point of dimension {} for generator of dimension {}",
                        y.len(),
                        q.dim()
                    )));
                }
                Ok(q.solve(y))
            }
            _ => y.iter().map(|&c| self.inv_grad1(c)).collect(),
        }
    }

    /// φ*(y) through the inverse-gradient identity.
    pub fn conjugate_eval(&self, y: &[f64]) -> Result<f64> {
        let x = self.inv_grad(y)?;
        let inner: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        Ok(inner - self.eval(&x)?)
    }

    /// Sign of φ′ on the closed hull [lo, hi], exploiting that φ′ is
    /// strictly increasing. Errors when the sign changes inside.
    pub fn grad_sign_on_hull(&self, lo: f64, hi: f64) -> Result<f64> {
        let glo = self.grad1(lo)?;
        let ghi = self.grad1(hi)?;
        if glo > 0.0 && ghi > 0.0 {
            Ok(1.0)
        } else if glo < 0.0 && ghi < 0.0 {
            Ok(-1.0)
        } else {
            Err(Error::SignChange { lo, hi })
        }
    }

    /// Stable string identifier, matching the CLI grammar where one exists.
    pub fn id(&self) -> String {
        match self {
            Generator::NegLog => "neg_log".into(),
            Generator::Inverse => "inverse".into(),
            Generator::Square => "square".into(),
            Generator::HalfSquare => "half_square".into(),
            Generator::Power(p) => format!("power:{p}"),
            Generator::Exp => "exp".into(),
            Generator::XLogX => "xlogx".into(),
            Generator::XExpX => "xexpx".into(),
            Generator::Quadratic(q) => format!("quadratic[{}]", q.dim()),
            Generator::RotatedQuadratic { a, theta } => format!("rotated_quadratic:{a}:{theta}"),
            Generator::Conjugate(inner) => format!("conjugate({})", inner.id()),
            Generator::GradComposed { outer, inner, .. } => {
                format!("grad_composed({},{})", outer.id(), inner.id())
            }
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Abscissa of the rotated-curve point whose first rotated coordinate is s.
/// Solves a·sinθ·x² − cosθ·x + s = 0 on the branch continuous at θ = 0.
fn rotated_abscissa(a: f64, s: f64, c: f64, x: f64) -> f64 {
    let disc = c * c - 4.0 * a * x * s;
    2.0 * x / (c + disc.max(0.0).sqrt())
}

/// Principal branch W₀ of the Lambert W function: W(x)·e^{W(x)} = x for
/// x ≥ -1/e. Halley iterations inside a maintained bracket, falling back
/// to bisection whenever a step would leave it.
pub fn lambert_w(x: f64) -> Result<f64> {
    let neg_inv_e = -1.0 / E;
    if !x.is_finite() || x < neg_inv_e - 1e-12 {
        return Err(Error::domain(
            0,
            x,
            "lambert W principal branch [-1/e, inf)",
        ));
    }
    let x = x.max(neg_inv_e);
    if x == 0.0 {
        return Ok(0.0);
    }
    // W0 lies in [-1, 0] for negative x and in [0, min(x, 1 + ln x)] else
    let (mut lo, mut hi) = if x < 0.0 {
        (-1.0, 0.0)
    } else {
        (0.0, x.min(1.0 + x.ln().max(0.0)))
    };
    let mut w = if x < -0.25 {
        // series around the branch point
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else if x < E {
        x / (1.0 + x)
    } else {
        let l = x.ln();
        l - l.ln()
    };
    w = w.clamp(lo, hi);
    let residual = |w: f64| w * w.exp() - x;
    for _ in 0..100 {
        let f = residual(w);
        if f.abs() <= 1e-14 * (1.0 + x.abs()) {
            break;
        }
        if f > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        let ew = w.exp();
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let halley = w - f / denom;
        w = if halley.is_finite() && halley > lo && halley < hi {
            halley
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo).abs() <= f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// The φ-mean x̄_φ = φ⁻¹(φ̄), coordinate-wise. Uses the catalog closed
/// forms where the generator has one and monotone bisection otherwise.
/// `branch` disambiguates even generators over a sign-straddling sample.
pub fn phi_mean_with_branch(gen: &Generator, sample: &Sample, branch: Branch) -> Result<Vec<f64>> {
    if !gen.separable() {
        return Err(Error::NotInvertible(
            "phi-mean needs a 1D or separable generator".into(),
        ));
    }
    for p in sample.points() {
        gen.check_point(p)?;
    }
    let d = sample.dim();
    let mut out = vec![0.0; d];
    for j in 0..d {
        let coords: Vec<f64> = sample.points().iter().map(|p| p[j]).collect();
        let phibar = coords
            .iter()
            .zip(sample.weights())
            .try_fold(0.0, |acc, (&c, &w)| Ok(acc + w * gen.eval1(c)?))?;
        out[j] = phi_mean_1d(gen, &coords, phibar, branch)?;
    }
    Ok(out)
}

/// φ-mean with the positive branch convention for even generators.
pub fn phi_mean(gen: &Generator, sample: &Sample) -> Result<Vec<f64>> {
    phi_mean_with_branch(gen, sample, Branch::Positive)
}

fn phi_mean_1d(gen: &Generator, coords: &[f64], phibar: f64, branch: Branch) -> Result<f64> {
    let lo = coords.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match gen {
        Generator::Square | Generator::HalfSquare => {
            let rms = match gen {
                Generator::Square => phibar.sqrt(),
                _ => (2.0 * phibar).sqrt(),
            };
            // monotone hull keeps the sample side; a straddling hull falls
            // back to the requested branch
            let sign = if lo >= 0.0 {
                1.0
            } else if hi <= 0.0 {
                -1.0
            } else {
                match branch {
                    Branch::Positive => 1.0,
                    Branch::Negative => -1.0,
                }
            };
            Ok(sign * rms)
        }
        Generator::NegLog => Ok((-phibar).exp()),
        Generator::Inverse => Ok(1.0 / phibar),
        Generator::Power(p) => Ok(phibar.powf(1.0 / *p)),
        Generator::Exp => Ok(phibar.ln()),
        // x ln x = m  =>  x = m / W(m) = exp(W(m))
        Generator::XLogX => Ok(lambert_w(phibar)?.exp()),
        Generator::XExpX => lambert_w(phibar),
        _ => {
            // generic monotone inversion on the hull
            if lo == hi {
                return Ok(lo);
            }
            gen.grad_sign_on_hull(lo, hi)
                .map_err(|_| Error::NotInvertible(format!("{gen} not monotone on [{lo}, {hi}]")))?;
            let f = |x: f64| gen.eval1(x).map(|v| v - phibar).unwrap_or(f64::NAN);
            if f(lo) == 0.0 {
                return Ok(lo);
            }
            if f(hi) == 0.0 {
                return Ok(hi);
            }
            let (root, _) = bisect(f, lo, hi, 1e-14 * (1.0 + phibar.abs()), 200)?;
            Ok(root)
        }
    }
}

/// A point lifted onto the generator graph: (x, φ(x)).
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPoint {
    pub base: Vec<f64>,
    pub lift: f64,
}

impl AugmentedPoint {
    pub fn lift(gen: &Generator, base: &[f64]) -> Result<Self> {
        Ok(AugmentedPoint {
            base: base.to_vec(),
            lift: gen.eval(base)?,
        })
    }
}

/// Parse a generator id: `neg_log`, `inverse`, `square`, `half_square`,
/// `power:<p>`, `exp`, `xlogx`, `xexpx`, `quadratic:<matrix-file>`.
pub fn generator_from_id(id: &str) -> Result<Generator> {
    match id {
        "neg_log" => Ok(Generator::NegLog),
        "inverse" => Ok(Generator::Inverse),
        "square" => Ok(Generator::Square),
        "half_square" => Ok(Generator::HalfSquare),
        "exp" => Ok(Generator::Exp),
        "xlogx" => Ok(Generator::XLogX),
        "xexpx" => Ok(Generator::XExpX),
        _ => {
            if let Some(p) = id.strip_prefix("power:") {
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad power exponent in `{id}`")))?;
                if p < 2.0 {
                    return Err(Error::InvalidInput(format!(
                        "power generator requires p >= 2, got {p}"
                    )));
                }
                Generator::power(p)
            } else if let Some(path) = id.strip_prefix("quadratic:") {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::InvalidInput(format!("cannot read matrix file `{path}`: {e}"))
                })?;
                let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| {
                    Error::InvalidInput(format!("matrix file `{path}` is not a JSON matrix: {e}"))
                })?;
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidInput(format!(
                        "matrix file `{path}` is not square"
                    )));
                }
                let q = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                Generator::quadratic(q)
            } else {
                Err(Error::InvalidInput(format!("unknown generator id `{id}`")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<Generator> {
        vec![
            Generator::NegLog,
            Generator::Inverse,
            Generator::Square,
            Generator::HalfSquare,
            Generator::power(2.5).unwrap(),
            Generator::Exp,
            Generator::XLogX,
            Generator::XExpX,
            Generator::rotated_quadratic(0.5, 0.3).unwrap(),
            Generator::rotated_quadratic(1.0, -0.2).unwrap(),
            Generator::NegLog.conjugate(),
            Generator::XLogX.conjugate(),
        ]
    }

    #[test]
    fn eval_catalog_values() {
        assert_eq!(Generator::Square.eval1(3.0).unwrap(), 9.0);
        assert_eq!(Generator::NegLog.eval1(1.0).unwrap(), 0.0);
        assert!((Generator::XExpX.eval1(1.0).unwrap() - E).abs() < 1e-15);
    }

    #[test]
    fn inv_grad_closed_forms() {
        assert_eq!(Generator::Exp.inv_grad1(1.0).unwrap(), 0.0);
        assert_eq!(Generator::Square.inv_grad1(6.0).unwrap(), 3.0);
        // φ′(x) = 1 + log x: unit dual value at x = 1, zero at x = 1/e
        assert!((Generator::XLogX.inv_grad1(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((Generator::XLogX.inv_grad1(0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn inv_grad_range_errors() {
        // gradient of -log x is -1/x < 0
        assert!(matches!(
            Generator::NegLog.inv_grad1(0.5),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            Generator::XExpX.inv_grad1(-0.5),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            Generator::NegLog.eval1(-1.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            Generator::XExpX.eval1(-1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn grad_matches_finite_differences() {
        // 100 quasi-random in-domain points per generator
        for gen in catalog() {
            let (lo, hi) = gen.domain1().probe_box(3.0);
            for p in crate::numerics::probe_points(100, &[lo], &[hi]) {
                let x = p[0];
                let h = 1e-6 * (1.0 + x.abs());
                if !gen.domain1().contains(x - h) || !gen.domain1().contains(x + h) {
                    continue;
                }
                let fd = (gen.eval1(x + h).unwrap() - gen.eval1(x - h).unwrap()) / (2.0 * h);
                let g = gen.grad1(x).unwrap();
                assert!(
                    (g - fd).abs() / (1.0 + g.abs()) < 1e-6,
                    "{gen}: grad {g} vs fd {fd} at {x}"
                );
            }
        }
    }

    #[test]
    fn inv_grad_is_left_inverse_of_grad() {
        for gen in catalog() {
            let (lo, hi) = gen.domain1().probe_box(3.0);
            for p in crate::numerics::probe_points(100, &[lo], &[hi]) {
                let x = p[0];
                let y = gen.grad1(x).unwrap();
                let back = gen.inv_grad1(y).unwrap();
                assert!(
                    (back - x).abs() < 1e-10 * (1.0 + x.abs()),
                    "{gen}: inv_grad(grad({x})) = {back}"
                );
            }
        }
    }

    #[test]
    fn hessian_positive_on_probes() {
        for gen in catalog() {
            let (lo, hi) = gen.domain1().probe_box(3.0);
            for p in crate::numerics::probe_points(64, &[lo], &[hi]) {
                assert!(gen.hess1(p[0]).unwrap() > 0.0, "{gen} at {}", p[0]);
            }
        }
    }

    #[test]
    fn lambert_w_identity() {
        for x in [-0.3, 0.0, 0.5, 1.0, E, 10.0] {
            let w = lambert_w(x).unwrap();
            assert!(
                (w * w.exp() - x).abs() < 1e-12,
                "W({x}) = {w} fails the defining identity"
            );
        }
        assert!(lambert_w(-1.0).is_err());
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(E).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lambert_w_reference_value() {
        // independent bisection oracle on w e^w - 1 over [0, 1]
        let (oracle, _) = bisect(|w| w * w.exp() - 1.0, 0.0, 1.0, 1e-15, 200).unwrap();
        let w = lambert_w(1.0).unwrap();
        assert!((w - oracle).abs() < 1e-12, "W(1) = {w} vs oracle {oracle}");
        assert!((w - 0.567143).abs() < 1e-6);
    }

    #[test]
    fn phi_means_match_named_means() {
        let s = Sample::from_scalars(&[1.0, 4.0]).unwrap();
        let gm = phi_mean(&Generator::NegLog, &s).unwrap();
        assert!((gm[0] - 2.0).abs() < 1e-12, "geometric mean");

        let s = Sample::from_scalars(&[1.0, 3.0]).unwrap();
        let hm = phi_mean(&Generator::Inverse, &s).unwrap();
        assert!((hm[0] - 1.5).abs() < 1e-12, "harmonic mean");

        let s = Sample::from_scalars(&[1.0, 7.0]).unwrap();
        let rms = phi_mean(&Generator::Square, &s).unwrap();
        assert!((rms[0] - 5.0).abs() < 1e-12, "root mean square");
    }

    #[test]
    fn phi_mean_branch_and_hull() {
        let s = Sample::from_scalars(&[-3.0, 4.0]).unwrap();
        let plus = phi_mean(&Generator::Square, &s).unwrap()[0];
        let minus = phi_mean_with_branch(&Generator::Square, &s, Branch::Negative).unwrap()[0];
        assert!(plus > 0.0 && minus < 0.0 && (plus + minus).abs() < 1e-15);

        // all-negative hull keeps the negative side even with default branch
        let s = Sample::from_scalars(&[-3.0, -1.0]).unwrap();
        let m = phi_mean(&Generator::Square, &s).unwrap()[0];
        assert!((-3.0..=-1.0).contains(&m));
    }

    #[test]
    fn phi_mean_stays_in_hull_on_monotone_branch() {
        for gen in [
            Generator::NegLog,
            Generator::Inverse,
            Generator::Power(3.0),
            Generator::Exp,
            Generator::XExpX,
        ] {
            let s = Sample::from_scalars(&[1.2, 1.9, 2.7, 0.8]).unwrap();
            let m = phi_mean(&gen, &s).unwrap()[0];
            assert!((0.8..=2.7).contains(&m), "{gen}: {m} outside hull");
        }
    }

    #[test]
    fn phi_mean_closed_forms_match_generic_inversion() {
        // the generic path is an independent route to the same value
        for gen in [
            Generator::NegLog,
            Generator::Exp,
            Generator::XLogX,
            Generator::XExpX,
        ] {
            let s = Sample::from_scalars(&[1.3, 2.1, 3.7]).unwrap();
            let closed = phi_mean(&gen, &s).unwrap()[0];
            let phibar = s.mean_of(|p| gen.eval1(p[0])).unwrap();
            let f = |x: f64| gen.eval1(x).unwrap() - phibar;
            let (generic, _) = bisect(f, 1.3, 3.7, 1e-14, 200).unwrap();
            assert!(
                (closed - generic).abs() < 1e-9,
                "{gen}: closed {closed} vs generic {generic}"
            );
        }
    }

    #[test]
    fn conjugate_round_trips() {
        for gen in [
            Generator::NegLog,
            Generator::Exp,
            Generator::XLogX,
            Generator::Square,
        ] {
            let conj = gen.conjugate();
            let (lo, hi) = gen.domain1().probe_box(2.0);
            for p in crate::numerics::probe_points(32, &[lo], &[hi]) {
                let x = p[0];
                let y = gen.grad1(x).unwrap();
                // Young equality at dual pairs: phi(x) + phi*(y) = x y
                let lhs = gen.eval1(x).unwrap() + conj.eval1(y).unwrap();
                assert!(
                    (lhs - x * y).abs() < 1e-10 * (1.0 + lhs.abs()),
                    "{gen}: Young equality"
                );
                // grad of conjugate inverts grad
                assert!((conj.grad1(y).unwrap() - x).abs() < 1e-10 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn quadratic_form_round_trip() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let gen = Generator::quadratic(q).unwrap();
        let x = [1.0, -2.0];
        let g = gen.grad(&x).unwrap();
        let back = gen.inv_grad(&g).unwrap();
        assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
        // eval = 0.5 x^T Q x
        assert!((gen.eval(&x).unwrap() - 0.5 * (2.0 - 2.0 * 0.5 * 2.0 + 4.0)).abs() < 1e-12);
        assert!(
            Generator::quadratic(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err()
        );
    }

    #[test]
    fn rotated_quadratic_matches_direct_parameterization() {
        let a = 0.5;
        let theta: f64 = 0.3;
        let gen = Generator::rotated_quadratic(a, theta).unwrap();
        let (s, c) = theta.sin_cos();
        for x in [-0.6, 0.1, 0.9, 1.4] {
            let abscissa = x * c - a * x * x * s;
            let lift = x * s + a * x * x * c;
            assert!(
                (gen.eval1(abscissa).unwrap() - lift).abs() < 1e-12,
                "rotated curve value at {x}"
            );
        }
    }

    #[test]
    fn grad_composed_inverts_and_differentiates() {
        // gradient exp o (1 + ln x) on the domain where it is defined
        let gen = Generator::grad_composed(Generator::Exp, Generator::XLogX).unwrap();
        let x: f64 = 1.7;
        let expected = (1.0 + x.ln()).exp();
        assert!((gen.grad1(x).unwrap() - expected).abs() < 1e-12);
        let y = gen.grad1(x).unwrap();
        assert!((gen.inv_grad1(y).unwrap() - x).abs() < 1e-10);
        // eval is a quadrature; its derivative must match grad
        let h = 1e-6;
        let fd = (gen.eval1(x + h).unwrap() - gen.eval1(x - h).unwrap()) / (2.0 * h);
        assert!((fd - expected).abs() < 1e-5);
    }

    #[test]
    fn parse_ids() {
        assert!(generator_from_id("neg_log").is_ok());
        assert!(generator_from_id("power:3").is_ok());
        assert!(generator_from_id("power:1.5").is_err());
        assert!(generator_from_id("nope").is_err());
    }
}
