//! Divergence families: Bregman, conformal, total Bregman, p-norm
//! conformal, v-conformal and scaled conformal.
//!
//! A conformal divergence multiplies a Bregman divergence by a positive
//! regularizer g of the right argument, D(x:y) = g(y)·D_φ(v(x):v(y)).

use std::fmt;

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::geometry::{identity_structure, GeometricStructure};
use crate::numerics::{dot, norm2};

/// The positive regularizer g, as a function of either ∇φ(y) or u(y).
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// g(y) = K
    Constant,
    /// g(y) = K / sqrt(1 + ‖∇φ(y)‖₂²)
    GradBot,
    /// g(y) = K / (1 + ‖∇φ(y)‖_p^p)^{1/p}
    GradP(f64),
    /// g(y) = K / sqrt(1 + ‖u(y)‖₂²)
    UBot,
    /// g(y) = K / (1 + ‖u(y)‖_p^p)^{1/p}
    UP(f64),
}

/// A conformal weight: kind plus the positive scale K.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalWeight {
    pub kind: WeightKind,
    pub scale: f64,
}

impl ConformalWeight {
    pub fn new(kind: WeightKind, scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::NonpositiveWeight(scale));
        }
        if let WeightKind::GradP(p) | WeightKind::UP(p) = kind {
            if !p.is_finite() || p < 1.0 {
                return Err(Error::InvalidInput(format!(
                    "p-norm weight needs p >= 1, got {p}"
                )));
            }
        }
        Ok(ConformalWeight { kind, scale })
    }

    pub fn constant(k: f64) -> Result<Self> {
        ConformalWeight::new(WeightKind::Constant, k)
    }

    pub fn g_bot(k: f64) -> Result<Self> {
        ConformalWeight::new(WeightKind::GradBot, k)
    }

    pub fn g_p(k: f64, p: f64) -> Result<Self> {
        ConformalWeight::new(WeightKind::GradP(p), k)
    }

    pub fn composed_u(k: f64) -> Result<Self> {
        ConformalWeight::new(WeightKind::UBot, k)
    }

    pub fn composed_u_p(k: f64, p: f64) -> Result<Self> {
        ConformalWeight::new(WeightKind::UP(p), k)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, WeightKind::Constant)
    }

    /// The p exponent of the weight, with ⊥ kinds reading as p = 2.
    pub fn p_exponent(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Constant => None,
            WeightKind::GradBot | WeightKind::UBot => Some(2.0),
            WeightKind::GradP(p) | WeightKind::UP(p) => Some(p),
        }
    }

    /// f(t) where t is the composition argument (∇φ(y) or u(y)).
    /// Evaluated in a scaled-out form so huge dual values do not overflow
    /// the intermediate norm.
    pub fn f_value(&self, t: &[f64]) -> f64 {
        match self.kind {
            WeightKind::Constant => self.scale,
            WeightKind::GradBot | WeightKind::UBot => {
                // 1 + ‖t‖² folded as a chain of hypots
                let h = t.iter().fold(1.0f64, |acc, c| acc.hypot(*c));
                self.scale / h
            }
            WeightKind::GradP(p) | WeightKind::UP(p) => {
                let m = t.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
                let s: f64 = t.iter().map(|c| (c.abs() / m).powf(p)).sum();
                self.scale / (m * (m.powf(-p) + s).powf(1.0 / p))
            }
        }
    }

    /// ∇f(t) of the composed function, including the scale.
    pub fn f_grad(&self, t: &[f64]) -> Vec<f64> {
        match self.kind {
            WeightKind::Constant => vec![0.0; t.len()],
            WeightKind::GradBot | WeightKind::UBot => {
                // -K·t/(1+‖t‖²)^{3/2} without forming ‖t‖² directly
                let h = t.iter().fold(1.0f64, |acc, c| acc.hypot(*c));
                t.iter().map(|x| -self.scale * (x / h) / h / h).collect()
            }
            WeightKind::GradP(p) | WeightKind::UP(p) => {
                // -K·sign(t)|t|^{p-1}/(1+‖t‖_p^p)^{1+1/p}, scaled by max|t|
                let m = t.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
                let s: f64 = m.powf(-p) + t.iter().map(|c| (c.abs() / m).powf(p)).sum::<f64>();
                t.iter()
                    .map(|x| {
                        let r = x.abs() / m;
                        -self.scale * x.signum() * r.powf(p - 1.0) / (m * m * s.powf(1.0 + 1.0 / p))
                    })
                    .collect()
            }
        }
    }

    /// Composition argument at y: ∇φ(y) for gradient kinds, u(y) for u-kinds,
    /// None for the constant kind.
    pub fn composed_arg(
        &self,
        structure: &GeometricStructure,
        y: &[f64],
    ) -> Result<Option<Vec<f64>>> {
        match self.kind {
            WeightKind::Constant => Ok(None),
            WeightKind::GradBot | WeightKind::GradP(_) => Ok(Some(structure.phi().grad(y)?)),
            WeightKind::UBot | WeightKind::UP(_) => Ok(Some(structure.u_of(y)?)),
        }
    }

    /// g(y).
    pub fn value(&self, structure: &GeometricStructure, y: &[f64]) -> Result<f64> {
        match self.composed_arg(structure, y)? {
            None => Ok(self.scale),
            Some(t) => Ok(self.f_value(&t)),
        }
    }

    /// Directional derivative D_z g(y).
    pub fn directional_derivative(
        &self,
        structure: &GeometricStructure,
        y: &[f64],
        z: &[f64],
    ) -> Result<f64> {
        match self.kind {
            WeightKind::Constant => Ok(0.0),
            WeightKind::GradBot | WeightKind::GradP(_) => {
                let t = structure.phi().grad(y)?;
                let hz = structure.phi().hess_apply(y, z)?;
                Ok(dot(&self.f_grad(&t), &hz))
            }
            WeightKind::UBot | WeightKind::UP(_) => {
                let t = structure.u_of(y)?;
                let jz = structure.u().jac_apply(y, z)?;
                Ok(dot(&self.f_grad(&t), &jz))
            }
        }
    }

    pub fn id(&self) -> String {
        match self.kind {
            WeightKind::Constant => format!("const:{}", self.scale),
            WeightKind::GradBot => format!("gbot:{}", self.scale),
            WeightKind::GradP(p) => format!("gp:{}:{p}", self.scale),
            WeightKind::UBot => format!("composed-u:{}", self.scale),
            WeightKind::UP(p) => format!("composed-up:{}:{p}", self.scale),
        }
    }
}

impl fmt::Display for ConformalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Parse a weight: `const:<K>`, `gbot:<K>`, `gp:<K>:<p>`, `composed-u:<K>`,
/// `composed-up:<K>:<p>`.
pub fn weight_from_id(id: &str) -> Result<ConformalWeight> {
    let mut parts = id.split(':');
    let kind = parts.next().unwrap_or_default();
    let nums: Vec<&str> = parts.collect();
    let parse = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::InvalidInput(format!("bad number `{s}` in weight `{id}`")))
    };
    match (kind, nums.as_slice()) {
        ("const", [k]) => ConformalWeight::constant(parse(k)?),
        ("gbot", [k]) => ConformalWeight::g_bot(parse(k)?),
        ("gp", [k, p]) => ConformalWeight::g_p(parse(k)?, parse(p)?),
        ("composed-u", [k]) => ConformalWeight::composed_u(parse(k)?),
        ("composed-up", [k, p]) => ConformalWeight::composed_u_p(parse(k)?, parse(p)?),
        _ => Err(Error::InvalidInput(format!("unknown weight spec `{id}`"))),
    }
}

/// Check that p has the form 2k/(2k-1) for integer k ≥ 1 and return k.
/// This is the exponent family for which the q-norm minimizer path holds,
/// with q = 2k the Hölder conjugate of p.
pub fn qnorm_order(p: f64) -> Result<usize> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidP(p));
    }
    let k = p / (2.0 * (p - 1.0));
    let rounded = k.round();
    if rounded < 1.0 || (k - rounded).abs() > 1e-9 {
        return Err(Error::InvalidP(p));
    }
    Ok(rounded as usize)
}

/// A fully specified divergence: generator + weight + (u, v) structure,
/// with optional per-point scales for the scaled family.
#[derive(Debug, Clone)]
pub struct DivergenceSpec {
    structure: GeometricStructure,
    weight: ConformalWeight,
}

impl DivergenceSpec {
    /// A conformal divergence in the identity structure (u = ∇φ, v = Id).
    pub fn new(gen: Generator, weight: ConformalWeight, dim: usize) -> Result<Self> {
        Ok(DivergenceSpec {
            structure: identity_structure(gen, dim)?,
            weight,
        })
    }

    /// A v-conformal divergence in an explicit structure.
    pub fn with_structure(structure: GeometricStructure, weight: ConformalWeight) -> Self {
        DivergenceSpec { structure, weight }
    }

    pub fn generator(&self) -> &Generator {
        self.structure.phi()
    }

    pub fn weight(&self) -> &ConformalWeight {
        &self.weight
    }

    pub fn structure(&self) -> &GeometricStructure {
        &self.structure
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    /// g(y).
    pub fn weight_at(&self, y: &[f64]) -> Result<f64> {
        self.weight.value(&self.structure, y)
    }

    pub fn id(&self) -> String {
        format!(
            "{}|{}|{}/{}",
            self.generator().id(),
            self.weight.id(),
            self.structure.u().id(),
            self.structure.v().id()
        )
    }
}

impl fmt::Display for DivergenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// The Bregman divergence D_φ(x:y) = φ(x) − φ(y) − (x−y)ᵀ∇φ(y).
pub fn bregman(gen: &Generator, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let grad_y = gen.grad(y)?;
    let mut inner = 0.0;
    for i in 0..x.len() {
        inner += (x[i] - y[i]) * grad_y[i];
    }
    Ok(gen.eval(x)? - gen.eval(y)? - inner)
}

/// The v-conformal divergence g(y)·D_φ(v(x):v(y)).
pub fn conformal_div(spec: &DivergenceSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let s = spec.structure();
    let vx = s.v_of(x)?;
    let vy = s.v_of(y)?;
    let g = spec.weight_at(y)?;
    Ok(g * bregman(s.phi(), &vx, &vy)?)
}

/// The scaled conformal divergence w·D_{φ,g}(x/w : y/w) for w > 0.
pub fn scaled_conformal_div(spec: &DivergenceSpec, x: &[f64], y: &[f64], w: f64) -> Result<f64> {
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::NonpositiveWeight(w));
    }
    let xs: Vec<f64> = x.iter().map(|c| c / w).collect();
    let ys: Vec<f64> = y.iter().map(|c| c / w).collect();
    Ok(w * conformal_div(spec, &xs, &ys)?)
}

/// Residual of the symmetry equation at (x, y):
/// |g(y)·D_φ(v(x):v(y)) − g(x)·D_φ(v(y):v(x))|. Zero everywhere exactly
/// when the divergence is the square loss in v-coordinates.
pub fn symmetry_defect(spec: &DivergenceSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let forward = conformal_div(spec, x, y)?;
    let backward = conformal_div(spec, y, x)?;
    Ok((forward - backward).abs())
}

/// Left-sided duality gap at (x, y):
/// |g(y)·D_φ(v(x):v(y)) − g(y)·D_{φ*}(u(y):u(x))| where φ* is evaluated
/// through the inverse-gradient identity.
pub fn duality_gap(spec: &DivergenceSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let s = spec.structure();
    let forward = conformal_div(spec, x, y)?;
    let conj = s.phi().conjugate();
    let ux = s.u_of(x)?;
    let uy = s.u_of(y)?;
    let dual = spec.weight_at(y)? * bregman(&conj, &uy, &ux)?;
    Ok((forward - dual).abs())
}

/// ‖x‖_q for the augmented q-norm path.
pub fn norm_q(v: &[f64], q: f64) -> f64 {
    if q == 2.0 {
        norm2(v)
    } else {
        v.iter().map(|c| c.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}
