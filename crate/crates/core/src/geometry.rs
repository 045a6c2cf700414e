//! (u, v) geometric structures: pairs of coordinate mappings tied together
//! by u = ∇φ ∘ v for a strictly convex φ, plus the α-β structure on
//! positive measures with its dually flat potentials.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::generators::{generator_from_id, Generator};
use crate::numerics::{probe_points, Interval};

/// Number of quasi-random probe points used to validate a structure.
pub const PROBE_COUNT: usize = 64;
/// Residual tolerance of the defining relation on the probe grid.
pub const DEFINING_TOL: f64 = 1e-8;
/// Smallest admissible eigenvalue of a composed Hessian product.
pub const COMPOSE_MIN_EIG: f64 = 1e-10;

/// A bijective C¹ coordinate mapping. All catalog mappings have symmetric
/// Jacobians (diagonal, or a Hessian), so Jᵀ-applications reuse `jac_apply`.
#[derive(Debug, Clone)]
pub enum Mapping {
    Identity,
    /// x ↦ ∇φ(x) for a catalog generator φ.
    Grad(Generator),
    /// x ↦ x^a on ℝ₊, a ≠ 0.
    Power(f64),
    Exp,
    Log,
}

impl Mapping {
    pub fn power(a: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidInput(format!(
                "power mapping needs a != 0, got {a}"
            )));
        }
        Ok(Mapping::Power(a))
    }

    pub fn separable(&self) -> bool {
        match self {
            Mapping::Grad(g) => g.separable(),
            _ => true,
        }
    }

    pub fn domain1(&self) -> Interval {
        match self {
            Mapping::Identity => Interval::REAL,
            Mapping::Grad(g) => g.domain1(),
            Mapping::Power(_) => Interval::POSITIVE,
            Mapping::Exp => Interval::REAL,
            Mapping::Log => Interval::POSITIVE,
        }
    }

    pub fn image1(&self) -> Interval {
        match self {
            Mapping::Identity => Interval::REAL,
            Mapping::Grad(g) => g.grad_image1(),
            Mapping::Power(_) => Interval::POSITIVE,
            Mapping::Exp => Interval::POSITIVE,
            Mapping::Log => Interval::REAL,
        }
    }

    fn increasing(&self) -> bool {
        match self {
            Mapping::Power(a) => *a > 0.0,
            _ => true,
        }
    }

    pub fn apply1(&self, x: f64) -> Result<f64> {
        if !self.domain1().contains(x) {
            return Err(Error::domain(0, x, format!("mapping {self}")));
        }
        Ok(match self {
            Mapping::Identity => x,
            Mapping::Grad(g) => g.grad1(x)?,
            Mapping::Power(a) => x.powf(*a),
            Mapping::Exp => x.exp(),
            Mapping::Log => x.ln(),
        })
    }

    pub fn invert1(&self, y: f64) -> Result<f64> {
        if !self.image1().contains(y) {
            return Err(Error::range(y, format!("mapping {self}")));
        }
        Ok(match self {
            Mapping::Identity => y,
            Mapping::Grad(g) => g.inv_grad1(y)?,
            Mapping::Power(a) => y.powf(1.0 / *a),
            Mapping::Exp => y.ln(),
            Mapping::Log => y.exp(),
        })
    }

    fn jac1(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Mapping::Identity => 1.0,
            Mapping::Grad(g) => g.hess1(x)?,
            Mapping::Power(a) => a * x.powf(a - 1.0),
            Mapping::Exp => x.exp(),
            Mapping::Log => 1.0 / x,
        })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Mapping::Identity => Ok(x.to_vec()),
            Mapping::Grad(g) => g.grad(x),
            _ => x.iter().map(|&c| self.apply1(c)).collect(),
        }
    }

    pub fn invert(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            Mapping::Identity => Ok(y.to_vec()),
            Mapping::Grad(g) => g.inv_grad(y),
            _ => y.iter().map(|&c| self.invert1(c)).collect(),
        }
    }

    /// J(x)·z; Jacobians in this catalog are symmetric.
    pub fn jac_apply(&self, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        match self {
            Mapping::Identity => Ok(z.to_vec()),
            Mapping::Grad(g) => g.hess_apply(x, z),
            _ => x
                .iter()
                .zip(z)
                .map(|(&c, &zj)| Ok(self.jac1(c)? * zj))
                .collect(),
        }
    }

    /// Solve J(x)·w = z.
    pub fn jac_solve(&self, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        match self {
            Mapping::Identity => Ok(z.to_vec()),
            Mapping::Grad(g) => match g {
                Generator::Quadratic(_) => {
                    // H = Q, so solving is the inverse gradient
                    g.inv_grad(z)
                }
                _ => x
                    .iter()
                    .zip(z)
                    .map(|(&c, &zj)| Ok(zj / g.hess1(c)?))
                    .collect(),
            },
            _ => x
                .iter()
                .zip(z)
                .map(|(&c, &zj)| Ok(zj / self.jac1(c)?))
                .collect(),
        }
    }

    /// Extreme eigenvalues (min, max) of J(x)ᵀJ(x).
    pub fn jtj_eig_bounds(&self, x: &[f64]) -> Result<(f64, f64)> {
        match self {
            Mapping::Grad(Generator::Quadratic(q)) => {
                // Q is constant; eigenvalues of QᵀQ are squared eigenvalues of Q
                let eig = q.matrix().clone().symmetric_eigen();
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for l in eig.eigenvalues.iter() {
                    lo = lo.min(l * l);
                    hi = hi.max(l * l);
                }
                Ok((lo, hi))
            }
            _ => {
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for &c in x {
                    let j = self.jac1(c)?;
                    lo = lo.min(j * j);
                    hi = hi.max(j * j);
                }
                Ok((lo, hi))
            }
        }
    }

    /// Preimage of `target` under the mapping, as an interval (separable).
    fn preimage1(&self, target: &Interval) -> Interval {
        let dom = self.domain1();
        let t = target.intersect(&self.image1());
        if t.lo >= t.hi {
            return Interval::new(0.0, 0.0);
        }
        let pull = |y: f64, fallback: f64| -> f64 {
            if y.is_finite() {
                let eps = 1e-9 * (1.0 + y.abs());
                let y = if y == t.lo { y + eps } else { y - eps };
                self.invert1(y).unwrap_or(fallback)
            } else {
                fallback
            }
        };
        if self.increasing() {
            Interval::new(pull(t.lo, dom.lo), pull(t.hi, dom.hi))
        } else {
            Interval::new(pull(t.hi, dom.lo), pull(t.lo, dom.hi))
        }
    }

    pub fn id(&self) -> String {
        match self {
            Mapping::Identity => "identity".into(),
            Mapping::Grad(g) => format!("grad:{}", g.id()),
            Mapping::Power(a) => format!("power:{a}"),
            Mapping::Exp => "exp".into(),
            Mapping::Log => "log".into(),
        }
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Parse a mapping id: `identity`, `grad:<gen-id>`, `power:<a>`, `exp`, `log`.
pub fn mapping_from_id(id: &str) -> Result<Mapping> {
    match id {
        "identity" => Ok(Mapping::Identity),
        "exp" => Ok(Mapping::Exp),
        "log" => Ok(Mapping::Log),
        _ => {
            if let Some(gen_id) = id.strip_prefix("grad:") {
                Ok(Mapping::Grad(generator_from_id(gen_id)?))
            } else if let Some(a) = id.strip_prefix("power:") {
                let a: f64 = a
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad power mapping in `{id}`")))?;
                Mapping::power(a)
            } else {
                Err(Error::InvalidInput(format!("unknown mapping id `{id}`")))
            }
        }
    }
}

/// A validated (u, v) pair with its generator: u = ∇φ ∘ v holds on the
/// probe grid within [`DEFINING_TOL`].
#[derive(Debug, Clone)]
pub struct GeometricStructure {
    u: Mapping,
    v: Mapping,
    phi: Generator,
    dim: usize,
    probe_lo: Vec<f64>,
    probe_hi: Vec<f64>,
}

impl GeometricStructure {
    pub fn u(&self) -> &Mapping {
        &self.u
    }

    pub fn v(&self) -> &Mapping {
        &self.v
    }

    pub fn phi(&self) -> &Generator {
        &self.phi
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn probe_box(&self) -> (&[f64], &[f64]) {
        (&self.probe_lo, &self.probe_hi)
    }

    pub fn is_identity_v(&self) -> bool {
        matches!(self.v, Mapping::Identity)
    }

    /// v(x).
    pub fn v_of(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.v.apply(x)
    }

    /// u(x).
    pub fn u_of(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.u.apply(x)
    }

    /// φ(v(x)).
    pub fn phi_of_v(&self, x: &[f64]) -> Result<f64> {
        self.phi.eval(&self.v.apply(x)?)
    }

    /// x from v(x).
    pub fn inv_v(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.v.invert(y)
    }

    /// x from u(x).
    pub fn inv_u(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.u.invert(y)
    }

    /// Is x inside the validated joint domain?
    pub fn contains(&self, x: &[f64]) -> bool {
        self.v
            .apply(x)
            .and_then(|vx| self.phi.check_point(&vx))
            .and_then(|_| self.u.apply(x).map(|_| ()))
            .is_ok()
    }
}

/// The identity structure of a generator: (u, v) = (∇φ, Id).
pub fn identity_structure(gen: Generator, dim: usize) -> Result<GeometricStructure> {
    make_structure(Mapping::Grad(gen.clone()), Mapping::Identity, gen, dim)
}

/// Validate a (u, v, φ) triple on a 64-point quasi-random probe grid and
/// return the structure. The probe box is the intersection of the mapping
/// domains with the pullback of the generator domain through v.
pub fn make_structure(
    u: Mapping,
    v: Mapping,
    phi: Generator,
    dim: usize,
) -> Result<GeometricStructure> {
    if let Some(d) = phi.fixed_dim() {
        if d != dim {
            return Err(Error::InvalidInput(format!(
                "generator dimension {d} does not match requested dimension {dim}"
            )));
        }
    }
    let (probe_lo, probe_hi) = probe_box_for(&u, &v, &phi, dim)?;
    let probes = probe_points(PROBE_COUNT, &probe_lo, &probe_hi);
    let mut worst = 0.0f64;
    let mut worst_probe = probes[0].clone();
    for x in &probes {
        let ux = u.apply(x)?;
        let vx = v.apply(x)?;
        let gvx = phi.grad(&vx)?;
        let res = ux
            .iter()
            .zip(&gvx)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let scale = 1.0 + ux.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let res = res / scale;
        if res > worst {
            worst = res;
            worst_probe = x.clone();
        }
        // v must stay bijective: nonsingular Jacobian, and v', u' share signs
        let jv = v.jac_apply(x, &vec![1.0; dim])?;
        if jv.iter().any(|j| j.abs() < 1e-12) {
            return Err(Error::StructureMismatch {
                probe: x.clone(),
                residual: f64::INFINITY,
            });
        }
        if u.separable() && v.separable() {
            let ju = u.jac_apply(x, &vec![1.0; dim])?;
            if ju.iter().zip(&jv).any(|(a, b)| a * b <= 0.0) {
                return Err(Error::StructureMismatch {
                    probe: x.clone(),
                    residual: f64::INFINITY,
                });
            }
        }
    }
    if worst > DEFINING_TOL {
        return Err(Error::StructureMismatch {
            probe: worst_probe,
            residual: worst,
        });
    }
    Ok(GeometricStructure {
        u,
        v,
        phi,
        dim,
        probe_lo,
        probe_hi,
    })
}

fn probe_box_for(
    u: &Mapping,
    v: &Mapping,
    phi: &Generator,
    dim: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    const CLIP: f64 = 2.0;
    if !u.separable() || !v.separable() || !phi.separable() {
        // quadratic pieces live on all of ℝ^d
        let mut joint = Interval::REAL;
        if v.separable() {
            joint = joint.intersect(&v.domain1());
        }
        if u.separable() {
            joint = joint.intersect(&u.domain1());
        }
        let (lo, hi) = joint.probe_box(CLIP);
        return Ok((vec![lo; dim], vec![hi; dim]));
    }
    let joint = u
        .domain1()
        .intersect(&v.domain1())
        .intersect(&v.preimage1(&phi.domain1()));
    if joint.lo >= joint.hi {
        return Err(Error::Structure(format!(
            "empty joint domain for u = {u}, v = {v}, phi = {phi}"
        )));
    }
    let (lo, hi) = joint.probe_box(CLIP);
    Ok((vec![lo; dim], vec![hi; dim]))
}

/// Compose (u, v)_φ with (v, w)_ψ into (u, w)_χ where ∇χ = ∇φ ∘ ∇ψ.
/// Valid exactly when Hφ(∇ψ)·Hψ is symmetric positive definite on the
/// probe grid; otherwise reports the offending probe.
pub fn compose_structures(
    s1: &GeometricStructure,
    s2: &GeometricStructure,
) -> Result<GeometricStructure> {
    if s1.dim != s2.dim {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            s1.dim, s2.dim
        )));
    }
    let dim = s1.dim;
    // shared middle mapping: s1.v must coincide with s2.u
    let lo: Vec<f64> = s1
        .probe_lo
        .iter()
        .zip(&s2.probe_lo)
        .map(|(a, b)| a.max(*b))
        .collect();
    let hi: Vec<f64> = s1
        .probe_hi
        .iter()
        .zip(&s2.probe_hi)
        .map(|(a, b)| a.min(*b))
        .collect();
    if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
        return Err(Error::MappingMismatch {
            probe: lo,
            residual: f64::INFINITY,
        });
    }
    let probes = probe_points(PROBE_COUNT, &lo, &hi);
    for x in &probes {
        let a = s1.v.apply(x)?;
        let b = s2.u.apply(x)?;
        let res = a
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0f64, f64::max);
        let scale = 1.0 + a.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        if res / scale > DEFINING_TOL {
            return Err(Error::MappingMismatch {
                probe: x.clone(),
                residual: res / scale,
            });
        }
    }

    let phi = &s1.phi;
    let psi = &s2.phi;
    // transitivity condition on points of the gradient-composition domain
    let (g_lo, g_hi) = grad_compose_probe_box(phi, psi, dim)?;
    let gprobes = probe_points(PROBE_COUNT, &g_lo, &g_hi);
    for t in &gprobes {
        let m = hess_product(phi, psi, t)?;
        let sym_defect = (&m - m.transpose()).abs().max();
        if sym_defect > DEFINING_TOL {
            return Err(Error::Incompatible {
                probe: t.clone(),
                reason: format!("Hessian product is not symmetric: defect {sym_defect:.3e}"),
            });
        }
        let sym = 0.5 * (&m + m.transpose());
        let min_eig = sym
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig <= COMPOSE_MIN_EIG {
            return Err(Error::Incompatible {
                probe: t.clone(),
                reason: format!("Hessian product has eigenvalue {min_eig:.3e} <= 0"),
            });
        }
    }

    let chi = compose_generator(phi, psi, &gprobes)?;
    make_structure(s1.u.clone(), s2.v.clone(), chi, dim)
}

fn grad_compose_probe_box(
    phi: &Generator,
    psi: &Generator,
    dim: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    const CLIP: f64 = 2.0;
    if !phi.separable() || !psi.separable() {
        let (lo, hi) = Interval::REAL.probe_box(CLIP);
        return Ok((vec![lo; dim], vec![hi; dim]));
    }
    let target = psi.grad_image1().intersect(&phi.domain1());
    if target.lo >= target.hi {
        return Err(Error::Incompatible {
            probe: vec![],
            reason: format!("gradient image of {psi} never meets the domain of {phi}"),
        });
    }
    // pull back through ∇ψ (strictly increasing)
    let pull = |y: f64, fallback: f64| {
        if y.is_finite() {
            let eps = 1e-9 * (1.0 + y.abs());
            psi.inv_grad1(if y == target.lo { y + eps } else { y - eps })
                .unwrap_or(fallback)
        } else {
            fallback
        }
    };
    let dom = psi.domain1();
    let joint = Interval::new(pull(target.lo, dom.lo), pull(target.hi, dom.hi));
    let (lo, hi) = joint.probe_box(CLIP);
    Ok((vec![lo; dim], vec![hi; dim]))
}

fn hess_product(phi: &Generator, psi: &Generator, t: &[f64]) -> Result<DMatrix<f64>> {
    let d = t.len();
    let grad_psi = psi.grad(t)?;
    let mut m = DMatrix::zeros(d, d);
    // column j of Hφ(∇ψ(t)) Hψ(t)
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        let hpsi_e = psi.hess_apply(t, &e)?;
        let col = phi.hess_apply(&grad_psi, &hpsi_e)?;
        for i in 0..d {
            m[(i, j)] = col[i];
        }
    }
    Ok(m)
}

fn as_quadratic_matrix(gen: &Generator, dim: usize) -> Option<DMatrix<f64>> {
    match gen {
        Generator::Quadratic(q) if q.dim() == dim => Some(q.matrix().clone()),
        Generator::HalfSquare => Some(DMatrix::identity(dim, dim)),
        Generator::Square => Some(2.0 * DMatrix::identity(dim, dim)),
        _ => None,
    }
}

fn compose_generator(phi: &Generator, psi: &Generator, probes: &[Vec<f64>]) -> Result<Generator> {
    // ∇φ ∘ ∇ψ = Id means the pair is mutually conjugate: χ = ½‖x‖²
    let mut is_identity = true;
    for t in probes {
        let g = phi.grad(&psi.grad(t)?)?;
        if g.iter()
            .zip(t)
            .any(|(a, b)| (a - b).abs() > DEFINING_TOL * (1.0 + b.abs()))
        {
            is_identity = false;
            break;
        }
    }
    if is_identity {
        return Ok(Generator::HalfSquare);
    }
    let dim = probes[0].len();
    if let (Some(q1), Some(q2)) = (as_quadratic_matrix(phi, dim), as_quadratic_matrix(psi, dim)) {
        let prod = &q1 * &q2;
        let sym = 0.5 * (&prod + prod.transpose());
        return Generator::quadratic(sym);
    }
    if phi.separable() && psi.separable() {
        return Generator::grad_composed(phi.clone(), psi.clone());
    }
    Err(Error::UnsupportedComposition(format!(
        "no catalog generator with gradient grad({phi}) o grad({psi})"
    )))
}

/// Build a structure from a `<u-id>/<v-id>` pair, or the identity structure
/// (u = ∇φ, v = Id) when no pair is given.
pub fn structure_from_spec(
    spec: Option<&str>,
    gen: Generator,
    dim: usize,
) -> Result<GeometricStructure> {
    match spec {
        None => identity_structure(gen, dim),
        Some(s) => {
            let (u_id, v_id) = s.split_once('/').ok_or_else(|| {
                Error::InvalidInput(format!(
                    "structure spec `{s}` must look like `<u-mapping>/<v-mapping>`"
                ))
            })?;
            make_structure(mapping_from_id(u_id)?, mapping_from_id(v_id)?, gen, dim)
        }
    }
}

/// The α-β structure on positive measures: θⁱ = ξᵢ^α, ηⁱ = ξᵢ^β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBetaStructure {
    pub alpha: f64,
    pub beta: f64,
    /// Number of support points (the vectors live in ℝ^{n+1}).
    pub dimension: usize,
}

impl AlphaBetaStructure {
    pub fn new(alpha: f64, beta: f64, dimension: usize) -> Result<Self> {
        if alpha == 0.0 || beta == 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "alpha and beta must be nonzero, got ({alpha}, {beta})"
            )));
        }
        if alpha + beta == 0.0 {
            return Err(Error::InvalidInput(format!(
                "alpha + beta must be nonzero, got ({alpha}, {beta})"
            )));
        }
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(AlphaBetaStructure {
            alpha,
            beta,
            dimension,
        })
    }

    fn check_positive(&self, name: &str, xs: &[f64]) -> Result<()> {
        if xs.len() != self.dimension {
            return Err(Error::InvalidInput(format!(
                "{name} has dimension {}, structure expects {}",
                xs.len(),
                self.dimension
            )));
        }
        for (i, &x) in xs.iter().enumerate() {
            if !x.is_finite() || x <= 0.0 {
                return Err(Error::domain(i, x, "positive measure coordinates"));
            }
        }
        Ok(())
    }

    /// θ coordinates of a source point ξ.
    pub fn theta(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_positive("xi", xi)?;
        Ok(xi.iter().map(|x| x.powf(self.alpha)).collect())
    }

    /// η coordinates of a source point ξ.
    pub fn eta(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_positive("xi", xi)?;
        Ok(xi.iter().map(|x| x.powf(self.beta)).collect())
    }
}

/// The α-β divergence between positive measures ξ and ξ′:
/// Σᵢ { α/(α+β)·ξᵢ^{α+β} + β/(α+β)·ξ′ᵢ^{α+β} − ξᵢ^α·ξ′ᵢ^β }.
pub fn alpha_beta_divergence(s: &AlphaBetaStructure, xi: &[f64], xi_prime: &[f64]) -> Result<f64> {
    s.check_positive("xi", xi)?;
    s.check_positive("xi_prime", xi_prime)?;
    let (a, b) = (s.alpha, s.beta);
    let ab = a + b;
    let mut total = 0.0;
    for (&x, &y) in xi.iter().zip(xi_prime) {
        total += a / ab * x.powf(ab) + b / ab * y.powf(ab) - x.powf(a) * y.powf(b);
    }
    Ok(total)
}

/// The dually flat potentials at θ: ψ(θ) = α/(α+β)·Σ θᵢ^{(α+β)/α} and the
/// dual potential evaluated at the conjugate coordinates η(θ), ηᵢ = θᵢ^{β/α}.
/// At a dual pair, ψ(θ) + φ(η) − θ·η = 0.
pub fn alpha_beta_potentials(s: &AlphaBetaStructure, theta: &[f64]) -> Result<(f64, f64)> {
    s.check_positive("theta", theta)?;
    let (a, b) = (s.alpha, s.beta);
    let ab = a + b;
    let psi: f64 = a / ab * theta.iter().map(|t| t.powf(ab / a)).sum::<f64>();
    let eta: Vec<f64> = theta.iter().map(|t| t.powf(b / a)).collect();
    let varphi: f64 = b / ab * eta.iter().map(|e| e.powf(ab / b)).sum::<f64>();
    Ok((psi, varphi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dot;

    #[test]
    fn total_bregman_structures_validate() {
        for gen in [
            Generator::NegLog,
            Generator::XLogX,
            Generator::Exp,
            Generator::Square,
        ] {
            identity_structure(gen, 1).expect("identity structure is valid by construction");
        }
    }

    #[test]
    fn self_dual_structure_validates() {
        make_structure(
            Mapping::Identity,
            Mapping::Identity,
            Generator::HalfSquare,
            1,
        )
        .unwrap();
    }

    #[test]
    fn mismatched_structure_is_rejected() {
        let err = make_structure(Mapping::Exp, Mapping::Identity, Generator::Square, 1);
        assert!(matches!(err, Err(Error::StructureMismatch { .. })));
    }

    #[test]
    fn log_exp_structure_validates() {
        // u = Id, v = log, phi = exp: exp(log x) = x
        make_structure(Mapping::Identity, Mapping::Log, Generator::Exp, 1).unwrap();
    }

    #[test]
    fn reflexivity_of_registered_mappings() {
        for id in [
            "identity",
            "grad:xlogx",
            "grad:neg_log",
            "power:1.5",
            "exp",
            "log",
        ] {
            let m = mapping_from_id(id).unwrap();
            make_structure(m.clone(), m, Generator::HalfSquare, 1)
                .unwrap_or_else(|e| panic!("reflexive case failed for {id}: {e}"));
        }
    }

    #[test]
    fn symmetry_of_the_relation() {
        // (u, v)_phi valid implies (v, u)_{phi*} valid
        let cases = [
            (
                Mapping::Grad(Generator::XLogX),
                Mapping::Identity,
                Generator::XLogX,
            ),
            (Mapping::Identity, Mapping::Log, Generator::Exp),
        ];
        for (u, v, phi) in cases {
            make_structure(u.clone(), v.clone(), phi.clone(), 1).unwrap();
            make_structure(v, u, phi.conjugate(), 1).unwrap();
        }
    }

    #[test]
    fn shared_eigenspace_quadratics_compose() {
        let q1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let q2 = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let phi = Generator::quadratic(q1.clone()).unwrap();
        let psi = Generator::quadratic(q2.clone()).unwrap();
        let s1 = make_structure(Mapping::Grad(phi.clone()), Mapping::Identity, phi, 2).unwrap();
        let s2 = make_structure(Mapping::Identity, Mapping::Grad(psi.conjugate()), psi, 2).unwrap();
        let composed = compose_structures(&s1, &s2).unwrap();
        match composed.phi() {
            Generator::Quadratic(q) => {
                let expected = &q1 * &q2;
                assert!((q.matrix() - expected).abs().max() < 1e-12);
            }
            other => panic!("expected quadratic composition, got {other}"),
        }
    }

    #[test]
    fn non_commuting_quadratics_are_incompatible() {
        let q1 = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let q2 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let phi = Generator::quadratic(q1).unwrap();
        let psi = Generator::quadratic(q2).unwrap();
        let s1 = make_structure(Mapping::Grad(phi.clone()), Mapping::Identity, phi, 2).unwrap();
        let s2 = make_structure(Mapping::Identity, Mapping::Grad(psi.conjugate()), psi, 2).unwrap();
        assert!(matches!(
            compose_structures(&s1, &s2),
            Err(Error::Incompatible { .. })
        ));
    }

    #[test]
    fn inverse_pairing_composes_to_identity_structure() {
        let phi = Generator::XLogX;
        let s1 = identity_structure(phi.clone(), 1).unwrap();
        // (v, u)_{phi*} = (Id, grad phi)_{phi*}
        let s2 = make_structure(
            Mapping::Identity,
            Mapping::Grad(phi.clone()),
            phi.conjugate(),
            1,
        )
        .unwrap();
        let composed = compose_structures(&s1, &s2).unwrap();
        assert!(matches!(composed.phi(), Generator::HalfSquare));
        // both outer mappings are grad:xlogx, so (u, u)_{half square}
        assert_eq!(composed.u().id(), "grad:xlogx");
        assert_eq!(composed.v().id(), "grad:xlogx");
    }

    #[test]
    fn mapping_mismatch_is_detected() {
        let s1 = identity_structure(Generator::XLogX, 1).unwrap(); // v = Id
        let s2 = identity_structure(Generator::Exp, 1).unwrap(); // u = exp != Id
        assert!(matches!(
            compose_structures(&s1, &s2),
            Err(Error::MappingMismatch { .. })
        ));
    }

    #[test]
    fn alpha_beta_divergence_examples() {
        let s = AlphaBetaStructure::new(1.0, 1.0, 2).unwrap();
        let d = alpha_beta_divergence(&s, &[1.0, 2.0], &[2.0, 1.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-14);
        assert_eq!(
            alpha_beta_divergence(&s, &[1.0, 2.0], &[1.0, 2.0]).unwrap(),
            0.0
        );

        let s = AlphaBetaStructure::new(1.0, 2.0, 1).unwrap();
        let d = alpha_beta_divergence(&s, &[2.0], &[1.0]).unwrap();
        assert!((d - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn alpha_beta_reduces_to_half_squared_euclidean() {
        let s = AlphaBetaStructure::new(1.0, 1.0, 3).unwrap();
        let xi = [0.3, 1.7, 2.2];
        let xp = [1.1, 0.4, 2.0];
        let d = alpha_beta_divergence(&s, &xi, &xp).unwrap();
        let half_sq: f64 = xi
            .iter()
            .zip(&xp)
            .map(|(a, b)| 0.5 * (a - b) * (a - b))
            .sum();
        assert!((d - half_sq).abs() < 1e-12);
    }

    #[test]
    fn alpha_beta_potentials_examples() {
        let s = AlphaBetaStructure::new(1.0, 1.0, 1).unwrap();
        let (psi, _) = alpha_beta_potentials(&s, &[2.0]).unwrap();
        assert!((psi - 2.0).abs() < 1e-14);

        let s = AlphaBetaStructure::new(1.0, 2.0, 1).unwrap();
        let (psi, _) = alpha_beta_potentials(&s, &[3.0]).unwrap();
        assert!((psi - 9.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_beta_legendre_consistency() {
        for (a, b) in [(1.0, 2.0), (0.5, 0.7), (2.0, -0.5), (-0.4, 1.3)] {
            let s = AlphaBetaStructure::new(a, b, 3).unwrap();
            for theta in probe_points(20, &[0.2, 0.2, 0.2], &[3.0, 3.0, 3.0]) {
                let (psi, varphi) = alpha_beta_potentials(&s, &theta).unwrap();
                let eta: Vec<f64> = theta.iter().map(|t| t.powf(b / a)).collect();
                let gap = psi + varphi - dot(&theta, &eta);
                assert!(
                    gap.abs() < 1e-10 * (1.0 + psi.abs() + varphi.abs()),
                    "Legendre gap {gap} for alpha={a}, beta={b}"
                );
            }
        }
    }

    #[test]
    fn alpha_beta_rejects_bad_parameters() {
        assert!(AlphaBetaStructure::new(0.0, 1.0, 2).is_err());
        assert!(AlphaBetaStructure::new(1.0, -1.0, 2).is_err());
        let s = AlphaBetaStructure::new(1.0, 1.0, 2).unwrap();
        assert!(matches!(
            alpha_beta_divergence(&s, &[1.0, -2.0], &[1.0, 1.0]),
            Err(Error::Domain { .. })
        ));
    }
}
