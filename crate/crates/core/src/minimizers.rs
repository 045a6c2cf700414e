//! Left and right population minimizers for every divergence family:
//! the closed-form weighted u-mean on the left, the bracketed 1D root
//! path and the multi-start augmented q-norm path on the right, all with
//! residual certificates.

use serde::Serialize;

use crate::conformal::{
    conformal_div, qnorm_order, scaled_conformal_div, ConformalWeight, WeightKind,
};
use crate::error::{Error, Result};
use crate::generators::{phi_mean, Generator};
use crate::geometry::{identity_structure, GeometricStructure};
use crate::numerics::{bfgs_minimize, bisect, dot, newton_polish, norm2};
use crate::sample::Sample;

/// Which argument of the divergence the minimizer occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => Err(Error::InvalidInput(format!(
                "side must be left|right, got `{s}`"
            ))),
        }
    }
}

/// Solver tolerances and budgets. The defaults are the contract values
/// used by the test suites.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Residual tolerance of the 1D right critical-point equation.
    pub root_tol: f64,
    /// Normalized orthogonality tolerance certifying right minimizers.
    pub orth_tol: f64,
    /// Iteration cap for bisection and per-start quasi-Newton runs.
    pub max_iter: usize,
    /// Finite-difference step scale.
    pub fd_step: f64,
    /// Distance under which two converged right minimizers are the same.
    pub dedup_tol: f64,
    /// Stationarity tolerance of the scaled left path.
    pub stationarity_tol: f64,
    /// Internal verification tolerance for the left closed form.
    pub grad_check_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            root_tol: 1e-10,
            orth_tol: 1e-8,
            max_iter: 200,
            fd_step: 1e-6,
            dedup_tol: 1e-4,
            stationarity_tol: 1e-10,
            grad_check_tol: 1e-8,
        }
    }
}

/// A located population minimizer with residual diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct MinimizerResult {
    pub mu: Vec<f64>,
    pub side: Side,
    /// 1D right path: the bracket the root was isolated in.
    pub bracket: Option<(f64, f64)>,
    /// Normalized orthogonality residual (right side) or normalized
    /// stationarity residual (left side).
    pub orth_residual: f64,
    /// Weighted average divergence at mu, in the side's orientation.
    pub avg_divergence: f64,
    /// The Mahalanobis ratio g²(μ)/D_{(x̄−μ)}g(μ), when defined.
    pub rho: Option<f64>,
    /// True when distinct certified right minimizers were found.
    pub multiplicity: bool,
    /// Every distinct certified minimizer, lexicographically ordered;
    /// `mu` is the first entry.
    pub candidates: Vec<Vec<f64>>,
    pub iterations: usize,
}

/// Weighted means of v(x) and φ(v(x)) over the sample.
pub fn augmented_stats(structure: &GeometricStructure, sample: &Sample) -> Result<(Vec<f64>, f64)> {
    let d = sample.dim();
    let mut mean_v = vec![0.0; d];
    let mut mean_phi = 0.0;
    for (p, w) in sample.points().iter().zip(sample.weights()) {
        let vp = structure.v_of(p)?;
        for (m, c) in mean_v.iter_mut().zip(&vp) {
            *m += w * c;
        }
        mean_phi += w * structure.phi().eval(&vp)?;
    }
    Ok((mean_v, mean_phi))
}

fn weighted_avg_divergence(
    structure: &GeometricStructure,
    weight: &ConformalWeight,
    sample: &Sample,
    mu: &[f64],
    side: Side,
) -> Result<f64> {
    let spec = crate::conformal::DivergenceSpec::with_structure(structure.clone(), weight.clone());
    let mut acc = 0.0;
    for (p, w) in sample.points().iter().zip(sample.weights()) {
        acc += w * match side {
            Side::Left => conformal_div(&spec, mu, p)?,
            Side::Right => conformal_div(&spec, p, mu)?,
        };
    }
    Ok(acc)
}

/// The closed-form left population minimizer: the g-weighted u-mean
/// μ = u⁻¹(Σ g(xᵢ)·u(xᵢ) / Σ g(xᵢ)), folded with the sample weights.
/// The stationarity of the left objective at μ is verified internally.
pub fn left_minimizer(
    structure: &GeometricStructure,
    weight: &ConformalWeight,
    sample: &Sample,
    cfg: &SolverConfig,
) -> Result<MinimizerResult> {
    let d = sample.dim();
    let mut acc = vec![0.0; d];
    let mut total_g = 0.0;
    let mut u_scale = 0.0f64;
    for (p, w) in sample.points().iter().zip(sample.weights()) {
        let g = weight.value(structure, p)?;
        if !g.is_finite() || g <= 0.0 {
            return Err(Error::Precondition(format!(
                "weight g(x) must be positive and finite, got {g}"
            )));
        }
        let up = structure.u_of(p)?;
        u_scale = u_scale.max(norm2(&up));
        for (a, c) in acc.iter_mut().zip(&up) {
            *a += w * g * c;
        }
        total_g += w * g;
    }
    for a in acc.iter_mut() {
        *a /= total_g;
    }
    let mu = structure.inv_u(&acc)?;

    // stationarity: J_v(μ)ᵀ Σ wᵢ g(xᵢ)(u(μ) − u(xᵢ)) must vanish
    let umu = structure.u_of(&mu)?;
    let mut s = vec![0.0; d];
    for (p, w) in sample.points().iter().zip(sample.weights()) {
        let g = weight.value(structure, p)?;
        let up = structure.u_of(p)?;
        for j in 0..d {
            s[j] += w * g * (umu[j] - up[j]);
        }
    }
    let grad = structure.v().jac_apply(&mu, &s)?;
    let jscale = structure
        .v()
        .jac_apply(&mu, &vec![1.0; d])?
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = total_g * (1.0 + u_scale) * (1.0 + jscale);
    let residual = norm2(&grad) / scale;
    if residual > cfg.grad_check_tol {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual,
            best: mu,
        });
    }
    let avg = weighted_avg_divergence(structure, weight, sample, &mu, Side::Left)?;
    Ok(MinimizerResult {
        mu: mu.clone(),
        side: Side::Left,
        bracket: None,
        orth_residual: residual,
        avg_divergence: avg,
        rho: None,
        multiplicity: false,
        candidates: vec![mu],
        iterations: 0,
    })
}

/// Orthogonality test vector z⁺_u(e) for direction e at μ.
/// Top block: f(u(μ))·e + (∇f(u(μ))ᵀe)·u(μ); bottom: −∇f(u(μ))ᵀe.
fn z_plus(weight: &ConformalWeight, umu: &[f64], e: &[f64]) -> (Vec<f64>, f64) {
    let f = weight.f_value(umu);
    let fg = match weight.kind {
        WeightKind::Constant => vec![0.0; umu.len()],
        _ => weight.f_grad(umu),
    };
    let fge = dot(&fg, e);
    let mut top: Vec<f64> = e.iter().map(|c| f * c).collect();
    for (t, u) in top.iter_mut().zip(umu) {
        *t += fge * u;
    }
    (top, -fge)
}

/// Normalized residual of the augmented orthogonality condition at μ:
/// max over basis directions e of |δ⁺_v · z⁺_u(e)| / (‖δ⁺_v‖·‖z⁺_u(e)‖).
/// Returns 0 when δ⁺_v vanishes (μ reproduces the augmented mean exactly).
pub fn orthogonality_residual(
    structure: &GeometricStructure,
    weight: &ConformalWeight,
    sample: &Sample,
    mu: &[f64],
) -> Result<f64> {
    let (mean_v, mean_phi) = augmented_stats(structure, sample)?;
    orthogonality_residual_with_stats(structure, weight, &mean_v, mean_phi, mu)
}

fn orthogonality_residual_with_stats(
    structure: &GeometricStructure,
    weight: &ConformalWeight,
    mean_v: &[f64],
    mean_phi: f64,
    mu: &[f64],
) -> Result<f64> {
    let d = mu.len();
    let vmu = structure.v_of(mu)?;
    let phimu = structure.phi().eval(&vmu)?;
    let delta: Vec<f64> = mean_v.iter().zip(&vmu).map(|(a, b)| a - b).collect();
    let delta_lift = mean_phi - phimu;
    let delta_norm = (norm2(&delta).powi(2) + delta_lift * delta_lift).sqrt();
    if delta_norm == 0.0 {
        return Ok(0.0);
    }
    let umu = structure.u_of(mu)?;
    let mut worst = 0.0f64;
    let mut e = vec![0.0; d];
    for i in 0..d {
        e[i] = 1.0;
        let (top, bottom) = z_plus(weight, &umu, &e);
        let znorm = (norm2(&top).powi(2) + bottom * bottom).sqrt();
        let inner = dot(&delta, &top) + delta_lift * bottom;
        if znorm > 0.0 {
            worst = worst.max(inner.abs() / (delta_norm * znorm));
        }
        e[i] = 0.0;
    }
    Ok(worst)
}

/// ρ_g = g²(μ) / D_{(x̄−μ)} g(μ), when the direction derivative is nonzero.
fn rho_at(
    structure: &GeometricStructure,
    weight: &ConformalWeight,
    sample: &Sample,
    mu: &[f64],
) -> Option<f64> {
    if weight.is_constant() {
        return None;
    }
    let xbar = sample.mean();
    let z: Vec<f64> = xbar.iter().zip(mu).map(|(a, b)| a - b).collect();
    if norm2(&z) < 1e-9 {
        return None;
    }
    let g = weight.value(structure, mu).ok()?;
    let dzg = weight.directional_derivative(structure, mu, &z).ok()?;
    if dzg.abs() < 1e-300 {
        return None;
    }
    Some(g * g / dzg)
}

/// The 1D right population minimizer of a total Bregman divergence by
/// bracketed bisection of the critical-point equation; the bracket comes
/// from the φ-mean and the arithmetic mean and depends only on the sign
/// of φ′ over the hull. A constant weight short-circuits to the mean.
pub fn right_minimizer_1d(
    gen: &Generator,
    weight: &ConformalWeight,
    sample: &Sample,
    cfg: &SolverConfig,
) -> Result<MinimizerResult> {
    if sample.dim() != 1 {
        return Err(Error::Precondition(format!(
            "the bracketed right path is one-dimensional, sample has dimension {}",
            sample.dim()
        )));
    }
    match weight.kind {
        WeightKind::Constant | WeightKind::GradBot | WeightKind::UBot => {}
        _ => {
            return Err(Error::Structure(format!(
                "the bracketed right path needs a constant or total-Bregman weight, got {weight}"
            )))
        }
    }
    for p in sample.points() {
        gen.check_point(p)?;
    }
    let structure = identity_structure(gen.clone(), 1)?;
    let xbar = sample.mean()[0];

    if sample.is_degenerate(0.0) {
        let mu = vec![sample.point(0)[0]];
        let avg = weighted_avg_divergence(&structure, weight, sample, &mu, Side::Right)?;
        return Ok(MinimizerResult {
            mu: mu.clone(),
            side: Side::Right,
            bracket: None,
            orth_residual: 0.0,
            avg_divergence: avg,
            rho: None,
            multiplicity: false,
            candidates: vec![mu],
            iterations: 0,
        });
    }

    if weight.is_constant() {
        let mu = vec![xbar];
        let res = orthogonality_residual(&structure, weight, sample, &mu)?;
        let avg = weighted_avg_divergence(&structure, weight, sample, &mu, Side::Right)?;
        return Ok(MinimizerResult {
            mu: mu.clone(),
            side: Side::Right,
            bracket: None,
            orth_residual: res,
            avg_divergence: avg,
            rho: None,
            multiplicity: false,
            candidates: vec![mu],
            iterations: 0,
        });
    }

    let (lo, hi) = {
        let h = sample.hull();
        (h[0].0, h[0].1)
    };
    let sign = gen.grad_sign_on_hull(lo, hi)?;
    let phibar = sample.mean_of(|p| gen.eval1(p[0]))?;
    let xphi = phi_mean(gen, sample)?[0];
    let bracket = if sign < 0.0 {
        (xphi, xbar)
    } else {
        (xbar, xphi)
    };

    // critical-point equation cleared of its pole at x̄:
    // r(μ) = (φ̄ − φ(μ))·φ′(μ) + (x̄ − μ)
    let r = |mu: f64| {
        let phi = gen.eval1(mu).unwrap_or(f64::NAN);
        let dphi = gen.grad1(mu).unwrap_or(f64::NAN);
        (phibar - phi) * dphi + (xbar - mu)
    };
    // reported residual is the raw critical-point form φ̃′(μ)φ′(μ) = −1
    let defect = |mu: f64| {
        let gap = xbar - mu;
        if gap.abs() < 1e-14 * (1.0 + xbar.abs()) {
            r(mu).abs()
        } else {
            (r(mu) / gap).abs()
        }
    };
    let (mut root, iters) = bisect(r, bracket.0, bracket.1, 0.0, cfg.max_iter)?;
    // a couple of Newton polish steps on r sharpen the bisection output
    for _ in 0..4 {
        let h = 1e-7 * (1.0 + root.abs());
        let slope = (r(root + h) - r(root - h)) / (2.0 * h);
        if !slope.is_finite() || slope == 0.0 {
            break;
        }
        let next = root - r(root) / slope;
        if next.is_finite() && next > bracket.0.min(bracket.1) && next < bracket.0.max(bracket.1) {
            root = next;
        } else {
            break;
        }
    }
    let residual = defect(root);
    // the quotient by (x̄ − μ) amplifies f64 rounding when the sample is
    // tight; accept residuals within a few units of that provable floor
    let gap = (xbar - root).abs().max(f64::MIN_POSITIVE);
    let floor = f64::EPSILON
        * (phibar.abs() * gen.grad1(root)?.abs() + xbar.abs() + root.abs() + 1.0)
        / gap;
    if residual > cfg.root_tol.max(8.0 * floor) {
        return Err(Error::NoConvergence {
            iterations: iters,
            residual,
            best: vec![root],
        });
    }
    let mu = vec![root];
    let orth = orthogonality_residual(&structure, weight, sample, &mu)?;
    let avg = weighted_avg_divergence(&structure, weight, sample, &mu, Side::Right)?;
    let rho = rho_at(&structure, weight, sample, &mu);
    Ok(MinimizerResult {
        mu: mu.clone(),
        side: Side::Right,
        bracket: Some(bracket),
        orth_residual: orth,
        avg_divergence: avg,
        rho,
        multiplicity: false,
        candidates: vec![mu],
        iterations: iters,
    })
}

/// The general right population minimizer: minimize the q-norm distance
/// between the augmented sample mean and the augmented candidate,
/// ‖x̄⁺_v − μ⁺_v‖_q with q = 2k, by multi-start quasi-Newton with
/// finite-difference gradients, then certify membership in the
/// critical-point set through the orthogonality residual.
pub fn right_minimizer_nd(
    structure: &GeometricStructure,
    weight: &ConformalWeight,
    sample: &Sample,
    k: usize,
    cfg: &SolverConfig,
) -> Result<MinimizerResult> {
    if k == 0 {
        return Err(Error::InvalidP(0.0));
    }
    for p in sample.points() {
        if !structure.contains(p) {
            return Err(Error::Precondition(format!(
                "sample point {p:?} outside the structure domain"
            )));
        }
    }
    let (mean_v, mean_phi) = augmented_stats(structure, sample)?;

    if weight.is_constant() {
        let mu = structure.inv_v(&mean_v)?;
        let res = orthogonality_residual_with_stats(structure, weight, &mean_v, mean_phi, &mu)?;
        let avg = weighted_avg_divergence(structure, weight, sample, &mu, Side::Right)?;
        return Ok(MinimizerResult {
            mu: mu.clone(),
            side: Side::Right,
            bracket: None,
            orth_residual: res,
            avg_divergence: avg,
            rho: None,
            multiplicity: false,
            candidates: vec![mu],
            iterations: 0,
        });
    }

    // weight/k consistency: the q-norm path holds for p = 2k/(2k-1)
    let p = weight
        .p_exponent()
        .expect("non-constant weight has an exponent");
    let k_of_p = qnorm_order(p)?;
    if k_of_p != k {
        return Err(Error::InvalidP(p));
    }
    if !structure.is_identity_v() && !matches!(weight.kind, WeightKind::UBot | WeightKind::UP(_)) {
        return Err(Error::Structure(format!(
            "a non-identity v needs a u-composed weight, got {weight}"
        )));
    }
    let q = (2 * k) as f64;
    let d = sample.dim();

    let objective = |mu: &[f64]| -> f64 {
        let Ok(vmu) = structure.v_of(mu) else {
            return f64::INFINITY;
        };
        let Ok(phimu) = structure.phi().eval(&vmu) else {
            return f64::INFINITY;
        };
        let mut total = (mean_phi - phimu).abs().powf(q);
        for j in 0..d {
            total += (mean_v[j] - vmu[j]).abs().powf(q);
        }
        total
    };
    let feasible = |mu: &[f64]| structure.contains(mu);
    // orthogonality system polished by Newton
    let system = |mu: &[f64]| -> Vec<f64> {
        let Ok(vmu) = structure.v_of(mu) else {
            return vec![f64::NAN; d];
        };
        let Ok(phimu) = structure.phi().eval(&vmu) else {
            return vec![f64::NAN; d];
        };
        let Ok(umu) = structure.u_of(mu) else {
            return vec![f64::NAN; d];
        };
        let delta: Vec<f64> = mean_v.iter().zip(&vmu).map(|(a, b)| a - b).collect();
        let delta_lift = mean_phi - phimu;
        let mut out = vec![0.0; d];
        let mut e = vec![0.0; d];
        for i in 0..d {
            e[i] = 1.0;
            let (top, bottom) = z_plus(weight, &umu, &e);
            out[i] = dot(&delta, &top) + delta_lift * bottom;
            e[i] = 0.0;
        }
        out
    };

    // seeds: raw mean, v-mean pullback, φ-mean, every sample point
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    let push_seed = |s: Vec<f64>, seeds: &mut Vec<Vec<f64>>| {
        if feasible(&s)
            && !seeds
                .iter()
                .any(|t| t.iter().zip(&s).all(|(a, b)| (a - b).abs() < 1e-9))
        {
            seeds.push(s);
        }
    };
    push_seed(sample.mean(), &mut seeds);
    if let Ok(vm) = structure.inv_v(&mean_v) {
        push_seed(vm, &mut seeds);
    }
    if structure.phi().separable() {
        if let Ok(pm) = phi_mean(structure.phi(), sample) {
            push_seed(pm, &mut seeds);
        }
    }
    for pnt in sample.points() {
        push_seed(pnt.clone(), &mut seeds);
    }
    if seeds.is_empty() {
        return Err(Error::Precondition(
            "no feasible seed for the right solver".into(),
        ));
    }

    let mut iterations = 0;
    let mut candidates: Vec<(Vec<f64>, f64, f64)> = Vec::new(); // (mu, F, residual)
    let mut best_anywhere: Option<(Vec<f64>, f64)> = None;
    for seed in &seeds {
        let run = bfgs_minimize(objective, feasible, seed, cfg.fd_step, 1e-12, cfg.max_iter);
        iterations += run.iterations;
        let (polished, newton_iters) =
            newton_polish(system, feasible, &run.x, cfg.fd_step, 1e-14, 40);
        iterations += newton_iters;
        let point = if feasible(&polished) { polished } else { run.x };
        let res = orthogonality_residual_with_stats(structure, weight, &mean_v, mean_phi, &point)?;
        match &best_anywhere {
            Some((_, r)) if *r <= res => {}
            _ => best_anywhere = Some((point.clone(), res)),
        }
        if res < cfg.orth_tol {
            candidates.push((point.clone(), objective(&point), res));
        }
    }
    if candidates.is_empty() {
        let (best, residual) = best_anywhere.expect("at least one seed ran");
        return Err(Error::NoConvergence {
            iterations,
            residual,
            best,
        });
    }
    // keep global minimizers of the augmented objective, dedup, order
    let fmin = candidates
        .iter()
        .map(|(_, f, _)| *f)
        .fold(f64::INFINITY, f64::min);
    let mut global: Vec<(Vec<f64>, f64, f64)> = candidates
        .into_iter()
        .filter(|(_, f, _)| *f <= fmin + 1e-8 * (1.0 + fmin.abs()))
        .collect();
    global.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut distinct: Vec<(Vec<f64>, f64, f64)> = Vec::new();
    for c in global {
        if !distinct.iter().any(|(m, _, _)| {
            m.iter()
                .zip(&c.0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                < cfg.dedup_tol
        }) {
            distinct.push(c);
        }
    }
    let multiplicity = distinct.len() >= 2;
    let candidates: Vec<Vec<f64>> = distinct.iter().map(|(m, _, _)| m.clone()).collect();
    let (mu, _, res) = distinct.remove(0);
    let avg = weighted_avg_divergence(structure, weight, sample, &mu, Side::Right)?;
    let rho = if structure.is_identity_v() {
        rho_at(structure, weight, sample, &mu)
    } else {
        None
    };
    Ok(MinimizerResult {
        mu,
        side: Side::Right,
        bracket: None,
        orth_residual: res,
        avg_divergence: avg,
        rho,
        multiplicity,
        candidates,
        iterations,
    })
}

/// Right-minimizer dispatcher: the bracketed 1D path when it applies
/// (identity structure, 1D, total-Bregman or constant weight, constant
/// gradient sign), the multi-start q-norm path otherwise.
pub fn right_minimizer_auto(
    structure: &GeometricStructure,
    weight: &ConformalWeight,
    sample: &Sample,
    cfg: &SolverConfig,
) -> Result<MinimizerResult> {
    let k = match weight.p_exponent() {
        None => 1,
        Some(p) => qnorm_order(p)?,
    };
    let one_d_eligible = sample.dim() == 1
        && structure.is_identity_v()
        && matches!(
            weight.kind,
            WeightKind::Constant | WeightKind::GradBot | WeightKind::UBot
        );
    if one_d_eligible {
        match right_minimizer_1d(structure.phi(), weight, sample, cfg) {
            Ok(r) => return Ok(r),
            // a sign change on the hull voids the bracket, not the minimizer
            Err(Error::SignChange { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    right_minimizer_nd(structure, weight, sample, k, cfg)
}

/// Check that the average conformal divergence at a certified right
/// minimizer equals the weighted Mahalanobis distortion to the mean:
/// lhs = (1/n)Σ D_{φ,g}(xᵢ:μ), rhs = ρ_g·(x̄−μ)ᵀHφ(μ)(x̄−μ).
/// Returns (lhs, rhs, ρ_g) and leaves the comparison to the caller.
pub fn mahalanobis_check(
    gen: &Generator,
    weight: &ConformalWeight,
    sample: &Sample,
    mu: &[f64],
    cfg: &SolverConfig,
) -> Result<(f64, f64, f64)> {
    let structure = identity_structure(gen.clone(), sample.dim())?;
    let res = orthogonality_residual(&structure, weight, sample, mu)?;
    if res > cfg.orth_tol {
        return Err(Error::Precondition(format!(
            "mu is not a certified critical point: residual {res:.3e}"
        )));
    }
    let xbar = sample.mean();
    let z: Vec<f64> = xbar.iter().zip(mu).map(|(a, b)| a - b).collect();
    if norm2(&z) < 1e-6 {
        return Err(Error::Precondition(
            "mu coincides with the sample mean; the ratio is undefined there".into(),
        ));
    }
    let rho = rho_at(&structure, weight, sample, mu)
        .ok_or_else(|| Error::Precondition("directional derivative of g vanishes at mu".into()))?;
    let lhs = weighted_avg_divergence(&structure, weight, sample, mu, Side::Right)?;
    let rhs = rho * gen.hess_quad(mu, &z, &z)?;
    Ok((lhs, rhs, rho))
}

/// Left population minimizer of the scaled conformal divergence
/// Σᵢ wᵢ·D_{φ,g}(μ/wᵢ : xᵢ/wᵢ), coordinate-wise by bisection of the
/// strictly increasing stationarity sum; μ lies in the sample hull.
pub fn scaled_left_minimizer(
    gen: &Generator,
    weight: &ConformalWeight,
    sample: &Sample,
    scales: &[f64],
    cfg: &SolverConfig,
) -> Result<MinimizerResult> {
    if !gen.separable() {
        return Err(Error::Precondition(
            "the scaled left path needs a 1D or separable generator".into(),
        ));
    }
    if scales.len() != sample.len() {
        return Err(Error::InvalidInput(format!(
            "{} scales for {} points",
            scales.len(),
            sample.len()
        )));
    }
    if let Some(bad) = scales.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::NonpositiveWeight(*bad));
    }
    let d = sample.dim();
    let structure = identity_structure(gen.clone(), d)?;
    // g(xᵢ/wᵢ) and domain checks for the scaled points
    let mut gs = Vec::with_capacity(sample.len());
    for (p, w) in sample.points().iter().zip(scales) {
        let scaled: Vec<f64> = p.iter().map(|c| c / w).collect();
        gen.check_point(&scaled)?;
        gs.push(weight.value(&structure, &scaled)?);
    }
    let hull = sample.hull();
    let mut mu = vec![0.0; d];
    let mut worst_resid = 0.0f64;
    let mut iterations = 0;
    for j in 0..d {
        let h = |m: f64| -> f64 {
            let mut acc = 0.0;
            for ((p, w), (g, sw)) in sample
                .points()
                .iter()
                .zip(scales)
                .zip(gs.iter().zip(sample.weights()))
            {
                let dmu = gen.grad1(m / w).unwrap_or(f64::NAN);
                let dx = gen.grad1(p[j] / w).unwrap_or(f64::NAN);
                acc += sw * g * (dmu - dx);
            }
            acc
        };
        let (lo, hi) = hull[j];
        if hi - lo == 0.0 {
            mu[j] = lo;
            continue;
        }
        let scale: f64 = sample
            .points()
            .iter()
            .zip(scales)
            .zip(gs.iter().zip(sample.weights()))
            .map(|((p, w), (g, sw))| sw * g * (1.0 + gen.grad1(p[j] / w).unwrap_or(0.0).abs()))
            .sum();
        let (root, it) = if h(lo) == 0.0 {
            (lo, 0)
        } else if h(hi) == 0.0 {
            (hi, 0)
        } else {
            // run the bracket down to float width; the residual check below
            // is the acceptance gate
            bisect(h, lo, hi, 0.0, cfg.max_iter)?
        };
        iterations += it;
        let resid = h(root).abs() / scale;
        if resid > cfg.stationarity_tol {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: resid,
                best: vec![root],
            });
        }
        worst_resid = worst_resid.max(resid);
        mu[j] = root;
    }
    // average scaled divergence at mu
    let spec = crate::conformal::DivergenceSpec::with_structure(structure, weight.clone());
    let mut avg = 0.0;
    for ((p, w), sw) in sample.points().iter().zip(scales).zip(sample.weights()) {
        avg += sw * scaled_conformal_div(&spec, &mu, p, *w)?;
    }
    let bracket = if d == 1 { Some(hull[0]) } else { None };
    Ok(MinimizerResult {
        mu: mu.clone(),
        side: Side::Left,
        bracket,
        orth_residual: worst_resid,
        avg_divergence: avg,
        rho: None,
        multiplicity: false,
        candidates: vec![mu],
        iterations,
    })
}
