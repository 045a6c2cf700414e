//! Influence functions under ε-contamination and outlier sweeps.
//!
//! Contaminating a sample with an outlier x* at weight ε drifts the
//! population minimizer from μ to μ* = μ + ε·δ_μ. The influence δ_μ is
//! measured empirically by re-solving on the reweighted sample; on the
//! left side the first-order closed form
//! δ_μ = (g(x*)/Σ*)·J_u⁻¹(μ)·(u(x*) − u(μ)) is reported alongside.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{weight_from_id, ConformalWeight};
use crate::error::{Error, Result};
use crate::generators::generator_from_id;
use crate::geometry::{structure_from_spec, GeometricStructure};
use crate::minimizers::{
    left_minimizer, right_minimizer_auto, MinimizerResult, Side, SolverConfig,
};
use crate::numerics::{norm2, probe_points};
use crate::sample::Sample;

/// Default floor constant keeping the contamination weight away from 1.
pub const DEFAULT_TAU: f64 = 0.05;

/// Influence of one outlier at one contamination weight.
#[derive(Debug, Clone, Serialize)]
pub struct InfluenceReport {
    pub epsilon: f64,
    pub tau: f64,
    pub outlier: Vec<f64>,
    pub side: Side,
    /// Empirical influence (μ* − μ)/ε.
    pub delta_mu: Vec<f64>,
    pub delta_norm: f64,
    /// First-order closed form, left side only.
    pub analytic_delta: Option<Vec<f64>>,
    pub mu: Vec<f64>,
    pub mu_contaminated: Vec<f64>,
}

fn solve(
    structure: &GeometricStructure,
    weight: &ConformalWeight,
    sample: &Sample,
    side: Side,
    cfg: &SolverConfig,
) -> Result<MinimizerResult> {
    match side {
        Side::Left => left_minimizer(structure, weight, sample, cfg),
        Side::Right => right_minimizer_auto(structure, weight, sample, cfg),
    }
}

/// Empirical (and, on the left, analytic) influence of the outlier x*
/// added with weight ε ∈ (0, 1 − τ).
#[allow(clippy::too_many_arguments)]
pub fn influence(
    structure: &GeometricStructure,
    weight: &ConformalWeight,
    sample: &Sample,
    x_star: &[f64],
    epsilon: f64,
    side: Side,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<InfluenceReport> {
    if !(epsilon > 0.0 && epsilon < 1.0 - tau) {
        return Err(Error::EpsilonRange {
            value: epsilon,
            max: 1.0 - tau,
        });
    }
    if !structure.contains(x_star) {
        return Err(Error::Precondition(format!(
            "outlier {x_star:?} outside the structure domain"
        )));
    }
    let base = solve(structure, weight, sample, side, cfg)?;
    let contaminated = sample.contaminate(x_star, epsilon)?;
    let shifted = solve(structure, weight, &contaminated, side, cfg)?;
    let delta_mu: Vec<f64> = shifted
        .mu
        .iter()
        .zip(&base.mu)
        .map(|(a, b)| (a - b) / epsilon)
        .collect();

    let analytic_delta = match side {
        Side::Right => None,
        Side::Left => {
            let g_star = weight.value(structure, x_star)?;
            let sigma: f64 = sample
                .points()
                .iter()
                .zip(sample.weights())
                .map(|(p, w)| Ok(w * weight.value(structure, p)?))
                .sum::<Result<f64>>()?;
            let sigma_star = (1.0 - epsilon) * sigma + epsilon * g_star;
            let u_star = structure.u_of(x_star)?;
            let u_mu = structure.u_of(&base.mu)?;
            let diff: Vec<f64> = u_star.iter().zip(&u_mu).map(|(a, b)| a - b).collect();
            let pulled = structure.u().jac_solve(&base.mu, &diff)?;
            Some(
                pulled
                    .iter()
                    .map(|c| g_star / sigma_star * c)
                    .collect::<Vec<f64>>(),
            )
        }
    };

    Ok(InfluenceReport {
        epsilon,
        tau,
        outlier: x_star.to_vec(),
        side,
        delta_norm: norm2(&delta_mu),
        delta_mu,
        analytic_delta,
        mu: base.mu,
        mu_contaminated: shifted.mu,
    })
}

/// One divergence configuration of a sweep, by string ids.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepSpecConfig {
    pub gen: String,
    pub weight: String,
    #[serde(default)]
    pub structure: Option<String>,
    pub side: String,
}

/// Outlier magnitudes: either an explicit list or a geometric grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OutlierGrid {
    Explicit(Vec<f64>),
    Geometric {
        start: f64,
        ratio: f64,
        count: usize,
    },
}

impl OutlierGrid {
    pub fn magnitudes(&self) -> Vec<f64> {
        match self {
            OutlierGrid::Explicit(v) => v.clone(),
            OutlierGrid::Geometric {
                start,
                ratio,
                count,
            } => {
                let mut out = Vec::with_capacity(*count);
                let mut x = *start;
                for _ in 0..*count {
                    out.push(x);
                    x *= ratio;
                }
                out
            }
        }
    }
}

/// Sweep configuration, deserializable from the CLI's JSON config.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub base_points: Vec<f64>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub specs: Vec<SweepSpecConfig>,
    pub epsilons: Vec<f64>,
    pub outliers: OutlierGrid,
    #[serde(default)]
    pub tau: Option<f64>,
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub spec: String,
    pub side: Side,
    pub epsilon: f64,
    pub outlier: f64,
    pub delta_norm: f64,
    /// Left side: norm of the first-order analytic influence.
    /// Right side: the weak-robustness budget √λ_v·√2·(1+L)·‖x*−μ‖.
    pub bound: f64,
}

/// Run the sweep: every (spec, ε, magnitude) cell re-solves the minimizer
/// on the contaminated sample. Rows come back ordered by (spec, ε,
/// magnitude); cells are evaluated in parallel.
pub fn robustness_sweep(config: &SweepConfig, cfg: &SolverConfig) -> Result<Vec<SweepRow>> {
    let sample = Sample::new(
        config.base_points.iter().map(|v| vec![*v]).collect(),
        config.weights.clone(),
    )?;
    let tau = config.tau.unwrap_or(DEFAULT_TAU);
    let magnitudes = config.outliers.magnitudes();

    struct Cell {
        spec_id: String,
        structure: GeometricStructure,
        weight: ConformalWeight,
        side: Side,
        epsilon: f64,
        magnitude: f64,
    }

    let mut cells = Vec::new();
    for sc in &config.specs {
        let gen = generator_from_id(&sc.gen)?;
        let structure = structure_from_spec(sc.structure.as_deref(), gen, 1)?;
        let weight = weight_from_id(&sc.weight)?;
        let side: Side = sc.side.parse()?;
        let spec_id = format!(
            "{}|{}|{}",
            sc.gen,
            sc.weight,
            sc.structure.clone().unwrap_or_else(|| "identity".into())
        );
        for &epsilon in &config.epsilons {
            for &magnitude in &magnitudes {
                cells.push(Cell {
                    spec_id: spec_id.clone(),
                    structure: structure.clone(),
                    weight: weight.clone(),
                    side,
                    epsilon,
                    magnitude,
                });
            }
        }
    }

    cells
        .par_iter()
        .map(|cell| {
            let x_star = vec![cell.magnitude];
            let report = influence(
                &cell.structure,
                &cell.weight,
                &sample,
                &x_star,
                cell.epsilon,
                cell.side,
                tau,
                cfg,
            )?;
            let bound = match cell.side {
                Side::Left => report
                    .analytic_delta
                    .as_ref()
                    .map(|d| norm2(d))
                    .unwrap_or(f64::NAN),
                Side::Right => weak_robustness_bound(&cell.structure, &report, &sample)?,
            };
            Ok(SweepRow {
                spec: cell.spec_id.clone(),
                side: cell.side,
                epsilon: cell.epsilon,
                outlier: cell.magnitude,
                delta_norm: report.delta_norm,
                bound,
            })
        })
        .collect()
}

/// The weak-robustness budget √λ_v·√2·(1+L)·‖x*−μ‖ with L measured on the
/// row as |φ(v(x*)) − φ(v(μ))| / ‖v(x*) − v(μ)‖ and λ_v the eigenvalue
/// ratio of J_vᵀJ_v probed over the sample hull and the segment μ → x*.
pub fn weak_robustness_bound(
    structure: &GeometricStructure,
    report: &InfluenceReport,
    sample: &Sample,
) -> Result<f64> {
    let mu = &report.mu;
    let x_star = &report.outlier;
    let v_mu = structure.v_of(mu)?;
    let v_star = structure.v_of(x_star)?;
    let gap = norm2(
        &v_star
            .iter()
            .zip(&v_mu)
            .map(|(a, b)| a - b)
            .collect::<Vec<f64>>(),
    );
    if gap == 0.0 {
        return Ok(f64::NAN);
    }
    let lip = (structure.phi().eval(&v_star)? - structure.phi().eval(&v_mu)?).abs() / gap;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut take = |p: &[f64]| -> Result<()> {
        if structure.contains(p) {
            let (l, h) = structure.v().jtj_eig_bounds(p)?;
            lo = lo.min(l);
            hi = hi.max(h);
        }
        Ok(())
    };
    // sample hull box
    let hull = sample.hull();
    let hull_lo: Vec<f64> = hull.iter().map(|h| h.0).collect();
    let hull_hi: Vec<f64> = hull.iter().map(|h| h.1).collect();
    for p in probe_points(16, &hull_lo, &hull_hi) {
        take(&p)?;
    }
    // segment μ → x*
    for t in probe_points(16, &[0.0], &[1.0]) {
        let p: Vec<f64> = mu
            .iter()
            .zip(x_star)
            .map(|(a, b)| a + t[0] * (b - a))
            .collect();
        take(&p)?;
    }
    if !lo.is_finite() || lo <= 0.0 {
        return Ok(f64::NAN);
    }
    let lambda_v = hi / lo;
    let dist = norm2(
        &x_star
            .iter()
            .zip(mu)
            .map(|(a, b)| a - b)
            .collect::<Vec<f64>>(),
    );
    Ok(lambda_v.sqrt() * 2.0f64.sqrt() * (1.0 + lip) * dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Generator;
    use crate::geometry::identity_structure;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn mean_contamination_is_exact() {
        // constant weight, half-square: the left minimizer is the mean and
        // the influence is exactly x* − x̄
        let st = identity_structure(Generator::HalfSquare, 1).unwrap();
        let w = ConformalWeight::constant(1.0).unwrap();
        let s = Sample::from_scalars(&[0.0, 1.0]).unwrap();
        let r = influence(&st, &w, &s, &[100.0], 0.1, Side::Left, DEFAULT_TAU, &cfg()).unwrap();
        assert!((r.delta_mu[0] - 99.5).abs() < 1e-9, "got {}", r.delta_mu[0]);
        let a = r.analytic_delta.unwrap();
        assert!((a[0] - 99.5).abs() < 1e-9);
    }

    #[test]
    fn total_bregman_left_influence_is_bounded() {
        let st = identity_structure(Generator::HalfSquare, 1).unwrap();
        let w = ConformalWeight::g_bot(1.0).unwrap();
        let s = Sample::from_scalars(&[0.0, 1.0]).unwrap();
        let mut norms = Vec::new();
        for mag in [1e2, 1e4, 1e6] {
            let r = influence(&st, &w, &s, &[mag], 0.1, Side::Left, DEFAULT_TAU, &cfg()).unwrap();
            norms.push(r.delta_norm);
        }
        // g(x*)·u(x*) = x*/sqrt(1+x*²) ≤ 1 keeps the drift flat
        assert!((norms[2] - norms[1]).abs() / norms[1] < 0.01, "{norms:?}");
    }

    #[test]
    fn left_total_bregman_drift_bounded_for_every_generator() {
        // g⊥·‖∇φ‖ ≤ 1 for every generator, so the left drift must be
        // insensitive to doubling the outlier magnitude
        let cases: Vec<(Generator, Vec<f64>, f64)> = vec![
            (Generator::HalfSquare, vec![0.0, 1.0], 1e6),
            (Generator::Square, vec![0.5, 1.5], 1e6),
            (Generator::NegLog, vec![0.5, 2.0], 1e6),
            (Generator::Inverse, vec![0.5, 2.0], 1e6),
            (Generator::XLogX, vec![0.5, 2.0], 1e6),
            (Generator::power(3.0).unwrap(), vec![0.5, 2.0], 1e6),
            (Generator::Exp, vec![0.0, 1.0], 200.0),
            (Generator::XExpX, vec![0.0, 1.0], 100.0),
        ];
        for (gen, pts, mag) in cases {
            let st = identity_structure(gen.clone(), 1).unwrap();
            let w = ConformalWeight::g_bot(1.0).unwrap();
            let s = Sample::from_scalars(&pts).unwrap();
            let d1 = influence(&st, &w, &s, &[mag], 0.1, Side::Left, DEFAULT_TAU, &cfg())
                .unwrap()
                .delta_norm;
            let d2 = influence(
                &st,
                &w,
                &s,
                &[2.0 * mag],
                0.1,
                Side::Left,
                DEFAULT_TAU,
                &cfg(),
            )
            .unwrap()
            .delta_norm;
            assert!(d1.is_finite() && d2.is_finite(), "{gen}: non-finite drift");
            assert!(
                (d2 - d1).abs() / d1 < 0.1,
                "{gen}: drift moved from {d1} to {d2} on doubling"
            );
        }
    }

    #[test]
    fn analytic_matches_empirical_to_first_order() {
        let st = identity_structure(Generator::XLogX, 1).unwrap();
        let w = ConformalWeight::g_bot(1.0).unwrap();
        let s = Sample::from_scalars(&[1.0, 2.0, 3.0]).unwrap();
        let mut prev_gap = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05] {
            let r = influence(&st, &w, &s, &[8.0], eps, Side::Left, DEFAULT_TAU, &cfg()).unwrap();
            let a = r.analytic_delta.as_ref().unwrap();
            let gap = (a[0] - r.delta_mu[0]).abs() / r.delta_mu[0].abs();
            assert!(gap < 5.0 * eps, "eps {eps}: relative gap {gap}");
            assert!(gap < prev_gap + 1e-12, "gap should shrink with eps");
            prev_gap = gap;
        }
    }

    #[test]
    fn epsilon_range_is_enforced() {
        let st = identity_structure(Generator::HalfSquare, 1).unwrap();
        let w = ConformalWeight::constant(1.0).unwrap();
        let s = Sample::from_scalars(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            influence(&st, &w, &s, &[5.0], 0.97, Side::Left, DEFAULT_TAU, &cfg()),
            Err(Error::EpsilonRange { .. })
        ));
    }

    #[test]
    fn sweep_orders_rows_and_shows_dichotomy() {
        let config = SweepConfig {
            base_points: vec![0.0, 1.0],
            weights: None,
            specs: vec![
                SweepSpecConfig {
                    gen: "half_square".into(),
                    weight: "gbot:1".into(),
                    structure: None,
                    side: "left".into(),
                },
                SweepSpecConfig {
                    gen: "half_square".into(),
                    weight: "const:1".into(),
                    structure: None,
                    side: "left".into(),
                },
            ],
            epsilons: vec![0.1],
            outliers: OutlierGrid::Geometric {
                start: 10.0,
                ratio: 10.0,
                count: 6,
            },
            tau: None,
        };
        let rows = robustness_sweep(&config, &cfg()).unwrap();
        assert_eq!(rows.len(), 12);
        // total-Bregman rows plateau; constant rows grow with the outlier
        let tb: Vec<f64> = rows[..6].iter().map(|r| r.delta_norm).collect();
        let ob: Vec<f64> = rows[6..].iter().map(|r| r.delta_norm).collect();
        assert!((tb[5] - tb[4]).abs() / tb[4] < 0.05, "plateau: {tb:?}");
        assert!(ob[5] / ob[4] > 5.0, "linear growth: {ob:?}");
    }

    #[test]
    fn right_side_weak_robustness_bound_holds() {
        let config = SweepConfig {
            base_points: vec![0.4, 0.8, 1.2],
            weights: None,
            specs: vec![SweepSpecConfig {
                gen: "half_square".into(),
                weight: "gbot:1".into(),
                structure: None,
                side: "right".into(),
            }],
            epsilons: vec![0.1, 0.2],
            outliers: OutlierGrid::Explicit(vec![3.0, 10.0, 30.0]),
            tau: None,
        };
        let rows = robustness_sweep(&config, &cfg()).unwrap();
        for row in rows {
            assert!(
                row.delta_norm <= row.bound,
                "row {row:?} violates the weak bound"
            );
        }
    }
}
