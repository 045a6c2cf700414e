//! Property tests for the crate-wide invariants: nonnegativity and
//! identity of indiscernibles, gradient/inverse-gradient round trips,
//! the Lambert W defining identity, the scaled-divergence reduction and
//! the rotated-graph identity of the total Bregman weight.

use proptest::prelude::*;

use confdiv_core::{
    bregman, conformal_div, duality_gap, lambert_w, left_minimizer, scaled_conformal_div,
    ConformalWeight, DivergenceSpec, Generator, Sample, SolverConfig,
};

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
    ]
}

/// Strategy for an in-domain scalar of a generator.
fn in_domain(gen: &Generator) -> BoxedStrategy<f64> {
    let (lo, hi) = gen.domain1().probe_box(3.0);
    (lo..hi).boxed()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambert_w_defining_identity(x in -0.3678f64..50.0) {
        let w = lambert_w(x).unwrap();
        prop_assert!((w * w.exp() - x).abs() < 1e-12 * (1.0 + x.abs()));
    }
}

#[test]
fn bregman_nonnegative_and_zero_only_on_diagonal() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for gen in catalog() {
        let strat = (in_domain(&gen), in_domain(&gen));
        runner
            .run(&strat, |(x, y)| {
                let d = bregman(&gen, &[x], &[y]).unwrap();
                if (x - y).abs() > 1e-7 {
                    prop_assert!(d > 0.0, "{gen}: D({x}:{y}) = {d}");
                } else {
                    prop_assert!(d >= -1e-15, "{gen}: D({x}:{y}) = {d}");
                }
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn inv_grad_round_trips() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for gen in catalog() {
        runner
            .run(&in_domain(&gen), |x| {
                let y = gen.grad1(x).unwrap();
                let back = gen.inv_grad1(y).unwrap();
                prop_assert!((back - x).abs() < 1e-10 * (1.0 + x.abs()));
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn conformal_nonnegative_across_weights() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let weights = [
        ConformalWeight::constant(1.3).unwrap(),
        ConformalWeight::g_bot(1.0).unwrap(),
        ConformalWeight::g_p(1.0, 4.0 / 3.0).unwrap(),
        ConformalWeight::composed_u(2.0).unwrap(),
    ];
    for gen in [Generator::NegLog, Generator::XLogX, Generator::Exp] {
        for w in &weights {
            let spec = DivergenceSpec::new(gen.clone(), w.clone(), 1).unwrap();
            let strat = (in_domain(&gen), in_domain(&gen));
            runner
                .run(&strat, |(x, y)| {
                    let d = conformal_div(&spec, &[x], &[y]).unwrap();
                    prop_assert!(d >= 0.0);
                    if (x - y).abs() > 1e-7 {
                        prop_assert!(d > 0.0);
                    }
                    Ok(())
                })
                .unwrap();
        }
    }
}

#[test]
fn scaled_divergence_definition() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let spec =
        DivergenceSpec::new(Generator::NegLog, ConformalWeight::g_bot(1.0).unwrap(), 1).unwrap();
    let strat = (0.2f64..4.0, 0.2f64..4.0, 0.5f64..3.0);
    runner
        .run(&strat, |(x, y, w)| {
            // w = 1 reduces bit-for-bit
            let direct = conformal_div(&spec, &[x], &[y]).unwrap();
            prop_assert_eq!(
                scaled_conformal_div(&spec, &[x], &[y], 1.0).unwrap(),
                direct
            );
            // definition at general w
            let scaled = scaled_conformal_div(&spec, &[x], &[y], w).unwrap();
            let oracle = w * conformal_div(&spec, &[x / w], &[y / w]).unwrap();
            prop_assert!((scaled - oracle).abs() < 1e-14 * (1.0 + oracle.abs()));
            Ok(())
        })
        .unwrap();
}

#[test]
fn left_duality_via_convex_conjugates() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for gen in [
        Generator::NegLog,
        Generator::Exp,
        Generator::XLogX,
        Generator::Square,
    ] {
        let spec =
            DivergenceSpec::new(gen.clone(), ConformalWeight::g_bot(1.0).unwrap(), 1).unwrap();
        let strat = (in_domain(&gen), in_domain(&gen));
        runner
            .run(&strat, |(x, y)| {
                let gap = duality_gap(&spec, &[x], &[y]).unwrap();
                prop_assert!(gap < 1e-8, "{}: duality gap {gap} at ({x}, {y})", spec);
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn left_minimizer_in_the_v_hull() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let cfg = SolverConfig::default();
    for gen in [Generator::NegLog, Generator::XLogX, Generator::Exp] {
        let spec =
            DivergenceSpec::new(gen.clone(), ConformalWeight::g_bot(1.0).unwrap(), 1).unwrap();
        let strat = proptest::collection::vec(in_domain(&gen), 2..7);
        runner
            .run(&strat, |pts| {
                let sample = Sample::from_scalars(&pts).unwrap();
                let r = left_minimizer(spec.structure(), spec.weight(), &sample, &cfg).unwrap();
                let lo = pts.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = pts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(r.mu[0] >= lo - 1e-10 && r.mu[0] <= hi + 1e-10);
                Ok(())
            })
            .unwrap();
    }
}

/// Rotating the graph of the quadratic generator and re-reading the rotated
/// curve as a Bregman divergence reproduces the total square loss: with the
/// canonical angle tanθ = −φ′(μ), D_rot(s_x : s_μ) = D_{φ,g⊥}(x:μ).
#[test]
fn rotated_graph_reconstructs_the_total_bregman_value() {
    let a = 0.5;
    let gen = Generator::HalfSquare;
    let spec = DivergenceSpec::new(gen.clone(), ConformalWeight::g_bot(1.0).unwrap(), 1).unwrap();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strat = (0.3f64..1.2, 0.3f64..1.2);
    runner
        .run(&strat, |(x, mu)| {
            let dphi = gen.grad1(mu).unwrap();
            let theta = -dphi.atan();
            let rot = Generator::rotated_quadratic(a, theta).unwrap();
            let (s, c) = theta.sin_cos();
            let abscissa = |t: f64| {
                let lift = gen.eval1(t).unwrap();
                c * t - s * lift
            };
            let d_rot = bregman(&rot, &[abscissa(x)], &[abscissa(mu)]).unwrap();
            let total = conformal_div(&spec, &[x], &[mu]).unwrap();
            prop_assert!(
                (d_rot - total).abs() < 1e-6 * (1.0 + total.abs()),
                "rotated {d_rot} vs total {total} at (x={x}, mu={mu})"
            );
            // general-angle identity: D_rot·(cosθ − φ′(μ)sinθ) = D_φ(x:μ)
            let theta2 = 0.25;
            let rot2 = Generator::rotated_quadratic(a, theta2).unwrap();
            let (s2, c2) = theta2.sin_cos();
            let ab2 = |t: f64| c2 * t - s2 * gen.eval1(t).unwrap();
            let lhs = bregman(&rot2, &[ab2(x)], &[ab2(mu)]).unwrap() * (c2 - dphi * s2);
            let plain = bregman(&gen, &[x], &[mu]).unwrap();
            prop_assert!(
                (lhs - plain).abs() < 1e-6 * (1.0 + plain.abs()),
                "general-angle identity {lhs} vs {plain}"
            );
            Ok(())
        })
        .unwrap();
}
