//! Conformal divergences and their population minimizers.
//!
//! A conformal divergence scales a Bregman divergence by a positive weight
//! of the right argument, D_{φ,g}(x:y) = g(y)·D_φ(x:y); the total Bregman
//! divergences (g = 1/√(1+‖∇φ‖²)) are the best-known members. This crate
//! evaluates the whole family in general (u, v) coordinate structures,
//! locates left and right population minimizers with certified residuals,
//! measures robustness to outliers, and clusters with either minimizer as
//! the centroid step.
//!
//! The `confdiv` binary in the companion CLI crate exposes the same
//! operations for batch use.

pub mod clustering;
pub mod conformal;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod minimizers;
pub mod numerics;
pub mod robustness;
pub mod sample;

pub use conformal::{
    bregman, conformal_div, duality_gap, qnorm_order, scaled_conformal_div, symmetry_defect,
    weight_from_id, ConformalWeight, DivergenceSpec, WeightKind,
};
pub use error::{Error, Result};
pub use generators::{
    generator_from_id, lambert_w, phi_mean, phi_mean_with_branch, AugmentedPoint, Branch,
    Generator, QuadraticForm,
};
pub use geometry::{
    alpha_beta_divergence, alpha_beta_potentials, compose_structures, identity_structure,
    make_structure, mapping_from_id, AlphaBetaStructure, GeometricStructure, Mapping,
};
pub use minimizers::{
    left_minimizer, mahalanobis_check, orthogonality_residual, right_minimizer_1d,
    right_minimizer_nd, scaled_left_minimizer, MinimizerResult, Side, SolverConfig,
};
pub use robustness::{influence, robustness_sweep, InfluenceReport, SweepConfig, SweepRow};
pub use sample::Sample;

pub use clustering::{fit, objective, ClusterModel};
