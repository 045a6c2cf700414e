//! Lloyd-style k-means over any divergence spec, with left or right
//! population minimizers as the centroid step.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conformal::{conformal_div, DivergenceSpec};
use crate::error::{Error, Result};
use crate::minimizers::{left_minimizer, right_minimizer_auto, Side, SolverConfig};
use crate::sample::Sample;

/// A fitted clustering.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterModel {
    pub centers: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub side: Side,
    pub objective: f64,
    /// Objective after each Lloyd iteration; non-increasing for the left
    /// side, whose centroid step is exact.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

fn distance(spec: &DivergenceSpec, side: Side, point: &[f64], center: &[f64]) -> Result<f64> {
    match side {
        Side::Left => conformal_div(spec, center, point),
        Side::Right => conformal_div(spec, point, center),
    }
}

/// Sum of divergences between points and their assigned centers, in the
/// side's orientation. Sample weights scale each term by n·wᵢ so the
/// uniform case is the plain sum.
pub fn objective(
    centers: &[Vec<f64>],
    assignment: &[usize],
    data: &Sample,
    spec: &DivergenceSpec,
    side: Side,
) -> Result<f64> {
    if assignment.len() != data.len() {
        return Err(Error::InvalidInput(format!(
            "{} assignments for {} points",
            assignment.len(),
            data.len()
        )));
    }
    let n = data.len() as f64;
    let mut total = 0.0;
    for ((p, w), &a) in data.points().iter().zip(data.weights()).zip(assignment) {
        if a >= centers.len() {
            return Err(Error::InvalidInput(format!("assignment {a} out of range")));
        }
        total += n * w * distance(spec, side, p, &centers[a])?;
    }
    Ok(total)
}

fn assign(
    centers: &[Vec<f64>],
    data: &Sample,
    spec: &DivergenceSpec,
    side: Side,
) -> Result<Vec<usize>> {
    data.points()
        .par_iter()
        .map(|p| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (i, c) in centers.iter().enumerate() {
                let d = distance(spec, side, p, c)?;
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            Ok(best)
        })
        .collect()
}

fn cluster_sample(data: &Sample, assignment: &[usize], cluster: usize) -> Option<Sample> {
    let mut pts = Vec::new();
    let mut ws = Vec::new();
    for ((p, w), &a) in data.points().iter().zip(data.weights()).zip(assignment) {
        if a == cluster {
            pts.push(p.clone());
            ws.push(*w);
        }
    }
    if pts.is_empty() {
        return None;
    }
    let total: f64 = ws.iter().sum();
    for w in ws.iter_mut() {
        *w /= total;
    }
    // renormalized weights sum to 1 by construction
    Sample::new(pts, Some(ws)).ok()
}

fn update_center(
    data: &Sample,
    spec: &DivergenceSpec,
    side: Side,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    match side {
        Side::Left => Ok(left_minimizer(spec.structure(), spec.weight(), data, cfg)?.mu),
        Side::Right => Ok(right_minimizer_auto(spec.structure(), spec.weight(), data, cfg)?.mu),
    }
}

/// Divergence-proportional seeding: the first center is weight-sampled,
/// later centers proportionally to the divergence to the nearest chosen
/// center, in the configured orientation.
fn seed_centers(
    data: &Sample,
    k: usize,
    spec: &DivergenceSpec,
    side: Side,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let first = WeightedIndex::new(data.weights())
        .map_err(|e| Error::InvalidInput(format!("bad weights: {e}")))?
        .sample(rng);
    let mut centers = vec![data.point(first).to_vec()];
    while centers.len() < k {
        let mut scores = Vec::with_capacity(data.len());
        for p in data.points() {
            let mut nearest = f64::INFINITY;
            for c in &centers {
                nearest = nearest.min(distance(spec, side, p, c)?);
            }
            scores.push(nearest.max(0.0));
        }
        let total: f64 = scores.iter().sum();
        let idx = if total > 0.0 {
            WeightedIndex::new(&scores)
                .map_err(|e| Error::InvalidInput(format!("bad seeding scores: {e}")))?
                .sample(rng)
        } else {
            // all points coincide with a center; any index works
            centers.len() % data.len()
        };
        centers.push(data.point(idx).to_vec());
    }
    Ok(centers)
}

/// Lloyd iteration: assign to the nearest center under the divergence,
/// update each center with the configured population minimizer, stop when
/// the assignment is stable or the iteration budget runs out. An emptied
/// cluster steals the globally worst-fit point.
pub fn fit(
    data: &Sample,
    k: usize,
    spec: &DivergenceSpec,
    side: Side,
    seed: u64,
    max_iter: usize,
    cfg: &SolverConfig,
) -> Result<ClusterModel> {
    if k == 0 || k > data.len() {
        return Err(Error::Precondition(format!(
            "k = {k} must be in 1..={}",
            data.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(data, k, spec, side, &mut rng)?;
    let mut assignment = assign(&centers, data, spec, side)?;
    let mut history = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        // centroid step
        for cluster in 0..k {
            match cluster_sample(data, &assignment, cluster) {
                Some(sub) => {
                    centers[cluster] = update_center(&sub, spec, side, cfg)?;
                }
                None => {
                    // steal the globally worst-fit point
                    let mut worst = 0usize;
                    let mut worst_d = -1.0;
                    for (i, p) in data.points().iter().enumerate() {
                        let d = distance(spec, side, p, &centers[assignment[i]])?;
                        if d > worst_d {
                            worst_d = d;
                            worst = i;
                        }
                    }
                    centers[cluster] = data.point(worst).to_vec();
                    assignment[worst] = cluster;
                }
            }
        }
        let next = assign(&centers, data, spec, side)?;
        history.push(objective(&centers, &next, data, spec, side)?);
        let stable = next == assignment;
        assignment = next;
        if stable {
            break;
        }
    }

    let objective = *history.last().expect("at least one iteration ran");
    Ok(ClusterModel {
        centers,
        assignment,
        side,
        objective,
        objective_history: history,
        iterations,
        seed,
    })
}
