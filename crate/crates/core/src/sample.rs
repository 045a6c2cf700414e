//! Finite weighted point sets and their augmented statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite weighted sample in ℝ^d. Weights are strictly positive and sum
/// to one; omitted weights default to uniform 1/n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Serde schema for sample files: `{"points": [[...], ...], "weights": [...]}`.
/// 1D samples may be written as a flat list of reals.
#[derive(Debug, Deserialize)]
pub struct SampleFile {
    pub points: PointList,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PointList {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl Sample {
    pub fn new(points: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::DegenerateSample("sample has no points".into()));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(Error::DegenerateSample("zero-dimensional points".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::InvalidInput(format!(
                    "point {i} has dimension {} but point 0 has {d}",
                    p.len()
                )));
            }
            if let Some(c) = p.iter().find(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite coordinate {c}")));
            }
        }
        let n = points.len();
        let weights = match weights {
            None => vec![1.0 / n as f64; n],
            Some(w) => {
                if w.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "{} weights for {n} points",
                        w.len()
                    )));
                }
                if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                    return Err(Error::NonpositiveWeight(*bad));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "weights sum to {sum}, expected 1 within 1e-12"
                    )));
                }
                w
            }
        };
        Ok(Sample { points, weights })
    }

    /// Uniformly weighted sample from 1D values.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Sample::new(values.iter().map(|v| vec![*v]).collect(), None)
    }

    pub fn from_file(file: SampleFile) -> Result<Self> {
        let points = match file.points {
            PointList::Nested(p) => p,
            PointList::Flat(v) => v.into_iter().map(|x| vec![x]).collect(),
        };
        Sample::new(points, file.weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Weighted mean of the raw points.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (p, w) in self.points.iter().zip(&self.weights) {
            for (mj, pj) in m.iter_mut().zip(p) {
                *mj += w * pj;
            }
        }
        m
    }

    /// Weighted mean of `f` over the sample.
    pub fn mean_of<T, F: FnMut(&[f64]) -> Result<T>>(&self, mut f: F) -> Result<f64>
    where
        T: Into<f64>,
    {
        let mut acc = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            acc += w * f(p)?.into();
        }
        Ok(acc)
    }

    /// Coordinate-wise hull [min, max] of the sample.
    pub fn hull(&self) -> Vec<(f64, f64)> {
        let mut hull = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim()];
        for p in &self.points {
            for (h, c) in hull.iter_mut().zip(p) {
                h.0 = h.0.min(*c);
                h.1 = h.1.max(*c);
            }
        }
        hull
    }

    /// True when all points coincide within `tol`.
    pub fn is_degenerate(&self, tol: f64) -> bool {
        self.hull().iter().all(|(lo, hi)| hi - lo <= tol)
    }

    /// The sample reweighted by contamination: existing weights scaled by
    /// (1 - epsilon) and the outlier appended with weight epsilon.
    pub fn contaminate(&self, outlier: &[f64], epsilon: f64) -> Result<Sample> {
        if outlier.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "outlier dimension {} does not match sample dimension {}",
                outlier.len(),
                self.dim()
            )));
        }
        let mut points = self.points.clone();
        points.push(outlier.to_vec());
        let mut weights: Vec<f64> = self.weights.iter().map(|w| w * (1.0 - epsilon)).collect();
        weights.push(epsilon);
        Ok(Sample { points, weights })
    }
}
