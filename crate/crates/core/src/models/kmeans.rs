//! k-means clustering (k-means++ seeding, Lloyd iterations).

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_len, nearest, RegressionModel};
use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

/// `k` centroids stored row-major. `compute` returns the nearest centroid,
/// so the model's regression error is its quantization error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    dimension: usize,
    centroids: Vec<f64>,
}

impl KMeansModel {
    pub fn new(centroids: Vec<Vec<f64>>) -> Result<Self> {
        let dimension = centroids
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("k-means needs k >= 1".into()))?;
        for c in &centroids {
            check_len(dimension, c.len())?;
        }
        let flat: Vec<f64> = centroids.into_iter().flatten().collect();
        if flat.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("NaN centroid".into()));
        }
        Ok(Self {
            dimension,
            centroids: flat,
        })
    }

    pub fn k(&self) -> usize {
        self.centroids.len() / self.dimension.max(1)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn centroid(&self, i: usize) -> &[f64] {
        &self.centroids[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Index of the nearest centroid; ties go to the smallest index.
    pub fn assign(&self, input: &[f64]) -> Result<usize> {
        check_len(self.dimension, input.len())?;
        Ok(nearest(self.centroids.chunks(self.dimension), input).0)
    }

    /// Sum of squared distances from each point to its nearest centroid.
    pub fn inertia(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut total = 0.0;
        for p in points {
            check_len(self.dimension, p.len())?;
            total += nearest(self.centroids.chunks(self.dimension), p).1;
        }
        Ok(total)
    }
}

impl RegressionModel for KMeansModel {
    fn input_count(&self) -> usize {
        self.dimension
    }

    fn output_count(&self) -> usize {
        self.dimension
    }

    fn compute(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.centroid(self.assign(input)?).to_vec())
    }

    fn parameters(&self) -> Vec<f64> {
        self.centroids.clone()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        check_len(self.centroids.len(), params.len())?;
        self.centroids.copy_from_slice(params);
        Ok(())
    }
}

impl fmt::Display for KMeansModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kmeans k={} dimension={}", self.k(), self.dimension)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub model: KMeansModel,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

/// k-means++ seeding followed by Lloyd iterations until assignments stop
/// changing or `max_iter` is reached. An emptied cluster keeps its centroid.
pub fn kmeans_fit(
    points: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    rng: &mut DeterministicRng,
) -> Result<KMeansFit> {
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {k}",
            points.len()
        )));
    }
    let d = points[0].len();
    for p in points {
        check_len(d, p.len())?;
    }

    let mut centroids = vec![points[rng.index(points.len())].clone()];
    let mut dist2: Vec<f64> = points
        .iter()
        .map(|p| super::squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist2.iter().sum();
        let chosen = if total > 0.0 {
            let target = rng.next_double() * total;
            let mut acc = 0.0;
            let mut pick = points.len() - 1;
            for (i, w) in dist2.iter().enumerate() {
                acc += w;
                if acc > target && *w > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.index(points.len())
        };
        centroids.push(points[chosen].clone());
        let c = centroids.last().expect("just pushed");
        for (p, d2) in points.iter().zip(dist2.iter_mut()) {
            *d2 = d2.min(super::squared_distance(p, c));
        }
    }

    let mut model = KMeansModel::new(centroids)?;
    let mut assignments = vec![usize::MAX; points.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter.max(1) {
        iterations += 1;
        let mut changed = false;
        let mut inertia = 0.0;
        for (p, a) in points.iter().zip(assignments.iter_mut()) {
            let (idx, d2) = nearest(model.centroids.chunks(d), p);
            inertia += d2;
            if *a != idx {
                *a = idx;
                changed = true;
            }
        }
        history.push(inertia);
        if !changed {
            break;
        }
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a * d..(a + 1) * d].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    model.centroids[c * d + j] = sums[c * d + j] / counts[c] as f64;
                }
            }
        }
    }
    Ok(KMeansFit {
        model,
        inertia_history: history,
        assignments,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_and_ties() {
        let m = KMeansModel::new(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![5.0, 5.0]]).unwrap();
        assert_eq!(m.assign(&[5.0, 5.0]).unwrap(), 2);
        assert_eq!(m.assign(&[1.0, 0.0]).unwrap(), 0);
        assert_eq!(m.compute(&[4.0, 4.0]).unwrap(), vec![5.0, 5.0]);
        assert!(m.assign(&[1.0]).is_err());
    }

    #[test]
    fn assignment_matches_exhaustive_scan() {
        let mut rng = DeterministicRng::new(4);
        let centroids: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .collect();
        let m = KMeansModel::new(centroids.clone()).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let mut best = (0, f64::INFINITY);
            for (i, c) in centroids.iter().enumerate() {
                let d: f64 = c.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum();
                if d < best.1 {
                    best = (i, d);
                }
            }
            assert_eq!(m.assign(&x).unwrap(), best.0);
        }
    }

    #[test]
    fn lloyd_separates_two_groups() {
        let points = vec![
            vec![0.0],
            vec![0.1],
            vec![0.2],
            vec![10.0],
            vec![10.1],
            vec![10.2],
        ];
        let fit = kmeans_fit(&points, 2, 50, &mut DeterministicRng::new(1)).unwrap();
        assert_eq!(fit.assignments[0], fit.assignments[2]);
        assert_ne!(fit.assignments[0], fit.assignments[3]);
        assert!(fit.inertia_history.windows(2).all(|w| w[1] <= w[0]));
        assert!((fit.model.inertia(&points).unwrap() - 0.04).abs() < 1e-12);
    }

    #[test]
    fn invalid_k() {
        let pts = vec![vec![0.0]];
        assert!(kmeans_fit(&pts, 0, 10, &mut DeterministicRng::new(0)).is_err());
        assert!(kmeans_fit(&pts, 2, 10, &mut DeterministicRng::new(0)).is_err());
    }
}
