//! k-nearest neighbours over stored pairs (Euclidean metric).

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_len, squared_distance, RegressionModel};
use crate::dataset::DataPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnnTask {
    /// `ideal[0]` holds a class index; output is the majority class.
    Classify,
    /// Output is the mean of the neighbours' ideals.
    Regress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pairs: Vec<DataPair>,
    k: usize,
    task: KnnTask,
}

impl KnnModel {
    pub fn new(pairs: Vec<DataPair>, k: usize, task: KnnTask) -> Result<Self> {
        let first = pairs
            .first()
            .ok_or_else(|| Error::Empty("k-NN needs stored pairs".into()))?;
        if k == 0 || k > pairs.len() {
            return Err(Error::InvalidArgument(format!(
                "k must lie in 1..={}, got {k}",
                pairs.len()
            )));
        }
        let (d, m) = (first.input.len(), first.ideal.len());
        for p in &pairs {
            check_len(d, p.input.len())?;
            check_len(m, p.ideal.len())?;
        }
        if task == KnnTask::Classify && m != 1 {
            return Err(Error::InvalidArgument(
                "k-NN classification expects a single class-index target".into(),
            ));
        }
        Ok(Self { pairs, k, task })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn task(&self) -> KnnTask {
        self.task
    }

    pub fn pairs(&self) -> &[DataPair] {
        &self.pairs
    }

    /// Indices of the `k` nearest stored pairs; equal distances keep the
    /// smaller stored index first.
    pub fn neighbours(&self, input: &[f64]) -> Result<Vec<usize>> {
        check_len(self.input_count(), input.len())?;
        let mut dists: Vec<(f64, usize)> = self
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| (squared_distance(&p.input, input), i))
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(dists.into_iter().take(self.k).map(|(_, i)| i).collect())
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        let nn = self.neighbours(input)?;
        match self.task {
            KnnTask::Classify => {
                let labels: Vec<usize> = nn
                    .iter()
                    .map(|&i| self.pairs[i].ideal[0].round().max(0.0) as usize)
                    .collect();
                let classes = labels.iter().max().map_or(0, |m| m + 1);
                let mut votes = vec![0usize; classes];
                for &l in &labels {
                    votes[l] += 1;
                }
                let mut best = 0;
                for (c, &v) in votes.iter().enumerate() {
                    if v > votes[best] {
                        best = c;
                    }
                }
                Ok(vec![best as f64])
            }
            KnnTask::Regress => {
                let m = self.output_count();
                let mut mean = vec![0.0; m];
                for &i in &nn {
                    for (acc, v) in mean.iter_mut().zip(&self.pairs[i].ideal) {
                        *acc += v;
                    }
                }
                for v in &mut mean {
                    *v /= nn.len() as f64;
                }
                Ok(mean)
            }
        }
    }
}

impl RegressionModel for KnnModel {
    fn input_count(&self) -> usize {
        self.pairs[0].input.len()
    }

    fn output_count(&self) -> usize {
        self.pairs[0].ideal.len()
    }

    fn compute(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.predict(input)
    }

    /// Lazy model: nothing to optimize.
    fn parameters(&self) -> Vec<f64> {
        Vec::new()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        check_len(0, params.len())
    }
}

impl fmt::Display for KnnModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "knn k={} ({:?}) over {} stored pairs",
            self.k,
            self.task,
            self.pairs.len()
        )
    }
}
