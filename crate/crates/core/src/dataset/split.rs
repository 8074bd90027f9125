//! Seeded holdback splits, k-fold partitions and time-series windows.

use super::DataPair;
use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

/// One train/validation partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Fold<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
}

fn ordered<T: Clone>(items: &[T], shuffle: bool, seed: u64) -> Vec<T> {
    let mut seq = items.to_vec();
    if shuffle {
        DeterministicRng::new(seed).shuffle(&mut seq);
    }
    seq
}

/// Number of items a ratio selects out of `n`, floored.
pub fn holdback_count(ratio: f64, n: usize) -> usize {
    // The epsilon absorbs representation error such as 0.3 * 150 = 44.999...
    ((ratio * n as f64) + 1e-9).floor() as usize
}

/// Holds back `floor(ratio * N)` items for validation, taken from the tail of
/// the (optionally shuffled) sequence.
pub fn split_holdback<T: Clone>(
    items: &[T],
    ratio: f64,
    shuffle: bool,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::InvalidArgument(format!(
            "holdback ratio must lie in [0, 1), got {ratio}"
        )));
    }
    let mut seq = ordered(items, shuffle, seed);
    let held = holdback_count(ratio, seq.len()).min(seq.len());
    let validation = seq.split_off(seq.len() - held);
    Ok((seq, validation))
}

/// Contiguous folds over the (optionally shuffled) sequence. Fold sizes differ
/// by at most one, larger folds first; split `i` validates on fold `i`.
pub fn kfold<T: Clone>(items: &[T], k: usize, shuffle: bool, seed: u64) -> Result<Vec<Fold<T>>> {
    let n = items.len();
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k-fold needs 2 <= k <= N, got k = {k} with N = {n}"
        )));
    }
    let seq = ordered(items, shuffle, seed);
    let (base, extra) = (n / k, n % k);
    let mut bounds = Vec::with_capacity(k + 1);
    bounds.push(0);
    for i in 0..k {
        let size = base + usize::from(i < extra);
        bounds.push(bounds[i] + size);
    }
    Ok((0..k)
        .map(|i| {
            let (start, end) = (bounds[i], bounds[i + 1]);
            let mut train = Vec::with_capacity(n - (end - start));
            train.extend_from_slice(&seq[..start]);
            train.extend_from_slice(&seq[end..]);
            Fold {
                train,
                validation: seq[start..end].to_vec(),
            }
        })
        .collect())
}

/// Sliding windows over a sequence of observation vectors. Pair `t` has the
/// flattened observations `t..t+input_window` as input and the following
/// `predict_window` observations as ideal.
pub fn window_time_series(
    series: &[Vec<f64>],
    input_window: usize,
    predict_window: usize,
) -> Result<Vec<DataPair>> {
    let n = series.len();
    if input_window == 0 || predict_window == 0 || input_window + predict_window > n {
        return Err(Error::InvalidArgument(format!(
            "windows {input_window}+{predict_window} do not fit a series of length {n}"
        )));
    }
    let flatten = |range: std::ops::Range<usize>| -> Vec<f64> {
        series[range].iter().flatten().copied().collect()
    };
    Ok((0..=n - input_window - predict_window)
        .map(|t| DataPair {
            input: flatten(t..t + input_window),
            ideal: flatten(t + input_window..t + input_window + predict_window),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holdback_counts() {
        let items: Vec<usize> = (0..150).collect();
        let (train, val) = split_holdback(&items, 0.3, true, 1001).unwrap();
        assert_eq!((train.len(), val.len()), (105, 45));
        let (train2, val2) = split_holdback(&items, 0.3, true, 1001).unwrap();
        assert_eq!((train, val), (train2, val2));

        let (train, val) = split_holdback(&items, 0.0, true, 1).unwrap();
        assert!(val.is_empty());
        assert_eq!(train.len(), 150);
        assert!(split_holdback(&items, 1.0, true, 1).is_err());
        assert!(split_holdback(&items, -0.1, true, 1).is_err());
    }

    #[test]
    fn unshuffled_holdback_takes_tail() {
        let items: Vec<usize> = (0..10).collect();
        let (train, val) = split_holdback(&items, 0.3, false, 0).unwrap();
        assert_eq!(val, vec![7, 8, 9]);
        assert_eq!(train, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_sizes() {
        let items: Vec<usize> = (0..150).collect();
        let folds = kfold(&items, 5, true, 3).unwrap();
        assert!(folds
            .iter()
            .all(|f| f.validation.len() == 30 && f.train.len() == 120));

        let seven: Vec<usize> = (0..7).collect();
        let sizes: Vec<usize> = kfold(&seven, 3, false, 0)
            .unwrap()
            .iter()
            .map(|f| f.validation.len())
            .collect();
        assert_eq!(sizes, vec![3, 2, 2]);
        assert!(kfold(&items, 200, false, 0).is_err());
        assert!(kfold(&items, 1, false, 0).is_err());
    }

    #[test]
    fn windows() {
        let series: Vec<Vec<f64>> = (1..=5).map(|v| vec![v as f64]).collect();
        let pairs = window_time_series(&series, 3, 1).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].input, vec![1.0, 2.0, 3.0]);
        assert_eq!(pairs[0].ideal, vec![4.0]);
        assert_eq!(pairs[1].input, vec![2.0, 3.0, 4.0]);
        assert_eq!(pairs[1].ideal, vec![5.0]);
        assert_eq!(window_time_series(&series, 4, 1).unwrap().len(), 1);
        assert!(window_time_series(&series, 5, 1).is_err());
        assert!(window_time_series(&series, 0, 1).is_err());
    }

    #[test]
    fn multivariate_windows_flatten() {
        let series = vec![vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 30.0]];
        let pairs = window_time_series(&series, 2, 1).unwrap();
        assert_eq!(pairs[0].input, vec![1.0, 10.0, 2.0, 20.0]);
        assert_eq!(pairs[0].ideal, vec![3.0, 30.0]);
    }
}
