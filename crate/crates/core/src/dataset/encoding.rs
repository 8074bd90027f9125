//! Categorical codes: one-of-n vectors and equilateral simplex vertices.

use crate::error::{Error, Result};

pub fn encode_one_of_n(class_index: usize, n: usize, off: f64, on: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "one-of-n needs at least 2 classes, got {n}"
        )));
    }
    if class_index >= n {
        return Err(Error::InvalidArgument(format!(
            "class index {class_index} out of range for {n} classes"
        )));
    }
    let mut code = vec![off; n];
    code[class_index] = on;
    Ok(code)
}

/// Index of the largest entry, smallest index on ties.
pub fn decode_one_of_n(v: &[f64]) -> Result<usize> {
    if v.is_empty() {
        return Err(Error::Empty("one-of-n code".into()));
    }
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Regular-simplex codes for `n` classes, one row of `n - 1` entries per class.
///
/// Rows are unit vectors and all pairwise distances are equal. Built
/// incrementally: each new class adds a dimension, the existing block is
/// scaled by `sqrt(k^2 - 1) / k`, the new column is `-1/k` for the old rows
/// and `1` for the new row.
pub fn equilateral_matrix(n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "equilateral encoding needs at least 2 classes, got {n}"
        )));
    }
    let width = n - 1;
    let mut m = vec![vec![0.0; width]; n];
    m[0][0] = -1.0;
    m[1][0] = 1.0;
    for k in 2..n {
        let kf = k as f64;
        let scale = (kf * kf - 1.0).sqrt() / kf;
        for row in m.iter_mut().take(k) {
            for x in row.iter_mut().take(k - 1) {
                *x *= scale;
            }
            row[k - 1] = -1.0 / kf;
        }
        m[k][k - 1] = 1.0;
    }
    Ok(m)
}

/// Nearest simplex vertex to `v`; ties (within 1e-12) go to the smallest index.
pub fn equilateral_decode(v: &[f64], n: usize) -> Result<usize> {
    let matrix = equilateral_matrix(n)?;
    nearest_row(&matrix, v)
}

pub(crate) fn nearest_row(matrix: &[Vec<f64>], v: &[f64]) -> Result<usize> {
    let width = matrix.first().map_or(0, Vec::len);
    if v.len() != width {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: v.len(),
        });
    }
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, row) in matrix.iter().enumerate() {
        let d: f64 = row.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        // Distances within rounding noise of each other count as a tie.
        if d < best_dist - 1e-12 {
            best_dist = d;
            best = i;
        }
    }
    Ok(best)
}
