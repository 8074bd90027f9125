//! Dense symmetric solves for the normal equations.

use crate::error::{Error, Result};

/// Ridge term added to the Gram diagonal when it is numerically singular.
pub const RIDGE_FALLBACK: f64 = 1e-8;

/// Cholesky solve of `a x = b` for a row-major symmetric `n x n` matrix.
/// Returns `None` when a pivot is not clearly positive.
pub fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > tol) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Solves the normal equations, retrying with a small ridge term if the Gram
/// matrix is singular.
pub fn solve_normal_equations(gram: &[f64], rhs: &[f64], n: usize) -> Result<Vec<f64>> {
    if let Some(x) = cholesky_solve(gram, rhs, n) {
        return Ok(x);
    }
    let mut ridged = gram.to_vec();
    for i in 0..n {
        ridged[i * n + i] += RIDGE_FALLBACK;
    }
    cholesky_solve(&ridged, rhs, n)
        .ok_or_else(|| Error::InvalidArgument("normal equations are not solvable".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, &[2.0, 1.0], 2).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-14);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_needs_ridge() {
        let a = [1.0, 1.0, 1.0, 1.0];
        assert!(cholesky_solve(&a, &[1.0, 1.0], 2).is_none());
        let x = solve_normal_equations(&a, &[1.0, 1.0], 2).unwrap();
        assert!(x.iter().all(|v| v.is_finite()));
    }
}
