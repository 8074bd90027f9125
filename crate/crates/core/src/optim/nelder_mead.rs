//! Nelder-Mead downhill simplex.

use super::{check_dimension, sanitize, Objective, OptimizeResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once worst minus best score drops below this.
    pub epsilon: f64,
    pub initial_step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            epsilon: 1e-10,
            initial_step: 0.1,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.reflection > 0.0
            && self.expansion > 1.0
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.initial_step != 0.0;
        if !ok {
            return Err(Error::Config(format!(
                "invalid Nelder-Mead config {self:?}"
            )));
        }
        Ok(())
    }
}

/// `a + t (b - a)`
fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

pub fn minimize_nelder_mead<O: Objective + ?Sized>(
    objective: &O,
    initial: &[f64],
    config: &NelderMeadConfig,
    max_iter: usize,
) -> Result<OptimizeResult> {
    config.validate()?;
    let n = objective.dimension();
    check_dimension(n)?;
    if initial.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: initial.len(),
        });
    }
    let f = |x: &[f64]| sanitize(objective.evaluate(x));
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((initial.to_vec(), f(initial)));
    for axis in 0..n {
        let mut x = initial.to_vec();
        x[axis] += config.initial_step;
        let s = f(&x);
        simplex.push((x, s));
    }

    let mut history = Vec::with_capacity(max_iter);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 < config.epsilon {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let (best, second_worst, worst) = (simplex[0].1, simplex[n - 1].1, simplex[n].1);
        let xr = lerp(&centroid, &simplex[n].0, -config.reflection);
        let fr = f(&xr);
        let mut shrink = false;
        if fr < best {
            let xe = lerp(&centroid, &xr, config.expansion);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second_worst {
            simplex[n] = (xr, fr);
        } else if fr < worst {
            let xc = lerp(&centroid, &xr, config.contraction);
            let fc = f(&xc);
            if fc <= fr {
                simplex[n] = (xc, fc);
            } else {
                shrink = true;
            }
        } else {
            let xc = lerp(&centroid, &simplex[n].0, config.contraction);
            let fc = f(&xc);
            if fc < worst {
                simplex[n] = (xc, fc);
            } else {
                shrink = true;
            }
        }
        if shrink {
            let anchor = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x = lerp(&anchor, &vertex.0, config.shrink);
                let s = f(&x);
                *vertex = (x, s);
            }
        }
        history.push(simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (best, score) = simplex.swap_remove(0);
    Ok(OptimizeResult {
        best,
        score,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::FnObjective;

    #[test]
    fn parabola() {
        let obj = FnObjective::new(1, |x: &[f64]| x[0] * x[0]);
        let r = minimize_nelder_mead(&obj, &[1.0], &NelderMeadConfig::default(), 200).unwrap();
        assert!(r.best[0].abs() < 1e-5);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
