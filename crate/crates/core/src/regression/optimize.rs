//! Numerical maximization and curvature of smooth log densities.

use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::neldermead::NelderMead;
use argmin::solver::quasinewton::BFGS;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Settings for [`maximize`].
#[derive(Debug, Clone, Copy)]
pub struct MaximizeOptions {
    /// Extra simplex searches from randomly perturbed starts.
    pub restarts: usize,
    /// Standard deviation of the start perturbations.
    pub perturbation: f64,
    pub max_iters: u64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            restarts: 4,
            perturbation: 0.5,
            max_iters: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Maximum {
    pub x: Vec<f64>,
    pub value: f64,
}

struct Negated<'a, F> {
    f: &'a F,
}

impl<F: Fn(&[f64]) -> f64> CostFunction for Negated<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, ArgminError> {
        let v = -(self.f)(x);
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    }
}

impl<F: Fn(&[f64]) -> f64> Gradient for Negated<'_, F> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Self::Param) -> std::result::Result<Vec<f64>, ArgminError> {
        let mut g = Vec::with_capacity(x.len());
        let mut probe = x.clone();
        for i in 0..x.len() {
            let h = 1e-6 * (1.0 + x[i].abs());
            probe[i] = x[i] + h;
            let up = -(self.f)(&probe);
            probe[i] = x[i] - h;
            let down = -(self.f)(&probe);
            probe[i] = x[i];
            g.push((up - down) / (2.0 * h));
        }
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(ArgminError::msg("non-finite gradient"))
        }
    }
}

fn simplex_search<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64], max_iters: u64) -> Option<Maximum> {
    let mut simplex = vec![start.to_vec()];
    for i in 0..start.len() {
        let mut vertex = start.to_vec();
        vertex[i] += 0.25 * (1.0 + start[i].abs()).min(4.0);
        simplex.push(vertex);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-12).ok()?;
    let result = Executor::new(Negated { f }, solver)
        .configure(|state| state.max_iters(max_iters))
        .run()
        .ok()?;
    let x = result.state().get_best_param()?.clone();
    let value = f(&x);
    value.is_finite().then_some(Maximum { x, value })
}

fn quasi_newton<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64], max_iters: u64) -> Option<Maximum> {
    let d = start.len();
    let identity: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let solver = BFGS::new(MoreThuenteLineSearch::new()).with_tolerance_grad(1e-8).ok()?;
    let result = Executor::new(Negated { f }, solver)
        .configure(|state| state.param(start.to_vec()).inv_hessian(identity).max_iters(max_iters))
        .run()
        .ok()?;
    let x = result.state().get_best_param()?.clone();
    let value = f(&x);
    value.is_finite().then_some(Maximum { x, value })
}

/// Maximizes `f` from `start`: simplex searches from the start and from
/// perturbed copies, then a quasi-Newton polish of the best point.
pub fn maximize<F, R>(f: &F, start: &[f64], options: MaximizeOptions, rng: &mut R) -> Result<Maximum>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let mut starts = vec![start.to_vec()];
    for _ in 0..options.restarts {
        starts.push(
            start
                .iter()
                .map(|x| {
                    let z: f64 = StandardNormal.sample(rng);
                    x + options.perturbation * z
                })
                .collect(),
        );
    }
    let mut best: Option<Maximum> = None;
    let consider = |best: &mut Option<Maximum>, candidate: Option<Maximum>| {
        if let Some(c) = candidate {
            if best.as_ref().is_none_or(|b| c.value > b.value) {
                *best = Some(c);
            }
        }
    };
    for s in &starts {
        consider(&mut best, simplex_search(f, s, options.max_iters));
    }
    let Some(found) = best.clone() else {
        let value = f(start);
        return Err(Error::Optimizer(format!(
            "no finite objective value found (value at start: {value})"
        )));
    };
    consider(&mut best, quasi_newton(f, &found.x, options.max_iters));
    // a second simplex pass tidies up after a line-search stall
    let polished = best.clone().expect("at least one candidate");
    consider(&mut best, simplex_search(f, &polished.x, options.max_iters));
    Ok(best.expect("at least one candidate"))
}

/// Central finite-difference Hessian with steps `1e-4 · (1 + |x_i|)`,
/// symmetrized.
pub fn hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * (1.0 + v.abs())).collect();
    let f0 = f(x);
    let mut probe = x.to_vec();
    let mut eval = |shifts: &[(usize, f64)]| {
        for &(i, s) in shifts {
            probe[i] += s;
        }
        let v = f(&probe);
        for &(i, s) in shifts {
            probe[i] -= s;
        }
        v
    };
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        let up = eval(&[(i, h[i])]);
        let down = eval(&[(i, -h[i])]);
        m[(i, i)] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let pp = eval(&[(i, h[i]), (j, h[j])]);
            let pm = eval(&[(i, h[i]), (j, -h[j])]);
            let mp = eval(&[(i, -h[i]), (j, h[j])]);
            let mm = eval(&[(i, -h[i]), (j, -h[j])]);
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn finds_a_banana_maximum() {
        let f = |x: &[f64]| -((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = maximize(&f, &[-1.2, 1.0], MaximizeOptions::default(), &mut rng).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn hessian_of_a_quadratic() {
        let f = |x: &[f64]| -(2.0 * x[0] * x[0] + x[0] * x[1] + 3.0 * x[1] * x[1]);
        let h = hessian(&f, &[0.3, -0.7]);
        let want = [[-4.0, -1.0], [-1.0, -6.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[(i, j)] - want[i][j]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn reports_failure_on_a_nowhere_finite_objective() {
        let f = |_: &[f64]| f64::NEG_INFINITY;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(maximize(&f, &[0.0], MaximizeOptions::default(), &mut rng).is_err());
    }
}
