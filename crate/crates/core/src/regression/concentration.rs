//! How tightly the regression prior holds `F` to its centering model.
//!
//! For each reinforcement mass `m`, `σ_m(t,c;w)` is the standard deviation
//! of `ΔF(t,c;w) − ΔF0(t,c|θ,w)` with `θ` drawn from its prior and `F` from
//! `SBS(ω0/m, F0)`. As `m → ∞` it rises to `σ∞ = √E[ΔF0(1 − ΔF0)]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::process::sample_sbs;
use crate::regression::centering::{centering_subdistribution, prior_parameters, CenteringFamily};
use crate::regression::prior::{NormalPrior, PriorConfig};
use crate::regression::theta::RegressionTheta;

pub const DEFAULT_PRIOR_DRAWS: usize = 10_000;

/// Draws `θ` from the independent priors: `k − 1` logistic and `k` time
/// coefficient vectors of length `p`, and `k` shapes.
pub fn sample_prior_theta<R: Rng + ?Sized>(prior: &PriorConfig, k: usize, p: usize, rng: &mut R) -> Result<RegressionTheta> {
    prior.validate()?;
    let mut normal = |n: NormalPrior| -> f64 { Normal::new(n.mean, n.sd).expect("validated prior").sample(rng) };
    let b = (0..k - 1)
        .map(|_| (0..p).map(|_| normal(prior.logistic)).collect())
        .collect();
    let v = (0..k)
        .map(|_| (0..p).map(|j| normal(prior.time_coefficient(j))).collect())
        .collect();
    let gamma = Gamma::new(prior.shape.shape, 1.0 / prior.shape.rate).expect("validated prior");
    let u = (0..k).map(|_| gamma.sample(rng)).collect();
    Ok(RegressionTheta { b, v, u })
}

/// `σ_m` per mass and bin, with Monte Carlo standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationCurve {
    pub k: usize,
    pub horizon: usize,
    pub m_values: Vec<f64>,
    /// `sigma[i][(t − 1) · k + c − 1]` for `m_values[i]`.
    pub sigma: Vec<Vec<f64>>,
    pub standard_error: Vec<Vec<f64>>,
    pub limit: Vec<f64>,
    pub limit_standard_error: Vec<f64>,
    pub draws: usize,
}

impl ConcentrationCurve {
    fn index(&self, t: usize, c: usize) -> usize {
        (t - 1) * self.k + c - 1
    }

    pub fn sigma(&self, i: usize, t: usize, c: usize) -> f64 {
        self.sigma[i][self.index(t, c)]
    }

    pub fn standard_error(&self, i: usize, t: usize, c: usize) -> f64 {
        self.standard_error[i][self.index(t, c)]
    }

    pub fn limit(&self, t: usize, c: usize) -> f64 {
        self.limit[self.index(t, c)]
    }

    pub fn limit_standard_error(&self, t: usize, c: usize) -> f64 {
        self.limit_standard_error[self.index(t, c)]
    }
}

/// Running sums of `x²` and `x⁴` per cell.
#[derive(Clone)]
struct Moments {
    second: Vec<f64>,
    fourth: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            second: vec![0.0; len],
            fourth: vec![0.0; len],
        }
    }

    fn add_squares(&mut self, squares: &[f64]) {
        for ((s2, s4), q) in self.second.iter_mut().zip(&mut self.fourth).zip(squares) {
            *s2 += q;
            *s4 += q * q;
        }
    }

    /// `√mean(x²)` and its delta-method standard error.
    fn root_mean(&self, n: f64) -> (Vec<f64>, Vec<f64>) {
        self.second
            .iter()
            .zip(&self.fourth)
            .map(|(s2, s4)| {
                let mean = s2 / n;
                let var = (s4 / n - mean * mean).max(0.0) / n;
                let root = mean.sqrt();
                let se = if root > 0.0 { var.sqrt() / (2.0 * root) } else { 0.0 };
                (root, se)
            })
            .unzip()
    }

    /// Mean of `x` (sums hold `x` and `x²`) and the SE of its square root.
    fn root_of_mean(&self, n: f64) -> (Vec<f64>, Vec<f64>) {
        self.second
            .iter()
            .zip(&self.fourth)
            .map(|(s1, s2)| {
                let mean = s1 / n;
                let var = (s2 / n - mean * mean).max(0.0) / n;
                let root = mean.max(0.0).sqrt();
                let se = if root > 0.0 { var.sqrt() / (2.0 * root) } else { 0.0 };
                (root, se)
            })
            .unzip()
    }
}

const CHUNK: usize = 256;

/// Monte Carlo `σ_m` for each `m` and the limit `σ∞`.
///
/// Every mass reuses the same `θ` draws and the same per-draw random
/// streams, so differences across `m` are not swamped by independent noise.
#[allow(clippy::too_many_arguments)]
pub fn prior_concentration_curve<R: Rng + ?Sized>(
    family: CenteringFamily,
    prior: &PriorConfig,
    k: usize,
    w: &[f64],
    m_values: &[f64],
    grid: &TimeGrid,
    draws: usize,
    rng: &mut R,
) -> Result<ConcentrationCurve> {
    prior.validate()?;
    if draws < 2 {
        return Err(Error::InvalidParameter("need at least two prior draws".into()));
    }
    if let Some(m) = m_values.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return Err(Error::InvalidParameter(format!("reinforcement mass must be positive, got {m}")));
    }
    if w.is_empty() || w[0] != 1.0 {
        return Err(Error::InvalidParameter("profile must start with the intercept 1".into()));
    }
    let cells = grid.horizon() * k;
    let p = w.len();
    let seeds: Vec<u64> = (0..draws).map(|_| rng.random()).collect();
    let mut per_mass = vec![Moments::new(cells); m_values.len()];
    let mut limit = Moments::new(cells);

    for chunk in seeds.chunks(CHUNK) {
        // (per-mass squared differences, ΔF0(1 − ΔF0)) for each draw
        let results: Vec<(Vec<Vec<f64>>, Vec<f64>)> = chunk
            .par_iter()
            .map(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let theta = sample_prior_theta(prior, k, p, &mut rng)?;
                let f0 = centering_subdistribution(family, &theta, w, grid)?;
                let stream = rng.random::<u64>();
                let squares = m_values
                    .iter()
                    .map(|&m| {
                        let params = prior_parameters(&f0, m)?;
                        let f = sample_sbs(&params, &mut ChaCha8Rng::seed_from_u64(stream))?;
                        Ok(f.increments()
                            .iter()
                            .zip(f0.increments())
                            .map(|(a, b)| (a - b) * (a - b))
                            .collect())
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()?;
                let binomial = f0.increments().iter().map(|x| x * (1.0 - x)).collect();
                Ok((squares, binomial))
            })
            .collect::<Result<_>>()?;
        for (squares, binomial) in &results {
            for (acc, sq) in per_mass.iter_mut().zip(squares) {
                acc.add_squares(sq);
            }
            for ((s1, s2), q) in limit.second.iter_mut().zip(&mut limit.fourth).zip(binomial) {
                *s1 += q;
                *s2 += q * q;
            }
        }
    }

    let n = draws as f64;
    let (sigma, standard_error) = per_mass.iter().map(|m| m.root_mean(n)).unzip();
    let (limit, limit_standard_error) = limit.root_of_mean(n);
    Ok(ConcentrationCurve {
        k,
        horizon: grid.horizon(),
        m_values: m_values.to_vec(),
        sigma,
        standard_error,
        limit,
        limit_standard_error,
        draws,
    })
}
