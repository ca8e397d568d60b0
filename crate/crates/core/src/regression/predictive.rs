//! Predictive subdistribution for a covariate profile, averaged over a chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::posterior::{posterior_update_counts, predictive_distribution};
use crate::process::{sample_sbs, SbsParameters};
use crate::regression::centering::{centering_subdistribution, prior_parameters};
use crate::regression::model::{LikelihoodKind, RegressionModel};
use crate::regression::theta::RegressionTheta;
use crate::subdist::SubdistributionFunction;

/// Pointwise band levels.
pub const BAND_PROBABILITIES: (f64, f64) = (0.025, 0.975);

/// Monte Carlo predictive of `F(·; w)` with pointwise bands on the
/// cumulative subdistributions.
#[derive(Debug, Clone)]
pub struct PredictiveBands {
    pub mean: SubdistributionFunction,
    /// `F(t,c)` quantiles stored row-major, `(t − 1) · k + (c − 1)`.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub draws: usize,
    /// Whether `w` matched an observed profile, so that draws came from the
    /// profile's posterior rather than the prior.
    pub seen_profile: bool,
}

impl PredictiveBands {
    pub fn lower(&self, t: usize, c: usize) -> f64 {
        self.lower[(t - 1) * self.mean.k() + c - 1]
    }

    pub fn upper(&self, t: usize, c: usize) -> f64 {
        self.upper[(t - 1) * self.mean.k() + c - 1]
    }
}

/// SBS parameters of `F(·; w)` given `θ`: the profile's posterior when `w`
/// was observed, the prior `SBS(ω0/m, F0)` otherwise. `None` for the
/// parametric model, where `F = F0` exactly.
pub fn profile_parameters(model: &RegressionModel, theta: &RegressionTheta, w: &[f64]) -> Result<Option<SbsParameters>> {
    let LikelihoodKind::Nonparametric { m } = model.likelihood_kind() else {
        return Ok(None);
    };
    let data = model.data();
    let f0 = centering_subdistribution(model.family(), theta, w, data.grid())?;
    let prior = prior_parameters(&f0, m)?;
    match data.profile_index(w) {
        Some(j) => posterior_update_counts(&prior, data.stats(j)).map(Some),
        None => Ok(Some(prior)),
    }
}

fn check_profile(model: &RegressionModel, w: &[f64]) -> Result<()> {
    if w.len() != model.layout().p {
        return Err(Error::DimensionMismatch {
            expected: model.layout().p,
            got: w.len(),
        });
    }
    if w.first() != Some(&1.0) {
        return Err(Error::InvalidParameter("profile must start with the intercept 1".into()));
    }
    Ok(())
}

/// `E[F(·; w) | θ, data]` averaged over `thetas`, using the closed-form
/// predictive for each `θ`.
pub fn predictive_mean_for_profile(
    model: &RegressionModel,
    thetas: &[RegressionTheta],
    w: &[f64],
) -> Result<SubdistributionFunction> {
    check_profile(model, w)?;
    if thetas.is_empty() {
        return Err(Error::InvalidParameter("no parameter draws".into()));
    }
    let curves: Vec<SubdistributionFunction> = thetas
        .par_iter()
        .map(|theta| match profile_parameters(model, theta, w)? {
            Some(params) => Ok(predictive_distribution(&params)),
            None => centering_subdistribution(model.family(), theta, w, model.data().grid()),
        })
        .collect::<Result<_>>()?;
    average(&curves)
}

fn average(curves: &[SubdistributionFunction]) -> Result<SubdistributionFunction> {
    let first = &curves[0];
    let mut sum = vec![0.0; first.increments().len()];
    for f in curves {
        for (s, x) in sum.iter_mut().zip(f.increments()) {
            *s += x;
        }
    }
    let n = curves.len() as f64;
    SubdistributionFunction::new(first.grid().clone(), first.k(), sum.into_iter().map(|s| s / n).collect())
}

/// Type-7 quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Pointwise [`BAND_PROBABILITIES`] quantiles of `F(t,c)` over `curves`,
/// row-major in `(t, c)`.
pub fn pointwise_bands(curves: &[SubdistributionFunction]) -> (Vec<f64>, Vec<f64>) {
    let k = curves[0].k();
    let horizon = curves[0].horizon();
    let cumulative: Vec<Vec<Vec<f64>>> = curves
        .iter()
        .map(|f| (1..=k).map(|c| f.cumulative_curve(c)).collect())
        .collect();
    let mut lower = Vec::with_capacity(horizon * k);
    let mut upper = Vec::with_capacity(horizon * k);
    let mut column = vec![0.0; curves.len()];
    for t in 1..=horizon {
        for c in 1..=k {
            for (slot, f) in column.iter_mut().zip(&cumulative) {
                *slot = f[c - 1][t - 1];
            }
            column.sort_by(f64::total_cmp);
            lower.push(quantile(&column, BAND_PROBABILITIES.0));
            upper.push(quantile(&column, BAND_PROBABILITIES.1));
        }
    }
    (lower, upper)
}

/// One draw `F_i(·; w)` per `θ_i`, averaged, with pointwise bands. Each draw
/// has its own random stream seeded from `rng`, so the result does not
/// depend on thread scheduling.
pub fn predictive_for_profile<R: Rng + ?Sized>(
    model: &RegressionModel,
    thetas: &[RegressionTheta],
    w: &[f64],
    rng: &mut R,
) -> Result<PredictiveBands> {
    check_profile(model, w)?;
    if thetas.is_empty() {
        return Err(Error::InvalidParameter("no parameter draws".into()));
    }
    let seeds: Vec<u64> = thetas.iter().map(|_| rng.random()).collect();
    let curves: Vec<SubdistributionFunction> = thetas
        .par_iter()
        .zip(seeds)
        .map(|(theta, seed)| match profile_parameters(model, theta, w)? {
            Some(params) => sample_sbs(&params, &mut ChaCha8Rng::seed_from_u64(seed)),
            None => centering_subdistribution(model.family(), theta, w, model.data().grid()),
        })
        .collect::<Result<_>>()?;
    let mean = average(&curves)?;
    let (lower, upper) = pointwise_bands(&curves);
    Ok(PredictiveBands {
        mean,
        lower,
        upper,
        draws: curves.len(),
        seen_profile: model.data().profile_index(w).is_some(),
    })
}
