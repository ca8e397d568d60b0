//! Posterior mode and random-walk Metropolis-Hastings for `θ`.
//!
//! Both work in the standardized coordinates of [`RegressionModel`]. The
//! proposal is a Gaussian random walk whose covariance is the inverse
//! negative Hessian of the log target at the mode, scaled by `2.4²/d`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::geweke::{geweke_diagnostic, DEFAULT_FIRST_FRACTION, DEFAULT_LAST_FRACTION, MIN_CHAIN_LENGTH};
use crate::regression::model::RegressionModel;
use crate::regression::optimize::{hessian, maximize, MaximizeOptions};
use crate::regression::theta::{RegressionTheta, ThetaLayout};

/// Smallest eigenvalue kept when inverting the negative Hessian.
pub const EIGEN_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcSettings {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Multiplies the `2.4²/d` proposal scaling.
    pub proposal_scale: f64,
}

impl Default for McmcSettings {
    fn default() -> Self {
        Self {
            iterations: 26_000,
            burn_in: 1_000,
            thin: 25,
            proposal_scale: 1.0,
        }
    }
}

impl McmcSettings {
    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::Config(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thinning must be at least 1".into()));
        }
        if !(self.proposal_scale.is_finite() && self.proposal_scale > 0.0) {
            return Err(Error::Config(format!(
                "proposal scale must be positive, got {}",
                self.proposal_scale
            )));
        }
        Ok(())
    }

    /// Number of retained draws, `(iterations − burn_in) / thin` rounded down.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

#[derive(Debug, Clone)]
pub struct PosteriorMode {
    pub theta: RegressionTheta,
    pub log_target: f64,
    /// The mode in standardized coordinates.
    pub standardized: Vec<f64>,
}

/// Maximizer of the model's log target (log prior plus log likelihood in
/// the `log u` parameterization), started from the prior means. The random
/// source only perturbs restart points.
pub fn posterior_mode<R: Rng + ?Sized>(model: &RegressionModel, rng: &mut R) -> Result<PosteriorMode> {
    let start = model.to_standardized(&model.default_start());
    let target = |z: &[f64]| model.log_target_standardized(z);
    let found = maximize(&target, &start, MaximizeOptions::default(), rng)?;
    Ok(PosteriorMode {
        theta: model.layout().unpack(&model.from_standardized(&found.x)),
        log_target: found.value,
        standardized: found.x,
    })
}

/// Proposal covariance from the Hessian of the log target.
#[derive(Debug, Clone)]
pub struct ProposalCovariance {
    pub covariance: DMatrix<f64>,
    /// True when the negative Hessian was not positive definite and the
    /// covariance was built from the diagonal curvatures alone.
    pub diagonal_fallback: bool,
}

/// Inverse of `−H` with eigenvalues floored at [`EIGEN_FLOOR`]. If `−H` has
/// a non-positive eigenvalue, a diagonal matrix with entries `1/(−H_ii)`
/// (or 1 where that curvature is not positive) is used instead.
pub fn proposal_covariance(hessian: &DMatrix<f64>) -> ProposalCovariance {
    let neg = -hessian;
    let eigen = SymmetricEigen::new(neg.clone());
    let all_finite = eigen.eigenvalues.iter().all(|v| v.is_finite());
    if all_finite && eigen.eigenvalues.iter().all(|&v| v > 0.0) {
        let inv = eigen.eigenvalues.map(|v| 1.0 / v.max(EIGEN_FLOOR));
        let covariance = &eigen.eigenvectors * DMatrix::from_diagonal(&inv) * eigen.eigenvectors.transpose();
        return ProposalCovariance {
            covariance,
            diagonal_fallback: false,
        };
    }
    let d = neg.nrows();
    let diag = DVector::from_fn(d, |i, _| {
        let c = neg[(i, i)];
        if c.is_finite() && c > EIGEN_FLOOR {
            1.0 / c
        } else {
            1.0
        }
    });
    ProposalCovariance {
        covariance: DMatrix::from_diagonal(&diag),
        diagonal_fallback: true,
    }
}

/// Log Metropolis-Hastings acceptance ratio for a symmetric proposal.
pub fn log_acceptance_ratio(current: f64, proposed: f64) -> f64 {
    match (current == f64::NEG_INFINITY, proposed == f64::NEG_INFINITY) {
        (true, true) => 0.0,
        (true, false) => f64::INFINITY,
        (false, true) => f64::NEG_INFINITY,
        (false, false) => proposed - current,
    }
}

/// Thinned post-burn-in draws of `θ` on the original covariate scale.
#[derive(Debug, Clone)]
pub struct McmcChain {
    pub layout: ThetaLayout,
    pub draws: Vec<RegressionTheta>,
    pub log_targets: Vec<f64>,
    /// Accepted proposals over all iterations, burn-in included.
    pub acceptance_rate: f64,
    /// Geweke z-score per natural coordinate; `None` where undefined or
    /// when the chain is shorter than the diagnostic needs.
    pub geweke: Vec<Option<f64>>,
    pub mode: RegressionTheta,
    pub diagonal_fallback: bool,
    pub settings: McmcSettings,
}

impl McmcChain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.layout.names()
    }

    /// Draws in natural coordinates (see [`ThetaLayout::natural`]).
    pub fn natural_draws(&self) -> Vec<Vec<f64>> {
        self.draws.iter().map(|t| self.layout.natural(t)).collect()
    }
}

/// Runs the random-walk sampler from the posterior mode.
pub fn rwmh_sample<R: Rng + ?Sized>(
    model: &RegressionModel,
    settings: &McmcSettings,
    rng: &mut R,
) -> Result<McmcChain> {
    settings.validate()?;
    let mode = posterior_mode(model, rng)?;
    let target = |z: &[f64]| model.log_target_standardized(z);
    let curvature = hessian(&target, &mode.standardized);
    let proposal = proposal_covariance(&curvature);
    let d = mode.standardized.len();
    let scaled = proposal.covariance * (settings.proposal_scale * 2.4 * 2.4 / d as f64);
    let chol = scaled
        .cholesky()
        .ok_or_else(|| Error::Optimizer("proposal covariance is not positive definite".into()))?;
    let factor = chol.l();

    let mut z = DVector::from_vec(mode.standardized.clone());
    let mut current = mode.log_target;
    let mut accepted = 0usize;
    let mut draws = Vec::with_capacity(settings.retained());
    let mut log_targets = Vec::with_capacity(settings.retained());
    for i in 0..settings.iterations {
        let noise = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let candidate = &z + &factor * noise;
        let proposed = target(candidate.as_slice());
        let log_ratio = log_acceptance_ratio(current, proposed);
        let u: f64 = rng.random();
        if u.ln() < log_ratio {
            z = candidate;
            current = proposed;
            accepted += 1;
        }
        if i >= settings.burn_in && (i - settings.burn_in + 1).is_multiple_of(settings.thin) {
            draws.push(model.layout().unpack(&model.from_standardized(z.as_slice())));
            log_targets.push(current);
        }
    }

    let layout = *model.layout();
    let natural: Vec<Vec<f64>> = draws.iter().map(|t| layout.natural(t)).collect();
    let geweke = if natural.len() >= MIN_CHAIN_LENGTH {
        geweke_diagnostic(&natural, DEFAULT_FIRST_FRACTION, DEFAULT_LAST_FRACTION)?
    } else {
        vec![None; layout.len()]
    };
    Ok(McmcChain {
        layout,
        draws,
        log_targets,
        acceptance_rate: accepted as f64 / settings.iterations as f64,
        geweke,
        mode: mode.theta,
        diagonal_fallback: proposal.diagonal_fallback,
        settings: *settings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::posterior::CensoredObservation;
    use crate::regression::centering::CenteringFamily;
    use crate::regression::data::RegressionData;
    use crate::regression::model::LikelihoodKind;
    use crate::regression::prior::PriorConfig;
    use crate::regression::theta::ShapeMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_model(m: f64) -> RegressionModel {
        let obs: Vec<_> = (0..40)
            .map(|i| CensoredObservation::new(1 + i % 10, if i % 4 == 3 { 0 } else { 1 + i % 2 }))
            .collect();
        let data = RegressionData::intercept_only(2, TimeGrid::uniform(10, 100.0).unwrap(), &obs).unwrap();
        RegressionModel::new(
            data,
            CenteringFamily::Weibull,
            LikelihoodKind::Nonparametric { m },
            Some(PriorConfig::default_for(CenteringFamily::Weibull)),
            ShapeMode::Free,
        )
        .unwrap()
    }

    #[test]
    fn swapping_states_negates_the_log_ratio() {
        for (a, b) in [(-3.0, -1.5), (-10.0, -10.0), (2.0, -7.25)] {
            assert_eq!(log_acceptance_ratio(a, b), -log_acceptance_ratio(b, a));
        }
        assert_eq!(log_acceptance_ratio(-1.0, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(log_acceptance_ratio(f64::NEG_INFINITY, -1.0), f64::INFINITY);
    }

    #[test]
    fn mode_beats_prior_draws() {
        let model = small_model(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mode = posterior_mode(&model, &mut rng).unwrap();
        let start = model.default_start();
        for _ in 0..50 {
            let x: Vec<f64> = start
                .iter()
                .map(|v| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    v + 0.5 * e
                })
                .collect();
            assert!(model.log_target(&x) <= mode.log_target + 1e-9);
        }
    }

    #[test]
    fn symmetric_data_gives_even_cause_split() {
        let obs: Vec<_> = (0..60).map(|i| CensoredObservation::new(1 + i % 6, 1 + (i / 6) % 2)).collect();
        let data = RegressionData::intercept_only(2, TimeGrid::unit(6).unwrap(), &obs).unwrap();
        let model = RegressionModel::new(
            data,
            CenteringFamily::Weibull,
            LikelihoodKind::Parametric,
            Some(PriorConfig::default_for(CenteringFamily::Weibull)),
            ShapeMode::Free,
        )
        .unwrap();
        let mode = posterior_mode(&model, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert!(mode.theta.b[0][0].abs() < 1e-3, "{:?}", mode.theta.b);
    }

    #[test]
    fn chain_has_the_documented_length() {
        let model = small_model(2.0);
        let settings = McmcSettings {
            iterations: 1030,
            burn_in: 100,
            thin: 7,
            proposal_scale: 1.0,
        };
        let chain = rwmh_sample(&model, &settings, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(chain.len(), 930 / 7);
        assert!((0.0..=1.0).contains(&chain.acceptance_rate));
        assert!(chain.acceptance_rate > 0.1, "{}", chain.acceptance_rate);
        assert_eq!(chain.geweke.len(), 5);
    }

    #[test]
    fn tiny_proposals_are_almost_always_accepted() {
        let model = small_model(2.0);
        let settings = McmcSettings {
            iterations: 400,
            burn_in: 0,
            thin: 1,
            proposal_scale: 1e-14,
        };
        let chain = rwmh_sample(&model, &settings, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert!(chain.acceptance_rate > 0.95, "{}", chain.acceptance_rate);
        let first = chain.layout.natural(&chain.draws[0]);
        let last = chain.layout.natural(&chain.draws[399]);
        for (a, b) in first.iter().zip(&last) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn indefinite_curvature_falls_back_to_the_diagonal() {
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, -3.0, -3.0, -2.0]);
        let p = proposal_covariance(&h);
        assert!(p.diagonal_fallback);
        assert_eq!(p.covariance[(0, 0)], 1.0);
        assert_eq!(p.covariance[(1, 1)], 0.5);
        assert_eq!(p.covariance[(0, 1)], 0.0);
        let h = DMatrix::from_row_slice(2, 2, &[-2.0, 0.5, 0.5, -1.0]);
        let p = proposal_covariance(&h);
        assert!(!p.diagonal_fallback);
        let back = p.covariance * (-h);
        assert!((back - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }
}
