//! Competing-risks regression with an SBS prior centered on a parametric model.
//!
//! Subjects sharing a covariate profile `w` share one subdistribution
//! function `F(·; w) ~ SBS(ω0(θ,w)/m, F0(·|θ,w))`, independently across
//! profiles given `θ`; `θ` gets its own prior and is sampled by random-walk
//! Metropolis-Hastings on its marginal posterior.

pub mod centering;
pub mod concentration;
pub mod data;
pub mod geweke;
pub mod likelihood;
pub mod mcmc;
pub mod model;
pub mod optimize;
pub mod predictive;
pub mod prior;
pub mod theta;

pub use centering::{
    centering_subdistribution, discrete_weibull_cdf, multinomial_logistic, prior_parameters,
    weight_schedule, CenteringFamily,
};
pub use data::RegressionData;
pub use likelihood::{marginal_log_likelihood, parametric_log_likelihood, sequential_marginal_log_likelihood};
pub use model::{LikelihoodKind, RegressionModel};
pub use prior::{log_prior, PriorConfig};
pub use theta::{RegressionTheta, ShapeMode, ThetaLayout};
pub use geweke::geweke_diagnostic;
pub use mcmc::{posterior_mode, rwmh_sample, McmcChain, McmcSettings, PosteriorMode};
pub use concentration::{prior_concentration_curve, sample_prior_theta, ConcentrationCurve};
pub use predictive::{predictive_for_profile, predictive_mean_for_profile, PredictiveBands};
