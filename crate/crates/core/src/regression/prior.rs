//! Independent priors on the regression parameters.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, Gamma as GammaDist, Normal as NormalDist};

use crate::error::{Error, Result};
use crate::regression::centering::CenteringFamily;
use crate::regression::theta::RegressionTheta;

/// Normal prior `N(mean, sd²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub mean: f64,
    pub sd: f64,
}

/// Gamma prior with shape and rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

/// Priors on `θ`: logistic coefficients, time-model intercepts, the other
/// time-model coefficients, and shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub logistic: NormalPrior,
    pub time_intercept: NormalPrior,
    pub time_slope: NormalPrior,
    pub shape: GammaPrior,
}

/// Median event time the default time-model intercept prior is centered on.
pub const DEFAULT_PRIOR_MEDIAN: f64 = 3650.0;

impl PriorConfig {
    /// Unit-variance normal priors, time-model intercepts centered on a
    /// median event time of [`DEFAULT_PRIOR_MEDIAN`] under unit shape, and
    /// `Gamma(11, 10)` shapes.
    pub fn default_for(family: CenteringFamily) -> Self {
        let intercept_mean = match family {
            // exp(v) · median = −log(½)
            CenteringFamily::Weibull => (-(0.5f64.ln()) / DEFAULT_PRIOR_MEDIAN).ln(),
            // median = exp(v)
            CenteringFamily::LogNormal => DEFAULT_PRIOR_MEDIAN.ln(),
        };
        Self {
            logistic: NormalPrior { mean: 0.0, sd: 1.0 },
            time_intercept: NormalPrior {
                mean: intercept_mean,
                sd: 1.0,
            },
            time_slope: NormalPrior { mean: 0.0, sd: 1.0 },
            shape: GammaPrior {
                shape: 11.0,
                rate: 10.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("logistic", self.logistic),
            ("time_intercept", self.time_intercept),
            ("time_slope", self.time_slope),
        ] {
            if !(n.mean.is_finite() && n.sd.is_finite() && n.sd > 0.0) {
                return Err(Error::Config(format!("prior `{name}` needs a finite mean and positive sd")));
            }
        }
        if !(self.shape.shape > 0.0 && self.shape.rate > 0.0) {
            return Err(Error::Config("shape prior needs positive shape and rate".into()));
        }
        Ok(())
    }

    /// Prior of coefficient `j` (0 = intercept) of a time model.
    pub fn time_coefficient(&self, j: usize) -> NormalPrior {
        if j == 0 {
            self.time_intercept
        } else {
            self.time_slope
        }
    }
}

fn normal_ln_pdf(prior: NormalPrior, x: f64) -> f64 {
    NormalDist::new(prior.mean, prior.sd)
        .expect("validated normal prior")
        .ln_pdf(x)
}

/// Log density of the shape prior at `u`; `−∞` for `u ≤ 0`.
pub fn shape_ln_pdf(prior: GammaPrior, u: f64) -> f64 {
    if !(u > 0.0) {
        return f64::NEG_INFINITY;
    }
    GammaDist::new(prior.shape, prior.rate)
        .expect("validated gamma prior")
        .ln_pdf(u)
}

/// Sum of the independent log prior densities. With `fixed_shapes` the
/// shape terms are left out.
pub fn log_prior(theta: &RegressionTheta, config: &PriorConfig, fixed_shapes: bool) -> f64 {
    let mut total = 0.0;
    for b in &theta.b {
        total += b.iter().map(|&x| normal_ln_pdf(config.logistic, x)).sum::<f64>();
    }
    for v in &theta.v {
        total += v
            .iter()
            .enumerate()
            .map(|(j, &x)| normal_ln_pdf(config.time_coefficient(j), x))
            .sum::<f64>();
    }
    if !fixed_shapes {
        total += theta.u.iter().map(|&u| shape_ln_pdf(config.shape, u)).sum::<f64>();
    }
    total
}
