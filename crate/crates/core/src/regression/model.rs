//! The regression model as a target density on an unconstrained vector.
//!
//! The working vector is `[b, v, log u]` on the original covariate scale.
//! Samplers and optimizers see a further linear reparameterization in which
//! the non-intercept covariates are centered and scaled to unit standard
//! deviation; the intercept column is left alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::centering::CenteringFamily;
use crate::regression::data::RegressionData;
use crate::regression::likelihood::{marginal_log_likelihood, parametric_log_likelihood};
use crate::regression::prior::{log_prior, PriorConfig};
use crate::regression::theta::{RegressionTheta, ShapeMode, ThetaLayout};

/// Which likelihood `θ` is scored with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodKind {
    /// SBS marginal likelihood with reinforcement mass `m`.
    Nonparametric { m: f64 },
    /// Censored likelihood of the centering model alone.
    Parametric,
}

#[derive(Debug, Clone)]
pub struct RegressionModel {
    family: CenteringFamily,
    likelihood: LikelihoodKind,
    prior: Option<PriorConfig>,
    layout: ThetaLayout,
    data: RegressionData,
    /// `(mean, sd)` of each non-intercept column, `None` when left unscaled.
    scales: Vec<Option<(f64, f64)>>,
}

impl RegressionModel {
    /// `prior = None` scores the likelihood alone (for maximum likelihood).
    pub fn new(
        data: RegressionData,
        family: CenteringFamily,
        likelihood: LikelihoodKind,
        prior: Option<PriorConfig>,
        shapes: ShapeMode,
    ) -> Result<Self> {
        if let LikelihoodKind::Nonparametric { m } = likelihood {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "reinforcement mass must be positive, got {m}"
                )));
            }
        }
        if let Some(p) = &prior {
            p.validate()?;
        }
        let layout = ThetaLayout::new(data.k(), data.dim(), shapes)?;
        let scales = data.column_scales();
        Ok(Self {
            family,
            likelihood,
            prior,
            layout,
            data,
            scales,
        })
    }

    pub fn family(&self) -> CenteringFamily {
        self.family
    }

    pub fn likelihood_kind(&self) -> LikelihoodKind {
        self.likelihood
    }

    pub fn prior(&self) -> Option<&PriorConfig> {
        self.prior.as_ref()
    }

    pub fn layout(&self) -> &ThetaLayout {
        &self.layout
    }

    pub fn data(&self) -> &RegressionData {
        &self.data
    }

    pub fn log_likelihood(&self, theta: &RegressionTheta) -> Result<f64> {
        match self.likelihood {
            LikelihoodKind::Nonparametric { m } => marginal_log_likelihood(self.family, theta, &self.data, m),
            LikelihoodKind::Parametric => parametric_log_likelihood(self.family, theta, &self.data),
        }
    }

    /// Log target at a working vector: likelihood, plus the log prior and
    /// the `log u` Jacobian when a prior is set. Invalid points give `−∞`.
    pub fn log_target(&self, x: &[f64]) -> f64 {
        let theta = self.layout.unpack(x);
        if theta.u.iter().any(|u| !(u.is_finite() && *u > 0.0)) {
            return f64::NEG_INFINITY;
        }
        let mut value = match self.log_likelihood(&theta) {
            Ok(v) => v,
            Err(_) => return f64::NEG_INFINITY,
        };
        if let Some(prior) = &self.prior {
            let fixed = matches!(self.layout.shapes, ShapeMode::Fixed(_));
            value += log_prior(&theta, prior, fixed);
            if let Some(offset) = self.layout.shape_offset() {
                value += x[offset..].iter().sum::<f64>();
            }
        }
        if value.is_nan() {
            f64::NEG_INFINITY
        } else {
            value
        }
    }

    /// Log target at a standardized vector (see the module docs).
    pub fn log_target_standardized(&self, z: &[f64]) -> f64 {
        self.log_target(&self.from_standardized(z))
    }

    /// Coefficient blocks of the working vector: `2k − 1` blocks of `p`.
    fn blocks(&self) -> usize {
        2 * self.layout.k - 1
    }

    /// Standardized coordinates to working coordinates.
    pub fn from_standardized(&self, z: &[f64]) -> Vec<f64> {
        let p = self.layout.p;
        let mut x = z.to_vec();
        for block in 0..self.blocks() {
            let coef = &mut x[block * p..(block + 1) * p];
            for (j, scale) in self.scales.iter().enumerate() {
                if let Some((mean, sd)) = scale {
                    coef[j + 1] /= sd;
                    coef[0] -= mean * coef[j + 1];
                }
            }
        }
        x
    }

    /// Working coordinates to standardized coordinates.
    pub fn to_standardized(&self, x: &[f64]) -> Vec<f64> {
        let p = self.layout.p;
        let mut z = x.to_vec();
        for block in 0..self.blocks() {
            let coef = &mut z[block * p..(block + 1) * p];
            for (j, scale) in self.scales.iter().enumerate() {
                if let Some((mean, sd)) = scale {
                    coef[0] += mean * coef[j + 1];
                    coef[j + 1] *= sd;
                }
            }
        }
        z
    }

    /// Working vector at the prior means (shapes at the prior mean), or at
    /// the default prior's means when scoring the likelihood alone.
    pub fn default_start(&self) -> Vec<f64> {
        let prior = self
            .prior
            .unwrap_or_else(|| PriorConfig::default_for(self.family));
        let p = self.layout.p;
        let k = self.layout.k;
        let theta = RegressionTheta {
            b: vec![vec![prior.logistic.mean; p]; k - 1],
            v: vec![(0..p).map(|j| prior.time_coefficient(j).mean).collect(); k],
            u: vec![prior.shape.shape / prior.shape.rate; k],
        };
        self.layout.pack(&theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::posterior::CensoredObservation;

    fn model() -> RegressionModel {
        let obs: Vec<_> = (1..=8).map(|t| CensoredObservation::new(t, t % 3)).collect();
        let cov: Vec<_> = (0..8).map(|i| vec![(i % 2) as f64, i as f64 * 0.5]).collect();
        let data = RegressionData::new(2, TimeGrid::unit(10).unwrap(), &obs, &cov).unwrap();
        RegressionModel::new(
            data,
            CenteringFamily::Weibull,
            LikelihoodKind::Nonparametric { m: 2.0 },
            Some(PriorConfig::default_for(CenteringFamily::Weibull)),
            ShapeMode::Free,
        )
        .unwrap()
    }

    #[test]
    fn standardization_round_trips_and_preserves_the_target() {
        let m = model();
        let x: Vec<f64> = (0..m.layout().len()).map(|i| 0.1 * i as f64 - 0.4).collect();
        let z = m.to_standardized(&x);
        let back = m.from_standardized(&z);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(m.log_target_standardized(&z), m.log_target(&back));
    }

    #[test]
    fn linear_predictors_are_unchanged_by_standardization() {
        let m = model();
        let x: Vec<f64> = (0..m.layout().len()).map(|i| 0.3 * i as f64).collect();
        let z = m.to_standardized(&x);
        let scales = m.data().column_scales();
        let w = [1.0, 1.0, 2.5];
        let wz: Vec<f64> = std::iter::once(1.0)
            .chain(scales.iter().zip(&w[1..]).map(|(s, v)| {
                let (mean, sd) = s.unwrap();
                (v - mean) / sd
            }))
            .collect();
        let lin = |c: &[f64], w: &[f64]| c.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        for block in 0..3 {
            let orig = lin(&x[block * 3..block * 3 + 3], &w);
            let stdz = lin(&z[block * 3..block * 3 + 3], &wz);
            assert!((orig - stdz).abs() < 1e-12);
        }
    }
}
