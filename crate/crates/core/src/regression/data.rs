//! Observations grouped by distinct covariate profile.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::posterior::{validate_observation, CensoredObservation, CountStatistics};

/// Binned competing-risks data with covariates.
///
/// Every profile vector starts with the intercept `1`. Observations sharing
/// a profile are kept in dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    k: usize,
    grid: TimeGrid,
    p: usize,
    profiles: Vec<Vec<f64>>,
    groups: Vec<Vec<CensoredObservation>>,
    stats: Vec<CountStatistics>,
    /// Profile index of each observation in input order.
    membership: Vec<usize>,
}

impl RegressionData {
    /// No observations; `p` counts the intercept.
    pub fn empty(k: usize, grid: TimeGrid, p: usize) -> Result<Self> {
        if k == 0 || p == 0 {
            return Err(Error::InvalidParameter("need k ≥ 1 and p ≥ 1".into()));
        }
        Ok(Self {
            k,
            grid,
            p,
            profiles: Vec::new(),
            groups: Vec::new(),
            stats: Vec::new(),
            membership: Vec::new(),
        })
    }

    /// Groups `observations[i]` under the profile `(1, covariates[i]...)`.
    pub fn new(
        k: usize,
        grid: TimeGrid,
        observations: &[CensoredObservation],
        covariates: &[Vec<f64>],
    ) -> Result<Self> {
        if observations.len() != covariates.len() {
            return Err(Error::DimensionMismatch {
                expected: observations.len(),
                got: covariates.len(),
            });
        }
        let p = covariates.first().map_or(1, |c| c.len() + 1);
        let mut data = Self::empty(k, grid, p)?;
        for (obs, cov) in observations.iter().zip(covariates) {
            validate_observation(obs, data.grid.horizon(), k)?;
            if cov.len() + 1 != p {
                return Err(Error::DimensionMismatch {
                    expected: p - 1,
                    got: cov.len(),
                });
            }
            if let Some(x) = cov.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("covariate value {x} is not finite")));
            }
            let mut w = Vec::with_capacity(p);
            w.push(1.0);
            w.extend(cov);
            let j = match data.profile_index(&w) {
                Some(j) => j,
                None => {
                    data.profiles.push(w);
                    data.groups.push(Vec::new());
                    data.stats.push(CountStatistics::zeros(data.grid.horizon(), k));
                    data.profiles.len() - 1
                }
            };
            let obs = CensoredObservation { profile: Some(j), ..*obs };
            data.groups[j].push(obs);
            data.stats[j].add(&obs)?;
            data.membership.push(j);
        }
        Ok(data)
    }

    /// Intercept-only data.
    pub fn intercept_only(k: usize, grid: TimeGrid, observations: &[CensoredObservation]) -> Result<Self> {
        if observations.is_empty() {
            return Self::empty(k, grid, 1);
        }
        Self::new(k, grid, observations, &vec![Vec::new(); observations.len()])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Covariate dimension including the intercept.
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    pub fn profiles(&self) -> &[Vec<f64>] {
        &self.profiles
    }

    pub fn group(&self, j: usize) -> &[CensoredObservation] {
        &self.groups[j]
    }

    pub fn stats(&self, j: usize) -> &CountStatistics {
        &self.stats[j]
    }

    /// Index of the profile equal to `w` (intercept included), if observed.
    pub fn profile_index(&self, w: &[f64]) -> Option<usize> {
        self.profiles.iter().position(|p| p.as_slice() == w)
    }

    /// Per-column mean and standard deviation over observations, for the
    /// non-intercept columns; `None` where the column is constant.
    pub fn column_scales(&self) -> Vec<Option<(f64, f64)>> {
        let n = self.len() as f64;
        (1..self.p)
            .map(|j| {
                if self.len() < 2 {
                    return None;
                }
                let col = || self.membership.iter().map(|&g| self.profiles[g][j]);
                let mean = col().sum::<f64>() / n;
                let var = col().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var > 0.0).then(|| (mean, var.sqrt()))
            })
            .collect()
    }

    /// All observations in input order, tagged with their profile index.
    pub fn observations(&self) -> Vec<CensoredObservation> {
        let mut next = vec![0usize; self.groups.len()];
        self.membership
            .iter()
            .map(|&g| {
                let o = self.groups[g][next[g]];
                next[g] += 1;
                o
            })
            .collect()
    }
}
