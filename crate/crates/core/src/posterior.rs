//! Conjugate updating of SBS parameters under right-censored data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{CenteredSbs, SbsParameters, EXHAUSTED};
use crate::subdist::SubdistributionFunction;

/// A binned, possibly right-censored observation `(t*, d*)`.
///
/// `cause = 0` marks a censoring at bin `time`; otherwise the event of that
/// cause happened in bin `time`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensoredObservation {
    pub time: usize,
    pub cause: usize,
    /// Covariate profile, when the data carry covariates.
    pub profile: Option<usize>,
}

impl CensoredObservation {
    pub fn new(time: usize, cause: usize) -> Self {
        Self {
            time,
            cause,
            profile: None,
        }
    }

    pub fn censored(time: usize) -> Self {
        Self::new(time, 0)
    }

    pub fn with_profile(mut self, profile: usize) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn is_event(&self) -> bool {
        self.cause != 0
    }
}

/// Checks `1 ≤ t* ≤ T` and `d* ≤ k`.
pub fn validate_observation(obs: &CensoredObservation, horizon: usize, k: usize) -> Result<()> {
    if obs.time == 0 {
        return Err(Error::InvalidParameter(
            "observation at time 0: event times are positive".into(),
        ));
    }
    if obs.time > horizon {
        return Err(Error::OutOfHorizon {
            time: obs.time,
            horizon,
        });
    }
    if obs.cause > k {
        return Err(Error::IndexOutOfRange {
            time: obs.time,
            cause: obs.cause,
            horizon,
            k,
        });
    }
    Ok(())
}

/// `l_t = #{t* > t}` and `m_{t,d} = #{t* = t, d* = d}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountStatistics {
    k: usize,
    horizon: usize,
    /// `l_1..l_T`.
    at_risk_beyond: Vec<u64>,
    /// Row-major `T × (k+1)`.
    event_counts: Vec<u64>,
}

impl CountStatistics {
    pub fn zeros(horizon: usize, k: usize) -> Self {
        Self {
            k,
            horizon,
            at_risk_beyond: vec![0; horizon],
            event_counts: vec![0; horizon * (k + 1)],
        }
    }

    pub fn from_data(data: &[CensoredObservation], horizon: usize, k: usize) -> Result<Self> {
        let mut stats = Self::zeros(horizon, k);
        for obs in data {
            stats.add(obs)?;
        }
        Ok(stats)
    }

    /// Adds one observation to the counts.
    pub fn add(&mut self, obs: &CensoredObservation) -> Result<()> {
        validate_observation(obs, self.horizon, self.k)?;
        self.event_counts[(obs.time - 1) * (self.k + 1) + obs.cause] += 1;
        for l in &mut self.at_risk_beyond[..obs.time - 1] {
            *l += 1;
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `l_t`.
    pub fn at_risk_beyond(&self, t: usize) -> u64 {
        self.at_risk_beyond[t - 1]
    }

    /// `m_{t,d}`, `d = 0..k`.
    pub fn count(&self, t: usize, d: usize) -> u64 {
        self.event_counts[(t - 1) * (self.k + 1) + d]
    }

    /// `m_{t,0..k}`.
    pub fn counts_at(&self, t: usize) -> &[u64] {
        let w = self.k + 1;
        &self.event_counts[(t - 1) * w..t * w]
    }

    /// Events of any cause at bin `t`, `Σ_{d≥1} m_{t,d}`.
    pub fn events_at(&self, t: usize) -> u64 {
        self.counts_at(t)[1..].iter().sum()
    }

    /// Risk set `n_t = l_t + Σ_d m_{t,d}`: subjects still under observation
    /// at the start of bin `t`.
    pub fn risk_set(&self, t: usize) -> u64 {
        self.at_risk_beyond(t) + self.counts_at(t).iter().sum::<u64>()
    }

    /// Number of observations.
    pub fn total(&self) -> u64 {
        self.event_counts.iter().sum()
    }
}

/// Counts of `data` on a `horizon`-bin grid with `k` causes.
pub fn count_statistics(
    data: &[CensoredObservation],
    horizon: usize,
    k: usize,
) -> Result<CountStatistics> {
    CountStatistics::from_data(data, horizon, k)
}

/// `α*_{t,0} = α_{t,0} + l_t + m_{t,0}`, `α*_{t,d} = α_{t,d} + m_{t,d}`.
pub fn posterior_update_counts(prior: &SbsParameters, stats: &CountStatistics) -> Result<SbsParameters> {
    if stats.horizon() != prior.horizon() || stats.k() != prior.k() {
        return Err(Error::DimensionMismatch {
            expected: prior.horizon() * (prior.k() + 1),
            got: stats.horizon() * (stats.k() + 1),
        });
    }
    let mut post = prior.clone();
    for t in 1..=prior.horizon() {
        let counts = stats.counts_at(t);
        let row = post.row_mut(t);
        row[0] += stats.at_risk_beyond(t) as f64;
        for (a, &m) in row.iter_mut().zip(counts) {
            *a += m as f64;
        }
    }
    Ok(post)
}

/// Posterior parameters after observing `data`.
pub fn posterior_update(prior: &SbsParameters, data: &[CensoredObservation]) -> Result<SbsParameters> {
    let stats = count_statistics(data, prior.horizon(), prior.k())?;
    posterior_update_counts(prior, &stats)
}

/// Law of a new uncensored observation, `ΔF*(t,d) = E[ΔF(t,d) | data]`,
/// for parameters that already include the data.
pub fn predictive_distribution(params: &SbsParameters) -> SubdistributionFunction {
    params.mean_subdistribution()
}

/// Posterior of a centered prior, again in centered form `SBS(ω*, F*)`.
///
/// `F*` is assembled from the updated hazards
/// `ΔA*_c(t) = (ω_t ΔF0(t,c) + m_{t,c}) / (ω_t S0(t-1) + l_t + Σ_d m_{t,d})`
/// and `ω*_t = (ω_t S0(t) + l_t + m_{t,0}) / S*(t)`. Where `S*(t) = 0`
/// (only possible at the last bin) the equivalent form
/// `ω*_t = (ω_t S0(t-1) + l_t + Σ_d m_{t,d}) / S*(t-1)` is used.
pub fn posterior_centering(prior: &CenteredSbs, data: &[CensoredObservation]) -> Result<CenteredSbs> {
    // the raw parameters fix the horizon on which the prior has mass
    let horizon = prior.to_parameters()?.horizon();
    let f0 = prior.centering();
    let k = f0.k();
    let stats = count_statistics(data, horizon, k)?;
    let omega = prior.omega();

    let mut increments = Vec::with_capacity(horizon * k);
    let mut survival = Vec::with_capacity(horizon + 1);
    let mut omega_post = Vec::with_capacity(horizon);
    let mut s_prev = 1.0;
    survival.push(s_prev);
    for t in 1..=horizon {
        let w = omega[t - 1];
        let counts = stats.counts_at(t);
        let denominator = w * f0.survival(t - 1) + stats.risk_set(t) as f64;
        let mut event_hazard = 0.0;
        for c in 1..=k {
            let hazard = (w * f0.increment(t, c) + counts[c] as f64) / denominator;
            event_hazard += hazard;
            increments.push(s_prev * hazard);
        }
        let survivors = w * terminal_survival(f0, t, horizon) + (stats.at_risk_beyond(t) + counts[0]) as f64;
        let s = if survivors > 0.0 {
            s_prev * (1.0 - event_hazard).max(0.0)
        } else {
            0.0
        };
        omega_post.push(if s > 0.0 {
            survivors / s
        } else {
            denominator / s_prev
        });
        survival.push(s);
        s_prev = s;
    }
    let grid = f0.grid().truncated(horizon)?;
    let f_post = SubdistributionFunction::from_parts(grid, k, increments, survival)?;
    CenteredSbs::new(f_post, omega_post)
}

/// `S0(t)`, read as exactly zero at the bin where the centering is exhausted.
fn terminal_survival(f0: &SubdistributionFunction, t: usize, horizon: usize) -> f64 {
    if t == horizon && f0.survival(t) <= EXHAUSTED {
        0.0
    } else {
        f0.survival(t)
    }
}

/// `Σ_i [z_i log ΔF(t_i, d_i) + (1 - z_i) log S(t_i)]` with `z_i = 1{d_i ≠ 0}`.
///
/// An observed event with zero model mass gives `-∞`.
pub fn censored_log_likelihood(f: &SubdistributionFunction, data: &[CensoredObservation]) -> Result<f64> {
    let mut total = 0.0;
    for obs in data {
        validate_observation(obs, f.horizon(), f.k())?;
        total += if obs.is_event() {
            f.increment(obs.time, obs.cause).ln()
        } else {
            f.survival(obs.time).ln()
        };
    }
    Ok(total)
}
