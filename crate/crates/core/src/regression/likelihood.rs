//! Likelihood of the regression parameters.
//!
//! Given `θ`, each profile's subdistribution is an independent
//! `SBS(ω0/m, F0(·|θ,w))`, and the marginal likelihood of `θ` is the product
//! over profiles of the sequential predictive probabilities of that profile's
//! observations. Because the predictive of an SBS process is a ratio of
//! Dirichlet moments, the product telescopes into one Dirichlet-multinomial
//! factor per bin:
//!
//! ```text
//! Σ_t [ Σ_d ln (α_{t,d})_{c_{t,d}} − ln (A_t)_{N_t} ]
//! ```
//!
//! with `(a)_n` the rising factorial, `c_{t,0} = l_t + m_{t,0}`,
//! `c_{t,d} = m_{t,d}`, `A_t = Σ_d α_{t,d}` and `N_t = Σ_d c_{t,d}`.

use crate::error::Result;
use crate::posterior::{CensoredObservation, CountStatistics};
use crate::process::SbsParameters;
use crate::regression::centering::{centering_subdistribution, prior_parameters, CenteringFamily};
use crate::regression::data::RegressionData;
use crate::regression::theta::RegressionTheta;
use crate::special::ln_rising;
use crate::subdist::SubdistributionFunction;

/// Last bin with any observation in `stats`.
fn last_observed_bin(stats: &CountStatistics) -> usize {
    (1..=stats.horizon())
        .rev()
        .find(|&t| stats.counts_at(t).iter().any(|&c| c > 0))
        .unwrap_or(0)
}

fn profile_centering(
    family: CenteringFamily,
    theta: &RegressionTheta,
    data: &RegressionData,
    j: usize,
    horizon: usize,
) -> Result<SubdistributionFunction> {
    let grid = data.grid().truncated(horizon)?;
    centering_subdistribution(family, theta, &data.profiles()[j], &grid)
}

/// Closed-form log marginal likelihood of one profile's counts under `SBS(α)`.
pub fn dirichlet_multinomial_log_likelihood(alpha: &SbsParameters, stats: &CountStatistics) -> f64 {
    let horizon = alpha.horizon().min(stats.horizon());
    let mut total = 0.0;
    for t in 1..=horizon {
        let counts = stats.counts_at(t);
        let survivors = stats.at_risk_beyond(t) + counts[0];
        let n = survivors + counts[1..].iter().sum::<u64>();
        if n == 0 {
            continue;
        }
        let row = alpha.row(t);
        if survivors > 0 {
            if row[0] == 0.0 {
                return f64::NEG_INFINITY;
            }
            total += ln_rising(row[0], survivors);
        }
        for (&a, &c) in row[1..].iter().zip(&counts[1..]) {
            if c > 0 {
                total += ln_rising(a, c);
            }
        }
        total -= ln_rising(row.iter().sum(), n);
    }
    total
}

/// Log marginal likelihood of `θ` with reinforcement `m` (closed form).
pub fn marginal_log_likelihood(
    family: CenteringFamily,
    theta: &RegressionTheta,
    data: &RegressionData,
    m: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..data.profiles().len() {
        let stats = data.stats(j);
        let horizon = last_observed_bin(stats);
        if horizon == 0 {
            continue;
        }
        let f0 = profile_centering(family, theta, data, j, horizon)?;
        let alpha = prior_parameters(&f0, m)?;
        total += dirichlet_multinomial_log_likelihood(&alpha, stats);
    }
    Ok(total)
}

/// Log marginal likelihood computed observation by observation: each
/// profile's observations are scored, in dataset order, under the predictive
/// given the earlier ones, and then added to the running posterior.
pub fn sequential_marginal_log_likelihood(
    family: CenteringFamily,
    theta: &RegressionTheta,
    data: &RegressionData,
    m: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..data.profiles().len() {
        let f0 = profile_centering(family, theta, data, j, data.grid().horizon())?;
        let mut posterior = prior_parameters(&f0, m)?;
        for obs in data.group(j) {
            total += predictive_log_probability(&posterior, obs);
            let row = posterior.row_mut(obs.time);
            row[obs.cause] += 1.0;
            for t in 1..obs.time {
                posterior.row_mut(t)[0] += 1.0;
            }
        }
    }
    Ok(total)
}

/// `log ΔF*(t,d)` for an event, `log(1 − Σ_d F*(t,d))` for a censoring.
fn predictive_log_probability(params: &SbsParameters, obs: &CensoredObservation) -> f64 {
    let mut log_p = 0.0;
    for u in 1..obs.time {
        log_p += (params.alpha(u, 0) / params.row_total(u)).ln();
    }
    let t = obs.time;
    if obs.is_event() {
        log_p + (params.alpha(t, obs.cause) / params.row_total(t)).ln()
    } else {
        log_p + (params.alpha(t, 0) / params.row_total(t)).ln()
    }
}

/// Censored-data log likelihood of the centering model alone.
pub fn parametric_log_likelihood(
    family: CenteringFamily,
    theta: &RegressionTheta,
    data: &RegressionData,
) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..data.profiles().len() {
        let stats = data.stats(j);
        let horizon = last_observed_bin(stats);
        if horizon == 0 {
            continue;
        }
        let f0 = profile_centering(family, theta, data, j, horizon)?;
        for t in 1..=horizon {
            let counts = stats.counts_at(t);
            if counts[0] > 0 {
                total += counts[0] as f64 * f0.survival(t).ln();
            }
            for c in 1..=f0.k() {
                if counts[c] > 0 {
                    total += counts[c] as f64 * f0.increment(t, c).ln();
                }
            }
        }
    }
    Ok(total)
}
