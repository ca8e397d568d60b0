//! Parametric centering models `F0(t,c | θ, w) = F0¹(c | θ, w) · F0²(t | θ, c, w)`.
//!
//! The cause probabilities follow a multinomial logistic model with the last
//! cause as reference. The time model of each cause is a continuous
//! distribution `G0` evaluated at the bin edges, `F0²(t) = G0(τ_t)`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::process::SbsParameters;
use crate::regression::theta::RegressionTheta;
use crate::subdist::SubdistributionFunction;

/// Upper bound on the weight `ω0,t` where the centering increment vanishes.
pub const WEIGHT_CAP: f64 = 1e12;

/// Continuous time model discretized at the bin edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenteringFamily {
    /// `G0(x) = 1 − exp(−x^u exp(w'v))`.
    #[default]
    Weibull,
    /// `G0(x) = Φ((log x − w'v) / u)`.
    LogNormal,
}

impl CenteringFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CenteringFamily::Weibull => "weibull",
            CenteringFamily::LogNormal => "lognormal",
        }
    }
}

impl std::str::FromStr for CenteringFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weibull" => Ok(Self::Weibull),
            "lognormal" => Ok(Self::LogNormal),
            other => Err(Error::Config(format!("unknown centering family `{other}`"))),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(theta: &RegressionTheta, w: &[f64]) -> Result<()> {
    if theta.dim() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.dim(),
            got: w.len(),
        });
    }
    theta.validate(theta.k(), w.len())
}

/// `F0¹(c | θ, w)` for `c = 1..k`, with cause `k` as reference.
pub fn multinomial_logistic(theta: &RegressionTheta, w: &[f64]) -> Result<Vec<f64>> {
    check_dims(theta, w)?;
    let mut eta: Vec<f64> = theta.b.iter().map(|b| dot(w, b)).collect();
    eta.push(0.0);
    let max = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_total = max + eta.iter().map(|e| (e - max).exp()).sum::<f64>().ln();
    Ok(eta.iter().map(|e| (e - log_total).exp()).collect())
}

fn standard_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Survival `1 − G0(x)` of cause `c` (1-based) at raw time `x ≥ 0`.
fn time_survival(family: CenteringFamily, theta: &RegressionTheta, c: usize, w: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let eta = dot(w, &theta.v[c - 1]);
    let u = theta.u[c - 1];
    match family {
        CenteringFamily::Weibull => (-(eta + u * x.ln()).exp()).exp(),
        CenteringFamily::LogNormal => standard_normal_sf((x.ln() - eta) / u),
    }
}

/// `G0(x)` for cause `c` at raw time `x`.
pub fn time_cdf(family: CenteringFamily, theta: &RegressionTheta, c: usize, w: &[f64], x: f64) -> Result<f64> {
    check_dims(theta, w)?;
    if !(1..=theta.k()).contains(&c) {
        return Err(Error::IndexOutOfRange {
            time: 0,
            cause: c,
            horizon: 0,
            k: theta.k(),
        });
    }
    Ok(1.0 - time_survival(family, theta, c, w, x))
}

/// `F0²(t | θ, c, w) = G0(τ_t)` for the Weibull model.
pub fn discrete_weibull_cdf(theta: &RegressionTheta, c: usize, w: &[f64], grid: &TimeGrid, t: usize) -> Result<f64> {
    time_cdf(CenteringFamily::Weibull, theta, c, w, grid.edge(t))
}

/// `G0(τ_t) − G0(τ_{t−1})` for every bin, computed without cancellation.
fn time_increments(family: CenteringFamily, theta: &RegressionTheta, c: usize, w: &[f64], grid: &TimeGrid) -> Vec<f64> {
    let eta = dot(w, &theta.v[c - 1]);
    let u = theta.u[c - 1];
    let mut out = Vec::with_capacity(grid.horizon());
    match family {
        CenteringFamily::Weibull => {
            // S(τ) = exp(−H(τ)), ΔG = S(τ_{t−1}) · (1 − exp(−ΔH))
            let cum_hazard = |x: f64| if x > 0.0 { (eta + u * x.ln()).exp() } else { 0.0 };
            let mut h_prev: f64 = 0.0;
            for t in 1..=grid.horizon() {
                let h = cum_hazard(grid.edge(t));
                out.push((-h_prev).exp() * -(-(h - h_prev)).exp_m1());
                h_prev = h;
            }
        }
        CenteringFamily::LogNormal => {
            let z = |x: f64| if x > 0.0 { (x.ln() - eta) / u } else { f64::NEG_INFINITY };
            let mut z_prev = f64::NEG_INFINITY;
            for t in 1..=grid.horizon() {
                let z_t = z(grid.edge(t));
                // difference the smaller tail to keep relative accuracy
                let inc = if z_t <= 0.0 {
                    standard_normal_sf(-z_t) - standard_normal_sf(-z_prev)
                } else {
                    standard_normal_sf(z_prev) - standard_normal_sf(z_t)
                };
                out.push(inc.max(0.0));
                z_prev = z_t;
            }
        }
    }
    out
}

/// `ΔF0(t,c | θ, w) = F0¹(c) · [F0²(t) − F0²(t−1)]` on `grid`.
pub fn centering_subdistribution(
    family: CenteringFamily,
    theta: &RegressionTheta,
    w: &[f64],
    grid: &TimeGrid,
) -> Result<SubdistributionFunction> {
    let probs = multinomial_logistic(theta, w)?;
    let k = probs.len();
    let horizon = grid.horizon();
    let per_cause: Vec<Vec<f64>> = (1..=k)
        .map(|c| time_increments(family, theta, c, w, grid))
        .collect();
    let mut increments = Vec::with_capacity(horizon * k);
    for t in 0..horizon {
        for c in 0..k {
            increments.push(probs[c] * per_cause[c][t]);
        }
    }
    let survival = (0..=horizon)
        .map(|t| {
            let x = grid.edge(t);
            (1..=k)
                .map(|c| probs[c - 1] * time_survival(family, theta, c, w, x))
                .sum()
        })
        .collect();
    SubdistributionFunction::from_parts(grid.clone(), k, increments, survival)
}

/// `ω0,t = (τ_t − τ_{t−1}) / Σ_d ΔF0(t,d)`, capped at [`WEIGHT_CAP`].
pub fn weights_for_centering(f0: &SubdistributionFunction) -> Vec<f64> {
    (1..=f0.horizon())
        .map(|t| {
            let w = f0.grid().width(t) / f0.event_mass(t);
            if w.is_finite() {
                w.min(WEIGHT_CAP)
            } else {
                WEIGHT_CAP
            }
        })
        .collect()
}

/// Weight schedule of the centering model at `(θ, w)`.
pub fn weight_schedule(
    family: CenteringFamily,
    theta: &RegressionTheta,
    w: &[f64],
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    Ok(weights_for_centering(&centering_subdistribution(family, theta, w, grid)?))
}

/// SBS parameters of `SBS(ω0/m, F0)`:
/// `α_{t,c} = ω0,t ΔF0(t,c) / m` and `α_{t,0} = ω0,t S0(t) / m`.
///
/// Entries that underflow are floored at the smallest positive normal
/// number so the parameters stay valid far in the tails.
pub fn prior_parameters(f0: &SubdistributionFunction, m: f64) -> Result<SbsParameters> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reinforcement mass must be positive, got {m}"
        )));
    }
    let k = f0.k();
    let weights = weights_for_centering(f0);
    let mut alpha = Vec::with_capacity(f0.horizon() * (k + 1));
    for t in 1..=f0.horizon() {
        let w = weights[t - 1] / m;
        alpha.push((w * f0.survival(t)).max(f64::MIN_POSITIVE));
        alpha.extend(f0.row(t).iter().map(|x| (w * x).max(f64::MIN_POSITIVE)));
    }
    SbsParameters::new(f0.grid().clone(), k, alpha)
}
