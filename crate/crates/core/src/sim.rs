//! Simulation study: data generated from a fitted centering model, then
//! refit by a misspecified parametric model and by SBS models centered on
//! it, scored by Kolmogorov-Smirnov distance to the generating truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::posterior::CensoredObservation;
use crate::regression::centering::{centering_subdistribution, CenteringFamily};
use crate::regression::data::RegressionData;
use crate::regression::mcmc::{rwmh_sample, McmcSettings};
use crate::regression::model::{LikelihoodKind, RegressionModel};
use crate::regression::optimize::{maximize, MaximizeOptions};
use crate::regression::predictive::predictive_mean_for_profile;
use crate::regression::prior::PriorConfig;
use crate::regression::theta::{RegressionTheta, ShapeMode};
use crate::subdist::SubdistributionFunction;

/// Intercept-only maximum likelihood fit of the centering model.
#[derive(Debug, Clone)]
pub struct MleFit {
    pub theta: RegressionTheta,
    pub log_likelihood: f64,
}

/// Seed of the restart perturbations in [`fit_mle`].
const MLE_RESTART_SEED: u64 = 0x5eed;

/// Maximizes the censored log likelihood of the centering model alone.
/// Deterministic: restart points come from a fixed internal seed.
pub fn fit_mle(data: &RegressionData, family: CenteringFamily, shapes: ShapeMode) -> Result<MleFit> {
    if data.dim() != 1 {
        return Err(Error::InvalidParameter("maximum likelihood fit expects intercept-only data".into()));
    }
    if data.is_empty() {
        return Err(Error::InvalidParameter("no observations to fit".into()));
    }
    let model = RegressionModel::new(data.clone(), family, LikelihoodKind::Parametric, None, shapes)?;
    let objective = |x: &[f64]| model.log_target(x);
    let mut rng = ChaCha8Rng::seed_from_u64(MLE_RESTART_SEED);
    let found = maximize(&objective, &model.default_start(), MaximizeOptions::default(), &mut rng)?;
    Ok(MleFit {
        theta: model.layout().unpack(&found.x),
        log_likelihood: found.value,
    })
}

/// `n` draws from the centering subdistribution at `(θ, w)` by inversion
/// over the `(t,c)` cells. Times beyond `censor_bin` (including draws in
/// the tail beyond the grid) are recorded as censored at `censor_bin`.
pub fn generate_dataset<R: Rng + ?Sized>(
    family: CenteringFamily,
    theta: &RegressionTheta,
    w: &[f64],
    grid: &TimeGrid,
    n: usize,
    censor_bin: usize,
    rng: &mut R,
) -> Result<Vec<CensoredObservation>> {
    if censor_bin == 0 || censor_bin > grid.horizon() {
        return Err(Error::OutOfHorizon {
            time: censor_bin,
            horizon: grid.horizon(),
        });
    }
    let f0 = centering_subdistribution(family, theta, w, grid)?;
    let k = f0.k();
    let mut cdf = Vec::with_capacity(f0.increments().len());
    let mut acc = 0.0;
    for x in f0.increments() {
        acc += x;
        cdf.push(acc);
    }
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let cell = cdf.partition_point(|&c| c <= u);
            let (t, c) = (cell / k + 1, cell % k + 1);
            if cell >= cdf.len() || t > censor_bin {
                CensoredObservation::censored(censor_bin)
            } else {
                CensoredObservation::new(t, c)
            }
        })
        .collect())
}

/// `max_{t ≤ up_to_bin} |F̂(t,c) − F(t,c)|`.
pub fn ks_distance(
    estimate: &SubdistributionFunction,
    truth: &SubdistributionFunction,
    up_to_bin: usize,
    cause: usize,
) -> Result<f64> {
    if estimate.grid() != truth.grid() || estimate.k() != truth.k() {
        return Err(Error::InvalidParameter("estimate and truth are on different grids".into()));
    }
    if up_to_bin > truth.horizon() {
        return Err(Error::OutOfHorizon {
            time: up_to_bin,
            horizon: truth.horizon(),
        });
    }
    if !(1..=truth.k()).contains(&cause) {
        return Err(Error::IndexOutOfRange {
            time: up_to_bin,
            cause,
            horizon: truth.horizon(),
            k: truth.k(),
        });
    }
    let a = estimate.cumulative_curve(cause);
    let b = truth.cumulative_curve(cause);
    Ok(a[..up_to_bin]
        .iter()
        .zip(&b[..up_to_bin])
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Intercept-only parameters the study generates from.
pub const REFERENCE_THETA: [f64; 5] = [-0.640, -11.927, -7.244, 1.597, 0.639];

pub fn reference_theta() -> RegressionTheta {
    let [b, v1, v2, u1, u2] = REFERENCE_THETA;
    RegressionTheta {
        b: vec![vec![b]],
        v: vec![vec![v1], vec![v2]],
        u: vec![u1, u2],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub replicates: usize,
    pub sample_sizes: Vec<usize>,
    pub bins: usize,
    pub bin_width: f64,
    pub censor_bin: usize,
    /// Generating parameters `(b, v1, v2, u1, u2)`.
    pub theta: [f64; 5],
    /// Reinforcement masses of the SBS arms.
    pub masses: Vec<f64>,
    /// Sampler settings of the short per-replicate chains.
    pub chain: McmcSettings,
    pub prior: PriorConfig,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            replicates: 50,
            sample_sizes: vec![100, 1000],
            bins: 70,
            bin_width: 100.0,
            censor_bin: 70,
            theta: REFERENCE_THETA,
            masses: vec![1.0, 1e3, 1e6],
            chain: McmcSettings {
                iterations: 1_500,
                burn_in: 500,
                thin: 5,
                proposal_scale: 1.0,
            },
            prior: PriorConfig::default_for(CenteringFamily::Weibull),
            seed: 2024,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("need at least one replicate".into()));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        if self.censor_bin == 0 || self.censor_bin > self.bins {
            return Err(Error::Config(format!(
                "censoring bin {} must lie in 1..={}",
                self.censor_bin, self.bins
            )));
        }
        if let Some(m) = self.masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::Config(format!("reinforcement mass must be positive, got {m}")));
        }
        if !self.theta[3..].iter().all(|u| *u > 0.0) {
            return Err(Error::Config("generating shapes must be positive".into()));
        }
        self.chain.validate()?;
        self.prior.validate()?;
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.bins, self.bin_width)
    }

    pub fn truth(&self) -> RegressionTheta {
        let [b, v1, v2, u1, u2] = self.theta;
        RegressionTheta {
            b: vec![vec![b]],
            v: vec![vec![v1], vec![v2]],
            u: vec![u1, u2],
        }
    }
}

/// One fitted arm of the study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    /// Weibull model with every shape fixed at 1.
    Parametric,
    Sbs { m: f64 },
}

impl Arm {
    pub fn name(&self) -> &'static str {
        match self {
            Arm::Parametric => "parametric",
            Arm::Sbs { .. } => "sbs",
        }
    }

    pub fn mass(&self) -> Option<f64> {
        match self {
            Arm::Parametric => None,
            Arm::Sbs { m } => Some(*m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRecord {
    pub model: &'static str,
    pub m: Option<f64>,
    pub n: usize,
    pub replicate: usize,
    pub cause: usize,
    pub ks_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedReplicate {
    pub n: usize,
    pub replicate: usize,
    pub model: &'static str,
    pub m: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationResult {
    pub records: Vec<DistanceRecord>,
    pub failures: Vec<FailedReplicate>,
}

impl SimulationResult {
    /// Median distance of one arm at one sample size and cause, if any
    /// replicate succeeded.
    pub fn median(&self, arm: Arm, n: usize, cause: usize) -> Option<f64> {
        let mut values: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.model == arm.name() && r.m == arm.mass() && r.n == n && r.cause == cause)
            .map(|r| r.ks_distance)
            .collect();
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let mid = values.len() / 2;
        Some(if values.len() % 2 == 1 {
            values[mid]
        } else {
            0.5 * (values[mid - 1] + values[mid])
        })
    }
}

/// Posterior-mean estimate of `F` for one arm on one dataset.
pub fn fit_arm<R: Rng + ?Sized>(
    arm: Arm,
    data: &RegressionData,
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<SubdistributionFunction> {
    let likelihood = match arm {
        Arm::Parametric => LikelihoodKind::Parametric,
        Arm::Sbs { m } => LikelihoodKind::Nonparametric { m },
    };
    let model = RegressionModel::new(
        data.clone(),
        CenteringFamily::Weibull,
        likelihood,
        Some(config.prior),
        ShapeMode::Fixed(1.0),
    )?;
    let chain = rwmh_sample(&model, &config.chain, rng)?;
    predictive_mean_for_profile(&model, &chain.draws, &[1.0])
}

/// Runs every `(n, replicate)` task in parallel. Task `i` draws from the
/// master seed's stream `i`, so results do not depend on scheduling.
pub fn run_simulation_study(config: &SimulationConfig) -> Result<SimulationResult> {
    config.validate()?;
    let grid = config.grid()?;
    let truth_theta = config.truth();
    let truth = centering_subdistribution(CenteringFamily::Weibull, &truth_theta, &[1.0], &grid)?;
    let arms: Vec<Arm> = std::iter::once(Arm::Parametric)
        .chain(config.masses.iter().map(|&m| Arm::Sbs { m }))
        .collect();
    let tasks: Vec<(usize, usize)> = config
        .sample_sizes
        .iter()
        .flat_map(|&n| (0..config.replicates).map(move |r| (n, r)))
        .collect();

    let outcomes: Vec<(Vec<DistanceRecord>, Vec<FailedReplicate>)> = tasks
        .par_iter()
        .enumerate()
        .map(|(stream, &(n, replicate))| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream as u64);
            let mut records = Vec::new();
            let mut failures = Vec::new();
            let fail = |arm: Option<Arm>, e: Error| FailedReplicate {
                n,
                replicate,
                model: arm.map_or("data", |a| a.name()),
                m: arm.and_then(|a| a.mass()),
                error: e.to_string(),
            };
            let data = match generate_dataset(
                CenteringFamily::Weibull,
                &truth_theta,
                &[1.0],
                &grid,
                n,
                config.censor_bin,
                &mut rng,
            )
            .and_then(|obs| RegressionData::intercept_only(2, grid.clone(), &obs))
            {
                Ok(d) => d,
                Err(e) => return (records, vec![fail(None, e)]),
            };
            for &arm in &arms {
                let arm_seed: u64 = rng.random();
                let mut arm_rng = ChaCha8Rng::seed_from_u64(arm_seed);
                match fit_arm(arm, &data, config, &mut arm_rng).and_then(|estimate| {
                    (1..=2)
                        .map(|c| ks_distance(&estimate, &truth, config.censor_bin, c))
                        .collect::<Result<Vec<f64>>>()
                }) {
                    Ok(distances) => {
                        for (i, d) in distances.into_iter().enumerate() {
                            records.push(DistanceRecord {
                                model: arm.name(),
                                m: arm.mass(),
                                n,
                                replicate,
                                cause: i + 1,
                                ks_distance: d,
                            });
                        }
                    }
                    Err(e) => failures.push(fail(Some(arm), e)),
                }
            }
            (records, failures)
        })
        .collect();

    let mut result = SimulationResult {
        records: Vec::new(),
        failures: Vec::new(),
    };
    for (records, failures) in outcomes {
        result.records.extend(records);
        result.failures.extend(failures);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_distance_hand_cases() {
        let grid = TimeGrid::unit(4).unwrap();
        let zero = SubdistributionFunction::new(grid.clone(), 1, vec![0.0; 4]).unwrap();
        let mass = SubdistributionFunction::new(grid.clone(), 1, vec![0.1, 0.2, 0.0, 0.0]).unwrap();
        assert_eq!(ks_distance(&mass, &mass, 4, 1).unwrap(), 0.0);
        assert!((ks_distance(&mass, &zero, 4, 1).unwrap() - 0.3).abs() < 1e-15);
        let early = SubdistributionFunction::new(grid.clone(), 1, vec![0.0, 0.5, 0.0, 0.0]).unwrap();
        let late = SubdistributionFunction::new(grid.clone(), 1, vec![0.0, 0.0, 0.5, 0.0]).unwrap();
        assert_eq!(ks_distance(&early, &late, 4, 1).unwrap(), 0.5);
        let other = SubdistributionFunction::new(TimeGrid::unit(3).unwrap(), 1, vec![0.0; 3]).unwrap();
        assert!(ks_distance(&early, &other, 3, 1).is_err());
    }

    #[test]
    fn generated_marginals_match_the_centering_model() {
        let grid = TimeGrid::uniform(70, 100.0).unwrap();
        let theta = reference_theta();
        let f0 = centering_subdistribution(CenteringFamily::Weibull, &theta, &[1.0], &grid).unwrap();
        let n = 100_000;
        let censor = 40;
        let obs = generate_dataset(
            CenteringFamily::Weibull,
            &theta,
            &[1.0],
            &grid,
            n,
            censor,
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        let frac = |pred: &dyn Fn(&CensoredObservation) -> bool| obs.iter().filter(|o| pred(o)).count() as f64 / n as f64;
        let check = |got: f64, p: f64| {
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((got - p).abs() < 3.0 * se, "{got} vs {p}");
        };
        check(frac(&|o| o.cause == 1), f0.cumulative(censor, 1));
        check(frac(&|o| o.cause == 0), 1.0 - f0.cumulative(censor, 1) - f0.cumulative(censor, 2));
        assert!(obs.iter().all(|o| o.time <= censor));
        assert!(obs.iter().filter(|o| o.cause == 0).all(|o| o.time == censor));
        assert!(generate_dataset(CenteringFamily::Weibull, &theta, &[1.0], &grid, 5, 0, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn mle_recovers_generating_parameters() {
        let grid = TimeGrid::uniform(70, 100.0).unwrap();
        let theta = reference_theta();
        let obs = generate_dataset(
            CenteringFamily::Weibull,
            &theta,
            &[1.0],
            &grid,
            20_000,
            70,
            &mut ChaCha8Rng::seed_from_u64(4),
        )
        .unwrap();
        let data = RegressionData::intercept_only(2, grid, &obs).unwrap();
        let fit = fit_mle(&data, CenteringFamily::Weibull, ShapeMode::Free).unwrap();
        assert!((fit.theta.b[0][0] - theta.b[0][0]).abs() < 0.05, "{:?}", fit.theta);
        assert!((fit.theta.u[0] - theta.u[0]).abs() < 0.1, "{:?}", fit.theta);
        assert!((fit.theta.u[1] - theta.u[1]).abs() < 0.1, "{:?}", fit.theta);
        assert!((fit.theta.v[0][0] - theta.v[0][0]).abs() < 0.8, "{:?}", fit.theta);
    }

    #[test]
    fn all_censored_at_first_bin_stays_finite() {
        let grid = TimeGrid::uniform(10, 100.0).unwrap();
        let obs = vec![CensoredObservation::censored(1); 20];
        let data = RegressionData::intercept_only(2, grid, &obs).unwrap();
        let fit = fit_mle(&data, CenteringFamily::Weibull, ShapeMode::Free).unwrap();
        assert!(fit.log_likelihood <= 0.0 && fit.log_likelihood > -1e-3, "{}", fit.log_likelihood);
    }

    #[test]
    fn small_study_is_reproducible() {
        let config = SimulationConfig {
            replicates: 2,
            sample_sizes: vec![60],
            masses: vec![1.0],
            chain: McmcSettings {
                iterations: 300,
                burn_in: 100,
                thin: 4,
                proposal_scale: 1.0,
            },
            ..SimulationConfig::default()
        };
        let a = run_simulation_study(&config).unwrap();
        let b = run_simulation_study(&config).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.records.len(), 2 * 2 * 2);
        assert!(a.failures.is_empty());
    }
}
