//! The discrete-time subdistribution beta-Stacy (SBS) process.
//!
//! An SBS process on `k` competing causes is parameterized by one positive
//! vector `(α_{t,0}, …, α_{t,k})` per time bin. Independent weights
//! `W_t ~ Dirichlet(α_{t,0}, …, α_{t,k})` are broken off a unit stick:
//!
//! ```text
//! ΔF(t,c) = W_{t,c} · Π_{u<t} W_{u,0}
//! ```
//!
//! `W_{t,0}` is the probability of surviving bin `t` given survival to its
//! start, so the remaining stick after bin `t` is the survival `S(t)`.
//!
//! The process lives on a finite horizon `T`; what is left of the stick after
//! `T` is the tail mass. The recurrency requirement (the stick is eventually
//! used up) becomes the testable surrogate `Π_t α_{t,0}/Σ_d α_{t,d} ≤ tol`.

use rand::Rng;
use serde::Serialize;

use crate::dirichlet::sample_dirichlet;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::subdist::SubdistributionFunction;

/// Default tolerance for the finite-horizon recurrency surrogate.
pub const RECURRENCY_TOLERANCE: f64 = 1e-6;

/// Horizons longer than this accumulate survival products in log space.
pub const LOG_SPACE_HORIZON: usize = 50;

/// `S0(t)` at or below this level counts as an exhausted centering distribution.
pub(crate) const EXHAUSTED: f64 = 4.0 * f64::EPSILON;

/// Running product `Π_{u<t} x_u`, accumulated in log space on long horizons.
struct StickProduct {
    log_space: bool,
    linear: f64,
    log: f64,
}

impl StickProduct {
    fn new(horizon: usize) -> Self {
        Self {
            log_space: horizon > LOG_SPACE_HORIZON,
            linear: 1.0,
            log: 0.0,
        }
    }

    fn value(&self) -> f64 {
        if self.log_space {
            self.log.exp()
        } else {
            self.linear
        }
    }

    fn mul(&mut self, x: f64) {
        if self.log_space {
            self.log += x.ln();
        } else {
            self.linear *= x;
        }
    }
}

/// Parameters `{(α_{t,0}, …, α_{t,k}) : t = 1..T}` of an SBS process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbsParameters {
    k: usize,
    grid: TimeGrid,
    /// Row-major `T × (k+1)`.
    alpha: Vec<f64>,
}

impl SbsParameters {
    /// Builds from a row-major `T × (k+1)` array.
    ///
    /// Every entry must be positive, except that the final bin may have
    /// `α_{T,0} = 0` (the centering distribution is exhausted there).
    pub fn new(grid: TimeGrid, k: usize, alpha: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let width = k + 1;
        let horizon = grid.horizon();
        if alpha.len() != horizon * width {
            return Err(Error::DimensionMismatch {
                expected: horizon * width,
                got: alpha.len(),
            });
        }
        for (i, &a) in alpha.iter().enumerate() {
            let (t, d) = (i / width + 1, i % width);
            let terminal_zero = t == horizon && d == 0 && a == 0.0;
            if !(a.is_finite() && (a > 0.0 || terminal_zero)) {
                return Err(Error::InvalidParameter(format!(
                    "alpha[{t}][{d}] = {a} must be finite and positive"
                )));
            }
        }
        Ok(Self { k, grid, alpha })
    }

    /// Builds from one `(k+1)`-vector per bin.
    pub fn from_rows(grid: TimeGrid, rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows
            .first()
            .map(|r| r.len().saturating_sub(1))
            .ok_or_else(|| Error::InvalidParameter("no rows".into()))?;
        if let Some(r) = rows.iter().find(|r| r.len() != k + 1) {
            return Err(Error::DimensionMismatch {
                expected: k + 1,
                got: r.len(),
            });
        }
        Self::new(grid, k, rows.concat())
    }

    /// All `α_{t,d}` equal to `value`.
    pub fn constant(grid: TimeGrid, k: usize, value: f64) -> Result<Self> {
        let n = grid.horizon() * (k + 1);
        Self::new(grid, k, vec![value; n])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn horizon(&self) -> usize {
        self.grid.horizon()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    /// `(α_{t,0}, …, α_{t,k})`.
    pub fn row(&self, t: usize) -> &[f64] {
        let w = self.k + 1;
        &self.alpha[(t - 1) * w..t * w]
    }

    pub(crate) fn row_mut(&mut self, t: usize) -> &mut [f64] {
        let w = self.k + 1;
        &mut self.alpha[(t - 1) * w..t * w]
    }

    /// `α_{t,d}` with `d = 0` the survival component.
    pub fn alpha(&self, t: usize, d: usize) -> f64 {
        self.row(t)[d]
    }

    /// `Σ_d α_{t,d}`.
    pub fn row_total(&self, t: usize) -> f64 {
        self.row(t).iter().sum()
    }

    /// Parameters multiplied entrywise by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.k,
            self.alpha.iter().map(|a| a * factor).collect(),
        )
    }

    /// `Π_{t=1}^{T} α_{t,0} / Σ_d α_{t,d}`: the prior mean of the tail mass.
    pub fn recurrency_product(&self) -> f64 {
        let mut p = StickProduct::new(self.horizon());
        for t in 1..=self.horizon() {
            p.mul(self.alpha(t, 0) / self.row_total(t));
        }
        p.value()
    }

    /// Finite-horizon recurrency check: the expected unused stick is at most `tol`.
    pub fn validate_recurrency(&self, tol: f64) -> bool {
        self.recurrency_product() <= tol
    }

    fn check_index(&self, t: usize, c: usize) -> Result<()> {
        if (1..=self.horizon()).contains(&t) && (1..=self.k).contains(&c) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                time: t,
                cause: c,
                horizon: self.horizon(),
                k: self.k,
            })
        }
    }

    /// `E[ΔF(t,c)] = (α_{t,c}/Σ_d α_{t,d}) Π_{u<t} α_{u,0}/Σ_d α_{u,d}`.
    pub fn prior_mean(&self, t: usize, c: usize) -> Result<f64> {
        self.check_index(t, c)?;
        let mut p = StickProduct::new(self.horizon());
        for u in 1..t {
            p.mul(self.alpha(u, 0) / self.row_total(u));
        }
        Ok(self.alpha(t, c) / self.row_total(t) * p.value())
    }

    /// `E[ΔF(t,c)²]`.
    pub fn prior_second_moment(&self, t: usize, c: usize) -> Result<f64> {
        self.check_index(t, c)?;
        let mut p = StickProduct::new(self.horizon());
        for u in 1..t {
            let (a0, s) = (self.alpha(u, 0), self.row_total(u));
            p.mul(a0 * (1.0 + a0) / (s * (1.0 + s)));
        }
        let (ac, s) = (self.alpha(t, c), self.row_total(t));
        Ok(ac * (1.0 + ac) / (s * (1.0 + s)) * p.value())
    }

    /// `Var[ΔF(t,c)]` in the factored form
    /// `E[ΔF] · ((1+α_{t,c})/(1+Σα_t) Π_{u<t} (1+α_{u,0})/(1+Σα_u) − E[ΔF])`.
    pub fn prior_variance(&self, t: usize, c: usize) -> Result<f64> {
        let mean = self.prior_mean(t, c)?;
        let mut p = StickProduct::new(self.horizon());
        for u in 1..t {
            p.mul((1.0 + self.alpha(u, 0)) / (1.0 + self.row_total(u)));
        }
        let ratio = (1.0 + self.alpha(t, c)) / (1.0 + self.row_total(t)) * p.value();
        Ok(mean * (ratio - mean))
    }

    /// The full prior mean, which is also the predictive distribution of a
    /// new observation: `ΔF*(t,d) = E[ΔF(t,d)]`.
    pub fn mean_subdistribution(&self) -> SubdistributionFunction {
        let horizon = self.horizon();
        let mut increments = Vec::with_capacity(horizon * self.k);
        let mut survival = Vec::with_capacity(horizon + 1);
        let mut p = StickProduct::new(horizon);
        survival.push(1.0);
        for t in 1..=horizon {
            let total = self.row_total(t);
            let stick = p.value();
            for c in 1..=self.k {
                increments.push(self.alpha(t, c) / total * stick);
            }
            p.mul(self.alpha(t, 0) / total);
            survival.push(p.value());
        }
        SubdistributionFunction::from_parts(self.grid.clone(), self.k, increments, survival)
            .expect("prior mean is a valid subdistribution")
    }
}

/// `SBS(ω, F0)`: an SBS process centered on `F0` with precision weights `ω_t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenteredSbs {
    f0: SubdistributionFunction,
    omega: Vec<f64>,
}

impl CenteredSbs {
    pub fn new(f0: SubdistributionFunction, omega: Vec<f64>) -> Result<Self> {
        if omega.len() != f0.horizon() {
            return Err(Error::DimensionMismatch {
                expected: f0.horizon(),
                got: omega.len(),
            });
        }
        if let Some(w) = omega.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "precision weights must be finite and positive, got {w}"
            )));
        }
        Ok(Self { f0, omega })
    }

    /// Same weight on every bin.
    pub fn with_constant_weight(f0: SubdistributionFunction, omega: f64) -> Result<Self> {
        let n = f0.horizon();
        Self::new(f0, vec![omega; n])
    }

    pub fn centering(&self) -> &SubdistributionFunction {
        &self.f0
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// `α_{t,c} = ω_t ΔF0(t,c)` and `α_{t,0} = ω_t (1 − Σ_d F0(t,d))`.
    ///
    /// When `F0` exhausts its mass at bin `e < T` the returned parameters stop
    /// at `e`, with `α_{e,0} = 0`. A zero increment `ΔF0(t,c) = 0` on a bin
    /// that still carries survival mass is rejected.
    pub fn to_parameters(&self) -> Result<SbsParameters> {
        let k = self.f0.k();
        let mut horizon = self.f0.horizon();
        for t in 1..=self.f0.horizon() {
            if self.f0.survival(t) <= EXHAUSTED {
                horizon = t;
                break;
            }
        }
        let mut alpha = Vec::with_capacity(horizon * (k + 1));
        for t in 1..=horizon {
            let w = self.omega[t - 1];
            let s = if t == horizon && self.f0.survival(t) <= EXHAUSTED {
                0.0
            } else {
                self.f0.survival(t)
            };
            alpha.push(w * s);
            for c in 1..=k {
                let inc = self.f0.increment(t, c);
                if inc <= 0.0 {
                    return Err(Error::DegenerateCentering {
                        bin: t,
                        reason: format!("zero centering increment for cause {c}"),
                    });
                }
                alpha.push(w * inc);
            }
        }
        let grid = self.f0.grid().truncated(horizon)?;
        SbsParameters::new(grid, k, alpha)
    }
}

/// Independent `W_t ~ Dirichlet(α_{t,0}, …, α_{t,k})`, one per bin.
pub fn sample_weights<R: Rng + ?Sized>(params: &SbsParameters, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    (1..=params.horizon())
        .map(|t| sample_dirichlet(params.row(t), rng))
        .collect()
}

/// Stick-breaking map from the Dirichlet weights to `F`.
pub fn subdistribution_from_weights(
    grid: &TimeGrid,
    weights: &[Vec<f64>],
) -> Result<SubdistributionFunction> {
    let k = weights
        .first()
        .map(|w| w.len().saturating_sub(1))
        .ok_or_else(|| Error::InvalidParameter("no weights".into()))?;
    if weights.len() != grid.horizon() {
        return Err(Error::DimensionMismatch {
            expected: grid.horizon(),
            got: weights.len(),
        });
    }
    let mut increments = Vec::with_capacity(grid.horizon() * k);
    let mut survival = Vec::with_capacity(grid.horizon() + 1);
    let mut stick = StickProduct::new(grid.horizon());
    survival.push(1.0);
    for w in weights {
        let remaining = stick.value();
        increments.extend(w[1..].iter().map(|x| x * remaining));
        stick.mul(w[0]);
        survival.push(stick.value());
    }
    SubdistributionFunction::from_parts(grid.clone(), k, increments, survival)
}

/// Draws `F ~ SBS(α)` by stick-breaking.
pub fn sample_sbs<R: Rng + ?Sized>(
    params: &SbsParameters,
    rng: &mut R,
) -> Result<SubdistributionFunction> {
    let weights = sample_weights(params, rng)?;
    subdistribution_from_weights(params.grid(), &weights)
}

/// Draws `F ~ SBS(α)` through the all-cause beta-Stacy decomposition:
/// `G` is beta-Stacy with `U_t ~ Beta(Σ_{d≥1} α_{t,d}, α_{t,0})`, the
/// cause split `V_t ~ Dirichlet_k(α_{t,1}, …, α_{t,k})` is independent of
/// `G`, and `ΔF(t,c) = V_{t,c} ΔG(t)`. For `k = 1`, `V_t ≡ 1`.
pub fn sample_via_decomposition<R: Rng + ?Sized>(
    params: &SbsParameters,
    rng: &mut R,
) -> Result<SubdistributionFunction> {
    let k = params.k();
    let horizon = params.horizon();
    let mut increments = Vec::with_capacity(horizon * k);
    let mut survival = Vec::with_capacity(horizon + 1);
    let mut stick = StickProduct::new(horizon);
    survival.push(1.0);
    for t in 1..=horizon {
        let row = params.row(t);
        let events: f64 = row[1..].iter().sum();
        // (U_t, 1 − U_t)
        let u = sample_dirichlet(&[events, row[0]], rng)?;
        let split = if k == 1 {
            vec![1.0]
        } else {
            sample_dirichlet(&row[1..], rng)?
        };
        let dg = u[0] * stick.value();
        increments.extend(split.iter().map(|v| v * dg));
        stick.mul(u[1]);
        survival.push(stick.value());
    }
    SubdistributionFunction::from_parts(params.grid().clone(), k, increments, survival)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subdist::hazards_from_subdistribution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(t: usize) -> TimeGrid {
        TimeGrid::unit(t).unwrap()
    }

    #[test]
    fn recurrency_single_dominant_bin() {
        let p = SbsParameters::from_rows(unit(1), &[vec![1.0, 1e9]]).unwrap();
        assert!(p.validate_recurrency(1e-6));
    }

    #[test]
    fn recurrency_halving_products() {
        let long = SbsParameters::constant(unit(20), 1, 1.0).unwrap();
        assert!((long.recurrency_product() - 2f64.powi(-20)).abs() < 1e-18);
        assert!(long.validate_recurrency(1e-3));
        let short = SbsParameters::constant(unit(5), 1, 1.0).unwrap();
        assert!((short.recurrency_product() - 0.03125).abs() < 1e-15);
        assert!(!short.validate_recurrency(1e-3));
    }

    #[test]
    fn recurrency_of_centered_parameters_is_the_centering_tail() {
        let f0 = SubdistributionFunction::new(unit(3), 2, vec![0.3, 0.2, 0.2, 0.1, 0.1, 0.0999999])
            .unwrap();
        let c = CenteredSbs::with_constant_weight(f0.clone(), 3.0).unwrap();
        let p = c.to_parameters().unwrap();
        assert!((p.recurrency_product() - f0.tail_mass()).abs() < 1e-15);
        assert!(p.validate_recurrency(1e-6));
    }

    #[test]
    fn centered_arithmetic() {
        let f0 = SubdistributionFunction::new(unit(1), 2, vec![0.5, 0.25]).unwrap();
        let p = CenteredSbs::with_constant_weight(f0, 4.0)
            .unwrap()
            .to_parameters()
            .unwrap();
        assert_eq!(p.row(1), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn exhausted_centering_keeps_terminal_bin_only() {
        let f0 = SubdistributionFunction::new(unit(2), 2, vec![0.25; 4]).unwrap();
        let p = CenteredSbs::with_constant_weight(f0, 1.0)
            .unwrap()
            .to_parameters()
            .unwrap();
        assert_eq!(p.row(1), &[0.5, 0.25, 0.25]);
        assert_eq!(p.row(2), &[0.0, 0.25, 0.25]);
        assert!(p.validate_recurrency(0.0));

        // mass exhausted at bin 2 of 4: later bins are dropped
        let f0 = SubdistributionFunction::new(unit(4), 1, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let p = CenteredSbs::with_constant_weight(f0, 2.0)
            .unwrap()
            .to_parameters()
            .unwrap();
        assert_eq!(p.horizon(), 2);
        assert_eq!(p.row(2), &[0.0, 1.0]);
    }

    #[test]
    fn interior_zero_increment_is_rejected() {
        let f0 = SubdistributionFunction::new(unit(2), 2, vec![0.3, 0.0, 0.2, 0.2]).unwrap();
        let err = CenteredSbs::with_constant_weight(f0, 1.0)
            .unwrap()
            .to_parameters()
            .unwrap_err();
        assert!(matches!(err, Error::DegenerateCentering { bin: 1, .. }));
    }

    #[test]
    fn zero_alpha_rejected_except_terminal_survival() {
        assert!(SbsParameters::from_rows(unit(2), &[vec![0.0, 1.0], vec![1.0, 1.0]]).is_err());
        assert!(SbsParameters::from_rows(unit(2), &[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(SbsParameters::from_rows(unit(2), &[vec![1.0, 1.0], vec![0.0, 1.0]]).is_ok());
    }

    #[test]
    fn first_bin_mean_is_dirichlet_mean() {
        let p = SbsParameters::from_rows(unit(1), &[vec![1.0, 1.0, 2.0]]).unwrap();
        assert_eq!(p.prior_mean(1, 1).unwrap(), 0.25);
        assert_eq!(p.prior_mean(1, 2).unwrap(), 0.5);
    }

    #[test]
    fn second_bin_mean_hand_value() {
        let p = SbsParameters::constant(unit(2), 2, 1.0).unwrap();
        assert!((p.prior_mean(2, 1).unwrap() - 1.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn moments_match_beta_oracle() {
        // ΔF(1,1) ~ Beta(1, 3): E[X²] = 1·2/(4·5), Var = 3/(16·5)
        let p = SbsParameters::from_rows(unit(1), &[vec![1.0, 1.0, 2.0]]).unwrap();
        assert!((p.prior_second_moment(1, 1).unwrap() - 0.1).abs() < 1e-16);
        assert!((p.prior_variance(1, 1).unwrap() - 0.0375).abs() < 1e-16);
    }

    #[test]
    fn variance_forms_agree() {
        let rows = [vec![0.7, 1.3, 0.4], vec![2.0, 0.5, 0.9], vec![0.3, 3.0, 1.1]];
        let p = SbsParameters::from_rows(unit(3), &rows).unwrap();
        for t in 1..=3 {
            for c in 1..=2 {
                let m = p.prior_mean(t, c).unwrap();
                let v = p.prior_second_moment(t, c).unwrap() - m * m;
                assert!((v - p.prior_variance(t, c).unwrap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn index_errors() {
        let p = SbsParameters::constant(unit(2), 2, 1.0).unwrap();
        assert!(p.prior_mean(0, 1).is_err());
        assert!(p.prior_mean(3, 1).is_err());
        assert!(p.prior_variance(1, 3).is_err());
        assert!(p.prior_second_moment(1, 0).is_err());
    }

    fn random_centering(rng: &mut ChaCha8Rng, horizon: usize, k: usize) -> SubdistributionFunction {
        let mut raw: Vec<f64> = (0..horizon * k + 1).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|x| *x /= total);
        raw.pop();
        SubdistributionFunction::new(unit(horizon), k, raw).unwrap()
    }

    #[test]
    fn centering_recovers_f0_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let f0 = random_centering(&mut rng, 6, 3);
            let omega: Vec<f64> = (0..6).map(|_| rng.random_range(0.1..50.0)).collect();
            let p = CenteredSbs::new(f0.clone(), omega).unwrap().to_parameters().unwrap();
            for t in 1..=6 {
                for c in 1..=3 {
                    let m = p.prior_mean(t, c).unwrap();
                    assert!((m - f0.increment(t, c)).abs() <= 1e-15 * f0.increment(t, c).max(1.0));
                }
            }
        }
    }

    #[test]
    fn variance_decreases_in_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let f0 = random_centering(&mut rng, 5, 2);
        let weights = [1e-3, 0.1, 1.0, 10.0, 1e3, 1e6];
        for t in 1..=5 {
            for c in 1..=2 {
                let vars: Vec<f64> = weights
                    .iter()
                    .map(|&w| {
                        CenteredSbs::with_constant_weight(f0.clone(), w)
                            .unwrap()
                            .to_parameters()
                            .unwrap()
                            .prior_variance(t, c)
                            .unwrap()
                    })
                    .collect();
                assert!(vars.windows(2).all(|p| p[1] < p[0]), "{vars:?}");
            }
        }
    }

    #[test]
    fn variance_limits_in_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f0 = random_centering(&mut rng, 4, 2);
        let at = |w: f64| {
            CenteredSbs::with_constant_weight(f0.clone(), w)
                .unwrap()
                .to_parameters()
                .unwrap()
        };
        let (tight, loose) = (at(1e12), at(1e-12));
        for t in 1..=4 {
            for c in 1..=2 {
                let p0 = f0.increment(t, c);
                assert!(tight.prior_variance(t, c).unwrap() < 1e-11);
                let v = loose.prior_variance(t, c).unwrap();
                assert!((v - p0 * (1.0 - p0)).abs() < 1e-9, "t={t} c={c} {v}");
            }
        }
    }

    #[test]
    fn stick_mass_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = SbsParameters::from_rows(
            unit(4),
            &[vec![2.0, 0.3, 0.5], vec![0.1, 1.0, 1.0], vec![5.0, 0.01, 0.2], vec![1.0, 1.0, 1.0]],
        )
        .unwrap();
        for _ in 0..200 {
            for f in [sample_sbs(&p, &mut rng).unwrap(), sample_via_decomposition(&p, &mut rng).unwrap()] {
                let total: f64 = f.increments().iter().sum();
                assert!((total + f.tail_mass() - 1.0).abs() < 1e-12);
                assert!(f.increments().iter().all(|x| *x >= 0.0));
            }
        }
    }

    #[test]
    fn exhausted_first_bin_puts_all_mass_there() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = SbsParameters::from_rows(unit(3), &[vec![1e-12, 1.0, 2.0], vec![1.0; 3], vec![1.0; 3]])
            .unwrap();
        for _ in 0..50 {
            let f = sample_sbs(&p, &mut rng).unwrap();
            assert!((f.event_mass(1) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn log_space_path_matches_linear_products() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![3.0 + i as f64 * 0.1, 0.2, 0.1]).collect();
        let long = SbsParameters::from_rows(unit(60), &rows).unwrap();
        let mut linear = 1.0;
        for t in 1..60 {
            linear *= long.alpha(t, 0) / long.row_total(t);
        }
        let direct = long.alpha(60, 1) / long.row_total(60) * linear;
        let m = long.prior_mean(60, 1).unwrap();
        assert!((m - direct).abs() < 1e-13 * direct);
    }

    #[test]
    fn weights_are_the_hazard_increments() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let p = SbsParameters::from_rows(unit(5), &vec![vec![2.0, 1.0, 0.5]; 5]).unwrap();
        for _ in 0..100 {
            let w = sample_weights(&p, &mut rng).unwrap();
            let f = subdistribution_from_weights(p.grid(), &w).unwrap();
            let a = hazards_from_subdistribution(&f).unwrap();
            for t in 1..=5 {
                assert!((1.0 - a.total(t) - w[t - 1][0]).abs() < 1e-9);
                for c in 1..=2 {
                    assert!((a.increment(t, c) - w[t - 1][c]).abs() < 1e-9);
                }
            }
        }
    }
}
