//! Discrete-time frequentist estimators from count statistics.
//!
//! Each estimate is defined only up to the first bin with an empty risk set
//! `n_t = l_t + Σ_d m_{t,d} = 0`; from there on it is reported as `None`.

use crate::posterior::CountStatistics;

/// Product-limit survival `Ŝ(t) = Π_{u≤t} (1 − Σ_{d≥1} m_{u,d} / n_u)`, `t = 1..T`.
pub fn kaplan_meier(stats: &CountStatistics) -> Vec<Option<f64>> {
    let mut s = 1.0;
    let mut defined = true;
    (1..=stats.horizon())
        .map(|t| {
            let n = stats.risk_set(t);
            defined &= n > 0;
            if !defined {
                return None;
            }
            s *= 1.0 - stats.events_at(t) as f64 / n as f64;
            Some(s)
        })
        .collect()
}

/// Cumulative cause-`c` hazard `Â_c(t) = Σ_{u≤t} m_{u,c} / n_u`, `t = 1..T`.
pub fn nelson_aalen(stats: &CountStatistics, c: usize) -> Vec<Option<f64>> {
    assert!((1..=stats.k()).contains(&c), "cause {c} out of range");
    let mut a = 0.0;
    let mut defined = true;
    (1..=stats.horizon())
        .map(|t| {
            let n = stats.risk_set(t);
            defined &= n > 0;
            if !defined {
                return None;
            }
            a += stats.count(t, c) as f64 / n as f64;
            Some(a)
        })
        .collect()
}

/// Nonparametric cumulative incidence `F̂(t,c) = Σ_{u≤t} Ŝ(u−1) ΔÂ_c(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeIncidenceEstimate {
    k: usize,
    /// Row-major `T × k`.
    values: Vec<Option<f64>>,
    survival: Vec<Option<f64>>,
}

impl CumulativeIncidenceEstimate {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn horizon(&self) -> usize {
        self.survival.len()
    }

    /// `F̂(t,c)`, or `None` where undefined.
    pub fn cumulative(&self, t: usize, c: usize) -> Option<f64> {
        assert!((1..=self.k).contains(&c) && (1..=self.horizon()).contains(&t));
        self.values[(t - 1) * self.k + (c - 1)]
    }

    /// `ΔF̂(t,c)`, or `None` where undefined.
    pub fn increment(&self, t: usize, c: usize) -> Option<f64> {
        let current = self.cumulative(t, c)?;
        let previous = if t == 1 { 0.0 } else { self.cumulative(t - 1, c)? };
        Some(current - previous)
    }

    /// `Ŝ(t)`, or `None` where undefined.
    pub fn survival(&self, t: usize) -> Option<f64> {
        self.survival[t - 1]
    }
}

pub fn kalbfleisch_prentice(stats: &CountStatistics) -> CumulativeIncidenceEstimate {
    let k = stats.k();
    let horizon = stats.horizon();
    let survival = kaplan_meier(stats);
    let mut values = Vec::with_capacity(horizon * k);
    let mut acc = vec![0.0; k];
    for t in 1..=horizon {
        let previous = if t == 1 { Some(1.0) } else { survival[t - 2] };
        match (previous, survival[t - 1]) {
            (Some(s_prev), Some(_)) => {
                let n = stats.risk_set(t) as f64;
                for (c, a) in acc.iter_mut().enumerate() {
                    *a += s_prev * stats.count(t, c + 1) as f64 / n;
                    values.push(Some(*a));
                }
            }
            _ => values.extend(std::iter::repeat_n(None, k)),
        }
    }
    CumulativeIncidenceEstimate { k, values, survival }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::{count_statistics, CensoredObservation};
    use proptest::prelude::*;

    fn stats(pairs: &[(usize, usize)], horizon: usize, k: usize) -> CountStatistics {
        let data: Vec<_> = pairs.iter().map(|&(t, d)| CensoredObservation::new(t, d)).collect();
        count_statistics(&data, horizon, k).unwrap()
    }

    #[test]
    fn single_event() {
        let s = stats(&[(1, 1)], 2, 1);
        let km = kaplan_meier(&s);
        assert_eq!(km[0], Some(0.0));
        assert_eq!(km[1], None);
        let f = kalbfleisch_prentice(&s);
        assert_eq!(f.cumulative(1, 1), Some(1.0));
        assert_eq!(f.cumulative(2, 1), None);
    }

    #[test]
    fn hand_computed_example() {
        let s = stats(&[(1, 1), (2, 2), (2, 0)], 2, 2);
        let km = kaplan_meier(&s);
        assert!((km[0].unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let na = nelson_aalen(&s, 2);
        assert!((na[1].unwrap() - 0.5).abs() < 1e-15);
        let f = kalbfleisch_prentice(&s);
        assert!((f.cumulative(2, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.cumulative(1, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_risk_set_is_undefined_not_zero() {
        let s = stats(&[(1, 0)], 3, 1);
        assert_eq!(kaplan_meier(&s), vec![Some(1.0), None, None]);
        assert_eq!(nelson_aalen(&s, 1), vec![Some(0.0), None, None]);
    }

    proptest! {
        #[test]
        fn incidence_and_survival_sum_to_one(
            pairs in proptest::collection::vec((1usize..=6, 0usize..=3), 1..40)
        ) {
            let s = stats(&pairs, 6, 3);
            let f = kalbfleisch_prentice(&s);
            for t in 1..=6 {
                if let Some(surv) = f.survival(t) {
                    let total: f64 = (1..=3).map(|c| f.cumulative(t, c).unwrap()).sum();
                    prop_assert!((total + surv - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
