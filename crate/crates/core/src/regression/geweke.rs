//! Geweke convergence diagnostic.
//!
//! The z-score compares the mean of an early window of the chain with the
//! mean of a late window, each standardized by a spectral estimate of the
//! long-run variance. The spectral density at frequency zero comes from an
//! autoregressive fit (Yule-Walker, order picked by AIC).

use crate::error::{Error, Result};

pub const MIN_CHAIN_LENGTH: usize = 20;
pub const DEFAULT_FIRST_FRACTION: f64 = 0.1;
pub const DEFAULT_LAST_FRACTION: f64 = 0.5;

/// Spectral density at zero of a stationary series, `σ²/(1 − Σφ)²` from the
/// AIC-best autoregression. `None` for a constant series.
pub fn spectral_density_at_zero(x: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let max_order = ((10.0 * (n as f64).log10()) as usize).min(n - 1);
    let acov: Vec<f64> = (0..=max_order)
        .map(|lag| {
            x[..n - lag]
                .iter()
                .zip(&x[lag..])
                .map(|(a, b)| (a - mean) * (b - mean))
                .sum::<f64>()
                / n as f64
        })
        .collect();
    if !(acov[0] > 0.0) {
        return None;
    }

    // Levinson-Durbin recursion over orders 0..=max_order
    let mut phi: Vec<f64> = Vec::new();
    let mut innovation = acov[0];
    let mut best = (n as f64 * innovation.ln(), innovation, Vec::new());
    for order in 1..=max_order {
        let reflection = (acov[order] - phi.iter().enumerate().map(|(j, p)| p * acov[order - 1 - j]).sum::<f64>())
            / innovation;
        let mut next = vec![0.0; order];
        for j in 0..order - 1 {
            next[j] = phi[j] - reflection * phi[order - 2 - j];
        }
        next[order - 1] = reflection;
        phi = next;
        innovation *= 1.0 - reflection * reflection;
        if !(innovation > 0.0) {
            break;
        }
        let aic = n as f64 * innovation.ln() + 2.0 * order as f64;
        if aic < best.0 {
            best = (aic, innovation, phi.clone());
        }
    }
    let (_, variance, coefficients) = best;
    let denom = 1.0 - coefficients.iter().sum::<f64>();
    Some(variance / (denom * denom))
}

/// Geweke z-score of one series from the first `frac_a` and last `frac_b`
/// of its draws. `Ok(None)` when both windows are constant.
pub fn geweke_z(series: &[f64], frac_a: f64, frac_b: f64) -> Result<Option<f64>> {
    if series.len() < MIN_CHAIN_LENGTH {
        return Err(Error::ChainTooShort {
            len: series.len(),
            min: MIN_CHAIN_LENGTH,
        });
    }
    if !(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "window fractions must be positive with sum ≤ 1, got {frac_a} and {frac_b}"
        )));
    }
    let n = series.len();
    let len_a = ((frac_a * n as f64) as usize).max(2);
    let len_b = ((frac_b * n as f64) as usize).max(2);
    let first = &series[..len_a];
    let last = &series[n - len_b..];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let var_a = spectral_density_at_zero(first).unwrap_or(0.0) / len_a as f64;
    let var_b = spectral_density_at_zero(last).unwrap_or(0.0) / len_b as f64;
    let se = (var_a + var_b).sqrt();
    if !(se > 0.0) {
        return Ok(None);
    }
    Ok(Some((mean(first) - mean(last)) / se))
}

/// Per-coordinate z-scores of a chain stored draw by draw.
pub fn geweke_diagnostic(draws: &[Vec<f64>], frac_a: f64, frac_b: f64) -> Result<Vec<Option<f64>>> {
    let dim = draws.first().map_or(0, Vec::len);
    (0..dim)
        .map(|i| {
            let series: Vec<f64> = draws.iter().map(|d| d[i]).collect();
            geweke_z(&series, frac_a, frac_b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn iid_normal_chains_pass() {
        let passing = (0..40)
            .filter(|&s| {
                let z = geweke_z(&normals(s, 10_000), 0.1, 0.5).unwrap().unwrap();
                z.abs() < 3.0
            })
            .count();
        assert!(passing >= 39, "{passing}/40");
    }

    #[test]
    fn mean_shift_is_flagged() {
        let mut x = normals(7, 2000);
        for v in &mut x[1000..] {
            *v += 1.0;
        }
        let z = geweke_z(&x, 0.1, 0.5).unwrap().unwrap();
        assert!(z < -8.0, "{z}");
    }

    #[test]
    fn constant_chain_is_undefined() {
        assert_eq!(geweke_z(&[2.5; 100], 0.1, 0.5).unwrap(), None);
    }

    #[test]
    fn short_chain_is_rejected() {
        assert!(matches!(
            geweke_z(&[0.0; 19], 0.1, 0.5),
            Err(Error::ChainTooShort { len: 19, min: 20 })
        ));
    }

    #[test]
    fn autoregressive_spectrum_at_zero() {
        // AR(1) with φ = 0.5 and unit innovations: S(0) = 1 / (1 − φ)² = 4
        let e = normals(11, 200_000);
        let mut x = vec![0.0; e.len()];
        for i in 1..e.len() {
            x[i] = 0.5 * x[i - 1] + e[i];
        }
        let s = spectral_density_at_zero(&x).unwrap();
        assert!((s - 4.0).abs() < 0.2, "{s}");
        let white = spectral_density_at_zero(&normals(12, 200_000)).unwrap();
        assert!((white - 1.0).abs() < 0.03, "{white}");
    }
}
