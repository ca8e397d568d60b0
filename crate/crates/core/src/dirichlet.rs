//! Dirichlet draws by normalizing independent Gamma variates.
//!
//! Gamma variates are generated on the log scale for shapes below one
//! (`G_a = G_{a+1} U^{1/a}`), so very small shapes do not underflow every
//! component to zero and the normalization stays finite. Zero shapes give an
//! exact zero component.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};

use crate::error::{Error, Result};

fn log_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        Gamma::new(shape, 1.0).expect("shape >= 1").sample(rng).ln()
    } else {
        let boosted = Gamma::new(shape + 1.0, 1.0).expect("shape + 1 > 0").sample(rng);
        let u: f64 = Open01.sample(rng);
        boosted.ln() + u.ln() / shape
    }
}

/// One draw from `Dirichlet(alpha)`; zero entries of `alpha` yield zero weights.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "Dirichlet parameters must be finite and nonnegative, got {a}"
        )));
    }
    let positive = alpha.iter().filter(|&&a| a > 0.0).count();
    if positive == 0 {
        return Err(Error::InvalidParameter(
            "Dirichlet needs at least one positive parameter".into(),
        ));
    }
    if positive == 1 {
        return Ok(alpha.iter().map(|&a| if a > 0.0 { 1.0 } else { 0.0 }).collect());
    }
    let logs: Vec<f64> = alpha
        .iter()
        .map(|&a| {
            if a > 0.0 {
                log_gamma_variate(a, rng)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_lie_on_the_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for alpha in [vec![1.0, 2.0, 3.0], vec![1e-3, 1e-4, 5.0], vec![1e-200, 1e-200]] {
            for _ in 0..100 {
                let w = sample_dirichlet(&alpha, &mut rng).unwrap();
                assert!(w.iter().all(|x| x.is_finite() && *x >= 0.0));
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_shape_gives_zero_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = sample_dirichlet(&[0.0, 2.0, 1.0], &mut rng).unwrap();
        assert_eq!(w[0], 0.0);
        assert_eq!(sample_dirichlet(&[0.0, 3.0], &mut rng).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_negative_or_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(sample_dirichlet(&[-1.0, 1.0], &mut rng).is_err());
        assert!(sample_dirichlet(&[0.0, 0.0], &mut rng).is_err());
    }

    #[test]
    fn component_means_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let alpha = [0.5, 1.5, 3.0];
        let n = 40_000;
        let mut sums = [0.0; 3];
        for _ in 0..n {
            let w = sample_dirichlet(&alpha, &mut rng).unwrap();
            for i in 0..3 {
                sums[i] += w[i];
            }
        }
        for i in 0..3 {
            let p = alpha[i] / 5.0;
            let se = (p * (1.0 - p) / 6.0 / n as f64).sqrt();
            assert!((sums[i] / n as f64 - p).abs() < 4.0 * se);
        }
    }
}
