//! Regression parameters and their unconstrained working coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the multinomial-logistic / cause-specific time model.
///
/// `b[c]` (for causes `1..k-1`) are the logistic coefficients, `v[c]` the
/// time-model coefficients of cause `c+1`, and `u[c] > 0` its shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTheta {
    pub b: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub u: Vec<f64>,
}

impl RegressionTheta {
    pub fn k(&self) -> usize {
        self.u.len()
    }

    pub fn dim(&self) -> usize {
        self.v.first().map_or(0, Vec::len)
    }

    /// Checks shapes and positivity.
    pub fn validate(&self, k: usize, p: usize) -> Result<()> {
        let ok = self.b.len() + 1 == k
            && self.v.len() == k
            && self.u.len() == k
            && self.b.iter().chain(&self.v).all(|x| x.len() == p);
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "theta does not match k = {k} causes and {p} covariates"
            )));
        }
        if let Some(u) = self.u.iter().find(|u| !(u.is_finite() && **u > 0.0)) {
            return Err(Error::InvalidParameter(format!("shape {u} must be positive")));
        }
        Ok(())
    }
}

/// How the shape parameters enter the working vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShapeMode {
    /// Shapes are free and sampled as `log u`.
    Free,
    /// Every shape is held at the given value.
    Fixed(f64),
}

/// Packing of [`RegressionTheta`] into a flat vector
/// `[b_1, …, b_{k-1}, v_1, …, v_k, log u_1, …, log u_k]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaLayout {
    pub k: usize,
    pub p: usize,
    pub shapes: ShapeMode,
}

impl ThetaLayout {
    pub fn new(k: usize, p: usize, shapes: ShapeMode) -> Result<Self> {
        if k == 0 || p == 0 {
            return Err(Error::InvalidParameter(
                "need at least one cause and one covariate (the intercept)".into(),
            ));
        }
        if let ShapeMode::Fixed(u) = shapes {
            if !(u.is_finite() && u > 0.0) {
                return Err(Error::InvalidParameter(format!("fixed shape {u} must be positive")));
            }
        }
        Ok(Self { k, p, shapes })
    }

    fn coefficient_len(&self) -> usize {
        (2 * self.k - 1) * self.p
    }

    /// Length of the working vector.
    pub fn len(&self) -> usize {
        match self.shapes {
            ShapeMode::Free => self.coefficient_len() + self.k,
            ShapeMode::Fixed(_) => self.coefficient_len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the first `log u` entry, when shapes are free.
    pub fn shape_offset(&self) -> Option<usize> {
        matches!(self.shapes, ShapeMode::Free).then(|| self.coefficient_len())
    }

    pub fn unpack(&self, x: &[f64]) -> RegressionTheta {
        assert_eq!(x.len(), self.len(), "working vector length");
        let p = self.p;
        let row = |i: usize| x[i * p..(i + 1) * p].to_vec();
        let b = (0..self.k - 1).map(row).collect();
        let v = (self.k - 1..2 * self.k - 1).map(row).collect();
        let u = match self.shapes {
            ShapeMode::Free => x[self.coefficient_len()..].iter().map(|l| l.exp()).collect(),
            ShapeMode::Fixed(u) => vec![u; self.k],
        };
        RegressionTheta { b, v, u }
    }

    pub fn pack(&self, theta: &RegressionTheta) -> Vec<f64> {
        let mut x: Vec<f64> = theta.b.iter().chain(&theta.v).flatten().copied().collect();
        if let ShapeMode::Free = self.shapes {
            x.extend(theta.u.iter().map(|u| u.ln()));
        }
        x
    }

    /// `θ` in natural coordinates (shapes as `u`, not `log u`), in working order.
    pub fn natural(&self, theta: &RegressionTheta) -> Vec<f64> {
        let mut x: Vec<f64> = theta.b.iter().chain(&theta.v).flatten().copied().collect();
        if let ShapeMode::Free = self.shapes {
            x.extend(&theta.u);
        }
        x
    }

    /// Names matching [`Self::natural`], e.g. `b1_1`, `v2_1`, `u1`.
    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        for c in 1..self.k {
            names.extend((1..=self.p).map(|j| format!("b{c}_{j}")));
        }
        for c in 1..=self.k {
            names.extend((1..=self.p).map(|j| format!("v{c}_{j}")));
        }
        if let ShapeMode::Free = self.shapes {
            names.extend((1..=self.k).map(|c| format!("u{c}")));
        }
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_unpack_round_trip() {
        let layout = ThetaLayout::new(3, 2, ShapeMode::Free).unwrap();
        let theta = RegressionTheta {
            b: vec![vec![0.1, 0.2], vec![0.3, 0.4]],
            v: vec![vec![-1.0, 0.5], vec![-2.0, 0.0], vec![-3.0, 1.0]],
            u: vec![0.5, 1.0, 2.0],
        };
        let x = layout.pack(&theta);
        assert_eq!(x.len(), layout.len());
        let back = layout.unpack(&x);
        assert_eq!(back.b, theta.b);
        assert_eq!(back.v, theta.v);
        for (a, b) in back.u.iter().zip(&theta.u) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(layout.names()[0], "b1_1");
        assert_eq!(layout.names()[10], "u1");
    }

    #[test]
    fn fixed_shapes_are_not_in_the_vector() {
        let layout = ThetaLayout::new(2, 1, ShapeMode::Fixed(1.0)).unwrap();
        assert_eq!(layout.len(), 3);
        let theta = layout.unpack(&[0.0, -1.0, -2.0]);
        assert_eq!(theta.u, vec![1.0, 1.0]);
        assert_eq!(layout.shape_offset(), None);
    }
}
