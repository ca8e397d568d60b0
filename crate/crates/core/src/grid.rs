//! Discrete time axis.
//!
//! Bin `t` (1-based) covers the right-closed interval `(τ_{t-1}, τ_t]` with
//! `τ_0 = 0`. Without explicit edges the grid is the unit grid `τ_t = t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: usize,
    /// Upper edges `τ_1..τ_T`; `None` means `τ_t = t`.
    edges: Option<Vec<f64>>,
}

impl TimeGrid {
    /// Unit grid with `τ_t = t`.
    pub fn unit(horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        Ok(Self {
            horizon,
            edges: None,
        })
    }

    /// Grid with equal-width bins `τ_t = t * width`.
    pub fn uniform(horizon: usize, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bin width must be positive, got {width}"
            )));
        }
        if width == 1.0 {
            return Self::unit(horizon);
        }
        Self::with_edges((1..=horizon).map(|t| t as f64 * width).collect())
    }

    /// Grid from explicit upper edges `τ_1 < τ_2 < ... < τ_T`, all positive.
    pub fn with_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        let mut prev = 0.0;
        for (i, &e) in edges.iter().enumerate() {
            if !(e.is_finite() && e > prev) {
                return Err(Error::InvalidParameter(format!(
                    "bin edges must be finite and strictly increasing from 0 (edge {} = {e})",
                    i + 1
                )));
            }
            prev = e;
        }
        Ok(Self {
            horizon: edges.len(),
            edges: Some(edges),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_unit(&self) -> bool {
        self.edges.is_none()
    }

    /// `τ_t` for `t = 0..=T`.
    pub fn edge(&self, t: usize) -> f64 {
        assert!(t <= self.horizon, "edge index {t} beyond horizon {}", self.horizon);
        if t == 0 {
            return 0.0;
        }
        match &self.edges {
            Some(e) => e[t - 1],
            None => t as f64,
        }
    }

    /// `τ_t - τ_{t-1}`.
    pub fn width(&self, t: usize) -> f64 {
        self.edge(t) - self.edge(t - 1)
    }

    /// Bin containing the raw time `x`, or `None` when `x <= 0` or `x > τ_T`.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x > 0.0) || x > self.edge(self.horizon) {
            return None;
        }
        match &self.edges {
            None => Some(x.ceil() as usize),
            // first edge with τ_t >= x
            Some(e) => Some(e.partition_point(|&edge| edge < x) + 1),
        }
    }

    /// Same grid cut down to its first `horizon` bins.
    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || horizon > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "cannot truncate a {}-bin grid to {horizon} bins",
                self.horizon
            )));
        }
        Ok(Self {
            horizon,
            edges: self.edges.as_ref().map(|e| e[..horizon].to_vec()),
        })
    }
}
