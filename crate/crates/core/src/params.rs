//! Semiclassical parameter set: ε, smoothing widths and the mollification
//! scales derived from them.

use alloc::format;
use core::f64::consts::PI;

use crate::{Error, Result};

/// Mollification scale `η = ε(π/2·max((4n−1)σx², 4n/σk² − σx²) + 1)`.
pub fn derive_eta(n: usize, epsilon: f64, sigma_x: f64, sigma_k: f64) -> Result<f64> {
    if !(n == 1 || n == 2) {
        return Err(Error::Domain(format!("dimension n = {n} must be 1 or 2")));
    }
    for (name, v) in [
        ("epsilon", epsilon),
        ("sigma_x", sigma_x),
        ("sigma_k", sigma_k),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} = {v} must be positive")));
        }
    }
    let nf = n as f64;
    let sx2 = sigma_x * sigma_x;
    let spread = ((4.0 * nf - 1.0) * sx2).max(4.0 * nf / (sigma_k * sigma_k) - sx2);
    Ok(epsilon * (0.5 * PI * spread + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalParams {
    pub n: usize,
    pub epsilon: f64,
    pub sigma_x: f64,
    pub sigma_k: f64,
    pub eta: f64,
    pub eta_prime: f64,
}

impl SemiclassicalParams {
    pub fn new(n: usize, epsilon: f64, sigma_x: f64, sigma_k: f64) -> Result<Self> {
        let eta = derive_eta(n, epsilon, sigma_x, sigma_k)?;
        let eta_prime = eta + epsilon * PI * sigma_x * sigma_x / 2.0;
        Ok(Self {
            n,
            epsilon,
            sigma_x,
            sigma_k,
            eta,
            eta_prime,
        })
    }

    /// `σx = σk = 1`: the Husimi case.
    pub fn husimi(n: usize, epsilon: f64) -> Result<Self> {
        Self::new(n, epsilon, 1.0, 1.0)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.n, epsilon, self.sigma_x, self.sigma_k)
    }

    /// Constant `1 + π/2·max{σx², σk²}` of the unsmoothing estimates.
    pub fn unsmoothing_constant(&self) -> f64 {
        1.0 + 0.5 * PI * (self.sigma_x * self.sigma_x).max(self.sigma_k * self.sigma_k)
    }
}
