//! Least-squares slopes of log(error) against log(ε).

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    /// Indices of the rows that entered the fit.
    pub used: Vec<usize>,
}

/// Fits `log e = slope·log ε + intercept` over the rows not masked out;
/// zero or non-finite errors are skipped.
pub fn fit_slope(eps: &[f64], err: &[f64], excluded: &[bool]) -> Result<SlopeFit> {
    let used: Vec<usize> = (0..eps.len())
        .filter(|&i| !excluded.get(i).copied().unwrap_or(false))
        .filter(|&i| err[i] > 0.0 && err[i].is_finite() && eps[i] > 0.0)
        .collect();
    if used.len() < 3 {
        return Err(Error::FitDegenerate { usable: used.len() });
    }
    let n = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|&i| eps[i].ln()).collect();
    let ys: Vec<f64> = used.iter().map(|&i| err[i].ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::FitDegenerate { usable: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        residual,
        used,
    })
}
