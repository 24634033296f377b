//! Real phase-space fields, their spectra, and complex wavefunctions.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fourier::Transform;
use crate::grid::{GridSpec, SpatialGrid};
use crate::{Error, Result};

fn check_finite<T: Copy>(values: &[T], finite: impl Fn(T) -> bool) -> Result<()> {
    match values.iter().position(|&v| !finite(v)) {
        Some(i) => Err(Error::Data(format!("non-finite sample at index {i}"))),
        None => Ok(()),
    }
}

/// Real function on a phase-space grid, with an optional cached spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceField {
    grid: GridSpec,
    values: Vec<f64>,
    spectrum: Option<Vec<Complex64>>,
}

impl PhaseSpaceField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Data(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        check_finite(&values, f64::is_finite)?;
        Ok(Self {
            grid,
            values,
            spectrum: None,
        })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let values = alloc::vec![0.0; grid.len()];
        Self {
            grid,
            values,
            spectrum: None,
        }
    }

    /// Samples `f(z)` with `z = (x_1..x_n, k_1..k_n)`.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut z = [0.0; 4];
        let d = grid.axes().len();
        let values = (0..grid.len())
            .map(|i| {
                grid.node(i, &mut z[..d]);
                f(&z[..d])
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `∫ W dx dk`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// `∫ W φ dx dk`.
    pub fn pair_with(&self, mut phi: impl FnMut(&[f64]) -> f64) -> f64 {
        let d = self.grid.axes().len();
        let mut z = [0.0; 4];
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            self.grid.node(i, &mut z[..d]);
            acc += v * phi(&z[..d]);
        }
        acc * self.grid.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.axes() != other.grid.axes() {
            return Err(Error::Grid("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
            spectrum: None,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
            spectrum: None,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        let values = self.values.iter().map(|v| c * v).collect();
        Self {
            grid: self.grid.clone(),
            values,
            spectrum: None,
        }
    }

    /// Computes and keeps the spectrum for later norm evaluations.
    pub fn with_spectrum(mut self) -> Result<Self> {
        if self.spectrum.is_none() {
            self.spectrum = Some(spectral_forward(&self)?.values);
        }
        Ok(self)
    }

    pub fn cached_spectrum(&self) -> Option<&[Complex64]> {
        self.spectrum.as_deref()
    }

    /// Cached spectrum if present, otherwise a fresh transform.
    pub fn spectrum(&self) -> Result<Spectrum> {
        match &self.spectrum {
            Some(s) => Ok(Spectrum {
                grid: self.grid.clone(),
                values: s.clone(),
            }),
            None => spectral_forward(self),
        }
    }
}

/// Samples of `f̂(X, K)` on the dual grid, FFT ordering on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Data("spectrum length does not match grid".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Dual-grid cell volume `Π 1/L`.
    pub fn cell_volume(&self) -> f64 {
        self.grid
            .axes()
            .iter()
            .map(|a| a.frequency_spacing())
            .product()
    }

    /// `(∫ |w(Z) f̂(Z)|² dZ)^{1/2}` for a real weight.
    pub fn weighted_l2(&self, mut weight: impl FnMut(&[f64]) -> f64) -> f64 {
        let d = self.grid.axes().len();
        let mut z = [0.0; 4];
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            self.grid.frequency(i, &mut z[..d]);
            let w = weight(&z[..d]);
            acc += w * w * v.norm_sqr();
        }
        (acc * self.cell_volume()).sqrt()
    }

    /// Multiplies each sample by `m(Z)`.
    pub fn multiply(&mut self, mut m: impl FnMut(&[f64]) -> Complex64) {
        let d = self.grid.axes().len();
        let mut z = [0.0; 4];
        for (i, v) in self.values.iter_mut().enumerate() {
            self.grid.frequency(i, &mut z[..d]);
            *v *= m(&z[..d]);
        }
    }
}

/// Forward transform with quadrature weights.
pub fn spectral_forward(field: &PhaseSpaceField) -> Result<Spectrum> {
    check_finite(&field.values, f64::is_finite)?;
    let t = Transform::new(field.grid.axes())?;
    let mut v: Vec<Complex64> = field
        .values
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    t.forward(&mut v);
    Ok(Spectrum {
        grid: field.grid.clone(),
        values: v,
    })
}

/// Inverse transform; the real part is kept.
pub fn spectral_inverse(spectrum: &Spectrum) -> Result<PhaseSpaceField> {
    let t = Transform::new(spectrum.grid.axes())?;
    let mut v = spectrum.values.clone();
    t.inverse(&mut v);
    let values = v.iter().map(|c| c.re).collect();
    PhaseSpaceField::new(spectrum.grid.clone(), values)
}

/// Complex function on a position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl Wavefunction {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Data(
                "wavefunction length does not match grid".into(),
            ));
        }
        check_finite(&values, |c: Complex64| c.re.is_finite() && c.im.is_finite())?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpatialGrid, mut f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let d = grid.n();
        let mut x = [0.0; 2];
        let values = (0..grid.len())
            .map(|i| {
                grid.node(i, &mut x[..d]);
                f(&x[..d])
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let nrm = self.norm();
        if !(nrm > 0.0) {
            return Err(Error::DegenerateNormalizer(nrm));
        }
        for v in &mut self.values {
            *v /= nrm;
        }
        Ok(self)
    }

    /// `∫ ū v dx`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.cell_volume()
    }

    /// Samples of `û(ξ)` in FFT order.
    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        let t = Transform::new(self.grid.axes())?;
        let mut v = self.values.clone();
        t.forward(&mut v);
        Ok(v)
    }

    /// Largest boundary magnitude relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        let shape = self.grid.shape();
        let mut worst = 0.0f64;
        for (flat, v) in self.values.iter().enumerate() {
            let mut f = flat;
            let mut edge = false;
            for s in shape.iter().rev() {
                let d = f % s;
                edge |= d == 0 || d == s - 1;
                f /= s;
            }
            if edge {
                worst = worst.max(v.norm());
            }
        }
        worst / peak
    }

    pub(crate) fn from_parts(grid: SpatialGrid, values: Vec<Complex64>) -> Self {
        Self { grid, values }
    }
}
