//! Discrete realization of the continuous Fourier transform on a grid.
//!
//! Forward: `f̂(X_m) ≈ Π h · e^{−2πi x_min X_m} · DFT(f)_m`, so that samples
//! approximate `∫ e^{−2πi x·X} f dx` rather than raw DFT coefficients.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fft::Fft;
use crate::grid::Axis;
use crate::Result;

#[derive(Debug, Clone)]
pub struct Transform {
    shape: Vec<usize>,
    ffts: Vec<Fft>,
    forward_phase: Vec<Vec<Complex64>>,
    inverse_phase: Vec<Vec<Complex64>>,
}

impl Transform {
    pub fn new(axes: &[Axis]) -> Result<Self> {
        let mut ffts = Vec::with_capacity(axes.len());
        let mut forward_phase = Vec::with_capacity(axes.len());
        let mut inverse_phase = Vec::with_capacity(axes.len());
        for a in axes {
            ffts.push(Fft::new(a.len)?);
            let h = a.spacing();
            let dx = a.frequency_spacing();
            let (fwd, inv): (Vec<_>, Vec<_>) = (0..a.len)
                .map(|m| {
                    let (s, c) = (-2.0 * PI * a.min * a.frequency(m)).sin_cos();
                    let e = Complex64::new(c, s);
                    (e * h, e.conj() * dx)
                })
                .unzip();
            forward_phase.push(fwd);
            inverse_phase.push(inv);
        }
        Ok(Self {
            shape: axes.iter().map(|a| a.len).collect(),
            ffts,
            forward_phase,
            inverse_phase,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.forward_axis(data, axis);
        }
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.inverse_axis(data, axis);
        }
    }

    pub fn forward_axis(&self, data: &mut [Complex64], axis: usize) {
        self.ffts[axis].along_axis(data, &self.shape, axis, false);
        self.scale_axis(data, axis, &self.forward_phase[axis]);
    }

    pub fn inverse_axis(&self, data: &mut [Complex64], axis: usize) {
        self.scale_axis(data, axis, &self.inverse_phase[axis]);
        self.ffts[axis].along_axis(data, &self.shape, axis, true);
    }

    /// Unscaled FFT along one axis (used by propagators whose phases cancel).
    pub fn raw_axis(&self, data: &mut [Complex64], axis: usize, inverse: bool) {
        self.ffts[axis].along_axis(data, &self.shape, axis, inverse);
    }

    fn scale_axis(&self, data: &mut [Complex64], axis: usize, phase: &[Complex64]) {
        let len = self.shape[axis];
        let stride: usize = self.shape[axis + 1..].iter().product();
        for (i, chunk) in data.chunks_exact_mut(stride).enumerate() {
            let p = phase[i % len];
            for v in chunk {
                *v *= p;
            }
        }
    }
}
