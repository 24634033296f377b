//! Periodic phase-space grids.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fft::signed_index;
use crate::{Error, Result};

/// Default relative decay floor at the box boundary.
pub const DEFAULT_FLOOR: f64 = 1e-12;

/// One periodic axis: `len` nodes `min + j·h`, `h = (max − min)/len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, len: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Grid(format!(
                "axis bounds [{min}, {max}] are not an interval"
            )));
        }
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Grid(format!(
                "axis size {len} is not a power of two ≥ 2"
            )));
        }
        Ok(Self { min, max, len })
    }

    pub fn length(&self) -> f64 {
        self.max - self.min
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.len as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.point(j)).collect()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    /// Dual frequency of bin `j` in FFT order.
    pub fn frequency(&self, j: usize) -> f64 {
        signed_index(j, self.len) as f64 / self.length()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.frequency(j)).collect()
    }

    pub fn frequency_spacing(&self) -> f64 {
        1.0 / self.length()
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.len / 2
    }

    /// Maps `x` into `[min, max)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length();
        let mut y = x - l * ((x - self.min) / l).floor();
        if y >= self.max {
            y -= l;
        }
        y
    }

    /// Nearest periodic image of `x` relative to `origin`.
    pub fn minimum_image(&self, x: f64, origin: f64) -> f64 {
        let l = self.length();
        let d = x - origin;
        origin + d - l * (d / l).round()
    }

    pub fn refined(&self) -> Self {
        Self {
            len: 2 * self.len,
            ..*self
        }
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "spatial dimension {n}; only 1 and 2 are supported"
        )))
    }
}

fn row_major_coords(axes: &[Axis], mut flat: usize, out: &mut [f64]) {
    for (a, o) in axes.iter().zip(out.iter_mut()).rev() {
        *o = a.point(flat % a.len);
        flat /= a.len;
    }
}

/// Position-space grid carrying wavefunctions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    axes: Vec<Axis>,
}

impl SpatialGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        check_dimension(axes.len())?;
        Ok(Self { axes })
    }

    pub fn uniform(n: usize, min: f64, max: f64, len: usize) -> Result<Self> {
        check_dimension(n)?;
        let a = Axis::new(min, max, len)?;
        Ok(Self {
            axes: alloc::vec![a; n],
        })
    }

    pub fn n(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn node(&self, flat: usize, out: &mut [f64]) {
        row_major_coords(&self.axes, flat, out);
    }
}

/// Phase-space grid: `n` position axes followed by `n` momentum axes,
/// stored row-major with the last momentum axis contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
    floor: f64,
}

impl GridSpec {
    /// Same box and size on every position axis, likewise for momentum.
    pub fn new(n: usize, x: (f64, f64), nx: usize, k: (f64, f64), nk: usize) -> Result<Self> {
        check_dimension(n)?;
        let ax = Axis::new(x.0, x.1, nx)?;
        let ak = Axis::new(k.0, k.1, nk)?;
        let mut axes = alloc::vec![ax; n];
        axes.extend(core::iter::repeat_n(ak, n));
        Self::from_axes(axes)
    }

    /// Default 1D grid: box [−8, 8] in both variables.
    pub fn default_1d(nodes: usize) -> Result<Self> {
        Self::new(1, (-8.0, 8.0), nodes, (-8.0, 8.0), nodes)
    }

    pub fn from_axes(axes: Vec<Axis>) -> Result<Self> {
        if !axes.len().is_multiple_of(2) {
            return Err(Error::Grid(
                "phase space needs an even number of axes".into(),
            ));
        }
        let n = axes.len() / 2;
        check_dimension(n)?;
        for i in 0..n {
            let r = axes[i].length() * axes[n + i].spacing();
            let integral = |v: f64| (v - v.round()).abs() < 1e-9 * v.max(1.0) && v.round() >= 1.0;
            if !(integral(r) || integral(1.0 / r)) {
                return Err(Error::Grid(format!(
                    "momentum spacing {} is not an integer multiple or fraction of 1/{}",
                    axes[n + i].spacing(),
                    axes[i].length()
                )));
            }
        }
        Ok(Self {
            axes,
            floor: DEFAULT_FLOOR,
        })
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn n(&self) -> usize {
        self.axes.len() / 2
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn x_axes(&self) -> &[Axis] {
        &self.axes[..self.n()]
    }

    pub fn k_axes(&self) -> &[Axis] {
        &self.axes[self.n()..]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of nodes in the momentum block of one position node.
    pub fn k_block(&self) -> usize {
        self.k_axes().iter().map(|a| a.len).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(Axis::length).product()
    }

    pub fn spatial(&self) -> SpatialGrid {
        SpatialGrid {
            axes: self.x_axes().to_vec(),
        }
    }

    /// Phase-space coordinates `(x, k)` of a flat index.
    pub fn node(&self, flat: usize, out: &mut [f64]) {
        row_major_coords(&self.axes, flat, out);
    }

    /// Spectral coordinates `(X, K)` of a flat index, FFT order.
    pub fn frequency(&self, mut flat: usize, out: &mut [f64]) {
        for (a, o) in self.axes.iter().zip(out.iter_mut()).rev() {
            *o = a.frequency(flat % a.len);
            flat /= a.len;
        }
    }

    /// Same box, twice the nodes per axis.
    pub fn refined(&self) -> Self {
        Self {
            axes: self.axes.iter().map(Axis::refined).collect(),
            floor: self.floor,
        }
    }

    /// Largest boundary magnitude relative to the field maximum.
    pub fn boundary_ratio(&self, values: &[f64]) -> f64 {
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        let shape = self.shape();
        let mut worst = 0.0f64;
        let mut idx = alloc::vec![0usize; shape.len()];
        for (flat, v) in values.iter().enumerate() {
            let mut f = flat;
            for (d, s) in idx.iter_mut().zip(&shape).rev() {
                *d = f % s;
                f /= s;
            }
            if idx.iter().zip(&shape).any(|(&d, &s)| d == 0 || d == s - 1) {
                worst = worst.max(v.abs());
            }
        }
        worst / peak
    }

    pub fn check_decay(&self, values: &[f64]) -> Result<()> {
        let b = self.boundary_ratio(values);
        if b > self.floor {
            Err(Error::Truncation {
                boundary: b,
                floor: self.floor,
            })
        } else {
            Ok(())
        }
    }
}
