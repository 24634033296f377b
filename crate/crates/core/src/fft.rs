//! Radix-2 complex FFT with precomputed twiddles, plus strided
//! multi-axis application.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Columns gathered together when transforming a non-contiguous axis.
const BLOCK: usize = 16;

#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    rev: Vec<u32>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Grid(alloc::format!(
                "FFT length {n} is not a power of two"
            )));
        }
        let twiddles = (0..n / 2)
            .map(|j| {
                let (s, c) = (-2.0 * PI * j as f64 / n as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        let bits = n.trailing_zeros();
        let rev = (0..n as u32)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (32 - bits)
                }
            })
            .collect();
        Ok(Self { n, twiddles, rev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `X_m = Σ_j x_j e^{−2πi jm/n}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// `x_j = Σ_m X_m e^{+2πi jm/n}`, unnormalized.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.rev[i] as usize;
            if j > i {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                let (lo, hi) = data[start..start + size].split_at_mut(half);
                for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let w = self.twiddles[j * step];
                    let w = if inverse { w.conj() } else { w };
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            size *= 2;
        }
    }

    /// Transforms every line of `data` (row-major with `shape`) along `axis`.
    pub fn along_axis(&self, data: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool) {
        let len = shape[axis];
        debug_assert_eq!(len, self.n);
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        if stride == 1 {
            for line in data.chunks_exact_mut(len) {
                self.run(line, inverse);
            }
            return;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); BLOCK * len];
        for o in 0..outer {
            let base = o * len * stride;
            let mut c0 = 0;
            while c0 < stride {
                let width = BLOCK.min(stride - c0);
                for j in 0..len {
                    let row = base + j * stride + c0;
                    for b in 0..width {
                        scratch[b * len + j] = data[row + b];
                    }
                }
                for b in 0..width {
                    self.run(&mut scratch[b * len..(b + 1) * len], inverse);
                }
                for j in 0..len {
                    let row = base + j * stride + c0;
                    for b in 0..width {
                        data[row + b] = scratch[b * len + j];
                    }
                }
                c0 += width;
            }
        }
    }
}

/// Signed frequency index in `fftfreq` order; the Nyquist bin is negative.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}
