//! Phase-space machinery for semiclassical quantum dynamics.
//!
//! Wigner and smoothed-Wigner transforms, a spectral Wigner propagator, a
//! semi-Lagrangian Liouville solver on mollified potentials, and the Sobolev
//! norms used to measure how far the quantum and classical pictures drift
//! apart as ε → 0.
//!
//! Fourier convention throughout: `f̂(X) = ∫ e^{−2πi x·X} f(x) dx`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

mod error;
pub mod fft;
pub mod field;
pub mod fit;
pub mod fourier;
pub mod grid;
pub mod interp;
pub mod liouville;
pub mod norms;
pub mod params;
pub mod potentials;
pub mod schrodinger;
pub mod wigner;

pub use error::{Error, Result};
pub use field::{PhaseSpaceField, Spectrum, Wavefunction};
pub use grid::{Axis, GridSpec, SpatialGrid};
pub use params::{derive_eta, SemiclassicalParams};
pub use potentials::FourierPotential;

pub use num_complex::Complex64;
