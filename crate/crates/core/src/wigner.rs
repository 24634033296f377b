//! Wigner transforms, the smoothing operator Φ, and split-step evolution of
//! the Wigner equation
//! `∂ₜW + 2πk·∂ₓW + (i/ε)[V(x + εy/2) − V(x − εy/2)]^∧ W = 0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::field::{spectral_forward, spectral_inverse, PhaseSpaceField, Wavefunction};
use crate::fourier::Transform;
use crate::grid::GridSpec;
use crate::params::SemiclassicalParams;
use crate::potentials::FourierPotential;
use crate::schrodinger::MixedStateEnsemble;
use crate::{Error, Result};

/// Relative imaginary residue tolerated before a field is declared non-real.
pub const RESIDUE_THRESHOLD: f64 = 1e-10;

fn cis(phase: f64) -> Complex64 {
    let (s, c) = phase.sin_cos();
    Complex64::new(c, s)
}

fn real_part(grid: &GridSpec, data: &[Complex64]) -> Result<PhaseSpaceField> {
    let peak = data.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
    let residue = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if residue > RESIDUE_THRESHOLD * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::ImaginaryResidue {
            residue: residue / peak,
            threshold: RESIDUE_THRESHOLD,
        });
    }
    PhaseSpaceField::new(grid.clone(), data.iter().map(|c| c.re).collect())
}

/// Spectral multiplier `e^{−(επ/2)(σx²|X|² + σk²|K|²)}` of Φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingMultiplier {
    pub sigma_x: f64,
    pub sigma_k: f64,
    pub epsilon: f64,
}

impl SmoothingMultiplier {
    pub fn new(params: &SemiclassicalParams) -> Self {
        Self {
            sigma_x: params.sigma_x,
            sigma_k: params.sigma_k,
            epsilon: params.epsilon,
        }
    }

    /// `freq = (X_1..X_n, K_1..K_n)`.
    pub fn value(&self, freq: &[f64]) -> f64 {
        let n = freq.len() / 2;
        let x2: f64 = freq[..n].iter().map(|v| v * v).sum();
        let k2: f64 = freq[n..].iter().map(|v| v * v).sum();
        let sx2 = self.sigma_x * self.sigma_x;
        let sk2 = self.sigma_k * self.sigma_k;
        (-(self.epsilon * PI / 2.0) * (sx2 * x2 + sk2 * k2)).exp()
    }
}

/// `W̃ = ΦW`.
pub fn smooth(w: &PhaseSpaceField, params: &SemiclassicalParams) -> Result<PhaseSpaceField> {
    let m = SmoothingMultiplier::new(params);
    let mut s = spectral_forward(w)?;
    s.multiply(|z| Complex64::new(m.value(z), 0.0));
    spectral_inverse(&s)
}

/// `W(x,k) = ∫ e^{−2πi y·k} u(x + εy/2) ū(x − εy/2) dy`.
///
/// Half-shifts are spectral; separations `ε|y_i|` beyond half the box are
/// dropped so that periodic images never pair up.
pub fn wigner_pure(
    u: &Wavefunction,
    params: &SemiclassicalParams,
    grid: &GridSpec,
) -> Result<PhaseSpaceField> {
    let n = grid.n();
    if u.grid().axes() != grid.x_axes() {
        return Err(Error::Grid(
            "wavefunction grid differs from the position part of the phase-space grid".into(),
        ));
    }
    let eps = params.epsilon;
    let xs = u.grid().clone();
    let nx = xs.len();
    let kb = grid.k_block();
    let xt = Transform::new(xs.axes())?;
    let mut uhat = u.values().to_vec();
    for a in 0..n {
        xt.raw_axis(&mut uhat, a, false);
    }
    let inv_n = 1.0 / nx as f64;
    let x_axes = grid.x_axes();
    let k_axes = grid.k_axes();
    let mut freqs = vec![[0.0f64; 2]; nx];
    for (i, f) in freqs.iter_mut().enumerate() {
        let mut rem = i;
        for a in (0..n).rev() {
            f[a] = x_axes[a].frequency(rem % x_axes[a].len);
            rem /= x_axes[a].len;
        }
    }
    let mut rho = vec![Complex64::new(0.0, 0.0); nx * kb];
    let mut plus = vec![Complex64::new(0.0, 0.0); nx];
    let mut minus = plus.clone();
    for m in 0..kb {
        let mut y = [0.0; 2];
        let mut rem = m;
        for a in (0..n).rev() {
            y[a] = k_axes[a].frequency(rem % k_axes[a].len);
            rem /= k_axes[a].len;
        }
        if (0..n).any(|a| (eps * y[a]).abs() > x_axes[a].length() / 2.0) {
            continue;
        }
        for i in 0..nx {
            let phase: f64 = (0..n).map(|a| freqs[i][a] * y[a]).sum::<f64>() * PI * eps;
            let e = cis(phase) * inv_n;
            plus[i] = uhat[i] * e;
            minus[i] = uhat[i] * e.conj();
        }
        for a in 0..n {
            xt.raw_axis(&mut plus, a, true);
            xt.raw_axis(&mut minus, a, true);
        }
        for i in 0..nx {
            rho[i * kb + m] = plus[i] * minus[i].conj();
        }
    }
    // Σ_y e^{−2πi y·k_j} R(y): phase for the k-box offset, then a plain DFT.
    let dy: f64 = k_axes.iter().map(|a| a.frequency_spacing()).product();
    let mut offset = vec![Complex64::new(0.0, 0.0); kb];
    for (m, o) in offset.iter_mut().enumerate() {
        let mut rem = m;
        let mut phase = 0.0;
        for a in (0..n).rev() {
            phase -= 2.0 * PI * k_axes[a].frequency(rem % k_axes[a].len) * k_axes[a].min;
            rem /= k_axes[a].len;
        }
        *o = cis(phase) * dy;
    }
    // Rows on a Nyquist y have no mirror −y on the grid; pair them with their
    // partial mirror so the sum stays Hermitian.
    let mirrors: Vec<(usize, usize)> = (0..kb)
        .filter_map(|m| {
            let mut rem = m;
            let mut mirror = 0;
            let mut stride = 1;
            let mut nyquist = false;
            for a in (0..n).rev() {
                let len = k_axes[a].len;
                let j = rem % len;
                nyquist |= k_axes[a].is_nyquist(j);
                mirror += ((len - j) % len) * stride;
                stride *= len;
                rem /= len;
            }
            (nyquist && mirror >= m).then_some((m, mirror))
        })
        .collect();
    for row in rho.chunks_exact_mut(kb) {
        row.iter_mut().zip(&offset).for_each(|(r, o)| *r *= o);
        for &(m, mirror) in &mirrors {
            let sym = (row[m] + row[mirror].conj()) * 0.5;
            row[m] = sym;
            row[mirror] = sym.conj();
        }
    }
    let full = Transform::new(grid.axes())?;
    for a in n..2 * n {
        full.raw_axis(&mut rho, a, false);
    }
    real_part(grid, &rho)
}

/// Weighted sum of member Wigner transforms.
pub fn wigner_mixed(
    ens: &MixedStateEnsemble,
    params: &SemiclassicalParams,
    grid: &GridSpec,
) -> Result<PhaseSpaceField> {
    let mut acc = vec![0.0; grid.len()];
    for (w, u) in ens.members() {
        let wu = wigner_pure(u, params, grid)?;
        acc.iter_mut()
            .zip(wu.values())
            .for_each(|(a, v)| *a += w * v);
    }
    PhaseSpaceField::new(grid.clone(), acc)
}

/// Precomputed Strang splitting for one grid, potential, ε and step.
#[derive(Debug, Clone)]
pub struct WignerPropagator {
    grid: GridSpec,
    transform: Transform,
    dt: f64,
    transport_half: Vec<Complex64>,
    transport_full: Vec<Complex64>,
    kick: Vec<Complex64>,
}

impl WignerPropagator {
    pub fn new(
        grid: &GridSpec,
        pot: &FourierPotential,
        params: &SemiclassicalParams,
        dt: f64,
    ) -> Result<Self> {
        let n = grid.n();
        if pot.n() != n {
            return Err(Error::Data("potential and grid dimensions differ".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step {dt} must be positive")));
        }
        let eps = params.epsilon;
        if let Some(smax) = pot.max_frequency() {
            for a in grid.k_axes() {
                if eps * smax / 2.0 > a.length() / 4.0 {
                    return Err(Error::Grid(format!(
                        "momentum shift εS/2 = {} exceeds a quarter of the k-box",
                        eps * smax / 2.0
                    )));
                }
            }
        }
        let axes = grid.axes();
        let len = grid.len();
        let x_count: usize = grid.x_axes().iter().map(|a| a.len).product();
        let k_count = grid.k_block();
        let mut transport_half = Vec::with_capacity(len);
        let mut transport_full = Vec::with_capacity(len);
        let mut kick = Vec::with_capacity(len);
        let mut idx = [0usize; 4];
        let mut x = [0.0; 2];
        let mut xp = [0.0; 2];
        let mut xm = [0.0; 2];
        for flat in 0..len {
            let mut rem = flat;
            for a in (0..2 * n).rev() {
                idx[a] = rem % axes[a].len;
                rem /= axes[a].len;
            }
            // (X, k): transport multiplier, Nyquist frequencies held fixed.
            let nyq_x = (0..n).any(|a| axes[a].is_nyquist(idx[a]));
            let xk: f64 = (0..n)
                .map(|a| axes[a].frequency(idx[a]) * axes[n + a].point(idx[n + a]))
                .sum();
            let (th, tf) = if nyq_x {
                (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
            } else {
                (
                    cis(-4.0 * PI * PI * xk * dt / 2.0),
                    cis(-4.0 * PI * PI * xk * dt),
                )
            };
            transport_half.push(th / x_count as f64);
            transport_full.push(tf / x_count as f64);
            // (x, y): potential phase.
            let nyq_y = (0..n).any(|a| axes[n + a].is_nyquist(idx[n + a]));
            let phase = if nyq_y {
                Complex64::new(1.0, 0.0)
            } else {
                for a in 0..n {
                    x[a] = axes[a].point(idx[a]);
                    let half = eps * axes[n + a].frequency(idx[n + a]) / 2.0;
                    xp[a] = x[a] + half;
                    xm[a] = x[a] - half;
                }
                let dv = pot.value(&xp[..n]) - pot.value(&xm[..n]);
                cis(-dt * dv / eps)
            };
            kick.push(phase / k_count as f64);
        }
        Ok(Self {
            grid: grid.clone(),
            transform: Transform::new(axes)?,
            dt,
            transport_half,
            transport_full,
            kick,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Advances `steps` full steps, calling `observe(step, field)` after
    /// every `every`-th step (and never at step 0).
    pub fn run(
        &self,
        w0: &PhaseSpaceField,
        steps: usize,
        every: usize,
        mut observe: impl FnMut(usize, &PhaseSpaceField),
    ) -> Result<PhaseSpaceField> {
        if w0.grid().axes() != self.grid.axes() {
            return Err(Error::Grid(
                "initial field lives on a different grid".into(),
            ));
        }
        self.grid.check_decay(w0.values())?;
        if steps == 0 {
            return Ok(w0.clone());
        }
        let n = self.grid.n();
        let mut data: Vec<Complex64> = w0
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let t = &self.transform;
        let mul =
            |d: &mut [Complex64], m: &[Complex64]| d.iter_mut().zip(m).for_each(|(v, w)| *v *= w);
        let to_x =
            |d: &mut [Complex64], inverse: bool| (0..n).for_each(|a| t.raw_axis(d, a, inverse));
        let to_k =
            |d: &mut [Complex64], inverse: bool| (n..2 * n).for_each(|a| t.raw_axis(d, a, inverse));
        to_x(&mut data, false);
        mul(&mut data, &self.transport_half);
        for step in 1..=steps {
            to_x(&mut data, true);
            to_k(&mut data, true);
            mul(&mut data, &self.kick);
            to_k(&mut data, false);
            let last = step == steps;
            let snapshot = every > 0 && step % every == 0 && !last;
            to_x(&mut data, false);
            if snapshot {
                let mut probe = data.clone();
                mul(&mut probe, &self.transport_half);
                to_x(&mut probe, true);
                observe(step, &real_part(&self.grid, &probe)?);
            }
            mul(
                &mut data,
                if last {
                    &self.transport_half
                } else {
                    &self.transport_full
                },
            );
        }
        to_x(&mut data, true);
        let out = real_part(&self.grid, &data)?;
        if every > 0 && steps.is_multiple_of(every) {
            observe(steps, &out);
        }
        Ok(out)
    }
}

fn step_count(t: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("final time {t} must be ≥ 0")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step {dt} must be positive")));
    }
    let steps = (t / dt - 1e-9).ceil().max(0.0) as usize;
    Ok((steps, if steps == 0 { dt } else { t / steps as f64 }))
}

/// Wigner evolution to time `t` with steps no longer than `dt`.
pub fn evolve_wigner(
    w0: &PhaseSpaceField,
    pot: &FourierPotential,
    params: &SemiclassicalParams,
    t: f64,
    dt: f64,
) -> Result<PhaseSpaceField> {
    let (steps, dt) = step_count(t, dt)?;
    WignerPropagator::new(w0.grid(), pot, params, dt)?.run(w0, steps, 0, |_, _| {})
}

/// Snapshots `(t, W(t))` every `every` steps, starting with `W0`.
pub fn evolve_wigner_path(
    w0: &PhaseSpaceField,
    pot: &FourierPotential,
    params: &SemiclassicalParams,
    t: f64,
    dt: f64,
    every: usize,
) -> Result<Vec<(f64, PhaseSpaceField)>> {
    let (steps, dt) = step_count(t, dt)?;
    let mut path = vec![(0.0, w0.clone())];
    let every = every.max(1);
    let last =
        WignerPropagator::new(w0.grid(), pot, params, dt)?.run(w0, steps, every, |s, f| {
            path.push((s as f64 * dt, f.clone()));
        })?;
    if steps % every != 0 {
        path.push((t, last));
    }
    Ok(path)
}

/// Smoothed Wigner function at time `t`: `Φ W(t)`.
pub fn evolve_swt(
    w0: &PhaseSpaceField,
    pot: &FourierPotential,
    params: &SemiclassicalParams,
    t: f64,
    dt: f64,
) -> Result<PhaseSpaceField> {
    smooth(&evolve_wigner(w0, pot, params, t, dt)?, params)
}

/// `Σᵢ max_t ‖2πKᵢ Ŵ(t)‖_{L²}`.
pub fn m1_diagnostic(path: &[PhaseSpaceField]) -> Result<f64> {
    let first = path
        .first()
        .ok_or_else(|| Error::Data("empty path".into()))?;
    let n = first.grid().n();
    let mut best = [0.0f64; 2];
    for w in path {
        let s = w.spectrum()?;
        for (i, b) in best.iter_mut().enumerate().take(n) {
            *b = b.max(s.weighted_l2(|z| 2.0 * PI * z[n + i]));
        }
    }
    Ok(best[..n].iter().sum())
}
