//! Split-step propagation of `iε∂ₜu = (−ε²/2 Δ + V)u` and the initial data
//! used by the experiments: coherent states, finite ensembles and
//! phase-space Gaussians.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::field::{PhaseSpaceField, Wavefunction};
use crate::fourier::Transform;
use crate::grid::{Axis, GridSpec, SpatialGrid, DEFAULT_FLOOR};
use crate::params::SemiclassicalParams;
use crate::potentials::FourierPotential;
use crate::{Error, Result};

/// Strang splitting schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlan {
    pub dt: f64,
    pub steps: usize,
    pub epsilon: f64,
}

impl PropagationPlan {
    /// Smallest number of equal steps of length at most `dt_max` covering `t`.
    pub fn new(t: f64, dt_max: f64, epsilon: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("final time {t} must be ≥ 0")));
        }
        if !(dt_max > 0.0) {
            return Err(Error::Domain(format!(
                "time step {dt_max} must be positive"
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon {epsilon} must be positive")));
        }
        let steps = (t / dt_max - 1e-9).ceil().max(0.0) as usize;
        let dt = if steps == 0 { dt_max } else { t / steps as f64 };
        Ok(Self { dt, steps, epsilon })
    }

    /// `dt ≤ ε/50`.
    pub fn default_for(t: f64, epsilon: f64) -> Result<Self> {
        Self::new(t, epsilon / 50.0, epsilon)
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

fn kinetic_multiplier(grid: &SpatialGrid, tau: f64, epsilon: f64) -> Vec<Complex64> {
    let axes = grid.axes();
    let scale = grid.len() as f64;
    (0..grid.len())
        .map(|mut flat| {
            let mut xi2 = 0.0;
            for a in axes.iter().rev() {
                let f = a.frequency(flat % a.len);
                xi2 += f * f;
                flat /= a.len;
            }
            let (s, c) = (-tau * epsilon * 4.0 * PI * PI * xi2 / 2.0).sin_cos();
            Complex64::new(c, s) / scale
        })
        .collect()
}

fn potential_phase(
    grid: &SpatialGrid,
    pot: &FourierPotential,
    dt: f64,
    epsilon: f64,
) -> Vec<Complex64> {
    let d = grid.n();
    let mut x = [0.0; 2];
    (0..grid.len())
        .map(|i| {
            grid.node(i, &mut x[..d]);
            let (s, c) = (-dt * pot.value(&x[..d]) / epsilon).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

fn check_normalized(u: &Wavefunction) -> Result<()> {
    let nrm = u.norm();
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "initial state has norm {nrm}, expected 1"
        )));
    }
    Ok(())
}

/// Strang split-step solution with the default step `ε/50`.
pub fn evolve_schrodinger(
    u0: &Wavefunction,
    pot: &FourierPotential,
    params: &SemiclassicalParams,
    t: f64,
) -> Result<Wavefunction> {
    evolve_schrodinger_with(u0, pot, &PropagationPlan::default_for(t, params.epsilon)?)
}

pub fn evolve_schrodinger_with(
    u0: &Wavefunction,
    pot: &FourierPotential,
    plan: &PropagationPlan,
) -> Result<Wavefunction> {
    check_normalized(u0)?;
    if pot.n() != u0.grid().n() {
        return Err(Error::Data(
            "potential and wavefunction dimensions differ".into(),
        ));
    }
    if plan.steps == 0 {
        return Ok(u0.clone());
    }
    let grid = u0.grid().clone();
    let t = Transform::new(grid.axes())?;
    let d = grid.n();
    let half = kinetic_multiplier(&grid, plan.dt / 2.0, plan.epsilon);
    let full = kinetic_multiplier(&grid, plan.dt, plan.epsilon);
    let kick = potential_phase(&grid, pot, plan.dt, plan.epsilon);
    let mut u = u0.values().to_vec();
    let fft = |u: &mut [Complex64], inverse: bool| {
        for a in 0..d {
            t.raw_axis(u, a, inverse);
        }
    };
    let apply =
        |u: &mut [Complex64], m: &[Complex64]| u.iter_mut().zip(m).for_each(|(v, w)| *v *= w);
    fft(&mut u, false);
    apply(&mut u, &half);
    for step in 0..plan.steps {
        fft(&mut u, true);
        apply(&mut u, &kick);
        fft(&mut u, false);
        apply(&mut u, if step + 1 == plan.steps { &half } else { &full });
    }
    fft(&mut u, true);
    let out = Wavefunction::from_parts(grid, u);
    let b = out.boundary_ratio();
    if b > DEFAULT_FLOOR.sqrt() {
        return Err(Error::Truncation {
            boundary: b,
            floor: DEFAULT_FLOOR.sqrt(),
        });
    }
    Ok(out)
}

/// `⟨u, (−ε²/2 Δ + V) u⟩`.
pub fn energy(u: &Wavefunction, pot: &FourierPotential, epsilon: f64) -> Result<f64> {
    let grid = u.grid();
    let spec = u.spectrum()?;
    let dual: f64 = grid.axes().iter().map(Axis::frequency_spacing).product();
    let axes = grid.axes();
    let kinetic: f64 = spec
        .iter()
        .enumerate()
        .map(|(mut flat, c)| {
            let mut xi2 = 0.0;
            for a in axes.iter().rev() {
                let f = a.frequency(flat % a.len);
                xi2 += f * f;
                flat /= a.len;
            }
            4.0 * PI * PI * xi2 * c.norm_sqr()
        })
        .sum::<f64>()
        * dual
        * epsilon
        * epsilon
        / 2.0;
    let d = grid.n();
    let mut x = [0.0; 2];
    let potential: f64 = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            grid.node(i, &mut x[..d]);
            pot.value(&x[..d]) * c.norm_sqr()
        })
        .sum::<f64>()
        * grid.cell_volume();
    Ok(kinetic + potential)
}

/// Coherent-state envelope profiles `a ∈ 𝒮`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// `2^{n/4} e^{−π|x|²}`.
    Gaussian,
    /// `p(x₁) e^{−π|x|²}` with cubic `p`, normalized on the grid.
    GaussianPolynomial([f64; 4]),
}

impl Envelope {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            Envelope::Gaussian => 2f64.powf(x.len() as f64 / 4.0) * (-PI * r2).exp(),
            Envelope::GaussianPolynomial(c) => {
                let t = x[0];
                (c[0] + t * (c[1] + t * (c[2] + t * c[3]))) * (-PI * r2).exp()
            }
        }
    }
}

/// `u(x) = ε^{−n/4} a((x − x₀)/√ε) e^{2πi k₀·x/ε}`, normalized on the grid.
///
/// The phase carries `1/ε` so that the Wigner transform concentrates at
/// `(x₀, k₀)` in the scaled phase space.
pub fn coherent_state(
    x0: &[f64],
    k0: &[f64],
    params: &SemiclassicalParams,
    envelope: Envelope,
    grid: &SpatialGrid,
) -> Result<Wavefunction> {
    let d = grid.n();
    if x0.len() != d || k0.len() != d {
        return Err(Error::Placement(format!("centre must have {d} components")));
    }
    for (i, a) in grid.axes().iter().enumerate() {
        if !(x0[i] > a.min && x0[i] < a.max) {
            return Err(Error::Placement(format!(
                "x0 = {} lies outside [{}, {})",
                x0[i], a.min, a.max
            )));
        }
    }
    let eps = params.epsilon;
    for (i, a) in grid.axes().iter().enumerate() {
        let nyquist = 0.5 / a.spacing();
        let reach = k0[i].abs() / eps + 6.0 / (PI * eps).sqrt();
        if reach > nyquist {
            return Err(Error::Placement(format!(
                "momentum k0/ε = {} is not resolved by the grid (Nyquist {nyquist})",
                k0[i] / eps
            )));
        }
    }
    let amp = eps.powf(-(d as f64) / 4.0);
    let sq = eps.sqrt();
    let u = Wavefunction::from_fn(grid.clone(), |x| {
        let mut y = [0.0; 2];
        let mut phase = 0.0;
        for i in 0..d {
            y[i] = (x[i] - x0[i]) / sq;
            phase += 2.0 * PI * k0[i] * x[i] / eps;
        }
        let (s, c) = phase.sin_cos();
        Complex64::new(c, s) * (amp * envelope.eval(&y[..d]))
    })?
    .normalized()?;
    let edge = u.boundary_ratio();
    if edge > DEFAULT_FLOOR.sqrt() {
        return Err(Error::Placement(format!(
            "state reaches the box edge (relative {edge:.2e})"
        )));
    }
    let spec = u.spectrum()?;
    let peak = spec.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let shape = grid.shape();
    let mut worst = 0.0f64;
    for (mut flat, c) in spec.iter().enumerate() {
        let mut nyq = false;
        for &s in shape.iter().rev() {
            nyq |= flat % s == s / 2;
            flat /= s;
        }
        if nyq {
            worst = worst.max(c.norm());
        }
    }
    if worst > DEFAULT_FLOOR.sqrt() * peak {
        return Err(Error::Placement(format!(
            "momentum k0/ε is not resolved by the grid (Nyquist content {:.2e})",
            worst / peak
        )));
    }
    Ok(u)
}

/// Finite convex combination of pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStateEnsemble {
    members: Vec<(f64, Wavefunction)>,
}

impl MixedStateEnsemble {
    pub fn new(members: Vec<(f64, Wavefunction)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Data("empty ensemble".into()));
        }
        let total: f64 = members.iter().map(|m| m.0).sum();
        if members.iter().any(|m| !(m.0 >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "weights must be ≥ 0 and sum to 1 (sum {total})"
            )));
        }
        for (_, u) in &members {
            check_normalized(u)?;
            if u.grid() != members[0].1.grid() {
                return Err(Error::Grid(
                    "ensemble members live on different grids".into(),
                ));
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, Wavefunction)] {
        &self.members
    }

    pub fn evolve(
        &self,
        pot: &FourierPotential,
        params: &SemiclassicalParams,
        t: f64,
    ) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|(w, u)| Ok((*w, evolve_schrodinger(u, pot, params, t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }
}

/// Normalized Gaussian on phase space with diagonal covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGaussian {
    dim: usize,
    center: [f64; 4],
    var: [f64; 4],
    mass: f64,
}

impl PhaseSpaceGaussian {
    pub fn new(center: &[f64], var: &[f64], mass: f64) -> Result<Self> {
        let dim = center.len();
        if !(dim == 2 || dim == 4) || var.len() != dim {
            return Err(Error::Data(
                "phase-space Gaussian needs 2 or 4 coordinates".into(),
            ));
        }
        if var.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Domain("variances must be positive".into()));
        }
        let mut c = [0.0; 4];
        let mut s = [1.0; 4];
        c[..dim].copy_from_slice(center);
        s[..dim].copy_from_slice(var);
        Ok(Self {
            dim,
            center: c,
            var: s,
            mass,
        })
    }

    /// `Π (2π s²)^{-1} e^{−|z − z₀|²/(2s²)}`, one spread per axis.
    pub fn mixed(center: &[f64], spread: &[f64]) -> Result<Self> {
        let var: Vec<f64> = spread.iter().map(|s| s * s).collect();
        Self::new(center, &var, 1.0)
    }

    /// Wigner transform of the default Gaussian coherent state:
    /// `(2/ε)^n e^{−2π|z − z₀|²/ε}`.
    pub fn coherent(x0: &[f64], k0: &[f64], epsilon: f64) -> Result<Self> {
        let center: Vec<f64> = x0.iter().chain(k0).copied().collect();
        let var = alloc::vec![epsilon / (4.0 * PI); center.len()];
        Self::new(&center, &var, 1.0)
    }

    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn center(&self) -> &[f64] {
        &self.center[..self.dim]
    }

    pub fn variances(&self) -> &[f64] {
        &self.var[..self.dim]
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let mut e = 0.0;
        let mut norm = self.mass;
        for i in 0..self.dim {
            let d = z[i] - self.center[i];
            e += d * d / (2.0 * self.var[i]);
            norm /= (2.0 * PI * self.var[i]).sqrt();
        }
        norm * (-e).exp()
    }

    /// Evaluation at the periodic image of `z` nearest the centre.
    pub fn eval_periodic(&self, z: &[f64], axes: &[Axis]) -> f64 {
        let mut w = [0.0; 4];
        for i in 0..self.dim {
            w[i] = axes[i].minimum_image(z[i], self.center[i]);
        }
        self.eval(&w[..self.dim])
    }

    /// Image under the smoothing operator: variances grow by `εσ²/(4π)`.
    pub fn smoothed(&self, params: &SemiclassicalParams) -> Self {
        let n = self.n();
        let mut g = *self;
        for i in 0..n {
            g.var[i] += params.epsilon * params.sigma_x * params.sigma_x / (4.0 * PI);
            g.var[n + i] += params.epsilon * params.sigma_k * params.sigma_k / (4.0 * PI);
        }
        g
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass
            * (0..self.dim)
                .map(|i| (4.0 * PI * self.var[i]).powf(-0.25))
                .product::<f64>()
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<PhaseSpaceField> {
        if grid.axes().len() != self.dim {
            return Err(Error::Grid("Gaussian and grid dimensions differ".into()));
        }
        let axes = grid.axes().to_vec();
        PhaseSpaceField::from_fn(grid.clone(), |z| self.eval_periodic(z, &axes))
    }
}

/// ε-independent unit-mass phase-space Gaussian; each position/momentum
/// pair must satisfy `s_x s_k ≥ ε/(4π)`.
pub fn gaussian_mixed_state(
    center: &[f64],
    spread: &[f64],
    epsilon: f64,
    grid: &GridSpec,
) -> Result<PhaseSpaceField> {
    let n = grid.n();
    if center.len() != 2 * n || spread.len() != 2 * n {
        return Err(Error::Data(format!(
            "centre and spread need {} components",
            2 * n
        )));
    }
    let minimum = (epsilon / (4.0 * PI)).sqrt();
    for i in 0..n {
        let s = (spread[i] * spread[n + i]).sqrt();
        if s < minimum {
            return Err(Error::Admissibility { spread: s, minimum });
        }
    }
    let field = PhaseSpaceGaussian::mixed(center, spread)?.sample(grid)?;
    grid.check_decay(field.values())?;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, half: f64) -> SpatialGrid {
        SpatialGrid::uniform(1, -half, half, n).unwrap()
    }

    #[test]
    fn plan_covers_duration() {
        let p = PropagationPlan::new(0.5, 0.003, 0.1).unwrap();
        assert!((p.duration() - 0.5).abs() < 1e-12);
        assert!(p.dt <= 0.003);
        assert_eq!(PropagationPlan::new(0.0, 0.1, 0.1).unwrap().steps, 0);
    }

    #[test]
    fn coherent_state_normalization_and_peak() {
        let g = line(1024, 2.0);
        let p = SemiclassicalParams::husimi(1, 0.1).unwrap();
        let u = coherent_state(&[0.0], &[0.0], &p, Envelope::Gaussian, &g).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-12);
        let p = SemiclassicalParams::husimi(1, 0.01).unwrap();
        let u = coherent_state(&[0.0], &[0.0], &p, Envelope::Gaussian, &g).unwrap();
        let peak = u.values()[512].norm();
        assert!((peak - 0.01f64.powf(-0.25) * 2f64.powf(0.25)).abs() < 1e-12);
        assert!((peak - 3.7606).abs() < 1e-4);
    }

    #[test]
    fn coherent_state_momentum_centre() {
        let g = line(1024, 2.0);
        let p = SemiclassicalParams::husimi(1, 0.1).unwrap();
        let u = coherent_state(&[0.0], &[2.0], &p, Envelope::Gaussian, &g).unwrap();
        let spec = u.spectrum().unwrap();
        let a = g.axes()[0];
        let (num, den) = spec.iter().enumerate().fold((0.0, 0.0), |(n, d), (j, c)| {
            (n + a.frequency(j) * c.norm_sqr(), d + c.norm_sqr())
        });
        assert!((num / den - 2.0 / 0.1).abs() < a.frequency_spacing());
    }

    #[test]
    fn coherent_state_placement_errors() {
        let g = line(256, 1.0);
        let p = SemiclassicalParams::husimi(1, 0.1).unwrap();
        assert!(coherent_state(&[0.95], &[0.0], &p, Envelope::Gaussian, &g).is_err());
        assert!(coherent_state(&[3.0], &[0.0], &p, Envelope::Gaussian, &g).is_err());
        assert!(coherent_state(&[0.0], &[12.0], &p, Envelope::Gaussian, &g).is_err());
    }

    #[test]
    fn free_dispersion_matches_closed_form() {
        let eps = 0.1;
        let t = 0.5;
        let g = line(1024, 8.0);
        let p = SemiclassicalParams::husimi(1, eps).unwrap();
        let u0 = coherent_state(&[0.0], &[0.0], &p, Envelope::Gaussian, &g).unwrap();
        let u = evolve_schrodinger(&u0, &FourierPotential::zero(1), &p, t).unwrap();
        // u0 = (2/ε)^{1/4} e^{−πx²/ε}; free evolution replaces ε by ε(1 + 2πit)
        let exact = |x: f64| {
            let z = Complex64::new(1.0, 2.0 * PI * t);
            (2.0 / eps).powf(0.25) / z.sqrt() * (-PI * x * x / (eps * z)).exp()
        };
        let worst = g.axes()[0]
            .points()
            .iter()
            .zip(u.values())
            .map(|(x, v)| (v - exact(*x)).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn zero_time_is_identity() {
        let g = line(256, 4.0);
        let p = SemiclassicalParams::husimi(1, 0.1).unwrap();
        let u0 = coherent_state(&[0.3], &[0.2], &p, Envelope::Gaussian, &g).unwrap();
        let u = evolve_schrodinger(&u0, &FourierPotential::cosine(1.0, 1.0), &p, 0.0).unwrap();
        assert_eq!(u, u0);
    }

    #[test]
    fn harmonic_period_returns_state() {
        let g = line(1024, 4.0);
        let p = SemiclassicalParams::husimi(1, 0.05).unwrap();
        let v = FourierPotential::harmonic(1, 2.0 * PI * PI).unwrap();
        let u0 = coherent_state(&[0.5], &[0.3], &p, Envelope::Gaussian, &g).unwrap();
        let u = evolve_schrodinger(&u0, &v, &p, 1.0).unwrap();
        let fidelity = u.inner(&u0).norm();
        assert!(fidelity > 1.0 - 1e-6, "{fidelity}");
    }

    #[test]
    fn norm_and_energy_conservation() {
        let g = line(1024, 8.0);
        let p = SemiclassicalParams::husimi(1, 0.05).unwrap();
        let v = FourierPotential::cosine(1.0, 1.0);
        let u0 = coherent_state(&[0.1], &[0.2], &p, Envelope::Gaussian, &g).unwrap();
        let plan =
            PropagationPlan::new(1000.0 * p.epsilon / 50.0, p.epsilon / 50.0, p.epsilon).unwrap();
        assert_eq!(plan.steps, 1000);
        let u = evolve_schrodinger_with(&u0, &v, &plan).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-12);
        // the split flow conserves a modified energy; the true energy drifts by O(dt²)
        let fine = PropagationPlan::new(0.25, p.epsilon / 4000.0, p.epsilon).unwrap();
        let u = evolve_schrodinger_with(&u0, &v, &fine).unwrap();
        let (e0, e1) = (
            energy(&u0, &v, p.epsilon).unwrap(),
            energy(&u, &v, p.epsilon).unwrap(),
        );
        assert!(((e1 - e0) / e0).abs() < 1e-8, "{e0} {e1}");
    }

    #[test]
    fn strang_order_two() {
        let g = line(512, 4.0);
        let p = SemiclassicalParams::husimi(1, 0.1).unwrap();
        let v = FourierPotential::cosine(1.0, 1.0);
        let u0 = coherent_state(&[0.1], &[0.0], &p, Envelope::Gaussian, &g).unwrap();
        let run = |dt: f64| {
            let plan = PropagationPlan::new(0.4, dt, p.epsilon).unwrap();
            evolve_schrodinger_with(&u0, &v, &plan).unwrap()
        };
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let diff = |x: &Wavefunction, y: &Wavefunction| {
            x.values()
                .iter()
                .zip(y.values())
                .map(|(p, q)| (p - q).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let ratio = diff(&a, &b) / diff(&b, &c);
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn mixed_state_normalization() {
        let g = GridSpec::default_1d(256).unwrap();
        let w = gaussian_mixed_state(&[0.0, 0.0], &[1.0, 1.0], 1.0 / 32.0, &g).unwrap();
        assert!((w.values()[128 * 256 + 128] - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((w.mass() - 1.0).abs() < 1e-12);
        assert!(gaussian_mixed_state(&[0.0, 0.0], &[0.01, 0.01], 0.1, &g).is_err());
    }

    #[test]
    fn ensemble_validation() {
        let g = line(256, 4.0);
        let p = SemiclassicalParams::husimi(1, 0.1).unwrap();
        let a = coherent_state(&[-1.0], &[0.0], &p, Envelope::Gaussian, &g).unwrap();
        let b = coherent_state(&[1.0], &[0.0], &p, Envelope::Gaussian, &g).unwrap();
        assert!(MixedStateEnsemble::new(alloc::vec![(0.5, a.clone()), (0.5, b.clone())]).is_ok());
        assert!(MixedStateEnsemble::new(alloc::vec![(0.6, a), (0.5, b)]).is_err());
    }
}
