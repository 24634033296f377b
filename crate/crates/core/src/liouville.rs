//! Classical transport `∂ₜρ + 2πk·∂ₓρ − (1/2π)∇V·∂ₖρ = 0` by backward
//! characteristics and interpolation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::{Axis, GridSpec};
use crate::interp::GridInterpolant;
use crate::params::SemiclassicalParams;
use crate::potentials::{mollify_vtilde1, FourierPotential};
use crate::wigner::smooth;
use crate::{Error, PhaseSpaceField, Result};

/// Interpolation order used by [`solve_liouville`] (cubic).
pub const DEFAULT_ORDER: usize = 4;

/// Symplectic integrator for the characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowScheme {
    /// Drift–kick–drift, second order.
    #[default]
    Leapfrog,
    /// Triple-jump composition of leapfrog, fourth order.
    Yoshida4,
}

impl FlowScheme {
    pub fn order(self) -> u32 {
        match self {
            FlowScheme::Leapfrog => 2,
            FlowScheme::Yoshida4 => 4,
        }
    }

    fn substeps(self) -> &'static [f64] {
        const CBRT2: f64 = 1.259_921_049_894_873_2;
        const W1: f64 = 1.0 / (2.0 - CBRT2);
        const W0: f64 = -CBRT2 / (2.0 - CBRT2);
        match self {
            FlowScheme::Leapfrog => &[1.0],
            FlowScheme::Yoshida4 => &[W1, W0, W1],
        }
    }
}

/// Characteristic integrator for one potential, with the escape box.
#[derive(Debug, Clone)]
pub struct Characteristics<'a> {
    pot: &'a FourierPotential,
    scheme: FlowScheme,
    center: [f64; 4],
    reach: [f64; 4],
    bounded: [bool; 4],
}

impl<'a> Characteristics<'a> {
    /// Escape box: twice the grid box about its centre; positions are
    /// unbounded when `V` is periodic on the position box.
    pub fn new(pot: &'a FourierPotential, grid: &GridSpec, scheme: FlowScheme) -> Result<Self> {
        let n = grid.n();
        if pot.n() != n {
            return Err(Error::Data("potential and grid dimensions differ".into()));
        }
        let periodic = pot.periodic_on(grid.x_axes());
        let mut center = [0.0; 4];
        let mut reach = [0.0; 4];
        let mut bounded = [false; 4];
        for (a, axis) in grid.axes().iter().enumerate() {
            center[a] = axis.center();
            reach[a] = axis.length();
            bounded[a] = a >= n || !periodic;
        }
        Ok(Self {
            pot,
            scheme,
            center,
            reach,
            bounded,
        })
    }

    pub fn scheme(&self) -> FlowScheme {
        self.scheme
    }

    fn leapfrog(&self, z: &mut [f64], h: f64) {
        let n = self.pot.n();
        let mut g = [0.0; 2];
        for i in 0..n {
            z[i] += PI * z[n + i] * h;
        }
        self.pot.gradient(&z[..n], &mut g);
        for i in 0..n {
            z[n + i] -= h / (2.0 * PI) * g[i];
        }
        for i in 0..n {
            z[i] += PI * z[n + i] * h;
        }
    }

    fn escaped(&self, z: &[f64]) -> bool {
        z.iter().enumerate().any(|(a, &v)| {
            !v.is_finite() || (self.bounded[a] && (v - self.center[a]).abs() > self.reach[a])
        })
    }

    /// Moves `z = (x, k)` along the flow for signed time `t` in steps of at
    /// most `dt`. `node` labels escape errors.
    pub fn advance(&self, z: &mut [f64], t: f64, dt: f64, node: usize) -> Result<()> {
        let steps = step_count(t.abs(), dt)?;
        if steps == 0 {
            return Ok(());
        }
        let h = t / steps as f64;
        let n = self.pot.n();
        for _ in 0..steps {
            for &w in self.scheme.substeps() {
                self.leapfrog(z, w * h);
            }
            if self.escaped(z) {
                return Err(Error::Escape {
                    node,
                    position: [z[0], z[n]],
                });
            }
        }
        Ok(())
    }
}

fn step_count(t: f64, dt: f64) -> Result<usize> {
    if !(t.is_finite()) {
        return Err(Error::Domain(format!("flow time {t} must be finite")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("time step {dt} must be positive")));
    }
    Ok((t / dt - 1e-9).ceil().max(0.0) as usize)
}

/// Backward characteristic origins `Φ₋ₜ(z)` for every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    grid: GridSpec,
    t: f64,
    dt: f64,
    scheme: FlowScheme,
    endpoints: Vec<f64>,
}

impl FlowMap {
    /// Assembles a map from precomputed endpoints (`2n` values per node).
    pub fn from_endpoints(
        grid: GridSpec,
        t: f64,
        dt: f64,
        scheme: FlowScheme,
        endpoints: Vec<f64>,
    ) -> Result<Self> {
        if endpoints.len() != grid.len() * 2 * grid.n() {
            return Err(Error::Data(format!(
                "{} endpoint values for {} nodes",
                endpoints.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            t,
            dt,
            scheme,
            endpoints,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> FlowScheme {
        self.scheme
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn endpoint(&self, node: usize) -> &[f64] {
        let d = 2 * self.grid.n();
        &self.endpoints[node * d..(node + 1) * d]
    }

    /// Largest distance between nodes and the forward images of their
    /// endpoints, relative to the box size.
    pub fn reversibility_defect(&self, pot: &FourierPotential) -> Result<f64> {
        let ch = Characteristics::new(pot, &self.grid, self.scheme)?;
        let d = 2 * self.grid.n();
        let scale = self
            .grid
            .axes()
            .iter()
            .map(Axis::length)
            .fold(0.0, f64::max);
        let mut node = [0.0; 4];
        let mut worst = 0.0f64;
        for i in 0..self.grid.len() {
            let mut z = [0.0; 4];
            z[..d].copy_from_slice(self.endpoint(i));
            ch.advance(&mut z[..d], self.t, self.dt, i)?;
            self.grid.node(i, &mut node);
            for a in 0..d {
                worst = worst.max((z[a] - node[a]).abs());
            }
        }
        Ok(worst / scale)
    }
}

/// Endpoints for the nodes in `nodes`, flattened; lets callers shard a flow.
pub fn flow_endpoints(
    pot: &FourierPotential,
    t: f64,
    grid: &GridSpec,
    dt: f64,
    scheme: FlowScheme,
    nodes: Range<usize>,
) -> Result<Vec<f64>> {
    let ch = Characteristics::new(pot, grid, scheme)?;
    let d = 2 * grid.n();
    let mut out = vec![0.0; nodes.len() * d];
    for (row, i) in out.chunks_exact_mut(d).zip(nodes) {
        grid.node(i, row);
        ch.advance(row, -t, dt, i)?;
    }
    Ok(out)
}

/// Leapfrog backward flow of every grid node.
pub fn flow_backward(pot: &FourierPotential, t: f64, grid: &GridSpec, dt: f64) -> Result<FlowMap> {
    flow_backward_with(pot, t, grid, dt, FlowScheme::Leapfrog)
}

pub fn flow_backward_with(
    pot: &FourierPotential,
    t: f64,
    grid: &GridSpec,
    dt: f64,
    scheme: FlowScheme,
) -> Result<FlowMap> {
    let endpoints = flow_endpoints(pot, t, grid, dt, scheme, 0..grid.len())?;
    FlowMap::from_endpoints(grid.clone(), t, dt, scheme, endpoints)
}

/// Largest step of the form `t/(2048·2ʲ)` whose endpoints on a sample of
/// nodes agree with the next halving to within `tol`. Returns the step and
/// the achieved Cauchy difference; gives up after `max_halvings`.
pub fn choose_flow_dt(
    pot: &FourierPotential,
    t: f64,
    grid: &GridSpec,
    scheme: FlowScheme,
    tol: f64,
    max_halvings: u32,
) -> Result<(f64, f64)> {
    if t == 0.0 {
        return Ok((1.0, 0.0));
    }
    let ch = Characteristics::new(pot, grid, scheme)?;
    let d = 2 * grid.n();
    let stride = (grid.len() / 257).max(1);
    let sample: Vec<usize> = (0..grid.len()).step_by(stride).collect();
    let run = |dt: f64| -> Result<Vec<f64>> {
        let mut out = vec![0.0; sample.len() * d];
        for (row, &i) in out.chunks_exact_mut(d).zip(&sample) {
            grid.node(i, row);
            ch.advance(row, -t, dt, i)?;
        }
        Ok(out)
    };
    let mut dt = t.abs() / 2048.0;
    let mut coarse = run(dt)?;
    let mut diff = f64::INFINITY;
    for _ in 0..=max_halvings {
        let fine = run(dt / 2.0)?;
        diff = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff < tol {
            return Ok((dt, diff));
        }
        coarse = fine;
        dt /= 2.0;
    }
    Ok((dt, diff))
}

/// Determinant of the Jacobian of `Φₜ` at `z` by central differences.
pub fn jacobian_determinant(
    pot: &FourierPotential,
    grid: &GridSpec,
    z: &[f64],
    t: f64,
    dt: f64,
    scheme: FlowScheme,
) -> Result<f64> {
    let ch = Characteristics::new(pot, grid, scheme)?;
    let d = 2 * grid.n();
    let delta = 1e-5;
    let mut jac = [[0.0; 4]; 4];
    for c in 0..d {
        let mut plus = [0.0; 4];
        let mut minus = [0.0; 4];
        plus[..d].copy_from_slice(&z[..d]);
        minus[..d].copy_from_slice(&z[..d]);
        plus[c] += delta;
        minus[c] -= delta;
        ch.advance(&mut plus[..d], t, dt, 0)?;
        ch.advance(&mut minus[..d], t, dt, 0)?;
        for r in 0..d {
            jac[r][c] = (plus[r] - minus[r]) / (2.0 * delta);
        }
    }
    Ok(determinant(&mut jac, d))
}

fn determinant(m: &mut [[f64; 4]; 4], d: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..d {
        let p = (c..d)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap_or(c);
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..d {
            let f = m[r][c] / m[c][c];
            for k in c..d {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det
}

/// Anything that can be evaluated at a phase-space point.
pub trait PhaseSpaceDensity {
    fn eval(&self, z: &[f64]) -> f64;
}

impl PhaseSpaceDensity for GridInterpolant<'_> {
    fn eval(&self, z: &[f64]) -> f64 {
        GridInterpolant::eval(self, z)
    }
}

impl<F: Fn(&[f64]) -> f64> PhaseSpaceDensity for F {
    fn eval(&self, z: &[f64]) -> f64 {
        self(z)
    }
}

/// `ρ(z) = ρ₀(Φ₋ₜ(z))` on the map's grid.
pub fn transport(map: &FlowMap, density: &impl PhaseSpaceDensity) -> Result<PhaseSpaceField> {
    let values = (0..map.grid.len())
        .map(|i| density.eval(map.endpoint(i)))
        .collect();
    PhaseSpaceField::new(map.grid.clone(), values)
}

/// Liouville solution with leapfrog characteristics and cubic interpolation.
pub fn solve_liouville(
    rho0: &PhaseSpaceField,
    pot: &FourierPotential,
    t: f64,
    dt: f64,
) -> Result<PhaseSpaceField> {
    solve_liouville_with(rho0, pot, t, dt, FlowScheme::Leapfrog, DEFAULT_ORDER)
}

pub fn solve_liouville_with(
    rho0: &PhaseSpaceField,
    pot: &FourierPotential,
    t: f64,
    dt: f64,
    scheme: FlowScheme,
    order: usize,
) -> Result<PhaseSpaceField> {
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let map = flow_backward_with(pot, t, rho0.grid(), dt, scheme)?;
    transport(&map, &GridInterpolant::new(rho0, order)?)
}

/// `ρ₁`: smoothed data transported by the flow of `Ṽ₁`.
pub fn solve_rho1(
    w0_smoothed: &PhaseSpaceField,
    pot: &FourierPotential,
    params: &SemiclassicalParams,
    t: f64,
    dt: f64,
) -> Result<PhaseSpaceField> {
    solve_liouville(w0_smoothed, &mollify_vtilde1(pot, params)?, t, dt)
}

/// `ρ₂`: smoothed data transported by the flow of the true potential.
pub fn solve_rho2(
    w0_smoothed: &PhaseSpaceField,
    pot: &FourierPotential,
    t: f64,
    dt: f64,
) -> Result<PhaseSpaceField> {
    solve_liouville(w0_smoothed, pot, t, dt)
}

/// Convenience: `ρ₂` from unsmoothed data.
pub fn solve_rho2_from(
    w0: &PhaseSpaceField,
    pot: &FourierPotential,
    params: &SemiclassicalParams,
    t: f64,
    dt: f64,
) -> Result<PhaseSpaceField> {
    solve_rho2(&smooth(w0, params)?, pot, t, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Quadratic;
    use crate::schrodinger::PhaseSpaceGaussian;

    fn harmonic() -> FourierPotential {
        FourierPotential::polynomial(
            1,
            Quadratic {
                c0: 0.0,
                linear: [0.0; 2],
                quadratic: [2.0 * PI * PI, 0.0],
            },
        )
        .unwrap()
    }

    #[test]
    fn free_streaming_endpoints() {
        let g = GridSpec::default_1d(64).unwrap();
        let map = flow_backward(&FourierPotential::zero(1), 0.5, &g, 0.01).unwrap();
        let mut z = [0.0; 2];
        for i in (0..g.len()).step_by(37) {
            g.node(i, &mut z);
            let e = map.endpoint(i);
            assert!((e[0] - (z[0] - PI * z[1])).abs() < 1e-12);
            assert_eq!(e[1], z[1]);
        }
    }

    #[test]
    fn harmonic_period_returns_home() {
        let g = GridSpec::new(1, (-2.0, 2.0), 32, (-2.0, 2.0), 32).unwrap();
        let map = flow_backward(&harmonic(), 1.0, &g, 1.0 / 8192.0).unwrap();
        let mut z = [0.0; 2];
        let worst = (0..g.len())
            .map(|i| {
                g.node(i, &mut z);
                let e = map.endpoint(i);
                (e[0] - z[0]).abs().max((e[1] - z[1]).abs())
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
        let g = GridSpec::default_1d(32).unwrap();
        let map =
            flow_backward_with(&harmonic(), 1.0, &g, 1.0 / 512.0, FlowScheme::Yoshida4).unwrap();
        let worst = (0..g.len())
            .map(|i| {
                g.node(i, &mut z);
                let e = map.endpoint(i);
                (e[0] - z[0]).abs().max((e[1] - z[1]).abs())
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn quarter_period_rotation() {
        // x(t) = x cos 2πt + k sin 2πt, k(t) = k cos 2πt − x sin 2πt
        let g = GridSpec::new(1, (-1.0, 1.0), 16, (-1.0, 1.0), 16).unwrap();
        let map = flow_backward_with(&harmonic(), 0.25, &g, 1e-3, FlowScheme::Yoshida4).unwrap();
        let mut z = [0.0; 2];
        for i in 0..g.len() {
            g.node(i, &mut z);
            let e = map.endpoint(i);
            assert!((e[0] + z[1]).abs() < 1e-9 && (e[1] - z[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn reversible_and_area_preserving() {
        let g = GridSpec::default_1d(64).unwrap();
        let pot = FourierPotential::cosine(1.0, 1.0);
        let map = flow_backward(&pot, 0.5, &g, 1e-3).unwrap();
        assert!(map.reversibility_defect(&pot).unwrap() < 1e-8);
        for z in [[0.1, 0.2], [-0.3, 1.5], [2.0, -0.4]] {
            let det = jacobian_determinant(&pot, &g, &z, 0.5, 1e-3, FlowScheme::Leapfrog).unwrap();
            assert!((det - 1.0).abs() < 1e-6, "{det}");
        }
    }

    #[test]
    fn composition_law() {
        let g = GridSpec::default_1d(32).unwrap();
        let pot = FourierPotential::cosine(1.0, 1.0);
        let ch = Characteristics::new(&pot, &g, FlowScheme::Leapfrog).unwrap();
        for z in [[0.1, 0.2], [-0.3, 1.5]] {
            let mut a = z;
            ch.advance(&mut a, 0.3, 1e-3, 0).unwrap();
            ch.advance(&mut a, 0.2, 1e-3, 0).unwrap();
            let mut b = z;
            ch.advance(&mut b, 0.5, 1e-3, 0).unwrap();
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn escape_is_reported() {
        let g = GridSpec::new(1, (-1.0, 1.0), 16, (-1.0, 1.0), 16).unwrap();
        let push = FourierPotential::polynomial(
            1,
            Quadratic {
                c0: 0.0,
                linear: [-40.0, 0.0],
                quadratic: [0.0; 2],
            },
        )
        .unwrap();
        let err = flow_backward(&push, 1.0, &g, 0.01).unwrap_err();
        assert!(matches!(err, Error::Escape { .. }));
        // periodic potentials never escape in position
        let map = flow_backward(&FourierPotential::zero(1), 3.0, &g, 0.01).unwrap();
        assert!(map.endpoints().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn dt_selection_converges() {
        let g = GridSpec::default_1d(32).unwrap();
        let pot = FourierPotential::cosine(1.0, 1.0);
        let (_, diff) = choose_flow_dt(&pot, 0.5, &g, FlowScheme::Yoshida4, 1e-9, 6).unwrap();
        assert!(diff < 1e-9);
    }

    #[test]
    fn shifted_data_under_free_flow() {
        let g = GridSpec::default_1d(256).unwrap();
        let gauss = PhaseSpaceGaussian::mixed(&[0.0, 0.3], &[1.0, 0.8]).unwrap();
        let rho0 = gauss.sample(&g).unwrap();
        let rho = solve_liouville_with(
            &rho0,
            &FourierPotential::zero(1),
            0.5,
            0.01,
            FlowScheme::Leapfrog,
            10,
        )
        .unwrap();
        let axes = g.axes().to_vec();
        let worst = (0..g.len())
            .map(|i| {
                let mut z = [0.0; 2];
                g.node(i, &mut z);
                (rho.values()[i] - gauss.eval_periodic(&[z[0] - PI * z[1], z[1]], &axes)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn harmonic_period_restores_density() {
        let g = GridSpec::default_1d(256).unwrap();
        let rho0 = PhaseSpaceGaussian::mixed(&[1.0, 0.5], &[0.7, 0.6])
            .unwrap()
            .sample(&g)
            .unwrap();
        let rho = solve_liouville_with(
            &rho0,
            &harmonic(),
            1.0,
            1.0 / 1024.0,
            FlowScheme::Yoshida4,
            DEFAULT_ORDER,
        )
        .unwrap();
        let rel = rho.sub(&rho0).unwrap().l2_norm() / rho0.l2_norm();
        assert!(rel < 1e-5, "{rel}");
        assert_eq!(solve_liouville(&rho0, &harmonic(), 0.0, 0.1).unwrap(), rho0);
    }

    #[test]
    fn rho2_minus_rho_keeps_initial_gap() {
        let g = GridSpec::default_1d(256).unwrap();
        let p = SemiclassicalParams::husimi(1, 0.05).unwrap();
        let pot = FourierPotential::cosine(1.0, 1.0);
        let w0 = PhaseSpaceGaussian::mixed(&[0.0, 0.0], &[0.6, 0.6])
            .unwrap()
            .sample(&g)
            .unwrap();
        let w0s = smooth(&w0, &p).unwrap();
        let rho = solve_liouville_with(&w0, &pot, 0.5, 1e-2, FlowScheme::Leapfrog, 8).unwrap();
        let rho2 = solve_liouville_with(&w0s, &pot, 0.5, 1e-2, FlowScheme::Leapfrog, 8).unwrap();
        let gap = w0.sub(&w0s).unwrap().l2_norm();
        let now = rho2.sub(&rho).unwrap().l2_norm();
        assert!((now - gap).abs() < 1e-2 * gap, "{now} vs {gap}");
        let rho2 = solve_rho2(&w0s, &pot, 0.5, 1e-2).unwrap();
        assert_eq!(solve_liouville(&w0s, &pot, 0.5, 1e-2).unwrap(), rho2);
        assert_eq!(solve_rho2_from(&w0, &pot, &p, 0.5, 1e-2).unwrap(), rho2);
    }

    #[test]
    fn rho1_with_zero_potential_is_sheared_smoothed_data() {
        let g = GridSpec::default_1d(128).unwrap();
        let p = SemiclassicalParams::husimi(1, 0.1).unwrap();
        let zero = FourierPotential::zero(1);
        let w0s = smooth(
            &PhaseSpaceGaussian::mixed(&[0.0, 0.0], &[1.0, 1.0])
                .unwrap()
                .sample(&g)
                .unwrap(),
            &p,
        )
        .unwrap();
        let a = solve_rho1(&w0s, &zero, &p, 0.3, 0.01).unwrap();
        let b = solve_rho2(&w0s, &zero, 0.3, 0.01).unwrap();
        assert_eq!(a, b);
        assert_eq!(solve_rho1(&w0s, &zero, &p, 0.0, 0.01).unwrap(), w0s);
    }
}
