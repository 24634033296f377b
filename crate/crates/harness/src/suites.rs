//! Inequality suites: Wigner regularity, smoothing and pure-state lemmas,
//! Young and Gamma-function bounds.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semiclassical::fit::fit_slope;
use semiclassical::norms::{
    gamma_inequality_check, growth_constant, norm, young_convolution_check, NormKind,
};
use semiclassical::schrodinger::{coherent_state, Envelope};
use semiclassical::wigner::{smooth, wigner_pure, WignerPropagator};
use semiclassical::{Complex64, GridSpec, PhaseSpaceField, SemiclassicalParams, Wavefunction};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::experiments::{audit_gate, initial_data};
use crate::report::{Check, SuiteReport, SLACK};

/// Relative tolerance for L² conservation along an evolution.
pub const L2_CONSERVATION: f64 = 1e-10;

/// Norms of one Wigner evolution sampled at snapshot times.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityTrace {
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub h1: Vec<f64>,
    pub h_minus1: Vec<f64>,
    /// `ε‖XᵢŴ‖`, per axis.
    pub eps_x: Vec<Vec<f64>>,
    /// `ε‖KᵢŴ‖`, per axis.
    pub eps_k: Vec<Vec<f64>>,
    /// `ε‖kᵢW‖`, per axis.
    pub eps_kw: Vec<Vec<f64>>,
    /// `‖V̂|S|‖_{L¹}`.
    pub v1: f64,
    /// `D(1, n) = nπ·max{1, ‖V̂|S|²‖_{L¹}}`.
    pub d: f64,
}

fn k_weighted(w: &PhaseSpaceField, axis: usize) -> f64 {
    let g = w.grid();
    let n = g.n();
    let mut z = vec![0.0; 2 * n];
    let s: f64 = w
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            g.node(i, &mut z);
            (z[n + axis] * v).powi(2)
        })
        .sum();
    (s * g.cell_volume()).sqrt()
}

/// Evolves the configured initial data at `cfg.epsilons[0]` to `cfg.t`
/// and records the norms the regularity bounds involve.
pub fn regularity_trace(cfg: &RunConfig) -> Result<RegularityTrace> {
    cfg.validate(1)?;
    let pot = cfg.potential()?;
    if pot.is_polynomial() {
        return Err(HarnessError::Rejected(
            "regularity bounds need a potential with integrable spectrum".into(),
        ));
    }
    let epsilon = cfg.epsilons[0];
    let params = cfg.params(epsilon)?;
    audit_gate(&pot, 1, &params)?;
    let grid = cfg.grid()?;
    let data = initial_data(&cfg.initial, &params, &grid)?;
    let n = grid.n();
    let d = growth_constant(1, n, &pot)?
        .value()
        .ok_or_else(|| HarnessError::Rejected("‖V̂|S|²‖_L¹ diverges".into()))?;
    let v1 = pot.abs_moment(|s| s)?;
    let mut trace = RegularityTrace {
        epsilon,
        times: Vec::new(),
        l2: Vec::new(),
        h1: Vec::new(),
        h_minus1: Vec::new(),
        eps_x: vec![Vec::new(); n],
        eps_k: vec![Vec::new(); n],
        eps_kw: vec![Vec::new(); n],
        v1,
        d,
    };
    let mut failure = None;
    let mut record = |t: f64, w: &PhaseSpaceField| {
        let res = (|| -> Result<()> {
            let s = w.spectrum()?;
            trace.times.push(t);
            trace.l2.push(w.l2_norm());
            trace.h1.push(norm(w, NormKind::Sobolev(1))?);
            trace.h_minus1.push(norm(w, NormKind::Sobolev(-1))?);
            for i in 0..n {
                trace.eps_x[i].push(epsilon * s.weighted_l2(|z| z[i]));
                trace.eps_k[i].push(epsilon * s.weighted_l2(|z| z[n + i]));
                trace.eps_kw[i].push(epsilon * k_weighted(w, i));
            }
            Ok(())
        })();
        if let Err(e) = res {
            failure.get_or_insert(e);
        }
    };
    record(0.0, &data.w0);
    if cfg.t > 0.0 {
        let steps = cfg.dt.steps;
        let dt = cfg.t / steps as f64;
        let prop = WignerPropagator::new(&grid, &pot, &params, dt)?;
        let every = cfg.dt.every.clamp(1, steps);
        let last = prop.run(&data.w0, steps, every, |s, f| record(s as f64 * dt, f))?;
        record(cfg.t, &last);
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(trace),
    }
}

fn h1_ratios(trace: &RegularityTrace, d: f64) -> Vec<f64> {
    trace
        .times
        .iter()
        .zip(&trace.h1)
        .map(|(t, h)| h / ((t * d).exp() * trace.h1[0]))
        .collect()
}

/// All regularity inequalities along the trace, with growth constant `d`.
pub fn regularity_checks(trace: &RegularityTrace, d: f64) -> Vec<Check> {
    let eps = trace.epsilon;
    let w0 = trace.l2[0];
    let t_end = *trace.times.last().unwrap_or(&0.0);
    let mut out = Vec::new();
    let drift = trace
        .l2
        .iter()
        .map(|v| (v - w0).abs() / w0)
        .fold(0.0, f64::max);
    out.push(Check::inequality("l2 conservation", drift, L2_CONSERVATION, 1.0).at(eps, t_end));
    out.push(
        Check::ratios("h1 growth", &h1_ratios(trace, d), SLACK)
            .at(eps, t_end)
            .with_norm("h1"),
    );
    let hm: Vec<f64> = trace
        .times
        .iter()
        .zip(&trace.h_minus1)
        .map(|(t, h)| h / ((t * d).exp() * trace.h_minus1[0]))
        .collect();
    out.push(
        Check::ratios("h-1 growth", &hm, SLACK)
            .at(eps, t_end)
            .with_norm("h-1"),
    );
    for i in 0..trace.eps_x.len() {
        let x0 = trace.eps_x[i][0];
        let k0 = trace.eps_k[i][0];
        let kw0 = trace.eps_kw[i][0];
        let ratios = |lhs: &[f64], rhs: &dyn Fn(f64) -> f64| -> Vec<f64> {
            trace
                .times
                .iter()
                .zip(lhs)
                .map(|(t, l)| l / rhs(*t))
                .collect()
        };
        let rx = ratios(&trace.eps_x[i], &|t| x0 + 2.0 * t * trace.v1 * w0);
        let rk = ratios(&trace.eps_k[i], &|t| {
            k0 + 2.0 * PI * t * (x0 / eps + 2.0 * (t / eps) * trace.v1 * w0)
        });
        let rkw = ratios(&trace.eps_kw[i], &|t| kw0 + 2.0 * PI * t * trace.v1 * w0);
        out.push(Check::ratios(format!("eps-dx[{i}]"), &rx, SLACK).at(eps, t_end));
        out.push(Check::ratios(format!("eps-dk[{i}]"), &rk, SLACK).at(eps, t_end));
        out.push(Check::ratios(format!("eps-k[{i}]"), &rkw, SLACK).at(eps, t_end));
    }
    out
}

/// Largest observed exponential rate of `‖W(t)‖_{H¹}/‖W0‖_{H¹}`.
pub fn measured_h1_rate(trace: &RegularityTrace) -> f64 {
    trace
        .times
        .iter()
        .zip(&trace.h1)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, h)| (h / trace.h1[0]).ln() / t)
        .fold(0.0, f64::max)
}

/// The suite's own sanity check: doubling `D` must pass, and a rate at
/// half the measured growth must be caught.
pub fn regularity_self_test(trace: &RegularityTrace) -> Vec<Check> {
    let mut out = vec![Check::ratios(
        "self-test: doubled D passes",
        &h1_ratios(trace, 2.0 * trace.d),
        SLACK,
    )];
    let rate = measured_h1_rate(trace);
    let exercisable = trace
        .times
        .iter()
        .zip(&trace.h1)
        .any(|(t, h)| (h / trace.h1[0]).ln() - t * rate / 2.0 > SLACK.ln());
    if exercisable {
        let caught = regularity_checks(trace, rate / 2.0)
            .into_iter()
            .find(|c| c.name == "h1 growth")
            .map_or(0, |c| c.violations);
        out.push(Check::at_least(
            "self-test: half the measured rate is caught",
            caught as f64,
            1.0,
        ));
    }
    out
}

pub fn run_regularity_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let trace = regularity_trace(cfg)?;
    let mut report = SuiteReport::new(format!("{}-regularity", cfg.experiment));
    report.checks = regularity_checks(&trace, trace.d);
    let self_test = regularity_self_test(&trace);
    if self_test.len() < 2 {
        report
            .notes
            .push("measured growth too small to exercise the halved-rate self-test".into());
    }
    report.checks.extend(self_test);
    report.notes.push(format!(
        "D(1,n) = {:.6}, measured H¹ rate = {:.6}, ‖V̂|S|‖_L¹ = {:.6}",
        trace.d,
        measured_h1_rate(&trace),
        trace.v1
    ));
    Ok(report)
}

/// Real band-limited field: a few random plane waves whose frequencies lie
/// on the grid lattice within `band` of the origin.
pub fn random_band_limited(
    rng: &mut impl Rng,
    grid: &GridSpec,
    band: f64,
) -> Result<PhaseSpaceField> {
    let axes = grid.axes().to_vec();
    let modes = rng.random_range(1..=8);
    let waves: Vec<(Vec<f64>, f64, f64)> = (0..modes)
        .map(|_| {
            let freq = axes
                .iter()
                .map(|a| {
                    let m = (band / a.frequency_spacing()).floor() as i64;
                    rng.random_range(-m..=m) as f64 * a.frequency_spacing()
                })
                .collect();
            (
                freq,
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    Ok(PhaseSpaceField::from_fn(grid.clone(), |z| {
        waves
            .iter()
            .map(|(f, a, phi)| {
                let arg: f64 = f.iter().zip(z).map(|(f, z)| f * z).sum();
                a * (2.0 * PI * arg + phi).cos()
            })
            .sum()
    })?)
}

/// The four unsmoothing estimates `‖W − ΦW‖_A ≤ C εᵖ ‖W‖_B`, as
/// `(name, A, B, power)`.
pub const UNSMOOTHING_VARIANTS: [(&str, NormKind, NormKind, f64); 4] = [
    ("l2<=sqrt-eps*h1", NormKind::L2, NormKind::Sobolev(1), 0.5),
    ("l2<=eps*h2", NormKind::L2, NormKind::Sobolev(2), 1.0),
    ("h-1<=sqrt-eps*l2", NormKind::Sobolev(-1), NormKind::L2, 0.5),
    (
        "h-1<=eps*h1",
        NormKind::Sobolev(-1),
        NormKind::Sobolev(1),
        1.0,
    ),
];

/// `lhs/rhs` of one unsmoothing estimate.
pub fn unsmoothing_ratio(
    w: &PhaseSpaceField,
    params: &SemiclassicalParams,
    variant: usize,
) -> Result<f64> {
    let (_, a, b, p) = UNSMOOTHING_VARIANTS[variant];
    let lhs = norm(&w.sub(&smooth(w, params)?)?, a)?;
    let rhs = params.unsmoothing_constant() * params.epsilon.powf(p) * norm(w, b)?;
    Ok(lhs / rhs)
}

/// Unsmoothing estimates over `draws` random band-limited fields on a 64²
/// grid, for every ε and smoothing pair.
pub fn unsmoothing_checks(
    seed: u64,
    draws: usize,
    epsilons: &[f64],
    sigmas: &[(f64, f64)],
) -> Result<Vec<Check>> {
    let grid = GridSpec::new(1, (-4.0, 4.0), 64, (-4.0, 4.0), 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields = (0..draws)
        .map(|_| random_band_limited(&mut rng, &grid, 2.0))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &(sx, sk) in sigmas {
        for &eps in epsilons {
            let params = SemiclassicalParams::new(1, eps, sx, sk)?;
            for (v, (name, a, _, _)) in UNSMOOTHING_VARIANTS.iter().enumerate() {
                let ratios = fields
                    .iter()
                    .map(|w| unsmoothing_ratio(w, &params, v))
                    .collect::<Result<Vec<_>>>()?;
                let mut c =
                    Check::ratios(format!("unsmoothing {name} σ=({sx},{sk})"), &ratios, SLACK)
                        .with_norm(crate::config::NormSpec(*a).to_string());
                c.epsilon = Some(eps);
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Normalized superposition of two Gaussian coherent states.
pub fn cat_state(
    grid: &GridSpec,
    params: &SemiclassicalParams,
    a: ([f64; 1], [f64; 1]),
    b: ([f64; 1], [f64; 1]),
) -> Result<Wavefunction> {
    let sp = grid.spatial();
    let ua = coherent_state(&a.0, &a.1, params, Envelope::Gaussian, &sp)?;
    let ub = coherent_state(&b.0, &b.1, params, Envelope::Gaussian, &sp)?;
    let sum: Vec<Complex64> = ua
        .values()
        .iter()
        .zip(ub.values())
        .map(|(x, y)| x + y)
        .collect();
    Ok(Wavefunction::new(sp, sum)?.normalized()?)
}

/// Smoothing at `σxσk = 1` removes the negativity of a cat state's
/// Wigner function.
pub fn husimi_positivity_checks(epsilon: f64) -> Result<Vec<Check>> {
    let grid = GridSpec::new(1, (-2.0, 2.0), 256, (-2.0, 2.0), 256)?;
    let mut out = Vec::new();
    for (sx, sk) in [(1.0, 1.0), (2.0, 0.5)] {
        let p = SemiclassicalParams::new(1, epsilon, sx, sk)?;
        let cat = cat_state(&grid, &p, ([-0.6], [0.0]), ([0.6], [0.3]))?;
        let w = wigner_pure(&cat, &p, &grid)?;
        let h = smooth(&w, &p)?;
        let tag = format!("σ=({sx},{sk})");
        out.push(
            Check::inequality(
                format!("cat wigner is negative {tag}"),
                w.min(),
                -0.1 * w.max(),
                1.0,
            )
            .at(epsilon, 0.0),
        );
        out.push(
            Check::at_least(format!("cat husimi min {tag}"), h.min(), -1e-10).at(epsilon, 0.0),
        );
        let single = coherent_state(&[0.2], &[-0.1], &p, Envelope::Gaussian, &grid.spatial())?;
        let hs = smooth(&wigner_pure(&single, &p, &grid)?, &p)?;
        out.push(
            Check::at_least(format!("coherent husimi min {tag}"), hs.min(), -1e-10)
                .at(epsilon, 0.0),
        );
    }
    Ok(out)
}

fn wave_derivative_norms(u: &Wavefunction, epsilon: f64) -> Result<(f64, f64, f64)> {
    let axis = u.grid().axes()[0];
    let spec = u.spectrum()?;
    let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    let weighted: f64 = spec
        .iter()
        .enumerate()
        .map(|(j, c)| (2.0 * PI * axis.frequency(j)).powi(2) * c.norm_sqr())
        .sum();
    let un = u.norm();
    let h = axis.spacing();
    let xu: f64 = u
        .values()
        .iter()
        .enumerate()
        .map(|(j, c)| (axis.point(j) / epsilon).powi(2) * c.norm_sqr())
        .sum::<f64>()
        * h;
    Ok((un, un * (weighted / total).sqrt(), xu.sqrt()))
}

/// Pure-state scaling `‖W[u]‖ = ε^{−1/2}‖u‖²` and the gradient bounds
/// on coherent states.
pub fn pure_state_checks(epsilons: &[f64], x0: f64, k0: f64) -> Result<Vec<Check>> {
    let grid = GridSpec::new(1, (-1.0, 1.0), 512, (-1.0, 1.0), 512)?;
    let mut out = Vec::new();
    for &eps in epsilons {
        let p = SemiclassicalParams::husimi(1, eps)?;
        let u = coherent_state(&[x0], &[k0], &p, Envelope::Gaussian, &grid.spatial())?;
        let w = wigner_pure(&u, &p, &grid)?;
        let (un, dxu, xu) = wave_derivative_norms(&u, eps)?;
        let expected = un * un / eps.sqrt();
        out.push(
            Check::inequality(
                "pure-state scaling",
                (w.l2_norm() - expected).abs() / expected,
                1e-8,
                1.0,
            )
            .at(eps, 0.0)
            .with_norm("l2"),
        );
        let s = w.spectrum()?;
        let dxw = s.weighted_l2(|z| 2.0 * PI * z[0]);
        let dkw = s.weighted_l2(|z| 2.0 * PI * z[1]);
        let scale = eps.powf(-0.5);
        out.push(
            Check::inequality("coherent dx bound", dxw, 2.0 * scale * dxu * un, SLACK).at(eps, 0.0),
        );
        out.push(
            Check::inequality("coherent dk bound", dkw, 4.0 * PI * scale * xu * un, SLACK)
                .at(eps, 0.0),
        );
    }
    Ok(out)
}

/// A smooth test function on phase space.
pub type TestFunction = fn(&[f64]) -> f64;

/// `e^{−x²−k²}`, an offset anisotropic Gaussian and `(1+x²+k²)^{−2}`.
pub const TEST_FUNCTIONS: [(&str, TestFunction); 3] = [
    ("gaussian", |z| (-z[0] * z[0] - z[1] * z[1]).exp()),
    ("offset-anisotropic", |z| {
        (-(z[0] - 0.3).powi(2) / 0.5 - 2.0 * (z[1] + 0.2).powi(2)).exp()
    }),
    ("algebraic", |z| (1.0 + z[0] * z[0] + z[1] * z[1]).powi(-2)),
];

/// `|⟨W[u_ε] − δ_{z₀}, φ⟩|` for each test function, one row per ε.
pub fn delta_pairings(epsilons: &[f64], x0: f64, k0: f64) -> Result<Vec<Vec<f64>>> {
    let grid = GridSpec::new(1, (-2.0, 2.0), 1024, (-2.0, 2.0), 512)?;
    epsilons
        .iter()
        .map(|&eps| {
            let p = SemiclassicalParams::husimi(1, eps)?;
            let u = coherent_state(&[x0], &[k0], &p, Envelope::Gaussian, &grid.spatial())?;
            let w = wigner_pure(&u, &p, &grid)?;
            Ok(TEST_FUNCTIONS
                .iter()
                .map(|(_, phi)| (w.pair_with(phi) - phi(&[x0, k0])).abs())
                .collect())
        })
        .collect()
}

/// Decay-rate floor `0.9·min((2r−n)/(4n), 1/(2n))` for `n = 1`.
pub fn delta_rate_floor(r: u32) -> f64 {
    let n = 1.0;
    0.9 * ((2.0 * r as f64 - n) / (4.0 * n)).min(1.0 / (2.0 * n))
}

pub fn delta_convergence_checks(epsilons: &[f64], x0: f64, k0: f64, r: u32) -> Result<Vec<Check>> {
    let rows = delta_pairings(epsilons, x0, k0)?;
    let floor = delta_rate_floor(r);
    TEST_FUNCTIONS
        .iter()
        .enumerate()
        .map(|(j, (name, _))| {
            let err: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let fit = fit_slope(epsilons, &err, &[])?;
            Ok(Check::at_least(
                format!("delta pairing slope {name}"),
                fit.slope,
                floor,
            ))
        })
        .collect()
}

pub fn run_appendix_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    cfg.validate(3)?;
    let mut report = SuiteReport::new(format!("{}-appendix", cfg.experiment));
    let sigmas = [(cfg.params.sigma_x, cfg.params.sigma_k)];
    report
        .checks
        .extend(unsmoothing_checks(cfg.seed, 200, &cfg.epsilons, &sigmas)?);
    let gaussian = semiclassical::schrodinger::PhaseSpaceGaussian::mixed(&[0.0, 0.0], &[0.5, 0.5])?
        .sample(&GridSpec::new(1, (-4.0, 4.0), 128, (-4.0, 4.0), 128)?)?;
    let p = cfg.params(0.01)?;
    report.push(
        Check::inequality(
            "unsmoothing on a Gaussian",
            unsmoothing_ratio(&gaussian, &p, 0)?,
            1.0,
            1.0,
        )
        .at(0.01, 0.0),
    );
    report.checks.extend(husimi_positivity_checks(0.05)?);
    report
        .checks
        .extend(pure_state_checks(&cfg.epsilons, 0.1, 0.2)?);
    let sweep = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    report
        .checks
        .extend(delta_convergence_checks(&sweep, 0.1, 0.2, 1)?);
    Ok(report)
}

/// Norms exercised by the Young-inequality draws.
pub const YOUNG_VARIANTS: [NormKind; 5] = [
    NormKind::L2,
    NormKind::Sobolev(1),
    NormKind::Sobolev(2),
    NormKind::Sobolev(-1),
    NormKind::Xmp { m: 1.0, p: 2.0 },
];

pub fn young_checks(seed: u64, draws: usize) -> Result<Vec<Check>> {
    let grid = GridSpec::new(1, (-4.0, 4.0), 64, (-4.0, 4.0), 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for kind in YOUNG_VARIANTS {
        let mut ratios = Vec::with_capacity(draws);
        for _ in 0..draws {
            let g = random_band_limited(&mut rng, &grid, 2.0)?;
            let len = rng.random_range(1..=33);
            let f: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (lhs, rhs) = young_convolution_check(&f, &g, kind)?;
            ratios.push(if rhs > 0.0 { lhs / rhs } else { 0.0 });
        }
        out.push(
            Check::ratios(
                format!("young {}", crate::config::NormSpec(kind)),
                &ratios,
                1.0 + 1e-12,
            )
            .with_norm(crate::config::NormSpec(kind).to_string()),
        );
    }
    Ok(out)
}

pub fn gamma_checks(ms: std::ops::RangeInclusive<u32>, thetas: &[f64]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &theta in thetas {
        for m in ms.clone() {
            let (lhs, rhs) = gamma_inequality_check(m, theta)?;
            out.push(Check::inequality(
                format!("gamma m={m} θ={theta}"),
                lhs,
                rhs,
                1.0,
            ));
        }
    }
    Ok(out)
}

pub fn run_auxiliary_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(format!("{}-auxiliary", cfg.experiment));
    report.checks.extend(young_checks(cfg.seed, 100)?);
    report.checks.extend(gamma_checks(10..=50, &[1.5, 2.5])?);
    Ok(report)
}

pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<SuiteReport> {
    match name {
        "regularity" => run_regularity_suite(cfg),
        "appendix" => run_appendix_suite(cfg),
        "auxiliary" => run_auxiliary_suite(cfg),
        _ => Err(HarnessError::Invalid(format!(
            "unknown suite `{name}` (expected regularity, appendix or auxiliary)"
        ))),
    }
}
