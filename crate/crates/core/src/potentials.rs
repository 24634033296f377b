//! Potentials given by their Fourier data, Gaussian mollification, and the
//! decay/moment audit.
//!
//! `V(x) = ∫ V̂(S) e^{2πi S·x} dS`, with `V̂` either a finite set of atoms or
//! a density sampled on a uniform S-grid. A quadratic polynomial kind exists
//! as an exactness oracle (quantum and classical transport coincide).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fft::Fft;
use crate::grid::Axis;
use crate::interp;
use crate::params::SemiclassicalParams;
use crate::{Error, Result};

/// Default S-grid for sampled densities.
pub const DEFAULT_RADIUS: f64 = 64.0;
pub const DEFAULT_BINS: usize = 8192;

const TABLE_PADDING: usize = 4;
const TABLE_ORDER: usize = 8;

/// Tail envelope `|V̂(S)| ≤ D |S|^{−(n+1+θ)}` for `|S| > R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayMeta {
    pub theta: f64,
    pub d: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Frequency; the second component is ignored for n = 1.
    pub s: [f64; 2],
    pub weight: Complex64,
}

impl Mode {
    pub fn new_1d(s: f64, re: f64, im: f64) -> Self {
        Self {
            s: [s, 0.0],
            weight: Complex64::new(re, im),
        }
    }

    fn abs_freq(&self, n: usize) -> f64 {
        self.s[..n].iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Density `V̂(S_j)` on `S_j = (j − M/2)·ΔS`, one spatial dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDensity {
    spacing: f64,
    values: Vec<Complex64>,
    table_h: f64,
    table_v: Vec<f64>,
    table_dv: Vec<f64>,
}

impl SampledDensity {
    pub fn new(radius: f64, values: Vec<Complex64>) -> Result<Self> {
        let m = values.len();
        if m < 4 || !m.is_power_of_two() {
            return Err(Error::Grid(format!(
                "S-grid size {m} is not a power of two"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!(
                "S-grid radius {radius} must be positive"
            )));
        }
        if values
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::Data("non-finite density sample".into()));
        }
        let spacing = 2.0 * radius / m as f64;
        for j in 1..m / 2 {
            let (a, b) = (values[m / 2 + j], values[m / 2 - j]);
            if (a - b.conj()).norm() > 1e-12 * (a.norm() + b.norm()).max(1e-300) {
                return Err(Error::Data(format!(
                    "density is not Hermitian at S = {}",
                    j as f64 * spacing
                )));
            }
        }
        let mut values = values;
        values[m / 2].im = 0.0;
        values[0].im = 0.0;
        let mut d = Self {
            spacing,
            values,
            table_h: 0.0,
            table_v: Vec::new(),
            table_dv: Vec::new(),
        };
        d.build_tables()?;
        Ok(d)
    }

    /// Samples a real even profile `V̂(S) = f(|S|)`.
    pub fn from_profile(radius: f64, bins: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let spacing = 2.0 * radius / bins as f64;
        let values = (0..bins)
            .map(|j| Complex64::new(f(((j as f64) - (bins / 2) as f64).abs() * spacing), 0.0))
            .collect();
        Self::new(radius, values)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn radius(&self) -> f64 {
        self.spacing * self.values.len() as f64 / 2.0
    }

    pub fn frequency(&self, j: usize) -> f64 {
        (j as f64 - (self.values.len() / 2) as f64) * self.spacing
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Position tables for `V` and `V′` on a zero-padded grid of period `1/ΔS`.
    fn build_tables(&mut self) -> Result<()> {
        let m = self.values.len();
        let size = m * TABLE_PADDING;
        let fft = Fft::new(size)?;
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); size];
        let mut dv = v.clone();
        for (j, c) in self.values.iter().enumerate() {
            let q = j as i64 - (m / 2) as i64;
            let slot = q.rem_euclid(size as i64) as usize;
            let s = q as f64 * self.spacing;
            v[slot] = *c * self.spacing;
            dv[slot] = *c * Complex64::new(0.0, 2.0 * PI * s) * self.spacing;
        }
        fft.inverse(&mut v);
        fft.inverse(&mut dv);
        self.table_h = 1.0 / (self.spacing * size as f64);
        self.table_v = v.iter().map(|c| c.re).collect();
        self.table_dv = dv.iter().map(|c| c.re).collect();
        Ok(())
    }

    fn value(&self, x: f64) -> f64 {
        interp::periodic(&self.table_v, x / self.table_h, TABLE_ORDER)
    }

    fn derivative(&self, x: f64) -> f64 {
        interp::periodic(&self.table_dv, x / self.table_h, TABLE_ORDER)
    }
}

/// `Σ f_j − f_0/2` plus Gregory end corrections at `j = 0`, so that
/// integrands like `|S|^m g(S)` keep high order across the kink at the origin.
fn half_line(f: &[f64]) -> f64 {
    const GREGORY: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 24.0,
        19.0 / 720.0,
        -3.0 / 160.0,
        863.0 / 60480.0,
        -275.0 / 24192.0,
    ];
    let mut total = f.iter().sum::<f64>() - 0.5 * f[0];
    let mut diff: Vec<f64> = f[..GREGORY.len() + 1].to_vec();
    for c in GREGORY {
        for i in 0..diff.len() - 1 {
            diff[i] = diff[i + 1] - diff[i];
        }
        diff.pop();
        total += c * diff[0];
    }
    total
}

/// Named real-even density profiles for sampled potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `V(x) = a·e^{−x²/w²}`, so `V̂(S) = a·w·√π·e^{−π²w²S²}`.
    Gaussian { amplitude: f64, width: f64 },
    /// `V̂(S) = a·(1 + |S|)^{−p}`.
    PowerLaw { amplitude: f64, exponent: f64 },
}

impl Profile {
    pub fn density(&self, s: f64) -> f64 {
        match *self {
            Profile::Gaussian { amplitude, width } => {
                amplitude * width * PI.sqrt() * (-(PI * width * s).powi(2)).exp()
            }
            Profile::PowerLaw {
                amplitude,
                exponent,
            } => amplitude * (1.0 + s.abs()).powf(-exponent),
        }
    }
}

/// `V(x) = c0 + Σ b_i x_i + Σ a_i x_i²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub c0: f64,
    pub linear: [f64; 2],
    pub quadratic: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Atomic(Vec<Mode>),
    Sampled(SampledDensity),
    Polynomial(Quadratic),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierPotential {
    n: usize,
    kind: PotentialKind,
    decay: Option<DecayMeta>,
    /// Total Gaussian exponent `η` applied so far.
    mollification: f64,
    /// Atoms folded into conjugate pairs: (frequency, weight, multiplicity).
    half: Vec<([f64; 2], Complex64, f64)>,
}

fn fold_pairs(n: usize, modes: &[Mode]) -> Result<Vec<([f64; 2], Complex64, f64)>> {
    let close = |a: &[f64; 2], b: &[f64; 2]| {
        (0..n).all(|i| (a[i] - b[i]).abs() <= 1e-12 * (1.0 + a[i].abs()))
    };
    let mut used = alloc::vec![false; modes.len()];
    let mut half = Vec::new();
    for i in 0..modes.len() {
        if used[i] {
            continue;
        }
        let m = modes[i];
        if (0..n).all(|a| m.s[a] == 0.0) {
            if m.weight.im.abs() > 1e-14 * m.weight.norm().max(1.0) {
                return Err(Error::Data(
                    "zero-frequency atom must have a real weight".into(),
                ));
            }
            used[i] = true;
            half.push((m.s, Complex64::new(m.weight.re, 0.0), 1.0));
            continue;
        }
        let neg = [-m.s[0], -m.s[1]];
        let partner = (0..modes.len()).find(|&j| {
            !used[j]
                && j != i
                && close(&modes[j].s, &neg)
                && (modes[j].weight - m.weight.conj()).norm() <= 1e-12 * m.weight.norm().max(1e-300)
        });
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
                half.push((m.s, m.weight, 2.0));
            }
            None => {
                return Err(Error::Data(format!(
                "atom at S = {:?} has no conjugate partner at −S; the potential would not be real",
                &m.s[..n]
            )))
            }
        }
    }
    Ok(half)
}

impl FourierPotential {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            kind: PotentialKind::Atomic(Vec::new()),
            decay: None,
            mollification: 0.0,
            half: Vec::new(),
        }
    }

    pub fn atomic(n: usize, modes: Vec<Mode>) -> Result<Self> {
        if !(n == 1 || n == 2) {
            return Err(Error::Unsupported(format!("dimension {n}")));
        }
        if modes.iter().any(|m| {
            !(m.s.iter().all(|v| v.is_finite())
                && m.weight.re.is_finite()
                && m.weight.im.is_finite())
        }) {
            return Err(Error::Data("non-finite atom".into()));
        }
        let half = fold_pairs(n, &modes)?;
        Ok(Self {
            n,
            kind: PotentialKind::Atomic(modes),
            decay: None,
            mollification: 0.0,
            half,
        })
    }

    /// `a·cos(2π f x)` in one dimension.
    pub fn cosine(amplitude: f64, frequency: f64) -> Self {
        Self::atomic(
            1,
            alloc::vec![
                Mode::new_1d(frequency, amplitude / 2.0, 0.0),
                Mode::new_1d(-frequency, amplitude / 2.0, 0.0)
            ],
        )
        .expect("conjugate pair by construction")
    }

    pub fn sampled(density: SampledDensity) -> Self {
        Self {
            n: 1,
            kind: PotentialKind::Sampled(density),
            decay: None,
            mollification: 0.0,
            half: Vec::new(),
        }
    }

    pub fn from_profile(profile: Profile) -> Result<Self> {
        let d = SampledDensity::from_profile(DEFAULT_RADIUS, DEFAULT_BINS, |s| profile.density(s))?;
        Ok(Self::sampled(d))
    }

    pub fn polynomial(n: usize, q: Quadratic) -> Result<Self> {
        if !(n == 1 || n == 2) {
            return Err(Error::Unsupported(format!("dimension {n}")));
        }
        Ok(Self {
            n,
            kind: PotentialKind::Polynomial(q),
            decay: None,
            mollification: 0.0,
            half: Vec::new(),
        })
    }

    /// `V(x) = a·|x|²`.
    pub fn harmonic(n: usize, a: f64) -> Result<Self> {
        Self::polynomial(
            n,
            Quadratic {
                c0: 0.0,
                linear: [0.0; 2],
                quadratic: [a, a],
            },
        )
    }

    pub fn with_decay(mut self, decay: DecayMeta) -> Self {
        self.decay = Some(decay);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn decay(&self) -> Option<DecayMeta> {
        self.decay
    }

    pub fn mollification(&self) -> f64 {
        self.mollification
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.kind, PotentialKind::Polynomial(_))
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::Atomic(_) => self
                .half
                .iter()
                .all(|(_, c, _)| *c == Complex64::new(0.0, 0.0)),
            PotentialKind::Sampled(d) => d.values.iter().all(|c| c.norm() == 0.0),
            PotentialKind::Polynomial(q) => {
                q.c0 == 0.0 && q.linear.iter().chain(&q.quadratic).all(|v| *v == 0.0)
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Atomic(_) => self
                .half
                .iter()
                .map(|(s, c, mult)| {
                    let phase: f64 = (0..self.n).map(|i| s[i] * x[i]).sum::<f64>() * 2.0 * PI;
                    let (sn, cs) = phase.sin_cos();
                    mult * (c.re * cs - c.im * sn)
                })
                .sum(),
            PotentialKind::Sampled(d) => d.value(x[0]),
            PotentialKind::Polynomial(q) => {
                q.c0 + (0..self.n)
                    .map(|i| q.linear[i] * x[i] + q.quadratic[i] * x[i] * x[i])
                    .sum::<f64>()
            }
        }
    }

    /// `∇V(x)`.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            PotentialKind::Atomic(_) => {
                out[..self.n].iter_mut().for_each(|o| *o = 0.0);
                for (s, c, mult) in &self.half {
                    let phase: f64 = (0..self.n).map(|i| s[i] * x[i]).sum::<f64>() * 2.0 * PI;
                    let (sn, cs) = phase.sin_cos();
                    // Re(2πi S c e^{iφ}) = −2π S Im(c e^{iφ})
                    let im = c.re * sn + c.im * cs;
                    for i in 0..self.n {
                        out[i] -= mult * 2.0 * PI * s[i] * im;
                    }
                }
            }
            PotentialKind::Sampled(d) => out[0] = d.derivative(x[0]),
            PotentialKind::Polynomial(q) => {
                for i in 0..self.n {
                    out[i] = q.linear[i] + 2.0 * q.quadratic[i] * x[i];
                }
            }
        }
    }

    /// `∫ |V̂(S)| w(|S|) dS`.
    pub fn abs_moment(&self, w: impl Fn(f64) -> f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::Atomic(modes) => Ok(modes
                .iter()
                .map(|m| m.weight.norm() * w(m.abs_freq(self.n)))
                .sum()),
            PotentialKind::Sampled(d) => {
                let mid = d.values.len() / 2;
                let f = |j: usize| d.values[j].norm() * w(d.frequency(j).abs());
                let right: Vec<f64> = (mid..d.values.len()).map(f).collect();
                let left: Vec<f64> = (0..=mid).rev().map(f).collect();
                Ok((half_line(&right) + half_line(&left)) * d.spacing)
            }
            PotentialKind::Polynomial(_) => Err(Error::Unsupported(
                "polynomial potentials have no integrable Fourier transform".into(),
            )),
        }
    }

    /// Largest atom frequency, if the spectrum is a finite set.
    pub fn max_frequency(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::Atomic(modes) => {
                Some(modes.iter().map(|m| m.abs_freq(self.n)).fold(0.0, f64::max))
            }
            _ => None,
        }
    }

    /// Whether `V` is periodic on the given position box.
    pub fn periodic_on(&self, axes: &[Axis]) -> bool {
        match &self.kind {
            PotentialKind::Atomic(modes) => modes.iter().all(|m| {
                (0..self.n).all(|i| {
                    let c = m.s[i] * axes[i].length();
                    (c - c.round()).abs() < 1e-9
                })
            }),
            _ => self.is_zero(),
        }
    }

    /// Applies a real radial multiplier `g(|S|²)` to the Fourier data.
    fn multiply(&self, g: impl Fn(f64) -> f64, eta: f64) -> Result<Self> {
        let kind = match &self.kind {
            PotentialKind::Atomic(modes) => PotentialKind::Atomic(
                modes
                    .iter()
                    .map(|m| {
                        let s2 = m.abs_freq(self.n).powi(2);
                        Mode {
                            s: m.s,
                            weight: m.weight * g(s2),
                        }
                    })
                    .collect(),
            ),
            PotentialKind::Sampled(d) => {
                let values = d
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * g(d.frequency(j).powi(2)))
                    .collect();
                PotentialKind::Sampled(SampledDensity::new(d.radius(), values)?)
            }
            PotentialKind::Polynomial(q) => {
                // Gaussian convolution with variance η/(2π²) per axis.
                let shift: f64 =
                    (0..self.n).map(|i| q.quadratic[i]).sum::<f64>() * eta / (2.0 * PI * PI);
                PotentialKind::Polynomial(Quadratic {
                    c0: q.c0 + shift,
                    ..*q
                })
            }
        };
        let half = match &kind {
            PotentialKind::Atomic(modes) => fold_pairs(self.n, modes)?,
            _ => Vec::new(),
        };
        Ok(Self {
            n: self.n,
            kind,
            decay: self.decay,
            mollification: self.mollification + eta,
            half,
        })
    }

    /// Stable 64-bit digest of the potential data (FNV-1a).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.n as u64);
        match &self.kind {
            PotentialKind::Atomic(modes) => {
                eat(1);
                for m in modes {
                    eat(m.s[0].to_bits());
                    eat(m.s[1].to_bits());
                    eat(m.weight.re.to_bits());
                    eat(m.weight.im.to_bits());
                }
            }
            PotentialKind::Sampled(d) => {
                eat(2);
                eat(d.spacing.to_bits());
                for c in &d.values {
                    eat(c.re.to_bits());
                    eat(c.im.to_bits());
                }
            }
            PotentialKind::Polynomial(q) => {
                eat(3);
                for v in [
                    q.c0,
                    q.linear[0],
                    q.linear[1],
                    q.quadratic[0],
                    q.quadratic[1],
                ] {
                    eat(v.to_bits());
                }
            }
        }
        eat(self.mollification.to_bits());
        h
    }
}

/// `∇V(x)`, the drift of the classical momentum equation up to `−1/2π`.
pub fn force(pot: &FourierPotential, x: &[f64]) -> Result<[f64; 2]> {
    if x.iter().take(pot.n).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite position".into()));
    }
    let mut g = [0.0; 2];
    pot.gradient(x, &mut g);
    Ok(g)
}

/// Result of a moment integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Divergent,
}

impl Moment {
    pub fn value(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Divergent => None,
        }
    }

    pub(crate) fn from_value(v: f64) -> Self {
        if v.is_finite() {
            Moment::Finite(v)
        } else {
            Moment::Divergent
        }
    }
}

/// `M₀ = ∫ |V̂(S)| (1 + |S|^{r+2}) dS`.
pub fn m0_moment(pot: &FourierPotential, r: u32) -> Result<Moment> {
    let p = r as i32 + 2;
    pot.abs_moment(|s| 1.0 + s.powi(p)).map(Moment::from_value)
}

/// `V̂₁(S) = e^{−η|S|²} V̂(S)`.
pub fn mollify_v1(pot: &FourierPotential, eta: f64) -> Result<FourierPotential> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!(
            "mollification scale {eta} must be ≥ 0"
        )));
    }
    if eta == 0.0 {
        return Ok(pot.clone());
    }
    pot.multiply(|s2| (-eta * s2).exp(), eta)
}

/// `Ṽ̂₁(S) = e^{−η′|S|²} V̂(S)`.
pub fn mollify_vtilde1(
    pot: &FourierPotential,
    params: &SemiclassicalParams,
) -> Result<FourierPotential> {
    mollify_v1(pot, params.eta_prime)
}

/// Surface measure of the unit sphere in `ℝⁿ`.
fn sphere_area(n: usize) -> f64 {
    if n == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditStatus {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSample {
    pub m: u32,
    /// `‖(1 − e^{−η′|S|²}) |S|^{m+1} V̂‖_{L¹}`.
    pub measured: f64,
    /// `ε^{(θ−m)/2} + ε`.
    pub scale: f64,
    /// Constructive bound from the decay envelope, when available.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionAudit {
    pub r: u32,
    pub m0: Moment,
    pub status: AuditStatus,
    pub theta: Option<f64>,
    pub reason: Option<String>,
    pub tail_bound_samples: Vec<TailSample>,
    /// Mass of the decay envelope beyond the S-grid (sampled kind only).
    pub truncation_tail: Option<f64>,
}

impl AssumptionAudit {
    pub fn a1prime_holds(&self) -> bool {
        self.status == AuditStatus::Holds
    }
}

fn tail_bound(n: usize, meta: &DecayMeta, theta: f64, m: u32, eta_p: f64, l1: f64) -> f64 {
    let m = m as f64;
    let r0 = meta.r.max(1.0);
    let a = eta_p.powf(-0.5).max(r0);
    let q = m + 2.0 - theta;
    let middle = if q.abs() < 1e-12 {
        (a / r0).ln()
    } else {
        (a.powf(q) - r0.powf(q)) / q
    };
    eta_p * r0.powf(m + 3.0) * l1
        + sphere_area(n) * meta.d * (eta_p * middle + a.powf(m - theta) / (theta - m))
}

/// Checks the power-law decay envelope and evaluates the mollification tail
/// integrals for `m = 0..=r` at the given parameters.
pub fn audit_a1prime(
    pot: &FourierPotential,
    r: u32,
    params: &SemiclassicalParams,
) -> Result<AssumptionAudit> {
    let m0 = m0_moment(pot, r)?;
    let eta_p = params.eta_prime;
    let measure =
        |m: u32| pot.abs_moment(|s| (1.0 - (-eta_p * s * s).exp()) * s.powi(m as i32 + 1));
    let scale = |theta: f64, m: u32| params.epsilon.powf((theta - m as f64) / 2.0) + params.epsilon;
    let mut audit = AssumptionAudit {
        r,
        m0,
        status: AuditStatus::Inconclusive,
        theta: None,
        reason: None,
        tail_bound_samples: Vec::new(),
        truncation_tail: None,
    };
    if pot.is_zero() {
        audit.status = AuditStatus::Holds;
        audit.tail_bound_samples = (0..=r)
            .map(|m| TailSample {
                m,
                measured: 0.0,
                scale: 0.0,
                bound: Some(0.0),
            })
            .collect();
        return Ok(audit);
    }
    let Some(meta) = pot.decay() else {
        audit.reason = Some("no decay envelope supplied".into());
        for m in 0..=r {
            audit.tail_bound_samples.push(TailSample {
                m,
                measured: measure(m)?,
                scale: f64::NAN,
                bound: None,
            });
        }
        return Ok(audit);
    };
    let n = pot.n();
    let window = |t: f64| t > r as f64 + 1.0 && t < r as f64 + 2.0;
    let mut theta = meta.theta;
    let mut failure: Option<String> = None;
    if m0 == Moment::Divergent {
        failure = Some("M0 diverges".into());
    }
    match pot.kind() {
        PotentialKind::Atomic(modes) => {
            let inside = modes.iter().all(|md| md.abs_freq(n) <= meta.r);
            if !window(theta) && inside {
                // A spectrum supported in |S| ≤ R meets the envelope for every θ.
                theta = r as f64 + 1.5;
            }
            for md in modes {
                let s = md.abs_freq(n);
                if s > meta.r
                    && md.weight.norm() > meta.d * s.powf(-(n as f64 + 1.0 + theta)) * (1.0 + 1e-12)
                {
                    failure.get_or_insert_with(|| {
                        format!("atom at |S| = {s} exceeds the decay envelope")
                    });
                }
            }
        }
        PotentialKind::Sampled(d) => {
            for (j, c) in d.values().iter().enumerate() {
                let s = d.frequency(j).abs();
                if s > meta.r
                    && c.norm() > meta.d * s.powf(-(n as f64 + 1.0 + theta)) * (1.0 + 1e-12)
                {
                    failure.get_or_insert_with(|| {
                        format!("density at |S| = {s} exceeds the decay envelope")
                    });
                }
            }
            let smax = d.radius();
            let p = r as f64 + 2.0;
            audit.truncation_tail =
                Some(sphere_area(n) * meta.d * smax.powf(p - 1.0 - theta) / (1.0 + theta - p));
        }
        PotentialKind::Polynomial(_) => unreachable!("rejected by m0_moment"),
    }
    if !window(theta) {
        failure.get_or_insert_with(|| format!("θ = {theta} is outside ({}, {})", r + 1, r + 2));
    }
    let l1 = pot.abs_moment(|_| 1.0)?;
    for m in 0..=r {
        audit.tail_bound_samples.push(TailSample {
            m,
            measured: measure(m)?,
            scale: scale(theta, m),
            bound: Some(tail_bound(n, &meta, theta, m, eta_p, l1)),
        });
    }
    audit.theta = Some(theta);
    match failure {
        Some(reason) => {
            audit.status = AuditStatus::Fails;
            audit.reason = Some(reason);
        }
        None => audit.status = AuditStatus::Holds,
    }
    Ok(audit)
}

/// Tail constant `C_m = max over the sweep of measured/(ε^{(θ−m)/2} + ε)`.
pub fn estimate_tail_constants(
    pot: &FourierPotential,
    r: u32,
    sweep: &[SemiclassicalParams],
) -> Result<Vec<f64>> {
    let mut c = alloc::vec![0.0f64; r as usize + 1];
    for p in sweep {
        let a = audit_a1prime(pot, r, p)?;
        for t in &a.tail_bound_samples {
            if t.scale > 0.0 && t.scale.is_finite() {
                c[t.m as usize] = c[t.m as usize].max(t.measured / t.scale);
            }
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBound {
    /// `(2π)^m ∫ |V̂| |S|^m dS` of the (mollified) potential.
    pub value: Moment,
    /// Bound from the decay envelope and the applied mollification.
    pub envelope: Option<f64>,
}

/// Sup-norm bound on the `m`-th derivatives of a mollified potential.
pub fn derivative_sup_bounds(pot: &FourierPotential, m: u32) -> Result<SupBound> {
    let tp = (2.0 * PI).powi(m as i32);
    let value = Moment::from_value(tp * pot.abs_moment(|s| s.powi(m as i32))?);
    let envelope = pot.decay().and_then(|meta| {
        let l1 = pot.abs_moment(|_| 1.0).ok()?;
        let eta = pot.mollification();
        let (mf, th) = (m as f64, meta.theta);
        let r0 = meta.r.max(1.0);
        let w = sphere_area(pot.n()) * meta.d;
        if mf < th + 1.0 {
            Some(tp * (r0.powf(mf) * l1 + w * r0.powf(mf - 1.0 - th) / (th + 1.0 - mf)))
        } else if mf > th + 1.0 && eta > 0.0 {
            let a = (mf - 1.0 - th) / 2.0;
            let gamma = libm::lgamma(a).exp();
            Some(tp * (r0.powf(mf) * l1 + w * 0.5 * eta.powf(-a) * gamma))
        } else {
            None
        }
    });
    Ok(SupBound { value, envelope })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> FourierPotential {
        FourierPotential::from_profile(Profile::Gaussian {
            amplitude: 1.0,
            width: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn cosine_moment() {
        let m0 = m0_moment(&FourierPotential::cosine(1.0, 1.0), 0).unwrap();
        assert_eq!(m0, Moment::Finite(2.0));
        assert_eq!(
            m0_moment(&FourierPotential::zero(1), 0).unwrap(),
            Moment::Finite(0.0)
        );
    }

    #[test]
    fn gaussian_moment() {
        let m0 = m0_moment(&gaussian(), 0).unwrap().value().unwrap();
        let exact = 1.0 + 1.0 / (2.0 * PI * PI);
        assert!((m0 - exact).abs() < 1e-9, "{m0}");
        assert!((m0 - 1.050661).abs() < 1e-6);
    }

    #[test]
    fn polynomial_is_not_audited() {
        let p = FourierPotential::harmonic(1, 2.0 * PI * PI).unwrap();
        assert!(matches!(m0_moment(&p, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn cosine_values_and_force() {
        let v = FourierPotential::cosine(1.0, 1.0);
        assert!((v.value(&[0.1]) - (0.2 * PI).cos()).abs() < 1e-15);
        assert_eq!(force(&v, &[0.0]).unwrap()[0].abs(), 0.0);
        assert!((force(&v, &[0.25]).unwrap()[0] + 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn harmonic_force() {
        let p = FourierPotential::harmonic(1, 2.0 * PI * PI).unwrap();
        assert!((force(&p, &[0.5]).unwrap()[0] - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn sampled_gaussian_matches_position_space() {
        let v = gaussian();
        for &x in &[0.0, 0.37, -1.9, 3.3] {
            let exact: f64 = (-x * x).exp();
            assert!((v.value(&[x]) - exact).abs() < 1e-10, "{x}");
            let mut g = [0.0; 2];
            v.gradient(&[x], &mut g);
            assert!((g[0] + 2.0 * x * exact).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn realness_is_enforced() {
        let lone = FourierPotential::atomic(1, alloc::vec![Mode::new_1d(1.0, 0.5, 0.0)]);
        assert!(lone.is_err());
        let twisted = FourierPotential::atomic(
            1,
            alloc::vec![Mode::new_1d(1.0, 0.5, 0.2), Mode::new_1d(-1.0, 0.5, 0.2)],
        );
        assert!(twisted.is_err());
        let ok = FourierPotential::atomic(
            1,
            alloc::vec![Mode::new_1d(1.0, 0.5, 0.2), Mode::new_1d(-1.0, 0.5, -0.2)],
        )
        .unwrap();
        // 0.5 e^{iφ}(1 + 0.4i) + c.c. = cos φ − 0.4 sin φ
        let x = 0.3;
        let phi = 2.0 * PI * x;
        assert!((ok.value(&[x]) - (phi.cos() - 0.4 * phi.sin())).abs() < 1e-14);
    }

    #[test]
    fn mollified_cosine_weights() {
        let v = mollify_v1(&FourierPotential::cosine(1.0, 1.0), 0.05).unwrap();
        let PotentialKind::Atomic(modes) = v.kind() else {
            panic!()
        };
        for m in modes {
            assert!((m.weight.re - 0.5 * (-0.05f64).exp()).abs() < 1e-15);
        }
        assert!((modes[0].weight.re - 0.4756147).abs() < 1e-7);
        let p = SemiclassicalParams::husimi(1, 0.01).unwrap();
        let vt = mollify_vtilde1(&FourierPotential::cosine(1.0, 1.0), &p).unwrap();
        let PotentialKind::Atomic(modes) = vt.kind() else {
            panic!()
        };
        assert!((modes[0].weight.re - 0.4648).abs() < 1e-4);
    }

    #[test]
    fn zero_scale_is_identity() {
        let v = FourierPotential::cosine(1.0, 1.0);
        assert_eq!(mollify_v1(&v, 0.0).unwrap(), v);
        assert!(mollify_v1(&v, -1.0).is_err());
    }

    #[test]
    fn mollified_gaussian_density() {
        let v = mollify_v1(&gaussian(), 1.0).unwrap();
        let PotentialKind::Sampled(d) = v.kind() else {
            panic!()
        };
        for (j, c) in d.values().iter().enumerate() {
            let s = d.frequency(j);
            let exact = PI.sqrt() * (-(PI * PI + 1.0) * s * s).exp();
            assert!((c.re - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn mollified_power_law_l1_difference() {
        let v = FourierPotential::from_profile(Profile::PowerLaw {
            amplitude: 1.0,
            exponent: 3.5,
        })
        .unwrap();
        let eta = 0.03;
        let m = mollify_v1(&v, eta).unwrap();
        let (PotentialKind::Sampled(a), PotentialKind::Sampled(b)) = (v.kind(), m.kind()) else {
            panic!()
        };
        let diff: f64 = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .sum::<f64>()
            * a.spacing();
        // independent quadrature: 2∫_0^R (1 − e^{−ηs²})(1+s)^{−7/2} ds, Simpson with 2^16 panels
        let f = |s: f64| (1.0 - (-eta * s * s).exp()) * (1.0 + s).powf(-3.5);
        let n = 1 << 16;
        let h = 64.0 / n as f64;
        let mut simpson = f(0.0) + f(64.0);
        for i in 1..n {
            simpson += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let quad = 2.0 * simpson * h / 3.0;
        assert!((diff - quad).abs() < 1e-6 * quad, "{diff} vs {quad}");
    }

    #[test]
    fn power_law_audit_holds() {
        let v = FourierPotential::from_profile(Profile::PowerLaw {
            amplitude: 1.0,
            exponent: 3.5,
        })
        .unwrap()
        .with_decay(DecayMeta {
            theta: 1.5,
            d: 1.0,
            r: 0.0,
        });
        let p = SemiclassicalParams::husimi(1, 0.01).unwrap();
        let a = audit_a1prime(&v, 0, &p).unwrap();
        assert!(a.a1prime_holds(), "{:?}", a.reason);
        for t in &a.tail_bound_samples {
            assert!(t.measured <= t.bound.unwrap());
        }
        assert!(a.truncation_tail.unwrap() > 0.0);
    }

    #[test]
    fn cosine_tail_sample() {
        let v = FourierPotential::cosine(1.0, 1.0).with_decay(DecayMeta {
            theta: 1.5,
            d: 1.0,
            r: 1.0,
        });
        let mut p = SemiclassicalParams::husimi(1, 0.01).unwrap();
        p.eta_prime = 0.057;
        let a = audit_a1prime(&v, 0, &p).unwrap();
        let t = a.tail_bound_samples[0];
        assert!((t.measured - 0.05540).abs() < 1e-5, "{}", t.measured);
        assert!(a.a1prime_holds());
        assert!(t.measured <= t.bound.unwrap());
    }

    #[test]
    fn zero_potential_audit() {
        let p = SemiclassicalParams::husimi(1, 0.01).unwrap();
        let a = audit_a1prime(&FourierPotential::zero(1), 2, &p).unwrap();
        assert!(a.a1prime_holds());
        assert!(a.tail_bound_samples.iter().all(|t| t.measured == 0.0));
    }

    #[test]
    fn missing_envelope_is_inconclusive() {
        let p = SemiclassicalParams::husimi(1, 0.01).unwrap();
        let a = audit_a1prime(&gaussian(), 0, &p).unwrap();
        assert_eq!(a.status, AuditStatus::Inconclusive);
    }

    #[test]
    fn envelope_violation_fails() {
        let v = FourierPotential::cosine(3.0, 2.0).with_decay(DecayMeta {
            theta: 1.5,
            d: 1.0,
            r: 1.0,
        });
        let p = SemiclassicalParams::husimi(1, 0.01).unwrap();
        assert_eq!(audit_a1prime(&v, 0, &p).unwrap().status, AuditStatus::Fails);
    }

    #[test]
    fn sup_bound_cosine() {
        let v = mollify_v1(&FourierPotential::cosine(1.0, 1.0), 0.0728).unwrap();
        let b = derivative_sup_bounds(&v, 2).unwrap().value.value().unwrap();
        assert!((b - 36.706).abs() < 1e-3, "{b}");
        assert_eq!(
            derivative_sup_bounds(&FourierPotential::zero(1), 3)
                .unwrap()
                .value,
            Moment::Finite(0.0)
        );
    }

    #[test]
    fn sup_bound_gaussian_third_derivative() {
        let eta = 0.0728;
        let v = mollify_v1(&gaussian(), eta).unwrap();
        let b = derivative_sup_bounds(&v, 3).unwrap().value.value().unwrap();
        // (2π)³ √π · 2 ∫₀^∞ s³ e^{−(π²+η)s²} ds = (2π)³ √π / (π²+η)²
        let exact = (2.0 * PI).powi(3) * PI.sqrt() / (PI * PI + eta).powi(2);
        assert!((b - exact).abs() < 1e-8 * exact, "{b} {exact}");
    }

    #[test]
    fn envelope_bound_dominates() {
        let v = FourierPotential::from_profile(Profile::PowerLaw {
            amplitude: 1.0,
            exponent: 3.5,
        })
        .unwrap()
        .with_decay(DecayMeta {
            theta: 1.5,
            d: 1.0,
            r: 0.0,
        });
        let v = mollify_v1(&v, 0.05).unwrap();
        for m in 0..6 {
            let b = derivative_sup_bounds(&v, m).unwrap();
            if let Some(e) = b.envelope {
                assert!(b.value.value().unwrap() <= e, "m = {m}");
            }
        }
    }

    #[test]
    fn mollified_quadratic_shifts_constant() {
        let p = FourierPotential::harmonic(1, 1.0).unwrap();
        let m = mollify_v1(&p, 0.4).unwrap();
        assert!((m.value(&[0.0]) - 0.4 / (2.0 * PI * PI)).abs() < 1e-15);
    }
}
