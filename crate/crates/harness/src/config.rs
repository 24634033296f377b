//! Run configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use semiclassical::liouville::FlowScheme;
use semiclassical::norms::NormKind;
use semiclassical::potentials::{DecayMeta, Mode, Profile, Quadratic};
use semiclassical::{Complex64, FourierPotential, GridSpec, SemiclassicalParams};

use crate::error::{HarnessError, Result};

/// Fewest ε values a slope fit will accept from a config.
pub const MIN_SWEEP_ROWS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_tag")]
    pub experiment: String,
    #[serde(default = "one_usize")]
    pub n: usize,
    pub potential: PotentialSpec,
    /// Tail envelope for the assumption audit.
    #[serde(default)]
    pub decay: Option<DecaySpec>,
    pub initial: InitialSpec,
    #[serde(default)]
    pub params: ParamsSpec,
    pub epsilons: Vec<f64>,
    /// Final time.
    pub t: f64,
    #[serde(default)]
    pub dt: DtSpec,
    #[serde(default)]
    pub grid: GridConfig,
    /// Extra norms recorded alongside the default ones.
    #[serde(default)]
    pub norms: Vec<NormSpec>,
    /// Sobolev order for the positive-index sweep and the audit.
    #[serde(default = "one_u32")]
    pub r: u32,
    #[serde(default)]
    pub horizon: HorizonSpec,
    /// Estimate the discretization floor by a refined rerun.
    #[serde(default = "yes")]
    pub floor: bool,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_tag() -> String {
    "run".into()
}
fn one_usize() -> usize {
    1
}
fn one_u32() -> u32 {
    1
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_seed() -> u64 {
    0x5eed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    /// `a·cos(2π f x)`.
    Cosine {
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
    Atomic {
        modes: Vec<ModeSpec>,
    },
    /// `a Σ_{j=1}^{H} e^{−(j/w)²} cos(2π j x / period)`.
    Lattice {
        amplitude: f64,
        width: f64,
        harmonics: u32,
        #[serde(default = "one")]
        period: f64,
    },
    /// `a·e^{−x²/w²}` with a sampled spectrum.
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    /// Sampled spectrum `a (1 + |S|)^{−p}`.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
    },
    /// `a|x|²`.
    Harmonic {
        #[serde(default = "two_pi_squared")]
        a: f64,
    },
    Quadratic {
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        linear: [f64; 2],
        quadratic: [f64; 2],
    },
}

fn two_pi_squared() -> f64 {
    2.0 * std::f64::consts::PI * std::f64::consts::PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub s: Vec<f64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub theta: f64,
    pub d: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// ε-independent phase-space Gaussian, `[x…, k…]` centre and spreads.
    MixedGaussian {
        center: Vec<f64>,
        spread: Vec<f64>,
    },
    /// Coherent state; `envelope` holds cubic coefficients of a polynomial
    /// prefactor when the envelope is not a plain Gaussian.
    Coherent {
        x0: Vec<f64>,
        k0: Vec<f64>,
        #[serde(default)]
        envelope: Option<[f64; 4]>,
    },
    Ensemble {
        members: Vec<MemberSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub x0: Vec<f64>,
    pub k0: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default = "one")]
    pub sigma_x: f64,
    #[serde(default = "one")]
    pub sigma_k: f64,
}

impl Default for ParamsSpec {
    fn default() -> Self {
        Self {
            sigma_x: 1.0,
            sigma_k: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    #[default]
    Leapfrog,
    Yoshida4,
}

impl From<SchemeSpec> for FlowScheme {
    fn from(s: SchemeSpec) -> Self {
        match s {
            SchemeSpec::Leapfrog => FlowScheme::Leapfrog,
            SchemeSpec::Yoshida4 => FlowScheme::Yoshida4,
        }
    }
}

/// Both the Wigner splitting and the characteristics use `T/steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtSpec {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub scheme: SchemeSpec,
    /// Snapshot stride for path diagnostics.
    #[serde(default = "default_every")]
    pub every: usize,
}

fn default_steps() -> usize {
    256
}
fn default_every() -> usize {
    32
}

impl Default for DtSpec {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            scheme: SchemeSpec::default(),
            every: default_every(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_x")]
    pub x: [f64; 2],
    #[serde(default = "default_x")]
    pub k: [f64; 2],
    #[serde(default = "default_nodes")]
    pub nx: usize,
    #[serde(default = "default_nodes")]
    pub nk: usize,
    /// Boundary decay floor relative to the field maximum.
    #[serde(default)]
    pub floor: Option<f64>,
}

fn default_x() -> [f64; 2] {
    [-8.0, 8.0]
}
fn default_nodes() -> usize {
    512
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x: default_x(),
            k: default_x(),
            nx: default_nodes(),
            nk: default_nodes(),
            floor: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSpec {
    /// `T ≤ factor·ln(1/ε_min)`.
    #[serde(default = "one")]
    pub factor: f64,
    /// Use `T = 0.75 ln(1/ε)` per row; slopes are then reported only.
    #[serde(default)]
    pub long_time: bool,
}

impl Default for HorizonSpec {
    fn default() -> Self {
        Self {
            factor: 1.0,
            long_time: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
    #[serde(default)]
    pub snapshots: Option<PathBuf>,
    /// Directory for cached flow maps of the unmollified potential.
    #[serde(default)]
    pub flow_cache: Option<PathBuf>,
}

/// A norm written as `l2`, `h1`, `h-3` or `xmp:m:p` (`p` may be `inf`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NormSpec(pub NormKind);

impl TryFrom<String> for NormSpec {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl std::str::FromStr for NormSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t = s.trim().to_ascii_lowercase();
        if t == "l2" {
            return Ok(Self(NormKind::L2));
        }
        if let Some(rest) = t.strip_prefix("xmp:") {
            let mut it = rest.split(':');
            let (Some(m), Some(p), None) = (it.next(), it.next(), it.next()) else {
                return Err(format!("norm `{s}`: expected xmp:m:p"));
            };
            let m: f64 = m.parse().map_err(|_| format!("norm `{s}`: bad m"))?;
            let p: f64 = match p {
                "inf" => f64::INFINITY,
                p => p.parse().map_err(|_| format!("norm `{s}`: bad p"))?,
            };
            return Ok(Self(NormKind::Xmp { m, p }));
        }
        if let Some(rest) = t.strip_prefix('h') {
            let m: i32 = rest.parse().map_err(|_| format!("norm `{s}`: bad order"))?;
            return Ok(Self(NormKind::Sobolev(m)));
        }
        Err(format!("unknown norm `{s}`"))
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            NormKind::L2 => write!(f, "l2"),
            NormKind::Sobolev(m) => write!(f, "h{m}"),
            NormKind::Xmp { m, p } if p.is_infinite() => write!(f, "xmp:{m}:inf"),
            NormKind::Xmp { m, p } => write!(f, "xmp:{m}:{p}"),
        }
    }
}

impl From<NormSpec> for String {
    fn from(n: NormSpec) -> String {
        n.to_string()
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Invalid(e.to_string()))
    }

    /// Checks the ε list and the time horizon. `min_rows` is the number of
    /// ε values the caller needs; sweeps pass [`MIN_SWEEP_ROWS`].
    pub fn validate(&self, min_rows: usize) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        if !(self.n == 1 || self.n == 2) {
            return bad(format!("dimension {} is not 1 or 2", self.n));
        }
        if self.epsilons.len() < min_rows {
            return bad(format!(
                "{} epsilon values given, at least {min_rows} needed",
                self.epsilons.len()
            ));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return bad("epsilon values must lie in (0, 1)".into());
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilon values must be strictly decreasing".into());
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return bad(format!("final time {} must be ≥ 0", self.t));
        }
        if self.dt.steps == 0 {
            return bad("dt.steps must be positive".into());
        }
        if !self.horizon.long_time {
            let eps_min = *self.epsilons.last().unwrap_or(&0.5);
            let limit = self.horizon.factor * (1.0 / eps_min).ln();
            if self.t > limit {
                return bad(format!(
                    "T = {} exceeds the horizon {:.4} = {}·ln(1/ε_min)",
                    self.t, limit, self.horizon.factor
                ));
            }
        }
        Ok(())
    }

    /// Final time for one row of a sweep.
    pub fn time_for(&self, epsilon: f64) -> f64 {
        if self.horizon.long_time {
            0.75 * (1.0 / epsilon).ln()
        } else {
            self.t
        }
    }

    pub fn dt_for(&self, t: f64) -> f64 {
        if t == 0.0 {
            1.0
        } else {
            t / self.dt.steps as f64
        }
    }

    pub fn scheme(&self) -> FlowScheme {
        self.dt.scheme.into()
    }

    pub fn params(&self, epsilon: f64) -> Result<SemiclassicalParams> {
        Ok(SemiclassicalParams::new(
            self.n,
            epsilon,
            self.params.sigma_x,
            self.params.sigma_k,
        )?)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let g = &self.grid;
        let spec = GridSpec::new(self.n, (g.x[0], g.x[1]), g.nx, (g.k[0], g.k[1]), g.nk)?;
        Ok(match g.floor {
            Some(f) => spec.with_floor(f),
            None => spec,
        })
    }

    pub fn potential(&self) -> Result<FourierPotential> {
        let pot = self.potential.build(self.n)?;
        Ok(match (self.decay, &self.potential) {
            (Some(d), _) => pot.with_decay(DecayMeta {
                theta: d.theta,
                d: d.d,
                r: d.r,
            }),
            // Finite spectra sit inside any envelope radius covering them.
            (None, PotentialSpec::Cosine { .. })
            | (None, PotentialSpec::Atomic { .. })
            | (None, PotentialSpec::Lattice { .. }) => match pot.max_frequency() {
                Some(radius) if radius > 0.0 => pot.with_decay(DecayMeta {
                    theta: f64::from(self.r) + 1.5,
                    d: 1.0,
                    r: radius,
                }),
                _ => pot,
            },
            _ => pot,
        })
    }
}

impl PotentialSpec {
    pub fn build(&self, n: usize) -> Result<FourierPotential> {
        let one_d = |what: &str| {
            if n == 1 {
                Ok(())
            } else {
                Err(HarnessError::Invalid(format!(
                    "{what} potential is one-dimensional"
                )))
            }
        };
        Ok(match self {
            PotentialSpec::Zero => FourierPotential::zero(n),
            PotentialSpec::Cosine {
                amplitude,
                frequency,
            } => {
                one_d("cosine")?;
                FourierPotential::cosine(*amplitude, *frequency)
            }
            PotentialSpec::Atomic { modes } => {
                let modes = modes
                    .iter()
                    .map(|m| {
                        if m.s.len() != n {
                            return Err(HarnessError::Invalid(format!(
                                "mode frequency {:?} needs {n} components",
                                m.s
                            )));
                        }
                        let mut s = [0.0; 2];
                        s[..n].copy_from_slice(&m.s);
                        Ok(Mode {
                            s,
                            weight: Complex64::new(m.re, m.im),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                FourierPotential::atomic(n, modes)?
            }
            PotentialSpec::Lattice {
                amplitude,
                width,
                harmonics,
                period,
            } => {
                one_d("lattice")?;
                if !(*period > 0.0 && *width > 0.0) {
                    return Err(HarnessError::Invalid(
                        "lattice width and period must be positive".into(),
                    ));
                }
                let mut modes = Vec::new();
                for j in 1..=*harmonics {
                    let j = f64::from(j);
                    let w = 0.5 * amplitude * (-(j / width).powi(2)).exp();
                    modes.push(Mode::new_1d(j / period, w, 0.0));
                    modes.push(Mode::new_1d(-j / period, w, 0.0));
                }
                FourierPotential::atomic(1, modes)?
            }
            PotentialSpec::Gaussian { amplitude, width } => {
                one_d("sampled")?;
                FourierPotential::from_profile(Profile::Gaussian {
                    amplitude: *amplitude,
                    width: *width,
                })?
            }
            PotentialSpec::PowerLaw {
                amplitude,
                exponent,
            } => {
                one_d("sampled")?;
                FourierPotential::from_profile(Profile::PowerLaw {
                    amplitude: *amplitude,
                    exponent: *exponent,
                })?
            }
            PotentialSpec::Harmonic { a } => FourierPotential::harmonic(n, *a)?,
            PotentialSpec::Quadratic {
                c0,
                linear,
                quadratic,
            } => FourierPotential::polynomial(
                n,
                Quadratic {
                    c0: *c0,
                    linear: *linear,
                    quadratic: *quadratic,
                },
            )?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
experiment = "l2-cos"
epsilons = [0.03125, 0.015625, 0.0078125, 0.00390625]
t = 0.5
norms = ["h-3", "xmp:1:inf"]

[potential]
kind = "cosine"
amplitude = 1.0

[initial]
kind = "mixed_gaussian"
center = [0.0, 0.0]
spread = [0.5, 0.5]
"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.n, 1);
        assert_eq!(c.grid.nx, 512);
        assert_eq!(c.dt.steps, 256);
        assert_eq!(c.norms[0].0, NormKind::Sobolev(-3));
        assert_eq!(
            c.norms[1].0,
            NormKind::Xmp {
                m: 1.0,
                p: f64::INFINITY
            }
        );
        c.validate(MIN_SWEEP_ROWS).unwrap();
        assert!(c.potential().unwrap().decay().is_some());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::from_toml(SAMPLE).unwrap();
        let back = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn rejects_bad_sweeps() {
        let mut c = RunConfig::from_toml(SAMPLE).unwrap();
        c.epsilons.swap(0, 1);
        assert!(c.validate(MIN_SWEEP_ROWS).is_err());
        c.epsilons = vec![0.1, 0.05, 0.02];
        assert!(c.validate(MIN_SWEEP_ROWS).is_err());
        c.epsilons = vec![0.1, 0.05, 0.02, 0.01];
        c.t = 10.0;
        assert!(c.validate(MIN_SWEEP_ROWS).is_err());
        c.horizon.long_time = true;
        assert!(c.validate(MIN_SWEEP_ROWS).is_ok());
        assert!((c.time_for(0.01) - 0.75 * 100f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn norm_strings() {
        for s in ["l2", "h1", "h-3", "xmp:2:1", "xmp:0.5:inf"] {
            let n: NormSpec = s.parse().unwrap();
            assert_eq!(n.to_string(), s);
        }
        assert!("hx".parse::<NormSpec>().is_err());
        assert!("xmp:1".parse::<NormSpec>().is_err());
    }

    #[test]
    fn lattice_is_real_and_periodic() {
        let spec = PotentialSpec::Lattice {
            amplitude: 1.0,
            width: 2.0,
            harmonics: 4,
            period: 1.0,
        };
        let pot = spec.build(1).unwrap();
        let direct: f64 = (1..=4)
            .map(|j| {
                let j = j as f64;
                (-(j / 2.0f64).powi(2)).exp() * (2.0 * std::f64::consts::PI * j * 0.3).cos()
            })
            .sum();
        assert!((pot.value(&[0.3]) - direct).abs() < 1e-12);
        assert!((pot.value(&[1.3]) - direct).abs() < 1e-12);
    }
}
