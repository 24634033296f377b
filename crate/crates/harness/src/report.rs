//! Convergence tables, suite reports, CSV and JSON emission.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use semiclassical::fit::fit_slope;

use crate::error::{HarnessError, Result};

/// Slack applied to every asserted inequality.
pub const SLACK: f64 = 1.05;

/// Rows within this factor of the floor are left out of slope fits.
pub const FLOOR_MARGIN: f64 = 10.0;

/// Accepted slope band for the sweeps.
pub const SLOPE_BAND: [f64; 2] = [0.45, 1.3];

/// One line of the CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// `tag/quantity`.
    pub experiment: String,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub norm: String,
    pub error: f64,
    pub bound: Option<f64>,
    pub floor: Option<f64>,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub experiment: String,
    pub norm: String,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    pub used: usize,
    /// Band the slope is asserted against, if any.
    pub band: Option<[f64; 2]>,
    pub passed: Option<bool>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub experiment: String,
    pub rows: Vec<Row>,
    /// Wall time per ε in seconds.
    pub wall_times: Vec<(f64, f64)>,
    pub fits: Vec<Fit>,
    pub warnings: Vec<String>,
    /// Scalar diagnostics such as M₁, keyed by name.
    pub diagnostics: BTreeMap<String, f64>,
}

impl ConvergenceTable {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, quantity: &str, epsilon: f64, t: f64, norm: &str, error: f64) {
        self.rows.push(Row {
            experiment: format!("{}/{quantity}", self.experiment),
            epsilon,
            t,
            norm: norm.into(),
            error,
            bound: None,
            floor: None,
            excluded: false,
        });
    }

    /// Distinct `(experiment, norm)` series in first-seen order.
    pub fn series(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for r in &self.rows {
            let key = (r.experiment.clone(), r.norm.clone());
            if !out.contains(&key) {
                out.push(key);
            }
        }
        out
    }

    /// Marks the rows of one series against a floor estimate.
    pub fn apply_floor(&mut self, experiment: &str, norm: &str, floor: f64) {
        for r in self
            .rows
            .iter_mut()
            .filter(|r| r.experiment == experiment && r.norm == norm)
        {
            r.floor = Some(floor);
            r.excluded = r.error < FLOOR_MARGIN * floor;
        }
    }

    /// Fits every series; `band` decides which series are asserted.
    pub fn fit_all(&mut self, band: impl Fn(&str, &str) -> Option<[f64; 2]>) {
        self.fits.clear();
        for (exp, norm) in self.series() {
            let rows: Vec<&Row> = self
                .rows
                .iter()
                .filter(|r| r.experiment == exp && r.norm == norm)
                .collect();
            let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
            let err: Vec<f64> = rows.iter().map(|r| r.error).collect();
            let mask: Vec<bool> = rows.iter().map(|r| r.excluded).collect();
            let clipped = rows
                .iter()
                .filter(|r| !r.excluded && !(r.error > 0.0 && r.error.is_finite()))
                .count();
            if clipped > 0 {
                self.warnings.push(format!(
                    "{exp} [{norm}]: {clipped} zero or non-finite rows left out of the fit"
                ));
            }
            let excluded = mask.iter().filter(|m| **m).count();
            if excluded > 0 {
                self.warnings.push(format!(
                    "{exp} [{norm}]: {excluded} rows within {FLOOR_MARGIN}× of the floor left out of the fit"
                ));
            }
            let band = band(&exp, &norm);
            let fit = match fit_slope(&eps, &err, &mask) {
                Ok(f) => Fit {
                    experiment: exp,
                    norm,
                    slope: Some(f.slope),
                    intercept: Some(f.intercept),
                    residual: Some(f.residual),
                    used: f.used.len(),
                    band,
                    passed: band.map(|b| f.slope >= b[0] && f.slope <= b[1]),
                    note: None,
                },
                Err(e) => Fit {
                    experiment: exp,
                    norm,
                    slope: None,
                    intercept: None,
                    residual: None,
                    used: 0,
                    band,
                    passed: band.map(|_| false),
                    note: Some(e.to_string()),
                },
            };
            self.fits.push(fit);
        }
    }

    pub fn fit_for(&self, experiment: &str, norm: &str) -> Option<&Fit> {
        self.fits
            .iter()
            .find(|f| f.experiment == experiment && f.norm == norm)
    }

    /// False if any asserted fit left its band.
    pub fn passed(&self) -> bool {
        self.fits.iter().all(|f| f.passed != Some(false))
    }
}

/// One inequality `lhs ≤ slack·rhs`, or an aggregate over many draws where
/// `lhs` is the worst ratio and `rhs` is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub epsilon: Option<f64>,
    pub t: Option<f64>,
    pub norm: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub samples: usize,
    pub violations: usize,
    pub passed: bool,
}

impl Check {
    pub fn inequality(name: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let ok = lhs <= slack * rhs;
        Self {
            name: name.into(),
            epsilon: None,
            t: None,
            norm: None,
            lhs,
            rhs,
            slack,
            samples: 1,
            violations: usize::from(!ok),
            passed: ok,
        }
    }

    /// `value ≥ minimum`, stored as `minimum ≤ value`.
    pub fn at_least(name: impl Into<String>, value: f64, minimum: f64) -> Self {
        Self::inequality(name, minimum, value, 1.0)
    }

    /// Aggregates `lhs/rhs` ratios; passes when none exceeds `slack`.
    pub fn ratios(name: impl Into<String>, ratios: &[f64], slack: f64) -> Self {
        let worst = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let violations = ratios.iter().filter(|r| !(**r <= slack)).count();
        Self {
            name: name.into(),
            epsilon: None,
            t: None,
            norm: None,
            lhs: worst,
            rhs: 1.0,
            slack,
            samples: ratios.len(),
            violations,
            passed: violations == 0 && !ratios.is_empty(),
        }
    }

    pub fn at(mut self, epsilon: f64, t: f64) -> Self {
        self.epsilon = Some(epsilon);
        self.t = Some(t);
        self
    }

    pub fn with_norm(mut self, norm: impl Into<String>) -> Self {
        self.norm = Some(norm.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn rows(&self) -> Vec<Row> {
        self.checks
            .iter()
            .map(|c| Row {
                experiment: format!("{}/{}", self.suite, c.name),
                epsilon: c.epsilon.unwrap_or(f64::NAN),
                t: c.t.unwrap_or(f64::NAN),
                norm: c.norm.clone().unwrap_or_default(),
                error: c.lhs,
                bound: Some(c.slack * c.rhs),
                floor: None,
                excluded: false,
            })
            .collect()
    }
}

pub fn write_csv(rows: &[Row], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

pub fn read_csv(input: impl Read) -> Result<Vec<Row>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(HarnessError::from))
        .collect()
}

pub fn save_csv(rows: &[Row], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(f))
}

pub fn load_csv(path: &Path) -> Result<Vec<Row>> {
    let f = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_csv(std::io::BufReader::new(f))
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Rebuilds a table from merged CSV rows and refits every series.
pub fn merge(rows: Vec<Row>, band: impl Fn(&str, &str) -> Option<[f64; 2]>) -> ConvergenceTable {
    let mut t = ConvergenceTable::new("merged");
    t.rows = rows;
    t.fit_all(band);
    t
}
