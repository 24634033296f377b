use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    Domain(String),
    /// Grid sizes or extents are unusable.
    Grid(String),
    /// Non-finite or mismatched sample data.
    Data(String),
    /// The operation does not support this potential kind or dimension.
    Unsupported(String),
    /// A field that must be real picked up an imaginary part.
    ImaginaryResidue { residue: f64, threshold: f64 },
    /// The field does not decay at the box boundary.
    Truncation { boundary: f64, floor: f64 },
    /// A characteristic left the safety box.
    Escape { node: usize, position: [f64; 2] },
    /// A coherent state does not fit on the grid.
    Placement(String),
    /// A mixed Gaussian is narrower than a positive-operator symbol allows.
    Admissibility { spread: f64, minimum: f64 },
    /// A normalizing norm vanished.
    DegenerateNormalizer(f64),
    /// Too few usable rows for a slope fit.
    FitDegenerate { usable: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "parameter out of domain: {m}"),
            Error::Grid(m) => write!(f, "invalid grid: {m}"),
            Error::Data(m) => write!(f, "invalid data: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::ImaginaryResidue { residue, threshold } => write!(
                f,
                "imaginary residue {residue:.3e} exceeds threshold {threshold:.1e}"
            ),
            Error::Truncation { boundary, floor } => write!(
                f,
                "field does not decay at the box boundary: relative value {boundary:.3e} > floor {floor:.1e}"
            ),
            Error::Escape { node, position } => write!(
                f,
                "characteristic from node {node} left the safety box at ({:.4}, {:.4})",
                position[0], position[1]
            ),
            Error::Placement(m) => write!(f, "coherent state placement: {m}"),
            Error::Admissibility { spread, minimum } => write!(
                f,
                "spread {spread:.4e} is below the admissible minimum {minimum:.4e}"
            ),
            Error::DegenerateNormalizer(v) => write!(f, "normalizer norm {v:.3e} vanishes"),
            Error::FitDegenerate { usable } => {
                write!(f, "slope fit needs at least 3 usable rows, got {usable}")
            }
        }
    }
}

impl core::error::Error for Error {}
