use thiserror::Error;

use crate::flow::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("resolution {got} is below the minimum {min} for {kind}")]
    ResolutionTooSmall {
        kind: &'static str,
        got: usize,
        min: usize,
    },
    #[error("unsupported surface kind `{0}`")]
    UnsupportedKind(String),
    #[error("field does not match surface: expected {expected} nodes on {surface}, got {got}")]
    ShapeMismatch {
        surface: String,
        expected: usize,
        got: usize,
    },
    #[error("field contains a non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("norm exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("operation is undefined for the zero field")]
    ZeroField,
    #[error("band limit {band} exceeds the dealiasing headroom {max} of this surface")]
    BandLimit { band: usize, max: usize },
    #[error("blow-up guard tripped at t = {t}: sup|u| = {sup_norm}")]
    BlowUp {
        t: f64,
        sup_norm: f64,
        partial: Option<Box<Trajectory>>,
    },
    #[error("invalid flow configuration: {0}")]
    InvalidFlowConfig(String),
    #[error("initial data is not volume normalized: vol = {0}")]
    NotNormalized(f64),
    #[error("trajectories are not comparable: {0}")]
    GridMismatch(String),
    #[error("time horizon {0} is not a stored time of the trajectory")]
    HorizonNotStored(f64),
    #[error("overflow in exponential moment")]
    Overflow,
    #[error("cannot fit a line: {0}")]
    DegenerateFit(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
