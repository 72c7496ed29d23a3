use thiserror::Error;

/// Errors raised by the arm model, the estimator and the log readers.
///
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {value} (must be finite and > 0)")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("bending angle {theta} rad outside [0, pi)")]
    ThetaOutOfRange { theta: f64 },

    #[error("non-finite configuration angle")]
    NonFiniteAngle,

    #[error(
        "tendon equilibrium residual {residual:e} exceeds {tolerance:e}; wrench cannot be balanced by the tendons"
    )]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("J_v is rank deficient (sigma2/sigma1 = {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("near-straight configuration: theta = {theta} rad is below the estimation floor {min} rad")]
    NearStraightConfiguration { theta: f64, min: f64 },

    #[error("configuration-space stiffness is singular (det = {det:e})")]
    SingularStiffness { det: f64 },

    #[error("rotation is not orthonormal (deviation {deviation:e})")]
    NonOrthonormal { deviation: f64 },

    #[error("IMU log contains no samples")]
    EmptyLog,

    #[error("window must be at least 1")]
    InvalidWindow,

    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("line {line}: timestamp {timestamp} precedes previous sample at {previous}")]
    NonMonotonicTimestamps { line: usize, timestamp: f64, previous: f64 },

    #[error("unsupported IMU log header {found:?} (expected \"imu-log,v1\")")]
    UnsupportedVersion { found: String },

    #[error("invalid load case: {0}")]
    InvalidLoadCase(String),

    #[error("invalid sweep spec: {0}")]
    InvalidSweep(String),

    #[error("invalid parameter file: {0}")]
    InvalidParameterFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
