use thiserror::Error;

/// Errors raised by the analytic kernels and the scenario harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("direction out of range: azimuth {azimuth} rad, elevation {elevation} rad")]
    InvalidDirection { azimuth: f64, elevation: f64 },

    #[error("steering vectors are linearly dependent (smallest Gram eigenvalue {min_eigenvalue:e}, tolerance {tolerance:e})")]
    DegenerateAngles { min_eigenvalue: f64, tolerance: f64 },

    #[error("{users} users cannot be zero-forced with {elements} antennas")]
    TooManyUsers { users: usize, elements: usize },

    #[error("user index {index} out of range for {users} users")]
    UserIndex { index: usize, users: usize },

    #[error("aperture of {width} wavelengths is too small for {lobes} lobes")]
    ApertureTooSmall { width: f64, lobes: usize },

    #[error("invalid allocation problem: {0}")]
    InvalidProblem(String),

    #[error("user {index} has zero zero-forcing gain")]
    ZeroGain { index: usize },

    #[error("no finite multiplier makes the power budget bind")]
    NonBindingBudget,

    #[error("brute-force oracle supports at most 4 users, got {0}")]
    TooManyUsersForOracle(usize),

    #[error("utility has no closed-form value; the grid oracle needs one")]
    OracleNeedsUtilityValue,

    #[error("config error: {0}")]
    Config(String),

    #[error("{resampled} of {drops} drops had to be resampled (limit is 1%)")]
    DegenerateDropLimit { resampled: usize, drops: usize },

    #[error("table error: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
