use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state time {next} does not exceed last time {last}")]
    NonMonotoneTime { last: f64, next: f64 },
    #[error("weak-solution condition ({condition}) violated: {detail}")]
    WeakSolutionViolation { condition: Condition, detail: String },
    #[error("t = {t} is at or past the extinction time {extinction}")]
    PastExtinction { t: f64, extinction: f64 },
    #[error("t = {t} is at or past the blow-up time {blowup} of the lower bound")]
    PastBlowup { t: f64, blowup: f64 },
    #[error("rescaling needs t > 0, got {0}")]
    NonpositiveTime(f64),
    #[error("long-time behaviour undecided at horizon {0}")]
    Undecided(f64),
    #[error("degenerate profile: psi = {psi:e} at grid index {index}")]
    DegenerateProfile { index: usize, psi: f64 },
    #[error("dt = {dt:e} exceeds the admissible step {max:e}")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("component extinct at t = {0}")]
    ExtinctionReached(f64),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("red and green bands overlap: D/h^2 = {red} <= 2/r^2 = {green}")]
    InconsistentThresholds { red: f64, green: f64 },
    #[error("no separating delta-necks: {0}")]
    NoSeparatingNecks(String),
    #[error("cap construction failed: {0}")]
    CapConstructionFailed(String),
    #[error("cannot normalize: ball condition fails at grid index {center}")]
    CannotNormalize { center: usize },
    #[error("operation needs a closed S3 profile")]
    WrongTopology,
    #[error("point {index} has no canonical neighbourhood")]
    UncoveredPoint { index: usize },
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

/// Which clause of the weak-solution definition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// R_min may not drop across a surgery.
    MinCurvature,
    /// The post-surgery metric must lie below the pre-surgery metric.
    MetricDecrease,
    /// R_max after surgery must stay below half the threshold.
    MaxCurvature,
    /// The smooth pieces must solve the flow.
    FlowResidual,
    /// Cached diagnostics disagree with the stored metric.
    Diagnostics,
}

impl Condition {
    pub fn code(self) -> &'static str {
        match self {
            Condition::MinCurvature => "ii.a",
            Condition::MetricDecrease => "ii.b",
            Condition::MaxCurvature => "theta/2",
            Condition::FlowResidual => "flow",
            Condition::Diagnostics => "diag",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
