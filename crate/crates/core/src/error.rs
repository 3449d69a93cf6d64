//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by model construction, the pulse algebra, the solvers and
/// the validation harness.
#[derive(Debug, Error)]
pub enum Error {
    /// The basis is singular, the dimension is zero, or the extent is too small.
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    /// Stored Taylor coefficients violate `a_{n,α} = (-1)^{n+1} a_{n,-α}`.
    #[error("antisymmetry violated for n={n}, alpha={alpha:?}: {a} vs {b}")]
    AntisymmetryViolation {
        n: usize,
        alpha: Vec<i64>,
        a: f64,
        b: f64,
    },
    /// Exact potential callbacks disagree with the stored Taylor data.
    #[error("callback Taylor mismatch for {what}, n={n}: stored {stored}, fitted {fitted}")]
    TaylorMismatch {
        what: String,
        n: usize,
        stored: f64,
        fitted: f64,
    },
    /// `Ω²(θ) ≤ 0` somewhere on the wave-vector grid.
    #[error("stability violated: Omega^2 = {value} at theta = {theta:?}")]
    StabilityViolation { theta: Vec<f64>, value: f64 },
    /// A Taylor order beyond the stored data was requested.
    #[error("order {n} out of range (stored order {max})")]
    OrderOutOfRange { n: usize, max: usize },
    /// A pulse index outside `{±1..±ν}`.
    #[error("invalid pulse index {0}")]
    InvalidIndex(i32),
    /// The pulse list violates a structural requirement.
    #[error("invalid pulse system: {0}")]
    InvalidPulseSystem(String),
    /// A resonance denominator `δ` is numerically zero.
    #[error("resonant denominator: |delta| = {delta:e} for {what}")]
    ResonantDenominator { what: String, delta: f64 },
    /// The pulse system is not closed to the order required.
    #[error("pulse system is only {reached}-closed, order {required} required")]
    NotClosed { required: usize, reached: usize },
    /// Explicit time step outside the stability region of the scheme.
    #[error("time step {dt} exceeds the stable limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    /// A macroscopic field exceeded the blow-up guard.
    #[error("macro solution blew up at tau = {tau}")]
    BlowUp { tau: f64 },
    /// A carrier wave vector is not on the `2π/M` grid.
    #[error("wave vector {theta:?} is not commensurate with M = {m}")]
    IncommensurateWaveVector { theta: Vec<f64>, m: usize },
    /// The level-set branch of the resonance function is empty.
    #[error("no resonance branch: {0}")]
    EmptyBranch(String),
    /// Every resonance root was rejected by the nonresonance filter.
    #[error("all {count} roots filtered (best margin {best_margin:e})")]
    AllFiltered { count: usize, best_margin: f64 },
    /// Slope fits need positive data.
    #[error("non-positive value {value} at index {index}")]
    NonPositiveValue { index: usize, value: f64 },
    /// Micro integration refused or drifted.
    #[error("micro instability: {0}")]
    MicroInstability(String),
    /// Bad or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
