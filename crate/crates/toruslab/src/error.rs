//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A grid was requested that cannot hold the band of the state.
    #[error("grid of {got} points cannot resolve modes up to |k| <= {n_max} (need at least {need})")]
    Aliasing { got: usize, need: usize, n_max: usize },

    /// An operation required a region of positive measure.
    #[error("region has zero measure")]
    EmptyRegion,

    /// Interval endpoints out of order or outside the period cell.
    #[error("invalid interval [{start}, {end}) for period {period}")]
    InvalidInterval { start: f64, end: f64, period: f64 },

    /// A ratio or normalization against a zero state was requested.
    #[error("input state is zero; {context} is undefined")]
    ZeroState { context: &'static str },

    /// A state that must be zero-mean has a nonzero k = 0 coefficient.
    #[error("state is not zero-mean (|coefficient at k=0| = {mean_abs:.3e})")]
    NotZeroMean { mean_abs: f64 },

    /// Smallest eigenvalue at or below the solver tolerance: the
    /// observability constant cannot be certified at this truncation.
    #[error("smallest Gram eigenvalue {lambda_min:.3e} is below tolerance; constant unavailable")]
    ConstantUnavailable { lambda_min: f64 },

    /// The coercivity tail bound is not yet contractive at this switch index.
    #[error("coercivity tail bound not valid at K_switch = {k_switch}; raise K_switch above {needed}")]
    CoercivitySwitchTooSmall { k_switch: i64, needed: f64 },

    /// Threshold search exceeded its cap without satisfying the tail rule.
    #[error("high-frequency threshold search exceeded cap {cap} (region too thin at this truncation)")]
    ThresholdSearchFailed { cap: i64 },

    /// A frequency point was inserted twice into a frequency set.
    #[error("frequency point (k = {k}) already present in the set")]
    DuplicateFrequency { k: i64 },

    /// Conjugate-direction solve stopped making progress.
    #[error("iterative solve stagnated at residual {residual:.3e} (condition number {condition:.3e})")]
    SolveStagnation { residual: f64, condition: f64 },

    /// The HUM operator failed its positivity check.
    #[error("HUM operator has non-positive eigenvalue {lambda:.3e}")]
    PhiNotPositive { lambda: f64 },

    /// Picard iteration diverged (endpoint error grew for several iterates).
    #[error("Picard iteration diverged after {iterations} iterates (data size {data_norm:.3e})")]
    PicardDiverged { iterations: usize, data_norm: f64 },

    /// Norm blow-up detected inside a time step.
    #[error("integrator blow-up at t = {t:.6e} (norm grew by factor {factor:.3e} in one step)")]
    BlowUp { t: f64, factor: f64 },

    /// A damping coefficient must be nonnegative.
    #[error("damping coefficient is negative (min value {min_value:.3e})")]
    NegativeDamping { min_value: f64 },

    /// Resolvent evaluation requires |Im z| >= 1.
    #[error("resolvent point z = {re}+{im}i rejected: |Im z| must be >= 1")]
    ResolventImagTooSmall { re: f64, im: f64 },

    /// Mean-M reduction needs a real spatial mean.
    #[error("spatial mean has nonzero imaginary part {imag:.3e}; mean-M reduction needs real data")]
    ComplexMean { imag: f64 },

    /// Mass is conserved, so endpoints of a controlled run must share their mean.
    #[error("initial and target means differ ({m0:.6e} vs {m1:.6e}); mass conservation forbids this")]
    MeanMismatch { m0: f64, m1: f64 },

    /// The linear system was built for a different drift level than the data.
    #[error("control system drift {expected:.6e} does not match data mean {got:.6e}")]
    DriftMismatch { expected: f64, got: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
