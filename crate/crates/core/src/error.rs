use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sample array has {got} entries, grid expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("field is flagged real but violates Hermitian symmetry (max defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("field is not real-valued")]
    ComplexField,

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("dyadic block {j} outside ladder range -1..={j_max}")]
    BlockOutOfRange { j: i32, j_max: i32 },

    #[error("grid too coarse for a dyadic ladder: need blocks -1, 0, 1 but j_max = {j_max}")]
    LadderTooSmall { j_max: i32 },

    #[error("density must be strictly positive (hypothesis 0 < rho_* <= rho), found min {min:.6e}")]
    NonPositiveDensity { min: f64 },

    #[error("density range [{min:.6e}, {max:.6e}] leaves admissible bounds [{lower:.6e}, {upper:.6e}]")]
    DensityOutOfBounds { min: f64, max: f64, lower: f64, upper: f64 },

    #[error("pressure solve did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    PressureNotConverged { iterations: usize, residual: f64 },

    #[error("integration failure at t = {t:.6e}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("degenerate vector-field family: I(X) = {value:.3e}")]
    DegenerateFamily { value: f64 },

    #[error("only {found} interior points found, at least {needed} required")]
    InsufficientInterior { found: usize, needed: usize },

    #[error("lifespan bound undefined for L0 = {0}")]
    UndefinedLifespan(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
