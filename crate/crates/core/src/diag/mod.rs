//! Geometric and norm diagnostics of a stratified state.

mod lifespan;
mod norms;
mod patch;
mod record;

pub use lifespan::{lifespan_bound, LifespanInputs};
pub use norms::{
    div_along_norm, lipschitz_audit, nondegeneracy, striated_norm, striation_along, tilde_norm, LipschitzAudit,
    DEGENERACY_FLOOR,
};
pub use patch::{global_holder_quotient, patch_interior_holder, MIN_INTERIOR_POINTS, PAIR_RADIUS_CELLS};
pub use record::{timeseries_sample, vorticity_striated_norm, DiagnosticsRecord, SampleOptions, CSV_COLUMNS};
