//! Pseudo-spectral simulation of planar variable-density Euler flow, with
//! Littlewood-Paley, paradifferential and striated-regularity diagnostics.
//!
//! Fields live on the periodic box `[0, L)^d` (default `L = 2π`) as Fourier
//! coefficients ([`SpectralField`]). Quadratic terms are evaluated in
//! physical space and projected with the 2/3 rule.

pub mod diag;
pub mod dynamics;
pub mod error;
mod fft;
pub mod family;
pub mod grid;
pub mod ladder;
pub mod markers;
pub mod para;
pub mod pressure;
pub mod random;
pub mod stats;

pub use dynamics::{biot_savart, curl, EulerSystem, StratifiedState};
pub use error::{Error, Result};
pub use family::VectorFieldFamily;
pub use grid::{GridSpec, SpectralField, VectorField};
pub use ladder::{DyadicLadder, NormRequest};
pub use markers::FlowMarkers;
pub use pressure::{DensityBounds, EllipticConfig, EllipticMethod};
