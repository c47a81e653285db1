//! Seeded random test fields.

use rand::Rng;

use crate::grid::{GridSpec, SpectralField, VectorField};

/// Uniform random samples in `[-1, 1]`, dealiased to `|ξ_a| ≤ n/3`.
pub fn band_limited_field<R: Rng>(grid: GridSpec, rng: &mut R) -> SpectralField {
    let values: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SpectralField::to_spectral(grid, &values)
        .expect("sample length matches grid")
        .dealias()
}

/// Random field with coefficients decaying like `exp(-|ξ|/decay)`, so it
/// is smooth as well as band-limited.
pub fn smooth_field<R: Rng>(grid: GridSpec, decay: f64, rng: &mut R) -> SpectralField {
    let raw = band_limited_field(grid, rng);
    raw.map_coeffs(|i, c| c * (-(grid.wavenumber_sq(i).sqrt()) / decay).exp() * (grid.len() as f64).sqrt())
}

pub fn band_limited_vector<R: Rng>(grid: GridSpec, rng: &mut R) -> VectorField {
    VectorField::new((0..grid.dim()).map(|_| band_limited_field(grid, rng)).collect())
        .expect("components share a grid")
}
