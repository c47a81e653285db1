//! Periodic grids and fields stored as Fourier-series coefficients.
//!
//! Coefficients are true Fourier-series coefficients: `coeff(0)` is the grid
//! mean and the synthesis is `f(x) = Σ_ξ coeff(ξ) e^{i k(ξ)·x}` with
//! `k(ξ) = ξ · 2π / length`. Physical samples are row-major with axis 0
//! slowest; sample `(i_0, …, i_{d-1})` sits at `x_a = i_a · length / n`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};

/// Relative tolerance on Hermitian symmetry for real-flagged fields.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    dim: usize,
    length: f64,
}

impl GridSpec {
    pub fn new(n: usize, dim: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n}: points per axis must be a power of two and at least 16"
            )));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim = {dim}: only 2 or 3 supported")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive")));
        }
        Ok(Self { n, dim, length })
    }

    /// The `[0, 2π)²` torus with `n` points per axis.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, 2, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Wavenumber of the unit integer frequency, `2π / length`.
    pub fn wavenumber_unit(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Integer frequency carried by storage position `k` along one axis,
    /// in `{-n/2+1, …, n/2}`.
    #[inline]
    pub fn freq(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Storage position along `axis` of flat index `idx`.
    #[inline]
    pub fn digit(&self, idx: usize, axis: usize) -> usize {
        // n is a power of two, so strides are shifts
        let shift = self.n.trailing_zeros() as usize * (self.dim - 1 - axis);
        (idx >> shift) & (self.n - 1)
    }

    /// Integer frequency along `axis` of flat coefficient index `idx`.
    #[inline]
    pub fn axis_freq(&self, idx: usize, axis: usize) -> i64 {
        self.freq(self.digit(idx, axis))
    }

    /// Flat index of the integer frequency vector `xi` (entries taken modulo n).
    pub fn freq_index(&self, xi: &[i64]) -> usize {
        assert_eq!(xi.len(), self.dim, "frequency vector has wrong dimension");
        let n = self.n as i64;
        xi.iter()
            .fold(0usize, |acc, &f| acc * self.n + f.rem_euclid(n) as usize)
    }

    /// Flat index of the frequency `-ξ` for the frequency stored at `idx`.
    #[inline]
    pub fn mirror_index(&self, idx: usize) -> usize {
        (0..self.dim).fold(0usize, |acc, a| {
            let k = self.digit(idx, a);
            acc * self.n + (self.n - k) % self.n
        })
    }

    /// Squared Euclidean wavenumber `|k(ξ)|²` of coefficient `idx`.
    #[inline]
    pub fn wavenumber_sq(&self, idx: usize) -> f64 {
        let unit = self.wavenumber_unit();
        (0..self.dim)
            .map(|a| {
                let k = self.axis_freq(idx, a) as f64 * unit;
                k * k
            })
            .sum()
    }

    /// True when any axis carries the Nyquist frequency `n/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        (0..self.dim).any(|a| self.digit(idx, a) == self.n / 2)
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        (0..self.dim).map(|a| self.digit(idx, a) as f64 * h).collect()
    }

    /// Samples `f` at every grid point.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }

    /// Samples a planar function `f(x, y)`; panics on a 3-D grid.
    pub fn sample2(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        assert_eq!(self.dim, 2, "sample2 needs a 2-D grid");
        let h = self.spacing();
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n {
            let x = i as f64 * h;
            for j in 0..self.n {
                out.push(f(x, j as f64 * h));
            }
        }
        out
    }
}

/// A scalar field on a periodic grid, held as Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
            real: true,
        }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        let f = Self { grid, coeffs, real };
        if real {
            f.check_hermitian()?;
        }
        Ok(f)
    }

    /// Forward transform of real samples.
    pub fn to_spectral(grid: GridSpec, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::transform(&mut data, grid.n, grid.dim, Direction::Forward);
        let scale = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        let mut f = Self {
            grid,
            coeffs: data,
            real: true,
        };
        f.symmetrize();
        Ok(f)
    }

    /// Samples `f` on the grid and transforms.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::to_spectral(grid, &grid.sample(f)).expect("sample length matches grid")
    }

    /// Samples a planar `f(x, y)` and transforms.
    pub fn from_fn2(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::to_spectral(grid, &grid.sample2(f)).expect("sample length matches grid")
    }

    /// Inverse transform to real samples; the imaginary residue is discarded.
    pub fn to_physical(&self) -> Result<Vec<f64>> {
        if !self.real {
            return Err(Error::ComplexField);
        }
        self.check_hermitian()?;
        Ok(self.physical())
    }

    /// Inverse transform keeping the imaginary part.
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft::transform(&mut data, self.grid.n, self.grid.dim, Direction::Inverse);
        data
    }

    /// Real part of the inverse transform without the symmetry audit.
    pub(crate) fn physical(&self) -> Vec<f64> {
        self.to_physical_complex().into_iter().map(|c| c.re).collect()
    }

    fn symmetrize(&mut self) {
        for idx in 0..self.coeffs.len() {
            let m = self.grid.mirror_index(idx);
            if m < idx {
                continue;
            }
            let avg = 0.5 * (self.coeffs[idx] + self.coeffs[m].conj());
            self.coeffs[idx] = avg;
            self.coeffs[m] = avg.conj();
        }
    }

    fn check_hermitian(&self) -> Result<()> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut defect: f64 = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let m = self.grid.mirror_index(idx);
            defect = defect.max((c - self.coeffs[m].conj()).norm());
        }
        if defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Coefficient at integer frequency vector `xi`.
    pub fn coeff(&self, xi: &[i64]) -> Complex64 {
        self.coeffs[self.grid.freq_index(xi)]
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Applies a coefficientwise multiplier `m(idx)`.
    pub fn map_coeffs(&self, m: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| m(i, c)).collect();
        Self {
            grid: self.grid,
            coeffs,
            real: self.real,
        }
    }

    /// Spectral partial derivative along `axis`. Nyquist modes are zeroed so
    /// that real fields stay real.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        let g = self.grid;
        if axis >= g.dim {
            return Err(Error::AxisOutOfRange { axis, dim: g.dim });
        }
        let unit = g.wavenumber_unit();
        Ok(self.map_coeffs(|idx, c| {
            if g.digit(idx, axis) == g.n / 2 {
                Complex64::default()
            } else {
                c * Complex64::new(0.0, g.axis_freq(idx, axis) as f64 * unit)
            }
        }))
    }

    pub fn gradient(&self) -> VectorField {
        let comps = (0..self.grid.dim)
            .map(|a| self.derivative(a).expect("axis in range"))
            .collect();
        VectorField { components: comps }
    }

    /// `(−Δ)^{-1}` in the mean-zero gauge: the ξ = 0 coefficient is dropped.
    pub fn inv_neg_laplacian(&self) -> Self {
        let g = self.grid;
        self.map_coeffs(|idx, c| {
            if idx == 0 {
                Complex64::default()
            } else {
                c / g.wavenumber_sq(idx)
            }
        })
    }

    pub fn neg_laplacian(&self) -> Self {
        let g = self.grid;
        self.map_coeffs(|idx, c| c * g.wavenumber_sq(idx))
    }

    /// 2/3-rule truncation: zeroes every coefficient with some `|ξ_a| > n/3`.
    pub fn dealias(&self) -> Self {
        let g = self.grid;
        let cut = g.n as f64 / 3.0;
        self.map_coeffs(|idx, c| {
            if (0..g.dim).any(|a| g.axis_freq(idx, a).unsigned_abs() as f64 > cut) {
                Complex64::default()
            } else {
                c
            }
        })
    }

    /// Physical-space product followed by dealiasing.
    pub fn pointwise_product(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let a = self.physical();
        let b = other.physical();
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut out = Self::to_spectral(self.grid, &prod)?.dealias();
        out.real = self.real && other.real;
        Ok(out)
    }

    /// Applies `f` pointwise to the physical samples and transforms back
    /// (no dealiasing).
    pub fn map_physical(&self, f: impl Fn(f64) -> f64) -> Self {
        let vals: Vec<f64> = self.physical().into_iter().map(f).collect();
        Self::to_spectral(self.grid, &vals).expect("same grid")
    }

    /// Grid-mean quadrature of `|f|²` evaluated through Parseval.
    pub fn mean_square(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `L²` norm with the unit-mean normalization, `(mean |f|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.mean_square().sqrt()
    }

    /// Grid-mean inner product `mean(f · g)` for real fields.
    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_coeffs(|_, c| c * a)
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x + y * a)
            .collect();
        Self {
            grid: self.grid,
            coeffs,
            real: self.real && other.real,
        }
    }

    /// Removes the mean mode.
    pub fn without_mean(&self) -> Self {
        let mut f = self.clone();
        f.coeffs[0] = Complex64::default();
        f
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

/// A vector field: one [`SpectralField`] per axis, all on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("vector field needs components".into()))?;
        if components.len() != first.grid.dim {
            return Err(Error::InvalidParameter(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                first.grid.dim
            )));
        }
        if components.iter().any(|c| c.grid != first.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            components: (0..grid.dim).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    /// The constant field with the given value in every point.
    pub fn constant(grid: GridSpec, value: &[f64]) -> Result<Self> {
        Self::new(value.iter().map(|&v| SpectralField::constant(grid, v)).collect())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.components[0].grid
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn divergence(&self) -> SpectralField {
        let mut div = SpectralField::zeros(*self.grid());
        for (a, c) in self.components.iter().enumerate() {
            div = &div + &c.derivative(a).expect("axis in range");
        }
        div
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        Self {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn map_indexed(&self, f: impl Fn(usize, &SpectralField) -> SpectralField) -> Self {
        Self {
            components: self.components.iter().enumerate().map(|(i, c)| f(i, c)).collect(),
        }
    }

    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(x, y)| x.axpy(a, y))
                .collect(),
        }
    }

    /// Pointwise Euclidean magnitude on the grid.
    pub fn magnitude(&self) -> Vec<f64> {
        let phys: Vec<Vec<f64>> = self.components.iter().map(|c| c.physical()).collect();
        (0..self.grid().len())
            .map(|i| phys.iter().map(|p| p[i] * p[i]).sum::<f64>().sqrt())
            .collect()
    }

    /// Sum of component mean squares.
    pub fn mean_square(&self) -> f64 {
        self.components.iter().map(|c| c.mean_square()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mean_square().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g32() -> GridSpec {
        GridSpec::square(32).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn field_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        (a - b).max_coeff()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::square(8).is_err());
        assert!(GridSpec::square(48).is_err());
        assert!(GridSpec::new(32, 4, 1.0).is_err());
        assert!(GridSpec::new(32, 2, 0.0).is_err());
        let g = GridSpec::square(16).unwrap();
        let freqs: Vec<i64> = (0..16).map(|k| g.freq(k)).collect();
        assert_eq!(freqs.iter().min(), Some(&-7));
        assert_eq!(freqs.iter().max(), Some(&8));
    }

    #[test]
    fn sine_transforms_to_two_modes() {
        let g = g32();
        let f = SpectralField::from_fn2(g, |x, _| x.sin());
        assert!((f.coeff(&[1, 0]) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((f.coeff(&[-1, 0]) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        let rest = f
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != g.freq_index(&[1, 0]) && *i != g.freq_index(&[-1, 0]))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        assert!(rest < 1e-15);
    }

    #[test]
    fn zeros_and_constants() {
        let g = g32();
        let z = SpectralField::to_spectral(g, &vec![0.0; g.len()]).unwrap();
        assert_eq!(z.max_coeff(), 0.0);
        let one = SpectralField::constant(g, 1.0).to_physical().unwrap();
        assert!(one.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn synthesis_of_sine_modes() {
        let g = g32();
        let mut c = vec![Complex64::default(); g.len()];
        c[g.freq_index(&[1, 0])] = Complex64::new(0.0, -0.5);
        c[g.freq_index(&[-1, 0])] = Complex64::new(0.0, 0.5);
        let f = SpectralField::from_coeffs(g, c, true).unwrap();
        let v = f.to_physical().unwrap();
        assert!(max_abs_diff(&v, &g.sample2(|x, _| x.sin())) < 1e-15);
    }

    #[test]
    fn shape_and_symmetry_errors() {
        let g = g32();
        assert!(matches!(
            SpectralField::to_spectral(g, &[1.0; 10]),
            Err(Error::ShapeMismatch { .. })
        ));
        let mut c = vec![Complex64::default(); g.len()];
        c[g.freq_index(&[1, 0])] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            SpectralField::from_coeffs(g, c.clone(), true),
            Err(Error::NotHermitian { .. })
        ));
        let f = SpectralField::from_coeffs(g, c, false).unwrap();
        assert_eq!(f.to_physical(), Err(Error::ComplexField));
    }

    #[test]
    fn random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [16, 64] {
            let g = GridSpec::square(n).unwrap();
            let v: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let back = SpectralField::to_spectral(g, &v).unwrap().to_physical().unwrap();
            let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!(max_abs_diff(&v, &back) <= 1e-13 * scale);
        }
        let g3 = GridSpec::new(16, 3, 2.0 * PI).unwrap();
        let v: Vec<f64> = (0..g3.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let back = SpectralField::to_spectral(g3, &v).unwrap().to_physical().unwrap();
        assert!(max_abs_diff(&v, &back) <= 1e-13);
    }

    #[test]
    fn derivatives() {
        let g = g32();
        let s = SpectralField::from_fn2(g, |x, _| x.sin());
        let ds = s.derivative(0).unwrap();
        assert!(field_diff(&ds, &SpectralField::from_fn2(g, |x, _| x.cos())) < 1e-15);
        assert!(SpectralField::constant(g, 3.0).derivative(1).unwrap().max_coeff() == 0.0);
        let f = SpectralField::from_fn2(g, |x, y| (3.0 * x).sin() * (2.0 * y).cos());
        let expected = SpectralField::from_fn2(g, |x, y| -2.0 * (3.0 * x).sin() * (2.0 * y).sin());
        assert!(field_diff(&f.derivative(1).unwrap(), &expected) < 1e-14);
        assert!(matches!(f.derivative(2), Err(Error::AxisOutOfRange { .. })));
    }

    #[test]
    fn derivative_respects_box_length() {
        let g = GridSpec::new(32, 2, 1.0).unwrap();
        let f = SpectralField::from_fn2(g, |x, _| (2.0 * PI * x).sin());
        let df = f.derivative(0).unwrap();
        let expected = SpectralField::from_fn2(g, |x, _| 2.0 * PI * (2.0 * PI * x).cos());
        assert!(field_diff(&df, &expected) < 1e-13);
    }

    #[test]
    fn inverse_laplacian_eigenvalues() {
        let g = g32();
        let s1 = SpectralField::from_fn2(g, |x, _| x.sin());
        assert!(field_diff(&s1.inv_neg_laplacian(), &s1) < 1e-15);
        let s2 = SpectralField::from_fn2(g, |x, _| (2.0 * x).sin());
        assert!(field_diff(&s2.inv_neg_laplacian(), &s2.scale(0.25)) < 1e-15);
        let c = SpectralField::constant(g, 2.0);
        assert_eq!(c.inv_neg_laplacian().max_coeff(), 0.0);
    }

    #[test]
    fn dealias_examples() {
        let g = g32();
        let low = SpectralField::from_fn2(g, |x, y| (10.0 * x).cos() + (3.0 * y).sin());
        assert!(field_diff(&low.dealias(), &low) < 1e-15);
        let nyq = SpectralField::from_fn2(g, |x, _| (16.0 * x).cos());
        assert!(nyq.max_coeff() > 0.9);
        assert_eq!(nyq.dealias().max_coeff(), 0.0);
    }

    #[test]
    fn products() {
        let g = g32();
        let s = SpectralField::from_fn2(g, |x, _| x.sin());
        let p = s.pointwise_product(&s).unwrap();
        let expected = SpectralField::from_fn2(g, |x, _| 0.5 * (1.0 - (2.0 * x).cos()));
        assert!(field_diff(&p, &expected) < 1e-15);
        let rough = SpectralField::from_fn2(g, |x, y| (15.0 * x).cos() + y.sin());
        let one = SpectralField::constant(g, 1.0);
        assert!(field_diff(&rough.pointwise_product(&one).unwrap(), &rough.dealias()) < 1e-15);
        let other = GridSpec::square(64).unwrap();
        assert_eq!(
            s.pointwise_product(&SpectralField::zeros(other)),
            Err(Error::GridMismatch)
        );
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = g32();
        let v: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = SpectralField::to_spectral(g, &v).unwrap();
        let direct = v.iter().map(|x| x * x).sum::<f64>() / g.len() as f64;
        assert!((f.mean_square() - direct).abs() <= 1e-12 * direct);
    }
}
