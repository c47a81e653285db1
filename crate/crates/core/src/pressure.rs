//! Variable-coefficient pressure equation `−div(∇Π/ρ) = div(u·∇u)`.
//!
//! The discrete operator is `A Π = −Σ_i ∂_i D(a ∂_i Π)` with `a` the
//! dealiased samples of `1/ρ` and `D` the 2/3-rule projection. It is
//! self-adjoint and positive on mean-zero band-limited fields, so the
//! default solver is conjugate gradient preconditioned by `(−Δ)^{-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SpectralField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EllipticMethod {
    #[default]
    #[serde(alias = "pcg")]
    PreconditionedConjugateGradient,
    FixedPoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub method: EllipticMethod,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            method: EllipticMethod::PreconditionedConjugateGradient,
        }
    }
}

impl EllipticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("elliptic tol = {} must be > 0", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("elliptic max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Admissible density range `[ρ_*, ρ^*]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBounds {
    pub lower: f64,
    pub upper: f64,
}

impl DensityBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper && upper.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "density bounds need 0 < rho_star <= rho_star_upper, got {lower} and {upper}"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Bounds enlarged by `frac · (upper − lower)` on both sides.
    pub fn widened(&self, frac: f64) -> Self {
        let pad = frac * (self.upper - self.lower);
        Self {
            lower: self.lower - pad,
            upper: self.upper + pad,
        }
    }

    /// Ellipticity floor `a_* = 1/ρ^*`.
    pub fn a_star(&self) -> f64 {
        1.0 / self.upper
    }

    pub fn check(&self, rho_samples: &[f64]) -> Result<()> {
        let min = rho_samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = rho_samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(min > 0.0) {
            return Err(Error::NonPositiveDensity { min });
        }
        if min < self.lower || max > self.upper {
            return Err(Error::DensityOutOfBounds {
                min,
                max,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(())
    }
}

/// Dealiased samples of `1/ρ`; fails if `ρ ≤ 0` anywhere on the grid.
pub fn inverse_density(rho: &SpectralField) -> Result<SpectralField> {
    let samples = rho.physical();
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NonPositiveDensity { min });
    }
    let inv: Vec<f64> = samples.iter().map(|r| 1.0 / r).collect();
    Ok(SpectralField::to_spectral(*rho.grid(), &inv)?.dealias())
}

/// Advection `D(u·∇v)` of a scalar, computed in physical space.
pub(crate) fn advect(u_phys: &[Vec<f64>], v: &SpectralField) -> SpectralField {
    let grid = *v.grid();
    let mut acc = vec![0.0; grid.len()];
    for (i, ui) in u_phys.iter().enumerate() {
        let dv = v.derivative(i).expect("axis in range").physical();
        acc.iter_mut()
            .zip(ui.iter().zip(&dv))
            .for_each(|(a, (p, q))| *a += p * q);
    }
    SpectralField::to_spectral(grid, &acc)
        .expect("grid sized")
        .dealias()
}

/// Dealiased momentum advection `D(u·∇u)`, one component per axis.
pub fn momentum_advection(u: &VectorField) -> VectorField {
    let phys: Vec<Vec<f64>> = u.components().iter().map(|c| c.physical()).collect();
    u.map(|c| advect(&phys, c))
}

/// Pressure source `div D(u·∇u)` (equal to `∇u:∇u` for divergence-free `u`).
pub fn pressure_source(u: &VectorField) -> SpectralField {
    momentum_advection(u).divergence()
}

/// The operator `A Π = −Σ_i ∂_i D(a ∂_i Π)`.
pub fn apply_operator(a_phys: &[f64], p: &SpectralField) -> SpectralField {
    let grid = *p.grid();
    let mut out = SpectralField::zeros(grid);
    for axis in 0..grid.dim() {
        let dp = p.derivative(axis).expect("axis in range").physical();
        let flux: Vec<f64> = dp.iter().zip(a_phys).map(|(d, a)| d * a).collect();
        let flux = SpectralField::to_spectral(grid, &flux).expect("grid sized");
        out = out.axpy(-1.0, &flux.derivative(axis).expect("axis in range"));
    }
    out.dealias()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PressureSolution {
    pub pi: SpectralField,
    pub iterations: usize,
    /// Final relative residual (absolute when the source vanishes).
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Solves for the mean-zero pressure of density `rho` and velocity `u`.
pub fn solve_pressure(
    rho: &SpectralField,
    u: &VectorField,
    cfg: &EllipticConfig,
    bounds: &DensityBounds,
) -> Result<PressureSolution> {
    cfg.validate()?;
    if rho.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    bounds.check(&rho.physical())?;
    let a = inverse_density(rho)?;
    let source = pressure_source(u);
    let floor = source_floor(u);
    solve_with(rho, &a, &source, floor, None, cfg)
}

/// Rounding-level size of the source: the magnitude below which
/// `div(u·∇u)` is indistinguishable from zero.
pub(crate) fn source_floor(u: &VectorField) -> f64 {
    let m = u.magnitude();
    let umax = m.iter().copied().fold(0.0, f64::max);
    let k = u.grid().n() as f64 / 2.0 * u.grid().wavenumber_unit();
    1e-13 * umax * umax * k * k
}

pub(crate) fn solve_with(
    rho: &SpectralField,
    a: &SpectralField,
    source: &SpectralField,
    floor: f64,
    guess: Option<&SpectralField>,
    cfg: &EllipticConfig,
) -> Result<PressureSolution> {
    let grid = *source.grid();
    let a_phys = a.physical();
    let f_norm = source.l2_norm();
    let (scale, vanishing) = if f_norm <= floor {
        (1.0, true)
    } else {
        (f_norm, false)
    };
    if vanishing && f_norm == 0.0 && guess.is_none() {
        return Ok(PressureSolution {
            pi: SpectralField::zeros(grid),
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }
    let mut p = guess.map(|g| g.without_mean().dealias()).unwrap_or_else(|| SpectralField::zeros(grid));
    match cfg.method {
        EllipticMethod::PreconditionedConjugateGradient => pcg(&a_phys, source, &mut p, scale, cfg),
        EllipticMethod::FixedPoint => fixed_point(rho, &a_phys, source, &mut p, scale, cfg),
    }
    .map(|(iterations, residual, history)| PressureSolution {
        pi: p,
        iterations,
        residual,
        history,
    })
}

fn pcg(
    a: &[f64],
    f: &SpectralField,
    p: &mut SpectralField,
    scale: f64,
    cfg: &EllipticConfig,
) -> Result<(usize, f64, Vec<f64>)> {
    let mut r = f - &apply_operator(a, p);
    let mut res = r.l2_norm() / scale;
    let mut history = vec![res];
    if res <= cfg.tol {
        return Ok((0, res, history));
    }
    let mut z = r.inv_neg_laplacian();
    let mut d = z.clone();
    let mut rz = r.inner(&z);
    for it in 1..=cfg.max_iter {
        let ad = apply_operator(a, &d);
        let alpha = rz / d.inner(&ad);
        *p = p.axpy(alpha, &d);
        r = r.axpy(-alpha, &ad);
        res = r.l2_norm() / scale;
        history.push(res);
        if res <= cfg.tol {
            *p = p.without_mean();
            return Ok((it, res, history));
        }
        z = r.inv_neg_laplacian();
        let rz_new = r.inner(&z);
        d = z.axpy(rz_new / rz, &d);
        rz = rz_new;
    }
    Err(Error::PressureNotConverged {
        iterations: cfg.max_iter,
        residual: res,
    })
}

/// Residual-corrected iteration `Π ← Π + (−Δ)^{-1} D(ρ r)`. Its continuum
/// form is `−ΔΠ_{k+1} = ρ div(u·∇u) − ∇log ρ · ∇Π_k`.
fn fixed_point(
    rho: &SpectralField,
    a: &[f64],
    f: &SpectralField,
    p: &mut SpectralField,
    scale: f64,
    cfg: &EllipticConfig,
) -> Result<(usize, f64, Vec<f64>)> {
    let rho_phys = rho.physical();
    let grid = *f.grid();
    let mut r = f - &apply_operator(a, p);
    let mut res = r.l2_norm() / scale;
    let mut history = vec![res];
    for it in 1..=cfg.max_iter {
        if res <= cfg.tol {
            *p = p.without_mean();
            return Ok((it - 1, res, history));
        }
        let weighted: Vec<f64> = r.physical().iter().zip(&rho_phys).map(|(x, y)| x * y).collect();
        let update = SpectralField::to_spectral(grid, &weighted)?.dealias().inv_neg_laplacian();
        *p = &*p + &update;
        r = f - &apply_operator(a, p);
        res = r.l2_norm() / scale;
        history.push(res);
        if !res.is_finite() {
            break;
        }
    }
    if res <= cfg.tol {
        *p = p.without_mean();
        return Ok((cfg.max_iter, res, history));
    }
    Err(Error::PressureNotConverged {
        iterations: cfg.max_iter,
        residual: res,
    })
}

/// Independent residual check `‖div(∇Π/ρ) + div(u·∇u)‖ / ‖div(u·∇u)‖`,
/// built from the public field API rather than the solver kernels.
pub fn pressure_residual(rho: &SpectralField, u: &VectorField, pi: &SpectralField) -> Result<f64> {
    let a = inverse_density(rho)?;
    let grad = pi.gradient();
    let mut flux_div = SpectralField::zeros(*pi.grid());
    for (i, g) in grad.components().iter().enumerate() {
        flux_div = &flux_div + &a.pointwise_product(g)?.derivative(i)?;
    }
    let mut source = SpectralField::zeros(*pi.grid());
    for (i, ui) in u.components().iter().enumerate() {
        let mut adv = SpectralField::zeros(*pi.grid());
        for (j, uj) in u.components().iter().enumerate() {
            adv = &adv + &uj.pointwise_product(&ui.derivative(j)?)?;
        }
        source = &source + &adv.derivative(i)?;
    }
    let res = (&flux_div + &source).l2_norm();
    let s = source.l2_norm();
    Ok(if s <= source_floor(u) { res } else { res / s })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyAudit {
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
}

/// Energy estimate `(1/ρ^*) ‖∇Π‖_{L²} ≤ ‖u·∇u‖_{L²}`.
pub fn energy_audit(u: &VectorField, pi: &SpectralField, bounds: &DensityBounds) -> EnergyAudit {
    let lhs = bounds.a_star() * pi.gradient().l2_norm();
    let rhs = momentum_advection(u).l2_norm();
    EnergyAudit {
        lhs,
        rhs,
        violated: lhs > rhs * (1.0 + 1e-8),
    }
}
