use crate::dynamics::grad_velocity;
use crate::error::{Error, Result};
use crate::family::VectorFieldFamily;
use crate::grid::{SpectralField, VectorField};
use crate::ladder::{lebesgue_norm, DyadicLadder};
use crate::para::{derive_along, div_along};

/// Values of `I(X)` below this are treated as a degenerate family.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// `I(X)` in the plane: grid infimum of `max_λ |X_λ(x)|`.
pub fn nondegeneracy(family: &VectorFieldFamily) -> f64 {
    let mags: Vec<Vec<f64>> = family.members().iter().map(|x| x.magnitude()).collect();
    (0..family.grid().len())
        .map(|i| mags.iter().map(|m| m[i]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// `max_i ‖X^i‖_{C^ε} + ‖div X‖_{C^ε}`.
pub fn tilde_norm(ladder: &DyadicLadder, x: &VectorField, eps: f64) -> Result<f64> {
    let comps = x
        .components()
        .iter()
        .map(|c| ladder.holder_norm(c, eps))
        .collect::<Result<Vec<_>>>()?;
    let div = ladder.holder_norm(&x.divergence(), eps)?;
    Ok(comps.into_iter().fold(0.0, f64::max) + div)
}

fn max_over<F>(family: &VectorFieldFamily, f: F) -> Result<f64>
where
    F: Fn(&VectorField) -> Result<f64>,
{
    family
        .members()
        .iter()
        .map(f)
        .try_fold(0.0, |acc: f64, v| v.map(|v| acc.max(v)))
}

/// `max_λ ‖div(f X_λ)‖_{C^{ε−1}}`.
pub fn div_along_norm(ladder: &DyadicLadder, f: &SpectralField, family: &VectorFieldFamily) -> Result<f64> {
    let s = family.epsilon() - 1.0;
    max_over(family, |x| ladder.holder_norm(&div_along(f, x)?, s))
}

/// `max_λ ‖∂_{X_λ} f‖_{C^{ε−1}}`.
pub fn striation_along(ladder: &DyadicLadder, f: &SpectralField, family: &VectorFieldFamily) -> Result<f64> {
    let s = family.epsilon() - 1.0;
    max_over(family, |x| ladder.holder_norm(&derive_along(f, x)?, s))
}

/// Striated norm `(‖f‖_{L^∞} max_λ ~‖X_λ‖_{C^ε} + max_λ ‖div(f X_λ)‖_{C^{ε−1}}) / I(X)`.
pub fn striated_norm(ladder: &DyadicLadder, f: &SpectralField, family: &VectorFieldFamily) -> Result<f64> {
    let iota = nondegeneracy(family);
    if !(iota >= DEGENERACY_FLOOR) {
        return Err(Error::DegenerateFamily { value: iota });
    }
    let eps = family.epsilon();
    let gamma = max_over(family, |x| tilde_norm(ladder, x, eps))?;
    let sup = lebesgue_norm(f, f64::INFINITY);
    Ok((sup * gamma + div_along_norm(ladder, f, family)?) / iota)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzAudit {
    /// `max_{ij} ‖∂_j u^i‖_{L^∞}`.
    pub lhs: f64,
    pub rhs_shape: f64,
    pub ratio: f64,
}

/// Compares `‖∇u‖_{L^∞}` with the shape
/// `q²/(q−1) ‖ω‖_{L^q} + ‖ω‖_{L^∞} log(e + ‖ω‖_{C^ε_X}/‖ω‖_{L^∞}) / (ε(1−ε))`.
pub fn lipschitz_audit(
    ladder: &DyadicLadder,
    omega: &SpectralField,
    family: &VectorFieldFamily,
    q: f64,
) -> Result<LipschitzAudit> {
    let sup = lebesgue_norm(omega, f64::INFINITY);
    if sup == 0.0 {
        return Ok(LipschitzAudit {
            lhs: 0.0,
            rhs_shape: 0.0,
            ratio: 0.0,
        });
    }
    let eps = family.epsilon();
    let lhs = grad_velocity(omega)
        .iter()
        .flatten()
        .map(|d| lebesgue_norm(d, f64::INFINITY))
        .fold(0.0, f64::max);
    let stri = striated_norm(ladder, omega, family)?;
    let rhs_shape =
        q * q / (q - 1.0) * lebesgue_norm(omega, q) + sup * (std::f64::consts::E + stri / sup).ln() / (eps * (1.0 - eps));
    Ok(LipschitzAudit {
        lhs,
        rhs_shape,
        ratio: lhs / rhs_shape,
    })
}
