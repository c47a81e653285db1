//! Bony paraproduct and remainder, the paravector-field operator, and the
//! two derivations along a vector field.
//!
//! Every product is a dealiased [`SpectralField::pointwise_product`], so the
//! decomposition `T_u v + T_v u + R(u, v) = u·v` holds to rounding against
//! the dealiased product.

use crate::error::{Error, Result};
use crate::grid::{SpectralField, VectorField};
use crate::ladder::DyadicLadder;

fn check(ladder: &DyadicLadder, u: &SpectralField, v: &SpectralField) -> Result<()> {
    if u.grid() != v.grid() || u.grid() != ladder.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn finish(ladder: &DyadicLadder, acc: Vec<f64>) -> SpectralField {
    SpectralField::to_spectral(*ladder.grid(), &acc)
        .expect("accumulator matches grid")
        .dealias()
}

/// `T_u v = Σ_{j=1}^{j_max} S_{j−1}u · Δ_j v`. The sum starts at `j = 1`
/// because `S_{j−1}` vanishes for `j ≤ 0`.
pub fn paraproduct(ladder: &DyadicLadder, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    check(ladder, u, v)?;
    let ub = ladder.block_samples(u)?;
    let vb = ladder.block_samples(v)?;
    let mut acc = vec![0.0; ladder.grid().len()];
    let mut low = vec![0.0; acc.len()];
    // low holds S_{j-1}u = Σ_{k ≤ j-2} Δ_k u while j runs upward
    for j in 1..=ladder.j_max() {
        let added = &ub[(j - 2 + 1) as usize];
        low.iter_mut().zip(added).for_each(|(l, a)| *l += a);
        let high = &vb[(j + 1) as usize];
        acc.iter_mut()
            .zip(low.iter().zip(high))
            .for_each(|(a, (l, h))| *a += l * h);
    }
    Ok(finish(ladder, acc))
}

/// `R(u, v) = Σ_j Σ_{|k−j| ≤ 1} Δ_j u · Δ_k v`.
pub fn remainder(ladder: &DyadicLadder, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    check(ladder, u, v)?;
    let ub = ladder.block_samples(u)?;
    let vb = ladder.block_samples(v)?;
    let blocks = ub.len();
    let mut acc = vec![0.0; ladder.grid().len()];
    for j in 0..blocks {
        let lo = j.saturating_sub(1);
        let hi = (j + 1).min(blocks - 1);
        for k in lo..=hi {
            acc.iter_mut()
                .zip(ub[j].iter().zip(&vb[k]))
                .for_each(|(a, (x, y))| *a += x * y);
        }
    }
    Ok(finish(ladder, acc))
}

/// Paravector field `T_X u = Σ_i T_{X^i} ∂_i u`.
pub fn paravector(ladder: &DyadicLadder, x: &VectorField, u: &SpectralField) -> Result<SpectralField> {
    if x.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    let mut out = SpectralField::zeros(*u.grid());
    for (i, xi) in x.components().iter().enumerate() {
        out = &out + &paraproduct(ladder, xi, &u.derivative(i)?)?;
    }
    Ok(out)
}

/// `∂_X f = Σ_i X^i ∂_i f`.
pub fn derive_along(f: &SpectralField, x: &VectorField) -> Result<SpectralField> {
    if x.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *f.grid();
    let mut acc = vec![0.0; grid.len()];
    for (i, xi) in x.components().iter().enumerate() {
        let xs = xi.physical();
        let ds = f.derivative(i)?.physical();
        acc.iter_mut()
            .zip(xs.iter().zip(&ds))
            .for_each(|(a, (p, q))| *a += p * q);
    }
    Ok(SpectralField::to_spectral(grid, &acc)?.dealias())
}

/// `div(f X) = Σ_i ∂_i (f X^i)`.
pub fn div_along(f: &SpectralField, x: &VectorField) -> Result<SpectralField> {
    if x.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let mut out = SpectralField::zeros(*f.grid());
    for (i, xi) in x.components().iter().enumerate() {
        out = &out + &f.pointwise_product(xi)?.derivative(i)?;
    }
    Ok(out)
}
