//! Littlewood-Paley ladder on a periodic grid and the Besov, Hölder and
//! Lebesgue norms built on it.
//!
//! Block masks are radial in the physical wavenumber `r = |k(ξ)|`:
//!
//! * `mask_{-1}(r) = χ(r)`
//! * `mask_j(r) = χ(r / 2^{j+1}) − χ(r / 2^j)` for `0 ≤ j < j_max`
//! * `mask_{j_max}(r) = 1 − χ(r / 2^{j_max})`
//!
//! The top block absorbs every frequency above the ladder (grid corners
//! included), so the masks telescope to one at every grid frequency.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpectralField};
use crate::random::band_limited_field;

const CHI_INNER: f64 = 0.75;
const CHI_OUTER: f64 = 4.0 / 3.0;

fn bump_edge(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Radial cutoff: 1 on `[0, 3/4]`, 0 on `[4/3, ∞)`, smooth and
/// nonincreasing in between (an `exp(−1/x)` smoothstep).
pub fn chi(r: f64) -> f64 {
    let t = (r - CHI_INNER) / (CHI_OUTER - CHI_INNER);
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = bump_edge(1.0 - t);
        a / (a + bump_edge(t))
    }
}

/// Precomputed dyadic block masks for one grid.
#[derive(Clone, Debug)]
pub struct DyadicLadder {
    grid: GridSpec,
    j_max: i32,
    radius: Vec<f64>,
    // masks[j + 1] for j = -1..=j_max
    masks: Vec<Vec<f64>>,
}

impl DyadicLadder {
    pub fn build(grid: GridSpec) -> Result<Self> {
        let nyquist = grid.n() as f64 / 2.0 * grid.wavenumber_unit();
        let top = nyquist * 3.0 / 8.0;
        if top < 1.0 {
            return Err(Error::LadderTooSmall { j_max: -1 });
        }
        let j_max = top.log2().floor() as i32;
        if j_max < 1 {
            return Err(Error::LadderTooSmall { j_max });
        }
        let radius: Vec<f64> = (0..grid.len()).map(|i| grid.wavenumber_sq(i).sqrt()).collect();
        let mut masks = Vec::with_capacity(j_max as usize + 2);
        masks.push(radius.iter().map(|&r| chi(r)).collect());
        for j in 0..j_max {
            let lo = 2f64.powi(j);
            let hi = 2f64.powi(j + 1);
            masks.push(radius.iter().map(|&r| chi(r / hi) - chi(r / lo)).collect());
        }
        let top_scale = 2f64.powi(j_max);
        masks.push(radius.iter().map(|&r| 1.0 - chi(r / top_scale)).collect());
        Ok(Self {
            grid,
            j_max,
            radius,
            masks,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Block indices `-1..=j_max`.
    pub fn indices(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.j_max
    }

    pub fn radius(&self) -> &[f64] {
        &self.radius
    }

    pub fn mask(&self, j: i32) -> Result<&[f64]> {
        self.check_block(j)?;
        Ok(&self.masks[(j + 1) as usize])
    }

    fn check_block(&self, j: i32) -> Result<()> {
        if j < -1 || j > self.j_max {
            return Err(Error::BlockOutOfRange { j, j_max: self.j_max });
        }
        Ok(())
    }

    fn check_grid(&self, u: &SpectralField) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Scales one mask in place, breaking the partition of unity. Only meant
    /// for mutation tests of the validation suite.
    #[doc(hidden)]
    pub fn perturb_block(&mut self, j: i32, factor: f64) {
        if let Ok(()) = self.check_block(j) {
            self.masks[(j + 1) as usize].iter_mut().for_each(|m| *m *= factor);
        }
    }

    /// `Δ_j u`.
    pub fn block(&self, u: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(u)?;
        let mask = self.mask(j)?;
        Ok(u.map_coeffs(|i, c| c * mask[i]))
    }

    /// `S_j u = Σ_{k ≤ j−1} Δ_k u`, for `j ≥ 0`. Indices past `j_max + 1`
    /// return `u` itself.
    pub fn low_cut(&self, u: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(u)?;
        if j < 0 {
            return Err(Error::BlockOutOfRange { j, j_max: self.j_max });
        }
        let upto = j.min(self.j_max + 1);
        let mut weights = vec![0.0; self.grid.len()];
        for k in -1..upto {
            for (w, m) in weights.iter_mut().zip(self.mask(k)?) {
                *w += m;
            }
        }
        Ok(u.map_coeffs(|i, c| c * weights[i]))
    }

    /// Physical samples of every block `Δ_j u`, `j = -1..=j_max`.
    pub(crate) fn block_samples(&self, u: &SpectralField) -> Result<Vec<Vec<f64>>> {
        self.indices()
            .map(|j| self.block(u, j).map(|b| b.physical()))
            .collect()
    }

    /// `‖u‖_{B^s_{p,r}} = ‖(2^{js} ‖Δ_j u‖_{L^p})_{j ≥ -1}‖_{ℓ^r}` over the ladder.
    pub fn besov_norm(&self, u: &SpectralField, req: NormRequest) -> Result<f64> {
        self.check_grid(u)?;
        let terms: Vec<f64> = self
            .indices()
            .map(|j| {
                let b = self.block(u, j)?;
                Ok(2f64.powf(j as f64 * req.s) * lebesgue_norm(&b, req.p))
            })
            .collect::<Result<_>>()?;
        Ok(sequence_norm(&terms, req.r))
    }

    /// `C^s = B^s_{∞,∞}`; negative `s` gives the negative Hölder scale.
    pub fn holder_norm(&self, u: &SpectralField, s: f64) -> Result<f64> {
        self.besov_norm(u, NormRequest::holder(s))
    }

    /// Per-block Hölder weights `2^{js}‖Δ_j u‖_{L^∞}`, one per ladder index.
    pub fn holder_profile(&self, u: &SpectralField, s: f64) -> Result<Vec<f64>> {
        self.check_grid(u)?;
        self.indices()
            .map(|j| Ok(2f64.powf(j as f64 * s) * lebesgue_norm(&self.block(u, j)?, f64::INFINITY)))
            .collect()
    }
}

fn sequence_norm(terms: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        terms.iter().copied().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Grid quadrature of `|u|^p` with unit-mean normalization; the grid max
/// for `p = ∞`.
pub fn lebesgue_norm(u: &SpectralField, p: f64) -> f64 {
    lebesgue_norm_samples(&u.physical(), p)
}

pub fn lebesgue_norm_samples(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    } else {
        let mean = values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / values.len() as f64;
        mean.powf(1.0 / p)
    }
}

/// Indices `(s, p, r)` of a Besov norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormRequest {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl NormRequest {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        let admissible = |x: f64| x >= 1.0 || x == f64::INFINITY;
        if !s.is_finite() || !admissible(p) || !admissible(r) {
            return Err(Error::InvalidParameter(format!(
                "Besov indices need s finite and p, r in [1, inf]; got s={s}, p={p}, r={r}"
            )));
        }
        Ok(Self { s, p, r })
    }

    pub fn holder(s: f64) -> Self {
        Self {
            s,
            p: f64::INFINITY,
            r: f64::INFINITY,
        }
    }
}

/// Ratio `‖∇Δ_j u‖_{L^∞} / (2^j ‖Δ_j u‖_{L^∞})`, `None` when the block
/// vanishes.
pub fn bernstein_ratio(ladder: &DyadicLadder, u: &SpectralField, j: i32) -> Result<Option<f64>> {
    let b = ladder.block(u, j)?;
    let size = lebesgue_norm(&b, f64::INFINITY);
    if size <= 1e-13 * u.max_coeff().max(f64::MIN_POSITIVE) {
        return Ok(None);
    }
    let grad = b.gradient().magnitude();
    let grad_max = grad.iter().copied().fold(0.0, f64::max);
    Ok(Some(grad_max / (2f64.powi(j) * size)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BernsteinRow {
    pub j: i32,
    pub count: usize,
    pub ratio_min: f64,
    pub ratio_median: f64,
    pub ratio_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BernsteinReport {
    pub rows: Vec<BernsteinRow>,
    /// Least-squares slope of `log2(ratio_max)` against `j`.
    pub growth_slope: f64,
    pub flagged: bool,
}

/// Slope above which the per-block maxima are considered to grow with `j`.
pub const BERNSTEIN_GROWTH_SLOPE: f64 = 0.25;

impl BernsteinReport {
    pub fn envelope(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio_max).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,ratio_min,ratio_median,ratio_max\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e}\n",
                r.j, r.ratio_min, r.ratio_median, r.ratio_max
            ));
        }
        out
    }
}

/// Measures Bernstein ratios over `samples` random band-limited fields.
pub fn bernstein_audit(ladder: &DyadicLadder, samples: usize, seed: u64) -> Result<BernsteinReport> {
    let grid = *ladder.grid();
    let per_field: Vec<Vec<Option<f64>>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let u = band_limited_field(grid, &mut rng);
            ladder
                .indices()
                .map(|j| bernstein_ratio(ladder, &u, j))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (slot, j) in ladder.indices().enumerate() {
        let mut ratios: Vec<f64> = per_field.iter().filter_map(|r| r[slot]).collect();
        if ratios.is_empty() {
            continue;
        }
        ratios.sort_by(|a, b| a.total_cmp(b));
        let mid = ratios.len() / 2;
        let median = if ratios.len() % 2 == 0 {
            0.5 * (ratios[mid - 1] + ratios[mid])
        } else {
            ratios[mid]
        };
        rows.push(BernsteinRow {
            j,
            count: ratios.len(),
            ratio_min: ratios[0],
            ratio_median: median,
            ratio_max: *ratios.last().unwrap(),
        });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.j as f64, r.ratio_max.log2())).collect();
    let growth_slope = crate::stats::slope(&points);
    Ok(BernsteinReport {
        rows,
        growth_slope,
        flagged: growth_slope > BERNSTEIN_GROWTH_SLOPE,
    })
}
