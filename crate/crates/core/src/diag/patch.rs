use crate::error::{Error, Result};
use crate::grid::SpectralField;
use crate::markers::{polygon_distance, unwrap_near, unwrap_polygon, winding_number, FlowMarkers};

/// Pairs `(x, y)` are sampled with `|x − y|` up to this many grid cells.
pub const PAIR_RADIUS_CELLS: i64 = 4;
pub const MIN_INTERIOR_POINTS: usize = 10;

fn offsets() -> Vec<(i64, i64)> {
    let r = PAIR_RADIUS_CELLS;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            // half of the disc suffices since the quotient is symmetric
            let forward = a > 0 || (a == 0 && b > 0);
            if forward && a * a + b * b <= r * r {
                out.push((a, b));
            }
        }
    }
    out
}

fn max_quotient(values: &[f64], n: usize, h: f64, eps: f64, keep: impl Fn(usize) -> bool) -> f64 {
    let offs = offsets();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            if !keep(idx) {
                continue;
            }
            for &(a, b) in &offs {
                let ii = (i as i64 + a).rem_euclid(n as i64) as usize;
                let jj = (j as i64 + b).rem_euclid(n as i64) as usize;
                let other = ii * n + jj;
                if !keep(other) {
                    continue;
                }
                let dist = h * ((a * a + b * b) as f64).sqrt();
                best = best.max((values[idx] - values[other]).abs() / dist.powf(eps));
            }
        }
    }
    best
}

/// Largest finite-difference quotient `|f(x) − f(y)| / |x − y|^ε` over grid
/// pairs at most [`PAIR_RADIUS_CELLS`] apart, anywhere on the torus.
pub fn global_holder_quotient(f: &SpectralField, eps: f64) -> f64 {
    let g = f.grid();
    max_quotient(&f.physical(), g.n(), g.spacing(), eps, |_| true)
}

/// Same quotient restricted to grid points inside the marker polygon and
/// farther than `margin` grid cells from it.
pub fn patch_interior_holder(f: &SpectralField, markers: &FlowMarkers, eps: f64, margin: f64) -> Result<f64> {
    let g = f.grid();
    if g.dim() != 2 {
        return Err(Error::InvalidGrid("patch diagnostics are planar".into()));
    }
    if markers.len() < 3 {
        return Err(Error::InvalidParameter("patch boundary needs at least 3 markers".into()));
    }
    if !(margin > 0.0) {
        return Err(Error::InvalidParameter(format!("margin = {margin} must be > 0")));
    }
    let l = g.length();
    let h = g.spacing();
    let polygon = unwrap_polygon(&markers.positions, l);
    let centroid = {
        let k = polygon.len() as f64;
        let s = polygon.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        [s[0] / k, s[1] / k]
    };
    let inside: Vec<bool> = (0..g.len())
        .map(|idx| {
            let p = g.point(idx);
            let q = unwrap_near([p[0], p[1]], centroid, l);
            winding_number(&polygon, q) != 0 && polygon_distance(&polygon, q) > margin * h
        })
        .collect();
    let found = inside.iter().filter(|&&b| b).count();
    if found < MIN_INTERIOR_POINTS {
        return Err(Error::InsufficientInterior {
            found,
            needed: MIN_INTERIOR_POINTS,
        });
    }
    Ok(max_quotient(&f.physical(), g.n(), h, eps, |i| inside[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn circle(c: [f64; 2], r: f64, k: usize) -> FlowMarkers {
        FlowMarkers::new(
            (0..k)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / k as f64;
                    [c[0] + r * t.cos(), c[1] + r * t.sin()]
                })
                .collect(),
        )
    }

    #[test]
    fn constant_has_zero_quotient() {
        let g = GridSpec::square(32).unwrap();
        let f = SpectralField::constant(g, 3.0);
        let m = circle([PI, PI], 1.5, 64);
        assert_eq!(patch_interior_holder(&f, &m, 0.5, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn tiny_patch_is_rejected() {
        let g = GridSpec::square(32).unwrap();
        let f = SpectralField::constant(g, 3.0);
        let m = circle([PI, PI], 0.3, 32);
        assert!(matches!(
            patch_interior_holder(&f, &m, 0.5, 3.0),
            Err(Error::InsufficientInterior { .. })
        ));
    }

    #[test]
    fn patch_across_the_seam() {
        let g = GridSpec::square(32).unwrap();
        let f = SpectralField::from_fn2(g, |x, _| x.sin());
        let m = circle([0.0, 0.0], 1.5, 64);
        let q = patch_interior_holder(&f, &m, 0.5, 2.0).unwrap();
        assert!(q > 0.0 && q <= global_holder_quotient(&f, 0.5));
    }
}
