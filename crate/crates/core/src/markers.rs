//! Lagrangian markers following the discrete flow map.
//!
//! Velocities at off-grid points are evaluated by summing the trigonometric
//! series of each component directly, which is exact for band-limited fields.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::{SpectralField, VectorField};

#[derive(Clone, Debug, PartialEq)]
pub struct FlowMarkers {
    pub seeds: Vec<[f64; 2]>,
    pub positions: Vec<[f64; 2]>,
}

impl FlowMarkers {
    pub fn new(seeds: Vec<[f64; 2]>) -> Self {
        Self {
            positions: seeds.clone(),
            seeds,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions wrapped into `[0, length)²`.
    pub fn wrapped(&self, length: f64) -> Vec<[f64; 2]> {
        self.positions
            .iter()
            .map(|p| [p[0].rem_euclid(length), p[1].rem_euclid(length)])
            .collect()
    }
}

/// `e^{i k(ξ) x}` in storage order. Powers of `e^{i x}` are built by
/// recurrence, re-anchored with an exact `sin_cos` every 16 steps so the
/// rounding drift stays at a few ulps.
fn phases(n: usize, g: &crate::grid::GridSpec, x: f64) -> Vec<Complex64> {
    let theta = g.wavenumber_unit() * x;
    let (s, c) = theta.sin_cos();
    let base = Complex64::new(c, s);
    let mut pos = Vec::with_capacity(n / 2 + 1);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..=n / 2 {
        if k % 16 == 0 {
            let (s, c) = (k as f64 * theta).sin_cos();
            cur = Complex64::new(c, s);
        }
        pos.push(cur);
        cur *= base;
    }
    (0..n)
        .map(|k| if k <= n / 2 { pos[k] } else { pos[n - k].conj() })
        .collect()
}

/// `Σ_k c_k w_k` with four independent accumulators so the loop pipelines.
fn dot(c: &[Complex64], w: &[Complex64]) -> Complex64 {
    let mut re = [0.0; 4];
    let mut im = [0.0; 4];
    let (cc, wc) = (c.chunks_exact(4), w.chunks_exact(4));
    let tail: Complex64 = cc.remainder().iter().zip(wc.remainder()).map(|(a, b)| a * b).sum();
    for (a, b) in cc.zip(wc) {
        for k in 0..4 {
            re[k] += a[k].re * b[k].re - a[k].im * b[k].im;
            im[k] += a[k].re * b[k].im + a[k].im * b[k].re;
        }
    }
    Complex64::new(re.iter().sum(), im.iter().sum()) + tail
}

/// Values of several real band-limited fields at one planar point.
///
/// Hermitian symmetry lets the outer sum run over `0 ≤ ξ_1 ≤ n/2` only:
/// every row `ξ_1` strictly between `0` and `n/2` stands for itself and its
/// mirror `−ξ_1`, which contribute complex conjugate terms. This is exact for
/// fields without Nyquist content, such as velocities, which are derivatives.
fn evaluate_many<const K: usize>(fields: [&SpectralField; K], p: [f64; 2]) -> [f64; K] {
    let g = *fields[0].grid();
    assert_eq!(g.dim(), 2, "marker evaluation is planar");
    let n = g.n();
    let ex = phases(n, &g, p[0]);
    let ey = phases(n, &g, p[1]);
    let mut out = [0.0; K];
    for (kx, e) in ex.iter().enumerate().take(n / 2 + 1) {
        let weight = if kx == 0 || kx == n / 2 { 1.0 } else { 2.0 };
        for (f, o) in fields.iter().zip(out.iter_mut()) {
            let s = dot(&f.coeffs()[kx * n..(kx + 1) * n], &ey);
            *o += weight * (s * e).re;
        }
    }
    out
}

/// Value of a real band-limited field at an arbitrary planar point.
pub fn evaluate(f: &SpectralField, p: [f64; 2]) -> f64 {
    evaluate_many([f], p)[0]
}

/// Velocity at every point, evaluated in parallel.
pub fn sample_velocity(u: &VectorField, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    points
        .par_iter()
        .map(|&p| evaluate_many([u.component(0), u.component(1)], p))
        .collect()
}

fn shifted(points: &[[f64; 2]], v: &[[f64; 2]], h: f64) -> Vec<[f64; 2]> {
    points
        .iter()
        .zip(v)
        .map(|(p, w)| [p[0] + h * w[0], p[1] + h * w[1]])
        .collect()
}

/// RK4 update of every marker through the frozen field `u`.
pub fn advance_markers(markers: &FlowMarkers, u: &VectorField, dt: f64) -> FlowMarkers {
    advance_markers_staged(markers, [u, u, u, u], dt)
}

/// RK4 update using one velocity field per Runge-Kutta stage.
pub fn advance_markers_staged(markers: &FlowMarkers, stages: [&VectorField; 4], dt: f64) -> FlowMarkers {
    let p = &markers.positions;
    let k1 = sample_velocity(stages[0], p);
    let k2 = sample_velocity(stages[1], &shifted(p, &k1, 0.5 * dt));
    let k3 = sample_velocity(stages[2], &shifted(p, &k2, 0.5 * dt));
    let k4 = sample_velocity(stages[3], &shifted(p, &k3, dt));
    let positions = (0..p.len())
        .map(|i| {
            let step = |a: usize| dt / 6.0 * (k1[i][a] + 2.0 * k2[i][a] + 2.0 * k3[i][a] + k4[i][a]);
            [p[i][0] + step(0), p[i][1] + step(1)]
        })
        .collect();
    FlowMarkers {
        seeds: markers.seeds.clone(),
        positions,
    }
}

/// Nearest periodic image of `p` relative to `reference`.
pub fn unwrap_near(p: [f64; 2], reference: [f64; 2], length: f64) -> [f64; 2] {
    let fix = |x: f64, r: f64| x - length * ((x - r) / length).round();
    [fix(p[0], reference[0]), fix(p[1], reference[1])]
}

/// Closed polygon through `points` with consecutive vertices unwrapped onto
/// one periodic sheet.
pub fn unwrap_polygon(points: &[[f64; 2]], length: f64) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(points.len());
    for &p in points {
        let q = match out.last() {
            Some(&prev) => unwrap_near(p, prev, length),
            None => p,
        };
        out.push(q);
    }
    out
}

/// Winding number of a closed polygon around `p`.
pub fn winding_number(polygon: &[[f64; 2]], p: [f64; 2]) -> i32 {
    let mut w = 0;
    let n = polygon.len();
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= p[1] {
            if b[1] > p[1] && cross > 0.0 {
                w += 1;
            }
        } else if b[1] <= p[1] && cross < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Euclidean distance from `p` to the closed polygon.
pub fn polygon_distance(polygon: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let n = polygon.len();
    (0..n)
        .map(|i| segment_distance(polygon[i], polygon[(i + 1) % n], p))
        .fold(f64::INFINITY, f64::min)
}

fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0] - p[0], a[1] + t * d[1] - p[1]];
    (q[0] * q[0] + q[1] * q[1]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn evaluation_matches_closed_form() {
        let g = GridSpec::square(32).unwrap();
        let f = SpectralField::from_fn2(g, |x, y| (3.0 * x).sin() * (2.0 * y).cos() + 0.5);
        for p in [[0.1f64, 0.2], [3.3, 5.9], [-1.0, 7.5]] {
            let exact = (3.0 * p[0]).sin() * (2.0 * p[1]).cos() + 0.5;
            assert!((evaluate(&f, p) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn still_and_uniform_flows() {
        let g = GridSpec::square(16).unwrap();
        let m = FlowMarkers::new(vec![[0.5, 0.5], [6.0, 1.0]]);
        assert_eq!(advance_markers(&m, &VectorField::zeros(g), 0.3), m);
        let u = VectorField::constant(g, &[1.0, 0.0]).unwrap();
        let moved = advance_markers(&m, &u, 0.1);
        for (p, s) in moved.positions.iter().zip(&m.seeds) {
            assert!((p[0] - s[0] - 0.1).abs() < 1e-15);
            assert_eq!(p[1], s[1]);
        }
    }

    #[test]
    fn polygon_helpers() {
        let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(winding_number(&square, [0.5, 0.5]), 1);
        assert_eq!(winding_number(&square, [1.5, 0.5]), 0);
        assert!((polygon_distance(&square, [0.5, 0.25]) - 0.25).abs() < 1e-15);
        let l = 2.0 * std::f64::consts::PI;
        let wrapped = vec![[6.2, 1.0], [0.05, 1.0]];
        let un = unwrap_polygon(&wrapped, l);
        assert!((un[1][0] - (0.05 + l)).abs() < 1e-15);
    }
}
