//! Multi-dimensional complex FFT over row-major cubes, built from cached
//! one-dimensional `rustfft` plans.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

type PlanCache = Mutex<HashMap<(usize, Direction), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, dir))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            match dir {
                Direction::Forward => planner.plan_fft_forward(n),
                Direction::Inverse => planner.plan_fft_inverse(n),
            }
        })
        .clone()
}

/// Unnormalized in-place transform of an `n^dim` row-major cube along every axis.
pub(crate) fn transform(data: &mut [Complex64], n: usize, dim: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, dir);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    // last axis is contiguous: one batched call
    fft.process_with_scratch(data, &mut scratch);
    if dim == 1 {
        return;
    }
    let mut lines = Vec::with_capacity(data.len());
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = n * stride;
        lines.clear();
        for base in (0..data.len()).step_by(block) {
            for r in 0..stride {
                lines.extend((0..n).map(|k| data[base + r + k * stride]));
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        let mut line = 0;
        for base in (0..data.len()).step_by(block) {
            for r in 0..stride {
                let src = &lines[line * n..(line + 1) * n];
                for (k, s) in src.iter().enumerate() {
                    data[base + r + k * stride] = *s;
                }
                line += 1;
            }
        }
    }
}
