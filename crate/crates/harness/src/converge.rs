//! Convergence studies behind `stria converge`.
//!
//! Temporal: the configured scenario on its own grid with the step halved
//! `levels − 1` times; orders come from Richardson triples. Spatial: the
//! scenario on `n / 2^k` grids with the physical edge width held fixed,
//! each compared with the finest solution restricted to the coarse modes.

use std::fmt;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use stria_core::stats::slope;
use stria_core::{GridSpec, SpectralField};

use crate::config::{ConfigError, RunConfig, ScenarioName};
use crate::run::{RunError, Simulation};

pub const MIN_ORDER: f64 = 3.5;
pub const MIN_SPATIAL_RATIO: f64 = 10.0;
/// Relative differences below this are treated as round-off.
pub const ERROR_FLOOR: f64 = 1e-11;

#[derive(Clone, Debug, Serialize)]
pub struct TemporalLevel {
    pub dt: f64,
    pub steps: usize,
    /// Relative difference to the run with half the step.
    pub error: Option<f64>,
    /// Richardson order from this level and the next two.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpatialLevel {
    pub n: usize,
    pub width_cells: Option<f64>,
    /// Relative difference to the finest grid, on the shared modes.
    pub error: Option<f64>,
    /// `error / error(next finer)`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeReport {
    pub scenario: String,
    pub levels: usize,
    pub temporal: Vec<TemporalLevel>,
    pub spatial: Vec<SpatialLevel>,
    /// Least-squares slope of `log10 max|ω̂|` per shell against shell index,
    /// on the finest grid.
    pub spectral_decay: f64,
    pub flags: Vec<String>,
}

impl ConvergeReport {
    pub fn passed(&self) -> bool {
        self.flags.is_empty()
    }
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or("-".into(), |x| format!("{x:.prec$e}"))
}

impl fmt::Display for ConvergeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {} ({} levels)", self.scenario, self.levels)?;
        writeln!(f, "temporal        dt  steps      error  order")?;
        for t in &self.temporal {
            let order = t.order.map_or("-".into(), |o| format!("{o:.3}"));
            writeln!(f, "      {:>10.3e} {:>6} {:>10} {:>6}", t.dt, t.steps, opt(t.error, 3), order)?;
        }
        writeln!(f, "spatial      n  width      error  ratio")?;
        for s in &self.spatial {
            let w = s.width_cells.map_or("-".into(), |w| format!("{w:.2}"));
            let r = s.ratio.map_or("-".into(), |r| format!("{r:.1}"));
            writeln!(f, "      {:>7} {:>6} {:>10} {:>6}", s.n, w, opt(s.error, 3), r)?;
        }
        writeln!(f, "spectral decay {:.3} decades per shell", self.spectral_decay)?;
        if self.flags.is_empty() {
            write!(f, "no flags")
        } else {
            for (i, flag) in self.flags.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "FLAG {flag}")?;
            }
            Ok(())
        }
    }
}

fn constraint(message: String) -> RunError {
    RunError::Config(ConfigError::Constraint {
        path: PathBuf::from("<converge>"),
        line: None,
        message,
    })
}

type Solution = (SpectralField, SpectralField);

fn solve(cfg: &RunConfig) -> Result<Solution, RunError> {
    let mut sim = Simulation::new(cfg)?;
    sim.run_to_end(|_| Ok(()))?;
    Ok((sim.state.rho, sim.state.omega))
}

fn rel_diff(a: &Solution, b: &Solution) -> f64 {
    let num = (&a.0 - &b.0).mean_square() + (&a.1 - &b.1).mean_square();
    let den = b.0.mean_square() + b.1.mean_square();
    (num / den).sqrt()
}

/// Keeps the modes of `f` representable on `coarse`, dropping the coarse
/// Nyquist row and column so the result stays real.
pub fn restrict(f: &SpectralField, coarse: GridSpec) -> Result<SpectralField, RunError> {
    let coeffs = (0..coarse.len())
        .map(|idx| {
            if coarse.is_nyquist(idx) {
                Default::default()
            } else {
                f.coeff(&[coarse.axis_freq(idx, 0), coarse.axis_freq(idx, 1)])
            }
        })
        .collect();
    Ok(SpectralField::from_coeffs(coarse, coeffs, true)?)
}

/// Zero-pads `f` onto the finer grid `fine`; the inverse of [`restrict`]
/// on fields without Nyquist content.
pub fn prolong(f: &SpectralField, fine: GridSpec) -> Result<SpectralField, RunError> {
    let g = *f.grid();
    let half = (g.n() / 2) as i64;
    let coeffs = (0..fine.len())
        .map(|idx| {
            let xi = [fine.axis_freq(idx, 0), fine.axis_freq(idx, 1)];
            if xi.iter().all(|k| k.abs() < half) {
                f.coeff(&xi)
            } else {
                Default::default()
            }
        })
        .collect();
    Ok(SpectralField::from_coeffs(fine, coeffs, true)?)
}

fn without_nyquist(f: &SpectralField) -> SpectralField {
    let g = *f.grid();
    f.map_coeffs(|idx, c| if g.is_nyquist(idx) { Default::default() } else { c })
}

/// Slope of `log10` of the largest coefficient per shell `|ξ|_∞ = k`.
pub fn spectral_decay(f: &SpectralField) -> f64 {
    let g = *f.grid();
    let shells = g.n() / 3;
    let mut top = vec![0.0f64; shells + 1];
    for (idx, c) in f.coeffs().iter().enumerate() {
        let k = g.axis_freq(idx, 0).unsigned_abs().max(g.axis_freq(idx, 1).unsigned_abs()) as usize;
        if (1..=shells).contains(&k) {
            top[k] = top[k].max(c.norm());
        }
    }
    let peak = top.iter().copied().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = top
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| **v > 1e-14 * peak)
        .map(|(k, v)| (k as f64, v.log10()))
        .collect();
    slope(&pts)
}

fn is_smooth(cfg: &RunConfig) -> bool {
    cfg.scenario.name == ScenarioName::TaylorGreen
}

/// Runs both studies; `levels` counts step sizes and grids (at least 3).
pub fn converge(cfg: &RunConfig, levels: usize) -> Result<ConvergeReport, RunError> {
    cfg.validate()?;
    if levels < 3 {
        return Err(constraint(format!("--levels = {levels} must be at least 3")));
    }
    let coarsest = cfg.grid.n >> (levels - 1);
    if coarsest < 16 {
        return Err(constraint(format!(
            "grid.n = {} is too small for {levels} levels; the coarsest grid would have n = {coarsest} < 16",
            cfg.grid.n
        )));
    }
    if cfg.time.t_end <= 0.0 {
        return Err(constraint("time.t_end must be > 0 for a convergence study".into()));
    }

    // base step: configured, or the CFL step of the initial state
    let dt0 = match cfg.time.dt {
        Some(dt) => dt,
        None => {
            let sim = Simulation::new(cfg)?;
            sim.system.cfl_dt(&sim.state, cfg.time.courant)?
        }
    };
    let steps0 = (cfg.time.t_end / dt0).ceil().max(1.0) as usize;
    let fixed = |steps: usize| {
        let mut c = cfg.clone();
        c.time.dt = Some(cfg.time.t_end / steps as f64);
        c.hooks.negative_density_at_step = None;
        c
    };

    let temporal_runs = (0..levels)
        .into_par_iter()
        .map(|k| solve(&fixed(steps0 << k)))
        .collect::<Result<Vec<_>, _>>()?;
    let t_err: Vec<f64> = temporal_runs.windows(2).map(|w| rel_diff(&w[0], &w[1])).collect();
    let temporal = (0..levels)
        .map(|k| TemporalLevel {
            dt: cfg.time.t_end / (steps0 << k) as f64,
            steps: steps0 << k,
            error: t_err.get(k).copied(),
            order: (k + 2 < levels && t_err[k + 1] > ERROR_FLOOR).then(|| (t_err[k] / t_err[k + 1]).log2()),
        })
        .collect::<Vec<_>>();

    // spatial runs share a step of half the base step
    let spatial_cfg = |k: usize| {
        let mut c = fixed(steps0 * 2);
        c.grid.n = cfg.grid.n >> (levels - 1 - k);
        if cfg.scenario.name == ScenarioName::VortexPatch {
            let w = cfg.scenario.width_cells * c.grid.n as f64 / cfg.grid.n as f64;
            c.scenario.width_cells = w;
            c.scenario.force_width |= w < 2.0;
        }
        c
    };
    let spatial_runs = (0..levels)
        .into_par_iter()
        .map(|k| solve(&spatial_cfg(k)))
        .collect::<Result<Vec<_>, _>>()?;
    let finest = &spatial_runs[levels - 1];
    let mut s_err = Vec::with_capacity(levels - 1);
    for run in &spatial_runs[..levels - 1] {
        let g = *run.0.grid();
        let reference = (restrict(&finest.0, g)?, restrict(&finest.1, g)?);
        s_err.push(rel_diff(&(without_nyquist(&run.0), without_nyquist(&run.1)), &reference));
    }
    let patch = cfg.scenario.name == ScenarioName::VortexPatch;
    let spatial = (0..levels)
        .map(|k| SpatialLevel {
            n: cfg.grid.n >> (levels - 1 - k),
            width_cells: patch.then(|| spatial_cfg(k).scenario.width_cells),
            error: s_err.get(k).copied(),
            ratio: (k + 2 < levels && s_err[k + 1] > ERROR_FLOOR).then(|| s_err[k] / s_err[k + 1]),
        })
        .collect::<Vec<_>>();

    let mut flags = Vec::new();
    for (name, errs) in [("temporal", &t_err), ("spatial", &s_err)] {
        for (k, w) in errs.windows(2).enumerate() {
            if w[1] > ERROR_FLOOR && w[1] > w[0] {
                flags.push(format!(
                    "{name} convergence is not monotone: error grows from {:.3e} to {:.3e} at level {}",
                    w[0],
                    w[1],
                    k + 1
                ));
            }
        }
    }
    if is_smooth(cfg) {
        for t in &temporal {
            if let Some(o) = t.order.filter(|o| *o < MIN_ORDER) {
                flags.push(format!("temporal order {o:.3} at dt = {:.3e} is below {MIN_ORDER}", t.dt));
            }
        }
        for s in &spatial {
            if let Some(r) = s.ratio.filter(|r| *r < MIN_SPATIAL_RATIO) {
                flags.push(format!("spatial error ratio {r:.2} at n = {} is below {MIN_SPATIAL_RATIO}", s.n));
            }
        }
    }
    if patch {
        for s in &spatial {
            if let Some(w) = s.width_cells.filter(|w| *w < 2.0) {
                flags.push(format!(
                    "patch edge is under-resolved at n = {}: {w:.2} cells, at least 2 are needed",
                    s.n
                ));
            }
        }
    }

    Ok(ConvergeReport {
        scenario: cfg.scenario.name.to_string(),
        levels,
        temporal,
        spatial,
        spectral_decay: spectral_decay(&finest.1),
        flags,
    })
}
