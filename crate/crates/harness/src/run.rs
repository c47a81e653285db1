//! Run orchestration: time loop, diagnostics, snapshots and the summary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stria_core::diag::{
    lifespan_bound, timeseries_sample, vorticity_striated_norm, DiagnosticsRecord, SampleOptions, CSV_COLUMNS,
    DEGENERACY_FLOOR,
};
use stria_core::dynamics::grad_velocity;
use stria_core::ladder::lebesgue_norm_samples;
use stria_core::pressure::energy_audit;
use stria_core::{DyadicLadder, EulerSystem, FlowMarkers, SpectralField, StratifiedState};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::scenario::{self, PatchGeometry, ScenarioError};
use crate::snapshot::{self, SnapshotError, FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("scenario: {0}")]
    Scenario(#[from] ScenarioError),

    #[error(transparent)]
    Snapshot(#[from] SnapshotError),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] stria_core::Error),

    #[error("invariant violated at step {step} (t = {t:.6e}): {message}")]
    Invariant { step: usize, t: f64, message: String },
}

impl RunError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(ConfigError::Io { .. }) => 3,
            RunError::Config(_) => 2,
            RunError::Scenario(ScenarioError::Core(_)) => 1,
            RunError::Scenario(_) => 2,
            RunError::Snapshot(SnapshotError::Core(_)) => 1,
            RunError::Snapshot(_) | RunError::Io { .. } => 3,
            RunError::Core(_) | RunError::Invariant { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `sup |∇u|` with the pointwise Frobenius norm, which dominates the
/// operator norm driving the decay of `I(X)`.
pub fn grad_sup(state: &StratifiedState) -> f64 {
    let du = grad_velocity(&state.omega);
    let phys: Vec<Vec<f64>> = du
        .iter()
        .flatten()
        .map(|d| d.to_physical_complex().into_iter().map(|c| c.re).collect())
        .collect();
    let frob: Vec<f64> = (0..phys[0].len())
        .map(|i| phys.iter().map(|p| p[i] * p[i]).sum::<f64>().sqrt())
        .collect();
    lebesgue_norm_samples(&frob, f64::INFINITY)
}

/// A scenario being integrated, with the running quantities that
/// diagnostics need.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub cfg: RunConfig,
    pub system: EulerSystem,
    pub ladder: DyadicLadder,
    pub state: StratifiedState,
    pub markers: FlowMarkers,
    pub patch: Option<PatchGeometry>,
    pub step: usize,
    /// Trapezoidal `∫ sup|∇u| dt`.
    pub u_integral: f64,
    pub pressure_iterations: usize,
    grad_sup: f64,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self, RunError> {
        cfg.validate()?;
        let sc = scenario::build(cfg)?;
        Self::from_state(cfg, sc.state, sc.markers, sc.patch, 0)
    }

    /// Starts from an existing state, e.g. one read back from a snapshot.
    pub fn from_state(
        cfg: &RunConfig,
        mut state: StratifiedState,
        markers: FlowMarkers,
        patch: Option<PatchGeometry>,
        step: usize,
    ) -> Result<Self, RunError> {
        let system = EulerSystem::new(cfg.bounds(), cfg.elliptic_config(), cfg.time.dt_max)?;
        let ladder = DyadicLadder::build(*state.grid())?;
        let sol = system.pressure(&state.rho, &state.velocity(), state.pi_cache.as_ref())?;
        state.pi_cache = Some(sol.pi);
        let grad_sup = grad_sup(&state);
        Ok(Self {
            cfg: cfg.clone(),
            system,
            ladder,
            state,
            markers,
            patch,
            step,
            u_integral: 0.0,
            pressure_iterations: sol.iterations,
            grad_sup,
        })
    }

    pub fn finished(&self) -> bool {
        self.state.t >= self.cfg.time.t_end * (1.0 - 1e-12)
    }

    /// Fixed step when configured, CFL step otherwise; never overshoots `t_end`.
    pub fn next_dt(&self) -> Result<f64, RunError> {
        let dt = match self.cfg.time.dt {
            Some(dt) => dt,
            None => self.system.cfl_dt(&self.state, self.cfg.time.courant)?,
        };
        let left = self.cfg.time.t_end - self.state.t;
        // absorb a sliver of remaining time instead of taking a tiny last step
        Ok(if left < dt * (1.0 + 1e-9) { left } else { dt })
    }

    pub fn advance(&mut self, dt: f64) -> Result<(), RunError> {
        let (next, moved) = self.system.step(&self.state, Some(&self.markers), dt)?;
        self.state = next;
        self.markers = moved.expect("markers were supplied");
        self.step += 1;
        let g = grad_sup(&self.state);
        self.u_integral += 0.5 * dt * (self.grad_sup + g);
        self.grad_sup = g;
        Ok(())
    }

    pub fn sample_options(&self) -> SampleOptions {
        SampleOptions {
            p: self.cfg.diagnostics.p,
            q: self.cfg.diagnostics.q,
            u_integral: self.u_integral,
            pressure_iterations: self.pressure_iterations,
            margin: self.cfg.diagnostics.margin,
        }
    }

    pub fn record(&self) -> Result<DiagnosticsRecord, RunError> {
        Ok(timeseries_sample(
            &self.ladder,
            &self.state,
            &self.sample_options(),
            (self.markers.len() >= 3).then_some(&self.markers),
        )?)
    }

    /// Lifespan bound of the current state taken as initial data.
    pub fn lifespan(&self, rec: &DiagnosticsRecord) -> Result<f64, RunError> {
        let d = &self.cfg.diagnostics;
        let s0 = vorticity_striated_norm(&self.ladder, &self.state)?;
        let inputs = rec.lifespan_inputs(s0, self.cfg.elliptic.delta, d.lifespan_c, d.p, d.q);
        Ok(lifespan_bound(&inputs)?)
    }

    /// Integrates to `t_end`, calling `observe` after every step.
    pub fn run_to_end(&mut self, mut observe: impl FnMut(&Self) -> Result<(), RunError>) -> Result<(), RunError> {
        while !self.finished() {
            let dt = self.next_dt()?;
            self.advance(dt)?;
            observe(self)?;
        }
        Ok(())
    }

    /// Writes a negative dip into ρ (failure-path testing).
    fn inject_negative_density(&mut self) {
        let g = *self.state.grid();
        let l = g.length();
        let rho = &self.state.rho;
        let peak = 2.0 * rho.to_physical_complex().iter().map(|c| c.re).fold(0.0, f64::max);
        let (cx, cy) = (0.25 * l, 0.75 * l);
        let dip = SpectralField::from_fn2(g, |x, y| {
            let r2 = (x - cx).powi(2) + (y - cy).powi(2);
            -peak * (-r2 / (0.1 * l).powi(2)).exp()
        });
        self.state.rho = rho + &dip;
        log::warn!("hook: injected a negative density dip before step {}", self.step);
    }
}

/// Running checks of the hypotheses a run must keep satisfying.
#[derive(Clone, Debug, Default, Serialize)]
pub struct InvariantWatch {
    pub initial_rho_min: f64,
    pub initial_rho_max: f64,
    pub initial_div_x: f64,
    pub initial_i_x: f64,
    pub max_rho_overshoot: f64,
    pub max_div_x_drift: f64,
    pub min_nondegeneracy_margin: f64,
    pub energy_violations: usize,
    pub max_striation_ratio: f64,
    pub records: usize,
}

impl InvariantWatch {
    fn new(first: &DiagnosticsRecord) -> Self {
        Self {
            initial_rho_min: first.rho_min,
            initial_rho_max: first.rho_max,
            initial_div_x: first.div_x_linf,
            initial_i_x: first.i_x,
            min_nondegeneracy_margin: f64::INFINITY,
            max_striation_ratio: 1.0,
            ..Default::default()
        }
    }

    /// Updates the running extremes; returns the first hard violation.
    fn observe(&mut self, sim: &Simulation, rec: &DiagnosticsRecord, s_floor: f64) -> Result<(), String> {
        self.records += 1;
        if !rec.is_finite() {
            return Err(format!("non-finite diagnostics at t = {}", rec.t));
        }
        let over = (rec.rho_max - self.initial_rho_max).max(self.initial_rho_min - rec.rho_min).max(0.0);
        self.max_rho_overshoot = self.max_rho_overshoot.max(over);
        // relative drift, or absolute when the family starts divergence-free
        let scale = if self.initial_div_x > 1e-10 { self.initial_div_x } else { 1.0 };
        let drift = (rec.div_x_linf - self.initial_div_x).abs() / scale;
        self.max_div_x_drift = self.max_div_x_drift.max(drift);
        if self.initial_i_x > 0.0 && rec.i_x > 0.0 {
            let margin = rec.i_x.ln() - (self.initial_i_x.ln() - 1.5 * rec.u_integral);
            self.min_nondegeneracy_margin = self.min_nondegeneracy_margin.min(margin);
        }
        self.max_striation_ratio = self.max_striation_ratio.max(rec.s / s_floor);
        let pi = sim.state.pi_cache.as_ref().expect("simulation keeps a pressure");
        if energy_audit(&sim.state.velocity(), pi, &sim.cfg.bounds()).violated {
            self.energy_violations += 1;
            return Err("Lax-Milgram energy bound a_*|grad Pi| <= |u.grad u| violated".into());
        }
        let (lo, hi) = (sim.cfg.physics.rho_star, sim.cfg.physics.rho_star_upper);
        let tol = 1e-3 * (hi - lo);
        if rec.rho_min < lo - tol || rec.rho_max > hi + tol {
            return Err(format!(
                "density range [{:.6e}, {:.6e}] left [rho_star, rho_star_upper] = [{lo}, {hi}]",
                rec.rho_min, rec.rho_max
            ));
        }
        if rec.i_x < DEGENERACY_FLOOR {
            return Err(format!("family degenerated: I(X) = {:.3e}", rec.i_x));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub format_version: u32,
    pub status: String,
    pub exit_code: i32,
    pub message: Option<String>,
    pub scenario: String,
    pub config_hash: String,
    pub steps: usize,
    pub t_final: f64,
    pub lifespan_bound: Option<f64>,
    pub striated_norm_0: Option<f64>,
    pub u_integral: f64,
    pub invariants: Option<InvariantWatch>,
    pub last_good_snapshot: Option<String>,
}

/// Column meanings written next to the CSV.
pub const COLUMN_LEGEND: [(&str, &str); 25] = [
    ("t", "time"),
    ("L", "|u|_{L^p} + max(|omega|_{L^q}, |omega|_{L^inf})"),
    ("A", "sup |grad rho|"),
    ("Gamma", "max over the family of |X|_{C^eps} + |div X|_{C^eps}"),
    ("S", "max over the family of |X.grad omega|_{C^{eps-1}}"),
    ("S_div", "max over the family of |div(omega X)|_{C^{eps-1}}"),
    ("R", "max over the family and i of |X.grad d_i rho|_{C^{eps-1}}"),
    ("Theta", "L max(1, log(e + S/L))"),
    ("U", "integral of sup |grad u| (Frobenius) over time"),
    ("I_X", "grid infimum of max over the family of |X|"),
    ("rho_min", "minimum density sample"),
    ("rho_max", "maximum density sample"),
    ("omega_l2", "|omega|_{L^2}, normalized measure"),
    ("omega_l4", "|omega|_{L^4}"),
    ("omega_linf", "|omega|_{L^inf}"),
    ("div_x_linf", "max over the family of |div X|_{L^inf}"),
    ("cz_ratio_2", "|grad u|_{L^2} (q-1) / (q^2 |omega|_{L^2})"),
    ("cz_ratio_4", "same with q = 4"),
    ("cz_ratio_8", "same with q = 8"),
    ("lipschitz_lhs", "max_ij |d_j u^i|_{L^inf}"),
    ("lipschitz_rhs", "log-Lipschitz shape with unit constant"),
    ("lipschitz_ratio", "lipschitz_lhs / lipschitz_rhs"),
    ("pressure_residual", "relative residual of the pressure equation"),
    ("pressure_iterations", "elliptic iterations of the last solve"),
    ("patch_interior_holder", "C^eps quotient of omega inside the marker curve (empty if unavailable)"),
];

/// Where `run` writes; the caller owns the directory exclusively.
pub struct RunOutputs {
    pub root: PathBuf,
    csv: fs::File,
}

impl RunOutputs {
    pub fn create(root: &Path, cfg: &RunConfig) -> Result<Self, RunError> {
        fs::create_dir_all(root.join("snapshots")).map_err(io_err(root))?;
        let cfg_path = root.join("config.toml");
        let echoed = format!("# format_version = {FORMAT_VERSION}\n# config_hash = {}\n{}", cfg.hash(), cfg.to_toml());
        fs::write(&cfg_path, echoed).map_err(io_err(&cfg_path))?;
        let legend_path = root.join("columns.txt");
        debug_assert_eq!(COLUMN_LEGEND.map(|c| c.0), CSV_COLUMNS);
        let legend: String = COLUMN_LEGEND.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect();
        fs::write(&legend_path, legend).map_err(io_err(&legend_path))?;
        let csv_path = root.join("diagnostics.csv");
        let mut csv = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
        writeln!(csv, "{}", DiagnosticsRecord::csv_header()).map_err(io_err(&csv_path))?;
        Ok(Self {
            root: root.to_path_buf(),
            csv,
        })
    }

    fn append(&mut self, rec: &DiagnosticsRecord) -> Result<(), RunError> {
        let path = self.root.join("diagnostics.csv");
        writeln!(self.csv, "{}", rec.csv_row()).map_err(io_err(&path))
    }

    fn snapshot(&self, sim: &Simulation, name: &str) -> Result<PathBuf, RunError> {
        let dir = self.root.join("snapshots").join(name);
        let mut snap = snapshot::capture(&sim.state, &sim.markers, sim.step, &sim.cfg.hash());
        snap.meta.u_integral = sim.u_integral;
        snapshot::write_snapshot(&snap, &dir)?;
        Ok(dir)
    }

    fn summary(&self, s: &RunSummary) -> Result<(), RunError> {
        let path = self.root.join("summary.json");
        let text = serde_json::to_string_pretty(s).expect("summary serializes");
        fs::write(&path, text).map_err(io_err(&path))
    }
}

/// Full `run` command: integrates, records, snapshots, and always leaves a
/// summary. An integration failure keeps the last good state on disk.
pub fn run(cfg: &RunConfig, out: &Path, resume: Option<&Path>) -> Result<RunSummary, RunError> {
    cfg.validate()?;
    let mut outputs = RunOutputs::create(out, cfg)?;
    let mut sim = match resume {
        None => Simulation::new(cfg)?,
        Some(dir) => {
            let r = snapshot::resume(dir, &cfg.hash())?;
            let patch = scenario::build(cfg)?.patch;
            let mut sim = Simulation::from_state(cfg, r.state, r.markers, patch, r.step)?;
            sim.u_integral = r.u_integral;
            sim
        }
    };
    let first = sim.record()?;
    let s0 = vorticity_striated_norm(&sim.ladder, &sim.state)?;
    let lifespan = sim.lifespan(&first).ok();
    // the striation ratio is measured against S(0) or a discretization floor
    let s_floor = first.s.max(1e-12 * first.l.max(1.0));
    let mut watch = InvariantWatch::new(&first);
    let mut summary = RunSummary {
        format_version: FORMAT_VERSION,
        status: "running".into(),
        exit_code: 0,
        message: None,
        scenario: cfg.scenario.name.to_string(),
        config_hash: cfg.hash(),
        steps: 0,
        t_final: sim.state.t,
        lifespan_bound: lifespan,
        striated_norm_0: Some(s0),
        u_integral: 0.0,
        invariants: None,
        last_good_snapshot: None,
    };
    let start = sim.step;
    let outcome = (|| -> Result<(), RunError> {
        check(&mut watch, &sim, &first, s_floor)?;
        outputs.append(&first)?;
        outputs.snapshot(&sim, &format!("step_{:06}", sim.step))?;
        let rs = cfg.outputs.record_stride.max(1);
        let ss = cfg.outputs.snapshot_stride.max(1);
        let mut last_good = sim.clone();
        while !sim.finished() {
            if cfg.hooks.negative_density_at_step == Some(sim.step) {
                sim.inject_negative_density();
            }
            let dt = sim.next_dt()?;
            if let Err(e) = sim.advance(dt) {
                let dir = outputs.snapshot(&last_good, "last_good")?;
                summary.last_good_snapshot = Some(dir.display().to_string());
                return Err(e);
            }
            let done = sim.finished();
            if (sim.step - start) % rs == 0 || done {
                let rec = sim.record()?;
                outputs.append(&rec)?;
                if let Err(e) = check(&mut watch, &sim, &rec, s_floor) {
                    let dir = outputs.snapshot(&last_good, "last_good")?;
                    summary.last_good_snapshot = Some(dir.display().to_string());
                    return Err(e);
                }
            }
            if (sim.step - start) % ss == 0 || done {
                outputs.snapshot(&sim, &format!("step_{:06}", sim.step))?;
            }
            last_good = sim.clone();
        }
        Ok(())
    })();
    summary.steps = sim.step - start;
    summary.t_final = sim.state.t;
    summary.u_integral = sim.u_integral;
    summary.invariants = Some(watch);
    match &outcome {
        Ok(()) => summary.status = "completed".into(),
        Err(e) => {
            summary.status = "failed".into();
            summary.exit_code = e.exit_code();
            summary.message = Some(e.to_string());
        }
    }
    outputs.summary(&summary)?;
    outcome.map(|()| summary)
}

fn check(watch: &mut InvariantWatch, sim: &Simulation, rec: &DiagnosticsRecord, s_floor: f64) -> Result<(), RunError> {
    watch.observe(sim, rec, s_floor).map_err(|message| RunError::Invariant {
        step: sim.step,
        t: sim.state.t,
        message,
    })
}

/// Recomputes the diagnostics record of a stored snapshot.
pub fn diagnose(dir: &Path, cfg: Option<&RunConfig>) -> Result<DiagnosticsRecord, RunError> {
    let snap = snapshot::read_snapshot(dir)?;
    let (state, markers) = snapshot::restore(&snap)?;
    let ladder = DyadicLadder::build(*state.grid())?;
    let mut opts = SampleOptions {
        u_integral: snap.meta.u_integral,
        ..SampleOptions::default()
    };
    if let Some(c) = cfg {
        opts.p = c.diagnostics.p;
        opts.q = c.diagnostics.q;
        opts.margin = c.diagnostics.margin;
    }
    let m = (markers.len() >= 3).then_some(&markers);
    Ok(timeseries_sample(&ladder, &state, &opts, m)?)
}
