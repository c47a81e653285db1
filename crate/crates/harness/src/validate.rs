//! The invariant suite behind `stria validate`.
//!
//! Each check covers one invariant of one module and runs at desk scale
//! (n ≤ 64). Checks run concurrently and report a measured value next to
//! the threshold they were held to.

use std::f64::consts::{E, PI};
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use stria_core::diag::{lifespan_bound, striation_along, LifespanInputs};
use stria_core::dynamics::momentum_rhs;
use stria_core::ladder::{bernstein_audit, lebesgue_norm};
use stria_core::para::{derive_along, div_along, paraproduct, remainder};
use stria_core::pressure::{
    apply_operator, energy_audit, inverse_density, pressure_residual, solve_pressure,
};
use stria_core::random::{band_limited_field, smooth_field};
use stria_core::{
    biot_savart, curl, DensityBounds, DyadicLadder, EllipticConfig, EulerSystem, FlowMarkers, GridSpec, NormRequest,
    SpectralField, StratifiedState, VectorField, VectorFieldFamily,
};

use crate::config::{RunConfig, ScenarioName};
use crate::converge::prolong;
use crate::run::{self, RunError, Simulation};
use crate::snapshot;

/// Deliberate defects used to show that the suite can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// Flip the sign of the baroclinic source.
    BaroclinicSign,
    /// Scale one Littlewood-Paley mask so the blocks no longer sum to one.
    LadderPartition,
}

impl std::str::FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Mutation::None),
            "baroclinic-sign" => Ok(Mutation::BaroclinicSign),
            "ladder-partition" => Ok(Mutation::LadderPartition),
            other => Err(format!(
                "unknown mutation {other:?}; expected none, baroclinic-sign or ladder-partition"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    /// Measured value and the threshold it was compared against.
    pub detail: String,
}

fn within(measured: f64, limit: f64) -> Outcome {
    Outcome {
        passed: measured <= limit,
        detail: format!("{measured:.3e} <= {limit:.1e}"),
    }
}

fn at_least(measured: f64, limit: f64) -> Outcome {
    Outcome {
        passed: measured >= limit,
        detail: format!("{measured:.3e} >= {limit:.1e}"),
    }
}

type CheckResult = Result<Outcome, String>;

/// One row of the suite.
pub struct Check {
    pub id: &'static str,
    pub module: &'static str,
    pub invariant: &'static str,
    run: fn(Mutation) -> CheckResult,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub id: &'static str,
    pub module: &'static str,
    pub invariant: &'static str,
    pub outcome: Outcome,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub rows: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.outcome.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.rows.iter().filter(|r| !r.outcome.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.rows.iter().map(|r| r.id.len()).max().unwrap_or(0);
        for r in &self.rows {
            let status = if r.outcome.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{status}  {:<w$}  {:<17} {}", r.id, r.module, r.outcome.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} passed, {} failed", self.rows.len(), self.rows.len() - failed, failed)
    }
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grid(n: usize) -> GridSpec {
    GridSpec::square(n).expect("power-of-two grid")
}

/// `max |a − b|` over coefficients relative to `max |b|`.
fn rel_coeff(a: &SpectralField, b: &SpectralField) -> f64 {
    (a - b).max_coeff() / b.max_coeff().max(f64::MIN_POSITIVE)
}

fn ladder(g: GridSpec, m: Mutation) -> Result<DyadicLadder, String> {
    let mut l = DyadicLadder::build(g).map_err(err)?;
    if m == Mutation::LadderPartition {
        l.perturb_block(1, 1.01);
    }
    Ok(l)
}

fn system(bounds: DensityBounds, m: Mutation) -> Result<EulerSystem, String> {
    let mut s = EulerSystem::new(bounds, EllipticConfig::default(), 1.0).map_err(err)?;
    if m == Mutation::BaroclinicSign {
        s.baroclinic_sign = -1.0;
    }
    Ok(s)
}

/// Positive density `1 + amp·r/max|r|` from a smooth random field `r`.
fn random_density(g: GridSpec, amp: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let r = smooth_field(g, 4.0, rng).without_mean().dealias();
    let m = lebesgue_norm(&r, f64::INFINITY).max(f64::MIN_POSITIVE);
    &SpectralField::constant(g, 1.0) + &r.scale(amp / m)
}

fn unit_family(g: GridSpec, eps: f64) -> VectorFieldFamily {
    VectorFieldFamily::new(
        vec![
            VectorField::constant(g, &[1.0, 0.0]).expect("planar"),
            VectorField::constant(g, &[0.0, 1.0]).expect("planar"),
        ],
        eps,
    )
    .expect("valid family")
}

/// A smooth family with nonzero divergence: `X = (1 + ½ sin x, ½ cos y)`.
fn wavy_family(g: GridSpec) -> VectorFieldFamily {
    let x = VectorField::new(vec![
        SpectralField::from_fn2(g, |x, _| 1.0 + 0.5 * x.sin()),
        SpectralField::from_fn2(g, |_, y| 0.5 * y.cos()),
    ])
    .expect("planar");
    VectorFieldFamily::new(vec![x], 0.5).expect("valid family")
}

// grid_spectral

fn parseval(_: Mutation) -> CheckResult {
    let g = grid(64);
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let f = band_limited_field(g, &mut r);
        let samples = f.to_physical().map_err(err)?;
        let direct = samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64;
        worst = worst.max((direct - f.mean_square()).abs() / direct);
    }
    Ok(within(worst, 1e-12))
}

fn derivative_dealias(_: Mutation) -> CheckResult {
    let g = grid(64);
    let f = band_limited_field(g, &mut rng(2));
    let raw = SpectralField::from_fn2(g, |x, y| (x.sin() + 2.0).ln() * (3.0 * y).cos());
    let mut worst: f64 = 0.0;
    for h in [&f, &raw] {
        for axis in 0..2 {
            let a = h.derivative(axis).map_err(err)?.dealias();
            let b = h.dealias().derivative(axis).map_err(err)?;
            worst = worst.max((&a - &b).max_coeff());
        }
    }
    Ok(Outcome {
        passed: worst == 0.0,
        detail: format!("max difference {worst:.1e} (exact)"),
    })
}

fn laplacian_inverse(_: Mutation) -> CheckResult {
    let g = grid(64);
    let f = band_limited_field(g, &mut rng(3)).without_mean();
    Ok(within(rel_coeff(&f.neg_laplacian().inv_neg_laplacian(), &f), 1e-13))
}

fn linearity(_: Mutation) -> CheckResult {
    let g = grid(64);
    let mut r = rng(4);
    let (f, h) = (band_limited_field(g, &mut r), band_limited_field(g, &mut r));
    let (a, b) = (0.7, -1.3);
    let combo = &f.scale(a) + &h.scale(b);
    let ops: [&dyn Fn(&SpectralField) -> SpectralField; 4] = [
        &|u| u.derivative(0).expect("axis"),
        &|u| u.dealias(),
        &|u| u.inv_neg_laplacian(),
        &|u| u.neg_laplacian(),
    ];
    let worst = ops
        .iter()
        .map(|op| rel_coeff(&op(&combo), &(&op(&f).scale(a) + &op(&h).scale(b))))
        .fold(0.0, f64::max);
    Ok(within(worst, 1e-13))
}

// littlewood_paley

fn reconstruction(m: Mutation) -> CheckResult {
    let mut worst: f64 = 0.0;
    for n in [32, 64] {
        let g = grid(n);
        let l = ladder(g, m)?;
        let u = band_limited_field(g, &mut rng(5 + n as u64));
        let mut sum = SpectralField::zeros(g);
        for j in l.indices() {
            sum = &sum + &l.block(&u, j).map_err(err)?;
        }
        worst = worst.max(rel_coeff(&sum, &u));
    }
    Ok(within(worst, 1e-14))
}

fn block_orthogonality(m: Mutation) -> CheckResult {
    let g = grid(64);
    let l = ladder(g, m)?;
    let u = band_limited_field(g, &mut rng(6));
    let mut worst: f64 = 0.0;
    for j in l.indices() {
        for k in l.indices().filter(|k| (k - j).abs() >= 2) {
            let b = l.block(&l.block(&u, k).map_err(err)?, j).map_err(err)?;
            worst = worst.max(b.max_coeff());
        }
    }
    Ok(Outcome {
        passed: worst == 0.0,
        detail: format!("max |Δ_jΔ_k u| {worst:.1e} (exact)"),
    })
}

fn norm_monotonicity(m: Mutation) -> CheckResult {
    let g = grid(64);
    let l = ladder(g, m)?;
    let mut r = rng(7);
    let mut bad = 0;
    for _ in 0..10 {
        // no j = −1 content
        let u = l.block(&band_limited_field(g, &mut r), -1).map(|low| &band_limited_field(g, &mut r) - &low);
        let u = u.map_err(err)?;
        let low = l.block(&u, -1).map_err(err)?;
        let u = &u - &low;
        let norm = |s: f64, rr: f64| l.besov_norm(&u, NormRequest::new(s, f64::INFINITY, rr).expect("valid"));
        if norm(0.2, f64::INFINITY).map_err(err)? > norm(0.6, f64::INFINITY).map_err(err)? * (1.0 + 1e-14) {
            bad += 1;
        }
        if norm(0.3, 2.0).map_err(err)? > norm(0.3, 1.0).map_err(err)? * (1.0 + 1e-14) {
            bad += 1;
        }
    }
    Ok(Outcome {
        passed: bad == 0,
        detail: format!("{bad} order violations in 20 comparisons"),
    })
}

fn norm_scaling(m: Mutation) -> CheckResult {
    let g = grid(64);
    let l = ladder(g, m)?;
    let u = band_limited_field(g, &mut rng(8));
    let req = NormRequest::new(0.5, 4.0, 2.0).map_err(err)?;
    let base = l.besov_norm(&u, req).map_err(err)?;
    let scaled = l.besov_norm(&u.scale(-2.5), req).map_err(err)?;
    Ok(within((scaled - 2.5 * base).abs() / (2.5 * base), 1e-14))
}

fn bernstein(m: Mutation) -> CheckResult {
    let l = ladder(grid(64), m)?;
    let rep = bernstein_audit(&l, 20, 9).map_err(err)?;
    Ok(Outcome {
        passed: !rep.flagged,
        detail: format!("envelope {:.3}, log2 growth slope {:.3} <= 0.25", rep.envelope(), rep.growth_slope),
    })
}

// paracalculus

fn bony(m: Mutation) -> CheckResult {
    let g = grid(64);
    let l = ladder(g, m)?;
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (u, v) = (band_limited_field(g, &mut r), band_limited_field(g, &mut r));
        let sum = &(&paraproduct(&l, &u, &v).map_err(err)? + &paraproduct(&l, &v, &u).map_err(err)?)
            + &remainder(&l, &u, &v).map_err(err)?;
        worst = worst.max(rel_coeff(&sum, &u.pointwise_product(&v).map_err(err)?));
    }
    Ok(within(worst, 1e-12))
}

fn bilinearity(m: Mutation) -> CheckResult {
    let g = grid(64);
    let l = ladder(g, m)?;
    let mut r = rng(11);
    let (u1, u2, v) = (band_limited_field(g, &mut r), band_limited_field(g, &mut r), band_limited_field(g, &mut r));
    let (a, b) = (1.5, -0.25);
    let mix = &u1.scale(a) + &u2.scale(b);
    let mut worst: f64 = 0.0;
    for op in [paraproduct, remainder] {
        let lhs = op(&l, &mix, &v).map_err(err)?;
        let rhs = &op(&l, &u1, &v).map_err(err)?.scale(a) + &op(&l, &u2, &v).map_err(err)?.scale(b);
        worst = worst.max(rel_coeff(&lhs, &rhs));
        let lhs = op(&l, &v, &mix).map_err(err)?;
        let rhs = &op(&l, &v, &u1).map_err(err)?.scale(a) + &op(&l, &v, &u2).map_err(err)?.scale(b);
        worst = worst.max(rel_coeff(&lhs, &rhs));
    }
    Ok(within(worst, 1e-13))
}

fn div_identity(_: Mutation) -> CheckResult {
    let g = grid(64);
    let mut r = rng(12);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let f = band_limited_field(g, &mut r);
        let x = VectorField::new(vec![band_limited_field(g, &mut r), band_limited_field(g, &mut r)]).map_err(err)?;
        let lhs = div_along(&f, &x).map_err(err)?;
        let rhs = &derive_along(&f, &x).map_err(err)? + &f.pointwise_product(&x.divergence()).map_err(err)?;
        worst = worst.max(rel_coeff(&lhs, &rhs));
    }
    Ok(within(worst, 1e-12))
}

fn paraproduct_estimate(m: Mutation) -> CheckResult {
    let g = grid(64);
    let l = ladder(g, m)?;
    let mut r = rng(13);
    let s = 0.5;
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let (u, v) = (band_limited_field(g, &mut r), band_limited_field(g, &mut r));
        let t = l.holder_norm(&paraproduct(&l, &u, &v).map_err(err)?, s).map_err(err)?;
        ratios.push(t / (lebesgue_norm(&u, f64::INFINITY) * l.holder_norm(&v, s).map_err(err)?));
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    // a sample-independent constant shows up as a tight spread
    Ok(Outcome {
        passed: max.is_finite() && max / min <= 10.0,
        detail: format!("ratio in [{min:.3}, {max:.3}], spread {:.2} <= 10", max / min),
    })
}

// euler_dynamics

/// A random band-limited state with density in `[0.7, 1.3]`.
fn random_state(g: GridSpec, seed: u64) -> StratifiedState {
    let mut r = rng(seed);
    let rho = random_density(g, 0.3, &mut r);
    let omega = smooth_field(g, 6.0, &mut r).dealias();
    StratifiedState::new(rho, omega, unit_family(g, 0.5)).expect("planar state")
}

fn curl_consistency(m: Mutation) -> CheckResult {
    let g = grid(32);
    let sys = system(DensityBounds::new(0.5, 2.0).map_err(err)?, m)?;
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let s = random_state(g, 100 + seed);
        let rates = sys.rhs(&s).map_err(err)?;
        let mom = momentum_rhs(&s.rho, &rates.velocity, &rates.pi).map_err(err)?;
        worst = worst.max((&curl(&mom) - &rates.omega).l2_norm() / rates.omega.l2_norm());
    }
    Ok(within(worst, 1e-10))
}

fn velocity_divergence(_: Mutation) -> CheckResult {
    let g = grid(64);
    let omega = band_limited_field(g, &mut rng(14));
    let u = biot_savart(&omega);
    Ok(within(lebesgue_norm(&u.divergence(), f64::INFINITY), 1e-13))
}

/// Taylor-Green cell with density `1 + 0.2 cos x` and the wavy family.
fn smooth_run(n: usize, t_end: f64) -> Result<Simulation, String> {
    let mut cfg = RunConfig::new(ScenarioName::TaylorGreen);
    cfg.grid.n = n;
    cfg.time.t_end = t_end;
    cfg.scenario.amp = 0.2;
    let g = cfg.grid_spec();
    let rho = SpectralField::from_fn2(g, |x, _| 1.0 + 0.2 * x.cos());
    let omega = SpectralField::from_fn2(g, |x, y| 2.0 * x.sin() * y.sin());
    let state = StratifiedState::new(rho, omega, wavy_family(g)).map_err(err)?;
    let markers = FlowMarkers::new(Vec::new());
    Simulation::from_state(&cfg, state, markers, None, 0).map_err(err)
}

/// Records of a smooth unit-time run, shared by several checks.
fn smooth_records() -> Result<Vec<stria_core::diag::DiagnosticsRecord>, String> {
    let mut sim = smooth_run(32, 1.0)?;
    let mut recs = vec![sim.record().map_err(err)?];
    sim.run_to_end(|s| {
        recs.push(s.record()?);
        Ok(())
    })
    .map_err(err)?;
    Ok(recs)
}

fn maximum_principle(_: Mutation) -> CheckResult {
    let recs = smooth_records()?;
    let (lo, hi) = (recs[0].rho_min, recs[0].rho_max);
    let over = recs
        .iter()
        .map(|r| (r.rho_max - hi).max(lo - r.rho_min))
        .fold(0.0, f64::max);
    Ok(within(over / (hi - lo), 1e-3))
}

fn constant_density_norms(_: Mutation) -> CheckResult {
    let g = grid(32);
    let mut r = rng(15);
    // unit amplitude and a few modes keep the unit-time run resolved
    let omega = smooth_field(g, 1.5, &mut r).without_mean().dealias();
    let omega = omega.scale(1.0 / lebesgue_norm(&omega, f64::INFINITY));
    let state = StratifiedState::new(SpectralField::constant(g, 1.0), omega, unit_family(g, 0.5)).map_err(err)?;
    let mut cfg = RunConfig::new(ScenarioName::TaylorGreen);
    cfg.grid.n = 32;
    let mut sim = Simulation::from_state(&cfg, state, FlowMarkers::new(Vec::new()), None, 0).map_err(err)?;
    // the sup is read off a 4x zero-padded grid, so a peak moving between
    // nodes does not register as drift
    let fine = grid(128);
    let norm = |w: &SpectralField, q: f64| -> Result<f64, RunError> {
        if q.is_finite() {
            Ok(lebesgue_norm(w, q))
        } else {
            Ok(lebesgue_norm(&prolong(w, fine)?, q))
        }
    };
    let qs = [2.0, 4.0, f64::INFINITY];
    let w0 = [norm(&sim.state.omega, qs[0]).map_err(err)?, norm(&sim.state.omega, qs[1]).map_err(err)?, norm(&sim.state.omega, qs[2]).map_err(err)?];
    let mut worst = [0.0f64; 3];
    sim.run_to_end(|s| {
        for k in 0..3 {
            worst[k] = worst[k].max((norm(&s.state.omega, qs[k])? / w0[k] - 1.0).abs());
        }
        Ok(())
    })
    .map_err(err)?;
    let max = worst.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        passed: max <= 1e-3,
        detail: format!("drift q=2 {:.1e}, q=4 {:.1e}, q=inf {:.1e} <= 1e-3", worst[0], worst[1], worst[2]),
    })
}

fn div_x_transport(_: Mutation) -> CheckResult {
    let recs = smooth_records()?;
    let d0 = recs[0].div_x_linf;
    let drift = recs.iter().map(|r| (r.div_x_linf / d0 - 1.0).abs()).fold(0.0, f64::max);
    Ok(within(drift, 5e-3))
}

/// State of a Taylor-Green run with density `1 + 0.1 cos x` after `steps`
/// fixed steps to `t = 0.5`, as `(ρ, ω)`.
fn tg_solution(n: usize, steps: usize) -> Result<(SpectralField, SpectralField), String> {
    let mut cfg = RunConfig::new(ScenarioName::TaylorGreen);
    cfg.grid.n = n;
    cfg.scenario.amp = 0.1;
    cfg.time.t_end = 0.5;
    cfg.scenario.markers = 0;
    let mut sim = Simulation::new(&cfg).map_err(err)?;
    let dt = 0.5 / steps as f64;
    for _ in 0..steps {
        sim.advance(dt).map_err(err)?;
    }
    Ok((sim.state.rho, sim.state.omega))
}

/// Richardson order from three step counts `m, 2m, 4m`.
pub fn richardson_order(a: &(SpectralField, SpectralField), b: &(SpectralField, SpectralField), c: &(SpectralField, SpectralField)) -> f64 {
    let diff = |x: &(SpectralField, SpectralField), y: &(SpectralField, SpectralField)| {
        ((&x.0 - &y.0).mean_square() + (&x.1 - &y.1).mean_square()).sqrt()
    };
    (diff(a, b) / diff(b, c)).log2()
}

fn temporal_order(_: Mutation) -> CheckResult {
    let runs = [5, 10, 20]
        .into_par_iter()
        .map(|m| tg_solution(32, m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(at_least(richardson_order(&runs[0], &runs[1], &runs[2]), 3.5))
}

// pressure_solver

fn random_pressure_inputs(g: GridSpec, seed: u64) -> (SpectralField, VectorField, DensityBounds) {
    let mut r = rng(seed);
    let rho = random_density(g, 0.5, &mut r);
    let u = biot_savart(&smooth_field(g, 5.0, &mut r).dealias());
    let s = lebesgue_norm(&rho, f64::INFINITY);
    let lo = rho.to_physical().expect("real").into_iter().fold(f64::INFINITY, f64::min);
    (rho, u, DensityBounds::new(lo, s).expect("ordered bounds"))
}

fn residual_contract(_: Mutation) -> CheckResult {
    let g = grid(32);
    let cfg = EllipticConfig::default();
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let (rho, u, b) = random_pressure_inputs(g, 200 + seed);
        let sol = solve_pressure(&rho, &u, &cfg, &b).map_err(err)?;
        worst = worst.max(pressure_residual(&rho, &u, &sol.pi).map_err(err)?);
    }
    Ok(within(worst, cfg.tol * 1.01 + 1e-13))
}

fn energy_estimate(_: Mutation) -> CheckResult {
    let g = grid(32);
    let cfg = EllipticConfig::default();
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let (rho, u, b) = random_pressure_inputs(g, 300 + seed);
        let sol = solve_pressure(&rho, &u, &cfg, &b).map_err(err)?;
        let a = energy_audit(&u, &sol.pi, &b);
        violations += a.violated as usize;
        worst = worst.max(a.lhs / a.rhs);
    }
    Ok(Outcome {
        passed: violations == 0,
        detail: format!("{violations} violations in 20 solves, max lhs/rhs {worst:.3}"),
    })
}

fn operator_symmetry(_: Mutation) -> CheckResult {
    let g = grid(32);
    let mut r = rng(16);
    let rho = random_density(g, 0.5, &mut r);
    let a = inverse_density(&rho).map_err(err)?.to_physical().map_err(err)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (p, q) = (band_limited_field(g, &mut r), band_limited_field(g, &mut r));
        let (ap, aq) = (apply_operator(&a, &p), apply_operator(&a, &q));
        let (x, y) = (ap.inner(&q), p.inner(&aq));
        worst = worst.max((x - y).abs() / x.abs().max(y.abs()));
    }
    Ok(within(worst, 1e-12))
}

fn pressure_gauge(_: Mutation) -> CheckResult {
    let g = grid(32);
    let (rho, u, b) = random_pressure_inputs(g, 17);
    let sol = solve_pressure(&rho, &u, &EllipticConfig::default(), &b).map_err(err)?;
    let mean = sol.pi.mean();
    Ok(Outcome {
        passed: mean == 0.0,
        detail: format!("mean(Π) = {mean:.1e} (exact)"),
    })
}

// geometry_diag

fn nondegeneracy_decay(_: Mutation) -> CheckResult {
    let recs = smooth_records()?;
    let i0 = recs[0].i_x.ln();
    let margin = recs
        .iter()
        .map(|r| r.i_x.ln() - i0 + 1.5 * r.u_integral)
        .fold(f64::INFINITY, f64::min);
    Ok(at_least(margin, -0.05))
}

fn striation_transport(_: Mutation) -> CheckResult {
    // steady Taylor-Green with X = (−∂_yω, ∂_xω), parallel to u
    let mut cfg = RunConfig::new(ScenarioName::TaylorGreen);
    cfg.grid.n = 32;
    let g = cfg.grid_spec();
    let omega = SpectralField::from_fn2(g, |x, y| 2.0 * x.sin() * y.sin());
    let x = VectorField::new(vec![-&omega.derivative(1).map_err(err)?, omega.derivative(0).map_err(err)?]).map_err(err)?;
    let family = VectorFieldFamily::new(vec![x], 0.5).map_err(err)?;
    let state = StratifiedState::new(SpectralField::constant(g, 1.0), omega, family).map_err(err)?;
    let mut sim = Simulation::from_state(&cfg, state, FlowMarkers::new(Vec::new()), None, 0).map_err(err)?;
    let l = sim.ladder.clone();
    let s = |st: &StratifiedState| striation_along(&l, &st.omega, &st.family);
    let floor = s(&sim.state).map_err(err)?.max(1e-12 * lebesgue_norm(&sim.state.omega, f64::INFINITY));
    let mut worst: f64 = 0.0;
    sim.run_to_end(|sm| {
        worst = worst.max(s(&sm.state)? / floor);
        Ok(())
    })
    .map_err(err)?;
    Ok(within(worst, 10.0))
}

fn theta_dominates(_: Mutation) -> CheckResult {
    let recs = smooth_records()?;
    let bad = recs.iter().filter(|r| !(r.theta >= r.l)).count();
    Ok(Outcome {
        passed: bad == 0,
        detail: format!("{bad} records with Θ < L (exact)"),
    })
}

fn cz_growth(_: Mutation) -> CheckResult {
    let recs = smooth_records()?;
    let first = recs[0].cz_ratios;
    let growth = recs
        .iter()
        .flat_map(|r| (0..3).map(move |q| r.cz_ratios[q] / first[q]))
        .fold(0.0, f64::max);
    Ok(within(growth, 2.0))
}

fn lifespan_checks(_: Mutation) -> CheckResult {
    let base = LifespanInputs {
        l0: 1.0,
        a0: 0.0,
        s0: 1.0,
        gamma0: 0.0,
        r0: 0.0,
        delta: 1.01,
        c: 1.0,
        p: 4.0,
        q: 4.0,
    };
    let worked = lifespan_bound(&base).map_err(err)?;
    let expected = 1.0 / (9.0 * (E + 1.0).ln());
    let mut bad = usize::from((worked - expected).abs() > 1e-12 * expected);
    let mut r = rng(18);
    for _ in 0..20 {
        let mut p = base;
        p.l0 = r.gen_range(0.1..5.0);
        p.s0 = r.gen_range(0.0..5.0);
        p.a0 = r.gen_range(0.1..3.0);
        p.gamma0 = r.gen_range(0.1..3.0);
        p.r0 = r.gen_range(0.0..3.0);
        let t = lifespan_bound(&p).map_err(err)?;
        for bump in [
            |q: &mut LifespanInputs| q.a0 *= 1.01,
            |q: &mut LifespanInputs| q.gamma0 *= 1.01,
            |q: &mut LifespanInputs| q.r0 += 0.01,
        ] {
            let mut q = p;
            bump(&mut q);
            if !(lifespan_bound(&q).map_err(err)? < t) {
                bad += 1;
            }
        }
    }
    Ok(Outcome {
        passed: bad == 0,
        detail: format!("worked value {worked:.5}, {bad} failures in 61 checks"),
    })
}

// harness_cli

static SCRATCH: AtomicUsize = AtomicUsize::new(0);

/// Fresh scratch directory under the system temp dir.
fn scratch_dir(tag: &str) -> PathBuf {
    let k = SCRATCH.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("stria-validate-{}-{tag}-{k}", std::process::id()))
}

fn tiny_run_cfg() -> RunConfig {
    let mut cfg = RunConfig::new(ScenarioName::TaylorGreen);
    cfg.grid.n = 16;
    cfg.scenario.amp = 0.1;
    cfg.time.t_end = 0.1;
    cfg.outputs.record_stride = 1;
    cfg.outputs.snapshot_stride = 2;
    cfg.scenario.markers = 16;
    cfg
}

fn determinism(_: Mutation) -> CheckResult {
    let cfg = tiny_run_cfg();
    let (a, b) = (scratch_dir("det-a"), scratch_dir("det-b"));
    run::run(&cfg, &a, None).map_err(err)?;
    run::run(&cfg, &b, None).map_err(err)?;
    let read = |d: &PathBuf| std::fs::read(d.join("diagnostics.csv")).map_err(err);
    let same = read(&a)? == read(&b)?;
    let _ = std::fs::remove_dir_all(&a);
    let _ = std::fs::remove_dir_all(&b);
    Ok(Outcome {
        passed: same,
        detail: format!("diagnostics CSV {}", if same { "bitwise identical" } else { "differs" }),
    })
}

fn self_describing(_: Mutation) -> CheckResult {
    let cfg = tiny_run_cfg();
    let dir = scratch_dir("desc");
    run::run(&cfg, &dir, None).map_err(err)?;
    let echoed = std::fs::read_to_string(dir.join("config.toml")).map_err(err)?;
    let legend = std::fs::read_to_string(dir.join("columns.txt")).map_err(err)?;
    let reparsed = RunConfig::from_toml(&echoed, &dir.join("config.toml")).map_err(err)?;
    let ok = echoed.contains("format_version") && legend.lines().count() == 25 && reparsed == cfg;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(Outcome {
        passed: ok,
        detail: "echoed config re-parses, version and legend present".into(),
    })
}

fn snapshot_round_trip(_: Mutation) -> CheckResult {
    let g = grid(32);
    let mut state = random_state(g, 19);
    state.pi_cache = Some(band_limited_field(g, &mut rng(20)));
    state.t = 0.375;
    let markers = FlowMarkers::new(vec![[0.1, 0.2], [PI, 1.0]]);
    let dir = scratch_dir("snap");
    let snap = snapshot::capture(&state, &markers, 7, "abc");
    snapshot::write_snapshot(&snap, &dir).map_err(err)?;
    let back = snapshot::read_snapshot(&dir).map_err(err)?;
    let (s2, m2) = snapshot::restore(&back).map_err(err)?;
    let _ = std::fs::remove_dir_all(&dir);
    let ok = back == snap && s2 == state && m2 == markers;
    Ok(Outcome {
        passed: ok,
        detail: format!("read(write(s)) {}", if ok { "bitwise equal" } else { "differs" }),
    })
}

/// Every check of the suite in report order.
pub fn checks() -> Vec<Check> {
    macro_rules! c {
        ($id:literal, $module:literal, $inv:literal, $f:expr) => {
            Check {
                id: $id,
                module: $module,
                invariant: $inv,
                run: $f,
            }
        };
    }
    vec![
        c!("parseval", "grid_spectral", "grid mean of |f|² equals the coefficient sum", parseval),
        c!("derivative-dealias", "grid_spectral", "derivative commutes with dealias", derivative_dealias),
        c!("laplacian-inverse", "grid_spectral", "(−Δ)^{-1}(−Δ) is the identity on mean-zero fields", laplacian_inverse),
        c!("linearity", "grid_spectral", "spectral operators are linear", linearity),
        c!("reconstruction", "littlewood_paley", "blocks sum back to the field", reconstruction),
        c!("block-orthogonality", "littlewood_paley", "Δ_jΔ_k = 0 for |j−k| ≥ 2", block_orthogonality),
        c!("norm-monotonicity", "littlewood_paley", "Besov norms are ordered in s and r", norm_monotonicity),
        c!("norm-scaling", "littlewood_paley", "Besov norms are homogeneous", norm_scaling),
        c!("bernstein", "littlewood_paley", "Bernstein envelope is j-independent", bernstein),
        c!("bony-identity", "paracalculus", "T_u v + T_v u + R(u,v) = uv", bony),
        c!("bilinearity", "paracalculus", "T and R are bilinear", bilinearity),
        c!("div-identity", "paracalculus", "div(fX) = ∂_X f + f div X", div_identity),
        c!("paraproduct-estimate", "paracalculus", "|T_u v|_{C^s} / (|u|_∞ |v|_{C^s}) is bounded", paraproduct_estimate),
        c!("curl-consistency", "euler_dynamics", "curl of the momentum RHS is the vorticity RHS", curl_consistency),
        c!("velocity-divergence", "euler_dynamics", "Biot-Savart velocity is divergence-free", velocity_divergence),
        c!("maximum-principle", "euler_dynamics", "density stays within its initial range", maximum_principle),
        c!("constant-density-norms", "euler_dynamics", "L^q norms of ω are conserved when ρ is constant", constant_density_norms),
        c!("div-x-transport", "euler_dynamics", "|div X|_∞ is conserved", div_x_transport),
        c!("temporal-order", "euler_dynamics", "RK4 self-convergence order ≥ 3.5", temporal_order),
        c!("residual-contract", "pressure_solver", "independent residual within tolerance", residual_contract),
        c!("energy-estimate", "pressure_solver", "a_*|∇Π| ≤ |u·∇u| in L²", energy_estimate),
        c!("operator-symmetry", "pressure_solver", "Π ↦ −div(∇Π/ρ) is self-adjoint", operator_symmetry),
        c!("pressure-gauge", "pressure_solver", "mean(Π) = 0", pressure_gauge),
        c!("nondegeneracy-decay", "geometry_diag", "log I(X) ≥ log I(X_0) − 1.5 U − 0.05", nondegeneracy_decay),
        c!("striation-transport", "geometry_diag", "S(t) ≤ 10 × its t = 0 floor", striation_transport),
        c!("theta-dominates", "geometry_diag", "Θ ≥ L in every record", theta_dominates),
        c!("cz-growth", "geometry_diag", "CZ ratios grow at most 2×", cz_growth),
        c!("lifespan", "geometry_diag", "lifespan worked value and monotonicity", lifespan_checks),
        c!("determinism", "harness_cli", "same config gives a bitwise-identical CSV", determinism),
        c!("self-describing", "harness_cli", "run directory holds config, version and legend", self_describing),
        c!("snapshot-round-trip", "harness_cli", "snapshots round-trip bitwise", snapshot_round_trip),
    ]
}

fn evaluate(c: &Check, mutation: Mutation) -> Outcome {
    match std::panic::catch_unwind(|| (c.run)(mutation)) {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => Outcome {
            passed: false,
            detail: format!("error: {e}"),
        },
        Err(_) => Outcome {
            passed: false,
            detail: "panicked".into(),
        },
    }
}

/// Runs the single check named `id`.
pub fn run_check(id: &str, mutation: Mutation) -> Option<Outcome> {
    checks().iter().find(|c| c.id == id).map(|c| evaluate(c, mutation))
}

/// Runs every check concurrently; a panicking check counts as failed.
pub fn run_suite(mutation: Mutation) -> SuiteReport {
    let rows = checks()
        .into_par_iter()
        .map(|c| {
            let outcome = evaluate(&c, mutation);
            CheckReport {
                id: c.id,
                module: c.module,
                invariant: c.invariant,
                outcome,
            }
        })
        .collect();
    SuiteReport { rows }
}
