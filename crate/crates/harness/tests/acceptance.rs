//! Acceptance criteria, one line each. Run with
//! `cargo test -p stria-harness --test acceptance`.

use std::f64::consts::E;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use stria_core::diag::{lifespan_bound, lipschitz_audit, DiagnosticsRecord, LifespanInputs};
use stria_core::dynamics::momentum_rhs;
use stria_core::ladder::{bernstein_audit, lebesgue_norm};
use stria_core::para::{paraproduct, remainder};
use stria_core::pressure::{energy_audit, solve_pressure};
use stria_core::random::{band_limited_field, smooth_field};
use stria_core::stats::slope;
use stria_core::{
    biot_savart, curl, DensityBounds, DyadicLadder, EllipticConfig, EulerSystem, GridSpec, SpectralField,
    StratifiedState, VectorField, VectorFieldFamily,
};
use stria_harness::config::{RunConfig, ScenarioName};
use stria_harness::converge::converge;
use stria_harness::run::Simulation;
use stria_harness::scenario;
use stria_harness::validate::{run_check, Mutation};

struct Verdict {
    passed: bool,
    detail: String,
}

type Outcome = Result<Verdict, String>;

fn verdict(passed: bool, detail: String) -> Outcome {
    Ok(Verdict { passed, detail })
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grid(n: usize) -> GridSpec {
    GridSpec::square(n).expect("power-of-two grid")
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    (a - b).max_coeff() / b.max_coeff()
}

fn max_abs_diff(samples: &[f64], g: GridSpec, f: impl Fn(f64, f64) -> f64) -> f64 {
    let exact = g.sample2(f);
    samples.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn unit_family(g: GridSpec) -> VectorFieldFamily {
    VectorFieldFamily::new(
        vec![
            VectorField::constant(g, &[1.0, 0.0]).expect("planar"),
            VectorField::constant(g, &[0.0, 1.0]).expect("planar"),
        ],
        0.5,
    )
    .expect("valid family")
}

/// Smooth density with values spread over `[lo, hi]`.
fn density_between(g: GridSpec, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let r = smooth_field(g, 4.0, rng).without_mean();
    let v = r.to_physical().expect("real");
    let (min, max) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    // an affine map of a band-limited field stays band-limited
    let scale = (hi - lo) / (max - min);
    &r.scale(scale) + &SpectralField::constant(g, lo - min * scale)
}

/// Bounds enclosing the samples of `rho`, so rounding never leaves them.
fn bounds_of(rho: &SpectralField) -> DensityBounds {
    let v = rho.to_physical().expect("real");
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    DensityBounds::new(lo * (1.0 - 1e-12), hi * (1.0 + 1e-12)).expect("positive density")
}

fn bony() -> Outcome {
    let g = grid(128);
    let l = DyadicLadder::build(g).map_err(err)?;
    let mut r = rng(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (u, v) = (band_limited_field(g, &mut r), band_limited_field(g, &mut r));
        let sum = &(&paraproduct(&l, &u, &v).map_err(err)? + &paraproduct(&l, &v, &u).map_err(err)?)
            + &remainder(&l, &u, &v).map_err(err)?;
        // the oracle is the plain product of grid samples
        let prod = u.pointwise_product(&v).map_err(err)?;
        worst = worst.max(rel(&sum, &prod));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-12 && secs < 10.0,
        format!("100 pairs at n=128, max rel error {worst:.2e} <= 1e-12, {secs:.1} s < 10 s"),
    )
}

fn ladder_reconstruction() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut leak: f64 = 0.0;
    for n in [64, 128, 256] {
        let g = grid(n);
        let l = DyadicLadder::build(g).map_err(err)?;
        let u = band_limited_field(g, &mut rng(n as u64));
        let blocks = l.indices().map(|j| l.block(&u, j)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let sum = blocks.iter().fold(SpectralField::zeros(g), |acc, b| &acc + b);
        worst = worst.max(rel(&sum, &u));
        for j in l.indices() {
            for (k, b) in l.indices().zip(&blocks) {
                if (j - k).abs() >= 2 {
                    leak = leak.max(l.block(b, j).map_err(err)?.max_coeff());
                }
            }
        }
    }
    verdict(
        worst <= 1e-14 && leak == 0.0,
        format!("n in {{64,128,256}}: reconstruction {worst:.2e} <= 1e-14, max |Δ_jΔ_k u| = {leak:.1e} (exact 0)"),
    )
}

fn biot_savart_checks() -> Outcome {
    let g = grid(128);
    let omega = band_limited_field(g, &mut rng(3)).without_mean();
    let u = biot_savart(&omega);
    let div = lebesgue_norm(&u.divergence(), f64::INFINITY);
    let back = rel(&curl(&u), &omega);
    let tg = biot_savart(&SpectralField::from_fn2(g, |x, y| 2.0 * x.sin() * y.sin()));
    let u1 = tg.component(0).to_physical().map_err(err)?;
    let u2 = tg.component(1).to_physical().map_err(err)?;
    let closed = max_abs_diff(&u1, g, |x, y| -x.sin() * y.cos()).max(max_abs_diff(&u2, g, |x, y| x.cos() * y.sin()));
    verdict(
        div <= 1e-13 && back <= 1e-12 && closed <= 1e-12,
        format!("|div u|_inf {div:.1e} <= 1e-13, curl round trip {back:.1e} <= 1e-12, Taylor-Green {closed:.1e} <= 1e-12"),
    )
}

fn pressure_checks() -> Outcome {
    let cfg = EllipticConfig::default();
    let bounds = DensityBounds::new(0.5, 2.0).map_err(err)?;

    let g = grid(128);
    let omega = SpectralField::from_fn2(g, |x, y| 2.0 * x.sin() * y.sin());
    let sol = solve_pressure(&SpectralField::constant(g, 1.0), &biot_savart(&omega), &cfg, &bounds).map_err(err)?;
    let pi = sol.pi.to_physical().map_err(err)?;
    let tg = max_abs_diff(&pi, g, |x, y| ((2.0 * x).cos() + (2.0 * y).cos()) / 4.0);

    let small = grid(64);
    let violations: usize = (0..100u64)
        .into_par_iter()
        .map(|seed| -> Result<usize, String> {
            let mut r = rng(1000 + seed);
            let rho = density_between(small, 0.5, 2.0, &mut r);
            let u = biot_savart(&smooth_field(small, 5.0, &mut r).dealias());
            let b = bounds_of(&rho);
            let sol = solve_pressure(&rho, &u, &cfg, &b).map_err(err)?;
            Ok(energy_audit(&u, &sol.pi, &b).violated as usize)
        })
        .sum::<Result<usize, String>>()?;

    // 4:1 contrast, once smooth-random and once patch-shaped
    let mut r = rng(4);
    let smooth = density_between(g, 0.5, 2.0, &mut r);
    let disk = SpectralField::from_fn2(g, |x, y| {
        let d = ((x - 3.2).powi(2) + (y - 3.0).powi(2)).sqrt();
        1.25 - 0.75 * ((d - 1.5) / 0.15).tanh()
    })
    .dealias();
    let u = biot_savart(&smooth_field(g, 5.0, &mut r).dealias());
    let mut iterations = 0;
    for rho in [&smooth, &disk] {
        iterations = iterations.max(solve_pressure(rho, &u, &cfg, &bounds_of(rho)).map_err(err)?.iterations);
    }
    verdict(
        tg <= 1e-8 && violations == 0 && iterations <= 60,
        format!(
            "Taylor-Green Π error {tg:.1e} <= 1e-8, {violations} energy violations in 100, {iterations} CG iterations <= 60 at 4:1"
        ),
    )
}

fn random_state(g: GridSpec, seed: u64) -> StratifiedState {
    let mut r = rng(seed);
    let rho = density_between(g, 0.7, 1.3, &mut r);
    let omega = smooth_field(g, 6.0, &mut r).dealias();
    StratifiedState::new(rho, omega, unit_family(g)).expect("valid state")
}

fn curl_consistency() -> Outcome {
    let g = grid(64);
    let bounds = DensityBounds::new(0.5, 2.0).map_err(err)?;
    let good = EulerSystem::new(bounds, EllipticConfig::default(), 1.0).map_err(err)?;
    let mut flipped = good.clone();
    flipped.baroclinic_sign = -1.0;
    let mismatch = |sys: &EulerSystem, s: &StratifiedState| -> Result<f64, String> {
        let rates = sys.rhs(s).map_err(err)?;
        let mom = momentum_rhs(&s.rho, &rates.velocity, &rates.pi).map_err(err)?;
        Ok((&curl(&mom) - &rates.omega).l2_norm() / rates.omega.l2_norm())
    };
    let mut worst: f64 = 0.0;
    let mut caught = 0;
    for seed in 0..20 {
        let s = random_state(g, 500 + seed);
        worst = worst.max(mismatch(&good, &s)?);
        caught += usize::from(mismatch(&flipped, &s)? > 1e-10);
    }
    verdict(
        worst <= 1e-10 && caught == 20,
        format!("20 states: max rel mismatch {worst:.1e} <= 1e-10; sign flip detected in {caught}/20"),
    )
}

fn steady_state() -> Outcome {
    let mut cfg = RunConfig::new(ScenarioName::TaylorGreen);
    cfg.grid.n = 128;
    cfg.time.t_end = 1.0;
    cfg.time.dt = Some(1e-3);
    cfg.scenario.markers = 0;
    let start = Instant::now();
    let mut sim = Simulation::new(&cfg).map_err(err)?;
    let w0 = sim.state.omega.clone();
    let qs = [2.0, 4.0, f64::INFINITY];
    let n0 = qs.map(|q| lebesgue_norm(&w0, q));
    let (mut drift, mut lq): (f64, f64) = (0.0, 0.0);
    sim.run_to_end(|s| {
        drift = drift.max((&s.state.omega - &w0).l2_norm() / w0.l2_norm());
        for (q, n) in qs.iter().zip(&n0) {
            lq = lq.max((lebesgue_norm(&s.state.omega, *q) / n - 1.0).abs());
        }
        Ok(())
    })
    .map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    // an unsteady homogeneous flow exercises the same conservation
    let unsteady = run_check("constant-density-norms", Mutation::None).expect("check exists");
    verdict(
        drift <= 1e-6 && lq <= 1e-3 && secs < 120.0 && unsteady.passed,
        format!(
            "{} steps: ω drift {drift:.1e} <= 1e-6, L^q drift {lq:.1e} <= 1e-3, {secs:.0} s < 120 s; unsteady flow {}",
            sim.step, unsteady.detail
        ),
    )
}

/// Per-step trace of the resolved variable-density patch run.
struct PatchTrace {
    first: DiagnosticsRecord,
    records: Vec<DiagnosticsRecord>,
    steps: usize,
}

fn patch_config(n: usize, width_cells: f64) -> RunConfig {
    let mut cfg = RunConfig::new(ScenarioName::VortexPatch);
    cfg.grid.n = n;
    cfg.scenario.width_cells = width_cells;
    cfg.time.t_end = 1.0;
    cfg
}

fn patch_trace() -> &'static Result<PatchTrace, String> {
    static TRACE: OnceLock<Result<PatchTrace, String>> = OnceLock::new();
    TRACE.get_or_init(|| {
        // n=256: at n=128 the three-cell edge under-samples |div X|
        let mut sim = Simulation::new(&patch_config(256, 3.0)).map_err(err)?;
        let first = sim.record().map_err(err)?;
        let mut records = Vec::new();
        sim.run_to_end(|s| {
            records.push(s.record()?);
            Ok(())
        })
        .map_err(err)?;
        Ok(PatchTrace {
            first,
            records,
            steps: sim.step,
        })
    })
}

fn trace() -> Result<&'static PatchTrace, String> {
    patch_trace().as_ref().map_err(Clone::clone)
}

fn maximum_principle() -> Outcome {
    let t = trace()?;
    let (lo, hi) = (t.first.rho_min, t.first.rho_max);
    let over = t
        .records
        .iter()
        .map(|r| (r.rho_max - hi).max(lo - r.rho_min).max(0.0))
        .fold(0.0, f64::max);
    let ratio = over / (hi - lo);
    verdict(
        ratio <= 1e-3,
        format!("patch n=256, {} steps: overshoot {ratio:.1e} of [{lo:.4}, {hi:.4}] <= 1e-3", t.steps),
    )
}

fn div_x_conservation() -> Outcome {
    let t = trace()?;
    let d0 = t.first.div_x_linf;
    let drift = t.records.iter().map(|r| (r.div_x_linf / d0 - 1.0).abs()).fold(0.0, f64::max);
    verdict(drift <= 5e-3, format!("|div X|_inf = {d0:.4}, max drift {:.3}% <= 0.5%", 100.0 * drift))
}

fn nondegeneracy_bound() -> Outcome {
    let t = trace()?;
    let i0 = t.first.i_x.ln();
    let margin = t
        .records
        .iter()
        .map(|r| r.i_x.ln() - (i0 - 1.5 * r.u_integral - 0.05))
        .fold(f64::INFINITY, f64::min);
    let u = t.records.last().map_or(0.0, |r| r.u_integral);
    verdict(
        margin >= 0.0,
        format!("I(X_0) = {:.4}, U(1) = {u:.3}, min margin {margin:.3e} >= 0", t.first.i_x),
    )
}

fn striation_propagation() -> Outcome {
    let mut cfg = patch_config(128, 3.0);
    let probe = Simulation::new(&cfg).map_err(err)?;
    let first = probe.record().map_err(err)?;
    let lifespan = probe.lifespan(&first).map_err(err)?;
    cfg.time.t_end = 0.5 * lifespan;
    cfg.time.dt = Some(cfg.time.t_end / 4.0);
    let mut sim = Simulation::from_state(&cfg, probe.state, probe.markers, probe.patch, 0).map_err(err)?;
    let floor = first.s.max(1e-12 * first.omega_linf);
    let mut worst: f64 = 0.0;
    sim.run_to_end(|s| {
        worst = worst.max(s.record()?.s);
        Ok(())
    })
    .map_err(err)?;
    verdict(
        worst <= 10.0 * floor,
        format!(
            "T = {lifespan:.3e}, over [0, T/2]: max S {worst:.2e} <= 10 x {floor:.2e} (S(0) = {:.2e})",
            first.s
        ),
    )
}

/// Independent evaluation of the lifespan expression.
fn scripted_lifespan(l0: f64, s0: f64, a0: f64, g0: f64, r0: f64, c: f64, delta: f64) -> f64 {
    let head = c * if l0 < s0 { l0 } else { s0 };
    let log = (E + s0 / l0).ln();
    let poly = (1.0 + l0 + s0) * (1.0 + l0 + s0);
    head / (l0 * log) / poly / (1.0 + a0.powf(3.0 + delta)) / (1.0 + g0 * g0 * g0 + r0)
}

fn lifespan_formula() -> Outcome {
    let inputs = |l0, s0, a0, gamma0, r0, c| LifespanInputs {
        l0,
        a0,
        s0,
        gamma0,
        r0,
        delta: 1.01,
        c,
        p: 4.0,
        q: 4.0,
    };
    let eval = |i: &LifespanInputs| lifespan_bound(i).map_err(err);
    let worked = eval(&inputs(1.0, 1.0, 0.0, 0.0, 0.0, 1.0))?;
    let mut worst = (worked - 1.0 / (9.0 * (E + 1.0).ln())).abs() / worked;
    let mut r = rng(11);
    let mut monotone_failures = 0;
    for _ in 0..50 {
        let t = inputs(
            r.gen_range(0.05..10.0),
            r.gen_range(0.0..10.0),
            r.gen_range(0.01..5.0),
            r.gen_range(0.01..5.0),
            r.gen_range(0.0..5.0),
            r.gen_range(0.1..2.0),
        );
        let got = eval(&t)?;
        let want = scripted_lifespan(t.l0, t.s0, t.a0, t.gamma0, t.r0, t.c, t.delta);
        worst = worst.max((got - want).abs() / want);
        let doubled = [
            LifespanInputs { a0: 2.0 * t.a0, ..t },
            LifespanInputs { gamma0: 2.0 * t.gamma0, ..t },
            LifespanInputs { r0: 2.0 * t.r0 + 0.1, ..t },
        ];
        for d in &doubled {
            monotone_failures += usize::from(eval(d)? >= got);
        }
    }
    // homogeneous limit: T log(e + S0) S0² stays bounded as S0 grows
    let shape: Vec<f64> = [1.0, 10.0, 100.0]
        .iter()
        .map(|&s0| eval(&inputs(1.0, s0, 0.0, 0.0, 0.0, 1.0)).map(|t| t * (E + s0).ln() * s0 * s0))
        .collect::<Result<_, _>>()?;
    let bounded = shape.iter().all(|v| (0.05..=1.0).contains(v));
    verdict(
        worst <= 1e-12 && monotone_failures == 0 && bounded,
        format!(
            "worked value {worked:.5}, max rel error {worst:.1e} <= 1e-12 on 50 tuples, {monotone_failures} monotonicity failures, shape {:.3}/{:.3}/{:.3}",
            shape[0], shape[1], shape[2]
        ),
    )
}

/// `(t, ‖δu‖ + ‖δρ‖)` between a patch run and its perturbed twin.
fn divergence_history(n: usize, width_cells: f64) -> Result<Vec<(f64, f64)>, String> {
    let mut base = patch_config(n, width_cells);
    base.time.dt = Some(0.02);
    let mut twin = base.clone();
    twin.scenario.perturbation = 1e-6;
    let (mut a, mut b) = (Simulation::new(&base).map_err(err)?, Simulation::new(&twin).map_err(err)?);
    let gap = |a: &Simulation, b: &Simulation| {
        let (ua, ub) = (a.state.velocity(), b.state.velocity());
        let du: f64 = (0..2).map(|i| (ua.component(i) - ub.component(i)).mean_square()).sum();
        du.sqrt() + (&a.state.rho - &b.state.rho).l2_norm()
    };
    let mut out = vec![(0.0, gap(&a, &b))];
    while !a.finished() {
        let dt = a.next_dt().map_err(err)?;
        rayon::join(|| a.advance(dt), || b.advance(dt)).0.map_err(err)?;
        out.push((a.state.t, gap(&a, &b)));
    }
    Ok(out)
}

fn stability() -> Outcome {
    let (coarse, fine) = rayon::join(|| divergence_history(128, 3.0), || divergence_history(256, 6.0));
    let (coarse, fine) = (coarse?, fine?);
    let rate = |h: &[(f64, f64)]| slope(&h.iter().map(|(t, d)| (*t, d.ln())).collect::<Vec<_>>());
    let (rc, rf) = (rate(&coarse), rate(&fine));
    let worst = coarse.iter().chain(&fine).map(|p| p.1).fold(0.0, f64::max);
    let spread = (rc - rf).abs() / rf.abs();
    verdict(
        worst <= 1e-3 && spread <= 0.2,
        format!(
            "δ0 = {:.2e}, max divergence {worst:.2e} <= 1e-3; rates {rc:.4} (n=128) vs {rf:.4} (n=256), spread {:.1}% <= 20%",
            coarse[0].1,
            100.0 * spread
        ),
    )
}

fn convergence() -> Outcome {
    let mut cfg = RunConfig::new(ScenarioName::TaylorGreen);
    cfg.grid.n = 128;
    cfg.scenario.amp = 0.1;
    cfg.scenario.markers = 0;
    cfg.time.t_end = 0.5;
    let rep = converge(&cfg, 4).map_err(err)?;
    let orders: Vec<f64> = rep.temporal.iter().filter_map(|t| t.order).collect();
    let ratios: Vec<f64> = rep.spatial.iter().filter_map(|s| s.ratio).collect();
    let ok = !orders.is_empty()
        && !ratios.is_empty()
        && orders.iter().all(|o| (3.5..=4.5).contains(o))
        && ratios.iter().all(|r| *r >= 10.0);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ");
    verdict(
        ok,
        format!("temporal orders [{}] in [3.5, 4.5]; spatial ratios [{}] >= 10", fmt(&orders), fmt(&ratios)),
    )
}

/// Largest log-Lipschitz ratio over an ensemble of initial patches.
fn lipschitz_calibration(n: usize) -> Result<f64, String> {
    let shapes = [[1.6, 1.4], [1.4, 1.4], [1.8, 1.2], [1.2, 0.9], [1.7, 1.0]];
    let ladder = DyadicLadder::build(grid(n)).map_err(err)?;
    let ratios = shapes
        .par_iter()
        .map(|axes| {
            let mut cfg = patch_config(n, 3.0);
            cfg.scenario.semi_axes = *axes;
            let sc = scenario::build(&cfg).map_err(err)?;
            let a = lipschitz_audit(&ladder, &sc.state.omega, &sc.state.family, cfg.diagnostics.q).map_err(err)?;
            Ok(a.ratio)
        })
        .collect::<Result<Vec<f64>, String>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

fn estimate_audits() -> Outcome {
    let bern = bernstein_audit(&DyadicLadder::build(grid(256)).map_err(err)?, 20, 14).map_err(err)?;

    // CZ ratios over a smooth variable-density run
    let mut cfg = RunConfig::new(ScenarioName::TaylorGreen);
    cfg.grid.n = 128;
    cfg.scenario.amp = 0.2;
    cfg.scenario.markers = 0;
    let mut sim = Simulation::new(&cfg).map_err(err)?;
    let cz0 = sim.record().map_err(err)?.cz_ratios;
    let mut cz_growth: f64 = 0.0;
    sim.run_to_end(|s| {
        let cz = s.record()?.cz_ratios;
        for q in 0..3 {
            cz_growth = cz_growth.max(cz[q] / cz0[q]);
        }
        Ok(())
    })
    .map_err(err)?;

    let t = trace()?;
    let c = lipschitz_calibration(256)?;
    let scaled: Vec<f64> = t.records.iter().map(|r| r.lipschitz_ratio / c).collect();
    let lip_max = scaled.iter().copied().fold(0.0, f64::max);
    let lip_min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        !bern.flagged && cz_growth <= 2.0 && lip_max <= 1.0,
        format!(
            "Bernstein envelope {:.3} (slope {:.3}); CZ growth {cz_growth:.3} <= 2; log-Lipschitz ratio/C in [{lip_min:.3}, {lip_max:.3}] <= 1, C = {c:.4}",
            bern.envelope(),
            bern.growth_slope
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("bony-identity", bony),
        ("ladder-reconstruction", ladder_reconstruction),
        ("biot-savart", biot_savart_checks),
        ("pressure", pressure_checks),
        ("curl-consistency", curl_consistency),
        ("steady-state", steady_state),
        ("maximum-principle", maximum_principle),
        ("div-x-conservation", div_x_conservation),
        ("nondegeneracy-decay", nondegeneracy_bound),
        ("striation-propagation", striation_propagation),
        ("lifespan-formula", lifespan_formula),
        ("stability", stability),
        ("convergence", convergence),
        ("estimate-audits", estimate_audits),
    ];
    // positional arguments select criteria by name; flags from the test
    // runner are ignored
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let (passed, detail) = match check() {
            Ok(v) => (v.passed, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "{:>2} {} {name}: {detail} [{:.1} s]",
            k + 1,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
