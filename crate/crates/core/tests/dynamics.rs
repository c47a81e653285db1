use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stria_core::dynamics::{baroclinic, momentum_rhs};
use stria_core::ladder::lebesgue_norm;
use stria_core::markers::evaluate;
use stria_core::random::smooth_field;
use stria_core::{
    biot_savart, curl, DensityBounds, EllipticConfig, EulerSystem, FlowMarkers, GridSpec, SpectralField,
    StratifiedState, VectorField, VectorFieldFamily,
};

fn unit_family(g: GridSpec) -> VectorFieldFamily {
    VectorFieldFamily::new(
        vec![VectorField::constant(g, &[1.0, 0.0]).unwrap(), VectorField::constant(g, &[0.0, 1.0]).unwrap()],
        0.5,
    )
    .unwrap()
}

fn system() -> EulerSystem {
    EulerSystem::new(DensityBounds::new(0.5, 2.0).unwrap(), EllipticConfig::default(), 1.0).unwrap()
}

fn random_state(g: GridSpec, seed: u64) -> StratifiedState {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let bump = smooth_field(g, 4.0, &mut r).without_mean().dealias();
    let rho = &SpectralField::constant(g, 1.0) + &bump.scale(0.3 / lebesgue_norm(&bump, f64::INFINITY));
    let omega = smooth_field(g, 6.0, &mut r).dealias();
    StratifiedState::new(rho, omega, unit_family(g)).unwrap()
}

#[test]
fn taylor_green_velocity_closed_form() {
    let g = GridSpec::square(32).unwrap();
    let u = biot_savart(&SpectralField::from_fn2(g, |x, y| 2.0 * x.sin() * y.sin()));
    let u1 = u.component(0).to_physical().unwrap();
    let u2 = u.component(1).to_physical().unwrap();
    for (i, (a, b)) in u1.iter().zip(&u2).enumerate() {
        let p = g.point(i);
        assert!((a + p[0].sin() * p[1].cos()).abs() < 1e-13);
        assert!((b - p[0].cos() * p[1].sin()).abs() < 1e-13);
    }
}

#[test]
fn baroclinic_source_closed_forms() {
    let g = GridSpec::square(32).unwrap();
    let rho = SpectralField::from_fn2(g, |x, _| 1.0 / (2.0 + x.sin()));
    // crossed gradients give cos x cos y
    let b = baroclinic(&rho, &SpectralField::from_fn2(g, |_, y| y.sin())).unwrap().to_physical().unwrap();
    let want = g.sample2(|x, y| x.cos() * y.cos());
    let err = b.iter().zip(&want).map(|(a, w)| (a - w).abs()).fold(0.0, f64::max);
    assert!(err < 1e-10, "crossed gradients: {err}");
    // parallel gradients give nothing
    let b = baroclinic(&rho, &SpectralField::from_fn2(g, |x, _| x.sin())).unwrap();
    assert!(lebesgue_norm(&b, f64::INFINITY) < 1e-12);
    // constant density gives nothing
    let pi = smooth_field(g, 4.0, &mut ChaCha8Rng::seed_from_u64(1));
    let b = baroclinic(&SpectralField::constant(g, 1.3), &pi).unwrap();
    assert_eq!(lebesgue_norm(&b, f64::INFINITY), 0.0);
}

#[test]
fn steady_taylor_green_keeps_markers_on_streamlines() {
    // ψ = sin x sin y is constant along trajectories of the steady cell
    let g = GridSpec::square(32).unwrap();
    let omega = SpectralField::from_fn2(g, |x, y| 2.0 * x.sin() * y.sin());
    let psi = SpectralField::from_fn2(g, |x, y| x.sin() * y.sin());
    let mut state = StratifiedState::new(SpectralField::constant(g, 1.0), omega, unit_family(g)).unwrap();
    let seeds: Vec<[f64; 2]> = (0..8).map(|k| [1.0 + 0.1 * k as f64, 1.3]).collect();
    let levels: Vec<f64> = seeds.iter().map(|p| evaluate(&psi, *p)).collect();
    let mut markers = FlowMarkers::new(seeds);
    let sys = system();
    for _ in 0..50 {
        let (s, m) = sys.step(&state, Some(&markers), 0.02).unwrap();
        state = s;
        markers = m.unwrap();
    }
    for (p, level) in markers.positions.iter().zip(&levels) {
        let drift = (evaluate(&psi, *p) - level).abs();
        assert!(drift < 1e-7, "marker left its streamline by {drift}");
    }
}

#[test]
fn rk4_is_fourth_order() {
    let g = GridSpec::square(32).unwrap();
    let sys = system();
    let tg = |amp: f64| {
        StratifiedState::new(
            SpectralField::from_fn2(g, |x, _| 1.0 + amp * x.cos()),
            SpectralField::from_fn2(g, |x, y| 2.0 * x.sin() * y.sin()),
            unit_family(g),
        )
        .unwrap()
    };
    let solve = |steps: usize| {
        let mut s = tg(0.2);
        for _ in 0..steps {
            s = sys.step_rk4(&s, 0.4 / steps as f64).unwrap();
        }
        s.omega
    };
    let (a, b, c) = (solve(4), solve(8), solve(16));
    let order = ((&a - &b).l2_norm() / (&b - &c).l2_norm()).log2();
    assert!((3.5..=4.5).contains(&order), "order {order}");
}

#[test]
fn non_positive_density_is_rejected() {
    let g = GridSpec::square(16).unwrap();
    let rho = SpectralField::from_fn2(g, |x, _| x.cos());
    let state = StratifiedState::new(rho, SpectralField::zeros(g), unit_family(g));
    let failed = state.map_or(true, |s| system().rhs(&s).is_err());
    assert!(failed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curl_of_momentum_rhs_is_vorticity_rhs(seed in any::<u64>()) {
        let g = GridSpec::square(32).unwrap();
        let s = random_state(g, seed);
        let rates = system().rhs(&s).unwrap();
        let mom = momentum_rhs(&s.rho, &rates.velocity, &rates.pi).unwrap();
        let err = (&curl(&mom) - &rates.omega).l2_norm() / rates.omega.l2_norm();
        prop_assert!(err <= 1e-10, "mismatch {}", err);
    }

    #[test]
    fn biot_savart_is_divergence_free_and_inverts_curl(seed in any::<u64>()) {
        let g = GridSpec::square(32).unwrap();
        let omega = smooth_field(g, 8.0, &mut ChaCha8Rng::seed_from_u64(seed)).without_mean();
        let u = biot_savart(&omega);
        prop_assert!(lebesgue_norm(&u.divergence(), f64::INFINITY) <= 1e-13);
        prop_assert!((&curl(&u) - &omega).max_coeff() <= 1e-12 * omega.max_coeff());
    }

    #[test]
    fn density_rate_is_pure_transport(seed in any::<u64>()) {
        // ∂_t ρ = −u·∇ρ integrates to zero against ρ^k for div-free u
        let g = GridSpec::square(32).unwrap();
        let s = random_state(g, seed);
        let rates = system().rhs(&s).unwrap();
        let flux = rates.rho.inner(&s.rho);
        prop_assert!(flux.abs() <= 1e-12 * rates.rho.l2_norm() * s.rho.l2_norm());
    }
}
