use std::f64::consts::E;

use proptest::prelude::*;
use stria_core::diag::{
    lifespan_bound, nondegeneracy, striation_along, timeseries_sample, LifespanInputs, SampleOptions,
};
use stria_core::ladder::lebesgue_norm;
use stria_core::{DyadicLadder, GridSpec, SpectralField, StratifiedState, VectorField, VectorFieldFamily};

fn inputs(l0: f64, s0: f64, a0: f64, gamma0: f64, r0: f64) -> LifespanInputs {
    LifespanInputs {
        l0,
        a0,
        s0,
        gamma0,
        r0,
        delta: 1.01,
        c: 1.0,
        p: 4.0,
        q: 4.0,
    }
}

/// The lifespan expression written out independently.
fn oracle(i: &LifespanInputs) -> f64 {
    let m = if i.l0 < i.s0 { i.l0 } else { i.s0 };
    let denom = i.l0
        * (E + i.s0 / i.l0).ln()
        * (1.0 + i.l0 + i.s0).powi(2)
        * (1.0 + i.a0.powf(i.delta + 3.0))
        * (1.0 + i.gamma0.powi(3) + i.r0);
    i.c * m / denom
}

#[test]
fn worked_lifespan_value() {
    let t = lifespan_bound(&inputs(1.0, 1.0, 0.0, 0.0, 0.0)).unwrap();
    assert!((t - 1.0 / (9.0 * (E + 1.0).ln())).abs() < 1e-15);
    assert!((t - 0.08460).abs() < 5e-5);
}

#[test]
fn lifespan_rejects_bad_exponents() {
    let mut i = inputs(1.0, 1.0, 0.0, 0.0, 0.0);
    i.p = 2.0;
    assert!(lifespan_bound(&i).is_err());
    let mut i = inputs(1.0, 1.0, 0.0, 0.0, 0.0);
    i.q = 6.0;
    i.p = 3.0;
    assert!(lifespan_bound(&i).is_ok());
    i.p = f64::INFINITY;
    assert!(lifespan_bound(&i).is_err());
}

#[test]
fn nondegeneracy_of_simple_families() {
    let g = GridSpec::square(32).unwrap();
    let constant = VectorFieldFamily::new(vec![VectorField::constant(g, &[3.0, 4.0]).unwrap()], 0.5).unwrap();
    assert!((nondegeneracy(&constant) - 5.0).abs() < 1e-14);
    // (cos x, 0) vanishes on the grid line x = π/2
    let vanishing = VectorFieldFamily::new(
        vec![VectorField::new(vec![SpectralField::from_fn2(g, |x, _| x.cos()), SpectralField::zeros(g)]).unwrap()],
        0.5,
    )
    .unwrap();
    assert!(nondegeneracy(&vanishing) < 1e-14);
}

#[test]
fn function_constant_along_the_family_has_no_striation() {
    // f depends on y only, X = (1, 0)
    let g = GridSpec::square(32).unwrap();
    let l = DyadicLadder::build(g).unwrap();
    let f = SpectralField::from_fn2(g, |_, y| (2.0 * y).sin() + y.cos());
    let fam = VectorFieldFamily::new(vec![VectorField::constant(g, &[1.0, 0.0]).unwrap()], 0.5).unwrap();
    assert!(striation_along(&l, &f, &fam).unwrap() < 1e-13);
}

#[test]
fn taylor_green_record_values() {
    let g = GridSpec::square(32).unwrap();
    let l = DyadicLadder::build(g).unwrap();
    let fam = VectorFieldFamily::new(
        vec![VectorField::constant(g, &[1.0, 0.0]).unwrap(), VectorField::constant(g, &[0.0, 1.0]).unwrap()],
        0.5,
    )
    .unwrap();
    let omega = SpectralField::from_fn2(g, |x, y| 2.0 * x.sin() * y.sin());
    let mut state = StratifiedState::new(SpectralField::constant(g, 1.0), omega.clone(), fam).unwrap();
    state.pi_cache = Some(SpectralField::from_fn2(g, |x, y| ((2.0 * x).cos() + (2.0 * y).cos()) / 4.0));
    let rec = timeseries_sample(&l, &state, &SampleOptions::default(), None).unwrap();
    assert!((rec.omega_linf - 2.0).abs() < 1e-12);
    assert!((rec.omega_l2 - 1.0).abs() < 1e-12);
    assert_eq!(rec.a, 0.0);
    assert!((rec.i_x - 1.0).abs() < 1e-14);
    // |∇u|_{L²} = |ω|_{L²} in 2-D, so the q = 2 ratio is exactly 1/4
    assert!((rec.cz_ratios[0] - 0.25).abs() < 1e-12);
    assert!(rec.theta >= rec.l);
    assert_eq!(rec.patch_interior_holder, None);
    assert!(lebesgue_norm(&omega, 2.0) > 0.0);
}

proptest! {
    #[test]
    fn lifespan_matches_oracle(
        l0 in 0.01f64..20.0, s0 in 0.0f64..20.0, a0 in 0.0f64..5.0, g0 in 0.0f64..5.0, r0 in 0.0f64..5.0
    ) {
        let i = inputs(l0, s0, a0, g0, r0);
        let t = lifespan_bound(&i).unwrap();
        let want = oracle(&i);
        prop_assert!((t - want).abs() <= 1e-12 * want.max(1e-300));
    }

    #[test]
    fn lifespan_decreases_in_each_family_norm(
        l0 in 0.1f64..5.0, s0 in 0.1f64..5.0, a0 in 0.01f64..3.0, g0 in 0.01f64..3.0, r0 in 0.0f64..3.0
    ) {
        let t = lifespan_bound(&inputs(l0, s0, a0, g0, r0)).unwrap();
        prop_assert!(lifespan_bound(&inputs(l0, s0, 2.0 * a0, g0, r0)).unwrap() < t);
        prop_assert!(lifespan_bound(&inputs(l0, s0, a0, 2.0 * g0, r0)).unwrap() < t);
        prop_assert!(lifespan_bound(&inputs(l0, s0, a0, g0, r0 + 0.5)).unwrap() < t);
    }
}
