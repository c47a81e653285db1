//! Right-hand sides and time stepping for the 2-D variable-density Euler
//! system in vorticity form.
//!
//! Scalar vorticity is `ω = ∂_2u¹ − ∂_1u²`, the orientation in which the
//! Taylor-Green pair `ω = 2 sin x sin y`, `u = (−sin x cos y, cos x sin y)`
//! holds and `u = (−∂_2, ∂_1)(−Δ)^{-1}ω`. With that orientation the curl of
//! `−u·∇u − ∇Π/ρ` is `−u·∇ω + ∂_1(1/ρ)∂_2Π − ∂_2(1/ρ)∂_1Π`.

use crate::error::{Error, Result};
use crate::family::VectorFieldFamily;
use crate::grid::{GridSpec, SpectralField, VectorField};
use crate::markers::{self, FlowMarkers};
use crate::pressure::{self, DensityBounds, EllipticConfig};

/// Full prognostic state.
#[derive(Clone, Debug, PartialEq)]
pub struct StratifiedState {
    pub t: f64,
    pub rho: SpectralField,
    pub omega: SpectralField,
    pub family: VectorFieldFamily,
    pub pi_cache: Option<SpectralField>,
}

impl StratifiedState {
    pub fn new(rho: SpectralField, omega: SpectralField, family: VectorFieldFamily) -> Result<Self> {
        let g = *rho.grid();
        if g.dim() != 2 {
            return Err(Error::InvalidGrid(format!("dynamics are planar, got dim = {}", g.dim())));
        }
        if omega.grid() != &g || family.grid() != &g {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            t: 0.0,
            rho,
            omega: omega.without_mean(),
            family,
            pi_cache: None,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.rho.grid()
    }

    pub fn velocity(&self) -> VectorField {
        biot_savart(&self.omega)
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.omega.is_finite() && self.family.members().iter().all(|x| x.is_finite())
    }
}

fn planar(g: &GridSpec) {
    assert_eq!(g.dim(), 2, "vorticity operators are planar");
}

/// Velocity `u = (−∂_2ψ, ∂_1ψ)` with stream function `ψ = (−Δ)^{-1}ω`.
pub fn biot_savart(omega: &SpectralField) -> VectorField {
    planar(omega.grid());
    let psi = omega.inv_neg_laplacian();
    VectorField::new(vec![
        -&psi.derivative(1).expect("planar"),
        psi.derivative(0).expect("planar"),
    ])
    .expect("planar components")
}

/// Scalar curl `∂_2v¹ − ∂_1v²`, the left inverse of [`biot_savart`].
pub fn curl(v: &VectorField) -> SpectralField {
    planar(v.grid());
    &v.component(0).derivative(1).expect("planar") - &v.component(1).derivative(0).expect("planar")
}

/// `∇u` from `ω` through the multipliers `ξ_iξ_j/|ξ|²`: entry `[i][j]` is `∂_j u^i`.
pub fn grad_velocity(omega: &SpectralField) -> [[SpectralField; 2]; 2] {
    let u = biot_savart(omega);
    let d = |i: usize, j: usize| u.component(i).derivative(j).expect("planar");
    [[d(0, 0), d(0, 1)], [d(1, 0), d(1, 1)]]
}

/// `∂_1(1/ρ)∂_2Π − ∂_2(1/ρ)∂_1Π`, dealiased.
pub fn baroclinic(rho: &SpectralField, pi: &SpectralField) -> Result<SpectralField> {
    planar(rho.grid());
    if rho.grid() != pi.grid() {
        return Err(Error::GridMismatch);
    }
    let a = pressure::inverse_density(rho)?;
    Ok(wedge(&a, pi))
}

fn wedge(a: &SpectralField, pi: &SpectralField) -> SpectralField {
    let a1 = a.derivative(0).expect("planar").physical();
    let a2 = a.derivative(1).expect("planar").physical();
    let p1 = pi.derivative(0).expect("planar").physical();
    let p2 = pi.derivative(1).expect("planar").physical();
    let vals: Vec<f64> = (0..a1.len()).map(|i| a1[i] * p2[i] - a2[i] * p1[i]).collect();
    SpectralField::to_spectral(*a.grid(), &vals).expect("grid sized").dealias()
}

/// Momentum right-hand side `−D(u·∇u) − D(∇Π/ρ)`.
pub fn momentum_rhs(rho: &SpectralField, u: &VectorField, pi: &SpectralField) -> Result<VectorField> {
    let a = pressure::inverse_density(rho)?;
    let adv = pressure::momentum_advection(u);
    let grad = pi.gradient();
    let comps = (0..u.dim())
        .map(|i| {
            let flux = a.pointwise_product(grad.component(i))?;
            Ok(&(-adv.component(i)) - &flux)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// Time derivatives of every prognostic field plus the pressure used.
#[derive(Clone, Debug, PartialEq)]
pub struct Rates {
    pub rho: SpectralField,
    pub omega: SpectralField,
    pub family: Vec<VectorField>,
    pub pi: SpectralField,
    pub velocity: VectorField,
    pub pressure_iterations: usize,
    pub pressure_residual: f64,
}

/// Physical-space samples of `u`.
fn samples(u: &VectorField) -> Vec<Vec<f64>> {
    u.components().iter().map(|c| c.physical()).collect()
}

/// `−u·∇X + ∂_X u` for one family member.
fn transport_rate(u: &VectorField, u_phys: &[Vec<f64>], x: &VectorField) -> VectorField {
    let g = *u.grid();
    let x_phys = samples(x);
    x.map_indexed(|i, xi| {
        let adv = pressure::advect(u_phys, xi);
        let mut stretch = vec![0.0; g.len()];
        for (j, xj) in x_phys.iter().enumerate() {
            let du = u.component(i).derivative(j).expect("planar").physical();
            stretch.iter_mut().zip(xj.iter().zip(&du)).for_each(|(s, (p, q))| *s += p * q);
        }
        let stretch = SpectralField::to_spectral(g, &stretch).expect("grid sized").dealias();
        &stretch - &adv
    })
}

/// Semi-discrete Euler system with its solver settings.
#[derive(Clone, Debug)]
pub struct EulerSystem {
    pub bounds: DensityBounds,
    pub elliptic: EllipticConfig,
    pub dt_max: f64,
    /// Sign applied to the baroclinic term; only the validation suite flips it.
    #[doc(hidden)]
    pub baroclinic_sign: f64,
}

/// Slack on the density bounds checked inside each pressure solve; the
/// maximum principle is audited separately at a much tighter level.
const BOUNDS_SLACK: f64 = 0.05;

impl EulerSystem {
    pub fn new(bounds: DensityBounds, elliptic: EllipticConfig, dt_max: f64) -> Result<Self> {
        elliptic.validate()?;
        if !(dt_max > 0.0) {
            return Err(Error::InvalidParameter(format!("dt_max = {dt_max} must be > 0")));
        }
        Ok(Self {
            bounds,
            elliptic,
            dt_max,
            baroclinic_sign: 1.0,
        })
    }

    /// Pressure of `rho`, `u`, warm-started from `guess`.
    pub fn pressure(
        &self,
        rho: &SpectralField,
        u: &VectorField,
        guess: Option<&SpectralField>,
    ) -> Result<pressure::PressureSolution> {
        self.bounds.widened(BOUNDS_SLACK).check(&rho.physical())?;
        let a = pressure::inverse_density(rho)?;
        let source = pressure::pressure_source(u);
        pressure::solve_with(rho, &a, &source, pressure::source_floor(u), guess, &self.elliptic)
    }

    pub fn rhs(&self, state: &StratifiedState) -> Result<Rates> {
        let u = state.velocity();
        let sol = self.pressure(&state.rho, &u, state.pi_cache.as_ref())?;
        let u_phys = samples(&u);
        let rho_rate = -&pressure::advect(&u_phys, &state.rho);
        let bar = baroclinic(&state.rho, &sol.pi)?;
        let omega_rate = &bar.scale(self.baroclinic_sign) - &pressure::advect(&u_phys, &state.omega);
        let family = state
            .family
            .members()
            .iter()
            .map(|x| transport_rate(&u, &u_phys, x))
            .collect();
        Ok(Rates {
            rho: rho_rate,
            omega: omega_rate,
            family,
            pi: sol.pi,
            velocity: u,
            pressure_iterations: sol.iterations,
            pressure_residual: sol.residual,
        })
    }

    /// `courant · h / max(max|u|, 1e-12)`, capped at `dt_max`.
    pub fn cfl_dt(&self, state: &StratifiedState, courant: f64) -> Result<f64> {
        if !(courant > 0.0 && courant <= 1.0) {
            return Err(Error::InvalidParameter(format!("courant = {courant} must lie in (0, 1]")));
        }
        let umax = state.velocity().magnitude().into_iter().fold(0.0, f64::max);
        Ok((courant * state.grid().spacing() / umax.max(1e-12)).min(self.dt_max))
    }

    /// One classical RK4 step; the pressure is re-solved at every stage.
    pub fn step_rk4(&self, state: &StratifiedState, dt: f64) -> Result<StratifiedState> {
        self.step(state, None, dt).map(|(s, _)| s)
    }

    /// RK4 step carrying flow markers along with the stage velocities.
    pub fn step(
        &self,
        state: &StratifiedState,
        markers: Option<&FlowMarkers>,
        dt: f64,
    ) -> Result<(StratifiedState, Option<FlowMarkers>)> {
        self.check_finite(state)?;
        let k1 = self.rhs(state)?;
        let s2 = self.stage(state, &k1, 0.5 * dt)?;
        let k2 = self.rhs(&s2)?;
        let s3 = self.stage(state, &k2, 0.5 * dt)?;
        let k3 = self.rhs(&s3)?;
        let s4 = self.stage(state, &k3, dt)?;
        let k4 = self.rhs(&s4)?;
        let ks = [&k1, &k2, &k3, &k4];
        let w = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
        let combine = |f: &dyn Fn(&Rates) -> &SpectralField, base: &SpectralField| {
            ks.iter().zip(w).fold(base.clone(), |acc, (k, wi)| acc.axpy(wi, f(k)))
        };
        let rho = combine(&|k| &k.rho, &state.rho);
        let omega = combine(&|k| &k.omega, &state.omega).without_mean();
        let members = state
            .family
            .members()
            .iter()
            .enumerate()
            .map(|(l, x)| ks.iter().zip(w).fold(x.clone(), |acc, (k, wi)| acc.axpy(wi, &k.family[l])))
            .collect();
        let mut next = StratifiedState {
            t: state.t + dt,
            rho,
            omega,
            family: state.family.with_members(members),
            pi_cache: Some(k4.pi.clone()),
        };
        self.check_finite(&next)?;
        let moved = markers.map(|m| {
            let stages = [&k1.velocity, &k2.velocity, &k3.velocity, &k4.velocity];
            markers::advance_markers_staged(m, stages, dt)
        });
        let sol = self.pressure(&next.rho, &next.velocity(), next.pi_cache.as_ref())?;
        next.pi_cache = Some(sol.pi);
        Ok((next, moved))
    }

    fn stage(&self, base: &StratifiedState, k: &Rates, h: f64) -> Result<StratifiedState> {
        let s = StratifiedState {
            t: base.t + h,
            rho: base.rho.axpy(h, &k.rho),
            omega: base.omega.axpy(h, &k.omega),
            family: base.family.with_members(
                base.family
                    .members()
                    .iter()
                    .zip(&k.family)
                    .map(|(x, dx)| x.axpy(h, dx))
                    .collect(),
            ),
            pi_cache: Some(k.pi.clone()),
        };
        self.check_finite(&s)?;
        Ok(s)
    }

    fn check_finite(&self, s: &StratifiedState) -> Result<()> {
        if s.is_finite() {
            return Ok(());
        }
        Err(Error::IntegrationFailure {
            t: s.t,
            reason: dump(s),
        })
    }
}

/// One-line description of which fields went non-finite.
fn dump(s: &StratifiedState) -> String {
    let mut bad = Vec::new();
    if !s.rho.is_finite() {
        bad.push("rho".to_string());
    }
    if !s.omega.is_finite() {
        bad.push("omega".to_string());
    }
    for (l, x) in s.family.members().iter().enumerate() {
        if !x.is_finite() {
            bad.push(format!("X[{l}]"));
        }
    }
    format!(
        "non-finite values in {}; |rho|_2 = {:.3e}, |omega|_2 = {:.3e}",
        bad.join(", "),
        s.rho.l2_norm(),
        s.omega.l2_norm()
    )
}
