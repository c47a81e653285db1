use std::f64::consts::E;

use serde::Serialize;

use super::lifespan::LifespanInputs;
use super::norms::{div_along_norm, lipschitz_audit, nondegeneracy, striated_norm, striation_along, tilde_norm};
use super::patch::patch_interior_holder;
use crate::dynamics::{grad_velocity, StratifiedState};
use crate::error::{Error, Result};
use crate::grid::{SpectralField, VectorField};
use crate::ladder::{lebesgue_norm, lebesgue_norm_samples, DyadicLadder};
use crate::markers::FlowMarkers;
use crate::para::derive_along;
use crate::pressure::pressure_residual;

/// Column order of [`DiagnosticsRecord::csv_row`].
pub const CSV_COLUMNS: [&str; 25] = [
    "t",
    "L",
    "A",
    "Gamma",
    "S",
    "S_div",
    "R",
    "Theta",
    "U",
    "I_X",
    "rho_min",
    "rho_max",
    "omega_l2",
    "omega_l4",
    "omega_linf",
    "div_x_linf",
    "cz_ratio_2",
    "cz_ratio_4",
    "cz_ratio_8",
    "lipschitz_lhs",
    "lipschitz_rhs",
    "lipschitz_ratio",
    "pressure_residual",
    "pressure_iterations",
    "patch_interior_holder",
];

/// One time sample of every tracked quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l: f64,
    pub a: f64,
    pub gamma: f64,
    /// `max_λ ‖∂_{X_λ} ω‖_{C^{ε−1}}`.
    pub s: f64,
    /// `max_λ ‖div(ω X_λ)‖_{C^{ε−1}}`.
    pub s_div: f64,
    pub r: f64,
    pub theta: f64,
    /// Accumulated `∫ ‖∇u‖_{L^∞} dt`.
    pub u_integral: f64,
    pub i_x: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub omega_l2: f64,
    pub omega_l4: f64,
    pub omega_linf: f64,
    /// `max_λ ‖div X_λ‖_{L^∞}`.
    pub div_x_linf: f64,
    /// `cz_ratio_q` for `q = 2, 4, 8`.
    pub cz_ratios: [f64; 3],
    pub lipschitz_lhs: f64,
    pub lipschitz_rhs: f64,
    pub lipschitz_ratio: f64,
    pub pressure_residual: f64,
    pub pressure_iterations: usize,
    pub patch_interior_holder: Option<f64>,
}

impl DiagnosticsRecord {
    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    /// RFC-4180 row; an absent patch quotient is an empty field.
    pub fn csv_row(&self) -> String {
        let mut cells: Vec<String> = [
            self.t,
            self.l,
            self.a,
            self.gamma,
            self.s,
            self.s_div,
            self.r,
            self.theta,
            self.u_integral,
            self.i_x,
            self.rho_min,
            self.rho_max,
            self.omega_l2,
            self.omega_l4,
            self.omega_linf,
            self.div_x_linf,
            self.cz_ratios[0],
            self.cz_ratios[1],
            self.cz_ratios[2],
            self.lipschitz_lhs,
            self.lipschitz_rhs,
            self.lipschitz_ratio,
            self.pressure_residual,
        ]
        .iter()
        .map(|v| v.to_string())
        .collect();
        cells.push(self.pressure_iterations.to_string());
        cells.push(self.patch_interior_holder.map(|v| v.to_string()).unwrap_or_default());
        cells.join(",")
    }

    pub fn is_finite(&self) -> bool {
        let scalars = [
            self.t,
            self.l,
            self.a,
            self.gamma,
            self.s,
            self.s_div,
            self.r,
            self.theta,
            self.u_integral,
            self.i_x,
            self.rho_min,
            self.rho_max,
            self.lipschitz_lhs,
            self.lipschitz_rhs,
            self.lipschitz_ratio,
            self.pressure_residual,
        ];
        scalars.iter().chain(&self.cz_ratios).all(|v| v.is_finite())
            && self.patch_interior_holder.map_or(true, f64::is_finite)
    }

    /// Initial-data inputs of the lifespan bound taken from this record and
    /// the striated norm of the same state.
    pub fn lifespan_inputs(&self, striated: f64, delta: f64, c: f64, p: f64, q: f64) -> LifespanInputs {
        LifespanInputs {
            l0: self.l,
            a0: self.a,
            s0: striated,
            gamma0: self.gamma,
            r0: self.r,
            delta,
            c,
            p,
            q,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    pub p: f64,
    pub q: f64,
    pub u_integral: f64,
    pub pressure_iterations: usize,
    /// Margin in grid cells for the patch-interior quotient.
    pub margin: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            p: 4.0,
            q: 4.0,
            u_integral: 0.0,
            pressure_iterations: 0,
            margin: 3.0,
        }
    }
}

/// Pointwise Frobenius norm of `∇u`.
fn grad_magnitude(du: &[[SpectralField; 2]; 2]) -> Vec<f64> {
    let phys: Vec<Vec<f64>> = du.iter().flatten().map(|d| d.physical()).collect();
    (0..phys[0].len())
        .map(|i| phys.iter().map(|p| p[i] * p[i]).sum::<f64>().sqrt())
        .collect()
}

/// `Θ = L log(e + S/L)`, with the log factor clamped at one and `Θ = 0` when `L = 0`.
pub(crate) fn theta(l: f64, s: f64) -> f64 {
    if l == 0.0 {
        0.0
    } else {
        l * (E + s / l).ln().max(1.0)
    }
}

/// Samples every diagnostic of `state`. The patch-interior quotient is
/// computed only when `markers` are supplied.
pub fn timeseries_sample(
    ladder: &DyadicLadder,
    state: &StratifiedState,
    opts: &SampleOptions,
    markers: Option<&FlowMarkers>,
) -> Result<DiagnosticsRecord> {
    let family = &state.family;
    let eps = family.epsilon();
    let omega = &state.omega;
    let u = state.velocity();
    let du = grad_velocity(omega);

    let omega_q = lebesgue_norm(omega, opts.q);
    let omega_inf = lebesgue_norm(omega, f64::INFINITY);
    let l = lebesgue_norm_samples(&u.magnitude(), opts.p) + omega_q.max(omega_inf);
    let a = state.rho.gradient().magnitude().into_iter().fold(0.0, f64::max);
    let gamma = family
        .members()
        .iter()
        .map(|x| tilde_norm(ladder, x, eps))
        .try_fold(0.0, |m: f64, v| v.map(|v| m.max(v)))?;
    let s = striation_along(ladder, omega, family)?;
    let s_div = div_along_norm(ladder, omega, family)?;
    let r = density_striation(ladder, &state.rho.gradient(), family)?;

    let rho_phys = state.rho.physical();
    let gm = grad_magnitude(&du);
    let cz = [2.0, 4.0, 8.0].map(|q| {
        let w = lebesgue_norm(omega, q);
        if w == 0.0 {
            0.0
        } else {
            lebesgue_norm_samples(&gm, q) * (q - 1.0) / (q * q * w)
        }
    });
    let lip = lipschitz_audit(ladder, omega, family, opts.q)?;
    let residual = match &state.pi_cache {
        Some(pi) => pressure_residual(&state.rho, &u, pi)?,
        None => f64::NAN,
    };
    // a curve enclosing too few grid points has no quotient to report
    let patch = match markers.map(|m| patch_interior_holder(omega, m, eps, opts.margin)) {
        Some(Ok(v)) => Some(v),
        Some(Err(Error::InsufficientInterior { .. })) | None => None,
        Some(Err(e)) => return Err(e),
    };

    Ok(DiagnosticsRecord {
        t: state.t,
        l,
        a,
        gamma,
        s,
        s_div,
        r,
        theta: theta(l, s),
        u_integral: opts.u_integral,
        i_x: nondegeneracy(family),
        rho_min: rho_phys.iter().copied().fold(f64::INFINITY, f64::min),
        rho_max: rho_phys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        omega_l2: lebesgue_norm(omega, 2.0),
        omega_l4: lebesgue_norm(omega, 4.0),
        omega_linf: omega_inf,
        div_x_linf: family
            .members()
            .iter()
            .map(|x| lebesgue_norm(&x.divergence(), f64::INFINITY))
            .fold(0.0, f64::max),
        cz_ratios: cz,
        lipschitz_lhs: lip.lhs,
        lipschitz_rhs: lip.rhs_shape,
        lipschitz_ratio: lip.ratio,
        pressure_residual: residual,
        pressure_iterations: opts.pressure_iterations,
        patch_interior_holder: patch,
    })
}

/// `max_λ max_i ‖∂_{X_λ} ∂_iρ‖_{C^{ε−1}}`.
fn density_striation(
    ladder: &DyadicLadder,
    grad_rho: &VectorField,
    family: &crate::family::VectorFieldFamily,
) -> Result<f64> {
    let s = family.epsilon() - 1.0;
    let mut best: f64 = 0.0;
    for x in family.members() {
        for c in grad_rho.components() {
            best = best.max(ladder.holder_norm(&derive_along(c, x)?, s)?);
        }
    }
    Ok(best)
}

/// Striated norm of the vorticity, the `S0` entry of the lifespan inputs.
pub fn vorticity_striated_norm(ladder: &DyadicLadder, state: &StratifiedState) -> Result<f64> {
    striated_norm(ladder, &state.omega, &state.family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::VectorFieldFamily;
    use crate::grid::GridSpec;

    fn state(omega: SpectralField) -> StratifiedState {
        let g = *omega.grid();
        let fam = VectorFieldFamily::new(vec![VectorField::constant(g, &[1.0, 0.0]).unwrap()], 0.5).unwrap();
        StratifiedState::new(SpectralField::constant(g, 1.0), omega, fam).unwrap()
    }

    #[test]
    fn quiet_state() {
        let g = GridSpec::square(32).unwrap();
        let ladder = DyadicLadder::build(g).unwrap();
        let r = timeseries_sample(&ladder, &state(SpectralField::zeros(g)), &SampleOptions::default(), None).unwrap();
        assert_eq!((r.l, r.a, r.theta, r.s), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.i_x, 1.0);
        assert_eq!(r.cz_ratios, [0.0; 3]);
    }

    #[test]
    fn taylor_green_record() {
        let g = GridSpec::square(32).unwrap();
        let ladder = DyadicLadder::build(g).unwrap();
        let s = state(SpectralField::from_fn2(g, |x, y| 2.0 * x.sin() * y.sin()));
        let r = timeseries_sample(&ladder, &s, &SampleOptions::default(), None).unwrap();
        assert!((r.gamma - 2f64.powf(-0.5)).abs() < 1e-14);
        assert_eq!(r.i_x, 1.0);
        assert!(r.theta >= r.l);
        assert_eq!(r.csv_row().split(',').count(), CSV_COLUMNS.len());
    }

    #[test]
    fn theta_never_below_l() {
        for (l, s) in [(1.0, 0.0), (1e-300, 0.0), (3.0, 1e-17), (2.0, 5.0)] {
            assert!(theta(l, s) >= l);
        }
        assert_eq!(theta(0.0, 3.0), 0.0);
    }
}
