//! Initial states: the Taylor-Green cell and the smoothed vortex patch.

use std::f64::consts::SQRT_2;

use stria_core::{
    FlowMarkers, GridSpec, SpectralField, StratifiedState, VectorField, VectorFieldFamily,
};
use thiserror::Error;

use crate::config::{MemberSpec, RunConfig, ScenarioName};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario.amp = {amp} must satisfy |amp| < physics.rho_star = {rho_star}")]
    Amplitude { amp: f64, rho_star: f64 },

    #[error("scenario.width_cells = {0} is below the two-cell resolution limit (set force_width to probe it)")]
    UnderResolved(f64),

    #[error("patch extends to within {cells:.2} cells of the box edge along axis {axis}; 5 cells are required")]
    TouchesBoundary { axis: usize, cells: f64 },

    #[error("{0}")]
    Geometry(String),

    #[error("family member {0:?} is only defined for the vortex-patch scenario")]
    Member(MemberSpec),

    #[error(transparent)]
    Core(#[from] stria_core::Error),
}

/// A generated initial condition with its flow markers.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub state: StratifiedState,
    pub markers: FlowMarkers,
    pub patch: Option<PatchGeometry>,
}

pub fn build(cfg: &RunConfig) -> Result<Scenario, ScenarioError> {
    match cfg.scenario.name {
        ScenarioName::TaylorGreen => taylor_green(cfg),
        ScenarioName::VortexPatch => vortex_patch(cfg),
    }
}

fn perturb(field: &SpectralField, size: f64, f: impl Fn(f64, f64) -> f64) -> SpectralField {
    if size == 0.0 {
        return field.clone();
    }
    let g = *field.grid();
    let k = g.wavenumber_unit();
    field + &SpectralField::from_fn2(g, |x, y| size * f(k * x, k * y))
}

/// Adds the deterministic perturbations `δ√2 cos(x + 2y)` to ρ and
/// `δ√2 sin(2x − y)` to ω; each has L² norm `δ`.
fn perturbed(rho: SpectralField, omega: SpectralField, size: f64) -> (SpectralField, SpectralField) {
    (
        perturb(&rho, size, |x, y| SQRT_2 * (x + 2.0 * y).cos()),
        perturb(&omega, size, |x, y| SQRT_2 * (2.0 * x - y).sin()),
    )
}

fn constant_member(g: GridSpec, spec: MemberSpec) -> Result<VectorField, ScenarioError> {
    match spec {
        MemberSpec::UnitX => Ok(VectorField::constant(g, &[1.0, 0.0])?),
        MemberSpec::UnitY => Ok(VectorField::constant(g, &[0.0, 1.0])?),
        other => Err(ScenarioError::Member(other)),
    }
}

/// `ω = 2 sin x sin y`, `ρ = 1 + amp·cos x`, markers on a circle around the
/// cell centre.
pub fn taylor_green(cfg: &RunConfig) -> Result<Scenario, ScenarioError> {
    let s = &cfg.scenario;
    if s.amp.abs() >= cfg.physics.rho_star {
        return Err(ScenarioError::Amplitude {
            amp: s.amp,
            rho_star: cfg.physics.rho_star,
        });
    }
    let g = cfg.grid_spec();
    let k = g.wavenumber_unit();
    let omega = SpectralField::from_fn2(g, |x, y| 2.0 * (k * x).sin() * (k * y).sin());
    let rho = SpectralField::from_fn2(g, |x, _| 1.0 + s.amp * (k * x).cos());
    let (rho, omega) = perturbed(rho, omega, s.perturbation);
    let specs = if cfg.family.members.is_empty() {
        vec![MemberSpec::UnitX]
    } else {
        cfg.family.members.clone()
    };
    let members = specs
        .into_iter()
        .map(|m| constant_member(g, m))
        .collect::<Result<Vec<_>, _>>()?;
    let family = VectorFieldFamily::new(members, cfg.family.epsilon)?;
    let c = g.length() / 4.0;
    let markers = FlowMarkers::new(
        (0..s.markers)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / s.markers as f64;
                [c + s.marker_radius * t.cos(), c + s.marker_radius * t.sin()]
            })
            .collect(),
    );
    Ok(Scenario {
        state: StratifiedState::new(rho, omega, family)?,
        markers,
        patch: None,
    })
}

/// Periodic elliptical level set
/// `φ = sin²(κ(x−c_x))/sin²(κA) + sin²(κ(y−c_y))/sin²(κB) − 1`, `κ = π/L`,
/// which crosses zero exactly at `c ± A` and `c ± B` on the axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchGeometry {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    pub kappa: f64,
    /// Erfc scale of the edge, physical units.
    pub sigma: f64,
    /// The same scale in units of `φ`.
    pub w: f64,
    /// Level of the nearest saddle of `φ` outside the patch.
    pub saddle: f64,
    /// Centres of the inner and outer transitions of the cutoff `g(φ)`.
    pub cutoff_levels: [f64; 2],
    pub cutoff_width: f64,
}

/// Transition width of the cutoff, in units of `φ`.
const CUTOFF_WIDTH: f64 = 0.08;

impl PatchGeometry {
    fn denominators(&self) -> [f64; 2] {
        [
            (self.kappa * self.semi_axes[0]).sin().powi(2),
            (self.kappa * self.semi_axes[1]).sin().powi(2),
        ]
    }

    pub fn phi(&self, x: f64, y: f64) -> f64 {
        let [da, db] = self.denominators();
        let sx = (self.kappa * (x - self.center[0])).sin();
        let sy = (self.kappa * (y - self.center[1])).sin();
        sx * sx / da + sy * sy / db - 1.0
    }

    pub fn grad_phi(&self, x: f64, y: f64) -> [f64; 2] {
        let [da, db] = self.denominators();
        let k = self.kappa;
        [
            k * (2.0 * k * (x - self.center[0])).sin() / da,
            k * (2.0 * k * (y - self.center[1])).sin() / db,
        ]
    }

    /// Smoothed indicator `½ erfc(φ / w)` of the patch.
    pub fn profile(&self, x: f64, y: f64) -> f64 {
        0.5 * libm::erfc(self.phi(x, y) / self.w)
    }

    /// `g(φ)`: close to one near the patch centre and beyond the layer's
    /// outer tail, negligible across the layer itself.
    pub fn cutoff(&self, x: f64, y: f64) -> f64 {
        let p = self.phi(x, y);
        let [inner, outer] = self.cutoff_levels;
        0.5 * libm::erfc((p - inner) / self.cutoff_width) + 0.5 * libm::erfc((outer - p) / self.cutoff_width)
    }

    /// Point on `φ = 0` in direction `theta` from the centre, by bisection
    /// along the ray (φ increases monotonically along it).
    pub fn boundary_point(&self, theta: f64) -> [f64; 2] {
        let dir = [theta.cos(), theta.sin()];
        let at = |r: f64| self.phi(self.center[0] + r * dir[0], self.center[1] + r * dir[1]);
        let (mut lo, mut hi) = (0.0, self.semi_axes[0].max(self.semi_axes[1]) * 1.000001);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let r = 0.5 * (lo + hi);
        [self.center[0] + r * dir[0], self.center[1] + r * dir[1]]
    }
}

fn patch_geometry(cfg: &RunConfig, g: &GridSpec) -> Result<PatchGeometry, ScenarioError> {
    let s = &cfg.scenario;
    let l = g.length();
    let h = g.spacing();
    if !(s.width_cells > 0.0) || (s.width_cells < 2.0 && !s.force_width) {
        return Err(ScenarioError::UnderResolved(s.width_cells));
    }
    for axis in 0..2 {
        let (c, a) = (s.center[axis], s.semi_axes[axis]);
        if !(a > 0.0) {
            return Err(ScenarioError::Geometry(format!("scenario.semi_axes[{axis}] must be > 0")));
        }
        let gap = (c - a).min(l - (c + a));
        if gap < 5.0 * h {
            return Err(ScenarioError::TouchesBoundary { axis, cells: gap / h });
        }
    }
    let kappa = std::f64::consts::PI / l;
    let mut geo = PatchGeometry {
        center: s.center,
        semi_axes: s.semi_axes,
        kappa,
        sigma: s.width_cells * h,
        w: 1.0,
        saddle: 0.0,
        cutoff_levels: [0.0; 2],
        cutoff_width: CUTOFF_WIDTH,
    };
    // the thinnest part of the layer sits where |∇φ| peaks on the boundary
    let gmax = (0..512)
        .map(|i| {
            let p = geo.boundary_point(std::f64::consts::TAU * i as f64 / 512.0);
            let d = geo.grad_phi(p[0], p[1]);
            d[0].hypot(d[1])
        })
        .fold(0.0, f64::max);
    let [da, db] = geo.denominators();
    geo.w = geo.sigma * gmax;
    geo.saddle = (1.0 / da).min(1.0 / db) - 1.0;
    geo.cutoff_levels = [-0.75, (geo.saddle - 0.2).min(0.75)];
    if geo.w > 0.3 {
        return Err(ScenarioError::Geometry(format!(
            "edge width {:.3} (in level-set units) is too wide for the patch; reduce width_cells or enlarge the patch",
            geo.w
        )));
    }
    if geo.cutoff_levels[1] < 0.3 {
        return Err(ScenarioError::Geometry(
            "patch is too large: the level set has a saddle next to the edge".into(),
        ));
    }
    Ok(geo)
}

/// Smoothed patch: `ω_0 = amp·F − mean`, `ρ_0 = ρ_e + (ρ_i − ρ_e)·F` with
/// `F = ½ erfc(φ/w)`, family `{(−∂_yφ, ∂_xφ), g(φ)·(1,0)}` by default and
/// markers on `φ = 0`.
pub fn vortex_patch(cfg: &RunConfig) -> Result<Scenario, ScenarioError> {
    let s = &cfg.scenario;
    let g = cfg.grid_spec();
    let geo = patch_geometry(cfg, &g)?;
    let omega = SpectralField::from_fn2(g, |x, y| s.vorticity * geo.profile(x, y));
    let rho = SpectralField::from_fn2(g, |x, y| s.rho_outside + (s.rho_inside - s.rho_outside) * geo.profile(x, y));
    let (rho, omega) = perturbed(rho, omega, s.perturbation);
    let specs = if cfg.family.members.is_empty() {
        vec![MemberSpec::LevelSetTangent, MemberSpec::LayerCutoff]
    } else {
        cfg.family.members.clone()
    };
    let members = specs
        .into_iter()
        .map(|m| match m {
            MemberSpec::LevelSetTangent => Ok(VectorField::new(vec![
                SpectralField::from_fn2(g, |x, y| -geo.grad_phi(x, y)[1]),
                SpectralField::from_fn2(g, |x, y| geo.grad_phi(x, y)[0]),
            ])?),
            MemberSpec::LayerCutoff => Ok(VectorField::new(vec![
                SpectralField::from_fn2(g, |x, y| geo.cutoff(x, y)),
                SpectralField::zeros(g),
            ])?),
            other => constant_member(g, other),
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let family = VectorFieldFamily::new(members, cfg.family.epsilon)?;
    let markers = FlowMarkers::new(
        (0..s.markers)
            .map(|i| geo.boundary_point(std::f64::consts::TAU * i as f64 / s.markers as f64))
            .collect(),
    );
    Ok(Scenario {
        state: StratifiedState::new(rho, omega, family)?,
        markers,
        patch: Some(geo),
    })
}
