//! Run configuration: a TOML file with one table per concern. Unknown keys
//! are rejected so that a mistyped tolerance cannot pass silently.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stria_core::{DensityBounds, EllipticConfig, EllipticMethod, GridSpec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Constraint {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 128, length: 2.0 * PI }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_end: f64,
    pub courant: f64,
    pub dt_max: f64,
    /// Fixed step; when absent the step follows the CFL rule.
    pub dt: Option<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            courant: 0.5,
            dt_max: 0.05,
            dt: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub rho_star: f64,
    pub rho_star_upper: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            rho_star: 0.5,
            rho_star_upper: 2.0,
        }
    }
}

/// Members of the striation family; an empty list selects the scenario default.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemberSpec {
    UnitX,
    UnitY,
    /// `(−∂_yφ, ∂_xφ)` for the patch level-set function `φ`.
    LevelSetTangent,
    /// `g(φ)·(1, 0)` with `g` vanishing across the vorticity layer.
    LayerCutoff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    pub epsilon: f64,
    pub members: Vec<MemberSpec>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            members: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EllipticSection {
    pub tol: f64,
    pub max_iter: usize,
    pub method: EllipticMethod,
    /// Exponent `δ > 1` of the density factor in the lifespan bound.
    pub delta: f64,
}

impl Default for EllipticSection {
    fn default() -> Self {
        let e = EllipticConfig::default();
        Self {
            tol: e.tol,
            max_iter: e.max_iter,
            method: e.method,
            delta: 1.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    TaylorGreen,
    VortexPatch,
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioName::TaylorGreen => "taylor-green",
            ScenarioName::VortexPatch => "vortex-patch",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    /// Density modulation `ρ = 1 + amp·cos x` (Taylor-Green).
    #[serde(default)]
    pub amp: f64,
    /// Radius of the marker circle around the vortex centre (Taylor-Green).
    #[serde(default = "default_marker_radius")]
    pub marker_radius: f64,
    #[serde(default = "default_markers")]
    pub markers: usize,
    /// Half-extents of the patch along x and y.
    #[serde(default = "default_semi_axes")]
    pub semi_axes: [f64; 2],
    #[serde(default = "default_center")]
    pub center: [f64; 2],
    /// Erfc scale of the smoothed patch edge, in grid cells.
    #[serde(default = "default_width")]
    pub width_cells: f64,
    /// Accept widths below two cells (resolution probes only).
    #[serde(default)]
    pub force_width: bool,
    #[serde(default = "default_vorticity")]
    pub vorticity: f64,
    #[serde(default = "default_rho_inside")]
    pub rho_inside: f64,
    #[serde(default = "default_rho_outside")]
    pub rho_outside: f64,
    /// L² size of a smooth deterministic perturbation added to ρ and ω.
    #[serde(default)]
    pub perturbation: f64,
}

fn default_marker_radius() -> f64 {
    0.5
}
fn default_markers() -> usize {
    128
}
fn default_semi_axes() -> [f64; 2] {
    [1.6, 1.4]
}
fn default_center() -> [f64; 2] {
    [PI, PI]
}
fn default_width() -> f64 {
    3.0
}
fn default_vorticity() -> f64 {
    1.0
}
fn default_rho_inside() -> f64 {
    2.0
}
fn default_rho_outside() -> f64 {
    1.0
}

impl ScenarioConfig {
    pub fn named(name: ScenarioName) -> Self {
        Self {
            name,
            amp: 0.0,
            marker_radius: default_marker_radius(),
            markers: default_markers(),
            semi_axes: default_semi_axes(),
            center: default_center(),
            width_cells: default_width(),
            force_width: false,
            vorticity: default_vorticity(),
            rho_inside: default_rho_inside(),
            rho_outside: default_rho_outside(),
            perturbation: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub snapshot_stride: usize,
    pub record_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            snapshot_stride: 100,
            record_stride: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub p: f64,
    pub q: f64,
    /// Margin of the patch-interior quotient, in grid cells.
    pub margin: f64,
    /// Calibration constant of the lifespan bound.
    pub lifespan_c: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            p: 4.0,
            q: 4.0,
            margin: 3.0,
            lifespan_c: 1.0,
        }
    }
}

/// Fault injection used by tests of the failure paths.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HooksConfig {
    /// Before this step, a negative dip is written into ρ.
    pub negative_density_at_step: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub elliptic: EllipticSection,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub hooks: HooksConfig,
}

/// A constraint failure keyed by `section.key`.
struct Violation {
    key: &'static str,
    message: String,
}

fn violation(key: &'static str, message: impl Into<String>) -> Violation {
    Violation {
        key,
        message: message.into(),
    }
}

impl RunConfig {
    pub fn new(scenario: ScenarioName) -> Self {
        Self {
            seed: 0,
            grid: GridConfig::default(),
            time: TimeConfig::default(),
            physics: PhysicsConfig::default(),
            family: FamilyConfig::default(),
            elliptic: EllipticSection::default(),
            scenario: ScenarioConfig::named(scenario),
            outputs: OutputConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
            hooks: HooksConfig::default(),
        }
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.check().map_err(|v| ConfigError::Constraint {
            path: path.to_path_buf(),
            line: locate(text, v.key),
            message: v.message,
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.check().map_err(|v| ConfigError::Constraint {
            path: PathBuf::from("<config>"),
            line: None,
            message: v.message,
        })
    }

    fn check(&self) -> Result<(), Violation> {
        let n = self.grid.n;
        if n < 16 || !n.is_power_of_two() {
            return Err(violation("grid.n", format!("grid.n = {n} must be a power of two >= 16")));
        }
        if !(self.grid.length > 0.0 && self.grid.length.is_finite()) {
            return Err(violation("grid.length", "grid.length must be positive"));
        }
        let t = &self.time;
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return Err(violation("time.t_end", "time.t_end must be finite and >= 0"));
        }
        if !(t.courant > 0.0 && t.courant <= 1.0) {
            return Err(violation("time.courant", format!("time.courant = {} must lie in (0, 1]", t.courant)));
        }
        if !(t.dt_max > 0.0) {
            return Err(violation("time.dt_max", "time.dt_max must be > 0"));
        }
        if let Some(dt) = t.dt {
            if !(dt > 0.0) {
                return Err(violation("time.dt", "time.dt must be > 0"));
            }
        }
        let p = &self.physics;
        if !(p.rho_star > 0.0) {
            return Err(violation(
                "physics.rho_star",
                format!("physics.rho_star = {} violates 0 < rho_star", p.rho_star),
            ));
        }
        if p.rho_star > p.rho_star_upper {
            return Err(violation(
                "physics.rho_star",
                format!(
                    "physics.rho_star = {} exceeds physics.rho_star_upper = {}",
                    p.rho_star, p.rho_star_upper
                ),
            ));
        }
        let eps = self.family.epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(violation(
                "family.epsilon",
                format!("family.epsilon = {eps} violates the hypothesis ε ∈ ]0,1["),
            ));
        }
        let e = &self.elliptic;
        if !(e.tol > 0.0) {
            return Err(violation("elliptic.tol", "elliptic.tol must be > 0"));
        }
        if e.max_iter < 1 {
            return Err(violation("elliptic.max_iter", "elliptic.max_iter must be >= 1"));
        }
        if !(e.delta > 1.0) {
            return Err(violation("elliptic.delta", "elliptic.delta must exceed 1"));
        }
        let d = &self.diagnostics;
        if !(d.p > 2.0) {
            return Err(violation("diagnostics.p", "diagnostics.p must lie in ]2, inf]"));
        }
        if !(d.q >= 2.0 && d.q.is_finite()) {
            return Err(violation("diagnostics.q", "diagnostics.q must lie in [2, inf["));
        }
        if 1.0 / d.p + 1.0 / d.q < 0.5 {
            return Err(violation("diagnostics.q", "diagnostics.p and diagnostics.q need 1/p + 1/q >= 1/2"));
        }
        if !(d.margin > 0.0) {
            return Err(violation("diagnostics.margin", "diagnostics.margin must be > 0"));
        }
        if !(d.lifespan_c > 0.0) {
            return Err(violation("diagnostics.lifespan_c", "diagnostics.lifespan_c must be > 0"));
        }
        if self.outputs.snapshot_stride == 0 {
            return Err(violation("outputs.snapshot_stride", "outputs.snapshot_stride must be >= 1"));
        }
        if self.outputs.record_stride == 0 {
            return Err(violation("outputs.record_stride", "outputs.record_stride must be >= 1"));
        }
        let s = &self.scenario;
        if !(s.perturbation >= 0.0) {
            return Err(violation("scenario.perturbation", "scenario.perturbation must be >= 0"));
        }
        if s.markers < 3 && s.name == ScenarioName::VortexPatch {
            return Err(violation("scenario.markers", "scenario.markers must be >= 3"));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.grid.n, 2, self.grid.length).expect("validated grid")
    }

    pub fn bounds(&self) -> DensityBounds {
        DensityBounds::new(self.physics.rho_star, self.physics.rho_star_upper).expect("validated bounds")
    }

    pub fn elliptic_config(&self) -> EllipticConfig {
        EllipticConfig {
            tol: self.elliptic.tol,
            max_iter: self.elliptic.max_iter,
            method: self.elliptic.method,
        }
    }

    /// The configuration with every default filled in, as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_toml(&text, path)
}

/// 1-based line of `key` inside its `[section]`, if present in the text.
fn locate(text: &str, dotted: &str) -> Option<usize> {
    let (section, key) = dotted.split_once('.')?;
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse("[scenario]\nname = \"taylor-green\"\n").unwrap();
        assert_eq!(cfg, RunConfig::new(ScenarioName::TaylorGreen));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::new(ScenarioName::VortexPatch);
        assert_eq!(parse(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn inverted_bounds_name_both_keys() {
        let text = "[physics]\nrho_star = 3.0\nrho_star_upper = 2.0\n\n[scenario]\nname = \"vortex-patch\"\n";
        let err = parse(text).unwrap_err().to_string();
        assert!(err.contains("rho_star ") && err.contains("rho_star_upper"), "{err}");
        assert!(err.contains("test.toml:2"), "{err}");
    }

    #[test]
    fn epsilon_outside_unit_interval() {
        let text = "[family]\nepsilon = 1.2\n[scenario]\nname = \"vortex-patch\"\n";
        let err = parse(text).unwrap_err().to_string();
        assert!(err.contains("ε ∈ ]0,1["), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[scenario]\nname = \"taylor-green\"\n[elliptic]\ntoll = 1e-8\n";
        match parse(text) {
            Err(ConfigError::Parse { message, .. }) => {
                assert!(message.contains("toll"), "{message}");
                assert!(message.contains("line 4"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
