//! Snapshot directories: `meta.json` plus one raw little-endian `f64` file
//! per array, row-major.
//!
//! Every field is written twice: physical samples (`<name>.f64`, shape
//! `[n, n]`) for plotting, and Fourier coefficients (`<name>.spec.f64`,
//! shape `[n, n, 2]`, real/imaginary interleaved) from which the state is
//! rebuilt bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use stria_core::{FlowMarkers, GridSpec, SpectralField, StratifiedState, VectorField, VectorFieldFamily};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed snapshot metadata in {path}: {message}")]
    Meta { path: PathBuf, message: String },

    #[error("snapshot format version {found}, this build reads version {expected}")]
    Version { found: u32, expected: u32 },

    #[error("array {file} is truncated: {got} bytes, expected {expected}")]
    Truncated { file: String, got: usize, expected: usize },

    #[error("array {file} has shape {got:?}, expected {expected:?}")]
    Shape {
        file: String,
        got: Vec<usize>,
        expected: Vec<usize>,
    },

    #[error(transparent)]
    Core(#[from] stria_core::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayMeta {
    pub name: String,
    pub file: String,
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub format_version: u32,
    pub t: f64,
    pub step: usize,
    pub n: usize,
    pub dim: usize,
    pub length: f64,
    pub epsilon: f64,
    pub family_size: usize,
    pub config_hash: String,
    /// Running `∫ sup|∇u| dt` of the run that wrote the snapshot.
    #[serde(default)]
    pub u_integral: f64,
    pub arrays: Vec<ArrayMeta>,
}

/// Raw contents of a snapshot directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub meta: SnapshotMeta,
    /// Arrays in the order listed by `meta.arrays`.
    pub arrays: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn array(&self, name: &str) -> Option<&[f64]> {
        self.meta
            .arrays
            .iter()
            .position(|a| a.name == name)
            .map(|i| self.arrays[i].as_slice())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SnapshotError + '_ {
    move |source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn spectral_values(f: &SpectralField) -> Vec<f64> {
    f.coeffs().iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Named fields of a state: `rho`, `omega`, optional `pi`, `X<λ>_<i>`.
fn named_fields(state: &StratifiedState) -> Vec<(String, &SpectralField)> {
    let mut out = vec![("rho".to_string(), &state.rho), ("omega".to_string(), &state.omega)];
    if let Some(pi) = &state.pi_cache {
        out.push(("pi".to_string(), pi));
    }
    for (l, x) in state.family.members().iter().enumerate() {
        for (i, c) in x.components().iter().enumerate() {
            out.push((format!("X{l}_{i}"), c));
        }
    }
    out
}

/// Builds the in-memory snapshot of a state and its markers.
pub fn capture(state: &StratifiedState, markers: &FlowMarkers, step: usize, config_hash: &str) -> Snapshot {
    let g = state.grid();
    let n = g.n();
    let mut metas = Vec::new();
    let mut arrays = Vec::new();
    for (name, f) in named_fields(state) {
        metas.push(ArrayMeta {
            name: name.clone(),
            file: format!("{name}.f64"),
            shape: vec![n, n],
        });
        arrays.push(f.to_physical_complex().iter().map(|c| c.re).collect());
        metas.push(ArrayMeta {
            name: format!("{name}.spec"),
            file: format!("{name}.spec.f64"),
            shape: vec![n, n, 2],
        });
        arrays.push(spectral_values(f));
    }
    let flat = |pts: &[[f64; 2]]| pts.iter().flat_map(|p| *p).collect::<Vec<f64>>();
    for (name, pts) in [("markers", &markers.positions), ("seeds", &markers.seeds)] {
        metas.push(ArrayMeta {
            name: name.to_string(),
            file: format!("{name}.f64"),
            shape: vec![pts.len(), 2],
        });
        arrays.push(flat(pts));
    }
    Snapshot {
        meta: SnapshotMeta {
            format_version: FORMAT_VERSION,
            t: state.t,
            step,
            n,
            dim: g.dim(),
            length: g.length(),
            epsilon: state.family.epsilon(),
            family_size: state.family.len(),
            config_hash: config_hash.to_string(),
            u_integral: 0.0,
            arrays: metas,
        },
        arrays,
    }
}

pub fn write_snapshot(snap: &Snapshot, dir: &Path) -> Result<(), SnapshotError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (meta, values) in snap.meta.arrays.iter().zip(&snap.arrays) {
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        let path = dir.join(&meta.file);
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    let meta_path = dir.join("meta.json");
    let text = serde_json::to_string_pretty(&snap.meta).expect("meta serializes");
    fs::write(&meta_path, text).map_err(io_err(&meta_path))
}

/// Reads every array before returning, so a damaged directory never yields
/// a partial snapshot.
pub fn read_snapshot(dir: &Path) -> Result<Snapshot, SnapshotError> {
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
    let meta: SnapshotMeta = serde_json::from_str(&text).map_err(|e| SnapshotError::Meta {
        path: meta_path.clone(),
        message: e.to_string(),
    })?;
    if meta.format_version != FORMAT_VERSION {
        return Err(SnapshotError::Version {
            found: meta.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let mut arrays = Vec::with_capacity(meta.arrays.len());
    for a in &meta.arrays {
        let path = dir.join(&a.file);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let expected = a.shape.iter().product::<usize>() * 8;
        if bytes.len() != expected {
            return Err(SnapshotError::Truncated {
                file: a.file.clone(),
                got: bytes.len(),
                expected,
            });
        }
        arrays.push(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect(),
        );
    }
    Ok(Snapshot { meta, arrays })
}

fn field(snap: &Snapshot, grid: GridSpec, name: &str) -> Result<Option<SpectralField>, SnapshotError> {
    let key = format!("{name}.spec");
    let Some(idx) = snap.meta.arrays.iter().position(|a| a.name == key) else {
        return Ok(None);
    };
    let expected = vec![grid.n(), grid.n(), 2];
    if snap.meta.arrays[idx].shape != expected {
        return Err(SnapshotError::Shape {
            file: snap.meta.arrays[idx].file.clone(),
            got: snap.meta.arrays[idx].shape.clone(),
            expected,
        });
    }
    let coeffs: Vec<Complex64> = snap.arrays[idx]
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    Ok(Some(SpectralField::from_coeffs(grid, coeffs, true)?))
}

fn required(snap: &Snapshot, grid: GridSpec, name: &str) -> Result<SpectralField, SnapshotError> {
    field(snap, grid, name)?.ok_or_else(|| SnapshotError::Meta {
        path: PathBuf::from("meta.json"),
        message: format!("missing array {name}"),
    })
}

fn points(snap: &Snapshot, name: &str) -> Result<Vec<[f64; 2]>, SnapshotError> {
    let values = snap.array(name).ok_or_else(|| SnapshotError::Meta {
        path: PathBuf::from("meta.json"),
        message: format!("missing array {name}"),
    })?;
    Ok(values.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
}

/// Rebuilds the state and markers stored in a snapshot.
pub fn restore(snap: &Snapshot) -> Result<(StratifiedState, FlowMarkers), SnapshotError> {
    let m = &snap.meta;
    let grid = GridSpec::new(m.n, m.dim, m.length)?;
    let mut members = Vec::with_capacity(m.family_size);
    for l in 0..m.family_size {
        let comps = (0..m.dim)
            .map(|i| required(snap, grid, &format!("X{l}_{i}")))
            .collect::<Result<Vec<_>, _>>()?;
        members.push(VectorField::new(comps)?);
    }
    let state = StratifiedState {
        t: m.t,
        rho: required(snap, grid, "rho")?,
        omega: required(snap, grid, "omega")?,
        family: VectorFieldFamily::new(members, m.epsilon)?,
        pi_cache: field(snap, grid, "pi")?,
    };
    let markers = FlowMarkers {
        seeds: points(snap, "seeds")?,
        positions: points(snap, "markers")?,
    };
    if markers.seeds.len() != markers.positions.len() {
        return Err(SnapshotError::Meta {
            path: PathBuf::from("meta.json"),
            message: "marker and seed counts differ".into(),
        });
    }
    Ok((state, markers))
}

/// What a run needs to continue from a snapshot.
#[derive(Clone, Debug)]
pub struct Resumed {
    pub state: StratifiedState,
    pub markers: FlowMarkers,
    pub step: usize,
    pub u_integral: f64,
    pub hash_matches: bool,
}

/// Reads a snapshot for resuming; a config-hash mismatch is logged and
/// reported, not fatal.
pub fn resume(dir: &Path, config_hash: &str) -> Result<Resumed, SnapshotError> {
    let snap = read_snapshot(dir)?;
    let hash_matches = snap.meta.config_hash == config_hash;
    if !hash_matches {
        log::warn!(
            "snapshot {} was written under config {}, resuming under {}",
            dir.display(),
            snap.meta.config_hash,
            config_hash
        );
    }
    let (state, markers) = restore(&snap)?;
    Ok(Resumed {
        state,
        markers,
        step: snap.meta.step,
        u_integral: snap.meta.u_integral,
        hash_matches,
    })
}
