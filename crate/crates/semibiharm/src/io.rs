//! Columnar CSV output with JSON metadata sidecars and run manifests.
//!
//! Every CSV sits beside a `.meta.json` sidecar carrying the information the
//! columns cannot (target space, periodicity, grid geometry); readers require
//! the sidecar. Floats are printed with 17 significant digits, so files
//! round-trip bit-for-bit through `f64`.

use crate::curve::CurveGrid;
use crate::error::{Error, Result};
use crate::geometry::{AmbientVector, ModelSpace};
use crate::plane::PlaneField;
use crate::radial::RadialProfile;
use crate::report::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// 17 significant digits: the shortest fixed format that is injective on f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveMeta {
    pub schema_version: u32,
    pub space: ModelSpace,
    pub periodic: bool,
    pub ds: f64,
    pub n_nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialMeta {
    pub schema_version: u32,
    pub dim: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub n_nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneMeta {
    pub schema_version: u32,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub x0: f64,
    pub y0: f64,
}

fn write_sidecar<T: Serialize>(csv: &Path, meta: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(sidecar_path(csv), text)?;
    Ok(())
}

fn read_sidecar<T: for<'de> Deserialize<'de>>(csv: &Path) -> Result<T> {
    let side = sidecar_path(csv);
    let text = fs::read_to_string(&side).map_err(|e| {
        Error::Parse(format!("missing metadata sidecar {}: {e}", side.display()))
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_curve_csv(path: &Path, grid: &CurveGrid) -> Result<()> {
    let dim = grid.dim();
    let mut out = String::from("s");
    for c in 0..dim {
        out.push_str(&format!(",x{c}"));
    }
    out.push('\n');
    for (i, p) in grid.points.iter().enumerate() {
        out.push_str(&fmt_f64(i as f64 * grid.ds));
        for v in &p.0 {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    write_sidecar(
        path,
        &CurveMeta {
            schema_version: SCHEMA_VERSION,
            space: grid.space,
            periodic: grid.periodic,
            ds: grid.ds,
            n_nodes: grid.len(),
        },
    )
}

fn parse_f64(tok: &str, path: &Path, line: usize) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| {
        Error::Parse(format!(
            "{} line {line}: not a number: {tok:?}",
            path.display()
        ))
    })
}

pub fn read_curve_csv(path: &Path) -> Result<CurveGrid> {
    // read the data first so a missing input is an I/O error, while a
    // missing sidecar next to existing data stays a validation problem
    let text = fs::read_to_string(path)?;
    let meta: CurveMeta = read_sidecar(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let cols = header.split(',').count();
    if cols < 2 || !header.starts_with("s,") {
        return Err(Error::Parse(format!(
            "{}: expected header s,x0,...; got {header:?}",
            path.display()
        )));
    }
    let mut points = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != cols {
            return Err(Error::Parse(format!(
                "{} line {}: expected {cols} columns, got {}",
                path.display(),
                ln + 1,
                toks.len()
            )));
        }
        let mut coords = Vec::with_capacity(cols - 1);
        for tok in &toks[1..] {
            coords.push(parse_f64(tok, path, ln + 1)?);
        }
        points.push(AmbientVector(coords));
    }
    if points.len() != meta.n_nodes {
        return Err(Error::Parse(format!(
            "{}: sidecar promises {} nodes, file has {}",
            path.display(),
            meta.n_nodes,
            points.len()
        )));
    }
    CurveGrid::new(points, meta.ds, meta.periodic, meta.space)
}

pub fn write_radial_csv(path: &Path, profile: &RadialProfile) -> Result<()> {
    let mut out = String::from("r,f\n");
    for i in 0..profile.len() {
        out.push_str(&fmt_f64(profile.r(i)));
        out.push(',');
        out.push_str(&fmt_f64(profile.values[i]));
        out.push('\n');
    }
    fs::write(path, out)?;
    write_sidecar(
        path,
        &RadialMeta {
            schema_version: SCHEMA_VERSION,
            dim: profile.dim,
            r_min: profile.r_min,
            r_max: profile.r_max,
            n_nodes: profile.len(),
        },
    )
}

pub fn read_radial_csv(path: &Path) -> Result<RadialProfile> {
    let text = fs::read_to_string(path)?;
    let meta: RadialMeta = read_sidecar(path)?;
    let mut values = Vec::new();
    for (ln, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 2 {
            return Err(Error::Parse(format!(
                "{} line {}: expected r,f",
                path.display(),
                ln + 1
            )));
        }
        values.push(parse_f64(toks[1], path, ln + 1)?);
    }
    if values.len() != meta.n_nodes {
        return Err(Error::Parse(format!(
            "{}: sidecar promises {} nodes, file has {}",
            path.display(),
            meta.n_nodes,
            values.len()
        )));
    }
    RadialProfile::new(meta.r_min, meta.r_max, values, meta.dim)
}

pub fn write_plane_csv(path: &Path, field: &PlaneField) -> Result<()> {
    let mut out = String::from("x,y,f\n");
    for j in 0..field.ny {
        for i in 0..field.nx {
            out.push_str(&fmt_f64(field.x0 + i as f64 * field.hx));
            out.push(',');
            out.push_str(&fmt_f64(field.y0 + j as f64 * field.hy));
            out.push(',');
            out.push_str(&fmt_f64(field.at(i, j)));
            out.push('\n');
        }
    }
    fs::write(path, out)?;
    write_sidecar(
        path,
        &PlaneMeta {
            schema_version: SCHEMA_VERSION,
            nx: field.nx,
            ny: field.ny,
            hx: field.hx,
            hy: field.hy,
            x0: field.x0,
            y0: field.y0,
        },
    )
}

/// Reproducibility record written next to every CLI output. The timestamp is
/// taken from `SEMIBIHARM_TIMESTAMP` when set and omitted otherwise, so that
/// identical invocations produce byte-identical files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub subcommand: String,
    pub flags: BTreeMap<String, String>,
    pub seed: u64,
    pub grid_sizes: Vec<usize>,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            subcommand: subcommand.to_string(),
            flags: BTreeMap::new(),
            seed,
            grid_sizes: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::env::var("SEMIBIHARM_TIMESTAMP").ok(),
        }
    }

    pub fn flag(mut self, key: &str, value: impl ToString) -> Self {
        self.flags.insert(key.to_string(), value.to_string());
        self
    }

    pub fn grids(mut self, grids: &[usize]) -> Self {
        self.grid_sizes = grids.to_vec();
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}
