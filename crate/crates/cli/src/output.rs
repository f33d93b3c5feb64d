//! CSV writers for grids, far fields and eigenvalues, and the run manifest.
//!
//! Grid files start with `#` comment lines (grid spec, wavenumber, problem
//! id) followed by `x1,x2,mask,re,im`; `mask` is `-1` outside every disk and
//! the disk index inside one. Far-field files hold
//! `theta_deg,re,im,rcs_db`, eigenvalue files `index,lambda,lambda_over_max`.
//! Floats are written in shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use multidisk::geometry::{Disk, DiskConfig};
use multidisk::postproc::{FarFieldCurve, FieldGrid};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, Result};

/// Shortest round-trip text for a float; exponent form outside
/// `[1e-4, 1e15)`.
pub fn float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_grid(path: &Path, grid: &FieldGrid<f64>, k: f64, problem: &str) -> Result<()> {
    let mut out = create(path)?;
    let s = &grid.spec;
    writeln!(
        out,
        "# grid x1={}:{}:{} x2={}:{}:{}",
        float(s.x1.0),
        float(s.x1.1),
        s.n1,
        float(s.x2.0),
        float(s.x2.1),
        s.n2
    )
    .and_then(|_| writeln!(out, "# k={}", float(k)))
    .and_then(|_| writeln!(out, "# problem={problem}"))
    .map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x1", "x2", "mask", "re", "im"])?;
    for ((x, v), m) in grid.nodes.iter().zip(&grid.values).zip(&grid.mask) {
        w.write_record([float(x[0]), float(x[1]), m.code().to_string(), float(v.re), float(v.im)])?;
    }
    finish(w, path)
}

pub fn write_far_field(path: &Path, curve: &FarFieldCurve<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["theta_deg", "re", "im", "rcs_db"])?;
    for ((t, a), r) in curve.angles.iter().zip(&curve.amplitudes).zip(&curve.rcs_db) {
        w.write_record([float(t.to_degrees()), float(a.re), float(a.im), float(*r)])?;
    }
    finish(w, path)
}

pub fn write_eigenvalues(path: &Path, eigenvalues: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["index", "lambda", "lambda_over_max"])?;
    let max = eigenvalues.first().copied().unwrap_or(0.0);
    for (i, l) in eigenvalues.iter().enumerate() {
        let ratio = if max > 0.0 { l / max } else { 0.0 };
        w.write_record([i.to_string(), float(*l), float(ratio)])?;
    }
    finish(w, path)
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub multidisk: &'static str,
    pub multidisk_cli: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            multidisk: multidisk::VERSION,
            multidisk_cli: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub method: String,
    pub converged: bool,
    pub residual: f64,
    pub iterations: Option<usize>,
    pub cycles: Option<usize>,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DortSummary {
    pub n_alpha: usize,
    pub significance: f64,
    pub significant: usize,
    pub eigenvalues: Vec<f64>,
    /// Focus-map maxima, one per written map.
    pub focus_peaks: Vec<[f64; 2]>,
}

/// Everything needed to reproduce a run. `created_unix` and the elapsed
/// times are the only fields that change between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub problem: String,
    pub versions: Versions,
    pub threads: usize,
    pub created_unix: u64,
    pub config: RunConfig,
    pub disks: Vec<Disk<f64>>,
    pub orders: Vec<usize>,
    pub unknowns: usize,
    pub solve: Option<SolveSummary>,
    pub dort: Option<DortSummary>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig, disks: &DiskConfig<f64>, orders: &[usize], unknowns: usize) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            schema_version: crate::config::SCHEMA_VERSION,
            command: command.into(),
            problem: config.name().into(),
            versions: Versions::default(),
            threads: rayon::current_num_threads(),
            created_unix,
            config: config.resolved(),
            disks: disks.disks().to_vec(),
            orders: orders.to_vec(),
            unknowns,
            solve: None,
            dort: None,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut out = create(&path)?;
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, -2.5e-7, 6.02e23, 123456.789, f64::MIN_POSITIVE] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(float(0.25), "0.25");
        assert_eq!(float(1e-20), "1e-20");
    }
}
