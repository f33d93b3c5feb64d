//! Run configuration: one TOML document per scenario.
//!
//! Every table rejects unknown keys. Optional parameters that depend on the
//! wavenumber (the coupling `eta`) are filled in by [`RunConfig::resolved`],
//! which is what the run manifest records.

use std::path::Path;

use multidisk::basis::{Truncation, DEFAULT_EPS};
use multidisk::formulations::{BoundaryCondition, Formulation, Method, Storage};
use multidisk::geometry::{Disk, Hole, Rect};
use multidisk::incidence::IncidentField;
use multidisk::postproc::{FieldPart, GridSpec};
use multidisk::solver::GmresOptions;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Used as the problem id in output headers; defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Exterior wavenumber.
    pub k: f64,
    #[serde(default)]
    pub storage: StorageSpec,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub incident: Option<IncidentSpec>,
    #[serde(default)]
    pub formulation: FormulationSpec,
    #[serde(default)]
    pub discretization: Discretization,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub dort: Option<DortSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    Inline {
        disks: Vec<Disk<f64>>,
    },
    Random {
        region: Rect<f64>,
        count: usize,
        a_min: f64,
        a_max: f64,
        d_min: f64,
        #[serde(default)]
        holes: Vec<Hole<f64>>,
        #[serde(default = "default_attempts")]
        attempts_per_disk: usize,
    },
    Lattice {
        shape: LatticeShape,
        nx: usize,
        ny: usize,
        step: f64,
        a: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        remove: Removal,
    },
}

fn default_attempts() -> usize {
    multidisk::geometry::DEFAULT_ATTEMPTS_PER_DISK
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeShape {
    Rectangular,
    Triangular,
}

/// Lattice disks to drop: by index (`j * nx + i`), whole rows `j` or whole
/// columns `i`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Removal {
    #[serde(default)]
    pub indices: Vec<usize>,
    #[serde(default)]
    pub rows: Vec<usize>,
    #[serde(default)]
    pub columns: Vec<usize>,
}

impl Removal {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty() && self.rows.is_empty() && self.columns.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncidentSpec {
    PlaneWave { beta: f64 },
    PointSource { s: [f64; 2] },
}

impl IncidentSpec {
    pub fn field(&self) -> IncidentField<f64> {
        match self {
            IncidentSpec::PlaneWave { beta } => IncidentField::plane_wave(*beta),
            IncidentSpec::PointSource { s } => IncidentField::point_source(*s),
        }
    }
}

/// One value for every disk or one per disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerDisk {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerDisk {
    pub fn expand(&self, m: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            PerDisk::Uniform(v) => Ok(vec![*v; m]),
            PerDisk::Each(v) if v.len() == m => Ok(v.clone()),
            PerDisk::Each(v) => Err(CliError::Config(format!(
                "formulation.{what}: {} values for {m} disks",
                v.len()
            ))),
        }
    }
}

/// `eta` as `[re, im]`; absent means `i k`.
pub type Coupling = Option<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FormulationSpec {
    Efie {},
    Mfie {},
    Cfie {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        eta: Coupling,
    },
    Bwie {
        #[serde(default)]
        eta: Coupling,
    },
    Neumann {
        #[serde(default)]
        eta: Coupling,
    },
    Mixed {
        conditions: Vec<Condition>,
        #[serde(default)]
        eta: Coupling,
    },
    Penetrable {
        k_minus: PerDisk,
        #[serde(default = "unit_contrast")]
        mu: PerDisk,
    },
}

fn default_alpha() -> f64 {
    0.5
}

fn unit_contrast() -> PerDisk {
    PerDisk::Uniform(1.0)
}

impl Default for FormulationSpec {
    fn default() -> Self {
        FormulationSpec::Efie {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Dirichlet,
    Neumann,
}

impl FormulationSpec {
    /// Core formulation for `m` disks at wavenumber `k`.
    pub fn build(&self, k: f64, m: usize) -> Result<Formulation<f64>> {
        let eta = |e: &Coupling| match e {
            Some([re, im]) => Complex64::new(*re, *im),
            None => Complex64::new(0.0, k),
        };
        Ok(match self {
            FormulationSpec::Efie {} => Formulation::Efie,
            FormulationSpec::Mfie {} => Formulation::Mfie,
            FormulationSpec::Cfie { alpha, eta: e } => Formulation::Cfie {
                alpha: *alpha,
                eta: eta(e),
            },
            FormulationSpec::Bwie { eta: e } => Formulation::Bwie { eta: eta(e) },
            FormulationSpec::Neumann { eta: e } => Formulation::Neumann { eta: eta(e) },
            FormulationSpec::Mixed { conditions, eta: e } => Formulation::Mixed {
                conditions: conditions
                    .iter()
                    .map(|c| match c {
                        Condition::Dirichlet => BoundaryCondition::Dirichlet,
                        Condition::Neumann => BoundaryCondition::Neumann,
                    })
                    .collect(),
                eta: eta(e),
            },
            FormulationSpec::Penetrable { k_minus, mu } => Formulation::Penetrable {
                k_minus: k_minus.expand(m, "k_minus")?,
                mu: mu.expand(m, "mu")?,
            },
        })
    }

    fn with_coupling(&self, k: f64) -> Self {
        let fill = |e: &Coupling| Some(e.unwrap_or([0.0, k]));
        match self {
            FormulationSpec::Cfie { alpha, eta } => FormulationSpec::Cfie {
                alpha: *alpha,
                eta: fill(eta),
            },
            FormulationSpec::Bwie { eta } => FormulationSpec::Bwie { eta: fill(eta) },
            FormulationSpec::Neumann { eta } => FormulationSpec::Neumann { eta: fill(eta) },
            FormulationSpec::Mixed { conditions, eta } => FormulationSpec::Mixed {
                conditions: conditions.clone(),
                eta: fill(eta),
            },
            other => other.clone(),
        }
    }
}

/// Truncation: a tolerance, one order for all disks, or one per disk. With
/// none given, the tolerance defaults to `1e-10`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub orders: Option<Vec<usize>>,
}

impl Discretization {
    pub fn truncation(&self) -> Result<Truncation<f64>> {
        match (self.eps, self.order, &self.orders) {
            (None, None, None) => Ok(Truncation::Tolerance(DEFAULT_EPS)),
            (Some(e), None, None) => Ok(Truncation::Tolerance(e)),
            (None, Some(n), None) => Ok(Truncation::Uniform(n)),
            (None, None, Some(v)) => Ok(Truncation::Explicit(v.clone())),
            _ => Err(CliError::Config(
                "discretization: give at most one of `eps`, `order`, `orders`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverSpec {
    Direct {},
    Gmres {
        #[serde(default = "default_restart")]
        restart: usize,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_cycles")]
        max_cycles: usize,
        #[serde(default = "default_true")]
        precondition: bool,
    },
}

fn default_restart() -> usize {
    GmresOptions::<f64>::default().restart
}

fn default_tol() -> f64 {
    GmresOptions::<f64>::default().tol
}

fn default_cycles() -> usize {
    GmresOptions::<f64>::default().max_cycles
}

fn default_true() -> bool {
    true
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec::Direct {}
    }
}

impl SolverSpec {
    pub fn method(&self) -> Method<f64> {
        match self {
            SolverSpec::Direct {} => Method::Direct,
            SolverSpec::Gmres {
                restart,
                tol,
                max_cycles,
                precondition,
            } => Method::Gmres {
                options: GmresOptions {
                    restart: *restart,
                    tol: *tol,
                    max_cycles: *max_cycles,
                },
                precondition: *precondition,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageSpec {
    #[default]
    Dense,
    Toeplitz,
}

impl From<StorageSpec> for Storage {
    fn from(s: StorageSpec) -> Self {
        match s {
            StorageSpec::Dense => Storage::Dense,
            StorageSpec::Toeplitz => Storage::Toeplitz,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub far_field: Option<FarFieldOutput>,
    #[serde(default)]
    pub grid: Option<GridOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldOutput {
    #[serde(default = "default_angles")]
    pub angles: usize,
    #[serde(default = "default_far_file")]
    pub file: String,
}

fn default_angles() -> usize {
    360
}

fn default_far_file() -> String {
    "far_field.csv".into()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPart {
    #[default]
    Total,
    Scattered,
}

impl From<GridPart> for FieldPart {
    fn from(p: GridPart) -> Self {
        match p {
            GridPart::Total => FieldPart::Total,
            GridPart::Scattered => FieldPart::Scattered,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOutput {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub n1: usize,
    pub n2: usize,
    #[serde(default)]
    pub part: GridPart,
    #[serde(default = "default_grid_file")]
    pub file: String,
}

fn default_grid_file() -> String {
    "grid.csv".into()
}

impl GridOutput {
    pub fn spec(&self) -> Result<GridSpec<f64>> {
        Ok(GridSpec::new(
            (self.x1[0], self.x1[1]),
            (self.x2[0], self.x2[1]),
            self.n1,
            self.n2,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DortSpec {
    #[serde(default = "default_mirror")]
    pub n_alpha: usize,
    #[serde(default = "default_significance")]
    pub significance: f64,
    #[serde(default = "default_eigen_file")]
    pub eigen_file: String,
    /// Focus maps are written for every significant eigenvector.
    #[serde(default)]
    pub focus_grid: Option<FocusGrid>,
}

fn default_mirror() -> usize {
    multidisk::dort::DEFAULT_MIRROR_ANGLES
}

fn default_significance() -> f64 {
    multidisk::dort::DEFAULT_SIGNIFICANCE
}

fn default_eigen_file() -> String {
    "eigen.csv".into()
}

impl Default for DortSpec {
    fn default() -> Self {
        Self {
            n_alpha: default_mirror(),
            significance: default_significance(),
            eigen_file: default_eigen_file(),
            focus_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocusGrid {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub n1: usize,
    pub n2: usize,
}

impl FocusGrid {
    pub fn spec(&self) -> Result<GridSpec<f64>> {
        Ok(GridSpec::new(
            (self.x1[0], self.x1[1]),
            (self.x2[0], self.x2[1]),
            self.n1,
            self.n2,
        )?)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Reads and checks a config file; `name` falls back to the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    /// Checks that do not need the geometry.
    pub fn check(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "version: unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.version
            )));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(CliError::Config(format!("k: must be positive, got {}", self.k)));
        }
        if self.storage == StorageSpec::Toeplitz && matches!(self.solver, SolverSpec::Direct {}) {
            return Err(CliError::Config(
                "storage: toeplitz storage requires solver.type = \"gmres\"".into(),
            ));
        }
        if let SolverSpec::Gmres {
            restart,
            tol,
            max_cycles,
            ..
        } = &self.solver
        {
            if *restart == 0 || *max_cycles == 0 || !(*tol > 0.0) {
                return Err(CliError::Config(
                    "solver: restart and max_cycles must be positive, tol > 0".into(),
                ));
            }
        }
        self.discretization.truncation()?;
        if let Some(g) = &self.outputs.grid {
            g.spec()?;
        }
        if let Some(d) = &self.dort {
            if d.n_alpha == 0 {
                return Err(CliError::Config("dort.n_alpha: must be positive".into()));
            }
            if let Some(g) = &d.focus_grid {
                g.spec()?;
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("run")
    }

    /// The config with every defaulted coupling written out.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.formulation = self.formulation.with_coupling(self.k);
        if out.name.is_none() {
            out.name = Some(self.name().to_string());
        }
        out
    }
}
