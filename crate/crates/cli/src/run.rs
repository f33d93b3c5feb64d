//! The three pipelines behind the subcommands.

use std::path::Path;
use std::time::{Duration, Instant};

use multidisk::basis::{make_layout, truncation_order, BlockLayout, Truncation};
use multidisk::dort::{far_field_matrix, herglotz_focus_map, time_reversal_operator, FarFieldMatrix, TimeReversalOperator};
use multidisk::formulations::{Formulation, Problem, Solution};
use multidisk::geometry::{create_random_disks, rectangular_lattice, triangular_lattice, DiskConfig, RandomCloud};
use multidisk::incidence::IncidentField;
use multidisk::postproc::{field_grid, uniform_angles, FarFieldCurve, FieldEvaluator, FieldGrid};

use crate::config::{GeometrySpec, LatticeShape, RunConfig};
use crate::output::{write_eigenvalues, write_far_field, write_grid, DortSummary, Manifest, SolveSummary};
use crate::{CliError, Result};

pub fn build_geometry(cfg: &RunConfig) -> Result<DiskConfig<f64>> {
    Ok(match &cfg.geometry {
        GeometrySpec::Inline { disks } => DiskConfig::new(disks.clone())?,
        GeometrySpec::Random {
            region,
            count,
            a_min,
            a_max,
            d_min,
            holes,
            attempts_per_disk,
        } => create_random_disks(&RandomCloud {
            region: *region,
            count: *count,
            a_min: *a_min,
            a_max: *a_max,
            d_min: *d_min,
            holes: holes.clone(),
            seed: cfg.seed,
            attempts_per_disk: *attempts_per_disk,
        })?,
        GeometrySpec::Lattice {
            shape,
            nx,
            ny,
            step,
            a,
            center,
            remove,
        } => {
            let lattice = match shape {
                LatticeShape::Rectangular => rectangular_lattice(*nx, *ny, *step, *a, *center)?,
                LatticeShape::Triangular => triangular_lattice(*nx, *ny, *step, *a, *center)?,
            };
            if let Some(r) = remove.rows.iter().find(|&&r| r >= *ny) {
                return Err(CliError::Config(format!("geometry.remove.rows: row {r} of {ny}")));
            }
            if let Some(c) = remove.columns.iter().find(|&&c| c >= *nx) {
                return Err(CliError::Config(format!("geometry.remove.columns: column {c} of {nx}")));
            }
            let mut drop = remove.indices.clone();
            for j in 0..*ny {
                for i in 0..*nx {
                    if remove.rows.contains(&j) || remove.columns.contains(&i) {
                        drop.push(j * nx + i);
                    }
                }
            }
            drop.sort_unstable();
            drop.dedup();
            lattice.remove_disks(&drop)?
        }
    })
}

/// Geometry, layout and formulation of a run.
#[derive(Debug, Clone)]
pub struct Scene {
    pub config: DiskConfig<f64>,
    pub layout: BlockLayout,
    pub formulation: Formulation<f64>,
}

impl Scene {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let config = build_geometry(cfg)?;
        let formulation = cfg.formulation.build(cfg.k, config.len())?;
        formulation.validate(config.len())?;
        let mut truncation = cfg.discretization.truncation()?;
        // interior fields oscillate at k-, so the tolerance rule uses the larger wavenumber
        if let (Truncation::Tolerance(eps), Formulation::Penetrable { k_minus, .. }) = (&truncation, &formulation) {
            let orders = config
                .disks()
                .iter()
                .zip(k_minus)
                .map(|(d, km)| truncation_order(cfg.k.max(*km), d.a, *eps))
                .collect::<multidisk::Result<Vec<_>>>()?;
            truncation = Truncation::Explicit(orders);
        }
        let layout = make_layout(&config, cfg.k, &truncation)?;
        Ok(Self {
            config,
            layout,
            formulation,
        })
    }

    pub fn unknowns(&self) -> usize {
        self.layout.total() * self.formulation.unknowns()
    }
}

pub struct SolveOutcome {
    pub scene: Scene,
    pub incident: IncidentField<f64>,
    pub problem: Problem<f64>,
    pub solution: Solution<f64>,
    /// Post-processing is skipped when the solver did not converge.
    pub evaluator: Option<FieldEvaluator<f64>>,
    pub far_field: Option<FarFieldCurve<f64>>,
    pub grid: Option<FieldGrid<f64>>,
    pub solve_time: Duration,
}

impl SolveOutcome {
    pub fn converged(&self) -> bool {
        self.solution.converged()
    }

    pub fn summary(&self, cfg: &RunConfig) -> SolveSummary {
        let stats = self.solution.stats.as_ref();
        SolveSummary {
            method: match cfg.solver {
                crate::config::SolverSpec::Direct {} => "direct".into(),
                crate::config::SolverSpec::Gmres { .. } => "gmres".into(),
            },
            converged: self.converged(),
            residual: self.solution.residual,
            iterations: stats.map(|s| s.iterations),
            cycles: stats.map(|s| s.cycles),
            elapsed_s: self.solve_time.as_secs_f64(),
        }
    }
}

pub fn solve(cfg: &RunConfig) -> Result<SolveOutcome> {
    let incident = cfg
        .incident
        .as_ref()
        .ok_or_else(|| CliError::Config("incident: required by `solve`".into()))?
        .field();
    let scene = Scene::new(cfg)?;
    log::info!(
        "{}: {} disks, {} unknowns, {}",
        cfg.name(),
        scene.config.len(),
        scene.unknowns(),
        scene.formulation.name()
    );
    let problem = Problem::new(scene.formulation.clone(), &scene.config, &scene.layout, cfg.k, &incident)?;
    let start = Instant::now();
    let solution = problem.solve(&scene.config, cfg.storage.into(), &cfg.solver.method())?;
    let solve_time = start.elapsed();
    log::info!(
        "solved in {:.2} s, residual {:e}",
        solve_time.as_secs_f64(),
        solution.residual
    );
    let mut out = SolveOutcome {
        scene,
        incident,
        problem,
        solution,
        evaluator: None,
        far_field: None,
        grid: None,
        solve_time,
    };
    if !out.converged() {
        return Ok(out);
    }
    let ev = FieldEvaluator::from_solution(&out.problem, &out.solution, &out.scene.config)?;
    if let Some(f) = &cfg.outputs.far_field {
        out.far_field = Some(ev.far_field_curve(&uniform_angles(f.angles)));
    }
    if let Some(g) = &cfg.outputs.grid {
        out.grid = Some(field_grid(&g.spec()?, &ev, &out.incident, g.part.into()));
    }
    out.evaluator = Some(ev);
    Ok(out)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes the requested files and the manifest. Returns the manifest even
/// when the solve failed to converge; the caller decides the exit status.
pub fn write_solve(cfg: &RunConfig, outcome: &SolveOutcome, dir: &Path) -> Result<Manifest> {
    create_dir(dir)?;
    let s = &outcome.scene;
    let mut manifest = Manifest::new("solve", cfg, &s.config, s.layout.orders(), s.unknowns());
    manifest.solve = Some(outcome.summary(cfg));
    if let (Some(curve), Some(f)) = (&outcome.far_field, &cfg.outputs.far_field) {
        write_far_field(&dir.join(&f.file), curve)?;
        manifest.outputs.push(f.file.clone());
    }
    if let (Some(grid), Some(g)) = (&outcome.grid, &cfg.outputs.grid) {
        let part = match g.part {
            crate::config::GridPart::Total => "total",
            crate::config::GridPart::Scattered => "scattered",
        };
        let id = format!("{}/{}/{part}", cfg.name(), s.formulation.name());
        write_grid(&dir.join(&g.file), grid, cfg.k, &id)?;
        manifest.outputs.push(g.file.clone());
    }
    manifest.write(dir)?;
    Ok(manifest)
}

/// `solve` subcommand: run, write, and fail on non-convergence.
pub fn cmd_solve(cfg: &RunConfig, dir: &Path) -> Result<Manifest> {
    let outcome = solve(cfg)?;
    let manifest = write_solve(cfg, &outcome, dir)?;
    if !outcome.converged() {
        let stats = outcome.solution.stats.as_ref();
        return Err(CliError::NotConverged {
            residual: outcome.solution.residual,
            iterations: stats.map_or(0, |s| s.iterations),
        });
    }
    Ok(manifest)
}

pub struct DortOutcome {
    pub scene: Scene,
    pub far_field: FarFieldMatrix<f64>,
    pub operator: TimeReversalOperator<f64>,
    pub significant: usize,
    pub focus: Vec<FieldGrid<f64>>,
    pub peaks: Vec<[f64; 2]>,
    pub elapsed: Duration,
}

pub fn dort(cfg: &RunConfig) -> Result<DortOutcome> {
    let spec = cfg.dort.clone().unwrap_or_default();
    let scene = Scene::new(cfg)?;
    let start = Instant::now();
    let f = far_field_matrix(
        &scene.config,
        &scene.layout,
        cfg.k,
        spec.n_alpha,
        &scene.formulation,
        cfg.storage.into(),
        &cfg.solver.method(),
    )?;
    let t = time_reversal_operator(&f)?;
    let significant = t.significant(spec.significance);
    log::info!(
        "{}: {} of {} eigenvalues above {} of the largest",
        cfg.name(),
        significant,
        t.eigenvalues.len(),
        spec.significance
    );
    let mut focus = Vec::new();
    let mut peaks = Vec::new();
    if let Some(g) = &spec.focus_grid {
        let grid = g.spec()?;
        for v in t.eigenvectors.iter().take(significant) {
            let map = herglotz_focus_map(&grid, cfg.k, v, &f.angles, f.step(), &scene.config)?;
            peaks.push(peak(&map));
            focus.push(map);
        }
    }
    Ok(DortOutcome {
        scene,
        far_field: f,
        operator: t,
        significant,
        focus,
        peaks,
        elapsed: start.elapsed(),
    })
}

/// Node of largest modulus.
pub fn peak(map: &FieldGrid<f64>) -> [f64; 2] {
    let mut best = (f64::NEG_INFINITY, [f64::NAN; 2]);
    for (x, v) in map.nodes.iter().zip(&map.values) {
        if v.norm() > best.0 {
            best = (v.norm(), *x);
        }
    }
    best.1
}

pub fn write_dort(cfg: &RunConfig, outcome: &DortOutcome, dir: &Path) -> Result<Manifest> {
    create_dir(dir)?;
    let spec = cfg.dort.clone().unwrap_or_default();
    let s = &outcome.scene;
    let mut manifest = Manifest::new("dort", cfg, &s.config, s.layout.orders(), s.unknowns());
    write_eigenvalues(&dir.join(&spec.eigen_file), &outcome.operator.eigenvalues)?;
    manifest.outputs.push(spec.eigen_file.clone());
    for (i, map) in outcome.focus.iter().enumerate() {
        let file = format!("focus_{i}.csv");
        write_grid(&dir.join(&file), map, cfg.k, &format!("{}/focus-{i}", cfg.name()))?;
        manifest.outputs.push(file);
    }
    manifest.dort = Some(DortSummary {
        n_alpha: spec.n_alpha,
        significance: spec.significance,
        significant: outcome.significant,
        eigenvalues: outcome.operator.eigenvalues.clone(),
        focus_peaks: outcome.peaks.clone(),
    });
    manifest.write(dir)?;
    Ok(manifest)
}

pub fn cmd_dort(cfg: &RunConfig, dir: &Path) -> Result<Manifest> {
    let outcome = dort(cfg)?;
    write_dort(cfg, &outcome, dir)
}

/// What `validate` reports.
#[derive(Debug, Clone)]
pub struct Report {
    pub disks: usize,
    pub orders: Vec<usize>,
    pub unknowns: usize,
    /// Smallest boundary-to-boundary gap, if there are two disks or more.
    pub min_gap: Option<f64>,
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (lo, hi) = (
            self.orders.iter().min().copied().unwrap_or(0),
            self.orders.iter().max().copied().unwrap_or(0),
        );
        let s = if self.disks == 1 { "" } else { "s" };
        write!(f, "{} disk{s}, orders {lo}..={hi}, {} unknowns", self.disks, self.unknowns)?;
        if let Some(g) = self.min_gap {
            write!(f, ", smallest gap {g:.6}")?;
        }
        Ok(())
    }
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<Report> {
    let scene = Scene::new(cfg)?;
    let c = &scene.config;
    let mut min_gap: Option<f64> = None;
    for p in 0..c.len() {
        for q in p + 1..c.len() {
            let gap = c.separation(p, q).0 - c.disk(p).a - c.disk(q).a;
            min_gap = Some(min_gap.map_or(gap, |g| g.min(gap)));
        }
    }
    Ok(Report {
        disks: c.len(),
        orders: scene.layout.orders().to_vec(),
        unknowns: scene.unknowns(),
        min_gap,
    })
}
