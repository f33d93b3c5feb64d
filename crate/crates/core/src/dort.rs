//! Decomposition of the time-reversal operator (DORT): far-field matrix over
//! a full-aperture mirror, `T = F^H F`, its eigenpairs, and the Herglotz
//! waves generated by the eigenvectors.

use rayon::prelude::*;

use crate::basis::BlockLayout;
use crate::error::{Error, Result};
use crate::formulations::{Formulation, Method, Problem, Solution, Storage};
use crate::geometry::DiskConfig;
use crate::incidence::{plane_wave_traces, IncidentField};
use crate::operators::{assemble_dense_system, DenseOperator, LinearOperator};
use crate::postproc::{incident_field_grid, uniform_angles, FieldEvaluator, FieldGrid, GridSpec};
use crate::scalar::{cplx, Real, C};
use crate::solver::{relative_residual, LuFactorization};

pub const DEFAULT_MIRROR_ANGLES: usize = 128;

/// Eigenvalues above this fraction of the largest count as significant.
pub const DEFAULT_SIGNIFICANCE: f64 = 0.01;

/// `F_ij = a(alpha_i)` for plane-wave incidence `alpha_j`, angles uniform on
/// `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix<T> {
    pub angles: Vec<T>,
    pub matrix: DenseOperator<T>,
}

impl<T: Real> FarFieldMatrix<T> {
    pub fn step(&self) -> T {
        T::TAU() / T::from_count(self.angles.len().max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeReversalOperator<T> {
    pub matrix: DenseOperator<T>,
    /// Descending.
    pub eigenvalues: Vec<T>,
    /// Unit-norm eigenvectors, matching `eigenvalues`.
    pub eigenvectors: Vec<Vec<C<T>>>,
}

impl<T: Real> TimeReversalOperator<T> {
    /// Number of eigenvalues above `fraction * lambda_max`.
    pub fn significant(&self, fraction: T) -> usize {
        let Some(&max) = self.eigenvalues.first() else {
            return 0;
        };
        if !(max > T::zero()) {
            return 0;
        }
        self.eigenvalues.iter().filter(|&&l| l > fraction * max).count()
    }
}

/// One solve per mirror angle; the dense direct path factors the matrix
/// once for all columns.
pub fn far_field_matrix<T: Real>(
    config: &DiskConfig<T>,
    layout: &BlockLayout,
    k: T,
    n_alpha: usize,
    formulation: &Formulation<T>,
    storage: Storage,
    method: &Method<T>,
) -> Result<FarFieldMatrix<T>> {
    if n_alpha == 0 {
        return Err(Error::Parameter("mirror needs at least one angle".into()));
    }
    let angles: Vec<T> = uniform_angles(n_alpha);
    let column = |j: usize, solve: &dyn Fn(&Problem<T>) -> Result<Solution<T>>| -> Result<Vec<C<T>>> {
        let wrap = |e: Error| Error::Column {
            column: j,
            message: e.to_string(),
        };
        let traces = plane_wave_traces(config, layout, k, angles[j]).map_err(wrap)?;
        let problem = Problem::from_traces(formulation.clone(), k, &traces).map_err(wrap)?;
        let solution = solve(&problem).map_err(wrap)?;
        if !solution.converged() {
            return Err(wrap(Error::Parameter(format!(
                "iterative solve did not converge (residual {})",
                solution.residual
            ))));
        }
        let ev = FieldEvaluator::from_solution(&problem, &solution, config).map_err(wrap)?;
        Ok(angles.iter().map(|&t| ev.far_field(t)).collect())
    };
    let columns: Vec<Vec<C<T>>> = match (storage, method) {
        (Storage::Dense, Method::Direct) => {
            let system = formulation.system(k, config.len())?;
            let a = assemble_dense_system(&system, layout, config)?;
            let lu = LuFactorization::new(&a)?;
            (0..n_alpha)
                .into_par_iter()
                .map(|j| {
                    column(j, &|p: &Problem<T>| {
                        let x = lu.solve(&p.rhs);
                        let residual = relative_residual(&a, &x, &p.rhs);
                        Ok(p.split(x, None, residual))
                    })
                })
                .collect::<Result<_>>()?
        }
        _ => (0..n_alpha)
            .map(|j| column(j, &|p: &Problem<T>| p.solve(config, storage, method)))
            .collect::<Result<_>>()?,
    };
    let mut matrix = DenseOperator::zeros(n_alpha, n_alpha);
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            matrix.set(i, j, *v);
        }
    }
    Ok(FarFieldMatrix { angles, matrix })
}

/// `T = F~^H F~` where `F~` measures in the opposite direction `alpha + pi`
/// (rows shifted by half the mirror when the angle count is even), followed
/// by the Hermitian eigendecomposition.
pub fn time_reversal_operator<T: Real>(f: &FarFieldMatrix<T>) -> Result<TimeReversalOperator<T>> {
    let n = f.matrix.nrows();
    if f.matrix.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: f.matrix.ncols(),
        });
    }
    let shift = if n % 2 == 0 { n / 2 } else { 0 };
    let mut shifted = DenseOperator::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            shifted.set(i, j, f.matrix.get((i + shift) % n, j));
        }
    }
    let matrix = shifted.adjoint().matmul(&shifted)?;
    let (eigenvalues, eigenvectors) = hermitian_eigen(&matrix)?;
    Ok(TimeReversalOperator {
        matrix,
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenpairs of a Hermitian matrix by cyclic Jacobi rotations, sorted by
/// descending eigenvalue. Only the upper triangle's Hermitian part matters.
pub fn hermitian_eigen<T: Real>(a: &DenseOperator<T>) -> Result<(Vec<T>, Vec<Vec<C<T>>>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a.ncols(),
        });
    }
    let zero = cplx(T::zero(), T::zero());
    let half = T::lit(0.5);
    // symmetrize
    let mut m: Vec<C<T>> = vec![zero; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (a.get(i, j) + a.get(j, i).conj()) * half;
        }
    }
    let mut v: Vec<C<T>> = vec![zero; n * n];
    for i in 0..n {
        v[i * n + i] = cplx(T::one(), T::zero());
    }
    let frob = m.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let target = T::epsilon() * frob;
    for _sweep in 0..64 {
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum::<T>()
            .sqrt();
        if !(off > target) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = m[p * n + q];
                let bn = b.norm();
                if !(bn > T::min_positive_value()) {
                    continue;
                }
                let (app, aqq) = (m[p * n + p].re, m[q * n + q].re);
                if bn <= T::epsilon() * T::lit(1e-3) * (app.abs() + aqq.abs()) {
                    m[p * n + q] = zero;
                    m[q * n + p] = zero;
                    continue;
                }
                let phase = b / bn; // e^{i phi}
                let theta = (aqq - app) / (bn + bn);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                let ph_conj = phase.conj();
                // columns: A G with G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                for r in 0..n {
                    let (xp, xq) = (m[r * n + p], m[r * n + q]);
                    m[r * n + p] = xp * c - xq * ph_conj * s;
                    m[r * n + q] = xp * s + xq * ph_conj * c;
                    let (vp, vq) = (v[r * n + p], v[r * n + q]);
                    v[r * n + p] = vp * c - vq * ph_conj * s;
                    v[r * n + q] = vp * s + vq * ph_conj * c;
                }
                // rows: G^H A
                for col in 0..n {
                    let (xp, xq) = (m[p * n + col], m[q * n + col]);
                    m[p * n + col] = xp * c - xq * phase * s;
                    m[q * n + col] = xp * s + xq * phase * c;
                }
                m[p * n + q] = zero;
                m[q * n + p] = zero;
                m[p * n + p] = cplx(m[p * n + p].re, T::zero());
                m[q * n + q] = cplx(m[q * n + q].re, T::zero());
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[j * n + j]
            .re
            .partial_cmp(&m[i * n + i].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|r| v[r * n + i]).collect())
        .collect();
    Ok((values, vectors))
}

/// `u(x) = sum_j h g_j e^{ik x.(cos alpha_j, sin alpha_j)}` on a grid; the
/// mask marks nodes inside the disks of `config`.
pub fn herglotz_focus_map<T: Real>(
    grid: &GridSpec<T>,
    k: T,
    g: &[C<T>],
    angles: &[T],
    h: T,
    config: &DiskConfig<T>,
) -> Result<FieldGrid<T>> {
    let field = IncidentField::herglotz(angles.to_vec(), g.to_vec(), h)?;
    Ok(incident_field_grid(grid, k, &field, config))
}
