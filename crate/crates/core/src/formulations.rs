//! Named boundary integral formulations: operator system, right-hand side
//! and the layer representation of the fields, plus the solve driver.

use crate::basis::{BlockLayout, CoeffVector};
use crate::error::{Error, Result};
use crate::geometry::DiskConfig;
use crate::incidence::{IncidentField, Traces};
use crate::operators::{
    assemble_dense_system, assemble_toeplitz_system, BlockSystemSpec, LinearOperator, OperatorKind, OperatorSpec,
    OperatorTerm, Preconditioner,
};
use crate::scalar::{cplx, Real, C};
use crate::solver::{gmres, solve_direct, GmresOptions, SolveStats};

use OperatorKind::{DnDoubleLayer as D, DnSingleLayer as N, DoubleLayer as M, Identity as I, SingleLayer as L};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Sound-soft: total field vanishes.
    Dirichlet,
    /// Sound-hard: total normal derivative vanishes.
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formulation<T> {
    /// `L rho = -U`, `u = L rho`.
    Efie,
    /// `(I/2 + N) rho = -dU`, `u = L rho`.
    Mfie,
    /// `(alpha eta L + (1 - alpha)(I/2 + N)) rho = -alpha eta U - (1 - alpha) dU`.
    Cfie { alpha: T, eta: C<T> },
    /// `(I/2 - eta L - M) psi = -U`, `u = -eta L psi - M psi`.
    Bwie { eta: C<T> },
    /// Sound-hard counterpart of the BWIE: same representation, Neumann
    /// trace `(eta/2 I - eta N - D) psi = -dU`.
    Neumann { eta: C<T> },
    /// One boundary condition per disk, BWIE representation throughout.
    Mixed {
        conditions: Vec<BoundaryCondition>,
        eta: C<T>,
    },
    /// Transmission problem with interior wavenumbers and contrasts per disk;
    /// unknowns `[rho+; rho-]`, `u+ = L+ rho+`, `u- = L- rho-`.
    Penetrable { k_minus: Vec<T>, mu: Vec<T> },
}

impl<T: Real> Formulation<T> {
    /// CFIE with `alpha = 1/2`, `eta = ik`.
    pub fn cfie_default(k: T) -> Self {
        Formulation::Cfie {
            alpha: T::lit(0.5),
            eta: default_eta(k),
        }
    }

    /// BWIE with `eta = ik`.
    pub fn bwie_default(k: T) -> Self {
        Formulation::Bwie { eta: default_eta(k) }
    }

    pub fn neumann_default(k: T) -> Self {
        Formulation::Neumann { eta: default_eta(k) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Efie => "efie",
            Formulation::Mfie => "mfie",
            Formulation::Cfie { .. } => "cfie",
            Formulation::Bwie { .. } => "bwie",
            Formulation::Neumann { .. } => "neumann",
            Formulation::Mixed { .. } => "mixed",
            Formulation::Penetrable { .. } => "penetrable",
        }
    }

    /// Number of density unknowns per `(disk, mode)`.
    pub fn unknowns(&self) -> usize {
        match self {
            Formulation::Penetrable { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let coupling = |eta: &C<T>| {
            if eta.im == T::zero() || !eta.im.is_finite() || !eta.re.is_finite() {
                Err(Error::Parameter(format!("coupling eta must have nonzero imaginary part, got {eta}")))
            } else {
                Ok(())
            }
        };
        match self {
            Formulation::Efie | Formulation::Mfie => Ok(()),
            Formulation::Cfie { alpha, eta } => {
                if !(*alpha > T::zero() && *alpha < T::one()) {
                    return Err(Error::Parameter(format!("cfie alpha must lie in (0, 1), got {alpha}")));
                }
                coupling(eta)
            }
            Formulation::Bwie { eta } | Formulation::Neumann { eta } => coupling(eta),
            Formulation::Mixed { conditions, eta } => {
                if conditions.len() != m {
                    return Err(Error::Dimension {
                        expected: m,
                        got: conditions.len(),
                    });
                }
                coupling(eta)
            }
            Formulation::Penetrable { k_minus, mu } => {
                for v in [k_minus, mu] {
                    if v.len() != m {
                        return Err(Error::Dimension {
                            expected: m,
                            got: v.len(),
                        });
                    }
                }
                if let Some(k) = k_minus.iter().find(|k| !(**k > T::zero() && k.is_finite())) {
                    return Err(Error::Parameter(format!("interior wavenumber must be positive, got {k}")));
                }
                if let Some(u) = mu.iter().find(|u| !(**u > T::zero() && u.is_finite())) {
                    return Err(Error::Parameter(format!("contrast mu must be positive, got {u}")));
                }
                Ok(())
            }
        }
    }

    /// Operator system at exterior wavenumber `k` on `m` disks.
    pub fn system(&self, k: T, m: usize) -> Result<BlockSystemSpec<T>> {
        self.validate(m)?;
        let one = cplx(T::one(), T::zero());
        let half = cplx(T::lit(0.5), T::zero());
        let spec = match self {
            Formulation::Efie => OperatorSpec::single(L, one, k),
            Formulation::Mfie => OperatorSpec::combination(k, &[(I, half), (N, one)])?,
            Formulation::Cfie { alpha, eta } => {
                let (a, b) = (*eta * *alpha, one * (T::one() - *alpha));
                OperatorSpec::combination(k, &[(L, a), (I, b * half), (N, b)])?
            }
            Formulation::Bwie { eta } => OperatorSpec::combination(k, &[(I, half), (L, -*eta), (M, -one)])?,
            Formulation::Neumann { eta } => {
                OperatorSpec::combination(k, &[(I, *eta * half), (N, -*eta), (D, -one)])?
            }
            Formulation::Mixed { conditions, eta } => {
                let pick = |bc: BoundaryCondition| -> Vec<C<T>> {
                    conditions
                        .iter()
                        .map(|&c| if c == bc { one } else { C::new(T::zero(), T::zero()) })
                        .collect()
                };
                let (dir, neu) = (pick(BoundaryCondition::Dirichlet), pick(BoundaryCondition::Neumann));
                let term = |kind, w, s: &Vec<C<T>>| OperatorTerm::new(kind, w, k).with_row_scale(s.clone());
                OperatorSpec::new(vec![
                    term(I, half, &dir),
                    term(L, -*eta, &dir),
                    term(M, -one, &dir),
                    term(I, *eta * half, &neu),
                    term(N, -*eta, &neu),
                    term(D, -one, &neu),
                ])?
            }
            Formulation::Penetrable { k_minus, mu } => {
                let mu_c: Vec<C<T>> = mu.iter().map(|&u| cplx(u, T::zero())).collect();
                let inner = |kind, w| OperatorTerm::interior(kind, w, k_minus.clone());
                let e00 = OperatorSpec::single(L, one, k);
                let e01 = OperatorSpec::new(vec![inner(L, -one)])?;
                let e10 = OperatorSpec::combination(k, &[(I, -half), (N, one)])?;
                let e11 = OperatorSpec::new(vec![
                    inner(I, -half).with_row_scale(mu_c.clone()),
                    inner(N, -one).with_row_scale(mu_c),
                ])?;
                return BlockSystemSpec::new(2, 2, vec![Some(e00), Some(e01), Some(e10), Some(e11)]);
            }
        };
        Ok(spec.into())
    }

    /// Stacked right-hand side from the incident traces.
    pub fn rhs(&self, traces: &Traces<T>) -> Vec<C<T>> {
        let (u, du) = (traces.u.values(), traces.du.values());
        let neg = |v: &[C<T>]| v.iter().map(|z| -z).collect::<Vec<_>>();
        match self {
            Formulation::Efie | Formulation::Bwie { .. } => neg(u),
            Formulation::Mfie | Formulation::Neumann { .. } => neg(du),
            Formulation::Cfie { alpha, eta } => {
                let a = *eta * *alpha;
                let b = T::one() - *alpha;
                u.iter().zip(du).map(|(x, y)| -(a * x) - y * b).collect()
            }
            Formulation::Mixed { conditions, .. } => {
                let layout = traces.u.layout();
                let mut out = neg(u);
                for (p, c) in conditions.iter().enumerate() {
                    if *c == BoundaryCondition::Neumann {
                        for g in layout.block(p) {
                            out[g] = -du[g];
                        }
                    }
                }
                out
            }
            Formulation::Penetrable { .. } => {
                let mut out = neg(u);
                out.extend(neg(du));
                out
            }
        }
    }

    pub fn representation(&self) -> Representation<T> {
        let one = cplx(T::one(), T::zero());
        let zero = C::new(T::zero(), T::zero());
        let exterior = match self {
            Formulation::Efie | Formulation::Mfie | Formulation::Cfie { .. } | Formulation::Penetrable { .. } => {
                LayerWeights { single: one, double: zero }
            }
            Formulation::Bwie { eta } | Formulation::Neumann { eta } | Formulation::Mixed { eta, .. } => {
                LayerWeights {
                    single: -*eta,
                    double: -one,
                }
            }
        };
        let interior = match self {
            Formulation::Penetrable { k_minus, .. } => Some(InteriorRepresentation {
                slot: 1,
                single: one,
                k_minus: k_minus.clone(),
            }),
            _ => None,
        };
        Representation {
            exterior_slot: 0,
            exterior,
            interior,
        }
    }
}

fn default_eta<T: Real>(k: T) -> C<T> {
    cplx(T::zero(), k)
}

/// `single * L + double * M` applied to one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerWeights<T> {
    pub single: C<T>,
    pub double: C<T>,
}

/// Interior field `single * L- rho` inside each disk at its own wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorRepresentation<T> {
    pub slot: usize,
    pub single: C<T>,
    pub k_minus: Vec<T>,
}

/// How the solved densities generate the fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation<T> {
    /// Index of the density driving the exterior scattered field.
    pub exterior_slot: usize,
    pub exterior: LayerWeights<T>,
    /// Present for penetrable problems only.
    pub interior: Option<InteriorRepresentation<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Dense,
    Toeplitz,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method<T> {
    Direct,
    Gmres { options: GmresOptions<T>, precondition: bool },
}

/// A formulation instantiated on one configuration and incident field.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<T> {
    pub formulation: Formulation<T>,
    pub k: T,
    pub layout: BlockLayout,
    pub system: BlockSystemSpec<T>,
    pub rhs: Vec<C<T>>,
    pub representation: Representation<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    /// One density per unknown slot.
    pub densities: Vec<CoeffVector<T>>,
    pub stats: Option<SolveStats<T>>,
    /// `||A x - b|| / ||b||` of the unpreconditioned system.
    pub residual: T,
}

impl<T: Real> Solution<T> {
    pub fn converged(&self) -> bool {
        self.stats.as_ref().is_none_or(|s| s.converged)
    }
}

impl<T: Real> Problem<T> {
    pub fn new(
        formulation: Formulation<T>,
        config: &DiskConfig<T>,
        layout: &BlockLayout,
        k: T,
        incident: &IncidentField<T>,
    ) -> Result<Self> {
        let traces = incident.traces(config, layout, k)?;
        Self::from_traces(formulation, k, &traces)
    }

    pub fn from_traces(formulation: Formulation<T>, k: T, traces: &Traces<T>) -> Result<Self> {
        let layout = traces.u.layout().clone();
        let system = formulation.system(k, layout.num_disks())?;
        let rhs = formulation.rhs(traces);
        let representation = formulation.representation();
        Ok(Self {
            formulation,
            k,
            layout,
            system,
            rhs,
            representation,
        })
    }

    pub fn solve(&self, config: &DiskConfig<T>, storage: Storage, method: &Method<T>) -> Result<Solution<T>> {
        match storage {
            Storage::Dense => {
                let a = assemble_dense_system(&self.system, &self.layout, config)?;
                match method {
                    Method::Direct => {
                        let (x, residual) = solve_direct(&a, &self.rhs)?;
                        Ok(self.split(x, None, residual))
                    }
                    Method::Gmres { options, precondition } => {
                        let p = if *precondition {
                            Some(Preconditioner::from_dense(&a, &self.layout)?)
                        } else {
                            None
                        };
                        Ok(self.iterate(&a, p.as_ref(), options))
                    }
                }
            }
            Storage::Toeplitz => {
                let Method::Gmres { options, precondition } = method else {
                    return Err(Error::Parameter("toeplitz storage requires an iterative solver".into()));
                };
                let a = assemble_toeplitz_system(&self.system, &self.layout, config)?;
                log::info!(
                    "toeplitz operator: {} unknowns, {} stored coefficients",
                    a.nrows(),
                    a.storage()
                );
                let p = if *precondition {
                    Some(Preconditioner::from_toeplitz(&a, &self.layout)?)
                } else {
                    None
                };
                Ok(self.iterate(&a, p.as_ref(), options))
            }
        }
    }

    fn iterate<A: LinearOperator<T>>(
        &self,
        a: &A,
        p: Option<&Preconditioner<T>>,
        options: &GmresOptions<T>,
    ) -> Solution<T> {
        let (x, stats) = gmres(a, &self.rhs, None, options, p);
        let residual = crate::solver::relative_residual(a, &x, &self.rhs);
        self.split(x, Some(stats), residual)
    }

    pub(crate) fn split(&self, x: Vec<C<T>>, stats: Option<SolveStats<T>>, residual: T) -> Solution<T> {
        let n = self.layout.total();
        let densities = (0..self.formulation.unknowns())
            .map(|s| CoeffVector::new(self.layout.clone(), x[s * n..(s + 1) * n].to_vec()).expect("block length"))
            .collect();
        Solution {
            densities,
            stats,
            residual,
        }
    }
}

pub fn build_efie<T: Real>(k: T, traces: &Traces<T>) -> Result<Problem<T>> {
    Problem::from_traces(Formulation::Efie, k, traces)
}

pub fn build_mfie<T: Real>(k: T, traces: &Traces<T>) -> Result<Problem<T>> {
    Problem::from_traces(Formulation::Mfie, k, traces)
}

pub fn build_cfie<T: Real>(k: T, alpha: T, eta: C<T>, traces: &Traces<T>) -> Result<Problem<T>> {
    Problem::from_traces(Formulation::Cfie { alpha, eta }, k, traces)
}

pub fn build_bwie<T: Real>(k: T, eta: C<T>, traces: &Traces<T>) -> Result<Problem<T>> {
    Problem::from_traces(Formulation::Bwie { eta }, k, traces)
}

pub fn build_neumann<T: Real>(k: T, eta: C<T>, traces: &Traces<T>) -> Result<Problem<T>> {
    Problem::from_traces(Formulation::Neumann { eta }, k, traces)
}

pub fn build_penetrable<T: Real>(k: T, k_minus: Vec<T>, mu: Vec<T>, traces: &Traces<T>) -> Result<Problem<T>> {
    Problem::from_traces(Formulation::Penetrable { k_minus, mu }, k, traces)
}
