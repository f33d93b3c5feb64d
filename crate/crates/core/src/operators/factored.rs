//! Compressed form shared by dense expansion and the FFT matvec.

use rayon::prelude::*;

use super::{diag_entry, disk_functions, factor_values, offdiag_form, separation_generator, Factor, Medium, OperatorSpec};
use crate::basis::BlockLayout;
use crate::error::{Error, Result};
use crate::geometry::DiskConfig;
use crate::scalar::{Real, C};

/// Off-diagonal contribution of one term: `coef * scale_p * sqrt(a_p a_q)`
/// times `left^p S^T right^q`.
#[derive(Debug, Clone)]
pub(crate) struct OffTerm<T> {
    pub coef: C<T>,
    pub row_scale: Option<Vec<C<T>>>,
    pub left: Factor,
    pub right: Factor,
}

impl<T: Real> OffTerm<T> {
    pub fn scalar(&self, p: usize, sqrt_aa: T) -> C<T> {
        let s = match &self.row_scale {
            Some(v) => self.coef * v[p],
            None => self.coef,
        };
        s * sqrt_aa
    }
}

/// All exterior terms sharing one wavenumber.
#[derive(Debug, Clone)]
pub(crate) struct Group<T> {
    pub k: T,
    /// Per disk, `[J, J']` in local index order.
    pub factors: Vec<[Vec<C<T>>; 2]>,
    /// Generators indexed by `p * M + q`; empty on the diagonal.
    pub gens: Vec<Vec<C<T>>>,
    /// Pairs whose blocks are summed directly: the generator spans so many
    /// orders of magnitude that FFT rounding would swamp the block entries.
    pub direct: Vec<bool>,
    pub terms: Vec<OffTerm<T>>,
}

impl<T: Real> Group<T> {
    pub fn factor(&self, p: usize, f: Factor) -> &[C<T>] {
        match f {
            Factor::J => &self.factors[p][0],
            Factor::DJ => &self.factors[p][1],
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Factored<T> {
    pub layout: BlockLayout,
    pub radii: Vec<T>,
    /// Sum of all diagonal-block contributions, length `Ntot`.
    pub diag: Vec<C<T>>,
    pub groups: Vec<Group<T>>,
}

/// Sum of the diagonal blocks of every term, as one vector of length `Ntot`.
pub(crate) fn spec_diagonal<T: Real>(
    spec: &OperatorSpec<T>,
    layout: &BlockLayout,
    config: &DiskConfig<T>,
) -> Result<Vec<C<T>>> {
    let m = config.len();
    spec.check(m)?;
    if layout.num_disks() != m {
        return Err(Error::Dimension {
            expected: m,
            got: layout.num_disks(),
        });
    }
    let mut diag = vec![C::new(T::zero(), T::zero()); layout.total()];
    for term in &spec.terms {
        let kp = |p: usize| match &term.medium {
            Medium::Exterior(k) => *k,
            Medium::Interior(ks) => ks[p],
        };
        let cfs = disk_functions(config, layout, kp)?;
        for (p, cf) in cfs.iter().enumerate() {
            let w = term.scale(p);
            let a = config.disk(p).a;
            for (i, mode) in layout.modes(p).enumerate() {
                diag[layout.offsets()[p] + i] += w * diag_entry(term.kind, kp(p), a, cf, mode);
            }
        }
    }
    Ok(diag)
}

/// Largest block entry against the FFT rounding scale
/// `max|left| max|gen| max|right|`, over both factor kinds.
fn fft_is_lossy<T: Real>(left: &[Vec<C<T>>; 2], gen: &[C<T>], right: &[Vec<C<T>>; 2]) -> bool {
    let top = |v: &[C<T>]| v.iter().fold(T::zero(), |a, z| a.max(z.norm()));
    let (np, nq) = ((left[0].len() - 1) / 2, (right[0].len() - 1) / 2);
    let mut ratio = T::zero();
    for d in left {
        for e in right {
            let mut entry = T::zero();
            for (i, di) in d.iter().enumerate() {
                for (j, ej) in e.iter().enumerate() {
                    entry = entry.max((*di * gen[j + 2 * np - i] * *ej).norm());
                }
            }
            let bound = top(d) * top(gen) * top(e);
            if entry > T::zero() {
                ratio = ratio.max(bound / entry);
            }
        }
    }
    debug_assert!(gen.len() == 2 * (np + nq) + 1);
    ratio > T::lit(LOSSY_RANGE)
}

const LOSSY_RANGE: f64 = 100.0;

impl<T: Real> Factored<T> {
    pub fn new(spec: &OperatorSpec<T>, layout: &BlockLayout, config: &DiskConfig<T>) -> Result<Self> {
        let m = config.len();
        let radii: Vec<T> = config.disks().iter().map(|d| d.a).collect();
        let diag = spec_diagonal(spec, layout, config)?;
        let mut groups: Vec<Group<T>> = Vec::new();
        for term in &spec.terms {
            let Medium::Exterior(k) = term.medium else {
                continue;
            };
            let Some((c0, left, right)) = offdiag_form(term.kind, k) else {
                continue;
            };
            if m < 2 {
                continue;
            }
            let off = OffTerm {
                coef: c0 * term.weight,
                row_scale: term.row_scale.clone(),
                left,
                right,
            };
            if let Some(g) = groups.iter_mut().find(|g| g.k == k) {
                g.terms.push(off);
                continue;
            }
            let cfs = disk_functions(config, layout, |_| k)?;
            let factors: Vec<[Vec<C<T>>; 2]> = cfs
                .iter()
                .enumerate()
                .map(|(p, cf)| {
                    let n = layout.order(p);
                    [factor_values(cf, Factor::J, n), factor_values(cf, Factor::DJ, n)]
                })
                .collect();
            let gens = (0..m * m)
                .into_par_iter()
                .map(|pq| {
                    let (p, q) = (pq / m, pq % m);
                    if p == q {
                        Ok(Vec::new())
                    } else {
                        separation_generator(p, q, layout, k, config)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let direct: Vec<bool> = (0..m * m)
                .into_par_iter()
                .map(|pq| pq / m != pq % m && fft_is_lossy(&factors[pq / m], &gens[pq], &factors[pq % m]))
                .collect();
            groups.push(Group {
                k,
                factors,
                gens,
                direct,
                terms: vec![off],
            });
        }
        Ok(Self {
            layout: layout.clone(),
            radii,
            diag,
            groups,
        })
    }

    pub fn num_disks(&self) -> usize {
        self.radii.len()
    }

    pub fn sqrt_aa(&self, p: usize, q: usize) -> T {
        (self.radii[p] * self.radii[q]).sqrt()
    }

    /// Writes block `(p, q)` into `out` (row-major, leading dimension `ld`),
    /// adding to the existing contents.
    pub fn add_block(&self, p: usize, q: usize, out: &mut [C<T>], ld: usize) {
        let l = &self.layout;
        let (np, nq) = (l.order(p), l.order(q));
        if p == q {
            for i in 0..2 * np + 1 {
                out[i * ld + i] += self.diag[l.offsets()[p] + i];
            }
            return;
        }
        let sa = self.sqrt_aa(p, q);
        for g in &self.groups {
            let gen = &g.gens[p * self.num_disks() + q];
            for t in &g.terms {
                let c = t.scalar(p, sa);
                let d = g.factor(p, t.left);
                let e = g.factor(q, t.right);
                for i in 0..2 * np + 1 {
                    let cd = c * d[i];
                    // n - m + Np + Nq with m = i - Np, n = j - Nq
                    for j in 0..2 * nq + 1 {
                        out[i * ld + j] += cd * gen[j + 2 * np - i] * e[j];
                    }
                }
            }
        }
    }

    /// Number of complex scalars held.
    pub fn storage(&self) -> usize {
        let gens: usize = self.groups.iter().flat_map(|g| g.gens.iter()).map(Vec::len).sum();
        let factors: usize = self
            .groups
            .iter()
            .flat_map(|g| g.factors.iter())
            .map(|f| f[0].len() + f[1].len())
            .sum();
        let terms: usize = self
            .groups
            .iter()
            .flat_map(|g| g.terms.iter())
            .map(|t| 1 + t.row_scale.as_ref().map_or(0, Vec::len))
            .sum();
        self.diag.len() + gens + factors + terms
    }
}
