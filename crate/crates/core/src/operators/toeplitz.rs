use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::factored::{Factored, Group};
use super::{BlockSystemSpec, DenseOperator, Factor, LinearOperator, OperatorSpec};
use crate::basis::BlockLayout;
use crate::error::Result;
use crate::geometry::DiskConfig;
use crate::scalar::{Real, C};

struct Plans<T> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

/// Operator stored as per-block diagonals plus Toeplitz generators; the
/// matvec embeds each Toeplitz block in a circulant and uses FFTs.
pub struct ToeplitzBlockOperator<T: Real> {
    rows: usize,
    cols: usize,
    n: usize,
    entries: Vec<Option<Factored<T>>>,
    plans: BTreeMap<usize, Plans<T>>,
}

impl<T: Real> std::fmt::Debug for ToeplitzBlockOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzBlockOperator")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("n", &self.n)
            .field("storage", &self.storage())
            .finish()
    }
}

fn fft_len(rows: usize, cols: usize) -> usize {
    (rows + cols).next_power_of_two()
}

pub fn assemble_toeplitz<T: Real>(
    spec: &OperatorSpec<T>,
    layout: &BlockLayout,
    config: &DiskConfig<T>,
) -> Result<ToeplitzBlockOperator<T>> {
    assemble_toeplitz_system(&spec.clone().into(), layout, config)
}

pub fn assemble_toeplitz_system<T: Real>(
    spec: &BlockSystemSpec<T>,
    layout: &BlockLayout,
    config: &DiskConfig<T>,
) -> Result<ToeplitzBlockOperator<T>> {
    let mut entries = Vec::with_capacity(spec.rows() * spec.cols());
    for r in 0..spec.rows() {
        for c in 0..spec.cols() {
            entries.push(match spec.entry(r, c) {
                Some(s) => Some(Factored::new(s, layout, config)?),
                None => None,
            });
        }
    }
    let mut planner = FftPlanner::new();
    let mut plans = BTreeMap::new();
    let orders = layout.orders();
    for &np in orders {
        for &nq in orders {
            let len = fft_len(2 * np + 1, 2 * nq + 1);
            plans.entry(len).or_insert_with(|| Plans {
                forward: planner.plan_fft_forward(len),
                inverse: planner.plan_fft_inverse(len),
            });
        }
    }
    Ok(ToeplitzBlockOperator {
        rows: spec.rows(),
        cols: spec.cols(),
        n: layout.total(),
        entries,
        plans,
    })
}

impl<T: Real> ToeplitzBlockOperator<T> {
    /// Number of complex scalars held by the compressed representation.
    pub fn storage(&self) -> usize {
        self.entries.iter().flatten().map(Factored::storage).sum()
    }

    /// Expands to the dense matrix.
    pub fn to_dense(&self) -> DenseOperator<T> {
        let (nr, nc) = (self.rows * self.n, self.cols * self.n);
        let mut data = vec![C::new(T::zero(), T::zero()); nr * nc];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let Some(f) = &self.entries[r * self.cols + c] else {
                    continue;
                };
                let l = &f.layout;
                for p in 0..f.num_disks() {
                    for q in 0..f.num_disks() {
                        let start = (r * self.n + l.offsets()[p]) * nc + c * self.n + l.offsets()[q];
                        f.add_block(p, q, &mut data[start..], nc);
                    }
                }
            }
        }
        DenseOperator::from_row_major(nr, nc, data).expect("consistent dimensions")
    }

    /// Diagonal of every grid entry (its block-diagonal part), `None` for
    /// empty entries.
    pub(crate) fn entry_diagonals(&self) -> Vec<Option<&[C<T>]>> {
        self.entries.iter().map(|e| e.as_ref().map(|f| f.diag.as_slice())).collect()
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn apply_entry(&self, f: &Factored<T>, x: &[C<T>], y: &mut [C<T>]) {
        let l = &f.layout;
        let m = f.num_disks();
        let zero = C::new(T::zero(), T::zero());
        for (yi, (d, xi)) in y.iter_mut().zip(f.diag.iter().zip(x)) {
            *yi += d * xi;
        }
        if m < 2 {
            return;
        }
        for g in &f.groups {
            let spectra = self.column_spectra(f, g, x);
            let blocks: Vec<Vec<C<T>>> = (0..m)
                .into_par_iter()
                .map(|p| {
                    let np = l.order(p);
                    let rlen = 2 * np + 1;
                    // frequency-domain accumulators per (left factor, fft length)
                    let mut acc: BTreeMap<(usize, usize), Vec<C<T>>> = BTreeMap::new();
                    let mut circ: Vec<C<T>> = Vec::new();
                    let mut scratch: Vec<C<T>> = Vec::new();
                    let mut out = vec![zero; rlen];
                    let sum_directly = |q: usize, out: &mut [C<T>]| {
                        let nq = l.order(q);
                        let gen = &g.gens[p * m + q];
                        let xq = &x[l.block(q)];
                        let sa = f.sqrt_aa(p, q);
                        for t in &g.terms {
                            let s = t.scalar(p, sa);
                            let (d, e) = (g.factor(p, t.left), g.factor(q, t.right));
                            for (i, oi) in out.iter_mut().enumerate() {
                                let mut sum = zero;
                                for j in 0..2 * nq + 1 {
                                    sum += gen[j + 2 * np - i] * e[j] * xq[j];
                                }
                                *oi += s * d[i] * sum;
                            }
                        }
                    };
                    for q in 0..m {
                        if q == p {
                            continue;
                        }
                        if g.direct[p * m + q] {
                            sum_directly(q, &mut out);
                            continue;
                        }
                        let nq = l.order(q);
                        let len = fft_len(rlen, 2 * nq + 1);
                        let plans = &self.plans[&len];
                        let gen = &g.gens[p * m + q];
                        circ.clear();
                        circ.resize(len, zero);
                        // c[d mod len] = t[2 Np - d], d = i - j in [-2Nq, 2Np]
                        for (idx, &t) in gen.iter().enumerate() {
                            let d = 2 * np as i64 - idx as i64;
                            circ[d.rem_euclid(len as i64) as usize] = t;
                        }
                        scratch.resize(plans.forward.get_inplace_scratch_len(), zero);
                        plans.forward.process_with_scratch(&mut circ, &mut scratch);
                        let sa = f.sqrt_aa(p, q);
                        for (li, left) in [Factor::J, Factor::DJ].into_iter().enumerate() {
                            for t in g.terms.iter().filter(|t| t.left == left) {
                                let s = t.scalar(p, sa);
                                let xs = &spectra[q][&(len, t.right as usize)];
                                let a = acc.entry((li, len)).or_insert_with(|| vec![zero; len]);
                                for ((ai, ci), xi) in a.iter_mut().zip(&circ).zip(xs) {
                                    *ai += s * ci * xi;
                                }
                            }
                        }
                    }
                    for ((li, len), mut a) in acc {
                        let plans = &self.plans[&len];
                        scratch.resize(plans.inverse.get_inplace_scratch_len(), zero);
                        plans.inverse.process_with_scratch(&mut a, &mut scratch);
                        let scale = T::one() / T::from_count(len);
                        let left = if li == 0 { Factor::J } else { Factor::DJ };
                        let d = g.factor(p, left);
                        for i in 0..rlen {
                            out[i] += d[i] * a[i] * scale;
                        }
                    }
                    out
                })
                .collect();
            for (p, b) in blocks.into_iter().enumerate() {
                for (yi, bi) in y[l.block(p)].iter_mut().zip(b) {
                    *yi += bi;
                }
            }
        }
    }

    /// FFTs of `right^q * x_q`, zero padded, for every column disk, fft
    /// length and right factor in use.
    fn column_spectra(
        &self,
        f: &Factored<T>,
        g: &Group<T>,
        x: &[C<T>],
    ) -> Vec<BTreeMap<(usize, usize), Vec<C<T>>>> {
        let l = &f.layout;
        let zero = C::new(T::zero(), T::zero());
        let rights: Vec<Factor> = [Factor::J, Factor::DJ]
            .into_iter()
            .filter(|r| g.terms.iter().any(|t| t.right == *r))
            .collect();
        (0..f.num_disks())
            .into_par_iter()
            .map(|q| {
                let nq = l.order(q);
                let xq = &x[l.block(q)];
                let mut out = BTreeMap::new();
                let mut scratch = Vec::new();
                let lens: std::collections::BTreeSet<usize> =
                    l.orders().iter().map(|&np| fft_len(2 * np + 1, 2 * nq + 1)).collect();
                for len in lens {
                    let plans = &self.plans[&len];
                    for &r in &rights {
                        let e = g.factor(q, r);
                        let mut buf = vec![zero; len];
                        for j in 0..2 * nq + 1 {
                            buf[j] = e[j] * xq[j];
                        }
                        scratch.resize(plans.forward.get_inplace_scratch_len(), zero);
                        plans.forward.process_with_scratch(&mut buf, &mut scratch);
                        out.insert((len, r as usize), buf);
                    }
                }
                out
            })
            .collect()
    }
}

impl<T: Real> LinearOperator<T> for ToeplitzBlockOperator<T> {
    fn nrows(&self) -> usize {
        self.rows * self.n
    }

    fn ncols(&self) -> usize {
        self.cols * self.n
    }

    fn apply_into(&self, x: &[C<T>], y: &mut [C<T>]) {
        assert_eq!(x.len(), self.ncols(), "toeplitz matvec: input length");
        assert_eq!(y.len(), self.nrows(), "toeplitz matvec: output length");
        y.iter_mut().for_each(|v| *v = C::new(T::zero(), T::zero()));
        let n = self.n;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if let Some(f) = &self.entries[r * self.cols + c] {
                    self.apply_entry(f, &x[c * n..(c + 1) * n], &mut y[r * n..(r + 1) * n]);
                }
            }
        }
    }
}
