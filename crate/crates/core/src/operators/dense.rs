use rayon::prelude::*;

use super::factored::Factored;
use super::{BlockSystemSpec, LinearOperator, OperatorSpec};
use crate::basis::BlockLayout;
use crate::error::{Error, Result};
use crate::geometry::DiskConfig;
use crate::scalar::{Real, C};

/// Row-major complex matrix, optionally carrying the block layout it was
/// assembled on.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<C<T>>,
    layout: Option<BlockLayout>,
}

impl<T: Real> DenseOperator<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![C::new(T::zero(), T::zero()); nrows * ncols],
            layout: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a.data[i * n + i] = C::new(T::one(), T::zero());
        }
        a
    }

    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::Dimension {
                expected: nrows * ncols,
                got: data.len(),
            });
        }
        Ok(Self {
            nrows,
            ncols,
            data,
            layout: None,
        })
    }

    pub fn layout(&self) -> Option<&BlockLayout> {
        self.layout.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C<T>> {
        self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out.data[j * self.nrows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension {
                expected: self.ncols,
                got: other.nrows,
            });
        }
        let n = other.ncols;
        let mut data = vec![C::new(T::zero(), T::zero()); self.nrows * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, out)| {
            for (k, &a) in self.row(i).iter().enumerate() {
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        });
        Self::from_row_major(self.nrows, n, data)
    }
}

impl<T: Real> LinearOperator<T> for DenseOperator<T> {
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply_into(&self, x: &[C<T>], y: &mut [C<T>]) {
        assert_eq!(x.len(), self.ncols, "dense matvec: input length");
        assert_eq!(y.len(), self.nrows, "dense matvec: output length");
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self
                .row(i)
                .iter()
                .zip(x)
                .fold(C::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b);
        });
    }
}

/// Dense matrix of a single operator combination.
pub fn assemble_dense<T: Real>(
    spec: &OperatorSpec<T>,
    layout: &BlockLayout,
    config: &DiskConfig<T>,
) -> Result<DenseOperator<T>> {
    assemble_dense_system(&spec.clone().into(), layout, config)
}

/// Dense matrix of a block system; the grid entry `(r, c)` occupies rows
/// `r*Ntot..(r+1)*Ntot` and columns `c*Ntot..(c+1)*Ntot`.
pub fn assemble_dense_system<T: Real>(
    spec: &BlockSystemSpec<T>,
    layout: &BlockLayout,
    config: &DiskConfig<T>,
) -> Result<DenseOperator<T>> {
    let n = layout.total();
    let (nrows, ncols) = (spec.rows() * n, spec.cols() * n);
    let mut a = DenseOperator::zeros(nrows, ncols);
    for r in 0..spec.rows() {
        for c in 0..spec.cols() {
            let Some(entry) = spec.entry(r, c) else {
                continue;
            };
            let f = Factored::new(entry, layout, config)?;
            let m = config.len();
            // each disk p owns a horizontal band of rows
            let band_start = r * n;
            let rows = &mut a.data[band_start * ncols..(band_start + n) * ncols];
            let mut bands: Vec<&mut [C<T>]> = Vec::with_capacity(m);
            let mut rest = rows;
            for p in 0..m {
                let (head, tail) = rest.split_at_mut(layout.block_len(p) * ncols);
                bands.push(head);
                rest = tail;
            }
            bands.into_par_iter().enumerate().for_each(|(p, band)| {
                for q in 0..m {
                    let col = c * n + layout.offsets()[q];
                    f.add_block(p, q, &mut band[col..], ncols);
                }
            });
        }
    }
    a.layout = Some(layout.clone());
    Ok(a)
}
