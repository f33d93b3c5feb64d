use std::cmp::Ordering;

use super::factored::spec_diagonal;
use super::{BlockSystemSpec, DenseOperator, LinearOperator, ToeplitzBlockOperator};
use crate::basis::BlockLayout;
use crate::error::{Error, Result};
use crate::geometry::DiskConfig;
use crate::scalar::{Real, C};

/// Single-scattering preconditioner: the inverse of the block-diagonal part
/// of the operator. Since every diagonal block is itself diagonal, this is
/// one `r x r` inverse per `(disk, mode)`, `r` being the system grid size.
#[derive(Debug, Clone)]
pub struct Preconditioner<T> {
    layout: BlockLayout,
    r: usize,
    /// `r * r` entries per global index, row-major.
    inverses: Vec<C<T>>,
}

impl<T: Real> Preconditioner<T> {
    pub fn from_spec(spec: &BlockSystemSpec<T>, layout: &BlockLayout, config: &DiskConfig<T>) -> Result<Self> {
        let diags = (0..spec.rows() * spec.cols())
            .map(|e| {
                spec.entry(e / spec.cols(), e % spec.cols())
                    .map(|s| spec_diagonal(s, layout, config))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        let views: Vec<Option<&[C<T>]>> = diags.iter().map(|d| d.as_deref()).collect();
        Self::from_diagonals(spec.rows(), spec.cols(), &views, layout)
    }

    pub fn from_toeplitz(op: &ToeplitzBlockOperator<T>, layout: &BlockLayout) -> Result<Self> {
        let (rows, cols) = op.grid();
        Self::from_diagonals(rows, cols, &op.entry_diagonals(), layout)
    }

    /// Reads the diagonal-block diagonals of an `r x r` block dense matrix.
    pub fn from_dense(op: &DenseOperator<T>, layout: &BlockLayout) -> Result<Self> {
        let n = layout.total();
        if n == 0 || op.nrows() % n != 0 || op.nrows() != op.ncols() {
            return Err(Error::Dimension {
                expected: n,
                got: op.nrows(),
            });
        }
        let r = op.nrows() / n;
        let diags: Vec<Vec<C<T>>> = (0..r * r)
            .map(|e| {
                let (a, b) = (e / r, e % r);
                (0..n).map(|i| op.get(a * n + i, b * n + i)).collect()
            })
            .collect();
        let views: Vec<Option<&[C<T>]>> = diags.iter().map(|d| Some(d.as_slice())).collect();
        Self::from_diagonals(r, r, &views, layout)
    }

    fn from_diagonals(
        rows: usize,
        cols: usize,
        diags: &[Option<&[C<T>]>],
        layout: &BlockLayout,
    ) -> Result<Self> {
        if rows != cols {
            return Err(Error::Dimension {
                expected: rows,
                got: cols,
            });
        }
        let (r, n) = (rows, layout.total());
        let zero = C::new(T::zero(), T::zero());
        let scale = diags
            .iter()
            .flatten()
            .flat_map(|d| d.iter())
            .fold(T::zero(), |m, z| m.max(z.norm()));
        let tiny = T::lit(64.0) * T::epsilon() * scale;
        let mut inverses = Vec::with_capacity(n * r * r);
        for i in 0..n {
            let block: Vec<C<T>> = (0..r * r).map(|e| diags[e].map_or(zero, |d| d[i])).collect();
            match invert_small(r, block, tiny) {
                Some(inv) => inverses.extend(inv),
                None => {
                    let (disk, mode) = layout.locate(i);
                    return Err(Error::SingularPreconditioner { disk, mode });
                }
            }
        }
        Ok(Self {
            layout: layout.clone(),
            r,
            inverses,
        })
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }
}

impl<T: Real> LinearOperator<T> for Preconditioner<T> {
    fn nrows(&self) -> usize {
        self.r * self.layout.total()
    }

    fn ncols(&self) -> usize {
        self.nrows()
    }

    fn apply_into(&self, x: &[C<T>], y: &mut [C<T>]) {
        let (r, n) = (self.r, self.layout.total());
        assert_eq!(x.len(), r * n, "preconditioner: input length");
        for i in 0..n {
            let inv = &self.inverses[i * r * r..(i + 1) * r * r];
            for a in 0..r {
                y[a * n + i] = (0..r).fold(C::new(T::zero(), T::zero()), |acc, b| acc + inv[a * r + b] * x[b * n + i]);
            }
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting; `None` when a pivot is at
/// most `tiny` in modulus.
fn invert_small<T: Real>(r: usize, mut a: Vec<C<T>>, tiny: T) -> Option<Vec<C<T>>> {
    let zero = C::new(T::zero(), T::zero());
    let mut inv = vec![zero; r * r];
    for i in 0..r {
        inv[i * r + i] = C::new(T::one(), T::zero());
    }
    for col in 0..r {
        let piv = (col..r).max_by(|&x, &y| {
            a[x * r + col]
                .norm()
                .partial_cmp(&a[y * r + col].norm())
                .unwrap_or(Ordering::Equal)
        })?;
        if !(a[piv * r + col].norm() > tiny) {
            return None;
        }
        for j in 0..r {
            a.swap(col * r + j, piv * r + j);
            inv.swap(col * r + j, piv * r + j);
        }
        let d = C::new(T::one(), T::zero()) / a[col * r + col];
        for j in 0..r {
            a[col * r + j] *= d;
            inv[col * r + j] *= d;
        }
        for row in 0..r {
            if row == col {
                continue;
            }
            let f = a[row * r + col];
            for j in 0..r {
                let (ac, ic) = (a[col * r + j], inv[col * r + j]);
                a[row * r + j] -= f * ac;
                inv[row * r + j] -= f * ic;
            }
        }
    }
    Some(inv)
}
