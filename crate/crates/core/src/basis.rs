//! Fourier truncation orders and the block layout of coefficient vectors.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::DiskConfig;
use crate::scalar::{Real, C};

/// Default truncation tolerance; matches the default GMRES tolerance.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Truncation order `N` of the Fourier series on a disk of radius `a` at
/// wavenumber `k`, for a target accuracy `eps`.
///
/// `N = [ka + (ln(2 sqrt2 pi ka / eps) / (2 sqrt2))^(2/3) (ka)^(1/3) + 1]`
/// with `[.]` the integer part; never below `max(1, ceil(ka))`.
pub fn truncation_order<T: Real>(k: T, a: T, eps: T) -> Result<usize> {
    let ka = (k * a).to_f64().unwrap_or(f64::NAN);
    let e = eps.to_f64().unwrap_or(f64::NAN);
    if !(ka > 0.0) || !ka.is_finite() {
        return Err(Error::Parameter(format!("k*a must be positive, got {ka}")));
    }
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::Parameter(format!("eps must lie in (0, 1), got {e}")));
    }
    let s2 = 2.0 * std::f64::consts::SQRT_2;
    let log = (s2 * std::f64::consts::PI * ka / e).ln().max(0.0);
    let n = (ka + (log / s2).powf(2.0 / 3.0) * ka.cbrt() + 1.0).floor();
    Ok((n as usize).max(ka.ceil() as usize).max(1))
}

/// Per-disk orders `N_p` and the offsets of each disk's block in a
/// coefficient vector. Inside a block, the index runs over `m = -N_p..=N_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    orders: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl BlockLayout {
    pub fn from_orders(orders: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(orders.len());
        let mut total = 0;
        for &n in &orders {
            offsets.push(total);
            total += 2 * n + 1;
        }
        Self {
            orders,
            offsets,
            total,
        }
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn order(&self, p: usize) -> usize {
        self.orders[p]
    }

    pub fn num_disks(&self) -> usize {
        self.orders.len()
    }

    /// `Ntot = sum_p (2 N_p + 1)`.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn block_len(&self, p: usize) -> usize {
        2 * self.orders[p] + 1
    }

    pub fn block(&self, p: usize) -> Range<usize> {
        self.offsets[p]..self.offsets[p] + self.block_len(p)
    }

    /// Global index of mode `m` on disk `p`.
    pub fn index(&self, p: usize, m: i64) -> usize {
        let n = self.orders[p] as i64;
        assert!(m.abs() <= n, "mode {m} outside -{n}..={n}");
        self.offsets[p] + (m + n) as usize
    }

    /// `(p, m)` for a global index.
    pub fn locate(&self, i: usize) -> (usize, i64) {
        assert!(i < self.total, "index {i} out of range {}", self.total);
        let p = self.offsets.partition_point(|&o| o <= i) - 1;
        (p, (i - self.offsets[p]) as i64 - self.orders[p] as i64)
    }

    pub fn modes(&self, p: usize) -> impl Iterator<Item = i64> {
        let n = self.orders[p] as i64;
        -n..=n
    }

    pub fn max_order(&self) -> usize {
        self.orders.iter().copied().max().unwrap_or(0)
    }
}

/// How the per-disk orders are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Truncation<T> {
    /// Orders from [`truncation_order`] at the given tolerance.
    Tolerance(T),
    /// The same order on every disk.
    Uniform(usize),
    /// One order per disk.
    Explicit(Vec<usize>),
}

pub fn make_layout<T: Real>(
    config: &DiskConfig<T>,
    k: T,
    truncation: &Truncation<T>,
) -> Result<BlockLayout> {
    let orders = match truncation {
        Truncation::Tolerance(eps) => config
            .disks()
            .iter()
            .map(|d| truncation_order(k, d.a, *eps))
            .collect::<Result<Vec<_>>>()?,
        Truncation::Uniform(n) => vec![*n; config.len()],
        Truncation::Explicit(orders) => {
            if orders.len() != config.len() {
                return Err(Error::Dimension {
                    expected: config.len(),
                    got: orders.len(),
                });
            }
            orders.clone()
        }
    };
    Ok(BlockLayout::from_orders(orders))
}

/// Coefficient vector blocked along a [`BlockLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector<T> {
    layout: BlockLayout,
    values: Vec<C<T>>,
}

impl<T: Real> CoeffVector<T> {
    pub fn new(layout: BlockLayout, values: Vec<C<T>>) -> Result<Self> {
        if values.len() != layout.total() {
            return Err(Error::Dimension {
                expected: layout.total(),
                got: values.len(),
            });
        }
        Ok(Self { layout, values })
    }

    pub fn zeros(layout: BlockLayout) -> Self {
        let values = vec![C::new(T::zero(), T::zero()); layout.total()];
        Self { layout, values }
    }

    /// Concatenates per-disk blocks.
    pub fn from_blocks(blocks: Vec<Vec<C<T>>>) -> Self {
        let orders = blocks.iter().map(|b| (b.len().max(1) - 1) / 2).collect();
        let layout = BlockLayout::from_orders(orders);
        let values = blocks.into_iter().flatten().collect();
        Self { layout, values }
    }

    pub fn into_blocks(self) -> Vec<Vec<C<T>>> {
        (0..self.layout.num_disks())
            .map(|p| self.values[self.layout.block(p)].to_vec())
            .collect()
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn block(&self, p: usize) -> &[C<T>] {
        &self.values[self.layout.block(p)]
    }

    pub fn block_mut(&mut self, p: usize) -> &mut [C<T>] {
        let r = self.layout.block(p);
        &mut self.values[r]
    }

    pub fn get(&self, p: usize, m: i64) -> C<T> {
        self.values[self.layout.index(p, m)]
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C<T>> {
        self.values
    }
}
