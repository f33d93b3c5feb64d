//! Truncated boundary integral operators in the per-disk Fourier basis.
//!
//! Every off-diagonal block has the factored form `c D^p S^T E^q` where
//! `D^p`, `E^q` are diagonal (values of `J` or `J'`) and
//! `S^T_mn = H_{n-m}(k b_pq) e^{i(n-m) alpha_pq}` is Toeplitz. Diagonal blocks
//! are diagonal matrices.

mod dense;
mod factored;
mod precond;
mod toeplitz;

pub use dense::{assemble_dense, assemble_dense_system, DenseOperator};
pub use precond::Preconditioner;
pub use toeplitz::{assemble_toeplitz, assemble_toeplitz_system, ToeplitzBlockOperator};

use serde::{Deserialize, Serialize};

use crate::basis::BlockLayout;
use crate::error::{Error, Result};
use crate::geometry::DiskConfig;
use crate::scalar::{cplx, Real, C};
use crate::specfun::{hankel1_seq, CylinderFunctions};

/// The five operators of the Helmholtz boundary calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Identity,
    /// `L`: trace of the single-layer potential.
    SingleLayer,
    /// `M`: principal value of the double-layer potential.
    DoubleLayer,
    /// `N`: principal value of the normal derivative of the single layer.
    DnSingleLayer,
    /// `D`: normal derivative of the double layer.
    DnDoubleLayer,
}

/// Which wavenumber a term uses.
#[derive(Debug, Clone, PartialEq)]
pub enum Medium<T> {
    /// Exterior operator: full block structure at one wavenumber.
    Exterior(T),
    /// Interior operator: one wavenumber per disk, diagonal blocks only
    /// (fields inside distinct disks do not interact).
    Interior(Vec<T>),
}

/// `weight * kind` at a given medium, optionally scaled per row disk.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm<T> {
    pub kind: OperatorKind,
    pub weight: C<T>,
    pub medium: Medium<T>,
    /// Extra factor for the rows of disk `p`; used for mixed boundary
    /// conditions and per-disk contrasts.
    pub row_scale: Option<Vec<C<T>>>,
}

impl<T: Real> OperatorTerm<T> {
    pub fn new(kind: OperatorKind, weight: C<T>, k: T) -> Self {
        Self {
            kind,
            weight,
            medium: Medium::Exterior(k),
            row_scale: None,
        }
    }

    pub fn interior(kind: OperatorKind, weight: C<T>, k: Vec<T>) -> Self {
        Self {
            kind,
            weight,
            medium: Medium::Interior(k),
            row_scale: None,
        }
    }

    pub fn with_row_scale(mut self, scale: Vec<C<T>>) -> Self {
        self.row_scale = Some(scale);
        self
    }

    fn scale(&self, p: usize) -> C<T> {
        match &self.row_scale {
            Some(s) => self.weight * s[p],
            None => self.weight,
        }
    }

    fn check(&self, m: usize) -> Result<()> {
        let positive = |k: &T| *k > T::zero() && k.is_finite();
        match &self.medium {
            Medium::Exterior(k) if !positive(k) => {
                return Err(Error::Parameter(format!("wavenumber must be positive, got {k}")))
            }
            Medium::Interior(ks) => {
                if ks.len() != m {
                    return Err(Error::Dimension {
                        expected: m,
                        got: ks.len(),
                    });
                }
                if let Some(k) = ks.iter().find(|k| !positive(k)) {
                    return Err(Error::Parameter(format!(
                        "interior wavenumber must be positive, got {k}"
                    )));
                }
            }
            _ => {}
        }
        if let Some(s) = &self.row_scale {
            if s.len() != m {
                return Err(Error::Dimension {
                    expected: m,
                    got: s.len(),
                });
            }
        }
        Ok(())
    }
}

/// A linear combination of operators acting on one density.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec<T> {
    pub terms: Vec<OperatorTerm<T>>,
}

impl<T: Real> OperatorSpec<T> {
    pub fn new(terms: Vec<OperatorTerm<T>>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Parameter("operator spec needs at least one term".into()));
        }
        Ok(Self { terms })
    }

    pub fn single(kind: OperatorKind, weight: C<T>, k: T) -> Self {
        Self {
            terms: vec![OperatorTerm::new(kind, weight, k)],
        }
    }

    /// `(kind, weight)` pairs at a common exterior wavenumber.
    pub fn combination(k: T, parts: &[(OperatorKind, C<T>)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(kind, w)| OperatorTerm::new(kind, w, k)).collect())
    }

    pub fn append(mut self, other: OperatorSpec<T>) -> Self {
        self.terms.extend(other.terms);
        self
    }

    fn check(&self, m: usize) -> Result<()> {
        self.terms.iter().try_for_each(|t| t.check(m))
    }
}

/// Grid of operator specs coupling several densities on the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystemSpec<T> {
    rows: usize,
    cols: usize,
    entries: Vec<Option<OperatorSpec<T>>>,
}

impl<T: Real> BlockSystemSpec<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Option<OperatorSpec<T>>>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> Option<&OperatorSpec<T>> {
        self.entries[r * self.cols + c].as_ref()
    }
}

impl<T: Real> From<OperatorSpec<T>> for BlockSystemSpec<T> {
    fn from(spec: OperatorSpec<T>) -> Self {
        Self {
            rows: 1,
            cols: 1,
            entries: vec![Some(spec)],
        }
    }
}

/// Anything that maps a vector to a vector linearly.
pub trait LinearOperator<T: Real>: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply_into(&self, x: &[C<T>], y: &mut [C<T>]);

    fn apply(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut y = vec![C::new(T::zero(), T::zero()); self.nrows()];
        self.apply_into(x, &mut y);
        y
    }
}

/// Square operator given by a closure `(x, y) -> y = A x`.
pub struct FnOperator<F> {
    pub n: usize,
    pub f: F,
}

impl<T: Real, F: Fn(&[C<T>], &mut [C<T>]) + Sync> LinearOperator<T> for FnOperator<F> {
    fn nrows(&self) -> usize {
        self.n
    }

    fn ncols(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[C<T>], y: &mut [C<T>]) {
        (self.f)(x, y)
    }
}

/// Which cylinder function sits on a diagonal factor of an off-diagonal block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Factor {
    J,
    DJ,
}

/// Off-diagonal factorization `(c0, left, right)` of a kind; the block is
/// `c0 sqrt(a_p a_q) left^p S^T right^q`.
pub(crate) fn offdiag_form<T: Real>(kind: OperatorKind, k: T) -> Option<(C<T>, Factor, Factor)> {
    let half_pi = T::FRAC_PI_2();
    let i = |v: T| cplx(T::zero(), v);
    match kind {
        OperatorKind::Identity => None,
        OperatorKind::SingleLayer => Some((i(half_pi), Factor::J, Factor::J)),
        OperatorKind::DoubleLayer => Some((i(-half_pi * k), Factor::J, Factor::DJ)),
        OperatorKind::DnSingleLayer => Some((i(half_pi * k), Factor::DJ, Factor::J)),
        OperatorKind::DnDoubleLayer => Some((i(-half_pi * k * k), Factor::DJ, Factor::DJ)),
    }
}

/// Diagonal-block entry of `kind` for mode `m` on a disk of radius `a`.
pub(crate) fn diag_entry<T: Real>(
    kind: OperatorKind,
    k: T,
    a: T,
    cf: &CylinderFunctions<T>,
    m: i64,
) -> C<T> {
    let half = T::lit(0.5);
    let ipa = cplx(T::zero(), T::FRAC_PI_2() * a);
    match kind {
        OperatorKind::Identity => cplx(T::one(), T::zero()),
        OperatorKind::SingleLayer => ipa * cf.h(m) * cf.j(m),
        OperatorKind::DoubleLayer => -ipa * cf.dh(m) * (k * cf.j(m)) - half,
        OperatorKind::DnSingleLayer => ipa * cf.dh(m) * (k * cf.j(m)) + half,
        OperatorKind::DnDoubleLayer => -ipa * cf.dh(m) * (k * k * cf.dj(m)),
    }
}

/// `H_l(k b_pq) e^{i l alpha_pq}` for `l = -(N_p+N_q) ..= N_p+N_q`, stored
/// at index `l + N_p + N_q`.
pub fn separation_generator<T: Real>(
    p: usize,
    q: usize,
    layout: &BlockLayout,
    k: T,
    config: &DiskConfig<T>,
) -> Result<Vec<C<T>>> {
    if p == q {
        return Err(Error::Parameter(format!(
            "separation generator needs distinct disks, got p = q = {p}"
        )));
    }
    let (b, alpha) = config.separation(p, q);
    let lmax = layout.order(p) + layout.order(q);
    let h = hankel1_seq(k * b, lmax)?;
    let lmax = lmax as i64;
    Ok((-lmax..=lmax)
        .map(|l| h.at(l) * crate::scalar::expi(T::from_order(l) * alpha))
        .collect())
}

/// Cylinder functions on every disk at one wavenumber.
pub(crate) fn disk_functions<T: Real>(
    config: &DiskConfig<T>,
    layout: &BlockLayout,
    k: impl Fn(usize) -> T,
) -> Result<Vec<CylinderFunctions<T>>> {
    config
        .disks()
        .iter()
        .enumerate()
        .map(|(p, d)| CylinderFunctions::new(k(p) * d.a, layout.order(p)))
        .collect()
}

pub(crate) fn factor_values<T: Real>(cf: &CylinderFunctions<T>, f: Factor, n: usize) -> Vec<C<T>> {
    let n = n as i64;
    (-n..=n)
        .map(|m| match f {
            Factor::J => cplx(cf.j(m), T::zero()),
            Factor::DJ => cplx(cf.dj(m), T::zero()),
        })
        .collect()
}

/// Dense `(2N_p+1) x (2N_q+1)` block of one operator kind, row-major.
pub fn assemble_block<T: Real>(
    kind: OperatorKind,
    p: usize,
    q: usize,
    layout: &BlockLayout,
    k: T,
    config: &DiskConfig<T>,
) -> Result<Vec<C<T>>> {
    let (np, nq) = (layout.order(p), layout.order(q));
    let (rows, cols) = (2 * np + 1, 2 * nq + 1);
    let zero = C::new(T::zero(), T::zero());
    let mut out = vec![zero; rows * cols];
    let ap = config.disk(p).a;
    let cfp = CylinderFunctions::new(k * ap, np)?;
    if p == q {
        for (i, m) in layout.modes(p).enumerate() {
            out[i * cols + i] = diag_entry(kind, k, ap, &cfp, m);
        }
        return Ok(out);
    }
    let Some((c0, left, right)) = offdiag_form(kind, k) else {
        return Ok(out);
    };
    let aq = config.disk(q).a;
    let cfq = CylinderFunctions::new(k * aq, nq)?;
    let gen = separation_generator(p, q, layout, k, config)?;
    let c = c0 * (ap * aq).sqrt();
    let d = factor_values(&cfp, left, np);
    let e = factor_values(&cfq, right, nq);
    let shift = (np + nq) as i64;
    for (i, m) in layout.modes(p).enumerate() {
        for (j, n) in layout.modes(q).enumerate() {
            out[i * cols + j] = c * d[i] * gen[(n - m + shift) as usize] * e[j];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Disk;
    use crate::specfun::hankel1_seq;

    fn pair() -> DiskConfig<f64> {
        DiskConfig::new(vec![Disk::new(0.0, 0.0, 1.0), Disk::new(4.0, 0.0, 1.0)]).unwrap()
    }

    #[test]
    fn generator_entries() {
        let c = pair();
        let l = BlockLayout::from_orders(vec![2, 2]);
        let g = separation_generator(1, 0, &l, 1.0, &c).unwrap();
        // alpha_10 = 0: real phases
        let h = hankel1_seq(4.0, 4).unwrap();
        for (i, v) in g.iter().enumerate() {
            assert!((*v - h.at(i as i64 - 4)).norm() < 1e-15);
        }
        let cfg = DiskConfig::new(vec![
            Disk::new(5.0 * std::f64::consts::FRAC_PI_4.cos(), 5.0 * std::f64::consts::FRAC_PI_4.sin(), 1.0),
            Disk::new(0.0, 0.0, 1.0),
        ])
        .unwrap();
        let l = BlockLayout::from_orders(vec![3, 3]);
        let g = separation_generator(0, 1, &l, 1.0, &cfg).unwrap();
        let h3 = hankel1_seq(5.0, 3).unwrap().at(3);
        let want = h3 * crate::scalar::expi(3.0 * std::f64::consts::FRAC_PI_4);
        assert!((g[9] - want).norm() < 1e-14 * want.norm());
        assert!(separation_generator(0, 0, &l, 1.0, &cfg).is_err());
    }

    #[test]
    fn single_layer_mode_zero_coupling() {
        let c = pair();
        let l = BlockLayout::from_orders(vec![2, 2]);
        let b = assemble_block(OperatorKind::SingleLayer, 0, 1, &l, 1.0, &c).unwrap();
        let j0 = crate::specfun::bessel_j_seq(1.0, 0).unwrap()[0];
        let h0 = hankel1_seq(4.0, 0).unwrap().at(0);
        let want = cplx(0.0, std::f64::consts::FRAC_PI_2) * j0 * j0 * h0;
        assert!((b[2 * 5 + 2] - want).norm() < 1e-15);
    }

    #[test]
    fn diagonal_closed_forms_agree() {
        for ka in [0.5, 2.3, 17.0] {
            let (k, a) = (ka, 1.0);
            let n = 40;
            let cf = CylinderFunctions::new(ka, n).unwrap();
            let ipka = cplx(0.0, std::f64::consts::FRAC_PI_2 * ka);
            for m in -(n as i64)..=n as i64 {
                let mdiag = diag_entry(OperatorKind::DoubleLayer, k, a, &cf, m);
                let alt = -ipka * cf.dj(m) * cf.h(m) + 0.5;
                assert!((mdiag - alt).norm() <= 1e-12 * mdiag.norm().max(1.0), "M ka={ka} m={m}");
                let ndiag = diag_entry(OperatorKind::DnSingleLayer, k, a, &cf, m);
                let alt = ipka * cf.dj(m) * cf.h(m) - 0.5;
                assert!((ndiag - alt).norm() <= 1e-12 * ndiag.norm().max(1.0), "N ka={ka} m={m}");
            }
        }
    }

    #[test]
    fn identity_block() {
        let c = pair();
        let l = BlockLayout::from_orders(vec![1, 2]);
        let b = assemble_block(OperatorKind::Identity, 0, 0, &l, 1.0, &c).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b[i * 3 + j].re, if i == j { 1.0 } else { 0.0 });
            }
        }
        let off = assemble_block(OperatorKind::Identity, 0, 1, &l, 1.0, &c).unwrap();
        assert!(off.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn spec_validation() {
        assert!(OperatorSpec::<f64>::new(vec![]).is_err());
        let bad = OperatorSpec::single(OperatorKind::SingleLayer, cplx(1.0, 0.0), -1.0);
        assert!(bad.check(2).is_err());
        let t = OperatorTerm::interior(OperatorKind::SingleLayer, cplx(1.0, 0.0), vec![1.0]);
        assert!(OperatorSpec::new(vec![t]).unwrap().check(2).is_err());
        assert!(BlockSystemSpec::<f64>::new(2, 2, vec![None; 3]).is_err());
    }

    fn trio() -> DiskConfig<f64> {
        DiskConfig::new(vec![
            Disk::new(0.0, 0.0, 0.5),
            Disk::new(2.1, 0.4, 0.3),
            Disk::new(-0.7, 1.9, 0.4),
        ])
        .unwrap()
    }

    fn rand_vec(n: usize, seed: u64) -> Vec<C<f64>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn cfie(k: f64) -> OperatorSpec<f64> {
        let eta = cplx(0.0, k);
        OperatorSpec::combination(
            k,
            &[
                (OperatorKind::SingleLayer, eta * 0.5),
                (OperatorKind::Identity, cplx(0.25, 0.0)),
                (OperatorKind::DnSingleLayer, cplx(0.5, 0.0)),
            ],
        )
        .unwrap()
    }

    fn rel(a: &[C<f64>], b: &[C<f64>]) -> f64 {
        let d: Vec<C<f64>> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        crate::scalar::norm2(&d) / crate::scalar::norm2(b)
    }

    #[test]
    fn dense_blocks_match_assemble_block() {
        let c = trio();
        let l = BlockLayout::from_orders(vec![4, 3, 5]);
        let k = 2.0;
        for kind in [
            OperatorKind::Identity,
            OperatorKind::SingleLayer,
            OperatorKind::DoubleLayer,
            OperatorKind::DnSingleLayer,
            OperatorKind::DnDoubleLayer,
        ] {
            let a = assemble_dense(&OperatorSpec::single(kind, cplx(1.0, 0.0), k), &l, &c).unwrap();
            for p in 0..3 {
                for q in 0..3 {
                    let b = assemble_block(kind, p, q, &l, k, &c).unwrap();
                    let cols = l.block_len(q);
                    for (i, gi) in l.block(p).enumerate() {
                        for (j, gj) in l.block(q).enumerate() {
                            assert!((a.get(gi, gj) - b[i * cols + j]).norm() <= 1e-15 * (1.0 + b[i * cols + j].norm()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn toeplitz_matches_dense() {
        let c = trio();
        let l = BlockLayout::from_orders(vec![6, 4, 5]);
        let spec = cfie(2.0 * std::f64::consts::PI);
        let d = assemble_dense(&spec, &l, &c).unwrap();
        let t = assemble_toeplitz(&spec, &l, &c).unwrap();
        let r = t.to_dense();
        for i in 0..l.total() {
            for j in 0..l.total() {
                assert!((r.get(i, j) - d.get(i, j)).norm() <= 1e-13 * (1.0 + d.get(i, j).norm()));
            }
        }
        for seed in 0..5 {
            let v = rand_vec(l.total(), seed);
            assert!(rel(&t.apply(&v), &d.apply(&v)) <= 1e-12);
        }
        let z = vec![cplx(0.0, 0.0); l.total()];
        assert!(t.apply(&z).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn close_pairs_at_low_frequency_stay_accurate() {
        // two touching-close disks plus a far one: H_l(k b) spans ~20 decades
        let c = DiskConfig::new(vec![Disk::new(0.0, 0.0, 0.5), Disk::new(1.05, 0.0, 0.5), Disk::new(40.0, 3.0, 0.5)]).unwrap();
        let l = BlockLayout::from_orders(vec![12, 12, 12]);
        for kind in [OperatorKind::SingleLayer, OperatorKind::DnDoubleLayer] {
            let spec = OperatorSpec::single(kind, cplx(1.0, 0.0), 0.5);
            let d = assemble_dense(&spec, &l, &c).unwrap();
            let t = assemble_toeplitz(&spec, &l, &c).unwrap();
            for seed in 0..3 {
                let v = rand_vec(l.total(), seed);
                assert!(rel(&t.apply(&v), &d.apply(&v)) <= 1e-12);
            }
        }
    }

    #[test]
    fn identity_and_linearity() {
        let c = trio();
        let l = BlockLayout::from_orders(vec![3, 3, 3]);
        let id = assemble_toeplitz(&OperatorSpec::single(OperatorKind::Identity, cplx(1.0, 0.0), 1.0), &l, &c).unwrap();
        let v = rand_vec(l.total(), 9);
        assert_eq!(id.apply(&v), v);
        let dense_id = assemble_dense(&OperatorSpec::single(OperatorKind::Identity, cplx(1.0, 0.0), 1.0), &l, &c).unwrap();
        assert_eq!(dense_id.data(), DenseOperator::identity(l.total()).data());
        let t = assemble_toeplitz(&cfie(3.0), &l, &c).unwrap();
        let u = rand_vec(l.total(), 10);
        let (al, be) = (cplx(0.3, -1.2), cplx(-2.0, 0.5));
        let comb: Vec<C<f64>> = u.iter().zip(&v).map(|(a, b)| al * a + be * b).collect();
        let lhs = t.apply(&comb);
        let rhs: Vec<C<f64>> = t.apply(&u).iter().zip(t.apply(&v)).map(|(a, b)| al * a + be * b).collect();
        assert!(rel(&lhs, &rhs) <= 1e-13);
    }

    #[test]
    fn assembly_is_linear_in_terms() {
        let c = trio();
        let l = BlockLayout::from_orders(vec![3, 2, 4]);
        let k = 1.7;
        let a = assemble_dense(&OperatorSpec::single(OperatorKind::SingleLayer, cplx(0.0, 2.0), k), &l, &c).unwrap();
        let b = assemble_dense(&OperatorSpec::single(OperatorKind::DoubleLayer, cplx(-1.0, 0.0), k), &l, &c).unwrap();
        let ab = assemble_dense(
            &OperatorSpec::combination(k, &[(OperatorKind::SingleLayer, cplx(0.0, 2.0)), (OperatorKind::DoubleLayer, cplx(-1.0, 0.0))])
                .unwrap(),
            &l,
            &c,
        )
        .unwrap();
        for (x, (y, z)) in ab.data().iter().zip(a.data().iter().zip(b.data())) {
            assert!((x - (y + z)).norm() <= 1e-15 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn storage_bound() {
        let disks = (0..10).map(|i| Disk::new(3.0 * i as f64, 0.0, 1.0)).collect();
        let c = DiskConfig::new(disks).unwrap();
        let n = 6;
        let l = BlockLayout::from_orders(vec![n; 10]);
        let t = assemble_toeplitz(&OperatorSpec::single(OperatorKind::SingleLayer, cplx(1.0, 0.0), 1.0), &l, &c).unwrap();
        assert!(t.storage() <= 10 * (2 * n + 1) + 90 * (4 * n + 1 + 2 * (2 * n + 1) + 1));
        assert!(t.storage() < l.total() * l.total());
    }

    #[test]
    fn single_disk_preconditioned_efie_is_identity() {
        let c = DiskConfig::new(vec![Disk::new(0.3, -0.2, 1.0)]).unwrap();
        let l = BlockLayout::from_orders(vec![8]);
        let spec = OperatorSpec::single(OperatorKind::SingleLayer, cplx(1.0, 0.0), 1.0);
        let a = assemble_dense(&spec, &l, &c).unwrap();
        let p = Preconditioner::from_spec(&spec.clone().into(), &l, &c).unwrap();
        for j in 0..l.total() {
            let col: Vec<C<f64>> = (0..l.total()).map(|i| a.get(i, j)).collect();
            let y = p.apply(&col);
            for (i, v) in y.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - cplx(want, 0.0)).norm() < 1e-14);
            }
        }
        let pd = Preconditioner::from_dense(&a, &l).unwrap();
        let v = rand_vec(l.total(), 3);
        assert!(rel(&pd.apply(&v), &p.apply(&v)) < 1e-15);
    }

    #[test]
    fn preconditioner_flags_resonance() {
        // first zero of J_0
        let k = 2.404_825_557_695_773;
        let c = DiskConfig::new(vec![Disk::new(0.0, 0.0, 1.0), Disk::new(3.0, 0.0, 1.0)]).unwrap();
        let l = BlockLayout::from_orders(vec![5, 5]);
        let spec = OperatorSpec::single(OperatorKind::SingleLayer, cplx(1.0, 0.0), k);
        match Preconditioner::from_spec(&spec.into(), &l, &c) {
            Err(Error::SingularPreconditioner { disk: 0, mode: 0 }) => {}
            other => panic!("expected singular preconditioner, got {other:?}"),
        }
    }

    #[test]
    fn block_system_preconditioner_inverts_diagonal() {
        let c = trio();
        let l = BlockLayout::from_orders(vec![3, 3, 3]);
        let k = 1.0;
        let ki = vec![2.0, 2.5, 3.0];
        let sys = BlockSystemSpec::new(
            2,
            2,
            vec![
                Some(OperatorSpec::single(OperatorKind::SingleLayer, cplx(1.0, 0.0), k)),
                Some(OperatorSpec::new(vec![OperatorTerm::interior(OperatorKind::SingleLayer, cplx(-1.0, 0.0), ki.clone())]).unwrap()),
                Some(OperatorSpec::combination(k, &[(OperatorKind::Identity, cplx(-0.5, 0.0)), (OperatorKind::DnSingleLayer, cplx(1.0, 0.0))]).unwrap()),
                Some(
                    OperatorSpec::new(vec![
                        OperatorTerm::interior(OperatorKind::Identity, cplx(-0.5, 0.0), ki.clone()),
                        OperatorTerm::interior(OperatorKind::DnSingleLayer, cplx(-1.0, 0.0), ki),
                    ])
                    .unwrap(),
                ),
            ],
        )
        .unwrap();
        let d = assemble_dense_system(&sys, &l, &c).unwrap();
        let t = assemble_toeplitz_system(&sys, &l, &c).unwrap();
        let v = rand_vec(2 * l.total(), 5);
        assert!(rel(&t.apply(&v), &d.apply(&v)) < 1e-12);
        let p = Preconditioner::from_toeplitz(&t, &l).unwrap();
        let pd = Preconditioner::from_dense(&d, &l).unwrap();
        assert!(rel(&p.apply(&v), &pd.apply(&v)) < 1e-13);
        // interior blocks do not couple disks
        let n = l.total();
        for i in l.block(0) {
            for j in l.block(1) {
                assert_eq!(d.get(i, n + j).norm(), 0.0);
            }
        }
    }
}
