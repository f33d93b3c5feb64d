//! Near fields, boundary traces, far fields and RCS from solved densities.
//!
//! Each disk's contribution is stored as a modal expansion centered on the
//! disk: `sum_m c_m H_m(k r_p) e^{im theta_p}` outside and
//! `sum_m c_m J_m(k- r_p) e^{im theta_p}` inside (penetrable problems).

use rayon::prelude::*;

use crate::basis::CoeffVector;
use crate::error::{Error, Result};
use crate::formulations::{LayerWeights, Problem, Solution};
use crate::geometry::DiskConfig;
use crate::incidence::IncidentField;
use crate::scalar::{cplx, expi, Real, C};
use crate::specfun::{hankel1_values, j_seq_raw, CylinderFunctions};

/// RCS reported for a vanishing far field.
pub const RCS_FLOOR_DB: f64 = -400.0;

#[derive(Debug, Clone, PartialEq)]
struct InteriorExpansion<T> {
    k_minus: Vec<T>,
    coeffs: Vec<Vec<C<T>>>,
}

/// Evaluates the fields generated by a set of layer densities.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldEvaluator<T> {
    k: T,
    config: DiskConfig<T>,
    outgoing: Vec<Vec<C<T>>>,
    interior: Option<InteriorExpansion<T>>,
}

impl<T: Real> FieldEvaluator<T> {
    /// `L rho + M lambda`; either density may be absent.
    pub fn new(
        k: T,
        config: &DiskConfig<T>,
        rho: Option<&CoeffVector<T>>,
        lambda: Option<&CoeffVector<T>>,
    ) -> Result<Self> {
        let one = cplx(T::one(), T::zero());
        let zero = cplx(T::zero(), T::zero());
        let mut outgoing: Vec<Vec<C<T>>> = Vec::new();
        for (density, w) in [
            (rho, LayerWeights { single: one, double: zero }),
            (lambda, LayerWeights { single: zero, double: one }),
        ] {
            let Some(density) = density else { continue };
            let part = outgoing_coefficients(k, config, density, w)?;
            if outgoing.is_empty() {
                outgoing = part;
            } else {
                for (a, b) in outgoing.iter_mut().zip(part) {
                    if a.len() != b.len() {
                        return Err(Error::Dimension {
                            expected: a.len(),
                            got: b.len(),
                        });
                    }
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                }
            }
        }
        if outgoing.is_empty() {
            outgoing = vec![vec![zero]; config.len()];
        }
        Ok(Self {
            k,
            config: config.clone(),
            outgoing,
            interior: None,
        })
    }

    /// Adds the interior single-layer field `L- rho` at per-disk wavenumbers.
    pub fn with_interior(mut self, rho: &CoeffVector<T>, k_minus: Vec<T>, weight: C<T>) -> Result<Self> {
        let layout = rho.layout();
        if layout.num_disks() != self.config.len() || k_minus.len() != self.config.len() {
            return Err(Error::Dimension {
                expected: self.config.len(),
                got: layout.num_disks().min(k_minus.len()),
            });
        }
        let mut coeffs = Vec::with_capacity(self.config.len());
        for (p, d) in self.config.disks().iter().enumerate() {
            let cf = CylinderFunctions::new(k_minus[p] * d.a, layout.order(p))?;
            let c = weight * cplx(T::zero(), T::FRAC_PI_2() * d.a) / (T::TAU() * d.a).sqrt();
            coeffs.push(layout.modes(p).zip(rho.block(p)).map(|(m, r)| c * r * cf.h(m)).collect());
        }
        self.interior = Some(InteriorExpansion { k_minus, coeffs });
        Ok(self)
    }

    /// Evaluator for the representation a formulation attaches to its
    /// densities.
    pub fn from_solution(problem: &Problem<T>, solution: &Solution<T>, config: &DiskConfig<T>) -> Result<Self> {
        let rep = &problem.representation;
        let density = &solution.densities[rep.exterior_slot];
        let mut ev = Self {
            k: problem.k,
            config: config.clone(),
            outgoing: outgoing_coefficients(problem.k, config, density, rep.exterior)?,
            interior: None,
        };
        if let Some(int) = &rep.interior {
            ev = ev.with_interior(&solution.densities[int.slot], int.k_minus.clone(), int.single)?;
        }
        Ok(ev)
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn config(&self) -> &DiskConfig<T> {
        &self.config
    }

    pub fn has_interior(&self) -> bool {
        self.interior.is_some()
    }

    /// Scattered field at `x`; `None` inside a disk.
    pub fn scattered(&self, x: [T; 2]) -> Option<C<T>> {
        if self.config.locate(x).is_some() {
            return None;
        }
        let mut sum = cplx(T::zero(), T::zero());
        for (d, c) in self.config.disks().iter().zip(&self.outgoing) {
            let (r, theta) = d.local_polar(x);
            let n = (c.len() - 1) / 2;
            let h = hankel1_values(self.k * r, n);
            sum += modal_value(c, &h, theta);
        }
        Some(sum)
    }

    /// Scattered field and its gradient at `x`; `None` inside a disk.
    pub fn scattered_with_gradient(&self, x: [T; 2]) -> Option<(C<T>, [C<T>; 2])> {
        if self.config.locate(x).is_some() {
            return None;
        }
        Some(self.outgoing_sum(x, None))
    }

    /// Exterior limits on circle `p` at angle `theta`: the scattered field
    /// and its outward normal derivative.
    pub fn exterior_trace(&self, p: usize, theta: T) -> (C<T>, C<T>) {
        let d = self.config.disk(p);
        let (s, c) = theta.sin_cos();
        let x = [d.x1 + d.a * c, d.x2 + d.a * s];
        let (mut v, g) = self.outgoing_sum(x, Some(p));
        let mut dn = g[0] * c + g[1] * s;
        let coef = &self.outgoing[p];
        let n = (coef.len() - 1) / 2;
        let h = hankel1_values(self.k * d.a, n + 1);
        let (v0, dr, _) = modal_sums(coef, &h, theta);
        v += v0;
        dn += dr * self.k;
        (v, dn)
    }

    /// Interior limits on circle `p` (penetrable problems): field and
    /// outward normal derivative.
    pub fn interior_trace(&self, p: usize, theta: T) -> Option<(C<T>, C<T>)> {
        let int = self.interior.as_ref()?;
        let d = self.config.disk(p);
        let km = int.k_minus[p];
        let coef = &int.coeffs[p];
        let n = (coef.len() - 1) / 2;
        let j: Vec<C<T>> = j_seq_raw(km * d.a, n + 1).into_iter().map(|v| cplx(v, T::zero())).collect();
        let (v, dr, _) = modal_sums(coef, &j, theta);
        Some((v, dr * km))
    }

    /// Interior field at `x` if `x` lies strictly inside a disk and the
    /// evaluator carries an interior representation.
    pub fn interior_field(&self, x: [T; 2]) -> Option<C<T>> {
        self.interior_with_gradient(x).map(|(v, _)| v)
    }

    pub fn interior_with_gradient(&self, x: [T; 2]) -> Option<(C<T>, [C<T>; 2])> {
        let int = self.interior.as_ref()?;
        let p = self.config.locate(x)?;
        let d = self.config.disk(p);
        let km = int.k_minus[p];
        let coef = &int.coeffs[p];
        let n = (coef.len() - 1) / 2;
        let (r, theta) = d.local_polar(x);
        let j: Vec<C<T>> = j_seq_raw(km * r, n + 1).into_iter().map(|v| cplx(v, T::zero())).collect();
        let (v, dr, dt) = modal_sums(coef, &j, theta);
        if r == T::zero() {
            // only m = +-1 have a gradient at the center: J_1(kr) e^{+-i theta} ~ (k/2)(x1 +- i x2)
            let (cp, cm) = if n >= 1 { (coef[n + 1], coef[n - 1]) } else { (cplx(T::zero(), T::zero()), cplx(T::zero(), T::zero())) };
            let half = km * T::lit(0.5);
            let g = [(cp - cm) * half, (cp + cm) * cplx(T::zero(), half)];
            return Some((v, g));
        }
        Some((v, polar_gradient(dr * km, dt / r, theta)))
    }

    /// Far-field amplitude `a(theta)` with `u ~ e^{ikr} r^{-1/2} a(theta)`.
    pub fn far_field(&self, theta: T) -> C<T> {
        let (s, c) = theta.sin_cos();
        let mut sum = cplx(T::zero(), T::zero());
        for (d, coef) in self.config.disks().iter().zip(&self.outgoing) {
            let n = (coef.len() - 1) as i64 / 2;
            // sum_m c_m (-i)^m e^{im theta} = sum_m c_m e^{im (theta - pi/2)}
            let step = expi(theta - T::FRAC_PI_2());
            let mut e = expi(-T::from_order(n) * (theta - T::FRAC_PI_2()));
            let mut inner = cplx(T::zero(), T::zero());
            for cm in coef {
                inner += cm * e;
                e *= step;
            }
            sum += inner * expi(-self.k * (c * d.x1 + s * d.x2));
        }
        let amp = (T::lit(2.0) / (T::PI() * self.k)).sqrt();
        sum * expi(-T::FRAC_PI_4()) * amp
    }

    pub fn far_field_curve(&self, angles: &[T]) -> FarFieldCurve<T> {
        let amplitudes: Vec<C<T>> = angles.par_iter().map(|&t| self.far_field(t)).collect();
        let rcs_db = amplitudes.iter().map(|&a| rcs_db(a)).collect();
        FarFieldCurve {
            angles: angles.to_vec(),
            amplitudes,
            rcs_db,
        }
    }

    /// Value and gradient of the outgoing expansions of all disks except
    /// `skip`.
    fn outgoing_sum(&self, x: [T; 2], skip: Option<usize>) -> (C<T>, [C<T>; 2]) {
        let zero = cplx(T::zero(), T::zero());
        let (mut v, mut g) = (zero, [zero, zero]);
        for (q, (d, c)) in self.config.disks().iter().zip(&self.outgoing).enumerate() {
            if Some(q) == skip {
                continue;
            }
            let (r, theta) = d.local_polar(x);
            let n = (c.len() - 1) / 2;
            let h = hankel1_values(self.k * r, n + 1);
            let (vq, dr, dt) = modal_sums(c, &h, theta);
            let gq = polar_gradient(dr * self.k, dt / r, theta);
            v += vq;
            g[0] += gq[0];
            g[1] += gq[1];
        }
        (v, g)
    }
}

/// Outgoing coefficients `c^p_m` of `w.single L psi + w.double M psi`:
/// `c = (w_L (i pi a/2) J_m(ka) - w_M (i pi k a/2) J'_m(ka)) psi_m / sqrt(2 pi a)`.
fn outgoing_coefficients<T: Real>(
    k: T,
    config: &DiskConfig<T>,
    density: &CoeffVector<T>,
    w: LayerWeights<T>,
) -> Result<Vec<Vec<C<T>>>> {
    let layout = density.layout();
    if layout.num_disks() != config.len() {
        return Err(Error::Dimension {
            expected: config.len(),
            got: layout.num_disks(),
        });
    }
    let mut out = Vec::with_capacity(config.len());
    for (p, d) in config.disks().iter().enumerate() {
        let cf = CylinderFunctions::new(k * d.a, layout.order(p))?;
        let ipa = cplx(T::zero(), T::FRAC_PI_2() * d.a) / (T::TAU() * d.a).sqrt();
        out.push(
            layout
                .modes(p)
                .zip(density.block(p))
                .map(|(m, psi)| ipa * psi * (w.single * cf.j(m) - w.double * (k * cf.dj(m))))
                .collect(),
        );
    }
    Ok(out)
}

/// `sum_m c_m Z_m e^{im theta}` with `z[|m|]` holding `Z_|m|`.
fn modal_value<T: Real>(c: &[C<T>], z: &[C<T>], theta: T) -> C<T> {
    let n = (c.len() - 1) / 2;
    let step = expi(theta);
    let mut e = expi(-T::from_count(n) * theta);
    let mut sum = cplx(T::zero(), T::zero());
    for (i, cm) in c.iter().enumerate() {
        let m = i as i64 - n as i64;
        let zm = signed(z, m);
        sum += cm * zm * e;
        e *= step;
    }
    sum
}

/// Value, radial derivative (per unit argument) and angular derivative of
/// `sum_m c_m Z_m(x) e^{im theta}`; `z` must extend one order past the
/// expansion.
fn modal_sums<T: Real>(c: &[C<T>], z: &[C<T>], theta: T) -> (C<T>, C<T>, C<T>) {
    let n = (c.len() - 1) / 2;
    debug_assert!(z.len() >= n + 2);
    let half = T::lit(0.5);
    let step = expi(theta);
    let mut e = expi(-T::from_count(n) * theta);
    let zero = cplx(T::zero(), T::zero());
    let (mut v, mut dr, mut dt) = (zero, zero, zero);
    for (i, cm) in c.iter().enumerate() {
        let m = i as i64 - n as i64;
        let ma = m.unsigned_abs() as usize;
        let dz = if ma == 0 { -z[1] } else { (z[ma - 1] - z[ma + 1]) * half };
        let sign = if m < 0 && ma % 2 == 1 { -T::one() } else { T::one() };
        let t = cm * e * sign;
        v += t * z[ma];
        dr += t * dz;
        dt += t * z[ma] * cplx(T::zero(), T::from_order(m));
        e *= step;
    }
    (v, dr, dt)
}

fn signed<T: Real>(z: &[C<T>], m: i64) -> C<T> {
    let v = z[m.unsigned_abs() as usize];
    if m < 0 && m % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Cartesian gradient from the radial derivative and `(1/r) d/dtheta`.
fn polar_gradient<T: Real>(dr: C<T>, dt_over_r: C<T>, theta: T) -> [C<T>; 2] {
    let (s, c) = theta.sin_cos();
    [dr * c - dt_over_r * s, dr * s + dt_over_r * c]
}

/// `L rho + M lambda` at each point; `None` for points inside a disk.
pub fn external_field<T: Real>(
    points: &[[T; 2]],
    rho: Option<&CoeffVector<T>>,
    lambda: Option<&CoeffVector<T>>,
    k: T,
    config: &DiskConfig<T>,
) -> Result<Vec<Option<C<T>>>> {
    let ev = FieldEvaluator::new(k, config, rho, lambda)?;
    Ok(points.par_iter().map(|&x| ev.scattered(x)).collect())
}

/// `L- rho` inside the disks at per-disk wavenumbers; `None` for exterior
/// points.
pub fn internal_field<T: Real>(
    points: &[[T; 2]],
    rho: &CoeffVector<T>,
    k_minus: &[T],
    config: &DiskConfig<T>,
) -> Result<Vec<Option<C<T>>>> {
    let k = k_minus.first().copied().unwrap_or_else(T::one);
    let ev = FieldEvaluator::new(k, config, None, None)?.with_interior(rho, k_minus.to_vec(), cplx(T::one(), T::zero()))?;
    Ok(points.par_iter().map(|&x| ev.interior_field(x)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldCurve<T> {
    /// Radians.
    pub angles: Vec<T>,
    pub amplitudes: Vec<C<T>>,
    pub rcs_db: Vec<T>,
}

/// `n` angles `2 pi j / n`.
pub fn uniform_angles<T: Real>(n: usize) -> Vec<T> {
    (0..n).map(|j| T::TAU() * T::from_count(j) / T::from_count(n)).collect()
}

/// `10 log10(2 pi |a|^2)`, floored at `RCS_FLOOR_DB`.
pub fn rcs_db<T: Real>(a: C<T>) -> T {
    let v = T::TAU() * a.norm_sqr();
    let floor = T::lit(RCS_FLOOR_DB);
    if !(v > T::zero()) {
        return floor;
    }
    (T::lit(10.0) * v.log10()).max(floor)
}

/// Axis-aligned grid with `n1 x n2` nodes including the end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub x1: (T, T),
    pub x2: (T, T),
    pub n1: usize,
    pub n2: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(x1: (T, T), x2: (T, T), n1: usize, n2: usize) -> Result<Self> {
        let ok = |r: (T, T)| r.0.is_finite() && r.1.is_finite() && r.0 <= r.1;
        if !ok(x1) || !ok(x2) {
            return Err(Error::Parameter(format!("grid ranges must be finite and ordered, got {x1:?} {x2:?}")));
        }
        if n1 == 0 || n2 == 0 {
            return Err(Error::Parameter(format!("grid needs at least one node per axis, got {n1} x {n2}")));
        }
        Ok(Self { x1, x2, n1, n2 })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes with `x1` varying fastest.
    pub fn nodes(&self) -> Vec<[T; 2]> {
        let axis = |(lo, hi): (T, T), n: usize, i: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * T::from_count(i) / T::from_count(n - 1)
            }
        };
        (0..self.n2)
            .flat_map(|j| (0..self.n1).map(move |i| [axis(self.x1, self.n1, i), axis(self.x2, self.n2, j)]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeMask {
    Exterior,
    Interior(usize),
}

impl NodeMask {
    pub fn of<T: Real>(config: &DiskConfig<T>, x: [T; 2]) -> Self {
        config.locate(x).map_or(NodeMask::Exterior, NodeMask::Interior)
    }

    /// `-1` for exterior nodes, the disk index otherwise.
    pub fn code(&self) -> i64 {
        match self {
            NodeMask::Exterior => -1,
            NodeMask::Interior(p) => *p as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid<T> {
    pub spec: GridSpec<T>,
    pub nodes: Vec<[T; 2]>,
    pub values: Vec<C<T>>,
    pub mask: Vec<NodeMask>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldPart {
    Total,
    Scattered,
}

/// Field on a grid. Exterior nodes get the scattered (plus incident, for
/// `Total`) field; interior nodes get the interior field of penetrable
/// problems and zero otherwise.
pub fn field_grid<T: Real>(
    grid: &GridSpec<T>,
    ev: &FieldEvaluator<T>,
    incident: &IncidentField<T>,
    part: FieldPart,
) -> FieldGrid<T> {
    let nodes = grid.nodes();
    log::info!(
        "evaluating {} grid nodes against {} disks ({} expansion terms per node)",
        nodes.len(),
        ev.config.len(),
        ev.outgoing.iter().map(Vec::len).sum::<usize>()
    );
    let zero = cplx(T::zero(), T::zero());
    let (values, mask): (Vec<C<T>>, Vec<NodeMask>) = nodes
        .par_iter()
        .map(|&x| match NodeMask::of(&ev.config, x) {
            NodeMask::Exterior => {
                let s = ev.scattered(x).unwrap_or(zero);
                let v = match part {
                    FieldPart::Total => s + incident.value(ev.k, x),
                    FieldPart::Scattered => s,
                };
                (v, NodeMask::Exterior)
            }
            m @ NodeMask::Interior(_) => (ev.interior_field(x).unwrap_or(zero), m),
        })
        .unzip();
    FieldGrid {
        spec: *grid,
        nodes,
        values,
        mask,
    }
}

/// Total field on a grid for a solved problem.
pub fn total_field_grid<T: Real>(grid: &GridSpec<T>, ev: &FieldEvaluator<T>, incident: &IncidentField<T>) -> FieldGrid<T> {
    field_grid(grid, ev, incident, FieldPart::Total)
}

/// Incident field alone on a grid (every node evaluated); the mask still
/// records which nodes fall inside a disk of `config`.
pub fn incident_field_grid<T: Real>(
    grid: &GridSpec<T>,
    k: T,
    incident: &IncidentField<T>,
    config: &DiskConfig<T>,
) -> FieldGrid<T> {
    let nodes = grid.nodes();
    let values = nodes.par_iter().map(|&x| incident.value(k, x)).collect();
    let mask = nodes.iter().map(|&x| NodeMask::of(config, x)).collect();
    FieldGrid {
        spec: *grid,
        nodes,
        values,
        mask,
    }
}
