//! Disk configurations: construction, validation and the polar quantities
//! used by the operator formulas.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default rejection-sampling budget per disk.
pub const DEFAULT_ATTEMPTS_PER_DISK: usize = 10_000;

/// A circular obstacle with center `(x1, x2)` and radius `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disk<T> {
    pub x1: T,
    pub x2: T,
    pub a: T,
}

impl<T: Real> Disk<T> {
    pub fn new(x1: T, x2: T, a: T) -> Self {
        Self { x1, x2, a }
    }

    /// Local polar coordinates `(r_p, theta_p)` of a point.
    pub fn local_polar(&self, x: [T; 2]) -> (T, T) {
        polar(x[0] - self.x1, x[1] - self.x2)
    }

    pub fn contains(&self, x: [T; 2]) -> bool {
        self.local_polar(x).0 < self.a
    }
}

/// Polar coordinates with the angle in `(-pi, pi]` and zero angle at the origin.
pub fn polar<T: Real>(dx: T, dy: T) -> (T, T) {
    let r = dx.hypot(dy);
    if r == T::zero() {
        return (r, T::zero());
    }
    let mut t = dy.atan2(dx);
    if t <= -T::PI() {
        t = T::PI();
    }
    (r, t)
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    NonPositiveRadius { p: usize },
    /// Disks `p < q` overlap or touch (`b_pq <= a_p + a_q`).
    NotSeparated { p: usize, q: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveRadius { p } => write!(f, "disk {p} has a non-positive radius"),
            Violation::NotSeparated { p, q } => write!(f, "disks {p} and {q} are not strictly disjoint"),
        }
    }
}

/// Checks positive radii and strict pairwise disjointness; reports the first
/// violation in index order.
pub fn validate<T: Real>(disks: &[Disk<T>]) -> Result<(), Violation> {
    for (p, d) in disks.iter().enumerate() {
        if !(d.a > T::zero()) || !d.x1.is_finite() || !d.x2.is_finite() {
            return Err(Violation::NonPositiveRadius { p });
        }
    }
    for p in 0..disks.len() {
        for q in p + 1..disks.len() {
            let (dp, dq) = (&disks[p], &disks[q]);
            let b = (dp.x1 - dq.x1).hypot(dp.x2 - dq.x2);
            if !(b > dp.a + dq.a) {
                return Err(Violation::NotSeparated { p, q });
            }
        }
    }
    Ok(())
}

/// A validated, immutable collection of disjoint disks.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskConfig<T> {
    disks: Vec<Disk<T>>,
}

impl<T: Real> DiskConfig<T> {
    pub fn new(disks: Vec<Disk<T>>) -> Result<Self> {
        validate(&disks).map_err(|v| Error::Geometry(v.to_string()))?;
        Ok(Self { disks })
    }

    pub fn empty() -> Self {
        Self { disks: Vec::new() }
    }

    pub fn disks(&self) -> &[Disk<T>] {
        &self.disks
    }

    pub fn len(&self) -> usize {
        self.disks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty()
    }

    pub fn disk(&self, p: usize) -> &Disk<T> {
        &self.disks[p]
    }

    /// `(b_p, alpha_p)`: polar coordinates of the center `O_p`.
    pub fn center_polar(&self, p: usize) -> (T, T) {
        let d = &self.disks[p];
        polar(d.x1, d.x2)
    }

    /// `(b_pq, alpha_pq)`: polar coordinates of the vector `O_q -> O_p`.
    pub fn separation(&self, p: usize, q: usize) -> (T, T) {
        let (dp, dq) = (&self.disks[p], &self.disks[q]);
        polar(dp.x1 - dq.x1, dp.x2 - dq.x2)
    }

    /// Index of the disk containing `x` (strictly inside), if any.
    pub fn locate(&self, x: [T; 2]) -> Option<usize> {
        self.disks.iter().position(|d| d.contains(x))
    }

    /// Keeps the disks for which `keep` returns true.
    pub fn retain<F: FnMut(usize, &Disk<T>) -> bool>(&self, mut keep: F) -> Self {
        let disks = self
            .disks
            .iter()
            .enumerate()
            .filter(|(i, d)| keep(*i, d))
            .map(|(_, d)| *d)
            .collect();
        Self { disks }
    }

    /// Removes the listed disk indices.
    pub fn remove_disks(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Index {
                index: bad,
                len: self.len(),
            });
        }
        Ok(self.retain(|i, _| !indices.contains(&i)))
    }

    /// Rigid translation by `(dx, dy)`.
    pub fn translated(&self, dx: T, dy: T) -> Self {
        let disks = self
            .disks
            .iter()
            .map(|d| Disk::new(d.x1 + dx, d.x2 + dy, d.a))
            .collect();
        Self { disks }
    }

    /// Rigid rotation about the origin.
    pub fn rotated(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let disks = self
            .disks
            .iter()
            .map(|d| Disk::new(c * d.x1 - s * d.x2, s * d.x1 + c * d.x2, d.a))
            .collect();
        Self { disks }
    }
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Real> Rect<T> {
    pub fn square(half_width: T) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
        }
    }

    fn distance(&self, x: T, y: T) -> T {
        let dx = (self.x_min - x).max(T::zero()).max(x - self.x_max);
        let dy = (self.y_min - y).max(T::zero()).max(y - self.y_max);
        dx.hypot(dy)
    }
}

/// Region where no disk may be placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Hole<T> {
    Rect(Rect<T>),
    Disk { x1: T, x2: T, r: T },
}

impl<T: Real> Hole<T> {
    fn clears(&self, d: &Disk<T>) -> bool {
        match self {
            Hole::Rect(r) => r.distance(d.x1, d.x2) > d.a,
            Hole::Disk { x1, x2, r } => (d.x1 - *x1).hypot(d.x2 - *x2) > d.a + *r,
        }
    }
}

/// Parameters of a random cloud of disks.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomCloud<T> {
    pub region: Rect<T>,
    pub count: usize,
    pub a_min: T,
    pub a_max: T,
    /// Minimal gap between two disk boundaries.
    pub d_min: T,
    pub holes: Vec<Hole<T>>,
    pub seed: u64,
    pub attempts_per_disk: usize,
}

/// Random disks fully inside `region`, radii uniform in `[a_min, a_max]`,
/// pairwise gaps at least `d_min` (and strictly positive), avoiding holes.
/// Rejection sampling; deterministic for a given seed.
pub fn create_random_disks<T: Real>(spec: &RandomCloud<T>) -> Result<DiskConfig<T>> {
    if !(spec.a_min > T::zero()) || spec.a_min > spec.a_max {
        return Err(Error::Parameter(format!(
            "radius range [{}, {}] is invalid",
            spec.a_min, spec.a_max
        )));
    }
    if spec.d_min < T::zero() {
        return Err(Error::Parameter("d_min must be nonnegative".into()));
    }
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let (a_min, a_max) = (f(spec.a_min), f(spec.a_max));
    let r = &spec.region;
    let (x0, x1, y0, y1) = (f(r.x_min), f(r.x_max), f(r.y_min), f(r.y_max));

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut disks: Vec<Disk<T>> = Vec::with_capacity(spec.count);
    for index in 0..spec.count {
        let a = if a_max > a_min {
            rng.gen_range(a_min..=a_max)
        } else {
            a_min
        };
        let at = T::lit(a);
        let fail = Error::Placement {
            index,
            requested: spec.count,
            placed: disks.len(),
            attempts: spec.attempts_per_disk,
        };
        if x1 - x0 <= 2.0 * a || y1 - y0 <= 2.0 * a {
            return Err(fail);
        }
        let mut placed = false;
        for _ in 0..spec.attempts_per_disk {
            let cx = rng.gen_range(x0 + a..x1 - a);
            let cy = rng.gen_range(y0 + a..y1 - a);
            let cand = Disk::new(T::lit(cx), T::lit(cy), at);
            let free = disks.iter().all(|d| {
                let b = (d.x1 - cand.x1).hypot(d.x2 - cand.x2);
                let gap = b - d.a - cand.a;
                gap >= spec.d_min && gap > T::zero()
            }) && spec.holes.iter().all(|h| h.clears(&cand));
            if free {
                disks.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(fail);
        }
    }
    DiskConfig::new(disks)
}

fn lattice_check<T: Real>(step: T, a: T) -> Result<()> {
    if !(a > T::zero()) {
        return Err(Error::Geometry("lattice radius must be positive".into()));
    }
    if !(step > a + a) {
        return Err(Error::Geometry(format!(
            "lattice step {step} does not separate disks of radius {a}"
        )));
    }
    Ok(())
}

fn centered_offset<T: Real>(i: usize, n: usize) -> T {
    T::from_count(i) - T::from_count(n.saturating_sub(1)) / T::lit(2.0)
}

/// `nx * ny` disks on a square grid of spacing `step`, centered on `center`.
pub fn rectangular_lattice<T: Real>(
    nx: usize,
    ny: usize,
    step: T,
    a: T,
    center: [T; 2],
) -> Result<DiskConfig<T>> {
    lattice_check(step, a)?;
    let mut disks = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            disks.push(Disk::new(
                center[0] + centered_offset::<T>(i, nx) * step,
                center[1] + centered_offset::<T>(j, ny) * step,
                a,
            ));
        }
    }
    DiskConfig::new(disks)
}

/// Triangular lattice: rows spaced `step * sqrt(3)/2`, odd rows shifted by
/// `step/2`; every nearest-neighbour distance equals `step`.
pub fn triangular_lattice<T: Real>(
    nx: usize,
    ny: usize,
    step: T,
    a: T,
    center: [T; 2],
) -> Result<DiskConfig<T>> {
    lattice_check(step, a)?;
    let half = step / T::lit(2.0);
    let row_height = step * T::lit(3.0).sqrt() / T::lit(2.0);
    let recenter = if ny > 1 { half / T::lit(2.0) } else { T::zero() };
    let mut disks = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let shift = if j % 2 == 1 { half } else { T::zero() };
        for i in 0..nx {
            disks.push(Disk::new(
                center[0] + centered_offset::<T>(i, nx) * step + shift - recenter,
                center[1] + centered_offset::<T>(j, ny) * row_height,
                a,
            ));
        }
    }
    DiskConfig::new(disks)
}
