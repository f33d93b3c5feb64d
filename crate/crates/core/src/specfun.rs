//! Integer-order cylinder functions of a real positive argument.
//!
//! `J_m` is computed for all orders at once with Miller's backward
//! recurrence, normalized by `J_0 + 2 sum J_2k = 1`. `Y_0` and `Y_1` follow
//! from the Neumann series over the same `J` sequence and higher orders of
//! `Y` come from the (stable) forward recurrence. Negative orders are
//! obtained through `C_{-m} = (-1)^m C_m`.

use crate::error::{Error, Result};
use crate::scalar::{cplx, expi, Real, C};

/// Smallest argument accepted by the checked entry points.
pub const MIN_ARG: f64 = 1e-6;
/// Largest argument accepted by the checked entry points.
pub const MAX_ARG: f64 = 1e4;
/// Largest order accepted by the checked entry points.
pub const MAX_ORDER: usize = 2048;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// Sequence of cylinder-function values `C_0(x) .. C_mmax(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylSeq<T> {
    pub x: T,
    pub values: Vec<C<T>>,
}

impl<T: Real> CylSeq<T> {
    pub fn mmax(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Value at a signed order, `C_{-m} = (-1)^m C_m`.
    pub fn at(&self, m: i64) -> C<T> {
        let v = self.values[m.unsigned_abs() as usize];
        if m < 0 && m % 2 != 0 {
            -v
        } else {
            v
        }
    }
}

fn check_envelope<T: Real>(x: T, mmax: usize) -> Result<()> {
    let xf = x.to_f64().unwrap_or(f64::NAN);
    if !(MIN_ARG..=MAX_ARG).contains(&xf) {
        return Err(Error::Domain(format!(
            "argument {xf:e} outside [{MIN_ARG:e}, {MAX_ARG:e}]"
        )));
    }
    if mmax > MAX_ORDER {
        return Err(Error::Domain(format!(
            "order {mmax} exceeds the maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// `J_0(x) .. J_mmax(x)`.
pub fn bessel_j_seq<T: Real>(x: T, mmax: usize) -> Result<Vec<T>> {
    check_envelope(x, mmax)?;
    Ok(j_seq_raw(x, mmax))
}

/// `Y_0(x) .. Y_mmax(x)`. Orders whose magnitude overflows are returned as
/// infinities of the appropriate sign.
pub fn bessel_y_seq<T: Real>(x: T, mmax: usize) -> Result<Vec<T>> {
    check_envelope(x, mmax)?;
    Ok(jy_seq_raw(x, mmax).1)
}

/// `H^(1)_m(x) = J_m(x) + i Y_m(x)` for `m = 0..=mmax`.
pub fn hankel1_seq<T: Real>(x: T, mmax: usize) -> Result<CylSeq<T>> {
    check_envelope(x, mmax)?;
    Ok(hankel1_seq_raw(x, mmax))
}

/// Derivatives `C'_m(x)` from `C'_m = C_{m-1} - (m/x) C_m`, `C_{-1} = -C_1`.
pub fn deriv_seq<T: Real>(seq: &CylSeq<T>) -> CylSeq<T> {
    let values = derivative(&seq.values, seq.x);
    CylSeq { x: seq.x, values }
}

fn derivative<T: Real, V>(values: &[V], x: T) -> Vec<V>
where
    V: Copy + std::ops::Sub<Output = V> + std::ops::Mul<T, Output = V> + std::ops::Neg<Output = V>,
{
    let n = values.len();
    (0..n)
        .map(|m| {
            if m == 0 {
                if n > 1 {
                    -values[1]
                } else {
                    // J_1 unavailable; callers always request at least one order above
                    values[0] * T::zero()
                }
            } else {
                values[m - 1] - values[m] * (T::from_count(m) / x)
            }
        })
        .collect()
}

/// Starting order for the backward recurrence.
fn miller_start(x: f64, mmax: usize) -> usize {
    let base = (mmax as f64).max(x);
    (base + 15.0 * x.cbrt() + 25.0).ceil() as usize
}

/// Backward recurrence for `J_0 .. J_len-1`, valid for any `x >= 0`.
///
/// Returns the normalized sequence up to the starting order so the Neumann
/// series for `Y_0`, `Y_1` can reuse it.
fn j_full<T: Real>(x: T, mmax: usize) -> Vec<T> {
    if x == T::zero() {
        let mut v = vec![T::zero(); mmax + 1];
        v[0] = T::one();
        return v;
    }
    let start = miller_start(x.to_f64().unwrap_or(0.0), mmax);
    let big = T::max_value().sqrt();
    let inv_big = big.recip();
    let mut out = vec![T::zero(); start + 1];
    let mut next = T::zero();
    let mut cur = T::min_positive_value().sqrt();
    out[start] = cur;
    for n in (1..=start).rev() {
        // (2n)/x per step: a hoisted 2/x biases every step the same way
        let prev = T::from_count(2 * n) / x * cur - next;
        next = cur;
        cur = prev;
        out[n - 1] = cur;
        if cur.abs() > big {
            for v in out[n - 1..].iter_mut() {
                *v = *v * inv_big;
            }
            cur = cur * inv_big;
            next = next * inv_big;
        }
    }
    let mut sum = out[0];
    let mut k = 2;
    while k <= start {
        sum = sum + T::lit(2.0) * out[k];
        k += 2;
    }
    let scale = sum.recip();
    for v in out.iter_mut() {
        *v = *v * scale;
    }
    out
}

pub(crate) fn j_seq_raw<T: Real>(x: T, mmax: usize) -> Vec<T> {
    let mut v = j_full(x, mmax);
    v.truncate(mmax + 1);
    v
}

pub(crate) fn jy_seq_raw<T: Real>(x: T, mmax: usize) -> (Vec<T>, Vec<T>) {
    let jf = j_full(x, mmax.max(1));
    let pi = T::PI();
    let two = T::lit(2.0);
    let log_term = (x / two).ln() + T::lit(EULER_GAMMA);

    let mut s0 = T::zero();
    let mut s1 = T::zero();
    let mut k = 1usize;
    while 2 * k + 1 < jf.len() {
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        let kk = T::from_count(k);
        s0 = s0 + sign * jf[2 * k] / kk;
        s1 = s1 + sign * (jf[2 * k - 1] - jf[2 * k + 1]) / kk;
        k += 1;
    }
    let y0 = two / pi * log_term * jf[0] - T::lit(4.0) / pi * s0;
    let y1 = -two / (pi * x) * jf[0] + two / pi * log_term * jf[1] + two / pi * s1;

    let mut y = Vec::with_capacity(mmax + 1);
    y.push(y0);
    if mmax >= 1 {
        y.push(y1);
    }
    for m in 1..mmax {
        let prev = y[m];
        let next = if prev.is_finite() {
            T::from_count(2 * m) / x * y[m] - y[m - 1]
        } else {
            prev
        };
        y.push(next);
    }
    let mut j = jf;
    j.truncate(mmax + 1);
    (j, y)
}

pub(crate) fn hankel1_seq_raw<T: Real>(x: T, mmax: usize) -> CylSeq<T> {
    let (j, y) = jy_seq_raw(x, mmax);
    let values = j.into_iter().zip(y).map(|(a, b)| cplx(a, b)).collect();
    CylSeq { x, values }
}

/// `J_m`, `J'_m`, `H_m`, `H'_m` at one argument for `m = 0..=mmax`.
///
/// These are the diagonal factors that appear in every operator block.
#[derive(Debug, Clone)]
pub struct CylinderFunctions<T> {
    pub x: T,
    pub j: Vec<T>,
    pub dj: Vec<T>,
    pub h: Vec<C<T>>,
    pub dh: Vec<C<T>>,
}

impl<T: Real> CylinderFunctions<T> {
    pub fn new(x: T, mmax: usize) -> Result<Self> {
        check_envelope(x, mmax + 1)?;
        Ok(Self::compute(x, mmax))
    }

    pub(crate) fn compute(x: T, mmax: usize) -> Self {
        let (mut j, y) = jy_seq_raw(x, mmax + 1);
        let mut h: Vec<C<T>> = j.iter().zip(&y).map(|(&a, &b)| cplx(a, b)).collect();
        let mut dj = derivative(&j, x);
        let mut dh = derivative(&h, x);
        j.truncate(mmax + 1);
        dj.truncate(mmax + 1);
        h.truncate(mmax + 1);
        dh.truncate(mmax + 1);
        Self { x, j, dj, h, dh }
    }

    pub fn mmax(&self) -> usize {
        self.j.len() - 1
    }

    #[inline]
    fn parity(m: i64) -> (usize, bool) {
        (m.unsigned_abs() as usize, m < 0 && m % 2 != 0)
    }

    pub fn j(&self, m: i64) -> T {
        let (i, flip) = Self::parity(m);
        if flip {
            -self.j[i]
        } else {
            self.j[i]
        }
    }

    pub fn dj(&self, m: i64) -> T {
        let (i, flip) = Self::parity(m);
        if flip {
            -self.dj[i]
        } else {
            self.dj[i]
        }
    }

    pub fn h(&self, m: i64) -> C<T> {
        let (i, flip) = Self::parity(m);
        if flip {
            -self.h[i]
        } else {
            self.h[i]
        }
    }

    pub fn dh(&self, m: i64) -> C<T> {
        let (i, flip) = Self::parity(m);
        if flip {
            -self.dh[i]
        } else {
            self.dh[i]
        }
    }
}

/// Below this argument `hankel1_values` falls back to the full recurrence.
const ASYMPTOTIC_ARG: f64 = 25.0;

/// `H^(1)_m(x)` for `m = 0..=mmax` without the envelope check; used by
/// field evaluation at many points. For large `x`, `H_0` and `H_1` come from
/// the Hankel asymptotic expansion and higher orders from forward
/// recurrence, which keeps relative accuracy since `Y` dominates once
/// `m > x`.
pub(crate) fn hankel1_values<T: Real>(x: T, mmax: usize) -> Vec<C<T>> {
    if !(x.to_f64().unwrap_or(0.0) >= ASYMPTOTIC_ARG) {
        return hankel1_seq_raw(x, mmax).values;
    }
    let mut h = Vec::with_capacity(mmax.max(1) + 1);
    h.push(hankel_asymptotic(x, 0));
    h.push(hankel_asymptotic(x, 1));
    for m in 1..mmax {
        let next = h[m] * (T::from_count(2 * m) / x) - h[m - 1];
        h.push(next);
    }
    h.truncate(mmax + 1);
    h
}

/// `H^(1)_nu(x) ~ sqrt(2/(pi x)) e^{i(x - nu pi/2 - pi/4)} sum_k i^k a_k(nu) / x^k`,
/// summed until the terms stop shrinking or fall below roundoff.
fn hankel_asymptotic<T: Real>(x: T, nu: usize) -> C<T> {
    let mu = T::from_count(4 * nu * nu);
    let eight_x = T::lit(8.0) * x;
    let i = cplx(T::zero(), T::one());
    let mut term = cplx(T::one(), T::zero());
    let mut sum = term;
    for k in 1..200 {
        let odd = T::from_count(2 * k - 1);
        let next = term * i * ((mu - odd * odd) / (T::from_count(k) * eight_x));
        if next.norm() >= term.norm() {
            break;
        }
        term = next;
        sum += term;
        if term.norm() <= T::epsilon() * T::lit(0.1) * sum.norm() {
            break;
        }
    }
    let phase = x - (T::from_count(nu) * T::FRAC_PI_2() + T::FRAC_PI_4());
    let amp = (T::lit(2.0) / (T::PI() * x)).sqrt();
    expi(phase) * sum * amp
}
