//! Floating-point abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real scalar type the solver is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + NumAssign
    + Default
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal fits the target float")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the target float")
    }

    #[inline]
    fn from_order(m: i64) -> Self {
        Self::from_i64(m).expect("order fits the target float")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

/// `e^{i phase}`.
#[inline]
pub(crate) fn expi<T: Real>(phase: T) -> C<T> {
    let (s, c) = phase.sin_cos();
    cplx(c, s)
}

/// Euclidean norm of a complex slice.
pub fn norm2<T: Real>(v: &[C<T>]) -> T {
    // scaled accumulation avoids overflow for large entries
    let scale = v.iter().fold(T::zero(), |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s: T = v
        .iter()
        .map(|z| {
            let (a, b) = (z.re / scale, z.im / scale);
            a * a + b * b
        })
        .sum();
    scale * s.sqrt()
}

/// Conjugated inner product `sum conj(a_i) b_i`.
pub fn dotc<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter()
        .zip(b)
        .fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}
