//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All algorithms are written against [`Real`], which is implemented for
//! `f32` and `f64`. Tolerances are expressed as `f64` literals and clamped
//! from below by a multiple of machine epsilon, so the same code stays
//! meaningful in single precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable by the solvers (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// A tolerance of `x`, but never below `64·ε` of this type.
    #[inline]
    fn tol(x: f64) -> Self {
        let t = Self::lit(x);
        let floor = Self::epsilon() * Self::lit(64.0);
        if t < floor {
            floor
        } else {
            t
        }
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{jθ}` with components snapped to exact zero when they are within a few
/// ulps of it, so quarter turns (θ = π/2) produce exactly `j`.
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(snap_zero(theta.cos()), snap_zero(theta.sin()))
}

/// Cosine with the same snapping as [`cis`].
pub fn cos_snapped<T: Real>(theta: T) -> T {
    snap_zero(theta.cos())
}

/// Sine with the same snapping as [`cis`].
pub fn sin_snapped<T: Real>(theta: T) -> T {
    snap_zero(theta.sin())
}

fn snap_zero<T: Real>(v: T) -> T {
    if v.abs() <= T::epsilon() * T::lit(4.0) {
        T::zero()
    } else {
        v
    }
}
