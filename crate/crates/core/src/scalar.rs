//! Scalar abstraction for the mode solvers and closed-form formulas.
//!
//! Everything that does not need complex linear algebra is written against
//! [`Real`], so it runs in `f32` as well as `f64`. The quantum-dynamics side
//! of the crate is fixed to `f64` (see the aliases at the crate root).

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// CODATA 2018 reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Magnetic constant over 4π (T m / A), SI-exact pre-2019 value.
pub const MU0_OVER_4PI: f64 = 1.0e-7;
/// Electron gyromagnetic ratio (rad s⁻¹ T⁻¹).
pub const GAMMA_ELECTRON: f64 = 1.760_859_630_23e11;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn to_angular<T: Real>(hz: T) -> T {
    hz * T::TAU()
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn to_ordinary<T: Real>(rad_per_s: T) -> T {
    rad_per_s / T::TAU()
}
