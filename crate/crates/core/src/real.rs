//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the solvers are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Largest admissible bracket index `n`; keeps `n * PI` well inside the mantissa.
    const MAX_INDEX: u32;

    /// Absolute tolerance on the normalized secular residual.
    fn tol_secular() -> Self;

    /// Converts an `f64` literal. Panics only for values the type cannot hold at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range")
    }

    #[inline]
    fn from_index(i: u64) -> Self {
        Self::from_u64(i).expect("index out of range")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const MAX_INDEX: u32 = 1 << 26;

    #[inline]
    fn tol_secular() -> Self {
        1e-12
    }
}

impl Real for f32 {
    const MAX_INDEX: u32 = 1 << 10;

    #[inline]
    fn tol_secular() -> Self {
        1e-5
    }
}
