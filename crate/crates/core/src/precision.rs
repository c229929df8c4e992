//! Scalar types and their IEEE precision tags.
//!
//! The mixed precision algorithms run in two formats: a *working* precision
//! (binary32) that inputs and outputs live in, and a *higher* precision
//! (binary64) for the Gram, Cholesky and eigen steps. Kernels are generic over
//! [`Real`]; the pairing between the two is expressed by [`Widen`].

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Precision tag of a floating point format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precision {
    /// IEEE binary32, unit roundoff 2⁻²⁴.
    Working,
    /// IEEE binary64, unit roundoff 2⁻⁵³.
    Higher,
}

impl Precision {
    pub fn unit_roundoff(self) -> f64 {
        match self {
            Precision::Working => f32::UNIT_ROUNDOFF,
            Precision::Higher => f64::UNIT_ROUNDOFF,
        }
    }

    /// Tag used by the matrix text format.
    pub fn tag(self) -> &'static str {
        match self {
            Precision::Working => "working",
            Precision::Higher => "higher",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "working" => Some(Precision::Working),
            "higher" => Some(Precision::Higher),
            _ => None,
        }
    }

    pub fn of<T: Real>() -> Self {
        T::PRECISION
    }
}

impl Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Floating point scalar usable by every kernel in this crate.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    const PRECISION: Precision;
    /// Unit roundoff, `2^-p` for a `p`-bit significand.
    const UNIT_ROUNDOFF: f64;

    /// Round-to-nearest-even conversion from binary64.
    ///
    /// Values beyond the format's range become infinite; callers that need
    /// to detect overflow check the result for finiteness.
    fn from_f64_rne(x: f64) -> Self;

    fn as_f64(self) -> f64;

    fn cast<S: Real>(self) -> S {
        S::from_f64_rne(self.as_f64())
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_f64_rne(n as f64)
    }
}

impl Real for f32 {
    const PRECISION: Precision = Precision::Working;
    const UNIT_ROUNDOFF: f64 = 5.960_464_477_539_063e-8;

    #[inline]
    fn from_f64_rne(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::Higher;
    const UNIT_ROUNDOFF: f64 = 1.110_223_024_625_156_5e-16;

    #[inline]
    fn from_f64_rne(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// A working precision together with the higher precision it is paired with.
///
/// `f32` widens to `f64`. `f64` widens to itself, which gives the
/// single-precision variant of each algorithm (`u_h = u`).
pub trait Widen: Real {
    type Wide: Real;
}

impl Widen for f32 {
    type Wide = f64;
}

impl Widen for f64 {
    type Wide = f64;
}
