//! Coefficient traits.
//!
//! Ring arithmetic only needs a commutative ring with signs; Chern characters,
//! Todd classes and Riemann-Roch need exact division by small integers, which
//! is what [`Field`] adds.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, NumAssign, Signed};

/// Coefficient type of a cohomology class.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Signed
    + NumAssign
    + FromPrimitive
    + FromStr
    + Send
    + Sync
    + 'static
{
    fn from_int(value: i64) -> Self {
        Self::from_i64(value).expect("every i64 is representable")
    }
}

impl<T> Scalar for T where
    T: Clone
        + Debug
        + Display
        + PartialEq
        + Signed
        + NumAssign
        + FromPrimitive
        + FromStr
        + Send
        + Sync
        + 'static
{
}

/// A [`Scalar`] in which division by a nonzero integer is exact.
pub trait Field: Scalar {
    /// Whether the value lies in the prime subring.
    fn is_integral(&self) -> bool;

    fn ratio(numer: i64, denom: i64) -> Self {
        Self::from_int(numer) / Self::from_int(denom)
    }
}

impl<I> Field for Ratio<I>
where
    I: Integer + Clone,
    Ratio<I>: Scalar,
{
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}
