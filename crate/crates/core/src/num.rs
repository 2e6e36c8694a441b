//! Scalar abstraction shared by the numeric kernels.
//!
//! Metrics, the ridge solver and the assignment solvers only need ordered
//! field arithmetic, so they are written against [`Scalar`] and work for
//! `f32`, `f64` and exact rationals alike.

use std::fmt::Debug;
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Ordered field element usable by the numeric kernels.
pub trait Scalar:
    Num + Signed + PartialOrd + Copy + Debug + FromPrimitive + ToPrimitive + Sum + Send + Sync + 'static
{
    /// Magnitude below which a pivot is treated as zero. Exact types use zero.
    fn pivot_tolerance() -> Self;

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar")
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 representable in scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f32 {
    fn pivot_tolerance() -> Self {
        1e-6
    }
}

impl Scalar for f64 {
    fn pivot_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for Ratio<i64> {
    fn pivot_tolerance() -> Self {
        Ratio::from_integer(0)
    }
}

impl Scalar for Ratio<i128> {
    fn pivot_tolerance() -> Self {
        Ratio::from_integer(0)
    }
}

/// Rounds half away from zero. `f64::round` already does this; the alias
/// keeps the repair rule greppable.
pub fn round_half_away(x: f64) -> f64 {
    x.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_half_away(2.5), 3.0);
        assert_eq!(round_half_away(-2.5), -3.0);
        assert_eq!(round_half_away(3.6), 4.0);
        assert_eq!(round_half_away(3.4), 3.0);
    }

    #[test]
    fn rational_is_exact() {
        let a = Ratio::<i64>::new(1, 3);
        let b = Ratio::<i64>::new(2, 3);
        assert_eq!(a + b, Ratio::from_integer(1));
        assert_eq!(Ratio::<i64>::pivot_tolerance(), Ratio::from_integer(0));
    }
}
