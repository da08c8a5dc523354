use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type a controversy score can be accumulated in.
///
/// Every score is a sum of unit fractions `1 / w`, so the only operations
/// needed are construction from a link count, addition, comparison and a
/// lossy conversion for logarithmic binning and output.
pub trait Scalar:
    Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync
{
    /// `1 / w`. `w` must be non-zero.
    fn unit_fraction(w: usize) -> Self {
        debug_assert!(w > 0, "unit fraction of zero links");
        Self::one() / Self::from_usize(w).expect("link count representable")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact textual form when the type has one (`"3/2"`), decimal otherwise.
    fn exact_repr(&self) -> String;
}

impl Scalar for BigRational {
    fn exact_repr(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for f64 {
    fn exact_repr(&self) -> String {
        format!("{self}")
    }
}

impl Scalar for f32 {
    fn exact_repr(&self) -> String {
        format!("{self}")
    }
}

/// Fixed 6-decimal rendering used in every serialized score.
pub fn round6(value: f64) -> f64 {
    format!("{value:.6}").parse().unwrap_or(value)
}
