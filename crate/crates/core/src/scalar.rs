use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used by the vector, basis and norm layers.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Absolute tolerance for norm comparisons on O(1) values.
    fn norm_tol() -> Self;
    /// Tolerance for dual/basis consistency.
    fn basis_tol() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn from_index(n: usize) -> Self {
        Self::from_usize(n).expect("index representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn norm_tol() -> Self {
        1e-9
    }
    fn basis_tol() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn norm_tol() -> Self {
        1e-4
    }
    fn basis_tol() -> Self {
        1e-4
    }
}

/// Total order on magnitudes; NaN never occurs in validated vectors.
pub(crate) fn cmp_desc<S: Scalar>(a: S, b: S) -> std::cmp::Ordering {
    b.partial_cmp(&a).unwrap_or(std::cmp::Ordering::Equal)
}
