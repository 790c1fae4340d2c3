use std::fmt::{Debug, Display};

use num_traits::Float;

/// Scalar type the engines are generic over.
///
/// `f64` is the working precision everywhere. Any other `Float` (for example a
/// double-double type) can be plugged in when a run needs to resolve errors
/// below f64's unit roundoff.
pub trait Real: Float + Debug + Display + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from(x).expect("f64 literal representable")
    }

    fn from_count(n: usize) -> Self {
        Self::from(n).expect("count representable")
    }
}

impl<T> Real for T where T: Float + Debug + Display + Send + Sync + 'static {}
