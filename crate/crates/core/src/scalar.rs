use num_traits::{Float, FromPrimitive, NumAssign, NumCast};

/// Real scalar usable by the tensor algebra.
pub trait Real: Float + FromPrimitive + NumCast + NumAssign + Copy + Send + Sync + std::fmt::Debug + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Tolerance helper used by membership checks: `a <= b` up to `rel * scale`.
pub fn leq_tol<T: Real>(a: T, b: T, rel: T) -> bool {
    let scale = T::one().max(a.abs()).max(b.abs());
    a <= b + rel * scale
}
