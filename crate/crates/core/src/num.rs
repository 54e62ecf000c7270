//! Scalar abstraction: all numeric code in this crate is generic over a
//! floating-point type implementing [`Scalar`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar usable throughout the crate: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Draw one standard-normal variate from `rng`.
    ///
    /// Implemented per concrete type so the RNG byte stream (and therefore
    /// simulation output) is pinned for a given scalar type.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// Convert an `f64` constant into the scalar type.
///
/// Panics only if the target type cannot represent any finite `f64`, which
/// does not happen for `f32`/`f64`.
#[inline]
pub fn fp<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("f64 constant not representable in scalar type")
}

/// Numerically stable `log(sum(exp(x)))`.
pub fn log_sum_exp<S: Scalar>(xs: &[S]) -> S {
    let mut m = S::neg_infinity();
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    if m == S::neg_infinity() {
        return S::neg_infinity();
    }
    let mut acc = S::zero();
    for &x in xs {
        acc += (x - m).exp();
    }
    m + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [-1.0f64, -2.0, -3.0];
        let direct = (xs[0].exp() + xs[1].exp() + xs[2].exp()).ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_handles_large_offsets() {
        let xs = [-1000.0f64, -1001.0];
        let got = log_sum_exp(&xs);
        let expected = -1000.0 + (1.0 + (-1.0f64).exp()).ln();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_empty_is_neg_inf() {
        let xs: [f64; 0] = [];
        assert!(log_sum_exp(&xs).is_infinite());
    }

    #[test]
    fn standard_normal_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for _ in 0..n {
            let x = f64::standard_normal(&mut rng);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // 3-sigma bounds for the sample mean and variance of N(0,1).
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 3.0 * (2.0f64).sqrt() / (n as f64).sqrt());
    }
}
