//! Scalar abstractions shared by every numerical routine.
//!
//! [`Scalar`] is the field-like interface needed by the lattice recursions, which
//! also run over exact rationals. [`Real`] adds everything the special functions,
//! quadrature and asymptotics need and is implemented for `f32` and `f64`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive, Zero};

/// Running sum used where many contributions of mixed magnitude are added.
pub trait Accumulator<T>: Default + Clone {
    fn add(&mut self, x: T);
    fn total(&self) -> T;
}

/// Neumaier-compensated summation.
#[derive(Debug, Clone, Copy)]
pub struct Neumaier<T> {
    sum: T,
    comp: T,
}

impl<T: Float> Default for Neumaier<T> {
    fn default() -> Self {
        Neumaier {
            sum: T::zero(),
            comp: T::zero(),
        }
    }
}

impl<T: Float> Accumulator<T> for Neumaier<T> {
    #[inline]
    fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    fn total(&self) -> T {
        self.sum + self.comp
    }
}

/// Plain summation, for types whose arithmetic is already exact.
#[derive(Debug, Clone, Default)]
pub struct ExactSum<T>(T);

impl<T: Clone + Zero + Default> Accumulator<T> for ExactSum<T> {
    fn add(&mut self, x: T) {
        self.0 = std::mem::take(&mut self.0) + x;
    }

    fn total(&self) -> T {
        self.0.clone()
    }
}

/// Field operations plus conversions; enough to run the exact lattice recursions.
pub trait Scalar:
    Num + Clone + Debug + PartialOrd + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    type Acc: Accumulator<Self>;

    fn from_u64_exact(n: u64) -> Self {
        Self::from_u64(n).expect("integer is representable")
    }

    /// Lossy view used only for tolerance checks and reporting.
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    type Acc = Neumaier<f64>;
}

impl Scalar for f32 {
    type Acc = Neumaier<f32>;
}

impl Scalar for BigRational {
    type Acc = ExactSum<BigRational>;

    fn from_u64_exact(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + FloatConst + Default + Copy {
    /// Converts an `f64` literal; exact for `f64`, rounded for `f32`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits a float")
    }
}

impl Real for f64 {}
impl Real for f32 {}

/// Shorthand for `T::lit`.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}
