//! Scalar abstraction so the whole toolkit runs at either f32 or f64.
//!
//! All numerics are written against [`Scalar`]; the crate root exports
//! concrete aliases (`DensityMatrix64`, ...) for the common f64 case.
//! Validation tolerances are associated constants because they must scale
//! with the precision of the underlying float: the f64 values match the
//! contracts used throughout the test suite, the f32 values are relaxed
//! roughly to sqrt(eps) of that type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable for every computation in this crate.
pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Max entrywise |rho - rho^dagger| accepted for a density matrix.
    const HERM_TOL: Self;
    /// |trace(rho) - 1| accepted for a density matrix.
    const TRACE_TOL: Self;
    /// Eigenvalues of a density matrix may dip this far below zero.
    const PSD_TOL: Self;
    /// |norm - 1| accepted for a pure-state amplitude vector.
    const NORM_TOL: Self;
    /// Fidelity rejects inputs with eigenvalues below -FID_PSD_GATE.
    const FID_PSD_GATE: Self;
    /// Norm or top-level weight a constructed target state may lose to
    /// truncation before it is rejected.
    const LEAK_TOL: Self;

    /// Lossy conversion from f64; panics only for values a float type
    /// cannot represent at all (never for ordinary literals).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must convert to scalar type")
    }

    /// Conversion to f64 for error reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const HERM_TOL: f64 = 1e-10;
    const TRACE_TOL: f64 = 1e-8;
    const PSD_TOL: f64 = 1e-8;
    const NORM_TOL: f64 = 1e-10;
    const FID_PSD_GATE: f64 = 1e-6;
    const LEAK_TOL: f64 = 1e-8;
}

impl Scalar for f32 {
    const HERM_TOL: f32 = 1e-4;
    const TRACE_TOL: f32 = 1e-4;
    const PSD_TOL: f32 = 1e-4;
    const NORM_TOL: f32 = 1e-4;
    const FID_PSD_GATE: f32 = 1e-3;
    const LEAK_TOL: f32 = 1e-5;
}

/// Complex number over the crate's scalar abstraction.
pub type C<T> = Complex<T>;

/// Shorthand for a complex number from real/imaginary f64 literals.
#[inline]
pub fn c<T: Scalar>(re: f64, im: f64) -> C<T> {
    Complex::new(T::of(re), T::of(im))
}
