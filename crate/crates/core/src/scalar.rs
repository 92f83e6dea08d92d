//! Scalar abstractions.
//!
//! Everything numeric in the crate is generic over a real floating type `T: Real`
//! (`f32` or `f64`), with complex values carried as `Complex<T>`. Laurent series
//! are generic one level further, over any field-like coefficient `C: Coeff`.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, One, Zero};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + std::iter::Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Literal conversion from `f64`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits the scalar type")
    }

    /// Maps a tolerance calibrated for `f64` onto this precision.
    ///
    /// The tolerance keeps the same number of significant digits relative to
    /// machine epsilon: `eps_T ^ (ln tol / ln eps_f64)`. For `f64` itself the
    /// value is returned unchanged.
    fn calibrated(tol: f64) -> Self {
        let eps = Self::epsilon().to_f64().unwrap_or(f64::EPSILON);
        if eps == f64::EPSILON {
            Self::lit(tol)
        } else {
            Self::lit(eps.powf(tol.ln() / f64::EPSILON.ln()))
        }
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field-like coefficient type for truncated Laurent series.
pub trait Coeff:
    Copy + PartialEq + Debug + NumAssign + Neg<Output = Self> + Send + Sync + 'static
{
    type Real: Real;

    /// Modulus used for cleanup thresholds.
    fn modulus(self) -> Self::Real;

    fn from_real(r: Self::Real) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_real(<Self::Real as FromPrimitive>::from_i64(n).expect("small integer"))
    }
}

impl Coeff for f32 {
    type Real = f32;
    fn modulus(self) -> f32 {
        self.abs()
    }
    fn from_real(r: f32) -> f32 {
        r
    }
}

impl Coeff for f64 {
    type Real = f64;
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_real(r: f64) -> f64 {
        r
    }
}

impl<T: Real> Coeff for Complex<T> {
    type Real = T;
    fn modulus(self) -> T {
        self.norm()
    }
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
}

/// Shorthand constructor for a complex value from two `f64` literals.
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::zero()
}

pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::one()
}

/// Numerical thresholds shared by every construction on a curve.
///
/// Defaults are calibrated for `f64` and rescaled for lower precision through
/// [`Real::calibrated`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Absolute modulus below which a leading series coefficient is dropped.
    pub cleanup: T,
    /// Largest `|z^-1|` coefficient accepted as "zero residue".
    pub residue: T,
    /// Relative branch threshold: `|y| > branch * (1 + |x|^g)`.
    pub branch: T,
    /// Minimum distance between x-coordinates treated as distinct.
    pub separation: T,
    /// Relative on-curve defect accepted when constructing points.
    pub on_curve: T,
    /// Singular values below `rank * sigma_max` count as zero.
    pub rank: T,
    /// Singular values inside `(rank / band, rank * band) * sigma_max` are ambiguous.
    pub rank_band: T,
    /// Largest condition number accepted for the coefficient map.
    pub max_condition: T,
    /// Collision and branch-approach guard used by the divisor flow.
    pub flow_guard: T,
    /// Default number of series terms past the lead.
    pub series_terms: usize,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            cleanup: T::calibrated(1e-13),
            residue: T::calibrated(1e-9),
            branch: T::calibrated(1e-8),
            separation: T::calibrated(1e-8),
            on_curve: T::calibrated(1e-9),
            rank: T::calibrated(1e-8),
            rank_band: T::lit(100.0),
            max_condition: T::calibrated(1e12),
            flow_guard: T::calibrated(1e-5),
            series_terms: 16,
        }
    }
}
