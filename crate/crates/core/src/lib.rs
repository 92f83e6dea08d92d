//! Algebraic de Rham machinery on hyperelliptic curves `y^2 = P(x)`.
//!
//! The crate builds, for a non-special divisor `D` of degree `g`, the
//! symplectic basis of second-kind differentials with poles on `D`, evaluates
//! the residue pairing, reduces second-kind differentials modulo exact forms,
//! and integrates the Dubrovin divisor flow together with the Baker–Akhiezer
//! function along it.
//!
//! All numerics are generic over the real scalar `T: Real` (`f32` or `f64`);
//! the `*64` aliases below fix `f64`, which is what the acceptance tolerances
//! are calibrated for.

pub mod curve;
pub mod derham;
pub mod error;
pub mod flow;
pub mod funcfield;
pub mod linalg;
pub mod poly;
pub mod scalar;
pub mod series;

pub use curve::{Curve, CurvePoint, Divisor, LocalChart, Place};
pub use derham::{
    omega_pairing, reduce_modulo_exact, second_kind_space, symplectic_basis, SymplecticBasis,
};
pub use error::{Error, Result};
pub use flow::{
    abel_velocity, baker_akhiezer, build_m_function, decompose_df, integrate_flow, vector_field, FlowAbort, FlowState,
    PrincipalPartSpec, Trajectory,
};
pub use funcfield::{
    derivative_term, exterior_derivative, holomorphic_basis, is_nonspecial, residue_threshold, rr_space, Denom, Differential, Kind,
    MeroFunction, Term,
};
pub use poly::Poly;
pub use scalar::{c, Coeff, Real, Tolerances};
pub use series::{arith, LaurentSeries, Op};

pub type C64 = num_complex::Complex<f64>;
pub type Series64 = LaurentSeries<C64>;
pub type Curve64 = Curve<f64>;
pub type CurvePoint64 = CurvePoint<f64>;
pub type Divisor64 = Divisor<f64>;
pub type Poly64 = Poly<f64>;
pub type Denom64 = Denom<f64>;
pub type MeroFunction64 = MeroFunction<f64>;
pub type Differential64 = Differential<f64>;
pub type SymplecticBasis64 = SymplecticBasis<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type PrincipalPartSpec64 = PrincipalPartSpec<f64>;
