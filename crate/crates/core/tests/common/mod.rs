#![allow(dead_code)]

use derham::{c, Curve64, CurvePoint64, Divisor64, Poly64, Series64, C64};
use proptest::prelude::*;

pub fn cx() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

/// Leading coefficient bounded away from zero.
pub fn unit() -> impl Strategy<Value = C64> {
    (0.5..2.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

/// Series with `n` known coefficients from `lead` and an invertible leading term.
pub fn series(lead: std::ops::Range<i32>, n: usize) -> impl Strategy<Value = Series64> {
    (lead, unit(), prop::collection::vec(cx(), n - 1)).prop_map(move |(l, a0, rest)| {
        let mut coeffs = vec![a0];
        coeffs.extend(rest);
        Series64::new(l, coeffs, l + n as i32).unwrap()
    })
}

pub fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

pub fn series_close(a: &Series64, b: &Series64, tol: f64) -> bool {
    let lo = a.lead().min(b.lead());
    let hi = a.trunc().min(b.trunc());
    (lo..hi).all(|k| close(a.coeff(k), b.coeff(k), tol))
}

pub fn cubic() -> Curve64 {
    Curve64::new(vec![c(0., 0.), c(-1., 0.), c(0., 0.), c(1., 0.)]).unwrap()
}

/// `y^2 = x (x^2 - 1)(x^2 - 4)`.
pub fn quintic() -> Curve64 {
    let roots = [c(0., 0.), c(1., 0.), c(-1., 0.), c(2., 0.), c(-2., 0.)];
    Curve64::new(Poly64::from_roots(&roots).coeffs().to_vec()).unwrap()
}

/// `y^2 = prod (x - k)` for `k = 0..7`.
pub fn septic() -> Curve64 {
    let roots: Vec<C64> = (0..7).map(|k| c(k as f64 - 3.0, 0.3 * k as f64)).collect();
    Curve64::new(Poly64::from_roots(&roots).coeffs().to_vec()).unwrap()
}

pub fn lift(cv: &Curve64, x: C64, hint: C64) -> CurvePoint64 {
    cv.lift(x, hint)
}

/// Divisor of the given points, each lifted to the sheet closest to `hint`.
pub fn divisor(cv: &Curve64, pts: &[(C64, C64)]) -> Divisor64 {
    let pts: Vec<_> = pts.iter().map(|&(x, h)| cv.lift(x, h)).collect();
    Divisor64::simple(&pts)
}

/// The genus-2 divisor used across tests.
pub fn quintic_divisor(cv: &Curve64) -> Divisor64 {
    divisor(cv, &[(c(0.5, 1.0), c(1., 0.)), (c(-0.5, -1.0), c(1., 0.))])
}
