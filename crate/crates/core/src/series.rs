//! Truncated Laurent series in a formal local coordinate.
//!
//! A series stores the dense coefficient window `lead .. trunc`: the value is
//! `sum_k coeffs[k] z^(lead + k) + O(z^trunc)`. Every operation propagates the
//! tightest truncation that is still correct, so callers can always tell how
//! many coefficients of a result are trustworthy.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Coeff, Real};

#[derive(Clone, PartialEq)]
pub struct LaurentSeries<C> {
    lead: i32,
    coeffs: Vec<C>,
    trunc: i32,
}

/// Binary series operation selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

/// Default absolute cleanup threshold for the coefficient type.
pub fn default_cleanup<C: Coeff>() -> C::Real {
    C::Real::calibrated(1e-13)
}

impl<C: Coeff> LaurentSeries<C> {
    /// Builds `sum_k coeffs[k] z^(lead+k) + O(z^trunc)`.
    ///
    /// The window is padded with zeros up to `trunc` and leading coefficients
    /// below the default cleanup threshold are stripped.
    pub fn new(lead: i32, coeffs: Vec<C>, trunc: i32) -> Result<Self> {
        if lead + coeffs.len() as i32 > trunc {
            return Err(Error::EmptyPrecision(format!(
                "{} coefficients from z^{lead} exceed truncation O(z^{trunc})",
                coeffs.len()
            )));
        }
        Ok(Self::raw(lead, coeffs, trunc))
    }

    pub(crate) fn raw(lead: i32, mut coeffs: Vec<C>, trunc: i32) -> Self {
        let want = (trunc - lead).max(0) as usize;
        coeffs.resize(want, C::zero());
        let mut s = LaurentSeries { lead, coeffs, trunc };
        s.normalize_in_place(default_cleanup::<C>());
        s
    }

    /// The canonical zero `O(z^trunc)`.
    pub fn zero(trunc: i32) -> Self {
        LaurentSeries {
            lead: trunc,
            coeffs: Vec::new(),
            trunc,
        }
    }

    /// `c z^k + O(z^trunc)`.
    pub fn monomial(c: C, k: i32, trunc: i32) -> Result<Self> {
        Self::new(k, vec![c], trunc)
    }

    /// Exact polynomial `sum_k coeffs[k] z^k`, recorded through `O(z^trunc)`.
    pub fn from_poly(coeffs: &[C], trunc: i32) -> Self {
        let keep = coeffs.len().min(trunc.max(0) as usize);
        Self::raw(0, coeffs[..keep].to_vec(), trunc.max(0))
    }

    pub fn lead(&self) -> i32 {
        self.lead
    }

    pub fn trunc(&self) -> i32 {
        self.trunc
    }

    /// Dense coefficient window starting at `lead`.
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `z^k`; zero outside the stored window.
    pub fn coeff(&self, k: i32) -> C {
        if k < self.lead || k >= self.trunc {
            C::zero()
        } else {
            self.coeffs[(k - self.lead) as usize]
        }
    }

    pub fn leading_coeff(&self) -> Option<C> {
        self.coeffs.first().copied()
    }

    /// Number of stored terms past the lead.
    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Strips leading coefficients whose modulus is at most `threshold`.
    pub fn normalized(mut self, threshold: C::Real) -> Self {
        self.normalize_in_place(threshold);
        self
    }

    fn normalize_in_place(&mut self, threshold: C::Real) {
        let skip = self
            .coeffs
            .iter()
            .take_while(|c| c.modulus() <= threshold)
            .count();
        if skip == self.coeffs.len() {
            *self = Self::zero(self.trunc);
        } else if skip > 0 {
            self.coeffs.drain(..skip);
            self.lead += skip as i32;
        }
    }

    /// Forgets every coefficient from `z^trunc` on.
    pub fn truncated(&self, trunc: i32) -> Self {
        if trunc >= self.trunc {
            return self.clone();
        }
        if trunc <= self.lead {
            return Self::zero(trunc);
        }
        let keep = (trunc - self.lead) as usize;
        LaurentSeries {
            lead: self.lead,
            coeffs: self.coeffs[..keep].to_vec(),
            trunc,
        }
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: i32) -> Self {
        LaurentSeries {
            lead: self.lead + k,
            coeffs: self.coeffs.clone(),
            trunc: self.trunc + k,
        }
    }

    pub fn scale(&self, c: C) -> Self {
        let coeffs = self.coeffs.iter().map(|&a| a * c).collect();
        let trunc = self.trunc;
        if c == C::zero() {
            return Self::zero(trunc);
        }
        Self::raw(self.lead, coeffs, trunc)
    }

    /// Substitutes `z -> z^k` for a positive integer `k`.
    pub fn substitute_power(&self, k: u32) -> Self {
        let k = k as i32;
        assert!(k >= 1, "substitution power must be positive");
        if self.is_zero() {
            return Self::zero(self.trunc * k);
        }
        let lead = self.lead * k;
        let trunc = self.trunc * k;
        let mut coeffs = vec![C::zero(); (trunc - lead) as usize];
        for (i, &a) in self.coeffs.iter().enumerate() {
            coeffs[i * k as usize] = a;
        }
        LaurentSeries { lead, coeffs, trunc }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, C::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -C::one())
    }

    fn combine(&self, other: &Self, sign: C) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let lead = self.lead.min(other.lead).min(trunc);
        let mut coeffs = vec![C::zero(); (trunc - lead) as usize];
        for (k, slot) in coeffs.iter_mut().enumerate() {
            let e = lead + k as i32;
            *slot = self.coeff(e) + sign * other.coeff(e);
        }
        Self::raw(lead, coeffs, trunc)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let lead = self.lead + other.lead;
        let trunc = (self.lead + other.trunc).min(other.lead + self.trunc);
        if self.is_zero() || other.is_zero() {
            return Self::zero(trunc);
        }
        let n = (trunc - lead) as usize;
        let mut coeffs = vec![C::zero(); n];
        for (i, &a) in self.coeffs.iter().enumerate().take(n) {
            for (j, &b) in other.coeffs.iter().enumerate().take(n - i) {
                coeffs[i + j] += a * b;
            }
        }
        Self::raw(lead, coeffs, trunc)
    }

    /// Multiplicative inverse; the window keeps the same number of terms.
    pub fn inverse(&self) -> Result<Self> {
        let b0 = self.leading_coeff().ok_or(Error::DivisionByZeroSeries)?;
        let n = self.coeffs.len();
        let mut inv = vec![C::zero(); n];
        inv[0] = C::one() / b0;
        for m in 1..n {
            let mut acc = C::zero();
            for k in 1..=m {
                acc += self.coeffs[k] * inv[m - k];
            }
            inv[m] = -acc / b0;
        }
        let lead = -self.lead;
        Ok(Self::raw(lead, inv, lead + n as i32))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inverse()?))
    }

    /// Square root whose leading coefficient is `branch`.
    ///
    /// `branch` must square to the leading coefficient; it selects the sheet.
    pub fn sqrt(&self, branch: C) -> Result<Self> {
        let Some(a0) = self.leading_coeff() else {
            return Ok(Self::zero(self.trunc.div_euclid(2)));
        };
        if self.lead.rem_euclid(2) != 0 {
            return Err(Error::OddLeadingOrder(self.lead));
        }
        let tol = C::Real::calibrated(1e-8);
        let one = C::Real::one();
        if (branch * branch - a0).modulus() > tol * (one + a0.modulus()) {
            return Err(Error::BranchMismatch {
                branch: format!("{branch:?}"),
                lead: format!("{a0:?}"),
            });
        }
        let n = self.coeffs.len();
        let two_r0 = branch + branch;
        let mut r = vec![C::zero(); n];
        r[0] = branch;
        for m in 1..n {
            let mut acc = self.coeffs[m];
            for k in 1..m {
                acc -= r[k] * r[m - k];
            }
            r[m] = acc / two_r0;
        }
        let lead = self.lead / 2;
        Ok(Self::raw(lead, r, lead + n as i32))
    }

    /// Termwise `d/dz`.
    pub fn derivative(&self) -> Self {
        if self.is_zero() {
            return Self::zero(self.trunc - 1);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| a * C::from_int((self.lead + k as i32) as i64))
            .collect();
        Self::raw(self.lead - 1, coeffs, self.trunc - 1)
    }

    /// Local antiderivative with zero constant term.
    ///
    /// Fails with `NonzeroResidue` when the `z^-1` coefficient exceeds `tol`.
    pub fn antiderivative(&self, tol: C::Real) -> Result<Self> {
        let res = self.residue();
        if res.modulus() > tol {
            return Err(Error::NonzeroResidue(format!("{res:?}")));
        }
        if self.is_zero() {
            return Ok(Self::zero(self.trunc + 1));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let e = self.lead + k as i32;
                if e == -1 {
                    C::zero()
                } else {
                    a / C::from_int((e + 1) as i64)
                }
            })
            .collect();
        Ok(Self::raw(self.lead + 1, coeffs, self.trunc + 1))
    }

    /// Coefficient of `z^-1`.
    pub fn residue(&self) -> C {
        self.coeff(-1)
    }

    /// Largest coefficient modulus in the window.
    pub fn max_modulus(&self) -> C::Real {
        self.coeffs
            .iter()
            .map(|c| c.modulus())
            .fold(C::Real::zero(), |a, b| a.max(b))
    }
}

/// Applies a binary operation selected at run time.
pub fn arith<C: Coeff>(a: &LaurentSeries<C>, b: &LaurentSeries<C>, op: Op) -> Result<LaurentSeries<C>> {
    match op {
        Op::Add => Ok(a.add(b)),
        Op::Sub => Ok(a.sub(b)),
        Op::Mul => Ok(a.mul(b)),
        Op::Div => a.div(b),
    }
}

impl<C: Coeff> Add for &LaurentSeries<C> {
    type Output = LaurentSeries<C>;
    fn add(self, rhs: Self) -> LaurentSeries<C> {
        LaurentSeries::add(self, rhs)
    }
}

impl<C: Coeff> Sub for &LaurentSeries<C> {
    type Output = LaurentSeries<C>;
    fn sub(self, rhs: Self) -> LaurentSeries<C> {
        LaurentSeries::sub(self, rhs)
    }
}

impl<C: Coeff> Mul for &LaurentSeries<C> {
    type Output = LaurentSeries<C>;
    fn mul(self, rhs: Self) -> LaurentSeries<C> {
        LaurentSeries::mul(self, rhs)
    }
}

impl<C: Coeff> Neg for &LaurentSeries<C> {
    type Output = LaurentSeries<C>;
    fn neg(self) -> LaurentSeries<C> {
        LaurentSeries {
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|&a| -a).collect(),
            trunc: self.trunc,
        }
    }
}

impl<C: Coeff> fmt::Debug for LaurentSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coeffs.iter().enumerate() {
            write!(f, "{c:?}·z^{} + ", self.lead + k as i32)?;
        }
        write!(f, "O(z^{})", self.trunc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn s(lead: i32, c: &[f64], trunc: i32) -> LaurentSeries<f64> {
        LaurentSeries::new(lead, c.to_vec(), trunc).unwrap()
    }

    #[test]
    fn product_of_pole_and_polynomial() {
        // (z^-1 + 1)(z - 1) = -z^-1 + z
        let a = s(-1, &[1.0, 1.0], 6);
        let b = s(0, &[-1.0, 1.0], 8);
        let p = a.mul(&b);
        assert_eq!(p.lead(), -1);
        assert_eq!(p.coeff(-1), -1.0);
        assert_eq!(p.coeff(0), 0.0);
        assert_eq!(p.coeff(1), 1.0);
        assert_eq!(p.trunc(), 6);
    }

    #[test]
    fn self_division_is_one() {
        let a = s(-2, &[3.0, -1.0, 0.5, 2.0], 2);
        let q = a.div(&a).unwrap();
        assert_eq!(q.lead(), 0);
        assert!((q.coeff(0) - 1.0).abs() < 1e-15);
        for k in 1..q.trunc() {
            assert!(q.coeff(k).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_times_inverse() {
        let a = LaurentSeries::from_poly(&[6.0, 11.0, 6.0, 1.0], 3);
        let p = a.mul(&a.inverse().unwrap());
        assert_eq!(p.trunc(), 3);
        assert!((p.coeff(0) - 1.0).abs() < 1e-15);
        assert!(p.coeff(1).abs() < 1e-15 && p.coeff(2).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero() {
        let a = s(0, &[1.0], 3);
        assert_eq!(a.div(&LaurentSeries::zero(3)), Err(Error::DivisionByZeroSeries));
    }

    #[test]
    fn cancellation_moves_the_lead() {
        let a = s(0, &[1.0, 2.0], 4);
        let b = s(0, &[1.0, 1.0], 4);
        let d = a.sub(&b);
        assert_eq!(d.lead(), 1);
        assert_eq!(d.coeff(1), 1.0);
        let z = a.sub(&a);
        assert!(z.is_zero());
        assert_eq!(z.trunc(), 4);
    }

    #[test]
    fn sqrt_examples() {
        let one = s(0, &[1.0], 1);
        let r = one.sqrt(1.0).unwrap();
        assert_eq!(r.coeff(0), 1.0);
        assert_eq!(r.trunc(), 1);

        let a = s(0, &[6.0, 11.0, 6.0, 1.0], 8);
        let r = a.sqrt(6f64.sqrt()).unwrap();
        assert!((r.coeff(0) - 2.449490).abs() < 1e-6);
        assert!((r.coeff(1) - 2.245366).abs() < 1e-6);
        let back = r.mul(&r);
        for k in 0..8 {
            assert!((back.coeff(k) - a.coeff(k)).abs() < 1e-12, "k={k}");
        }

        let odd = s(1, &[1.0], 4);
        assert_eq!(odd.sqrt(1.0), Err(Error::OddLeadingOrder(1)));
        assert!(matches!(a.sqrt(2.0), Err(Error::BranchMismatch { .. })));
    }

    #[test]
    fn antiderivative_examples() {
        let a = s(-2, &[1.0, 0.0, 3.0, 2.0], 2);
        let f = a.antiderivative(1e-9).unwrap();
        assert_eq!(f.lead(), -1);
        assert_eq!(f.coeff(-1), -1.0);
        assert_eq!(f.coeff(0), 0.0);
        assert_eq!(f.coeff(1), 3.0);
        assert_eq!(f.coeff(2), 1.0);
        assert_eq!(f.trunc(), 3);

        let z = LaurentSeries::<f64>::zero(4).antiderivative(1e-9).unwrap();
        assert!(z.is_zero());

        let inv = s(-1, &[1.0], 3);
        assert!(matches!(inv.antiderivative(1e-9), Err(Error::NonzeroResidue(_))));
    }

    #[test]
    fn residue_examples() {
        assert_eq!(s(-2, &[1.0, 2.0, 3.0], 1).residue(), 2.0);
        assert_eq!(s(0, &[1.0, 2.0], 5).residue(), 0.0);
        // f1 = 1/z, f2 = z
        let f1 = s(-1, &[1.0], 6);
        let f2 = s(1, &[1.0], 6);
        let a = f1.mul(&f2.derivative()).residue();
        let b = f2.mul(&f1.derivative()).residue();
        assert_eq!(a, 1.0);
        assert_eq!(b, -1.0);
    }

    #[test]
    fn complex_coefficients() {
        let i = Complex64::new(0.0, 1.0);
        let a = LaurentSeries::new(0, vec![i, Complex64::new(1.0, 0.0)], 6).unwrap();
        let q = a.div(&a).unwrap();
        assert!((q.coeff(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn substitute_power_spreads() {
        let a = s(-1, &[1.0, 2.0, 3.0], 2);
        let b = a.substitute_power(2);
        assert_eq!(b.lead(), -2);
        assert_eq!(b.trunc(), 4);
        assert_eq!(b.coeff(-2), 1.0);
        assert_eq!(b.coeff(-1), 0.0);
        assert_eq!(b.coeff(0), 2.0);
        assert_eq!(b.coeff(2), 3.0);
    }

    #[test]
    fn window_overflow_is_rejected() {
        assert!(matches!(
            LaurentSeries::new(0, vec![1.0, 2.0, 3.0], 2),
            Err(Error::EmptyPrecision(_))
        ));
    }
}
