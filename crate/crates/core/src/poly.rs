//! Dense univariate polynomials with complex coefficients.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{cone, czero, Real};

/// Polynomial `sum_k coeffs[k] x^k`, stored in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Poly<T> {
    pub fn new(mut coeffs: Vec<Complex<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(cone())
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![czero(); k + 1];
        c[k] = cone();
        Poly { coeffs: c }
    }

    /// `x - r`.
    pub fn linear(r: Complex<T>) -> Self {
        Self::new(vec![-r, cone()])
    }

    pub fn from_roots(roots: &[Complex<T>]) -> Self {
        roots
            .iter()
            .fold(Self::one(), |acc, &r| acc.mul(&Self::linear(r)))
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex<T> {
        self.coeffs.last().copied().unwrap_or_else(czero)
    }

    pub fn coeff(&self, k: usize) -> Complex<T> {
        self.coeffs.get(k).copied().unwrap_or_else(czero)
    }

    pub fn eval(&self, x: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(czero(), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * T::lit(k as f64))
            .collect();
        Self::new(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![czero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Coefficients of `p(x0 + z)` as a polynomial in `z`.
    pub fn taylor_shift(&self, x0: Complex<T>) -> Vec<Complex<T>> {
        // Repeated synthetic division.
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let next = c[j + 1];
                c[j] += x0 * next;
            }
        }
        c
    }

    /// Largest coefficient modulus.
    pub fn norm_inf(&self) -> T {
        self.coeffs
            .iter()
            .map(|c| c.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// All roots, via Aberth–Ehrlich iteration followed by Newton polishing.
    pub fn roots(&self) -> Vec<Complex<T>> {
        let Some(n) = self.degree() else {
            return Vec::new();
        };
        if n == 0 {
            return Vec::new();
        }
        let lc = self.leading();
        let monic: Vec<Complex<T>> = self.coeffs.iter().map(|&c| c / lc).collect();
        let monic = Poly { coeffs: monic };
        let dmonic = monic.derivative();

        // Cauchy bound for the root radius.
        let radius = T::one()
            + monic.coeffs[..n]
                .iter()
                .map(|c| c.norm())
                .fold(T::zero(), |a, b| a.max(b));
        let start = T::lit(0.4);
        let mut z: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let ang = T::TAU() * T::lit(k as f64) / T::lit(n as f64) + start;
                Complex::from_polar(radius * T::lit(0.5), ang)
            })
            .collect();

        let tiny = T::epsilon() * T::lit(4.0);
        for _ in 0..500 {
            let mut worst = T::zero();
            for i in 0..n {
                let p = monic.eval(z[i]);
                let dp = dmonic.eval(z[i]);
                if p.is_zero() {
                    continue;
                }
                let ratio = p / dp;
                let mut sum = czero::<T>();
                for j in 0..n {
                    if j != i {
                        sum += cone::<T>() / (z[i] - z[j]);
                    }
                }
                let w = ratio / (cone::<T>() - ratio * sum);
                if finite(w) {
                    z[i] -= w;
                    worst = worst.max(w.norm() / (T::one() + z[i].norm()));
                }
            }
            if worst < tiny {
                break;
            }
        }
        // Newton polish on the unscaled polynomial.
        let d = self.derivative();
        for r in z.iter_mut() {
            for _ in 0..3 {
                let dp = d.eval(*r);
                if dp.is_zero() {
                    break;
                }
                let step = self.eval(*r) / dp;
                if !finite(step) {
                    break;
                }
                *r -= step;
            }
        }
        z.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        z
    }
}

fn finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl<T: Real> One for Poly<T> {
    fn one() -> Self {
        Poly::one()
    }
}

impl<T: Real> std::ops::Mul for Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: Self) -> Poly<T> {
        Poly::mul(&self, &rhs)
    }
}
