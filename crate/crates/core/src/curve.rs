//! The odd-degree hyperelliptic model `y^2 = P(x)`, its points, places and
//! local charts.
//!
//! Local parameters are fixed per kind of place:
//! - an ordinary point `(x0, y0)`: `z = x - x0`;
//! - a branch point `(e, 0)`: `s` with `x = e + s^2`;
//! - the point at infinity: `t` with `x = t^-2`, `y = t^-(2g+1) u(t)`.

use std::fmt;

use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{czero, Real, Tolerances};
use crate::series::LaurentSeries;

pub type Series<T> = LaurentSeries<Complex<T>>;

/// Hyperelliptic curve `y^2 = P(x)` with `deg P = 2g + 1` and `P` squarefree.
#[derive(Clone, Debug)]
pub struct Curve<T: Real> {
    p: Poly<T>,
    dp: Poly<T>,
    genus: usize,
    branch_x: Vec<Complex<T>>,
    tol: Tolerances<T>,
}

/// A finite point of the curve. The point at infinity is [`Place::Infinity`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint<T> {
    pub x: Complex<T>,
    pub y: Complex<T>,
}

impl<T: Real> CurvePoint<T> {
    pub fn conjugate(&self) -> Self {
        CurvePoint { x: self.x, y: -self.y }
    }
}

impl<T: Real> fmt::Display for CurvePoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(x = {}{:+}i, y = {}{:+}i)",
            self.x.re, self.x.im, self.y.re, self.y.im
        )
    }
}

/// A place of the curve together with its local parameter convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Place<T> {
    /// Ordinary point, parameter `z = x - x0`.
    Point(CurvePoint<T>),
    /// Branch point `(branch_x[i], 0)`, parameter `s` with `x = e + s^2`.
    Branch(usize),
    /// The unique point at infinity, parameter `t` with `x = t^-2`.
    Infinity,
}

impl<T: Real> fmt::Display for Place<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Point(p) => write!(f, "{p}"),
            Place::Branch(i) => write!(f, "branch point #{i}"),
            Place::Infinity => write!(f, "infinity"),
        }
    }
}

/// Effective divisor supported on finite points, plus a multiple of infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct Divisor<T> {
    pub points: Vec<(CurvePoint<T>, u32)>,
    pub infinity: u32,
}

impl<T: Real> Divisor<T> {
    /// Reduced divisor `P_1 + ... + P_n`.
    pub fn simple(points: &[CurvePoint<T>]) -> Self {
        Divisor {
            points: points.iter().map(|&p| (p, 1)).collect(),
            infinity: 0,
        }
    }

    pub fn degree(&self) -> u32 {
        self.points.iter().map(|(_, m)| m).sum::<u32>() + self.infinity
    }

    pub fn support(&self) -> Vec<CurvePoint<T>> {
        self.points.iter().map(|(p, _)| *p).collect()
    }

    /// Whether all multiplicities are one and the support has no repeats.
    pub fn is_reduced(&self, tol: T) -> bool {
        if self.infinity > 0 || self.points.iter().any(|(_, m)| *m != 1) {
            return false;
        }
        for (i, (a, _)) in self.points.iter().enumerate() {
            for (b, _) in &self.points[i + 1..] {
                if same_point(a, b, tol) {
                    return false;
                }
            }
        }
        true
    }

    /// Adds `m * p`, merging with an existing support point.
    pub fn add_point(&mut self, p: CurvePoint<T>, m: u32, tol: T) {
        if m == 0 {
            return;
        }
        for (q, k) in self.points.iter_mut() {
            if same_point(q, &p, tol) {
                *k += m;
                return;
            }
        }
        self.points.push((p, m));
    }

    pub fn plus(&self, other: &Self, tol: T) -> Self {
        let mut out = self.clone();
        for &(p, m) in &other.points {
            out.add_point(p, m, tol);
        }
        out.infinity += other.infinity;
        out
    }

    pub fn multiplicity_of(&self, p: &CurvePoint<T>, tol: T) -> u32 {
        self.points
            .iter()
            .filter(|(q, _)| same_point(q, p, tol))
            .map(|(_, m)| *m)
            .sum()
    }
}

impl<T: Real> fmt::Display for Divisor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, m) in &self.points {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *m != 1 {
                write!(f, "{m}·")?;
            }
            write!(f, "{p}")?;
        }
        if self.infinity > 0 {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{}·∞", self.infinity)?;
        } else if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

pub(crate) fn same_point<T: Real>(a: &CurvePoint<T>, b: &CurvePoint<T>, tol: T) -> bool {
    let scale = T::one() + a.x.norm().max(b.x.norm());
    (a.x - b.x).norm() <= tol * scale && (a.y - b.y).norm() <= tol * (T::one() + a.y.norm())
}

/// Series of `x`, `y` and `dx/dparam` in the local parameter of a place.
#[derive(Clone, Debug)]
pub struct LocalChart<T: Real> {
    pub x: Series<T>,
    pub y: Series<T>,
    pub dx: Series<T>,
}

impl<T: Real> Curve<T> {
    /// Validates `P` (ascending coefficients) and computes the branch points.
    pub fn new(pcoeffs: Vec<Complex<T>>) -> Result<Self> {
        Self::with_tolerances(pcoeffs, Tolerances::default())
    }

    pub fn with_tolerances(pcoeffs: Vec<Complex<T>>, tol: Tolerances<T>) -> Result<Self> {
        let p = Poly::new(pcoeffs);
        let deg = p.degree().unwrap_or(0);
        if deg % 2 == 0 {
            return Err(Error::WrongDegreeParity(deg));
        }
        if deg < 3 {
            return Err(Error::DegreeTooSmall(deg));
        }
        let genus = (deg - 1) / 2;
        let dp = p.derivative();
        let branch_x = p.roots();
        // Squarefree: roots separated and P' nonzero at each root.
        for (i, &a) in branch_x.iter().enumerate() {
            for &b in &branch_x[i + 1..] {
                if (a - b).norm() <= tol.separation * (T::one() + a.norm()) {
                    return Err(Error::NotSquarefree(format!("{a}")));
                }
            }
            let scale: T = dp
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm() * a.norm().powi(k as i32))
                .sum();
            if dp.eval(a).norm() <= T::calibrated(1e-7) * scale {
                return Err(Error::NotSquarefree(format!("{a}")));
            }
        }
        Ok(Curve {
            p,
            dp,
            genus,
            branch_x,
            tol,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn p(&self) -> &Poly<T> {
        &self.p
    }

    pub fn dp(&self) -> &Poly<T> {
        &self.dp
    }

    pub fn branch_x(&self) -> &[Complex<T>] {
        &self.branch_x
    }

    pub fn tol(&self) -> &Tolerances<T> {
        &self.tol
    }

    pub fn eval_p(&self, x: Complex<T>) -> Complex<T> {
        self.p.eval(x)
    }

    /// Validated curve point; `y` is re-snapped to the exact square root on
    /// the sheet it selects.
    pub fn point(&self, x: Complex<T>, y: Complex<T>) -> Result<CurvePoint<T>> {
        let px = self.eval_p(x);
        let defect = (y * y - px).norm();
        if defect > self.tol.on_curve * (T::one() + px.norm()) {
            return Err(Error::NotOnCurve(format!("{}", CurvePoint { x, y })));
        }
        Ok(CurvePoint {
            x,
            y: self.lift_y(x, y),
        })
    }

    /// The point over `x` whose `y` is closest to `y_hint`.
    pub fn lift(&self, x: Complex<T>, y_hint: Complex<T>) -> CurvePoint<T> {
        CurvePoint {
            x,
            y: self.lift_y(x, y_hint),
        }
    }

    fn lift_y(&self, x: Complex<T>, y_hint: Complex<T>) -> Complex<T> {
        let r = self.eval_p(x).sqrt();
        if (r - y_hint).norm() <= (r + y_hint).norm() {
            r
        } else {
            -r
        }
    }

    /// The two points over `x` (principal square-root sheet first).
    pub fn points_over(&self, x: Complex<T>) -> [CurvePoint<T>; 2] {
        let r = self.eval_p(x).sqrt();
        [CurvePoint { x, y: r }, CurvePoint { x, y: -r }]
    }

    /// Branch threshold test `|y| <= branch * (1 + |x|^g)`.
    pub fn is_branch(&self, p: &CurvePoint<T>) -> bool {
        p.y.norm() <= self.tol.branch * (T::one() + p.x.norm().powi(self.genus as i32))
    }

    /// Index of the branch point at `x`, if any.
    pub fn branch_index(&self, x: Complex<T>) -> Option<usize> {
        self.branch_x
            .iter()
            .position(|&e| (e - x).norm() <= self.tol.separation * (T::one() + e.norm()))
    }

    /// Fails with `BranchPoint` unless `p` is an admissible divisor point.
    pub fn check_admissible(&self, p: &CurvePoint<T>) -> Result<()> {
        if self.is_branch(p) || self.branch_index(p.x).is_some() {
            return Err(Error::BranchPoint(format!("{p}")));
        }
        Ok(())
    }

    /// The place a finite point lies at.
    pub fn place_of(&self, p: &CurvePoint<T>) -> Place<T> {
        match self.branch_index(p.x) {
            Some(i) if self.is_branch(p) => Place::Branch(i),
            _ => Place::Point(*p),
        }
    }

    /// Taylor series of `y(z)`, `z = x - p.x`, through `O(z^order)`.
    pub fn expand_y(&self, p: &CurvePoint<T>, order: i32) -> Result<Series<T>> {
        self.check_admissible(p)?;
        let shifted = self.p.taylor_shift(p.x);
        Series::from_poly(&shifted, order).sqrt(p.y)
    }

    /// Expansions of `x` and `y` in the parameter `t` at infinity, each
    /// through `terms` coefficients past its lead.
    pub fn expand_at_infinity(&self, terms: usize) -> Result<(Series<T>, Series<T>)> {
        let g = self.genus as i32;
        let x = Series::monomial(Complex::one(), -2, -2 + terms as i32)?;
        let u = self.infinity_unit(terms)?;
        Ok((x, u.shift(-(2 * g + 1))))
    }

    /// `u(t) = sqrt(t^(4g+2) P(t^-2))`, principal branch at `t = 0`.
    fn infinity_unit(&self, terms: usize) -> Result<Series<T>> {
        let n = self.p.degree().unwrap_or(0);
        // t^(2n) P(t^-2) = sum_k p_k t^(2(n-k)).
        let mut c = vec![czero(); terms];
        for (k, &pk) in self.p.coeffs().iter().enumerate() {
            let e = 2 * (n - k);
            if e < terms {
                c[e] = pk;
            }
        }
        let lc = self.p.leading();
        Series::from_poly(&c, terms as i32).sqrt(lc.sqrt())
    }

    /// Local chart at a place with `terms` coefficients of working precision.
    pub fn chart(&self, place: &Place<T>, terms: usize) -> Result<LocalChart<T>> {
        let n = terms as i32;
        match place {
            Place::Point(p) => {
                let x = Series::from_poly(&[p.x, Complex::one()], n);
                let y = self.expand_y(p, n)?;
                let dx = Series::from_poly(&[Complex::one()], n);
                Ok(LocalChart { x, y, dx })
            }
            Place::Branch(i) => {
                let e = self.branch_x[*i];
                // P(e + u) = sum_{k >= 1} pi_k u^k; divide by u and substitute u = s^2.
                let mut shifted = self.p.taylor_shift(e);
                shifted[0] = czero();
                let w2 = Series::from_poly(&shifted[1..], n);
                let w = w2.sqrt(shifted[1].sqrt())?.substitute_power(2);
                let y = w.shift(1);
                let x = Series::from_poly(&[e, czero(), Complex::one()], 2 * n);
                let dx = Series::monomial(Complex::from(T::lit(2.0)), 1, 2 * n)?;
                Ok(LocalChart { x, y, dx })
            }
            Place::Infinity => {
                let (x, y) = self.expand_at_infinity(terms)?;
                let dx = Series::monomial(Complex::from(T::lit(-2.0)), -3, -3 + n)?;
                Ok(LocalChart { x, y, dx })
            }
        }
    }

    /// `poly(x(param))` at a place, exact through `O(param^trunc)`.
    pub fn poly_at(&self, poly: &Poly<T>, place: &Place<T>, trunc: i32) -> Series<T> {
        match place {
            Place::Point(p) => Series::from_poly(&poly.taylor_shift(p.x), trunc),
            Place::Branch(i) => {
                let inner = (trunc + 1).div_euclid(2);
                Series::from_poly(&poly.taylor_shift(self.branch_x[*i]), inner)
                    .substitute_power(2)
                    .truncated(trunc)
            }
            Place::Infinity => {
                let Some(d) = poly.degree() else {
                    return Series::zero(trunc);
                };
                let lead = -2 * d as i32;
                if trunc <= lead {
                    return Series::zero(trunc);
                }
                let mut c = vec![czero(); (trunc - lead) as usize];
                for (k, &pk) in poly.coeffs().iter().enumerate() {
                    let idx = 2 * (d - k);
                    if idx < c.len() {
                        c[idx] = pk;
                    }
                }
                Series::raw(lead, c, trunc)
            }
        }
    }

    /// Whether `x` lies over the given place (up to the separation threshold).
    pub(crate) fn x_at_place(&self, place: &Place<T>) -> Option<Complex<T>> {
        match place {
            Place::Point(p) => Some(p.x),
            Place::Branch(i) => Some(self.branch_x[*i]),
            Place::Infinity => None,
        }
    }

    pub(crate) fn near(&self, a: Complex<T>, b: Complex<T>) -> bool {
        (a - b).norm() <= self.tol.separation * (T::one() + a.norm().max(b.norm()))
    }

    /// Places of the curve lying over `x`: both sheets, or the branch place.
    pub fn places_over(&self, x: Complex<T>) -> Vec<Place<T>> {
        if let Some(i) = self.branch_index(x) {
            vec![Place::Branch(i)]
        } else {
            self.points_over(x).into_iter().map(Place::Point).collect()
        }
    }
}
