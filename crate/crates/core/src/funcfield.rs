//! Meromorphic functions `(p + q y) / r` and differentials `(a + b y) / c dx`
//! on the curve, their local expansions, residues, exterior derivative and
//! Riemann–Roch spaces.
//!
//! Denominators are kept in factored form (scale times a product of
//! `(x - root)^m`). Expansions at a place then see exact zeros of the
//! denominator instead of cancelling floating point values.

use num_complex::Complex;

use crate::curve::{same_point, Curve, CurvePoint, Divisor, Place, Series};
use crate::error::{Error, Result};
use crate::linalg::{kernel, orthonormalize, CMat};
use crate::poly::Poly;
use crate::scalar::{cone, czero, Real};

/// Factored polynomial `scale * prod_j (x - roots[j].0)^roots[j].1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Denom<T> {
    pub scale: Complex<T>,
    pub roots: Vec<(Complex<T>, u32)>,
}

impl<T: Real> Denom<T> {
    pub fn one() -> Self {
        Denom {
            scale: cone(),
            roots: Vec::new(),
        }
    }

    pub fn constant(scale: Complex<T>) -> Self {
        Denom {
            scale,
            roots: Vec::new(),
        }
    }

    /// Builds a factored polynomial, merging roots closer than `sep`.
    pub fn from_factors(scale: Complex<T>, factors: &[(Complex<T>, u32)], sep: T) -> Self {
        let mut d = Denom::constant(scale);
        for &(r, m) in factors {
            d.push_root(r, m, sep);
        }
        d
    }

    /// Factors a dense polynomial, clustering numerically repeated roots
    /// within `cluster` of each other.
    pub fn from_poly(poly: &Poly<T>, cluster: T) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::DivisionByZeroSeries);
        }
        let roots = poly.roots();
        let mut groups: Vec<(Complex<T>, u32)> = Vec::new();
        for r in roots {
            match groups
                .iter_mut()
                .find(|(g, m)| (*g / T::lit(*m as f64) - r).norm() <= cluster * (T::one() + r.norm()))
            {
                Some((g, m)) => {
                    *g += r;
                    *m += 1;
                }
                None => groups.push((r, 1)),
            }
        }
        let roots = groups
            .into_iter()
            .map(|(sum, m)| (sum / T::lit(m as f64), m))
            .collect();
        Ok(Denom {
            scale: poly.leading(),
            roots,
        })
    }

    fn push_root(&mut self, r: Complex<T>, m: u32, sep: T) {
        if m == 0 {
            return;
        }
        for (q, k) in self.roots.iter_mut() {
            if (*q - r).norm() <= sep * (T::one() + q.norm()) {
                *k += m;
                return;
            }
        }
        self.roots.push((r, m));
    }

    pub fn degree(&self) -> u32 {
        self.roots.iter().map(|(_, m)| m).sum()
    }

    pub fn multiplicity(&self, x: Complex<T>, sep: T) -> u32 {
        self.roots
            .iter()
            .filter(|(r, _)| (*r - x).norm() <= sep * (T::one() + r.norm()))
            .map(|(_, m)| *m)
            .sum()
    }

    pub fn to_poly(&self) -> Poly<T> {
        self.roots
            .iter()
            .fold(Poly::constant(self.scale), |acc, &(r, m)| acc.mul(&Poly::linear(r).pow(m)))
    }

    pub fn eval(&self, x: Complex<T>) -> Complex<T> {
        self.roots
            .iter()
            .fold(self.scale, |acc, &(r, m)| acc * (x - r).powu(m))
    }

    pub fn mul(&self, other: &Self, sep: T) -> Self {
        let mut out = self.clone();
        out.scale = self.scale * other.scale;
        for &(r, m) in &other.roots {
            out.push_root(r, m, sep);
        }
        out
    }

    /// Least common multiple with unit scale.
    pub fn lcm(&self, other: &Self, sep: T) -> Self {
        let mut out = Denom {
            scale: cone(),
            roots: self.roots.clone(),
        };
        for &(r, m) in &other.roots {
            match out
                .roots
                .iter_mut()
                .find(|(q, _)| (*q - r).norm() <= sep * (T::one() + q.norm()))
            {
                Some((_, k)) => *k = (*k).max(m),
                None => out.roots.push((r, m)),
            }
        }
        out
    }

    /// Same roots and multiplicities, possibly different scale.
    pub fn same_roots(&self, other: &Self, sep: T) -> bool {
        self.roots.len() == other.roots.len()
            && self.roots.iter().all(|&(r, m)| other.multiplicity(r, sep) == m)
    }

    /// The polynomial `target / self`; `target` must be a multiple of `self`.
    pub fn cofactor(&self, target: &Self, sep: T) -> Poly<T> {
        let mut poly = Poly::constant(target.scale / self.scale);
        for &(r, m) in &target.roots {
            let mine = self.multiplicity(r, sep);
            debug_assert!(mine <= m, "cofactor of a non-multiple");
            poly = poly.mul(&Poly::linear(r).pow(m.saturating_sub(mine)));
        }
        poly
    }

    /// Series of the denominator at a place with `terms` coefficients past
    /// its lead. Roots lying over the place contribute exact powers of the
    /// local parameter.
    pub fn series_at(&self, curve: &Curve<T>, place: &Place<T>, terms: usize) -> Series<T> {
        let k = terms as i32;
        let over = curve.x_at_place(place);
        let mut acc = Series::from_poly(&[self.scale], k);
        for &(r, m) in &self.roots {
            let m = m as i32;
            let factor = match (place, over) {
                (Place::Point(_), Some(x0)) if curve.near(x0, r) => Series::raw(m, vec![cone()], m + k),
                (Place::Branch(_), Some(x0)) if curve.near(x0, r) => Series::raw(2 * m, vec![cone()], 2 * m + k),
                (Place::Infinity, _) => {
                    let p = Poly::linear(r).pow(m as u32);
                    curve.poly_at(&p, place, -2 * m + k)
                }
                _ => {
                    let p = Poly::linear(r).pow(m as u32);
                    curve.poly_at(&p, place, k)
                }
            };
            acc = acc.mul(&factor);
        }
        acc
    }
}

/// Which class a differential is known to belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    /// Holomorphic everywhere.
    FirstKind,
    /// All residues vanish.
    SecondKind,
    General,
}

/// Meromorphic function `(p(x) + q(x) y) / r(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeroFunction<T> {
    pub p: Poly<T>,
    pub q: Poly<T>,
    pub r: Denom<T>,
}

/// One summand `(a(x) + b(x) y) / c(x) dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term<T> {
    pub a: Poly<T>,
    pub b: Poly<T>,
    pub c: Denom<T>,
}

/// Meromorphic differential stored as a sum of terms `(a + b y) / c dx`
/// plus exact parts `df`, kept as the functions `f`.
///
/// Sums keep one term per distinct denominator, so no numerator is
/// multiplied by a common-denominator cofactor. Exact parts expand as the
/// derivative of the local series of `f` and have no residues.
#[derive(Clone, Debug, PartialEq)]
pub struct Differential<T> {
    pub terms: Vec<Term<T>>,
    pub exact: Vec<MeroFunction<T>>,
    pub kind: Kind,
}

fn place_lead<T: Real>(poly: &Poly<T>, place: &Place<T>) -> i32 {
    match (place, poly.degree()) {
        (Place::Infinity, Some(d)) => -2 * d as i32,
        _ => 0,
    }
}

/// Expands `(a + b y) / c` (times `dx/dparam` when `with_dx`) at a place,
/// growing the working precision until the result is known through
/// `O(param^min_trunc)`.
fn expand_rational<T: Real>(
    curve: &Curve<T>,
    a: &Poly<T>,
    b: &Poly<T>,
    c: &Denom<T>,
    place: &Place<T>,
    min_trunc: i32,
    with_dx: bool,
) -> Result<Series<T>> {
    let mut terms = curve.tol().series_terms.max(4);
    for _ in 0..12 {
        let chart = curve.chart(place, terms)?;
        let k = terms as i32;
        let a_s = curve.poly_at(a, place, place_lead(a, place) + k);
        let b_s = curve.poly_at(b, place, place_lead(b, place) + k);
        let num = a_s.add(&b_s.mul(&chart.y));
        let den = c.series_at(curve, place, terms);
        let mut out = num.div(&den)?;
        if with_dx {
            out = out.mul(&chart.dx);
        }
        let out = out.normalized(curve.tol().cleanup);
        if out.trunc() >= min_trunc {
            return Ok(out);
        }
        terms += (min_trunc - out.trunc()) as usize + 2;
    }
    Err(Error::EmptyPrecision(format!(
        "could not reach O(param^{min_trunc}) at {place}"
    )))
}

/// Residue threshold for one expansion: `tol` times the largest coefficient
/// of `z^k`, `k < -1`, and never below `tol`.
pub fn residue_threshold<T: Real>(e: &Series<T>, tol: T) -> T {
    let mut scale = T::one();
    for k in e.lead()..-1 {
        scale = scale.max(e.coeff(k).norm());
    }
    tol * scale
}

/// Candidate places where a factored denominator can produce poles,
/// always including infinity.
pub fn places_of_denominator<T: Real>(curve: &Curve<T>, c: &Denom<T>) -> Vec<Place<T>> {
    let mut out: Vec<Place<T>> = Vec::new();
    for &(r, _) in &c.roots {
        for pl in curve.places_over(r) {
            if !out.iter().any(|q| same_place(curve, q, &pl)) {
                out.push(pl);
            }
        }
    }
    out.push(Place::Infinity);
    out
}

pub(crate) fn same_place<T: Real>(curve: &Curve<T>, a: &Place<T>, b: &Place<T>) -> bool {
    match (a, b) {
        (Place::Point(p), Place::Point(q)) => same_point(p, q, curve.tol().separation),
        (Place::Branch(i), Place::Branch(j)) => i == j,
        (Place::Infinity, Place::Infinity) => true,
        _ => false,
    }
}

impl<T: Real> MeroFunction<T> {
    pub fn new(p: Poly<T>, q: Poly<T>, r: Denom<T>) -> Self {
        MeroFunction { p, q, r }
    }

    pub fn constant(c: Complex<T>) -> Self {
        MeroFunction::new(Poly::constant(c), Poly::zero(), Denom::one())
    }

    pub fn zero() -> Self {
        MeroFunction::new(Poly::zero(), Poly::zero(), Denom::one())
    }

    /// The coordinate function `x`.
    pub fn x() -> Self {
        MeroFunction::new(Poly::monomial(1), Poly::zero(), Denom::one())
    }

    /// The coordinate function `y`.
    pub fn y() -> Self {
        MeroFunction::new(Poly::zero(), Poly::one(), Denom::one())
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    /// Direct evaluation at a point where `r` does not vanish.
    pub fn eval(&self, pt: &CurvePoint<T>) -> Complex<T> {
        (self.p.eval(pt.x) + self.q.eval(pt.x) * pt.y) / self.r.eval(pt.x)
    }

    pub fn expand(&self, curve: &Curve<T>, place: &Place<T>, min_trunc: i32) -> Result<Series<T>> {
        expand_rational(curve, &self.p, &self.q, &self.r, place, min_trunc, false)
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        MeroFunction::new(self.p.scale(k), self.q.scale(k), self.r.clone())
    }

    pub fn add(&self, other: &Self, sep: T) -> Self {
        let l = self.r.lcm(&other.r, sep);
        let ca = self.r.cofactor(&l, sep);
        let cb = other.r.cofactor(&l, sep);
        MeroFunction::new(
            self.p.mul(&ca).add(&other.p.mul(&cb)),
            self.q.mul(&ca).add(&other.q.mul(&cb)),
            l,
        )
    }

    pub fn sub(&self, other: &Self, sep: T) -> Self {
        self.add(&other.scale(-cone::<T>()), sep)
    }

    /// `sum_k w_k f_k` for functions sharing one denominator.
    pub fn combine_same_denominator(fs: &[MeroFunction<T>], w: &[Complex<T>]) -> Self {
        assert_eq!(fs.len(), w.len());
        let r = fs.first().map_or_else(Denom::one, |f| f.r.clone());
        let mut p = Poly::zero();
        let mut q = Poly::zero();
        for (f, &wk) in fs.iter().zip(w) {
            p = p.add(&f.p.scale(wk));
            q = q.add(&f.q.scale(wk));
        }
        MeroFunction::new(p, q, r)
    }

    /// Candidate pole places (denominator roots and infinity).
    pub fn candidate_poles(&self, curve: &Curve<T>) -> Vec<Place<T>> {
        places_of_denominator(curve, &self.r)
    }
}

impl<T: Real> Term<T> {
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn scale(&self, k: Complex<T>) -> Self {
        Term {
            a: self.a.scale(k),
            b: self.b.scale(k),
            c: self.c.clone(),
        }
    }
}

impl<T: Real> Differential<T> {
    pub fn new(a: Poly<T>, b: Poly<T>, c: Denom<T>) -> Self {
        Differential {
            terms: vec![Term { a, b, c }],
            exact: Vec::new(),
            kind: Kind::General,
        }
    }

    pub fn from_terms(terms: Vec<Term<T>>, kind: Kind) -> Self {
        Differential {
            terms,
            exact: Vec::new(),
            kind,
        }
    }

    pub fn with_kind(mut self, kind: Kind) -> Self {
        self.kind = kind;
        self
    }

    pub fn zero() -> Self {
        Differential {
            terms: Vec::new(),
            exact: Vec::new(),
            kind: Kind::FirstKind,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(Term::is_zero) && self.exact.iter().all(MeroFunction::is_zero)
    }

    /// Every part as a rational term, exact parts written out via
    /// [`derivative_term`].
    pub fn rational_terms(&self, curve: &Curve<T>) -> Vec<Term<T>> {
        let mut out = self.terms.clone();
        out.extend(self.exact.iter().filter(|f| !f.is_zero()).map(|f| derivative_term(curve, f)));
        out
    }

    /// Folds every part over the least common denominator.
    pub fn canonical(&self, curve: &Curve<T>) -> Term<T> {
        let sep = curve.tol().separation;
        let terms = self.rational_terms(curve);
        let mut c = Denom::one();
        for t in &terms {
            c = c.lcm(&t.c, sep);
        }
        let mut a = Poly::zero();
        let mut b = Poly::zero();
        for t in &terms {
            let k = t.c.cofactor(&c, sep);
            a = a.add(&t.a.mul(&k));
            b = b.add(&t.b.mul(&k));
        }
        Term { a, b, c }
    }

    /// Laurent series of `w / d(param)` at a place, known through
    /// `O(param^min_trunc)`. At ordinary points `param = x - x0`, so this is
    /// the coefficient of `dz`.
    pub fn expand(&self, curve: &Curve<T>, place: &Place<T>, min_trunc: i32) -> Result<Series<T>> {
        let mut acc: Option<Series<T>> = None;
        for t in self.terms.iter().filter(|t| !t.is_zero()) {
            let e = expand_rational(curve, &t.a, &t.b, &t.c, place, min_trunc, true)?;
            acc = Some(match acc {
                Some(s) => s.add(&e),
                None => e,
            });
        }
        for f in self.exact.iter().filter(|f| !f.is_zero()) {
            let e = f.expand(curve, place, min_trunc + 1)?.derivative();
            acc = Some(match acc {
                Some(s) => s.add(&e),
                None => e,
            });
        }
        match acc {
            Some(s) => Ok(s.normalized(curve.tol().cleanup)),
            None => Ok(Series::zero(min_trunc)),
        }
    }

    pub fn residue_at(&self, curve: &Curve<T>, place: &Place<T>) -> Result<Complex<T>> {
        Ok(self.expand(curve, place, 0)?.residue())
    }

    /// Value of `w / dz` at an ordinary point.
    pub fn value_at(&self, curve: &Curve<T>, pt: &CurvePoint<T>) -> Result<Complex<T>> {
        let sep = curve.tol().separation;
        if self.exact.is_empty() && self.terms.iter().all(|t| t.c.multiplicity(pt.x, T::lit(1e3) * sep) == 0) {
            Ok(self
                .terms
                .iter()
                .fold(czero(), |s, t| s + (t.a.eval(pt.x) + t.b.eval(pt.x) * pt.y) / t.c.eval(pt.x)))
        } else {
            Ok(self.expand(curve, &Place::Point(*pt), 1)?.coeff(0))
        }
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Differential {
            terms: self.terms.iter().map(|t| t.scale(k)).collect(),
            exact: self.exact.iter().map(|f| f.scale(k)).collect(),
            kind: self.kind,
        }
    }

    fn push_exact(&mut self, f: &MeroFunction<T>, sep: T) {
        if f.is_zero() {
            return;
        }
        for mine in self.exact.iter_mut() {
            if mine.r.same_roots(&f.r, sep) {
                let k = mine.r.scale / f.r.scale;
                mine.p = mine.p.add(&f.p.scale(k));
                mine.q = mine.q.add(&f.q.scale(k));
                return;
            }
        }
        self.exact.push(f.clone());
    }

    fn push_term(&mut self, t: &Term<T>, sep: T) {
        if t.is_zero() {
            return;
        }
        for mine in self.terms.iter_mut() {
            if mine.c.same_roots(&t.c, sep) {
                let k = mine.c.scale / t.c.scale;
                mine.a = mine.a.add(&t.a.scale(k));
                mine.b = mine.b.add(&t.b.scale(k));
                return;
            }
        }
        self.terms.push(t.clone());
    }

    pub fn add(&self, other: &Self, sep: T) -> Self {
        let mut out = self.clone();
        out.kind = self.kind.max(other.kind);
        for t in &other.terms {
            out.push_term(t, sep);
        }
        for f in &other.exact {
            out.push_exact(f, sep);
        }
        out
    }

    pub fn sub(&self, other: &Self, sep: T) -> Self {
        self.add(&other.scale(-cone::<T>()), sep)
    }

    /// `sum_k coef_k ws_k`.
    pub fn linear_combination(ws: &[Differential<T>], coef: &[Complex<T>], sep: T) -> Self {
        assert_eq!(ws.len(), coef.len());
        let mut out = Differential::zero();
        for (w, &k) in ws.iter().zip(coef) {
            out = out.add(&w.scale(k), sep);
        }
        out
    }

    /// Candidate pole places (denominator roots and infinity).
    pub fn candidate_poles(&self, curve: &Curve<T>) -> Vec<Place<T>> {
        let mut out: Vec<Place<T>> = Vec::new();
        let dens = self.terms.iter().map(|t| &t.c).chain(self.exact.iter().map(|f| &f.r));
        for c in dens {
            for pl in places_of_denominator(curve, c) {
                if !out.iter().any(|q| same_place(curve, q, &pl)) {
                    out.push(pl);
                }
            }
        }
        if out.is_empty() {
            out.push(Place::Infinity);
        }
        out
    }

    /// Residues at every candidate pole.
    pub fn residues(&self, curve: &Curve<T>) -> Result<Vec<(Place<T>, Complex<T>)>> {
        self.candidate_poles(curve)
            .into_iter()
            .map(|pl| Ok((pl, self.residue_at(curve, &pl)?)))
            .collect()
    }

    /// Checks the stored classification against the expansions and returns
    /// the tightest kind that holds.
    pub fn classify(&self, curve: &Curve<T>) -> Result<Kind> {
        let tol = curve.tol().residue;
        let mut kind = Kind::FirstKind;
        for pl in self.candidate_poles(curve) {
            let e = self.expand(curve, &pl, 0)?;
            if e.residue().norm() > residue_threshold(&e, tol) {
                return Ok(Kind::General);
            }
            if e.lead() < 0 && e.coeffs().iter().take((-e.lead()) as usize).any(|c| c.norm() > tol) {
                kind = Kind::SecondKind;
            }
        }
        Ok(kind)
    }

    /// Pole order at a place: the number of negative exponents whose
    /// coefficient exceeds `tol` in modulus, counted from the most singular one.
    pub fn pole_order(&self, curve: &Curve<T>, place: &Place<T>, tol: T) -> Result<u32> {
        let e = self.expand(curve, place, 0)?;
        for k in e.lead()..0 {
            if e.coeff(k).norm() > tol {
                return Ok((-k) as u32);
            }
        }
        Ok(0)
    }
}

/// `df`, stored as the exact part `f`.
pub fn exterior_derivative<T: Real>(curve: &Curve<T>, f: &MeroFunction<T>) -> Differential<T> {
    let mut out = Differential::zero().with_kind(Kind::SecondKind);
    out.push_exact(f, curve.tol().separation);
    out
}

/// `df = (d/dx f) dx` as one rational term, using `y' = P'(x) / (2y)`.
pub fn derivative_term<T: Real>(curve: &Curve<T>, f: &MeroFunction<T>) -> Term<T> {
    let sep = curve.tol().separation;
    let two = Complex::from(T::lit(2.0));
    let pp = curve.p();
    let dpp = curve.dp();
    let r = f.r.to_poly();
    let dr = r.derivative();
    let p_part = f.p.derivative().mul(&r).sub(&f.p.mul(&dr));
    let q_part = f.q.derivative().mul(&r).sub(&f.q.mul(&dr));
    // (p'r - pr')/r^2 + [(q'r - qr') / r^2] y + q P' / (2 y r)
    //   = [2P(p'r - pr') + (2P(q'r - qr') + q P' r) y] / (2 P r^2)
    let a = pp.mul(&p_part).scale(two);
    let b = pp.mul(&q_part).scale(two).add(&f.q.mul(dpp).mul(&r));
    let branch: Vec<(Complex<T>, u32)> = curve.branch_x().iter().map(|&e| (e, 1)).collect();
    let p_den = Denom::from_factors(pp.leading() * two, &branch, sep);
    let r2 = f.r.mul(&f.r, sep);
    let c = p_den.mul(&r2, sep);
    Term { a, b, c }
}

/// `x^(k-1) dx / y` for `k = 1..g`, written as `x^(k-1) y / P dx`.
pub fn holomorphic_basis<T: Real>(curve: &Curve<T>) -> Vec<Differential<T>> {
    let sep = curve.tol().separation;
    let branch: Vec<(Complex<T>, u32)> = curve.branch_x().iter().map(|&e| (e, 1)).collect();
    let p_den = Denom::from_factors(curve.p().leading(), &branch, sep);
    (0..curve.genus())
        .map(|k| Differential::new(Poly::zero(), Poly::monomial(k), p_den.clone()).with_kind(Kind::FirstKind))
        .collect()
}

/// One x-coordinate of a divisor's finite support with the multiplicities on
/// the two sheets over it.
struct Fiber<T> {
    point: CurvePoint<T>,
    here: u32,
    conj: u32,
}

fn fibers<T: Real>(curve: &Curve<T>, d: &Divisor<T>) -> Result<Vec<Fiber<T>>> {
    let tol = curve.tol().separation;
    let mut out: Vec<Fiber<T>> = Vec::new();
    for &(pt, m) in &d.points {
        curve
            .check_admissible(&pt)
            .map_err(|e| Error::InadmissibleSupport(format!("{e}")))?;
        if m == 0 {
            continue;
        }
        match out.iter_mut().find(|f| curve.near(f.point.x, pt.x)) {
            Some(f) if same_point(&f.point, &pt, tol) => f.here += m,
            Some(f) if same_point(&f.point.conjugate(), &pt, tol) => f.conj += m,
            Some(_) => {
                return Err(Error::InadmissibleSupport(format!(
                    "point {pt} shares its x-coordinate with a point on neither sheet"
                )))
            }
            None => out.push(Fiber {
                point: pt,
                here: m,
                conj: 0,
            }),
        }
    }
    Ok(out)
}

/// Basis of the Riemann–Roch space `L(d) = { f : (f) + d >= 0 }`.
///
/// The ansatz is `(p + q y) / prod (x - x_i)^(m_i)` with degree bounds coming
/// from the allowed pole order at infinity, subject to vanishing of the
/// numerator on the conjugate sheet. The first returned element is the
/// constant function; the coefficient vectors `(p, q)` of the returned
/// functions are orthonormal.
pub fn rr_space<T: Real>(curve: &Curve<T>, d: &Divisor<T>) -> Result<Vec<MeroFunction<T>>> {
    let tol = curve.tol();
    let g = curve.genus() as i64;
    let fib = fibers(curve, d)?;
    let roots: Vec<(Complex<T>, u32)> = fib.iter().map(|f| (f.point.x, f.here + f.conj)).collect();
    let denom = Denom::from_factors(cone(), &roots, tol.separation);
    let big_m = denom.degree() as i64;
    let k = d.infinity as i64;
    let p_deg = big_m + k / 2;
    let q_top = (2 * big_m + k - 2 * g - 1).div_euclid(2);
    let np = (p_deg + 1) as usize;
    let nq = if q_top >= 0 { (q_top + 1) as usize } else { 0 };
    let n = np + nq;

    // Vanishing rows: order `conj` at the point, order `here` at its conjugate.
    let mut rows: Vec<Vec<Complex<T>>> = Vec::new();
    for f in &fib {
        for (pt, order) in [(f.point, f.conj), (f.point.conjugate(), f.here)] {
            if order == 0 {
                continue;
            }
            let ord = order as i32;
            let place = Place::Point(pt);
            let y = curve.expand_y(&pt, ord)?;
            let cols: Vec<Series<T>> = (0..np)
                .map(|j| curve.poly_at(&Poly::monomial(j), &place, ord))
                .chain((0..nq).map(|j| curve.poly_at(&Poly::monomial(j), &place, ord).mul(&y)))
                .collect();
            for o in 0..ord {
                rows.push(cols.iter().map(|s| s.coeff(o)).collect());
            }
        }
    }

    let to_function = |v: &[Complex<T>]| {
        MeroFunction::new(
            Poly::new(v[..np].to_vec()),
            Poly::new(v[np..].to_vec()),
            denom.clone(),
        )
    };

    let mut constant = vec![czero(); n];
    for (j, c) in denom.to_poly().coeffs().iter().enumerate() {
        constant[j] = *c;
    }

    if rows.is_empty() {
        // No conditions: every coefficient vector is admissible.
        let mut vs = vec![constant];
        vs.extend((0..n).map(|j| {
            let mut e = vec![czero(); n];
            e[j] = cone();
            e
        }));
        let basis = orthonormalize(&vs, T::calibrated(1e-8));
        return Ok(basis.iter().map(|v| to_function(v)).collect());
    }

    let a = CMat::from_rows(&rows);
    let ker = kernel(&a, tol.rank, tol.rank_band)?;
    let dim = ker.basis.len();
    let mut vs = vec![constant];
    vs.extend(ker.basis);
    let basis = orthonormalize(&vs, T::calibrated(1e-6));
    if basis.len() != dim {
        return Err(Error::RankDeficiency(format!(
            "constant function not resolved inside L({d}) (kernel {dim}, span {})",
            basis.len()
        )));
    }
    Ok(basis.iter().map(|v| to_function(v)).collect())
}

/// Whether no holomorphic differential vanishes on `d` (degree `g`,
/// admissible support).
pub fn is_nonspecial<T: Real>(curve: &Curve<T>, d: &Divisor<T>) -> Result<bool> {
    let g = curve.genus();
    if d.infinity > 0 || d.degree() as usize != g {
        return Err(Error::InadmissibleSupport(format!(
            "non-speciality needs a finite divisor of degree {g}, got {d}"
        )));
    }
    for (pt, _) in &d.points {
        curve
            .check_admissible(pt)
            .map_err(|e| Error::InadmissibleSupport(format!("{e}")))?;
    }
    let basis = holomorphic_basis(curve);
    let mut rows: Vec<Vec<Complex<T>>> = Vec::new();
    for &(pt, m) in &d.points {
        if m == 1 {
            let row: Vec<Complex<T>> = (0..g).map(|k| pt.x.powu(k as u32) / pt.y).collect();
            rows.push(row);
        } else {
            let place = Place::Point(pt);
            let ex: Vec<Series<T>> = basis
                .iter()
                .map(|w| w.expand(curve, &place, m as i32))
                .collect::<Result<_>>()?;
            for o in 0..m as i32 {
                rows.push(ex.iter().map(|s| s.coeff(o)).collect());
            }
        }
    }
    let v = CMat::from_rows(&rows);
    let s = v.singular_values();
    let smax = s.iter().copied().fold(T::zero(), T::max);
    let smin = s.iter().copied().fold(T::infinity(), T::min);
    Ok(smax > T::zero() && smin > curve.tol().rank * smax)
}
