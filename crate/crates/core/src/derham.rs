//! The residue pairing on differentials of the second kind, the
//! `2g`-dimensional space of second-kind differentials with poles bounded by
//! `2D`, its symplectic normalization, and reduction modulo exact forms.

use num_complex::Complex;

use crate::curve::{same_point, Curve, CurvePoint, Divisor, Place, Series};
use crate::error::{Error, Result};
use crate::funcfield::{
    exterior_derivative, is_nonspecial, residue_threshold, rr_space, same_place, Denom, Differential, Kind, MeroFunction,
};
use crate::linalg::{kernel, CMat};
use crate::poly::Poly;
use crate::scalar::{cone, czero, Real};

/// Normalized basis `theta_1..theta_g, tau_1..tau_g` attached to a divisor.
#[derive(Clone, Debug)]
pub struct SymplecticBasis<T: Real> {
    pub curve: Curve<T>,
    pub d: Divisor<T>,
    pub theta: Vec<Differential<T>>,
    pub tau: Vec<Differential<T>>,
    /// Local coordinate used for the normalization.
    pub coord_note: String,
}

fn union_places<T: Real>(curve: &Curve<T>, a: Vec<Place<T>>, b: Vec<Place<T>>) -> Vec<Place<T>> {
    let mut out = a;
    for pl in b {
        if !out.iter().any(|q| same_place(curve, q, &pl)) {
            out.push(pl);
        }
    }
    out
}

/// Expansion of `w` at `place` with enough precision for the requested
/// truncation, reusing `first` if it already suffices.
fn expand_to<T: Real>(
    curve: &Curve<T>,
    w: &Differential<T>,
    place: &Place<T>,
    first: Series<T>,
    trunc: i32,
) -> Result<Series<T>> {
    if first.trunc() >= trunc {
        Ok(first)
    } else {
        w.expand(curve, place, trunc)
    }
}

/// Local contribution `Res(F1 * w2)` with `dF1 = w1` at one place.
pub fn local_pairing<T: Real>(
    curve: &Curve<T>,
    w1: &Differential<T>,
    w2: &Differential<T>,
    place: &Place<T>,
) -> Result<Complex<T>> {
    let e1 = w1.expand(curve, place, 1)?;
    let e2 = w2.expand(curve, place, 1)?;
    let need1 = (-e2.lead()).max(0) + 1;
    let need2 = (-e1.lead()).max(0) + 1;
    let e1 = expand_to(curve, w1, place, e1, need1)?;
    let e2 = expand_to(curve, w2, place, e2, need2)?;
    let f1 = e1
        .antiderivative(residue_threshold(&e1, curve.tol().residue))
        .map_err(|_| Error::NotSecondKind(format!("first argument has residue {} at {place}", e1.residue())))?;
    Ok(f1.mul(&e2).residue())
}

/// `omega(w1, w2) = sum_P Res_P(F1 w2)` with `dF1 = w1`, summed over every
/// possible pole of either argument.
pub fn omega_pairing<T: Real>(curve: &Curve<T>, w1: &Differential<T>, w2: &Differential<T>) -> Result<Complex<T>> {
    let places = union_places(curve, w1.candidate_poles(curve), w2.candidate_poles(curve));
    let mut total = czero::<T>();
    for pl in &places {
        total += local_pairing(curve, w1, w2, pl)?;
    }
    Ok(total)
}

/// Pairing matrix `M[i][j] = omega(ws[i], ws[j])`.
pub fn gram_matrix<T: Real>(curve: &Curve<T>, ws: &[Differential<T>]) -> Result<CMat<T>> {
    let n = ws.len();
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = omega_pairing(curve, &ws[i], &ws[j])?;
        }
    }
    Ok(m)
}

/// The standard symplectic matrix `[[0, I], [-I, 0]]` of size `2g`.
pub fn standard_symplectic<T: Real>(g: usize) -> CMat<T> {
    let mut m = CMat::zeros(2 * g, 2 * g);
    for i in 0..g {
        m[(i, g + i)] = cone();
        m[(g + i, i)] = -cone::<T>();
    }
    m
}

/// Checks that `d` is a finite, reduced, non-special divisor of degree `g`
/// with distinct simple points, and returns its points.
fn simple_support<T: Real>(curve: &Curve<T>, d: &Divisor<T>) -> Result<Vec<CurvePoint<T>>> {
    let g = curve.genus();
    if d.infinity > 0 || d.degree() as usize != g {
        return Err(Error::InadmissibleSupport(format!(
            "expected a finite divisor of degree {g}, got {d}"
        )));
    }
    let pts: Vec<CurvePoint<T>> = d
        .points
        .iter()
        .flat_map(|&(p, m)| std::iter::repeat_n(p, m as usize))
        .collect();
    for (i, p) in pts.iter().enumerate() {
        curve
            .check_admissible(p)
            .map_err(|e| Error::InadmissibleSupport(format!("{e}")))?;
        for q in &pts[..i] {
            if same_point(p, q, curve.tol().separation) {
                return Err(Error::InadmissibleSupport(format!("repeated point {p} in {d}")));
            }
        }
    }
    if !is_nonspecial(curve, d)? {
        return Err(Error::SpecialDivisor(format!("{d}")));
    }
    Ok(pts)
}

/// Basis of the second-kind differentials with poles bounded by `2d`.
///
/// The ansatz is `(a P + b y) / (P prod (x - x_i)^2) dx` with
/// `deg a <= 2g - 2` and `deg b <= 3g - 1`, which is exactly regular at
/// infinity and at the branch points. It is stored as the two terms
/// `a / prod (x - x_i)^2` and `b y / (P prod (x - x_i)^2)`. Linear conditions remove the poles on
/// the conjugate sheet and the residues at `d`. Elements are returned in the
/// order of the numerical kernel.
pub fn second_kind_space<T: Real>(curve: &Curve<T>, d: &Divisor<T>) -> Result<Vec<Differential<T>>> {
    let pts = simple_support(curve, d)?;
    let g = curve.genus();
    let tol = curve.tol();
    let double: Vec<(Complex<T>, u32)> = pts.iter().map(|p| (p.x, 2)).collect();
    let ca = Denom::from_factors(cone(), &double, tol.separation);
    let mut roots: Vec<(Complex<T>, u32)> = curve.branch_x().iter().map(|&e| (e, 1)).collect();
    roots.extend(double);
    let cb = Denom::from_factors(curve.p().leading(), &roots, tol.separation);
    let na = 2 * g - 1;
    let nb = 3 * g;
    let columns: Vec<Differential<T>> = (0..na)
        .map(|j| Differential::new(Poly::monomial(j), Poly::zero(), ca.clone()))
        .chain((0..nb).map(|j| Differential::new(Poly::zero(), Poly::monomial(j), cb.clone())))
        .collect();

    let mut rows: Vec<Vec<Complex<T>>> = Vec::new();
    for p in &pts {
        let conj = Place::Point(p.conjugate());
        let here = Place::Point(*p);
        let ex_conj: Vec<Series<T>> = columns
            .iter()
            .map(|w| w.expand(curve, &conj, 0))
            .collect::<Result<_>>()?;
        let ex_here: Vec<Series<T>> = columns
            .iter()
            .map(|w| w.expand(curve, &here, 0))
            .collect::<Result<_>>()?;
        rows.push(ex_conj.iter().map(|s| s.coeff(-2)).collect());
        rows.push(ex_conj.iter().map(|s| s.coeff(-1)).collect());
        rows.push(ex_here.iter().map(|s| s.coeff(-1)).collect());
    }
    let ker = kernel(&CMat::from_rows(&rows), tol.rank, tol.rank_band)?;
    if ker.basis.len() != 2 * g {
        return Err(Error::RankDeficiency(format!(
            "second-kind space for {d} has dimension {} instead of {}",
            ker.basis.len(),
            2 * g
        )));
    }
    Ok(ker
        .basis
        .iter()
        .map(|v| Differential::linear_combination(&columns, v, tol.separation).with_kind(Kind::SecondKind))
        .collect())
}

/// Coefficient map `(alpha_1, beta_1, ..., alpha_g, beta_g)`: constant term
/// and `z^-2` coefficient of `w` at each point, with `z = x - x(P_i)`.
pub fn coefficient_map<T: Real>(curve: &Curve<T>, pts: &[CurvePoint<T>], w: &Differential<T>) -> Result<Vec<Complex<T>>> {
    let mut out = Vec::with_capacity(2 * pts.len());
    for p in pts {
        let e = w.expand(curve, &Place::Point(*p), 1)?;
        out.push(e.coeff(0));
        out.push(e.coeff(-2));
    }
    Ok(out)
}

/// Normalizes the second-kind space of `d` so that `theta_i` has constant
/// term `delta_ij` at `P_j` and `tau_i` has principal part `delta_ij / z^2`.
pub fn symplectic_basis<T: Real>(curve: &Curve<T>, d: &Divisor<T>) -> Result<SymplecticBasis<T>> {
    let space = second_kind_space(curve, d)?;
    let pts = simple_support(curve, d)?;
    let g = curve.genus();
    let n = 2 * g;
    let mut l = CMat::zeros(n, n);
    for (j, w) in space.iter().enumerate() {
        for (i, v) in coefficient_map(curve, &pts, w)?.into_iter().enumerate() {
            l[(i, j)] = v;
        }
    }
    let cond = l.condition_number();
    if !(cond <= curve.tol().max_condition) {
        return Err(Error::IllConditioned(format!(
            "coefficient map for {d} has condition number {cond:e}"
        )));
    }
    let inv = l.inverse()?;
    let pick = |col: usize, kind: Kind| {
        let coef: Vec<Complex<T>> = (0..n).map(|r| inv[(r, col)]).collect();
        Differential::linear_combination(&space, &coef, curve.tol().separation).with_kind(kind)
    };
    let theta = (0..g).map(|i| pick(2 * i, Kind::FirstKind)).collect();
    let tau = (0..g).map(|i| pick(2 * i + 1, Kind::SecondKind)).collect();
    Ok(SymplecticBasis {
        curve: curve.clone(),
        d: d.clone(),
        theta,
        tau,
        coord_note: "z = x - x(P_i)".to_string(),
    })
}

impl<T: Real> SymplecticBasis<T> {
    /// Points of the divisor in basis order.
    pub fn points(&self) -> Vec<CurvePoint<T>> {
        self.d.points.iter().map(|(p, _)| *p).collect()
    }

    /// `theta_1..theta_g, tau_1..tau_g`.
    pub fn all(&self) -> Vec<Differential<T>> {
        self.theta.iter().chain(self.tau.iter()).cloned().collect()
    }

    /// Pairing matrix in the order `theta_1..theta_g, tau_1..tau_g`.
    pub fn gram(&self) -> Result<CMat<T>> {
        gram_matrix(&self.curve, &self.all())
    }

    /// Coordinates `(alpha_1, beta_1, ...)` of a differential at the divisor.
    pub fn coefficients(&self, w: &Differential<T>) -> Result<Vec<Complex<T>>> {
        coefficient_map(&self.curve, &self.points(), w)
    }
}

/// Pole of a differential outside what `2d` allows.
struct ExcessPole<T> {
    place: Place<T>,
    order: u32,
    in_d: bool,
}

fn excess_poles<T: Real>(
    curve: &Curve<T>,
    theta: &Differential<T>,
    pts: &[CurvePoint<T>],
) -> Result<Vec<ExcessPole<T>>> {
    let tol = curve.tol();
    let mut out = Vec::new();
    for place in theta.candidate_poles(curve) {
        let e = theta.expand(curve, &place, 0)?;
        let r = e.residue();
        if r.norm() > residue_threshold(&e, tol.residue) {
            return Err(Error::NotSecondKind(format!("residue {r} at {place}")));
        }
        let order = theta.pole_order(curve, &place, tol.residue)?;
        let in_d = match &place {
            Place::Point(p) => pts.iter().any(|q| same_point(p, q, tol.separation)),
            _ => false,
        };
        let allowed = if in_d { 2 } else { 0 };
        if order <= allowed {
            continue;
        }
        if let Place::Branch(_) = place {
            return Err(Error::InadmissibleSupport(format!(
                "pole of order {order} at branch place {place}"
            )));
        }
        out.push(ExcessPole { place, order, in_d });
    }
    Ok(out)
}

/// Function `f_Q` in `L(d + (n-1) Q)` whose differential cancels the part of
/// `theta`'s principal part at `Q` that `2d` does not allow.
fn correction_at<T: Real>(
    curve: &Curve<T>,
    theta: &Differential<T>,
    d: &Divisor<T>,
    pole: &ExcessPole<T>,
) -> Result<MeroFunction<T>> {
    let n = pole.order as i32;
    let mut e = d.clone();
    match &pole.place {
        Place::Point(q) => e.add_point(*q, pole.order - 1, curve.tol().separation),
        Place::Infinity => e.infinity += pole.order - 1,
        Place::Branch(_) => unreachable!("branch poles are rejected earlier"),
    }
    let space = rr_space(curve, &e)?;
    let funcs = &space[1..];
    if funcs.len() != (n - 1) as usize {
        return Err(Error::SpecialDivisor(format!(
            "L({e}) has dimension {} instead of {}",
            space.len(),
            n
        )));
    }
    // Orders to cancel: -n..-2, or -(n+1)..-3 when Q already carries a pole of d.
    let orders: Vec<i32> = if pole.in_d { (-(n + 1)..=-3).collect() } else { (-n..=-2).collect() };
    let target = theta.expand(curve, &pole.place, 0)?;
    let dfs: Vec<Series<T>> = funcs
        .iter()
        .map(|f| exterior_derivative(curve, f).expand(curve, &pole.place, 0))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<Complex<T>>> = orders
        .iter()
        .map(|&k| dfs.iter().map(|s| s.coeff(k)).collect())
        .collect();
    let rhs: Vec<Complex<T>> = orders.iter().map(|&k| target.coeff(k)).collect();
    let a = CMat::from_rows(&rows);
    let cond = a.condition_number();
    if !(cond <= curve.tol().max_condition) {
        return Err(Error::SpecialDivisor(format!(
            "principal part at {} cannot be matched inside L({e}) (condition {cond:e})",
            pole.place
        )));
    }
    let w = a.solve(&rhs)?;
    Ok(MeroFunction::combine_same_denominator(funcs, &w))
}

/// Writes `theta = reduced + df` with `reduced` having poles bounded by `2d`.
pub fn reduce_modulo_exact<T: Real>(
    curve: &Curve<T>,
    theta: &Differential<T>,
    d: &Divisor<T>,
) -> Result<(Differential<T>, MeroFunction<T>)> {
    let pts = simple_support(curve, d)?;
    let sep = curve.tol().separation;
    let poles = excess_poles(curve, theta, &pts)?;
    let mut f = MeroFunction::zero();
    for pole in &poles {
        let fq = correction_at(curve, theta, d, pole)?;
        f = f.add(&fq, sep);
    }
    if poles.is_empty() {
        return Ok((theta.clone().with_kind(Kind::SecondKind), f));
    }
    let df = exterior_derivative(curve, &f);
    let reduced = theta.sub(&df, sep).with_kind(Kind::SecondKind);
    Ok((reduced, f))
}
