mod common;

use common::{cubic, quintic, septic};
use derham::{c, Curve64, Error, Place, Poly64, C64};
use proptest::prelude::*;

#[test]
fn genus_from_degree() {
    assert_eq!(cubic().genus(), 1);
    assert_eq!(quintic().genus(), 2);
    assert_eq!(septic().genus(), 3);
}

#[test]
fn rejects_bad_polynomials() {
    let even = Curve64::new(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
    assert!(matches!(even, Err(Error::WrongDegreeParity(4))));
    let linear = Curve64::new(vec![c(1., 0.), c(1., 0.)]);
    assert!(matches!(linear, Err(Error::DegreeTooSmall(1))));
    let repeated = Poly64::from_roots(&[c(1., 0.), c(1., 0.), c(-1., 0.)]);
    assert!(matches!(
        Curve64::new(repeated.coeffs().to_vec()),
        Err(Error::NotSquarefree(_))
    ));
}

#[test]
fn point_validation() {
    let cv = cubic();
    assert!(matches!(cv.point(c(2., 0.), c(1., 0.)), Err(Error::NotOnCurve(_))));
    let p = cv.point(c(2., 0.), c(6f64.sqrt(), 0.)).unwrap();
    assert!(cv.check_admissible(&p).is_ok());
    let b = cv.point(c(1., 0.), c(0., 0.)).unwrap();
    assert!(matches!(cv.check_admissible(&b), Err(Error::BranchPoint(_))));
}

#[test]
fn places_over_branch_and_ordinary_values() {
    let cv = quintic();
    assert_eq!(cv.places_over(c(2., 0.)).len(), 1);
    assert!(matches!(cv.places_over(c(2., 0.))[0], Place::Branch(_)));
    assert_eq!(cv.places_over(c(0.3, 0.2)).len(), 2);
}

fn check_chart(cv: &Curve64, place: &Place<f64>) {
    let ch = cv.chart(place, 12).unwrap();
    let px = cv.poly_at(cv.p(), place, ch.y.trunc() + ch.y.lead());
    let y2 = ch.y.mul(&ch.y);
    for k in y2.lead()..y2.trunc().min(px.trunc()) {
        let scale = 1.0 + px.coeff(k).norm();
        assert!((y2.coeff(k) - px.coeff(k)).norm() < 1e-9 * scale, "{place} z^{k}");
    }
}

#[test]
fn charts_square_to_p() {
    let cv = quintic();
    let p = cv.lift(c(0.4, 0.7), c(1., 0.));
    check_chart(&cv, &Place::Point(p));
    check_chart(&cv, &Place::Branch(1));
    check_chart(&cv, &Place::Infinity);
}

proptest! {
    #[test]
    fn lift_lands_on_curve(re in -3.0..3.0f64, im in -3.0..3.0f64, hint in -1.0..1.0f64) {
        let cv = septic();
        let x = C64::new(re, im);
        let p = cv.lift(x, c(hint, 1.0));
        let px = cv.eval_p(x);
        prop_assert!((p.y * p.y - px).norm() <= 1e-12 * (1.0 + px.norm()));
        let [a, b] = cv.points_over(x);
        prop_assert_eq!(a.y, -b.y);
        prop_assert_eq!(p.conjugate().y, -p.y);
    }

    #[test]
    fn expand_y_matches_values(re in -1.0..1.0f64, im in 0.5..1.5f64, h in 1e-3..1e-2f64) {
        let cv = quintic();
        let p = cv.lift(C64::new(re, im), c(1., 0.));
        let s = cv.expand_y(&p, 10).unwrap();
        let approx: C64 = (0..10).map(|k| s.coeff(k) * h.powi(k)).sum();
        let exact = cv.lift(p.x + h, p.y);
        prop_assert!((approx - exact.y).norm() < 1e-12 * (1.0 + exact.y.norm()));
    }
}
