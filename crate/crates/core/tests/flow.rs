mod common;

use common::{cubic, divisor, quintic, quintic_divisor};
use derham::{
    abel_velocity, baker_akhiezer, build_m_function, c, decompose_df, exterior_derivative, integrate_flow,
    omega_pairing, symplectic_basis, Curve64, Divisor64, Error, Place, PrincipalPartSpec64, C64,
};

fn d0(cv: &Curve64) -> Divisor64 {
    divisor(cv, &[(c(3., 1.), c(1., 0.)), (c(-3., 1.5), c(1., 0.))])
}

fn pp() -> PrincipalPartSpec64 {
    PrincipalPartSpec64::new(vec![c(1., 0.), c(1., 0.)])
}

#[test]
fn m_function_has_prescribed_principal_parts() {
    let cv = quintic();
    let (d, d0) = (quintic_divisor(&cv), d0(&cv));
    let (f, alpha) = build_m_function(&cv, &d, &d0, &pp()).unwrap();
    assert_eq!(alpha.len(), 2);
    for (q, _) in &d0.points {
        let e = f.expand(&cv, &Place::Point(*q), 1).unwrap();
        assert!((e.coeff(-1) - c(1., 0.)).norm() < 1e-9);
        assert!(e.lead() >= -1 || e.coeff(e.lead()).norm() < 1e-9);
    }
    for (i, (p, _)) in d.points.iter().enumerate() {
        let e = f.expand(&cv, &Place::Point(*p), 1).unwrap();
        assert!((e.coeff(-1) - alpha[i]).norm() < 1e-9);
    }
    assert_eq!(f.expand(&cv, &Place::Infinity, 1).unwrap().lead(), 0);
}

#[test]
fn m_function_is_linear_in_principal_parts() {
    let cv = quintic();
    let (d, d0) = (quintic_divisor(&cv), d0(&cv));
    let (_, a1) = build_m_function(&cv, &d, &d0, &pp()).unwrap();
    let k = c(0.3, -2.0);
    let (_, a2) = build_m_function(&cv, &d, &d0, &pp().scaled(k)).unwrap();
    for (x, y) in a1.iter().zip(&a2) {
        assert!((*x * k - y).norm() < 1e-9 * (1.0 + y.norm()));
    }
}

#[test]
fn df_splits_into_tau_part_and_residual() {
    let cv = quintic();
    let (d, d0) = (quintic_divisor(&cv), d0(&cv));
    let (f, _) = build_m_function(&cv, &d, &d0, &pp()).unwrap();
    let (tau, tau0) = decompose_df(&cv, &f, &d).unwrap();
    let sep = 1e-8;
    let df = exterior_derivative(&cv, &f);
    let probe = cv.lift(c(0.4, -0.9), c(1., 0.));
    let back = tau.sub(&tau0, sep).value_at(&cv, &probe).unwrap();
    assert!((back - df.value_at(&cv, &probe).unwrap()).norm() < 1e-9);
    for (p, _) in &d.points {
        let e = tau0.expand(&cv, &Place::Point(*p), 1).unwrap();
        assert!(e.coeff(-2).norm() < 1e-8, "{}", e.coeff(-2));
    }
    let sb = symplectic_basis(&cv, &d).unwrap();
    for th in &sb.theta {
        let a = omega_pairing(&cv, th, &df).unwrap();
        assert!(a.norm() < 1e-8);
    }
}

#[test]
fn validation_errors() {
    let cv = quintic();
    let (d, d0) = (quintic_divisor(&cv), d0(&cv));
    let zero = PrincipalPartSpec64::new(vec![c(0., 0.), c(0., 0.)]);
    assert!(matches!(build_m_function(&cv, &d, &d0, &zero), Err(Error::AllZeroPrincipalParts)));
    let overlap = Divisor64::simple(&[d.points[0].0, d0.points[0].0]);
    assert!(matches!(build_m_function(&cv, &d, &overlap, &pp()), Err(Error::DivisorsNotDisjoint(_))));
    let short = PrincipalPartSpec64::new(vec![c(1., 0.)]);
    assert!(matches!(build_m_function(&cv, &d, &d0, &short), Err(Error::InadmissibleSupport(_))));
    let p = d0.points[0].0;
    let special = Divisor64::simple(&[p, p.conjugate()]);
    assert!(matches!(build_m_function(&cv, &d, &special, &pp()), Err(Error::SpecialDivisor(_))));
}

#[test]
fn zero_time_flow_is_a_single_snapshot() {
    let cv = quintic();
    let (d, d0) = (quintic_divisor(&cv), d0(&cv));
    let sample = cv.lift(c(1.5, -1.0), c(1., 0.));
    let traj = integrate_flow(&cv, &d, &d0, &pp(), 0.0, 10, &[sample]).unwrap();
    assert_eq!(traj.states.len(), 1);
    assert_eq!(baker_akhiezer(&traj, 0).unwrap(), c(1., 0.));
    assert!(matches!(baker_akhiezer(&traj, 1), Err(Error::UnknownSample(1))));
}

#[test]
fn abel_coordinates_move_linearly() {
    let cv = quintic();
    let (d, d0) = (quintic_divisor(&cv), d0(&cv));
    let traj = integrate_flow(&cv, &d, &d0, &pp(), 0.2, 100, &[]).unwrap();
    assert_eq!(traj.states.len(), 101);
    let (f, _) = build_m_function(&cv, &d, &d0, &pp()).unwrap();
    let theta = symplectic_basis(&cv, &d0).unwrap().theta;
    let slope = abel_velocity(&cv, &f, &d0, &theta).unwrap();
    for s in &traj.states {
        for (k, v) in slope.iter().enumerate() {
            assert!((s.abel[k] - v * s.t).norm() < 1e-8);
        }
    }
    assert!(traj.max_defect(&cv) < 1e-10);
}

#[test]
fn flow_is_reversible() {
    let cv = quintic();
    let (d, d0) = (quintic_divisor(&cv), d0(&cv));
    let fwd = integrate_flow(&cv, &d, &d0, &pp(), 0.1, 50, &[]).unwrap();
    let mid = fwd.final_divisor(&cv).unwrap();
    let back = integrate_flow(&cv, &mid, &d0, &pp().scaled(c(-1., 0.)), 0.1, 50, &[]).unwrap();
    let end: Vec<C64> = back.states.last().unwrap().d_points.iter().map(|p| p.x).collect();
    for (p, _) in &d.points {
        assert!(end.iter().any(|x| (x - p.x).norm() < 1e-8));
    }
}

#[test]
fn collision_aborts_with_partial_trajectory() {
    let cv = cubic();
    let d = divisor(&cv, &[(c(2., 0.), c(1., 0.))]);
    let d0 = divisor(&cv, &[(c(2.05, 0.), c(1., 0.))]);
    let pp = PrincipalPartSpec64::new(vec![c(1., 0.)]);
    let (_, alpha) = build_m_function(&cv, &d, &d0, &pp).unwrap();
    let dir = if (-alpha[0]).re > 0.0 { 1.0 } else { -1.0 };
    let pp = pp.scaled(c(dir, 0.));
    match integrate_flow(&cv, &d, &d0, &pp, 50.0, 5000, &[]) {
        Ok(t) => panic!("flow reached t = {}", t.states.last().unwrap().t),
        Err(abort) => {
            assert!(abort.error.is_numerical(), "{}", abort.error);
            assert!(!abort.partial.states.is_empty());
        }
    }
}

#[test]
fn csv_has_one_row_per_state() {
    let cv = quintic();
    let (d, d0) = (quintic_divisor(&cv), d0(&cv));
    let sample = cv.lift(c(1.5, -1.0), c(1., 0.));
    let traj = integrate_flow(&cv, &d, &d0, &pp(), 0.05, 5, &[sample]).unwrap();
    let csv = traj.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("t,x1_re,x1_im,y1_re,y1_im"));
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}
