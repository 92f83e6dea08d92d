//! Measurements behind the property suite. Each function returns the raw
//! error or ratio; thresholds are applied by the caller.

use derham::derham::{gram_matrix, local_pairing, standard_symplectic};
use derham::flow::abel_velocity;
use derham::{
    baker_akhiezer, build_m_function, exterior_derivative, holomorphic_basis, integrate_flow, omega_pairing,
    reduce_modulo_exact, symplectic_basis, Curve64, CurvePoint64, Differential64, Divisor64, Error, MeroFunction64,
    Place, PrincipalPartSpec64, Trajectory64, C64,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::instances;

/// Largest entry of `G - J` for the Gram matrix of the symplectic basis.
pub fn gram_error(cv: &Curve64, d: &Divisor64) -> Result<f64, Error> {
    let sb = symplectic_basis(cv, d)?;
    let g = sb.gram()?;
    let j = standard_symplectic::<f64>(cv.genus());
    let mut worst = 0.0f64;
    for r in 0..g.rows() {
        for c in 0..g.cols() {
            worst = worst.max((g[(r, c)] - j[(r, c)]).norm());
        }
    }
    Ok(worst)
}

/// Largest entry of `omega` restricted to the theta span and to the tau span.
pub fn lagrangian_error(cv: &Curve64, d: &Divisor64) -> Result<f64, Error> {
    let sb = symplectic_basis(cv, d)?;
    let mut worst = 0.0f64;
    for span in [&sb.theta, &sb.tau] {
        let m = gram_matrix(cv, span)?;
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    Ok(worst)
}

/// Random second-kind differential: a combination of the symplectic basis of
/// `d` plus the differential of a function with poles elsewhere.
pub fn random_second_kind(rng: &mut ChaCha8Rng, cv: &Curve64, d: &Divisor64) -> Result<Differential64, Error> {
    let sb = symplectic_basis(cv, d)?;
    let sep = cv.tol().separation;
    let mut w = Differential64::zero();
    for b in sb.all() {
        w = w.add(&b.scale(instances::complex(rng)), sep);
    }
    let avoid: Vec<C64> = d.points.iter().map(|(p, _)| p.x).collect();
    let poles = rng.gen_range(1..=2);
    let f = instances::function(rng, cv, &avoid, poles, 2);
    Ok(w.add(&exterior_derivative(cv, &f), sep))
}

/// `|omega(a, b) + omega(b, a)|`.
pub fn skew_error(cv: &Curve64, a: &Differential64, b: &Differential64) -> Result<f64, Error> {
    Ok((omega_pairing(cv, a, b)? + omega_pairing(cv, b, a)?).norm())
}

/// `|omega(df, theta)|` and `|omega(theta, df)|`, whichever is larger,
/// divided by the largest local residue contribution when that exceeds one.
pub fn exact_pairing(cv: &Curve64, f: &MeroFunction64, theta: &Differential64) -> Result<f64, Error> {
    let df = exterior_derivative(cv, f);
    let mut scale = 1.0f64;
    for pl in df.candidate_poles(cv).iter().chain(&theta.candidate_poles(cv)) {
        scale = scale
            .max(local_pairing(cv, &df, theta, pl)?.norm())
            .max(local_pairing(cv, theta, &df, pl)?.norm());
    }
    let v = omega_pairing(cv, &df, theta)?.norm().max(omega_pairing(cv, theta, &df)?.norm());
    Ok(v / scale)
}

/// `|Res_P(f1 df2) + Res_P(f2 df1)|` at a place.
pub fn residue_antisymmetry(cv: &Curve64, f1: &MeroFunction64, f2: &MeroFunction64, place: &Place<f64>) -> Result<f64, Error> {
    let e1 = f1.expand(cv, place, 1)?;
    let e2 = f2.expand(cv, place, 1)?;
    let need = (-e1.lead().min(e2.lead())).max(0) + 2;
    let e1 = f1.expand(cv, place, need)?;
    let e2 = f2.expand(cv, place, need)?;
    let a = e1.mul(&e2.derivative()).residue();
    let b = e2.mul(&e1.derivative()).residue();
    Ok((a + b).norm())
}

/// `|sum of residues|` over every candidate place including infinity.
pub fn residue_sum(cv: &Curve64, w: &Differential64) -> Result<f64, Error> {
    Ok(w.residues(cv)?.iter().map(|(_, r)| *r).sum::<C64>().norm())
}

/// Coefficients of a reduced differential below this, relative to the
/// largest principal-part coefficient of the input at the same place, do not
/// count as poles.
pub const POLE_TOL: f64 = 1e-8;

/// Outcome of one reduction: largest pole order in excess of `2D` and the
/// largest change of the pairing against the holomorphic differentials.
pub struct ReductionReport {
    pub excess_order: u32,
    pub pairing_change: f64,
}

pub fn reduction(cv: &Curve64, d: &Divisor64, theta: &Differential64) -> Result<ReductionReport, Error> {
    let (red, _) = reduce_modulo_exact(cv, theta, d)?;
    let sep = cv.tol().separation;
    let mut excess = 0u32;
    for pl in red.candidate_poles(cv) {
        let allowed = match &pl {
            Place::Point(p) if d.multiplicity_of(p, sep) > 0 => 2,
            _ => 0,
        };
        let before = theta.expand(cv, &pl, 0)?;
        let scale = (before.lead()..0).map(|k| before.coeff(k).norm()).fold(1.0, f64::max);
        let order = red.pole_order(cv, &pl, POLE_TOL * scale)?;
        excess = excess.max(order.saturating_sub(allowed));
    }
    let mut change = 0.0f64;
    for eta in holomorphic_basis(cv) {
        let before = omega_pairing(cv, theta, &eta)?;
        let after = omega_pairing(cv, &red, &eta)?;
        change = change.max((before - after).norm());
    }
    Ok(ReductionReport {
        excess_order: excess,
        pairing_change: change,
    })
}

/// Differential of a random function with poles of order up to three away
/// from `d`, plus optionally a pole at infinity; a reduction workload.
pub fn reduction_workload(rng: &mut ChaCha8Rng, cv: &Curve64, d: &Divisor64) -> Result<Differential64, Error> {
    let avoid: Vec<C64> = d.points.iter().map(|(p, _)| p.x).collect();
    let poles = rng.gen_range(1..=2);
    let f = instances::function(rng, cv, &avoid, poles, 3);
    let sep = cv.tol().separation;
    let mut theta = exterior_derivative(cv, &f);
    if rng.gen::<bool>() {
        // x has a double pole at infinity.
        theta = theta.add(&exterior_derivative(cv, &MeroFunction64::x()).scale(instances::complex(rng)), sep);
    }
    let sb = symplectic_basis(cv, d)?;
    for b in sb.all() {
        theta = theta.add(&b.scale(instances::complex(rng)), sep);
    }
    Ok(theta)
}

/// Genus-2 flow fixture: branch values `0, +-1, +-2`, reference divisor over
/// `3 + i` and `-3 + 1.5i`, initial divisor over `0.5 + i` and `-0.5 - i`.
pub struct FlowFixture {
    pub curve: Curve64,
    pub d: Divisor64,
    pub d0: Divisor64,
    pub pp: PrincipalPartSpec64,
}

pub fn flow_fixture() -> FlowFixture {
    use derham::{c, Poly64};
    let p = Poly64::from_roots(&[c(0., 0.), c(1., 0.), c(-1., 0.), c(2., 0.), c(-2., 0.)]);
    let curve = Curve64::new(p.coeffs().to_vec()).expect("squarefree");
    let lift = |x: C64| curve.lift(x, c(1., 0.));
    let d0 = Divisor64::simple(&[lift(c(3., 1.)), lift(c(-3., 1.5))]);
    let d = Divisor64::simple(&[lift(c(0.5, 1.)), lift(c(-0.5, -1.))]);
    let pp = PrincipalPartSpec64::new(vec![c(1., 0.), c(1., 0.)]);
    FlowFixture { curve, d, d0, pp }
}

pub struct LinearityReport {
    /// `max_t |abel_k(t) - slope_k t|` with the residue slope.
    pub deviation: f64,
    /// Least-squares slope minus the residue slope.
    pub slope_error: f64,
    /// Same, against the residue slope with the opposite sign.
    pub flipped_slope_error: f64,
    pub defect: f64,
    pub slope: Vec<C64>,
}

/// Abel coordinates along a flow against the slope `sum_{Q in D0} Res_Q(f theta_k)`.
pub fn flow_linearity(fx: &FlowFixture, t_end: f64, steps: usize) -> Result<LinearityReport, Error> {
    let traj = integrate_flow(&fx.curve, &fx.d, &fx.d0, &fx.pp, t_end, steps, &[])?;
    let (f, _) = build_m_function(&fx.curve, &fx.d, &fx.d0, &fx.pp)?;
    let theta0 = symplectic_basis(&fx.curve, &fx.d0)?.theta;
    let slope = abel_velocity(&fx.curve, &f, &fx.d0, &theta0)?;
    let mut deviation = 0.0f64;
    let mut slope_error = 0.0f64;
    let mut flipped = 0.0f64;
    for (k, &s) in slope.iter().enumerate() {
        let (mut st, mut tt) = (C64::new(0., 0.), 0.0);
        for state in &traj.states {
            deviation = deviation.max((state.abel[k] - s * state.t).norm());
            st += state.abel[k] * state.t;
            tt += state.t * state.t;
        }
        let fitted = st / tt;
        slope_error = slope_error.max((fitted - s).norm());
        flipped = flipped.max((fitted + s).norm());
    }
    Ok(LinearityReport {
        deviation,
        slope_error,
        flipped_slope_error: flipped,
        defect: traj.max_defect(&fx.curve),
        slope,
    })
}

/// `defect(steps) / defect(2 steps)`.
pub fn convergence_ratio(fx: &FlowFixture, t_end: f64, steps: usize) -> Result<(f64, f64, f64), Error> {
    let coarse = integrate_flow(&fx.curve, &fx.d, &fx.d0, &fx.pp, t_end, steps, &[])?.max_defect(&fx.curve);
    let fine = integrate_flow(&fx.curve, &fx.d, &fx.d0, &fx.pp, t_end, 2 * steps, &[])?.max_defect(&fx.curve);
    Ok((coarse / fine, coarse, fine))
}

/// Samples at distance `eps` from each point of `div`, offset perpendicular
/// to that point's velocity, on the same sheet.
fn offset_samples(fx: &FlowFixture, div: &Divisor64, eps: f64) -> Result<Vec<CurvePoint64>, Error> {
    let (_, alpha) = build_m_function(&fx.curve, div, &fx.d0, &fx.pp)?;
    Ok(div
        .points
        .iter()
        .zip(alpha)
        .map(|((p, _), a)| {
            let v = -a;
            let dir = if v.norm() > 0.0 { v / v.norm() } else { C64::new(1., 0.) };
            fx.curve.lift(p.x + dir * C64::new(0., eps), p.y)
        })
        .collect())
}

pub struct PsiReport {
    /// `|Psi| eps` at `eps = 1e-2` over the same at `1e-3`, per point of `D(0)`.
    pub pole_ratios: Vec<f64>,
    /// `|Psi| / eps` at `eps = 1e-2` over the same at `1e-3`, per point of `D(T)`.
    pub zero_ratios: Vec<f64>,
    /// Relative mismatch between one run and two restarted halves.
    pub restart_error: f64,
    /// `Psi - 1` at `T = 0`, exactly.
    pub t0_error: f64,
}

pub fn psi_checks(fx: &FlowFixture, t_end: f64, steps: usize) -> Result<PsiReport, Error> {
    let cv = &fx.curve;
    let eps = [1e-2, 1e-3];
    let plain = integrate_flow(cv, &fx.d, &fx.d0, &fx.pp, t_end, steps, &[])?;
    let d_end = plain.final_divisor(cv).expect("non-empty trajectory");
    let g = cv.genus();
    let mut samples = Vec::new();
    for &e in &eps {
        samples.extend(offset_samples(fx, &fx.d, e)?);
    }
    for &e in &eps {
        samples.extend(offset_samples(fx, &d_end, e)?);
    }
    let traj = integrate_flow(cv, &fx.d, &fx.d0, &fx.pp, t_end, steps, &samples)?;
    let psi = |id: usize| baker_akhiezer(&traj, id).map(|z| z.norm());
    let mut pole_ratios = Vec::new();
    let mut zero_ratios = Vec::new();
    for i in 0..g {
        pole_ratios.push((psi(i)? * eps[0]) / (psi(g + i)? * eps[1]));
        zero_ratios.push((psi(2 * g + i)? / eps[0]) / (psi(3 * g + i)? / eps[1]));
    }

    let generic: Vec<CurvePoint64> = [C64::new(0.3, -0.6), C64::new(-1.4, 0.4), C64::new(1.2, 1.7)]
        .iter()
        .map(|&x| cv.lift(x, C64::new(1., 0.)))
        .collect();
    let full = integrate_flow(cv, &fx.d, &fx.d0, &fx.pp, t_end, steps, &generic)?;
    let first = integrate_flow(cv, &fx.d, &fx.d0, &fx.pp, t_end / 2.0, steps / 2, &generic)?;
    let mid = first.final_divisor(cv).expect("non-empty trajectory");
    let second = integrate_flow(cv, &mid, &fx.d0, &fx.pp, t_end / 2.0, steps - steps / 2, &generic)?;
    let mut restart_error = 0.0f64;
    for id in 0..generic.len() {
        let whole = baker_akhiezer(&full, id)?;
        let split = baker_akhiezer(&first, id)? * baker_akhiezer(&second, id)?;
        restart_error = restart_error.max((whole - split).norm() / whole.norm());
    }

    let zero = integrate_flow(cv, &fx.d, &fx.d0, &fx.pp, 0.0, steps, &generic)?;
    let mut t0_error = 0.0f64;
    for id in 0..generic.len() {
        t0_error = t0_error.max((baker_akhiezer(&zero, id)? - C64::new(1., 0.)).norm());
    }
    Ok(PsiReport {
        pole_ratios,
        zero_ratios,
        restart_error,
        t0_error,
    })
}

/// Trajectory for the fixture, for callers that want the raw states.
pub fn fixture_trajectory(fx: &FlowFixture, t_end: f64, steps: usize) -> Result<Trajectory64, Error> {
    Ok(integrate_flow(&fx.curve, &fx.d, &fx.d0, &fx.pp, t_end, steps, &[])?)
}
