//! Functions with prescribed simple poles on a reference divisor `D0`, the
//! Dubrovin flow they generate on degree-`g` divisors, Abel coordinates
//! along the flow, and the Baker–Akhiezer function.

use std::fmt;
use std::fmt::Write as _;

use num_complex::Complex;

use crate::curve::{same_point, Curve, CurvePoint, Divisor, Place};
use crate::derham::{symplectic_basis, SymplecticBasis};
use crate::error::{Error, Result};
use crate::funcfield::{exterior_derivative, is_nonspecial, rr_space, Differential, MeroFunction};
use crate::linalg::CMat;
use crate::scalar::{czero, Real};

/// Coefficients `c_i` of `(x - x(Q_i))^-1` at the points of `D0`, in order.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalPartSpec<T> {
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> PrincipalPartSpec<T> {
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        PrincipalPartSpec { coeffs }
    }

    pub fn scaled(&self, k: Complex<T>) -> Self {
        PrincipalPartSpec::new(self.coeffs.iter().map(|&c| c * k).collect())
    }
}

/// One snapshot of the flow.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState<T> {
    pub t: T,
    /// Integrated points `(x_i, y_i)`; `y` is advanced by the chain rule, not
    /// re-projected, so `|y^2 - P(x)|` measures the integration error.
    pub d_points: Vec<CurvePoint<T>>,
    pub abel: Vec<Complex<T>>,
    /// `log Psi` accumulator per sample, indexed by sample id.
    pub logpsi: Vec<Complex<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub states: Vec<FlowState<T>>,
    pub step: T,
    pub scheme: String,
    pub samples: Vec<CurvePoint<T>>,
}

/// An integration that stopped early, with everything computed so far.
#[derive(Clone, Debug)]
pub struct FlowAbort<T> {
    pub error: Error,
    pub partial: Trajectory<T>,
}

impl<T: Real> fmt::Display for FlowAbort<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.partial.states.last().map_or(T::zero(), |s| s.t);
        write!(f, "{} (aborted after t = {t})", self.error)
    }
}

impl<T: Real> std::error::Error for FlowAbort<T> {}

impl<T> From<FlowAbort<T>> for Error {
    fn from(a: FlowAbort<T>) -> Error {
        a.error
    }
}

fn points_of<T: Real>(d: &Divisor<T>) -> Vec<CurvePoint<T>> {
    d.points
        .iter()
        .flat_map(|&(p, m)| std::iter::repeat_n(p, m as usize))
        .collect()
}

fn check_disjoint<T: Real>(curve: &Curve<T>, d: &Divisor<T>, d0: &Divisor<T>) -> Result<()> {
    let tol = curve.tol().separation;
    for (p, _) in &d.points {
        for (q, _) in &d0.points {
            if same_point(p, q, tol) {
                return Err(Error::DivisorsNotDisjoint(format!("{p} lies in both {d} and {d0}")));
            }
        }
    }
    Ok(())
}

/// The function `f` in `L(D + D0)` with principal part `c_i / (x - x(Q_i))`
/// at each `Q_i` of `D0`, and `alpha_i`, its `z^-1` coefficient at `P_i` of
/// `D` in `z = x - x(P_i)`.
///
/// The additive constant is fixed by making `f` orthogonal to the constant
/// function in the coefficient basis returned by [`rr_space`].
pub fn build_m_function<T: Real>(
    curve: &Curve<T>,
    d: &Divisor<T>,
    d0: &Divisor<T>,
    pp: &PrincipalPartSpec<T>,
) -> Result<(MeroFunction<T>, Vec<Complex<T>>)> {
    let g = curve.genus();
    let q_pts = points_of(d0);
    if pp.coeffs.len() != q_pts.len() {
        return Err(Error::InadmissibleSupport(format!(
            "{} principal parts for the {} points of {d0}",
            pp.coeffs.len(),
            q_pts.len()
        )));
    }
    if pp.coeffs.iter().all(|c| c.norm() == T::zero()) {
        return Err(Error::AllZeroPrincipalParts);
    }
    check_disjoint(curve, d, d0)?;
    for div in [d, d0] {
        if div.infinity > 0 || div.degree() as usize != g {
            return Err(Error::InadmissibleSupport(format!("expected degree {g}, got {div}")));
        }
        if !is_nonspecial(curve, div)? {
            return Err(Error::SpecialDivisor(format!("{div}")));
        }
    }
    m_function_core(curve, d, d0, pp)
}

/// [`build_m_function`] without the input validation; special divisors
/// still surface through the dimension and conditioning checks.
fn m_function_core<T: Real>(
    curve: &Curve<T>,
    d: &Divisor<T>,
    d0: &Divisor<T>,
    pp: &PrincipalPartSpec<T>,
) -> Result<(MeroFunction<T>, Vec<Complex<T>>)> {
    let g = curve.genus();
    let q_pts = points_of(d0);
    let p_pts = points_of(d);
    let sum = d.plus(d0, curve.tol().separation);
    let space = rr_space(curve, &sum)?;
    if space.len() != g + 1 {
        return Err(Error::UnderdeterminedPrincipalParts(format!(
            "L({sum}) has dimension {} instead of {}",
            space.len(),
            g + 1
        )));
    }
    let funcs = &space[1..];
    let mut a = CMat::zeros(q_pts.len(), funcs.len());
    for (i, q) in q_pts.iter().enumerate() {
        for (j, f) in funcs.iter().enumerate() {
            a[(i, j)] = f.expand(curve, &Place::Point(*q), 0)?.residue();
        }
    }
    let cond = a.condition_number();
    if !(cond <= curve.tol().max_condition) {
        return Err(Error::UnderdeterminedPrincipalParts(format!(
            "principal parts at {d0} are not independent on L({sum}) (condition {cond:e})"
        )));
    }
    let w = a
        .solve(&pp.coeffs)
        .map_err(|e| Error::UnderdeterminedPrincipalParts(format!("{e}")))?;
    let f = MeroFunction::combine_same_denominator(funcs, &w);
    let alpha = p_pts
        .iter()
        .map(|p| Ok(f.expand(curve, &Place::Point(*p), 0)?.residue()))
        .collect::<Result<Vec<_>>>()?;
    Ok((f, alpha))
}

/// `df = tau - tau0` with `tau` in the span of the `tau_i` attached to `D`,
/// matching the principal parts of `df` at `D`.
pub fn decompose_df<T: Real>(
    curve: &Curve<T>,
    f: &MeroFunction<T>,
    d: &Divisor<T>,
) -> Result<(Differential<T>, Differential<T>)> {
    let sb = symplectic_basis(curve, d)?;
    decompose_df_with(curve, f, &sb)
}

/// [`decompose_df`] against a precomputed basis.
pub fn decompose_df_with<T: Real>(
    curve: &Curve<T>,
    f: &MeroFunction<T>,
    sb: &SymplecticBasis<T>,
) -> Result<(Differential<T>, Differential<T>)> {
    let df = exterior_derivative(curve, f);
    let coef = sb.coefficients(&df)?;
    let beta: Vec<Complex<T>> = coef.iter().skip(1).step_by(2).copied().collect();
    let tau = Differential::linear_combination(&sb.tau, &beta, curve.tol().separation);
    let tau0 = tau.sub(&df, curve.tol().separation);
    Ok((tau, tau0))
}

/// Velocities `dz_i/dt = -alpha_i`.
pub fn vector_field<T: Real>(alpha: &[Complex<T>]) -> Vec<Complex<T>> {
    alpha.iter().map(|&a| -a).collect()
}

/// `dy/dt = P'(x) (dx/dt) / (2y)` for a moving point.
pub fn y_velocity<T: Real>(curve: &Curve<T>, pt: &CurvePoint<T>, xdot: Complex<T>) -> Complex<T> {
    curve.dp().eval(pt.x) * xdot / (pt.y * T::lit(2.0))
}

/// Fixed problem data for one integration.
struct FlowProblem<'a, T: Real> {
    curve: &'a Curve<T>,
    d0: &'a Divisor<T>,
    pp: &'a PrincipalPartSpec<T>,
    abel_basis: Vec<Differential<T>>,
    samples: &'a [CurvePoint<T>],
    g: usize,
}

/// Flat state: `x_1..x_g, y_1..y_g, abel_1..abel_g, logpsi_1..logpsi_s`.
type Vector<T> = Vec<Complex<T>>;

impl<T: Real> FlowProblem<'_, T> {
    fn guard(&self, pts: &[CurvePoint<T>]) -> Result<()> {
        let eps = self.curve.tol().flow_guard;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[..i] {
                if (p.x - q.x).norm() < eps {
                    return Err(Error::Collision(format!("points {q} and {p} collide")));
                }
            }
            for &e in self.curve.branch_x() {
                if (p.x - e).norm() < eps {
                    return Err(Error::BranchApproach(format!("point {p} approaches branch value {e}")));
                }
            }
            for (q, _) in &self.d0.points {
                if (p.x - q.x).norm() < eps {
                    return Err(Error::Collision(format!("point {p} approaches {q} of D0")));
                }
            }
        }
        Ok(())
    }

    fn rhs(&self, s: &Vector<T>) -> Result<Vector<T>> {
        let g = self.g;
        let state_pts: Vec<CurvePoint<T>> = (0..g)
            .map(|i| CurvePoint {
                x: s[i],
                y: s[g + i],
            })
            .collect();
        self.guard(&state_pts)?;
        let lifted: Vec<CurvePoint<T>> = state_pts.iter().map(|p| self.curve.lift(p.x, p.y)).collect();
        let d = Divisor::simple(&lifted);
        let (f, alpha) = m_function_core(self.curve, &d, self.d0, self.pp).map_err(|e| match e {
            Error::SpecialDivisor(m)
            | Error::UnderdeterminedPrincipalParts(m)
            | Error::RankDeficiency(m)
            | Error::IllConditioned(m)
            | Error::SingularMatrix(m) => Error::SpecialDivisorOnPath(format!("{d}: {m}")),
            other => other,
        })?;
        let xdot = vector_field(&alpha);
        let mut out = Vec::with_capacity(s.len());
        out.extend(xdot.iter().copied());
        out.extend(state_pts.iter().zip(&xdot).map(|(p, &v)| y_velocity(self.curve, p, v)));
        for w in &self.abel_basis {
            let mut acc = czero::<T>();
            for (p, &v) in lifted.iter().zip(&xdot) {
                acc += w.value_at(self.curve, p)? * v;
            }
            out.push(acc);
        }
        for z in self.samples {
            out.push(f.eval(z));
        }
        Ok(out)
    }

    fn snapshot(&self, t: T, s: &Vector<T>) -> FlowState<T> {
        let g = self.g;
        FlowState {
            t,
            d_points: (0..g)
                .map(|i| CurvePoint {
                    x: s[i],
                    y: s[g + i],
                })
                .collect(),
            abel: s[2 * g..3 * g].to_vec(),
            logpsi: s[3 * g..].to_vec(),
        }
    }
}

fn axpy<T: Real>(s: &Vector<T>, h: T, k: &Vector<T>) -> Vector<T> {
    s.iter().zip(k).map(|(&a, &b)| a + b * h).collect()
}

/// Integrates the Dubrovin flow `dz_i/dt = -alpha_i(t)` from `d_init` for
/// time `t_end` in `steps` classical RK4 steps.
///
/// `alpha` is recomputed from the current divisor at every stage with the
/// same principal parts. Alongside the points the integrator carries Abel
/// coordinates `sum_i int theta_k` for the first-kind part of
/// `symplectic_basis(D0)` and `log Psi(z) = int f_t(z) dt` for each sample.
pub fn integrate_flow<T: Real>(
    curve: &Curve<T>,
    d_init: &Divisor<T>,
    d0: &Divisor<T>,
    pp: &PrincipalPartSpec<T>,
    t_end: T,
    steps: usize,
    samples: &[CurvePoint<T>],
) -> std::result::Result<Trajectory<T>, FlowAbort<T>> {
    let failed = |error: Error| FlowAbort {
        error,
        partial: Trajectory {
            states: Vec::new(),
            step: T::zero(),
            scheme: "rk4".into(),
            samples: samples.to_vec(),
        },
    };
    if steps == 0 || !(t_end >= T::zero()) {
        return Err(failed(Error::InadmissibleSupport(format!(
            "need steps >= 1 and t_end >= 0, got {steps} and {t_end}"
        ))));
    }
    // Validates D(0) and D0 before stepping.
    build_m_function(curve, d_init, d0, pp).map_err(failed)?;
    let basis0 = symplectic_basis(curve, d0).map_err(failed)?;
    let problem = FlowProblem {
        curve,
        d0,
        pp,
        abel_basis: basis0.theta,
        samples,
        g: curve.genus(),
    };
    let g = problem.g;
    let pts = points_of(d_init);
    let mut s: Vector<T> = pts.iter().map(|p| p.x).collect();
    s.extend(pts.iter().map(|p| p.y));
    s.resize(3 * g + samples.len(), czero());

    let h = t_end / T::lit(steps as f64);
    let mut traj = Trajectory {
        states: vec![problem.snapshot(T::zero(), &s)],
        step: h,
        scheme: "rk4".into(),
        samples: samples.to_vec(),
    };
    if t_end == T::zero() {
        return Ok(traj);
    }
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    for n in 0..steps {
        let stage = || -> Result<Vector<T>> {
            let k1 = problem.rhs(&s)?;
            let k2 = problem.rhs(&axpy(&s, half, &k1))?;
            let k3 = problem.rhs(&axpy(&s, half, &k2))?;
            let k4 = problem.rhs(&axpy(&s, h, &k3))?;
            Ok((0..s.len())
                .map(|i| s[i] + (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * sixth)
                .collect())
        };
        match stage() {
            Ok(next) => s = next,
            Err(error) => return Err(FlowAbort { error, partial: traj }),
        }
        let t = if n + 1 == steps { t_end } else { h * T::lit((n + 1) as f64) };
        traj.states.push(problem.snapshot(t, &s));
    }
    Ok(traj)
}

/// `Psi(z) = exp(log Psi)` at the end of the trajectory for one sample.
pub fn baker_akhiezer<T: Real>(traj: &Trajectory<T>, sample_id: usize) -> Result<Complex<T>> {
    let last = traj.states.last().ok_or(Error::UnknownSample(sample_id))?;
    last.logpsi
        .get(sample_id)
        .map(|l| l.exp())
        .ok_or(Error::UnknownSample(sample_id))
}

/// `sum_{Q in D0} Res_Q(f theta_k)` for each `theta_k`: the constant
/// velocity of the Abel coordinates.
pub fn abel_velocity<T: Real>(
    curve: &Curve<T>,
    f: &MeroFunction<T>,
    d0: &Divisor<T>,
    theta: &[Differential<T>],
) -> Result<Vec<Complex<T>>> {
    theta
        .iter()
        .map(|w| {
            let mut acc = czero::<T>();
            for (q, _) in &d0.points {
                let place = Place::Point(*q);
                let fs = f.expand(curve, &place, 1)?;
                let ws = w.expand(curve, &place, (-fs.lead()).max(0) + 1)?;
                acc += fs.mul(&ws).residue();
            }
            Ok(acc)
        })
        .collect()
}

impl<T: Real> Trajectory<T> {
    pub fn genus(&self) -> usize {
        self.states.first().map_or(0, |s| s.d_points.len())
    }

    /// Final divisor, with each `y` snapped onto the curve.
    pub fn final_divisor(&self, curve: &Curve<T>) -> Option<Divisor<T>> {
        let last = self.states.last()?;
        let pts: Vec<CurvePoint<T>> = last.d_points.iter().map(|p| curve.lift(p.x, p.y)).collect();
        Some(Divisor::simple(&pts))
    }

    /// Largest `|y^2 - P(x)|` over all snapshots.
    pub fn max_defect(&self, curve: &Curve<T>) -> T {
        self.states
            .iter()
            .flat_map(|s| s.d_points.iter())
            .map(|p| (p.y * p.y - curve.eval_p(p.x)).norm())
            .fold(T::zero(), T::max)
    }

    /// CSV table: `t`, points, Abel coordinates, then `logpsi` and `psi` per
    /// sample, each complex value as a `_re`/`_im` column pair.
    pub fn to_csv(&self) -> String {
        let g = self.genus();
        let ns = self.samples.len();
        let mut cols = vec!["t".to_string()];
        for i in 1..=g {
            cols.extend([format!("x{i}_re"), format!("x{i}_im"), format!("y{i}_re"), format!("y{i}_im")]);
        }
        for k in 1..=g {
            cols.extend([format!("abel{k}_re"), format!("abel{k}_im")]);
        }
        for s in 0..ns {
            cols.extend([format!("logpsi{s}_re"), format!("logpsi{s}_im")]);
        }
        for s in 0..ns {
            cols.extend([format!("psi{s}_re"), format!("psi{s}_im")]);
        }
        let mut out = cols.join(",");
        out.push('\n');
        for st in &self.states {
            let mut row = vec![format!("{}", st.t)];
            let mut push = |z: Complex<T>| {
                row.push(format!("{}", z.re));
                row.push(format!("{}", z.im));
            };
            for p in &st.d_points {
                push(p.x);
                push(p.y);
            }
            for &a in &st.abel {
                push(a);
            }
            for &l in &st.logpsi {
                push(l);
            }
            for &l in &st.logpsi {
                push(l.exp());
            }
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}
