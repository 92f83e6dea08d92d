//! Seeded random problem instances.
//!
//! All randomness flows through `ChaCha8Rng` seeded from a `u64`, so a seed
//! fully determines every generated curve, divisor and test function.

use derham::derham::coefficient_map;
use derham::linalg::CMat;
use derham::{c, is_nonspecial, second_kind_space, Curve64, CurvePoint64, Denom64, Divisor64, MeroFunction64, Poly64, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the disk of radius `r`.
pub fn disk(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    let rho = r * rng.gen::<f64>().sqrt();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    C64::from_polar(rho, phi)
}

fn far_from(z: C64, others: &[C64], gap: f64) -> bool {
    others.iter().all(|o| (z - o).norm() >= gap)
}

/// `y^2 = lc * prod (x - e_j)` with `2g + 1` roots in the disk of radius 1.5,
/// pairwise at least 0.4 apart.
pub fn curve(rng: &mut ChaCha8Rng, g: usize) -> Curve64 {
    let mut roots: Vec<C64> = Vec::new();
    while roots.len() < 2 * g + 1 {
        let z = disk(rng, 1.5);
        if far_from(z, &roots, 0.4) {
            roots.push(z);
        }
    }
    let lc = C64::from_polar(rng.gen_range(0.5..2.0), rng.gen::<f64>() * std::f64::consts::TAU);
    let p = Poly64::from_roots(&roots).scale(lc);
    Curve64::new(p.coeffs().to_vec()).expect("separated roots give a squarefree polynomial")
}

/// A point with `x` in the disk of radius 2, at least `gap` from the branch
/// values and from every x in `avoid`, on a random sheet.
pub fn point(rng: &mut ChaCha8Rng, cv: &Curve64, avoid: &[C64], gap: f64) -> CurvePoint64 {
    loop {
        let x = disk(rng, 2.0);
        if far_from(x, cv.branch_x(), gap) && far_from(x, avoid, gap) {
            let sheet = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let [p, _] = cv.points_over(x);
            return cv.lift(x, p.y * sheet);
        }
    }
}

/// Largest condition number of the normalization map accepted for a
/// generated degree-`g` divisor. Near-special divisors above it amplify
/// rounding in the symplectic basis past the property tolerances.
pub const MAX_DIVISOR_CONDITION: f64 = 1e3;

/// Condition number of the map sending the second-kind space of `d` to its
/// constant terms and `z^-2` coefficients at the points of `d`.
pub fn divisor_condition(cv: &Curve64, d: &Divisor64) -> Result<f64, derham::Error> {
    let space = second_kind_space(cv, d)?;
    let pts = d.support();
    let n = space.len();
    let mut l = CMat::zeros(n, n);
    for (j, w) in space.iter().enumerate() {
        for (i, v) in coefficient_map(cv, &pts, w)?.into_iter().enumerate() {
            l[(i, j)] = v;
        }
    }
    Ok(l.condition_number())
}

/// A non-special divisor of `n` points with distinct x-coordinates, kept
/// away from `avoid`. Degree-`g` divisors are also kept well conditioned.
pub fn divisor(rng: &mut ChaCha8Rng, cv: &Curve64, n: usize, avoid: &[C64]) -> Divisor64 {
    loop {
        let mut xs: Vec<C64> = avoid.to_vec();
        let mut pts = Vec::new();
        for _ in 0..n {
            let p = point(rng, cv, &xs, 0.3);
            xs.push(p.x);
            pts.push(p);
        }
        let d = Divisor64::simple(&pts);
        if n != cv.genus()
            || (is_nonspecial(cv, &d).unwrap_or(false)
                && divisor_condition(cv, &d).is_ok_and(|c| c <= MAX_DIVISOR_CONDITION))
        {
            return d;
        }
    }
}

/// Curve with two disjoint non-special divisors `D` and `D0`.
pub struct Instance {
    pub curve: Curve64,
    pub d: Divisor64,
    pub d0: Divisor64,
}

pub fn instance(rng: &mut ChaCha8Rng, g: usize) -> Instance {
    let curve = curve(rng, g);
    let d = divisor(rng, &curve, g, &[]);
    let xs: Vec<C64> = d.points.iter().map(|(p, _)| p.x).collect();
    let d0 = divisor(rng, &curve, g, &xs);
    Instance { curve, d, d0 }
}

pub fn complex(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> Poly64 {
    Poly64::new((0..=deg).map(|_| complex(rng)).collect())
}

/// `(p + q y) / prod (x - r_j)^(m_j)` with poles over random x-values kept
/// `gap` away from the branch values and from `avoid`.
pub fn function(rng: &mut ChaCha8Rng, cv: &Curve64, avoid: &[C64], poles: usize, max_mult: u32) -> MeroFunction64 {
    let mut roots = Vec::new();
    let mut xs: Vec<C64> = avoid.to_vec();
    for _ in 0..poles {
        let p = point(rng, cv, &xs, 0.3);
        xs.push(p.x);
        roots.push((p.x, rng.gen_range(1..=max_mult)));
    }
    let den = Denom64::from_factors(c(1., 0.), &roots, 1e-8);
    let pd = rng.gen_range(0..=2);
    let qd = rng.gen_range(0..=1);
    MeroFunction64::new(random_poly(rng, pd), random_poly(rng, qd), den)
}
