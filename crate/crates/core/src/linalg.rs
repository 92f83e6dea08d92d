//! Small dense complex linear algebra: partial-pivoting LU and a one-sided
//! Jacobi SVD used for rank decisions and kernels.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Real};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|c| c.norm()).fold(T::zero(), |a, b| a.max(b))
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let lu = Lu::factor(self)?;
        Ok(lu.solve(b))
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = Lu::factor(self)?;
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for j in 0..n {
            let mut e = vec![czero(); n];
            e[j] = cone();
            let x = lu.solve(&e);
            for i in 0..n {
                inv[(i, j)] = x[i];
            }
        }
        Ok(inv)
    }

    pub fn singular_values(&self) -> Vec<T> {
        Svd::compute(self).sigma
    }

    /// Ratio of extreme singular values (infinite when rank deficient).
    pub fn condition_number(&self) -> T {
        let s = self.singular_values();
        let max = s.iter().copied().fold(T::zero(), T::max);
        let min = s.iter().copied().fold(T::infinity(), T::min);
        if min.is_zero() {
            T::infinity()
        } else {
            max / min
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

struct Lu<T> {
    lu: CMat<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    fn factor(a: &CMat<T>) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::SingularMatrix(format!("{}x{} is not square", a.rows, a.cols)));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        let tiny = scale * T::epsilon() * T::lit(n.max(1) as f64);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny {
                return Err(Error::SingularMatrix(format!("zero pivot in column {k}")));
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= f * v;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.lu.rows;
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Thin SVD data from one-sided (Hestenes) Jacobi: `A V = U diag(sigma)`.
pub struct Svd<T> {
    /// Singular values, one per column of `A`, unsorted.
    pub sigma: Vec<T>,
    /// Right singular vectors as columns.
    pub v: CMat<T>,
}

impl<T: Real> Svd<T> {
    pub fn compute(a: &CMat<T>) -> Self {
        let (m, n) = (a.rows, a.cols);
        // Column-major working copy.
        let mut u: Vec<Vec<Complex<T>>> = (0..n).map(|j| a.column(j)).collect();
        let mut v: Vec<Vec<Complex<T>>> = (0..n)
            .map(|j| {
                let mut e = vec![czero(); n];
                e[j] = cone();
                e
            })
            .collect();
        let eps = T::epsilon();
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha: T = u[p].iter().map(|z| z.norm_sqr()).sum();
                    let beta: T = u[q].iter().map(|z| z.norm_sqr()).sum();
                    let gamma: Complex<T> = (0..m).map(|i| u[p][i].conj() * u[q][i]).sum();
                    let g = gamma.norm();
                    if g <= eps * (alpha * beta).sqrt() || g.is_zero() {
                        continue;
                    }
                    rotated = true;
                    let phase = gamma / g;
                    let zeta = (beta - alpha) / (g + g);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let cs = T::one() / (T::one() + t * t).sqrt();
                    let sn = cs * t;
                    for i in 0..m {
                        let up = u[p][i];
                        let w = u[q][i] * phase.conj();
                        u[p][i] = up * cs - w * sn;
                        u[q][i] = up * sn + w * cs;
                    }
                    for i in 0..n {
                        let vp = v[p][i];
                        let w = v[q][i] * phase.conj();
                        v[p][i] = vp * cs - w * sn;
                        v[q][i] = vp * sn + w * cs;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let sigma = u
            .iter()
            .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt())
            .collect();
        let mut vm = CMat::zeros(n, n);
        for (j, col) in v.iter().enumerate() {
            for (i, &z) in col.iter().enumerate() {
                vm[(i, j)] = z;
            }
        }
        Svd { sigma, v: vm }
    }
}

/// Numerical rank and kernel of a matrix, with column equilibration.
pub struct Kernel<T> {
    /// Kernel basis vectors in the original (unscaled) coordinates,
    /// orthonormalized.
    pub basis: Vec<Vec<Complex<T>>>,
    /// Relative singular values `sigma / sigma_max`, ascending.
    pub relative_sigma: Vec<T>,
}

/// Computes the kernel of `a`.
///
/// Columns are scaled to unit norm before the SVD. Relative singular values
/// at most `rank_tol` span the kernel; values within `band` of the threshold
/// in either direction raise `RankDeficiency`.
pub fn kernel<T: Real>(a: &CMat<T>, rank_tol: T, band: T) -> Result<Kernel<T>> {
    let n = a.cols;
    let mut scaled = a.clone();
    let mut scales = vec![T::one(); n];
    for (j, s) in scales.iter_mut().enumerate() {
        let norm: T = (0..a.rows).map(|i| a[(i, j)].norm_sqr()).sum::<T>().sqrt();
        if norm > T::zero() {
            *s = T::one() / norm;
            for i in 0..a.rows {
                scaled[(i, j)] = a[(i, j)] * *s;
            }
        }
    }
    let svd = Svd::compute(&scaled);
    let smax = svd.sigma.iter().copied().fold(T::zero(), T::max);
    let mut rel: Vec<(usize, T)> = svd
        .sigma
        .iter()
        .enumerate()
        .map(|(j, &s)| (j, if smax.is_zero() { T::zero() } else { s / smax }))
        .collect();
    rel.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal));
    // A matrix with fewer rows than columns has at least cols - rows null directions.
    for &(_, r) in &rel {
        if r > rank_tol / band && r < rank_tol * band {
            return Err(Error::RankDeficiency(format!(
                "singular value ratio {r:e} is within a factor {band} of the threshold {rank_tol:e}"
            )));
        }
    }
    let raw: Vec<Vec<Complex<T>>> = rel
        .iter()
        .filter(|(_, r)| *r <= rank_tol)
        .map(|&(j, _)| (0..n).map(|i| svd.v[(i, j)] * scales[i]).collect())
        .collect();
    let basis = orthonormalize(&raw, T::calibrated(1e-10));
    if basis.len() != raw.len() {
        return Err(Error::RankDeficiency(
            "kernel vectors became dependent after unscaling".into(),
        ));
    }
    Ok(Kernel {
        basis,
        relative_sigma: rel.into_iter().map(|(_, r)| r).collect(),
    })
}

pub(crate) fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Modified Gram–Schmidt with reorthogonalization; vectors whose residual norm
/// falls below `drop_tol` times their original norm are discarded.
pub fn orthonormalize<T: Real>(vs: &[Vec<Complex<T>>], drop_tol: T) -> Vec<Vec<Complex<T>>> {
    let mut out: Vec<Vec<Complex<T>>> = Vec::new();
    for v in vs {
        let n0 = norm(v);
        if n0.is_zero() {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let proj = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= *qi * proj;
                }
            }
        }
        let nw = norm(&w);
        if nw <= drop_tol * n0 {
            continue;
        }
        out.push(w.into_iter().map(|z| z / nw).collect());
    }
    out
}
