//! Small dense real matrices and the continuous-time Riccati and Lyapunov
//! solvers the estimators are built on.
//!
//! All Riccati variants reduce to one symmetric equation
//!
//! ```text
//! X E + Eᵀ X − X G X + Q = 0
//! ```
//!
//! solved on the invariant subspace of the Hamiltonian `[[E, −G], [−Q, −Eᵀ]]`
//! whose eigenvalues lie in the requested half-plane. The subspace is found
//! with the matrix sign function (Newton iteration with determinant scaling)
//! and the result is polished with Newton steps on the original equation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest state dimension accepted by the Riccati solvers.
pub const MAX_STATE_DIM: usize = 8;
/// Largest dimension accepted by the Lyapunov solver (augmented systems).
pub const MAX_LYAPUNOV_DIM: usize = 2 * MAX_STATE_DIM;

const SIGN_MAX_ITERS: usize = 100;
const NEWTON_MAX_ITERS: usize = 10;

/// Dense real matrix. Entries are finite when built through the checked
/// constructors.
#[derive(Clone, PartialEq)]
pub struct Mat(DMatrix<f64>);

impl Mat {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, row_major: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty {rows}x{cols} matrix")));
        }
        if row_major.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                row_major.len()
            )));
        }
        if row_major.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Mat(DMatrix::from_row_slice(rows, cols, &row_major)))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != nc) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Mat::new(nr, nc, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Shape("empty matrix".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Mat(m))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Mat(DMatrix::identity(n, n))
    }

    /// 1×1 matrix.
    pub fn scalar(v: f64) -> Self {
        Mat(DMatrix::from_element(1, 1, v))
    }

    /// n×1 column vector.
    pub fn column(values: &[f64]) -> Result<Self> {
        Mat::new(values.len(), 1, values.to_vec())
    }

    /// 1×n row vector.
    pub fn row(values: &[f64]) -> Result<Self> {
        Mat::new(1, values.len(), values.to_vec())
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut m = Mat::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.0[(i, i)] = *v;
        }
        if m.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> Mat {
        Mat(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat(&self.0 * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `(S + Sᵀ) / 2`.
    pub fn symmetrize(&self) -> Mat {
        Mat((&self.0 + self.0.transpose()) * 0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn try_inverse(&self) -> Result<Mat> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "inverse of a {}x{} matrix",
                self.rows(),
                self.cols()
            )));
        }
        let inv = self.0.clone().try_inverse().ok_or(Error::SingularInput)?;
        Mat::from_dmatrix(inv).map_err(|_| Error::SingularInput)
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Mat) -> Result<Mat> {
        if !self.is_square() || self.rows() != rhs.rows() {
            return Err(Error::Shape("solve: incompatible shapes".into()));
        }
        let x = self.0.clone().lu().solve(&rhs.0).ok_or(Error::SingularInput)?;
        Mat::from_dmatrix(x).map_err(|_| Error::SingularInput)
    }

    /// Submatrix of `nr × nc` entries starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat {
        Mat(self.0.view((r0, c0), (nr, nc)).into_owned())
    }

    /// `[[tl, tr], [bl, br]]`.
    pub fn from_blocks(tl: &Mat, tr: &Mat, bl: &Mat, br: &Mat) -> Result<Mat> {
        if tl.rows() != tr.rows()
            || bl.rows() != br.rows()
            || tl.cols() != bl.cols()
            || tr.cols() != br.cols()
        {
            return Err(Error::Shape("from_blocks: inconsistent block shapes".into()));
        }
        let (r1, c1) = (tl.rows(), tl.cols());
        let mut m = DMatrix::zeros(r1 + bl.rows(), c1 + tr.cols());
        m.view_mut((0, 0), (r1, c1)).copy_from(&tl.0);
        m.view_mut((0, c1), (r1, tr.cols())).copy_from(&tr.0);
        m.view_mut((r1, 0), (bl.rows(), c1)).copy_from(&bl.0);
        m.view_mut((r1, c1), (br.rows(), br.cols())).copy_from(&br.0);
        Ok(Mat(m))
    }

    /// Eigenvalues as `(re, im)` pairs.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        let n = self.rows();
        if n == 1 {
            return vec![(self.0[(0, 0)], 0.0)];
        }
        let d = balancing_scales(&self.0);
        let balanced = DMatrix::from_fn(n, n, |i, j| self.0[(i, j)] * d[i] / d[j]);
        // The shifted QR iteration can cycle on structured inputs. Retry
        // under fixed orthogonal similarities before giving up.
        for attempt in 0..8 {
            let m = if attempt == 0 {
                balanced.clone()
            } else {
                let h = householder(n, attempt);
                &h * &balanced * &h
            };
            let eps = if attempt < 4 { f64::EPSILON } else { 1e3 * f64::EPSILON };
            if let Some(schur) = nalgebra::Schur::try_new(m, eps, 200 * n) {
                return schur
                    .complex_eigenvalues()
                    .iter()
                    .map(|z| (z.re, z.im))
                    .collect();
            }
        }
        panic!("eigenvalue iteration failed to converge on {self:?}");
    }

    pub fn max_real_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(f64::NEG_INFINITY, |acc, (re, _)| acc.max(*re))
    }

    pub fn min_real_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(f64::INFINITY, |acc, (re, _)| acc.min(*re))
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(0.0, |acc, (re, im)| acc.max(re.hypot(*im)))
    }

    pub fn is_hurwitz(&self) -> bool {
        self.max_real_eigenvalue() < 0.0
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .symmetrize()
            .0
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn is_positive_definite(&self) -> bool {
        self.symmetric_eigenvalues().first().is_some_and(|v| *v > 0.0)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}[", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:e}", self.0[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl<'a> Add<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        Mat(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        Mat(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        Mat(&self.0 * &rhs.0)
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        Mat(-&self.0)
    }
}

/// Which Riccati-pair root [`solve_robust_are`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `X A + Aᵀ X + X W X + M = 0` with `A + W X` anti-stable.
    Forward,
    /// `Y A + Aᵀ Y − Y W Y − M = 0` with `A − W Y` Hurwitz.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HalfPlane {
    Left,
    Right,
}

fn check_square(m: &Mat, name: &str, n: usize) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::Shape(format!(
            "{name} is {}x{}, expected {n}x{n}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn is_symmetric(m: &Mat) -> bool {
    let tol = 1e-12 * (1.0 + m.max_abs());
    (0..m.rows()).all(|i| (0..i).all(|j| (m.get(i, j) - m.get(j, i)).abs() <= tol))
}

/// Steady-state Kalman filter covariance: the stabilizing solution of
/// `A P + P Aᵀ − P Cᵀ R⁻¹ C P + B N Bᵀ = 0`.
pub fn solve_filter_are(a: &Mat, b: &Mat, c: &Mat, n_cov: &Mat, r_meas: &Mat) -> Result<Mat> {
    let n = a.rows();
    check_square(a, "A", n)?;
    if n > MAX_STATE_DIM {
        return Err(Error::TooLarge(n, MAX_STATE_DIM));
    }
    if b.rows() != n || c.cols() != n {
        return Err(Error::Shape("B/C incompatible with A".into()));
    }
    check_square(n_cov, "N", b.cols())?;
    check_square(r_meas, "R", c.rows())?;
    if !is_symmetric(n_cov) || !n_cov.is_positive_definite() {
        return Err(Error::InvalidParam("process noise covariance must be SPD".into()));
    }
    if !is_symmetric(r_meas) || !r_meas.is_positive_definite() {
        return Err(Error::InvalidParam("measurement noise covariance must be SPD".into()));
    }

    let g = &(&c.transpose() * &r_meas.try_inverse()?) * c;
    let q = &(b * n_cov) * &b.transpose();
    let p = symmetric_are(&a.transpose(), &g, &q, HalfPlane::Left)
        .map_err(|e| match e {
            Error::IllConditioned(_) => e,
            other => Error::NoStabilizingSolution(other.to_string()),
        })?;

    let closed = a - &(&p * &g);
    if !closed.is_hurwitz() {
        return Err(Error::NoStabilizingSolution(format!(
            "closed-loop max real eigenvalue {:e}",
            closed.max_real_eigenvalue()
        )));
    }
    let min_ev = p.symmetric_eigenvalues()[0];
    if min_ev < -1e-9 * (1.0 + p.max_abs()) {
        return Err(Error::NoStabilizingSolution(format!(
            "solution is indefinite (min eigenvalue {min_ev:e})"
        )));
    }
    let res = filter_are_residual(a, &g, &q, &p);
    let tol = 1e-10 * (1.0 + a.frobenius_norm() + p.frobenius_norm().powi(2));
    if res > tol {
        return Err(Error::IllConditioned(format!(
            "filter Riccati residual {res:e} exceeds {tol:e}"
        )));
    }
    Ok(p)
}

fn filter_are_residual(a: &Mat, g: &Mat, q: &Mat, p: &Mat) -> f64 {
    let r = &(&(a * p) + &(p * &a.transpose())) - &(&(p * g) * p);
    (&r + q).frobenius_norm()
}

/// Robust smoothing Riccati pair. `Forward` returns `X` with
/// `X A + Aᵀ X + X W X + M = 0` and `A + W X` anti-stable; `Backward` returns
/// `Y` with `Y A + Aᵀ Y − Y W Y − M = 0` and `A − W Y` Hurwitz. Both must be
/// positive definite.
pub fn solve_robust_are(a: &Mat, w: &Mat, m: &Mat, branch: Branch) -> Result<Mat> {
    let n = a.rows();
    check_square(a, "A", n)?;
    check_square(w, "W", n)?;
    check_square(m, "M", n)?;
    if n > MAX_STATE_DIM {
        return Err(Error::TooLarge(n, MAX_STATE_DIM));
    }
    if !is_symmetric(w) || !is_symmetric(m) {
        return Err(Error::InvalidParam("W and M must be symmetric".into()));
    }
    if w.symmetric_eigenvalues()[0] < -1e-12 * (1.0 + w.max_abs()) {
        return Err(Error::InvalidParam("W must be positive semidefinite".into()));
    }

    let (g, q, half) = match branch {
        Branch::Forward => (-w, m.clone(), HalfPlane::Right),
        Branch::Backward => (w.clone(), -m, HalfPlane::Left),
    };
    let x = symmetric_are(a, &g, &q, half)
        .map_err(|e| Error::NoAdmissibleSolution(e.to_string()))?;

    let closed = a - &(&g * &x);
    let ok = match half {
        HalfPlane::Left => closed.max_real_eigenvalue() < 0.0,
        HalfPlane::Right => closed.min_real_eigenvalue() > 0.0,
    };
    if !ok {
        return Err(Error::NoAdmissibleSolution(format!(
            "{branch:?} branch criterion violated"
        )));
    }
    if !x.is_positive_definite() {
        return Err(Error::NoAdmissibleSolution(format!(
            "{branch:?} solution not positive definite (min eigenvalue {:e})",
            x.symmetric_eigenvalues()[0]
        )));
    }
    let res = riccati_residual(a, &g, &q, &x);
    let tol = 1e-10 * (1.0 + a.frobenius_norm() + x.frobenius_norm().powi(2));
    if res > tol {
        return Err(Error::NoAdmissibleSolution(format!(
            "residual {res:e} exceeds {tol:e}"
        )));
    }
    Ok(x)
}

/// Solves `A C + C Aᵀ + Q = 0` for Hurwitz `A`.
pub fn solve_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.rows();
    check_square(a, "A", n)?;
    check_square(q, "Q", n)?;
    if n > MAX_LYAPUNOV_DIM {
        return Err(Error::TooLarge(n, MAX_LYAPUNOV_DIM));
    }
    let max_re = a.max_real_eigenvalue();
    if max_re >= 0.0 {
        return Err(Error::NotHurwitz(max_re));
    }
    let c = lyapunov_any(a, &q.symmetrize())?;
    let res = lyapunov_residual(a, q, &c);
    let tol = 1e-11 * (1.0 + a.frobenius_norm() * c.frobenius_norm());
    if res > tol {
        return Err(Error::IllConditioned(format!(
            "Lyapunov residual {res:e} exceeds {tol:e}"
        )));
    }
    Ok(c)
}

fn lyapunov_residual(a: &Mat, q: &Mat, c: &Mat) -> f64 {
    (&(&(a * c) + &(c * &a.transpose())) + q).frobenius_norm()
}

/// Residual of `X E + Eᵀ X − X G X + Q`.
fn riccati_residual_mat(e: &Mat, g: &Mat, q: &Mat, x: &Mat) -> Mat {
    let lin = &(x * e) + &(&e.transpose() * x);
    &(&lin - &(&(x * g) * x)) + q
}

fn riccati_residual(e: &Mat, g: &Mat, q: &Mat, x: &Mat) -> f64 {
    riccati_residual_mat(e, g, q, x).frobenius_norm()
}

/// Reflector `I − 2vvᵀ/‖v‖²` with `v_i = 1 + ((i + 1) · seed mod 7)`.
fn householder(n: usize, seed: usize) -> DMatrix<f64> {
    let v = DMatrix::from_fn(n, 1, |i, _| 1.0 + ((i + 1) * seed % 7) as f64);
    let vv = (v.transpose() * &v)[(0, 0)];
    DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv)
}

/// Power-of-two diagonal similarity `D` balancing row and column norms of
/// `m` (Osborne iteration). Returns the diagonal of `D` such that `D m D⁻¹`
/// is balanced.
fn balancing_scales(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut d = vec![1.0_f64; n];
    for _ in 0..50 {
        let mut changed = false;
        for i in 0..n {
            let mut row = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                if j != i {
                    row += (m[(i, j)] * d[i] / d[j]).abs();
                    col += (m[(j, i)] * d[j] / d[i]).abs();
                }
            }
            if row == 0.0 || col == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let s = row + col;
            let (mut r, mut c) = (row, col);
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f /= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f *= 2.0;
            }
            if (r + c) < 0.95 * s {
                d[i] *= f;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// `X E + Eᵀ X − X G X + Q = 0` on the Hamiltonian invariant subspace whose
/// spectrum (that of `E − G X`) lies in `half`.
fn symmetric_are(e: &Mat, g: &Mat, q: &Mat, half: HalfPlane) -> Result<Mat> {
    let n = e.rows();

    // X = D X̃ D  ⇒  Ẽ = D E D⁻¹, G̃ = D G D, Q̃ = D⁻¹ Q D⁻¹.
    let d = balancing_scales(e.as_dmatrix());
    let mut es = e.0.clone();
    let mut gs = g.0.clone();
    let mut qs = q.0.clone();
    for i in 0..n {
        for j in 0..n {
            es[(i, j)] *= d[i] / d[j];
            gs[(i, j)] *= d[i] * d[j];
            qs[(i, j)] /= d[i] * d[j];
        }
    }

    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&es);
    h.view_mut((0, n), (n, n)).copy_from(&(-&gs));
    h.view_mut((n, 0), (n, n)).copy_from(&(-&qs));
    h.view_mut((n, n), (n, n)).copy_from(&(-es.transpose()));

    let z = matrix_sign(h)?;

    // Left half-plane subspace: (Z + I)[I; X] = 0; right: (Z − I)[I; X] = 0.
    let shift = match half {
        HalfPlane::Left => 1.0,
        HalfPlane::Right => -1.0,
    };
    let mut lhs = DMatrix::zeros(2 * n, n);
    let mut rhs = DMatrix::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&z.view((0, n), (n, n)));
    let mut z22 = z.view((n, n), (n, n)).into_owned();
    let mut z11 = z.view((0, 0), (n, n)).into_owned();
    for i in 0..n {
        z22[(i, i)] += shift;
        z11[(i, i)] += shift;
    }
    lhs.view_mut((n, 0), (n, n)).copy_from(&z22);
    rhs.view_mut((0, 0), (n, n)).copy_from(&(-z11));
    rhs.view_mut((n, 0), (n, n)).copy_from(&(-z.view((n, 0), (n, n)).into_owned()));

    let svd = lhs.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax.is_nan() || smax <= 0.0 || smin <= 1e-12 * smax {
        return Err(Error::NoStabilizingSolution(
            "invariant subspace is not a graph over the state coordinates".into(),
        ));
    }
    let xs = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NoStabilizingSolution(e.to_string()))?;
    let mut x = xs;
    for i in 0..n {
        for j in 0..n {
            x[(i, j)] *= d[i] * d[j];
        }
    }
    let mut x = Mat::from_dmatrix(x)
        .map_err(|_| Error::NoStabilizingSolution("non-finite solution".into()))?
        .symmetrize();

    newton_polish(e, g, q, &mut x);
    Ok(x)
}

/// Newton steps `(E − G X)ᵀ Δ + Δ (E − G X) = −F(X)`, kept only while the
/// residual decreases.
fn newton_polish(e: &Mat, g: &Mat, q: &Mat, x: &mut Mat) {
    let mut res = riccati_residual(e, g, q, x);
    for _ in 0..NEWTON_MAX_ITERS {
        if res == 0.0 {
            break;
        }
        let f = riccati_residual_mat(e, g, q, x);
        let ahat = (e - &(g * x)).transpose();
        let Ok(delta) = lyapunov_any(&ahat, &f) else {
            break;
        };
        let cand = (&*x + &delta).symmetrize();
        let cand_res = riccati_residual(e, g, q, &cand);
        if cand_res.partial_cmp(&res) != Some(std::cmp::Ordering::Less) {
            break;
        }
        let improved = cand_res < 0.5 * res;
        *x = cand;
        res = cand_res;
        if !improved {
            break;
        }
    }
}

/// Matrix sign function by scaled Newton iteration `Z ← (cZ + (cZ)⁻¹)/2`.
fn matrix_sign(mut z: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = z.nrows();
    let mut scaling = true;
    for _ in 0..SIGN_MAX_ITERS {
        let lu = z.clone().lu();
        let log_det: f64 = lu.u().diagonal().iter().map(|v| v.abs().ln()).sum();
        let zinv = lu.try_inverse().ok_or_else(|| {
            Error::NoStabilizingSolution("Hamiltonian has eigenvalues on the imaginary axis".into())
        })?;
        let c = if scaling && log_det.is_finite() {
            (-log_det / dim as f64).exp()
        } else {
            1.0
        };
        let next = (&z * c + &zinv / c) * 0.5;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoStabilizingSolution("sign iteration overflow".into()));
        }
        let change = (&next - &z).norm();
        let size = next.norm();
        z = next;
        if change <= 1e-2 * size {
            scaling = false;
        }
        if change <= 1e-13 * size {
            return Ok(z);
        }
    }
    Err(Error::NoStabilizingSolution(
        "sign iteration did not converge (eigenvalues near the imaginary axis)".into(),
    ))
}

/// `A X + X Aᵀ + Q = 0` on the `n(n+1)/2` independent entries of a symmetric
/// `X`, with diagonal balancing and one step of iterative refinement. No
/// stability check: solvable whenever no two eigenvalues of `A` sum to zero.
fn lyapunov_any(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.rows();
    // C = D⁻¹ C̃ D⁻¹ with Ã = D A D⁻¹, Q̃ = D Q D.
    let d = balancing_scales(a.as_dmatrix());
    let mut at = a.0.clone();
    let mut qt = q.0.clone();
    for i in 0..n {
        for j in 0..n {
            at[(i, j)] *= d[i] / d[j];
            qt[(i, j)] *= d[i] * d[j];
        }
    }

    let m = n * (n + 1) / 2;
    let idx = |i: usize, j: usize| {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        lo * n - lo * (lo + 1) / 2 + hi
    };
    let mut lhs = DMatrix::zeros(m, m);
    for i in 0..n {
        for j in i..n {
            let row = idx(i, j);
            for k in 0..n {
                lhs[(row, idx(k, j))] += at[(i, k)];
                lhs[(row, idx(i, k))] += at[(j, k)];
            }
        }
    }
    let lu = lhs.lu();
    let unpack = |v: &nalgebra::DVector<f64>| {
        let mut c = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                c[(i, j)] = v[idx(i, j)];
            }
        }
        c
    };
    let pack = |mm: &DMatrix<f64>| {
        let mut v = nalgebra::DVector::zeros(m);
        for i in 0..n {
            for j in i..n {
                v[idx(i, j)] = -(mm[(i, j)] + mm[(j, i)]) * 0.5;
            }
        }
        v
    };

    let sol = lu.solve(&pack(&qt)).ok_or(Error::SingularInput)?;
    let mut c = unpack(&sol);
    let resid = &at * &c + &c * at.transpose() + &qt;
    if let Some(corr) = lu.solve(&pack(&resid)) {
        c += unpack(&corr);
    }
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] /= d[i] * d[j];
        }
    }
    Mat::from_dmatrix(c)
        .map(|c| c.symmetrize())
        .map_err(|_| Error::SingularInput)
}
