//! Small dense linear algebra, adaptive quadrature and central differences.
//!
//! Everything here works at the scale of a handful of rows and columns. The
//! decompositions (SVD, symmetric eigenvalues, LU) are delegated to
//! `nalgebra`; this module owns the thresholds and the contracts around them.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut, Mul};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-major dense real matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from fixed-size rows. Panics on non-finite input.
    pub fn from_rows<const C: usize>(rows: &[[f64; C]]) -> Self {
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        assert!(data.iter().all(|v| v.is_finite()), "non-finite entry");
        Self {
            rows: rows.len(),
            cols: C,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: c.len(),
                });
            }
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        if m.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference; `f64::INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest |m_ij - m_ji|; infinite for non-square input.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn determinant(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        Ok(self.to_nalgebra().determinant())
    }

    pub fn inverse(&self, tol: &Tolerance) -> Result<Self> {
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols.push(solve_square(self, &e, tol)?);
        }
        Self::from_columns(&cols)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    /// Panics on inner-dimension mismatch; use [`DenseMatrix::matmul`] to get an error instead.
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs).expect("inner dimensions must agree")
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Thresholds shared by the numerical routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative pivot / singular-value threshold.
    pub rank_tol: f64,
    /// Symmetry and closeness comparisons.
    pub sym_tol: f64,
    /// Absolute quadrature target.
    pub quad_tol: f64,
    /// First-derivative finite-difference step.
    pub fd_step: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            sym_tol: 1e-9,
            quad_tol: 1e-10,
            fd_step: 1e-6,
        }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, sym_tol: f64, quad_tol: f64, fd_step: f64) -> Result<Self> {
        let t = Self {
            rank_tol,
            sym_tol,
            quad_tol,
            fd_step,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rank_tol) {
            return Err(Error::InvalidTolerance("rank_tol"));
        }
        if !positive(self.sym_tol) {
            return Err(Error::InvalidTolerance("sym_tol"));
        }
        if !positive(self.quad_tol) {
            return Err(Error::InvalidTolerance("quad_tol"));
        }
        if !positive(self.fd_step) {
            return Err(Error::InvalidTolerance("fd_step"));
        }
        Ok(())
    }
}

/// Orthonormal basis of the numerical nullspace of `m`.
///
/// Singular values at or below `rank_tol * sigma_max` are treated as zero.
/// A zero matrix yields the standard basis of the column space.
pub fn nullspace(m: &DenseMatrix, tol: &Tolerance) -> Vec<Vec<f64>> {
    let n = m.cols();
    if n == 0 {
        return Vec::new();
    }
    // Pad with zero rows so the SVD returns a full right-singular basis.
    let rows = m.rows().max(n);
    let mut padded = DMatrix::<f64>::zeros(rows, n);
    for i in 0..m.rows() {
        for j in 0..n {
            padded[(i, j)] = m[(i, j)];
        }
    }
    let sigma_max = m.max_abs();
    if sigma_max == 0.0 {
        return (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();
    }
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let largest = svd.singular_values.iter().fold(0.0f64, |a, s| a.max(*s));
    let threshold = tol.rank_tol * largest;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= threshold)
        .map(|(k, _)| v_t.row(k).iter().copied().collect())
        .collect()
}

/// Inertia of a symmetric matrix: counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.positive + self.negative + self.zero
    }
}

pub fn symmetric_eigenvalues(sym: &DenseMatrix, tol: &Tolerance) -> Result<Vec<f64>> {
    let asym = sym.asymmetry();
    if asym > tol.sym_tol {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let eig = nalgebra::SymmetricEigen::new(sym.to_nalgebra());
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// Eigenvalue sign counts; |lambda| < rank_tol counts as zero.
pub fn signature(sym: &DenseMatrix, tol: &Tolerance) -> Result<Signature> {
    let eigenvalues = symmetric_eigenvalues(sym, tol)?;
    let mut sig = Signature {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for lambda in eigenvalues {
        if lambda.abs() < tol.rank_tol {
            sig.zero += 1;
        } else if lambda > 0.0 {
            sig.positive += 1;
        } else {
            sig.negative += 1;
        }
    }
    Ok(sig)
}

/// Solves `m x = rhs` by LU with partial pivoting.
///
/// Fails with [`Error::Singular`] when the smallest pivot is below
/// `rank_tol` times the largest one.
pub fn solve_square(m: &DenseMatrix, rhs: &[f64], tol: &Tolerance) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if rhs.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: rhs.len(),
        });
    }
    let lu = m.to_nalgebra().lu();
    let u = lu.u();
    let pivots: Vec<f64> = (0..m.rows()).map(|i| u[(i, i)].abs()).collect();
    let largest = pivots.iter().fold(0.0f64, |a, p| a.max(*p));
    let smallest = pivots.iter().fold(f64::INFINITY, |a, p| a.min(*p));
    if largest == 0.0 || smallest < tol.rank_tol * largest {
        return Err(Error::Singular);
    }
    let b = nalgebra::DVector::from_column_slice(rhs);
    let x = lu.solve(&b).ok_or(Error::Singular)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x.iter().copied().collect())
}

/// Total function-evaluation budget for [`quadrature`].
pub const QUADRATURE_BUDGET: usize = 1 << 20;
const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute accuracy `quad_tol`.
///
/// Reversed limits give the negated integral.
pub fn quadrature<F>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite);
    }
    if a == b {
        return Ok(0.0);
    }
    let mut state = SimpsonState { f: &f, evals: 0 };
    let fa = state.eval(a)?;
    let fb = state.eval(b)?;
    let m = 0.5 * (a + b);
    let fm = state.eval(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    state.refine(
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        tol.quad_tol,
        MAX_DEPTH,
    )
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

struct SimpsonState<'a, F> {
    f: &'a F,
    evals: usize,
}

impl<F: Fn(f64) -> f64> SimpsonState<'_, F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        self.evals += 1;
        if self.evals > QUADRATURE_BUDGET {
            return Err(Error::NoConvergence);
        }
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite)
        }
    }

    fn refine(&mut self, p: Panel, eps: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= 15.0 * eps {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::NoConvergence);
        }
        let l = self.refine(
            Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
            },
            0.5 * eps,
            depth - 1,
        )?;
        let r = self.refine(
            Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
            },
            0.5 * eps,
            depth - 1,
        )?;
        Ok(l + r)
    }
}

/// Central difference `(f(x+h) - f(x-h)) / 2h`.
pub fn fd_derivative<F>(f: F, x: f64, step: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    (f(x + step) - f(x - step)) / (2.0 * step)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn nullspace_of_identity_is_empty() {
        assert!(nullspace(&DenseMatrix::identity(4), &tol()).is_empty());
    }

    #[test]
    fn nullspace_of_zero_matrix_spans_everything() {
        let ns = nullspace(&DenseMatrix::zeros(2, 2), &tol());
        assert_eq!(ns.len(), 2);
        assert!((dot(&ns[0], &ns[1])).abs() < 1e-15);
        for v in &ns {
            assert!((norm(v) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        // x + y + z = 0 has a 2-dimensional solution space.
        let m = DenseMatrix::from_rows(&[[1.0, 1.0, 1.0]]);
        let ns = nullspace(&m, &tol());
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(m.mul_vec(v).unwrap()[0].abs() < 1e-12);
        }
    }

    #[test]
    fn signature_examples() {
        let t = tol();
        let mink = DenseMatrix::diagonal(&[1.0, -1.0, -1.0, -1.0]);
        let s = signature(&mink, &t).unwrap();
        assert_eq!((s.positive, s.negative, s.zero), (1, 3, 0));
        let s = signature(&DenseMatrix::identity(4), &t).unwrap();
        assert_eq!((s.positive, s.negative, s.zero), (4, 0, 0));
        let s = signature(&DenseMatrix::diagonal(&[2.0, 0.0, -3.0, -3.0]), &t).unwrap();
        assert_eq!((s.positive, s.negative, s.zero), (1, 2, 1));
    }

    #[test]
    fn signature_rejects_asymmetric_input() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(
            signature(&m, &tol()),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn solve_small_systems() {
        let t = tol();
        let x = solve_square(&DenseMatrix::identity(4), &[1.0, 2.0, 3.0, 4.0], &t).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0]);
        let x = solve_square(&DenseMatrix::diagonal(&[2.0, 2.0]), &[2.0, 4.0], &t).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn solve_rejects_singular_and_nonsquare() {
        let t = tol();
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert_eq!(solve_square(&m, &[1.0, 1.0], &t), Err(Error::Singular));
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            solve_square(&m, &[1.0, 1.0], &t),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quadrature_examples() {
        let t = tol();
        assert!((quadrature(|_| 1.0, 0.0, 1.0, &t).unwrap() - 1.0).abs() < 1e-14);
        assert!((quadrature(|x| x, 0.0, 1.0, &t).unwrap() - 0.5).abs() < 1e-14);
        let e = quadrature(libm::exp, 0.0, 1.0, &t).unwrap();
        assert!((e - (core::f64::consts::E - 1.0)).abs() < 1e-10);
        // reversed limits
        let r = quadrature(libm::exp, 1.0, 0.0, &t).unwrap();
        assert!((r + e).abs() < 1e-14);
    }

    #[test]
    fn quadrature_reports_non_convergence() {
        // 1/sqrt|x| has an integrable singularity that Simpson cannot resolve to 1e-10.
        let f = |x: f64| {
            if x == 0.0 {
                1e300
            } else {
                1.0 / libm::sqrt(x.abs())
            }
        };
        let err = quadrature(f, -1.0, 1.0, &tol()).unwrap_err();
        assert!(matches!(err, Error::NoConvergence | Error::NonFinite));
    }

    #[test]
    fn fd_examples() {
        assert_eq!(fd_derivative(|_| 3.0, 1.5, 1e-5), 0.0);
        assert!((fd_derivative(|x| x * x, 3.0, 1e-5) - 6.0).abs() < 1e-8);
        assert!((fd_derivative(libm::exp, 0.0, 1e-5) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(Tolerance::new(1e-10, 1e-9, 1e-10, 1e-6).is_ok());
        assert_eq!(
            Tolerance::new(0.0, 1e-9, 1e-10, 1e-6),
            Err(Error::InvalidTolerance("rank_tol"))
        );
        assert_eq!(
            Tolerance::new(1e-10, 1e-9, -1.0, 1e-6),
            Err(Error::InvalidTolerance("quad_tol"))
        );
    }

    #[test]
    fn matrix_construction_checks_shape_and_finiteness() {
        assert!(matches!(
            DenseMatrix::from_row_major(2, 2, vec![1.0; 3]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert_eq!(
            DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite)
        );
    }
}
