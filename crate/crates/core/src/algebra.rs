//! Finite-dimensional real algebras given by their structure tensor.
//!
//! The product of two elements is the contraction `c^i = A^i_{jk} a^j b^k`,
//! with the upper index selecting the output component and the two lower
//! indices the left and right factors.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::numeric::{self, DenseMatrix, Tolerance};

/// Dense `n x n x n` array of structure constants `A^i_{jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensor {
    dim: usize,
    components: Vec<f64>,
}

impl StructureTensor {
    /// `components` is laid out as `[i][j][k]`, flattened row-major.
    pub fn new(dim: usize, components: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if components.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                found: components.len(),
            });
        }
        if components.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, components })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            components: vec![0.0; dim * dim * dim],
        }
    }

    /// Builds the tensor from `n` slices `A^i`, each an `n x n` matrix indexed `[j][k]`.
    pub fn from_slices(slices: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = slices.len();
        let mut components = Vec::with_capacity(n * n * n);
        for slice in slices {
            if slice.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: slice.len(),
                });
            }
            for row in slice {
                if row.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: row.len(),
                    });
                }
                components.extend_from_slice(row);
            }
        }
        Self::new(n, components)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim;
        self.components[(i * n + j) * n + k]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.dim;
        self.components[(i * n + j) * n + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.components
    }

    /// The `n x n` matrix `A^i_{jk}` for fixed output index `i`.
    pub fn slice(&self, i: usize) -> DenseMatrix {
        let n = self.dim;
        let start = i * n * n;
        DenseMatrix::from_row_major(n, n, self.components[start..start + n * n].to_vec())
            .expect("components are finite")
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.dim).map(|i| self.slice(i).to_nested()).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Components in a new basis.
    ///
    /// `transition` holds the new basis vectors as columns, expressed in the
    /// current basis: `A'^i_{jk} = (M^-1)^i_l A^l_{pq} M^p_j M^q_k`.
    pub fn change_basis(&self, transition: &DenseMatrix, tol: &Tolerance) -> Result<Self> {
        let n = self.dim;
        if transition.rows() != n || transition.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: transition.rows(),
            });
        }
        let inv = transition.inverse(tol)?;
        // Lower the two covariant slots first, then the contravariant one.
        let mut lowered = Self::zeros(n);
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for p in 0..n {
                        let mpj = transition[(p, j)];
                        if mpj == 0.0 {
                            continue;
                        }
                        for q in 0..n {
                            acc += self.get(l, p, q) * mpj * transition[(q, k)];
                        }
                    }
                    lowered.set(l, j, k, acc);
                }
            }
        }
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let acc = (0..n).map(|l| inv[(i, l)] * lowered.get(l, j, k)).sum();
                    out.set(i, j, k, acc);
                }
            }
        }
        Ok(out)
    }
}

/// Coefficients of an algebra element in the algebra's basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement(Vec<f64>);

impl AlgebraElement {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// The `index`-th basis vector.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }

    pub fn norm(&self) -> f64 {
        numeric::norm(&self.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl From<Vec<f64>> for AlgebraElement {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[f64; N]> for AlgebraElement {
    fn from(v: [f64; N]) -> Self {
        Self(v.to_vec())
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;

    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        AlgebraElement(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;

    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        AlgebraElement(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        AlgebraElement(self.0.iter().map(|v| -v).collect())
    }
}

/// Whether the algebra carries the quaternion conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraKind {
    Generic,
    Quaternion,
}

/// A real algebra: structure tensor, basis labels and (when it exists) the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Algebra {
    tensor: StructureTensor,
    basis_labels: Vec<String>,
    identity: Option<AlgebraElement>,
    kind: AlgebraKind,
}

impl Algebra {
    /// Builds a generic algebra and solves for its identity.
    pub fn new(tensor: StructureTensor, basis_labels: Vec<String>) -> Result<Self> {
        if basis_labels.len() != tensor.dim() {
            return Err(Error::DimensionMismatch {
                expected: tensor.dim(),
                found: basis_labels.len(),
            });
        }
        let mut alg = Self {
            tensor,
            basis_labels,
            identity: None,
            kind: AlgebraKind::Generic,
        };
        alg.identity = alg.find_identity();
        Ok(alg)
    }

    /// Builds an algebra with labels `e0, e1, ...`.
    pub fn from_tensor(tensor: StructureTensor) -> Self {
        let labels = (0..tensor.dim()).map(|i| alloc::format!("e{i}")).collect();
        Self::new(tensor, labels).expect("label count matches dimension")
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn tensor(&self) -> &StructureTensor {
        &self.tensor
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    /// The cached identity element, if the algebra has one.
    pub fn identity(&self) -> Option<&AlgebraElement> {
        self.identity.as_ref()
    }

    pub fn is_unital(&self) -> bool {
        self.identity.is_some() && self.is_associative_within(Tolerance::default().sym_tol)
    }

    fn check_dim(&self, a: &AlgebraElement) -> Result<()> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.dim(),
            });
        }
        Ok(())
    }

    /// `c^i = A^i_{jk} a^j b^k`.
    pub fn multiply(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, aj) in a.coords().iter().enumerate() {
                for (k, bk) in b.coords().iter().enumerate() {
                    acc += self.tensor.get(i, j, k) * aj * bk;
                }
            }
            *slot = acc;
        }
        Ok(AlgebraElement(out))
    }

    /// Matrix of `x -> a x`, acting on coordinate columns.
    pub fn left_multiplication(&self, a: &AlgebraElement) -> Result<DenseMatrix> {
        self.check_dim(a)?;
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                m[(i, k)] = (0..n)
                    .map(|j| self.tensor.get(i, j, k) * a.coords()[j])
                    .sum();
            }
        }
        Ok(m)
    }

    /// Matrix of `x -> x a`.
    pub fn right_multiplication(&self, a: &AlgebraElement) -> Result<DenseMatrix> {
        self.check_dim(a)?;
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = (0..n)
                    .map(|k| self.tensor.get(i, j, k) * a.coords()[k])
                    .sum();
            }
        }
        Ok(m)
    }

    /// Solves `e b = b e = b` for every basis vector `b` at default tolerances.
    pub fn find_identity(&self) -> Option<AlgebraElement> {
        self.find_identity_with(&Tolerance::default())
    }

    /// Stacks the `2 n^2` identity conditions and solves them in the
    /// least-squares sense; the candidate is accepted only if every
    /// condition holds within `rank_tol` (scaled by the tensor magnitude).
    pub fn find_identity_with(&self, tol: &Tolerance) -> Option<AlgebraElement> {
        let n = self.dim();
        let rows = 2 * n * n;
        let mut system = nalgebra::DMatrix::<f64>::zeros(rows, n);
        let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
        for m in 0..n {
            for i in 0..n {
                let r = m * n + i;
                let target = if i == m { 1.0 } else { 0.0 };
                for j in 0..n {
                    // (e b_m)^i = A^i_{j m} e^j
                    system[(r, j)] = self.tensor.get(i, j, m);
                    // (b_m e)^i = A^i_{m j} e^j
                    system[(n * n + r, j)] = self.tensor.get(i, m, j);
                }
                rhs[r] = target;
                rhs[n * n + r] = target;
            }
        }
        let svd = system.clone().svd(true, true);
        let largest = svd.singular_values.iter().fold(0.0f64, |a, s| a.max(*s));
        if largest == 0.0 {
            return None;
        }
        let x = svd.solve(&rhs, tol.rank_tol * largest).ok()?;
        let residual = (&system * &x - &rhs).amax();
        let scale = 1.0f64.max(
            self.tensor
                .as_slice()
                .iter()
                .fold(0.0, |m, v| m.max(v.abs())),
        );
        if residual <= tol.rank_tol * scale {
            Some(AlgebraElement(x.iter().copied().collect()))
        } else {
            None
        }
    }

    /// Exact test of `A^m_{ij} A^l_{mk} = A^l_{im} A^m_{jk}` for all `i, j, k, l`.
    pub fn is_associative(&self) -> bool {
        self.max_associator() == 0.0
    }

    /// Associativity up to an absolute tolerance, for algebras whose
    /// constants went through floating-point transformations.
    pub fn is_associative_within(&self, tol: f64) -> bool {
        self.max_associator() <= tol
    }

    /// Largest entry of the associator tensor `(ab)c - a(bc)` on basis triples.
    pub fn max_associator(&self) -> f64 {
        let n = self.dim();
        let t = &self.tensor;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut left = 0.0;
                        let mut right = 0.0;
                        for m in 0..n {
                            left += t.get(m, i, j) * t.get(l, m, k);
                            right += t.get(l, i, m) * t.get(m, j, k);
                        }
                        worst = worst.max((left - right).abs());
                    }
                }
            }
        }
        worst
    }

    /// The commutator algebra with constants `A^i_{jk} - A^i_{kj}`.
    pub fn commutator_algebra(&self) -> Algebra {
        let n = self.dim();
        let mut t = StructureTensor::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t.set(i, j, k, self.tensor.get(i, j, k) - self.tensor.get(i, k, j));
                }
            }
        }
        Algebra::new(t, self.basis_labels.clone()).expect("labels already validated")
    }

    /// Quaternion conjugate: real part kept, imaginary part negated.
    pub fn conjugate(&self, q: &AlgebraElement) -> Result<AlgebraElement> {
        if self.kind != AlgebraKind::Quaternion {
            return Err(Error::NoConjugation);
        }
        self.check_dim(q)?;
        let c = q.coords();
        Ok(AlgebraElement(vec![c[0], -c[1], -c[2], -c[3]]))
    }

    /// Two-sided inverse, or `None` when `a` is not a unit.
    pub fn inverse(&self, a: &AlgebraElement) -> Result<Option<AlgebraElement>> {
        self.inverse_with(a, &Tolerance::default())
    }

    pub fn inverse_with(
        &self,
        a: &AlgebraElement,
        tol: &Tolerance,
    ) -> Result<Option<AlgebraElement>> {
        self.check_dim(a)?;
        let one = self.identity.as_ref().ok_or(Error::NotUnital)?;
        if a.coords().iter().all(|v| *v == 0.0) {
            return Ok(None);
        }
        let left = self.left_multiplication(a)?;
        let x = match numeric::solve_square(&left, one.coords(), tol) {
            Ok(x) => AlgebraElement(x),
            Err(Error::Singular) => return Ok(None),
            Err(e) => return Err(e),
        };
        let scale = 1.0f64.max(a.norm() * x.norm());
        let ax = self.multiply(a, &x)?;
        let xa = self.multiply(&x, a)?;
        if ax.max_abs_diff(one) <= tol.rank_tol * scale
            && xa.max_abs_diff(one) <= tol.rank_tol * scale
        {
            Ok(Some(x))
        } else {
            Ok(None)
        }
    }

    /// Re-expresses a 4-dimensional algebra in the basis obtained by
    /// rotating the last three basis vectors with `rotation`.
    pub fn rotate_canonical_basis(&self, rotation: &DenseMatrix) -> Result<Algebra> {
        self.rotate_canonical_basis_with(rotation, &Tolerance::default())
    }

    pub fn rotate_canonical_basis_with(
        &self,
        rotation: &DenseMatrix,
        tol: &Tolerance,
    ) -> Result<Algebra> {
        if self.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: self.dim(),
            });
        }
        if rotation.rows() != 3 || rotation.cols() != 3 {
            return Err(Error::NotSO3);
        }
        let gram = rotation.transpose().matmul(rotation)?;
        if gram.max_abs_diff(&DenseMatrix::identity(3)) > tol.sym_tol {
            return Err(Error::NotSO3);
        }
        if (rotation.determinant()? - 1.0).abs() > tol.sym_tol {
            return Err(Error::NotSO3);
        }
        let mut transition = DenseMatrix::identity(4);
        for r in 0..3 {
            for c in 0..3 {
                transition[(r + 1, c + 1)] = rotation[(r, c)];
            }
        }
        let tensor = self.tensor.change_basis(&transition, tol)?;
        let mut alg = Algebra::new(tensor, self.basis_labels.clone())?;
        alg.kind = self.kind;
        Ok(alg)
    }
}

/// Quaternion structure constants in a canonical basis `(1, i, j, k)`.
///
/// Each block is the matrix `H^i_{ab}` for one output component `i`.
pub const QUATERNION_CONSTANTS: [[[f64; 4]; 4]; 4] = [
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ],
    [
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ],
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ],
    [
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ],
];

pub fn quaternion_tensor() -> StructureTensor {
    let components = QUATERNION_CONSTANTS
        .iter()
        .flat_map(|slice| slice.iter().flat_map(|row| row.iter().copied()))
        .collect();
    StructureTensor::new(4, components).expect("64 finite constants")
}

/// The quaternion algebra in its canonical basis, identity `(1, 0, 0, 0)`.
pub fn quaternion_algebra() -> Algebra {
    let labels = ["1", "i", "j", "k"].iter().map(|s| s.to_string()).collect();
    let mut alg = Algebra::new(quaternion_tensor(), labels).expect("dimension 4");
    alg.kind = AlgebraKind::Quaternion;
    // The least-squares solve agrees to roundoff; store the exact basis vector.
    alg.identity = Some(AlgebraElement::basis(4, 0));
    alg
}
