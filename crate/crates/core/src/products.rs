//! Principal inner products: one-forms whose contraction with the
//! structure tensor is symmetric, and the bilinear forms they produce.

use alloc::vec::Vec;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::numeric::{self, DenseMatrix, Signature, Tolerance};

/// Orthonormal basis of the admissible one-forms.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorSpan {
    pub dim_ambient: usize,
    pub basis: Vec<Vec<f64>>,
}

impl CovectorSpan {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Distance of `tau` from the span (Euclidean, in dual components).
    pub fn distance(&self, tau: &[f64]) -> f64 {
        let mut residual = tau.to_vec();
        for b in &self.basis {
            let c = numeric::dot(tau, b);
            for (r, bi) in residual.iter_mut().zip(b) {
                *r -= c * bi;
            }
        }
        numeric::norm(&residual)
    }
}

/// A symmetric contraction together with its inertia.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProduct {
    pub matrix: DenseMatrix,
    pub signature: Signature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Riemannian,
    Lorentzian,
    Degenerate,
    Other,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Riemannian => "riemannian",
            Classification::Lorentzian => "lorentzian",
            Classification::Degenerate => "degenerate",
            Classification::Other => "other",
        }
    }
}

/// Rows indexed by pairs `j < k` (lexicographic), columns by `i`;
/// entry `A^i_{jk} - A^i_{kj}`.
pub fn constraint_matrix(alg: &Algebra) -> DenseMatrix {
    let n = alg.dim();
    let t = alg.tensor();
    let pairs = n * (n - 1) / 2;
    let mut m = DenseMatrix::zeros(pairs, n);
    let mut row = 0;
    for j in 0..n {
        for k in (j + 1)..n {
            for i in 0..n {
                m[(row, i)] = t.get(i, j, k) - t.get(i, k, j);
            }
            row += 1;
        }
    }
    m
}

/// The space of one-forms yielding symmetric contractions.
///
/// Each basis covector is sign-normalized so that its first component
/// above `rank_tol` is positive.
pub fn principal_space(alg: &Algebra, tol: &Tolerance) -> CovectorSpan {
    let n = alg.dim();
    let constraints = constraint_matrix(alg);
    let basis = if constraints.rows() == 0 {
        // dimension 1: no pairs, every one-form is admissible
        (0..n)
            .map(|j| {
                let mut e = alloc::vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect()
    } else {
        numeric::nullspace(&constraints, tol)
    };
    let basis = basis
        .into_iter()
        .map(|mut v| {
            if let Some(lead) = v.iter().find(|c| c.abs() > tol.rank_tol) {
                if *lead < 0.0 {
                    v.iter_mut().for_each(|c| *c = -*c);
                }
            }
            v
        })
        .collect();
    CovectorSpan {
        dim_ambient: n,
        basis,
    }
}

/// `G_{jk} = tau_i A^i_{jk}`, symmetric or not.
pub fn contraction_matrix(alg: &Algebra, tau: &[f64]) -> Result<DenseMatrix> {
    let n = alg.dim();
    if tau.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: tau.len(),
        });
    }
    let t = alg.tensor();
    let mut g = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let mut acc = 0.0;
            for (i, ti) in tau.iter().enumerate() {
                acc += ti * t.get(i, j, k);
            }
            g[(j, k)] = acc;
        }
    }
    Ok(g)
}

/// Contracts `tau` with the structure tensor; fails with
/// [`Error::NotInPrincipalSpace`] if the result is not symmetric within `sym_tol`.
pub fn contract(alg: &Algebra, tau: &[f64], tol: &Tolerance) -> Result<InnerProduct> {
    let matrix = contraction_matrix(alg, tau)?;
    let asymmetry = matrix.asymmetry();
    if asymmetry > tol.sym_tol {
        return Err(Error::NotInPrincipalSpace { asymmetry });
    }
    let signature = numeric::signature(&matrix, tol)?;
    Ok(InnerProduct { matrix, signature })
}

pub fn classify(ip: &InnerProduct) -> Classification {
    classify_signature(&ip.signature)
}

pub fn classify_signature(sig: &Signature) -> Classification {
    let n = sig.dim();
    let (p, q) = (sig.positive, sig.negative);
    if sig.zero > 0 {
        Classification::Degenerate
    } else if p == n || q == n {
        Classification::Riemannian
    } else if (p == 1 && q == n - 1) || (q == 1 && p == n - 1) {
        Classification::Lorentzian
    } else {
        Classification::Other
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{quaternion_algebra, StructureTensor};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn complex() -> Algebra {
        let slices = alloc::vec![
            alloc::vec![alloc::vec![1.0, 0.0], alloc::vec![0.0, -1.0]],
            alloc::vec![alloc::vec![0.0, 1.0], alloc::vec![1.0, 0.0]],
        ];
        Algebra::from_tensor(StructureTensor::from_slices(&slices).unwrap())
    }

    #[test]
    fn constraint_matrix_shapes() {
        let c = constraint_matrix(&complex());
        assert_eq!((c.rows(), c.cols()), (1, 2));
        assert_eq!(c.max_abs(), 0.0);
        let q = constraint_matrix(&quaternion_algebra());
        assert_eq!((q.rows(), q.cols()), (6, 4));
        // first column (the real component) is identically zero
        assert!(q.column(0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn quaternion_principal_space() {
        let span = principal_space(&quaternion_algebra(), &tol());
        assert_eq!(span.dim(), 1);
        let g = &span.basis[0];
        assert!((g[0] - 1.0).abs() < 1e-10);
        assert!(g[1..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn complex_principal_space_is_everything() {
        let span = principal_space(&complex(), &tol());
        assert_eq!(span.dim(), 2);
        assert!(span.distance(&[0.3, -2.0]) < 1e-12);
    }

    #[test]
    fn commutator_algebra_principal_space() {
        // Products are antisymmetric, so only tau killing every commutator works.
        let c = quaternion_algebra().commutator_algebra();
        let span = principal_space(&c, &tol());
        assert_eq!(span.dim(), 1);
        for tau in &span.basis {
            let g = contraction_matrix(&c, tau).unwrap();
            assert!(g.asymmetry() < 1e-12);
        }
    }

    #[test]
    fn quaternion_contractions() {
        let h = quaternion_algebra();
        let ip = contract(&h, &[2.5, 0.0, 0.0, 0.0], &tol()).unwrap();
        assert_eq!(ip.matrix, DenseMatrix::diagonal(&[2.5, -2.5, -2.5, -2.5]));
        assert_eq!(classify(&ip), Classification::Lorentzian);

        let zero = contract(&h, &[0.0; 4], &tol()).unwrap();
        assert_eq!(zero.signature.zero, 4);
        assert_eq!(classify(&zero), Classification::Degenerate);

        let (a, b, c, d) = (1.0, 2.0, 3.0, 4.0);
        let g = contraction_matrix(&h, &[a, b, c, d]).unwrap();
        let expected =
            DenseMatrix::from_rows(&[[a, b, c, d], [b, -a, d, -c], [c, -d, -a, b], [d, c, -b, -a]]);
        assert_eq!(g, expected);
        assert!(matches!(
            contract(&h, &[a, b, c, d], &tol()),
            Err(Error::NotInPrincipalSpace { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        let t = tol();
        let ip = |d: &[f64]| {
            let m = DenseMatrix::diagonal(d);
            InnerProduct {
                signature: numeric::signature(&m, &t).unwrap(),
                matrix: m,
            }
        };
        assert_eq!(
            classify(&ip(&[1.0, -1.0, -1.0, -1.0])),
            Classification::Lorentzian
        );
        assert_eq!(
            classify(&ip(&[-1.0, 1.0, 1.0, 1.0])),
            Classification::Lorentzian
        );
        assert_eq!(classify(&ip(&[0.0; 4])), Classification::Degenerate);
        assert_eq!(classify(&ip(&[1.0, 2.0, 3.0])), Classification::Riemannian);
        assert_eq!(
            classify(&ip(&[1.0, 1.0, -1.0, -1.0])),
            Classification::Other
        );
    }
}
