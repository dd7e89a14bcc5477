//! Builtin algebras.
//!
//! | name            | basis                  | products                              |
//! |-----------------|------------------------|---------------------------------------|
//! | `quaternion`    | 1, i, j, k             | i² = j² = k² = ijk = −1               |
//! | `complex`       | 1, i                   | i² = −1                               |
//! | `split-complex` | 1, j                   | j² = +1                               |
//! | `dual`          | 1, e                   | e² = 0                                |
//! | `matrix2`       | E11, E12, E21, E22     | E_ab E_cd = δ_bc E_ad                 |

use quatmetric_core::algebra::{quaternion_algebra, Algebra, StructureTensor};

pub const BUILTIN_NAMES: [&str; 5] = ["quaternion", "complex", "split-complex", "dual", "matrix2"];

fn two_dim(label: &str, square: f64) -> Algebra {
    // (a + b u)(c + d u) = (ac + square bd) + (ad + bc) u
    let components = vec![1.0, 0.0, 0.0, square, 0.0, 1.0, 1.0, 0.0];
    let tensor = StructureTensor::new(2, components).expect("valid 2-dim table");
    Algebra::new(tensor, vec!["1".into(), label.into()]).expect("labels match")
}

fn matrix2() -> Algebra {
    // basis index 2a + b for E_(a+1)(b+1)
    let mut components = vec![0.0; 64];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    if b == c {
                        let (i, j, k) = (2 * a + d, 2 * a + b, 2 * c + d);
                        components[(i * 4 + j) * 4 + k] = 1.0;
                    }
                }
            }
        }
    }
    let tensor = StructureTensor::new(4, components).expect("valid 4-dim table");
    let labels = ["E11", "E12", "E21", "E22"].map(String::from).to_vec();
    Algebra::new(tensor, labels).expect("labels match")
}

pub fn builtin(name: &str) -> Option<Algebra> {
    match name {
        "quaternion" => Some(quaternion_algebra()),
        "complex" => Some(two_dim("i", -1.0)),
        "split-complex" => Some(two_dim("j", 1.0)),
        "dual" => Some(two_dim("e", 0.0)),
        "matrix2" => Some(matrix2()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use quatmetric_core::algebra::AlgebraElement;

    #[test]
    fn every_builtin_is_unital() {
        for name in BUILTIN_NAMES {
            let alg = builtin(name).unwrap();
            assert!(alg.is_unital(), "{name}");
        }
        assert!(builtin("octonion").is_none());
    }

    #[test]
    fn two_dim_squares() {
        let u = AlgebraElement::basis(2, 1);
        for (name, sq) in [("complex", -1.0), ("split-complex", 1.0), ("dual", 0.0)] {
            let alg = builtin(name).unwrap();
            assert_eq!(alg.multiply(&u, &u).unwrap().coords(), &[sq, 0.0]);
        }
    }

    #[test]
    fn matrix_units_multiply() {
        let alg = builtin("matrix2").unwrap();
        let e = |i| AlgebraElement::basis(4, i);
        // E12 E21 = E11, E21 E12 = E22, E12 E12 = 0
        assert_eq!(alg.multiply(&e(1), &e(2)).unwrap(), e(0));
        assert_eq!(alg.multiply(&e(2), &e(1)).unwrap(), e(3));
        assert_eq!(alg.multiply(&e(1), &e(1)).unwrap(), AlgebraElement::zero(4));
        let one = AlgebraElement::from([1.0, 0.0, 0.0, 1.0]);
        assert!(alg.identity().unwrap().max_abs_diff(&one) < 1e-12);
    }
}
