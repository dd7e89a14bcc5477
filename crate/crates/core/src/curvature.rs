//! Finite-difference Levi-Civita connection and curvature.
//!
//! Metric derivatives are central differences with step `h`; derivatives of
//! the Christoffel symbols difference Christoffels evaluated at `x +- h`.
//! Conventions:
//!
//! ```text
//! Gamma^a_{bc} = 1/2 g^{ad} (d_b g_{dc} + d_c g_{db} - d_d g_{bc})
//! R^a_{bcd}    = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
//!                + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
//! R_{bd}       = R^a_{bad}
//! ```

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use libm::sin;

use crate::error::{Error, Result};
use crate::metric::{metric_spherical, TauProfile};
use crate::numeric::{DenseMatrix, Tolerance};
use crate::unit_group::{RadialProfile, SphericalPoint};

/// Default finite-difference step for curvature.
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-3;
/// Curvature points must keep `sin chi` and `sin theta` at least this large.
pub const CURVATURE_BAND: f64 = 0.1;
/// Relative accuracy and absolute spread required of a spatial slice.
pub const SLICE_TOLERANCE: f64 = 1e-3;

type MetricFn = Arc<dyn Fn(&[f64]) -> Result<DenseMatrix> + Send + Sync>;

/// A metric given as a function of coordinates.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    eval: MetricFn,
    labels: Vec<String>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("labels", &self.labels)
            .finish()
    }
}

impl MetricField {
    pub fn new<F>(labels: Vec<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<DenseMatrix> + Send + Sync + 'static,
    {
        Self {
            dim: labels.len(),
            eval: Arc::new(eval),
            labels,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn eval(&self, x: &[f64]) -> Result<DenseMatrix> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let g = (self.eval)(x)?;
        if g.rows() != self.dim || g.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: g.rows(),
            });
        }
        Ok(g)
    }

    fn shifted(&self, x: &[f64], axis: usize, delta: f64) -> Result<DenseMatrix> {
        let mut y = x.to_vec();
        y[axis] += delta;
        self.eval(&y)
    }
}

/// Christoffel symbols `Gamma^a_{bc}` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        let n = self.dim;
        self.data[(a * n + b) * n + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Riemann tensor `R^a_{bcd}` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    dim: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim;
        self.data[((a * n + b) * n + c) * n + d]
    }

    /// Largest `|R^a_{bcd} + R^a_{bdc}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        worst = worst.max((self.get(a, b, c, d) + self.get(a, b, d, c)).abs());
                    }
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub christoffels: Christoffel,
    pub riemann: Riemann,
    pub ricci: DenseMatrix,
    pub scalar: f64,
}

fn invert_metric(g: &DenseMatrix, tol: &Tolerance) -> Result<DenseMatrix> {
    g.inverse(tol).map_err(|e| match e {
        Error::Singular => Error::SingularMetric,
        other => other,
    })
}

pub fn christoffel(mf: &MetricField, x: &[f64], h: f64, tol: &Tolerance) -> Result<Christoffel> {
    let n = mf.dim();
    let g = mf.eval(x)?;
    let ginv = invert_metric(&g, tol)?;
    // dg[c] = d_c g
    let mut dg = Vec::with_capacity(n);
    for c in 0..n {
        let plus = mf.shifted(x, c, h)?;
        let minus = mf.shifted(x, c, -h)?;
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                d[(i, j)] = (plus[(i, j)] - minus[(i, j)]) / (2.0 * h);
            }
        }
        dg.push(d);
    }
    let mut data = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let mut acc = 0.0;
                for d in 0..n {
                    acc += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                let v = 0.5 * acc;
                data[(a * n + b) * n + c] = v;
                data[(a * n + c) * n + b] = v;
            }
        }
    }
    Ok(Christoffel { dim: n, data })
}

pub fn riemann(mf: &MetricField, x: &[f64], h: f64, tol: &Tolerance) -> Result<Riemann> {
    let n = mf.dim();
    let gamma = christoffel(mf, x, h, tol)?;
    // dgamma[c] = d_c Gamma
    let mut dgamma = Vec::with_capacity(n);
    for c in 0..n {
        let mut y = x.to_vec();
        y[c] = x[c] + h;
        let plus = christoffel(mf, &y, h, tol)?;
        y[c] = x[c] - h;
        let minus = christoffel(mf, &y, h, tol)?;
        let d: Vec<f64> = plus
            .data
            .iter()
            .zip(&minus.data)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        dgamma.push(Christoffel { dim: n, data: d });
    }
    let mut data = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dgamma[c].get(a, d, b) - dgamma[d].get(a, c, b);
                    for e in 0..n {
                        v += gamma.get(a, c, e) * gamma.get(e, d, b)
                            - gamma.get(a, d, e) * gamma.get(e, c, b);
                    }
                    data[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    Ok(Riemann { dim: n, data })
}

pub fn curvature_report(
    mf: &MetricField,
    x: &[f64],
    h: f64,
    tol: &Tolerance,
) -> Result<CurvatureReport> {
    let n = mf.dim();
    let christoffels = christoffel(mf, x, h, tol)?;
    let riemann = riemann(mf, x, h, tol)?;
    let mut ricci = DenseMatrix::zeros(n, n);
    for b in 0..n {
        for d in 0..n {
            ricci[(b, d)] = (0..n).map(|a| riemann.get(a, b, a, d)).sum();
        }
    }
    let ginv = invert_metric(&mf.eval(x)?, tol)?;
    let mut scalar = 0.0;
    for b in 0..n {
        for d in 0..n {
            scalar += ginv[(b, d)] * ricci[(b, d)];
        }
    }
    Ok(CurvatureReport {
        christoffels,
        riemann,
        ricci,
        scalar,
    })
}

/// Scalar curvature with a single step `h`; error `O(h^2)`.
pub fn scalar_curvature_at_step(
    mf: &MetricField,
    x: &[f64],
    h: f64,
    tol: &Tolerance,
) -> Result<f64> {
    Ok(curvature_report(mf, x, h, tol)?.scalar)
}

/// Scalar curvature, Richardson-extrapolated from steps `h` and `h/2`.
pub fn scalar_curvature(mf: &MetricField, x: &[f64], h: f64, tol: &Tolerance) -> Result<f64> {
    let coarse = scalar_curvature_at_step(mf, x, h, tol)?;
    let fine = scalar_curvature_at_step(mf, x, 0.5 * h, tol)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Induced metric on the slice `eta = const` in coordinates `(chi, theta, phi)`,
/// sign-flipped to be positive definite.
pub fn spatial_slice_metric(tp: &TauProfile, eta: f64) -> Result<MetricField> {
    tp.eval_checked(eta)?;
    let flip = -tp.sign().factor();
    // The spatial block does not depend on the radial profile.
    let prof = RadialProfile::exponential();
    let tp = tp.clone();
    let labels = ["chi", "theta", "phi"].map(String::from).to_vec();
    Ok(MetricField::new(labels, move |x: &[f64]| {
        let p = SphericalPoint::new(eta, x[0], x[1], x[2]);
        let g = metric_spherical(&p, &tp, &prof)?.g;
        let mut s = DenseMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                s[(i, j)] = flip * g[(i + 1, j + 1)];
            }
        }
        Ok(s)
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceReport {
    pub eta: f64,
    pub scale_factor: f64,
    /// `6 / a^2`, the scalar curvature of a round 3-sphere of radius `a`.
    pub expected: f64,
    pub points: Vec<[f64; 3]>,
    pub scalars: Vec<f64>,
    pub max_rel_error: f64,
    /// `max - min` of the scalar curvature over the points.
    pub spread: f64,
    pub pass: bool,
}

/// Computes the slice scalar curvature at each `(chi, theta, phi)` and
/// checks it against `6 / a(eta)^2` and for constancy.
pub fn spatial_slice_check(
    tp: &TauProfile,
    eta: f64,
    points: &[[f64; 3]],
    h: f64,
    tol: &Tolerance,
) -> Result<SliceReport> {
    for p in points {
        if sin(p[0]).abs() < CURVATURE_BAND {
            return Err(Error::ChartSingularity("sin chi below the curvature band"));
        }
        if sin(p[1]).abs() < CURVATURE_BAND {
            return Err(Error::ChartSingularity(
                "sin theta below the curvature band",
            ));
        }
    }
    let mf = spatial_slice_metric(tp, eta)?;
    let a = tp.scale_factor().eval(eta);
    let expected = 6.0 / (a * a);
    let mut scalars = Vec::with_capacity(points.len());
    for p in points {
        scalars.push(scalar_curvature(&mf, p, h, tol)?);
    }
    let max_rel_error = scalars
        .iter()
        .fold(0.0f64, |m, s| m.max((s - expected).abs() / expected));
    let (lo, hi) = scalars
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(*s), hi.max(*s))
        });
    let spread = if scalars.is_empty() { 0.0 } else { hi - lo };
    let pass = !scalars.is_empty() && max_rel_error < SLICE_TOLERANCE && spread < SLICE_TOLERANCE;
    Ok(SliceReport {
        eta,
        scale_factor: a,
        expected,
        points: points.to_vec(),
        scalars,
        max_rel_error,
        spread,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use libm::cos;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn round_sphere(radius: f64) -> MetricField {
        let labels = ["chi", "theta", "phi"].map(String::from).to_vec();
        MetricField::new(labels, move |x: &[f64]| {
            let r2 = radius * radius;
            let s2c = sin(x[0]) * sin(x[0]);
            let s2t = sin(x[1]) * sin(x[1]);
            Ok(DenseMatrix::diagonal(&[r2, r2 * s2c, r2 * s2c * s2t]))
        })
    }

    fn minkowski() -> MetricField {
        let labels = ["t", "x", "y", "z"].map(String::from).to_vec();
        MetricField::new(labels, |_| {
            Ok(DenseMatrix::diagonal(&[1.0, -1.0, -1.0, -1.0]))
        })
    }

    #[test]
    fn flat_metric_has_no_connection_or_curvature() {
        let x = [0.1, 0.2, -0.3, 1.0];
        let gamma = christoffel(&minkowski(), &x, 1e-3, &tol()).unwrap();
        assert!(gamma.max_abs() < 1e-9);
        let s = scalar_curvature(&minkowski(), &x, 1e-3, &tol()).unwrap();
        assert!(s.abs() < 1e-6);
    }

    #[test]
    fn round_sphere_christoffels() {
        let x = [1.1, 0.8, 2.0];
        let gamma = christoffel(&round_sphere(1.0), &x, 1e-3, &tol()).unwrap();
        let want = -sin(1.1) * cos(1.1);
        assert!((gamma.get(0, 1, 1) - want).abs() < 1e-5);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    assert_eq!(gamma.get(a, b, c), gamma.get(a, c, b));
                }
            }
        }
    }

    #[test]
    fn round_sphere_scalar_curvature() {
        let x = [1.1, 0.8, 2.0];
        let unit = scalar_curvature(&round_sphere(1.0), &x, 1e-3, &tol()).unwrap();
        assert!((unit - 6.0).abs() < 1e-3);
        let big = scalar_curvature(&round_sphere(2.0), &x, 1e-3, &tol()).unwrap();
        assert!((big - 1.5).abs() < 1e-3);
    }

    #[test]
    fn riemann_and_ricci_symmetries() {
        let x = [1.3, 2.0, 0.4];
        let rep = curvature_report(&round_sphere(1.5), &x, 1e-3, &tol()).unwrap();
        assert!(rep.riemann.antisymmetry_defect() < 1e-12);
        assert!(rep.ricci.asymmetry() < 1e-5);
    }

    #[test]
    fn singular_metric_is_reported() {
        let labels = ["u", "v"].map(String::from).to_vec();
        let mf = MetricField::new(labels, |_| Ok(DenseMatrix::zeros(2, 2)));
        assert_eq!(
            christoffel(&mf, &[0.0, 0.0], 1e-3, &tol()),
            Err(Error::SingularMetric)
        );
    }

    #[test]
    fn slice_checks() {
        let t = tol();
        let pts = [[1.0, 1.2, 0.5], [2.0, 0.7, 4.0], [0.5, 2.5, 3.0]];
        let unit = TauProfile::constant(1.0, -1.0, 1.0).unwrap();
        let rep = spatial_slice_check(&unit, 0.3, &pts, DEFAULT_CURVATURE_STEP, &t).unwrap();
        assert!(rep.pass, "{rep:?}");
        let four = TauProfile::constant(4.0, -1.0, 1.0).unwrap();
        let rep = spatial_slice_check(&four, 0.0, &pts, DEFAULT_CURVATURE_STEP, &t).unwrap();
        assert!((rep.expected - 1.5).abs() < 1e-15);
        assert!(rep.pass);
        let neg = TauProfile::constant(-4.0, -1.0, 1.0).unwrap();
        let rep = spatial_slice_check(&neg, 0.0, &pts, DEFAULT_CURVATURE_STEP, &t).unwrap();
        assert!(rep.pass);
        assert!(matches!(
            spatial_slice_check(&unit, 0.0, &[[0.05, 1.0, 1.0]], DEFAULT_CURVATURE_STEP, &t),
            Err(Error::ChartSingularity(_))
        ));
    }
}
