//! The Lie group of nonzero quaternions.
//!
//! Points carry canonical coordinates `(w, x, y, z)`. A radial profile `R`
//! defines the spherical chart
//!
//! ```text
//! w = R(eta) cos chi
//! x = R(eta) sin chi sin theta cos phi
//! y = R(eta) sin chi sin theta sin phi
//! z = R(eta) sin chi cos theta
//! ```
//!
//! and the proper frame is the left-invariant frame generated by `(1, i, j, k)`.
//!
//! Frame transforms are transition matrices: the columns of the matrix from
//! frame `A` to frame `B` are the `B` basis vectors written in `A`
//! components. Vector components therefore map with the inverse, and metric
//! components with `M^T g M`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use libm::{atan2, cos, exp, log, sin, sqrt};

use crate::algebra::{quaternion_algebra, Algebra, AlgebraElement, StructureTensor};
use crate::error::{Error, Result};
use crate::numeric::{DenseMatrix, Tolerance};

/// Below this, `sin chi` or `sin theta` counts as zero.
pub const CHART_EPS: f64 = 1e-12;

/// A nonzero quaternion in canonical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupPoint {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl GroupPoint {
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        if !(w.is_finite() && x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite);
        }
        if w == 0.0 && x == 0.0 && y == 0.0 && z == 0.0 {
            return Err(Error::ZeroPoint);
        }
        Ok(Self { w, x, y, z })
    }

    pub fn identity() -> Self {
        Self {
            w: 1.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    pub fn from_element(a: &AlgebraElement) -> Result<Self> {
        match a.coords() {
            [w, x, y, z] => Self::new(*w, *x, *y, *z),
            other => Err(Error::DimensionMismatch {
                expected: 4,
                found: other.len(),
            }),
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn to_element(&self) -> AlgebraElement {
        AlgebraElement::from(self.coords())
    }

    pub fn norm_squared(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.norm_squared())
    }
}

/// Spherical coordinates `(eta, chi, theta, phi)` on the group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub eta: f64,
    pub chi: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(eta: f64, chi: f64, theta: f64, phi: f64) -> Self {
        Self {
            eta,
            chi,
            theta,
            phi,
        }
    }

    /// Errors at `sin chi = 0` or `sin theta = 0`, where the chart degenerates.
    pub fn check_regular(&self) -> Result<()> {
        if sin(self.chi).abs() < CHART_EPS {
            return Err(Error::ChartSingularity("sin chi = 0"));
        }
        if sin(self.theta).abs() < CHART_EPS {
            return Err(Error::ChartSingularity("sin theta = 0"));
        }
        Ok(())
    }

    pub fn is_singular(&self) -> bool {
        self.check_regular().is_err()
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial function `R(eta)` with its derivative, used by the spherical chart.
///
/// Inversion goes through the analytic inverse when one is supplied,
/// otherwise through bisection on the declared bracket.
#[derive(Clone)]
pub struct RadialProfile {
    r: RealFn,
    rdot: RealFn,
    inverse: Option<RealFn>,
    bracket: Option<(f64, f64)>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("analytic_inverse", &self.inverse.is_some())
            .field("bracket", &self.bracket)
            .finish()
    }
}

impl RadialProfile {
    pub fn new<F, G>(r: F, rdot: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            r: Arc::new(r),
            rdot: Arc::new(rdot),
            inverse: None,
            bracket: None,
        }
    }

    /// `R(eta) = exp(eta)`, inverted with the natural logarithm.
    pub fn exponential() -> Self {
        Self::new(exp, exp).with_inverse(log)
    }

    pub fn with_inverse<F>(mut self, inverse: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    /// Interval on which bisection searches for `R^-1`.
    pub fn with_bracket(mut self, lo: f64, hi: f64) -> Self {
        self.bracket = Some((lo.min(hi), lo.max(hi)));
        self
    }

    pub fn r(&self, eta: f64) -> f64 {
        (self.r)(eta)
    }

    pub fn rdot(&self, eta: f64) -> f64 {
        (self.rdot)(eta)
    }

    /// `(R, dR/deta)` at `eta`, both required finite and nonzero.
    pub fn eval(&self, eta: f64) -> Result<(f64, f64)> {
        let r = self.r(eta);
        let rdot = self.rdot(eta);
        if !(r.is_finite() && rdot.is_finite()) || r == 0.0 || rdot == 0.0 {
            return Err(Error::InvalidProfile { eta });
        }
        Ok((r, rdot))
    }

    /// Finds `eta` with `R(eta) = value`.
    pub fn invert(&self, value: f64) -> Result<f64> {
        let fail = Error::ProfileNotInvertible { value };
        if let Some(inv) = &self.inverse {
            let eta = inv(value);
            if !eta.is_finite() {
                return Err(fail);
            }
            let back = self.r(eta);
            if (back - value).abs() > 1e-12 * value.abs().max(1.0) {
                return Err(fail);
            }
            return Ok(eta);
        }
        let (mut lo, mut hi) = self.bracket.ok_or(fail.clone())?;
        let mut f_lo = self.r(lo) - value;
        let f_hi = self.r(hi) - value;
        if !(f_lo.is_finite() && f_hi.is_finite()) {
            return Err(fail);
        }
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_lo.signum() == f_hi.signum() {
            return Err(fail);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = self.r(mid) - value;
            if !f_mid.is_finite() {
                return Err(fail);
            }
            if f_mid == 0.0 {
                return Ok(mid);
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Coordinate frames on the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Canonical,
    Spherical,
    Proper,
}

impl Frame {
    pub fn name(&self) -> &'static str {
        match self {
            Frame::Canonical => "canonical",
            Frame::Spherical => "spherical",
            Frame::Proper => "proper",
        }
    }
}

/// Left-invariant field generated by `u`, evaluated at `a`: the canonical components of `a u`.
pub fn left_invariant_field(u: &AlgebraElement, a: &GroupPoint) -> Result<[f64; 4]> {
    let [u0, u1, u2, u3] = match u.coords() {
        [u0, u1, u2, u3] => [*u0, *u1, *u2, *u3],
        other => {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: other.len(),
            })
        }
    };
    let [w, x, y, z] = a.coords();
    Ok([
        w * u0 - x * u1 - y * u2 - z * u3,
        w * u1 + x * u0 + y * u3 - z * u2,
        w * u2 - x * u3 + y * u0 + z * u1,
        w * u3 + x * u2 - y * u1 + z * u0,
    ])
}

/// Proper frame at `a`: column `b` is the left-invariant field of the `b`-th basis vector.
pub fn proper_frame(a: &GroupPoint) -> DenseMatrix {
    let [w, x, y, z] = a.coords();
    DenseMatrix::from_rows(&[[w, -x, -y, -z], [x, w, -z, y], [y, z, w, -x], [z, -y, x, w]])
}

/// Left-invariant field of `u` at `a` for any algebra: the product `a u`.
pub fn left_invariant_field_in(
    alg: &Algebra,
    u: &AlgebraElement,
    a: &AlgebraElement,
) -> Result<AlgebraElement> {
    alg.multiply(a, u)
}

/// Proper frame at `a` for any algebra: the matrix of left multiplication by `a`.
pub fn proper_frame_in(alg: &Algebra, a: &AlgebraElement) -> Result<DenseMatrix> {
    alg.left_multiplication(a)
}

pub fn spherical_to_canonical(p: &SphericalPoint, prof: &RadialProfile) -> Result<GroupPoint> {
    let r = prof.r(p.eta);
    if !r.is_finite() || r == 0.0 {
        return Err(Error::InvalidProfile { eta: p.eta });
    }
    let (sc, cc) = (sin(p.chi), cos(p.chi));
    let (st, ct) = (sin(p.theta), cos(p.theta));
    let (sp, cp) = (sin(p.phi), cos(p.phi));
    GroupPoint::new(r * cc, r * sc * st * cp, r * sc * st * sp, r * sc * ct)
}

/// Inverse chart. `phi` is returned in `[0, 2 pi)`.
pub fn canonical_to_spherical(a: &GroupPoint, prof: &RadialProfile) -> Result<SphericalPoint> {
    let len = a.norm();
    // R may be negative on its domain, in which case a = R n with n = -a/|a|.
    let (eta, r) = match prof.invert(len) {
        Ok(eta) => (eta, len),
        Err(_) => (prof.invert(-len)?, -len),
    };
    let [w, x, y, z] = a.coords().map(|c| c / r);
    let planar = libm::hypot(x, y);
    let transverse = libm::hypot(planar, z);
    if transverse < CHART_EPS {
        return Err(Error::ChartSingularity("sin chi = 0"));
    }
    if planar < CHART_EPS {
        return Err(Error::ChartSingularity("x = y = 0"));
    }
    let chi = atan2(transverse, w);
    let theta = atan2(planar, z);
    let mut phi = atan2(y, x);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    if phi >= 2.0 * PI {
        phi -= 2.0 * PI;
    }
    Ok(SphericalPoint::new(eta, chi, theta, phi))
}

/// `d(w, x, y, z) / d(eta, chi, theta, phi)`; row = canonical coordinate, column = spherical one.
pub fn jacobian_spherical(p: &SphericalPoint, prof: &RadialProfile) -> Result<DenseMatrix> {
    p.check_regular()?;
    let (r, rdot) = prof.eval(p.eta)?;
    let (sc, cc) = (sin(p.chi), cos(p.chi));
    let (st, ct) = (sin(p.theta), cos(p.theta));
    let (sp, cp) = (sin(p.phi), cos(p.phi));
    Ok(DenseMatrix::from_rows(&[
        [rdot * cc, -r * sc, 0.0, 0.0],
        [
            rdot * sc * st * cp,
            r * cc * st * cp,
            r * sc * ct * cp,
            -r * sc * st * sp,
        ],
        [
            rdot * sc * st * sp,
            r * cc * st * sp,
            r * sc * ct * sp,
            r * sc * st * cp,
        ],
        [rdot * sc * ct, r * cc * ct, -r * sc * st, 0.0],
    ]))
}

/// A transition matrix between two frames at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTransform {
    /// Columns are the `to` basis vectors in `from` components.
    pub matrix: DenseMatrix,
    pub from: Frame,
    pub to: Frame,
    pub at: GroupPoint,
}

impl FrameTransform {
    /// Maps vector components in the `from` frame to the `to` frame.
    pub fn component_map(&self, tol: &Tolerance) -> Result<DenseMatrix> {
        self.matrix.inverse(tol)
    }

    /// Metric components `M^T g M` in the `to` frame, given them in the `from` frame.
    pub fn transform_metric(&self, g_from: &DenseMatrix) -> Result<DenseMatrix> {
        self.matrix.transpose().matmul(g_from)?.matmul(&self.matrix)
    }

    /// Rank-(1,2) components in the `to` frame.
    pub fn transform_tensor(
        &self,
        tensor: &StructureTensor,
        tol: &Tolerance,
    ) -> Result<StructureTensor> {
        tensor.change_basis(&self.matrix, tol)
    }
}

/// Basis vectors of `frame` at the point, written in canonical components.
fn frame_basis(
    frame: Frame,
    a: &GroupPoint,
    p: &SphericalPoint,
    prof: &RadialProfile,
) -> Result<DenseMatrix> {
    match frame {
        Frame::Canonical => Ok(DenseMatrix::identity(4)),
        Frame::Proper => Ok(proper_frame(a)),
        Frame::Spherical => jacobian_spherical(p, prof),
    }
}

/// Transition from frame `from` to frame `to` at the point with spherical coordinates `p`.
pub fn frame_transform(
    from: Frame,
    to: Frame,
    p: &SphericalPoint,
    prof: &RadialProfile,
    tol: &Tolerance,
) -> Result<FrameTransform> {
    p.check_regular()?;
    let at = spherical_to_canonical(p, prof)?;
    let matrix = if from == to {
        DenseMatrix::identity(4)
    } else {
        let from_basis = frame_basis(from, &at, p, prof)?;
        let to_basis = frame_basis(to, &at, p, prof)?;
        from_basis.inverse(tol)?.matmul(&to_basis)?
    };
    Ok(FrameTransform {
        matrix,
        from,
        to,
        at,
    })
}

/// The closed-form spherical/proper frame matrix as commonly printed,
/// entries transcribed literally. Kept only for comparison reports.
pub fn printed_frame_matrix(p: &SphericalPoint, prof: &RadialProfile) -> Result<DenseMatrix> {
    p.check_regular()?;
    let (r, rdot) = prof.eval(p.eta)?;
    let (sc, cc) = (sin(p.chi), cos(p.chi));
    let (st, ct) = (sin(p.theta), cos(p.theta));
    let (sp, cp) = (sin(p.phi), cos(p.phi));
    Ok(DenseMatrix::from_rows(&[
        [r / rdot, 0.0, 0.0, 0.0],
        [0.0, st * cp, st * sp, ct],
        [
            0.0,
            (cc * ct * cp + sc * sp) / sc,
            (cc * ct * sp + sc * cp) / sc,
            cc * st / sc,
        ],
        [
            0.0,
            (sc * ct * cp - cc * sp) / (sc * st),
            (sc * ct * sp + cc * cp) / (sc * st),
            -1.0,
        ],
    ]))
}

/// One entry where the printed and computed frame matrices disagree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryDiscrepancy {
    pub row: usize,
    pub col: usize,
    pub computed: f64,
    pub printed: f64,
}

/// Per-entry comparison of the printed frame matrix against the
/// spherical-to-proper transition computed from the chart and the proper frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrixComparison {
    pub at: SphericalPoint,
    pub computed: DenseMatrix,
    pub printed: DenseMatrix,
    pub discrepancies: Vec<EntryDiscrepancy>,
    pub max_abs_diff: f64,
}

pub fn compare_printed_frame_matrix(
    p: &SphericalPoint,
    prof: &RadialProfile,
    threshold: f64,
    tol: &Tolerance,
) -> Result<FrameMatrixComparison> {
    let computed = frame_transform(Frame::Spherical, Frame::Proper, p, prof, tol)?.matrix;
    let printed = printed_frame_matrix(p, prof)?;
    let mut discrepancies = Vec::new();
    for row in 0..4 {
        for col in 0..4 {
            let (c, q) = (computed[(row, col)], printed[(row, col)]);
            if (c - q).abs() > threshold {
                discrepancies.push(EntryDiscrepancy {
                    row,
                    col,
                    computed: c,
                    printed: q,
                });
            }
        }
    }
    Ok(FrameMatrixComparison {
        at: *p,
        max_abs_diff: computed.max_abs_diff(&printed),
        computed,
        printed,
        discrepancies,
    })
}

fn quaternion_coords(u: &AlgebraElement) -> Result<[f64; 4]> {
    match u.coords() {
        [a, b, c, d] => Ok([*a, *b, *c, *d]),
        other => Err(Error::DimensionMismatch {
            expected: 4,
            found: other.len(),
        }),
    }
}

/// `exp(u) = e^{u0} (cos|v| + sin|v| v/|v|)` with `v` the imaginary part.
pub fn exp_quaternion(u: &AlgebraElement) -> Result<GroupPoint> {
    let [u0, u1, u2, u3] = quaternion_coords(u)?;
    let len = sqrt(u1 * u1 + u2 * u2 + u3 * u3);
    let scale = exp(u0);
    let sinc = if len < 1e-8 {
        1.0 - len * len / 6.0
    } else {
        sin(len) / len
    };
    GroupPoint::new(
        scale * cos(len),
        scale * sinc * u1,
        scale * sinc * u2,
        scale * sinc * u3,
    )
}

/// Principal logarithm, defined on the ball `|a - 1| < 1`.
pub fn log_quaternion(a: &GroupPoint) -> Result<AlgebraElement> {
    let [w, x, y, z] = a.coords();
    let offset = sqrt((w - 1.0) * (w - 1.0) + x * x + y * y + z * z);
    if offset >= 1.0 {
        return Err(Error::OutOfDomain);
    }
    let len = sqrt(x * x + y * y + z * z);
    let factor = if len == 0.0 { 0.0 } else { atan2(len, w) / len };
    Ok(AlgebraElement::from([
        log(a.norm()),
        factor * x,
        factor * y,
        factor * z,
    ]))
}

/// `log(e^{tu} e^{tv} e^{-tu} e^{-tv})`.
pub fn group_commutator_log(
    u: &AlgebraElement,
    v: &AlgebraElement,
    t: f64,
) -> Result<AlgebraElement> {
    let h = quaternion_algebra();
    let factors = [u.scale(t), v.scale(t), u.scale(-t), v.scale(-t)];
    let mut acc = AlgebraElement::basis(4, 0);
    for f in &factors {
        acc = h.multiply(&acc, &exp_quaternion(f)?.to_element())?;
    }
    log_quaternion(&GroupPoint::from_element(&acc)?)
}

/// `|log(e^{tu} e^{tv} e^{-tu} e^{-tv}) - t^2 [u, v]|`, which is `O(t^3)`.
pub fn bch_commutator_check(u: &AlgebraElement, v: &AlgebraElement, t: f64) -> Result<f64> {
    let bracket = quaternion_algebra().commutator_algebra().multiply(u, v)?;
    let log = group_commutator_log(u, v, t)?;
    Ok((&log - &bracket.scale(t * t)).norm())
}

/// Estimates the `t^2` coefficient of the group-commutator logarithm by
/// two rounds of Richardson extrapolation over `t, t/2, t/4`.
pub fn richardson_commutator_coefficient(
    u: &AlgebraElement,
    v: &AlgebraElement,
    t: f64,
) -> Result<AlgebraElement> {
    let mut levels = vec![];
    for s in [t, 0.5 * t, 0.25 * t] {
        levels.push(group_commutator_log(u, v, s)?.scale(1.0 / (s * s)));
    }
    // The quotient has an expansion in integer powers of t.
    let first: Vec<AlgebraElement> = levels
        .windows(2)
        .map(|w| &w[1].scale(2.0) - &w[0])
        .collect();
    Ok((&first[1].scale(4.0) - &first[0]).scale(1.0 / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fd_derivative;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn zero_is_not_a_group_point() {
        assert_eq!(GroupPoint::new(0.0, 0.0, 0.0, 0.0), Err(Error::ZeroPoint));
    }

    #[test]
    fn left_invariant_field_examples() {
        let u = AlgebraElement::from([0.5, -2.0, 3.0, 1.25]);
        let at_one = left_invariant_field(&u, &GroupPoint::identity()).unwrap();
        assert_eq!(at_one.to_vec(), u.coords());
        let a = GroupPoint::new(0.7, -1.1, 2.3, 0.4).unwrap();
        let one = AlgebraElement::basis(4, 0);
        assert_eq!(left_invariant_field(&one, &a).unwrap(), a.coords());
        let j = GroupPoint::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let i = AlgebraElement::basis(4, 1);
        assert_eq!(left_invariant_field(&i, &j).unwrap(), [0.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn proper_frame_examples() {
        assert_eq!(
            proper_frame(&GroupPoint::identity()),
            DenseMatrix::identity(4)
        );
        let two = GroupPoint::new(2.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(proper_frame(&two), DenseMatrix::identity(4).scale(2.0));
        let a = GroupPoint::new(0.3, -1.2, 0.8, 2.0).unwrap();
        let det = proper_frame(&a).determinant().unwrap();
        let expected = a.norm_squared() * a.norm_squared();
        assert!((det - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn generic_proper_frame_matches_quaternion_formula() {
        let h = quaternion_algebra();
        let a = GroupPoint::new(0.3, -1.2, 0.8, 2.0).unwrap();
        let generic = proper_frame_in(&h, &a.to_element()).unwrap();
        assert_eq!(generic, proper_frame(&a));
    }

    #[test]
    fn chart_examples() {
        let unit = RadialProfile::new(|_| 1.0, |_| 1.0);
        let p = SphericalPoint::new(0.0, PI / 2.0, PI / 2.0, 0.0);
        let a = spherical_to_canonical(&p, &unit).unwrap();
        let [w, x, y, z] = a.coords();
        assert!(w.abs() < 1e-16 && (x - 1.0).abs() < 1e-16 && y.abs() < 1e-16 && z.abs() < 1e-16);

        let pole = SphericalPoint::new(0.3, 0.0, 1.0, 2.0);
        let a = spherical_to_canonical(&pole, &RadialProfile::exponential()).unwrap();
        assert_eq!(a.coords(), [exp(0.3), 0.0, 0.0, 0.0]);

        let e = core::f64::consts::E;
        let p = SphericalPoint::new(1.0, PI / 3.0, PI / 4.0, PI / 6.0);
        let a = spherical_to_canonical(&p, &RadialProfile::exponential()).unwrap();
        let expected = [
            e * cos(PI / 3.0),
            e * sin(PI / 3.0) * sin(PI / 4.0) * cos(PI / 6.0),
            e * sin(PI / 3.0) * sin(PI / 4.0) * sin(PI / 6.0),
            e * sin(PI / 3.0) * cos(PI / 4.0),
        ];
        for (got, want) in a.coords().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_chart_examples() {
        let prof = RadialProfile::exponential();
        let i = GroupPoint::new(0.0, 1.0, 0.0, 0.0).unwrap();
        let s = canonical_to_spherical(&i, &prof).unwrap();
        assert!(s.eta.abs() < 1e-15);
        assert!((s.chi - PI / 2.0).abs() < 1e-15);
        assert!((s.theta - PI / 2.0).abs() < 1e-15);
        assert!(s.phi.abs() < 1e-15);
        assert_eq!(
            canonical_to_spherical(&GroupPoint::identity(), &prof),
            Err(Error::ChartSingularity("sin chi = 0"))
        );
        let axis = GroupPoint::new(1.0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(
            canonical_to_spherical(&axis, &prof),
            Err(Error::ChartSingularity("x = y = 0"))
        );
    }

    #[test]
    fn inverse_chart_by_bisection() {
        // R = 2 + tanh(eta) has no inverse supplied; bisect on [-5, 5].
        let prof = RadialProfile::new(
            |e| 2.0 + libm::tanh(e),
            |e| {
                let c = libm::cosh(e);
                1.0 / (c * c)
            },
        )
        .with_bracket(-5.0, 5.0);
        let p = SphericalPoint::new(0.4, 1.1, 2.0, 4.0);
        let a = spherical_to_canonical(&p, &prof).unwrap();
        let back = canonical_to_spherical(&a, &prof).unwrap();
        assert!((back.eta - p.eta).abs() < 1e-10);
        assert!((back.chi - p.chi).abs() < 1e-12);
        assert!((back.theta - p.theta).abs() < 1e-12);
        assert!((back.phi - p.phi).abs() < 1e-12);
        // 3.5 is outside the range (1, 3)
        let far = GroupPoint::new(3.5, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            canonical_to_spherical(&far, &prof),
            Err(Error::ProfileNotInvertible { .. })
        ));
        let no_bracket = RadialProfile::new(|e| 2.0 + e, |_| 1.0);
        assert!(matches!(
            canonical_to_spherical(&a, &no_bracket),
            Err(Error::ProfileNotInvertible { .. })
        ));
    }

    #[test]
    fn negative_profile_is_inverted() {
        let prof = RadialProfile::new(|e| -exp(e), |e| -exp(e)).with_bracket(-10.0, 10.0);
        let p = SphericalPoint::new(0.25, 0.9, 1.3, 5.0);
        let a = spherical_to_canonical(&p, &prof).unwrap();
        let back = canonical_to_spherical(&a, &prof).unwrap();
        assert!((back.eta - p.eta).abs() < 1e-10);
        assert!((back.phi - p.phi).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let prof = RadialProfile::exponential();
        let p = SphericalPoint::new(0.2, 1.0, 0.7, 2.5);
        let jac = jacobian_spherical(&p, &prof).unwrap();
        assert_eq!(jac[(0, 0)], exp(0.2) * cos(1.0));
        for col in 0..4 {
            for row in 0..4 {
                let f = |s: f64| {
                    let mut q = p;
                    match col {
                        0 => q.eta = s,
                        1 => q.chi = s,
                        2 => q.theta = s,
                        _ => q.phi = s,
                    }
                    spherical_to_canonical(&q, &prof).unwrap().coords()[row]
                };
                let x0 = [p.eta, p.chi, p.theta, p.phi][col];
                let fd = fd_derivative(f, x0, 1e-6);
                assert!((fd - jac[(row, col)]).abs() < 1e-6, "({row},{col})");
            }
        }
    }

    #[test]
    fn jacobian_determinant_closed_form() {
        // Columns ordered (eta, chi, theta, phi): det = R^3 Rdot sin^2(chi) sin(theta).
        let prof = RadialProfile::new(|e| 1.5 + e * e, |e| 2.0 * e);
        for (eta, chi, theta, phi) in [
            (0.5, 1.0, 0.7, 2.5),
            (1.3, 2.2, 2.9, 0.1),
            (-0.7, 0.4, 1.6, 4.0),
        ] {
            let p = SphericalPoint::new(eta, chi, theta, phi);
            let det = jacobian_spherical(&p, &prof)
                .unwrap()
                .determinant()
                .unwrap();
            let r = 1.5 + eta * eta;
            let expected = r * r * r * (2.0 * eta) * sin(chi) * sin(chi) * sin(theta);
            assert!((det - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn singular_points_are_rejected() {
        let prof = RadialProfile::exponential();
        let p = SphericalPoint::new(0.0, 0.0, 1.0, 1.0);
        assert!(matches!(
            jacobian_spherical(&p, &prof),
            Err(Error::ChartSingularity(_))
        ));
        let p = SphericalPoint::new(0.0, 1.0, PI, 1.0);
        assert!(matches!(
            frame_transform(Frame::Spherical, Frame::Proper, &p, &prof, &tol()),
            Err(Error::ChartSingularity(_))
        ));
    }

    #[test]
    fn spherical_to_proper_transition() {
        // Non-exponential profile so that R/Rdot differs from 1.
        let prof = RadialProfile::new(|e| 2.0 + e, |_| 1.0);
        let p = SphericalPoint::new(0.5, 1.2, 0.9, 2.0);
        let ft = frame_transform(Frame::Spherical, Frame::Proper, &p, &prof, &tol()).unwrap();
        let first_row = ft.matrix.row(0);
        assert!((first_row[0] - 2.5).abs() < 1e-12);
        for v in &first_row[1..] {
            assert!(v.abs() < 1e-12);
        }
        let same = frame_transform(Frame::Proper, Frame::Proper, &p, &prof, &tol()).unwrap();
        assert_eq!(same.matrix, DenseMatrix::identity(4));
        let back = frame_transform(Frame::Proper, Frame::Spherical, &p, &prof, &tol()).unwrap();
        let product = ft.matrix.matmul(&back.matrix).unwrap();
        assert!(product.max_abs_diff(&DenseMatrix::identity(4)) < 1e-9);
    }

    #[test]
    fn transition_columns_are_proper_vectors() {
        // Pushing the proper basis vector through the spherical chart recovers a * i_b.
        let prof = RadialProfile::exponential();
        let p = SphericalPoint::new(-0.3, 2.0, 1.1, 5.5);
        let ft = frame_transform(Frame::Spherical, Frame::Proper, &p, &prof, &tol()).unwrap();
        let jac = jacobian_spherical(&p, &prof).unwrap();
        let pushed = jac.matmul(&ft.matrix).unwrap();
        assert!(pushed.max_abs_diff(&proper_frame(&ft.at)) < 1e-8);
    }

    #[test]
    fn printed_matrix_comparison_flags_row_two_signs() {
        let prof = RadialProfile::exponential();
        let p = SphericalPoint::new(0.1, 1.0, 0.8, 0.6);
        let cmp = compare_printed_frame_matrix(&p, &prof, 1e-8, &tol()).unwrap();
        let flagged: Vec<(usize, usize)> =
            cmp.discrepancies.iter().map(|d| (d.row, d.col)).collect();
        assert_eq!(flagged, vec![(2, 2), (2, 3)]);
    }

    #[test]
    fn exp_and_log() {
        assert_eq!(
            exp_quaternion(&AlgebraElement::zero(4)).unwrap(),
            GroupPoint::identity()
        );
        let q = exp_quaternion(&AlgebraElement::from([0.0, PI / 2.0, 0.0, 0.0])).unwrap();
        let [w, x, y, z] = q.coords();
        assert!(w.abs() < 1e-16 && (x - 1.0).abs() < 1e-16 && y == 0.0 && z == 0.0);
        let u = AlgebraElement::from([0.1, -0.2, 0.15, 0.05]);
        let back = log_quaternion(&exp_quaternion(&u).unwrap()).unwrap();
        assert!(back.max_abs_diff(&u) < 1e-12);
        let far = GroupPoint::new(-1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(log_quaternion(&far), Err(Error::OutOfDomain));
    }

    #[test]
    fn bch_commuting_elements() {
        let u = AlgebraElement::from([0.2, 1.0, -0.5, 0.3]);
        for t in [1e-1, 1e-2, 1e-3] {
            assert!(bch_commutator_check(&u, &u, t).unwrap() < 1e-12);
        }
    }

    #[test]
    fn bch_third_order() {
        let i = AlgebraElement::basis(4, 1);
        let j = AlgebraElement::basis(4, 2);
        let r1 = bch_commutator_check(&i, &j, 1e-2).unwrap();
        let r2 = bch_commutator_check(&i, &j, 5e-3).unwrap();
        let ratio = r1 / r2;
        assert!((7.0..=9.0).contains(&ratio), "ratio {ratio}");
        let c = richardson_commutator_coefficient(&i, &j, 1e-2).unwrap();
        assert!(c.max_abs_diff(&AlgebraElement::from([0.0, 0.0, 0.0, 2.0])) < 1e-6);
    }
}
