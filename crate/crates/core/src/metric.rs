//! Principal metrics on the group of nonzero quaternions.
//!
//! A principal metric is the contraction of a one-form field with the
//! structure field. In the proper frame the admissible one-forms have
//! components `(tau, 0, 0, 0)`, so the metric is `diag(tau, -tau, -tau, -tau)`
//! there. Writing `tau` as a function of `eta` and pushing the metric into
//! the spherical frame gives
//!
//! ```text
//! diag(tau (R'/R)^2, -tau, -tau sin^2 chi, -tau sin^2 chi sin^2 theta)
//! ```
//!
//! and choosing `R` with `tau (R'/R)^2 = 1` brings it to the closed FLRW
//! template with scale factor `sqrt|tau|`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use libm::{exp, sin, sqrt};

use crate::algebra::{quaternion_algebra, quaternion_tensor, StructureTensor};
use crate::error::{Error, Result};
use crate::numeric::{self, quadrature, DenseMatrix, Tolerance};
use crate::products::{classify_signature, contraction_matrix, Classification};
use crate::unit_group::{
    canonical_to_spherical, frame_transform, proper_frame, Frame, GroupPoint, RadialProfile,
    SphericalPoint,
};

/// Samples used when validating a tau profile (endpoints are added on top).
pub const TAU_VALIDATION_SAMPLES: usize = 1000;
/// Entrywise agreement required between a metric and the FLRW template.
pub const FLRW_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(v: f64) -> Option<Sign> {
        if v > 0.0 {
            Some(Sign::Positive)
        } else if v < 0.0 {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    pub fn factor(&self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        }
    }
}

/// Root branch `s` in `R = R0 exp(int d eta / (s sqrt|tau|))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    pub fn factor(&self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `tau` as a continuous, sign-definite function of `eta` on a closed interval.
#[derive(Clone)]
pub struct TauProfile {
    tau: RealFn,
    sign: Sign,
    domain: (f64, f64),
}

impl fmt::Debug for TauProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TauProfile")
            .field("sign", &self.sign)
            .field("domain", &self.domain)
            .finish()
    }
}

impl TauProfile {
    /// Validates `tau` on a uniform grid plus the endpoints; any zero or
    /// sign flip rejects the profile. The sign is read off the first sample.
    pub fn new<F>(tau: F, lo: f64, hi: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NonFinite);
        }
        if lo >= hi {
            return Err(Error::InvalidTauProfile("domain must satisfy lo < hi"));
        }
        let n = TAU_VALIDATION_SAMPLES;
        let interior = (1..=n).map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64);
        let grid = core::iter::once(lo)
            .chain(interior)
            .chain(core::iter::once(hi));
        let mut sign = None;
        for eta in grid {
            let v = tau(eta);
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            let s = Sign::of(v).ok_or(Error::ZeroTau { eta })?;
            match sign {
                None => sign = Some(s),
                Some(first) if first != s => return Err(Error::SignChange { eta }),
                _ => {}
            }
        }
        Ok(Self {
            tau: Arc::new(tau),
            sign: sign.expect("grid is nonempty"),
            domain: (lo, hi),
        })
    }

    /// Like [`TauProfile::new`], additionally requiring the given sign.
    pub fn with_declared_sign<F>(tau: F, lo: f64, hi: f64, declared: Sign) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let tp = Self::new(tau, lo, hi)?;
        if tp.sign != declared {
            return Err(Error::SignChange { eta: lo });
        }
        Ok(tp)
    }

    pub fn constant(c: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(move |_| c, lo, hi)
    }

    /// `tau(eta) = exp(k eta)`.
    pub fn exponential(k: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(move |eta| exp(k * eta), lo, hi)
    }

    /// `tau(eta) = c0 + c1 eta + c2 eta^2 + ...`.
    pub fn polynomial(coeffs: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidTauProfile(
                "polynomial needs at least one coefficient",
            ));
        }
        Self::new(
            move |eta| coeffs.iter().rev().fold(0.0, |acc, c| acc * eta + c),
            lo,
            hi,
        )
    }

    /// Monotone cubic interpolation through `(etas, values)`; the domain is the table range.
    pub fn sampled(etas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let interp = MonotoneCubic::new(etas, values)?;
        let (lo, hi) = interp.range();
        Self::new(move |eta| interp.eval(eta), lo, hi)
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn contains(&self, eta: f64) -> bool {
        eta >= self.domain.0 && eta <= self.domain.1
    }

    pub fn eval(&self, eta: f64) -> f64 {
        (self.tau)(eta)
    }

    /// `tau(eta)`, rejecting points outside the domain and zeros.
    pub fn eval_checked(&self, eta: f64) -> Result<f64> {
        self.check_domain(eta)?;
        let v = self.eval(eta);
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        if v == 0.0 {
            return Err(Error::ZeroTau { eta });
        }
        Ok(v)
    }

    fn check_domain(&self, eta: f64) -> Result<()> {
        if self.contains(eta) {
            Ok(())
        } else {
            Err(Error::EtaOutOfDomain {
                eta,
                lo: self.domain.0,
                hi: self.domain.1,
            })
        }
    }

    pub fn scale_factor(&self) -> ScaleFactor {
        ScaleFactor { tau: self.clone() }
    }
}

/// Fritsch-Carlson monotone piecewise-cubic Hermite interpolant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                found: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::InvalidTauProfile("table needs at least two rows"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTauProfile(
                "table abscissae must be strictly increasing",
            ));
        }
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            slopes[k] = if secants[k - 1] * secants[k] <= 0.0 {
                0.0
            } else {
                0.5 * (secants[k - 1] + secants[k])
            };
        }
        for k in 0..n - 1 {
            if secants[k] == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            let a = slopes[k] / secants[k];
            let b = slopes[k + 1] / secants[k];
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / sqrt(r);
                slopes[k] = t * a * secants[k];
                slopes[k + 1] = t * b * secants[k];
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Clamps to the end values outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = self.xs.partition_point(|v| *v <= x) - 1;
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k]
            + h10 * h * self.slopes[k]
            + h01 * self.ys[k + 1]
            + h11 * h * self.slopes[k + 1]
    }
}

/// `a(eta) = sqrt|tau(eta)|`.
#[derive(Debug, Clone)]
pub struct ScaleFactor {
    tau: TauProfile,
}

impl ScaleFactor {
    pub fn eval(&self, eta: f64) -> f64 {
        sqrt(self.tau.eval(eta).abs())
    }
}

/// The potential `T(eta) = int_{eta0}^{eta} tau`, whose gradient is the one-form.
#[derive(Debug, Clone)]
pub struct MetricPotential {
    tau: TauProfile,
    eta0: f64,
    tol: Tolerance,
}

impl MetricPotential {
    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn eval(&self, eta: f64) -> Result<f64> {
        self.tau.check_domain(eta)?;
        let tau = self.tau.clone();
        quadrature(move |s| tau.eval(s), self.eta0, eta, &self.tol)
            .map_err(|_| Error::QuadratureFailure)
    }

    /// `(eta, T(eta))` on `n` uniform points spanning the domain.
    ///
    /// Values are accumulated panel by panel, so adjacent differences are
    /// themselves quadratures of `tau` over one panel.
    pub fn grid_values(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        let (lo, hi) = self.tau.domain();
        if n < 2 {
            return Err(Error::InvalidTauProfile("grid needs at least two points"));
        }
        let mut out = Vec::with_capacity(n);
        let mut value = self.eval(lo)?;
        let mut prev = lo;
        out.push((lo, value));
        for k in 1..n {
            let eta = if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            };
            let tau = self.tau.clone();
            value += quadrature(move |s| tau.eval(s), prev, eta, &self.tol)
                .map_err(|_| Error::QuadratureFailure)?;
            out.push((eta, value));
            prev = eta;
        }
        Ok(out)
    }

    /// No adjacent pair on an `n`-point grid moves against the sign of `tau`.
    pub fn is_strictly_monotone(&self, n: usize) -> Result<bool> {
        let s = self.tau.sign().factor();
        let values = self.grid_values(n)?;
        Ok(values.windows(2).all(|w| s * (w[1].1 - w[0].1) > 0.0))
    }
}

pub fn potential(tp: &TauProfile, eta0: f64, tol: &Tolerance) -> Result<MetricPotential> {
    tp.check_domain(eta0)?;
    let pot = MetricPotential {
        tau: tp.clone(),
        eta0,
        tol: *tol,
    };
    let (lo, hi) = tp.domain();
    pot.eval(lo)?;
    pot.eval(hi)?;
    Ok(pot)
}

/// `R(eta) = r0 exp(int_{eta0}^{eta} d s / (branch sqrt|tau(s)|))`, the solution of
/// `|tau| (R'/R)^2 = 1` with `R(eta0) = r0`.
///
/// `R'` is returned analytically as `R / (branch sqrt|tau|)`; `R` itself is a
/// quadrature. Points where the quadrature fails evaluate to NaN, which
/// [`RadialProfile::eval`] reports as an invalid profile.
pub fn solve_scale_profile(
    tp: &TauProfile,
    eta0: f64,
    r0: f64,
    branch: Branch,
    tol: &Tolerance,
) -> Result<RadialProfile> {
    if !r0.is_finite() {
        return Err(Error::NonFinite);
    }
    if r0 == 0.0 {
        return Err(Error::InvalidProfile { eta: eta0 });
    }
    tp.check_domain(eta0)?;
    let s = branch.factor();
    let exponent = {
        let tau = tp.clone();
        let tol = *tol;
        move |eta: f64| -> Result<f64> {
            let tau_inner = tau.clone();
            quadrature(move |x| s / sqrt(tau_inner.eval(x).abs()), eta0, eta, &tol)
                .map_err(|_| Error::QuadratureFailure)
        }
    };
    let (lo, hi) = tp.domain();
    exponent(lo)?;
    exponent(hi)?;

    let exponent = Arc::new(exponent);
    let r = {
        let exponent = Arc::clone(&exponent);
        move |eta: f64| exponent(eta).map_or(f64::NAN, |e| r0 * exp(e))
    };
    let rdot = {
        let tau = tp.clone();
        move |eta: f64| {
            exponent(eta).map_or(f64::NAN, |e| r0 * exp(e) * s / sqrt(tau.eval(eta).abs()))
        }
    };
    Ok(RadialProfile::new(r, rdot).with_bracket(lo, hi))
}

/// Where a metric sample was taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplePoint {
    Group(GroupPoint),
    Spherical(SphericalPoint),
}

/// Metric components in a frame at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub frame: Frame,
    pub at: SamplePoint,
    pub g: DenseMatrix,
}

/// Components of the structure field at `a` in the requested frame.
///
/// Constant in the proper frame; elsewhere obtained by a rank-(1,2) change
/// of basis.
pub fn structure_field_components(
    a: &GroupPoint,
    frame: Frame,
    prof: &RadialProfile,
    tol: &Tolerance,
) -> Result<StructureTensor> {
    let constants = quaternion_tensor();
    match frame {
        Frame::Proper => Ok(constants),
        Frame::Canonical => {
            // canonical basis vectors in proper components
            let transition = proper_frame(a).inverse(tol)?;
            constants.change_basis(&transition, tol)
        }
        Frame::Spherical => {
            let p = canonical_to_spherical(a, prof)?;
            frame_transform(Frame::Proper, Frame::Spherical, &p, prof, tol)?
                .transform_tensor(&constants, tol)
        }
    }
}

/// Contraction of `(tau, 0, 0, 0)` with the structure field in the proper frame.
pub fn metric_proper(a: &GroupPoint, tau: f64) -> Result<MetricSample> {
    if !tau.is_finite() {
        return Err(Error::NonFinite);
    }
    if tau == 0.0 {
        return Err(Error::ZeroTau { eta: f64::NAN });
    }
    let g = contraction_matrix(&quaternion_algebra(), &[tau, 0.0, 0.0, 0.0])?;
    Ok(MetricSample {
        frame: Frame::Proper,
        at: SamplePoint::Group(*a),
        g,
    })
}

/// Closed-form spherical components.
pub fn metric_spherical(
    p: &SphericalPoint,
    tp: &TauProfile,
    prof: &RadialProfile,
) -> Result<MetricSample> {
    p.check_regular()?;
    let tau = tp.eval_checked(p.eta)?;
    let (r, rdot) = prof.eval(p.eta)?;
    let ratio = rdot / r;
    let s2c = sin(p.chi) * sin(p.chi);
    let s2t = sin(p.theta) * sin(p.theta);
    Ok(MetricSample {
        frame: Frame::Spherical,
        at: SamplePoint::Spherical(*p),
        g: DenseMatrix::diagonal(&[tau * ratio * ratio, -tau, -tau * s2c, -tau * s2c * s2t]),
    })
}

/// Spherical components obtained by transporting the proper-frame metric
/// through the frame transition; independent of [`metric_spherical`].
pub fn metric_spherical_pushforward(
    p: &SphericalPoint,
    tp: &TauProfile,
    prof: &RadialProfile,
    tol: &Tolerance,
) -> Result<MetricSample> {
    let tau = tp.eval_checked(p.eta)?;
    let transition = frame_transform(Frame::Proper, Frame::Spherical, p, prof, tol)?;
    let proper = metric_proper(&transition.at, tau)?;
    Ok(MetricSample {
        frame: Frame::Spherical,
        at: SamplePoint::Spherical(*p),
        g: transition.transform_metric(&proper.g)?,
    })
}

/// `sign * diag(1, -a^2, -a^2 sin^2 chi, -a^2 sin^2 chi sin^2 theta)`.
pub fn flrw_template(p: &SphericalPoint, scale_factor: f64, sign: Sign) -> DenseMatrix {
    let a2 = scale_factor * scale_factor;
    let s2c = sin(p.chi) * sin(p.chi);
    let s2t = sin(p.theta) * sin(p.theta);
    DenseMatrix::diagonal(&[1.0, -a2, -a2 * s2c, -a2 * s2c * s2t]).scale(sign.factor())
}

/// Uniformly spaced axis; a single point sits at `lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        Self { lo, hi, count }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n)
                .map(|k| self.lo + (self.hi - self.lo) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Tensor-product grid in spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalGrid {
    pub eta: Axis,
    pub chi: Axis,
    pub theta: Axis,
    pub phi: Axis,
}

impl SphericalGrid {
    /// `n` points per axis, with the angular axes kept 0.3 away from the chart poles.
    pub fn generic(eta_lo: f64, eta_hi: f64, n: usize) -> Self {
        Self {
            eta: Axis::new(eta_lo, eta_hi, n),
            chi: Axis::new(0.3, PI - 0.3, n),
            theta: Axis::new(0.3, PI - 0.3, n),
            phi: Axis::new(0.1, 2.0 * PI - 0.1, n),
        }
    }

    pub fn points(&self) -> Vec<SphericalPoint> {
        let mut out = Vec::new();
        for eta in self.eta.values() {
            for chi in self.chi.values() {
                for theta in self.theta.values() {
                    for phi in self.phi.values() {
                        out.push(SphericalPoint::new(eta, chi, theta, phi));
                    }
                }
            }
        }
        out
    }
}

/// Integration constants and root branch for the scale-profile equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlrwConfig {
    pub eta0: f64,
    pub r0: f64,
    pub branch: Branch,
}

impl Default for FlrwConfig {
    fn default() -> Self {
        Self {
            eta0: 0.0,
            r0: 1.0,
            branch: Branch::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlrwReport {
    pub verdict: Verdict,
    /// Largest entrywise gap between the metric and the FLRW template.
    pub max_deviation: f64,
    pub sign_block: Sign,
    /// `(eta, a)` with `a` read off the metric's `chi chi` component.
    pub scale_factor_samples: Vec<(f64, f64)>,
    /// Spherical metric and expected scale factor at every grid point.
    pub samples: Vec<(MetricSample, f64)>,
}

/// Checks that the principal metric of `tp`, written in the spherical chart
/// whose `R` solves the scale-profile equation, matches the closed FLRW
/// template with scale factor `sqrt|tau|` at every grid point.
pub fn flrw_verdict(
    tp: &TauProfile,
    grid: &[SphericalPoint],
    config: &FlrwConfig,
    tol: &Tolerance,
) -> Result<FlrwReport> {
    let prof = solve_scale_profile(tp, config.eta0, config.r0, config.branch, tol)?;
    let sign = tp.sign();
    let scale = tp.scale_factor();
    let mut max_deviation = 0.0f64;
    let mut lorentzian = true;
    let mut scale_factor_samples: Vec<(f64, f64)> = Vec::new();
    let mut samples = Vec::with_capacity(grid.len());
    for p in grid {
        let sample = metric_spherical_pushforward(p, tp, &prof, tol)?;
        let a = scale.eval(p.eta);
        let template = flrw_template(p, a, sign);
        max_deviation = max_deviation.max(sample.g.max_abs_diff(&template));
        let sig = numeric::signature(&sample.g, tol)?;
        lorentzian &= classify_signature(&sig) == Classification::Lorentzian;
        if !scale_factor_samples.iter().any(|(eta, _)| *eta == p.eta) {
            scale_factor_samples.push((p.eta, sqrt(sample.g[(1, 1)].abs())));
        }
        samples.push((sample, a));
    }
    let verdict = if lorentzian && max_deviation < FLRW_TOLERANCE && !grid.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(FlrwReport {
        verdict,
        max_deviation,
        sign_block: sign,
        scale_factor_samples,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraElement;
    use crate::numeric::fd_derivative;
    use crate::unit_group::spherical_to_canonical;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn tau_profile_validation() {
        assert!(TauProfile::constant(1.0, -1.0, 1.0).is_ok());
        assert_eq!(
            TauProfile::constant(-1.0, -1.0, 1.0).unwrap().sign(),
            Sign::Negative
        );
        // 1 - eta^2 vanishes at the endpoints
        assert!(matches!(
            TauProfile::polynomial(vec![1.0, 0.0, -1.0], -1.0, 1.0),
            Err(Error::ZeroTau { .. })
        ));
        assert!(matches!(
            TauProfile::polynomial(vec![0.25, 1.0], -1.0, 1.0),
            Err(Error::SignChange { .. })
        ));
        assert!(TauProfile::constant(0.0, 0.0, 1.0).is_err());
        assert!(TauProfile::constant(1.0, 1.0, 0.0).is_err());
        assert!(TauProfile::with_declared_sign(|_| 2.0, 0.0, 1.0, Sign::Negative).is_err());
    }

    #[test]
    fn sampled_profile_interpolates_monotonically() {
        let etas = vec![-1.0, 0.0, 0.5, 1.0];
        let vals = vec![1.0, 2.0, 2.0, 5.0];
        let tp = TauProfile::sampled(etas.clone(), vals.clone()).unwrap();
        for (e, v) in etas.iter().zip(&vals) {
            assert_eq!(tp.eval(*e), *v);
        }
        // flat segment stays flat, no overshoot
        assert_eq!(tp.eval(0.25), 2.0);
        let mut prev = tp.eval(-1.0);
        for k in 1..=200 {
            let v = tp.eval(-1.0 + 2.0 * k as f64 / 200.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert!(TauProfile::sampled(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn potential_examples() {
        let t = tol();
        let one = potential(&TauProfile::constant(1.0, -2.0, 2.0).unwrap(), 0.0, &t).unwrap();
        assert!((one.eval(1.5).unwrap() - 1.5).abs() < 1e-14);
        let neg = potential(&TauProfile::constant(-1.0, -2.0, 2.0).unwrap(), 0.0, &t).unwrap();
        assert!((neg.eval(1.5).unwrap() + 1.5).abs() < 1e-14);
        assert!(neg.is_strictly_monotone(1000).unwrap());
        let cubic = potential(
            &TauProfile::polynomial(vec![1.0, 0.0, 1.0], -2.0, 2.0).unwrap(),
            0.0,
            &t,
        )
        .unwrap();
        for eta in [-1.7, -0.2, 0.9, 2.0] {
            let want = eta + eta * eta * eta / 3.0;
            assert!((cubic.eval(eta).unwrap() - want).abs() < 1e-10);
            if eta.abs() < 2.0 {
                let d = fd_derivative(|s| cubic.eval(s).unwrap(), eta, 1e-4);
                assert!((d - (1.0 + eta * eta)).abs() < 1e-6);
            }
        }
        assert!(cubic.is_strictly_monotone(1000).unwrap());
        assert!(matches!(cubic.eval(3.0), Err(Error::EtaOutOfDomain { .. })));
    }

    #[test]
    fn scale_profile_examples() {
        let t = tol();
        let unit = TauProfile::constant(1.0, -1.0, 1.0).unwrap();
        let prof = solve_scale_profile(&unit, 0.0, 1.0, Branch::Plus, &t).unwrap();
        for eta in [-0.9, 0.0, 0.4, 1.0] {
            assert!((prof.r(eta) - exp(eta)).abs() < 1e-12);
        }
        let four = TauProfile::constant(4.0, -1.0, 1.0).unwrap();
        let prof = solve_scale_profile(&four, 0.0, 1.0, Branch::Plus, &t).unwrap();
        assert!((prof.r(0.8) - exp(0.4)).abs() < 1e-12);
        let growing = TauProfile::exponential(2.0, -1.0, 1.0).unwrap();
        let prof = solve_scale_profile(&growing, 0.0, 1.0, Branch::Plus, &t).unwrap();
        for eta in [-1.0, -0.3, 0.6, 1.0] {
            let want = exp(1.0 - exp(-eta));
            assert!((prof.r(eta) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_profile_rejects_bad_anchor() {
        let t = tol();
        let tp = TauProfile::constant(1.0, -1.0, 1.0).unwrap();
        assert!(solve_scale_profile(&tp, 0.0, 0.0, Branch::Plus, &t).is_err());
        assert!(matches!(
            solve_scale_profile(&tp, 5.0, 1.0, Branch::Plus, &t),
            Err(Error::EtaOutOfDomain { .. })
        ));
    }

    #[test]
    fn proper_metric_examples() {
        let a = GroupPoint::new(0.2, 1.0, -0.4, 2.0).unwrap();
        assert_eq!(
            metric_proper(&a, 1.0).unwrap().g,
            DenseMatrix::diagonal(&[1.0, -1.0, -1.0, -1.0])
        );
        assert_eq!(
            metric_proper(&a, -2.0).unwrap().g,
            DenseMatrix::diagonal(&[-2.0, 2.0, 2.0, 2.0])
        );
        assert!(matches!(metric_proper(&a, 0.0), Err(Error::ZeroTau { .. })));
    }

    #[test]
    fn spherical_metric_closed_form() {
        let tp = TauProfile::constant(1.0, -1.0, 1.0).unwrap();
        let prof = RadialProfile::exponential();
        let p = SphericalPoint::new(0.3, 1.0, 2.0, 0.5);
        let g = metric_spherical(&p, &tp, &prof).unwrap().g;
        let (sc, st) = (sin(1.0), sin(2.0));
        let want = DenseMatrix::diagonal(&[1.0, -1.0, -sc * sc, -sc * sc * st * st]);
        assert!(g.max_abs_diff(&want) < 1e-15);

        let tp = TauProfile::constant(3.0, -1.0, 1.0).unwrap();
        let prof = RadialProfile::new(|e| 2.0 + e, |_| 1.0);
        let p = SphericalPoint::new(0.5, PI / 2.0, PI / 2.0, 1.0);
        let g = metric_spherical(&p, &tp, &prof).unwrap().g;
        let ratio = 1.0 / 2.5;
        let want = DenseMatrix::diagonal(&[3.0 * ratio * ratio, -3.0, -3.0, -3.0]);
        assert!(g.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn pushforward_matches_closed_form() {
        let t = tol();
        let tp = TauProfile::polynomial(vec![2.0, 0.5], -1.0, 1.0).unwrap();
        let prof = RadialProfile::new(|e| 2.0 + e, |_| 1.0);
        for p in [
            SphericalPoint::new(0.5, 1.2, 0.9, 2.0),
            SphericalPoint::new(-0.7, 2.5, 2.1, 5.9),
        ] {
            let a = metric_spherical(&p, &tp, &prof).unwrap().g;
            let b = metric_spherical_pushforward(&p, &tp, &prof, &t).unwrap().g;
            assert!(a.max_abs_diff(&b) < 1e-8);
        }
    }

    #[test]
    fn structure_field_examples() {
        let t = tol();
        let prof = RadialProfile::exponential();
        let a = GroupPoint::new(0.4, -1.3, 0.7, 0.2).unwrap();
        let proper = structure_field_components(&a, Frame::Proper, &prof, &t).unwrap();
        assert_eq!(proper, quaternion_tensor());
        let at_one =
            structure_field_components(&GroupPoint::identity(), Frame::Canonical, &prof, &t)
                .unwrap();
        assert_eq!(at_one, quaternion_tensor());

        // The tangent algebra at a is X * Y = X a^-1 Y in canonical components.
        let h = quaternion_algebra();
        let canonical = structure_field_components(&a, Frame::Canonical, &prof, &t).unwrap();
        let field = crate::algebra::Algebra::from_tensor(canonical);
        let x = AlgebraElement::from([0.3, 1.0, -2.0, 0.5]);
        let y = AlgebraElement::from([-1.0, 0.25, 0.75, 2.0]);
        let a_inv = h.inverse(&a.to_element()).unwrap().unwrap();
        let oracle = h.multiply(&h.multiply(&x, &a_inv).unwrap(), &y).unwrap();
        let got = field.multiply(&x, &y).unwrap();
        assert!(got.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn spherical_structure_field_contracts_like_the_algebra() {
        let t = tol();
        let prof = RadialProfile::exponential();
        let p = SphericalPoint::new(0.2, 1.1, 0.8, 3.0);
        let a = spherical_to_canonical(&p, &prof).unwrap();
        let sph = structure_field_components(&a, Frame::Spherical, &prof, &t).unwrap();
        // product of the coordinate vectors d_chi and d_theta, mapped back to canonical components
        let jac = crate::unit_group::jacobian_spherical(&p, &prof).unwrap();
        let field = crate::algebra::Algebra::from_tensor(sph);
        let prod = field
            .multiply(&AlgebraElement::basis(4, 1), &AlgebraElement::basis(4, 2))
            .unwrap();
        let canonical = jac.mul_vec(prod.coords()).unwrap();
        let h = quaternion_algebra();
        let dchi = AlgebraElement::new(jac.column(1));
        let dtheta = AlgebraElement::new(jac.column(2));
        let a_inv = h.inverse(&a.to_element()).unwrap().unwrap();
        let oracle = h
            .multiply(&h.multiply(&dchi, &a_inv).unwrap(), &dtheta)
            .unwrap();
        for (g, o) in canonical.iter().zip(oracle.coords()) {
            assert!((g - o).abs() < 1e-10);
        }
    }

    #[test]
    fn verdict_passes_for_constant_tau() {
        let tp = TauProfile::constant(1.0, -1.0, 1.0).unwrap();
        let grid = SphericalGrid::generic(-1.0, 1.0, 3).points();
        let report = flrw_verdict(&tp, &grid, &FlrwConfig::default(), &tol()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.sign_block, Sign::Positive);
        assert_eq!(report.scale_factor_samples.len(), 3);
        for (_, a) in &report.scale_factor_samples {
            assert!((a - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn verdict_negative_tau_uses_lower_sign_block() {
        let tp = TauProfile::constant(-1.0, -1.0, 1.0).unwrap();
        let grid = SphericalGrid::generic(-1.0, 1.0, 2).points();
        let report = flrw_verdict(&tp, &grid, &FlrwConfig::default(), &tol()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.sign_block, Sign::Negative);
    }

    #[test]
    fn verdict_fails_when_chart_profile_is_wrong() {
        // Evaluate the template against a metric built with R = exp for tau = 4,
        // where g_eta_eta = 4 instead of 1.
        let tp = TauProfile::constant(4.0, -1.0, 1.0).unwrap();
        let p = SphericalPoint::new(0.0, 1.0, 1.0, 1.0);
        let g = metric_spherical(&p, &tp, &RadialProfile::exponential())
            .unwrap()
            .g;
        assert!(g.max_abs_diff(&flrw_template(&p, 2.0, Sign::Positive)) > 1.0);
    }

    #[test]
    fn verdict_propagates_singularities() {
        let tp = TauProfile::constant(1.0, -1.0, 1.0).unwrap();
        let grid = [SphericalPoint::new(0.0, 0.0, 1.0, 1.0)];
        assert!(matches!(
            flrw_verdict(&tp, &grid, &FlrwConfig::default(), &tol()),
            Err(Error::ChartSingularity(_))
        ));
    }
}
