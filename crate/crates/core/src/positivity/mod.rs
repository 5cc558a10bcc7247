//! Positive-function and positive-real verification.
//!
//! * [`check_positive_siso`]: exact test of the three positive-function
//!   conditions for a complex-coefficient scalar rational function.
//! * [`check_pr_real_matrix`]: positive realness of a real 2x2 block matrix.
//! * [`check_positive_matrix_sampled`]: sampled Hermitian test for square
//!   matrices of rational functions.
//! * [`check_positive_second_order`] and [`complex_routh_hurwitz_quadratic`]:
//!   closed-form tests for `(a₁ν + a₀)/(ν² + b₁ν + b₀)`.
//! * [`nyquist_disk_check`]: graphical disk test with encirclement count.

mod matrix;
mod nyquist;
mod quadratic;

use num_complex::Complex;
use serde::Serialize;

use crate::cpoly::{cluster_roots, CPoly, CRational};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use matrix::{check_positive_matrix_sampled, check_pr_real_matrix, full_axis_grid, log_grid};
pub use nyquist::{nyquist_disk_check, NyquistResult};
pub use quadratic::{check_positive_second_order, complex_routh_hurwitz_quadratic};

/// Absolute tolerance on pole real parts and on non-negativity margins.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Relative tolerance for grouping imaginary-axis poles.
pub const IMAG_POLE_CLUSTER_TOL: f64 = 1e-6;
/// Relative size below which a coefficient of `N` counts as cancellation noise.
pub const NOISE_REL_TOL: f64 = 1e-12;
/// Maximum number of witnesses attached to a report.
pub const MAX_WITNESSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedCondition {
    None,
    PoleLocation,
    RealPart,
    ImaginaryPoleMultiplicity,
    Residue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `at` is `(ω, 0)`; `value` is the function (or eigenvalue) there.
    Frequency,
    /// `at` is a pole; `value` is its real part or residue.
    Pole,
    /// `at` is unused; `value` is the offending algebraic quantity.
    Coefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct Witness<T> {
    pub kind: WitnessKind,
    pub at: Complex<T>,
    pub value: Complex<T>,
}

impl<T: Real> Witness<T> {
    pub fn frequency(omega: T, value: Complex<T>) -> Self {
        Self {
            kind: WitnessKind::Frequency,
            at: Complex::new(omega, T::zero()),
            value,
        }
    }

    pub fn pole(p: Complex<T>, value: Complex<T>) -> Self {
        Self {
            kind: WitnessKind::Pole,
            at: p,
            value,
        }
    }

    pub fn coefficient(value: T) -> Self {
        Self {
            kind: WitnessKind::Coefficient,
            at: Complex::new(T::zero(), T::zero()),
            value: Complex::new(value, T::zero()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct PositivityReport<T> {
    pub is_positive: bool,
    pub failed_condition: FailedCondition,
    pub witnesses: Vec<Witness<T>>,
    /// Minimum over the individual checks; negative exactly when a check
    /// fails by more than the tolerance.
    pub margin: T,
    /// Some check landed inside the `±1e-9` indeterminate band.
    pub boundary: bool,
}

impl<T: Real> PositivityReport<T> {
    pub(crate) fn assemble(checks: Vec<Check<T>>) -> Self {
        let tol = T::tol(POSITIVITY_TOL);
        let margin = checks.iter().map(|c| c.margin).fold(T::infinity(), T::min);
        let margin = if margin.is_finite() { margin } else { T::zero() };
        let boundary = checks.iter().any(|c| c.margin.abs() <= tol);
        let failing = checks.into_iter().find(|c| c.failed);
        match failing {
            Some(c) => Self {
                is_positive: false,
                failed_condition: c.condition,
                witnesses: c.witnesses,
                margin,
                boundary,
            },
            None => Self {
                is_positive: true,
                failed_condition: FailedCondition::None,
                witnesses: Vec::new(),
                margin,
                boundary,
            },
        }
    }
}

/// Outcome of one condition inside a positivity test.
#[derive(Debug, Clone)]
pub(crate) struct Check<T> {
    pub condition: FailedCondition,
    pub failed: bool,
    pub margin: T,
    pub witnesses: Vec<Witness<T>>,
}

impl<T: Real> Check<T> {
    pub fn new(condition: FailedCondition, margin: T, failed: bool, witnesses: Vec<Witness<T>>) -> Self {
        Self {
            condition,
            failed,
            margin,
            witnesses,
        }
    }
}

/// Splits poles into those strictly off the imaginary axis and clusters on it.
pub(crate) fn split_poles<T: Real>(
    poles: &[Complex<T>],
) -> (Vec<Complex<T>>, Vec<crate::cpoly::RootCluster<T>>) {
    let tol = T::tol(POSITIVITY_TOL);
    let (on, off): (Vec<_>, Vec<_>) = poles.iter().partition(|p| p.re.abs() <= tol);
    let clusters = cluster_roots(&on, T::tol(IMAG_POLE_CLUSTER_TOL));
    (off, clusters)
}

/// Condition (a): no pole with real part above the tolerance.
pub(crate) fn pole_location_check<T: Real>(off_axis: &[Complex<T>]) -> Check<T> {
    let tol = T::tol(POSITIVITY_TOL);
    let worst = off_axis.iter().map(|p| p.re).fold(T::neg_infinity(), T::max);
    let margin = if worst.is_finite() { -worst } else { T::infinity() };
    let witnesses: Vec<_> = off_axis
        .iter()
        .filter(|p| p.re > tol)
        .take(MAX_WITNESSES)
        .map(|&p| Witness::pole(p, Complex::new(p.re, T::zero())))
        .collect();
    Check::new(
        FailedCondition::PoleLocation,
        margin,
        !witnesses.is_empty(),
        witnesses,
    )
}

/// `N(ω) = Re{num(jω)·conj(den(jω))}` as a real polynomial in `ω`.
pub fn real_part_polynomial<T: Real>(h: &CRational<T>) -> CPoly<T> {
    let a = h.num().on_imaginary_axis();
    let b = h.den().on_imaginary_axis();
    (&a * &b.conj_coeffs()).re_coeffs()
}

/// Candidate points at which the sign of a real polynomial is examined:
/// real parts of its roots and of its critical points, midpoints between
/// them, an outer point on each side, and `ω = 0`.
fn sign_test_points<T: Real>(n: &CPoly<T>) -> Result<Vec<T>> {
    let mut cands: Vec<T> = vec![T::zero()];
    if n.degree().unwrap_or(0) >= 1 {
        cands.extend(n.roots()?.iter().map(|z| z.re));
        let dn = n.derivative();
        if dn.degree().unwrap_or(0) >= 1 {
            cands.extend(dn.roots()?.iter().map(|z| z.re));
        }
    }
    cands.retain(|x| x.is_finite());
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    cands.dedup();
    let mut pts = cands.clone();
    for w in cands.windows(2) {
        pts.push((w[0] + w[1]) * T::lit(0.5));
    }
    let lo = *cands.first().unwrap_or(&T::zero());
    let hi = *cands.last().unwrap_or(&T::zero());
    pts.push(hi + T::one());
    pts.push(lo - T::one());
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    Ok(pts)
}

/// Zeroes coefficients of `N` that are rounding residue of a cancellation,
/// measured against `‖num‖·‖den‖`. Lossless functions built by feedback
/// (the modified CPL) otherwise get a random-sign `N ≈ 1e-17`.
fn drop_rounding_noise<T: Real>(n: CPoly<T>, scale: T) -> CPoly<T> {
    let floor = T::tol(NOISE_REL_TOL) * scale;
    CPoly::new(
        n.coeffs()
            .iter()
            .map(|c| if c.re.abs() <= floor { Complex::new(T::zero(), T::zero()) } else { Complex::new(c.re, T::zero()) })
            .collect(),
    )
}

/// `N(ω) / (‖N‖ (1+ω²)^{d/2})`.
fn normalized_real_part<T: Real>(n: &CPoly<T>, omega: T) -> T {
    let d = n.degree().unwrap_or(0);
    let scale = n.norm_max();
    if scale == T::zero() {
        return T::zero();
    }
    let w = Complex::new(omega, T::zero());
    let growth = (T::one() + omega * omega).powf(T::lit(d as f64) * T::lit(0.5));
    n.eval(w).re / (scale * growth)
}

/// Condition (b), decided from the real polynomial `N(ω)`.
fn real_part_check<T: Real>(h: &CRational<T>) -> Result<Check<T>> {
    let tol = T::tol(POSITIVITY_TOL);
    let n = drop_rounding_noise(real_part_polynomial(h), h.num().norm_max() * h.den().norm_max());
    if n.is_zero() {
        return Ok(Check::new(FailedCondition::RealPart, T::zero(), false, Vec::new()));
    }
    let d = n.degree().unwrap_or(0);
    let lead = n.leading().re / n.norm_max();
    let mut margin = lead.min(if d % 2 == 1 { -lead } else { lead });
    let mut failing: Vec<(T, T)> = Vec::new();
    for w in sign_test_points(&n)? {
        let v = normalized_real_part(&n, w);
        margin = margin.min(v);
        if v < -tol {
            failing.push((v, w));
        }
    }
    failing.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    });
    let witnesses: Vec<_> = failing
        .iter()
        .take(MAX_WITNESSES)
        .map(|&(v, w)| {
            let value = h
                .eval(Complex::new(T::zero(), w))
                .unwrap_or(Complex::new(v, T::zero()));
            Witness::frequency(w, value)
        })
        .collect();
    let failed = margin < -tol;
    Ok(Check::new(FailedCondition::RealPart, margin, failed, witnesses))
}

/// Conditions (c): imaginary-axis poles simple with real non-negative residue.
fn imaginary_pole_checks<T: Real>(
    h: &CRational<T>,
    clusters: &[crate::cpoly::RootCluster<T>],
) -> Vec<Check<T>> {
    let tol = T::tol(POSITIVITY_TOL);
    let mut mult = Vec::new();
    let mut res_w = Vec::new();
    let mut res_margin = T::infinity();
    for c in clusters {
        let p = Complex::new(T::zero(), c.center.im);
        if c.multiplicity > 1 {
            mult.push(Witness::pole(p, Complex::new(T::lit(c.multiplicity as f64), T::zero())));
            continue;
        }
        match h.residue_at(c.center) {
            Ok(k) => {
                let mag = k.norm();
                let m = if mag == T::zero() {
                    T::zero()
                } else if k.im.abs() >= tol * mag {
                    -(k.im.abs() / mag)
                } else {
                    k.re / mag
                };
                res_margin = res_margin.min(m);
                if m < -tol {
                    res_w.push(Witness::pole(p, k));
                }
            }
            Err(_) => mult.push(Witness::pole(p, Complex::new(T::lit(2.0), T::zero()))),
        }
    }
    let mult_failed = !mult.is_empty();
    let res_failed = !res_w.is_empty();
    mult.truncate(MAX_WITNESSES);
    res_w.truncate(MAX_WITNESSES);
    vec![
        Check::new(
            FailedCondition::ImaginaryPoleMultiplicity,
            if mult_failed { -T::one() } else { T::infinity() },
            mult_failed,
            mult,
        ),
        Check::new(FailedCondition::Residue, res_margin, res_failed, res_w),
    ]
}

/// Exact positive-function test of a proper scalar rational function.
///
/// Condition (b) is decided from the real polynomial
/// `N(ω) = Re{num(jω)·conj(den(jω))}`: its sign is examined at every real
/// root and critical point, between them and beyond them, so no interval on
/// which `N` is negative can be skipped.
pub fn check_positive_siso<T: Real>(h: &CRational<T>) -> Result<PositivityReport<T>> {
    if !h.is_proper() {
        return Err(Error::NonProper);
    }
    if h.num().is_zero() {
        return Ok(PositivityReport::assemble(vec![Check::new(
            FailedCondition::RealPart,
            T::zero(),
            false,
            Vec::new(),
        )]));
    }
    let poles = h.poles()?;
    let (off, clusters) = split_poles(&poles);
    let mut checks = vec![pole_location_check(&off), real_part_check(h)?];
    checks.extend(imaginary_pole_checks(h, &clusters));
    Ok(PositivityReport::assemble(checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn z(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn integrator_is_positive() {
        let r = check_positive_siso(&CRational::from_real(&[1.0], &[0.0, 1.0]).unwrap()).unwrap();
        assert!(r.is_positive);
        assert_eq!(r.failed_condition, FailedCondition::None);
    }

    #[test]
    fn first_order_lead_is_positive() {
        let h = CRational::from_real(&[1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        let r = check_positive_siso(&h).unwrap();
        assert!(r.is_positive, "{r:?}");
        assert!(r.margin > 0.0 || r.boundary);
    }

    #[test]
    fn double_lag_fails_with_witness_at_two() {
        let h = CRational::<f64>::from_real(&[1.0], &[1.0, 2.0, 1.0]).unwrap();
        let r = check_positive_siso(&h).unwrap();
        assert!(!r.is_positive);
        assert_eq!(r.failed_condition, FailedCondition::RealPart);
        let w = r
            .witnesses
            .iter()
            .find(|w| (w.at.re - 2.0).abs() < 1e-12)
            .expect("witness at omega = 2");
        assert_relative_eq!(w.value.re, -3.0 / 25.0, epsilon = 1e-14);
        assert!(r.margin < 0.0);
    }

    #[test]
    fn imaginary_simple_pole_is_positive() {
        let h = CRational::new(CPoly::one(), CPoly::new(vec![z(0.0, -1.0), z(1.0, 0.0)])).unwrap();
        assert!(check_positive_siso(&h).unwrap().is_positive);
    }

    #[test]
    fn unstable_pole_is_reported() {
        let h = CRational::from_real(&[1.0], &[-2.0, 1.0]).unwrap();
        let r = check_positive_siso(&h).unwrap();
        assert_eq!(r.failed_condition, FailedCondition::PoleLocation);
        assert_relative_eq!(r.witnesses[0].at.re, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn double_imaginary_pole_is_rejected() {
        // ν/(ν²+1)² has Re = 0 on the axis and double poles at ±j
        let h = CRational::from_real(&[0.0, 1.0], &[1.0, 0.0, 2.0, 0.0, 1.0]).unwrap();
        let r = check_positive_siso(&h).unwrap();
        assert!(!r.is_positive);
        assert_eq!(r.failed_condition, FailedCondition::ImaginaryPoleMultiplicity);
        // 1/ν² already fails the real-part condition
        let h = CRational::from_real(&[1.0], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(check_positive_siso(&h).unwrap().failed_condition, FailedCondition::RealPart);
    }

    #[test]
    fn negative_residue_is_rejected() {
        let h = CRational::from_real(&[-1.0], &[0.0, 1.0]).unwrap();
        let r = check_positive_siso(&h).unwrap();
        assert!(!r.is_positive);
        // -1/ν has Re = 0 on the axis, so only the residue condition trips
        assert_eq!(r.failed_condition, FailedCondition::Residue);
    }

    #[test]
    fn non_proper_is_an_error() {
        let h = CRational::from_real(&[0.0, 0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(check_positive_siso(&h), Err(Error::NonProper));
    }

    #[test]
    fn rotation_breaks_positivity() {
        let h = CRational::from_real(&[1.0], &[0.0, 1.0]).unwrap();
        assert!(check_positive_siso(&h).unwrap().is_positive);
        let rot = h.rotate(3.0 * std::f64::consts::FRAC_PI_4);
        assert!(!check_positive_siso(&rot).unwrap().is_positive);
    }

    #[test]
    fn single_precision_check() {
        let good = CRational::<f32>::from_real(&[1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        assert!(check_positive_siso(&good).unwrap().is_positive);
        let bad = CRational::<f32>::from_real(&[1.0], &[1.0, 2.0, 1.0]).unwrap();
        assert!(!check_positive_siso(&bad).unwrap().is_positive);
    }
}
