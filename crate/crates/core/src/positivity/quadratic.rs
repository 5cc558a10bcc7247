use num_complex::Complex;

use super::{Check, FailedCondition, PositivityReport, Witness, POSITIVITY_TOL};
use crate::scalar::Real;

/// `q / Σ|terms|`, or `q` itself when every term vanishes.
fn rel<T: Real>(q: T, terms: &[T]) -> T {
    let s: T = terms.iter().map(|t| t.abs()).sum();
    if s > T::zero() {
        q / s
    } else {
        q
    }
}

/// Complex Routh–Hurwitz test for `ν² + b₁ν + b₀`: both roots have negative
/// real part iff `Δ₁ = b₁ᵣ > 0` and
/// `Δ₂ = b₁ᵣ²b₀ᵣ + b₁ᵣb₁ᵢb₀ᵢ − b₀ᵢ² > 0`.
pub fn complex_routh_hurwitz_quadratic<T: Real>(b1: Complex<T>, b0: Complex<T>) -> bool {
    let d1 = b1.re;
    let d2 = b1.re * b1.re * b0.re + b1.re * b1.im * b0.im - b0.im * b0.im;
    d1 > T::zero() && d2 > T::zero()
}

/// Closed-form positivity conditions for
/// `h(ν) = (a₁ν + a₀)/(ν² + b₁ν + b₀)`.
///
/// Stability: `b₁ᵣ > 0` and `Δ₂ > 0`. Real part: `a₁ᵢ = 0`,
/// `A = a₁ᵣb₁ᵣ − a₀ᵣ ≥ 0`, `B = a₀ᵣb₀ᵣ + a₀ᵢb₀ᵢ ≥ 0` and
/// `(a₀ᵢb₁ᵣ + a₁ᵣb₀ᵢ − a₀ᵣb₁ᵢ)² ≤ 4AB`, which together make the quartic
/// `N(ω) = Aω² + (…)ω + B`-type quadratic form non-negative. Each quantity is
/// normalized by the sum of its term magnitudes before comparison with the
/// `1e-9` tolerance.
pub fn check_positive_second_order<T: Real>(
    a1: Complex<T>,
    a0: Complex<T>,
    b1: Complex<T>,
    b0: Complex<T>,
) -> PositivityReport<T> {
    let tol = T::tol(POSITIVITY_TOL);
    if a1.norm() == T::zero() && a0.norm() == T::zero() {
        return PositivityReport::assemble(vec![Check::new(
            FailedCondition::RealPart,
            T::zero(),
            false,
            Vec::new(),
        )]);
    }
    let d1 = rel(b1.re, &[b1.re]);
    let t = [b1.re * b1.re * b0.re, b1.re * b1.im * b0.im, b0.im * b0.im];
    let d2 = rel(t[0] + t[1] - t[2], &t);
    let stab_margin = d1.min(d2);
    let stab_failed = !(d1 > tol && d2 > tol);
    let mut stab_w = Vec::new();
    if stab_failed {
        stab_w.push(Witness::coefficient(if d1 <= tol { b1.re } else { t[0] + t[1] - t[2] }));
    }

    let scale = a1.norm().max(a0.norm()).max(b1.norm()).max(b0.norm()).max(T::one());
    let a1i = a1.im.abs() / scale;
    let big_a = a1.re * b1.re - a0.re;
    let big_b = a0.re * b0.re + a0.im * b0.im;
    let lin = a0.im * b1.re + a1.re * b0.im - a0.re * b1.im;
    let ma = rel(big_a, &[a1.re * b1.re, a0.re]);
    let mb = rel(big_b, &[a0.re * b0.re, a0.im * b0.im]);
    let disc = T::lit(4.0) * big_a * big_b - lin * lin;
    let md = rel(disc, &[T::lit(4.0) * big_a * big_b, lin * lin]);
    let mut real_w = Vec::new();
    let a1i_bad = a1i >= T::tol(1e-12);
    if a1i_bad {
        real_w.push(Witness::coefficient(a1.im));
    }
    if ma < -tol {
        real_w.push(Witness::coefficient(big_a));
    }
    if mb < -tol {
        real_w.push(Witness::coefficient(big_b));
    }
    if md < -tol {
        real_w.push(Witness::coefficient(disc));
    }
    let real_margin = ma.min(mb).min(md).min(if a1i_bad { -a1i } else { T::infinity() });
    let real_failed = !real_w.is_empty();

    PositivityReport::assemble(vec![
        Check::new(FailedCondition::PoleLocation, stab_margin, stab_failed, stab_w),
        Check::new(FailedCondition::RealPart, real_margin, real_failed, real_w),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn prop3_examples() {
        let one = z(1.0, 0.0);
        let r = check_positive_second_order(one, one, one, one);
        assert!(r.is_positive, "{r:?}");
        let r = check_positive_second_order(z(0.0, 0.0), one, z(2.0, 0.0), one);
        assert!(!r.is_positive);
        assert_eq!(r.failed_condition, FailedCondition::RealPart);
        assert!(r.witnesses.iter().any(|w| w.value.re == -1.0));
        let r = check_positive_second_order(one, one, one, z(0.0, 1.0));
        assert!(!r.is_positive);
        assert_eq!(r.failed_condition, FailedCondition::PoleLocation);
        assert_eq!(r.witnesses[0].value.re, -1.0);
    }

    #[test]
    fn zero_function_is_trivially_positive() {
        let zero = z(0.0, 0.0);
        assert!(check_positive_second_order(zero, zero, z(-1.0, 0.0), zero).is_positive);
    }

    #[test]
    fn imaginary_leading_numerator_is_rejected() {
        let one = z(1.0, 0.0);
        let r = check_positive_second_order(z(1.0, 0.1), one, z(3.0, 0.0), z(2.0, 0.0));
        assert!(!r.is_positive);
        assert_eq!(r.failed_condition, FailedCondition::RealPart);
    }

    #[test]
    fn routh_hurwitz_examples() {
        assert!(complex_routh_hurwitz_quadratic(z(2.0, 0.0), z(1.0, 0.0)));
        assert!(complex_routh_hurwitz_quadratic(z(2.0, 0.0), z(1.0, 1.0)));
        assert!(!complex_routh_hurwitz_quadratic(z(1.0, 0.0), z(0.0, 1.0)));
        assert!(!complex_routh_hurwitz_quadratic(z(-1.0, 0.0), z(1.0, 0.0)));
    }
}
