//! Local synthesis bounds on the source positivity index `y^s` and the
//! compliance test against a broadcast grid code.

use serde::Serialize;

use super::{modified_source, rotated_source, GenericSecondOrder};
use crate::error::{Error, Result};
use crate::network::GridCode;
use crate::positivity::check_positive_siso;
use crate::region::{HalfPlaneRegion, RegionKind};
use crate::scalar::Real;

/// Result of the shifted-LHP bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LhpBound<T> {
    /// `α ≥ -c₀/c₁` (and, at equality, a positive constant term).
    pub feasible: bool,
    /// `min(first, second)`; `None` when infeasible.
    pub y_s_max: Option<T>,
    /// `(d₁ + α − c₀/c₁)/c₁` (non-strict).
    pub first: T,
    /// `(α² + d₁α + d₀)/(c₁α + c₀)` (strict); absent when `c₁α + c₀ = 0`.
    pub second: Option<T>,
}

/// Upper bound on `y^s` for the shifted half-plane `Re s ≤ α`.
pub fn bound_lhp<T: Real>(g: &GenericSecondOrder<T>, alpha: T) -> LhpBound<T> {
    let first = (g.d1 + alpha - g.c0 / g.c1) / g.c1;
    let lin = g.c1 * alpha + g.c0;
    let konst = alpha * alpha + g.d1 * alpha + g.d0;
    let scale = (g.c1 * alpha).abs() + g.c0.abs();
    let infeasible = LhpBound {
        feasible: false,
        y_s_max: None,
        first,
        second: None,
    };
    if lin.abs() <= T::tol(1e-12) * scale {
        // boundary α = -c₀/c₁: the constant term no longer depends on y
        if konst > T::zero() {
            return LhpBound {
                feasible: true,
                y_s_max: Some(first),
                first,
                second: None,
            };
        }
        return infeasible;
    }
    if lin < T::zero() {
        return infeasible;
    }
    let second = konst / lin;
    LhpBound {
        feasible: true,
        y_s_max: Some(first.min(second)),
        first,
        second: Some(second),
    }
}

/// Upper bound on `y^s` for the sector of half-angle `β` (both terms strict).
pub fn bound_sector<T: Real>(g: &GenericSecondOrder<T>, beta: T) -> T {
    let (s, c) = (beta.sin(), beta.cos());
    let first = g.d0 * s / g.c0;
    let second = (g.c1 * g.d1 - g.c0) / (g.c1 * g.c1 * s) - g.d0 * c * c / (g.c0 * s);
    first.min(second)
}

/// Smallest strip half-width `γ̄` for which the rotated source is positive
/// with `y^s = 0`.
pub fn bound_hs<T: Real>(g: &GenericSecondOrder<T>) -> T {
    let r = g.c0 / g.c1;
    let rad = r * r - r * g.d1 + g.d0;
    rad.max(T::zero()).sqrt()
}

/// Largest `y` for which `modified_source(rotated_source(g, region), y)` is
/// positive, by bracketing and bisection on the exact SISO test (feasible
/// values form a downward-closed interval). `None` if no `y` in
/// `[-2^40, ∞)` works; `Some(∞)` if every tried value works.
pub fn bound_numeric<T: Real>(g: &GenericSecondOrder<T>, region: &HalfPlaneRegion<T>) -> Result<Option<T>> {
    let gh = rotated_source(g, region)?;
    let positive = |y: T| -> Result<bool> {
        match modified_source(&gh, y) {
            Ok(h) => Ok(check_positive_siso(&h)?.is_positive),
            Err(Error::DegenerateFeedback) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let mut lo = T::zero();
    if !positive(lo)? {
        let mut found = None;
        let mut y = -T::one();
        for _ in 0..40 {
            if positive(y)? {
                found = Some(y);
                break;
            }
            y = y + y;
        }
        match found {
            Some(y) => lo = y,
            None => return Ok(None),
        }
    }
    let mut hi = lo.abs().max(T::one());
    let mut bracketed = false;
    for _ in 0..60 {
        if !positive(hi)? {
            bracketed = true;
            break;
        }
        lo = hi;
        hi = hi + hi;
    }
    if !bracketed {
        return Ok(Some(T::infinity()));
    }
    for _ in 0..200 {
        if hi - lo <= T::tol(1e-12) * lo.abs().max(T::one()) {
            break;
        }
        let mid = (lo + hi) * T::lit(0.5);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Lhp,
    Sector,
    HorizontalStrip,
    Numeric,
}

/// Region-specific admissible range for a source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceBound<T> {
    pub method: BoundMethod,
    pub feasible: bool,
    /// Supremum of admissible `y^s`.
    pub y_s_max: Option<T>,
    /// The supremum itself is excluded.
    pub strict: bool,
    /// Strip threshold `γ̄` (horizontal strip only).
    pub gamma_bar: Option<T>,
}

pub fn source_upper_bound<T: Real>(g: &GenericSecondOrder<T>, region: &HalfPlaneRegion<T>) -> Result<SourceBound<T>> {
    Ok(match region.kind() {
        RegionKind::ShiftedLhp { alpha } => {
            let b = bound_lhp(g, alpha);
            let strict = b.second.is_some_and(|s| s <= b.first);
            SourceBound {
                method: BoundMethod::Lhp,
                feasible: b.feasible,
                y_s_max: b.y_s_max,
                strict,
                gamma_bar: None,
            }
        }
        RegionKind::Sector { beta } => {
            let y = bound_sector(g, beta);
            SourceBound {
                method: BoundMethod::Sector,
                feasible: y.is_finite(),
                y_s_max: Some(y),
                strict: true,
                gamma_bar: None,
            }
        }
        RegionKind::HorizontalStrip { gamma } => {
            let gb = bound_hs(g);
            let ok = gamma > gb;
            SourceBound {
                method: BoundMethod::HorizontalStrip,
                feasible: ok,
                y_s_max: if ok { Some(T::zero()) } else { None },
                strict: false,
                gamma_bar: Some(gb),
            }
        }
        RegionKind::General => {
            let y = bound_numeric(g, region)?;
            SourceBound {
                method: BoundMethod::Numeric,
                feasible: y.is_some(),
                y_s_max: y,
                strict: false,
                gamma_bar: None,
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    None,
    Network,
    Device,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplianceReport<T> {
    pub compliant: bool,
    /// Chosen positivity index (the largest admissible value).
    pub y_s: Option<T>,
    pub bound: SourceBound<T>,
    /// Grid-code floor `-λ_min(Ξ)`.
    pub network_bound: T,
    pub binding: Binding,
    /// Margin of the positivity report at the chosen `y^s`.
    pub positivity_margin: Option<T>,
}

/// Relative back-off below a strict supremum when choosing `y^s`.
pub const STRICT_BACKOFF: f64 = 1e-6;

/// Largest usable `y^s` from a bound: the supremum, backed off when strict;
/// 0 when there is no finite feasible value.
pub fn admissible_index<T: Real>(bound: &SourceBound<T>) -> T {
    match bound.y_s_max.filter(|y| bound.feasible && y.is_finite()) {
        Some(y) if bound.strict => y - T::lit(STRICT_BACKOFF) * y.abs().max(T::lit(1e-3)),
        Some(y) => y,
        None => T::zero(),
    }
}

/// Decides whether a source can meet the grid code and picks its `y^s`.
pub fn check_compliance<T: Real>(g: &GenericSecondOrder<T>, gc: &GridCode<T>) -> Result<ComplianceReport<T>> {
    if !gc.ll_assumption_ok {
        return Err(Error::InvalidGridCode(
            "grid code issued with violated load-side assumption".into(),
        ));
    }
    let floor = gc.bound()?;
    let bound = source_upper_bound(g, &gc.region)?;
    let fail = |binding| ComplianceReport {
        compliant: false,
        y_s: None,
        bound,
        network_bound: floor,
        binding,
        positivity_margin: None,
    };
    let Some(ymax) = bound.y_s_max.filter(|_| bound.feasible) else {
        return Ok(fail(Binding::Device));
    };
    let y_s = if ymax.is_finite() { admissible_index(&bound) } else { floor.max(T::zero()) };
    let tol = T::tol(1e-9);
    if y_s < floor - tol {
        return Ok(fail(Binding::Network));
    }
    let rep = check_positive_siso(&modified_source(&rotated_source(g, &gc.region)?, y_s)?)?;
    if !rep.is_positive {
        return Ok(ComplianceReport {
            positivity_margin: Some(rep.margin),
            ..fail(Binding::Device)
        });
    }
    Ok(ComplianceReport {
        compliant: true,
        y_s: Some(y_s),
        bound,
        network_bound: floor,
        binding: Binding::None,
        positivity_margin: Some(rep.margin),
    })
}
