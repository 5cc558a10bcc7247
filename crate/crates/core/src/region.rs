//! Pole-placement regions and the affine map between the s-plane region and
//! the closed left ν-half-plane.
//!
//! A [`HalfPlaneRegion`] `(θ₀, ω₀, σ₀)` stands for the symmetric intersection
//! of the half-planes `Re{e^{-jθ₀}(s - jω₀)} ≤ σ₀` and
//! `Re{e^{jθ₀}(s + jω₀)} ≤ σ₀`, so membership is invariant under conjugation.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// Absolute margin tolerance used for the membership boolean and the
/// boundary flag.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Result of a membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership<T> {
    pub inside: bool,
    /// `σ₀ - max(real parts)`; non-negative inside the region.
    pub margin: T,
    /// `|margin| < 1e-9`.
    pub boundary: bool,
    /// Index of the part attaining the margin (0 for a single half-plane).
    pub binding_part: usize,
}

impl<T: Real> Membership<T> {
    fn from_margin(margin: T, binding_part: usize) -> Self {
        let tol = T::tol(BOUNDARY_TOL);
        Self {
            inside: margin >= -tol,
            margin,
            boundary: margin.abs() < tol,
            binding_part,
        }
    }
}

/// Generalized half-plane region `D(θ₀, ω₀, σ₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPlaneRegion<T> {
    theta0: T,
    omega0: T,
    sigma0: T,
}

/// Shape family of a half-plane region, recovered from its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionKind<T> {
    ShiftedLhp { alpha: T },
    Sector { beta: T },
    HorizontalStrip { gamma: T },
    General,
}

impl<T: Real> HalfPlaneRegion<T> {
    /// Raw constructor; requires `θ₀ ∈ [0, π/2]`, `ω₀ ≥ 0`, `σ₀ ≤ 0`.
    pub fn new(theta0: T, omega0: T, sigma0: T) -> Result<Self> {
        let slack = T::tol(1e-12);
        if !(theta0.is_finite() && omega0.is_finite() && sigma0.is_finite()) {
            return Err(Error::InvalidRegion("non-finite parameter".into()));
        }
        if theta0 < -slack || theta0 > T::FRAC_PI_2() + slack {
            return Err(Error::InvalidRegion(format!(
                "theta0 = {theta0} outside [0, pi/2]"
            )));
        }
        if omega0 < T::zero() {
            return Err(Error::InvalidRegion(format!("omega0 = {omega0} < 0")));
        }
        if sigma0 > T::zero() {
            return Err(Error::InvalidRegion(format!("sigma0 = {sigma0} > 0")));
        }
        let theta0 = theta0.max(T::zero()).min(T::FRAC_PI_2());
        Ok(Self {
            theta0,
            omega0,
            sigma0,
        })
    }

    /// `Re{s} ≤ α`.
    pub fn shifted_lhp(alpha: T) -> Result<Self> {
        if !(alpha <= T::zero()) {
            return Err(Error::InvalidRegion(format!("alpha = {alpha} must be <= 0")));
        }
        Self::new(T::zero(), T::zero(), alpha)
    }

    /// Sector of half-angle `β` around the negative real axis.
    pub fn sector(beta: T) -> Result<Self> {
        if !(beta > T::zero() && beta < T::FRAC_PI_2()) {
            return Err(Error::InvalidRegion(format!(
                "beta = {beta} outside (0, pi/2)"
            )));
        }
        Self::new(T::FRAC_PI_2() - beta, T::zero(), T::zero())
    }

    /// `|Im s| ≤ γ`.
    pub fn horizontal_strip(gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(Error::InvalidRegion(format!("gamma = {gamma} must be > 0")));
        }
        Self::new(T::FRAC_PI_2(), gamma, T::zero())
    }

    pub fn theta0(&self) -> T {
        self.theta0
    }

    pub fn omega0(&self) -> T {
        self.omega0
    }

    pub fn sigma0(&self) -> T {
        self.sigma0
    }

    pub fn kind(&self) -> RegionKind<T> {
        let eps = T::tol(1e-12);
        let zero_theta = self.theta0.abs() <= eps;
        let quarter = (self.theta0 - T::FRAC_PI_2()).abs() <= eps;
        if zero_theta && self.omega0 == T::zero() {
            RegionKind::ShiftedLhp { alpha: self.sigma0 }
        } else if quarter && self.sigma0 == T::zero() && self.omega0 > T::zero() {
            RegionKind::HorizontalStrip { gamma: self.omega0 }
        } else if !zero_theta && !quarter && self.omega0 == T::zero() && self.sigma0 == T::zero() {
            RegionKind::Sector {
                beta: T::FRAC_PI_2() - self.theta0,
            }
        } else {
            RegionKind::General
        }
    }

    /// Short human-readable label, e.g. `lhp(alpha=-8)`.
    pub fn label(&self) -> String {
        match self.kind() {
            RegionKind::ShiftedLhp { alpha } => format!("lhp(alpha={alpha})"),
            RegionKind::Sector { beta } => format!("sector(beta={beta})"),
            RegionKind::HorizontalStrip { gamma } => format!("hstrip(gamma={gamma})"),
            RegionKind::General => format!(
                "halfplane(theta0={}, omega0={}, sigma0={})",
                self.theta0, self.omega0, self.sigma0
            ),
        }
    }

    /// Real parts `(Re{e^{-jθ₀}(s - jω₀)}, Re{e^{jθ₀}(s + jω₀)})`.
    pub fn half_plane_values(&self, s: Complex<T>) -> (T, T) {
        let jw = Complex::new(T::zero(), self.omega0);
        let r = cis(self.theta0);
        ((r.conj() * (s - jw)).re, (r * (s + jw)).re)
    }

    pub fn margin(&self, s: Complex<T>) -> T {
        let (a, b) = self.half_plane_values(s);
        self.sigma0 - a.max(b)
    }

    /// `ν = e^{-jθ₀}(s - jω₀) - σ₀`.
    pub fn map_to_nu(&self, s: Complex<T>) -> Complex<T> {
        cis(self.theta0).conj() * (s - Complex::new(T::zero(), self.omega0))
            - Complex::new(self.sigma0, T::zero())
    }

    /// `s = e^{jθ₀}(ν + σ₀) + jω₀`.
    pub fn map_to_s(&self, nu: Complex<T>) -> Complex<T> {
        cis(self.theta0) * (nu + Complex::new(self.sigma0, T::zero()))
            + Complex::new(T::zero(), self.omega0)
    }

    /// Coefficients `(a, b)` with `s = a·ν + b`.
    pub fn affine_map(&self) -> (Complex<T>, Complex<T>) {
        let a = cis(self.theta0);
        (
            a,
            a * Complex::new(self.sigma0, T::zero()) + Complex::new(T::zero(), self.omega0),
        )
    }
}

/// Something poles can be tested against: a single half-plane or an
/// intersection of several.
pub trait Region<T: Real> {
    fn parts(&self) -> &[HalfPlaneRegion<T>];

    /// Membership; for several parts the margin is the minimum, ties going
    /// to the earliest part.
    fn contains(&self, s: Complex<T>) -> Membership<T> {
        let mut best = T::infinity();
        let mut idx = 0;
        for (k, p) in self.parts().iter().enumerate() {
            let m = p.margin(s);
            if m < best {
                best = m;
                idx = k;
            }
        }
        Membership::from_margin(best, idx)
    }

    fn part_margins(&self, s: Complex<T>) -> Vec<T> {
        self.parts().iter().map(|p| p.margin(s)).collect()
    }
}

impl<T: Real> Region<T> for HalfPlaneRegion<T> {
    fn parts(&self) -> &[HalfPlaneRegion<T>] {
        std::slice::from_ref(self)
    }
}

/// Intersection of half-plane regions, kept in user order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeRegion<T> {
    parts: Vec<HalfPlaneRegion<T>>,
}

impl<T: Real> CompositeRegion<T> {
    pub fn new(parts: Vec<HalfPlaneRegion<T>>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidRegion("composite region with no parts".into()));
        }
        Ok(Self { parts })
    }

    pub fn label(&self) -> String {
        self.parts
            .iter()
            .map(HalfPlaneRegion::label)
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

impl<T: Real> From<HalfPlaneRegion<T>> for CompositeRegion<T> {
    fn from(r: HalfPlaneRegion<T>) -> Self {
        Self { parts: vec![r] }
    }
}

impl<T: Real> Region<T> for CompositeRegion<T> {
    fn parts(&self) -> &[HalfPlaneRegion<T>] {
        &self.parts
    }
}
