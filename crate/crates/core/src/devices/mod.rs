//! DC-microgrid device models: generic second-order source form, converter
//! coefficient maps, constant-power loads, and the rotated / loop-transformed
//! subsystems used by the decentralized certificate.

mod equilibrium;
mod synthesis;

use num_complex::Complex;
use serde::Serialize;

use crate::cpoly::{CPoly, CRational};
use crate::error::{Error, Result};
use crate::positivity::check_positive_siso;
use crate::region::HalfPlaneRegion;
use crate::scalar::{cis, cos_snapped, sin_snapped, Real};

pub use equilibrium::{equilibrium_solve, Equilibrium, EQ_MAX_ITER, EQ_TOL};
pub use synthesis::{
    admissible_index, bound_hs, bound_lhp, bound_numeric, bound_sector, check_compliance, source_upper_bound,
    Binding, BoundMethod, ComplianceReport, LhpBound, SourceBound, STRICT_BACKOFF,
};

/// `G(s) = (c₁s + c₀)/(s² + d₁s + d₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenericSecondOrder<T> {
    pub c1: T,
    pub c0: T,
    pub d1: T,
    pub d0: T,
}

impl<T: Real> GenericSecondOrder<T> {
    pub fn new(c1: T, c0: T, d1: T, d0: T) -> Self {
        Self { c1, c0, d1, d0 }
    }

    /// `c₁ > 0` and `c₀ > 0`.
    pub fn is_valid(&self) -> bool {
        self.c1 > T::zero() && self.c0 > T::zero()
    }

    pub fn tf(&self) -> CRational<T> {
        CRational::from_real(&[self.c0, self.c1], &[self.d0, self.d1, T::one()])
            .expect("monic denominator")
    }
}

/// Energy-storage unit behind a boost converter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssBoostParams<T> {
    pub c: T,
    pub e: T,
    pub u_r: T,
    pub r_d: T,
    pub kp: T,
    pub ki: T,
}

/// Energy-storage unit behind a buck converter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssBuckParams<T> {
    pub c: T,
    pub e: T,
    pub u_r: T,
    pub r_d: T,
    pub kp: T,
    pub ki: T,
}

/// PV unit at a fixed operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PvParams<T> {
    pub c: T,
    pub kp: T,
    pub ki: T,
    pub u_r_pv: T,
    pub i_pv_star: T,
    /// Incremental conductance of the panel at the operating point.
    pub g_pv_star: T,
}

/// Constant-power load with its input capacitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CplParams<T> {
    pub c_l: T,
    pub p: T,
}

/// Device attached to a network node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Device<T> {
    EssBoost(EssBoostParams<T>),
    EssBuck(EssBuckParams<T>),
    Pv(PvParams<T>),
    Cpl(CplParams<T>),
}

impl<T: Real> Device<T> {
    pub fn is_source(&self) -> bool {
        !matches!(self, Device::Cpl(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Device::EssBoost(_) => "ess_boost",
            Device::EssBuck(_) => "ess_buck",
            Device::Pv(_) => "pv",
            Device::Cpl(_) => "cpl",
        }
    }

    /// State dimension of the small-signal model.
    pub fn order(&self) -> usize {
        if self.is_source() {
            2
        } else {
            1
        }
    }

    /// Generic coefficients of a source at voltage `u_star`.
    pub fn source_coeffs(&self, u_star: T) -> Result<GenericSecondOrder<T>> {
        match self {
            Device::EssBoost(p) => coeffs_ess_boost(p, u_star),
            Device::EssBuck(p) => Ok(coeffs_ess_buck(p)),
            Device::Pv(p) => coeffs_pv(p, u_star),
            Device::Cpl(_) => Err(Error::InvalidArgument("a CPL has no source coefficients".into())),
        }
    }

    /// Small-signal transfer function in `s` at voltage `u_star`.
    pub fn tf(&self, u_star: T) -> Result<CRational<T>> {
        match self {
            Device::Cpl(p) => cpl_tf(p, u_star),
            _ => Ok(self.source_coeffs(u_star)?.tf()),
        }
    }
}

fn check_voltage<T: Real>(u_star: T) -> Result<()> {
    if u_star > T::zero() && u_star.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("operating voltage {u_star} must be > 0")))
    }
}

pub fn coeffs_ess_boost<T: Real>(p: &EssBoostParams<T>, u_star: T) -> Result<GenericSecondOrder<T>> {
    check_voltage(u_star)?;
    let cu = p.c * u_star;
    Ok(GenericSecondOrder {
        c1: (p.e * p.kp * p.r_d + u_star) / cu,
        c0: p.e * p.r_d * p.ki / cu,
        d1: (p.u_r - u_star + p.e * p.r_d * p.kp) / (cu * p.r_d),
        d0: p.e * p.ki / cu,
    })
}

pub fn coeffs_ess_buck<T: Real>(p: &EssBuckParams<T>) -> GenericSecondOrder<T> {
    GenericSecondOrder {
        c1: (p.r_d * p.kp + T::one()) / p.c,
        c0: p.r_d * p.ki / p.c,
        d1: p.kp / p.c,
        d0: p.ki / p.c,
    }
}

pub fn coeffs_pv<T: Real>(p: &PvParams<T>, u_star: T) -> Result<GenericSecondOrder<T>> {
    check_voltage(u_star)?;
    let c_eq = p.c * (p.kp * u_star + T::one());
    let ratio = p.u_r_pv / u_star;
    let a = p.c * p.ki * u_star + p.i_pv_star * p.kp * ratio - ratio * ratio * p.g_pv_star;
    Ok(GenericSecondOrder {
        c1: (p.kp * u_star + T::one()) / c_eq,
        c0: p.ki * u_star / c_eq,
        d1: a / c_eq,
        d0: p.i_pv_star * p.ki * ratio / c_eq,
    })
}

/// Incremental conductance magnitude `y_l = P/u*²`.
pub fn cpl_conductance<T: Real>(p: &CplParams<T>, u_star: T) -> Result<T> {
    check_voltage(u_star)?;
    Ok(p.p / (u_star * u_star))
}

/// `G^l(s) = 1/(C_l s - y_l)`.
pub fn cpl_tf<T: Real>(p: &CplParams<T>, u_star: T) -> Result<CRational<T>> {
    let yl = cpl_conductance(p, u_star)?;
    CRational::from_real(&[T::one()], &[-yl, p.c_l])
}

/// `y^v = -C_l σ₀ + y_l cos θ₀ - C_l ω₀ sin θ₀`.
pub fn virtual_admittance_raw<T: Real>(c_l: T, y_l: T, region: &HalfPlaneRegion<T>) -> T {
    let th = region.theta0();
    -c_l * region.sigma0() + y_l * cos_snapped(th) - c_l * region.omega0() * sin_snapped(th)
}

pub fn virtual_admittance<T: Real>(p: &CplParams<T>, u_star: T, region: &HalfPlaneRegion<T>) -> Result<T> {
    Ok(virtual_admittance_raw(p.c_l, cpl_conductance(p, u_star)?, region))
}

/// Mapped CPL pole `ν_p = -σ₀ + (y_l/C_l)e^{-jθ₀} - ω₀e^{j(π/2-θ₀)}`.
pub fn cpl_mapped_pole<T: Real>(c_l: T, y_l: T, region: &HalfPlaneRegion<T>) -> Complex<T> {
    let th = region.theta0();
    Complex::new(-region.sigma0(), T::zero()) + cis(th).conj() * (y_l / c_l)
        - cis(T::FRAC_PI_2() - th) * region.omega0()
}

/// Loop-transformed CPL `1/(C_l(ν - j Im ν_p))`, checked to be positive.
pub fn modified_cpl_raw<T: Real>(c_l: T, y_l: T, region: &HalfPlaneRegion<T>) -> Result<CRational<T>> {
    let vp = cpl_mapped_pole(c_l, y_l, region);
    let den = CPoly::new(vec![Complex::new(T::zero(), -vp.im) * c_l, Complex::new(c_l, T::zero())]);
    let h = CRational::new(CPoly::one(), den)?;
    let rep = check_positive_siso(&h)?;
    if !rep.is_positive {
        return Err(Error::Internal(format!(
            "modified CPL failed positivity ({:?})",
            rep.failed_condition
        )));
    }
    Ok(h)
}

pub fn modified_cpl<T: Real>(p: &CplParams<T>, u_star: T, region: &HalfPlaneRegion<T>) -> Result<CRational<T>> {
    modified_cpl_raw(p.c_l, cpl_conductance(p, u_star)?, region)
}

/// `Ĝ(ν) = e^{jθ₀} G(s(ν))` for any transfer function in `s`.
pub fn rotated_tf<T: Real>(g: &CRational<T>, region: &HalfPlaneRegion<T>) -> Result<CRational<T>> {
    let (a, b) = region.affine_map();
    Ok(g.substitute_affine(a, b)?.rotate(region.theta0()))
}

pub fn rotated_source<T: Real>(g: &GenericSecondOrder<T>, region: &HalfPlaneRegion<T>) -> Result<CRational<T>> {
    rotated_tf(&g.tf(), region)
}

/// `G̃ = [1 - y^s Ĝ]^{-1} Ĝ`.
pub fn modified_source<T: Real>(g_hat: &CRational<T>, y_s: T) -> Result<CRational<T>> {
    g_hat.feedback(Complex::new(-y_s, T::zero()))
}
