use num_complex::Complex;
use serde::Serialize;

use super::{cluster_roots, CPoly};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// Relative threshold for evaluation at a pole: `|den(z)| < 1e-12 · scale`.
pub const POLE_EVAL_TOL: f64 = 1e-12;

/// Ratio of complex-coefficient polynomials with a monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct CRational<T> {
    num: CPoly<T>,
    den: CPoly<T>,
}

impl<T: Real> CRational<T> {
    /// Builds `num/den` and rescales so that `den` is monic.
    pub fn new(num: CPoly<T>, den: CPoly<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let lead = den.leading();
        let inv = Complex::new(T::one(), T::zero()) / lead;
        Ok(Self {
            num: num.scale(inv),
            den: den.scale(inv),
        })
    }

    /// Convenience constructor from real ascending coefficient slices.
    pub fn from_real(num: &[T], den: &[T]) -> Result<Self> {
        Self::new(CPoly::from_real(num), CPoly::from_real(den))
    }

    pub fn num(&self) -> &CPoly<T> {
        &self.num
    }

    pub fn den(&self) -> &CPoly<T> {
        &self.den
    }

    /// Numerator degree, with the zero function counted as degree 0.
    fn num_degree(&self) -> usize {
        self.num.degree().unwrap_or(0)
    }

    fn den_degree(&self) -> usize {
        self.den.degree().unwrap_or(0)
    }

    pub fn is_proper(&self) -> bool {
        self.num_degree() <= self.den_degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num_degree() < self.den_degree()
    }

    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        let d = self.den.eval(z);
        let scale = self.den.eval_scale(z);
        if d.norm() < T::lit(POLE_EVAL_TOL) * scale || d.norm() == T::zero() {
            return Err(Error::EvaluationAtPole {
                magnitude: d.norm().to_f64_lossy(),
            });
        }
        Ok(self.num.eval(z) / d)
    }

    pub fn poles(&self) -> Result<Vec<Complex<T>>> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex<T>>> {
        self.num.roots()
    }

    /// `ν ↦ r(a·ν + b)`.
    pub fn substitute_affine(&self, a: Complex<T>, b: Complex<T>) -> Result<Self> {
        if a.norm() == T::zero() {
            return Err(Error::InvalidArgument(
                "affine substitution with a = 0".into(),
            ));
        }
        Self::new(self.num.compose_affine(a, b), self.den.compose_affine(a, b))
    }

    /// Multiplies the numerator by `e^{jφ}`.
    pub fn rotate(&self, phi: T) -> Self {
        Self {
            num: self.num.scale(cis(phi)),
            den: self.den.clone(),
        }
    }

    /// Closed loop `[1 + ρ·r]^{-1} r = num / (den + ρ·num)`, unreduced.
    pub fn feedback(&self, rho: Complex<T>) -> Result<Self> {
        let den = &self.den + &self.num.scale(rho);
        let scale = self.den.norm_max().max(self.num.norm_max() * rho.norm());
        if den.is_zero() || den.norm_max() <= T::lit(1e-14) * scale {
            return Err(Error::DegenerateFeedback);
        }
        Self::new(self.num.clone(), den)
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn scale_real(&self, k: T) -> Self {
        self.scale(Complex::new(k, T::zero()))
    }

    /// Sum over the product denominator (no cancellation).
    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::new(&self.num * &other.num, &self.den * &other.den)
    }

    /// Residue `num(p)/den'(p)` at a simple pole `p`.
    pub fn residue_at(&self, p: Complex<T>) -> Result<Complex<T>> {
        let (d, dd) = self.den.eval_with_derivative(p);
        let tol = T::tol(1e-7);
        if d.norm() > tol * self.den.eval_scale(p) {
            return Err(Error::NotAPole);
        }
        let dscale = self.den.derivative().eval_scale(p);
        if dd.norm() <= tol * dscale || dd.norm() == T::zero() {
            return Err(Error::NonSimplePole);
        }
        Ok(self.num.eval(p) / dd)
    }

    /// Cancels numerator and denominator roots closer than `tol` (relative).
    ///
    /// Never called implicitly by any other routine.
    pub fn reduce(&self, tol: T) -> Result<Self> {
        if self.num.is_zero() {
            return Self::new(CPoly::zero(), CPoly::one());
        }
        let mut zs = self.num.roots()?;
        let mut ps = self.den.roots()?;
        let gain = self.num.leading();
        let mut i = 0;
        while i < zs.len() {
            let thr = tol * zs[i].norm().max(T::one());
            if let Some(k) = ps.iter().position(|p| (*p - zs[i]).norm() <= thr) {
                ps.swap_remove(k);
                zs.swap_remove(i);
            } else {
                i += 1;
            }
        }
        Self::new(CPoly::from_roots(&zs).scale(gain), CPoly::from_roots(&ps))
    }

    /// Denominator roots grouped by the pole clustering tolerance.
    pub fn pole_clusters(&self, rel_tol: T) -> Result<Vec<super::RootCluster<T>>> {
        Ok(cluster_roots(&self.poles()?, rel_tol))
    }
}
