//! Complex-coefficient polynomials and rational functions.
//!
//! Coefficients are stored in ascending degree order. No operation performs
//! pole-zero cancellation implicitly; [`CRational::reduce`] exists for
//! callers that want it.

mod rational;
mod real_equiv;
mod roots;

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::Serialize;

use crate::scalar::Real;

pub use rational::CRational;
pub use real_equiv::RealRationalMatrix2x2;
pub use roots::{cluster_roots, companion_roots, RootCluster, ROOT_MAX_ITER, ROOT_TOL};

/// Relative threshold below which trailing coefficients are dropped.
pub const NORMALIZE_TOL: f64 = 1e-14;

/// Polynomial with complex coefficients, ascending degree order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct CPoly<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> CPoly<T> {
    /// Builds a polynomial and strips negligible highest-degree coefficients.
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        let mut p = Self { coeffs };
        p.normalize();
        p
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex::new(T::one(), T::zero()))
    }

    /// The identity polynomial `ν`.
    pub fn x() -> Self {
        Self::new(vec![Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero())])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex<T>]) -> Self {
        let mut c = vec![Complex::new(T::one(), T::zero())];
        for &r in roots {
            let mut next = vec![Complex::new(T::zero(), T::zero()); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self::new(c)
    }

    /// Drops a leading coefficient when its term is negligible at the root
    /// radius `R` implied by the lower coefficients, i.e.
    /// `|c_n| ≤ tol · max_k |c_k| R^{k-n}`. Plain relative trimming against
    /// `max |c_k|` would also discard genuine leading terms of polynomials
    /// with large roots (poles near 1e4 give a constant term near 1e25 with
    /// `c_n = 1`).
    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.norm() == T::zero()) {
            self.coeffs.pop();
        }
        let tol = T::tol(NORMALIZE_TOL);
        while self.coeffs.len() > 1 {
            let n = self.coeffs.len() - 1;
            let Some(m) = (0..n).rev().find(|&k| self.coeffs[k].norm() > T::zero()) else {
                break;
            };
            let cm = self.coeffs[m].norm();
            let mut r = T::one();
            for k in 0..m {
                let q = (self.coeffs[k].norm() / cm).powf(T::one() / T::lit((m - k) as f64));
                r = r.max(q + q);
            }
            let thr = (0..n)
                .map(|k| self.coeffs[k].norm() * r.powi(k as i32 - n as i32))
                .fold(T::zero(), T::max);
            if self.coeffs[n].norm() <= tol * thr {
                self.coeffs.pop();
                while self.coeffs.last().is_some_and(|c| c.norm() == T::zero()) {
                    self.coeffs.pop();
                }
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `ν^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Complex<T> {
        self.coeffs.get(k).copied().unwrap_or_else(Complex::default)
    }

    pub fn leading(&self) -> Complex<T> {
        self.coeffs.last().copied().unwrap_or_else(Complex::default)
    }

    /// Largest coefficient magnitude.
    pub fn norm_max(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// `Σ |c_k| |z|^k`, the natural magnitude scale of `p(z)`.
    pub fn eval_scale(&self, z: Complex<T>) -> T {
        let r = z.norm();
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * r + c.norm())
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
    }

    /// `(p(z), p'(z))` by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let zero = Complex::new(T::zero(), T::zero());
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::lit(k as f64))
                .collect(),
        )
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn scale_real(&self, k: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    /// Polynomial with conjugated coefficients; its roots are the conjugates
    /// of the roots of `self`.
    pub fn conj_coeffs(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Real parts of the coefficients as a (real-coefficient) polynomial.
    pub fn re_coeffs(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|c| Complex::new(c.re, T::zero()))
                .collect(),
        )
    }

    /// Imaginary parts of the coefficients as a (real-coefficient) polynomial.
    pub fn im_coeffs(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|c| Complex::new(c.im, T::zero()))
                .collect(),
        )
    }

    /// True if every coefficient has `|Im c| ≤ tol · ‖p‖`.
    pub fn is_real(&self, tol: T) -> bool {
        let thr = tol * self.norm_max();
        self.coeffs.iter().all(|c| c.im.abs() <= thr)
    }

    /// Real coefficient vector (imaginary parts discarded).
    pub fn real_coeffs(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| c.re).collect()
    }

    /// `p(a·ν + b)` by Horner composition.
    pub fn compose_affine(&self, a: Complex<T>, b: Complex<T>) -> Self {
        let lin = Self {
            coeffs: vec![b, a],
        };
        let mut acc = Self::zero();
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Self::constant(c);
        }
        // composition with a nonzero `a` keeps the degree; renormalize only
        // relative to the final magnitudes
        acc
    }

    /// `p(jω)` coefficients as a polynomial in the real variable `ω`:
    /// `Σ c_k j^k ω^k`.
    pub fn on_imaginary_axis(&self) -> Self {
        let j = Complex::new(T::zero(), T::one());
        let mut jk = Complex::new(T::one(), T::zero());
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * jk);
            jk *= j;
        }
        Self::new(out)
    }

    /// Euclidean division: `(q, r)` with `self = q·d + r`, `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dn = match d.degree() {
            Some(n) => n,
            None => return (Self::zero(), self.clone()),
        };
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= dn {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![Complex::new(T::zero(), T::zero()); r.len() - dn];
        for k in (0..q.len()).rev() {
            let f = r[k + dn] / lead;
            q[k] = f;
            for (i, &dc) in d.coeffs.iter().enumerate() {
                r[k + i] -= f * dc;
            }
        }
        r.truncate(dn);
        (Self::new(q), Self::new(r))
    }

    /// Roots with multiplicity (Aberth–Ehrlich iteration).
    pub fn roots(&self) -> crate::Result<Vec<Complex<T>>> {
        roots::aberth(self)
    }
}

impl<'a, T: Real> Add<&'a CPoly<T>> for &'a CPoly<T> {
    type Output = CPoly<T>;
    fn add(self, rhs: &'a CPoly<T>) -> CPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<'a, T: Real> Sub<&'a CPoly<T>> for &'a CPoly<T> {
    type Output = CPoly<T>;
    fn sub(self, rhs: &'a CPoly<T>) -> CPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<'a, T: Real> Mul<&'a CPoly<T>> for &'a CPoly<T> {
    type Output = CPoly<T>;
    fn mul(self, rhs: &'a CPoly<T>) -> CPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return CPoly::zero();
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly::new(out)
    }
}

impl<T: Real> Neg for CPoly<T> {
    type Output = CPoly<T>;
    fn neg(self) -> CPoly<T> {
        CPoly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}
