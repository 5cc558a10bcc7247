use num_complex::Complex;
use serde::Serialize;

use super::{cluster_roots, CPoly, CRational};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Relative tolerance for treating two poles (or a pole and a conjugate) as
/// the same point when forming the least common real denominator.
pub const CONJ_CLUSTER_TOL: f64 = 1e-8;

/// Real-equivalent `[[r_re, -r_im], [r_im, r_re]]` of a complex rational
/// function `r = r_re + j·r_im`, over one real-coefficient denominator.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct RealRationalMatrix2x2<T> {
    num_re: CPoly<T>,
    num_im: CPoly<T>,
    den: CPoly<T>,
}

impl<T: Real> RealRationalMatrix2x2<T> {
    /// Assembles the block matrix from real-coefficient numerators over a
    /// shared real-coefficient denominator.
    pub fn from_parts(num_re: CPoly<T>, num_im: CPoly<T>, den: CPoly<T>) -> Self {
        Self {
            num_re: num_re.re_coeffs(),
            num_im: num_im.re_coeffs(),
            den: den.re_coeffs(),
        }
    }

    pub fn num_re(&self) -> &CPoly<T> {
        &self.num_re
    }

    pub fn num_im(&self) -> &CPoly<T> {
        &self.num_im
    }

    pub fn den(&self) -> &CPoly<T> {
        &self.den
    }

    /// Entry `(i, j)` as a rational function.
    pub fn entry(&self, i: usize, j: usize) -> CRational<T> {
        let num = match (i, j) {
            (0, 0) | (1, 1) => self.num_re.clone(),
            (0, 1) => -self.num_im.clone(),
            (1, 0) => self.num_im.clone(),
            _ => panic!("2x2 index out of range"),
        };
        CRational::new(num, self.den.clone()).expect("nonzero denominator")
    }

    /// `M(z)` as a complex 2x2 matrix.
    pub fn eval(&self, z: Complex<T>) -> Result<Matrix<Complex<T>>> {
        let a = self.entry(0, 0).eval(z)?;
        let b = self.entry(1, 0).eval(z)?;
        Ok(Matrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => a,
            (0, 1) => -b,
            _ => b,
        }))
    }

    pub fn is_proper(&self) -> bool {
        let dd = self.den.degree().unwrap_or(0);
        self.num_re.degree().unwrap_or(0) <= dd && self.num_im.degree().unwrap_or(0) <= dd
    }

    pub fn poles(&self) -> Result<Vec<Complex<T>>> {
        self.den.roots()
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            num_re: self.num_re.scale_real(k),
            num_im: self.num_im.scale_real(k),
            den: self.den.clone(),
        }
    }

    /// True when the imaginary block vanishes identically.
    pub fn is_block_diagonal(&self) -> bool {
        self.num_im.is_zero()
    }
}

impl<T: Real> CRational<T> {
    /// Real-equivalent embedding over the least common real-coefficient
    /// denominator of `den` and its coefficient conjugate.
    ///
    /// Real poles and existing conjugate pairs are not doubled: each point
    /// `z` of the common denominator carries multiplicity
    /// `max(mult_den(z), mult_den(conj z))`.
    pub fn real_equiv(&self) -> Result<RealRationalMatrix2x2<T>> {
        let den = self.den();
        if den.is_real(T::tol(1e-12)) {
            let l = den.re_coeffs();
            return Ok(RealRationalMatrix2x2 {
                num_re: self.num().re_coeffs(),
                num_im: self.num().im_coeffs(),
                den: l,
            });
        }
        let tol = T::lit(CONJ_CLUSTER_TOL);
        let clusters = cluster_roots(&den.roots()?, tol);
        let close = |a: Complex<T>, b: Complex<T>| (a - b).norm() <= tol * a.norm().max(T::one());

        let mut used = vec![false; clusters.len()];
        let mut l = CPoly::one();
        let mut q_roots: Vec<Complex<T>> = Vec::new();
        for i in 0..clusters.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let c = clusters[i];
            if c.center.im.abs() <= tol * c.center.norm().max(T::one()) {
                let lin = CPoly::from_real(&[-c.center.re, T::one()]);
                for _ in 0..c.multiplicity {
                    l = &l * &lin;
                }
                continue;
            }
            let partner = (0..clusters.len())
                .find(|&k| !used[k] && close(clusters[k].center, c.center.conj()));
            let (m_here, m_conj, center) = match partner {
                Some(k) => {
                    used[k] = true;
                    // average the pair so the quadratic factor is exactly real
                    let avg = (c.center + clusters[k].center.conj()) * T::lit(0.5);
                    (c.multiplicity, clusters[k].multiplicity, avg)
                }
                None => (c.multiplicity, 0, c.center),
            };
            let m = m_here.max(m_conj);
            let quad = CPoly::from_real(&[center.norm_sqr(), -(center.re + center.re), T::one()]);
            for _ in 0..m {
                l = &l * &quad;
            }
            for _ in 0..(m - m_here) {
                q_roots.push(center);
            }
            for _ in 0..(m - m_conj) {
                q_roots.push(center.conj());
            }
        }
        let w = self.num() * &CPoly::from_roots(&q_roots);
        Ok(RealRationalMatrix2x2 {
            num_re: w.re_coeffs(),
            num_im: w.im_coeffs(),
            den: l.re_coeffs(),
        })
    }
}
