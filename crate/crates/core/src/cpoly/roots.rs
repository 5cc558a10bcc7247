//! Polynomial root finding.
//!
//! The production route is Aberth–Ehrlich simultaneous iteration started
//! from Newton-polygon radii. [`companion_roots`] is an independent route
//! through the eigenvalues of the real embedding of the companion matrix,
//! used to cross-check the first.

use num_complex::Complex;

use super::CPoly;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, Matrix};
use crate::scalar::Real;

/// Backward-error tolerance `|p(z)| ≤ tol · Σ|c_k||z|^k` for convergence.
pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_MAX_ITER: usize = 200;

pub(super) fn aberth<T: Real>(p: &CPoly<T>) -> Result<Vec<Complex<T>>> {
    let n = p.degree().ok_or(Error::ZeroPolynomial)?;
    let zero = Complex::new(T::zero(), T::zero());
    // exact zero roots
    let shift = p.coeffs().iter().take_while(|c| c.norm() == T::zero()).count();
    let mut out = vec![zero; shift];
    let q = CPoly::new(p.coeffs()[shift..].to_vec());
    let m = n - shift;
    match m {
        0 => return Ok(out),
        1 => {
            out.push(-q.coeff(0) / q.coeff(1));
            return Ok(out);
        }
        _ => {}
    }
    let mut z = initial_guesses(&q);
    let tol = T::tol(ROOT_TOL);
    let mut done = vec![false; m];
    for _ in 0..ROOT_MAX_ITER {
        let mut all = true;
        for i in 0..m {
            if done[i] {
                continue;
            }
            let v = q.eval(z[i]);
            if v.norm() <= tol * q.eval_scale(z[i]) {
                done[i] = true;
                continue;
            }
            all = false;
            let Some(step) = aberth_step(&q, &z, i) else {
                z[i] = z[i] * Complex::new(T::one() + T::tol(1e-7), T::tol(1e-7))
                    + Complex::new(T::tol(1e-7), T::zero());
                continue;
            };
            z[i] -= step;
        }
        if all {
            polish(&q, &mut z);
            out.extend(z);
            return Ok(out);
        }
    }
    let relaxed = T::tol(1e-8);
    if z
        .iter()
        .all(|&zi| q.eval(zi).norm() <= relaxed * q.eval_scale(zi))
    {
        out.extend(z);
        Ok(out)
    } else {
        Err(Error::NoConvergence {
            algorithm: "Aberth-Ehrlich root iteration",
        })
    }
}

fn aberth_step<T: Real>(q: &CPoly<T>, z: &[Complex<T>], i: usize) -> Option<Complex<T>> {
    let (v, dv) = q.eval_with_derivative(z[i]);
    if dv.norm() == T::zero() {
        return None;
    }
    let one = Complex::new(T::one(), T::zero());
    let ratio = v / dv;
    let mut sum = Complex::new(T::zero(), T::zero());
    for (j, &zj) in z.iter().enumerate() {
        if j != i {
            let d = z[i] - zj;
            if d.norm() > T::zero() {
                sum += one / d;
            }
        }
    }
    let denom = one - ratio * sum;
    Some(if denom.norm() == T::zero() { ratio } else { ratio / denom })
}

/// Extra sweeps after the backward-error test passes: clusters around
/// multiple roots keep contracting well past the first acceptable iterate.
fn polish<T: Real>(q: &CPoly<T>, z: &mut [Complex<T>]) {
    let eps = T::epsilon() * T::lit(4.0);
    for _ in 0..30 {
        let mut moved = false;
        for i in 0..z.len() {
            let Some(step) = aberth_step(q, z, i) else { continue };
            if step.norm() <= eps * z[i].norm().max(T::min_positive_value()) {
                continue;
            }
            let old = q.eval(z[i]).norm();
            let cand = z[i] - step;
            if q.eval(cand).norm() <= old {
                z[i] = cand;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Starting points on circles whose radii come from the upper convex hull
/// of `(k, log|c_k|)`.
fn initial_guesses<T: Real>(p: &CPoly<T>) -> Vec<Complex<T>> {
    let n = p.degree().unwrap_or(0);
    let pts: Vec<(usize, T)> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > T::zero())
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, T)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (T::lit(x2 as f64) - T::lit(x1 as f64)) * (pt.1 - y1)
                - (y2 - y1) * (T::lit(pt.0 as f64) - T::lit(x1 as f64));
            if cross >= T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let two_pi = T::PI() + T::PI();
    let sigma = T::lit(0.7);
    let mut z = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, yi) = w[0];
        let (j, yj) = w[1];
        let cnt = j - i;
        let u = ((yi - yj) / T::lit(cnt as f64)).exp();
        for k in 0..cnt {
            let ang = two_pi * T::lit(k as f64) / T::lit(cnt as f64)
                + two_pi * T::lit(i as f64) / T::lit(n as f64)
                + sigma;
            z.push(Complex::from_polar(u, ang));
        }
    }
    z
}

/// Roots from the eigenvalues of the `2n × 2n` real embedding of the
/// companion matrix.
///
/// The embedding carries the roots of both `p` and its coefficient
/// conjugate; roots of `p` are recovered by greedy deflation, at each step
/// taking the candidate with the smallest relative residual against the
/// current quotient.
pub fn companion_roots<T: Real>(p: &CPoly<T>) -> Result<Vec<Complex<T>>> {
    let n = p.degree().ok_or(Error::ZeroPolynomial)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p.leading();
    let monic: Vec<Complex<T>> = p.coeffs().iter().map(|&c| c / lead).collect();
    let comp = Matrix::from_fn(n, n, |i, j| {
        let mut v = Complex::new(T::zero(), T::zero());
        if i == j + 1 {
            v = Complex::new(T::one(), T::zero());
        }
        if j == n - 1 {
            v -= monic[i];
        }
        v
    });
    let mut candidates = eigenvalues(&comp.real_embedding())?;
    let mut q = CPoly::new(monic);
    let mut roots = Vec::with_capacity(n);
    while roots.len() < n {
        let (idx, _) = candidates
            .iter()
            .enumerate()
            .map(|(k, &z)| {
                let s = q.eval_scale(z);
                let r = if s == T::zero() { T::zero() } else { q.eval(z).norm() / s };
                (k, r)
            })
            .fold((0, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best });
        let z = candidates.swap_remove(idx);
        roots.push(z);
        let (quot, _) = q.div_rem(&CPoly::new(vec![-z, Complex::new(T::one(), T::zero())]));
        q = quot;
    }
    Ok(roots)
}

/// A group of numerically coincident roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCluster<T> {
    pub center: Complex<T>,
    pub multiplicity: usize,
}

/// Groups roots closer than `rel_tol · max(1, |z|)`; cluster centers are
/// member means.
pub fn cluster_roots<T: Real>(roots: &[Complex<T>], rel_tol: T) -> Vec<RootCluster<T>> {
    let mut clusters: Vec<(Complex<T>, usize)> = Vec::new();
    for &z in roots {
        let thr = rel_tol * z.norm().max(T::one());
        if let Some(c) = clusters.iter_mut().find(|(c, m)| {
            let center = *c / T::lit(*m as f64);
            (center - z).norm() <= thr
        }) {
            c.0 += z;
            c.1 += 1;
        } else {
            clusters.push((z, 1));
        }
    }
    clusters
        .into_iter()
        .map(|(s, m)| RootCluster {
            center: s / T::lit(m as f64),
            multiplicity: m,
        })
        .collect()
}
