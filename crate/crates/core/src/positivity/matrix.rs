use num_complex::Complex;

use super::{
    pole_location_check, split_poles, Check, FailedCondition, PositivityReport, Witness,
    MAX_WITNESSES, POSITIVITY_TOL,
};
use crate::cpoly::{cluster_roots, CRational, RealRationalMatrix2x2};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_2x2_eigenvalues, hermitian_eigenvalues, Matrix};
use crate::scalar::Real;

/// Default logarithmic frequency range and density for sampled checks.
pub const GRID_LO: f64 = 1e-3;
pub const GRID_HI: f64 = 1e6;
pub const GRID_POINTS: usize = 2000;
const GOLDEN_ITERS: usize = 60;

/// `n` logarithmically spaced points in `[lo, hi]`.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * T::lit(k as f64) / T::lit((n - 1) as f64)).exp())
        .collect()
}

/// Symmetric grid `-hi..-lo, 0, lo..hi` covering both frequency signs.
pub fn full_axis_grid<T: Real>() -> Vec<T> {
    let pos = log_grid(T::lit(GRID_LO), T::lit(GRID_HI), GRID_POINTS);
    let mut g: Vec<T> = pos.iter().rev().map(|&w| -w).collect();
    g.push(T::zero());
    g.extend(pos);
    g
}

/// Minimum of `f` over a sorted grid, refined by golden-section search in
/// the bracket around every grid-local minimum. Points where `f` is
/// undefined (poles) are skipped.
fn sampled_minimum<T: Real>(grid: &[T], f: impl Fn(T) -> Option<T>) -> Option<(T, T)> {
    let vals: Vec<Option<T>> = grid.iter().map(|&w| f(w)).collect();
    let mut best: Option<(T, T)> = None;
    let mut consider = |w: T, v: T| {
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((w, v));
        }
    };
    for (k, v) in vals.iter().enumerate() {
        let Some(v) = *v else { continue };
        consider(grid[k], v);
        let left = if k > 0 { vals[k - 1] } else { None };
        let right = vals.get(k + 1).copied().flatten();
        let is_min = left.is_none_or(|l| v <= l) && right.is_none_or(|r| v <= r);
        if !is_min || grid.len() < 2 {
            continue;
        }
        let a = if k > 0 { grid[k - 1] } else { grid[k] };
        let b = if k + 1 < grid.len() { grid[k + 1] } else { grid[k] };
        if b > a {
            if let Some((w, fv)) = golden_section(a, b, &f) {
                consider(w, fv);
            }
        }
    }
    best
}

fn golden_section<T: Real>(mut a: T, mut b: T, f: &impl Fn(T) -> Option<T>) -> Option<(T, T)> {
    let g = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..GOLDEN_ITERS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Some(if fc < fd { (c, fc) } else { (d, fd) })
}

fn jw<T: Real>(w: T) -> Complex<T> {
    Complex::new(T::zero(), w)
}

/// Positive realness of a real-equivalent block matrix.
///
/// Pole locations come from the roots of the common denominator; the
/// frequency condition is `λ_min(M(jω) + M(jω)^H) ≥ 0`, sampled on
/// `{0} ∪ [1e-3, 1e6]` (2000 log-spaced points) with golden-section
/// refinement, plus the limit at infinity. Negative frequencies need no
/// separate pass: for real-coefficient `M` the Hermitian part at `-ω` is
/// the conjugate of the one at `ω`.
pub fn check_pr_real_matrix<T: Real>(m: &RealRationalMatrix2x2<T>) -> Result<PositivityReport<T>> {
    if !m.is_proper() {
        return Err(Error::NonProper);
    }
    let tol = T::tol(POSITIVITY_TOL);
    let poles = m.poles()?;
    let (off, clusters) = split_poles(&poles);
    let mut checks = vec![pole_location_check(&off)];

    let a = m.entry(0, 0);
    let c = m.entry(1, 0);
    let herm_min = |w: T| -> Option<T> {
        let z = jw(w);
        let x = a.eval(z).ok()?;
        let y = c.eval(z).ok()?;
        // [[x, -y], [y, x]] + its conjugate transpose
        let (lo, _) = hermitian_2x2_eigenvalues(x.re + x.re, x.re + x.re, -y + y.conj());
        Some(lo)
    };
    let mut grid = vec![T::zero()];
    grid.extend(log_grid(T::lit(GRID_LO), T::lit(GRID_HI), GRID_POINTS));
    let mut scale = T::zero();
    for &w in &grid {
        let z = jw(w);
        if let (Ok(x), Ok(y)) = (a.eval(z), c.eval(z)) {
            scale = scale.max(x.norm()).max(y.norm());
        }
    }
    let dl = m.den().degree().unwrap_or(0);
    let d00 = m.num_re().coeff(dl).re;
    let d10 = m.num_im().coeff(dl).re;
    scale = scale.max(d00.abs()).max(d10.abs());
    let norm = if scale > T::zero() { scale + scale } else { T::one() };
    // D + D^T for D = [[d00, -d10], [d10, d00]] is 2·d00·I
    let inf_min = d00 + d00;
    let mut margin = inf_min / norm;
    let mut witnesses = Vec::new();
    if let Some((w, v)) = sampled_minimum(&grid, herm_min) {
        if v / norm < margin {
            margin = v / norm;
        }
        if v / norm < -tol {
            witnesses.push(Witness::frequency(w, Complex::new(v, T::zero())));
        }
    }
    checks.push(Check::new(FailedCondition::RealPart, margin, margin < -tol, witnesses));

    // residues at imaginary-axis poles
    let mut mult = Vec::new();
    let mut res_w = Vec::new();
    let mut res_margin = T::infinity();
    let dden = m.den().derivative();
    for cl in &clusters {
        let p = cl.center;
        let lp = dden.eval(p);
        if cl.multiplicity > 1 || lp.norm() <= T::tol(1e-7) * dden.eval_scale(p) {
            mult.push(Witness::pole(p, Complex::new(T::lit(cl.multiplicity.max(2) as f64), T::zero())));
            continue;
        }
        let wre = m.num_re().eval(p) / lp;
        let wim = m.num_im().eval(p) / lp;
        // K = [[wre, -wim], [wim, wre]]
        let herm_err = (wre - wre.conj()).norm().max((-wim - wim.conj()).norm());
        let mag = wre.norm().max(wim.norm());
        let (lo, _) = hermitian_2x2_eigenvalues(wre.re, wre.re, (-wim + wim.conj()) * T::lit(0.5));
        let mk = if mag == T::zero() {
            T::zero()
        } else if herm_err > tol * mag {
            -(herm_err / mag)
        } else {
            lo / mag
        };
        res_margin = res_margin.min(mk);
        if mk < -tol {
            res_w.push(Witness::pole(p, Complex::new(lo, T::zero())));
        }
    }
    let mf = !mult.is_empty();
    mult.truncate(MAX_WITNESSES);
    checks.push(Check::new(
        FailedCondition::ImaginaryPoleMultiplicity,
        if mf { -T::one() } else { T::infinity() },
        mf,
        mult,
    ));
    let rf = !res_w.is_empty();
    res_w.truncate(MAX_WITNESSES);
    checks.push(Check::new(FailedCondition::Residue, res_margin, rf, res_w));
    Ok(PositivityReport::assemble(checks))
}

/// Sampled positivity test for a square matrix of rational functions.
///
/// Poles and residues are checked exactly per entry; the frequency
/// condition `λ_min(H(jω) + H(jω)^H) ≥ -1e-9·scale` is evaluated on `grid`
/// (sorted internally) with golden-section refinement near minima. Pass a
/// grid covering negative frequencies, e.g. [`full_axis_grid`], when
/// entries have complex coefficients.
pub fn check_positive_matrix_sampled<T: Real>(
    h: &[Vec<CRational<T>>],
    grid: &[T],
) -> Result<PositivityReport<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty frequency grid".into()));
    }
    let n = h.len();
    if n == 0 || h.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension("matrix of rational functions must be square".into()));
    }
    if h.iter().flatten().any(|e| !e.is_proper()) {
        return Err(Error::NonProper);
    }
    let tol = T::tol(POSITIVITY_TOL);
    let mut poles = Vec::new();
    for e in h.iter().flatten() {
        poles.extend(e.poles()?);
    }
    let (off, _) = split_poles(&poles);
    let mut checks = vec![pole_location_check(&off)];

    let eval_h = |z: Complex<T>| -> Option<Matrix<Complex<T>>> {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = h[i][j].eval(z).ok()?;
            }
        }
        Some(m)
    };
    let mut g = grid.to_vec();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    g.dedup();
    let mut scale = T::zero();
    for &w in &g {
        if let Some(m) = eval_h(jw(w)) {
            scale = scale.max(m.max_abs());
        }
    }
    let norm = if scale > T::zero() { scale + scale } else { T::one() };
    let herm_min = |w: T| -> Option<T> {
        let m = eval_h(jw(w))?;
        hermitian_eigenvalues(&m.hermitian_sum()).ok().map(|ev| ev[0])
    };
    let mut margin = T::infinity();
    let mut witnesses = Vec::new();
    if let Some((w, v)) = sampled_minimum(&g, herm_min) {
        margin = v / norm;
        if margin < -tol {
            witnesses.push(Witness::frequency(w, Complex::new(v, T::zero())));
        }
    }
    checks.push(Check::new(FailedCondition::RealPart, margin, margin < -tol, witnesses));

    // residue matrices at imaginary-axis poles
    let on_axis: Vec<Complex<T>> = poles.into_iter().filter(|p| p.re.abs() <= tol).collect();
    let mut centers = cluster_roots(&on_axis, T::tol(super::IMAG_POLE_CLUSTER_TOL));
    centers.dedup_by(|a, b| (a.center - b.center).norm() <= T::tol(1e-6));
    let mut mult = Vec::new();
    let mut res_w = Vec::new();
    let mut res_margin = T::infinity();
    for cl in &centers {
        let p = cl.center;
        let mut k = Matrix::zeros(n, n);
        let mut simple = true;
        for i in 0..n {
            for j in 0..n {
                let e = &h[i][j];
                if e.den().eval(p).norm() > T::tol(1e-7) * e.den().eval_scale(p) {
                    continue;
                }
                match e.residue_at(p) {
                    Ok(r) => k[(i, j)] = r,
                    Err(_) => simple = false,
                }
            }
        }
        if !simple {
            mult.push(Witness::pole(p, Complex::new(T::lit(2.0), T::zero())));
            continue;
        }
        let mag = k.max_abs();
        if mag == T::zero() {
            continue;
        }
        let herm_err = (&k - &k.conj_transpose()).max_abs();
        let mk = if herm_err > tol * mag {
            -(herm_err / mag)
        } else {
            let half = Matrix::from_fn(n, n, |i, j| (k[(i, j)] + k[(j, i)].conj()) * T::lit(0.5));
            hermitian_eigenvalues(&half)?[0] / mag
        };
        res_margin = res_margin.min(mk);
        if mk < -tol {
            res_w.push(Witness::pole(p, Complex::new(mk, T::zero())));
        }
    }
    let mf = !mult.is_empty();
    checks.push(Check::new(
        FailedCondition::ImaginaryPoleMultiplicity,
        if mf { -T::one() } else { T::infinity() },
        mf,
        mult,
    ));
    let rf = !res_w.is_empty();
    checks.push(Check::new(FailedCondition::Residue, res_margin, rf, res_w));
    Ok(PositivityReport::assemble(checks))
}
