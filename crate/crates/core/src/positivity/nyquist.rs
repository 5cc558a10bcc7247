use num_complex::Complex;
use serde::Serialize;

use crate::cpoly::CRational;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of the disk test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NyquistResult<T> {
    pub pass: bool,
    /// Every sample lies in the closed disk `|ĥ - 1/(2ρ)| ≤ 1/(2ρ)`.
    pub in_disk: bool,
    /// `min (1/(2ρ) - |ĥ(jω) - 1/(2ρ)|)` over the samples.
    pub disk_margin: T,
    /// Some sample lies within `1e-9` of the critical point `1/ρ`, i.e. the
    /// passing loop has a pole on the imaginary axis.
    pub touches_critical_point: bool,
    /// Counter-clockwise winding of `1 - ρ·ĥ(ε + jω)` about the origin over
    /// the full frequency axis, `ε = 1e-7`.
    pub encirclements: i64,
    /// Poles of `ĥ` with positive real part.
    pub open_loop_unstable_poles: usize,
}

/// Graphical disk test of the loop `ĥ` under the gain `ρ`.
///
/// The closed disk centred at `1/(2ρ)` with radius `1/(2ρ)` is exactly the
/// set where `Re{ĥ/(1 - ρĥ)} ≥ 0`, so the passing loop is
/// `ĥ/(1 - ρĥ)`. Its poles are the zeros of `1 - ρĥ`; with `P` unstable
/// open-loop poles the Nyquist criterion requires `1 - ρĥ(jω)` to wind `P`
/// times counter-clockwise around the origin as `ω` runs over the whole
/// real axis. Complex-coefficient loops are not conjugate-symmetric, so the
/// grid is mirrored to negative frequencies before counting.
///
/// A sample at the critical point `1/ρ` only means the passing loop has a
/// pole on the imaginary axis, which positivity admits (`1/(ν+1)` under
/// `ρ = 1` gives `1/ν`). Such touches are flagged but do not fail the test;
/// the encirclement count uses the contour shifted by `ε` into the right
/// half-plane so that these axis poles count as stable, and unstable
/// open-loop poles are those with real part above `ε`.
pub fn nyquist_disk_check<T: Real>(
    h_hat: &CRational<T>,
    rho: T,
    grid: &[T],
) -> Result<NyquistResult<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty frequency grid".into()));
    }
    if !(rho > T::zero()) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be > 0")));
    }
    let mut w: Vec<T> = grid.iter().flat_map(|&x| [x, -x]).collect();
    w.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    w.dedup();

    let half = T::one() / (rho + rho);
    let center = Complex::new(half, T::zero());
    let critical = Complex::new(T::one() / rho, T::zero());
    let tol = T::tol(1e-9);
    let eps = T::tol(1e-7);
    let mut disk_margin = T::infinity();
    let mut touches = false;
    let mut samples = Vec::with_capacity(w.len());
    for &om in &w {
        let v = h_hat.eval(Complex::new(T::zero(), om))?;
        disk_margin = disk_margin.min(half - (v - center).norm());
        if (v - critical).norm() <= tol * (T::one() / rho).max(T::one()) {
            touches = true;
        }
        let vs = h_hat.eval(Complex::new(eps, om))?;
        samples.push(Complex::new(T::one(), T::zero()) - vs * rho);
    }
    let in_disk = disk_margin >= -tol * half.max(T::one());

    let mut total = T::zero();
    for k in 0..samples.len() {
        let a = samples[k];
        let b = samples[(k + 1) % samples.len()];
        if a.norm() > T::zero() && b.norm() > T::zero() {
            total += (b / a).arg();
        }
    }
    let encirclements = (total / (T::PI() + T::PI())).round().to_i64().unwrap_or(0);
    let unstable = h_hat
        .poles()?
        .iter()
        .filter(|p| p.re > eps)
        .count();
    let pass = in_disk && encirclements == unstable as i64;
    Ok(NyquistResult {
        pass,
        in_disk,
        disk_margin,
        touches_critical_point: touches,
        encirclements,
        open_loop_unstable_poles: unstable,
    })
}
