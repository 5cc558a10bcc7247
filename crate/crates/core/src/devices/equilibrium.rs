//! DC operating point by Newton iteration on the nodal current balance.

use serde::{Deserialize, Serialize};

use super::Device;
use crate::error::{Error, Result};
use crate::linalg::{solve, Matrix};
use crate::network::AdmittanceMatrix;
use crate::scalar::Real;

pub const EQ_TOL: f64 = 1e-9;
pub const EQ_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium<T> {
    pub u_star: Vec<T>,
    /// Current injected into the network at each node.
    pub i_star: Vec<T>,
}

/// Injected current and its derivative with respect to the node voltage.
fn injection<T: Real>(d: &Device<T>, u: T) -> (T, T) {
    match d {
        Device::EssBoost(p) => ((p.u_r - u) / p.r_d, -T::one() / p.r_d),
        Device::EssBuck(p) => ((p.u_r - u) / p.r_d, -T::one() / p.r_d),
        Device::Pv(p) => {
            let pw = p.u_r_pv * p.i_pv_star;
            (pw / u, -pw / (u * u))
        }
        Device::Cpl(p) => (-p.p / u, p.p / (u * u)),
    }
}

fn droop<T: Real>(d: &Device<T>) -> Option<(T, T)> {
    match d {
        Device::EssBoost(p) => Some((p.u_r, p.r_d)),
        Device::EssBuck(p) => Some((p.u_r, p.r_d)),
        _ => None,
    }
}

/// Solves `i = Y·u` with droop sources, PV units as constant-power
/// injections `U_r_pv·i*_pv` and constant-power loads, from a flat start at
/// the mean droop reference.
pub fn equilibrium_solve<T: Real>(y: &AdmittanceMatrix<T>, devices: &[Device<T>]) -> Result<Equilibrium<T>> {
    let n = y.n_nodes();
    if devices.len() != n {
        return Err(Error::Dimension(format!("{} devices for {} nodes", devices.len(), n)));
    }
    let mut refs = Vec::new();
    for d in devices {
        if let Some((u_r, r_d)) = droop(d) {
            if !(r_d > T::zero()) {
                return Err(Error::InvalidArgument("droop resistance must be positive".into()));
            }
            refs.push(u_r);
        }
    }
    if refs.is_empty() {
        return Err(Error::InvalidArgument("equilibrium needs at least one droop source".into()));
    }
    let nominal = refs.iter().fold(T::zero(), |a, &b| a + b) / T::lit(refs.len() as f64);
    let ym = y.matrix();
    let mut u = vec![nominal; n];
    let residual = |u: &[T]| -> (Vec<T>, Vec<T>, T) {
        let mut res = vec![T::zero(); n];
        let mut inj = vec![T::zero(); n];
        let mut scale = T::one();
        for k in 0..n {
            let (i_k, _) = injection(&devices[k], u[k]);
            inj[k] = i_k;
            scale = scale.max(i_k.abs());
            let yu = (0..n).fold(T::zero(), |a, j| a + ym[(k, j)] * u[j]);
            res[k] = yu - i_k;
        }
        let norm = res.iter().fold(T::zero(), |a, r| a.max(r.abs()));
        (res, inj, norm / scale)
    };
    let tol = T::tol(EQ_TOL);
    for _ in 0..EQ_MAX_ITER {
        let (res, inj, norm) = residual(&u);
        if norm < tol {
            return finish(u, inj, nominal);
        }
        let jac = Matrix::from_fn(n, n, |i, j| {
            let dij = if i == j { injection(&devices[i], u[i]).1 } else { T::zero() };
            ym[(i, j)] - dij
        });
        let rhs = Matrix::from_fn(n, 1, |i, _| -res[i]);
        let du = solve(&jac, &rhs)?;
        let mut step = T::one();
        let mut next;
        loop {
            next = (0..n).map(|k| u[k] + step * du[(k, 0)]).collect::<Vec<_>>();
            if next.iter().all(|&v| v > T::zero()) || step < T::lit(1e-6) {
                break;
            }
            step = step * T::lit(0.5);
        }
        if next.iter().any(|&v| !(v > T::zero())) {
            return Err(Error::NoConvergence { algorithm: "equilibrium Newton" });
        }
        u = next;
    }
    let (_, inj, norm) = residual(&u);
    if norm < tol {
        return finish(u, inj, nominal);
    }
    Err(Error::NoConvergence { algorithm: "equilibrium Newton" })
}

fn finish<T: Real>(u: Vec<T>, i: Vec<T>, nominal: T) -> Result<Equilibrium<T>> {
    if let Some((k, v)) = u.iter().enumerate().find(|(_, &v)| v < T::lit(0.5) * nominal) {
        return Err(Error::Equilibrium(format!(
            "low-voltage solution at node {k}: {:.6e} V",
            v.to_f64_lossy()
        )));
    }
    Ok(Equilibrium { u_star: u, i_star: i })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{CplParams, EssBoostParams};
    use crate::network::{Line, NodePartition};
    use approx::assert_relative_eq;

    fn src(u_r: f64, r_d: f64) -> Device<f64> {
        Device::EssBoost(EssBoostParams { c: 2e-3, e: 50.0, u_r, r_d, kp: 0.01, ki: 60.0 })
    }

    fn two_node(p: f64) -> (AdmittanceMatrix<f64>, Vec<Device<f64>>) {
        let y = AdmittanceMatrix::build(
            &[Line { from: 0, to: 1, resistance: 0.1 }],
            2,
            NodePartition::new(vec![0], vec![1], 2).unwrap(),
        )
        .unwrap();
        (y, vec![src(105.0, 0.6), Device::Cpl(CplParams { c_l: 2e-3, p })])
    }

    #[test]
    fn single_source_single_cpl_matches_quadratic() {
        let (y, devs) = two_node(1500.0);
        let eq = equilibrium_solve(&y, &devs).unwrap();
        let (ur, r, p) = (105.0f64, 0.7, 1500.0);
        let ul = (ur + (ur * ur - 4.0 * r * p).sqrt()) / 2.0;
        assert_relative_eq!(eq.u_star[1], ul, max_relative = 1e-10);
        assert_relative_eq!(eq.i_star[1] * eq.u_star[1], -p, max_relative = 1e-9);
        assert_relative_eq!(eq.i_star[0], -eq.i_star[1], max_relative = 1e-9);
    }

    #[test]
    fn no_load_gives_reference() {
        let (y, devs) = two_node(0.0);
        let eq = equilibrium_solve(&y, &devs).unwrap();
        assert_relative_eq!(eq.u_star[0], 105.0, epsilon = 1e-9);
        assert_relative_eq!(eq.u_star[1], 105.0, epsilon = 1e-9);
    }

    #[test]
    fn overload_is_rejected() {
        // beyond the nose of the PV curve there is no real solution
        let (y, devs) = two_node(5000.0);
        assert!(equilibrium_solve(&y, &devs).is_err());
    }

    #[test]
    fn needs_droop_source() {
        let y = AdmittanceMatrix::build(
            &[Line { from: 0, to: 1, resistance: 0.1 }],
            2,
            NodePartition::new(vec![0], vec![1], 2).unwrap(),
        )
        .unwrap();
        let devs = vec![Device::Cpl(CplParams { c_l: 1e-3, p: 1.0 }); 2];
        assert!(matches!(equilibrium_solve(&y, &devs), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn retuning_droop_keeps_equilibrium() {
        let (y, mut devs) = two_node(1500.0);
        let eq = equilibrium_solve(&y, &devs).unwrap();
        if let Device::EssBoost(p) = &mut devs[0] {
            p.r_d *= 1.19;
            p.u_r = eq.u_star[0] + p.r_d * eq.i_star[0];
        }
        let eq2 = equilibrium_solve(&y, &devs).unwrap();
        for k in 0..2 {
            assert_relative_eq!(eq.u_star[k], eq2.u_star[k], max_relative = 1e-8);
            assert_relative_eq!(eq.i_star[k], eq2.i_star[k], max_relative = 1e-8);
        }
    }
}
