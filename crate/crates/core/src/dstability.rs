//! System-level certification and the centralized pole oracle.
//!
//! The interconnection is `u = -Y·y + w` with `y_k = G_k(s) u_k`, so the
//! closed-loop poles are the roots of `det(I + G(s) Y)`.

use num_complex::Complex;
use serde::Serialize;

use crate::cpoly::{CPoly, CRational};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, Matrix};
use crate::network::{check_rotated_psd, rotate_network, AdmittanceMatrix, GridCode};
use crate::positivity::{check_positive_siso, PositivityReport};
use crate::region::{CompositeRegion, HalfPlaneRegion, Region};
use crate::scalar::Real;

/// Poles may sit this far outside the region and still count as inside.
pub const REGION_TOL: f64 = 1e-6;
/// Imaginary parts below this (relative) are snapped to zero.
pub const CONJ_PAIR_TOL: f64 = 1e-9;
/// Slack on the Thm. 2 network inequality.
pub const NETWORK_TOL: f64 = 1e-9;

/// Angle compensation and loop-transform gains for one region part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopParams<T> {
    pub phi: Vec<T>,
    pub rho: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct SystemModel<T> {
    /// Per-node transfer functions in `s`.
    pub subsystems: Vec<CRational<T>>,
    pub y: AdmittanceMatrix<T>,
    pub region: CompositeRegion<T>,
    /// One entry per region part.
    pub loop_params: Vec<LoopParams<T>>,
}

impl<T: Real> SystemModel<T> {
    /// Defaults to `φ_k = θ₀` of each part and `ρ = 0`.
    pub fn new(subsystems: Vec<CRational<T>>, y: AdmittanceMatrix<T>, region: CompositeRegion<T>) -> Result<Self> {
        let n = y.n_nodes();
        if subsystems.len() != n {
            return Err(Error::Dimension(format!("{} subsystems for {n} nodes", subsystems.len())));
        }
        if let Some(k) = subsystems.iter().position(|g| !g.is_proper()) {
            return Err(Error::InvalidArgument(format!("subsystem {k} is not proper")));
        }
        let loop_params = region
            .parts()
            .iter()
            .map(|p| LoopParams {
                phi: vec![p.theta0(); n],
                rho: vec![T::zero(); n],
            })
            .collect();
        Ok(Self {
            subsystems,
            y,
            region,
            loop_params,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.subsystems.len()
    }

    pub fn set_loop_params(&mut self, part: usize, params: LoopParams<T>) -> Result<()> {
        let n = self.n_nodes();
        if params.phi.len() != n || params.rho.len() != n {
            return Err(Error::Dimension("loop parameters must have one entry per node".into()));
        }
        let slot = self
            .loop_params
            .get_mut(part)
            .ok_or_else(|| Error::InvalidArgument(format!("no region part {part}")))?;
        *slot = params;
        Ok(())
    }

    pub fn state_dimension(&self) -> usize {
        self.subsystems.iter().map(|g| g.den().degree().unwrap_or(0)).sum()
    }
}

/// Closed-loop realization `ẋ = A x + B w`, `y = C x`.
#[derive(Debug, Clone)]
pub struct ClosedLoop<T> {
    pub a: Matrix<T>,
    /// States by nodes; disturbances enter at subsystem inputs.
    pub b: Matrix<T>,
    /// Nodes by states.
    pub c: Matrix<T>,
}

/// Stacks controllable canonical realizations and closes `u = -Y y`.
pub fn assemble_closed_loop<T: Real>(m: &SystemModel<T>) -> Result<ClosedLoop<T>> {
    let n = m.n_nodes();
    let dim = m.state_dimension();
    let mut a = Matrix::zeros(dim, dim);
    let mut b = Matrix::zeros(dim, n);
    let mut c = Matrix::zeros(n, dim);
    let tol = T::tol(1e-12);
    let mut off = 0;
    for (k, g) in m.subsystems.iter().enumerate() {
        if !g.is_strictly_proper() {
            return Err(Error::NotStrictlyProper);
        }
        if !g.num().is_real(tol * g.num().norm_max().max(T::one())) || !g.den().is_real(tol * g.den().norm_max().max(T::one())) {
            return Err(Error::InvalidArgument(format!("subsystem {k} has complex coefficients")));
        }
        let den = g.den().real_coeffs();
        let num = g.num().real_coeffs();
        let order = den.len() - 1;
        // den is monic
        for i in 0..order.saturating_sub(1) {
            a[(off + i, off + i + 1)] = T::one();
        }
        for j in 0..order {
            a[(off + order - 1, off + j)] = -den[j];
        }
        b[(off + order - 1, k)] = T::one();
        for (j, &v) in num.iter().enumerate() {
            c[(k, off + j)] = v;
        }
        off += order;
    }
    let yc = &m.y.matrix().clone() * &c;
    let a_cl = &a - &(&b * &yc);
    Ok(ClosedLoop { a: a_cl, b, c })
}

/// Pairs each non-real eigenvalue with its nearest conjugate and averages.
pub fn symmetrize_conjugates<T: Real>(vals: &[Complex<T>]) -> Vec<Complex<T>> {
    let scale = vals.iter().map(|v| v.norm()).fold(T::one(), T::max);
    let tol = T::tol(CONJ_PAIR_TOL) * scale;
    let mut out = Vec::with_capacity(vals.len());
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &v in vals {
        if v.im.abs() <= tol {
            out.push(Complex::new(v.re, T::zero()));
        } else if v.im > T::zero() {
            upper.push(v);
        } else {
            lower.push(v);
        }
    }
    let mut used = vec![false; lower.len()];
    for v in upper {
        let best = lower
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|(_, p), (_, q)| {
                (**p - v.conj()).norm().partial_cmp(&(**q - v.conj()).norm()).unwrap()
            })
            .map(|(i, _)| i);
        match best {
            Some(i) => {
                used[i] = true;
                let avg = (v + lower[i].conj()) * T::lit(0.5);
                out.push(avg);
                out.push(avg.conj());
            }
            None => out.push(v),
        }
    }
    out.extend(lower.iter().zip(&used).filter(|(_, u)| !**u).map(|(v, _)| *v));
    out.sort_by(|p, q| {
        q.re.partial_cmp(&p.re)
            .unwrap()
            .then(p.im.partial_cmp(&q.im).unwrap())
    });
    out
}

/// Closed-loop poles, largest real part first.
pub fn closed_loop_poles<T: Real>(m: &SystemModel<T>) -> Result<Vec<Complex<T>>> {
    let cl = assemble_closed_loop(m)?;
    Ok(symmetrize_conjugates(&eigenvalues(&cl.a)?))
}

fn poly_det<T: Real>(m: &[Vec<CPoly<T>>]) -> CPoly<T> {
    match m.len() {
        0 => CPoly::one(),
        1 => m[0][0].clone(),
        n => {
            let mut acc = CPoly::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<CPoly<T>>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, p)| p.clone()).collect())
                    .collect();
                let term = &m[0][j] * &poly_det(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// `det(diag(d_k) + diag(n_k)·Y)` by cofactor expansion; equals the
/// characteristic polynomial of the closed loop.
pub fn characteristic_polynomial<T: Real>(m: &SystemModel<T>) -> CPoly<T> {
    let n = m.n_nodes();
    let y = m.y.matrix();
    let rows: Vec<Vec<CPoly<T>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let off = m.subsystems[i].num().scale_real(y[(i, j)]);
                    if i == j {
                        m.subsystems[i].den() + &off
                    } else {
                        off
                    }
                })
                .collect()
        })
        .collect();
    poly_det(&rows)
}

/// Characteristic polynomial expressed in the `ν` coordinate of `part`.
pub fn mapped_characteristic_polynomial<T: Real>(m: &SystemModel<T>, part: &HalfPlaneRegion<T>) -> CPoly<T> {
    let (a, b) = part.affine_map();
    characteristic_polynomial(m).compose_affine(a, b)
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleMargin<T> {
    pub pole: Complex<T>,
    pub margin: T,
    pub part_margins: Vec<T>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionVerification<T> {
    pub ok: bool,
    pub worst_margin: T,
    pub worst_pole: Option<Complex<T>>,
    pub poles: Vec<PoleMargin<T>>,
}

/// Brute-force check that every closed-loop pole lies in the region.
pub fn verify_region<T: Real>(m: &SystemModel<T>) -> Result<RegionVerification<T>> {
    let poles = closed_loop_poles(m)?;
    Ok(verify_poles(&poles, &m.region))
}

pub fn verify_poles<T: Real, R: Region<T>>(poles: &[Complex<T>], region: &R) -> RegionVerification<T> {
    let mut worst = T::infinity();
    let mut worst_pole = None;
    let list: Vec<_> = poles
        .iter()
        .map(|&p| {
            let margin = region.contains(p).margin;
            if margin < worst {
                worst = margin;
                worst_pole = Some(p);
            }
            PoleMargin {
                pole: p,
                margin,
                part_margins: region.part_margins(p),
            }
        })
        .collect();
    RegionVerification {
        ok: worst >= -T::tol(REGION_TOL),
        worst_margin: worst,
        worst_pole,
        poles: list,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Thm1,
    Thm2,
}

/// Certification verdict for one half-plane part.
#[derive(Debug, Clone, Serialize)]
pub struct PartCertification<T> {
    pub region: String,
    pub network_ok: bool,
    /// `λ_min` of the Hermitian part of `Ỹ` (Thm. 1) or `min y^s + λ_min(Ξ)` (Thm. 2).
    pub network_margin: Option<T>,
    pub device_reports: Vec<PositivityReport<T>>,
    /// Nodes whose loop-transformed subsystem is not positive.
    pub failing_nodes: Vec<usize>,
    pub certified: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport<T> {
    pub theorem: Theorem,
    /// Conjunction over parts.
    pub network_ok: bool,
    pub certified: bool,
    pub parts: Vec<PartCertification<T>>,
    pub notes: Vec<String>,
}

impl<T> CertificationReport<T> {
    fn from_parts(theorem: Theorem, parts: Vec<PartCertification<T>>) -> Self {
        let network_ok = parts.iter().all(|p| p.network_ok);
        let certified = parts.iter().all(|p| p.certified);
        let mut notes = Vec::new();
        for p in &parts {
            if !p.network_ok {
                notes.push(format!("{}: network condition fails", p.region));
            }
            if !p.failing_nodes.is_empty() {
                notes.push(format!("{}: device condition fails at nodes {:?}", p.region, p.failing_nodes));
            }
        }
        Self {
            theorem,
            network_ok,
            certified,
            parts,
            notes,
        }
    }
}

fn device_checks<T: Real>(
    m: &SystemModel<T>,
    part: &HalfPlaneRegion<T>,
    phi: &[T],
    rho: &[T],
) -> Result<(Vec<PositivityReport<T>>, Vec<usize>)> {
    let (a, b) = part.affine_map();
    let mut reports = Vec::with_capacity(m.n_nodes());
    let mut failing = Vec::new();
    for (k, g) in m.subsystems.iter().enumerate() {
        let gh = g.substitute_affine(a, b)?.rotate(phi[k]);
        let rep = check_positive_siso(&gh.feedback(Complex::new(rho[k], T::zero()))?)?;
        if !rep.is_positive {
            failing.push(k);
        }
        reports.push(rep);
    }
    Ok((reports, failing))
}

/// Angle-compensated passivity certificate, part by part.
pub fn certify_thm1<T: Real>(m: &SystemModel<T>) -> Result<CertificationReport<T>> {
    let mut parts = Vec::new();
    for (part, lp) in m.region.parts().iter().zip(&m.loop_params) {
        let yhat = rotate_network(m.y.matrix(), &lp.phi)?;
        let n = m.n_nodes();
        let ytilde = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                yhat[(i, j)] - Complex::new(lp.rho[i], T::zero())
            } else {
                yhat[(i, j)]
            }
        });
        let (network_ok, lmin) = check_rotated_psd(&ytilde)?;
        let (device_reports, failing_nodes) = device_checks(m, part, &lp.phi, &lp.rho)?;
        parts.push(PartCertification {
            region: part.label(),
            network_ok,
            network_margin: Some(lmin),
            certified: network_ok && failing_nodes.is_empty(),
            device_reports,
            failing_nodes,
            notes: Vec::new(),
        });
    }
    Ok(CertificationReport::from_parts(Theorem::Thm1, parts))
}

/// Decentralized certificate from per-part grid codes and per-part source
/// indices `y_s[part][i]` (in partition source order).
pub fn certify_thm2<T: Real>(
    m: &SystemModel<T>,
    grid_codes: &[GridCode<T>],
    y_s: &[Vec<T>],
) -> Result<CertificationReport<T>> {
    let parts_r = m.region.parts();
    if grid_codes.len() != parts_r.len() || y_s.len() != parts_r.len() {
        return Err(Error::Dimension("need one grid code and one y_s vector per region part".into()));
    }
    let pt = m.y.partition();
    let (src, ld) = (pt.source_ids(), pt.load_ids());
    let mut parts = Vec::new();
    for ((part, gc), ys) in parts_r.iter().zip(grid_codes).zip(y_s) {
        if gc.region != *part {
            return Err(Error::InvalidGridCode(format!(
                "grid code for {} used with part {}",
                gc.region.label(),
                part.label()
            )));
        }
        if ys.len() != src.len() || gc.y_virtual.len() != ld.len() {
            return Err(Error::Dimension("y_s / y_v length does not match the partition".into()));
        }
        let mut notes = gc.notes.clone();
        let (network_ok, network_margin) = match gc.source_bound {
            Some(bound) if gc.ll_assumption_ok => {
                let min_ys = ys.iter().copied().fold(T::infinity(), T::min);
                let slack = min_ys - bound;
                (slack >= -T::tol(NETWORK_TOL), Some(slack))
            }
            _ => {
                notes.push("grid code carries no source bound".into());
                (false, None)
            }
        };
        let n = m.n_nodes();
        let mut rho = vec![T::zero(); n];
        for (i, &k) in src.iter().enumerate() {
            rho[k] = -ys[i];
        }
        for (i, &k) in ld.iter().enumerate() {
            rho[k] = gc.y_virtual[i];
        }
        let phi = vec![part.theta0(); n];
        let (device_reports, failing_nodes) = device_checks(m, part, &phi, &rho)?;
        parts.push(PartCertification {
            region: part.label(),
            network_ok,
            network_margin,
            certified: network_ok && failing_nodes.is_empty(),
            device_reports,
            failing_nodes,
            notes,
        });
    }
    Ok(CertificationReport::from_parts(Theorem::Thm2, parts))
}

/// Thm. 1 loop parameters equivalent to a Thm. 2 instance.
pub fn thm2_loop_params<T: Real>(m: &SystemModel<T>, grid_codes: &[GridCode<T>], y_s: &[Vec<T>]) -> Vec<LoopParams<T>> {
    let pt = m.y.partition();
    grid_codes
        .iter()
        .zip(y_s)
        .map(|(gc, ys)| {
            let n = m.n_nodes();
            let mut rho = vec![T::zero(); n];
            for (i, &k) in pt.source_ids().iter().enumerate() {
                rho[k] = -ys[i];
            }
            for (i, &k) in pt.load_ids().iter().enumerate() {
                rho[k] = gc.y_virtual[i];
            }
            LoopParams {
                phi: vec![gc.region.theta0(); n],
                rho,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{grid_code, Line, NodePartition};
    use approx::assert_relative_eq;

    fn integrators() -> SystemModel<f64> {
        let y = AdmittanceMatrix::build(
            &[Line { from: 0, to: 1, resistance: 1.0 }],
            2,
            NodePartition::new(vec![0], vec![1], 2).unwrap(),
        )
        .unwrap();
        let g = CRational::from_real(&[1.0], &[0.0, 1.0]).unwrap();
        SystemModel::new(vec![g.clone(), g], y, HalfPlaneRegion::shifted_lhp(0.0).unwrap().into()).unwrap()
    }

    #[test]
    fn integrator_pair() {
        let m = integrators();
        let cl = assemble_closed_loop(&m).unwrap();
        assert_eq!(cl.a.to_rows(), vec![vec![-1.0, 1.0], vec![1.0, -1.0]]);
        let p = closed_loop_poles(&m).unwrap();
        assert_relative_eq!(p[0].re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p[1].re, -2.0, epsilon = 1e-12);
        let v = verify_region(&m).unwrap();
        assert!(v.ok);
        assert_relative_eq!(v.worst_margin, 0.0, epsilon = 1e-12);
        let mut m2 = m.clone();
        m2.region = HalfPlaneRegion::shifted_lhp(-1.0).unwrap().into();
        let v = verify_region(&m2).unwrap();
        assert!(!v.ok);
        assert_relative_eq!(v.worst_pole.unwrap().re, 0.0, epsilon = 1e-12);
        let rep = certify_thm1(&m).unwrap();
        assert!(rep.certified, "{rep:?}");
    }

    #[test]
    fn first_order_pair() {
        let y = AdmittanceMatrix::build(
            &[Line { from: 0, to: 1, resistance: 0.5 }],
            2,
            NodePartition::new(vec![0], vec![1], 2).unwrap(),
        )
        .unwrap();
        let g = CRational::from_real(&[1.0], &[1.0, 1.0]).unwrap();
        let m = SystemModel::new(vec![g.clone(), g], y, HalfPlaneRegion::shifted_lhp(0.0).unwrap().into()).unwrap();
        let p = closed_loop_poles(&m).unwrap();
        assert_relative_eq!(p[0].re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(p[1].re, -5.0, epsilon = 1e-12);
    }

    #[test]
    fn non_strictly_proper_rejected() {
        let mut m = integrators();
        m.subsystems[0] = CRational::from_real(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(assemble_closed_loop(&m), Err(Error::NotStrictlyProper)));
    }

    #[test]
    fn characteristic_polynomial_matches_eigenvalues() {
        let y = AdmittanceMatrix::build(
            &[Line { from: 0, to: 1, resistance: 0.5 }, Line { from: 1, to: 2, resistance: 0.25 }],
            3,
            NodePartition::new(vec![0, 1], vec![2], 3).unwrap(),
        )
        .unwrap();
        let subs = vec![
            CRational::from_real(&[2.0, 1.0], &[3.0, 1.5, 1.0]).unwrap(),
            CRational::from_real(&[1.0], &[0.5, 1.0]).unwrap(),
            CRational::from_real(&[1.0], &[-0.2, 1.0]).unwrap(),
        ];
        let m = SystemModel::new(subs, y, HalfPlaneRegion::shifted_lhp(0.0).unwrap().into()).unwrap();
        let p = characteristic_polynomial(&m);
        assert_eq!(p.degree(), Some(4));
        for z in closed_loop_poles(&m).unwrap() {
            assert!(p.eval(z).norm() < 1e-8 * p.eval_scale(z), "{z}");
        }
    }

    #[test]
    fn conjugate_symmetrization() {
        let v = vec![Complex::new(-1.0, 2.0 + 1e-12), Complex::new(-1.0 + 1e-12, -2.0), Complex::new(3.0, 1e-14)];
        let s = symmetrize_conjugates(&v);
        assert_eq!(s[0], Complex::new(3.0, 0.0));
        assert_eq!(s[1], s[2].conj());
    }

    #[test]
    fn cpl_without_loop_transform_fails_thm1() {
        let mut m = integrators();
        m.subsystems[1] = CRational::from_real(&[1.0], &[-0.1, 1.0]).unwrap();
        let rep = certify_thm1(&m).unwrap();
        assert!(!rep.certified);
        assert_eq!(rep.parts[0].failing_nodes, vec![1]);
    }

    fn star_model(ys: f64) -> (SystemModel<f64>, Vec<GridCode<f64>>, Vec<Vec<f64>>) {
        let lines = [
            Line { from: 0, to: 2, resistance: 0.1 },
            Line { from: 1, to: 2, resistance: 0.1 },
        ];
        let y = AdmittanceMatrix::build(&lines, 3, NodePartition::new(vec![0, 1], vec![2], 3).unwrap()).unwrap();
        let region = HalfPlaneRegion::shifted_lhp(0.0).unwrap();
        let (cl, yl) = (2e-3, 5.0);
        let gc = grid_code(&y, &region, &[(cl, yl)]).unwrap();
        let src = crate::devices::GenericSecondOrder::new(1.0, 2.0, 10.0, 20.0).tf();
        let cpl = CRational::from_real(&[1.0], &[-yl, cl]).unwrap();
        let m = SystemModel::new(vec![src.clone(), src, cpl], y, region.into()).unwrap();
        (m, vec![gc], vec![vec![ys, ys]])
    }

    #[test]
    fn star_thm2() {
        let (m, gc, ys) = star_model(5.0);
        let rep = certify_thm2(&m, &gc, &ys).unwrap();
        assert!(rep.certified, "{rep:?}");
        let mut m1 = m.clone();
        m1.loop_params = thm2_loop_params(&m, &gc, &ys);
        assert!(certify_thm1(&m1).unwrap().certified);
        assert!(verify_region(&m).unwrap().ok);

        let (m, gc, ys) = star_model(3.0);
        let rep = certify_thm2(&m, &gc, &ys).unwrap();
        assert!(!rep.certified && !rep.network_ok);
    }

    #[test]
    fn strip_with_zero_index_passes_network() {
        let (m, _, _) = star_model(0.0);
        let region = HalfPlaneRegion::horizontal_strip(10.0).unwrap();
        let gc = grid_code(&m.y, &region, &[(2e-3, 5.0)]).unwrap();
        let mut m = m;
        m.region = region.into();
        let rep = certify_thm2(&m, &[gc], &[vec![0.0, 0.0]]).unwrap();
        assert!(rep.network_ok, "{rep:?}");
    }
}
