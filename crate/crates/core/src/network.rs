//! Resistive network admittance matrix, rotation, and the Schur-complement
//! grid code.

use num_complex::Complex;
use serde::Serialize;

use crate::devices::virtual_admittance_raw;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, solve, symmetric_eigenvalues, Matrix};
use crate::region::HalfPlaneRegion;
use crate::scalar::{cis, cos_snapped, Real};

/// Node indices (0-based) split into sources and loads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodePartition {
    source_ids: Vec<usize>,
    load_ids: Vec<usize>,
}

impl NodePartition {
    /// Validates that the two lists are disjoint and cover `0..n_nodes`.
    pub fn new(source_ids: Vec<usize>, load_ids: Vec<usize>, n_nodes: usize) -> Result<Self> {
        let mut seen = vec![false; n_nodes];
        for &k in source_ids.iter().chain(&load_ids) {
            if k >= n_nodes {
                return Err(Error::InvalidPartition(format!(
                    "node {k} out of range for {n_nodes} nodes"
                )));
            }
            if seen[k] {
                return Err(Error::InvalidPartition(format!("node {k} listed twice")));
            }
            seen[k] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("node {k} is neither source nor load")));
        }
        Ok(Self {
            source_ids,
            load_ids,
        })
    }

    pub fn source_ids(&self) -> &[usize] {
        &self.source_ids
    }

    pub fn load_ids(&self) -> &[usize] {
        &self.load_ids
    }

    pub fn n_nodes(&self) -> usize {
        self.source_ids.len() + self.load_ids.len()
    }

    pub fn is_source(&self, k: usize) -> bool {
        self.source_ids.contains(&k)
    }
}

/// A resistive line between two nodes (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line<T> {
    pub from: usize,
    pub to: usize,
    pub resistance: T,
}

/// Weighted Laplacian of a resistive network with its source/load partition.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix<T> {
    y: Matrix<T>,
    partition: NodePartition,
}

impl<T: Real> AdmittanceMatrix<T> {
    /// `Y[i][j] = -1/R_ij`, `Y[i][i] = Σ_k 1/R_ik`; parallel lines add.
    pub fn build(lines: &[Line<T>], n_nodes: usize, partition: NodePartition) -> Result<Self> {
        if partition.n_nodes() != n_nodes {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} nodes, network has {n_nodes}",
                partition.n_nodes()
            )));
        }
        let mut y = Matrix::zeros(n_nodes, n_nodes);
        for l in lines {
            if l.from >= n_nodes || l.to >= n_nodes {
                return Err(Error::InvalidArgument(format!(
                    "line {}-{} references a node outside 0..{n_nodes}",
                    l.from, l.to
                )));
            }
            if l.from == l.to {
                return Err(Error::InvalidArgument(format!("self-loop at node {}", l.from)));
            }
            if !(l.resistance > T::zero()) || !l.resistance.is_finite() {
                return Err(Error::NonPositiveResistance(l.from, l.to));
            }
            let g = T::one() / l.resistance;
            y[(l.from, l.to)] -= g;
            y[(l.to, l.from)] -= g;
            y[(l.from, l.from)] += g;
            y[(l.to, l.to)] += g;
        }
        if !connected(lines, n_nodes) {
            return Err(Error::DisconnectedGraph);
        }
        Ok(Self { y, partition })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.y
    }

    pub fn partition(&self) -> &NodePartition {
        &self.partition
    }

    pub fn n_nodes(&self) -> usize {
        self.y.rows()
    }

    pub fn yss(&self) -> Matrix<T> {
        let s = self.partition.source_ids();
        self.y.select(s, s)
    }

    pub fn ysl(&self) -> Matrix<T> {
        self.y
            .select(self.partition.source_ids(), self.partition.load_ids())
    }

    pub fn yls(&self) -> Matrix<T> {
        self.y
            .select(self.partition.load_ids(), self.partition.source_ids())
    }

    pub fn yll(&self) -> Matrix<T> {
        let l = self.partition.load_ids();
        self.y.select(l, l)
    }
}

fn connected<T>(lines: &[Line<T>], n: usize) -> bool {
    if n == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for l in lines {
        adj[l.from].push(l.to);
        adj[l.to].push(l.from);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(k) = stack.pop() {
        for &m in &adj[k] {
            if !seen[m] {
                seen[m] = true;
                stack.push(m);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// `Ŷ = diag(e^{-jφ_k}) · Y`.
pub fn rotate_network<T: Real>(y: &Matrix<T>, phi: &[T]) -> Result<Matrix<Complex<T>>> {
    if phi.len() != y.rows() {
        return Err(Error::Dimension(format!(
            "{} rotation angles for {} nodes",
            phi.len(),
            y.rows()
        )));
    }
    Ok(Matrix::from_fn(y.rows(), y.cols(), |i, j| {
        cis(phi[i]).conj() * y[(i, j)]
    }))
}

/// `(λ_min(Ŷ + Ŷ^H) ≥ -1e-9·‖Ŷ‖, λ_min)`.
pub fn check_rotated_psd<T: Real>(y_hat: &Matrix<Complex<T>>) -> Result<(bool, T)> {
    if !y_hat.is_square() {
        return Err(Error::Dimension("rotated network matrix must be square".into()));
    }
    let lmin = hermitian_eigenvalues(&y_hat.hermitian_sum())?
        .first()
        .copied()
        .unwrap_or(T::zero());
    let scale = y_hat.max_abs().max(T::one());
    Ok((lmin >= -T::tol(1e-9) * scale, lmin))
}

/// `Y^ll cos θ₀ - diag(y^v)` and its smallest eigenvalue.
pub fn ll_block<T: Real>(y: &AdmittanceMatrix<T>, theta0: T, y_virtual: &[T]) -> Result<(Matrix<T>, T)> {
    let nl = y.partition().load_ids().len();
    if y_virtual.len() != nl {
        return Err(Error::Dimension(format!(
            "{} virtual admittances for {nl} loads",
            y_virtual.len()
        )));
    }
    let c = cos_snapped(theta0);
    let ll = &y.yll().scale(c) - &Matrix::diag(y_virtual);
    let lmin = symmetric_eigenvalues(&ll)?.first().copied().unwrap_or(T::infinity());
    Ok((ll, lmin))
}

/// `Ξ = Y^ss cos θ₀ − Y^sl (Y^ll cos θ₀ − diag(y^v))^{-1} Y^ls cos² θ₀`.
pub fn schur_xi<T: Real>(y: &AdmittanceMatrix<T>, theta0: T, y_virtual: &[T]) -> Result<Matrix<T>> {
    let (ll, lmin) = ll_block(y, theta0, y_virtual)?;
    if !(lmin > T::zero()) {
        return Err(Error::LlAssumptionViolated {
            lambda_min: lmin.to_f64_lossy(),
        });
    }
    let c = cos_snapped(theta0);
    let x = solve(&ll, &y.yls())?;
    let corr = (&y.ysl() * &x).scale(c * c);
    let xi = &y.yss().scale(c) - &corr;
    let n = xi.rows();
    Ok(Matrix::from_fn(n, n, |i, j| (xi[(i, j)] + xi[(j, i)]) * T::lit(0.5)))
}

/// Broadcast grid code for one half-plane region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCode<T> {
    pub region: HalfPlaneRegion<T>,
    /// `λ_min(Ξ)`; `None` when the load-side assumption fails.
    pub lambda_min_xi: Option<T>,
    /// Lower bound `-λ_min(Ξ)` on every source positivity index.
    pub source_bound: Option<T>,
    pub y_virtual: Vec<T>,
    pub ll_assumption_ok: bool,
    /// `λ_min(Y^ll cos θ₀ − diag(y^v))`.
    pub ll_lambda_min: T,
    pub notes: Vec<String>,
}

impl<T: Real> GridCode<T> {
    pub fn bound(&self) -> Result<T> {
        self.source_bound
            .ok_or_else(|| Error::InvalidGridCode("load-side assumption violated".into()))
    }
}

/// Note attached when the load-side assumption fails.
pub const INTERVENTION_NOTE: &str =
    "load-side assumption violated: operator intervention needed (loosen the target region or reduce load)";

/// Grid code for `region` given per-load `(C_l, y_l)` in partition order.
pub fn grid_code<T: Real>(
    y: &AdmittanceMatrix<T>,
    region: &HalfPlaneRegion<T>,
    loads: &[(T, T)],
) -> Result<GridCode<T>> {
    let p = y.partition();
    if p.source_ids().is_empty() || p.load_ids().is_empty() {
        return Err(Error::InvalidPartition(
            "grid code needs at least one source and one load".into(),
        ));
    }
    let yv: Vec<T> = loads
        .iter()
        .map(|&(cl, yl)| virtual_admittance_raw(cl, yl, region))
        .collect();
    let (_, ll_min) = ll_block(y, region.theta0(), &yv)?;
    let mut notes = Vec::new();
    if cos_snapped(region.theta0()) == T::zero() {
        notes.push("theta0 = pi/2: network condition holds for any y_s >= 0".to_string());
    }
    if yv.iter().any(|&v| v < T::zero()) {
        notes.push("negative virtual admittance (taken literally from the load model)".to_string());
    }
    match schur_xi(y, region.theta0(), &yv) {
        Ok(xi) => {
            let lmin = symmetric_eigenvalues(&xi)?[0];
            Ok(GridCode {
                region: *region,
                lambda_min_xi: Some(lmin),
                source_bound: Some(T::zero() - lmin),
                y_virtual: yv,
                ll_assumption_ok: true,
                ll_lambda_min: ll_min,
                notes,
            })
        }
        Err(Error::LlAssumptionViolated { .. }) => {
            notes.push(INTERVENTION_NOTE.to_string());
            Ok(GridCode {
                region: *region,
                lambda_min_xi: None,
                source_bound: None,
                y_virtual: yv,
                ll_assumption_ok: false,
                ll_lambda_min: ll_min,
                notes,
            })
        }
        Err(e) => Err(e),
    }
}
