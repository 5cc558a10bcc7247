//! DC-microgrid assembly: devices on a resistive network around an
//! operating point, wired to grid codes, synthesis and certification.

use serde::Serialize;

use crate::devices::{
    admissible_index, check_compliance, cpl_conductance, equilibrium_solve, source_upper_bound, ComplianceReport, Device,
    Equilibrium, GenericSecondOrder, SourceBound,
};
use crate::dstability::{certify_thm1, certify_thm2, CertificationReport, LoopParams, SystemModel, Theorem};
use crate::error::{Error, Result};
use crate::network::{grid_code, AdmittanceMatrix, GridCode, Line, NodePartition};
use crate::region::{CompositeRegion, Region};
use crate::scalar::Real;
use crate::sim::{DisturbanceSpec, PulseInput};

/// Relative tolerance on `i = Y·u` for a pinned equilibrium.
pub const PINNED_EQ_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Microgrid<T> {
    pub y: AdmittanceMatrix<T>,
    pub devices: Vec<Device<T>>,
    pub equilibrium: Equilibrium<T>,
    pub region: CompositeRegion<T>,
}

/// Per-part synthesis outcome for every source.
#[derive(Debug, Clone, Serialize)]
pub struct PartSynthesis<T> {
    pub region: String,
    pub grid_code: GridCode<T>,
    /// Compliance is `None` when the grid code cannot be used.
    pub sources: Vec<SourceSynthesis<T>>,
    pub all_compliant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceSynthesis<T> {
    pub node: usize,
    pub kind: &'static str,
    pub bound: SourceBound<T>,
    pub compliance: Option<ComplianceReport<T>>,
}

impl<T: Real> Microgrid<T> {
    /// Solves for the operating point unless one is pinned.
    pub fn new(
        lines: &[Line<T>],
        devices: Vec<Device<T>>,
        region: CompositeRegion<T>,
        pinned: Option<Equilibrium<T>>,
    ) -> Result<Self> {
        let n = devices.len();
        let (src, ld): (Vec<usize>, Vec<usize>) = (0..n).partition(|&k| devices[k].is_source());
        let y = AdmittanceMatrix::build(lines, n, NodePartition::new(src, ld, n)?)?;
        let equilibrium = match pinned {
            Some(eq) => {
                check_pinned(&y, &eq)?;
                eq
            }
            None => equilibrium_solve(&y, &devices)?,
        };
        Ok(Self {
            y,
            devices,
            equilibrium,
            region,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.devices.len()
    }

    pub fn source_ids(&self) -> &[usize] {
        self.y.partition().source_ids()
    }

    pub fn load_ids(&self) -> &[usize] {
        self.y.partition().load_ids()
    }

    pub fn source_coeffs(&self) -> Result<Vec<GenericSecondOrder<T>>> {
        self.source_ids()
            .iter()
            .map(|&k| self.devices[k].source_coeffs(self.equilibrium.u_star[k]))
            .collect()
    }

    /// `(C_l, y_l)` per load in partition order.
    pub fn load_params(&self) -> Result<Vec<(T, T)>> {
        self.load_ids()
            .iter()
            .map(|&k| match &self.devices[k] {
                Device::Cpl(p) => Ok((p.c_l, cpl_conductance(p, self.equilibrium.u_star[k])?)),
                _ => Err(Error::Internal("load node without CPL".into())),
            })
            .collect()
    }

    pub fn grid_codes(&self) -> Result<Vec<GridCode<T>>> {
        let loads = self.load_params()?;
        self.region.parts().iter().map(|r| grid_code(&self.y, r, &loads)).collect()
    }

    pub fn synthesis(&self) -> Result<Vec<PartSynthesis<T>>> {
        let coeffs = self.source_coeffs()?;
        let mut out = Vec::new();
        for gc in self.grid_codes()? {
            let mut sources = Vec::new();
            for (g, &k) in coeffs.iter().zip(self.source_ids()) {
                let bound = source_upper_bound(g, &gc.region)?;
                let compliance = if gc.ll_assumption_ok { Some(check_compliance(g, &gc)?) } else { None };
                sources.push(SourceSynthesis {
                    node: k,
                    kind: self.devices[k].kind(),
                    bound,
                    compliance,
                });
            }
            let all_compliant = sources.iter().all(|s| s.compliance.as_ref().is_some_and(|c| c.compliant));
            out.push(PartSynthesis {
                region: gc.region.label(),
                grid_code: gc,
                sources,
                all_compliant,
            });
        }
        Ok(out)
    }

    /// Largest admissible `y^s` per part and source: the compliance choice,
    /// else the local supremum backed off like a compliant choice, else 0.
    pub fn default_indices(&self, synthesis: &[PartSynthesis<T>]) -> Vec<Vec<T>> {
        synthesis
            .iter()
            .map(|p| {
                p.sources
                    .iter()
                    .map(|s| {
                        s.compliance
                            .as_ref()
                            .and_then(|c| c.y_s)
                            .unwrap_or_else(|| admissible_index(&s.bound))
                    })
                    .collect()
            })
            .collect()
    }

    /// Closed-loop model with `φ = θ₀` and `ρ = 0` in every part.
    pub fn system_model(&self) -> Result<SystemModel<T>> {
        let subs = (0..self.n_nodes())
            .map(|k| self.devices[k].tf(self.equilibrium.u_star[k]))
            .collect::<Result<Vec<_>>>()?;
        SystemModel::new(subs, self.y.clone(), self.region.clone())
    }

    /// Model with the loop transform `ρ = y^v` (loads), `-y^s` (sources).
    pub fn system_model_with_indices(&self, grid_codes: &[GridCode<T>], y_s: &[Vec<T>]) -> Result<SystemModel<T>> {
        let mut m = self.system_model()?;
        if grid_codes.len() != y_s.len() || y_s.len() != self.region.parts().len() {
            return Err(Error::Dimension("need one grid code and index vector per region part".into()));
        }
        for (part, (gc, ys)) in grid_codes.iter().zip(y_s).enumerate() {
            if ys.len() != self.source_ids().len() {
                return Err(Error::Dimension(format!(
                    "{} indices for {} sources",
                    ys.len(),
                    self.source_ids().len()
                )));
            }
            let n = self.n_nodes();
            let mut rho = vec![T::zero(); n];
            for (i, &k) in self.source_ids().iter().enumerate() {
                rho[k] = -ys[i];
            }
            for (i, &k) in self.load_ids().iter().enumerate() {
                rho[k] = gc.y_virtual[i];
            }
            m.set_loop_params(
                part,
                LoopParams {
                    phi: vec![gc.region.theta0(); n],
                    rho,
                },
            )?;
        }
        Ok(m)
    }

    /// Runs either theorem with indices from `y_s` or, if absent, from synthesis.
    pub fn certify(&self, theorem: Theorem, y_s: Option<&[Vec<T>]>) -> Result<CertificationReport<T>> {
        let gcs = self.grid_codes()?;
        let ys = match y_s {
            Some(v) => v.to_vec(),
            None => self.default_indices(&self.synthesis()?),
        };
        match theorem {
            Theorem::Thm1 => certify_thm1(&self.system_model_with_indices(&gcs, &ys)?),
            Theorem::Thm2 => certify_thm2(&self.system_model()?, &gcs, &ys),
        }
    }

    /// Scales the droop resistance at `node` by `factor` and resets the
    /// reference to `u* + R_d i*`, which keeps the operating point.
    pub fn retune_droop(&mut self, node: usize, factor: T) -> Result<()> {
        let (u, i) = (self.equilibrium.u_star[node], self.equilibrium.i_star[node]);
        let (u_r, r_d) = match self.devices.get_mut(node) {
            Some(Device::EssBoost(p)) => (&mut p.u_r, &mut p.r_d),
            Some(Device::EssBuck(p)) => (&mut p.u_r, &mut p.r_d),
            _ => return Err(Error::InvalidArgument(format!("node {node} has no droop source"))),
        };
        *r_d = *r_d * factor;
        *u_r = u + *r_d * i;
        Ok(())
    }

    pub fn disturbance_pulse(&self, d: &DisturbanceSpec<T>) -> Result<PulseInput<T>> {
        match self.devices.get(d.node) {
            Some(Device::Cpl(p)) => d.to_pulse(p.p, self.equilibrium.u_star[d.node]),
            _ => Err(Error::InvalidArgument(format!("disturbance node {} is not a load", d.node))),
        }
    }
}

fn check_pinned<T: Real>(y: &AdmittanceMatrix<T>, eq: &Equilibrium<T>) -> Result<()> {
    let n = y.n_nodes();
    if eq.u_star.len() != n || eq.i_star.len() != n {
        return Err(Error::Dimension("pinned equilibrium length does not match node count".into()));
    }
    let m = y.matrix();
    let scale = eq.i_star.iter().fold(T::one(), |a, v| a.max(v.abs()));
    for k in 0..n {
        let yu = (0..n).fold(T::zero(), |a, j| a + m[(k, j)] * eq.u_star[j]);
        if (yu - eq.i_star[k]).abs() > T::tol(PINNED_EQ_TOL) * scale {
            return Err(Error::Equilibrium(format!("pinned equilibrium violates i = Y u at node {k}")));
        }
    }
    if let Some(k) = eq.u_star.iter().position(|&u| !(u > T::zero())) {
        return Err(Error::Equilibrium(format!("non-positive pinned voltage at node {k}")));
    }
    Ok(())
}
