//! JSON scenario files. Units are spelled out in field names; short
//! symbol names are accepted as aliases. Node numbers are 1-based on disk.

use serde::{Deserialize, Serialize};

use crate::devices::{CplParams, Device, EssBoostParams, EssBuckParams, Equilibrium, PvParams};
use crate::error::{Error, Result};
use crate::microgrid::Microgrid;
use crate::network::Line;
use crate::region::{CompositeRegion, HalfPlaneRegion};
use crate::sim::{DisturbanceSpec, DEFAULT_BAND, DEFAULT_DT, DEFAULT_T_END};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub topology: Topology,
    pub devices: Vec<DeviceSpec>,
    pub region: Vec<RegionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<EquilibriumSpec>,
    /// `y_s[part][i]` for the i-th source in ascending node order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_s: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<DisturbanceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub nodes: usize,
    pub edges: Vec<EdgeSpec>,
    /// Optional explicit partition; must agree with the device types.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loads: Option<Vec<usize>>,
}

/// A line, written `[from, to, R_ohm]` or `{"from", "to", "R_ohm"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "EdgeRepr", into = "EdgeRepr")]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    pub r_ohm: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeRepr {
    Tuple(usize, usize, f64),
    Object {
        from: usize,
        to: usize,
        #[serde(rename = "R_ohm", alias = "R")]
        r_ohm: f64,
    },
}

impl From<EdgeRepr> for EdgeSpec {
    fn from(e: EdgeRepr) -> Self {
        match e {
            EdgeRepr::Tuple(from, to, r_ohm) | EdgeRepr::Object { from, to, r_ohm } => Self { from, to, r_ohm },
        }
    }
}

impl From<EdgeSpec> for EdgeRepr {
    fn from(e: EdgeSpec) -> Self {
        EdgeRepr::Tuple(e.from, e.to, e.r_ohm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DeviceSpec {
    EssBoost(EssSpec),
    EssBuck(EssSpec),
    Pv(PvSpec),
    Cpl(CplSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EssSpec {
    pub node: usize,
    #[serde(rename = "C_farad", alias = "C")]
    pub c: f64,
    #[serde(rename = "E_volt", alias = "E")]
    pub e: f64,
    #[serde(rename = "U_r_volt", alias = "U_r")]
    pub u_r: f64,
    #[serde(rename = "R_d_ohm", alias = "R_d")]
    pub r_d: f64,
    #[serde(rename = "kP_u", alias = "kP")]
    pub kp: f64,
    #[serde(rename = "kI_u", alias = "kI")]
    pub ki: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvSpec {
    pub node: usize,
    #[serde(rename = "C_farad", alias = "C")]
    pub c: f64,
    #[serde(rename = "kP_u", alias = "kP")]
    pub kp: f64,
    #[serde(rename = "kI_u", alias = "kI")]
    pub ki: f64,
    #[serde(rename = "U_r_pv_volt", alias = "U_r_pv")]
    pub u_r_pv: f64,
    #[serde(rename = "i_pv_star_amp", alias = "i_pv_star")]
    pub i_pv_star: f64,
    #[serde(rename = "g_pv_star_siemens", alias = "g_pv_star", default = "default_g_pv")]
    pub g_pv_star: f64,
}

/// Placeholder incremental conductance when a scenario gives none.
pub const DEFAULT_G_PV: f64 = -0.5;

fn default_g_pv() -> f64 {
    DEFAULT_G_PV
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CplSpec {
    pub node: usize,
    #[serde(rename = "C_l_farad", alias = "C_l")]
    pub c_l: f64,
    #[serde(rename = "P_watt", alias = "P")]
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    ShiftedLhp {
        #[serde(rename = "alpha_per_s", alias = "alpha")]
        alpha: f64,
    },
    Sector {
        #[serde(rename = "beta_rad", alias = "beta")]
        beta: f64,
    },
    HorizontalStrip {
        #[serde(rename = "gamma_rad_per_s", alias = "gamma")]
        gamma: f64,
    },
    General {
        #[serde(rename = "theta0_rad", alias = "theta0")]
        theta0: f64,
        #[serde(rename = "omega0_rad_per_s", alias = "omega0")]
        omega0: f64,
        #[serde(rename = "sigma0_per_s", alias = "sigma0")]
        sigma0: f64,
    },
}

impl RegionSpec {
    pub fn to_region(&self) -> Result<HalfPlaneRegion<f64>> {
        match *self {
            RegionSpec::ShiftedLhp { alpha } => HalfPlaneRegion::shifted_lhp(alpha),
            RegionSpec::Sector { beta } => HalfPlaneRegion::sector(beta),
            RegionSpec::HorizontalStrip { gamma } => HalfPlaneRegion::horizontal_strip(gamma),
            RegionSpec::General { theta0, omega0, sigma0 } => HalfPlaneRegion::new(theta0, omega0, sigma0),
        }
    }

    /// Parses the CLI shorthand `lhp:-8`, `sec:1.309`, `hs:75.4`,
    /// `general:θ₀,ω₀,σ₀`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, args) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidRegion(format!("expected kind:params, got '{text}'")))?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidRegion(format!("'{text}': {e}")))?;
        let one = |v: &[f64]| -> Result<f64> {
            match v {
                [x] => Ok(*x),
                _ => Err(Error::InvalidRegion(format!("'{text}' takes one parameter"))),
            }
        };
        match kind {
            "lhp" | "shifted_lhp" => Ok(RegionSpec::ShiftedLhp { alpha: one(&nums)? }),
            "sec" | "sector" => Ok(RegionSpec::Sector { beta: one(&nums)? }),
            "hs" | "horizontal_strip" => Ok(RegionSpec::HorizontalStrip { gamma: one(&nums)? }),
            "general" => match nums[..] {
                [theta0, omega0, sigma0] => Ok(RegionSpec::General { theta0, omega0, sigma0 }),
                _ => Err(Error::InvalidRegion(format!("'{text}' takes three parameters"))),
            },
            _ => Err(Error::InvalidRegion(format!("unknown region kind '{kind}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumSpec {
    pub u_volt: Vec<f64>,
    pub i_amp: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceJson {
    pub node: usize,
    /// Fraction of the nominal load power.
    pub magnitude: f64,
    pub start_s: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    #[serde(default = "default_t_end")]
    pub t_end_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default = "default_band")]
    pub band: f64,
}

fn default_t_end() -> f64 {
    DEFAULT_T_END
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_band() -> f64 {
    DEFAULT_BAND
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            t_end_s: DEFAULT_T_END,
            dt_s: DEFAULT_DT,
            band: DEFAULT_BAND,
        }
    }
}

impl DeviceSpec {
    pub fn node(&self) -> usize {
        match self {
            DeviceSpec::EssBoost(s) | DeviceSpec::EssBuck(s) => s.node,
            DeviceSpec::Pv(s) => s.node,
            DeviceSpec::Cpl(s) => s.node,
        }
    }

    pub fn to_device(&self) -> Device<f64> {
        match *self {
            DeviceSpec::EssBoost(s) => Device::EssBoost(EssBoostParams {
                c: s.c,
                e: s.e,
                u_r: s.u_r,
                r_d: s.r_d,
                kp: s.kp,
                ki: s.ki,
            }),
            DeviceSpec::EssBuck(s) => Device::EssBuck(EssBuckParams {
                c: s.c,
                e: s.e,
                u_r: s.u_r,
                r_d: s.r_d,
                kp: s.kp,
                ki: s.ki,
            }),
            DeviceSpec::Pv(s) => Device::Pv(PvParams {
                c: s.c,
                kp: s.kp,
                ki: s.ki,
                u_r_pv: s.u_r_pv,
                i_pv_star: s.i_pv_star,
                g_pv_star: s.g_pv_star,
            }),
            DeviceSpec::Cpl(s) => Device::Cpl(CplParams { c_l: s.c_l, p: s.p }),
        }
    }

    pub fn from_device(node: usize, d: &Device<f64>) -> Self {
        match *d {
            Device::EssBoost(p) => DeviceSpec::EssBoost(EssSpec {
                node,
                c: p.c,
                e: p.e,
                u_r: p.u_r,
                r_d: p.r_d,
                kp: p.kp,
                ki: p.ki,
            }),
            Device::EssBuck(p) => DeviceSpec::EssBuck(EssSpec {
                node,
                c: p.c,
                e: p.e,
                u_r: p.u_r,
                r_d: p.r_d,
                kp: p.kp,
                ki: p.ki,
            }),
            Device::Pv(p) => DeviceSpec::Pv(PvSpec {
                node,
                c: p.c,
                kp: p.kp,
                ki: p.ki,
                u_r_pv: p.u_r_pv,
                i_pv_star: p.i_pv_star,
                g_pv_star: p.g_pv_star,
            }),
            Device::Cpl(p) => DeviceSpec::Cpl(CplSpec { node, c_l: p.c_l, p: p.p }),
        }
    }

    fn check_values(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Schema(format!("node {}: {name} must be positive, got {v}", self.node())))
            }
        };
        match self {
            DeviceSpec::EssBoost(s) | DeviceSpec::EssBuck(s) => {
                pos("C", s.c)?;
                pos("R_d", s.r_d)?;
                pos("U_r", s.u_r)?;
                pos("E", s.e)?;
                if s.kp < 0.0 || s.ki < 0.0 {
                    return Err(Error::Schema(format!("node {}: PI gains must be non-negative", s.node)));
                }
            }
            DeviceSpec::Pv(s) => {
                pos("C", s.c)?;
                pos("U_r_pv", s.u_r_pv)?;
                pos("i_pv_star", s.i_pv_star)?;
            }
            DeviceSpec::Cpl(s) => {
                pos("C_l", s.c_l)?;
                pos("P", s.p)?;
            }
        }
        Ok(())
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        crate::report::to_json_plain(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.topology.nodes;
        let in_range = |k: usize, what: &str| {
            if (1..=n).contains(&k) {
                Ok(())
            } else {
                Err(Error::Schema(format!("{what} references node {k}, valid range is 1..={n}")))
            }
        };
        for e in &self.topology.edges {
            in_range(e.from, "edge")?;
            in_range(e.to, "edge")?;
        }
        let src: Vec<usize> = {
            let mut v: Vec<usize> = self
                .devices
                .iter()
                .filter(|d| !matches!(d, DeviceSpec::Cpl(_)))
                .map(DeviceSpec::node)
                .collect();
            v.sort_unstable();
            v
        };
        for (given, want_source, what) in [(&self.topology.sources, true, "sources"), (&self.topology.loads, false, "loads")] {
            if let Some(list) = given {
                let mut list = list.clone();
                list.sort_unstable();
                let expect: Vec<usize> = (1..=n).filter(|k| src.contains(k) == want_source).collect();
                if list != expect {
                    return Err(Error::Schema(format!("topology.{what} disagrees with the device types")));
                }
            }
        }
        if self.devices.len() != n {
            return Err(Error::Schema(format!("{} devices for {n} nodes", self.devices.len())));
        }
        let mut seen = vec![false; n];
        for d in &self.devices {
            in_range(d.node(), "device")?;
            if std::mem::replace(&mut seen[d.node() - 1], true) {
                return Err(Error::Schema(format!("node {} has two devices", d.node())));
            }
            d.check_values()?;
        }
        if self.region.is_empty() {
            return Err(Error::Schema("region list is empty".into()));
        }
        if let Some(eq) = &self.equilibrium {
            if eq.u_volt.len() != n || eq.i_amp.len() != n {
                return Err(Error::Schema("equilibrium vectors must have one entry per node".into()));
            }
        }
        if let Some(d) = &self.disturbance {
            in_range(d.node, "disturbance")?;
            if !(d.duration_s > 0.0) {
                return Err(Error::Schema("disturbance duration must be positive".into()));
            }
        }
        if let Some(ys) = &self.y_s {
            let n_src = self.devices.iter().filter(|d| !matches!(d, DeviceSpec::Cpl(_))).count();
            if ys.len() != self.region.len() || ys.iter().any(|v| v.len() != n_src) {
                return Err(Error::Schema(format!(
                    "y_s must have {} rows of {n_src} source indices",
                    self.region.len()
                )));
            }
        }
        Ok(())
    }

    pub fn composite_region(&self) -> Result<CompositeRegion<f64>> {
        CompositeRegion::new(self.region.iter().map(RegionSpec::to_region).collect::<Result<_>>()?)
    }

    /// Devices in node order (0-based).
    pub fn devices_in_order(&self) -> Vec<Device<f64>> {
        let mut d: Vec<_> = self.devices.iter().map(|s| (s.node(), s.to_device())).collect();
        d.sort_by_key(|(k, _)| *k);
        d.into_iter().map(|(_, dev)| dev).collect()
    }

    pub fn lines(&self) -> Vec<Line<f64>> {
        self.topology
            .edges
            .iter()
            .map(|e| Line {
                from: e.from - 1,
                to: e.to - 1,
                resistance: e.r_ohm,
            })
            .collect()
    }

    pub fn microgrid(&self) -> Result<Microgrid<f64>> {
        let pinned = self.equilibrium.as_ref().map(|e| Equilibrium {
            u_star: e.u_volt.clone(),
            i_star: e.i_amp.clone(),
        });
        Microgrid::new(&self.lines(), self.devices_in_order(), self.composite_region()?, pinned)
    }

    /// Library disturbance (0-based node).
    pub fn disturbance_spec(&self) -> Option<DisturbanceSpec<f64>> {
        self.disturbance.map(|d| DisturbanceSpec {
            node: d.node - 1,
            magnitude: d.magnitude,
            start: d.start_s,
            duration: d.duration_s,
        })
    }

    pub fn sim_settings(&self) -> SimSettings {
        self.simulation.unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAR: &str = r#"{
        "name": "star",
        "topology": {"nodes": 3, "edges": [{"from": 1, "to": 3, "R_ohm": 0.1}, [2, 3, 0.1]], "sources": [1, 2], "loads": [3]},
        "devices": [
            {"type": "ess_boost", "node": 1, "C": 2e-3, "E": 50, "U_r": 105, "R_d": 0.6, "kP": 0.01, "kI": 60},
            {"type": "ess_buck", "node": 2, "C_farad": 3e-3, "E_volt": 200, "U_r_volt": 105, "R_d_ohm": 0.7, "kP_u": 0.01, "kI_u": 50},
            {"type": "cpl", "node": 3, "C_l": 2e-3, "P_watt": 1500}
        ],
        "region": [{"kind": "shifted_lhp", "alpha": 0}]
    }"#;

    #[test]
    fn parses_units_and_aliases() {
        let s = Scenario::from_json(STAR).unwrap();
        assert_eq!(s.topology.edges[1].r_ohm, 0.1);
        let mg = s.microgrid().unwrap();
        assert_eq!(mg.source_ids(), &[0, 1]);
        let back = Scenario::from_json(&s.to_json_pretty()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Scenario::from_json("{"), Err(Error::Schema(_))));
        let bad = STAR.replace("\"node\": 3", "\"node\": 4");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Schema(_))));
        let bad = STAR.replace("\"kI\": 60", "\"kI\": 60, \"bogus\": 1");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Schema(_))));
        let bad = STAR.replace("\"loads\": [3]", "\"loads\": [2]");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Schema(_))));
        let bad = STAR.replace("\"P_watt\": 1500", "\"P_watt\": -1");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Schema(_))));
    }

    #[test]
    fn region_shorthand() {
        assert_eq!(RegionSpec::parse("lhp:-8").unwrap(), RegionSpec::ShiftedLhp { alpha: -8.0 });
        assert!(RegionSpec::parse("hs:1,2").is_err());
        assert!(RegionSpec::parse("blob:1").is_err());
        assert!(matches!(RegionSpec::parse("general:0.1,2,-1").unwrap(), RegionSpec::General { .. }));
    }
}
