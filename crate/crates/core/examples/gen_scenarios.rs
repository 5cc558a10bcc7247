//! Regenerates the shipped scenario files under `scenarios/`.
//!
//! The IEEE 39-bus branch list is the standard benchmark topology; every
//! line is 0.1 Ω. Operating points are solved once with default parameters
//! and frozen into both 39-node files so that re-tuning cannot move them.

use std::f64::consts::PI;
use std::path::PathBuf;

use dstab_core::devices::{equilibrium_solve, CplParams, Device, EssBoostParams, EssBuckParams, PvParams};
use dstab_core::microgrid::Microgrid;
use dstab_core::network::{AdmittanceMatrix, Line, NodePartition};
use dstab_core::scenario::{
    DeviceSpec, DisturbanceJson, EdgeSpec, EquilibriumSpec, RegionSpec, Scenario, SimSettings, Topology,
};

const IEEE39_BRANCHES: [(usize, usize); 46] = [
    (1, 2), (1, 39), (2, 3), (2, 25), (2, 30), (3, 4), (3, 18), (4, 5), (4, 14), (5, 6),
    (5, 8), (6, 7), (6, 11), (6, 31), (7, 8), (8, 9), (9, 39), (10, 11), (10, 13), (10, 32),
    (12, 11), (12, 13), (13, 14), (14, 15), (15, 16), (16, 17), (16, 19), (16, 21), (16, 24), (17, 18),
    (17, 27), (19, 33), (19, 20), (20, 34), (21, 22), (22, 23), (22, 35), (23, 24), (23, 36), (25, 26),
    (25, 37), (26, 27), (26, 28), (26, 29), (28, 29), (29, 38),
];
const BOOST: [usize; 7] = [1, 2, 5, 6, 9, 10, 11];
const BUCK: [usize; 7] = [13, 14, 16, 17, 19, 22, 28];

/// Seven parallel strings of a 200 W module with V_mpp = 36.12 V, at the
/// maximum power point where dI/dV = -I/V.
const PV_I_MPP: f64 = 7.0 * 200.0 / 36.12;
const PV_G_MPP: f64 = -PV_I_MPP / 36.12;

fn boost() -> Device<f64> {
    Device::EssBoost(EssBoostParams { c: 2e-3, e: 50.0, u_r: 105.0, r_d: 0.6, kp: 0.01, ki: 60.0 })
}

fn buck() -> Device<f64> {
    Device::EssBuck(EssBuckParams { c: 3e-3, e: 200.0, u_r: 105.0, r_d: 0.7, kp: 0.01, ki: 50.0 })
}

fn pv() -> Device<f64> {
    Device::Pv(PvParams { c: 2e-3, kp: 0.1, ki: 0.5, u_r_pv: 36.12, i_pv_star: PV_I_MPP, g_pv_star: PV_G_MPP })
}

fn cpl() -> Device<f64> {
    Device::Cpl(CplParams { c_l: 2e-3, p: 1500.0 })
}

fn target_region() -> Vec<RegionSpec> {
    vec![
        RegionSpec::ShiftedLhp { alpha: -8.0 },
        RegionSpec::Sector { beta: 5.0 * PI / 12.0 },
        RegionSpec::HorizontalStrip { gamma: 24.0 * PI },
    ]
}

fn scenario(
    name: &str,
    description: &str,
    edges: Vec<EdgeSpec>,
    devices: &[Device<f64>],
    region: Vec<RegionSpec>,
    eq: Option<EquilibriumSpec>,
    disturbance: Option<DisturbanceJson>,
    simulation: Option<SimSettings>,
) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        topology: Topology { nodes: devices.len(), edges, sources: None, loads: None },
        devices: devices.iter().enumerate().map(|(k, d)| DeviceSpec::from_device(k + 1, d)).collect(),
        region,
        equilibrium: eq,
        y_s: None,
        disturbance,
        simulation,
    }
}

fn ieee39() -> (Scenario, Scenario) {
    let devices: Vec<Device<f64>> = (1..=39)
        .map(|k| {
            if BOOST.contains(&k) {
                boost()
            } else if BUCK.contains(&k) {
                buck()
            } else if k >= 30 {
                pv()
            } else {
                cpl()
            }
        })
        .collect();
    let edges: Vec<EdgeSpec> = IEEE39_BRANCHES.iter().map(|&(from, to)| EdgeSpec { from, to, r_ohm: 0.1 }).collect();
    let lines: Vec<Line<f64>> =
        IEEE39_BRANCHES.iter().map(|&(a, b)| Line { from: a - 1, to: b - 1, resistance: 0.1 }).collect();
    let (src, ld): (Vec<usize>, Vec<usize>) = (0..39).partition(|&k| devices[k].is_source());
    let y = AdmittanceMatrix::build(&lines, 39, NodePartition::new(src, ld, 39).unwrap()).unwrap();
    let eq = equilibrium_solve(&y, &devices).expect("default operating point");
    let eq_spec = EquilibriumSpec { u_volt: eq.u_star.clone(), i_amp: eq.i_star.clone() };
    let disturbance = Some(DisturbanceJson { node: 3, magnitude: 0.01, start_s: 0.1, duration_s: 0.02 });
    let sim = Some(SimSettings { t_end_s: 3.0, dt_s: 2e-5, band: 0.02 });

    let default = scenario(
        "ieee39_default",
        "IEEE 39-node DC microgrid, default parameters; equilibrium solved from these parameters and pinned",
        edges.clone(),
        &devices,
        target_region(),
        Some(eq_spec.clone()),
        disturbance,
        sim,
    );

    let region = default.composite_region().unwrap();
    let mut mg = Microgrid::new(&lines, devices.clone(), region, Some(eq)).unwrap();
    for k in 0..39 {
        let node = k + 1;
        match &mut mg.devices[k] {
            Device::EssBoost(p) => {
                p.ki = 26.5;
                p.kp = if node == 1 || node == 10 { 0.36 } else { 0.35 };
            }
            Device::EssBuck(p) => {
                p.kp = 0.38;
                p.ki = 21.0;
            }
            Device::Pv(p) => p.ki = 1.0,
            Device::Cpl(_) => {}
        }
        if BOOST.contains(&node) {
            mg.retune_droop(k, if node == 10 { 1.19 } else { 1.18 }).unwrap();
        }
    }
    let synthesized = scenario(
        "ieee39_synthesized",
        "IEEE 39-node DC microgrid after local synthesis; droop re-tuned with U_r = u* + R_d i*",
        edges,
        &mg.devices,
        target_region(),
        Some(eq_spec),
        disturbance,
        sim,
    );
    (default, synthesized)
}

fn star(name: &str, description: &str, source: Device<f64>, load: Device<f64>, region: Vec<RegionSpec>) -> Scenario {
    let edges = vec![EdgeSpec { from: 1, to: 3, r_ohm: 0.1 }, EdgeSpec { from: 2, to: 3, r_ohm: 0.1 }];
    let devices = [source.clone(), source, load];
    scenario(
        name,
        description,
        edges,
        &devices,
        region,
        None,
        Some(DisturbanceJson { node: 3, magnitude: 0.01, start_s: 0.1, duration_s: 0.02 }),
        Some(SimSettings { t_end_s: 1.0, dt_s: 2e-5, band: 0.02 }),
    )
}

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
    });
    std::fs::create_dir_all(&dir).unwrap();
    let (default, synthesized) = ieee39();
    // kP = 0.2 gives each source enough positivity index for Thm. 2 at α = 0
    let strong = Device::EssBoost(EssBoostParams { c: 2e-3, e: 50.0, u_r: 105.0, r_d: 0.6, kp: 0.2, ki: 60.0 });
    let toy = star(
        "star3",
        "two boost sources feeding one CPL",
        strong,
        cpl(),
        vec![RegionSpec::ShiftedLhp { alpha: 0.0 }],
    );
    let overloaded = star(
        "star3_overloaded",
        "CPL near its power limit with a large input capacitor; the load-side assumption fails for lhp(-400)",
        boost(),
        Device::Cpl(CplParams { c_l: 0.05, p: 7000.0 }),
        vec![RegionSpec::ShiftedLhp { alpha: -400.0 }],
    );
    for s in [default, synthesized, toy, overloaded] {
        let path = dir.join(format!("{}.json", s.name));
        let text = s.to_json_pretty();
        Scenario::from_json(&text).expect("generated scenario validates");
        std::fs::write(&path, text).unwrap();
        println!("wrote {}", path.display());
    }
}
