//! Seeded random instances for property sweeps.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cpoly::{CPoly, CRational};
use crate::devices::{
    admissible_index, source_upper_bound, CplParams, Device, EssBoostParams, EssBuckParams, GenericSecondOrder,
    PvParams,
};
use crate::dstability::{certify_thm1, verify_region, LoopParams, SystemModel};
use crate::error::Result;
use crate::network::{grid_code, AdmittanceMatrix, Line, NodePartition};
use crate::region::HalfPlaneRegion;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Any valid half-plane region, biased towards the three named families.
pub fn random_region<R: Rng>(rng: &mut R) -> HalfPlaneRegion<f64> {
    let pi = std::f64::consts::PI;
    match rng.random_range(0..4) {
        0 => HalfPlaneRegion::shifted_lhp(-rng.random_range(0.0..10.0)),
        1 => HalfPlaneRegion::sector(rng.random_range(0.3 * pi..0.5 * pi)),
        2 => HalfPlaneRegion::horizontal_strip(rng.random_range(20.0..400.0)),
        _ => HalfPlaneRegion::new(
            rng.random_range(0.0..0.5 * pi),
            rng.random_range(0.0..50.0),
            -rng.random_range(0.0..10.0),
        ),
    }
    .expect("parameters drawn inside the valid ranges")
}

/// A source drawn from the physical ranges of the three device types,
/// together with its operating voltage.
pub fn random_source<R: Rng>(rng: &mut R) -> (Device<f64>, f64) {
    let u = rng.random_range(90.0..110.0);
    let i_star = rng.random_range(0.0..30.0);
    let r_d = rng.random_range(0.3..1.0);
    let d = match rng.random_range(0..3) {
        0 => Device::EssBoost(EssBoostParams {
            c: rng.random_range(1e-3..4e-3),
            e: rng.random_range(30.0..80.0),
            u_r: u + r_d * i_star,
            r_d,
            kp: rng.random_range(0.005..0.5),
            ki: rng.random_range(5.0..80.0),
        }),
        1 => Device::EssBuck(EssBuckParams {
            c: rng.random_range(1e-3..4e-3),
            e: 200.0,
            u_r: u + r_d * i_star,
            r_d,
            kp: rng.random_range(0.005..0.5),
            ki: rng.random_range(5.0..80.0),
        }),
        _ => Device::Pv(PvParams {
            c: rng.random_range(1e-3..4e-3),
            kp: rng.random_range(0.05..0.2),
            ki: rng.random_range(0.2..2.0),
            u_r_pv: 36.12,
            i_pv_star: rng.random_range(10.0..40.0),
            g_pv_star: -rng.random_range(0.1..2.0),
        }),
    };
    (d, u)
}

pub fn random_source_coeffs<R: Rng>(rng: &mut R) -> GenericSecondOrder<f64> {
    let (d, u) = random_source(rng);
    d.source_coeffs(u).expect("positive voltage")
}

pub fn random_cpl<R: Rng>(rng: &mut R) -> (Device<f64>, f64) {
    let d = Device::Cpl(CplParams {
        c_l: rng.random_range(1e-3..4e-3),
        p: rng.random_range(50.0..2000.0),
    });
    (d, rng.random_range(90.0..110.0))
}

/// Random spanning tree plus a few extra edges.
pub fn random_lines<R: Rng>(rng: &mut R, n: usize) -> Vec<Line<f64>> {
    let mut lines = Vec::new();
    for k in 1..n {
        lines.push(Line {
            from: rng.random_range(0..k),
            to: k,
            resistance: rng.random_range(0.05..0.5),
        });
    }
    for _ in 0..rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            lines.push(Line {
                from: a,
                to: b,
                resistance: rng.random_range(0.05..0.5),
            });
        }
    }
    lines
}

/// Random connected Laplacian with a random nonempty source/load split.
pub fn random_network<R: Rng>(rng: &mut R, n: usize) -> AdmittanceMatrix<f64> {
    let n_src = rng.random_range(1..n);
    let mut ids: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        ids.swap(i, rng.random_range(0..=i));
    }
    let mut src = ids[..n_src].to_vec();
    let mut ld = ids[n_src..].to_vec();
    src.sort_unstable();
    ld.sort_unstable();
    AdmittanceMatrix::build(&random_lines(rng, n), n, NodePartition::new(src, ld, n).expect("valid split"))
        .expect("connected by construction")
}

fn random_coeffs<R: Rng>(rng: &mut R, deg: usize) -> Vec<Complex<f64>> {
    (0..=deg)
        .map(|_| Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
        .collect()
}

/// Random proper rational with complex coefficients, degree ≤ `max_deg`.
pub fn random_rational<R: Rng>(rng: &mut R, max_deg: usize) -> CRational<f64> {
    loop {
        let d = rng.random_range(1..=max_deg);
        let nd = rng.random_range(0..=d);
        let mut den = random_coeffs(rng, d);
        den[d] = Complex::new(1.0, 0.0);
        let num = random_coeffs(rng, nd);
        // shift poles left half the time so positive instances are common
        let shift = if rng.random_bool(0.5) { rng.random_range(0.5..3.0) } else { 0.0 };
        let den = CPoly::new(den).compose_affine(Complex::new(1.0, 0.0), Complex::new(shift, 0.0));
        if let Ok(h) = CRational::new(CPoly::new(num), den) {
            return h;
        }
    }
}

/// A random small microgrid-like linear system with Thm. 2 style loop
/// parameters: `φ = θ₀`, `ρ = y^v` at loads and `-y^s` at sources, where
/// `y^s` is the largest admissible index scaled by a random factor.
pub fn random_system<R: Rng>(rng: &mut R, n: usize) -> Result<SystemModel<f64>> {
    let y = random_network(rng, n);
    let region = random_region(rng);
    let mut subs = vec![None; n];
    let mut loads = Vec::new();
    let mut coeffs = Vec::new();
    for &k in y.partition().source_ids() {
        let (d, u) = random_source(rng);
        subs[k] = Some(d.tf(u)?);
        coeffs.push(d.source_coeffs(u)?);
    }
    for &k in y.partition().load_ids() {
        let (d, u) = random_cpl(rng);
        subs[k] = Some(d.tf(u)?);
        if let Device::Cpl(p) = d {
            loads.push((p.c_l, p.p / (u * u)));
        }
    }
    let gc = grid_code(&y, &region, &loads)?;
    let n_nodes = y.n_nodes();
    let mut rho = vec![0.0; n_nodes];
    for (g, &k) in coeffs.iter().zip(y.partition().source_ids()) {
        let ys = admissible_index(&source_upper_bound(g, &region)?);
        let scale = if rng.random_bool(0.7) { 1.0 } else { rng.random_range(0.0..1.0) };
        rho[k] = -ys * scale;
    }
    for (i, &k) in y.partition().load_ids().iter().enumerate() {
        rho[k] = gc.y_virtual[i];
    }
    let subs = subs.into_iter().map(|s| s.expect("every node assigned")).collect();
    let mut m = SystemModel::new(subs, y, region.into())?;
    m.set_loop_params(
        0,
        LoopParams {
            phi: vec![region.theta0(); n_nodes],
            rho,
        },
    )?;
    Ok(m)
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessCase {
    pub draw: usize,
    pub n_nodes: usize,
    pub region: String,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessSummary {
    pub seed: u64,
    pub draws: usize,
    pub certified: usize,
    /// Certified by Thm. 1 but with a pole outside the region.
    pub counterexamples: Vec<SoundnessCase>,
    /// Not certified yet D-stable (the test is only sufficient).
    pub non_necessity: Option<SoundnessCase>,
    /// Smallest region margin among certified systems.
    pub worst_certified_margin: f64,
    /// Draws skipped on numerical errors.
    pub errors: usize,
}

/// Draws systems with `N ∈ {2..5}` until `target` are Thm.-1 certified (or
/// `max_draws` is reached) and checks each certified one against the pole
/// oracle.
pub fn soundness_sweep(seed: u64, target: usize, max_draws: usize) -> SoundnessSummary {
    let mut r = rng(seed);
    let mut s = SoundnessSummary {
        seed,
        draws: 0,
        certified: 0,
        counterexamples: Vec::new(),
        non_necessity: None,
        worst_certified_margin: f64::INFINITY,
        errors: 0,
    };
    while s.certified < target && s.draws < max_draws {
        let draw = s.draws;
        s.draws += 1;
        let n = r.random_range(2..=5);
        let outcome = random_system(&mut r, n).and_then(|m| Ok((certify_thm1(&m)?, verify_region(&m)?, m)));
        let (cert, ver, m) = match outcome {
            Ok(v) => v,
            Err(_) => {
                s.errors += 1;
                continue;
            }
        };
        let case = SoundnessCase {
            draw,
            n_nodes: n,
            region: m.region.label(),
            worst_margin: ver.worst_margin,
        };
        if cert.certified {
            s.certified += 1;
            s.worst_certified_margin = s.worst_certified_margin.min(ver.worst_margin);
            if !ver.ok {
                s.counterexamples.push(case);
            }
        } else if ver.ok && s.non_necessity.is_none() {
            s.non_necessity = Some(case);
        }
    }
    s
}
