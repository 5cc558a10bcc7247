mod common;

use common::scenario_path;
use dstab_core::dstability::{assemble_closed_loop, closed_loop_poles};
use dstab_core::scenario::Scenario;
use dstab_core::sim::{metrics, simulate, PulseInput};
use dstab_core::sweep::{random_system, rng};
use proptest::prelude::*;
use rand::Rng;

/// Slope of `log max|du|` over consecutive windows, fitted where the
/// envelope is well above rounding level.
fn envelope_rate(t: &[f64], du: &[Vec<f64>], from: f64, window: f64) -> Option<f64> {
    let mut pts = Vec::new();
    let peak = du.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut start = from;
    while start + window <= *t.last()? {
        let env = (0..t.len())
            .filter(|&k| t[k] >= start && t[k] < start + window)
            .map(|k| du.iter().fold(0.0f64, |m, s| m.max(s[k].abs())))
            .fold(0.0, f64::max);
        if env > 1e-9 * peak {
            pts.push((start + 0.5 * window, env.ln()));
        }
        start += window;
    }
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    Some(num / den)
}

/// After synthesis every pole sits left of α = −8, and the post-pulse
/// envelope decays at the dominant rate, which is at least |α|.
#[test]
fn synthesized_case_decays_at_dominant_rate() {
    let s = Scenario::from_path(&scenario_path("ieee39_synthesized.json")).unwrap();
    let mg = s.microgrid().unwrap();
    let m = mg.system_model().unwrap();
    let dominant = closed_loop_poles(&m).unwrap().iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
    assert!(dominant <= -8.0);
    let cl = assemble_closed_loop(&m).unwrap();
    let pulse = mg.disturbance_pulse(&s.disturbance_spec().unwrap()).unwrap();
    let tr = simulate(&cl, &pulse, 2.5, 2e-5).unwrap().trajectory;
    let rate = envelope_rate(&tr.t, &tr.du, 1.0, 0.1).expect("enough decaying windows");
    assert!(rate <= -0.8 * 8.0, "envelope rate {rate}");
    assert!((rate / dominant - 1.0).abs() < 0.2, "rate {rate} vs dominant {dominant}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// Random stable systems: the tail of the response is bounded by the
    /// dominant-mode decay, within a factor of 3 on the exponent.
    #[test]
    fn random_stable_tail_follows_dominant_pole(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=3);
        let m = random_system(&mut r, n).unwrap();
        let dominant = closed_loop_poles(&m).unwrap().iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(dominant < -5.0 && dominant > -200.0);
        let cl = assemble_closed_loop(&m).unwrap();
        let load = m.y.partition().load_ids()[0];
        let input = PulseInput { node: load, amplitude: 1.0, start: 0.0, duration: 0.01 };
        let t_end = 0.01 + 3.0 / dominant.abs();
        let tr = simulate(&cl, &input, t_end, 1e-5).unwrap().trajectory;
        let mets = metrics(&tr, 0.02).unwrap();
        prop_assume!(mets.peak_dev > 0.0);
        let last = tr.du.iter().map(|s| s.last().unwrap().abs()).fold(0.0, f64::max);
        // |du(t_end)| ≤ peak · e^{α(t_end − t_peak)/3}, t_peak ≤ pulse end
        let bound = mets.peak_dev * (dominant * (t_end - 0.01) / 3.0).exp();
        prop_assert!(last <= bound * (1.0 + 1e-9), "tail {last} vs bound {bound}");
    }
}
