//! Fixed-step RK4 simulation of the linear closed loop under a pulse input.

use serde::{Deserialize, Serialize};

use crate::dstability::ClosedLoop;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, Matrix};
use crate::scalar::Real;

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_T_END: f64 = 0.5;
pub const DEFAULT_BAND: f64 = 0.02;

/// Load step expressed as a fraction of the nominal load power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSpec<T> {
    /// Node index (0-based in the library).
    pub node: usize,
    pub magnitude: T,
    pub start: T,
    pub duration: T,
}

impl<T: Real> DisturbanceSpec<T> {
    /// Equivalent current pulse `-magnitude·P/u*` at the load input.
    pub fn to_pulse(&self, p_nominal: T, u_star: T) -> Result<PulseInput<T>> {
        if !(self.duration > T::zero()) {
            return Err(Error::InvalidArgument("disturbance duration must be positive".into()));
        }
        if !(u_star > T::zero()) {
            return Err(Error::InvalidArgument("equilibrium voltage must be positive".into()));
        }
        Ok(PulseInput {
            node: self.node,
            amplitude: -(self.magnitude * p_nominal) / u_star,
            start: self.start,
            duration: self.duration,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseInput<T> {
    pub node: usize,
    /// Amps added to the subsystem input.
    pub amplitude: T,
    pub start: T,
    pub duration: T,
}

impl<T: Real> PulseInput<T> {
    fn at(&self, t: T) -> T {
        if t >= self.start && t < self.start + self.duration {
            self.amplitude
        } else {
            T::zero()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub t: Vec<T>,
    /// `du[node][sample]`.
    pub du: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation<T> {
    pub trajectory: Trajectory<T>,
    pub warnings: Vec<String>,
}

fn matvec<T: Real>(a: &Matrix<T>, x: &[T]) -> Vec<T> {
    (0..a.rows())
        .map(|i| a.row(i).iter().zip(x).fold(T::zero(), |s, (&p, &q)| s + p * q))
        .collect()
}

fn axpy<T: Real>(x: &[T], k: T, d: &[T]) -> Vec<T> {
    x.iter().zip(d).map(|(&a, &b)| a + k * b).collect()
}

/// Integrates `ẋ = A x + B w(t)` from rest. The input is held at its value
/// at each step midpoint, so pulse edges on the time grid are exact.
pub fn simulate<T: Real>(cl: &ClosedLoop<T>, input: &PulseInput<T>, t_end: T, dt: T) -> Result<Simulation<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    if !(t_end > input.start + input.duration) {
        return Err(Error::InvalidArgument("t_end must exceed the end of the pulse".into()));
    }
    let n_nodes = cl.c.rows();
    if input.node >= n_nodes {
        return Err(Error::InvalidArgument(format!("disturbance node {} out of range", input.node)));
    }
    let mut warnings = Vec::new();
    let rho = eigenvalues(&cl.a)?.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    if dt > T::lit(0.1) / rho {
        warnings.push(format!(
            "dt = {:e} exceeds 0.1/max|eig| = {:e}; RK4 accuracy degraded",
            dt.to_f64_lossy(),
            (T::lit(0.1) / rho).to_f64_lossy()
        ));
    }
    let steps = ((t_end / dt).ceil()).to_usize().unwrap_or(0);
    let bcol: Vec<T> = (0..cl.b.rows()).map(|i| cl.b[(i, input.node)]).collect();
    let f = |x: &[T], w: T| -> Vec<T> { axpy(&matvec(&cl.a, x), w, &bcol) };
    let mut x = vec![T::zero(); cl.a.rows()];
    let mut t = Vec::with_capacity(steps + 1);
    let mut du = vec![Vec::with_capacity(steps + 1); n_nodes];
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    for k in 0..=steps {
        let tk = T::lit(k as f64) * dt;
        t.push(tk);
        for (node, y) in matvec(&cl.c, &x).into_iter().enumerate() {
            du[node].push(y);
        }
        if k == steps {
            break;
        }
        let w = input.at(tk + half * dt);
        let k1 = f(&x, w);
        let k2 = f(&axpy(&x, half * dt, &k1), w);
        let k3 = f(&axpy(&x, half * dt, &k2), w);
        let k4 = f(&axpy(&x, dt, &k3), w);
        for i in 0..x.len() {
            x[i] += dt * sixth * (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]);
        }
    }
    Ok(Simulation {
        trajectory: Trajectory { t, du },
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics<T> {
    /// From the first nonzero sample to the last exit from `±band·peak`.
    pub settling_time: T,
    pub peak_dev: T,
    /// rad/s, from zero crossings of the node with the largest deviation.
    pub dominant_freq: T,
}

pub fn metrics<T: Real>(tr: &Trajectory<T>, band: T) -> Result<Metrics<T>> {
    if tr.t.is_empty() || tr.du.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let n = tr.t.len();
    let env: Vec<T> = (0..n)
        .map(|k| tr.du.iter().map(|s| s[k].abs()).fold(T::zero(), T::max))
        .collect();
    let peak = env.iter().copied().fold(T::zero(), T::max);
    if peak == T::zero() {
        return Ok(Metrics {
            settling_time: T::zero(),
            peak_dev: T::zero(),
            dominant_freq: T::zero(),
        });
    }
    let onset = env.iter().position(|&e| e > T::zero()).unwrap_or(0);
    let last = env.iter().rposition(|&e| e > band * peak).unwrap_or(onset);
    let exit = (last + 1).min(n - 1);
    let settling_time = tr.t[exit] - tr.t[onset];

    let node = tr
        .du
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let pa = a.1.iter().map(|v| v.abs()).fold(T::zero(), T::max);
            let pb = b.1.iter().map(|v| v.abs()).fold(T::zero(), T::max);
            pa.partial_cmp(&pb).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let s = &tr.du[node];
    // crossings buried in round-off at the tail do not count
    let floor = T::lit(1e-6) * peak;
    let mut crossings = Vec::new();
    let mut prev: Option<(usize, T)> = None;
    for (k, &v) in s.iter().enumerate() {
        if v.abs() <= floor {
            continue;
        }
        if let Some((j, pv)) = prev {
            if (pv > T::zero()) != (v > T::zero()) {
                // linear interpolation between the bracketing samples
                let tc = tr.t[j] + (tr.t[k] - tr.t[j]) * pv.abs() / (pv.abs() + v.abs());
                crossings.push(tc);
            }
        }
        prev = Some((k, v));
    }
    let dominant_freq = if crossings.len() >= 2 {
        let span = crossings[crossings.len() - 1] - crossings[0];
        T::PI() * T::lit((crossings.len() - 1) as f64) / span
    } else {
        T::zero()
    };
    Ok(Metrics {
        settling_time,
        peak_dev: peak,
        dominant_freq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar() -> ClosedLoop<f64> {
        ClosedLoop {
            a: Matrix::from_rows(&[vec![-1.0]]).unwrap(),
            b: Matrix::from_rows(&[vec![1.0]]).unwrap(),
            c: Matrix::from_rows(&[vec![1.0]]).unwrap(),
        }
    }

    fn pulse(amplitude: f64) -> PulseInput<f64> {
        PulseInput { node: 0, amplitude, start: 0.5, duration: 1.0 }
    }

    #[test]
    fn zero_disturbance_gives_zero() {
        let s = simulate(&scalar(), &pulse(0.0), 3.0, 1e-3).unwrap();
        assert!(s.trajectory.du[0].iter().all(|&v| v == 0.0));
        let m = metrics(&s.trajectory, 0.02).unwrap();
        assert_eq!((m.settling_time, m.peak_dev, m.dominant_freq), (0.0, 0.0, 0.0));
    }

    #[test]
    fn scalar_pulse_matches_closed_form() {
        let s = simulate(&scalar(), &pulse(1.0), 4.0, 1e-3).unwrap();
        let exact = |t: f64| {
            if t < 0.5 {
                0.0
            } else if t < 1.5 {
                1.0 - (-(t - 0.5)).exp()
            } else {
                (1.0 - (-1.0f64).exp()) * (-(t - 1.5)).exp()
            }
        };
        for (k, &t) in s.trajectory.t.iter().enumerate() {
            assert!((s.trajectory.du[0][k] - exact(t)).abs() < 1e-6, "t={t}");
        }
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn large_step_warns() {
        let s = simulate(&scalar(), &pulse(1.0), 4.0, 0.5).unwrap();
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn exponential_settling() {
        let alpha = -5.0f64;
        let t: Vec<f64> = (0..20000).map(|k| k as f64 * 1e-4).collect();
        let du = vec![t.iter().map(|&t| (alpha * t).exp()).collect()];
        let m = metrics(&Trajectory { t, du }, 0.02).unwrap();
        assert_relative_eq!(m.settling_time, 4.0 / alpha.abs(), max_relative = 0.1);
        assert_eq!(m.dominant_freq, 0.0);
    }

    #[test]
    fn damped_sinusoid_frequency() {
        let w0 = 30.0f64;
        let t: Vec<f64> = (0..30000).map(|k| k as f64 * 1e-4).collect();
        let du = vec![t.iter().map(|&t| (-2.0 * t).exp() * (w0 * t).sin()).collect()];
        let m = metrics(&Trajectory { t, du }, 0.02).unwrap();
        assert_relative_eq!(m.dominant_freq, w0, max_relative = 0.05);
    }

    #[test]
    fn fourth_order_convergence() {
        let cl = ClosedLoop {
            a: Matrix::from_rows(&[vec![0.0, 1.0], vec![-25.0, -2.0]]).unwrap(),
            b: Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap(),
            c: Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
        };
        let inp = PulseInput { node: 0, amplitude: 1.0, start: 0.0, duration: 0.4 };
        let run = |dt: f64| simulate(&cl, &inp, 2.0, dt).unwrap().trajectory;
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let at = |tr: &Trajectory<f64>, stride: usize| -> Vec<f64> { tr.du[0].iter().step_by(stride).copied().collect() };
        let (a, b, c) = (at(&a, 1), at(&b, 2), at(&c, 4));
        let e1 = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let e2 = b.iter().zip(&c).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!((e1 / e2).log2() >= 3.5, "order {}", (e1 / e2).log2());
    }

    #[test]
    fn disturbance_to_pulse() {
        let d = DisturbanceSpec { node: 2, magnitude: 0.01, start: 0.1, duration: 0.02 };
        let p = d.to_pulse(1500.0, 100.0).unwrap();
        assert_relative_eq!(p.amplitude, -0.15);
    }
}
