//! Closed-loop trajectories with delayed, noisy feedback.
//!
//! The plant is propagated exactly between samples with the discretization
//! for the scheme's delay; noise enters only through the computed control.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::csvfmt::sig9;
use crate::error::{Error, Result};
use crate::linalg::{dot, RealVector};
use crate::plant::{discretize, DiscretizedPlant, PlantModel};
use crate::scaling::{
    effective_gain_air, effective_gain_sota, optimize_air_scaling, optimize_sota_scaling,
    ChannelRealization,
};
use crate::stability::{min_feasible_delay, NetworkTiming, Scheme, FEASIBILITY_RTOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimScheme {
    /// No delay, no noise, `u = -kᵀx`.
    Ideal,
    Air,
    Sota,
}

impl SimScheme {
    pub const ALL: [SimScheme; 3] = [SimScheme::Ideal, SimScheme::Air, SimScheme::Sota];

    pub fn as_str(self) -> &'static str {
        match self {
            SimScheme::Ideal => "ideal",
            SimScheme::Air => "air",
            SimScheme::Sota => "sota",
        }
    }

    pub fn network(self) -> Option<Scheme> {
        match self {
            SimScheme::Ideal => None,
            SimScheme::Air => Some(Scheme::Air),
            SimScheme::Sota => Some(Scheme::Sota),
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            SimScheme::Ideal => 0,
            SimScheme::Air => 1,
            SimScheme::Sota => 2,
        }
    }
}

impl std::fmt::Display for SimScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub plant: PlantModel,
    pub scheme: SimScheme,
    /// Sampling period, seconds.
    pub delta: f64,
    pub timing: NetworkTiming,
    pub x0: RealVector,
    /// Simulated time span, seconds.
    pub horizon: f64,
    /// Held fixed for the whole run.
    pub channel: ChannelRealization,
    /// Target control gain `k`.
    pub gain: RealVector,
    pub seed: u64,
    pub noise_enabled: bool,
}

impl SimConfig {
    /// Delay between sampling and actuation for this scheme.
    pub fn delay(&self) -> f64 {
        match self.scheme.network() {
            None => 0.0,
            Some(s) => min_feasible_delay(s, &self.timing),
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.delta).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.plant.states();
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::Config(format!(
                "sampling period must be positive, got {}",
                self.delta
            )));
        }
        if self.steps() == 0 {
            return Err(Error::Config(format!(
                "horizon {} is shorter than one sampling period {}",
                self.horizon, self.delta
            )));
        }
        for (what, len) in [
            ("x0", self.x0.len()),
            ("gain", self.gain.len()),
            ("channel h", self.channel.sensors()),
        ] {
            if len != n {
                return Err(Error::Config(format!(
                    "{what} has length {len} but the plant has {n} states"
                )));
            }
        }
        let tau = self.delay();
        if tau > self.delta * (1.0 + FEASIBILITY_RTOL) {
            return Err(Error::Config(format!(
                "{} needs a delay of {tau} s, longer than the sampling period {} s",
                self.scheme, self.delta
            )));
        }
        Ok(())
    }
}

/// Sampled closed-loop trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scheme: SimScheme,
    pub delta: f64,
    /// Sampling instants `kδ`.
    pub times: Vec<f64>,
    /// `x(kδ)`.
    pub states: Vec<Vec<f64>>,
    /// `u(kδ)`, acting on the plant from `kδ + τ`.
    pub controls: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples of `self` taken at the instants of `other`.
    ///
    /// Every time in `other` must coincide with one in `self` (to within a
    /// millionth of the finer period), e.g. a 0.01 s run restricted to a
    /// 0.05 s grid.
    pub fn at_times_of(&self, other: &Trajectory) -> Result<Trajectory> {
        let tol = 1e-6 * self.delta.min(other.delta);
        let mut out = Trajectory {
            scheme: self.scheme,
            delta: other.delta,
            times: Vec::with_capacity(other.len()),
            states: Vec::with_capacity(other.len()),
            controls: Vec::with_capacity(other.len()),
        };
        for &t in &other.times {
            let idx = (t / self.delta).round() as usize;
            match self.times.get(idx) {
                Some(&s) if (s - t).abs() <= tol => {
                    out.times.push(t);
                    out.states.push(self.states[idx].clone());
                    out.controls.push(self.controls[idx]);
                }
                _ => {
                    return Err(Error::Validation(format!(
                        "no sample at t = {t} in a trajectory with period {}",
                        self.delta
                    )))
                }
            }
        }
        Ok(out)
    }
}

/// Additive disturbance on the computed control.
pub trait ControlNoise {
    fn sample(&mut self) -> f64;
}

/// No disturbance.
pub struct Noiseless;

impl ControlNoise for Noiseless {
    fn sample(&mut self) -> f64 {
        0.0
    }
}

/// Noise of the over-the-air control `α n`, `n ~ N(0, σ²)`.
pub struct AirNoise {
    rng: ChaCha8Rng,
    std: f64,
}

impl ControlNoise for AirNoise {
    fn sample(&mut self) -> f64 {
        let n: f64 = self.rng.sample(StandardNormal);
        self.std * n
    }
}

/// Noise of the multi-hop control `α_a(h_a α_sᵀ n_s + n_a)`.
pub struct SotaNoise {
    rng: ChaCha8Rng,
    /// `α_a h_a α_s,i σ_s` per sensor.
    sensor_weights: Vec<f64>,
    /// `α_a σ_a`.
    actuator_weight: f64,
}

impl ControlNoise for SotaNoise {
    fn sample(&mut self) -> f64 {
        let mut total = 0.0;
        for w in &self.sensor_weights {
            let n: f64 = self.rng.sample(StandardNormal);
            total += w * n;
        }
        let n: f64 = self.rng.sample(StandardNormal);
        total + self.actuator_weight * n
    }
}

/// Runs `x(k+1) = Φx(k) + Γ0 u(k) + Γ1 u(k-1)` with `u(k) = -gᵀx(k) - w(k)`
/// for `steps` periods from `x0`, with `u(-1) = 0`.
pub fn run_recursion(
    disc: &DiscretizedPlant,
    gain: &[f64],
    x0: &[f64],
    steps: usize,
    noise: &mut dyn ControlNoise,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut states = Vec::with_capacity(steps + 1);
    let mut controls = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    let mut u_prev = 0.0;
    for k in 0..=steps {
        let u = -dot(gain, &x) - noise.sample();
        states.push(x.clone());
        controls.push(u);
        if k < steps {
            x = disc.step(&x, u, u_prev);
            u_prev = u;
        }
    }
    (states, controls)
}

fn noise_stream(seed: u64, scheme: SimScheme) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(scheme.stream_tag());
    rng
}

/// Effective gain and noise model a scheme realizes on `cfg.channel`.
pub fn realized_law(cfg: &SimConfig) -> Result<(RealVector, Box<dyn ControlNoise>)> {
    let noisy = cfg.noise_enabled;
    match cfg.scheme {
        SimScheme::Ideal => Ok((cfg.gain.clone(), Box::new(Noiseless))),
        SimScheme::Air => {
            let s = optimize_air_scaling(&cfg.channel, &cfg.gain)?;
            let g = effective_gain_air(&s, &cfg.channel)?;
            let noise: Box<dyn ControlNoise> = if noisy {
                Box::new(AirNoise {
                    rng: noise_stream(cfg.seed, cfg.scheme),
                    std: s.alpha * cfg.channel.sigma2.sqrt(),
                })
            } else {
                Box::new(Noiseless)
            };
            Ok((g, noise))
        }
        SimScheme::Sota => {
            let s = optimize_sota_scaling(&cfg.channel, &cfg.gain)?;
            let g = effective_gain_sota(&s, &cfg.channel)?;
            let noise: Box<dyn ControlNoise> = if noisy {
                let ss = cfg.channel.sigma_s2.sqrt();
                Box::new(SotaNoise {
                    rng: noise_stream(cfg.seed, cfg.scheme),
                    sensor_weights: s
                        .alpha_s
                        .iter()
                        .map(|a| s.alpha_a * cfg.channel.h_a * a * ss)
                        .collect(),
                    actuator_weight: s.alpha_a * cfg.channel.sigma_a2.sqrt(),
                })
            } else {
                Box::new(Noiseless)
            };
            Ok((g, noise))
        }
    }
}

/// Simulates the closed loop described by `cfg`.
pub fn simulate_closed_loop(cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let tau = cfg.delay().min(cfg.delta);
    let disc = discretize(&cfg.plant, cfg.delta, tau)?;
    let (gain, mut noise) = realized_law(cfg)?;
    let steps = cfg.steps();
    let (states, controls) = run_recursion(&disc, &gain, &cfg.x0, steps, noise.as_mut());
    Ok(Trajectory {
        scheme: cfg.scheme,
        delta: cfg.delta,
        times: (0..=steps).map(|k| k as f64 * cfg.delta).collect(),
        states,
        controls,
    })
}

/// Root-mean-square over samples of `‖x - x_ref‖`.
pub fn tracking_error(traj: &Trajectory, reference: &Trajectory) -> Result<f64> {
    if traj.len() != reference.len() || traj.is_empty() {
        return Err(Error::Validation(format!(
            "trajectories have {} and {} samples",
            traj.len(),
            reference.len()
        )));
    }
    let tol = 1e-9 * traj.delta.max(reference.delta).max(1.0);
    let mut acc = 0.0;
    for k in 0..traj.len() {
        if (traj.times[k] - reference.times[k]).abs() > tol {
            return Err(Error::Validation(format!(
                "time grids differ at sample {k}: {} vs {}",
                traj.times[k], reference.times[k]
            )));
        }
        let (x, r) = (&traj.states[k], &reference.states[k]);
        if x.len() != r.len() {
            return Err(Error::Dimension(format!(
                "state dimensions differ: {} vs {}",
                x.len(),
                r.len()
            )));
        }
        acc += x.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok((acc / traj.len() as f64).sqrt())
}

pub fn trajectory_csv_header(states: usize) -> String {
    let mut h = String::from("t,scheme,u");
    for i in 1..=states {
        h.push_str(&format!(",x{i}"));
    }
    h
}

/// Writes one or more trajectories into a single CSV, one row per sample.
pub fn write_trajectories_csv<W: Write>(mut w: W, trajs: &[Trajectory]) -> io::Result<()> {
    let states = trajs
        .first()
        .and_then(|t| t.states.first())
        .map_or(0, Vec::len);
    writeln!(w, "{}", trajectory_csv_header(states))?;
    for traj in trajs {
        for k in 0..traj.len() {
            write!(
                w,
                "{},{},{}",
                sig9(traj.times[k]),
                traj.scheme,
                sig9(traj.controls[k])
            )?;
            for v in &traj.states[k] {
                write!(w, ",{}", sig9(*v))?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}
