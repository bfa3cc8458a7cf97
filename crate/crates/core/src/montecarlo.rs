//! Averaged control MSE over random Rayleigh channels and random gains.
//!
//! Every trial draws its own channel and gain from a ChaCha stream keyed by
//! `(seed, N, trial)`. The key deliberately leaves out the scheme and the
//! sweep coordinates, so both schemes and every `(p̄, σ²)` point see the same
//! realizations for a given trial index (paired comparison), and results do
//! not depend on evaluation order or thread count.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::csvfmt::sig9;
use crate::error::{Error, Result};
use crate::linalg::RealVector;
use crate::scaling::{
    mse_air, mse_sota, optimize_air_scaling, optimize_sota_scaling, ChannelRealization,
};
use crate::stability::Scheme;

/// Upper end of the uniform control-gain distribution.
pub const GAIN_MAX: f64 = 100.0;

/// Domain tag mixed into trial keys so these streams never collide with
/// other seeded streams in the crate.
const TRIAL_DOMAIN: u64 = 0x6d63_7472_6961_6c73;

/// Counter-keyed stream for one trial.
pub fn trial_stream(seed: u64, sensors: usize, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(sensors as u64).to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    key[24..].copy_from_slice(&TRIAL_DOMAIN.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// `n` i.i.d. Rayleigh magnitudes with `E[h²] = 1`: `|CN(0, 1)|`.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            ((re * re + im * im) / 2.0).sqrt()
        })
        .collect()
}

/// `n` i.i.d. gains uniform on `[0, 100]`.
pub fn sample_gain<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..=GAIN_MAX)).collect()
}

/// One trial's random draw: sensor channels, actuator channel, gains.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw {
    pub h: Vec<f64>,
    pub h_a: f64,
    pub k: Vec<f64>,
}

pub fn draw_trial(seed: u64, sensors: usize, trial: u64) -> TrialDraw {
    let mut rng = trial_stream(seed, sensors, trial);
    let h = sample_channel(&mut rng, sensors);
    let h_a = sample_channel(&mut rng, 1)[0];
    let k = sample_gain(&mut rng, sensors);
    TrialDraw { h, h_a, k }
}

/// Normalized MSE `MSE / kᵀk` of one scheme on one draw.
pub fn normalized_trial_mse(
    scheme: Scheme,
    draw: &TrialDraw,
    p_bar: f64,
    sigma2: f64,
) -> Result<f64> {
    let kk: f64 = draw.k.iter().map(|v| v * v).sum();
    if kk == 0.0 {
        return Err(Error::DegenerateChannel(
            "all control gains are zero".into(),
        ));
    }
    let ch = ChannelRealization::with_common_noise(
        RealVector::new(draw.h.clone())?,
        draw.h_a,
        sigma2,
        p_bar,
    )?;
    let mse = match scheme {
        Scheme::Air => mse_air(&optimize_air_scaling(&ch, &draw.k)?, &ch, &draw.k)?,
        Scheme::Sota => mse_sota(&optimize_sota_scaling(&ch, &draw.k)?, &ch, &draw.k)?,
    };
    Ok(mse / kk)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub sensors: usize,
    pub p_bar: f64,
    pub sigma2: f64,
    pub avg_control_mse: f64,
    pub stderr: f64,
    /// Trials that contributed to the average.
    pub trials: usize,
    /// Trials dropped because the optimizer hit a degenerate channel.
    pub skipped: usize,
}

fn summarize(
    scheme: Scheme,
    sensors: usize,
    p_bar: f64,
    sigma2: f64,
    values: &[Result<f64>],
) -> Result<SweepRow> {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for v in values {
        match v {
            Ok(x) => {
                sum += x;
                sum_sq += x * x;
                used += 1;
            }
            Err(Error::DegenerateChannel(_)) => skipped += 1,
            Err(e) => return Err(e.clone()),
        }
    }
    if used == 0 {
        return Err(Error::Numerical(format!(
            "{scheme} N={sensors} p_bar={p_bar} sigma2={sigma2}: every trial was degenerate"
        )));
    }
    let n = used as f64;
    let mean = sum / n;
    let var = if used > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SweepRow {
        scheme,
        sensors,
        p_bar,
        sigma2,
        avg_control_mse: mean,
        stderr: (var / n).sqrt(),
        trials: used,
        skipped,
    })
}

fn validate_point(sensors: usize, p_bar: f64, sigma2: f64, trials: usize) -> Result<()> {
    if sensors == 0 || trials == 0 {
        return Err(Error::Validation(
            "sensor count and trial count must be at least 1".into(),
        ));
    }
    if !(p_bar > 0.0) || !(sigma2 >= 0.0) {
        return Err(Error::Validation(format!(
            "need p_bar > 0 and sigma2 >= 0, got {p_bar} and {sigma2}"
        )));
    }
    Ok(())
}

/// Average normalized MSE of one scheme at one `(N, p̄, σ²)` point, with
/// `σ² = σ_s² = σ_a²`.
pub fn average_control_mse(
    scheme: Scheme,
    sensors: usize,
    p_bar: f64,
    sigma2: f64,
    trials: usize,
    seed: u64,
) -> Result<SweepRow> {
    validate_point(sensors, p_bar, sigma2, trials)?;
    let values: Vec<Result<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| normalized_trial_mse(scheme, &draw_trial(seed, sensors, t), p_bar, sigma2))
        .collect();
    summarize(scheme, sensors, p_bar, sigma2, &values)
}

/// Both schemes on the same draws; returns `[air, sota]`.
pub fn paired_control_mse(
    sensors: usize,
    p_bar: f64,
    sigma2: f64,
    trials: usize,
    seed: u64,
) -> Result<[SweepRow; 2]> {
    validate_point(sensors, p_bar, sigma2, trials)?;
    let values: Vec<(Result<f64>, Result<f64>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let d = draw_trial(seed, sensors, t);
            (
                normalized_trial_mse(Scheme::Air, &d, p_bar, sigma2),
                normalized_trial_mse(Scheme::Sota, &d, p_bar, sigma2),
            )
        })
        .collect();
    let (air, sota): (Vec<_>, Vec<_>) = values.into_iter().unzip();
    Ok([
        summarize(Scheme::Air, sensors, p_bar, sigma2, &air)?,
        summarize(Scheme::Sota, sensors, p_bar, sigma2, &sota)?,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sensor_counts: Vec<usize>,
    /// Peak powers swept at `sigma2_fixed`.
    pub p_bar_values: Vec<f64>,
    /// Noise variances swept at `p_bar_fixed`.
    pub sigma2_values: Vec<f64>,
    pub p_bar_fixed: f64,
    pub sigma2_fixed: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sensor_counts: vec![10, 100],
            p_bar_values: vec![0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0],
            sigma2_values: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            p_bar_fixed: 2.5,
            sigma2_fixed: 0.5,
            trials: 10_000,
            seed: 2021,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Validation("trials must be at least 1".into()));
        }
        if self.sensor_counts.is_empty() || self.sensor_counts.contains(&0) {
            return Err(Error::Validation(
                "sensor counts must be a nonempty list of positive integers".into(),
            ));
        }
        let all_positive = |v: &[f64]| v.iter().all(|&x| x > 0.0 && x.is_finite());
        if !all_positive(&self.p_bar_values)
            || !all_positive(&self.sigma2_values)
            || !all_positive(&[self.p_bar_fixed, self.sigma2_fixed])
        {
            return Err(Error::Validation(
                "peak powers and noise variances must all be positive".into(),
            ));
        }
        Ok(())
    }

    /// `(p̄, σ²)` points in canonical order: the p̄ sweep, then the σ² sweep,
    /// dropping repeats of a point already listed.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        let candidates = self
            .p_bar_values
            .iter()
            .map(|&p| (p, self.sigma2_fixed))
            .chain(self.sigma2_values.iter().map(|&s| (self.p_bar_fixed, s)));
        for c in candidates {
            if !pts.contains(&c) {
                pts.push(c);
            }
        }
        pts
    }
}

/// Runs every scheme × N × point. Rows are ordered by scheme, then N, then
/// point order from [`SweepConfig::points`].
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let points = cfg.points();
    let jobs: Vec<(usize, (f64, f64))> = cfg
        .sensor_counts
        .iter()
        .flat_map(|&n| points.iter().map(move |&p| (n, p)))
        .collect();
    let paired: Vec<[SweepRow; 2]> = jobs
        .par_iter()
        .map(|&(n, (p_bar, sigma2))| paired_control_mse(n, p_bar, sigma2, cfg.trials, cfg.seed))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(2 * paired.len());
    for idx in 0..2 {
        rows.extend(paired.iter().map(|pair| pair[idx].clone()));
    }
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: &str = "scheme,N,p_bar,sigma2,trials,avg_control_mse,stderr";

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.scheme,
            r.sensors,
            sig9(r.p_bar),
            sig9(r.sigma2),
            r.trials,
            sig9(r.avg_control_mse),
            sig9(r.stderr)
        )?;
    }
    Ok(())
}
