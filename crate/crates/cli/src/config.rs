//! Run configuration: the TOML file format, its defaults, and the fully
//! resolved form that commands consume.
//!
//! A config is a plant description (`name`, `A`, `b`, `labels` at top level,
//! optional; the ball-and-beam model otherwise) plus optional `[timing]`,
//! `[grid]`, `[sweep]` and `[sim]` sections and a top-level `seed`. Unknown
//! keys anywhere are errors. A `[manifest]` table, as written next to every
//! output, is accepted and ignored so a manifest can be fed back in as a
//! config.

use aircont_core::linalg::RealVector;
use aircont_core::montecarlo::SweepConfig;
use aircont_core::plant::{default_ball_and_beam, toml_error_message, PlantFile, PlantModel};
use aircont_core::scaling::ChannelRealization;
use aircont_core::simulate::{SimConfig, SimScheme};
use aircont_core::stability::{NetworkTiming, StabilityGridSpec, REFERENCE_GAIN};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 2021;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing)]
    pub manifest: Option<toml::Table>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    /// Slot length `T_s`, seconds.
    pub slot: Option<f64>,
    /// Defaults to the plant's state count.
    pub sensors: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub delta_steps: Option<usize>,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
    pub ratio_steps: Option<usize>,
    pub gain: Option<Vec<f64>>,
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub sensor_counts: Option<Vec<usize>>,
    pub p_bar_values: Option<Vec<f64>>,
    pub sigma2_values: Option<Vec<f64>>,
    pub p_bar_fixed: Option<f64>,
    pub sigma2_fixed: Option<f64>,
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub horizon: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub gain: Option<Vec<f64>>,
    pub delta_ideal: Option<f64>,
    pub delta_air: Option<f64>,
    pub delta_sota: Option<f64>,
    pub h: Option<Vec<f64>>,
    pub h_a: Option<f64>,
    pub p_bar: Option<f64>,
    pub sigma2: Option<f64>,
    pub sigma_s2: Option<f64>,
    pub sigma_a2: Option<f64>,
    pub noise_enabled: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSettings {
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_steps: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_steps: usize,
    pub gain: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub gain: Vec<f64>,
    pub delta_ideal: f64,
    pub delta_air: f64,
    pub delta_sota: f64,
    pub h: Vec<f64>,
    pub h_a: f64,
    pub p_bar: f64,
    pub sigma2: f64,
    pub sigma_s2: f64,
    pub sigma_a2: f64,
    pub noise_enabled: bool,
}

/// Every setting with its default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub plant: PlantModel,
    pub timing: NetworkTiming,
    pub grid: GridSettings,
    pub sweep: SweepConfig,
    pub sim: SimSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        ConfigFile::default()
            .resolve("")
            .expect("defaults are valid")
    }
}

/// 1-based line of `key` inside `[section]` (or at top level when `section`
/// is empty), for anchoring semantic errors.
fn key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn config_error(text: &str, section: &str, key: &str, msg: impl std::fmt::Display) -> CliError {
    let at = if section.is_empty() {
        key.to_string()
    } else {
        format!("[{section}] {key}")
    };
    match key_line(text, section, key) {
        Some(line) => CliError::Config(format!("line {line}: {at}: {msg}")),
        None => CliError::Config(format!("{at}: {msg}")),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(toml_error_message(text, &e)))
    }

    /// Fills in defaults and validates. `text` is the source the file was
    /// parsed from, used only to point errors at a line.
    pub fn resolve(&self, text: &str) -> Result<RunConfig, CliError> {
        let err = |section: &str, key: &str, msg: String| config_error(text, section, key, msg);

        let plant = match (&self.a, &self.b) {
            (None, None) => {
                if self.name.is_some() || self.labels.is_some() {
                    return Err(err(
                        "",
                        "A",
                        "plant name/labels given without A and b".into(),
                    ));
                }
                default_ball_and_beam()
            }
            (Some(a), Some(b)) => PlantFile {
                name: self.name.clone().unwrap_or_else(|| "plant".into()),
                a: a.clone(),
                b: b.clone(),
                labels: self.labels.clone(),
            }
            .into_model()
            .map_err(|e| err("", "A", e.to_string()))?,
            (Some(_), None) => return Err(err("", "A", "A given without b".into())),
            (None, Some(_)) => return Err(err("", "b", "b given without A".into())),
        };
        let n = plant.states();
        let default_gain = || -> Option<Vec<f64>> { (n == 4).then(|| REFERENCE_GAIN.to_vec()) };

        let t = self.timing.clone().unwrap_or_default();
        let timing = NetworkTiming::new(t.slot.unwrap_or(0.01), t.sensors.unwrap_or(n))
            .map_err(|e| err("timing", "slot", e.to_string()))?;

        let g = self.grid.clone().unwrap_or_default();
        let grid = GridSettings {
            delta_min: g.delta_min.unwrap_or(0.005),
            delta_max: g.delta_max.unwrap_or(0.30),
            delta_steps: g.delta_steps.unwrap_or(60),
            ratio_min: g.ratio_min.unwrap_or(0.0),
            ratio_max: g.ratio_max.unwrap_or(1.0),
            ratio_steps: g.ratio_steps.unwrap_or(50),
            gain: match g.gain.or_else(default_gain) {
                Some(v) => v,
                None => {
                    return Err(err(
                        "grid",
                        "gain",
                        format!("required for a {n}-state plant"),
                    ))
                }
            },
            margin: g.margin.unwrap_or(0.0),
        };
        if grid.gain.len() != n {
            return Err(err(
                "grid",
                "gain",
                format!(
                    "has {} entries but the plant has {n} states",
                    grid.gain.len()
                ),
            ));
        }

        let s = self.sweep.clone().unwrap_or_default();
        let d = SweepConfig::default();
        let sweep = SweepConfig {
            sensor_counts: s.sensor_counts.unwrap_or(d.sensor_counts),
            p_bar_values: s.p_bar_values.unwrap_or(d.p_bar_values),
            sigma2_values: s.sigma2_values.unwrap_or(d.sigma2_values),
            p_bar_fixed: s.p_bar_fixed.unwrap_or(d.p_bar_fixed),
            sigma2_fixed: s.sigma2_fixed.unwrap_or(d.sigma2_fixed),
            trials: s.trials.unwrap_or(d.trials),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
        };
        sweep
            .validate()
            .map_err(|e| err("sweep", "trials", e.to_string()))?;

        let m = self.sim.clone().unwrap_or_default();
        let mut x0 = vec![0.0; n];
        x0[0] = 0.1;
        let sim = SimSettings {
            horizon: m.horizon.unwrap_or(10.0),
            x0: m.x0.unwrap_or(x0),
            gain: m.gain.unwrap_or_else(|| grid.gain.clone()),
            delta_ideal: m.delta_ideal.unwrap_or(0.01),
            delta_air: m.delta_air.unwrap_or(timing.slot),
            delta_sota: m
                .delta_sota
                .unwrap_or((timing.sensors + 1) as f64 * timing.slot),
            h: m.h.unwrap_or_else(|| vec![1.0; n]),
            h_a: m.h_a.unwrap_or(1.0),
            p_bar: m.p_bar.unwrap_or(2.5),
            sigma2: m.sigma2.unwrap_or(1e-3),
            sigma_s2: m.sigma_s2.unwrap_or(1e-3),
            sigma_a2: m.sigma_a2.unwrap_or(1e-3),
            noise_enabled: m.noise_enabled.unwrap_or(true),
        };
        if !(sim.horizon > 0.0) || !sim.horizon.is_finite() {
            return Err(err(
                "sim",
                "horizon",
                format!("must be positive, got {}", sim.horizon),
            ));
        }
        for (key, v) in [("x0", &sim.x0), ("gain", &sim.gain), ("h", &sim.h)] {
            if v.len() != n {
                return Err(err(
                    "sim",
                    key,
                    format!("has {} entries but the plant has {n} states", v.len()),
                ));
            }
        }
        for (key, v) in [
            ("delta_ideal", sim.delta_ideal),
            ("delta_air", sim.delta_air),
            ("delta_sota", sim.delta_sota),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(err("sim", key, format!("must be positive, got {v}")));
            }
        }

        let cfg = RunConfig {
            seed: sweep.seed,
            plant,
            timing,
            grid,
            sweep,
            sim,
        };
        cfg.grid_spec()
            .validate()
            .map_err(|e| err("grid", "delta_min", e.to_string()))?;
        cfg.channel().map_err(|e| err("sim", "h", e.to_string()))?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        ConfigFile::parse(text)?.resolve(text)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.sweep.seed = seed;
        self
    }

    pub fn grid_spec(&self) -> StabilityGridSpec {
        StabilityGridSpec {
            delta_min: self.grid.delta_min,
            delta_max: self.grid.delta_max,
            delta_steps: self.grid.delta_steps,
            ratio_min: self.grid.ratio_min,
            ratio_max: self.grid.ratio_max,
            ratio_steps: self.grid.ratio_steps,
            effective_gain: RealVector::new(self.grid.gain.clone()).expect("validated gain"),
            plant: self.plant.clone(),
            timing: self.timing,
            margin: self.grid.margin,
        }
    }

    pub fn channel(&self) -> aircont_core::Result<ChannelRealization> {
        let s = &self.sim;
        ChannelRealization::new(
            RealVector::new(s.h.clone())?,
            s.h_a,
            s.sigma2,
            s.sigma_s2,
            s.sigma_a2,
            s.p_bar,
        )
    }

    /// Closed-loop setup of one scheme.
    pub fn sim_config(&self, scheme: SimScheme) -> aircont_core::Result<SimConfig> {
        let s = &self.sim;
        Ok(SimConfig {
            plant: self.plant.clone(),
            scheme,
            delta: match scheme {
                SimScheme::Ideal => s.delta_ideal,
                SimScheme::Air => s.delta_air,
                SimScheme::Sota => s.delta_sota,
            },
            timing: self.timing,
            x0: RealVector::new(s.x0.clone())?,
            horizon: s.horizon,
            channel: self.channel()?,
            gain: RealVector::new(s.gain.clone())?,
            seed: self.seed,
            noise_enabled: s.noise_enabled,
        })
    }

    /// The equivalent file with every default written out.
    pub fn to_file(&self) -> ConfigFile {
        let p = self.plant.to_file();
        let (g, s, m) = (&self.grid, &self.sweep, &self.sim);
        ConfigFile {
            seed: Some(self.seed),
            name: Some(p.name),
            a: Some(p.a),
            b: Some(p.b),
            labels: p.labels,
            timing: Some(TimingSection {
                slot: Some(self.timing.slot),
                sensors: Some(self.timing.sensors),
            }),
            grid: Some(GridSection {
                delta_min: Some(g.delta_min),
                delta_max: Some(g.delta_max),
                delta_steps: Some(g.delta_steps),
                ratio_min: Some(g.ratio_min),
                ratio_max: Some(g.ratio_max),
                ratio_steps: Some(g.ratio_steps),
                gain: Some(g.gain.clone()),
                margin: Some(g.margin),
            }),
            sweep: Some(SweepSection {
                sensor_counts: Some(s.sensor_counts.clone()),
                p_bar_values: Some(s.p_bar_values.clone()),
                sigma2_values: Some(s.sigma2_values.clone()),
                p_bar_fixed: Some(s.p_bar_fixed),
                sigma2_fixed: Some(s.sigma2_fixed),
                trials: Some(s.trials),
            }),
            sim: Some(SimSection {
                horizon: Some(m.horizon),
                x0: Some(m.x0.clone()),
                gain: Some(m.gain.clone()),
                delta_ideal: Some(m.delta_ideal),
                delta_air: Some(m.delta_air),
                delta_sota: Some(m.delta_sota),
                h: Some(m.h.clone()),
                h_a: Some(m.h_a),
                p_bar: Some(m.p_bar),
                sigma2: Some(m.sigma2),
                sigma_s2: Some(m.sigma_s2),
                sigma_a2: Some(m.sigma_a2),
                noise_enabled: Some(m.noise_enabled),
            }),
            manifest: None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serializes")
    }
}
