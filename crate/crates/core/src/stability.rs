//! Stability regions over sampling period and delay.
//!
//! A grid cell `(δ, τ/δ)` is *maximum-stable* when the augmented closed-loop
//! matrix has spectral radius below one. It is *achievable* for a scheme
//! when, in addition, the network can deliver the control within the cell's
//! delay: `τ_min(scheme) ≤ τ ≤ δ`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvfmt::{flag, sig9};
use crate::error::{Error, Result};
use crate::linalg::RealVector;
use crate::plant::{augment, discretize, PlantModel};

/// Relative slack when comparing a cell delay with a scheme's minimum delay.
/// Grid delays are products like `ratio * delta` and may land a few ulps
/// below a minimum they are meant to equal.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

/// How the control signal crosses the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Sensors transmit simultaneously to the actuator; one slot of delay.
    Air,
    /// Sensors report in turn to a controller, which forwards to the actuator.
    Sota,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Air, Scheme::Sota];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Air => "air",
            Scheme::Sota => "sota",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Slot duration and sensor count of the wireless network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkTiming {
    /// Duration of one time slot, seconds.
    pub slot: f64,
    pub sensors: usize,
}

impl NetworkTiming {
    pub fn new(slot: f64, sensors: usize) -> Result<Self> {
        if !(slot > 0.0) || !slot.is_finite() {
            return Err(Error::Validation(format!(
                "slot duration must be positive, got {slot}"
            )));
        }
        if sensors == 0 {
            return Err(Error::Validation("at least one sensor is required".into()));
        }
        Ok(Self { slot, sensors })
    }

    /// Sensor-to-controller delay of the multi-hop scheme (one slot each).
    pub fn sensor_to_controller(&self) -> f64 {
        self.sensors as f64 * self.slot
    }

    /// Controller-to-actuator delay of the multi-hop scheme.
    pub fn controller_to_actuator(&self) -> f64 {
        self.slot
    }
}

/// Smallest sampling-to-actuation delay a scheme can achieve.
pub fn min_feasible_delay(scheme: Scheme, timing: &NetworkTiming) -> f64 {
    match scheme {
        Scheme::Air => timing.slot,
        Scheme::Sota => timing.sensor_to_controller() + timing.controller_to_actuator(),
    }
}

/// True when the network can deliver a control within `tau` for a period `delta`.
pub fn delay_feasible(scheme: Scheme, timing: &NetworkTiming, delta: f64, tau: f64) -> bool {
    let tau_min = min_feasible_delay(scheme, timing);
    tau >= tau_min * (1.0 - FEASIBILITY_RTOL) && tau <= delta
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityGridSpec {
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_steps: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_steps: usize,
    pub effective_gain: RealVector,
    pub plant: PlantModel,
    pub timing: NetworkTiming,
    /// A cell counts as stable when `rho < 1 - margin`.
    pub margin: f64,
}

/// Default grid gain (shared by both schemes).
pub const REFERENCE_GAIN: [f64; 4] = [6.67, 11.09, 41.15, 11.27];

impl StabilityGridSpec {
    /// 60 periods in `[0.005, 0.30]` s by 50 delay ratios in `[0, 1]`.
    pub fn default_for(
        plant: PlantModel,
        effective_gain: RealVector,
        timing: NetworkTiming,
    ) -> Self {
        Self {
            delta_min: 0.005,
            delta_max: 0.30,
            delta_steps: 60,
            ratio_min: 0.0,
            ratio_max: 1.0,
            ratio_steps: 50,
            effective_gain,
            plant,
            timing,
            margin: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if !(self.delta_min > 0.0)
            || !(self.delta_max >= self.delta_min)
            || !self.delta_max.is_finite()
        {
            return bad(format!(
                "sampling-period range [{}, {}] must be positive and nonempty",
                self.delta_min, self.delta_max
            ));
        }
        if !(self.ratio_min >= 0.0)
            || !(self.ratio_max <= 1.0)
            || !(self.ratio_max >= self.ratio_min)
        {
            return bad(format!(
                "delay-ratio range [{}, {}] must be a nonempty subset of [0, 1]",
                self.ratio_min, self.ratio_max
            ));
        }
        if self.delta_steps == 0 || self.ratio_steps == 0 {
            return bad("grid step counts must be at least 1".into());
        }
        if self.delta_steps == 1 && self.delta_min != self.delta_max {
            return bad("a single sampling-period step needs delta_min == delta_max".into());
        }
        if self.ratio_steps == 1 && self.ratio_min != self.ratio_max {
            return bad("a single ratio step needs ratio_min == ratio_max".into());
        }
        if self.effective_gain.len() != self.plant.states() {
            return Err(Error::Dimension(format!(
                "gain has length {} but the plant has {} states",
                self.effective_gain.len(),
                self.plant.states()
            )));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return bad(format!(
                "stability margin must be in [0, 1), got {}",
                self.margin
            ));
        }
        Ok(())
    }

    pub fn deltas(&self) -> Vec<f64> {
        linspace(self.delta_min, self.delta_max, self.delta_steps)
    }

    pub fn ratios(&self) -> Vec<f64> {
        linspace(self.ratio_min, self.ratio_max, self.ratio_steps)
    }
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (steps - 1) as f64;
            (0..steps)
                .map(|i| {
                    if i == steps - 1 {
                        hi
                    } else {
                        lo + i as f64 * h
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCell {
    pub delta: f64,
    pub ratio: f64,
    pub tau: f64,
    pub rho: f64,
    pub max_stable: bool,
    pub achievable_air: bool,
    pub achievable_sota: bool,
}

impl StabilityCell {
    pub fn achievable(&self, scheme: Scheme) -> bool {
        match scheme {
            Scheme::Air => self.achievable_air,
            Scheme::Sota => self.achievable_sota,
        }
    }
}

fn evaluate_cell(spec: &StabilityGridSpec, delta: f64, ratio: f64) -> Result<StabilityCell> {
    let tau = ratio * delta;
    let disc = discretize(&spec.plant, delta, tau)?;
    let rho = augment(&disc, &spec.effective_gain)?.spectral_radius()?;
    let max_stable = rho < 1.0 - spec.margin;
    Ok(StabilityCell {
        delta,
        ratio,
        tau,
        rho,
        max_stable,
        achievable_air: max_stable && delay_feasible(Scheme::Air, &spec.timing, delta, tau),
        achievable_sota: max_stable && delay_feasible(Scheme::Sota, &spec.timing, delta, tau),
    })
}

/// Evaluates every grid cell, ordered by `delta` then `ratio`.
///
/// Cells are computed in parallel; the output order does not depend on the
/// schedule.
pub fn sweep_stability(spec: &StabilityGridSpec) -> Result<Vec<StabilityCell>> {
    spec.validate()?;
    let deltas = spec.deltas();
    let ratios = spec.ratios();
    let coords: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| ratios.iter().map(move |&r| (d, r)))
        .collect();
    coords
        .par_iter()
        .map(|&(delta, ratio)| {
            evaluate_cell(spec, delta, ratio).map_err(|e| Error::Cell {
                delta,
                ratio,
                source: Box::new(e),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    MaxStable,
    AchievableAir,
    AchievableSota,
}

impl Region {
    pub fn contains(self, cell: &StabilityCell) -> bool {
        match self {
            Region::MaxStable => cell.max_stable,
            Region::AchievableAir => cell.achievable_air,
            Region::AchievableSota => cell.achievable_sota,
        }
    }

    pub fn achievable(scheme: Scheme) -> Self {
        match scheme {
            Scheme::Air => Region::AchievableAir,
            Scheme::Sota => Region::AchievableSota,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionArea {
    pub cell_count: usize,
    /// Fraction of grid cells inside the region.
    pub normalized_area: f64,
}

pub fn region_area(cells: &[StabilityCell], which: Region) -> Result<RegionArea> {
    if cells.is_empty() {
        return Err(Error::Validation(
            "region_area needs a nonempty grid".into(),
        ));
    }
    let cell_count = cells.iter().filter(|c| which.contains(c)).count();
    Ok(RegionArea {
        cell_count,
        normalized_area: cell_count as f64 / cells.len() as f64,
    })
}

/// Achievable-region size of the over-the-air scheme relative to the
/// multi-hop one, by cell count. `None` when the multi-hop region is empty.
pub fn area_ratio(cells: &[StabilityCell]) -> Result<Option<f64>> {
    let air = region_area(cells, Region::AchievableAir)?;
    let sota = region_area(cells, Region::AchievableSota)?;
    Ok((sota.cell_count > 0).then(|| air.cell_count as f64 / sota.cell_count as f64))
}

pub const STABILITY_CSV_HEADER: &str =
    "delta,ratio,tau,rho,max_stable,achievable_air,achievable_sota";

pub fn write_stability_csv<W: Write>(mut w: W, cells: &[StabilityCell]) -> io::Result<()> {
    writeln!(w, "{STABILITY_CSV_HEADER}")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            sig9(c.delta),
            sig9(c.ratio),
            sig9(c.tau),
            sig9(c.rho),
            flag(c.max_stable),
            flag(c.achievable_air),
            flag(c.achievable_sota)
        )?;
    }
    Ok(())
}
