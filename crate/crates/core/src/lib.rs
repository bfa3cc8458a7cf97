//! Analysis toolkit for closed-loop wireless control with an over-the-air
//! controller.
//!
//! Sensors either superimpose their scaled measurements at the actuator in
//! one slot (the over-the-air scheme, [`Scheme::Air`]) or report one by one
//! to a controller that forwards the control signal (the multi-hop baseline,
//! [`Scheme::Sota`]). The crate covers:
//!
//! - [`linalg`]: matrix exponential, exponential integrals, spectral radius.
//! - [`plant`]: LTI plants, delayed sampling, augmented closed-loop matrices.
//! - [`stability`]: stability-region sweeps over sampling period and delay.
//! - [`scaling`]: MSE closed forms and Tx/Rx scaling policies.
//! - [`montecarlo`]: averaged control MSE over Rayleigh channels.
//! - [`simulate`]: noisy closed-loop trajectories.
//! - [`oracle`]: slow independent reference computations used for checks.

pub mod csvfmt;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod oracle;
pub mod plant;
pub mod scaling;
pub mod search;
pub mod simulate;
pub mod stability;

pub use error::{Error, Result};
pub use linalg::{RealMatrix, RealVector};
pub use plant::{AugmentedSystem, DiscretizedPlant, PlantModel};
pub use stability::{NetworkTiming, Scheme};
