//! Transmit/receive scaling and the control-signal MSE of both schemes.
//!
//! Sensor states are modelled as i.i.d. standard normal, so the MSE of a
//! computed control `û` against the target `kᵀx` has a closed form:
//!
//! - over the air, `û = α((h ⊙ β)ᵀx + n)`:
//!   `‖α(h ⊙ β) - k‖² + σ²α²`
//! - multi-hop, `û = α_a(h_a α_sᵀ(Dx + n_s) + n_a)` with `D = diag(h_i β_i)`:
//!   `‖α_a h_a D α_s - k‖² + α_a² h_a² σ_s² α_sᵀα_s + α_a² σ_a²`
//!
//! Per-sensor noise in the multi-hop scheme is scaled by the controller
//! weights `α_s` and then by `α_a`; the simulator uses the same convention.

use crate::error::{Error, Result};
use crate::linalg::RealVector;
use crate::search::golden_section;

/// Relative bracket width at which the per-piece golden-section search stops.
const GOLDEN_TOL: f64 = 1e-13;
const GOLDEN_MAX_ITER: usize = 200;

/// Channel gains, noise levels and the per-sensor power limit for one
/// realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Sensor channel magnitudes (to the actuator, or to the controller).
    pub h: RealVector,
    /// Controller-to-actuator channel magnitude.
    pub h_a: f64,
    /// Receiver noise variance of the over-the-air scheme.
    pub sigma2: f64,
    /// Sensor-to-controller noise variance.
    pub sigma_s2: f64,
    /// Controller-to-actuator noise variance.
    pub sigma_a2: f64,
    /// Peak transmit power; `β_i² ≤ p̄`.
    pub p_bar: f64,
}

impl ChannelRealization {
    pub fn new(
        h: RealVector,
        h_a: f64,
        sigma2: f64,
        sigma_s2: f64,
        sigma_a2: f64,
        p_bar: f64,
    ) -> Result<Self> {
        let ch = Self {
            h,
            h_a,
            sigma2,
            sigma_s2,
            sigma_a2,
            p_bar,
        };
        ch.validate()?;
        Ok(ch)
    }

    /// Same noise variance on every link.
    pub fn with_common_noise(h: RealVector, h_a: f64, sigma2: f64, p_bar: f64) -> Result<Self> {
        Self::new(h, h_a, sigma2, sigma2, sigma2, p_bar)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.h.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Validation(format!(
                "channel magnitude h[{i}] must be positive, got {}",
                self.h[i]
            )));
        }
        if !(self.h_a >= 0.0) || !self.h_a.is_finite() {
            return Err(Error::Validation(format!(
                "actuator channel magnitude must be >= 0, got {}",
                self.h_a
            )));
        }
        for (name, v) in [
            ("sigma2", self.sigma2),
            ("sigma_s2", self.sigma_s2),
            ("sigma_a2", self.sigma_a2),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.p_bar > 0.0) || !self.p_bar.is_finite() {
            return Err(Error::Validation(format!(
                "peak power must be positive, got {}",
                self.p_bar
            )));
        }
        Ok(())
    }

    pub fn sensors(&self) -> usize {
        self.h.len()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.p_bar.sqrt()
    }
}

/// Over-the-air scaling: sensor amplitudes `β` and actuator gain `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct AirScaling {
    pub beta: RealVector,
    pub alpha: f64,
}

/// Multi-hop scaling: sensor amplitudes `β`, controller weights `α_s`,
/// actuator gain `α_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct SotaScaling {
    pub beta: RealVector,
    pub alpha_s: RealVector,
    pub alpha_a: f64,
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

/// Feedback gain realized over the air: `α (h ⊙ β)`.
pub fn effective_gain_air(s: &AirScaling, ch: &ChannelRealization) -> Result<RealVector> {
    check_len("beta", s.beta.len(), ch.sensors())?;
    RealVector::new(
        ch.h.iter()
            .zip(s.beta.iter())
            .map(|(h, b)| s.alpha * h * b)
            .collect(),
    )
}

/// Feedback gain realized through the controller: `α_a h_a D α_s`.
pub fn effective_gain_sota(s: &SotaScaling, ch: &ChannelRealization) -> Result<RealVector> {
    check_len("beta", s.beta.len(), ch.sensors())?;
    check_len("alpha_s", s.alpha_s.len(), ch.sensors())?;
    RealVector::new(
        (0..ch.sensors())
            .map(|i| s.alpha_a * ch.h_a * (ch.h[i] * s.beta[i]) * s.alpha_s[i])
            .collect(),
    )
}

/// Over-the-air MSE split as `distortion + coefficient * σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirMseTerms {
    pub distortion: f64,
    pub sigma2_coefficient: f64,
}

/// Multi-hop MSE split as `distortion + c_s σ_s² + c_a σ_a²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SotaMseTerms {
    pub distortion: f64,
    pub sigma_s2_coefficient: f64,
    pub sigma_a2_coefficient: f64,
}

fn distortion(gain: &[f64], k: &[f64]) -> f64 {
    gain.iter().zip(k).map(|(g, k)| (g - k) * (g - k)).sum()
}

pub fn mse_air_terms(s: &AirScaling, ch: &ChannelRealization, k: &[f64]) -> Result<AirMseTerms> {
    check_len("gain k", k.len(), ch.sensors())?;
    let g = effective_gain_air(s, ch)?;
    Ok(AirMseTerms {
        distortion: distortion(&g, k),
        sigma2_coefficient: s.alpha * s.alpha,
    })
}

/// Closed-form MSE of the over-the-air control signal.
pub fn mse_air(s: &AirScaling, ch: &ChannelRealization, k: &[f64]) -> Result<f64> {
    let t = mse_air_terms(s, ch, k)?;
    Ok(t.distortion + t.sigma2_coefficient * ch.sigma2)
}

pub fn mse_sota_terms(s: &SotaScaling, ch: &ChannelRealization, k: &[f64]) -> Result<SotaMseTerms> {
    check_len("gain k", k.len(), ch.sensors())?;
    let g = effective_gain_sota(s, ch)?;
    let aa2 = s.alpha_a * s.alpha_a;
    let as2: f64 = s.alpha_s.iter().map(|a| a * a).sum();
    Ok(SotaMseTerms {
        distortion: distortion(&g, k),
        sigma_s2_coefficient: aa2 * ch.h_a * ch.h_a * as2,
        sigma_a2_coefficient: aa2,
    })
}

/// Closed-form MSE of the multi-hop control signal.
pub fn mse_sota(s: &SotaScaling, ch: &ChannelRealization, k: &[f64]) -> Result<f64> {
    let t = mse_sota_terms(s, ch, k)?;
    Ok(t.distortion + t.sigma_s2_coefficient * ch.sigma_s2 + t.sigma_a2_coefficient * ch.sigma_a2)
}

/// Closed-form multi-hop optimum.
///
/// Sensors transmit at full amplitude `β_i = √p̄`; each controller weight is
/// the per-link MMSE weight `h_i k_i β_i / ((h_i β_i)² + σ_s²)`; the actuator
/// gain then minimizes the full MSE in `α_a` alone.
pub fn optimize_sota_scaling(ch: &ChannelRealization, k: &[f64]) -> Result<SotaScaling> {
    ch.validate()?;
    check_len("gain k", k.len(), ch.sensors())?;
    if ch.h_a == 0.0 {
        return Err(Error::DegenerateChannel(
            "controller-to-actuator channel is zero".into(),
        ));
    }
    let amp = ch.max_amplitude();
    let beta = vec![amp; ch.sensors()];
    let alpha_s: Vec<f64> = (0..ch.sensors())
        .map(|i| {
            let d = ch.h[i] * amp;
            d * k[i] / (d * d + ch.sigma_s2)
        })
        .collect();
    // v = D α_s
    let v: Vec<f64> = (0..ch.sensors())
        .map(|i| ch.h[i] * amp * alpha_s[i])
        .collect();
    let vk: f64 = v.iter().zip(k).map(|(v, k)| v * k).sum();
    let vv: f64 = v.iter().map(|v| v * v).sum();
    let ss: f64 = alpha_s.iter().map(|a| a * a).sum();
    let ha2 = ch.h_a * ch.h_a;
    let denom = ha2 * vv + ha2 * ch.sigma_s2 * ss + ch.sigma_a2;
    let alpha_a = if denom > 0.0 {
        ch.h_a * vk / denom
    } else {
        0.0
    };
    Ok(SotaScaling {
        beta: RealVector::new(beta)?,
        alpha_s: RealVector::new(alpha_s)?,
        alpha_a,
    })
}

/// Over-the-air MSE as a function of `α` alone, with every sensor using the
/// clipped inversion `β_i(α) = min(√p̄, k_i / (α h_i))`:
/// `f(α) = Σ (min(α h_i √p̄, k_i) - k_i)² + σ²α²`.
pub fn air_objective(alpha: f64, ch: &ChannelRealization, k: &[f64]) -> f64 {
    let amp = ch.max_amplitude();
    let clip: f64 =
        ch.h.iter()
            .zip(k)
            .map(|(h, &k)| {
                let e = (alpha * h * amp).min(k) - k;
                e * e
            })
            .sum();
    clip + ch.sigma2 * alpha * alpha
}

/// Best per-sensor amplitudes for a fixed `α`.
pub fn clipped_inversion(alpha: f64, ch: &ChannelRealization, k: &[f64]) -> Result<RealVector> {
    let amp = ch.max_amplitude();
    RealVector::new(
        ch.h.iter()
            .zip(k)
            .map(|(h, &k)| {
                if k == 0.0 {
                    0.0
                } else {
                    (k / (alpha * h)).min(amp)
                }
            })
            .collect(),
    )
}

/// Peak-power-constrained over-the-air scaling.
///
/// For a fixed `α` the MSE separates per sensor and is minimized by the
/// clipped inversion. What remains is the scalar [`air_objective`], which is
/// smooth between the breakpoints `α = k_i / (h_i √p̄)` where sensors leave
/// saturation. Each piece is searched by golden section and the best piece
/// wins. On a piece the saturated set is fixed, so `f` is evaluated in O(1)
/// from suffix sums over the sorted breakpoints.
pub fn optimize_air_scaling(ch: &ChannelRealization, k: &[f64]) -> Result<AirScaling> {
    ch.validate()?;
    check_len("gain k", k.len(), ch.sensors())?;
    if let Some(i) = k.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Validation(format!(
            "gain k[{i}] must be finite and >= 0, got {}",
            k[i]
        )));
    }
    if k.iter().all(|&v| v == 0.0) {
        return Ok(AirScaling {
            beta: RealVector::zeros(k.len()),
            alpha: 0.0,
        });
    }
    let amp = ch.max_amplitude();
    // (breakpoint, a_i = h_i √p̄, k_i) for sensors with k_i > 0, sorted.
    let mut pts: Vec<(f64, f64, f64)> =
        ch.h.iter()
            .zip(k)
            .filter(|(_, &k)| k > 0.0)
            .map(|(h, &k)| {
                let a = h * amp;
                (k / a, a, k)
            })
            .collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));

    // suffix[j] = (Σ a², Σ a k, Σ k²) over pts[j..]
    let mut suffix = vec![(0.0, 0.0, 0.0); pts.len() + 1];
    for j in (0..pts.len()).rev() {
        let (_, a, kk) = pts[j];
        let s = suffix[j + 1];
        suffix[j] = (s.0 + a * a, s.1 + a * kk, s.2 + kk * kk);
    }

    // On piece j, f(x) = q (x - v)² + c with q = Σa² + σ², v = Σak / q over
    // the unsaturated suffix. The vertex form keeps the argmin accurate; the
    // offset c cancels badly near zero residual, so it only ranks pieces
    // coarsely and close contenders are re-scored with `air_objective`.
    let sigma2 = ch.sigma2;
    let mut candidates: Vec<(f64, f64)> = Vec::with_capacity(pts.len() + 1);
    let mut lo = 0.0;
    for j in 0..pts.len() {
        let hi = pts[j].0;
        if hi > lo {
            let (saa, sak, skk) = suffix[j];
            let q = saa + sigma2;
            let v = sak / q;
            let offset = skk - sak * v;
            let piece = |x: f64| q * (x - v) * (x - v);
            let m = golden_section(piece, lo, hi, GOLDEN_TOL, GOLDEN_MAX_ITER);
            candidates.push((m.x, m.value + offset));
        }
        lo = lo.max(hi);
    }
    // Beyond the last breakpoint nothing saturates and f = σ²α², which is
    // nondecreasing, so its left end is the only candidate.
    candidates.push((lo, sigma2 * lo * lo));

    let coarse = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let slack = 1e-9 * (suffix[0].2 + coarse.abs());
    let mut best_alpha = lo;
    let mut best_val = f64::INFINITY;
    for &(x, approx) in &candidates {
        if approx <= coarse + slack {
            let exact = air_objective(x, ch, k);
            if exact < best_val {
                best_val = exact;
                best_alpha = x;
            }
        }
    }

    Ok(AirScaling {
        beta: clipped_inversion(best_alpha, ch, k)?,
        alpha: best_alpha,
    })
}

/// Limit of the unconstrained over-the-air optimum at a given `α`.
///
/// Without a power limit `β_i = k_i / (α h_i)` removes all distortion and
/// the MSE is `σ²α²`, which vanishes only as `α → 0` with unbounded
/// amplitudes. Reported for diagnostics; it is not a usable policy.
#[derive(Debug, Clone, PartialEq)]
pub struct UnconstrainedAirLimit {
    pub alpha: f64,
    pub beta: RealVector,
    pub mse: f64,
    /// Largest amplitude the inversion asks for, to compare against `√p̄`.
    pub peak_amplitude: f64,
}

pub fn unconstrained_air_limit(
    alpha: f64,
    ch: &ChannelRealization,
    k: &[f64],
) -> Result<UnconstrainedAirLimit> {
    check_len("gain k", k.len(), ch.sensors())?;
    if !(alpha > 0.0) {
        return Err(Error::Validation(format!(
            "unconstrained limit needs alpha > 0, got {alpha}"
        )));
    }
    let beta = RealVector::new(ch.h.iter().zip(k).map(|(h, k)| k / (alpha * h)).collect())?;
    let peak_amplitude = beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let mse = mse_air(
        &AirScaling {
            beta: beta.clone(),
            alpha,
        },
        ch,
        k,
    )?;
    Ok(UnconstrainedAirLimit {
        alpha,
        beta,
        mse,
        peak_amplitude,
    })
}
