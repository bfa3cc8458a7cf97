//! Continuous LTI plants, sampled-data discretization with an input delay,
//! and the augmented closed-loop matrices.
//!
//! With sampling period δ and a delay τ ≤ δ, the control computed from
//! `x(kδ)` only reaches the plant at `kδ + τ`, so the previous control acts
//! on `[kδ, kδ + τ)` and the new one on `[kδ + τ, (k+1)δ)`:
//!
//! ```text
//! x(k+1) = Φ x(k) + Γ0(τ) u(k) + Γ1(τ) u(k-1)
//! ```
//!
//! Stacking `z(k) = [x(k); u(k-1)]` with `u(k) = -gᵀx(k)` gives the
//! augmented matrix built by [`augment`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{phi_gamma, spectral_radius, RealMatrix, RealVector};
use crate::stability::Scheme;

/// Tolerance of the `Γ0 + Γ1 = ∫_0^δ e^{As} b ds` check, relative to the
/// magnitude of the full-period integral.
const GAMMA_SPLIT_TOL: f64 = 1e-9;

/// Continuous-time single-input plant `ẋ = A x + b u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub name: String,
    a: RealMatrix,
    b: RealVector,
    labels: Option<Vec<String>>,
}

impl PlantModel {
    pub fn new(name: impl Into<String>, a: RealMatrix, b: RealVector) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "plant A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if a.rows() == 0 {
            return Err(Error::Validation("plant needs at least one state".into()));
        }
        if b.len() != a.rows() {
            return Err(Error::Dimension(format!(
                "plant A is {n}x{n} but b has length {}",
                b.len(),
                n = a.rows()
            )));
        }
        Ok(Self {
            name: name.into(),
            a,
            b,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.states() {
            return Err(Error::Dimension(format!(
                "{} labels given for {} states",
                labels.len(),
                self.states()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Number of states, which is also the number of sensors.
    pub fn states(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &RealMatrix {
        &self.a
    }

    pub fn b(&self) -> &RealVector {
        &self.b
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn to_file(&self) -> PlantFile {
        PlantFile {
            name: self.name.clone(),
            a: self.a.to_rows(),
            b: self.b.to_vec(),
            labels: self.labels.clone(),
        }
    }
}

/// On-disk plant description (TOML).
///
/// ```toml
/// name = "ball-and-beam"
/// A = [[0, 1, 0, 0], [0, 0, 7, 0], [0, 0, 0, 1], [0, 0, 0, 0]]
/// b = [0, 0, 0, 1]
/// labels = ["position", "velocity", "angle", "angular rate"]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantFile {
    pub name: String,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl PlantFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(toml_error_message(text, &e)))
    }

    /// Validates the shapes and builds the plant.
    pub fn into_model(self) -> Result<PlantModel> {
        let n = self.a.len();
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!(
                    "plant `{}`: A row {} has {} entries, expected {n} (A must be square)",
                    self.name,
                    i + 1,
                    row.len()
                )));
            }
        }
        if self.b.len() != n {
            return Err(Error::Config(format!(
                "plant `{}`: b has {} entries but A is {n}x{n}",
                self.name,
                self.b.len()
            )));
        }
        let a = RealMatrix::from_rows(&self.a)?;
        let b = RealVector::new(self.b)?;
        let model = PlantModel::new(self.name, a, b)?;
        match self.labels {
            Some(l) => model.with_labels(l),
            None => Ok(model),
        }
    }
}

/// Renders a TOML error with its 1-based line and column.
pub fn toml_error_message(text: &str, err: &toml::de::Error) -> String {
    let msg = err.message();
    match err.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
            format!("line {line}, column {col}: {msg}")
        }
        None => msg.to_string(),
    }
}

/// Linearized ball-and-beam model used when no plant is configured.
///
/// States are ball position (m), ball velocity (m/s), beam angle (rad) and
/// beam angular rate (rad/s); the input is the beam angular acceleration.
/// The ball couples to the beam angle with gain 7 m/s² per rad (5g/7
/// rounded). With the reference gain `[6.67, 11.09, 41.15, 11.27]` the
/// closed loop is stable for small sampling periods and loses stability
/// without delay a little above δ = 0.26 s.
pub fn default_ball_and_beam() -> PlantModel {
    let a = RealMatrix::from_rows(&[
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 7.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
        vec![0.0, 0.0, 0.0, 0.0],
    ])
    .expect("static matrix");
    let b = RealVector::new(vec![0.0, 0.0, 0.0, 1.0]).expect("static vector");
    PlantModel::new("ball-and-beam", a, b)
        .and_then(|p| {
            p.with_labels(vec![
                "ball position".into(),
                "ball velocity".into(),
                "beam angle".into(),
                "beam angular rate".into(),
            ])
        })
        .expect("static plant")
}

/// Sampled plant for one `(δ, τ)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedPlant {
    pub phi: RealMatrix,
    /// Input vector of the control computed at this sample (acts on `[τ, δ)`).
    pub gamma0: RealVector,
    /// Input vector of the previous control (acts on `[0, τ)`).
    pub gamma1: RealVector,
    pub delta: f64,
    pub tau: f64,
}

impl DiscretizedPlant {
    pub fn states(&self) -> usize {
        self.gamma0.len()
    }

    /// One sampling period: `Φx + Γ0 u_cur + Γ1 u_prev`.
    pub fn step(&self, x: &[f64], u_cur: f64, u_prev: f64) -> Vec<f64> {
        let n = self.states();
        (0..n)
            .map(|i| {
                crate::linalg::dot(self.phi.row(i), x)
                    + self.gamma0[i] * u_cur
                    + self.gamma1[i] * u_prev
            })
            .collect()
    }
}

/// Discretizes `plant` with sampling period `delta` and input delay `tau`.
///
/// `Γ1` is obtained as `G(δ) - G(δ-τ)` where `G(t) = ∫_0^t e^{As} b ds`.
pub fn discretize(plant: &PlantModel, delta: f64, tau: f64) -> Result<DiscretizedPlant> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Validation(format!(
            "sampling period must be positive and finite, got {delta}"
        )));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Validation(format!(
            "delay must be non-negative and finite, got {tau}"
        )));
    }
    if tau > delta {
        return Err(Error::Feasibility(format!(
            "delay {tau} exceeds the sampling period {delta}"
        )));
    }
    let (phi, g_full) = phi_gamma(plant.a(), plant.b(), delta)?;
    let (_, gamma0) = phi_gamma(plant.a(), plant.b(), delta - tau)?;
    let gamma1: Vec<f64> = g_full
        .iter()
        .zip(gamma0.iter())
        .map(|(f, g)| f - g)
        .collect();
    let gamma1 = RealVector::new(gamma1)?;

    let scale = 1.0 + g_full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let split_err = gamma0
        .iter()
        .zip(gamma1.iter())
        .zip(g_full.iter())
        .map(|((a, b), f)| (a + b - f).abs())
        .fold(0.0, f64::max);
    if split_err > GAMMA_SPLIT_TOL * scale {
        return Err(Error::Numerical(format!(
            "Γ0 + Γ1 deviates from the full-period integral by {split_err:e}"
        )));
    }
    Ok(DiscretizedPlant {
        phi,
        gamma0,
        gamma1,
        delta,
        tau,
    })
}

/// Closed-loop matrix of the augmented state `[x(k); u(k-1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    pub phi_tilde: RealMatrix,
    pub scheme: Option<Scheme>,
    pub effective_gain: RealVector,
}

impl AugmentedSystem {
    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = Some(scheme);
        self
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        spectral_radius(&self.phi_tilde)
    }

    /// `z(k+1) = Φ̃ z(k)`.
    pub fn step(&self, z: &[f64]) -> Vec<f64> {
        (0..self.phi_tilde.rows())
            .map(|i| crate::linalg::dot(self.phi_tilde.row(i), z))
            .collect()
    }
}

/// Builds `[[Φ - Γ0 gᵀ, Γ1], [-gᵀ, 0]]` for the feedback `u(k) = -gᵀ x(k)`.
///
/// Both schemes fit this form: the over-the-air gain is `α (h ⊙ β)` and the
/// multi-hop gain is `α_a h_a (D α_s)`; see
/// [`effective_gain_air`](crate::scaling::effective_gain_air) and
/// [`effective_gain_sota`](crate::scaling::effective_gain_sota).
pub fn augment(disc: &DiscretizedPlant, g: &[f64]) -> Result<AugmentedSystem> {
    let n = disc.states();
    if g.len() != n {
        return Err(Error::Dimension(format!(
            "gain has length {} but the plant has {n} states",
            g.len()
        )));
    }
    let mut pt = RealMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            pt[(i, j)] = disc.phi[(i, j)] - disc.gamma0[i] * g[j];
        }
        pt[(i, n)] = disc.gamma1[i];
    }
    for j in 0..n {
        pt[(n, j)] = -g[j];
    }
    pt[(n, n)] = 0.0;
    Ok(AugmentedSystem {
        phi_tilde: pt,
        scheme: None,
        effective_gain: RealVector::new(g.to_vec())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat_exp, spectral_radius};
    use approx::assert_abs_diff_eq;

    const REFERENCE_GAIN: [f64; 4] = [6.67, 11.09, 41.15, 11.27];

    fn scalar_integrator() -> PlantModel {
        PlantModel::new(
            "integrator",
            RealMatrix::zeros(1, 1),
            RealVector::new(vec![1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn constant_integrand_splits_linearly() {
        let p = PlantModel::new(
            "zero",
            RealMatrix::zeros(2, 2),
            RealVector::new(vec![1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let d = discretize(&p, 1.0, 0.25).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(d.gamma0[i], 0.75, epsilon = 1e-15);
            assert_abs_diff_eq!(d.gamma1[i], 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_delay_has_no_carry_over() {
        let d = discretize(&default_ball_and_beam(), 0.05, 0.0).unwrap();
        assert!(d.gamma1.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn delay_longer_than_period_is_infeasible() {
        let err = discretize(&default_ball_and_beam(), 0.05, 0.06).unwrap_err();
        assert!(matches!(err, Error::Feasibility(_)));
        assert!(matches!(
            discretize(&default_ball_and_beam(), 0.0, 0.0),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            discretize(&default_ball_and_beam(), 0.1, -1e-3),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn open_loop_augmentation() {
        let d = discretize(&default_ball_and_beam(), 0.1, 0.03).unwrap();
        let aug = augment(&d, &[0.0; 4]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(aug.phi_tilde[(i, j)], d.phi[(i, j)]);
            }
            assert_eq!(aug.phi_tilde[(i, 4)], d.gamma1[i]);
            assert_eq!(aug.phi_tilde[(4, i)], 0.0);
        }
        let rho_phi = spectral_radius(&d.phi).unwrap();
        assert_abs_diff_eq!(
            aug.spectral_radius().unwrap(),
            rho_phi.max(0.0),
            epsilon = 1e-8
        );
    }

    #[test]
    fn scalar_closed_form() {
        let d = discretize(&scalar_integrator(), 1.0, 0.0).unwrap();
        let aug = augment(&d, &[0.5]).unwrap();
        let want = RealMatrix::from_rows(&[vec![0.5, 0.0], vec![-0.5, 0.0]]).unwrap();
        assert!(aug.phi_tilde.max_abs_diff(&want) < 1e-15);
        assert_abs_diff_eq!(aug.spectral_radius().unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn gain_length_is_checked() {
        let d = discretize(&default_ball_and_beam(), 0.1, 0.0).unwrap();
        assert!(matches!(augment(&d, &[1.0; 3]), Err(Error::Dimension(_))));
    }

    #[test]
    fn last_row_structure() {
        let d = discretize(&default_ball_and_beam(), 0.05, 0.01).unwrap();
        let aug = augment(&d, &REFERENCE_GAIN).unwrap();
        for j in 0..4 {
            assert_eq!(aug.phi_tilde[(4, j)], -REFERENCE_GAIN[j]);
        }
        assert_eq!(aug.phi_tilde[(4, 4)], 0.0);
    }

    #[test]
    fn ball_and_beam_structure() {
        let p = default_ball_and_beam();
        assert_eq!(p.states(), 4);
        let nonzero_per_row: Vec<usize> = (0..4)
            .map(|i| p.a().row(i).iter().filter(|v| **v != 0.0).count())
            .collect();
        assert_eq!(nonzero_per_row, vec![1, 1, 1, 0]);
        assert!(spectral_radius(p.a()).unwrap() < 1e-12);
        for t in [0.01, 0.3, 2.0] {
            let e = mat_exp(p.a(), t).unwrap();
            assert_abs_diff_eq!(
                e[(0, 3)],
                7.0 * t * t * t / 6.0,
                epsilon = 1e-12 * (1.0 + t * t * t)
            );
        }
    }

    #[test]
    fn reference_gain_stabilizes_at_minimum_air_period() {
        let d = discretize(&default_ball_and_beam(), 0.01, 0.01).unwrap();
        let rho = augment(&d, &REFERENCE_GAIN)
            .unwrap()
            .spectral_radius()
            .unwrap();
        assert!(rho < 1.0, "rho = {rho}");
    }

    #[test]
    fn plant_file_round_trip_and_validation() {
        let text = r#"
name = "bb"
A = [[0, 1], [0, 0]]
b = [0, 1]
labels = ["p", "v"]
"#;
        let model = PlantFile::parse(text).unwrap().into_model().unwrap();
        assert_eq!(model.states(), 2);
        assert_eq!(model.labels().unwrap()[1], "v");
        let again = toml::to_string(&model.to_file()).unwrap();
        assert_eq!(
            PlantFile::parse(&again).unwrap().into_model().unwrap(),
            model
        );

        let ragged = "name = \"x\"\nA = [[0, 1], [0]]\nb = [0, 1]\n";
        let err = PlantFile::parse(ragged).unwrap().into_model().unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");

        let bad_b = "name = \"x\"\nA = [[0]]\nb = [0, 1]\n";
        assert!(PlantFile::parse(bad_b).unwrap().into_model().is_err());

        let typo = "name = \"x\"\nA = [[0]]\nb = [1]\nlabel = [\"a\"]\n";
        let err = PlantFile::parse(typo).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }
}
