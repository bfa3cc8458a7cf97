//! Slow, independent reference computations.
//!
//! None of these share a code path with the production kernels they are used
//! to check: the exponential is a plain Taylor sum, integrals come from
//! adaptive Simpson quadrature, eigenvalue moduli from power iteration, and
//! MSEs from sampling the signal model directly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::linalg::RealMatrix;
use crate::scaling::{AirScaling, ChannelRealization, SotaScaling};

/// Truncated Taylor series of `e^{Mt}` with Kahan-compensated accumulation.
pub fn taylor_exp(m: &RealMatrix, t: f64, terms: usize) -> RealMatrix {
    let n = m.rows();
    let mt = m.scaled(t);
    let mut sum = RealMatrix::identity(n);
    let mut comp = RealMatrix::zeros(n, n);
    let mut term = RealMatrix::identity(n);
    for j in 1..terms {
        term = term.matmul(&mt).expect("square").scaled(1.0 / j as f64);
        for r in 0..n {
            for c in 0..n {
                let y = term[(r, c)] - comp[(r, c)];
                let s = sum[(r, c)] + y;
                comp[(r, c)] = (s - sum[(r, c)]) - y;
                sum[(r, c)] = s;
            }
        }
    }
    sum
}

/// Adaptive Simpson quadrature of a vector-valued integrand on `[a, b]`.
///
/// Refines until the Richardson estimate of the max-norm error is below
/// `tol` on each panel (tolerance split between halves).
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, &fa, &fm, &fb);
    simpson_rec(f, a, b, &fa, &fm, &fb, whole, tol, 50)
}

fn simpson(a: f64, b: f64, fa: &[f64], fm: &[f64], fb: &[f64]) -> Vec<f64> {
    let h = (b - a) / 6.0;
    fa.iter()
        .zip(fm)
        .zip(fb)
        .map(|((x, y), z)| h * (x + 4.0 * y + z))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: &[f64],
    fm: &[f64],
    fb: &[f64],
    whole: Vec<f64>,
    tol: f64,
    depth: usize,
) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, &flm, fm);
    let right = simpson(m, b, fm, &frm, fb);
    let err = left
        .iter()
        .zip(&right)
        .zip(&whole)
        .map(|((l, r), w)| (l + r - w).abs())
        .fold(0.0, f64::max);
    if depth == 0 || err <= 15.0 * tol {
        return left
            .iter()
            .zip(&right)
            .zip(&whole)
            .map(|((l, r), w)| l + r + (l + r - w) / 15.0)
            .collect();
    }
    let l = simpson_rec(f, a, m, fa, &flm, fm, left, tol / 2.0, depth - 1);
    let r = simpson_rec(f, m, b, fm, &frm, fb, right, tol / 2.0, depth - 1);
    l.iter().zip(&r).map(|(x, y)| x + y).collect()
}

/// `∫_lo^hi e^{As} b ds` by adaptive Simpson over a Taylor-series integrand.
pub fn quadrature_input_integral(
    a: &RealMatrix,
    b: &[f64],
    lo: f64,
    hi: f64,
    tol: f64,
) -> Vec<f64> {
    if hi <= lo {
        return vec![0.0; b.len()];
    }
    let integrand = |s: f64| taylor_exp(a, s, 40).mul_vec(b).expect("dims");
    adaptive_simpson(&integrand, lo, hi, tol)
}

/// Fourth-order Runge–Kutta for `ẋ = Ax + bu` with `u` piecewise constant:
/// `u_prev` on `[0, τ)` and `u_cur` on `[τ, δ)`.
pub fn rk4_period(
    a: &RealMatrix,
    b: &[f64],
    x: &[f64],
    delta: f64,
    tau: f64,
    u_prev: f64,
    u_cur: f64,
    steps_per_period: usize,
) -> Vec<f64> {
    let deriv = |x: &[f64], u: f64| -> Vec<f64> {
        let ax = a.mul_vec(x).expect("dims");
        ax.iter().zip(b).map(|(v, bi)| v + bi * u).collect()
    };
    let axpy = |x: &[f64], c: f64, d: &[f64]| -> Vec<f64> {
        x.iter().zip(d).map(|(x, d)| x + c * d).collect()
    };
    let mut state = x.to_vec();
    let integrate = |t0: f64, t1: f64, u: f64, state: &mut Vec<f64>| {
        let span = t1 - t0;
        if span <= 0.0 {
            return;
        }
        let n = ((span / delta) * steps_per_period as f64).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for _ in 0..n {
            let k1 = deriv(state, u);
            let k2 = deriv(&axpy(state, h / 2.0, &k1), u);
            let k3 = deriv(&axpy(state, h / 2.0, &k2), u);
            let k4 = deriv(&axpy(state, h, &k3), u);
            for i in 0..state.len() {
                state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    };
    integrate(0.0, tau, u_prev, &mut state);
    integrate(tau, delta, u_cur, &mut state);
    state
}

/// Spectral-radius estimate by power iteration.
///
/// After `steps` normalized iterations from a fixed pseudo-random start,
/// the last three iterates are fitted to `x₊₂ + c₁x₊₁ + c₀x = 0`. If the
/// iterates are collinear the dominant eigenvalue is real and its modulus is
/// the one-step growth; otherwise it is a complex pair with modulus `√c₀`.
pub fn power_iteration_radius(m: &RealMatrix, steps: usize, seed: u64) -> f64 {
    let n = m.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for _ in 0..steps {
        let y = m.mul_vec(&x).expect("dims");
        let s = norm(&y);
        if s == 0.0 {
            return 0.0;
        }
        x = y.iter().map(|v| v / s).collect();
    }
    let x1 = m.mul_vec(&x).expect("dims");
    let x2 = m.mul_vec(&x1).expect("dims");
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    // collinearity of x1 with x (unit vector)
    let proj = dot(&x1, &x);
    let resid: f64 = x1
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - proj * b).powi(2))
        .sum::<f64>()
        .sqrt();
    if resid <= 1e-9 * norm(&x1).max(f64::MIN_POSITIVE) {
        return proj.abs();
    }
    // least squares for [x1 x] [c1 c0]^T = -x2
    let a11 = dot(&x1, &x1);
    let a12 = dot(&x1, &x);
    let a22 = dot(&x, &x);
    let b1 = -dot(&x1, &x2);
    let b2 = -dot(&x, &x2);
    let det = a11 * a22 - a12 * a12;
    let c1 = (b1 * a22 - b2 * a12) / det;
    let c0 = (a11 * b2 - a12 * b1) / det;
    let disc = c1 * c1 - 4.0 * c0;
    if disc < 0.0 {
        c0.abs().sqrt()
    } else {
        let s = disc.sqrt();
        ((-c1 + s) / 2.0).abs().max(((-c1 - s) / 2.0).abs())
    }
}

/// Average per-step growth of `‖z‖` under `z ← Mz` over the second half of
/// `steps` iterations from a pseudo-random start. Below one means the
/// iteration decays.
pub fn iteration_growth_rate(m: &RealMatrix, steps: usize, seed: u64) -> f64 {
    let n = m.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let half = steps / 2;
    let mut log_growth = 0.0;
    for k in 0..steps {
        let y = m.mul_vec(&z).expect("dims");
        let s = norm(&y);
        let prev = norm(&z);
        if s == 0.0 {
            return 0.0;
        }
        if k >= half {
            log_growth += (s / prev).ln();
        }
        z = y.iter().map(|v| v / s).collect();
    }
    (log_growth / (steps - half) as f64).exp()
}

/// Sample mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Distance from `value` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (value - self.mean).abs() / self.stderr
    }
}

const CHUNK: usize = 1 << 14;

fn sample_squared_errors<F>(samples: usize, seed: u64, draw: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let count = CHUNK.min(samples - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let e = draw(&mut rng);
                let e2 = e * e;
                s += e2;
                s2 += e2 * e2;
            }
            (s, s2, count)
        })
        .collect();
    let (s, s2, n) = partial.iter().fold((0.0, 0.0, 0usize), |acc, p| {
        (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2)
    });
    let n = n as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Estimate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

/// Empirical `E|α((h ⊙ β)ᵀx + n) - kᵀx|²` with `x ~ N(0, I)`, `n ~ N(0, σ²)`.
pub fn empirical_mse_air(
    s: &AirScaling,
    ch: &ChannelRealization,
    k: &[f64],
    samples: usize,
    seed: u64,
) -> Estimate {
    let sigma = ch.sigma2.sqrt();
    sample_squared_errors(samples, seed, |rng| {
        let mut received = 0.0;
        let mut target = 0.0;
        for i in 0..k.len() {
            let x: f64 = rng.sample(StandardNormal);
            received += ch.h[i] * s.beta[i] * x;
            target += k[i] * x;
        }
        let n: f64 = rng.sample(StandardNormal);
        s.alpha * (received + sigma * n) - target
    })
}

/// Empirical `E|α_a(h_a α_sᵀ(Dx + n_s) + n_a) - kᵀx|²`.
pub fn empirical_mse_sota(
    s: &SotaScaling,
    ch: &ChannelRealization,
    k: &[f64],
    samples: usize,
    seed: u64,
) -> Estimate {
    let sigma_s = ch.sigma_s2.sqrt();
    let sigma_a = ch.sigma_a2.sqrt();
    sample_squared_errors(samples, seed, |rng| {
        let mut controller = 0.0;
        let mut target = 0.0;
        for i in 0..k.len() {
            let x: f64 = rng.sample(StandardNormal);
            let ns: f64 = rng.sample(StandardNormal);
            controller += s.alpha_s[i] * (ch.h[i] * s.beta[i] * x + sigma_s * ns);
            target += k[i] * x;
        }
        let na: f64 = rng.sample(StandardNormal);
        s.alpha_a * (ch.h_a * controller + sigma_a * na) - target
    })
}

/// Over-the-air MSE for a given `α` with clipped-inversion amplitudes,
/// written out from the signal model rather than shared with the optimizer.
fn air_mse_at(alpha: f64, ch: &ChannelRealization, k: &[f64]) -> f64 {
    let amp = ch.p_bar.sqrt();
    let mut total = ch.sigma2 * alpha * alpha;
    for i in 0..k.len() {
        let beta = if k[i] == 0.0 || alpha == 0.0 {
            0.0
        } else {
            (k[i] / (alpha * ch.h[i])).min(amp)
        };
        let e = alpha * ch.h[i] * beta - k[i];
        total += e * e;
    }
    total
}

/// Smallest over-the-air MSE over a log-spaced `α` grid.
///
/// The grid spans three decades below the smallest to one decade above the
/// largest saturation breakpoint with `points_per_sensor * N` points, and
/// includes every breakpoint itself. Returns `(best α, best MSE)`.
pub fn air_grid_minimum(
    ch: &ChannelRealization,
    k: &[f64],
    points_per_sensor: usize,
) -> (f64, f64) {
    let amp = ch.p_bar.sqrt();
    let bps: Vec<f64> = k
        .iter()
        .zip(ch.h.iter())
        .filter(|(k, _)| **k > 0.0)
        .map(|(k, h)| k / (h * amp))
        .collect();
    if bps.is_empty() {
        return (0.0, air_mse_at(0.0, ch, k));
    }
    let lo = bps.iter().cloned().fold(f64::INFINITY, f64::min) * 1e-3;
    let hi = bps.iter().cloned().fold(0.0, f64::max) * 10.0;
    let count = points_per_sensor * k.len();
    let mut best = (0.0, air_mse_at(0.0, ch, k));
    let ratio = (hi / lo).ln() / (count - 1).max(1) as f64;
    let candidates = (0..count).map(|i| lo * (ratio * i as f64).exp()).chain(bps);
    for a in candidates {
        let v = air_mse_at(a, ch, k);
        if v < best.1 {
            best = (a, v);
        }
    }
    best
}

/// Minimizer of the multi-hop MSE over `α_a` on a uniform grid of `points`
/// values in `[lo, hi]`, holding `β` and `α_s` fixed. Returns
/// `(best α_a, best MSE, grid spacing)`.
pub fn sota_alpha_a_grid_minimum(
    s: &SotaScaling,
    ch: &ChannelRealization,
    k: &[f64],
    lo: f64,
    hi: f64,
    points: usize,
) -> (f64, f64, f64) {
    let spacing = (hi - lo) / (points - 1) as f64;
    let mse = |aa: f64| {
        let mut total = aa * aa * ch.sigma_a2;
        for i in 0..k.len() {
            let g = aa * ch.h_a * ch.h[i] * s.beta[i] * s.alpha_s[i];
            total += (g - k[i]).powi(2);
            total += aa * aa * ch.h_a * ch.h_a * ch.sigma_s2 * s.alpha_s[i] * s.alpha_s[i];
        }
        total
    };
    let mut best = (lo, mse(lo));
    for i in 1..points {
        let aa = lo + spacing * i as f64;
        let v = mse(aa);
        if v < best.1 {
            best = (aa, v);
        }
    }
    (best.0, best.1, spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RealVector;

    #[test]
    fn taylor_matches_scalar_exponential() {
        let m = RealMatrix::diag(&[0.3, -1.2]);
        let e = taylor_exp(&m, 2.0, 50);
        assert!((e[(0, 0)] - 0.6f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - (-2.4f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn simpson_integrates_polynomials() {
        let f = |s: f64| vec![s * s * s, 1.0];
        let v = adaptive_simpson(&f, 0.0, 2.0, 1e-12);
        assert!((v[0] - 4.0).abs() < 1e-12);
        assert!((v[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_on_rotation_and_diagonal() {
        let rot = RealMatrix::from_rows(&[vec![0.0, -0.8], vec![0.8, 0.0]]).unwrap();
        assert!((power_iteration_radius(&rot, 100, 1) - 0.8).abs() < 1e-12);
        let d = RealMatrix::diag(&[0.2, -0.9, 0.5]);
        assert!((power_iteration_radius(&d, 2000, 1) - 0.9).abs() < 1e-9);
    }

    #[test]
    fn growth_rate_tracks_radius() {
        let d = RealMatrix::diag(&[0.2, 0.95]);
        assert!((iteration_growth_rate(&d, 1000, 3) - 0.95).abs() < 1e-9);
    }

    #[test]
    fn empirical_mse_of_pure_noise() {
        let ch = ChannelRealization::with_common_noise(
            RealVector::new(vec![1.0]).unwrap(),
            1.0,
            0.25,
            1.0,
        )
        .unwrap();
        let s = AirScaling {
            beta: RealVector::new(vec![1.0]).unwrap(),
            alpha: 2.0,
        };
        // α h β = 2 = k, so the error is α n with variance 4 * 0.25 = 1
        let est = empirical_mse_air(&s, &ch, &[2.0], 200_000, 9);
        assert!(est.z_score(1.0) < 4.0, "{est:?}");
    }
}
