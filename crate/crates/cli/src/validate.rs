//! Fast self-check of the numerical kernels against independent oracles.

use aircont_core::linalg::{
    eigenvalues, mat_exp, phi_gamma, spectral_radius, RealMatrix, RealVector,
};
use aircont_core::oracle::{
    air_grid_minimum, empirical_mse_air, empirical_mse_sota, power_iteration_radius,
    quadrature_input_integral, sota_alpha_a_grid_minimum, taylor_exp,
};
use aircont_core::scaling::{
    mse_air, mse_sota, optimize_air_scaling, optimize_sota_scaling, AirScaling, ChannelRealization,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deliberate faults for testing that the checks can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Faults {
    /// Relative error added to every closed-form over-the-air MSE.
    pub mse_air_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

const EMPIRICAL_SAMPLES: usize = 1_000_000;
/// Closed form vs sample mean, in standard errors.
const Z_LIMIT: f64 = 3.5;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, bound: f64) -> RealMatrix {
    RealMatrix::from_row_major(
        n,
        n,
        (0..n * n).map(|_| rng.gen_range(-bound..bound)).collect(),
    )
    .expect("finite entries")
}

fn random_channel(rng: &mut ChaCha8Rng, n: usize) -> (ChannelRealization, Vec<f64>) {
    let h: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
    let k: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
    let ch = ChannelRealization::new(
        RealVector::new(h).expect("finite"),
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.05..1.0),
        rng.gen_range(0.05..1.0),
        rng.gen_range(0.05..1.0),
        rng.gen_range(0.5..5.0),
    )
    .expect("valid channel");
    (ch, k)
}

fn check(name: &'static str, worst: f64, limit: f64, unit: &str) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= limit,
        detail: format!("worst {worst:.3e}{unit} (limit {limit:.1e}{unit})"),
    }
}

fn exp_vs_taylor(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let m = random_matrix(rng, 4, 1.0);
        let e = mat_exp(&m, 0.5).expect("exp");
        worst = worst.max(e.max_abs_diff(&taylor_exp(&m, 0.5, 50)));
    }
    check("matrix exponential vs Taylor series", worst, 1e-9, "")
}

fn input_integral_vs_quadrature(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let m = random_matrix(rng, 4, 1.0);
        let b: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = rng.gen_range(0.01..0.3);
        let (_, g) = phi_gamma(&m, &b, t).expect("phi_gamma");
        let q = quadrature_input_integral(&m, &b, 0.0, t, 1e-13);
        for (x, y) in g.iter().zip(&q) {
            worst = worst.max((x - y).abs());
        }
    }
    check("input integral vs quadrature", worst, 1e-9, "")
}

fn radius_vs_power_iteration(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 20 {
        let m = random_matrix(rng, 5, 1.0);
        let mut mods: Vec<f64> = eigenvalues(&m)
            .expect("eigenvalues")
            .iter()
            .map(|(r, i)| r.hypot(*i))
            .collect();
        mods.sort_by(|a, b| b.total_cmp(a));
        let top = mods[0];
        // power iteration converges only with a clear modulus gap
        if mods
            .iter()
            .any(|&v| (v - top).abs() > 1e-9 * top && v > 0.8 * top)
        {
            continue;
        }
        let rho = spectral_radius(&m).expect("radius");
        worst = worst.max((rho - power_iteration_radius(&m, 400, checked)).abs());
        checked += 1;
    }
    check("spectral radius vs power iteration", worst, 1e-6, "")
}

fn air_optimizer_vs_grid(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let n = rng.gen_range(1..=10);
        let (ch, k) = random_channel(rng, n);
        let s = optimize_air_scaling(&ch, &k).expect("air optimizer");
        let got = mse_air(&s, &ch, &k).expect("mse");
        let (_, grid) = air_grid_minimum(&ch, &k, 200);
        worst = worst.max(got - grid);
    }
    check("air optimizer vs grid search", worst, 1e-6, " excess MSE")
}

fn sota_optimizer_vs_grid(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (ch, k) = random_channel(rng, 6);
        let s = optimize_sota_scaling(&ch, &k).expect("sota optimizer");
        let hi = 3.0 * s.alpha_a.max(1e-3);
        let (best, _, spacing) = sota_alpha_a_grid_minimum(&s, &ch, &k, 0.0, hi, 10_000);
        worst = worst.max((best - s.alpha_a).abs() / spacing);
    }
    check(
        "multi-hop actuator gain vs grid search",
        worst,
        1.0,
        " grid steps",
    )
}

fn mse_air_vs_sampling(rng: &mut ChaCha8Rng, faults: &Faults) -> CheckResult {
    let mut worst = 0.0f64;
    for i in 0..3 {
        let (ch, k) = random_channel(rng, 10);
        let amp = ch.p_bar.sqrt();
        let s = AirScaling {
            beta: RealVector::new((0..10).map(|_| rng.gen_range(0.0..amp)).collect())
                .expect("finite"),
            alpha: rng.gen_range(0.5..5.0),
        };
        let closed = mse_air(&s, &ch, &k).expect("mse") * (1.0 + faults.mse_air_scale);
        let est = empirical_mse_air(&s, &ch, &k, EMPIRICAL_SAMPLES, rng.gen::<u64>() ^ i);
        worst = worst.max(est.z_score(closed));
    }
    check("air MSE closed form vs sampling", worst, Z_LIMIT, " SE")
}

fn mse_sota_vs_sampling(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for i in 0..3 {
        let (ch, k) = random_channel(rng, 10);
        let s = optimize_sota_scaling(&ch, &k).expect("sota optimizer");
        let closed = mse_sota(&s, &ch, &k).expect("mse");
        let est = empirical_mse_sota(&s, &ch, &k, EMPIRICAL_SAMPLES, rng.gen::<u64>() ^ i);
        worst = worst.max(est.z_score(closed));
    }
    check(
        "multi-hop MSE closed form vs sampling",
        worst,
        Z_LIMIT,
        " SE",
    )
}

/// Runs every check; each draws its instances from its own seeded stream.
pub fn run_checks(seed: u64, faults: &Faults) -> Vec<CheckResult> {
    let stream = |i: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(i);
        r
    };
    vec![
        exp_vs_taylor(&mut stream(1)),
        input_integral_vs_quadrature(&mut stream(2)),
        radius_vs_power_iteration(&mut stream(3)),
        air_optimizer_vs_grid(&mut stream(4)),
        sota_optimizer_vs_grid(&mut stream(5)),
        mse_air_vs_sampling(&mut stream(6), faults),
        mse_sota_vs_sampling(&mut stream(7)),
    ]
}
