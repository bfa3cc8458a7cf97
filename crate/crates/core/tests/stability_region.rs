use aircont_core::linalg::{RealMatrix, RealVector};
use aircont_core::oracle::iteration_growth_rate;
use aircont_core::plant::{augment, default_ball_and_beam, discretize, PlantModel};
use aircont_core::stability::{
    area_ratio, region_area, sweep_stability, NetworkTiming, Region, StabilityGridSpec,
    REFERENCE_GAIN,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference_spec() -> StabilityGridSpec {
    StabilityGridSpec::default_for(
        default_ball_and_beam(),
        RealVector::new(REFERENCE_GAIN.to_vec()).unwrap(),
        NetworkTiming::new(0.01, 4).unwrap(),
    )
}

#[test]
fn default_grid_regions_are_nested() {
    let cells = sweep_stability(&reference_spec()).unwrap();
    assert_eq!(cells.len(), 60 * 50);
    for c in &cells {
        assert!(!c.achievable_sota || c.achievable_air);
        assert!(!c.achievable_air || c.max_stable);
        if c.achievable_sota {
            assert!(c.delta >= 0.05 - 1e-12);
        }
        if c.achievable_air {
            assert!(c.delta >= 0.01 - 1e-12);
        }
    }
    let ratio = area_ratio(&cells).unwrap().unwrap();
    assert!(ratio >= 3.0, "ratio {ratio}");
    let max = region_area(&cells, Region::MaxStable).unwrap();
    assert!(
        max.cell_count
            >= region_area(&cells, Region::AchievableAir)
                .unwrap()
                .cell_count
    );
}

#[test]
fn stable_flags_agree_with_iteration_decay() {
    let spec = reference_spec();
    let cells = sweep_stability(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    for c in cells.choose_multiple(&mut rng, 400) {
        // growth-rate estimates cannot resolve the boundary itself
        if (c.rho - 1.0).abs() < 1e-3 {
            continue;
        }
        let d = discretize(&spec.plant, c.delta, c.tau).unwrap();
        let m = augment(&d, &spec.effective_gain).unwrap().phi_tilde;
        let growth = iteration_growth_rate(&m, 10_000, checked as u64);
        assert_eq!(growth < 1.0, c.max_stable, "cell {c:?}: growth {growth}");
        checked += 1;
        if checked == 100 {
            break;
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn reference_cells_decay_under_iteration() {
    let plant = default_ball_and_beam();
    let d = discretize(&plant, 0.05, 0.01).unwrap();
    let sys = augment(&d, &REFERENCE_GAIN).unwrap();
    assert!(sys.spectral_radius().unwrap() < 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut z: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut steps = 0;
    while z.iter().map(|v| v * v).sum::<f64>().sqrt() >= 1e-6 {
        z = sys.step(&z);
        steps += 1;
        assert!(steps < 10_000);
    }
}

#[test]
fn open_loop_unstable_plant_has_no_stable_cells() {
    let plant = PlantModel::new(
        "unstable",
        RealMatrix::diag(&[1.0, -0.5]),
        RealVector::new(vec![1.0, 1.0]).unwrap(),
    )
    .unwrap();
    let mut spec = StabilityGridSpec::default_for(
        plant,
        RealVector::zeros(2),
        NetworkTiming::new(0.01, 2).unwrap(),
    );
    spec.delta_steps = 10;
    spec.ratio_steps = 5;
    let cells = sweep_stability(&spec).unwrap();
    assert_eq!(
        region_area(&cells, Region::MaxStable).unwrap().cell_count,
        0
    );
    assert_eq!(area_ratio(&cells).unwrap(), None);
}

#[test]
fn scalar_plant_single_cell() {
    let plant = PlantModel::new(
        "integrator",
        RealMatrix::zeros(1, 1),
        RealVector::new(vec![1.0]).unwrap(),
    )
    .unwrap();
    let spec = StabilityGridSpec {
        delta_min: 1.0,
        delta_max: 1.0,
        delta_steps: 1,
        ratio_min: 0.0,
        ratio_max: 0.0,
        ratio_steps: 1,
        effective_gain: RealVector::new(vec![0.5]).unwrap(),
        plant,
        timing: NetworkTiming::new(0.1, 1).unwrap(),
        margin: 0.0,
    };
    let cells = sweep_stability(&spec).unwrap();
    assert_eq!(cells.len(), 1);
    assert!((cells[0].rho - 0.5).abs() < 1e-12);
    assert!(cells[0].max_stable);
    // τ = 0 is below either scheme's minimum delay
    assert!(!cells[0].achievable_air && !cells[0].achievable_sota);
}

#[test]
fn air_region_dominates_on_random_plants() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let n = rng.gen_range(2..=4);
        let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let plant = PlantModel::new(
            "random",
            RealMatrix::from_row_major(n, n, a).unwrap(),
            RealVector::new(b).unwrap(),
        )
        .unwrap();
        let mut spec = StabilityGridSpec::default_for(
            plant,
            RealVector::new(g).unwrap(),
            NetworkTiming::new(0.01, n).unwrap(),
        );
        spec.delta_steps = 15;
        spec.ratio_steps = 10;
        let cells = sweep_stability(&spec).unwrap();
        let air = region_area(&cells, Region::AchievableAir).unwrap();
        let sota = region_area(&cells, Region::AchievableSota).unwrap();
        assert!(air.cell_count >= sota.cell_count);
    }
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let mut spec = reference_spec();
    spec.delta_steps = 12;
    spec.ratio_steps = 9;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sweep_stability(&spec).unwrap())
    };
    assert_eq!(run(1), run(4));
}
