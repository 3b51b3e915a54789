mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sandwich_core::analysis::{collect_samples, run_convergence_study, ConvergenceStudySpec, StudySamples};
use sandwich_core::model::SandwichConfig;
use sandwich_core::noise::{restrict_to_coarse, GaussianDriverSpec, NoiseGenerator, NoiseMethodChoice};
use sandwich_core::solver::{simulate, SimulateOptions};

fn spec(config: SandwichConfig, paths: usize, r: f64) -> ConvergenceStudySpec {
    ConvergenceStudySpec {
        config,
        noise: GaussianDriverSpec::fbm(0.7).unwrap(),
        noise_method: NoiseMethodChoice::Auto,
        mesh_list: vec![16, 32, 64, 128],
        reference_n: 2048,
        paths,
        r,
        seed_base: 500,
        options: SimulateOptions::default(),
    }
}

fn cir() -> SandwichConfig {
    common::cir(1.0, 1.0, 1.0, 0.69, 1.0, 16)
}

fn tsb() -> SandwichConfig {
    common::tsb(0.5, 0.5, 0.0, 0.69, 0.0, 16)
}

fn means(s: &StudySamples) -> Vec<f64> {
    s.summarize(1.0).per_mesh.iter().map(|m| m.mean_err).collect()
}

#[test]
fn bootstrap_means_are_mostly_monotone() {
    let samples = collect_samples(&spec(tsb(), 40, 1.0)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let rounds = 200;
    let monotone = (0..rounds)
        .filter(|_| {
            let idx: Vec<usize> = (0..samples.samples.len()).map(|_| rng.random_range(0..samples.samples.len())).collect();
            means(&samples.resample(&idx)).windows(2).all(|w| w[1] <= w[0])
        })
        .count();
    assert!(monotone * 10 >= rounds * 9, "only {monotone}/{rounds} resamples are monotone");
}

#[test]
fn coarse_paths_use_the_restricted_reference_noise() {
    let s = spec(cir(), 3, 1.0);
    let samples = collect_samples(&s).unwrap();
    let fine = s.config.with_grid_points(s.reference_n).unwrap();
    let gen = NoiseGenerator::new(&s.noise, &fine.grid(), s.noise_method).unwrap();
    for sample in &samples.samples {
        let noise = gen.sample(sample.seed);
        let reference = simulate(&fine, &noise, &s.options).unwrap();
        for (j, &n) in s.mesh_list.iter().enumerate() {
            let stride = s.reference_n / n;
            let cfg = s.config.with_grid_points(n).unwrap();
            let coarse = simulate(&cfg, &restrict_to_coarse(&noise, stride).unwrap(), &s.options).unwrap();
            // the coarse path is held constant between its grid points
            let sup = (0..=s.reference_n)
                .map(|i| (coarse.values[i / stride] - reference.values[i]).abs())
                .fold(0.0, f64::max);
            assert_eq!(sup, sample.sup_errors[j], "seed {} N={n}", sample.seed);
        }
    }
}

#[test]
fn slope_is_stable_across_moment_orders() {
    let s = collect_samples(&spec(cir(), 30, 1.0)).unwrap();
    let (a, b) = (s.summarize(1.0), s.summarize(2.0));
    assert!(a.slope > 0.0 && b.slope > 0.0, "{} {}", a.slope, b.slope);
    let joint = a.slope_stderr.unwrap().hypot(b.slope_stderr.unwrap());
    assert!((a.slope - b.slope).abs() <= 3.0 * joint, "r=1: {} r=2: {} (se {joint})", a.slope, b.slope);
}

#[test]
fn studies_are_reproducible() {
    let a = run_convergence_study(&spec(tsb(), 12, 1.0)).unwrap();
    let b = run_convergence_study(&spec(tsb(), 12, 1.0)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.paths, 12);
    assert_eq!(a.per_mesh.len(), 4);
    assert!((a.lambda_expected - 0.69).abs() < 1e-15);
}

#[test]
fn resampling_the_identity_changes_nothing() {
    let s = collect_samples(&spec(cir(), 6, 1.0)).unwrap();
    let idx: Vec<usize> = (0..6).collect();
    assert_eq!(s.resample(&idx), s);
}

#[test]
fn bad_study_specs_are_refused() {
    let mut s = spec(cir(), 2, 1.0);
    s.mesh_list = vec![16, 48];
    assert!(matches!(
        collect_samples(&s),
        Err(sandwich_core::Error::NotNested { coarse: 48, fine: 2048 })
    ));
    let mut s = spec(cir(), 2, 1.0);
    s.reference_n = 512;
    assert!(collect_samples(&s).is_err());
    let mut s = spec(cir(), 2, 0.5);
    s.r = 0.5;
    assert!(collect_samples(&s).is_err());
    assert!(collect_samples(&spec(cir(), 0, 1.0)).is_err());
}
