mod common;

use std::sync::Arc;

use proptest::prelude::*;

use sandwich_core::noise::{
    covariance_matrix, holder_estimate, mbm_covariance, restrict_to_coarse, GaussianDriverSpec, HolderMode,
    HurstFn, NoiseGenerator, NoiseMethod, NoiseMethodChoice, TimeGrid,
};
use sandwich_core::Error;

fn grid(n: usize) -> TimeGrid {
    TimeGrid::new(1.0, n).unwrap()
}

fn driver(kind: u8, h: f64) -> GaussianDriverSpec {
    match kind {
        0 => GaussianDriverSpec::brownian(),
        1 => GaussianDriverSpec::fbm(h).unwrap(),
        _ => GaussianDriverSpec::mbm(HurstFn::SinShift {
            offset: h,
            amplitude: 0.05,
            frequency: 3.0,
        }),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn same_seed_same_path(kind in 0u8..3, h in 0.2f64..0.8, n in 2usize..200, seed: u64) {
        let g = grid(n);
        let spec = driver(kind, h);
        let a = NoiseGenerator::new(&spec, &g, NoiseMethodChoice::Auto).unwrap().sample(seed);
        let b = NoiseGenerator::new(&spec, &g, NoiseMethodChoice::Auto).unwrap().sample(seed);
        prop_assert_eq!(&a.values, &b.values);
        prop_assert_eq!(a.values[0], 0.0);
        prop_assert_eq!(a.values.len(), n + 1);
    }

    #[test]
    fn holder_constant_grows_with_lambda(h in 0.2f64..0.9, n in 2usize..300, seed: u64, l1 in 0.05f64..0.95, l2 in 0.05f64..0.95) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let g = grid(n);
        let p = NoiseGenerator::new(&driver(1, h), &g, NoiseMethodChoice::Auto).unwrap().sample(seed);
        for mode in [HolderMode::Exact, HolderMode::Dyadic] {
            let a = holder_estimate(&p.values, g.delta(), lo, Some(mode)).value;
            let b = holder_estimate(&p.values, g.delta(), hi, Some(mode)).value;
            prop_assert!(b >= a, "{mode:?}: Λ̂({hi}) = {b} < Λ̂({lo}) = {a}");
        }
    }

    #[test]
    fn restriction_composes(a in 1usize..6, b in 1usize..6, m in 1usize..10, seed: u64) {
        let n = a * b * m;
        let p = NoiseGenerator::new(&driver(1, 0.7), &grid(n), NoiseMethodChoice::Auto).unwrap().sample(seed);
        let twice = restrict_to_coarse(&restrict_to_coarse(&p, a).unwrap(), b).unwrap();
        let once = restrict_to_coarse(&p, a * b).unwrap();
        prop_assert_eq!(&twice.values, &once.values);
        prop_assert_eq!(twice.grid, once.grid);
        for (k, v) in once.values.iter().enumerate() {
            prop_assert_eq!(*v, p.values[k * a * b]);
        }
    }

    #[test]
    fn mbm_covariance_is_symmetric(h1 in 0.05f64..0.95, h2 in 0.05f64..0.95, s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let a = mbm_covariance(s, t, h1, h2).unwrap();
        let b = mbm_covariance(t, s, h2, h1).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
    }
}

#[test]
fn mbm_with_constant_hurst_is_fbm() {
    let g = grid(128);
    for h in [0.3, 0.7] {
        let a = covariance_matrix(&GaussianDriverSpec::mbm(HurstFn::constant(h)), &g).unwrap();
        let b = covariance_matrix(&GaussianDriverSpec::fbm(h).unwrap(), &g).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn auto_method_choice() {
    let g = grid(64);
    let m = |spec: &GaussianDriverSpec| NoiseGenerator::new(spec, &g, NoiseMethodChoice::Auto).unwrap().method();
    assert_eq!(m(&GaussianDriverSpec::brownian()), NoiseMethod::Increments);
    assert_eq!(m(&GaussianDriverSpec::fbm(0.7).unwrap()), NoiseMethod::Circulant);
    assert_eq!(m(&common::mbm_driver()), NoiseMethod::Cholesky);
}

#[test]
fn indefinite_covariance_is_reported() {
    // a covariance with negative variances cannot be factored at any jitter
    let cov = Arc::new(|s: f64, t: f64| if s == t { -1.0 } else { 0.0 });
    let spec = GaussianDriverSpec::custom("bad", cov, 0.4).unwrap();
    match NoiseGenerator::new(&spec, &grid(16), NoiseMethodChoice::Auto) {
        Err(Error::Cholesky { attempts, min_eigenvalue }) => {
            assert_eq!(attempts, 10);
            assert!(min_eigenvalue.unwrap() < 0.0);
        }
        Err(other) => panic!("{other}"),
        Ok(_) => panic!("an indefinite covariance was factored"),
    }
}

#[test]
fn circulant_is_refused_for_mbm() {
    assert!(NoiseGenerator::new(&common::mbm_driver(), &grid(32), NoiseMethodChoice::Circulant).is_err());
}
