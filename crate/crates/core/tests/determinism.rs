// SPDX-License-Identifier: MIT OR Apache-2.0

use energy_cp::simgen::{Scenario, generate};
use energy_cp::{DivisiveConfig, RandomStream, e_divisive};

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn divisive_result_ignores_worker_count() {
    let sim = generate(&Scenario::UnivariateExample, &RandomStream::new(3)).unwrap();
    let cfg = DivisiveConfig {
        seed: 17,
        ..Default::default()
    };
    let reference = with_threads(1, || e_divisive(&sim.series, &cfg).unwrap());
    for n in [2, 3, 8] {
        assert_eq!(
            with_threads(n, || e_divisive(&sim.series, &cfg).unwrap()),
            reference
        );
    }
    assert!(reference.p_values.len() >= 2);
}

#[test]
fn generation_is_reproducible() {
    for sc in [
        Scenario::covariance_example(),
        Scenario::tail_example(),
        Scenario::stpp_example(),
    ] {
        let a = generate(&sc, &RandomStream::new(5)).unwrap();
        let b = with_threads(4, || generate(&sc, &RandomStream::new(5)).unwrap());
        assert_eq!(a.series, b.series);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.times, b.times);
    }
}
