// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo checks of the population behaviour of the sample divergence.

use energy_cp::energy::e_hat_u;
use energy_cp::{Alpha, AlphaDistanceMatrix, RandomStream, TimeSeries};
use rand_distr::{Distribution, Normal};

fn two_samples(seed: u64, shift: f64, n: usize, alpha: Alpha) -> AlphaDistanceMatrix {
    let mut rng = RandomStream::new(seed).rng();
    let z = Normal::new(0.0, 1.0).unwrap();
    let values: Vec<f64> = (0..2 * n)
        .map(|i| z.sample(&mut rng) + if i >= n { shift } else { 0.0 })
        .collect();
    AlphaDistanceMatrix::new(&TimeSeries::from_column(&values).unwrap(), alpha)
}

#[test]
fn identical_distributions_give_vanishing_divergence() {
    let n = 2000;
    let d = two_samples(11, 0.0, n, Alpha::ONE);
    let a: Vec<usize> = (0..n).collect();
    let b: Vec<usize> = (n..2 * n).collect();
    let e = e_hat_u(&d, &a, &b).unwrap();
    assert!(e.abs() < 0.05, "divergence {e}");
}

#[test]
fn squared_distance_sees_only_the_mean_shift() {
    let n = 2000;
    let a: Vec<usize> = (0..n).collect();
    let b: Vec<usize> = (n..2 * n).collect();
    for seed in 0..10 {
        let d = two_samples(100 + seed, 2.0, n, Alpha::new(2.0).unwrap());
        let e = e_hat_u(&d, &a, &b).unwrap();
        assert!((7.5..=8.5).contains(&e), "seed {seed}: divergence {e}");
    }
}
