mod common;

use benjamin_core::semidiscrete::rhs;
use benjamin_core::ModelParams;
use common::oracle::{random_field, rhs_direct};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_diff(params: &ModelParams, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_field(&mut rng, n, params.domain_scale());
    let fast = rhs(params, &u).unwrap();
    fast.coeffs()
        .iter()
        .zip(rhs_direct(params, &u))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

#[test]
fn fft_rhs_matches_direct_convolution() {
    for q in 1..=3 {
        let p = ModelParams::benjamin(1.0, 1.0, q).unwrap();
        for n in [1, 2, 5, 8, 13, 16] {
            for seed in 0..5 {
                let d = max_diff(&p, n, seed);
                assert!(d <= 1e-12, "q={q} N={n} seed={seed}: {d:e}");
            }
        }
    }
}

#[test]
fn matches_on_scaled_domain_with_general_symbol() {
    let p = ModelParams::new(2, 0.75, 0.3, 0.2, 2, 2.5).unwrap();
    for n in [3, 9, 16] {
        assert!(max_diff(&p, n, 11) <= 1e-12);
    }
}
