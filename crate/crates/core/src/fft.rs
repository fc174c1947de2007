//! Per-thread real FFT plans and the synthesis/analysis kernels behind `spectral`.
//!
//! Grid convention: `x_j = -L pi + 2 L pi j / M`, so `e^{i k x_j / L} = (-1)^k e^{2 pi i k j / M}`.
//! Synthesis is unnormalized; analysis divides by `M`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

struct Plans {
    planner: RealFftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn RealToComplex<f64>>>,
    inverse: HashMap<usize, Arc<dyn ComplexToReal<f64>>>,
    scratch: Vec<Complex64>,
}

thread_local! {
    static PLANS: RefCell<Plans> = RefCell::new(Plans {
        planner: RealFftPlanner::new(),
        forward: HashMap::new(),
        inverse: HashMap::new(),
        scratch: Vec::new(),
    });
}

/// Smallest even integer `>= n` whose only prime factors are 2, 3 and 5;
/// even lengths let the real transform run at half size.
pub(crate) fn good_size(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        if m % 2 == 1 {
            m += 1;
            continue;
        }
        let mut x = m;
        for p in [2, 3, 5] {
            while x.is_multiple_of(p) {
                x /= p;
            }
        }
        if x == 1 {
            return m;
        }
        m += 1;
    }
}

#[inline]
fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Values on `m` grid points of the real trigonometric polynomial with
/// coefficients `coeffs[k + n]`, `|k| <= n`. Requires `m >= 2n + 1`.
pub(crate) fn synthesize(coeffs: &[Complex64], m: usize) -> Vec<f64> {
    let n = (coeffs.len() - 1) / 2;
    debug_assert!(m > 2 * n);
    let mut half = vec![Complex64::new(0.0, 0.0); m / 2 + 1];
    for k in 0..=n {
        half[k] = coeffs[n + k] * sign(k as i64);
    }
    half[0].im = 0.0;
    let mut out = vec![0.0; m];
    PLANS.with_borrow_mut(|p| {
        let Plans { planner, inverse, scratch, .. } = p;
        let plan = inverse.entry(m).or_insert_with(|| planner.plan_fft_inverse(m));
        scratch.resize(plan.get_scratch_len(), Complex64::new(0.0, 0.0));
        plan.process_with_scratch(&mut half, &mut out, scratch)
            .expect("Hermitian input with real DC and no Nyquist content");
    });
    out
}

/// Discrete Fourier coefficients `|k| <= n` of real samples on `values.len()`
/// grid points, Hermitian by construction (negative modes mirrored).
pub(crate) fn analyze(values: &[f64], n: usize) -> Vec<Complex64> {
    let m = values.len();
    debug_assert!(m > 2 * n);
    let mut input = values.to_vec();
    let mut half = vec![Complex64::new(0.0, 0.0); m / 2 + 1];
    PLANS.with_borrow_mut(|p| {
        let Plans { planner, forward, scratch, .. } = p;
        let plan = forward.entry(m).or_insert_with(|| planner.plan_fft_forward(m));
        scratch.resize(plan.get_scratch_len(), Complex64::new(0.0, 0.0));
        plan.process_with_scratch(&mut input, &mut half, scratch)
            .expect("buffer lengths match the plan");
    });
    let scale = 1.0 / m as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    out[n] = Complex64::new(half[0].re * scale, 0.0);
    for k in 1..=n {
        let c = half[k] * (scale * sign(k as i64));
        out[n + k] = c;
        out[n - k] = c.conj();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn good_sizes() {
        assert_eq!(good_size(1), 2);
        assert_eq!(good_size(7), 8);
        assert_eq!(good_size(49), 50);
        assert_eq!(good_size(51), 54);
        assert_eq!(good_size(3073), 3200);
        assert_eq!(good_size(1025), 1080);
    }
}
