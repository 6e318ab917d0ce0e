//! Thin wrappers over `rustfft` with the sign conventions used in this crate.
//!
//! `dft(x, +1)` returns `X[k] = sum_j x[j] e(+jk/n)` and `dft(x, -1)` the
//! conjugate-kernel version. Prime lengths go through rustfft's Rader/Bluestein
//! plans, so every call is O(n log n).

use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn dft(x: &[Complex64], sign: i32) -> Vec<Complex64> {
    let n = x.len();
    let mut buf = x.to_vec();
    if n == 0 {
        return buf;
    }
    let mut planner = FftPlanner::<f64>::new();
    let plan = if sign >= 0 {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    plan.process(&mut buf);
    buf
}

/// Reference O(n^2) transform used by tests.
pub fn dft_naive(x: &[Complex64], sign: i32) -> Vec<Complex64> {
    let n = x.len();
    let s = if sign >= 0 { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            super::sum::sum_c64((0..n).map(|j| {
                let r = ((j as u128 * k as u128) % n as u128) as f64 / n as f64;
                x[j] * Complex64::from_polar(1.0, s * std::f64::consts::TAU * r)
            }))
        })
        .collect()
}
