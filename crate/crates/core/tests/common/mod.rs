#![allow(dead_code)] // each test binary uses its own subset of the oracles

//! Shared test oracles, independent of the library implementation.
//!
//! The clamped circular plate has closed-form modes in Bessel functions:
//! eigenvalues are fourth powers of the roots of
//! `J_n(k) I_n'(k) - J_n'(k) I_n(k) = 0`. The series below and the bisection
//! root-finder give those reference values without touching any mesh or
//! matrix code.

/// Bessel J_n by power series; adequate for `x <= 20`, `n <= 4`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / factorial(n);
    let mut sum = term;
    for m in 1..60 {
        term *= -half * half / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Modified Bessel I_n by power series.
pub fn bessel_i(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / factorial(n);
    let mut sum = term;
    for m in 1..80 {
        term *= half * half / (m as f64 * (m + n) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
}

/// Characteristic function of the clamped unit disk for angular order `n`:
/// roots `k` give eigenvalues `k^4`.
pub fn clamped_disk_characteristic(n: usize, k: f64) -> f64 {
    // J_n I_n' - J_n' I_n = J_n I_{n-1} - J_{n-1} I_n, with the n = 0 case
    // using J_{-1} = -J_1 and I_{-1} = I_1.
    if n == 0 {
        bessel_j(0, k) * bessel_i(1, k) + bessel_j(1, k) * bessel_i(0, k)
    } else {
        bessel_j(n, k) * bessel_i(n - 1, k) - bessel_j(n - 1, k) * bessel_i(n, k)
    }
}

/// First positive root of the order-`n` characteristic equation.
pub fn clamped_disk_first_root(n: usize) -> f64 {
    let f = |k: f64| clamped_disk_characteristic(n, k);
    let mut lo = 0.5;
    let step = 0.01;
    loop {
        let hi = lo + step;
        assert!(hi < 20.0, "no root found for order {n}");
        if f(lo).signum() != f(hi).signum() {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if f(a).signum() == f(mid).signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        }
        lo = hi;
    }
}
