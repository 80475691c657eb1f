#![allow(dead_code)]

//! Standalone clamped-disk oracle: Bessel series and the characteristic
//! equation root-finder, independent of all solver code.

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

/// First root of `J_n(k) I_n'(k) - J_n'(k) I_n(k) = 0`; `k^4` is the
/// corresponding clamped-disk eigenvalue.
pub fn clamped_disk_first_root(n: usize) -> f64 {
    let f = |k: f64| {
        if n == 0 {
            bessel_j(0, k) * bessel_i(1, k) + bessel_j(1, k) * bessel_i(0, k)
        } else {
            bessel_j(n, k) * bessel_i(n - 1, k) - bessel_j(n - 1, k) * bessel_i(n, k)
        }
    };
    let mut lo = 0.5;
    loop {
        let hi = lo + 0.01;
        assert!(hi < 20.0, "no characteristic root found");
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
