//! Harmonic-oscillator eigenfunctions in quadrature units.
//!
//! `psi_n(x) = <x|n>` for the `X1` quadrature with vacuum variance 1/4:
//! `psi_0(x) = (2/pi)^{1/4} exp(-x^2)` and the normalized recurrence
//! `psi_{n+1} = 2x psi_n / sqrt(n+1) - sqrt(n/(n+1)) psi_{n-1}`.

use std::f64::consts::PI;

/// Fills `out[n] = psi_n(x)` for `n < out.len()`.
pub fn hermite_functions_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = (2.0 / PI).sqrt().sqrt() * (-x * x).exp();
    if out.len() > 1 {
        out[1] = 2.0 * x * out[0];
    }
    for n in 1..out.len().saturating_sub(1) {
        let np1 = (n + 1) as f64;
        out[n + 1] = 2.0 * x * out[n] / np1.sqrt() - (n as f64 / np1).sqrt() * out[n - 1];
    }
}

pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    hermite_functions_into(x, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn low_orders() {
        let x = 0.37;
        let p = hermite_functions(x, 2);
        let p0 = (2.0 / PI).powf(0.25) * (-x * x).exp();
        assert_abs_diff_eq!(p[0], p0, epsilon = 1e-16);
        assert_abs_diff_eq!(p[1], 2.0 * x * p0, epsilon = 1e-16);
        // H_2(u) = 4u^2 - 2 with u = sqrt2 x, normalization 1/sqrt(8)
        assert_abs_diff_eq!(p[2], (8.0 * x * x - 2.0) / 8f64.sqrt() * p0, epsilon = 1e-15);
    }

    #[test]
    fn orthonormal() {
        let n_max = 12;
        for m in 0..=n_max {
            for n in m..=n_max {
                let g = integrate(
                    |x| {
                        let p = hermite_functions(x, n_max);
                        p[m] * p[n]
                    },
                    -8.0,
                    8.0,
                    1e-13,
                )
                .unwrap();
                assert_abs_diff_eq!(g, if m == n { 1.0 } else { 0.0 }, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn large_order_is_finite() {
        let p = hermite_functions(3.0, 150);
        assert!(p.iter().all(|v| v.is_finite()));
    }
}
