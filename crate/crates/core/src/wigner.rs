//! Wigner functions of truncated Fock states on rectangular grids.
//!
//! Phase-space points are `alpha = x1 + i x2` in quadrature units, so the
//! vacuum is `W(x1, x2) = (2/pi) exp(-2(x1^2 + x2^2))` and every marginal has
//! the same units as the quadrature variances elsewhere in the crate. For
//! `m >= n` the Fock-basis kernel is
//!
//! ```text
//! W_{|m><n|}(alpha) = (2/pi) (-1)^n sqrt(n!/m!) (2 conj(alpha))^{m-n}
//!                     exp(-2|alpha|^2) L_n^{(m-n)}(4|alpha|^2)
//! ```
//!
//! and `W_{|n><m|}` is its complex conjugate.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::exec::Execution;
use crate::fock::FockDensity;
use crate::C64;

/// Tag identifying the phase-space scaling in exported grids.
pub const CONVENTION: &str = "vacuum-variance=1/4";
pub const DEFAULT_HALF_WIDTH: f64 = 3.0;
pub const DEFAULT_RESOLUTION: usize = 201;
pub const MIN_RESOLUTION: usize = 16;
/// Each axis must reach at least four vacuum standard deviations.
pub const MIN_COVERAGE: f64 = 2.0;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x1_range: (f64, f64),
    pub x2_range: (f64, f64),
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::square(DEFAULT_HALF_WIDTH, DEFAULT_RESOLUTION)
    }
}

impl GridSpec {
    /// `[-half_width, half_width]^2`.
    pub fn square(half_width: f64, resolution: usize) -> Self {
        Self {
            x1_range: (-half_width, half_width),
            x2_range: (-half_width, half_width),
            resolution,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(invalid_param(format!(
                "resolution {} below minimum {MIN_RESOLUTION}",
                self.resolution
            )));
        }
        for (name, (lo, hi)) in [("x1", self.x1_range), ("x2", self.x2_range)] {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(invalid_param(format!("degenerate {name} range ({lo}, {hi})")));
            }
            if lo > -MIN_COVERAGE || hi < MIN_COVERAGE {
                return Err(invalid_param(format!(
                    "{name} range ({lo}, {hi}) must cover [-{MIN_COVERAGE}, {MIN_COVERAGE}]"
                )));
            }
        }
        Ok(())
    }

    fn axis((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }
}

/// Sampled Wigner function; `values[i1 * n2 + i2] = W(x1[i1], x2[i2])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub spec: GridSpec,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub values: Vec<f64>,
    /// Trapezoidal integral over the grid.
    pub integral: f64,
    /// `|integral - 1|`.
    pub integral_error: f64,
}

impl WignerGrid {
    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.x2.len() + i2]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Nearest grid value to `(x1, x2)`.
    pub fn nearest(&self, x1: f64, x2: f64) -> f64 {
        let idx = |axis: &[f64], x: f64| {
            let step = axis[1] - axis[0];
            (((x - axis[0]) / step).round().max(0.0) as usize).min(axis.len() - 1)
        };
        self.at(idx(&self.x1, x1), idx(&self.x2, x2))
    }

    /// Bilinear interpolation, zero outside the grid.
    pub fn interpolate(&self, x1: f64, x2: f64) -> f64 {
        let locate = |axis: &[f64], x: f64| -> Option<(usize, f64)> {
            let step = axis[1] - axis[0];
            let u = (x - axis[0]) / step;
            let last = (axis.len() - 1) as f64;
            if !(0.0..=last).contains(&u) {
                return None;
            }
            let i = (u.floor() as usize).min(axis.len() - 2);
            Some((i, u - i as f64))
        };
        let (Some((i, fx)), Some((j, fy))) = (locate(&self.x1, x1), locate(&self.x2, x2)) else {
            return 0.0;
        };
        let w00 = self.at(i, j);
        let w10 = self.at(i + 1, j);
        let w01 = self.at(i, j + 1);
        let w11 = self.at(i + 1, j + 1);
        (1.0 - fx) * ((1.0 - fy) * w00 + fy * w01) + fx * ((1.0 - fy) * w10 + fy * w11)
    }
}

/// Trapezoidal weights for a uniform axis.
fn trapezoid(values: impl Iterator<Item = f64>, step: f64, len: usize) -> f64 {
    values
        .enumerate()
        .map(|(k, v)| if k == 0 || k + 1 == len { 0.5 * v } else { v })
        .sum::<f64>()
        * step
}

/// Wigner function of `rho` at one phase-space point.
pub fn wigner_at(rho: &FockDensity, x1: f64, x2: f64) -> f64 {
    let dim = rho.dim();
    let r2 = x1 * x1 + x2 * x2;
    let z = 4.0 * r2;
    let two_conj = C64::new(2.0 * x1, -2.0 * x2);
    let gauss = FRAC_2_PI * (-2.0 * r2).exp();
    let mut total = 0.0;
    // diagonal offset k = m - n, entries rho_{n+k, n}
    let mut alpha_pow = C64::new(1.0, 0.0);
    for k in 0..dim {
        // Laguerre L_n^{(k)}(z) by upward recurrence in n
        let (mut l_prev, mut l_cur) = (0.0, 1.0);
        // sqrt(n!/(n+k)!) starting from 1/sqrt(k!)
        let mut ratio = (1..=k).map(|j| 1.0 / (j as f64).sqrt()).product::<f64>();
        for n in 0..dim - k {
            if n > 0 {
                let nf = (n - 1) as f64;
                let next = ((2.0 * nf + 1.0 + k as f64 - z) * l_cur - (nf + k as f64) * l_prev) / (nf + 1.0);
                l_prev = l_cur;
                l_cur = next;
                ratio *= (n as f64 / (n + k) as f64).sqrt();
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let kernel = alpha_pow * (sign * ratio * l_cur);
            let contrib = rho.get(n + k, n) * kernel;
            total += if k == 0 { contrib.re } else { 2.0 * contrib.re };
        }
        alpha_pow *= two_conj;
    }
    gauss * total
}

/// Wigner function of `rho` on the grid described by `spec`.
pub fn wigner_of_state(rho: &FockDensity, spec: &GridSpec, exec: Execution) -> Result<WignerGrid> {
    spec.validate()?;
    let n = spec.resolution;
    let x1 = GridSpec::axis(spec.x1_range, n);
    let x2 = GridSpec::axis(spec.x2_range, n);
    let rows = exec.map_range(n, |i| x2.iter().map(|&y| wigner_at(rho, x1[i], y)).collect::<Vec<_>>());
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let h1 = x1[1] - x1[0];
    let h2 = x2[1] - x2[0];
    let integral = trapezoid(
        (0..n).map(|i| trapezoid(values[i * n..(i + 1) * n].iter().copied(), h2, n)),
        h1,
        n,
    );
    Ok(WignerGrid {
        spec: *spec,
        x1,
        x2,
        values,
        integral,
        integral_error: (integral - 1.0).abs(),
    })
}

/// Sampled one-dimensional probability density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub phi_lo: f64,
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

impl Marginal {
    fn step(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        trapezoid(
            self.x.iter().zip(&self.density).map(|(&x, &p)| f(x) * p),
            self.step(),
            self.x.len(),
        )
    }

    pub fn integral(&self) -> f64 {
        self.moment(|_| 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.moment(|x| x) / self.integral()
    }

    pub fn variance(&self) -> f64 {
        let norm = self.integral();
        let mean = self.moment(|x| x) / norm;
        self.moment(|x| (x - mean) * (x - mean)) / norm
    }

    /// Density at the sample closest to `x`.
    pub fn nearest(&self, x: f64) -> f64 {
        let k = (((x - self.x[0]) / self.step()).round().max(0.0) as usize).min(self.x.len() - 1);
        self.density[k]
    }
}

const EXACT_PHASE_TOL: f64 = 1e-12;

/// Homodyne distribution of `X_phi` obtained by integrating the grid along
/// the conjugate direction. `phi = 0` and `pi/2` use the grid axes directly;
/// other phases integrate along rotated lines with bilinear interpolation.
pub fn wigner_marginal(grid: &WignerGrid, phi_lo: f64) -> Marginal {
    let n1 = grid.x1.len();
    let n2 = grid.x2.len();
    let h1 = grid.x1[1] - grid.x1[0];
    let h2 = grid.x2[1] - grid.x2[0];
    if phi_lo.abs() < EXACT_PHASE_TOL {
        let density = (0..n1)
            .map(|i| trapezoid((0..n2).map(|j| grid.at(i, j)), h2, n2))
            .collect();
        return Marginal {
            phi_lo,
            x: grid.x1.clone(),
            density,
        };
    }
    if (phi_lo - FRAC_PI_2).abs() < EXACT_PHASE_TOL {
        let density = (0..n2)
            .map(|j| trapezoid((0..n1).map(|i| grid.at(i, j)), h1, n1))
            .collect();
        return Marginal {
            phi_lo,
            x: grid.x2.clone(),
            density,
        };
    }
    // X_phi = x1 cos(phi) + x2 sin(phi); conjugate direction (-sin, cos)
    let (s, c) = phi_lo.sin_cos();
    let reach = grid
        .spec
        .x1_range
        .0
        .abs()
        .max(grid.spec.x1_range.1.abs())
        .max(grid.spec.x2_range.0.abs())
        .max(grid.spec.x2_range.1.abs());
    let h = h1.min(h2);
    let m = (2.0 * reach / h).ceil() as usize + 1;
    let axis: Vec<f64> = (0..m).map(|k| -reach + h * k as f64).collect();
    let density = axis
        .iter()
        .map(|&u| {
            trapezoid(
                axis.iter().map(|&v| grid.interpolate(u * c - v * s, u * s + v * c)),
                h,
                m,
            )
        })
        .collect();
    Marginal {
        phi_lo,
        x: axis,
        density,
    }
}

/// Marginal of `X_phi` for a state: rotates the state by `e^{-i phi N}`
/// and integrates its Wigner function over `x2`.
pub fn wigner_marginal_of_state(rho: &FockDensity, phi_lo: f64, spec: &GridSpec, exec: Execution) -> Result<Marginal> {
    let grid = wigner_of_state(&rho.rotated(phi_lo), spec, exec)?;
    let mut m = wigner_marginal(&grid, 0.0);
    m.phi_lo = phi_lo;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_loss, quadrature_stats, FockVector};
    use crate::quad::integrate;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn two_thirds() -> FockDensity {
        FockVector::from_real(&[(2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt()])
            .unwrap()
            .to_density()
    }

    /// Parity oracle: `W(0,0) = (2/pi) sum_n (-1)^n rho_nn`.
    fn parity(rho: &FockDensity) -> f64 {
        FRAC_2_PI
            * rho
                .populations()
                .iter()
                .enumerate()
                .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
                .sum::<f64>()
    }

    /// Weyl transform for real wavefunctions in quadrature units:
    /// `W(x1, x2) = (2/pi) int psi(x1 + u) psi(x1 - u) cos(4 x2 u) du`.
    fn weyl_oracle(amps: &[f64], x1: f64, x2: f64) -> f64 {
        let psi = |x: f64| {
            let h = crate::hermite::hermite_functions(x, amps.len() - 1);
            amps.iter().zip(&h).map(|(c, p)| c * p).sum::<f64>()
        };
        FRAC_2_PI * integrate(|u| psi(x1 + u) * psi(x1 - u) * (4.0 * x2 * u).cos(), -7.0, 7.0, 1e-13).unwrap()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn origin_values() {
        let vac = FockDensity::vacuum(3);
        assert_abs_diff_eq!(wigner_at(&vac, 0.0, 0.0), 0.636_62, epsilon = 1e-5);
        assert_abs_diff_eq!(wigner_at(&vac, 0.0, 0.0), FRAC_2_PI, epsilon = 1e-15);
        let one = FockDensity::number(1, 3).unwrap();
        assert_abs_diff_eq!(wigner_at(&one, 0.0, 0.0), -FRAC_2_PI, epsilon = 1e-15);
        assert_abs_diff_eq!(weyl_oracle(&[0.0, 1.0], 0.0, 0.0), -FRAC_2_PI, epsilon = 1e-12);
        let amps = [(2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt()];
        for (x, y) in [(0.0, 0.0), (0.3, 0.2), (-0.7, 0.5), (1.1, -0.4)] {
            assert_abs_diff_eq!(
                wigner_at(&two_thirds(), x, y),
                weyl_oracle(&amps, x, y),
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(weyl_oracle(&amps, 0.0, 0.0), FRAC_2_PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wigner_at(&two_thirds(), 0.0, 0.0), 0.212_21, epsilon = 1e-5);
        assert_abs_diff_eq!(
            wigner_at(&two_thirds(), 0.0, 0.0),
            parity(&two_thirds()),
            epsilon = 1e-15
        );
    }

    #[test]
    fn vacuum_gaussian_everywhere() {
        let vac = FockDensity::vacuum(5);
        for (x, y) in [(0.3f64, -0.2f64), (1.0, 0.5), (-1.7, 0.9)] {
            let expected = FRAC_2_PI * (-2.0 * (x * x + y * y)).exp();
            assert_abs_diff_eq!(wigner_at(&vac, x, y), expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn fock_state_closed_forms() {
        // W_n = (2/pi)(-1)^n exp(-2r^2) L_n(4 r^2)
        let r2: f64 = 0.41;
        let z = 4.0 * r2;
        let l2 = 1.0 - 2.0 * z + z * z / 2.0;
        let l3 = 1.0 - 3.0 * z + 1.5 * z * z - z * z * z / 6.0;
        let (x, y) = (r2.sqrt() * 0.6, r2.sqrt() * 0.8);
        let g = FRAC_2_PI * (-2.0 * r2).exp();
        assert_abs_diff_eq!(
            wigner_at(&FockDensity::number(2, 4).unwrap(), x, y),
            g * l2,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            wigner_at(&FockDensity::number(3, 4).unwrap(), x, y),
            -g * l3,
            epsilon = 1e-14
        );
    }

    #[test]
    fn grid_bound_and_integral() {
        for rho in [FockDensity::vacuum(2), FockDensity::number(1, 2).unwrap(), two_thirds()] {
            let g = wigner_of_state(&rho, &GridSpec::default(), Execution::default()).unwrap();
            assert!(g.max_abs() <= FRAC_2_PI + 1e-9);
            assert!(g.integral_error < 1e-6, "integral error {}", g.integral_error);
        }
    }

    #[test]
    fn grid_validation() {
        let rho = FockDensity::vacuum(1);
        for spec in [
            GridSpec::square(3.0, 8),
            GridSpec::square(1.0, 64),
            GridSpec {
                x1_range: (2.0, -2.0),
                x2_range: (-3.0, 3.0),
                resolution: 32,
            },
            GridSpec {
                x1_range: (-3.0, f64::NAN),
                x2_range: (-3.0, 3.0),
                resolution: 32,
            },
        ] {
            assert!(matches!(
                wigner_of_state(&rho, &spec, Execution::Sequential),
                Err(crate::Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn marginal_examples() {
        let spec = GridSpec::default();
        let vac = wigner_of_state(&FockDensity::vacuum(1), &spec, Execution::default()).unwrap();
        assert_abs_diff_eq!(wigner_marginal(&vac, 0.0).variance(), 0.25, epsilon = 1e-3);

        let wide = GridSpec::square(4.5, 201);
        let one = wigner_of_state(&FockDensity::number(1, 1).unwrap(), &wide, Execution::default()).unwrap();
        let m = wigner_marginal(&one, 0.0);
        assert!(m.nearest(0.0).abs() < 1e-6);
        // |psi_1(x)|^2 = sqrt(2/pi) 4 x^2 exp(-2x^2)
        for (k, &x) in m.x.iter().enumerate().step_by(17) {
            let expected = (2.0 / PI).sqrt() * 4.0 * x * x * (-2.0 * x * x).exp();
            assert_abs_diff_eq!(m.density[k], expected, epsilon = 1e-9);
        }

        let f = wigner_of_state(&two_thirds(), &spec, Execution::default()).unwrap();
        let m = wigner_marginal(&f, 0.0);
        assert_abs_diff_eq!(m.variance(), 0.194_44, epsilon = 2e-3);
        assert_abs_diff_eq!(m.integral(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn marginals_match_state_statistics() {
        let v = FockVector::new(&[
            C64::new(0.6, 0.0),
            C64::new(0.3, 0.5),
            C64::new(-0.2, 0.1),
            C64::new(0.0, 0.3),
        ])
        .unwrap();
        let rho = v.to_density();
        let g = wigner_of_state(&rho, &GridSpec::square(4.0, 161), Execution::default()).unwrap();
        for phi in [0.0, FRAC_PI_2] {
            let m = wigner_marginal(&g, phi);
            let s = quadrature_stats(&rho, phi);
            assert_abs_diff_eq!(m.mean(), s.mean, epsilon = 1e-9);
            assert_abs_diff_eq!(m.variance(), s.variance, epsilon = 1e-9);
        }
        // rotated grid integration is only accurate to interpolation error
        let m = wigner_marginal(&g, 0.7);
        let s = quadrature_stats(&rho, 0.7);
        assert_abs_diff_eq!(m.mean(), s.mean, epsilon = 2e-3);
        assert_abs_diff_eq!(m.variance(), s.variance, epsilon = 2e-3);
        // state-space rotation is exact
        let m = wigner_marginal_of_state(&rho, 0.7, &GridSpec::square(4.0, 161), Execution::default()).unwrap();
        assert_abs_diff_eq!(m.mean(), s.mean, epsilon = 1e-9);
        assert_abs_diff_eq!(m.variance(), s.variance, epsilon = 1e-9);
    }

    #[test]
    fn marginal_convergence_order() {
        // error against a fine reference on the same window isolates the
        // discretization error from range truncation
        let rho = FockVector::from_real(&[0.75f64.sqrt(), 0.5])
            .unwrap()
            .to_density()
            .rotated(0.4);
        let var = |res: usize| {
            let g = wigner_of_state(&rho, &GridSpec::square(3.0, res), Execution::default()).unwrap();
            wigner_marginal(&g, 0.0).variance()
        };
        let reference = var(257);
        let (coarse, fine) = ((var(17) - reference).abs(), (var(33) - reference).abs());
        assert!(fine < coarse);
        assert!(coarse / fine >= 3.0, "coarse {coarse:e}, fine {fine:e}");
    }

    #[test]
    fn linearity() {
        let a = two_thirds();
        let b = FockVector::from_real(&[0.2, -0.5, 0.8]).unwrap().to_density();
        let mix = a.mix(&b, 0.3).unwrap();
        for (x, y) in [(0.0, 0.0), (0.4, -1.1), (-0.9, 0.2)] {
            let lhs = wigner_at(&mix, x, y);
            let rhs = 0.3 * wigner_at(&a, x, y) + 0.7 * wigner_at(&b, x, y);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn origin_sign_change_under_loss() {
        let one = FockDensity::number(1, 1).unwrap();
        let w0 = |eta: f64| wigner_at(&apply_loss(&one, eta).unwrap(), 0.0, 0.0);
        let (mut lo, mut hi) = (0.0, 1.0);
        assert!(w0(lo) > 0.0 && w0(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if w0(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let rho = apply_loss(&one, 0.5 * (lo + hi)).unwrap();
        assert_abs_diff_eq!(rho.get(1, 1).re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sequential_matches_default() {
        let rho = two_thirds();
        let spec = GridSpec::square(2.5, 33);
        let a = wigner_of_state(&rho, &spec, Execution::Sequential).unwrap();
        let b = wigner_of_state(&rho, &spec, Execution::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn marginal_integrates_the_kernel() {
        // brute-force integration of W along x2 at a few x1 matches |<x|psi>|^2
        let rho = two_thirds();
        let (g, b) = ((2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt());
        for x in [-0.8, 0.0, 0.35, 1.2] {
            let num = integrate(|y| wigner_at(&rho, x, y), -6.0, 6.0, 1e-13).unwrap();
            let psi0 = (2.0 / PI).powf(0.25) * (-x * x).exp();
            let amp = g * psi0 + b * 2.0 * x * psi0;
            assert_abs_diff_eq!(num, amp * amp, epsilon = 1e-12);
        }
    }
}
