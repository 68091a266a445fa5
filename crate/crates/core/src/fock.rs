//! Truncated Fock-space states and quadrature statistics.
//!
//! The generalized quadrature measured with local-oscillator phase `phi` is
//! `X_phi = (a e^{-i phi} + a† e^{i phi}) / 2 = X1 cos(phi) + X2 sin(phi)`.
//! Measuring `X_phi` on `rho` is the same as measuring `X1` on the state
//! rotated by `e^{-i phi N}` (see [`FockDensity::rotated`]).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, invalid_state, Result};
use crate::{C64, VACUUM_VARIANCE};

/// Tolerance for norm, trace and hermiticity checks.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = -1e-10;
/// Truncation used for generic states when nothing else is specified.
pub const DEFAULT_N_MAX: usize = 10;

/// Pure field state `sum_n c_n |n>` truncated at `n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockVector {
    amplitudes: Vec<C64>,
}

impl FockVector {
    /// Normalizes `amplitudes` into a state. A single amplitude is padded
    /// with a zero so that `n_max >= 1`.
    pub fn new(amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid_state("empty amplitude list"));
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(invalid_state("non-finite amplitude"));
        }
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(invalid_state("all amplitudes are zero"));
        }
        let mut amplitudes: Vec<C64> = amplitudes.iter().map(|c| c / norm).collect();
        if amplitudes.len() < 2 {
            amplitudes.push(C64::new(0.0, 0.0));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        let c: Vec<C64> = amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(&c)
    }

    /// Number state `|n>` truncated at `n_max`.
    pub fn number(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(invalid_param(format!("photon number {n} exceeds n_max {n_max}")));
        }
        let mut c = vec![C64::new(0.0, 0.0); n_max.max(1) + 1];
        c[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: c })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Zero-pads the state to a larger truncation.
    pub fn padded(&self, n_max: usize) -> Self {
        let mut c = self.amplitudes.clone();
        if n_max > self.n_max() {
            c.resize(n_max + 1, C64::new(0.0, 0.0));
        }
        Self { amplitudes: c }
    }

    /// Applies `e^{-i phi N}`.
    pub fn rotated(&self, phi: f64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| c * C64::from_polar(1.0, -phi * n as f64))
            .collect();
        Self { amplitudes }
    }

    /// `|<self|other>|^2`, zero-padding the shorter state.
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    pub fn to_density(&self) -> FockDensity {
        let dim = self.amplitudes.len();
        let matrix = DMatrix::from_fn(dim, dim, |m, n| self.amplitudes[m] * self.amplitudes[n].conj());
        FockDensity { matrix }
    }

    /// Quadrature statistics evaluated directly on the ket by ladder algebra.
    pub fn quadrature_stats(&self, phi_lo: f64) -> QuadratureStats {
        let c = &self.amplitudes;
        let mut a = C64::new(0.0, 0.0);
        let mut a2 = C64::new(0.0, 0.0);
        let mut n_mean = 0.0;
        for n in 1..c.len() {
            let sn = (n as f64).sqrt();
            a += c[n - 1].conj() * c[n] * sn;
            n_mean += n as f64 * c[n].norm_sqr();
            if n >= 2 {
                a2 += c[n - 2].conj() * c[n] * (sn * ((n - 1) as f64).sqrt());
            }
        }
        LadderMoments { a, a2, n: n_mean }.quadrature(phi_lo)
    }
}

/// Convenience wrapper for [`FockVector::new`].
pub fn make_fock_vector(amplitudes: &[C64]) -> Result<FockVector> {
    FockVector::new(amplitudes)
}

/// Mixed field state: a Hermitian, unit-trace, positive semidefinite matrix
/// over photon numbers `0..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockDensity {
    matrix: DMatrix<C64>,
}

impl FockDensity {
    /// Validates `matrix` against the density-matrix invariants.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(invalid_state(format!(
                "density matrix must be square with dimension >= 2, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dim = matrix.nrows();
        for m in 0..dim {
            for n in m..dim {
                let d = (matrix[(m, n)] - matrix[(n, m)].conj()).norm();
                if d > STATE_TOL {
                    return Err(invalid_state(format!("not Hermitian at ({m},{n}): deviation {d:e}")));
                }
            }
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(invalid_state(format!("trace {trace} differs from 1")));
        }
        let rho = Self { matrix };
        let min_eig = rho.min_eigenvalue();
        if min_eig < PSD_TOL {
            return Err(invalid_state(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(rho)
    }

    pub fn vacuum(n_max: usize) -> Self {
        FockVector::number(0, n_max.max(1)).expect("vacuum").to_density()
    }

    pub fn number(n: usize, n_max: usize) -> Result<Self> {
        Ok(FockVector::number(n, n_max)?.to_density())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn n_max(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.matrix[(m, n)]
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_mn|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.matrix.clone());
        eig.eigenvalues.iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Photon-number distribution `rho_nn`.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.matrix[(n, n)].re).collect()
    }

    /// Zero-pads to a larger truncation.
    pub fn padded(&self, n_max: usize) -> Self {
        if n_max <= self.n_max() {
            return self.clone();
        }
        let dim = self.dim();
        let matrix = DMatrix::from_fn(n_max + 1, n_max + 1, |m, n| {
            if m < dim && n < dim {
                self.matrix[(m, n)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { matrix }
    }

    /// `e^{-i phi N} rho e^{i phi N}`; measuring `X1` on the result equals
    /// measuring `X_phi` on `self`.
    pub fn rotated(&self, phi: f64) -> Self {
        let dim = self.dim();
        let matrix = DMatrix::from_fn(dim, dim, |m, n| {
            self.matrix[(m, n)] * C64::from_polar(1.0, -phi * (m as f64 - n as f64))
        });
        Self { matrix }
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &FockDensity, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(invalid_param(format!("mixing weight {w} outside [0,1]")));
        }
        let n_max = self.n_max().max(other.n_max());
        let a = self.padded(n_max);
        let b = other.padded(n_max);
        Ok(Self {
            matrix: a.matrix * C64::new(w, 0.0) + b.matrix * C64::new(1.0 - w, 0.0),
        })
    }

    /// `tr(rho * op)`.
    pub fn expectation(&self, op: &DMatrix<C64>) -> C64 {
        (&self.matrix * op).trace()
    }

    /// `<a>`, `<a^2>` and `<N>` evaluated with the ladder matrices.
    pub fn ladder_moments(&self) -> LadderMoments {
        let a = annihilation_matrix(self.n_max());
        let a2 = &a * &a;
        let num = a.adjoint() * &a;
        LadderMoments {
            a: self.expectation(&a),
            a2: self.expectation(&a2),
            n: self.expectation(&num).re,
        }
    }
}

/// First and second ladder-operator moments of a state.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LadderMoments {
    pub a: C64,
    pub a2: C64,
    pub n: f64,
}

impl LadderMoments {
    /// Mean and variance of `X_phi`.
    pub fn quadrature(&self, phi_lo: f64) -> QuadratureStats {
        let rot = C64::from_polar(1.0, -phi_lo);
        let mean = (rot * self.a).re;
        let second = 0.25 * (2.0 * (rot * rot * self.a2).re + 2.0 * self.n + 1.0);
        QuadratureStats {
            phi_lo,
            mean,
            variance: second - mean * mean,
        }
    }

    /// Quadrature of smallest variance, with its LO phase in `[0, pi)`.
    pub fn min_quadrature(&self) -> QuadratureStats {
        let m = self.a2 - self.a * self.a;
        let phi = if m.norm() == 0.0 {
            0.0
        } else {
            (0.5 * (m.arg() - std::f64::consts::PI)).rem_euclid(std::f64::consts::PI)
        };
        self.quadrature(phi)
    }
}

/// Quadrature statistics at one LO phase.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureStats {
    pub phi_lo: f64,
    pub mean: f64,
    pub variance: f64,
}

impl QuadratureStats {
    pub fn db(&self) -> Result<f64> {
        variance_to_db(self.variance)
    }
}

/// Ladder operator `a` on `0..=n_max`: `a_{n-1,n} = sqrt(n)`.
pub fn annihilation_matrix(n_max: usize) -> DMatrix<C64> {
    let dim = n_max.max(1) + 1;
    DMatrix::from_fn(dim, dim, |m, n| {
        if m + 1 == n {
            C64::new((n as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn creation_matrix(n_max: usize) -> DMatrix<C64> {
    annihilation_matrix(n_max).adjoint()
}

pub fn number_matrix(n_max: usize) -> DMatrix<C64> {
    let a = annihilation_matrix(n_max);
    a.adjoint() * a
}

pub fn quadrature_stats(state: &FockDensity, phi_lo: f64) -> QuadratureStats {
    state.ladder_moments().quadrature(phi_lo)
}

/// Minimum quadrature variance over all LO phases.
pub fn min_quadrature_variance(state: &FockDensity) -> QuadratureStats {
    state.ladder_moments().min_quadrature()
}

/// `10 log10(variance / 0.25)`; negative values are squeezed.
pub fn variance_to_db(variance: f64) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(invalid_state(format!(
            "variance must be positive and finite, got {variance}"
        )));
    }
    Ok(10.0 * (variance / VACUUM_VARIANCE).log10())
}

/// Variance after a loss channel of efficiency `eta`: `eta V + (1 - eta)/4`.
pub fn loss_variance(variance: f64, eta: f64) -> f64 {
    eta * variance + (1.0 - eta) * VACUUM_VARIANCE
}

pub(crate) fn check_efficiency(name: &str, eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid_param(format!("{name} = {eta} outside [0,1]")));
    }
    Ok(())
}

/// Beam-splitter loss channel with transmissivity `eta`.
///
/// `rho'_{mn} = sum_k sqrt(C(m+k,k) C(n+k,k)) eta^{(m+n)/2} (1-eta)^k rho_{m+k,n+k}`.
pub fn apply_loss(state: &FockDensity, eta: f64) -> Result<FockDensity> {
    check_efficiency("eta", eta)?;
    let dim = state.dim();
    let binom = binomial_table(dim);
    let loss = 1.0 - eta;
    let matrix = DMatrix::from_fn(dim, dim, |m, n| {
        let mut acc = C64::new(0.0, 0.0);
        let top = dim - m.max(n);
        for k in 0..top {
            let w = (binom[m + k][k] * binom[n + k][k]).sqrt() * eta.powf(0.5 * (m + n) as f64) * loss.powi(k as i32);
            acc += state.matrix[(m + k, n + k)] * w;
        }
        acc
    });
    FockDensity::new(matrix)
}

/// Pascal triangle up to `dim - 1`.
fn binomial_table(dim: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; dim]; dim];
    for n in 0..dim {
        t[n][0] = 1.0;
        for k in 1..=n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0.0 };
        }
    }
    t
}
