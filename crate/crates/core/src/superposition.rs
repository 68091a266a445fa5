//! Vacuum/one-photon superpositions `gamma|0> + beta|1>` and squeezed vacuum.
//!
//! Phase convention: `gamma` is real and non-negative, the relative phase
//! `psi` sits on `beta`. For LO phase `phi` the variance is
//! `1/4 + |beta|^2/2 - (1 - |beta|^2)|beta|^2 cos^2(psi - phi)`, so `X1`
//! carries `cos^2 psi` and `X2` carries `sin^2 psi`. The state emitted in
//! the Jaynes-Cummings model has an extra `-i` on its one-photon amplitude;
//! see [`crate::jc::emitted_superposition`] for the mapping.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::fock::{variance_to_db, FockVector};
use crate::{C64, VACUUM_VARIANCE};

/// Margin below the vacuum variance required to call a state squeezed.
pub const SQUEEZING_MARGIN: f64 = 1e-12;
/// Largest `|xi|` accepted for truncated squeezed vacuum.
pub const MAX_SQUEEZE: f64 = 5.0;

/// The two canonical quadratures.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    X1,
    X2,
}

impl Quadrature {
    pub fn lo_phase(self) -> f64 {
        match self {
            Quadrature::X1 => 0.0,
            Quadrature::X2 => std::f64::consts::FRAC_PI_2,
        }
    }
}

/// `|beta|` and the relative phase of `gamma|0> + beta|1>`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionSpec {
    beta_abs: f64,
    rel_phase: f64,
}

impl SuperpositionSpec {
    pub fn new(beta_abs: f64, rel_phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta_abs) {
            return Err(invalid_param(format!("|beta| = {beta_abs} outside [0,1]")));
        }
        if !rel_phase.is_finite() {
            return Err(invalid_param("relative phase must be finite"));
        }
        Ok(Self { beta_abs, rel_phase })
    }

    pub fn beta_abs(&self) -> f64 {
        self.beta_abs
    }

    pub fn rel_phase(&self) -> f64 {
        self.rel_phase
    }

    pub fn gamma(&self) -> f64 {
        (1.0 - self.beta_abs * self.beta_abs).max(0.0).sqrt()
    }

    /// Exact variance of `X_phi`.
    pub fn variance_at(&self, phi_lo: f64) -> f64 {
        let b2 = self.beta_abs * self.beta_abs;
        let cos = (self.rel_phase - phi_lo).cos();
        VACUUM_VARIANCE + 0.5 * b2 - (1.0 - b2) * b2 * cos * cos
    }

    /// Smallest variance over all LO phases.
    pub fn min_variance(&self) -> f64 {
        let b2 = self.beta_abs * self.beta_abs;
        VACUUM_VARIANCE + 0.5 * b2 - (1.0 - b2) * b2
    }
}

pub fn make_superposition(spec: &SuperpositionSpec) -> FockVector {
    FockVector::new(&[
        C64::new(spec.gamma(), 0.0),
        C64::from_polar(spec.beta_abs, spec.rel_phase),
    ])
    .expect("superposition amplitudes are normalized")
}

pub fn superposition_variance(spec: &SuperpositionSpec, quadrature: Quadrature) -> f64 {
    spec.variance_at(quadrature.lo_phase())
}

/// Whether some LO phase shows a variance below the vacuum level.
pub fn squeezing_region(spec: &SuperpositionSpec) -> bool {
    spec.min_variance() < VACUUM_VARIANCE - SQUEEZING_MARGIN
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalSqueezing {
    pub beta_abs: f64,
    pub variance: f64,
    pub db: f64,
    /// Minimizer found by the grid scan.
    pub grid_beta_abs: f64,
    pub grid_variance: f64,
}

/// Number of `|beta|` samples in the cross-check scan.
pub const OPTIMUM_GRID_POINTS: usize = 10_000;

/// Best squeezing of `gamma|0> + beta|1>` at its squeezed phase.
///
/// `1/4 + b^2 (b^2 - 1/2)` is a parabola in `b^2` with vertex at `b^2 = 1/4`.
pub fn optimal_beta() -> OptimalSqueezing {
    let b2 = 0.25;
    let variance = VACUUM_VARIANCE + b2 * (b2 - 0.5);
    let (grid_beta_abs, grid_variance) = (0..=OPTIMUM_GRID_POINTS)
        .map(|k| {
            let b = k as f64 / OPTIMUM_GRID_POINTS as f64;
            let spec = SuperpositionSpec {
                beta_abs: b,
                rel_phase: 0.0,
            };
            (b, superposition_variance(&spec, Quadrature::X1))
        })
        .fold((f64::NAN, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    OptimalSqueezing {
        beta_abs: b2.sqrt(),
        variance,
        db: variance_to_db(variance).expect("positive"),
        grid_beta_abs,
        grid_variance,
    }
}

/// Real squeezing parameter `xi` with `|xi| <= 5`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParam(f64);

impl SqueezeParam {
    pub fn new(xi: f64) -> Result<Self> {
        if !xi.is_finite() || xi.abs() > MAX_SQUEEZE {
            return Err(invalid_param(format!(
                "squeezing parameter {xi} not finite or |xi| > {MAX_SQUEEZE}"
            )));
        }
        Ok(Self(xi))
    }

    pub fn xi(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqueezedVacuum {
    /// Renormalized truncated state.
    pub state: FockVector,
    /// Weight `sum_{n > n_max} |c_n|^2` of the untruncated expansion.
    pub truncation_error: f64,
}

/// Unnormalized even-Fock coefficients of `S(xi)|0>` up to `n_max`.
///
/// `c_{2k} = cosh(xi)^{-1/2} (-tanh(xi)/2)^k sqrt((2k)!)/k!`, generated by
/// the ratio `c_{2k+2}/c_{2k} = -tanh(xi) sqrt((2k+1)(2k+2))/(2k+2)`.
fn squeezed_vacuum_coefficients(xi: f64, n_max: usize) -> Vec<f64> {
    let t = xi.tanh();
    let mut c = vec![0.0; n_max + 1];
    c[0] = xi.cosh().powf(-0.5);
    let mut n = 0;
    while n + 2 <= n_max {
        let (a, b) = ((n + 1) as f64, (n + 2) as f64);
        c[n + 2] = -t * (a * b).sqrt() / b * c[n];
        n += 2;
    }
    c
}

pub fn squeezed_vacuum(xi: SqueezeParam, n_max: usize) -> Result<SqueezedVacuum> {
    if !n_max.is_multiple_of(2) || n_max < 4 {
        return Err(invalid_param(format!(
            "squeezed vacuum needs even n_max >= 4, got {n_max}"
        )));
    }
    let c = squeezed_vacuum_coefficients(xi.xi(), n_max);
    let kept: f64 = c.iter().map(|x| x * x).sum();
    let state = FockVector::from_real(&c)?;
    Ok(SqueezedVacuum {
        state,
        truncation_error: (1.0 - kept).max(0.0),
    })
}
