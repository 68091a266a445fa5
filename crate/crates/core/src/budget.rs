//! Detection-efficiency bookkeeping for a free-space emitter.
//!
//! The emitted photon occupies one temporal mode with amplitude envelope
//! `sqrt(Gamma) exp(-Gamma t / 2)` for `t >= 0` (Lorentzian spectrum of
//! FWHM `Gamma`). The LO is an exponentially decaying pulse cut from a cw
//! beam and truncated after a window `T`. Envelope rates are amplitude
//! rates: the emitted mode has rate `Gamma/2`, its intensity decays as
//! `exp(-Gamma t)`. Mode mismatch, collection and detector efficiency act
//! as one loss channel of transmissivity `eta_total`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};
use crate::exec::Execution;
use crate::fock::{apply_loss, check_efficiency, loss_variance, quadrature_stats, variance_to_db};
use crate::quad::{integrate, integrate_to_infinity};
use crate::superposition::{make_superposition, SuperpositionSpec};

/// Required accuracy of numerically integrated norms and overlaps.
pub const QUAD_TOL: f64 = 1e-13;
pub const NORM_TOL: f64 = 1e-10;
pub const DEFAULT_LINEWIDTH_TOL: f64 = 0.05;
/// Budget and direct channel computation must agree this closely.
pub const CROSS_CHECK_TOL: f64 = 1e-12;

/// Emitter presets: name, upper-state lifetime (s), quoted linewidth (Hz).
pub const EMITTER_PRESETS: &[EmitterPreset] = &[EmitterPreset {
    name: "yb2plus-3p1",
    lifetime_s: 230e-9,
    quoted_linewidth_hz: 700e3,
}];

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct EmitterPreset {
    pub name: &'static str,
    pub lifetime_s: f64,
    pub quoted_linewidth_hz: f64,
}

pub fn preset(name: &str) -> Option<&'static EmitterPreset> {
    EMITTER_PRESETS.iter().find(|p| p.name == name)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    pub lifetime_tau: f64,
    pub gamma_rate: f64,
    pub linewidth_hz: f64,
}

impl EmitterParams {
    pub fn from_lifetime(lifetime_tau: f64) -> Result<Self> {
        if !(lifetime_tau > 0.0) || !lifetime_tau.is_finite() {
            return Err(invalid_param(format!("lifetime {lifetime_tau} s must be positive")));
        }
        Ok(Self {
            lifetime_tau,
            gamma_rate: 1.0 / lifetime_tau,
            linewidth_hz: 1.0 / (TAU * lifetime_tau),
        })
    }

    pub fn from_linewidth_hz(linewidth_hz: f64) -> Result<Self> {
        if !(linewidth_hz > 0.0) || !linewidth_hz.is_finite() {
            return Err(invalid_param(format!("linewidth {linewidth_hz} Hz must be positive")));
        }
        Self::from_lifetime(1.0 / (TAU * linewidth_hz))
    }

    /// The emitted single-photon mode.
    pub fn emitted_mode(&self) -> TemporalMode {
        TemporalMode::emitted(0.5 * self.gamma_rate).expect("positive rate")
    }

    /// LO matched to the emitter, truncated after `window` seconds.
    pub fn matched_lo(&self, window: f64) -> Result<TemporalMode> {
        TemporalMode::lo(0.5 * self.gamma_rate, window)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeShape {
    EmittedExponential,
    LoTruncatedExponential,
}

/// Envelope `amplitude * exp(-rate t)` on `[0, window_t)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemporalMode {
    pub shape: ModeShape,
    /// Amplitude decay rate (1/s).
    pub rate: f64,
    /// Window length (s); infinite for the emitted mode.
    pub window_t: f64,
    pub amplitude: f64,
}

impl TemporalMode {
    /// Normalization `2 rate / (1 - exp(-2 rate T))`, squared amplitude.
    fn normalized_amplitude(rate: f64, window: f64) -> f64 {
        (2.0 * rate / -(-2.0 * rate * window).exp_m1()).sqrt()
    }

    pub fn emitted(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(invalid_param(format!("envelope rate {rate} must be positive")));
        }
        Ok(Self {
            shape: ModeShape::EmittedExponential,
            rate,
            window_t: f64::INFINITY,
            amplitude: Self::normalized_amplitude(rate, f64::INFINITY),
        })
    }

    /// Normalized truncated exponential; `window = inf` allowed.
    pub fn lo(rate: f64, window: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(invalid_param(format!("envelope rate {rate} must be positive")));
        }
        if !(window > 0.0) {
            return Err(invalid_param(format!("LO window {window} must be positive")));
        }
        Ok(Self {
            shape: ModeShape::LoTruncatedExponential,
            rate,
            window_t: window,
            amplitude: Self::normalized_amplitude(rate, window),
        })
    }

    /// Replaces the prefactor; the result is generally not normalized.
    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn envelope(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.window_t {
            0.0
        } else {
            self.amplitude * (-self.rate * t).exp()
        }
    }

    /// `int |f|^2 dt` by quadrature.
    pub fn norm_sqr(&self) -> Result<f64> {
        integrate_scaled(self.rate, self.window_t, |t| self.envelope(t).powi(2))
    }
}

/// `int_0^window f dt`, integrated in units of `1/scale`.
fn integrate_scaled(scale: f64, window: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let g = |u: f64| f(u / scale) / scale;
    if window.is_finite() {
        integrate(g, 0.0, window * scale, QUAD_TOL)
    } else {
        integrate_to_infinity(g, 0.0, QUAD_TOL)
    }
}

/// `|int f_emit f_lo dt|^2` by adaptive quadrature over the common support.
pub fn mode_overlap(emitted: &TemporalMode, lo: &TemporalMode) -> Result<f64> {
    for (name, m) in [("emitted", emitted), ("LO", lo)] {
        let n = m.norm_sqr()?;
        if (n - 1.0).abs() > NORM_TOL {
            return Err(invalid_param(format!("{name} mode not normalized: norm {n}")));
        }
    }
    let window = emitted.window_t.min(lo.window_t);
    let amp = integrate_scaled(emitted.rate.max(lo.rate), window, |t| {
        emitted.envelope(t) * lo.envelope(t)
    })?;
    Ok((amp * amp).min(1.0))
}

/// `1 - exp(-Gamma T)` for a matched LO of length `T`.
pub fn matched_overlap_closed_form(gamma_rate: f64, window: f64) -> f64 {
    -(-gamma_rate * window).exp_m1()
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinewidthCheck {
    pub computed_linewidth_hz: f64,
    pub claimed_linewidth_hz: f64,
    pub relative_deviation: f64,
    pub consistent: bool,
}

/// Compares `1/(2 pi tau)` with a quoted linewidth at relative tolerance `rel_tol`.
pub fn linewidth_check(emitter: &EmitterParams, claimed_hz: f64, rel_tol: f64) -> LinewidthCheck {
    let computed = 1.0 / (TAU * emitter.lifetime_tau);
    let dev = (computed - claimed_hz).abs() / claimed_hz.abs();
    LinewidthCheck {
        computed_linewidth_hz: computed,
        claimed_linewidth_hz: claimed_hz,
        relative_deviation: dev,
        consistent: dev <= rel_tol,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyBudget {
    pub eta_collection: f64,
    pub eta_overlap: f64,
    pub eta_detector: f64,
    pub eta_total: f64,
    pub lo_phase: f64,
    pub input_variance: f64,
    pub input_db: f64,
    pub detected_variance: f64,
    pub detected_db: f64,
    /// Same quantity from the loss channel applied to the state.
    pub channel_variance: f64,
}

/// Inputs needed for [`detected_squeezing`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BudgetInputs {
    pub eta_collection: f64,
    pub emitted: TemporalMode,
    pub lo: TemporalMode,
    pub eta_detector: f64,
    pub source: SuperpositionSpec,
    /// LO phase; `None` selects the squeezed quadrature.
    pub lo_phase: Option<f64>,
}

pub fn detected_squeezing(inputs: &BudgetInputs) -> Result<EfficiencyBudget> {
    let eta_overlap = mode_overlap(&inputs.emitted, &inputs.lo)?;
    budget_with_overlap(
        inputs.eta_collection,
        eta_overlap,
        inputs.eta_detector,
        &inputs.source,
        inputs.lo_phase,
    )
}

fn budget_with_overlap(
    eta_collection: f64,
    eta_overlap: f64,
    eta_detector: f64,
    source: &SuperpositionSpec,
    lo_phase: Option<f64>,
) -> Result<EfficiencyBudget> {
    check_efficiency("eta_collection", eta_collection)?;
    check_efficiency("eta_overlap", eta_overlap)?;
    check_efficiency("eta_detector", eta_detector)?;
    let eta_total = eta_collection * eta_overlap * eta_detector;
    let phi = lo_phase.unwrap_or(source.rel_phase());
    let input_variance = source.variance_at(phi);
    let detected_variance = loss_variance(input_variance, eta_total);
    let rho = make_superposition(source).to_density();
    let channel_variance = quadrature_stats(&apply_loss(&rho, eta_total)?, phi).variance;
    if (channel_variance - detected_variance).abs() > CROSS_CHECK_TOL {
        return Err(Error::NumericFailure(format!(
            "loss identity {detected_variance} disagrees with channel {channel_variance}"
        )));
    }
    Ok(EfficiencyBudget {
        eta_collection,
        eta_overlap,
        eta_detector,
        eta_total,
        lo_phase: phi,
        input_variance,
        input_db: variance_to_db(input_variance)?,
        detected_variance,
        detected_db: variance_to_db(detected_variance)?,
        channel_variance,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub window_t: f64,
    pub eta_overlap: f64,
    pub detected_db: f64,
}

/// Overlap and detected squeezing for matched LO windows `t_grid`.
pub fn window_tradeoff(
    emitter: &EmitterParams,
    source: &SuperpositionSpec,
    eta_collection: f64,
    eta_detector: f64,
    t_grid: &[f64],
    exec: Execution,
) -> Result<Vec<WindowRow>> {
    if t_grid.is_empty() {
        return Err(invalid_param("window grid is empty"));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid_param("window grid must be positive and strictly ascending"));
    }
    let emitted = emitter.emitted_mode();
    exec.try_map_range(t_grid.len(), |k| {
        let lo = emitter.matched_lo(t_grid[k])?;
        let eta_overlap = mode_overlap(&emitted, &lo)?;
        let b = budget_with_overlap(eta_collection, eta_overlap, eta_detector, source, None)?;
        Ok(WindowRow {
            window_t: t_grid[k],
            eta_overlap,
            detected_db: b.detected_db,
        })
    })
}

/// LO linewidth needed to stay a fraction `ratio` of the atomic linewidth.
pub fn lo_linewidth_requirement(emitter: &EmitterParams, ratio: f64) -> Result<f64> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(invalid_param(format!("linewidth ratio {ratio} outside (0, 1)")));
    }
    Ok(ratio * emitter.linewidth_hz)
}
