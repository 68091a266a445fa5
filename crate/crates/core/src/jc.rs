//! Resonant Jaynes-Cummings dynamics of one atom and one field mode.
//!
//! Energies are measured from `|g,0>`, so the free part of the Hamiltonian
//! is `omega0 |e><e| + omega a†a` and the atom prepared in
//! `cos(theta/2)|e,0> + e^{i phi} sin(theta/2)|g,0>` evolves to
//!
//! ```text
//! cos(theta/2) cos(lambda t) e^{-i omega t} |e,0> + e^{i phi} sin(theta/2) |g,0>
//!   - i cos(theta/2) sin(lambda t) e^{-i omega t} |g,1>
//! ```
//!
//! Field statistics are taken in the frame rotating at `omega` (the LO is
//! phase-locked to the carrier), where the `e^{-i omega t}` factors drop.
//!
//! `phi` here is the atomic preparation phase. It is distinct from the LO
//! phase: for `theta = 2pi/3, phi = pi/2` the squeezing shows up in `X1`,
//! whereas the bare superposition `gamma|0> + beta|1>` squeezes `X1` at
//! relative phase 0. The offset is the `-i` on the `|g,1>` amplitude; see
//! [`emitted_superposition`].

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};
use crate::exec::Execution;
use crate::fock::{min_quadrature_variance, quadrature_stats, variance_to_db, FockDensity, QuadratureStats};
use crate::superposition::SuperpositionSpec;
use crate::{C64, VACUUM_VARIANCE};

/// Truncation used by [`numeric_evolve`] to detect leakage out of the
/// single-excitation manifold.
pub const NUMERIC_N_MAX: usize = 4;
/// Default integrator step in units of `1/lambda`.
pub const DEFAULT_STEP: f64 = 0.01;

/// Bloch angles of the initial atomic state.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomPrep {
    theta: f64,
    phi: f64,
}

impl AtomPrep {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        for (name, x) in [("theta", theta), ("phi", phi)] {
            if !(0.0..TAU).contains(&x) {
                return Err(invalid_param(format!("{name} = {x} outside [0, 2pi)")));
            }
        }
        Ok(Self { theta, phi })
    }

    /// Reduces both angles into `[0, 2pi)` first.
    pub fn wrapped(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(invalid_param("preparation angles must be finite"));
        }
        let wrap = |x: f64| {
            let r = x.rem_euclid(TAU);
            if r >= TAU {
                0.0
            } else {
                r
            }
        };
        Self::new(wrap(theta), wrap(phi))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(cos(theta/2), sin(theta/2))`.
    fn half_angles(&self) -> (f64, f64) {
        let (s, c) = (0.5 * self.theta).sin_cos();
        (c, s)
    }

    /// Atomic amplitudes `(c_e, c_g)`.
    pub fn atom_amplitudes(&self) -> (C64, C64) {
        let (c, s) = self.half_angles();
        (C64::new(c, 0.0), C64::from_polar(s, self.phi))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JCParams {
    pub omega0: f64,
    pub omega: f64,
    pub lambda: f64,
}

impl JCParams {
    pub fn new(omega0: f64, omega: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid_param(format!("coupling lambda = {lambda} must be positive")));
        }
        if !omega0.is_finite() || !omega.is_finite() {
            return Err(invalid_param("frequencies must be finite"));
        }
        Ok(Self { omega0, omega, lambda })
    }

    pub fn resonant(omega: f64, lambda: f64) -> Result<Self> {
        Self::new(omega, omega, lambda)
    }

    pub fn is_resonant(&self) -> bool {
        (self.omega0 - self.omega).abs() <= 1e-12 * self.omega0.abs().max(self.omega.abs())
    }

    fn require_resonance(&self) -> Result<()> {
        if self.is_resonant() {
            Ok(())
        } else {
            Err(Error::NotSupported(format!(
                "detuned evolution (omega0 = {}, omega = {}) is not modeled",
                self.omega0, self.omega
            )))
        }
    }
}

/// Joint amplitudes over `{e, g} x {0..=n_max}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointAtomFieldState {
    pub amp_e: Vec<C64>,
    pub amp_g: Vec<C64>,
}

impl JointAtomFieldState {
    /// Atom prepared per `prep`, field in vacuum.
    pub fn initial(prep: &AtomPrep, n_max: usize) -> Self {
        let (ce, cg) = prep.atom_amplitudes();
        let mut amp_e = vec![C64::new(0.0, 0.0); n_max + 1];
        let mut amp_g = amp_e.clone();
        amp_e[0] = ce;
        amp_g[0] = cg;
        Self { amp_e, amp_g }
    }

    pub fn n_max(&self) -> usize {
        self.amp_e.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_e.iter().chain(self.amp_g.iter()).map(|c| c.norm_sqr()).sum()
    }

    pub fn excited_population(&self) -> f64 {
        self.amp_e.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Removes the free evolution `e^{-i omega K t}`, `K` the excitation number.
    pub fn to_rotating_frame(&self, omega: f64, t: f64) -> Self {
        let phase = |k: usize| C64::from_polar(1.0, omega * k as f64 * t);
        Self {
            amp_e: self.amp_e.iter().enumerate().map(|(n, c)| c * phase(n + 1)).collect(),
            amp_g: self.amp_g.iter().enumerate().map(|(n, c)| c * phase(n)).collect(),
        }
    }

    /// Partial trace over the atom.
    pub fn reduced_field(&self) -> Result<FockDensity> {
        let dim = self.amp_e.len();
        let matrix = DMatrix::from_fn(dim, dim, |m, n| {
            self.amp_e[m] * self.amp_e[n].conj() + self.amp_g[m] * self.amp_g[n].conj()
        });
        FockDensity::new(matrix)
    }

    fn to_vector(&self) -> DVector<C64> {
        DVector::from_iterator(
            2 * self.amp_e.len(),
            self.amp_e.iter().chain(self.amp_g.iter()).copied(),
        )
    }

    fn from_vector(v: &DVector<C64>) -> Self {
        let half = v.len() / 2;
        Self {
            amp_e: v.iter().take(half).copied().collect(),
            amp_g: v.iter().skip(half).copied().collect(),
        }
    }

    /// Largest amplitude difference to `other` (same truncation assumed,
    /// missing entries compare as zero).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let get = |v: &[C64], i: usize| v.get(i).copied().unwrap_or_default();
        let len = self.amp_e.len().max(other.amp_e.len());
        (0..len)
            .map(|i| {
                (get(&self.amp_e, i) - get(&other.amp_e, i))
                    .norm()
                    .max((get(&self.amp_g, i) - get(&other.amp_g, i)).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Frame-independent part of the closed-form evolution, with field truncated at 1.
fn rotating_frame_state(prep: &AtomPrep, lambda_t: f64) -> JointAtomFieldState {
    let (c, s) = prep.half_angles();
    let (sin_l, cos_l) = lambda_t.sin_cos();
    JointAtomFieldState {
        amp_e: vec![C64::new(c * cos_l, 0.0), C64::new(0.0, 0.0)],
        amp_g: vec![C64::from_polar(s, prep.phi), C64::new(0.0, -c * sin_l)],
    }
}

/// Closed-form resonant evolution (laboratory frame).
pub fn evolve_resonant(prep: &AtomPrep, params: &JCParams, t: f64) -> Result<JointAtomFieldState> {
    params.require_resonance()?;
    Ok(rotating_frame_state(prep, params.lambda * t).to_rotating_frame(params.omega, -t))
}

/// Hamiltonian in the frame rotating at `omega`, basis `e_0..e_N, g_0..g_N`.
fn rotating_hamiltonian(params: &JCParams, n_max: usize) -> DMatrix<C64> {
    let dim = n_max + 1;
    let mut h = DMatrix::zeros(2 * dim, 2 * dim);
    for n in 0..dim {
        h[(n, n)] = C64::new(params.omega0 - params.omega, 0.0);
    }
    // lambda (a† sigma_- + sigma_+ a): |e,n> <-> |g,n+1> with sqrt(n+1)
    for n in 0..n_max {
        let g = C64::new(params.lambda * ((n + 1) as f64).sqrt(), 0.0);
        h[(dim + n + 1, n)] = g;
        h[(n, dim + n + 1)] = g;
    }
    h
}

/// Fixed-step RK4 integration of the Schrodinger equation.
///
/// The free part `omega K` is integrated exactly (interaction picture) so the
/// step only has to resolve `lambda`; the result is returned in the
/// laboratory frame for comparison with [`evolve_resonant`].
pub fn numeric_evolve(prep: &AtomPrep, params: &JCParams, t: f64, dt: f64) -> Result<JointAtomFieldState> {
    params.require_resonance()?;
    if !(dt > 0.0) || dt > DEFAULT_STEP / params.lambda * (1.0 + 1e-12) {
        return Err(invalid_param(format!(
            "step dt = {dt} must lie in (0, {}/lambda]",
            DEFAULT_STEP
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid_param(format!("time t = {t} must be finite and non-negative")));
    }
    let initial = JointAtomFieldState::initial(prep, NUMERIC_N_MAX);
    if t == 0.0 {
        return Ok(initial);
    }
    let h = rotating_hamiltonian(params, NUMERIC_N_MAX);
    let minus_i = C64::new(0.0, -1.0);
    let deriv = |v: &DVector<C64>| (&h * v) * minus_i;
    let steps = (t / dt).ceil().max(1.0) as usize;
    let step = t / steps as f64;
    let half = C64::new(0.5 * step, 0.0);
    let full = C64::new(step, 0.0);
    let sixth = C64::new(step / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let mut psi = initial.to_vector();
    for _ in 0..steps {
        let k1 = deriv(&psi);
        let k2 = deriv(&(&psi + &k1 * half));
        let k3 = deriv(&(&psi + &k2 * half));
        let k4 = deriv(&(&psi + &k3 * full));
        psi += (k1 + k2 * two + k3 * two + k4) * sixth;
    }
    Ok(JointAtomFieldState::from_vector(&psi).to_rotating_frame(params.omega, -t))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldVariances {
    pub x1: f64,
    pub x2: f64,
}

/// `(Delta X1)^2` and `(Delta X2)^2` in closed form.
pub fn closed_form_variances(prep: &AtomPrep, lambda_t: f64) -> FieldVariances {
    let (c, s) = prep.half_angles();
    let amp = c * c * lambda_t.sin().powi(2);
    let (sin_p, cos_p) = prep.phi.sin_cos();
    FieldVariances {
        x1: VACUUM_VARIANCE + amp * (0.5 - sin_p * sin_p * s * s),
        x2: VACUUM_VARIANCE + amp * (0.5 - cos_p * cos_p * s * s),
    }
}

/// Reduced field state at `lambda t` in the rotating frame.
pub fn field_state(prep: &AtomPrep, lambda_t: f64) -> Result<FockDensity> {
    rotating_frame_state(prep, lambda_t).reduced_field()
}

/// Quadrature variances of the emitted field from the reduced density matrix.
pub fn field_variances(prep: &AtomPrep, params: &JCParams, t: f64) -> Result<FieldVariances> {
    let lab = evolve_resonant(prep, params, t)?;
    let rho = lab.to_rotating_frame(params.omega, t).reduced_field()?;
    Ok(FieldVariances {
        x1: quadrature_stats(&rho, 0.0).variance,
        x2: quadrature_stats(&rho, std::f64::consts::FRAC_PI_2).variance,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub variance_x1: f64,
    pub variance_x2: f64,
    pub db_x1: f64,
    pub db_x2: f64,
}

/// Field variances on `steps` uniformly spaced times in `[0, t_max]`.
pub fn transient_sweep(
    prep: &AtomPrep,
    params: &JCParams,
    t_max: f64,
    steps: usize,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    if steps < 2 {
        return Err(invalid_param(format!("sweep needs at least 2 steps, got {steps}")));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(invalid_param(format!("t_max = {t_max} must be positive")));
    }
    params.require_resonance()?;
    exec.try_map_range(steps, |k| {
        let t = t_max * k as f64 / (steps - 1) as f64;
        let v = field_variances(prep, params, t)?;
        Ok(SweepRow {
            t,
            variance_x1: v.x1,
            variance_x2: v.x2,
            db_x1: variance_to_db(v.x1)?,
            db_x2: variance_to_db(v.x2)?,
        })
    })
}

/// The field superposition emitted at `lambda t = pi/2`, written as
/// `gamma|0> + beta|1>` with `gamma >= 0`.
///
/// The rotating-frame field is `e^{i phi} s|0> - i c|1>` with
/// `c = cos(theta/2)`, `s = sin(theta/2) >= 0`. Removing the global phase
/// gives `|beta| = |c|` and relative phase `-phi - pi/2` (`+pi` if `c < 0`).
/// Its squeezed LO phase is the relative phase modulo `pi`.
pub fn emitted_superposition(prep: &AtomPrep) -> SuperpositionSpec {
    let (c, _) = prep.half_angles();
    let mut psi = -prep.phi - 0.5 * PI;
    if c < 0.0 {
        psi += PI;
    }
    SuperpositionSpec::new(c.abs().min(1.0), psi.rem_euclid(TAU)).expect("valid superposition")
}

/// Smallest field variance over `lambda t` in `[0, pi]` (`steps` points) and
/// all LO phases. Returns `(lambda t, stats)`.
pub fn transient_minimum(prep: &AtomPrep, steps: usize) -> Result<(f64, QuadratureStats)> {
    let mut best: Option<(f64, QuadratureStats)> = None;
    for k in 0..steps.max(2) {
        let lt = PI * k as f64 / (steps.max(2) - 1) as f64;
        let stats = min_quadrature_variance(&field_state(prep, lt)?);
        if best.is_none_or(|(_, b)| stats.variance < b.variance) {
            best = Some((lt, stats));
        }
    }
    Ok(best.expect("non-empty scan"))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipoleCheck {
    /// `<[D†, D]>`.
    pub commutator: f64,
    /// Normally ordered variance `:(Delta D1)^2:`.
    pub normal_variance_d1: f64,
    /// Both quantities negative.
    pub field_squeezing_predicted: bool,
}

/// Dipole-squeezing criterion for `D = |g><e| = D1 + i D2`, evaluated with
/// explicit 2x2 operators in the basis `(|e>, |g>)`.
pub fn dipole_squeezing_check(prep: &AtomPrep) -> DipoleCheck {
    let (ce, cg) = prep.atom_amplitudes();
    let psi = Vector2::new(ce, cg);
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let d = Matrix2::new(zero, zero, one, zero);
    let dd = d.adjoint();
    let expect = |op: &Matrix2<C64>| psi.dotc(&(op * psi));
    let commutator = expect(&(dd * d - d * dd)).re;
    // :D1^2: = (D^2 + D†^2 + 2 D† D)/4
    let normal_sq = expect(&((d * d + dd * dd + dd * d * C64::new(2.0, 0.0)) * C64::new(0.25, 0.0))).re;
    let mean_d1 = expect(&((d + dd) * C64::new(0.5, 0.0))).re;
    let normal_variance_d1 = normal_sq - mean_d1 * mean_d1;
    DipoleCheck {
        commutator,
        normal_variance_d1,
        field_squeezing_predicted: commutator < 0.0 && normal_variance_d1 < -crate::superposition::SQUEEZING_MARGIN,
    }
}
