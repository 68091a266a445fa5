//! Monte-Carlo balanced homodyne detection.
//!
//! Samples are drawn from the exact quadrature distribution of the state
//! after the loss channel, by inverse-CDF lookup on a tabulated grid. The
//! random stream is ChaCha20 keyed by the run seed; the sample list is cut
//! into fixed-size shards and shard `k` reads ChaCha stream `k`, so the
//! output does not depend on how many threads ran.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};
use crate::exec::Execution;
use crate::fock::{apply_loss, check_efficiency, quadrature_stats, variance_to_db, FockDensity};
use crate::hermite::hermite_functions_into;

/// Identifier recorded in every sample dump and report.
pub const GENERATOR_ID: &str = "chacha20-stream-per-shard/u53";
pub const TABLE_POINTS: usize = 1 << 16;
pub const TABLE_HALF_WIDTH: f64 = 6.0;
pub const SHARD_SIZE: usize = 1 << 16;
pub const MIN_SAMPLES: usize = 100;

/// Quadrature distribution `p(x) = <x| R rho R† |x>` with `R = e^{-i phi N}`.
#[derive(Clone, Debug)]
pub struct MarginalDensity {
    phi_lo: f64,
    diag: Vec<f64>,
    /// `2 Re(rho~_{mn})` for `m < n`, row-major over the upper triangle.
    upper: Vec<f64>,
    dim: usize,
}

impl MarginalDensity {
    pub fn new(state: &FockDensity, phi_lo: f64) -> Self {
        let rotated = state.rotated(phi_lo);
        let dim = rotated.dim();
        let diag = (0..dim).map(|n| rotated.get(n, n).re).collect();
        let mut upper = Vec::with_capacity(dim * (dim - 1) / 2);
        for m in 0..dim {
            for n in m + 1..dim {
                upper.push(2.0 * rotated.get(m, n).re);
            }
        }
        Self {
            phi_lo,
            diag,
            upper,
            dim,
        }
    }

    pub fn phi_lo(&self) -> f64 {
        self.phi_lo
    }

    fn eval_with(&self, x: f64, buf: &mut [f64]) -> f64 {
        hermite_functions_into(x, buf);
        let mut p = 0.0;
        let mut k = 0;
        for m in 0..self.dim {
            p += self.diag[m] * buf[m] * buf[m];
            for n in m + 1..self.dim {
                p += self.upper[k] * buf[m] * buf[n];
                k += 1;
            }
        }
        p
    }

    pub fn density(&self, x: f64) -> f64 {
        let mut buf = vec![0.0; self.dim];
        self.eval_with(x, &mut buf)
    }
}

pub fn marginal_density(state: &FockDensity, phi_lo: f64) -> MarginalDensity {
    MarginalDensity::new(state, phi_lo)
}

/// Tabulated CDF with cubic Hermite interpolation between nodes.
#[derive(Clone, Debug)]
pub struct CdfTable {
    x0: f64,
    step: f64,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
}

impl CdfTable {
    /// Tabulates on `points` nodes over `[-half_width, half_width]`. Interval
    /// masses use Simpson's rule with a midpoint evaluation.
    pub fn new(density: &MarginalDensity, points: usize, half_width: f64, exec: Execution) -> Result<Self> {
        if points < 3 || !(half_width > 0.0) {
            return Err(invalid_param("CDF table needs >= 3 points and a positive range"));
        }
        let step = 2.0 * half_width / (points - 1) as f64;
        let x0 = -half_width;
        // node values at even indices, midpoints at odd ones
        let fine = exec.map_range(2 * points - 1, |k| {
            let mut buf = vec![0.0; density.dim];
            density.eval_with(x0 + 0.5 * step * k as f64, &mut buf).max(0.0)
        });
        let pdf: Vec<f64> = fine.iter().step_by(2).copied().collect();
        let mut cdf = Vec::with_capacity(points);
        cdf.push(0.0);
        for i in 0..points - 1 {
            let mass = step / 6.0 * (fine[2 * i] + 4.0 * fine[2 * i + 1] + fine[2 * i + 2]);
            cdf.push(cdf[i] + mass);
        }
        let total = cdf[points - 1];
        if !(total > 0.0) {
            return Err(Error::NumericFailure(
                "quadrature distribution has no mass on the table range".into(),
            ));
        }
        for v in cdf.iter_mut() {
            *v /= total;
        }
        let pdf = pdf.into_iter().map(|p| p / total).collect();
        Ok(Self { x0, step, cdf, pdf })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    fn hermite(&self, i: usize, t: f64) -> (f64, f64) {
        let (f0, f1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.pdf[i] * self.step, self.pdf[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        let value =
            (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * m1;
        let slope = (6.0 * t2 - 6.0 * t) * f0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (6.0 * t - 6.0 * t2) * f1
            + (3.0 * t2 - 2.0 * t) * m1;
        (value, slope)
    }

    /// Interpolated CDF at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let u = (x - self.x0) / self.step;
        if u <= 0.0 {
            return 0.0;
        }
        let last = self.len() - 1;
        if u >= last as f64 {
            return 1.0;
        }
        let i = (u.floor() as usize).min(last - 1);
        self.hermite(i, u - i as f64).0.clamp(0.0, 1.0)
    }

    /// Inverse CDF for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let last = self.len() - 1;
        // first node with cdf > u
        let hi = self.cdf.partition_point(|&c| c <= u).clamp(1, last);
        let i = hi - 1;
        let (f0, f1) = (self.cdf[i], self.cdf[i + 1]);
        let (mut a, mut b) = (0.0, 1.0);
        let mut t = if f1 > f0 {
            ((u - f0) / (f1 - f0)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        for _ in 0..60 {
            let (v, s) = self.hermite(i, t);
            let r = v - u;
            if r.abs() <= 1e-15 {
                break;
            }
            if r > 0.0 {
                b = t
            } else {
                a = t
            }
            let newton = if s > 0.0 { t - r / s } else { f64::NAN };
            t = if newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if b - a < 1e-15 {
                break;
            }
        }
        self.x0 + self.step * (i as f64 + t)
    }
}

/// Uniform deviate in `(0, 1)` from the top 53 bits.
fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone, Debug)]
pub struct HomodyneRun {
    pub state: FockDensity,
    pub phi_lo: f64,
    pub eta_total: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl HomodyneRun {
    pub fn new(state: FockDensity, phi_lo: f64, eta_total: f64, n_samples: usize, seed: u64) -> Result<Self> {
        check_efficiency("eta_total", eta_total)?;
        if n_samples < MIN_SAMPLES {
            return Err(invalid_param(format!(
                "n_samples = {n_samples} below minimum {MIN_SAMPLES}"
            )));
        }
        if !phi_lo.is_finite() {
            return Err(invalid_param("LO phase must be finite"));
        }
        Ok(Self {
            state,
            phi_lo,
            eta_total,
            n_samples,
            seed,
        })
    }

    /// State seen by the detector.
    pub fn detected_state(&self) -> Result<FockDensity> {
        apply_loss(&self.state, self.eta_total)
    }

    /// Tabulated distribution actually sampled.
    pub fn table(&self, exec: Execution) -> Result<CdfTable> {
        let lossy = self.detected_state()?;
        CdfTable::new(
            &marginal_density(&lossy, self.phi_lo),
            TABLE_POINTS,
            TABLE_HALF_WIDTH,
            exec,
        )
    }
}

/// Draws `run.n_samples` quadrature values; shards read stream
/// `(stream_group << 32) | shard`.
pub fn sample_from_table(
    table: &CdfTable,
    n_samples: usize,
    seed: u64,
    stream_group: u32,
    exec: Execution,
) -> Vec<f64> {
    let shards = n_samples.div_ceil(SHARD_SIZE);
    exec.map_range(shards, |k| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(((stream_group as u64) << 32) | k as u64);
        let len = SHARD_SIZE.min(n_samples - k * SHARD_SIZE);
        (0..len).map(|_| table.quantile(uniform(&mut rng))).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

pub fn sample_quadratures(run: &HomodyneRun, exec: Execution) -> Result<Vec<f64>> {
    let table = run.table(exec)?;
    Ok(sample_from_table(&table, run.n_samples, run.seed, 0, exec))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub mean_hat: f64,
    pub var_hat: f64,
    /// From the fourth central moment.
    pub std_error_of_var: f64,
    /// Normal-theory `sqrt(2 var^2 / (n - 1))`, for comparison.
    pub std_error_normal: f64,
    pub n: usize,
}

/// Unbiased sample variance with a fourth-moment standard error
/// `sqrt((m4 - var^2 (n-3)/(n-1)) / n)`.
pub fn estimate_variance(samples: &[f64]) -> Result<VarianceEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(invalid_param(format!("need at least 2 samples, got {n}")));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in samples {
        let d = (x - mean) * (x - mean);
        m2 += d;
        m4 += d * d;
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return Err(Error::DegenerateData("all samples are equal".into()));
    }
    let var = m2 / (nf - 1.0);
    let m4 = m4 / nf;
    let se = ((m4 - var * var * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0).sqrt();
    Ok(VarianceEstimate {
        mean_hat: mean,
        var_hat: var,
        std_error_of_var: se,
        std_error_normal: (2.0 * var * var / (nf - 1.0)).sqrt(),
        n,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseScanRow {
    pub phi_lo: f64,
    pub var_hat: f64,
    pub db_hat: f64,
    pub std_error: f64,
    pub analytic_variance: f64,
    pub analytic_db: f64,
}

pub const MIN_PHASES: usize = 4;

/// Variance estimates on `n_phases` LO phases uniform in `[0, 2pi)`.
/// Phase `k` samples stream group `k`.
pub fn phase_scan(
    state: &FockDensity,
    eta: f64,
    n_samples: usize,
    seed: u64,
    n_phases: usize,
    exec: Execution,
) -> Result<Vec<PhaseScanRow>> {
    if n_phases < MIN_PHASES {
        return Err(invalid_param(format!(
            "phase scan needs at least {MIN_PHASES} phases, got {n_phases}"
        )));
    }
    let lossy = {
        check_efficiency("eta", eta)?;
        apply_loss(state, eta)?
    };
    if n_samples < MIN_SAMPLES {
        return Err(invalid_param(format!(
            "n_samples = {n_samples} below minimum {MIN_SAMPLES}"
        )));
    }
    let mut rows = Vec::with_capacity(n_phases);
    for k in 0..n_phases {
        let phi = std::f64::consts::TAU * k as f64 / n_phases as f64;
        let table = CdfTable::new(&marginal_density(&lossy, phi), TABLE_POINTS, TABLE_HALF_WIDTH, exec)?;
        let samples = sample_from_table(&table, n_samples, seed, k as u32, exec);
        let est = estimate_variance(&samples)?;
        let analytic = quadrature_stats(&lossy, phi).variance;
        rows.push(PhaseScanRow {
            phi_lo: phi,
            var_hat: est.var_hat,
            db_hat: variance_to_db(est.var_hat)?,
            std_error: est.std_error_of_var,
            analytic_variance: analytic,
            analytic_db: variance_to_db(analytic)?,
        });
    }
    Ok(rows)
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(0.5 * alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockVector;
    use crate::quad::integrate;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn optimal() -> FockDensity {
        FockVector::from_real(&[0.75f64.sqrt(), 0.5]).unwrap().to_density()
    }

    fn moments(p: &MarginalDensity) -> (f64, f64, f64) {
        let norm = integrate(|x| p.density(x), -8.0, 8.0, 1e-14).unwrap();
        let mean = integrate(|x| x * p.density(x), -8.0, 8.0, 1e-14).unwrap();
        let second = integrate(|x| x * x * p.density(x), -8.0, 8.0, 1e-14).unwrap();
        (norm, mean, second - mean * mean)
    }

    #[test]
    fn density_examples() {
        let vac = marginal_density(&FockDensity::vacuum(2), 0.3);
        assert_abs_diff_eq!(vac.density(0.0), (2.0 / PI).sqrt(), epsilon = 1e-15);

        let one = marginal_density(&FockDensity::number(1, 2).unwrap(), 0.0);
        assert_eq!(one.density(0.0), 0.0);
        for x in [-1.2, 0.3, 0.8] {
            let expected = (2.0 / PI).sqrt() * 4.0 * x * x * (-2.0 * x * x).exp();
            assert_abs_diff_eq!(one.density(x), expected, epsilon = 1e-15);
        }
        let (norm, _, _) = moments(&one);
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);

        let (norm, _, var) = moments(&marginal_density(&optimal(), 0.0));
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(var, 3.0 / 16.0, epsilon = 1e-9);
    }

    #[test]
    fn density_moments_match_algebra() {
        let v = FockVector::new(&[
            crate::C64::new(0.5, 0.1),
            crate::C64::new(-0.3, 0.4),
            crate::C64::new(0.2, -0.6),
            crate::C64::new(0.1, 0.2),
        ])
        .unwrap();
        let rho = apply_loss(&v.to_density(), 0.7).unwrap();
        for phi in [0.0, 0.4, FRAC_PI_2, 2.5] {
            let p = marginal_density(&rho, phi);
            let (norm, mean, var) = moments(&p);
            let s = quadrature_stats(&rho, phi);
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(mean, s.mean, epsilon = 1e-9);
            assert_abs_diff_eq!(var, s.variance, epsilon = 1e-9);
            for x in [-2.0, -0.5, 0.0, 0.7, 1.9] {
                assert!(p.density(x) >= -1e-12);
            }
        }
    }

    #[test]
    fn table_cdf_is_accurate() {
        // vacuum CDF is the normal CDF with sigma = 1/2
        let table = CdfTable::new(
            &marginal_density(&FockDensity::vacuum(1), 0.0),
            TABLE_POINTS,
            6.0,
            Execution::default(),
        )
        .unwrap();
        for x in [-1.3, -0.4, -0.01, 0.0, 0.25, 0.9, 1.7] {
            let exact = 0.5 * (1.0 + statrs::function::erf::erf(x * 2f64.sqrt()));
            assert_abs_diff_eq!(table.cdf(x), exact, epsilon = 1e-9);
            assert_abs_diff_eq!(table.quantile(exact), x, epsilon = 1e-9);
        }
    }

    #[test]
    fn vacuum_sampling() {
        for seed in [1, 2, 3] {
            let run = HomodyneRun::new(FockDensity::vacuum(1), 0.0, 1.0, 20_000, seed).unwrap();
            let est = estimate_variance(&sample_quadratures(&run, Execution::default()).unwrap()).unwrap();
            assert!((est.var_hat - 0.25).abs() < 5.0 * est.std_error_of_var);
        }
    }

    #[test]
    fn sampling_is_reproducible_and_thread_independent() {
        let run = HomodyneRun::new(optimal(), 0.0, 0.9, 150_000, 42).unwrap();
        let a = sample_quadratures(&run, Execution::Sequential).unwrap();
        let b = sample_quadratures(&run, Execution::default()).unwrap();
        assert_eq!(a.len(), 150_000);
        assert_eq!(a, b);
        let other = HomodyneRun {
            seed: 43,
            ..run.clone()
        };
        assert_ne!(a, sample_quadratures(&other, Execution::default()).unwrap());
    }

    #[test]
    fn run_validation() {
        assert!(matches!(
            HomodyneRun::new(optimal(), 0.0, 1.2, 1000, 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(HomodyneRun::new(optimal(), 0.0, -0.1, 1000, 1).is_err());
        assert!(HomodyneRun::new(optimal(), 0.0, 1.0, 99, 1).is_err());
        assert!(phase_scan(&optimal(), 1.0, 1000, 1, 3, Execution::default()).is_err());
    }

    #[test]
    fn full_loss_collapses_to_vacuum() {
        let run = HomodyneRun::new(optimal(), 0.0, 0.0, 5000, 9).unwrap();
        let vac = HomodyneRun::new(FockDensity::vacuum(1), 0.0, 1.0, 5000, 9).unwrap();
        let a = sample_quadratures(&run, Execution::default()).unwrap();
        let b = sample_quadratures(&vac, Execution::default()).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
    }

    #[test]
    fn estimator_examples() {
        let est = estimate_variance(&[1.0, -1.0]).unwrap();
        assert_eq!(est.var_hat, 2.0);
        assert_eq!(est.mean_hat, 0.0);
        assert!(matches!(estimate_variance(&[0.3; 200]), Err(Error::DegenerateData(_))));
        assert!(estimate_variance(&[1.0]).is_err());

        // exact small sample: {0, 1, 2, 3}: var 5/3, m4 = (81/16 + 1/16)*2/4 = 41/16
        let est = estimate_variance(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(est.var_hat, 5.0 / 3.0, epsilon = 1e-15);
        let se2: f64 = (41.0 / 16.0 - (25.0 / 9.0) * (1.0 / 3.0)) / 4.0;
        assert_abs_diff_eq!(est.std_error_of_var, se2.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn phase_scan_structure() {
        let rows = phase_scan(&optimal(), 1.0, 20_000, 5, 8, Execution::default()).unwrap();
        assert_eq!(rows.len(), 8);
        let min = rows
            .iter()
            .min_by(|a, b| a.analytic_variance.total_cmp(&b.analytic_variance))
            .unwrap();
        assert!(min.phi_lo == 0.0 || (min.phi_lo - PI).abs() < 1e-12);
        let max = rows
            .iter()
            .max_by(|a, b| a.analytic_variance.total_cmp(&b.analytic_variance))
            .unwrap();
        assert!((max.phi_lo - FRAC_PI_2).abs() < 1e-12 || (max.phi_lo - 1.5 * PI).abs() < 1e-12);
        for r in &rows {
            assert!((r.var_hat - r.analytic_variance).abs() < 5.0 * r.std_error);
        }

        let vac = phase_scan(&FockDensity::vacuum(1), 1.0, 5_000, 5, 4, Execution::default()).unwrap();
        assert!(vac.iter().all(|r| (r.analytic_variance - 0.25).abs() < 1e-15));

        let b = (1.0f64 / 3.0).sqrt();
        let rotated = FockVector::new(&[crate::C64::new((1.0 - b * b).sqrt(), 0.0), crate::C64::new(0.0, b)])
            .unwrap()
            .to_density();
        let rows = phase_scan(&rotated, 1.0, 1_000, 5, 16, Execution::default()).unwrap();
        let min = rows
            .iter()
            .min_by(|a, b| a.analytic_variance.total_cmp(&b.analytic_variance))
            .unwrap();
        let spacing = std::f64::consts::TAU / 16.0;
        let d = (min.phi_lo - FRAC_PI_2).abs().min((min.phi_lo - 1.5 * PI).abs());
        assert!(d <= spacing);
    }

    #[test]
    fn ks_helpers() {
        assert_abs_diff_eq!(ks_critical_value(1, 0.001), 1.949_5, epsilon = 1e-4);
        let d = ks_statistic(&[0.1, 0.5, 0.9], |x| x);
        assert_abs_diff_eq!(d, 7.0 / 30.0, epsilon = 1e-15);
        let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&grid, |x| x) <= 0.5e-3 + 1e-12);
    }
}
