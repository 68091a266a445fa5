use atomsqueeze::budget::{
    detected_squeezing, linewidth_check, matched_overlap_closed_form, window_tradeoff, BudgetInputs, EmitterParams,
    DEFAULT_LINEWIDTH_TOL,
};
use atomsqueeze::fock::{apply_loss, quadrature_stats, variance_to_db};
use atomsqueeze::homodyne::{estimate_variance, phase_scan, sample_quadratures, HomodyneRun, GENERATOR_ID};
use atomsqueeze::jc::{transient_sweep, AtomPrep, JCParams};
use atomsqueeze::superposition::{
    make_superposition, squeezing_region, superposition_variance, Quadrature, SuperpositionSpec,
};
use atomsqueeze::wigner::{wigner_at, wigner_of_state, GridSpec};
use atomsqueeze::{Execution, VACUUM_VARIANCE};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::output::{Report, Table};

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let exec = Execution::default();
    match cfg.command {
        Command::Variance => variance(cfg),
        Command::JcSweep => jc_sweep(cfg, exec),
        Command::Wigner => wigner(cfg, exec),
        Command::Homodyne => homodyne(cfg, exec),
        Command::PhaseScan => scan(cfg, exec),
        Command::Budget => budget(cfg),
        Command::WindowSweep => window_sweep(cfg, exec),
    }
}

fn source(cfg: &RunConfig) -> Result<SuperpositionSpec, CliError> {
    Ok(SuperpositionSpec::new(cfg.float("beta"), cfg.float("phi"))?)
}

fn variance(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = source(cfg)?;
    let lo_phase = cfg.opt_float("lo-phase").unwrap_or(spec.rel_phase());
    let v = spec.variance_at(lo_phase);
    Ok(Report {
        n_max: Some(1),
        ..Report::default()
    }
    .with("lo_phase", lo_phase)
    .with("variance", v)
    .with("db", variance_to_db(v)?)
    .with("min_variance", spec.min_variance())
    .with("variance_x1", superposition_variance(&spec, Quadrature::X1))
    .with("variance_x2", superposition_variance(&spec, Quadrature::X2))
    .with("squeezed", v < VACUUM_VARIANCE)
    .with("squeezing_region", squeezing_region(&spec)))
}

fn jc_sweep(cfg: &RunConfig, exec: Execution) -> Result<Report, CliError> {
    let prep = AtomPrep::new(cfg.float("theta"), cfg.float("phi"))?;
    let omega = cfg.float("omega");
    let params = JCParams::new(cfg.opt_float("omega0").unwrap_or(omega), omega, cfg.float("lambda"))?;
    let rows = transient_sweep(&prep, &params, cfg.float("t-max"), cfg.count("steps"), exec)?;
    let table = Table {
        columns: vec!["t", "variance_x1", "variance_x2", "db_x1", "db_x2"],
        rows: rows
            .iter()
            .map(|r| vec![r.t, r.variance_x1, r.variance_x2, r.db_x1, r.db_x2])
            .collect(),
    };
    Ok(Report {
        n_max: Some(1),
        table: Some(table),
        ..Report::default()
    })
}

fn wigner(cfg: &RunConfig, exec: Execution) -> Result<Report, CliError> {
    let rho = apply_loss(&make_superposition(&source(cfg)?).to_density(), cfg.float("eta"))?;
    let spec = GridSpec::square(cfg.float("half-width"), cfg.count("res"));
    let grid = wigner_of_state(&rho, &spec, exec)?;
    let mut rows = Vec::with_capacity(grid.values.len());
    for (i, &x1) in grid.x1.iter().enumerate() {
        for (j, &x2) in grid.x2.iter().enumerate() {
            rows.push(vec![x1, x2, grid.at(i, j)]);
        }
    }
    Ok(Report {
        n_max: Some(rho.n_max()),
        table: Some(Table {
            columns: vec!["x1", "x2", "w"],
            rows,
        }),
        ..Report::default()
    }
    .with("w_origin", wigner_at(&rho, 0.0, 0.0))
    .with("w_min", grid.values.iter().copied().fold(f64::INFINITY, f64::min))
    .with("integral", grid.integral)
    .with("integral_error", grid.integral_error))
}

fn homodyne(cfg: &RunConfig, exec: Execution) -> Result<Report, CliError> {
    let spec = source(cfg)?;
    let rho = make_superposition(&spec).to_density();
    let lo_phase = cfg.opt_float("lo-phase").unwrap_or(spec.rel_phase());
    let run = HomodyneRun::new(rho, lo_phase, cfg.float("eta"), cfg.count("samples"), cfg.seed()?)?;
    let samples = sample_quadratures(&run, exec)?;
    let est = estimate_variance(&samples)?;
    let analytic = quadrature_stats(&run.detected_state()?, lo_phase).variance;
    let table = cfg.flag("emit-samples").then(|| Table {
        columns: vec!["x"],
        rows: samples.iter().map(|&x| vec![x]).collect(),
    });
    Ok(Report {
        n_max: Some(run.state.n_max()),
        generator: Some(GENERATOR_ID),
        table,
        ..Report::default()
    }
    .with("lo_phase", lo_phase)
    .with("n", est.n)
    .with("mean_hat", est.mean_hat)
    .with("var_hat", est.var_hat)
    .with("std_error", est.std_error_of_var)
    .with("std_error_normal", est.std_error_normal)
    .with("db_hat", variance_to_db(est.var_hat)?)
    .with("analytic_variance", analytic)
    .with("analytic_db", variance_to_db(analytic)?)
    .with("z_score", (est.var_hat - analytic) / est.std_error_of_var))
}

fn scan(cfg: &RunConfig, exec: Execution) -> Result<Report, CliError> {
    let rho = make_superposition(&source(cfg)?).to_density();
    let rows = phase_scan(
        &rho,
        cfg.float("eta"),
        cfg.count("samples"),
        cfg.seed()?,
        cfg.count("phases"),
        exec,
    )?;
    let table = Table {
        columns: vec![
            "phi_lo",
            "var_hat",
            "std_error",
            "db_hat",
            "analytic_variance",
            "analytic_db",
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.phi_lo,
                    r.var_hat,
                    r.std_error,
                    r.db_hat,
                    r.analytic_variance,
                    r.analytic_db,
                ]
            })
            .collect(),
    };
    Ok(Report {
        n_max: Some(rho.n_max()),
        generator: Some(GENERATOR_ID),
        table: Some(table),
        ..Report::default()
    })
}

fn emitter(cfg: &RunConfig) -> Result<EmitterParams, CliError> {
    Ok(EmitterParams::from_lifetime(cfg.float("lifetime-ns") * 1e-9)?)
}

fn budget(cfg: &RunConfig) -> Result<Report, CliError> {
    let e = emitter(cfg)?;
    let lifetimes = cfg.float("window-lifetimes");
    let inputs = BudgetInputs {
        eta_collection: cfg.float("collection"),
        emitted: e.emitted_mode(),
        lo: e.matched_lo(lifetimes * e.lifetime_tau)?,
        eta_detector: cfg.float("detector"),
        source: source(cfg)?,
        lo_phase: cfg.opt_float("lo-phase"),
    };
    let b = detected_squeezing(&inputs)?;
    let lw = linewidth_check(&e, cfg.float("claimed-linewidth-khz") * 1e3, DEFAULT_LINEWIDTH_TOL);
    Ok(Report {
        n_max: Some(1),
        ..Report::default()
    }
    .with("gamma_rate", e.gamma_rate)
    .with("linewidth_hz", lw.computed_linewidth_hz)
    .with("linewidth_relative_deviation", lw.relative_deviation)
    .with("linewidth_consistent", lw.consistent)
    .with("eta_collection", b.eta_collection)
    .with("eta_overlap", b.eta_overlap)
    .with("eta_overlap_closed_form", matched_overlap_closed_form(1.0, lifetimes))
    .with("eta_detector", b.eta_detector)
    .with("eta_total", b.eta_total)
    .with("lo_phase", b.lo_phase)
    .with("input_variance", b.input_variance)
    .with("input_db", b.input_db)
    .with("detected_variance", b.detected_variance)
    .with("detected_db", b.detected_db))
}

fn window_sweep(cfg: &RunConfig, exec: Execution) -> Result<Report, CliError> {
    let e = emitter(cfg)?;
    let (from, to, steps) = (
        cfg.float("window-from"),
        cfg.float("window-to"),
        cfg.count("window-steps"),
    );
    if steps < 2 {
        return Err(CliError::param("window-steps", "`window-steps` must be at least 2"));
    }
    let lifetimes: Vec<f64> = (0..steps)
        .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
        .collect();
    let windows: Vec<f64> = lifetimes.iter().map(|l| l * e.lifetime_tau).collect();
    let rows = window_tradeoff(
        &e,
        &source(cfg)?,
        cfg.float("collection"),
        cfg.float("detector"),
        &windows,
        exec,
    )?;
    let table = Table {
        columns: vec!["window_lifetimes", "window_s", "eta_overlap", "detected_db"],
        rows: rows
            .iter()
            .zip(&lifetimes)
            .map(|(r, &l)| vec![l, r.window_t, r.eta_overlap, r.detected_db])
            .collect(),
    };
    Ok(Report {
        n_max: Some(1),
        table: Some(table),
        ..Report::default()
    })
}
