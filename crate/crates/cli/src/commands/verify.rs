//! Numeric verification suites behind the `vacuum`, `evolve` and `madelung`
//! commands: error tables, convergence slopes and pass/fail rows.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use jetcartan::numerics::{
    continuity_residual, convergence_order, evolve_direct_series, evolve_split,
    madelung_residuals, solve_vacuum_bvp, EvolutionConfig, Field, Grid1D, NumericsError,
};
use jetcartan::report::{VerifyReport, VerifyRow};

use crate::config::{ConfigError, GridExpr, ScenarioConfig};

pub enum VerifyError {
    Config(String),
    Numeric(NumericsError),
}

impl From<ConfigError> for VerifyError {
    fn from(e: ConfigError) -> Self {
        VerifyError::Config(e.to_string())
    }
}

impl From<NumericsError> for VerifyError {
    fn from(e: NumericsError) -> Self {
        VerifyError::Numeric(e)
    }
}

fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, VerifyError> {
    field
        .as_ref()
        .ok_or_else(|| VerifyError::Config(format!("scenario is missing `{}`", name)))
}

fn steps_for(cfg: &ScenarioConfig, idx: usize, default_divisor: usize) -> usize {
    match &cfg.steps {
        Some(steps) => steps[idx.min(steps.len() - 1)],
        None => (cfg.resolutions[idx] / default_divisor).max(8),
    }
}

fn sample_complex(
    grid: Grid1D,
    expr: &GridExpr,
    t: f64,
) -> Result<Field<Complex64>, VerifyError> {
    let mut values = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        values.push(expr.eval_complex(grid.x(i), t)?);
    }
    let boundary = (
        expr.eval_complex(grid.x_min, t)?,
        expr.eval_complex(grid.x_max, t)?,
    );
    Ok(Field::new(grid, values, boundary)?)
}

fn sample_vacuum(
    grid: Grid1D,
    expr: &GridExpr,
    perturb: f64,
) -> Result<Field<f64>, VerifyError> {
    let factor = |x: f64| 1.0 + perturb * x.sin();
    let mut values = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let x = grid.x(i);
        values.push(expr.eval_real(x, 0.0)? * factor(x));
    }
    let boundary = (
        expr.eval_real(grid.x_min, 0.0)? * factor(grid.x_min),
        expr.eval_real(grid.x_max, 0.0)? * factor(grid.x_max),
    );
    Ok(Field::new(grid, values, boundary)?)
}

pub fn run_vacuum(cfg: &ScenarioConfig, seed: u64) -> Result<VerifyReport, VerifyError> {
    let potential = GridExpr::compile(&cfg.potential)?;
    let exact = match &cfg.exact {
        Some(text) => Some(GridExpr::compile(text)?),
        None => None,
    };
    let boundary = match (&cfg.boundary, &exact) {
        (Some([left, right]), _) => (
            GridExpr::compile(left)?.eval_real(cfg.x_min, 0.0)?,
            GridExpr::compile(right)?.eval_real(cfg.x_max, 0.0)?,
        ),
        (None, Some(exact)) => (
            exact.eval_real(cfg.x_min, 0.0)?,
            exact.eval_real(cfg.x_max, 0.0)?,
        ),
        (None, None) => {
            return Err(VerifyError::Config(
                "vacuum scenario needs `boundary` or `exact`".into(),
            ))
        }
    };

    let mut rows = Vec::new();
    let mut samples = Vec::new();
    let mut global_min = f64::INFINITY;
    for &n in &cfg.resolutions {
        let grid = Grid1D::new(cfg.x_min, cfg.x_max, n)?;
        let vfn = |x: f64| potential.eval_real(x, 0.0).unwrap_or(f64::NAN);
        let sol = solve_vacuum_bvp(&vfn, &grid, boundary)?;
        let min = sol.values.iter().cloned().fold(f64::INFINITY, f64::min);
        global_min = global_min.min(min);
        if let Some(exact) = &exact {
            let mut err = 0.0_f64;
            for (i, v) in sol.values.iter().enumerate() {
                err = err.max((v - exact.eval_real(grid.x(i), 0.0)?).abs());
            }
            rows.push(VerifyRow::info(format!("max-error-N{}", n), err));
            samples.push((grid.dx(), err));
        }
    }
    if samples.len() >= 3 {
        let est = convergence_order(&samples)?;
        rows.push(VerifyRow::ge(
            "convergence-order",
            est.order,
            cfg.min_order.unwrap_or(1.9),
        ));
    }
    if cfg.require_positive.unwrap_or(true) {
        rows.push(VerifyRow::gt("min-value", global_min, 0.0));
    }
    Ok(VerifyReport::new("vacuum", seed, rows))
}

pub fn run_evolve(
    cfg: &ScenarioConfig,
    seed: u64,
    csv: Option<&Path>,
) -> Result<VerifyReport, VerifyError> {
    match cfg.kind.as_str() {
        "evolve" => run_evolve_direct(cfg, seed, csv),
        "split" => run_split(cfg, seed),
        "continuity" => run_continuity(cfg, seed),
        other => Err(VerifyError::Config(format!(
            "evolve command does not handle kind `{}`",
            other
        ))),
    }
}

fn run_evolve_direct(
    cfg: &ScenarioConfig,
    seed: u64,
    csv: Option<&Path>,
) -> Result<VerifyReport, VerifyError> {
    let initial = GridExpr::compile(require(&cfg.initial, "initial")?)?;
    let potential = GridExpr::compile(&cfg.potential)?;
    let t_final = *require(&cfg.t_final, "t_final")?;
    let norm_tol = cfg.norm_tol.unwrap_or(1e-12);

    let mut rows = Vec::new();
    for (idx, &n) in cfg.resolutions.iter().enumerate() {
        let grid = Grid1D::new(cfg.x_min, cfg.x_max, n)?;
        let u0 = sample_complex(grid, &initial, 0.0)?;
        let steps = steps_for(cfg, idx, 1);
        let vfn = potential.real_closure(grid)?;
        let series =
            evolve_direct_series(&u0, &EvolutionConfig::new(t_final / steps as f64, steps, vfn))?;

        let n0 = series[0].l2_norm();
        let mut drift = 0.0_f64;
        for pair in series.windows(2) {
            drift = drift.max((pair[1].l2_norm() - pair[0].l2_norm()).abs() / n0);
        }
        rows.push(VerifyRow::le(
            format!("norm-drift-per-step-N{}", n),
            drift,
            norm_tol,
        ));

        if cfg.stationary.unwrap_or(false) {
            let mut dev = 0.0_f64;
            for (a, b) in series.last().unwrap().values.iter().zip(&series[0].values) {
                dev = dev.max((a.norm() - b.norm()).abs());
            }
            rows.push(VerifyRow::le(
                format!("stationary-magnitude-N{}", n),
                dev,
                cfg.stationary_tol.unwrap_or(1e-6),
            ));
        }

        if idx + 1 == cfg.resolutions.len() {
            if let Some(path) = csv {
                write_series_csv(path, &series, t_final / steps as f64)
                    .map_err(|e| VerifyError::Config(format!("csv: {}", e)))?;
            }
        }
    }
    Ok(VerifyReport::new("evolve", seed, rows))
}

fn run_split(cfg: &ScenarioConfig, seed: u64) -> Result<VerifyReport, VerifyError> {
    let initial = GridExpr::compile(require(&cfg.initial, "initial")?)?;
    let vacuum = GridExpr::compile(require(&cfg.vacuum_expr, "vacuum_expr")?)?;
    let potential = GridExpr::compile(&cfg.potential)?;
    let t_final = *require(&cfg.t_final, "t_final")?;

    let mut rows = Vec::new();
    let mut samples = Vec::new();
    let mut finest = f64::NAN;
    for (idx, &n) in cfg.resolutions.iter().enumerate() {
        let grid = Grid1D::new(cfg.x_min, cfg.x_max, n)?;
        let vac = sample_vacuum(grid, &vacuum, 0.0)?;
        let u0 = sample_complex(grid, &initial, 0.0)?;
        let zero = Complex64::new(0.0, 0.0);
        let w0 = Field::new(
            grid,
            u0.values
                .iter()
                .zip(&vac.values)
                .map(|(u, n)| u / n)
                .collect(),
            (zero, zero),
        )?;
        let steps = steps_for(cfg, idx, 2);
        let dt = t_final / steps as f64;
        let vfn = potential.real_closure(grid)?;
        let direct = {
            let series = evolve_direct_series(&u0, &EvolutionConfig::new(dt, steps, vfn))?;
            series.last().unwrap().clone()
        };
        let w = evolve_split(&w0, &vac, &EvolutionConfig::new(dt, steps, |_, _| 0.0))?;
        let recombined = Field::new(
            grid,
            w.values
                .iter()
                .zip(&vac.values)
                .map(|(w, n)| w * n)
                .collect(),
            (zero, zero),
        )?;
        let mismatch = recombined.rel_l2_distance(&direct)?;
        rows.push(VerifyRow::info(format!("rel-mismatch-N{}", n), mismatch));
        samples.push((grid.dx(), mismatch));
        finest = mismatch;
    }
    if let Some(max) = cfg.max_mismatch {
        rows.push(VerifyRow::le("finest-mismatch", finest, max));
    }
    if samples.len() >= 3 {
        let est = convergence_order(&samples)?;
        rows.push(VerifyRow::ge(
            "convergence-order",
            est.order,
            cfg.min_order.unwrap_or(1.8),
        ));
    }
    Ok(VerifyReport::new("split", seed, rows))
}

fn run_continuity(cfg: &ScenarioConfig, seed: u64) -> Result<VerifyReport, VerifyError> {
    let u_exact = GridExpr::compile(require(&cfg.u_exact, "u_exact")?)?;
    let vacuum = GridExpr::compile(require(&cfg.vacuum_expr, "vacuum_expr")?)?;
    let t_final = *require(&cfg.t_final, "t_final")?;
    let perturb = cfg.perturb_n.unwrap_or(0.0);

    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for (idx, &n) in cfg.resolutions.iter().enumerate() {
        let grid = Grid1D::new(cfg.x_min, cfg.x_max, n)?;
        let vac = sample_vacuum(grid, &vacuum, perturb)?;
        let steps = steps_for(cfg, idx, 1);
        let dt = t_final / steps as f64;
        let mut series = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            series.push(sample_complex(grid, &u_exact, k as f64 * dt)?);
        }
        let res = continuity_residual(&series, &vac, dt)?;
        rows.push(VerifyRow::info(format!("dlambda-residual-N{}", n), res));
        samples.push((grid.dx(), res));
    }
    if samples.len() >= 3 {
        let est = convergence_order(&samples)?;
        rows.push(VerifyRow::ge(
            "convergence-order",
            est.order,
            cfg.min_order.unwrap_or(1.8),
        ));
    }
    Ok(VerifyReport::new("continuity", seed, rows))
}

pub fn run_madelung(cfg: &ScenarioConfig, seed: u64) -> Result<VerifyReport, VerifyError> {
    let u_exact = GridExpr::compile(require(&cfg.u_exact, "u_exact")?)?;
    let potential = GridExpr::compile(&cfg.potential)?;
    let t_final = *require(&cfg.t_final, "t_final")?;

    let mut rows = Vec::new();
    let mut transport = Vec::new();
    let mut phase = Vec::new();
    for (idx, &n) in cfg.resolutions.iter().enumerate() {
        let grid = Grid1D::new(cfg.x_min, cfg.x_max, n)?;
        let steps = steps_for(cfg, idx, 4);
        let dt = t_final / steps as f64;
        let mut series = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            series.push(sample_complex(grid, &u_exact, k as f64 * dt)?);
        }
        let vfn = potential.real_closure(grid)?;
        let (tr, ph) = madelung_residuals(&series, dt, &vfn)?;
        rows.push(VerifyRow::info(format!("transport-residual-N{}", n), tr));
        rows.push(VerifyRow::info(format!("phase-residual-N{}", n), ph));
        transport.push((grid.dx(), tr));
        phase.push((grid.dx(), ph));
    }
    if transport.len() >= 3 {
        let min_order = cfg.min_order.unwrap_or(1.8);
        let est_tr = convergence_order(&transport)?;
        rows.push(VerifyRow::ge("transport-order", est_tr.order, min_order));
        let est_ph = convergence_order(&phase)?;
        rows.push(VerifyRow::ge("phase-order", est_ph.order, min_order));
    }
    Ok(VerifyReport::new("madelung", seed, rows))
}

fn write_series_csv(
    path: &Path,
    series: &[Field<Complex64>],
    dt: f64,
) -> Result<(), std::io::Error> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "t,x,re,im")?;
    for (k, field) in series.iter().enumerate() {
        let t = k as f64 * dt;
        for (i, v) in field.values.iter().enumerate() {
            writeln!(out, "{},{},{},{}", t, field.grid.x(i), v.re, v.im)?;
        }
    }
    Ok(())
}
