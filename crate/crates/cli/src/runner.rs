//! Execution of a [`RunConfig`]: one propagation per sweep point, then the
//! CSV, overlay, metadata and optional gnuplot files.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use dickecool::analytic::{self, AnalyticParams, BiexponentialFit};
use dickecool::lindblad::{generator_spin_cavity, generator_spin_master_equation, TRUNCATION_THRESHOLD};
use dickecool::magnus::average_dissipator_first_order;
use dickecool::{
    evolve, CavityParams, GeneratorCatalog, Method, ModelParams, ObservableSet, OccupationBasis, PropagationSpec,
    SpinCavitySpace, SymState, TimeSeries,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{GridKind, InitialState, RunConfig, Scenario, SweepPoint, SCHEMA_VERSION};
use crate::error::CliError;
use crate::output::{curve_csv, gnuplot_script, lambda_tag, prefixed, series_csv, write_file};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads for sweep points; `None` lets rayon decide.
    pub jobs: Option<usize>,
    /// Largest operator dimension the run may build.
    pub max_dim: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Derived {
    pub gamma_cc: f64,
    pub t1: f64,
    pub equilibrium_jz: f64,
    pub initial_jz: f64,
    pub operator_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub markovian_cavity: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointMetadata {
    pub lambda: Option<f64>,
    pub gamma_t2: f64,
    /// `ΓN/γ`; `null` when γ = 0 (infinite).
    pub cooperativity: Option<f64>,
    pub outside_first_order_validity: bool,
    pub csv: String,
    pub method: Option<Method>,
    pub reduced_dim: Option<usize>,
    pub final_jz: f64,
    pub max_trace_drift: Option<f64>,
    pub biexponential_fit: Option<BiexponentialFit>,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub schema_version: u32,
    pub version: &'static str,
    pub config: RunConfig,
    pub derived: Derived,
    pub points: Vec<PointMetadata>,
    pub analytic_csv: Option<String>,
    pub gnuplot: Option<String>,
    pub outside_first_order_validity: bool,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
}

struct Model {
    catalog: GeneratorCatalog,
    space: Option<SpinCavitySpace>,
}

fn initial_spin_state(kind: InitialState, basis: &Arc<OccupationBasis>) -> SymState {
    match kind {
        InitialState::MaximallyMixed => SymState::maximally_mixed(basis.clone()),
        InitialState::Ground => SymState::ground(basis.clone()),
        InitialState::AllUp => SymState::all_up(basis.clone()),
    }
}

fn simulate(cfg: &RunConfig, model: &Model, grid: &[f64], point: &SweepPoint) -> Result<TimeSeries, CliError> {
    let n = cfg.model.n_qubits;
    let nbar = cfg.model.nbar;
    let gamma = cfg.gamma_cc();
    let mut spec = PropagationSpec::new(grid.to_vec());
    if let Some(m) = cfg.method {
        spec = spec.with_method(m);
    }
    let spin0 = initial_spin_state(cfg.initial_state, model.catalog.basis());
    let params = match point.lambda {
        Some(l) => ModelParams::with_lambda(n, gamma, l, nbar)?,
        None => ModelParams::new(n, gamma, point.gamma_t2, nbar)?,
    };
    let series = match cfg.scenario {
        Scenario::SpinMaster => {
            let l = generator_spin_master_equation(&model.catalog, &params)?;
            evolve(&l, spin0.coeffs(), &spec, &ObservableSet::spin(model.catalog.basis()))?
        }
        Scenario::AverageDissipator => {
            let l = average_dissipator_first_order(&model.catalog, &params)?;
            evolve(&l, spin0.coeffs(), &spec, &ObservableSet::spin(model.catalog.basis()))?
        }
        Scenario::SpinCavity => {
            let space = model.space.as_ref().expect("spin-cavity model has a composite space");
            let c = cfg.cavity.as_ref().expect("validated config");
            let cav = CavityParams::new(c.g, c.kappa, c.n_levels, nbar)?;
            let l = generator_spin_cavity(&model.catalog, space, &cav, point.gamma_t2)?;
            let rho0 = space.with_cavity_thermal(&spin0, nbar)?;
            evolve(&l, &rho0, &spec, &ObservableSet::spin_cavity(space, TRUNCATION_THRESHOLD))?
        }
        Scenario::Analytic => unreachable!("closed-form runs do not propagate"),
    };
    Ok(series)
}

fn cooperativity(gamma: f64, n: usize, gamma_t2: f64) -> (Option<f64>, bool) {
    match analytic::cooperativity(gamma, n, gamma_t2) {
        Ok(c) => (Some(c), c >= 1.0),
        Err(_) => (None, true),
    }
}

fn series_path(cfg: &RunConfig, point: &SweepPoint) -> PathBuf {
    match (&cfg.sweep, point.lambda) {
        (Some(_), Some(l)) => prefixed(&cfg.output, &format!("_lambda_{}.csv", lambda_tag(l))),
        _ => prefixed(&cfg.output, ".csv"),
    }
}

fn point_label(point: &SweepPoint) -> String {
    match point.lambda {
        Some(l) => format!("lambda={}", lambda_tag(l)),
        None => format!("gamma_t2={}", point.gamma_t2),
    }
}

/// Runs every sweep point and writes the output files. Returns the metadata
/// that was written to `<output>.json`.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunMetadata, CliError> {
    let start = Instant::now();
    cfg.validate()?;
    let n = cfg.model.n_qubits;
    let dim = cfg.operator_dim();
    if let Some(cap) = opts.max_dim {
        if dim > cap {
            return Err(dickecool::Error::DimensionCap { dim, cap }.into());
        }
    }
    let gamma = cfg.gamma_cc();
    let nbar = cfg.model.nbar;
    let jz0 = cfg.initial_state.jz(n);
    let derived = Derived {
        gamma_cc: gamma,
        t1: analytic::t1(gamma, nbar)?,
        equilibrium_jz: analytic::equilibrium_jz(n, nbar),
        initial_jz: jz0,
        operator_dim: dim,
        markovian_cavity: cfg
            .cavity
            .as_ref()
            .map(|c| CavityParams::new(c.g, c.kappa, c.n_levels, nbar).map(|cp| cp.is_markovian(n)))
            .transpose()?,
    };
    let mut warnings = Vec::new();
    if derived.markovian_cavity == Some(false) {
        warnings.push("kappa < 10 g sqrt(N): the cavity is not strongly damped, so Γ = 4g²/κ is only indicative".to_string());
    }

    let grid = cfg.time_grid();
    let mut ap = AnalyticParams::new(n, gamma, nbar);
    ap.jz0 = jz0;
    let closed_form = analytic::jz_curve(&ap, &grid)?;
    let points = cfg.sweep_points();

    let outcomes: Vec<(TimeSeries, f64)> = if cfg.scenario == Scenario::Analytic {
        Vec::new()
    } else {
        let basis = Arc::new(OccupationBasis::new(n)?);
        let space = match &cfg.cavity {
            Some(c) => Some(SpinCavitySpace::new(basis.clone(), c.n_levels)?),
            None => None,
        };
        let model = Model { catalog: GeneratorCatalog::new(basis), space };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
        let results: Vec<Result<(TimeSeries, f64), CliError>> = pool.install(|| {
            points
                .par_iter()
                .map(|p| {
                    let t0 = Instant::now();
                    simulate(cfg, &model, &grid, p).map(|s| (s, t0.elapsed().as_secs_f64()))
                })
                .collect()
        });
        results.into_iter().collect::<Result<_, _>>()?
    };

    let mut point_meta = Vec::with_capacity(points.len());
    let mut series_files = Vec::new();
    for (k, p) in points.iter().enumerate() {
        let path = series_path(cfg, p);
        let (cval, outside) = cooperativity(gamma, n, p.gamma_t2);
        let mut pw = Vec::new();
        if outside {
            pw.push(match cval {
                Some(c) => format!("C = {c} ≥ 1: outside first-order validity"),
                None => "C is infinite (γ = 0): outside first-order validity".to_string(),
            });
        }
        let meta = match outcomes.get(k) {
            Some((s, wall)) => {
                write_file(&path, &series_csv(s))?;
                pw.extend(s.warnings.iter().cloned());
                let fit = if outside && s.len() >= 5 {
                    let r_min = 0.1 / cfg.t_max;
                    let r_max = (10.0 * gamma * (1.0 + 2.0 * nbar) * n as f64).max(100.0 * r_min);
                    match analytic::fit_biexponential(&s.times, &s.jz, r_min, r_max) {
                        Ok(f) => Some(f),
                        Err(e) => {
                            pw.push(format!("biexponential fit failed: {e}"));
                            None
                        }
                    }
                } else {
                    None
                };
                PointMetadata {
                    lambda: p.lambda,
                    gamma_t2: p.gamma_t2,
                    cooperativity: cval,
                    outside_first_order_validity: outside,
                    csv: path.display().to_string(),
                    method: Some(s.method),
                    reduced_dim: Some(s.reduced_dim),
                    final_jz: *s.jz.last().unwrap_or(&f64::NAN),
                    max_trace_drift: Some(s.max_trace_drift()),
                    biexponential_fit: fit,
                    warnings: pw,
                    wall_time_seconds: *wall,
                }
            }
            None => {
                write_file(&path, &curve_csv(&grid, &closed_form))?;
                PointMetadata {
                    lambda: p.lambda,
                    gamma_t2: p.gamma_t2,
                    cooperativity: cval,
                    outside_first_order_validity: outside,
                    csv: path.display().to_string(),
                    method: None,
                    reduced_dim: None,
                    final_jz: *closed_form.last().unwrap_or(&f64::NAN),
                    max_trace_drift: None,
                    biexponential_fit: None,
                    warnings: pw,
                    wall_time_seconds: 0.0,
                }
            }
        };
        let label = point_label(p);
        warnings.extend(meta.warnings.iter().map(|w| format!("{label}: {w}")));
        series_files.push((label, path));
        point_meta.push(meta);
    }

    let analytic_csv = if cfg.scenario == Scenario::Analytic {
        None
    } else {
        let path = prefixed(&cfg.output, "_analytic.csv");
        write_file(&path, &curve_csv(&grid, &closed_form))?;
        Some(path)
    };
    let gnuplot = if cfg.gnuplot {
        let path = prefixed(&cfg.output, ".gp");
        write_file(&path, &gnuplot_script(&series_files, analytic_csv.as_deref(), cfg.grid == GridKind::Log))?;
        Some(path.display().to_string())
    } else {
        None
    };

    let meta = RunMetadata {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        derived,
        outside_first_order_validity: point_meta.iter().any(|p| p.outside_first_order_validity),
        points: point_meta,
        analytic_csv: analytic_csv.map(|p| p.display().to_string()),
        gnuplot,
        warnings,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    write_file(&prefixed(&cfg.output, ".json"), &(json + "\n"))?;
    Ok(meta)
}
