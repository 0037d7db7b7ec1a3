use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;
use thiserror::Error;

use super::config::{base_dir, Direction, ExperimentConfig, InitialSpec, Method};
use super::output::{fmt_g17, write_atomic, Cell, Csv};
use crate::error::Error;
use crate::field::SampledField;
use crate::grid::AxisGrid;
use crate::media::{DispersionFactor, MediumModel};
use crate::modes::{project, reconstruct, FrequencyGrid};
use crate::perturb::{
    compare_bracket, fit_decay_rate, in_band, max_relative_deviation, mode_derivatives, mode_function_first_order,
    out_of_peak_fraction, LorentzCase,
};
use crate::spectral::{discretize_h2, eigenpairs_at, eigenvalues, omega_from_lambda, SpectralPropagator};
use crate::wkb::{validity_functional, PhaseTable, ValidityReport};

/// Caps the worker thread count when set to a positive integer.
pub const THREADS_ENV: &str = "WKBWAVE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eigen,
    Propagate,
    Lorentz,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Propagate => "propagate",
            Command::Lorentz => "lorentz",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ConvergenceFailure { .. } | Error::OutOfRange { .. } | Error::InsufficientHistory { .. } => {
                CliError::Solver(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Solver(format!("cannot write {}: {e}", path.display()))
}

/// Size the global rayon pool from `WKBWAVE_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    // A pool built earlier in the process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

struct Run {
    config: ExperimentConfig,
    out: PathBuf,
}

impl Run {
    fn write(&self, name: &str, bytes: Vec<u8>) -> Result<(), CliError> {
        let path = self.out.join(name);
        write_atomic(&path, &bytes).map_err(|e| io_error(&path, e))
    }
}

/// Execute one command; returns the files written.
pub fn run(command: Command, config_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let parsed = ExperimentConfig::parse(&text)
        .map_err(|e| CliError::Config(format!("{}: {}", config_path.display(), e.to_string().trim_end())))?;
    let base = base_dir(config_path);
    let config = parsed.resolved(&base)?;
    let model = config.medium.build(&base)?;
    gate_monotone(&model, &config)?;

    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let run = Run {
        config,
        out: out_dir.to_path_buf(),
    };
    let mut written = match command {
        Command::Eigen => cmd_eigen(&run, &model)?,
        Command::Propagate => cmd_propagate(&run, &model)?,
        Command::Lorentz => cmd_lorentz(&run, &model)?,
        Command::Validate => cmd_validate(&run, &model)?,
    };
    run.write("resolved_config.toml", run.config.to_toml().into_bytes())?;
    written.push("resolved_config.toml".into());
    Ok(written.into_iter().map(|n| out_dir.join(n)).collect())
}

/// Range on which `f′ > 0` is required before any command runs.
fn monotone_range(model: &MediumModel, config: &ExperimentConfig) -> (f64, f64) {
    let w = model.window();
    if w.max.is_finite() {
        return (w.min, w.max);
    }
    let upper = config
        .omega_grid
        .as_ref()
        .and_then(|g| g.upper())
        .unwrap_or(w.min + 10.0);
    (w.min, upper.max(w.min + 1.0))
}

fn gate_monotone(model: &MediumModel, config: &ExperimentConfig) -> Result<(), CliError> {
    let samples = config.validate.clone().unwrap_or_default().samples;
    let (lo, hi) = monotone_range(model, config);
    model.validate_monotone(lo, hi, samples)?;
    Ok(())
}

fn field_csv(field: &SampledField) -> Vec<u8> {
    let mut csv = Csv::new(&["z", "re", "im"]);
    for (z, v) in field.points.iter().zip(&field.values) {
        csv.row(&[Cell::Num(*z), Cell::Num(v.re), Cell::Num(v.im)]);
    }
    csv.into_bytes()
}

fn validity_csv(report: &ValidityReport) -> Vec<u8> {
    let mut csv = Csv::new(&["z", "lhs"]);
    for (z, v) in report.grid.points().iter().zip(&report.lhs) {
        csv.row(&[Cell::Num(*z), Cell::Num(*v)]);
    }
    csv.into_bytes()
}

fn missing(block: &str) -> CliError {
    CliError::Config(format!("missing [{block}] block"))
}

fn cmd_eigen(run: &Run, model: &MediumModel) -> Result<Vec<String>, CliError> {
    let spec = run.config.eigen.as_ref().ok_or_else(|| missing("eigen"))?;
    let grid = run.config.zgrid.build()?;
    let op = discretize_h2(model, &grid, spec.boundary)?;
    if spec.k == 0 || spec.k > op.dim() {
        return Err(CliError::Config(format!(
            "eigen.k must be in 1..={}, got {}",
            op.dim(),
            spec.k
        )));
    }
    let indices: Vec<usize> = match spec.near_omega {
        None => (0..spec.k).collect(),
        Some(omega) => {
            let target = model.f(omega)?;
            let values = eigenvalues(&op)?;
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|a, b| {
                let da = (values[*a].max(0.0).sqrt() - target).abs();
                let db = (values[*b].max(0.0).sqrt() - target).abs();
                da.total_cmp(&db).then(a.cmp(b))
            });
            let mut chosen = order[..spec.k].to_vec();
            chosen.sort_unstable();
            chosen
        }
    };
    let pairs = eigenpairs_at(&op, &indices)?;
    let validity = validity_functional(model, &grid)?;
    let mut table = Csv::new(&["index", "lambda", "omega", "margin"]);
    let mut written = vec!["eigenvalues.csv".to_string()];
    for p in &pairs {
        let omega = match omega_from_lambda(model, p.lambda.max(0.0)) {
            Ok(w) => w,
            Err(Error::OutOfRange { .. }) => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        let margin = if omega.is_nan() {
            f64::NAN
        } else {
            validity.margin_at(omega)
        };
        table.row(&[
            Cell::Int(p.index),
            Cell::Num(p.lambda),
            Cell::Num(omega),
            Cell::Num(margin),
        ]);
        let full = op.embed(&p.vector);
        let field = SampledField::from_real(grid.points(), &full, format!("eigvec_{}", p.index))?;
        let name = format!("eigvec_{}.csv", p.index);
        run.write(&name, field_csv(&field))?;
        written.push(name);
    }
    run.write("eigenvalues.csv", table.into_bytes())?;
    Ok(written)
}

/// Initial field and its z-derivative on the grid.
fn initial_field(spec: &InitialSpec, grid: &AxisGrid) -> Result<(SampledField, Vec<Complex64>, Direction), CliError> {
    let z = grid.points();
    let (values, slope, direction): (Vec<Complex64>, Vec<Complex64>, Direction) = match spec {
        InitialSpec::Gaussian {
            sigma,
            z0,
            k0,
            amplitude,
            direction,
        } => {
            if !(*sigma > 0.0) {
                return Err(CliError::Config(format!(
                    "propagate.initial.sigma must be positive, got {sigma}"
                )));
            }
            let v: Vec<Complex64> = z
                .iter()
                .map(|z| Complex64::from_polar(amplitude * (-(z - z0).powi(2) / (2.0 * sigma * sigma)).exp(), k0 * z))
                .collect();
            let d = z
                .iter()
                .zip(&v)
                .map(|(z, e)| *e * Complex64::new(-(z - z0) / (sigma * sigma), *k0))
                .collect();
            (v, d, *direction)
        }
        InitialSpec::Plane {
            k,
            amplitude,
            direction,
        } => {
            let v: Vec<Complex64> = z.iter().map(|z| Complex64::from_polar(*amplitude, k * z)).collect();
            let d = v.iter().map(|e| *e * Complex64::new(0.0, *k)).collect();
            (v, d, *direction)
        }
        InitialSpec::Tabulated {
            z: tz,
            re,
            im,
            direction,
            ..
        } => {
            let re = re
                .as_ref()
                .ok_or_else(|| CliError::Config("propagate.initial.re is required".into()))?;
            if re.len() != grid.len() {
                return Err(CliError::Config(format!(
                    "tabulated initial field has {} samples, the grid has {}",
                    re.len(),
                    grid.len()
                )));
            }
            if let Some(tz) = tz {
                let tol = 1e-9 * grid.span();
                if tz.len() != grid.len() || tz.iter().zip(&z).any(|(a, b)| (a - b).abs() > tol) {
                    return Err(CliError::Config(
                        "tabulated initial field must be sampled on the z-grid".into(),
                    ));
                }
            }
            let im = im.clone().unwrap_or_else(|| vec![0.0; re.len()]);
            if im.len() != re.len() {
                return Err(CliError::Config(
                    "tabulated initial field: re and im lengths differ".into(),
                ));
            }
            let v: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
            let h = grid.spacing();
            let n = v.len();
            let d = (0..n)
                .map(|i| {
                    if i == 0 {
                        (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
                    } else if i == n - 1 {
                        (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
                    } else {
                        (v[i + 1] - v[i - 1]) / (2.0 * h)
                    }
                })
                .collect();
            (v, d, *direction)
        }
    };
    Ok((
        SampledField {
            points: z,
            values,
            label: "E0".into(),
        },
        slope,
        direction,
    ))
}

fn time_label(t: f64) -> String {
    format!("field_t{t}.csv")
}

fn cmd_propagate(run: &Run, model: &MediumModel) -> Result<Vec<String>, CliError> {
    let spec = run.config.propagate.as_ref().ok_or_else(|| missing("propagate"))?;
    if spec.times.is_empty() {
        return Err(CliError::Config("propagate.times must not be empty".into()));
    }
    let grid = run.config.zgrid.build()?;
    let (e0, slope, direction) = initial_field(&spec.initial, &grid)?;
    let validity = validity_functional(model, &grid)?;
    let mut written = Vec::new();
    match spec.method {
        Method::Spectral => {
            let speed: Vec<f64> = grid
                .points()
                .iter()
                .map(|z| model.v2(*z) / model.n1(0.0).unwrap_or(1.0))
                .collect();
            let sign = match direction {
                Direction::Right => -1.0,
                Direction::Left => 1.0,
                Direction::Standing => 0.0,
            };
            let rate = slope.iter().zip(&speed).map(|(d, v)| *d * (sign * v)).collect();
            let e0_dot = SampledField {
                points: grid.points(),
                values: rate,
                label: "E0dot".into(),
            };
            let propagator = SpectralPropagator::new(model, &grid, spec.boundary)?;
            let state = propagator.modal_state(&e0, &e0_dot)?;
            let mut energy = Csv::new(&["t", "energy"]);
            for &t in &spec.times {
                let s = propagator.advance(&state, t);
                energy.row(&[Cell::Num(t), Cell::Num(propagator.modal_energy(&s))]);
                let name = time_label(t);
                run.write(&name, field_csv(&propagator.field(&s, format!("E(t={t})"))))?;
                written.push(name);
            }
            run.write("energy.csv", energy.into_bytes())?;
            written.push("energy.csv".into());
        }
        Method::Wkb => {
            let omega_spec = run.config.omega_grid.as_ref().ok_or_else(|| missing("omega_grid"))?;
            let table = PhaseTable::build(model, &grid)?;
            let omega = omega_spec.build(model, &table)?;
            let c = project(model, &table, &omega, &e0)?;
            let mut modes = Csv::new(&["omega", "re", "im", "abs"]);
            let peak = c.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let mut warnings = String::new();
            for (w, v) in omega.omega.iter().zip(&c.values) {
                modes.row(&[Cell::Num(*w), Cell::Num(v.re), Cell::Num(v.im), Cell::Num(v.norm())]);
                let margin = validity.margin_at(*w);
                if margin < spec.margin_warning && v.norm() > spec.warn_fraction * peak {
                    warnings.push_str(&format!(
                        "omega={} margin={} |c|={} exceeds {} of max |c| where the WKB margin is below {}\n",
                        fmt_g17(*w),
                        fmt_g17(margin),
                        fmt_g17(v.norm()),
                        fmt_g17(spec.warn_fraction),
                        fmt_g17(spec.margin_warning)
                    ));
                }
            }
            run.write("modes.csv", modes.into_bytes())?;
            written.push("modes.csv".into());
            if !warnings.is_empty() {
                run.write("warnings.txt", warnings.into_bytes())?;
                written.push("warnings.txt".into());
            }
            for &t in &spec.times {
                let name = time_label(t);
                run.write(&name, field_csv(&reconstruct(model, &table, &c, t)?))?;
                written.push(name);
            }
        }
    }
    run.write("validity.csv", validity_csv(&validity))?;
    written.push("validity.csv".into());
    Ok(written)
}

fn opt(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn cmd_lorentz(run: &Run, model: &MediumModel) -> Result<Vec<String>, CliError> {
    let spec = run.config.lorentz.as_ref().ok_or_else(|| missing("lorentz"))?;
    let medium = &run.config.medium;
    if medium.eps2.is_some() || medium.mu2.is_some() {
        return Err(CliError::Config(
            "lorentz defines ε₂ and μ₂ itself; remove medium.eps2 and medium.mu2".into(),
        ));
    }
    if !matches!(model.mu1, DispersionFactor::Constant(v) if v == 1.0) {
        return Err(CliError::Config("lorentz needs a nonmagnetic medium (μ₁ = 1)".into()));
    }
    let case = LorentzCase::new(spec.a, spec.gamma, model.eps1.clone(), spec.k)?
        .with_units(model.units)
        .with_amplitude(spec.amplitude)
        .with_window(model.declared_window());
    let grid = run.config.zgrid.build()?;
    let omega_spec = run.config.omega_grid.as_ref().ok_or_else(|| missing("omega_grid"))?;
    let reference = case.model_with_strength(0.0)?;
    let omega = omega_spec.build(&reference, &PhaseTable::build(&reference, &grid)?)?;
    let radius = spec
        .exclusion_radius
        .unwrap_or_else(|| case.default_exclusion_radius(grid.span()));
    let band = (spec.fit_band[0], spec.fit_band[1]);
    let steps = (spec.a_steps[0], spec.a_steps[1]);

    let first = mode_function_first_order(&case, &omega, radius)?;
    let mut analytic = Csv::new(&["omega", "detuning", "bracket", "smooth", "omega_star", "excluded"]);
    for s in &first.samples {
        let bracket = if s.value.is_some() {
            case.bracket(s.omega)?
        } else {
            f64::NAN
        };
        analytic.row(&[
            Cell::Num(s.omega),
            Cell::Num(s.detuning),
            Cell::Num(bracket),
            Cell::Num(s.value.unwrap_or(f64::NAN)),
            Cell::Num(first.omega_star),
            Cell::Flag(s.value.is_none()),
        ]);
    }

    let derivatives = mode_derivatives(&case, &grid, &omega, steps)?;
    let three = compare_bracket(&case, &derivatives.three_point, radius)?;
    let secant = compare_bracket(&case, &derivatives.secant, radius)?;
    let mut numeric = Csv::new(&["omega", "detuning", "re", "im", "secant_re", "secant_im", "excluded"]);
    for (s, q) in three.iter().zip(&secant) {
        numeric.row(&[
            Cell::Num(s.omega),
            Cell::Num(s.detuning),
            Cell::Num(s.numeric.re),
            Cell::Num(s.numeric.im),
            Cell::Num(q.numeric.re),
            Cell::Num(q.numeric.im),
            Cell::Flag(s.excluded),
        ]);
    }

    let decay = fit_decay_rate(&case, &three, band).ok();
    let at_a = case.projected(&grid, &omega, spec.a)?;
    let mut modes = Csv::new(&["omega", "re", "im", "abs"]);
    for (w, v) in omega.omega.iter().zip(&at_a.values) {
        modes.row(&[Cell::Num(*w), Cell::Num(v.re), Cell::Num(v.im), Cell::Num(v.norm())]);
    }
    let fit = json!({
        "gamma": spec.gamma,
        "k": spec.k,
        "a": spec.a,
        "a_steps": spec.a_steps,
        "omega_star": first.omega_star,
        "peak_weight": first.peak_weight,
        "exclusion_radius": radius,
        "fit_band": spec.fit_band,
        "in_band_samples": in_band(&three, case.gamma, band).len(),
        "decay_rate": decay.map(opt),
        "decay_rate_relative_error": decay.map(|d| opt((d - spec.gamma).abs() / spec.gamma)),
        "max_relative_deviation": max_relative_deviation(&three, case.gamma, band).map(opt),
        "secant_max_relative_deviation": max_relative_deviation(&secant, case.gamma, band).map(opt),
        "out_of_peak_fraction": opt(out_of_peak_fraction(&case, &at_a, radius)?),
        "leakage_floor": opt(out_of_peak_fraction(&case, &derivatives.projections[0], radius)?),
    });
    run.write("bracket_analytic.csv", analytic.into_bytes())?;
    run.write("bracket_numeric.csv", numeric.into_bytes())?;
    run.write("modes.csv", modes.into_bytes())?;
    let mut text = serde_json::to_string_pretty(&fit).expect("json value");
    text.push('\n');
    run.write("fit.json", text.into_bytes())?;
    Ok(vec![
        "bracket_analytic.csv".into(),
        "bracket_numeric.csv".into(),
        "modes.csv".into(),
        "fit.json".into(),
    ])
}

fn cmd_validate(run: &Run, model: &MediumModel) -> Result<Vec<String>, CliError> {
    let grid = run.config.zgrid.build()?;
    let table = PhaseTable::build(model, &grid)?;
    let validity = validity_functional(model, &grid)?;
    let (lo, hi) = monotone_range(model, &run.config);
    let omega = run
        .config
        .omega_grid
        .as_ref()
        .map(|g| g.build(model, &table))
        .transpose()?;
    let min_margin = omega.as_ref().map(|g: &FrequencyGrid| {
        g.omega
            .iter()
            .map(|w| validity.margin_at(*w))
            .fold(f64::INFINITY, f64::min)
    });
    let window = model.window();
    let summary = json!({
        "monotone": true,
        "monotone_range": [lo, hi],
        "monotone_samples": run.config.validate.clone().unwrap_or_default().samples,
        "window": [opt(window.min), opt(window.max)],
        "homogeneous": model.is_homogeneous(),
        "nondispersive": model.is_nondispersive(),
        "phase_length": table.u2[table.len() - 1] - table.u2[0],
        "max_validity_lhs": validity.max_lhs,
        "min_margin_on_omega_grid": min_margin.map(opt),
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("json value");
    text.push('\n');
    run.write("validation.json", text.into_bytes())?;
    run.write("validity.csv", validity_csv(&validity))?;
    Ok(vec!["validation.json".into(), "validity.csv".into()])
}
