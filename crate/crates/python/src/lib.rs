//! Python bindings for the `wkbwave` core crate.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use wkbwave::modes::{self, FrequencyGrid};
use wkbwave::perturb::{self, LorentzCase};
use wkbwave::spectral::{self, Boundary};
use wkbwave::wkb;
use wkbwave::{AxisGrid, DispersionFactor, FrequencyWindow, MediumModel, ProfileFactor, SampledField, Taper, Units};

create_exception!(
    wkbwave,
    WkbError,
    PyException,
    "Raised when a wkbwave computation fails."
);

fn py_err(e: wkbwave::Error) -> PyErr {
    WkbError::new_err(e.to_string())
}

fn boundary(name: &str) -> PyResult<Boundary> {
    match name {
        "dirichlet" => Ok(Boundary::Dirichlet),
        "periodic" => Ok(Boundary::Periodic),
        other => Err(PyValueError::new_err(format!(
            "boundary must be 'dirichlet' or 'periodic', got '{other}'"
        ))),
    }
}

/// Frequency factor ε₁(ω) or μ₁(ω).
#[pyclass(name = "Dispersion", frozen, from_py_object)]
#[derive(Clone)]
struct PyDispersion(DispersionFactor);

#[pymethods]
impl PyDispersion {
    #[staticmethod]
    fn constant(value: f64) -> PyResult<Self> {
        DispersionFactor::constant(value).map(Self).map_err(py_err)
    }

    /// `a + b ω²`.
    #[staticmethod]
    fn cauchy(a: f64, b: f64) -> PyResult<Self> {
        DispersionFactor::cauchy(a, b).map(Self).map_err(py_err)
    }

    /// Natural cubic spline through samples at |ω|.
    #[staticmethod]
    fn tabulated(omega: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        DispersionFactor::tabulated(omega, values).map(Self).map_err(py_err)
    }

    fn value(&self, omega: f64) -> f64 {
        self.0.value(omega)
    }

    fn derivative(&self, omega: f64) -> f64 {
        self.0.derivative(omega)
    }
}

/// Spatial factor ε₂(z) or μ₂(z).
#[pyclass(name = "Profile", frozen, from_py_object)]
#[derive(Clone)]
struct PyProfile(ProfileFactor);

#[pymethods]
impl PyProfile {
    #[staticmethod]
    fn constant(value: f64) -> PyResult<Self> {
        ProfileFactor::constant(value).map(Self).map_err(py_err)
    }

    /// `base (1 + a / (1 + z²/γ²))`.
    #[staticmethod]
    fn lorentzian(base: f64, a: f64, gamma: f64) -> PyResult<Self> {
        ProfileFactor::lorentzian(base, a, gamma).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn tabulated(z: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        ProfileFactor::tabulated(z, values).map(Self).map_err(py_err)
    }

    fn value(&self, z: f64) -> f64 {
        self.0.value(z)
    }
}

/// Separable medium ε = ε₁(ω)ε₂(z), μ = μ₁(ω)μ₂(z).
#[pyclass(name = "Medium", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMedium(MediumModel);

#[pymethods]
impl PyMedium {
    #[new]
    #[pyo3(signature = (eps1=None, mu1=None, eps2=None, mu2=None, window=None, c=1.0, eps0=1.0, mu0=1.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        eps1: Option<PyDispersion>,
        mu1: Option<PyDispersion>,
        eps2: Option<PyProfile>,
        mu2: Option<PyProfile>,
        window: Option<(f64, f64)>,
        c: f64,
        eps0: f64,
        mu0: f64,
    ) -> PyResult<Self> {
        let units = Units::new(c, eps0, mu0).map_err(py_err)?;
        let vacuum = MediumModel::vacuum(units);
        let mut model = MediumModel::new(
            eps1.map_or(vacuum.eps1.clone(), |d| d.0),
            mu1.map_or(vacuum.mu1.clone(), |d| d.0),
            eps2.map_or(vacuum.eps2.clone(), |p| p.0),
            mu2.map_or(vacuum.mu2.clone(), |p| p.0),
        )
        .with_units(units);
        if let Some((min, max)) = window {
            model = model.with_window(FrequencyWindow::new(min, max).map_err(py_err)?);
        }
        model.check().map_err(py_err)?;
        Ok(Self(model))
    }

    fn n1(&self, omega: f64) -> PyResult<f64> {
        self.0.n1(omega).map_err(py_err)
    }

    /// `(f, f′)` with `f(ω) = ω n₁(ω)`.
    fn f_and_derivative(&self, omega: f64) -> PyResult<(f64, f64)> {
        self.0.f_and_derivative(omega).map_err(py_err)
    }

    #[pyo3(signature = (lo, hi, samples=2001))]
    fn validate_monotone(&self, lo: f64, hi: f64, samples: usize) -> PyResult<()> {
        self.0.validate_monotone(lo, hi, samples).map_err(py_err)
    }

    fn v2(&self, z: f64) -> f64 {
        self.0.v2(z)
    }

    fn omega_from_lambda(&self, lam: f64) -> PyResult<f64> {
        spectral::omega_from_lambda(&self.0, lam).map_err(py_err)
    }
}

/// Uniform z-grid with an optional edge taper ("cosine" or "planck").
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(AxisGrid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (z_min, z_max, n, taper=None, fraction=0.1))]
    fn new(z_min: f64, z_max: f64, n: usize, taper: Option<&str>, fraction: f64) -> PyResult<Self> {
        let taper = match taper {
            None | Some("none") => Taper::None,
            Some("cosine") => Taper::Cosine { fraction },
            Some("planck") => Taper::Planck { fraction },
            Some(other) => return Err(PyValueError::new_err(format!("unknown taper '{other}'"))),
        };
        AxisGrid::with_taper(z_min, z_max, n, taper).map(Self).map_err(py_err)
    }

    fn points(&self) -> Vec<f64> {
        self.0.points()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Tabulated `v₂` and phase `u₂` on a grid.
#[pyclass(name = "PhaseTable", frozen)]
struct PyPhaseTable {
    model: MediumModel,
    table: wkbwave::PhaseTable,
}

#[pymethods]
impl PyPhaseTable {
    #[new]
    fn new(medium: &PyMedium, grid: &PyGrid) -> PyResult<Self> {
        let table = wkbwave::PhaseTable::build(&medium.0, &grid.0).map_err(py_err)?;
        Ok(Self {
            model: medium.0.clone(),
            table,
        })
    }

    #[getter]
    fn u2(&self) -> Vec<f64> {
        self.table.u2.clone()
    }

    #[getter]
    fn v2(&self) -> Vec<f64> {
        self.table.v2.clone()
    }

    fn points(&self) -> Vec<f64> {
        self.table.points()
    }

    /// WKB eigenfunction ψ_ω on the grid.
    fn psi(&self, omega: f64) -> PyResult<Vec<Complex64>> {
        wkb::psi_wkb(&self.model, &self.table, omega)
            .map(|f| f.values)
            .map_err(py_err)
    }

    /// Time-harmonic WKB field E_ω(z, t).
    fn e_field(&self, omega: f64, t: f64) -> PyResult<Vec<Complex64>> {
        wkb::e_field_wkb(&self.model, &self.table, omega, t)
            .map(|f| f.values)
            .map_err(py_err)
    }
}

/// Frequency samples with quadrature weights.
#[pyclass(name = "FrequencyGrid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFrequencyGrid(FrequencyGrid);

#[pymethods]
impl PyFrequencyGrid {
    #[staticmethod]
    fn uniform(omega_min: f64, omega_max: f64, n: usize) -> PyResult<Self> {
        FrequencyGrid::uniform(omega_min, omega_max, n)
            .map(Self)
            .map_err(py_err)
    }

    /// Spacing matched to the window's Rayleigh resolution in f.
    #[staticmethod]
    fn natural(table: &PyPhaseTable, omega_min: f64, n: usize) -> PyResult<Self> {
        FrequencyGrid::natural(&table.model, &table.table, omega_min, n)
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_nodes(omega: Vec<f64>) -> PyResult<Self> {
        FrequencyGrid::from_nodes(omega).map(Self).map_err(py_err)
    }

    #[getter]
    fn omega(&self) -> Vec<f64> {
        self.0.omega.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights.clone()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

fn sampled(table: &PyPhaseTable, values: Vec<Complex64>) -> PyResult<SampledField> {
    SampledField::new(table.table.points(), values, "input").map_err(py_err)
}

/// Mode function c(ω) of an initial field.
#[pyfunction]
fn project(table: &PyPhaseTable, omega: &PyFrequencyGrid, e0: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let e0 = sampled(table, e0)?;
    modes::project(&table.model, &table.table, &omega.0, &e0)
        .map(|c| c.values)
        .map_err(py_err)
}

/// Field on the grid at time t from mode-function samples.
#[pyfunction]
fn reconstruct(table: &PyPhaseTable, omega: &PyFrequencyGrid, c: Vec<Complex64>, t: f64) -> PyResult<Vec<Complex64>> {
    if c.len() != omega.0.len() {
        return Err(PyValueError::new_err(format!(
            "{} coefficients for {} frequencies",
            c.len(),
            omega.0.len()
        )));
    }
    let c = modes::ModeFunction {
        grid: omega.0.clone(),
        values: c,
        source: "python".into(),
    };
    modes::reconstruct(&table.model, &table.table, &c, t)
        .map(|f| f.values)
        .map_err(py_err)
}

/// Discrete Gram matrix of the WKB modes as a list of rows.
#[pyfunction]
fn gram(table: &PyPhaseTable, omega: &PyFrequencyGrid) -> PyResult<Vec<Vec<Complex64>>> {
    let g = modes::discrete_gram(&table.model, &table.table, &omega.0).map_err(py_err)?;
    Ok((0..g.n).map(|j| (0..g.n).map(|k| g.get(j, k)).collect()).collect())
}

#[pyfunction]
fn completeness_residual(table: &PyPhaseTable, omega: &PyFrequencyGrid, field: Vec<Complex64>) -> PyResult<f64> {
    let field = sampled(table, field)?;
    modes::completeness_residual(&table.model, &table.table, &omega.0, &field).map_err(py_err)
}

/// Validity functional per grid point.
#[pyfunction]
fn validity(medium: &PyMedium, grid: &PyGrid) -> PyResult<Vec<f64>> {
    wkb::validity_functional(&medium.0, &grid.0)
        .map(|r| r.lhs)
        .map_err(py_err)
}

/// `(lambda, points, vector)`.
type EigenTriple = (f64, Vec<f64>, Vec<f64>);

/// The k lowest eigenpairs of the discretized h₂ as `(lambda, points, vector)`.
#[pyfunction]
#[pyo3(signature = (medium, grid, k, boundary="dirichlet"))]
fn eigensolve(medium: &PyMedium, grid: &PyGrid, k: usize, boundary: &str) -> PyResult<Vec<EigenTriple>> {
    let op = spectral::discretize_h2(&medium.0, &grid.0, self::boundary(boundary)?).map_err(py_err)?;
    let pairs = spectral::eigensolve(&op, k).map_err(py_err)?;
    Ok(pairs.into_iter().map(|p| (p.lambda, p.points, p.vector)).collect())
}

/// Exact non-dispersive evolution of `(E₀, Ė₀)` to time t.
#[pyfunction]
#[pyo3(signature = (medium, grid, e0, e0_dot, t, boundary="dirichlet"))]
fn evolve_nondispersive(
    medium: &PyMedium,
    grid: &PyGrid,
    e0: Vec<Complex64>,
    e0_dot: Vec<Complex64>,
    t: f64,
    boundary: &str,
) -> PyResult<Vec<Complex64>> {
    let z = grid.0.points();
    let e0 = SampledField::new(z.clone(), e0, "E0").map_err(py_err)?;
    let e0_dot = SampledField::new(z, e0_dot, "E0dot").map_err(py_err)?;
    spectral::evolve_nondispersive(&medium.0, &grid.0, self::boundary(boundary)?, &e0, &e0_dot, t)
        .map(|f| f.values)
        .map_err(py_err)
}

/// Plane wave on a Lorentzian bump of strength a and width γ.
#[pyclass(name = "LorentzCase", frozen)]
struct PyLorentzCase(LorentzCase);

#[pymethods]
impl PyLorentzCase {
    #[new]
    #[pyo3(signature = (a, gamma, k, dispersion=None, amplitude=1.0))]
    fn new(a: f64, gamma: f64, k: f64, dispersion: Option<PyDispersion>, amplitude: f64) -> PyResult<Self> {
        let dispersion = dispersion.map_or(DispersionFactor::Constant(1.0), |d| d.0);
        LorentzCase::new(a, gamma, dispersion, k)
            .map(|c| Self(c.with_amplitude(amplitude)))
            .map_err(py_err)
    }

    fn medium(&self) -> PyResult<PyMedium> {
        self.0.model().map(PyMedium).map_err(py_err)
    }

    fn kappa(&self, omega: f64) -> PyResult<f64> {
        self.0.kappa(omega).map_err(py_err)
    }

    fn omega_star(&self) -> PyResult<f64> {
        self.0.omega_star().map_err(py_err)
    }

    fn amplitude_factor(&self, omega: f64) -> PyResult<f64> {
        self.0.amplitude_factor(omega).map_err(py_err)
    }

    fn bracket(&self, omega: f64) -> PyResult<f64> {
        self.0.bracket(omega).map_err(py_err)
    }

    fn default_exclusion_radius(&self, window_length: f64) -> f64 {
        self.0.default_exclusion_radius(window_length)
    }

    /// Smooth first-order mode function at ω, or an error inside the exclusion radius.
    fn first_order(&self, omega: f64, exclusion_radius: f64) -> PyResult<f64> {
        perturb::first_order_value(&self.0, omega, exclusion_radius).map_err(py_err)
    }

    /// ∂c/∂a at a = 0 from exact projections at a ∈ {0, a₁, a₂}.
    #[pyo3(signature = (grid, omega, a_steps=(0.005, 0.01)))]
    fn numeric_mode_derivative(
        &self,
        py: Python<'_>,
        grid: &PyGrid,
        omega: &PyFrequencyGrid,
        a_steps: (f64, f64),
    ) -> PyResult<Vec<Complex64>> {
        let (case, grid, omega) = (self.0.clone(), grid.0.clone(), omega.0.clone());
        py.detach(move || perturb::numeric_mode_derivative(&case, &grid, &omega, a_steps))
            .map(|c| c.values)
            .map_err(py_err)
    }
}

#[pymodule]
#[pyo3(name = "wkbwave")]
fn wkbwave_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WkbError", m.py().get_type::<WkbError>())?;
    m.add_class::<PyDispersion>()?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyMedium>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyPhaseTable>()?;
    m.add_class::<PyFrequencyGrid>()?;
    m.add_class::<PyLorentzCase>()?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(completeness_residual, m)?)?;
    m.add_function(wrap_pyfunction!(validity, m)?)?;
    m.add_function(wrap_pyfunction!(eigensolve, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_nondispersive, m)?)?;
    Ok(())
}
