use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lab::harness::config::ExperimentConfig;
use lab::harness::experiments::{run_experiment, Experiment, RunOptions};
use lab::measures::SpectralMeasure;
use lab::quasi_lorentzian::{self as ql, ConstantShift, QuasiLorentzian};
use lab::rank_one::{self, RankOneModel};
use lab::sturm_liouville::{self as sl, AssembledModel};
use lab::Error;

create_exception!(resonance_lab, ResonanceError, PyException);
create_exception!(resonance_lab, HypothesisError, ResonanceError);
create_exception!(resonance_lab, ConvergenceError, ResonanceError);
create_exception!(resonance_lab, ConfigError, ResonanceError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        2 => HypothesisError::new_err(msg),
        3 => ConvergenceError::new_err(msg),
        4 => ConfigError::new_err(msg),
        _ => ResonanceError::new_err(msg),
    }
}

/// Smooth cutoff equal to 1 on `[a0, b0]` and supported in `[a, b]`.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct CutoffFunction(ql::CutoffFunction);

#[pymethods]
impl CutoffFunction {
    #[new]
    fn new(a: f64, a0: f64, b0: f64, b: f64) -> PyResult<Self> {
        ql::CutoffFunction::new(a, a0, b0, b).map(Self).map_err(to_py)
    }

    fn __call__(&self, x: f64) -> f64 {
        self.0.eval(x)
    }

    #[getter]
    fn support(&self) -> (f64, f64) {
        self.0.support()
    }

    #[getter]
    fn plateau(&self) -> (f64, f64) {
        self.0.plateau()
    }
}

/// Line shape of one coupling together with its resonance parameters.
#[pyclass(frozen)]
struct LineShape(QuasiLorentzian);

#[pymethods]
impl LineShape {
    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa()
    }

    #[getter]
    fn lambda_kappa(&self) -> f64 {
        self.0.params().lambda_kappa
    }

    #[getter]
    fn lambda_inf(&self) -> f64 {
        self.0.params().lambda_inf
    }

    #[getter]
    fn zeta(&self) -> Complex64 {
        self.0.params().zeta
    }

    #[getter]
    fn c(&self) -> Complex64 {
        self.0.params().c
    }

    #[getter]
    fn decay_rate(&self) -> f64 {
        self.0.params().decay_rate()
    }

    fn density(&self, x: f64) -> f64 {
        self.0.line_shape(x)
    }

    fn fourier_integral(&self, py: Python<'_>, t: f64) -> PyResult<Complex64> {
        py.detach(|| self.0.fourier_integral(t)).map_err(to_py)
    }

    fn error_term(&self, py: Python<'_>, t: f64) -> PyResult<Complex64> {
        py.detach(|| self.0.error_term(t)).map_err(to_py)
    }

    /// `(amplitude, exponential, remainder)` at time `t`.
    fn survival(&self, py: Python<'_>, t: f64) -> PyResult<(Complex64, Complex64, Complex64)> {
        let s = py.detach(|| rank_one::survival_from(&self.0, t)).map_err(to_py)?;
        Ok((s.amplitude, s.exponential, s.remainder))
    }

    #[pyo3(signature = (t_max=None))]
    fn sojourn<'py>(&self, py: Python<'py>, t_max: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
        let s = py.detach(|| rank_one::sojourn_from(&self.0, t_max)).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("tau", s.tau)?;
        d.set_item("lifetime", s.lifetime)?;
        d.set_item("difference", s.difference())?;
        d.set_item("normalized", s.normalized())?;
        d.set_item("tail", s.tail)?;
        d.set_item("t_max", s.t_max)?;
        Ok(d)
    }

    fn concentration(&self, py: Python<'_>, t: f64) -> PyResult<Complex64> {
        py.detach(|| rank_one::concentration_from(&self.0, t)).map_err(to_py)
    }
}

/// Lorentzian surrogate with constant level shift `F ≡ shift`.
#[pyfunction]
fn constant_shift_line_shape(
    cutoff: CutoffFunction,
    shift: Complex64,
    lambda_kappa: f64,
    kappa: f64,
) -> PyResult<LineShape> {
    QuasiLorentzian::new(cutoff.0, Arc::new(ConstantShift(shift)), lambda_kappa, kappa)
        .map(LineShape)
        .map_err(to_py)
}

/// Rank-one model built from a flat background density on `[lo, hi]`.
#[pyclass(frozen)]
struct RankOne(RankOneModel);

#[pymethods]
impl RankOne {
    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (lambda0, overlap, density, lo, hi, window, alpha=1.0))]
    fn constant_background(
        py: Python<'_>,
        lambda0: f64,
        overlap: Complex64,
        density: f64,
        lo: f64,
        hi: f64,
        window: (f64, f64),
        alpha: f64,
    ) -> PyResult<Self> {
        py.detach(|| {
            let measure = SpectralMeasure::constant(density, lo, hi)?;
            RankOneModel::new(lambda0, overlap, measure, window, alpha)
        })
        .map(Self)
        .map_err(to_py)
    }

    fn f0(&self, lambda: f64) -> PyResult<Complex64> {
        self.0.f0_boundary(lambda).map_err(to_py)
    }

    fn reduced_resolvent(&self, kappa: f64, lambda: f64) -> PyResult<Complex64> {
        self.0.reduced_resolvent(kappa, lambda).map_err(to_py)
    }

    fn line_shape(&self, py: Python<'_>, kappa: f64, cutoff: CutoffFunction) -> PyResult<LineShape> {
        py.detach(|| self.0.line_shape(kappa, cutoff.0)).map(LineShape).map_err(to_py)
    }

    fn golden_rule_width(&self) -> PyResult<f64> {
        rank_one::golden_rule_width(&self.0).map_err(to_py)
    }
}

/// Half-line Schrödinger operator with an embedded eigenvalue at 1.
#[pyclass(frozen)]
struct SturmLiouvilleModel(AssembledModel);

#[pymethods]
impl SturmLiouvilleModel {
    #[new]
    #[pyo3(signature = (k=1.0, lambda_max=None))]
    fn new(py: Python<'_>, k: f64, lambda_max: Option<f64>) -> PyResult<Self> {
        py.detach(|| {
            let mut m = sl::SlModel::new(k)?;
            if let Some(l) = lambda_max {
                m.lambda_max = l;
            }
            sl::build_rank_one_model(&m)
        })
        .map(Self)
        .map_err(to_py)
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.sl.k
    }

    #[getter]
    fn gamma0(&self) -> f64 {
        self.0.gamma0
    }

    #[getter]
    fn overlap(&self) -> f64 {
        self.0.overlap_spectral
    }

    #[getter]
    fn overlap_direct(&self) -> f64 {
        self.0.overlap_direct
    }

    #[getter]
    fn u_at_one(&self) -> f64 {
        self.0.u_at_one
    }

    fn background_density(&self, lambda: f64) -> f64 {
        self.0.background_density(lambda)
    }

    fn f0(&self, lambda: f64) -> PyResult<Complex64> {
        self.0.rank_one.f0_boundary(lambda).map_err(to_py)
    }

    fn line_shape(&self, py: Python<'_>, kappa: f64, cutoff: CutoffFunction) -> PyResult<LineShape> {
        py.detach(|| self.0.rank_one.line_shape(kappa, cutoff.0))
            .map(LineShape)
            .map_err(to_py)
    }

    fn rank_one(&self) -> RankOne {
        RankOne(self.0.rank_one.clone())
    }
}

#[pyfunction]
fn krein_transform(f0: Complex64, kappa: f64) -> PyResult<Complex64> {
    rank_one::krein_transform(f0, kappa).map_err(to_py)
}

/// Boundary value of the Borel transform of `√λ dλ / (π(λ + k²))` on `λ ≥ 0`.
#[pyfunction]
fn free_halfline_boundary_value(k: f64, lambda: f64) -> PyResult<Complex64> {
    SpectralMeasure::free_halfline(k)
        .and_then(|m| m.boundary_value(lambda))
        .map_err(to_py)
}

#[pyfunction]
fn potential_q(x: f64, k: f64) -> f64 {
    sl::potential_q(x, k)
}

#[pyfunction]
fn eigenfunction_phi(x: f64, k: f64) -> f64 {
    sl::eigenfunction_phi(x, k)
}

/// Runs `experiment` from a TOML config and returns the CSV files written.
#[pyfunction]
#[pyo3(signature = (experiment, config, out, serial=false))]
fn run(py: Python<'_>, experiment: &str, config: PathBuf, out: PathBuf, serial: bool) -> PyResult<Vec<PathBuf>> {
    let experiment: Experiment = experiment.parse().map_err(to_py)?;
    py.detach(|| {
        let config = ExperimentConfig::load(&config)?;
        run_experiment(experiment, &config, &out, RunOptions { serial })
    })
    .map_err(to_py)
}

#[pymodule(name = "resonance_lab")]
fn resonance_lab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ResonanceError", py.get_type::<ResonanceError>())?;
    m.add("HypothesisError", py.get_type::<HypothesisError>())?;
    m.add("ConvergenceError", py.get_type::<ConvergenceError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add_class::<CutoffFunction>()?;
    m.add_class::<LineShape>()?;
    m.add_class::<RankOne>()?;
    m.add_class::<SturmLiouvilleModel>()?;
    m.add_function(wrap_pyfunction!(constant_shift_line_shape, m)?)?;
    m.add_function(wrap_pyfunction!(krein_transform, m)?)?;
    m.add_function(wrap_pyfunction!(free_halfline_boundary_value, m)?)?;
    m.add_function(wrap_pyfunction!(potential_q, m)?)?;
    m.add_function(wrap_pyfunction!(eigenfunction_phi, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
