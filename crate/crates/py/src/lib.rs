//! Python bindings. Fields come back as plain lists of floats so the module
//! has no numpy dependency.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use thermoporo_core::cartesian::{self, compute_coefficients, Xi};
use thermoporo_core::numerics::bessel;
use thermoporo_core::numerics::Grid1D;
use thermoporo_core::parameters::carman_kozeny_muk;
use thermoporo_core::spherical::{self, SphericalParams};
use thermoporo_core::thermal::{solve_coupled_steady, solve_fourth_order, ThermalProblem};
use thermoporo_core::transient::run_scenario;
use thermoporo_core::{driver, Error, FieldProfile, RunConfig};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config { .. } | Error::Argument(_) | Error::Domain(_) | Error::Shape(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

type Columns = HashMap<String, Vec<f64>>;

#[pyfunction]
fn i0(x: f64) -> PyResult<f64> {
    bessel::i0(x).map_err(to_py)
}

#[pyfunction]
fn i1(x: f64) -> PyResult<f64> {
    bessel::i1(x).map_err(to_py)
}

#[pyfunction]
fn k0(x: f64) -> PyResult<f64> {
    bessel::k0(x).map_err(to_py)
}

/// `mu_f K` from the Carman-Kozeny relation.
#[pyfunction]
fn carman_kozeny(phi_f: f64, c_k: f64, d_c: f64) -> PyResult<f64> {
    carman_kozeny_muk(phi_f, c_k, d_c).map_err(to_py)
}

/// Closed-form spherical fields on `nodes` points of `[0, 1]`.
#[pyfunction]
#[pyo3(signature = (lam, phi_f, da, varrho=1.0, nodes=201))]
fn spherical_profiles(lam: f64, phi_f: f64, da: f64, varrho: f64, nodes: usize) -> PyResult<Columns> {
    let sp = SphericalParams::new(lam, phi_f, da, varrho).map_err(to_py)?;
    let grid = Grid1D::unit(nodes).map_err(to_py)?;
    let p = spherical::profiles(&sp, grid).map_err(to_py)?;
    Ok(HashMap::from([
        ("r".to_string(), grid.nodes()),
        ("pressure".to_string(), p.pressure.into_values()),
        ("velocity".to_string(), p.velocity.into_values()),
        ("displacement".to_string(), p.displacement.into_values()),
    ]))
}

#[pyfunction]
#[pyo3(signature = (lam, phi_f, da, nodes=201))]
fn spherical_flow_rate(lam: f64, phi_f: f64, da: f64, nodes: usize) -> PyResult<f64> {
    let sp = SphericalParams::new(lam, phi_f, da, 1.0).map_err(to_py)?;
    spherical::flow_rate(&sp, nodes).map_err(to_py)
}

/// Steady two-temperature solve for a sampled velocity on a uniform `[0, 1]` grid.
/// Returns `(theta_f, theta_s)`; `route` is "coupled" or "fourth_order".
#[pyfunction]
#[pyo3(signature = (pe_f, n, kappa, v_f, dv_f, route="coupled"))]
fn thermal_solve(
    pe_f: f64,
    n: f64,
    kappa: f64,
    v_f: Vec<f64>,
    dv_f: Vec<f64>,
    route: &str,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let grid = Grid1D::unit(v_f.len()).map_err(to_py)?;
    let v = FieldProfile::new(grid, v_f).map_err(to_py)?;
    let dv = FieldProfile::new(grid, dv_f).map_err(to_py)?;
    let p = ThermalProblem::new(pe_f, n, kappa, v, dv).map_err(to_py)?;
    match route {
        "coupled" => {
            let (tf, ts) = solve_coupled_steady(&p).map_err(to_py)?;
            Ok((tf.into_values(), ts.into_values()))
        }
        "fourth_order" => {
            let ts = solve_fourth_order(&p).map_err(to_py)?;
            let tf = thermoporo_core::thermal::recover_theta_f(&ts, n, kappa).map_err(to_py)?;
            Ok((tf.into_values(), ts.into_values()))
        }
        other => Err(PyValueError::new_err(format!("unknown route '{other}'"))),
    }
}

/// Run configuration: defaults plus `key = value` overrides.
#[pyclass(name = "Config")]
struct PyConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (text="", overrides=None))]
    fn new(text: &str, overrides: Option<HashMap<String, String>>) -> PyResult<Self> {
        let mut o: Vec<(String, String)> = overrides.unwrap_or_default().into_iter().collect();
        o.sort();
        let inner = RunConfig::parse_with_overrides(text, "<python>", &o).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: RunConfig::from_file(&path).map_err(to_py)? })
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(to_py)
    }

    fn get(&self, key: &str) -> PyResult<String> {
        self.inner.get(key).map_err(to_py)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Nondimensional groups as a name -> value mapping.
    fn groups(&self) -> PyResult<HashMap<String, f64>> {
        let g = driver::groups(&self.inner).map_err(to_py)?;
        Ok(g.entries().into_iter().map(|(n, v, _)| (n.to_string(), v)).collect())
    }

    /// Runs the configured model; returns `(tables, summary)` where each
    /// table maps column names to values.
    fn solve(&self) -> PyResult<(HashMap<String, Columns>, HashMap<String, f64>)> {
        let out = driver::solve(&self.inner).map_err(to_py)?;
        let tables = out
            .tables
            .into_iter()
            .map(|(name, t)| (name, t.header.into_iter().zip(t.columns).collect()))
            .collect();
        Ok((tables, out.summary.into_iter().collect()))
    }

    /// Runs the solver and writes the usual output files to `out`.
    fn write(&self, out: PathBuf) -> PyResult<HashMap<String, f64>> {
        let o = driver::cmd_solve(&self.inner, &out).map_err(to_py)?;
        Ok(o.summary.into_iter().collect())
    }

    /// Transient snapshots at `times` (seconds), each a column mapping with `t`.
    fn transient(&self, times: Vec<f64>) -> PyResult<Vec<Columns>> {
        let states = run_scenario(&self.inner.transient_config(), &times).map_err(to_py)?;
        Ok(states
            .into_iter()
            .map(|s| {
                HashMap::from([
                    ("t".to_string(), vec![s.t]),
                    ("r".to_string(), s.theta_f.grid().nodes()),
                    ("theta_f".to_string(), s.theta_f.into_values()),
                    ("theta_s".to_string(), s.theta_s.into_values()),
                    ("v_f".to_string(), s.v_f.into_values()),
                    ("u_s".to_string(), s.u_s.into_values()),
                ])
            })
            .collect())
    }

    /// One summary row per value of `key`, in input order.
    #[pyo3(signature = (key, values, threads=None))]
    fn sweep(&self, key: &str, values: Vec<String>, threads: Option<usize>) -> PyResult<Columns> {
        let out = driver::sweep(&self.inner, key, &values, threads).map_err(to_py)?;
        Ok(out.table.header.into_iter().zip(out.table.columns).collect())
    }

    fn __repr__(&self) -> String {
        format!("Config(model={})", self.inner.model.name())
    }
}

/// Cartesian closed-form fields for porosity `phi_f` at default parameters.
#[pyfunction]
#[pyo3(signature = (phi_f, nodes=201))]
fn cartesian_profiles(phi_f: f64, nodes: usize) -> PyResult<Columns> {
    let cfg = PyConfig::new("", Some(HashMap::from([("phi_f".to_string(), phi_f.to_string())])))?;
    let g = driver::groups(&cfg.inner).map_err(to_py)?;
    let c = compute_coefficients(&g, phi_f, Xi::Off).map_err(to_py)?;
    let grid = Grid1D::unit(nodes).map_err(to_py)?;
    let field = |f: &dyn Fn(f64) -> thermoporo_core::Result<f64>| -> PyResult<Vec<f64>> {
        grid.nodes().into_iter().map(|x| f(x).map_err(to_py)).collect()
    };
    Ok(HashMap::from([
        ("x".to_string(), grid.nodes()),
        ("v_f".to_string(), field(&|x| cartesian::fluid_velocity(&c, x))?),
        ("pressure".to_string(), field(&|x| cartesian::pressure(&c, x))?),
        ("u_s".to_string(), field(&|x| cartesian::displacement_closed_form(&c, x))?),
    ]))
}

#[pymodule]
fn thermoporo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(i0, m)?)?;
    m.add_function(wrap_pyfunction!(i1, m)?)?;
    m.add_function(wrap_pyfunction!(k0, m)?)?;
    m.add_function(wrap_pyfunction!(carman_kozeny, m)?)?;
    m.add_function(wrap_pyfunction!(spherical_profiles, m)?)?;
    m.add_function(wrap_pyfunction!(spherical_flow_rate, m)?)?;
    m.add_function(wrap_pyfunction!(cartesian_profiles, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_solve, m)?)?;
    m.add_class::<PyConfig>()?;
    Ok(())
}
