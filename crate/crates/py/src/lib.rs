use num_bigint::BigInt;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde_json::{json, Value};

use ::powerarith::congruence;
use ::powerarith::formula::emit::{self, EmitParams};
use ::powerarith::formula::{self, EvalOutcome, EvalWindow, SatBudget, SatOutcome};
use ::powerarith::ineq::{self, Budget, IneqOutcome, LinearIneqSystem};
use ::powerarith::kronecker::{self, OpenInterval};
use ::powerarith::mann::{self, PowerEquation};
use ::powerarith::numerics::parse_rat;
use ::powerarith::{congruence::CongruenceSystem, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::BudgetExhausted(_) | Error::PrecisionExhausted { .. } | Error::WindowTooLarge { .. } | Error::Overflow(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Converts through the `json` module so records keep their documented shape.
fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    PyModule::import(py, "json")?.call_method1("loads", (v.to_string(),))
}

fn interval(lo: &str, hi: &str) -> PyResult<OpenInterval> {
    OpenInterval::new(parse_rat(lo).map_err(err)?, parse_rat(hi).map_err(err)?).map_err(err)
}

#[pyfunction]
fn carmichael_lambda(n: u64) -> PyResult<u64> {
    if n == 0 {
        return Err(PyValueError::new_err("n must be at least 1"));
    }
    Ok(congruence::carmichael_lambda(n))
}

/// `(preperiod, period, residues)` of `base^e mod modulus`.
#[pyfunction]
fn power_residues(base: u64, modulus: u64) -> PyResult<(u64, u64, Vec<u64>)> {
    let c = congruence::power_residues(base, modulus).map_err(err)?;
    Ok((c.preperiod, c.period, c.residues))
}

#[pyfunction]
fn excluded_residues(base: u64, modulus: u64) -> PyResult<Vec<u64>> {
    Ok(congruence::excluded_residues(base, modulus).map_err(err)?.into_iter().collect())
}

/// Exponents `(s, t)` with `k^s / l^t` strictly between `lo` and `hi`.
#[pyfunction]
fn find_ratio_in(k: u64, l: u64, lo: &str, hi: &str) -> PyResult<(u64, u64)> {
    let w = kronecker::find_ratio_in(k, l, &interval(lo, hi)?).map_err(err)?;
    Ok((w.s, w.t))
}

#[pyfunction]
fn find_frac_hit(k: u64, l: u64, lo: &str, hi: &str) -> PyResult<u64> {
    kronecker::find_frac_hit(k, l, &interval(lo, hi)?).map_err(err)
}

/// `Σ a_i l_i^{x_i} = b l_{n+1}^{x_{n+1}}`.
#[pyclass(name = "PowerEquation", frozen, module = "powerarith")]
struct PyPowerEquation {
    inner: PowerEquation,
}

#[pymethods]
impl PyPowerEquation {
    #[new]
    fn new(coeffs: Vec<BigInt>, rhs: BigInt, bases: Vec<u64>) -> PyResult<Self> {
        Ok(PyPowerEquation { inner: PowerEquation::new(coeffs, rhs, bases).map_err(err)? })
    }

    /// Parses the inline form, e.g. `"1*3^a - 1*2^b = 1*2^c"`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyPowerEquation { inner: PowerEquation::parse_inline(text).map_err(err)? })
    }

    fn holds(&self, exponents: Vec<u64>) -> bool {
        exponents.len() == self.inner.n() + 1 && self.inner.holds(&exponents)
    }

    #[pyo3(signature = (bound = mann::DEFAULT_MANN_BOUND))]
    fn solutions(&self, bound: u64) -> PyResult<Vec<Vec<u64>>> {
        mann::enumerate_solutions(&self.inner, bound).map_err(err)
    }

    /// Family and isolated-solution records.
    #[pyo3(signature = (bound = mann::DEFAULT_MANN_BOUND))]
    fn families<'py>(&self, py: Python<'py>, bound: u64) -> PyResult<Bound<'py, PyAny>> {
        let set = mann::family_structure(&self.inner, bound).map_err(err)?;
        to_py(py, &Value::Array(set.to_json_records()))
    }

    #[pyo3(signature = (bound = mann::DEFAULT_MANN_BOUND))]
    fn axiom(&self, bound: u64) -> PyResult<String> {
        Ok(mann::mann_axiom(&self.inner, bound).map_err(err)?.formula.render())
    }

    fn __repr__(&self) -> String {
        format!("PowerEquation({})", self.inner)
    }
}

/// Homogeneous strict system over powers, read from its JSON form.
#[pyclass(name = "IneqSystem", frozen, module = "powerarith")]
struct PyIneqSystem {
    system: LinearIneqSystem,
    congruences: CongruenceSystem,
}

#[pymethods]
impl PyIneqSystem {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let (system, congruences) = LinearIneqSystem::from_json(&value).map_err(err)?;
        Ok(PyIneqSystem { system, congruences })
    }

    fn holds(&self, exponents: Vec<u64>) -> bool {
        exponents.len() == self.system.vars.len() && self.system.holds(&exponents)
    }

    /// `{"status": "sat", "exponents": {...}}`, `{"status": "unsat"}` or
    /// `{"status": "unknown", "reason": ...}`.
    fn solve<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let rec = match ineq::solve_with_congruences(&self.system, &self.congruences, &Budget::default()).map_err(err)? {
            IneqOutcome::Sat(w) => json!({"status": "sat", "exponents": w.to_json(&self.system)}),
            IneqOutcome::Unsat => json!({"status": "unsat"}),
            IneqOutcome::Unknown(reason) => json!({"status": "unknown", "reason": reason}),
        };
        to_py(py, &rec)
    }

    fn __repr__(&self) -> String {
        format!("IneqSystem({})", self.system.to_json())
    }
}

/// Canonical text of a formula.
#[pyfunction]
fn parse_formula(text: &str) -> PyResult<String> {
    Ok(formula::parse(text).map_err(err)?.render())
}

/// Evaluates a sentence on the window `[-bound, bound]` with powers up to `height`.
#[pyfunction]
#[pyo3(signature = (text, bound = BigInt::from(1_000_000), height = BigInt::from(1u64 << 40)))]
fn check<'py>(py: Python<'py>, text: &str, bound: BigInt, height: BigInt) -> PyResult<Bound<'py, PyAny>> {
    let f = formula::parse(text).map_err(err)?;
    let rec = match formula::eval_window(&f, &EvalWindow::new(bound, height)).map_err(err)? {
        EvalOutcome::Pass { coverage, points } => {
            json!({"status": "pass", "coverage": coverage.as_str(), "points": points.to_string()})
        }
        EvalOutcome::Counterexample(env) => {
            let assignment: serde_json::Map<String, Value> =
                env.into_iter().map(|(k, v)| (k, Value::String(v.to_string()))).collect();
            json!({"status": "counterexample", "assignment": assignment})
        }
    };
    to_py(py, &rec)
}

/// Decides a conjunction of literals over power variables.
#[pyfunction]
fn sat<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let f = formula::parse(text).map_err(err)?;
    let rec = match formula::sat_conjunction(&f, &SatBudget::default()).map_err(err)? {
        SatOutcome::Sat(values) => {
            let assignment: serde_json::Map<String, Value> =
                values.into_iter().map(|(k, v)| (k, Value::String(v.to_string()))).collect();
            json!({"status": "sat", "assignment": assignment})
        }
        SatOutcome::Unsat => json!({"status": "unsat"}),
        SatOutcome::Unknown(reason) => json!({"status": "unknown", "reason": reason}),
    };
    to_py(py, &rec)
}

/// Axiom records of `T` or `Tforall` over `bases`; `params` is a JSON object.
#[pyfunction]
#[pyo3(signature = (theory, bases, params = None))]
fn emit_axioms<'py>(py: Python<'py>, theory: &str, bases: Vec<u64>, params: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let params: EmitParams = match params {
        Some(p) => serde_json::from_str(p).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => EmitParams::default(),
    };
    let stream = match theory {
        "T" => emit::emit_t(&bases, &params),
        "Tforall" => emit::emit_tforall(&bases, &params),
        other => return Err(PyValueError::new_err(format!("unknown theory {other:?}; expected T or Tforall"))),
    }
    .map_err(err)?;
    let records = stream.map(|ax| ax.map(|a| a.to_json())).collect::<Result<Vec<_>, _>>().map_err(err)?;
    to_py(py, &Value::Array(records))
}

#[pyfunction]
fn definability_rewrite(k: u64, l: u64) -> PyResult<String> {
    Ok(emit::definability_rewrite(k, l).map_err(err)?.render())
}

#[pymodule(name = "powerarith")]
fn powerarith_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPowerEquation>()?;
    m.add_class::<PyIneqSystem>()?;
    m.add_function(wrap_pyfunction!(carmichael_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(power_residues, m)?)?;
    m.add_function(wrap_pyfunction!(excluded_residues, m)?)?;
    m.add_function(wrap_pyfunction!(find_ratio_in, m)?)?;
    m.add_function(wrap_pyfunction!(find_frac_hit, m)?)?;
    m.add_function(wrap_pyfunction!(parse_formula, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(sat, m)?)?;
    m.add_function(wrap_pyfunction!(emit_axioms, m)?)?;
    m.add_function(wrap_pyfunction!(definability_rewrite, m)?)?;
    Ok(())
}
