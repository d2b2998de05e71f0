//! Python bindings. Values cross the boundary in the instance's own terms;
//! normalization happens inside.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use casp_forge::format::{csp_to_json, emit_program, read_csp, serialize_csp};
use casp_forge::solver::{solve_csp, Heuristic, SolverConfig};
use casp_forge::{generate, oracle, propagate, verify};
use casp_forge::{
    encode as encode_csp, normalize, Assignment, ConstraintKind, CspInstance, DomainState, EncodeOptions,
    EncodingKind, RegionMode,
};

fn err(e: casp_forge::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = casp_forge::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn kind(encoding: &str, hall_bound: Option<usize>) -> PyResult<EncodingKind> {
    let k: EncodingKind = parse(encoding)?;
    Ok(match hall_bound {
        Some(h) => k.with_hall_bound(Some(h)),
        None => k,
    })
}

/// A finite-domain constraint satisfaction problem.
#[pyclass(name = "Csp", from_py_object)]
#[derive(Clone)]
struct PyCsp {
    inner: CspInstance,
}

#[pymethods]
impl PyCsp {
    #[new]
    fn new() -> Self {
        PyCsp {
            inner: CspInstance::new(),
        }
    }

    /// Parses the text format or its JSON mirror.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyCsp {
            inner: read_csp(text).map_err(err)?,
        })
    }

    fn add_variable(&mut self, name: &str, domain: Vec<i64>) -> PyResult<()> {
        self.inner.add_variable(name, domain).map(|_| ()).map_err(err)
    }

    fn add_alldiff(&mut self, id: &str, scope: Vec<String>) -> PyResult<()> {
        self.inner
            .add_constraint(id, &scope, ConstraintKind::AllDifferent)
            .map_err(err)
    }

    fn add_neq(&mut self, id: &str, x: &str, y: &str) -> PyResult<()> {
        self.inner
            .add_constraint(id, &[x, y], ConstraintKind::NotEqual)
            .map_err(err)
    }

    fn add_allowed(&mut self, id: &str, scope: Vec<String>, tuples: Vec<Vec<i64>>) -> PyResult<()> {
        let tuples: BTreeSet<Vec<i64>> = tuples.into_iter().collect();
        self.inner
            .add_constraint(id, &scope, ConstraintKind::Allowed(tuples))
            .map_err(err)
    }

    fn add_forbidden(&mut self, id: &str, scope: Vec<String>, tuples: Vec<Vec<i64>>) -> PyResult<()> {
        let tuples: BTreeSet<Vec<i64>> = tuples.into_iter().collect();
        self.inner
            .add_constraint(id, &scope, ConstraintKind::Forbidden(tuples))
            .map_err(err)
    }

    /// `{name: sorted domain}` in declaration order.
    fn variables(&self) -> Vec<(String, Vec<i64>)> {
        self.inner
            .variables()
            .iter()
            .map(|v| (v.name.clone(), v.domain.iter().copied().collect()))
            .collect()
    }

    fn constraint_count(&self) -> usize {
        self.inner.constraints().len()
    }

    /// True when the complete assignment satisfies every constraint.
    fn is_solution(&self, assignment: BTreeMap<String, i64>) -> PyResult<bool> {
        let mut a = Assignment::new();
        for (k, v) in assignment {
            a.insert(k, v);
        }
        Ok(self.inner.evaluate(&a).map_err(err)?.is_solution)
    }

    fn to_text(&self) -> String {
        serialize_csp(&self.inner)
    }

    fn to_json(&self) -> String {
        csp_to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Csp(variables={}, constraints={})",
            self.inner.variables().len(),
            self.inner.constraints().len()
        )
    }
}

#[pyfunction]
fn pigeonhole(n: usize) -> PyResult<PyCsp> {
    Ok(PyCsp {
        inner: generate::gen_pigeonhole(n).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (n, ratio, seed=0))]
fn qcp(n: usize, ratio: f64, seed: u64) -> PyResult<PyCsp> {
    Ok(PyCsp {
        inner: generate::gen_qcp(n, ratio, seed).map_err(err)?,
    })
}

#[pyfunction]
fn graceful_double_wheel(n: usize) -> PyResult<PyCsp> {
    Ok(PyCsp {
        inner: generate::gen_graceful_double_wheel(n).map_err(err)?,
    })
}

/// The ground program as text. Atoms refer to normalized values `1..d`.
#[pyfunction]
#[pyo3(signature = (csp, encoding="support", hall_bound=None, regions="maximal"))]
fn encode(csp: &PyCsp, encoding: &str, hall_bound: Option<usize>, regions: &str) -> PyResult<String> {
    let norm = normalize(&csp.inner).map_err(err)?;
    let opts = EncodeOptions {
        regions: parse::<RegionMode>(regions)?,
    };
    let enc = encode_csp(&norm.csp, &DomainState::from_csp(&norm.csp), kind(encoding, hall_bound)?, opts)
        .map_err(err)?;
    Ok(emit_program(&enc.program))
}

type Domains = BTreeMap<String, Vec<i64>>;

/// Normalized domain state for `domains`; unnamed variables keep their
/// declared domain, values outside it are ignored.
fn domain_state(csp: &CspInstance, norm: &casp_forge::Normalized, domains: &Option<Domains>) -> PyResult<DomainState> {
    let mut out = Vec::new();
    for (v, decl) in csp.variables().iter().enumerate() {
        let values: Vec<i64> = match domains.as_ref().and_then(|d| d.get(&decl.name)) {
            Some(vals) => vals.clone(),
            None => decl.domain.iter().copied().collect(),
        };
        out.push(values.iter().filter_map(|&x| norm.value_maps[v].to_normalized(x)).collect());
    }
    if let Some(d) = domains {
        if let Some(name) = d.keys().find(|k| csp.var_id(k).is_none()) {
            return Err(err(casp_forge::Error::UnknownVariable(name.clone())));
        }
    }
    Ok(DomainState::new(out))
}

fn back(csp: &CspInstance, norm: &casp_forge::Normalized, ds: &DomainState) -> Option<Domains> {
    if ds.is_wiped_out() {
        return None;
    }
    Some(
        csp.variables()
            .iter()
            .enumerate()
            .map(|(v, decl)| {
                let vals = ds.get(v).iter().filter_map(|&x| norm.value_maps[v].to_original(x)).collect();
                (decl.name.clone(), vals)
            })
            .collect(),
    )
}

/// Unit propagation of the encoding restricted to `domains`. Returns the
/// pruned domains, or None on a wipe-out.
#[pyfunction]
#[pyo3(name = "propagate", signature = (csp, domains=None, encoding="support", hall_bound=None))]
fn propagate_domains(csp: &PyCsp, domains: Option<Domains>, encoding: &str, hall_bound: Option<usize>) -> PyResult<Option<Domains>> {
    let norm = normalize(&csp.inner).map_err(err)?;
    let ds = domain_state(&csp.inner, &norm, &domains)?;
    let out = propagate::propagate_encoding(&norm.csp, &ds, kind(encoding, hall_bound)?).map_err(err)?;
    Ok(back(&csp.inner, &norm, &out))
}

/// Reference consistency: `ac`, `bound`, `range` or `domain`.
#[pyfunction]
#[pyo3(signature = (csp, level, domains=None))]
fn enforce(csp: &PyCsp, level: &str, domains: Option<Domains>) -> PyResult<Option<Domains>> {
    let norm = normalize(&csp.inner).map_err(err)?;
    let ds = domain_state(&csp.inner, &norm, &domains)?;
    let out = match level {
        "ac" => oracle::enforce_ac_binary(&norm.csp, &ds),
        "bound" => oracle::enforce_bound(&norm.csp, &ds),
        "range" => oracle::enforce_range(&norm.csp, &ds),
        "domain" => oracle::enforce_domain(&norm.csp, &ds),
        other => return Err(PyValueError::new_err(format!("unknown consistency `{other}`"))),
    }
    .map_err(err)?;
    Ok(back(&csp.inner, &norm, &out))
}

#[pyclass(name = "Solution", get_all)]
struct PySolution {
    status: String,
    assignment: Option<BTreeMap<String, i64>>,
    decisions: u64,
    conflicts: u64,
    propagations: u64,
    restarts: u64,
    time_s: f64,
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!("Solution(status={:?}, conflicts={})", self.status, self.conflicts)
    }
}

#[pyfunction]
#[pyo3(signature = (csp, encoding="support", hall_bound=None, heuristic="activity", seed=0, budget_s=None, budget_conflicts=None))]
fn solve(
    csp: &PyCsp,
    encoding: &str,
    hall_bound: Option<usize>,
    heuristic: &str,
    seed: u64,
    budget_s: Option<f64>,
    budget_conflicts: Option<u64>,
) -> PyResult<PySolution> {
    let cfg = SolverConfig {
        heuristic: parse::<Heuristic>(heuristic)?,
        seed,
        time_budget: budget_s.map(Duration::from_secs_f64),
        conflict_budget: budget_conflicts,
        ..SolverConfig::default()
    };
    let out = solve_csp(&csp.inner, kind(encoding, hall_bound)?, EncodeOptions::default(), &cfg).map_err(err)?;
    Ok(PySolution {
        status: out.status.to_string(),
        assignment: out
            .assignment
            .map(|a| a.iter().map(|(k, v)| (k.to_string(), v)).collect()),
        decisions: out.stats.decisions,
        conflicts: out.stats.conflicts,
        propagations: out.stats.propagations,
        restarts: out.stats.restarts,
        time_s: out.stats.time_s,
    })
}

/// Runs a randomised cross-check and returns `(agreed, instances)`.
#[pyfunction]
#[pyo3(name = "verify", signature = (oracle="ac", instances=100, seed=0))]
fn run_verify(oracle: &str, instances: usize, seed: u64) -> PyResult<(usize, usize)> {
    let report = match oracle {
        "semantic" => verify::semantic_suite(instances, seed),
        "cardinality" => verify::cardinality_suite(instances, seed),
        other => verify::run_suite(parse(other)?, instances, seed),
    }
    .map_err(err)?;
    Ok((report.agreed, report.instances))
}

#[pymodule]
#[pyo3(name = "casp_forge")]
fn casp_forge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCsp>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(pigeonhole, m)?)?;
    m.add_function(wrap_pyfunction!(qcp, m)?)?;
    m.add_function(wrap_pyfunction!(graceful_double_wheel, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_domains, m)?)?;
    m.add_function(wrap_pyfunction!(enforce, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
