//! Python bindings. Money crosses the boundary as integer cents; structured
//! results come back as plain dicts built from the JSON the CLI prints.

use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use rankmatch::analysis::{self, ols::SeKind, stats::Alternative};
use rankmatch::elicitation::{self, MplPayment, MplResponse};
use rankmatch::equilibrium::{self, LowerStage, SymmetricInstance};
use rankmatch::mechanisms::{self, MechanismKind, TieBreakOrder};
use rankmatch::simulation::{self, LowerRanking, SimConfig, StrategyProfile};
use rankmatch::{Cents, Error, Exact, MarketInstance, RankList, RhoSchedule, ValueMatrix};

create_exception!(rankmatch, RankmatchError, PyValueError);

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => RankmatchError::new_err(other.to_string()),
    }
}

fn kind(s: &str) -> PyResult<MechanismKind> {
    s.parse().map_err(err)
}

fn parse_reports(lists: Vec<Vec<usize>>) -> PyResult<Vec<RankList>> {
    lists.into_iter().map(|l| RankList::new(l).map_err(err)).collect()
}

fn cents(xs: Vec<i64>) -> Vec<Cents> {
    xs.into_iter().map(Cents).collect()
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| err(e.into()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn fraction(py: Python<'_>, x: &Exact) -> PyResult<Py<PyAny>> {
    let f = py.import("fractions")?.getattr("Fraction")?;
    Ok(f.call1((*x.numer(), *x.denom()))?.unbind())
}

fn from_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| RankmatchError::new_err(format!("{what}: {e}")))
}

/// A market: `values[agent][good]` and `rho[rank - 1]` in cents.
#[pyclass(name = "Market", frozen)]
struct PyMarket(MarketInstance);

#[pymethods]
impl PyMarket {
    #[new]
    #[pyo3(signature = (values, rho, goods=None))]
    fn new(values: Vec<Vec<i64>>, rho: Vec<i64>, goods: Option<Vec<String>>) -> PyResult<Self> {
        let values = ValueMatrix::new(values.into_iter().map(cents).collect()).map_err(err)?;
        let rho = RhoSchedule::new(cents(rho)).map_err(err)?;
        let m = match goods {
            Some(labels) => MarketInstance::new(labels, values, rho),
            None => MarketInstance::unlabelled(values, rho),
        };
        m.map(PyMarket).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        from_json("market", text).map(PyMarket)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| err(e.into()))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!("Market(n={})", self.0.n())
    }
}

/// The symmetric two-popular-goods environment, in cents.
#[pyclass(name = "SymmetricInstance", frozen)]
struct PyInstance(SymmetricInstance);

#[pymethods]
impl PyInstance {
    #[new]
    fn new(n: usize, v1: i64, v2: i64, vbar: i64, rho: Vec<i64>) -> PyResult<Self> {
        let rho = RhoSchedule::new(cents(rho)).map_err(err)?;
        SymmetricInstance::new(n, Cents(v1), Cents(v2), Cents(vbar), rho)
            .map(PyInstance)
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        from_json("instance", text).map(PyInstance)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| err(e.into()))
    }

    fn market(&self) -> PyMarket {
        PyMarket(self.0.to_market())
    }

    /// Solver report for both mechanisms.
    #[pyo3(signature = (brute_force=false))]
    fn solve(&self, py: Python<'_>, brute_force: bool) -> PyResult<Py<PyAny>> {
        let r = equilibrium::solver_report(&self.0, brute_force).map_err(err)?;
        to_py(py, &r)
    }

    /// Whether everyone listing goods by value is an equilibrium.
    fn truthtelling_is_equilibrium(&self, mechanism: &str) -> PyResult<bool> {
        equilibrium::check_truthtelling_equilibrium(kind(mechanism)?, &self.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "SymmetricInstance(n={}, v1={}, v2={}, vbar={})",
            self.0.n(),
            self.0.v1(),
            self.0.v2(),
            self.0.vbar()
        )
    }
}

/// Assignment (`good` per agent) for one tie-break order.
#[pyfunction]
fn run_mechanism(mechanism: &str, reports: Vec<Vec<usize>>, order: Vec<usize>) -> PyResult<Vec<usize>> {
    let order = TieBreakOrder::new(order).map_err(err)?;
    let m = mechanisms::run(kind(mechanism)?, &parse_reports(reports)?, &order).map_err(err)?;
    Ok(m.assignment().to_vec())
}

/// Draws the order from `seed` and evaluates the outcome in `market`.
#[pyfunction]
fn run_random(
    py: Python<'_>,
    mechanism: &str,
    market: &PyMarket,
    reports: Vec<Vec<usize>>,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let (outcome, order) = mechanisms::run_random(kind(mechanism)?, &market.0, &parse_reports(reports)?, seed).map_err(err)?;
    let doc = serde_json::json!({
        "order": order.as_slice(),
        "assignment": outcome.matching.assignment(),
        "received_rank": outcome.received_rank,
        "utility": outcome.utility,
        "welfare_total": outcome.welfare_total,
    });
    to_py(py, &doc)
}

/// Exact expected utility per agent, in cents, as `fractions.Fraction`.
#[pyfunction]
fn expected_utilities(
    py: Python<'_>,
    mechanism: &str,
    market: &PyMarket,
    reports: Vec<Vec<usize>>,
) -> PyResult<Vec<Py<PyAny>>> {
    let eu = mechanisms::exact_expected_utilities(kind(mechanism)?, &parse_reports(reports)?, &market.0).map_err(err)?;
    eu.iter().map(|x| fraction(py, x)).collect()
}

#[pyfunction]
fn is_pareto_efficient(assignment: Vec<usize>, reports: Vec<Vec<usize>>) -> PyResult<bool> {
    let m = rankmatch::Matching::new(assignment).map_err(err)?;
    mechanisms::is_pareto_efficient(&m, &parse_reports(reports)?).map_err(err)
}

/// Monte Carlo over tie-break orders. Pass either fixed `reports` or, for a
/// symmetric market, `n1` agents listing the most valuable good first.
#[pyfunction]
#[pyo3(signature = (mechanism, market, *, reports=None, n1=None, replications=100_000, seed=1,
                    lower_stage="shared_tie_break", lower_ranking="common"))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    mechanism: &str,
    market: &PyMarket,
    reports: Option<Vec<Vec<usize>>>,
    n1: Option<usize>,
    replications: u64,
    seed: u64,
    lower_stage: &str,
    lower_ranking: &str,
) -> PyResult<Py<PyAny>> {
    let profile = match (reports, n1) {
        (Some(r), None) => StrategyProfile::fixed(parse_reports(r)?),
        (None, Some(k)) => StrategyProfile::structured(market.0.n(), k),
        _ => return Err(RankmatchError::new_err("pass exactly one of reports or n1")),
    };
    let stage: LowerStage = from_json("lower_stage", &format!("{lower_stage:?}"))?;
    let ranking: LowerRanking = from_json("lower_ranking", &format!("{lower_ranking:?}"))?;
    let cfg = SimConfig::new(replications, seed)
        .with_lower_stage(stage)
        .with_lower_ranking(ranking);
    let k = kind(mechanism)?;
    let rep = py.detach(|| simulation::simulate(k, &market.0, &profile, cfg).map_err(err))?;
    to_py(py, &rep)
}

#[pyfunction]
fn decode_mpl(screen1_row: u8, screen2_row: u8) -> PyResult<i64> {
    Ok(elicitation::decode_mpl(MplResponse::new(screen1_row, screen2_row).map_err(err)?).0)
}

#[pyfunction]
fn encode_mpl(value_cents: i64) -> PyResult<(u8, u8)> {
    let r = elicitation::encode_mpl(Cents(value_cents)).map_err(err)?;
    Ok((r.screen1_row(), r.screen2_row()))
}

/// Cents paid, or `None` when the subject keeps the object.
#[pyfunction]
fn resolve_mpl_payment(screen1_row: u8, screen2_row: u8, draw1: u8, draw2: u8) -> PyResult<Option<i64>> {
    let resp = MplResponse::new(screen1_row, screen2_row).map_err(err)?;
    Ok(match elicitation::resolve_mpl_payment(resp, draw1, draw2).map_err(err)? {
        MplPayment::KeepObject => None,
        MplPayment::Money(c) => Some(c.0),
    })
}

#[pyfunction]
#[pyo3(signature = (groups, alternative="decreasing"))]
fn jonckheere_terpstra(py: Python<'_>, groups: Vec<Vec<f64>>, alternative: &str) -> PyResult<Py<PyAny>> {
    let alt = match alternative {
        "decreasing" => Alternative::Decreasing,
        "increasing" => Alternative::Increasing,
        other => return Err(RankmatchError::new_err(format!("unknown alternative {other:?}"))),
    };
    to_py(py, &analysis::stats::jonckheere_terpstra(&groups, alt).map_err(err)?)
}

#[pyfunction]
fn wilcoxon_ranksum(py: Python<'_>, a: Vec<f64>, b: Vec<f64>) -> PyResult<Py<PyAny>> {
    to_py(py, &analysis::stats::wilcoxon_ranksum(&a, &b).map_err(err)?)
}

/// Full analysis of a session CSV; tolerances in cents.
#[pyfunction]
#[pyo3(signature = (path, tolerances=vec![0, 200], robust=false))]
fn analyze_session(py: Python<'_>, path: &str, tolerances: Vec<i64>, robust: bool) -> PyResult<Py<PyAny>> {
    let records = analysis::load_session(path).map_err(err)?;
    let se = if robust { SeKind::Hc1 } else { SeKind::Classical };
    let report = analysis::report::analyze(&records, &cents(tolerances), se);
    to_py(py, &report)
}

/// Writes a synthetic session with the planted `rho` (five entries, cents).
#[pyfunction]
#[pyo3(signature = (path, groups_per_treatment, rho, seed=1, noise_sd_cents=0.0, misreport_prob=0.0))]
fn write_synthetic_session(
    path: &str,
    groups_per_treatment: usize,
    rho: [i64; 5],
    seed: u64,
    noise_sd_cents: f64,
    misreport_prob: f64,
) -> PyResult<usize> {
    let mut cfg = analysis::synthetic::SyntheticConfig::new(groups_per_treatment, rho.map(Cents), seed);
    cfg.noise_sd_cents = noise_sd_cents;
    cfg.misreport_prob = misreport_prob;
    let records = analysis::synthetic::generate_session(&cfg).map_err(err)?;
    let f = std::fs::File::create(path).map_err(|e| err(Error::io(path, e)))?;
    analysis::write_session(f, &records).map_err(err)?;
    Ok(records.len())
}

#[pymodule]
#[pyo3(name = "rankmatch")]
fn rankmatch_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RankmatchError", m.py().get_type::<RankmatchError>())?;
    m.add_class::<PyMarket>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(run_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(run_random, m)?)?;
    m.add_function(wrap_pyfunction!(expected_utilities, m)?)?;
    m.add_function(wrap_pyfunction!(is_pareto_efficient, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(decode_mpl, m)?)?;
    m.add_function(wrap_pyfunction!(encode_mpl, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_mpl_payment, m)?)?;
    m.add_function(wrap_pyfunction!(jonckheere_terpstra, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_ranksum, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_session, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic_session, m)?)?;
    Ok(())
}
