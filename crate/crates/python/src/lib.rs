//! Python bindings: bounds, selectors, compression schemes and the exact
//! credit-attribution audit.

use cca_core::audit::{cca_audit, AuditConfig, AuditStatus};
use cca_core::compression::{
    as_cca_mechanism, for_sample_size, stable_boost_compress, svm_fit, threshold_compress, SvmScheme,
    ThresholdScheme, WeakClass,
};
use cca_core::selection::{
    estimate_z, expected_fraction_bounds, rr_lower_bound, verify_selector_dp, BitExperiment, BoundForm,
    ObliviousSelector, RandomizedResponse, Selector, UniformSelector,
};
use cca_core::semidp::reduction_p;
use cca_core::seeding::SimRng;
use cca_core::{hockey_stick_divergence, CreditMechanism, Dataset, FiniteDistribution, PrivacyParams};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;

fn py_err(e: cca_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bound_form(form: &str) -> PyResult<BoundForm> {
    match form {
        "tight" => Ok(BoundForm::Tight),
        "loose" => Ok(BoundForm::Loose),
        other => Err(PyValueError::new_err(format!("form must be 'tight' or 'loose', got {other:?}"))),
    }
}

fn selector(name: &str, eps: f64) -> PyResult<Box<dyn Selector>> {
    Ok(match name {
        "rr" => Box::new(RandomizedResponse::new(eps).map_err(py_err)?),
        "oblivious" => Box::new(ObliviousSelector),
        "uniform" => Box::new(UniformSelector),
        other => {
            return Err(PyValueError::new_err(format!(
                "selector must be 'rr', 'oblivious' or 'uniform', got {other:?}"
            )))
        }
    })
}

fn grid_data(xs: &[usize], ys: &[u8], m: usize) -> PyResult<Dataset> {
    if xs.len() != ys.len() {
        return Err(PyValueError::new_err("xs and ys differ in length"));
    }
    let pairs: Vec<(usize, u8)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    Dataset::grid(m, &pairs).map_err(py_err)
}

fn plane_data(points: &[(f64, f64)], ys: &[u8]) -> PyResult<Dataset> {
    if points.len() != ys.len() {
        return Err(PyValueError::new_err("points and ys differ in length"));
    }
    let pairs: Vec<([f64; 2], u8)> = points.iter().zip(ys).map(|(&(a, b), &y)| ([a, b], y)).collect();
    Dataset::plane(&pairs).map_err(py_err)
}

/// Range of E[Z] for an (eps, delta)-DP selector on Bernoulli(p) bits.
#[pyfunction]
#[pyo3(signature = (p, eps, delta, n, form = "tight"))]
fn fraction_bounds(p: f64, eps: f64, delta: f64, n: usize, form: &str) -> PyResult<(f64, f64)> {
    expected_fraction_bounds(p, eps, delta, n, bound_form(form)?).map_err(py_err)
}

#[pyfunction]
fn rr_claim_bound(p: f64, eps: f64, k: usize, n: usize) -> PyResult<f64> {
    rr_lower_bound(p, eps, k, n).map_err(py_err)
}

/// Dummy probability used by the reduction learner.
#[pyfunction]
fn dummy_probability(k: usize, eps: f64) -> PyResult<f64> {
    reduction_p(k, eps).map_err(py_err)
}

#[pyclass(frozen, get_all)]
struct Estimate {
    mean_z: f64,
    ci_halfwidth: f64,
    trials: u64,
    tight: (f64, f64),
    loose: (f64, f64),
}

#[pymethods]
impl Estimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(mean_z={}, ci_halfwidth={}, trials={}, tight={:?})",
            self.mean_z, self.ci_halfwidth, self.trials, self.tight
        )
    }
}

/// Monte Carlo estimate of E[Z] for `selector` in {"rr", "oblivious", "uniform"}.
#[pyfunction]
#[pyo3(signature = (selector_name, n, k, p, eps, trials, seed, delta = 0.0))]
#[allow(clippy::too_many_arguments)]
fn estimate(
    py: Python<'_>,
    selector_name: &str,
    n: usize,
    k: usize,
    p: f64,
    eps: f64,
    trials: u64,
    seed: u64,
    delta: f64,
) -> PyResult<Estimate> {
    let sel = selector(selector_name, eps)?;
    let exp = BitExperiment {
        n,
        k,
        p,
        privacy: PrivacyParams::new(eps, delta).map_err(py_err)?,
        trials,
        master_seed: seed,
    };
    let r = py.detach(|| estimate_z(sel.as_ref(), &exp)).map_err(py_err)?;
    Ok(Estimate {
        mean_z: r.mean_z,
        ci_halfwidth: r.ci_halfwidth,
        trials: r.trials,
        tight: r.tight,
        loose: r.loose,
    })
}

/// Exact DP check of randomized response at `eps_rr` against `(eps, delta)`
/// over all neighboring bit strings of length n. Returns (pass, divergence, pairs).
#[pyfunction]
#[pyo3(signature = (n, k, eps_rr, eps, delta = 0.0))]
fn verify_rr(n: usize, k: usize, eps_rr: f64, eps: f64, delta: f64) -> PyResult<(bool, f64, usize)> {
    let rr = RandomizedResponse::new(eps_rr).map_err(py_err)?;
    let r = verify_selector_dp(&rr, n, k, PrivacyParams::new(eps, delta).map_err(py_err)?).map_err(py_err)?;
    Ok((r.pass, r.worst.divergence(), r.pairs_checked))
}

/// sum_x max(0, p(x) - e^eps q(x)) for probability vectors over a common support.
#[pyfunction]
fn hockey_stick(p: Vec<f64>, q: Vec<f64>, eps: f64) -> PyResult<f64> {
    if p.len() != q.len() {
        return Err(PyValueError::new_err("p and q differ in length"));
    }
    let dist = |v: Vec<f64>| FiniteDistribution::exact(v.into_iter().enumerate()).map_err(py_err);
    hockey_stick_divergence(&dist(p)?, &dist(q)?, eps).map_err(py_err)
}

/// Threshold compression on the grid 1..=m. Returns (hypothesis, credited positions).
#[pyfunction]
fn compress_threshold(xs: Vec<usize>, ys: Vec<u8>, m: usize) -> PyResult<(String, Vec<usize>)> {
    let out = threshold_compress(&grid_data(&xs, &ys, m)?).map_err(py_err)?;
    Ok((out.hypothesis.to_string(), out.credited.into_iter().collect()))
}

#[pyclass(frozen, get_all)]
struct Separator {
    w: (f64, f64),
    b: f64,
    positive_label: u8,
    margin: f64,
    support: Vec<usize>,
}

#[pymethods]
impl Separator {
    fn __repr__(&self) -> String {
        format!(
            "Separator(w={:?}, b={}, positive_label={}, margin={}, support={:?})",
            self.w, self.b, self.positive_label, self.margin, self.support
        )
    }
}

/// Hard-margin separator of labeled points in the plane.
#[pyfunction]
fn compress_svm(points: Vec<(f64, f64)>, ys: Vec<u8>) -> PyResult<Separator> {
    let fit = svm_fit(&plane_data(&points, &ys)?).map_err(py_err)?;
    let h = fit.halfplane;
    Ok(Separator {
        w: (h.w()[0], h.w()[1]),
        b: h.b(),
        positive_label: h.positive_label(),
        margin: fit.margin,
        support: fit.support,
    })
}

/// One run of the randomized boosting compression with default rounds.
/// Returns (consistent, credited positions, redraws).
#[pyfunction]
#[pyo3(signature = (xs, ys, m, seed, weak_class = "threshold", xi = 0.1))]
fn compress_boost(
    xs: Vec<usize>,
    ys: Vec<u8>,
    m: usize,
    seed: u64,
    weak_class: &str,
    xi: f64,
) -> PyResult<(bool, Vec<usize>, usize)> {
    let class = match weak_class {
        "threshold" => WeakClass::Threshold,
        "interval" => WeakClass::Interval,
        other => return Err(PyValueError::new_err(format!("unknown weak class {other:?}"))),
    };
    let data = grid_data(&xs, &ys, m)?;
    let cfg = for_sample_size(data.len(), class, xi).map_err(py_err)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let run = stable_boost_compress(&data, class, &cfg, &mut rng).map_err(py_err)?;
    Ok((run.consistent, run.output.credited.into_iter().collect(), run.redraws))
}

#[pyclass(frozen, get_all)]
struct IndexResult {
    index: usize,
    status: String,
    credit_probability: f64,
    divergence: Option<f64>,
}

#[pymethods]
impl IndexResult {
    fn __repr__(&self) -> String {
        format!(
            "IndexResult(index={}, status={:?}, credit_probability={}, divergence={:?})",
            self.index, self.status, self.credit_probability, self.divergence
        )
    }
}

fn exact_audit(mech: &dyn CreditMechanism, data: &Dataset, eps: f64, delta: f64) -> PyResult<Vec<IndexResult>> {
    let cfg = AuditConfig::exact(PrivacyParams::new(eps, delta).map_err(py_err)?);
    let rows = cca_audit(mech, data, &cfg).map_err(py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| IndexResult {
            index: r.index,
            status: match r.status {
                AuditStatus::AlwaysCredited => "always_credited",
                AuditStatus::Pass => "pass",
                AuditStatus::Fail => "fail",
                AuditStatus::InsufficientConditioningMass => "insufficient",
            }
            .into(),
            credit_probability: r.credit_probability,
            divergence: r.divergence(),
        })
        .collect())
}

/// Exact audit of threshold compression on a grid sample.
#[pyfunction]
#[pyo3(signature = (xs, ys, m, eps = 0.0, delta = 0.0))]
fn audit_threshold(xs: Vec<usize>, ys: Vec<u8>, m: usize, eps: f64, delta: f64) -> PyResult<Vec<IndexResult>> {
    exact_audit(&as_cca_mechanism(ThresholdScheme), &grid_data(&xs, &ys, m)?, eps, delta)
}

/// Exact audit of the separator scheme on points in the plane.
#[pyfunction]
#[pyo3(signature = (points, ys, eps = 0.0, delta = 0.0))]
fn audit_svm(points: Vec<(f64, f64)>, ys: Vec<u8>, eps: f64, delta: f64) -> PyResult<Vec<IndexResult>> {
    exact_audit(&as_cca_mechanism(SvmScheme), &plane_data(&points, &ys)?, eps, delta)
}

#[pymodule]
fn cca_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Estimate>()?;
    m.add_class::<Separator>()?;
    m.add_class::<IndexResult>()?;
    m.add_function(wrap_pyfunction!(fraction_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(rr_claim_bound, m)?)?;
    m.add_function(wrap_pyfunction!(dummy_probability, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_rr, m)?)?;
    m.add_function(wrap_pyfunction!(hockey_stick, m)?)?;
    m.add_function(wrap_pyfunction!(compress_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(compress_svm, m)?)?;
    m.add_function(wrap_pyfunction!(compress_boost, m)?)?;
    m.add_function(wrap_pyfunction!(audit_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(audit_svm, m)?)?;
    Ok(())
}
