//! Python bindings for the qsdwalk toolkit.
//!
//! Exposes the main objects and operations as plain functions returning
//! small typed result classes: optimal measurements, quantum values and
//! noncontextual bounds, compiled walk schedules, waveplate settings, the
//! counting emulator, and grid scans.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qsdwalk::model::Ensemble;
use qsdwalk::optics::{angles_for_schedule, estimate_figure_of_merit, simulate_counts};
use qsdwalk::scan::{GridSpec, OutputFormat, ScanConfig};
use qsdwalk::strategies::{
    bounds_report, mcd_confidence_quantum, mcd_povm, med_povm, med_success_quantum, med_threshold,
    MedBranch, MuConvention, Strategy,
};
use qsdwalk::walk::{derive_outcome_map, run_walk, schedule_mcd, schedule_med, CoinSchedule};

type PyMatrix = [[(f64, f64); 2]; 2];
type PyState = [(f64, f64); 2];

fn err(e: qsdwalk::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_strategy(s: &str) -> PyResult<Strategy> {
    s.parse().map_err(err)
}

fn parse_convention(s: Option<&str>) -> PyResult<MuConvention> {
    match s {
        None => Ok(MuConvention::Derived),
        Some(text) => text.parse().map_err(err),
    }
}

fn matrix_out(m: &qsdwalk::mat2::Mat2) -> PyMatrix {
    [
        [(m.e[0].re, m.e[0].im), (m.e[1].re, m.e[1].im)],
        [(m.e[2].re, m.e[2].im), (m.e[3].re, m.e[3].im)],
    ]
}

fn povm_out(povm: &qsdwalk::model::Povm) -> (Vec<PyMatrix>, Vec<String>) {
    (
        povm.elements.iter().map(matrix_out).collect(),
        povm.labels.iter().map(ToString::to_string).collect(),
    )
}

fn compile_schedule(
    strategy: Strategy,
    p: f64,
    theta: f64,
    convention: MuConvention,
) -> PyResult<(CoinSchedule, qsdwalk::model::Povm)> {
    match strategy {
        Strategy::Med => {
            let schedule = schedule_med(p, theta, convention).map_err(err)?;
            let solution = med_povm(p, theta).map_err(err)?;
            let povm = if solution.branch == MedBranch::Projective
                || convention == MuConvention::Derived
            {
                solution.povm
            } else {
                qsdwalk::strategies::med_family_povm(qsdwalk::strategies::mu_value(
                    p, theta, convention,
                ))
            };
            Ok((schedule, povm))
        }
        Strategy::Mcd => {
            let schedule = schedule_mcd(p, theta).map_err(err)?;
            Ok((schedule, mcd_povm(p, theta).map_err(err)?.povm))
        }
    }
}

/// Quantum value vs noncontextual bound at one parameter point.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Bounds {
    strategy: String,
    p: f64,
    theta: f64,
    quantum: f64,
    noncontextual: f64,
    gap: f64,
    advantage: bool,
}

#[pymethods]
impl Bounds {
    fn __repr__(&self) -> String {
        format!(
            "Bounds(strategy='{}', p={}, theta={}, quantum={}, noncontextual={}, gap={}, advantage={})",
            self.strategy, self.p, self.theta, self.quantum, self.noncontextual, self.gap,
            if self.advantage { "True" } else { "False" }
        )
    }
}

/// An optimal measurement: elements as 2x2 nested lists of (re, im).
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Measurement {
    strategy: String,
    branch: String,
    /// Coin parameter: mu for MED, nu for MCD.
    coin_parameter: f64,
    /// MED branch threshold p*(theta), or the MCD pair scale xi.
    auxiliary: f64,
    elements: Vec<PyMatrix>,
    labels: Vec<String>,
    min_eigenvalue: f64,
    completeness_defect: f64,
}

#[pymethods]
impl Measurement {
    fn __repr__(&self) -> String {
        format!(
            "Measurement(strategy='{}', branch='{}', coin_parameter={}, outcomes={})",
            self.strategy,
            self.branch,
            self.coin_parameter,
            self.elements.len()
        )
    }
}

/// Monte Carlo summary against the analytic value.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Estimate {
    analytic: f64,
    mean: f64,
    std: f64,
    runs: usize,
    excluded_runs: usize,
}

#[pymethods]
impl Estimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(analytic={}, mean={}, std={}, runs={}, excluded_runs={})",
            self.analytic, self.mean, self.std, self.runs, self.excluded_runs
        )
    }
}

/// One grid point of a sweep.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Row {
    p: f64,
    theta: f64,
    quantum: f64,
    noncontextual: f64,
    gap: f64,
    advantage: bool,
    mc_mean: Option<f64>,
    mc_std: Option<f64>,
}

#[pymethods]
impl Row {
    fn __repr__(&self) -> String {
        format!(
            "Row(p={}, theta={}, gap={}, advantage={})",
            self.p,
            self.theta,
            self.gap,
            if self.advantage { "True" } else { "False" }
        )
    }
}

/// Quantum value, noncontextual bound, and advantage flag at (p, theta).
#[pyfunction]
fn bounds(strategy: &str, p: f64, theta: f64) -> PyResult<Bounds> {
    let report = bounds_report(p, theta, parse_strategy(strategy)?).map_err(err)?;
    Ok(Bounds {
        strategy: report.strategy.to_string(),
        p: report.p,
        theta: report.theta,
        quantum: report.quantum_value,
        noncontextual: report.noncontextual_value,
        gap: report.gap,
        advantage: report.advantage,
    })
}

/// The three mirror-symmetric state vectors as ((re, im), (re, im)) pairs,
/// plus the priors (p, p, 1 - 2p).
#[pyfunction]
fn ensemble(p: f64, theta: f64) -> PyResult<(Vec<PyState>, [f64; 3])> {
    let e = Ensemble::mirror(p, theta).map_err(err)?;
    let states = e
        .states()
        .iter()
        .map(|s| [(s.a0.re, s.a0.im), (s.a1.re, s.a1.im)])
        .collect();
    Ok((states, *e.priors()))
}

/// Optimal measurement for a strategy at (p, theta).
#[pyfunction]
fn measurement(strategy: &str, p: f64, theta: f64) -> PyResult<Measurement> {
    let strategy = parse_strategy(strategy)?;
    let (branch, coin_parameter, auxiliary, povm) = match strategy {
        Strategy::Med => {
            let s = med_povm(p, theta).map_err(err)?;
            let branch = match s.branch {
                MedBranch::ThreeElement => "three-element",
                MedBranch::Projective => "projective",
            };
            (branch.to_string(), s.mu, s.threshold_p, s.povm)
        }
        Strategy::Mcd => {
            let s = mcd_povm(p, theta).map_err(err)?;
            let branch = if s.xi < 1.0 {
                "four-element"
            } else {
                "three-element"
            };
            (branch.to_string(), s.nu, s.xi, s.povm)
        }
    };
    let diagnostics = povm.validate();
    let (elements, labels) = povm_out(&povm);
    Ok(Measurement {
        strategy: strategy.to_string(),
        branch,
        coin_parameter,
        auxiliary,
        elements,
        labels,
        min_eigenvalue: diagnostics
            .elements
            .iter()
            .map(|c| c.min_eigenvalue)
            .fold(f64::INFINITY, f64::min),
        completeness_defect: diagnostics.completeness_defect,
    })
}

/// Branch boundary p*(theta) of the MED solution.
#[pyfunction]
fn med_branch_threshold(theta: f64) -> PyResult<f64> {
    med_threshold(theta).map_err(err)
}

/// Final position distribution of the compiled walk for one prepared
/// state (0, 1, or 2).
#[pyfunction]
#[pyo3(signature = (strategy, p, theta, state, convention=None))]
fn walk_positions(
    strategy: &str,
    p: f64,
    theta: f64,
    state: usize,
    convention: Option<&str>,
) -> PyResult<BTreeMap<i64, f64>> {
    if state > 2 {
        return Err(PyValueError::new_err("state index must be 0, 1, or 2"));
    }
    let (schedule, _) = compile_schedule(
        parse_strategy(strategy)?,
        p,
        theta,
        parse_convention(convention)?,
    )?;
    let e = Ensemble::mirror(p, theta).map_err(err)?;
    let (dist, _) = run_walk(&e.states()[state], &schedule).map_err(err)?;
    Ok(dist.into_iter().collect())
}

/// Position -> (outcome index, label) map of the compiled walk.
#[pyfunction]
#[pyo3(signature = (strategy, p, theta, convention=None))]
fn walk_outcome_map(
    strategy: &str,
    p: f64,
    theta: f64,
    convention: Option<&str>,
) -> PyResult<BTreeMap<i64, (usize, String)>> {
    let (schedule, povm) = compile_schedule(
        parse_strategy(strategy)?,
        p,
        theta,
        parse_convention(convention)?,
    )?;
    let map = derive_outcome_map(&schedule, &povm).map_err(err)?;
    Ok(map
        .position_to_outcome
        .iter()
        .map(|(&x, &k)| (x, (k, povm.labels[k].to_string())))
        .collect())
}

/// Worst deviation between walk statistics and the measurement over
/// `samples` random probe states.
#[pyfunction]
#[pyo3(signature = (strategy, p, theta, samples=100, convention=None))]
fn verify_walk(
    strategy: &str,
    p: f64,
    theta: f64,
    samples: usize,
    convention: Option<&str>,
) -> PyResult<f64> {
    let (schedule, povm) = compile_schedule(
        parse_strategy(strategy)?,
        p,
        theta,
        parse_convention(convention)?,
    )?;
    qsdwalk::walk::verify_schedule(&schedule, &povm, samples).map_err(err)
}

/// Half-wave-plate angles (radians) realizing the compiled schedule,
/// keyed by element name; H1 entries are the per-state preparation
/// angles.
#[pyfunction]
#[pyo3(signature = (strategy, p, theta, convention=None))]
fn waveplate_angles(
    strategy: &str,
    p: f64,
    theta: f64,
    convention: Option<&str>,
) -> PyResult<BTreeMap<String, f64>> {
    let (schedule, _) = compile_schedule(
        parse_strategy(strategy)?,
        p,
        theta,
        parse_convention(convention)?,
    )?;
    let mut out: BTreeMap<String, f64> = angles_for_schedule(&schedule)
        .map_err(err)?
        .iter()
        .map(|s| (s.element.to_string(), s.angle))
        .collect();
    for (name, t) in [
        ("H1_state0", theta),
        ("H1_state1", -theta),
        ("H1_state2", 0.0),
    ] {
        out.insert(
            name.to_string(),
            qsdwalk::optics::preparation_angle(t).map_err(err)?.angle,
        );
    }
    Ok(out)
}

/// Seeded counting emulation at one point; returns the Monte Carlo
/// summary next to the analytic value.
#[pyfunction]
#[pyo3(signature = (strategy, p, theta, photons=100_000, runs=30, seed=0))]
fn simulate(
    strategy: &str,
    p: f64,
    theta: f64,
    photons: u64,
    runs: u32,
    seed: u64,
) -> PyResult<Estimate> {
    let strategy = parse_strategy(strategy)?;
    let e = Ensemble::mirror(p, theta).map_err(err)?;
    let (povm, analytic) = match strategy {
        Strategy::Med => (
            med_povm(p, theta).map_err(err)?.povm,
            med_success_quantum(p, theta).map_err(err)?,
        ),
        Strategy::Mcd => (
            mcd_povm(p, theta).map_err(err)?.povm,
            mcd_confidence_quantum(p, theta).map_err(err)?,
        ),
    };
    let records = simulate_counts(&e, &povm, None, photons, runs, seed).map_err(err)?;
    let estimate = estimate_figure_of_merit(&records, strategy, &povm.labels).map_err(err)?;
    Ok(Estimate {
        analytic,
        mean: estimate.mean,
        std: estimate.std,
        runs: estimate.runs,
        excluded_runs: estimate.excluded_runs,
    })
}

/// Grid sweep; rows in deterministic grid order (theta outer, p inner).
#[pyfunction]
#[pyo3(signature = (strategy, p_grid, theta_grid, photons=0, runs=30, seed=0))]
fn scan(
    strategy: &str,
    p_grid: (f64, f64, usize),
    theta_grid: (f64, f64, usize),
    photons: u64,
    runs: u32,
    seed: u64,
) -> PyResult<Vec<Row>> {
    let config = ScanConfig {
        strategy: parse_strategy(strategy)?,
        p_grid: GridSpec::new(p_grid.0, p_grid.1, p_grid.2),
        theta_grid: GridSpec::new(theta_grid.0, theta_grid.1, theta_grid.2),
        mu_convention: MuConvention::Derived,
        photons,
        runs,
        seed,
        output_path: None,
        format: OutputFormat::Csv,
    };
    Ok(qsdwalk::scan::scan(&config)
        .map_err(err)?
        .into_iter()
        .map(|r| Row {
            p: r.p,
            theta: r.theta,
            quantum: r.quantum,
            noncontextual: r.noncontextual,
            gap: r.gap,
            advantage: r.advantage,
            mc_mean: r.mc_mean,
            mc_std: r.mc_std,
        })
        .collect())
}

/// Root of gap(p) = 0 at fixed theta, or None without a sign change.
#[pyfunction]
#[pyo3(signature = (strategy, theta, lo=0.01, hi=0.5))]
fn equality_locus(strategy: &str, theta: f64, lo: f64, hi: f64) -> PyResult<Option<f64>> {
    qsdwalk::scan::equality_locus(parse_strategy(strategy)?, theta, (lo, hi)).map_err(err)
}

#[pymodule]
fn qsdwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Bounds>()?;
    m.add_class::<Measurement>()?;
    m.add_class::<Estimate>()?;
    m.add_class::<Row>()?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(measurement, m)?)?;
    m.add_function(wrap_pyfunction!(med_branch_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(walk_positions, m)?)?;
    m.add_function(wrap_pyfunction!(walk_outcome_map, m)?)?;
    m.add_function(wrap_pyfunction!(verify_walk, m)?)?;
    m.add_function(wrap_pyfunction!(waveplate_angles, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(equality_locus, m)?)?;
    Ok(())
}
