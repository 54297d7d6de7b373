//! Thin Python bindings over the core library. Every function takes plain
//! numbers and lists and returns floats, complex numbers or lists of them.

use polaritonix::dense;
use polaritonix::model::{realization_seed, sample_realization, CavitySpec, EnsembleSpec, Realization};
use polaritonix::transmission::spectrum_scan;
use polaritonix::{darkstate, fret, Error, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn draw(n_molecules: usize, g: f64, gamma: f64, disorder_width: f64, seed: u64) -> PyResult<Realization> {
    let spec = EnsembleSpec::uniform(n_molecules, g, gamma, disorder_width);
    sample_realization(&spec, realization_seed(seed, 0)).map_err(to_py)
}

/// Complex transmission of one realization at each laser detuning in `omega`.
#[pyfunction]
#[pyo3(signature = (n_molecules, g, gamma, disorder_width, kappa, omega, seed = 0))]
fn transmission(
    n_molecules: usize,
    g: f64,
    gamma: f64,
    disorder_width: f64,
    kappa: f64,
    omega: Vec<f64>,
    seed: u64,
) -> PyResult<Vec<C64>> {
    let r = draw(n_molecules, g, gamma, disorder_width, seed)?;
    let spec = spectrum_scan(&r, &CavitySpec::new(0.0, kappa), &omega, None).map_err(to_py)?;
    Ok(spec.t)
}

/// Reservoir shift and rate `(delta_dark, gamma_dark)` for explicit detunings.
#[pyfunction]
fn dark_shift_and_rate(deltas: Vec<f64>, gamma: f64) -> PyResult<(f64, f64)> {
    let r = darkstate::dark_shift_and_rate(&deltas, gamma).map_err(to_py)?;
    Ok((r.delta_dark, r.gamma_dark))
}

/// Splitting from the full eigen-decomposition of one realization.
#[pyfunction]
#[pyo3(signature = (n_molecules, g, gamma, disorder_width, kappa, seed = 0))]
fn vrs(n_molecules: usize, g: f64, gamma: f64, disorder_width: f64, kappa: f64, seed: u64) -> PyResult<f64> {
    let r = draw(n_molecules, g, gamma, disorder_width, seed)?;
    Ok(dense::vrs_full(&r, &CavitySpec::new(0.0, kappa), None).map_err(to_py)?.vrs)
}

/// Closed-form splitting for Gaussian disorder of width `w`.
#[pyfunction]
fn vrs_theory(g_n: f64, gamma: f64, kappa: f64, w: f64) -> f64 {
    dense::vrs_theory(g_n, gamma, kappa, w)
}

/// Donor-to-acceptor transfer rate through a single damped vibrational mode.
#[pyfunction]
fn fret_rate(omega: f64, delta_diff: f64, lambda_: f64, nu: f64, damping: f64) -> PyResult<f64> {
    fret::fret_rate_single_mode(omega, delta_diff, lambda_, nu, damping).map_err(to_py)
}

/// The three eigenvalues of the cavity, bright mode and one lossy donor.
#[pyfunction]
#[pyo3(signature = (n_molecules, g, gamma, kappa, gamma_prime, delta = 0.0))]
fn donor_eigs(n_molecules: usize, g: f64, gamma: f64, kappa: f64, gamma_prime: f64, delta: f64) -> PyResult<Vec<C64>> {
    let e = dense::single_donor_eigs(n_molecules, g, gamma, kappa, gamma_prime, delta).map_err(to_py)?;
    Ok(e.to_vec())
}

#[pymodule(name = "polaritonix")]
fn bindings(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", polaritonix::VERSION)?;
    m.add_function(wrap_pyfunction!(transmission, m)?)?;
    m.add_function(wrap_pyfunction!(dark_shift_and_rate, m)?)?;
    m.add_function(wrap_pyfunction!(vrs, m)?)?;
    m.add_function(wrap_pyfunction!(vrs_theory, m)?)?;
    m.add_function(wrap_pyfunction!(fret_rate, m)?)?;
    m.add_function(wrap_pyfunction!(donor_eigs, m)?)?;
    Ok(())
}
