//! Near-field couplings and vibronically assisted energy transfer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::model::{OrientationMode, Realization, VibrationalSpec};
use crate::quad;
use crate::{Error, Result, C64};

/// Cubic near-field law `Omega = omega0 (a0 / r)^3 kappa_orient`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearFieldLaw {
    pub omega0: f64,
    pub a0: f64,
}

/// Defaults put the median nearest-neighbour coupling near `0.7` (in units of
/// the cavity loss) for 60 molecules in a sphere of radius 150.
impl Default for NearFieldLaw {
    fn default() -> Self {
        Self {
            omega0: 30.0,
            a0: 10.0,
        }
    }
}

impl NearFieldLaw {
    pub fn validate(&self) -> Result<()> {
        if !self.omega0.is_finite() {
            return Err(Error::invalid("omega0", "must be finite"));
        }
        if !(self.a0 > 0.0) || !self.a0.is_finite() {
            return Err(Error::invalid("a0", "must be positive"));
        }
        Ok(())
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Near-field coupling between two point dipoles.
pub fn dipole_coupling(
    r_i: &[f64; 3],
    r_j: &[f64; 3],
    mu_i: &[f64; 3],
    mu_j: &[f64; 3],
    law: &NearFieldLaw,
    orientation: OrientationMode,
) -> Result<f64> {
    let d = [r_j[0] - r_i[0], r_j[1] - r_i[1], r_j[2] - r_i[2]];
    let dist = dot(&d, &d).sqrt();
    if dist == 0.0 {
        return Err(Error::CoincidentPositions(0, 1));
    }
    let orient = match orientation {
        OrientationMode::Fixed => 1.0,
        OrientationMode::Random3d => {
            let u = [d[0] / dist, d[1] / dist, d[2] / dist];
            dot(mu_i, mu_j) - 3.0 * dot(mu_i, &u) * dot(mu_j, &u)
        }
    };
    Ok(law.omega0 * (law.a0 / dist).powi(3) * orient)
}

/// Inputs of one pairwise transfer rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FretRateRequest {
    pub omega_dd: f64,
    /// Donor minus acceptor detuning.
    pub delta_diff: f64,
    pub vib: VibrationalSpec,
    pub weight_tol: f64,
}

impl FretRateRequest {
    pub fn validate(&self) -> Result<()> {
        if !(self.weight_tol > 0.0 && self.weight_tol < 1.0) {
            return Err(Error::invalid("weight_tol", "must lie in (0, 1)"));
        }
        if !self.omega_dd.is_finite() || !self.delta_diff.is_finite() {
            return Err(Error::invalid("omega_dd", "coupling and detuning must be finite"));
        }
        if self.vib.modes.is_empty() {
            return Err(Error::invalid("vib", "need at least one vibrational mode"));
        }
        self.vib.validate()
    }
}

/// One composite phonon number `n_k = m_k + l_k` across all modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VibronicTerm {
    pub weight: f64,
    /// `sum_k n_k Gamma_k`.
    pub width: f64,
    /// `sum_k n_k nu_k`.
    pub shift: f64,
}

/// Truncated, weight-ordered list of composite phonon channels.
///
/// Donor and acceptor numbers enter only through `m_k + l_k`, and the sum of
/// two Poisson(`lambda^2`) variables is Poisson(`2 lambda^2`), so the 2n-fold
/// sum collapses to an n-fold one over these channels.
#[derive(Clone, Debug, PartialEq)]
pub struct VibronicTerms {
    pub terms: Vec<VibronicTerm>,
    pub captured: f64,
}

const MAX_TERMS: usize = 2_000_000;

fn ln_poisson(n: u32, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    n as f64 * mean.ln() - mean - ln_factorial(n)
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

#[derive(PartialEq)]
struct Candidate {
    ln_weight: f64,
    index: Vec<u32>,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ln_weight
            .total_cmp(&other.ln_weight)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl VibronicTerms {
    /// Enumerate channels best-first from the joint mode until the captured
    /// weight reaches `1 - weight_tol`.
    pub fn enumerate(vib: &VibrationalSpec, weight_tol: f64) -> Result<Self> {
        if !(weight_tol > 0.0 && weight_tol < 1.0) {
            return Err(Error::invalid("weight_tol", "must lie in (0, 1)"));
        }
        vib.validate()?;
        let means: Vec<f64> = vib.modes.iter().map(|m| 2.0 * m.lambda * m.lambda).collect();
        let ln_w = |idx: &[u32]| -> f64 { idx.iter().zip(&means).map(|(&n, &mu)| ln_poisson(n, mu)).sum() };

        let start: Vec<u32> = means.iter().map(|mu| mu.floor() as u32).collect();
        let mut heap = BinaryHeap::new();
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        heap.push(Candidate {
            ln_weight: ln_w(&start),
            index: start.clone(),
        });
        seen.insert(start);

        let mut terms = Vec::new();
        let mut captured = 0.0;
        while captured < 1.0 - weight_tol && terms.len() < MAX_TERMS {
            let Some(c) = heap.pop() else { break };
            let weight = c.ln_weight.exp();
            captured += weight;
            let (mut width, mut shift) = (0.0, 0.0);
            for (n, m) in c.index.iter().zip(&vib.modes) {
                width += *n as f64 * m.damping;
                shift += *n as f64 * m.nu;
            }
            terms.push(VibronicTerm { weight, width, shift });
            for k in 0..c.index.len() {
                for step in [-1i64, 1] {
                    let n = c.index[k] as i64 + step;
                    if n < 0 {
                        continue;
                    }
                    let mut next = c.index.clone();
                    next[k] = n as u32;
                    if seen.insert(next.clone()) {
                        let lw = ln_w(&next);
                        if lw.is_finite() {
                            heap.push(Candidate {
                                ln_weight: lw,
                                index: next,
                            });
                        }
                    }
                }
            }
        }
        if captured < 0.5 {
            return Err(Error::Truncation {
                tol: weight_tol,
                captured,
            });
        }
        Ok(Self { terms, captured })
    }

    /// Rate for a given coupling and detuning; the zero-phonon channel carries
    /// no width and contributes nothing.
    pub fn rate(&self, omega_dd: f64, delta_diff: f64) -> f64 {
        let o2 = omega_dd * omega_dd;
        self.terms
            .iter()
            .filter(|t| t.width > 0.0)
            .map(|t| {
                let off = delta_diff - t.shift;
                t.weight * t.width / (t.width * t.width + off * off)
            })
            .sum::<f64>()
            * o2
    }
}

/// Multimode transfer rate from donor to acceptor.
pub fn fret_rate_multimode(request: &FretRateRequest) -> Result<f64> {
    request.validate()?;
    let terms = VibronicTerms::enumerate(&request.vib, request.weight_tol)?;
    Ok(terms.rate(request.omega_dd, request.delta_diff))
}

/// Default truncation used where none is supplied.
pub const DEFAULT_WEIGHT_TOL: f64 = 1e-10;

/// Single-mode transfer rate, double sum over donor and acceptor phonon numbers.
pub fn fret_rate_single_mode(omega: f64, delta_diff: f64, lambda: f64, nu: f64, damping: f64) -> Result<f64> {
    fret_rate_multimode(&FretRateRequest {
        omega_dd: omega,
        delta_diff,
        vib: VibrationalSpec::single(nu, lambda, damping),
        weight_tol: DEFAULT_WEIGHT_TOL,
    })
}

/// Relative accuracy of the time-integral evaluation.
pub const ORACLE_REL_TOL: f64 = 1e-4;

/// Rate from direct quadrature of the donor/acceptor correlation integral.
///
/// With the radiative decay factored out, the acceptor coherence is
/// `i Omega P_j(0) I(t)`,
/// `I(t) = int_0^t ds e^{-i delta s} A(s) D(t, t - s)` with
/// `A(s) = prod e^{-l^2} exp(l^2 e^{-(G - i nu) s})` and
/// `D(t, t') = prod e^{-l^2} exp(l^2 e^{-(G - i nu)(t - t')}) exp(l^2 e^{-(G + i nu) t}) exp(-l^2 e^{-(G - i nu) t'})`.
/// The population transfer is `2 Omega^2 P Re I`. The zero-phonon part of the
/// integrand (both `s`-dependent exponents at their long-time value) only
/// produces a bounded oscillation and is subtracted; the remainder converges
/// to the rate once `t` exceeds the slowest vibrational damping time.
pub fn fret_rate_oracle_integral(request: &FretRateRequest) -> Result<f64> {
    request.validate()?;
    let modes = &request.vib.modes;
    if request.vib.total_huang_rhys() == 0.0 || request.omega_dd == 0.0 {
        return Ok(0.0);
    }
    let slowest = modes.iter().map(|m| m.damping).fold(f64::INFINITY, f64::min);
    let fastest_nu = modes.iter().map(|m| m.nu).fold(0.0, f64::max);
    let t_end = 40.0 / slowest;
    let delta = request.delta_diff;
    let i = C64::new(0.0, 1.0);
    let integrand = |s: f64| -> C64 {
        let u = t_end - s;
        let mut ln_full = C64::new(0.0, 0.0);
        let mut ln_elastic = C64::new(0.0, 0.0);
        for m in modes {
            let l2 = m.lambda * m.lambda;
            let down = C64::new(-m.damping, m.nu);
            let up = C64::new(-m.damping, -m.nu);
            // Terms independent of s.
            let fixed = -2.0 * l2 + l2 * (up * t_end).exp() - l2 * (down * u).exp();
            ln_full += fixed + 2.0 * l2 * (down * s).exp();
            ln_elastic += fixed;
        }
        (-i * delta * s).exp() * (ln_full.exp() - ln_elastic.exp())
    };
    let panel = (2.0 * std::f64::consts::PI / fastest_nu.max(delta.abs())).min(1.0 / slowest) / 2.0;
    let r = quad::integrate_panels(integrand, 0.0, t_end, panel, 1e-14, ORACLE_REL_TOL * 1e-2)?;
    let value = r.value.re;
    if r.error > ORACLE_REL_TOL * value.abs().max(1e-12) {
        return Err(Error::Quadrature {
            tol: ORACLE_REL_TOL,
            estimate: r.error / value.abs().max(1e-300),
        });
    }
    Ok(request.omega_dd * request.omega_dd * value)
}

/// `J(omega) = sum_k 2 lambda_k^2 nu_k^2 Gamma_k / (Gamma_k^2 + (omega - nu_k)^2)`.
pub fn spectral_density(vib: &VibrationalSpec, omega_grid: &[f64]) -> Vec<f64> {
    omega_grid
        .iter()
        .map(|&w| {
            vib.modes
                .iter()
                .map(|m| {
                    2.0 * m.lambda * m.lambda * m.nu * m.nu * m.damping
                        / (m.damping * m.damping + (w - m.nu).powi(2))
                })
                .sum()
        })
        .collect()
}

/// Donor emission and acceptor absorption lineshapes, each scaled to unit maximum.
///
/// Each uses one-sided Poisson(`lambda^2`) progressions of Lorentzians with
/// half-width `gamma + sum m_k Gamma_k`, emission red of `delta`, absorption blue.
pub fn vibronic_spectra(
    vib: &VibrationalSpec,
    gamma: f64,
    delta: f64,
    omega_grid: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    // One-sided progression: Poisson(lambda^2) per mode.
    let half = VibrationalSpec {
        modes: vib
            .modes
            .iter()
            .map(|m| crate::model::VibrationalMode {
                lambda: m.lambda / 2f64.sqrt(),
                ..*m
            })
            .collect(),
    };
    let terms = if vib.modes.is_empty() {
        VibronicTerms {
            terms: vec![VibronicTerm {
                weight: 1.0,
                width: 0.0,
                shift: 0.0,
            }],
            captured: 1.0,
        }
    } else {
        VibronicTerms::enumerate(&half, 1e-8)?
    };
    let line = |sign: f64| -> Vec<f64> {
        let raw: Vec<f64> = omega_grid
            .iter()
            .map(|&w| {
                terms
                    .terms
                    .iter()
                    .map(|t| {
                        let hw = gamma + t.width;
                        let centre = delta + sign * t.shift;
                        t.weight * hw / (hw * hw + (w - centre).powi(2))
                    })
                    .sum()
            })
            .collect();
        let peak = raw.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            raw.iter().map(|v| v / peak).collect()
        } else {
            raw
        }
    };
    Ok((line(-1.0), line(1.0)))
}

/// Pairwise transfer rates, row = donor, column = acceptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    n: usize,
    rates: Vec<f64>,
    pub outflow: Vec<f64>,
    /// Number of ordered pairs with `|Omega| >= min Gamma_k`.
    #[serde(default)]
    pub perturbative_violations: usize,
}

impl RateMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            rates: vec![0.0; n * n],
            outflow: vec![0.0; n],
            perturbative_violations: 0,
        }
    }

    /// Build from a row-major `n x n` table; the diagonal is ignored.
    pub fn from_rows(n: usize, mut rates: Vec<f64>) -> Result<Self> {
        if rates.len() != n * n {
            return Err(Error::invalid("rates", "expected an n x n table"));
        }
        if rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::invalid("rates", "entries must be finite and nonnegative"));
        }
        for j in 0..n {
            rates[j * n + j] = 0.0;
        }
        let outflow = (0..n).map(|j| rates[j * n..(j + 1) * n].iter().sum()).collect();
        Ok(Self {
            n,
            rates,
            outflow,
            perturbative_violations: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, donor: usize, acceptor: usize) -> f64 {
        self.rates[donor * self.n + acceptor]
    }

    pub fn row(&self, donor: usize) -> &[f64] {
        &self.rates[donor * self.n..(donor + 1) * self.n]
    }

    /// `(1/N) sum_j sum_{j'} kappa^{jj'}`.
    pub fn mean_outflow(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.outflow.iter().sum::<f64>() / self.n as f64
        }
    }
}

/// Rates for every ordered pair of a realization with near-field couplings.
pub fn ensemble_fret_matrix(realization: &Realization, vib: &VibrationalSpec, weight_tol: f64) -> Result<RateMatrix> {
    let omega = realization
        .omega_dd
        .as_ref()
        .ok_or_else(|| Error::invalid("omega_dd", "realization carries no near-field couplings"))?;
    let n = realization.len();
    if omega.len() != n {
        return Err(Error::invalid("omega_dd", "size does not match the realization"));
    }
    let terms = VibronicTerms::enumerate(vib, weight_tol)?;
    let gamma_min = vib.modes.iter().map(|m| m.damping).fold(f64::INFINITY, f64::min);
    let rows: Vec<(Vec<f64>, usize)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row = vec![0.0; n];
            let mut strong = 0;
            for (k, slot) in row.iter_mut().enumerate() {
                if k == j {
                    continue;
                }
                let o = omega.get(j, k);
                if o == 0.0 {
                    continue;
                }
                if o.abs() >= gamma_min {
                    strong += 1;
                }
                *slot = terms.rate(o, realization.deltas[j] - realization.deltas[k]);
            }
            (row, strong)
        })
        .collect();
    let mut rates = Vec::with_capacity(n * n);
    let mut violations = 0;
    for (row, strong) in rows {
        rates.extend(row);
        violations += strong;
    }
    let mut m = RateMatrix::from_rows(n, rates)?;
    m.perturbative_violations = violations;
    Ok(m)
}
