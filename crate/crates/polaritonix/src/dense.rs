//! Splitting of dense ensembles with frequency and dissipation disorder.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collective::CollectiveCouplings;
use crate::darkstate::{self, Regime};
use crate::fret::{ensemble_fret_matrix, RateMatrix};
use crate::linalg::{self, CMat};
use crate::model::{realization_seed, sample_realization, CavitySpec, EnsembleSpec, Realization, VibrationalSpec};
use crate::stats::mean_stderr;
use crate::transmission::{evolution_matrix, prominent_peaks, spectrum_scan};
use crate::{Error, Result, C64};

/// Largest evolution-matrix dimension handed to the dense eigensolver.
pub const DENSE_EIGEN_CAP: usize = 4001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VrsMethod {
    Eigen,
    TransmissionPeaks,
    ReducedFormula,
}

/// Diagnostics attached to a splitting estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VrsFlags {
    /// The two polariton candidates carry at most 25% cavity weight together.
    pub weak_coupling: bool,
    /// Second and third cavity weights were indistinguishable.
    pub weight_tie: bool,
    /// `|tr M - sum eig| / (1 + |tr M|)`.
    pub trace_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrsResult {
    pub vrs: f64,
    /// Ordered by real part.
    pub polariton_eigs: [C64; 2],
    pub cavity_weights: [f64; 2],
    pub method: VrsMethod,
    pub flags: VrsFlags,
}

/// Cavity weight `|x_c|^2 / |x|^2` of the right eigenvector of the arrowhead
/// evolution matrix with eigenvalue `lambda`.
fn arrowhead_cavity_weight(diag: &[C64], g: &[C64], lambda: C64) -> f64 {
    let mut s = 0.0;
    for (d, gj) in diag.iter().zip(g) {
        let gap = (d - lambda).norm_sqr();
        if gap == 0.0 {
            if gj.norm_sqr() > 0.0 {
                return 0.0;
            }
            continue;
        }
        s += gj.norm_sqr() / gap;
    }
    1.0 / (1.0 + s)
}

fn select_polaritons(eigs: &[C64], weights: &[f64]) -> (usize, usize, bool) {
    let mut order: Vec<usize> = (0..eigs.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let first = order[0];
    let mut second = order[1];
    let mut tie = false;
    if order.len() > 2 {
        let (w2, w3) = (weights[order[1]], weights[order[2]]);
        if (w2 - w3).abs() <= 1e-9 * w2.max(1e-300) {
            tie = true;
            let sep = |k: usize| (eigs[k].im - eigs[first].im).abs();
            if sep(order[2]) > sep(order[1]) {
                second = order[2];
            }
        }
    }
    (first, second, tie)
}

fn ordered_pair(eigs: [C64; 2], weights: [f64; 2]) -> ([C64; 2], [f64; 2]) {
    if eigs[0].re <= eigs[1].re {
        (eigs, weights)
    } else {
        ([eigs[1], eigs[0]], [weights[1], weights[0]])
    }
}

/// Splitting from a full eigen-decomposition of the evolution matrix with the
/// molecular decay raised by the FRET outflow.
pub fn vrs_full(realization: &Realization, cavity: &CavitySpec, rates: Option<&RateMatrix>) -> Result<VrsResult> {
    let loss = rates.map(|r| r.outflow.as_slice());
    if let Some(r) = rates {
        if r.len() != realization.len() {
            return Err(Error::invalid("rate_matrix", "size does not match the realization"));
        }
    }
    vrs_full_with_loss(realization, cavity, loss)
}

/// [`vrs_full`] with explicit extra per-molecule decay.
pub fn vrs_full_with_loss(realization: &Realization, cavity: &CavitySpec, extra_loss: Option<&[f64]>) -> Result<VrsResult> {
    let dim = realization.len() + 1;
    if dim > DENSE_EIGEN_CAP {
        return Err(Error::DenseCap {
            dim,
            cap: DENSE_EIGEN_CAP,
        });
    }
    if realization.is_empty() {
        return Err(Error::invalid("n_molecules", "need at least one molecule"));
    }
    let em = evolution_matrix(realization, cavity, realization.omega_e, extra_loss);
    let eigs = linalg::eigenvalues(&em.m)?;
    let diag = em.diagonal();
    let mol_diag = &diag[..dim - 1];
    let weights: Vec<f64> = eigs
        .iter()
        .map(|&l| arrowhead_cavity_weight(mol_diag, &realization.g, l))
        .collect();
    let (a, b, tie) = select_polaritons(&eigs, &weights);
    let tr = linalg::trace(&em.m);
    let sum: C64 = eigs.iter().sum();
    let (pe, pw) = ordered_pair([eigs[a], eigs[b]], [weights[a], weights[b]]);
    Ok(VrsResult {
        vrs: (pe[1].re - pe[0].re).abs(),
        polariton_eigs: pe,
        cavity_weights: pw,
        method: VrsMethod::Eigen,
        flags: VrsFlags {
            weak_coupling: pw[0] + pw[1] <= 0.25,
            weight_tie: tie,
            trace_residual: (tr - sum).norm() / (1.0 + tr.norm()),
        },
    })
}

/// Splitting as the distance of the two highest peaks of `|t|` on `grid`.
pub fn vrs_from_transmission(
    realization: &Realization,
    cavity: &CavitySpec,
    rates: Option<&RateMatrix>,
    grid: &[f64],
) -> Result<VrsResult> {
    let spec = spectrum_scan(realization, cavity, grid, rates.map(|r| r.outflow.as_slice()))?;
    let mags = spec.abs();
    let mut peaks = prominent_peaks(grid, &mags, 0.05);
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    let (vrs, eigs, weak) = match peaks.len() {
        0 => (0.0, [C64::new(f64::NAN, 0.0); 2], true),
        1 => (0.0, [C64::new(peaks[0].omega, 0.0); 2], true),
        _ => {
            let (x, y) = (peaks[0].omega, peaks[1].omega);
            ((x - y).abs(), [C64::new(x.min(y), 0.0), C64::new(x.max(y), 0.0)], false)
        }
    };
    Ok(VrsResult {
        vrs,
        polariton_eigs: eigs,
        cavity_weights: [f64::NAN; 2],
        method: VrsMethod::TransmissionPeaks,
        flags: VrsFlags {
            weak_coupling: weak,
            ..VrsFlags::default()
        },
    })
}

/// Splitting from the collective reduction with complex effective detunings
/// `delta_j - i outflow_j`. The cavity is taken resonant with the mean
/// transition.
pub fn vrs_reduced_dissipative(
    deltas: &[f64],
    rates: Option<&RateMatrix>,
    gamma: f64,
    g_n: f64,
    kappa: f64,
) -> Result<VrsResult> {
    let n = deltas.len();
    if n < 2 {
        return Err(Error::invalid("deltas", "need at least two molecules"));
    }
    if let Some(r) = rates {
        if r.len() != n {
            return Err(Error::invalid("rate_matrix", "size does not match the detunings"));
        }
    }
    let z: Vec<C64> = (0..n)
        .map(|j| C64::new(deltas[j], -rates.map_or(0.0, |r| r.outflow[j])))
        .collect();
    let c = CollectiveCouplings::from_complex(&z)?;
    let mean = c.generator[0];
    let block = c.dark_block(mean - C64::new(0.0, gamma));
    let x = linalg::solve(&block, &c.m_vec())?;
    let dark: C64 = c.m_row().iter().zip(&x).map(|(a, b)| a * b).sum();
    // Bright mode: mean - dark - i gamma; cavity: -i kappa.
    let bright = mean - dark - C64::new(0.0, gamma);
    let cav = C64::new(0.0, -kappa);
    let mid = 0.5 * (bright + cav);
    let root = (0.25 * (bright - cav) * (bright - cav) + g_n * g_n).sqrt();
    let gamma_total = -bright.im;
    let vrs = darkstate::vrs_reduced(g_n, gamma_total, kappa, bright.re);
    let (pe, _) = ordered_pair([mid - root, mid + root], [f64::NAN; 2]);
    Ok(VrsResult {
        vrs,
        polariton_eigs: pe,
        cavity_weights: [f64::NAN; 2],
        method: VrsMethod::ReducedFormula,
        flags: VrsFlags::default(),
    })
}

/// Mesoscopic splitting law with the asymptotic dark-state loss.
pub fn vrs_theory(g_n: f64, gamma: f64, kappa: f64, w: f64) -> f64 {
    let regime = if w >= gamma {
        Regime::BroadDisorder
    } else {
        Regime::NarrowDisorder
    };
    let gd = darkstate::gamma_dark_asymptotic(w, gamma, regime).unwrap_or(0.0);
    darkstate::vrs_reduced(g_n, gamma + gd, kappa, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMethod {
    Eigen,
    Reduced,
}

/// Fixed-volume density sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySweepConfig {
    /// Template; `n_molecules` is overwritten for each grid point.
    pub ensemble: EnsembleSpec,
    pub cavity: CavitySpec,
    pub vib: VibrationalSpec,
    pub weight_tol: f64,
    pub n_values: Vec<usize>,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub method: SweepMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub n: usize,
    pub vrs_mean: f64,
    pub vrs_stderr: f64,
    pub vrs_nofret_mean: f64,
    pub vrs_nofret_stderr: f64,
    pub vrs_theory: f64,
    pub mean_outflow: f64,
}

/// Seed of realization `index` at grid size `n`.
pub fn sweep_seed(master: u64, n: usize, index: usize) -> u64 {
    realization_seed(realization_seed(master, n as u64), index as u64)
}

struct SweepSample {
    with_fret: f64,
    without: f64,
    g_n: f64,
    outflow: f64,
}

fn sweep_sample(cfg: &DensitySweepConfig, n: usize, index: usize) -> Result<SweepSample> {
    let mut spec = cfg.ensemble.clone();
    spec.n_molecules = n;
    let r = sample_realization(&spec, sweep_seed(cfg.master_seed, n, index))?;
    let rates = if spec.near_field.is_some() {
        Some(ensemble_fret_matrix(&r, &cfg.vib, cfg.weight_tol)?)
    } else {
        None
    };
    let g_n = r.collective_coupling();
    let (with_fret, without) = match cfg.method {
        SweepMethod::Eigen => (
            vrs_full(&r, &cfg.cavity, rates.as_ref())?.vrs,
            vrs_full(&r, &cfg.cavity, None)?.vrs,
        ),
        SweepMethod::Reduced => (
            vrs_reduced_dissipative(&r.deltas, rates.as_ref(), r.gamma, g_n, cfg.cavity.kappa)?.vrs,
            vrs_reduced_dissipative(&r.deltas, None, r.gamma, g_n, cfg.cavity.kappa)?.vrs,
        ),
    };
    Ok(SweepSample {
        with_fret,
        without,
        g_n,
        outflow: rates.map_or(0.0, |m| m.mean_outflow()),
    })
}

/// Monte Carlo over realizations at every `N`. Results do not depend on the
/// thread count: every task derives its own seed and the reduction runs in
/// grid order.
pub fn density_sweep(cfg: &DensitySweepConfig) -> Result<Vec<DensityPoint>> {
    if cfg.n_realizations == 0 {
        return Err(Error::invalid("n_realizations", "must be at least 1"));
    }
    if cfg.n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n_values", "must be strictly ascending"));
    }
    cfg.cavity.validate()?;
    let tasks: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.n_realizations).map(move |i| (n, i)))
        .collect();
    let samples: Vec<SweepSample> = tasks
        .par_iter()
        .map(|&(n, i)| sweep_sample(cfg, n, i))
        .collect::<Result<_>>()?;
    let w = cfg.ensemble.disorder_width;
    Ok(cfg
        .n_values
        .iter()
        .zip(samples.chunks(cfg.n_realizations))
        .map(|(&n, chunk)| {
            let a: Vec<f64> = chunk.iter().map(|s| s.with_fret).collect();
            let b: Vec<f64> = chunk.iter().map(|s| s.without).collect();
            let (vrs_mean, vrs_stderr) = mean_stderr(&a);
            let (vrs_nofret_mean, vrs_nofret_stderr) = mean_stderr(&b);
            let g_n = chunk.iter().map(|s| s.g_n).sum::<f64>() / chunk.len() as f64;
            DensityPoint {
                n,
                vrs_mean,
                vrs_stderr,
                vrs_nofret_mean,
                vrs_nofret_stderr,
                vrs_theory: vrs_theory(g_n, cfg.ensemble.gamma, cfg.cavity.kappa, w),
                mean_outflow: chunk.iter().map(|s| s.outflow).sum::<f64>() / chunk.len() as f64,
            }
        })
        .collect())
}

fn donor_matrix(n: usize, g: f64, gamma: f64, kappa: f64, gamma_prime: f64, delta: f64) -> [[C64; 3]; 3] {
    let z = C64::new(0.0, 0.0);
    let gb = C64::new(((n - 1) as f64).sqrt() * g, 0.0);
    let gd = C64::new(g, 0.0);
    [
        [C64::new(delta, -gamma_prime), z, gd],
        [z, C64::new(0.0, -gamma), gb],
        [gd, gb, C64::new(0.0, -kappa)],
    ]
}

fn cubic_coefficients(m: &[[C64; 3]; 3]) -> (C64, C64, C64) {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    (-tr, minors, -det)
}

/// Tolerance on the normalized discriminant below which the cubic formula
/// hands over to the numerical eigensolver.
pub const CUBIC_DEGENERACY_TOL: f64 = 1e-8;

/// Roots of `x^3 + b x^2 + c x + d` by Cardano, polished by Newton steps.
/// Returns `None` when the roots are too close to separate reliably.
pub fn cardano_roots(b: C64, c: C64, d: C64) -> Option<[C64; 3]> {
    let d0 = b * b - 3.0 * c;
    let d1 = 2.0 * b * b * b - 9.0 * b * c + 27.0 * d;
    let disc = d1 * d1 - 4.0 * d0 * d0 * d0;
    // Natural root scale; the discriminant carries its sixth power.
    let s = b.norm().max(c.norm().sqrt()).max(d.norm().cbrt());
    let scale = s.powi(6).max(1e-300);
    if disc.norm() <= CUBIC_DEGENERACY_TOL * scale {
        return None;
    }
    let sq = disc.sqrt();
    let (p, m) = (0.5 * (d1 + sq), 0.5 * (d1 - sq));
    let big = if p.norm() >= m.norm() { p } else { m };
    let cc = big.powf(1.0 / 3.0);
    let xi = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [C64::new(0.0, 0.0); 3];
    let mut rot = C64::new(1.0, 0.0);
    for r in roots.iter_mut() {
        let ck = rot * cc;
        *r = -(b + ck + d0 / ck) / 3.0;
        rot *= xi;
    }
    let poly = |x: C64| ((x + b) * x + c) * x + d;
    let deriv = |x: C64| (3.0 * x + 2.0 * b) * x + c;
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let dp = deriv(*r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = poly(*r) / dp;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
    }
    Some(roots)
}

/// The three eigenvalues `lambda~ = -i lambda` of the bright mode, one donor
/// with decay `gamma_prime` and detuning `delta`, and the cavity, sorted by
/// imaginary part.
pub fn single_donor_eigs(n: usize, g: f64, gamma: f64, kappa: f64, gamma_prime: f64, delta: f64) -> Result<[C64; 3]> {
    if n < 2 {
        return Err(Error::invalid("n_molecules", "need at least two molecules"));
    }
    let m = donor_matrix(n, g, gamma, kappa, gamma_prime, delta);
    let (b, c, d) = cubic_coefficients(&m);
    let lambdas = match cardano_roots(b, c, d) {
        Some(r) => r,
        None => {
            let mat: CMat = Mat::from_fn(3, 3, |i, j| m[i][j]);
            let e = linalg::eigenvalues(&mat)?;
            [e[0], e[1], e[2]]
        }
    };
    let mut out = lambdas.map(|l| C64::new(0.0, -1.0) * l);
    out.sort_by(|a, b| a.im.total_cmp(&b.im));
    Ok(out)
}

/// Spread of the imaginary parts of [`single_donor_eigs`].
pub fn donor_splitting(eigs: &[C64; 3]) -> f64 {
    let hi = eigs.iter().map(|e| e.im).fold(f64::MIN, f64::max);
    let lo = eigs.iter().map(|e| e.im).fold(f64::MAX, f64::min);
    hi - lo
}

/// One step of a decay-rate schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub time: f64,
    pub gammas: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub time: f64,
    pub splitting: f64,
    pub weak_coupling: bool,
}

/// Quasi-static splitting along a schedule of per-molecule decay rates for a
/// resonant, disorder-free ensemble.
pub fn sequential_donor_schedule(
    n: usize,
    g: f64,
    gamma: f64,
    kappa: f64,
    schedule: &[ScheduleStep],
) -> Result<Vec<SchedulePoint>> {
    let cavity = CavitySpec::new(0.0, kappa);
    let base = Realization::with_uniform_coupling(0.0, gamma, vec![0.0; n], g);
    schedule
        .par_iter()
        .map(|step| {
            if step.gammas.len() != n {
                return Err(Error::invalid("schedule", "every step needs one rate per molecule"));
            }
            let extra: Vec<f64> = step.gammas.iter().map(|x| x - gamma).collect();
            let r = vrs_full_with_loss(&base, &cavity, Some(&extra))?;
            Ok(SchedulePoint {
                time: step.time,
                splitting: r.vrs,
                weak_coupling: r.flags.weak_coupling,
            })
        })
        .collect()
}

/// Molecules turn into strong donors one after another: molecule `k` ramps
/// geometrically from `gamma` to `gamma_max` during `[k, k + 1)` in
/// `steps_per_molecule` steps. Pass `count` below `n` to stop early.
pub fn donor_ramp(n: usize, count: usize, gamma: f64, gamma_max: f64, steps_per_molecule: usize) -> Vec<ScheduleStep> {
    let mut gammas = vec![gamma; n];
    let mut out = vec![ScheduleStep {
        time: 0.0,
        gammas: gammas.clone(),
    }];
    let ratio = (gamma_max / gamma).powf(1.0 / steps_per_molecule as f64);
    for k in 0..count.min(n) {
        for s in 1..=steps_per_molecule {
            gammas[k] = gamma * ratio.powi(s as i32);
            out.push(ScheduleStep {
                time: k as f64 + s as f64 / steps_per_molecule as f64,
                gammas: gammas.clone(),
            });
        }
    }
    out
}

/// Normalized histogram of `gamma + outflow_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_left: Vec<f64>,
    pub bin_right: Vec<f64>,
    pub mass: Vec<f64>,
}

/// Bin the total decay rates; values outside `range` land in the edge bins.
pub fn decay_rate_histogram(rates: &RateMatrix, gamma: f64, bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::invalid("bins", "must be at least 1"));
    }
    if rates.is_empty() {
        return Err(Error::invalid("rate_matrix", "empty ensemble"));
    }
    let values: Vec<f64> = rates.outflow.iter().map(|o| gamma + o).collect();
    let (mut lo, mut hi) = range.unwrap_or_else(|| {
        (
            values.iter().cloned().fold(f64::INFINITY, f64::min),
            values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    });
    if !(hi > lo) {
        let pad = 1e-9 * lo.abs().max(1.0);
        lo -= pad;
        hi += pad;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &values {
        let k = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = values.len() as f64;
    Ok(Histogram {
        bin_left: (0..bins).map(|k| lo + k as f64 * width).collect(),
        bin_right: (0..bins).map(|k| lo + (k + 1) as f64 * width).collect(),
        mass: counts.iter().map(|&c| c as f64 / total).collect(),
    })
}
