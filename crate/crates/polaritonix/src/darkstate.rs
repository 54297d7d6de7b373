//! Elimination of the dark-state reservoir.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::collective::{dft_delta_matrix, gram_schmidt_dark_basis, transformed_detunings, CollectiveCouplings};
use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};

/// Shift and loss rate the dark manifold imprints on the bright mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirResult {
    pub delta_dark: f64,
    pub gamma_dark: f64,
}

/// Eigen-structure of the dark block: `eig(M) = delta_bar - i gamma - lambda_tilde`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpectrum {
    /// Real shifts, ascending.
    pub eigenvalues_tilde: Vec<f64>,
    /// Normalized overlaps `|c_j|^2` of the dark coupling vector, summing to 1.
    pub weights: Vec<f64>,
}

/// `m_row . solve(block, m_col)` for a general dark block.
fn schur_term(block: &CMat, m_row: &[C64], m_col: &[C64]) -> Result<C64> {
    let x = linalg::solve(block, m_col)?;
    Ok(m_row.iter().zip(&x).map(|(a, b)| a * b).sum())
}

fn reservoir_from_couplings(c: &CollectiveCouplings, gamma: f64) -> Result<ReservoirResult> {
    let block = c.dark_block(C64::new(c.delta_bar(), -gamma));
    let z = schur_term(&block, &c.m_row(), &c.m_vec())?;
    Ok(ReservoirResult {
        delta_dark: z.re,
        gamma_dark: z.im,
    })
}

/// Exact `delta_dark + i gamma_dark = m^dagger M^{-1} m` for one realization,
/// by one LU solve of the `(N-1) x (N-1)` dark block.
pub fn dark_shift_and_rate(deltas: &[f64], gamma: f64) -> Result<ReservoirResult> {
    if deltas.len() < 2 {
        return Err(Error::invalid("deltas", "need at least two molecules"));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    reservoir_from_couplings(&dft_delta_matrix(deltas)?, gamma)
}

/// Reservoir for nonuniform couplings via the Gram-Schmidt bright/dark basis.
/// Returns the bright-mode detuning alongside the reservoir terms.
pub fn dark_shift_and_rate_weighted(deltas: &[f64], g: &[C64], gamma: f64) -> Result<(f64, ReservoirResult)> {
    let n = deltas.len();
    if n < 2 || g.len() != n {
        return Err(Error::invalid("deltas", "need at least two molecules and matching couplings"));
    }
    let basis = gram_schmidt_dark_basis(g)?;
    let dg = transformed_detunings(&basis, deltas);
    let block = faer::Mat::from_fn(n - 1, n - 1, |a, b| {
        let v = dg[(a + 1, b + 1)];
        if a == b {
            v - C64::new(0.0, gamma)
        } else {
            v
        }
    });
    let row: Vec<C64> = (1..n).map(|k| dg[(0, k)]).collect();
    let col: Vec<C64> = (1..n).map(|k| dg[(k, 0)]).collect();
    let z = schur_term(&block, &row, &col)?;
    Ok((
        dg[(0, 0)].re,
        ReservoirResult {
            delta_dark: z.re,
            gamma_dark: z.im,
        },
    ))
}

/// Sorted shifts and coupling weights of the dark block. Cost O(N^3).
pub fn reservoir_spectrum(deltas: &[f64]) -> Result<ReservoirSpectrum> {
    let c = dft_delta_matrix(deltas)?;
    // Hermitian part of the dark block, without the diagonal.
    let h = c.dark_block(C64::new(0.0, 0.0));
    let (vals, vecs) = linalg::hermitian_eigen(&h)?;
    let m = c.m_vec();
    let norm2: f64 = m.iter().map(|x| x.norm_sqr()).sum();
    let n = vals.len();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let overlap: C64 = (0..n).map(|i| vecs[(i, j)].conj() * m[i]).sum();
            let w = if norm2 > 0.0 { overlap.norm_sqr() / norm2 } else { 0.0 };
            (-vals[j], w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ReservoirSpectrum {
        eigenvalues_tilde: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Branch of the mesoscopic scaling law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `gamma >> w`: `w^2 / gamma`.
    NarrowDisorder,
    /// `w >> gamma`: `pi w / 4`.
    BroadDisorder,
}

pub fn gamma_dark_asymptotic(w: f64, gamma: f64, regime: Regime) -> Result<f64> {
    if !(w >= 0.0) || !(gamma >= 0.0) || (w == 0.0 && gamma == 0.0) {
        return Err(Error::invalid("w", "need w >= 0, gamma >= 0, not both zero"));
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    match regime {
        Regime::NarrowDisorder => {
            if gamma == 0.0 {
                return Err(Error::invalid("gamma", "narrow-disorder branch needs gamma > 0"));
            }
            Ok(w * w / gamma)
        }
        Regime::BroadDisorder => Ok(PI * w / 4.0),
    }
}

/// Default spread parameter of the flat-spectrum approximation.
pub const DEFAULT_Q: f64 = 2.0;

/// Loss rate when the dark shifts are spread evenly on `[-q w, q w]`:
/// `(w / q) arctan(q w / gamma)`, tending to `pi w / (2 q)`.
pub fn gamma_dark_flat_spectrum(w: f64, gamma: f64, q: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    (w / q) * (q * w / gamma).atan()
}

/// Gaussian quantile curve `sqrt(2) w erfinv(2 j / N - 1)` against which the
/// sorted shifts are compared; `erfinv` is passed in by the caller.
pub fn gaussian_quantile_curve(w: f64, n: usize, erfinv: impl Fn(f64) -> f64) -> Vec<f64> {
    (1..n)
        .map(|j| 2f64.sqrt() * w * erfinv(2.0 * j as f64 / n as f64 - 1.0))
        .collect()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Memory kernel `Theta(tau) w^2 exp(-i (delta_bar - i gamma) tau) sinc(2 w tau)`.
pub fn memory_kernel(w: f64, delta_bar: f64, gamma: f64, tau: f64) -> C64 {
    if tau < 0.0 {
        return C64::new(0.0, 0.0);
    }
    C64::from_polar(w * w * (-gamma * tau).exp() * sinc(2.0 * w * tau), -delta_bar * tau)
}

/// Closed form of the kernel integral at `delta_bar = 0`: `(w/2) arctan(2w/gamma)`.
pub fn memory_kernel_integral(w: f64, gamma: f64) -> f64 {
    gamma_dark_flat_spectrum(w, gamma, 2.0)
}

/// Parameters of the coupled bright-mode / cavity dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrightModeParams {
    pub w: f64,
    pub gamma: f64,
    pub delta_bar: f64,
    pub g_n: f64,
    pub kappa: f64,
    /// Cavity detuning in the same rotating frame.
    #[serde(default)]
    pub delta_c: f64,
}

/// Sampled trajectories of the bright mode and the cavity amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrightTrajectory {
    pub t: Vec<f64>,
    pub bright: Vec<C64>,
    pub cavity: Vec<C64>,
}

impl BrightTrajectory {
    /// Root-mean-square of `|B|` over the grid.
    pub fn bright_l2(&self) -> f64 {
        (self.bright.iter().map(|b| b.norm_sqr()).sum::<f64>() / self.bright.len() as f64).sqrt()
    }
}

fn check_uniform(t_grid: &[f64]) -> Result<f64> {
    if t_grid.len() < 2 {
        return Err(Error::NonUniformGrid);
    }
    let h = t_grid[1] - t_grid[0];
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    let tol = 1e-9 * h.max(t_grid.last().unwrap().abs() * f64::EPSILON * 10.0);
    for (k, t) in t_grid.iter().enumerate() {
        if (t - (t_grid[0] + k as f64 * h)).abs() > tol.max(1e-12 * t.abs()) {
            return Err(Error::NonUniformGrid);
        }
    }
    Ok(h)
}

/// Solve a 2x2 complex system.
fn solve2(a: [[C64; 2]; 2], b: [C64; 2]) -> [C64; 2] {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [
        (b[0] * a[1][1] - a[0][1] * b[1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ]
}

/// Integrate
/// `dB/dt = -(gamma + i delta_bar) B - int_0^t f(t-s) B(s) ds - i g_N alpha`,
/// `d alpha/dt = -(kappa + i delta_c) alpha - i g_N B`
/// from `(B, alpha)(t0) = initial` with the trapezoid rule for both the ODE and
/// the memory integral. The scheme is implicit in the newest point and
/// second-order accurate. The memory sum is cut where the kernel envelope
/// drops below `1e-8 w^2`.
pub fn bright_evolution_nonmarkovian(
    params: &BrightModeParams,
    initial: (C64, C64),
    t_grid: &[f64],
) -> Result<BrightTrajectory> {
    let h = check_uniform(t_grid)?;
    let n = t_grid.len();
    let i = C64::new(0.0, 1.0);
    let a_b = -(params.gamma + i * params.delta_bar);
    let a_c = -(params.kappa + i * params.delta_c);
    let cpl = -i * params.g_n;

    let envelope_cut = if params.w > 0.0 {
        // exp(-gamma tau) / (2 w tau) < 1e-8 is sufficient for the cut.
        let mut tau = 1.0 / params.w;
        while (-params.gamma * tau).exp() / (2.0 * params.w * tau) > 1e-8 && tau < 1e12 {
            tau *= 1.5;
        }
        ((tau / h).ceil() as usize).max(1)
    } else {
        0
    };
    let kernel: Vec<C64> = (0..n.min(envelope_cut + 1))
        .map(|k| memory_kernel(params.w, params.delta_bar, params.gamma, k as f64 * h))
        .collect();
    let f = |k: usize| -> C64 { kernel.get(k).copied().unwrap_or(C64::new(0.0, 0.0)) };

    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    b.push(initial.0);
    c.push(initial.1);
    // Memory integral at step index `step`, excluding the newest point.
    let memory_tail = |b: &Vec<C64>, step: usize| -> C64 {
        if step == 0 {
            return C64::new(0.0, 0.0);
        }
        let lo = step.saturating_sub(envelope_cut);
        let mut s = C64::new(0.0, 0.0);
        for (k, bk) in b.iter().enumerate().take(step).skip(lo) {
            let wgt = if k == 0 { 0.5 } else { 1.0 };
            s += wgt * f(step - k) * bk;
        }
        s * h
    };
    let mut mem_prev = C64::new(0.0, 0.0);
    let f0 = f(0);
    for step in 1..n {
        let fb_prev = a_b * b[step - 1] - mem_prev + cpl * c[step - 1];
        let fc_prev = a_c * c[step - 1] + cpl * b[step - 1];
        let tail = memory_tail(&b, step);
        // Unknowns (B, alpha) at `step`; the memory integral there is
        // tail + h f(0) B / 2.
        let half = 0.5 * h;
        let mat = [
            [1.0 - half * (a_b - 0.5 * h * f0), -half * cpl],
            [-half * cpl, 1.0 - half * a_c],
        ];
        let rhs = [
            b[step - 1] + half * (fb_prev - tail),
            c[step - 1] + half * fc_prev,
        ];
        let [bn, cn] = solve2(mat, rhs);
        b.push(bn);
        c.push(cn);
        mem_prev = tail + 0.5 * h * f0 * bn;
    }
    Ok(BrightTrajectory {
        t: t_grid.to_vec(),
        bright: b,
        cavity: c,
    })
}

/// Markovian counterpart with total bright loss `gamma + gamma_dark`,
/// integrated exactly through the 2x2 matrix exponential.
pub fn bright_evolution_markovian(
    params: &BrightModeParams,
    gamma_dark: f64,
    delta_dark: f64,
    initial: (C64, C64),
    t_grid: &[f64],
) -> BrightTrajectory {
    let i = C64::new(0.0, 1.0);
    let a = -(params.gamma + gamma_dark) - i * (params.delta_bar - delta_dark);
    let d = -(params.kappa + i * params.delta_c);
    let cpl = -i * params.g_n;
    // Eigen-decomposition of [[a, cpl], [cpl, d]].
    let mean = 0.5 * (a + d);
    let root = (0.25 * (a - d) * (a - d) + cpl * cpl).sqrt();
    let (l1, l2) = (mean + root, mean - root);
    let t0 = t_grid[0];
    let mut bright = Vec::with_capacity(t_grid.len());
    let mut cavity = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let s = t - t0;
        let (e1, e2) = ((l1 * s).exp(), (l2 * s).exp());
        // exp(A s) = [(A - l2) e1 - (A - l1) e2] / (l1 - l2), or the
        // degenerate limit.
        let (p, q) = if (l1 - l2).norm() > 1e-12 {
            ((e1 - e2) / (l1 - l2), (l1 * e2 - l2 * e1) / (l1 - l2))
        } else {
            (s * e1, e1 - l1 * s * e1)
        };
        // exp(A s) = p A + q I.
        let b0 = initial.0;
        let c0 = initial.1;
        bright.push(p * (a * b0 + cpl * c0) + q * b0);
        cavity.push(p * (cpl * b0 + d * c0) + q * c0);
    }
    BrightTrajectory {
        t: t_grid.to_vec(),
        bright,
        cavity,
    }
}

/// Relative L2 distance between two bright-mode trajectories on the same grid.
pub fn relative_l2(a: &BrightTrajectory, b: &BrightTrajectory) -> f64 {
    let num: f64 = a.bright.iter().zip(&b.bright).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.bright.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Peak-to-peak splitting `2 |Im sqrt(z^2 / 4 - g_N^2)|` with
/// `z = (gamma_total - kappa) + i delta_eff`. Zero when the radicand is a
/// nonnegative real number.
pub fn vrs_reduced(g_n: f64, gamma_total: f64, kappa: f64, delta_eff: f64) -> f64 {
    let z = C64::new(gamma_total - kappa, delta_eff);
    let rad = 0.25 * z * z - g_n * g_n;
    if rad.im == 0.0 && rad.re >= 0.0 {
        return 0.0;
    }
    2.0 * rad.sqrt().im.abs()
}
