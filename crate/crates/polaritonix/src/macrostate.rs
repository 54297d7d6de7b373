//! Single-excitation density-matrix dynamics and the macroscopicity measure.
//!
//! Basis ordering: `|0>` (ground), `|1>..|N>` (one molecule excited),
//! `|N+1>` (one cavity photon).

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::fret::RateMatrix;
use crate::model::{CavitySpec, Realization};
use crate::{Error, Result, C64};

/// Largest ensemble accepted by [`evolve`].
pub const MAX_MOLECULES: usize = 256;

/// Denominator floor of the macroscopicity.
pub const POPULATION_FLOOR: f64 = 1e-10;

/// Dense density matrix over the ground, molecular and photonic states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleExcitationState {
    dim: usize,
    rho: Vec<C64>,
    pub time: f64,
}

impl SingleExcitationState {
    /// `rho` is row-major with side `n + 2`.
    pub fn new(n: usize, rho: Vec<C64>, time: f64) -> Result<Self> {
        let dim = n + 2;
        if rho.len() != dim * dim {
            return Err(Error::invalid("rho", "expected an (N+2) x (N+2) matrix"));
        }
        Ok(Self { dim, rho, time })
    }

    fn zeros(n: usize) -> Self {
        let dim = n + 2;
        Self {
            dim,
            rho: vec![C64::new(0.0, 0.0); dim * dim],
            time: 0.0,
        }
    }

    /// Everything in `|0>`.
    pub fn ground(n: usize) -> Self {
        let mut s = Self::zeros(n);
        s.rho[0] = C64::new(1.0, 0.0);
        s
    }

    /// `|W> = N^{-1/2} sum_j |j>`.
    pub fn w_state(n: usize) -> Self {
        let mut s = Self::zeros(n);
        let v = C64::new(1.0 / n as f64, 0.0);
        for i in 1..=n {
            for j in 1..=n {
                s.rho[i * s.dim + j] = v;
            }
        }
        s
    }

    /// `(1/N) sum_j |j><j|`.
    pub fn mixed(n: usize) -> Self {
        let mut s = Self::zeros(n);
        for j in 1..=n {
            s.rho[j * s.dim + j] = C64::new(1.0 / n as f64, 0.0);
        }
        s
    }

    /// `|j><j|` with one-based molecule index.
    pub fn localized(n: usize, j: usize) -> Result<Self> {
        if j == 0 || j > n {
            return Err(Error::invalid("localized", "molecule index must lie in 1..=N"));
        }
        let mut s = Self::zeros(n);
        s.rho[j * s.dim + j] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn n_molecules(&self) -> usize {
        self.dim - 2
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rho[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn ground_population(&self) -> f64 {
        self.get(0, 0).re
    }

    pub fn cavity_population(&self) -> f64 {
        let c = self.dim - 1;
        self.get(c, c).re
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `max |rho - rho^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    fn symmetrize(&mut self) {
        for i in 0..self.dim {
            for j in i..self.dim {
                let a = self.rho[i * self.dim + j];
                let b = self.rho[j * self.dim + i];
                let avg = 0.5 * (a + b.conj());
                self.rho[i * self.dim + j] = avg;
                self.rho[j * self.dim + i] = avg.conj();
            }
        }
    }

    /// Macroscopicity; NaN when the molecular block is empty.
    pub fn macroscopicity(&self) -> f64 {
        macroscopicity(self)
    }
}

/// Initial-state selector `w-state | mixed | localized:<j>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialState {
    WState,
    Mixed,
    Localized(usize),
}

impl InitialState {
    pub fn build(self, n: usize) -> Result<SingleExcitationState> {
        match self {
            InitialState::WState => Ok(SingleExcitationState::w_state(n)),
            InitialState::Mixed => Ok(SingleExcitationState::mixed(n)),
            InitialState::Localized(j) => SingleExcitationState::localized(n, j),
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w-state" => Ok(Self::WState),
            "mixed" => Ok(Self::Mixed),
            _ => {
                let j = s
                    .strip_prefix("localized:")
                    .and_then(|x| x.parse::<usize>().ok())
                    .ok_or_else(|| Error::invalid("initial_state", format!("unknown selector `{s}`")))?;
                Ok(Self::Localized(j))
            }
        }
    }
}

impl TryFrom<String> for InitialState {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialState> for String {
    fn from(s: InitialState) -> String {
        match s {
            InitialState::WState => "w-state".into(),
            InitialState::Mixed => "mixed".into(),
            InitialState::Localized(j) => format!("localized:{j}"),
        }
    }
}

/// Coefficients of the single-excitation equations of motion. All vectors
/// have length `N + 1`; the last entry belongs to the cavity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Molecule-cavity couplings; the cavity slot is unused.
    pub g_vec: Vec<C64>,
    /// Decay rates, `gamma + outflow_j` for molecules and `kappa` for the cavity.
    pub gamma_diag: Vec<f64>,
    /// Frequencies in the laser frame.
    pub omega_vec: Vec<f64>,
    pub eta: f64,
}

impl GeneratorParams {
    pub fn from_realization(
        realization: &Realization,
        cavity: &CavitySpec,
        omega_laser: f64,
        rates: Option<&RateMatrix>,
        eta: f64,
    ) -> Self {
        let n = realization.len();
        let base = realization.omega_e - omega_laser;
        let mut g_vec = realization.g.clone();
        g_vec.push(C64::new(0.0, 0.0));
        let mut gamma_diag: Vec<f64> = (0..n)
            .map(|j| realization.gamma + rates.map_or(0.0, |r| r.outflow[j]))
            .collect();
        gamma_diag.push(cavity.kappa);
        let mut omega_vec: Vec<f64> = realization.deltas.iter().map(|d| base + d).collect();
        omega_vec.push(cavity.omega_c - omega_laser);
        Self {
            g_vec,
            gamma_diag,
            omega_vec,
            eta,
        }
    }

    pub fn n_molecules(&self) -> usize {
        self.omega_vec.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.omega_vec.len();
        if m < 2 || self.g_vec.len() != m || self.gamma_diag.len() != m {
            return Err(Error::invalid("generator", "g, Gamma and omega need N + 1 entries"));
        }
        if self.gamma_diag.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::invalid("gamma_diag", "rates must be nonnegative"));
        }
        if !self.eta.is_finite() {
            return Err(Error::invalid("eta", "must be finite"));
        }
        Ok(())
    }

    /// The truncation to one excitation needs a drive below the cavity loss.
    pub fn drive_exceeds_cavity_loss(&self) -> bool {
        self.eta.abs() > *self.gamma_diag.last().unwrap_or(&0.0)
    }

    /// `(H - i Gamma)_{ab}` on the excited block, indices `0..=N`.
    fn h_eff(&self, a: usize, b: usize) -> C64 {
        let c = self.n_molecules();
        let mut v = C64::new(0.0, 0.0);
        if a == b {
            v += C64::new(self.omega_vec[a], -self.gamma_diag[a]);
        }
        if b == c && a != c {
            v += self.g_vec[a];
        }
        if a == c && b != c {
            v += self.g_vec[b].conj();
        }
        v
    }
}

/// Time derivative of `rho`.
///
/// With `H_eff = H - i Gamma` on the excited block:
/// `d rho_00 = 2 sum Gamma_jj rho_jj - eta (rho_{c0} + rho_{0c})`,
/// `d rho_0j = i (rho_{0.} H_eff^dagger)_j + eta (rho_00 [j = c] - rho_{cj})`,
/// `d rho_ij = -i (H_eff rho - rho H_eff^dagger)_ij + eta (rho_0j [i = c] + rho_i0 [j = c])`,
/// and `d rho_j0` as the conjugate of `d rho_0j`.
pub fn density_matrix_rhs(state: &SingleExcitationState, params: &GeneratorParams) -> Vec<C64> {
    let dim = state.dim;
    let n = dim - 2;
    let c = n + 1;
    let eta = params.eta;
    let i = C64::new(0.0, 1.0);
    let r = |a: usize, b: usize| state.rho[a * dim + b];
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];

    // Arrowhead products on the excited block (indices 1..=c map to 0..=n).
    // left[a][b] = (H_eff rho)_{ab}, right[a][b] = (rho H_eff^dagger)_{ab}.
    let heff = |a: usize, b: usize| params.h_eff(a - 1, b - 1);
    let diag: Vec<C64> = (1..=c).map(|a| heff(a, a)).collect();

    let mut d00 = C64::new(0.0, 0.0);
    for j in 1..=c {
        d00 += 2.0 * params.gamma_diag[j - 1] * r(j, j);
    }
    d00 -= eta * (r(c, 0) + r(0, c));
    out[0] = C64::new(d00.re, 0.0);

    // Row 0: (rho_{0.} H_eff^dagger)_j = sum_l rho_0l conj(H_eff[j][l]).
    for j in 1..=c {
        let mut s = r(0, j) * diag[j - 1].conj();
        if j != c {
            s += r(0, c) * heff(j, c).conj();
        } else {
            for l in 1..=n {
                s += r(0, l) * heff(c, l).conj();
            }
        }
        let drive = eta * (if j == c { r(0, 0) } else { C64::new(0.0, 0.0) } - r(c, j));
        let v = i * s + drive;
        out[j] = v;
        out[j * dim] = v.conj();
    }

    for a in 1..=c {
        for b in 1..=c {
            // (H_eff rho)_{ab}
            let mut left = diag[a - 1] * r(a, b);
            if a != c {
                left += heff(a, c) * r(c, b);
            } else {
                for l in 1..=n {
                    left += heff(c, l) * r(l, b);
                }
            }
            // (rho H_eff^dagger)_{ab} = sum_l rho_al conj(H_eff[b][l])
            let mut right = r(a, b) * diag[b - 1].conj();
            if b != c {
                right += r(a, c) * heff(b, c).conj();
            } else {
                for l in 1..=n {
                    right += r(a, l) * heff(c, l).conj();
                }
            }
            let mut v = -i * (left - right);
            if a == c {
                v += eta * r(0, b);
            }
            if b == c {
                v += eta * r(a, 0);
            }
            out[a * dim + b] = v;
        }
    }
    out
}

/// `sum_{j != j'} |rho_jj'| / (1 - rho_00 - rho_cc) + 1` over the molecular block.
pub fn macroscopicity(state: &SingleExcitationState) -> f64 {
    let n = state.n_molecules();
    let denom = 1.0 - state.ground_population() - state.cavity_population();
    if denom <= POPULATION_FLOOR {
        return f64::NAN;
    }
    let mut s = 0.0;
    for j in 1..=n {
        for k in 1..=n {
            if j != k {
                s += state.get(j, k).norm();
            }
        }
    }
    s / denom + 1.0
}

/// Same quantity through the projected and renormalized state
/// `P rho P / tr(P rho P)` with `P` removing `|0>` and `|N+1>`.
pub fn macroscopicity_projected(state: &SingleExcitationState) -> f64 {
    let dim = state.dim;
    let keep = |k: usize| k != 0 && k != dim - 1;
    let mut projected = vec![C64::new(0.0, 0.0); dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            if keep(a) && keep(b) {
                projected[a * dim + b] = state.get(a, b);
            }
        }
    }
    let tr: f64 = (0..dim).map(|k| projected[k * dim + k].re).sum();
    if tr <= POPULATION_FLOOR {
        return f64::NAN;
    }
    let mut s = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                s += (projected[a * dim + b] / tr).norm();
            }
        }
    }
    s + 1.0
}

fn axpy(y: &[C64], h: f64, k: &[C64]) -> Vec<C64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn rk4_step(state: &SingleExcitationState, params: &GeneratorParams, h: f64) -> SingleExcitationState {
    let at = |rho: Vec<C64>| SingleExcitationState {
        dim: state.dim,
        rho,
        time: state.time,
    };
    let k1 = density_matrix_rhs(state, params);
    let k2 = density_matrix_rhs(&at(axpy(&state.rho, 0.5 * h, &k1)), params);
    let k3 = density_matrix_rhs(&at(axpy(&state.rho, 0.5 * h, &k2)), params);
    let k4 = density_matrix_rhs(&at(axpy(&state.rho, h, &k3)), params);
    let rho = (0..state.rho.len())
        .map(|m| state.rho[m] + h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]))
        .collect();
    let mut next = SingleExcitationState {
        dim: state.dim,
        rho,
        time: state.time + h,
    };
    next.symmetrize();
    next
}

fn advance(state: &SingleExcitationState, params: &GeneratorParams, dt: f64, substeps: usize) -> SingleExcitationState {
    let h = dt / substeps as f64;
    let mut s = state.clone();
    for _ in 0..substeps {
        s = rk4_step(&s, params, h);
    }
    s
}

/// Tolerance on the macroscopicity change under step halving.
pub const STEP_TOL: f64 = 1e-6;
const MAX_SUBSTEPS: usize = 1 << 22;

/// Integrate from `rho0` and report the state at every grid time. Each
/// interval is integrated with fixed-step RK4, doubling the substep count
/// until halving the step moves both the macroscopicity and every matrix
/// element by less than [`STEP_TOL`].
pub fn evolve(
    rho0: &SingleExcitationState,
    params: &GeneratorParams,
    t_grid: &[f64],
) -> Result<Vec<SingleExcitationState>> {
    params.validate()?;
    let n = params.n_molecules();
    if rho0.n_molecules() != n {
        return Err(Error::invalid("rho0", "size does not match the generator"));
    }
    if n > MAX_MOLECULES {
        return Err(Error::invalid("n_molecules", format!("trajectories are capped at {MAX_MOLECULES}")));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonUniformGrid);
    }
    let rate_scale = params
        .omega_vec
        .iter()
        .map(|w| w.abs())
        .chain(params.gamma_diag.iter().copied())
        .chain(params.g_vec.iter().map(|g| g.norm() * (n as f64).sqrt()))
        .chain(std::iter::once(params.eta.abs()))
        .fold(0.0, f64::max)
        .max(1e-12);

    let mut current = rho0.clone();
    current.time = t_grid[0];
    let mut out = vec![current.clone()];
    let mut substeps = 1usize;
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        substeps = substeps.max((dt * rate_scale / 0.2).ceil() as usize);
        loop {
            let coarse = advance(&current, params, dt, substeps);
            let fine = advance(&current, params, dt, 2 * substeps);
            let (cc, cf) = (macroscopicity(&coarse), macroscopicity(&fine));
            let same_c = !(cc.is_finite() && cf.is_finite()) || (cc - cf).abs() < STEP_TOL;
            let same_rho = coarse
                .rho
                .iter()
                .zip(&fine.rho)
                .all(|(a, b)| (a - b).norm() < STEP_TOL);
            let ok = same_c && same_rho;
            if ok {
                current = fine;
                current.time = w[1];
                break;
            }
            substeps *= 2;
            if substeps > MAX_SUBSTEPS {
                return Err(Error::StepUnderflow { substeps });
            }
        }
        out.push(current.clone());
    }
    Ok(out)
}
