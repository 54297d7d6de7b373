//! Steady-state cavity transmission and the uncoupled-basis evolution matrix.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};
use crate::model::{CavitySpec, Realization};
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

fn extra(extra_loss: Option<&[f64]>, j: usize) -> f64 {
    extra_loss.map_or(0.0, |x| x[j])
}

/// Closed-form amplitude transmission `t = kappa <a> / eta` at laser
/// frequency `omega_laser`. `extra_loss[j]` adds to the decay of molecule `j`
/// (FRET outflow or a ramped donor rate). Cost is O(N).
pub fn transmission_amplitude(
    realization: &Realization,
    cavity: &CavitySpec,
    omega_laser: f64,
    extra_loss: Option<&[f64]>,
) -> C64 {
    if let Some(x) = extra_loss {
        assert_eq!(x.len(), realization.len(), "extra_loss length mismatch");
    }
    let base = realization.omega_e - omega_laser;
    let mut denom = C64::new(cavity.kappa, cavity.omega_c - omega_laser);
    for (j, (&d, g)) in realization.deltas.iter().zip(&realization.g).enumerate() {
        let rate = realization.gamma + extra(extra_loss, j);
        denom += g.norm_sqr() / C64::new(rate, base + d);
    }
    cavity.kappa / denom
}

/// Laser-frequency grid and the complex transmission on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub omega_grid: Vec<f64>,
    pub t: Vec<C64>,
    pub seed: u64,
}

impl ComplexSpectrum {
    pub fn abs(&self) -> Vec<f64> {
        self.t.iter().map(|t| t.norm()).collect()
    }
}

/// Uniform grid of `points` frequencies on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Pointwise transmission over a strictly increasing grid.
pub fn spectrum_scan(
    realization: &Realization,
    cavity: &CavitySpec,
    grid: &[f64],
    extra_loss: Option<&[f64]>,
) -> Result<ComplexSpectrum> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must be nonempty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("grid", "must be strictly increasing"));
    }
    let t = grid
        .par_iter()
        .map(|&w| transmission_amplitude(realization, cavity, w, extra_loss))
        .collect();
    Ok(ComplexSpectrum {
        omega_grid: grid.to_vec(),
        t,
        seed: realization.seed,
    })
}

/// `(N+1) x (N+1)` matrix `M` of `dv/dt = -i M v + v_d`, ordered
/// `(beta_1, ..., beta_N, alpha)`.
#[derive(Clone, Debug)]
pub struct EvolutionMatrix {
    pub m: CMat,
}

impl EvolutionMatrix {
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Diagonal entries; the last one belongs to the cavity.
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.m[(i, i)]).collect()
    }
}

pub fn evolution_matrix(
    realization: &Realization,
    cavity: &CavitySpec,
    omega_laser: f64,
    extra_loss: Option<&[f64]>,
) -> EvolutionMatrix {
    let n = realization.len();
    let base = realization.omega_e - omega_laser;
    let mut m = Mat::<C64>::zeros(n + 1, n + 1);
    for j in 0..n {
        let rate = realization.gamma + extra(extra_loss, j);
        m[(j, j)] = C64::new(base + realization.deltas[j], -rate);
        m[(j, n)] = realization.g[j];
        m[(n, j)] = realization.g[j].conj();
    }
    m[(n, n)] = C64::new(cavity.omega_c - omega_laser, -cavity.kappa);
    EvolutionMatrix { m }
}

/// Transmission from the steady state `M v = -i v_d` of the linear system.
pub fn transmission_by_linear_solve(
    realization: &Realization,
    cavity: &CavitySpec,
    omega_laser: f64,
    extra_loss: Option<&[f64]>,
) -> Result<C64> {
    let em = evolution_matrix(realization, cavity, omega_laser, extra_loss);
    let n = realization.len();
    let eta = 1.0;
    let mut rhs = vec![C64::new(0.0, 0.0); n + 1];
    rhs[n] = -I * eta;
    let v = linalg::solve(&em.m, &rhs)?;
    Ok(cavity.kappa * v[n] / eta)
}

/// Local maximum of `|t|` refined by a parabola through three grid points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
    /// Height above the higher of the two neighbouring minima.
    pub prominence: f64,
}

/// All interior local maxima of `values` on `grid`, in grid order.
pub fn find_peaks(grid: &[f64], values: &[f64]) -> Vec<Peak> {
    let n = values.len();
    let mut peaks = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if values[i] > values[i - 1] && values[i] >= values[i + 1] {
            let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
            let curvature = y0 - 2.0 * y1 + y2;
            let (shift, height) = if curvature < 0.0 {
                let s = 0.5 * (y0 - y2) / curvature;
                (s, y1 - 0.25 * (y0 - y2) * s)
            } else {
                (0.0, y1)
            };
            let step = 0.5 * (grid[i + 1] - grid[i - 1]);
            let mut left_min = y1;
            let mut k = i;
            while k > 0 {
                k -= 1;
                if values[k] > y1 {
                    break;
                }
                left_min = left_min.min(values[k]);
            }
            let mut right_min = y1;
            let mut k = i;
            while k + 1 < n {
                k += 1;
                if values[k] > y1 {
                    break;
                }
                right_min = right_min.min(values[k]);
            }
            peaks.push(Peak {
                omega: grid[i] + shift * step,
                height,
                prominence: y1 - left_min.max(right_min),
            });
        }
    }
    peaks
}

/// Peaks whose prominence is at least `fraction` of the global maximum.
pub fn prominent_peaks(grid: &[f64], values: &[f64], fraction: f64) -> Vec<Peak> {
    let top = values.iter().copied().fold(f64::MIN, f64::max);
    find_peaks(grid, values)
        .into_iter()
        .filter(|p| p.prominence >= fraction * top)
        .collect()
}

/// Full width at half maximum of the peak nearest `omega`, with linear
/// interpolation of the half-height crossings. `None` if a crossing is
/// missing inside the grid.
pub fn fwhm(grid: &[f64], values: &[f64], omega: f64) -> Option<f64> {
    let i = grid
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - omega).abs().total_cmp(&(b.1 - omega).abs()))?
        .0;
    let mut top = values[i];
    let mut peak = i;
    // Climb to the local maximum.
    loop {
        if peak + 1 < values.len() && values[peak + 1] > top {
            peak += 1;
        } else if peak > 0 && values[peak - 1] > top {
            peak -= 1;
        } else {
            break;
        }
        top = values[peak];
    }
    let half = 0.5 * top;
    let mut l = peak;
    while l > 0 && values[l] > half {
        l -= 1;
    }
    let mut r = peak;
    while r + 1 < values.len() && values[r] > half {
        r += 1;
    }
    if values[l] > half || values[r] > half {
        return None;
    }
    let cross = |a: usize, b: usize| -> f64 {
        let (ya, yb) = (values[a], values[b]);
        grid[a] + (half - ya) / (yb - ya) * (grid[b] - grid[a])
    };
    Some(cross(r - 1, r) - cross(l, l + 1))
}

/// Polariton frequencies from the 2x2 cavity-bright block: real parts of the
/// eigenvalues of `[[omega_e + delta_bar - i gamma, g_n], [g_n, omega_c - i kappa]]`.
pub fn polariton_lines(g_n: f64, omega_bright: f64, gamma: f64, omega_c: f64, kappa: f64) -> (f64, f64) {
    let a = C64::new(omega_bright, -gamma);
    let d = C64::new(omega_c, -kappa);
    let mean = 0.5 * (a + d);
    let root = (0.25 * (a - d) * (a - d) + g_n * g_n).sqrt();
    let (x, y) = ((mean - root).re, (mean + root).re);
    (x.min(y), x.max(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_realization, EnsembleSpec};
    use proptest::prelude::*;

    fn cavity() -> CavitySpec {
        CavitySpec::new(0.0, 1.0)
    }

    #[test]
    fn empty_ensemble_is_transparent_on_resonance() {
        let r = Realization::from_parts(0.0, 0.01, vec![], vec![]);
        let t = transmission_amplitude(&r, &cavity(), 0.0, None);
        assert!((t - 1.0).norm() < 1e-15);
    }

    #[test]
    fn resonant_uniform_ensemble_matches_linear_solve() {
        let r = Realization::with_uniform_coupling(0.0, 0.01, vec![0.0; 16], 0.25);
        let t = transmission_amplitude(&r, &cavity(), 0.0, None);
        assert!((t - 1.0 / 101.0).norm() < 1e-14);
        let t_solve = transmission_by_linear_solve(&r, &cavity(), 0.0, None).unwrap();
        assert!((t_solve - 1.0 / 101.0).norm() < 1e-12);
    }

    #[test]
    fn two_polariton_peaks_at_collective_coupling() {
        let r = Realization::with_uniform_coupling(0.0, 0.01, vec![0.0; 16], 0.25);
        let grid = uniform_grid(-2.0, 2.0, 4001);
        let s = spectrum_scan(&r, &cavity(), &grid, None).unwrap();
        let peaks = find_peaks(&grid, &s.abs());
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].omega + 1.0).abs() < 0.01);
        assert!((peaks[1].omega - 1.0).abs() < 0.01);
    }

    #[test]
    fn single_molecule_strong_coupling_splits_by_2g() {
        let g = 20.0;
        let r = Realization::with_uniform_coupling(0.0, 0.01, vec![0.0], g);
        let grid = uniform_grid(-30.0, 30.0, 60001);
        let s = spectrum_scan(&r, &cavity(), &grid, None).unwrap();
        let peaks = find_peaks(&grid, &s.abs());
        assert_eq!(peaks.len(), 2);
        assert!((peaks[1].omega - peaks[0].omega - 2.0 * g).abs() < 0.01);
    }

    #[test]
    fn zero_width_equals_single_molecule_with_collective_coupling() {
        let n = 25;
        let g = 0.2;
        let r = Realization::with_uniform_coupling(0.0, 0.03, vec![0.0; n], g);
        let one = Realization::with_uniform_coupling(0.0, 0.03, vec![0.0], g * (n as f64).sqrt());
        for w in uniform_grid(-3.0, 3.0, 301) {
            let a = transmission_amplitude(&r, &cavity(), w, None);
            let b = transmission_amplitude(&one, &cavity(), w, None);
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn evolution_matrix_layout() {
        let r = Realization::with_uniform_coupling(0.0, 0.1, vec![0.0], 0.5);
        let m = evolution_matrix(&r, &cavity(), 0.0, None).m;
        assert_eq!(m[(0, 1)], C64::new(0.5, 0.0));
        assert_eq!(m[(1, 0)], C64::new(0.5, 0.0));
        assert_eq!(m[(0, 0)], C64::new(0.0, -0.1));
        assert_eq!(m[(1, 1)], C64::new(0.0, -1.0));
    }

    #[test]
    fn evolution_matrix_eigenvalues_at_zero_width() {
        let r = Realization::with_uniform_coupling(0.0, 0.01, vec![0.0; 16], 0.25);
        let m = evolution_matrix(&r, &cavity(), 0.0, None).m;
        let vals = crate::linalg::eigenvalues(&m).unwrap();
        let mut re: Vec<f64> = vals.iter().map(|v| v.re).collect();
        re.sort_by(f64::total_cmp);
        // Exact 2x2 result: +-sqrt(g_N^2 - (kappa - gamma)^2 / 4).
        let split = (1.0f64 - 0.99f64.powi(2) / 4.0).sqrt();
        assert!((re[0] + split).abs() < 1e-10 && (re[16] - split).abs() < 1e-10);
    }

    #[test]
    fn fret_outflow_enters_as_extra_decay() {
        let r = Realization::with_uniform_coupling(0.0, 0.01, vec![0.1, -0.2, 0.05], 0.3);
        let x = [0.2, 0.0, 0.7];
        let a = transmission_amplitude(&r, &cavity(), 0.15, Some(&x));
        let b = transmission_by_linear_solve(&r, &cavity(), 0.15, Some(&x)).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn fwhm_of_lorentzian() {
        let grid = uniform_grid(-10.0, 10.0, 20001);
        let vals: Vec<f64> = grid.iter().map(|w| 1.0 / (1.0 + (w / 0.5).powi(2))).collect();
        let width = fwhm(&grid, &vals, 0.0).unwrap();
        assert!((width - 1.0).abs() < 1e-5);
    }

    #[test]
    fn polariton_lines_at_resonance() {
        let (lo, hi) = polariton_lines(1.0, 0.0, 0.5, 0.0, 0.5);
        assert!((lo + 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
    }

    #[test]
    fn empty_grid_rejected() {
        let r = Realization::with_uniform_coupling(0.0, 0.01, vec![0.0], 0.1);
        assert!(spectrum_scan(&r, &cavity(), &[], None).is_err());
        assert!(spectrum_scan(&r, &cavity(), &[0.0, 0.0], None).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn closed_form_equals_linear_solve(seed in any::<u64>(), n in 1usize..40, w in 0.0f64..2.0, omega in -3.0f64..3.0) {
            let spec = EnsembleSpec::uniform(n, 0.3, 0.02, w);
            let r = sample_realization(&spec, seed).unwrap();
            let a = transmission_amplitude(&r, &cavity(), omega, None);
            let b = transmission_by_linear_solve(&r, &cavity(), omega, None).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-300));
        }

        #[test]
        fn transmission_never_exceeds_unity(seed in any::<u64>(), n in 1usize..30, w in 0.0f64..2.0, omega in -3.0f64..3.0, detune in -1.0f64..1.0) {
            let spec = EnsembleSpec::uniform(n, 0.4, 0.05, w);
            let r = sample_realization(&spec, seed).unwrap();
            let t = transmission_amplitude(&r, &CavitySpec::new(detune, 0.7), omega, None);
            prop_assert!(t.norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn zero_width_spectrum_is_permutation_invariant(perm_seed in any::<u64>(), n in 2usize..20, omega in -2.0f64..2.0) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let g: Vec<C64> = (0..n).map(|_| C64::new(0.3, 0.0)).collect();
            let mut deltas = vec![0.0; n];
            deltas[0] = 0.0;
            let r = Realization::from_parts(0.0, 0.01, deltas.clone(), g.clone());
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
            let p = Realization::from_parts(0.0, 0.01, idx.iter().map(|&i| deltas[i]).collect(), idx.iter().map(|&i| g[i]).collect());
            let a = transmission_amplitude(&r, &cavity(), omega, None);
            let b = transmission_amplitude(&p, &cavity(), omega, None);
            prop_assert!((a - b).norm() < 1e-14);
        }
    }
}
