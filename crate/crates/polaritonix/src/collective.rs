//! Bright/dark collective basis.
//!
//! Collective amplitudes are `D_k = N^{-1/2} sum_j exp(-2 pi i j k / N) beta_j`
//! with `j, k = 1..N`; `k = N` is the bright mode for uniform couplings. The
//! detuning matrix in this basis is circulant:
//! `Delta_{kk'} = c[(k - k') mod N]` with
//! `c[m] = (1/N) sum_j delta_j exp(-2 pi i j m / N)`.

use faer::Mat;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::linalg::CMat;
use crate::{Error, Result, C64};

/// Largest N for which the full Delta matrix is materialized.
pub const DENSE_DELTA_CAP: usize = 4096;

fn forward_dft(values: &mut [C64]) {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(values.len()).process(values);
}

/// Circulant coupling structure of the collective basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveCouplings {
    /// `generator[m] = Delta_{k, k-m}` for `m = 0..N`.
    pub generator: Vec<C64>,
}

impl CollectiveCouplings {
    /// Circulant generator for complex effective detunings.
    pub fn from_complex(z: &[C64]) -> Result<Self> {
        let n = z.len();
        if n < 2 {
            return Err(Error::invalid("deltas", "need at least two molecules"));
        }
        let mut buf = z.to_vec();
        forward_dft(&mut buf);
        // Molecule index j starts at 1, which shifts the phase by one step.
        let nf = n as f64;
        let generator = buf
            .iter()
            .enumerate()
            .map(|(m, f)| f * C64::from_polar(1.0 / nf, -2.0 * PI * m as f64 / nf))
            .collect();
        Ok(Self { generator })
    }

    pub fn len(&self) -> usize {
        self.generator.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generator.is_empty()
    }

    /// Mean detuning `Delta_{kk}`.
    pub fn delta_bar(&self) -> f64 {
        self.generator[0].re
    }

    /// `Delta_{kk'}` with one-based indices as in the collective labels.
    pub fn element(&self, k: usize, kp: usize) -> C64 {
        let n = self.len();
        self.generator[(k + n - kp % n) % n]
    }

    /// Dark-to-bright couplings `(Delta_{1N}, ..., Delta_{N-1,N})`.
    pub fn m_vec(&self) -> Vec<C64> {
        self.generator[1..].to_vec()
    }

    /// Bright-to-dark couplings `(Delta_{N1}, ..., Delta_{N,N-1})`.
    pub fn m_row(&self) -> Vec<C64> {
        let n = self.len();
        (1..n).map(|k| self.element(n, k)).collect()
    }

    /// Full `N x N` matrix; refused above [`DENSE_DELTA_CAP`].
    pub fn dense(&self) -> Result<CMat> {
        let n = self.len();
        if n > DENSE_DELTA_CAP {
            return Err(Error::DenseCap {
                dim: n,
                cap: DENSE_DELTA_CAP,
            });
        }
        Ok(Mat::from_fn(n, n, |a, b| self.element(a + 1, b + 1)))
    }

    /// Dark-sector matrix: `diagonal * I` plus the off-diagonal `Delta_{kk'}`
    /// for `k, k' = 1..N-1`.
    pub fn dark_block(&self, diagonal: C64) -> CMat {
        let n = self.len() - 1;
        Mat::from_fn(n, n, |a, b| {
            if a == b {
                diagonal
            } else {
                self.element(a + 1, b + 1)
            }
        })
    }
}

/// DFT couplings for real detunings.
pub fn dft_delta_matrix(deltas: &[f64]) -> Result<CollectiveCouplings> {
    let z: Vec<C64> = deltas.iter().map(|&d| C64::new(d, 0.0)).collect();
    CollectiveCouplings::from_complex(&z)
}

/// Eigen-decomposition of a circulant matrix with first column `column`.
#[derive(Clone, Debug, PartialEq)]
pub struct CirculantEigen {
    /// `values[j]` belongs to the vector with ratio `exp(2 pi i j / N)`.
    pub values: Vec<C64>,
}

impl CirculantEigen {
    /// Normalized eigenvector `N^{-1/2} (1, xi_j, xi_j^2, ...)`.
    pub fn vector(&self, j: usize) -> Vec<C64> {
        let n = self.values.len();
        let norm = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|k| C64::from_polar(norm, 2.0 * PI * (j * k % n) as f64 / n as f64))
            .collect()
    }
}

/// Eigenvalues `lambda_j = sum_m column[m] xi_j^{-m}`.
pub fn circulant_eigen(column: &[C64]) -> Result<CirculantEigen> {
    if column.len() < 2 {
        return Err(Error::invalid("column", "need at least two entries"));
    }
    let mut values = column.to_vec();
    forward_dft(&mut values);
    Ok(CirculantEigen { values })
}

/// Circulant column of the collective block with uniform decay `gamma`.
pub fn collective_block_column(couplings: &CollectiveCouplings, gamma: f64) -> Vec<C64> {
    let mut col = couplings.generator.clone();
    col[0] -= C64::new(0.0, gamma);
    col
}

/// Orthonormal basis whose first row is the normalized conjugate coupling
/// vector. Rows are mode coefficients: `mode_r = sum_j basis[(r, j)] beta_j`.
pub fn gram_schmidt_dark_basis(g: &[C64]) -> Result<CMat> {
    let n = g.len();
    let norm = g.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n == 0 || norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroCoupling);
    }
    let mut rows: Vec<Vec<C64>> = Vec::with_capacity(n);
    rows.push(g.iter().map(|x| x.conj() / norm).collect());
    for e in 0..n {
        if rows.len() == n {
            break;
        }
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[e] = C64::new(1.0, 0.0);
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for r in &rows {
                let proj: C64 = r.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ri) in v.iter_mut().zip(r) {
                    *vi -= proj * ri;
                }
            }
        }
        let vn = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if vn > 1e-6 {
            rows.push(v.into_iter().map(|x| x / vn).collect());
        }
    }
    debug_assert_eq!(rows.len(), n);
    Ok(Mat::from_fn(n, n, |r, j| rows[r][j]))
}

/// `basis diag(deltas) basis^dagger`: detuning couplings between the modes of
/// `basis`, bright mode at index 0.
pub fn transformed_detunings(basis: &CMat, deltas: &[f64]) -> CMat {
    let n = deltas.len();
    Mat::from_fn(n, n, |a, b| {
        (0..n)
            .map(|j| basis[(a, j)] * deltas[j] * basis[(b, j)].conj())
            .sum()
    })
}

/// Evolution matrix rewritten in the DFT collective basis, ordered
/// `(D_1, ..., D_{N-1}, B, alpha)`. The input is ordered `(beta_1..beta_N, alpha)`.
pub fn to_collective_basis(m: &CMat) -> CMat {
    let n = m.nrows() - 1;
    let nf = n as f64;
    // u[(k, j)] with zero-based k, j standing for labels k+1, j+1.
    let u = |k: usize, j: usize| -> C64 {
        if k == n || j == n {
            return if k == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
        let phase = -2.0 * PI * (((j + 1) * (k + 1)) % n) as f64 / nf;
        C64::from_polar(1.0 / nf.sqrt(), phase)
    };
    let um = Mat::from_fn(n + 1, n + 1, u);
    let udag = Mat::from_fn(n + 1, n + 1, |a, b| u(b, a).conj());
    &um * m * &udag
}
