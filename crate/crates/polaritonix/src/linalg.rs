//! Thin wrappers over faer for the dense complex kernels.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::{Error, Result, C64};

pub type CMat = Mat<C64>;

/// Solve `a x = b` by partial-pivot LU.
pub fn solve(a: &CMat, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.nrows();
    assert_eq!(n, b.len());
    let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    let x = a.partial_piv_lu().solve(&rhs);
    let out: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(out)
}

/// Eigenvalues of a general complex matrix, unordered.
pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    a.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Eigenvalues and right eigenvectors (columns) of a general complex matrix.
pub fn eigen(a: &CMat) -> Result<(Vec<C64>, CMat)> {
    let evd = a.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().map(|v| v.re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn mat_vec(a: &CMat, x: &[C64]) -> Vec<C64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_recovers_known_vector() {
        let a = Mat::from_fn(3, 3, |i, j| {
            C64::new((i + 2 * j) as f64 + if i == j { 5.0 } else { 0.0 }, (i as f64) - (j as f64))
        });
        let x = vec![C64::new(1.0, -1.0), C64::new(0.5, 2.0), C64::new(-3.0, 0.0)];
        let b = mat_vec(&a, &x);
        let y = solve(&a, &b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn eigen_pairs_satisfy_definition() {
        let a = Mat::from_fn(4, 4, |i, j| C64::new(((i * 7 + j * 3) % 5) as f64, (i as f64 - j as f64) * 0.3));
        let (vals, vecs) = eigen(&a).unwrap();
        for k in 0..4 {
            let v: Vec<C64> = (0..4).map(|i| vecs[(i, k)]).collect();
            let av = mat_vec(&a, &v);
            for i in 0..4 {
                assert!((av[i] - vals[k] * v[i]).norm() < 1e-10);
            }
        }
        let sum: C64 = vals.iter().sum();
        assert!((sum - trace(&a)).norm() < 1e-10);
    }
}
