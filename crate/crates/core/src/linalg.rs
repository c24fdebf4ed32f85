//! Dense complex linear algebra helpers on top of `ndarray` and `faer`.
//!
//! `ndarray` is the in-crate representation; `faer` supplies factorizations
//! (Hermitian eigendecomposition, QR, SVD) and fast matrix products for the
//! larger dimensions that show up in protocol simulations.

use faer::Mat;
use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dimension above which matrix products are routed through faer.
const FAER_MATMUL_CUTOFF: usize = 48;

pub(crate) fn to_faer(a: ArrayView2<'_, Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub(crate) fn from_faer(m: &Mat<Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Matrix product, delegating to faer above the cutoff.
pub(crate) fn matmul(a: ArrayView2<'_, Complex64>, b: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
    debug_assert_eq!(a.ncols(), b.nrows());
    if a.nrows().max(a.ncols()).max(b.ncols()) >= FAER_MATMUL_CUTOFF {
        let m = to_faer(a) * to_faer(b);
        from_faer(&m)
    } else {
        let (n, k, p) = (a.nrows(), a.ncols(), b.ncols());
        let mut out = Array2::zeros((n, p));
        for i in 0..n {
            for l in 0..k {
                let ail = a[(i, l)];
                if ail == Complex64::ZERO {
                    continue;
                }
                for j in 0..p {
                    out[(i, j)] += ail * b[(l, j)];
                }
            }
        }
        out
    }
}

/// `a† · a` convenience used by unitarity and orthonormality checks.
pub(crate) fn gram(a: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
    let adj = adjoint(a);
    matmul(adj.view(), a)
}

pub(crate) fn adjoint(a: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
    let mut out = Array2::zeros((a.ncols(), a.nrows()));
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

/// Max-entry deviation of `g` from the identity.
pub(crate) fn max_deviation_from_identity(g: ArrayView2<'_, Complex64>) -> f64 {
    let mut max = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { Complex64::ONE } else { Complex64::ZERO };
            max = max.max((g[(i, j)] - target).norm());
        }
    }
    max
}

pub(crate) fn max_hermiticity_deviation(a: ArrayView2<'_, Complex64>) -> f64 {
    let mut max = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            max = max.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    max
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(a: ArrayView2<'_, Complex64>) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(a)?.0)
}

/// Full Hermitian eigendecomposition: eigenvalues ascending plus the matrix
/// of eigenvectors as columns in the same order.
pub(crate) fn hermitian_eigen(
    a: ArrayView2<'_, Complex64>,
) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let m = to_faer(a);
    let eig = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigendecomposition failed: {e:?}")))?;
    let s = eig.S().column_vector().to_owned();
    let u = eig.U();
    let n = a.nrows();
    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (s[i].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("eigenvalue NaN"));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| u[(i, pairs[j].1)]);
    Ok((values, vectors))
}

/// Top eigenpair of a Hermitian matrix, with the eigenvector's phase fixed so
/// its largest-magnitude entry is real positive (deterministic output).
pub(crate) fn top_eigenpair(a: ArrayView2<'_, Complex64>) -> Result<(f64, Array1<Complex64>)> {
    let (values, vectors) = hermitian_eigen(a)?;
    let n = values.len();
    let mut vec = vectors.column(n - 1).to_owned();
    fix_phase(&mut vec);
    Ok((values[n - 1], vec))
}

/// Rotate a vector by a global phase so its largest-magnitude entry is real positive.
pub(crate) fn fix_phase(v: &mut Array1<Complex64>) {
    let mut best = 0usize;
    let mut best_norm = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_norm + 1e-15 {
            best_norm = z.norm();
            best = i;
        }
    }
    if best_norm > 0.0 {
        let phase = v[best] / best_norm;
        v.mapv_inplace(|z| z * phase.conj());
    }
}

/// Singular values of `a`, descending. More robust than eigendecomposing
/// a†a or the matching Gram matrix when the spectrum is highly degenerate.
pub(crate) fn singular_values(a: ArrayView2<'_, Complex64>) -> Result<Vec<f64>> {
    let m = to_faer(a);
    let svd = m
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector().to_owned();
    Ok((0..s.nrows()).map(|i| s[i].re).collect())
}

/// Unitary polar factor of `a` (the U of a = U·P), via SVD.
pub(crate) fn polar_unitary(a: ArrayView2<'_, Complex64>) -> Result<Array2<Complex64>> {
    let m = to_faer(a);
    let svd = m
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let u = svd.U() * svd.V().adjoint();
    Ok(from_faer(&u))
}

/// Haar-distributed random unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phase fix.
pub(crate) fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> Array2<Complex64> {
    let g = Mat::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R().to_owned();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d.conj() / d.norm() } else { Complex64::ONE };
        q[(i, j)] * phase
    })
}

/// Random state vector: normalized complex Gaussian amplitudes.
#[cfg(test)]
pub(crate) fn random_state<R: Rng>(n: usize, rng: &mut R) -> Array1<Complex64> {
    let mut v = Array1::from_shape_fn(n, |_| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / norm);
    v
}

/// Neumaier compensated summation: correctly rounded for the short sums of
/// equal-magnitude terms this crate relies on for exact rational values.
pub(crate) fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let next = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - next) + t;
        } else {
            comp += (t - next) + sum;
        }
        sum = next;
    }
    sum + comp
}
