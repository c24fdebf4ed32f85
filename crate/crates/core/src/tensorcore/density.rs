//! Density matrices and von Neumann entropy.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensorcore::layout::RegisterLayout;
use crate::tensorcore::state::StateVector;
use crate::tensorcore::{HERMITICITY_TOL, PSD_TOL, TRACE_TOL};

/// A Hermitian, positive semidefinite, unit-trace operator on a layout.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    matrix: Array2<Complex64>,
}

impl DensityMatrix {
    /// Build a density matrix with full validation: Hermiticity within 1e-10,
    /// minimum eigenvalue ≥ −1e-10, trace within 1e-10 of one.
    pub fn new(layout: RegisterLayout, matrix: Array2<Complex64>) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "density matrix size",
                expected: n,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        let herm = linalg::max_hermiticity_deviation(matrix.view());
        if herm > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_deviation: herm });
        }
        let trace: Complex64 = (0..n).map(|i| matrix[(i, i)]).sum();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        let eigs = linalg::hermitian_eigenvalues(matrix.view())?;
        if let Some(&min) = eigs.first() {
            if min < -PSD_TOL {
                return Err(Error::NotPositive { min_eigenvalue: min });
            }
        }
        Ok(DensityMatrix { layout, matrix })
    }

    /// Internal constructor for matrices PSD by construction (e.g. M·M† from
    /// a partial trace). Symmetrizes to scrub rounding noise.
    pub(crate) fn new_hermitized_unchecked(
        layout: RegisterLayout,
        matrix: Array2<Complex64>,
    ) -> Self {
        let n = matrix.nrows();
        let mut m = matrix;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        }
        DensityMatrix { layout, matrix: m }
    }

    /// |s⟩⟨s| of a pure state.
    pub fn from_state(s: &StateVector) -> Self {
        let amps = s.amplitudes();
        let n = amps.len();
        let matrix =
            Array2::from_shape_fn((n, n), |(i, j)| amps[i] * amps[j].conj());
        DensityMatrix { layout: s.layout().clone(), matrix }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// tr ρ², equal to 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                sum += (self.matrix[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        sum
    }

    /// Reduced density matrix on the named registers, in layout order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let keep_positions = self.layout.positions_of(keep)?;
        let rest: Vec<usize> =
            (0..self.layout.len()).filter(|p| !keep_positions.contains(p)).collect();
        let keep_layout = self.layout.sub_layout(&keep_positions);
        let rest_layout = self.layout.sub_layout(&rest);
        let k = keep_layout.total_dim();
        let r = rest_layout.total_dim();
        // flat index of (keep-digits, rest-digits) in the original layout
        let flat = |ki: usize, ri: usize| -> usize {
            let mut idx = 0usize;
            for (pos_in_keep, &p) in keep_positions.iter().enumerate() {
                idx += keep_layout.digit(ki, pos_in_keep) * self.layout.stride(p);
            }
            for (pos_in_rest, &p) in rest.iter().enumerate() {
                idx += rest_layout.digit(ri, pos_in_rest) * self.layout.stride(p);
            }
            idx
        };
        let mut out = Array2::zeros((k, k));
        for ki in 0..k {
            for kj in 0..k {
                let mut sum = Complex64::ZERO;
                for ri in 0..r {
                    sum += self.matrix[(flat(ki, ri), flat(kj, ri))];
                }
                out[(ki, kj)] = sum;
            }
        }
        Ok(DensityMatrix::new_hermitized_unchecked(keep_layout, out))
    }

    /// Von Neumann entropy in bits: −Σ λ log₂ λ with 0·log 0 = 0.
    /// Eigenvalues are clamped to [0, 1] after the PSD tolerance check.
    pub fn entropy_bits(&self) -> Result<f64> {
        let eigs = linalg::hermitian_eigenvalues(self.matrix.view())?;
        if let Some(&min) = eigs.first() {
            if min < -PSD_TOL {
                return Err(Error::NotPositive { min_eigenvalue: min });
            }
        }
        let mut h = 0.0f64;
        for lambda in eigs {
            let l = lambda.clamp(0.0, 1.0);
            if l > 0.0 {
                h -= l * l.log2();
            }
        }
        Ok(h)
    }
}
