//! State vectors over register layouts.

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensorcore::density::DensityMatrix;
use crate::tensorcore::layout::{Register, RegisterLayout};
use crate::tensorcore::NORM_TOL;

/// A normalized pure state over the mixed-radix basis of a layout.
#[derive(Clone, Debug)]
pub struct StateVector {
    layout: RegisterLayout,
    amplitudes: Array1<Complex64>,
}

impl StateVector {
    /// Build a state, checking length and normalization (tolerance 1e-12).
    pub fn new(layout: RegisterLayout, amplitudes: Array1<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "state vector length",
                expected: layout.total_dim(),
                actual: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector { layout, amplitudes })
    }

    /// Internal constructor for states produced by norm-preserving operations.
    pub(crate) fn new_unchecked(layout: RegisterLayout, amplitudes: Array1<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), layout.total_dim());
        StateVector { layout, amplitudes }
    }

    /// Computational basis state |digits⟩.
    pub fn basis_state(layout: RegisterLayout, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                context: "basis state digit count",
                expected: layout.len(),
                actual: digits.len(),
            });
        }
        for (i, (&d, r)) in digits.iter().zip(layout.registers()).enumerate() {
            if d >= r.dim {
                return Err(Error::InvalidArgument(format!(
                    "basis digit {d} out of range for register {i} of dimension {}",
                    r.dim
                )));
            }
        }
        let mut amps = Array1::zeros(layout.total_dim());
        let idx = layout.pack(digits);
        amps[idx] = Complex64::ONE;
        Ok(StateVector { layout, amplitudes: amps })
    }

    /// Uniform superposition (1/√d)Σ|i⟩ on a single fresh register.
    pub fn uniform(register: Register) -> Self {
        let d = register.dim;
        let layout = RegisterLayout::new(vec![register]).expect("single register");
        let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        StateVector { layout, amplitudes: Array1::from_elem(d, amp) }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("inner product"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product; `self`'s registers become the most significant block.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&other.layout)?;
        let nb = other.amplitudes.len();
        let mut amps = Array1::zeros(layout.total_dim());
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a == Complex64::ZERO {
                continue;
            }
            for (j, b) in other.amplitudes.iter().enumerate() {
                amps[i * nb + j] = a * b;
            }
        }
        Ok(StateVector { layout, amplitudes: amps })
    }

    /// Reorder registers: new position `i` holds old register `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<StateVector> {
        let layout = self.layout.permuted(order)?;
        let n = self.layout.len();
        let old_strides: Vec<usize> = (0..n).map(|p| self.layout.stride(p)).collect();
        let old_dims: Vec<usize> =
            self.layout.registers().iter().map(|r| r.dim).collect();
        // stride in the new layout of each old register
        let mut new_stride_of_old = vec![0usize; n];
        for (new_pos, &old_pos) in order.iter().enumerate() {
            new_stride_of_old[old_pos] = layout.stride(new_pos);
        }
        let mut amps = Array1::zeros(self.amplitudes.len());
        for (old_idx, amp) in self.amplitudes.iter().enumerate() {
            if *amp == Complex64::ZERO {
                continue;
            }
            let mut new_idx = 0usize;
            for p in 0..n {
                let digit = (old_idx / old_strides[p]) % old_dims[p];
                new_idx += digit * new_stride_of_old[p];
            }
            amps[new_idx] = *amp;
        }
        Ok(StateVector { layout, amplitudes: amps })
    }

    /// Reduced density matrix on the named registers (traced over the rest).
    /// The kept registers appear in layout order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let keep_positions = self.layout.positions_of(keep)?;
        let rest: Vec<usize> =
            (0..self.layout.len()).filter(|p| !keep_positions.contains(p)).collect();
        let order: Vec<usize> = keep_positions.iter().chain(rest.iter()).copied().collect();
        let permuted = if order.iter().enumerate().all(|(i, &p)| i == p) {
            None
        } else {
            Some(self.permute(&order)?)
        };
        let s = permuted.as_ref().unwrap_or(self);
        let keep_layout = self.layout.sub_layout(&keep_positions);
        let k = keep_layout.total_dim();
        let r = s.amplitudes.len() / k;
        // ρ = M M† for the (k × r) reshape of the amplitudes
        let m = s
            .amplitudes
            .view()
            .into_shape_with_order((k, r))
            .expect("reshape of contiguous amplitudes");
        let rho = crate::linalg::matmul(m, crate::linalg::adjoint(m).view());
        Ok(DensityMatrix::new_hermitized_unchecked(keep_layout, rho))
    }
}
