//! Unitary operators over register layouts: construction, embedding,
//! application, Fourier matrices, and isometry completion.

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensorcore::layout::{Party, Register, RegisterLayout};
use crate::tensorcore::state::StateVector;
use crate::tensorcore::{ORTHONORMAL_TOL, UNITARY_TOL};

/// A unitary matrix acting on the registers of a layout.
#[derive(Clone, Debug)]
pub struct UnitaryOp {
    layout: RegisterLayout,
    matrix: Array2<Complex64>,
}

impl UnitaryOp {
    /// Build an operator, checking U†U = I within max-entry tolerance 1e-10.
    pub fn new(layout: RegisterLayout, matrix: Array2<Complex64>) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "unitary matrix size",
                expected: n,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        let dev = linalg::max_deviation_from_identity(linalg::gram(matrix.view()).view());
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { max_deviation: dev });
        }
        Ok(UnitaryOp { layout, matrix })
    }

    /// Internal constructor for operators unitary by construction.
    pub(crate) fn new_unchecked(layout: RegisterLayout, matrix: Array2<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        debug_assert_eq!(matrix.ncols(), layout.total_dim());
        UnitaryOp { layout, matrix }
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let n = layout.total_dim();
        UnitaryOp { layout, matrix: Array2::eye(n) }
    }

    /// Permutation operator from a bijective map on basis digits. The map
    /// receives input digits and writes output digits. Bijectivity is checked.
    pub fn permutation(
        layout: RegisterLayout,
        map: impl Fn(&[usize], &mut [usize]),
    ) -> Result<Self> {
        let n = layout.total_dim();
        let k = layout.len();
        let mut matrix = Array2::zeros((n, n));
        let mut seen = vec![false; n];
        let mut out_digits = vec![0usize; k];
        for col in 0..n {
            let in_digits = layout.unpack(col);
            out_digits.iter_mut().for_each(|d| *d = 0);
            map(&in_digits, &mut out_digits);
            for (p, (&d, r)) in out_digits.iter().zip(layout.registers()).enumerate() {
                if d >= r.dim {
                    return Err(Error::InvalidArgument(format!(
                        "permutation output digit {d} out of range at register {p}"
                    )));
                }
            }
            let row = layout.pack(&out_digits);
            if seen[row] {
                return Err(Error::InvalidArgument(
                    "permutation map is not a bijection".into(),
                ));
            }
            seen[row] = true;
            matrix[(row, col)] = Complex64::ONE;
        }
        Ok(UnitaryOp { layout, matrix })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// Inverse operator U†.
    pub fn adjoint(&self) -> UnitaryOp {
        UnitaryOp {
            layout: self.layout.clone(),
            matrix: linalg::adjoint(self.matrix.view()),
        }
    }

    /// Tensor product; `self`'s registers become the most significant block.
    pub fn tensor(&self, other: &UnitaryOp) -> Result<UnitaryOp> {
        let layout = self.layout.concat(&other.layout)?;
        let (na, nb) = (self.matrix.nrows(), other.matrix.nrows());
        let mut matrix = Array2::zeros((na * nb, na * nb));
        for i in 0..na {
            for j in 0..na {
                let a = self.matrix[(i, j)];
                if a == Complex64::ZERO {
                    continue;
                }
                for k in 0..nb {
                    for l in 0..nb {
                        matrix[(i * nb + k, j * nb + l)] = a * other.matrix[(k, l)];
                    }
                }
            }
        }
        Ok(UnitaryOp { layout, matrix })
    }

    /// Composition `self ∘ earlier` (apply `earlier` first). Layouts must match.
    pub fn compose(&self, earlier: &UnitaryOp) -> Result<UnitaryOp> {
        if self.layout != earlier.layout {
            return Err(Error::LayoutMismatch("unitary composition"));
        }
        Ok(UnitaryOp {
            layout: self.layout.clone(),
            matrix: linalg::matmul(self.matrix.view(), earlier.matrix.view()),
        })
    }

    /// Rebind the same matrix onto a different layout (e.g. rename registers).
    /// Register dimensions must match positionally.
    pub fn on_layout(&self, layout: RegisterLayout) -> Result<UnitaryOp> {
        if layout.len() != self.layout.len() {
            return Err(Error::DimensionMismatch {
                context: "layout rebind register count",
                expected: self.layout.len(),
                actual: layout.len(),
            });
        }
        for (a, b) in self.layout.registers().iter().zip(layout.registers()) {
            if a.dim != b.dim {
                return Err(Error::DimensionMismatch {
                    context: "layout rebind register dimension",
                    expected: a.dim,
                    actual: b.dim,
                });
            }
        }
        Ok(UnitaryOp { layout, matrix: self.matrix.clone() })
    }

    /// Embed into a larger layout as `U ⊗ I` on the remaining registers,
    /// matching this operator's registers by name (dims and parties must agree).
    pub fn embed(&self, target: &RegisterLayout) -> Result<UnitaryOp> {
        let positions = embedding_positions(&self.layout, target)?;
        let sub_dim = self.layout.total_dim();
        let total = target.total_dim();
        let rest: Vec<usize> =
            (0..target.len()).filter(|p| !positions.contains(p)).collect();
        // contribution of each sub-basis index and each rest-basis index to a
        // flat target index
        let sub_contrib: Vec<usize> = (0..sub_dim)
            .map(|s| {
                (0..self.layout.len())
                    .map(|p| self.layout.digit(s, p) * target.stride(positions[p]))
                    .sum()
            })
            .collect();
        let rest_layout = target.sub_layout(&rest);
        let rest_dim = rest_layout.total_dim();
        let rest_contrib: Vec<usize> = (0..rest_dim)
            .map(|r| {
                (0..rest.len())
                    .map(|p| rest_layout.digit(r, p) * target.stride(rest[p]))
                    .sum()
            })
            .collect();
        let mut matrix = Array2::zeros((total, total));
        for i in 0..sub_dim {
            for j in 0..sub_dim {
                let v = self.matrix[(i, j)];
                if v == Complex64::ZERO {
                    continue;
                }
                for &rc in &rest_contrib {
                    matrix[(sub_contrib[i] + rc, sub_contrib[j] + rc)] = v;
                }
            }
        }
        Ok(UnitaryOp { layout: target.clone(), matrix })
    }

    /// Apply to a state on the identical layout.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if *s.layout() != self.layout {
            return Err(Error::LayoutMismatch("unitary application"));
        }
        let n = self.matrix.nrows();
        let amps = s.amplitudes();
        let mut out = Array1::zeros(n);
        if n >= 256 {
            let m = linalg::matmul(
                self.matrix.view(),
                amps.view().into_shape_with_order((n, 1)).expect("column reshape"),
            );
            for i in 0..n {
                out[i] = m[(i, 0)];
            }
        } else {
            for (j, a) in amps.iter().enumerate() {
                if *a == Complex64::ZERO {
                    continue;
                }
                for i in 0..n {
                    out[i] += self.matrix[(i, j)] * a;
                }
            }
        }
        Ok(StateVector::new_unchecked(s.layout().clone(), out))
    }

    /// Apply to a state whose layout contains this operator's registers
    /// (matched by name) plus possibly others, without forming the embedded
    /// matrix: the state is permuted so the target registers lead, reshaped to
    /// a matrix, multiplied, and permuted back.
    pub fn apply_embedded(&self, s: &StateVector) -> Result<StateVector> {
        let positions = embedding_positions(&self.layout, s.layout())?;
        let n = s.layout().len();
        let is_prefix = positions.iter().enumerate().all(|(i, &p)| i == p);
        if is_prefix && s.layout().len() == self.layout.len() {
            return self
                .on_layout(s.layout().clone())
                .and_then(|op| op.apply(s));
        }
        let order: Vec<usize> = positions
            .iter()
            .copied()
            .chain((0..n).filter(|p| !positions.contains(p)))
            .collect();
        let permuted = if is_prefix { None } else { Some(s.permute(&order)?) };
        let work = permuted.as_ref().unwrap_or(s);
        let m = self.layout.total_dim();
        let r = work.amplitudes().len() / m;
        let reshaped = work
            .amplitudes()
            .view()
            .into_shape_with_order((m, r))
            .expect("reshape of contiguous amplitudes");
        let product = linalg::matmul(self.matrix.view(), reshaped);
        let flat = Array1::from_iter(product.iter().copied());
        let out = StateVector::new_unchecked(work.layout().clone(), flat);
        if is_prefix {
            Ok(out)
        } else {
            let mut inverse = vec![0usize; n];
            for (i, &p) in order.iter().enumerate() {
                inverse[p] = i;
            }
            out.permute(&inverse)
        }
    }

    /// Largest entry of |U†U − I|, for diagnostics.
    pub fn unitarity_deviation(&self) -> f64 {
        linalg::max_deviation_from_identity(linalg::gram(self.matrix.view()).view())
    }
}

/// Positions of `sub`'s registers inside `target`, in `sub` order.
/// Registers must match by name, dimension, and party.
fn embedding_positions(sub: &RegisterLayout, target: &RegisterLayout) -> Result<Vec<usize>> {
    sub.registers()
        .iter()
        .map(|r| {
            let p = target
                .position(&r.name)
                .ok_or_else(|| Error::UnknownRegister(r.name.clone()))?;
            if target.registers()[p] != *r {
                return Err(Error::LayoutMismatch("embedding register attributes"));
            }
            Ok(p)
        })
        .collect()
}

/// The d-dimensional Fourier matrix with entry (y,z) = e^{i2πzy/d}/√d, on a
/// single register named "z". Rebind with [`UnitaryOp::on_layout`] to act on a
/// specific register.
pub fn fourier_matrix(d: usize) -> UnitaryOp {
    assert!(d >= 1, "fourier_matrix requires d >= 1");
    let layout = RegisterLayout::new(vec![Register::new("z", d, Party::Bob)])
        .expect("single register");
    let norm = 1.0 / (d as f64).sqrt();
    let matrix = Array2::from_shape_fn((d, d), |(y, z)| {
        let angle = 2.0 * std::f64::consts::PI * (z * y) as f64 / d as f64;
        Complex64::new(angle.cos() * norm, angle.sin() * norm)
    });
    UnitaryOp::new_unchecked(layout, matrix)
}

/// Complete an isometry to a full unitary on `layout`.
///
/// `v` has orthonormal columns (checked within 1e-10); column `j` becomes
/// column `domain[j]` of the result, copied verbatim. The remaining columns
/// are filled deterministically by Gram-Schmidt over the canonical basis in
/// index order, so completions are reproducible across runs and platforms.
pub fn complete_isometry(
    v: ArrayView2<'_, Complex64>,
    domain: &[usize],
    layout: &RegisterLayout,
) -> Result<UnitaryOp> {
    let n = layout.total_dim();
    let k = v.ncols();
    if v.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "isometry row count",
            expected: n,
            actual: v.nrows(),
        });
    }
    if domain.len() != k {
        return Err(Error::DimensionMismatch {
            context: "isometry domain index count",
            expected: k,
            actual: domain.len(),
        });
    }
    if k > n {
        return Err(Error::DimensionMismatch {
            context: "isometry column count",
            expected: n,
            actual: k,
        });
    }
    let mut used = vec![false; n];
    for &d in domain {
        if d >= n || used[d] {
            return Err(Error::InvalidArgument(format!(
                "invalid or repeated domain index {d}"
            )));
        }
        used[d] = true;
    }
    let dev = linalg::max_deviation_from_identity(linalg::gram(v).view());
    if dev > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { max_deviation: dev });
    }

    let mut matrix: Array2<Complex64> = Array2::zeros((n, n));
    let mut placed: Vec<Array1<Complex64>> = Vec::with_capacity(n);
    for (j, &col) in domain.iter().enumerate() {
        let column = v.column(j).to_owned();
        matrix.column_mut(col).assign(&column);
        placed.push(column);
    }
    let free: Vec<usize> = (0..n).filter(|&c| !used[c]).collect();
    let mut candidate = 0usize;
    for &col in &free {
        loop {
            if candidate >= n {
                return Err(Error::Numerical(
                    "isometry completion exhausted the canonical basis".into(),
                ));
            }
            let mut r: Array1<Complex64> = Array1::zeros(n);
            r[candidate] = Complex64::ONE;
            candidate += 1;
            // two Gram-Schmidt passes for numerical stability
            for _ in 0..2 {
                for p in &placed {
                    let overlap: Complex64 =
                        p.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
                    for i in 0..n {
                        r[i] -= overlap * p[i];
                    }
                }
            }
            let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                r.mapv_inplace(|z| z / norm);
                matrix.column_mut(col).assign(&r);
                placed.push(r);
                break;
            }
        }
    }
    UnitaryOp::new(layout.clone(), matrix)
}
