//! The coherent reveal chain on a dilation: copy inputs aside, run U, apply
//! the output-difference phase, run U and the copies backwards, then read
//! Bob's input register in the Fourier basis. Quantifies what the chain
//! transmits (mutual information), how much entanglement it creates across
//! the party cut, and whether a unitary is a product via its Choi state.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::dilation::DilationResult;
use crate::error::{Error, Result};
use crate::linalg;
use crate::linalg::neumaier_sum;
use crate::tensorcore::{fourier_matrix, Register, RegisterLayout, StateVector, UnitaryOp};

/// Outcome of one reveal-protocol simulation.
#[derive(Clone, Debug, Serialize)]
pub struct ProtocolTranscript {
    pub d: usize,
    /// P(z|x) indexed (z, x); every column is a distribution.
    pub p_z_given_x: Vec<Vec<f64>>,
    pub capacity_bits: f64,
    pub entanglement_before_ebits: f64,
    pub entanglement_after_ebits: f64,
    pub with_copy: bool,
}

/// Alice's input preparation for the entanglement accounting run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AliceInput {
    Basis(usize),
    Superposed,
}

/// Rank-one projectors onto the Fourier basis of a d-dimensional register.
#[derive(Clone, Debug)]
pub struct FourierMeasurement {
    d: usize,
    /// Column z holds the basis vector |z̃⟩ = (1/√d) Σ_y e^{i2πzy/d}|y⟩.
    columns: Array2<Complex64>,
}

impl FourierMeasurement {
    pub fn new(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidArgument("measurement needs d >= 1".into()));
        }
        let columns = fourier_matrix(d).matrix().clone();
        Ok(FourierMeasurement { d, columns })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Π_z = |z̃⟩⟨z̃| as a dense matrix.
    pub fn projector(&self, z: usize) -> Array2<Complex64> {
        let mut p = Array2::zeros((self.d, self.d));
        for i in 0..self.d {
            for j in 0..self.d {
                p[(i, j)] = self.columns[(i, z)] * self.columns[(j, z)].conj();
            }
        }
        p
    }

    pub fn projectors(&self) -> Vec<Array2<Complex64>> {
        (0..self.d).map(|z| self.projector(z)).collect()
    }

    /// Exact outcome distribution from measuring `register` of `state`:
    /// p(z) = Σ_rest |⟨z̃|ψ⟩|², never sampled.
    pub fn measure(&self, state: &StateVector, register: &str) -> Result<Vec<f64>> {
        let layout = state.layout();
        let pos = layout
            .position(register)
            .ok_or_else(|| Error::UnknownRegister(register.into()))?;
        if layout.registers()[pos].dim != self.d {
            return Err(Error::DimensionMismatch {
                context: "measured register dimension",
                expected: self.d,
                actual: layout.registers()[pos].dim,
            });
        }
        let stride = layout.stride(pos);
        let total = layout.total_dim();
        let block = stride * self.d;
        let amps = state.amplitudes();
        let mut probs = vec![0.0f64; self.d];
        // ⟨z̃|ψ⟩ restricted to each assignment of the other registers
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                for (z, p) in probs.iter_mut().enumerate() {
                    let mut overlap = Complex64::ZERO;
                    for y in 0..self.d {
                        overlap +=
                            self.columns[(y, z)].conj() * amps[outer + y * stride + inner];
                    }
                    *p += overlap.norm_sqr();
                }
            }
        }
        Ok(probs)
    }
}

/// The diagonal phase e^{i2π(a−b)/d} on the output registers, identity
/// elsewhere. A product of single-register phases across the party cut.
pub fn phase_op(dr: &DilationResult) -> Result<UnitaryOp> {
    let layout = dr.layout();
    let a_name = &dr.roles().outputs[0];
    let b_name = &dr.roles().outputs[1];
    let a_pos = layout
        .position(a_name)
        .ok_or_else(|| Error::UnknownRegister(a_name.clone()))?;
    let b_pos = layout
        .position(b_name)
        .ok_or_else(|| Error::UnknownRegister(b_name.clone()))?;
    let d = layout.registers()[a_pos].dim;
    if layout.registers()[b_pos].dim != d {
        return Err(Error::DimensionMismatch {
            context: "phase_op requires equal output dimensions",
            expected: d,
            actual: layout.registers()[b_pos].dim,
        });
    }
    let total = layout.total_dim();
    let mut matrix = Array2::zeros((total, total));
    for idx in 0..total {
        let a = layout.digit(idx, a_pos);
        let b = layout.digit(idx, b_pos);
        let angle = TAU * (a as f64 - b as f64) / d as f64;
        matrix[(idx, idx)] = Complex64::from_polar(1.0, angle);
    }
    UnitaryOp::new(layout.clone(), matrix)
}

fn copy_register_names(dr: &DilationResult) -> (String, String) {
    let x = &dr.layout().registers()[0];
    let y = &dr.layout().registers()[1];
    (format!("{}_c", x.name), format!("{}_c", y.name))
}

/// Modular-addition copy of both input registers into fresh copy registers
/// X_c (Alice) and Y_c (Bob): |x,y,u,v⟩ → |x,y,u+x,v+y⟩ in the computational
/// basis. Perfect copying only there; the inverse is the adjoint.
pub fn copy_op(dr: &DilationResult) -> Result<UnitaryOp> {
    let x_reg = dr.layout().registers()[0].clone();
    let y_reg = dr.layout().registers()[1].clone();
    let (xc_name, yc_name) = copy_register_names(dr);
    let xc = Register::new(xc_name, x_reg.dim, x_reg.party);
    let yc = Register::new(yc_name, y_reg.dim, y_reg.party);
    let d_x = x_reg.dim;
    let d_y = y_reg.dim;
    let layout = RegisterLayout::new(vec![x_reg, y_reg, xc, yc])?;
    UnitaryOp::permutation(layout, move |from, to| {
        to.copy_from_slice(from);
        to[2] = (from[2] + from[0]) % d_x;
        to[3] = (from[3] + from[1]) % d_y;
    })
}

/// Full state of one chain run, before and after.
struct ChainRun {
    before: StateVector,
    after: StateVector,
}

/// Run the chain copy† ∘ U† ∘ phase ∘ U ∘ copy (or the no-copy variant)
/// on X prepared in `alice`, Y in the uniform superposition, the ancilla in
/// its initial state, and copy registers in |0,0⟩.
fn run_chain(dr: &DilationResult, alice: AliceInput, with_copy: bool) -> Result<ChainRun> {
    let layout = dr.layout();
    let x_reg = layout.registers()[0].clone();
    let y_reg = layout.registers()[1].clone();

    let x_state = match alice {
        AliceInput::Basis(x) => {
            if x >= x_reg.dim {
                return Err(Error::InvalidArgument(format!(
                    "Alice input {x} out of range for dimension {}",
                    x_reg.dim
                )));
            }
            StateVector::basis_state(RegisterLayout::new(vec![x_reg])?, &[x])?
        }
        AliceInput::Superposed => StateVector::uniform(x_reg),
    };
    let y_state = StateVector::uniform(y_reg);
    let mut before = x_state.tensor(&y_state)?.tensor(dr.initial_ancilla())?;

    let u = dr.u();
    let phase = phase_op(dr)?;
    let after = if with_copy {
        let copy = copy_op(dr)?;
        let copies = RegisterLayout::new(vec![
            copy.layout().registers()[2].clone(),
            copy.layout().registers()[3].clone(),
        ])?;
        before = before.tensor(&StateVector::basis_state(copies, &[0, 0])?)?;
        let s = copy.apply_embedded(&before)?;
        let s = u.apply_embedded(&s)?;
        let s = phase.apply_embedded(&s)?;
        let s = u.adjoint().apply_embedded(&s)?;
        copy.adjoint().apply_embedded(&s)?
    } else {
        let s = u.apply_embedded(&before)?;
        let s = phase.apply_embedded(&s)?;
        u.adjoint().apply_embedded(&s)?
    };
    Ok(ChainRun { before, after })
}

/// Entropy across the Alice|Bob cut of a pure state, using every register's
/// party tag (copies and ancillas included). Computed from the Schmidt
/// spectrum: singular values of the amplitude matrix over the cut, which
/// stays reliable on the large, highly degenerate spectra that Choi states
/// of structured unitaries produce.
fn party_cut_entropy(state: &StateVector) -> Result<f64> {
    let layout = state.layout();
    let alice = layout.party_positions(crate::tensorcore::Party::Alice);
    let bob = layout.party_positions(crate::tensorcore::Party::Bob);
    if alice.is_empty() || bob.is_empty() {
        return Err(Error::LayoutMismatch(
            "party cut needs at least one register per party",
        ));
    }
    let order: Vec<usize> = alice.iter().chain(bob.iter()).copied().collect();
    let permuted = state.permute(&order)?;
    let dim_b: usize = bob.iter().map(|&p| layout.registers()[p].dim).product();
    let dim_a = state.amplitudes().len() / dim_b;
    let amps = permuted.amplitudes();
    let m = Array2::from_shape_fn((dim_a, dim_b), |(i, j)| amps[i * dim_b + j]);
    let h = -neumaier_sum(linalg::singular_values(m.view())?.into_iter().map(|s| {
        let p = s * s;
        if p > 0.0 {
            p * p.log2()
        } else {
            0.0
        }
    }));
    Ok(h.max(0.0))
}

/// Mutual information I(X;Z) in bits for a uniform prior on x, clamped to
/// [0, log₂ d] to absorb rounding at the endpoints.
fn mutual_information_bits(p_z_given_x: &[Vec<f64>], d: usize) -> f64 {
    let plogp = |p: f64| if p > 0.0 { p * p.log2() } else { 0.0 };
    let p_x = 1.0 / d as f64;
    let p_z: Vec<f64> = (0..d)
        .map(|z| neumaier_sum((0..d).map(|x| p_x * p_z_given_x[z][x])))
        .collect();
    let h_z = -neumaier_sum(p_z.iter().map(|&p| plogp(p)));
    let h_z_given_x = -neumaier_sum(
        (0..d).flat_map(|z| (0..d).map(move |x| p_x * plogp(p_z_given_x[z][x]))),
    );
    (h_z - h_z_given_x).clamp(0.0, (d as f64).log2())
}

/// Simulate the reveal protocol. P(z|x) is tabulated for every basis input x;
/// the entanglement columns are taken from the run with Alice prepared as
/// `alice_input` (a basis state, or the uniform superposition).
pub fn reveal_protocol(
    dr: &DilationResult,
    alice_input: AliceInput,
    with_copy: bool,
) -> Result<ProtocolTranscript> {
    let layout = dr.layout();
    let d = layout.registers()[0].dim;
    for reg in &layout.registers()[..2] {
        if reg.dim != d {
            return Err(Error::DimensionMismatch {
                context: "reveal protocol requires equal input dimensions",
                expected: d,
                actual: reg.dim,
            });
        }
    }
    let y_name = layout.registers()[1].name.clone();
    let meas = FourierMeasurement::new(d)?;

    let mut p_z_given_x = vec![vec![0.0f64; d]; d];
    for x in 0..d {
        let run = run_chain(dr, AliceInput::Basis(x), with_copy)?;
        let probs = meas.measure(&run.after, &y_name)?;
        for z in 0..d {
            p_z_given_x[z][x] = probs[z];
        }
    }
    let capacity_bits = mutual_information_bits(&p_z_given_x, d);

    let ent_run = run_chain(dr, alice_input, with_copy)?;
    let entanglement_before_ebits = party_cut_entropy(&ent_run.before)?;
    let entanglement_after_ebits = party_cut_entropy(&ent_run.after)?;

    Ok(ProtocolTranscript {
        d,
        p_z_given_x,
        capacity_bits,
        entanglement_before_ebits,
        entanglement_after_ebits,
        with_copy,
    })
}

/// Entanglement accounting with both inputs in uniform superposition.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EntanglementReport {
    pub before_ebits: f64,
    pub after_ebits: f64,
}

pub fn entanglement_generated(dr: &DilationResult) -> Result<EntanglementReport> {
    let run = run_chain(dr, AliceInput::Superposed, true)?;
    Ok(EntanglementReport {
        before_ebits: party_cut_entropy(&run.before)?,
        after_ebits: party_cut_entropy(&run.after)?,
    })
}

/// Verdict of the Choi-state product test.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProductTest {
    pub is_product: bool,
    pub choi_entanglement_ebits: f64,
}

/// Entropy threshold below which a Choi state counts as a product.
pub const PRODUCT_TEST_TOL: f64 = 1e-9;

/// Pair every register of `u` with a same-party reference register in a
/// maximally entangled state, apply u ⊗ I, and measure entanglement across
/// the party cut. Zero exactly when u is a product of Alice-side and
/// Bob-side factors.
pub fn product_test(u: &UnitaryOp) -> Result<ProductTest> {
    let layout = u.layout();
    let mut refs = Vec::with_capacity(layout.len());
    for reg in layout.registers() {
        refs.push(Register::new(format!("{}_ref", reg.name), reg.dim, reg.party));
    }
    let choi_layout = layout.concat(&RegisterLayout::new(refs)?)?;
    let total = layout.total_dim();
    let norm = 1.0 / (total as f64).sqrt();
    let mut amps = Array1::zeros(total * total);
    for k in 0..total {
        amps[k * total + k] = Complex64::new(norm, 0.0);
    }
    let probe = StateVector::new(choi_layout, amps)?;
    let out = u.apply_embedded(&probe)?;
    let ebits = party_cut_entropy(&out)?;
    Ok(ProductTest {
        is_product: ebits <= PRODUCT_TEST_TOL,
        choi_entanglement_ebits: ebits,
    })
}
