//! Unitary realizations of boxes on extended register spaces: a generic
//! isometric dilation for any box, a permutation dilation for the extremal
//! family backed by shared entanglement, and a product dilation built from
//! caller-supplied local operations. `extract_box` inverts all three.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boxes::CorrelationBox;
use crate::error::{Error, Result};
use crate::tensorcore::{
    complete_isometry, Party, Register, RegisterLayout, StateVector, UnitaryOp,
};

/// Which registers of a dilation carry inputs, outputs, and shared ancillas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterRoles {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub ancilla: Vec<String>,
}

/// A unitary realization of a box: applying `u` to |x⟩|y⟩ ⊗ initial_ancilla
/// and reading the output registers in the computational basis reproduces
/// P(a,b|x,y).
#[derive(Clone, Debug)]
pub struct DilationResult {
    u: UnitaryOp,
    initial_ancilla: StateVector,
    roles: RegisterRoles,
}

impl DilationResult {
    pub(crate) fn assemble(
        u: UnitaryOp,
        initial_ancilla: StateVector,
        roles: RegisterRoles,
    ) -> Result<Self> {
        let full = u.layout();
        let n_inputs = roles.inputs.len();
        if full.registers().len() != n_inputs + initial_ancilla.layout().registers().len() {
            return Err(Error::LayoutMismatch(
                "ancilla registers must cover the non-input part of the layout",
            ));
        }
        for (i, reg) in initial_ancilla.layout().registers().iter().enumerate() {
            if full.registers()[n_inputs + i] != *reg {
                return Err(Error::LayoutMismatch(
                    "ancilla layout must match the layout suffix after the inputs",
                ));
            }
        }
        for name in roles.inputs.iter().chain(&roles.outputs).chain(&roles.ancilla) {
            if full.position(name).is_none() {
                return Err(Error::UnknownRegister(name.clone()));
            }
        }
        Ok(DilationResult { u, initial_ancilla, roles })
    }

    pub fn u(&self) -> &UnitaryOp {
        &self.u
    }

    pub fn initial_ancilla(&self) -> &StateVector {
        &self.initial_ancilla
    }

    pub fn roles(&self) -> &RegisterRoles {
        &self.roles
    }

    pub fn layout(&self) -> &RegisterLayout {
        self.u.layout()
    }

    /// Initial state |x⟩_X |y⟩_Y ⊗ initial_ancilla on the full layout.
    pub(crate) fn input_state(&self, x: usize, y: usize) -> Result<StateVector> {
        let full = self.layout();
        let x_reg = full.registers()[0].clone();
        let y_reg = full.registers()[1].clone();
        let xs = StateVector::basis_state(RegisterLayout::new(vec![x_reg])?, &[x])?;
        let ys = StateVector::basis_state(RegisterLayout::new(vec![y_reg])?, &[y])?;
        xs.tensor(&ys)?.tensor(&self.initial_ancilla)
    }
}

fn input_registers(d_x: usize, d_y: usize) -> (Register, Register) {
    (
        Register::new("X", d_x, Party::Alice),
        Register::new("Y", d_y, Party::Bob),
    )
}

/// Dilate an arbitrary box: the isometry V|x,y,0,0⟩ = Σ_ab √P(a,b|x,y)
/// |x,y,a,b⟩ reuses the input registers as the residual space and is
/// completed to a unitary deterministically. No shared ancilla is needed;
/// the output registers start in |0,0⟩.
pub fn dilate_generic(b: &CorrelationBox) -> Result<DilationResult> {
    let (d_a, d_b, d_x, d_y) = (b.d_a(), b.d_b(), b.d_x(), b.d_y());
    let (x_reg, y_reg) = input_registers(d_x, d_y);
    let a_reg = Register::new("A", d_a, Party::Alice);
    let b_reg = Register::new("B", d_b, Party::Bob);
    let layout = RegisterLayout::new(vec![x_reg, y_reg, a_reg.clone(), b_reg.clone()])?;

    let total = layout.total_dim();
    let mut v = Array2::zeros((total, d_x * d_y));
    let mut domain = Vec::with_capacity(d_x * d_y);
    for x in 0..d_x {
        for y in 0..d_y {
            let col = x * d_y + y;
            domain.push(layout.pack(&[x, y, 0, 0]));
            for a in 0..d_a {
                for bb in 0..d_b {
                    let row = layout.pack(&[x, y, a, bb]);
                    v[(row, col)] = Complex64::new(b.prob(a, bb, x, y).sqrt(), 0.0);
                }
            }
        }
    }
    let u = complete_isometry(v.view(), &domain, &layout)?;

    let anc_layout = RegisterLayout::new(vec![a_reg, b_reg])?;
    let initial_ancilla = StateVector::basis_state(anc_layout, &[0, 0])?;
    let roles = RegisterRoles {
        inputs: vec!["X".into(), "Y".into()],
        outputs: vec!["A".into(), "B".into()],
        ancilla: vec![],
    };
    DilationResult::assemble(u, initial_ancilla, roles)
}

/// Dilate the extremal box at dimension d with a shared maximally entangled
/// ancilla pair and a basis permutation: the output registers receive a += s
/// and b += t − xy (mod d), controlled on the inputs and ancillas.
pub fn dilate_pr(d: usize) -> Result<DilationResult> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "dilate_pr requires d >= 2, got {d}"
        )));
    }
    let (x_reg, y_reg) = input_registers(d, d);
    let a_reg = Register::new("A", d, Party::Alice);
    let b_reg = Register::new("B", d, Party::Bob);
    let sa_reg = Register::new("S_A", d, Party::Alice);
    let sb_reg = Register::new("S_B", d, Party::Bob);
    let layout = RegisterLayout::new(vec![
        x_reg,
        y_reg,
        a_reg.clone(),
        b_reg.clone(),
        sa_reg.clone(),
        sb_reg.clone(),
    ])?;

    // digits: [x, y, a0, b0, s, t]
    let u = UnitaryOp::permutation(layout, |from, to| {
        to.copy_from_slice(from);
        let (x, y, a0, b0, s, t) = (from[0], from[1], from[2], from[3], from[4], from[5]);
        to[2] = (a0 + s) % d;
        to[3] = (b0 + t + d * d - (x * y) % d) % d;
    })?;

    let anc_layout = RegisterLayout::new(vec![a_reg, b_reg, sa_reg, sb_reg])?;
    let mut amps = Array1::zeros(anc_layout.total_dim());
    let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for s in 0..d {
        amps[anc_layout.pack(&[0, 0, s, s])] = w;
    }
    let initial_ancilla = StateVector::new(anc_layout, amps)?;
    let roles = RegisterRoles {
        inputs: vec!["X".into(), "Y".into()],
        outputs: vec!["A".into(), "B".into()],
        ancilla: vec!["S_A".into(), "S_B".into()],
    };
    DilationResult::assemble(u, initial_ancilla, roles)
}

fn expect_two_registers(
    layout: &RegisterLayout,
    names: [&str; 2],
    context: &'static str,
) -> Result<()> {
    let regs = layout.registers();
    if regs.len() != 2 || regs[0].name != names[0] || regs[1].name != names[1] {
        return Err(Error::LayoutMismatch(context));
    }
    Ok(())
}

/// Dilate with explicit product structure: a shared state on S_A ⊗ S_B, one
/// operation on A ⊗ S_A per Alice setting, one on B ⊗ S_B per Bob setting.
/// The result is U = U_Alice ⊗ U_Bob across the party cut, with each factor
/// controlled on the local input register.
pub fn dilate_local(
    shared: &StateVector,
    alice_ops: &[UnitaryOp],
    bob_ops: &[UnitaryOp],
) -> Result<DilationResult> {
    expect_two_registers(
        shared.layout(),
        ["S_A", "S_B"],
        "shared state must live on registers S_A, S_B",
    )?;
    if alice_ops.is_empty() || bob_ops.is_empty() {
        return Err(Error::InvalidArgument(
            "dilate_local requires at least one operation per party".into(),
        ));
    }
    for op in alice_ops {
        expect_two_registers(
            op.layout(),
            ["A", "S_A"],
            "Alice operations must live on registers A, S_A",
        )?;
        if op.layout() != alice_ops[0].layout() {
            return Err(Error::LayoutMismatch("Alice operations must share one layout"));
        }
    }
    for op in bob_ops {
        expect_two_registers(
            op.layout(),
            ["B", "S_B"],
            "Bob operations must live on registers B, S_B",
        )?;
        if op.layout() != bob_ops[0].layout() {
            return Err(Error::LayoutMismatch("Bob operations must share one layout"));
        }
    }
    let a_reg = alice_ops[0].layout().registers()[0].clone();
    let sa_reg = alice_ops[0].layout().registers()[1].clone();
    let b_reg = bob_ops[0].layout().registers()[0].clone();
    let sb_reg = bob_ops[0].layout().registers()[1].clone();
    if sa_reg.dim != shared.layout().registers()[0].dim
        || sb_reg.dim != shared.layout().registers()[1].dim
    {
        return Err(Error::DimensionMismatch {
            context: "shared state dims must match the S registers of the local ops",
            expected: sa_reg.dim * sb_reg.dim,
            actual: shared.layout().total_dim(),
        });
    }

    let d_x = alice_ops.len();
    let d_y = bob_ops.len();
    let (x_reg, y_reg) = input_registers(d_x, d_y);
    let layout = RegisterLayout::new(vec![
        x_reg.clone(),
        y_reg.clone(),
        a_reg.clone(),
        b_reg.clone(),
        sa_reg.clone(),
        sb_reg.clone(),
    ])?;

    let ctrl_a = controlled_on_first(&x_reg, alice_ops)?;
    let ctrl_b = controlled_on_first(&y_reg, bob_ops)?;
    let u = ctrl_a.embed(&layout)?.compose(&ctrl_b.embed(&layout)?)?;

    let anc_prefix = RegisterLayout::new(vec![a_reg, b_reg])?;
    let initial_ancilla =
        StateVector::basis_state(anc_prefix, &[0, 0])?.tensor(shared)?;
    let roles = RegisterRoles {
        inputs: vec!["X".into(), "Y".into()],
        outputs: vec!["A".into(), "B".into()],
        ancilla: vec!["S_A".into(), "S_B".into()],
    };
    DilationResult::assemble(u, initial_ancilla, roles)
}

/// Block-diagonal operator Σ_c |c⟩⟨c| ⊗ ops[c] on [control, ops' registers].
fn controlled_on_first(control: &Register, ops: &[UnitaryOp]) -> Result<UnitaryOp> {
    let inner = ops[0].layout().clone();
    let mut regs = vec![control.clone()];
    regs.extend(inner.registers().iter().cloned());
    let layout = RegisterLayout::new(regs)?;
    let m = inner.total_dim();
    let mut matrix = Array2::zeros((layout.total_dim(), layout.total_dim()));
    for (c, op) in ops.iter().enumerate() {
        let block = op.matrix();
        for i in 0..m {
            for j in 0..m {
                matrix[(c * m + i, c * m + j)] = block[(i, j)];
            }
        }
    }
    UnitaryOp::new(layout, matrix)
}

/// A coherent local measurement on [output, system]: rotate the system by
/// `rotation`, then add its computational value into the output register
/// (mod the output dimension). The result is unitary for any dimensions.
pub fn coherent_measurement(output: Register, rotation: &UnitaryOp) -> Result<UnitaryOp> {
    let sys_regs = rotation.layout().registers();
    if sys_regs.len() != 1 {
        return Err(Error::LayoutMismatch(
            "coherent_measurement takes a rotation on a single register",
        ));
    }
    let system = sys_regs[0].clone();
    if system.name == output.name {
        return Err(Error::RegisterCollision(output.name));
    }
    let d_o = output.dim;
    let d_s = system.dim;
    let layout = RegisterLayout::new(vec![output, system])?;
    let mut matrix = Array2::zeros((d_o * d_s, d_o * d_s));
    let r = rotation.matrix();
    // copy ∘ (I ⊗ rotation): column (o,s) has amplitude R[s',s] at row ((o+s') mod d_o, s')
    for o in 0..d_o {
        for s in 0..d_s {
            let col = o * d_s + s;
            for sp in 0..d_s {
                let row = ((o + sp) % d_o) * d_s + sp;
                matrix[(row, col)] += r[(sp, s)];
            }
        }
    }
    UnitaryOp::new(layout, matrix)
}

/// Read the box back out of a dilation: for each input pair, apply U to the
/// prepared initial state and accumulate squared amplitudes by the output
/// registers' digits.
pub fn extract_box(dr: &DilationResult) -> Result<CorrelationBox> {
    let layout = dr.layout();
    let d_x = layout.registers()[0].dim;
    let d_y = layout.registers()[1].dim;
    let a_pos = layout
        .position(&dr.roles.outputs[0])
        .ok_or_else(|| Error::UnknownRegister(dr.roles.outputs[0].clone()))?;
    let b_pos = layout
        .position(&dr.roles.outputs[1])
        .ok_or_else(|| Error::UnknownRegister(dr.roles.outputs[1].clone()))?;
    let d_a = layout.registers()[a_pos].dim;
    let d_b = layout.registers()[b_pos].dim;

    let mut probs = ndarray::Array4::zeros((d_a, d_b, d_x, d_y));
    for x in 0..d_x {
        for y in 0..d_y {
            let out = dr.u.apply(&dr.input_state(x, y)?)?;
            for (idx, amp) in out.amplitudes().iter().enumerate() {
                let n2 = amp.norm_sqr();
                if n2 == 0.0 {
                    continue;
                }
                let a = layout.digit(idx, a_pos);
                let bb = layout.digit(idx, b_pos);
                probs[(a, bb, x, y)] += n2;
            }
        }
    }
    CorrelationBox::new(probs)
}

/// Wire format for dilations: registers, row-major complex matrix, roles,
/// and the initial ancilla amplitudes (on the layout suffix after the inputs).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DilationJson {
    pub layout: Vec<Register>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub roles: RegisterRoles,
    pub initial_ancilla: Vec<[f64; 2]>,
}

impl From<&DilationResult> for DilationJson {
    fn from(dr: &DilationResult) -> Self {
        let m = dr.u.matrix();
        let n = m.nrows();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        let initial_ancilla = dr
            .initial_ancilla
            .amplitudes()
            .iter()
            .map(|a| [a.re, a.im])
            .collect();
        DilationJson {
            layout: dr.layout().registers().to_vec(),
            matrix,
            roles: dr.roles.clone(),
            initial_ancilla,
        }
    }
}
