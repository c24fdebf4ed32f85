//! Named, party-assigned register layouts and mixed-radix indexing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the bipartition a register belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// A single register: a name, a dimension, and a party tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub dim: usize,
    pub party: Party,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize, party: Party) -> Self {
        Register { name: name.into(), dim, party }
    }
}

/// An ordered list of registers defining a mixed-radix basis.
///
/// Basis ordering convention: the leftmost register is the most significant
/// digit. A flat index decomposes as `index = Σ digit_i · stride_i` with
/// `stride_i = Π_{j>i} dim_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl RegisterLayout {
    /// Build a layout. Names must be unique and dimensions positive.
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        for (i, r) in registers.iter().enumerate() {
            if r.dim == 0 {
                return Err(Error::DimensionMismatch {
                    context: "register dimension must be positive",
                    expected: 1,
                    actual: 0,
                });
            }
            if registers[..i].iter().any(|p| p.name == r.name) {
                return Err(Error::RegisterCollision(r.name.clone()));
            }
        }
        let n = registers.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * registers[i + 1].dim;
        }
        let total_dim = registers.iter().map(|r| r.dim).product::<usize>().max(1);
        Ok(RegisterLayout { registers, strides, total_dim })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    /// Number of registers.
    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    /// Product of all register dimensions.
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Position of a register by name.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.name == name)
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn stride(&self, position: usize) -> usize {
        self.strides[position]
    }

    /// Extract one mixed-radix digit of a flat index.
    pub fn digit(&self, index: usize, position: usize) -> usize {
        (index / self.strides[position]) % self.registers[position].dim
    }

    /// Flat index from digits (one per register, in layout order).
    pub fn pack(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.registers.len());
        digits
            .iter()
            .zip(&self.strides)
            .map(|(d, s)| d * s)
            .sum()
    }

    /// All digits of a flat index, in layout order.
    pub fn unpack(&self, index: usize) -> Vec<usize> {
        (0..self.registers.len()).map(|p| self.digit(index, p)).collect()
    }

    /// Concatenate two layouts (this one leftmost / most significant).
    pub fn concat(&self, other: &RegisterLayout) -> Result<RegisterLayout> {
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        RegisterLayout::new(regs)
    }

    /// Positions of the given register names, in layout order.
    /// Errors on unknown names.
    pub fn positions_of(&self, names: &[&str]) -> Result<Vec<usize>> {
        for name in names {
            if self.position(name).is_none() {
                return Err(Error::UnknownRegister((*name).to_string()));
            }
        }
        Ok((0..self.len())
            .filter(|&p| names.contains(&self.registers[p].name.as_str()))
            .collect())
    }

    /// Positions of all registers tagged with `party`, in layout order.
    pub fn party_positions(&self, party: Party) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.registers[p].party == party).collect()
    }

    /// New layout consisting of the registers at `positions`, in that order.
    pub fn sub_layout(&self, positions: &[usize]) -> RegisterLayout {
        let regs = positions.iter().map(|&p| self.registers[p].clone()).collect();
        RegisterLayout::new(regs).expect("sub-layout of a valid layout is valid")
    }

    /// Layout with the registers reordered: new position `i` holds the old
    /// register at `order[i]`. `order` must be a permutation of 0..len.
    pub fn permuted(&self, order: &[usize]) -> Result<RegisterLayout> {
        if order.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "register permutation length",
                expected: self.len(),
                actual: order.len(),
            });
        }
        let mut seen = vec![false; self.len()];
        for &p in order {
            if p >= self.len() || seen[p] {
                return Err(Error::InvalidArgument(format!(
                    "invalid register permutation {order:?}"
                )));
            }
            seen[p] = true;
        }
        Ok(self.sub_layout(order))
    }
}
