use crate::error::{Error, Result};
use serde::Serialize;

/// A named, contiguous block of qubits. Qubit `offset` holds the least
/// significant bit of the register value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    pub offset: usize,
    pub width: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, offset: usize, width: usize) -> Self {
        Register { name: name.into(), offset, width }
    }

    pub fn mask(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            ((1usize << self.width) - 1) << self.offset
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.width
    }

    /// Absolute index of the register's `i`-th qubit.
    pub fn qubit(&self, i: usize) -> usize {
        debug_assert!(i < self.width);
        self.offset + i
    }

    pub fn end(&self) -> usize {
        self.offset + self.width
    }

    pub fn extract(&self, index: usize) -> u64 {
        ((index & self.mask()) >> self.offset) as u64
    }

    pub fn insert(&self, index: usize, value: u64) -> usize {
        (index & !self.mask()) | ((value as usize) << self.offset)
    }

    pub fn check_value(&self, value: u64) -> Result<()> {
        if self.width < 64 && value >> self.width != 0 {
            return Err(Error::ValueOutOfRange { value, width: self.width });
        }
        Ok(())
    }

    /// The top `m` qubits of this register as a register of its own.
    pub fn prefix(&self, m: usize) -> Result<Register> {
        if m > self.width {
            return Err(Error::RegisterMismatch(format!(
                "prefix of {m} qubits requested from `{}` of width {}",
                self.name, self.width
            )));
        }
        Ok(Register::new(format!("{}.prefix", self.name), self.offset + self.width - m, m))
    }

    /// The bottom `m` qubits of this register.
    pub fn suffix(&self, m: usize) -> Result<Register> {
        if m > self.width {
            return Err(Error::RegisterMismatch(format!(
                "suffix of {m} qubits requested from `{}` of width {}",
                self.name, self.width
            )));
        }
        Ok(Register::new(format!("{}.suffix", self.name), self.offset, m))
    }

    pub fn overlaps(&self, other: &Register) -> bool {
        self.mask() & other.mask() != 0
    }
}

/// Ordered list of registers; the first register occupies the lowest qubits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    width: usize,
}

impl RegisterLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &str, width: usize) -> Result<Register> {
        if self.registers.iter().any(|r| r.name == name) {
            return Err(Error::DuplicateRegister(name.to_string()));
        }
        let reg = Register::new(name, self.width, width);
        self.width += width;
        self.registers.push(reg.clone());
        Ok(reg)
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }
}
