//! Fundamental dynamics: raw and compressed Collatz steps, power-of-two
//! detection, mod-4 classes with their short reductions, and mod-9 form
//! assignment.
//!
//! All arithmetic is checked. 128 bits leaves generous headroom — trajectory
//! peaks for starts below 10^8 stay under 2.2e18 — and anything wider goes
//! through [`crate::wide`].

use crate::error::{Error, Result};
use std::fmt;

/// A positive integer somewhere in a trajectory.
///
/// Invariant: the magnitude is at least 1. Construction via [`Value::new`]
/// rejects zero; every operation in this module preserves positivity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Value(u128);

impl Value {
    pub const ONE: Value = Value(1);

    pub fn new(magnitude: u128) -> Result<Value> {
        if magnitude == 0 {
            return Err(Error::ZeroValue);
        }
        Ok(Value(magnitude))
    }

    pub fn get(self) -> u128 {
        self.0
    }

    pub fn is_even(self) -> bool {
        self.0 & 1 == 0
    }

    /// Internal constructor for results that are positive by construction.
    pub(crate) fn from_raw(magnitude: u128) -> Value {
        debug_assert!(magnitude >= 1);
        Value(magnitude)
    }
}

impl TryFrom<u128> for Value {
    type Error = Error;

    fn try_from(magnitude: u128) -> Result<Value> {
        Value::new(magnitude)
    }
}

impl TryFrom<u64> for Value {
    type Error = Error;

    fn try_from(magnitude: u64) -> Result<Value> {
        Value::new(magnitude as u128)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One of the six residue classes mod 9 a trajectory can terminate in.
///
/// The residues are exactly the units mod 9 (integers in `[1, 8]` coprime
/// to 3), which form the orbit of 2 under multiplication mod 9:
/// a↔8, b↔4, c↔2, d↔1, e↔5, f↔7.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Form {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Form {
    pub const ALL: [Form; 6] = [Form::A, Form::B, Form::C, Form::D, Form::E, Form::F];

    /// Forms of successive powers of two: `2^m` has form
    /// `POWER_OF_TWO_CYCLE[m % 6]`. Doubling multiplies the residue by 2
    /// mod 9, so the cycle walks 1, 2, 4, 8, 7, 5 and closes after six steps.
    pub const POWER_OF_TWO_CYCLE: [Form; 6] =
        [Form::D, Form::C, Form::B, Form::A, Form::F, Form::E];

    pub fn residue(self) -> u8 {
        match self {
            Form::A => 8,
            Form::B => 4,
            Form::C => 2,
            Form::D => 1,
            Form::E => 5,
            Form::F => 7,
        }
    }

    pub fn from_residue(residue: u8) -> Option<Form> {
        match residue {
            8 => Some(Form::A),
            4 => Some(Form::B),
            2 => Some(Form::C),
            1 => Some(Form::D),
            5 => Some(Form::E),
            7 => Some(Form::F),
            _ => None,
        }
    }

    pub fn label(self) -> char {
        match self {
            Form::A => 'a',
            Form::B => 'b',
            Form::C => 'c',
            Form::D => 'd',
            Form::E => 'e',
            Form::F => 'f',
        }
    }

    pub fn from_label(label: char) -> Option<Form> {
        match label.to_ascii_lowercase() {
            'a' => Some(Form::A),
            'b' => Some(Form::B),
            'c' => Some(Form::C),
            'd' => Some(Form::D),
            'e' => Some(Form::E),
            'f' => Some(Form::F),
            _ => None,
        }
    }

    /// Stable index 0..6 in label order, used for table addressing.
    pub fn index(self) -> usize {
        match self {
            Form::A => 0,
            Form::B => 1,
            Form::C => 2,
            Form::D => 3,
            Form::E => 4,
            Form::F => 5,
        }
    }

    pub fn from_index(index: usize) -> Option<Form> {
        Form::ALL.get(index).copied()
    }

    /// Residue class mod 6 of the exponents of the powers of two that carry
    /// this form: d→0, c→1, b→2, a→3, f→4, e→5.
    pub fn exponent_residue(self) -> u8 {
        Form::POWER_OF_TWO_CYCLE
            .iter()
            .position(|&f| f == self)
            .expect("every form appears in the cycle") as u8
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Residue class mod 4: A/B/C/D for residues 1/2/3/0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Mod4Class {
    A,
    B,
    C,
    D,
}

impl fmt::Display for Mod4Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Mod4Class::A => 'A',
            Mod4Class::B => 'B',
            Mod4Class::C => 'C',
            Mod4Class::D => 'D',
        };
        write!(f, "{label}")
    }
}

/// One raw step: 3v+1 for odd v, v/2 for even v.
pub fn collatz_step(v: Value) -> Result<Value> {
    let n = v.get();
    if n & 1 == 0 {
        Ok(Value::from_raw(n >> 1))
    } else {
        let next = n
            .checked_mul(3)
            .and_then(|t| t.checked_add(1))
            .ok_or(Error::Overflow {
                operation: "3v + 1",
                value: n,
            })?;
        Ok(Value::from_raw(next))
    }
}

/// One compressed step: (3v+1)/2 for odd v, v/2 for even v.
///
/// For odd v the raw odd step always lands on an even number, so this is the
/// raw map with the forced halving folded in.
pub fn compressed_step(v: Value) -> Result<Value> {
    let n = v.get();
    if n & 1 == 0 {
        Ok(Value::from_raw(n >> 1))
    } else {
        let next = n
            .checked_mul(3)
            .and_then(|t| t.checked_add(1))
            .ok_or(Error::Overflow {
                operation: "(3v + 1) / 2",
                value: n,
            })?;
        Ok(Value::from_raw(next >> 1))
    }
}

/// `Some(m)` when v = 2^m (single set bit), `None` otherwise.
pub fn power_of_two_exponent(v: Value) -> Option<u64> {
    let n = v.get();
    if n.is_power_of_two() {
        Some(n.trailing_zeros() as u64)
    } else {
        None
    }
}

/// The mod-9 form of v, or `None` exactly when 3 divides v
/// (residues 0, 3, 6 belong to no form).
pub fn form_of(v: Value) -> Option<Form> {
    Form::from_residue((v.get() % 9) as u8)
}

pub fn mod4_class(v: Value) -> Mod4Class {
    match v.get() & 3 {
        1 => Mod4Class::A,
        2 => Mod4Class::B,
        3 => Mod4Class::C,
        _ => Mod4Class::D,
    }
}

/// Collapse the short per-class operation sequence into one closed form.
///
/// With k = (v - offset)/4: class A (4k+1) → 3k+1 via O,E,E; class B (4k+2)
/// → 2k+1 via E; class D (4k+4) → 2k+2 via E; class C (4k+3) → 9k+8 via
/// O,E,O,E. Classes A (for v ≥ 5), B, and D shrink; class C grows.
///
/// v = 1 is the degenerate class-A case (k = 0) and maps to itself.
pub fn mod4_reduce(v: Value) -> Result<Value> {
    let n = v.get();
    match n & 3 {
        1 => {
            let k = (n - 1) >> 2;
            Ok(Value::from_raw(3 * k + 1))
        }
        2 => {
            let k = (n - 2) >> 2;
            Ok(Value::from_raw(2 * k + 1))
        }
        0 => {
            let k = (n - 4) >> 2;
            Ok(Value::from_raw(2 * k + 2))
        }
        _ => {
            let k = (n - 3) >> 2;
            let next = k
                .checked_mul(9)
                .and_then(|t| t.checked_add(8))
                .ok_or(Error::Overflow {
                    operation: "9k + 8",
                    value: n,
                })?;
            Ok(Value::from_raw(next))
        }
    }
}
