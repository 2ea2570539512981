//! Calibration states with known index `p`.
//!
//! * cat `(|0…0⟩ + |1…1⟩)/√2`: `e_max = L`, `p = 2`
//! * W, the symmetric single-excitation state: `e_max < 3`, `p = 1`
//! * domain-wall superposition `Σ_{m=0}^{L} |1…1 0…0⟩/√(L+1)` (first `m`
//!   sites set): `p = 2`
//! * product states: `e_max = 2`

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::statevec::{Gate, Site, StateVector, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceState {
    Cat,
    W,
    DomainWall,
    /// Per-site Bloch angles `(θ, φ)`; empty means a fixed generic choice.
    Product(Vec<(f64, f64)>),
    Basis(usize),
}

impl ReferenceState {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceState::Cat => "cat",
            ReferenceState::W => "W",
            ReferenceState::DomainWall => "dws",
            ReferenceState::Product(_) => "product",
            ReferenceState::Basis(_) => "basis",
        }
    }
}

impl fmt::Display for ReferenceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReferenceState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cat" => Ok(ReferenceState::Cat),
            "w" | "W" => Ok(ReferenceState::W),
            "dws" => Ok(ReferenceState::DomainWall),
            "product" => Ok(ReferenceState::Product(Vec::new())),
            "basis" => Ok(ReferenceState::Basis(0)),
            other => Err(Error::domain(format!("unknown reference state '{other}'"))),
        }
    }
}

fn generic_angles(l: usize) -> Vec<(f64, f64)> {
    (1..=l).map(|i| (0.7 * i as f64, 1.3 * i as f64)).collect()
}

/// Single-qubit state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` as a gate on `|0⟩`.
fn bloch_gate(theta: f64, phi: f64) -> Gate {
    Gate::from_euler(phi, theta, -phi, 0.0)
}

pub fn build_reference(kind: &ReferenceState, l: usize) -> Result<StateVector> {
    let needs_two = matches!(kind, ReferenceState::Cat | ReferenceState::W | ReferenceState::DomainWall);
    if l == 0 || (needs_two && l < 2) {
        return Err(Error::domain(format!("{kind} state needs L >= {}", if needs_two { 2 } else { 1 })));
    }
    if l > crate::statevec::MAX_QUBITS {
        return Err(Error::domain(format!("L = {l} above the register cap")));
    }
    let dim = 1usize << l;
    let one = C64::new(1.0, 0.0);
    match kind {
        ReferenceState::Cat => {
            let mut amps = vec![ZERO; dim];
            amps[0] = one;
            amps[dim - 1] = one;
            StateVector::from_amplitudes(amps)
        }
        ReferenceState::W => {
            let mut amps = vec![ZERO; dim];
            for pos in 0..l {
                amps[1 << pos] = one;
            }
            StateVector::from_amplitudes(amps)
        }
        ReferenceState::DomainWall => {
            let mut amps = vec![ZERO; dim];
            for m in 0..=l {
                amps[((1usize << m) - 1) << (l - m)] = one;
            }
            StateVector::from_amplitudes(amps)
        }
        ReferenceState::Product(angles) => {
            let angles = if angles.is_empty() { generic_angles(l) } else { angles.clone() };
            if angles.len() != l {
                return Err(Error::domain(format!(
                    "product state needs {l} Bloch angle pairs, got {}",
                    angles.len()
                )));
            }
            let mut s = StateVector::basis(l, 0)?;
            for (i, (theta, phi)) in angles.into_iter().enumerate() {
                s.apply_gate(Site::new(i + 1), &bloch_gate(theta, phi))?;
            }
            Ok(s)
        }
        ReferenceState::Basis(index) => StateVector::basis(l, *index),
    }
}
