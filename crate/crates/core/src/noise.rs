//! Injectable stochastic error models: depolarizing gate noise realized as
//! random Pauli insertions, and asymmetric readout bit flips.
//!
//! Default rates are plausible NISQ-scale placeholders, not calibrated
//! device numbers.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::simulator::StateVector;
use crate::{Error, Real, Result};

/// Per-qubit readout assignment error: `p01 = P(read 1 | state 0)`,
/// `p10 = P(read 0 | state 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError<R> {
    pub p01: R,
    pub p10: R,
}

impl<R: Real> ReadoutError<R> {
    pub fn none() -> Self {
        ReadoutError {
            p01: R::zero(),
            p10: R::zero(),
        }
    }

    pub fn symmetric(p: R) -> Self {
        ReadoutError { p01: p, p10: p }
    }
}

/// Stochastic noise model applied during shot simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel<R> {
    /// Depolarizing probability per single-qubit gate.
    pub p1: R,
    /// Depolarizing probability per two-qubit gate.
    pub p2: R,
    /// Readout error per qubit; qubits beyond the list read out ideally.
    pub readout: Vec<ReadoutError<R>>,
}

impl<R: Real> NoiseModel<R> {
    pub fn noiseless() -> Self {
        NoiseModel {
            p1: R::zero(),
            p2: R::zero(),
            readout: Vec::new(),
        }
    }

    /// Demo defaults: p2 = 0.01, p1 = 0.001, symmetric readout 0.02 on
    /// `n_qubits` qubits. Placeholder rates, not device calibration.
    pub fn demo_default(n_qubits: usize) -> Self {
        NoiseModel {
            p1: R::of(0.001),
            p2: R::of(0.01),
            readout: vec![ReadoutError::symmetric(R::of(0.02)); n_qubits],
        }
    }

    pub fn with_uniform_readout(mut self, p01: R, p10: R, n_qubits: usize) -> Self {
        self.readout = vec![ReadoutError { p01, p10 }; n_qubits];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |p: R| p >= R::zero() && p <= R::one();
        if !in_unit(self.p1) || !in_unit(self.p2) {
            return Err(Error::InvalidParameter(
                "depolarizing probabilities must lie in [0, 1]".into(),
            ));
        }
        for r in &self.readout {
            if !in_unit(r.p01) || !in_unit(r.p10) {
                return Err(Error::InvalidParameter(
                    "readout probabilities must lie in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn readout_for(&self, qubit: usize) -> ReadoutError<R> {
        self.readout
            .get(qubit)
            .copied()
            .unwrap_or_else(ReadoutError::none)
    }

    pub fn is_trivial(&self) -> bool {
        self.p1 == R::zero()
            && self.p2 == R::zero()
            && self
                .readout
                .iter()
                .all(|r| r.p01 == R::zero() && r.p10 == R::zero())
    }
}

fn apply_pauli<R: Real>(state: &mut StateVector<R>, qubit: usize, pauli: u8) {
    let i = Complex::new(R::zero(), R::one());
    match pauli {
        1 => state.apply_x(qubit),
        2 => {
            // Y = i X Z
            state.apply_phase_flip(qubit);
            state.apply_x(qubit);
            state.scale(i);
        }
        3 => state.apply_phase_flip(qubit),
        _ => {}
    }
}

/// With probability `p`, apply a uniformly random non-identity Pauli on the
/// given qubits (15 choices for a pair, 3 for a single qubit).
pub fn apply_depolarizing<R: Real>(
    state: &mut StateVector<R>,
    qubits: &[usize],
    p: R,
    rng: &mut impl Rng,
) {
    if p <= R::zero() || R::of(rng.gen::<f64>()) >= p {
        return;
    }
    match qubits {
        [q] => {
            let pauli = rng.gen_range(1u8..4);
            apply_pauli(state, *q, pauli);
        }
        [a, b] => {
            let idx = rng.gen_range(1u8..16);
            apply_pauli(state, *a, idx & 0x3);
            apply_pauli(state, *b, idx >> 2);
        }
        _ => panic!("depolarizing noise expects 1 or 2 qubits"),
    }
}

/// Independent per-qubit readout bit flips with asymmetric probabilities.
/// Bit `q` of the slice is the outcome of qubit `q`.
pub fn corrupt_readout<R: Real>(bits: &mut [u8], noise: &NoiseModel<R>, rng: &mut impl Rng) {
    for (q, bit) in bits.iter_mut().enumerate() {
        let r = noise.readout_for(q);
        let flip_p = if *bit == 0 { r.p01 } else { r.p10 };
        if flip_p > R::zero() && R::of(rng.gen::<f64>()) < flip_p {
            *bit ^= 1;
        }
    }
}
