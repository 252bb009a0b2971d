//! Statevector execution of circuits: mid-circuit measurement sampling,
//! reset, optional noise injection, shot accounting, and post-selection.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::hamiltonian::{observable_eigenvalue, HamiltonianSpec};
use crate::noise::{apply_depolarizing, corrupt_readout, NoiseModel};
use crate::oracle::TrotterFactors;
use crate::{Error, Real, Result};

/// Complex amplitude vector over a qubit register. Qubit `q` is bit `q` of
/// the basis-state index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<R> {
    pub n_qubits: usize,
    pub amplitudes: Vec<Complex<R>>,
}

impl<R: Real> StateVector<R> {
    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex::new(R::zero(), R::zero()); 1 << n_qubits];
        amplitudes[index] = Complex::new(R::one(), R::zero());
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    /// Haar-ish random normalized state from a fixed seed (test fixture).
    pub fn random_state(n_qubits: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut amplitudes: Vec<Complex<R>> = (0..1usize << n_qubits)
            .map(|_| {
                Complex::new(
                    R::of(rng.gen::<f64>() * 2.0 - 1.0),
                    R::of(rng.gen::<f64>() * 2.0 - 1.0),
                )
            })
            .collect();
        let norm = amplitudes.iter().map(|x| x.norm_sqr()).sum::<R>().sqrt();
        for x in &mut amplitudes {
            *x = *x / Complex::new(norm, R::zero());
        }
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex<R>>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(
                "amplitude vector length must be a power of two".into(),
            ));
        }
        let norm = amplitudes.iter().map(|x| x.norm_sqr()).sum::<R>().sqrt();
        if (norm - R::one()).abs() > R::of(1e-8) {
            return Err(Error::NotNormalized((norm - R::one()).abs().to_f64_lossy()));
        }
        Ok(StateVector {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn norm(&self) -> R {
        self.amplitudes.iter().map(|x| x.norm_sqr()).sum::<R>().sqrt()
    }

    pub fn apply_single(&mut self, q: usize, m: &[[Complex<R>; 2]; 2]) {
        let mask = 1usize << q;
        for i0 in 0..self.amplitudes.len() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i1];
            self.amplitudes[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Single-qubit matrix applied only where `control` is 1.
    pub fn apply_controlled(&mut self, control: usize, target: usize, m: &[[Complex<R>; 2]; 2]) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i0 in 0..self.amplitudes.len() {
            if i0 & cmask == 0 || i0 & tmask != 0 {
                continue;
            }
            let i1 = i0 | tmask;
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i1];
            self.amplitudes[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        let mask = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                self.amplitudes.swap(i, i | mask);
            }
        }
    }

    pub fn apply_phase_flip(&mut self, q: usize) {
        let mask = 1usize << q;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask != 0 {
                *a = -*a;
            }
        }
    }

    pub fn scale(&mut self, factor: Complex<R>) {
        for a in &mut self.amplitudes {
            *a = *a * factor;
        }
    }

    pub fn probability_of_one(&self, q: usize) -> R {
        let mask = 1usize << q;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Project qubit `q` onto `outcome` and renormalize.
    pub fn collapse(&mut self, q: usize, outcome: u8) -> Result<()> {
        let mask = 1usize << q;
        let keep_one = outcome == 1;
        let mut kept = R::zero();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & mask != 0) == keep_one {
                kept += a.norm_sqr();
            } else {
                *a = Complex::new(R::zero(), R::zero());
            }
        }
        if kept <= R::zero() {
            return Err(Error::NormFailure(0.0));
        }
        let inv = Complex::new(R::one() / kept.sqrt(), R::zero());
        for a in &mut self.amplitudes {
            *a = *a * inv;
        }
        Ok(())
    }

    /// Expectation of the average-magnetization observable over the low
    /// `n_sites` qubits.
    pub fn observable_expectation(&self, n_sites: usize) -> R {
        let sys_mask = (1usize << n_sites) - 1;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| observable_eigenvalue::<R>(i & sys_mask, n_sites) * a.norm_sqr())
            .sum()
    }
}

fn gate_matrix_1q<R: Real>(kind: &GateKind<R>) -> Option<[[Complex<R>; 2]; 2]> {
    let zero = Complex::new(R::zero(), R::zero());
    let half = R::one() / R::of(2.0);
    match kind {
        GateKind::X => Some([
            [zero, Complex::new(R::one(), R::zero())],
            [Complex::new(R::one(), R::zero()), zero],
        ]),
        GateKind::SqrtX => {
            let p = Complex::new(half, half);
            let m = Complex::new(half, -half);
            Some([[p, m], [m, p]])
        }
        GateKind::Rz(a) => {
            let h = *a / R::of(2.0);
            Some([
                [Complex::new(h.cos(), -h.sin()), zero],
                [zero, Complex::new(h.cos(), h.sin())],
            ])
        }
        GateKind::Ry(a) => {
            let h = *a / R::of(2.0);
            let (c, s) = (Complex::new(h.cos(), R::zero()), Complex::new(h.sin(), R::zero()));
            Some([[c, -s], [s, c]])
        }
        GateKind::Rx(a) => {
            let h = *a / R::of(2.0);
            let c = Complex::new(h.cos(), R::zero());
            let s = Complex::new(R::zero(), -h.sin());
            Some([[c, s], [s, c]])
        }
        _ => None,
    }
}

/// Apply a unitary gate to the state; measurement and reset are not handled
/// here.
fn apply_unitary_gate<R: Real>(state: &mut StateVector<R>, gate: &Gate<R>) {
    match (&gate.kind, gate.qubits.as_slice()) {
        (GateKind::Cnot, [c, t]) => {
            let x = gate_matrix_1q(&GateKind::<R>::X).unwrap();
            state.apply_controlled(*c, *t, &x);
        }
        (GateKind::Cry(a), [c, t]) => {
            let ry = gate_matrix_1q(&GateKind::Ry(*a)).unwrap();
            state.apply_controlled(*c, *t, &ry);
        }
        (kind, [q]) => {
            let m = gate_matrix_1q(kind).expect("unitary single-qubit gate");
            state.apply_single(*q, &m);
        }
        _ => unreachable!("malformed gate"),
    }
}

/// Dense unitary of the circuit with measurements and resets deferred
/// (skipped). Columns are images of basis states.
pub fn circuit_unitary<R: Real>(circuit: &Circuit<R>) -> Array2<Complex<R>> {
    let dim = 1usize << circuit.n_qubits();
    let mut u = Array2::from_elem((dim, dim), Complex::new(R::zero(), R::zero()));
    for col in 0..dim {
        let mut state = StateVector::basis(circuit.n_qubits(), col);
        for gate in &circuit.gates {
            match gate.kind {
                GateKind::MeasureAncilla(_) | GateKind::ResetAncilla => {}
                _ => apply_unitary_gate(&mut state, gate),
            }
        }
        for row in 0..dim {
            u[[row, col]] = state.amplitudes[row];
        }
    }
    u
}

/// Raw shot output: counts keyed by (chronological ancilla record, final
/// system bitstring). Bitstrings are little-endian text: character `k` is
/// qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotTable {
    pub entries: BTreeMap<(String, String), u64>,
    pub n_shots: u64,
}

#[derive(Serialize, Deserialize)]
struct ShotEntry {
    ancilla: String,
    system: String,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct ShotTableWire {
    n_shots: u64,
    entries: Vec<ShotEntry>,
}

impl ShotTable {
    pub fn empty() -> Self {
        ShotTable {
            entries: BTreeMap::new(),
            n_shots: 0,
        }
    }

    pub fn record(&mut self, ancilla: String, system: String) {
        *self.entries.entry((ancilla, system)).or_insert(0) += 1;
        self.n_shots += 1;
    }

    /// Associative, commutative merge of shot batches.
    pub fn merge(mut self, other: ShotTable) -> ShotTable {
        for (key, count) in other.entries {
            *self.entries.entry(key).or_insert(0) += count;
        }
        self.n_shots += other.n_shots;
        self
    }

    pub fn to_json(&self) -> String {
        let wire = ShotTableWire {
            n_shots: self.n_shots,
            entries: self
                .entries
                .iter()
                .map(|((a, s), &count)| ShotEntry {
                    ancilla: a.clone(),
                    system: s.clone(),
                    count,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("shot table serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let wire: ShotTableWire = serde_json::from_str(json)
            .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
        let mut table = ShotTable::empty();
        table.n_shots = wire.n_shots;
        for e in wire.entries {
            table.entries.insert((e.ancilla, e.system), e.count);
        }
        Ok(table)
    }
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

fn run_one_shot<R: Real>(
    circuit: &Circuit<R>,
    initial: Option<&StateVector<R>>,
    noise: Option<&NoiseModel<R>>,
    rng: &mut ChaCha12Rng,
) -> Result<(String, String)> {
    let n_qubits = circuit.n_qubits();
    let mut state = match initial {
        Some(psi) => {
            if psi.n_qubits != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: 1 << n_qubits,
                    got: psi.amplitudes.len(),
                });
            }
            psi.clone()
        }
        None => StateVector::basis(n_qubits, 0),
    };
    let n_record = circuit.ancilla_measurement_count();
    let mut record = vec![0u8; n_record];
    let mut last_outcome = vec![0u8; n_qubits];

    for gate in &circuit.gates {
        match (&gate.kind, gate.qubits.as_slice()) {
            (GateKind::MeasureAncilla(slot), [q]) => {
                let p_one = state.probability_of_one(*q);
                let outcome = u8::from(R::of(rng.gen::<f64>()) < p_one);
                state.collapse(*q, outcome)?;
                record[*slot] = outcome;
                last_outcome[*q] = outcome;
            }
            (GateKind::ResetAncilla, [q]) => {
                // The preceding measurement already collapsed the qubit;
                // flip it back if it read 1.
                if last_outcome[*q] == 1 {
                    state.apply_x(*q);
                    last_outcome[*q] = 0;
                }
            }
            _ => {
                apply_unitary_gate(&mut state, gate);
                if let Some(noise) = noise {
                    let p = if gate.is_two_qubit() { noise.p2 } else { noise.p1 };
                    apply_depolarizing(&mut state, &gate.qubits, p, rng);
                }
            }
        }
    }

    let drift = (state.norm() - R::one()).abs();
    if drift > R::of(1e-6) {
        return Err(Error::NormFailure(state.norm().to_f64_lossy()));
    }

    // Final projective measurement of the whole register, one draw.
    let r = R::of(rng.gen::<f64>());
    let mut acc = R::zero();
    let mut sampled = state.amplitudes.len() - 1;
    for (i, a) in state.amplitudes.iter().enumerate() {
        acc += a.norm_sqr();
        if r < acc {
            sampled = i;
            break;
        }
    }
    let mut final_bits: Vec<u8> = (0..circuit.n_system)
        .map(|q| (sampled >> q & 1) as u8)
        .collect();
    if let Some(noise) = noise {
        corrupt_readout(&mut final_bits, noise, rng);
    }
    Ok((bits_to_string(&record), bits_to_string(&final_bits)))
}

/// Sample `n_shots` runs of the circuit. Deterministic given
/// `(seed, circuit, noise)`: shot `k` draws from stream `k` of a
/// counter-based generator, so any parallel schedule gives the same table.
pub fn run_shots<R: Real>(
    circuit: &Circuit<R>,
    n_shots: u64,
    seed: u64,
    noise: Option<&NoiseModel<R>>,
) -> Result<ShotTable> {
    run_shots_from(circuit, n_shots, seed, noise, None)
}

/// Same as [`run_shots`] with an initial-state override.
pub fn run_shots_from<R: Real>(
    circuit: &Circuit<R>,
    n_shots: u64,
    seed: u64,
    noise: Option<&NoiseModel<R>>,
    initial: Option<&StateVector<R>>,
) -> Result<ShotTable> {
    if let Some(noise) = noise {
        noise.validate()?;
    }
    (0..n_shots)
        .into_par_iter()
        .try_fold(
            || ShotTable::empty(),
            |mut table, shot| {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(shot);
                let (record, bits) = run_one_shot(circuit, initial, noise, &mut rng)?;
                table.record(record, bits);
                Ok(table)
            },
        )
        .try_reduce(|| ShotTable::empty(), |a, b| Ok(a.merge(b)))
}

/// Deterministic no-jump branch: apply the `E0` Kraus factor each step,
/// accumulate the success-probability product, and return the conditional
/// state over the system register.
pub fn run_postselected_exact<R: Real>(
    spec: &HamiltonianSpec<R>,
    dt: R,
    n_steps: usize,
    initial: Option<&StateVector<R>>,
) -> Result<(StateVector<R>, R)> {
    let factors = TrotterFactors::build(spec, dt)?;
    let dim = spec.dim();
    let mut psi = match initial {
        Some(p) => {
            if p.amplitudes.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.amplitudes.len(),
                });
            }
            p.clone()
        }
        None => StateVector::basis(spec.n_sites, 0),
    };
    let mut survival = R::one();
    for _ in 0..n_steps {
        let mut v: Vec<Complex<R>> = psi
            .amplitudes
            .iter()
            .zip(&factors.e0_diag)
            .map(|(a, d)| a * d)
            .collect();
        let p0 = v.iter().map(|x| x.norm_sqr()).sum::<R>();
        if p0 <= R::zero() {
            return Err(Error::NormFailure(0.0));
        }
        survival *= p0;
        let inv = Complex::new(R::one() / p0.sqrt(), R::zero());
        for x in &mut v {
            *x = *x * inv;
        }
        let after_x = factors.u_x.dot(&ndarray::Array1::from(v));
        let out: Vec<Complex<R>> = after_x
            .iter()
            .zip(&factors.u_nn_diag)
            .map(|(a, d)| a * d)
            .collect();
        psi = StateVector {
            n_qubits: spec.n_sites,
            amplitudes: out,
        };
    }
    Ok((psi, survival))
}

/// Keep only shots whose ancilla record is all zeros. An empty result is a
/// valid outcome (fraction 0), not an error.
pub fn post_select(table: &ShotTable) -> (BTreeMap<String, u64>, f64) {
    let mut kept = BTreeMap::new();
    let mut kept_total = 0u64;
    for ((record, bits), &count) in &table.entries {
        if record.bytes().all(|b| b == b'0') {
            *kept.entry(bits.clone()).or_insert(0) += count;
            kept_total += count;
        }
    }
    let fraction = if table.n_shots == 0 {
        0.0
    } else {
        kept_total as f64 / table.n_shots as f64
    };
    (kept, fraction)
}

/// Frequency-weighted average magnetization over filtered counts.
pub fn expectation_observable<R: Real>(
    counts: &BTreeMap<String, u64>,
    n_system: usize,
) -> Result<R> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::NoData);
    }
    let mut sum = R::zero();
    for (bits, &count) in counts {
        let index = bits
            .bytes()
            .enumerate()
            .fold(0usize, |acc, (q, b)| acc | (usize::from(b == b'1') << q));
        sum += observable_eigenvalue::<R>(index, n_system) * R::of(count as f64);
    }
    Ok(sum / R::of(total as f64))
}
