//! Gate-level circuit representation, Trotter-step builders, CNOT
//! accounting, basis lowering, and comb-topology validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::channel::ChannelParams;
use crate::hamiltonian::{FieldPattern, HamiltonianSpec};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind<R> {
    X,
    SqrtX,
    Rz(R),
    Ry(R),
    Rx(R),
    Cnot,
    Cry(R),
    /// Mid-circuit ancilla measurement; the payload is the slot in the
    /// chronological ancilla record the outcome is written to.
    MeasureAncilla(usize),
    ResetAncilla,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate<R> {
    pub kind: GateKind<R>,
    /// One register index for single-qubit gates, `[control, target]` for
    /// CNOT and CRY.
    pub qubits: Vec<usize>,
}

impl<R: Real> Gate<R> {
    pub fn single(kind: GateKind<R>, q: usize) -> Self {
        Gate {
            kind,
            qubits: vec![q],
        }
    }

    pub fn two(kind: GateKind<R>, control: usize, target: usize) -> Self {
        assert_ne!(control, target, "two-qubit gate needs distinct qubits");
        Gate {
            kind,
            qubits: vec![control, target],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self.kind, GateKind::Cnot | GateKind::Cry(_))
    }
}

/// Ordered gate list over the system + ancilla register.
///
/// System qubits are `0..n_system`, ancillas follow. `measure_system_at_end`
/// marks the final readout of every system qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<R> {
    pub n_system: usize,
    pub n_ancilla: usize,
    pub gates: Vec<Gate<R>>,
    /// System site (1-based) -> ancilla register index, for pattern sites.
    pub ancilla_map: BTreeMap<usize, usize>,
    pub measure_system_at_end: bool,
}

impl<R: Real> Circuit<R> {
    pub fn new(n_system: usize, n_ancilla: usize) -> Self {
        Circuit {
            n_system,
            n_ancilla,
            gates: Vec::new(),
            ancilla_map: BTreeMap::new(),
            measure_system_at_end: false,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_system + self.n_ancilla
    }

    pub fn push(&mut self, gate: Gate<R>) {
        for &q in &gate.qubits {
            assert!(q < self.n_qubits(), "qubit index out of range");
        }
        self.gates.push(gate);
    }

    /// Number of mid-circuit ancilla measurements.
    pub fn ancilla_measurement_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::MeasureAncilla(_)))
            .count()
    }

    /// Total measurements including the final system readout.
    pub fn measurement_count(&self) -> usize {
        let final_measures = if self.measure_system_at_end {
            self.n_system
        } else {
            0
        };
        self.ancilla_measurement_count() + final_measures
    }

    /// Line-oriented text form, one gate per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "CIRCUIT {} {}", self.n_system, self.n_ancilla).unwrap();
        for (&site, &anc) in &self.ancilla_map {
            writeln!(out, "ANCILLA {site} {anc}").unwrap();
        }
        for g in &self.gates {
            match (&g.kind, g.qubits.as_slice()) {
                (GateKind::X, [q]) => writeln!(out, "X {q}"),
                (GateKind::SqrtX, [q]) => writeln!(out, "SX {q}"),
                (GateKind::Rz(a), [q]) => writeln!(out, "RZ {q} {:.17e}", a.to_f64_lossy()),
                (GateKind::Ry(a), [q]) => writeln!(out, "RY {q} {:.17e}", a.to_f64_lossy()),
                (GateKind::Rx(a), [q]) => writeln!(out, "RX {q} {:.17e}", a.to_f64_lossy()),
                (GateKind::Cnot, [c, t]) => writeln!(out, "CNOT {c} {t}"),
                (GateKind::Cry(a), [c, t]) => {
                    writeln!(out, "CRY {c} {t} {:.17e}", a.to_f64_lossy())
                }
                (GateKind::MeasureAncilla(slot), [q]) => writeln!(out, "MEASURE_ANC {q} {slot}"),
                (GateKind::ResetAncilla, [q]) => writeln!(out, "RESET_ANC {q}"),
                _ => unreachable!("malformed gate"),
            }
            .unwrap();
        }
        if self.measure_system_at_end {
            writeln!(out, "MEASURE_SYSTEM").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let parse_err = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.into(),
        };
        let (first_no, first) = lines
            .next()
            .ok_or_else(|| parse_err(0, "empty circuit text"))?;
        let header: Vec<&str> = first.split_whitespace().collect();
        if header.len() != 3 || header[0] != "CIRCUIT" {
            return Err(parse_err(first_no, "expected 'CIRCUIT n_system n_ancilla'"));
        }
        let n_system = header[1]
            .parse()
            .map_err(|_| parse_err(first_no, "bad n_system"))?;
        let n_ancilla = header[2]
            .parse()
            .map_err(|_| parse_err(first_no, "bad n_ancilla"))?;
        let mut circuit = Circuit::new(n_system, n_ancilla);

        for (no, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.is_empty() {
                continue;
            }
            let q = |i: usize| -> Result<usize> {
                tok.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(no, "bad qubit index"))
            };
            let angle = |i: usize| -> Result<R> {
                tok.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .map(R::of)
                    .ok_or_else(|| parse_err(no, "bad angle"))
            };
            match tok[0] {
                "ANCILLA" => {
                    circuit.ancilla_map.insert(q(1)?, q(2)?);
                }
                "X" => circuit.push(Gate::single(GateKind::X, q(1)?)),
                "SX" => circuit.push(Gate::single(GateKind::SqrtX, q(1)?)),
                "RZ" => circuit.push(Gate::single(GateKind::Rz(angle(2)?), q(1)?)),
                "RY" => circuit.push(Gate::single(GateKind::Ry(angle(2)?), q(1)?)),
                "RX" => circuit.push(Gate::single(GateKind::Rx(angle(2)?), q(1)?)),
                "CNOT" => circuit.push(Gate::two(GateKind::Cnot, q(1)?, q(2)?)),
                "CRY" => circuit.push(Gate::two(GateKind::Cry(angle(3)?), q(1)?, q(2)?)),
                "MEASURE_ANC" => {
                    circuit.push(Gate::single(GateKind::MeasureAncilla(q(2)?), q(1)?))
                }
                "RESET_ANC" => circuit.push(Gate::single(GateKind::ResetAncilla, q(1)?)),
                "MEASURE_SYSTEM" => circuit.measure_system_at_end = true,
                other => return Err(Error::UnknownGate(other.into())),
            }
        }
        Ok(circuit)
    }
}

/// Nearest-neighbour evolution `exp(i*lambda*dt * sum Z_i Z_{i+1})`:
/// one CNOT-RZ-CNOT block per bond.
pub fn build_unn<R: Real>(n_system: usize, lambda: R, dt: R) -> Result<Circuit<R>> {
    if n_system < 2 {
        return Err(Error::InvalidParameter(
            "nearest-neighbour block needs n_system >= 2".into(),
        ));
    }
    let mut c = Circuit::new(n_system, 0);
    let angle = -R::of(2.0) * lambda * dt;
    for q in 0..n_system - 1 {
        c.push(Gate::two(GateKind::Cnot, q, q + 1));
        c.push(Gate::single(GateKind::Rz(angle), q + 1));
        c.push(Gate::two(GateKind::Cnot, q, q + 1));
    }
    Ok(c)
}

/// Transverse-field evolution `exp(i*h_x*dt * sum X_i)`: one RX per site.
pub fn build_ux<R: Real>(n_system: usize, h_x: R, dt: R) -> Result<Circuit<R>> {
    if n_system < 1 {
        return Err(Error::InvalidParameter("n_system must be >= 1".into()));
    }
    let mut c = Circuit::new(n_system, 0);
    let angle = -R::of(2.0) * h_x * dt;
    for q in 0..n_system {
        c.push(Gate::single(GateKind::Rx(angle), q));
    }
    Ok(c)
}

fn pattern_sites(n_system: usize, pattern: FieldPattern) -> Vec<usize> {
    match pattern {
        FieldPattern::AllSites => (1..=n_system).collect(),
        FieldPattern::AlternateSites => (1..=n_system).filter(|s| s % 2 == 0).collect(),
    }
}

/// Standard system-site -> ancilla-index assignment: the k-th pattern site
/// gets ancilla `n_system + k`.
pub fn ancilla_assignment(n_system: usize, pattern: FieldPattern) -> BTreeMap<usize, usize> {
    pattern_sites(n_system, pattern)
        .into_iter()
        .enumerate()
        .map(|(k, site)| (site, n_system + k))
        .collect()
}

fn push_damping_block<R: Real>(circuit: &mut Circuit<R>, gamma: R, slot_base: usize) -> Result<usize> {
    if gamma < R::zero() || gamma >= R::one() {
        return Err(Error::InvalidParameter("gamma must lie in [0, 1)".into()));
    }
    let phi = -R::of(2.0) * gamma.sqrt().asin();
    let mut slot = slot_base;
    let pairs: Vec<(usize, usize)> = circuit
        .ancilla_map
        .iter()
        .map(|(&site, &anc)| (site, anc))
        .collect();
    for (site, anc) in pairs {
        let sys_q = site - 1;
        circuit.push(Gate::two(GateKind::Cry(phi), sys_q, anc));
        circuit.push(Gate::single(GateKind::MeasureAncilla(slot), anc));
        circuit.push(Gate::single(GateKind::ResetAncilla, anc));
        slot += 1;
    }
    Ok(slot)
}

/// Damping-channel block: one CRY + measure + reset per pattern site.
pub fn build_udc<R: Real>(n_system: usize, pattern: FieldPattern, gamma: R) -> Result<Circuit<R>> {
    let map = ancilla_assignment(n_system, pattern);
    let mut c = Circuit::new(n_system, map.len());
    c.ancilla_map = map;
    push_damping_block(&mut c, gamma, 0)?;
    Ok(c)
}

/// Full Trotter circuit: per step, the damping block first, then the
/// transverse-field layer, then the nearest-neighbour blocks. A final
/// measurement of every system qubit is appended.
pub fn build_trotter_circuit<R: Real>(
    spec: &HamiltonianSpec<R>,
    dt: R,
    n_steps: usize,
) -> Result<Circuit<R>> {
    spec.validate()?;
    if n_steps < 1 {
        return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
    }
    let params: ChannelParams<R> = crate::channel::channel_params(spec.theta, dt)?;
    let n = spec.n_sites;
    let map = ancilla_assignment(n, spec.pattern);
    let mut c = Circuit::new(n, map.len());
    c.ancilla_map = map;

    let ux = build_ux(n, spec.h_x, dt)?;
    let unn = if n >= 2 {
        Some(build_unn(n, spec.lambda, dt)?)
    } else {
        None
    };

    let mut slot = 0;
    for _ in 0..n_steps {
        slot = push_damping_block(&mut c, params.gamma, slot)?;
        for g in &ux.gates {
            c.push(g.clone());
        }
        if let Some(unn) = &unn {
            for g in &unn.gates {
                c.push(g.clone());
            }
        }
    }
    c.measure_system_at_end = true;
    Ok(c)
}

/// Rewrite every gate into the basis set {CNOT, RZ, sqrt(X), X} plus
/// measurement and reset. Unitary-equivalent up to global phase.
pub fn lower_to_basis<R: Real>(circuit: &Circuit<R>) -> Circuit<R> {
    let pi = R::PI();
    let mut out = Circuit::new(circuit.n_system, circuit.n_ancilla);
    out.ancilla_map = circuit.ancilla_map.clone();
    out.measure_system_at_end = circuit.measure_system_at_end;

    fn push_ry<R: Real>(out: &mut Circuit<R>, q: usize, theta: R) {
        let pi = R::PI();
        out.push(Gate::single(GateKind::SqrtX, q));
        out.push(Gate::single(GateKind::Rz(theta + pi), q));
        out.push(Gate::single(GateKind::SqrtX, q));
        out.push(Gate::single(GateKind::Rz(pi), q));
    }

    for g in &circuit.gates {
        match (&g.kind, g.qubits.as_slice()) {
            (GateKind::Rx(theta), [q]) => {
                let half = pi / R::of(2.0);
                out.push(Gate::single(GateKind::Rz(half), *q));
                out.push(Gate::single(GateKind::SqrtX, *q));
                out.push(Gate::single(GateKind::Rz(*theta + pi), *q));
                out.push(Gate::single(GateKind::SqrtX, *q));
                out.push(Gate::single(GateKind::Rz(half), *q));
            }
            (GateKind::Ry(theta), [q]) => push_ry(&mut out, *q, *theta),
            (GateKind::Cry(phi), [c, t]) => {
                let half = *phi / R::of(2.0);
                push_ry(&mut out, *t, half);
                out.push(Gate::two(GateKind::Cnot, *c, *t));
                push_ry(&mut out, *t, -half);
                out.push(Gate::two(GateKind::Cnot, *c, *t));
            }
            _ => out.push(g.clone()),
        }
    }
    out
}

/// CNOT count of the circuit after lowering to the basis set.
pub fn cnot_count<R: Real>(circuit: &Circuit<R>) -> usize {
    lower_to_basis(circuit)
        .gates
        .iter()
        .filter(|g| matches!(g.kind, GateKind::Cnot))
        .count()
}

/// Qubit connectivity as a set of unordered index pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub edges: BTreeSet<(usize, usize)>,
}

impl Topology {
    pub fn from_edges(edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Topology {
            edges: edges
                .into_iter()
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect(),
        }
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }
}

/// A two-qubit gate placed on a pair the topology does not connect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyViolation {
    pub gate_index: usize,
    pub qubits: (usize, usize),
}

/// Comb connectivity: a chain over the system qubits plus one ancilla tooth
/// per pattern site.
pub fn comb_topology(n_system: usize, pattern: FieldPattern) -> Topology {
    let mut edges: Vec<(usize, usize)> = (0..n_system.saturating_sub(1))
        .map(|q| (q, q + 1))
        .collect();
    for (site, anc) in ancilla_assignment(n_system, pattern) {
        edges.push((site - 1, anc));
    }
    Topology::from_edges(edges)
}

/// Every two-qubit gate whose pair is not an edge of the topology.
pub fn validate_topology<R: Real>(
    circuit: &Circuit<R>,
    topology: &Topology,
) -> Vec<TopologyViolation> {
    circuit
        .gates
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_two_qubit())
        .filter(|(_, g)| !topology.contains(g.qubits[0], g.qubits[1]))
        .map(|(i, g)| TopologyViolation {
            gate_index: i,
            qubits: (g.qubits[0], g.qubits[1]),
        })
        .collect()
}
