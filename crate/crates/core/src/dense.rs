//! Brute-force state-vector reference simulator for small instances.
//!
//! Qubit `i` is bit `i` of the amplitude index. Noise environments and QE
//! ancillas are kept as explicit qubits; nothing is ever traced out, so every
//! entropy is computed on the purification.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{ChannelEvent, EventRecord, GateEvent, NoiseKind};
use crate::clifford::{check_targets, CliffordGate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator};
use crate::tableau::{GeneratorSet, MeasurementResult};

pub const MAX_DENSE_QUBITS: usize = 14;

/// Probability below which a branch is treated as impossible.
pub const BRANCH_EPS: f64 = 1e-12;

const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    System,
    Reference,
    Ancilla,
    Environment,
}

#[derive(Clone, Debug)]
pub struct PureState {
    amps: Vec<Complex64>,
    roles: Vec<Role>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `i^k`.
fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

fn masks(op: &PauliOperator) -> (usize, usize) {
    let (mut x, mut z) = (0usize, 0usize);
    for q in op.support() {
        let (bx, bz) = op.get(q).bits();
        x |= (bx as usize) << q;
        z |= (bz as usize) << q;
    }
    (x, z)
}

/// Applies `op` to an amplitude vector.
fn pauli_action(op: &PauliOperator, amps: &[Complex64]) -> Vec<Complex64> {
    let (x, z) = masks(op);
    let base = op.phase() as u32 + (x & z).count_ones();
    let mut out = vec![c(0.0, 0.0); amps.len()];
    for (i, a) in amps.iter().enumerate() {
        // σ(x,z)|i⟩ = i^{x·z} X^x Z^z |i⟩ = i^{x·z} (-1)^{z·i} |i⊕x⟩
        let k = base + 2 * (z & i).count_ones();
        out[i ^ x] += i_pow(k) * a;
    }
    out
}

/// Dense matrix of a Pauli operator.
pub fn pauli_matrix(op: &PauliOperator) -> DMatrix<Complex64> {
    let d = 1usize << op.num_qubits();
    let mut m = DMatrix::zeros(d, d);
    for col in 0..d {
        let mut e = vec![c(0.0, 0.0); d];
        e[col] = c(1.0, 0.0);
        for (row, v) in pauli_action(op, &e).into_iter().enumerate() {
            m[(row, col)] = v;
        }
    }
    m
}

/// A unitary implementing `gate` (up to global phase).
///
/// `U|0…0⟩` is the joint +1 eigenvector of the images of the `Z_j`, and
/// `U|x⟩ = ∏_j image(X_j)^{x_j} U|0…0⟩`.
pub fn clifford_unitary(gate: &CliffordGate) -> DMatrix<Complex64> {
    let k = gate.arity();
    let d = 1usize << k;
    let z_images: Vec<PauliOperator> = (0..k).map(|j| gate.image(2 * j + 1)).collect();
    let x_images: Vec<PauliOperator> = (0..k).map(|j| gate.image(2 * j)).collect();
    let mut psi0 = None;
    for seed in 0..d {
        let mut v = vec![c(0.0, 0.0); d];
        v[seed] = c(1.0, 0.0);
        for g in &z_images {
            let gv = pauli_action(g, &v);
            v.iter_mut().zip(gv).for_each(|(a, b)| *a = (*a + b) * 0.5);
        }
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if norm > 1e-6 {
            let s = norm.sqrt();
            psi0 = Some(v.into_iter().map(|a| a / s).collect::<Vec<_>>());
            break;
        }
    }
    let psi0 = psi0.expect("commuting images always have a joint eigenvector");
    let mut u = DMatrix::zeros(d, d);
    for col in 0..d {
        let mut v = psi0.clone();
        for (j, g) in x_images.iter().enumerate().rev() {
            if (col >> j) & 1 == 1 {
                v = pauli_action(g, &v);
            }
        }
        for (row, a) in v.into_iter().enumerate() {
            u[(row, col)] = a;
        }
    }
    u
}

fn unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    let prod = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

impl PureState {
    /// `|0…0⟩` with the given qubit roles.
    pub fn zero(roles: &[Role]) -> Result<Self> {
        if roles.len() > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { max: MAX_DENSE_QUBITS, requested: roles.len() });
        }
        let mut amps = vec![c(0.0, 0.0); 1 << roles.len()];
        amps[0] = c(1.0, 0.0);
        Ok(Self { amps, roles: roles.to_vec() })
    }

    /// System qubits `0..L` each in a Bell pair with reference qubit `L+i`.
    pub fn bell_pairs(l: usize) -> Result<Self> {
        let mut roles = vec![Role::System; l];
        roles.extend(std::iter::repeat_n(Role::Reference, l));
        let mut st = Self::zero(&roles)?;
        let h = clifford_unitary(&CliffordGate::hadamard());
        let cx = clifford_unitary(&CliffordGate::cnot());
        for i in 0..l {
            st.apply_unitary(&h, &[i])?;
            st.apply_unitary(&cx, &[i, l + i])?;
        }
        Ok(st)
    }

    /// State stabilized by a full-rank exact generator set.
    pub fn from_generators(gs: &GeneratorSet) -> Result<Self> {
        let n = gs.num_qubits();
        if gs.len() != n {
            return Err(Error::InvalidConfig(format!("{} generators for {} qubits", gs.len(), n)));
        }
        let roles = vec![Role::System; n];
        let mut st = Self::zero(&roles)?;
        let rows = gs.rows();
        for seed in 0..st.amps.len() {
            let mut v = vec![c(0.0, 0.0); st.amps.len()];
            v[seed] = c(1.0, 0.0);
            for g in &rows {
                let gv = pauli_action(g, &v);
                v.iter_mut().zip(gv).for_each(|(a, b)| *a = (*a + b) * 0.5);
            }
            let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if norm > 1e-6 {
                let s = norm.sqrt();
                st.amps = v.into_iter().map(|a| a / s).collect();
                return Ok(st);
            }
        }
        Err(Error::InvalidConfig("generators have no joint +1 eigenvector".into()))
    }

    pub fn num_qubits(&self) -> usize {
        self.roles.len()
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn qubits_with(&self, role: Role) -> Vec<usize> {
        (0..self.roles.len()).filter(|&q| self.roles[q] == role).collect()
    }

    /// Appends a qubit in `|0⟩`.
    pub fn add_qubit(&mut self, role: Role) -> Result<usize> {
        let n = self.roles.len() + 1;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { max: MAX_DENSE_QUBITS, requested: n });
        }
        self.amps.resize(1 << n, c(0.0, 0.0));
        self.roles.push(role);
        Ok(n - 1)
    }

    /// Applies a `2^k × 2^k` unitary; local index is `Σ_j bit(targets[j]) << j`.
    pub fn apply_unitary(&mut self, m: &DMatrix<Complex64>, targets: &[usize]) -> Result<()> {
        let k = targets.len();
        if m.nrows() != 1 << k || m.ncols() != 1 << k {
            return Err(Error::Arity { arity: m.nrows().trailing_zeros() as usize, given: k });
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.num_qubits() {
                return Err(Error::QubitOutOfRange { qubit: t, n: self.num_qubits() });
            }
            if targets[..i].contains(&t) {
                return Err(Error::RepeatedTarget(targets.to_vec()));
            }
        }
        let defect = unitarity_defect(m);
        if defect > UNITARY_TOL {
            return Err(Error::NonUnitary(defect));
        }
        let tmask: usize = targets.iter().map(|&t| 1usize << t).sum();
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|l| targets.iter().enumerate().map(|(j, &t)| ((l >> j) & 1) << t).sum())
            .collect();
        let mut local = vec![c(0.0, 0.0); 1 << k];
        for base in 0..self.amps.len() {
            if base & tmask != 0 {
                continue;
            }
            for (l, &off) in offsets.iter().enumerate() {
                local[l] = self.amps[base | off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let mut acc = c(0.0, 0.0);
                for (l, v) in local.iter().enumerate() {
                    acc += m[(r, l)] * v;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    pub fn apply_clifford(&mut self, gate: &CliffordGate, targets: &[usize]) -> Result<()> {
        check_targets(gate, targets, self.num_qubits())?;
        self.apply_unitary(&clifford_unitary(gate), targets)
    }

    pub fn apply_pauli(&mut self, op: &PauliOperator) -> Result<()> {
        self.check_width(op)?;
        self.amps = pauli_action(op, &self.amps);
        Ok(())
    }

    fn check_width(&self, op: &PauliOperator) -> Result<()> {
        if op.num_qubits() != self.num_qubits() {
            return Err(Error::WidthMismatch { left: op.num_qubits(), right: self.num_qubits() });
        }
        Ok(())
    }

    /// `⟨ψ|op|ψ⟩` for Hermitian `op`.
    pub fn expectation(&self, op: &PauliOperator) -> Result<f64> {
        self.check_width(op)?;
        if !op.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        let v = pauli_action(op, &self.amps);
        Ok(self.amps.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum())
    }

    /// Probability of outcome `b` when measuring `op`.
    pub fn branch_probability(&self, op: &PauliOperator, b: u8) -> Result<f64> {
        let e = self.expectation(op)?;
        Ok(if b == 0 { (1.0 + e) / 2.0 } else { (1.0 - e) / 2.0 })
    }

    /// Projects onto the `(-1)^b` eigenspace of `op` and renormalizes.
    /// Returns the branch probability; the state is untouched if it is zero.
    pub fn project_pauli(&mut self, op: &PauliOperator, b: u8) -> Result<f64> {
        let p = self.branch_probability(op, b)?;
        if p <= BRANCH_EPS {
            return Ok(p);
        }
        let sign = if b == 0 { 1.0 } else { -1.0 };
        let v = pauli_action(op, &self.amps);
        let s = 0.5 / p.sqrt();
        self.amps.iter_mut().zip(v).for_each(|(a, pv)| *a = (*a + pv * sign) * s);
        Ok(p)
    }

    /// Born-rule measurement of a Hermitian Pauli.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        op: &PauliOperator,
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<MeasurementResult> {
        let p0 = self.branch_probability(op, 0)?;
        let p1 = 1.0 - p0;
        let was_random = p0 > BRANCH_EPS && p1 > BRANCH_EPS;
        let outcome = match forced {
            Some(b) => {
                let pb = if b == 0 { p0 } else { p1 };
                if pb <= BRANCH_EPS {
                    return Err(Error::Contradiction { forced: b, determined: 1 - b });
                }
                b
            }
            None if was_random => (rng.gen::<f64>() >= p0) as u8,
            None => (p0 <= BRANCH_EPS) as u8,
        };
        self.project_pauli(op, outcome)?;
        Ok(MeasurementResult { outcome, was_random })
    }

    pub fn born_measure_z<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<MeasurementResult> {
        if qubit >= self.num_qubits() {
            return Err(Error::QubitOutOfRange { qubit, n: self.num_qubits() });
        }
        let z = PauliOperator::single(self.num_qubits(), qubit, Pauli::Z);
        self.measure_pauli(&z, forced, rng)
    }

    /// Von Neumann entropy (bits) of the reduced state on `qubits`.
    pub fn reduced_entropy(&self, qubits: &[usize]) -> f64 {
        let n = self.num_qubits();
        let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
        if qubits.is_empty() || rest.is_empty() {
            return 0.0;
        }
        let (dm, dr) = (1usize << qubits.len(), 1usize << rest.len());
        let mut m = DMatrix::<Complex64>::zeros(dm, dr);
        for (idx, a) in self.amps.iter().enumerate() {
            let row: usize = qubits.iter().enumerate().map(|(j, &q)| ((idx >> q) & 1) << j).sum();
            let col: usize = rest.iter().enumerate().map(|(j, &q)| ((idx >> q) & 1) << j).sum();
            m[(row, col)] = *a;
        }
        let norm = self.norm_sqr();
        m.singular_values()
            .iter()
            .map(|s| s * s / norm)
            .filter(|&l| l > 1e-15)
            .map(|l| -l * l.log2())
            .sum()
    }

    /// `S(S∪A) − S(S∪R∪A)` on the purification.
    pub fn conditional_ic(&self) -> f64 {
        let sa: Vec<usize> = (0..self.num_qubits())
            .filter(|&q| matches!(self.roles[q], Role::System | Role::Ancilla))
            .collect();
        let sra: Vec<usize> = (0..self.num_qubits())
            .filter(|&q| matches!(self.roles[q], Role::System | Role::Reference | Role::Ancilla))
            .collect();
        self.reduced_entropy(&sa) - self.reduced_entropy(&sra)
    }
}

/// Result of replaying an event record on an explicit purification.
#[derive(Clone, Debug)]
pub struct DenseReplay {
    pub state: PureState,
    /// Determinism flag of every recorded measurement, in record order.
    pub was_random: Vec<bool>,
    /// Probability of the recorded outcome string given the realization.
    pub probability: f64,
}

/// Replays `record` on `initial` (system qubits must be `0..L`). Noise
/// environments and QE ancillas are appended as explicit qubits and never
/// traced out.
pub fn replay_record(record: &EventRecord, initial: PureState) -> Result<DenseReplay> {
    let mut st = initial;
    let mut was_random = Vec::new();
    let mut probability = 1.0;
    let swap = clifford_unitary(&CliffordGate::swap());
    let cnot = clifford_unitary(&CliffordGate::cnot());
    let h = clifford_unitary(&CliffordGate::hadamard());
    let apply_gates = |st: &mut PureState, gates: &[GateEvent]| -> Result<()> {
        for g in gates {
            st.apply_clifford(&CliffordGate::two_qubit_from_id(g.gate)?, &[g.a, g.b])?;
        }
        Ok(())
    };
    for layer in &record.encode {
        apply_gates(&mut st, layer)?;
    }
    for step in &record.steps {
        apply_gates(&mut st, &step.gates)?;
        for &(q, b) in &step.measurements {
            let z = PauliOperator::single(st.num_qubits(), q, Pauli::Z);
            let p0 = st.branch_probability(&z, 0)?;
            let pb = if b == 0 { p0 } else { 1.0 - p0 };
            if pb <= BRANCH_EPS {
                return Err(Error::Contradiction { forced: b, determined: 1 - b });
            }
            was_random.push(p0 > BRANCH_EPS && 1.0 - p0 > BRANCH_EPS);
            probability *= pb;
            st.project_pauli(&z, b)?;
        }
        for ev in step.channel_events() {
            match ev {
                ChannelEvent::Noise { qubit, kind } => match kind {
                    NoiseKind::Reset => {
                        let e = st.add_qubit(Role::Environment)?;
                        st.apply_unitary(&swap, &[qubit, e])?;
                    }
                    NoiseKind::Depolarize => {
                        let e1 = st.add_qubit(Role::Environment)?;
                        let e2 = st.add_qubit(Role::Environment)?;
                        st.apply_unitary(&h, &[e1])?;
                        st.apply_unitary(&cnot, &[e1, e2])?;
                        st.apply_unitary(&swap, &[qubit, e1])?;
                    }
                    NoiseKind::Dephase => {
                        let e = st.add_qubit(Role::Environment)?;
                        st.apply_unitary(&cnot, &[qubit, e])?;
                    }
                },
                ChannelEvent::Qe { qubit, .. } => {
                    let a = st.add_qubit(Role::Ancilla)?;
                    st.apply_unitary(&swap, &[qubit, a])?;
                }
            }
        }
    }
    Ok(DenseReplay { state: st, was_random, probability })
}

/// Qubits a dense replay of `record` needs on top of `base` initial qubits.
pub fn replay_width(record: &EventRecord, base: usize) -> usize {
    base + record.num_qe() + record.num_environment_qubits()
}

/// Coherent information of the purified state, conditioned on the ancillas.
pub fn oracle_conditional_ic(state: &PureState) -> f64 {
    state.conditional_ic()
}
