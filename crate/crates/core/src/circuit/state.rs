use rand::Rng;

use super::config::{NoiseKind, SimMode};
use crate::clifford::CliffordGate;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator};
use crate::tableau::{GeneratorSet, MeasurementResult, Mode, Outcome};

/// Generators over `[S: L][R: L or 0][A: ancillas, full mode only]` plus
/// bookkeeping for ancilla compression.
#[derive(Clone, Debug)]
pub struct SimState {
    gens: GeneratorSet,
    n_sys: usize,
    n_ref: usize,
    mode: SimMode,
    discarded: usize,
    ancillas: usize,
    settled_rows: usize,
}

impl SimState {
    /// Each system qubit `i` in a Bell pair with reference qubit `L + i`.
    pub fn init_bell_pairs(l: usize, mode: SimMode) -> Result<Self> {
        if !l.is_multiple_of(2) || l == 0 {
            return Err(Error::InvalidConfig(format!("L must be even and positive, got {l}")));
        }
        let n = 2 * l;
        let mut gens = GeneratorSet::new(n, Mode::Exact);
        for i in 0..l {
            for p in [Pauli::X, Pauli::Z] {
                let mut op = PauliOperator::identity(n);
                op.set(i, p);
                op.set(l + i, p);
                gens.push_row(&op)?;
            }
        }
        Ok(Self::wrap(gens, l, l, mode))
    }

    /// A state on the system register only (no reference qubits).
    pub fn from_system(gens: GeneratorSet, mode: SimMode) -> Self {
        let l = gens.num_qubits();
        Self::wrap(gens, l, 0, mode)
    }

    fn wrap(mut gens: GeneratorSet, n_sys: usize, n_ref: usize, mode: SimMode) -> Self {
        if mode == SimMode::Compressed {
            gens.make_truncated();
        }
        let settled_rows = gens.len();
        Self { gens, n_sys, n_ref, mode, discarded: 0, ancillas: 0, settled_rows }
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn num_system(&self) -> usize {
        self.n_sys
    }

    pub fn num_reference(&self) -> usize {
        self.n_ref
    }

    pub fn mode(&self) -> SimMode {
        self.mode
    }

    /// Rows discarded by compression (`x`).
    pub fn discarded_count(&self) -> usize {
        self.discarded
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancillas
    }

    pub fn system_qubits(&self) -> Vec<usize> {
        (0..self.n_sys).collect()
    }

    pub fn reference_qubits(&self) -> Vec<usize> {
        (self.n_sys..self.n_sys + self.n_ref).collect()
    }

    /// Ancilla columns (empty in compressed mode).
    pub fn ancilla_qubits(&self) -> Vec<usize> {
        (self.n_sys + self.n_ref..self.gens.num_qubits()).collect()
    }

    fn check_system(&self, q: usize) -> Result<()> {
        if q >= self.n_sys {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n_sys });
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &CliffordGate, targets: &[usize]) -> Result<()> {
        for &t in targets {
            self.check_system(t)?;
        }
        self.gens.apply_gate(gate, targets)
    }

    pub(crate) fn measure_z_with(&mut self, q: usize, source: Outcome) -> Result<MeasurementResult> {
        self.check_system(q)?;
        let z = PauliOperator::single(self.gens.num_qubits(), q, Pauli::Z);
        self.gens.measure_with(&z, source)
    }

    /// Z measurement of a system qubit; outcomes are physical in full mode only.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, forced: Option<u8>, rng: &mut R) -> Result<MeasurementResult> {
        self.check_system(q)?;
        let z = PauliOperator::single(self.gens.num_qubits(), q, Pauli::Z);
        self.gens.measure_pauli(&z, forced, rng)
    }

    /// Measures an arbitrary Hermitian Pauli on the full register.
    pub fn measure_pauli_op<R: Rng + ?Sized>(&mut self, op: &PauliOperator, rng: &mut R) -> Result<MeasurementResult> {
        self.gens.measure_pauli(op, None, rng)
    }

    /// Noise through a transient environment that is traced out at once.
    pub fn apply_noise(&mut self, q: usize, kind: NoiseKind) -> Result<()> {
        self.check_system(q)?;
        match kind {
            NoiseKind::Reset => {
                let e = self.gens.add_zero_qubit();
                self.gens.swap_qubits(q, e);
                self.gens.trace_out_trailing(1);
            }
            NoiseKind::Depolarize => {
                let e1 = self.gens.add_zero_qubit();
                let e2 = self.gens.add_zero_qubit();
                self.gens.apply_hadamard(e1)?;
                self.gens.apply_cnot(e1, e2)?;
                self.gens.swap_qubits(q, e1);
                self.gens.trace_out_trailing(2);
            }
            NoiseKind::Dephase => {
                let e = self.gens.add_zero_qubit();
                self.gens.apply_cnot(q, e)?;
                self.gens.trace_out_trailing(1);
            }
        }
        Ok(())
    }

    /// SWAP with a fresh `|0⟩` ancilla.
    pub fn apply_qe(&mut self, q: usize) -> Result<usize> {
        self.check_system(q)?;
        let index = self.ancillas;
        self.ancillas += 1;
        let a = self.gens.add_zero_qubit();
        self.gens.swap_qubits(q, a);
        if self.mode == SimMode::Compressed {
            // the ancilla tail of every row is erased right away; rows that
            // become dependent are swept up by the next compression
            self.gens.truncate_trailing_qubits(1);
            if self.gens.len() > self.settled_rows + self.n_sys.max(4) {
                self.compress();
            }
        }
        Ok(index)
    }

    /// Removes rows that are redundant modulo the discarded ancilla-only
    /// generators, adding them to `x`. No-op in full mode.
    pub fn compress(&mut self) {
        if self.mode == SimMode::Compressed {
            self.discarded += self.gens.reduce();
            self.settled_rows = self.gens.len();
        }
    }
}
