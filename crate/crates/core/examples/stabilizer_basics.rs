//! Pauli algebra, Clifford conjugation and measurement on a GHZ state.

use iclab::clifford::random_two_qubit_clifford;
use iclab::{CliffordGate, GeneratorSet, Pauli, PauliOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> iclab::Result<()> {
    let xz = PauliOperator::parse("XZ")?;
    let zx = PauliOperator::parse("ZX")?;
    println!("XZ · ZX = {}, commute: {}", xz.product(&zx)?, xz.commutes(&zx)?);

    let h = CliffordGate::hadamard();
    println!("H X H = {}", h.conjugate(&PauliOperator::single(1, 0, Pauli::X), &[0])?);

    // GHZ on three qubits
    let mut ghz = GeneratorSet::zero_state(3);
    ghz.apply_hadamard(0)?;
    ghz.apply_cnot(0, 1)?;
    ghz.apply_cnot(1, 2)?;
    for row in ghz.rows() {
        println!("  stabilizer {row}");
    }
    println!("S(q0) = {}, S(q0 q1) = {}", ghz.subsystem_entropy(&[0]), ghz.subsystem_entropy(&[0, 1]));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gate = random_two_qubit_clifford(&mut rng);
    ghz.apply_gate(&gate, &[1, 2])?;
    let first = ghz.measure_pauli(&PauliOperator::single(3, 0, Pauli::Z), None, &mut rng)?;
    let again = ghz.measure_pauli(&PauliOperator::single(3, 0, Pauli::Z), None, &mut rng)?;
    println!("Z0 measured twice: {first:?} then {again:?}");
    println!("after measurement S(q0) = {}", ghz.subsystem_entropy(&[0]));
    Ok(())
}
