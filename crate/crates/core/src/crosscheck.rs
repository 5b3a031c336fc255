//! Cross-simulator comparison on shared event records: the compressed and
//! full-ancilla stabilizer pipelines against the dense purification.

use rand::Rng;

use crate::chi::{classical_replay, device_run, ChiConfig};
use crate::circuit::{replay, run_trajectory, CircuitConfig, EventRecord, NoiseKind, SimMode, SimState};
use crate::dense::{self, PureState, Role, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};
use crate::observables::{entropy_report, EntropyReport};

#[derive(Clone, Debug)]
pub struct OracleEntropies {
    pub s_s_given_a: f64,
    pub s_sr_given_a: f64,
    pub i_c: f64,
}

#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub config: CircuitConfig,
    pub realization: u64,
    pub width: usize,
    pub oracle: OracleEntropies,
    pub full: EntropyReport,
    pub compressed: EntropyReport,
    pub flags_match: bool,
}

fn near_int(v: f64, k: i64) -> bool {
    (v - k as f64).abs() < 1e-6
}

impl CrossCheck {
    /// All three pipelines agree exactly, oracle within `1e-6` of integers.
    pub fn agrees(&self) -> bool {
        let r = &self.compressed;
        self.full == *r
            && self.flags_match
            && near_int(self.oracle.s_s_given_a, r.s_s_given_a)
            && near_int(self.oracle.s_sr_given_a, r.s_sr_given_a)
            && near_int(self.oracle.i_c, r.i_c)
    }
}

/// `S(S|A)`, `S(SR|A)` and `I_C` of an explicit purification.
pub fn oracle_entropies(state: &PureState) -> OracleEntropies {
    let pick = |roles: &[Role]| -> Vec<usize> {
        (0..state.num_qubits()).filter(|&q| roles.contains(&state.roles()[q])).collect()
    };
    let a = state.reduced_entropy(&pick(&[Role::Ancilla]));
    let sa = state.reduced_entropy(&pick(&[Role::System, Role::Ancilla]));
    let sra = state.reduced_entropy(&pick(&[Role::System, Role::Reference, Role::Ancilla]));
    OracleEntropies { s_s_given_a: sa - a, s_sr_given_a: sra - a, i_c: dense::oracle_conditional_ic(state) }
}

/// A random small configuration (L ∈ {2,4,6}, T ≤ 10).
pub fn random_small_config<R: Rng + ?Sized>(rng: &mut R) -> CircuitConfig {
    let l = [2, 4, 6][rng.gen_range(0..3)];
    let kind = [NoiseKind::Reset, NoiseKind::Depolarize, NoiseKind::Dephase][rng.gen_range(0..3)];
    let budget = (MAX_DENSE_QUBITS - 2 * l) as f64;
    let steps = rng.gen_range(1..=10);
    // keep the expected number of extra qubits inside the dense budget
    let q_t = rng.gen::<f64>() * (budget / (l * steps) as f64).min(1.0);
    CircuitConfig::new(l, rng.gen::<f64>() * 0.5, q_t, rng.gen(), kind)
        .with_steps(steps)
        .with_unitaries(rng.gen_bool(0.8))
        .with_mode(SimMode::FullAncilla)
        .with_seed(rng.gen())
}

/// Samples realization `realization` of `config` in full-ancilla mode and
/// replays its record through all three pipelines. Returns `None` when the
/// dense purification would exceed the qubit cap.
pub fn cross_check(config: &CircuitConfig, realization: u64) -> Result<Option<CrossCheck>> {
    cross_check_with(config, realization, false)
}

/// As [`cross_check`]; with `corrupt_signs` the dense side replays every gate
/// with one sign bit flipped, a negative control that must be caught.
pub fn cross_check_with(config: &CircuitConfig, realization: u64, corrupt_signs: bool) -> Result<Option<CrossCheck>> {
    let exact = config.clone().with_mode(SimMode::FullAncilla);
    let traj = run_trajectory(&exact, realization)?;
    let record: &EventRecord = &traj.record;
    let width = dense::replay_width(record, 2 * config.l);
    if width > MAX_DENSE_QUBITS {
        return Ok(None);
    }
    let full = replay(record, SimState::init_bell_pairs(config.l, SimMode::FullAncilla)?, false)?;
    let compressed = replay(record, SimState::init_bell_pairs(config.l, SimMode::Compressed)?, false)?;
    let oracle = if corrupt_signs {
        let mut bad = record.clone();
        for step in &mut bad.steps {
            for g in &mut step.gates {
                g.gate ^= 1;
            }
        }
        dense::replay_record(&bad, PureState::bell_pairs(config.l)?)?
    } else {
        dense::replay_record(record, PureState::bell_pairs(config.l)?)?
    };
    Ok(Some(CrossCheck {
        config: config.clone(),
        realization,
        width,
        oracle: oracle_entropies(&oracle.state),
        full: entropy_report(&full.state),
        compressed: entropy_report(&compressed.state),
        flags_match: full.was_random == oracle.was_random,
    }))
}

/// Outcome strings checked by [`chi_indicator_check`].
pub const MAX_ENUMERATED_MEASUREMENTS: usize = 10;

/// For every outcome string of run `run`, compares the stabilizer replay
/// indicator on σ with the dense Born weight `p_σ^m · 2^{N_rand}`, which must
/// be exactly 0 or 1. Returns the number of disagreeing strings, or `None`
/// when the instance is too large to enumerate.
pub fn chi_indicator_check(config: &ChiConfig, run: u64) -> Result<Option<usize>> {
    let (record, _) = device_run(config, run)?;
    let n = record.num_measurements();
    if n > MAX_ENUMERATED_MEASUREMENTS || dense::replay_width(&record, config.circuit.l) > MAX_DENSE_QUBITS {
        return Ok(None);
    }
    let sigma = PureState::from_generators(&config.sigma.generators())?;
    let mut mismatches = 0;
    for bits in 0..1u64 << n {
        let mut rec = record.clone();
        let mut k = 0;
        for step in &mut rec.steps {
            for m in &mut step.measurements {
                m.1 = ((bits >> k) & 1) as u8;
                k += 1;
            }
        }
        let replayed = classical_replay(&config.sigma, &rec)?;
        let weight = match dense::replay_record(&rec, sigma.clone()) {
            Ok(d) => d.probability * 2f64.powi(replayed.n_random as i32),
            Err(Error::Contradiction { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        let indicator = if replayed.indicator { 1.0 } else { 0.0 };
        if (weight - indicator).abs() > 1e-9 {
            mismatches += 1;
        }
    }
    Ok(Some(mismatches))
}

/// A micro χ instance (L = 2, T ≤ 3) for indicator checks.
pub fn random_micro_chi_config<R: Rng + ?Sized>(rng: &mut R) -> ChiConfig {
    let kind = [NoiseKind::Reset, NoiseKind::Depolarize, NoiseKind::Dephase][rng.gen_range(0..3)];
    let c = CircuitConfig::new(2, rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8), rng.gen(), kind)
        .with_steps(rng.gen_range(1..=3))
        .with_seed(rng.gen());
    ChiConfig::new(c, 1)
}
