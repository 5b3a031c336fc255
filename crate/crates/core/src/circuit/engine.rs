use rand::Rng;

use super::config::CircuitConfig;
use super::record::{ChannelEvent, EventRecord, GateEvent, StepRecord};
use super::state::SimState;
use crate::clifford::{gate_by_id, random_two_qubit_clifford_id};
use crate::error::{Error, Result};
use crate::observables::coherent_information;
use crate::rng::{outcome_rng, skeleton_rng};
use crate::tableau::Outcome;

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub state: SimState,
    pub record: EventRecord,
    /// `I_C` before the first step and after each step, when requested.
    pub series: Option<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct Replay {
    pub state: SimState,
    /// Forced measurements whose outcome was genuinely random.
    pub n_random: usize,
    /// Determinism flag of every recorded measurement, in record order.
    pub was_random: Vec<bool>,
    pub series: Option<Vec<i64>>,
}

/// Random two-qubit Cliffords on `(0,1),(2,3),…` for even `t` and
/// `(1,2),(3,4),…` for odd `t`, open boundary.
pub fn brick_wall_layer<R: Rng + ?Sized>(state: &mut SimState, t: usize, rng: &mut R) -> Result<Vec<GateEvent>> {
    let l = state.num_system();
    let mut gates = Vec::with_capacity(l / 2);
    let mut a = t % 2;
    while a + 1 < l {
        let id = random_two_qubit_clifford_id(rng);
        state.apply_gate(gate_by_id(id), &[a, a + 1])?;
        gates.push(GateEvent { gate: id, a, b: a + 1 });
        a += 2;
    }
    Ok(gates)
}

/// Each system qubit is measured in Z with probability `p`. Selection uses
/// `skeleton`; every selected qubit draws one coin from `outcomes`, whether or
/// not the result turns out to be random.
pub fn measurement_layer<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    state: &mut SimState,
    p: f64,
    skeleton: &mut R1,
    outcomes: &mut R2,
) -> Result<Vec<(usize, u8)>> {
    let mut out = Vec::new();
    for q in 0..state.num_system() {
        let u: f64 = skeleton.gen();
        if u < p {
            let coin = outcomes.gen::<bool>() as u8;
            let r = state.measure_z_with(q, Outcome::Coin(coin))?;
            out.push((q, r.outcome));
        }
    }
    Ok(out)
}

/// Noise with probability `q·q_t`, QE with probability `(1−q)·q_t`,
/// exclusive per qubit, in ascending qubit order.
pub fn noise_qe_layer<R: Rng + ?Sized>(state: &mut SimState, config: &CircuitConfig, rng: &mut R) -> Result<StepRecord> {
    let mut step = StepRecord::default();
    let qn = config.q_noise();
    for q in 0..state.num_system() {
        let u: f64 = rng.gen();
        if u < qn {
            state.apply_noise(q, config.noise_kind)?;
            step.noise.push((q, config.noise_kind));
        } else if u < config.q_t {
            let a = state.apply_qe(q)?;
            step.qe.push((q, a));
        }
    }
    Ok(step)
}

/// Runs `config.steps` steps on `state`, appending to `record`.
pub(crate) fn evolve<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    config: &CircuitConfig,
    state: &mut SimState,
    record: &mut EventRecord,
    skeleton: &mut R1,
    outcomes: &mut R2,
    series: &mut Option<Vec<i64>>,
) -> Result<()> {
    if let Some(s) = series.as_mut() {
        s.push(coherent_information(state));
    }
    for t in 0..config.steps {
        let gates = if config.with_unitaries { brick_wall_layer(state, t, skeleton)? } else { Vec::new() };
        let measurements = measurement_layer(state, config.p, skeleton, outcomes)?;
        let mut step = noise_qe_layer(state, config, skeleton)?;
        step.gates = gates;
        step.measurements = measurements;
        record.steps.push(step);
        if let Some(s) = series.as_mut() {
            s.push(coherent_information(state));
        }
    }
    state.compress();
    Ok(())
}

/// One realization of the monitored circuit on Bell-paired system and
/// reference registers.
pub fn run_trajectory(config: &CircuitConfig, realization: u64) -> Result<Trajectory> {
    config.validate()?;
    let mut skeleton = skeleton_rng(config.seed, realization);
    let mut outcomes = outcome_rng(config.seed, realization);
    let mut state = SimState::init_bell_pairs(config.l, config.mode)?;
    let mut record = EventRecord {
        seed: config.seed,
        realization,
        config_hash: config.config_hash(),
        num_system: config.l,
        ..Default::default()
    };
    let mut series = config.record_time_series.then(Vec::new);
    evolve(config, &mut state, &mut record, &mut skeleton, &mut outcomes, &mut series)?;
    Ok(Trajectory { state, record, series })
}

/// Applies a list of recorded gates.
pub fn apply_gate_events(state: &mut SimState, gates: &[GateEvent]) -> Result<()> {
    for g in gates {
        state.apply_gate(gate_by_id(g.gate), &[g.a, g.b])?;
    }
    Ok(())
}

/// Replays `record` (encoding layers first, then every step) on `initial`
/// with all measurement outcomes forced. A forced outcome that contradicts a
/// deterministic one yields [`Error::Contradiction`].
pub fn replay(record: &EventRecord, initial: SimState, record_series: bool) -> Result<Replay> {
    let mut state = initial;
    if record.num_system != state.num_system() {
        return Err(Error::InvalidConfig(format!(
            "record has {} system qubits, state has {}",
            record.num_system,
            state.num_system()
        )));
    }
    for layer in &record.encode {
        apply_gate_events(&mut state, layer)?;
    }
    let mut series = record_series.then(Vec::new);
    if let Some(s) = series.as_mut() {
        s.push(coherent_information(&state));
    }
    let mut was_random = Vec::with_capacity(record.num_measurements());
    for step in &record.steps {
        apply_gate_events(&mut state, &step.gates)?;
        for &(q, b) in &step.measurements {
            was_random.push(state.measure_z_with(q, Outcome::Forced(b))?.was_random);
        }
        for ev in step.channel_events() {
            match ev {
                ChannelEvent::Noise { qubit, kind } => state.apply_noise(qubit, kind)?,
                ChannelEvent::Qe { qubit, ancilla } => {
                    if ancilla != state.ancilla_count() {
                        return Err(Error::Parse(format!(
                            "QE ancilla index {ancilla} does not match allocation order {}",
                            state.ancilla_count()
                        )));
                    }
                    state.apply_qe(qubit)?;
                }
            }
        }
        if let Some(s) = series.as_mut() {
            s.push(coherent_information(&state));
        }
    }
    state.compress();
    let n_random = was_random.iter().filter(|&&r| r).count();
    Ok(Replay { state, n_random, was_random, series })
}
