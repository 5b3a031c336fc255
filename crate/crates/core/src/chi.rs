//! Post-selection-free χ probe.
//!
//! A device run evolves an encoded input ρ through the monitored circuit with
//! Born-sampled outcomes. A classical replay pushes a second input σ through
//! the same record with every outcome forced. If the replay is consistent,
//! σ's post-circuit ancilla stabilizers are measured on the device ancillas;
//! χ is the fraction of runs in which the replay is consistent and every
//! measured generator returns +1.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{brick_wall_layer, evolve, replay, CircuitConfig, EventRecord, GateEvent, SimMode, SimState};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator};
use crate::rng::{outcome_rng, skeleton_rng};
use crate::tableau::{GeneratorSet, Mode};

/// Single-qubit stabilizer input states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProductState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl ProductState {
    fn stabilizer(self) -> (Pauli, bool) {
        match self {
            ProductState::Zero => (Pauli::Z, false),
            ProductState::One => (Pauli::Z, true),
            ProductState::Plus => (Pauli::X, false),
            ProductState::Minus => (Pauli::X, true),
            ProductState::PlusI => (Pauli::Y, false),
            ProductState::MinusI => (Pauli::Y, true),
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            ProductState::Zero => "0",
            ProductState::One => "1",
            ProductState::Plus => "+",
            ProductState::Minus => "-",
            ProductState::PlusI => "i",
            ProductState::MinusI => "j",
        }
    }
}

/// One product-state tag per system qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InitialStateSpec(pub Vec<ProductState>);

impl InitialStateSpec {
    /// `|+⟩^{L/2} ⊗ |0⟩^{L/2}`.
    pub fn half_plus(l: usize) -> Self {
        let mut v = vec![ProductState::Plus; l / 2];
        v.extend(std::iter::repeat_n(ProductState::Zero, l - l / 2));
        Self(v)
    }

    pub fn all(l: usize, s: ProductState) -> Self {
        Self(vec![s; l])
    }

    /// Parses one symbol per qubit from `0 1 + - i j` (`j` is `|−i⟩`).
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(ProductState::Zero),
                '1' => Ok(ProductState::One),
                '+' => Ok(ProductState::Plus),
                '-' => Ok(ProductState::Minus),
                'i' => Ok(ProductState::PlusI),
                'j' => Ok(ProductState::MinusI),
                _ => Err(Error::Parse(format!("unknown product state symbol {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn generators(&self) -> GeneratorSet {
        let n = self.0.len();
        let rows: Vec<PauliOperator> = self
            .0
            .iter()
            .enumerate()
            .map(|(q, s)| {
                let (p, neg) = s.stabilizer();
                PauliOperator::single(n, q, p).negated_if(neg)
            })
            .collect();
        GeneratorSet::from_rows(n, &rows, Mode::Exact).expect("single-qubit stabilizers are valid")
    }
}

impl std::fmt::Display for InitialStateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            f.write_str(s.symbol())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiConfig {
    pub circuit: CircuitConfig,
    pub rho: InitialStateSpec,
    pub sigma: InitialStateSpec,
    pub encode_depth: usize,
    pub runs: usize,
}

impl ChiConfig {
    /// ρ = |+⟩^{L/2}|0⟩^{L/2}, σ = |0⟩^L, encoding depth L.
    pub fn new(circuit: CircuitConfig, runs: usize) -> Self {
        let l = circuit.l;
        Self {
            circuit: circuit.with_mode(SimMode::FullAncilla),
            rho: InitialStateSpec::half_plus(l),
            sigma: InitialStateSpec::all(l, ProductState::Zero),
            encode_depth: l,
            runs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        if self.runs == 0 {
            return Err(Error::InvalidConfig("χ needs at least one run".into()));
        }
        if self.rho.len() != self.circuit.l || self.sigma.len() != self.circuit.l {
            return Err(Error::InvalidConfig("input state length must equal L".into()));
        }
        if self.circuit.mode != SimMode::FullAncilla {
            return Err(Error::InvalidConfig("χ requires full_ancilla mode".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiEstimate {
    pub chi_hat: f64,
    pub stderr: f64,
    pub n_runs: usize,
    pub n_indicator_pass: usize,
    pub n_success: usize,
}

impl ChiEstimate {
    pub fn from_runs(runs: &[ChiRun]) -> Self {
        let n = runs.len();
        let s = runs.iter().filter(|r| r.success).count();
        let pass = runs.iter().filter(|r| r.indicator).count();
        let chi = s as f64 / n.max(1) as f64;
        Self {
            chi_hat: chi,
            stderr: (chi * (1.0 - chi) / n.max(1) as f64).sqrt(),
            n_runs: n,
            n_indicator_pass: pass,
            n_success: s,
        }
    }
}

/// Per-run log entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChiRun {
    pub run: u64,
    pub indicator: bool,
    pub n_random: usize,
    pub l_sigma: usize,
    pub success: bool,
}

/// Outcome of replaying a record on σ.
#[derive(Clone, Debug)]
pub struct ClassicalReplay {
    pub indicator: bool,
    /// Stabilizer generators of σ_A^m, on the ancilla register.
    pub generators: Vec<PauliOperator>,
    pub n_random: usize,
}

/// Product state `spec` followed by `depth` unitary-only brick-wall layers.
pub fn encode<R: Rng + ?Sized>(spec: &InitialStateSpec, rng: &mut R, depth: usize) -> Result<(GeneratorSet, Vec<Vec<GateEvent>>)> {
    let mut state = SimState::from_system(spec.generators(), SimMode::FullAncilla);
    let mut layers = Vec::with_capacity(depth);
    for t in 0..depth {
        layers.push(brick_wall_layer(&mut state, t, rng)?);
    }
    Ok((state.generators().clone(), layers))
}

/// Device execution of run `run`: encoding and circuit with Born outcomes.
pub fn device_run(config: &ChiConfig, run: u64) -> Result<(EventRecord, SimState)> {
    let (record, state, _) = device_run_with_rng(config, run)?;
    Ok((record, state))
}

fn device_run_with_rng(config: &ChiConfig, run: u64) -> Result<(EventRecord, SimState, impl Rng)> {
    config.validate()?;
    let mut skeleton = skeleton_rng(config.circuit.seed, run);
    let mut outcomes = outcome_rng(config.circuit.seed, run);
    let (gens, layers) = encode(&config.rho, &mut skeleton, config.encode_depth)?;
    let mut state = SimState::from_system(gens, SimMode::FullAncilla);
    let mut record = EventRecord {
        seed: config.circuit.seed,
        realization: run,
        config_hash: config.circuit.config_hash(),
        num_system: config.circuit.l,
        encode: layers,
        steps: Vec::new(),
    };
    let mut circuit = config.circuit.clone();
    circuit.record_time_series = false;
    evolve(&circuit, &mut state, &mut record, &mut skeleton, &mut outcomes, &mut None)?;
    Ok((record, state, outcomes))
}

/// Replays `record` on σ with forced outcomes; a contradiction gives
/// indicator 0. On success the system is traced out, leaving σ_A^m.
pub fn classical_replay(sigma: &InitialStateSpec, record: &EventRecord) -> Result<ClassicalReplay> {
    let initial = SimState::from_system(sigma.generators(), SimMode::FullAncilla);
    match replay(record, initial, false) {
        Ok(r) => {
            let system = r.state.system_qubits();
            let on_a = r.state.generators().trace_out(&system)?;
            Ok(ClassicalReplay { indicator: true, generators: on_a.rows(), n_random: r.n_random })
        }
        Err(Error::Contradiction { .. }) => Ok(ClassicalReplay { indicator: false, generators: Vec::new(), n_random: 0 }),
        Err(e) => Err(e),
    }
}

/// Measures each generator (given on the ancilla register) on the device
/// state; success iff every outcome is +1.
pub fn measure_ancilla_generators<R: Rng + ?Sized>(
    device: &mut SimState,
    generators: &[PauliOperator],
    rng: &mut R,
) -> Result<bool> {
    let anc = device.ancilla_qubits();
    let width = device.generators().num_qubits();
    let mut ok = true;
    for g in generators {
        if g.num_qubits() != anc.len() {
            return Err(Error::SupportOutsideAncilla(g.to_string()));
        }
        let op = g.embed(width, &anc);
        let r = device.measure_pauli_op(&op, rng)?;
        ok &= r.outcome == 0;
    }
    Ok(ok)
}

/// One full device + replay + verification run.
pub fn chi_run(config: &ChiConfig, run: u64) -> Result<ChiRun> {
    let (record, mut device, mut rng) = device_run_with_rng(config, run)?;
    let replayed = classical_replay(&config.sigma, &record)?;
    let success = replayed.indicator && measure_ancilla_generators(&mut device, &replayed.generators, &mut rng)?;
    Ok(ChiRun {
        run,
        indicator: replayed.indicator,
        n_random: replayed.n_random,
        l_sigma: replayed.generators.len(),
        success,
    })
}

/// All runs `0..config.runs`, in parallel, ordered by run index.
pub fn chi_runs(config: &ChiConfig) -> Result<Vec<ChiRun>> {
    config.validate()?;
    (0..config.runs as u64).into_par_iter().map(|r| chi_run(config, r)).collect()
}

pub fn estimate_chi(config: &ChiConfig) -> Result<ChiEstimate> {
    Ok(ChiEstimate::from_runs(&chi_runs(config)?))
}

/// Exact χ of the realization used by run `run`, summed over every outcome
/// string with the dense simulator:
/// `Σ_m p_ρ^m · indicator_m · Tr(ρ_A^m ∏_k (1+g_k)/2)`.
pub fn exact_chi_for_realization(config: &ChiConfig, run: u64) -> Result<f64> {
    use crate::dense::{replay_record, PureState, Role, MAX_DENSE_QUBITS};
    let (record, _) = device_run(config, run)?;
    let l = config.circuit.l;
    if crate::dense::replay_width(&record, l) > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits { max: MAX_DENSE_QUBITS, requested: crate::dense::replay_width(&record, l) });
    }
    let rho = PureState::from_generators(&config.rho.generators())?;
    let n_meas = record.num_measurements();
    let mut total = 0.0;
    for bits in 0..1u64 << n_meas {
        let mut rec = record.clone();
        let mut k = 0;
        for step in &mut rec.steps {
            for m in &mut step.measurements {
                m.1 = ((bits >> k) & 1) as u8;
                k += 1;
            }
        }
        let dense = match replay_record(&rec, rho.clone()) {
            Ok(d) => d,
            Err(Error::Contradiction { .. }) => continue,
            Err(e) => return Err(e),
        };
        let replayed = classical_replay(&config.sigma, &rec)?;
        if !replayed.indicator {
            continue;
        }
        let mut st = dense.state;
        let anc = st.qubits_with(Role::Ancilla);
        let width = st.num_qubits();
        let mut pass = 1.0;
        for g in &replayed.generators {
            pass *= st.project_pauli(&g.embed(width, &anc), 0)?;
            if pass <= crate::dense::BRANCH_EPS {
                pass = 0.0;
                break;
            }
        }
        total += dense.probability * pass;
    }
    Ok(total)
}
