//! Conditional entropies, coherent information and convergence time.

use crate::circuit::{SimMode, SimState};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EntropyReport {
    pub s_s_given_a: i64,
    pub s_sr_given_a: i64,
    pub i_c: i64,
}

/// `S(M|A)` for `M ⊆ S ∪ R`.
///
/// Compressed mode: `|M| − y` with `y` the dimension of the stored group's
/// subgroup supported inside `M`. Full mode: `S(M ∪ A) − S(A)`.
pub fn conditional_entropy(state: &SimState, m: &[usize]) -> i64 {
    let g = state.generators();
    match state.mode() {
        SimMode::Compressed => {
            let stored = state.num_system() + state.num_reference();
            let comp: Vec<usize> = (0..stored).filter(|q| !m.contains(q)).collect();
            let y = g.rank() - g.rank_on(&comp);
            m.len() as i64 - y as i64
        }
        SimMode::FullAncilla => {
            let a = state.ancilla_qubits();
            let mut ma: Vec<usize> = m.to_vec();
            ma.extend(&a);
            g.subsystem_entropy(&ma) as i64 - g.subsystem_entropy(&a) as i64
        }
    }
}

/// `I_C = S(S|A) − S(SR|A)`.
pub fn coherent_information(state: &SimState) -> i64 {
    if state.mode() == SimMode::Compressed && state.num_reference() == state.num_system() {
        // S(S|A) − S(SR|A) = (L − rank + rank_R) − (2L − rank)
        let g = state.generators();
        return g.rank_on(&state.reference_qubits()) as i64 - state.num_system() as i64;
    }
    entropy_report(state).i_c
}

pub fn entropy_report(state: &SimState) -> EntropyReport {
    let s = state.system_qubits();
    let mut sr = s.clone();
    sr.extend(state.reference_qubits());
    let s_s_given_a = conditional_entropy(state, &s);
    let s_sr_given_a = conditional_entropy(state, &sr);
    EntropyReport { s_s_given_a, s_sr_given_a, i_c: s_s_given_a - s_sr_given_a }
}

/// First index `t` with `|series[t] − series[last]| < threshold`.
pub fn convergence_time(series: &[f64], threshold: f64) -> Result<usize> {
    let last = *series.last().ok_or_else(|| Error::InvalidConfig("empty time series".into()))?;
    Ok(series.iter().position(|v| (v - last).abs() < threshold).expect("last entry always qualifies"))
}

/// Default threshold for [`convergence_time`].
pub const CONVERGENCE_THRESHOLD: f64 = 0.05;
