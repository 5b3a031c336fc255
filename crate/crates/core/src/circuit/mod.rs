//! Brick-wall monitored circuits with noise and QE (ancilla-swap) events.

mod config;
mod engine;
mod record;
mod state;

pub use config::{short_hash, CircuitConfig, NoiseKind, SimMode};
pub use engine::{
    apply_gate_events, brick_wall_layer, measurement_layer, noise_qe_layer, replay, run_trajectory, Replay, Trajectory,
};
pub(crate) use engine::evolve;
pub use record::{ChannelEvent, EventRecord, GateEvent, StepRecord};
pub use state::SimState;
