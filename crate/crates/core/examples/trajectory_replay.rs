//! Runs one trajectory, round-trips its event record through text and replays
//! it in both simulation modes.

use iclab::circuit::{replay, run_trajectory, CircuitConfig, EventRecord, NoiseKind, SimMode, SimState};
use iclab::observables::entropy_report;

fn main() -> iclab::Result<()> {
    let config = CircuitConfig::new(8, 0.1, 0.3, 0.5, NoiseKind::Depolarize)
        .with_mode(SimMode::FullAncilla)
        .with_time_series(true)
        .with_seed(42);
    let traj = run_trajectory(&config, 0)?;
    println!("I_C(t) = {:?}", traj.series.as_ref().unwrap());
    println!(
        "{} measurements, {} QE operations, {} ancillas",
        traj.record.num_measurements(),
        traj.record.num_qe(),
        traj.state.ancilla_count()
    );

    let text = traj.record.to_text();
    println!("record header:\n{}", text.lines().take(5).collect::<Vec<_>>().join("\n"));
    let record = EventRecord::from_text(&text)?;

    for mode in [SimMode::FullAncilla, SimMode::Compressed] {
        let r = replay(&record, SimState::init_bell_pairs(config.l, mode)?, false)?;
        println!("{mode:?}: {:?}, {} rows", entropy_report(&r.state), r.state.generators().len());
    }
    Ok(())
}
