//! A small coherent-information sweep across the reset-noise transition.

use iclab::experiment::{sweep, Command, Profile, SweepSpec};

fn main() -> iclab::Result<()> {
    let spec = SweepSpec {
        l: vec![8, 16, 32],
        n: 200,
        q_start: 0.3,
        q_stop: 0.7,
        q_step: 0.1,
        ..SweepSpec::defaults(Command::Sweep, Profile::Desk)
    };
    let out = sweep(&spec)?;
    for r in &out.rows {
        println!("L={:3} q={:.2}  I_C = {:+7.3} ± {:.3}", r.l, r.q, r.mean, r.stderr);
    }
    Ok(())
}
