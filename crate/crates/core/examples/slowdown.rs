//! Averaged I_C(t) at q = 0.5 and the resulting convergence times.

use iclab::experiment::{slowdown, Command, Profile, SweepSpec};

fn main() -> iclab::Result<()> {
    for with_unitaries in [true, false] {
        let spec = SweepSpec {
            l: vec![8, 16, 32],
            n: 200,
            with_unitaries,
            ..SweepSpec::defaults(Command::Slowdown, Profile::Desk)
        };
        let out = slowdown(&spec)?;
        for c in &out.curves {
            let step = (c.mean.len() / 6).max(1);
            let sample: Vec<String> = c.mean.iter().step_by(step).map(|v| format!("{v:.2}")).collect();
            println!("unitaries={with_unitaries:5} L={:2} t_c={:3}  I_C(t): {}", c.l, c.t_c, sample.join(" "));
        }
    }
    Ok(())
}
