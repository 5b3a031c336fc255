//! The post-selection-free χ estimator on both sides of the transition.

use iclab::chi::{estimate_chi, ChiConfig};
use iclab::circuit::{CircuitConfig, NoiseKind};

fn main() -> iclab::Result<()> {
    for l in [8, 12] {
        for q in [0.1, 0.3, 0.36, 0.45, 0.8] {
            let circuit = CircuitConfig::new(l, 0.0, 0.1, q, NoiseKind::Depolarize).with_seed(1);
            let est = estimate_chi(&ChiConfig::new(circuit, 400))?;
            println!(
                "L={l:2} q={q:.2}  chi = {:.3} ± {:.3}  ({} of {} replays consistent)",
                est.chi_hat, est.stderr, est.n_indicator_pass, est.n_runs
            );
        }
    }
    Ok(())
}
