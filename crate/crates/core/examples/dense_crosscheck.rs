//! Replays random small circuits through the compressed, full-ancilla and
//! dense state-vector simulators and compares conditional entropies.

use iclab::crosscheck::{cross_check, random_small_config};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> iclab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut shown = 0;
    while shown < 8 {
        let config = random_small_config(&mut rng);
        let Some(c) = cross_check(&config, 0)? else { continue };
        shown += 1;
        println!(
            "L={} T={:2} {:10} width={:2}  I_C stabilizer={:2} dense={:+.6}  {}",
            config.l,
            config.steps,
            config.noise_kind.as_str(),
            c.width,
            c.compressed.i_c,
            c.oracle.i_c,
            if c.agrees() { "agree" } else { "DISAGREE" }
        );
    }
    Ok(())
}
