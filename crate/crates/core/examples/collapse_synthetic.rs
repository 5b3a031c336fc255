//! Finite-size-scaling collapse of synthetic data with a planted critical point.

use iclab::scaling::{collapse, rescaled_table, CollapseOptions, CollapseParams, DataPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> iclab::Result<()> {
    let (q_c, nu) = (0.45, 1.3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let mut points = Vec::new();
    for l in [16usize, 32, 64, 128] {
        for k in 0..15 {
            let q = 0.40 + 0.007 * k as f64;
            let y = -((q - q_c) * (l as f64).powf(1.0 / nu)).tanh() * 2.0 + noise.sample(&mut rng);
            points.push(DataPoint { q, l, y, sigma_y: 0.02 });
        }
    }
    let out = collapse(&points, CollapseParams { q_c: 0.43, nu: 1.0 }, &CollapseOptions::default())?;
    print!("{}", out.to_json());
    let table = rescaled_table(&points, CollapseParams { q_c: out.q_c, nu: out.nu })?;
    println!("{}", table.lines().take(6).collect::<Vec<_>>().join("\n"));
    Ok(())
}
