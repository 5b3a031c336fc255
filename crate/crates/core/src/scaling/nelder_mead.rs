use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once the largest vertex distance from the best vertex is below this.
    pub diameter_tol: f64,
    pub max_iterations: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { reflection: 1.0, expansion: 2.0, contraction: 0.5, shrink: 0.5, diameter_tol: 1e-6, max_iterations: 500 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Initial simplex: `x0` plus one vertex per coordinate with that
/// coordinate scaled by 1.05 (or set to 0.05 when it is zero).
pub fn default_simplex(x0: &[f64]) -> Vec<Vec<f64>> {
    let mut s = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] = if v[i] != 0.0 { 1.05 * v[i] } else { 0.05 };
        s.push(v);
    }
    s
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> Result<f64> {
    let v = f(x);
    if v.is_nan() {
        return Err(Error::NonFiniteObjective(x.to_vec()));
    }
    Ok(v)
}

fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Minimizes `f` from `x0`. NaN values are errors; `+∞` acts as a barrier.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<NelderMeadResult> {
    let mut simplex = default_simplex(x0);
    let mut values = Vec::with_capacity(simplex.len());
    for v in &simplex {
        let fv = eval(&mut f, v)?;
        if !fv.is_finite() {
            return Err(Error::NonFiniteObjective(v.clone()));
        }
        values.push(fv);
    }
    let n = x0.len();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN").then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..].iter().map(|v| distance(v, &simplex[0])).fold(0.0, f64::max);
        if diameter < opts.diameter_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = lerp(&centroid, &worst, -opts.reflection);
        let fr = eval(&mut f, &reflected)?;
        if fr < values[0] {
            let expanded = lerp(&centroid, &reflected, opts.expansion);
            let fe = eval(&mut f, &expanded)?;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (candidate, fc, accept) = if fr < values[n] {
            let c = lerp(&centroid, &reflected, opts.contraction);
            let fc = eval(&mut f, &c)?;
            (c, fc, fc <= fr)
        } else {
            let c = lerp(&centroid, &worst, opts.contraction);
            let fc = eval(&mut f, &c)?;
            (c, fc, fc < values[n])
        };
        if accept {
            simplex[n] = candidate;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = lerp(&best, &simplex[i], opts.shrink);
            values[i] = eval(&mut f, &simplex[i])?;
        }
    }
    Ok(NelderMeadResult { x: simplex[0].clone(), value: values[0], iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let r = nelder_mead(|x| (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2), &[0.0, 1.0], &Default::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 2.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = nelder_mead(f, &[-1.0, 1.0], &Default::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn deterministic_trajectory() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) * 3.0 + (x[1] + 0.7).abs();
        let a = nelder_mead(f, &[0.5, 0.5], &Default::default()).unwrap();
        let b = nelder_mead(f, &[0.5, 0.5], &Default::default()).unwrap();
        assert_eq!(a.x[0].to_bits(), b.x[0].to_bits());
        assert_eq!(a.x[1].to_bits(), b.x[1].to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn nan_is_an_error_and_infinity_a_barrier() {
        let r = nelder_mead(|x| if x[0] > 0.2 { f64::NAN } else { -x[0] }, &[0.1], &Default::default());
        assert!(matches!(r, Err(Error::NonFiniteObjective(_))));
        let r = nelder_mead(|x| if x[0] <= 0.0 { f64::INFINITY } else { (x[0] - 0.5).powi(2) }, &[0.2], &Default::default()).unwrap();
        assert!((r.x[0] - 0.5).abs() < 1e-4);
    }
}
