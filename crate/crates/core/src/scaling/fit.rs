use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default polynomial degree of the collapse objective.
pub const DEFAULT_DEGREE: usize = 12;

/// Legendre polynomials `P_0..=P_degree` at `t ∈ [-1, 1]`.
fn legendre_row(t: f64, degree: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if degree >= 1 {
        out[1] = t;
    }
    for k in 2..=degree {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * t * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// Maps `x` affinely onto `[-1, 1]`.
fn unit_interval(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = (hi - lo) / 2.0;
    if half > 0.0 {
        ((hi + lo) / 2.0, half)
    } else {
        (lo, 1.0)
    }
}

/// Least-squares polynomial fit of `y` on `x`; returns the (weighted) mean
/// squared deviation `Σ w r² / Σ w`. Weights default to 1.
///
/// The fit is done in a Legendre basis on `x` mapped to `[-1, 1]` and solved
/// by SVD, which keeps degree 12 well conditioned.
pub fn polyfit_residue(points: &[(f64, f64)], weights: Option<&[f64]>, degree: usize) -> Result<f64> {
    let n = points.len();
    if n < degree + 1 {
        return Err(Error::Underdetermined { points: n, degree });
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::InvalidConfig(format!("{} weights for {} points", w.len(), n)));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::NonFiniteObjective(xs));
    }
    let (mid, half) = unit_interval(&xs);
    let mut a = DMatrix::<f64>::zeros(n, degree + 1);
    let mut b = DVector::<f64>::zeros(n);
    let mut row = vec![0.0; degree + 1];
    for (i, &(x, y)) in points.iter().enumerate() {
        let sw = weights.map_or(1.0, |w| w[i].sqrt());
        legendre_row((x - mid) / half, degree, &mut row);
        for (k, v) in row.iter().enumerate() {
            a[(i, k)] = v * sw;
        }
        b[i] = y * sw;
    }
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-12).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let resid = &a * coef - &b;
    let total_w: f64 = weights.map_or(n as f64, |w| w.iter().sum());
    Ok(resid.norm_squared() / total_w)
}
