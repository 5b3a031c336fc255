use std::collections::{BTreeSet, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{polyfit_residue, DEFAULT_DEGREE};
use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use crate::error::{Error, Result};

/// One averaged observable at `(q, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub q: f64,
    pub l: usize,
    pub y: f64,
    pub sigma_y: f64,
}

impl DataPoint {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::InvalidConfig(format!("L must be at least 2, got {}", self.l)));
        }
        if !(self.sigma_y >= 0.0) {
            return Err(Error::InvalidConfig(format!("sigma_y must be non-negative, got {}", self.sigma_y)));
        }
        if !self.q.is_finite() || !self.y.is_finite() {
            return Err(Error::InvalidConfig("non-finite data point".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseParams {
    pub q_c: f64,
    pub nu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseOutput {
    pub q_c: f64,
    pub nu: f64,
    pub epsilon_min: f64,
    pub q_c_interval: (f64, f64),
    pub nu_interval: (f64, f64),
    pub n_points: usize,
    pub distinct_sizes: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseOptions {
    pub degree: usize,
    /// Weight residuals by `1/σ_y²`.
    pub weighted: bool,
    /// Keep only rescaled points with `|x| ≤ window`.
    pub x_window: Option<f64>,
    pub threshold_factor: f64,
    pub dq: f64,
    pub dnu: f64,
    /// Cap on grid steps from the optimum along either axis.
    pub max_grid_steps: usize,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            degree: DEFAULT_DEGREE,
            weighted: false,
            x_window: None,
            threshold_factor: 1.1,
            dq: 1e-3,
            dnu: 1e-2,
            max_grid_steps: 200,
            nelder_mead: NelderMeadOptions::default(),
        }
    }
}

/// `x = (q − q_c)·L^{1/ν}` with `y` unchanged.
pub fn rescale(points: &[DataPoint], params: CollapseParams) -> Result<Vec<(f64, f64)>> {
    if !(params.nu > 0.0) {
        return Err(Error::InvalidConfig(format!("nu must be positive, got {}", params.nu)));
    }
    Ok(points.iter().map(|p| ((p.q - params.q_c) * (p.l as f64).powf(1.0 / params.nu), p.y)).collect())
}

/// Collapse residue at `params`; `+∞` for `ν ≤ 0` or when the window leaves
/// too few points.
pub fn collapse_objective(points: &[DataPoint], params: CollapseParams, opts: &CollapseOptions) -> Result<f64> {
    if !(params.nu > 0.0) {
        return Ok(f64::INFINITY);
    }
    let xy = rescale(points, params)?;
    let mut kept = Vec::with_capacity(xy.len());
    let mut w = Vec::with_capacity(xy.len());
    for (p, &(x, y)) in points.iter().zip(&xy) {
        if opts.x_window.is_none_or(|win| x.abs() <= win) {
            kept.push((x, y));
            w.push(1.0 / (p.sigma_y * p.sigma_y));
        }
    }
    if kept.len() < opts.degree + 1 {
        if opts.x_window.is_some() {
            return Ok(f64::INFINITY);
        }
        return Err(Error::Underdetermined { points: kept.len(), degree: opts.degree });
    }
    polyfit_residue(&kept, opts.weighted.then_some(&w[..]), opts.degree)
}

/// Bounding box of the connected grid region around `optimum` where
/// `objective ≤ factor·epsilon_min`, found by flood fill on steps `(dq, dν)`.
pub fn uncertainty_region<F>(
    objective: F,
    optimum: CollapseParams,
    epsilon_min: f64,
    factor: f64,
    dq: f64,
    dnu: f64,
    max_steps: usize,
) -> ((f64, f64), (f64, f64))
where
    F: Fn(CollapseParams) -> f64 + Sync,
{
    let threshold = factor * epsilon_min;
    let at = |i: i64, j: i64| CollapseParams { q_c: optimum.q_c + i as f64 * dq, nu: optimum.nu + j as f64 * dnu };
    let cap = max_steps as i64;
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    seen.insert((0, 0));
    let mut frontier: VecDeque<(i64, i64)> = VecDeque::from([(0, 0)]);
    let (mut imin, mut imax, mut jmin, mut jmax) = (0i64, 0i64, 0i64, 0i64);
    while !frontier.is_empty() {
        // expand one BFS layer at a time so evaluations can run in parallel
        let mut next: BTreeSet<(i64, i64)> = BTreeSet::new();
        for &(i, j) in &frontier {
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let c = (i + di, j + dj);
                if c.0.abs() <= cap && c.1.abs() <= cap && !seen.contains(&c) {
                    next.insert(c);
                }
            }
        }
        let cells: Vec<(i64, i64)> = next.into_iter().collect();
        let values: Vec<f64> = cells.par_iter().map(|&(i, j)| objective(at(i, j))).collect();
        frontier.clear();
        for (c, v) in cells.into_iter().zip(values) {
            seen.insert(c);
            if v <= threshold {
                imin = imin.min(c.0);
                imax = imax.max(c.0);
                jmin = jmin.min(c.1);
                jmax = jmax.max(c.1);
                frontier.push_back(c);
            }
        }
    }
    (
        (at(imin, 0).q_c, at(imax, 0).q_c),
        (at(0, jmin).nu, at(0, jmax).nu),
    )
}

/// Full pipeline: rescale, polynomial residue, Nelder–Mead, uncertainty grid.
pub fn collapse(points: &[DataPoint], initial: CollapseParams, opts: &CollapseOptions) -> Result<CollapseOutput> {
    for p in points {
        p.validate()?;
    }
    if opts.weighted && points.iter().any(|p| p.sigma_y == 0.0) {
        return Err(Error::InvalidConfig("weighted collapse needs sigma_y > 0 everywhere".into()));
    }
    if points.len() < opts.degree + 1 {
        return Err(Error::Underdetermined { points: points.len(), degree: opts.degree });
    }
    if !(initial.nu > 0.0) {
        return Err(Error::InvalidConfig(format!("initial nu must be positive, got {}", initial.nu)));
    }
    let distinct_sizes = points.iter().map(|p| p.l).collect::<BTreeSet<_>>().len();
    if distinct_sizes < 3 {
        log::warn!("collapse over {distinct_sizes} system size(s); nu is poorly constrained");
    }
    // errors in the objective surface as NaN, which Nelder–Mead rejects
    let objective = |v: &[f64]| {
        collapse_objective(points, CollapseParams { q_c: v[0], nu: v[1] }, opts).unwrap_or(f64::NAN)
    };
    let best = nelder_mead(objective, &[initial.q_c, initial.nu], &opts.nelder_mead)?;
    let optimum = CollapseParams { q_c: best.x[0], nu: best.x[1] };
    let (q_c_interval, nu_interval) = uncertainty_region(
        |c| collapse_objective(points, c, opts).unwrap_or(f64::INFINITY),
        optimum,
        best.value,
        opts.threshold_factor,
        opts.dq,
        opts.dnu,
        opts.max_grid_steps,
    );
    Ok(CollapseOutput {
        q_c: optimum.q_c,
        nu: optimum.nu,
        epsilon_min: best.value,
        q_c_interval,
        nu_interval,
        n_points: points.len(),
        distinct_sizes,
        iterations: best.iterations,
        converged: best.converged,
    })
}

impl CollapseOutput {
    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "q_c": self.q_c,
            "nu": self.nu,
            "epsilon_min": self.epsilon_min,
            "intervals": {
                "q_c": [self.q_c_interval.0, self.q_c_interval.1],
                "nu": [self.nu_interval.0, self.nu_interval.1],
            },
            "n_points": self.n_points,
            "distinct_sizes": self.distinct_sizes,
            "iterations": self.iterations,
            "converged": self.converged,
        });
        serde_json::to_string_pretty(&v).expect("plain JSON values") + "\n"
    }
}

/// Whitespace-separated `L q x y sigma_y` table, one block per `L`.
pub fn rescaled_table(points: &[DataPoint], params: CollapseParams) -> Result<String> {
    let xy = rescale(points, params)?;
    let mut rows: Vec<(usize, f64, f64, f64, f64)> =
        points.iter().zip(&xy).map(|(p, &(x, y))| (p.l, p.q, x, y, p.sigma_y)).collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = format!("# q_c = {:.8e}  nu = {:.8e}\n# L q x y sigma_y\n", params.q_c, params.nu);
    let mut last = None;
    for (l, q, x, y, s) in rows {
        if last.is_some() && last != Some(l) {
            out.push_str("\n\n");
        }
        last = Some(l);
        out.push_str(&format!("{l} {q:.8e} {x:.8e} {y:.8e} {s:.8e}\n"));
    }
    Ok(out)
}
