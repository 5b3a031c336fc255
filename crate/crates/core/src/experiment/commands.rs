use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::output::{csv_text, fmt_f64, mean_stderr, parse_results, results_csv, Manifest, ResultRow};
use super::spec::{CollapseSpec, Command, OracleSpec, SweepSpec};
use crate::chi::{chi_run, ChiEstimate, ChiRun};
use crate::circuit::{run_trajectory, short_hash};
use crate::crosscheck::{chi_indicator_check, cross_check_with, random_micro_chi_config, random_small_config};
use crate::error::{Error, Result};
use crate::observables::{coherent_information, convergence_time};
use crate::rng::derive_seed;
use crate::scaling::{collapse, rescaled_table, CollapseOptions, CollapseOutput, CollapseParams, DataPoint};

fn row(spec: &SweepSpec, l: usize, q: f64, observable: &str, mean: f64, stderr: f64) -> ResultRow {
    ResultRow {
        noise_kind: spec.noise_kind,
        p: spec.p,
        q_t: spec.q_t,
        q,
        l,
        t: spec.steps.unwrap_or(5 * l),
        n: spec.n,
        observable: observable.into(),
        mean,
        stderr,
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub csv: String,
}

/// Final `I_C` averaged over `n` realizations at every `(L, q)`.
pub fn sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (l, q) in spec.points() {
        let start = Instant::now();
        let config = spec.circuit(l, q);
        // integer sums, so the reduction order cannot change the result
        let (sum, sum_sq) = (0..spec.n as u64)
            .into_par_iter()
            .map(|r| {
                let ic = coherent_information(&run_trajectory(&config, r)?.state) as i128;
                Ok::<_, Error>((ic, ic * ic))
            })
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        let (mean, se) = mean_stderr(sum as f64, sum_sq as f64, spec.n);
        log::info!("sweep L={l} q={q}: I_C = {mean:.4} ± {se:.4} ({:.1?})", start.elapsed());
        rows.push(row(spec, l, q, "ic", mean, se));
    }
    let manifest = Manifest::new("sweep", spec.seed, spec.hash(Command::Sweep));
    Ok(SweepOutput { csv: results_csv(&manifest, &rows), rows })
}

/// Realization-averaged `I_C(t)` at one `(L, q)` point.
#[derive(Clone, Debug)]
pub struct Curve {
    pub l: usize,
    pub q: f64,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub t_c: usize,
}

#[derive(Clone, Debug)]
pub struct SlowdownOutput {
    pub curves: Vec<Curve>,
    /// One `tc` row per point.
    pub rows: Vec<ResultRow>,
    pub csv: String,
    pub series_csv: String,
}

pub const SERIES_COLUMNS: [&str; 10] = ["noise_kind", "p", "q_t", "q", "L", "T", "N", "t", "mean", "stderr"];

/// Averaged `I_C(t)` curves and their convergence times.
pub fn slowdown(spec: &SweepSpec) -> Result<SlowdownOutput> {
    spec.validate()?;
    let mut curves = Vec::new();
    for (l, q) in spec.points() {
        let start = Instant::now();
        let config = spec.circuit(l, q).with_time_series(true);
        let len = config.steps + 1;
        let (sum, sum_sq) = (0..spec.n as u64)
            .into_par_iter()
            .map(|r| {
                let series = run_trajectory(&config, r)?.series.expect("series requested");
                let sq = series.iter().map(|&v| (v * v) as i128).collect::<Vec<_>>();
                Ok::<_, Error>((series.into_iter().map(i128::from).collect::<Vec<_>>(), sq))
            })
            .try_reduce(
                || (vec![0i128; len], vec![0i128; len]),
                |mut a, b| {
                    for i in 0..len {
                        a.0[i] += b.0[i];
                        a.1[i] += b.1[i];
                    }
                    Ok(a)
                },
            )?;
        let (mean, stderr): (Vec<f64>, Vec<f64>) =
            (0..len).map(|i| mean_stderr(sum[i] as f64, sum_sq[i] as f64, spec.n)).unzip();
        let t_c = convergence_time(&mean, spec.threshold)?;
        log::info!("slowdown L={l} q={q}: t_c = {t_c} ({:.1?})", start.elapsed());
        curves.push(Curve { l, q, mean, stderr, t_c });
    }
    let rows: Vec<ResultRow> = curves.iter().map(|c| row(spec, c.l, c.q, "tc", c.t_c as f64, 0.0)).collect();
    let manifest = Manifest::new("slowdown", spec.seed, spec.hash(Command::Slowdown));
    let series_rows = curves.iter().flat_map(|c| {
        let base = row(spec, c.l, c.q, "ic", 0.0, 0.0);
        (0..c.mean.len()).map(move |t| {
            vec![
                base.noise_kind.as_str().to_string(),
                fmt_f64(base.p),
                fmt_f64(base.q_t),
                fmt_f64(base.q),
                base.l.to_string(),
                base.t.to_string(),
                base.n.to_string(),
                t.to_string(),
                fmt_f64(c.mean[t]),
                fmt_f64(c.stderr[t]),
            ]
        })
    });
    let series_csv = csv_text(&manifest, &SERIES_COLUMNS, series_rows);
    Ok(SlowdownOutput { csv: results_csv(&manifest, &rows), curves, rows, series_csv })
}

#[derive(Clone, Debug)]
pub struct ChiPoint {
    pub l: usize,
    pub q: f64,
    pub estimate: ChiEstimate,
    pub runs: Vec<ChiRun>,
    /// The same point with σ = ρ, when requested.
    pub control: Option<ChiEstimate>,
}

#[derive(Clone, Debug)]
pub struct ChiOutput {
    pub points: Vec<ChiPoint>,
    pub rows: Vec<ResultRow>,
    pub csv: String,
    pub runs_csv: String,
    pub control_csv: Option<String>,
}

pub const RUN_COLUMNS: [&str; 7] = ["L", "q", "run", "indicator", "n_random", "l_sigma", "success"];

/// χ estimates at every `(L, q)` with a per-run log.
pub fn chi(spec: &SweepSpec) -> Result<ChiOutput> {
    spec.validate()?;
    let mut points = Vec::new();
    for (l, q) in spec.points() {
        let start = Instant::now();
        let config = spec.chi_config(l, q)?;
        let runs: Vec<ChiRun> = (0..spec.n as u64).into_par_iter().map(|r| chi_run(&config, r)).collect::<Result<_>>()?;
        let estimate = ChiEstimate::from_runs(&runs);
        let control = if spec.control {
            let mut c = config.clone();
            c.sigma = c.rho.clone();
            let runs: Vec<ChiRun> = (0..spec.n as u64).into_par_iter().map(|r| chi_run(&c, r)).collect::<Result<_>>()?;
            Some(ChiEstimate::from_runs(&runs))
        } else {
            None
        };
        log::info!("chi L={l} q={q}: {:.4} ± {:.4} ({:.1?})", estimate.chi_hat, estimate.stderr, start.elapsed());
        points.push(ChiPoint { l, q, estimate, runs, control });
    }
    let manifest = Manifest::new("chi", spec.seed, spec.hash(Command::Chi));
    let rows: Vec<ResultRow> =
        points.iter().map(|p| row(spec, p.l, p.q, "chi", p.estimate.chi_hat, p.estimate.stderr)).collect();
    let run_rows = points.iter().flat_map(|p| {
        p.runs.iter().map(move |r| {
            vec![
                p.l.to_string(),
                fmt_f64(p.q),
                r.run.to_string(),
                u8::from(r.indicator).to_string(),
                r.n_random.to_string(),
                r.l_sigma.to_string(),
                u8::from(r.success).to_string(),
            ]
        })
    });
    let runs_csv = csv_text(&manifest, &RUN_COLUMNS, run_rows);
    let control_csv = spec.control.then(|| {
        let rows: Vec<ResultRow> = points
            .iter()
            .map(|p| {
                let c = p.control.expect("control computed");
                row(spec, p.l, p.q, "chi", c.chi_hat, c.stderr)
            })
            .collect();
        results_csv(&manifest, &rows)
    });
    Ok(ChiOutput { csv: results_csv(&manifest, &rows), points, rows, runs_csv, control_csv })
}

#[derive(Clone, Debug)]
pub struct CollapseReport {
    pub output: CollapseOutput,
    pub initial: CollapseParams,
    pub json: String,
    pub table: String,
}

/// First crossing of `target` by the curve of the largest size, by linear
/// interpolation; the middle of the `q` range if there is none.
fn crossing_guess(points: &[DataPoint], target: f64) -> f64 {
    let l_max = points.iter().map(|p| p.l).max().unwrap_or(0);
    let mut curve: Vec<(f64, f64)> = points.iter().filter(|p| p.l == l_max).map(|p| (p.q, p.y)).collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in curve.windows(2) {
        let (a, b) = (w[0].1 - target, w[1].1 - target);
        if a == 0.0 {
            return w[0].0;
        }
        if a * b < 0.0 {
            return w[0].0 + (w[1].0 - w[0].0) * a / (a - b);
        }
    }
    let lo = points.iter().map(|p| p.q).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.q).fold(f64::NEG_INFINITY, f64::max);
    (lo + hi) / 2.0
}

/// Collapses the rows of a result CSV carrying one observable.
pub fn collapse_csv(text: &str, spec: &CollapseSpec) -> Result<CollapseReport> {
    let rows = parse_results(text)?;
    let observable = spec.observable.clone().unwrap_or_else(|| rows[0].observable.clone());
    let points: Vec<DataPoint> = rows
        .iter()
        .filter(|r| r.observable == observable)
        .map(|r| DataPoint { q: r.q, l: r.l, y: r.mean, sigma_y: r.stderr })
        .collect();
    if points.is_empty() {
        return Err(Error::Schema(format!("no rows with observable {observable:?}")));
    }
    let target = if observable == "chi" { 0.5 } else { 0.0 };
    let initial = CollapseParams {
        q_c: spec.q_c.unwrap_or_else(|| crossing_guess(&points, target)),
        nu: spec.nu.unwrap_or(1.0),
    };
    let opts = CollapseOptions {
        degree: spec.degree,
        weighted: spec.weighted,
        x_window: spec.x_window,
        threshold_factor: spec.threshold_factor,
        ..Default::default()
    };
    let output = collapse(&points, initial, &opts)?;
    let table = format!(
        "# observable = {observable}\n# input_hash = {}\n{}",
        short_hash(text),
        rescaled_table(&points, CollapseParams { q_c: output.q_c, nu: output.nu })?
    );
    Ok(CollapseReport { json: output.to_json(), table, output, initial })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseResult {
    pub case: usize,
    /// `entropy` or `chi_indicator`.
    pub check: &'static str,
    pub config_hash: String,
    pub realization: u64,
    pub width: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub cases: Vec<CaseResult>,
    pub failures: usize,
    pub csv: String,
}

const ORACLE_COLUMNS: [&str; 7] = ["case", "check", "config_hash", "realization", "width", "status", "detail"];

fn entropy_case(spec: &OracleSpec, case: usize, corrupt_signs: bool) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, case as u64));
    loop {
        let config = random_small_config(&mut rng);
        let hash = config.config_hash();
        let fail = |detail: String| CaseResult {
            case,
            check: "entropy",
            config_hash: hash.clone(),
            realization: 0,
            width: 0,
            passed: false,
            detail,
        };
        return match cross_check_with(&config, 0, corrupt_signs) {
            // too wide for the dense oracle; draw another configuration
            Ok(None) => continue,
            Ok(Some(c)) => CaseResult {
                case,
                check: "entropy",
                config_hash: hash.clone(),
                realization: 0,
                width: c.width,
                passed: c.agrees(),
                detail: format!(
                    "L={} T={} {} S(S|A)={}/{}/{:.6} S(SR|A)={}/{}/{:.6} I_C={}/{}/{:.6} flags={}",
                    config.l,
                    config.steps,
                    config.noise_kind.as_str(),
                    c.compressed.s_s_given_a,
                    c.full.s_s_given_a,
                    c.oracle.s_s_given_a,
                    c.compressed.s_sr_given_a,
                    c.full.s_sr_given_a,
                    c.oracle.s_sr_given_a,
                    c.compressed.i_c,
                    c.full.i_c,
                    c.oracle.i_c,
                    if c.flags_match { "match" } else { "differ" },
                ),
            },
            Err(e) => fail(format!("error: {e}")),
        };
    }
}

fn chi_case(spec: &OracleSpec, case: usize) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed ^ 0x00c0_ffee, case as u64));
    loop {
        let config = random_micro_chi_config(&mut rng);
        let hash = config.circuit.config_hash();
        let base = CaseResult { case, check: "chi_indicator", config_hash: hash, realization: 0, width: 0, passed: false, detail: String::new() };
        return match chi_indicator_check(&config, 0) {
            Ok(None) => continue,
            Ok(Some(0)) => CaseResult { passed: true, detail: "all outcome strings agree".into(), ..base },
            Ok(Some(k)) => CaseResult { detail: format!("{k} outcome strings disagree"), ..base },
            Err(e) => CaseResult { detail: format!("error: {e}"), ..base },
        };
    }
}

/// Random cross-simulator and χ-indicator checks. `corrupt_signs` flips a
/// gate sign bit on the dense side of every entropy case.
pub fn oracle_check(spec: &OracleSpec, corrupt_signs: bool) -> OracleReport {
    let mut cases: Vec<CaseResult> = (0..spec.cases).into_par_iter().map(|i| entropy_case(spec, i, corrupt_signs)).collect();
    cases.extend((0..spec.chi_cases).into_par_iter().map(|i| chi_case(spec, spec.cases + i)).collect::<Vec<_>>());
    let failures = cases.iter().filter(|c| !c.passed).count();
    let hash = short_hash(&serde_json::to_string(&(spec.cases, spec.chi_cases, spec.seed, corrupt_signs)).expect("plain values"));
    let manifest = Manifest::new("oracle-check", spec.seed, hash);
    let csv = csv_text(
        &manifest,
        &ORACLE_COLUMNS,
        cases.iter().map(|c| {
            vec![
                c.case.to_string(),
                c.check.to_string(),
                c.config_hash.clone(),
                c.realization.to_string(),
                c.width.to_string(),
                if c.passed { "pass" } else { "FAIL" }.to_string(),
                c.detail.replace(',', ";"),
            ]
        }),
    );
    OracleReport { cases, failures, csv }
}
