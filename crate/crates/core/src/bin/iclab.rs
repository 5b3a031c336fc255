use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use iclab::experiment::{self, sibling, write_file, CollapseSpec, Command, OracleSpec, Profile, SweepSpec};
use iclab::Error;

#[derive(Parser)]
#[command(name = "iclab", version, about = "Coherent-information experiments on monitored noisy Clifford circuits")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML file with spec fields; unset fields fall back to the profile.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output path (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// desk or large.
    #[arg(long, default_value = "desk")]
    profile: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Final I_C averaged over realizations on a (L, q) grid.
    Sweep(Common),
    /// Averaged I_C(t) curves and convergence times.
    Slowdown(Common),
    /// Post-selection-free χ estimates on a (L, q) grid.
    Chi(Common),
    /// Finite-size-scaling collapse of a result CSV.
    Collapse {
        #[command(flatten)]
        common: Common,
        /// Result CSV (overrides the config's input).
        input: Option<PathBuf>,
        /// Initial guess for q_c.
        #[arg(long)]
        q_c: Option<f64>,
        /// Initial guess for ν.
        #[arg(long)]
        nu: Option<f64>,
    },
    /// Stabilizer versus dense-oracle agreement on random small instances.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Number of entropy cases.
        #[arg(long)]
        cases: Option<usize>,
    },
}

enum Failure {
    Invalid(String),
    Oracle(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn read_config(path: &Option<PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display()))),
        None => Ok(String::new()),
    }
}

fn sweep_spec(common: &Common, command: Command) -> Result<SweepSpec, Failure> {
    let profile: Profile = common.profile.parse()?;
    let mut spec = SweepSpec::from_toml(&read_config(&common.config)?, command, profile)?;
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if let Some(out) = &common.out {
        spec.out = Some(out.clone());
    }
    Ok(spec)
}

fn out_path(spec_out: &Option<PathBuf>, default: &str) -> PathBuf {
    spec_out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn save(path: &Path, text: &str) -> Result<(), Failure> {
    write_file(path, text)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Wall time lives in a sidecar so the data files stay byte-reproducible.
fn save_timing(path: &Path, started: Instant) -> Result<(), Failure> {
    let json = serde_json::json!({ "wall_time_seconds": started.elapsed().as_secs_f64() });
    save(&sibling(path, ".timing.json"), &format!("{json}\n"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = match &cli.command {
        Cmd::Sweep(c) | Cmd::Slowdown(c) | Cmd::Chi(c) => c,
        Cmd::Collapse { common, .. } | Cmd::OracleCheck { common, .. } => common,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(Failure::Invalid("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| Failure::Invalid(e.to_string()))?;
    let started = Instant::now();
    pool.install(|| match &cli.command {
        Cmd::Sweep(c) => {
            let spec = sweep_spec(c, Command::Sweep)?;
            let out = out_path(&spec.out, "sweep.csv");
            save(&out, &experiment::sweep(&spec)?.csv)?;
            save_timing(&out, started)
        }
        Cmd::Slowdown(c) => {
            let spec = sweep_spec(c, Command::Slowdown)?;
            let out = out_path(&spec.out, "slowdown.csv");
            let result = experiment::slowdown(&spec)?;
            save(&out, &result.csv)?;
            save(&sibling(&out, "_series.csv"), &result.series_csv)?;
            save_timing(&out, started)
        }
        Cmd::Chi(c) => {
            let spec = sweep_spec(c, Command::Chi)?;
            let out = out_path(&spec.out, "chi.csv");
            let result = experiment::chi(&spec)?;
            save(&out, &result.csv)?;
            save(&sibling(&out, "_runs.csv"), &result.runs_csv)?;
            if let Some(control) = &result.control_csv {
                save(&sibling(&out, "_control.csv"), control)?;
            }
            save_timing(&out, started)
        }
        Cmd::Collapse { common, input, q_c, nu } => {
            let mut spec = CollapseSpec::from_toml(&read_config(&common.config)?)?;
            if input.is_some() {
                spec.input = input.clone();
            }
            spec.q_c = q_c.or(spec.q_c);
            spec.nu = nu.or(spec.nu);
            if common.out.is_some() {
                spec.out = common.out.clone();
            }
            let input = spec.input.clone().ok_or_else(|| Failure::Invalid("collapse needs an input CSV".into()))?;
            let text = fs::read_to_string(&input).map_err(|e| Failure::Invalid(format!("{}: {e}", input.display())))?;
            let report = experiment::collapse_csv(&text, &spec)?;
            let out = out_path(&spec.out, "collapse.json");
            save(&out, &report.json)?;
            save(&out.with_extension("dat"), &report.table)?;
            println!(
                "q_c = {:.4} [{:.4}, {:.4}]  nu = {:.3} [{:.3}, {:.3}]  eps_min = {:.3e}",
                report.output.q_c,
                report.output.q_c_interval.0,
                report.output.q_c_interval.1,
                report.output.nu,
                report.output.nu_interval.0,
                report.output.nu_interval.1,
                report.output.epsilon_min
            );
            Ok(())
        }
        Cmd::OracleCheck { common, cases } => {
            let mut spec = OracleSpec::from_toml(&read_config(&common.config)?)?;
            if let Some(seed) = common.seed {
                spec.seed = seed;
            }
            if let Some(n) = cases {
                spec.cases = *n;
            }
            if common.out.is_some() {
                spec.out = common.out.clone();
            }
            let report = experiment::oracle_check(&spec, false);
            let out = out_path(&spec.out, "oracle_check.csv");
            save(&out, &report.csv)?;
            for c in report.cases.iter().filter(|c| !c.passed) {
                eprintln!("FAIL case {} ({}) config {}: {}", c.case, c.check, c.config_hash, c.detail);
            }
            println!("oracle-check: {} of {} cases passed", report.cases.len() - report.failures, report.cases.len());
            if report.failures > 0 {
                return Err(Failure::Oracle(report.failures));
            }
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Oracle(n)) => {
            eprintln!("{n} oracle check(s) failed");
            ExitCode::from(2)
        }
    }
}
