//! Experiment orchestration: parameter grids, parallel Monte Carlo, and
//! reproducible CSV/JSON output.

mod commands;
mod output;
mod spec;

pub use commands::{
    chi, collapse_csv, oracle_check, slowdown, sweep, CaseResult, ChiOutput, ChiPoint, CollapseReport, Curve,
    OracleReport, SlowdownOutput, SweepOutput, RUN_COLUMNS, SERIES_COLUMNS,
};
pub use output::{
    csv_text, fmt_f64, mean_stderr, parse_results, results_csv, sibling, write_file, Manifest, ResultRow,
    RESULT_COLUMNS,
};
pub use spec::{CollapseSpec, Command, OracleSpec, Profile, SweepSpec};
