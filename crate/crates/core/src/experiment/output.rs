use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::NoiseKind;
use crate::error::{Error, Result};

/// Column order of every result CSV.
pub const RESULT_COLUMNS: [&str; 10] = ["noise_kind", "p", "q_t", "q", "L", "T", "N", "observable", "mean", "stderr"];

/// Float formatting used in every output file (9 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.8e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub noise_kind: NoiseKind,
    pub p: f64,
    pub q_t: f64,
    pub q: f64,
    pub l: usize,
    pub t: usize,
    pub n: usize,
    /// `ic`, `chi` or `tc`.
    pub observable: String,
    pub mean: f64,
    pub stderr: f64,
}

impl ResultRow {
    fn fields(&self) -> Vec<String> {
        vec![
            self.noise_kind.as_str().to_string(),
            fmt_f64(self.p),
            fmt_f64(self.q_t),
            fmt_f64(self.q),
            self.l.to_string(),
            self.t.to_string(),
            self.n.to_string(),
            self.observable.clone(),
            fmt_f64(self.mean),
            fmt_f64(self.stderr),
        ]
    }
}

/// Provenance written as `#` comment lines at the top of each output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config_hash: String) -> Self {
        Self { command: command.into(), seed, config_hash, version: format!("iclab {}", env!("CARGO_PKG_VERSION")) }
    }

    pub fn header(&self) -> String {
        format!(
            "# {}\n# command = {}\n# seed = {}\n# config_hash = {}\n",
            self.version, self.command, self.seed, self.config_hash
        )
    }
}

/// Mean and standard error (sample standard deviation over `√n`).
pub fn mean_stderr(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// A CSV document: manifest header, column line, then rows.
pub fn csv_text(manifest: &Manifest, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = manifest.header();
    out.push_str(&columns.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn results_csv(manifest: &Manifest, rows: &[ResultRow]) -> String {
    csv_text(manifest, &RESULT_COLUMNS, rows.iter().map(ResultRow::fields))
}

/// Parses a result CSV, skipping `#` lines; the column line must match.
pub fn parse_results(text: &str) -> Result<Vec<ResultRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Schema(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != RESULT_COLUMNS {
        return Err(Error::Schema(format!("expected columns {}, found {:?}", RESULT_COLUMNS.join(","), header)));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::Schema(format!("row {}: bad {what}", i + 1));
        let f = |k: usize| rec[k].trim().parse::<f64>().map_err(|_| bad(RESULT_COLUMNS[k]));
        let u = |k: usize| rec[k].trim().parse::<usize>().map_err(|_| bad(RESULT_COLUMNS[k]));
        rows.push(ResultRow {
            noise_kind: rec[0].parse().map_err(|_| bad("noise_kind"))?,
            p: f(1)?,
            q_t: f(2)?,
            q: f(3)?,
            l: u(4)?,
            t: u(5)?,
            n: u(6)?,
            observable: rec[7].to_string(),
            mean: f(8)?,
            stderr: f(9)?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Schema("no data rows".into()));
    }
    Ok(rows)
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// `dir/stem<suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = Manifest::new("sweep", 3, "abc".into());
        let rows = vec![ResultRow {
            noise_kind: NoiseKind::Dephase,
            p: 0.1,
            q_t: 0.7,
            q: 0.5,
            l: 16,
            t: 80,
            n: 10,
            observable: "ic".into(),
            mean: -1.25,
            stderr: 0.125,
        }];
        let text = results_csv(&m, &rows);
        assert!(text.starts_with("# iclab "));
        assert!(text.contains("dephase,1.00000000e-1,7.00000000e-1,5.00000000e-1,16,80,10,ic,-1.25000000e0,1.25000000e-1"));
        assert_eq!(parse_results(&text).unwrap(), rows);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_results(""), Err(Error::Schema(_))));
        assert!(matches!(parse_results("# x\nnoise_kind,p\n"), Err(Error::Schema(_))));
        let header = RESULT_COLUMNS.join(",");
        assert!(matches!(parse_results(&format!("{header}\n")), Err(Error::Schema(_))));
        assert!(matches!(parse_results(&format!("{header}\nreset,a,0,0,4,1,1,ic,0,0\n")), Err(Error::Schema(_))));
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_stderr(12.0, 48.0, 3), (4.0, 0.0));
        let (m, s) = mean_stderr(3.0, 5.0, 2);
        assert_eq!(m, 1.5);
        assert!((s - 0.5).abs() < 1e-15);
    }
}
