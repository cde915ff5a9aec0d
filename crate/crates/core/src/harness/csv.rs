//! CSV serialization of experiment results.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::complexity::FlopReport;
use crate::error::Result;

/// Aggregate over the trials of one (point, scheme). Blank cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub snr_db: Option<f64>,
    /// Users per cell; feedback bits for `fig6`.
    pub k: Option<u64>,
    pub scheme: String,
    pub mean_sum_rate: Option<f64>,
    pub stderr: Option<f64>,
    pub outage_rate: Option<f64>,
    pub mean_eligible: Option<f64>,
    pub threshold_used: Option<f64>,
    pub trials: Option<usize>,
}

pub const RESULT_HEADER: &str =
    "experiment,snr_db,K,scheme,mean_sum_rate,stderr,outage_rate,mean_eligible,threshold_used,trials";

pub const FLOP_HEADER: &str = "experiment,n_bits,scheme,flops";

/// Formats like C's `%.9g`.
pub fn format_float(v: f64) -> String {
    const SIG: i32 = 9;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG).contains(&exp) {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        [
            self.experiment.clone(),
            opt(self.snr_db, format_float),
            opt(self.k, |k| k.to_string()),
            self.scheme.clone(),
            opt(self.mean_sum_rate, format_float),
            opt(self.stderr, format_float),
            opt(self.outage_rate, format_float),
            opt(self.mean_eligible, format_float),
            opt(self.threshold_used, format_float),
            opt(self.trials, |t| t.to_string()),
        ]
        .join(",")
    }
}

/// Rows produced by one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Results(Vec<ResultRow>),
    Flops { experiment: String, reports: Vec<FlopReport> },
}

impl ExperimentOutput {
    pub fn rows(&self) -> &[ResultRow] {
        match self {
            ExperimentOutput::Results(r) => r,
            ExperimentOutput::Flops { .. } => &[],
        }
    }

    /// Header and records, without the comment line.
    pub fn csv_body(&self) -> String {
        let mut out = String::new();
        match self {
            ExperimentOutput::Results(rows) => {
                out.push_str(RESULT_HEADER);
                out.push('\n');
                for r in rows {
                    out.push_str(&r.to_csv_line());
                    out.push('\n');
                }
            }
            ExperimentOutput::Flops { experiment, reports } => {
                out.push_str(FLOP_HEADER);
                out.push('\n');
                for r in reports {
                    let _ = writeln!(out, "{experiment},{},{},{}", r.n_bits, r.scheme, r.flops);
                }
            }
        }
        out
    }

    /// Body preceded by a `#` line carrying `comment` and a timestamp.
    pub fn to_csv(&self, comment: &str) -> String {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        format!("# {comment} generated_unix={ts}\n{}", self.csv_body())
    }
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
