//! Result records and their CSV/JSON encodings.
//!
//! Floats in CSV are written with 17 significant digits in scientific
//! notation (`{:.16e}`), which round-trips every `f64` and never depends on
//! the locale. Missing values are empty cells. JSON uses serde_json's
//! shortest round-trip formatting; NaN becomes `null`.

use std::io::{Read, Write};

use anyhow::{bail, Context};
use rbe_core::protocols::{EveKind, GameResult, Protocol, ProtocolConfig};
use rbe_core::rbe::KeySpace;
use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SWEEP_COLUMNS: [&str; 8] =
    ["epsilon", "trials", "success", "success_analytic", "detection", "detection_analytic", "stderr", "seed"];

pub const METRIC_COLUMNS: [&str; 6] = ["metric", "value", "stderr", "trials", "analytic", "seed"];

/// Echo of the experiment that produced a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub command: String,
    pub protocol: Protocol,
    pub attack: EveKind,
    pub epsilon: f64,
    pub trials: u64,
    pub n: usize,
    pub seed: u64,
    pub key_space: KeySpace,
    pub check_fraction: f64,
    pub informed_check: bool,
}

/// One key-bit guessing game run with every sampled metric, its standard
/// error and the reference values that apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub spec: SpecEcho,
    /// Game win rate among trials where Eve outputs a guess. For DL04 this
    /// is the sender-bit match rate, the quantity the DL04 reference curve
    /// describes.
    pub success: f64,
    pub success_stderr: f64,
    pub success_trials: u64,
    pub success_analytic: Option<f64>,
    /// Exact value from branch enumeration, where one exists.
    pub success_exact: Option<f64>,
    pub advantage: f64,
    pub detection: f64,
    pub detection_stderr: f64,
    pub detection_trials: u64,
    pub detection_analytic: Option<f64>,
    pub key_rate: f64,
    pub game: GameResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
    pub tool_version: String,
}

impl ResultRecord {
    /// `|success - analytic| < k * stderr`, when an analytic value exists.
    pub fn agrees_with_analytic(&self, k: f64) -> Option<bool> {
        self.success_analytic.map(|a| (self.success - a).abs() < k * self.success_stderr)
    }

    pub fn config(&self) -> ProtocolConfig {
        let mut cfg = ProtocolConfig::new(self.spec.protocol, self.spec.n);
        cfg.key_space = self.spec.key_space;
        cfg.check_fraction = self.spec.check_fraction;
        cfg.informed_check = self.spec.informed_check;
        cfg
    }
}

/// The flat plotting row of a [`ResultRecord`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub trials: u64,
    pub success: f64,
    pub success_analytic: Option<f64>,
    pub detection: f64,
    pub detection_analytic: Option<f64>,
    pub stderr: f64,
    pub seed: u64,
}

impl From<&ResultRecord> for SweepRow {
    fn from(r: &ResultRecord) -> Self {
        SweepRow {
            epsilon: r.spec.epsilon,
            trials: r.spec.trials,
            success: r.success,
            success_analytic: r.success_analytic,
            detection: r.detection,
            detection_analytic: r.detection_analytic,
            stderr: r.success_stderr,
            seed: r.spec.seed,
        }
    }
}

/// One named scalar in the long format used by `entangle` and `tree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
    pub analytic: Option<f64>,
    pub seed: Option<u64>,
}

impl MetricRow {
    pub fn exact(metric: impl Into<String>, value: f64, analytic: Option<f64>) -> Self {
        MetricRow { metric: metric.into(), value, stderr: None, trials: None, analytic, seed: None }
    }

    pub fn sampled(
        metric: impl Into<String>,
        value: f64,
        stderr: f64,
        trials: u64,
        analytic: Option<f64>,
        seed: u64,
    ) -> Self {
        MetricRow {
            metric: metric.into(),
            value,
            stderr: Some(stderr),
            trials: Some(trials),
            analytic,
            seed: Some(seed),
        }
    }
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_u64(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_f64(s: &str) -> anyhow::Result<f64> {
    s.parse::<f64>().with_context(|| format!("bad number {s:?}"))
}

fn parse_opt_f64(s: &str) -> anyhow::Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

fn parse_opt_u64(s: &str) -> anyhow::Result<Option<u64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        Ok(Some(s.parse().with_context(|| format!("bad integer {s:?}"))?))
    }
}

pub fn emit_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.epsilon),
            r.trials.to_string(),
            fmt_f64(r.success),
            fmt_opt_f64(r.success_analytic),
            fmt_f64(r.detection),
            fmt_opt_f64(r.detection_analytic),
            fmt_f64(r.stderr),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_sweep_csv<R: Read>(input: R) -> anyhow::Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    if rd.headers()?.iter().ne(SWEEP_COLUMNS) {
        bail!("unexpected sweep header {:?}", rd.headers()?);
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push(SweepRow {
            epsilon: parse_f64(&rec[0])?,
            trials: rec[1].parse()?,
            success: parse_f64(&rec[2])?,
            success_analytic: parse_opt_f64(&rec[3])?,
            detection: parse_f64(&rec[4])?,
            detection_analytic: parse_opt_f64(&rec[5])?,
            stderr: parse_f64(&rec[6])?,
            seed: rec[7].parse()?,
        });
    }
    Ok(rows)
}

pub fn emit_metric_csv<W: Write>(rows: &[MetricRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRIC_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.metric.clone(),
            fmt_f64(r.value),
            fmt_opt_f64(r.stderr),
            fmt_opt_u64(r.trials),
            fmt_opt_f64(r.analytic),
            fmt_opt_u64(r.seed),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_metric_csv<R: Read>(input: R) -> anyhow::Result<Vec<MetricRow>> {
    let mut rd = csv::Reader::from_reader(input);
    if rd.headers()?.iter().ne(METRIC_COLUMNS) {
        bail!("unexpected metric header {:?}", rd.headers()?);
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push(MetricRow {
            metric: rec[0].to_string(),
            value: parse_f64(&rec[1])?,
            stderr: parse_opt_f64(&rec[2])?,
            trials: parse_opt_u64(&rec[3])?,
            analytic: parse_opt_f64(&rec[4])?,
            seed: parse_opt_u64(&rec[5])?,
        });
    }
    Ok(rows)
}

/// Pretty JSON followed by a newline.
pub fn emit_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
