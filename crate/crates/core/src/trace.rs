//! Per-step solver records and their CSV / JSON forms.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    /// Objective at the trace-normalized iterate.
    pub f_value: f64,
    /// Trace of the carried iterate.
    pub trace: f64,
    /// `d_T(Q_t^{1-alpha}, Q_{t-1}^{1-alpha})`; absent for the initial point.
    pub residual_thompson: Option<f64>,
    pub dist_to_reference: Option<f64>,
    pub wall_time_ms: f64,
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

pub const TRACE_CSV_HEADER: &str = "step,f_value,trace,residual_thompson,dist_to_reference,wall_time_ms";

impl IterationTrace {
    pub fn push(&mut self, r: TraceRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f_value).collect()
    }

    /// Writes the CSV with the timing column zeroed when `with_timing` is false.
    pub fn write_csv<W: Write>(&self, mut out: W, with_timing: bool) -> Result<()> {
        writeln!(out, "{TRACE_CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.step,
                fmt_f64(r.f_value),
                fmt_f64(r.trace),
                r.residual_thompson.map(fmt_f64).unwrap_or_default(),
                r.dist_to_reference.map(fmt_f64).unwrap_or_default(),
                if with_timing { fmt_f64(r.wall_time_ms) } else { "0".into() },
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, with_timing: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, with_timing).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Shortest round-trip representation; `inf`/`nan` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}
