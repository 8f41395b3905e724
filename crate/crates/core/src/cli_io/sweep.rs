//! Parameter sweeps: one independent run per axis value, executed
//! concurrently, each in its own `run_NNN` directory, summarized in
//! `sweep.csv`.

use std::path::Path;

use rayon::prelude::*;

use crate::cli_io::config::{ConfigMap, NUMERIC_KEYS};
use crate::cli_io::report::Report;
use crate::cli_io::run::{simulate_in, RunError, SimulateOptions};

pub const SWEEP_FILE: &str = "sweep.csv";

/// Verdicts of one sweep run; `None` entries are blank in the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub status: String,
    pub thm1_1_passed: Option<(usize, usize)>,
    pub thm1_2_passed: Option<(usize, usize)>,
    pub failed_conditions: Vec<String>,
    pub max_envelope_ratio: Option<f64>,
    pub energy_identity_residual: Option<f64>,
    pub decay_exponent: Option<f64>,
    pub bkm_suspect: Option<bool>,
}

impl SweepRow {
    fn failed(value: &str, err: &RunError) -> Self {
        Self {
            value: value.to_string(),
            status: format!("error: {err}"),
            thm1_1_passed: None,
            thm1_2_passed: None,
            failed_conditions: Vec::new(),
            max_envelope_ratio: None,
            energy_identity_residual: None,
            decay_exponent: None,
            bkm_suspect: None,
        }
    }

    fn from_report(value: &str, r: &Report) -> Self {
        let tally = |c: &Option<crate::diagnostics::ConditionReport>| {
            c.as_ref().map(|c| (c.passes(), c.conditions.len()))
        };
        let failed_conditions = [&r.conditions.thm1_1, &r.conditions.thm1_2]
            .into_iter()
            .flatten()
            .flat_map(|c| {
                let id = match c.theorem_id {
                    crate::diagnostics::TheoremId::Thm1_1 => "thm1_1",
                    crate::diagnostics::TheoremId::Thm1_2 => "thm1_2",
                };
                c.conditions
                    .iter()
                    .filter(|x| !x.pass)
                    .map(move |x| format!("{id}.{}", x.name))
            })
            .collect();
        Self {
            value: value.to_string(),
            status: serde_json::to_value(r.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            thm1_1_passed: tally(&r.conditions.thm1_1),
            thm1_2_passed: tally(&r.conditions.thm1_2),
            failed_conditions,
            max_envelope_ratio: r.series.envelope.max_ratio(),
            energy_identity_residual: r.series.energy_identity_residual,
            decay_exponent: r.series.decay_fit.map(|f| f.exponent),
            bkm_suspect: Some(r.series.bkm_suspect),
        }
    }
}

pub const SWEEP_HEADER: &str = "axis,value,status,thm1_1_passed,thm1_2_passed,failed_conditions,max_envelope_ratio,energy_identity_residual,decay_exponent,bkm_suspect";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn format_sweep(axis: &str, rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let pass = |p: Option<(usize, usize)>| p.map(|(a, b)| format!("{a}/{b}")).unwrap_or_default();
        let fields = [
            csv_field(axis),
            csv_field(&r.value),
            csv_field(&r.status),
            pass(r.thm1_1_passed),
            pass(r.thm1_2_passed),
            csv_field(&r.failed_conditions.join(";")),
            opt(r.max_envelope_ratio.map(|v| format!("{v:e}"))),
            opt(r.energy_identity_residual.map(|v| format!("{v:e}"))),
            opt(r.decay_exponent.map(|v| format!("{v:e}"))),
            opt(r.bkm_suspect),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Runs the base configuration once per value of `axis`. Sweep-level
/// problems (bad axis, unparsable values, invalid base config) are errors;
/// individual run failures are recorded in their row.
pub fn sweep(base: &ConfigMap, axis: &str, values: &[String]) -> Result<Vec<SweepRow>, RunError> {
    if !NUMERIC_KEYS.contains(&axis) {
        return Err(RunError::Invalid(format!(
            "sweep axis `{axis}` is not a numeric config key"
        )));
    }
    if values.is_empty() {
        return Err(RunError::Invalid("sweep needs at least one value".into()));
    }
    for v in values {
        if v.trim().parse::<f64>().is_err() {
            return Err(RunError::Invalid(format!(
                "sweep value `{v}` for `{axis}` is not a number"
            )));
        }
    }
    let base_cfg = base.build()?;
    let root = base_cfg.resolved_output_dir();
    std::fs::create_dir_all(&root).map_err(|source| RunError::Io {
        path: root.display().to_string(),
        source,
    })?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let v = v.trim();
            let run = || -> Result<Report, RunError> {
                let mut map = base.clone();
                map.set(axis, v)?;
                let cfg = map.build()?;
                let dir = root.join(format!("run_{i:03}"));
                Ok(simulate_in(&cfg, &dir, SimulateOptions::default())?.report)
            };
            match run() {
                Ok(r) => SweepRow::from_report(v, &r),
                Err(e) => SweepRow::failed(v, &e),
            }
        })
        .collect();
    write_sweep(&root.join(SWEEP_FILE), axis, &rows)?;
    Ok(rows)
}

fn write_sweep(path: &Path, axis: &str, rows: &[SweepRow]) -> Result<(), RunError> {
    std::fs::write(path, format_sweep(axis, rows)).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Splits a comma-separated value list.
pub fn parse_values(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}
