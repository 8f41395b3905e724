//! `report.json` and the series-derived summary shared with `diagnose`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cli_io::config::{InitFamily, ModelKind};
use crate::diagnostics::{
    bkm_series, bkm_suspect, energy_identity_residual, exp_decay_envelope_check,
    fit_decay_exponent, h1_dissipation_check, ConditionReport, DecayFit, DiagnosticsRecord,
    EnvelopeNorm, H1Dissipation,
};
use crate::fields::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub l2: Option<f64>,
    pub l4: Option<f64>,
    pub linf: Option<f64>,
}

impl Envelope {
    pub fn max_ratio(&self) -> Option<f64> {
        [self.l2, self.l4, self.linf]
            .into_iter()
            .flatten()
            .reduce(f64::max)
    }
}

/// Everything that can be recomputed from `series.csv` (plus the model
/// parameters). Entries that do not apply are `null`, with the reason in
/// `notes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub samples: usize,
    pub t_first: Option<f64>,
    pub t_last: Option<f64>,
    pub energy_identity_residual: Option<f64>,
    pub envelope: Envelope,
    pub h1_dissipation: Option<H1Dissipation>,
    pub bkm_accum: f64,
    pub bkm_matches_stored: bool,
    pub bkm_suspect: bool,
    pub fit_window: Option<(f64, f64)>,
    pub decay_fit: Option<DecayFit>,
    pub notes: BTreeMap<String, String>,
}

pub fn summarize(
    history: &[DiagnosticsRecord],
    params: Option<&ModelParams>,
    fit_window: Option<(f64, f64)>,
) -> SeriesSummary {
    let mut notes = BTreeMap::new();
    let mut note = |key: &str, msg: String| {
        notes.insert(key.to_string(), msg);
    };
    let acc = bkm_series(history);
    let bkm_matches_stored = acc
        .iter()
        .zip(history)
        .all(|(a, r)| a.to_bits() == r.bkm_accum.to_bits());

    let mut energy = None;
    let mut envelope = Envelope {
        l2: None,
        l4: None,
        linf: None,
    };
    match params {
        Some(p) => {
            match energy_identity_residual(history, p) {
                Ok(v) => energy = Some(v),
                Err(e) => note("energy_identity_residual", e.to_string()),
            }
            for norm in EnvelopeNorm::ALL {
                let slot = match norm {
                    EnvelopeNorm::L2 => &mut envelope.l2,
                    EnvelopeNorm::L4 => &mut envelope.l4,
                    EnvelopeNorm::LInf => &mut envelope.linf,
                };
                match exp_decay_envelope_check(history, p, norm) {
                    Ok(v) => *slot = Some(v),
                    Err(e) => note(&format!("envelope.{}", norm.label()), e.to_string()),
                }
            }
        }
        None => {
            let msg = "model parameters unknown (pass --config)".to_string();
            note("energy_identity_residual", msg.clone());
            note("envelope", msg);
        }
    }
    let h1 = match h1_dissipation_check(history) {
        Ok(v) => Some(v),
        Err(e) => {
            note("h1_dissipation", e.to_string());
            None
        }
    };
    let decay_fit = match fit_window {
        Some(w) => match fit_decay_exponent(history, w) {
            Ok(f) => Some(f),
            Err(e) => {
                note("decay_fit", e.to_string());
                None
            }
        },
        None => {
            note("decay_fit", "no fit window configured".to_string());
            None
        }
    };
    SeriesSummary {
        samples: history.len(),
        t_first: history.first().map(|r| r.t),
        t_last: history.last().map(|r| r.t),
        energy_identity_residual: energy,
        envelope,
        h1_dissipation: h1,
        bkm_accum: acc.last().copied().unwrap_or(0.0),
        bkm_matches_stored,
        bkm_suspect: bkm_suspect(history),
        fit_window,
        decay_fit,
        notes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BkmSuspect,
    CflFailure,
}

impl RunStatus {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::BkmSuspect => 2,
            RunStatus::CflFailure => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub n: usize,
    #[serde(rename = "L")]
    pub box_len: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepperInfo {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CflFailure {
    pub step: u64,
    pub t: f64,
    pub dt: f64,
    pub admissible: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Conditions {
    pub thm1_1: Option<ConditionReport>,
    pub thm1_2: Option<ConditionReport>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub status: RunStatus,
    pub exit_code: u8,
    pub model: ModelKind,
    pub params: ModelParams,
    pub grid: GridInfo,
    pub stepper: StepperInfo,
    pub init: InitFamily,
    pub steps_completed: u64,
    pub t_final: f64,
    pub cfl_failure: Option<CflFailure>,
    pub divergence_defect_final: f64,
    pub conditions: Conditions,
    pub series: SeriesSummary,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, w: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            h1_u: (1.0 + t).powf(-0.5),
            l2_tau: (-t).exp(),
            l4_tau: (-t).exp(),
            linf_tau: (-t).exp(),
            h1_tau: (-t).exp(),
            h2_tau: (-t).exp(),
            linf_omega: w,
            ..Default::default()
        }
    }

    #[test]
    fn summary_without_params_notes_gaps() {
        let mut hist: Vec<DiagnosticsRecord> = (0..20).map(|i| record(i as f64, 0.5)).collect();
        let acc = bkm_series(&hist);
        for (r, a) in hist.iter_mut().zip(&acc) {
            r.bkm_accum = *a;
        }
        let s = summarize(&hist, None, Some((2.0, 15.0)));
        assert!(s.bkm_matches_stored);
        assert!(!s.bkm_suspect);
        assert_eq!(s.samples, 20);
        assert!(s.energy_identity_residual.is_none());
        assert!(s.notes.contains_key("envelope"));
        assert!(s.decay_fit.is_some());
        hist[3].bkm_accum += 1e-9;
        assert!(!summarize(&hist, None, None).bkm_matches_stored);
    }

    #[test]
    fn summary_with_params() {
        let hist: Vec<DiagnosticsRecord> = (0..5).map(|i| record(i as f64 * 0.1, 0.0)).collect();
        let p = ModelParams::corotational(1.0, 1.0, 0.0).unwrap();
        let s = summarize(&hist, Some(&p), None);
        let env = s.envelope.max_ratio().unwrap();
        assert!((env - 1.0).abs() < 1e-12);
        assert!(s.energy_identity_residual.is_some());
        assert!(s.notes.contains_key("decay_fit"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunStatus::Completed.exit_code(), 0);
        assert_eq!(RunStatus::BkmSuspect.exit_code(), 2);
        assert_eq!(RunStatus::CflFailure.exit_code(), 3);
    }
}
