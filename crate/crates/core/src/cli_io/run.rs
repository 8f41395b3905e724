//! The `simulate`, `diagnose` and `fit` drivers.

use std::path::{Path, PathBuf};

use crate::cli_io::checkpoint::{read_checkpoint_on, write_checkpoint, CheckpointError};
use crate::cli_io::config::{InitFamily, RunConfig};
use crate::cli_io::report::{
    summarize, CflFailure, Conditions, GridInfo, Report, RunStatus, SeriesSummary, StepperInfo,
};
use crate::cli_io::series::{read_series, SeriesError, SeriesWriter};
use crate::diagnostics::{
    check_theorem_conditions, fit_decay_exponent, ConditionOptions, DecayFit, DiagError,
    DiagnosticsRecord, Recorder, TheoremId,
};
use crate::dynamics::{step, DynamicsError, State};
use crate::init_data::{
    constant_stress, random_small_band, remark12_family, remark15_family, taylor_green, zero_state,
    InitError,
};
use crate::spectral::{FrequencyGrid, GridError};

pub const SERIES_FILE: &str = "series.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] crate::cli_io::config::ConfigError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Diagnostics(#[from] DiagError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("checkpoint time {t} is not on the step grid of dt = {dt}")]
    OffGrid { t: f64, dt: f64 },
    #[error("non-finite diagnostics at t = {t}; the solution has left the representable range")]
    NonFinite { t: f64 },
    #[error("series incomplete: expected {expected} samples, found {found}; missing sample times start at t = {first_missing}")]
    MissingRows {
        expected: usize,
        found: usize,
        first_missing: f64,
    },
    #[error("{0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimulateOptions {
    /// Continue from `checkpoint.bin` and `series.csv` in the output
    /// directory instead of starting over.
    pub resume: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub output_dir: PathBuf,
    pub final_state: State,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        self.report.status.exit_code()
    }
}

/// Builds the configured initial state and its step index.
pub fn initial_state(cfg: &RunConfig) -> Result<(State, u64), RunError> {
    let grid = FrequencyGrid::new(cfg.n, cfg.box_len)?;
    let state = match &cfg.init {
        InitFamily::Zero => zero_state(&grid),
        InitFamily::TaylorGreen => taylor_green(&grid)?,
        InitFamily::RandomSmall {
            seed,
            amplitude,
            band,
        } => random_small_band(&grid, *seed, *amplitude, *band)?,
        InitFamily::Remark12 { amplitude, eps } => remark12_family(*amplitude, *eps, &grid)?,
        InitFamily::Remark15 { eps } => remark15_family(*eps, &grid)?,
        InitFamily::ConstantStress { c } => constant_stress(&grid, *c),
        InitFamily::Checkpoint { path } => {
            let c = read_checkpoint_on(path, cfg.n, cfg.box_len)?;
            let step = step_of(c.state.t, cfg.stepper.dt)?;
            return Ok((c.state, step));
        }
    };
    Ok((state, 0))
}

fn step_of(t: f64, dt: f64) -> Result<u64, RunError> {
    let k = (t / dt).round();
    if k < 0.0 || (k * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
        return Err(RunError::OffGrid { t, dt });
    }
    Ok(k as u64)
}

fn is_sample(step: u64, total: u64, every: u64) -> bool {
    step % every == 0 || step == total
}

fn conditions(state: &State, cfg: &RunConfig) -> Conditions {
    let opts = ConditionOptions {
        log_constant: cfg.log_constant_c,
        sobolev_s: cfg.sobolev_s,
    };
    let run = |th| check_theorem_conditions(&state.u, &state.tau, &cfg.params, cfg.smallness_c, th, opts);
    match (run(TheoremId::Thm1_1), run(TheoremId::Thm1_2)) {
        (Ok(a), Ok(b)) => Conditions {
            thm1_1: Some(a),
            thm1_2: Some(b),
            note: None,
        },
        (Err(e), _) | (_, Err(e)) => Conditions {
            thm1_1: None,
            thm1_2: None,
            note: Some(e.to_string()),
        },
    }
}

fn check_finite(r: &DiagnosticsRecord) -> Result<(), RunError> {
    if r.values().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(RunError::NonFinite { t: r.t })
    }
}

/// Runs into `cfg.resolved_output_dir()`.
pub fn simulate(cfg: &RunConfig, opts: SimulateOptions) -> Result<RunOutcome, RunError> {
    simulate_in(cfg, &cfg.resolved_output_dir(), opts)
}

/// Runs into the given directory, writing `series.csv`, `checkpoint.bin`
/// and `report.json`.
pub fn simulate_in(cfg: &RunConfig, dir: &Path, opts: SimulateOptions) -> Result<RunOutcome, RunError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let series_path = dir.join(SERIES_FILE);
    let ckpt_path = dir.join(CHECKPOINT_FILE);
    let dt = cfg.stepper.dt;
    let total = cfg.stepper.n_steps();

    let (mut state, mut history, mut recorder, mut writer, start_step, initial) = if opts.resume {
        let c = read_checkpoint_on(&ckpt_path, cfg.n, cfg.box_len)?;
        let start = step_of(c.state.t, dt)?;
        let kept: Vec<DiagnosticsRecord> = read_series(&series_path)?
            .into_iter()
            .filter(|r| r.t <= c.state.t)
            .collect();
        let last = *kept
            .last()
            .ok_or_else(|| RunError::Invalid("cannot resume: series.csv has no rows".into()))?;
        let recorder = Recorder::resume(&c.state, &cfg.params, last)?;
        let writer = SeriesWriter::rewrite(&series_path, &kept)?;
        let (init, _) = initial_state(cfg)?;
        (c.state, kept, recorder, writer, start, init)
    } else {
        let (mut s, start) = initial_state(cfg)?;
        s.t = start as f64 * dt;
        let mut recorder = Recorder::new(&s, &cfg.params)?;
        let mut writer = SeriesWriter::create(&series_path)?;
        let first = recorder.observe(&s)?;
        check_finite(&first)?;
        writer.append(&first)?;
        let init = s.clone();
        (s, vec![first], recorder, writer, start, init)
    };

    let mut cfl = None;
    let mut last_step = start_step;
    for k in (start_step + 1)..=total {
        match step(&state, &cfg.params, &cfg.stepper) {
            Ok(mut next) => {
                next.t = k as f64 * dt;
                state = next;
            }
            Err(DynamicsError::Cfl { dt, admissible }) => {
                cfl = Some(CflFailure {
                    step: k,
                    t: state.t,
                    dt,
                    admissible,
                });
                break;
            }
            Err(e) => return Err(RunError::Invalid(e.to_string())),
        }
        last_step = k;
        if is_sample(k, total, cfg.record_every) {
            let r = recorder.observe(&state)?;
            check_finite(&r)?;
            writer.append(&r)?;
            history.push(r);
        }
        if cfg.checkpoint_every > 0 && k % cfg.checkpoint_every == 0 && k != total {
            write_checkpoint(&ckpt_path, &state, k)?;
        }
    }
    write_checkpoint(&ckpt_path, &state, last_step)?;

    let series = summarize(&history, Some(&cfg.params), cfg.fit_window);
    let status = if cfl.is_some() {
        RunStatus::CflFailure
    } else if series.bkm_suspect {
        RunStatus::BkmSuspect
    } else {
        RunStatus::Completed
    };
    let report = Report {
        status,
        exit_code: status.exit_code(),
        model: cfg.model,
        params: cfg.params,
        grid: GridInfo {
            n: cfg.n,
            box_len: cfg.box_len,
        },
        stepper: StepperInfo {
            dt,
            t_end: cfg.stepper.t_end,
            cfl_safety: cfg.stepper.cfl_safety,
        },
        init: cfg.init.clone(),
        steps_completed: last_step,
        t_final: state.t,
        cfl_failure: cfl,
        divergence_defect_final: state.divergence_defect(),
        conditions: conditions(&initial, cfg),
        series,
    };
    let report_path = dir.join(REPORT_FILE);
    std::fs::write(&report_path, report.to_json()).map_err(io_err(&report_path))?;
    Ok(RunOutcome {
        report,
        output_dir: dir.to_path_buf(),
        final_state: state,
    })
}

/// Sample times a complete run of `cfg` records, when it starts from step 0.
pub fn expected_sample_times(cfg: &RunConfig) -> Vec<f64> {
    let total = cfg.stepper.n_steps();
    (0..=total)
        .filter(|&k| is_sample(k, total, cfg.record_every))
        .map(|k| k as f64 * cfg.stepper.dt)
        .collect()
}

/// Recomputes the series-derived report entries from a stored series. With
/// a configuration, the parameter-dependent entries are filled in and the
/// series is checked for missing rows.
pub fn diagnose(
    series_path: &Path,
    cfg: Option<&RunConfig>,
    window: Option<(f64, f64)>,
) -> Result<SeriesSummary, RunError> {
    let history = read_series(series_path)?;
    if let Some(c) = cfg {
        if !matches!(c.init, InitFamily::Checkpoint { .. }) {
            let expected = expected_sample_times(c);
            if history.len() < expected.len() {
                return Err(RunError::MissingRows {
                    expected: expected.len(),
                    found: history.len(),
                    first_missing: expected[history.len()],
                });
            }
        }
    }
    let window = window.or(cfg.and_then(|c| c.fit_window));
    Ok(summarize(&history, cfg.map(|c| &c.params), window))
}

pub fn fit(series_path: &Path, window: (f64, f64)) -> Result<DecayFit, RunError> {
    let history = read_series(series_path)?;
    Ok(fit_decay_exponent(&history, window)?)
}
