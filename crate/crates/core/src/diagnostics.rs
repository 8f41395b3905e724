//! Time-series monitors: per-sample norm records, the stress energy
//! identity, decay envelopes, the H¹ dissipation inequality, the BKM
//! accumulator, smallness-condition checks, Fourier-splitting tallies and
//! decay-exponent fits.
//!
//! Everything except [`Recorder`], [`check_theorem_conditions`] and
//! [`fourier_splitting_tally`] works on the recorded series alone, so the
//! same code serves live runs and `diagnose` on a stored `series.csv`.

use serde::Serialize;

use crate::dynamics::{gamma_field, State};
use crate::fields::{
    norm_hs, norm_hs_homogeneous, norm_l2, norm_linf, norm_lp, vorticity_scalar, ModelParams,
};
use crate::littlewood_paley::{besov_norm, build_partition, LPPartition, LpError};
use crate::spectral::{gradient, FieldStack, SpectralSymTensorField, SpectralVectorField};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagError {
    #[error("history is empty")]
    EmptyHistory,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("inapplicable: {0}")]
    Inapplicable(String),
    #[error("no samples inside the window [{t_lo}, {t_hi}]")]
    WindowEmpty { t_lo: f64, t_hi: f64 },
    #[error("nonpositive H1 norm at t = {t}")]
    NonPositiveNorm { t: f64 },
    #[error(transparent)]
    Partition(#[from] LpError),
}

/// Column names of one record, in storage order.
pub const COLUMNS: [&str; 14] = [
    "t",
    "l2_u",
    "h1_u",
    "l2_tau",
    "h1_tau",
    "h2_tau",
    "linf_tau",
    "l4_tau",
    "linf_omega",
    "l2_omega",
    "linf_gamma",
    "b0inf1_gamma",
    "besov_tau_b0inf1",
    "bkm_accum",
];

/// Monitored quantities at one sample time. Sobolev norms are
/// inhomogeneous; `omega` is `Ω = ½(∂₁u₂ − ∂₂u₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_tau: f64,
    pub h1_tau: f64,
    pub h2_tau: f64,
    pub linf_tau: f64,
    pub l4_tau: f64,
    pub linf_omega: f64,
    pub l2_omega: f64,
    pub linf_gamma: f64,
    pub b0inf1_gamma: f64,
    pub besov_tau_b0inf1: f64,
    pub bkm_accum: f64,
}

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 14] {
        [
            self.t,
            self.l2_u,
            self.h1_u,
            self.l2_tau,
            self.h1_tau,
            self.h2_tau,
            self.linf_tau,
            self.l4_tau,
            self.linf_omega,
            self.l2_omega,
            self.linf_gamma,
            self.b0inf1_gamma,
            self.besov_tau_b0inf1,
            self.bkm_accum,
        ]
    }

    pub fn from_values(v: [f64; 14]) -> Self {
        Self {
            t: v[0],
            l2_u: v[1],
            h1_u: v[2],
            l2_tau: v[3],
            h1_tau: v[4],
            h2_tau: v[5],
            linf_tau: v[6],
            l4_tau: v[7],
            linf_omega: v[8],
            l2_omega: v[9],
            linf_gamma: v[10],
            b0inf1_gamma: v[11],
            besov_tau_b0inf1: v[12],
            bkm_accum: v[13],
        }
    }

    /// `‖(u, τ)‖²_{H¹}`.
    pub fn h1_energy(&self) -> f64 {
        self.h1_u * self.h1_u + self.h1_tau * self.h1_tau
    }

    /// `‖∇τ‖²_{L²}`, recovered from the stored norms.
    pub fn grad_tau_sq(&self) -> f64 {
        (self.h1_tau * self.h1_tau - self.l2_tau * self.l2_tau).max(0.0)
    }

    /// `‖∇u‖²_{L²}`, recovered from the stored norms.
    pub fn grad_u_sq(&self) -> f64 {
        (self.h1_u * self.h1_u - self.l2_u * self.l2_u).max(0.0)
    }
}

/// One trapezoid increment of `∫‖Ω‖²_{L^∞}`. Shared by the live recorder
/// and the offline recomputation so both agree bit for bit.
fn bkm_increment(prev: &DiagnosticsRecord, t: f64, linf_omega: f64) -> f64 {
    prev.bkm_accum
        + 0.5 * (t - prev.t) * (prev.linf_omega * prev.linf_omega + linf_omega * linf_omega)
}

/// Produces records for successive states of one run.
pub struct Recorder {
    partition: LPPartition,
    params: ModelParams,
    last: Option<DiagnosticsRecord>,
}

impl Recorder {
    pub fn new(state: &State, params: &ModelParams) -> Result<Self, DiagError> {
        Ok(Self {
            partition: build_partition(state.grid())?,
            params: *params,
            last: None,
        })
    }

    /// Continues an accumulator from a previously recorded sample.
    pub fn resume(
        state: &State,
        params: &ModelParams,
        last: DiagnosticsRecord,
    ) -> Result<Self, DiagError> {
        let mut r = Self::new(state, params)?;
        r.last = Some(last);
        Ok(r)
    }

    pub fn partition(&self) -> &LPPartition {
        &self.partition
    }

    pub fn observe(&mut self, state: &State) -> Result<DiagnosticsRecord, DiagError> {
        let omega = vorticity_scalar(&state.u);
        let gamma = gamma_field(state, &self.params);
        let part = &self.partition;
        let inf = f64::INFINITY;
        let linf_omega = norm_linf(&omega);
        let bkm_accum = match &self.last {
            Some(prev) => bkm_increment(prev, state.t, linf_omega),
            None => 0.0,
        };
        let rec = DiagnosticsRecord {
            t: state.t,
            l2_u: norm_l2(&state.u),
            h1_u: norm_hs(&state.u, 1.0),
            l2_tau: norm_l2(&state.tau),
            h1_tau: norm_hs(&state.tau, 1.0),
            h2_tau: norm_hs(&state.tau, 2.0),
            linf_tau: norm_linf(&state.tau),
            l4_tau: norm_lp(&state.tau, 4.0).expect("p = 4 is supported"),
            linf_omega,
            l2_omega: norm_l2(&omega),
            linf_gamma: norm_linf(&gamma),
            b0inf1_gamma: besov_norm(&gamma, 0.0, inf, 1.0, part)?,
            besov_tau_b0inf1: besov_norm(&state.tau, 0.0, inf, 1.0, part)?,
            bkm_accum,
        };
        self.last = Some(rec);
        Ok(rec)
    }
}

/// Maximum over samples of
/// `|e^{2at}‖τ‖² + 2μ∫₀ᵗ e^{2as}‖∇τ‖² ds − ‖τ₀‖²| / ‖τ₀‖²`, with the
/// integral accumulated by the trapezoid rule over the samples.
pub fn energy_identity_residual(
    history: &[DiagnosticsRecord],
    params: &ModelParams,
) -> Result<f64, DiagError> {
    if history.is_empty() {
        return Err(DiagError::EmptyHistory);
    }
    if !params.corotational {
        return Err(DiagError::Inapplicable(
            "the stress energy identity holds only for the co-rotational model".into(),
        ));
    }
    let e0 = history[0].l2_tau * history[0].l2_tau;
    if e0 == 0.0 {
        return Ok(0.0);
    }
    let t0 = history[0].t;
    let weight = |r: &DiagnosticsRecord| (2.0 * params.a * (r.t - t0)).exp();
    let integrand = |r: &DiagnosticsRecord| weight(r) * r.grad_tau_sq();
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    for (i, r) in history.iter().enumerate() {
        if i > 0 {
            let p = &history[i - 1];
            integral += 0.5 * (r.t - p.t) * (integrand(p) + integrand(r));
        }
        let lhs = weight(r) * r.l2_tau * r.l2_tau + 2.0 * params.mu * integral;
        worst = worst.max((lhs - e0).abs() / e0);
    }
    Ok(worst)
}

/// Lebesgue exponent of the stress envelope check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeNorm {
    L2,
    L4,
    LInf,
}

impl EnvelopeNorm {
    pub const ALL: [EnvelopeNorm; 3] = [EnvelopeNorm::L2, EnvelopeNorm::L4, EnvelopeNorm::LInf];

    fn pick(&self, r: &DiagnosticsRecord) -> f64 {
        match self {
            EnvelopeNorm::L2 => r.l2_tau,
            EnvelopeNorm::L4 => r.l4_tau,
            EnvelopeNorm::LInf => r.linf_tau,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EnvelopeNorm::L2 => "l2",
            EnvelopeNorm::L4 => "l4",
            EnvelopeNorm::LInf => "linf",
        }
    }
}

/// `max_t ‖τ(t)‖_{L^p} / (‖τ₀‖_{L^p} e^{−at})`.
pub fn exp_decay_envelope_check(
    history: &[DiagnosticsRecord],
    params: &ModelParams,
    p: EnvelopeNorm,
) -> Result<f64, DiagError> {
    let first = history.first().ok_or(DiagError::EmptyHistory)?;
    let n0 = p.pick(first);
    if n0 == 0.0 {
        return Err(DiagError::Inapplicable(format!(
            "initial stress has zero {} norm",
            p.label()
        )));
    }
    Ok(history
        .iter()
        .map(|r| p.pick(r) / (n0 * (-params.a * (r.t - first.t)).exp()))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H1Dissipation {
    /// Largest positive part of the discrete inequality over adjacent samples.
    pub worst_violation: f64,
    /// Largest signed value (negative when the inequality holds with margin).
    pub max_signed: f64,
}

/// Discrete form of `d/dt‖(u,τ)‖²_{H¹} + ‖∇u‖²_{L²} + ‖τ‖²_{H²} ≤ 0` on
/// adjacent samples, with dissipation terms averaged at the interval ends.
pub fn h1_dissipation_check(history: &[DiagnosticsRecord]) -> Result<H1Dissipation, DiagError> {
    if history.len() < 2 {
        return Err(DiagError::TooFewSamples {
            needed: 2,
            got: history.len(),
        });
    }
    let dissipation = |r: &DiagnosticsRecord| r.grad_u_sq() + r.h2_tau * r.h2_tau;
    let mut max_signed = f64::NEG_INFINITY;
    for w in history.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let rate = (q.h1_energy() - p.h1_energy()) / (q.t - p.t);
        let v = rate + 0.5 * (dissipation(p) + dissipation(q));
        max_signed = max_signed.max(v);
    }
    Ok(H1Dissipation {
        worst_violation: max_signed.max(0.0),
        max_signed,
    })
}

/// Trapezoid accumulation of `‖Ω‖²_{L^∞}` recomputed from the series; equal
/// bit for bit to the live `bkm_accum` column.
pub fn bkm_series(history: &[DiagnosticsRecord]) -> Vec<f64> {
    let mut out = Vec::with_capacity(history.len());
    let mut prev: Option<DiagnosticsRecord> = None;
    for r in history {
        let acc = match &prev {
            Some(p) => bkm_increment(p, r.t, r.linf_omega),
            None => 0.0,
        };
        out.push(acc);
        prev = Some(DiagnosticsRecord { bkm_accum: acc, ..*r });
    }
    out
}

pub fn bkm_accumulate(history: &[DiagnosticsRecord]) -> f64 {
    bkm_series(history).last().copied().unwrap_or(0.0)
}

/// A run is suspect when the accumulator's growth rate increases strictly
/// at every interval of the last quarter of the samples (at least three
/// rates are required).
pub fn bkm_suspect(history: &[DiagnosticsRecord]) -> bool {
    let acc = bkm_series(history);
    let rates: Vec<f64> = history
        .windows(2)
        .zip(acc.windows(2))
        .map(|(r, a)| (a[1] - a[0]) / (r[1].t - r[0].t))
        .collect();
    let tail = (rates.len() / 4).max(3);
    if rates.len() < tail {
        return false;
    }
    let last = &rates[rates.len() - tail..];
    last.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-12) && w[1] > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    #[serde(rename = "thm1_1")]
    Thm1_1,
    #[serde(rename = "thm1_2")]
    Thm1_2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl ConditionCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            pass: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub theorem_id: TheoremId,
    pub conditions: Vec<ConditionCheck>,
    pub c_used: f64,
    pub log_constant: f64,
    pub sobolev_s: f64,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn passes(&self) -> usize {
        self.conditions.iter().filter(|c| c.pass).count()
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// User-supplied constants that the smallness conditions leave open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionOptions {
    /// `C` inside `ln(C + ‖(u₀, τ₀)‖²_{H^s})`.
    pub log_constant: f64,
    /// Sobolev index `s` of that logarithm.
    pub sobolev_s: f64,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        Self {
            log_constant: std::f64::consts::E,
            sobolev_s: 3.0,
        }
    }
}

/// `H₀ = ‖(u₀,τ₀)‖²_{H¹} exp(6/(aμ) + 6/(aμ)‖τ₀‖²_{L^∞} + 3μ⁻²‖τ₀‖²_{L²})`.
pub fn h0_weight(h1_sq: f64, tau_linf: f64, tau_l2: f64, a: f64, mu: f64) -> f64 {
    let am = a * mu;
    h1_sq * (6.0 / am + 6.0 / am * tau_linf * tau_linf + 3.0 / (mu * mu) * tau_l2 * tau_l2).exp()
}

/// Evaluates the smallness conditions of either global existence result on
/// the given data. Verdicts are conditional on `c` and `opts`.
pub fn check_theorem_conditions(
    u0: &SpectralVectorField,
    tau0: &SpectralSymTensorField,
    params: &ModelParams,
    c: f64,
    theorem: TheoremId,
    opts: ConditionOptions,
) -> Result<ConditionReport, DiagError> {
    if !(params.a > 0.0 && params.mu > 0.0) {
        return Err(DiagError::Inapplicable(
            "smallness conditions need a > 0 and mu > 0".into(),
        ));
    }
    let (a, mu) = (params.a, params.mu);
    let k = params.derived();
    let tau_h1 = norm_hs(tau0, 1.0);
    let conditions = match theorem {
        TheoremId::Thm1_1 => {
            let state = State {
                t: 0.0,
                u: u0.clone(),
                tau: tau0.clone(),
            };
            let gamma = gamma_field(&state, params);
            let hs_sq = norm_hs(&FieldStack::new(u0).with(tau0), opts.sobolev_s).powi(2);
            let log = (opts.log_constant + hs_sq).ln();
            vec![
                ConditionCheck::new("grad_u0_l2", norm_hs_homogeneous(u0, 1.0), c * k.kappa),
                ConditionCheck::new("tau0_h1", tau_h1, c * (a * mu).sqrt() * k.kappa),
                ConditionCheck::new("gamma0_linf", norm_linf(&gamma), c * a * mu),
                ConditionCheck::new(
                    "tau0_h1_log",
                    tau_h1 * tau_h1,
                    c * c * a * k.kappa * (mu + 1.0) * mu / log,
                ),
                ConditionCheck::new("tau0_h1_lambda", tau_h1, c * c * k.lambda),
            ]
        }
        TheoremId::Thm1_2 => {
            let part = build_partition(u0.grid())?;
            let inf = f64::INFINITY;
            let g1 = gradient(&u0.u1);
            let g2 = gradient(&u0.u2);
            let stack = FieldStack::new(&g1).with(&g2).with(tau0);
            let tau_b = besov_norm(tau0, 0.0, inf, 1.0, &part)?;
            let tau_l4 = norm_lp(tau0, 4.0).expect("p = 4 is supported");
            let h1_sq = norm_hs(&FieldStack::new(u0).with(tau0), 1.0).powi(2);
            let h0 = h0_weight(h1_sq, norm_linf(tau0), norm_l2(tau0), a, mu);
            let b = k.beta;
            let m = (mu * mu * b).min(mu).min(a * mu).min(b);
            vec![
                ConditionCheck::new(
                    "grad_u0_tau0_b0inf1",
                    besov_norm(&stack, 0.0, inf, 1.0, &part)?,
                    c * b,
                ),
                ConditionCheck::new("tau0_l4", tau_l4, c * b * mu.sqrt().min(1.0)),
                ConditionCheck::new("h0_weighted", h0 * (tau_b + tau_l4), c * b * m),
            ]
        }
    };
    Ok(ConditionReport {
        theorem_id: theorem,
        conditions,
        c_used: c,
        log_constant: opts.log_constant,
        sobolev_s: opts.sobolev_s,
    })
}

/// `(Σ_{k∈S(t)} …, Σ_k …)` of `L²(|û|² + |τ̂|²)` with
/// `S(t) = {k : |k|² ≤ C₂/(1+t)}`.
pub fn fourier_splitting_tally(state: &State, t: f64, c2: f64) -> (f64, f64) {
    let grid = state.grid();
    let radius_sq = c2 / (1.0 + t);
    let comps = [
        (1.0, &state.u.u1),
        (1.0, &state.u.u2),
        (1.0, &state.tau.t11),
        (2.0, &state.tau.t12),
        (1.0, &state.tau.t22),
    ];
    let mut inside = 0.0;
    let mut total = 0.0;
    for idx in 0..grid.len() {
        let e: f64 = comps.iter().map(|(w, c)| w * c.coeffs()[idx].norm_sqr()).sum();
        total += e;
        if grid.k_squared(idx) <= radius_sq {
            inside += e;
        }
    }
    let area = grid.box_len() * grid.box_len();
    (inside * area, total * area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares slope of `ln‖(u,τ)‖_{H¹}` against `ln(1+t)` over the
/// samples with `t_lo ≤ t ≤ t_hi`.
pub fn fit_decay_exponent(
    history: &[DiagnosticsRecord],
    t_window: (f64, f64),
) -> Result<DecayFit, DiagError> {
    let (t_lo, t_hi) = t_window;
    let picked: Vec<&DiagnosticsRecord> =
        history.iter().filter(|r| r.t >= t_lo && r.t <= t_hi).collect();
    if picked.is_empty() {
        return Err(DiagError::WindowEmpty { t_lo, t_hi });
    }
    if picked.len() < 8 {
        return Err(DiagError::TooFewSamples {
            needed: 8,
            got: picked.len(),
        });
    }
    let mut xs = Vec::with_capacity(picked.len());
    let mut ys = Vec::with_capacity(picked.len());
    for r in picked {
        let e = r.h1_energy();
        if !(e > 0.0) {
            return Err(DiagError::NonPositiveNorm { t: r.t });
        }
        xs.push((1.0 + r.t).ln());
        ys.push(0.5 * e.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit {
        exponent: slope,
        r_squared,
        samples: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{advance, StepperConfig};
    use crate::spectral::{FrequencyGrid, SpectralScalarField};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<FrequencyGrid> {
        FrequencyGrid::new(n, 2.0 * PI).unwrap()
    }

    fn power_law(c: f64, p: f64, ts: impl Iterator<Item = f64>) -> Vec<DiagnosticsRecord> {
        ts.map(|t| DiagnosticsRecord {
            t,
            h1_u: c * (1.0 + t).powf(p),
            ..Default::default()
        })
        .collect()
    }

    #[test]
    fn record_columns_roundtrip() {
        let v: [f64; 14] = std::array::from_fn(|i| i as f64 + 0.5);
        let r = DiagnosticsRecord::from_values(v);
        assert_eq!(r.values(), v);
        assert_eq!(COLUMNS.len(), 14);
        assert_eq!(r.t, 0.5);
        assert_eq!(r.bkm_accum, 13.5);
    }

    #[test]
    fn constant_stress_history() {
        let g = grid(16);
        let p = ModelParams::corotational(0.7, 1.0, 0.0).unwrap();
        let c = SpectralScalarField::from_fn(&g, |_, _| 1.3);
        let mut s = State::new(0.0, SpectralVectorField::zeros(&g), SpectralSymTensorField::isotropic(&c));
        let mut rec = Recorder::new(&s, &p).unwrap();
        let cfg = StepperConfig {
            dt: 0.01,
            t_end: 1.0,
            cfl_safety: 1.0,
        };
        let mut hist = vec![rec.observe(&s).unwrap()];
        for i in 1..=cfg.n_steps() {
            s = advance(&s, &p, cfg.dt);
            s.t = i as f64 * cfg.dt;
            if i % 10 == 0 {
                hist.push(rec.observe(&s).unwrap());
            }
        }
        assert!(energy_identity_residual(&hist, &p).unwrap() <= 1e-10);
        for norm in EnvelopeNorm::ALL {
            let r = exp_decay_envelope_check(&hist, &p, norm).unwrap();
            assert!((r - 1.0).abs() < 1e-12, "{norm:?}: {r}");
        }
        assert_eq!(bkm_accumulate(&hist), 0.0);
        assert!(!bkm_suspect(&hist));
    }

    #[test]
    fn identity_guards() {
        let p = ModelParams::corotational(1.0, 1.0, 0.0).unwrap();
        assert_eq!(energy_identity_residual(&[], &p), Err(DiagError::EmptyHistory));
        let zero = vec![DiagnosticsRecord::default(); 3];
        assert_eq!(energy_identity_residual(&zero, &p).unwrap(), 0.0);
        let general = ModelParams::general(1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            energy_identity_residual(&zero, &general),
            Err(DiagError::Inapplicable(_))
        ));
        assert!(matches!(
            exp_decay_envelope_check(&zero, &p, EnvelopeNorm::L4),
            Err(DiagError::Inapplicable(_))
        ));
    }

    #[test]
    fn bkm_constant_vorticity_is_linear() {
        let c = 0.75;
        let hist: Vec<DiagnosticsRecord> = (0..=20)
            .map(|i| DiagnosticsRecord {
                t: i as f64 * 0.05,
                linf_omega: c,
                ..Default::default()
            })
            .collect();
        let acc = bkm_series(&hist);
        for (r, a) in hist.iter().zip(&acc) {
            assert!((a - c * c * r.t).abs() < 1e-14);
        }
        assert!(!bkm_suspect(&hist));
    }

    #[test]
    fn bkm_flags_accelerating_growth() {
        let hist: Vec<DiagnosticsRecord> = (0..=40)
            .map(|i| {
                let t = i as f64 * 0.025;
                DiagnosticsRecord {
                    t,
                    linf_omega: 1.0 / (1.2 - t),
                    ..Default::default()
                }
            })
            .collect();
        assert!(bkm_suspect(&hist));
        let decaying: Vec<DiagnosticsRecord> = hist
            .iter()
            .map(|r| DiagnosticsRecord {
                linf_omega: (-r.t).exp(),
                ..*r
            })
            .collect();
        assert!(!bkm_suspect(&decaying));
    }

    #[test]
    fn dissipation_check_signs() {
        assert!(h1_dissipation_check(&[DiagnosticsRecord::default()]).is_err());
        let zero = vec![
            DiagnosticsRecord::default(),
            DiagnosticsRecord {
                t: 1.0,
                ..Default::default()
            },
        ];
        let d = h1_dissipation_check(&zero).unwrap();
        assert_eq!(d.worst_violation, 0.0);
        // u = 0, τ = c·Id: rate −2a c²e^{−2at}|box|, dissipation c²e^{−2at}|box|.
        let (c, box_area) = (0.1f64, 4.0f64);
        let series = |a: f64| -> Vec<DiagnosticsRecord> {
            (0..=100)
                .map(|i| {
                    let t = i as f64 * 0.01;
                    let n = c * (2.0 * box_area).sqrt() * (-a * t).exp();
                    DiagnosticsRecord {
                        t,
                        l2_tau: n,
                        h1_tau: n,
                        h2_tau: n,
                        ..Default::default()
                    }
                })
                .collect()
        };
        let strong = h1_dissipation_check(&series(1.0)).unwrap();
        assert_eq!(strong.worst_violation, 0.0);
        assert!(strong.max_signed < 0.0);
        let weak = h1_dissipation_check(&series(0.25)).unwrap();
        assert!(weak.worst_violation > 0.0);
    }

    #[test]
    fn fit_recovers_planted_exponents() {
        for p in [-0.25, -0.5, -1.0] {
            let h = power_law(2.0, p, (0..50).map(|i| i as f64 * 0.5));
            let fit = fit_decay_exponent(&h, (0.0, 100.0)).unwrap();
            assert!((fit.exponent - p).abs() < 1e-10, "{p}: {}", fit.exponent);
            assert!((fit.r_squared - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_flags_exponential_series() {
        let h: Vec<DiagnosticsRecord> = (0..=40)
            .map(|i| {
                let t = i as f64 / 40.0;
                DiagnosticsRecord {
                    t,
                    h1_u: (-t).exp(),
                    ..Default::default()
                }
            })
            .collect();
        let fit = fit_decay_exponent(&h, (0.0, 1.0)).unwrap();
        assert!(fit.r_squared < 1.0);
        assert!(fit.exponent < -1.0);
    }

    #[test]
    fn fit_errors() {
        let h = power_law(1.0, -0.5, (0..20).map(|i| i as f64));
        assert!(matches!(
            fit_decay_exponent(&h, (100.0, 200.0)),
            Err(DiagError::WindowEmpty { .. })
        ));
        assert!(matches!(
            fit_decay_exponent(&h, (0.0, 3.0)),
            Err(DiagError::TooFewSamples { needed: 8, got: 4 })
        ));
        let mut bad = h.clone();
        bad[5].h1_u = 0.0;
        assert!(matches!(
            fit_decay_exponent(&bad, (0.0, 19.0)),
            Err(DiagError::NonPositiveNorm { .. })
        ));
    }

    #[test]
    fn zero_data_passes_all_conditions() {
        let g = grid(32);
        let u = SpectralVectorField::zeros(&g);
        let tau = SpectralSymTensorField::zeros(&g);
        let p = ModelParams::corotational(1.0, 1.0, 0.0).unwrap();
        for th in [TheoremId::Thm1_1, TheoremId::Thm1_2] {
            let r = check_theorem_conditions(&u, &tau, &p, 0.01, th, ConditionOptions::default()).unwrap();
            assert!(r.all_pass());
            assert_eq!(r.c_used, 0.01);
        }
        let degenerate = ModelParams::corotational(0.0, 1.0, 0.0).unwrap();
        assert!(check_theorem_conditions(
            &u,
            &tau,
            &degenerate,
            0.1,
            TheoremId::Thm1_1,
            ConditionOptions::default()
        )
        .is_err());
    }

    #[test]
    fn tally_limits() {
        let g = grid(16);
        let f = SpectralScalarField::from_fn(&g, |x, y| 0.3 + (x + y).sin() + 0.2 * (3.0 * x).cos());
        let s = State::new(
            0.0,
            SpectralVectorField::zeros(&g),
            SpectralSymTensorField::isotropic(&f),
        );
        let (inside, total) = fourier_splitting_tally(&s, 0.0, 1e9);
        assert_eq!(inside, total);
        assert!((total - norm_l2(&s.tau).powi(2)).abs() < 1e-12 * total);
        let (inside, _) = fourier_splitting_tally(&s, 1e12, 1.0);
        let mean_energy = 2.0 * 0.09 * (2.0 * PI).powi(2);
        assert!((inside - mean_energy).abs() < 1e-12);
    }
}
