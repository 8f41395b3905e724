//! Helpers shared by the integration and acceptance tests.

#![allow(dead_code)]

use nalgebra::{Matrix5, Vector5};
use num_complex::Complex64;

use oldroyd::diagnostics::{DiagnosticsRecord, Recorder};
use oldroyd::dynamics::{step, State, StepperConfig};
use oldroyd::fields::ModelParams;

/// Generator of the linearisation about the rest state for one Fourier
/// mode, acting on `(û₁, û₂, τ̂₁₁, τ̂₁₂, τ̂₂₂)`.
///
/// `û' = −ν|k|²û + P(k)(i k·τ̂)`, `τ̂' = −(a + μ|k|²)τ̂ + α D̂(û)` with
/// `D̂ᵢⱼ = (i/2)(kᵢûⱼ + kⱼûᵢ)`. The co-rotational model has no `D̂` source.
pub fn linear_mode_matrix(k1: f64, k2: f64, p: &ModelParams) -> Matrix5<Complex64> {
    let i = Complex64::i();
    let ksq = k1 * k1 + k2 * k2;
    let proj = [
        [1.0 - k1 * k1 / ksq, -k1 * k2 / ksq],
        [-k1 * k2 / ksq, 1.0 - k2 * k2 / ksq],
    ];
    // (div τ)^ as rows acting on (τ₁₁, τ₁₂, τ₂₂)
    let div = [[i * k1, i * k2, Complex64::from(0.0)], [Complex64::from(0.0), i * k1, i * k2]];
    let mut m = Matrix5::<Complex64>::zeros();
    for r in 0..2 {
        m[(r, r)] = Complex64::from(-p.nu * ksq);
        for c in 0..3 {
            m[(r, 2 + c)] = proj[r][0] * div[0][c] + proj[r][1] * div[1][c];
        }
    }
    let damp = Complex64::from(-(p.a + p.mu * ksq));
    for r in 2..5 {
        m[(r, r)] = damp;
    }
    let alpha = if p.corotational { 0.0 } else { p.alpha };
    m[(2, 0)] = alpha * i * k1;
    m[(3, 0)] = alpha * 0.5 * i * k2;
    m[(3, 1)] = alpha * 0.5 * i * k1;
    m[(4, 1)] = alpha * i * k2;
    m
}

/// `exp(tM) y₀`.
pub fn linear_mode_solution(m: &Matrix5<Complex64>, y0: &Vector5<Complex64>, t: f64) -> Vector5<Complex64> {
    (m * Complex64::from(t)).exp() * y0
}

/// The five coefficients of `state` at mode `(m1, m2)`.
pub fn mode_vector(state: &State, m1: i64, m2: i64) -> Vector5<Complex64> {
    Vector5::new(
        state.u.u1.coeff(m1, m2),
        state.u.u2.coeff(m1, m2),
        state.tau.t11.coeff(m1, m2),
        state.tau.t12.coeff(m1, m2),
        state.tau.t22.coeff(m1, m2),
    )
}

/// Steps `state` to `t_end`, recording every `every` steps and at the end.
pub fn run_recorded(
    state: &State,
    params: &ModelParams,
    dt: f64,
    t_end: f64,
    every: u64,
) -> (State, Vec<DiagnosticsRecord>) {
    let cfg = StepperConfig {
        dt,
        t_end,
        cfl_safety: 0.5,
    };
    let total = cfg.n_steps();
    let mut rec = Recorder::new(state, params).expect("partition builds");
    let mut s = state.clone();
    let mut hist = vec![rec.observe(&s).unwrap()];
    for k in 1..=total {
        s = step(&s, params, &cfg).expect("step within CFL");
        s.t = k as f64 * dt;
        if k % every == 0 || k == total {
            hist.push(rec.observe(&s).unwrap());
        }
    }
    (s, hist)
}

/// Steps without recording.
pub fn run_to(state: &State, params: &ModelParams, dt: f64, t_end: f64) -> State {
    let cfg = StepperConfig {
        dt,
        t_end,
        cfl_safety: 0.5,
    };
    let mut s = state.clone();
    for k in 1..=cfg.n_steps() {
        s = step(&s, params, &cfg).expect("step within CFL");
        s.t = k as f64 * dt;
    }
    s
}
