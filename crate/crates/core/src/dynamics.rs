//! Right-hand side of the velocity/stress system, the integrating-factor
//! RK4 stepper and the Γ transport residual.
//!
//! The diagonal linear part (`νΔ` on `u`, `−a + μΔ` on `τ`) is integrated
//! exactly per Fourier mode; everything else, including the off-diagonal
//! linear couplings `P div τ` and `αD(u)`, is explicit.

use std::sync::Arc;

use num_complex::Complex64;

use crate::fields::{
    deformation, norm_l2, norm_linf, q_from_physical, q_pointwise, ModelParams, PhysicalGradients,
};
use crate::spectral::{
    curl, dealias, divergence, leray_project, partial, riesz_r, tensor_divergence, FrequencyGrid,
    SpectralScalarField, SpectralSymTensorField, SpectralVectorField,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("CFL bound violated: dt = {dt} exceeds the admissible step {admissible}")]
    Cfl { dt: f64, admissible: f64 },
    #[error("stepper setting `{name}` = {value} is invalid: {reason}")]
    InvalidConfig {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("inapplicable: {0}")]
    Inapplicable(&'static str),
}

/// Velocity and stress at time `t`.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub u: SpectralVectorField,
    pub tau: SpectralSymTensorField,
}

impl State {
    pub fn zero(grid: &Arc<FrequencyGrid>) -> Self {
        Self {
            t: 0.0,
            u: SpectralVectorField::zeros(grid),
            tau: SpectralSymTensorField::zeros(grid),
        }
    }

    /// Builds a state after projecting `u` and dealiasing both fields.
    pub fn new(t: f64, u: SpectralVectorField, tau: SpectralSymTensorField) -> Self {
        Self {
            t,
            u: leray_project(&u).map(dealias),
            tau: tau.map(dealias),
        }
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        self.u.grid()
    }

    /// `‖div u‖_{L²} / ‖∇u‖_{L²}` (0 for a constant velocity).
    pub fn divergence_defect(&self) -> f64 {
        let d = norm_l2(&divergence(&self.u));
        let scale = norm_l2(&partial(&self.u.u1, 0))
            + norm_l2(&partial(&self.u.u1, 1))
            + norm_l2(&partial(&self.u.u2, 0))
            + norm_l2(&partial(&self.u.u2, 1));
        if scale == 0.0 {
            d
        } else {
            d / scale
        }
    }

    /// Largest coefficient mismatch `|f̂(−k) − conj f̂(k)|` over all components.
    pub fn hermitian_defect(&self) -> f64 {
        self.u.hermitian_defect().max(self.tau.hermitian_defect())
    }

    /// Largest coefficient magnitude outside the dealiasing mask.
    pub fn alias_defect(&self) -> f64 {
        let grid = self.grid();
        let comps = [
            &self.u.u1,
            &self.u.u2,
            &self.tau.t11,
            &self.tau.t12,
            &self.tau.t22,
        ];
        let mut worst: f64 = 0.0;
        for c in comps {
            for (idx, v) in c.coeffs().iter().enumerate() {
                if !grid.in_mask(idx) {
                    worst = worst.max(v.norm());
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
}

impl StepperConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(DynamicsError::InvalidConfig {
                name: "dt",
                value: self.dt,
                reason: "must be finite and positive",
            });
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(DynamicsError::InvalidConfig {
                name: "t_end",
                value: self.t_end,
                reason: "must be finite and non-negative",
            });
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(DynamicsError::InvalidConfig {
                name: "cfl_safety",
                value: self.cfl_safety,
                reason: "must lie in (0, 1]",
            });
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`, rounding to the nearest integer.
    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

/// `cfl_safety · Δx / max(1, ‖u‖_{L^∞})`.
pub fn admissible_dt(state: &State, cfl_safety: f64) -> f64 {
    cfl_safety * state.grid().dx() / norm_linf(&state.u).max(1.0)
}

fn physical_tensor(tau: &SpectralSymTensorField) -> [Vec<f64>; 3] {
    [tau.t11.to_physical(), tau.t12.to_physical(), tau.t22.to_physical()]
}

/// `v · ∇f` in physical space, dealiased. `v` holds physical components.
fn advect(v: &[Vec<f64>; 2], f: &SpectralScalarField) -> SpectralScalarField {
    let g1 = partial(f, 0).to_physical();
    let g2 = partial(f, 1).to_physical();
    let prod: Vec<f64> = (0..g1.len())
        .map(|i| v[0][i] * g1[i] + v[1][i] * g2[i])
        .collect();
    dealias(&SpectralScalarField::from_physical(f.grid(), &prod))
}

fn advect_tensor(v: &[Vec<f64>; 2], tau: &SpectralSymTensorField) -> SpectralSymTensorField {
    tau.map(|c| advect(v, c))
}

/// Everything except the diagonal linear part:
/// `(P(−u·∇u + div τ), −u·∇τ − Q + αD(u))`.
fn explicit_terms(
    u: &SpectralVectorField,
    tau: &SpectralSymTensorField,
    params: &ModelParams,
) -> (SpectralVectorField, SpectralSymTensorField) {
    let grid = u.grid();
    let comps = [&u.u1, &u.u2, &tau.t11, &tau.t12, &tau.t22];
    let derivs: Vec<SpectralScalarField> = comps
        .iter()
        .flat_map(|c| [partial(c, 0), partial(c, 1)])
        .collect();
    let inputs: Vec<&[Complex64]> = comps
        .iter()
        .map(|c| c.coeffs())
        .chain(derivs.iter().map(|d| d.coeffs()))
        .collect();
    // [u₁, u₂, τ₁₁, τ₁₂, τ₂₂, ∂₁u₁, ∂₂u₁, ∂₁u₂, ∂₂u₂, ∂₁τ₁₁, ∂₂τ₁₁, …]
    let p = grid.inverse_many(&inputs);

    let b = if params.corotational { 0.0 } else { params.b };
    let mut out: [Vec<f64>; 8] = std::array::from_fn(|_| Vec::with_capacity(grid.len()));
    for i in 0..grid.len() {
        let (v1, v2) = (p[0][i], p[1][i]);
        let dot = |k: usize| v1 * p[k][i] + v2 * p[k + 1][i];
        let grad_u = [[p[5][i], p[6][i]], [p[7][i], p[8][i]]];
        let t = [[p[2][i], p[3][i]], [p[3][i], p[4][i]]];
        let q = q_pointwise(&grad_u, &t, b);
        let vals = [dot(5), dot(7), dot(9), dot(11), dot(13), q[0][0], q[0][1], q[1][1]];
        for (o, v) in out.iter_mut().zip(vals) {
            o.push(v);
        }
    }
    let refs: Vec<&[f64]> = out.iter().map(|v| v.as_slice()).collect();
    let mut n: Vec<SpectralScalarField> = grid
        .forward_many(&refs)
        .into_iter()
        .map(|c| dealias(&SpectralScalarField::from_coeffs(grid, c)))
        .collect();
    let mut take = || n.remove(0);
    let (adv1, adv2) = (take(), take());
    let adv_tau = SpectralSymTensorField {
        t11: take(),
        t12: take(),
        t22: take(),
    };
    let q = SpectralSymTensorField {
        t11: take(),
        t12: take(),
        t22: take(),
    };

    let mut du = tensor_divergence(tau);
    du.u1.axpy(-1.0, &adv1);
    du.u2.axpy(-1.0, &adv2);
    let du = leray_project(&du);

    let mut dtau = adv_tau.scale(-1.0);
    dtau.axpy(-1.0, &q);
    if !params.corotational && params.alpha != 0.0 {
        dtau.axpy(params.alpha, &deformation(u));
    }
    (du, dtau)
}

/// Full time derivative `(∂ₜu, ∂ₜτ)`.
pub fn rhs(state: &State, params: &ModelParams) -> (SpectralVectorField, SpectralSymTensorField) {
    let (mut du, mut dtau) = explicit_terms(&state.u, &state.tau, params);
    let grid = Arc::clone(state.grid());
    let lin_u = |c: &SpectralScalarField| c.apply_multiplier(|idx| -params.nu * grid.k_squared(idx));
    let lin_t =
        |c: &SpectralScalarField| c.apply_multiplier(|idx| -(params.a + params.mu * grid.k_squared(idx)));
    du.axpy(1.0, &state.u.map(lin_u));
    dtau.axpy(1.0, &state.tau.map(lin_t));
    (du, dtau)
}

/// Five coefficient arrays `u₁, u₂, τ₁₁, τ₁₂, τ₂₂`.
type Packed = [Vec<Complex64>; 5];

fn pack(u: &SpectralVectorField, tau: &SpectralSymTensorField) -> Packed {
    [
        u.u1.coeffs().to_vec(),
        u.u2.coeffs().to_vec(),
        tau.t11.coeffs().to_vec(),
        tau.t12.coeffs().to_vec(),
        tau.t22.coeffs().to_vec(),
    ]
}

fn unpack(grid: &Arc<FrequencyGrid>, p: Packed) -> (SpectralVectorField, SpectralSymTensorField) {
    let [u1, u2, t11, t12, t22] = p;
    let f = |c| SpectralScalarField::from_coeffs(grid, c);
    (
        SpectralVectorField { u1: f(u1), u2: f(u2) },
        SpectralSymTensorField {
            t11: f(t11),
            t12: f(t12),
            t22: f(t22),
        },
    )
}

/// Per-mode integrating factors `e^{Lh}` for the velocity and the stress.
struct Factors {
    u: Vec<f64>,
    tau: Vec<f64>,
}

impl Factors {
    fn new(grid: &FrequencyGrid, params: &ModelParams, h: f64) -> Self {
        let k2: Vec<f64> = (0..grid.len()).map(|idx| grid.k_squared(idx)).collect();
        Self {
            u: k2.iter().map(|&k| (-params.nu * k * h).exp()).collect(),
            tau: k2.iter().map(|&k| (-(params.a + params.mu * k) * h).exp()).collect(),
        }
    }

    fn of(&self, comp: usize) -> &[f64] {
        if comp < 2 {
            &self.u
        } else {
            &self.tau
        }
    }
}

/// `out = E·x + Σ cᵢ·Fᵢ·yᵢ` componentwise; `None` factors mean identity.
fn combine(
    x: Option<(&Factors, &Packed)>,
    terms: &[(f64, Option<&Factors>, &Packed)],
) -> Packed {
    std::array::from_fn(|comp| {
        let len = terms.first().map(|t| t.2[comp].len()).unwrap_or(0);
        let mut out = match x {
            Some((e, v)) => v[comp].iter().zip(e.of(comp)).map(|(c, f)| c * f).collect(),
            None => vec![Complex64::new(0.0, 0.0); len],
        };
        for (c, e, y) in terms {
            match e {
                Some(e) => {
                    for ((o, v), f) in out.iter_mut().zip(&y[comp]).zip(e.of(comp)) {
                        *o += v * (c * f);
                    }
                }
                None => {
                    for (o, v) in out.iter_mut().zip(&y[comp]) {
                        *o += v * *c;
                    }
                }
            }
        }
        out
    })
}

fn eval(grid: &Arc<FrequencyGrid>, p: &Packed, params: &ModelParams) -> Packed {
    let (u, tau) = unpack(grid, p.clone());
    let (du, dtau) = explicit_terms(&u, &tau, params);
    pack(&du, &dtau)
}

/// One integrating-factor RK4 step of size `h` (which may be negative),
/// without the CFL check.
pub(crate) fn advance(state: &State, params: &ModelParams, h: f64) -> State {
    let grid = Arc::clone(state.grid());
    let e_half = Factors::new(&grid, params, 0.5 * h);
    let e_full = Factors::new(&grid, params, h);
    let y0 = pack(&state.u, &state.tau);

    let k1 = eval(&grid, &y0, params);
    let ya = combine(Some((&e_half, &y0)), &[(0.5 * h, Some(&e_half), &k1)]);
    let k2 = eval(&grid, &ya, params);
    let yb = combine(Some((&e_half, &y0)), &[(0.5 * h, None, &k2)]);
    let k3 = eval(&grid, &yb, params);
    let yc = combine(Some((&e_full, &y0)), &[(h, Some(&e_half), &k3)]);
    let k4 = eval(&grid, &yc, params);
    let y1 = combine(
        Some((&e_full, &y0)),
        &[
            (h / 6.0, Some(&e_full), &k1),
            (h / 3.0, Some(&e_half), &k2),
            (h / 3.0, Some(&e_half), &k3),
            (h / 6.0, None, &k4),
        ],
    );
    let (u, tau) = unpack(&grid, y1);
    State {
        t: state.t + h,
        u: leray_project(&u),
        tau,
    }
}

/// Advances by `cfg.dt` after re-checking the CFL bound.
pub fn step(state: &State, params: &ModelParams, cfg: &StepperConfig) -> Result<State, DynamicsError> {
    let admissible = admissible_dt(state, cfg.cfl_safety);
    if cfg.dt > admissible {
        return Err(DynamicsError::Cfl {
            dt: cfg.dt,
            admissible,
        });
    }
    Ok(advance(state, params, cfg.dt))
}

/// `Γ = μω − Rτ` with `ω = ∂₁u₂ − ∂₂u₁`.
pub fn gamma_field(state: &State, params: &ModelParams) -> SpectralScalarField {
    let mut g = curl(&state.u).scale(params.mu);
    g.axpy(-1.0, &riesz_r(&state.tau));
    g
}

/// `‖∂ₜΓ + u·∇Γ − aRτ − RQ(Ω, τ) − [R, u·∇]τ‖_{L²}` with the time derivative
/// taken as a centered difference over one probe step in each direction.
///
/// Only the co-rotational model without velocity diffusion carries this
/// transport law.
pub fn gamma_residual(state: &State, params: &ModelParams, dt_probe: f64) -> Result<f64, DynamicsError> {
    if !params.corotational {
        return Err(DynamicsError::Inapplicable(
            "the Γ transport law is only available for the co-rotational model",
        ));
    }
    if params.nu != 0.0 {
        return Err(DynamicsError::Inapplicable(
            "the Γ transport law requires nu = 0",
        ));
    }
    if !(dt_probe.is_finite() && dt_probe > 0.0) {
        return Err(DynamicsError::InvalidConfig {
            name: "dt_probe",
            value: dt_probe,
            reason: "must be finite and positive",
        });
    }
    let plus = gamma_field(&advance(state, params, dt_probe), params);
    let minus = gamma_field(&advance(state, params, -dt_probe), params);
    let mut res = (&plus - &minus).scale(0.5 / dt_probe);

    let up = [state.u.u1.to_physical(), state.u.u2.to_physical()];
    let gamma = gamma_field(state, params);
    res.axpy(1.0, &advect(&up, &gamma));

    let r_tau = riesz_r(&state.tau);
    res.axpy(-params.a, &r_tau);
    let grads = PhysicalGradients::new(&state.u);
    let q = q_from_physical(state.grid(), &grads, &physical_tensor(&state.tau), 0.0);
    res.axpy(-1.0, &riesz_r(&q));
    res.axpy(-1.0, &riesz_r(&advect_tensor(&up, &state.tau)));
    res.axpy(1.0, &advect(&up, &r_tau));
    Ok(norm_l2(&res))
}
