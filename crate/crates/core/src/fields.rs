//! Model constants, the bilinear stress terms `D(u)`, `Ω` and `Q(∇u, τ)`,
//! and the elementary norms.

use std::sync::Arc;

use crate::spectral::{
    dealias, partial, FrequencyGrid, SpectralField, SpectralScalarField, SpectralSymTensorField,
    SpectralVectorField,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamsError {
    #[error("parameter `{name}` = {value} is invalid: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error("unsupported Lebesgue exponent p = {0}; expected 2, 4 or infinity")]
    UnsupportedExponent(f64),
}

/// Constants of the general and co-rotational models.
///
/// `corotational` selects the co-rotational stress equation, where the
/// stress is only stretched by `Ω` and there is no `αD(u)` source; in that
/// case `alpha` and `b` are both zero.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub b: f64,
    pub corotational: bool,
}

impl ModelParams {
    pub fn general(a: f64, mu: f64, nu: f64, alpha: f64, b: f64) -> Result<Self, ParamsError> {
        let p = Self {
            a,
            mu,
            nu,
            alpha,
            b,
            corotational: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn corotational(a: f64, mu: f64, nu: f64) -> Result<Self, ParamsError> {
        let p = Self {
            a,
            mu,
            nu,
            alpha: 0.0,
            b: 0.0,
            corotational: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let nonneg = |name, value: f64| {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(ParamsError::Invalid {
                    name,
                    value,
                    reason: "must be finite and nonnegative",
                })
            }
        };
        nonneg("a", self.a)?;
        nonneg("mu", self.mu)?;
        nonneg("nu", self.nu)?;
        if !(self.b.is_finite() && (-1.0..=1.0).contains(&self.b)) {
            return Err(ParamsError::Invalid {
                name: "b",
                value: self.b,
                reason: "must lie in [-1, 1]",
            });
        }
        if self.corotational {
            if self.alpha != 0.0 {
                return Err(ParamsError::Invalid {
                    name: "alpha",
                    value: self.alpha,
                    reason: "co-rotational model requires alpha = 0",
                });
            }
            if self.b != 0.0 {
                return Err(ParamsError::Invalid {
                    name: "b",
                    value: self.b,
                    reason: "co-rotational model stores b = 0",
                });
            }
        } else if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ParamsError::Invalid {
                name: "alpha",
                value: self.alpha,
                reason: "general model requires alpha > 0",
            });
        }
        Ok(())
    }

    pub fn derived(&self) -> DerivedConstants {
        DerivedConstants::new(self.a, self.mu)
    }
}

/// Smallness scales built from `a` and `μ`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DerivedConstants {
    pub kappa: f64,
    pub lambda: f64,
    pub beta: f64,
    pub gamma_c: f64,
    pub eta: f64,
}

impl DerivedConstants {
    pub fn new(a: f64, mu: f64) -> Self {
        let min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            kappa: a.min(mu),
            lambda: min(&[
                a.sqrt(),
                a.powf(1.5) * mu,
                (a * mu).powf(1.5),
                a,
                mu,
                a * mu.powf(2.5),
                mu.powf(1.5),
            ]),
            beta: a.powf(0.125).min(a * a),
            gamma_c: a.powf(0.25).min(a),
            eta: a.powf(0.125).min(a.powf(1.5)),
        }
    }
}

/// `D(u) = (∇u + ∇uᵀ)/2`.
pub fn deformation(u: &SpectralVectorField) -> SpectralSymTensorField {
    let mut t12 = partial(&u.u1, 1);
    t12.axpy(1.0, &partial(&u.u2, 0));
    SpectralSymTensorField {
        t11: partial(&u.u1, 0),
        t12: t12.scale(0.5),
        t22: partial(&u.u2, 1),
    }
}

/// Scalar entry `Ω = ½(∂₁u₂ − ∂₂u₁)` of the antisymmetric gradient part;
/// the tensor has `Ω₂₁ = Ω`, `Ω₁₂ = −Ω`.
pub fn vorticity_scalar(u: &SpectralVectorField) -> SpectralScalarField {
    let mut w = partial(&u.u2, 0);
    w.axpy(-1.0, &partial(&u.u1, 1));
    w.scale(0.5)
}

type Mat2 = [[f64; 2]; 2];

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `Q = τΩ − Ωτ + b(Dτ + τD)` at one point, from the velocity gradient
/// `grad_u[i][j] = ∂ⱼuᵢ` and the stress matrix. Returns the full matrix.
pub fn q_pointwise(grad_u: &Mat2, tau: &Mat2, b: f64) -> Mat2 {
    let w = 0.5 * (grad_u[1][0] - grad_u[0][1]);
    let omega = [[0.0, -w], [w, 0.0]];
    let to = matmul(tau, &omega);
    let ot = matmul(&omega, tau);
    let mut q = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            q[i][j] = to[i][j] - ot[i][j];
        }
    }
    if b != 0.0 {
        let s = 0.5 * (grad_u[0][1] + grad_u[1][0]);
        let d = [[grad_u[0][0], s], [s, grad_u[1][1]]];
        let dt = matmul(&d, tau);
        let td = matmul(tau, &d);
        for i in 0..2 {
            for j in 0..2 {
                q[i][j] += b * (dt[i][j] + td[i][j]);
            }
        }
    }
    q
}

/// Physical-space velocity gradient and stress, shared by the nonlinear
/// terms.
pub(crate) struct PhysicalGradients {
    pub grad: [[Vec<f64>; 2]; 2],
}

impl PhysicalGradients {
    pub fn new(u: &SpectralVectorField) -> Self {
        Self {
            grad: [
                [partial(&u.u1, 0).to_physical(), partial(&u.u1, 1).to_physical()],
                [partial(&u.u2, 0).to_physical(), partial(&u.u2, 1).to_physical()],
            ],
        }
    }

    pub fn at(&self, i: usize) -> Mat2 {
        [
            [self.grad[0][0][i], self.grad[0][1][i]],
            [self.grad[1][0][i], self.grad[1][1][i]],
        ]
    }
}

pub(crate) fn q_from_physical(
    grid: &Arc<FrequencyGrid>,
    grads: &PhysicalGradients,
    tau: &[Vec<f64>; 3],
    b: f64,
) -> SpectralSymTensorField {
    let len = grid.len();
    let mut q11 = Vec::with_capacity(len);
    let mut q12 = Vec::with_capacity(len);
    let mut q22 = Vec::with_capacity(len);
    for i in 0..len {
        let t = [[tau[0][i], tau[1][i]], [tau[1][i], tau[2][i]]];
        let q = q_pointwise(&grads.at(i), &t, b);
        q11.push(q[0][0]);
        q12.push(q[0][1]);
        q22.push(q[1][1]);
    }
    SpectralSymTensorField {
        t11: dealias(&SpectralScalarField::from_physical(grid, &q11)),
        t12: dealias(&SpectralScalarField::from_physical(grid, &q12)),
        t22: dealias(&SpectralScalarField::from_physical(grid, &q22)),
    }
}

/// `Q(∇u, τ)`, evaluated pointwise and dealiased. The co-rotational model
/// keeps only the commutator part.
pub fn q_bilinear(
    u: &SpectralVectorField,
    tau: &SpectralSymTensorField,
    params: &ModelParams,
) -> SpectralSymTensorField {
    let grads = PhysicalGradients::new(u);
    let t = [tau.t11.to_physical(), tau.t12.to_physical(), tau.t22.to_physical()];
    let b = if params.corotational { 0.0 } else { params.b };
    q_from_physical(u.grid(), &grads, &t, b)
}

fn spectral_sum(f: &dyn SpectralField, weight: impl Fn(f64) -> f64) -> f64 {
    let grid = f.grid();
    let ksq: Vec<f64> = (0..grid.len()).map(|idx| grid.k_squared(idx)).collect();
    let mut total = 0.0;
    for (w, comp) in f.weighted_components() {
        let mut s = 0.0;
        for (c, &k2) in comp.coeffs().iter().zip(&ksq) {
            s += c.norm_sqr() * weight(k2);
        }
        total += w * s;
    }
    total * grid.box_len() * grid.box_len()
}

/// `‖f‖_{L²}` by Parseval.
pub fn norm_l2(f: &dyn SpectralField) -> f64 {
    spectral_sum(f, |_| 1.0).sqrt()
}

/// Inhomogeneous Sobolev norm with multiplier `(1 + |k|²)^{s/2}`.
pub fn norm_hs(f: &dyn SpectralField, s: f64) -> f64 {
    if s == 0.0 {
        return norm_l2(f);
    }
    spectral_sum(f, |k2| (1.0 + k2).powf(s)).sqrt()
}

/// Homogeneous Sobolev norm with multiplier `|k|^s`; the mean does not
/// contribute for `s > 0`.
pub fn norm_hs_homogeneous(f: &dyn SpectralField, s: f64) -> f64 {
    if s == 0.0 {
        return norm_l2(f);
    }
    spectral_sum(f, |k2| if k2 == 0.0 { 0.0 } else { k2.powf(s) }).sqrt()
}

/// Pointwise Euclidean (Frobenius for tensors) magnitude on the collocation
/// points.
pub fn physical_magnitude(f: &dyn SpectralField) -> Vec<f64> {
    let grid = f.grid();
    let mut sq = vec![0.0; grid.len()];
    for (w, comp) in f.weighted_components() {
        for (acc, v) in sq.iter_mut().zip(comp.to_physical()) {
            *acc += w * v * v;
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// `L^p` norm for `p ∈ {2, 4, ∞}`; `L⁴` and `L^∞` are evaluated on the
/// collocation points.
pub fn norm_lp(f: &dyn SpectralField, p: f64) -> Result<f64, NormError> {
    if p == 2.0 {
        return Ok(norm_l2(f));
    }
    if p == 4.0 {
        let h = f.grid().dx();
        let s: f64 = physical_magnitude(f).iter().map(|m| m.powi(4)).sum();
        return Ok((s * h * h).powf(0.25));
    }
    if p == f64::INFINITY {
        return Ok(norm_linf(f));
    }
    Err(NormError::UnsupportedExponent(p))
}

pub fn norm_linf(f: &dyn SpectralField) -> f64 {
    physical_magnitude(f).into_iter().fold(0.0, f64::max)
}
