//! Periodic frequency grid, 2-D transforms and the Fourier-multiplier
//! operators (gradient, Laplacian inverse, Leray projection, the stress
//! operator `R = Δ⁻¹ curl div`) used by every other module.
//!
//! Storage convention: an `n × n` field is stored row-major with the `x₁`
//! index as the slow axis, `idx = i₁·n + i₂`. Coefficients are normalised so
//! that `f(x) = Σ_k f̂(k) e^{i k·x}`, i.e. `f̂ = FFT(f) / n²`. With this
//! convention `‖f‖²_{L²} = L² Σ_k |f̂(k)|²`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid size n = {0} must be even and at least 16")]
    BadSize(usize),
    #[error("box length L = {0} must be finite and positive")]
    BadLength(f64),
}

/// Square periodic grid of `n × n` points on a box of side `box_len`.
pub struct FrequencyGrid {
    n: usize,
    box_len: f64,
    // Per-index tables, so hot loops avoid `idx / n`. Odd derivatives drop
    // the unpaired Nyquist wavenumber so that they keep real fields real.
    k_flat: Vec<(f64, f64)>,
    dk_flat: Vec<(f64, f64)>,
    ksq_flat: Vec<f64>,
    keep_flat: Vec<bool>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FrequencyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrequencyGrid")
            .field("n", &self.n)
            .field("box_len", &self.box_len)
            .finish()
    }
}

impl PartialEq for FrequencyGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.box_len.to_bits() == other.box_len.to_bits()
    }
}

impl FrequencyGrid {
    pub fn new(n: usize, box_len: f64) -> Result<Arc<Self>, GridError> {
        if n < 16 || n % 2 != 0 {
            return Err(GridError::BadSize(n));
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(GridError::BadLength(box_len));
        }
        let base = 2.0 * std::f64::consts::PI / box_len;
        let modes: Vec<i64> = (0..n).map(|i| signed_mode(i, n)).collect();
        let wavenumbers: Vec<f64> = modes.iter().map(|&m| base * m as f64).collect();
        let deriv_wavenumbers: Vec<f64> = modes
            .iter()
            .map(|&m| if m == -(n as i64) / 2 { 0.0 } else { base * m as f64 })
            .collect();
        let keep: Vec<bool> = modes.iter().map(|&m| 3 * m.unsigned_abs() as usize <= n).collect();
        let flat = |v: &[f64]| -> Vec<(f64, f64)> {
            (0..n).flat_map(|i| (0..n).map(move |j| (v[i], v[j]))).collect()
        };
        let k_flat = flat(&wavenumbers);
        let dk_flat = flat(&deriv_wavenumbers);
        let ksq_flat = k_flat.iter().map(|(a, b)| a * a + b * b).collect();
        let keep_flat = (0..n).flat_map(|i| (0..n).map(|j| keep[i] && keep[j]).collect::<Vec<_>>()).collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            box_len,
            k_flat,
            dk_flat,
            ksq_flat,
            keep_flat,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    /// Collocation spacing `L / n`.
    pub fn dx(&self) -> f64 {
        self.box_len / self.n as f64
    }

    /// Total number of modes (`n²`).
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Smallest nonzero wavenumber magnitude, `2π / L`.
    pub fn k_min(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_len
    }

    /// Signed integer mode `(m₁, m₂)` of a flat index.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        (signed_mode(idx / self.n, self.n), signed_mode(idx % self.n, self.n))
    }

    /// Flat index of the signed mode `(m₁, m₂)`, taken modulo `n`.
    pub fn index_of(&self, m1: i64, m2: i64) -> usize {
        let n = self.n as i64;
        (m1.rem_euclid(n) * n + m2.rem_euclid(n)) as usize
    }

    /// Flat index of the mode `-k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (i1, i2) = (idx / self.n, idx % self.n);
        ((self.n - i1) % self.n) * self.n + (self.n - i2) % self.n
    }

    pub fn wavenumber(&self, idx: usize) -> (f64, f64) {
        self.k_flat[idx]
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        self.ksq_flat[idx]
    }

    fn deriv_wavenumber(&self, idx: usize) -> (f64, f64) {
        self.dk_flat[idx]
    }

    /// Two-thirds rule: true when `max(|m₁|, |m₂|) ≤ n/3`.
    pub fn in_mask(&self, idx: usize) -> bool {
        self.keep_flat[idx]
    }

    /// Largest `|k|` present on the grid (the Nyquist corner).
    pub fn max_wavenumber(&self) -> f64 {
        let k = self.k_min() * (self.n / 2) as f64;
        (2.0 * k * k).sqrt()
    }

    /// Largest `|k|` that survives dealiasing along one axis.
    pub fn max_masked_wavenumber(&self) -> f64 {
        self.k_min() * (self.n / 3) as f64
    }

    /// Physical coordinate of collocation index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Forward transform of real collocation values to normalised coefficients.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len(), "value count does not match grid");
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.fft);
        let scale = 1.0 / self.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        data
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.len(), "coefficient count does not match grid");
        let mut data = coeffs.to_vec();
        self.transform(&mut data, &self.ifft);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Inverse transforms of several Hermitian coefficient arrays, two per
    /// complex transform (`f + i g`).
    pub fn inverse_many(&self, coeffs: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(coeffs.len());
        for pair in coeffs.chunks(2) {
            if let [a, b] = pair {
                assert!(a.len() == self.len() && b.len() == self.len(), "coefficient count does not match grid");
                let mut data: Vec<Complex64> = a.iter().zip(b.iter()).map(|(x, y)| x + I * y).collect();
                self.transform(&mut data, &self.ifft);
                out.push(data.iter().map(|c| c.re).collect());
                out.push(data.iter().map(|c| c.im).collect());
            } else {
                out.push(self.inverse(pair[0]));
            }
        }
        out
    }

    /// Forward transforms of several real arrays, two per complex transform.
    pub fn forward_many(&self, values: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(values.len());
        let scale = 0.5 / self.len() as f64;
        for pair in values.chunks(2) {
            if let [a, b] = pair {
                assert!(a.len() == self.len() && b.len() == self.len(), "value count does not match grid");
                let mut data: Vec<Complex64> =
                    a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect();
                self.transform(&mut data, &self.fft);
                let n = self.n;
                let mut fa = Vec::with_capacity(self.len());
                let mut fb = Vec::with_capacity(self.len());
                for i1 in 0..n {
                    let row = ((n - i1) % n) * n;
                    for i2 in 0..n {
                        let z = data[i1 * n + i2];
                        let zc = data[row + (n - i2) % n].conj();
                        fa.push((z + zc) * scale);
                        fb.push((z - zc) * (-I * scale));
                    }
                }
                out.push(fa);
                out.push(fb);
            } else {
                out.push(self.forward(pair[0]));
            }
        }
        out
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        plan.process(data);
        transpose(data, self.n);
        plan.process(data);
        transpose(data, self.n);
    }
}

fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for rb in (0..n).step_by(B) {
        for cb in (rb..n).step_by(B) {
            for r in rb..(rb + B).min(n) {
                let c0 = if cb == rb { r + 1 } else { cb };
                for c in c0..(cb + B).min(n) {
                    data.swap(r * n + c, c * n + r);
                }
            }
        }
    }
}

/// Complex Fourier coefficients of one real scalar field.
#[derive(Clone, Debug)]
pub struct SpectralScalarField {
    grid: Arc<FrequencyGrid>,
    coeffs: Vec<Complex64>,
}

impl SpectralScalarField {
    pub fn zeros(grid: &Arc<FrequencyGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Arc<FrequencyGrid>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count does not match grid");
        Self {
            grid: Arc::clone(grid),
            coeffs,
        }
    }

    pub fn from_physical(grid: &Arc<FrequencyGrid>, values: &[f64]) -> Self {
        Self {
            grid: Arc::clone(grid),
            coeffs: grid.forward(values),
        }
    }

    /// Samples `f(x₁, x₂)` at the collocation points and transforms.
    pub fn from_fn(grid: &Arc<FrequencyGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            let x1 = grid.coordinate(i1);
            for i2 in 0..n {
                values.push(f(x1, grid.coordinate(i2)));
            }
        }
        Self::from_physical(grid, &values)
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of the signed mode `(m₁, m₂)`.
    pub fn coeff(&self, m1: i64, m2: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(m1, m2)]
    }

    pub fn set_coeff(&mut self, m1: i64, m2: i64, value: Complex64) {
        let idx = self.grid.index_of(m1, m2);
        self.coeffs[idx] = value;
    }

    pub fn to_physical(&self) -> Vec<f64> {
        self.grid.inverse(&self.coeffs)
    }

    /// Spatial mean (the `k = 0` coefficient).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Coefficientwise multiplication by a real symbol.
    pub fn apply_multiplier(&self, symbol: impl Fn(usize) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| c * symbol(idx))
            .collect();
        Self {
            grid: Arc::clone(&self.grid),
            coeffs,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.apply_multiplier(|_| factor)
    }

    /// `self += factor · other`.
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        debug_assert!(*self.grid == *other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * factor;
        }
    }

    /// Largest Hermitian defect `|f̂(−k) − conj f̂(k)|` relative to the
    /// largest coefficient; zero for an exactly real field.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..self.coeffs.len())
            .map(|idx| (self.coeffs[self.grid.conjugate_index(idx)] - self.coeffs[idx].conj()).norm())
            .fold(0.0, f64::max);
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Pointwise product of two fields, evaluated on the collocation points
    /// and dealiased.
    pub fn product(&self, other: &Self) -> Self {
        let a = self.to_physical();
        let b = other.to_physical();
        let values: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        dealias(&Self::from_physical(&self.grid, &values))
    }
}

impl Add for &SpectralScalarField {
    type Output = SpectralScalarField;
    fn add(self, rhs: Self) -> SpectralScalarField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralScalarField {
    type Output = SpectralScalarField;
    fn sub(self, rhs: Self) -> SpectralScalarField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &SpectralScalarField {
    type Output = SpectralScalarField;
    fn neg(self) -> SpectralScalarField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralScalarField {
    type Output = SpectralScalarField;
    fn mul(self, rhs: f64) -> SpectralScalarField {
        self.scale(rhs)
    }
}

/// Velocity-like field with two scalar components.
#[derive(Clone, Debug)]
pub struct SpectralVectorField {
    pub u1: SpectralScalarField,
    pub u2: SpectralScalarField,
}

impl SpectralVectorField {
    pub fn zeros(grid: &Arc<FrequencyGrid>) -> Self {
        Self {
            u1: SpectralScalarField::zeros(grid),
            u2: SpectralScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        self.u1.grid()
    }

    pub fn map(&self, f: impl Fn(&SpectralScalarField) -> SpectralScalarField) -> Self {
        Self {
            u1: f(&self.u1),
            u2: f(&self.u2),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|c| c.scale(factor))
    }

    pub fn axpy(&mut self, factor: f64, other: &Self) {
        self.u1.axpy(factor, &other.u1);
        self.u2.axpy(factor, &other.u2);
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.u1.hermitian_defect().max(self.u2.hermitian_defect())
    }
}

/// Symmetric 2×2 tensor field; `τ₂₁` is always read as `t12`.
#[derive(Clone, Debug)]
pub struct SpectralSymTensorField {
    pub t11: SpectralScalarField,
    pub t12: SpectralScalarField,
    pub t22: SpectralScalarField,
}

impl SpectralSymTensorField {
    pub fn zeros(grid: &Arc<FrequencyGrid>) -> Self {
        Self {
            t11: SpectralScalarField::zeros(grid),
            t12: SpectralScalarField::zeros(grid),
            t22: SpectralScalarField::zeros(grid),
        }
    }

    /// `f · Id`.
    pub fn isotropic(f: &SpectralScalarField) -> Self {
        Self {
            t11: f.clone(),
            t12: SpectralScalarField::zeros(f.grid()),
            t22: f.clone(),
        }
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        self.t11.grid()
    }

    pub fn map(&self, f: impl Fn(&SpectralScalarField) -> SpectralScalarField) -> Self {
        Self {
            t11: f(&self.t11),
            t12: f(&self.t12),
            t22: f(&self.t22),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|c| c.scale(factor))
    }

    pub fn axpy(&mut self, factor: f64, other: &Self) {
        self.t11.axpy(factor, &other.t11);
        self.t12.axpy(factor, &other.t12);
        self.t22.axpy(factor, &other.t22);
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.t11
            .hermitian_defect()
            .max(self.t12.hermitian_defect())
            .max(self.t22.hermitian_defect())
    }
}

/// Common view of scalar, vector and tensor fields as weighted lists of
/// scalar components.
///
/// The weight counts how often a stored component appears in the full
/// field: the off-diagonal stress entry appears twice, so squared norms of a
/// tensor field are Frobenius norms.
pub trait SpectralField {
    fn grid(&self) -> &Arc<FrequencyGrid>;
    fn weighted_components(&self) -> Vec<(f64, &SpectralScalarField)>;
}

impl SpectralField for SpectralScalarField {
    fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }
    fn weighted_components(&self) -> Vec<(f64, &SpectralScalarField)> {
        vec![(1.0, self)]
    }
}

impl SpectralField for SpectralVectorField {
    fn grid(&self) -> &Arc<FrequencyGrid> {
        self.u1.grid()
    }
    fn weighted_components(&self) -> Vec<(f64, &SpectralScalarField)> {
        vec![(1.0, &self.u1), (1.0, &self.u2)]
    }
}

impl SpectralField for SpectralSymTensorField {
    fn grid(&self) -> &Arc<FrequencyGrid> {
        self.t11.grid()
    }
    fn weighted_components(&self) -> Vec<(f64, &SpectralScalarField)> {
        vec![(1.0, &self.t11), (2.0, &self.t12), (1.0, &self.t22)]
    }
}

/// An ad-hoc stack of fields treated as one multi-component field, e.g. the
/// pair `(∇u, τ)`.
pub struct FieldStack<'a> {
    grid: Arc<FrequencyGrid>,
    parts: Vec<(f64, &'a SpectralScalarField)>,
}

impl<'a> FieldStack<'a> {
    pub fn new(first: &'a dyn SpectralField) -> Self {
        Self {
            grid: Arc::clone(first.grid()),
            parts: first.weighted_components(),
        }
    }

    pub fn with(mut self, next: &'a dyn SpectralField) -> Self {
        assert!(*self.grid == **next.grid(), "stacked fields live on different grids");
        self.parts.extend(next.weighted_components());
        self
    }
}

impl SpectralField for FieldStack<'_> {
    fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }
    fn weighted_components(&self) -> Vec<(f64, &SpectralScalarField)> {
        self.parts.clone()
    }
}

/// `∇f`: component `j` has coefficients `i kⱼ f̂(k)`.
pub fn gradient(f: &SpectralScalarField) -> SpectralVectorField {
    SpectralVectorField {
        u1: partial(f, 0),
        u2: partial(f, 1),
    }
}

/// `∂f/∂xⱼ` for `axis ∈ {0, 1}`.
pub fn partial(f: &SpectralScalarField, axis: usize) -> SpectralScalarField {
    let grid = f.grid();
    let coeffs = f
        .coeffs()
        .iter()
        .zip(&grid.dk_flat)
        .map(|(c, &(k1, k2))| {
            let k = if axis == 0 { k1 } else { k2 };
            Complex64::new(-k * c.im, k * c.re)
        })
        .collect();
    SpectralScalarField::from_coeffs(grid, coeffs)
}

pub fn divergence(v: &SpectralVectorField) -> SpectralScalarField {
    let mut d = partial(&v.u1, 0);
    d.axpy(1.0, &partial(&v.u2, 1));
    d
}

/// Scalar curl `∂₁v₂ − ∂₂v₁`.
pub fn curl(v: &SpectralVectorField) -> SpectralScalarField {
    let mut c = partial(&v.u2, 0);
    c.axpy(-1.0, &partial(&v.u1, 1));
    c
}

/// Row divergence of a symmetric tensor, `(div τ)ᵢ = ∂ⱼ τᵢⱼ`.
pub fn tensor_divergence(tau: &SpectralSymTensorField) -> SpectralVectorField {
    let mut d1 = partial(&tau.t11, 0);
    d1.axpy(1.0, &partial(&tau.t12, 1));
    let mut d2 = partial(&tau.t12, 0);
    d2.axpy(1.0, &partial(&tau.t22, 1));
    SpectralVectorField { u1: d1, u2: d2 }
}

pub fn laplacian(f: &SpectralScalarField) -> SpectralScalarField {
    let grid = Arc::clone(f.grid());
    f.apply_multiplier(|idx| -grid.k_squared(idx))
}

/// `Δ⁻¹ f` on mean-zero data; the `k = 0` mode maps to zero.
pub fn inverse_laplacian(f: &SpectralScalarField) -> SpectralScalarField {
    let grid = Arc::clone(f.grid());
    f.apply_multiplier(|idx| {
        let k2 = grid.k_squared(idx);
        if idx == 0 || k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    })
}

/// Leray projection `(I − k⊗k/|k|²) v̂(k)`. The mean (`k = 0`) passes
/// through unchanged.
pub fn leray_project(v: &SpectralVectorField) -> SpectralVectorField {
    let grid = v.grid();
    let mut w1 = Vec::with_capacity(grid.len());
    let mut w2 = Vec::with_capacity(grid.len());
    for (idx, (&a, &b)) in v.u1.coeffs().iter().zip(v.u2.coeffs()).enumerate() {
        let (k1, k2) = grid.deriv_wavenumber(idx);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            w1.push(a);
            w2.push(b);
            continue;
        }
        let dot = (a * k1 + b * k2) / kk;
        w1.push(a - dot * k1);
        w2.push(b - dot * k2);
    }
    SpectralVectorField {
        u1: SpectralScalarField::from_coeffs(grid, w1),
        u2: SpectralScalarField::from_coeffs(grid, w2),
    }
}

/// The stress operator `R = Δ⁻¹ curl div`, mapping a symmetric tensor to a
/// scalar. Per mode, with `(kτ̂)ⱼ = kᵢ τ̂ᵢⱼ`:
/// `R̂τ(k) = (k₁ (kτ̂)₂ − k₂ (kτ̂)₁) / |k|²`, which is the sign for which
/// `R(D(u)) = ½(∂₁u₂ − ∂₂u₁)` on divergence-free `u`.
pub fn riesz_r(tau: &SpectralSymTensorField) -> SpectralScalarField {
    let grid = tau.grid();
    let coeffs = (0..grid.len())
        .map(|idx| {
            let (k1, k2) = grid.deriv_wavenumber(idx);
            let kk = k1 * k1 + k2 * k2;
            if kk == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let (a, b, c) = (tau.t11.coeffs()[idx], tau.t12.coeffs()[idx], tau.t22.coeffs()[idx]);
            let ktau1 = a * k1 + b * k2;
            let ktau2 = b * k1 + c * k2;
            (ktau2 * k1 - ktau1 * k2) / kk
        })
        .collect();
    SpectralScalarField::from_coeffs(grid, coeffs)
}

/// Two-thirds rule: zero every coefficient outside the mask.
pub fn dealias(f: &SpectralScalarField) -> SpectralScalarField {
    let mut out = f.clone();
    for (c, &keep) in out.coeffs.iter_mut().zip(&f.grid.keep_flat) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    out
}

pub fn dealias_vector(v: &SpectralVectorField) -> SpectralVectorField {
    v.map(dealias)
}

pub fn dealias_tensor(t: &SpectralSymTensorField) -> SpectralSymTensorField {
    t.map(dealias)
}
