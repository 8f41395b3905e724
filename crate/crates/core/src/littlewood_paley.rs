//! Dyadic partition of unity on the discrete frequency grid, the frequency
//! blocks `Δⱼ` and Besov-norm diagnostics.
//!
//! The low-frequency cutoff `χ` equals 1 on `|ξ| ≤ 1`, vanishes for
//! `|ξ| ≥ 4/3` and is glued in between with the `exp(−1/t)` transition.
//! The annular profile is `φ(ξ) = χ(ξ/2) − χ(ξ)`, supported in
//! `1 ≤ |ξ| ≤ 8/3`. Frequencies are the grid wavenumbers `|k|` themselves.

use std::sync::Arc;

use crate::fields::{norm_l2, norm_linf};
use crate::spectral::{FrequencyGrid, SpectralField, SpectralScalarField};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("grid underresolved for LP: largest wavenumber {0} does not reach the first annulus")]
    Underresolved(f64),
    #[error("block index {j} outside -1..={j_max}")]
    BlockOutOfRange { j: i32, j_max: usize },
    #[error("unsupported Besov indices (p = {p}, r = {r}); expected p in {{2, inf}}, r in {{1, 2, inf}}")]
    UnsupportedIndices { p: f64, r: f64 },
}

fn transition(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Radial low-frequency cutoff: 1 on `[0, 1]`, 0 on `[4/3, ∞)`, smooth.
pub fn chi(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 4.0 / 3.0 {
        return 0.0;
    }
    let t = (4.0 / 3.0 - r) * 3.0;
    let a = transition(t);
    a / (a + transition(1.0 - t))
}

/// Radial annular profile `φ(r) = χ(r/2) − χ(r)`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// `∫_{ℝ²} φ(|ξ|)² dξ` by composite Simpson quadrature over the support.
pub fn phi_l2_squared() -> f64 {
    let (a, b) = (1.0, 8.0 / 3.0);
    let n = 4000;
    let h = (b - a) / n as f64;
    let g = |r: f64| phi(r).powi(2) * r;
    let mut s = g(a) + g(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + i as f64 * h);
    }
    2.0 * std::f64::consts::PI * s * h / 3.0
}

/// Precomputed multipliers `χ(k)` and `φ(2^{−j} k)` for `j = 0..=j_max`.
#[derive(Debug, Clone)]
pub struct LPPartition {
    grid: Arc<FrequencyGrid>,
    chi_values: Vec<f64>,
    phi_values_by_j: Vec<Vec<f64>>,
    j_max: usize,
}

/// Builds the partition on `grid`. `j_max = ⌈log₂ max|k|⌉ + 1`, which makes
/// the finite sum exact at every grid frequency.
pub fn build_partition(grid: &Arc<FrequencyGrid>) -> Result<LPPartition, LpError> {
    let kmax = grid.max_wavenumber();
    if kmax <= 1.0 {
        return Err(LpError::Underresolved(kmax));
    }
    let j_max = kmax.log2().ceil() as usize + 1;
    let radii: Vec<f64> = (0..grid.len()).map(|idx| grid.k_squared(idx).sqrt()).collect();
    let chi_values = radii.iter().map(|&r| chi(r)).collect();
    let phi_values_by_j = (0..=j_max)
        .map(|j| {
            let scale = 0.5f64.powi(j as i32);
            radii.iter().map(|&r| phi(scale * r)).collect()
        })
        .collect();
    Ok(LPPartition {
        grid: Arc::clone(grid),
        chi_values,
        phi_values_by_j,
        j_max,
    })
}

impl LPPartition {
    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn chi_values(&self) -> &[f64] {
        &self.chi_values
    }

    /// Multiplier of block `j` (`j = −1` is the low-frequency cutoff).
    pub fn multiplier(&self, j: i32) -> Result<&[f64], LpError> {
        if j == -1 {
            return Ok(&self.chi_values);
        }
        if j < -1 || j as usize > self.j_max {
            return Err(LpError::BlockOutOfRange { j, j_max: self.j_max });
        }
        Ok(&self.phi_values_by_j[j as usize])
    }

    /// Block indices `−1..=j_max`.
    pub fn blocks(&self) -> impl Iterator<Item = i32> {
        -1..=(self.j_max as i32)
    }

    /// Largest pointwise deviation of `χ + Σⱼ φⱼ` from 1.
    pub fn unity_residual(&self) -> f64 {
        (0..self.grid.len())
            .map(|idx| {
                let s: f64 = self.chi_values[idx]
                    + self.phi_values_by_j.iter().map(|phi| phi[idx]).sum::<f64>();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Range `[min, max]` of `χ² + Σⱼ φⱼ²` over the grid.
    pub fn square_sum_range(&self) -> (f64, f64) {
        (0..self.grid.len())
            .map(|idx| {
                self.chi_values[idx].powi(2)
                    + self.phi_values_by_j.iter().map(|phi| phi[idx].powi(2)).sum::<f64>()
            })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

/// `Δⱼ f`: coefficientwise product with the stored multiplier.
pub fn block(
    f: &SpectralScalarField,
    j: i32,
    part: &LPPartition,
) -> Result<SpectralScalarField, LpError> {
    let m = part.multiplier(j)?;
    Ok(f.apply_multiplier(|idx| m[idx]))
}

struct OwnedStack {
    grid: Arc<FrequencyGrid>,
    parts: Vec<(f64, SpectralScalarField)>,
}

impl SpectralField for OwnedStack {
    fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }
    fn weighted_components(&self) -> Vec<(f64, &SpectralScalarField)> {
        self.parts.iter().map(|(w, c)| (*w, c)).collect()
    }
}

fn block_field(f: &dyn SpectralField, j: i32, part: &LPPartition) -> Result<OwnedStack, LpError> {
    let m = part.multiplier(j)?;
    let parts = f
        .weighted_components()
        .into_iter()
        .map(|(w, c)| (w, c.apply_multiplier(|idx| m[idx])))
        .collect();
    Ok(OwnedStack {
        grid: Arc::clone(f.grid()),
        parts,
    })
}

/// `(‖Δⱼ f‖_{L^p})ⱼ` for `j = −1..=j_max`.
pub fn block_norms(f: &dyn SpectralField, p: f64, part: &LPPartition) -> Result<Vec<f64>, LpError> {
    if !(p == 2.0 || p == f64::INFINITY) {
        return Err(LpError::UnsupportedIndices { p, r: f64::NAN });
    }
    part.blocks()
        .map(|j| {
            let b = block_field(f, j, part)?;
            Ok(if p == 2.0 { norm_l2(&b) } else { norm_linf(&b) })
        })
        .collect()
}

/// `‖f‖_{B^s_{p,r}} = ‖(2^{js} ‖Δⱼ f‖_{L^p})ⱼ‖_{ℓ^r}`.
pub fn besov_norm(
    f: &dyn SpectralField,
    s: f64,
    p: f64,
    r: f64,
    part: &LPPartition,
) -> Result<f64, LpError> {
    let p_ok = p == 2.0 || p == f64::INFINITY;
    let r_ok = r == 1.0 || r == 2.0 || r == f64::INFINITY;
    if !(p_ok && r_ok) {
        return Err(LpError::UnsupportedIndices { p, r });
    }
    let weighted = block_norms(f, p, part)?
        .into_iter()
        .zip(part.blocks())
        .map(|(n, j)| 2f64.powf(j as f64 * s) * n);
    Ok(if r == 1.0 {
        weighted.sum()
    } else if r == 2.0 {
        weighted.map(|x| x * x).sum::<f64>().sqrt()
    } else {
        weighted.fold(0.0, f64::max)
    })
}

/// Returns `(‖f‖_{B⁰_{∞,1}}, ‖f‖_{B⁰_{∞,∞}} · ln(e + ‖f‖_{H^s}))`, the two
/// sides of the logarithmic interpolation bound without its constant.
pub fn log_interpolation_check(
    f: &dyn SpectralField,
    s: f64,
    part: &LPPartition,
) -> Result<(f64, f64), LpError> {
    let norms = block_norms(f, f64::INFINITY, part)?;
    let lhs: f64 = norms.iter().sum();
    let sup = norms.iter().copied().fold(0.0, f64::max);
    let hs = crate::fields::norm_hs(f, s);
    Ok((lhs, sup * (std::f64::consts::E + hs).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn profile_supports() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert!(chi(1.2) > 0.0 && chi(1.2) < 1.0);
        assert_eq!(phi(0.99), 0.0);
        assert_eq!(phi(8.0 / 3.0), 0.0);
        assert!(phi(2.0) > 0.99);
    }

    #[test]
    fn underresolved_grid_is_rejected() {
        // k_max = √2 · 8 · 2π/L < 1 for L = 128π.
        let g = FrequencyGrid::new(16, 128.0 * PI).unwrap();
        assert!(matches!(build_partition(&g), Err(LpError::Underresolved(_))));
    }

    #[test]
    fn zero_frequency_belongs_to_low_block() {
        let g = FrequencyGrid::new(32, 2.0 * PI).unwrap();
        let part = build_partition(&g).unwrap();
        assert_eq!(part.multiplier(-1).unwrap()[0], 1.0);
        for j in 0..=part.j_max() as i32 {
            assert_eq!(part.multiplier(j).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn block_index_range() {
        let g = FrequencyGrid::new(32, 2.0 * PI).unwrap();
        let part = build_partition(&g).unwrap();
        let f = SpectralScalarField::zeros(&g);
        assert!(block(&f, -2, &part).is_err());
        assert!(block(&f, part.j_max() as i32 + 1, &part).is_err());
    }

    #[test]
    fn constant_lives_in_low_block() {
        let g = FrequencyGrid::new(32, 2.0 * PI).unwrap();
        let part = build_partition(&g).unwrap();
        let f = SpectralScalarField::from_fn(&g, |_, _| 3.0);
        assert_eq!(block(&f, -1, &part).unwrap().coeffs(), f.coeffs());
        for j in 0..=part.j_max() as i32 {
            assert_eq!(block(&f, j, &part).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn annulus_center_mode() {
        // L = 2π gives integer wavenumbers; |k| = 6 = 1.5 · 2² lies on the
        // plateau φ(2^{-2}·) = 1 of block 2.
        let g = FrequencyGrid::new(32, 2.0 * PI).unwrap();
        let part = build_partition(&g).unwrap();
        let mut f = SpectralScalarField::zeros(&g);
        f.set_coeff(6, 0, Complex64::new(0.5, 0.0));
        f.set_coeff(-6, 0, Complex64::new(0.5, 0.0));
        assert_eq!(block(&f, 2, &part).unwrap().coeffs(), f.coeffs());
        for j in [-1, 0, 4] {
            assert_eq!(block(&f, j, &part).unwrap().max_abs(), 0.0);
        }
        let b = besov_norm(&f, 1.5, f64::INFINITY, 1.0, &part).unwrap();
        let expected = 2f64.powf(2.0 * 1.5) * norm_linf(&f);
        assert!((b - expected).abs() < 1e-12 * expected);
        let (lhs, rhs) = log_interpolation_check(&f, 2.0, &part).unwrap();
        assert!((lhs - norm_linf(&f)).abs() < 1e-12);
        assert!(rhs.is_finite());
    }

    #[test]
    fn rejects_unsupported_indices() {
        let g = FrequencyGrid::new(32, 2.0 * PI).unwrap();
        let part = build_partition(&g).unwrap();
        let f = SpectralScalarField::zeros(&g);
        assert!(besov_norm(&f, 0.0, 4.0, 1.0, &part).is_err());
        assert!(besov_norm(&f, 0.0, 2.0, 3.0, &part).is_err());
        assert_eq!(log_interpolation_check(&f, 2.0, &part).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn phi_norm_quadrature() {
        let v = phi_l2_squared();
        // Between the squared-partition bounds times the annulus area.
        let area = PI * ((8.0f64 / 3.0).powi(2) - 1.0);
        assert!(v > 0.3 * area && v < area);
    }
}
