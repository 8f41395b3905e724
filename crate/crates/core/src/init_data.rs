//! Initial data: the two scaled families of large data, Taylor-Green,
//! constant isotropic stress, zero data and seeded small random fields.
//!
//! Profiles are centred at the box midpoint. Gaussian tails are cut off by
//! the periodic boundary, so the localized families reject boxes on which
//! the tail at distance `L/2` exceeds `1e-12`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dynamics::State;
use crate::fields::norm_hs;
use crate::littlewood_paley::{build_partition, phi, phi_l2_squared, LpError};
use crate::spectral::{
    FieldStack, FrequencyGrid, SpectralScalarField, SpectralSymTensorField, SpectralVectorField,
};

/// Largest admissible Gaussian tail at the box boundary.
pub const LOCALIZATION_TOL: f64 = 1e-12;

/// Default half-width (in integer modes) of the random data band.
pub const RANDOM_BAND: i64 = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InitError {
    #[error("data not localized: Gaussian tail {tail:e} at the boundary (eps = {eps}, L = {box_len}) exceeds 1e-12")]
    NotLocalized { eps: f64, box_len: f64, tail: f64 },
    #[error("unresolvable: the construction needs {needed} dyadic blocks but the grid resolves {j_max}")]
    Unresolvable { needed: usize, j_max: usize },
    #[error("box length {0} is not a multiple of 2*pi")]
    IncompatibleBox(f64),
    #[error("init parameter `{name}` = {value} is invalid: {reason}")]
    InvalidArgument {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error(transparent)]
    Partition(#[from] LpError),
}

fn check_range(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), InitError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(InitError::InvalidArgument {
            name,
            value,
            reason,
        })
    }
}

fn check_localized(grid: &FrequencyGrid, eps: f64) -> Result<(), InitError> {
    let half = 0.5 * grid.box_len();
    let tail = (-(eps * half).powi(2)).exp();
    if tail > LOCALIZATION_TOL {
        return Err(InitError::NotLocalized {
            eps,
            box_len: grid.box_len(),
            tail,
        });
    }
    Ok(())
}

/// `scale · (y₂, −y₁) e^{−|εy|²}` with `y = ε(x − centre)`, up to the
/// prefactor: returns the field `scale·εy₂ e^{−|εy|²}` etc.
fn swirl(grid: &Arc<FrequencyGrid>, eps: f64, scale: f64) -> SpectralVectorField {
    let c = 0.5 * grid.box_len();
    let profile = move |x1: f64, x2: f64| {
        let (y1, y2) = (eps * (x1 - c), eps * (x2 - c));
        (y1, y2, (-(y1 * y1 + y2 * y2)).exp())
    };
    SpectralVectorField {
        u1: SpectralScalarField::from_fn(grid, move |x1, x2| {
            let (_, y2, g) = profile(x1, x2);
            scale * y2 * g
        }),
        u2: SpectralScalarField::from_fn(grid, move |x1, x2| {
            let (y1, _, g) = profile(x1, x2);
            -scale * y1 * g
        }),
    }
}

/// `u₀ = εφ₀(εx)`, `τ₀ = ε² A e^{−|εx|²} Id` with
/// `φ₀(x) = A(x₂, −x₁)e^{−|x|²}`.
pub fn remark12_family(amplitude: f64, eps: f64, grid: &Arc<FrequencyGrid>) -> Result<State, InitError> {
    check_range("A", amplitude, amplitude > 0.0, "must be positive")?;
    check_range("eps", eps, eps > 0.0 && eps <= 1.0, "must lie in (0, 1]")?;
    check_localized(grid, eps)?;
    let u = swirl(grid, eps, eps * amplitude);
    let c = 0.5 * grid.box_len();
    let s = SpectralScalarField::from_fn(grid, |x1, x2| {
        let r2 = (x1 - c).powi(2) + (x2 - c).powi(2);
        eps * eps * amplitude * (-(eps * eps * r2)).exp()
    });
    Ok(State::new(0.0, u, SpectralSymTensorField::isotropic(&s)))
}

/// Number of dyadic blocks `N` in the lacunary profile: the smallest `N`
/// with `Σ_{k≤N} 1/k ≥ ε^{−11} / ‖φ‖²_{L²}`.
pub fn remark15_block_count(eps: f64) -> usize {
    let target = eps.powi(-11) / phi_l2_squared();
    let mut harmonic = 0.0;
    let mut k = 0usize;
    while harmonic < target {
        k += 1;
        harmonic += 1.0 / k as f64;
        if k > 4096 {
            break;
        }
    }
    k.max(1)
}

/// Odd sign used to make the imaginary symbol `i·φ` Hermitian.
fn mode_sign(m1: i64, m2: i64) -> f64 {
    if m1 != 0 {
        m1.signum() as f64
    } else {
        m2.signum() as f64
    }
}

/// The lacunary profile `h = Σ_{k=1}^{N} 2^{−3k/2} k^{−1/2} h_k` with
/// `ĥ_k(ξ) = i·sgn(ξ)·φ(2^{−k}|ξ|)`, periodized on the box.
pub fn remark15_profile(grid: &Arc<FrequencyGrid>, n_blocks: usize) -> SpectralScalarField {
    let area = grid.box_len() * grid.box_len();
    let coeffs = (0..grid.len())
        .map(|idx| {
            let (m1, m2) = grid.mode(idx);
            let r = grid.k_squared(idx).sqrt();
            let mut v = 0.0;
            for k in 1..=n_blocks {
                let w = 2f64.powf(-1.5 * k as f64) / (k as f64).sqrt();
                v += w * phi(r * 2f64.powi(-(k as i32)));
            }
            Complex64::new(0.0, mode_sign(m1, m2) * v / area)
        })
        .collect();
    SpectralScalarField::from_coeffs(grid, coeffs)
}

/// `u₀ = ε^{−1/2}φ₀(εx)` with `φ₀(x) = (x₂, −x₁)e^{−|x|²}` and
/// `τ₀ = ε^{10} h(x) Id` with the lacunary profile `h`.
pub fn remark15_family(eps: f64, grid: &Arc<FrequencyGrid>) -> Result<State, InitError> {
    check_range("eps", eps, eps > 0.0 && eps < 1.0, "must lie in (0, 1)")?;
    check_localized(grid, eps)?;
    let part = build_partition(grid)?;
    let needed = remark15_block_count(eps);
    if needed > part.j_max() {
        return Err(InitError::Unresolvable {
            needed,
            j_max: part.j_max(),
        });
    }
    let u = swirl(grid, eps, eps.powf(-0.5));
    let h = remark15_profile(grid, needed).scale(eps.powi(10));
    Ok(State::new(0.0, u, SpectralSymTensorField::isotropic(&h)))
}

/// `u = (sin x₁ cos x₂, −cos x₁ sin x₂)`, `τ = 0`; needs `L ∈ 2πℕ`.
pub fn taylor_green(grid: &Arc<FrequencyGrid>) -> Result<State, InitError> {
    let periods = grid.box_len() / (2.0 * PI);
    if (periods - periods.round()).abs() > 1e-12 * periods || periods.round() < 1.0 {
        return Err(InitError::IncompatibleBox(grid.box_len()));
    }
    let u = SpectralVectorField {
        u1: SpectralScalarField::from_fn(grid, |x, y| x.sin() * y.cos()),
        u2: SpectralScalarField::from_fn(grid, |x, y| -x.cos() * y.sin()),
    };
    Ok(State::new(0.0, u, SpectralSymTensorField::zeros(grid)))
}

pub fn zero_state(grid: &Arc<FrequencyGrid>) -> State {
    State::zero(grid)
}

/// `u = 0`, `τ = c·Id`.
pub fn constant_stress(grid: &Arc<FrequencyGrid>, c: f64) -> State {
    let s = SpectralScalarField::from_fn(grid, |_, _| c);
    State::new(0.0, SpectralVectorField::zeros(grid), SpectralSymTensorField::isotropic(&s))
}

fn random_scalar(grid: &Arc<FrequencyGrid>, band: i64, rng: &mut ChaCha8Rng) -> SpectralScalarField {
    let mut f = SpectralScalarField::zeros(grid);
    for m1 in 0..=band {
        for m2 in -band..=band {
            if m1 == 0 && m2 <= 0 {
                continue;
            }
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let c = Complex64::new(re, im);
            f.set_coeff(m1, m2, c);
            f.set_coeff(-m1, -m2, c.conj());
        }
    }
    f
}

/// Seeded random data on the modes `0 < max(|m₁|, |m₂|) ≤ band`, projected
/// divergence-free and scaled so that `‖(u₀, τ₀)‖_{H¹} = amplitude`.
pub fn random_small_band(
    grid: &Arc<FrequencyGrid>,
    seed: u64,
    amplitude: f64,
    band: i64,
) -> Result<State, InitError> {
    check_range("amplitude", amplitude, amplitude >= 0.0, "must be nonnegative")?;
    let max_band = (grid.n() / 3) as i64;
    if band < 1 || band > max_band {
        return Err(InitError::InvalidArgument {
            name: "band",
            value: band as f64,
            reason: "must lie in 1..=n/3",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comps: Vec<SpectralScalarField> =
        (0..5).map(|_| random_scalar(grid, band, &mut rng)).collect();
    let t22 = comps.pop().unwrap();
    let t12 = comps.pop().unwrap();
    let t11 = comps.pop().unwrap();
    let u2 = comps.pop().unwrap();
    let u1 = comps.pop().unwrap();
    let raw = State::new(
        0.0,
        SpectralVectorField { u1, u2 },
        SpectralSymTensorField { t11, t12, t22 },
    );
    let norm = norm_hs(&FieldStack::new(&raw.u).with(&raw.tau), 1.0);
    let s = amplitude / norm;
    Ok(State {
        t: 0.0,
        u: raw.u.scale(s),
        tau: raw.tau.scale(s),
    })
}

/// [`random_small_band`] on the default band.
pub fn random_small(grid: &Arc<FrequencyGrid>, seed: u64, amplitude: f64) -> Result<State, InitError> {
    random_small_band(grid, seed, amplitude, RANDOM_BAND)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{norm_hs_homogeneous, norm_l2};
    use crate::littlewood_paley::block;
    use crate::spectral::leray_project;

    #[test]
    fn remark12_norms_and_scaling() {
        let g = FrequencyGrid::new(256, 64.0 * PI).unwrap();
        let a = 3.0;
        let phi_u = (a * a * PI / 4.0).sqrt();
        let phi_tau = (a * a * PI).sqrt();
        for eps in [0.25, 0.125] {
            let s = remark12_family(a, eps, &g).unwrap();
            assert!((norm_l2(&s.u) / phi_u - 1.0).abs() < 1e-8, "eps {eps}");
            assert!((norm_l2(&s.tau) / (eps * phi_tau) - 1.0).abs() < 1e-8);
            assert!(s.divergence_defect() < 1e-14);
        }
    }

    #[test]
    fn remark12_rejects_unlocalized_box() {
        let g = FrequencyGrid::new(64, 2.0 * PI).unwrap();
        assert!(matches!(
            remark12_family(1.0, 0.5, &g),
            Err(InitError::NotLocalized { .. })
        ));
        assert!(remark12_family(-1.0, 0.5, &g).is_err());
    }

    #[test]
    fn remark12_homogeneous_scaling() {
        let g = FrequencyGrid::new(256, 64.0 * PI).unwrap();
        let s1 = remark12_family(1.0, 0.25, &g).unwrap();
        let s2 = remark12_family(1.0, 0.125, &g).unwrap();
        let ratio = norm_hs_homogeneous(&s1.u, 2.0) / norm_hs_homogeneous(&s2.u, 2.0);
        assert!((ratio / 4.0 - 1.0).abs() < 1e-6, "{ratio}");
        let ratio = norm_hs_homogeneous(&s1.tau, 1.0) / norm_hs_homogeneous(&s2.tau, 1.0);
        assert!((ratio / 4.0 - 1.0).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn remark15_profile_is_real_and_lacunary() {
        let g = FrequencyGrid::new(256, 2.0 * PI).unwrap();
        let part = build_partition(&g).unwrap();
        for n_blocks in [1usize, 3] {
            let h = remark15_profile(&g, n_blocks);
            assert!(h.hermitian_defect() < 1e-18);
            assert!(h.max_abs() > 0.0);
            for j in part.blocks() {
                let far = (1..=n_blocks as i32).all(|k| (j - k).abs() >= 2);
                if far {
                    assert_eq!(block(&h, j, &part).unwrap().max_abs(), 0.0, "block {j}");
                }
            }
        }
    }

    #[test]
    fn remark15_block_count_and_errors() {
        assert_eq!(remark15_block_count(0.999), 1);
        assert_eq!(remark15_block_count(0.9), 1);
        assert_eq!(remark15_block_count(0.75), 4);
        let g = FrequencyGrid::new(64, 64.0 * PI).unwrap();
        assert!(matches!(
            remark15_family(0.3, &g),
            Err(InitError::Unresolvable { .. })
        ));
        assert!(remark15_family(1.0, &g).is_err());
    }

    #[test]
    fn taylor_green_needs_periodic_box() {
        let g = FrequencyGrid::new(32, 4.0 * PI).unwrap();
        let s = taylor_green(&g).unwrap();
        let p = leray_project(&s.u);
        assert!(norm_l2(&(&p.u1 - &s.u.u1)) < 1e-14);
        let bad = FrequencyGrid::new(32, 5.0).unwrap();
        assert!(matches!(taylor_green(&bad), Err(InitError::IncompatibleBox(_))));
    }

    #[test]
    fn random_small_amplitude_and_determinism() {
        let g = FrequencyGrid::new(32, 2.0 * PI).unwrap();
        let a = random_small(&g, 7, 1e-2).unwrap();
        let b = random_small(&g, 7, 1e-2).unwrap();
        let c = random_small(&g, 8, 1e-2).unwrap();
        let h1 = norm_hs(&FieldStack::new(&a.u).with(&a.tau), 1.0);
        assert!((h1 - 1e-2).abs() < 1e-12);
        assert_eq!(a.u.u1.coeffs(), b.u.u1.coeffs());
        assert_eq!(a.tau.t12.coeffs(), b.tau.t12.coeffs());
        assert_ne!(a.u.u1.coeffs(), c.u.u1.coeffs());
        assert!(a.hermitian_defect() < 1e-18);
        assert!(a.divergence_defect() < 1e-14);
        assert!(random_small_band(&g, 1, 1.0, 20).is_err());
    }

    #[test]
    fn constant_stress_is_isotropic() {
        let g = FrequencyGrid::new(16, 2.0 * PI).unwrap();
        let s = constant_stress(&g, 0.5);
        assert_eq!(s.tau.t11.mean(), 0.5);
        assert_eq!(s.tau.t22.mean(), 0.5);
        assert_eq!(s.tau.t12.max_abs(), 0.0);
    }
}
