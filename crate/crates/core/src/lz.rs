//! Closed-form Landau-Zener / Schwinger predictions.
//!
//! Near the zone edge the two diabatic levels `Q²` and `(Q-2)²` differ by
//! `4(Q-1)`, so a sweep at rate `f` changes their splitting at `4f`. The
//! coupling between them is the lattice matrix element `v/4 = μ`, giving
//! `Γ = μ²/(4f)` and `P = exp(-2πΓ) = exp(-π f_c/f)` with `f_c = μ²/2`.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::units::critical_force;

/// Landau-Zener prediction for one (μ, f) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LzPrediction {
    pub gamma: f64,
    pub p_lz: f64,
    /// f/f_c; infinite for a massless lattice.
    pub force_ratio: f64,
}

impl LzPrediction {
    pub fn new(rest_mass: f64, force: f64) -> Result<Self> {
        let gamma = gamma(rest_mass, force)?;
        Ok(Self {
            gamma,
            p_lz: (-2.0 * PI * gamma).exp(),
            force_ratio: force / critical_force(rest_mass),
        })
    }
}

fn check(rest_mass: f64, force: f64) -> Result<()> {
    if !(rest_mass >= 0.0) || !rest_mass.is_finite() {
        return Err(invalid(format!("rest mass must be non-negative, got {rest_mass}")));
    }
    if !(force > 0.0) || !force.is_finite() {
        return Err(invalid(format!("force must be positive, got {force}")));
    }
    Ok(())
}

/// Adiabaticity parameter Γ = μ²/(4f), i.e. coupling² over the diabatic slope 4f.
pub fn gamma(rest_mass: f64, force: f64) -> Result<f64> {
    check(rest_mass, force)?;
    Ok(rest_mass * rest_mass / (4.0 * force))
}

/// Diabatic transfer probability exp(-2πΓ).
pub fn p_lz(rest_mass: f64, force: f64) -> Result<f64> {
    Ok((-2.0 * PI * gamma(rest_mass, force)?).exp())
}

/// Transfer probability as a function of the force ratio alone.
pub fn p_lz_from_ratio(force_ratio: f64) -> f64 {
    (-PI / force_ratio).exp()
}

/// Rest mass at which `p_lz` equals one half: μ² = 2 f ln2/π.
pub fn half_max_mass(force: f64) -> Result<f64> {
    check(0.0, force)?;
    Ok((2.0 * force * LN_2 / PI).sqrt())
}

/// Expected particle-band fraction of a uniformly filled band after time τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VacuumPrediction {
    pub fraction: f64,
    /// τ exceeds one Bloch period, where the single-crossing model no longer holds.
    pub extrapolated: bool,
}

/// Each member of the sea crosses the zone edge once per Bloch period `2/f`
/// and converts with probability `p_lz`, so the fraction grows as
/// `p_lz·fτ/2`.
pub fn vacuum_fraction(rest_mass: f64, force: f64, time: f64) -> Result<VacuumPrediction> {
    if !(time >= 0.0) {
        return Err(invalid(format!("time must be non-negative, got {time}")));
    }
    let p = p_lz(rest_mass, force)?;
    Ok(VacuumPrediction {
        fraction: p * force * time / 2.0,
        extrapolated: force * time > 2.0 * (1.0 + 1e-12),
    })
}

/// Pair-production rate of the filled band, `p_lz·f/2` per unit τ.
pub fn vacuum_rate(rest_mass: f64, force: f64) -> Result<f64> {
    Ok(p_lz(rest_mass, force)? * force / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn massless_limit() {
        assert_eq!(gamma(0.0, 0.1).unwrap(), 0.0);
        assert_eq!(p_lz(0.0, 0.1).unwrap(), 1.0);
    }

    #[test]
    fn invalid_force() {
        assert!(gamma(0.2, 0.0).is_err());
        assert!(gamma(0.2, -0.1).is_err());
        assert!(half_max_mass(0.0).is_err());
    }

    #[test]
    fn vacuum_parameters() {
        // μ = 0.2, t_F = 3.4 ms: f = 2/(2π·2020·0.0034).
        let f = 2.0 / (2.0 * PI * 2020.0 * 0.0034);
        let lz = LzPrediction::new(0.2, f).unwrap();
        assert!((lz.force_ratio - 2.3175).abs() < 1e-3);
        assert!((lz.gamma - 0.2157).abs() < 1e-3);
        assert!((lz.force_ratio - 1.0 / (2.0 * lz.gamma)).abs() < 1e-12);
        assert!((lz.p_lz - 0.2579).abs() < 1e-3);
    }

    #[test]
    fn heavy_mass_single_state() {
        let p = p_lz(0.309, 0.0426).unwrap();
        let direct = (-PI * 0.5 * 0.309f64.powi(2) / 0.0426).exp();
        assert!((p - direct).abs() < 1e-15);
        assert!((p - 0.030).abs() < 1e-3);
    }

    #[test]
    fn threshold_and_large_ratio() {
        let mu = 0.3;
        let f_c = critical_force(mu);
        assert!((p_lz(mu, f_c).unwrap() - (-PI).exp()).abs() < 1e-15);
        assert!(((-PI).exp() - 0.0432).abs() < 1e-4);
        let p = p_lz(mu, 16.5 * f_c).unwrap();
        assert!((p - 0.827).abs() < 1e-3);
        assert!((p - p_lz_from_ratio(16.5)).abs() < 1e-15);
        assert!(p_lz(50.0, 0.05).unwrap() < 1e-300);
    }

    #[test]
    fn half_max() {
        let mu = half_max_mass(0.0426).unwrap();
        assert!((mu * mu - 0.018_797).abs() < 1e-5);
        assert!((mu - 0.1371).abs() < 1e-4);
        let mu2 = half_max_mass(0.0852).unwrap();
        assert!((mu2 * mu2 - 2.0 * mu * mu).abs() < 1e-15);
    }

    #[test]
    fn vacuum_fraction_examples() {
        let f = 0.0464;
        assert_eq!(vacuum_fraction(0.2, f, 0.0).unwrap().fraction, 0.0);
        let full = vacuum_fraction(0.2, f, 2.0 / f).unwrap();
        assert!((full.fraction - p_lz(0.2, f).unwrap()).abs() < 1e-15);
        assert!(!full.extrapolated);
        let half = vacuum_fraction(0.2, f, 21.6).unwrap();
        assert!((half.fraction - 0.129).abs() < 1e-3);
        assert!(vacuum_fraction(0.2, f, 3.0 / f).unwrap().extrapolated);
        assert!((vacuum_rate(0.2, f).unwrap() - 5.99e-3).abs() < 2e-5);
    }

    #[test]
    fn matches_main_text_form() {
        // Γ = a²/|dΔE/dτ| with a = μ and |dΔE/dτ| = 4f.
        for (mu, f) in [(0.1, 0.03), (0.309, 0.0426), (1.0, 2.0)] {
            let a: f64 = mu;
            assert!((gamma(mu, f).unwrap() - a * a / (4.0 * f)).abs() < 1e-15);
        }
    }

    proptest::proptest! {
        #[test]
        fn half_max_is_exact(f in 1e-4f64..10.0) {
            let p = p_lz(half_max_mass(f).unwrap(), f).unwrap();
            proptest::prop_assert!((p - 0.5).abs() < 1e-14);
        }

        #[test]
        fn universal_in_force_ratio(mu in 0.0f64..2.0, f in 1e-3f64..1.0, alpha in 0.1f64..10.0) {
            let a = p_lz(mu, f).unwrap();
            let b = p_lz(alpha * mu, alpha * alpha * f).unwrap();
            proptest::prop_assert!((a - b).abs() <= 1e-12 * a + 1e-300);
        }

        #[test]
        fn ratio_identity(mu in 1e-3f64..2.0, f in 1e-3f64..1.0) {
            let lz = LzPrediction::new(mu, f).unwrap();
            proptest::prop_assert!((lz.force_ratio * 2.0 * lz.gamma - 1.0).abs() < 1e-12);
            proptest::prop_assert!((lz.p_lz - p_lz_from_ratio(lz.force_ratio)).abs() < 1e-14);
        }

        #[test]
        fn monotone(mu in 1e-3f64..1.0, f in 1e-2f64..1.0, d in 1e-3f64..0.1) {
            proptest::prop_assert!(p_lz(mu + d, f).unwrap() < p_lz(mu, f).unwrap());
            proptest::prop_assert!(p_lz(mu, f + d).unwrap() > p_lz(mu, f).unwrap());
        }
    }
}
