//! Band mapping: band index plus quasimomentum to free-particle momentum, and
//! the resulting line-density profiles.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Minimum histogram resolution.
pub const MIN_BINS: usize = 32;
/// Largest blur for which the |k| = 1 partition is still meaningful.
pub const MAX_PARTITION_BLUR: f64 = 0.1;

/// Free momentum (units of ħk_L) that band `band` at quasimomentum `q` is
/// mapped to by an adiabatic ramp-off of the lattice.
///
/// This is the free-particle limit of the Bloch state: band 0 stays at `Q`,
/// odd bands step down through `Q - 2s, Q - 4s, …` and even bands up through
/// `Q + 2s, Q + 4s, …` with `s = sign(Q)`, so band `n` lands in
/// `n ≤ |k| ≤ n + 1`. `Q = 0` is treated as positive.
pub fn band_map(band: usize, q: f64, n_bands: usize) -> Result<f64> {
    if band >= n_bands {
        return Err(invalid(format!("band {band} beyond the {n_bands} tracked bands")));
    }
    if !q.is_finite() || q.abs() > 1.0 + 1e-12 {
        return Err(invalid(format!("quasimomentum must satisfy |Q| <= 1, got {q}")));
    }
    let s = if q < 0.0 { -1.0 } else { 1.0 };
    let reach = 2.0 * band.div_ceil(2) as f64;
    let direction = if band % 2 == 1 { -1.0 } else { 1.0 };
    Ok(q + direction * reach * s)
}

/// Band occupation of one ensemble member at its current quasimomentum.
#[derive(Debug, Clone, PartialEq)]
pub struct Occupation {
    pub quasimomentum: f64,
    pub weight: f64,
    pub populations: Vec<f64>,
}

/// Band-mapped line density over `[-n_bands, n_bands]` (units of ħk_L).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumDistribution {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub blur_sigma: f64,
}

impl MomentumDistribution {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Integrated density.
    pub fn total(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width()
    }

    /// Integrated density inside `[lo, hi]`; partially covered bins contribute
    /// in proportion to their overlap.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.densities)
            .map(|(w, d)| {
                let overlap = (w[1].min(hi) - w[0].max(lo)).max(0.0);
                d * overlap
            })
            .sum()
    }
}

/// Weighted histogram of the band-mapped momenta of `occupations`, optionally
/// convolved with a Gaussian of width `blur_sigma` to mimic imaging defocus.
pub fn ensemble_distribution(
    occupations: &[Occupation],
    n_bands: usize,
    bins: usize,
    blur_sigma: f64,
) -> Result<MomentumDistribution> {
    if bins < MIN_BINS {
        return Err(invalid(format!("need at least {MIN_BINS} bins, got {bins}")));
    }
    if !(blur_sigma >= 0.0) || !blur_sigma.is_finite() {
        return Err(invalid(format!("blur sigma must be non-negative, got {blur_sigma}")));
    }
    if n_bands == 0 {
        return Err(invalid("need at least one band"));
    }
    let half_range = n_bands as f64;
    let width = 2.0 * half_range / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| -half_range + width * i as f64).collect();

    let mut mass = vec![0.0; bins];
    for occ in occupations {
        for (band, &p) in occ.populations.iter().enumerate().take(n_bands) {
            if p == 0.0 {
                continue;
            }
            let k = band_map(band, occ.quasimomentum, n_bands)?;
            let idx = (((k + half_range) / width).floor().max(0.0) as usize).min(bins - 1);
            mass[idx] += occ.weight * p;
        }
    }

    if blur_sigma > 0.0 {
        mass = blur(&mass, width, blur_sigma);
    }
    Ok(MomentumDistribution {
        edges,
        densities: mass.into_iter().map(|m| m / width).collect(),
        blur_sigma,
    })
}

/// Spread each bin's mass over its neighbours with Gaussian weights that are
/// normalised per source bin, so the total is conserved exactly.
fn blur(mass: &[f64], width: f64, sigma: f64) -> Vec<f64> {
    let n = mass.len();
    let reach = ((6.0 * sigma / width).ceil() as usize).min(n);
    let kernel: Vec<f64> = (0..=reach)
        .map(|d| {
            let x = d as f64 * width / sigma;
            (-0.5 * x * x).exp()
        })
        .collect();
    let mut out = vec![0.0; n];
    for (i, &m) in mass.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(n - 1);
        let norm: f64 = (lo..=hi).map(|j| kernel[i.abs_diff(j)]).sum();
        for j in lo..=hi {
            out[j] += m * kernel[i.abs_diff(j)] / norm;
        }
    }
    out
}

/// (antiparticle, particle) fractions: density inside and outside `|k| ≤ 1`.
/// Exact when `±1` fall on bin edges (e.g. 200 bins for five bands);
/// otherwise the straddling bins are split in proportion to their overlap.
pub fn fractional_populations(distribution: &MomentumDistribution) -> Result<(f64, f64)> {
    if distribution.blur_sigma > MAX_PARTITION_BLUR {
        return Err(Error::IllPosedPartition(distribution.blur_sigma));
    }
    let lo = distribution.edges[0];
    let hi = distribution.edges[distribution.edges.len() - 1];
    let inside = distribution.mass_between(-1.0, 1.0);
    let outside = distribution.mass_between(lo, -1.0) + distribution.mass_between(1.0, hi);
    Ok((inside, outside))
}
