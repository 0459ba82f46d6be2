//! Single-particle band structure of the 1D lattice `V/2·cos(2k_L x)` in a
//! truncated plane-wave basis, plus the analytic Dirac dispersion used as the
//! zone-edge reference.
//!
//! At quasimomentum `Q` the basis states are plane waves with momentum
//! `Q + 2n`, `n = -(N-1)/2 ..= (N-1)/2`. The kinetic term is diagonal and the
//! lattice couples neighbouring plane waves with strength `v/4`, so the Bloch
//! Hamiltonian is real symmetric tridiagonal.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::tridiag::{symmetric_tridiagonal_eigen, TridiagonalEigen};
use crate::units::SimulationParams;

/// Gap below which two adjacent levels are treated as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

const Q_SLACK: f64 = 1e-12;

/// Lattice depth together with the plane-wave truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub depth: f64,
    pub n_plane_waves: usize,
}

impl Lattice {
    pub fn new(depth: f64, n_plane_waves: usize) -> Result<Self> {
        if !(depth >= 0.0) || !depth.is_finite() {
            return Err(invalid(format!("lattice depth must be non-negative, got {depth}")));
        }
        if n_plane_waves % 2 == 0 || n_plane_waves < 3 {
            return Err(invalid(format!(
                "n_plane_waves must be odd and at least 3, got {n_plane_waves}"
            )));
        }
        Ok(Self { depth, n_plane_waves })
    }

    pub fn from_params(params: &SimulationParams) -> Result<Self> {
        Self::new(params.depth, params.n_plane_waves)
    }

    /// Largest plane-wave index `(N-1)/2`.
    pub fn max_index(&self) -> i64 {
        (self.n_plane_waves as i64 - 1) / 2
    }

    /// Free momenta `Q + 2n` of the basis states, in basis order.
    pub fn momenta(&self, quasimomentum: f64) -> Vec<f64> {
        let m = self.max_index();
        (-m..=m).map(|n| quasimomentum + 2.0 * n as f64).collect()
    }

    pub fn hamiltonian(&self, quasimomentum: f64) -> Result<BlochHamiltonian> {
        if !quasimomentum.is_finite() || quasimomentum.abs() > 1.0 + Q_SLACK {
            return Err(invalid(format!("quasimomentum must satisfy |Q| <= 1, got {quasimomentum}")));
        }
        Ok(BlochHamiltonian {
            quasimomentum,
            depth: self.depth,
            diagonal: self.momenta(quasimomentum).iter().map(|k| k * k).collect(),
            off_diagonal: self.depth / 4.0,
        })
    }

    /// Lowest `n_bands` Bloch states at one quasimomentum.
    pub fn bloch_states(&self, quasimomentum: f64, n_bands: usize) -> Result<BlochStates> {
        if n_bands == 0 || n_bands > self.n_plane_waves {
            return Err(invalid(format!(
                "n_bands must be in 1..={}, got {n_bands}",
                self.n_plane_waves
            )));
        }
        let eig = self.hamiltonian(quasimomentum)?.eigen()?;
        let energies = eig.values[..n_bands].to_vec();
        let vectors = (0..n_bands)
            .map(|j| {
                let mut v = eig.vector(j).to_vec();
                fix_sign(&mut v);
                v
            })
            .collect();
        Ok(BlochStates {
            quasimomentum,
            depth: self.depth,
            energies,
            vectors,
            next_energy: eig.values.get(n_bands).copied(),
        })
    }
}

/// Flip `v` so that its largest-magnitude component is positive. Ties go to
/// the lowest index.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(pivot) = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-9)) {
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Central-equation Hamiltonian at fixed quasimomentum.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochHamiltonian {
    pub quasimomentum: f64,
    pub depth: f64,
    /// `(Q + 2n)²`, in basis order.
    pub diagonal: Vec<f64>,
    /// Constant coupling `v/4` between neighbouring plane waves.
    pub off_diagonal: f64,
}

impl BlochHamiltonian {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diagonal[i];
            if i + 1 < n {
                m[i][i + 1] = self.off_diagonal;
                m[i + 1][i] = self.off_diagonal;
            }
        }
        m
    }

    pub fn eigen(&self) -> Result<TridiagonalEigen> {
        let off = vec![self.off_diagonal; self.dim().saturating_sub(1)];
        symmetric_tridiagonal_eigen(&self.diagonal, &off).ok_or(Error::NoConvergence {
            quasimomentum: self.quasimomentum,
            depth: self.depth,
        })
    }
}

pub fn build_hamiltonian(quasimomentum: f64, depth: f64, n_plane_waves: usize) -> Result<BlochHamiltonian> {
    Lattice::new(depth, n_plane_waves)?.hamiltonian(quasimomentum)
}

/// Bloch eigenstates at one quasimomentum, lowest band first.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochStates {
    pub quasimomentum: f64,
    pub depth: f64,
    pub energies: Vec<f64>,
    /// Real plane-wave amplitudes, one vector per band.
    pub vectors: Vec<Vec<f64>>,
    /// First energy above the tracked bands, if the basis has one.
    pub next_energy: Option<f64>,
}

impl BlochStates {
    pub fn n_bands(&self) -> usize {
        self.energies.len()
    }

    /// True when any two tracked bands (or the top tracked band and the next
    /// one) touch, making the band assignment ambiguous.
    pub fn is_degenerate(&self) -> bool {
        let mut levels = self.energies.clone();
        levels.extend(self.next_energy);
        levels.windows(2).any(|w| (w[1] - w[0]).abs() < DEGENERACY_TOLERANCE)
    }

    pub fn ensure_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::Degenerate { quasimomentum: self.quasimomentum, depth: self.depth })
        } else {
            Ok(())
        }
    }
}

/// Band energies and eigenvectors on a quasimomentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSolution {
    pub depth: f64,
    pub n_plane_waves: usize,
    pub quasimomenta: Vec<f64>,
    /// `energies[i][n]`: band `n` at `quasimomenta[i]`, ascending in `n`.
    pub energies: Vec<Vec<f64>>,
    /// `eigenvectors[i][n]`: plane-wave amplitudes of band `n` at `quasimomenta[i]`.
    pub eigenvectors: Vec<Vec<Vec<f64>>>,
}

impl BandSolution {
    pub fn n_bands(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    /// Energies of one band across the grid.
    pub fn band(&self, n: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[n]).collect()
    }
}

pub fn solve_bands(
    grid: &[f64],
    depth: f64,
    n_plane_waves: usize,
    n_bands: usize,
) -> Result<BandSolution> {
    let lattice = Lattice::new(depth, n_plane_waves)?;
    let states: Vec<BlochStates> = grid
        .par_iter()
        .map(|&q| lattice.bloch_states(q, n_bands))
        .collect::<Result<_>>()?;
    let (energies, eigenvectors) = states.into_iter().map(|s| (s.energies, s.vectors)).unzip();
    Ok(BandSolution {
        depth,
        n_plane_waves,
        quasimomenta: grid.to_vec(),
        energies,
        eigenvectors,
    })
}

/// `points` evenly spaced quasimomenta covering `[-1, 1]`, both ends included.
pub fn zone_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Dirac dispersion `±sqrt((2p)² + μ²)` for a momentum offset `p` (in ħk_L)
/// from the zone edge. The factor 2 is c*·ħk_L/E_L.
pub fn dirac_dispersion(momentum_offset: f64, rest_mass: f64) -> (f64, f64) {
    let e = (4.0 * momentum_offset * momentum_offset + rest_mass * rest_mass).sqrt();
    (-e, e)
}

/// Dirac dispersion anchored at the zone-edge mean of the two lowest lattice bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracReference {
    pub rest_mass: f64,
    pub offset: f64,
}

impl DiracReference {
    pub fn from_lattice(lattice: &Lattice) -> Result<Self> {
        let edge = lattice.bloch_states(1.0, 2)?;
        Ok(Self {
            rest_mass: lattice.depth / 4.0,
            offset: 0.5 * (edge.energies[0] + edge.energies[1]),
        })
    }

    pub fn energies(&self, momentum_offset: f64) -> (f64, f64) {
        let (lo, hi) = dirac_dispersion(momentum_offset, self.rest_mass);
        (lo + self.offset, hi + self.offset)
    }
}
