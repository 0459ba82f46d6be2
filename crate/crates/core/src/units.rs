//! Recoil-unit system and the scalar dictionary between the lattice emulator
//! and the Dirac problem.
//!
//! Internally everything is dimensionless: energies in `E_L`, momenta in
//! `ħk_L`, times in `ħ/E_L` and forces in `E_L k_L`. SI values only appear at
//! the command-line boundary and pass through [`to_recoil_units`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Planck constant (J s), exact in SI.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of ⁸⁷Rb in atomic mass units.
pub const RB87_MASS_U: f64 = 86.909_180_527;
/// Lattice laser wavelength used by the experiment (m).
pub const LATTICE_WAVELENGTH: f64 = 1064e-9;
/// Recoil frequency `E_L/h` quoted for the 1064 nm lattice (Hz).
pub const QUOTED_RECOIL_FREQUENCY: f64 = 2.02e3;

pub const DEFAULT_PLANE_WAVES: usize = 21;
pub const DEFAULT_BANDS: usize = 5;
pub const DEFAULT_DT_MAX: f64 = 0.01;

/// Laboratory scales that fix the recoil units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// λ_L (m).
    pub lattice_wavelength: f64,
    /// k_L = 2π/λ_L (1/m).
    pub recoil_momentum: f64,
    /// E_L = (ħk_L)²/2m (J).
    pub recoil_energy: f64,
    /// c* = ħk_L/m (m/s), the single-photon recoil velocity.
    pub effective_light_speed: f64,
    /// Atomic mass (kg).
    pub atom_mass: f64,
}

impl PhysicalConstants {
    /// Derive all scales from the lattice wavelength and the atomic mass.
    pub fn from_mass(lattice_wavelength: f64, atom_mass: f64) -> Result<Self> {
        if !(lattice_wavelength > 0.0) || !lattice_wavelength.is_finite() {
            return Err(invalid(format!("lattice wavelength must be positive, got {lattice_wavelength}")));
        }
        if !(atom_mass > 0.0) || !atom_mass.is_finite() {
            return Err(invalid(format!("atom mass must be positive, got {atom_mass}")));
        }
        let k = 2.0 * PI / lattice_wavelength;
        let p = HBAR * k;
        Ok(Self {
            lattice_wavelength,
            recoil_momentum: k,
            recoil_energy: p * p / (2.0 * atom_mass),
            effective_light_speed: p / atom_mass,
            atom_mass,
        })
    }

    /// Scales calibrated to a measured recoil frequency `E_L/h`. The mass is
    /// the effective value consistent with that frequency.
    pub fn from_recoil_frequency(lattice_wavelength: f64, recoil_frequency: f64) -> Result<Self> {
        if !(recoil_frequency > 0.0) || !recoil_frequency.is_finite() {
            return Err(invalid(format!("recoil frequency must be positive, got {recoil_frequency}")));
        }
        if !(lattice_wavelength > 0.0) || !lattice_wavelength.is_finite() {
            return Err(invalid(format!("lattice wavelength must be positive, got {lattice_wavelength}")));
        }
        let k = 2.0 * PI / lattice_wavelength;
        let p = HBAR * k;
        let energy = PLANCK * recoil_frequency;
        Self::from_mass(lattice_wavelength, p * p / (2.0 * energy))
    }

    /// ⁸⁷Rb in a 1064 nm lattice with CODATA constants.
    pub fn rubidium_1064() -> Self {
        Self::from_mass(LATTICE_WAVELENGTH, RB87_MASS_U * ATOMIC_MASS_UNIT)
            .expect("hard-coded constants are valid")
    }

    /// 1064 nm lattice calibrated to the quoted recoil frequency of 2.02 kHz.
    /// This is the default for all experiments.
    pub fn calibrated_1064() -> Self {
        Self::from_recoil_frequency(LATTICE_WAVELENGTH, QUOTED_RECOIL_FREQUENCY)
            .expect("hard-coded constants are valid")
    }

    /// E_L/h in Hz.
    pub fn recoil_frequency(&self) -> f64 {
        self.recoil_energy / PLANCK
    }

    /// ħ/E_L in seconds.
    pub fn time_unit(&self) -> f64 {
        HBAR / self.recoil_energy
    }

    /// E_L k_L in newtons.
    pub fn force_unit(&self) -> f64 {
        self.recoil_energy * self.recoil_momentum
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::calibrated_1064()
    }
}

/// All experiment inputs in recoil units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    /// Peak-to-valley lattice depth V/E_L.
    pub depth: f64,
    /// Force F_e/(E_L k_L), equal to the quasimomentum sweep rate dQ/dτ.
    pub force: f64,
    /// Duration of one Bloch oscillation, τ_F = 2/f (infinite when f = 0).
    pub sweep_time: f64,
    pub n_plane_waves: usize,
    pub n_bands: usize,
    pub dt_max: f64,
}

impl SimulationParams {
    /// Static lattice (f = 0) with default basis sizes.
    pub fn new(depth: f64) -> Result<Self> {
        let params = Self {
            depth,
            force: 0.0,
            sweep_time: f64::INFINITY,
            n_plane_waves: DEFAULT_PLANE_WAVES,
            n_bands: DEFAULT_BANDS,
            dt_max: DEFAULT_DT_MAX,
        };
        params.validate()?;
        Ok(params)
    }

    /// Lattice specified through its emulated rest mass μ = v/4.
    pub fn from_rest_mass(rest_mass: f64) -> Result<Self> {
        Self::new(4.0 * rest_mass)
    }

    /// Set the force; the sweep time follows from f·τ_F = 2.
    pub fn with_force(mut self, force: f64) -> Result<Self> {
        if !force.is_finite() {
            return Err(invalid(format!("force must be finite, got {force}")));
        }
        self.force = force;
        self.sweep_time = if force == 0.0 { f64::INFINITY } else { 2.0 / force.abs() };
        Ok(self)
    }

    /// Set the single-Bloch-oscillation sweep time; the force follows from f·τ_F = 2.
    pub fn with_sweep_time(mut self, sweep_time: f64) -> Result<Self> {
        if !(sweep_time > 0.0) || !sweep_time.is_finite() {
            return Err(invalid(format!("sweep time must be positive, got {sweep_time}")));
        }
        self.sweep_time = sweep_time;
        self.force = 2.0 / sweep_time;
        Ok(self)
    }

    pub fn with_basis(mut self, n_plane_waves: usize, n_bands: usize) -> Result<Self> {
        self.n_plane_waves = n_plane_waves;
        self.n_bands = n_bands;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Result<Self> {
        self.dt_max = dt_max;
        self.validate()?;
        Ok(self)
    }

    /// Emulated rest mass m*c*²/E_L = v/4.
    pub fn rest_mass(&self) -> f64 {
        self.depth / 4.0
    }

    /// Bloch period 2/|f|.
    pub fn bloch_period(&self) -> f64 {
        self.sweep_time
    }

    /// Ratio of the applied force to the critical force.
    pub fn force_ratio(&self) -> f64 {
        self.force.abs() / critical_force(self.rest_mass())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.depth >= 0.0) || !self.depth.is_finite() {
            return Err(invalid(format!("lattice depth must be non-negative, got {}", self.depth)));
        }
        if self.n_plane_waves % 2 == 0 || self.n_plane_waves < 11 {
            return Err(invalid(format!(
                "n_plane_waves must be odd and at least 11, got {}",
                self.n_plane_waves
            )));
        }
        if self.n_bands == 0 || self.n_bands > self.n_plane_waves {
            return Err(invalid(format!(
                "n_bands must be in 1..={}, got {}",
                self.n_plane_waves, self.n_bands
            )));
        }
        if !(self.dt_max > 0.0) || !self.dt_max.is_finite() {
            return Err(invalid(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        Ok(())
    }
}

/// How the drive is specified in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    /// Force F_e in newtons.
    Force(f64),
    /// Duration of one Bloch oscillation t_F in seconds.
    SweepTime(f64),
}

/// Convert laboratory inputs into dimensionless simulation parameters.
pub fn to_recoil_units(
    constants: &PhysicalConstants,
    depth_el: f64,
    drive: Drive,
) -> Result<SimulationParams> {
    if !(constants.lattice_wavelength > 0.0) {
        return Err(invalid("lattice wavelength must be positive"));
    }
    let params = SimulationParams::new(depth_el)?;
    match drive {
        Drive::Force(force) => params.with_force(force / constants.force_unit()),
        Drive::SweepTime(t) => {
            if !(t > 0.0) {
                return Err(invalid(format!("sweep time must be positive, got {t} s")));
            }
            params.with_sweep_time(t / constants.time_unit())
        }
    }
}

/// Applied force back in newtons.
pub fn force_si(constants: &PhysicalConstants, params: &SimulationParams) -> f64 {
    params.force * constants.force_unit()
}

/// Sweep time back in seconds.
pub fn sweep_time_si(constants: &PhysicalConstants, params: &SimulationParams) -> f64 {
    params.sweep_time * constants.time_unit()
}

/// Dimensionless time τ = t E_L/ħ for a duration in seconds.
pub fn time_to_recoil(constants: &PhysicalConstants, seconds: f64) -> f64 {
    seconds / constants.time_unit()
}

/// Critical (Sauter-Schwinger) force for rest mass μ.
///
/// F_c = (m*c*²)²/(ħc*), and ħc* = 2E_L/k_L, so f_c = μ²/2.
pub fn critical_force(rest_mass: f64) -> f64 {
    0.5 * rest_mass * rest_mass
}

/// Effective Compton wavelength λ_C/λ_L = 8/v.
pub fn compton_wavelength(depth: f64) -> Result<f64> {
    if depth == 0.0 {
        return Err(Error::InfiniteWavelength);
    }
    if !(depth > 0.0) {
        return Err(invalid(format!("lattice depth must be positive, got {depth}")));
    }
    Ok(8.0 / depth)
}
