//! The Dirac vacuum: a uniformly filled lowest band driven by a constant force.

use rayon::prelude::*;
use serde::Serialize;

use crate::bandmap::Occupation;
use crate::error::{invalid, Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::lz;
use crate::propagator::{sample_times, Propagator, StateVector, Trajectory};
use crate::units::SimulationParams;

pub const MIN_STATES: usize = 16;
pub const DEFAULT_STATES: usize = 128;
/// Minimum number of samples for a rate fit.
pub const MIN_FIT_SAMPLES: usize = 10;
/// Runs longer than this many Bloch periods are outside the linear regime.
pub const LINEAR_REGIME_PERIODS: f64 = 1.5;

/// Uniformly weighted band-0 states sampling the Brillouin zone.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub states: Vec<StateVector>,
    pub initial_quasimomenta: Vec<f64>,
    pub weights: Vec<f64>,
    pub params: SimulationParams,
}

/// Midpoint grid `-1 + (j + ½)·2/n`, shifted by `shift` and folded into `(-1, 1]`.
/// Never contains both zone-edge points.
pub fn vacuum_grid(n_states: usize, shift: f64) -> Vec<f64> {
    let spacing = 2.0 / n_states as f64;
    (0..n_states)
        .map(|j| {
            let mut q = -1.0 + (j as f64 + 0.5) * spacing + shift;
            while q > 1.0 {
                q -= 2.0;
            }
            while q <= -1.0 {
                q += 2.0;
            }
            q
        })
        .collect()
}

pub fn make_vacuum(n_states: usize, params: &SimulationParams) -> Result<Ensemble> {
    make_shifted_vacuum(n_states, params, 0.0)
}

/// Vacuum on a grid translated by `shift` (mod the zone).
pub fn make_shifted_vacuum(n_states: usize, params: &SimulationParams, shift: f64) -> Result<Ensemble> {
    if n_states < MIN_STATES {
        return Err(Error::UnderSampled { needed: MIN_STATES, got: n_states });
    }
    let prop = Propagator::new(params)?;
    let grid = vacuum_grid(n_states, shift);
    let states = grid
        .iter()
        .map(|&q| prop.bloch_state(q, 0))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        states,
        initial_quasimomenta: grid,
        weights: vec![1.0 / n_states as f64; n_states],
        params: params.clone(),
    })
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Band occupations of every member at its current quasimomentum.
    pub fn occupations(&self, force: f64) -> Result<Vec<Occupation>> {
        let prop = Propagator::new(&self.params)?;
        self.states
            .par_iter()
            .zip(&self.weights)
            .map(|(s, &w)| {
                let pops = prop.measure(s, force)?;
                Ok(Occupation { quasimomentum: s.quasimomentum, weight: w, populations: pops.bands })
            })
            .collect()
    }
}

/// Weighted band populations of the ensemble versus time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductionSeries {
    pub times: Vec<f64>,
    /// Weighted population of bands ≥ 1.
    pub particle_fraction: Vec<f64>,
    /// Weighted population of band 0.
    pub antiparticle_fraction: Vec<f64>,
    /// Weighted population outside the tracked bands.
    pub leakage: Vec<f64>,
    pub rest_mass: f64,
    pub force: f64,
    /// `2/|f|`, infinite at zero force.
    pub bloch_period: f64,
    /// The run extends past the linear-regime window.
    pub extrapolated: bool,
}

/// Evolve every member for `duration` and reduce to weighted fractions.
/// Members are advanced in place.
pub fn evolve_ensemble(
    ensemble: &mut Ensemble,
    force: f64,
    duration: f64,
    sample_every: f64,
) -> Result<ProductionSeries> {
    if ensemble.is_empty() {
        return Err(Error::UnderSampled { needed: MIN_STATES, got: 0 });
    }
    if !(sample_every > 0.0) {
        return Err(invalid(format!("sample interval must be positive, got {sample_every}")));
    }
    let times = sample_times(duration, sample_every)?;
    let prop = Propagator::new(&ensemble.params)?;
    let trajectories: Vec<Trajectory> = ensemble
        .states
        .par_iter_mut()
        .zip(&ensemble.initial_quasimomenta)
        .map(|(state, &q0)| {
            prop.evolve(state, force, duration, sample_every)
                .map_err(|e| Error::MemberFailed { quasimomentum: q0, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;

    let samples = times.len();
    let mut particle = vec![0.0; samples];
    let mut anti = vec![0.0; samples];
    let mut leakage = vec![0.0; samples];
    for (traj, &w) in trajectories.iter().zip(&ensemble.weights) {
        for i in 0..samples {
            let pops = &traj.populations[i];
            anti[i] += w * pops[0];
            particle[i] += w * pops[1..].iter().sum::<f64>();
            leakage[i] += w * traj.leakage[i];
        }
    }
    let bloch_period = if force == 0.0 { f64::INFINITY } else { 2.0 / force.abs() };
    Ok(ProductionSeries {
        times: trajectories[0].times.clone(),
        particle_fraction: particle,
        antiparticle_fraction: anti,
        leakage,
        rest_mass: ensemble.params.rest_mass(),
        force,
        bloch_period,
        extrapolated: duration > LINEAR_REGIME_PERIODS * bloch_period,
    })
}

/// Production-rate fit with its closed-form counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub fit: LineFit,
    /// `p_lz·f/2`, absent at zero force.
    pub predicted: Option<f64>,
}

/// Least-squares slope of the particle fraction over the first Bloch period.
pub fn production_rate(series: &ProductionSeries) -> Result<RateFit> {
    let window = series.bloch_period * (1.0 + 1e-9);
    let (t, y): (Vec<f64>, Vec<f64>) = series
        .times
        .iter()
        .zip(&series.particle_fraction)
        .filter(|(&t, _)| t - series.times[0] <= window)
        .map(|(&t, &y)| (t, y))
        .unzip();
    if t.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData { needed: MIN_FIT_SAMPLES, got: t.len() });
    }
    let fit = fit_line(&t, &y)?;
    let predicted = if series.force != 0.0 {
        Some(lz::vacuum_rate(series.rest_mass, series.force.abs())?)
    } else {
        None
    };
    Ok(RateFit { fit, predicted })
}
