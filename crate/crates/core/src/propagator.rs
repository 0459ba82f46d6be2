//! Time evolution of a single state under the lattice plus a uniform force.
//!
//! The force enters through the acceleration theorem: in the comoving frame
//! the quasimomentum drifts as `Q(τ) = Q0 + fτ` and the state evolves under the
//! instantaneous Bloch Hamiltonian `H(Q(τ)) = K(Q(τ)) + V`. `K` is diagonal in
//! the plane-wave basis, so its flow over a step is an exact phase
//! `∫(Q(τ) + 2n)² dτ`; `V` is constant, so `exp(-iVh/2)` is built once per step
//! size from its eigen-decomposition. Each step is the symmetric product
//! `exp(-iVh/2)·exp(-i∫K)·exp(-iVh/2)`, which is unitary and time-reversible.
//!
//! When `Q` leaves `(-1, 1]` it is folded back by ±2 and the amplitudes are
//! relabelled by one plane-wave index. Population that tunnels diabatically
//! keeps accelerating by 2ħk_L per Bloch period, so long runs at small mass
//! need a basis wide enough to hold it; probability pushed off the basis edge
//! is counted and fails the run once it exceeds [`NORM_TOLERANCE`].

use num_complex::Complex64;

use crate::band::{BlochStates, Lattice};
use crate::error::{invalid, Error, Result};
use crate::tridiag::{symmetric_tridiagonal_eigen, TridiagonalEigen};
use crate::units::SimulationParams;

/// Largest phase `E·dt` accumulated per step by the tracked bands.
pub const PHASE_LIMIT: f64 = 0.1;
/// Allowed deviation of the norm from one before a run is declared failed.
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Quasimomentum offset used when a measurement falls on a band touching.
pub const DEGENERACY_NUDGE: f64 = 1e-6;

const MIN_STEP: f64 = 1e-12;
const MAX_STEPS: f64 = 1e9;

/// One quantum state in the plane-wave basis at quasimomentum `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub quasimomentum: f64,
    /// Amplitude of plane wave `Q + 2n`, `n = -(N-1)/2 ..= (N-1)/2`.
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl StateVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`, assuming both live at the same quasimomentum label.
    pub fn overlap(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// Antiunitary time reversal in the comoving frame. The Bloch Hamiltonian
    /// is real, so conjugating, evolving with `-f` for the same duration and
    /// conjugating again undoes an evolution with `f`.
    pub fn time_reversed(&self) -> StateVector {
        StateVector {
            quasimomentum: self.quasimomentum,
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
            time: self.time,
        }
    }

    /// Momentum-space probabilities `|c_n|²` for the free momenta `Q + 2n`.
    pub fn momentum_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Same physical state labelled at `Q ± 2` when `Q` has left `(-1, 1]`.
    /// Returns the probability pushed off the end of the basis.
    fn fold(&mut self) -> f64 {
        let mut lost = 0.0;
        while self.quasimomentum > 1.0 {
            self.quasimomentum -= 2.0;
            lost += self.amplitudes.last().map_or(0.0, |a| a.norm_sqr());
            self.amplitudes.rotate_right(1);
            self.amplitudes[0] = Complex64::new(0.0, 0.0);
        }
        while self.quasimomentum <= -1.0 {
            self.quasimomentum += 2.0;
            lost += self.amplitudes.first().map_or(0.0, |a| a.norm_sqr());
            self.amplitudes.rotate_left(1);
            let last = self.amplitudes.len() - 1;
            self.amplitudes[last] = Complex64::new(0.0, 0.0);
        }
        lost
    }
}

/// Per-band occupation of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPopulations {
    pub bands: Vec<f64>,
    /// Probability outside the tracked bands.
    pub leakage: f64,
}

impl BandPopulations {
    /// Occupation of all tracked bands above the lowest.
    pub fn particle(&self) -> f64 {
        self.bands.iter().skip(1).sum()
    }

    pub fn antiparticle(&self) -> f64 {
        self.bands.first().copied().unwrap_or(0.0)
    }
}

fn project(states: &BlochStates, state: &StateVector) -> BandPopulations {
    let bands: Vec<f64> = states
        .vectors
        .iter()
        .map(|u| {
            u.iter()
                .zip(&state.amplitudes)
                .map(|(&x, a)| a * x)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect();
    let total: f64 = state.amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let leakage = (total - bands.iter().sum::<f64>()).max(0.0);
    BandPopulations { bands, leakage }
}

/// Sampled band populations along one evolution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub quasimomenta: Vec<f64>,
    /// `populations[i][n]`: band `n` at sample `i`.
    pub populations: Vec<Vec<f64>>,
    pub leakage: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Occupation of bands above the lowest, per sample.
    pub fn particle_fraction(&self) -> Vec<f64> {
        self.populations.iter().map(|p| p.iter().skip(1).sum()).collect()
    }

    pub fn final_populations(&self) -> Option<BandPopulations> {
        Some(BandPopulations {
            bands: self.populations.last()?.clone(),
            leakage: *self.leakage.last()?,
        })
    }

    fn push(&mut self, time: f64, quasimomentum: f64, pops: BandPopulations) {
        self.times.push(time);
        self.quasimomenta.push(quasimomentum);
        self.populations.push(pops.bands);
        self.leakage.push(pops.leakage);
    }
}

/// Integrator for one lattice configuration.
#[derive(Debug, Clone)]
pub struct Propagator {
    lattice: Lattice,
    n_bands: usize,
    dt_max: f64,
    potential: TridiagonalEigen,
}

impl Propagator {
    pub fn new(params: &SimulationParams) -> Result<Self> {
        params.validate()?;
        let lattice = Lattice::from_params(params)?;
        let n = lattice.n_plane_waves;
        let potential = symmetric_tridiagonal_eigen(&vec![0.0; n], &vec![params.depth / 4.0; n - 1])
            .ok_or(Error::NoConvergence { quasimomentum: 0.0, depth: params.depth })?;
        Ok(Self { lattice, n_bands: params.n_bands, dt_max: params.dt_max, potential })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    /// Step size: `dt_max`, reduced so the highest tracked band (free-particle
    /// top `n_bands²` plus the lattice) accumulates at most [`PHASE_LIMIT`] per step.
    pub fn step_bound(&self) -> f64 {
        let nb = self.n_bands as f64;
        let scale = nb * nb + self.lattice.depth / 2.0;
        self.dt_max.min(PHASE_LIMIT / scale)
    }

    /// Prepare the Bloch eigenstate of `band` at `quasimomentum`.
    pub fn bloch_state(&self, quasimomentum: f64, band: usize) -> Result<StateVector> {
        if band >= self.n_bands {
            return Err(invalid(format!(
                "band index {band} out of range for {} bands",
                self.n_bands
            )));
        }
        let states = self.lattice.bloch_states(quasimomentum, self.n_bands)?;
        let e = &states.energies;
        let next = states.next_energy;
        let touches_below = band > 0 && (e[band] - e[band - 1]).abs() < crate::band::DEGENERACY_TOLERANCE;
        let above = e.get(band + 1).copied().or(next);
        let touches_above = above.is_some_and(|a| (a - e[band]).abs() < crate::band::DEGENERACY_TOLERANCE);
        if touches_below || touches_above {
            return Err(Error::Degenerate { quasimomentum, depth: self.lattice.depth });
        }
        Ok(StateVector {
            quasimomentum,
            amplitudes: states.vectors[band].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            time: 0.0,
        })
    }

    /// Band populations at the state's own quasimomentum; fails on a band touching.
    pub fn band_populations(&self, state: &StateVector) -> Result<BandPopulations> {
        self.check_dim(state)?;
        let states = self.lattice.bloch_states(state.quasimomentum, self.n_bands)?;
        states.ensure_nondegenerate()?;
        Ok(project(&states, state))
    }

    /// Band populations, stepping `DEGENERACY_NUDGE` along the sweep direction
    /// when the state sits exactly on a band touching.
    pub fn measure(&self, state: &StateVector, force: f64) -> Result<BandPopulations> {
        self.check_dim(state)?;
        let states = self.lattice.bloch_states(state.quasimomentum, self.n_bands)?;
        if !states.is_degenerate() {
            return Ok(project(&states, state));
        }
        let direction = if force < 0.0 { -1.0 } else { 1.0 };
        let mut shifted = state.clone();
        shifted.quasimomentum += direction * DEGENERACY_NUDGE;
        shifted.fold();
        let states = self.lattice.bloch_states(shifted.quasimomentum, self.n_bands)?;
        states.ensure_nondegenerate()?;
        Ok(project(&states, &shifted))
    }

    fn check_dim(&self, state: &StateVector) -> Result<()> {
        if state.amplitudes.len() != self.lattice.n_plane_waves {
            return Err(invalid(format!(
                "state has {} amplitudes, basis has {}",
                state.amplitudes.len(),
                self.lattice.n_plane_waves
            )));
        }
        Ok(())
    }

    /// `exp(-iVs)` as a dense row-major matrix.
    fn potential_exponential(&self, s: f64) -> Vec<Complex64> {
        let n = self.lattice.n_plane_waves;
        let phases: Vec<Complex64> = self
            .potential
            .values
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * s))
            .collect();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for (j, phase) in phases.iter().enumerate() {
            let u = self.potential.vector(j);
            for r in 0..n {
                let ur = phase * u[r];
                for c in 0..n {
                    m[r * n + c] += ur * u[c];
                }
            }
        }
        m
    }

    /// Advance `state` by `duration` under force `force`, without sampling.
    pub fn advance(&self, state: &mut StateVector, force: f64, duration: f64) -> Result<()> {
        self.check_dim(state)?;
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(invalid(format!("duration must be non-negative, got {duration}")));
        }
        if !force.is_finite() {
            return Err(invalid(format!("force must be finite, got {force}")));
        }
        if duration == 0.0 {
            return Ok(());
        }
        let steps = (duration / self.step_bound()).ceil();
        if steps > MAX_STEPS {
            return Err(Error::NumericalFailure(format!(
                "step size underflow: {steps} steps needed for duration {duration}"
            )));
        }
        let steps = steps.max(1.0) as usize;
        let h = duration / steps as f64;
        if h < MIN_STEP {
            return Err(Error::NumericalFailure(format!("step size {h} below {MIN_STEP}")));
        }

        let n = self.lattice.n_plane_waves;
        let half = self.potential_exponential(h / 2.0);
        let m = self.lattice.max_index();
        let offsets: Vec<f64> = (-m..=m).map(|k| 2.0 * k as f64).collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        let mut lost = 0.0;
        let start = state.time;

        for step in 0..steps {
            apply(&half, &state.amplitudes, &mut scratch);
            let qa = state.quasimomentum;
            let qb = qa + force * h;
            for ((amp, out), off) in state.amplitudes.iter_mut().zip(&scratch).zip(&offsets) {
                let a = qa + off;
                let b = qb + off;
                let phase = h * (a * a + a * b + b * b) / 3.0;
                *amp = out * Complex64::from_polar(1.0, -phase);
            }
            apply(&half, &state.amplitudes, &mut scratch);
            state.amplitudes.copy_from_slice(&scratch);
            state.quasimomentum = qb;
            state.time = start + h * (step + 1) as f64;
            lost += state.fold();
        }

        let norm = state.norm();
        if lost > NORM_TOLERANCE || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NumericalFailure(format!(
                "norm drift: |psi| = {norm}, probability lost off the basis edge = {lost}"
            )));
        }
        Ok(())
    }

    /// Evolve `state` for `duration`, sampling band populations at `τ = 0`,
    /// every `sample_every`, and at the end.
    pub fn evolve(
        &self,
        state: &mut StateVector,
        force: f64,
        duration: f64,
        sample_every: f64,
    ) -> Result<Trajectory> {
        if !(sample_every > 0.0) {
            return Err(invalid(format!("sample interval must be positive, got {sample_every}")));
        }
        let times = sample_times(duration, sample_every)?;
        let mut trajectory = Trajectory::default();
        let t0 = state.time;
        trajectory.push(t0, state.quasimomentum, self.measure(state, force)?);
        let mut last = 0.0;
        for &t in &times[1..] {
            self.advance(state, force, t - last)?;
            state.time = t0 + t;
            last = t;
            trajectory.push(state.time, state.quasimomentum, self.measure(state, force)?);
        }
        Ok(trajectory)
    }
}

fn apply(m: &[Complex64], x: &[Complex64], out: &mut [Complex64]) {
    let n = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        *o = m[r * n..(r + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// Sample instants `0, s, 2s, …` plus `duration` itself.
pub fn sample_times(duration: f64, sample_every: f64) -> Result<Vec<f64>> {
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(invalid(format!("duration must be non-negative, got {duration}")));
    }
    let mut times = vec![0.0];
    let count = (duration / sample_every * (1.0 + 1e-12)).floor() as usize;
    times.extend((1..=count).map(|k| k as f64 * sample_every));
    let last = *times.last().unwrap();
    if duration - last > 1e-9 * sample_every {
        times.push(duration);
    } else if let Some(t) = times.last_mut() {
        if count > 0 {
            *t = duration;
        }
    }
    Ok(times)
}

/// Prepare the Bloch eigenstate of `band` at `quasimomentum`.
pub fn init_bloch_state(quasimomentum: f64, band: usize, params: &SimulationParams) -> Result<StateVector> {
    Propagator::new(params)?.bloch_state(quasimomentum, band)
}

/// Evolve `state` with a fresh propagator for `params`.
pub fn evolve(
    state: &mut StateVector,
    force: f64,
    duration: f64,
    sample_every: f64,
    params: &SimulationParams,
) -> Result<Trajectory> {
    Propagator::new(params)?.evolve(state, force, duration, sample_every)
}

pub fn band_populations(state: &StateVector, params: &SimulationParams) -> Result<BandPopulations> {
    Propagator::new(params)?.band_populations(state)
}

/// Start in the lowest band at `q0` and sweep for `oscillations` Bloch
/// periods at the force in `params`, sampling once per period.
pub fn bloch_oscillations(
    params: &SimulationParams,
    q0: f64,
    oscillations: usize,
) -> Result<Trajectory> {
    if params.force == 0.0 {
        return Err(invalid("Bloch oscillations need a non-zero force"));
    }
    let prop = Propagator::new(params)?;
    let mut state = prop.bloch_state(q0, 0)?;
    let period = params.bloch_period();
    prop.evolve(&mut state, params.force, period * oscillations as f64, period)
}

/// Fraction transferred out of the lowest band by one Bloch oscillation
/// starting from the zone centre.
pub fn single_crossing_transfer(params: &SimulationParams) -> Result<f64> {
    let traj = bloch_oscillations(params, 0.0, 1)?;
    Ok(traj.particle_fraction().last().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lz::p_lz;
    use std::f64::consts::PI;

    fn params(mu: f64, f: f64) -> SimulationParams {
        SimulationParams::from_rest_mass(mu).unwrap().with_force(f).unwrap()
    }

    const F_3P7MS: f64 = 2.0 / (2.0 * PI * 2020.0 * 0.0037);

    #[test]
    fn sample_grid() {
        assert_eq!(sample_times(1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(sample_times(1.1, 0.5).unwrap(), vec![0.0, 0.5, 1.0, 1.1]);
        assert_eq!(sample_times(0.0, 0.5).unwrap(), vec![0.0]);
        let t = sample_times(2.0 / 0.07, 2.0 / 0.07 / 16.0).unwrap();
        assert_eq!(t.len(), 17);
        assert_eq!(*t.last().unwrap(), 2.0 / 0.07);
    }

    #[test]
    fn ground_state_preparation() {
        let p = SimulationParams::new(0.8).unwrap();
        let prop = Propagator::new(&p).unwrap();
        let s = prop.bloch_state(0.0, 0).unwrap();
        let pops = prop.band_populations(&s).unwrap();
        assert!((pops.bands[0] - 1.0).abs() < 1e-12);
        assert!(pops.bands[1..].iter().all(|&x| x < 1e-20));
        assert!((s.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn free_particle_is_a_plane_wave() {
        let p = SimulationParams::new(0.0).unwrap();
        let s = init_bloch_state(0.5, 0, &p).unwrap();
        for (i, a) in s.amplitudes.iter().enumerate() {
            let expect = if i == 10 { 1.0 } else { 0.0 };
            assert!((a.norm() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn energy_expectation_matches_band() {
        let p = SimulationParams::new(1.236).unwrap();
        let s = init_bloch_state(0.0, 0, &p).unwrap();
        let h = crate::band::build_hamiltonian(0.0, 1.236, 21).unwrap().to_dense();
        let mut e = Complex64::new(0.0, 0.0);
        for i in 0..21 {
            for j in 0..21 {
                e += s.amplitudes[i].conj() * h[i][j] * s.amplitudes[j];
            }
        }
        let bands = crate::band::solve_bands(&[0.0], 1.236, 21, 1).unwrap();
        assert!((e.re - bands.energies[0][0]).abs() < 1e-10);
    }

    #[test]
    fn degenerate_preparation_and_measurement_fail() {
        let p = SimulationParams::new(0.0).unwrap();
        assert!(matches!(init_bloch_state(1.0, 0, &p), Err(Error::Degenerate { .. })));
        let prop = Propagator::new(&p).unwrap();
        let mut s = prop.bloch_state(0.5, 0).unwrap();
        s.quasimomentum = 1.0;
        assert!(matches!(prop.band_populations(&s), Err(Error::Degenerate { .. })));
        assert!(init_bloch_state(0.0, 7, &p).is_err());
    }

    #[test]
    fn stationary_without_force() {
        let p = SimulationParams::new(0.8).unwrap();
        let prop = Propagator::new(&p).unwrap();
        for band in 0..3 {
            let mut s = prop.bloch_state(0.37, band).unwrap();
            let traj = prop.evolve(&mut s, 0.0, 10.0, 1.0).unwrap();
            for pops in &traj.populations {
                assert!((pops[band] - 1.0).abs() < 1e-8);
            }
            assert!((s.norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn heavy_mass_barely_transfers() {
        let f = F_3P7MS;
        let p = single_crossing_transfer(&params(0.309, f)).unwrap();
        let oracle = (-PI * 0.0477 / 0.0426f64).exp();
        assert!((oracle - 0.030).abs() < 1e-3);
        assert!((p - p_lz(0.309, f).unwrap()).abs() < 0.01, "{p}");
    }

    #[test]
    fn light_mass_transfers_almost_completely() {
        let p = single_crossing_transfer(&params(0.012, F_3P7MS)).unwrap();
        assert!((p - 0.995).abs() < 0.005, "{p}");
    }

    #[test]
    fn intermediate_mass_near_half() {
        let p = single_crossing_transfer(&params(0.134, 0.0426)).unwrap();
        let oracle = (-PI * 0.00898 / 0.0426f64).exp();
        assert!((oracle - 0.516).abs() < 1e-3);
        assert!((p - oracle).abs() < 0.01, "{p}");
    }

    #[test]
    fn little_leakage_above_first_excited_band() {
        // Start a quarter zone in so the run ends away from the band 1/2 touching at Q = 0.
        for mu in [0.05, 0.15, 0.325] {
            let traj = bloch_oscillations(&params(mu, 0.0426), -0.5, 1).unwrap();
            let last = traj.final_populations().unwrap();
            let upper: f64 = last.bands[2..].iter().sum::<f64>() + last.leakage;
            assert!(upper < 0.02, "mu={mu}: {upper}");
        }
    }

    #[test]
    fn trajectory_populations_sum_to_one() {
        let p = params(0.1, 0.05);
        let prop = Propagator::new(&p).unwrap();
        let mut s = prop.bloch_state(0.0, 0).unwrap();
        let traj = prop.evolve(&mut s, 0.05, 80.0, 2.5).unwrap();
        for (pops, leak) in traj.populations.iter().zip(&traj.leakage) {
            let total: f64 = pops.iter().sum::<f64>() + leak;
            assert!((total - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn massless_sweep_measures_off_the_touching() {
        let p = SimulationParams::new(0.0).unwrap().with_force(0.1).unwrap();
        let prop = Propagator::new(&p).unwrap();
        let mut s = prop.bloch_state(0.5, 0).unwrap();
        // Lands exactly on Q = 1, where the free bands touch.
        let traj = prop.evolve(&mut s, 0.1, 5.0, 5.0).unwrap();
        let last = traj.final_populations().unwrap();
        assert!((last.particle() - 1.0).abs() < 1e-9, "{:?}", last);
    }

    #[test]
    fn norm_over_ten_periods() {
        // The diabatic fraction gains 2ħk_L per period, so ten periods need
        // plane waves out to |k| ≈ 22.
        let p = params(0.2, 0.0464).with_basis(41, 5).unwrap();
        let prop = Propagator::new(&p).unwrap();
        let mut s = prop.bloch_state(0.0, 0).unwrap();
        let traj = prop.evolve(&mut s, p.force, 10.0 * p.bloch_period(), p.bloch_period()).unwrap();
        assert_eq!(traj.len(), 11);
        assert!((s.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn time_reversal() {
        let p = params(0.15, 0.05);
        let prop = Propagator::new(&p).unwrap();
        let start = prop.bloch_state(0.2, 0).unwrap();
        let mut s = start.clone();
        prop.advance(&mut s, 0.05, 57.3).unwrap();
        let mut s = s.time_reversed();
        prop.advance(&mut s, -0.05, 57.3).unwrap();
        let s = s.time_reversed();
        assert!((s.quasimomentum - start.quasimomentum).abs() < 1e-10);
        assert!(s.fidelity(&start) > 1.0 - 1e-6);
    }

    #[test]
    fn step_halving_converges() {
        let mut finals = Vec::new();
        for dt in [2e-3, 1e-3] {
            let p = params(0.134, 0.0426).with_dt_max(dt).unwrap();
            let traj = bloch_oscillations(&p, 0.0, 1).unwrap();
            finals.push(traj.final_populations().unwrap());
        }
        for (a, b) in finals[0].bands.iter().zip(&finals[1].bands) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params(0.1, 0.05);
        let prop = Propagator::new(&p).unwrap();
        let mut s = prop.bloch_state(0.0, 0).unwrap();
        assert!(prop.advance(&mut s, 0.05, -1.0).is_err());
        assert!(prop.evolve(&mut s, 0.05, 1.0, 0.0).is_err());
        let mut short = StateVector { quasimomentum: 0.0, amplitudes: vec![Complex64::new(1.0, 0.0)], time: 0.0 };
        assert!(prop.advance(&mut short, 0.05, 1.0).is_err());
    }
}
