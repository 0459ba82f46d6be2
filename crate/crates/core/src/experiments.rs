//! Experiment drivers behind the command-line interface.
//!
//! Each experiment turns an [`ExperimentConfig`] into one or more CSV
//! documents. Output is deterministic: rows follow input order, ensemble
//! reductions use a fixed summation order, and floats are printed in their
//! shortest round-trip form. Every file starts with `#` metadata lines that
//! name the units and the SHA-256 of the configuration.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::band::{solve_bands, zone_grid};
use crate::bandmap::{ensemble_distribution, fractional_populations};
use crate::error::{invalid, Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::lz::{self, LzPrediction};
use crate::propagator::{bloch_oscillations, Propagator};
use crate::sea::{evolve_ensemble, make_vacuum, production_rate, ProductionSeries, RateFit, DEFAULT_STATES};
use crate::units::{
    critical_force, to_recoil_units, Drive, PhysicalConstants, SimulationParams, LATTICE_WAVELENGTH,
    QUOTED_RECOIL_FREQUENCY,
};

/// t_F values (ms) of the five force series.
pub const SWEEP_TF_MS: [f64; 5] = [3.2, 3.4, 3.7, 4.4, 5.6];
/// f/f_c of the seven vacuum runs.
pub const VACUUM_FORCE_RATIOS: [f64; 7] = [2.3, 2.7, 3.3, 4.1, 5.5, 8.2, 16.5];
/// Rest masses of the three single-state panels.
pub const SINGLE_STATE_MASSES: [f64; 3] = [0.012, 0.134, 0.309];

const UNITS_LINE: &str =
    "units: recoil (energy E_L, momentum hbar*k_L, time hbar/E_L, force E_L*k_L)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    #[default]
    Bands,
    Single,
    Sweep,
    Collapse,
    Vacuum,
    Lz,
    Mapdist,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Bands => "bands",
            Experiment::Single => "single",
            Experiment::Sweep => "sweep",
            Experiment::Collapse => "collapse",
            Experiment::Vacuum => "vacuum",
            Experiment::Lz => "lz",
            Experiment::Mapdist => "mapdist",
        }
    }
}

/// Flat key-value experiment record. Unset keys fall back to defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub depth_el: Option<f64>,
    pub mass_el: Option<f64>,
    /// Dimensionless force f = F_e/(E_L k_L).
    pub force: Option<f64>,
    /// Single-Bloch-oscillation time t_F in ms.
    pub tf_ms: Option<f64>,
    /// E_L/h in Hz used for SI conversion.
    pub recoil_hz: Option<f64>,
    pub n_plane_waves: Option<usize>,
    pub n_bands: Option<usize>,
    pub dt_max: Option<f64>,
    /// Initial quasimomentum of a single state.
    pub q0: Option<f64>,
    pub bloch_oscillations: Option<usize>,
    pub samples_per_period: Option<usize>,
    pub masses: Option<Vec<f64>>,
    pub tf_ms_list: Option<Vec<f64>>,
    pub force_ratios: Option<Vec<f64>>,
    /// Dimensionless duration τ; defaults to one Bloch period.
    pub duration: Option<f64>,
    pub samples: Option<usize>,
    pub n_states: Option<usize>,
    pub q_points: Option<usize>,
    pub bins: Option<usize>,
    pub blur_sigma: Option<f64>,
    /// Reserved; every experiment is deterministic.
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self { experiment, ..Default::default() }
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn load(path: &Path) -> std::result::Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
    }

    /// Apply every key set in `other`. Setting the mass clears the depth (and
    /// vice versa); likewise for force and t_F.
    pub fn overlay(&mut self, other: &ExperimentConfig) {
        if other.depth_el.is_some() {
            self.mass_el = None;
        }
        if other.mass_el.is_some() {
            self.depth_el = None;
        }
        if other.force.is_some() {
            self.tf_ms = None;
        }
        if other.tf_ms.is_some() {
            self.force = None;
        }
        overlay!(self, other;
            depth_el, mass_el, force, tf_ms, recoil_hz, n_plane_waves, n_bands, dt_max, q0,
            bloch_oscillations, samples_per_period, masses, tf_ms_list, force_ratios, duration,
            samples, n_states, q_points, bins, blur_sigma, seed, out,
        );
    }

    /// SHA-256 of the configuration with the output path removed.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = None;
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn constants(&self) -> Result<PhysicalConstants> {
        PhysicalConstants::from_recoil_frequency(
            LATTICE_WAVELENGTH,
            self.recoil_hz.unwrap_or(QUOTED_RECOIL_FREQUENCY),
        )
    }

    /// Lattice depth; `default_mass` applies when neither depth nor mass is set.
    pub fn depth(&self, default_mass: f64) -> Result<f64> {
        match (self.depth_el, self.mass_el) {
            (Some(_), Some(_)) => Err(invalid("give either depth_el or mass_el, not both")),
            (Some(v), None) => Ok(v),
            (None, Some(m)) => Ok(4.0 * m),
            (None, None) => Ok(4.0 * default_mass),
        }
    }

    /// Dimensionless force; `default_tf_ms` applies when neither force nor t_F is set.
    pub fn resolve_force(&self, default_tf_ms: f64) -> Result<f64> {
        match (self.force, self.tf_ms) {
            (Some(_), Some(_)) => Err(invalid("give either force or tf_ms, not both")),
            (Some(f), None) => Ok(f),
            (None, tf) => self.force_from_tf(tf.unwrap_or(default_tf_ms)),
        }
    }

    pub fn force_from_tf(&self, tf_ms: f64) -> Result<f64> {
        let p = to_recoil_units(&self.constants()?, 0.0, Drive::SweepTime(tf_ms * 1e-3))?;
        Ok(p.force)
    }

    /// Simulation parameters for depth `depth` and force `force`.
    pub fn params(&self, depth: f64, force: f64) -> Result<SimulationParams> {
        let mut p = SimulationParams::new(depth)?.with_force(force)?;
        if self.n_plane_waves.is_some() || self.n_bands.is_some() {
            let (npw, nb) = (
                self.n_plane_waves.unwrap_or(p.n_plane_waves),
                self.n_bands.unwrap_or(p.n_bands),
            );
            p = p.with_basis(npw, nb)?;
        }
        if let Some(dt) = self.dt_max {
            p = p.with_dt_max(dt)?;
        }
        Ok(p)
    }
}

/// Failure of an experiment run.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Simulation(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("config error: {0}")]
    Config(String),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Simulation(e) => e.kind(),
            RunError::Io(_) => "io",
            RunError::Config(_) => "config",
        }
    }
}

/// One CSV document produced by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    /// Label inserted before the extension of the output path; empty for the
    /// primary file.
    pub label: String,
    pub contents: String,
}

/// Result of running an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<OutputFile>,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
}

impl RunOutput {
    /// Write every file next to `path`: the primary file at `path`, the rest
    /// at `<stem>.<label>.<ext>`.
    pub fn write(&self, path: &Path) -> std::result::Result<Vec<PathBuf>, RunError> {
        let mut written = Vec::new();
        for file in &self.files {
            let target = labelled_path(path, &file.label);
            std::fs::write(&target, &file.contents)
                .map_err(|e| RunError::Io(format!("{}: {e}", target.display())))?;
            written.push(target);
        }
        Ok(written)
    }
}

fn labelled_path(path: &Path, label: &str) -> PathBuf {
    if label.is_empty() {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{label}.{ext}"))
}

/// Minimal CSV builder with a `#` metadata header.
struct Csv {
    text: String,
}

impl Csv {
    fn new(experiment: Experiment, panel: &str, config: &ExperimentConfig) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# schwinger-sim {} {}", experiment.name(), panel);
        let _ = writeln!(text, "# {UNITS_LINE}");
        let _ = writeln!(text, "# config_sha256: {}", config.hash());
        Self { text }
    }

    fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.text, "# {key}: {value}");
        self
    }

    fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.text.push_str(&names.join(","));
        self.text.push('\n');
        self
    }

    fn row(&mut self, cells: &[String]) -> &mut Self {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
        self
    }

    fn finish(self, label: &str) -> OutputFile {
        OutputFile { label: label.to_string(), contents: self.text }
    }
}

/// Shortest round-trip form, switching to exponent notation outside
/// `[1e-4, 1e6)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One row of a mass sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub rest_mass: f64,
    pub force: f64,
    /// Transfer out of the lowest band after one Bloch oscillation.
    pub p_simulated: Option<f64>,
    pub p_lz: f64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn force_ratio(&self) -> f64 {
        self.force / critical_force(self.rest_mass)
    }

    pub fn residual(&self) -> Option<f64> {
        self.p_simulated.map(|p| p - self.p_lz)
    }
}

/// All rows of a sweep at one force.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub force: f64,
    pub rows: Vec<SweepRow>,
}

/// One Bloch oscillation from the zone centre per mass, at force `force`.
/// Numerical failures are recorded per row and the sweep continues.
pub fn run_sweep(base: &SimulationParams, masses: &[f64], force: f64) -> Result<Sweep> {
    if !(force > 0.0) {
        return Err(invalid(format!("sweep force must be positive, got {force}")));
    }
    if let Some(m) = masses.iter().find(|m| !(**m > 0.0)) {
        return Err(invalid(format!("sweep masses must be positive, got {m}")));
    }
    let rows = masses
        .par_iter()
        .map(|&mu| {
            let p_lz = lz::p_lz(mu, force)?;
            let simulated = SimulationParams { depth: 4.0 * mu, ..base.clone() }
                .with_force(force)
                .and_then(|p| single_transfer(&p));
            Ok(match simulated {
                Ok(p) => SweepRow { rest_mass: mu, force, p_simulated: Some(p), p_lz, error: None },
                Err(e) => SweepRow {
                    rest_mass: mu,
                    force,
                    p_simulated: None,
                    p_lz,
                    error: Some(e.to_string()),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { force, rows })
}

fn single_transfer(params: &SimulationParams) -> Result<f64> {
    let traj = bloch_oscillations(params, 0.0, 1)?;
    Ok(traj.particle_fraction().last().copied().unwrap_or(0.0))
}

/// Sweep points re-indexed by f/f_c.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseRow {
    pub force: f64,
    pub rest_mass: f64,
    pub force_ratio: f64,
    pub p_simulated: Option<f64>,
    pub p_lz: f64,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Collapse {
    /// Sorted by force ratio; ties keep sweep order.
    pub rows: Vec<CollapseRow>,
    pub max_abs_residual: f64,
}

impl Collapse {
    /// Largest spread of simulated P among points whose f/f_c agree to
    /// relative `tolerance`.
    pub fn max_spread(&self, tolerance: f64) -> f64 {
        let mut worst = 0.0f64;
        let mut start = 0;
        while start < self.rows.len() {
            let r0 = self.rows[start].force_ratio;
            let mut end = start;
            while end < self.rows.len() && (self.rows[end].force_ratio - r0).abs() <= tolerance * r0 {
                end += 1;
            }
            let ps: Vec<f64> = self.rows[start..end].iter().filter_map(|r| r.p_simulated).collect();
            if let (Some(lo), Some(hi)) = (
                ps.iter().copied().reduce(f64::min),
                ps.iter().copied().reduce(f64::max),
            ) {
                worst = worst.max(hi - lo);
            }
            start = end;
        }
        worst
    }
}

pub fn run_collapse(sweeps: &[Sweep]) -> Result<Collapse> {
    if sweeps.is_empty() {
        return Err(invalid("collapse needs at least one sweep"));
    }
    let mut rows: Vec<CollapseRow> = sweeps
        .iter()
        .flat_map(|s| &s.rows)
        .map(|r| CollapseRow {
            force: r.force,
            rest_mass: r.rest_mass,
            force_ratio: r.force_ratio(),
            p_simulated: r.p_simulated,
            p_lz: r.p_lz,
            residual: r.residual(),
        })
        .collect();
    rows.sort_by(|a, b| a.force_ratio.total_cmp(&b.force_ratio));
    let max_abs_residual = rows
        .iter()
        .filter_map(|r| r.residual)
        .fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(Collapse { rows, max_abs_residual })
}

/// Masses `sqrt(2f/r)` that place a sweep at force `force` on the given
/// force ratios `r`.
pub fn masses_for_ratios(force: f64, ratios: &[f64]) -> Vec<f64> {
    ratios.iter().map(|r| (2.0 * force / r).sqrt()).collect()
}

/// `n` log-spaced ratios from `lo` to `hi`.
pub fn log_ratios(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` evenly spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Rest mass at which the simulated single-crossing transfer is one half,
/// found by Illinois false position inside a bracket around the closed form.
pub fn simulated_half_max_mass(base: &SimulationParams, force: f64) -> Result<f64> {
    let guess = lz::half_max_mass(force)?;
    let transfer = |mu: f64| -> Result<f64> {
        let p = SimulationParams { depth: 4.0 * mu, ..base.clone() }.with_force(force)?;
        Ok(single_transfer(&p)? - 0.5)
    };
    let (mut a, mut b) = (0.7 * guess, 1.4 * guess);
    let (mut fa, mut fb) = (transfer(a)?, transfer(b)?);
    if fa.signum() == fb.signum() {
        return Err(Error::NumericalFailure(format!(
            "half-max mass not bracketed in [{a}, {b}] at force {force}"
        )));
    }
    let mut side = 0i8;
    for _ in 0..60 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = transfer(c)?;
        if fc.abs() < 1e-10 || (b - a).abs() < 1e-9 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Half-max masses for several forces and the linear fit of μ² against f.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfMaxScaling {
    pub forces: Vec<f64>,
    pub masses: Vec<f64>,
    pub fit: LineFit,
}

pub fn half_max_scaling(base: &SimulationParams, forces: &[f64]) -> Result<HalfMaxScaling> {
    let masses = forces
        .par_iter()
        .map(|&f| simulated_half_max_mass(base, f))
        .collect::<Result<Vec<_>>>()?;
    let squares: Vec<f64> = masses.iter().map(|m| m * m).collect();
    let fit = fit_line(forces, &squares)?;
    Ok(HalfMaxScaling { forces: forces.to_vec(), masses, fit })
}

/// Vacuum run at one force with its rate fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VacuumRun {
    pub series: ProductionSeries,
    pub rate: Option<RateFit>,
    pub prediction: LzPrediction,
}

/// Fill the lowest band with `n_states` members, drive for `duration`, and
/// fit the production rate when enough samples fall in the first period.
pub fn run_vacuum(params: &SimulationParams, n_states: usize, duration: f64, samples: usize) -> Result<VacuumRun> {
    let samples = samples.max(1);
    let mut ensemble = make_vacuum(n_states, params)?;
    let sample_every = if duration > 0.0 { duration / samples as f64 } else { 1.0 };
    let series = evolve_ensemble(&mut ensemble, params.force, duration, sample_every)?;
    let rate = match production_rate(&series) {
        Ok(r) => Some(r),
        Err(Error::InsufficientData { .. }) => None,
        Err(e) => return Err(e),
    };
    let prediction = LzPrediction::new(params.rest_mass(), params.force.abs())?;
    Ok(VacuumRun { series, rate, prediction })
}

/// Run the experiment named in `config`.
pub fn run(config: &ExperimentConfig) -> std::result::Result<RunOutput, RunError> {
    let out = match config.experiment {
        Experiment::Bands => bands(config)?,
        Experiment::Single => single(config)?,
        Experiment::Sweep => sweep(config)?,
        Experiment::Collapse => collapse(config)?,
        Experiment::Vacuum => vacuum(config)?,
        Experiment::Lz => lz_table(config)?,
        Experiment::Mapdist => mapdist(config)?,
    };
    Ok(out)
}

fn bands(config: &ExperimentConfig) -> Result<RunOutput> {
    let depth = config.depth(SINGLE_STATE_MASSES[2])?;
    let p = config.params(depth, 0.0)?;
    let grid = zone_grid(config.q_points.unwrap_or(201));
    let sol = solve_bands(&grid, p.depth, p.n_plane_waves, p.n_bands)?;
    let mut csv = Csv::new(Experiment::Bands, "band structure", config);
    csv.meta("depth", p.depth).meta("rest_mass", p.rest_mass());
    let mut cols = vec!["Q".to_string()];
    cols.extend((1..=p.n_bands).map(|n| format!("E_{n}")));
    csv.columns(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    for (q, e) in sol.quasimomenta.iter().zip(&sol.energies) {
        let mut row = vec![num(*q)];
        row.extend(e.iter().map(|x| num(*x)));
        csv.row(&row);
    }
    let edge_gap = {
        let s = crate::band::Lattice::from_params(&p)?.bloch_states(1.0, 2)?;
        s.energies[1] - s.energies[0]
    };
    Ok(RunOutput {
        files: vec![csv.finish("")],
        summary: vec![format!("zone-edge gap {edge_gap} (2*rest_mass = {})", 2.0 * p.rest_mass())],
    })
}

fn single(config: &ExperimentConfig) -> Result<RunOutput> {
    let depth = config.depth(SINGLE_STATE_MASSES[2])?;
    let force = config.resolve_force(3.7)?;
    if force == 0.0 {
        return Err(invalid("single needs a non-zero force"));
    }
    let p = config.params(depth, force)?;
    let periods = config.bloch_oscillations.unwrap_or(1);
    let per = config.samples_per_period.unwrap_or(64).max(1);
    let prop = Propagator::new(&p)?;
    let mut state = prop.bloch_state(config.q0.unwrap_or(0.0), 0)?;
    let period = p.bloch_period();
    let traj = prop.evolve(&mut state, force, period * periods as f64, period / per as f64)?;
    let prediction = LzPrediction::new(p.rest_mass(), force.abs())?;

    let mut csv = Csv::new(Experiment::Single, "trajectory", config);
    csv.meta("depth", p.depth)
        .meta("rest_mass", p.rest_mass())
        .meta("force", force)
        .meta("force_ratio", prediction.force_ratio)
        .meta("p_lz", prediction.p_lz);
    let mut cols = vec!["tau".to_string(), "Q".to_string()];
    cols.extend((1..=p.n_bands).map(|n| format!("P_{n}")));
    cols.push("leakage".into());
    cols.push("particle".into());
    csv.columns(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    let particle = traj.particle_fraction();
    for i in 0..traj.len() {
        let mut row = vec![num(traj.times[i]), num(traj.quasimomenta[i])];
        row.extend(traj.populations[i].iter().map(|x| num(*x)));
        row.push(num(traj.leakage[i]));
        row.push(num(particle[i]));
        csv.row(&row);
    }
    let last = particle.last().copied().unwrap_or(0.0);
    Ok(RunOutput {
        files: vec![csv.finish("")],
        summary: vec![format!(
            "particle fraction after {periods} Bloch oscillation(s): {last} (p_lz = {}, f/f_c = {})",
            prediction.p_lz, prediction.force_ratio
        )],
    })
}

fn sweep_forces(config: &ExperimentConfig) -> Result<Vec<(Option<f64>, f64)>> {
    match &config.tf_ms_list {
        Some(list) => list.iter().map(|&t| Ok((Some(t), config.force_from_tf(t)?))).collect(),
        None => {
            let f = config.resolve_force(3.7)?;
            Ok(vec![(config.tf_ms, f)])
        }
    }
}

fn sweep_table(config: &ExperimentConfig, sweeps: &[(Option<f64>, Sweep)]) -> OutputFile {
    let mut csv = Csv::new(Experiment::Sweep, "transfer vs rest mass", config);
    csv.columns(&["tf_ms", "force", "rest_mass", "rest_mass_sq", "force_ratio", "p_simulated", "p_lz", "residual", "error"]);
    for (tf, s) in sweeps {
        for r in &s.rows {
            csv.row(&[
                opt(*tf),
                num(r.force),
                num(r.rest_mass),
                num(r.rest_mass * r.rest_mass),
                num(r.force_ratio()),
                opt(r.p_simulated),
                num(r.p_lz),
                opt(r.residual()),
                r.error.clone().unwrap_or_default().replace(',', ";"),
            ]);
        }
    }
    csv.finish("")
}

fn sweep(config: &ExperimentConfig) -> Result<RunOutput> {
    let masses = config.masses.clone().unwrap_or_else(|| linspace(0.01, 0.35, 20));
    let forces = sweep_forces(config)?;
    let base = config.params(0.0, 0.0)?;
    let sweeps = forces
        .iter()
        .map(|&(tf, f)| Ok((tf, run_sweep(&base, &masses, f)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut files = vec![sweep_table(config, &sweeps)];
    let mut summary = Vec::new();
    for (tf, s) in &sweeps {
        let worst = s.rows.iter().filter_map(|r| r.residual()).fold(0.0f64, |m, x| m.max(x.abs()));
        let failed = s.rows.iter().filter(|r| r.error.is_some()).count();
        summary.push(format!(
            "force {} (t_F = {} ms): {} masses, max |P - P_LZ| = {worst}, {failed} failed",
            s.force,
            opt(*tf),
            s.rows.len()
        ));
    }
    if forces.len() >= 2 {
        let fs: Vec<f64> = forces.iter().map(|x| x.1).collect();
        let scaling = half_max_scaling(&base, &fs)?;
        let mut csv = Csv::new(Experiment::Sweep, "half-max rest mass vs force", config);
        csv.meta("fit_slope", scaling.fit.slope)
            .meta("fit_intercept", scaling.fit.intercept)
            .meta("lz_slope", 2.0 * std::f64::consts::LN_2 / PI);
        csv.columns(&["tf_ms", "force", "half_max_mass", "half_max_mass_sq", "lz_half_max_mass_sq"]);
        for ((tf, f), m) in forces.iter().zip(&scaling.masses) {
            let lz_m = lz::half_max_mass(*f)?;
            csv.row(&[opt(*tf), num(*f), num(*m), num(m * m), num(lz_m * lz_m)]);
        }
        files.push(csv.finish("halfmax"));
        summary.push(format!(
            "half-max mass^2 = {} * f + {}",
            scaling.fit.slope, scaling.fit.intercept
        ));
    }
    Ok(RunOutput { files, summary })
}

fn collapse(config: &ExperimentConfig) -> Result<RunOutput> {
    let tf_list = config.tf_ms_list.clone().unwrap_or_else(|| SWEEP_TF_MS.to_vec());
    let ratios = config.force_ratios.clone().unwrap_or_else(|| log_ratios(0.2, 20.0, 21));
    let base = config.params(0.0, 0.0)?;
    let sweeps = tf_list
        .iter()
        .map(|&t| {
            let f = config.force_from_tf(t)?;
            let masses = match &config.masses {
                Some(m) => m.clone(),
                None => masses_for_ratios(f, &ratios),
            };
            run_sweep(&base, &masses, f)
        })
        .collect::<Result<Vec<_>>>()?;
    let result = run_collapse(&sweeps)?;
    let mut csv = Csv::new(Experiment::Collapse, "transfer vs force ratio", config);
    csv.meta("max_abs_residual", result.max_abs_residual)
        .meta("max_spread_equal_ratio", result.max_spread(1e-9));
    csv.columns(&["force_ratio", "force", "rest_mass", "p_simulated", "p_lz", "residual"]);
    for r in &result.rows {
        csv.row(&[
            num(r.force_ratio),
            num(r.force),
            num(r.rest_mass),
            opt(r.p_simulated),
            num(r.p_lz),
            opt(r.residual),
        ]);
    }
    Ok(RunOutput {
        files: vec![csv.finish("")],
        summary: vec![format!(
            "{} points, max |P - exp(-pi f_c/f)| = {}, max spread at equal f/f_c = {}",
            result.rows.len(),
            result.max_abs_residual,
            result.max_spread(1e-9)
        )],
    })
}

fn vacuum(config: &ExperimentConfig) -> Result<RunOutput> {
    let depth = config.depth(0.2)?;
    let mu = depth / 4.0;
    let forces: Vec<(Option<f64>, f64)> = match &config.force_ratios {
        Some(ratios) => ratios.iter().map(|&r| (Some(r), r * critical_force(mu))).collect(),
        None => vec![(None, config.resolve_force(3.4)?)],
    };
    let n_states = config.n_states.unwrap_or(DEFAULT_STATES);
    let samples = config.samples.unwrap_or(16);

    let mut series_csv = Csv::new(Experiment::Vacuum, "particle fraction vs time", config);
    series_csv.meta("depth", depth).meta("rest_mass", mu).meta("n_states", n_states);
    series_csv.columns(&["force", "force_ratio", "tau", "particle", "antiparticle", "leakage", "lz_prediction"]);
    let mut fit_csv = Csv::new(Experiment::Vacuum, "production rate fit", config);
    fit_csv.columns(&[
        "force", "force_ratio", "duration", "slope", "slope_error", "intercept", "r_squared", "lz_rate",
        "slope_over_lz", "extrapolated",
    ]);
    let mut summary = Vec::new();
    for (_, f) in forces {
        let p = config.params(depth, f)?;
        let duration = config.duration.unwrap_or(p.bloch_period());
        let run = run_vacuum(&p, n_states, duration, samples)?;
        let s = &run.series;
        for i in 0..s.times.len() {
            let predicted = lz::vacuum_fraction(mu, f, s.times[i])?.fraction;
            series_csv.row(&[
                num(f),
                num(run.prediction.force_ratio),
                num(s.times[i]),
                num(s.particle_fraction[i]),
                num(s.antiparticle_fraction[i]),
                num(s.leakage[i]),
                num(predicted),
            ]);
        }
        let lz_rate = lz::vacuum_rate(mu, f)?;
        match &run.rate {
            Some(r) => {
                fit_csv.row(&[
                    num(f),
                    num(run.prediction.force_ratio),
                    num(duration),
                    num(r.fit.slope),
                    num(r.fit.slope_error),
                    num(r.fit.intercept),
                    num(r.fit.r_squared),
                    num(lz_rate),
                    num(r.fit.slope / lz_rate),
                    s.extrapolated.to_string(),
                ]);
                summary.push(format!(
                    "f/f_c = {:.3}: rate {} +- {} (LZ {lz_rate}, ratio {:.4}, R^2 {:.5})",
                    run.prediction.force_ratio,
                    r.fit.slope,
                    r.fit.slope_error,
                    r.fit.slope / lz_rate,
                    r.fit.r_squared
                ));
            }
            None => {
                fit_csv.row(&[
                    num(f),
                    num(run.prediction.force_ratio),
                    num(duration),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    num(lz_rate),
                    String::new(),
                    s.extrapolated.to_string(),
                ]);
                summary.push(format!(
                    "f/f_c = {:.3}: too few samples in the first Bloch period for a rate fit; final fraction {}",
                    run.prediction.force_ratio,
                    s.particle_fraction.last().copied().unwrap_or(0.0)
                ));
            }
        }
    }
    Ok(RunOutput { files: vec![series_csv.finish(""), fit_csv.finish("fit")], summary })
}

fn lz_table(config: &ExperimentConfig) -> Result<RunOutput> {
    let mu = config.depth(0.2)? / 4.0;
    let f = config.resolve_force(3.4)?;
    let lz = LzPrediction::new(mu, f)?;
    let mut csv = Csv::new(Experiment::Lz, "closed-form prediction", config);
    csv.columns(&["rest_mass", "force", "gamma", "p_lz", "force_ratio", "critical_force", "half_max_mass", "bloch_period"]);
    csv.row(&[
        num(mu),
        num(f),
        num(lz.gamma),
        num(lz.p_lz),
        num(lz.force_ratio),
        num(critical_force(mu)),
        num(lz::half_max_mass(f)?),
        num(2.0 / f),
    ]);
    Ok(RunOutput {
        files: vec![csv.finish("")],
        summary: vec![format!("Gamma = {}, P_LZ = {}, f/f_c = {}", lz.gamma, lz.p_lz, lz.force_ratio)],
    })
}

fn mapdist(config: &ExperimentConfig) -> Result<RunOutput> {
    let depth = config.depth(0.2)?;
    let f = config.resolve_force(3.4)?;
    let p = config.params(depth, f)?;
    let duration = config.duration.unwrap_or(p.bloch_period());
    let bins = config.bins.unwrap_or(200);
    let blur = config.blur_sigma.unwrap_or(0.0);
    let mut ensemble = make_vacuum(config.n_states.unwrap_or(DEFAULT_STATES), &p)?;
    let step = if duration > 0.0 { duration } else { 1.0 };
    evolve_ensemble(&mut ensemble, f, duration, step)?;
    let dist = ensemble_distribution(&ensemble.occupations(f)?, p.n_bands, bins, blur)?;
    let mut csv = Csv::new(Experiment::Mapdist, "band-mapped momentum distribution", config);
    csv.meta("depth", depth).meta("force", f).meta("duration", duration).meta("blur_sigma", blur);
    let mut summary = Vec::new();
    match fractional_populations(&dist) {
        Ok((anti, particle)) => {
            csv.meta("antiparticle_fraction", anti).meta("particle_fraction", particle);
            summary.push(format!("antiparticle {anti}, particle {particle}"));
        }
        Err(e) => summary.push(format!("no |k| = 1 partition: {e}")),
    }
    csv.columns(&["k", "density"]);
    for (c, d) in dist.centers().iter().zip(&dist.densities) {
        csv.row(&[num(*c), num(*d)]);
    }
    Ok(RunOutput { files: vec![csv.finish("")], summary })
}
