use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use schwinger_sim::experiments::{run, Experiment, ExperimentConfig, RunError};

/// Schwinger pair production in a tilted optical lattice, simulated in
/// recoil units.
#[derive(Parser)]
#[command(name = "schwinger-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Band structure over the Brillouin zone.
    Bands(Flags),
    /// One lowest-band state driven through Bloch oscillations.
    Single(Flags),
    /// Single-crossing transfer against rest mass.
    Sweep(Flags),
    /// Transfer from several sweeps against f/f_c.
    Collapse(Flags),
    /// Filled lowest band: particle fraction against time and rate fit.
    Vacuum(Flags),
    /// Closed-form Landau-Zener quantities.
    Lz(Flags),
    /// Band-mapped momentum distribution of a driven vacuum.
    Mapdist(Flags),
}

#[derive(Args, Default)]
#[command(allow_negative_numbers = true)]
struct Flags {
    /// TOML experiment file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lattice depth in E_L.
    #[arg(long)]
    depth_el: Option<f64>,
    /// Rest mass in E_L (depth / 4).
    #[arg(long)]
    mass_el: Option<f64>,
    /// Dimensionless force in E_L k_L.
    #[arg(long)]
    force: Option<f64>,
    /// Time for one Bloch oscillation in ms.
    #[arg(long)]
    tf_ms: Option<f64>,
    /// Recoil frequency E_L/h in Hz.
    #[arg(long)]
    recoil_hz: Option<f64>,
    #[arg(long)]
    n_plane_waves: Option<usize>,
    #[arg(long)]
    n_bands: Option<usize>,
    #[arg(long)]
    dt_max: Option<f64>,
    /// Initial quasimomentum (single).
    #[arg(long)]
    q0: Option<f64>,
    /// Number of Bloch oscillations (single).
    #[arg(long)]
    bloch_oscillations: Option<usize>,
    #[arg(long)]
    samples_per_period: Option<usize>,
    /// Comma-separated rest masses.
    #[arg(long, value_delimiter = ',')]
    masses: Option<Vec<f64>>,
    /// Comma-separated t_F values in ms.
    #[arg(long, value_delimiter = ',')]
    tf_ms_list: Option<Vec<f64>>,
    /// Comma-separated f/f_c values.
    #[arg(long, value_delimiter = ',')]
    force_ratios: Option<Vec<f64>>,
    /// Evolution time in hbar/E_L.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Ensemble size.
    #[arg(long)]
    n_states: Option<usize>,
    #[arg(long)]
    q_points: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    /// Gaussian blur of the band-mapped distribution, in hbar k_L.
    #[arg(long)]
    blur_sigma: Option<f64>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn into_config(self, experiment: Experiment) -> Result<ExperimentConfig, RunError> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::new(experiment),
        };
        if config.experiment != experiment {
            return Err(RunError::Config(format!(
                "config describes '{}' but the '{}' command was given",
                config.experiment.name(),
                experiment.name()
            )));
        }
        config.overlay(&ExperimentConfig {
            experiment,
            depth_el: self.depth_el,
            mass_el: self.mass_el,
            force: self.force,
            tf_ms: self.tf_ms,
            recoil_hz: self.recoil_hz,
            n_plane_waves: self.n_plane_waves,
            n_bands: self.n_bands,
            dt_max: self.dt_max,
            q0: self.q0,
            bloch_oscillations: self.bloch_oscillations,
            samples_per_period: self.samples_per_period,
            masses: self.masses,
            tf_ms_list: self.tf_ms_list,
            force_ratios: self.force_ratios,
            duration: self.duration,
            samples: self.samples,
            n_states: self.n_states,
            q_points: self.q_points,
            bins: self.bins,
            blur_sigma: self.blur_sigma,
            seed: None,
            out: self.out,
        });
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let (experiment, flags) = match cli.command {
        Command::Bands(f) => (Experiment::Bands, f),
        Command::Single(f) => (Experiment::Single, f),
        Command::Sweep(f) => (Experiment::Sweep, f),
        Command::Collapse(f) => (Experiment::Collapse, f),
        Command::Vacuum(f) => (Experiment::Vacuum, f),
        Command::Lz(f) => (Experiment::Lz, f),
        Command::Mapdist(f) => (Experiment::Mapdist, f),
    };
    let config = flags.into_config(experiment)?;
    let output = run(&config)?;
    match &config.out {
        Some(path) => {
            for written in output.write(path)? {
                println!("wrote {}", written.display());
            }
            for line in &output.summary {
                println!("{line}");
            }
        }
        None => {
            for file in &output.files {
                print!("{}", file.contents);
            }
            for line in &output.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{line}");
            ExitCode::from(2)
        }
    }
}
