//! `jcpm`: runs one named experiment and writes its CSV files plus a
//! `manifest.json` into the output directory.

mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use jcpm_core::config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// ω_r over the gate-charge sweep.
    SweepCharge,
    /// ω_r over the flux sweep.
    SweepFlux,
    /// Lowest qubit levels over the charge sweep.
    QubitSpectrum,
    /// SC and CC elements between the two lowest states.
    MatrixElements,
    /// Dispersive ratio g/Δ over the charge sweep.
    GOverDelta,
    /// Kerr coefficient over the charge sweep.
    Kerr,
    /// Noise quality factor over the charge and flux sweeps.
    QualityFactor,
    /// Parity contrast over noise deviation at the operating points.
    Snr,
    /// Charge sensitivity over the charge sweep.
    Sensitivity,
    /// Detection bandwidth against photon number.
    Bandwidth,
    /// Conditional-phase gate time and fidelity.
    Gate,
    /// Josephson potential map and its minima.
    PotentialGrid,
    /// Monte Carlo fabrication yield.
    Yield,
    /// Line frequency, charging energy and sweet-spot self-tests.
    ConsistencyCheck,
    /// Print the default configuration file.
    DefaultConfig,
}

impl Experiment {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QualityAxis {
    Charge,
    Flux,
    Both,
}

#[derive(Debug, Parser)]
#[command(
    name = "jcpm",
    version,
    about = "Charge-parity readout of a flux-qubit-terminated resonator"
)]
pub struct Cli {
    pub experiment: Experiment,

    /// TOML config file, or `default` for the built-in device.
    #[arg(long, default_value = "default")]
    pub config: String,

    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads; defaults to the machine parallelism.
    #[arg(long)]
    pub workers: Option<usize>,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Points per swept axis (grid side for potential-grid).
    #[arg(long, default_value_t = 201)]
    pub points: usize,

    /// Sweep start, in e for charge axes and Φ0 for flux axes.
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub stop: Option<f64>,

    /// Fixed q_G1 in units of e.
    #[arg(long, allow_negative_numbers = true)]
    pub q_g1: Option<f64>,

    /// Fixed q_G2 in units of e.
    #[arg(long, allow_negative_numbers = true)]
    pub q_g2: Option<f64>,

    /// Fixed Φx in units of Φ0.
    #[arg(long, allow_negative_numbers = true)]
    pub phi_x: Option<f64>,

    #[arg(long, value_enum, default_value_t = QualityAxis::Both)]
    pub axis: QualityAxis,

    #[arg(long, default_value_t = 10.0)]
    pub n_photons: f64,

    /// κ/2π in MHz.
    #[arg(long, default_value_t = 10.0)]
    pub kappa_mhz: f64,

    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,

    /// Charge resolution for the bandwidth, in e.
    #[arg(long, default_value_t = 1e-6)]
    pub delta_q: f64,

    /// Gate phase in radians.
    #[arg(long, default_value_t = std::f64::consts::PI / 8.0)]
    pub theta: f64,

    /// Relative junction spread for the yield run.
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,

    /// Number of yield samples.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

fn load_config(arg: &str) -> Result<Config, String> {
    if arg == "default" {
        Ok(Config::default())
    } else {
        Config::load(arg).map_err(|e| e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.experiment == Experiment::DefaultConfig {
        print!("{}", Config::default_preset_toml());
        return ExitCode::SUCCESS;
    }
    let config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("jcpm: {e}");
            return ExitCode::from(2);
        }
    };
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("jcpm: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };

    let started = Instant::now();
    let run = match pool.install(|| experiments::run(&cli, &config)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("jcpm: {e}");
            return ExitCode::from(2);
        }
    };
    let wall = started.elapsed().as_secs_f64();

    match output::write_run(&cli, &config, &run, workers, wall) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("jcpm: cannot write output: {e}");
            return ExitCode::from(2);
        }
    }
    if let Some(msg) = &run.failure {
        eprintln!("jcpm: {msg}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
