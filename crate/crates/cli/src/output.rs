use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use jcpm_core::config::Config;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Cli;

/// One CSV file: `<out>/<name>.csv`.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Stats {
    pub points: usize,
    pub ok: usize,
    pub errors: usize,
    pub ncut_min: Option<usize>,
    pub ncut_max: Option<usize>,
}

impl Stats {
    pub fn record(&mut self, ncut: Option<usize>, ok: bool) {
        self.points += 1;
        if ok {
            self.ok += 1;
        } else {
            self.errors += 1;
        }
        if let Some(n) = ncut {
            self.ncut_min = Some(self.ncut_min.map_or(n, |m| m.min(n)));
            self.ncut_max = Some(self.ncut_max.map_or(n, |m| m.max(n)));
        }
    }
}

#[derive(Debug, Default)]
pub struct Run {
    pub tables: Vec<Table>,
    pub stats: Stats,
    /// Set when the experiment itself reports a failed check.
    pub failure: Option<String>,
}

/// Fixed-width-free numeric formatting that round-trips: plain decimals in
/// the usual range, scientific notation outside it.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn config_hash(config: &Config) -> String {
    let digest = Sha256::digest(config.canonical_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_table(
    dir: &Path,
    experiment: &str,
    hash: &str,
    table: &Table,
) -> std::io::Result<PathBuf> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut file = BufWriter::new(File::create(&path)?);
    writeln!(
        file,
        "# jcpm {} experiment={experiment}",
        env!("CARGO_PKG_VERSION")
    )?;
    writeln!(file, "# config_sha256={hash}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        debug_assert_eq!(row.len(), table.columns.len());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(path)
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: String,
    config_path: &'a str,
    config_sha256: String,
    config_toml: String,
    seed: u64,
    workers: usize,
    flags: Flags,
    outputs: Vec<String>,
    convergence: &'a Stats,
    passed: bool,
    wall_time_s: f64,
    timestamp_unix_s: u64,
}

#[derive(Serialize)]
struct Flags {
    points: usize,
    start: Option<f64>,
    stop: Option<f64>,
    q_g1_e: Option<f64>,
    q_g2_e: Option<f64>,
    phi_x_phi0: Option<f64>,
    n_photons: f64,
    kappa_mhz: f64,
    eta: f64,
    delta_q_e: f64,
    theta_rad: f64,
    sigma: f64,
    n: usize,
}

pub fn write_run(
    cli: &Cli,
    config: &Config,
    run: &Run,
    workers: usize,
    wall: f64,
) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(&cli.out)?;
    let experiment = cli.experiment.name();
    let hash = config_hash(config);
    let mut files = Vec::new();
    for t in &run.tables {
        files.push(write_table(&cli.out, &experiment, &hash, t)?);
    }
    let manifest = Manifest {
        tool: "jcpm",
        version: env!("CARGO_PKG_VERSION"),
        experiment,
        config_path: &cli.config,
        config_sha256: hash,
        config_toml: config.canonical_toml(),
        seed: cli.seed,
        workers,
        flags: Flags {
            points: cli.points,
            start: cli.start,
            stop: cli.stop,
            q_g1_e: cli.q_g1,
            q_g2_e: cli.q_g2,
            phi_x_phi0: cli.phi_x,
            n_photons: cli.n_photons,
            kappa_mhz: cli.kappa_mhz,
            eta: cli.eta,
            delta_q_e: cli.delta_q,
            theta_rad: cli.theta,
            sigma: cli.sigma,
            n: cli.n,
        },
        outputs: files
            .iter()
            .map(|p| {
                p.file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned()
            })
            .collect(),
        convergence: &run.stats,
        passed: run.failure.is_none(),
        wall_time_s: wall,
        timestamp_unix_s: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let path = cli.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    fs::write(&path, text + "\n")?;
    files.push(path);
    Ok(files)
}
