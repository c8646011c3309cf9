//! Monte Carlo fabrication yield under Gaussian junction disorder.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{BiasPoint, DeviceParams, JunctionSet};
use crate::error::{JcpmError, Result};
use crate::resonator::{solve_load, LoadOptions};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldCriteria {
    /// GHz.
    pub min_omega_q: f64,
    /// Required `|ΔL_eff| / L_eff` between the two parity states.
    pub min_rel_inductance_modulation: f64,
}

impl Default for YieldCriteria {
    fn default() -> Self {
        Self {
            min_omega_q: 2.0,
            min_rel_inductance_modulation: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub sigma_rel: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub criteria: YieldCriteria,
}

impl Default for DisorderSpec {
    fn default() -> Self {
        Self {
            sigma_rel: 0.05,
            n_samples: 1000,
            seed: 42,
            criteria: YieldCriteria::default(),
        }
    }
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.sigma_rel) {
            return Err(JcpmError::InvalidParameter {
                name: "sigma_rel",
                reason: format!("must lie in [0, 0.5), got {}", self.sigma_rel),
            });
        }
        if self.n_samples == 0 {
            return Err(JcpmError::InvalidParameter {
                name: "n_samples",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Sample `index` of the ensemble. Each sample owns ChaCha stream `index`
/// under `seed`, so the draw does not depend on evaluation order.
pub fn sample_device(base: &DeviceParams, spec: &DisorderSpec, index: u64) -> DeviceParams {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index);
    let mut factor = || loop {
        let z: f64 = StandardNormal.sample(&mut rng);
        let f = 1.0 + spec.sigma_rel * z;
        if f > 0.0 {
            return f;
        }
    };
    let j = base.junctions;
    let junctions = JunctionSet {
        ej1: j.ej1 * factor(),
        ej2: j.ej2 * factor(),
        ej_alpha: j.ej_alpha * factor(),
        c1: j.c1 * factor(),
        c2: j.c2 * factor(),
        c_alpha: j.c_alpha * factor(),
    };
    DeviceParams { junctions, ..*base }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: u64,
    pub junctions: JunctionSet,
    /// Smaller of the two parity-state splittings (GHz).
    pub omega_q: f64,
    /// `ω_r(q_G1 = 0) − ω_r(q_G1 = e)` at `q_G2 = e` (GHz).
    pub contrast: f64,
    pub modulation: f64,
    pub pass_omega_q: bool,
    pub pass_modulation: bool,
    pub passed: bool,
    pub error: Option<String>,
}

/// Splitting and inductance modulation at the two parity states
/// `q_G1 ∈ {0, e}`, `q_G2 = e`, `Φx = Φ0`.
pub fn evaluate_device(sampled: &DeviceParams, criteria: &YieldCriteria) -> SampleRecord {
    evaluate_indexed(sampled, criteria, 0)
}

fn evaluate_indexed(sampled: &DeviceParams, criteria: &YieldCriteria, index: u64) -> SampleRecord {
    let mut rec = SampleRecord {
        index,
        junctions: sampled.junctions,
        omega_q: f64::NAN,
        contrast: f64::NAN,
        modulation: f64::NAN,
        pass_omega_q: false,
        pass_modulation: false,
        passed: false,
        error: None,
    };
    let opts = LoadOptions::default();
    let run = || -> Result<_> {
        let even = solve_load(sampled, &BiasPoint::operating(0.0, 1.0), &opts)?;
        let odd = solve_load(sampled, &BiasPoint::operating(1.0, 1.0), &opts)?;
        Ok((even, odd))
    };
    match run() {
        Ok((even, odd)) => {
            rec.omega_q = even.omega_q().min(odd.omega_q());
            rec.contrast = even.load.omega_r - odd.load.omega_r;
            rec.modulation = (even.load.l_eff - odd.load.l_eff).abs() / even.load.l_eff;
            rec.pass_omega_q = rec.omega_q > criteria.min_omega_q;
            rec.pass_modulation = rec.modulation > criteria.min_rel_inductance_modulation;
            rec.passed = rec.pass_omega_q && rec.pass_modulation;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct YieldReport {
    pub sigma_rel: f64,
    pub seed: u64,
    pub n_samples: usize,
    pub n_pass: usize,
    pub n_fail: usize,
    pub n_error: usize,
    pub yield_fraction: f64,
    pub wilson_95: (f64, f64),
    pub records: Vec<SampleRecord>,
}

pub fn yield_estimate(base: &DeviceParams, spec: &DisorderSpec) -> Result<YieldReport> {
    spec.validate()?;
    base.validate()?;
    let records: Vec<SampleRecord> = (0..spec.n_samples as u64)
        .into_par_iter()
        .map(|i| evaluate_indexed(&sample_device(base, spec, i), &spec.criteria, i))
        .collect();
    let n_error = records.iter().filter(|r| r.error.is_some()).count();
    let n_pass = records.iter().filter(|r| r.passed).count();
    let n_fail = spec.n_samples - n_pass - n_error;
    Ok(YieldReport {
        sigma_rel: spec.sigma_rel,
        seed: spec.seed,
        n_samples: spec.n_samples,
        n_pass,
        n_fail,
        n_error,
        yield_fraction: n_pass as f64 / spec.n_samples as f64,
        wilson_95: wilson_interval(n_pass, spec.n_samples, Z_95),
        records,
    })
}
