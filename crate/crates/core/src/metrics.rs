//! Figures of merit built on `ω_r(bias)`: noise quality factor, SNR, gate
//! timing and fidelity, charge sensitivity and detection bandwidth.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{BiasPoint, DeviceParams, GHZ};
use crate::derivatives::{omega_r_derivatives, omega_r_slope, OmegaDerivatives};
use crate::error::{ensure_non_negative, ensure_positive, JcpmError, Result};

/// Returned by [`quality_factor`] and [`snr`] when the noise deviation vanishes.
pub const QUALITY_CAP: f64 = 1e12;

/// Noise amplitudes; charges in `e`, flux in `Φ0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub delta_q1: f64,
    pub delta_q2: f64,
    pub delta_phi: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            delta_q1: 1e-2,
            delta_q2: 1e-2,
            delta_phi: 1e-4,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            delta_q1: 0.0,
            delta_q2: 0.0,
            delta_phi: 0.0,
        }
    }

    pub fn amplitudes(&self) -> [f64; 3] {
        [self.delta_q1, self.delta_q2, self.delta_phi]
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("noise.delta_q1", self.delta_q1)?;
        ensure_non_negative("noise.delta_q2", self.delta_q2)?;
        ensure_non_negative("noise.delta_phi", self.delta_phi)
    }
}

/// Homodyne readout settings. `kappa_mhz` is `κ/2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutParams {
    pub kappa_mhz: f64,
    pub n_photons: f64,
    pub eta: f64,
}

impl Default for ReadoutParams {
    fn default() -> Self {
        Self {
            kappa_mhz: 10.0,
            n_photons: 10.0,
            eta: 1.0,
        }
    }
}

impl ReadoutParams {
    /// Photon decay rate in rad/s.
    pub fn kappa(&self) -> f64 {
        2.0 * PI * self.kappa_mhz * 1e6
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("readout.kappa_mhz", self.kappa_mhz)?;
        ensure_positive("readout.n_photons", self.n_photons)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(JcpmError::InvalidParameter {
                name: "readout.eta",
                reason: format!("must lie in (0, 1], got {}", self.eta),
            });
        }
        Ok(())
    }
}

/// First- plus second-order deviation of `ω_r` (GHz) under the noise model,
/// with term-wise magnitudes and each unordered pair counted once.
pub fn noise_deviation(d: &OmegaDerivatives, noise: &NoiseModel) -> f64 {
    let delta = noise.amplitudes();
    let mut dev = 0.0;
    for i in 0..3 {
        dev += d.gradient[i].abs() * delta[i];
        for j in i..3 {
            dev += d.hessian[i][j].abs() * delta[i] * delta[j];
        }
    }
    dev
}

pub fn quality_factor_from(d: &OmegaDerivatives, noise: &NoiseModel) -> f64 {
    let dev = noise_deviation(d, noise);
    if dev <= 0.0 {
        return QUALITY_CAP;
    }
    (d.omega_r / dev).min(QUALITY_CAP)
}

pub fn quality_factor(params: &DeviceParams, bias: &BiasPoint, noise: &NoiseModel) -> Result<f64> {
    noise.validate()?;
    Ok(quality_factor_from(
        &omega_r_derivatives(params, bias)?,
        noise,
    ))
}

/// The four charge-parity working points `q_G1, q_G2 ∈ {0, e}` at `Φx = Φ0`.
pub fn operating_points() -> [BiasPoint; 4] {
    [
        BiasPoint::operating(0.0, 0.0),
        BiasPoint::operating(1.0, 0.0),
        BiasPoint::operating(0.0, 1.0),
        BiasPoint::operating(1.0, 1.0),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct SnrReport {
    /// `|ω_r(0, e) − ω_r(e, e)|` (GHz).
    pub contrast: f64,
    /// Largest noise deviation over the working points (GHz).
    pub max_deviation: f64,
    pub snr: f64,
    pub derivatives: Vec<OmegaDerivatives>,
}

/// Derivative caches at the four [`operating_points`].
pub fn operating_derivatives(params: &DeviceParams) -> Result<Vec<OmegaDerivatives>> {
    operating_points()
        .iter()
        .map(|b| omega_r_derivatives(params, b))
        .collect()
}

pub fn snr_from(derivatives: Vec<OmegaDerivatives>, noise: &NoiseModel) -> SnrReport {
    let find = |q1: f64, q2: f64| {
        derivatives
            .iter()
            .find(|d| d.bias_lab[0] == q1 && d.bias_lab[1] == q2)
            .map(|d| d.omega_r)
            .unwrap_or(f64::NAN)
    };
    let contrast = (find(0.0, 1.0) - find(1.0, 1.0)).abs();
    let max_deviation = derivatives
        .iter()
        .map(|d| noise_deviation(d, noise))
        .fold(0.0, f64::max);
    let snr = if !(contrast > 0.0) {
        0.0
    } else if max_deviation <= 0.0 {
        QUALITY_CAP
    } else {
        (contrast / max_deviation).min(QUALITY_CAP)
    };
    SnrReport {
        contrast,
        max_deviation,
        snr,
        derivatives,
    }
}

pub fn snr(params: &DeviceParams, noise: &NoiseModel) -> Result<SnrReport> {
    noise.validate()?;
    Ok(snr_from(operating_derivatives(params)?, noise))
}

/// Time for a conditional phase `θ` accumulated at a frequency contrast given
/// in GHz, in seconds.
pub fn gate_time(theta: f64, contrast_ghz: f64) -> Result<f64> {
    ensure_positive("contrast", contrast_ghz)?;
    Ok(theta / (2.0 * PI * contrast_ghz * GHZ))
}

/// `F = 1 − δθ²/4` with `δθ = ω_r t / Q`, floored at zero.
pub fn gate_fidelity(t_gate: f64, omega_r_ghz: f64, q: f64) -> Result<f64> {
    ensure_positive("Q", q)?;
    let dtheta = phase_error(t_gate, omega_r_ghz, q);
    Ok((1.0 - dtheta * dtheta / 4.0).max(0.0))
}

/// `δθ = ω_r t / Q` with `ω_r` in angular units.
pub fn phase_error(t_gate: f64, omega_r_ghz: f64, q: f64) -> f64 {
    2.0 * PI * omega_r_ghz * GHZ * t_gate / q
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateReport {
    pub theta: f64,
    pub contrast_ghz: f64,
    pub t_gate: f64,
    pub omega_r_ghz: f64,
    pub q: f64,
    pub delta_theta: f64,
    pub fidelity: f64,
}

pub fn gate_report(theta: f64, contrast_ghz: f64, omega_r_ghz: f64, q: f64) -> Result<GateReport> {
    let t_gate = gate_time(theta, contrast_ghz)?;
    Ok(GateReport {
        theta,
        contrast_ghz,
        t_gate,
        omega_r_ghz,
        q,
        delta_theta: phase_error(t_gate, omega_r_ghz, q),
        fidelity: gate_fidelity(t_gate, omega_r_ghz, q)?,
    })
}

/// `S_q = √(κ/n) / |∂ω_r/∂q| / √η` in `e/√Hz`, slope given in GHz per `e`.
/// Infinite at a sweet spot.
pub fn charge_sensitivity(slope_ghz_per_e: f64, readout: &ReadoutParams) -> f64 {
    let slope = 2.0 * PI * GHZ * slope_ghz_per_e.abs();
    if slope == 0.0 {
        return f64::INFINITY;
    }
    (readout.kappa() / readout.n_photons).sqrt() / slope / readout.eta.sqrt()
}

/// `BW = η (n/κ) (∂ω_r/∂q)² δq²` in Hz.
pub fn detection_bandwidth(slope_ghz_per_e: f64, readout: &ReadoutParams, delta_q: f64) -> f64 {
    let slope = 2.0 * PI * GHZ * slope_ghz_per_e;
    readout.eta * readout.n_photons / readout.kappa() * slope * slope * delta_q * delta_q
}

/// Slope of `ω_r` along `q_G1` (GHz per `e`) and the resulting `S_q`.
pub fn charge_sensitivity_at(
    params: &DeviceParams,
    bias: &BiasPoint,
    readout: &ReadoutParams,
) -> Result<(f64, f64)> {
    readout.validate()?;
    let (_, slope) = omega_r_slope(params, bias, 0)?;
    Ok((slope, charge_sensitivity(slope, readout)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeritReport {
    pub q: f64,
    pub snr: f64,
    /// e/√Hz.
    pub s_q: f64,
    /// Hz.
    pub bandwidth: f64,
    /// s.
    pub t_gate: f64,
    pub fidelity: f64,
}
