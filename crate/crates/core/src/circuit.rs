//! Physical constants, device parameters and bias coordinates.
//!
//! Energies are stored as linear frequencies, `E/h` in GHz. Capacitances are
//! in farad, line constants per metre, fluxes as dimensionless phases
//! (`2π Φ/Φ0`) and gate charges as Cooper-pair offsets `ng = q_G / 2e`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, JcpmError, Result};

/// Elementary charge (C).
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Superconducting flux quantum `h / 2e` (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELECTRON_CHARGE);
/// Reduced flux quantum `Φ0 / 2π` (Wb).
pub const REDUCED_FLUX_QUANTUM: f64 = FLUX_QUANTUM / (2.0 * PI);

/// Hz per GHz.
pub const GHZ: f64 = 1.0e9;

/// The constants every other module is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub electron_charge: f64,
    pub flux_quantum: f64,
    pub planck: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            electron_charge: ELECTRON_CHARGE,
            flux_quantum: FLUX_QUANTUM,
            planck: PLANCK,
        }
    }
}

/// The three flux-qubit junctions. Junction 1 and 2 connect the islands to the
/// resonator node, the α-junction sits between the islands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionSet {
    #[serde(rename = "ej1_ghz")]
    pub ej1: f64,
    #[serde(rename = "ej2_ghz")]
    pub ej2: f64,
    #[serde(rename = "ej_alpha_ghz")]
    pub ej_alpha: f64,
    #[serde(rename = "c1_farad")]
    pub c1: f64,
    #[serde(rename = "c2_farad")]
    pub c2: f64,
    #[serde(rename = "c_alpha_farad")]
    pub c_alpha: f64,
}

impl JunctionSet {
    /// Two identical outer junctions and a middle junction scaled by `alpha`
    /// in both Josephson energy and capacitance.
    pub fn symmetric(ej_q: f64, c_q: f64, alpha: f64) -> Self {
        Self {
            ej1: ej_q,
            ej2: ej_q,
            ej_alpha: alpha * ej_q,
            c1: c_q,
            c2: c_q,
            c_alpha: alpha * c_q,
        }
    }

    /// Returns `(EJq, Cq, α)` when the set has the symmetric form.
    pub fn symmetric_parts(&self) -> Option<(f64, f64, f64)> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !close(self.ej1, self.ej2) || !close(self.c1, self.c2) {
            return None;
        }
        let alpha = self.c_alpha / self.c1;
        if !close(self.ej_alpha, alpha * self.ej1) {
            return None;
        }
        Some((self.ej1, self.c1, alpha))
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("junctions.ej1_ghz", self.ej1)?;
        ensure_non_negative("junctions.ej2_ghz", self.ej2)?;
        ensure_non_negative("junctions.ej_alpha_ghz", self.ej_alpha)?;
        ensure_positive("junctions.c1_farad", self.c1)?;
        ensure_positive("junctions.c2_farad", self.c2)?;
        ensure_non_negative("junctions.c_alpha_farad", self.c_alpha)
    }
}

/// The two identical SQUID junctions shunting the resonator node to ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquidParams {
    #[serde(rename = "ej_s_ghz")]
    pub ej_s: f64,
    #[serde(rename = "c_s_farad")]
    pub c_s: f64,
}

impl SquidParams {
    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("squid.ej_s_ghz", self.ej_s)?;
        ensure_non_negative("squid.c_s_farad", self.c_s)
    }
}

/// Distributed transmission-line constants of the quarter-wave resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineParams {
    #[serde(rename = "c0_farad_per_m")]
    pub c0: f64,
    #[serde(rename = "l0_henry_per_m")]
    pub l0: f64,
    #[serde(rename = "length_m")]
    pub length: f64,
}

impl LineParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("line.c0_farad_per_m", self.c0)?;
        ensure_positive("line.l0_henry_per_m", self.l0)?;
        ensure_positive("line.length_m", self.length)
    }

    /// Phase velocity `1/√(L0 C0)` in m/s.
    pub fn phase_velocity(&self) -> f64 {
        1.0 / (self.l0 * self.c0).sqrt()
    }

    /// Characteristic impedance `√(L0/C0)` in ohm.
    pub fn impedance(&self) -> f64 {
        (self.l0 / self.c0).sqrt()
    }

    /// Total series inductance of the line, `L0 l`.
    pub fn total_inductance(&self) -> f64 {
        self.l0 * self.length
    }

    /// Capacitance of the fundamental quarter-wave mode, `C0 l / 2`.
    pub fn mode_capacitance(&self) -> f64 {
        0.5 * self.c0 * self.length
    }
}

/// Gate capacitors, one per island, both equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateParams {
    #[serde(rename = "c_g_farad")]
    pub c_g: f64,
}

impl GateParams {
    /// `γ = C_G / C_q`.
    pub fn gamma(&self, c_q: f64) -> f64 {
        self.c_g / c_q
    }
}

/// Everything that defines one device instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub junctions: JunctionSet,
    pub squid: SquidParams,
    pub line: LineParams,
    pub gates: GateParams,
}

impl DeviceParams {
    pub const DEFAULT_EJ_Q_GHZ: f64 = 200.0;
    pub const DEFAULT_C_Q_FARAD: f64 = 3.19e-16;
    pub const DEFAULT_ALPHA: f64 = 1.0;
    pub const DEFAULT_EJ_S_GHZ: f64 = 350.0;
    pub const DEFAULT_C_S_FARAD: f64 = 5.17e-17;
    pub const DEFAULT_C0: f64 = 1.11e-10;
    pub const DEFAULT_L0: f64 = 2.78e-7;
    pub const DEFAULT_LENGTH_M: f64 = 6.0e-3;
    pub const DEFAULT_GATE_RATIO: f64 = 0.01;

    pub fn validate(&self) -> Result<()> {
        self.junctions.validate()?;
        self.squid.validate()?;
        self.line.validate()?;
        ensure_non_negative("gates.c_g_farad", self.gates.c_g)
    }
}

impl Default for DeviceParams {
    fn default() -> Self {
        let c_q = Self::DEFAULT_C_Q_FARAD;
        Self {
            junctions: JunctionSet::symmetric(Self::DEFAULT_EJ_Q_GHZ, c_q, Self::DEFAULT_ALPHA),
            squid: SquidParams {
                ej_s: Self::DEFAULT_EJ_S_GHZ,
                c_s: Self::DEFAULT_C_S_FARAD,
            },
            line: LineParams {
                c0: Self::DEFAULT_C0,
                l0: Self::DEFAULT_L0,
                length: Self::DEFAULT_LENGTH_M,
            },
            gates: GateParams {
                c_g: Self::DEFAULT_GATE_RATIO * c_q,
            },
        }
    }
}

/// How the total external flux is shared between the SQUID and qubit loops.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FluxSplit {
    /// Equal loop areas: `Φs = Φq = Φx / 2`.
    #[default]
    Equal,
    /// Fixed qubit-loop phase; the SQUID takes the remainder `Φx − Φq`.
    QubitPhase(f64),
}

/// External control coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasPoint {
    /// Offset charge of island 1 in Cooper pairs.
    pub ng1: f64,
    /// Offset charge of island 2 in Cooper pairs.
    pub ng2: f64,
    /// Total external flux as a phase (rad).
    pub phi_x: f64,
    pub flux_split: FluxSplit,
}

impl BiasPoint {
    pub fn new(ng1: f64, ng2: f64, phi_x: f64) -> Self {
        Self {
            ng1,
            ng2,
            phi_x,
            flux_split: FluxSplit::Equal,
        }
    }

    /// Gate charges in units of `e`, flux in units of `Φ0`.
    pub fn from_lab_units(q_g1_e: f64, q_g2_e: f64, phi_x_phi0: f64) -> Self {
        Self::new(0.5 * q_g1_e, 0.5 * q_g2_e, 2.0 * PI * phi_x_phi0)
    }

    /// Gate charges in units of `e` at the flux sweet spot `Φx = Φ0`.
    pub fn operating(q_g1_e: f64, q_g2_e: f64) -> Self {
        Self::from_lab_units(q_g1_e, q_g2_e, 1.0)
    }

    pub fn with_flux_split(mut self, split: FluxSplit) -> Self {
        self.flux_split = split;
        self
    }

    /// Qubit-loop phase `Φq`.
    pub fn phi_q(&self) -> f64 {
        match self.flux_split {
            FluxSplit::Equal => 0.5 * self.phi_x,
            FluxSplit::QubitPhase(phi_q) => phi_q,
        }
    }

    /// SQUID-loop phase `Φs = Φx − Φq`.
    pub fn phi_s(&self) -> f64 {
        self.phi_x - self.phi_q()
    }

    pub fn q_g1_e(&self) -> f64 {
        2.0 * self.ng1
    }

    pub fn q_g2_e(&self) -> f64 {
        2.0 * self.ng2
    }

    pub fn phi_x_phi0(&self) -> f64 {
        self.phi_x / (2.0 * PI)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bias.ng1", self.ng1),
            ("bias.ng2", self.ng2),
            ("bias.phi_x_rad", self.phi_x),
        ] {
            if !v.is_finite() {
                return Err(JcpmError::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if let FluxSplit::QubitPhase(p) = self.flux_split {
            if !p.is_finite() {
                return Err(JcpmError::InvalidParameter {
                    name: "bias.phi_q_rad",
                    reason: format!("must be finite, got {p}"),
                });
            }
        }
        Ok(())
    }
}

impl Default for BiasPoint {
    /// Parity-readout working point: `q_G1 = 0`, `q_G2 = e`, `Φx = Φ0`.
    fn default() -> Self {
        Self::operating(0.0, 1.0)
    }
}

/// Island charging energy `e² / 2CΣ` with `CΣ = Cq (1 + 2α)`, in GHz.
///
/// Only meaningful for a symmetric junction set; asymmetric devices need the
/// full capacitance matrix.
pub fn charging_energy_ec(params: &DeviceParams) -> Result<f64> {
    let (_, c_q, alpha) = params
        .junctions
        .symmetric_parts()
        .ok_or(JcpmError::AsymmetricJunctions)?;
    ensure_positive("junctions.c1_farad", c_q)?;
    let c_sigma = c_q * (1.0 + 2.0 * alpha);
    Ok(ELECTRON_CHARGE * ELECTRON_CHARGE / (2.0 * c_sigma) / PLANCK / GHZ)
}

/// Unloaded quarter-wave frequency `v / 4l` in GHz.
pub fn quarter_wave_frequency(line: &LineParams) -> f64 {
    line.phase_velocity() / (4.0 * line.length) / GHZ
}
