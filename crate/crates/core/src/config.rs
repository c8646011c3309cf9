//! TOML configuration: device sections `junctions`, `squid`, `line`, `gates`
//! and a working-point section `bias`. Missing sections fall back to the
//! default device.
//!
//! ```toml
//! [junctions]          # or explicit ej1_ghz, ej2_ghz, ej_alpha_ghz, c1_farad, ...
//! ej_q_ghz = 200.0
//! c_q_farad = 3.19e-16
//! alpha = 1.0
//!
//! [gates]              # or c_g_farad
//! gamma = 0.01
//!
//! [bias]
//! ng1 = 0.0
//! ng2 = 0.5
//! phi_x_rad = 6.283185307179586
//! ```

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{
    BiasPoint, DeviceParams, FluxSplit, GateParams, JunctionSet, LineParams, SquidParams,
};
use crate::error::{JcpmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub device: DeviceParams,
    pub bias: BiasPoint,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJunctions {
    #[serde(skip_serializing_if = "Option::is_none")]
    ej_q_ghz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_q_farad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ej1_ghz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ej2_ghz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ej_alpha_ghz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c1_farad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c2_farad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_alpha_farad: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGates {
    #[serde(skip_serializing_if = "Option::is_none")]
    c_g_farad: Option<f64>,
    /// Relative to `c1_farad`.
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBias {
    #[serde(default)]
    ng1: f64,
    #[serde(default = "default_ng2")]
    ng2: f64,
    #[serde(default = "default_phi_x")]
    phi_x_rad: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_q_rad: Option<f64>,
}

fn default_ng2() -> f64 {
    0.5
}

fn default_phi_x() -> f64 {
    2.0 * PI
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    junctions: Option<RawJunctions>,
    #[serde(default)]
    squid: Option<SquidParams>,
    #[serde(default)]
    line: Option<LineParams>,
    #[serde(default)]
    gates: Option<RawGates>,
    #[serde(default)]
    bias: Option<RawBias>,
}

fn resolve_junctions(raw: Option<RawJunctions>) -> Result<JunctionSet> {
    let Some(r) = raw else {
        return Ok(DeviceParams::default().junctions);
    };
    let shorthand = [r.ej_q_ghz, r.c_q_farad, r.alpha];
    let explicit = [
        r.ej1_ghz,
        r.ej2_ghz,
        r.ej_alpha_ghz,
        r.c1_farad,
        r.c2_farad,
        r.c_alpha_farad,
    ];
    let any_short = shorthand.iter().any(Option::is_some);
    let any_explicit = explicit.iter().any(Option::is_some);
    match (any_short, any_explicit) {
        (true, true) => Err(JcpmError::Config(
            "junctions: use either ej_q_ghz/c_q_farad/alpha or the explicit per-junction keys, not both".into(),
        )),
        (false, true) => {
            let names = ["ej1_ghz", "ej2_ghz", "ej_alpha_ghz", "c1_farad", "c2_farad", "c_alpha_farad"];
            let mut v = [0.0; 6];
            for (k, (val, name)) in explicit.iter().zip(names).enumerate() {
                v[k] = val.ok_or_else(|| JcpmError::Config(format!("junctions.{name} is required in explicit form")))?;
            }
            Ok(JunctionSet {
                ej1: v[0],
                ej2: v[1],
                ej_alpha: v[2],
                c1: v[3],
                c2: v[4],
                c_alpha: v[5],
            })
        }
        _ => Ok(JunctionSet::symmetric(
            r.ej_q_ghz.unwrap_or(DeviceParams::DEFAULT_EJ_Q_GHZ),
            r.c_q_farad.unwrap_or(DeviceParams::DEFAULT_C_Q_FARAD),
            r.alpha.unwrap_or(DeviceParams::DEFAULT_ALPHA),
        )),
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| JcpmError::Config(e.to_string()))?;
        let defaults = DeviceParams::default();
        let junctions = resolve_junctions(raw.junctions)?;
        let gates = match raw.gates {
            None => GateParams {
                c_g: DeviceParams::DEFAULT_GATE_RATIO * junctions.c1,
            },
            Some(RawGates {
                c_g_farad: Some(_),
                gamma: Some(_),
            }) => {
                return Err(JcpmError::Config(
                    "gates: give c_g_farad or gamma, not both".into(),
                ))
            }
            Some(RawGates {
                c_g_farad: Some(c), ..
            }) => GateParams { c_g: c },
            Some(RawGates { gamma: Some(g), .. }) => GateParams {
                c_g: g * junctions.c1,
            },
            Some(_) => GateParams {
                c_g: DeviceParams::DEFAULT_GATE_RATIO * junctions.c1,
            },
        };
        let device = DeviceParams {
            junctions,
            squid: raw.squid.unwrap_or(defaults.squid),
            line: raw.line.unwrap_or(defaults.line),
            gates,
        };
        let bias = match raw.bias {
            None => BiasPoint::default(),
            Some(b) => {
                let p = BiasPoint::new(b.ng1, b.ng2, b.phi_x_rad);
                match b.phi_q_rad {
                    Some(q) => p.with_flux_split(FluxSplit::QubitPhase(q)),
                    None => p,
                }
            }
        };
        let cfg = Self { device, bias };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| JcpmError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.bias.validate()
    }

    /// The default device in shorthand form.
    pub fn default_preset_toml() -> String {
        let raw = RawConfig {
            junctions: Some(RawJunctions {
                ej_q_ghz: Some(DeviceParams::DEFAULT_EJ_Q_GHZ),
                c_q_farad: Some(DeviceParams::DEFAULT_C_Q_FARAD),
                alpha: Some(DeviceParams::DEFAULT_ALPHA),
                ..Default::default()
            }),
            squid: Some(DeviceParams::default().squid),
            line: Some(DeviceParams::default().line),
            gates: Some(RawGates {
                c_g_farad: None,
                gamma: Some(DeviceParams::DEFAULT_GATE_RATIO),
            }),
            bias: Some(raw_bias(&BiasPoint::default())),
        };
        toml::to_string(&raw).expect("preset serialises")
    }

    /// Fully resolved form with every junction listed explicitly. Two configs
    /// describing the same device give the same text.
    pub fn canonical_toml(&self) -> String {
        let j = self.device.junctions;
        let raw = RawConfig {
            junctions: Some(RawJunctions {
                ej1_ghz: Some(j.ej1),
                ej2_ghz: Some(j.ej2),
                ej_alpha_ghz: Some(j.ej_alpha),
                c1_farad: Some(j.c1),
                c2_farad: Some(j.c2),
                c_alpha_farad: Some(j.c_alpha),
                ..Default::default()
            }),
            squid: Some(self.device.squid),
            line: Some(self.device.line),
            gates: Some(RawGates {
                c_g_farad: Some(self.device.gates.c_g),
                gamma: None,
            }),
            bias: Some(raw_bias(&self.bias)),
        };
        toml::to_string(&raw).expect("config serialises")
    }
}

fn raw_bias(b: &BiasPoint) -> RawBias {
    RawBias {
        ng1: b.ng1,
        ng2: b.ng2,
        phi_x_rad: b.phi_x,
        phi_q_rad: match b.flux_split {
            FluxSplit::Equal => None,
            FluxSplit::QubitPhase(q) => Some(q),
        },
    }
}
