//! Central finite differences: gradient and Hessian of a scalar function,
//! plus the bias-coordinate wrapper used for `ω_r`.

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{BiasPoint, DeviceParams};
use crate::error::{JcpmError, Result};
use crate::resonator::{solve_load, LoadOptions, OperatingState};

/// Gate-charge step in units of `e`.
pub const CHARGE_STEP: f64 = 1e-3;
/// Flux step in units of `Φ0`.
pub const FLUX_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Symmetric, row-major.
    pub hessian: Vec<Vec<f64>>,
}

#[derive(Clone, Copy)]
enum Probe {
    Center,
    Axis(usize, f64),
    Corner(usize, f64, usize, f64),
}

/// Gradient by central differences and Hessian by 3-point (diagonal) and
/// 4-corner (mixed) stencils. Evaluations run in parallel.
pub fn derivatives<F>(f: F, x: &[f64], steps: &[f64]) -> Result<Derivatives>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let n = x.len();
    if steps.len() != n || steps.iter().any(|h| !(*h > 0.0)) {
        return Err(JcpmError::InvalidParameter {
            name: "steps",
            reason: "need one positive step per coordinate".into(),
        });
    }
    let mut probes = vec![Probe::Center];
    for i in 0..n {
        probes.push(Probe::Axis(i, 1.0));
        probes.push(Probe::Axis(i, -1.0));
    }
    for i in 0..n {
        for j in i + 1..n {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                probes.push(Probe::Corner(i, si, j, sj));
            }
        }
    }
    let values: Vec<f64> = probes
        .par_iter()
        .map(|p| {
            let mut y = x.to_vec();
            match *p {
                Probe::Center => {}
                Probe::Axis(i, s) => y[i] += s * steps[i],
                Probe::Corner(i, si, j, sj) => {
                    y[i] += si * steps[i];
                    y[j] += sj * steps[j];
                }
            }
            let v = f(&y)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(JcpmError::NonFinite("derivative probe"))
            }
        })
        .collect::<Result<_>>()?;

    let f0 = values[0];
    let mut gradient = vec![0.0; n];
    let mut hessian = vec![vec![0.0; n]; n];
    for i in 0..n {
        let (fp, fm) = (values[1 + 2 * i], values[2 + 2 * i]);
        gradient[i] = (fp - fm) / (2.0 * steps[i]);
        hessian[i][i] = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
    }
    let mut k = 1 + 2 * n;
    for i in 0..n {
        for j in i + 1..n {
            let (pp, pm, mp, mm) = (values[k], values[k + 1], values[k + 2], values[k + 3]);
            k += 4;
            let h = (pp - pm - mp + mm) / (4.0 * steps[i] * steps[j]);
            hessian[i][j] = h;
            hessian[j][i] = h;
        }
    }
    Ok(Derivatives {
        value: f0,
        gradient,
        hessian,
    })
}

/// Derivatives of `ω_r` (GHz) with respect to `[q_G1 / e, q_G2 / e, Φx / Φ0]`.
#[derive(Debug, Clone, Serialize)]
pub struct OmegaDerivatives {
    pub bias_lab: [f64; 3],
    pub omega_r: f64,
    pub gradient: [f64; 3],
    pub hessian: [[f64; 3]; 3],
    pub ncut_used: usize,
}

pub const LAB_STEPS: [f64; 3] = [CHARGE_STEP, CHARGE_STEP, FLUX_STEP];

fn lab_bias(template: &BiasPoint, y: &[f64]) -> BiasPoint {
    BiasPoint {
        flux_split: template.flux_split,
        ..BiasPoint::from_lab_units(y[0], y[1], y[2])
    }
}

/// Certifies the truncation at `bias` once and reuses it for every stencil
/// point, so that the differences are not polluted by truncation jumps.
pub fn omega_r_derivatives(params: &DeviceParams, bias: &BiasPoint) -> Result<OmegaDerivatives> {
    let center = solve_load(params, bias, &LoadOptions::default())?;
    omega_r_derivatives_around(params, &center)
}

pub fn omega_r_derivatives_around(
    params: &DeviceParams,
    center: &OperatingState,
) -> Result<OmegaDerivatives> {
    let bias = center.bias;
    let ncut = center.spectrum.ncut_used;
    let opts = LoadOptions::at_ncut(ncut);
    let x = [bias.q_g1_e(), bias.q_g2_e(), bias.phi_x_phi0()];
    let f = |y: &[f64]| -> Result<f64> {
        if y == x {
            return Ok(center.load.omega_r);
        }
        Ok(solve_load(params, &lab_bias(&bias, y), &opts)?.load.omega_r)
    };
    let d = derivatives(f, &x, &LAB_STEPS)?;
    let mut hessian = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            hessian[i][j] = d.hessian[i][j];
        }
    }
    Ok(OmegaDerivatives {
        bias_lab: x,
        omega_r: d.value,
        gradient: [d.gradient[0], d.gradient[1], d.gradient[2]],
        hessian,
        ncut_used: ncut,
    })
}

/// Central first derivative of `ω_r` along one lab coordinate, with the same
/// truncation reuse as [`omega_r_derivatives`].
pub fn omega_r_slope(params: &DeviceParams, bias: &BiasPoint, axis: usize) -> Result<(f64, f64)> {
    let center = solve_load(params, bias, &LoadOptions::default())?;
    let opts = LoadOptions::at_ncut(center.spectrum.ncut_used);
    let x = [bias.q_g1_e(), bias.q_g2_e(), bias.phi_x_phi0()];
    let h = LAB_STEPS[axis];
    let eval = |s: f64| -> Result<f64> {
        let mut y = x;
        y[axis] += s * h;
        Ok(solve_load(params, &lab_bias(bias, &y), &opts)?.load.omega_r)
    };
    Ok((center.load.omega_r, (eval(1.0)? - eval(-1.0)?) / (2.0 * h)))
}
