//! Termination energy of the qubit-loaded SQUID, effective inductance, and the
//! loaded quarter-wave resonance.
//!
//! The termination phase ψ is treated as a slow classical coordinate. The
//! exact ground eigenvalue of the qubit Hamiltonian is independent of ψ (a
//! common shift of both island phases removes it), so the qubit enters through
//! its ground state held fixed while ψ moves:
//!
//! ```text
//! E(ψ) = -EJs [cos ψ + cos(ψ + Φx)] + <g| H(ψ - ψs) |g>
//!      = -EJs [cos ψ + cos(ψ + Φx)] + E0 - A [cos(ψ - ψs) - 1] - B sin(ψ - ψs)
//! ```
//!
//! with `A = (EJ1 + EJ2) <CC>`, `B = (EJ1 + EJ2) <SC>` in the ground state at
//! ψ = 0 and `ψs` the minimum of the SQUID term. The qubit thus stiffens the
//! termination by `A` on top of the SQUID curvature `2 EJs |cos(Φx/2)|`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::circuit::{
    BiasPoint, DeviceParams, LineParams, GHZ, HBAR, PLANCK, REDUCED_FLUX_QUANTUM,
};
use crate::error::{ensure_positive, JcpmError, Result};
use crate::hamiltonian::{build_hamiltonian, HilbertSpace};
use crate::qubit::coupling_elements;
use crate::spectral::{converged_spectrum, eigensolve, SpectrumResult, DEFAULT_TOLERANCE};

/// Step of the ψ derivative stencils (rad).
pub const PSI_STEP: f64 = 1e-2;

/// Frozen-ground-state termination energy as a closed form in ψ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrozenTermination {
    /// SQUID junction energy, per junction (GHz).
    pub ej_s: f64,
    pub phi_x: f64,
    /// Qubit ground energy at ψ = 0 (GHz).
    pub e_ground: f64,
    /// `(EJ1 + EJ2) <CC>` (GHz).
    pub a: f64,
    /// `(EJ1 + EJ2) <SC>` (GHz).
    pub b: f64,
    /// Phase the frozen qubit state is centred on.
    pub psi_s: f64,
}

impl FrozenTermination {
    pub fn from_spectrum(params: &DeviceParams, bias: &BiasPoint, spec: &SpectrumResult) -> Self {
        let g = spec.state(0);
        let (sc, cc) = coupling_elements(params, spec.space(), &g, &g);
        let total = params.junctions.ej1 + params.junctions.ej2;
        Self {
            ej_s: params.squid.ej_s,
            phi_x: bias.phi_x,
            e_ground: spec.eigenvalues[0],
            a: total * cc.re,
            b: total * sc.re,
            psi_s: squid_minimum(bias.phi_x),
        }
    }

    pub fn squid_energy(&self, psi: f64) -> f64 {
        -self.ej_s * (psi.cos() + (psi + self.phi_x).cos())
    }

    pub fn qubit_energy(&self, psi: f64) -> f64 {
        let d = psi - self.psi_s;
        self.e_ground - self.a * (d.cos() - 1.0) - self.b * d.sin()
    }

    pub fn energy(&self, psi: f64) -> f64 {
        self.squid_energy(psi) + self.qubit_energy(psi)
    }
}

/// Minimum of `-[cos ψ + cos(ψ + Φx)] = -2 cos(Φx/2) cos(ψ + Φx/2)`, wrapped to
/// `(-π, π]`. Zero when the SQUID is fully frustrated.
pub fn squid_minimum(phi_x: f64) -> f64 {
    let c = (0.5 * phi_x).cos();
    if c.abs() < 1e-12 {
        return 0.0;
    }
    let raw = if c > 0.0 {
        -0.5 * phi_x
    } else {
        PI - 0.5 * phi_x
    };
    let w = raw.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Sampled termination energy with its minimum and curvatures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminationCurve {
    pub psi_grid: Vec<f64>,
    /// GHz, one per grid point.
    pub energies: Vec<f64>,
    pub psi_star: f64,
    pub e_star: f64,
    /// Second ψ-derivative at the minimum (GHz).
    pub d2e: f64,
    /// Fourth ψ-derivative at the minimum (GHz).
    pub d4e: f64,
    pub model: FrozenTermination,
}

pub const DEFAULT_PSI_RANGE: (f64, f64) = (-0.5 * PI, 0.5 * PI);
pub const DEFAULT_PSI_POINTS: usize = 65;

fn stencil5(f: &impl Fn(f64) -> f64, x: f64, h: f64) -> [f64; 5] {
    [f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h)]
}

fn first_derivative(v: &[f64; 5], h: f64) -> f64 {
    (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h)
}

fn second_derivative(v: &[f64; 5], h: f64) -> f64 {
    (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h)
}

fn fourth_derivative(v: &[f64; 5], h: f64) -> f64 {
    (v[0] - 4.0 * v[1] + 6.0 * v[2] - 4.0 * v[3] + v[4]) / h.powi(4)
}

/// Grid scan, golden-section search, and a Newton polish on stencil
/// derivatives (golden section alone stalls near `√ε`).
pub fn termination_curve(
    model: &FrozenTermination,
    psi_range: (f64, f64),
    n_points: usize,
) -> Result<TerminationCurve> {
    let (lo, hi) = psi_range;
    if !(hi > lo) || n_points < 3 {
        return Err(JcpmError::InvalidParameter {
            name: "psi_range",
            reason: format!("need lo < hi and at least 3 points, got {psi_range:?} / {n_points}"),
        });
    }
    let f = |p: f64| model.energy(p);
    let psi_grid: Vec<f64> = (0..n_points)
        .map(|i| lo + (hi - lo) * i as f64 / (n_points - 1) as f64)
        .collect();
    let energies: Vec<f64> = psi_grid.iter().map(|&p| f(p)).collect();
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(JcpmError::NonFinite("termination energy"));
    }
    let imin = energies
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if imin == 0 || imin == n_points - 1 {
        return Err(JcpmError::NoInteriorMinimum { lo, hi });
    }

    let (mut a, mut b) = (psi_grid[imin - 1], psi_grid[imin + 1]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mut psi_star = 0.5 * (a + b);
    for _ in 0..3 {
        let v = stencil5(&f, psi_star, PSI_STEP);
        let d2 = second_derivative(&v, PSI_STEP);
        if d2 <= 0.0 {
            break;
        }
        let step = first_derivative(&v, PSI_STEP) / d2;
        if step.abs() > PSI_STEP {
            break;
        }
        psi_star -= step;
    }
    let v = stencil5(&f, psi_star, PSI_STEP);
    let d2e = second_derivative(&v, PSI_STEP);
    let d4e = fourth_derivative(&v, PSI_STEP);
    if !(d2e > 0.0) {
        return Err(JcpmError::NoInteriorMinimum { lo, hi });
    }
    Ok(TerminationCurve {
        psi_grid,
        energies,
        psi_star,
        e_star: v[2],
        d2e,
        d4e,
        model: *model,
    })
}

pub fn born_oppenheimer_curve(
    params: &DeviceParams,
    bias: &BiasPoint,
    psi_range: (f64, f64),
    n_points: usize,
) -> Result<TerminationCurve> {
    let spec = converged_spectrum(params, bias, 1, DEFAULT_TOLERANCE)?;
    let model = FrozenTermination::from_spectrum(params, bias, &spec);
    termination_curve(&model, psi_range, n_points)
}

/// Effective termination inductance `(Φ0/2π)² / (h · d2E)` in henry.
pub fn effective_inductance(d2e_ghz: f64) -> Result<f64> {
    ensure_positive("d2E", d2e_ghz)?;
    Ok(REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM / (PLANCK * d2e_ghz * GHZ))
}

/// `L / (L0 l + L)`.
pub fn participation_ratio(line: &LineParams, l_eff: f64) -> f64 {
    l_eff / (line.total_inductance() + l_eff)
}

/// Lowest resonance of a quarter-wave line shorted through `l_eff`:
/// the root of `tan(ωl/v) = Z0 / (ω L)` below the quarter-wave frequency (GHz).
pub fn loaded_frequency(line: &LineParams, l_eff: f64) -> Result<f64> {
    line.validate()?;
    ensure_positive("l_eff", l_eff)?;
    // x = ωl/v turns the condition into x sin x = r cos x with r = L0 l / L.
    let r = line.total_inductance() / l_eff;
    let g = |x: f64| x * x.sin() - r * x.cos();
    let (mut lo, mut hi) = (0.0f64, 0.5 * PI);
    if !r.is_finite() || !(g(lo) < 0.0) || !(g(hi) > 0.0) {
        return Err(JcpmError::RootBracket(format!(
            "no sign change on (0, π/2) for L0·l/L = {r:e}"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok(x * line.phase_velocity() / (2.0 * PI * line.length) / GHZ)
}

/// Relative pull of a lumped oscillator, `δω/ω = -(p_L / 2) δL/L`.
pub fn lumped_relative_pull(p_l: f64, rel_delta_l: f64) -> f64 {
    -0.5 * p_l * rel_delta_l
}

/// Phase drop across the termination for one resonator photon's zero-point
/// amplitude: the participation ratio times the antinode value
/// `(2π/Φ0) √(ħ / 2 C_r ω)` with `C_r = C0 l / 2`.
pub fn zero_point_phase(line: &LineParams, l_eff: f64, omega_r_ghz: f64) -> f64 {
    participation_ratio(line, l_eff) * antinode_zero_point_phase(line, omega_r_ghz)
}

pub fn antinode_zero_point_phase(line: &LineParams, omega_r_ghz: f64) -> f64 {
    let omega = 2.0 * PI * omega_r_ghz * GHZ;
    (HBAR / (2.0 * line.mode_capacitance() * omega)).sqrt() / REDUCED_FLUX_QUANTUM
}

/// `K = d4E ψ_J⁴ / 4` (GHz).
pub fn kerr_coefficient(curve: &TerminationCurve, psi_j: f64) -> f64 {
    curve.d4e * psi_j.powi(4) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadResult {
    pub psi_star: f64,
    /// GHz.
    pub d2e: f64,
    /// GHz.
    pub d4e: f64,
    /// Henry.
    pub l_eff: f64,
    /// Loaded resonance, GHz.
    pub omega_r: f64,
    pub p_l: f64,
    pub psi_j: f64,
    /// GHz.
    pub kerr_k: f64,
}

pub fn load_from_curve(line: &LineParams, curve: &TerminationCurve) -> Result<LoadResult> {
    let l_eff = effective_inductance(curve.d2e)?;
    let omega_r = loaded_frequency(line, l_eff)?;
    let psi_j = zero_point_phase(line, l_eff, omega_r);
    Ok(LoadResult {
        psi_star: curve.psi_star,
        d2e: curve.d2e,
        d4e: curve.d4e,
        l_eff,
        omega_r,
        p_l: participation_ratio(line, l_eff),
        psi_j,
        kerr_k: kerr_coefficient(curve, psi_j),
    })
}

/// How the qubit spectrum behind a load is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    pub tol: f64,
    /// Skip the convergence study and diagonalise at this truncation, e.g. to
    /// reuse the truncation certified at a nearby point.
    pub fixed_ncut: Option<usize>,
    /// Number of qubit levels kept alongside the ground state.
    pub levels: usize,
    pub psi_range: (f64, f64),
    pub psi_points: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            fixed_ncut: None,
            levels: 2,
            psi_range: DEFAULT_PSI_RANGE,
            psi_points: DEFAULT_PSI_POINTS,
        }
    }
}

impl LoadOptions {
    pub fn at_ncut(ncut: usize) -> Self {
        Self {
            fixed_ncut: Some(ncut),
            ..Default::default()
        }
    }
}

/// Everything computed for one bias point on the way to `ω_r`.
#[derive(Debug, Clone)]
pub struct OperatingState {
    pub bias: BiasPoint,
    pub spectrum: SpectrumResult,
    pub curve: TerminationCurve,
    pub load: LoadResult,
}

impl OperatingState {
    pub fn omega_q(&self) -> f64 {
        self.spectrum.splitting().unwrap_or(f64::NAN)
    }
}

pub fn solve_load(
    params: &DeviceParams,
    bias: &BiasPoint,
    opts: &LoadOptions,
) -> Result<OperatingState> {
    params.validate()?;
    let spectrum = match opts.fixed_ncut {
        Some(ncut) => {
            let h = build_hamiltonian(params, bias, HilbertSpace::new(ncut)?, 0.0)?;
            eigensolve(&h, opts.levels.max(1))?
        }
        None => converged_spectrum(params, bias, opts.levels.max(1), opts.tol)?,
    };
    let model = FrozenTermination::from_spectrum(params, bias, &spectrum);
    let curve = termination_curve(&model, opts.psi_range, opts.psi_points)?;
    let load = load_from_curve(&params.line, &curve)?;
    Ok(OperatingState {
        bias: *bias,
        spectrum,
        curve,
        load,
    })
}

/// Loaded resonance at one bias (GHz).
pub fn resonator_frequency(params: &DeviceParams, bias: &BiasPoint) -> Result<f64> {
    Ok(solve_load(params, bias, &LoadOptions::default())?
        .load
        .omega_r)
}

/// `ω_r(a) − ω_r(b)` in GHz.
pub fn frequency_pull(
    params: &DeviceParams,
    bias_a: &BiasPoint,
    bias_b: &BiasPoint,
) -> Result<f64> {
    Ok(resonator_frequency(params, bias_a)? - resonator_frequency(params, bias_b)?)
}
