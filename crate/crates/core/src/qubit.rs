//! Qubit-level observables: splitting, coupling matrix elements,
//! Jaynes-Cummings coupling and the classical potential landscape.

use std::f64::consts::PI;

use faer::c64;
use serde::Serialize;

use crate::circuit::{BiasPoint, DeviceParams};
use crate::error::{JcpmError, Result};
use crate::hamiltonian::HilbertSpace;
use crate::resonator::LoadResult;
use crate::spectral::{converged_spectrum, SpectrumResult, DEFAULT_TOLERANCE};

/// Splittings below this are reported as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Splitting {
    /// `E1 - E0` (GHz).
    pub omega_q: f64,
    pub degenerate: bool,
    pub ncut_used: usize,
}

pub fn qubit_splitting(params: &DeviceParams, bias: &BiasPoint) -> Result<Splitting> {
    let spec = converged_spectrum(params, bias, 2, DEFAULT_TOLERANCE)?;
    Ok(splitting_of(&spec))
}

pub fn splitting_of(spec: &SpectrumResult) -> Splitting {
    let omega_q = spec.splitting().unwrap_or(f64::NAN);
    Splitting {
        omega_q,
        degenerate: omega_q.abs() < DEGENERACY_THRESHOLD,
        ncut_used: spec.ncut_used,
    }
}

/// `<a| e^{iφ_island} |b>` with `island` 1 or 2.
pub fn shift_element(space: HilbertSpace, a: &[c64], b: &[c64], island: u8) -> c64 {
    let mut acc = c64::new(0.0, 0.0);
    for (k, n1, n2) in space.states() {
        let t = match island {
            1 => space.index(n1 + 1, n2),
            _ => space.index(n1, n2 + 1),
        };
        if let Some(t) = t {
            acc += a[t].conj() * b[k];
        }
    }
    acc
}

/// `(<a|SC|b>, <a|CC|b>)` evaluated directly from the shift structure.
pub fn coupling_elements(
    params: &DeviceParams,
    space: HilbertSpace,
    a: &[c64],
    b: &[c64],
) -> (c64, c64) {
    let j = &params.junctions;
    let total = j.ej1 + j.ej2;
    let (w1, w2) = if total > 0.0 {
        (j.ej1 / total, j.ej2 / total)
    } else {
        (0.5, 0.5)
    };
    let mut sc = c64::new(0.0, 0.0);
    let mut cc = c64::new(0.0, 0.0);
    for (island, w) in [(1u8, w1), (2u8, w2)] {
        let up = shift_element(space, a, b, island);
        let down = shift_element(space, b, a, island).conj();
        // sin = (e^{iφ} - e^{-iφ}) / 2i, cos = (e^{iφ} + e^{-iφ}) / 2
        sc += (up - down) * c64::new(0.0, -0.5 * w);
        cc += (up + down) * (0.5 * w);
    }
    (sc, cc)
}

/// `<i|SC|j>` and `<i|CC|j>` among the lowest `k` eigenstates.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElements {
    pub sc: Vec<Vec<c64>>,
    pub cc: Vec<Vec<c64>>,
}

impl MatrixElements {
    pub fn k(&self) -> usize {
        self.sc.len()
    }
}

pub fn matrix_elements(
    params: &DeviceParams,
    bias: &BiasPoint,
    k: usize,
) -> Result<MatrixElements> {
    if k < 2 {
        return Err(JcpmError::InvalidParameter {
            name: "k",
            reason: format!("need at least two states, got {k}"),
        });
    }
    let spec = converged_spectrum(params, bias, k, DEFAULT_TOLERANCE)?;
    Ok(matrix_elements_of(params, &spec))
}

pub fn matrix_elements_of(params: &DeviceParams, spec: &SpectrumResult) -> MatrixElements {
    let k = spec.eigenvalues.len();
    let space = spec.space();
    let states: Vec<Vec<c64>> = (0..k).map(|i| spec.state(i)).collect();
    let mut sc = vec![vec![c64::new(0.0, 0.0); k]; k];
    let mut cc = sc.clone();
    for i in 0..k {
        for j in i..k {
            let (s, c) = coupling_elements(params, space, &states[i], &states[j]);
            sc[i][j] = s;
            cc[i][j] = c;
            sc[j][i] = s.conj();
            cc[j][i] = c.conj();
        }
    }
    MatrixElements { sc, cc }
}

/// Dispersive coupling of the lowest qubit transition to the loaded mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingReport {
    pub omega_q: f64,
    pub g_01: f64,
    /// `ω_q - ω_r` (GHz).
    pub delta: f64,
    /// Infinite when `|Δ| < 1e-6` GHz.
    pub g_over_delta: f64,
}

pub fn jc_coupling(
    params: &DeviceParams,
    bias: &BiasPoint,
    load: &LoadResult,
) -> Result<CouplingReport> {
    let spec = converged_spectrum(params, bias, 2, DEFAULT_TOLERANCE)?;
    Ok(jc_coupling_of(params, &spec, load))
}

pub fn jc_coupling_of(
    params: &DeviceParams,
    spec: &SpectrumResult,
    load: &LoadResult,
) -> CouplingReport {
    let space = spec.space();
    let (sc01, _) = coupling_elements(params, space, &spec.state(0), &spec.state(1));
    let j = &params.junctions;
    let omega_q = spec.splitting().unwrap_or(f64::NAN);
    let g_01 = (j.ej1 + j.ej2) * load.psi_j * sc01.norm();
    let delta = omega_q - load.omega_r;
    let g_over_delta = if delta.abs() < 1e-6 {
        f64::INFINITY
    } else {
        g_01 / delta
    };
    CouplingReport {
        omega_q,
        g_01,
        delta,
        g_over_delta,
    }
}

/// Resolution and extent of a potential map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n1: usize,
    pub n2: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n1: 201,
            n2: 201,
            lo: -2.0 * PI,
            hi: 2.0 * PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialMinimum {
    pub phi1: f64,
    pub phi2: f64,
    pub u: f64,
    /// Minima differing only by multiples of 2π share a class.
    pub class: usize,
}

#[derive(Debug, Clone)]
pub struct PotentialGrid {
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    /// `values[i * phi2.len() + j] = U(phi1[i], phi2[j])` (GHz).
    pub values: Vec<f64>,
    pub minima: Vec<PotentialMinimum>,
}

impl PotentialGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.phi2.len() + j]
    }
}

/// Classical Josephson potential of the qubit loop.
#[derive(Debug, Clone, Copy)]
pub struct QubitPotential {
    pub ej1: f64,
    pub ej2: f64,
    pub ej_alpha: f64,
    pub phi_q: f64,
}

impl QubitPotential {
    pub fn new(params: &DeviceParams, bias: &BiasPoint) -> Self {
        let j = &params.junctions;
        Self {
            ej1: j.ej1,
            ej2: j.ej2,
            ej_alpha: j.ej_alpha,
            phi_q: bias.phi_q(),
        }
    }

    pub fn value(&self, p1: f64, p2: f64) -> f64 {
        -self.ej1 * p1.cos() - self.ej2 * p2.cos() - self.ej_alpha * (p2 - p1 + self.phi_q).cos()
    }

    pub fn gradient(&self, p1: f64, p2: f64) -> [f64; 2] {
        let s = (p2 - p1 + self.phi_q).sin();
        [
            self.ej1 * p1.sin() - self.ej_alpha * s,
            self.ej2 * p2.sin() + self.ej_alpha * s,
        ]
    }

    pub fn hessian(&self, p1: f64, p2: f64) -> [[f64; 2]; 2] {
        let c = self.ej_alpha * (p2 - p1 + self.phi_q).cos();
        [[self.ej1 * p1.cos() + c, -c], [-c, self.ej2 * p2.cos() + c]]
    }

    /// Positive-definite Hessian; rules out saddles whose descent direction
    /// falls between grid neighbours.
    fn is_minimum(&self, p: [f64; 2]) -> bool {
        let h = self.hessian(p[0], p[1]);
        h[0][0] > 0.0 && h[0][0] * h[1][1] - h[0][1] * h[1][0] > 0.0
    }

    /// Newton iteration from a grid seed; falls back to gradient steps where the
    /// Hessian is not positive definite.
    fn refine(&self, mut p: [f64; 2]) -> [f64; 2] {
        let scale = (self.ej1 + self.ej2 + self.ej_alpha).max(f64::MIN_POSITIVE);
        for _ in 0..100 {
            let g = self.gradient(p[0], p[1]);
            if g[0].hypot(g[1]) < 1e-13 * scale {
                break;
            }
            let h = self.hessian(p[0], p[1]);
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            let step = if h[0][0] > 0.0 && det > 0.0 {
                [
                    (h[1][1] * g[0] - h[0][1] * g[1]) / det,
                    (h[0][0] * g[1] - h[1][0] * g[0]) / det,
                ]
            } else {
                [g[0] / scale, g[1] / scale]
            };
            p = [p[0] - step[0], p[1] - step[1]];
        }
        p
    }
}

pub fn potential_grid(
    params: &DeviceParams,
    bias: &BiasPoint,
    grid: &GridSpec,
) -> Result<PotentialGrid> {
    if grid.n1 < 3 || grid.n2 < 3 || !(grid.hi > grid.lo) {
        return Err(JcpmError::InvalidParameter {
            name: "grid",
            reason: format!("need n1, n2 >= 3 and hi > lo, got {grid:?}"),
        });
    }
    let pot = QubitPotential::new(params, bias);
    let axis = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| grid.lo + (grid.hi - grid.lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let phi1 = axis(grid.n1);
    let phi2 = axis(grid.n2);
    let mut values = Vec::with_capacity(grid.n1 * grid.n2);
    for &a in &phi1 {
        for &b in &phi2 {
            values.push(pot.value(a, b));
        }
    }
    let w = grid.n2;
    let (lo_u, hi_u) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    let mut minima: Vec<PotentialMinimum> = Vec::new();
    if hi_u - lo_u > 1e-12 * hi_u.abs().max(lo_u.abs()).max(1.0) {
        for i in 1..grid.n1 - 1 {
            for j in 1..grid.n2 - 1 {
                let u = values[i * w + j];
                let is_min = (-1i64..=1).all(|di| {
                    (-1i64..=1).all(|dj| {
                        let ii = (i as i64 + di) as usize;
                        let jj = (j as i64 + dj) as usize;
                        u <= values[ii * w + jj]
                    })
                });
                if !is_min {
                    continue;
                }
                let p = pot.refine([phi1[i], phi2[j]]);
                let inside = |x: f64| x >= grid.lo - 1e-9 && x <= grid.hi + 1e-9;
                if !inside(p[0]) || !inside(p[1]) || !pot.is_minimum(p) {
                    continue;
                }
                if minima
                    .iter()
                    .any(|m| (m.phi1 - p[0]).hypot(m.phi2 - p[1]) < 1e-6)
                {
                    continue;
                }
                minima.push(PotentialMinimum {
                    phi1: p[0],
                    phi2: p[1],
                    u: pot.value(p[0], p[1]),
                    class: 0,
                });
            }
        }
    }
    minima.sort_by(|a, b| {
        a.u.partial_cmp(&b.u)
            .unwrap()
            .then((a.phi1 + a.phi2).partial_cmp(&(b.phi1 + b.phi2)).unwrap())
    });
    let reduce = |x: f64| {
        let r = x.rem_euclid(2.0 * PI);
        if 2.0 * PI - r < 1e-6 {
            0.0
        } else {
            r
        }
    };
    let mut reps: Vec<(f64, f64)> = Vec::new();
    for m in minima.iter_mut() {
        let key = (reduce(m.phi1), reduce(m.phi2));
        let class = reps
            .iter()
            .position(|r| (r.0 - key.0).abs() < 1e-6 && (r.1 - key.1).abs() < 1e-6)
            .unwrap_or_else(|| {
                reps.push(key);
                reps.len() - 1
            });
        m.class = class;
    }
    Ok(PotentialGrid {
        phi1,
        phi2,
        values,
        minima,
    })
}
