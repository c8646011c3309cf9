//! Two-island flux-qubit Hamiltonian in the Cooper-pair charge basis.
//!
//! Basis states `|n1, n2>` with `n_i ∈ [-ncut, ncut]` are enumerated row-major:
//! `index = (n1 + ncut) * (2 ncut + 1) + (n2 + ncut)`. The island phase
//! operator acts as `e^{iφ_i} |.., n_i, ..> = |.., n_i + 1, ..>`.

use faer::{c64, Mat};

use crate::circuit::{BiasPoint, DeviceParams, ELECTRON_CHARGE, GHZ, PLANCK};
use crate::error::{ensure_positive, JcpmError, Result};

/// Truncated charge space of the two islands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    ncut: usize,
}

impl HilbertSpace {
    pub const DEFAULT_NCUT: usize = 10;

    /// Any truncation that can hold a single charge shift.
    pub fn new(ncut: usize) -> Result<Self> {
        if ncut < 1 {
            return Err(JcpmError::TruncationTooSmall { ncut, min: 1 });
        }
        Ok(Self { ncut })
    }

    pub fn ncut(&self) -> usize {
        self.ncut
    }

    /// Number of charge states per island.
    pub fn width(&self) -> usize {
        2 * self.ncut + 1
    }

    pub fn dim(&self) -> usize {
        self.width() * self.width()
    }

    /// Basis index of `|n1, n2>`, or `None` outside the truncation.
    pub fn index(&self, n1: i64, n2: i64) -> Option<usize> {
        let n = self.ncut as i64;
        if n1.abs() > n || n2.abs() > n {
            return None;
        }
        Some(((n1 + n) as usize) * self.width() + (n2 + n) as usize)
    }

    /// Inverse of [`HilbertSpace::index`].
    pub fn charges(&self, index: usize) -> (i64, i64) {
        let n = self.ncut as i64;
        let w = self.width();
        ((index / w) as i64 - n, (index % w) as i64 - n)
    }

    /// Iterates `(index, n1, n2)` in basis order.
    pub fn states(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        (0..self.dim()).map(move |k| {
            let (n1, n2) = self.charges(k);
            (k, n1, n2)
        })
    }
}

impl Default for HilbertSpace {
    fn default() -> Self {
        Self {
            ncut: Self::DEFAULT_NCUT,
        }
    }
}

/// Node capacitance matrix of the two islands and its inverse as a charging
/// energy in GHz per Cooper pair squared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargingMatrix {
    /// `[[C1 + Cα + CG, -Cα], [-Cα, C2 + Cα + CG]]` (F).
    pub capacitance: [[f64; 2]; 2],
    /// `(2e)² (C⁻¹)_ij / 2h` in GHz. The kinetic energy is
    /// `Σ_ij energy[i][j] (n_i + ng_i)(n_j + ng_j)`.
    pub energy: [[f64; 2]; 2],
}

impl ChargingMatrix {
    /// Coefficient of `(n1 + ng1)(n2 + ng2)` in the kinetic energy.
    pub fn cross_coefficient(&self) -> f64 {
        2.0 * self.energy[0][1]
    }

    pub fn kinetic(&self, x1: f64, x2: f64) -> f64 {
        self.energy[0][0] * x1 * x1
            + self.energy[1][1] * x2 * x2
            + 2.0 * self.energy[0][1] * x1 * x2
    }
}

pub fn build_charging_matrix(params: &DeviceParams) -> Result<ChargingMatrix> {
    let j = &params.junctions;
    ensure_positive("junctions.c1_farad", j.c1)?;
    ensure_positive("junctions.c2_farad", j.c2)?;
    let c_g = params.gates.c_g;
    let a = j.c1 + j.c_alpha + c_g;
    let d = j.c2 + j.c_alpha + c_g;
    let b = -j.c_alpha;
    let det = a * d - b * b;
    // Relative to the diagonal scale so that farad-sized numbers do not trip it.
    if !(det.is_finite() && a > 0.0 && det > 1e-12 * a * d) {
        return Err(JcpmError::SingularCapacitance { det });
    }
    let scale = (2.0 * ELECTRON_CHARGE).powi(2) / (2.0 * PLANCK) / GHZ;
    let inv = [[d / det, -b / det], [-b / det, a / det]];
    Ok(ChargingMatrix {
        capacitance: [[a, b], [b, d]],
        energy: [
            [scale * inv[0][0], scale * inv[0][1]],
            [scale * inv[1][0], scale * inv[1][1]],
        ],
    })
}

/// Dense Hermitian qubit Hamiltonian at one bias point and termination phase.
#[derive(Debug, Clone)]
pub struct QubitHamiltonian {
    pub matrix: Mat<c64>,
    pub space: HilbertSpace,
    pub bias: BiasPoint,
    /// Classical phase of the resonator node (rad).
    pub psi: f64,
}

impl QubitHamiltonian {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Largest entry-wise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// True when every entry is real (ψ = 0 and Φq a multiple of π).
    pub fn is_real(&self) -> bool {
        let n = self.matrix.nrows();
        (0..n).all(|j| (0..n).all(|i| self.matrix[(i, j)].im == 0.0))
    }
}

/// `e^{iθ}` with rounding residue snapped away, so that multiples of π give
/// exactly real factors.
fn unit_phase(theta: f64) -> c64 {
    let snap = |v: f64| if v.abs() < 8.0 * f64::EPSILON { 0.0 } else { v };
    c64::new(snap(theta.cos()), snap(theta.sin()))
}

pub(crate) fn hermiticity_defect(m: &Mat<c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Assembles `H = T(n + ng) − EJ1 cos(φ1 − ψ) − EJ2 cos(φ2 − ψ) − EJα cos(φ2 − φ1 + Φq)`.
pub fn build_hamiltonian(
    params: &DeviceParams,
    bias: &BiasPoint,
    space: HilbertSpace,
    psi: f64,
) -> Result<QubitHamiltonian> {
    params.junctions.validate()?;
    bias.validate()?;
    if space.ncut() < 1 {
        return Err(JcpmError::TruncationTooSmall {
            ncut: space.ncut(),
            min: 1,
        });
    }
    let charging = build_charging_matrix(params)?;
    let j = &params.junctions;
    let dim = space.dim();
    let mut m = Mat::<c64>::zeros(dim, dim);

    let to_node = unit_phase(-psi);
    let loop_phase = unit_phase(bias.phi_q());
    let t1 = to_node * (-0.5 * j.ej1);
    let t2 = to_node * (-0.5 * j.ej2);
    let ta = loop_phase * (-0.5 * j.ej_alpha);

    for (k, n1, n2) in space.states() {
        let x1 = n1 as f64 + bias.ng1;
        let x2 = n2 as f64 + bias.ng2;
        m[(k, k)] = c64::new(charging.kinetic(x1, x2), 0.0);
        let mut hop = |target: Option<usize>, amp: c64| {
            if let Some(t) = target {
                m[(t, k)] += amp;
                m[(k, t)] += amp.conj();
            }
        };
        hop(space.index(n1 + 1, n2), t1);
        hop(space.index(n1, n2 + 1), t2);
        hop(space.index(n1 - 1, n2 + 1), ta);
    }

    Ok(QubitHamiltonian {
        matrix: m,
        space,
        bias: *bias,
        psi,
    })
}

/// Resonator coupling operators, normalised so that for identical outer
/// junctions they reduce to `sin(φ₊/2)cos(φ₋/2)` and `cos(φ₊/2)cos(φ₋/2)`:
/// `SC = (EJ1 sin φ1 + EJ2 sin φ2)/(EJ1 + EJ2)` and likewise `CC` with cosines.
#[derive(Debug, Clone)]
pub struct CouplingOperators {
    pub sc: Mat<c64>,
    pub cc: Mat<c64>,
}

pub fn coupling_operators(params: &DeviceParams, space: HilbertSpace) -> CouplingOperators {
    let j = &params.junctions;
    let total = j.ej1 + j.ej2;
    let (w1, w2) = if total > 0.0 {
        (j.ej1 / total, j.ej2 / total)
    } else {
        (0.5, 0.5)
    };
    let dim = space.dim();
    let mut sc = Mat::<c64>::zeros(dim, dim);
    let mut cc = Mat::<c64>::zeros(dim, dim);
    for (k, n1, n2) in space.states() {
        for (target, w) in [(space.index(n1 + 1, n2), w1), (space.index(n1, n2 + 1), w2)] {
            if let Some(t) = target {
                // <n+1| sin φ |n> = 1/(2i), <n+1| cos φ |n> = 1/2
                let s = c64::new(0.0, -0.5 * w);
                let c = c64::new(0.5 * w, 0.0);
                sc[(t, k)] += s;
                sc[(k, t)] += s.conj();
                cc[(t, k)] += c;
                cc[(k, t)] += c;
            }
        }
    }
    CouplingOperators { sc, cc }
}

/// `<v| e^{iφ1} |v>` and `<v| e^{iφ2} |v>` for a state in the charge basis.
pub fn phase_expectations(space: HilbertSpace, state: &[c64]) -> (c64, c64) {
    let mut e1 = c64::new(0.0, 0.0);
    let mut e2 = c64::new(0.0, 0.0);
    for (k, n1, n2) in space.states() {
        let amp = state[k];
        if let Some(t) = space.index(n1 + 1, n2) {
            e1 += state[t].conj() * amp;
        }
        if let Some(t) = space.index(n1, n2 + 1) {
            e2 += state[t].conj() * amp;
        }
    }
    (e1, e2)
}
