//! Dense Hermitian eigensolver and truncation-convergence loop.

use faer::{c64, Mat, Side};

use crate::circuit::{BiasPoint, DeviceParams};
use crate::error::{JcpmError, Result};
use crate::hamiltonian::{build_hamiltonian, HilbertSpace, QubitHamiltonian};

/// Lowest eigenpairs of a qubit Hamiltonian together with the truncation
/// they were certified at.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending, GHz.
    pub eigenvalues: Vec<f64>,
    /// `dim × k`, orthonormal columns, phase-fixed.
    pub eigenvectors: Mat<c64>,
    pub k_requested: usize,
    pub ncut_used: usize,
    pub converged: bool,
    /// Max relative change of the lowest `k` eigenvalues from `ncut_used` to
    /// `ncut_used + 2`. Zero when no convergence study was run.
    pub conv_residual: f64,
}

impl SpectrumResult {
    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::new(self.ncut_used).expect("ncut_used is always a valid truncation")
    }

    /// Column `i` as a plain vector.
    pub fn state(&self, i: usize) -> Vec<c64> {
        self.eigenvectors.col(i).iter().copied().collect()
    }

    /// `E1 - E0`, or `None` if fewer than two levels were computed.
    pub fn splitting(&self) -> Option<f64> {
        (self.eigenvalues.len() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }
}

fn check_k(k: usize, dim: usize) -> Result<()> {
    if k == 0 || k > dim {
        return Err(JcpmError::TooManyEigenpairs { requested: k, dim });
    }
    Ok(())
}

/// Scales `v` so that its largest-magnitude entry is real and positive. Ties
/// (within 1e-10 relative) go to the lowest index.
pub fn fix_phase(v: &mut [c64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-10))
        .unwrap_or(0);
    let p = v[pivot];
    let rot = p.conj() / p.norm();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[pivot] = c64::new(v[pivot].norm(), 0.0);
}

fn is_real_matrix(m: &Mat<c64>) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| m[(i, j)].im == 0.0))
}

/// Lowest `k` eigenpairs of a dense Hermitian matrix.
pub fn eigen_dense(m: &Mat<c64>, k: usize) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = m.nrows();
    check_k(k, n)?;
    let mut vectors = Mat::<c64>::zeros(n, k);
    let values: Vec<f64>;
    if is_real_matrix(m) {
        let re = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let evd = re
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| JcpmError::Eigen {
                dim: n,
                reason: format!("{e:?}"),
            })?;
        let s = evd.S().column_vector();
        values = (0..k).map(|i| s[i]).collect();
        let u = evd.U();
        for j in 0..k {
            for i in 0..n {
                vectors[(i, j)] = c64::new(u[(i, j)], 0.0);
            }
        }
    } else {
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| JcpmError::Eigen {
                dim: n,
                reason: format!("{e:?}"),
            })?;
        let s = evd.S().column_vector();
        values = (0..k).map(|i| s[i].re).collect();
        let u = evd.U();
        for j in 0..k {
            for i in 0..n {
                vectors[(i, j)] = u[(i, j)];
            }
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(JcpmError::NonFinite("eigenvalue"));
    }
    for j in 0..k {
        let mut col: Vec<c64> = vectors.col(j).iter().copied().collect();
        fix_phase(&mut col);
        for (i, z) in col.into_iter().enumerate() {
            vectors[(i, j)] = z;
        }
    }
    Ok((values, vectors))
}

/// Lowest `k` eigenvalues only.
pub fn eigenvalues_dense(m: &Mat<c64>, k: usize) -> Result<Vec<f64>> {
    let n = m.nrows();
    check_k(k, n)?;
    let err = |e: faer::linalg::evd::EvdError| JcpmError::Eigen {
        dim: n,
        reason: format!("{e:?}"),
    };
    let all: Vec<f64> = if is_real_matrix(m) {
        Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re)
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(err)?
    } else {
        m.self_adjoint_eigenvalues(Side::Lower).map_err(err)?
    };
    let out: Vec<f64> = all.into_iter().take(k).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(JcpmError::NonFinite("eigenvalue"));
    }
    Ok(out)
}

/// Lowest `k` eigenpairs at the Hamiltonian's own truncation, with no
/// convergence study.
pub fn eigensolve(h: &QubitHamiltonian, k: usize) -> Result<SpectrumResult> {
    let (eigenvalues, eigenvectors) = eigen_dense(&h.matrix, k)?;
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        k_requested: k,
        ncut_used: h.space.ncut(),
        converged: false,
        conv_residual: 0.0,
    })
}

/// Settings for [`converged_spectrum_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOptions {
    pub start_ncut: usize,
    pub step: usize,
    /// Largest truncation ever diagonalised, including the comparison level.
    pub max_ncut: usize,
    /// Termination phase passed to the Hamiltonian builder.
    pub psi: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self {
            start_ncut: HilbertSpace::DEFAULT_NCUT,
            step: 2,
            max_ncut: 24,
            psi: 0.0,
        }
    }
}

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Relative change between two eigenvalue lists, scaled by the largest
/// magnitude among them.
pub fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    let scale = a
        .iter()
        .chain(b)
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

pub fn converged_spectrum(
    params: &DeviceParams,
    bias: &BiasPoint,
    k: usize,
    tol: f64,
) -> Result<SpectrumResult> {
    converged_spectrum_with(params, bias, k, tol, &ConvergenceOptions::default())
}

/// Grows the truncation in steps until the lowest `k` eigenvalues move by
/// less than `tol` (relative) on the next step.
pub fn converged_spectrum_with(
    params: &DeviceParams,
    bias: &BiasPoint,
    k: usize,
    tol: f64,
    opts: &ConvergenceOptions,
) -> Result<SpectrumResult> {
    if !(tol >= 0.0) {
        return Err(JcpmError::InvalidParameter {
            name: "tol",
            reason: format!("must be non-negative, got {tol}"),
        });
    }
    if opts.step == 0 {
        return Err(JcpmError::InvalidParameter {
            name: "step",
            reason: "must be at least 1".into(),
        });
    }
    let mut ncut = opts.start_ncut.max(1);
    let mut residual = f64::INFINITY;
    while ncut + opts.step <= opts.max_ncut {
        let space = HilbertSpace::new(ncut)?;
        let h = build_hamiltonian(params, bias, space, opts.psi)?;
        let mut spec = eigensolve(&h, k)?;
        let finer = HilbertSpace::new(ncut + opts.step)?;
        let hf = build_hamiltonian(params, bias, finer, opts.psi)?;
        let finer_values = eigenvalues_dense(&hf.matrix, k)?;
        residual = relative_change(&spec.eigenvalues, &finer_values);
        if residual < tol {
            spec.converged = true;
            spec.conv_residual = residual;
            return Ok(spec);
        }
        ncut += opts.step;
    }
    Err(JcpmError::NotConverged {
        cap: opts.max_ncut,
        residual,
        tol,
    })
}
