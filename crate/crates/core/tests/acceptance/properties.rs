use std::f64::consts::PI;

use faer::{c64, Mat};
use jcpm_core::circuit::quarter_wave_frequency;
use jcpm_core::disorder::{sample_device, wilson_interval, DisorderSpec, Z_95};
use jcpm_core::hamiltonian::build_charging_matrix;
use jcpm_core::hamiltonian::build_hamiltonian;
use jcpm_core::qubit::matrix_elements_of;
use jcpm_core::resonator::loaded_frequency;
use jcpm_core::spectral::{converged_spectrum, eigen_dense, eigensolve, DEFAULT_TOLERANCE};
use jcpm_core::{BiasPoint, DeviceParams, HilbertSpace, JunctionSet};
use proptest::prelude::*;

/// Cyclic Jacobi on a real symmetric matrix; eigenvalues ascending.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn hermitian(n: usize, raw: &[f64]) -> Mat<c64> {
    let mut m = Mat::<c64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let k = 2 * (i * n + j);
            let z = if i == j {
                c64::new(raw[k], 0.0)
            } else {
                c64::new(raw[k], raw[k + 1])
            };
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

fn random_hermitian() -> impl Strategy<Value = Mat<c64>> {
    (4usize..=40).prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |raw| hermitian(n, &raw))
    })
}

fn spectrum_at(p: &DeviceParams, b: &BiasPoint, ncut: usize, k: usize) -> Vec<f64> {
    let h = build_hamiltonian(p, b, HilbertSpace::new(ncut).unwrap(), 0.0).unwrap();
    eigensolve(&h, k).unwrap().eigenvalues
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

fn random_device() -> impl Strategy<Value = DeviceParams> {
    (
        50.0f64..400.0,
        50.0..400.0,
        20.0..400.0,
        1.5e-16f64..6e-16,
        1.5e-16f64..6e-16,
        0.5e-16f64..6e-16,
    )
        .prop_map(|(ej1, ej2, eja, c1, c2, ca)| {
            let mut p = DeviceParams::default();
            p.junctions = JunctionSet {
                ej1,
                ej2,
                ej_alpha: eja,
                c1,
                c2,
                c_alpha: ca,
            };
            p
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dense_eigenvalues_match_jacobi(m in random_hermitian()) {
        let n = m.nrows();
        // Real embedding [[Re, -Im], [Im, Re]] doubles every eigenvalue.
        let mut real = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                real[i][j] = z.re;
                real[i + n][j + n] = z.re;
                real[i][j + n] = -z.im;
                real[i + n][j] = z.im;
            }
        }
        let oracle: Vec<f64> = jacobi_eigenvalues(real).into_iter().step_by(2).collect();
        let (values, _) = eigen_dense(&m, n).unwrap();
        for (a, b) in values.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_with_small_residuals(m in random_hermitian()) {
        let n = m.nrows();
        let k = n.min(6);
        let (values, vecs) = eigen_dense(&m, k).unwrap();
        for i in 0..k {
            for j in 0..k {
                let dot = vecs.col(i).adjoint() * vecs.col(j);
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - c64::new(want, 0.0)).norm() < 1e-10);
            }
            let v = vecs.col(i);
            let r = &m * v - v * faer::Scale(c64::new(values[i], 0.0));
            prop_assert!(r.norm_l2() < 1e-10 * m.norm_max().max(1.0));
        }
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenvalues_survive_basis_permutation(m in random_hermitian(), seed in any::<u64>()) {
        let n = m.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted = Mat::<c64>::from_fn(n, n, |i, j| m[(perm[i], perm[j])]);
        let (a, _) = eigen_dense(&m, n).unwrap();
        let (b, _) = eigen_dense(&permuted, n).unwrap();
        prop_assert!(max_rel_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn hamiltonian_is_hermitian(ng1 in -2.0f64..2.0, ng2 in -2.0f64..2.0, phi in -7.0f64..7.0, psi in -PI..PI, ncut in 1usize..6) {
        let h = build_hamiltonian(&DeviceParams::default(), &BiasPoint::new(ng1, ng2, phi), HilbertSpace::new(ncut).unwrap(), psi).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12 * h.matrix.norm_max());
    }

    #[test]
    fn spectrum_is_charge_periodic(ng1 in -0.5f64..0.5, ng2 in -0.5f64..0.5, phi in 0.0f64..2.0 * PI) {
        let p = DeviceParams::default();
        let base = spectrum_at(&p, &BiasPoint::new(ng1, ng2, phi), 12, 4);
        let s1 = spectrum_at(&p, &BiasPoint::new(ng1 + 1.0, ng2, phi), 12, 4);
        let s2 = spectrum_at(&p, &BiasPoint::new(ng1, ng2 + 1.0, phi), 12, 4);
        prop_assert!(max_rel_diff(&base, &s1) < 1e-10);
        prop_assert!(max_rel_diff(&base, &s2) < 1e-10);
    }

    #[test]
    fn spectrum_is_inversion_symmetric(p in random_device(), ng1 in -1.0f64..1.0, ng2 in -1.0f64..1.0, phi in 0.0f64..2.0 * PI) {
        let a = spectrum_at(&p, &BiasPoint::new(ng1, ng2, phi), 8, 4);
        let b = spectrum_at(&p, &BiasPoint::new(-ng1, -ng2, phi), 8, 4);
        prop_assert!(max_rel_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn ground_energy_decreases_with_truncation(p in random_device(), ng1 in -1.0f64..1.0, ng2 in -1.0f64..1.0, phi in 0.0f64..2.0 * PI) {
        let b = BiasPoint::new(ng1, ng2, phi);
        let e: Vec<f64> = (1..=9).map(|n| spectrum_at(&p, &b, n, 1)[0]).collect();
        for w in e.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0), "{e:?}");
        }
    }

    #[test]
    fn symmetric_charging_matches_closed_form(alpha in 0.1f64..3.0, gamma in 0.0f64..0.5, cq in 1e-17f64..5e-15) {
        let mut p = DeviceParams::default();
        p.junctions = JunctionSet::symmetric(200.0, cq, alpha);
        p.gates.c_g = gamma * cq;
        let m = build_charging_matrix(&p).unwrap();
        let unit = (2.0 * jcpm_core::circuit::ELECTRON_CHARGE).powi(2) / jcpm_core::circuit::PLANCK / 1e9;
        let c_sigma = cq * (1.0 + gamma) * (1.0 + 2.0 * alpha + gamma);
        let diag = unit * (1.0 + alpha + gamma) / (2.0 * c_sigma);
        let cross = unit * alpha / c_sigma;
        prop_assert!((m.energy[0][0] - diag).abs() <= 1e-12 * diag);
        prop_assert!((m.cross_coefficient() - cross).abs() <= 1e-12 * cross);
    }

    #[test]
    fn loaded_frequency_is_monotone_below_quarter_wave(a in 1e-12f64..1e-7, b in 1e-12f64..1e-7) {
        let line = DeviceParams::default().line;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let f_lo = loaded_frequency(&line, lo).unwrap();
        let f_hi = loaded_frequency(&line, hi).unwrap();
        prop_assert!(f_hi <= f_lo);
        prop_assert!(f_lo < quarter_wave_frequency(&line));
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(n in 1usize..5000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).floor() as usize;
        let (lo, hi) = wilson_interval(k, n, Z_95);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-15 && p <= hi + 1e-15 && hi <= 1.0);
    }

    #[test]
    fn disorder_draws_are_keyed_by_index(seed in any::<u64>(), index in 0u64..10_000, sigma in 0.0f64..0.3) {
        let base = DeviceParams::default();
        let small = DisorderSpec { sigma_rel: sigma, n_samples: 1, seed, ..Default::default() };
        let large = DisorderSpec { n_samples: 100_000, ..small };
        let a = sample_device(&base, &small, index);
        prop_assert_eq!(a, sample_device(&base, &large, index));
        let j = a.junctions;
        prop_assert!([j.ej1, j.ej2, j.ej_alpha, j.c1, j.c2, j.c_alpha].iter().all(|v| *v > 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ground_sc_element_vanishes_at_parity_points(p in random_device(), q1 in 0usize..2, q2 in 0usize..2) {
        let b = BiasPoint::operating(q1 as f64, q2 as f64);
        let spec = converged_spectrum(&p, &b, 2, DEFAULT_TOLERANCE).unwrap();
        prop_assert!(matrix_elements_of(&p, &spec).sc[0][0].norm() < 1e-10);
    }
}
