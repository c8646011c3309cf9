use std::f64::consts::PI;

use jcpm_core::circuit::{charging_energy_ec, quarter_wave_frequency};
use jcpm_core::config::Config;
use jcpm_core::derivatives::{omega_r_derivatives, omega_r_slope, OmegaDerivatives};
use jcpm_core::disorder::{yield_estimate, DisorderSpec};
use jcpm_core::metrics::{
    charge_sensitivity, detection_bandwidth, gate_report, noise_deviation, operating_points,
    quality_factor_from, snr_from, NoiseModel, ReadoutParams,
};
use jcpm_core::qubit::{
    jc_coupling_of, matrix_elements_of, potential_grid, splitting_of, GridSpec,
};
use jcpm_core::resonator::{solve_load, LoadOptions};
use jcpm_core::spectral::{converged_spectrum, DEFAULT_TOLERANCE};
use jcpm_core::{BiasPoint, DeviceParams};
use rayon::prelude::*;

use crate::output::{num, Run, Stats, Table};
use crate::{Cli, Experiment, QualityAxis};

type Computed = jcpm_core::Result<(Vec<f64>, Option<usize>)>;

struct Row {
    fields: Vec<String>,
    ncut: Option<usize>,
    ok: bool,
}

fn row(keys: Vec<String>, width: usize, result: Computed) -> Row {
    let mut fields = keys;
    match result {
        Ok((values, ncut)) => {
            debug_assert_eq!(values.len(), width);
            fields.extend(values.into_iter().map(num));
            fields.push("ok".into());
            Row {
                fields,
                ncut,
                ok: true,
            }
        }
        Err(e) => {
            fields.extend(std::iter::repeat("NaN".to_string()).take(width));
            fields.push(format!("error: {e}"));
            Row {
                fields,
                ncut: None,
                ok: false,
            }
        }
    }
}

fn gather(rows: Vec<Row>, table: &mut Table, stats: &mut Stats) {
    for r in rows {
        stats.record(r.ncut, r.ok);
        table.rows.push(r.fields);
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    config: &'a Config,
}

impl Ctx<'_> {
    fn device(&self) -> &DeviceParams {
        &self.config.device
    }

    fn q1(&self) -> f64 {
        self.cli.q_g1.unwrap_or(self.config.bias.q_g1_e())
    }

    fn q2(&self) -> f64 {
        self.cli.q_g2.unwrap_or(self.config.bias.q_g2_e())
    }

    fn phi(&self) -> f64 {
        self.cli.phi_x.unwrap_or(self.config.bias.phi_x_phi0())
    }

    /// Lab-unit bias that keeps the configured flux split.
    fn bias(&self, q1: f64, q2: f64, phi_x_phi0: f64) -> BiasPoint {
        BiasPoint {
            flux_split: self.config.bias.flux_split,
            ..BiasPoint::from_lab_units(q1, q2, phi_x_phi0)
        }
    }

    /// Both parity biases of the second island unless one is fixed.
    fn q2_curves(&self) -> Vec<f64> {
        self.cli.q_g2.map_or(vec![1.0, 0.0], |q| vec![q])
    }

    fn q1_curves(&self) -> Vec<f64> {
        self.cli.q_g1.map_or(vec![0.0, 1.0], |q| vec![q])
    }

    fn charge_axis(&self) -> Result<Vec<f64>, String> {
        axis(self.cli, (0.0, 2.0), 4.0, "e")
    }

    fn flux_axis(&self) -> Result<Vec<f64>, String> {
        axis(self.cli, (0.9, 1.1), 2.0, "Φ0")
    }

    fn readout(&self) -> Result<ReadoutParams, String> {
        let r = ReadoutParams {
            kappa_mhz: self.cli.kappa_mhz,
            n_photons: self.cli.n_photons,
            eta: self.cli.eta,
        };
        r.validate().map_err(|e| e.to_string())?;
        Ok(r)
    }
}

fn axis(cli: &Cli, default: (f64, f64), limit: f64, unit: &str) -> Result<Vec<f64>, String> {
    let (a, b) = (
        cli.start.unwrap_or(default.0),
        cli.stop.unwrap_or(default.1),
    );
    if cli.points < 2 {
        return Err(format!("--points must be at least 2, got {}", cli.points));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("sweep needs finite start < stop, got {a}..{b}"));
    }
    if a < -limit || b > limit {
        return Err(format!(
            "sweep {a}..{b} leaves the range [-{limit}, {limit}] {unit}"
        ));
    }
    let n = cli.points;
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

fn keys(q1: f64, q2: f64, phi: f64) -> Vec<String> {
    vec![num(q1), num(q2), num(2.0 * PI * phi)]
}

pub fn run(cli: &Cli, config: &Config) -> Result<Run, String> {
    let ctx = Ctx { cli, config };
    match cli.experiment {
        Experiment::SweepCharge => sweep_charge(&ctx),
        Experiment::SweepFlux => sweep_flux(&ctx),
        Experiment::QubitSpectrum => qubit_spectrum(&ctx),
        Experiment::MatrixElements => matrix_elements(&ctx),
        Experiment::GOverDelta => g_over_delta(&ctx),
        Experiment::Kerr => kerr(&ctx),
        Experiment::QualityFactor => quality_factor(&ctx),
        Experiment::Snr => snr(&ctx),
        Experiment::Sensitivity => sensitivity(&ctx),
        Experiment::Bandwidth => bandwidth(&ctx),
        Experiment::Gate => gate(&ctx),
        Experiment::PotentialGrid => potential(&ctx),
        Experiment::Yield => yield_run(&ctx),
        Experiment::ConsistencyCheck => consistency(&ctx),
        Experiment::DefaultConfig => Err("default-config writes no files".into()),
    }
}

/// Charge-sweep points `(q_G1, q_G2, Φx)` for every curve.
fn charge_points(ctx: &Ctx, curves: &[f64]) -> Result<Vec<(f64, f64, f64)>, String> {
    let axis = ctx.charge_axis()?;
    let phi = ctx.phi();
    Ok(curves
        .iter()
        .flat_map(|&q2| axis.iter().map(move |&q1| (q1, q2, phi)))
        .collect())
}

fn table_from<F>(
    ctx: &Ctx,
    name: &str,
    columns: &[&'static str],
    points: &[(f64, f64, f64)],
    f: F,
) -> Run
where
    F: Fn(&BiasPoint) -> Computed + Sync,
{
    // keys (3) and status (1) bracket the computed values
    let width = columns.len() - 4;
    let mut table = Table::new(name, columns);
    let mut stats = Stats::default();
    let rows: Vec<Row> = points
        .par_iter()
        .map(|&(q1, q2, phi)| (q1, q2, phi, f(&ctx.bias(q1, q2, phi))))
        .map(|(q1, q2, phi, r)| row(keys(q1, q2, phi), width, r))
        .collect();
    gather(rows, &mut table, &mut stats);
    Run {
        tables: vec![table],
        stats,
        failure: None,
    }
}

fn resonance(ctx: &Ctx, points: &[(f64, f64, f64)], name: &str) -> Run {
    let f0 = quarter_wave_frequency(&ctx.device().line);
    table_from(
        ctx,
        name,
        &[
            "q_G1_e",
            "q_G2_e",
            "Phix_rad",
            "omega_r_GHz",
            "delta_omega_r_MHz",
            "status",
        ],
        points,
        |b| {
            let s = solve_load(ctx.device(), b, &LoadOptions::default())?;
            Ok((
                vec![s.load.omega_r, (s.load.omega_r - f0) * 1e3],
                Some(s.spectrum.ncut_used),
            ))
        },
    )
}

fn sweep_charge(ctx: &Ctx) -> Result<Run, String> {
    let points = charge_points(ctx, &ctx.q2_curves())?;
    Ok(resonance(ctx, &points, "sweep-charge"))
}

fn sweep_flux(ctx: &Ctx) -> Result<Run, String> {
    let axis = ctx.flux_axis()?;
    let q2 = ctx.q2();
    let points: Vec<_> = ctx
        .q1_curves()
        .into_iter()
        .flat_map(|q1| axis.iter().map(move |&f| (q1, q2, f)))
        .collect();
    Ok(resonance(ctx, &points, "sweep-flux"))
}

fn qubit_spectrum(ctx: &Ctx) -> Result<Run, String> {
    let points = charge_points(ctx, &ctx.q2_curves())?;
    Ok(table_from(
        ctx,
        "qubit-spectrum",
        &[
            "q_G1_e",
            "q_G2_e",
            "Phix_rad",
            "E0_GHz",
            "E1_GHz",
            "E2_GHz",
            "omega_q_GHz",
            "ncut",
            "status",
        ],
        &points,
        |b| {
            let s = converged_spectrum(ctx.device(), b, 3, DEFAULT_TOLERANCE)?;
            let e = &s.eigenvalues;
            Ok((
                vec![e[0], e[1], e[2], e[1] - e[0], s.ncut_used as f64],
                Some(s.ncut_used),
            ))
        },
    ))
}

fn matrix_elements(ctx: &Ctx) -> Result<Run, String> {
    let points = charge_points(ctx, &ctx.q2_curves())?;
    Ok(table_from(
        ctx,
        "matrix-elements",
        &[
            "q_G1_e",
            "q_G2_e",
            "Phix_rad",
            "omega_q_GHz",
            "sc_00",
            "sc_11",
            "sc_01_abs",
            "cc_00",
            "cc_11",
            "cc_01_abs",
            "ncut",
            "status",
        ],
        &points,
        |b| {
            let s = converged_spectrum(ctx.device(), b, 2, DEFAULT_TOLERANCE)?;
            let m = matrix_elements_of(ctx.device(), &s);
            Ok((
                vec![
                    splitting_of(&s).omega_q,
                    m.sc[0][0].re,
                    m.sc[1][1].re,
                    m.sc[0][1].norm(),
                    m.cc[0][0].re,
                    m.cc[1][1].re,
                    m.cc[0][1].norm(),
                    s.ncut_used as f64,
                ],
                Some(s.ncut_used),
            ))
        },
    ))
}

fn g_over_delta(ctx: &Ctx) -> Result<Run, String> {
    let points = charge_points(ctx, &ctx.q2_curves())?;
    Ok(table_from(
        ctx,
        "g-over-delta",
        &[
            "q_G1_e",
            "q_G2_e",
            "Phix_rad",
            "omega_q_GHz",
            "omega_r_GHz",
            "g_GHz",
            "delta_GHz",
            "g_over_delta",
            "status",
        ],
        &points,
        |b| {
            let s = solve_load(ctx.device(), b, &LoadOptions::default())?;
            let c = jc_coupling_of(ctx.device(), &s.spectrum, &s.load);
            Ok((
                vec![c.omega_q, s.load.omega_r, c.g_01, c.delta, c.g_over_delta],
                Some(s.spectrum.ncut_used),
            ))
        },
    ))
}

fn kerr(ctx: &Ctx) -> Result<Run, String> {
    let points = charge_points(ctx, &ctx.q2_curves())?;
    Ok(table_from(
        ctx,
        "kerr",
        &[
            "q_G1_e",
            "q_G2_e",
            "Phix_rad",
            "omega_r_GHz",
            "L_eff_H",
            "p_L",
            "psi_J",
            "d4E_GHz",
            "K_kHz",
            "status",
        ],
        &points,
        |b| {
            let s = solve_load(ctx.device(), b, &LoadOptions::default())?;
            let l = &s.load;
            Ok((
                vec![l.omega_r, l.l_eff, l.p_l, l.psi_j, l.d4e, l.kerr_k * 1e6],
                Some(s.spectrum.ncut_used),
            ))
        },
    ))
}

const DERIVATIVE_COLUMNS: [&str; 7] = [
    "omega_r_GHz",
    "dw_dq1_GHz_per_e",
    "dw_dq2_GHz_per_e",
    "dw_dphi_GHz_per_phi0",
    "deviation_GHz",
    "Q",
    "ncut",
];

fn derivative_values(d: &OmegaDerivatives, noise: &NoiseModel) -> Vec<f64> {
    vec![
        d.omega_r,
        d.gradient[0],
        d.gradient[1],
        d.gradient[2],
        noise_deviation(d, noise),
        quality_factor_from(d, noise),
        d.ncut_used as f64,
    ]
}

fn quality_factor(ctx: &Ctx) -> Result<Run, String> {
    let cli = ctx.cli;
    if cli.axis == QualityAxis::Both && (cli.start.is_some() || cli.stop.is_some()) {
        return Err("--start/--stop need --axis charge or --axis flux".into());
    }
    let mut points: Vec<(&'static str, f64, f64, f64)> = Vec::new();
    if matches!(cli.axis, QualityAxis::Charge | QualityAxis::Both) {
        let (q2, phi) = (ctx.q2(), ctx.phi());
        points.extend(
            ctx.charge_axis()?
                .into_iter()
                .map(|q1| ("charge", q1, q2, phi)),
        );
    }
    if matches!(cli.axis, QualityAxis::Flux | QualityAxis::Both) {
        let (q1, q2) = (ctx.q1(), ctx.q2());
        points.extend(ctx.flux_axis()?.into_iter().map(|f| ("flux", q1, q2, f)));
    }
    let noise = NoiseModel::default();
    let mut columns = vec!["axis", "q_G1_e", "q_G2_e", "Phix_rad"];
    columns.extend(DERIVATIVE_COLUMNS);
    columns.push("status");
    let mut table = Table::new("quality-factor", &columns);
    let mut stats = Stats::default();
    let rows: Vec<Row> = points
        .par_iter()
        .map(|&(axis, q1, q2, phi)| {
            let r = omega_r_derivatives(ctx.device(), &ctx.bias(q1, q2, phi))
                .map(|d| (derivative_values(&d, &noise), Some(d.ncut_used)));
            let mut k = vec![axis.to_string()];
            k.extend(keys(q1, q2, phi));
            row(k, DERIVATIVE_COLUMNS.len(), r)
        })
        .collect();
    gather(rows, &mut table, &mut stats);
    Ok(Run {
        tables: vec![table],
        stats,
        failure: None,
    })
}

fn snr(ctx: &Ctx) -> Result<Run, String> {
    let noise = NoiseModel::default();
    let results: Vec<(BiasPoint, jcpm_core::Result<OmegaDerivatives>)> = operating_points()
        .par_iter()
        .map(|b| (*b, omega_r_derivatives(ctx.device(), b)))
        .collect();
    let report = snr_from(
        results
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok().cloned())
            .collect(),
        &noise,
    );
    let mut columns = vec!["q_G1_e", "q_G2_e", "Phix_rad"];
    columns.extend(DERIVATIVE_COLUMNS);
    columns.extend(["contrast_MHz", "snr", "status"]);
    let mut table = Table::new("snr", &columns);
    let mut stats = Stats::default();
    let rows = results
        .into_iter()
        .map(|(b, r)| {
            let r = r.map(|d| {
                let mut v = derivative_values(&d, &noise);
                v.extend([report.contrast * 1e3, report.snr]);
                (v, Some(d.ncut_used))
            });
            row(
                keys(b.q_g1_e(), b.q_g2_e(), b.phi_x_phi0()),
                DERIVATIVE_COLUMNS.len() + 2,
                r,
            )
        })
        .collect();
    gather(rows, &mut table, &mut stats);
    Ok(Run {
        tables: vec![table],
        stats,
        failure: None,
    })
}

/// `(q_G1, Result<(ω_r, slope)>)` along the charge sweep at fixed `q_G2`, `Φx`.
fn slopes(ctx: &Ctx) -> Result<Vec<(f64, jcpm_core::Result<(f64, f64)>)>, String> {
    let (q2, phi) = (ctx.q2(), ctx.phi());
    Ok(ctx
        .charge_axis()?
        .par_iter()
        .map(|&q1| (q1, omega_r_slope(ctx.device(), &ctx.bias(q1, q2, phi), 0)))
        .collect())
}

fn sensitivity(ctx: &Ctx) -> Result<Run, String> {
    let readout = ctx.readout()?;
    let (q2, phi) = (ctx.q2(), ctx.phi());
    let mut table = Table::new(
        "sensitivity",
        &[
            "q_G1_e",
            "q_G2_e",
            "Phix_rad",
            "omega_r_GHz",
            "slope_GHz_per_e",
            "S_q_e_per_sqrtHz",
            "status",
        ],
    );
    let mut stats = Stats::default();
    let rows = slopes(ctx)?
        .into_iter()
        .map(|(q1, r)| {
            let r = r.map(|(w, s)| (vec![w, s, charge_sensitivity(s, &readout)], None));
            row(keys(q1, q2, phi), 3, r)
        })
        .collect();
    gather(rows, &mut table, &mut stats);
    Ok(Run {
        tables: vec![table],
        stats,
        failure: None,
    })
}

fn bandwidth(ctx: &Ctx) -> Result<Run, String> {
    let readout = ctx.readout()?;
    if !(ctx.cli.delta_q.is_finite() && ctx.cli.delta_q > 0.0) {
        return Err(format!(
            "--delta-q must be positive, got {}",
            ctx.cli.delta_q
        ));
    }
    let scan = slopes(ctx)?;
    let mut stats = Stats::default();
    let mut best: Option<(f64, f64)> = None;
    for (q1, r) in &scan {
        stats.record(None, r.is_ok());
        if let Ok((_, s)) = r {
            if best.map_or(true, |(_, b)| s.abs() > b.abs()) {
                best = Some((*q1, *s));
            }
        }
    }
    let (q_at, slope) = best.ok_or("no charge point gave a slope")?;
    let mut table = Table::new(
        "bandwidth",
        &[
            "n_photons",
            "q_G1_e",
            "slope_GHz_per_e",
            "delta_q_e",
            "S_q_e_per_sqrtHz",
            "bandwidth_Hz",
            "status",
        ],
    );
    for n in 1..=100 {
        let r = ReadoutParams {
            n_photons: n as f64,
            ..readout
        };
        table.rows.push(
            [
                n as f64,
                q_at,
                slope,
                ctx.cli.delta_q,
                charge_sensitivity(slope, &r),
                detection_bandwidth(slope, &r, ctx.cli.delta_q),
            ]
            .into_iter()
            .map(num)
            .chain(["ok".to_string()])
            .collect(),
        );
    }
    Ok(Run {
        tables: vec![table],
        stats,
        failure: None,
    })
}

fn gate(ctx: &Ctx) -> Result<Run, String> {
    let noise = NoiseModel::default();
    let derivs: Vec<OmegaDerivatives> = operating_points()
        .par_iter()
        .map(|b| omega_r_derivatives(ctx.device(), b))
        .collect::<jcpm_core::Result<_>>()
        .map_err(|e| e.to_string())?;
    let mut stats = Stats::default();
    for d in &derivs {
        stats.record(Some(d.ncut_used), true);
    }
    let q_min = derivs
        .iter()
        .map(|d| quality_factor_from(d, &noise))
        .fold(f64::INFINITY, f64::min);
    let omega_r = derivs
        .iter()
        .find(|d| d.bias_lab[0] == 0.0 && d.bias_lab[1] == 1.0)
        .map(|d| d.omega_r)
        .unwrap_or(f64::NAN);
    let contrast = snr_from(derivs, &noise).contrast;
    let mut table = Table::new(
        "gate",
        &[
            "q_source",
            "theta_rad",
            "contrast_MHz",
            "t_gate_s",
            "omega_r_GHz",
            "Q",
            "delta_theta_rad",
            "fidelity",
            "status",
        ],
    );
    for (source, q) in [("operating-min", q_min), ("1e4", 1e4), ("1e5", 1e5)] {
        let r = gate_report(ctx.cli.theta, contrast, omega_r, q).map(|g| {
            (
                vec![
                    g.theta,
                    g.contrast_ghz * 1e3,
                    g.t_gate,
                    g.omega_r_ghz,
                    g.q,
                    g.delta_theta,
                    g.fidelity,
                ],
                None,
            )
        });
        table.rows.push(row(vec![source.to_string()], 7, r).fields);
    }
    Ok(Run {
        tables: vec![table],
        stats,
        failure: None,
    })
}

fn potential(ctx: &Ctx) -> Result<Run, String> {
    if ctx.cli.start.is_some() || ctx.cli.stop.is_some() {
        return Err(
            "potential-grid spans [-2π, 2π] in both phases; use --points for the resolution".into(),
        );
    }
    let grid = GridSpec {
        n1: ctx.cli.points,
        n2: ctx.cli.points,
        ..GridSpec::default()
    };
    let b = ctx.bias(ctx.q1(), ctx.q2(), ctx.phi());
    let g = potential_grid(ctx.device(), &b, &grid).map_err(|e| e.to_string())?;
    let mut values = Table::new(
        "potential-grid",
        &["phi1_rad", "phi2_rad", "U_GHz", "status"],
    );
    for (i, p1) in g.phi1.iter().enumerate() {
        for (j, p2) in g.phi2.iter().enumerate() {
            values
                .rows
                .push(vec![num(*p1), num(*p2), num(g.at(i, j)), "ok".into()]);
        }
    }
    let mut minima = Table::new(
        "potential-minima",
        &["phi1_rad", "phi2_rad", "U_GHz", "class", "status"],
    );
    for m in &g.minima {
        minima.rows.push(vec![
            num(m.phi1),
            num(m.phi2),
            num(m.u),
            m.class.to_string(),
            "ok".into(),
        ]);
    }
    let stats = Stats {
        points: values.rows.len(),
        ok: values.rows.len(),
        ..Stats::default()
    };
    Ok(Run {
        tables: vec![values, minima],
        stats,
        failure: None,
    })
}

fn yield_run(ctx: &Ctx) -> Result<Run, String> {
    let spec = DisorderSpec {
        sigma_rel: ctx.cli.sigma,
        n_samples: ctx.cli.n,
        seed: ctx.cli.seed,
        ..DisorderSpec::default()
    };
    let report = yield_estimate(ctx.device(), &spec).map_err(|e| e.to_string())?;
    let mut samples = Table::new(
        "yield",
        &[
            "index",
            "ej1_GHz",
            "ej2_GHz",
            "ej_alpha_GHz",
            "c1_F",
            "c2_F",
            "c_alpha_F",
            "omega_q_GHz",
            "contrast_MHz",
            "modulation",
            "pass_omega_q",
            "pass_modulation",
            "passed",
            "status",
        ],
    );
    let mut stats = Stats::default();
    for r in &report.records {
        stats.record(None, r.error.is_none());
        let j = r.junctions;
        let mut fields = vec![r.index.to_string()];
        fields.extend(
            [
                j.ej1,
                j.ej2,
                j.ej_alpha,
                j.c1,
                j.c2,
                j.c_alpha,
                r.omega_q,
                r.contrast * 1e3,
                r.modulation,
            ]
            .into_iter()
            .map(num),
        );
        fields.extend([r.pass_omega_q, r.pass_modulation, r.passed].map(|b| b.to_string()));
        fields.push(
            r.error
                .as_ref()
                .map_or("ok".into(), |e| format!("error: {e}")),
        );
        samples.rows.push(fields);
    }
    let mut summary = Table::new(
        "yield-summary",
        &[
            "sigma_rel",
            "seed",
            "n_samples",
            "n_pass",
            "n_fail",
            "n_error",
            "yield_fraction",
            "wilson_95_lo",
            "wilson_95_hi",
            "status",
        ],
    );
    summary.rows.push(vec![
        num(report.sigma_rel),
        report.seed.to_string(),
        report.n_samples.to_string(),
        report.n_pass.to_string(),
        report.n_fail.to_string(),
        report.n_error.to_string(),
        num(report.yield_fraction),
        num(report.wilson_95.0),
        num(report.wilson_95.1),
        "ok".into(),
    ]);
    Ok(Run {
        tables: vec![samples, summary],
        stats,
        failure: None,
    })
}

struct Check {
    name: String,
    value: f64,
    target: f64,
    tolerance: f64,
    passed: bool,
    status: String,
}

fn consistency(ctx: &Ctx) -> Result<Run, String> {
    let p = ctx.device();
    let mut checks = Vec::new();
    let f0 = quarter_wave_frequency(&p.line);
    checks.push(Check {
        name: "quarter_wave_GHz".into(),
        value: f0,
        target: 7.5,
        tolerance: 7.5e-3,
        passed: (f0 - 7.5).abs() <= 7.5e-3,
        status: "ok".into(),
    });
    match charging_energy_ec(p) {
        Ok(ec) => checks.push(Check {
            name: "charging_energy_GHz".into(),
            value: ec,
            target: 20.0,
            tolerance: 0.4,
            passed: (ec - 20.0).abs() <= 0.4,
            status: "ok".into(),
        }),
        Err(e) => checks.push(Check {
            name: "charging_energy_GHz".into(),
            value: f64::NAN,
            target: 20.0,
            tolerance: 0.4,
            passed: false,
            status: format!("error: {e}"),
        }),
    }

    let mut stats = Stats::default();
    let results: Vec<(BiasPoint, jcpm_core::Result<OmegaDerivatives>)> = operating_points()
        .par_iter()
        .map(|b| (*b, omega_r_derivatives(p, b)))
        .collect();
    let contrast = snr_from(
        results
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok().cloned())
            .collect(),
        &NoiseModel::default(),
    )
    .contrast;
    // First derivatives per unit e or Φ0 against the parity contrast per unit.
    let limit = 1e-4 * contrast;
    for (b, r) in &results {
        let name = format!("sweet_spot_q1_{}_q2_{}", b.q_g1_e(), b.q_g2_e());
        stats.record(r.as_ref().ok().map(|d| d.ncut_used), r.is_ok());
        checks.push(match r {
            Ok(d) => {
                let worst = d.gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
                Check {
                    name,
                    value: worst,
                    target: 0.0,
                    tolerance: limit,
                    passed: worst < limit,
                    status: "ok".into(),
                }
            }
            Err(e) => Check {
                name,
                value: f64::NAN,
                target: 0.0,
                tolerance: limit,
                passed: false,
                status: format!("error: {e}"),
            },
        });
    }

    let mut table = Table::new(
        "consistency-check",
        &["check", "value", "target", "tolerance", "passed", "status"],
    );
    let mut failed = Vec::new();
    for c in checks {
        if !c.passed {
            failed.push(c.name.clone());
        }
        table.rows.push(vec![
            c.name,
            num(c.value),
            num(c.target),
            num(c.tolerance),
            c.passed.to_string(),
            c.status,
        ]);
    }
    Ok(Run {
        tables: vec![table],
        stats,
        failure: (!failed.is_empty())
            .then(|| format!("consistency check failed: {}", failed.join(", "))),
    })
}
