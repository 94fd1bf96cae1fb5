//! `sweep`, `exact-check` and `dipolar`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde_json::json;

use nanophonon::analysis::{crossing_diameter, exact_check, sweep_point, SweepOptions};
use nanophonon::config::Config;
use nanophonon::dynamics::StepControl;
use nanophonon::hamiltonian::{self as ham, j_mag, j_opt, near_field_parameter, DriveConfig, Path};

use crate::error::CliError;
use crate::output::{to_json, Table};
use crate::setup::{self, MHZ};

pub const SWEEP_KEYS: [&str; 6] = [
    "sweep.kappa1",
    "sweep.kappa2",
    "sweep.d_nm",
    "sweep.subtract_second",
    "sweep.gamma_mhz",
    "material.*",
];

pub const EXACT_KEYS: [&str; 8] = [
    "exact.kappa1",
    "exact.kappa2",
    "exact.m",
    "exact.fock_dim",
    "exact.n_in",
    "exact.rtol",
    "geometry.diameter_nm",
    "material.*",
];

pub const DIPOLAR_KEYS: [&str; 6] = [
    "dipolar.r_nm",
    "dipolar.p1",
    "dipolar.p2",
    "dipolar.n_mean",
    "dipolar.gate",
    "material.*",
];

pub struct SweepOutput {
    pub table: Table,
    pub summary: serde_json::Value,
}

fn positive_list(cfg: &Config, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let v = cfg.list(key)?.unwrap_or_else(|| default.to_vec());
    if v.is_empty() || v.iter().any(|x| !(*x > 0.0)) {
        return Err(cfg.error(key, "values must be positive").into());
    }
    Ok(v)
}

pub fn sweep(cfg: &Config) -> Result<SweepOutput, CliError> {
    let m = setup::material(cfg)?;
    let k1s = positive_list(cfg, "sweep.kappa1", &[0.05])?;
    let k2s = positive_list(cfg, "sweep.kappa2", &[0.05, 0.1])?;
    if let Some(bad) = k1s.iter().find(|k| **k >= 1.0) {
        return Err(cfg
            .error("sweep.kappa1", format!("kappa1 = {bad} must be below 1"))
            .into());
    }
    let ds = cfg
        .grid("sweep.d_nm")?
        .unwrap_or_else(|| (5..=50).map(f64::from).collect());
    if ds.iter().any(|d| !(*d > 0.0)) {
        return Err(cfg.error("sweep.d_nm", "diameters must be positive").into());
    }
    let mut opts = SweepOptions::from_material(&m);
    opts.subtract_second = cfg.bool_or("sweep.subtract_second", false)?;
    if let Some(g) = cfg.f64("sweep.gamma_mhz")? {
        if !(g > 0.0) {
            return Err(cfg.error("sweep.gamma_mhz", "must be positive").into());
        }
        opts.gamma = g * MHZ;
    }
    let mut jobs = Vec::new();
    for &k1 in &k1s {
        for &k2 in &k2s {
            for &d in &ds {
                jobs.push((k1, k2, d));
            }
        }
    }
    let points: Vec<_> = jobs
        .par_iter()
        .map(|&(k1, k2, d)| sweep_point(&m, d * 1e-9, k1, k2, &opts))
        .collect::<nanophonon::Result<_>>()?;
    let mut table = Table::new(&[
        "d_nm",
        "kappa1",
        "kappa2",
        "eta",
        "nu_THz",
        "omega2_MHz",
        "omega_gate_kHz",
        "gamma_eff_kHz",
        "ratio",
    ]);
    for p in &points {
        table.push(vec![
            (p.diameter * 1e9).into(),
            p.kappa1.into(),
            p.kappa2.into(),
            p.eta.into(),
            (p.nu / TAU / 1e12).into(),
            (p.omega2 / MHZ).into(),
            (p.omega_gate / TAU / 1e3).into(),
            (p.gamma_eff / TAU / 1e3).into(),
            p.ratio.into(),
        ]);
    }
    let (lo, hi) = ds
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), d| (a.min(*d), b.max(*d)));
    let mut crossings = Vec::new();
    for &k1 in &k1s {
        for &k2 in &k2s {
            let d = crossing_diameter(&m, k1, k2, &opts, lo * 1e-9, hi * 1e-9)?;
            crossings.push(json!({ "kappa1": k1, "kappa2": k2, "crossing_d_nm": d.map(|d| d * 1e9) }));
        }
    }
    let summary = json!({
        "gamma_rad_s": opts.gamma,
        "subtract_second": opts.subtract_second,
        "crossings": crossings,
    });
    Ok(SweepOutput { table, summary })
}

pub fn exact(cfg: &Config) -> Result<serde_json::Value, CliError> {
    let m = setup::material(cfg)?;
    let (eta, nu) = setup::mode(cfg, &m)?;
    let k1 = setup::positive(cfg, "exact.kappa1", 0.05)?;
    let k2 = setup::positive(cfg, "exact.kappa2", 1.0 / (2.0 * 2f64.sqrt()))?;
    let periods = cfg.usize_or("exact.m", 2)?;
    if periods == 0 {
        return Err(cfg.error("exact.m", "must be at least 1").into());
    }
    let fock = cfg.usize_or("exact.fock_dim", 16)?;
    let n_in = cfg.usize_or("exact.n_in", 2)?;
    let d = DriveConfig::design(eta, nu, k1, k2, 1.0, Path::DoublePath, 2, true)?;
    let t = TAU * periods as f64 / d.delta_eps();
    let ctl = StepControl {
        rtol: setup::positive(cfg, "exact.rtol", StepControl::tight().rtol)?,
        ..StepControl::tight()
    };
    let r = exact_check(&d, t, fock, n_in, &ctl)?;
    Ok(json!({
        "m": periods,
        "fock_dim": fock,
        "infidelity": 1.0 - r.fidelity,
        "check": to_json(&r),
        "drive": to_json(&d),
    }))
}

pub fn dipolar(cfg: &Config) -> Result<serde_json::Value, CliError> {
    let m = setup::material(cfg)?;
    let (jo, jm, a) = setup::dipolar(cfg, &m)?;
    let r = setup::vector(cfg, "dipolar.r_nm", [10.0, 0.0, 0.0])?;
    let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt() * 1e-9;
    let mut out = json!({
        "r_nm": dist * 1e9,
        "angular_factor": a,
        "j_opt_rad_s": jo,
        "j_opt_MHz": jo / MHZ,
        "j_mag_rad_s": jm,
        "j_mag_kHz": jm / TAU / 1e3,
        "j_opt_unit_factor_MHz": j_opt(dist, &m) / MHZ,
        "j_mag_unit_factor_kHz": j_mag(dist) / TAU / 1e3,
        "near_field_parameter": near_field_parameter(dist, &m),
    });
    if cfg.bool_or("dipolar.gate", false)? {
        let d = setup::drive(cfg, &m, false)?;
        let hs = nanophonon::operators::HilbertSpace::new(2, 2, 4)?;
        let n_mean = cfg.f64_or("dipolar.n_mean", 0.0)?;
        let (model, _) = ham::effective_i_dipolar(&[d.clone(), d], jo, jm, n_mean, &hs)?;
        let (m1, m2) = ham::dipolar_gate_rates(&model);
        out["model"] = to_json(&model);
        out["gate_rate_m1_rad_s"] = json!(m1);
        out["gate_rate_m2_rad_s"] = json!(m2);
    }
    Ok(out)
}
