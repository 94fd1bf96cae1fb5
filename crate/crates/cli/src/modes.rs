//! `modes` and `eta-map`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use nanophonon::config::Config;
use nanophonon::material::{sphere, MaterialModel};
use nanophonon::phonon_pbc::lowest_mode;
use nanophonon::phonon_sphere::{coupling_eta_spherical, solve_mode, Family, SphereMode, CHI_MAX};

use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::setup;

pub const MODES_KEYS: [&str; 9] = [
    "modes.kind",
    "modes.d_nm",
    "modes.lmax",
    "modes.nmax",
    "modes.m",
    "modes.probe",
    "modes.chi_max",
    "geometry.diameter_nm",
    "material.*",
];

pub const ETA_MAP_KEYS: [&str; 10] = [
    "eta_map.family",
    "eta_map.l",
    "eta_map.m",
    "eta_map.n",
    "eta_map.nr",
    "eta_map.ntheta",
    "eta_map.phi",
    "modes.chi_max",
    "geometry.diameter_nm",
    "material.*",
];

const THZ: f64 = TAU * 1e12;

fn diameters(cfg: &Config, default_nm: f64) -> Result<Vec<f64>, CliError> {
    let ds = match cfg.grid("modes.d_nm")? {
        Some(v) => v,
        None => vec![setup::diameter(cfg, default_nm)? * 1e9],
    };
    if ds.iter().any(|d| !(*d > 0.0)) {
        return Err(cfg.error("modes.d_nm", "diameters must be positive").into());
    }
    Ok(ds)
}

fn chi_max(cfg: &Config) -> Result<f64, CliError> {
    setup::positive(cfg, "modes.chi_max", CHI_MAX)
}

pub fn modes(cfg: &Config) -> Result<Table, CliError> {
    let m = setup::material(cfg)?;
    match cfg.str_or("modes.kind", "pbc") {
        "pbc" => pbc(cfg, &m),
        "sphere" => sphere_modes(cfg, &m),
        "compare" => compare(cfg, &m),
        other => Err(cfg
            .error("modes.kind", format!("expected pbc, sphere or compare, got `{other}`"))
            .into()),
    }
}

fn pbc(cfg: &Config, m: &MaterialModel<f64>) -> Result<Table, CliError> {
    let mut t = Table::new(&["d_nm", "nu_THz", "eta"]);
    for d in diameters(cfg, 10.0)? {
        let mode = lowest_mode(&sphere(d * 1e-9, m)?, m)?;
        t.push(vec![d.into(), (mode.nu / THZ).into(), mode.eta.into()]);
    }
    Ok(t)
}

/// Probe points `r/R, θ, φ` separated by `;`.
fn probes(cfg: &Config) -> Result<Vec<[f64; 3]>, CliError> {
    let text = cfg.str_or("modes.probe", "0,0,0");
    text.split(';')
        .map(|p| match nanophonon::config::parse_list(p).as_deref() {
            Some(&[r, th, ph]) if (0.0..=1.0).contains(&r) => Ok([r, th, ph]),
            _ => Err(cfg
                .error(
                    "modes.probe",
                    format!("expected `r/R,theta,phi` with 0 <= r/R <= 1, got `{p}`"),
                )
                .into()),
        })
        .collect()
}

fn sphere_modes(cfg: &Config, m: &MaterialModel<f64>) -> Result<Table, CliError> {
    let d = setup::diameter(cfg, 10.0)?;
    if cfg.contains("modes.d_nm") {
        return Err(cfg
            .error("modes.d_nm", "sphere modes take a single geometry.diameter_nm")
            .into());
    }
    let lmax = cfg.usize_or("modes.lmax", 2)?;
    let nmax = cfg.usize_or("modes.nmax", 2)?;
    let mm = cfg.parse_m("modes.m")?;
    let probes = probes(cfg)?;
    let chi_max = chi_max(cfg)?;
    let geometry = sphere(d, m)?;
    let mut jobs = Vec::new();
    for l in 1..=lmax {
        jobs.push((Family::Torsional, l));
    }
    for l in 0..=lmax {
        jobs.push((Family::Spheroidal, l));
    }
    let solved: Vec<Vec<SphereMode<f64>>> = jobs
        .par_iter()
        .filter(|(_, l)| mm.unsigned_abs() as usize <= *l)
        .map(|&(family, l)| {
            (0..nmax)
                .map(|n| solve_mode(family, l, mm, n, &geometry, m, chi_max))
                .collect::<nanophonon::Result<Vec<_>>>()
        })
        .collect::<nanophonon::Result<_>>()?;
    let mut header: Vec<String> = ["family", "l", "m", "n", "chi", "nu_THz"].map(String::from).to_vec();
    header.extend((0..probes.len()).map(|i| format!("eta_at_{i}")));
    let mut t = Table::new(&header);
    for mode in solved.into_iter().flatten() {
        let mut row: Vec<Cell> = vec![
            mode.family.as_str().into(),
            mode.l.into(),
            mode.m.into(),
            mode.n.into(),
            mode.chi.into(),
            (mode.nu / THZ).into(),
        ];
        for p in &probes {
            row.push(coupling_eta_spherical(&mode, p[0] * mode.radius, p[1], p[2], m)?.into());
        }
        t.push(row);
    }
    Ok(t)
}

fn compare(cfg: &Config, m: &MaterialModel<f64>) -> Result<Table, CliError> {
    let chi_max = chi_max(cfg)?;
    let rows: Vec<Vec<Cell>> = diameters(cfg, 15.0)?
        .par_iter()
        .map(|&d| -> nanophonon::Result<Vec<Cell>> {
            let g = sphere(d * 1e-9, m)?;
            let pbc = lowest_mode(&g, m)?;
            let b = solve_mode(Family::Spheroidal, 0, 0, 0, &g, m, chi_max)?;
            let eta_b = coupling_eta_spherical(&b, 0.0, 0.0, 0.0, m)?.abs();
            Ok(vec![
                d.into(),
                (pbc.nu / THZ).into(),
                pbc.eta.into(),
                (b.nu / THZ).into(),
                eta_b.into(),
                (eta_b / pbc.eta).into(),
            ])
        })
        .collect::<nanophonon::Result<_>>()?;
    let mut t = Table::new(&[
        "d_nm",
        "nu_pbc_THz",
        "eta_pbc",
        "nu_breathing_THz",
        "eta_breathing",
        "eta_ratio",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn eta_map(cfg: &Config) -> Result<Table, CliError> {
    let m = setup::material(cfg)?;
    let family = match cfg.str_or("eta_map.family", "spheroidal") {
        "spheroidal" => Family::Spheroidal,
        "torsional" => Family::Torsional,
        other => {
            return Err(cfg
                .error(
                    "eta_map.family",
                    format!("expected spheroidal or torsional, got `{other}`"),
                )
                .into())
        }
    };
    let l = cfg.usize_or("eta_map.l", 0)?;
    let mm = cfg.parse_m("eta_map.m")?;
    let n = cfg.usize_or("eta_map.n", 0)?;
    let nr = cfg.usize_or("eta_map.nr", 41)?.max(2);
    let nth = cfg.usize_or("eta_map.ntheta", 61)?.max(2);
    let phi = cfg.f64_or("eta_map.phi", 0.0)?;
    let g = sphere(setup::diameter(cfg, 10.0)?, &m)?;
    let mode = solve_mode(family, l, mm, n, &g, &m, chi_max(cfg)?)?;
    let mut t = Table::new(&["x_nm", "z_nm", "r_nm", "theta", "phi", "eta"]);
    // Both half-planes φ and φ + π make up the cross-section.
    for half in [phi, phi + PI] {
        for i in 0..nr {
            let r = mode.radius * i as f64 / (nr - 1) as f64;
            for j in 0..nth {
                let th = PI * j as f64 / (nth - 1) as f64;
                let eta = coupling_eta_spherical(&mode, r, th, half, &m)?;
                let x = r * th.sin() * (half - phi).cos();
                let z = r * th.cos();
                t.push(vec![
                    (x * 1e9).into(),
                    (z * 1e9).into(),
                    (r * 1e9).into(),
                    th.into(),
                    half.into(),
                    eta.into(),
                ]);
            }
        }
    }
    Ok(t)
}

trait ParseM {
    fn parse_m(&self, key: &str) -> Result<i32, CliError>;
}

impl ParseM for Config {
    fn parse_m(&self, key: &str) -> Result<i32, CliError> {
        let v = self.f64_or(key, 0.0)?;
        if v.fract() != 0.0 || v.abs() > 1000.0 {
            return Err(self.error(key, "expected an integer").into());
        }
        Ok(v as i32)
    }
}
