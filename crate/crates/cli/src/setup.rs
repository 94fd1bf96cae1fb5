//! Config keys to physics objects. All unit conversion happens here.

use std::f64::consts::{PI, TAU};

use nanophonon::config::{material_from_config, Config};
use nanophonon::dynamics::{
    default_fock_dim, path_default_echo, DissipationConfig, EvolveOptions, Manifold, PulseKind, StepControl,
};
use nanophonon::hamiltonian::{self as ham, DriveConfig, Path};
use nanophonon::material::{sphere, MaterialModel};
use nanophonon::operators::nv;
use nanophonon::phonon_pbc::lowest_mode;

use crate::error::CliError;

pub const MHZ: f64 = TAU * 1e6;

pub const DRIVE_KEYS: [&str; 12] = [
    "geometry.diameter_nm",
    "drive.path",
    "drive.kappa1",
    "drive.kappa2",
    "drive.omega2_scale",
    "drive.compensate_eta2",
    "drive.include_carrier",
    "drive.omega1_mhz",
    "drive.eps1_ghz",
    "drive.delta_eps_khz",
    "drive.omega_mw_mhz",
    "material.*",
];

pub fn material(cfg: &Config) -> Result<MaterialModel<f64>, CliError> {
    Ok(material_from_config(cfg)?)
}

/// Diameter in metres from `geometry.diameter_nm`.
pub fn diameter(cfg: &Config, default_nm: f64) -> Result<f64, CliError> {
    let d = cfg.f64_or("geometry.diameter_nm", default_nm)?;
    if !(d > 0.0) {
        return Err(cfg.error("geometry.diameter_nm", "must be positive").into());
    }
    Ok(d * 1e-9)
}

pub fn positive(cfg: &Config, key: &str, default: f64) -> Result<f64, CliError> {
    let v = cfg.f64_or(key, default)?;
    if !(v > 0.0) {
        return Err(cfg.error(key, format!("must be positive, got {v}")).into());
    }
    Ok(v)
}

pub fn path(cfg: &Config) -> Result<Path, CliError> {
    match cfg.str_or("drive.path", "dp") {
        "dp" | "double_path" => Ok(Path::DoublePath),
        "sp" | "single_path" => Ok(Path::SinglePath),
        other => Err(cfg
            .error("drive.path", format!("expected dp or sp, got `{other}`"))
            .into()),
    }
}

/// `(η, ν)` of the lowest PBC mode of the configured sphere.
pub fn mode(cfg: &Config, m: &MaterialModel<f64>) -> Result<(f64, f64), CliError> {
    let mode = lowest_mode(&sphere(diameter(cfg, 15.0)?, m)?, m)?;
    Ok((mode.eta, mode.nu))
}

/// Two-centre drive designed from `κ₁, κ₂`, or the explicit microwave-gate
/// drive when `microwave` is set.
pub fn drive(cfg: &Config, m: &MaterialModel<f64>, microwave: bool) -> Result<DriveConfig, CliError> {
    let (eta, nu) = mode(cfg, m)?;
    if microwave {
        let need = |k: &str| -> Result<f64, CliError> {
            cfg.f64(k)?
                .ok_or_else(|| CliError::config(format!("key `{k}` is required for the microwave gate")))
        };
        let o1 = need("drive.omega1_mhz")? * MHZ;
        let e1 = need("drive.eps1_ghz")? * TAU * 1e9;
        let de = need("drive.delta_eps_khz")? * TAU * 1e3;
        let omw = cfg.f64_or("drive.omega_mw_mhz", 10.0)? * MHZ;
        if path(cfg)? != Path::SinglePath && cfg.contains("drive.path") {
            return Err(cfg
                .error("drive.path", "the microwave gate uses the single path")
                .into());
        }
        return Ok(DriveConfig::microwave(eta, nu, o1, e1, de, omw)?);
    }
    for k in ["drive.omega1_mhz", "drive.eps1_ghz", "drive.delta_eps_khz"] {
        if cfg.contains(k) {
            return Err(cfg
                .error(k, "explicit rates are only used by the microwave tier")
                .into());
        }
    }
    let mut d = DriveConfig::design(
        eta,
        nu,
        positive(cfg, "drive.kappa1", 0.05)?,
        positive(cfg, "drive.kappa2", 0.05)?,
        positive(cfg, "drive.omega2_scale", 1.0)?,
        path(cfg)?,
        2,
        cfg.bool_or("drive.compensate_eta2", false)?,
    )?;
    d.include_carrier = cfg.bool_or("drive.include_carrier", true)?;
    d.omega_mw = cfg.f64_or("drive.omega_mw_mhz", 0.0)? * MHZ;
    d.refresh();
    Ok(d)
}

pub const GATE_KEYS: [&str; 14] = [
    "gate.tier",
    "gate.echo",
    "gate.initial",
    "gate.fock_dim",
    "gate.n_th",
    "gate.t_gate_us",
    "gate.m",
    "gate.theta_pi",
    "gate.samples",
    "gate.rtol",
    "gate.atol",
    "gate.leak_tol",
    "gate.rwa",
    "dissipation.*",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Lab,
    Eff1,
    Eff2,
    Mw,
}

impl Tier {
    pub fn parse(s: &str) -> Option<Tier> {
        match s {
            "lab" => Some(Tier::Lab),
            "eff1" => Some(Tier::Eff1),
            "eff2" => Some(Tier::Eff2),
            "mw" => Some(Tier::Mw),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Tier::Lab => "lab",
            Tier::Eff1 => "eff1",
            Tier::Eff2 => "eff2",
            Tier::Mw => "mw",
        }
    }
}

pub fn tier(cfg: &Config, key: &str, default: &str) -> Result<Tier, CliError> {
    let s = cfg.str_or(key, default);
    Tier::parse(s).ok_or_else(|| {
        cfg.error(key, format!("expected lab, eff1, eff2 or mw, got `{s}`"))
            .into()
    })
}

/// Echo variants to run; `none` disables the echo.
pub fn echoes(cfg: &Config, path: Path) -> Result<Vec<Option<PulseKind>>, CliError> {
    let Some(list) = cfg.str("gate.echo") else {
        return Ok(vec![path_default_echo(path)]);
    };
    list.split(',')
        .map(|s| match s.trim() {
            "none" => Ok(None),
            name => PulseKind::parse(name)
                .map(Some)
                .map_err(|_| cfg.error("gate.echo", format!("unknown echo `{name}`")).into()),
        })
        .collect()
}

pub fn echo_name(e: Option<PulseKind>) -> &'static str {
    e.map_or("none", |k| k.as_str())
}

pub fn initial(cfg: &Config) -> Result<([usize; 2], Manifold), CliError> {
    let s = cfg.str_or("gate.initial", "pp");
    let lv = |ch: char| match ch {
        'p' => Some(nv::GP),
        'm' => Some(nv::GM),
        _ => None,
    };
    let chars: Vec<char> = s.chars().collect();
    match chars[..] {
        [a, b] if lv(a).is_some() && lv(b).is_some() => {
            let levels = [lv(a).unwrap(), lv(b).unwrap()];
            let manifold = if a == b { Manifold::M2 } else { Manifold::M1 };
            Ok((levels, manifold))
        }
        _ => Err(cfg
            .error("gate.initial", format!("expected pp, pm, mp or mm, got `{s}`"))
            .into()),
    }
}

pub fn dissipation(cfg: &Config, m: &MaterialModel<f64>, n_th: f64) -> Result<Option<DissipationConfig>, CliError> {
    if !cfg.bool_or("dissipation.enabled", false)? {
        for k in cfg.keys() {
            if k.starts_with("dissipation.") && k != "dissipation.enabled" {
                return Err(cfg
                    .error(k, "set dissipation.enabled = true to use dissipation keys")
                    .into());
            }
        }
        return Ok(None);
    }
    let gamma = match cfg.f64("dissipation.gamma_mhz")? {
        Some(g) => g * MHZ,
        None => m.gamma_e,
    };
    let q = match cfg.f64("dissipation.q_factor")? {
        Some(q) if q > 0.0 => q,
        Some(_) => return Err(cfg.error("dissipation.q_factor", "must be positive").into()),
        None => f64::INFINITY,
    };
    let mut d = DissipationConfig::new(gamma, q, n_th);
    d.two_channel = cfg.bool_or("dissipation.two_channel", false)?;
    d.secular_cutoff = cfg.f64("dissipation.secular_cutoff_mhz")?.map(|v| v * MHZ);
    for k in cfg.keys() {
        let known = [
            "dissipation.enabled",
            "dissipation.gamma_mhz",
            "dissipation.q_factor",
            "dissipation.two_channel",
            "dissipation.secular_cutoff_mhz",
        ];
        if k.starts_with("dissipation.") && !known.contains(&k) {
            return Err(cfg.error(k, "unknown key").into());
        }
    }
    Ok(Some(d))
}

/// Gate duration: `gate.t_gate_us`, else `gate.m` closure periods, else the
/// rotation `gate.theta_pi · π = Ω_gate t` (default π/2).
pub fn gate_time(cfg: &Config, delta_eps: f64, omega_gate: f64) -> Result<f64, CliError> {
    if let Some(t) = cfg.f64("gate.t_gate_us")? {
        if !(t > 0.0) {
            return Err(cfg.error("gate.t_gate_us", "must be positive").into());
        }
        return Ok(t * 1e-6);
    }
    if cfg.contains("gate.m") {
        let m = cfg.usize_or("gate.m", 1)?;
        if m == 0 {
            return Err(cfg.error("gate.m", "must be at least 1").into());
        }
        return Ok(TAU * m as f64 / delta_eps);
    }
    let theta = positive(cfg, "gate.theta_pi", 0.5)? * PI;
    if !(omega_gate.abs() > 0.0) {
        return Err(CliError::Numerical("gate rate is zero; set gate.t_gate_us".into()));
    }
    Ok(theta / omega_gate.abs())
}

pub fn evolve_options(cfg: &Config, pure: bool) -> Result<EvolveOptions, CliError> {
    let base = if pure {
        StepControl::tight()
    } else {
        StepControl::default()
    };
    let control = StepControl {
        rtol: positive(cfg, "gate.rtol", base.rtol)?,
        atol: positive(cfg, "gate.atol", base.atol)?,
        ..base
    };
    let samples = cfg.usize_or("gate.samples", 201)?;
    if samples < 2 {
        return Err(cfg.error("gate.samples", "need at least 2 samples").into());
    }
    Ok(EvolveOptions {
        n_samples: samples,
        control,
        leak_tol: positive(cfg, "gate.leak_tol", 1e-4)?,
        ..EvolveOptions::default()
    })
}

pub fn fock_dim(cfg: &Config, n_th: f64) -> Result<usize, CliError> {
    let f = cfg.usize_or("gate.fock_dim", default_fock_dim(n_th))?;
    if f < 4 {
        return Err(cfg.error("gate.fock_dim", "need at least 4 Fock levels").into());
    }
    Ok(f)
}

pub fn n_th(cfg: &Config) -> Result<f64, CliError> {
    let n = cfg.f64_or("gate.n_th", 0.0)?;
    if n < 0.0 {
        return Err(cfg.error("gate.n_th", "must be non-negative").into());
    }
    Ok(n)
}

/// Three-vector from a comma list; a single number is taken along x.
pub fn vector(cfg: &Config, key: &str, default: [f64; 3]) -> Result<[f64; 3], CliError> {
    match cfg.list(key)?.as_deref() {
        None => Ok(default),
        Some([x]) => Ok([*x, 0.0, 0.0]),
        Some([x, y, z]) => Ok([*x, *y, *z]),
        Some(_) => Err(cfg.error(key, "expected one or three numbers").into()),
    }
}

/// Dipolar couplings `(j_opt, j_mag, A)` from `dipolar.*`.
pub fn dipolar(cfg: &Config, m: &MaterialModel<f64>) -> Result<(f64, f64, f64), CliError> {
    let r = vector(cfg, "dipolar.r_nm", [10.0, 0.0, 0.0])?.map(|x| x * 1e-9);
    let p1 = vector(cfg, "dipolar.p1", [0.0, 0.0, 1.0])?;
    let p2 = vector(cfg, "dipolar.p2", [0.0, 0.0, 1.0])?;
    for (k, p) in [("dipolar.p1", p1), ("dipolar.p2", p2)] {
        if p.iter().all(|x| *x == 0.0) {
            return Err(cfg.error(k, "dipole axis must be non-zero").into());
        }
    }
    Ok(ham::dipolar_couplings(r, p1, p2, m)?)
}
