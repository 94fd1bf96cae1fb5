use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nanophonon::config::Config;

mod error;
mod gate;
mod modes;
mod output;
mod setup;
mod study;

use error::CliError;
use output::{emit_csv, emit_json, Provenance};

const PRESETS: [(&str, &str); 6] = [
    ("fig1b", include_str!("../../../presets/fig1b.conf")),
    ("fig2c", include_str!("../../../presets/fig2c.conf")),
    ("fig3a", include_str!("../../../presets/fig3a.conf")),
    ("fig3b", include_str!("../../../presets/fig3b.conf")),
    ("figB1c", include_str!("../../../presets/figB1c.conf")),
    ("figD1b", include_str!("../../../presets/figD1b.conf")),
];

#[derive(Parser)]
#[command(
    name = "nanophonon",
    version,
    about = "Nanodiamond phonon modes and phonon-mediated NV gates"
)]
struct Cli {
    /// Worker threads for sweeps and parallel runs.
    #[arg(long, global = true, env = "NANOPHONON_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Config file (`key = value`, optional `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset (fig1b, fig2c, fig3a, fig3b, figB1c, figD1b).
    #[arg(long)]
    preset: Option<String>,
    /// Override a config key, e.g. `--set drive.kappa1=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeKind {
    Pbc,
    Sphere,
    Compare,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpAction {
    Dump,
}

#[derive(Subcommand)]
enum Command {
    /// Phonon modes: PBC lowest mode, elastic-sphere modes, or both vs diameter.
    Modes {
        kind: Option<ModeKind>,
        #[arg(long)]
        diameter_nm: Option<f64>,
        /// Diameter grid `start:stop:step` or list (pbc, compare).
        #[arg(long)]
        d_nm: Option<String>,
        #[arg(long)]
        lmax: Option<usize>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i32>,
        /// Probe points `r/R,theta,phi;...` for the sphere coupling columns.
        #[arg(long)]
        probe: Option<String>,
        #[arg(long)]
        chi_max: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Coupling η of one sphere mode on a cross-section grid.
    EtaMap {
        #[arg(long)]
        diameter_nm: Option<f64>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i32>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        nr: Option<usize>,
        #[arg(long)]
        ntheta: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Coefficient table (JSON) and optionally the operator matrices (CSV).
    Hamiltonian {
        action: DumpAction,
        /// lab, eff1, eff2, mw or dipolar.
        #[arg(long)]
        tier: Option<String>,
        #[arg(long)]
        fock: Option<usize>,
        /// Write non-zero matrix entries here.
        #[arg(long)]
        matrices: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Two-centre gate dynamics: trajectory CSV plus JSON report.
    GateSim {
        /// lab, eff1, eff2 or mw.
        #[arg(long)]
        tier: Option<String>,
        /// Comma list of none, echo_sz, echo_sy, echo_sx_pm, mw_frame_pulse.
        #[arg(long)]
        echo: Option<String>,
        /// JSON report path; the report goes to stderr when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Gate rate over decay rate versus diameter.
    Sweep {
        #[arg(long)]
        k1: Option<String>,
        #[arg(long)]
        k2: Option<String>,
        #[arg(long)]
        d_nm: Option<String>,
        #[arg(long)]
        subtract_second: bool,
        #[arg(long)]
        gamma_mhz: Option<f64>,
        /// JSON file with the ratio = 1 crossing diameters.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Effective model I against the closed-form propagator at a closure time.
    ExactCheck {
        #[arg(long)]
        k1: Option<f64>,
        #[arg(long)]
        k2: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        diameter_nm: Option<f64>,
        #[arg(long)]
        fock: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Optical and magnetic dipole couplings between two centres.
    Dipolar {
        /// Separation in nm, a distance (along x) or `x,y,z`.
        #[arg(long, allow_hyphen_values = true)]
        r_nm: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        p1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        p2: Option<String>,
        /// Also build the dipolar-corrected effective model from `drive.*`.
        #[arg(long)]
        gate: bool,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Modes { .. } => "modes",
            Command::EtaMap { .. } => "eta-map",
            Command::Hamiltonian { .. } => "hamiltonian",
            Command::GateSim { .. } => "gate-sim",
            Command::Sweep { .. } => "sweep",
            Command::ExactCheck { .. } => "exact-check",
            Command::Dipolar { .. } => "dipolar",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Modes { common, .. }
            | Command::EtaMap { common, .. }
            | Command::Hamiltonian { common, .. }
            | Command::GateSim { common, .. }
            | Command::Sweep { common, .. }
            | Command::ExactCheck { common, .. }
            | Command::Dipolar { common, .. } => common,
        }
    }

    /// Flag values as config assignments; they override file values.
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v: Vec<(&'static str, Option<String>)> = Vec::new();
        let s = |x: &Option<String>| x.clone();
        let n = |x: Option<f64>| x.map(|x| x.to_string());
        let u = |x: Option<usize>| x.map(|x| x.to_string());
        match self {
            Command::Modes {
                kind,
                diameter_nm,
                d_nm,
                lmax,
                nmax,
                m,
                probe,
                chi_max,
                ..
            } => {
                let kind = kind.map(|k| {
                    match k {
                        ModeKind::Pbc => "pbc",
                        ModeKind::Sphere => "sphere",
                        ModeKind::Compare => "compare",
                    }
                    .to_string()
                });
                v.extend([
                    ("modes.kind", kind),
                    ("geometry.diameter_nm", n(*diameter_nm)),
                    ("modes.d_nm", s(d_nm)),
                    ("modes.lmax", u(*lmax)),
                    ("modes.nmax", u(*nmax)),
                    ("modes.m", m.map(|x| x.to_string())),
                    ("modes.probe", s(probe)),
                    ("modes.chi_max", n(*chi_max)),
                ]);
            }
            Command::EtaMap {
                diameter_nm,
                family,
                l,
                m,
                n: nn,
                nr,
                ntheta,
                ..
            } => v.extend([
                ("geometry.diameter_nm", n(*diameter_nm)),
                ("eta_map.family", s(family)),
                ("eta_map.l", u(*l)),
                ("eta_map.m", m.map(|x| x.to_string())),
                ("eta_map.n", u(*nn)),
                ("eta_map.nr", u(*nr)),
                ("eta_map.ntheta", u(*ntheta)),
            ]),
            Command::Hamiltonian { tier, fock, .. } => {
                v.extend([("hamiltonian.tier", s(tier)), ("hamiltonian.fock_dim", u(*fock))])
            }
            Command::GateSim { tier, echo, .. } => v.extend([("gate.tier", s(tier)), ("gate.echo", s(echo))]),
            Command::Sweep {
                k1,
                k2,
                d_nm,
                subtract_second,
                gamma_mhz,
                ..
            } => v.extend([
                ("sweep.kappa1", s(k1)),
                ("sweep.kappa2", s(k2)),
                ("sweep.d_nm", s(d_nm)),
                ("sweep.subtract_second", subtract_second.then(|| "true".to_string())),
                ("sweep.gamma_mhz", n(*gamma_mhz)),
            ]),
            Command::ExactCheck {
                k1,
                k2,
                m,
                diameter_nm,
                fock,
                ..
            } => v.extend([
                ("exact.kappa1", n(*k1)),
                ("exact.kappa2", n(*k2)),
                ("exact.m", u(*m)),
                ("geometry.diameter_nm", n(*diameter_nm)),
                ("exact.fock_dim", u(*fock)),
            ]),
            Command::Dipolar { r_nm, p1, p2, gate, .. } => v.extend([
                ("dipolar.r_nm", s(r_nm)),
                ("dipolar.p1", s(p1)),
                ("dipolar.p2", s(p2)),
                ("dipolar.gate", gate.then(|| "true".to_string())),
            ]),
        }
        v.into_iter().filter_map(|(k, x)| x.map(|x| (k, x))).collect()
    }

    fn allowed_keys(&self, cfg: &Config) -> Vec<&'static str> {
        let mut keys = vec!["command"];
        match self {
            Command::Modes { .. } => keys.extend(modes::MODES_KEYS),
            Command::EtaMap { .. } => keys.extend(modes::ETA_MAP_KEYS),
            Command::Hamiltonian { .. } => {
                keys.extend(gate::HAMILTONIAN_KEYS);
                keys.extend(setup::DRIVE_KEYS);
            }
            Command::GateSim { .. } => {
                keys.extend(setup::GATE_KEYS);
                keys.extend(setup::DRIVE_KEYS);
            }
            Command::Sweep { .. } => keys.extend(study::SWEEP_KEYS),
            Command::ExactCheck { .. } => keys.extend(study::EXACT_KEYS),
            Command::Dipolar { .. } => {
                keys.extend(study::DIPOLAR_KEYS);
                if cfg.str("dipolar.gate") == Some("true") {
                    keys.extend(setup::DRIVE_KEYS);
                }
            }
        }
        keys
    }
}

fn located(origin: &str, e: nanophonon::Error) -> CliError {
    match e {
        nanophonon::Error::Config { line, message } => CliError::config(format!("{origin}:{line}: {message}")),
        other => other.into(),
    }
}

fn load_config(cmd: &Command) -> Result<Config, CliError> {
    let common = cmd.common();
    let mut cfg = match (&common.preset, &common.config) {
        (Some(_), Some(_)) => return Err(CliError::config("use either --preset or --config, not both")),
        (Some(name), None) => {
            let text = PRESETS
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| *t)
                .ok_or_else(|| {
                    let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
                    CliError::config(format!("unknown preset `{name}` (known: {})", names.join(", ")))
                })?;
            Config::parse(text).map_err(|e| located(&format!("preset {name}"), e))?
        }
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            Config::parse(&text).map_err(|e| located(&path.display().to_string(), e))?
        }
        (None, None) => Config::new(),
    };
    for (k, v) in cmd.overrides() {
        cfg.set(k, v);
    }
    for a in &common.set {
        cfg.set_assignment(a)?;
    }
    if let Some(c) = cfg.str("command") {
        if c != cmd.name() {
            return Err(cfg
                .error("command", format!("config is for `{c}`, not `{}`", cmd.name()))
                .into());
        }
    }
    cfg.check_known(&cmd.allowed_keys(&cfg))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("threads: {e}")))?;
    }
    let cmd = &cli.command;
    let cfg = load_config(cmd)?;
    let prov = Provenance::new(cmd.name(), &cfg.canonical());
    let out = cmd.common().out.as_deref();
    let with_prov = |mut v: serde_json::Value| {
        v["provenance"] = prov.json();
        v
    };
    match cmd {
        Command::Modes { .. } => emit_csv(&modes::modes(&cfg)?, &prov, out),
        Command::EtaMap { .. } => emit_csv(&modes::eta_map(&cfg)?, &prov, out),
        Command::Hamiltonian {
            action: DumpAction::Dump,
            matrices,
            ..
        } => {
            let dump = gate::hamiltonian_dump(&cfg)?;
            if let Some(p) = matrices {
                emit_csv(&dump.matrices, &prov, Some(p))?;
            }
            emit_json(&with_prov(dump.coefficients), out)
        }
        Command::GateSim { report, .. } => {
            let g = gate::gate_sim(&cfg)?;
            emit_csv(&g.table, &prov, out)?;
            let rep = with_prov(g.report);
            match report {
                Some(p) => emit_json(&rep, Some(p)),
                None => {
                    eprintln!("{}", serde_json::to_string_pretty(&rep).map_err(CliError::io)?);
                    Ok(())
                }
            }
        }
        Command::Sweep { summary, .. } => {
            let s = study::sweep(&cfg)?;
            emit_csv(&s.table, &prov, out)?;
            let sum = with_prov(s.summary);
            match summary {
                Some(p) => emit_json(&sum, Some(p)),
                None => {
                    for c in sum["crossings"].as_array().into_iter().flatten() {
                        eprintln!("crossing: {c}");
                    }
                    Ok(())
                }
            }
        }
        Command::ExactCheck { .. } => emit_json(&with_prov(study::exact(&cfg)?), out),
        Command::Dipolar { .. } => emit_json(&with_prov(study::dipolar(&cfg)?), out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nanophonon: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
