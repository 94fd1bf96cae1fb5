//! `gate-sim` and `hamiltonian dump`.

use rayon::prelude::*;
use serde_json::json;

use nanophonon::analysis::mw_gate;
use nanophonon::config::Config;
use nanophonon::dynamics::{simulate_gate, GateConfig, Manifold, ModelTier, Trajectory};
use nanophonon::hamiltonian as ham;
use nanophonon::operators::{HilbertSpace, Mat, TimeOp};

use crate::error::CliError;
use crate::output::{to_json, Table};
use crate::setup::{self, Tier};

pub const HAMILTONIAN_KEYS: [&str; 6] = [
    "hamiltonian.tier",
    "hamiltonian.fock_dim",
    "dipolar.r_nm",
    "dipolar.p1",
    "dipolar.p2",
    "dipolar.n_mean",
];

pub struct GateOutput {
    pub table: Table,
    pub report: serde_json::Value,
}

const TRAJ_HEADER: [&str; 9] = [
    "t_us", "pop_pp", "pop_mm", "pop_pm", "pop_mp", "pop_leak", "n_mean", "fidelity", "echo",
];

fn push_rows(table: &mut Table, traj: &Trajectory, echo: &str) {
    let col = |label: &str| traj.labels.iter().position(|l| l == label);
    let idx = ["pp", "mm", "pm", "mp"].map(col);
    for (i, &t) in traj.times.iter().enumerate() {
        let p = &traj.populations[i];
        let pops = idx.map(|k| k.map_or(0.0, |k| p[k]));
        let total: f64 = p.iter().sum();
        table.push(vec![
            (t * 1e6).into(),
            pops[0].into(),
            pops[1].into(),
            pops[2].into(),
            pops[3].into(),
            (total - pops.iter().sum::<f64>()).into(),
            traj.n_mean[i].into(),
            traj.fidelity.get(i).copied().unwrap_or(f64::NAN).into(),
            echo.into(),
        ]);
    }
}

pub fn gate_sim(cfg: &Config) -> Result<GateOutput, CliError> {
    let m = setup::material(cfg)?;
    let tier = setup::tier(cfg, "gate.tier", "eff1")?;
    let drive = setup::drive(cfg, &m, tier == Tier::Mw)?;
    let echoes = setup::echoes(cfg, drive.path)?;
    let n_th = setup::n_th(cfg)?;
    let fock = setup::fock_dim(cfg, n_th)?;
    let diss = setup::dissipation(cfg, &m, n_th)?;
    let mut opts = setup::evolve_options(cfg, n_th == 0.0 && diss.is_none())?;
    let mut table = Table::new(&TRAJ_HEADER);

    if tier == Tier::Mw {
        for k in ["gate.t_gate_us", "gate.m", "gate.theta_pi", "gate.initial", "gate.n_th"] {
            if cfg.contains(k) {
                return Err(cfg
                    .error(k, "the microwave gate runs from |g+1,g+1> for two closure periods")
                    .into());
            }
        }
        if diss.is_some() {
            return Err(CliError::config("dissipation is not available for the microwave tier"));
        }
        let rwa = cfg.bool_or("gate.rwa", false)?;
        opts.manifold = Some(Manifold::M2);
        let runs: Vec<_> = echoes
            .par_iter()
            .map(|&e| mw_gate(&drive, fock, e, rwa, &opts).map(|r| (e, r)))
            .collect::<nanophonon::Result<_>>()?;
        let mut reports = Vec::new();
        for (e, (traj, rep)) in &runs {
            push_rows(&mut table, traj, setup::echo_name(*e));
            reports.push(json!({ "echo": setup::echo_name(*e), "report": to_json(rep) }));
        }
        let report = json!({
            "tier": tier.as_str(),
            "fock_dim": fock,
            "rwa": rwa,
            "drive": to_json(&drive),
            "runs": reports,
        });
        return Ok(GateOutput { table, report });
    }

    if cfg.contains("gate.rwa") {
        return Err(cfg.error("gate.rwa", "only used by the microwave tier").into());
    }
    let (initial, manifold) = setup::initial(cfg)?;
    let eff1 = ham::effective_i_model(&drive)?;
    let hs2 = HilbertSpace::new(2, 2, 4)?;
    let (eff2, _) = ham::effective_ii(&eff1, &hs2)?;
    let t_gate = setup::gate_time(cfg, drive.delta_eps(), eff2.omega_gate.unwrap_or(0.0))?;
    let model_tier = match tier {
        Tier::Lab => ModelTier::Lab,
        Tier::Eff1 => ModelTier::EffectiveI,
        _ => ModelTier::EffectiveII,
    };
    let configs: Vec<GateConfig> = echoes
        .iter()
        .map(|&echo| GateConfig {
            drive: drive.clone(),
            tier: model_tier,
            fock_dim: fock,
            t_gate,
            echo,
            n_th,
            initial,
            manifold,
            dissipation: diss,
            options: opts.clone(),
        })
        .collect();
    let runs: Vec<_> = configs
        .par_iter()
        .map(simulate_gate)
        .collect::<nanophonon::Result<_>>()?;
    let mut reports = Vec::new();
    for (cfg_i, (traj, rep)) in configs.iter().zip(&runs) {
        let name = setup::echo_name(cfg_i.echo);
        push_rows(&mut table, traj, name);
        reports.push(json!({ "echo": name, "report": to_json(rep) }));
    }
    let report = json!({
        "tier": tier.as_str(),
        "fock_dim": fock,
        "n_th": n_th,
        "dissipation": diss.is_some(),
        "drive": to_json(&drive),
        "warnings": drive.warnings(),
        "runs": reports,
    });
    Ok(GateOutput { table, report })
}

pub struct Dump {
    pub coefficients: serde_json::Value,
    pub matrices: Table,
}

fn matrix_rows(table: &mut Table, name: &str, op: &TimeOp) {
    for (k, (mat, w)) in op.terms.iter().enumerate() {
        push_matrix(table, name, k, *w, mat);
    }
}

fn push_matrix(table: &mut Table, name: &str, term: usize, omega: f64, mat: &Mat) {
    for j in 0..mat.ncols() {
        for i in 0..mat.nrows() {
            let z = mat[(i, j)];
            if z.norm() > 0.0 {
                table.push(vec![
                    name.into(),
                    term.into(),
                    omega.into(),
                    i.into(),
                    j.into(),
                    z.re.into(),
                    z.im.into(),
                ]);
            }
        }
    }
}

pub fn hamiltonian_dump(cfg: &Config) -> Result<Dump, CliError> {
    let m = setup::material(cfg)?;
    let tier = cfg.str_or("hamiltonian.tier", "eff1");
    let fock = cfg.usize_or("hamiltonian.fock_dim", 4)?;
    if fock < 4 {
        return Err(cfg.error("hamiltonian.fock_dim", "need at least 4 Fock levels").into());
    }
    let drive = setup::drive(cfg, &m, tier == "mw")?;
    let mut matrices = Table::new(&["operator", "term", "omega_rad_s", "row", "col", "re", "im"]);
    let hs2 = HilbertSpace::new(2, 2, fock)?;
    let hs3 = HilbertSpace::new(3, 2, fock)?;
    let coefficients = match tier {
        "lab" => {
            let h = ham::rotating_frame_hamiltonian(&drive, &hs3)?;
            matrix_rows(&mut matrices, "h", &h);
            json!({ "basis": "levels {g+1, g-1, e} per centre (x) Fock", "warnings": drive.warnings() })
        }
        "eff1" => {
            let (model, h) = ham::effective_i(&drive, &hs2)?;
            matrix_rows(&mut matrices, "h", &h);
            to_json(&model)
        }
        "eff2" => {
            let eff1 = ham::effective_i_model(&drive)?;
            let (model, h) = ham::effective_ii(&eff1, &hs2)?;
            push_matrix(&mut matrices, "h", 0, 0.0, &h);
            to_json(&model)
        }
        "mw" => {
            let (co, h_mw, rest) = ham::mw_hamiltonian(&drive, &hs3)?;
            push_matrix(&mut matrices, "h_mw", 0, 0.0, &h_mw);
            matrix_rows(&mut matrices, "h_rest", &rest);
            json!({ "coefficients": to_json(&co), "warnings": ham::mw_warnings(&drive, &co) })
        }
        "dipolar" => {
            let (j_opt, j_mag, a) = setup::dipolar(cfg, &m)?;
            let n_mean = cfg.f64_or("dipolar.n_mean", 0.0)?;
            let drives = [drive.clone(), drive.clone()];
            let (model, h) = ham::effective_i_dipolar(&drives, j_opt, j_mag, n_mean, &hs2)?;
            matrix_rows(&mut matrices, "h", &h);
            let (m1, m2) = ham::dipolar_gate_rates(&model);
            json!({ "angular_factor": a, "model": to_json(&model), "gate_rate_m1": m1, "gate_rate_m2": m2 })
        }
        other => {
            return Err(cfg
                .error(
                    "hamiltonian.tier",
                    format!("expected lab, eff1, eff2, mw or dipolar, got `{other}`"),
                )
                .into())
        }
    };
    Ok(Dump {
        coefficients: json!({
            "tier": tier,
            "fock_dim": fock,
            "drive": to_json(&drive),
            "coefficients": coefficients,
        }),
        matrices,
    })
}
