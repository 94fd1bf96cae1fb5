//! Closed-form gate propagator, tier cross-checks, figure-of-merit sweeps and
//! closure-time bookkeeping.

use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::dynamics::{self as dyn_, EvolveOptions, PulseSchedule, State, StepControl};
use crate::error::{Error, Result};
use crate::hamiltonian::{self as ham, DriveConfig, Path};
use crate::material::{sphere, MaterialModel};
use crate::operators::{self as ops, c, kron, nv, HilbertSpace, Mat, C64, I};
use crate::phonon_pbc::lowest_mode;

// ------------------------------------------------------- exact propagator

/// `α(t) = -(i/2)(Ω̃/Δε)(e^{iΔεt} - 1)`
pub fn exact_alpha(omega_tilde: f64, delta_eps: f64, t: f64) -> C64 {
    -I * 0.5 * (omega_tilde / delta_eps) * (C64::from_polar(1.0, delta_eps * t) - 1.0)
}

/// `β(t) = i(Ω̃²/4Δε)(t + (i/Δε)(e^{iΔεt} - 1))`
pub fn exact_beta(omega_tilde: f64, delta_eps: f64, t: f64) -> C64 {
    let e = C64::from_polar(1.0, delta_eps * t) - 1.0;
    I * (omega_tilde * omega_tilde / (4.0 * delta_eps)) * (c(t) + I * e / delta_eps)
}

/// `Ô = σ_x¹ + σ_x² + 2` on the two-qubit space.
pub fn gate_o_operator() -> Mat {
    let id = Mat::identity(2, 2);
    kron(&ops::pauli_x(), &id) + kron(&id, &ops::pauli_x()) + Mat::identity(4, 4) * c(2.0)
}

/// Projectors onto the `Ô` eigenvalues 0, 2, 4.
fn o_projectors() -> [(f64, Mat); 3] {
    let id = Mat::identity(2, 2);
    let plus = (&id + ops::pauli_x()) * c(0.5);
    let minus = (&id - ops::pauli_x()) * c(0.5);
    [
        (0.0, kron(&minus, &minus)),
        (2.0, kron(&plus, &minus) + kron(&minus, &plus)),
        (4.0, kron(&plus, &plus)),
    ]
}

/// `D(α) = exp(α a† - α* a)` built on an enlarged space and truncated.
pub fn displacement(alpha: C64, fock_dim: usize) -> Mat {
    let big = fock_dim + 40 + (4.0 * alpha.norm_sqr()).ceil() as usize;
    let a = ops::destroy(big);
    let gen = a.adjoint() * alpha - &a * alpha.conj();
    gen.exp().view((0, 0), (fock_dim, fock_dim)).into_owned()
}

/// `U(t) = D(α Ô) exp(½(β - β*) Ô²)` on `{g+1, g-1}² ⊗ Fock`; returns `(α, β, U)`.
pub fn exact_unitary(omega_tilde: f64, delta_eps: f64, t: f64, fock_dim: usize) -> Result<(C64, C64, Mat)> {
    if delta_eps == 0.0 {
        return Err(Error::PerturbationInvalid("delta_eps = 0".into()));
    }
    let alpha = exact_alpha(omega_tilde, delta_eps, t);
    let beta = exact_beta(omega_tilde, delta_eps, t);
    let disp = 4.0 * alpha.norm();
    let needed = disp * disp + 4.0 * disp;
    if (fock_dim as f64 - 1.0) < needed {
        return Err(Error::TruncationTooSmall(format!(
            "|α|·‖Ô‖ = {disp:.3} needs n_max ≥ {needed:.1}"
        )));
    }
    let phase = 0.5 * (beta - beta.conj());
    let mut u = Mat::zeros(4 * fock_dim, 4 * fock_dim);
    for (o, p) in o_projectors() {
        let d = displacement(alpha * o, fock_dim) * (phase * o * o).exp();
        u += kron(&p, &d);
    }
    Ok((alpha, beta, u))
}

/// `|Tr(A† B)| / n` over the given columns.
pub fn operator_fidelity(a: &Mat, b: &Mat) -> f64 {
    let mut acc = c(0.0);
    for j in 0..a.ncols() {
        acc += a.column(j).dotc(&b.column(j));
    }
    acc.norm() / a.ncols() as f64
}

/// Input subspace: all qubit states with phonon number `≤ n_in`, as columns.
pub fn low_fock_inputs(hs: &HilbertSpace, n_in: usize) -> Mat {
    let mut cols = Vec::new();
    for code in 0..hs.nv_dim() {
        for n in 0..=n_in.min(hs.fock_dim - 1) {
            cols.push(code * hs.fock_dim + n);
        }
    }
    let mut m = Mat::zeros(hs.dim(), cols.len());
    for (j, &i) in cols.iter().enumerate() {
        m[(i, j)] = c(1.0);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactCheck {
    pub t: f64,
    pub omega_tilde: f64,
    pub delta_eps: f64,
    pub kappa2: f64,
    pub alpha: C64,
    pub beta: C64,
    pub fidelity: f64,
    pub input_dim: usize,
    /// Largest `|‖U x‖² - 1|` over the propagated inputs.
    pub trace_drift: f64,
}

/// Integrates effective model I (double path, η²-terms compensated, identical
/// centres) to `t` and compares with [`exact_unitary`] after removing the local
/// `exp(-i Σ δ_k/2 σ_x^k t)` factor.
pub fn exact_check(drive: &DriveConfig, t: f64, fock_dim: usize, n_in: usize, ctl: &StepControl) -> Result<ExactCheck> {
    if drive.path != Path::DoublePath || !drive.compensate_eta2 || drive.n_centers() != 2 {
        return Err(Error::PerturbationInvalid(
            "closed form needs the compensated double path with two centres".into(),
        ));
    }
    let hs = HilbertSpace::new(2, 2, fock_dim)?;
    let (model, h) = ham::effective_i(drive, &hs)?;
    let (o1, o2) = (model.omega_tilde_k[0], model.omega_tilde_k[1]);
    if ((o1 - o2) / o1).abs() > 1e-12 {
        return Err(Error::PerturbationInvalid("closed form needs identical centres".into()));
    }
    let inputs = low_fock_inputs(&hs, n_in);
    let u_num = dyn_::propagate_columns(&h, &inputs, t, ctl)?;
    let trace_drift = u_num
        .column_iter()
        .map(|col| (col.norm_squared() - 1.0).abs())
        .fold(0.0, f64::max);
    let mut local = hs.identity();
    for k in 0..2 {
        let gen = hs.nv_op(k, &nv::sx(2)) * c(model.delta_const[k] / 2.0 * t);
        local = (gen * I).exp() * local;
    }
    let (alpha, beta, u) = exact_unitary(o1, model.delta_eps, t, fock_dim)?;
    let fidelity = operator_fidelity(&(u * &inputs), &(local * u_num));
    Ok(ExactCheck {
        t,
        omega_tilde: o1,
        delta_eps: model.delta_eps,
        kappa2: o1 / model.delta_eps,
        alpha,
        beta,
        fidelity,
        input_dim: inputs.ncols(),
        trace_drift,
    })
}

// --------------------------------------------------- tier cross-validation

#[derive(Debug, Clone, PartialEq)]
pub struct TierComparison {
    pub times: Vec<f64>,
    /// Largest absolute population difference per sample.
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
    /// Smallest total ground-manifold population of the full model.
    pub min_ground: f64,
    pub trace_drift: f64,
}

/// Evolves the Λ-drive model and effective model I from the same basis state
/// and compares the populations of `{g+1, g-1}² ⊗ Fock`. The full state is
/// mapped to the effective frame by `P_g e^{X(t)}` and renormalised.
pub fn compare_full_effective(
    drive: &DriveConfig,
    fock_dim: usize,
    t_final: f64,
    initial: [usize; 2],
    n_samples: usize,
    ctl: &StepControl,
) -> Result<TierComparison> {
    let hs3 = HilbertSpace::new(3, 2, fock_dim)?;
    let hs2 = HilbertSpace::new(2, 2, fock_dim)?;
    let h3 = ham::rotating_frame_hamiltonian(drive, &hs3)?;
    let (_, h2) = ham::effective_i(drive, &hs2)?;
    let x = ham::dressing_generator(drive, &hs3)?;
    let opts = EvolveOptions {
        n_samples,
        control: *ctl,
        keep_snapshots: true,
        ..EvolveOptions::default()
    };
    let full = dyn_::evolve(
        &State::Ket(dyn_::basis_ket(&hs3, &initial, 0)),
        &h3,
        &[],
        &PulseSchedule::empty(),
        t_final,
        &hs3,
        &opts,
    )?;
    let eff = dyn_::evolve(
        &State::Ket(dyn_::basis_ket(&hs2, &initial, 0)),
        &h2,
        &[],
        &PulseSchedule::empty(),
        t_final,
        &hs2,
        &opts,
    )?;
    let p = crate::dynamics::ground_embedding(&hs2, &hs3);
    let mut out = TierComparison {
        times: full.times.clone(),
        deviation: Vec::new(),
        max_deviation: 0.0,
        min_ground: 1.0,
        trace_drift: full.trace_drift.max(eff.trace_drift),
    };
    for (i, &t) in full.times.iter().enumerate() {
        let w = x.at(t).exp();
        let rho = p.adjoint() * &w * &full.snapshots[i] * w.adjoint() * &p;
        let tr = rho.trace().re;
        out.min_ground = out.min_ground.min(tr);
        let dev = (0..hs2.dim())
            .map(|k| (rho[(k, k)].re / tr - eff.snapshots[i][(k, k)].re).abs())
            .fold(0.0, f64::max);
        out.deviation.push(dev);
        out.max_deviation = out.max_deviation.max(dev);
    }
    Ok(out)
}

// --------------------------------------------------------------- decay

/// Least-squares slope of `-ln y` against `t`.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    -sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub kappa1: f64,
    pub gamma: f64,
    /// Fitted effective decay rate (twice the bright/dark coherence decay rate).
    pub gamma_eff: f64,
    pub ratio: f64,
    pub trace_drift: f64,
}

/// Single centre driven on both legs by `Ω₁ = κ₁ ε₁` only; fits the decay of
/// the `|+⟩/|-⟩` coherence in either frame.
pub fn effective_decay_fit(
    kappa1: f64,
    eps1: f64,
    gamma: f64,
    eta: f64,
    nu: f64,
    frame: dyn_::Frame,
) -> Result<DecayFit> {
    let drive = DriveConfig::new(kappa1 * eps1, 0.0, eps1, eps1, vec![eta], nu, Path::DoublePath);
    let levels = match frame {
        dyn_::Frame::Lab => 3,
        dyn_::Frame::EffectiveI => 2,
    };
    let hs = HilbertSpace::new(levels, 1, 4)?;
    let h = match frame {
        dyn_::Frame::Lab => ham::rotating_frame_hamiltonian(&drive, &hs)?,
        dyn_::Frame::EffectiveI => ham::effective_i(&drive, &hs)?.1,
    };
    let mut cfg = dyn_::DissipationConfig::new(gamma, f64::INFINITY, 0.0);
    cfg.secular_cutoff = Some(eps1);
    let diss = dyn_::make_dissipators(&drive, &hs, &cfg, frame)?;
    let t_final = 2.0 / (kappa1 * kappa1 * gamma);
    let opts = EvolveOptions {
        n_samples: 41,
        keep_snapshots: true,
        ..EvolveOptions::default()
    };
    let traj = dyn_::evolve(
        &State::Ket(dyn_::basis_ket(&hs, &[nv::GP], 0)),
        &h,
        &diss,
        &PulseSchedule::empty(),
        t_final,
        &hs,
        &opts,
    )?;
    let coherence: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|rho| {
            let r = dyn_::reduced_nv(&State::Density(rho.clone()), &hs);
            // ⟨+|ρ|-⟩ with |±⟩ = (|g+1⟩ ± |g-1⟩)/√2
            let (pp, pm, mp, mm) = (r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)]);
            ((pp - pm + mp - mm) * 0.5).norm()
        })
        .collect();
    let gamma_eff = 2.0 * fit_decay_rate(&traj.times, &coherence);
    Ok(DecayFit {
        kappa1,
        gamma,
        gamma_eff,
        ratio: gamma_eff / gamma,
        trace_drift: traj.trace_drift,
    })
}

// ------------------------------------------------------ figure of merit

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub diameter: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub eta: f64,
    pub nu: f64,
    pub omega2: f64,
    pub omega_gate: f64,
    pub gamma_eff: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Excited-state decay rate (rad/s).
    pub gamma: f64,
    /// Multiply `Ω_gate` by `Δ/(ε+Δ)` for the second excited state.
    pub subtract_second: bool,
    /// Splitting to the second excited state (rad/s).
    pub delta_es: f64,
}

impl SweepOptions {
    pub fn from_material(material: &MaterialModel<f64>) -> Self {
        SweepOptions {
            gamma: material.gamma_e,
            subtract_second: false,
            delta_es: material.delta_es,
        }
    }
}

/// Gate rate over effective decay for a sphere of `diameter` with
/// `Ω₂ = κ₁ν`, `Ω₁ = ηΩ₂`, `ε₁ = ε₂ = Ω₁/κ₁` and `Ω_gate = κ₂Ω̃`.
pub fn sweep_point(
    material: &MaterialModel<f64>,
    diameter: f64,
    kappa1: f64,
    kappa2: f64,
    opts: &SweepOptions,
) -> Result<SweepPoint> {
    let mode = lowest_mode(&sphere(diameter, material)?, material)?;
    let omega2 = kappa1 * mode.nu;
    let omega1 = mode.eta * omega2;
    let eps = omega1 / kappa1;
    let omega_tilde = ham::omega_tilde(omega1, mode.eta * omega2, eps, eps);
    let mut omega_gate = kappa2 * omega_tilde;
    if opts.subtract_second {
        omega_gate *= opts.delta_es / (eps + opts.delta_es);
    }
    let gamma_eff = kappa1 * kappa1 * opts.gamma;
    Ok(SweepPoint {
        diameter,
        kappa1,
        kappa2,
        eta: mode.eta,
        nu: mode.nu,
        omega2,
        omega_gate,
        gamma_eff,
        ratio: omega_gate / gamma_eff,
    })
}

/// All combinations of diameters, `κ₁` and `κ₂`.
pub fn gate_figure_of_merit(
    material: &MaterialModel<f64>,
    diameters: &[f64],
    kappa1: &[f64],
    kappa2: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(diameters.len() * kappa1.len() * kappa2.len());
    for &k1 in kappa1 {
        for &k2 in kappa2 {
            for &d in diameters {
                out.push(sweep_point(material, d, k1, k2, opts)?);
            }
        }
    }
    Ok(out)
}

/// Diameter in `[lo, hi]` where the ratio crosses 1, by bisection on
/// `ln(ratio)`; `None` if it does not change sign.
pub fn crossing_diameter(
    material: &MaterialModel<f64>,
    kappa1: f64,
    kappa2: f64,
    opts: &SweepOptions,
    lo: f64,
    hi: f64,
) -> Result<Option<f64>> {
    let f = |d: f64| -> Result<f64> { Ok(sweep_point(material, d, kappa1, kappa2, opts)?.ratio.ln()) };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa * fb > 0.0 {
        return Ok(None);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if (b - a) < 1e-15 * hi {
            break;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectComparison {
    /// `Ω_gate/Γ_eff` of the Raman scheme, `(κ₂/κ₁)(ηΩ/Γ)`.
    pub raman_ratio: f64,
    /// Direct excited-state gate, `κ₁ηΩ/Γ`.
    pub direct_ratio: f64,
    pub quotient: f64,
}

pub fn direct_gate_comparison(kappa1: f64, kappa2: f64, eta: f64, omega: f64, gamma: f64) -> DirectComparison {
    let raman_ratio = kappa2 / kappa1 * eta * omega / gamma;
    let direct_ratio = kappa1 * eta * omega / gamma;
    DirectComparison {
        raman_ratio,
        direct_ratio,
        quotient: raman_ratio / direct_ratio,
    }
}

// ------------------------------------------------------ microwave gate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MwGateReport {
    pub t_gate: f64,
    pub omega_tilde: f64,
    pub delta_eps: f64,
    pub kappa2: f64,
    pub omega_gate: f64,
    /// `Ω_gate t_gate`
    pub theta_expected: f64,
    /// `2 atan(√(P_mm / P_pp))` of the final state.
    pub theta: f64,
    /// Peak total population outside `{g+1, g-1}`.
    pub leakage: f64,
    /// `pp, pm, mp, mm`
    pub final_populations: [f64; 4],
    pub trace_drift: f64,
}

/// Runs the microwave-assisted gate from `|g+1, g+1⟩ ⊗ |0⟩` for
/// `t_gate = 4π/Δε` (two closure periods) with an echo at mid-gate.
///
/// The full model is integrated in the interaction picture of the microwave
/// drive; `rwa` selects the rotating-wave model instead.
pub fn mw_gate(
    drive: &DriveConfig,
    fock_dim: usize,
    echo: Option<dyn_::PulseKind>,
    rwa: bool,
    opts: &EvolveOptions,
) -> Result<(dyn_::Trajectory, MwGateReport)> {
    if drive.n_centers() != 2 {
        return Err(Error::DimensionMismatch("gate runs need two centres".into()));
    }
    let hs = HilbertSpace::new(3, 2, fock_dim)?;
    let (co, h) = if rwa {
        ham::mw_rwa_hamiltonian(drive, &hs)?
    } else {
        let (co, h_mw, rest) = ham::mw_hamiltonian(drive, &hs)?;
        (co, rest.interaction_picture(&h_mw))
    };
    let t_gate = 2.0 * TAU / co.delta_eps;
    let schedule = match echo {
        Some(kind) => PulseSchedule::echo(t_gate / 2.0, kind, vec![0, 1]),
        None => PulseSchedule::empty(),
    };
    let state0 = State::Ket(dyn_::basis_ket(&hs, &[nv::GP, nv::GP], 0));
    let traj = dyn_::evolve(&state0, &h, &[], &schedule, t_gate, &hs, opts)?;
    let leakage = traj
        .populations
        .iter()
        .map(|p| {
            traj.labels
                .iter()
                .zip(p)
                .filter(|(l, _)| l.contains('x'))
                .map(|(_, v)| v)
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let q = dyn_::qubit_block(&traj.final_state, &hs)?;
    let pops = [q[(0, 0)].re, q[(1, 1)].re, q[(2, 2)].re, q[(3, 3)].re];
    let report = MwGateReport {
        t_gate,
        omega_tilde: co.omega_tilde,
        delta_eps: co.delta_eps,
        kappa2: co.kappa2,
        omega_gate: co.omega_gate,
        theta_expected: co.omega_gate * t_gate,
        theta: 2.0 * pops[3].max(0.0).sqrt().atan2(pops[0].max(0.0).sqrt()),
        leakage,
        final_populations: pops,
        trace_drift: traj.trace_drift,
    };
    Ok((traj, report))
}

// --------------------------------------------------------- closure times

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateVariant {
    DoublePath,
    SinglePath,
    Microwave,
}

impl GateVariant {
    pub fn parse(s: &str) -> Option<GateVariant> {
        match s {
            "dp" | "double_path" => Some(GateVariant::DoublePath),
            "sp" | "single_path" => Some(GateVariant::SinglePath),
            "mw" | "microwave" => Some(GateVariant::Microwave),
            _ => None,
        }
    }

    /// `κ₂` giving rotation `θ` after `m` closure periods.
    pub fn kappa2(&self, theta: f64, m: u32) -> f64 {
        let m = m as f64;
        match self {
            GateVariant::DoublePath => (theta / (TAU * m)).sqrt(),
            GateVariant::SinglePath => (theta / (PI * m)).sqrt(),
            GateVariant::Microwave => (32.0 * theta / (9.0 * PI * m)).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Closure {
    pub m: u32,
    pub t_gate: f64,
    pub kappa2: f64,
}

/// Smallest `m` (even when an echo must land on a closure time) whose `κ₂`
/// does not exceed `kappa2_max`.
pub fn closure_times(delta_eps: f64, theta: f64, variant: GateVariant, echo: bool, kappa2_max: f64) -> Result<Closure> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::NoAdmissibleM(format!("theta = {theta} outside (0, π]")));
    }
    if !(delta_eps > 0.0) {
        return Err(Error::NoAdmissibleM(format!("delta_eps = {delta_eps} not positive")));
    }
    let step = if echo { 2 } else { 1 };
    let mut m = step;
    while m <= 1_000_000 {
        let k2 = variant.kappa2(theta, m);
        if k2 <= kappa2_max {
            return Ok(Closure {
                m,
                t_gate: TAU * m as f64 / delta_eps,
                kappa2: k2,
            });
        }
        m += step;
    }
    Err(Error::NoAdmissibleM(format!(
        "no m up to 10^6 keeps kappa2 below {kappa2_max}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::diamond_default;

    #[test]
    fn alpha_closure_and_periodicity() {
        let (o, d) = (2.0e5, 3.0e6);
        for m in 1..5 {
            let t = TAU * m as f64 / d;
            assert!(exact_alpha(o, d, t).norm() < 1e-12);
            let b = exact_beta(o, d, t);
            let want = I * (o * o / (4.0 * d)) * t;
            assert!((b - want).norm() < 1e-12 * want.norm());
        }
        for k in 0..20 {
            let t = 1.7e-7 * k as f64;
            let a = exact_alpha(o, d, t);
            let b = exact_alpha(o, d, t + TAU / d);
            assert!((a - b).norm() < 1e-12 * (o / d));
        }
        assert_eq!(exact_alpha(o, d, 0.0), c(0.0));
    }

    #[test]
    fn zero_drive_is_identity() {
        let (_, _, u) = exact_unitary(0.0, 1e6, 3.3e-6, 6).unwrap();
        assert!((u - Mat::identity(24, 24)).norm() < 1e-12);
    }

    #[test]
    fn closure_matches_tier_two_generator() {
        let (o, d) = (1.0, 2.8284271247461903);
        let t = 2.0 * TAU / d;
        let fock = 8;
        let (_, _, u) = exact_unitary(o, d, t, fock).unwrap();
        // -Ω̃²/(4Δε) Ô², split into gate, local and global parts
        let gate = o * o / d;
        let hs = HilbertSpace::new(2, 2, fock).unwrap();
        let sx1 = hs.nv_op(0, &nv::sx(2));
        let sx2 = hs.nv_op(1, &nv::sx(2));
        let gen = (&sx1 * &sx2) * c(-gate / 2.0) + (&sx1 + &sx2) * c(-gate);
        let u2 = (gen * (-I * t)).exp();
        let overlap = (u2.adjoint() * &u).trace() / c(u.nrows() as f64);
        let phase = overlap / overlap.norm();
        assert!((u - u2 * phase).norm() < 1e-10);
    }

    #[test]
    fn closure_examples() {
        let k = closure_times(1e6, PI / 2.0, GateVariant::DoublePath, true, 0.36).unwrap();
        assert_eq!(k.m, 2);
        assert!((k.kappa2 - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        let mw = closure_times(1e6, PI / 2.0, GateVariant::Microwave, true, 1.0).unwrap();
        assert_eq!(mw.m, 2);
        assert!((mw.t_gate - 2.0 * TAU / 1e6).abs() < 1e-20);
        assert!((mw.kappa2 - (16.0 / 9.0 * 0.5f64).sqrt()).abs() < 1e-15);
        assert!(matches!(
            closure_times(1e6, 0.0, GateVariant::DoublePath, false, 1.0),
            Err(Error::NoAdmissibleM(_))
        ));
        let small = closure_times(1e6, 1e-8, GateVariant::DoublePath, false, 1.0).unwrap();
        assert!(small.kappa2 < 1e-4);
    }

    #[test]
    fn direct_comparison_examples() {
        let r = direct_gate_comparison(0.05, 0.05, 2e-3, 1e9, 1e8);
        assert!((r.quotient - 20.0).abs() < 1e-12);
        let a = direct_gate_comparison(0.05, 0.1, 2e-3, 1e9, 1e8);
        assert!((a.quotient / r.quotient - 2.0).abs() < 1e-12);
        let h = direct_gate_comparison(0.05, 0.1, 2e-3, 1e9, 0.5e8);
        assert!((h.raman_ratio / a.raman_ratio - 2.0).abs() < 1e-12);
        assert!((h.direct_ratio / a.direct_ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_rate() {
        let t: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 0.5 * (-1.7 * t).exp()).collect();
        assert!((fit_decay_rate(&t, &y) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn sweep_ratio_closed_form() {
        let m = diamond_default::<f64>();
        let o = SweepOptions::from_material(&m);
        let p = sweep_point(&m, 20e-9, 0.05, 0.1, &o).unwrap();
        let want = 0.5 * 0.1 * p.eta * p.nu / m.gamma_e;
        assert!((p.ratio - want).abs() < 1e-12 * want);
    }
}
