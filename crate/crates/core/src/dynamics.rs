//! Time evolution: adaptive Dormand-Prince propagation of state vectors and
//! Lindblad density operators, dissipators, echo schedules and gate runs.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{self as ham, DriveConfig, Path};
use crate::operators::{c, nv, HilbertSpace, Mat, SparseTimeOp, TimeOp, C64, I};

// ------------------------------------------------------------ dissipators

/// Jump operator `√rate · op(t)`.
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub op: TimeOp,
    pub rate: f64,
}

impl Dissipator {
    pub fn constant(op: Mat, rate: f64) -> Self {
        Dissipator {
            op: TimeOp::constant(op),
            rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    EffectiveI,
}

impl Frame {
    pub fn parse(s: &str) -> Result<Frame> {
        match s {
            "lab" => Ok(Frame::Lab),
            "effective_I" | "effective_i" | "effective-i" => Ok(Frame::EffectiveI),
            other => Err(Error::UnknownFrame(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationConfig {
    /// Excited-state decay rate per channel (rad/s).
    pub gamma: f64,
    /// Mode quality factor; infinite disables mode relaxation.
    pub q_factor: f64,
    pub n_th: f64,
    /// Independent `|g±1⟩⟨e|` channels instead of the collective one.
    pub two_channel: bool,
    /// Jump-operator components separated by more than this are split into
    /// independent (secular) channels. Defaults to `10 |Δε|`.
    pub secular_cutoff: Option<f64>,
}

impl DissipationConfig {
    pub fn new(gamma: f64, q_factor: f64, n_th: f64) -> Self {
        DissipationConfig {
            gamma,
            q_factor,
            n_th,
            two_channel: false,
            secular_cutoff: None,
        }
    }
}

/// Splits `op` into groups of terms whose frequencies lie within `cutoff`
/// of a neighbour.
fn secular_split(op: &TimeOp, cutoff: f64) -> Vec<TimeOp> {
    let mut terms: Vec<(Mat, f64)> = op.terms.clone();
    terms.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<TimeOp> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (m, w) in terms {
        if out.is_empty() || w - last > cutoff {
            out.push(TimeOp::new());
        }
        out.last_mut().unwrap().add(m, w);
        last = w;
    }
    out
}

fn lowering_ops(hs: &HilbertSpace, k: usize, two_channel: bool) -> Vec<Mat> {
    let down = |g: usize| crate::operators::ket_bra(hs.nv_levels, g, nv::THIRD);
    if two_channel {
        vec![hs.nv_op(k, &down(nv::GP)), hs.nv_op(k, &down(nv::GM))]
    } else {
        vec![hs.nv_op(k, &(down(nv::GP) + down(nv::GM)))]
    }
}

fn mode_dissipators(a: TimeOp, nu: f64, cfg: &DissipationConfig, cutoff: f64) -> Vec<Dissipator> {
    let base = if cfg.q_factor.is_infinite() {
        0.0
    } else {
        nu / cfg.q_factor
    };
    let mut out = Vec::new();
    for part in secular_split(&a, cutoff) {
        out.push(Dissipator {
            op: part.adjoint(),
            rate: base * cfg.n_th,
        });
        out.push(Dissipator {
            op: part,
            rate: base * (cfg.n_th + 1.0),
        });
    }
    out
}

/// Embedding of the two-level ground space into the three-level space.
pub fn ground_embedding(hs2: &HilbertSpace, hs3: &HilbertSpace) -> Mat {
    let mut p = Mat::zeros(hs3.dim(), hs2.dim());
    let n = hs2.n_centers;
    for code in 0..hs2.nv_dim() {
        let mut levels = vec![0; n];
        let mut rest = code;
        for l in levels.iter_mut().rev() {
            *l = rest % 2;
            rest /= 2;
        }
        for f in 0..hs2.fock_dim {
            p[(hs3.index(&levels, f), hs2.index(&levels, f))] = c(1.0);
        }
    }
    p
}

/// Jump operators for the lab (rotating Λ) frame on a three-level space or
/// for effective model I on the two-level space.
pub fn make_dissipators(
    drive: &DriveConfig,
    hs: &HilbertSpace,
    cfg: &DissipationConfig,
    frame: Frame,
) -> Result<Vec<Dissipator>> {
    let cutoff = cfg.secular_cutoff.unwrap_or_else(|| 10.0 * drive.delta_eps().abs());
    let mut out = Vec::new();
    match frame {
        Frame::Lab => {
            if hs.nv_levels != 3 {
                return Err(Error::DimensionMismatch("lab-frame decay needs three levels".into()));
            }
            let a = hs.destroy();
            let ad = a.adjoint();
            for k in 0..hs.n_centers {
                let eta = drive.eta_k.get(k).copied().unwrap_or(0.0);
                for s in lowering_ops(hs, k, cfg.two_channel) {
                    // σ₋ e^{-iη(a e^{-iνt} + a† e^{iνt})} to first order, each
                    // sideband rotating at ±ν and kept as its own channel
                    out.push(Dissipator::constant(s.clone(), cfg.gamma));
                    if eta != 0.0 {
                        out.push(Dissipator::constant(&s * &ad * c(eta), cfg.gamma));
                        out.push(Dissipator::constant(&s * &a * c(eta), cfg.gamma));
                    }
                }
            }
            out.extend(mode_dissipators(TimeOp::constant(a), drive.nu, cfg, cutoff));
        }
        Frame::EffectiveI => {
            if hs.nv_levels != 2 {
                return Err(Error::DimensionMismatch(
                    "effective-frame decay needs two levels".into(),
                ));
            }
            let hs3 = HilbertSpace::new(3, hs.n_centers, hs.fock_dim)?;
            let p = ground_embedding(hs, &hs3);
            let pt = p.adjoint();
            let couplings = ham::raising_couplings(drive, &hs3)?;
            for k in 0..hs.n_centers {
                for s in lowering_ops(&hs3, k, cfg.two_channel) {
                    let mut l = TimeOp::new();
                    for (v, w) in &couplings {
                        l.add(&s * v * c(1.0 / w), -w);
                    }
                    let l = l.sandwich(&pt, &p).pruned(0.0);
                    for part in secular_split(&l, cutoff) {
                        out.push(Dissipator {
                            op: part,
                            rate: cfg.gamma,
                        });
                    }
                }
            }
            let x = ham::dressing_generator(drive, &hs3)?;
            let a3 = TimeOp::constant(hs3.destroy());
            let mut a_eff = a3.clone();
            a_eff.extend(&x.commutator(&x.commutator(&a3)).scaled(c(0.5)));
            let a_eff = a_eff.sandwich(&pt, &p).pruned(0.0);
            out.extend(mode_dissipators(a_eff, drive.nu, cfg, cutoff));
        }
    }
    Ok(out)
}

// ------------------------------------------------------------- schedules

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    /// `exp(-iπσ_y/2)` on `{g+1, g-1}`.
    EchoSy,
    /// `exp(-iπσ_z/2)` on `{g+1, g-1}` (equal to `exp(-iπS_z/2)` on the triplet).
    EchoSz,
    /// `exp(-iπσ_x/2)` on `{g+1, g-1}`.
    EchoSxPm,
    /// Spin-1 `exp(-iπS_y)` on the ground triplet.
    MwFramePulse,
}

impl PulseKind {
    pub fn parse(s: &str) -> Result<PulseKind> {
        match s {
            "echo_sy" => Ok(PulseKind::EchoSy),
            "echo_sz" => Ok(PulseKind::EchoSz),
            "echo_sx_pm" => Ok(PulseKind::EchoSxPm),
            "mw_frame_pulse" => Ok(PulseKind::MwFramePulse),
            other => Err(Error::InvalidSchedule(format!("unknown pulse '{other}'"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PulseKind::EchoSy => "echo_sy",
            PulseKind::EchoSz => "echo_sz",
            PulseKind::EchoSxPm => "echo_sx_pm",
            PulseKind::MwFramePulse => "mw_frame_pulse",
        }
    }

    /// Single-centre unitary on `levels` NV levels.
    pub fn unitary(&self, levels: usize) -> Result<Mat> {
        let pauli = |p: Mat| {
            let mut u = p * (-I);
            if levels == 3 {
                u[(nv::THIRD, nv::THIRD)] = c(1.0);
            }
            u
        };
        Ok(match self {
            PulseKind::EchoSy => pauli(nv::sy(levels)),
            PulseKind::EchoSz => pauli(nv::sz(levels)),
            PulseKind::EchoSxPm => pauli(nv::sx(levels)),
            PulseKind::MwFramePulse => {
                if levels != 3 {
                    return Err(Error::InvalidSchedule("mw_frame_pulse needs the ground triplet".into()));
                }
                (ham::spin1_sy() * c(-std::f64::consts::PI) * I).exp()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub time: f64,
    pub kind: PulseKind,
    pub targets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSchedule {
    pub pulses: Vec<Pulse>,
}

impl PulseSchedule {
    pub fn empty() -> Self {
        Self::default()
    }

    /// One pulse on all listed centres at `time`.
    pub fn echo(time: f64, kind: PulseKind, targets: Vec<usize>) -> Self {
        PulseSchedule {
            pulses: vec![Pulse { time, kind, targets }],
        }
    }

    pub fn validate(&self, t_final: f64, n_centers: usize) -> Result<()> {
        let mut last = f64::NEG_INFINITY;
        for p in &self.pulses {
            if !(p.time > last) {
                return Err(Error::InvalidSchedule("pulse times must be strictly increasing".into()));
            }
            if p.time < 0.0 || p.time > t_final {
                return Err(Error::InvalidSchedule(format!(
                    "pulse at {} outside [0, {t_final}]",
                    p.time
                )));
            }
            if p.targets.iter().any(|&k| k >= n_centers) {
                return Err(Error::InvalidSchedule("pulse target out of range".into()));
            }
            last = p.time;
        }
        Ok(())
    }

    fn unitary(pulse: &Pulse, hs: &HilbertSpace) -> Result<Mat> {
        let u1 = pulse.kind.unitary(hs.nv_levels)?;
        let mut u = hs.identity();
        for &k in &pulse.targets {
            u = hs.nv_op(k, &u1) * u;
        }
        Ok(u)
    }
}

// ----------------------------------------------------------------- states

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Ket(DVector<C64>),
    Density(Mat),
}

impl State {
    pub fn dim(&self) -> usize {
        match self {
            State::Ket(v) => v.len(),
            State::Density(m) => m.nrows(),
        }
    }

    pub fn density(&self) -> Mat {
        match self {
            State::Ket(v) => v * v.adjoint(),
            State::Density(m) => m.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            State::Ket(v) => v.norm_squared(),
            State::Density(m) => m.trace().re,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            State::Ket(v) => {
                if (v.norm_squared() - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidState(format!("norm² = {}", v.norm_squared())));
                }
            }
            State::Density(m) => {
                if !m.is_square() {
                    return Err(Error::InvalidState("density matrix not square".into()));
                }
                if (m - m.adjoint()).norm() > 1e-10 {
                    return Err(Error::InvalidState("density matrix not Hermitian".into()));
                }
                if (m.trace().re - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidState(format!("trace = {}", m.trace().re)));
                }
                let h = (m + m.adjoint()) * c(0.5);
                let min = h.symmetric_eigen().eigenvalues.min();
                if min < -1e-10 {
                    return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
                }
            }
        }
        Ok(())
    }
}

/// Basis ket `|levels⟩ ⊗ |n⟩`.
pub fn basis_ket(hs: &HilbertSpace, levels: &[usize], n: usize) -> DVector<C64> {
    let mut v = DVector::zeros(hs.dim());
    v[hs.index(levels, n)] = c(1.0);
    v
}

/// Diagonal Gibbs state on `fock_dim` levels with mean occupation `n_th`
/// (renormalised after truncation).
pub fn thermal_state(fock_dim: usize, n_th: f64) -> Mat {
    let mut m = Mat::zeros(fock_dim, fock_dim);
    if n_th <= 0.0 {
        m[(0, 0)] = c(1.0);
        return m;
    }
    let q = n_th / (1.0 + n_th);
    let weights: Vec<f64> = (0..fock_dim).map(|n| q.powi(n as i32)).collect();
    let z: f64 = weights.iter().sum();
    for (n, w) in weights.iter().enumerate() {
        m[(n, n)] = c(w / z);
    }
    m
}

/// Default Fock dimension: `n_max = 15` for vacuum, `4 n_th + 15` otherwise.
pub fn default_fock_dim(n_th: f64) -> usize {
    (4.0 * n_th.max(0.0)).ceil() as usize + 16
}

/// NV density matrix with the phonon traced out.
pub fn reduced_nv(state: &State, hs: &HilbertSpace) -> Mat {
    let (d, f) = (hs.nv_dim(), hs.fock_dim);
    let mut r = Mat::zeros(d, d);
    match state {
        State::Ket(v) => {
            for a in 0..d {
                for b in 0..d {
                    let mut acc = c(0.0);
                    for n in 0..f {
                        acc += v[a * f + n] * v[b * f + n].conj();
                    }
                    r[(a, b)] = acc;
                }
            }
        }
        State::Density(m) => {
            for a in 0..d {
                for b in 0..d {
                    let mut acc = c(0.0);
                    for n in 0..f {
                        acc += m[(a * f + n, b * f + n)];
                    }
                    r[(a, b)] = acc;
                }
            }
        }
    }
    r
}

/// Phonon-number distribution.
pub fn fock_populations(state: &State, hs: &HilbertSpace) -> Vec<f64> {
    let (d, f) = (hs.nv_dim(), hs.fock_dim);
    let mut p = vec![0.0; f];
    for a in 0..d {
        for (n, slot) in p.iter_mut().enumerate() {
            let i = a * f + n;
            *slot += match state {
                State::Ket(v) => v[i].norm_sqr(),
                State::Density(m) => m[(i, i)].re,
            };
        }
    }
    p
}

/// Two-qubit `{g+1, g-1}²` block of the reduced NV state, basis order
/// `pp, pm, mp, mm`.
pub fn qubit_block(state: &State, hs: &HilbertSpace) -> Result<Mat> {
    if hs.n_centers != 2 {
        return Err(Error::DimensionMismatch("two centres required".into()));
    }
    let r = reduced_nv(state, hs);
    let l = hs.nv_levels;
    let idx = |a: usize, b: usize| a * l + b;
    let basis = [idx(0, 0), idx(0, 1), idx(1, 0), idx(1, 1)];
    let mut q = Mat::zeros(4, 4);
    for (i, &bi) in basis.iter().enumerate() {
        for (j, &bj) in basis.iter().enumerate() {
            q[(i, j)] = r[(bi, bj)];
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manifold {
    /// `{|g+1,g-1⟩, |g-1,g+1⟩}`
    M1,
    /// `{|g+1,g+1⟩, |g-1,g-1⟩}`
    M2,
}

impl Manifold {
    pub fn parse(s: &str) -> Option<Manifold> {
        match s {
            "M1" | "m1" => Some(Manifold::M1),
            "M2" | "m2" => Some(Manifold::M2),
            _ => None,
        }
    }

    fn indices(&self) -> (usize, usize) {
        match self {
            Manifold::M1 => (1, 2),
            Manifold::M2 => (0, 3),
        }
    }
}

/// Fidelity of a two-qubit density matrix (order `pp, pm, mp, mm`) with
/// `(|aa⟩ - i e^{iφ}|bb⟩)/√2`, maximised over `φ`.
pub fn bell_fidelity(rho: &Mat, manifold: Manifold) -> f64 {
    let (a, b) = manifold.indices();
    (0.5 * (rho[(a, a)].re + rho[(b, b)].re) + rho[(a, b)].norm()).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------- integrator

/// Adaptive step control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
        }
    }
}

impl StepControl {
    /// Tolerances that keep closed-system norm drift below 1e-8 over ~100 gate periods.
    pub fn tight() -> Self {
        StepControl {
            rtol: 1e-13,
            atol: 1e-15,
            ..Self::default()
        }
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const CN: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dormand-Prince 5(4) integrator for `dy/dt = f(t, y)` on complex vectors.
pub struct Dopri<F> {
    f: F,
    k: Vec<Vec<C64>>,
    tmp: Vec<C64>,
    fresh: bool,
    pub steps: usize,
    pub rejected: usize,
}

impl<F: FnMut(f64, &[C64], &mut [C64])> Dopri<F> {
    pub fn new(f: F, n: usize) -> Self {
        Dopri {
            f,
            k: vec![vec![c(0.0); n]; 7],
            tmp: vec![c(0.0); n],
            fresh: true,
            steps: 0,
            rejected: 0,
        }
    }

    /// Marks the stored derivative as stale (after an external jump in `y`).
    pub fn reset(&mut self) {
        self.fresh = true;
    }

    /// Advances `y` from `t` to `t_end`; `h` carries the step size between calls.
    pub fn advance(&mut self, t: &mut f64, y: &mut [C64], t_end: f64, h: &mut f64, ctl: &StepControl) -> Result<()> {
        let n = y.len();
        if self.fresh {
            (self.f)(*t, y, &mut self.k[0]);
            self.fresh = false;
        }
        while *t < t_end {
            let span = t_end - *t;
            let mut step = h.min(ctl.max_step);
            let last = step >= span;
            if last {
                step = span;
            }
            if step <= 1e-15 * t_end.abs().max(1e-300) {
                if last {
                    *t = t_end;
                    break;
                }
                return Err(Error::StepSizeUnderflow { t: *t, step });
            }
            for s in 0..6 {
                for i in 0..n {
                    let mut acc = c(0.0);
                    for (j, a) in A[s].iter().enumerate().take(s + 1) {
                        if *a != 0.0 {
                            acc += self.k[j][i] * *a;
                        }
                    }
                    self.tmp[i] = y[i] + acc * step;
                }
                let (head, tail) = self.k.split_at_mut(s + 1);
                let _ = head;
                (self.f)(*t + CN[s] * step, &self.tmp, &mut tail[0]);
            }
            // tmp holds the 5th-order solution; k[6] its derivative
            let mut err = 0.0;
            for i in 0..n {
                let mut e = c(0.0);
                for (j, ej) in E.iter().enumerate() {
                    if *ej != 0.0 {
                        e += self.k[j][i] * *ej;
                    }
                }
                let sc = ctl.atol + ctl.rtol * y[i].norm().max(self.tmp[i].norm());
                let r = (e * step).norm() / sc;
                err += r * r;
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                *h = step * 0.1;
                self.rejected += 1;
                continue;
            }
            if err <= 1.0 {
                y.copy_from_slice(&self.tmp);
                *t = if last { t_end } else { *t + step };
                self.k.swap(0, 6);
                self.steps += 1;
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last || fac < 1.0 {
                    *h = step * fac;
                }
            } else {
                self.rejected += 1;
                *h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        Ok(())
    }
}

// --------------------------------------------------------------- evolve

/// Options for [`evolve`].
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub n_samples: usize,
    pub control: StepControl,
    /// Abort when the two highest Fock levels hold more than this.
    pub leak_tol: f64,
    pub keep_snapshots: bool,
    pub manifold: Option<Manifold>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            n_samples: 201,
            control: StepControl::default(),
            leak_tol: 1e-4,
            keep_snapshots: false,
            manifold: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Level labels of the NV basis, e.g. `pm` for `|g+1, g-1⟩`.
    pub labels: Vec<String>,
    /// Per sample, populations of the NV basis states (phonon traced out).
    pub populations: Vec<Vec<f64>>,
    pub n_mean: Vec<f64>,
    /// Bell fidelity per sample, when a manifold was declared.
    pub fidelity: Vec<f64>,
    pub snapshots: Vec<Mat>,
    pub final_state: State,
    pub trace_drift: f64,
    pub max_top_fock: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn population(&self, sample: usize, label: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == label)?;
        Some(self.populations[sample][i])
    }
}

pub fn level_labels(hs: &HilbertSpace) -> Vec<String> {
    let names = ["p", "m", "x"];
    (0..hs.nv_dim())
        .map(|code| {
            let mut s = String::new();
            let mut div = hs.nv_dim();
            for _ in 0..hs.n_centers {
                div /= hs.nv_levels;
                s.push_str(names[(code / div) % hs.nv_levels]);
            }
            s
        })
        .collect()
}

enum Rhs {
    Ket(SparseTimeOp),
    Lindblad {
        heff: SparseTimeOp,
        jumps: Vec<SparseTimeOp>,
    },
}

fn lindblad_rhs(heff: &SparseTimeOp, jumps: &[SparseTimeOp], t: f64, rho: &[C64], out: &mut [C64], s1: &mut [C64]) {
    let n = heff.dim;
    for j in 0..n {
        heff.apply(t, &rho[j * n..(j + 1) * n], -I, &mut s1[j * n..(j + 1) * n]);
    }
    for j in 0..n {
        for i in 0..n {
            out[i + j * n] = s1[i + j * n] + s1[j + i * n].conj();
        }
    }
    for l in jumps {
        for j in 0..n {
            l.apply(t, &rho[j * n..(j + 1) * n], c(1.0), &mut s1[j * n..(j + 1) * n]);
        }
        // s1 = L ρ, so (L ρ)† = ρ L†; add L (ρ L†) symmetrised
        let s2: Vec<C64> = (0..n * n).map(|k| s1[(k / n) + (k % n) * n].conj()).collect();
        let mut s3 = vec![c(0.0); n * n];
        for j in 0..n {
            l.apply(t, &s2[j * n..(j + 1) * n], c(1.0), &mut s3[j * n..(j + 1) * n]);
        }
        for j in 0..n {
            for i in 0..n {
                out[i + j * n] += (s3[i + j * n] + s3[j + i * n].conj()) * 0.5;
            }
        }
    }
}

fn record(state: &State, hs: &HilbertSpace, opts: &EvolveOptions, traj: &mut Trajectory, t: f64) -> Result<()> {
    let r = reduced_nv(state, hs);
    let pops: Vec<f64> = (0..hs.nv_dim()).map(|i| r[(i, i)].re).collect();
    let fock = fock_populations(state, hs);
    let n_mean: f64 = fock.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let f = fock.len();
    let top = fock[f - 1] + fock[f - 2];
    traj.max_top_fock = traj.max_top_fock.max(top);
    if top > opts.leak_tol {
        return Err(Error::TruncationLeak { t, population: top });
    }
    let fid = match (opts.manifold, hs.n_centers) {
        (Some(m), 2) => bell_fidelity(&qubit_block(state, hs)?, m),
        _ => f64::NAN,
    };
    traj.times.push(t);
    traj.populations.push(pops);
    traj.n_mean.push(n_mean);
    traj.fidelity.push(fid);
    if opts.keep_snapshots {
        traj.snapshots.push(state.density());
    }
    Ok(())
}

/// Propagates `state0` under `h` (and `dissipators`) to `t_final`, applying
/// scheduled pulses and recording `opts.n_samples` evenly spaced samples.
pub fn evolve(
    state0: &State,
    h: &TimeOp,
    dissipators: &[Dissipator],
    schedule: &PulseSchedule,
    t_final: f64,
    hs: &HilbertSpace,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if state0.dim() != hs.dim() || h.dim().is_some_and(|d| d != hs.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "state {} / operator {:?} / space {}",
            state0.dim(),
            h.dim(),
            hs.dim()
        )));
    }
    if !(t_final >= 0.0) {
        return Err(Error::InvalidSchedule(format!("t_final = {t_final}")));
    }
    state0.validate()?;
    schedule.validate(t_final, hs.n_centers)?;
    let n = hs.dim();
    let h = if h.terms.is_empty() {
        TimeOp::constant(Mat::zeros(n, n))
    } else {
        h.clone()
    };
    let active: Vec<&Dissipator> = dissipators.iter().filter(|d| d.rate > 0.0).collect();
    let mut state = if active.is_empty() {
        state0.clone()
    } else {
        State::Density(state0.density())
    };
    let rhs = if active.is_empty() && matches!(state, State::Ket(_)) {
        Rhs::Ket(SparseTimeOp::new(&h))
    } else {
        let mut heff = h.clone();
        let mut jumps = Vec::new();
        for d in &active {
            let l = d.op.scaled(c(d.rate.sqrt()));
            heff.extend(&l.adjoint().mul(&l).scaled(c(0.0) - I * 0.5));
            jumps.push(SparseTimeOp::new(&l));
        }
        Rhs::Lindblad {
            heff: SparseTimeOp::new(&heff),
            jumps,
        }
    };
    let (norm, freq) = match &rhs {
        Rhs::Ket(s) => (s.norm_bound(), s.max_frequency()),
        Rhs::Lindblad { heff, jumps } => (
            heff.norm_bound() + jumps.iter().map(|j| j.norm_bound().powi(2)).sum::<f64>(),
            heff.max_frequency(),
        ),
    };
    let scale = norm.max(freq).max(1e-300);
    let mut step = (0.01 / scale).min(if t_final > 0.0 { t_final } else { 1.0 });

    let mut traj = Trajectory {
        times: Vec::new(),
        labels: level_labels(hs),
        populations: Vec::new(),
        n_mean: Vec::new(),
        fidelity: Vec::new(),
        snapshots: Vec::new(),
        final_state: state.clone(),
        trace_drift: 0.0,
        max_top_fock: 0.0,
        steps: 0,
    };
    let trace0 = state.trace();

    let samples = opts.n_samples.max(2);
    let grid: Vec<f64> = (0..samples)
        .map(|i| t_final * i as f64 / (samples - 1) as f64)
        .collect();

    let mut y: Vec<C64> = match &state {
        State::Ket(v) => v.as_slice().to_vec(),
        State::Density(m) => m.as_slice().to_vec(),
    };
    let to_state = |y: &[C64], like: &State| match like {
        State::Ket(_) => State::Ket(DVector::from_column_slice(y)),
        State::Density(_) => State::Density(Mat::from_column_slice(n, n, y)),
    };
    let mut scratch = vec![c(0.0); if matches!(rhs, Rhs::Lindblad { .. }) { n * n } else { 0 }];
    let f = |t: f64, x: &[C64], out: &mut [C64]| match &rhs {
        Rhs::Ket(s) => s.apply(t, x, -I, out),
        Rhs::Lindblad { heff, jumps } => lindblad_rhs(heff, jumps, t, x, out, &mut scratch),
    };
    let mut integ = Dopri::new(f, y.len());
    let mut t = 0.0;
    let mut pulses = schedule.pulses.iter().peekable();
    let mut gi = 0;
    loop {
        let next_pulse = pulses.peek().map(|p| p.time).unwrap_or(f64::INFINITY);
        let next_sample = grid.get(gi).copied().unwrap_or(f64::INFINITY);
        if next_pulse.is_infinite() && next_sample.is_infinite() {
            break;
        }
        let target = next_pulse.min(next_sample);
        integ.advance(&mut t, &mut y, target, &mut step, &opts.control)?;
        if next_pulse <= next_sample {
            let p = pulses.next().unwrap();
            let u = PulseSchedule::unitary(p, hs)?;
            state = to_state(&y, &state);
            state = match state {
                State::Ket(v) => State::Ket(&u * v),
                State::Density(m) => State::Density(&u * m * u.adjoint()),
            };
            y = match &state {
                State::Ket(v) => v.as_slice().to_vec(),
                State::Density(m) => m.as_slice().to_vec(),
            };
            integ.reset();
        } else {
            state = to_state(&y, &state);
            record(&state, hs, opts, &mut traj, t)?;
            traj.trace_drift = traj.trace_drift.max((state.trace() - trace0).abs());
            gi += 1;
        }
    }
    traj.steps = integ.steps;
    traj.final_state = to_state(&y, &state);
    Ok(traj)
}

/// Propagates each column of `u0` under `dψ/dt = -iH(t)ψ` from 0 to `t`.
pub fn propagate_columns(h: &TimeOp, u0: &Mat, t: f64, ctl: &StepControl) -> Result<Mat> {
    let n = u0.nrows();
    if h.dim().is_some_and(|d| d != n) {
        return Err(Error::DimensionMismatch(format!("operator vs {n} rows")));
    }
    let sp = SparseTimeOp::new(h);
    let cols = u0.ncols();
    let f = |t: f64, x: &[C64], out: &mut [C64]| {
        for j in 0..cols {
            sp.apply(t, &x[j * n..(j + 1) * n], -I, &mut out[j * n..(j + 1) * n]);
        }
    };
    let mut y = u0.as_slice().to_vec();
    let scale = sp.norm_bound().max(sp.max_frequency()).max(1e-300);
    let mut step = (0.01 / scale).min(t.max(1e-300));
    let mut now = 0.0;
    Dopri::new(f, y.len()).advance(&mut now, &mut y, t, &mut step, ctl)?;
    Ok(Mat::from_column_slice(n, cols, &y))
}

// ----------------------------------------------------------- gate runs

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTier {
    /// Λ-drive Hamiltonian with the excited state.
    Lab,
    EffectiveI,
    EffectiveII,
}

impl ModelTier {
    pub fn parse(s: &str) -> Option<ModelTier> {
        match s {
            "lab" => Some(ModelTier::Lab),
            "effective_I" | "effective_i" | "I" => Some(ModelTier::EffectiveI),
            "effective_II" | "effective_ii" | "II" => Some(ModelTier::EffectiveII),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GateConfig {
    pub drive: DriveConfig,
    pub tier: ModelTier,
    pub fock_dim: usize,
    pub t_gate: f64,
    /// Echo applied to both centres at `t_gate / 2`.
    pub echo: Option<PulseKind>,
    pub n_th: f64,
    /// Initial qubit levels (`nv::GP` / `nv::GM`).
    pub initial: [usize; 2],
    pub manifold: Manifold,
    pub dissipation: Option<DissipationConfig>,
    pub options: EvolveOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub t_gate: f64,
    pub omega_gate: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub delta_eps: f64,
    pub bell_fidelity: f64,
    /// `pp, pm, mp, mm`
    pub final_populations: [f64; 4],
    pub cross_manifold: f64,
    pub n_initial: f64,
    pub n_final: f64,
    pub n_peak: f64,
    pub refocus_residual: f64,
    pub refocused: bool,
    pub trace_drift: f64,
}

/// Runs one two-centre gate and summarises it.
pub fn simulate_gate(cfg: &GateConfig) -> Result<(Trajectory, GateReport)> {
    let d = &cfg.drive;
    if d.n_centers() != 2 {
        return Err(Error::DimensionMismatch("gate runs need two centres".into()));
    }
    let levels = if cfg.tier == ModelTier::Lab { 3 } else { 2 };
    let hs = HilbertSpace::new(levels, 2, cfg.fock_dim)?;
    let eff1 = ham::effective_i_model(d)?;
    let hs2 = HilbertSpace::new(2, 2, cfg.fock_dim)?;
    let (eff2, h2) = ham::effective_ii(&eff1, &hs2)?;
    let omega_gate = eff2.omega_gate.unwrap_or(0.0);
    let h = match cfg.tier {
        ModelTier::Lab => ham::rotating_frame_hamiltonian(d, &hs)?,
        ModelTier::EffectiveI => ham::effective_i_operator(&eff1, &hs)?,
        ModelTier::EffectiveII => TimeOp::constant(h2),
    };
    let dissipators = match (&cfg.dissipation, cfg.tier) {
        (None, _) => Vec::new(),
        (Some(dc), ModelTier::Lab) => make_dissipators(d, &hs, dc, Frame::Lab)?,
        (Some(dc), _) => make_dissipators(d, &hs, dc, Frame::EffectiveI)?,
    };
    let nv0 = crate::operators::kron(
        &crate::operators::ket_bra(levels, cfg.initial[0], cfg.initial[0]),
        &crate::operators::ket_bra(levels, cfg.initial[1], cfg.initial[1]),
    );
    let state0 = if cfg.n_th > 0.0 {
        State::Density(crate::operators::kron(&nv0, &thermal_state(cfg.fock_dim, cfg.n_th)))
    } else {
        State::Ket(basis_ket(&hs, &cfg.initial, 0))
    };
    let schedule = match cfg.echo {
        Some(kind) => PulseSchedule::echo(cfg.t_gate / 2.0, kind, vec![0, 1]),
        None => PulseSchedule::empty(),
    };
    let mut opts = cfg.options.clone();
    opts.manifold = Some(cfg.manifold);
    let traj = evolve(&state0, &h, &dissipators, &schedule, cfg.t_gate, &hs, &opts)?;
    let q = qubit_block(&traj.final_state, &hs)?;
    let pops = [q[(0, 0)].re, q[(1, 1)].re, q[(2, 2)].re, q[(3, 3)].re];
    let (a, b) = cfg.manifold.indices();
    let in_manifold = pops[a] + pops[b];
    let n_initial = traj.n_mean[0];
    let n_final = *traj.n_mean.last().unwrap();
    let residual = (n_final - n_initial).abs();
    let report = GateReport {
        t_gate: cfg.t_gate,
        omega_gate,
        kappa1: d.kappa1,
        kappa2: d.kappa2,
        delta_eps: d.delta_eps(),
        bell_fidelity: bell_fidelity(&q, cfg.manifold),
        final_populations: pops,
        cross_manifold: pops.iter().sum::<f64>() - in_manifold,
        n_initial,
        n_final,
        n_peak: traj.n_mean.iter().copied().fold(0.0, f64::max),
        refocus_residual: residual,
        refocused: residual < 1e-3,
        trace_drift: traj.trace_drift,
    };
    Ok((traj, report))
}

/// Default echo for each path.
pub fn path_default_echo(path: Path) -> Option<PulseKind> {
    match path {
        Path::DoublePath => Some(PulseKind::EchoSz),
        Path::SinglePath => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dopri_exponential() {
        let f = |_t: f64, y: &[C64], out: &mut [C64]| {
            out[0] = y[0] * C64::new(-0.5, 3.0);
        };
        let mut d = Dopri::new(f, 1);
        let mut y = vec![c(1.0)];
        let (mut t, mut h) = (0.0, 0.01);
        let ctl = StepControl {
            rtol: 1e-12,
            atol: 1e-14,
            max_step: f64::INFINITY,
        };
        d.advance(&mut t, &mut y, 2.0, &mut h, &ctl).unwrap();
        let want = (C64::new(-0.5, 3.0) * 2.0).exp();
        assert!((y[0] - want).norm() < 1e-10);
        assert_eq!(t, 2.0);
    }

    #[test]
    fn bell_examples() {
        let mut target = DVector::<C64>::zeros(4);
        target[0] = c(std::f64::consts::FRAC_1_SQRT_2);
        target[3] = -I * std::f64::consts::FRAC_1_SQRT_2;
        let rho = &target * target.adjoint();
        assert!((bell_fidelity(&rho, Manifold::M2) - 1.0).abs() < 1e-14);
        let mixed = Mat::identity(4, 4) * c(0.25);
        assert!((bell_fidelity(&mixed, Manifold::M2) - 0.25).abs() < 1e-14);
        assert!((bell_fidelity(&mixed, Manifold::M1) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn frame_parse() {
        assert_eq!(Frame::parse("lab").unwrap(), Frame::Lab);
        assert!(matches!(Frame::parse("dressed"), Err(Error::UnknownFrame(_))));
    }

    #[test]
    fn labels() {
        let hs = HilbertSpace::new(2, 2, 4).unwrap();
        assert_eq!(level_labels(&hs), vec!["pp", "pm", "mp", "mm"]);
    }

    #[test]
    fn thermal_mean() {
        let m = thermal_state(60, 0.5);
        let n: f64 = (0..60).map(|k| k as f64 * m[(k, k)].re).sum();
        assert!((n - 0.5).abs() < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        let s = PulseSchedule {
            pulses: vec![
                Pulse {
                    time: 2.0,
                    kind: PulseKind::EchoSy,
                    targets: vec![0],
                },
                Pulse {
                    time: 1.0,
                    kind: PulseKind::EchoSy,
                    targets: vec![0],
                },
            ],
        };
        assert!(matches!(s.validate(3.0, 1), Err(Error::InvalidSchedule(_))));
        let s = PulseSchedule::echo(4.0, PulseKind::EchoSz, vec![0]);
        assert!(matches!(s.validate(3.0, 1), Err(Error::InvalidSchedule(_))));
    }
}
