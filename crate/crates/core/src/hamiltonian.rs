//! Strain operators, drive Hamiltonians and the effective gate models.
//!
//! Rates are angular frequencies. Effective models follow the frame in which
//! the phonon mode is rotating at its (coupling-shifted) frequency, so the
//! gate term carries `e^{iΔε t}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::material::MaterialModel;
use crate::operators::{self as ops, c, kron, nv, HilbertSpace, Mat, TimeOp, C64, I};
use crate::scalar::{GAMMA_ELECTRON, HBAR, MU0_OVER_4PI};

// ---------------------------------------------------------------- strain

/// Displacement gradient `e_{μν} = ∂u_μ/∂r_ν`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StrainTensor {
    pub e: [[f64; 3]; 3],
}

impl StrainTensor {
    pub fn symmetrized(&self) -> [[f64; 3]; 3] {
        let mut s = [[0.0; 3]; 3];
        for (i, row) in s.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = 0.5 * (self.e[i][j] + self.e[j][i]);
            }
        }
        s
    }

    fn deltas(&self, material: &MaterialModel<f64>) -> [f64; 4] {
        let z = material.zeta;
        let eps = self.symmetrized();
        let e = &self.e;
        [
            -z * (eps[0][0] + eps[1][1]),
            -z * (e[0][0] - e[1][1]),
            -z * (e[0][1] + e[1][0]),
            -8.0 * material.beta * material.beta * z * e[2][2],
        ]
    }
}

/// Ground triplet `{g0, g+1, g-1}`: `2δ₁ 𝟙₃`.
pub fn strain_gs(strain: &StrainTensor, material: &MaterialModel<f64>) -> Mat {
    let d1 = strain.deltas(material)[0];
    Mat::identity(3, 3) * c(2.0 * d1)
}

/// Excited manifold in the basis `{A₁, A₂, E_x, E_y, E₁, E₂}`.
pub fn strain_es(strain: &StrainTensor, material: &MaterialModel<f64>) -> Mat {
    let [d1, d2, d3, d4] = strain.deltas(material);
    let d = c(d1 + d4);
    let (d2, d3) = (c(d2), c(d3));
    let z = c(0.0);
    Mat::from_row_slice(
        6,
        6,
        &[
            d,
            z,
            z,
            z,
            d2,
            -I * d3, //
            z,
            d,
            z,
            z,
            I * d3,
            -d2, //
            z,
            z,
            d + d2,
            d3,
            z,
            z, //
            z,
            z,
            d3,
            d - d2,
            z,
            z, //
            d2,
            -I * d3,
            z,
            z,
            d,
            z, //
            I * d3,
            -d2,
            z,
            z,
            z,
            d,
        ],
    )
}

// ----------------------------------------------------------------- drive

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    SinglePath,
    DoublePath,
}

impl Path {
    /// Coupling-induced mode shift factor per centre.
    pub fn chi_shift(&self) -> f64 {
        match self {
            Path::DoublePath => 0.25,
            Path::SinglePath => 0.125,
        }
    }
}

/// Laser (and optional microwave) drive parameters, shared by both centres
/// unless `eta_k` differs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveConfig {
    pub omega1: f64,
    pub omega2: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Coupling coefficient per centre.
    pub eta_k: Vec<f64>,
    pub nu: f64,
    pub path: Path,
    pub kappa1: f64,
    /// `Ω̃/Δε` of the first centre (filled by [`DriveConfig::refresh`]).
    pub kappa2: f64,
    /// η²-terms (phonon-number Stark shift and mode shift) compensated.
    pub compensate_eta2: bool,
    /// Keep the `Ω₂` carrier (`e^{-i(ν+ε₂)t}`) term.
    pub include_carrier: bool,
    pub omega_mw: f64,
}

impl DriveConfig {
    pub fn new(omega1: f64, omega2: f64, eps1: f64, eps2: f64, eta_k: Vec<f64>, nu: f64, path: Path) -> Self {
        let mut d = DriveConfig {
            omega1,
            omega2,
            eps1,
            eps2,
            eta_k,
            nu,
            path,
            kappa1: 0.0,
            kappa2: 0.0,
            compensate_eta2: false,
            include_carrier: true,
            omega_mw: 0.0,
        };
        d.refresh();
        d
    }

    /// Parameters in the `Ω₂ = x κ₁ ν`, `Ω₁ = η Ω₂`, `ε₁ = Ω₁/κ₁` convention,
    /// with `ε₂` solved so that `Ω̃/Δε = κ₂` for `n_centers` identical centres.
    #[allow(clippy::too_many_arguments)]
    pub fn design(
        eta: f64,
        nu: f64,
        kappa1: f64,
        kappa2: f64,
        omega2_scale: f64,
        path: Path,
        n_centers: usize,
        compensate_eta2: bool,
    ) -> Result<Self> {
        if !(kappa1 > 0.0 && kappa1 < 1.0) {
            return Err(Error::PerturbationInvalid(format!(
                "kappa1 = {kappa1} must lie in (0, 1)"
            )));
        }
        if !(kappa2 > 0.0) {
            return Err(Error::PerturbationInvalid(format!(
                "kappa2 = {kappa2} must be positive"
            )));
        }
        let omega2 = omega2_scale * kappa1 * nu;
        let omega1 = eta * omega2;
        let eps1 = omega1 / kappa1;
        let mut d = DriveConfig::new(omega1, omega2, eps1, eps1, vec![eta; n_centers], nu, path);
        d.compensate_eta2 = compensate_eta2;
        for _ in 0..200 {
            let ot = omega_tilde(omega1, eta * omega2, eps1, d.eps2);
            let next = eps1 + d.mode_shift_total() - ot / kappa2;
            if ((next - d.eps2) / eps1).abs() < 1e-16 {
                d.eps2 = next;
                break;
            }
            d.eps2 = next;
        }
        if !(d.eps2 > 0.0) {
            return Err(Error::PerturbationInvalid(format!(
                "no positive eps2 for kappa2 = {kappa2} (got {})",
                d.eps2
            )));
        }
        d.refresh();
        Ok(d)
    }

    /// Two-centre single-path drive for the microwave-assisted gate, with
    /// `Ω₁ = ηΩ₂`, `ε₂ = ε₁ - Δε`, no carrier and compensated η² terms.
    pub fn microwave(eta: f64, nu: f64, omega1: f64, eps1: f64, delta_eps: f64, omega_mw: f64) -> Result<Self> {
        if !(delta_eps > 0.0 && delta_eps < eps1) {
            return Err(Error::PerturbationInvalid(format!(
                "delta_eps = {delta_eps} must lie in (0, eps1)"
            )));
        }
        let mut d = DriveConfig::new(
            omega1,
            omega1 / eta,
            eps1,
            eps1 - delta_eps,
            vec![eta; 2],
            nu,
            Path::SinglePath,
        );
        d.include_carrier = false;
        d.compensate_eta2 = true;
        d.omega_mw = omega_mw;
        d.refresh();
        Ok(d)
    }

    pub fn n_centers(&self) -> usize {
        self.eta_k.len()
    }

    /// Mode shift `χ η_k² Ω₂² / ε₂` summed over centres (0 when compensated).
    pub fn mode_shift_total(&self) -> f64 {
        if self.compensate_eta2 {
            return 0.0;
        }
        self.eta_k
            .iter()
            .map(|e| self.path.chi_shift() * e * e * self.omega2 * self.omega2 / self.eps2)
            .sum()
    }

    pub fn delta_eps(&self) -> f64 {
        self.eps1 - self.eps2 + self.mode_shift_total()
    }

    pub fn omega_tilde_k(&self, k: usize) -> f64 {
        omega_tilde(self.omega1, self.eta_k[k] * self.omega2, self.eps1, self.eps2)
    }

    /// Recomputes `kappa1` and `kappa2` from the stored rates.
    pub fn refresh(&mut self) {
        self.kappa1 = self.omega1 / self.eps1;
        let de = self.delta_eps();
        self.kappa2 = if de != 0.0 {
            self.omega_tilde_k(0) / de
        } else {
            f64::INFINITY
        };
    }

    /// Violated sideband hierarchy conditions, as human-readable notes.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.omega1.abs() * 10.0 > self.eps1.abs() {
            w.push(format!(
                "eps1 >> omega1 violated: omega1/eps1 = {:.3}",
                self.omega1 / self.eps1
            ));
        }
        if self.omega2.abs() * 10.0 > (self.nu + self.eps2).abs() {
            w.push(format!(
                "carrier off-resonance weak: omega2/(nu+eps2) = {:.3}",
                self.omega2 / (self.nu + self.eps2)
            ));
        }
        for (k, eta) in self.eta_k.iter().enumerate() {
            if (eta * self.omega2).abs() * 10.0 > self.eps2.abs() {
                w.push(format!("eps2 >> eta*omega2 violated on centre {k}"));
            }
            if ((self.omega1 - eta * self.omega2) / (eta * self.omega2)).abs() > 0.5 {
                w.push(format!("omega1 differs from eta*omega2 on centre {k}"));
            }
        }
        if self.eps1.abs() * 10.0 > self.nu || self.eps2.abs() * 10.0 > self.nu {
            w.push("eps_k << nu violated".into());
        }
        if self.kappa1 > 0.2 {
            w.push(format!("kappa1 = {:.3} above 0.2", self.kappa1));
        }
        w
    }
}

/// `Ω̃ = ¼ Ω₁ (ηΩ₂)(ε₁+ε₂)/(ε₁ε₂)`
pub fn omega_tilde(omega1: f64, eta_omega2: f64, eps1: f64, eps2: f64) -> f64 {
    0.25 * omega1 * eta_omega2 * (eps1 + eps2) / (eps1 * eps2)
}

// --------------------------------------------------------- lab frame (7)

/// Parameters of the single-NV laser Hamiltonian after the Schrieffer-Wolff
/// transformation. The two-level basis is `{e, g}` so `σ_z = |e⟩⟨e| - |g⟩⟨g|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabDrive {
    pub omega0: f64,
    pub omega_laser: f64,
    pub rabi: f64,
    pub eta: f64,
    pub nu: f64,
    /// Estimate of the mean phonon number used for the truncation check.
    pub n_mean: f64,
}

fn check_truncation(fock_dim: usize, n_mean: f64) -> Result<()> {
    let n_max = fock_dim as f64 - 1.0;
    if n_max < 4.0 * n_mean {
        return Err(Error::TruncationTooSmall(format!(
            "n_max = {n_max} below 4 <n> = {}",
            4.0 * n_mean
        )));
    }
    Ok(())
}

/// `ω̃₀/2 σ_z + ν a†a + [Ω/2 |e⟩⟨g| e^{-iω_L t} (1 + iη(a†+a)) + h.c.]`
/// with `ω̃₀ = ω₀ + η²ν`.
pub fn lab_hamiltonian(drive: &LabDrive, fock_dim: usize) -> Result<TimeOp> {
    check_truncation(fock_dim, drive.n_mean)?;
    let hs = HilbertSpace::new(2, 1, fock_dim)?;
    let x = &hs.destroy() + hs.destroy().adjoint();
    let coupling = hs.identity() + &x * (I * drive.eta);
    lab_from_coupling(drive, &hs, coupling)
}

/// Same with the full displacement `e^{iη(a†+a)}` (built on an enlarged
/// Fock space, then truncated).
pub fn lab_hamiltonian_exact(drive: &LabDrive, fock_dim: usize) -> Result<TimeOp> {
    check_truncation(fock_dim, drive.n_mean)?;
    let hs = HilbertSpace::new(2, 1, fock_dim)?;
    let big = fock_dim + 40;
    let a = ops::destroy(big);
    let x = &a + a.adjoint();
    let disp = (x * (I * drive.eta)).exp();
    let disp = disp.view((0, 0), (fock_dim, fock_dim)).into_owned();
    let coupling = hs.phonon_op(&disp);
    lab_from_coupling(drive, &hs, coupling)
}

fn lab_from_coupling(drive: &LabDrive, hs: &HilbertSpace, coupling: Mat) -> Result<TimeOp> {
    let w0 = drive.omega0 + drive.eta * drive.eta * drive.nu;
    let mut h = TimeOp::constant(hs.nv_op(0, &ops::pauli_z()) * c(w0 / 2.0) + hs.number() * c(drive.nu));
    let eg = hs.nv_op(0, &ops::ket_bra(2, 0, 1));
    h.add_hc(eg * coupling * c(drive.rabi / 2.0), -drive.omega_laser);
    Ok(h)
}

// ----------------------------------------------------- rotating frame (8)

/// Raising couplings `V_j e^{-iω_j t}` (ground → excited) of the Λ drive on
/// a three-level space `{g+1, g-1, e}`. Returned as `(V_j, ω_j)`.
pub fn raising_couplings(drive: &DriveConfig, hs: &HilbertSpace) -> Result<Vec<(Mat, f64)>> {
    if hs.nv_levels != 3 {
        return Err(Error::DimensionMismatch("Λ drive needs three NV levels".into()));
    }
    if hs.n_centers != drive.n_centers() {
        return Err(Error::DimensionMismatch(format!(
            "drive has {} centres, space has {}",
            drive.n_centers(),
            hs.n_centers
        )));
    }
    let a_dag = hs.destroy().adjoint();
    let mut out = Vec::new();
    let legs: &[(usize, usize)] = match drive.path {
        Path::SinglePath => &[(nv::GP, nv::GM)],
        Path::DoublePath => &[(nv::GP, nv::GM), (nv::GM, nv::GP)],
    };
    for k in 0..hs.n_centers {
        for &(g1, g2) in legs {
            let e_g1 = hs.nv_op(k, &ops::ket_bra(3, nv::THIRD, g1));
            let e_g2 = hs.nv_op(k, &ops::ket_bra(3, nv::THIRD, g2));
            if drive.omega1 != 0.0 {
                out.push((e_g1 * c(drive.omega1 / 2.0), drive.eps1));
            }
            if drive.include_carrier && drive.omega2 != 0.0 {
                out.push((&e_g2 * c(drive.omega2 / 2.0), drive.nu + drive.eps2));
            }
            let side = drive.eta_k[k] * drive.omega2;
            if side != 0.0 {
                out.push((&a_dag * e_g2 * (I * (side / 2.0)), drive.eps2));
            }
        }
    }
    Ok(out)
}

/// First-order dressing generator `X(t) = Σ_j (V_j† e^{iω_j t} - V_j e^{-iω_j t})/ω_j`.
/// The drive dresses a ground state `ψ` into `e^{-X} ψ`, so `P_g e^{X(t)} ψ`
/// is the state seen by the effective models.
pub fn dressing_generator(drive: &DriveConfig, hs: &HilbertSpace) -> Result<TimeOp> {
    let mut x = TimeOp::new();
    for (v, w) in raising_couplings(drive, hs)? {
        x.add(v.adjoint() * c(1.0 / w), w);
        x.add(v * c(-1.0 / w), -w);
    }
    Ok(x)
}

/// Λ-drive Hamiltonian in the frame rotating with the lasers (and with the
/// bare phonon mode).
pub fn rotating_frame_hamiltonian(drive: &DriveConfig, hs: &HilbertSpace) -> Result<TimeOp> {
    let mut h = TimeOp::new();
    for (v, w) in raising_couplings(drive, hs)? {
        h.add_hc(v, -w);
    }
    Ok(h)
}

// ------------------------------------------------------ effective models

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Tier {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DipolarCorrections {
    pub j_opt: f64,
    pub j_mag: f64,
    /// Induced direct coupling `j̃_opt` at the declared mean phonon number.
    pub j_opt_tilde: f64,
    /// State-independent phonon drive `Ω_a`, per centre.
    pub omega_a: [f64; 2],
}

/// Coefficients of an effective Hamiltonian. `δ_k = delta_const[k] + delta_n[k] n̂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveModel {
    pub tier: Tier,
    pub path: Path,
    pub omega_tilde_k: Vec<f64>,
    pub delta_const: Vec<f64>,
    pub delta_n: Vec<f64>,
    pub delta_eps: f64,
    pub omega_gate: Option<f64>,
    pub kappa2: f64,
    pub dipolar: Option<DipolarCorrections>,
}

impl EffectiveModel {
    /// `δ_k` evaluated at mean phonon number `n`.
    pub fn delta_at(&self, k: usize, n: f64) -> f64 {
        self.delta_const[k] + self.delta_n[k] * n
    }
}

/// Effective model I coefficients.
pub fn effective_i_model(drive: &DriveConfig) -> Result<EffectiveModel> {
    if drive.kappa1.abs() >= 1.0 {
        return Err(Error::PerturbationInvalid(format!("kappa1 = {} >= 1", drive.kappa1)));
    }
    let mut om = Vec::new();
    let mut dc = Vec::new();
    let mut dn = Vec::new();
    let w12 = drive.omega1 * drive.omega1 / drive.eps1;
    let w2 = if drive.include_carrier {
        drive.omega2 * drive.omega2 / (drive.nu + drive.eps2)
    } else {
        0.0
    };
    for k in 0..drive.n_centers() {
        om.push(drive.omega_tilde_k(k));
        let s = if drive.compensate_eta2 {
            0.0
        } else {
            drive.eta_k[k].powi(2) * drive.omega2.powi(2) / drive.eps2
        };
        match drive.path {
            Path::DoublePath => {
                dc.push(0.5 * (w12 + s + w2));
                dn.push(0.5 * s);
            }
            Path::SinglePath => {
                dc.push(0.25 * (w12 - s - w2));
                dn.push(-0.25 * s);
            }
        }
    }
    let de = drive.delta_eps();
    Ok(EffectiveModel {
        tier: Tier::I,
        path: drive.path,
        kappa2: om[0] / de,
        omega_tilde_k: om,
        delta_const: dc,
        delta_n: dn,
        delta_eps: de,
        omega_gate: None,
        dipolar: None,
    })
}

/// Effective model I operator on `{g+1, g-1}^n ⊗ Fock`.
pub fn effective_i(drive: &DriveConfig, hs: &HilbertSpace) -> Result<(EffectiveModel, TimeOp)> {
    let model = effective_i_model(drive)?;
    let op = effective_i_operator(&model, hs)?;
    Ok((model, op))
}

pub fn effective_i_operator(model: &EffectiveModel, hs: &HilbertSpace) -> Result<TimeOp> {
    if hs.nv_levels != 2 || hs.n_centers != model.omega_tilde_k.len() {
        return Err(Error::DimensionMismatch(
            "effective model needs two levels per centre and matching centre count".into(),
        ));
    }
    let n_op = hs.number();
    let a_dag = hs.destroy().adjoint();
    let mut h = TimeOp::new();
    for k in 0..hs.n_centers {
        let (single, gate_op) = match model.path {
            Path::DoublePath => {
                let sx = hs.nv_op(k, &nv::sx(2));
                (sx.clone(), sx + hs.identity())
            }
            Path::SinglePath => (hs.nv_op(k, &nv::sz(2)), hs.nv_op(k, &nv::sp(2))),
        };
        let delta = &hs.identity() * c(model.delta_const[k]) + &n_op * c(model.delta_n[k]);
        h.add(delta * &single * c(0.5), 0.0);
        h.add_hc(&a_dag * gate_op * (I * (model.omega_tilde_k[k] / 2.0)), model.delta_eps);
    }
    Ok(h)
}

/// Effective model II (second elimination) coefficients and operator.
pub fn effective_ii(eff1: &EffectiveModel, hs: &HilbertSpace) -> Result<(EffectiveModel, Mat)> {
    if eff1.omega_tilde_k.len() != 2 || hs.n_centers != 2 || hs.nv_levels != 2 {
        return Err(Error::DimensionMismatch("tier II needs two two-level centres".into()));
    }
    let de = eff1.delta_eps;
    if de == 0.0 {
        return Err(Error::PerturbationInvalid("delta_eps = 0".into()));
    }
    let (o1, o2) = (eff1.omega_tilde_k[0], eff1.omega_tilde_k[1]);
    let gate = o1 * o2 / de;
    let mut model = eff1.clone();
    model.tier = Tier::II;
    model.omega_gate = Some(gate);
    model.kappa2 = o1 / de;
    let n_op = hs.number();
    let mut h = Mat::zeros(hs.dim(), hs.dim());
    for k in 0..2 {
        let ok = eff1.omega_tilde_k[k];
        match eff1.path {
            Path::DoublePath => {
                model.delta_const[k] -= (o1 + o2) * ok / de;
            }
            Path::SinglePath => {
                let corr = ok * ok / (4.0 * de);
                model.delta_const[k] += corr;
                model.delta_n[k] += 2.0 * corr;
            }
        }
        let single = match eff1.path {
            Path::DoublePath => hs.nv_op(k, &nv::sx(2)),
            Path::SinglePath => hs.nv_op(k, &nv::sz(2)),
        };
        let delta = &hs.identity() * c(model.delta_const[k]) + &n_op * c(model.delta_n[k]);
        h += delta * single * c(0.5);
    }
    let xx = hs.nv_op(0, &nv::sx(2)) * hs.nv_op(1, &nv::sx(2));
    match eff1.path {
        Path::DoublePath => h -= xx * c(gate / 2.0),
        Path::SinglePath => {
            let yy = hs.nv_op(0, &nv::sy(2)) * hs.nv_op(1, &nv::sy(2));
            h -= (xx + yy) * c(gate / 8.0);
        }
    }
    Ok((model, h))
}

// -------------------------------------------------------------- dipolar

/// Dipolar couplings between two NV centres separated by `r` (m), with
/// dipole directions `p1`, `p2`. Returns `(j_opt, j_mag, A)`.
pub fn dipolar_couplings(
    r: [f64; 3],
    p1: [f64; 3],
    p2: [f64; 3],
    material: &MaterialModel<f64>,
) -> Result<(f64, f64, f64)> {
    let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if dist == 0.0 || !dist.is_finite() {
        return Err(Error::ZeroSeparation);
    }
    let unit = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let (p1, p2, er) = (unit(p1), unit(p2), [r[0] / dist, r[1] / dist, r[2] / dist]);
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let angular = dot(p1, p2) - 3.0 * dot(p1, er) * dot(p2, er);
    Ok((j_opt(dist, material) * angular, j_mag(dist) * angular, angular))
}

/// `(3/2) Γ ξ₀ / (n k₀ r)³` for unit angular factor.
pub fn j_opt(r: f64, material: &MaterialModel<f64>) -> f64 {
    let k0 = std::f64::consts::TAU / material.lambda0;
    1.5 * material.gamma_e * material.xi0 / (material.n_refr * k0 * r).powi(3)
}

/// `2 (μ₀/4π) γ_e² ħ / r³` for unit angular factor.
pub fn j_mag(r: f64) -> f64 {
    2.0 * MU0_OVER_4PI * GAMMA_ELECTRON * GAMMA_ELECTRON * HBAR / r.powi(3)
}

/// `n k₀ r`, which should be small for the near-field formula.
pub fn near_field_parameter(r: f64, material: &MaterialModel<f64>) -> f64 {
    material.n_refr * std::f64::consts::TAU / material.lambda0 * r
}

/// Per-centre drive amplitudes entering the dressed-state replacements.
#[derive(Debug, Clone, Copy)]
struct Legs {
    o1: f64,
    side: f64,
    o2: f64,
}

/// Dipolar dressed replacement for `x y / (J - ε)` with per-centre
/// amplitudes `(x₁, y₁)` of the addressed centre and `(x₂, y₂)` of the other.
fn dressed(x1: f64, y1: f64, x2: f64, y2: f64, eps: f64, jh: f64) -> f64 {
    (x1 * y1 * eps + 0.5 * jh * (x1 * y2 + x2 * y1)) / (jh * jh - eps * eps)
}

/// Effective model I with optical and magnetic dipolar couplings (double
/// path). `drives` holds one config (identical centres) or one per centre;
/// detunings are taken from the first.
pub fn effective_i_dipolar(
    drives: &[DriveConfig],
    j_opt: f64,
    j_mag: f64,
    n_mean: f64,
    hs: &HilbertSpace,
) -> Result<(EffectiveModel, TimeOp)> {
    let d0 = drives
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no drive config".into()))?;
    if d0.path != Path::DoublePath {
        return Err(Error::DimensionMismatch(
            "dipolar-corrected model is implemented for the double path".into(),
        ));
    }
    let legs: Vec<Legs> = (0..2)
        .map(|k| {
            let d = drives.get(k).unwrap_or(d0);
            let eta = d.eta_k.get(k).copied().unwrap_or(d.eta_k[0]);
            Legs {
                o1: d.omega1,
                side: eta * d.omega2,
                o2: if d.include_carrier { d.omega2 } else { 0.0 },
            }
        })
        .collect();
    let (e1, e2, nu) = (d0.eps1, d0.eps2, d0.nu);
    let jh = j_opt / 2.0;
    for (k, l) in legs.iter().enumerate() {
        let amp = l.o1.abs().max(l.side.abs());
        for eps in [e1, e2] {
            if (jh - eps).abs() <= 10.0 * amp {
                return Err(Error::DressedResonance(format!(
                    "|j_opt/2 - eps| = {:.3e} not >> drive {:.3e} on centre {k}",
                    (jh - eps).abs(),
                    amp
                )));
            }
            let q = (d0.kappa1 * d0.kappa1 * j_opt / eps).abs();
            if j_opt.abs() > eps.abs() && q >= 0.1 {
                return Err(Error::QuasiResonantDoubleExcitation(q));
            }
        }
    }
    let comp = d0.compensate_eta2;
    let base = effective_i_model(d0)?;
    let de = base.delta_eps;
    let mut om = Vec::new();
    let mut dc = Vec::new();
    let mut dn = Vec::new();
    let mut oa = [0.0; 2];
    for k in 0..2 {
        let (a, b) = (legs[k], legs[1 - k]);
        // x y/(ε - J) = -dressed(...)
        let stark1 = -dressed(a.o1, a.o1, b.o1, b.o1, e1, jh);
        let stark2 = if comp {
            0.0
        } else {
            -dressed(a.side, a.side, b.side, b.side, e2, jh)
        };
        let stark3 = -dressed(a.o2, a.o2, b.o2, b.o2, nu + e2, jh);
        dc.push(0.5 * (stark1 + stark2 + stark3));
        dn.push(0.5 * stark2);
        let ot = 0.25 * (-dressed(a.o1, a.side, b.o1, b.side, e1, jh) - dressed(a.o1, a.side, b.o1, b.side, e2, jh));
        om.push(ot);
        let direct = |eps: f64| a.o1 * a.side * eps / (jh * jh - eps * eps);
        oa[k] = 0.5 * ot - 0.125 * (direct(e1) + direct(e2));
    }
    let l = legs[0];
    let s1 = 1.0 / (jh * jh - e1 * e1);
    let s2 = 1.0 / (jh * jh - e2 * e2);
    let side2 = if comp {
        0.0
    } else {
        l.side * l.side * (1.0 + n_mean) * s2
    };
    let jt = -0.25
        * j_opt
        * (l.o1 * l.o1 * s1
            + side2
            + l.side * l.side * l.o1 * l.o1 * j_opt / (16.0 * de) * (s1 + s2).powi(2)
            + l.o2 * l.o2 / (jh * jh - (nu + e2).powi(2)));
    let model = EffectiveModel {
        tier: Tier::I,
        path: Path::DoublePath,
        kappa2: om[0] / de,
        omega_tilde_k: om,
        delta_const: dc,
        delta_n: dn,
        delta_eps: de,
        omega_gate: None,
        dipolar: Some(DipolarCorrections {
            j_opt,
            j_mag,
            j_opt_tilde: jt,
            omega_a: oa,
        }),
    };
    let op = effective_i_dipolar_operator(&model, hs)?;
    Ok((model, op))
}

pub fn effective_i_dipolar_operator(model: &EffectiveModel, hs: &HilbertSpace) -> Result<TimeOp> {
    if hs.nv_levels != 2 || hs.n_centers != 2 {
        return Err(Error::DimensionMismatch(
            "dipolar model needs two two-level centres".into(),
        ));
    }
    let dip = model.dipolar.unwrap_or_default();
    let n_op = hs.number();
    let a_dag = hs.destroy().adjoint();
    let mut h = TimeOp::new();
    for k in 0..2 {
        let sx = hs.nv_op(k, &nv::sx(2));
        let delta = &hs.identity() * c(model.delta_const[k]) + &n_op * c(model.delta_n[k]);
        h.add(delta * &sx * c(0.5), 0.0);
        let drive = sx * c(model.omega_tilde_k[k]) + hs.identity() * c(dip.omega_a[k]);
        h.add_hc(&a_dag * drive * (I * 0.5), model.delta_eps);
    }
    let pair = |m: Mat| hs.nv_op(0, &m) * hs.nv_op(1, &m);
    let zz = pair(nv::sz(2));
    let heis = pair(nv::sx(2)) + pair(nv::sy(2)) + &zz;
    h.add(heis * c(dip.j_opt_tilde / 2.0) + zz * c(dip.j_mag / 2.0), 0.0);
    Ok(h)
}

/// Gate rotation rates `(M₁, M₂)` of the dipolar-corrected tier II model.
pub fn dipolar_gate_rates(model: &EffectiveModel) -> (f64, f64) {
    let dip = model.dipolar.unwrap_or_default();
    let base = -model.omega_tilde_k[0] * model.omega_tilde_k[1] / model.delta_eps;
    (base + 2.0 * dip.j_opt_tilde + dip.j_mag / 2.0, base - dip.j_mag / 2.0)
}

// ------------------------------------------------------------ microwave

/// Spin-1 `S_x` in the level order `{g+1, g-1, g0}`.
pub fn spin1_sx() -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Mat::zeros(3, 3);
    m[(nv::GP, nv::THIRD)] = c(s);
    m[(nv::THIRD, nv::GP)] = c(s);
    m[(nv::GM, nv::THIRD)] = c(s);
    m[(nv::THIRD, nv::GM)] = c(s);
    m
}

pub fn spin1_sy() -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Mat::zeros(3, 3);
    // S_y = (S+ - S-)/(2i) with S+|0⟩ = √2|+1⟩, S+|-1⟩ = √2|0⟩
    m[(nv::GP, nv::THIRD)] = -I * s;
    m[(nv::THIRD, nv::GP)] = I * s;
    m[(nv::THIRD, nv::GM)] = -I * s;
    m[(nv::GM, nv::THIRD)] = I * s;
    m
}

pub fn spin1_sz() -> Mat {
    nv::sz(3)
}

/// Coefficients of the microwave-assisted single-path gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MwCoefficients {
    pub delta_id: f64,
    pub delta_sp: f64,
    pub omega_tilde: f64,
    pub delta_eps: f64,
    pub omega_gate: f64,
    pub kappa2: f64,
}

pub fn mw_coefficients(drive: &DriveConfig) -> Result<MwCoefficients> {
    let w1 = drive.omega1 * drive.omega1 / drive.eps1;
    let w2 = if drive.include_carrier {
        drive.omega2 * drive.omega2 / (drive.nu + drive.eps2)
    } else {
        0.0
    };
    let ot = 0.25 * drive.omega1 * drive.eta_k[0] * drive.omega2 * (1.0 / drive.eps1 + 1.0 / drive.eps2);
    // η² terms are compensated in this scheme.
    let de = drive.eps1 - drive.eps2;
    let co = MwCoefficients {
        delta_id: 0.25 * (w1 + w2),
        delta_sp: 0.25 * (w1 - w2),
        omega_tilde: ot,
        delta_eps: de,
        omega_gate: 9.0 / 8.0 * ot * ot / (8.0 * de),
        kappa2: ot / de,
    };
    let largest = co.omega_tilde.abs().max(co.delta_sp.abs()).max(co.delta_id.abs());
    if !(drive.omega_mw > largest) {
        return Err(Error::WeakDriving(format!(
            "omega_mw = {:.3e} does not exceed max(omega_tilde, delta_sp, delta_1) = {largest:.3e}",
            drive.omega_mw
        )));
    }
    Ok(co)
}

/// Notes when `Ω_MW` is within a factor 10 of the gate-scale rates.
pub fn mw_warnings(drive: &DriveConfig, co: &MwCoefficients) -> Vec<String> {
    let largest = co.omega_tilde.abs().max(co.delta_sp.abs()).max(co.delta_id.abs());
    if drive.omega_mw < 10.0 * largest {
        vec![format!(
            "omega_mw only {:.1}x the gate-scale rates",
            drive.omega_mw / largest
        )]
    } else {
        Vec::new()
    }
}

/// Ground-triplet Hamiltonian with continuous microwave driving, levels
/// `{g+1, g-1, g0}` per centre. Returns `(H_MW, H_rest)`, the static microwave
/// part and the remaining (gate plus Stark) terms.
pub fn mw_hamiltonian(drive: &DriveConfig, hs: &HilbertSpace) -> Result<(MwCoefficients, Mat, TimeOp)> {
    if hs.nv_levels != 3 {
        return Err(Error::DimensionMismatch(
            "microwave model needs the ground triplet".into(),
        ));
    }
    let co = mw_coefficients(drive)?;
    let a_dag = hs.destroy().adjoint();
    let mut h_mw = Mat::zeros(hs.dim(), hs.dim());
    let mut rest = TimeOp::new();
    for k in 0..hs.n_centers {
        h_mw += hs.nv_op(k, &spin1_sx()) * c(drive.omega_mw / 2.0);
        let stark = hs.nv_op(k, &nv::id_pm(3)) * c(co.delta_id / 2.0) + hs.nv_op(k, &nv::sz(3)) * c(co.delta_sp / 2.0);
        rest.add(stark, 0.0);
        let gate = &a_dag * hs.nv_op(k, &nv::sp(3)) * (I * (co.omega_tilde / 2.0));
        rest.add_hc(gate, co.delta_eps);
    }
    Ok((co, h_mw, rest))
}

/// Rotating-wave model in the microwave interaction frame:
/// `Σ δ_𝟙/2 (-¼σ_x + ¾𝟙_pm + ½|g0⟩⟨g0|) + [i a† Ω̃/2 e^{iΔεt} Ô_k + h.c.]`
/// with `Ô = ½(¾σ_x - ¼𝟙_pm + ½|g0⟩⟨g0|)`.
pub fn mw_rwa_hamiltonian(drive: &DriveConfig, hs: &HilbertSpace) -> Result<(MwCoefficients, TimeOp)> {
    if hs.nv_levels != 3 {
        return Err(Error::DimensionMismatch(
            "microwave model needs the ground triplet".into(),
        ));
    }
    let co = mw_coefficients(drive)?;
    let p0 = ops::ket_bra(3, nv::THIRD, nv::THIRD);
    let sx = nv::sx(3);
    let idpm = nv::id_pm(3);
    let stark = &sx * c(-0.25) + &idpm * c(0.75) + &p0 * c(0.5);
    let o = (&sx * c(0.75) - &idpm * c(0.25) + &p0 * c(0.5)) * c(0.5);
    let a_dag = hs.destroy().adjoint();
    let mut h = TimeOp::new();
    for k in 0..hs.n_centers {
        h.add(hs.nv_op(k, &stark) * c(co.delta_id / 2.0), 0.0);
        h.add_hc(&a_dag * hs.nv_op(k, &o) * (I * (co.omega_tilde / 2.0)), co.delta_eps);
    }
    Ok((co, h))
}

/// Tensor product of two single-centre operators (no phonon factor).
pub fn two_centre(a: &Mat, b: &Mat) -> Mat {
    kron(a, b)
}

#[allow(dead_code)]
fn zero() -> C64 {
    c(0.0)
}
