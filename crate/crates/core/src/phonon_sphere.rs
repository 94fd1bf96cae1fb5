//! Free elastic sphere (Lamb) modes: eigenvalues, displacement fields,
//! normalisation and the deformation-potential coupling profile.
//!
//! Fields use real spherical harmonics (see [`crate::special::real_ylm`]), so
//! every mode shape is a real vector field.

use crate::error::{Error, Result};
use crate::material::{Geometry, MaterialModel};
use crate::phonon_pbc::sqrt_hbar;
use crate::quadrature::integrate;
use crate::roots::{scan_roots, BISECT_TOL, SCAN_STEP};
use crate::scalar::Real;
use crate::special::{real_ylm, spherical_jn_all};

/// Default upper end of the eigenvalue scan.
pub const CHI_MAX: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Torsional,
    Spheroidal,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Torsional => "torsional",
            Family::Spheroidal => "spheroidal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereMode<T> {
    pub family: Family,
    pub l: usize,
    pub m: i32,
    pub n: usize,
    /// χ = kR
    pub chi: T,
    /// ξ = hR = (v_t/v_l)χ; zero for torsional modes.
    pub xi: T,
    /// Angular frequency v_t χ / R.
    pub nu: T,
    /// Mixing coefficients, unit Euclidean norm with `p ≥ 0`; `q = 0` for l = 0.
    pub p: T,
    pub q: T,
    /// Field normalisation N (m^-3/2) such that ∫|u|² d³r = 1.
    pub norm: T,
    pub radius: T,
}

/// Root of the spheroidal eigenvalue problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpheroidalRoot<T> {
    pub chi: T,
    pub xi: T,
    pub p: T,
    pub q: T,
}

/// `(l-1) j_l(χ) - χ j_{l+1}(χ)`
pub fn torsional_function<T: Real>(l: usize, chi: T) -> T {
    let j = spherical_jn_all(l + 1, chi);
    T::from_int(l as i64 - 1) * j[l] - chi * j[l + 1]
}

/// Entries `(α, β, γ, δ)` of the spheroidal boundary-condition matrix.
pub fn spheroidal_matrix<T: Real>(l: usize, chi: T, ratio: T) -> [T; 4] {
    let xi = ratio * chi;
    let jx = spherical_jn_all(l + 1, xi);
    let jc = spherical_jn_all(l + 1, chi);
    let lf = T::from_int(l as i64);
    let two = T::lit(2.0);
    let c2 = chi * chi / xi;
    let jx_lm1 = if l > 0 { jx[l - 1] } else { T::zero() };
    let jc_lm1 = if l > 0 { jc[l - 1] } else { T::zero() };
    let alpha = -c2 * jx[l] + two * (lf + two) * jx[l + 1];
    let beta = lf * chi * jc[l] - two * lf * (lf + two) * jc[l + 1];
    let gamma = -c2 * jx[l] + two * (lf - T::one()) * jx_lm1;
    let delta = (lf + T::one()) * (two * (lf - T::one()) * jc_lm1 - chi * jc[l]);
    [alpha, beta, gamma, delta]
}

/// `α` for l = 0 and `αδ − βγ` otherwise.
pub fn spheroidal_function<T: Real>(l: usize, chi: T, ratio: T) -> T {
    let [a, b, c, d] = spheroidal_matrix(l, chi, ratio);
    if l == 0 {
        a
    } else {
        a * d - b * c
    }
}

/// First `n_max` torsional eigenvalues for angular index `l ≥ 1`.
pub fn torsional_eigenvalues<T: Real>(l: usize, n_max: usize, chi_max: T) -> Result<Vec<T>> {
    if l == 0 {
        return Err(Error::InvalidQuantumNumber("torsional modes need l >= 1".into()));
    }
    scan_roots(
        |x| torsional_function(l, x),
        T::zero(),
        chi_max,
        T::lit(SCAN_STEP),
        n_max,
        T::lit(BISECT_TOL),
    )
}

/// First `n_max` spheroidal eigenvalues with mixing coefficients.
pub fn spheroidal_eigenvalues<T: Real>(
    l: usize,
    n_max: usize,
    material: &MaterialModel<T>,
    chi_max: T,
) -> Result<Vec<SpheroidalRoot<T>>> {
    if !(material.v_l > material.v_t) {
        return Err(Error::InvalidMaterial {
            name: "v_l",
            reason: "spheroidal modes need v_l > v_t".into(),
        });
    }
    let ratio = material.v_t / material.v_l;
    let chis = scan_roots(
        |x| spheroidal_function(l, x, ratio),
        T::zero(),
        chi_max,
        T::lit(SCAN_STEP),
        n_max,
        T::lit(BISECT_TOL),
    )?;
    chis.into_iter()
        .map(|chi| {
            let (p, q) = mixing_coefficients(l, chi, ratio)?;
            Ok(SpheroidalRoot {
                chi,
                xi: ratio * chi,
                p,
                q,
            })
        })
        .collect()
}

fn mixing_coefficients<T: Real>(l: usize, chi: T, ratio: T) -> Result<(T, T)> {
    if l == 0 {
        return Ok((T::one(), T::zero()));
    }
    let [a, b, c, d] = spheroidal_matrix(l, chi, ratio);
    let row1 = (a * a + b * b).sqrt();
    let row2 = (c * c + d * d).sqrt();
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if scale == T::zero() || row1.max(row2) <= T::epsilon() * scale {
        return Err(Error::DegenerateNullspace {
            chi: chi.to_f64_lossy(),
        });
    }
    let (mut p, mut q) = if row1 >= row2 { (b, -a) } else { (d, -c) };
    let len = (p * p + q * q).sqrt();
    p = p / len;
    q = q / len;
    if p < T::zero() || (p == T::zero() && q < T::zero()) {
        p = -p;
        q = -q;
    }
    Ok((p, q))
}

/// Radial building blocks at radius `r`.
struct Radial<T> {
    /// radial-component factor (see [`SphereMode::radial_parts`])
    a: T,
    /// tangential factor
    b: T,
    /// `j_l(k r)` for torsional fields, `j_l(h r)` for divergence
    j: T,
}

impl<T: Real> SphereMode<T> {
    pub fn k(&self) -> T {
        self.chi / self.radius
    }

    pub fn h(&self) -> T {
        self.xi / self.radius
    }

    /// Unnormalised radial functions. For spheroidal modes
    /// `u = N [p ∇ψ(hr)/h + q ∇×∇×(r ψ(kr))/k]`, i.e.
    /// `u_r = (N/k) A Y`, `u_Ω = (N/k) B ∇_Ω Y` with
    /// `A = p k j_l'(hr) + q l(l+1) j_l(kr)/r` and
    /// `B = [p (k/h) j_l(hr) + q (j_l(kr) + kr j_l'(kr))]/r`.
    /// The `1/h` on the gradient term is the scaling under which `(p, q)`
    /// from the boundary matrix gives a traction-free surface.
    fn radial_parts(&self, r: T) -> Radial<T> {
        let l = self.l;
        let lf = T::from_int(l as i64);
        let k = self.k();
        match self.family {
            Family::Torsional => {
                let j = spherical_jn_all(l, k * r)[l];
                Radial {
                    a: T::zero(),
                    b: T::zero(),
                    j,
                }
            }
            Family::Spheroidal => {
                let h = self.h();
                let (jh, jh_over, djh) = bessel_parts(l, h * r);
                let (_, jk_over, djk) = bessel_parts(l, k * r);
                let ll1 = lf * (lf + T::one());
                // j_l(x)/r = k (j_l(x)/x)
                let a = self.p * k * djh + self.q * ll1 * k * jk_over;
                let b = self.p * k * jh_over + self.q * k * (jk_over + djk);
                Radial { a, b, j: jh }
            }
        }
    }

    fn check_inside(&self, r: T) -> Result<()> {
        let tol = self.radius * T::lit(1e-12);
        if r > self.radius + tol {
            return Err(Error::PointOutsideSphere {
                r: r.to_f64_lossy(),
                radius: self.radius.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Displacement (Cartesian components) at a Cartesian point (m).
    pub fn displacement_field(&self, point: [T; 3]) -> Result<[T; 3]> {
        let (r, theta, phi) = to_spherical(point);
        self.check_inside(r)?;
        let [ur, ut, up] = self.displacement_spherical(r, theta, phi);
        Ok(spherical_to_cartesian(theta, phi, ur, ut, up))
    }

    /// Displacement components `(u_r, u_θ, u_φ)` at `(r, θ, φ)`.
    pub fn displacement_spherical(&self, r: T, theta: T, phi: T) -> [T; 3] {
        let y = real_ylm(self.l, self.m, theta, phi);
        let rad = self.radial_parts(r);
        match self.family {
            Family::Torsional => {
                let f = self.norm * rad.j;
                [T::zero(), f * y.d_phi_over_sin, -f * y.d_theta]
            }
            Family::Spheroidal => {
                let f = self.norm / self.k();
                [f * rad.a * y.value, f * rad.b * y.d_theta, f * rad.b * y.d_phi_over_sin]
            }
        }
    }

    /// Analytic divergence at `(r, θ, φ)`: `-N p h j_l(hr) Y` for
    /// spheroidal modes, zero for torsional ones.
    pub fn divergence(&self, r: T, theta: T, phi: T) -> T {
        match self.family {
            Family::Torsional => T::zero(),
            Family::Spheroidal => {
                let h = self.h();
                let y = real_ylm(self.l, self.m, theta, phi).value;
                -self.norm * self.p * h * self.radial_parts(r).j * y
            }
        }
    }

    /// `∫|u|² d³r / N²` by radial quadrature (the angular part is exact).
    fn unit_norm_integral(&self) -> Result<T> {
        let lf = T::from_int(self.l as i64);
        let ll1 = lf * (lf + T::one());
        let k = self.k();
        let integrand = |r: T| {
            let rad = self.radial_parts(r);
            match self.family {
                Family::Torsional => ll1 * rad.j * rad.j * r * r,
                Family::Spheroidal => (rad.a * rad.a + ll1 * rad.b * rad.b) * r * r / (k * k),
            }
        };
        let tol = T::epsilon().sqrt() * T::lit(1e-5);
        // Split into a few panels: the integrand oscillates with period ~R/χ.
        let panels = 4 + (self.chi.to_f64_lossy() / 2.0).ceil() as usize;
        let mut total = T::zero();
        for i in 0..panels {
            let a = self.radius * T::from_int(i as i64) / T::from_int(panels as i64);
            let b = self.radius * T::from_int(i as i64 + 1) / T::from_int(panels as i64);
            total = total + integrate(integrand, a, b, T::zero(), tol)?;
        }
        Ok(total)
    }

    /// `∫|u|² d³r` for the stored normalisation.
    pub fn norm_integral(&self) -> Result<T> {
        Ok(self.unit_norm_integral()? * self.norm * self.norm)
    }
}

/// `(j_l(x), j_l(x)/x, j_l'(x))` with the `x → 0` limits.
fn bessel_parts<T: Real>(l: usize, x: T) -> (T, T, T) {
    let j = spherical_jn_all(l + 1, x);
    let lf = T::from_int(l as i64);
    let third = T::one() / T::lit(3.0);
    if x == T::zero() {
        let lim = if l == 1 { third } else { T::zero() };
        return (j[l], lim, lim);
    }
    let deriv = if l == 0 {
        -j[1]
    } else {
        (lf * j[l - 1] - (lf + T::one()) * j[l + 1]) / (T::lit(2.0) * lf + T::one())
    };
    (j[l], j[l] / x, deriv)
}

pub fn to_spherical<T: Real>(p: [T; 3]) -> (T, T, T) {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if r == T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    let theta = (p[2] / r).max(-T::one()).min(T::one()).acos();
    let phi = p[1].atan2(p[0]);
    (r, theta, phi)
}

pub fn spherical_to_cartesian<T: Real>(theta: T, phi: T, ur: T, ut: T, up: T) -> [T; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        ur * st * cp + ut * ct * cp - up * sp,
        ur * st * sp + ut * ct * sp + up * cp,
        ur * ct - ut * st,
    ]
}

/// Solves for the `n`-th overtone of `(family, l)` and returns the
/// normalised mode with projection `m`.
pub fn solve_mode<T: Real>(
    family: Family,
    l: usize,
    m: i32,
    n: usize,
    geometry: &Geometry<T>,
    material: &MaterialModel<T>,
    chi_max: T,
) -> Result<SphereMode<T>> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::InvalidQuantumNumber(format!(
            "|m| = {} exceeds l = {l}",
            m.abs()
        )));
    }
    let radius = geometry
        .radius()
        .ok_or_else(|| Error::InvalidQuantumNumber("elastic sphere modes need a sphere geometry".into()))?;
    let mode = match family {
        Family::Torsional => {
            let chi = torsional_eigenvalues(l, n + 1, chi_max)?[n];
            SphereMode {
                family,
                l,
                m,
                n,
                chi,
                xi: T::zero(),
                nu: material.v_t * chi / radius,
                p: T::zero(),
                q: T::zero(),
                norm: T::one(),
                radius,
            }
        }
        Family::Spheroidal => {
            let root = spheroidal_eigenvalues(l, n + 1, material, chi_max)?[n];
            SphereMode {
                family,
                l,
                m,
                n,
                chi: root.chi,
                xi: root.xi,
                nu: material.v_t * root.chi / radius,
                p: root.p,
                q: root.q,
                norm: T::one(),
                radius,
            }
        }
    };
    normalize_mode(mode)
}

/// Sets `norm` so that ∫|u|² d³r = 1.
pub fn normalize_mode<T: Real>(mut mode: SphereMode<T>) -> Result<SphereMode<T>> {
    let integral = mode.unit_norm_integral()?;
    if !(integral > T::zero()) {
        return Err(Error::QuadratureNotConverged {
            error: integral.to_f64_lossy(),
        });
    }
    mode.norm = T::one() / integral.sqrt();
    Ok(mode)
}

/// Dimensionless coupling `η = -ζ sqrt(ħ/(2ρν)) div(u) / ν` at a Cartesian
/// position, matching the `H = -ην(-i)(a† - a)|e⟩⟨e|` convention of the
/// periodic-boundary model. Torsional modes give exactly zero.
pub fn coupling_eta<T: Real>(mode: &SphereMode<T>, position: [T; 3], material: &MaterialModel<T>) -> Result<T> {
    let (r, theta, phi) = to_spherical(position);
    mode.check_inside(r)?;
    coupling_eta_spherical(mode, r, theta, phi, material)
}

/// [`coupling_eta`] at spherical coordinates.
pub fn coupling_eta_spherical<T: Real>(
    mode: &SphereMode<T>,
    r: T,
    theta: T,
    phi: T,
    material: &MaterialModel<T>,
) -> Result<T> {
    mode.check_inside(r)?;
    if mode.family == Family::Torsional {
        return Ok(T::zero());
    }
    let pref = material.zeta * sqrt_hbar::<T>() / (T::lit(2.0) * material.rho * mode.nu).sqrt();
    Ok(-pref * mode.divergence(r, theta, phi) / mode.nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{diamond_default, sphere};

    fn diamond() -> MaterialModel<f64> {
        diamond_default()
    }

    #[test]
    fn torsional_l1_is_j2_root() {
        let r = torsional_eigenvalues(1, 2, 30.0f64).unwrap();
        assert!((r[0] - 5.763_459_196_9).abs() < 1e-9, "{}", r[0]);
        assert!(crate::special::spherical_jn(2, r[0]).abs() < 1e-12);
    }

    #[test]
    fn torsional_l0_rejected() {
        assert!(matches!(
            torsional_eigenvalues::<f64>(0, 1, 30.0),
            Err(Error::InvalidQuantumNumber(_))
        ));
    }

    #[test]
    fn breathing_and_quadrupole_roots() {
        let m = diamond();
        let b = spheroidal_eigenvalues(0, 3, &m, 30.0).unwrap();
        assert!((b[0].chi - 3.015_938_2).abs() < 1e-6, "{}", b[0].chi);
        assert!((b[1].chi - 8.4868).abs() < 1e-3);
        assert_eq!(b[0].q, 0.0);
        let q = spheroidal_eigenvalues(2, 3, &m, 30.0).unwrap();
        assert!((q[0].chi - 2.59667).abs() < 1e-4);
        assert!((q[1].chi - 4.16719).abs() < 1e-4);
        assert!(q[0].chi < b[0].chi);
        let d = spheroidal_eigenvalues(1, 2, &m, 30.0).unwrap();
        assert!((d[0].chi - 2.87066).abs() < 1e-4);
    }

    #[test]
    fn mixing_vector_is_null_vector() {
        let m = diamond();
        let ratio = m.v_t / m.v_l;
        for l in 1..=4 {
            for root in spheroidal_eigenvalues(l, 3, &m, 30.0).unwrap() {
                let [a, b, c, d] = spheroidal_matrix(l, root.chi, ratio);
                let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
                assert!((a * root.p + b * root.q).abs() < 1e-9 * scale);
                assert!((c * root.p + d * root.q).abs() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn unit_norm_and_m_independence() {
        let m = diamond();
        let g = sphere(10e-9, &m).unwrap();
        for (fam, l) in [(Family::Spheroidal, 0), (Family::Spheroidal, 2), (Family::Torsional, 1)] {
            let a = solve_mode(fam, l, 0, 0, &g, &m, 30.0).unwrap();
            assert!((a.norm_integral().unwrap() - 1.0).abs() < 1e-8);
            if l > 0 {
                let b = solve_mode(fam, l, 1, 0, &g, &m, 30.0).unwrap();
                assert_eq!(a.nu, b.nu);
                assert_eq!(a.norm, b.norm);
            }
        }
    }

    #[test]
    fn breathing_field_radial() {
        let m = diamond();
        let mode = solve_mode(Family::Spheroidal, 0, 0, 0, &sphere(10e-9, &m).unwrap(), &m, 30.0).unwrap();
        let u = mode.displacement_spherical(2e-9, 0.4, 1.1);
        let v = mode.displacement_spherical(2e-9, 2.0, -0.3);
        assert_eq!(u[1], 0.0);
        assert_eq!(u[2], 0.0);
        assert!((u[0] - v[0]).abs() < 1e-12 * u[0].abs());
    }

    #[test]
    fn torsional_has_no_radial_part_and_no_coupling() {
        let m = diamond();
        let mode = solve_mode(Family::Torsional, 2, 1, 0, &sphere(10e-9, &m).unwrap(), &m, 30.0).unwrap();
        let p = [1e-9, 2e-9, -1.5e-9];
        let u = mode.displacement_field(p).unwrap();
        let rhat = [p[0], p[1], p[2]];
        let dot: f64 = (0..3).map(|i| u[i] * rhat[i]).sum();
        assert!(dot.abs() < 1e-12 * u.iter().map(|x| x.abs()).sum::<f64>());
        assert_eq!(coupling_eta(&mode, p, &m).unwrap(), 0.0);
    }

    #[test]
    fn outside_point_rejected() {
        let m = diamond();
        let mode = solve_mode(Family::Spheroidal, 0, 0, 0, &sphere(10e-9, &m).unwrap(), &m, 30.0).unwrap();
        assert!(matches!(
            mode.displacement_field([6e-9, 0.0, 0.0]),
            Err(Error::PointOutsideSphere { .. })
        ));
    }

    #[test]
    fn breathing_eta_vs_pbc() {
        let m = diamond();
        let g = sphere(15e-9, &m).unwrap();
        let mode = solve_mode(Family::Spheroidal, 0, 0, 0, &g, &m, 30.0).unwrap();
        let eta = coupling_eta(&mode, [0.0; 3], &m).unwrap();
        let pbc = crate::phonon_pbc::lowest_mode(&g, &m).unwrap().eta;
        assert!((eta / pbc - 1.6416).abs() < 2e-3, "{}", eta / pbc);
    }
}
