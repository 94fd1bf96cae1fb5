//! Lowest longitudinal acoustic mode under periodic boundary conditions.

use crate::error::{Error, Result};
use crate::material::{Geometry, MaterialModel, Shape};
use crate::scalar::{Real, HBAR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbcMode<T> {
    /// Wavevector magnitude (1/m).
    pub k: T,
    /// Unit vector along k (longitudinal branch, so also the polarisation).
    pub direction: [T; 3],
    /// Angular frequency c·k (rad/s).
    pub nu: T,
    /// Lamb-Dicke coupling coefficient.
    pub eta: T,
}

/// `sqrt(ħ)` kept separate so `f32` never sees ħ itself.
pub(crate) fn sqrt_hbar<T: Real>() -> T {
    T::lit(HBAR.sqrt())
}

/// `η = ζ (k/ν) sqrt(ħ / (2 M ν))`.
pub fn eta_formula<T: Real>(zeta: T, k: T, nu: T, mass: T) -> T {
    zeta * (k / nu) * sqrt_hbar::<T>() / (T::lit(2.0) * mass * nu).sqrt()
}

fn mode_for_length<T: Real>(length: T, direction: [T; 3], mass: T, material: &MaterialModel<T>) -> Result<PbcMode<T>> {
    if !(length > T::zero()) {
        return Err(Error::NonPositiveDimension {
            name: "length",
            value: length.to_f64_lossy(),
        });
    }
    let k = T::TAU() / length;
    let nu = material.c_pbc * k;
    Ok(PbcMode {
        k,
        direction,
        nu,
        eta: eta_formula(material.zeta, k, nu, mass),
    })
}

/// Lowest mode: `k = 2π/l` with `l` the sphere diameter, or the longest box
/// edge (first one on ties).
pub fn lowest_mode<T: Real>(geometry: &Geometry<T>, material: &MaterialModel<T>) -> Result<PbcMode<T>> {
    match geometry.shape {
        Shape::Sphere { radius } => mode_for_length(
            radius * T::lit(2.0),
            [T::one(), T::zero(), T::zero()],
            geometry.mass,
            material,
        ),
        Shape::Box { edges } => {
            let mut axis = 0;
            for i in 1..3 {
                if edges[i] > edges[axis] {
                    axis = i;
                }
            }
            eta_general_shape(geometry, axis, material)
        }
    }
}

/// Mode along box axis `axis` (0 = x, 1 = y, 2 = z); `η ∝ sqrt(l / V)`.
pub fn eta_general_shape<T: Real>(
    geometry: &Geometry<T>,
    axis: usize,
    material: &MaterialModel<T>,
) -> Result<PbcMode<T>> {
    let edges = match geometry.shape {
        Shape::Box { edges } => edges,
        Shape::Sphere { radius } => [radius * T::lit(2.0); 3],
    };
    if axis > 2 {
        return Err(Error::InvalidQuantumNumber(format!("box axis {axis} out of range")));
    }
    let mut dir = [T::zero(); 3];
    dir[axis] = T::one();
    mode_for_length(edges[axis], dir, geometry.mass, material)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{diamond_default, make_geometry, sphere};

    #[test]
    fn ten_nm_frequency() {
        let m = diamond_default::<f64>();
        let mode = lowest_mode(&sphere(10e-9, &m).unwrap(), &m).unwrap();
        let f = mode.nu / std::f64::consts::TAU;
        assert!((f - 1.2e12).abs() / 1.2e12 < 1e-12);
    }

    #[test]
    fn angular_zeta_example() {
        let mut m = diamond_default::<f64>();
        m.zeta = std::f64::consts::TAU * 610e12;
        let mode = lowest_mode(&sphere(15e-9, &m).unwrap(), &m).unwrap();
        assert!((mode.eta - 1.3131e-2).abs() < 1e-5, "{}", mode.eta);
        // plug-in oracle
        let r: f64 = 7.5e-9;
        let mass = 3512.0 * 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
        let nu = 1.2e4 * std::f64::consts::TAU / 15e-9;
        let want = m.zeta / 1.2e4 * (1.054_571_817e-34 / (2.0 * mass * nu)).sqrt();
        assert!(((mode.eta - want) / want).abs() < 1e-13);
    }

    #[test]
    fn doubling_halves_eta() {
        let m = diamond_default::<f64>();
        let a = lowest_mode(&sphere(12e-9, &m).unwrap(), &m).unwrap();
        let b = lowest_mode(&sphere(24e-9, &m).unwrap(), &m).unwrap();
        assert!((b.eta / a.eta - 0.5).abs() < 1e-14);
    }

    #[test]
    fn box_axes() {
        let m = diamond_default::<f64>();
        let g = make_geometry(
            Shape::Box {
                edges: [20e-9, 10e-9, 10e-9],
            },
            &m,
        )
        .unwrap();
        let x = eta_general_shape(&g, 0, &m).unwrap();
        let y = eta_general_shape(&g, 1, &m).unwrap();
        // η ∝ sqrt(l / V): same volume, so ratio sqrt(lx/ly)
        assert!((x.eta / y.eta - 2f64.sqrt()).abs() < 1e-13);
        assert_eq!(lowest_mode(&g, &m).unwrap(), x);
    }

    #[test]
    fn slab_scaling() {
        // fixed thickness along x, square face of side s: η ∝ 1/s
        let m = diamond_default::<f64>();
        let eta = |s: f64| {
            let g = make_geometry(Shape::Box { edges: [5e-9, s, s] }, &m).unwrap();
            eta_general_shape(&g, 0, &m).unwrap().eta
        };
        assert!((eta(40e-9) / eta(10e-9) - 0.25).abs() < 1e-13);
    }

    #[test]
    fn cube_vs_equal_mass_sphere() {
        let m = diamond_default::<f64>();
        let s = sphere(12e-9, &m).unwrap();
        let edge_y = s.volume() / (12e-9 * 12e-9);
        let b = make_geometry(
            Shape::Box {
                edges: [12e-9, edge_y, 12e-9],
            },
            &m,
        )
        .unwrap();
        let es = lowest_mode(&s, &m).unwrap().eta;
        let eb = eta_general_shape(&b, 0, &m).unwrap().eta;
        assert!((es / eb - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f32_matches_f64() {
        let m32 = diamond_default::<f32>();
        let m64 = diamond_default::<f64>();
        let e32 = lowest_mode(&sphere(15e-9f32, &m32).unwrap(), &m32).unwrap().eta;
        let e64 = lowest_mode(&sphere(15e-9, &m64).unwrap(), &m64).unwrap().eta;
        assert!(((e32 as f64 - e64) / e64).abs() < 1e-5);
    }
}
