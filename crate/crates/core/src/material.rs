//! Material constants and nanodiamond geometry. All rates are angular (rad/s).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Elastic, optical and strain-coupling constants of the host crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialModel<T> {
    /// Strain-coupling energy scale (rad/s).
    pub zeta: T,
    /// Nitrogen bond asymmetry factor.
    pub beta: T,
    /// Mass density (kg/m³).
    pub rho: T,
    /// Transverse speed of sound (m/s).
    pub v_t: T,
    /// Longitudinal speed of sound (m/s).
    pub v_l: T,
    /// Effective sound speed of the periodic-boundary dispersion (m/s).
    pub c_pbc: T,
    /// Excited-state decay rate in bulk (rad/s).
    pub gamma_e: T,
    /// Excited-state decay rate in a nanodiamond (rad/s).
    pub gamma_nd: T,
    /// Zero-phonon-line vacuum wavelength (m).
    pub lambda0: T,
    pub n_refr: T,
    /// Fraction of emission into the zero-phonon line.
    pub xi0: T,
    /// Splitting to the next excited state (rad/s).
    pub delta_es: T,
}

/// Diamond parameter set. `zeta` is 610e12 rad/s; see `docs/formats.md`
/// for the angular/ordinary ambiguity and how to override it.
pub fn diamond_default<T: Real>() -> MaterialModel<T> {
    let tau = T::TAU();
    MaterialModel {
        zeta: T::lit(610e12),
        beta: T::one(),
        rho: T::lit(3512.0),
        v_t: T::lit(1.283e4),
        v_l: T::lit(1.831e4),
        c_pbc: T::lit(1.2e4),
        gamma_e: tau * T::lit(15e6),
        gamma_nd: tau * T::lit(7.5e6),
        lambda0: T::lit(637e-9),
        n_refr: T::lit(2.4),
        xi0: T::lit(0.03),
        delta_es: tau * T::lit(4e9),
    }
}

/// Keys accepted by [`MaterialModel::set`].
pub const MATERIAL_KEYS: [&str; 12] = [
    "zeta", "beta", "rho", "v_t", "v_l", "c_pbc", "gamma_e", "gamma_nd", "lambda0", "n_refr", "xi0", "delta_es",
];

impl<T: Real> MaterialModel<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("v_t", self.v_t),
            ("v_l", self.v_l),
            ("c_pbc", self.c_pbc),
            ("gamma_e", self.gamma_e),
            ("gamma_nd", self.gamma_nd),
            ("lambda0", self.lambda0),
            ("delta_es", self.delta_es),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidMaterial {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if !self.zeta.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidMaterial {
                name: "zeta",
                reason: "zeta and beta must be finite".into(),
            });
        }
        if !(self.xi0 > T::zero() && self.xi0 <= T::one()) {
            return Err(Error::InvalidMaterial {
                name: "xi0",
                reason: format!("must lie in (0, 1], got {}", self.xi0),
            });
        }
        if !(self.n_refr >= T::one()) {
            return Err(Error::InvalidMaterial {
                name: "n_refr",
                reason: format!("must be at least 1, got {}", self.n_refr),
            });
        }
        if !(self.v_l > self.v_t) {
            return Err(Error::InvalidMaterial {
                name: "v_l",
                reason: format!("must exceed v_t = {}, got {}", self.v_t, self.v_l),
            });
        }
        Ok(())
    }

    /// Sets one field by name (SI units, rates in rad/s). Returns `false` for
    /// an unknown key.
    pub fn set(&mut self, key: &str, value: T) -> bool {
        let slot = match key {
            "zeta" => &mut self.zeta,
            "beta" => &mut self.beta,
            "rho" => &mut self.rho,
            "v_t" => &mut self.v_t,
            "v_l" => &mut self.v_l,
            "c_pbc" => &mut self.c_pbc,
            "gamma_e" => &mut self.gamma_e,
            "gamma_nd" => &mut self.gamma_nd,
            "lambda0" => &mut self.lambda0,
            "n_refr" => &mut self.n_refr,
            "xi0" => &mut self.xi0,
            "delta_es" => &mut self.delta_es,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub fn cast<U: Real>(&self) -> MaterialModel<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        MaterialModel {
            zeta: c(self.zeta),
            beta: c(self.beta),
            rho: c(self.rho),
            v_t: c(self.v_t),
            v_l: c(self.v_l),
            c_pbc: c(self.c_pbc),
            gamma_e: c(self.gamma_e),
            gamma_nd: c(self.gamma_nd),
            lambda0: c(self.lambda0),
            n_refr: c(self.n_refr),
            xi0: c(self.xi0),
            delta_es: c(self.delta_es),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape<T> {
    Sphere { radius: T },
    Box { edges: [T; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<T> {
    pub shape: Shape<T>,
    /// ρ·V (kg)
    pub mass: T,
}

impl<T: Real> Geometry<T> {
    pub fn volume(&self) -> T {
        shape_volume(&self.shape)
    }

    /// Sphere radius, or `None` for a box.
    pub fn radius(&self) -> Option<T> {
        match self.shape {
            Shape::Sphere { radius } => Some(radius),
            Shape::Box { .. } => None,
        }
    }

    /// Sphere diameter or the box edge along x.
    pub fn diameter(&self) -> T {
        match self.shape {
            Shape::Sphere { radius } => radius * T::lit(2.0),
            Shape::Box { edges } => edges[0],
        }
    }
}

fn shape_volume<T: Real>(shape: &Shape<T>) -> T {
    match *shape {
        Shape::Sphere { radius } => T::lit(4.0) / T::lit(3.0) * T::PI() * radius * radius * radius,
        Shape::Box { edges } => edges[0] * edges[1] * edges[2],
    }
}

pub fn make_geometry<T: Real>(shape: Shape<T>, material: &MaterialModel<T>) -> Result<Geometry<T>> {
    let check = |name: &'static str, v: T| {
        if v > T::zero() && v.is_finite() {
            Ok(())
        } else {
            Err(Error::NonPositiveDimension {
                name,
                value: v.to_f64_lossy(),
            })
        }
    };
    match shape {
        Shape::Sphere { radius } => check("radius", radius)?,
        Shape::Box { edges } => {
            check("edge_x", edges[0])?;
            check("edge_y", edges[1])?;
            check("edge_z", edges[2])?;
        }
    }
    Ok(Geometry {
        shape,
        mass: material.rho * shape_volume(&shape),
    })
}

/// Sphere of the given diameter (m).
pub fn sphere<T: Real>(diameter: T, material: &MaterialModel<T>) -> Result<Geometry<T>> {
    make_geometry(
        Shape::Sphere {
            radius: diameter / T::lit(2.0),
        },
        material,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let m = diamond_default::<f64>();
        m.validate().unwrap();
        assert_eq!(m.v_t, 1.283e4);
        assert_eq!(m.v_l, 1.831e4);
        assert_eq!(m.rho, 3512.0);
        assert_eq!(m.c_pbc, 1.2e4);
        assert!((m.gamma_e / std::f64::consts::TAU - 15e6).abs() < 1e-6);
        assert!((m.gamma_nd / std::f64::consts::TAU - 7.5e6).abs() < 1e-6);
        assert_eq!((m.lambda0, m.n_refr, m.xi0), (637e-9, 2.4, 0.03));
        assert_eq!(m, diamond_default::<f64>());
    }

    #[test]
    fn rejects_bad_values() {
        let mut m = diamond_default::<f64>();
        m.v_l = 1.0e4;
        assert!(matches!(m.validate(), Err(Error::InvalidMaterial { name: "v_l", .. })));
        let mut m = diamond_default::<f64>();
        m.xi0 = 1.5;
        assert!(m.validate().is_err());
        let mut m = diamond_default::<f64>();
        assert!(!m.set("bogus", 1.0));
        assert!(m.set("rho", -1.0));
        assert!(m.validate().is_err());
    }

    #[test]
    fn sphere_mass() {
        let m = diamond_default::<f64>();
        let g = sphere(10e-9, &m).unwrap();
        let want = 3512.0 * 4.0 / 3.0 * std::f64::consts::PI * (5e-9f64).powi(3);
        assert!(((g.mass - want) / want).abs() < 1e-12);
        let g2 = sphere(20e-9, &m).unwrap();
        assert!((g2.mass / g.mass - 8.0).abs() < 1e-12);
    }

    #[test]
    fn cube_and_sphere_of_equal_volume() {
        let m = diamond_default::<f64>();
        let cube = make_geometry(Shape::Box { edges: [10e-9; 3] }, &m).unwrap();
        let r = (1e-24 * 3.0 / (4.0 * std::f64::consts::PI)).cbrt();
        let s = sphere(2.0 * r, &m).unwrap();
        assert!(((cube.mass - s.mass) / s.mass).abs() < 1e-12);
        assert!((2.0 * r - 12.407e-9).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_dimension() {
        let m = diamond_default::<f64>();
        assert_eq!(
            sphere(0.0, &m).unwrap_err(),
            Error::NonPositiveDimension {
                name: "radius",
                value: 0.0
            }
        );
        assert!(make_geometry(
            Shape::Box {
                edges: [1e-9, -1e-9, 1e-9]
            },
            &m
        )
        .is_err());
    }
}
