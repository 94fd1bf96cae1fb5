//! Bracketing root search for smooth transcendental functions.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default sign-change scan step.
pub const SCAN_STEP: f64 = 0.01;
/// Default bisection tolerance on the abscissa.
pub const BISECT_TOL: f64 = 1e-12;

/// Bisection on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite sign.
pub fn bisect<T: Real, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T, tol: T) -> T {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = (a + b) / T::lit(2.0);
        if (b - a).abs() <= tol || m == a || m == b {
            return m;
        }
        let fm = f(m);
        if fm == T::zero() {
            return m;
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a + b) / T::lit(2.0)
}

/// First `count` roots of `f` on `(lo, hi]` found by a uniform sign-change
/// scan with step `step`, each refined by bisection.
///
/// Roots where `f` touches zero without changing sign are not found; the
/// eigenvalue functions used here only have simple roots.
pub fn scan_roots<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, step: T, count: usize, tol: T) -> Result<Vec<T>> {
    let mut roots = Vec::with_capacity(count);
    if count == 0 {
        return Ok(roots);
    }
    let n_steps = ((hi - lo) / step).ceil().to_f64_lossy() as usize;
    let mut x0 = lo + step * T::lit(1e-3);
    let mut f0 = f(x0);
    for i in 1..=n_steps {
        let x1 = (lo + step * T::from_int(i as i64)).min(hi);
        let f1 = f(x1);
        if f1 == T::zero() {
            roots.push(x1);
        } else if (f0 < T::zero()) != (f1 < T::zero()) && f0 != T::zero() {
            roots.push(bisect(&f, x0, x1, tol));
        }
        if roots.len() == count {
            return Ok(roots);
        }
        x0 = x1;
        f0 = f1;
    }
    Err(Error::NoRootInBracket {
        chi_max: hi.to_f64_lossy(),
        found: roots.len(),
        wanted: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_roots() {
        let r = scan_roots(|x: f64| x.sin(), 0.0, 10.0, 0.01, 3, 1e-13).unwrap();
        for (i, x) in r.iter().enumerate() {
            assert!((x - std::f64::consts::PI * (i + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_missing_roots() {
        let e = scan_roots(|x: f64| x.sin(), 0.0, 4.0, 0.01, 3, 1e-12).unwrap_err();
        assert_eq!(
            e,
            Error::NoRootInBracket {
                chi_max: 4.0,
                found: 1,
                wanted: 3
            }
        );
    }

    #[test]
    fn works_in_f32() {
        let r = scan_roots(|x: f32| x * x - 2.0, 0.0, 3.0, 0.01, 1, 1e-6).unwrap();
        assert!((r[0] - 2f32.sqrt()).abs() < 1e-5);
    }
}
