//! Spherical Bessel functions of the first kind and real spherical harmonics.

use crate::scalar::Real;

/// Below this argument `j_l` is evaluated by its power series.
const SERIES_CUTOFF: f64 = 0.5;

/// Spherical Bessel functions `j_0(x) ..= j_lmax(x)`.
///
/// Small arguments use the power series, arguments above `lmax` use the
/// (then stable) upward recurrence, and everything else uses Miller's
/// downward recurrence normalised against `j_0`.
pub fn spherical_jn_all<T: Real>(lmax: usize, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); lmax + 1];
    let ax = x.abs();
    if ax == T::zero() {
        out[0] = T::one();
        return out;
    }
    if ax < T::lit(SERIES_CUTOFF) {
        for (l, v) in out.iter_mut().enumerate() {
            *v = series_jn(l, x);
        }
        return out;
    }

    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if lmax == 0 {
        out[0] = j0;
        return out;
    }
    let j1 = (j0 - c) / x;

    if x > T::from_int(lmax as i64) {
        out[0] = j0;
        out[1] = j1;
        for l in 1..lmax {
            let lf = T::from_int(l as i64);
            out[l + 1] = (T::lit(2.0) * lf + T::one()) / x * out[l] - out[l - 1];
        }
        return out;
    }

    // Miller: start well above both lmax and x and recur downward.
    let start = lmax + 20 + ax.to_f64_lossy().ceil() as usize + (lmax as f64).sqrt() as usize * 4;
    let mut upper = T::zero();
    let mut cur = T::lit(1e-30);
    let tiny_rescale = T::lit(1e30);
    for n in (1..=start).rev() {
        let nf = T::from_int(n as i64);
        let lower = (T::lit(2.0) * nf + T::one()) / x * cur - upper;
        if n - 1 <= lmax {
            out[n - 1] = lower;
        }
        if n <= lmax {
            out[n] = cur;
        }
        upper = cur;
        cur = lower;
        if cur.abs() > tiny_rescale {
            let f = T::one() / tiny_rescale;
            for v in out.iter_mut() {
                *v = *v * f;
            }
            upper = upper * f;
            cur = cur * f;
        }
    }
    // Normalise with whichever of j0, j1 is better conditioned.
    let scale = if j0.abs() >= j1.abs() { j0 / out[0] } else { j1 / out[1] };
    for v in out.iter_mut() {
        *v = *v * scale;
    }
    out
}

/// Spherical Bessel function `j_l(x)`.
pub fn spherical_jn<T: Real>(l: usize, x: T) -> T {
    spherical_jn_all(l, x)[l]
}

/// Derivative `j_l'(x)`, using `(2l+1) j_l' = l j_{l-1} - (l+1) j_{l+1}`.
pub fn spherical_jn_deriv<T: Real>(l: usize, x: T) -> T {
    let j = spherical_jn_all(l + 1, x);
    if l == 0 {
        return -j[1];
    }
    let lf = T::from_int(l as i64);
    (lf * j[l - 1] - (lf + T::one()) * j[l + 1]) / (T::lit(2.0) * lf + T::one())
}

fn series_jn<T: Real>(l: usize, x: T) -> T {
    // x^l / (2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    let mut lead = T::one();
    for i in 0..=l {
        let xi = if i < l { x } else { T::one() };
        lead = lead * xi / T::from_int(2 * i as i64 + 1);
    }
    let half_x2 = -x * x / T::lit(2.0);
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..40 {
        let kf = T::from_int(k);
        term = term * half_x2 / (kf * T::from_int(2 * l as i64 + 2 * k + 1));
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Real spherical harmonic and its angular derivatives at one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealYlm<T> {
    /// `Y(θ, φ)`
    pub value: T,
    /// `∂Y/∂θ`
    pub d_theta: T,
    /// `(1/sin θ) ∂Y/∂φ`, finite at the poles.
    pub d_phi_over_sin: T,
}

/// Real spherical harmonic `Y_lm(θ, φ)` built from the Condon–Shortley
/// associated Legendre functions:
///
/// * `m > 0`: `√2 K_lm P_l^m(cos θ) cos(mφ)`
/// * `m = 0`: `K_l0 P_l(cos θ)`
/// * `m < 0`: `√2 K_l|m| P_l^|m|(cos θ) sin(|m|φ)`
///
/// These are orthonormal on the sphere and `∫|∇_Ω Y|² dΩ = l(l+1)`, the same
/// as the complex harmonics, so mode normalisations do not depend on `m`.
pub fn real_ylm<T: Real>(l: usize, m: i32, theta: T, phi: T) -> RealYlm<T> {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");
    let (s, x) = theta.sin_cos();

    let norm = ylm_norm::<T>(l, am);
    let (p, dp_dtheta, q) = legendre_with_theta_derivative(l, am, x, s);

    let sqrt2 = T::SQRT_2();
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => RealYlm {
            value: norm * p,
            d_theta: norm * dp_dtheta,
            d_phi_over_sin: T::zero(),
        },
        std::cmp::Ordering::Greater => {
            let mf = T::from_int(am as i64);
            let (sm, cm) = (mf * phi).sin_cos();
            RealYlm {
                value: sqrt2 * norm * p * cm,
                d_theta: sqrt2 * norm * dp_dtheta * cm,
                d_phi_over_sin: -sqrt2 * norm * q * mf * sm,
            }
        }
        std::cmp::Ordering::Less => {
            let mf = T::from_int(am as i64);
            let (sm, cm) = (mf * phi).sin_cos();
            RealYlm {
                value: sqrt2 * norm * p * sm,
                d_theta: sqrt2 * norm * dp_dtheta * sm,
                d_phi_over_sin: sqrt2 * norm * q * mf * cm,
            }
        }
    }
}

/// `sqrt((2l+1)/(4π) (l-m)!/(l+m)!)`
fn ylm_norm<T: Real>(l: usize, m: usize) -> T {
    let mut ratio = T::one();
    for k in (l - m + 1)..=(l + m) {
        ratio = ratio / T::from_int(k as i64);
    }
    (T::from_int(2 * l as i64 + 1) / (T::lit(4.0) * T::PI()) * ratio).sqrt()
}

/// Returns `(P_l^m(x), dP_l^m/dθ, P_l^m(x)/sin θ)` with the Condon–Shortley
/// phase. The last entry is only meaningful for `m ≥ 1`.
fn legendre_with_theta_derivative<T: Real>(l: usize, m: usize, x: T, s: T) -> (T, T, T) {
    if m == 0 {
        let p = legendre_column(l, 0, x, T::one());
        // dP_l/dθ = P_l^1 (Condon–Shortley)
        let dp = if l == 0 {
            T::zero()
        } else {
            let q1 = legendre_column(l, 1, x, s_pow(s, 0));
            q1[l] * s
        };
        return (p[l], dp, T::zero());
    }
    // Q_l^m = P_l^m / s obeys the same recurrence in l, seeded with s^(m-1).
    let q = legendre_column(l, m, x, s_pow(s, m - 1));
    let lf = T::from_int(l as i64);
    let ql = q[l];
    let ql1 = if l > m { q[l - 1] } else { T::zero() };
    let dp = lf * x * ql - (lf + T::from_int(m as i64)) * ql1;
    (ql * s, dp, ql)
}

fn s_pow<T: Real>(s: T, k: usize) -> T {
    let mut r = T::one();
    for _ in 0..k {
        r = r * s;
    }
    r
}

/// Column `P_m^m .. P_l^m` in `l` with seed `P_m^m = (-1)^m (2m-1)!! * seed`.
fn legendre_column<T: Real>(l: usize, m: usize, x: T, seed: T) -> Vec<T> {
    let mut out = vec![T::zero(); l + 1];
    if l < m {
        return out;
    }
    let mut pmm = seed;
    for i in 0..m {
        pmm = -pmm * T::from_int(2 * i as i64 + 1);
    }
    out[m] = pmm;
    if l == m {
        return out;
    }
    out[m + 1] = x * T::from_int(2 * m as i64 + 1) * pmm;
    for ll in (m + 1)..l {
        let llf = T::from_int(ll as i64);
        let mf = T::from_int(m as i64);
        out[ll + 1] = ((T::lit(2.0) * llf + T::one()) * x * out[ll] - (llf + mf) * out[ll - 1]) / (llf - mf + T::one());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: direct power series with many terms in f64.
    fn series_oracle(l: usize, x: f64) -> f64 {
        let mut dfact = 1.0;
        for k in 0..=l {
            dfact *= (2 * k + 1) as f64;
        }
        let mut sum = 0.0;
        let mut term = x.powi(l as i32) / dfact;
        for k in 0..200 {
            sum += term;
            let kk = (k + 1) as f64;
            term *= -x * x / 2.0 / (kk * (2.0 * l as f64 + 2.0 * kk + 1.0));
            if term.abs() < 1e-300 {
                break;
            }
        }
        sum
    }

    #[test]
    fn closed_forms() {
        for &x in &[0.3f64, 1.0, 2.5, 7.0, 20.0, 33.3] {
            let (s, c) = x.sin_cos();
            let j0 = s / x;
            let j1 = s / (x * x) - c / x;
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            let all = spherical_jn_all(2, x);
            assert!((all[0] - j0).abs() < 1e-14, "j0({x})");
            assert!((all[1] - j1).abs() < 1e-14, "j1({x})");
            assert!((all[2] - j2).abs() < 1e-13, "j2({x})");
        }
    }

    #[test]
    fn matches_series_oracle_up_to_l6() {
        for l in 0..=6usize {
            for i in 1..=80 {
                let x = 0.05 * i as f64;
                let want = series_oracle(l, x);
                let got = spherical_jn(l, x);
                let rel = ((got - want) / want).abs();
                assert!(rel < 1e-12, "l={l} x={x} got={got} want={want} rel={rel}");
            }
        }
    }

    #[test]
    fn downward_and_upward_agree_near_crossover() {
        for l in 0..=10usize {
            for &x in &[l as f64 - 0.01, l as f64 + 0.01, 3.7, 11.2] {
                if x <= 0.0 {
                    continue;
                }
                let direct = spherical_jn(l, x);
                let via_higher = spherical_jn_all(l + 5, x)[l];
                assert!((direct - via_higher).abs() < 1e-13 * (1.0 + direct.abs()));
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for l in 0..5 {
            for &x in &[0.2f64, 1.3, 4.4, 9.9] {
                let h = 1e-6;
                let fd = (spherical_jn(l, x + h) - spherical_jn(l, x - h)) / (2.0 * h);
                assert!((spherical_jn_deriv(l, x) - fd).abs() < 1e-8);
            }
        }
        assert!((spherical_jn_deriv(1, 0.0f64) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn f32_evaluation() {
        let v: f32 = spherical_jn(2, 3.0f32);
        assert!((v as f64 - spherical_jn(2, 3.0f64)).abs() < 1e-6);
    }

    #[test]
    fn ylm_orthonormal_on_grid() {
        // Gauss-Legendre in cos(theta) would be nicer; a fine midpoint grid is enough here.
        let nt = 400;
        let np = 400;
        let pairs = [(0, 0), (1, 0), (1, 1), (2, -1), (2, 2), (3, -2)];
        for &(l1, m1) in &pairs {
            for &(l2, m2) in &pairs {
                let mut acc = 0.0;
                for i in 0..nt {
                    let th = (i as f64 + 0.5) * std::f64::consts::PI / nt as f64;
                    for j in 0..np {
                        let ph = (j as f64 + 0.5) * std::f64::consts::TAU / np as f64;
                        let a = real_ylm::<f64>(l1, m1, th, ph).value;
                        let b = real_ylm::<f64>(l2, m2, th, ph).value;
                        acc += a * b * th.sin();
                    }
                }
                acc *= std::f64::consts::PI / nt as f64 * std::f64::consts::TAU / np as f64;
                let want = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                assert!((acc - want).abs() < 1e-4, "({l1},{m1})x({l2},{m2}) = {acc}");
            }
        }
    }

    #[test]
    fn ylm_derivatives_match_finite_differences() {
        let h = 1e-6;
        for l in 0..=4usize {
            for m in -(l as i32)..=(l as i32) {
                for &(th, ph) in &[(0.7, 0.3), (2.1, 4.0), (1.2, 5.5)] {
                    let y = real_ylm::<f64>(l, m, th, ph);
                    let dth =
                        (real_ylm::<f64>(l, m, th + h, ph).value - real_ylm::<f64>(l, m, th - h, ph).value) / (2.0 * h);
                    let dph =
                        (real_ylm::<f64>(l, m, th, ph + h).value - real_ylm::<f64>(l, m, th, ph - h).value) / (2.0 * h);
                    assert!((y.d_theta - dth).abs() < 1e-7, "l={l} m={m}");
                    assert!((y.d_phi_over_sin - dph / th.sin()).abs() < 1e-7, "l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn ylm_finite_at_pole() {
        let y = real_ylm::<f64>(2, 1, 0.0, 0.3);
        assert!(y.d_phi_over_sin.is_finite());
        let y0 = real_ylm::<f64>(2, 0, 0.0, 0.0);
        assert!((y0.value - (5.0 / (4.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-14);
        assert_eq!(y0.d_theta, 0.0);
    }
}
