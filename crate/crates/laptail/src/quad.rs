//! Numeric integration primitives: composite Gauss-Legendre panels, an
//! adaptive Simpson rule with error accounting, and the moment integral of
//! the Weibull-type summand family.

use std::sync::OnceLock;

use crate::rational::Rational;

const GL_POINTS: usize = 24;

/// Nodes and weights of the 24-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre polynomial.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = GL_POINTS;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            // Chebyshev-like initial guess for the i-th root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.push((x, w));
        }
        out
    })
}

/// Value and derivative of the degree-`n` Legendre polynomial by the
/// three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss-Legendre integration over `panels` equal panels.
pub fn integrate_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let table = gauss_legendre();
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut panel = 0.0;
        for &(x, w) in table {
            panel += w * f(mid + half * x);
        }
        acc += panel * half;
    }
    acc
}

/// Adaptive Simpson integration with Richardson correction. Returns the
/// value together with an accumulated error estimate; `tol` is absolute.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (lv, le) = simpson_step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1);
    let (rv, re) = simpson_step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
    (lv + rv, le + re)
}

/// The `j`-th moment of the summand family with tail `exp(-t^alpha)`,
/// computed by quadrature of `integral of j t^(j-1) exp(-t^alpha) dt`.
///
/// With `alpha = p/q` in lowest terms, the substitution `t = v^q` turns the
/// integrand into `j q v^(qj - 1) exp(-v^p)`, which is analytic, so the
/// composite Gauss-Legendre panels converge to full precision. This routine
/// is deliberately independent of the closed form `Gamma(j/alpha + 1)`.
pub fn weibull_moment(alpha: &Rational, j: u64) -> f64 {
    use num_traits::ToPrimitive;
    if j == 0 {
        return 1.0;
    }
    let p = alpha.numer().to_u32().expect("alpha fits in small integers");
    let q = alpha.denom().to_u32().expect("alpha fits in small integers");
    let m = (q as u64 * j - 1) as i32;
    let pf = p as f64;
    // Peak of v^m e^{-v^p} sits at v^p = m/p; integrate far enough past it.
    let u_peak = m as f64 / pf;
    let u_end = u_peak + 40.0 * (u_peak + 4.0).sqrt() + 60.0;
    let v_end = u_end.powf(1.0 / pf);
    let integrand = |v: f64| v.powi(m) * (-v.powi(p as i32)).exp();
    let panels = (8.0 * v_end).ceil().max(64.0) as usize;
    (j * q as u64) as f64 * integrate_panels(integrand, 0.0, v_end, panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        let total: f64 = gauss_legendre().iter().map(|&(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn panels_integrate_polynomials_exactly() {
        let v = integrate_panels(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 4);
        // Antiderivative x^4/4 - x^2 + x evaluated on [-1, 3].
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_simpson_exp() {
        let (v, e) = adaptive_simpson(&|x: f64| (-x).exp(), 0.0, 30.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-10, "value {v}, estimate {e}");
    }

    #[test]
    fn weibull_moments_match_factorials() {
        // alpha = 1/3: mu_j = (3j)!.
        let alpha = Rational::new(1, 3);
        let expected = [6.0, 720.0, 362880.0, 479001600.0];
        for (j, want) in expected.iter().enumerate() {
            let got = weibull_moment(&alpha, j as u64 + 1);
            assert!(
                (got - want).abs() / want < 1e-10,
                "j = {}: {} vs {}",
                j + 1,
                got,
                want
            );
        }
        // alpha = 1/2: mu_1 = 2! = 2, mu_2 = 4! = 24.
        let half = Rational::new(1, 2);
        assert!((weibull_moment(&half, 1) - 2.0).abs() < 1e-10);
        assert!((weibull_moment(&half, 2) - 24.0).abs() < 1e-9);
        // alpha = 2/3: mu_2 = Gamma(4) = 6.
        let two_thirds = Rational::new(2, 3);
        assert!((weibull_moment(&two_thirds, 2) - 6.0).abs() < 1e-9);
    }
}
