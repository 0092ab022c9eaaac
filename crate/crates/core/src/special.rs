//! Terminating confluent hypergeometric series, associated Laguerre
//! polynomials and composite Simpson quadrature.

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Rising factorial `(x)_n = x (x+1) ... (x+n-1)`, with `(x)_0 = 1`.
pub fn pochhammer(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// Degree-`n` polynomial `1F1(-n; b; z)` with its coefficients cached.
#[derive(Debug, Clone, PartialEq)]
pub struct KummerPoly {
    n: u32,
    b: f64,
    coefficients: Vec<f64>,
}

impl KummerPoly {
    pub fn new(n: u32, b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: format!("second Kummer parameter must be positive, got {b}"),
            });
        }
        // c_{k+1} = c_k (k - n) / ((b + k)(k + 1))
        let mut coefficients = Vec::with_capacity(n as usize + 1);
        let mut c = 1.0;
        coefficients.push(c);
        for k in 0..n {
            let kf = k as f64;
            c *= (kf - n as f64) / ((b + kf) * (kf + 1.0));
            coefficients.push(c);
        }
        Ok(Self { n, b, coefficients })
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * z + c)
    }

    /// Value, first and second derivative in `z`.
    pub fn eval_with_derivatives(&self, z: f64) -> (f64, f64, f64) {
        let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            ddp = ddp * z + 2.0 * dp;
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp, ddp)
    }

    /// `z g'' + (b - z) g' + n g`, zero for the exact polynomial.
    pub fn ode_residual(&self, z: f64) -> f64 {
        let (g, dg, ddg) = self.eval_with_derivatives(z);
        z * ddg + (self.b - z) * dg + self.n as f64 * g
    }
}

pub fn kummer_poly(n: u32, b: f64, z: f64) -> Result<f64> {
    Ok(KummerPoly::new(n, b)?.eval(z))
}

/// Associated Laguerre polynomial `L_n^(alpha)(z)` by forward recurrence.
pub fn laguerre_assoc(n: u32, alpha: f64, z: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("Laguerre parameter must exceed -1, got {alpha}"),
        });
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 1.0 + alpha - z;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - z) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Integration target: either a callable or samples already on a grid.
pub enum Integrand<'a> {
    Callable(&'a dyn Fn(f64) -> f64),
    Sampled(&'a GridFunction),
}

/// Composite Simpson rule.
///
/// For `Integrand::Callable` the interval `[a, b]` is split into `n_panels`
/// (even) panels. For `Integrand::Sampled` the grid's own points are used and
/// `a`, `b`, `n_panels` must describe that grid.
pub fn integrate(f: Integrand<'_>, a: f64, b: f64, n_panels: usize) -> Result<f64> {
    if n_panels == 0 || !n_panels.is_multiple_of(2) {
        return Err(Error::InvalidPanels(n_panels));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    match f {
        Integrand::Callable(g) => {
            let h = (b - a) / n_panels as f64;
            let inner: f64 = (1..n_panels)
                .map(|i| {
                    let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                    w * g(a + i as f64 * h)
                })
                .sum();
            Ok(h / 3.0 * (g(a) + inner + g(b)))
        }
        Integrand::Sampled(grid) => {
            if grid.len() != n_panels + 1 || grid.r_min() != a || grid.r_max() != b {
                return Err(Error::GridMismatch);
            }
            Ok(simpson_samples(grid.values(), grid.step()))
        }
    }
}

/// Simpson over an odd number of equally spaced samples.
pub fn simpson_samples(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let inner: f64 = y[1..n - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (y[0] + inner + y[n - 1])
}

/// Simpson over a grid function; requires an odd point count.
pub fn integrate_grid(f: &GridFunction) -> Result<f64> {
    integrate(Integrand::Sampled(f), f.r_min(), f.r_max(), f.len() - 1)
}

/// Upper limit `R` such that `r^p e^{-2 eta r}` has fallen to `tol` of its
/// maximum (at `p / (2 eta)`), found by bisection on the log-envelope.
pub fn truncation_radius(power: f64, eta: f64, tol: f64) -> f64 {
    let decay = 2.0 * eta;
    let log_env = |r: f64| {
        if power > 0.0 {
            let peak = power / decay;
            power * (r / peak).ln() - decay * (r - peak)
        } else {
            -decay * r
        }
    };
    let target = tol.ln();
    let mut lo = if power > 0.0 { power / decay } else { 0.0 };
    let mut hi = lo.max(1.0 / decay) * 2.0 + 1.0 / decay;
    while log_env(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_env(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(7.3, 0), 1.0);
        assert_eq!(pochhammer(3.0, 2), 12.0);
        assert_eq!(pochhammer(0.5, 3), 1.875);
    }

    #[test]
    fn kummer_examples() {
        for z in [0.0, 0.3, 17.0] {
            assert_eq!(kummer_poly(0, 2.5, z).unwrap(), 1.0);
        }
        assert_abs_diff_eq!(kummer_poly(1, 2.0, 2.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            kummer_poly(2, 2.0, 1.0).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-15
        );
        assert!(kummer_poly(2, 0.0, 1.0).is_err());
        assert!(kummer_poly(2, -1.5, 1.0).is_err());
    }

    #[test]
    fn kummer_coefficients_match_pochhammer_form() {
        let p = KummerPoly::new(6, 2.7).unwrap();
        let mut fact = 1.0;
        for (k, &c) in p.coefficients().iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            let expected = pochhammer(-6.0, k as u32) / (pochhammer(2.7, k as u32) * fact);
            assert_abs_diff_eq!(c, expected, epsilon = 1e-14 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre_assoc(0, 0.3, 5.0).unwrap(), 1.0);
        assert_abs_diff_eq!(laguerre_assoc(1, 0.0, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        // L_3^(2)(2) = (3)_3/3! 1F1(-3; 3; 2) = 10 * 1F1(-3;3;2)
        let lhs = laguerre_assoc(3, 2.0, 2.0).unwrap();
        let rhs = 10.0 * kummer_poly(3, 3.0, 2.0).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-13);
        // direct: L_3^(2)(x) = 10 - 10x + 5x^2/2 - x^3/6
        assert_abs_diff_eq!(lhs, 10.0 - 20.0 + 10.0 - 8.0 / 6.0, epsilon = 1e-13);
        assert!(laguerre_assoc(2, -1.0, 1.0).is_err());
    }

    #[test]
    fn simpson_examples() {
        let one = |_r: f64| 1.0;
        assert_abs_diff_eq!(
            integrate(Integrand::Callable(&one), 0.0, 1.0, 2).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let g = |r: f64| r.powi(3) * (-2.0 * r).exp();
        let v = integrate(Integrand::Callable(&g), 0.0, 40.0, 4000).unwrap();
        assert_abs_diff_eq!(v, 0.375, epsilon = 1e-8);
        let y2 = |r: f64| (r.powf(1.5) * (-r / 3.0).exp()).powi(2);
        let v = integrate(Integrand::Callable(&y2), 0.0, 200.0, 20000).unwrap();
        assert_abs_diff_eq!(v, 30.375, epsilon = 1e-6);
        assert_eq!(
            integrate(Integrand::Callable(&one), 0.0, 1.0, 3),
            Err(Error::InvalidPanels(3))
        );
        assert_eq!(
            integrate(Integrand::Callable(&one), 0.0, 1.0, 0),
            Err(Error::InvalidPanels(0))
        );
        assert!(integrate(Integrand::Callable(&one), 1.0, 0.0, 2).is_err());
    }

    #[test]
    fn simpson_sampled_matches_callable() {
        let f = |r: f64| r.sin() * r;
        let grid = GridFunction::from_fn(0.5, 2.5, 101, f).unwrap();
        let a = integrate(Integrand::Sampled(&grid), 0.5, 2.5, 100).unwrap();
        let b = integrate(Integrand::Callable(&f), 0.5, 2.5, 100).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        assert!(integrate(Integrand::Sampled(&grid), 0.5, 2.5, 50).is_err());
    }

    #[test]
    fn simpson_fourth_order() {
        // antiderivative of r^k e^{-r} is -e^{-r} sum_i k!/i! r^i
        let antiderivative = |k: i32, r: f64| {
            let mut term = 1.0;
            let mut sum = 0.0;
            for i in (0..=k).rev() {
                sum += term * r.powi(i);
                term *= i as f64;
            }
            -(-r).exp() * sum
        };
        for k in 0..=6 {
            let f = move |r: f64| r.powi(k) * (-r).exp();
            let (a, b) = (0.5, 30.0);
            let exact = antiderivative(k, b) - antiderivative(k, a);
            let e1 = (integrate(Integrand::Callable(&f), a, b, 200).unwrap() - exact).abs();
            let e2 = (integrate(Integrand::Callable(&f), a, b, 400).unwrap() - exact).abs();
            let ratio = e1 / e2;
            assert!((ratio - 16.0).abs() < 1.6, "k={k} ratio={ratio}");
        }
    }

    #[test]
    fn truncation_radius_controls_tail() {
        let (p, eta) = (3.0, 1.0 / 3.0);
        let r = truncation_radius(p, eta, 1e-16);
        let env = |x: f64| x.powf(p) * (-2.0 * eta * x).exp();
        let peak = env(p / (2.0 * eta));
        assert!(env(r) <= 1.0001e-16 * peak);
        assert!(env(r * 0.99) > 1e-16 * peak);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kummer_satisfies_ode(n in 0u32..=20, b in 0.01f64..=10.0, z in 0.0f64..=50.0) {
                let p = KummerPoly::new(n, b).unwrap();
                // magnitude of the alternating series sets the attainable scale
                let abs_poly = KummerPoly { n, b, coefficients: p.coefficients().iter().map(|c| c.abs()).collect() };
                let (g, dg, ddg) = abs_poly.eval_with_derivatives(z);
                let scale = z * ddg + (b + z) * dg + n as f64 * g;
                prop_assert!(p.ode_residual(z).abs() <= 1e-10 * scale.max(1.0));
            }

            #[test]
            fn laguerre_kummer_identity(n in 0u32..=20, b in 0.01f64..=10.0, z in 0.0f64..=50.0) {
                let alpha = b - 1.0;
                let fact: f64 = (1..=n).map(|i| i as f64).product();
                let rhs = pochhammer(b, n) / fact * kummer_poly(n, b, z).unwrap();
                let lhs = laguerre_assoc(n, alpha, z).unwrap();
                // cancellation in the alternating sum sets the attainable scale
                let p = KummerPoly::new(n, b).unwrap();
                let scale: f64 = p.coefficients().iter().enumerate()
                    .map(|(k, c)| (c * z.powi(k as i32)).abs()).sum::<f64>() * pochhammer(b, n) / fact;
                prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0), "lhs={} rhs={}", lhs, rhs);
            }
        }
    }
}
