//! Independent finite-difference eigensolver for
//! `-y'' + [l(l+1)/r^2 - 2B/r] y = -eta^2 y`.
//!
//! The operator is discretized on `r_i = i h`, `i = 1..=N`, `h = r_max/(N+1)`
//! with Dirichlet ends, giving a symmetric tridiagonal matrix whose lowest
//! eigenvalues are isolated by Sturm-sequence bisection. Nothing here reads
//! the closed-form spectrum; it only receives `l(l+1)` and `B`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelParameters, QuantumNumbers};
use crate::special::truncation_radius;
use crate::spectrum::{bound_energy, branch_delta};

pub const DEFAULT_POINTS: usize = 8000;
/// Pass threshold on the relative deviation of `eta^2`.
pub const PASS_TOLERANCE: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub n_points: usize,
    /// Defaults to a radius past which the slowest requested state is
    /// negligible (see [`default_r_max`]).
    pub r_max: Option<f64>,
    pub n_eigen: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_POINTS,
            r_max: None,
            n_eigen: 3,
        }
    }
}

/// `max(40 / eta_est, R)` with `eta_est = B / delta` and `R` the radius where
/// `r^{2 delta + 2 n} e^{-2 eta_min r}` has fallen to `1e-16` of its peak,
/// `eta_min = B / (delta + n_eigen)`.
pub fn default_r_max(ell_eff_sq: f64, b: f64, n_eigen: usize) -> f64 {
    let delta = branch_delta(ell_eff_sq);
    let eta_est = b / delta;
    let eta_min = b / (delta + n_eigen as f64);
    let power = 2.0 * delta + 2.0 * n_eigen.saturating_sub(1) as f64;
    (40.0 / eta_est).max(truncation_radius(power, eta_min, 1e-16))
}

/// Number of eigenvalues of the tridiagonal `(diag, off)` strictly below `x`.
fn sturm_count(diag: &[f64], off_sq: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off_sq / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `cfg.n_eigen` eigenvalues, ascending.
pub fn fd_eigenvalues(ell_eff_sq: f64, b: f64, cfg: &OracleConfig) -> Result<Vec<f64>> {
    if ell_eff_sq < -0.25 {
        return Err(Error::IllPosed { ell_eff_sq });
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::NoBoundState {
            b,
            threshold: f64::NAN,
        });
    }
    if cfg.n_points < 3 {
        return Err(Error::GridTooCoarse(cfg.n_points));
    }
    let r_max = cfg
        .r_max
        .unwrap_or_else(|| default_r_max(ell_eff_sq, b, cfg.n_eigen));
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "r_max must be positive, got {r_max}"
        )));
    }

    let n = cfg.n_points;
    let h = r_max / (n + 1) as f64;
    let h2 = h * h;
    let diag: Vec<f64> = (1..=n)
        .map(|i| {
            let r = i as f64 * h;
            2.0 / h2 + ell_eff_sq / (r * r) - 2.0 * b / r
        })
        .collect();
    let off_sq = 1.0 / (h2 * h2);

    // Gershgorin: every eigenvalue is at least min(diag) - 2/h^2
    let lower = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 / h2;
    let found = sturm_count(&diag, off_sq, 0.0);
    if found < cfg.n_eigen {
        return Err(Error::TooFewBoundStates {
            found,
            requested: cfg.n_eigen,
        });
    }

    let scale = lower.abs().max(b * b);
    (0..cfg.n_eigen)
        .into_par_iter()
        .map(|k| {
            let (mut lo, mut hi) = (lower, 0.0);
            for _ in 0..300 {
                if hi - lo <= 1e-12 * scale {
                    return Ok(0.5 * (lo + hi));
                }
                let mid = 0.5 * (lo + hi);
                if sturm_count(&diag, off_sq, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Err(Error::NonConvergence { index: k })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossRow {
    pub m: i64,
    pub n: u32,
    pub delta: f64,
    pub b: f64,
    /// `-eta_n^2` from the closed form.
    pub closed_form: f64,
    pub fd: Option<f64>,
    pub rel_dev: Option<f64>,
    pub e_plus_closed: f64,
    pub e_plus_fd: Option<f64>,
    pub e_plus_dev: Option<f64>,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidationReport {
    pub tolerance: f64,
    pub n_points: usize,
    pub rows: Vec<CrossRow>,
    pub all_pass: bool,
}

/// Compares `-eta_n^2` with the oracle for every `(m, n)` in `qn_list` on
/// top of `base`. Per-row failures are recorded, not propagated.
pub fn cross_validate(
    base: &ModelParameters,
    qn_list: &[QuantumNumbers],
    cfg: &OracleConfig,
) -> CrossValidationReport {
    let rows: Vec<CrossRow> = qn_list
        .par_iter()
        .map(|qn| compare_level(&base.with_quantum(*qn), cfg, 0.0))
        .collect();
    let all_pass = !rows.is_empty() && rows.iter().all(|r| r.pass);
    CrossValidationReport {
        tolerance: PASS_TOLERANCE,
        n_points: cfg.n_points,
        rows,
        all_pass,
    }
}

/// One comparison row; `delta_shift` perturbs the closed-form `delta` and
/// exists for negative controls.
pub fn compare_level(p: &ModelParameters, cfg: &OracleConfig, delta_shift: f64) -> CrossRow {
    let mut row = CrossRow {
        m: p.quantum.m,
        n: p.quantum.n,
        delta: f64::NAN,
        b: f64::NAN,
        closed_form: f64::NAN,
        fd: None,
        rel_dev: None,
        e_plus_closed: f64::NAN,
        e_plus_fd: None,
        e_plus_dev: None,
        pass: false,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let dq = p.derive()?;
        row.delta = dq.delta + delta_shift;
        row.b = dq.b_coul;
        let e = bound_energy(p)?;
        let eta = dq.b_coul / (row.delta + p.quantum.n as f64);
        row.closed_form = -eta * eta;
        let threshold_sq = p.threshold_sq();
        row.e_plus_closed = (threshold_sq - eta * eta).max(0.0).sqrt();
        if delta_shift == 0.0 {
            row.e_plus_closed = e.e_plus;
        }

        let level = p.quantum.n as usize;
        let local = OracleConfig {
            n_eigen: cfg.n_eigen.max(level + 1),
            ..*cfg
        };
        let vals = fd_eigenvalues(dq.casimir_g, dq.b_coul, &local)?;
        let fd = vals[level];
        let rel = (fd - row.closed_form).abs() / row.closed_form.abs();
        let e_fd = (threshold_sq + fd).max(0.0).sqrt();
        row.fd = Some(fd);
        row.rel_dev = Some(rel);
        row.e_plus_fd = Some(e_fd);
        row.e_plus_dev = Some((e_fd - row.e_plus_closed).abs());
        row.pass = rel <= PASS_TOLERANCE;
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{CouplingSet, StringBackground};
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_coulomb() {
        let vals = fd_eigenvalues(0.0, 1.0, &OracleConfig::default()).unwrap();
        for (n, v) in vals.iter().enumerate() {
            let exact = -1.0 / ((n + 1) as f64).powi(2);
            assert!(
                (v - exact).abs() / exact.abs() <= PASS_TOLERANCE,
                "n = {n}: {v}"
            );
        }
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn p1_lower_branch() {
        let vals = fd_eigenvalues(0.75, 0.5, &OracleConfig::default()).unwrap();
        assert!((vals[0] + 1.0 / 9.0).abs() / (1.0 / 9.0) <= PASS_TOLERANCE);
        let l = 0.5;
        let floor = -0.25 / f64::max(l + 1.0, 1.0).powi(2) * (1.0 + PASS_TOLERANCE);
        for v in &vals {
            assert!(*v < 0.0 && *v > floor);
        }
    }

    #[test]
    fn second_order_convergence() {
        let err = |n_points| {
            let cfg = OracleConfig {
                n_points,
                r_max: Some(60.0),
                n_eigen: 1,
            };
            (fd_eigenvalues(0.0, 1.0, &cfg).unwrap()[0] + 1.0).abs()
        };
        let ratio = err(4000) / err(8000);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn errors() {
        let cfg = OracleConfig::default();
        assert_eq!(
            fd_eigenvalues(-0.3, 1.0, &cfg),
            Err(Error::IllPosed { ell_eff_sq: -0.3 })
        );
        assert!(matches!(
            fd_eigenvalues(0.0, 0.0, &cfg),
            Err(Error::NoBoundState { .. })
        ));
        let tiny = OracleConfig {
            n_points: 50,
            r_max: Some(2.0),
            n_eigen: 3,
        };
        assert!(matches!(
            fd_eigenvalues(0.0, 1.0, &tiny),
            Err(Error::TooFewBoundStates { .. })
        ));
    }

    #[test]
    fn default_radius_controls_truncation() {
        let r = default_r_max(0.75, 0.5, 3);
        assert!(r * (0.5 / 1.5) >= 25.0);
    }

    fn p1() -> ModelParameters {
        ModelParameters::new(
            StringBackground::flat(),
            CouplingSet::new(1.0, 1.0, 2.0, 0.0, 0.0, 0.0).unwrap(),
            QuantumNumbers::new(0, 0),
        )
    }

    #[test]
    fn p1_cross_validation() {
        let qns: Vec<_> = (0..3).map(|n| QuantumNumbers::new(0, n)).collect();
        let rep = cross_validate(&p1(), &qns, &OracleConfig::default());
        assert!(rep.all_pass, "{rep:?}");
        assert_abs_diff_eq!(rep.rows[0].e_plus_closed, 0.942_809_0, epsilon = 1e-7);
        assert!(rep.rows[0].e_plus_dev.unwrap() < 1e-4);
    }

    #[test]
    fn half_rho_cross_validation() {
        let p = ModelParameters::new(
            StringBackground::new(0.5).unwrap(),
            CouplingSet::new(1.0, 1.0, 0.0, -0.5, 0.0, 0.0).unwrap(),
            QuantumNumbers::new(0, 0),
        );
        let qns: Vec<_> = (0..3).map(|n| QuantumNumbers::new(0, n)).collect();
        let rep = cross_validate(&p, &qns, &OracleConfig::default());
        assert!(rep.all_pass, "{rep:?}");
        assert_abs_diff_eq!(rep.rows[0].e_plus_closed, 0.971_737, epsilon = 1e-6);
    }

    #[test]
    fn corrupted_delta_fails() {
        let row = compare_level(&p1(), &OracleConfig::default(), 0.1);
        assert!(!row.pass);
        assert!(row.rel_dev.unwrap() > 0.1);
    }

    #[test]
    fn errors_are_recorded_per_row() {
        let mut p = p1();
        p.couplings.field_a0 = 0.0;
        let rep = cross_validate(&p, &[QuantumNumbers::new(0, 0)], &OracleConfig::default());
        assert!(!rep.all_pass);
        assert!(rep.rows[0]
            .error
            .as_deref()
            .unwrap()
            .contains("no bound state"));
    }
}
