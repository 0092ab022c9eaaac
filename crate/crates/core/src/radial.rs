//! The coupled 2x2 radial operator, its constant-rotation diagonalization,
//! and the decoupled Coulomb-like equations that follow.
//!
//! After expanding `(M + S(r))^2` the operator reads
//! `B1 1 + B2 sigma3 + S' sigma1` with
//!
//! ```text
//! B1 = d^2/dr^2 - (j^2/varrho^2 + s1^2)/r^2 + 2B/r - eta^2
//! B2 = (j/varrho)/r^2,    S' = -s1/r^2
//! ```
//!
//! so every coefficient of interest is a constant multiplying a fixed power
//! of `r`, and the rotation that diagonalizes it is `r`-independent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::params::{DerivedQuantities, ModelParameters};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiCoefficients {
    /// Coefficient of `-1/r^2` in `B1`: `j^2/varrho^2 + s1^2`.
    pub centrifugal_iso: f64,
    /// Coefficient of `+1/r` in `B1`.
    pub coulomb_lin: f64,
    /// Constant part of `B1`, equal to `-eta^2`.
    pub const_term: f64,
    /// `j / varrho`, coefficient of `1/r^2` in `B2`.
    pub b2_coeff: f64,
    /// `-s1`, coefficient of `1/r^2` in `dS/dr`.
    pub sprime_coeff: f64,
}

pub fn xi_coefficients(p: &ModelParameters, energy: f64) -> XiCoefficients {
    let cp = &p.couplings;
    let rho = p.varrho();
    let j = p.j();
    XiCoefficients {
        centrifugal_iso: (j / rho).powi(2) + cp.s1 * cp.s1,
        coulomb_lin: 2.0 * cp.mass * cp.omega() * j / rho - 2.0 * cp.s1 * (cp.mass + cp.s2),
        const_term: energy * energy - p.threshold_sq(),
        b2_coeff: j / rho,
        sprime_coeff: -cp.s1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagonalization {
    pub theta: f64,
    /// `[[cos t/2, sin t/2], [-sin t/2, cos t/2]]`.
    pub rotation: [[f64; 2]; 2],
    /// Off-diagonal magnitude after rotation, relative to `max(1, gamma)`.
    pub offdiag_residual: f64,
    /// Rotated diagonal `(+gamma, -gamma)`: upper (F) then lower (G).
    pub diagonal: [f64; 2],
}

pub fn rotation_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [[c, s], [-s, c]]
}

/// Rotates the `1/r^2` parts of `B2 sigma3 + S' sigma1` into diagonal form.
pub fn diagonalize(p: &ModelParameters, dq: &DerivedQuantities) -> Result<Diagonalization> {
    if dq.degenerate_branch {
        return Err(Error::DegenerateBranch);
    }
    let xi = xi_coefficients(p, 0.0);
    let (b2, sp) = (xi.b2_coeff, xi.sprime_coeff);
    let rot = rotation_matrix(dq.theta);
    let coeff = [[b2, sp], [sp, -b2]];

    // R C R^T
    let mut rc = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            rc[i][j] = rot[i][0] * coeff[0][j] + rot[i][1] * coeff[1][j];
        }
    }
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = rc[i][0] * rot[j][0] + rc[i][1] * rot[j][1];
        }
    }

    let (st, ct) = dq.theta.sin_cos();
    let closed_form = (-b2 * st + sp * ct).abs();
    let scale = dq.gamma_c.max(1.0);
    let offdiag = out[0][1].abs().max(out[1][0].abs()).max(closed_form);

    Ok(Diagonalization {
        theta: dq.theta,
        rotation: rot,
        offdiag_residual: offdiag / scale,
        diagonal: [out[0][0], out[1][1]],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    /// Upper rotated component, centrifugal `d(d + a)`.
    F,
    /// Lower rotated component, centrifugal `d(d - a)`.
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WellPosedness {
    Regular,
    /// `l(l+1) = -1/4` exactly: both Frobenius exponents coincide.
    Boundary,
    IllPosed,
}

impl WellPosedness {
    pub fn classify(ell_eff_sq: f64) -> Self {
        let excess = ell_eff_sq + 0.25;
        if excess.abs() <= 1e-12 * ell_eff_sq.abs().max(1.0) {
            WellPosedness::Boundary
        } else if excess < 0.0 {
            WellPosedness::IllPosed
        } else {
            WellPosedness::Regular
        }
    }

    pub fn flagged(&self) -> bool {
        !matches!(self, WellPosedness::Regular)
    }
}

/// `-y'' + (l(l+1)/r^2 - 2B/r + eta^2) y = 0` for one rotated component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoupledCoefficients {
    pub ell_eff_sq: f64,
    pub coulomb_2b: f64,
    /// `eta^2 = threshold_sq - E^2`.
    pub threshold_sq: f64,
    pub component: Component,
    pub well_posedness: WellPosedness,
}

impl DecoupledCoefficients {
    pub fn eta_sq(&self, energy: f64) -> f64 {
        self.threshold_sq - energy * energy
    }

    pub fn potential(&self, r: f64) -> f64 {
        self.ell_eff_sq / (r * r) - self.coulomb_2b / r
    }
}

pub fn decoupled_coefficients(
    p: &ModelParameters,
    dq: &DerivedQuantities,
    component: Component,
) -> DecoupledCoefficients {
    let ell_eff_sq = match component {
        Component::F => dq.casimir_f,
        Component::G => dq.casimir_g,
    };
    DecoupledCoefficients {
        ell_eff_sq,
        coulomb_2b: 2.0 * dq.b_coul,
        threshold_sq: p.threshold_sq(),
        component,
        well_posedness: WellPosedness::classify(ell_eff_sq),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorSign {
    /// `a1 = b1 = +eta`.
    Upper,
    /// `a1 = b1 = -eta`.
    Lower,
}

/// Constants of `(r d/dr + a1 r + a2)(-r d/dr + b1 r + b2) y = lambda y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorizationConstants {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub lambda: f64,
    /// `(B/eta +- 1/2)^2 - (d - a/2)^2 + (a^2 - 1)/4`.
    pub lambda_closed_form: f64,
    /// `|lambda - lambda_closed_form|` relative to `max(1, |lambda|)`.
    pub lambda_residual: f64,
}

pub fn factorization_constants(
    dq: &DerivedQuantities,
    eta_sq: f64,
    sign: FactorSign,
) -> Result<FactorizationConstants> {
    if !(eta_sq > 0.0) {
        return Err(Error::Evanescent { eta_sq });
    }
    let eta = eta_sq.sqrt();
    let (d, a) = (dq.d_const, dq.a_const);
    let ratio = dq.b_coul / eta;
    let (a1, a2, half) = match sign {
        FactorSign::Upper => (eta, -1.0 - ratio, 0.5),
        FactorSign::Lower => (-eta, -1.0 + ratio, -0.5),
    };
    // matching the r y' terms forces b2 = a2 + 1
    let b2 = a2 + 1.0;
    let lambda = a2 * (a2 + 1.0) - d * (d - a);
    let lambda_closed_form = (ratio + half).powi(2) - (d - 0.5 * a).powi(2) + (a * a - 1.0) / 4.0;
    let scale = lambda.abs().max(lambda_closed_form.abs()).max(1.0);
    Ok(FactorizationConstants {
        a1,
        b1: a1,
        a2,
        b2,
        lambda,
        lambda_closed_form,
        lambda_residual: (lambda - lambda_closed_form).abs() / scale,
    })
}

/// Pointwise `-y'' + (l(l+1)/r^2 - 2B/r + eta^2) y` with central differences.
/// End points use one-sided stencils and are first order less accurate.
pub fn ode_residual(y: &GridFunction, coeffs: &DecoupledCoefficients, energy: f64) -> GridFunction {
    let eta_sq = coeffs.eta_sq(energy);
    let ypp = y.second_derivative();
    let values = y
        .radii()
        .zip(y.values().iter().zip(ypp.values()))
        .map(|(r, (&v, &d2))| -d2 + (coeffs.potential(r) + eta_sq) * v)
        .collect();
    ypp.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{CouplingSet, EnergyMode, QuantumNumbers, StringBackground};
    use approx::assert_abs_diff_eq;

    fn p1() -> ModelParameters {
        ModelParameters::new(
            StringBackground::flat(),
            CouplingSet::new(1.0, 1.0, 2.0, 0.0, 0.0, 0.0).unwrap(),
            QuantumNumbers::new(0, 0),
        )
    }

    fn half_rho() -> ModelParameters {
        ModelParameters::new(
            StringBackground::new(0.5).unwrap(),
            CouplingSet::new(1.0, 1.0, 0.0, -0.5, 0.0, 0.0).unwrap(),
            QuantumNumbers::new(0, 0),
        )
    }

    #[test]
    fn xi_flat_case() {
        let e = 0.942_809_041_6;
        let xi = xi_coefficients(&p1(), e);
        assert_eq!(xi.centrifugal_iso, 0.25);
        assert_eq!(xi.coulomb_lin, 1.0);
        assert_abs_diff_eq!(xi.const_term, e * e - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xi.const_term, -0.111_111_1, epsilon = 1e-7);
        assert_eq!(xi.sprime_coeff, 0.0);
    }

    #[test]
    fn xi_strict_mode_keeps_const_as_minus_eta_sq() {
        let p = p1().with_mode(EnergyMode::StrictOmega2);
        let xi = xi_coefficients(&p, 1.3);
        assert_abs_diff_eq!(xi.const_term, 1.69 - 2.0, epsilon = 1e-15);
    }

    #[test]
    fn diagonalize_trivial_and_half_rho() {
        let p = p1();
        let d = diagonalize(&p, &p.derive().unwrap()).unwrap();
        assert_eq!(d.theta, 0.0);
        assert_eq!(d.rotation, [[1.0, 0.0], [-0.0, 1.0]]);
        assert_eq!(d.offdiag_residual, 0.0);

        let p = half_rho();
        let dq = p.derive().unwrap();
        let d = diagonalize(&p, &dq).unwrap();
        assert!(d.offdiag_residual <= 1e-14);
        assert_abs_diff_eq!(d.diagonal[0], 5.0_f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.diagonal[1], -5.0_f64.sqrt() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn diagonalize_rejects_degenerate_branch() {
        let p = p1().with_quantum(QuantumNumbers::new(-1, 0));
        assert_eq!(
            diagonalize(&p, &p.derive().unwrap()),
            Err(Error::DegenerateBranch)
        );
    }

    #[test]
    fn decoupled_flat_branches() {
        let p = p1();
        let dq = p.derive().unwrap();
        let g = decoupled_coefficients(&p, &dq, Component::G);
        assert_eq!(g.ell_eff_sq, 0.75);
        assert_eq!(g.well_posedness, WellPosedness::Regular);
        let f = decoupled_coefficients(&p, &dq, Component::F);
        assert_eq!(f.ell_eff_sq, -0.25);
        assert_eq!(f.well_posedness, WellPosedness::Boundary);
        assert!(f.well_posedness.flagged());
        assert_eq!(g.coulomb_2b, 1.0);
        assert_abs_diff_eq!(g.eta_sq(0.9), 1.0 - 0.81, epsilon = 1e-15);

        let p = half_rho();
        let g = decoupled_coefficients(&p, &p.derive().unwrap(), Component::G);
        assert_abs_diff_eq!(g.ell_eff_sq, 2.368_033_988_749_895, epsilon = 1e-12);
        assert_eq!(WellPosedness::classify(-0.3), WellPosedness::IllPosed);
    }

    #[test]
    fn factorization_flat_ground_state() {
        let dq = p1().derive().unwrap();
        let fc = factorization_constants(&dq, 1.0 / 9.0, FactorSign::Upper).unwrap();
        assert_abs_diff_eq!(fc.a1, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fc.a2, -2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(fc.b2, -1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(fc.lambda, 3.0, epsilon = 1e-13);
        assert!(fc.lambda_residual <= 1e-15);
        let lower = factorization_constants(&dq, 1.0 / 9.0, FactorSign::Lower).unwrap();
        assert_abs_diff_eq!(lower.lambda, 0.0, epsilon = 1e-14);
        assert_eq!(
            factorization_constants(&dq, 0.0, FactorSign::Upper),
            Err(Error::Evanescent { eta_sq: 0.0 })
        );
    }

    #[test]
    fn factorization_free_case() {
        let p = half_rho();
        let mut dq = p.derive().unwrap();
        dq.b_coul = 0.0;
        let fc = factorization_constants(&dq, 0.3, FactorSign::Upper).unwrap();
        assert_eq!(fc.a2, -1.0);
        assert_abs_diff_eq!(fc.lambda, -dq.casimir_g, epsilon = 1e-15);
    }

    // P1 ground state: the product operator acts as lambda = 3 (upper sign).
    #[test]
    fn factorized_operator_acts_as_lambda_on_ground_state() {
        let p = p1();
        let dq = p.derive().unwrap();
        let eta = dq.b_coul / dq.delta;
        let fc = factorization_constants(&dq, eta * eta, FactorSign::Upper).unwrap();
        let y = GridFunction::from_fn(0.5, 30.0, 20001, |r| r.powf(dq.delta) * (-eta * r).exp())
            .unwrap();
        // Q y = -r y' + b1 r y + b2 y ; P q = r q' + a1 r q + a2 q
        let dy = y.derivative();
        let qv: Vec<f64> = y
            .radii()
            .zip(y.values().iter().zip(dy.values()))
            .map(|(r, (&v, &d))| -r * d + fc.b1 * r * v + fc.b2 * v)
            .collect();
        let qg = y.with_values(qv);
        let dqg = qg.derivative();
        for i in (100..20000).step_by(997) {
            let r = y.radius(i);
            let pq = r * dqg.values()[i] + fc.a1 * r * qg.values()[i] + fc.a2 * qg.values()[i];
            assert_abs_diff_eq!(pq, fc.lambda * y.values()[i], epsilon = 1e-5 * y.max_abs());
        }
    }

    #[test]
    fn ode_residual_ground_state_converges() {
        let p = p1();
        let dq = p.derive().unwrap();
        let coeffs = decoupled_coefficients(&p, &dq, Component::G);
        let eta = dq.b_coul / dq.delta;
        let energy = (coeffs.threshold_sq - eta * eta).sqrt();
        let err = |n: usize| {
            let y = GridFunction::from_fn(0.5, 60.0, n, |r| r.powf(dq.delta) * (-eta * r).exp())
                .unwrap();
            ode_residual(&y, &coeffs, energy).interior_max_abs(1) / y.max_abs()
        };
        let (e1, e2) = (err(2001), err(4001));
        assert!((e1 / e2 - 4.0).abs() < 0.4, "{e1} {e2}");

        let wrong = GridFunction::from_fn(0.5, 60.0, 4001, |r| {
            r.powf(dq.delta) * (-2.0 * eta * r).exp()
        })
        .unwrap();
        assert!(ode_residual(&wrong, &coeffs, energy).interior_max_abs(1) / wrong.max_abs() > 1e-2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rotation_diagonalizes_and_expansion_consistent(
                rho in 0.01f64..=1.0,
                s1 in prop_oneof![-3.0f64..-1e-6, 1e-6f64..3.0],
                s2 in -1.0f64..1.0,
                a0 in -5.0f64..5.0,
                m in -5i64..=5,
                energy in -2.0f64..2.0,
            ) {
                let p = ModelParameters::new(
                    StringBackground::new(rho).unwrap(),
                    CouplingSet::new(1.3, 0.7, a0, s1, s2, 0.4).unwrap(),
                    QuantumNumbers::new(m, 0),
                );
                let dq = p.derive().unwrap();
                let d = diagonalize(&p, &dq).unwrap();
                prop_assert!(d.offdiag_residual <= 1e-12);
                let scale = dq.gamma_c.max(1.0);
                prop_assert!((d.diagonal[0] - dq.gamma_c).abs() <= 1e-12 * scale);
                prop_assert!((d.diagonal[1] + dq.gamma_c).abs() <= 1e-12 * scale);

                let xi = xi_coefficients(&p, energy);
                let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
                prop_assert!(rel(xi.centrifugal_iso, dq.d_const.powi(2)) <= 1e-13);
                prop_assert!(rel(xi.coulomb_lin, 2.0 * dq.b_coul) <= 1e-13);
                prop_assert!(rel(xi.centrifugal_iso - dq.gamma_c, dq.casimir_f) <= 1e-12);
                prop_assert!(rel(xi.centrifugal_iso + dq.gamma_c, dq.casimir_g) <= 1e-12);

                let eta_sq = p.threshold_sq() - energy * energy;
                if eta_sq > 0.0 {
                    for sign in [FactorSign::Upper, FactorSign::Lower] {
                        let fc = factorization_constants(&dq, eta_sq, sign).unwrap();
                        prop_assert!(fc.lambda_residual <= 1e-12, "{:?}", fc);
                    }
                }
            }
        }
    }
}
