//! Physical inputs and the algebraic constants derived from them.
//!
//! Natural units (hbar = c = 1) throughout. The deficit parameter `varrho`
//! lies in `(0, 1]`, with `varrho = 1` the flat limit.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conical background of a straight cosmic string.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StringBackground {
    varrho: f64,
}

impl StringBackground {
    pub fn new(varrho: f64) -> Result<Self> {
        if !(varrho.is_finite() && varrho > 0.0 && varrho <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("deficit parameter must satisfy 0 < rho <= 1, got {varrho}"),
            });
        }
        Ok(Self { varrho })
    }

    pub fn flat() -> Self {
        Self { varrho: 1.0 }
    }

    #[inline]
    pub fn varrho(&self) -> f64 {
        self.varrho
    }

    /// Linear mass density, `(1 - varrho) / 4`.
    #[inline]
    pub fn mu_density(&self) -> f64 {
        (1.0 - self.varrho) / 4.0
    }
}

/// Mass, charge, field strength, scalar potential `S(r) = s1/r + s2` and
/// the z-momentum eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSet {
    pub mass: f64,
    pub charge: f64,
    pub field_a0: f64,
    pub s1: f64,
    pub s2: f64,
    pub k: f64,
}

impl CouplingSet {
    pub fn new(mass: f64, charge: f64, field_a0: f64, s1: f64, s2: f64, k: f64) -> Result<Self> {
        let cp = Self {
            mass,
            charge,
            field_a0,
            s1,
            s2,
            k,
        };
        cp.validate()?;
        Ok(cp)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("charge", self.charge),
            ("a0", self.field_a0),
            ("s1", self.s1),
            ("s2", self.s2),
            ("k", self.k),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if self.mass <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "mass",
                reason: format!("must be positive, got {}", self.mass),
            });
        }
        Ok(())
    }

    /// Cyclotron-like frequency `e A0 / (2 M)`.
    #[inline]
    pub fn omega(&self) -> f64 {
        self.charge * self.field_a0 / (2.0 * self.mass)
    }

    /// `S(r) = s1 / r + s2`.
    #[inline]
    pub fn scalar_potential(&self, r: f64) -> f64 {
        self.s1 / r + self.s2
    }
}

/// A half-integer stored as its doubled integer value, so `j = m + 1/2`
/// never drifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfInteger {
    twice: i64,
}

impl HalfInteger {
    pub fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    pub fn twice(&self) -> i64 {
        self.twice
    }

    pub fn value(&self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Largest accepted `|m|`.
pub const MAX_ABS_M: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub m: i64,
    pub n: u32,
}

impl QuantumNumbers {
    pub fn new(m: i64, n: u32) -> Self {
        Self { m, n }
    }

    /// Total angular momentum `j = m + 1/2`; never zero.
    pub fn j(&self) -> HalfInteger {
        HalfInteger::from_twice(self.m.saturating_mul(2).saturating_add(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.unsigned_abs() > MAX_ABS_M {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("|m| must not exceed {MAX_ABS_M}, got {}", self.m),
            });
        }
        Ok(())
    }

    pub fn with_n(self, n: u32) -> Self {
        Self { n, ..self }
    }
}

/// Which constant term enters `eta^2`.
///
/// `Paper` drops the `-M^2 omega^2` term of the coupled second-order pair;
/// `StrictOmega2` keeps it, which is what the first-order system implies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyMode {
    #[default]
    Paper,
    StrictOmega2,
}

impl EnergyMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnergyMode::Paper => "paper",
            EnergyMode::StrictOmega2 => "strict-omega2",
        }
    }
}

impl std::str::FromStr for EnergyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(EnergyMode::Paper),
            "strict-omega2" => Ok(EnergyMode::StrictOmega2),
            other => Err(Error::InvalidParameter {
                name: "mode",
                reason: format!("expected `paper` or `strict-omega2`, got `{other}`"),
            }),
        }
    }
}

/// Full physical input of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub background: StringBackground,
    pub couplings: CouplingSet,
    pub quantum: QuantumNumbers,
    pub mode: EnergyMode,
}

impl ModelParameters {
    pub fn new(
        background: StringBackground,
        couplings: CouplingSet,
        quantum: QuantumNumbers,
    ) -> Self {
        Self {
            background,
            couplings,
            quantum,
            mode: EnergyMode::Paper,
        }
    }

    pub fn with_mode(self, mode: EnergyMode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_quantum(self, quantum: QuantumNumbers) -> Self {
        Self { quantum, ..self }
    }

    pub fn varrho(&self) -> f64 {
        self.background.varrho()
    }

    pub fn j(&self) -> f64 {
        self.quantum.j().value()
    }

    /// `k^2 + (M + s2)^2`, plus `M^2 omega^2` in strict mode.
    pub fn threshold_sq(&self) -> f64 {
        let cp = &self.couplings;
        let base = cp.k * cp.k + (cp.mass + cp.s2).powi(2);
        match self.mode {
            EnergyMode::Paper => base,
            EnergyMode::StrictOmega2 => base + (cp.mass * cp.omega()).powi(2),
        }
    }

    pub fn derive(&self) -> Result<DerivedQuantities> {
        derive_quantities(&self.background, &self.couplings, &self.quantum)
    }
}

/// Algebraic constants of the factorized radial problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub gamma_c: f64,
    pub theta: f64,
    pub d_const: f64,
    pub a_const: f64,
    pub mu_d: f64,
    pub delta: f64,
    pub b_coul: f64,
    /// `d (d - a)`, centrifugal coefficient of the lower (G) component.
    pub casimir_g: f64,
    /// `d (d + a)`, centrifugal coefficient of the upper (F) component.
    pub casimir_f: f64,
    /// `varrho * gamma + j`, evaluated without cancellation.
    pub half_angle_denominator: f64,
    /// Set when `s1 = 0` and `j < 0`.
    pub degenerate_branch: bool,
}

/// `varrho gamma + j` without cancellation for `j < 0`.
fn stable_half_angle_denominator(rho_gamma: f64, j: f64, rho_s1: f64) -> f64 {
    if j >= 0.0 {
        rho_gamma + j
    } else {
        // rho gamma - |j| = rho^2 s1^2 / (rho gamma + |j|)
        rho_s1 * rho_s1 / (rho_gamma - j)
    }
}

/// `s1^2 varrho / (varrho gamma + j)`; zero at `s1 = 0` by direct substitution.
fn centrifugal_shift(s1: f64, rho: f64, denom: f64) -> f64 {
    if s1 == 0.0 {
        0.0
    } else {
        s1 * s1 * rho / denom
    }
}

pub fn derive_quantities(
    bg: &StringBackground,
    cp: &CouplingSet,
    qn: &QuantumNumbers,
) -> Result<DerivedQuantities> {
    StringBackground::new(bg.varrho())?;
    cp.validate()?;
    qn.validate()?;

    let rho = bg.varrho();
    let j = qn.j().value();
    let s1 = cp.s1;

    let rho_gamma = j.hypot(rho * s1);
    let gamma_c = rho_gamma / rho;
    let d_const = s1.hypot(j / rho);
    let denom = stable_half_angle_denominator(rho_gamma, j, rho * s1);
    let shift = centrifugal_shift(s1, rho, denom);

    let a_const = -(j + rho * shift) / (rho * d_const);
    let theta = if s1 == 0.0 {
        0.0
    } else {
        2.0 * (-rho * s1 / denom).atan()
    };

    let disc = 1.0 - 4.0 * a_const * d_const + 4.0 * d_const * d_const;
    let mu_d = 0.5 * (-1.0 + disc.max(0.0).sqrt());

    let m = cp.mass;
    let b_coul = m * (j * cp.omega() - rho * s1 - rho * s1 * cp.s2 / m) / rho;

    Ok(DerivedQuantities {
        gamma_c,
        theta,
        d_const,
        a_const,
        mu_d,
        delta: mu_d + 1.0,
        b_coul,
        casimir_g: d_const * (d_const - a_const),
        casimir_f: d_const * (d_const + a_const),
        half_angle_denominator: denom,
        degenerate_branch: s1 == 0.0 && j < 0.0,
    })
}

/// Named residuals of the algebraic identities tying `d`, `a`, `gamma`
/// to the centrifugal coefficients. Residuals are relative to the magnitude
/// of the compared terms (floored at 1).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IdentityReport {
    pub residuals: BTreeMap<String, f64>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |acc, &v| acc.max(v))
    }

    fn push(&mut self, name: &str, lhs: f64, rhs: f64) {
        let scale = 1.0_f64.max(lhs.abs()).max(rhs.abs());
        self.residuals
            .insert(name.to_string(), (lhs - rhs).abs() / scale);
    }
}

pub fn verify_param_identities(
    dq: &DerivedQuantities,
    bg: &StringBackground,
    cp: &CouplingSet,
    qn: &QuantumNumbers,
) -> IdentityReport {
    let rho = bg.varrho();
    let j = qn.j().value();
    let s1 = cp.s1;
    let (d, a, g) = (dq.d_const, dq.a_const, dq.gamma_c);
    let shift = centrifugal_shift(s1, rho, dq.half_angle_denominator);

    let mut report = IdentityReport::default();
    report.push(
        "upper_centrifugal",
        j * (j - rho) / (rho * rho) + s1 * s1 - shift,
        d * (d + a),
    );
    report.push(
        "lower_centrifugal",
        j * (j + rho) / (rho * rho) + s1 * s1 + shift,
        d * (d - a),
    );
    report.push("gamma_equals_d", g, d);
    if !dq.degenerate_branch {
        report.push("d_times_a_plus_gamma", d * a + g, 0.0);
        report.push("a_equals_minus_one", a, -1.0);
        report.push(
            "perfect_square_root",
            1.0 - 4.0 * a * d + 4.0 * d * d,
            (2.0 * d + 1.0).powi(2),
        );
        report.push("delta_equals_d_plus_one", dq.delta, d + 1.0);
        report.push("casimir_split", dq.casimir_g, dq.casimir_f + 2.0 * g);
    }
    report
}
