//! Curved-space Dirac machinery on the conical background: tetrads,
//! position-dependent gamma matrices, the spinor connection, and the
//! first-order radial system obtained from the separation ansatz
//!
//! ```text
//! Psi = exp(-iEt + im phi + ikz) (F+, -i F- e^{i phi}, G+, G- e^{i phi})
//! ```

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::params::{CouplingSet, DerivedQuantities, ModelParameters, StringBackground};
use crate::spectrum::{profile_pair, GridSpec, RadialProfile};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix4(pub [[Complex64; 4]; 4]);

impl ComplexMatrix4 {
    pub fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 4])
    }

    pub fn diag(d: [Complex64; 4]) -> Self {
        let mut m = Self::zero();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// `[[0, s], [-s, 0]]` from a 2x2 block.
    fn off_block(s: [[Complex64; 2]; 2]) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j + 2] = s[i][j];
                m.0[i + 2][j] = -s[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= s);
        m
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }
}

impl Add for ComplexMatrix4 {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl Sub for ComplexMatrix4 {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

impl Mul for ComplexMatrix4 {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

fn pauli(a: usize) -> [[Complex64; 2]; 2] {
    match a {
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        _ => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

/// Constant Dirac matrices: `gamma_0 = diag(1, 1, -1, -1)`,
/// `gamma_a = [[0, sigma_a], [-sigma_a, 0]]`.
pub fn flat_gamma(a: usize) -> Result<ComplexMatrix4> {
    match a {
        0 => Ok(ComplexMatrix4::diag([ONE, ONE, -ONE, -ONE])),
        1..=3 => Ok(ComplexMatrix4::off_block(pauli(a))),
        _ => Err(Error::IndexOutOfRange(a)),
    }
}

/// `Sigma^3 = diag(sigma_3, sigma_3)`.
pub fn sigma3_block() -> ComplexMatrix4 {
    ComplexMatrix4::diag([ONE, -ONE, ONE, -ONE])
}

pub const MINKOWSKI: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveRadius(r))
    }
}

/// Inverse metric `diag(1, -1, -1/(varrho r)^2, -1)`.
pub fn inverse_metric(bg: &StringBackground, r: f64) -> [f64; 4] {
    let pr = bg.varrho() * r;
    [1.0, -1.0, -1.0 / (pr * pr), -1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TetradPair {
    /// `e_lower[mu][a] = e^a_mu`.
    pub e_lower: [[f64; 4]; 4],
    /// `e_upper[a][mu] = e_a^mu`.
    pub e_upper: [[f64; 4]; 4],
    pub r: f64,
    pub phi: f64,
}

impl TetradPair {
    /// Max deviation of `e^a_mu e_a^nu` from the identity.
    pub fn inverse_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let s: f64 = (0..4)
                    .map(|a| self.e_lower[mu][a] * self.e_upper[a][nu])
                    .sum();
                let target = if mu == nu { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// Max deviation of `eta^{ab} e_a^mu e_b^nu` from `g^{mu nu}`, relative
    /// to the largest metric entry.
    pub fn metric_residual(&self, bg: &StringBackground) -> f64 {
        let g = inverse_metric(bg, self.r);
        let scale = g.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let s: f64 = (0..4)
                    .map(|a| MINKOWSKI[a] * self.e_upper[a][mu] * self.e_upper[a][nu])
                    .sum();
                let target = if mu == nu { g[mu] } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst / scale
    }
}

/// Frame `e_1 = cos(phi) d_r - sin(phi)/(varrho r) d_phi`,
/// `e_2 = sin(phi) d_r + cos(phi)/(varrho r) d_phi` and its exact coframe.
pub fn tetrad_at(bg: &StringBackground, r: f64, phi: f64) -> Result<TetradPair> {
    check_radius(r)?;
    let pr = bg.varrho() * r;
    let (s, c) = phi.sin_cos();
    let e_upper = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, -s / pr, 0.0],
        [0.0, s, c / pr, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let e_lower = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, s, 0.0],
        [0.0, -pr * s, pr * c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    Ok(TetradPair {
        e_lower,
        e_upper,
        r,
        phi,
    })
}

/// `gamma^mu(x) = e_a^mu(x) gamma_a`.
pub fn gamma_at(bg: &StringBackground, r: f64, phi: f64, index: usize) -> Result<ComplexMatrix4> {
    if index > 3 {
        return Err(Error::IndexOutOfRange(index));
    }
    let t = tetrad_at(bg, r, phi)?;
    let mut out = ComplexMatrix4::zero();
    for a in 0..4 {
        let coeff = t.e_upper[a][index];
        if coeff != 0.0 {
            out = out + flat_gamma(a)?.scale(coeff.into());
        }
    }
    Ok(out)
}

/// Closed forms: `gamma^r` carries `[[0, e^{-i phi}], [e^{i phi}, 0]]`,
/// `gamma^phi` carries `-i/(varrho r) [[0, e^{-i phi}], [-e^{i phi}, 0]]`.
pub fn gamma_closed_form(
    bg: &StringBackground,
    r: f64,
    phi: f64,
    index: usize,
) -> Result<ComplexMatrix4> {
    check_radius(r)?;
    let em = Complex64::from_polar(1.0, -phi);
    let ep = Complex64::from_polar(1.0, phi);
    match index {
        0 | 3 => flat_gamma(index),
        1 => Ok(ComplexMatrix4::off_block([[ZERO, em], [ep, ZERO]])),
        2 => {
            let f = -I / (bg.varrho() * r);
            Ok(ComplexMatrix4::off_block([[ZERO, f * em], [-f * ep, ZERO]]))
        }
        _ => Err(Error::IndexOutOfRange(index)),
    }
}

/// Nonzero Christoffel symbols of the conical metric as `(upper, lower1, lower2, value)`.
pub fn christoffel(bg: &StringBackground, r: f64) -> Vec<(usize, usize, usize, f64)> {
    let rho = bg.varrho();
    vec![
        (1, 2, 2, -rho * rho * r),
        (2, 1, 2, 1.0 / r),
        (2, 2, 1, 1.0 / r),
    ]
}

/// `d_lambda e_b^nu` indexed `[lambda][b][nu]`.
fn tetrad_derivatives(bg: &StringBackground, r: f64, phi: f64) -> [[[f64; 4]; 4]; 4] {
    let pr = bg.varrho() * r;
    let (s, c) = phi.sin_cos();
    let mut d = [[[0.0; 4]; 4]; 4];
    d[1][1][2] = s / (pr * r);
    d[1][2][2] = -c / (pr * r);
    d[2][1][1] = -s;
    d[2][1][2] = -c / pr;
    d[2][2][1] = c;
    d[2][2][2] = -s / pr;
    d
}

/// All four `Gamma_mu = (1/8) omega_{mu ab} [gamma^a, gamma^b]` with
/// `omega_{mu ab} = e_{a nu} (d_mu e_b^nu + Gamma^nu_{mu lambda} e_b^lambda)`.
pub fn spin_connection_components(
    bg: &StringBackground,
    r: f64,
    phi: f64,
) -> Result<[ComplexMatrix4; 4]> {
    let t = tetrad_at(bg, r, phi)?;
    let de = tetrad_derivatives(bg, r, phi);
    let chr = christoffel(bg, r);
    let gammas = [
        flat_gamma(0)?,
        flat_gamma(1)?,
        flat_gamma(2)?,
        flat_gamma(3)?,
    ];

    let mut out = [ComplexMatrix4::zero(); 4];
    for (mu, slot) in out.iter_mut().enumerate() {
        // covariant derivative of e_b along mu
        let mut nabla = [[0.0; 4]; 4];
        for b in 0..4 {
            for nu in 0..4 {
                nabla[b][nu] = de[mu][b][nu];
            }
            for &(up, l1, l2, val) in &chr {
                if l1 == mu {
                    nabla[b][up] += val * t.e_upper[b][l2];
                }
            }
        }
        let mut acc = ComplexMatrix4::zero();
        for a in 0..4 {
            for b in 0..4 {
                let omega: f64 = (0..4)
                    .map(|nu| MINKOWSKI[a] * t.e_lower[nu][a] * nabla[b][nu])
                    .sum();
                if omega != 0.0 {
                    acc = acc + gammas[a].commutator(&gammas[b]).scale((omega / 8.0).into());
                }
            }
        }
        *slot = acc;
    }
    Ok(out)
}

/// The azimuthal component `Gamma_phi`, the only one that survives.
pub fn spin_connection(bg: &StringBackground, r: f64) -> Result<ComplexMatrix4> {
    Ok(spin_connection_components(bg, r, 0.0)?[2])
}

/// `i (1 - varrho)/2 Sigma^3`.
pub fn spin_connection_closed_form(bg: &StringBackground) -> ComplexMatrix4 {
    sigma3_block().scale(I * (0.5 * (1.0 - bg.varrho())))
}

/// The four radial profiles of the separation ansatz on one grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinorRadialSet {
    pub f_plus: GridFunction,
    pub f_minus: GridFunction,
    pub g_plus: GridFunction,
    pub g_minus: GridFunction,
    pub energy: f64,
    pub k: f64,
    pub m: i64,
}

/// Coefficients shared by the first-order equations at radius `r`:
/// `kappa = j/(varrho r) - M omega` and `W = M + S(r)`.
struct LocalTerms {
    kappa: f64,
    kappa_prime: f64,
    w: f64,
    w_prime: f64,
}

fn local_terms(bg: &StringBackground, cp: &CouplingSet, j: f64, r: f64) -> LocalTerms {
    let rho = bg.varrho();
    LocalTerms {
        kappa: j / (rho * r) - cp.mass * cp.omega(),
        kappa_prime: -j / (rho * r * r),
        w: cp.mass + cp.scalar_potential(r),
        w_prime: -cp.s1 / (r * r),
    }
}

/// Left-hand sides of the four first-order equations, in order
///
/// ```text
/// G-' + kappa G- + k G+ + (W - E) F+
/// G+' - kappa G+ + k G- + (W - E) F-
/// F-' + kappa F- - k F+ + (W + E) G+
/// F+' - kappa F+ - k F- + (W + E) G-
/// ```
///
/// with radial derivatives by second-order finite differences.
pub fn first_order_residual(
    s: &SpinorRadialSet,
    bg: &StringBackground,
    cp: &CouplingSet,
) -> Result<[GridFunction; 4]> {
    let grid = &s.f_plus;
    if ![&s.f_minus, &s.g_plus, &s.g_minus]
        .iter()
        .all(|g| g.same_grid(grid))
    {
        return Err(Error::GridMismatch);
    }
    let j = s.m as f64 + 0.5;
    let (e, k) = (s.energy, s.k);
    let (fp, fm, gp, gm) = (
        s.f_plus.values(),
        s.f_minus.values(),
        s.g_plus.values(),
        s.g_minus.values(),
    );
    let (dfp, dfm, dgp, dgm) = (
        s.f_plus.derivative(),
        s.f_minus.derivative(),
        s.g_plus.derivative(),
        s.g_minus.derivative(),
    );
    let n = grid.len();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (i, r) in grid.radii().enumerate() {
        let t = local_terms(bg, cp, j, r);
        out[0][i] = dgm.values()[i] + t.kappa * gm[i] + k * gp[i] + (t.w - e) * fp[i];
        out[1][i] = dgp.values()[i] - t.kappa * gp[i] + k * gm[i] + (t.w - e) * fm[i];
        out[2][i] = dfm.values()[i] + t.kappa * fm[i] - k * fp[i] + (t.w + e) * gp[i];
        out[3][i] = dfp.values()[i] - t.kappa * fp[i] - k * fm[i] + (t.w + e) * gm[i];
    }
    let [a, b, c, d] = out;
    Ok([
        grid.with_values(a),
        grid.with_values(b),
        grid.with_values(c),
        grid.with_values(d),
    ])
}

/// Largest absolute residual over all four components on `r >= r_from`,
/// excluding the final grid point.
pub fn residual_max_norm(res: &[GridFunction; 4], r_from: f64) -> f64 {
    res.iter()
        .map(|g| {
            g.radii()
                .zip(g.values())
                .take(g.len() - 1)
                .filter(|(r, _)| *r >= r_from)
                .fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleFit {
    /// Multiplies the raw upper profile relative to the raw lower one.
    pub alpha: f64,
    /// Relative least-squares residual; absent when `k != 0`, where every
    /// scale solves the system.
    pub residual: Option<f64>,
}

/// Analytic samples of the rotated-back pair `(F+, G-)` and derivatives at
/// `r`, split as `alpha * (upper part) + (lower part)`.
struct SplitSample {
    f: [(f64, f64, f64); 2],
    g: [(f64, f64, f64); 2],
}

fn split_sample(theta: f64, upper: &RadialProfile, lower: &RadialProfile, r: f64) -> SplitSample {
    let (s, c) = (0.5 * theta).sin_cos();
    let u = upper.eval_with_derivatives(r);
    let l = lower.eval_with_derivatives(r);
    let sc = |w: f64, t: (f64, f64, f64)| (w * t.0, w * t.1, w * t.2);
    SplitSample {
        // F+ = c alpha u - s l,  G- = s alpha u + c l
        f: [sc(c, u), sc(-s, l)],
        g: [sc(s, u), sc(c, l)],
    }
}

/// Fixes the relative scale of the upper profile against the first-order
/// system at energy `energy`.
pub fn fit_upper_scale(
    p: &ModelParameters,
    dq: &DerivedQuantities,
    energy: f64,
    upper: &RadialProfile,
    lower: &RadialProfile,
) -> Result<ScaleFit> {
    let cp = &p.couplings;
    if cp.k != 0.0 {
        let alpha = (lower.weighted_norm_sq(|_| 1.0) / upper.weighted_norm_sq(|_| 1.0)).sqrt();
        return Ok(ScaleFit {
            alpha,
            residual: None,
        });
    }

    let r_max = lower.truncation_radius().max(upper.truncation_radius());
    let samples = 4000;
    let j = p.j();
    // the G-' and F+' equations with k = 0, each split into alpha part and remainder
    let rows: Vec<(f64, f64)> = (1..=samples)
        .flat_map(|i| {
            let r = r_max * i as f64 / samples as f64;
            let t = local_terms(&p.background, cp, j, r);
            let sp = split_sample(dq.theta, upper, lower, r);
            let g_eq = |q: usize| sp.g[q].1 + t.kappa * sp.g[q].0 + (t.w - energy) * sp.f[q].0;
            let f_eq = |q: usize| sp.f[q].1 - t.kappa * sp.f[q].0 + (t.w + energy) * sp.g[q].0;
            [(g_eq(0), g_eq(1)), (f_eq(0), f_eq(1))]
        })
        .collect();
    let aa: f64 = rows.iter().map(|(a, _)| a * a).sum();
    let ab: f64 = rows.iter().map(|(a, b)| a * b).sum();
    if !(aa > 0.0) {
        return Err(Error::SingularReconstruction { r: 0.0 });
    }
    let alpha = -ab / aa;
    let res_sq: f64 = rows.iter().map(|(a, b)| (alpha * a + b).powi(2)).sum();
    let scale_sq: f64 = rows.iter().map(|(a, b)| (alpha * a).powi(2) + b * b).sum();
    Ok(ScaleFit {
        alpha,
        residual: Some((res_sq / scale_sq.max(f64::MIN_POSITIVE)).sqrt()),
    })
}

/// Exact four-component solution assembled from the closed-form rotated
/// pair at energy `energy`, sampled on `grid`.
pub fn reconstruct_spinor(
    p: &ModelParameters,
    energy: f64,
    grid: &GridSpec,
) -> Result<SpinorRadialSet> {
    let dq = p.derive()?;
    let pair = profile_pair(p, &dq)?;
    let upper = pair.upper.as_ref().ok_or_else(|| Error::InvalidParameter {
        name: "n",
        reason: "no partner level for the upper component".into(),
    })?;
    let fit = fit_upper_scale(p, &dq, energy, upper, &pair.lower)?;
    let r_max = grid.r_max.unwrap_or_else(|| pair.lower.truncation_radius());
    reconstruct_with(p, &dq, energy, fit.alpha, upper, &pair.lower, grid, r_max)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn reconstruct_with(
    p: &ModelParameters,
    dq: &DerivedQuantities,
    energy: f64,
    alpha: f64,
    upper: &RadialProfile,
    lower: &RadialProfile,
    grid: &GridSpec,
    r_max: f64,
) -> Result<SpinorRadialSet> {
    let cp = &p.couplings;
    let j = p.j();
    let k = cp.k;
    let norm = 1.0 / lower.weighted_norm_sq(|_| 1.0).sqrt();

    // values of (F+, G-, F-, G+) at r
    let point = |r: f64| -> Result<[f64; 4]> {
        let sp = split_sample(dq.theta, upper, lower, r);
        let comb = |q: [(f64, f64, f64); 2]| {
            (
                norm * (alpha * q[0].0 + q[1].0),
                norm * (alpha * q[0].1 + q[1].1),
                norm * (alpha * q[0].2 + q[1].2),
            )
        };
        let (f, f1, f2) = comb(sp.f);
        let (g, g1, _) = comb(sp.g);
        if k == 0.0 {
            return Ok([f, g, 0.0, 0.0]);
        }
        let t = local_terms(&p.background, cp, j, r);
        let wpe = t.w + energy;
        if wpe.abs() < 1e-8 * (1.0 + t.w.abs()) {
            return Err(Error::SingularReconstruction { r });
        }
        let fm = (f1 - t.kappa * f + wpe * g) / k;
        let fm1 = (f2 - t.kappa_prime * f - t.kappa * f1 + t.w_prime * g + wpe * g1) / k;
        let gp = (k * f - fm1 - t.kappa * fm) / wpe;
        Ok([f, g, fm, gp])
    };

    let n = grid.n_points;
    if n < crate::grid::MIN_POINTS {
        return Err(Error::GridTooCoarse(n));
    }
    let h = r_max / n as f64;
    let mut cols = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let v = point(h * (i + 1) as f64)?;
        for c in 0..4 {
            cols[c][i] = v[c];
        }
    }
    let [fp, gm, fm, gp] = cols;
    Ok(SpinorRadialSet {
        f_plus: GridFunction::new(h, r_max, fp)?,
        f_minus: GridFunction::new(h, r_max, fm)?,
        g_plus: GridFunction::new(h, r_max, gp)?,
        g_minus: GridFunction::new(h, r_max, gm)?,
        energy,
        k,
        m: p.quantum.m,
    })
}
