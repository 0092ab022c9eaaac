//! Differential realization of the SU(1,1) generators on radial grid functions:
//!
//! ```text
//! G3 = (-r f'' + eta^2 r f + C f / r) / (2 eta),   C = d(d - a)
//! G+- f = -+ r f' + eta r f - G3 f
//! Casimir = -G+ G- + G3^2 - G3
//! ```
//!
//! All derivatives are second-order finite differences, so every identity
//! below holds up to `O(h^2)` on smooth functions. Inner products use the
//! weight `1/r`, under which `G3` is symmetric and `G+`, `G-` are mutual
//! adjoints.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::params::DerivedQuantities;
use crate::special::{laguerre_assoc, simpson_samples, truncation_radius};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraContext {
    pub eta: f64,
    /// Centrifugal coefficient `d(d - a)` (or `d(d + a)` on the upper branch).
    pub dd_casimir: f64,
    pub b_over_eta: f64,
}

impl AlgebraContext {
    pub fn new(eta: f64, dd_casimir: f64, b_over_eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must be positive, got {eta}"),
            });
        }
        Ok(Self {
            eta,
            dd_casimir,
            b_over_eta,
        })
    }

    /// Lower (G) branch at decay rate `eta`.
    pub fn lower(dq: &DerivedQuantities, eta: f64) -> Result<Self> {
        Self::new(eta, dq.casimir_g, dq.b_coul / eta)
    }

    /// Upper (F) branch: the centrifugal coefficient shifts `d -> d + a`.
    pub fn upper(dq: &DerivedQuantities, eta: f64) -> Result<Self> {
        Self::new(eta, dq.casimir_f, dq.b_coul / eta)
    }

    /// Lowest weight `delta` with `delta (delta - 1) = C`.
    pub fn lowest_weight(&self) -> f64 {
        0.5 * (1.0 + (1.0 + 4.0 * self.dd_casimir).max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Su11Op {
    Gamma3,
    GammaPlus,
    GammaMinus,
    Casimir,
}

pub fn apply_su11(f: &GridFunction, ctx: &AlgebraContext, which: Su11Op) -> GridFunction {
    match which {
        Su11Op::Gamma3 => gamma3(f, ctx),
        Su11Op::GammaPlus => ladder(f, ctx, 1.0),
        Su11Op::GammaMinus => ladder(f, ctx, -1.0),
        Su11Op::Casimir => {
            let minus = ladder(f, ctx, -1.0);
            let pm = ladder(&minus, ctx, 1.0);
            let g3 = gamma3(f, ctx);
            let g33 = gamma3(&g3, ctx);
            let v = pm
                .values()
                .iter()
                .zip(g33.values())
                .zip(g3.values())
                .map(|((a, b), c)| -a + b - c)
                .collect();
            f.with_values(v)
        }
    }
}

fn gamma3(f: &GridFunction, ctx: &AlgebraContext) -> GridFunction {
    let d2 = f.second_derivative();
    let (eta, c) = (ctx.eta, ctx.dd_casimir);
    let v = f
        .radii()
        .zip(f.values())
        .zip(d2.values())
        .map(|((r, &y), &y2)| (-r * y2 + eta * eta * r * y + c * y / r) / (2.0 * eta))
        .collect();
    f.with_values(v)
}

fn ladder(f: &GridFunction, ctx: &AlgebraContext, sign: f64) -> GridFunction {
    let d1 = f.derivative();
    let g3 = gamma3(f, ctx);
    let v = f
        .radii()
        .zip(f.values())
        .zip(d1.values())
        .zip(g3.values())
        .map(|(((r, &y), &y1), &z)| -sign * r * y1 + ctx.eta * r * y - z)
        .collect();
    f.with_values(v)
}

/// True when `|f(r_max)| > 1e-10 max|f|`, i.e. the function has not decayed
/// by the end of the grid and one-sided differences there are unreliable.
pub fn boundary_contaminated(f: &GridFunction) -> bool {
    let last = *f.values().last().unwrap_or(&0.0);
    last.abs() > 1e-10 * f.max_abs()
}

/// `int f g dr / r` by composite Simpson on the grid (trapezoid fallback
/// for an even point count is not provided: grids must have odd length).
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch);
    }
    if f.len().is_multiple_of(2) {
        return Err(Error::InvalidPanels(f.len() - 1));
    }
    let w: Vec<f64> = f
        .radii()
        .zip(f.values().iter().zip(g.values()))
        .map(|(r, (a, b))| a * b / r)
        .collect();
    Ok(simpson_samples(&w, f.step()))
}

pub fn weighted_norm(f: &GridFunction) -> Result<f64> {
    Ok(inner_product(f, f)?.max(0.0).sqrt())
}

fn sub(a: &GridFunction, b: &GridFunction) -> GridFunction {
    a.with_values(
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x - y)
            .collect(),
    )
}

fn add(a: &GridFunction, b: &GridFunction) -> GridFunction {
    a.with_values(
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x + y)
            .collect(),
    )
}

/// Points excluded at each grid end when measuring composed-operator
/// residuals: the one-sided end stencils do not compose to second order.
pub const EDGE_SKIP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraResiduals {
    /// `([G+, G3] + G+) f`, relative.
    pub comm_plus: f64,
    /// `([G-, G3] - G-) f`, relative.
    pub comm_minus: f64,
    /// `([G+, G-] + 2 G3) f`, relative.
    pub comm_pm: f64,
    /// `<G+ f, g> - <f, G- g>`, relative to `|G+ f| |g|`.
    pub adjoint_ladder: f64,
    /// `<G3 f, g> - <f, G3 g>`, relative to `|G3 f| |g|`.
    pub adjoint_gamma3: f64,
    pub boundary_warning: bool,
}

impl AlgebraResiduals {
    pub fn max_commutator(&self) -> f64 {
        self.comm_plus.max(self.comm_minus).max(self.comm_pm)
    }

    pub fn max_adjoint(&self) -> f64 {
        self.adjoint_ladder.max(self.adjoint_gamma3)
    }

    fn worst(self, o: Self) -> Self {
        Self {
            comm_plus: self.comm_plus.max(o.comm_plus),
            comm_minus: self.comm_minus.max(o.comm_minus),
            comm_pm: self.comm_pm.max(o.comm_pm),
            adjoint_ladder: self.adjoint_ladder.max(o.adjoint_ladder),
            adjoint_gamma3: self.adjoint_gamma3.max(o.adjoint_gamma3),
            boundary_warning: self.boundary_warning || o.boundary_warning,
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Commutator and adjointness defects over `test_functions`; adjointness is
/// checked on consecutive pairs (and each function with itself).
pub fn algebra_residuals(
    ctx: &AlgebraContext,
    test_functions: &[GridFunction],
) -> Result<AlgebraResiduals> {
    use Su11Op::*;
    let mut acc = AlgebraResiduals {
        comm_plus: 0.0,
        comm_minus: 0.0,
        comm_pm: 0.0,
        adjoint_ladder: 0.0,
        adjoint_gamma3: 0.0,
        boundary_warning: false,
    };
    for (i, f) in test_functions.iter().enumerate() {
        let g3 = apply_su11(f, ctx, Gamma3);
        let gp = apply_su11(f, ctx, GammaPlus);
        let gm = apply_su11(f, ctx, GammaMinus);
        let p3 = apply_su11(&g3, ctx, GammaPlus);
        let m3 = apply_su11(&g3, ctx, GammaMinus);
        let _3p = apply_su11(&gp, ctx, Gamma3);
        let _3m = apply_su11(&gm, ctx, Gamma3);
        let pm = apply_su11(&gm, ctx, GammaPlus);
        let mp = apply_su11(&gp, ctx, GammaMinus);

        let norm = |g: &GridFunction| g.interior_max_abs(EDGE_SKIP);
        let rel = |res: GridFunction, a: &GridFunction, b: &GridFunction| {
            ratio(norm(&res), norm(a).max(norm(b)))
        };

        let comm_plus = rel(add(&sub(&p3, &_3p), &gp), &p3, &_3p);
        let comm_minus = rel(sub(&sub(&m3, &_3m), &gm), &m3, &_3m);
        let comm_pm = rel(add(&sub(&pm, &mp), &g3.scaled(2.0)), &pm, &mp);

        let g = test_functions.get(i + 1).unwrap_or(f);
        let g3g = apply_su11(g, ctx, Gamma3);
        let gmg = apply_su11(g, ctx, GammaMinus);
        let gn = weighted_norm(g)?;
        let adjoint_ladder = ratio(
            (inner_product(&gp, g)? - inner_product(f, &gmg)?).abs(),
            weighted_norm(&gp)? * gn,
        );
        let adjoint_gamma3 = ratio(
            (inner_product(&g3, g)? - inner_product(f, &g3g)?).abs(),
            weighted_norm(&g3)? * gn,
        );

        acc = acc.worst(AlgebraResiduals {
            comm_plus,
            comm_minus,
            comm_pm,
            adjoint_ladder,
            adjoint_gamma3,
            boundary_warning: boundary_contaminated(f),
        });
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepParameters {
    pub mu: f64,
    pub nu: f64,
    /// `|mu (mu + 1) - d(d - a)|`, relative.
    pub residual: f64,
}

pub fn rep_parameters(dq: &DerivedQuantities, n: u32) -> RepParameters {
    let (d, a) = (dq.d_const, dq.a_const);
    let disc = 1.0 - 4.0 * a * d + 4.0 * d * d;
    let mu = 0.5 * (-1.0 + disc.max(0.0).sqrt());
    let lhs = mu * (mu + 1.0);
    let rhs = d * (d - a);
    RepParameters {
        mu,
        nu: mu + 1.0 + n as f64,
        residual: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0),
    }
}

/// Max-norm of `res` over `r >= r_from` (edges skipped), relative to the
/// max-norm of `reference` over the same points.
pub fn windowed_relative(res: &GridFunction, reference: &GridFunction, r_from: f64) -> f64 {
    let n = res.len();
    let pick = |g: &GridFunction| {
        g.radii()
            .zip(g.values())
            .enumerate()
            .filter(|(i, (r, _))| *i >= EDGE_SKIP && *i + EDGE_SKIP < n && *r >= r_from)
            .fold(0.0_f64, |m, (_, (_, v))| m.max(v.abs()))
    };
    ratio(pick(res), pick(reference))
}

/// Uniform grid on which the ladder basis is sampled. Residuals of the
/// pointwise eigen-relations are measured on `r >= eval_from`, where the
/// `r^delta` factor of the basis is smooth on the grid scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub eval_from: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderRow {
    pub w: u32,
    /// `(G3 - (delta + w)) f_w`, relative.
    pub eigen_residual: f64,
    /// `(Casimir - C) f_w`, relative.
    pub casimir_residual: f64,
    /// `|G+ f_w| / |f_w|` under the `1/r` weight.
    pub norm_ratio: f64,
    /// `sqrt((nu - mu)(nu + mu + 1))`, `nu = delta + w`, `mu = delta - 1`.
    pub expected_ratio: f64,
    /// `|G+ f_w|` from finite differences against the same norm of the
    /// analytic `G+ f_w` on the same grid, relative. Isolates the
    /// discretization error from domain truncation.
    pub fd_norm_defect: f64,
    /// `G+ f_w - <G+ f_w, f_{w+1}> f_{w+1}` pointwise, relative to `G+ f_w`.
    pub complement_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub delta: f64,
    pub mu: f64,
    pub rows: Vec<LadderRow>,
    /// `G- f_0` relative to `f_0`, pointwise on the evaluation window.
    pub annihilation: f64,
    /// Largest `|<f_w, f_w'>|`, `w != w'`, for normalized basis functions.
    pub orthogonality: f64,
    pub boundary_warning: bool,
}

impl LadderGrid {
    /// Grid used for the lowest-weight checks: starts at 0.02, where the
    /// `r^delta` start of the state is resolved by the grid step at
    /// `n >= 8193` yet the unresolved `[0, 0.02]` piece of the norms is below
    /// `1e-6` relative.
    pub fn lowest_weight(r_max: f64, n_points: usize) -> Self {
        Self {
            r_min: 0.02,
            r_max,
            n_points,
            eval_from: 1.0,
        }
    }

    /// Grid reaching far enough that the `1/r`-weighted norm integrands of
    /// `f_0 ..= f_{w_max + 1}` have decayed below `1e-26` of their peak (so the
    /// functions themselves are below the boundary-warning level), and
    /// starting close enough to the origin for quadrature-level orthogonality.
    /// Norm ratios on such a grid carry an `O(h / r_min)` start-up error.
    pub fn covering(ctx: &AlgebraContext, w_max: u32, n_points: usize) -> Self {
        let power = 2.0 * ctx.lowest_weight() - 1.0 + 2.0 * (w_max + 1) as f64;
        Self {
            r_min: 1e-3,
            r_max: truncation_radius(power, ctx.eta, 1e-26),
            n_points,
            eval_from: 1.0,
        }
    }
}

/// Unnormalized `r^delta e^{-eta r} L_w^{(2 delta - 1)}(2 eta r)` and its
/// exact derivative.
fn ladder_profile(delta: f64, eta: f64, w: u32, r: f64) -> (f64, f64) {
    let alpha = 2.0 * delta - 1.0;
    let x = 2.0 * eta * r;
    let l = laguerre_assoc(w, alpha, x).unwrap_or(f64::NAN);
    let dl = if w == 0 {
        0.0
    } else {
        -laguerre_assoc(w - 1, alpha + 1.0, x).unwrap_or(f64::NAN)
    };
    let u = r.powf(delta) * (-eta * r).exp();
    (u * l, u * ((delta / r - eta) * l + 2.0 * eta * dl))
}

/// `f_w = r^delta e^{-eta r} L_w^{(2 delta - 1)}(2 eta r)`, normalized under
/// the `1/r` weight.
pub fn ladder_basis(ctx: &AlgebraContext, w: u32, grid: &LadderGrid) -> Result<GridFunction> {
    let delta = ctx.lowest_weight();
    laguerre_assoc(w, 2.0 * delta - 1.0, 0.0)?;
    let f = GridFunction::from_fn(grid.r_min, grid.r_max, grid.n_points, |r| {
        ladder_profile(delta, ctx.eta, w, r).0
    })?;
    let n = weighted_norm(&f)?;
    Ok(f.scaled(1.0 / n))
}

/// `G+ f_w` from the exact derivative, using `G3 f_w = (delta + w) f_w`;
/// scaled like the normalized basis function.
fn exact_raised(
    ctx: &AlgebraContext,
    w: u32,
    grid: &LadderGrid,
    scale: f64,
) -> Result<GridFunction> {
    let delta = ctx.lowest_weight();
    GridFunction::from_fn(grid.r_min, grid.r_max, grid.n_points, |r| {
        let (f, df) = ladder_profile(delta, ctx.eta, w, r);
        scale * (-r * df + (ctx.eta * r - delta - w as f64) * f)
    })
}

pub fn ladder_check(ctx: &AlgebraContext, w_max: u32, grid: &LadderGrid) -> Result<LadderReport> {
    use Su11Op::*;
    let delta = ctx.lowest_weight();
    let mu = delta - 1.0;
    let basis = (0..=w_max + 1)
        .map(|w| ladder_basis(ctx, w, grid))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for w in 0..=w_max {
        let f = &basis[w as usize];
        let g3 = apply_su11(f, ctx, Gamma3);
        let eigen_residual =
            windowed_relative(&sub(&g3, &f.scaled(delta + w as f64)), f, grid.eval_from);
        let cas = apply_su11(f, ctx, Casimir);
        let casimir_residual =
            windowed_relative(&sub(&cas, &f.scaled(ctx.dd_casimir)), f, grid.eval_from)
                / ctx.dd_casimir.abs().max(1.0);

        let gp = apply_su11(f, ctx, GammaPlus);
        let gp_norm = weighted_norm(&gp)?;
        let raw = GridFunction::from_fn(grid.r_min, grid.r_max, grid.n_points, |r| {
            ladder_profile(delta, ctx.eta, w, r).0
        })?;
        let exact = exact_raised(ctx, w, grid, 1.0 / weighted_norm(&raw)?)?;
        let exact_norm = weighted_norm(&exact)?;

        let next = &basis[w as usize + 1];
        let along = inner_product(&gp, next)?;
        let complement = windowed_relative(&sub(&gp, &next.scaled(along)), &gp, grid.eval_from);
        let nu = delta + w as f64;
        rows.push(LadderRow {
            w,
            eigen_residual,
            casimir_residual,
            norm_ratio: gp_norm,
            expected_ratio: ((nu - mu) * (nu + mu + 1.0)).sqrt(),
            fd_norm_defect: (gp_norm - exact_norm).abs() / exact_norm,
            complement_overlap: complement,
        });
    }

    let f0 = &basis[0];
    let annihilation = windowed_relative(&apply_su11(f0, ctx, GammaMinus), f0, grid.eval_from);

    let mut orthogonality: f64 = 0.0;
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            orthogonality = orthogonality.max(inner_product(&basis[i], &basis[j])?.abs());
        }
    }

    Ok(LadderReport {
        delta,
        mu,
        rows,
        annihilation,
        orthogonality,
        boundary_warning: basis.iter().any(boundary_contaminated),
    })
}

/// Smooth test function `r^3 e^{-r} (r - a)^2 (b - r)^2` vanishing with its
/// first derivative at both ends of `[a, b]`.
pub fn windowed_test_function(a: f64, b: f64, n_points: usize, shift: f64) -> Result<GridFunction> {
    GridFunction::from_fn(a, b, n_points, |r| {
        let x = r - shift;
        x * x * x * (-r).exp() * (r - a).powi(2) * (b - r).powi(2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{CouplingSet, ModelParameters, QuantumNumbers, StringBackground};
    use approx::assert_abs_diff_eq;

    fn p1_ctx() -> (DerivedQuantities, AlgebraContext) {
        let p = ModelParameters::new(
            StringBackground::flat(),
            CouplingSet::new(1.0, 1.0, 2.0, 0.0, 0.0, 0.0).unwrap(),
            QuantumNumbers::new(0, 0),
        );
        let dq = p.derive().unwrap();
        let ctx = AlgebraContext::lower(&dq, 1.0 / 3.0).unwrap();
        (dq, ctx)
    }

    #[test]
    fn zero_function_has_zero_residuals() {
        let (_, ctx) = p1_ctx();
        let z = GridFunction::from_fn(0.05, 40.0, 1025, |_| 0.0).unwrap();
        let r = algebra_residuals(&ctx, &[z]).unwrap();
        assert_eq!(r.max_commutator(), 0.0);
        assert_eq!(r.max_adjoint(), 0.0);
    }

    #[test]
    fn rep_parameters_p1() {
        let (dq, _) = p1_ctx();
        let rp = rep_parameters(&dq, 0);
        assert_abs_diff_eq!(rp.mu, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rp.nu, 1.5, epsilon = 1e-15);
        assert_eq!(rp.nu, dq.delta);
        assert!(rp.residual <= 1e-12);
    }

    #[test]
    fn ground_state_eigen_relations() {
        let (_, ctx) = p1_ctx();
        assert_abs_diff_eq!(ctx.lowest_weight(), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ctx.b_over_eta, 1.5, epsilon = 1e-15);
        let f =
            GridFunction::from_fn(0.05, 40.0, 4001, |r| r.powf(1.5) * (-r / 3.0).exp()).unwrap();
        let g3 = apply_su11(&f, &ctx, Su11Op::Gamma3);
        assert!(windowed_relative(&sub(&g3, &f.scaled(1.5)), &f, 1.0) < 1e-5);
        let gm = apply_su11(&f, &ctx, Su11Op::GammaMinus);
        assert!(windowed_relative(&gm, &f, 1.0) < 1e-5);
        let cas = apply_su11(&f, &ctx, Su11Op::Casimir);
        assert!(windowed_relative(&sub(&cas, &f.scaled(0.75)), &f, 1.0) < 1e-4);
    }

    fn commutator_suite(n: usize) -> AlgebraResiduals {
        let (_, ctx) = p1_ctx();
        let fs = [
            windowed_test_function(0.05, 40.0, n, 0.0).unwrap(),
            windowed_test_function(0.05, 40.0, n, 0.5).unwrap(),
        ];
        algebra_residuals(&ctx, &fs).unwrap()
    }

    #[test]
    fn commutators_hold_at_second_order() {
        let (coarse, fine) = (commutator_suite(2049), commutator_suite(4097));
        assert!(fine.max_commutator() < 1e-5, "{fine:?}");
        for (c, f) in [
            (coarse.comm_plus, fine.comm_plus),
            (coarse.comm_minus, fine.comm_minus),
            (coarse.comm_pm, fine.comm_pm),
        ] {
            assert!((c / f - 4.0).abs() < 0.4, "ratio {}", c / f);
        }
        assert!(fine.max_adjoint() < 1e-8);
        assert!(!fine.boundary_warning);
    }

    #[test]
    fn wrong_sign_would_fail() {
        // [G+, G3] = -G+ : the opposite sign leaves an O(1) residual
        let (_, ctx) = p1_ctx();
        let f = windowed_test_function(0.05, 40.0, 2049, 0.0).unwrap();
        let gp = apply_su11(&f, &ctx, Su11Op::GammaPlus);
        let p3 = apply_su11(
            &apply_su11(&f, &ctx, Su11Op::Gamma3),
            &ctx,
            Su11Op::GammaPlus,
        );
        let _3p = apply_su11(&gp, &ctx, Su11Op::Gamma3);
        let res = sub(&sub(&p3, &_3p), &gp);
        assert!(res.interior_max_abs(EDGE_SKIP) > 0.5 * gp.interior_max_abs(EDGE_SKIP));
    }

    #[test]
    fn p1_lowest_weight_checks() {
        let (_, ctx) = p1_ctx();
        let run = |n| ladder_check(&ctx, 0, &LadderGrid::lowest_weight(40.0, n)).unwrap();
        let (coarse, fine) = (run(4097), run(8193));
        let (c, f) = (coarse.rows[0], fine.rows[0]);
        assert_abs_diff_eq!(f.expected_ratio, 3.0_f64.sqrt(), epsilon = 1e-15);
        assert!((f.norm_ratio / f.expected_ratio - 1.0).abs() < 1e-5);
        assert!(f.eigen_residual < 2e-6 && f.casimir_residual < 3e-6 && fine.annihilation < 1e-6);
        assert!((c.eigen_residual / f.eigen_residual - 4.0).abs() < 0.4);
        assert!((c.casimir_residual / f.casimir_residual - 4.0).abs() < 0.4);
        assert!((coarse.annihilation / fine.annihilation - 4.0).abs() < 0.4);
        assert!(f.complement_overlap < 2e-6);
        // the ground state has not decayed to 1e-10 by r = 40
        assert!(fine.boundary_warning);
    }

    #[test]
    fn ladder_tower_and_orthogonality() {
        let (_, ctx) = p1_ctx();
        let grid = LadderGrid::covering(&ctx, 3, 16385);
        let rep = ladder_check(&ctx, 3, &grid).unwrap();
        assert!(rep.orthogonality <= 1e-8, "{}", rep.orthogonality);
        assert!(!rep.boundary_warning);
        for row in &rep.rows {
            assert!(row.eigen_residual < 1e-4, "{row:?}");
            assert!(row.casimir_residual < 1e-4, "{row:?}");
            assert!(
                (row.norm_ratio / row.expected_ratio - 1.0).abs() < 1e-4,
                "{row:?}"
            );
            assert!(row.complement_overlap < 1e-4, "{row:?}");
        }
        assert_abs_diff_eq!(rep.rows[1].expected_ratio, 8.0_f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn upper_branch_uses_shifted_casimir() {
        let (dq, _) = p1_ctx();
        let up = AlgebraContext::upper(&dq, 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(up.dd_casimir, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(up.lowest_weight(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn bound_states_are_casimir_eigenfunctions() {
        use crate::spectrum::RadialProfile;
        let (dq, _) = p1_ctx();
        for n in 0..3 {
            let eta = dq.b_coul / (dq.delta + n as f64);
            let ctx = AlgebraContext::lower(&dq, eta).unwrap();
            let prof = RadialProfile::new(dq.delta, eta, n).unwrap();
            let y = GridFunction::from_fn(0.02, prof.truncation_radius(), 8193, |r| prof.eval(r))
                .unwrap();
            let cas = apply_su11(&y, &ctx, Su11Op::Casimir);
            let res = windowed_relative(&sub(&cas, &y.scaled(0.75)), &y, 1.0);
            assert!(res < 1e-4, "n = {n}: {res}");
            // G3 acts as B / eta on the level-n state
            let g3 = apply_su11(&y, &ctx, Su11Op::Gamma3);
            assert!(windowed_relative(&sub(&g3, &y.scaled(ctx.b_over_eta)), &y, 1.0) < 1e-4);
        }
    }

    #[test]
    fn rejects_bad_context_and_grids() {
        assert!(AlgebraContext::new(0.0, 1.0, 1.0).is_err());
        let (_, ctx) = p1_ctx();
        let even = GridFunction::from_fn(0.1, 10.0, 64, |r| r).unwrap();
        assert!(inner_product(&even, &even).is_err());
        let a = GridFunction::from_fn(0.1, 10.0, 65, |r| r).unwrap();
        let b = GridFunction::from_fn(0.1, 11.0, 65, |r| r).unwrap();
        assert_eq!(inner_product(&a, &b), Err(Error::GridMismatch));
        assert!(boundary_contaminated(&a));
        let _ = ctx;
    }

    #[test]
    fn mu_equals_d_when_a_is_minus_one() {
        let p = ModelParameters::new(
            StringBackground::new(0.37).unwrap(),
            CouplingSet::new(1.0, 1.0, 1.0, 0.8, 0.0, 0.0).unwrap(),
            QuantumNumbers::new(-3, 0),
        );
        let dq = p.derive().unwrap();
        let rp = rep_parameters(&dq, 2);
        assert_abs_diff_eq!(rp.mu, dq.d_const, epsilon = 1e-12);
        assert_abs_diff_eq!(rp.nu, dq.delta + 2.0, epsilon = 1e-12);
        assert!(rp.residual <= 1e-12);
    }
}
