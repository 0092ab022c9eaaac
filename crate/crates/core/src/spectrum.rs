//! Closed-form bound-state energies and radial eigenfunctions.
//!
//! The lower rotated component of level `n` is
//! `r^delta e^{-eta r} 1F1(-n; 2 delta; 2 eta r)` with `eta = B / (delta + n)`;
//! the upper component solves the same problem with the centrifugal
//! coefficient shifted `d -> d + a`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry;
use crate::grid::GridFunction;
use crate::params::{DerivedQuantities, ModelParameters, StringBackground};
use crate::special::{integrate, truncation_radius, Integrand, KummerPoly};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energies {
    pub e_plus: f64,
    pub e_minus: f64,
    pub eta_n: f64,
    pub nu: f64,
}

/// `E = +-sqrt(threshold^2 - B^2 / (delta + n)^2)` for level `p.quantum.n`.
pub fn bound_energy(p: &ModelParameters) -> Result<Energies> {
    let dq = p.derive()?;
    bound_energy_with(p, &dq)
}

pub fn bound_energy_with(p: &ModelParameters, dq: &DerivedQuantities) -> Result<Energies> {
    let threshold_sq = p.threshold_sq();
    if !(dq.b_coul > 0.0) {
        return Err(Error::NoBoundState {
            b: dq.b_coul,
            threshold: threshold_sq.sqrt(),
        });
    }
    let nu = dq.delta + p.quantum.n as f64;
    let eta_n = dq.b_coul / nu;
    let radicand = threshold_sq - eta_n * eta_n;
    if radicand < 0.0 {
        return Err(Error::ComplexEnergy { radicand });
    }
    let e = radicand.sqrt();
    Ok(Energies {
        e_plus: e,
        e_minus: -e,
        eta_n,
        nu,
    })
}

/// Unnormalized analytic profile `r^delta e^{-eta r} 1F1(-n; 2 delta; 2 eta r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    delta: f64,
    eta: f64,
    poly: KummerPoly,
}

impl RadialProfile {
    pub fn new(delta: f64, eta: f64, n: u32) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Evanescent {
                eta_sq: eta * eta.abs(),
            });
        }
        Ok(Self {
            delta,
            eta,
            poly: KummerPoly::new(n, 2.0 * delta)?,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn n(&self) -> u32 {
        self.poly.degree()
    }

    pub fn eval(&self, r: f64) -> f64 {
        r.powf(self.delta) * (-self.eta * r).exp() * self.poly.eval(2.0 * self.eta * r)
    }

    /// Value with exact first and second radial derivatives.
    pub fn eval_with_derivatives(&self, r: f64) -> (f64, f64, f64) {
        let (d, eta) = (self.delta, self.eta);
        let u = r.powf(d) * (-eta * r).exp();
        let log_d = d / r - eta;
        let u1 = u * log_d;
        let u2 = u * (log_d * log_d - d / (r * r));
        let (p, pz, pzz) = self.poly.eval_with_derivatives(2.0 * eta * r);
        let (p1, p2) = (2.0 * eta * pz, 4.0 * eta * eta * pzz);
        (u * p, u1 * p + u * p1, u2 * p + 2.0 * u1 * p1 + u * p2)
    }

    /// Upper limit past which `|y|^2` is below `1e-16` of its peak envelope.
    pub fn truncation_radius(&self) -> f64 {
        truncation_radius(2.0 * self.delta + 2.0 * self.n() as f64, self.eta, 1e-16)
    }

    /// `int_0^R y^2 w(r) dr` by composite Simpson with `R` from the envelope rule.
    pub fn weighted_norm_sq(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let r_max = self.truncation_radius();
        let g = |r: f64| {
            let y = self.eval(r);
            y * y * weight(r)
        };
        integrate(Integrand::Callable(&g), 0.0, r_max, 20_000).unwrap_or(f64::NAN)
    }
}

/// Grid layout for sampled states: `r_i = i h`, `i = 1..=n_points`, so the
/// grid ends at `r_max` and starts one step away from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub n_points: usize,
    /// Defaults to the envelope truncation radius of the state.
    pub r_max: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_points: 4001,
            r_max: None,
        }
    }
}

impl GridSpec {
    pub fn sample(&self, r_max: f64, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        let n = self.n_points;
        if n < crate::grid::MIN_POINTS {
            return Err(Error::GridTooCoarse(n));
        }
        let h = r_max / n as f64;
        GridFunction::from_fn(h, r_max, n, f)
    }
}

/// Which profiles make up the rotated pair at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePair {
    pub lower: RadialProfile,
    pub upper: Option<RadialProfile>,
    pub energies: Energies,
}

/// `delta` of the branch whose centrifugal coefficient is `casimir`.
pub fn branch_delta(casimir: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * casimir).max(0.0).sqrt())
}

pub fn profile_pair(p: &ModelParameters, dq: &DerivedQuantities) -> Result<ProfilePair> {
    let energies = bound_energy_with(p, dq)?;
    let n = p.quantum.n;
    let lower = RadialProfile::new(dq.delta, energies.eta_n, n)?;

    // the upper component shares eta, so delta_F + n_F = delta + n
    let delta_f = branch_delta(dq.casimir_f);
    let n_f = dq.delta + n as f64 - delta_f;
    let n_f_round = n_f.round();
    let upper = if n_f_round >= 0.0 && (n_f - n_f_round).abs() < 1e-9 {
        Some(RadialProfile::new(
            delta_f,
            energies.eta_n,
            n_f_round as u32,
        )?)
    } else {
        None
    };
    Ok(ProfilePair {
        lower,
        upper,
        energies,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundState {
    pub n: u32,
    pub m: i64,
    pub k: f64,
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub eta_n: f64,
    pub delta: f64,
    pub nu: f64,
    /// Lower rotated component, normalized to `int y^2 dr = 1`.
    pub y_lower: GridFunction,
    /// Upper rotated component on the same scale, when a partner level exists.
    pub y_upper: Option<GridFunction>,
    /// Multiplies the raw profile to give `int y^2 dr = 1`.
    pub norm_constant: f64,
    /// Alternative constant for `int y^2 varrho r dr = 1`.
    pub curved_norm_constant: f64,
    /// Ratio of the upper to the lower raw profile fixed by the first-order system.
    pub upper_scale: Option<f64>,
}

pub fn build_state(p: &ModelParameters, grid: &GridSpec) -> Result<BoundState> {
    let dq = p.derive()?;
    let pair = profile_pair(p, &dq)?;
    let lower = &pair.lower;

    let norm_constant = 1.0 / lower.weighted_norm_sq(|_| 1.0).sqrt();
    let rho = p.varrho();
    let curved_norm_constant = 1.0 / lower.weighted_norm_sq(|r| rho * r).sqrt();

    let r_max = grid.r_max.unwrap_or_else(|| lower.truncation_radius());
    let y_lower = grid.sample(r_max, |r| norm_constant * lower.eval(r))?;

    let (y_upper, upper_scale) = match &pair.upper {
        Some(upper) => {
            let fit = geometry::fit_upper_scale(p, &dq, pair.energies.e_plus, upper, lower)?;
            let y = grid.sample(r_max, |r| norm_constant * fit.alpha * upper.eval(r))?;
            (Some(y), Some(fit.alpha))
        }
        None => (None, None),
    };

    Ok(BoundState {
        n: p.quantum.n,
        m: p.quantum.m,
        k: p.couplings.k,
        energy_plus: pair.energies.e_plus,
        energy_minus: pair.energies.e_minus,
        eta_n: pair.energies.eta_n,
        delta: dq.delta,
        nu: pair.energies.nu,
        y_lower,
        y_upper,
        norm_constant,
        curved_norm_constant,
        upper_scale,
    })
}

/// Strict sign changes on the open interior, ignoring samples below
/// `1e-12 max|y|`.
pub fn node_count(y: &GridFunction) -> usize {
    let vals = y.values();
    if vals.len() < 3 {
        return 0;
    }
    let floor = 1e-12 * y.max_abs();
    let mut count = 0;
    let mut last_sign = 0.0;
    for &v in &vals[1..vals.len() - 1] {
        if v.abs() <= floor {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            count += 1;
        }
        last_sign = s;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFlag {
    Bound,
    NoBoundState,
    ComplexEnergy,
    InvalidParameter,
}

impl BoundFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundFlag::Bound => "bound",
            BoundFlag::NoBoundState => "no_bound_state",
            BoundFlag::ComplexEnergy => "complex_energy",
            BoundFlag::InvalidParameter => "invalid_parameter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub n: u32,
    pub m: i64,
    pub k: f64,
    pub delta: f64,
    pub b: f64,
    pub eta: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub flag: BoundFlag,
}

impl SpectrumRow {
    pub fn bound(&self) -> bool {
        self.flag == BoundFlag::Bound
    }
}

/// One table row; failures become flags with `NaN` in the affected columns.
pub fn spectrum_row(p: &ModelParameters) -> SpectrumRow {
    let nan = f64::NAN;
    let mut row = SpectrumRow {
        n: p.quantum.n,
        m: p.quantum.m,
        k: p.couplings.k,
        delta: nan,
        b: nan,
        eta: nan,
        e_plus: nan,
        e_minus: nan,
        flag: BoundFlag::InvalidParameter,
    };
    let Ok(dq) = p.derive() else {
        return row;
    };
    row.delta = dq.delta;
    row.b = dq.b_coul;
    match bound_energy_with(p, &dq) {
        Ok(e) => {
            row.eta = e.eta_n;
            row.e_plus = e.e_plus;
            row.e_minus = e.e_minus;
            row.flag = BoundFlag::Bound;
        }
        Err(Error::NoBoundState { .. }) => row.flag = BoundFlag::NoBoundState,
        Err(Error::ComplexEnergy { .. }) => {
            row.eta = dq.b_coul / (dq.delta + p.quantum.n as f64);
            row.flag = BoundFlag::ComplexEnergy;
        }
        Err(_) => {}
    }
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceAxis {
    K,
    A0,
    M,
    Rho,
}

impl SurfaceAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceAxis::K => "k",
            SurfaceAxis::A0 => "a0",
            SurfaceAxis::M => "m",
            SurfaceAxis::Rho => "rho",
        }
    }

    pub fn default_range(&self) -> (f64, f64) {
        match self {
            SurfaceAxis::K => (-5.0, 5.0),
            SurfaceAxis::A0 => (0.0, 30.0),
            SurfaceAxis::M => (-5.0, 5.0),
            SurfaceAxis::Rho => (0.05, 1.0),
        }
    }

    fn apply(&self, p: &mut ModelParameters, value: f64) -> Result<()> {
        match self {
            SurfaceAxis::K => p.couplings.k = value,
            SurfaceAxis::A0 => p.couplings.field_a0 = value,
            SurfaceAxis::M => {
                p.quantum.m = value as i64;
                p.quantum.validate()?;
            }
            SurfaceAxis::Rho => p.background = StringBackground::new(value)?,
        }
        Ok(())
    }
}

impl std::str::FromStr for SurfaceAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "k" => Ok(SurfaceAxis::K),
            "a0" => Ok(SurfaceAxis::A0),
            "m" => Ok(SurfaceAxis::M),
            "rho" => Ok(SurfaceAxis::Rho),
            other => Err(Error::InvalidParameter {
                name: "axes",
                reason: format!("unknown axis `{other}`, expected one of k, a0, m, rho"),
            }),
        }
    }
}

/// Two distinct sweep axes, outer first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AxisPair {
    pub outer: SurfaceAxis,
    pub inner: SurfaceAxis,
}

impl AxisPair {
    pub fn new(outer: SurfaceAxis, inner: SurfaceAxis) -> Result<Self> {
        if outer == inner {
            return Err(Error::InvalidParameter {
                name: "axes",
                reason: format!("axes must differ, got `{}` twice", outer.name()),
            });
        }
        Ok(Self { outer, inner })
    }
}

impl std::str::FromStr for AxisPair {
    type Err = Error;

    /// `"k,a0"` style.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::InvalidParameter {
                name: "axes",
                reason: format!("expected two comma-separated axes, got `{s}`"),
            });
        };
        AxisPair::new(a.parse()?, b.parse()?)
    }
}

/// Sampling of one sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub resolution: usize,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, resolution: usize) -> Self {
        Self { lo, hi, resolution }
    }

    /// Linear samples; the `m` axis takes every integer in `[lo, hi]`.
    pub fn samples(&self, axis: SurfaceAxis) -> Result<Vec<f64>> {
        let invalid = |reason: String| Error::InvalidParameter {
            name: "range",
            reason,
        };
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(invalid(format!("bad range [{}, {}]", self.lo, self.hi)));
        }
        if axis == SurfaceAxis::M {
            let (lo, hi) = (self.lo.ceil(), self.hi.floor());
            if lo > hi || hi - lo > 10_000.0 {
                return Err(invalid(format!(
                    "no usable integers in [{}, {}]",
                    self.lo, self.hi
                )));
            }
            return Ok((lo as i64..=hi as i64).map(|m| m as f64).collect());
        }
        match self.resolution {
            0 => Err(invalid("resolution must be positive".into())),
            1 if self.lo == self.hi => Ok(vec![self.lo]),
            1 => Err(invalid("a single sample needs lo == hi".into())),
            n if n > 1_000_000 => Err(invalid(format!("resolution {n} too large"))),
            n => {
                let step = (self.hi - self.lo) / (n - 1) as f64;
                Ok((0..n)
                    .map(|i| {
                        if i + 1 == n {
                            self.hi
                        } else {
                            self.lo + i as f64 * step
                        }
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub axis1: f64,
    pub axis2: f64,
    pub row: SpectrumRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub axes: AxisPair,
    /// Row-major, outer axis varying slowest.
    pub points: Vec<SurfacePoint>,
}

/// Evaluates the spectrum over a two-axis grid around `base`.
pub fn surface_grid(
    base: &ModelParameters,
    axes: AxisPair,
    outer: AxisRange,
    inner: AxisRange,
) -> Result<SpectrumTable> {
    let xs = outer.samples(axes.outer)?;
    let ys = inner.samples(axes.inner)?;
    let grid: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect();
    let points = grid
        .par_iter()
        .map(|&(x, y)| {
            let mut p = *base;
            let ok = axes
                .outer
                .apply(&mut p, x)
                .and_then(|_| axes.inner.apply(&mut p, y));
            let row = match ok {
                Ok(()) => spectrum_row(&p),
                Err(_) => {
                    let mut r = spectrum_row(base);
                    r.flag = BoundFlag::InvalidParameter;
                    r.e_plus = f64::NAN;
                    r.e_minus = f64::NAN;
                    r
                }
            };
            SurfacePoint {
                axis1: x,
                axis2: y,
                row,
            }
        })
        .collect();
    Ok(SpectrumTable { axes, points })
}
