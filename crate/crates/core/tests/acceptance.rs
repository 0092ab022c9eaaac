use std::io::Write;
use std::process::Command;
use std::time::Instant;

use sds_core::cli::{surface_csv, RunConfig, SurfaceArgs};
use sds_core::oracle::{self, OracleConfig};
use sds_core::spectrum::{self, AxisPair, AxisRange, BoundFlag, SpectrumTable, SurfaceAxis};
use sds_core::verify::{self, Suite, SuiteReport, VerifyConfig};
use sds_core::{CouplingSet, ModelParameters, QuantumNumbers, StringBackground};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn emit(line: &Line) {
    // bypasses the test harness capture so the lines show in plain runs
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "acceptance {} [{}] {}: {}",
        line.id,
        if line.pass { "PASS" } else { "FAIL" },
        line.title,
        line.detail
    );
}

fn suite_line(id: u32, title: &'static str, report: &SuiteReport) -> Line {
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}={:e}", c.name, c.value))
        .collect();
    let detail = if failed.is_empty() {
        format!("{} checks", report.checks.len())
    } else {
        format!("failing: {}", failed.join(", "))
    };
    Line {
        id,
        title,
        pass: report.pass,
        detail,
    }
}

fn value(report: &SuiteReport, name: &str) -> f64 {
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .map_or(f64::NAN, |c| c.value)
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let cfg = OracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(verify::DEFAULT_SEED);
    let mut sets = vec![verify::p1(0), verify::half_rho(0)];
    sets.extend((0..20).map(|_| verify::random_bound_parameters(&mut rng)));

    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for p in &sets {
        let qns: Vec<_> = (0..3).map(|n| p.quantum.with_n(n)).collect();
        let rep = oracle::cross_validate(p, &qns, &cfg);
        for row in &rep.rows {
            match row.rel_dev {
                Some(d) => worst = worst.max(d),
                None => errors += 1,
            }
        }
    }
    let e_p1 = spectrum::bound_energy(&verify::p1(0)).map_or(f64::NAN, |e| e.e_plus);
    let e_half = spectrum::bound_energy(&verify::half_rho(0)).map_or(f64::NAN, |e| e.e_plus);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = errors == 0
        && worst <= oracle::PASS_TOLERANCE
        && (e_p1 - (8.0_f64 / 9.0).sqrt()).abs() <= 1e-12
        && (e_half - 0.971_737).abs() <= 1e-6
        && elapsed < 120.0;
    Line {
        id: 1,
        title: "dual-path spectrum",
        pass,
        detail: format!(
            "{} sets x 3 levels, worst eta^2 rel dev {worst:.3e} (<= 5e-4), E+(P1) = {e_p1:.7}, E+(rho=1/2) = {e_half:.7}, {elapsed:.2} s",
            sets.len()
        ),
    }
}

fn criterion_3(report: &SuiteReport) -> Line {
    let mut line = suite_line(3, "SU(1,1) operator suite", report);
    line.detail = format!(
        "{}; comm_pm {:.2e} (order {:.2}), casimir {:.2e} (order {:.2}), annihilation {:.2e}, |norm/sqrt3 - 1| {:.2e}, n = {}",
        line.detail,
        value(report, "comm_pm"),
        value(report, "comm_pm_order"),
        value(report, "casimir_eigenvalue"),
        value(report, "casimir_eigenvalue_order"),
        value(report, "lowest_weight_annihilation"),
        value(report, "norm_coefficient_sqrt3"),
        verify::ALGEBRA_FINE - 1,
    );
    line
}

fn figure_base(rho: f64, a0: f64, m: i64, n: u32) -> ModelParameters {
    ModelParameters::new(
        StringBackground::new(rho).unwrap(),
        CouplingSet::new(1.0, 1.0, a0, 0.0, 0.0, 0.0).unwrap(),
        QuantumNumbers::new(m, n),
    )
}

/// Largest spread of `E+^2 - k^2` among bound rows that differ only in `k`.
fn hyperboloid_spread(tables: &[(f64, SpectrumTable)]) -> (f64, usize) {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (k_fixed, t) in tables {
        for pt in &t.points {
            if pt.row.flag != BoundFlag::Bound {
                continue;
            }
            let (k, key) = match (t.axes.outer, t.axes.inner) {
                (SurfaceAxis::K, _) => (pt.axis1, format!("{}", pt.axis2)),
                (_, SurfaceAxis::K) => (pt.axis2, format!("{}", pt.axis1)),
                _ => (*k_fixed, format!("{},{}", pt.axis1, pt.axis2)),
            };
            groups
                .entry(key)
                .or_default()
                .push(pt.row.e_plus * pt.row.e_plus - k * k);
        }
    }
    let mut spread: f64 = 0.0;
    let mut compared = 0;
    for vals in groups.values().filter(|v| v.len() > 1) {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
        compared += vals.len();
    }
    (spread, compared)
}

type SweepRun = (f64, Result<SpectrumTable, sds_core::Error>);

fn criterion_7() -> Line {
    let sweep = |base: ModelParameters,
                 outer: SurfaceAxis,
                 inner: SurfaceAxis,
                 r1: (f64, f64),
                 r2: (f64, f64)| {
        spectrum::surface_grid(
            &base,
            AxisPair::new(outer, inner).unwrap(),
            AxisRange::new(r1.0, r1.1, 41),
            AxisRange::new(r2.0, r2.1, 41),
        )
    };
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let mut ok = true;
    let cases: Vec<(&str, Vec<SweepRun>)> = vec![
        (
            "rho=0.2 (k,a0)",
            vec![(
                0.0,
                sweep(
                    figure_base(0.2, 15.0, 2, 3),
                    SurfaceAxis::K,
                    SurfaceAxis::A0,
                    (-5.0, 5.0),
                    (0.0, 30.0),
                ),
            )],
        ),
        (
            "rho=0.9 (k,a0)",
            vec![(
                0.0,
                sweep(
                    figure_base(0.9, 15.0, 2, 3),
                    SurfaceAxis::K,
                    SurfaceAxis::A0,
                    (-5.0, 5.0),
                    (0.0, 30.0),
                ),
            )],
        ),
        (
            "a0=15 (m,k)",
            vec![(
                0.0,
                sweep(
                    figure_base(0.2, 15.0, 2, 3),
                    SurfaceAxis::M,
                    SurfaceAxis::K,
                    (-5.0, 5.0),
                    (-5.0, 5.0),
                ),
            )],
        ),
        (
            "m=2 n=3 (rho,a0)",
            [0.0, 1.5, -3.0]
                .into_iter()
                .map(|k| {
                    let mut b = figure_base(0.2, 15.0, 2, 3);
                    b.couplings.k = k;
                    (
                        k,
                        sweep(
                            b,
                            SurfaceAxis::Rho,
                            SurfaceAxis::A0,
                            (0.05, 1.0),
                            (0.0, 30.0),
                        ),
                    )
                })
                .collect(),
        ),
    ];
    for (label, runs) in cases {
        let mut tables = Vec::new();
        for (k, t) in runs {
            match t {
                Ok(t) => tables.push((k, t)),
                Err(e) => {
                    ok = false;
                    details.push(format!("{label}: {e}"));
                }
            }
        }
        let rows: usize = tables.iter().map(|(_, t)| t.points.len()).sum();
        let (spread, compared) = hyperboloid_spread(&tables);
        ok &= compared > 0 && spread <= 1e-10;
        worst = worst.max(spread);
        details.push(format!("{label}: {rows} rows, {compared} compared"));
    }
    Line {
        id: 7,
        title: "figure sweeps",
        pass: ok,
        detail: format!(
            "max |d(E+^2 - k^2)| {worst:.2e} (<= 1e-10); {}",
            details.join("; ")
        ),
    }
}

fn run_bin(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_sds"))
        .args(args)
        .env_remove("SDS_OUT")
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn criterion_8() -> Line {
    let surface = [
        "surface", "--axes", "k,a0", "--rho", "0.2", "--m", "2", "--n", "3",
    ];
    let (s1, c1) = run_bin(&surface);
    let (s2, c2) = run_bin(&surface);
    let (v1, d1) = run_bin(&["verify"]);
    let (v2, d2) = run_bin(&["verify"]);

    // the binary and the library agree byte for byte
    let cfg = RunConfig::from_input(&sds_core::cli::ConfigInput {
        rho: Some(0.2),
        m: Some(2),
        n: Some(3),
        ..Default::default()
    })
    .unwrap();
    let args = SurfaceArgs {
        axes: "k,a0".into(),
        range1: None,
        range2: None,
        res1: 41,
        res2: 41,
    };
    let lib = surface_csv(&sds_core::cli::surface_table(&cfg, &args).unwrap());
    let header_ok = s1.starts_with(b"k,a0,E_plus,E_minus,flag\n");

    let pass = c1 == 0
        && c2 == 0
        && d1 == 0
        && d2 == 0
        && s1 == s2
        && v1 == v2
        && header_ok
        && lib.as_bytes() == s1.as_slice();
    Line {
        id: 8,
        title: "determinism",
        pass,
        detail: format!(
            "surface {} bytes identical={}, verify {} bytes identical={}, exit codes ({c1},{c2},{d1},{d2})",
            s1.len(),
            s1 == s2,
            v1.len(),
            v1 == v2
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let cfg = VerifyConfig::default();
    let lines = [
        criterion_1(),
        suite_line(
            2,
            "algebraic identities",
            &verify::run_suite(Suite::Identities, &cfg),
        ),
        criterion_3(&verify::run_suite(Suite::Algebra, &cfg)),
        suite_line(
            4,
            "geometry suite",
            &verify::run_suite(Suite::Geometry, &cfg),
        ),
        suite_line(
            5,
            "wavefunction suite",
            &verify::run_suite(Suite::Wavefunctions, &cfg),
        ),
        suite_line(
            6,
            "first-order system",
            &verify::run_suite(Suite::FirstOrder, &cfg),
        ),
        criterion_7(),
        criterion_8(),
    ];

    // the harness prints `test acceptance_criteria ... ` without a newline
    let _ = writeln!(std::io::stdout().lock());
    for l in &lines {
        emit(l);
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
