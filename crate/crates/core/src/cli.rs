//! Command-line front end: configuration, dispatch and output formatting.
//!
//! Parameters come from flags and an optional JSON file whose keys are the
//! flag names without leading dashes; flags win. CSV output uses `%.9g`
//! formatting and `\n` line endings so identical inputs give identical bytes.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::oracle::{self, OracleConfig};
use crate::params::{
    CouplingSet, DerivedQuantities, EnergyMode, ModelParameters, QuantumNumbers, StringBackground,
};
use crate::radial::{Component, WellPosedness};
use crate::spectrum::{self, AxisPair, AxisRange, GridSpec, SpectrumTable};
use crate::verify::{self, Suite, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_BOUND_STATE: i32 = 3;
pub const EXIT_MALFORMED: i32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            kind: "invalid_config",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind, "exit_code": self.code, "message": self.message })
            .to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match e {
            Error::InvalidParameter { .. }
            | Error::DegenerateBranch
            | Error::GridTooCoarse(_)
            | Error::InvalidGrid(_) => (EXIT_USAGE, "invalid_config"),
            Error::NoBoundState { .. } => (EXIT_NO_BOUND_STATE, "no_bound_state"),
            Error::ComplexEnergy { .. } => (EXIT_NO_BOUND_STATE, "complex_energy"),
            _ => (EXIT_FAIL, "computation_failed"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

/// Parameter sources shared by the flags and the JSON file.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigInput {
    /// Deficit parameter, 0 < rho <= 1.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Coulomb part of the scalar potential.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s1: Option<f64>,
    /// Constant part of the scalar potential.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s2: Option<f64>,
    /// Fermion mass.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    /// Charge.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub charge: Option<f64>,
    /// Magnetic field strength.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a0: Option<f64>,
    /// Momentum along the string.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Azimuthal quantum number.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m: Option<i64>,
    /// Radial quantum number.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Energy threshold: paper or strict-omega2.
    #[arg(long, global = true)]
    pub mode: Option<EnergyMode>,
    /// Grid points for sampled states and the eigensolver.
    #[arg(long = "grid-n", global = true)]
    #[serde(rename = "grid-n")]
    pub grid_n: Option<usize>,
    /// Outer radius for sampled states and the eigensolver.
    #[arg(long = "r-max", global = true, allow_negative_numbers = true)]
    #[serde(rename = "r-max")]
    pub r_max: Option<f64>,
    /// Output file (relative paths resolve under SDS_OUT).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl ConfigInput {
    /// Field-wise `self` over `base`.
    pub fn over(self, base: ConfigInput) -> ConfigInput {
        ConfigInput {
            rho: self.rho.or(base.rho),
            s1: self.s1.or(base.s1),
            s2: self.s2.or(base.s2),
            mass: self.mass.or(base.mass),
            charge: self.charge.or(base.charge),
            a0: self.a0.or(base.a0),
            k: self.k.or(base.k),
            m: self.m.or(base.m),
            n: self.n.or(base.n),
            mode: self.mode.or(base.mode),
            grid_n: self.grid_n.or(base.grid_n),
            r_max: self.r_max.or(base.r_max),
            out: self.out.or(base.out),
        }
    }
}

/// Validated configuration for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: ModelParameters,
    pub grid: GridSpec,
    pub oracle: OracleConfig,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_input(input: &ConfigInput) -> Result<Self, CliError> {
        let background = StringBackground::new(input.rho.unwrap_or(1.0))?;
        let couplings = CouplingSet::new(
            input.mass.unwrap_or(1.0),
            input.charge.unwrap_or(1.0),
            input.a0.unwrap_or(2.0),
            input.s1.unwrap_or(0.0),
            input.s2.unwrap_or(0.0),
            input.k.unwrap_or(0.0),
        )?;
        let quantum = QuantumNumbers::new(input.m.unwrap_or(0), input.n.unwrap_or(0));
        quantum.validate()?;
        let params = ModelParameters::new(background, couplings, quantum)
            .with_mode(input.mode.unwrap_or_default());

        if let Some(n) = input.grid_n {
            if n < crate::grid::MIN_POINTS {
                return Err(CliError::usage(format!(
                    "grid-n: at least {} points required, got {n}",
                    crate::grid::MIN_POINTS
                )));
            }
        }
        if let Some(r) = input.r_max {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::usage(format!(
                    "r-max: must be positive and finite, got {r}"
                )));
            }
        }
        let grid = GridSpec {
            n_points: input.grid_n.unwrap_or(GridSpec::default().n_points),
            r_max: input.r_max,
        };
        let oracle = OracleConfig {
            n_points: input.grid_n.unwrap_or(oracle::DEFAULT_POINTS),
            r_max: input.r_max,
            ..OracleConfig::default()
        };
        Ok(Self {
            params,
            grid,
            oracle,
            out: input.out.clone(),
        })
    }
}

/// Parses a JSON configuration file body. Syntax errors map to exit 64,
/// unknown keys and ill-typed values to exit 2.
pub fn parse_config_json(text: &str) -> Result<ConfigInput, CliError> {
    serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => CliError {
                code: EXIT_MALFORMED,
                kind: "malformed_json",
                message: e.to_string(),
            },
            Category::Data => CliError::usage(e.to_string()),
        }
    })
}

/// `"lo:hi"`.
pub fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::usage(format!("range: expected `lo:hi`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[derive(Debug, Parser)]
#[command(
    name = "sds",
    version,
    about = "Dirac bound states in cosmic-string spacetime"
)]
pub struct Cli {
    /// JSON file with the same keys as the flags (without dashes).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub input: ConfigInput,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Derived algebraic constants as JSON.
    Derive,
    /// Residual suites; all suites unless some are selected.
    Verify(VerifyArgs),
    /// Levels `0..=n-max` at the configured `m` as CSV.
    Spectrum {
        #[arg(long = "n-max", default_value_t = 2)]
        n_max: u32,
    },
    /// Sampled lower and upper radial components as CSV.
    Wavefunction,
    /// Two-axis sweep of the spectrum as CSV.
    Surface(SurfaceArgs),
    /// Closed form against the finite-difference eigensolver, as JSON.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub geometry: bool,
    #[arg(long)]
    pub algebra: bool,
    #[arg(long)]
    pub identities: bool,
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub wavefunctions: bool,
    #[arg(long = "first-order")]
    pub first_order: bool,
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
}

impl VerifyArgs {
    pub fn suites(&self) -> Vec<Suite> {
        let picked: Vec<Suite> = [
            (self.geometry, Suite::Geometry),
            (self.algebra, Suite::Algebra),
            (self.identities, Suite::Identities),
            (self.oracle, Suite::Oracle),
            (self.wavefunctions, Suite::Wavefunctions),
            (self.first_order, Suite::FirstOrder),
        ]
        .into_iter()
        .filter_map(|(on, s)| on.then_some(s))
        .collect();
        if picked.is_empty() {
            Suite::ALL.to_vec()
        } else {
            picked
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SurfaceArgs {
    /// Outer and inner axis, e.g. `k,a0`; axes are k, a0, m, rho.
    #[arg(long, default_value = "k,a0")]
    pub axes: String,
    /// Outer axis range `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub range1: Option<String>,
    /// Inner axis range `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub range2: Option<String>,
    #[arg(long, default_value_t = 41)]
    pub res1: usize,
    #[arg(long, default_value_t = 41)]
    pub res2: usize,
}

/// Result of one command: the rendered output and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub extension: &'static str,
    pub code: i32,
}

/// `%.9g`.
pub fn fmt_g9(x: f64) -> String {
    fmt_g(x, 9)
}

/// C-style `%.{p}g`.
pub fn fmt_g(x: f64, p: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let p = p.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mant), sign, exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

#[derive(Serialize)]
struct DeriveOutput<'a> {
    parameters: &'a ModelParameters,
    derived: DerivedQuantities,
    threshold_sq: f64,
    lower_branch: WellPosedness,
    upper_branch: WellPosedness,
    notes: [&'static str; 2],
}

fn derive_json(cfg: &RunConfig) -> Result<String, CliError> {
    let p = &cfg.params;
    let dq = p.derive()?;
    let classify = |c: Component| crate::radial::decoupled_coefficients(p, &dq, c).well_posedness;
    let out = DeriveOutput {
        parameters: p,
        derived: dq,
        threshold_sq: p.threshold_sq(),
        lower_branch: classify(Component::G),
        upper_branch: classify(Component::F),
        notes: [
            "energy threshold uses (M + s2)^2",
            "states normalized to int y^2 dr = 1",
        ],
    };
    Ok(pretty(&out))
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

pub fn spectrum_csv(base: &ModelParameters, n_max: u32) -> String {
    let mut out = String::from("n,m,k,delta,B,eta,E_plus,E_minus,bound_flag\n");
    for n in 0..=n_max {
        let r = spectrum::spectrum_row(&base.with_quantum(base.quantum.with_n(n)));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.m,
            fmt_g9(r.k),
            fmt_g9(r.delta),
            fmt_g9(r.b),
            fmt_g9(r.eta),
            fmt_g9(r.e_plus),
            fmt_g9(r.e_minus),
            r.flag.as_str()
        );
    }
    out
}

pub fn surface_csv(table: &SpectrumTable) -> String {
    let mut out = format!(
        "{},{},E_plus,E_minus,flag\n",
        table.axes.outer.name(),
        table.axes.inner.name()
    );
    for pt in &table.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_g9(pt.axis1),
            fmt_g9(pt.axis2),
            fmt_g9(pt.row.e_plus),
            fmt_g9(pt.row.e_minus),
            pt.row.flag.as_str()
        );
    }
    out
}

pub fn wavefunction_csv(cfg: &RunConfig) -> Result<String, CliError> {
    let st = spectrum::build_state(&cfg.params, &cfg.grid)?;
    let mut out = String::from("r,y_lower,y_upper\n");
    for (i, (r, y)) in st.y_lower.radii().zip(st.y_lower.values()).enumerate() {
        let up = st.y_upper.as_ref().map_or(f64::NAN, |u| u.values()[i]);
        let _ = writeln!(out, "{},{},{}", fmt_g9(r), fmt_g9(*y), fmt_g9(up));
    }
    Ok(out)
}

pub fn surface_table(cfg: &RunConfig, args: &SurfaceArgs) -> Result<SpectrumTable, CliError> {
    let axes: AxisPair = args.axes.parse()?;
    let range =
        |spec: &Option<String>, axis: spectrum::SurfaceAxis| -> Result<(f64, f64), CliError> {
            spec.as_deref()
                .map_or(Ok(axis.default_range()), parse_range)
        };
    let (lo1, hi1) = range(&args.range1, axes.outer)?;
    let (lo2, hi2) = range(&args.range2, axes.inner)?;
    Ok(spectrum::surface_grid(
        &cfg.params,
        axes,
        AxisRange::new(lo1, hi1, args.res1),
        AxisRange::new(lo2, hi2, args.res2),
    )?)
}

pub fn execute(cfg: &RunConfig, command: &Command) -> Result<Outcome, CliError> {
    let json = |output: String, code: i32| Outcome {
        output,
        extension: "json",
        code,
    };
    let csv = |output: String| Outcome {
        output,
        extension: "csv",
        code: EXIT_OK,
    };
    match command {
        Command::Derive => Ok(json(derive_json(cfg)?, EXIT_OK)),
        Command::Verify(args) => {
            let vc = VerifyConfig {
                seed: args.seed,
                ..VerifyConfig::default()
            };
            let report = verify::verify(&args.suites(), &vc);
            let code = if report.pass { EXIT_OK } else { EXIT_FAIL };
            Ok(json(verify::report_json(&report), code))
        }
        Command::Spectrum { n_max } => Ok(csv(spectrum_csv(&cfg.params, *n_max))),
        Command::Wavefunction => Ok(csv(wavefunction_csv(cfg)?)),
        Command::Surface(args) => Ok(csv(surface_csv(&surface_table(cfg, args)?))),
        Command::Oracle => {
            let p = &cfg.params;
            spectrum::bound_energy(p)?;
            let qns: Vec<_> = (0..3).map(|n| p.quantum.with_n(n)).collect();
            let report = oracle::cross_validate(p, &qns, &cfg.oracle);
            let code = if report.all_pass { EXIT_OK } else { EXIT_FAIL };
            Ok(json(pretty(&report), code))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Derive => "derive",
        Command::Verify(_) => "verify",
        Command::Spectrum { .. } => "spectrum",
        Command::Wavefunction => "wavefunction",
        Command::Surface(_) => "surface",
        Command::Oracle => "oracle",
    }
}

/// Where output goes: `--out` (joined onto `SDS_OUT` when relative), else
/// `SDS_OUT/<command>.<ext>`, else stdout (`None`).
pub fn output_path(
    out: Option<&Path>,
    sds_out: Option<&Path>,
    command: &str,
    extension: &str,
) -> Option<PathBuf> {
    match (out, sds_out) {
        (Some(o), Some(dir)) if o.is_relative() => Some(dir.join(o)),
        (Some(o), _) => Some(o.to_path_buf()),
        (None, Some(dir)) => Some(dir.join(format!("{command}.{extension}"))),
        (None, None) => None,
    }
}

/// Parses arguments and the optional config file into a command and a
/// validated configuration.
pub fn parse_args<I, T>(args: I) -> Result<(Command, RunConfig), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)
        .map_err(|e| CliError::usage(e.to_string().trim_end().to_string()))?;
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError {
                code: EXIT_USAGE,
                kind: "config_unreadable",
                message: format!("{}: {e}", path.display()),
            })?;
            parse_config_json(&text)?
        }
        None => ConfigInput::default(),
    };
    let merged = cli.input.over(file);
    Ok((cli.command, RunConfig::from_input(&merged)?))
}

/// Full program: returns the process exit code.
pub fn run<I, T>(args: I, sds_out: Option<PathBuf>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    // help and version go through clap's own printer
    if let Err(e) = Cli::try_parse_from(&args) {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            let _ = e.print();
            return EXIT_OK;
        }
    }
    let fail = |e: CliError| {
        eprintln!("{}", e.to_json());
        e.code
    };
    let (command, cfg) = match parse_args(&args) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let outcome = match execute(&cfg, &command) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    match output_path(
        cfg.out.as_deref(),
        sds_out.as_deref(),
        command_name(&command),
        outcome.extension,
    ) {
        Some(path) => {
            if let Err(e) = write_file(&path, &outcome.output) {
                return fail(CliError {
                    code: EXIT_FAIL,
                    kind: "output_failed",
                    message: format!("{}: {e}", path.display()),
                });
            }
        }
        None => print!("{}", outcome.output),
    }
    outcome.code
}

fn write_file(path: &Path, body: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, body)
}
