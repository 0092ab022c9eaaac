use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("radius must be positive, got r = {0}")]
    NonPositiveRadius(f64),

    #[error("spacetime index {0} out of range 0..=3")]
    IndexOutOfRange(usize),

    #[error("degenerate branch: s1 = 0 with j < 0 makes the rotation angle discontinuous")]
    DegenerateBranch,

    #[error(
        "no bound state: effective Coulomb strength B = {b} <= 0 (free threshold E = {threshold})"
    )]
    NoBoundState { b: f64, threshold: f64 },

    #[error("complex energy: radicand {radicand} < 0")]
    ComplexEnergy { radicand: f64 },

    #[error("evanescent branch: eta^2 = {eta_sq} <= 0")]
    Evanescent { eta_sq: f64 },

    #[error("ill-posed radial problem: l(l+1) = {ell_eff_sq} < -1/4")]
    IllPosed { ell_eff_sq: f64 },

    #[error("bisection failed to converge for eigenvalue index {index}")]
    NonConvergence { index: usize },

    #[error("only {found} bound eigenvalues below zero, {requested} requested")]
    TooFewBoundStates { found: usize, requested: usize },

    #[error("grid functions do not share one grid")]
    GridMismatch,

    #[error("grid too coarse: {0} points, at least 16 required")]
    GridTooCoarse(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("composite Simpson needs a positive even panel count, got {0}")]
    InvalidPanels(usize),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("partner reconstruction singular: M + S(r) + E vanishes near r = {r}")]
    SingularReconstruction { r: f64 },
}
