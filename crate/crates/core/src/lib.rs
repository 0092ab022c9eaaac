//! Bound-state spectrum and radial eigenfunctions of a Dirac fermion in
//! cosmic-string spacetime with a uniform magnetic field and a Coulomb-like
//! scalar potential.
//!
//! The closed-form SU(1,1) solution lives in [`spectrum`] and [`su11`]; it is
//! cross-checked against an independent finite-difference eigensolver in
//! [`oracle`] and against the curved-space Dirac machinery in [`geometry`].

pub mod cli;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod oracle;
pub mod params;
pub mod radial;
pub mod special;
pub mod spectrum;
pub mod su11;
pub mod verify;

pub use error::{Error, Result};
pub use grid::GridFunction;
pub use params::{
    CouplingSet, DerivedQuantities, EnergyMode, ModelParameters, QuantumNumbers, StringBackground,
};
