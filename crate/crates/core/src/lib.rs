//! Laplace operators on finitely ramified self-similar lattices, their
//! spectra, and the renormalization maps that compute densities of states.

pub mod contour;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod grassmann;
pub mod measure;
pub mod operator;
pub mod poly;
pub mod renorm;
pub mod schur;
pub mod siegel;
pub mod spectral;
pub mod structure;
pub mod weight;

pub use error::{Error, Result};
pub use exec::Exec;
