//! Exact dynamics of the induced maps: degree growth, the gasket and the
//! interval examples.

pub mod degree;
pub mod gasket;
pub mod interval;
pub mod multipoly;
pub mod rational1d;
