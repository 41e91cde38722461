//! Relative interlevel set cohomology (RISC) of piecewise-linear functions on finite
//! simplicial complexes, computed with exact rational geometry and finite-field linear algebra.

pub mod exact_geometry;
pub mod field_linalg;
pub mod plc;
pub mod strip_module;
pub mod risc_builder;
pub mod interleave;
pub mod cli;
