//! Pseudo-spectral simulation and analysis of the magneto-geostrophic active
//! scalar equation on the 3-torus, with emphasis on data supported on
//! frequency lines.

pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod fields;
pub mod fit;
pub mod lattice;
pub mod picard;
pub mod presets;
pub mod snapshot;
pub mod symbols;
pub mod theory;
pub mod timestepping;
pub mod transform;
