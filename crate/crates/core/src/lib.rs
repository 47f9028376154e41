//! Figure-ground tiles from building footprints, morphological feature
//! vectors, and a random-forest income classifier with grouped
//! permutation importance.
//!
//! Stages, in pipeline order:
//!
//! - [`geodata`]: parse footprints, land use, zip boundaries and income.
//! - [`sampler`]: minimum-distance sample points, labels, balanced splits.
//! - [`raster`]: 200 m tiles and anti-aliased 224 x 224 rasters.
//! - [`morpho`]: direction / density / area / complexity histograms.
//! - [`forest`]: random forest, OOB error, permutation importance.
//! - [`pipeline`]: configuration, CSV artifacts, end-to-end runs.
//! - [`synth`]: synthetic neighbourhoods with known labels.

pub mod forest;
pub mod geodata;
pub mod geometry;
pub mod morpho;
pub mod pipeline;
pub mod raster;
pub mod sampler;
pub mod seeds;
pub mod synth;
