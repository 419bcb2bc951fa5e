//! Ground time-delay integration.

pub mod config;
pub mod geometry;
pub mod kernels;
pub mod product;
pub mod run;

pub use config::{Distance, Kernel, Level, TdiConfig};
pub use geometry::{BandFrames, CorrectedStack, GeometricCalibration};
pub use kernels::{bin_exponential, bin_nearest, effective_count, nearest_sample, NeighborSample};
pub use product::{GridDef, ProductGrid, ProductMetadata, FILL_VALUE, QA_GEOMETRY, QA_UNFILLED};
pub use run::{allocate_output, l1b_grid, l1c_grid, run_tdi, run_tdi_on, OutputGrid, Sampler};
