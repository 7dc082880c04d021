//! Part-based 3D asset benchmark core.
//!
//! The crate builds procedural part-decomposed assets, renders them into
//! 2x2 multi-view grids with per-part depth and masks, encodes/decodes
//! colour-coded segmentation maps, samples and ranks segmentation proposals,
//! evaluates them with smoothed-IoU mAP and recall, completes occluded part
//! views, reconstructs parts by voxel carving, and composites the parts with
//! a generalised emission-absorption renderer. The `pipeline` module wires
//! the stages behind the `partbench` CLI.

pub mod completer;
pub mod composer;
pub mod error;
pub mod forge;
pub mod io;
pub mod math;
pub mod metrics;
pub mod pipeline;
pub mod proposer;
pub mod raster;
pub mod recon;
pub mod render;
pub mod segmap;

pub use error::{Error, Result};
