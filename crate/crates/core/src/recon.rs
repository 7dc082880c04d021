//! Deterministic part reconstruction: voxel carving into opacity/colour
//! fields and emission-absorption rendering of single fields.

pub mod carve;
pub mod field;
pub mod render;

pub use carve::{carve, default_carve_bbox, CarveConfig, Carved, ConsistencyRule};
pub use field::{FieldSample, PartField};
pub use render::{ray_profile, render_field, step_count, FieldRender, ProfileStep};
