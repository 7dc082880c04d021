//! Multi-view grid rendering: rig construction, sphere tracing, per-part
//! depth maps, depth-argmin masks and masked PSNR.

pub mod bundle;
pub mod camera;
pub mod march;

pub use bundle::{derive_masks, grid_to_tile, render_views, ViewBundle};
pub use camera::{make_rig, Camera, RIG_AZIMUTHS_DEG, RIG_ELEVATION_DEG};
pub use march::{sphere_trace, MarchConfig, Shading};

pub use crate::raster::foreground_psnr;
