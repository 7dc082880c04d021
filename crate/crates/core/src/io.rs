//! File formats: PFM depth maps, PNG images and bilevel masks, RLE mask
//! sidecars, binary field and conditioning files.

pub mod cond_file;
pub mod field_file;
pub mod pfm;
pub mod png;
pub mod rle;

pub use cond_file::{read_conditioning, write_conditioning};
pub use field_file::{read_field, write_field};
pub use pfm::{read_pfm, write_pfm};
pub use png::{load_bilevel_png, load_rgb_png, save_bilevel_png, save_rgb_png};
pub use rle::{ProposalFile, RleMask, RleProposal};
