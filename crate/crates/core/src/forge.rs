//! Procedural part-decomposed assets: SDF primitives, the union SDF,
//! Monte-Carlo volumes, dataset filtering and the seeded generator.

pub mod asset;
pub mod filter;
pub mod generate;
pub mod manifest;
pub mod primitive;
pub mod volume;

pub use asset::{sdf_eval, Asset, Part, SdfHit};
pub use filter::{filter_asset, FilterDecision, RejectReason, MAX_PARTS, MIN_PART_FRACTION};
pub use generate::{generate_asset, GeneratorSpec, Template, GENERATOR_VERSION};
pub use manifest::{DatasetManifest, ManifestEntry};
pub use primitive::{PartPrimitive, PrimitiveKind};
pub use volume::{part_volume_fractions, MIN_VOLUME_SAMPLES};
