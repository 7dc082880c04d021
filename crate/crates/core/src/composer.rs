//! Multi-part emission-absorption compositing and the reassembly evaluation.

pub mod compose;
pub mod report;

pub use compose::{compose_render, merge_fields, Assembly, CompositeRender};
pub use report::{
    complete_proposal, novel_cameras, reassembly_report, segment_for_reassembly, AssetReassembly,
    ReassemblyOptions, ReassemblyReport,
};
