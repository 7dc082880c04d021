//! End-to-end pipeline: configuration, staged commands, reports.

pub mod config;
pub mod stages;

pub use config::{PipelineConfig, CONFIG_VERSION};
pub use stages::{CompletionSummary, MetricsReport, Pipeline, SampleMetrics, SegmentMode, Summary};
