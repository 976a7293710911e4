//! Path tracing and the per-vertex records it leaves behind.

pub mod dump;
pub mod extra_direct;
pub mod record;
pub mod tracer;

pub use dump::{read_records, write_records};
pub use extra_direct::{fresh_direct_estimate, record_extra_direct};
pub use record::{ClassKey, PathRecord, ScatterKind, ShadingPointRecord};
pub use tracer::{image_from_paths, render_pt, trace_path, RenderOutput, RenderSettings, TraceConfig};

/// Recorded paths of one render plus the image layout they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    pub width: usize,
    pub height: usize,
    pub spp: u32,
    /// Pixel order, then sample order.
    pub paths: Vec<PathRecord>,
}

impl RecordSet {
    pub fn record_count(&self) -> usize {
        self.paths.iter().map(|p| p.records.len()).sum()
    }
}
