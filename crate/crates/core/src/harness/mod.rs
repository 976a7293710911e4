//! Scene files, metrics, experiment runners and reference caching.

pub mod config;
pub mod experiments;
pub mod metrics;
pub mod presets;
pub mod reference;
pub mod render;
pub mod scene_format;

pub use config::{Mode, RenderConfig};
pub use experiments::{run_convergence, run_iteration_study, ConvergenceRow, IterationStudy};
pub use metrics::compute_mse;
pub use reference::cached_reference;
pub use render::{refine_records, render, trace_records, RenderResult};
pub use scene_format::{load_scene, parse_scene, serialize_scene};

use crate::error::{Error, Result};

/// Sizes the global worker pool from `VOLPG_THREADS` when set. Returns the
/// requested count, or `None` when the variable is absent.
pub fn configure_threads() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var("VOLPG_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("VOLPG_THREADS must be a positive integer, got '{raw}'")))?;
    // A pool that already exists keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}
