//! End-to-end rendering for each mode.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::config::{Mode, RenderConfig};
use crate::image::Image;
use crate::pathgraph::{solve, DirectMode, PathGraph, SolveConfig};
use crate::scene::Scene;
use crate::transport::{record_extra_direct, render_pt, write_records, RecordSet, RenderSettings};

#[derive(Debug, Clone)]
pub struct RenderResult {
    pub image: Image,
    /// Per-iteration residuals; empty unless the mode refines paths.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl RenderConfig {
    fn direct_mode(&self) -> DirectMode {
        if self.aggregate_direct {
            DirectMode::Aggregated
        } else {
            DirectMode::PathTraced
        }
    }

    fn solve_config(&self) -> SolveConfig {
        SolveConfig { iterations: self.iterations, tol: self.tol }
    }
}

/// Traces the scene and keeps every path record, with extra direct samples
/// at first vertices when configured.
pub fn trace_records(scene: &Scene, config: &RenderConfig) -> Result<RecordSet> {
    let settings = RenderSettings { spp: config.spp, seed: config.seed, keep_records: true, trace: config.trace };
    let mut paths = render_pt(scene, &settings)?.paths;
    if config.extra_direct > 0 {
        record_extra_direct(scene, &mut paths, config.extra_direct, config.seed);
    }
    Ok(RecordSet { width: scene.camera.width, height: scene.camera.height, spp: config.spp, paths })
}

/// Clusters the records, solves for incoming radiance and writes the image.
pub fn refine_records(set: &RecordSet, config: &RenderConfig) -> Result<RenderResult> {
    config.validate()?;
    let mut graph = PathGraph::from_set(set);
    graph.assign_clusters(config.cluster_size, config.seed);
    let solution = solve(&graph, &config.solve_config())?;
    Ok(RenderResult {
        image: solution.splat(&graph, config.direct_mode()),
        residuals: solution.residuals,
        converged: solution.converged,
    })
}

pub fn render(scene: &Scene, config: &RenderConfig) -> Result<RenderResult> {
    config.validate()?;
    let result = match config.mode {
        Mode::Pt | Mode::Reference => {
            let keep = config.mode == Mode::Pt && config.dump_records.is_some();
            let settings = RenderSettings { spp: config.spp, seed: config.seed, keep_records: keep, trace: config.trace };
            let out = render_pt(scene, &settings)?;
            if let Some(path) = &config.dump_records {
                if keep {
                    let set = RecordSet { width: out.image.width, height: out.image.height, spp: config.spp, paths: out.paths };
                    write_records(&set, path)?;
                }
            }
            RenderResult { image: out.image, residuals: Vec::new(), converged: true }
        }
        Mode::Pg => {
            let set = trace_records(scene, config)?;
            if let Some(path) = &config.dump_records {
                write_records(&set, path)?;
            }
            refine_records(&set, config)?
        }
    };
    if let Some(path) = &config.residual_csv {
        write_residual_csv(path, &result.residuals)?;
    }
    Ok(result)
}

pub fn residual_csv(residuals: &[f64]) -> String {
    let mut s = String::from("iteration,residual\n");
    for (i, r) in residuals.iter().enumerate() {
        writeln!(s, "{},{r:e}", i + 1).unwrap();
    }
    s
}

pub fn write_residual_csv(path: &Path, residuals: &[f64]) -> Result<()> {
    std::fs::write(path, residual_csv(residuals)).map_err(|e| Error::io(path, e))
}
