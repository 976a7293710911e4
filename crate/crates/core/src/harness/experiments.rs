//! Convergence and iteration-count studies.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::harness::config::{Mode, RenderConfig};
use crate::harness::metrics::compute_mse;
use crate::harness::render::{render, residual_csv, trace_records};
use crate::image::Image;
use crate::pathgraph::{DirectMode, PathGraph, Solver};
use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub method: Mode,
    pub spp: u32,
    pub seed: u64,
    pub mse: f64,
    pub wall_seconds: f64,
}

/// Renders every (method, spp, seed) combination and scores it against `reference`.
pub fn run_convergence(
    scene: &Scene,
    base: &RenderConfig,
    methods: &[Mode],
    spp_list: &[u32],
    seeds: &[u64],
    reference: &Image,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for &method in methods {
        for &spp in spp_list {
            for &seed in seeds {
                let cfg = RenderConfig { mode: method, spp, seed, dump_records: None, residual_csv: None, ..base.clone() };
                let start = Instant::now();
                let out = render(scene, &cfg)?;
                let wall_seconds = start.elapsed().as_secs_f64();
                rows.push(ConvergenceRow { method, spp, seed, mse: compute_mse(&out.image, reference)?, wall_seconds });
            }
        }
    }
    Ok(rows)
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Pt => "pt",
        Mode::Pg => "pg",
        Mode::Reference => "reference",
    }
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("method,spp,seed,mse,wall_seconds\n");
    for r in rows {
        writeln!(s, "{},{},{},{:e},{:.6}", mode_name(r.method), r.spp, r.seed, r.mse, r.wall_seconds).unwrap();
    }
    s
}

/// Least-squares slope of log(mean MSE) against log(spp) for one method.
pub fn convergence_slope(rows: &[ConvergenceRow], method: Mode) -> Option<f64> {
    let mut spps: Vec<u32> = rows.iter().filter(|r| r.method == method).map(|r| r.spp).collect();
    spps.sort_unstable();
    spps.dedup();
    if spps.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = spps
        .iter()
        .map(|&spp| {
            let v: Vec<f64> = rows.iter().filter(|r| r.method == method && r.spp == spp).map(|r| r.mse).collect();
            ((spp as f64).ln(), (v.iter().sum::<f64>() / v.len() as f64).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone)]
pub struct IterationSnapshot {
    pub iterations: u32,
    pub image: Image,
    pub mse: f64,
    /// Residual of the last iteration run; `None` at zero iterations.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct IterationStudy {
    pub snapshots: Vec<IterationSnapshot>,
    /// Every residual up to the largest requested count.
    pub residuals: Vec<f64>,
}

/// Traces once and records the image after each requested iteration count.
/// The tolerance is ignored so every count is reached exactly.
pub fn run_iteration_study(scene: &Scene, config: &RenderConfig, counts: &[u32], reference: &Image) -> Result<IterationStudy> {
    config.validate()?;
    if counts.is_empty() {
        return Err(Error::Config("iteration list is empty".into()));
    }
    let set = trace_records(scene, config)?;
    let mut graph = PathGraph::from_set(&set);
    graph.assign_clusters(config.cluster_size, config.seed);
    let mode = if config.aggregate_direct { DirectMode::Aggregated } else { DirectMode::PathTraced };

    let mut order: Vec<u32> = counts.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut solver = Solver::new(&graph);
    let mut images = Vec::with_capacity(order.len());
    for &n in &order {
        while solver.iteration() < n {
            solver.step();
            if solver.diverging(0.0) {
                return Err(Error::Divergence(format!("residuals {:?}", solver.residuals())));
            }
        }
        images.push((n, solver.splat(mode), solver.residuals().last().copied()));
    }
    let mut snapshots = Vec::with_capacity(counts.len());
    for &n in counts {
        let (_, image, residual) = images.iter().find(|e| e.0 == n).unwrap();
        snapshots.push(IterationSnapshot { iterations: n, mse: compute_mse(image, reference)?, image: image.clone(), residual: *residual });
    }
    Ok(IterationStudy { snapshots, residuals: solver.residuals().to_vec() })
}

pub fn iteration_csv(study: &IterationStudy) -> String {
    let mut s = String::from("iterations,mse,residual\n");
    for snap in &study.snapshots {
        let r = snap.residual.map(|r| format!("{r:e}")).unwrap_or_default();
        writeln!(s, "{},{:e},{}", snap.iterations, snap.mse, r).unwrap();
    }
    s
}

/// Writes `iter-<n>.pfm` for each snapshot plus `iterations.csv` (one row
/// per image) and `residuals.csv` (one row per iteration run).
pub fn write_iteration_study(study: &IterationStudy, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for snap in &study.snapshots {
        snap.image.write_pfm(&dir.join(format!("iter-{}.pfm", snap.iterations)))?;
    }
    let csv = dir.join("iterations.csv");
    std::fs::write(&csv, iteration_csv(study)).map_err(|e| Error::io(&csv, e))?;
    let res = dir.join("residuals.csv");
    std::fs::write(&res, residual_csv(&study.residuals)).map_err(|e| Error::io(&res, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;
    use crate::transport::{render_pt, RenderSettings};

    fn reference(scene: &Scene) -> Image {
        render_pt(scene, &RenderSettings { spp: 64, seed: 1000, keep_records: false, trace: Default::default() })
            .unwrap()
            .image
    }

    #[test]
    fn convergence_rows_cover_the_grid() {
        let scene = presets::fogbox(8, 8);
        let r = reference(&scene);
        let base = RenderConfig { cluster_size: 4, ..Default::default() };
        let rows = run_convergence(&scene, &base, &[Mode::Pt, Mode::Pg], &[1, 2], &[0, 1, 2], &r).unwrap();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.mse.is_finite() && r.mse >= 0.0 && r.wall_seconds >= 0.0));
        let csv = convergence_csv(&rows);
        assert_eq!(csv.lines().count(), 13);
        assert_eq!(csv.lines().next(), Some("method,spp,seed,mse,wall_seconds"));
        assert!(csv.lines().nth(1).unwrap().starts_with("pt,1,0,"));
    }

    #[test]
    fn slope_of_an_exact_power_law() {
        let rows: Vec<ConvergenceRow> = [1u32, 4, 16, 64]
            .iter()
            .map(|&spp| ConvergenceRow { method: Mode::Pt, spp, seed: 0, mse: 3.0 / spp as f64, wall_seconds: 0.0 })
            .collect();
        assert!((convergence_slope(&rows, Mode::Pt).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(convergence_slope(&rows, Mode::Pg), None);
    }

    #[test]
    fn iteration_zero_is_the_path_traced_image() {
        let scene = presets::fogbox(10, 8);
        let r = reference(&scene);
        let cfg = RenderConfig { mode: Mode::Pg, seed: 3, cluster_size: 8, ..Default::default() };
        let study = run_iteration_study(&scene, &cfg, &[0, 2, 1], &r).unwrap();
        let pt = render_pt(&scene, &RenderSettings { spp: 1, seed: 3, keep_records: false, trace: cfg.trace }).unwrap();
        assert_eq!(study.snapshots[0].image, pt.image);
        assert_eq!(study.snapshots.iter().map(|s| s.iterations).collect::<Vec<_>>(), vec![0, 2, 1]);
        assert_eq!(study.residuals.len(), 2);
        assert_eq!(study.snapshots[1].residual, Some(study.residuals[1]));
        assert_eq!(study.snapshots[0].residual, None);
    }

    #[test]
    fn study_matches_a_direct_solve() {
        let scene = presets::gridpuff(10, 8);
        let r = reference(&scene);
        let cfg = RenderConfig { mode: Mode::Pg, seed: 5, cluster_size: 8, iterations: 4, tol: 0.0, ..Default::default() };
        let study = run_iteration_study(&scene, &cfg, &[4], &r).unwrap();
        let direct = render(&scene, &cfg).unwrap();
        assert_eq!(study.snapshots[0].image, direct.image);
        assert_eq!(study.residuals, direct.residuals);
    }

    #[test]
    fn written_outputs_pair_with_images() {
        let scene = presets::fogbox(6, 6);
        let r = reference(&scene);
        let cfg = RenderConfig { mode: Mode::Pg, cluster_size: 4, ..Default::default() };
        let study = run_iteration_study(&scene, &cfg, &[0, 1, 3], &r).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_iteration_study(&study, dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("iterations.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 3);
        for n in [0, 1, 3] {
            assert!(dir.path().join(format!("iter-{n}.pfm")).exists());
        }
        let res = std::fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
        assert_eq!(res.lines().count(), 1 + 3);
    }

    #[test]
    fn empty_list_is_rejected() {
        let scene = presets::fogbox(4, 4);
        assert!(run_iteration_study(&scene, &RenderConfig::default(), &[], &reference(&scene)).is_err());
    }
}
