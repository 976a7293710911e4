//! Fixed-point refinement of incoming indirect radiance.
//!
//! One iteration aggregates incoming radiance within clusters, adds the
//! aggregated direct radiance, and carries the result one edge toward the
//! camera: I ← P(A⁺ I + Aᵒ D). Aᵒ D is computed once.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::pathgraph::aggregate::{aggregate_direct, aggregate_indirect, compute_marginals, Marginals};
use crate::pathgraph::graph::{PathGraph, NO_EDGE};
use crate::spectrum::Spectrum;

/// Residuals this small are rounding noise and never count as divergence.
const NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Upper bound on iterations; 0 keeps the tracer's estimates.
    pub iterations: u32,
    /// Stop once the relative change drops below this value.
    pub tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { iterations: 10, tol: 1e-3 }
    }
}

/// Which direct radiance the output uses at the first vertex of each path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectMode {
    /// The tracer's own estimate, or the averaged extra samples when recorded.
    #[default]
    PathTraced,
    /// The cluster-aggregated estimate.
    Aggregated,
}

/// I_new[q] = w_cont(next) ⊙ L̄[next] along every edge; records without a
/// successor keep their initial value.
pub fn propagate(graph: &PathGraph, scattered: &[Spectrum]) -> Vec<Spectrum> {
    assert_eq!(scattered.len(), graph.len());
    (0..graph.len())
        .into_par_iter()
        .map(|q| match graph.next[q] {
            NO_EDGE => graph.indirect_init[q],
            s => graph.w_cont[s as usize] * scattered[s as usize],
        })
        .collect()
}

/// Largest per-channel ratio Σ|new − old| / Σ|new|.
pub fn relative_change(old: &[Spectrum], new: &[Spectrum]) -> f64 {
    let mut diff = [0.0f64; 3];
    let mut norm = [0.0f64; 3];
    for (a, b) in old.iter().zip(new) {
        for c in 0..3 {
            diff[c] += (b[c] - a[c]).abs();
            norm[c] += b[c].abs();
        }
    }
    (0..3)
        .map(|c| {
            if diff[c] == 0.0 {
                0.0
            } else if norm[c] == 0.0 {
                f64::INFINITY
            } else {
                diff[c] / norm[c]
            }
        })
        .fold(0.0, f64::max)
}

/// Incremental solver; [`solve`] drives it to completion.
pub struct Solver<'g> {
    graph: &'g PathGraph,
    marginals: Marginals,
    /// Aᵒ D, fixed for the whole solve.
    direct: Vec<Spectrum>,
    incoming: Vec<Spectrum>,
    /// Scattered indirect radiance from the latest iteration.
    scattered_indirect: Vec<Spectrum>,
    residuals: Vec<f64>,
}

impl<'g> Solver<'g> {
    /// Starts from the tracer's incoming estimates; before any iteration the
    /// scattered indirect radiance is the tracer's single-sample value.
    pub fn new(graph: &'g PathGraph) -> Self {
        let marginals = compute_marginals(graph);
        let direct = aggregate_direct(graph, &marginals);
        let incoming = graph.indirect_init.clone();
        let scattered_indirect = (0..graph.len())
            .into_par_iter()
            .map(|q| graph.record(q).single_indirect(incoming[q]))
            .collect();
        Self { graph, marginals, direct, incoming, scattered_indirect, residuals: Vec::new() }
    }

    pub fn iteration(&self) -> u32 {
        self.residuals.len() as u32
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn incoming(&self) -> &[Spectrum] {
        &self.incoming
    }

    pub fn scattered_indirect(&self) -> &[Spectrum] {
        &self.scattered_indirect
    }

    pub fn aggregated_direct(&self) -> &[Spectrum] {
        &self.direct
    }

    pub fn marginals(&self) -> &Marginals {
        &self.marginals
    }

    /// Runs one iteration and returns its residual.
    pub fn step(&mut self) -> f64 {
        let scattered_indirect = aggregate_indirect(self.graph, &self.marginals, &self.incoming);
        let total: Vec<Spectrum> = scattered_indirect.iter().zip(&self.direct).map(|(&i, &d)| i + d).collect();
        let incoming = propagate(self.graph, &total);
        let r = relative_change(&self.incoming, &incoming);
        self.incoming = incoming;
        self.scattered_indirect = scattered_indirect;
        self.residuals.push(r);
        r
    }

    /// True when the last three residuals each grew and are above `tol`.
    pub fn diverging(&self, tol: f64) -> bool {
        let r = &self.residuals;
        let n = r.len();
        n >= 4 && r[n - 3] > r[n - 4] && r[n - 2] > r[n - 3] && r[n - 1] > r[n - 2] && r[n - 1] > tol.max(NOISE_FLOOR)
    }

    /// Per-path camera radiance averaged into pixels.
    pub fn splat(&self, mode: DirectMode) -> Image {
        splat_output(self.graph, &self.scattered_indirect, &self.direct, mode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub incoming: Vec<Spectrum>,
    pub scattered_indirect: Vec<Spectrum>,
    pub direct: Vec<Spectrum>,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl Solution {
    pub fn iterations(&self) -> u32 {
        self.residuals.len() as u32
    }
}

/// Iterates until the residual falls below `tol` or `iterations` is reached.
/// Fails if the residual grows three iterations in a row.
pub fn solve(graph: &PathGraph, config: &SolveConfig) -> Result<Solution> {
    let mut solver = Solver::new(graph);
    let mut converged = config.iterations == 0;
    while solver.iteration() < config.iterations {
        let r = solver.step();
        if solver.diverging(config.tol) {
            return Err(Error::Divergence(format!(
                "residual rose three iterations in a row to {r:.3e} (history {:?})",
                solver.residuals()
            )));
        }
        if r < config.tol {
            converged = true;
            break;
        }
    }
    Ok(Solution {
        incoming: solver.incoming,
        scattered_indirect: solver.scattered_indirect,
        direct: solver.direct,
        residuals: solver.residuals,
        converged,
    })
}

/// Camera radiance of every path: emission + w_0 ⊙ (direct + Ī(x_0)),
/// averaged per pixel.
pub fn splat_output(graph: &PathGraph, scattered_indirect: &[Spectrum], direct: &[Spectrum], mode: DirectMode) -> Image {
    let (w, h) = (graph.width, graph.height);
    let mut sums = vec![Spectrum::ZERO; w * h];
    let mut counts = vec![0u32; w * h];
    for p in &graph.paths {
        let mut v = p.emission;
        if p.first != NO_EDGE {
            let q = p.first as usize;
            let d = match mode {
                DirectMode::Aggregated => direct[q],
                DirectMode::PathTraced => p.first_bounce_direct.unwrap_or_else(|| graph.pt_direct(q)),
            };
            v += p.camera_weight * (d + scattered_indirect[q]);
        }
        sums[p.pixel as usize] += v;
        counts[p.pixel as usize] += 1;
    }
    let values: Vec<Spectrum> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { *s / c as f64 } else { Spectrum::ZERO })
        .collect();
    Image::from_spectra(w, h, &values)
}

impl Solution {
    pub fn splat(&self, graph: &PathGraph, mode: DirectMode) -> Image {
        splat_output(graph, &self.scattered_indirect, &self.direct, mode)
    }
}
