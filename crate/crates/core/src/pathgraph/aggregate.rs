//! Multiple-importance aggregation of radiance samples within clusters.
//!
//! Every member of a cluster contributed one local-strategy sample and one
//! emitter sample. Each member re-estimates its scattered radiance from all
//! samples of its cluster, weighting each by the balance heuristic over the
//! cluster's strategies, which reduces to dividing by the marginal density.

use rayon::prelude::*;

use crate::pathgraph::graph::PathGraph;
use crate::spectrum::Spectrum;

/// Marginal densities of every record's two samples over its cluster's strategies.
/// Zero marks an excluded sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    /// Σ_l p_l(ω_q) over members l, for the local-strategy sample ω_q.
    pub indirect: Vec<f64>,
    /// Σ_l p_l(ω_q) + K·p_E(ω_q).
    pub direct_phase: Vec<f64>,
    /// Σ_l p_l(ω^e_q) + K·p_E(ω^e_q); K for delta-emitter samples.
    pub direct_emitter: Vec<f64>,
}

fn retained(p: f64) -> f64 {
    if p > 0.0 && p.is_finite() {
        p
    } else {
        0.0
    }
}

/// Runs `f` on every cluster in parallel and scatters the per-member results.
fn per_cluster<T: Copy + Default + Send>(graph: &PathGraph, f: impl Fn(&[u32]) -> Vec<T> + Sync) -> Vec<T> {
    let parts: Vec<Vec<T>> = graph.clusters.par_iter().map(|c| f(&c.members)).collect();
    let mut out = vec![T::default(); graph.len()];
    for (c, vals) in graph.clusters.iter().zip(parts) {
        for (&m, v) in c.members.iter().zip(vals) {
            out[m as usize] = v;
        }
    }
    out
}

pub fn compute_marginals(graph: &PathGraph) -> Marginals {
    let triples = per_cluster(graph, |members| {
        let k = members.len() as f64;
        let strategy_sum = |w| -> f64 {
            members
                .iter()
                .map(|&l| graph.kind[l as usize].pdf(graph.wo[l as usize], w))
                .sum()
        };
        members
            .iter()
            .map(|&j| {
                let j = j as usize;
                let local = strategy_sum(graph.phase_dir[j]);
                let ind = retained(local);
                let dir_phase = retained(local + k * graph.phase_emitter_pdf[j]);
                let dir_em = if graph.emitter_delta[j] {
                    k
                } else {
                    retained(strategy_sum(graph.emitter_dir[j]) + k * graph.emitter_pdf[j])
                };
                (ind, dir_phase, dir_em)
            })
            .collect()
    });
    Marginals {
        indirect: triples.iter().map(|t| t.0).collect(),
        direct_phase: triples.iter().map(|t| t.1).collect(),
        direct_emitter: triples.iter().map(|t| t.2).collect(),
    }
}

/// Ī(x, ω_x) = Σ_j f_s(x, ω_x, ω_j)/p̂(ω_j) · I(x_j, ω_j) over x's cluster.
pub fn aggregate_indirect(graph: &PathGraph, marginals: &Marginals, incoming: &[Spectrum]) -> Vec<Spectrum> {
    assert_eq!(incoming.len(), graph.len());
    per_cluster(graph, |members| {
        members
            .iter()
            .map(|&x| {
                let x = x as usize;
                let (kind, wo) = (graph.kind[x], graph.wo[x]);
                let mut sum = Spectrum::ZERO;
                for &j in members {
                    let j = j as usize;
                    let p = marginals.indirect[j];
                    if p > 0.0 && !incoming[j].is_black() {
                        sum += incoming[j] * (kind.eval_scalar(wo, graph.phase_dir[j]) / p);
                    }
                }
                kind.coeff() * sum
            })
            .collect()
    })
}

/// D̄(x, ω_x): the emitter and local-strategy direct samples of x's cluster,
/// each divided by its direct-form marginal.
pub fn aggregate_direct(graph: &PathGraph, marginals: &Marginals) -> Vec<Spectrum> {
    per_cluster(graph, |members| {
        members
            .iter()
            .map(|&x| {
                let x = x as usize;
                let (kind, wo) = (graph.kind[x], graph.wo[x]);
                let mut sum = Spectrum::ZERO;
                for &j in members {
                    let j = j as usize;
                    let pe = marginals.direct_emitter[j];
                    if pe > 0.0 && !graph.direct_emitter[j].is_black() {
                        sum += graph.direct_emitter[j] * (kind.eval_scalar(wo, graph.emitter_dir[j]) / pe);
                    }
                    let pp = marginals.direct_phase[j];
                    if pp > 0.0 && !graph.direct_phase[j].is_black() {
                        sum += graph.direct_phase[j] * (kind.eval_scalar(wo, graph.phase_dir[j]) / pp);
                    }
                }
                kind.coeff() * sum
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Vec3, INV_4PI};
    use crate::pathgraph::graph::Cluster;
    use crate::pathgraph::synthetic::{random_paths, SyntheticConfig};
    use crate::scene::PhaseHG;
    use crate::transport::{ScatterKind, ShadingPointRecord};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synthetic_graph(seed: u64, k: usize) -> PathGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = SyntheticConfig::default();
        let paths = random_paths(&cfg, &mut rng);
        let mut g = PathGraph::from_paths(cfg.width, cfg.height, cfg.spp, &paths);
        g.assign_clusters(k, seed);
        g
    }

    fn close(a: Spectrum, b: Spectrum, rel: f64) -> bool {
        (0..3).all(|c| (a[c] - b[c]).abs() <= rel * a[c].abs().max(b[c].abs()).max(1e-300))
    }

    #[test]
    fn singleton_clusters_reduce_to_path_tracing() {
        let g = synthetic_graph(1, 1);
        let m = compute_marginals(&g);
        for q in 0..g.len() {
            assert_eq!(m.indirect[q], g.phase_pdf[q]);
        }
        let ind = aggregate_indirect(&g, &m, &g.indirect_init);
        let dir = aggregate_direct(&g, &m);
        for q in 0..g.len() {
            let r = g.record(q);
            assert!(close(ind[q], r.single_indirect(r.indirect), 1e-12));
            assert!(close(dir[q], r.mis_direct(), 1e-12));
        }
    }

    fn isotropic_record(position: Vec3, wo: Vec3, dir: Vec3) -> ShadingPointRecord {
        ShadingPointRecord {
            position,
            wo,
            kind: ScatterKind::Volume { medium: 0, sigma_s: Spectrum::splat(0.5), phase: PhaseHG::isotropic() },
            phase_dir: dir,
            phase_pdf: INV_4PI,
            phase_emitter_pdf: 0.0,
            emitter_dir: dir,
            emitter_pdf: 2.0,
            emitter_delta: false,
            direct_emitter: Spectrum::ZERO,
            direct_phase: Spectrum::ZERO,
            indirect: Spectrum::ZERO,
            w_cont: Spectrum::ONE,
            path: 0,
            depth: 0,
            pixel: 0,
        }
    }

    fn pair_graph(a: ShadingPointRecord, b: ShadingPointRecord) -> PathGraph {
        let path = |r: ShadingPointRecord| crate::transport::PathRecord {
            pixel: 0,
            sample: 0,
            emission: Spectrum::ZERO,
            camera_weight: Spectrum::ONE,
            records: vec![r],
            pt_estimate: Spectrum::ZERO,
            first_bounce_direct: None,
        };
        let mut g = PathGraph::from_paths(1, 1, 2, &[path(a), path(b)]);
        g.cluster_of = vec![0, 0];
        g.clusters = vec![Cluster { center: 0, members: vec![0, 1] }];
        g
    }

    #[test]
    fn identical_isotropic_pair() {
        let x = Vec3::new(0.1, 0.2, 0.3);
        let mut a = isotropic_record(x, Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0));
        let mut b = isotropic_record(x, Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 0.0));
        a.indirect = Spectrum::new(1.0, 2.0, 3.0);
        b.indirect = Spectrum::new(5.0, 0.0, 1.0);
        let g = pair_graph(a, b);
        let m = compute_marginals(&g);
        assert!((m.indirect[0] - 2.0 * INV_4PI).abs() < 1e-15);
        assert!((m.indirect[1] - 2.0 * INV_4PI).abs() < 1e-15);
        let ind = aggregate_indirect(&g, &m, &g.indirect_init);
        // Each member receives the average of the two single-sample estimates.
        let expected = (a.single_indirect(a.indirect) + b.single_indirect(b.indirect)) / 2.0;
        assert!(close(ind[0], expected, 1e-12));
        assert!(close(ind[1], expected, 1e-12));
    }

    #[test]
    fn zero_inputs_give_zero() {
        let mut g = synthetic_graph(2, 4);
        g.direct_emitter.iter_mut().for_each(|d| *d = Spectrum::ZERO);
        g.direct_phase.iter_mut().for_each(|d| *d = Spectrum::ZERO);
        let m = compute_marginals(&g);
        assert!(aggregate_direct(&g, &m).iter().all(|d| d.is_black()));
        let zeros = vec![Spectrum::ZERO; g.len()];
        assert!(aggregate_indirect(&g, &m, &zeros).iter().all(|d| d.is_black()));
    }

    #[test]
    fn marginals_match_quadratic_recomputation() {
        for k in [2, 3, 8] {
            let g = synthetic_graph(10 + k as u64, k);
            let m = compute_marginals(&g);
            for c in &g.clusters {
                let n = c.members.len() as f64;
                for &j in &c.members {
                    let j = j as usize;
                    let mut local = 0.0;
                    let mut local_e = 0.0;
                    for &l in &c.members {
                        let l = l as usize;
                        local += g.kind[l].pdf(g.wo[l], g.phase_dir[j]);
                        local_e += g.kind[l].pdf(g.wo[l], g.emitter_dir[j]);
                    }
                    let tol = |v: f64| 1e-12 * v.abs().max(1.0);
                    assert!((m.indirect[j] - local).abs() <= tol(local));
                    let dp = local + n * g.phase_emitter_pdf[j];
                    assert!((m.direct_phase[j] - dp).abs() <= tol(dp));
                    let de = if g.emitter_delta[j] { n } else { local_e + n * g.emitter_pdf[j] };
                    assert!((m.direct_emitter[j] - de).abs() <= tol(de));
                }
            }
        }
    }

    #[test]
    fn weights_partition_unity() {
        let g = synthetic_graph(3, 6);
        let m = compute_marginals(&g);
        for c in &g.clusters {
            let n = c.members.len() as f64;
            for &j in &c.members {
                let j = j as usize;
                if m.indirect[j] > 0.0 {
                    let s: f64 = c
                        .members
                        .iter()
                        .map(|&l| g.kind[l as usize].pdf(g.wo[l as usize], g.phase_dir[j]) / m.indirect[j])
                        .sum();
                    assert!((s - 1.0).abs() < 1e-12);
                }
                if m.direct_phase[j] > 0.0 {
                    let s: f64 = c
                        .members
                        .iter()
                        .map(|&l| g.kind[l as usize].pdf(g.wo[l as usize], g.phase_dir[j]) / m.direct_phase[j])
                        .sum::<f64>()
                        + n * g.phase_emitter_pdf[j] / m.direct_phase[j];
                    assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn excluded_samples_are_skipped() {
        let x = Vec3::new(0.0, 0.0, 0.0);
        let n = Vec3::new(0.0, 1.0, 0.0);
        let surface = |dir: Vec3| ShadingPointRecord {
            kind: ScatterKind::Surface { surface: 0, albedo: Spectrum::splat(0.5), normal: n },
            phase_pdf: 0.0,
            ..isotropic_record(x, n, dir)
        };
        // Both samples point below the horizon, so every density vanishes.
        let mut a = surface(Vec3::new(0.0, -1.0, 0.0));
        a.indirect = Spectrum::ONE;
        a.emitter_pdf = 0.0;
        a.direct_emitter = Spectrum::ONE;
        let g = pair_graph(a, a);
        let m = compute_marginals(&g);
        assert_eq!(m.indirect, vec![0.0, 0.0]);
        assert_eq!(m.direct_emitter, vec![0.0, 0.0]);
        let ind = aggregate_indirect(&g, &m, &g.indirect_init);
        assert!(ind.iter().all(|s| s.is_valid() && s.is_black()));
        assert!(aggregate_direct(&g, &m).iter().all(|s| s.is_valid() && s.is_black()));
    }
}
