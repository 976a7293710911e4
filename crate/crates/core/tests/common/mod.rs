//! Dense reference implementation of one refinement step, written from the
//! definitions with plain loops and no calls into the aggregation code.

#![allow(dead_code)]

use volpg::math::Vec3;
use volpg::pathgraph::{PathGraph, NO_EDGE};
use volpg::transport::ScatterKind;
use volpg::Spectrum;

pub fn hg(g: f64, cos: f64) -> f64 {
    let d = 1.0 + g * g - 2.0 * g * cos.clamp(-1.0, 1.0);
    (1.0 - g * g) / (4.0 * std::f64::consts::PI * d * d.sqrt())
}

/// Directional part of the scattering function at a vertex whose `wo`
/// points back along the incoming ray.
pub fn directional(kind: &ScatterKind, wo: Vec3, w: Vec3) -> f64 {
    match kind {
        ScatterKind::Volume { phase, .. } => hg(phase.g, -(wo.x * w.x + wo.y * w.y + wo.z * w.z)),
        ScatterKind::Surface { normal, .. } => {
            let c = normal.x * w.x + normal.y * w.y + normal.z * w.z;
            if c > 0.0 {
                c / std::f64::consts::PI
            } else {
                0.0
            }
        }
    }
}

pub fn coefficient(kind: &ScatterKind) -> Spectrum {
    match kind {
        ScatterKind::Volume { sigma_s, .. } => *sigma_s,
        ScatterKind::Surface { albedo, .. } => *albedo,
    }
}

fn usable(p: f64) -> bool {
    p > 0.0 && p.is_finite()
}

fn members_of(graph: &PathGraph, i: usize) -> Vec<usize> {
    let c = graph.cluster_of[i] as usize;
    graph.clusters[c].members.iter().map(|&m| m as usize).collect()
}

/// Row-major square matrix per colour channel.
pub struct Dense {
    pub n: usize,
    pub data: [Vec<f64>; 3],
}

impl Dense {
    fn zeros(n: usize, m: usize) -> Self {
        Dense { n, data: [vec![0.0; n * m], vec![0.0; n * m], vec![0.0; n * m]] }
    }
}

pub struct DenseSystem {
    /// P A⁺, N × N.
    pub pa_plus: Dense,
    /// P Aᵒ, N × 2N over interleaved (emitter, local) light samples.
    pub pa_direct: Dense,
    /// Constant incoming value of records without a successor.
    pub terminal: Vec<Spectrum>,
    pub light: Vec<Spectrum>,
}

pub fn dense_system(graph: &PathGraph) -> DenseSystem {
    let n = graph.len();
    let mut a_plus = Dense::zeros(n, n);
    let mut a_dir = Dense::zeros(n, 2 * n);
    for i in 0..n {
        let members = members_of(graph, i);
        let k = members.len() as f64;
        let (ki, woi) = (&graph.kind[i], graph.wo[i]);
        let ci = coefficient(ki);
        for &j in &members {
            // Local-strategy sample of j, indirect and direct forms.
            let w = graph.phase_dir[j];
            let mut sum = 0.0;
            for &l in &members {
                sum += directional(&graph.kind[l], graph.wo[l], w);
            }
            let f = directional(ki, woi, w);
            let direct_phase = sum + k * graph.phase_emitter_pdf[j];
            for c in 0..3 {
                if usable(sum) {
                    a_plus.data[c][i * n + j] = ci[c] * f / sum;
                }
                if usable(direct_phase) {
                    a_dir.data[c][i * 2 * n + 2 * j + 1] = ci[c] * f / direct_phase;
                }
            }
            // Emitter sample of j.
            let we = graph.emitter_dir[j];
            let marginal = if graph.emitter_delta[j] {
                k
            } else {
                let mut s = 0.0;
                for &l in &members {
                    s += directional(&graph.kind[l], graph.wo[l], we);
                }
                s + k * graph.emitter_pdf[j]
            };
            let fe = directional(ki, woi, we);
            for c in 0..3 {
                if usable(marginal) {
                    a_dir.data[c][i * 2 * n + 2 * j] = ci[c] * fe / marginal;
                }
            }
        }
    }

    // Left-multiply by P: row q takes row next(q) scaled by w_cont(next(q)).
    let mut pa_plus = Dense::zeros(n, n);
    let mut pa_direct = Dense::zeros(n, 2 * n);
    let mut terminal = vec![Spectrum::ZERO; n];
    for q in 0..n {
        let s = graph.next[q];
        if s == NO_EDGE {
            terminal[q] = graph.indirect_init[q];
            continue;
        }
        let s = s as usize;
        for c in 0..3 {
            let w = graph.w_cont[s][c];
            for j in 0..n {
                pa_plus.data[c][q * n + j] = w * a_plus.data[c][s * n + j];
            }
            for j in 0..2 * n {
                pa_direct.data[c][q * 2 * n + j] = w * a_dir.data[c][s * 2 * n + j];
            }
        }
    }
    let mut light = Vec::with_capacity(2 * n);
    for q in 0..n {
        light.push(graph.direct_emitter[q]);
        light.push(graph.direct_phase[q]);
    }
    DenseSystem { pa_plus, pa_direct, terminal, light }
}

impl DenseSystem {
    pub fn direct_term(&self) -> Vec<Spectrum> {
        let n = self.pa_plus.n;
        (0..n)
            .map(|q| {
                let mut v = [0.0; 3];
                for (c, vc) in v.iter_mut().enumerate() {
                    for j in 0..2 * n {
                        *vc += self.pa_direct.data[c][q * 2 * n + j] * self.light[j][c];
                    }
                }
                Spectrum::new(v[0], v[1], v[2]) + self.terminal[q]
            })
            .collect()
    }

    /// One dense fixed-point step: P A⁺ I + P Aᵒ D (+ terminal values).
    pub fn step(&self, incoming: &[Spectrum], direct_term: &[Spectrum]) -> Vec<Spectrum> {
        let n = self.pa_plus.n;
        (0..n)
            .map(|q| {
                let mut v = [0.0; 3];
                for (c, vc) in v.iter_mut().enumerate() {
                    for j in 0..n {
                        *vc += self.pa_plus.data[c][q * n + j] * incoming[j][c];
                    }
                }
                Spectrum::new(v[0], v[1], v[2]) + direct_term[q]
            })
            .collect()
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

/// Balance-heuristic weights at each record's sample summed over its
/// cluster's strategies, using the implementation's marginals. Returns the
/// largest deviation from one over (indirect, local direct, emitter direct)
/// samples and the number of samples checked.
pub fn partition_deviation(graph: &PathGraph, m: &volpg::pathgraph::Marginals) -> (f64, f64, f64, usize) {
    let (mut di, mut dp, mut de) = (0.0f64, 0.0f64, 0.0f64);
    for j in 0..graph.len() {
        let members = members_of(graph, j);
        let k = members.len() as f64;
        let local = |w: Vec3| members.iter().map(|&l| directional(&graph.kind[l], graph.wo[l], w)).sum::<f64>();
        if m.indirect[j] > 0.0 {
            di = di.max((local(graph.phase_dir[j]) / m.indirect[j] - 1.0).abs());
        }
        if m.direct_phase[j] > 0.0 {
            let s = (local(graph.phase_dir[j]) + k * graph.phase_emitter_pdf[j]) / m.direct_phase[j];
            dp = dp.max((s - 1.0).abs());
        }
        if !graph.emitter_delta[j] && m.direct_emitter[j] > 0.0 {
            let s = (local(graph.emitter_dir[j]) + k * graph.emitter_pdf[j]) / m.direct_emitter[j];
            de = de.max((s - 1.0).abs());
        }
    }
    (di, dp, de, graph.len())
}
