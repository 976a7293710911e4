//! Henyey-Greenstein phase function.
//!
//! Directions follow the tracing convention: `wi` is the travel direction of
//! the ray arriving at the scattering point and `wo` the travel direction of
//! the scattered ray, so `g > 0` favours `wo ≈ wi` (forward scattering).

use rand::Rng;

use crate::math::{Vec3, INV_4PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseHG {
    pub g: f64,
}

impl PhaseHG {
    pub fn new(g: f64) -> Self {
        Self { g }
    }

    pub fn isotropic() -> Self {
        Self { g: 0.0 }
    }

    /// HG density for a given cosine between the travel directions.
    pub fn eval_cos(&self, cos_theta: f64) -> f64 {
        let g = self.g;
        let cos_theta = cos_theta.clamp(-1.0, 1.0);
        let denom = 1.0 + g * g - 2.0 * g * cos_theta;
        INV_4PI * (1.0 - g * g) / (denom * denom.sqrt())
    }

    pub fn eval(&self, wi: Vec3, wo: Vec3) -> f64 {
        self.eval_cos(wi.dot(wo))
    }

    /// Samples `wo` proportionally to the phase function. The returned pdf is
    /// computed by [`PhaseHG::eval`] on the returned pair.
    pub fn sample<R: Rng + ?Sized>(&self, wi: Vec3, rng: &mut R) -> (Vec3, f64) {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let g = self.g;
        let cos_theta = if g.abs() < 1e-3 {
            1.0 - 2.0 * u1
        } else {
            let sq = (1.0 - g * g) / (1.0 - g + 2.0 * g * u1);
            (1.0 + g * g - sq * sq) / (2.0 * g)
        }
        .clamp(-1.0, 1.0);
        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        let (s, t) = wi.orthonormal_basis();
        let wo = (s * (sin_theta * phi.cos()) + t * (sin_theta * phi.sin()) + wi * cos_theta)
            .normalized();
        (wo, self.eval(wi, wo))
    }
}

pub fn eval_phase(phase: &PhaseHG, wi: Vec3, wo: Vec3) -> f64 {
    phase.eval(wi, wo)
}

pub fn sample_phase<R: Rng + ?Sized>(phase: &PhaseHG, wi: Vec3, rng: &mut R) -> (Vec3, f64) {
    phase.sample(wi, rng)
}

/// Uniformly distributed direction on the unit sphere.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z = 1.0 - 2.0 * rng.gen::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn isotropic_value() {
        let p = PhaseHG::isotropic();
        let a = Vec3::new(0.0, 0.0, 1.0);
        let b = Vec3::new(0.6, 0.8, 0.0);
        assert!((p.eval(a, b) - 0.0795775).abs() < 1e-7);
        assert_eq!(p.eval(a, b), INV_4PI);
    }

    #[test]
    fn forward_peak_value() {
        let p = PhaseHG::new(0.5);
        let w = Vec3::new(0.0, 1.0, 0.0);
        assert!((p.eval(w, w) - 6.0 * INV_4PI).abs() < 1e-12);
        assert!((p.eval(w, w) - 0.477465).abs() < 1e-6);
    }

    #[test]
    fn normalization_by_uniform_sphere_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let wi = Vec3::new(0.0, 0.0, 1.0);
        for g in [-0.9, 0.0, 0.5, 0.9] {
            let p = PhaseHG::new(g);
            let n = 1_000_000;
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..n {
                let v = p.eval(wi, uniform_sphere(&mut rng)) * 4.0 * std::f64::consts::PI;
                sum += v;
                sum2 += v * v;
            }
            let mean = sum / n as f64;
            let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
            assert!((mean - 1.0).abs() <= 3.0 * se + 1e-12, "g={g}: {mean} ± {se}");
            if g.abs() <= 0.5 {
                assert!((mean - 1.0).abs() < 0.01, "g={g}: {mean}");
            }
        }
    }

    #[test]
    fn sample_pdf_matches_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in [-0.7, 0.0, 0.3, 0.8, 0.99] {
            let p = PhaseHG::new(g);
            let wi = Vec3::new(0.3, -0.4, 0.8).normalized();
            for _ in 0..1000 {
                let (wo, pdf) = p.sample(wi, &mut rng);
                assert!((wo.length() - 1.0).abs() < 1e-12);
                assert!((pdf - p.eval(wi, wo)).abs() <= 1e-12 * pdf.max(1.0));
                if g == 0.0 {
                    assert_eq!(pdf, INV_4PI);
                }
            }
        }
    }

    #[test]
    fn sampled_cosines_follow_density_chi_square() {
        let g = 0.8;
        let p = PhaseHG::new(g);
        let wi = Vec3::new(0.0, 0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bins = 40;
        let n = 100_000;
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let (wo, _) = p.sample(wi, &mut rng);
            let c = wo.dot(wi);
            let b = (((c + 1.0) / 2.0) * bins as f64).floor().clamp(0.0, (bins - 1) as f64);
            counts[b as usize] += 1;
        }
        // Expected bin mass: 2π ∫ eval_cos dcos over the bin, by Simpson quadrature.
        let mut chi2 = 0.0;
        for (b, &obs) in counts.iter().enumerate() {
            let lo = -1.0 + 2.0 * b as f64 / bins as f64;
            let hi = lo + 2.0 / bins as f64;
            let m = 200;
            let h = (hi - lo) / m as f64;
            let mut s = p.eval_cos(lo) + p.eval_cos(hi);
            for k in 1..m {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w * p.eval_cos(lo + k as f64 * h);
            }
            let mass = 2.0 * std::f64::consts::PI * s * h / 3.0;
            let expected = mass * n as f64;
            chi2 += (obs as f64 - expected).powi(2) / expected;
        }
        let dist = ChiSquared::new((bins - 1) as f64).unwrap();
        let p_value = 1.0 - dist.cdf(chi2);
        assert!(p_value > 0.01, "chi2={chi2} p={p_value}");
    }
}
