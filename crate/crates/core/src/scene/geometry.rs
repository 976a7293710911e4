use crate::math::{Aabb, Ray, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub origin: Vec3,
    pub edge_u: Vec3,
    pub edge_v: Vec3,
}

impl Quad {
    pub fn new(origin: Vec3, edge_u: Vec3, edge_v: Vec3) -> Self {
        Self { origin, edge_u, edge_v }
    }

    /// Unit normal along `edge_u × edge_v`; area lights emit on this side.
    pub fn normal(&self) -> Vec3 {
        self.edge_u.cross(self.edge_v).normalized()
    }

    pub fn area(&self) -> f64 {
        self.edge_u.cross(self.edge_v).length()
    }

    pub fn point_at(&self, a: f64, b: f64) -> Vec3 {
        self.origin + self.edge_u * a + self.edge_v * b
    }

    pub fn intersect(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<f64> {
        let n = self.edge_u.cross(self.edge_v);
        let denom = n.dot(ray.dir);
        if denom == 0.0 {
            return None;
        }
        let t = n.dot(self.origin - ray.origin) / denom;
        if !(t > t_min && t < t_max) {
            return None;
        }
        let w = ray.at(t) - self.origin;
        let nn = n.length_squared();
        let a = n.dot(w.cross(self.edge_v)) / nn;
        let b = n.dot(self.edge_u.cross(w)) / nn;
        ((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b)).then_some(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere { center: Vec3, radius: f64 },
    Box(Aabb),
    Quad(Quad),
}

impl Shape {
    /// Nearest intersection in `(t_min, t_max)` with the outward (for quads:
    /// `edge_u × edge_v`) geometric normal.
    pub fn intersect(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<(f64, Vec3)> {
        match *self {
            Shape::Sphere { center, radius } => {
                let oc = ray.origin - center;
                let b = oc.dot(ray.dir);
                let c = oc.length_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let t = [-b - sq, -b + sq].into_iter().find(|&t| t > t_min && t < t_max)?;
                Some((t, (ray.at(t) - center) / radius))
            }
            Shape::Box(bounds) => {
                let (t0, t1) = bounds.clip(ray, f64::NEG_INFINITY, f64::INFINITY)?;
                let t = [t0, t1].into_iter().find(|&t| t > t_min && t < t_max)?;
                let p = ray.at(t);
                let mut best = (f64::INFINITY, Vec3::ZERO);
                for axis in 0..3 {
                    let mut n = [0.0; 3];
                    let d_lo = (p[axis] - bounds.min[axis]).abs();
                    let d_hi = (p[axis] - bounds.max[axis]).abs();
                    if d_lo < best.0 {
                        n[axis] = -1.0;
                        best = (d_lo, Vec3::from_array(n));
                    }
                    if d_hi < best.0 {
                        n[axis] = 1.0;
                        best = (d_hi, Vec3::from_array(n));
                    }
                }
                Some((t, best.1))
            }
            Shape::Quad(q) => q.intersect(ray, t_min, t_max).map(|t| (t, q.normal())),
        }
    }
}
