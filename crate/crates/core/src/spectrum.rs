use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, MulAssign, Sub};

/// RGB radiometric triple. Depending on context this holds radiance,
/// scattered radiance per unit length, a coefficient, or a transmittance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spectrum(pub [f64; 3]);

impl Spectrum {
    pub const ZERO: Spectrum = Spectrum([0.0; 3]);
    pub const ONE: Spectrum = Spectrum([1.0; 3]);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Spectrum([r, g, b])
    }

    pub const fn splat(v: f64) -> Self {
        Spectrum([v; 3])
    }

    pub fn mean(&self) -> f64 {
        (self.0[0] + self.0[1] + self.0[2]) / 3.0
    }

    pub fn max_channel(&self) -> f64 {
        self.0[0].max(self.0[1]).max(self.0[2])
    }

    pub fn is_black(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// True when every channel is finite and non-negative.
    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&c| c.is_finite() && c >= 0.0)
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Spectrum {
        Spectrum([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }

    pub fn exp_neg(self) -> Spectrum {
        self.map(|c| (-c).exp())
    }

    /// Channel-wise division that maps `x / 0` to 0.
    pub fn safe_div(self, o: Spectrum) -> Spectrum {
        let mut out = [0.0; 3];
        for (i, v) in out.iter_mut().enumerate() {
            if o.0[i] != 0.0 {
                *v = self.0[i] / o.0[i];
            }
        }
        Spectrum(out)
    }

    pub fn abs_diff(self, o: Spectrum) -> Spectrum {
        Spectrum([
            (self.0[0] - o.0[0]).abs(),
            (self.0[1] - o.0[1]).abs(),
            (self.0[2] - o.0[2]).abs(),
        ])
    }
}

impl Add for Spectrum {
    type Output = Spectrum;
    fn add(self, o: Spectrum) -> Spectrum {
        Spectrum([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Spectrum {
    fn add_assign(&mut self, o: Spectrum) {
        *self = *self + o;
    }
}

impl Sub for Spectrum {
    type Output = Spectrum;
    fn sub(self, o: Spectrum) -> Spectrum {
        Spectrum([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul for Spectrum {
    type Output = Spectrum;
    fn mul(self, o: Spectrum) -> Spectrum {
        Spectrum([self.0[0] * o.0[0], self.0[1] * o.0[1], self.0[2] * o.0[2]])
    }
}

impl MulAssign for Spectrum {
    fn mul_assign(&mut self, o: Spectrum) {
        *self = *self * o;
    }
}

impl Mul<f64> for Spectrum {
    type Output = Spectrum;
    fn mul(self, s: f64) -> Spectrum {
        Spectrum([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl MulAssign<f64> for Spectrum {
    fn mul_assign(&mut self, s: f64) {
        *self = *self * s;
    }
}

impl Div<f64> for Spectrum {
    type Output = Spectrum;
    fn div(self, s: f64) -> Spectrum {
        Spectrum([self.0[0] / s, self.0[1] / s, self.0[2] / s])
    }
}

impl Index<usize> for Spectrum {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Spectrum {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl std::iter::Sum for Spectrum {
    fn sum<I: Iterator<Item = Spectrum>>(iter: I) -> Spectrum {
        iter.fold(Spectrum::ZERO, |a, b| a + b)
    }
}
