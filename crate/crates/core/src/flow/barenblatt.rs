//! Self-similar source solution of `∂_t ρ = (1/m) ∂_xx(ρ^m)` for `m > 1`.
//!
//! With `u(τ, x) = τ^{-α} (C - k x² τ^{-2α})_+^{1/(m-1)}`, `α = 1/(m+1)` and
//! `k = (m-1)/(2m(m+1))`, `u` solves `u_τ = (u^m)_xx`, so
//! `ρ(t, x) = u(t/m, x - x0)`. `C` is fixed by the mass.

use crate::domain::Domain1D;
use crate::error::{invalid, Result};
use crate::measures::GridMeasure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    m: f64,
    c: f64,
    center: f64,
}

impl Barenblatt {
    pub fn new(m: f64, mass: f64, center: f64) -> Result<Self> {
        if !(m > 1.0 && m.is_finite()) {
            return Err(invalid(format!("source solution needs m > 1, got {m}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid(format!("mass {mass} must be positive")));
        }
        let p = 1.0 / (m - 1.0);
        let k = Self::k_of(m);
        // mass = C^{p + 1/2} k^{-1/2} ∫_{-1}^{1} (1 - z²)^p dz
        let c = (mass * k.sqrt() / unit_profile_mass(p)).powf(1.0 / (p + 0.5));
        Ok(Self { m, c, center })
    }

    fn k_of(m: f64) -> f64 {
        (m - 1.0) / (2.0 * m * (m + 1.0))
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// The constant `C` of the profile.
    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn density(&self, t: f64, x: f64) -> f64 {
        let tau = t / self.m;
        let alpha = 1.0 / (self.m + 1.0);
        let y = (x - self.center) * tau.powf(-alpha);
        let inner = self.c - Self::k_of(self.m) * y * y;
        if inner <= 0.0 {
            return 0.0;
        }
        tau.powf(-alpha) * inner.powf(1.0 / (self.m - 1.0))
    }

    /// Half-width of the support at time `t`.
    pub fn support_radius(&self, t: f64) -> f64 {
        let tau = t / self.m;
        (self.c / Self::k_of(self.m)).sqrt() * tau.powf(1.0 / (self.m + 1.0))
    }

    /// Cell averages of the profile, normalized to unit mass on `d`.
    pub fn sample(&self, d: &Domain1D, t: f64) -> Result<GridMeasure> {
        if !d.is_flat() {
            return Err(invalid("the source solution lives on an unweighted line"));
        }
        let h = d.h();
        let sub = 16;
        let rho = d
            .nodes()
            .iter()
            .map(|&x| {
                (0..sub)
                    .map(|s| self.density(t, x - 0.5 * h + (s as f64 + 0.5) * h / sub as f64))
                    .sum::<f64>()
                    / sub as f64
            })
            .collect();
        GridMeasure::from_unnormalized(d, rho)
    }
}

/// `∫_{-1}^{1} (1 - z²)^p dz`, via `z = sin θ` and composite Simpson.
fn unit_profile_mass(p: f64) -> f64 {
    let n = 4096;
    let h = std::f64::consts::PI / n as f64;
    let f = |k: usize| {
        let th = -std::f64::consts::FRAC_PI_2 + k as f64 * h;
        th.cos().max(0.0).powf(2.0 * p + 1.0)
    };
    let mut s = f(0) + f(n);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_pressure_constant() {
        // m = 2: C^{3/2} sqrt(12) (4/3) = 1.
        let b = Barenblatt::new(2.0, 1.0, 0.0).unwrap();
        let expected = (3.0 / (4.0 * 12f64.sqrt())).powf(2.0 / 3.0);
        assert!((b.constant() - expected).abs() < 1e-10);
    }

    #[test]
    fn profile_has_unit_mass() {
        for m in [1.5, 2.0, 3.0] {
            let b = Barenblatt::new(m, 1.0, 0.3).unwrap();
            let r = b.support_radius(0.7);
            let n = 20000;
            let h = 2.0 * r / n as f64;
            let mass: f64 = (0..n)
                .map(|i| b.density(0.7, 0.3 - r + (i as f64 + 0.5) * h))
                .sum::<f64>()
                * h;
            assert!((mass - 1.0).abs() < 1e-6, "m = {m}: {mass}");
        }
    }

    #[test]
    fn satisfies_equation_pointwise() {
        let m = 2.0;
        let b = Barenblatt::new(m, 1.0, 0.0).unwrap();
        let (t, x, e) = (0.5, 0.2, 1e-4);
        let rt = (b.density(t + e, x) - b.density(t - e, x)) / (2.0 * e);
        let pm = |x: f64| b.density(t, x).powf(m);
        let lap = (pm(x + e) - 2.0 * pm(x) + pm(x - e)) / (e * e);
        assert!((rt - lap / m).abs() < 1e-4 * (1.0 + rt.abs()), "{rt} vs {}", lap / m);
    }
}
