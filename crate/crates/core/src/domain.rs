//! Weighted one-dimensional model spaces and reference potentials.
//!
//! A [`Domain1D`] is a cell-centered uniform grid on a segment `[a, b]` or on
//! the circle `R / (b - a)Z`, carrying a weight `ψ` so that the reference
//! volume is `ω = e^{-ψ} dx`. A [`ReferencePotential`] fixes `Ψ` and the
//! reference density `σ = exp_m(-Ψ)` with respect to `ω`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interp::Cubic;
use crate::mcalc::MParam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Segment,
    Circle,
}

#[derive(Debug, Clone)]
pub struct Domain1D {
    kind: DomainKind,
    a: f64,
    b: f64,
    h: f64,
    x: Vec<f64>,
    psi: Vec<f64>,
    weight: Vec<f64>,
    psi_interp: Cubic,
}

impl Domain1D {
    pub fn new(kind: DomainKind, a: f64, b: f64, cells: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(invalid(format!("domain needs finite a < b, got [{a}, {b}]")));
        }
        if cells < 4 {
            return Err(invalid(format!("domain needs at least 4 cells, got {cells}")));
        }
        let h = (b - a) / cells as f64;
        let x = (0..cells).map(|i| a + (i as f64 + 0.5) * h).collect();
        let psi = vec![0.0; cells];
        let psi_interp = Cubic::new(a + 0.5 * h, h, psi.clone(), kind == DomainKind::Circle);
        Ok(Self {
            kind,
            a,
            b,
            h,
            x,
            weight: vec![1.0; cells],
            psi,
            psi_interp,
        })
    }

    pub fn segment(a: f64, b: f64, cells: usize) -> Result<Self> {
        Self::new(DomainKind::Segment, a, b, cells)
    }

    pub fn circle(a: f64, b: f64, cells: usize) -> Result<Self> {
        Self::new(DomainKind::Circle, a, b, cells)
    }

    /// Replaces the weight by `ψ` sampled at the nodes.
    pub fn with_psi(self, psi: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.x.iter().map(|&x| psi(x)).collect();
        self.with_psi_samples(values)
    }

    pub fn with_psi_samples(mut self, psi: Vec<f64>) -> Result<Self> {
        if psi.len() != self.x.len() {
            return Err(Error::Mismatch(format!(
                "{} weight samples for {} nodes",
                psi.len(),
                self.x.len()
            )));
        }
        let weight: Vec<f64> = psi.iter().map(|p| (-p).exp()).collect();
        if let Some(i) = weight.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid(format!("weight e^(-psi) not finite and positive at node {i}")));
        }
        self.psi_interp = Cubic::new(self.x[0], self.h, psi.clone(), self.is_circle());
        self.psi = psi;
        self.weight = weight;
        Ok(self)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn is_circle(&self) -> bool {
        self.kind == DomainKind::Circle
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Number of cells `M`.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// Nodal weights `e^{-ψ_i}`.
    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn is_flat(&self) -> bool {
        self.psi.iter().all(|&p| p == 0.0)
    }

    pub fn psi_at(&self, x: f64) -> f64 {
        self.psi_interp.eval(x)
    }

    /// `ψ(x), ψ'(x), ψ''(x)` from the interpolant.
    pub fn psi_d(&self, x: f64) -> (f64, f64, f64) {
        self.psi_interp.eval3(x)
    }

    pub fn weight_at(&self, x: f64) -> f64 {
        (-self.psi_at(x)).exp()
    }

    /// Index of the cell containing `x` (clamped on a segment, wrapped on a circle).
    pub fn cell_of(&self, x: f64) -> usize {
        let n = self.len();
        if self.is_circle() {
            let s = (x - self.a).rem_euclid(self.length()) / self.h;
            return (s as usize).min(n - 1);
        }
        let s = ((x - self.a) / self.h).floor();
        s.clamp(0.0, (n - 1) as f64) as usize
    }

    /// Geodesic distance: `|x - y|` on a segment, the shorter arc on a circle.
    pub fn dist(&self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        if self.is_circle() {
            let l = self.length();
            let d = d.rem_euclid(l);
            d.min(l - d)
        } else {
            d
        }
    }

    /// `Σ f_i e^{-ψ_i} h`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weight).map(|(f, w)| f * w).sum::<f64>() * self.h
    }

    /// Total reference volume `ω(M)`.
    pub fn omega_mass(&self) -> f64 {
        self.weight.iter().sum::<f64>() * self.h
    }

    /// First and second derivative of nodal samples at node `i`, plus a flag
    /// set when a one-sided boundary stencil was used.
    pub fn derivatives(&self, v: &[f64], i: usize) -> (f64, f64, bool) {
        let n = self.len();
        let h = self.h;
        if self.is_circle() {
            let (l, r) = (v[(i + n - 1) % n], v[(i + 1) % n]);
            return ((r - l) / (2.0 * h), (r - 2.0 * v[i] + l) / (h * h), false);
        }
        if i == 0 {
            let d1 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            let d2 = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
            return (d1, d2, true);
        }
        if i == n - 1 {
            let d1 = (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2.0 * h);
            let d2 = (2.0 * v[i] - 5.0 * v[i - 1] + 4.0 * v[i - 2] - v[i - 3]) / (h * h);
            return (d1, d2, true);
        }
        let (l, r) = (v[i - 1], v[i + 1]);
        ((r - l) / (2.0 * h), (r - 2.0 * v[i] + l) / (h * h), false)
    }
}

/// Weighted Ricci curvature at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Curvature {
    pub value: f64,
    /// A one-sided boundary stencil was used; accuracy is reduced there.
    pub one_sided: bool,
}

/// `Ric_N = ψ'' - ψ'^2 / (N - n)` on the flat one-dimensional model.
///
/// When `N = n` the value is `-∞` unless `ψ' = 0`.
pub fn ric_n(d: &Domain1D, p: &MParam, i: usize) -> Result<Curvature> {
    if i >= d.len() {
        return Err(invalid(format!("node {i} out of range 0..{}", d.len())));
    }
    let (d1, d2, one_sided) = d.derivatives(d.psi(), i);
    let gap = p.big_n() - p.n() as f64;
    let value = if gap == 0.0 {
        if d1 == 0.0 {
            d2
        } else {
            f64::NEG_INFINITY
        }
    } else {
        d2 - d1 * d1 / gap
    };
    Ok(Curvature { value, one_sided })
}

/// Reference potential `Ψ` and the induced density `σ = exp_m(-Ψ)`.
#[derive(Debug, Clone)]
pub struct ReferencePotential {
    p: MParam,
    values: Vec<f64>,
    sigma: Vec<f64>,
    m0: Vec<bool>,
    k_hat: f64,
    interp: Cubic,
}

impl ReferencePotential {
    pub fn new(d: &Domain1D, p: MParam, values: Vec<f64>) -> Result<Self> {
        let mut r = Self::unchecked(d, p, values)?;
        r.k_hat = k_modulus_values(&r.values, &r.m0, d)?;
        Ok(r)
    }

    pub fn from_fn(d: &Domain1D, p: MParam, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(d, p, d.nodes().iter().map(|&x| f(x)).collect())
    }

    fn unchecked(d: &Domain1D, p: MParam, values: Vec<f64>) -> Result<Self> {
        if values.len() != d.len() {
            return Err(Error::Mismatch(format!(
                "{} potential samples for {} nodes",
                values.len(),
                d.len()
            )));
        }
        let m = p.m();
        let cut = 1.0 / (m - 1.0);
        let mut m0 = Vec::with_capacity(values.len());
        let mut sigma = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(invalid(format!("potential not finite at node {i}")));
            }
            if m < 1.0 && v <= cut {
                return Err(invalid(format!(
                    "potential {v} at node {i} must exceed -1/(1-m) = {cut}"
                )));
            }
            let inside = m < 1.0 || v < cut;
            m0.push(inside);
            sigma.push(if inside { p.exp_m_unchecked(-v) } else { 0.0 });
        }
        if !m0.iter().any(|&b| b) {
            return Err(invalid("the sublevel set {Ψ < 1/(m-1)} is empty"));
        }
        let interp = Cubic::new(d.nodes()[0], d.h(), values.clone(), d.is_circle());
        Ok(Self {
            p,
            values,
            sigma,
            m0,
            k_hat: f64::NAN,
            interp,
        })
    }

    pub fn p(&self) -> &MParam {
        &self.p
    }

    /// Nodal values of `Ψ`.
    pub fn potential(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Nodes inside `{Ψ < 1/(m-1)}`; all true for `m < 1`.
    pub fn m0_mask(&self) -> &[bool] {
        &self.m0
    }

    /// Largest `K` satisfying the discrete midpoint convexity inequality.
    pub fn k_hat(&self) -> f64 {
        self.k_hat
    }

    pub fn potential_at(&self, x: f64) -> f64 {
        self.interp.eval(x)
    }

    /// `Ψ(x), Ψ'(x), Ψ''(x)` from the interpolant.
    pub fn potential_d(&self, x: f64) -> (f64, f64, f64) {
        self.interp.eval3(x)
    }

    pub fn sigma_at(&self, x: f64) -> f64 {
        self.p.exp_m_unchecked(-self.potential_at(x))
    }

    /// Drift potential `V = -σ^{m-1}/(m-1)`, i.e. `Ψ - 1/(m-1)` clamped at
    /// zero from above when `m > 1`.
    pub fn drift_at(&self, x: f64) -> f64 {
        self.drift_of(self.potential_at(x))
    }

    pub fn drift_of(&self, psi: f64) -> f64 {
        let cut = 1.0 / (self.p.m() - 1.0);
        if self.p.m() > 1.0 {
            psi.min(cut) - cut
        } else {
            psi - cut
        }
    }

    pub fn drift_nodes(&self) -> Vec<f64> {
        self.values.iter().map(|&v| self.drift_of(v)).collect()
    }

    /// `ν(M) = Σ σ_i e^{-ψ_i} h`.
    pub fn mass(&self, d: &Domain1D) -> f64 {
        d.integrate(&self.sigma)
    }

    /// Index of the discrete minimizer of `Ψ`.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = i;
            }
        }
        best
    }

    /// `Σ σ_i^c e^{-ψ_i} h`.
    pub fn sigma_power_integral(&self, d: &Domain1D, c: f64) -> f64 {
        let s: Vec<f64> = self
            .sigma
            .iter()
            .map(|s| if *s > 0.0 { s.powf(c) } else { 0.0 })
            .collect();
        d.integrate(&s)
    }

    /// Discrete moment `Σ |x_i - x_0|^q σ_i e^{-ψ_i} h` about the minimizer of `Ψ`.
    pub fn moment(&self, d: &Domain1D, q: f64) -> f64 {
        let x0 = d.nodes()[self.argmin()];
        let f: Vec<f64> = d
            .nodes()
            .iter()
            .zip(&self.sigma)
            .map(|(&x, s)| d.dist(x, x0).powf(q) * s)
            .collect();
        d.integrate(&f)
    }
}

/// Largest `K` with `Ψ(mid) ≤ ½Ψ(x) + ½Ψ(y) - (K/8) d(x,y)²` over node pairs
/// inside `M0` whose midpoint is a node.
pub fn k_modulus(r: &ReferencePotential, d: &Domain1D) -> Result<f64> {
    k_modulus_values(r.potential(), r.m0_mask(), d)
}

fn k_modulus_values(v: &[f64], mask: &[bool], d: &Domain1D) -> Result<f64> {
    let n = v.len();
    let inside: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    if inside.is_empty() {
        return Err(invalid("k_modulus: M0 is empty"));
    }
    let h = d.h();
    let mut best = f64::INFINITY;
    for (ii, &i) in inside.iter().enumerate() {
        for &j in &inside[ii + 1..] {
            let gap = j - i;
            let mut candidates = [None, None];
            if d.is_circle() {
                if 2 * gap <= n && gap.is_multiple_of(2) {
                    candidates[0] = Some(((i + gap / 2) % n, gap));
                }
                let back = n - gap;
                if 2 * back <= n && back.is_multiple_of(2) {
                    candidates[1] = Some(((i + n - back / 2) % n, back));
                }
            } else if gap.is_multiple_of(2) {
                candidates[0] = Some((i + gap / 2, gap));
            }
            // On antipodal pairs both arcs are geodesics; either may certify K.
            let mut pair_best = f64::NEG_INFINITY;
            for (mid, steps) in candidates.into_iter().flatten() {
                let dist = steps as f64 * h;
                let k = 8.0 * (0.5 * v[i] + 0.5 * v[j] - v[mid]) / (dist * dist);
                pair_best = pair_best.max(k);
            }
            if pair_best > f64::NEG_INFINITY {
                best = best.min(pair_best);
            }
        }
    }
    if best == f64::INFINITY {
        return Err(invalid("k_modulus: no node pair with a nodal midpoint inside M0"));
    }
    Ok(best)
}

/// Rescales `σ` to unit mass by the affine change of `Ψ` that preserves the
/// m-exponential form. Returns the new potential and the factor `c = 1/ν(M)`.
pub fn renormalize_reference(r: &ReferencePotential, d: &Domain1D) -> Result<(ReferencePotential, f64)> {
    let mass = r.mass(d);
    if !(mass.is_finite() && mass > 0.0) {
        return Err(invalid(format!("reference mass {mass} is not finite and positive")));
    }
    let c = 1.0 / mass;
    let m = r.p.m();
    let s = c.powf(m - 1.0);
    let values = r.values.iter().map(|&v| s * v - (s - 1.0) / (m - 1.0)).collect();
    let mut out = ReferencePotential::unchecked(d, r.p, values)?;
    out.k_hat = s * r.k_hat;
    Ok((out, c))
}

/// Normalizes `σ` by adding a constant to `Ψ`, which keeps the convexity
/// modulus unchanged. Returns the normalized potential and the shift.
pub fn shift_normalize(r: &ReferencePotential, d: &Domain1D) -> Result<(ReferencePotential, f64)> {
    let p = r.p;
    let m = p.m();
    let mass = |c: f64| -> f64 {
        let s: Vec<f64> = r.values.iter().map(|v| p.exp_m_unchecked(-v - c)).collect();
        d.integrate(&s)
    };
    let vmin = r.values[r.argmin()];
    let (mut lo, mut hi);
    if m < 1.0 {
        lo = -1.0 / (1.0 - m) - vmin;
        hi = lo + 1.0;
        while mass(hi) > 1.0 {
            hi = lo + 2.0 * (hi - lo);
            if hi - lo > 1e12 {
                return Err(invalid("shift_normalize: cannot bracket unit mass"));
            }
        }
    } else {
        hi = 1.0 / (m - 1.0) - vmin;
        lo = hi - 1.0;
        while mass(lo) < 1.0 {
            lo = hi - 2.0 * (hi - lo);
            if hi - lo > 1e12 {
                return Err(invalid("shift_normalize: cannot bracket unit mass"));
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let shift = 0.5 * (lo + hi);
    let values = r.values.iter().map(|v| v + shift).collect();
    let mut out = ReferencePotential::unchecked(d, p, values)?;
    out.k_hat = r.k_hat;
    Ok((out, shift))
}

/// `R = {(2/K)(1/(m-1) - Ψ(x0))}^{1/2}` bounding the support of `σ` around
/// the minimizer `x0` of `Ψ`.
pub fn support_radius_bound(r: &ReferencePotential) -> Result<f64> {
    let m = r.p.m();
    if m < 1.0 {
        return Err(Error::NotApplicable("support radius bound needs m > 1".into()));
    }
    if !(r.k_hat > 0.0) {
        return Err(Error::NotApplicable(format!(
            "support radius bound needs K > 0, got {}",
            r.k_hat
        )));
    }
    let v0 = r.values[r.argmin()];
    Ok((2.0 / r.k_hat * (1.0 / (m - 1.0) - v0)).sqrt())
}

/// Every node with `σ_i > 0` lies within the support radius of the minimizer.
pub fn support_within_radius(r: &ReferencePotential, d: &Domain1D) -> Result<bool> {
    let radius = support_radius_bound(r)?;
    let x0 = d.nodes()[r.argmin()];
    Ok(d.nodes()
        .iter()
        .zip(r.sigma())
        .all(|(&x, &s)| s == 0.0 || d.dist(x, x0) <= radius * (1.0 + 1e-9)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: f64) -> MParam {
        MParam::one_d(m).unwrap()
    }

    #[test]
    fn flat_weight_has_zero_curvature() {
        let d = Domain1D::segment(-1.0, 1.0, 20).unwrap();
        for i in 0..d.len() {
            assert_eq!(ric_n(&d, &p(0.5), i).unwrap().value, 0.0);
        }
    }

    #[test]
    fn curvature_of_quadratic_weight() {
        // Nodes at 0 and 2 on [-4.05, 4.05] with 81 cells.
        let d = Domain1D::segment(-4.05, 4.05, 81)
            .unwrap()
            .with_psi(|x| x * x / 2.0)
            .unwrap();
        let i0 = d.cell_of(0.0);
        let i2 = d.cell_of(2.0);
        assert!(d.nodes()[i0].abs() < 1e-12 && (d.nodes()[i2] - 2.0).abs() < 1e-12);
        let r0 = ric_n(&d, &p(0.5), i0).unwrap();
        let r2 = ric_n(&d, &p(0.5), i2).unwrap();
        assert!((r0.value - 1.0).abs() < 1e-9);
        assert!((r2.value + 3.0).abs() < 1e-9);
        assert!(!r0.one_sided);
        assert!(ric_n(&d, &p(0.5), 0).unwrap().one_sided);
        assert!((ric_n(&d, &p(0.5), 0).unwrap().value - (1.0 - 4.0 * 4.0)).abs() < 1e-8);
    }

    #[test]
    fn k_modulus_examples() {
        let d = Domain1D::segment(-3.0, 3.0, 120).unwrap();
        let h2 = d.h() * d.h();
        let c = ReferencePotential::from_fn(&d, p(0.75), |_| 0.3).unwrap();
        assert_eq!(c.k_hat(), 0.0);
        let q = ReferencePotential::from_fn(&d, p(0.75), |x| x * x / 2.0).unwrap();
        assert!((q.k_hat() - 1.0).abs() <= h2);
        let nq = ReferencePotential::from_fn(&d, p(1.5), |x| -x * x / 2.0).unwrap();
        assert!((nq.k_hat() + 1.0).abs() <= h2);
    }

    #[test]
    fn k_modulus_on_circle_uses_shorter_arc() {
        let d = Domain1D::circle(0.0, std::f64::consts::TAU, 64).unwrap();
        let r = ReferencePotential::from_fn(&d, p(0.75), |x| 1.0 - x.cos()).unwrap();
        // Ψ'' = cos x has minimum -1.
        assert!(r.k_hat() < -0.9 && r.k_hat() > -1.1, "{}", r.k_hat());
    }

    #[test]
    fn renormalize_examples() {
        let d = Domain1D::segment(0.0, 2.0, 200).unwrap();
        let r = ReferencePotential::from_fn(&d, p(2.0), |_| 0.0).unwrap();
        let (rn, c) = renormalize_reference(&r, &d).unwrap();
        assert!((c - 0.5).abs() < 1e-14);
        assert!(rn.sigma().iter().all(|s| (s - 0.5).abs() < 1e-14));
        assert!((rn.mass(&d) - 1.0).abs() < 1e-12);
        let (again, c1) = renormalize_reference(&rn, &d).unwrap();
        assert!((c1 - 1.0).abs() < 1e-12);
        for (a, b) in again.potential().iter().zip(rn.potential()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn renormalize_scales_modulus() {
        let d = Domain1D::segment(-40.0, 40.0, 1600).unwrap();
        let pm = p(0.5);
        let q = ReferencePotential::from_fn(&d, pm, |x| x * x / 2.0).unwrap();
        let (unit, _) = shift_normalize(&q, &d).unwrap();
        // Shrink to mass 1/4 with the same affine map, then renormalize back.
        let s = 0.25f64.powf(-0.5);
        let quarter = ReferencePotential::new(
            &d,
            pm,
            unit.potential().iter().map(|v| s * v - (s - 1.0) / -0.5).collect(),
        )
        .unwrap();
        assert!((quarter.mass(&d) - 0.25).abs() < 1e-9);
        let (back, c) = renormalize_reference(&quarter, &d).unwrap();
        assert!((c - 4.0).abs() < 1e-8);
        let recomputed = k_modulus(&back, &d).unwrap();
        assert!((recomputed / quarter.k_hat() - 0.5).abs() < 1e-8);
        assert!((back.k_hat() / quarter.k_hat() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn k_modulus_ignores_affine_terms() {
        let d = Domain1D::segment(-2.0, 2.0, 101).unwrap();
        let f = |x: f64| x.powi(4) / 12.0 + x * x;
        let a = ReferencePotential::from_fn(&d, p(0.75), f).unwrap();
        let b = ReferencePotential::from_fn(&d, p(0.75), |x| f(x) + 3.0 * x - 0.7).unwrap();
        assert!((a.k_hat() - b.k_hat()).abs() < 1e-10);
    }

    #[test]
    fn support_radius_examples() {
        let d = Domain1D::segment(-3.05, 3.05, 61).unwrap();
        let r = ReferencePotential::from_fn(&d, p(2.0), |x| x * x / 2.0).unwrap();
        assert!((support_radius_bound(&r).unwrap() - 2f64.sqrt()).abs() < 1e-8);
        assert!(support_within_radius(&r, &d).unwrap());
        let r = ReferencePotential::from_fn(&d, p(1.5), |x| 2.0 * x * x).unwrap();
        assert!((support_radius_bound(&r).unwrap() - 1.0).abs() < 1e-8);
        assert!(support_within_radius(&r, &d).unwrap());
        let sub = ReferencePotential::from_fn(&d, p(0.75), |x| x * x).unwrap();
        assert!(matches!(support_radius_bound(&sub), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn sub_unit_potential_must_stay_above_cutoff() {
        let d = Domain1D::segment(-1.0, 1.0, 10).unwrap();
        assert!(ReferencePotential::from_fn(&d, p(0.5), |_| -2.5).is_err());
        assert!(ReferencePotential::from_fn(&d, p(2.0), |_| 5.0).is_err());
    }

    #[test]
    fn drift_matches_reference_power() {
        let d = Domain1D::segment(-3.0, 3.0, 60).unwrap();
        for m in [0.6, 1.5, 2.0] {
            let pm = p(m);
            let r = ReferencePotential::from_fn(&d, pm, |x| x * x / 2.0 - 0.2).unwrap();
            for (v, s) in r.drift_nodes().iter().zip(r.sigma()) {
                let want = -s.powf(m - 1.0) / (m - 1.0);
                assert!((v - want).abs() < 1e-12, "m = {m}");
            }
        }
    }
}
