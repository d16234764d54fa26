//! Probability measures on a [`Domain1D`]: grid densities with optional
//! atoms, quantile representations, and m-Gaussians.

use serde::{Deserialize, Serialize};

use crate::domain::{renormalize_reference, Domain1D, ReferencePotential};
use crate::error::{invalid, Error, Result};
use crate::mcalc::MParam;

/// Total-mass tolerance enforced by every constructor.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// Density `ρ_i` with respect to `ω = e^{-ψ}dx` at the nodes, plus atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    rho: Vec<f64>,
    atoms: Vec<Atom>,
    total_mass: f64,
}

impl GridMeasure {
    pub fn new(d: &Domain1D, rho: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        if rho.len() != d.len() {
            return Err(Error::Mismatch(format!(
                "{} densities for {} nodes",
                rho.len(),
                d.len()
            )));
        }
        if let Some(i) = rho.iter().position(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(invalid(format!(
                "density {} at node {i} is not finite and >= 0",
                rho[i]
            )));
        }
        for a in &atoms {
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(invalid(format!("atom mass {} must be positive", a.mass)));
            }
            if !(a.x >= d.a() && a.x <= d.b()) {
                return Err(invalid(format!("atom at {} outside [{}, {}]", a.x, d.a(), d.b())));
            }
        }
        let total_mass = d.integrate(&rho) + atoms.iter().map(|a| a.mass).sum::<f64>();
        if (total_mass - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!("total mass {total_mass} differs from 1")));
        }
        Ok(Self { rho, atoms, total_mass })
    }

    /// Normalizes a nonnegative density (w.r.t. `ω`) to unit mass.
    pub fn from_unnormalized(d: &Domain1D, rho: Vec<f64>) -> Result<Self> {
        let mass = d.integrate(&rho);
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid(format!("cannot normalize density of mass {mass}")));
        }
        Self::new(d, rho.into_iter().map(|r| r / mass).collect(), Vec::new())
    }

    pub fn from_fn(d: &Domain1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_unnormalized(d, d.nodes().iter().map(|&x| f(x)).collect())
    }

    /// Density from per-cell masses `ρ_i e^{-ψ_i} h`.
    pub fn from_cell_masses(d: &Domain1D, masses: &[f64]) -> Result<Self> {
        let rho = masses.iter().zip(d.weight()).map(|(m, w)| m / (w * d.h())).collect();
        Self::new(d, rho, Vec::new())
    }

    pub fn uniform(d: &Domain1D) -> Result<Self> {
        Self::from_unnormalized(d, vec![1.0; d.len()])
    }

    /// The normalized reference measure `σ / ν(M)`.
    pub fn reference(r: &ReferencePotential, d: &Domain1D) -> Result<Self> {
        Self::from_unnormalized(d, r.sigma().to_vec())
    }

    /// Adds atoms, scaling the absolutely continuous part to keep unit mass.
    pub fn with_atoms(self, d: &Domain1D, atoms: Vec<Atom>) -> Result<Self> {
        let atom_mass: f64 = atoms.iter().map(|a| a.mass).sum();
        if !(atom_mass < 1.0) {
            return Err(invalid("atoms carry all the mass"));
        }
        let s = (1.0 - atom_mass) / d.integrate(&self.rho);
        Self::new(d, self.rho.iter().map(|r| r * s).collect(), atoms)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Per-cell masses of the absolutely continuous part.
    pub fn cell_masses(&self, d: &Domain1D) -> Vec<f64> {
        self.rho.iter().zip(d.weight()).map(|(r, w)| r * w * d.h()).collect()
    }

    pub fn mean(&self, d: &Domain1D) -> f64 {
        let ac: f64 = self.cell_masses(d).iter().zip(d.nodes()).map(|(m, x)| m * x).sum();
        ac + self.atoms.iter().map(|a| a.mass * a.x).sum::<f64>()
    }

    pub fn variance(&self, d: &Domain1D) -> f64 {
        let mu = self.mean(d);
        let ac: f64 = self
            .cell_masses(d)
            .iter()
            .zip(d.nodes())
            .map(|(m, x)| m * (x - mu) * (x - mu))
            .sum();
        ac + self.atoms.iter().map(|a| a.mass * (a.x - mu) * (a.x - mu)).sum::<f64>()
    }

    /// `∫|ρ - ρ'| dω` between absolutely continuous parts.
    pub fn l1_distance(&self, other: &GridMeasure, d: &Domain1D) -> f64 {
        let diff: Vec<f64> = self.rho.iter().zip(&other.rho).map(|(a, b)| (a - b).abs()).collect();
        d.integrate(&diff)
    }

    /// Cumulative distribution at cell edges, `F[0] = 0`, `F[M] = 1`.
    pub fn cdf_edges(&self, d: &Domain1D) -> Vec<f64> {
        let masses = self.cell_masses(d);
        let total: f64 = masses.iter().sum();
        let mut f = Vec::with_capacity(masses.len() + 1);
        let mut acc = 0.0;
        f.push(0.0);
        for m in masses {
            acc += m;
            f.push(acc / total);
        }
        f
    }

    /// Piecewise-linear distribution function of the absolutely continuous part.
    pub fn cdf_at(&self, d: &Domain1D, x: f64) -> f64 {
        let f = self.cdf_edges(d);
        if x <= d.a() {
            return 0.0;
        }
        if x >= d.b() {
            return 1.0;
        }
        let s = (x - d.a()) / d.h();
        let i = (s.floor() as usize).min(d.len() - 1);
        let t = s - i as f64;
        f[i] + t * (f[i + 1] - f[i])
    }

    /// CSV with header `x,rho`; atoms are not included.
    pub fn to_csv(&self, d: &Domain1D) -> String {
        let mut out = String::from("x,rho\n");
        for (x, r) in d.nodes().iter().zip(&self.rho) {
            out.push_str(&format!("{x},{r}\n"));
        }
        out
    }

    pub fn to_json(&self, d: &Domain1D) -> serde_json::Value {
        serde_json::json!({
            "x": d.nodes(),
            "rho": self.rho,
            "atoms": self.atoms,
            "total_mass": self.total_mass,
        })
    }
}

/// Monotone quantile function sampled as `J + 1` edges `E_k = Q(k/J)`.
///
/// Each quantile cell `[E_{j-1}, E_j]` carries mass `1/J` spread uniformly,
/// so `Q` is piecewise linear and the positions `X_j = Q((j - ½)/J)` are the
/// cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRep {
    edges: Vec<f64>,
}

impl QuantileRep {
    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(invalid("quantile representation needs at least one cell"));
        }
        if let Some(k) = edges.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(invalid(format!("quantile edges not strictly increasing at {k}")));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(invalid("quantile edges must be finite"));
        }
        Ok(Self { edges })
    }

    /// Builds edges from positions by taking midpoints and extrapolating
    /// linearly at both ends.
    pub fn from_points(x: &[f64]) -> Result<Self> {
        let j = x.len();
        if j < 2 {
            return Err(invalid("need at least two quantile points"));
        }
        let mut edges = Vec::with_capacity(j + 1);
        edges.push(0.0);
        for w in x.windows(2) {
            edges.push(0.5 * (w[0] + w[1]));
        }
        edges.push(2.0 * x[j - 1] - edges[j - 1]);
        edges[0] = 2.0 * x[0] - edges[1];
        Self::from_edges(edges)
    }

    /// Number of quantile cells `J`.
    pub fn j(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn points(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn s_grid(&self) -> Vec<f64> {
        let j = self.j() as f64;
        (0..self.j()).map(|k| (k as f64 + 0.5) / j).collect()
    }

    /// `Q(s)` for `s ∈ [0, 1]`.
    pub fn quantile(&self, s: f64) -> f64 {
        let j = self.j();
        let u = (s.clamp(0.0, 1.0) * j as f64).min(j as f64);
        let k = (u.floor() as usize).min(j - 1);
        let t = u - k as f64;
        self.edges[k] + t * (self.edges[k + 1] - self.edges[k])
    }

    /// Distribution function of the piecewise-uniform measure.
    pub fn cdf(&self, x: f64) -> f64 {
        let e = &self.edges;
        if x <= e[0] {
            return 0.0;
        }
        if x >= e[e.len() - 1] {
            return 1.0;
        }
        let k = e.partition_point(|&v| v <= x) - 1;
        (k as f64 + (x - e[k]) / (e[k + 1] - e[k])) / self.j() as f64
    }

    pub fn mean(&self) -> f64 {
        self.points().iter().sum::<f64>() / self.j() as f64
    }

    /// Exact variance of the piecewise-uniform measure.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let second: f64 = self
            .edges
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0] - mu, w[1] - mu);
                (a * a + a * b + b * b) / 3.0
            })
            .sum();
        second / self.j() as f64
    }

    pub fn translate(&self, c: f64) -> Self {
        Self {
            edges: self.edges.iter().map(|e| e + c).collect(),
        }
    }
}

/// Quantile representation of the absolutely continuous measure `mu`.
///
/// Interior edges invert the piecewise-linear distribution function at
/// `s = k/J`; the two end cells are centered on the quantiles at `s_1` and
/// `s_J`. Atoms are rejected.
pub fn to_quantile(mu: &GridMeasure, d: &Domain1D, j: usize) -> Result<QuantileRep> {
    if mu.has_atoms() {
        return Err(invalid(
            "to_quantile: measure has atoms; smooth them into the density first",
        ));
    }
    if j < 1 {
        return Err(invalid("to_quantile: J must be positive"));
    }
    let f = mu.cdf_edges(d);
    let n = d.len();
    let first = (0..n)
        .find(|&i| f[i + 1] > f[i])
        .ok_or_else(|| invalid("empty measure"))?;
    let last = (0..n).rev().find(|&i| f[i + 1] > f[i]).unwrap();
    let edge = |i: usize| d.a() + i as f64 * d.h();
    let inverse = |s: f64| {
        let i = f.partition_point(|&v| v < s).clamp(1, n) - 1;
        let t = if f[i + 1] > f[i] {
            ((s - f[i]) / (f[i + 1] - f[i])).clamp(0.0, 1.0)
        } else {
            0.0
        };
        edge(i) + t * d.h()
    };
    let mut edges = Vec::with_capacity(j + 1);
    edges.push(edge(first));
    for k in 1..j {
        edges.push(inverse(k as f64 / j as f64));
    }
    edges.push(edge(last + 1));
    // End cells are centered on the quantiles at s_1 and s_J instead of
    // stretching over the whole tail.
    if j > 1 {
        let half = 0.5 / j as f64;
        edges[0] = edges[0].max(2.0 * inverse(half) - edges[1]);
        edges[j] = edges[j].min(2.0 * inverse(1.0 - half) - edges[j - 1]);
    }
    // Guard against ties produced by rounding in nearly empty cells.
    for k in 1..edges.len() {
        if edges[k] <= edges[k - 1] {
            edges[k] = edges[k - 1] + 1e-12 * d.h();
        }
    }
    QuantileRep::from_edges(edges)
}

/// Deposits mass `1/J` from each quantile cell into grid cells by overlap.
/// Cells outside a segment are clipped to the end cells; on a circle they
/// wrap around.
pub fn to_density(q: &QuantileRep, d: &Domain1D) -> Result<GridMeasure> {
    GridMeasure::from_cell_masses(d, &deposit(q, d))
}

pub(crate) fn deposit(q: &QuantileRep, d: &Domain1D) -> Vec<f64> {
    let n = d.len();
    let h = d.h();
    let mut masses = vec![0.0; n];
    let per = 1.0 / q.j() as f64;
    for w in q.edges().windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        if d.is_circle() {
            let shift = ((lo - d.a()) / d.length()).floor() * d.length();
            lo -= shift;
            hi -= shift;
            spread(&mut masses, d.a(), h, lo, hi, per, true);
            continue;
        }
        lo = lo.clamp(d.a(), d.b());
        hi = hi.clamp(d.a(), d.b());
        if hi - lo <= 0.0 {
            let i = d.cell_of(lo);
            masses[i] += per;
            continue;
        }
        spread(&mut masses, d.a(), h, lo, hi, per, false);
    }
    masses
}

fn spread(masses: &mut [f64], a: f64, h: f64, lo: f64, hi: f64, mass: f64, wrap: bool) {
    let n = masses.len();
    let density = mass / (hi - lo);
    let mut i = ((lo - a) / h).floor() as i64;
    loop {
        let cell_lo = a + i as f64 * h;
        let cell_hi = cell_lo + h;
        if cell_lo >= hi {
            break;
        }
        let overlap = hi.min(cell_hi) - lo.max(cell_lo);
        if overlap > 0.0 {
            let idx = if wrap {
                i.rem_euclid(n as i64) as usize
            } else {
                i.clamp(0, n as i64 - 1) as usize
            };
            masses[idx] += overlap * density;
        }
        i += 1;
    }
}

/// An m-Gaussian measure together with the reference potential that makes
/// it the ground state.
#[derive(Debug, Clone)]
pub struct MGaussian {
    pub measure: GridMeasure,
    pub reference: ReferencePotential,
    /// Grid normalization constant.
    pub c0: f64,
    /// Width constant making the variance on the real line equal `V`.
    pub c1: f64,
    /// Mass of the untruncated profile lying outside the domain.
    pub tail_mass: f64,
    /// Distance from the mean beyond which the profile is discarded
    /// (the support radius when `m > 1`).
    pub truncation_radius: f64,
}

/// Builder for m-Gaussians with a configurable tail tolerance.
#[derive(Debug, Clone, Copy)]
pub struct MGaussianBuilder {
    p: MParam,
    mean: f64,
    variance: f64,
    tail_tol: f64,
}

impl MGaussianBuilder {
    pub fn new(p: MParam, mean: f64, variance: f64) -> Self {
        Self {
            p,
            mean,
            variance,
            tail_tol: 1e-8,
        }
    }

    pub fn tail_tol(mut self, tol: f64) -> Self {
        self.tail_tol = tol;
        self
    }

    pub fn build(self, d: &Domain1D) -> Result<MGaussian> {
        let p = self.p;
        let m = p.m();
        let var = self.variance;
        if !(var > 0.0 && var.is_finite()) {
            return Err(invalid(format!("variance {var} must be positive")));
        }
        let c1 = m_gaussian_width(&p)?;
        let scale = (var / c1).sqrt();
        let (tail_mass, radius) = if m > 1.0 {
            let r = scale * (2.0 / (m - 1.0)).sqrt();
            (0.0, r)
        } else {
            let r = tail_radius(&p, self.tail_tol) * scale;
            let lo = (self.mean - d.a()) / scale;
            let hi = (d.b() - self.mean) / scale;
            let total = profile_integral(&p, f64::NEG_INFINITY, f64::INFINITY);
            let tail = (profile_tail(&p, hi) + profile_tail(&p, lo)) / total;
            (tail, r)
        };
        if d.is_circle() {
            if m < 1.0 {
                return Err(Error::Unsupported("heavy-tailed m-Gaussians on a circle".into()));
            }
            if 2.0 * radius >= d.length() {
                return Err(invalid(format!(
                    "m-Gaussian support diameter {} exceeds the circle length {}",
                    2.0 * radius,
                    d.length()
                )));
            }
        } else if m > 1.0 {
            if self.mean - radius < d.a() || self.mean + radius > d.b() {
                return Err(invalid(format!(
                    "m-Gaussian support [{}, {}] exceeds the domain; required radius {radius}",
                    self.mean - radius,
                    self.mean + radius
                )));
            }
        } else if tail_mass > self.tail_tol {
            return Err(invalid(format!(
                "m-Gaussian tail mass {tail_mass:e} outside the domain exceeds {:e}; required radius {radius}",
                self.tail_tol
            )));
        }
        let base: Vec<f64> = d
            .nodes()
            .iter()
            .map(|&x| {
                let y = signed_offset(d, x, self.mean);
                c1 * y * y / (2.0 * var)
            })
            .collect();
        let r0 = ReferencePotential::new(d, p, base)?;
        let (reference, c0) = renormalize_reference(&r0, d)?;
        let measure = GridMeasure::reference(&reference, d)?;
        Ok(MGaussian {
            measure,
            reference,
            c0,
            c1,
            tail_mass,
            truncation_radius: radius,
        })
    }
}

/// m-Gaussian with mean `v` and variance `var`, default tail tolerance.
pub fn m_gaussian(p: &MParam, v: f64, var: f64, d: &Domain1D) -> Result<MGaussian> {
    MGaussianBuilder::new(*p, v, var).build(d)
}

fn signed_offset(d: &Domain1D, x: f64, c: f64) -> f64 {
    let y = x - c;
    if d.is_circle() {
        let l = d.length();
        y - l * (y / l).round()
    } else {
        y
    }
}

/// `C1 = Var(exp_m(-z²/2))` computed by quadrature, so that
/// `exp_m(-C1 y²/(2V))` has variance `V` on the real line.
pub fn m_gaussian_width(p: &MParam) -> Result<f64> {
    let m = p.m();
    if m <= 1.0 / 3.0 {
        return Err(invalid(format!("m-Gaussian variance is infinite for m = {m} <= 1/3")));
    }
    let z0 = profile_integral(p, f64::NEG_INFINITY, f64::INFINITY);
    let z2 = profile_second_moment(p);
    Ok(z2 / z0)
}

fn profile(p: &MParam, z: f64) -> f64 {
    p.exp_m_unchecked(-0.5 * z * z)
}

/// `∫ exp_m(-z²/2) dz` over `(lo, hi)` with `lo`/`hi` possibly infinite.
fn profile_integral(p: &MParam, lo: f64, hi: f64) -> f64 {
    if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
        return 2.0 * profile_tail(p, 0.0);
    }
    profile_tail(p, lo) - profile_tail(p, hi)
}

/// `∫_z^∞ exp_m(-u²/2) du`.
fn profile_tail(p: &MParam, z: f64) -> f64 {
    if z == f64::INFINITY {
        return 0.0;
    }
    if z == f64::NEG_INFINITY {
        return 2.0 * profile_tail(p, 0.0);
    }
    if p.m() > 1.0 {
        let r = (2.0 / (p.m() - 1.0)).sqrt();
        if z >= r {
            return 0.0;
        }
        let lo = z.max(-r);
        return compact_quad(|u| profile(p, u), lo, r);
    }
    sinh_quad(|u| profile(p, u), z)
}

fn profile_second_moment(p: &MParam) -> f64 {
    if p.m() > 1.0 {
        let r = (2.0 / (p.m() - 1.0)).sqrt();
        return compact_quad(|u| u * u * profile(p, u), -r, r);
    }
    2.0 * sinh_quad(|u| u * u * profile(p, u), 0.0)
}

/// `∫_z^∞ f` via `u = z + sinh(t)`, trapezoid in `t` (exponentially
/// convergent for algebraically decaying analytic integrands).
fn sinh_quad(f: impl Fn(f64) -> f64, z: f64) -> f64 {
    let step = 1.0 / 64.0;
    let mut sum = 0.5 * f(z);
    let mut k = 1;
    loop {
        let t = k as f64 * step;
        let term = f(z + t.sinh()) * t.cosh();
        sum += term;
        if (term.abs() < 1e-18 * sum.abs() && t > 4.0) || t > 700.0 {
            break;
        }
        k += 1;
    }
    sum * step
}

/// `∫_lo^hi f` for a profile vanishing smoothly at `hi = r`; substitution
/// `u = r sin θ` removes the endpoint singularity of the derivative.
fn compact_quad(f: impl Fn(f64) -> f64, lo: f64, r: f64) -> f64 {
    let t0 = (lo / r).clamp(-1.0, 1.0).asin();
    let t1 = std::f64::consts::FRAC_PI_2;
    let n = 20_000;
    let step = (t1 - t0) / n as f64;
    let g = |t: f64| f(r * t.sin()) * r * t.cos();
    let mut sum = 0.5 * (g(t0) + g(t1));
    for k in 1..n {
        sum += g(t0 + k as f64 * step);
    }
    // Simpson correction from the midpoint sum.
    let mut mid = 0.0;
    for k in 0..n {
        mid += g(t0 + (k as f64 + 0.5) * step);
    }
    (sum + 2.0 * mid) * step / 3.0
}

/// Smallest `R` (in units of the unit profile) with two-sided tail mass
/// below `tol`.
fn tail_radius(p: &MParam, tol: f64) -> f64 {
    let total = profile_integral(p, f64::NEG_INFINITY, f64::INFINITY);
    let frac = |r: f64| 2.0 * profile_tail(p, r) / total;
    let mut hi = 1.0;
    while frac(hi) > tol && hi < 1e15 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if frac(mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: f64) -> MParam {
        MParam::one_d(m).unwrap()
    }

    #[test]
    fn uniform_quantile_is_identity() {
        let d = Domain1D::segment(0.0, 1.0, 64).unwrap();
        let mu = GridMeasure::uniform(&d).unwrap();
        let q = to_quantile(&mu, &d, 4).unwrap();
        let x = q.points();
        for (a, b) in x.iter().zip([0.125, 0.375, 0.625, 0.875]) {
            assert!((a - b).abs() < 1e-12);
        }
        let back = to_density(&q, &d).unwrap();
        assert!(back.rho().iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn stretched_quantile_gives_half_density() {
        let d = Domain1D::segment(0.0, 2.0, 40).unwrap();
        let j = 10;
        let x: Vec<f64> = (0..j).map(|k| 2.0 * (k as f64 + 0.5) / j as f64).collect();
        let q = QuantileRep::from_points(&x).unwrap();
        let mu = to_density(&q, &d).unwrap();
        assert!(mu.rho().iter().all(|r| (r - 0.5).abs() < 1e-12));
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_bump_quantiles_collapse() {
        let d = Domain1D::segment(-1.0, 1.0, 400).unwrap();
        let mu = GridMeasure::from_fn(&d, |x| (-(x - 0.3f64).powi(2) / 1e-4).exp()).unwrap();
        let q = to_quantile(&mu, &d, 16).unwrap();
        assert!(q.points().iter().all(|x| (x - 0.3).abs() < 0.03));
    }

    #[test]
    fn atoms_rejected_by_quantile() {
        let d = Domain1D::segment(0.0, 1.0, 16).unwrap();
        let mu = GridMeasure::uniform(&d)
            .unwrap()
            .with_atoms(&d, vec![Atom { x: 0.5, mass: 0.1 }])
            .unwrap();
        assert!(to_quantile(&mu, &d, 8).is_err());
    }

    #[test]
    fn piecewise_uniform_moments() {
        let q = QuantileRep::from_edges(vec![0.0, 1.0, 2.0]).unwrap();
        assert!((q.mean() - 1.0).abs() < 1e-15);
        assert!((q.variance() - 1.0 / 3.0).abs() < 1e-15);
        assert!((q.cdf(0.5) - 0.25).abs() < 1e-15);
        assert!((q.quantile(0.75) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn width_matches_closed_form() {
        // Var of exp_m(-z²/2): k/(k - 3/2) with k = 1/(1-m), or j/(j + 3/2) with j = 1/(m-1).
        for m in [0.45, 0.6, 0.75, 0.9, 0.999] {
            let k = 1.0 / (1.0 - m);
            let want = k / (k - 1.5);
            let got = m_gaussian_width(&p(m)).unwrap();
            assert!((got / want - 1.0).abs() < 1e-9, "m = {m}: {got} vs {want}");
        }
        for m in [1.001, 1.2, 1.5, 2.0, 3.0] {
            let j = 1.0 / (m - 1.0);
            let want = j / (j + 1.5);
            let got = m_gaussian_width(&p(m)).unwrap();
            assert!((got / want - 1.0).abs() < 1e-9, "m = {m}: {got} vs {want}");
        }
    }

    #[test]
    fn near_classical_m_gaussian_is_gaussian() {
        let d = Domain1D::segment(-12.0, 12.0, 2400).unwrap();
        let g = m_gaussian(&p(0.999), 0.0, 1.0, &d).unwrap();
        let err = d
            .nodes()
            .iter()
            .zip(g.measure.rho())
            .map(|(x, r)| (r - (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn super_unit_m_gaussian_has_compact_support() {
        let d = Domain1D::segment(-3.0, 3.0, 600).unwrap();
        let g = m_gaussian(&p(2.0), 0.2, 0.3, &d).unwrap();
        let r = g.truncation_radius;
        for (x, rho) in d.nodes().iter().zip(g.measure.rho()) {
            if (x - 0.2).abs() > r {
                assert_eq!(*rho, 0.0);
            }
        }
        assert!(g.measure.rho().iter().filter(|r| **r == 0.0).count() > 100);
        assert!((g.measure.mean(&d) - 0.2).abs() < d.h());
        assert!((g.measure.variance(&d) - 0.3).abs() < 1e-3);
        assert!(crate::domain::support_within_radius(&g.reference, &d).unwrap());
    }

    #[test]
    fn m_gaussian_support_must_fit() {
        let d = Domain1D::segment(-1.0, 1.0, 100).unwrap();
        assert!(m_gaussian(&p(2.0), 0.0, 1.0, &d).is_err());
        assert!(m_gaussian(&p(0.75), 0.0, 1.0, &d).is_err());
    }

    #[test]
    fn m_gaussian_reference_is_rescaled_quadratic() {
        let d = Domain1D::segment(-60.0, 60.0, 4000).unwrap();
        let pm = p(0.75);
        let g = m_gaussian(&pm, 1.0, 0.5, &d).unwrap();
        let want = g.c0.powf(pm.m() - 1.0) * g.c1 / 0.5;
        assert!((g.reference.k_hat() / want - 1.0).abs() < 1e-7);
        assert!((g.measure.mean(&d) - 1.0).abs() < d.h());
        assert!(g.tail_mass < 1e-8);
    }

    #[test]
    fn csv_is_stable() {
        let d = Domain1D::segment(0.0, 1.0, 4).unwrap();
        let mu = GridMeasure::uniform(&d).unwrap();
        assert_eq!(mu.to_csv(&d), "x,rho\n0.125,1\n0.375,1\n0.625,1\n0.875,1\n");
    }
}
