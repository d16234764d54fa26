//! Quadratic optimal transport on the line and on the circle.
//!
//! On the line the optimal coupling is the monotone rearrangement, so `W₂` is
//! the `L²` distance between quantile functions and displacement geodesics are
//! linear interpolations of quantiles. A linear-programming solver over
//! small discrete measures serves as an independent check.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use crate::domain::Domain1D;
use crate::error::{invalid, Error, Result};
use crate::measures::{GridMeasure, QuantileRep};

fn same_j(mu: &QuantileRep, nu: &QuantileRep) -> Result<()> {
    if mu.j() != nu.j() {
        return Err(Error::Mismatch(format!(
            "quantile resolutions differ: J = {} vs {}",
            mu.j(),
            nu.j()
        )));
    }
    Ok(())
}

/// `((1/J) Σ_j (X_j - Y_j)²)^{1/2}` over quantile-cell centers.
pub fn w2(mu: &QuantileRep, nu: &QuantileRep) -> Result<f64> {
    same_j(mu, nu)?;
    let s: f64 = mu
        .points()
        .iter()
        .zip(nu.points())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((s / mu.j() as f64).sqrt())
}

/// Exact `W₂` between the piecewise-uniform measures, i.e. the `L²` distance
/// of the piecewise-linear quantile functions.
pub fn w2_piecewise(mu: &QuantileRep, nu: &QuantileRep) -> Result<f64> {
    same_j(mu, nu)?;
    let d: Vec<f64> = mu.edges().iter().zip(nu.edges()).map(|(a, b)| a - b).collect();
    let s: f64 = d
        .windows(2)
        .map(|w| (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 3.0)
        .sum();
    Ok((s / mu.j() as f64).sqrt())
}

/// `W₂` on a circle of circumference `period`, both inputs quantile
/// representations cut at the same base point.
///
/// Scans the `J` cyclic re-indexings of the target with lifts by `-1, 0, 1`
/// periods and keeps the cheapest monotone pairing.
pub fn w2_circle(mu: &QuantileRep, nu: &QuantileRep, period: f64) -> Result<f64> {
    same_j(mu, nu)?;
    let j = mu.j();
    let x = mu.points();
    let y = nu.points();
    let mut best = f64::INFINITY;
    for k in 0..j {
        for q in [-1.0, 0.0, 1.0] {
            let mut s = 0.0;
            for (i, xi) in x.iter().enumerate() {
                let idx = i + k;
                let lifted = if idx >= j { y[idx - j] + period } else { y[idx] };
                let dy = xi - (lifted + q * period);
                s += dy * dy;
                if s >= best * j as f64 {
                    break;
                }
            }
            best = best.min(s / j as f64);
        }
    }
    Ok(best.sqrt())
}

/// Quantile interpolation `(1-t) X^μ + t X^ν`, the displacement geodesic.
pub fn displacement(mu: &QuantileRep, nu: &QuantileRep, t: f64) -> Result<QuantileRep> {
    same_j(mu, nu)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("displacement time {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(mu.clone());
    }
    if t == 1.0 {
        return Ok(nu.clone());
    }
    QuantileRep::from_edges(
        mu.edges()
            .iter()
            .zip(nu.edges())
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect(),
    )
}

/// Exact `W₂` between two absolutely continuous grid measures whose
/// densities are constant on each cell.
///
/// Both quantile functions are piecewise linear; the squared difference is
/// integrated exactly over the merged breakpoints.
pub fn w2_grid(mu: &GridMeasure, nu: &GridMeasure, d: &Domain1D) -> Result<f64> {
    if mu.has_atoms() || nu.has_atoms() {
        return Err(invalid("w2_grid needs absolutely continuous measures"));
    }
    if mu.rho().len() != d.len() || nu.rho().len() != d.len() {
        return Err(Error::Mismatch("w2_grid inputs on different grids".into()));
    }
    let pieces = |m: &GridMeasure| -> Vec<(f64, f64)> {
        let masses = m.cell_masses(d);
        let total: f64 = masses.iter().sum();
        masses
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| (d.a() + i as f64 * d.h(), w / total))
            .collect()
    };
    let (a, b) = (pieces(mu), pieces(nu));
    let h = d.h();
    let (mut i, mut j) = (0, 0);
    // Mass already consumed inside the current piece of each measure.
    let (mut used_a, mut used_b) = (0.0, 0.0);
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        let (xa, wa) = a[i];
        let (xb, wb) = b[j];
        let step = (wa - used_a).min(wb - used_b);
        let qa0 = xa + used_a / wa * h;
        let qb0 = xb + used_b / wb * h;
        let qa1 = xa + (used_a + step) / wa * h;
        let qb1 = xb + (used_b + step) / wb * h;
        let (d0, d1) = (qa0 - qb0, qa1 - qb1);
        acc += step * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        used_a += step;
        used_b += step;
        if wa - used_a <= 1e-15 * wa {
            i += 1;
            used_a = 0.0;
        }
        if wb - used_b <= 1e-15 * wb {
            j += 1;
            used_b = 0.0;
        }
    }
    Ok(acc.max(0.0).sqrt())
}

/// Finitely many weighted points with total mass one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    /// Atoms `(location, mass)`; masses must be positive and sum to one.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("discrete measure needs at least one atom"));
        }
        if atoms.iter().any(|(x, w)| !x.is_finite() || !(*w > 0.0)) {
            return Err(invalid("atoms need finite locations and positive masses"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("atom masses sum to {total}")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { atoms })
    }

    pub fn uniform(points: &[f64]) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        Self::new(points.iter().map(|&x| (x, w)).collect())
    }

    /// Atoms sorted by location.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// A transport plan given by weighted support pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    pub pairs: Vec<(f64, f64, f64)>,
}

impl Coupling {
    pub fn cost(&self) -> f64 {
        self.pairs.iter().map(|(x, y, w)| w * (x - y) * (x - y)).sum()
    }

    /// No two support pairs cross: `x < x'` implies `y <= y'`.
    pub fn is_monotone(&self) -> bool {
        self.pairs
            .iter()
            .all(|a| self.pairs.iter().all(|b| !(a.0 < b.0 && a.1 > b.1)))
    }

    /// Largest violation of the marginal constraints.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let side = |m: &DiscreteMeasure, pick: fn(&(f64, f64, f64)) -> f64| {
            m.atoms()
                .iter()
                .map(|(x, w)| {
                    let got: f64 = self.pairs.iter().filter(|p| pick(p) == *x).map(|p| p.2).sum();
                    (got - w).abs()
                })
                .fold(0.0, f64::max)
        };
        side(mu, |p| p.0).max(side(nu, |p| p.1))
    }
}

/// The monotone (north-west corner) coupling of two discrete measures.
pub fn monotone_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Coupling {
    let (a, b) = (mu.atoms(), nu.atoms());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut pairs = Vec::new();
    while i < a.len() && j < b.len() {
        let w = ra.min(rb);
        if w > 0.0 {
            pairs.push((a[i].0, b[j].0, w));
        }
        ra -= w;
        rb -= w;
        if ra <= 1e-15 {
            i += 1;
            if i < a.len() {
                ra = a[i].1;
            }
        }
        if rb <= 1e-15 {
            j += 1;
            if j < b.len() {
                rb = b[j].1;
            }
        }
    }
    Coupling { pairs }
}

/// `W₂` between discrete measures from their quantile step functions.
pub fn w2_discrete(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    monotone_coupling(mu, nu).cost().sqrt()
}

/// Largest atom count accepted by [`w2_lp_oracle`].
pub const LP_ORACLE_MAX_ATOMS: usize = 12;

/// Exact `W₂` by solving the transportation linear program.
pub fn w2_lp_oracle(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    if mu.len() > LP_ORACLE_MAX_ATOMS || nu.len() > LP_ORACLE_MAX_ATOMS {
        return Err(Error::Unsupported(format!(
            "LP oracle limited to {LP_ORACLE_MAX_ATOMS} atoms per side"
        )));
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> = mu
        .atoms()
        .iter()
        .map(|(x, _)| {
            nu.atoms()
                .iter()
                .map(|(y, _)| lp.add_var((x - y) * (x - y), (0.0, f64::INFINITY)))
                .collect()
        })
        .collect();
    for (i, (_, w)) in mu.atoms().iter().enumerate() {
        let row: Vec<_> = vars[i].iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(&row[..], ComparisonOp::Eq, *w);
    }
    // The last column constraint is implied by the others.
    for (j, (_, w)) in nu.atoms().iter().enumerate().take(nu.len() - 1) {
        let col: Vec<_> = vars.iter().map(|r| (r[j], 1.0)).collect();
        lp.add_constraint(&col[..], ComparisonOp::Eq, *w);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::NotApplicable(format!("transport LP failed: {e}")))?;
    Ok(sol.objective().max(0.0).sqrt())
}

/// Smallest cost change over all exchanges of partners between two pairs of
/// the coupling; nonnegative when no exchange improves the plan.
pub fn exchange_gain(c: &Coupling) -> f64 {
    let mut worst = f64::INFINITY;
    for (k, a) in c.pairs.iter().enumerate() {
        for b in &c.pairs[k + 1..] {
            let w = a.2.min(b.2);
            let before = (a.0 - a.1).powi(2) + (b.0 - b.1).powi(2);
            let after = (a.0 - b.1).powi(2) + (b.0 - a.1).powi(2);
            worst = worst.min(w * (after - before));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_rep(lo: f64, hi: f64, j: usize) -> QuantileRep {
        QuantileRep::from_edges((0..=j).map(|k| lo + (hi - lo) * k as f64 / j as f64).collect()).unwrap()
    }

    #[test]
    fn identical_and_translated() {
        let a = uniform_rep(0.0, 1.0, 64);
        assert_eq!(w2(&a, &a).unwrap(), 0.0);
        let b = a.translate(0.37);
        assert!((w2(&a, &b).unwrap() - 0.37).abs() < 1.0 / 64.0);
    }

    #[test]
    fn uniform_vs_stretched() {
        let j = 256;
        let a = uniform_rep(0.0, 1.0, j);
        let b = uniform_rep(0.0, 2.0, j);
        let want = (1.0f64 / 3.0).sqrt();
        assert!((w2(&a, &b).unwrap() - want).abs() < 2.0 / j as f64);
        assert!((w2_piecewise(&a, &b).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn mismatched_resolution_rejected() {
        assert!(w2(&uniform_rep(0.0, 1.0, 4), &uniform_rep(0.0, 1.0, 5)).is_err());
    }

    #[test]
    fn displacement_endpoints_and_midpoint() {
        let a = uniform_rep(0.0, 1.0, 8);
        let b = a.translate(2.0);
        assert_eq!(displacement(&a, &b, 0.0).unwrap(), a);
        assert_eq!(displacement(&a, &b, 1.0).unwrap(), b);
        let mid = displacement(&a, &b, 0.5).unwrap();
        for (x, y) in mid.edges().iter().zip(a.translate(1.0).edges()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(displacement(&a, &b, 1.5).is_err());
    }

    #[test]
    fn lp_oracle_small_cases() {
        let a = DiscreteMeasure::new(vec![(0.3, 1.0)]).unwrap();
        let b = DiscreteMeasure::new(vec![(-1.2, 1.0)]).unwrap();
        assert!((w2_lp_oracle(&a, &b).unwrap() - 1.5).abs() < 1e-12);
        // Both matchings enumerated by hand; the monotone one is cheaper.
        let a = DiscreteMeasure::uniform(&[0.0, 1.0]).unwrap();
        let b = DiscreteMeasure::uniform(&[0.5, 3.0]).unwrap();
        let monotone = (0.5f64.powi(2) + 2.0f64.powi(2)) / 2.0;
        let crossed = (3.0f64.powi(2) + 0.5f64.powi(2)) / 2.0;
        let want = monotone.min(crossed).sqrt();
        assert!((w2_lp_oracle(&a, &b).unwrap() - want).abs() < 1e-9);
        assert!((w2_discrete(&a, &b) - want).abs() < 1e-12);
        let big = DiscreteMeasure::uniform(&[0.0; 13]).unwrap();
        assert!(w2_lp_oracle(&big, &big).is_err());
    }

    #[test]
    fn quantile_w2_matches_lp_on_discretized_uniforms() {
        let xs: Vec<f64> = (0..8).map(|k| (k as f64 + 0.5) / 8.0).collect();
        let ys: Vec<f64> = (0..8).map(|k| 2.0 * (k as f64 + 0.5) / 8.0).collect();
        let lp = w2_lp_oracle(
            &DiscreteMeasure::uniform(&xs).unwrap(),
            &DiscreteMeasure::uniform(&ys).unwrap(),
        )
        .unwrap();
        let q = w2(
            &QuantileRep::from_points(&xs).unwrap(),
            &QuantileRep::from_points(&ys).unwrap(),
        )
        .unwrap();
        assert!((q / lp - 1.0).abs() < 1e-6);
    }

    #[test]
    fn monotone_coupling_properties() {
        let a = DiscreteMeasure::new(vec![(0.0, 0.2), (1.0, 0.5), (2.5, 0.3)]).unwrap();
        let b = DiscreteMeasure::new(vec![(-1.0, 0.6), (4.0, 0.4)]).unwrap();
        let c = monotone_coupling(&a, &b);
        assert!(c.is_monotone());
        assert!(c.marginal_error(&a, &b) < 1e-12);
        assert!(exchange_gain(&c) >= -1e-12);
    }

    #[test]
    fn grid_w2_of_uniform_pair() {
        let d = Domain1D::segment(0.0, 2.0, 200).unwrap();
        let a = GridMeasure::from_fn(&d, |x| if x < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let b = GridMeasure::uniform(&d).unwrap();
        let want = (1.0f64 / 3.0).sqrt();
        assert!((w2_grid(&a, &b, &d).unwrap() - want).abs() < 1e-12);
        assert!(w2_grid(&a, &a, &d).unwrap() < 1e-12);
        let shifted = GridMeasure::from_fn(&d, |x| if x >= 1.0 { 1.0 } else { 0.0 }).unwrap();
        assert!((w2_grid(&a, &shifted, &d).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_distance_wraps() {
        let j = 64;
        let a = uniform_rep(0.05, 0.15, j);
        let b = uniform_rep(0.85, 0.95, j);
        // On the unit circle the two arcs are 0.2 apart across the seam.
        assert!((w2(&a, &b).unwrap() - 0.8).abs() < 1e-12);
        assert!((w2_circle(&a, &b, 1.0).unwrap() - 0.2).abs() < 1e-12);
    }
}
