//! Transport-entropy, HWI, log-Sobolev and Poincaré inequalities.
//!
//! All quantities are computed on the grid: `W₂` exactly between
//! cell-uniform densities, `H_m` and `I_m` by the midpoint rule. Tolerances
//! are proportional to the mesh width and recorded in each verdict.

use crate::domain::{k_modulus, Domain1D, ReferencePotential};
use crate::entropy::{fisher_report, h_m};
use crate::error::{invalid, Error, Result};
use crate::inequalities::{curvature_hypothesis, is_normalized};
use crate::measures::GridMeasure;
use crate::report::Verdict;
use crate::transport::w2_grid;

/// Tolerance on `ν(M) = 1`.
const NORMALIZATION_TOL: f64 = 1e-6;

/// Shared hypotheses: normalized reference, `K > 0`, `Ric_N ≥ 0`, admissible `m`.
/// Returns `K` and the hypothesis labels, or the reason they fail.
fn hypotheses(d: &Domain1D, r: &ReferencePotential) -> Result<std::result::Result<(f64, Vec<&'static str>), String>> {
    let m = r.p().m();
    if m == 0.5 {
        return Ok(Err("m = 1/2 is excluded".into()));
    }
    if !is_normalized(d, r, NORMALIZATION_TOL) {
        return Ok(Err(format!("reference mass {} is not 1", r.mass(d))));
    }
    let k = k_modulus(r, d)?;
    if !(k > 0.0) {
        return Ok(Err(format!("K = {k} is not positive")));
    }
    let Some(ric) = curvature_hypothesis(d, r, 1e-9)? else {
        return Ok(Err("Ric_N >= 0 fails at some node".into()));
    };
    Ok(Ok((k, vec!["ν(M) = 1", "Hess Ψ >= K > 0", ric])))
}

/// For `m > 1` the measure must live on the closure of `M0 = {σ > 0}`.
fn outside_m0(mu: &GridMeasure, r: &ReferencePotential) -> bool {
    r.p().m() > 1.0
        && mu
            .rho()
            .iter()
            .zip(r.m0_mask())
            .any(|(&rho, &inside)| rho > 0.0 && !inside)
}

fn require_ac(mu: &GridMeasure) -> Result<()> {
    if mu.has_atoms() {
        return Err(invalid("inequality checks need absolutely continuous measures"));
    }
    Ok(())
}

/// `W₂(μ, ν) ≤ √(2 H_m(μ|ν) / K)`.
pub fn talagrand_check(mu: &GridMeasure, d: &Domain1D, r: &ReferencePotential) -> Result<Verdict> {
    const NAME: &str = "talagrand";
    require_ac(mu)?;
    let p = r.p();
    let (k, hyp) = match hypotheses(d, r)? {
        Ok(v) => v,
        Err(reason) => return Ok(Verdict::not_applicable(NAME, p, reason)),
    };
    if outside_m0(mu, r) {
        return Ok(Verdict::not_applicable(NAME, p, "μ charges the complement of M0"));
    }
    let nu = GridMeasure::reference(r, d)?;
    let w = w2_grid(mu, &nu, d)?;
    let h = h_m(p, mu, r, d)?.value;
    let tol = 2.0 * d.h();
    Ok(Verdict::compare(NAME, p, w, (2.0 * h.max(0.0) / k).sqrt(), tol)
        .with_hypotheses(&hyp)
        .with_hypotheses(&["μ ∈ P²(closure of M0)"])
        .with_tolerance("K", k))
}

/// HWI and log-Sobolev verdicts; vacuous when `I_m` is infinite.
pub fn hwi_lsi_check(mu: &GridMeasure, d: &Domain1D, r: &ReferencePotential) -> Result<(Verdict, Verdict)> {
    require_ac(mu)?;
    let p = r.p();
    let (k, hyp) = match hypotheses(d, r)? {
        Ok(v) => v,
        Err(reason) => {
            return Ok((
                Verdict::not_applicable("hwi", p, reason.clone()),
                Verdict::not_applicable("log_sobolev", p, reason),
            ))
        }
    };
    if outside_m0(mu, r) {
        let reason = "μ charges the complement of M0";
        return Ok((
            Verdict::not_applicable("hwi", p, reason),
            Verdict::not_applicable("log_sobolev", p, reason),
        ));
    }
    let nu = GridMeasure::reference(r, d)?;
    let w = w2_grid(mu, &nu, d)?;
    let h = h_m(p, mu, r, d)?.value;
    let fisher = fisher_report(p, mu, r, d)?;
    let i = fisher.value;
    let tol = 10.0 * d.h() * (1.0 + h.abs());
    let hwi_rhs = if i.is_finite() {
        i.sqrt() * w - 0.5 * k * w * w
    } else {
        f64::INFINITY
    };
    let lsi_rhs = i / (2.0 * k);
    let mut hwi = Verdict::compare("hwi", p, h, hwi_rhs, tol)
        .with_hypotheses(&hyp)
        .with_tolerance("K", k);
    let mut lsi = Verdict::compare("log_sobolev", p, h, lsi_rhs, tol)
        .with_hypotheses(&hyp)
        .with_tolerance("K", k);
    if !i.is_finite() {
        hwi = hwi.with_note("I_m is infinite");
        lsi = lsi.with_note("I_m is infinite");
    }
    if fisher.support_mismatch {
        lsi = lsi.with_note("density differences near the edge of M0 used one-sided stencils");
    }
    Ok((hwi, lsi))
}

/// `∫ f² σ^{m-1} dν ≤ (1/K) ∫ |∂_x(f σ^{m-1})|² dν` for `f` given at the
/// nodes; the `ν`-mean of `f` is subtracted first.
pub fn poincare_check(f: &[f64], d: &Domain1D, r: &ReferencePotential) -> Result<Verdict> {
    const NAME: &str = "poincare";
    if f.len() != d.len() {
        return Err(Error::Mismatch(format!("{} samples for {} nodes", f.len(), d.len())));
    }
    let p = r.p();
    let (k, hyp) = match hypotheses(d, r)? {
        Ok(v) => v,
        Err(reason) => return Ok(Verdict::not_applicable(NAME, p, reason)),
    };
    let m = p.m();
    let sigma = r.sigma();
    let weighted: Vec<f64> = f.iter().zip(sigma).map(|(f, s)| f * s).collect();
    let mean = d.integrate(&weighted) / r.mass(d);
    let g: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let sp: Vec<f64> = sigma
        .iter()
        .map(|&s| if s > 0.0 { s.powf(m - 1.0) } else { 0.0 })
        .collect();
    let lhs_density: Vec<f64> = g
        .iter()
        .zip(sigma)
        .zip(&sp)
        .map(|((g, s), sp)| g * g * sp * s)
        .collect();
    let product: Vec<f64> = g.iter().zip(&sp).map(|(g, sp)| g * sp).collect();
    let rhs_density: Vec<f64> = (0..d.len())
        .map(|i| {
            let (d1, _, _) = d.derivatives(&product, i);
            d1 * d1 * sigma[i]
        })
        .collect();
    let lhs = d.integrate(&lhs_density);
    let rhs = d.integrate(&rhs_density) / k;
    let tol = 10.0 * d.h() * (1.0 + rhs.abs());
    Ok(Verdict::compare(NAME, p, lhs, rhs, tol)
        .with_hypotheses(&hyp)
        .with_hypotheses(&["∫ f dν = 0 (enforced)"])
        .with_tolerance("K", k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::shift_normalize;
    use crate::mcalc::MParam;
    use crate::report::Outcome;

    fn setup(m: f64) -> (Domain1D, ReferencePotential) {
        let d = Domain1D::segment(-6.0, 6.0, 1200).unwrap();
        let p = MParam::one_d(m).unwrap();
        let r = ReferencePotential::from_fn(&d, p, |x| x * x / 2.0).unwrap();
        let (r, _) = shift_normalize(&r, &d).unwrap();
        (d, r)
    }

    #[test]
    fn reference_gives_zero_sides() {
        for m in [0.75, 1.5] {
            let (d, r) = setup(m);
            let nu = GridMeasure::reference(&r, &d).unwrap();
            let t = talagrand_check(&nu, &d, &r).unwrap();
            assert_eq!(t.verdict, Outcome::Pass);
            assert!(t.lhs.abs() < 1e-12 && t.rhs.abs() < 1e-6);
            let (hwi, lsi) = hwi_lsi_check(&nu, &d, &r).unwrap();
            assert_eq!(hwi.verdict, Outcome::Pass);
            assert_eq!(lsi.verdict, Outcome::Pass);
            assert!(lsi.lhs.abs() < 1e-9);
        }
    }

    #[test]
    fn zero_function_is_trivial() {
        let (d, r) = setup(0.75);
        let v = poincare_check(&vec![0.0; d.len()], &d, &r).unwrap();
        assert_eq!(v.verdict, Outcome::Pass);
        assert_eq!(v.lhs, 0.0);
        assert_eq!(v.rhs, 0.0);
    }

    #[test]
    fn unnormalized_reference_is_not_applicable() {
        let d = Domain1D::segment(-6.0, 6.0, 600).unwrap();
        let p = MParam::one_d(0.75).unwrap();
        let r = ReferencePotential::from_fn(&d, p, |x| x * x / 2.0).unwrap();
        let nu = GridMeasure::reference(&r, &d).unwrap();
        assert_eq!(talagrand_check(&nu, &d, &r).unwrap().verdict, Outcome::NotApplicable);
    }
}
