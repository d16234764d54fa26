//! Concentration function of m-Gaussian references and its explicit bounds,
//! then the decay of α(1) as the curvature grows.

use wassflow::domain::shift_normalize;
use wassflow::inequalities::concentration::{alpha_estimate, conc_bound_check, k_sweep};
use wassflow::{Domain1D, MParam, ReferencePotential};

fn main() -> wassflow::Result<()> {
    let d = Domain1D::segment(-6.0, 6.0, 2400)?;
    let radii = [0.25, 0.5, 1.0, 1.5, 2.0];
    for m in [0.75, 1.5] {
        let p = MParam::one_d(m)?;
        let (r, _) = shift_normalize(&ReferencePotential::from_fn(&d, p, |x| 0.5 * x * x)?, &d)?;
        let rep = alpha_estimate(&r, &d, &radii)?;
        for (i, radius) in radii.iter().enumerate() {
            println!(
                "m = {m}, r = {radius}: α ≥ {:.4e}, {} bound {:.4e}, attained by {}",
                rep.alpha_lower[i], rep.bound_name, rep.bound[i], rep.family[i]
            );
        }
        for v in conc_bound_check(&r, &d, &rep, 0.0)? {
            println!("  {}: {:?}, slack {:.3e}", v.name, v.verdict, v.slack);
        }
    }
    for (k, a) in k_sweep(&d, MParam::one_d(0.75)?, &[1.0, 4.0, 16.0, 64.0], 1.0)? {
        println!("K = {k}: α(1) ≥ {a:.4e}");
    }
    Ok(())
}
