//! Entropy along displacement geodesics: the measured modulus holds, a larger
//! one is refuted, and a double well is not convex.

use wassflow::domain::{k_modulus, shift_normalize};
use wassflow::inequalities::convexity::convexity_profile;
use wassflow::measures::MGaussianBuilder;
use wassflow::scenario::{bump_mixture, Bump};
use wassflow::{Domain1D, MParam, ReferencePotential};

fn main() -> wassflow::Result<()> {
    let p = MParam::one_d(0.75)?;
    let d = Domain1D::segment(-6.0, 6.0, 1200)?;
    let (r, _) = shift_normalize(&ReferencePotential::from_fn(&d, p, |x| 0.5 * x * x)?, &d)?;
    let k = k_modulus(&r, &d)?;
    let a = MGaussianBuilder::new(p, -0.8, 0.3).tail_tol(1e-3).build(&d)?.measure;
    let b = MGaussianBuilder::new(p, 0.7, 0.31).tail_tol(1e-3).build(&d)?.measure;
    for kk in [k, k + 0.5] {
        let prof = convexity_profile(&a, &b, &d, &r, kk, 16, 512)?;
        println!(
            "quadratic, K = {kk:.3}: min margin {:.3e} -> {:?}",
            prof.min_margin, prof.verdict
        );
    }

    let dw = Domain1D::segment(-3.0, 3.0, 1200)?;
    let (r, _) = shift_normalize(
        &ReferencePotential::from_fn(&dw, p, |x| 2.0 * (x * x - 1.0).powi(2))?,
        &dw,
    )?;
    let bump = |c| {
        bump_mixture(
            &dw,
            &[Bump {
                center: c,
                width: 0.3,
                weight: 1.0,
            }],
        )
    };
    let prof = convexity_profile(&bump(-1.0)?, &bump(1.0)?, &dw, &r, 0.0, 16, 512)?;
    println!(
        "double well (K = {:.2}), K = 0: min margin {:.3} -> {:?}",
        k_modulus(&r, &dw)?,
        prof.min_margin,
        prof.verdict
    );
    Ok(())
}
