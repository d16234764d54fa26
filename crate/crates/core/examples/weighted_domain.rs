//! Builds a weighted segment, normalizes a quadratic reference potential and
//! reports its convexity modulus and the resulting m-Gaussian.

use wassflow::domain::{k_modulus, shift_normalize};
use wassflow::measures::MGaussianBuilder;
use wassflow::{Domain1D, MParam, ReferencePotential};

fn main() -> wassflow::Result<()> {
    let d = Domain1D::segment(-6.0, 6.0, 1200)?.with_psi(|x| 0.05 * x * x)?;
    for m in [0.75, 1.5] {
        let p = MParam::one_d(m)?;
        let raw = ReferencePotential::from_fn(&d, p, |x| 0.5 * x * x)?;
        let (r, shift) = shift_normalize(&raw, &d)?;
        println!(
            "m = {m}: shift {shift:.6}, K = {:.4}, argmin x = {:.3}",
            k_modulus(&r, &d)?,
            d.nodes()[r.argmin()]
        );
    }

    let flat = Domain1D::segment(-6.0, 6.0, 1200)?;
    let g = MGaussianBuilder::new(MParam::one_d(0.75)?, 0.5, 0.4)
        .tail_tol(1e-3)
        .build(&flat)?;
    println!(
        "m-Gaussian: mean {:.4}, variance {:.4}, truncated at ±{:.3}, tail mass {:.2e}",
        g.measure.mean(&flat),
        g.measure.variance(&flat),
        g.truncation_radius,
        g.tail_mass
    );
    Ok(())
}
