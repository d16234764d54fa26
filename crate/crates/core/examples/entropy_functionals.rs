//! Relative entropy and Fisher information of translated m-Gaussians.

use wassflow::entropy::{fisher_i_m, h_m, tsallis};
use wassflow::measures::MGaussianBuilder;
use wassflow::{Domain1D, MParam, ReferencePotential};

fn main() -> wassflow::Result<()> {
    let d = Domain1D::segment(-6.0, 6.0, 2400)?;
    for m in [0.75, 1.5, 2.0] {
        let p = MParam::one_d(m)?;
        let g = MGaussianBuilder::new(p, 0.0, 0.5).tail_tol(1e-4).build(&d)?;
        let r: &ReferencePotential = &g.reference;
        println!("m = {m}");
        for shift in [0.0, 0.25, 0.5, 1.0] {
            let mu = MGaussianBuilder::new(p, shift, 0.5).tail_tol(1e-4).build(&d)?.measure;
            let h = h_m(&p, &mu, r, &d)?;
            println!(
                "  shift {shift:4}: H_m {:.6e}, I_m {:.6e}, Tsallis {:.6}",
                h.value,
                fisher_i_m(&p, &mu, r, &d)?,
                tsallis(&p, &mu, &d)?
            );
        }
    }
    Ok(())
}
