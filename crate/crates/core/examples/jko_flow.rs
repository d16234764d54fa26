//! Minimizing-movement trajectory from a two-bump start toward the reference
//! measure.

use wassflow::domain::shift_normalize;
use wassflow::flow::jko::{JkoConfig, JkoSolver};
use wassflow::measures::to_quantile;
use wassflow::scenario::{bump_mixture, Bump};
use wassflow::{Domain1D, MParam, ReferencePotential};

fn main() -> wassflow::Result<()> {
    let d = Domain1D::segment(-4.0, 4.0, 400)?;
    let p = MParam::one_d(1.5)?;
    let (r, _) = shift_normalize(&ReferencePotential::from_fn(&d, p, |x| 0.5 * x * x)?, &d)?;
    let mu0 = bump_mixture(
        &d,
        &[
            Bump {
                center: -0.8,
                width: 0.5,
                weight: 1.0,
            },
            Bump {
                center: 0.9,
                width: 0.4,
                weight: 0.5,
            },
        ],
    )?;
    let solver = JkoSolver::new(&d, &r, 256)?;
    let trace = solver.trajectory(&to_quantile(&mu0, &d, 256)?, &JkoConfig::with_delta(1e-2), 3.0, 25)?;
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "H_m", "I_m", "W2 to ref");
    for row in &trace.rows {
        println!(
            "{:>6.2} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.t, row.h_m, row.i_m, row.w2_to_ref
        );
    }
    Ok(())
}
