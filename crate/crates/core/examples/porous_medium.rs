//! Finite-volume porous medium flow started from a source solution, compared
//! with the exact self-similar profile.

use wassflow::flow::barenblatt::Barenblatt;
use wassflow::flow::pde::{PdeConfig, PdeSolver, Stepping};
use wassflow::{Domain1D, MParam, ReferencePotential};

fn main() -> wassflow::Result<()> {
    let d = Domain1D::segment(-3.0, 3.0, 600)?;
    for m in [1.5, 2.0, 3.0] {
        let r = ReferencePotential::from_fn(&d, MParam::one_d(m)?, |_| 0.0)?;
        let source = Barenblatt::new(m, 1.0, 0.0)?;
        let t0 = 0.05;
        let cfg = PdeConfig {
            dt: 1e-4,
            stepping: Stepping::Adaptive,
            stride: 2500,
        };
        let trace = PdeSolver::new(&d, &r)?.trajectory(&source.sample(&d, t0)?, &cfg, 1.0)?;
        for (row, mu) in trace.rows.iter().zip(&trace.measures) {
            let exact = source.sample(&d, t0 + row.t)?;
            println!(
                "m = {m}, t = {:.2}: L1 error {:.3e}, support radius {:.3}",
                row.t,
                mu.l1_distance(&exact, &d),
                source.support_radius(t0 + row.t)
            );
        }
    }
    Ok(())
}
