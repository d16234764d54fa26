//! Minimizing-movement and finite-volume trajectories from one start, with
//! the L1 gap shrinking as both discretizations are refined.

use wassflow::domain::shift_normalize;
use wassflow::flow::checks::compare_jko_pde;
use wassflow::flow::jko::JkoConfig;
use wassflow::flow::pde::{PdeConfig, Stepping};
use wassflow::measures::MGaussianBuilder;
use wassflow::{Domain1D, MParam, ReferencePotential};

fn main() -> wassflow::Result<()> {
    let p = MParam::one_d(0.75)?;
    for (cells, j, delta) in [(128, 128, 1e-2), (256, 256, 5e-3), (512, 512, 2.5e-3)] {
        let d = Domain1D::segment(-5.0, 5.0, cells)?;
        let (r, _) = shift_normalize(&ReferencePotential::from_fn(&d, p, |x| 0.5 * x * x)?, &d)?;
        let mu0 = MGaussianBuilder::new(p, 1.0, 0.3).tail_tol(1e-3).build(&d)?.measure;
        let pde = PdeConfig {
            dt: 1e-4,
            stepping: Stepping::Adaptive,
            stride: 1,
        };
        let rep = compare_jko_pde(&mu0, &d, &r, &JkoConfig::with_delta(delta), j, &pde, 0.5, 10)?;
        println!("cells {cells}, J {j}, δ {delta}: sup L1 gap {:.4e}", rep.sup_gap);
    }
    Ok(())
}
