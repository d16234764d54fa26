//! Deformed logarithm and exponential for a few exponents.

use wassflow::mcalc::{limit_check_m_to_1, MParam};

fn main() -> wassflow::Result<()> {
    let ts = [0.1, 0.5, 1.0, 2.0, 10.0];
    println!(
        "{:>6} {:>8} {:>12} {:>12} {:>12}",
        "m", "t", "ln_m(t)", "exp_m(ln)", "e_m(t)"
    );
    for m in [0.6, 0.75, 1.5, 2.0] {
        let p = MParam::one_d(m)?;
        for &t in &ts {
            let l = p.ln_m(t)?;
            println!("{m:>6} {t:>8} {l:>12.6} {:>12.6} {:>12.6}", p.exp_m(l)?, p.e_m(t)?);
        }
    }
    for eps in [1e-2, 1e-3, 1e-4] {
        let r = limit_check_m_to_1(2.0, eps)?;
        println!(
            "m = 1 ± {eps:e}: |ln_m - ln| = {:.3e}, bound {:.3e}",
            r.ln_deviation, r.ln_bound
        );
    }
    Ok(())
}
