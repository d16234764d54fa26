//! Quadratic Wasserstein distance from quantile functions, checked against a
//! linear program on small empirical measures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wassflow::measures::to_quantile;
use wassflow::transport::{displacement, w2_discrete, w2_grid, w2_lp_oracle, w2_piecewise, DiscreteMeasure};
use wassflow::{Domain1D, GridMeasure};

fn main() -> wassflow::Result<()> {
    let d = Domain1D::segment(-4.0, 4.0, 800)?;
    let a = GridMeasure::from_fn(&d, |x| (-(x + 1.0) * (x + 1.0)).exp())?;
    let b = GridMeasure::from_fn(&d, |x| (-2.0 * (x - 1.5) * (x - 1.5)).exp())?;
    let (qa, qb) = (to_quantile(&a, &d, 512)?, to_quantile(&b, &d, 512)?);
    println!(
        "grid W2 {:.6}, quantile W2 {:.6}",
        w2_grid(&a, &b, &d)?,
        w2_piecewise(&qa, &qb)?
    );
    for t in [0.25, 0.5, 0.75] {
        let mid = displacement(&qa, &qb, t)?;
        println!(
            "t = {t}: W2(a, γ_t) / W2(a, b) = {:.6}",
            w2_piecewise(&qa, &mid)? / w2_piecewise(&qa, &qb)?
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [4, 8, 12] {
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let (mu, nu) = (DiscreteMeasure::uniform(&xs)?, DiscreteMeasure::uniform(&ys)?);
        println!(
            "n = {n}: sorted {:.9}, LP {:.9}",
            w2_discrete(&mu, &nu),
            w2_lp_oracle(&mu, &nu)?
        );
    }
    Ok(())
}
