//! Transport-entropy, HWI, log-Sobolev and Poincaré checks on random inputs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wassflow::inequalities::functional::{hwi_lsi_check, poincare_check, talagrand_check};
use wassflow::report::SuiteSummary;
use wassflow::scenario::{random_mixture, random_polynomial, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for m in [0.75, 1.5] {
        let s = Scenario::from_json(&format!(
            r#"{{"name": "ineq", "task": "ineq", "m": {m},
                "domain": {{"a": -6, "b": 6, "cells": 1200}}, "potential": "x^2/2"}}"#
        ))?;
        let setup = s.setup()?;
        let (d, r) = (&setup.domain, &setup.reference);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut verdicts = Vec::new();
        for _ in 0..100 {
            let mu = random_mixture(&mut rng, &setup)?;
            verdicts.push(talagrand_check(&mu, d, r)?);
            let (hwi, lsi) = hwi_lsi_check(&mu, d, r)?;
            verdicts.extend([hwi, lsi]);
            verdicts.push(poincare_check(&random_polynomial(&mut rng, &setup), d, r)?);
        }
        for name in ["talagrand", "hwi", "log_sobolev", "poincare"] {
            let v: Vec<_> = verdicts.iter().filter(|v| v.name == name).cloned().collect();
            let s = SuiteSummary::of(&v);
            println!(
                "m = {m}, {name}: {}/{} pass, min slack {:.3e}",
                s.passed, s.total, s.min_slack
            );
        }
    }
    Ok(())
}
