use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::k_modulus;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::flow::barenblatt::Barenblatt;
use crate::flow::checks::{compare_jko_pde, weak_residual};
use crate::flow::jko::{JkoConfig, JkoSolver};
use crate::flow::pde::{PdeConfig, PdeSolver};
use crate::flow::FlowTrace;
use crate::inequalities::concentration::{alpha_estimate, classical_limit_bound, conc_bound_check, m_normal_bound};
use crate::inequalities::convexity::convexity_profile;
use crate::inequalities::functional::{hwi_lsi_check, poincare_check, talagrand_check};
use crate::mcalc::{conc_lemma_bounds, limit_check_m_to_1, MParam};
use crate::measures::{to_quantile, GridMeasure};
use crate::report::{Outcome, Verdict};
use crate::scenario::{bump_mixture, Bump, MeasureSpec, Scenario, Setup, Task};

/// Verdicts, scalar results and files produced by one scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub verdicts: Vec<Verdict>,
    pub metrics: BTreeMap<String, f64>,
    /// File name and contents, relative to the run directory.
    pub files: Vec<(String, String)>,
    pub notes: Vec<String>,
}

/// Runs the scenario's task. With `strict`, every comparison tolerance is
/// halved.
pub fn execute(s: &Scenario, strict: bool) -> Result<RunOutput> {
    let setup = s.setup()?;
    let mut out = RunOutput::default();
    match s.task {
        Task::Flow => flow(s, &setup, &mut out)?,
        Task::Pde => pde(s, &setup, &mut out)?,
        Task::Compare => compare(s, &setup, &mut out)?,
        Task::Convexity => convexity(s, &setup, &mut out)?,
        Task::Ineq => ineq(s, &setup, &mut out)?,
        Task::Conc => conc(s, &setup, &mut out)?,
        Task::Calculus => calculus(s, &setup, &mut out)?,
    }
    if strict {
        out.verdicts = out.verdicts.into_iter().map(|v| v.tightened(0.5)).collect();
    }
    Ok(out)
}

fn initial(s: &Scenario, setup: &Setup) -> Result<GridMeasure> {
    let spec = s
        .initial
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("missing initial measure".into()))?;
    s.measure(spec, setup)
}

fn trace_checks(trace: &FlowTrace, p: &MParam, h_max: Option<f64>, out: &mut RunOutput) {
    let first = trace.rows[0];
    let last = *trace.rows.last().expect("trace has a first row");
    if trace.rows.len() > 1 {
        out.verdicts.push(Verdict::compare(
            "energy_nonincreasing",
            p,
            trace.max_energy_increase(),
            0.0,
            1e-9 * (1.0 + first.h_m.abs()),
        ));
    }
    out.verdicts.push(Verdict::compare(
        "mass_conservation",
        p,
        trace.max_mass_error(),
        0.0,
        1e-9,
    ));
    if let Some(bound) = h_max {
        let worst = trace.rows.iter().map(|r| r.h_m).fold(f64::NEG_INFINITY, f64::max);
        out.verdicts.push(Verdict::compare("h_m_bound", p, worst, 0.0, bound));
    }
    out.metrics.insert("initial_h_m".into(), first.h_m);
    out.metrics.insert("final_h_m".into(), last.h_m);
    out.metrics.insert("final_i_m".into(), last.i_m);
    out.metrics.insert("final_w2_to_ref".into(), last.w2_to_ref);
    out.metrics.insert("final_mean".into(), last.mean);
    out.metrics.insert("final_variance".into(), last.variance);
    out.metrics.insert("max_mass_error".into(), trace.max_mass_error());
    out.notes.extend(trace.notes.iter().cloned());
}

fn flow(s: &Scenario, setup: &Setup, out: &mut RunOutput) -> Result<()> {
    let (d, r, prm) = (&setup.domain, &setup.reference, &s.params);
    let mu0 = initial(s, setup)?;
    let solver = JkoSolver::new(d, r, prm.j)?;
    let q0 = to_quantile(&mu0, d, prm.j)?;
    let trace = solver.trajectory(&q0, &JkoConfig::with_delta(prm.delta), prm.t_end, prm.stride)?;
    trace_checks(&trace, &setup.p, prm.h_max, out);
    out.files.push(("trace.csv".into(), trace.to_csv()));
    if let Some(mu) = trace.last() {
        out.files.push(("final_density.csv".into(), mu.to_csv(d)));
    }
    Ok(())
}

fn pde(s: &Scenario, setup: &Setup, out: &mut RunOutput) -> Result<()> {
    let (d, r, prm, p) = (&setup.domain, &setup.reference, &s.params, &setup.p);
    let mu0 = initial(s, setup)?;
    let cfg = PdeConfig {
        dt: prm.dt,
        stepping: prm.stepping,
        stride: prm.stride,
    };
    let trace = PdeSolver::new(d, r)?.trajectory(&mu0, &cfg, prm.t_end)?;
    trace_checks(&trace, p, prm.h_max, out);

    if let Some(MeasureSpec::Barenblatt { t0, center }) = &s.initial {
        let pot = r.potential();
        let pure = d.is_flat() && pot.iter().all(|&v| (v - pot[0]).abs() <= 1e-12 * (1.0 + v.abs()));
        if pure {
            let t = t0 + trace.rows.last().map_or(0.0, |row| row.t);
            let exact = Barenblatt::new(s.m, 1.0, *center)?.sample(d, t)?;
            let err = trace.last().expect("trace has a state").l1_distance(&exact, d);
            out.metrics.insert("final_l1_error".into(), err);
            out.verdicts
                .push(Verdict::compare("barenblatt_l1", p, err, 0.0, prm.tol.unwrap_or(3e-2)));
        } else {
            out.verdicts.push(Verdict::not_applicable(
                "barenblatt_l1",
                p,
                "the source solution needs ψ ≡ 0 and constant Ψ",
            ));
        }
    }

    for src in &prm.phi {
        let phi = Expr::parse(src, &["t", "x"], &s.constants)?;
        let w = weak_residual(&trace, d, r, &phi)?;
        out.metrics.insert(format!("weak_residual[{src}]"), w.residual);
        if phi.is_constant() {
            out.verdicts.push(Verdict::compare(
                &format!("weak_residual[{src}]"),
                p,
                w.residual,
                0.0,
                1e-10,
            ));
        }
    }
    out.files.push(("trace.csv".into(), trace.to_csv()));
    if let Some(mu) = trace.last() {
        out.files.push(("final_density.csv".into(), mu.to_csv(d)));
    }
    Ok(())
}

fn compare(s: &Scenario, setup: &Setup, out: &mut RunOutput) -> Result<()> {
    let (d, r, prm, p) = (&setup.domain, &setup.reference, &s.params, &setup.p);
    let mu0 = initial(s, setup)?;
    let pde = PdeConfig {
        dt: prm.dt,
        stepping: prm.stepping,
        stride: 1,
    };
    let rep = compare_jko_pde(
        &mu0,
        d,
        r,
        &JkoConfig::with_delta(prm.delta),
        prm.j,
        &pde,
        prm.t_end,
        prm.samples,
    )?;
    out.metrics.insert("sup_l1_gap".into(), rep.sup_gap);
    let v = if p.supports_jko_equivalence() {
        Verdict::compare("jko_pde_l1", p, rep.sup_gap, 0.0, prm.tol.unwrap_or(5e-2))
    } else {
        Verdict::not_applicable("jko_pde_l1", p, "m > 2: agreement is recorded, not asserted")
    };
    out.verdicts.push(v);
    let mut csv = String::from("t,l1_gap\n");
    for (t, g) in rep.times.iter().zip(&rep.l1_gaps) {
        let _ = writeln!(csv, "{t},{g}");
    }
    out.files.push(("compare.csv".into(), csv));
    Ok(())
}

fn convexity(s: &Scenario, setup: &Setup, out: &mut RunOutput) -> Result<()> {
    let (d, r, prm, p) = (&setup.domain, &setup.reference, &s.params, &setup.p);
    let mu0 = initial(s, setup)?;
    let target = s
        .target
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("missing target measure".into()))?;
    let mu1 = s.measure(target, setup)?;
    let k = match prm.k {
        Some(k) => k,
        None => k_modulus(r, d)?,
    };
    let prof = convexity_profile(&mu0, &mu1, d, r, k, prm.t_grid, prm.j)?;
    let mut v = match prof.verdict {
        Outcome::NotApplicable => Verdict::not_applicable("convexity_profile", p, prof.notes.join("; ")),
        Outcome::Vacuous => Verdict::compare("convexity_profile", p, 0.0, f64::INFINITY, prof.tol),
        _ => Verdict::compare("convexity_profile", p, -prof.min_margin, 0.0, prof.tol),
    };
    v = v.with_tolerance("K", k);
    out.verdicts.push(v);
    out.metrics.insert("k".into(), k);
    out.metrics.insert("min_margin".into(), prof.min_margin);
    out.metrics.insert("w2".into(), prof.w2);
    if let Some(dk) = prm.probe {
        let probe = convexity_profile(&mu0, &mu1, d, r, k + dk, prm.t_grid, prm.j)?;
        out.metrics.insert("probe_min_margin".into(), probe.min_margin);
        out.metrics.insert(
            "probe_detects".into(),
            f64::from(u8::from(probe.verdict == Outcome::Fail)),
        );
    }
    let mut csv = String::from("t,H,margin\n");
    for ((t, h), m) in prof.t.iter().zip(&prof.h).zip(&prof.margin) {
        let _ = writeln!(csv, "{t},{h},{m}");
    }
    out.files.push(("profile.csv".into(), csv));
    Ok(())
}

/// Random mixture of one to three bumps; for `m > 1` it stays inside the
/// support of the reference measure.
pub fn random_mixture(rng: &mut ChaCha8Rng, setup: &Setup) -> Result<GridMeasure> {
    let (d, r) = (&setup.domain, &setup.reference);
    let x = d.nodes();
    let (lo, hi) = if setup.p.m() > 1.0 {
        let inside: Vec<usize> = (0..x.len()).filter(|&i| r.sigma()[i] > 0.0).collect();
        (x[inside[0]], x[inside[inside.len() - 1]])
    } else {
        let c = x[r.argmin()];
        let half = 0.35 * d.length();
        ((c - half).max(d.a()), (c + half).min(d.b()))
    };
    let half = 0.5 * (hi - lo);
    let k = rng.random_range(1..=3);
    let components: Vec<Bump> = (0..k)
        .map(|_| {
            let width = rng.random_range(0.1..0.45) * half;
            Bump {
                center: rng.random_range(lo + width..=hi - width),
                width,
                weight: rng.random_range(0.2..1.0),
            }
        })
        .collect();
    bump_mixture(d, &components)
}

/// Random polynomial of degree one to four in the centered, scaled variable.
pub fn random_polynomial(rng: &mut ChaCha8Rng, setup: &Setup) -> Vec<f64> {
    let d = &setup.domain;
    let c = d.nodes()[setup.reference.argmin()];
    let scale = 0.25 * d.length();
    let degree = rng.random_range(1..=4);
    let coef: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
    d.nodes()
        .iter()
        .map(|&x| {
            let z = (x - c) / scale;
            coef.iter().rev().fold(0.0, |acc, a| acc * z + a)
        })
        .collect()
}

/// Keeps the verdict with the least tolerance-adjusted slack per check.
#[derive(Default)]
struct Suite {
    worst: BTreeMap<String, Verdict>,
    counts: BTreeMap<String, [usize; 4]>,
}

impl Suite {
    fn add(&mut self, v: Verdict) {
        let slot = match v.verdict {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Vacuous => 2,
            Outcome::NotApplicable => 3,
        };
        self.counts.entry(v.name.clone()).or_default()[slot] += 1;
        let margin = |v: &Verdict| match v.verdict {
            Outcome::Pass | Outcome::Fail => v.slack + v.tolerances.get("abs").copied().unwrap_or(0.0),
            _ => f64::INFINITY,
        };
        let replace = match self.worst.get(&v.name) {
            None => true,
            Some(w) => margin(&v) < margin(w),
        };
        if replace {
            self.worst.insert(v.name.clone(), v);
        }
    }

    fn finish(self, out: &mut RunOutput) {
        for (name, c) in &self.counts {
            for (label, n) in ["passed", "failed", "vacuous", "not_applicable"].iter().zip(c) {
                out.metrics.insert(format!("{name}_{label}"), *n as f64);
            }
        }
        out.verdicts.extend(self.worst.into_values());
    }
}

fn ineq(s: &Scenario, setup: &Setup, out: &mut RunOutput) -> Result<()> {
    let (d, r, prm, p) = (&setup.domain, &setup.reference, &s.params, &setup.p);
    let mut suite = Suite::default();
    let mut max_ratio = 0.0f64;
    let mut lsi_without_talagrand = 0usize;
    let mut check = |mu: &GridMeasure, suite: &mut Suite| -> Result<()> {
        let t = talagrand_check(mu, d, r)?;
        let (hwi, lsi) = hwi_lsi_check(mu, d, r)?;
        if t.verdict == Outcome::Pass && t.rhs > 0.0 {
            max_ratio = max_ratio.max(t.lhs / t.rhs);
        }
        if lsi.verdict == Outcome::Pass && t.verdict == Outcome::Fail {
            lsi_without_talagrand += 1;
        }
        suite.add(t);
        suite.add(hwi);
        suite.add(lsi);
        Ok(())
    };
    if let Some(spec) = &s.initial {
        check(&s.measure(spec, setup)?, &mut suite)?;
    }
    if let Some(src) = &prm.poincare {
        let f = s.expr(src)?;
        let values: Vec<f64> = d.nodes().iter().map(|&x| f.eval(&[x])).collect();
        suite.add(poincare_check(&values, d, r)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    for _ in 0..prm.cases {
        let mu = random_mixture(&mut rng, setup)?;
        check(&mu, &mut suite)?;
        let f = random_polynomial(&mut rng, setup);
        suite.add(poincare_check(&f, d, r)?);
    }
    suite.finish(out);
    out.metrics.insert("talagrand_max_ratio".into(), max_ratio);
    out.verdicts.push(Verdict::compare(
        "lsi_implies_talagrand",
        p,
        lsi_without_talagrand as f64,
        0.0,
        0.0,
    ));
    Ok(())
}

fn conc(s: &Scenario, setup: &Setup, out: &mut RunOutput) -> Result<()> {
    let (d, r, prm, p) = (&setup.domain, &setup.reference, &s.params, &setup.p);
    let rep = alpha_estimate(r, d, &prm.r_grid)?;
    for &theta in &prm.theta {
        for v in conc_bound_check(r, d, &rep, theta)? {
            let name = format!("{}[theta={theta}]", v.name);
            out.verdicts.push(Verdict { name, ..v });
        }
    }
    let mut csv = String::from("r,alpha_lower,bound,slack,family\n");
    for i in 0..rep.r_grid.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            rep.r_grid[i], rep.alpha_lower[i], rep.bound[i], rep.slack[i], rep.family[i]
        );
        out.metrics
            .insert(format!("alpha@{}", rep.r_grid[i]), rep.alpha_lower[i]);
    }
    if p.is_near_classical() && p.supports_concentration_lt1() {
        let k = k_modulus(r, d)?;
        let mut worst = 0.0f64;
        for &x in &prm.r_grid {
            let b = m_normal_bound(p, k, d.omega_mass(), x)?;
            let c = classical_limit_bound(k, x);
            worst = worst.max((b / c - 1.0).abs());
        }
        out.metrics.insert("classical_limit_gap".into(), worst);
        out.verdicts.push(Verdict::compare(
            "classical_limit_agreement",
            p,
            worst,
            0.0,
            prm.tol.unwrap_or(0.05),
        ));
    }
    out.notes.extend(rep.notes.iter().cloned());
    out.files.push(("alpha.csv".into(), csv));
    Ok(())
}

fn calculus(_s: &Scenario, setup: &Setup, out: &mut RunOutput) -> Result<()> {
    let p = &setup.p;
    let m = p.m();
    let ts: Vec<f64> = (0..=200).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 200.0)).collect();
    let mut round_trip = 0.0f64;
    let mut monotone = true;
    let mut prev = f64::NEG_INFINITY;
    for &t in &ts {
        let l = p.ln_m(t)?;
        round_trip = round_trip.max((p.exp_m(l)? - t).abs() / t);
        monotone &= l > prev;
        prev = l;
    }
    out.verdicts
        .push(Verdict::compare("round_trip", p, round_trip, 0.0, 1e-12));
    out.verdicts.push(Verdict::compare(
        "ln_m_increasing",
        p,
        f64::from(u8::from(!monotone)),
        0.0,
        0.0,
    ));
    let mut limit_failures = 0usize;
    for &t in &ts {
        if !limit_check_m_to_1(t, 1e-3)?.holds {
            limit_failures += 1;
        }
    }
    out.verdicts
        .push(Verdict::compare("classical_limit", p, limit_failures as f64, 0.0, 0.0));
    if (m > 0.5 && m < 1.0) || (m > 1.0 && m < 2.0) {
        let mut failures = 0usize;
        let grid: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
        for &a in &grid {
            for &x in &grid {
                if !conc_lemma_bounds(p, a, x)?.holds {
                    failures += 1;
                }
            }
        }
        out.verdicts
            .push(Verdict::compare("conc_lemma", p, failures as f64, 0.0, 0.0));
    } else {
        out.verdicts.push(Verdict::not_applicable(
            "conc_lemma",
            p,
            format!("m = {m} outside (1/2, 1) ∪ (1, 2)"),
        ));
    }
    out.metrics.insert("round_trip_error".into(), round_trip);
    Ok(())
}
