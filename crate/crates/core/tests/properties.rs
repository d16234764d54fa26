use proptest::prelude::*;
use wassflow::domain::{k_modulus, ric_n, shift_normalize};
use wassflow::entropy::h_m;
use wassflow::flow::jko::{JkoConfig, JkoSolver};
use wassflow::flow::pde::{PdeSolver, Stepping};
use wassflow::measures::{to_density, to_quantile};
use wassflow::scenario::{bump_mixture, Bump};
use wassflow::transport::{exchange_gain, monotone_coupling, w2, w2_piecewise, DiscreteMeasure};
use wassflow::{Domain1D, GridMeasure, MParam, QuantileRep, ReferencePotential};

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![0.3..0.99f64, 1.01..3.0f64]
}

fn quadratic(m: f64, cells: usize) -> (Domain1D, ReferencePotential) {
    let d = Domain1D::segment(-5.0, 5.0, cells).unwrap();
    let raw = ReferencePotential::from_fn(&d, MParam::one_d(m).unwrap(), |x| 0.5 * x * x).unwrap();
    let r = shift_normalize(&raw, &d).unwrap().0;
    (d, r)
}

fn bumps() -> impl Strategy<Value = Vec<Bump>> {
    prop::collection::vec(
        (-1.2..1.2f64, 0.3..0.8f64, 0.2..1.0f64).prop_map(|(center, width, weight)| Bump { center, width, weight }),
        1..4,
    )
}

/// Overlapping bumps, so the support is one interval.
fn connected_bumps() -> impl Strategy<Value = Vec<Bump>> {
    prop::collection::vec(
        (-0.2..0.2f64, 0.3..0.8f64, 0.2..1.0f64).prop_map(|(center, width, weight)| Bump { center, width, weight }),
        1..4,
    )
}

/// Mixture with a small multiple of the reference, so that it is positive
/// wherever the reference is.
fn with_background(d: &Domain1D, r: &ReferencePotential, parts: &[Bump]) -> GridMeasure {
    let mix = bump_mixture(d, parts).unwrap();
    let nu = GridMeasure::reference(r, d).unwrap();
    let rho = mix.rho().iter().zip(nu.rho()).map(|(a, b)| 0.9 * a + 0.1 * b).collect();
    GridMeasure::from_unnormalized(d, rho).unwrap()
}

fn sorted_points(j: usize) -> impl Strategy<Value = QuantileRep> {
    prop::collection::vec(0.01..1.0f64, j + 1).prop_flat_map(|gaps| {
        (-3.0..3.0f64).prop_map(move |start| {
            let mut edges = vec![start];
            for g in &gaps[1..] {
                edges.push(edges.last().unwrap() + g);
            }
            QuantileRep::from_edges(edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exp_inverts_ln(m in exponent(), logt in -4.0..4.0f64) {
        let p = MParam::one_d(m).unwrap();
        let t = 10f64.powf(logt);
        let back = p.exp_m(p.ln_m(t).unwrap()).unwrap();
        prop_assert!((back - t).abs() <= 1e-12 * t.max(1.0));
    }

    #[test]
    fn ln_increasing_and_e_convex(m in exponent(), t in 0.01..20.0f64, step in 1e-3..0.5f64) {
        let p = MParam::one_d(m).unwrap();
        prop_assert!(p.ln_m(t + step).unwrap() > p.ln_m(t).unwrap());
        let (a, b, c) = (p.e_m(t).unwrap(), p.e_m(t + step).unwrap(), p.e_m(t + 2.0 * step).unwrap());
        prop_assert!(a - 2.0 * b + c >= -1e-12 * (1.0 + a.abs() + c.abs()));
    }

    #[test]
    fn modulus_ignores_affine_terms(m in exponent(), slope in -0.5..0.5f64, offset in -0.3..0.3f64) {
        let d = Domain1D::segment(-4.0, 4.0, 400).unwrap();
        let p = MParam::one_d(m).unwrap();
        let base = ReferencePotential::from_fn(&d, p, |x| 0.5 * x * x + 0.1 * x.powi(4)).unwrap();
        let tilted = ReferencePotential::from_fn(&d, p, |x| 0.5 * x * x + 0.1 * x.powi(4) + slope * x + offset).unwrap();
        let (k0, k1) = (k_modulus(&base, &d).unwrap(), k_modulus(&tilted, &d).unwrap());
        prop_assert!((k0 - k1).abs() <= 1e-10 * (1.0 + k0.abs()), "{k0} vs {k1}");
    }

    #[test]
    fn flat_weight_has_zero_curvature(m in exponent(), cells in 8usize..200) {
        let d = Domain1D::segment(-1.0, 2.0, cells).unwrap();
        let p = MParam::one_d(m).unwrap();
        for i in 1..cells - 1 {
            prop_assert_eq!(ric_n(&d, &p, i).unwrap().value, 0.0);
        }
    }

    #[test]
    fn w2_is_a_metric(a in sorted_points(16), b in sorted_points(16), c in sorted_points(16)) {
        let (ab, bc, ac) = (w2(&a, &b).unwrap(), w2(&b, &c).unwrap(), w2(&a, &c).unwrap());
        prop_assert!(ac <= ab + bc + 1e-10);
        prop_assert!((ab - w2(&b, &a).unwrap()).abs() < 1e-14);
        prop_assert!(w2(&a, &a).unwrap() == 0.0);
    }

    #[test]
    fn translation_moves_by_its_length(a in sorted_points(12), shift in -2.0..2.0f64) {
        let moved = a.translate(shift);
        prop_assert!((w2_piecewise(&a, &moved).unwrap() - shift.abs()).abs() < 1e-12);
    }

    #[test]
    fn monotone_coupling_admits_no_improving_exchange(
        xs in prop::collection::vec((-3.0..3.0f64, 0.05..1.0f64), 1..7),
        ys in prop::collection::vec((-3.0..3.0f64, 0.05..1.0f64), 1..7),
    ) {
        let norm = |v: Vec<(f64, f64)>| {
            let s: f64 = v.iter().map(|a| a.1).sum();
            DiscreteMeasure::new(v.into_iter().map(|(x, w)| (x, w / s)).collect()).unwrap()
        };
        let (mu, nu) = (norm(xs), norm(ys));
        let c = monotone_coupling(&mu, &nu);
        prop_assert!(c.is_monotone());
        prop_assert!(c.marginal_error(&mu, &nu) < 1e-12);
        prop_assert!(exchange_gain(&c) >= -1e-12);
    }

    #[test]
    fn quantile_round_trip_keeps_moments(parts in connected_bumps(), j in 64usize..512) {
        let d = Domain1D::segment(-3.0, 3.0, 600).unwrap();
        let mu = bump_mixture(&d, &parts).unwrap();
        let back = to_density(&to_quantile(&mu, &d, j).unwrap(), &d).unwrap();
        let tol = 2.0 * (d.h() + 1.0 / j as f64);
        prop_assert!(mu.l1_distance(&back, &d) <= tol);
        prop_assert!((mu.mean(&d) - back.mean(&d)).abs() <= tol);
        prop_assert!((mu.variance(&d) - back.variance(&d)).abs() <= tol);
    }

    #[test]
    fn entropy_is_nonnegative(m in prop_oneof![0.55..0.99f64, 1.01..2.5f64], parts in bumps()) {
        let (d, r) = quadratic(m, 500);
        let mu = bump_mixture(&d, &parts).unwrap();
        let h = h_m(r.p(), &mu, &r, &d).unwrap();
        prop_assert!(h.value >= -1e-9);
        if h.value.is_finite() {
            prop_assert!((h.value - h.ac_part - h.singular_part).abs() <= 1e-12 * (1.0 + h.value.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn finite_volume_step_conserves_mass_and_sign(m in prop_oneof![0.6..0.95f64, 1.1..2.5f64], parts in bumps()) {
        let (d, r) = quadratic(m, 200);
        let solver = PdeSolver::new(&d, &r).unwrap();
        let mut mu = with_background(&d, &r, &parts);
        for _ in 0..20 {
            mu = solver.step_measure(&mu, 1e-3, Stepping::Adaptive).unwrap();
            prop_assert!((mu.total_mass() - 1.0).abs() < 1e-12);
            prop_assert!(mu.rho().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn minimizing_step_descends(m in prop_oneof![0.7..0.95f64, 1.1..2.0f64], parts in bumps(), delta in 1e-3..5e-2f64) {
        let (d, r) = quadratic(m, 400);
        let solver = JkoSolver::new(&d, &r, 128).unwrap();
        let q = to_quantile(&bump_mixture(&d, &parts).unwrap(), &d, 128).unwrap();
        let step = solver.step(&q, &JkoConfig::with_delta(delta)).unwrap();
        let w = w2_piecewise(&q, &step.q).unwrap();
        let (h0, h1) = (solver.energy(&q).unwrap(), solver.energy(&step.q).unwrap());
        prop_assert!(h1 + w * w / (2.0 * delta) <= h0 + 1e-10 * (1.0 + h0.abs()));
    }
}

#[test]
fn each_support_gap_costs_at_most_two_quantile_cells() {
    let d = Domain1D::segment(-3.0, 3.0, 600).unwrap();
    let parts = [
        Bump {
            center: -1.5,
            width: 0.4,
            weight: 1.0,
        },
        Bump {
            center: 0.0,
            width: 0.4,
            weight: 1.0,
        },
        Bump {
            center: 1.5,
            width: 0.4,
            weight: 1.0,
        },
    ];
    let mu = bump_mixture(&d, &parts).unwrap();
    for j in [64, 128, 256] {
        let back = to_density(&to_quantile(&mu, &d, j).unwrap(), &d).unwrap();
        let err = mu.l1_distance(&back, &d);
        assert!(
            err <= 2.0 * (d.h() + 1.0 / j as f64) + 2.0 * 2.0 / j as f64,
            "J = {j}: {err}"
        );
    }
}

#[test]
fn reference_is_stationary_for_both_schemes() {
    for m in [0.75, 1.5, 2.0] {
        let (d, r) = quadratic(m, 400);
        let nu = GridMeasure::reference(&r, &d).unwrap();
        let moved = PdeSolver::new(&d, &r)
            .unwrap()
            .step_measure(&nu, 1e-3, Stepping::Adaptive)
            .unwrap();
        assert!(moved.l1_distance(&nu, &d) < 1e-8, "m = {m}");
        let solver = JkoSolver::new(&d, &r, 256).unwrap();
        let q = solver.ground_state().unwrap();
        let out = solver.step(&q, &JkoConfig::with_delta(1e-2)).unwrap().q;
        assert!(w2_piecewise(&q, &out).unwrap() < 1e-8, "m = {m}");
    }
}

#[test]
fn heavy_tail_moments_settle_or_grow_with_the_domain() {
    let p = MParam::one_d(0.75).unwrap();
    let moments = |q: f64| -> Vec<f64> {
        [25.0, 50.0, 100.0]
            .iter()
            .map(|&l| {
                let d = Domain1D::segment(-l, l, (40.0 * l) as usize).unwrap();
                let raw = ReferencePotential::from_fn(&d, p, |x| 0.5 * x * x).unwrap();
                shift_normalize(&raw, &d).unwrap().0.moment(&d, q)
            })
            .collect()
    };
    // σ decays like |x|^{-8}, so moments below order 7 converge.
    for q in [2.0, 5.0] {
        let v = moments(q);
        assert!((v[2] - v[1]).abs() < 1e-2 * v[2], "q = {q}: {v:?}");
        assert!((v[2] - v[1]).abs() < (v[1] - v[0]).abs(), "q = {q}: {v:?}");
    }
    let v = moments(9.0);
    assert!(v[2] > 3.0 * v[1] && v[1] > 3.0 * v[0], "{v:?}");
}
