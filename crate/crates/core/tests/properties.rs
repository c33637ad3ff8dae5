use proptest::prelude::*;

use trace_lab::operator::{solve_dirichlet, SolverOptions};
use trace_lab::trace::normal_derivative;
use trace_lab::{Domain, DomainSpec, Measure, Potential, TraceOrder};

fn atom_list(dim: usize) -> impl Strategy<Value = Vec<([f64; 2], f64)>> {
    let point = if dim == 1 {
        (0.02f64..0.98).prop_map(|x| [x, 0.0]).boxed()
    } else {
        (0.0f64..0.95, 0.0f64..std::f64::consts::TAU)
            .prop_map(|(r, t)| [r * t.cos(), r * t.sin()])
            .boxed()
    };
    prop::collection::vec((point, -3.0f64..3.0), 0..5)
}

fn measure(atoms: &[([f64; 2], f64)]) -> Measure {
    atoms.iter().fold(Measure::zero(), |m, &(p, w)| m.with_atom(p, w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn total_variation_triangle_inequality(a in atom_list(1), b in atom_list(1), c in -2.0f64..2.0) {
        let d = Domain::build(DomainSpec::interval(32)).unwrap();
        let ma = measure(&a).with_density(trace_lab::Density::uniform(c));
        let mb = measure(&b);
        let sum = ma.sum(&mb).total_variation(&d).unwrap();
        prop_assert!(sum <= ma.total_variation(&d).unwrap() + mb.total_variation(&d).unwrap() + 1e-12);
    }

    #[test]
    fn mollification_is_linear(a in atom_list(1), b in atom_list(1), s in -2.0f64..2.0) {
        let a: Vec<_> = a.into_iter().map(|(p, w)| ([p[0].clamp(0.2, 0.8), 0.0], w)).collect();
        let b: Vec<_> = b.into_iter().map(|(p, w)| ([p[0].clamp(0.2, 0.8), 0.0], w)).collect();
        let d = Domain::build(DomainSpec::interval(64)).unwrap();
        let (ma, mb) = (measure(&a), measure(&b));
        let combined = ma.scaled(s).sum(&mb).mollify(8, &d).unwrap();
        let fa = ma.mollify(8, &d).unwrap();
        let fb = mb.mollify(8, &d).unwrap();
        for i in 0..d.len() {
            prop_assert!((combined[i] - (s * fa[i] + fb[i])).abs() < 1e-9 * (1.0 + combined[i].abs()));
        }
    }

    #[test]
    fn solve_and_trace_are_linear(a in atom_list(2), b in atom_list(2), s in -2.0f64..2.0, c in 0.0f64..10.0) {
        let d = Domain::build(DomainSpec::disk(6)).unwrap();
        let v = Potential::constant(c);
        let opts = SolverOptions::default();
        let (ma, mb) = (measure(&a), measure(&b));
        let u = solve_dirichlet(&d, &v, &ma.scaled(s).sum(&mb), &opts).unwrap().field;
        let ua = solve_dirichlet(&d, &v, &ma, &opts).unwrap().field;
        let ub = solve_dirichlet(&d, &v, &mb, &opts).unwrap().field;
        let scale = 1.0 + u.max_abs();
        for i in 0..d.len() {
            prop_assert!((u[i] - (s * ua[i] + ub[i])).abs() < 1e-9 * scale);
        }
        let t = normal_derivative(&d, &u, TraceOrder::First).unwrap();
        let ta = normal_derivative(&d, &ua, TraceOrder::First).unwrap();
        let tb = normal_derivative(&d, &ub, TraceOrder::First).unwrap();
        for j in 0..d.boundary_len() {
            prop_assert!((t.values[j] - (s * ta.values[j] + tb.values[j])).abs() < 1e-8 * scale / d.h());
        }
    }

    #[test]
    fn truncation_is_monotone(k in 0.5f64..50.0, dk in 0.0f64..50.0, alpha in 0.5f64..3.0) {
        let d = Domain::build(DomainSpec::unit_square(10)).unwrap();
        let v = Potential::power_distance(alpha);
        let lo = v.truncate(k).sample(&d).unwrap();
        let hi = v.truncate(k + dk).sample(&d).unwrap();
        let full = v.sample(&d).unwrap();
        for i in 0..d.len() {
            prop_assert!(lo[i] <= hi[i] && hi[i] <= full[i]);
            prop_assert!(lo[i] <= k);
        }
        let lo = v.truncate(k).weighted_l1(&d).integral.values;
        let hi = v.truncate(k + dk).weighted_l1(&d).integral.values;
        for (a, b) in lo.iter().zip(&hi) {
            prop_assert!(a <= &(b + 1e-12));
        }
    }

    #[test]
    fn distance_is_lipschitz(x in 0.01f64..0.99, y in 0.01f64..0.99, dx in -0.3f64..0.3, dy in -0.3f64..0.3) {
        for spec in [DomainSpec::unit_square(8), DomainSpec::disk(8)] {
            let p = [x * 0.7, y * 0.7];
            let q = [p[0] + dx * 0.5, p[1] + dy * 0.5];
            if let (Ok(a), Ok(b)) = (spec.distance_to_boundary(p), spec.distance_to_boundary(q)) {
                prop_assert!((a - b).abs() <= (dx * 0.5).hypot(dy * 0.5) + 1e-12);
            }
        }
    }

    #[test]
    fn maximum_and_comparison_principles(a in atom_list(1), c in 0.0f64..20.0, extra in 0.0f64..20.0) {
        let d = Domain::build(DomainSpec::interval(48)).unwrap();
        let m = measure(&a.into_iter().map(|(p, w)| (p, w.abs())).collect::<Vec<_>>());
        let opts = SolverOptions::default();
        let u = solve_dirichlet(&d, &Potential::constant(c), &m, &opts).unwrap().field;
        let w = solve_dirichlet(&d, &Potential::constant(c + extra), &m, &opts).unwrap().field;
        for i in 0..d.len() {
            prop_assert!(u[i] >= -1e-12);
            prop_assert!(w[i] <= u[i] + 1e-9);
        }
    }
}

#[test]
fn refinement_halves_h_and_keeps_boundary_measure() {
    for spec in [DomainSpec::interval(8), DomainSpec::disk(8), DomainSpec::unit_square(8)] {
        let coarse = Domain::build(spec).unwrap();
        let fine = Domain::build(spec.refined(2)).unwrap();
        assert!((fine.h() - coarse.h() / 2.0).abs() < 1e-12);
        let total: f64 = fine.boundary().iter().map(|b| b.weight).sum();
        let exact = match spec {
            DomainSpec::Interval { .. } => 2.0,
            DomainSpec::Disk { .. } => 2.0 * std::f64::consts::PI,
            DomainSpec::Rectangle { .. } => 4.0,
        };
        assert!((total - exact).abs() < 0.01 * exact);
    }
}
