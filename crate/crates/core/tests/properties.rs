use std::f64::consts::PI;

use orthosteer::dynamics::{coupling_displacement, GnhiState, Interval, NhiState};
use orthosteer::fuel_l1::{fuel_constants, fuel_min};
use orthosteer::lie::{hat, vee, PiPolicy, Rotation};
use orthosteer::optimal_energy::{cheb_optimal_inputs, weighted_cost, WeightedCost};
use orthosteer::orthopoly::{BasisElement, Domain};
use orthosteer::signal::InputSignal;
use orthosteer::steering::{plan_gnhi, plan_nhi, SteeringFamily};
use proptest::prelude::*;

fn leg(n: usize, s: f64) -> InputSignal<f64> {
    InputSignal::basis(BasisElement::legendre(n).unwrap(), s, false)
}

fn family() -> impl Strategy<Value = SteeringFamily<f64>> {
    prop_oneof![
        Just(SteeringFamily::Legendre),
        Just(SteeringFamily::ChebyshevFirst),
        Just(SteeringFamily::ChebyshevSecond),
        Just(SteeringFamily::Trig),
        (-0.5f64..=0.0).prop_map(|a| SteeringFamily::Jacobi { alpha: a, beta: a }),
    ]
}

fn coord() -> impl Strategy<Value = f64> {
    -5.0f64..5.0
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coupling_is_bilinear_and_antisymmetric(
        n1 in 1usize..7, n2 in 1usize..7, n3 in 0usize..7,
        a in -3.0f64..3.0, b in -3.0f64..3.0, k in -3.0f64..3.0,
    ) {
        let iv = Interval::of(Domain::Canonical);
        let u = leg(n1, a).plus(&leg(n3, b)).unwrap();
        let v = leg(n2, 1.0);
        let lhs = coupling_displacement(&u, &v.scaled(k), iv).unwrap();
        let rhs = k * (coupling_displacement(&leg(n1, a), &v, iv).unwrap()
            + coupling_displacement(&leg(n3, b), &v, iv).unwrap());
        prop_assert!((lhs - rhs).abs() < 1e-10);
        let swap = coupling_displacement(&v, &u, iv).unwrap();
        prop_assert!((coupling_displacement(&u, &v, iv).unwrap() + swap).abs() < 1e-10);
    }

    #[test]
    fn same_parity_pairs_do_not_couple(n in 1usize..6, m in 1usize..6) {
        let (n, m) = (2 * n, 2 * m);
        let d = coupling_displacement(&leg(n, 1.0), &leg(m, 1.0), Interval::of(Domain::Canonical)).unwrap();
        prop_assert!(d.abs() < 1e-12);
    }

    #[test]
    fn symmetric_families_have_index_parity(n in 0usize..12, t in 0.0f64..1.0, a in -0.9f64..0.9) {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for b in [
            BasisElement::legendre(n).unwrap(),
            BasisElement::chebyshev_first(n).unwrap(),
            BasisElement::chebyshev_second(n).unwrap(),
            BasisElement::jacobi(a, a, n).unwrap(),
        ] {
            let (p, q) = (b.eval(t).unwrap(), b.eval(-t).unwrap());
            prop_assert!((q - sign * p).abs() <= 1e-12 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn nhi_plans_reach_their_targets(
        fam in family(),
        x0 in [coord(), coord(), coord()],
        xf in [coord(), coord(), coord()],
    ) {
        let plan = plan_nhi(NhiState::from_slice(&x0), NhiState::from_slice(&xf), fam, fam.default_pair(), Domain::Canonical).unwrap();
        prop_assert!(plan.endpoint_error(4000).unwrap() < 1e-6);
    }

    #[test]
    fn gnhi_plans_reach_their_targets(
        fam in family(),
        s0 in prop::collection::vec(coord(), 10),
        sf in prop::collection::vec(coord(), 10),
    ) {
        let plan = plan_gnhi(&GnhiState::from_flat(4, &s0).unwrap(), &GnhiState::from_flat(4, &sf).unwrap(), fam, Domain::Canonical).unwrap();
        prop_assert!(plan.endpoint_error(4000).unwrap() < 1e-6);
    }

    #[test]
    fn optimal_cost_ignores_split_angle(a in 0.05f64..4.0, neg in any::<bool>(), phi in 0.0f64..(2.0 * PI)) {
        let a = if neg { -a } else { a };
        let base = cheb_optimal_inputs(a, None).unwrap();
        let s = cheb_optimal_inputs(a, Some(phi)).unwrap();
        let cost = WeightedCost::chebyshev();
        let iv = Interval::of(Domain::Canonical);
        let j0 = weighted_cost(&base.u1, &base.u2, &cost).unwrap();
        prop_assert!((weighted_cost(&s.u1, &s.u2, &cost).unwrap() - j0).abs() < 1e-8);
        prop_assert!((j0 - a.abs()).abs() < 1e-8);
        prop_assert!((coupling_displacement(&s.u1, &s.u2, iv).unwrap() - a).abs() < 1e-8);
    }

    #[test]
    fn fuel_minimum_scales_with_root_of_target(a in 0.01f64..10.0, k in 0.1f64..10.0) {
        // J(b1, b2) is homogeneous of degree one, and b1 b2 = a / D.
        let (u1, u2) = SteeringFamily::Legendre.pair_signals(SteeringFamily::<f64>::Legendre.default_pair(), Domain::Canonical).unwrap();
        let iv = Interval::of(Domain::Canonical);
        let j = |a: f64| fuel_min(&fuel_constants(&u1, &u2, a, iv).unwrap()).unwrap().min_j;
        let (j1, j2) = (j(a), j(k * k * a));
        prop_assert!((j2 - k * j1).abs() <= 1e-9 * (1.0 + j2));
    }

    #[test]
    fn hat_is_the_cross_product(u in vec3(), w in vec3()) {
        let lhs = hat(u).apply(w);
        let rhs = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
        for i in 0..3 {
            prop_assert!((lhs[i] - rhs[i]).abs() < 1e-12);
        }
        prop_assert_eq!(vee(&hat(u)).unwrap(), u);
    }

    #[test]
    fn log_inverts_exp_below_pi(v in vec3()) {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        prop_assume!(n < PI - 1e-3);
        let back = Rotation::exp(v).log(PiPolicy::Reject).unwrap();
        for i in 0..3 {
            prop_assert!((back[i] - v[i]).abs() < 1e-9);
        }
    }
}
