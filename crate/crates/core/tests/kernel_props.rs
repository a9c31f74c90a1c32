mod common;

use num_traits::{One, Signed};
use proptest::prelude::*;
use rand::Rng;

use supdiff_core::json::{family_from_json, family_to_json, polyhedron_from_json, polyhedron_to_json};
use supdiff_core::rational::{dot, int, rat, ExtReal};
use supdiff_core::suprema::{rho_weights, sup_value};
use supdiff_core::{ConvexFunction, Halfspace, Polyhedron, Rational};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

fn random_hrep(seed: u64) -> Polyhedron {
    let mut rng = common::rng(seed);
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(0..=6);
    let h = (0..m)
        .map(|_| Halfspace::new(common::nonzero_vec(&mut rng, n, -3, 3), int(rng.gen_range(-2..=4))))
        .collect();
    Polyhedron::from_hrep(h, n).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn conversion_round_trip(seed in any::<u64>()) {
        let p = random_hrep(seed);
        let v = p.to_vrep();
        let q = if v.vertices.is_empty() {
            Polyhedron::empty(p.dim())
        } else {
            Polyhedron::from_vrep(v.vertices, v.rays, p.dim()).unwrap()
        };
        prop_assert!(p.set_equal(&q));
        let back = Polyhedron::from_hrep(q.to_hrep().to_vec(), p.dim()).unwrap();
        prop_assert!(back.set_equal(&p));
    }

    #[test]
    fn support_finite_exactly_on_polar_of_recession(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=3);
        let p = common::polyhedron(&mut rng, n);
        let u = common::int_vec(&mut rng, n, -2, 2);
        let polar = p.recession_cone().vrep().rays.iter().all(|r| !dot(r, &u).is_positive());
        prop_assert_eq!(p.support_value(&u) < ExtReal::PosInf, polar);
    }

    #[test]
    fn eps_subdifferential_matches_fenchel_young(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=2);
        let x = common::random_x(&mut rng, n);
        let f = common::proper_function(&mut rng, &x);
        let eps = rat(rng.gen_range(0..=4), 2);
        let sub = f.eps_subdifferential(&x, &eps).unwrap();
        for _ in 0..6 {
            let g: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-8..=8), 2)).collect();
            prop_assert_eq!(sub.contains_point(&g), f.subgradient_membership(&x, &eps, &g).unwrap());
        }
        for v in &sub.vrep().vertices {
            prop_assert!(f.subgradient_membership(&x, &eps, v).unwrap());
        }
    }

    #[test]
    fn eps_subdifferential_grows_with_eps(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=3);
        let x = common::random_x(&mut rng, n);
        let f = common::proper_function(&mut rng, &x);
        let small = rat(rng.gen_range(0..=3), 3);
        let large = &small + rat(rng.gen_range(0..=3), 2);
        let a = f.eps_subdifferential(&x, &small).unwrap();
        let b = f.eps_subdifferential(&x, &large).unwrap();
        prop_assert!(a.subset_of(&b));
    }

    #[test]
    fn scaled_subdifferential_identity(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=3);
        let x = common::random_x(&mut rng, n);
        let f = common::proper_function(&mut rng, &x);
        let alpha = rat(rng.gen_range(1..=6), rng.gen_range(1..=4));
        let eps = rat(rng.gen_range(0..=4), 2);
        let lhs = f.eps_subdifferential_scaled(&alpha, &x, &eps).unwrap();
        let rhs = f.eps_subdifferential(&x, &(&eps / &alpha)).unwrap().scale(&alpha).unwrap();
        prop_assert!(lhs.set_equal(&rhs));
    }

    #[test]
    fn indicator_subdifferential_is_eps_normal_set(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=3);
        let x = common::random_x(&mut rng, n);
        let d = common::domain_through(&mut rng, &x);
        let eps = rat(rng.gen_range(0..=4), 3);
        let via_f = ConvexFunction::indicator(d.clone()).eps_subdifferential(&x, &eps).unwrap();
        prop_assert!(via_f.set_equal(&d.eps_normal_set(&x, &eps).unwrap()));
    }

    #[test]
    fn weights_lie_in_unit_interval(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (_, x, f) = { let imp = rng.gen_bool(0.3); common::family_instance(&mut rng, imp) };
        let eps = rat(rng.gen_range(1..=8), 4);
        if sup_value(&f, &x).is_finite() {
            for w in rho_weights(&f, &x, &eps).unwrap().values() {
                prop_assert!(w.is_positive() && *w <= Rational::one());
            }
        }
    }

    #[test]
    fn json_round_trips(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=3);
        let p = common::polyhedron(&mut rng, n);
        let q = polyhedron_from_json(&polyhedron_to_json(&p), "").unwrap();
        prop_assert!(p.set_equal(&q));
        let (_, _, f) = { let imp = rng.gen_bool(0.5); common::family_instance(&mut rng, imp) };
        let j = family_to_json(&f);
        prop_assert_eq!(family_to_json(&family_from_json(&j, "").unwrap()), j);
    }
}
