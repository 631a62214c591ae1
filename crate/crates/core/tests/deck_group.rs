use henon_cocycle::cocycle::{Cocycle, CocycleEngine, LimitCocycle};
use henon_cocycle::deck_group::*;
use henon_cocycle::henon_core::HenonParams;
use henon_cocycle::polynomial_dynamics::BoettcherContext;
use henon_cocycle::{Angle, Complex64 as C, Error, LeafLabel};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn model() -> LimitCocycle {
    LimitCocycle::new(C::new(0.0, 0.0), C::new(1e-3, 0.0))
}

fn basilica_model() -> LimitCocycle {
    LimitCocycle::new(C::new(-1.0, 0.0), C::new(1e-3, 0.0))
}

/// exact cocycle without symmetries: a (1 + 0.3/xi + 0.2i/xi^2) / (2 xi^3)
struct Skewed;

impl Cocycle for Skewed {
    fn alpha(&self, xi: &LeafLabel) -> henon_cocycle::Result<C> {
        let w = xi.value();
        Ok(1e-3 * (1.0 + 0.3 / w + C::new(0.0, 0.2) / (w * w)) / (2.0 * w.powi(3)))
    }
    fn jacobian(&self) -> C {
        C::new(1e-3, 0.0)
    }
    fn landing(&self, theta: &Angle) -> henon_cocycle::Result<C> {
        Ok(theta.unit())
    }
    fn boettcher(&self) -> BoettcherContext {
        BoettcherContext::new(C::new(0.0, 0.0))
    }
}

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

fn same_label(a: &LeafLabel, b: &LeafLabel) -> bool {
    (a.value() - b.value()).norm() < 1e-12
}

/// H^k on the bundle via the lift
fn lift_n<A: Cocycle>(src: &A, xi: &LeafLabel, z: C, k: u32) -> (LeafLabel, C) {
    let (mut xi, mut z) = (*xi, z);
    for _ in 0..k {
        (xi, z) = lift_apply(src, &xi, z).unwrap();
    }
    (xi, z)
}

#[test]
fn transforms_are_stored_reduced() {
    let g = DeckTransform::new(6, 4);
    assert_eq!((g.j, g.k), (3, 3));
    assert!(DeckTransform::new(8, 3).is_identity());
    assert_eq!(DeckTransform::new(-1, 2).j, 3);
    assert_eq!(DeckTransform::level(3).len(), 4);
    assert!(DeckTransform::level(0).is_empty());
    assert!((DeckTransform::new(1, 2).omega - C::new(0.0, 1.0)).norm() < 1e-16);
}

#[test]
fn identity_acts_trivially() {
    let m = model();
    let xi = LeafLabel::new(Angle::from_turns(0.3), 0.1);
    let id = DeckTransform::identity();
    assert_eq!(pq_closed_form(&m, &id, &xi).unwrap(), (C::new(1.0, 0.0), C::new(0.0, 0.0)));
    assert_eq!(pq_recursive(&m, &id, &xi).unwrap(), (C::new(1.0, 0.0), C::new(0.0, 0.0)));
}

#[test]
fn half_turn_formulas() {
    // g_{1/2}: p = alpha(xi)/alpha(-xi), q = 1 - p in the standard
    // trivialization; for c = 0, p = -1 and q = 2
    let m = model();
    let xi = LeafLabel::new(Angle::from_turns(0.17), 0.05);
    let g = DeckTransform::new(1, 1);
    let (p, q) = pq_closed_form(&m, &g, &xi).unwrap();
    assert!(close(p, C::new(-1.0, 0.0), 1e-14) && close(q, C::new(2.0, 0.0), 1e-14));

    let b = basilica_model();
    let (p, q) = pq_closed_form(&b, &g, &xi).unwrap();
    let expect = b.alpha(&xi).unwrap() / b.alpha(&xi.negate()).unwrap();
    assert!(close(p, expect, 1e-13));
    assert!(close(q, 1.0 - expect, 1e-13));
}

#[test]
fn elements_are_invisible_after_k_lifts() {
    let b = basilica_model();
    let xi = LeafLabel::new(Angle::from_turns(0.41), 0.02);
    let z = C::new(0.3, -1.2);
    for (j, k) in [(1, 1), (3, 2), (5, 3), (7, 4)] {
        let g = DeckTransform::new(j, k);
        let (eta, w) = apply(&b, &g, &xi, z).unwrap();
        let (x1, z1) = lift_n(&b, &xi, z, k);
        let (x2, z2) = lift_n(&b, &eta, w, k);
        assert!(same_label(&x1, &x2));
        assert!(close(z1, z2, 1e-12), "{z1} {z2}");
    }
}

#[test]
fn quarter_turn_twice_is_the_half_turn() {
    let b = basilica_model();
    let xi = LeafLabel::new(Angle::from_turns(0.2), 0.03);
    let z = C::new(-0.4, 0.9);
    let quarter = DeckTransform::new(1, 2);
    let (x1, z1) = apply(&b, &quarter, &xi, z).unwrap();
    let (x2, z2) = apply(&b, &quarter, &x1, z1).unwrap();
    let (x3, z3) = apply(&b, &DeckTransform::new(1, 1), &xi, z).unwrap();
    assert!(same_label(&x2, &x3));
    assert!(close(z2, z3, 1e-12));
}

#[test]
fn closed_form_matches_recursion_off_the_circle() {
    let e = CocycleEngine::new(HenonParams::new(C::new(0.0, 0.1), C::new(0.05, 0.0)));
    let xi = LeafLabel::new(Angle::from_turns(0.37), 0.2);
    for (j, k) in [(1, 1), (3, 2), (1, 3)] {
        let g = DeckTransform::new(j, k);
        let (p, q) = pq_closed_form(&e, &g, &xi).unwrap();
        let (pr, qr) = pq_recursive(&e, &g, &xi).unwrap();
        assert!(close(p, pr, 1e-12) && close(q, qr, 1e-12), "{p} {pr} {q} {qr}");
    }
}

#[test]
fn non_identity_elements_act_freely() {
    let b = basilica_model();
    let xi = LeafLabel::on_circle(Angle::from_turns(0.6));
    for g in (1..=4).flat_map(DeckTransform::level) {
        let (eta, _) = apply(&b, &g, &xi, C::new(0.1, 0.0)).unwrap();
        assert!(!same_label(&eta, &xi));
    }
}

#[test]
fn constants_arithmetic() {
    assert!((a0_formula(1.0) - 1.0 / 130.0).abs() < 1e-17);
    let c = GroupConstants::from_measurements(1.0, 1e-3, 0.5, 1.0, 64);
    assert_eq!(c.delta_prime, 1e-3);
    assert_eq!(c.delta_dprime, 1e-3);
    assert_eq!(c.a0, 1e-3);
    assert!(c.premise_met());
    assert!((c.growth_factor() - 500.0).abs() < 1e-12);
    // 500^(k-1) > 32|z|
    assert_eq!(c.k0(0.0), Some(1));
    assert_eq!(c.k0(1.0), Some(2));
    assert_eq!(c.k0(20.0), Some(3));
    // 500^(k-1) > 64 (|z0| + 1/32)
    assert_eq!(c.k0_neighborhood(0.0), Some(2));
    assert_eq!(c.k0_neighborhood(10.0), Some(3));
    assert!((c.growth_rhs(1, 0.0) - 1.0 / 32.0).abs() < 1e-17);
    assert!((c.growth_rhs(3, 1.0) - (250000.0 / 32.0 - 1.0)).abs() < 1e-9);

    let bad = GroupConstants::from_measurements(1.0, 1e-3, 3.0, 0.1, 64);
    assert_eq!(bad.delta_prime, 0.0);
    assert_eq!(bad.delta_dprime, 0.0);
    assert!(!bad.premise_met());
    let slow = GroupConstants::from_measurements(0.01, 1e-3, 0.5, 1.0, 64);
    assert_eq!(slow.k0(1.0), None);
}

#[test]
fn constants_of_the_c_zero_model() {
    let c = compute_constants(&model(), 64).unwrap();
    assert!((c.delta - 1.0).abs() < 1e-12);
    assert!((c.sup_ratio - 0.5).abs() < 1e-12);
    assert!((c.inf_antipodal - 1.0).abs() < 1e-12);
    assert!(c.sup_bound_holds() && c.antipodal_bound_holds());
    assert!(c.premise_met());
    assert!(compute_constants(&model(), 48).is_err());
}

#[test]
fn growth_check_enforces_its_hypotheses() {
    let m = model();
    let c = compute_constants(&m, 64).unwrap();
    let xi = LeafLabel::on_circle(Angle::from_turns(0.1));
    let id = growth_check(&m, &c, &DeckTransform::identity(), &xi, C::new(0.0, 0.0));
    assert!(matches!(id, Err(Error::PreconditionUnmet(_))));
    let low = growth_check(&m, &c, &DeckTransform::new(1, 1), &xi, C::new(1.0, 0.0));
    assert!(matches!(low, Err(Error::PreconditionUnmet(_))));
    let r = growth_check(&m, &c, &DeckTransform::new(1, 2), &xi, C::new(1.0, 0.0)).unwrap();
    assert!(r.margin > 0.0, "{r:?}");
    let unmet = GroupConstants { a0: 1e-4, ..c };
    let err = growth_check(&m, &unmet, &DeckTransform::new(1, 2), &xi, C::new(1.0, 0.0));
    assert!(matches!(err, Err(Error::PreconditionUnmet(_))));
    // the unchecked margin is still available
    assert!(growth_margin(&m, &unmet, &DeckTransform::new(1, 2), &xi, C::new(1.0, 0.0)).is_ok());
}

#[test]
fn certificate_for_the_c_zero_model() {
    let m = model();
    let c = compute_constants(&m, 64).unwrap();
    let cert = separating_neighborhood(&m, &c, &Angle::from_turns(0.3), C::new(0.5, 0.0), 96, None).unwrap();
    assert!(cert.premise_met);
    assert_eq!(cert.k_max, cert.k0 + 4);
    assert_eq!(cert.sample_points, 15 * 6);
    assert!(cert.min_z_ratio > 1.0);
    assert_eq!(cert.angle_exits + cert.z_exits, cert.sample_points * cert.elements);
}

#[test]
fn orbit_equivalence_witnesses() {
    let m = model();
    let p = (Angle::from_turns(0.3), C::new(0.2, 0.1));
    assert_eq!(orbit_equivalent(&m, p, p, 3).unwrap(), Some((1, 0)));
    // a quarter-turn image and back
    let (eta, w) = apply(&m, &DeckTransform::new(1, 2), &LeafLabel::on_circle(p.0), p.1).unwrap();
    let q = (eta.angle, w);
    assert_eq!(orbit_equivalent(&m, q, p, 3).unwrap(), Some((1, 2)));
    assert_eq!(orbit_equivalent(&m, p, q, 3).unwrap(), Some((3, 2)));
    // c = 0: distinct rays never land together
    let r = (Angle::rational(1, 3), C::new(0.0, 0.0));
    let s = (Angle::rational(2, 3), C::new(0.0, 0.0));
    assert_eq!(orbit_equivalent(&m, r, s, 4).unwrap(), None);
}

proptest! {
    #![proptest_config(Config {
        cases: 32,
        rng_seed: RngSeed::Fixed(0xdec4),
        failure_persistence: None,
        ..Config::default()
    })]

    #[test]
    fn closed_form_and_recursion_agree(t in 0.0f64..1.0, r in 0.0f64..0.3, k in 1u32..=6, j in 0i64..64) {
        let b = Skewed;
        let xi = LeafLabel::new(Angle::from_turns(t), r);
        let g = DeckTransform::new(2 * j + 1, k);
        let (p, q) = pq_closed_form(&b, &g, &xi).unwrap();
        let (pr, qr) = pq_recursive(&b, &g, &xi).unwrap();
        prop_assert!(close(p, pr, 1e-11) && close(q, qr, 1e-11));
    }

    #[test]
    fn level_k_elements_compose_additively(t in 0.0f64..1.0, j1 in 0i64..16, j2 in 0i64..16, zr in -2.0f64..2.0) {
        let b = Skewed;
        let xi = LeafLabel::new(Angle::from_turns(t), 0.01);
        let z = C::new(zr, 0.5);
        let (g1, g2) = (DeckTransform::new(j1, 4), DeckTransform::new(j2, 4));
        let (x1, z1) = apply(&b, &g1, &xi, z).unwrap();
        let (x2, z2) = apply(&b, &g2, &x1, z1).unwrap();
        let (x3, z3) = apply(&b, &DeckTransform::new(j1 + j2, 4), &xi, z).unwrap();
        prop_assert!(same_label(&x2, &x3));
        // translations grow like |a|^-(k-1) and cancel in the composite
        let scale = 1.0 + pq_closed_form(&b, &g1, &xi).unwrap().1.norm() + pq_closed_form(&b, &g2, &x1).unwrap().1.norm();
        prop_assert!((z2 - z3).norm() < 1e-13 * scale);
    }

    #[test]
    fn intertwining_with_the_lift(t in 0.0f64..1.0, j in 0i64..32, k in 2u32..=5) {
        // lift(g_{j/2^k}(x)) = g_{j/2^(k-1)}(lift(x))
        let b = Skewed;
        let xi = LeafLabel::new(Angle::from_turns(t), 0.02);
        let z = C::new(0.7, -0.3);
        let g = DeckTransform::new(2 * j + 1, k);
        let (eta, w) = apply(&b, &g, &xi, z).unwrap();
        let (a1, b1) = lift_apply(&b, &eta, w).unwrap();
        let (x, y) = lift_apply(&b, &xi, z).unwrap();
        let (a2, b2) = apply(&b, &DeckTransform::new(2 * j + 1, k - 1), &x, y).unwrap();
        prop_assert!(same_label(&a1, &a2));
        prop_assert!(close(b1, b2, 1e-10));
    }
}
