use proptest::prelude::*;

use twistor_core::bundle::{chi_from_character, exponential, todd, GradedClass};
use twistor_core::dsl::{parse, parse_expr, Expr};
use twistor_core::{
    Basis, Bundle, C2Mode, Class, Rational, RawPolynomial, RingPresentation, Space,
};

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn class_from(n: usize, coeffs: &[i64]) -> Class {
    Class::from_terms(n, Basis::all(n).zip(coeffs).map(|(b, &c)| (b, q(c)))).unwrap()
}

fn class(n: usize) -> impl Strategy<Value = Class> {
    let len = Basis::all(n).count();
    prop::collection::vec(-9i64..=9, len).prop_map(move |c| class_from(n, &c))
}

fn homogeneous(n: usize, degree: u64) -> impl Strategy<Value = Class> {
    class(n).prop_map(move |c| c.component(degree))
}

fn triple() -> impl Strategy<Value = (usize, Class, Class, Class)> {
    (0usize..=6).prop_flat_map(|n| (Just(n), class(n), class(n), class(n)))
}

/// Multiply by expanding into raw monomials and rewriting the product.
fn rewrite_product(ring: &RingPresentation, a: &Class, b: &Class) -> Class {
    let n = a.n();
    let mut raw = RawPolynomial::new(n);
    for (ba, ca) in a.terms() {
        for (bb, cb) in b.terms() {
            raw.push(ca * cb, ba.to_raw(n).times(&bb.to_raw(n)));
        }
    }
    ring.normalize(&raw).unwrap()
}

fn bundle(n: usize) -> impl Strategy<Value = Bundle> {
    (
        1u32..=4,
        homogeneous(n, 2),
        homogeneous(n, 4),
        homogeneous(n, 6),
    )
        .prop_map(|(r, c1, c2, c3)| Bundle::new(r, c1, c2, c3).unwrap())
}

fn space() -> impl Strategy<Value = Space> {
    (0usize..=5, any::<bool>()).prop_flat_map(|(n, normalized)| {
        let mode = if normalized {
            C2Mode::Normalized
        } else {
            C2Mode::Paper
        };
        prop::collection::vec(0i64..=1, n)
            .prop_map(move |a| Space::build(a.len(), &a, mode).unwrap())
    })
}

fn space_with_bundle() -> impl Strategy<Value = (Space, Bundle)> {
    space().prop_flat_map(|s| {
        let n = s.n();
        (Just(s), bundle(n))
    })
}

fn space_with_bundles() -> impl Strategy<Value = (Space, Bundle, Bundle, Class)> {
    space().prop_flat_map(|s| {
        let n = s.n();
        (Just(s), bundle(n), bundle(n), homogeneous(n, 2))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ring_axioms((n, a, b, c) in triple()) {
        let ring = RingPresentation::new(n);
        let ab = ring.mul(&a, &b).unwrap();
        prop_assert_eq!(&ab, &ring.mul(&b, &a).unwrap());
        prop_assert_eq!(
            ring.mul(&ab, &c).unwrap(),
            ring.mul(&a, &ring.mul(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            ring.mul(&a, &b.add(&c).unwrap()).unwrap(),
            ab.add(&ring.mul(&a, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(ring.mul(&a, &Class::one(n)).unwrap(), a.clone());
    }

    #[test]
    fn table_product_agrees_with_rewriting((n, a, b, _c) in triple()) {
        let ring = RingPresentation::new(n);
        prop_assert_eq!(ring.mul(&a, &b).unwrap(), rewrite_product(&ring, &a, &b));
    }

    #[test]
    fn pairing_is_the_integrated_product((n, a, b, _c) in triple()) {
        let ring = RingPresentation::new(n);
        prop_assert_eq!(ring.pairing(&a, &b).unwrap(), ring.mul(&a, &b).unwrap().integrate());
    }

    #[test]
    fn normalize_is_idempotent_and_linear((n, a, b, _c) in triple(), s in -5i64..=5) {
        let ring = RingPresentation::new(n);
        let mut raw = a.to_raw();
        raw.terms.extend(b.to_raw().terms.into_iter().map(|(c, m)| (c * q(s), m)));
        let once = ring.normalize(&raw).unwrap();
        prop_assert_eq!(&ring.normalize(&once.to_raw()).unwrap(), &once);
        prop_assert_eq!(once, a.add(&b.scale(&q(s))).unwrap());
    }

    #[test]
    fn products_respect_the_grading(
        (n, a, b) in (0usize..=6).prop_flat_map(|n| (Just(n), class(n), class(n))),
        da in 0u64..=3,
        db in 0u64..=3,
    ) {
        let ring = RingPresentation::new(n);
        let p = ring.mul(&a.component(2 * da), &b.component(2 * db)).unwrap();
        prop_assert!(p.is_homogeneous_of(2 * (da + db)));
        if da + db > 3 {
            prop_assert!(p.is_zero());
        }
    }

    #[test]
    fn render_then_parse_round_trips((n, a, _b, _c) in triple()) {
        let ring = RingPresentation::new(n);
        prop_assert_eq!(ring.parse_class::<Rational>(&a.to_string()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn character_is_multiplicative_under_twist((s, v, _w, l) in space_with_bundles()) {
        let ring = s.ring();
        let lhs = v.twist(&l, ring).unwrap().chern_character(ring).unwrap();
        let rhs = v.chern_character(ring).unwrap().product(&exponential(&l, ring).unwrap(), ring).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn endomorphism_character_is_character_times_dual((s, v) in space_with_bundle()) {
        let ring = s.ring();
        let end = v.end_bundle(ring).unwrap();
        prop_assert_eq!(end.rank(), v.rank() * v.rank());
        let lhs = end.chern_character(ring).unwrap();
        let rhs = v
            .chern_character(ring)
            .unwrap()
            .product(&v.dual().chern_character(ring).unwrap(), ring)
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn dual_is_an_involution_flipping_odd_characters((s, v) in space_with_bundle()) {
        let ring = s.ring();
        prop_assert_eq!(&v.dual().dual(), &v);
        let ch = v.chern_character(ring).unwrap();
        let dual = v.dual().chern_character(ring).unwrap();
        for i in 0..4u64 {
            let sign = if i % 2 == 0 { q(1) } else { q(-1) };
            prop_assert_eq!(dual.part(i), ch.part(i).scale(&sign));
        }
    }

    #[test]
    fn euler_characteristic_is_additive((s, v, w, _l) in space_with_bundles()) {
        let ring = s.ring();
        let td = todd(&s).unwrap();
        let ch_v = v.chern_character(ring).unwrap();
        let ch_w = w.chern_character(ring).unwrap();
        let sum = chi_from_character(&ch_v.add(&ch_w).unwrap(), &td, ring).unwrap().value;
        let separate = chi_from_character(&ch_v, &td, ring).unwrap().value
            + chi_from_character(&ch_w, &td, ring).unwrap().value;
        prop_assert_eq!(sum, separate);
    }

    #[test]
    fn trivial_bundle_character_is_its_rank(s in space(), r in 1u32..=6) {
        let ring = s.ring();
        let ch = Bundle::trivial(s.n(), r).unwrap().chern_character(ring).unwrap();
        prop_assert_eq!(ch, GradedClass::new(Class::constant(s.n(), q(r as i64))));
        prop_assert_eq!(todd(&s).unwrap().part(0), Class::one(s.n()));
    }
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..50).prop_map(Expr::Int),
        prop::sample::select(vec!["w", "e1", "e2", "F", "S", "Sbar", "pt", "V", "eta"])
            .prop_map(|s| Expr::Name(s.to_string())),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
            (
                prop::sample::select(vec!["End", "dual", "O", "integrate"]),
                inner.clone()
            )
                .prop_map(|(f, a)| Expr::Call(f.to_string(), vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Apply(Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn expression_printing_round_trips(e in expr()) {
        let printed = e.to_string();
        prop_assert_eq!(parse_expr(&printed).unwrap(), e);
    }

    #[test]
    fn statement_printing_round_trips(e in expr(), f in expr()) {
        let text = format!("space n=2\nlet x = {e}\nassert {e} == {f}\nchi {f}\n");
        let script = parse(&text).unwrap();
        let reparsed = parse(&script.to_string()).unwrap();
        prop_assert_eq!(script.nodes(), reparsed.nodes());
    }
}
