//! Property tests for the exact series layer.

use proptest::prelude::*;
use trising::scalar::{rat, GaussRat};
use trising::series::{Exp, Series};

const PREC: i64 = 9;

fn arb_coeff() -> impl Strategy<Value = GaussRat> {
    (-6i64..7, 1i64..5, -6i64..7, 1i64..5)
        .prop_map(|(rn, rd, in_, id)| GaussRat::new(rat(rn, rd), rat(in_, id)))
}

fn arb_series(min_exp: i64) -> impl Strategy<Value = Series> {
    proptest::collection::vec((arb_coeff(), min_exp..(4 * PREC)), 0..8).prop_map(|terms| {
        let terms: Vec<(GaussRat, Exp)> =
            terms.into_iter().map(|(c, e)| (c, Exp(e))).collect();
        Series::from_terms(&terms, Exp::int(PREC))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn ring_axioms(a in arb_series(-8), b in arb_series(-8), c in arb_series(-8)) {
        // Associativity and distributivity within the propagated windows.
        let ab_c = a.mul(&b).mul(&c);
        let a_bc = a.mul(&b.mul(&c));
        prop_assert!(ab_c.sub(&a_bc).is_zero_to_window());
        let lhs = a.mul(&b.add(&c));
        let rhs = a.mul(&b).add(&a.mul(&c)).truncate(lhs.prec());
        prop_assert!(lhs.sub(&rhs).is_zero_to_window());
        // Commutativity.
        prop_assert!(a.mul(&b).sub(&b.mul(&a)).is_zero_to_window());
    }

    #[test]
    fn exp_log_roundtrip(u in arb_series(1)) {
        // exp then log is the identity on positive-valuation series.
        let h = u.exp().unwrap();
        let back = h.log().unwrap();
        prop_assert!(back.sub(&u).is_zero_to_window());
    }

    #[test]
    fn log_exp_roundtrip(u in arb_series(1)) {
        // log then exp is the identity on unit series 1 + u.
        let f = Series::one(Exp::int(PREC)).add(&u);
        let l = f.log().unwrap();
        let back = l.exp().unwrap();
        prop_assert!(back.sub(&f).is_zero_to_window());
    }

    #[test]
    fn log_of_product_is_sum(u in arb_series(1), v in arb_series(1)) {
        let f = Series::one(Exp::int(PREC)).add(&u);
        let g = Series::one(Exp::int(PREC)).add(&v);
        let lhs = f.mul(&g).log().unwrap();
        let rhs = f.log().unwrap().add(&g.log().unwrap()).truncate(lhs.prec());
        prop_assert!(lhs.sub(&rhs).is_zero_to_window());
    }

    #[test]
    fn division_inverts_multiplication(a in arb_series(-4), b in arb_series(-4)) {
        prop_assume!(!b.is_zero_to_window());
        let q = a.mul(&b).div(&b).unwrap();
        prop_assert!(q.sub(&a.truncate(q.prec())).is_zero_to_window());
    }

    #[test]
    fn sqrt_squares_back(u in arb_series(1)) {
        let f = Series::one(Exp::int(PREC)).add(&u);
        let r = f.sqrt().unwrap();
        prop_assert!(r.mul(&r).sub(&f).is_zero_to_window());
    }

    #[test]
    fn serialization_roundtrip(a in arb_series(-8)) {
        let text = a.to_text();
        let back = Series::from_text(&text).unwrap();
        prop_assert_eq!(a, back);
    }

    #[test]
    fn product_exponent_reconstruction(exps in proptest::collection::vec((1i64..10, -4i64..5), 0..5)) {
        // Integer-exponent unit products round-trip through exponent
        // extraction.
        let prec = Exp::int(12);
        let mut lp = trising::product::LogProduct::new(prec);
        for (e, k) in &exps {
            lp.factor_int(Exp::int(*e), *k).unwrap();
        }
        let f = lp.series().unwrap();
        let pf = trising::product::product_exponents(&f).unwrap();
        let back = pf.reconstruct(prec).unwrap();
        prop_assert!(back.sub(&f).is_zero_to_window());
    }
}
