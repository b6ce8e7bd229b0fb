use anka_core::value::Decimal;
use anka_testkit::checks;
use proptest::prelude::*;

#[test]
fn add_then_subtract_and_tax_are_exact() {
    let out = checks::decimal_exactness(1000, 8);
    assert!(out.all_passed(), "{:?}", out.failures);
}

#[test]
fn reference_tax_values() {
    let d = |s: &str| s.parse::<Decimal>().unwrap();
    assert_eq!(d("1500.00").checked_mul(&d("0.08")).unwrap().to_string(), "120.0000");
    assert_eq!(d("0.1").checked_add(&d("0.2")).unwrap().to_string(), "0.3");
    assert_eq!(d("1").checked_div(&d("3")).unwrap().to_string(), "0.3333");
    assert_eq!(d("2.5").div_to_scale(&d("1"), 0).unwrap().to_string(), "2");
    assert_eq!(d("3.5").div_to_scale(&d("1"), 0).unwrap().to_string(), "4");
}

fn decimal() -> impl Strategy<Value = Decimal> {
    (-10i128.pow(15)..10i128.pow(15), 0u32..=4).prop_map(|(m, s)| Decimal::new(m, s).unwrap())
}

proptest! {
    #[test]
    fn text_round_trip_keeps_scale(a in decimal()) {
        let back: Decimal = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
        prop_assert_eq!(back.scale(), a.scale());
    }

    #[test]
    fn addition_commutes_and_has_inverse(a in decimal(), b in decimal()) {
        let ab = a.checked_add(&b).unwrap();
        prop_assert_eq!(ab, b.checked_add(&a).unwrap());
        prop_assert_eq!(ab.checked_sub(&b).unwrap(), a);
        prop_assert_eq!(ab.scale(), a.scale().max(b.scale()));
    }

    #[test]
    fn product_scale_is_sum_of_scales(a in decimal(), b in decimal()) {
        let p = a.checked_mul(&b).unwrap();
        prop_assert_eq!(p.scale(), a.scale() + b.scale());
        prop_assert_eq!(p.mantissa(), a.mantissa() * b.mantissa());
    }

    #[test]
    fn ordering_agrees_with_subtraction(a in decimal(), b in decimal()) {
        let diff = a.checked_sub(&b).unwrap();
        prop_assert_eq!(a < b, diff.is_negative());
        prop_assert_eq!(a == b, diff.is_zero());
    }

    #[test]
    fn division_error_is_under_half_an_ulp(a in decimal(), b in decimal()) {
        prop_assume!(!b.is_zero());
        let q = a.checked_div(&b).unwrap();
        // |q*b - a| <= b * 10^-scale / 2, compared at a common scale.
        let back = q.checked_mul(&b).unwrap().checked_sub(&a).unwrap();
        let half_ulp = Decimal::new(5, q.scale() + 1).unwrap().checked_mul(&b).unwrap();
        let abs = |d: Decimal| if d.is_negative() { d.checked_neg().unwrap() } else { d };
        prop_assert!(abs(back) <= abs(half_ulp));
    }
}
