mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use ordbreuil::breuil_rings::{
    divide_by_E, frobenius_of_e, gamma_to_delta, ideal_member, monodromy_s, IdealTag, RElem, SBar,
};
use ordbreuil::coeff::{factorial_split, inv_unit, Dual, Fq, ZpN};

use common::{rational_from_delta, rational_mul, rational_to_delta, rctx};

fn coeffs(m: usize) -> impl Strategy<Value = Vec<i128>> {
    prop::collection::vec(-1_000_000i128..1_000_000, m)
}

proptest! {
    #![proptest_config(common::cases(200))]

    #[test]
    fn product_matches_rational_model(a in coeffs(6), b in coeffs(6), n in 2u32..8) {
        let rc = rctx(13, n, 6);
        let x = RElem::from_coeffs(&rc, &a);
        let y = RElem::from_coeffs(&rc, &b);
        let got: Vec<u64> = (0..6).map(|k| (&x * &y).coeff(k).value()).collect();
        let want = rational_to_delta(13, n, &rational_mul(&rational_from_delta(13, &a), &rational_from_delta(13, &b)), 6);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn fil_is_a_power_of_e(a in coeffs(11), m in 0usize..11) {
        let rc = rctx(13, 6, 11);
        let mut c = a.clone();
        c.iter_mut().take(m).for_each(|v| *v = 0);
        let x = RElem::from_coeffs(&rc, &c);
        prop_assert!(ideal_member(&x, IdealTag::Fil(m)));
        let q = divide_by_E(&x, m).unwrap();
        let e = RElem::e_poly(&rc);
        let back = (0..m).fold(q, |acc, _| &acc * &e);
        prop_assert_eq!(back, x);
    }

    #[test]
    fn leibniz_rule(a in prop::collection::vec(0i64..13, 156), b in prop::collection::vec(0i64..13, 156)) {
        let mk = |c: &[i64]| {
            let mut x = SBar::zero(13, Fq::new(0, 13));
            for (d, &v) in c.iter().enumerate() {
                x.set_coeff(d, Fq::new(v, 13));
            }
            x
        };
        let (x, y) = (mk(&a), mk(&b));
        let lhs = monodromy_s(&(&x * &y));
        let rhs = &(&monodromy_s(&x) * &y) + &(&x * &monodromy_s(&y));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn unit_inverse_is_involutive(v in 1i128..1_000_000_000, n in 1u32..8) {
        prop_assume!(v % 13 != 0);
        let x = ZpN::new(v, 13, n);
        prop_assert_eq!(inv_unit(inv_unit(x).unwrap()).unwrap(), x);
        let f = Fq::new(v as i64, 13);
        prop_assert_eq!(inv_unit(inv_unit(f).unwrap()).unwrap(), f);
    }

    #[test]
    fn dual_numbers_multiply_symbolically(a in 0i64..13, b in 0i64..13, c in 0i64..13, d in 0i64..13) {
        let f = |v| Fq::new(v, 13);
        let prod = Dual::new(f(a), f(b)) * Dual::new(f(c), f(d));
        prop_assert_eq!(prod.re, f((a * c) % 13));
        prop_assert_eq!(prod.eps, f((a * d + b * c) % 13));
    }
}

#[test]
fn factorials_reassemble() {
    for p in [3u32, 5, 7, 11, 13] {
        for n in 1..=10u32 {
            let m = BigInt::from(p).pow(n);
            for k in 0..=2 * p as u64 {
                let (v, unit) = factorial_split(k, p, n);
                let fact: BigInt = (1..=k).map(BigInt::from).product();
                let lhs = BigInt::from(p).pow(v) * BigInt::from(unit.value());
                assert_eq!((lhs - &fact) % &m, BigInt::from(0), "k={k} p={p} n={n}");
                assert!(unit.valuation() == 0);
            }
        }
    }
}

#[test]
fn gamma_matches_rational_expansion() {
    let rc = rctx(13, 8, 11);
    for i in 0..11 {
        // u^{ie}/i! as a polynomial in t = u^e
        let mut x = vec![BigRational::from_integer(0.into()); i + 1];
        x[i] = BigRational::new(1.into(), (1..=i).map(BigInt::from).product());
        let want = rational_to_delta(13, 8, &x, 11);
        let got: Vec<u64> = (0..11).map(|k| gamma_to_delta(&rc, i).unwrap().coeff(k).value()).collect();
        assert_eq!(got, want, "gamma_{i}");
    }
}

#[test]
fn gamma_two_example() {
    let rc = rctx(13, 8, 11);
    let g = gamma_to_delta(&rc, 2).unwrap();
    let m = 13i128.pow(8);
    let half = common::inv_mod(2, m);
    assert_eq!(g.coeff(2).value(), 1);
    assert_eq!(g.coeff(1).value() as i128, (-13i128).rem_euclid(m));
    assert_eq!(g.coeff(0).value() as i128, 169 * half % m);
}

#[test]
fn divided_power_memberships() {
    let rc = rctx(13, 8, 11);
    for i in 3..11 {
        let g = gamma_to_delta(&rc, i).unwrap();
        for n in 1..=3u32 {
            for k in 0..n as usize {
                assert!(g.coeff(k).valuation() >= n - k as u32, "i={i} n={n} k={k}");
            }
        }
    }
}

#[test]
fn frobenius_of_e_is_p_times_unit() {
    for n in 2..=8 {
        let rc = rctx(13, n, 11);
        let f = frobenius_of_e(&rc);
        assert_eq!(f.coeff(0).valuation(), 1);
        assert!((1..11).all(|k| f.coeff(k).valuation() >= 1));
        // phi(E) = u^{ep} + p; its constant term in the delta basis is (-p)^p + p
        let m = BigInt::from(13).pow(n);
        let want: BigInt = (BigInt::from(-13).pow(13) + 13) % &m;
        let want = ((want + &m) % &m).to_u64().unwrap();
        assert_eq!(f.coeff(0).value(), want);
    }
}
