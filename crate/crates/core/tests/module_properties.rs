mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ordbreuil::breuil_rings::{ideal_member_below, IdealTag, RElem};
use ordbreuil::coeff::{Fq, PrimeCtx, Scalar};
use ordbreuil::comparison::{
    default_truncation, descend_isotypic, fl_isomorphic_conjugate, rescale_gauge, to_etale, to_fl,
};
use ordbreuil::dd_matrix::{dd_mul, subset_member_below, DDMatrix, SubsetTag};
use ordbreuil::deformation::{monodromy_locus_report, tangent_space, TangentKind};
use ordbreuil::error::Error;
use ordbreuil::gauge::{diagonalize, ordinary_form_modp, reduce_matrix_mod_p, Filtration, GaugeData, Parity};
use ordbreuil::monodromy::{
    monodromy_bruteforce, monodromy_closed_form, monodromy_exists, verify_monodromy_axioms, OrdinaryModule,
};
use ordbreuil::sampling::{random_frobenius, random_ordinary, random_unit};

use common::{ctx, rctx};

fn standard() -> PrimeCtx {
    ctx(13, [0, 4, 8])
}

proptest! {
    #![proptest_config(common::cases(12))]

    #[test]
    fn every_step_is_sound_and_converges_in_order(seed: u64) {
        let pc = standard();
        let rc = rctx(13, 6, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_frobenius(pc, &rc, &mut rng).unwrap();
        let run = diagonalize(&a, 6).unwrap();
        prop_assert!(run.transcript.all_verified());
        for s in &run.transcript.steps {
            let a_norm = s.a_normalized.as_ref().unwrap();
            let b = s.b_matrix.as_ref().unwrap();
            let proto = a_norm.entry(0, 0);
            let v_old = s.v_old.unwrap().matrix(pc, proto);
            let v_new = s.v_new.unwrap().matrix(pc, proto);
            let lhs = dd_mul(a_norm, &v_new).unwrap();
            let rhs = dd_mul(&v_old, b).unwrap();
            prop_assert!(lhs.eq_below(&rhs, s.effective_level), "step {} identity", s.step);
            match s.parity {
                Parity::Even => {
                    for i in 0..3 {
                        for j in (0..3).filter(|&j| j != i) {
                            prop_assert!(ideal_member_below(b.entry(i, j), IdealTag::PowR(s.n), s.effective_level));
                        }
                    }
                }
                Parity::Odd => {
                    prop_assert!(subset_member_below(b, SubsetTag::TPlus(IdealTag::PowPFil1(s.n)), s.effective_level));
                }
            }
        }
        // gauge normal form: constants for v10, v21 and an E-linear v20
        let f = run.filtration.unipotent(pc, run.frobenius.entry(0, 0));
        prop_assert!((1..9).all(|k| f.entry(1, 0).coeff(k).value() == 0 && f.entry(2, 1).coeff(k).value() == 0));
        prop_assert!((3..9).all(|k| f.entry(2, 0).coeff(k).value() == 0));
        prop_assert!(run.frobenius.is_constant_diagonal());
    }
}

proptest! {
    #![proptest_config(common::cases(200))]

    #[test]
    fn monodromy_iff_and_support(seed: u64, force_zero: bool) {
        let pc = standard();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_ordinary(pc, &mut rng, force_zero);
        let sols = monodromy_bruteforce(&m);
        let v20_zero = m.gauge().v20.is_zero();
        prop_assert_eq!(sols.is_some(), v20_zero);
        prop_assert_eq!(monodromy_exists(&m).unwrap(), v20_zero);
        if let Some(s) = sols {
            let nd = monodromy_closed_form(&m).unwrap();
            prop_assert!(verify_monodromy_axioms(&m, &nd));
            prop_assert!(s.contains(&nd));
            let part = s.particular();
            let support = |x: &ordbreuil::breuil_rings::S0<Fq>| {
                x.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, _)| k).collect::<Vec<_>>()
            };
            for (poly, (i, j)) in [(&part.p10, (1, 0)), (&part.p21, (2, 1)), (&part.p20, (2, 0))] {
                prop_assert!(support(poly).iter().all(|&k| k == pc.bracket(i, j) as usize));
            }
        }
    }

    #[test]
    fn descent_never_fails(seed: u64) {
        let pc = standard();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_ordinary(pc, &mut rng, true);
        let em = to_etale(&m, default_truncation(&pc)).unwrap();
        prop_assert_eq!(em.det_valuation(), Some(3 * pc.e()));
        prop_assert!(descend_isotypic(&em).is_ok());
    }

    #[test]
    fn rescaled_gauges_are_isomorphic(seed: u64, t in prop::array::uniform3(1i64..13)) {
        let pc = standard();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_ordinary(pc, &mut rng, true);
        let other = rescale_gauge(&m, t.map(|v| Fq::new(v, 13))).unwrap();
        prop_assert!(fl_isomorphic_conjugate(&to_fl(&m).unwrap(), &to_fl(&other).unwrap()).unwrap());
    }
}

#[test]
fn reduction_commutes_with_diagonalization() {
    // A = L (Id + p X) with L lower triangular and p-free below the diagonal
    let pc = standard();
    let rc = rctx(13, 6, 9);
    let mut both = 0;
    for seed in 0..12 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = random_frobenius(pc, &rc, &mut rng).unwrap();
        let mut l = DDMatrix::diag(pc, [0; 3].map(|_| RElem::from_zp(&rc, random_unit(13, 6, &mut rng))));
        for (i, j) in [(1, 0), (2, 0), (2, 1)] {
            l.set(i, j, RElem::scalar(&rc, rng.gen_range(0..13)));
        }
        let a = dd_mul(&l, &noise).unwrap();
        let Ok(run) = diagonalize(&a, 6) else { continue };
        let modp = ordinary_form_modp(&Filtration::standard(Fq::new(0, 13)), &reduce_matrix_mod_p(&a)).unwrap();
        assert_eq!(run.gauge.map(|x| x.to_fq()), modp, "seed {seed}");
        both += 1;
    }
    assert!(both >= 6, "only {both} instances ran in both characteristics");
}

#[test]
fn non_generic_weights_only_report() {
    let pc = ctx(13, [0, 2, 4]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let m = random_ordinary(pc, &mut rng, false);
        assert!(matches!(monodromy_exists(&m), Err(Error::GenericityViolation(_))));
        assert!(matches!(monodromy_closed_form(&m), Err(Error::GenericityViolation(_))));
        // the oracle still answers; nothing is asserted about the answer
        let _ = monodromy_bruteforce(&m);
    }
}

#[test]
fn isomorphic_fl_modules_come_from_one_rescaling_orbit() {
    let pc = standard();
    let f = |v| Fq::new(v, 13);
    let mut gauges = Vec::new();
    for v10 in 0..3 {
        for v21 in 0..3 {
            for v20p in 0..3 {
                for a0 in 1..3 {
                    let g = GaugeData { v10: f(v10), v20: f(0), v20p: f(v20p), v21: f(v21), lambda: [f(a0), f(1), f(1)] };
                    gauges.push(OrdinaryModule::new(pc, g).unwrap());
                }
            }
        }
    }
    let fls: Vec<_> = gauges.iter().map(|m| to_fl(m).unwrap()).collect();
    let mut iso_pairs = 0;
    for i in 0..gauges.len() {
        for j in i + 1..gauges.len() {
            if !fl_isomorphic_conjugate(&fls[i], &fls[j]).unwrap() {
                continue;
            }
            iso_pairs += 1;
            let in_orbit = (1..13).any(|t1| {
                (1..13).any(|t2| rescale_gauge(&gauges[i], [f(1), f(t1), f(t2)]).unwrap().gauge() == gauges[j].gauge())
            });
            assert!(in_orbit, "isomorphic FL modules from gauges {i} and {j} outside one orbit");
        }
    }
    assert!(iso_pairs > 0, "sample contains no isomorphic pairs");
}

#[test]
fn dimensions_differ_by_one_and_locus_is_linear() {
    let pc = standard();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let m = random_ordinary(pc, &mut rng, true);
        let q = tangent_space(TangentKind::Quasi, &m).unwrap();
        let w = tangent_space(TangentKind::WithMonodromy, &m).unwrap();
        assert_eq!(q.dimension - w.dimension, 1);
    }
    let report = monodromy_locus_report(pc, 9, 40, 6, 2).unwrap();
    assert_eq!(report.lines_closed, report.lines_checked);
    assert!(report.lines_checked > 0);
}
