//! In-process invariant suite behind the `selftest` command.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::breuil_rings::{frobenius_of_e, gamma_to_delta, RCtx, RElem};
use crate::coeff::{Fq, PrimeCtx};
use crate::comparison::{
    default_truncation, descend_isotypic, fl_isomorphic, fl_isomorphic_conjugate, rescale_gauge, strip_twist,
    to_etale, to_fl,
};
use crate::dd_matrix::{dd_adjugate, dd_det, dd_mul, DDMatrix};
use crate::deformation::{tangent_space, TangentKind};
use crate::error::{Error, Result};
use crate::gauge::diagonalize;
use crate::monodromy::{monodromy_bruteforce, monodromy_closed_form, monodromy_exists, verify_monodromy_axioms};
use crate::sampling::{random_frobenius, random_ordinary, random_relem};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn suite(name: &'static str, f: impl FnOnce() -> Result<String>) -> SuiteResult {
    match f() {
        Ok(detail) => SuiteResult { name, passed: true, detail },
        Err(e) => SuiteResult { name, passed: false, detail: e.to_string() },
    }
}

fn ensure(cond: bool, what: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::MembershipFailure(what.into()))
    }
}

fn ring_suite() -> Result<String> {
    let rc = RCtx::new(13, 8, 11)?;
    let d = |k| RElem::delta(&rc, k);
    ensure(&d(2) * &d(3) == &RElem::scalar(&rc, 10) * &d(5), "d2 d3 = 10 d5")?;
    let mut checked = 0;
    for i in 3..11 {
        let g = gamma_to_delta(&rc, i)?;
        for n in 1..=3u32 {
            for k in 0..n as usize {
                ensure(g.coeff(k).valuation() >= n - k as u32, format!("gamma_{i} coefficient {k} for n={n}"))?;
                checked += 1;
            }
        }
    }
    let phi_e = frobenius_of_e(&rc);
    ensure(phi_e.coeff(0).valuation() == 1, "phi(E) constant term is p times a unit")?;
    ensure((1..11).all(|k| phi_e.coeff(k).valuation() >= 1), "phi(E) divisible by p")?;
    Ok(format!("{checked} divided-power valuations, phi(E) = p * unit"))
}

fn dd_suite(seed: u64) -> Result<String> {
    let ctx = PrimeCtx::new(13, [0, 4, 8])?;
    let rc = RCtx::new(13, 6, 9)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let x = DDMatrix::new(ctx, std::array::from_fn(|_| std::array::from_fn(|_| random_relem(&rc, &mut rng))));
        let det = dd_det(&x);
        let lhs = dd_mul(&x, &dd_adjugate(&x))?;
        let rhs = DDMatrix::diag(ctx, [det.clone(), det.clone(), det]);
        ensure(lhs == rhs, "X adj(X) = det(X) Id")?;
    }
    Ok("20 adjugate identities".into())
}

fn gauge_suite(seed: u64) -> Result<String> {
    let ctx = PrimeCtx::new(13, [0, 4, 8])?;
    let rc = RCtx::new(13, 8, 11)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = 0;
    for _ in 0..5 {
        let a = random_frobenius(ctx, &rc, &mut rng)?;
        let hi = diagonalize(&a, 8).map_err(|f| f.error)?;
        let lo = diagonalize(&a, 4).map_err(|f| f.error)?;
        ensure(hi.transcript.all_verified(), "transcript verified")?;
        ensure(hi.frobenius.is_constant_diagonal(), "final Frobenius diagonal")?;
        let red = hi.gauge.map(|x| x.reduce(4));
        ensure(red == lo.gauge, "precision coherence")?;
        steps += hi.iterations;
    }
    Ok(format!("5 runs, {steps} steps, coherent mod p^4"))
}

fn monodromy_suite(seed: u64) -> Result<String> {
    let ctx = PrimeCtx::new(13, [0, 4, 8])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..30 {
        let m = random_ordinary(ctx, &mut rng, k % 2 == 0);
        let sols = monodromy_bruteforce(&m);
        ensure(sols.is_some() == monodromy_exists(&m)?, "oracle agrees with v20 = 0")?;
        if let Some(s) = sols {
            let nd = monodromy_closed_form(&m)?;
            ensure(verify_monodromy_axioms(&m, &nd) && s.contains(&nd), "closed form is a solution")?;
        }
    }
    Ok("30 modules".into())
}

fn dims_suite(seed: u64) -> Result<String> {
    let ctx = PrimeCtx::new(13, [0, 4, 8])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..3 {
        let m = random_ordinary(ctx, &mut rng, true);
        let q = tangent_space(TangentKind::Quasi, &m)?;
        let w = tangent_space(TangentKind::WithMonodromy, &m)?;
        ensure(q.dimension == 7 && w.dimension == 6 && w.forced_zero == ["v20"], "dimensions 7 and 6")?;
    }
    Ok("3 bases: 7 and 6".into())
}

fn comparison_suite(seed: u64) -> Result<String> {
    let ctx = PrimeCtx::new(13, [0, 4, 8])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = ctx.p();
    for k in 0..20 {
        let m = random_ordinary(ctx, &mut rng, true);
        let em = to_etale(&m, default_truncation(&ctx))?;
        ensure(em.det_valuation() == Some(3 * ctx.e()), "det valuation 3e")?;
        let d = descend_isotypic(&em)?;
        let fl = to_fl(&m)?;
        ensure(strip_twist(&ctx, &d)? == fl.frob, "pipeline coherence")?;
        let t = [1 + k % 12, 1 + (k * 5) % 12, 1 + (k * 7) % 12].map(|v| Fq::new(v as i64, p));
        let other = to_fl(&rescale_gauge(&m, t)?)?;
        ensure(fl_isomorphic_conjugate(&fl, &other)?, "rescaled gauge isomorphic")?;
        ensure(fl_isomorphic(&fl, &fl)?, "reflexive")?;
    }
    Ok("20 gauges".into())
}

/// Runs every suite with the given seed.
pub fn run_selftest(seed: u64) -> Vec<SuiteResult> {
    vec![
        suite("ring", ring_suite),
        suite("dd_matrix", || dd_suite(seed)),
        suite("gauge", || gauge_suite(seed)),
        suite("monodromy", || monodromy_suite(seed)),
        suite("dimensions", || dims_suite(seed)),
        suite("comparison", || comparison_suite(seed)),
    ]
}
