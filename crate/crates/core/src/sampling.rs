//! Seeded random inputs for sweeps and the self-test.

use std::sync::Arc;

use rand::Rng;

use crate::breuil_rings::{RCtx, RElem};
use crate::coeff::{Fq, PrimeCtx, ZpN};
use crate::dd_matrix::{dd_mul, DDMatrix};
use crate::error::Result;
use crate::gauge::GaugeData;
use crate::monodromy::OrdinaryModule;

pub fn random_relem<R: Rng>(rctx: &Arc<RCtx>, rng: &mut R) -> RElem {
    let c: Vec<i128> = (0..rctx.fil_level()).map(|_| rng.gen_range(0..rctx.modulus()) as i128).collect();
    RElem::from_coeffs(rctx, &c)
}

pub fn random_unit<R: Rng>(p: u32, n: u32, rng: &mut R) -> ZpN {
    let m = (p as u64).pow(n);
    loop {
        let v = rng.gen_range(1..m);
        if v % p as u64 != 0 {
            return ZpN::new(v as i128, p, n);
        }
    }
}

/// `Diag(units) (Id + p X)` with `X` uniformly random.
pub fn random_frobenius<R: Rng>(ctx: PrimeCtx, rctx: &Arc<RCtx>, rng: &mut R) -> Result<DDMatrix<RElem>> {
    let p = rctx.p();
    let units = [0; 3].map(|_| RElem::from_zp(rctx, random_unit(p, rctx.precision(), rng)));
    let one = RElem::one(rctx);
    let pp = RElem::scalar(rctx, p as i128);
    let x = DDMatrix::new(
        ctx,
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let noise = &pp * &random_relem(rctx, rng);
                if i == j {
                    &one + &noise
                } else {
                    noise
                }
            })
        }),
    );
    dd_mul(&DDMatrix::diag(ctx, units), &x)
}

/// Random ordinary module over `F_p`; `v20` is forced to zero when asked.
pub fn random_ordinary<R: Rng>(ctx: PrimeCtx, rng: &mut R, v20_zero: bool) -> OrdinaryModule<Fq> {
    let p = ctx.p();
    let mut f = |lo: u32| Fq::new(rng.gen_range(lo..p) as i64, p);
    let g = GaugeData {
        v10: f(0),
        v21: f(0),
        v20: if v20_zero { Fq::new(0, p) } else { f(0) },
        v20p: f(0),
        lambda: [f(1), f(1), f(1)],
    };
    OrdinaryModule::new(ctx, g).expect("units drawn from 1..p")
}
