//! Independent reference models used by the integration tests.
//!
//! Nothing here calls into the ring or matrix arithmetic under test: each
//! element is rebuilt as an honest polynomial in `u` (or in `u^e` with
//! rational coefficients) and multiplied naively.
#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use ordbreuil::breuil_rings::{RCtx, RElem, S0};
use ordbreuil::coeff::{Fq, PrimeCtx};
use ordbreuil::dd_matrix::DDMatrix;

pub fn inv_mod(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "{a} is not invertible mod {m}");
    s0.rem_euclid(m)
}

/// Dense polynomial in `u` with coefficients mod `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZPoly {
    pub m: i128,
    pub c: Vec<i128>,
}

impl ZPoly {
    pub fn zero(m: i128) -> Self {
        ZPoly { m, c: Vec::new() }
    }

    pub fn monomial(m: i128, deg: usize, v: i128) -> Self {
        let mut c = vec![0; deg + 1];
        c[deg] = v.rem_euclid(m);
        ZPoly { m, c }.trim()
    }

    fn trim(mut self) -> Self {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|i| (self.c.get(i).copied().unwrap_or(0) + o.c.get(i).copied().unwrap_or(0)).rem_euclid(self.m))
            .collect();
        ZPoly { m: self.m, c }.trim()
    }

    pub fn neg(&self) -> Self {
        ZPoly { m: self.m, c: self.c.iter().map(|v| (-v).rem_euclid(self.m)).collect() }.trim()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.c.is_empty() || o.c.is_empty() {
            return ZPoly::zero(self.m);
        }
        let mut c = vec![0i128; self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate().filter(|(_, a)| **a != 0) {
            for (j, b) in o.c.iter().enumerate().filter(|(_, b)| **b != 0) {
                c[i + j] = (c[i + j] + a * b) % self.m;
            }
        }
        ZPoly { m: self.m, c }.trim()
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(ZPoly::monomial(self.m, 0, 1), |acc, _| acc.mul(self))
    }

    /// Quotient and remainder by a monic divisor.
    pub fn divrem_monic(&self, d: &Self) -> (Self, Self) {
        let dn = d.c.len() - 1;
        assert_eq!(d.c[dn], 1, "divisor must be monic");
        let mut r = self.c.clone();
        if r.len() <= dn {
            return (ZPoly::zero(self.m), self.clone());
        }
        let mut qc = vec![0i128; r.len() - dn];
        for top in (dn..r.len()).rev() {
            let f = r[top];
            if f == 0 {
                continue;
            }
            qc[top - dn] = f;
            for (i, dc) in d.c.iter().enumerate() {
                let idx = top - dn + i;
                r[idx] = (r[idx] - f * dc).rem_euclid(self.m);
            }
        }
        (ZPoly { m: self.m, c: qc }.trim(), ZPoly { m: self.m, c: r }.trim())
    }

    /// `x(u) -> x(u^p)`.
    pub fn compose_power(&self, p: usize) -> Self {
        let mut c = vec![0i128; (self.c.len().max(1) - 1) * p + 1];
        for (i, v) in self.c.iter().enumerate() {
            c[i * p] = *v;
        }
        ZPoly { m: self.m, c }.trim()
    }

    /// Reduction modulo `u^n`.
    pub fn truncate(&self, n: usize) -> Self {
        ZPoly { m: self.m, c: self.c.iter().take(n).copied().collect() }.trim()
    }
}

/// `E(u) = u^e + p` as an honest polynomial.
pub fn e_poly(p: u32, m: i128) -> ZPoly {
    ZPoly::monomial(m, (p - 1) as usize, 1).add(&ZPoly::monomial(m, 0, p as i128))
}

/// Honest polynomial representative `sum c_k E^k / k!` of a ring element.
pub fn embed_relem(x: &RElem) -> ZPoly {
    let rc = x.ctx();
    let m = rc.modulus() as i128;
    let e = e_poly(rc.p(), m);
    let mut acc = ZPoly::zero(m);
    let mut fact = 1i128;
    for k in 0..rc.fil_level() {
        if k > 0 {
            fact = fact * k as i128 % m;
        }
        let ck = x.coeff(k).value() as i128;
        if ck == 0 {
            continue;
        }
        let scale = ck * inv_mod(fact, m) % m;
        acc = acc.add(&e.pow(k).mul(&ZPoly::monomial(m, 0, scale)));
    }
    acc
}

/// Honest matrix `(u^{[a_i - a_j]} m_ij)` of a ring-valued matrix.
pub fn embed_r_matrix(x: &DDMatrix<RElem>) -> Vec<Vec<ZPoly>> {
    let ctx = x.ctx();
    let m = x.entry(0, 0).ctx().modulus() as i128;
    (0..3)
        .map(|i| {
            (0..3)
                .map(|j| embed_relem(x.entry(i, j)).mul(&ZPoly::monomial(m, ctx.bracket(i, j) as usize, 1)))
                .collect()
        })
        .collect()
}

/// Honest matrix of an `F_p[u^e]` valued matrix inside `F_p[u]/(u^{ep})`.
pub fn embed_s0_matrix(x: &DDMatrix<S0<Fq>>) -> Vec<Vec<ZPoly>> {
    let ctx = x.ctx();
    let p = ctx.p() as i128;
    let e = ctx.e() as usize;
    (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    let mut acc = ZPoly::zero(p);
                    for (k, c) in x.entry(i, j).coeffs().iter().enumerate() {
                        acc = acc.add(&ZPoly::monomial(p, k * e + ctx.bracket(i, j) as usize, c.value() as i128));
                    }
                    acc.truncate(e * ctx.p() as usize)
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(x: &[Vec<ZPoly>], y: &[Vec<ZPoly>]) -> Vec<Vec<ZPoly>> {
    let m = x[0][0].m;
    (0..3)
        .map(|i| (0..3).map(|j| (0..3).fold(ZPoly::zero(m), |acc, k| acc.add(&x[i][k].mul(&y[k][j])))).collect())
        .collect()
}

/// Classical adjugate by cofactors.
pub fn mat_adjugate(x: &[Vec<ZPoly>]) -> Vec<Vec<ZPoly>> {
    (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    let r: Vec<usize> = (0..3).filter(|&r| r != j).collect();
                    let c: Vec<usize> = (0..3).filter(|&c| c != i).collect();
                    let d = x[r[0]][c[0]].mul(&x[r[1]][c[1]]).sub(&x[r[0]][c[1]].mul(&x[r[1]][c[0]]));
                    if (i + j) % 2 == 0 {
                        d
                    } else {
                        d.neg()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_det(x: &[Vec<ZPoly>]) -> ZPoly {
    let adj = mat_adjugate(x);
    (0..3).fold(ZPoly::zero(x[0][0].m), |acc, k| acc.add(&x[0][k].mul(&adj[k][0])))
}

pub fn mat_truncate(x: &[Vec<ZPoly>], n: usize) -> Vec<Vec<ZPoly>> {
    x.iter().map(|r| r.iter().map(|v| v.truncate(n)).collect()).collect()
}

/// Polynomial in `t = u^e` over `Q`.
pub type QPoly = Vec<BigRational>;

fn q(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn qpoly_mul(a: &QPoly, b: &QPoly) -> QPoly {
    let mut c = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

fn qpoly_pow(a: &QPoly, k: usize) -> QPoly {
    (0..k).fold(vec![BigRational::one()], |acc, _| qpoly_mul(&acc, a))
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `sum c_k (t + p)^k / k!` over `Q`.
pub fn rational_from_delta(p: u32, c: &[i128]) -> QPoly {
    let e = vec![q(p as i128), q(1)];
    let mut acc = vec![BigRational::zero()];
    for (k, &ck) in c.iter().enumerate() {
        let term = qpoly_pow(&e, k);
        let s = q(ck) / BigRational::from_integer(factorial(k));
        if acc.len() < term.len() {
            acc.resize(term.len(), BigRational::zero());
        }
        for (i, t) in term.iter().enumerate() {
            acc[i] += t * &s;
        }
    }
    acc
}

pub fn rational_mul(a: &QPoly, b: &QPoly) -> QPoly {
    qpoly_mul(a, b)
}

/// Rewrites a polynomial in `t` in the basis `E^k/k!` (with `E = t + p`),
/// reducing each `p`-integral coefficient mod `p^n`; the first `levels` are returned.
pub fn rational_to_delta(p: u32, n: u32, x: &QPoly, levels: usize) -> Vec<u64> {
    // t = E - p
    let shift = vec![q(-(p as i128)), q(1)];
    let mut in_e = vec![BigRational::zero(); x.len().max(1)];
    for (i, c) in x.iter().enumerate() {
        for (k, t) in qpoly_pow(&shift, i).iter().enumerate() {
            in_e[k] += c * t;
        }
    }
    let m = (p as i128).pow(n);
    (0..levels)
        .map(|k| {
            let c = in_e.get(k).cloned().unwrap_or_else(BigRational::zero) * BigRational::from_integer(factorial(k));
            let num = c.numer().clone();
            let den = c.denom().clone();
            let modulus = BigInt::from(m);
            let num = (num % &modulus + &modulus) % &modulus;
            let den = (den % &modulus).abs();
            let den = den.to_i128().expect("small");
            assert!(den % p as i128 != 0, "coefficient {k} is not p-integral");
            let v = num.to_i128().expect("small") * inv_mod(den, m) % m;
            v as u64
        })
        .collect()
}

/// Random generic weight triples for a prime, normalized so `a0 = 0`.
pub fn generic_weights(p: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a1 in 0..p - 1 {
        for a2 in a1..p - 1 {
            if ordbreuil::coeff::check_strong_genericity(p, [0, a1, a2]) {
                out.push([0, a1, a2]);
            }
        }
    }
    out
}

pub fn ctx(p: u32, w: [u32; 3]) -> PrimeCtx {
    PrimeCtx::new(p, w).expect("valid context")
}

pub fn rctx(p: u32, n: u32, m: usize) -> Arc<RCtx> {
    RCtx::new(p, n, m).expect("valid ring context")
}

/// Property-test settings without a regression file next to the sources.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { cases: n, failure_persistence: None, ..Default::default() }
}
