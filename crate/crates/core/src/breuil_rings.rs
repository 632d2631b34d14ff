//! Truncated Breuil rings.
//!
//! [`RElem`] lives in the weight-zero part of the divided-power ring in
//! characteristic zero, written in the basis `delta_k = E(u)^k / k!` with
//! `E(u) = u^e + p`. Coefficients are residues mod `p^N` and terms with
//! `k >= M` are dropped, i.e. everything is computed modulo `Fil^M`.
//!
//! [`SBar`] is `F[u]/(u^{ep})` and [`S0`] its weight-zero part
//! `F[u^e]/(u^{ep})`, stored as a polynomial in `w = u^e` of degree `< p`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{factorial_split, pow_u64, valuation_u64, Fq, Scalar, ZpN};
use crate::error::{Error, Result};

/// Shared data for one choice of `(p, N, M)`.
#[derive(Debug)]
pub struct RCtx {
    p: u32,
    n: u32,
    m: usize,
    modulus: u64,
    binom: Vec<Vec<u64>>,
    inv_small: Vec<u64>,
    frob_table: Vec<Vec<u64>>,
}

impl PartialEq for RCtx {
    fn eq(&self, o: &RCtx) -> bool {
        self.p == o.p && self.n == o.n && self.m == o.m
    }
}

impl RCtx {
    /// Requires `1 <= m <= p` so that every `k!` with `k < m` is a unit.
    pub fn new(p: u32, n: u32, m: usize) -> Result<Arc<RCtx>> {
        if m == 0 || m > p as usize {
            return Err(Error::InvalidInput(format!("filtration level {m} must lie in 1..={p}")));
        }
        if n == 0 || (p as u128).pow(n) >= 1u128 << 62 {
            return Err(Error::InvalidInput(format!("precision p^{n} out of range")));
        }
        let modulus = pow_u64(p as u64, n);
        let mut binom = vec![vec![0u64; m]; m];
        for (j, row) in binom.iter_mut().enumerate() {
            for (k, b) in row.iter_mut().enumerate() {
                if j + k < m {
                    *b = binomial(j + k, j) % modulus;
                }
            }
        }
        let inv_small = (0..=m as u64)
            .map(|k| if k == 0 { 0 } else { ZpN::new(k as i128, p, n).inv_unit().map(|x| x.value()).unwrap_or(0) })
            .collect();
        let mut ctx = RCtx { p, n, m, modulus, binom, inv_small, frob_table: Vec::new() };
        ctx.frob_table = ctx.build_frob_table();
        Ok(Arc::new(ctx))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    pub fn fil_level(&self) -> usize {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn zp(&self, v: i128) -> ZpN {
        ZpN::new(v, self.p, self.n)
    }

    fn mulm(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    fn raw_mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let m = self.m;
        let mut out = vec![0u128; m];
        for (j, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (k, &b) in y[..m - j].iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let t = self.mulm(a, b);
                out[j + k] += self.mulm(t, self.binom[j][k]) as u128;
            }
        }
        out.into_iter().map(|v| (v % self.modulus as u128) as u64).collect()
    }

    fn gamma_coeffs(&self, i: usize) -> Vec<u64> {
        let mut c = vec![0u64; self.m];
        for (k, ck) in c.iter_mut().enumerate().take(i + 1) {
            let d = (i - k) as u64;
            let (v, unit) = factorial_split(d, self.p, self.n);
            let exp = d as u32 - v;
            let sign = if d % 2 == 1 { -1 } else { 1 };
            if exp >= self.n {
                continue;
            }
            let val = self.zp(sign * pow_u64(self.p as u64, exp) as i128) * unit.inv_unit().expect("unit part");
            *ck = val.value();
        }
        c
    }

    // phi(E) = u^{pe} + p = p! * gamma_p + p * delta_0.
    fn build_frob_table(&self) -> Vec<Vec<u64>> {
        let p = self.p as usize;
        let (v, unit) = factorial_split(p as u64, self.p, self.n);
        let pfact = (self.zp(pow_u64(self.p as u64, v) as i128) * unit).value();
        let mut phi_e: Vec<u64> = self.gamma_coeffs(p).into_iter().map(|c| self.mulm(c, pfact)).collect();
        phi_e[0] = (phi_e[0] + self.p as u64 % self.modulus) % self.modulus;
        let mut table = Vec::with_capacity(self.m);
        let mut power = vec![0u64; self.m];
        power[0] = 1 % self.modulus;
        let mut inv_fact = 1u64 % self.modulus;
        for k in 0..self.m {
            if k > 0 {
                power = self.raw_mul(&power, &phi_e);
                inv_fact = self.mulm(inv_fact, self.inv_small[k]);
            }
            table.push(power.iter().map(|&c| self.mulm(c, inv_fact)).collect());
        }
        table
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as u64
}

/// Element `sum_k c_k delta_k` of the truncated ring, `k < M`.
#[derive(Clone)]
pub struct RElem {
    ctx: Arc<RCtx>,
    c: Vec<u64>,
}

impl PartialEq for RElem {
    fn eq(&self, o: &RElem) -> bool {
        *self.ctx == *o.ctx && self.c == o.c
    }
}

impl Eq for RElem {}

impl fmt::Debug for RElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, c)| format!("{c}*d{k}"))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl RElem {
    pub fn zero(ctx: &Arc<RCtx>) -> RElem {
        RElem { ctx: ctx.clone(), c: vec![0; ctx.m] }
    }

    pub fn one(ctx: &Arc<RCtx>) -> RElem {
        RElem::scalar(ctx, 1)
    }

    pub fn scalar(ctx: &Arc<RCtx>, v: i128) -> RElem {
        let mut x = RElem::zero(ctx);
        x.c[0] = ctx.zp(v).value();
        x
    }

    pub fn from_zp(ctx: &Arc<RCtx>, v: ZpN) -> RElem {
        RElem::scalar(ctx, v.value() as i128)
    }

    /// `delta_k`; zero when `k >= M`.
    pub fn delta(ctx: &Arc<RCtx>, k: usize) -> RElem {
        let mut x = RElem::zero(ctx);
        if k < ctx.m {
            x.c[k] = 1 % ctx.modulus;
        }
        x
    }

    /// Coefficients beyond `M` are ignored.
    pub fn from_coeffs(ctx: &Arc<RCtx>, coeffs: &[i128]) -> RElem {
        let mut x = RElem::zero(ctx);
        for (k, &v) in coeffs.iter().enumerate().take(ctx.m) {
            x.c[k] = ctx.zp(v).value();
        }
        x
    }

    /// `u^e = E(u) - p = delta_1 - p delta_0`.
    pub fn ue(ctx: &Arc<RCtx>) -> RElem {
        &RElem::delta(ctx, 1) - &RElem::scalar(ctx, ctx.p as i128)
    }

    /// `E(u) = delta_1`.
    pub fn e_poly(ctx: &Arc<RCtx>) -> RElem {
        RElem::delta(ctx, 1)
    }

    pub fn ctx(&self) -> &Arc<RCtx> {
        &self.ctx
    }

    pub fn coeff(&self, k: usize) -> ZpN {
        ZpN::new(self.c.get(k).copied().unwrap_or(0) as i128, self.ctx.p, self.ctx.n)
    }

    pub fn raw_coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&c| c == 0)
    }

    /// Constant coefficient is a p-adic unit.
    pub fn is_unit(&self) -> bool {
        !self.c[0].is_multiple_of(self.ctx.p as u64)
    }

    /// Inverse via the geometric series; needs a unit constant term.
    pub fn inv(&self) -> Result<RElem> {
        if !self.is_unit() {
            return Err(Error::NonUnit);
        }
        let ctx = &self.ctx;
        let c0inv = RElem::from_zp(ctx, self.coeff(0).inv_unit()?);
        // x = c0 (1 - t) with t in (p, Fil^1); t is topologically nilpotent in both directions.
        let t = &RElem::one(ctx) - &(&c0inv * self);
        let mut inv = RElem::one(ctx);
        let mut power = RElem::one(ctx);
        let bound = ctx.n as usize + ctx.m + 1;
        for _ in 0..bound {
            power = &power * &t;
            if power.is_zero() {
                break;
            }
            inv = &inv + &power;
        }
        Ok(&inv * &c0inv)
    }

    pub fn scale(&self, s: ZpN) -> RElem {
        let v = s.value();
        RElem { ctx: self.ctx.clone(), c: self.c.iter().map(|&c| self.ctx.mulm(c, v)).collect() }
    }

    /// Keeps `delta_k` for `k < keep` and zeroes the rest.
    pub fn truncate(&self, keep: usize) -> RElem {
        let mut x = self.clone();
        for c in x.c.iter_mut().skip(keep) {
            *c = 0;
        }
        x
    }

    /// Smallest `k` with a nonzero coefficient, `M` for zero.
    pub fn fil_order(&self) -> usize {
        self.c.iter().position(|&c| c != 0).unwrap_or(self.ctx.m)
    }

    /// Minimum p-adic valuation over the coefficients.
    pub fn valuation(&self) -> u32 {
        self.c.iter().map(|&c| valuation_u64(c, self.ctx.p, self.ctx.n)).min().unwrap_or(self.ctx.n)
    }

    /// Same coefficients read in another context with identical `p` and `M` and lower precision.
    pub fn reduce_to(&self, ctx: &Arc<RCtx>) -> Result<RElem> {
        if ctx.p != self.ctx.p || ctx.n > self.ctx.n {
            return Err(Error::ContextMismatch);
        }
        let mut x = RElem::zero(ctx);
        for (k, &c) in self.c.iter().enumerate().take(ctx.m) {
            x.c[k] = c % ctx.modulus;
        }
        Ok(x)
    }

    /// Reduction modulo `p`: `delta_k` maps to `w^k / k!` in `F[w]/(w^p)`.
    pub fn reduce_mod_p(&self) -> S0<Fq> {
        let p = self.ctx.p;
        let mut out = S0::zero(p, Fq::new(0, p));
        let mut inv_fact = Fq::new(1, p);
        for (k, &c) in self.c.iter().enumerate() {
            if k > 0 {
                inv_fact *= Fq::new(k as i64, p).inv_unit().expect("k < p");
            }
            out.c[k] = Fq::new((c % p as u64) as i64, p) * inv_fact;
        }
        out
    }

    /// Encoding as `[[k, c_k], ...]` over nonzero coefficients.
    pub fn to_pairs(&self) -> Vec<(usize, u64)> {
        self.c.iter().enumerate().filter(|(_, &c)| c != 0).map(|(k, &c)| (k, c)).collect()
    }

    pub fn from_pairs(ctx: &Arc<RCtx>, pairs: &[(usize, i128)]) -> Result<RElem> {
        let mut x = RElem::zero(ctx);
        for &(k, v) in pairs {
            if k >= ctx.m {
                return Err(Error::InvalidInput(format!("delta index {k} beyond level {}", ctx.m)));
            }
            x.c[k] = ctx.zp(ctx.zp(v).value() as i128 + x.c[k] as i128).value();
        }
        Ok(x)
    }

    fn check(&self, o: &RElem) -> Result<()> {
        if Arc::ptr_eq(&self.ctx, &o.ctx) || *self.ctx == *o.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }
}

/// Product in the truncated ring.
pub fn r_mul(x: &RElem, y: &RElem) -> Result<RElem> {
    x.check(y)?;
    Ok(RElem { ctx: x.ctx.clone(), c: x.ctx.raw_mul(&x.c, &y.c) })
}

pub fn r_add(x: &RElem, y: &RElem) -> Result<RElem> {
    x.check(y)?;
    let m = x.ctx.modulus;
    Ok(RElem { ctx: x.ctx.clone(), c: x.c.iter().zip(&y.c).map(|(&a, &b)| (a + b) % m).collect() })
}

pub fn r_sub(x: &RElem, y: &RElem) -> Result<RElem> {
    x.check(y)?;
    let m = x.ctx.modulus;
    Ok(RElem { ctx: x.ctx.clone(), c: x.c.iter().zip(&y.c).map(|(&a, &b)| (a + m - b) % m).collect() })
}

impl Add for &RElem {
    type Output = RElem;
    fn add(self, o: &RElem) -> RElem {
        r_add(self, o).expect("context mismatch")
    }
}

impl Sub for &RElem {
    type Output = RElem;
    fn sub(self, o: &RElem) -> RElem {
        r_sub(self, o).expect("context mismatch")
    }
}

impl Mul for &RElem {
    type Output = RElem;
    fn mul(self, o: &RElem) -> RElem {
        r_mul(self, o).expect("context mismatch")
    }
}

impl Neg for &RElem {
    type Output = RElem;
    fn neg(self) -> RElem {
        let m = self.ctx.modulus;
        RElem { ctx: self.ctx.clone(), c: self.c.iter().map(|&a| (m - a) % m).collect() }
    }
}

/// `u^{ie}/i! = sum_k delta_k (-p)^{i-k} / (i-k)!`.
pub fn gamma_to_delta(ctx: &Arc<RCtx>, i: usize) -> Result<RElem> {
    for k in 0..=i.min(ctx.m.saturating_sub(1)) {
        let d = (i - k) as u64;
        let (v, _) = factorial_split(d, ctx.p, 1);
        if v as u64 > d {
            return Err(Error::PrecisionLoss);
        }
    }
    Ok(RElem { ctx: ctx.clone(), c: ctx.gamma_coeffs(i) })
}

/// `u^{te} = t! * gamma_t`.
pub fn ue_power(ctx: &Arc<RCtx>, t: usize) -> RElem {
    let (v, unit) = factorial_split(t as u64, ctx.p, ctx.n);
    let tf = ctx.zp(pow_u64(ctx.p as u64, v.min(ctx.n)) as i128) * unit;
    gamma_to_delta(ctx, t).expect("valuations are nonnegative").scale(tf)
}

/// Frobenius `phi(sum c_k delta_k) = sum c_k phi(E)^k / k!`.
///
/// The result is exact modulo `p^N` whenever the input is known modulo
/// `Fil^L` for some `L >= N`, because `phi(Fil^L)` lies in `p^L`.
pub fn frobenius_r(x: &RElem) -> RElem {
    let ctx = &x.ctx;
    let mut out = vec![0u128; ctx.m];
    for (k, &ck) in x.c.iter().enumerate() {
        if ck == 0 {
            continue;
        }
        for (j, &t) in ctx.frob_table[k].iter().enumerate() {
            out[j] += ctx.mulm(ck, t) as u128;
        }
    }
    RElem { ctx: ctx.clone(), c: out.into_iter().map(|v| (v % ctx.modulus as u128) as u64).collect() }
}

/// `phi(E(u))`.
pub fn frobenius_of_e(ctx: &Arc<RCtx>) -> RElem {
    frobenius_r(&RElem::e_poly(ctx))
}

/// Exact division by `E(u)^k`. The top `k` coefficients of the result are
/// not determined by the input and are returned as zero.
#[allow(non_snake_case)]
pub fn divide_by_E(x: &RElem, k: usize) -> Result<RElem> {
    let ctx = &x.ctx;
    let mut cur = x.c.clone();
    for _ in 0..k {
        if cur[0] != 0 {
            return Err(Error::NotDivisible { entry: None });
        }
        let mut next = vec![0u64; ctx.m];
        for j in 0..ctx.m - 1 {
            next[j] = ctx.mulm(cur[j + 1], ctx.inv_small[j + 1]);
        }
        cur = next;
    }
    Ok(RElem { ctx: ctx.clone(), c: cur })
}

/// Ideals of the truncated ring that are described coefficientwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdealTag {
    /// `Fil^m`.
    Fil(usize),
    /// `p Fil^1`.
    I,
    /// `(p Fil^2, Fil^3)`.
    J,
    /// `p^n R`.
    PowR(u32),
    /// `p^n Fil^m`.
    PowFil(u32, usize),
    /// `p^n I`.
    PowI(u32),
    /// `p^n J`.
    PowJ(u32),
    /// `p^n (p, Fil^1)`.
    PowPFil1(u32),
    /// `p^n (p Fil^d, Fil^{d+1})`; with `d = 2` this is `p^n J`.
    PowShiftedJ(u32, usize),
    /// `p^n J + p^n I + p^{n+1} R`.
    OddHyp(u32),
}

impl IdealTag {
    /// Required valuation of `c_k`; `None` means `c_k` must vanish.
    pub fn required(&self, k: usize) -> Option<u32> {
        match *self {
            IdealTag::Fil(m) => (k >= m).then_some(0),
            IdealTag::I => IdealTag::PowI(0).required(k),
            IdealTag::J => IdealTag::PowJ(0).required(k),
            IdealTag::PowR(n) => Some(n),
            IdealTag::PowFil(n, m) => (k >= m).then_some(n),
            IdealTag::PowI(n) => (k >= 1).then_some(n + 1),
            IdealTag::PowJ(n) => IdealTag::PowShiftedJ(n, 2).required(k),
            IdealTag::PowPFil1(n) => Some(if k == 0 { n + 1 } else { n }),
            IdealTag::PowShiftedJ(n, d) => {
                if k < d {
                    None
                } else if k == d {
                    Some(n + 1)
                } else {
                    Some(n)
                }
            }
            IdealTag::OddHyp(n) => Some(if k <= 2 { n + 1 } else { n }),
        }
    }
}

fn coeff_ok(c: u64, need: Option<u32>, p: u32, n: u32) -> bool {
    match need {
        None => c == 0,
        Some(e) if e >= n => c == 0,
        Some(e) => c.is_multiple_of(pow_u64(p as u64, e)),
    }
}

pub fn ideal_member(x: &RElem, tag: IdealTag) -> bool {
    ideal_member_below(x, tag, x.ctx.m)
}

/// Membership tested on the coefficients `k < level` only.
pub fn ideal_member_below(x: &RElem, tag: IdealTag, level: usize) -> bool {
    x.c.iter()
        .enumerate()
        .take(level)
        .all(|(k, &c)| coeff_ok(c, tag.required(k), x.ctx.p, x.ctx.n))
}

/// Element of `F[u]/(u^{ep})`, coefficients indexed by the `u`-degree.
#[derive(Clone, PartialEq, Eq)]
pub struct SBar<C: Scalar> {
    p: u32,
    c: Vec<C>,
}

impl<C: Scalar> fmt::Debug for SBar<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.terms().map(|(d, c)| format!("{c:?}*u^{d}")).collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl<C: Scalar> SBar<C> {
    /// `zero_coef` fixes the coefficient ring (its modulus).
    pub fn zero(p: u32, zero_coef: C) -> Self {
        SBar { p, c: vec![zero_coef.zero_like(); ((p - 1) * p) as usize] }
    }

    pub fn monomial(p: u32, degree: usize, coef: C) -> Self {
        let mut x = SBar::zero(p, coef);
        if degree < x.c.len() {
            x.c[degree] = coef;
        }
        x
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> usize {
        (self.p - 1) as usize
    }

    pub fn coeff(&self, d: usize) -> C {
        self.c[d]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.c
    }

    pub fn set_coeff(&mut self, d: usize, v: C) {
        self.c[d] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|c| c.is_zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, C)> + '_ {
        self.c.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(d, &c)| (d, c))
    }

    fn zero_coef(&self) -> C {
        self.c[0].zero_like()
    }

    /// Multiplication by `u^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut out = SBar::zero(self.p, self.zero_coef());
        for (d, c) in self.terms() {
            if d + k < out.c.len() {
                out.c[d + k] = c;
            }
        }
        out
    }

    /// Division by `u^k`; the low `k` coefficients must vanish.
    pub fn unshift(&self, k: usize) -> Option<Self> {
        if self.c[..k.min(self.c.len())].iter().any(|c| !c.is_zero()) {
            return None;
        }
        let mut out = SBar::zero(self.p, self.zero_coef());
        for d in k..self.c.len() {
            out.c[d - k] = self.c[d];
        }
        Some(out)
    }

    pub fn scale(&self, s: C) -> Self {
        SBar { p: self.p, c: self.c.iter().map(|&c| c * s).collect() }
    }

    pub fn to_pairs(&self) -> Vec<(usize, C)> {
        self.terms().collect()
    }
}

fn same_p(a: u32, b: u32) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ContextMismatch)
    }
}

pub fn sbar_mul<C: Scalar>(x: &SBar<C>, y: &SBar<C>) -> Result<SBar<C>> {
    same_p(x.p, y.p)?;
    let len = x.c.len();
    let mut out = SBar::zero(x.p, x.zero_coef());
    for (i, a) in x.terms() {
        for (j, b) in y.c[..len - i].iter().enumerate() {
            if !b.is_zero() {
                out.c[i + j] = out.c[i + j] + a * *b;
            }
        }
    }
    Ok(out)
}

/// `u^d -> u^{pd}`, zero once `pd >= ep`. Coefficients are fixed.
pub fn sbar_frobenius<C: Scalar>(x: &SBar<C>) -> SBar<C> {
    let mut out = SBar::zero(x.p, x.zero_coef());
    for (d, c) in x.terms() {
        let t = d * x.p as usize;
        if t < out.c.len() {
            out.c[t] = c;
        }
    }
    out
}

/// `N_S = -u d/du`.
pub fn monodromy_s<C: Scalar>(x: &SBar<C>) -> SBar<C> {
    let mut out = SBar::zero(x.p, x.zero_coef());
    for (d, c) in x.terms() {
        out.c[d] = -(c.from_int_like(d as i64) * c);
    }
    out
}

/// Projection onto the degrees `d = c mod e`.
pub fn isotypic<C: Scalar>(x: &SBar<C>, c: usize) -> SBar<C> {
    let e = x.e();
    let mut out = SBar::zero(x.p, x.zero_coef());
    for (d, v) in x.terms() {
        if d % e == c % e {
            out.c[d] = v;
        }
    }
    out
}

impl<C: Scalar> Add for &SBar<C> {
    type Output = SBar<C>;
    fn add(self, o: &SBar<C>) -> SBar<C> {
        assert_eq!(self.p, o.p, "context mismatch");
        SBar { p: self.p, c: self.c.iter().zip(&o.c).map(|(&a, &b)| a + b).collect() }
    }
}

impl<C: Scalar> Sub for &SBar<C> {
    type Output = SBar<C>;
    fn sub(self, o: &SBar<C>) -> SBar<C> {
        assert_eq!(self.p, o.p, "context mismatch");
        SBar { p: self.p, c: self.c.iter().zip(&o.c).map(|(&a, &b)| a - b).collect() }
    }
}

impl<C: Scalar> Mul for &SBar<C> {
    type Output = SBar<C>;
    fn mul(self, o: &SBar<C>) -> SBar<C> {
        sbar_mul(self, o).expect("context mismatch")
    }
}

impl<C: Scalar> Neg for &SBar<C> {
    type Output = SBar<C>;
    fn neg(self) -> SBar<C> {
        SBar { p: self.p, c: self.c.iter().map(|&a| -a).collect() }
    }
}

/// Element of `F[w]/(w^p)` with `w = u^e`: the weight-zero part of [`SBar`].
#[derive(Clone, PartialEq, Eq)]
pub struct S0<C: Scalar> {
    p: u32,
    c: Vec<C>,
}

impl<C: Scalar> fmt::Debug for S0<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> =
            self.c.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| format!("{c:?}*w^{k}")).collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl<C: Scalar> S0<C> {
    pub fn zero(p: u32, zero_coef: C) -> Self {
        S0 { p, c: vec![zero_coef.zero_like(); p as usize] }
    }

    pub fn constant(p: u32, v: C) -> Self {
        let mut x = S0::zero(p, v);
        x.c[0] = v;
        x
    }

    /// `v * w^k`.
    pub fn monomial(p: u32, k: usize, v: C) -> Self {
        let mut x = S0::zero(p, v);
        if k < x.c.len() {
            x.c[k] = v;
        }
        x
    }

    pub fn from_coeffs(p: u32, coeffs: &[C]) -> Self {
        assert!(!coeffs.is_empty());
        let mut x = S0::zero(p, coeffs[0]);
        for (k, &v) in coeffs.iter().enumerate().take(p as usize) {
            x.c[k] = v;
        }
        x
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeff(&self, k: usize) -> C {
        self.c[k]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|c| c.is_zero())
    }

    pub fn w_order(&self) -> usize {
        self.c.iter().position(|c| !c.is_zero()).unwrap_or(self.c.len())
    }

    pub fn scale(&self, s: C) -> Self {
        S0 { p: self.p, c: self.c.iter().map(|&c| c * s).collect() }
    }

    /// Multiplication by `w^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut out = S0::zero(self.p, self.c[0]);
        for (i, &v) in self.c.iter().enumerate() {
            if i + k < out.c.len() {
                out.c[i + k] = v;
            }
        }
        out
    }

    /// Division by `w^k`; the top `k` coefficients of the result are zero.
    pub fn unshift(&self, k: usize) -> Option<Self> {
        if self.c[..k.min(self.c.len())].iter().any(|c| !c.is_zero()) {
            return None;
        }
        let mut out = S0::zero(self.p, self.c[0]);
        for i in k..self.c.len() {
            out.c[i - k] = self.c[i];
        }
        Some(out)
    }

    pub fn truncate(&self, keep: usize) -> Self {
        let mut x = self.clone();
        for c in x.c.iter_mut().skip(keep) {
            *c = c.zero_like();
        }
        x
    }

    pub fn inv(&self) -> Result<Self> {
        let c0inv = self.c[0].inv_unit()?;
        // Power series inversion in w.
        let n = self.c.len();
        let mut out = vec![self.c[0].zero_like(); n];
        out[0] = c0inv;
        for k in 1..n {
            let mut s = self.c[0].zero_like();
            for j in 1..=k {
                s = s + self.c[j] * out[k - j];
            }
            out[k] = -(s * c0inv);
        }
        Ok(S0 { p: self.p, c: out })
    }

    /// Embedding `w^k -> u^{ek}` into `SBar`.
    pub fn to_sbar(&self) -> SBar<C> {
        let e = (self.p - 1) as usize;
        let mut out = SBar::zero(self.p, self.c[0]);
        for (k, &v) in self.c.iter().enumerate() {
            out.c[k * e] = v;
        }
        out
    }

    /// Frobenius sends `w` to `w^p = 0`, leaving the constant term.
    pub fn frobenius(&self) -> Self {
        S0::constant(self.p, self.c[0])
    }
}

impl<C: Scalar> Add for &S0<C> {
    type Output = S0<C>;
    fn add(self, o: &S0<C>) -> S0<C> {
        assert_eq!(self.p, o.p, "context mismatch");
        S0 { p: self.p, c: self.c.iter().zip(&o.c).map(|(&a, &b)| a + b).collect() }
    }
}

impl<C: Scalar> Sub for &S0<C> {
    type Output = S0<C>;
    fn sub(self, o: &S0<C>) -> S0<C> {
        assert_eq!(self.p, o.p, "context mismatch");
        S0 { p: self.p, c: self.c.iter().zip(&o.c).map(|(&a, &b)| a - b).collect() }
    }
}

impl<C: Scalar> Mul for &S0<C> {
    type Output = S0<C>;
    fn mul(self, o: &S0<C>) -> S0<C> {
        assert_eq!(self.p, o.p, "context mismatch");
        let n = self.c.len();
        let mut out = S0::zero(self.p, self.c[0]);
        for (i, &a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for j in 0..n - i {
                out.c[i + j] = out.c[i + j] + a * o.c[j];
            }
        }
        out
    }
}

impl<C: Scalar> Neg for &S0<C> {
    type Output = S0<C>;
    fn neg(self) -> S0<C> {
        S0 { p: self.p, c: self.c.iter().map(|&a| -a).collect() }
    }
}
