//! Coefficient rings: `F_p`, `Z/p^N` and the dual numbers `F_p[eps]/(eps^2)`.
//!
//! Every value carries its modulus, so values are self-contained and can be
//! moved between threads freely.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prime, ramification degree `e = p - 1` and the weight triple of the type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeCtx {
    p: u32,
    weights: [u32; 3],
}

impl PrimeCtx {
    /// Builds a context; `p` must be an odd prime and `0 <= a0 < a1 < a2 <= p - 2`.
    pub fn new(p: u32, weights: [u32; 3]) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not an odd prime")));
        }
        if p > 1 << 15 {
            return Err(Error::InvalidInput(format!("prime {p} too large")));
        }
        let [a0, a1, a2] = weights;
        if !(a0 < a1 && a1 < a2 && a2 <= p - 2) {
            return Err(Error::InvalidInput(format!(
                "weights {weights:?} must satisfy 0 <= a0 < a1 < a2 <= p-2"
            )));
        }
        Ok(PrimeCtx { p, weights })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.p - 1
    }

    pub fn weights(&self) -> [u32; 3] {
        self.weights
    }

    /// `[a_i - a_j]`: the representative in `0..e` of `-(a_i - a_j)` mod `e`.
    pub fn bracket(&self, i: usize, j: usize) -> u32 {
        let e = self.e() as i64;
        let d = self.weights[j] as i64 - self.weights[i] as i64;
        d.rem_euclid(e) as u32
    }

    /// `c(i,k,j) = ([a_i-a_k] + [a_k-a_j] - [a_i-a_j]) / e`, always 0 or 1.
    pub fn twist_excess(&self, i: usize, k: usize, j: usize) -> u32 {
        let s = self.bracket(i, k) + self.bracket(k, j) - self.bracket(i, j);
        debug_assert_eq!(s % self.e(), 0);
        s / self.e()
    }

    pub fn is_strongly_generic(&self) -> bool {
        check_strong_genericity(self.p, self.weights)
    }

    /// Smallest bracket over ordered pairs `i != j`.
    pub fn min_bracket(&self) -> u32 {
        let mut m = u32::MAX;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    m = m.min(self.bracket(i, j));
                }
            }
        }
        m
    }
}

/// `a1 - a0 > 3`, `a2 - a1 > 3` and `a2 - a0 < p - 4`.
pub fn check_strong_genericity(p: u32, weights: [u32; 3]) -> bool {
    let [a0, a1, a2] = weights.map(|a| a as i64);
    let p = p as i64;
    a1 - a0 > 3 && a2 - a1 > 3 && a2 - a0 < p - 4
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Ring operations shared by the three coefficient types.
pub trait Scalar:
    Copy
    + PartialEq
    + Eq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_int_like(&self, v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_unit(&self) -> bool;
    fn inv_unit(&self) -> Result<Self>;
    fn prime(&self) -> u32;
}

fn inv_mod(x: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, x as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Element of the prime field `F_p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fq {
    v: u32,
    p: u32,
}

impl Fq {
    pub fn new(v: i64, p: u32) -> Self {
        Fq { v: v.rem_euclid(p as i64) as u32, p }
    }

    pub fn value(&self) -> u32 {
        self.v
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Add for Fq {
    type Output = Fq;
    fn add(self, o: Fq) -> Fq {
        debug_assert_eq!(self.p, o.p);
        let s = self.v + o.v;
        Fq { v: if s >= self.p { s - self.p } else { s }, p: self.p }
    }
}

impl Sub for Fq {
    type Output = Fq;
    fn sub(self, o: Fq) -> Fq {
        debug_assert_eq!(self.p, o.p);
        Fq { v: if self.v >= o.v { self.v - o.v } else { self.v + self.p - o.v }, p: self.p }
    }
}

impl Mul for Fq {
    type Output = Fq;
    fn mul(self, o: Fq) -> Fq {
        debug_assert_eq!(self.p, o.p);
        Fq { v: ((self.v as u64 * o.v as u64) % self.p as u64) as u32, p: self.p }
    }
}

impl Neg for Fq {
    type Output = Fq;
    fn neg(self) -> Fq {
        Fq { v: if self.v == 0 { 0 } else { self.p - self.v }, p: self.p }
    }
}

impl Scalar for Fq {
    fn zero_like(&self) -> Self {
        Fq { v: 0, p: self.p }
    }
    fn one_like(&self) -> Self {
        Fq { v: 1, p: self.p }
    }
    fn from_int_like(&self, v: i64) -> Self {
        Fq::new(v, self.p)
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn is_unit(&self) -> bool {
        self.v != 0
    }
    fn inv_unit(&self) -> Result<Self> {
        inv_mod(self.v as u64, self.p as u64)
            .map(|v| Fq { v: v as u32, p: self.p })
            .ok_or(Error::NonUnit)
    }
    fn prime(&self) -> u32 {
        self.p
    }
}

/// Residue modulo `p^N`, stored as its canonical representative in `[0, p^N)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZpN {
    v: u64,
    modulus: u64,
    p: u32,
    n: u32,
}

impl ZpN {
    /// Requires `p^n < 2^62`.
    pub fn new(v: i128, p: u32, n: u32) -> Self {
        let modulus = pow_u64(p as u64, n);
        ZpN { v: v.rem_euclid(modulus as i128) as u64, modulus, p, n }
    }

    pub fn value(&self) -> u64 {
        self.v
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// p-adic valuation of the representative; `N` for zero.
    pub fn valuation(&self) -> u32 {
        valuation_u64(self.v, self.p, self.n)
    }

    /// Reduction to a lower precision `n' <= n`.
    pub fn reduce(&self, n: u32) -> ZpN {
        assert!(n <= self.n);
        ZpN::new(self.v as i128, self.p, n)
    }

    pub fn to_fq(&self) -> Fq {
        Fq::new((self.v % self.p as u64) as i64, self.p)
    }

    /// Signed representative in `(-p^N/2, p^N/2]`.
    pub fn signed(&self) -> i128 {
        if self.v > self.modulus / 2 {
            self.v as i128 - self.modulus as i128
        } else {
            self.v as i128
        }
    }
}

pub(crate) fn pow_u64(b: u64, e: u32) -> u64 {
    let r = (b as u128).pow(e);
    assert!(r < (1u128 << 62), "p^N exceeds the supported range");
    r as u64
}

pub(crate) fn valuation_u64(v: u64, p: u32, cap: u32) -> u32 {
    if v == 0 {
        return cap;
    }
    let mut v = v;
    let mut k = 0;
    while v.is_multiple_of(p as u64) && k < cap {
        v /= p as u64;
        k += 1;
    }
    k
}

impl fmt::Debug for ZpN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl fmt::Display for ZpN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Add for ZpN {
    type Output = ZpN;
    fn add(self, o: ZpN) -> ZpN {
        debug_assert_eq!(self.modulus, o.modulus);
        let s = self.v + o.v;
        ZpN { v: if s >= self.modulus { s - self.modulus } else { s }, ..self }
    }
}

impl Sub for ZpN {
    type Output = ZpN;
    fn sub(self, o: ZpN) -> ZpN {
        debug_assert_eq!(self.modulus, o.modulus);
        ZpN { v: if self.v >= o.v { self.v - o.v } else { self.v + self.modulus - o.v }, ..self }
    }
}

impl Mul for ZpN {
    type Output = ZpN;
    fn mul(self, o: ZpN) -> ZpN {
        debug_assert_eq!(self.modulus, o.modulus);
        ZpN { v: ((self.v as u128 * o.v as u128) % self.modulus as u128) as u64, ..self }
    }
}

impl Neg for ZpN {
    type Output = ZpN;
    fn neg(self) -> ZpN {
        ZpN { v: if self.v == 0 { 0 } else { self.modulus - self.v }, ..self }
    }
}

impl Scalar for ZpN {
    fn zero_like(&self) -> Self {
        ZpN { v: 0, ..*self }
    }
    fn one_like(&self) -> Self {
        ZpN { v: 1 % self.modulus, ..*self }
    }
    fn from_int_like(&self, v: i64) -> Self {
        ZpN { v: (v as i128).rem_euclid(self.modulus as i128) as u64, ..*self }
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn is_unit(&self) -> bool {
        !self.v.is_multiple_of(self.p as u64)
    }
    fn inv_unit(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NonUnit);
        }
        inv_mod(self.v, self.modulus).map(|v| ZpN { v, ..*self }).ok_or(Error::NonUnit)
    }
    fn prime(&self) -> u32 {
        self.p
    }
}

/// Dual number `a + b*eps` over `F_p`, with `eps^2 = 0`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dual {
    pub re: Fq,
    pub eps: Fq,
}

impl Dual {
    pub fn new(re: Fq, eps: Fq) -> Self {
        debug_assert_eq!(re.p, eps.p);
        Dual { re, eps }
    }

    pub fn constant(re: Fq) -> Self {
        Dual { re, eps: re.zero_like() }
    }
}

impl fmt::Debug for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}e", self.re, self.eps)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { re: self.re + o.re, eps: self.eps + o.eps }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { re: self.re - o.re, eps: self.eps - o.eps }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { re: self.re * o.re, eps: self.re * o.eps + self.eps * o.re }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { re: -self.re, eps: -self.eps }
    }
}

impl Scalar for Dual {
    fn zero_like(&self) -> Self {
        Dual::constant(self.re.zero_like())
    }
    fn one_like(&self) -> Self {
        Dual::constant(self.re.one_like())
    }
    fn from_int_like(&self, v: i64) -> Self {
        Dual::constant(self.re.from_int_like(v))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
    fn is_unit(&self) -> bool {
        self.re.is_unit()
    }
    fn inv_unit(&self) -> Result<Self> {
        let r = self.re.inv_unit()?;
        Ok(Dual { re: r, eps: -(self.eps * r * r) })
    }
    fn prime(&self) -> u32 {
        self.re.p
    }
}

macro_rules! assign_ops {
    ($($t:ty),*) => {$(
        impl AddAssign for $t {
            fn add_assign(&mut self, o: $t) {
                *self = *self + o;
            }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, o: $t) {
                *self = *self - o;
            }
        }
        impl MulAssign for $t {
            fn mul_assign(&mut self, o: $t) {
                *self = *self * o;
            }
        }
    )*};
}

assign_ops!(Fq, ZpN, Dual);

/// Inverse of a unit.
pub fn inv_unit<T: Scalar>(x: T) -> Result<T> {
    x.inv_unit()
}

/// `k! = p^v * unit` with `v = (k - S_p(k)) / (p - 1)`; the unit is returned mod `p^n`.
pub fn factorial_split(k: u64, p: u32, n: u32) -> (u32, ZpN) {
    let mut unit = ZpN::new(1, p, n);
    let mut v = 0u32;
    for i in 2..=k {
        let mut m = i;
        while m % p as u64 == 0 {
            m /= p as u64;
            v += 1;
        }
        unit *= ZpN::new(m as i128, p, n);
    }
    (v, unit)
}

/// Sum of the base-`p` digits of `k`.
pub fn digit_sum(k: u64, p: u32) -> u64 {
    let mut k = k;
    let mut s = 0;
    while k > 0 {
        s += k % p as u64;
        k /= p as u64;
    }
    s
}
