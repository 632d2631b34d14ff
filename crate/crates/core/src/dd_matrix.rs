//! 3x3 matrices with descent data.
//!
//! Entry `(i,j)` stands for `u^{[a_i-a_j]} m_ij`; only `m_ij` is stored. A
//! product of twisted entries overshoots the target twist by a multiple of
//! `e`, which is paid back as a power of `u^e` in the base ring.

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::breuil_rings::{divide_by_E, frobenius_r, ideal_member_below, ue_power, IdealTag, RCtx, RElem, S0};
use crate::coeff::{PrimeCtx, Scalar, ZpN};
use crate::error::{Error, Result};

/// Base rings usable as entries: the truncated ring and `F[u^e]/(u^{ep})`.
pub trait DdEntry: Clone + PartialEq + Debug + Send + Sync {
    type Coef: Scalar;

    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Constant coefficient is invertible.
    fn is_unit(&self) -> bool;
    fn inv(&self) -> Result<Self>;
    /// `(u^e)^t`.
    fn ue_pow(&self, t: u32) -> Self;
    /// Coefficient of `E^k/k!` (or of `w^k` in characteristic `p`).
    fn coeff(&self, k: usize) -> Self::Coef;
    fn from_coef_like(&self, c: Self::Coef) -> Self;
    /// `c0 + c1 E`.
    fn affine_like(&self, c0: Self::Coef, c1: Self::Coef) -> Self;
    fn frobenius(&self) -> Self;
    /// Exact division by `E^k`; the top `k` coefficients become zero.
    fn divide_by_e(&self, k: usize) -> Result<Self>;
    /// Number of stored coefficients.
    fn level(&self) -> usize;
    /// Coefficientwise equality below `level`.
    fn eq_below(&self, o: &Self, level: usize) -> bool;
}

impl DdEntry for RElem {
    type Coef = ZpN;

    fn zero_like(&self) -> Self {
        RElem::zero(self.ctx())
    }
    fn one_like(&self) -> Self {
        RElem::one(self.ctx())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        RElem::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        RElem::is_unit(self)
    }
    fn inv(&self) -> Result<Self> {
        RElem::inv(self)
    }
    fn ue_pow(&self, t: u32) -> Self {
        ue_power(self.ctx(), t as usize)
    }
    fn coeff(&self, k: usize) -> ZpN {
        RElem::coeff(self, k)
    }
    fn from_coef_like(&self, c: ZpN) -> Self {
        RElem::from_zp(self.ctx(), c)
    }
    fn affine_like(&self, c0: ZpN, c1: ZpN) -> Self {
        let ctx = self.ctx();
        &RElem::from_zp(ctx, c0) + &RElem::delta(ctx, 1).scale(c1)
    }
    fn frobenius(&self) -> Self {
        frobenius_r(self)
    }
    fn divide_by_e(&self, k: usize) -> Result<Self> {
        divide_by_E(self, k)
    }
    fn level(&self) -> usize {
        self.ctx().fil_level()
    }
    fn eq_below(&self, o: &Self, level: usize) -> bool {
        self.raw_coeffs().iter().zip(o.raw_coeffs()).take(level).all(|(a, b)| a == b)
    }
}

impl<C: Scalar> DdEntry for S0<C> {
    type Coef = C;

    fn zero_like(&self) -> Self {
        S0::zero(self.p(), self.coeff(0))
    }
    fn one_like(&self) -> Self {
        S0::constant(self.p(), self.coeff(0).one_like())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        S0::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        self.coeff(0).is_unit()
    }
    fn inv(&self) -> Result<Self> {
        S0::inv(self)
    }
    fn ue_pow(&self, t: u32) -> Self {
        S0::monomial(self.p(), t as usize, self.coeff(0).one_like())
    }
    fn coeff(&self, k: usize) -> C {
        S0::coeff(self, k)
    }
    fn from_coef_like(&self, c: C) -> Self {
        S0::constant(self.p(), c)
    }
    fn affine_like(&self, c0: C, c1: C) -> Self {
        &S0::constant(self.p(), c0) + &S0::monomial(self.p(), 1, c1)
    }
    fn frobenius(&self) -> Self {
        S0::frobenius(self)
    }
    fn divide_by_e(&self, k: usize) -> Result<Self> {
        self.unshift(k).ok_or(Error::NotDivisible { entry: None })
    }
    fn level(&self) -> usize {
        self.p() as usize
    }
    fn eq_below(&self, o: &Self, level: usize) -> bool {
        self.coeffs().iter().zip(o.coeffs()).take(level).all(|(a, b)| a == b)
    }
}

/// Matrix with descent data; `m[i][j]` is the untwisted part of entry `(i,j)`.
#[derive(Clone, PartialEq)]
pub struct DDMatrix<T: DdEntry> {
    ctx: PrimeCtx,
    m: [[T; 3]; 3],
}

impl<T: DdEntry> Debug for DDMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DDMatrix(p={}, a={:?})", self.ctx.p(), self.ctx.weights())?;
        for i in 0..3 {
            for j in 0..3 {
                writeln!(f, "  [{i},{j}] u^{} * ({:?})", self.ctx.bracket(i, j), self.m[i][j])?;
            }
        }
        Ok(())
    }
}

impl<T: DdEntry> DDMatrix<T> {
    pub fn new(ctx: PrimeCtx, m: [[T; 3]; 3]) -> Self {
        DDMatrix { ctx, m }
    }

    /// `proto` fixes the base ring.
    pub fn identity(ctx: PrimeCtx, proto: &T) -> Self {
        Self::diag(ctx, [proto.one_like(), proto.one_like(), proto.one_like()])
    }

    pub fn zero(ctx: PrimeCtx, proto: &T) -> Self {
        let z = proto.zero_like();
        DDMatrix { ctx, m: std::array::from_fn(|_| std::array::from_fn(|_| z.clone())) }
    }

    pub fn diag(ctx: PrimeCtx, d: [T; 3]) -> Self {
        let mut x = Self::zero(ctx, &d[0]);
        for (i, v) in d.into_iter().enumerate() {
            x.m[i][i] = v;
        }
        x
    }

    /// Lower unipotent matrix with the given below-diagonal entries.
    pub fn unipotent(ctx: PrimeCtx, v10: T, v20: T, v21: T) -> Self {
        let mut x = Self::identity(ctx, &v10);
        x.m[1][0] = v10;
        x.m[2][0] = v20;
        x.m[2][1] = v21;
        x
    }

    pub fn ctx(&self) -> &PrimeCtx {
        &self.ctx
    }

    pub fn entry(&self, i: usize, j: usize) -> &T {
        &self.m[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.m[i][j] = v;
    }

    pub fn entries(&self) -> &[[T; 3]; 3] {
        &self.m
    }

    pub fn map(&self, f: impl Fn(usize, usize, &T) -> T) -> Self {
        DDMatrix { ctx: self.ctx, m: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j, &self.m[i][j]))) }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(self.map(|i, j, x| x.add(&o.m[i][j])))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(self.map(|i, j, x| x.sub(&o.m[i][j])))
    }

    /// Entries agree on every coefficient below `level`.
    pub fn eq_below(&self, o: &Self, level: usize) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.m[i][j].eq_below(&o.m[i][j], level)))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..3).all(|i| (i + 1..3).all(|j| self.m[i][j].is_zero()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..3).all(|i| (0..i).all(|j| self.m[i][j].is_zero()))
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_lower_triangular() && self.is_upper_triangular()
    }

    /// Diagonal with constant entries.
    pub fn is_constant_diagonal(&self) -> bool {
        self.is_diagonal()
            && (0..3).all(|i| {
                let d = &self.m[i][i];
                d.sub(&d.from_coef_like(d.coeff(0))).is_zero()
            })
    }

    /// Constant coefficients of the diagonal.
    pub fn diagonal_constants(&self) -> [T::Coef; 3] {
        std::array::from_fn(|i| self.m[i][i].coeff(0))
    }

    /// Multiplies column `j` by `d[j]`.
    pub fn scale_columns(&self, d: &[T::Coef; 3]) -> Self {
        self.map(|_, j, x| x.mul(&x.from_coef_like(d[j])))
    }

    /// Multiplies row `i` by `d[i]`.
    pub fn scale_rows(&self, d: &[T::Coef; 3]) -> Self {
        self.map(|i, _, x| x.mul(&x.from_coef_like(d[i])))
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.ctx == o.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// `u^{[..]} x * u^{[..]} y * ...` landing in twist `[a_i - a_j]`.
    fn twisted_product(&self, factors: &[(usize, usize)], target: (usize, usize)) -> T {
        let ctx = &self.ctx;
        let sum: u32 = factors.iter().map(|&(i, j)| ctx.bracket(i, j)).sum();
        let excess = (sum - ctx.bracket(target.0, target.1)) / ctx.e();
        let mut acc = self.m[factors[0].0][factors[0].1].clone();
        for &(i, j) in &factors[1..] {
            acc = acc.mul(&self.m[i][j]);
        }
        if excess > 0 {
            acc = acc.mul(&acc.ue_pow(excess));
        }
        acc
    }
}

/// Product with the `u^e` correction `(XY)_ij = sum_k (u^e)^{c(i,k,j)} x_ik y_kj`.
pub fn dd_mul<T: DdEntry>(x: &DDMatrix<T>, y: &DDMatrix<T>) -> Result<DDMatrix<T>> {
    x.check(y)?;
    let ctx = x.ctx;
    let ue = x.m[0][0].ue_pow(1);
    let m = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut acc = x.m[0][0].zero_like();
            for k in 0..3 {
                let mut t = x.m[i][k].mul(&y.m[k][j]);
                if ctx.twist_excess(i, k, j) == 1 {
                    t = t.mul(&ue);
                }
                acc = acc.add(&t);
            }
            acc
        })
    });
    Ok(DDMatrix { ctx, m })
}

const PERMS: [([usize; 3], bool); 6] = [
    ([0, 1, 2], true),
    ([0, 2, 1], false),
    ([1, 0, 2], false),
    ([1, 2, 0], true),
    ([2, 0, 1], true),
    ([2, 1, 0], false),
];

/// Determinant with twist corrections; it has twist zero.
pub fn dd_det<T: DdEntry>(x: &DDMatrix<T>) -> T {
    let mut acc = x.m[0][0].zero_like();
    for (s, even) in PERMS {
        let t = x.twisted_product(&[(0, s[0]), (1, s[1]), (2, s[2])], (0, 0));
        acc = if even { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// Adjugate: `adj_ij = (-1)^{i+j}` times the minor deleting row `j` and column `i`.
pub fn dd_adjugate<T: DdEntry>(x: &DDMatrix<T>) -> DDMatrix<T> {
    let m = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let rows: Vec<usize> = (0..3).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..3).filter(|&c| c != i).collect();
            let d = x
                .twisted_product(&[(rows[0], cols[0]), (rows[1], cols[1])], (i, j))
                .sub(&x.twisted_product(&[(rows[0], cols[1]), (rows[1], cols[0])], (i, j)));
            if (i + j) % 2 == 0 {
                d
            } else {
                d.neg()
            }
        })
    });
    DDMatrix { ctx: x.ctx, m }
}

/// Entrywise exact division by `E^k`.
#[allow(non_snake_case)]
pub fn dd_divide_by_E<T: DdEntry>(x: &DDMatrix<T>, k: usize) -> Result<DDMatrix<T>> {
    let mut out = x.clone();
    for i in 0..3 {
        for j in 0..3 {
            out.m[i][j] = x.m[i][j].divide_by_e(k).map_err(|_| Error::NotDivisible { entry: Some((i, j)) })?;
        }
    }
    Ok(out)
}

/// Frobenius on a twisted matrix: `phi(u^t m) = u^t (u^e)^t phi(m)` since `u^{pt} = u^t u^{et}`.
pub fn dd_frobenius<T: DdEntry>(x: &DDMatrix<T>) -> DDMatrix<T> {
    let ctx = x.ctx;
    x.map(|i, j, v| {
        let f = v.frobenius();
        let t = ctx.bracket(i, j);
        if t == 0 {
            f
        } else {
            f.mul(&f.ue_pow(t))
        }
    })
}

/// Which congruence statement `dd_frobenius_checked` asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrobeniusContract {
    /// Input in `GL` (n = 0) or `T + M(p^n R)`; output in `T + M(p^n J + p^n I + p^{n+1} R)`.
    Twisted(u32),
    /// Input in `T + M(p^n (p, Fil^1))`; output in `T + M(p^{n+1} R)`.
    Filtered(u32),
}

/// [`dd_frobenius`] with the hypothesis and conclusion checked on the first `level` coefficients.
pub fn dd_frobenius_checked(
    x: &DDMatrix<RElem>,
    contract: FrobeniusContract,
    level: usize,
) -> Result<DDMatrix<RElem>> {
    let (hyp, concl, n) = match contract {
        FrobeniusContract::Twisted(n) => {
            if x.ctx.min_bracket() < 3 {
                return Err(Error::GenericityViolation(format!(
                    "bracket {} < 3 in the twisted Frobenius contract",
                    x.ctx.min_bracket()
                )));
            }
            let hyp = if n == 0 { SubsetTag::GL } else { SubsetTag::TPlus(IdealTag::PowR(n)) };
            (hyp, SubsetTag::TPlus(IdealTag::OddHyp(n)), n)
        }
        FrobeniusContract::Filtered(n) => {
            (SubsetTag::TPlus(IdealTag::PowPFil1(n)), SubsetTag::TPlus(IdealTag::PowR(n + 1)), n)
        }
    };
    if !subset_member_below(x, hyp, level) {
        return Err(Error::MembershipFailure(format!("Frobenius input not in {hyp:?}")));
    }
    let y = dd_frobenius(x);
    if !subset_member(&y, concl) {
        return Err(Error::MembershipFailure(format!("Frobenius output not in {concl:?}")));
    }
    let diff = y.sub(x)?;
    if !subset_member_below(&diff, SubsetTag::Entries(IdealTag::PowR(n)), level) {
        return Err(Error::MembershipFailure(format!("Frobenius moved the matrix modulo p^{n}")));
    }
    Ok(y)
}

/// Structured subsets of matrices over the truncated ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsetTag {
    /// Invertible: the determinant is a unit.
    GL,
    /// Invertible upper triangular.
    BUpper,
    /// Invertible lower triangular.
    BOpp,
    /// Lower unipotent.
    UOpp,
    /// Lower triangular.
    LLower,
    /// Constant diagonal with unit entries.
    TScalar,
    /// Every entry lies in the ideal.
    Entries(IdealTag),
    /// Constant unit diagonal plus entries in the ideal.
    TPlus(IdealTag),
    /// `T + L(lower) + M(rest)`: strictly lower entries in the first ideal,
    /// the rest (after removing a constant unit diagonal) in the second.
    TPlusLower(IdealTag, IdealTag),
    /// Invertible lower triangular plus entries in the ideal.
    BOppPlus(IdealTag),
}

pub fn subset_member(x: &DDMatrix<RElem>, tag: SubsetTag) -> bool {
    subset_member_below(x, tag, x.m[0][0].ctx().fil_level())
}

/// Membership judged on the coefficients below `level`.
pub fn subset_member_below(x: &DDMatrix<RElem>, tag: SubsetTag, level: usize) -> bool {
    let det_unit = || dd_det(x).is_unit();
    let diag_units = || (0..3).all(|i| x.m[i][i].is_unit());
    let off = |i: usize, j: usize, t: IdealTag| ideal_member_below(&x.m[i][j], t, level);
    // Diagonal entry of the form `t + y` with `t` a constant unit and `y` in the ideal.
    let diag_ok = |i: usize, t: IdealTag| {
        let d = &x.m[i][i];
        d.is_unit() && ideal_member_below(&(d - &RElem::from_zp(d.ctx(), d.coeff(0))), t, level)
    };
    let zero_above = || (0..3).all(|i| (i + 1..3).all(|j| x.m[i][j].truncate(level).is_zero()));
    let zero_below = || (0..3).all(|i| (0..i).all(|j| x.m[i][j].truncate(level).is_zero()));
    match tag {
        SubsetTag::GL => det_unit(),
        SubsetTag::BUpper => zero_below() && diag_units(),
        SubsetTag::BOpp => zero_above() && diag_units(),
        SubsetTag::UOpp => {
            zero_above() && (0..3).all(|i| x.m[i][i].truncate(level) == RElem::one(x.m[i][i].ctx()).truncate(level))
        }
        SubsetTag::LLower => zero_above(),
        SubsetTag::TScalar => {
            zero_above() && zero_below() && (0..3).all(|i| diag_ok(i, IdealTag::Fil(usize::MAX)))
        }
        SubsetTag::Entries(t) => (0..3).all(|i| (0..3).all(|j| off(i, j, t))),
        SubsetTag::TPlus(t) => (0..3).all(|i| diag_ok(i, t) && (0..3).all(|j| i == j || off(i, j, t))),
        SubsetTag::TPlusLower(lower, rest) => (0..3).all(|i| {
            diag_ok(i, rest) && (0..3).all(|j| i == j || off(i, j, if i > j { lower } else { rest }))
        }),
        SubsetTag::BOppPlus(t) => diag_units() && (0..3).all(|i| (i + 1..3).all(|j| off(i, j, t))),
    }
}

/// The filtration matrix `U * Diag(1, E, E^2)` as a plain matrix.
pub fn filtration_matrix<T: DdEntry>(u: &DDMatrix<T>) -> DDMatrix<T> {
    let one = u.m[0][0].one_like();
    // `E` is `delta_1` in the truncated ring and reduces to `w = u^e` mod p.
    let e = one.affine_like(one.coeff(0).zero_like(), one.coeff(0).one_like());
    let d = DDMatrix::diag(u.ctx, [one, e.clone(), e.mul(&e)]);
    dd_mul(u, &d).expect("same context")
}

/// Context helper for tests and callers building matrices over the truncated ring.
pub fn r_identity(ctx: PrimeCtx, rctx: &Arc<RCtx>) -> DDMatrix<RElem> {
    DDMatrix::identity(ctx, &RElem::one(rctx))
}
