//! Matrix-level functors out of ordinary mod-p modules: the étale
//! phi-module over `F((pi))`, its descent to `F((pbar))` with `pbar = pi^e`,
//! and the Fontaine-Laffaille module read off from it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::coeff::{Fq, PrimeCtx, Scalar};
use crate::error::{Error, Result};
use crate::monodromy::OrdinaryModule;

/// Truncated polynomial in one variable with sparse coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    terms: BTreeMap<u32, Fq>,
    trunc: u32,
}

impl SparsePoly {
    pub fn zero(trunc: u32) -> Self {
        SparsePoly { terms: BTreeMap::new(), trunc }
    }

    pub fn monomial(deg: u32, c: Fq, trunc: u32) -> Self {
        let mut x = SparsePoly::zero(trunc);
        x.add_term(deg, c);
        x
    }

    fn add_term(&mut self, deg: u32, c: Fq) {
        if deg >= self.trunc || c.is_zero() {
            return;
        }
        let slot = self.terms.entry(deg).or_insert(c.zero_like());
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&deg);
        }
    }

    pub fn truncation(&self) -> u32 {
        self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, Fq)> + '_ {
        self.terms.iter().map(|(&d, &c)| (d, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().next().copied()
    }

    pub fn add(&self, o: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        out.trunc = self.trunc.min(o.trunc);
        out.terms.retain(|&d, _| d < out.trunc);
        for (d, c) in o.terms() {
            out.add_term(d, c);
        }
        out
    }

    pub fn neg(&self) -> SparsePoly {
        SparsePoly { terms: self.terms.iter().map(|(&d, &c)| (d, -c)).collect(), trunc: self.trunc }
    }

    pub fn mul(&self, o: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero(self.trunc.min(o.trunc));
        for (a, x) in self.terms() {
            for (b, y) in o.terms() {
                out.add_term(a + b, x * y);
            }
        }
        out
    }

    pub fn scale(&self, s: Fq) -> SparsePoly {
        let mut out = SparsePoly::zero(self.trunc);
        for (d, c) in self.terms() {
            out.add_term(d, c * s);
        }
        out
    }

    /// Multiplication by `X^k`; the truncation moves along so nothing is lost.
    pub fn shift(&self, k: u32) -> SparsePoly {
        SparsePoly { terms: self.terms.iter().map(|(&d, &c)| (d + k, c)).collect(), trunc: self.trunc + k }
    }

    pub fn to_pairs(&self) -> Vec<(u32, u32)> {
        self.terms().map(|(d, c)| (d, c.value())).collect()
    }
}

pub type PolyMatrix = [[SparsePoly; 3]; 3];

/// Determinant by cofactor expansion.
pub fn poly_det(m: &PolyMatrix) -> SparsePoly {
    let minor = |a: usize, b: usize, c: usize, d: usize| m[1][a].mul(&m[2][b]).add(&m[1][c].mul(&m[2][d]).neg());
    m[0][0]
        .mul(&minor(1, 2, 2, 1))
        .add(&m[0][1].mul(&minor(0, 2, 2, 0)).neg())
        .add(&m[0][2].mul(&minor(0, 1, 1, 0)))
}

/// Étale phi-module: Frobenius matrix over `F[pi]/(pi^T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtalePhiModule {
    pub ctx: PrimeCtx,
    pub truncation: u32,
    pub frob: PolyMatrix,
}

impl EtalePhiModule {
    pub fn det_valuation(&self) -> Option<u32> {
        poly_det(&self.frob).valuation()
    }
}

/// Default `pi`-adic truncation `e * p`.
pub fn default_truncation(ctx: &PrimeCtx) -> u32 {
    ctx.e() * ctx.p()
}

/// `V^t (A^{-1})^t` with `V`, `A = Diag(alpha)` lifted along `u -> pi`.
pub fn to_etale(m: &OrdinaryModule<Fq>, truncation: u32) -> Result<EtalePhiModule> {
    let ctx = *m.ctx();
    let e = ctx.e();
    let max_bracket = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| ctx.bracket(i, j)).max().unwrap_or(0);
    let need = 2 * e + max_bracket + 1;
    if truncation < need {
        return Err(Error::TruncationTooSmall { got: truncation, need });
    }
    let g = m.gauge();
    let p = ctx.p();
    let t = truncation;
    let mono = |d: u32, c: Fq| SparsePoly::monomial(d, c, t);
    let one = Fq::new(1, p);
    let b = |i, j| ctx.bracket(i, j);
    // Transpose of the filtration matrix: upper triangular.
    let mut vt: PolyMatrix = std::array::from_fn(|_| std::array::from_fn(|_| SparsePoly::zero(t)));
    vt[0][0] = mono(0, one);
    vt[1][1] = mono(e, one);
    vt[2][2] = mono(2 * e, one);
    vt[0][1] = mono(b(1, 0), g.v10);
    vt[0][2] = mono(b(2, 0), g.v20).add(&mono(b(2, 0) + e, g.v20p));
    vt[1][2] = mono(e + b(2, 1), g.v21);
    let inv: Vec<Fq> = g.lambda.iter().map(|a| a.inv_unit()).collect::<Result<_>>()?;
    let frob = std::array::from_fn(|i| std::array::from_fn(|j| vt[i][j].scale(inv[j])));
    Ok(EtalePhiModule { ctx, truncation, frob })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descended {
    /// Frobenius over `F[pbar]` in the basis `pi^{a_i} e_i`.
    pub frob: PolyMatrix,
    /// Exponent of `pbar` on each diagonal entry.
    pub diagonal_exponents: [Option<u32>; 3],
}

/// Base change by `Diag(pi^{a_i})`: entry `(i,j)` gains `pi^{p a_j - a_i}`
/// because the Frobenius sends `pi` to `pi^p`. Every exponent must then be a
/// multiple of `e`, and `pi^e` becomes `pbar`.
pub fn descend_isotypic(em: &EtalePhiModule) -> Result<Descended> {
    let ctx = &em.ctx;
    let (p, e) = (ctx.p(), ctx.e());
    let a = ctx.weights();
    let mut frob: PolyMatrix = std::array::from_fn(|_| std::array::from_fn(|_| SparsePoly::zero(0)));
    for i in 0..3 {
        for j in 0..3 {
            let x = &em.frob[i][j];
            let shift = p * a[j];
            // Only upper entries occur, so `p a_j - a_i >= 0` whenever the entry is nonzero.
            let trunc = (x.truncation() + shift).saturating_sub(a[i]).div_ceil(e);
            let mut out = SparsePoly::zero(trunc);
            for (d, c) in x.terms() {
                let exponent = (d + shift).checked_sub(a[i]).ok_or(Error::ExponentNotDivisible {
                    i,
                    j,
                    exponent: d as i64 + shift as i64 - a[i] as i64,
                })?;
                if exponent % e != 0 {
                    return Err(Error::ExponentNotDivisible { i, j, exponent: exponent as i64 });
                }
                out.add_term(exponent / e, c);
            }
            frob[i][j] = out;
        }
    }
    let diagonal_exponents = std::array::from_fn(|i| frob[i][i].valuation());
    Ok(Descended { frob, diagonal_exponents })
}

/// Fontaine-Laffaille module with Frobenius `U(x, y, z) Diag(alpha^{-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FLModule {
    pub hodge_tate: [u32; 3],
    pub frob: [[Fq; 3]; 3],
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct FLReport {
    pub hodge_tate: [u32; 3],
    pub frob: [[u32; 3]; 3],
}

impl From<&FLModule> for FLReport {
    fn from(f: &FLModule) -> Self {
        FLReport { hodge_tate: f.hodge_tate, frob: f.frob.map(|r| r.map(|c| c.value())) }
    }
}

pub fn fl_weights(ctx: &PrimeCtx) -> [u32; 3] {
    let [a0, a1, a2] = ctx.weights();
    [0, a1 - a0 + 1, a2 - a0 + 2]
}

pub fn to_fl(m: &OrdinaryModule<Fq>) -> Result<FLModule> {
    let g = m.gauge();
    if !g.v20.is_zero() {
        return Err(Error::NoMonodromy);
    }
    let p = m.ctx().p();
    let (one, zero) = (Fq::new(1, p), Fq::new(0, p));
    let u = [[one, g.v10, g.v20p], [zero, one, g.v21], [zero, zero, one]];
    let inv: Vec<Fq> = g.lambda.iter().map(|a| a.inv_unit()).collect::<Result<_>>()?;
    Ok(FLModule { hodge_tate: fl_weights(m.ctx()), frob: std::array::from_fn(|i| std::array::from_fn(|j| u[i][j] * inv[j])) })
}

/// Removes the column twist `Diag(pbar^{a0}, pbar^{a1+1}, pbar^{a2+2})`,
/// which must leave a constant matrix.
pub fn strip_twist(ctx: &PrimeCtx, d: &Descended) -> Result<[[Fq; 3]; 3]> {
    let [a0, a1, a2] = ctx.weights();
    let twist = [a0, a1 + 1, a2 + 2];
    let zero = Fq::new(0, ctx.p());
    let mut out = [[zero; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (deg, c) in d.frob[i][j].terms() {
                if deg != twist[j] {
                    return Err(Error::ExponentNotDivisible { i, j, exponent: deg as i64 - twist[j] as i64 });
                }
                out[i][j] = c;
            }
        }
    }
    Ok(out)
}

fn check_weights(f1: &FLModule, f2: &FLModule) -> Result<()> {
    if f1.hodge_tate == f2.hodge_tate {
        Ok(())
    } else {
        Err(Error::WeightMismatch)
    }
}

/// Units `c` with `Mat1 = Mat2 Diag(c)`, if any.
pub fn right_scaling(f1: &FLModule, f2: &FLModule) -> Result<Option<[Fq; 3]>> {
    check_weights(f1, f2)?;
    let mut c = [f1.frob[0][0]; 3];
    for j in 0..3 {
        // The diagonal entry of a valid module is a unit and fixes the scale.
        let Ok(inv) = f2.frob[j][j].inv_unit() else {
            return Ok(None);
        };
        c[j] = f1.frob[j][j] * inv;
        if !c[j].is_unit() || (0..3).any(|i| f1.frob[i][j] != f2.frob[i][j] * c[j]) {
            return Ok(None);
        }
    }
    Ok(Some(c))
}

/// Isomorphism by a right diagonal change, as in the uniqueness argument.
pub fn fl_isomorphic(f1: &FLModule, f2: &FLModule) -> Result<bool> {
    Ok(right_scaling(f1, f2)?.is_some())
}

/// Isomorphism by diagonal conjugation `Mat1 = D^{-1} Mat2 D`.
pub fn fl_isomorphic_conjugate(f1: &FLModule, f2: &FLModule) -> Result<bool> {
    check_weights(f1, f2)?;
    let p = f1.frob[0][0].prime();
    for d1 in 1..p {
        for d2 in 1..p {
            let d = [Fq::new(1, p), Fq::new(d1 as i64, p), Fq::new(d2 as i64, p)];
            let ok = (0..3).all(|i| {
                (0..3).all(|j| f1.frob[i][j] * d[i] == f2.frob[i][j] * d[j])
            });
            if ok {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Gauge obtained from the basis change `e_i -> t_i e_i`: the filtration
/// constants transform as `v_ij -> (t_j / t_i) v_ij` and the Frobenius units stay.
pub fn rescale_gauge(m: &OrdinaryModule<Fq>, t: [Fq; 3]) -> Result<OrdinaryModule<Fq>> {
    let inv: Vec<Fq> = t.iter().map(|x| x.inv_unit()).collect::<Result<_>>()?;
    let g = m.gauge();
    let mut h = *g;
    h.v10 = g.v10 * t[0] * inv[1];
    h.v20 = g.v20 * t[0] * inv[2];
    h.v20p = g.v20p * t[0] * inv[2];
    h.v21 = g.v21 * t[1] * inv[2];
    OrdinaryModule::new(*m.ctx(), h)
}
