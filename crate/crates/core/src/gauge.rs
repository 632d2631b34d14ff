//! Frobenius diagonalization producing gauge bases.
//!
//! State: a Frobenius matrix `A` and a filtration matrix
//! `V = U * Diag(1, E, E^2)` with `U` lower unipotent with constant
//! entries `v10`, `v21` and `v20 = y0 + y1 E`. One step picks new constants
//! `V'` so that `adj(V) A V'` is divisible by `E^3`, sets
//! `B = adj(V) A V' / E^3` (so `A V' = V B`) and moves to the basis in which
//! the Frobenius matrix is `phi(B)`.
//!
//! Each step first rescales `A` by the inverse of its constant diagonal
//! `L` and afterwards multiplies `phi(B)` back by `L` on the left. This is a
//! change of basis by a constant diagonal matrix; without it the
//! filtration constants drift by `l_j / l_i` at every step and never settle.

use serde::Serialize;

use crate::breuil_rings::{IdealTag, RCtx, RElem, S0};
use crate::coeff::{Fq, PrimeCtx, Scalar, ZpN};
use crate::dd_matrix::{
    dd_adjugate, dd_divide_by_E, dd_frobenius, dd_frobenius_checked, dd_mul, filtration_matrix,
    subset_member_below, DDMatrix, DdEntry, FrobeniusContract, SubsetTag,
};
use crate::error::{Error, Result};

/// Constants of the filtration matrix: `v20 = v20 + v20e * E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Filtration<C> {
    pub v10: C,
    pub v20: C,
    pub v20e: C,
    pub v21: C,
}

impl<C: Scalar> Filtration<C> {
    /// `Diag(1, E, E^2)`.
    pub fn standard(zero: C) -> Self {
        let z = zero.zero_like();
        Filtration { v10: z, v20: z, v20e: z, v21: z }
    }

    pub fn unipotent<T: DdEntry<Coef = C>>(&self, ctx: PrimeCtx, proto: &T) -> DDMatrix<T> {
        let z = self.v10.zero_like();
        DDMatrix::unipotent(
            ctx,
            proto.affine_like(self.v10, z),
            proto.affine_like(self.v20, self.v20e),
            proto.affine_like(self.v21, z),
        )
    }

    /// `U * Diag(1, E, E^2)`.
    pub fn matrix<T: DdEntry<Coef = C>>(&self, ctx: PrimeCtx, proto: &T) -> DDMatrix<T> {
        filtration_matrix(&self.unipotent(ctx, proto))
    }

    pub fn values(&self) -> [C; 4] {
        [self.v10, self.v20, self.v20e, self.v21]
    }

    pub fn map<D>(&self, f: impl Fn(C) -> D) -> Filtration<D> {
        Filtration { v10: f(self.v10), v20: f(self.v20), v20e: f(self.v20e), v21: f(self.v21) }
    }
}

/// Gauge normal form: filtration constants plus the diagonal Frobenius units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaugeData<C> {
    pub v10: C,
    pub v21: C,
    pub v20: C,
    /// Coefficient of `E` in the `(2,0)` entry.
    pub v20p: C,
    pub lambda: [C; 3],
}

impl<C: Scalar> GaugeData<C> {
    pub fn from_parts(f: &Filtration<C>, lambda: [C; 3]) -> Self {
        GaugeData { v10: f.v10, v21: f.v21, v20: f.v20, v20p: f.v20e, lambda }
    }

    pub fn filtration(&self) -> Filtration<C> {
        Filtration { v10: self.v10, v20: self.v20, v20e: self.v20p, v21: self.v21 }
    }

    pub fn map<D>(&self, f: impl Fn(C) -> D) -> GaugeData<D> {
        GaugeData {
            v10: f(self.v10),
            v21: f(self.v21),
            v20: f(self.v20),
            v20p: f(self.v20p),
            lambda: self.lambda.map(&f),
        }
    }
}

/// Even steps make the Frobenius lower triangular to the next order, odd steps diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Audit record for one accepted step.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub parity: Parity,
    pub n: u32,
    /// `[v10, v20, v20e, v21]` after the step.
    pub v: [u64; 4],
    pub lambda: [u64; 3],
    /// Entries of `B` as `[[k, c_k], ...]`.
    pub b: Vec<Vec<Vec<(usize, u64)>>>,
    pub hypothesis_ok: bool,
    pub congruence_ok: bool,
    pub identity_ok: bool,
    pub membership_ok: bool,
    pub frobenius_ok: bool,
    /// Filtration level on which `B` is known.
    pub effective_level: usize,
    #[serde(skip)]
    pub a_normalized: Option<DDMatrix<RElem>>,
    #[serde(skip)]
    pub v_old: Option<Filtration<ZpN>>,
    #[serde(skip)]
    pub v_new: Option<Filtration<ZpN>>,
    #[serde(skip)]
    pub b_matrix: Option<DDMatrix<RElem>>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IterationTranscript {
    pub steps: Vec<StepRecord>,
}

impl IterationTranscript {
    pub fn all_verified(&self) -> bool {
        self.steps
            .iter()
            .all(|s| s.hypothesis_ok && s.congruence_ok && s.identity_ok && s.membership_ok && s.frobenius_ok)
    }
}

/// Successful diagonalization.
#[derive(Debug, Clone)]
pub struct GaugeRun {
    pub gauge: GaugeData<ZpN>,
    pub filtration: Filtration<ZpN>,
    /// Final Frobenius matrix, reduced to the target precision.
    pub frobenius: DDMatrix<RElem>,
    pub iterations: usize,
    pub transcript: IterationTranscript,
}

/// Failed diagonalization, with the steps accepted before the failure.
#[derive(Debug, Clone)]
pub struct GaugeFailure {
    pub error: Error,
    pub transcript: IterationTranscript,
}

/// Solves for constants killing the low coefficients of the strictly lower
/// entries of `M U'`, where `M = adj(U) A`.
fn solve_constants<T: DdEntry>(m: &DDMatrix<T>) -> Result<Filtration<T::Coef>> {
    let ctx = m.ctx();
    let twisted = |i: usize, k: usize, j: usize| {
        let x = m.entry(i, k);
        match ctx.twist_excess(i, k, j) {
            0 => x.clone(),
            c => x.mul(&x.ue_pow(c)),
        }
    };
    let m10 = m.entry(1, 0);
    let m20 = m.entry(2, 0);
    let m11 = twisted(1, 1, 0);
    let m12 = twisted(1, 2, 0);
    let m21 = twisted(2, 1, 0);
    let m22 = twisted(2, 2, 0);
    let m21b = twisted(2, 1, 1);
    let m22b = twisted(2, 2, 1);

    let c = |x: &T, k: usize| x.coeff(k);
    if !c(&m11, 0).is_unit() {
        return Err(Error::NonUnitPivot("m11"));
    }
    let m22_inv = c(&m22, 0).inv_unit().map_err(|_| Error::NonUnitPivot("m22"))?;
    let det = c(&m11, 0) * c(&m22, 0) - c(&m12, 0) * c(&m21, 0);
    let det_inv = det.inv_unit().map_err(|_| Error::NonUnitPivot("det M0"))?;

    let v21 = -(c(&m21b, 0) * c(&m22b, 0).inv_unit().map_err(|_| Error::NonUnitPivot("m22"))?);
    let v10 = (c(&m12, 0) * c(m20, 0) - c(&m22, 0) * c(m10, 0)) * det_inv;
    let v20 = (c(&m21, 0) * c(m10, 0) - c(&m11, 0) * c(m20, 0)) * det_inv;
    // Coefficient of E in row (2,0): m20 + m21 v10 + m22 (y0 + y1 E).
    let rhs = c(m20, 1) + c(&m21, 1) * v10 + c(&m22, 1) * v20;
    let v20e = -(rhs * m22_inv);
    Ok(Filtration { v10, v20, v20e, v21 })
}

/// One normalized step shared by both characteristics.
struct RawStep<T: DdEntry> {
    a_norm: DDMatrix<T>,
    lambda: [T::Coef; 3],
    new: Filtration<T::Coef>,
    residual: DDMatrix<T>,
}

fn raw_step<T: DdEntry>(a: &DDMatrix<T>, v: &Filtration<T::Coef>) -> Result<RawStep<T>> {
    let lambda = a.diagonal_constants();
    let inv: Vec<T::Coef> =
        lambda.iter().map(|l| l.inv_unit().map_err(|_| Error::NonUnitPivot("diagonal of A"))).collect::<Result<_>>()?;
    let a_norm = a.scale_columns(&[inv[0], inv[1], inv[2]]);
    let proto = a.entry(0, 0);
    let w = dd_adjugate(&v.unipotent(*a.ctx(), proto));
    let m = dd_mul(&w, &a_norm)?;
    let new = solve_constants(&m)?;
    let residual = dd_mul(&m, &new.unipotent(*a.ctx(), proto))?;
    for (i, j) in [(1, 0), (2, 0), (2, 1)] {
        for k in 0..i - j {
            if !residual.entry(i, j).coeff(k).is_zero() {
                return Err(Error::CongruenceFailure { step: 0, i, j });
            }
        }
    }
    Ok(RawStep { a_norm, lambda, new, residual })
}

/// Ideal the lower residual entry `(i,j)` must lie in after a step.
fn residual_ideal(parity: Parity, n: u32, i: usize, j: usize) -> IdealTag {
    match parity {
        Parity::Even => IdealTag::PowFil(n, i - j),
        Parity::Odd => IdealTag::PowShiftedJ(n, i - j),
    }
}

fn congruence_step(a: &DDMatrix<RElem>, v: &Filtration<ZpN>, parity: Parity, n: u32) -> Result<Filtration<ZpN>> {
    let raw = raw_step(a, v)?;
    check_residual(&raw.residual, parity, n, 0)?;
    Ok(raw.new)
}

fn check_residual(r: &DDMatrix<RElem>, parity: Parity, n: u32, step: usize) -> Result<()> {
    for (i, j) in [(1, 0), (2, 0), (2, 1)] {
        if !crate::breuil_rings::ideal_member(r.entry(i, j), residual_ideal(parity, n, i, j)) {
            return Err(Error::CongruenceFailure { step, i, j });
        }
    }
    Ok(())
}

/// Step `2n`: lower entries of `adj(U) A U'` land in `p^n Fil^{i-j}`.
pub fn even_step(a: &DDMatrix<RElem>, v: &Filtration<ZpN>, n: u32) -> Result<Filtration<ZpN>> {
    congruence_step(a, v, Parity::Even, n)
}

/// Step `2n+1`: lower entries land in `p^n (p Fil^{i-j}, Fil^{i-j+1})`.
pub fn odd_step(a: &DDMatrix<RElem>, v: &Filtration<ZpN>, n: u32) -> Result<Filtration<ZpN>> {
    congruence_step(a, v, Parity::Odd, n)
}

/// `B = adj(V) A V' / E^3`, checked against `A V' = V B` on the known coefficients.
#[allow(non_snake_case)]
pub fn solve_B<T: DdEntry>(
    a: &DDMatrix<T>,
    v_old: &Filtration<T::Coef>,
    v_new: &Filtration<T::Coef>,
) -> Result<DDMatrix<T>> {
    let ctx = *a.ctx();
    let proto = a.entry(0, 0);
    let vo = v_old.matrix(ctx, proto);
    let vn = v_new.matrix(ctx, proto);
    let y = dd_mul(&dd_mul(&dd_adjugate(&vo), a)?, &vn)?;
    let b = dd_divide_by_E(&y, 3)?;
    let level = proto.level().saturating_sub(3);
    if !dd_mul(a, &vn)?.eq_below(&dd_mul(&vo, &b)?, level) {
        return Err(Error::MembershipFailure("A V' != V B".into()));
    }
    Ok(b)
}

/// Class `B` must lie in after a step.
pub fn b_membership(parity: Parity, n: u32) -> SubsetTag {
    match (parity, n) {
        (Parity::Even, 0) => SubsetTag::BOppPlus(IdealTag::PowPFil1(0)),
        (Parity::Even, n) => SubsetTag::TPlusLower(IdealTag::PowR(n), IdealTag::PowPFil1(n)),
        (Parity::Odd, n) => SubsetTag::TPlus(IdealTag::PowPFil1(n)),
    }
}

/// Hypothesis on the Frobenius matrix entering step `2n` or `2n+1`.
pub fn a_hypothesis(parity: Parity, n: u32) -> SubsetTag {
    match (parity, n) {
        (Parity::Even, 0) => SubsetTag::GL,
        (Parity::Even, n) => SubsetTag::TPlus(IdealTag::PowR(n)),
        (Parity::Odd, n) => SubsetTag::TPlus(IdealTag::OddHyp(n)),
    }
}

fn matrix_pairs(x: &DDMatrix<RElem>) -> Vec<Vec<Vec<(usize, u64)>>> {
    x.entries().iter().map(|row| row.iter().map(|e| e.to_pairs()).collect()).collect()
}

fn reduce_matrix(x: &DDMatrix<RElem>, ctx: &std::sync::Arc<RCtx>) -> Result<DDMatrix<RElem>> {
    let mut out = x.clone();
    for i in 0..3 {
        for j in 0..3 {
            out.set(i, j, x.entry(i, j).reduce_to(ctx)?);
        }
    }
    Ok(out)
}

fn stable_mod(a: &[ZpN], b: &[ZpN], n: u32) -> bool {
    a.iter().zip(b).all(|(x, y)| x.reduce(n) == y.reduce(n))
}

/// Runs even and odd steps from `V = Diag(1, E, E^2)` until the Frobenius
/// matrix is a constant diagonal modulo `p^target` and the filtration
/// constants repeat. Requires `M >= target + 3`.
pub fn diagonalize(a0: &DDMatrix<RElem>, target: u32) -> std::result::Result<GaugeRun, GaugeFailure> {
    let mut transcript = IterationTranscript::default();
    let fail = |error, transcript| Err(GaugeFailure { error, transcript });
    let rctx0 = a0.entry(0, 0).ctx().clone();
    let pctx = *a0.ctx();
    if target == 0 || target > rctx0.precision() {
        return fail(Error::InvalidInput(format!("target precision {target} outside 1..={}", rctx0.precision())), transcript);
    }
    if rctx0.fil_level() < target as usize + 3 {
        return fail(
            Error::InvalidInput(format!("filtration level {} below target + 3", rctx0.fil_level())),
            transcript,
        );
    }
    if !pctx.is_strongly_generic() {
        return fail(Error::GenericityViolation(format!("{:?} is not strongly generic", pctx.weights())), transcript);
    }
    let rctx = match RCtx::new(rctx0.p(), target, rctx0.fil_level()) {
        Ok(c) => c,
        Err(e) => return fail(e, transcript),
    };
    let mut a = match reduce_matrix(a0, &rctx) {
        Ok(a) => a,
        Err(e) => return fail(e, transcript),
    };
    if !subset_member_below(&a, SubsetTag::GL, rctx.fil_level()) {
        return fail(Error::NonUnit, transcript);
    }
    let level = rctx.fil_level() - 3;
    let mut v = Filtration::standard(ZpN::new(0, rctx.p(), target));
    let cap = 2 * target as usize + 4;
    for step in 0..cap {
        let parity = if step % 2 == 0 { Parity::Even } else { Parity::Odd };
        let n = (step / 2) as u32;
        let raw = match raw_step(&a, &v) {
            Ok(r) => r,
            Err(Error::CongruenceFailure { i, j, .. }) => {
                return fail(Error::CongruenceFailure { step, i, j }, transcript)
            }
            Err(e) => return fail(e, transcript),
        };
        let hypothesis_ok = subset_member_below(&raw.a_norm, a_hypothesis(parity, n), rctx.fil_level());
        if !hypothesis_ok {
            return fail(Error::MembershipFailure(format!("step {step}: A outside {:?}", a_hypothesis(parity, n))), transcript);
        }
        if let Err(Error::CongruenceFailure { i, j, .. }) = check_residual(&raw.residual, parity, n, step) {
            return fail(Error::CongruenceFailure { step, i, j }, transcript);
        }
        let b = match solve_B(&raw.a_norm, &v, &raw.new) {
            Ok(b) => b,
            Err(e) => return fail(e, transcript),
        };
        let tag = b_membership(parity, n);
        if !subset_member_below(&b, tag, level) {
            return fail(Error::MembershipFailure(format!("step {step}: B outside {tag:?}")), transcript);
        }
        let contract = match parity {
            Parity::Even => FrobeniusContract::Twisted(n),
            Parity::Odd => FrobeniusContract::Filtered(n),
        };
        let phi_b = match dd_frobenius_checked(&b, contract, level) {
            Ok(x) => x,
            Err(e) => return fail(e, transcript),
        };
        let a_next = phi_b.scale_rows(&raw.lambda);
        transcript.steps.push(StepRecord {
            step,
            parity,
            n,
            v: raw.new.values().map(|x| x.value()),
            lambda: raw.lambda.map(|x| x.value()),
            b: matrix_pairs(&b),
            hypothesis_ok,
            congruence_ok: true,
            identity_ok: true,
            membership_ok: true,
            frobenius_ok: true,
            effective_level: level,
            a_normalized: Some(raw.a_norm.clone()),
            v_old: Some(v),
            v_new: Some(raw.new),
            b_matrix: Some(b),
        });
        let settled = a_next.is_constant_diagonal()
            && stable_mod(&raw.new.values(), &v.values(), target)
            && stable_mod(&a_next.diagonal_constants(), &raw.lambda, target);
        v = raw.new;
        a = a_next;
        if settled {
            let lambda = a.diagonal_constants();
            return Ok(GaugeRun {
                gauge: GaugeData::from_parts(&v, lambda),
                filtration: v,
                frobenius: a,
                iterations: step + 1,
                transcript,
            });
        }
    }
    fail(Error::NoConvergence(cap), transcript)
}

/// Sweep cap for the mod-p iteration.
pub const MODP_SWEEPS: usize = 4;

/// Mod-p analogue over `F[u^e]/(u^{ep})`: starting from a lower triangular
/// invertible Frobenius matrix, returns the ordinary form.
pub fn ordinary_form_modp(
    v: &Filtration<Fq>,
    a: &DDMatrix<S0<Fq>>,
) -> Result<GaugeData<Fq>> {
    if !a.is_lower_triangular() {
        return Err(Error::InvalidInput("Frobenius matrix must be lower triangular".into()));
    }
    if !(0..3).all(|i| a.entry(i, i).is_unit()) {
        return Err(Error::NonUnitPivot("diagonal of A"));
    }
    let mut a = a.clone();
    let mut v = *v;
    for _ in 0..MODP_SWEEPS {
        let raw = raw_step(&a, &v)?;
        let b = solve_B(&raw.a_norm, &v, &raw.new)?;
        let a_next = dd_frobenius(&b).scale_rows(&raw.lambda);
        let settled = a_next.is_constant_diagonal() && raw.new == v && a_next.diagonal_constants() == raw.lambda;
        v = raw.new;
        a = a_next;
        if settled {
            return Ok(GaugeData::from_parts(&v, a.diagonal_constants()));
        }
    }
    Err(Error::NoConvergence(MODP_SWEEPS))
}

/// Reduction of a characteristic-zero matrix to `F[u^e]/(u^{ep})`.
pub fn reduce_matrix_mod_p(x: &DDMatrix<RElem>) -> DDMatrix<S0<Fq>> {
    let m = x.entries();
    DDMatrix::new(*x.ctx(), std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].reduce_mod_p())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn setup(n: u32, m: usize) -> (PrimeCtx, Arc<RCtx>) {
        (PrimeCtx::new(13, [0, 4, 8]).unwrap(), RCtx::new(13, n, m).unwrap())
    }

    fn perturbed(pc: PrimeCtx, rc: &Arc<RCtx>, seed: i128) -> DDMatrix<RElem> {
        let units = [2i128, 5, 7];
        DDMatrix::new(
            pc,
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let s = seed * 31 + 7 * i as i128 + 3 * j as i128;
                    let noise: Vec<i128> = (0..11).map(|k| 13 * ((s * (k + 2) + k * k) % 97)).collect();
                    let base = RElem::from_coeffs(rc, &noise);
                    if i == j {
                        &RElem::scalar(rc, units[i]) + &base
                    } else {
                        base
                    }
                })
            }),
        )
    }

    fn lower_triangular(pc: PrimeCtx, rc: &Arc<RCtx>, seed: i128) -> DDMatrix<RElem> {
        let units = [2i128, 5, 7];
        DDMatrix::new(
            pc,
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let s = seed * 31 + 7 * i as i128 + 3 * j as i128;
                    let c: Vec<i128> = (0..11).map(|k| (s * (k + 2) + k * k) % 97).collect();
                    if i == j {
                        &RElem::scalar(rc, units[i]) + &(&RElem::ue(rc) * &RElem::from_coeffs(rc, &c))
                    } else if i > j {
                        RElem::from_coeffs(rc, &c)
                    } else {
                        RElem::zero(rc)
                    }
                })
            }),
        )
    }

    #[test]
    fn constant_diagonal_is_fixed() {
        let (pc, rc) = setup(8, 11);
        let a = DDMatrix::diag(pc, [RElem::scalar(&rc, 2), RElem::scalar(&rc, 3), RElem::scalar(&rc, 5)]);
        let run = diagonalize(&a, 8).unwrap();
        assert_eq!(run.iterations, 1);
        assert_eq!(run.gauge.lambda.map(|x| x.value()), [2, 3, 5]);
        assert_eq!(run.filtration.values().map(|x| x.value()), [0; 4]);
    }

    #[test]
    fn perturbed_input_converges() {
        let (pc, rc) = setup(8, 11);
        let run = diagonalize(&perturbed(pc, &rc, 1), 8).unwrap();
        assert!(run.iterations <= 20, "took {}", run.iterations);
        assert!(run.frobenius.is_constant_diagonal());
        assert!(run.transcript.all_verified());
    }

    #[test]
    fn identity_step_keeps_filtration() {
        let (pc, rc) = setup(6, 9);
        let a = DDMatrix::identity(pc, &RElem::one(&rc));
        let v = Filtration::standard(ZpN::new(0, 13, 6));
        assert_eq!(even_step(&a, &v, 0).unwrap(), v);
        let b = solve_B(&a, &v, &v).unwrap();
        assert!(b.eq_below(&a, 6));
    }

    #[test]
    fn modp_diagonal_is_fixed() {
        let pc = PrimeCtx::new(13, [0, 4, 8]).unwrap();
        let f = |v| S0::constant(13, Fq::new(v, 13));
        let a = DDMatrix::diag(pc, [f(3), f(4), f(6)]);
        let v = Filtration::standard(Fq::new(0, 13));
        let g = ordinary_form_modp(&v, &a).unwrap();
        assert_eq!(g.lambda, [Fq::new(3, 13), Fq::new(4, 13), Fq::new(6, 13)]);
        assert_eq!(g.filtration(), v);
    }

    #[test]
    fn seeds_converge_quickly() {
        let (pc, rc) = setup(8, 11);
        for seed in 0..12 {
            let run = diagonalize(&perturbed(pc, &rc, seed), 8).unwrap();
            assert!(run.iterations <= 8, "seed {seed} took {}", run.iterations);
        }
    }

    #[test]
    fn modp_lower_triangular_settles() {
        let (pc, rc) = setup(4, 7);
        for seed in 0..6 {
            let a = reduce_matrix_mod_p(&lower_triangular(pc, &rc, seed));
            let g = ordinary_form_modp(&Filtration::standard(Fq::new(0, 13)), &a).unwrap();
            assert_eq!(g.lambda, [2, 5, 7].map(|v| Fq::new(v, 13)));
            // A second run from the returned filtration is a fixed point.
            let d = DDMatrix::diag(pc, g.lambda.map(|l| S0::constant(13, l)));
            assert_eq!(ordinary_form_modp(&g.filtration(), &d).unwrap(), g);
        }
    }

    #[test]
    fn rejects_low_filtration_level() {
        let (pc, rc) = setup(8, 9);
        let a = DDMatrix::identity(pc, &RElem::one(&rc));
        assert!(matches!(diagonalize(&a, 8).unwrap_err().error, Error::InvalidInput(_)));
    }
}
