//! Monodromy on ordinary mod-p modules: existence test, closed form and a
//! brute-force linear-algebra oracle.
//!
//! The module is `S^3` with `S = F[u]/(u^{ep})` and basis `e_0, e_1, e_2`.
//! The submodule `Fil^2` is spanned by the columns `f_j` of the filtration
//! matrix and the Frobenius sends `s f_j` to `phi(s) alpha_j e_j`. A
//! monodromy candidate is the strictly lower matrix with entries
//! `u^{[a_i - a_j]} P_ij(u^e)`; it is valid when `u^e N(f_j)` lies in `Fil^2`
//! and `phi_2(u^e N(f_j)) = N(phi_2(f_j))` for each generator. Checking the
//! generators suffices because both sides are semilinear and obey the same
//! Leibniz rule.

use serde::Serialize;

use crate::breuil_rings::{monodromy_s, sbar_frobenius, sbar_mul, SBar, S0};
use crate::coeff::{Fq, PrimeCtx, Scalar};
use crate::error::{Error, Result};
use crate::gauge::GaugeData;
use crate::linalg::{solve, transpose, AffineSolution};

type Vec3<C> = [SBar<C>; 3];

/// Module in ordinary form: filtration constants and diagonal Frobenius units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrdinaryModule<C> {
    ctx: PrimeCtx,
    gauge: GaugeData<C>,
}

impl<C: Scalar> OrdinaryModule<C> {
    /// Genericity is not required here so that non-generic weights can be
    /// probed with the oracle; the existence test enforces it.
    pub fn new(ctx: PrimeCtx, gauge: GaugeData<C>) -> Result<Self> {
        if gauge.lambda.iter().any(|a| !a.is_unit()) {
            return Err(Error::NonUnit);
        }
        if gauge.v10.prime() != ctx.p() {
            return Err(Error::ContextMismatch);
        }
        Ok(OrdinaryModule { ctx, gauge })
    }

    pub fn ctx(&self) -> &PrimeCtx {
        &self.ctx
    }

    pub fn gauge(&self) -> &GaugeData<C> {
        &self.gauge
    }

    fn zero(&self) -> C {
        self.gauge.v10.zero_like()
    }

    fn scalar_int(&self, v: u32) -> C {
        self.gauge.v10.from_int_like(v as i64)
    }

    fn p(&self) -> u32 {
        self.ctx.p()
    }

    fn e(&self) -> usize {
        self.ctx.e() as usize
    }

    fn zero_vec(&self) -> Vec3<C> {
        let z = SBar::zero(self.p(), self.zero());
        [z.clone(), z.clone(), z]
    }

    /// Columns `f_0, f_1, f_2` of the filtration matrix.
    pub fn generators(&self) -> [Vec3<C>; 3] {
        let (p, e, g) = (self.p(), self.e(), &self.gauge);
        let b = |i, j| self.ctx.bracket(i, j) as usize;
        let one = SBar::monomial(p, 0, g.v10.one_like());
        let f0 = [
            one,
            SBar::monomial(p, b(1, 0), g.v10),
            &SBar::monomial(p, b(2, 0), g.v20) + &SBar::monomial(p, b(2, 0) + e, g.v20p),
        ];
        let mut f1 = self.zero_vec();
        f1[1] = SBar::monomial(p, e, g.v10.one_like());
        f1[2] = SBar::monomial(p, e + b(2, 1), g.v21);
        let mut f2 = self.zero_vec();
        f2[2] = SBar::monomial(p, 2 * e, g.v10.one_like());
        [f0, f1, f2]
    }
}

/// Strictly lower monodromy matrix with entries `u^{[a_i - a_j]} P_ij(u^e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonodromyData<C: Scalar> {
    pub p10: S0<C>,
    pub p21: S0<C>,
    pub p20: S0<C>,
}

impl<C: Scalar> MonodromyData<C> {
    pub fn zero(p: u32, zero: C) -> Self {
        let z = S0::zero(p, zero);
        MonodromyData { p10: z.clone(), p21: z.clone(), p20: z }
    }

    pub fn is_zero(&self) -> bool {
        self.p10.is_zero() && self.p21.is_zero() && self.p20.is_zero()
    }

    /// Flattened coefficients in the order `P10, P21, P20`.
    pub fn to_vector(&self) -> Vec<C> {
        [&self.p10, &self.p21, &self.p20].iter().flat_map(|x| x.coeffs().to_vec()).collect()
    }

    pub fn from_vector(p: u32, v: &[C]) -> Self {
        let n = p as usize;
        MonodromyData {
            p10: S0::from_coeffs(p, &v[..n]),
            p21: S0::from_coeffs(p, &v[n..2 * n]),
            p20: S0::from_coeffs(p, &v[2 * n..3 * n]),
        }
    }

    /// `N(e_j)` as a coordinate vector.
    fn column(&self, ctx: &PrimeCtx, j: usize) -> Vec3<C> {
        let z = self.p10.coeff(0).zero_like();
        let p = ctx.p();
        let entry = |x: &S0<C>, i: usize| x.to_sbar().shift(ctx.bracket(i, j) as usize);
        let zero = SBar::zero(p, z);
        match j {
            0 => [zero, entry(&self.p10, 1), entry(&self.p20, 2)],
            1 => [zero.clone(), zero, entry(&self.p21, 2)],
            _ => [zero.clone(), zero.clone(), zero],
        }
    }

    /// `N(x)` by the Leibniz rule.
    fn apply(&self, ctx: &PrimeCtx, x: &Vec3<C>) -> Vec3<C> {
        let mut out: Vec3<C> = [monodromy_s(&x[0]), monodromy_s(&x[1]), monodromy_s(&x[2])];
        for j in 0..2 {
            if x[j].is_zero() {
                continue;
            }
            let col = self.column(ctx, j);
            for i in j + 1..3 {
                out[i] = &out[i] + &mul(&x[j], &col[i]);
            }
        }
        out
    }
}

fn mul<C: Scalar>(x: &SBar<C>, y: &SBar<C>) -> SBar<C> {
    // Sparse factor first.
    let (a, b) = if x.terms().count() <= y.terms().count() { (x, y) } else { (y, x) };
    sbar_mul(a, b).expect("shared prime")
}

/// Coordinates `s` with `y = sum s_j f_j`, plus the obstruction coefficients
/// that must vanish for `y` to lie in `Fil^2`. Coordinates are exact in the
/// degrees the Frobenius sees.
fn fil2_coords<C: Scalar>(m: &OrdinaryModule<C>, y: &Vec3<C>, residues: &mut Vec<C>) -> Vec3<C> {
    let [f0, f1, _] = m.generators();
    let e = m.e();
    let s0 = y[0].clone();
    let r1 = &y[1] - &mul(&s0, &f0[1]);
    residues.extend_from_slice(&r1.coeffs()[..e]);
    let s1 = force_unshift(&r1, e);
    let r2 = &(&y[2] - &mul(&s0, &f0[2])) - &mul(&s1, &f1[2]);
    residues.extend_from_slice(&r2.coeffs()[..2 * e]);
    let s2 = force_unshift(&r2, 2 * e);
    [s0, s1, s2]
}

fn force_unshift<C: Scalar>(x: &SBar<C>, k: usize) -> SBar<C> {
    let mut lowered = x.clone();
    for d in 0..k {
        lowered.set_coeff(d, x.coeff(d).zero_like());
    }
    lowered.unshift(k).expect("low part cleared")
}

/// Defect vector of the two axioms; zero exactly when `nd` is a monodromy.
/// Affine in the coefficients of `nd`.
pub fn axiom_defect<C: Scalar>(m: &OrdinaryModule<C>, nd: &MonodromyData<C>) -> Vec<C> {
    let mut out = Vec::new();
    let gens = m.generators();
    let e = m.e();
    for (j, f) in gens.iter().enumerate() {
        let n_f = nd.apply(&m.ctx, f);
        let y: Vec3<C> = [n_f[0].shift(e), n_f[1].shift(e), n_f[2].shift(e)];
        let s = fil2_coords(m, &y, &mut out);
        // phi_2(y) = sum phi(s_k) alpha_k e_k
        let lhs: Vec3<C> = std::array::from_fn(|k| sbar_frobenius(&s[k]).scale(m.gauge.lambda[k]));
        // N(phi_2(f_j)) = alpha_j N(e_j)
        let rhs = nd.column(&m.ctx, j);
        for k in 0..3 {
            let d = &lhs[k] - &rhs[k].scale(m.gauge.lambda[j]);
            out.extend_from_slice(d.coeffs());
        }
    }
    out
}

pub fn verify_monodromy_axioms<C: Scalar>(m: &OrdinaryModule<C>, nd: &MonodromyData<C>) -> bool {
    axiom_defect(m, nd).iter().all(|c| c.is_zero())
}

fn require_generic(ctx: &PrimeCtx) -> Result<()> {
    if ctx.is_strongly_generic() {
        Ok(())
    } else {
        Err(Error::GenericityViolation(format!("weights {:?} mod {}", ctx.weights(), ctx.p())))
    }
}

/// A monodromy operator exists iff `v20 = 0`.
pub fn monodromy_exists<C: Scalar>(m: &OrdinaryModule<C>) -> Result<bool> {
    require_generic(&m.ctx)?;
    Ok(m.gauge.v20.is_zero())
}

/// The unique monodromy when `v20 = 0`.
pub fn monodromy_closed_form<C: Scalar>(m: &OrdinaryModule<C>) -> Result<MonodromyData<C>> {
    require_generic(&m.ctx)?;
    let g = &m.gauge;
    if !g.v20.is_zero() {
        return Err(Error::NoMonodromy);
    }
    let ctx = &m.ctx;
    let p = ctx.p();
    let br = |i, j| ctx.bracket(i, j);
    let [a0, a1, a2] = g.lambda;
    let inv = |x: C| x.inv_unit().expect("units checked on construction");
    let b10 = m.scalar_int(br(1, 0));
    let b21 = m.scalar_int(br(2, 1));
    let b20 = m.scalar_int(br(2, 0));
    let one = g.v10.one_like();
    let c10 = -(a1 * inv(a0) * b10 * g.v10);
    let c21 = -(a2 * inv(a1) * b21 * g.v21);
    let c20 = a2 * inv(a0) * (g.v10 * g.v21 * b10 - g.v20p * (b20 - one));
    Ok(MonodromyData {
        p10: S0::monomial(p, br(1, 0) as usize, c10),
        p21: S0::monomial(p, br(2, 1) as usize, c21),
        p20: S0::monomial(p, br(2, 0) as usize, c20),
    })
}

/// Variant of `P10` with the other sign and exponent `e[a2 - a0]`, kept to
/// report whether it satisfies the axioms. `P21` has no such variant since
/// its exponent would need a fourth weight.
pub fn sign_variant<C: Scalar>(m: &OrdinaryModule<C>) -> Result<MonodromyData<C>> {
    let mut nd = monodromy_closed_form(m)?;
    let ctx = &m.ctx;
    let c = -nd.p10.coeff(ctx.bracket(1, 0) as usize);
    nd.p10 = S0::monomial(ctx.p(), ctx.bracket(2, 0) as usize, c);
    Ok(nd)
}

/// Solution set of the monodromy axioms in the `3p` unknown coefficients.
#[derive(Debug, Clone)]
pub struct MonodromySolutions {
    pub p: u32,
    pub affine: AffineSolution<Fq>,
}

impl MonodromySolutions {
    pub fn particular(&self) -> MonodromyData<Fq> {
        MonodromyData::from_vector(self.p, &self.affine.particular)
    }

    pub fn dimension(&self) -> usize {
        self.affine.dimension()
    }

    pub fn contains(&self, nd: &MonodromyData<Fq>) -> bool {
        self.affine.contains(&nd.to_vector())
    }
}

/// Linear map of the axioms as `(columns, constant)`: the defect of the
/// candidate with coefficient vector `x` is `constant + sum x_k columns[k]`.
pub fn axiom_system<C: Scalar>(m: &OrdinaryModule<C>) -> (Vec<Vec<C>>, Vec<C>) {
    let p = m.p();
    let z = m.zero();
    let n = 3 * p as usize;
    let base = axiom_defect(m, &MonodromyData::zero(p, z));
    let cols = (0..n)
        .map(|k| {
            let mut x = vec![z; n];
            x[k] = z.one_like();
            let d = axiom_defect(m, &MonodromyData::from_vector(p, &x));
            d.iter().zip(&base).map(|(&a, &b)| a - b).collect()
        })
        .collect();
    (cols, base)
}

/// All monodromy operators, found by Gaussian elimination; `None` if there is none.
pub fn monodromy_bruteforce(m: &OrdinaryModule<Fq>) -> Option<MonodromySolutions> {
    let (cols, base) = axiom_system(m);
    let rows = transpose(&cols);
    let rhs: Vec<Fq> = base.iter().map(|&b| -b).collect();
    let affine = solve(&rows, &rhs, cols.len(), m.zero())?;
    Some(MonodromySolutions { p: m.p(), affine })
}

/// Serializable view of monodromy polynomials: `[[k, c_k], ...]` in powers of `u^e`.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct MonodromyReport {
    pub p10: Vec<(usize, u32)>,
    pub p21: Vec<(usize, u32)>,
    pub p20: Vec<(usize, u32)>,
}

impl From<&MonodromyData<Fq>> for MonodromyReport {
    fn from(nd: &MonodromyData<Fq>) -> Self {
        let pairs = |x: &S0<Fq>| {
            x.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k, c.value())).collect()
        };
        MonodromyReport { p10: pairs(&nd.p10), p21: pairs(&nd.p21), p20: pairs(&nd.p20) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: i64) -> Fq {
        Fq::new(v, 13)
    }

    fn module(v: [i64; 4], alpha: [i64; 3]) -> OrdinaryModule<Fq> {
        let ctx = PrimeCtx::new(13, [0, 4, 8]).unwrap();
        let g = GaugeData { v10: f(v[0]), v20: f(v[1]), v20p: f(v[2]), v21: f(v[3]), lambda: alpha.map(f) };
        OrdinaryModule::new(ctx, g).unwrap()
    }

    #[test]
    fn worked_example() {
        let m = module([1, 0, 1, 1], [1, 1, 1]);
        let nd = monodromy_closed_form(&m).unwrap();
        assert_eq!(nd.p10, S0::monomial(13, 8, f(5)));
        assert_eq!(nd.p21, S0::monomial(13, 8, f(5)));
        assert_eq!(nd.p20, S0::monomial(13, 4, f(5)));
        assert!(verify_monodromy_axioms(&m, &nd));
        let sols = monodromy_bruteforce(&m).unwrap();
        assert!(sols.contains(&nd));
    }

    #[test]
    fn split_module_has_zero_monodromy() {
        let m = module([0, 0, 0, 0], [3, 4, 5]);
        let nd = monodromy_closed_form(&m).unwrap();
        assert!(nd.is_zero());
        assert!(verify_monodromy_axioms(&m, &nd));
        assert!(monodromy_bruteforce(&m).unwrap().contains(&nd));
    }

    #[test]
    fn nonzero_v20_has_no_monodromy() {
        let m = module([2, 1, 3, 4], [1, 2, 3]);
        assert!(!monodromy_exists(&m).unwrap());
        assert_eq!(monodromy_closed_form(&m).unwrap_err(), Error::NoMonodromy);
        assert!(monodromy_bruteforce(&m).is_none());
    }

    #[test]
    fn sign_flip_breaks_axioms() {
        let m = module([1, 0, 1, 1], [1, 1, 1]);
        let mut nd = monodromy_closed_form(&m).unwrap();
        nd.p21 = -&nd.p21;
        assert!(!verify_monodromy_axioms(&m, &nd));
        assert!(!verify_monodromy_axioms(&m, &sign_variant(&m).unwrap()));
    }

    #[test]
    fn scaling_alpha2_scales_lower_row() {
        let a = monodromy_closed_form(&module([1, 0, 2, 3], [1, 1, 1])).unwrap();
        let b = monodromy_closed_form(&module([1, 0, 2, 3], [1, 1, 7])).unwrap();
        assert_eq!(b.p21, a.p21.scale(f(7)));
        assert_eq!(b.p20, a.p20.scale(f(7)));
        assert_eq!(b.p10, a.p10);
    }
}
