//! Tangent spaces of the ordinary-form chart and the locus admitting monodromy.
//!
//! The chart has seven coordinates: the filtration constants and the three
//! Frobenius units. A tangent direction is a point over `F[eps]` lying above
//! the base point. Without monodromy every direction is valid; with
//! monodromy the direction must carry an `F[eps]`-valued monodromy lifting
//! the (unique) one of the base.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeff::{Dual, Fq, PrimeCtx, Scalar};
use crate::error::{Error, Result};
use crate::gauge::GaugeData;
use crate::linalg::{rref, solve, transpose};
use crate::monodromy::{axiom_defect, monodromy_bruteforce, monodromy_exists, MonodromyData, OrdinaryModule};

pub const COORDINATES: [&str; 7] = ["v10", "v20", "v20p", "v21", "alpha0", "alpha1", "alpha2"];
/// Position of `v20` in [`COORDINATES`].
pub const V20: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentKind {
    Quasi,
    WithMonodromy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TangentSpace {
    pub kind: TangentKind,
    pub dimension: usize,
    /// Echelon basis of valid directions in chart coordinates.
    pub basis: Vec<[u32; 7]>,
    /// Coordinates whose direction is forced to vanish.
    pub forced_zero: Vec<&'static str>,
}

pub fn coordinates<C: Scalar>(g: &GaugeData<C>) -> [C; 7] {
    [g.v10, g.v20, g.v20p, g.v21, g.lambda[0], g.lambda[1], g.lambda[2]]
}

pub fn from_coordinates<C: Scalar>(x: [C; 7]) -> GaugeData<C> {
    GaugeData { v10: x[0], v20: x[1], v20p: x[2], v21: x[3], lambda: [x[4], x[5], x[6]] }
}

/// The point `base + eps * d` over the dual numbers.
pub fn deform(base: &OrdinaryModule<Fq>, d: &[Fq; 7]) -> Result<OrdinaryModule<Dual>> {
    let c = coordinates(base.gauge());
    OrdinaryModule::new(*base.ctx(), from_coordinates(std::array::from_fn(|k| Dual::new(c[k], d[k]))))
}

fn dual_lift(x: &MonodromyData<Fq>, eps: &MonodromyData<Fq>) -> MonodromyData<Dual> {
    let p = x.p10.p();
    let v: Vec<Dual> = x.to_vector().iter().zip(eps.to_vector()).map(|(&a, b)| Dual::new(a, b)).collect();
    MonodromyData::from_vector(p, &v)
}

fn summarize(kind: TangentKind, directions: Vec<Vec<Fq>>) -> TangentSpace {
    let mut rows = directions;
    let pivots = rref(&mut rows, 7);
    rows.truncate(pivots.len());
    let forced_zero = (0..7).filter(|&k| rows.iter().all(|r| r[k].is_zero())).map(|k| COORDINATES[k]).collect();
    TangentSpace {
        kind,
        dimension: pivots.len(),
        basis: rows.iter().map(|r| std::array::from_fn(|k| r[k].value())).collect(),
        forced_zero,
    }
}

/// Dimension and shape of the space of valid first-order deformations.
pub fn tangent_space(kind: TangentKind, base: &OrdinaryModule<Fq>) -> Result<TangentSpace> {
    let ctx = base.ctx();
    if !ctx.is_strongly_generic() {
        return Err(Error::GenericityViolation(format!("weights {:?} mod {}", ctx.weights(), ctx.p())));
    }
    let p = ctx.p();
    let z = Fq::new(0, p);
    let unit = |k: usize| -> [Fq; 7] { std::array::from_fn(|i| Fq::new((i == k) as i64, p)) };
    match kind {
        TangentKind::Quasi => {
            let valid = (0..7).filter(|&k| deform(base, &unit(k)).is_ok()).map(|k| unit(k).to_vec()).collect();
            Ok(summarize(kind, valid))
        }
        TangentKind::WithMonodromy => {
            if !monodromy_exists(base)? {
                return Err(Error::NoMonodromy);
            }
            let sols = monodromy_bruteforce(base).ok_or(Error::NoMonodromy)?;
            if sols.dimension() != 0 {
                return Err(Error::InvalidInput(format!(
                    "base monodromy not unique (dimension {})",
                    sols.dimension()
                )));
            }
            let p0 = sols.particular();
            let n = 3 * p as usize;
            // Unknowns: d (7 chart directions) then the eps-part of N (3p).
            let eval = |x: &[Fq]| -> Result<Vec<Fq>> {
                let d: [Fq; 7] = std::array::from_fn(|k| x[k]);
                let m = deform(base, &d)?;
                let nd = dual_lift(&p0, &MonodromyData::from_vector(p, &x[7..]));
                Ok(axiom_defect(&m, &nd).iter().map(|c| c.eps).collect())
            };
            let zero_point = vec![z; 7 + n];
            let offset = eval(&zero_point)?;
            debug_assert!(offset.iter().all(|c| c.is_zero()));
            let mut cols = Vec::with_capacity(7 + n);
            for k in 0..7 + n {
                let mut x = zero_point.clone();
                x[k] = Fq::new(1, p);
                let v = eval(&x)?;
                cols.push(v.iter().zip(&offset).map(|(&a, &b)| a - b).collect::<Vec<_>>());
            }
            let rows = transpose(&cols);
            let zeros = vec![z; rows.len()];
            let sol = solve(&rows, &zeros, 7 + n, z).expect("homogeneous system");
            let directions = sol.kernel.iter().map(|v| v[..7].to_vec()).collect();
            Ok(summarize(kind, directions))
        }
    }
}

pub fn tangent_dimension(kind: TangentKind, base: &OrdinaryModule<Fq>) -> Result<usize> {
    Ok(tangent_space(kind, base)?.dimension)
}

#[derive(Debug, Clone, Serialize)]
pub struct LocusPoint {
    /// Chart coordinates in the order of [`COORDINATES`].
    pub point: [u32; 7],
    pub oracle_admissible: bool,
    pub v20_vanishes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocusReport {
    pub prime: u32,
    pub weights: [u32; 3],
    pub seed: u64,
    pub sampled: Vec<LocusPoint>,
    pub sampled_admissible: usize,
    pub sampled_total: usize,
    pub disagreements: usize,
    /// Sweep of `v20` over `F_p` with the other coordinates fixed.
    pub sweep: Vec<LocusPoint>,
    pub sweep_admissible: usize,
    pub lines_checked: usize,
    pub lines_closed: usize,
    pub dimensions: Vec<DimensionRow>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionRow {
    pub base: [u32; 7],
    pub quasi: usize,
    pub with_monodromy: usize,
    pub forced_zero: Vec<&'static str>,
}

fn random_point(rng: &mut ChaCha8Rng, p: u32) -> [Fq; 7] {
    std::array::from_fn(|k| {
        let lo = if k >= 4 { 1 } else { 0 };
        Fq::new(rng.gen_range(lo..p) as i64, p)
    })
}

fn locus_point(ctx: PrimeCtx, x: [Fq; 7]) -> Result<LocusPoint> {
    let m = OrdinaryModule::new(ctx, from_coordinates(x))?;
    Ok(LocusPoint {
        point: x.map(|c| c.value()),
        oracle_admissible: monodromy_bruteforce(&m).is_some(),
        v20_vanishes: monodromy_exists(&m)?,
    })
}

/// Sampled and exhaustive sweeps of the chart recording where the oracle
/// finds a monodromy, plus tangent dimensions at admissible bases.
pub fn monodromy_locus_report(ctx: PrimeCtx, seed: u64, samples: usize, lines: usize, bases: usize) -> Result<LocusReport> {
    if !ctx.is_strongly_generic() {
        return Err(Error::GenericityViolation(format!("weights {:?} mod {}", ctx.weights(), ctx.p())));
    }
    let p = ctx.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled: Vec<LocusPoint> =
        (0..samples).map(|_| locus_point(ctx, random_point(&mut rng, p))).collect::<Result<_>>()?;
    let anchor = random_point(&mut rng, p);
    let sweep: Vec<LocusPoint> = (0..p)
        .map(|v| {
            let mut x = anchor;
            x[V20] = Fq::new(v as i64, p);
            locus_point(ctx, x)
        })
        .collect::<Result<_>>()?;

    // Affine lines through two admissible points stay admissible where the units survive.
    let mut lines_closed = 0;
    for _ in 0..lines {
        let mut a = random_point(&mut rng, p);
        let mut b = random_point(&mut rng, p);
        a[V20] = Fq::new(0, p);
        b[V20] = Fq::new(0, p);
        let mut closed = true;
        for t in 0..p {
            let t = Fq::new(t as i64, p);
            let x: [Fq; 7] = std::array::from_fn(|k| a[k] + t * (b[k] - a[k]));
            if x[4..].iter().any(|c| c.is_zero()) {
                continue;
            }
            closed &= locus_point(ctx, x)?.oracle_admissible;
        }
        lines_closed += closed as usize;
    }

    let mut dimensions = Vec::with_capacity(bases);
    for _ in 0..bases {
        let mut x = random_point(&mut rng, p);
        x[V20] = Fq::new(0, p);
        let m = OrdinaryModule::new(ctx, from_coordinates(x))?;
        let quasi = tangent_space(TangentKind::Quasi, &m)?;
        let with = tangent_space(TangentKind::WithMonodromy, &m)?;
        dimensions.push(DimensionRow {
            base: x.map(|c| c.value()),
            quasi: quasi.dimension,
            with_monodromy: with.dimension,
            forced_zero: with.forced_zero,
        });
    }

    Ok(LocusReport {
        prime: p,
        weights: ctx.weights(),
        seed,
        sampled_admissible: sampled.iter().filter(|x| x.oracle_admissible).count(),
        sampled_total: sampled.len(),
        disagreements: sampled.iter().chain(&sweep).filter(|x| x.oracle_admissible != x.v20_vanishes).count(),
        sweep_admissible: sweep.iter().filter(|x| x.oracle_admissible).count(),
        sampled,
        sweep,
        lines_checked: lines,
        lines_closed,
        dimensions,
        notes: vec![
            "dimensions are F-dimensions of first-order directions in the seven-coordinate chart".into(),
            "framed deformation dimensions need Galois-side framing data and are not computed".into(),
        ],
    })
}
