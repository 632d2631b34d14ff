//! Command-line driver: input schema, commands, reports and exit codes.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::breuil_rings::{RCtx, RElem, S0};
use crate::coeff::{check_strong_genericity, Dual, Fq, PrimeCtx, Scalar, ZpN};
use crate::comparison::{
    default_truncation, descend_isotypic, fl_isomorphic, fl_isomorphic_conjugate, rescale_gauge, strip_twist,
    to_etale, to_fl, FLReport, PolyMatrix,
};
use crate::dd_matrix::{subset_member, DDMatrix, SubsetTag};
use crate::deformation::{monodromy_locus_report, tangent_space, TangentKind};
use crate::error::Error;
use crate::gauge::{diagonalize, ordinary_form_modp, Filtration, GaugeData};
use crate::monodromy::{
    monodromy_bruteforce, monodromy_closed_form, monodromy_exists, sign_variant, verify_monodromy_axioms,
    MonodromyReport, OrdinaryModule,
};
use crate::selftest::run_selftest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    Gauge,
    GaugeModp,
    Monodromy,
    Etale,
    Fl,
    Dims,
    Selftest,
}

#[derive(Debug, Parser)]
#[command(name = "ordbreuil", about = "Gauge bases, monodromy and comparison data for rank-three Breuil modules")]
pub struct Args {
    /// Command to run.
    #[arg(value_enum)]
    pub command_pos: Option<Command>,
    /// Command to run (alternative to the positional form).
    #[arg(long = "command", value_enum)]
    pub command: Option<Command>,
    /// Input document (JSON).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// p-adic precision, overriding the document.
    #[arg(long)]
    pub precision: Option<u32>,
    /// Filtration truncation level, overriding the document.
    #[arg(long)]
    pub fil: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Include the per-step transcript of the diagonalization.
    #[arg(long)]
    pub transcript: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
pub enum Coefficients {
    #[serde(rename = "Fp")]
    Fp,
    #[default]
    #[serde(rename = "ZpN")]
    ZpN,
    #[serde(rename = "Fp-dual")]
    FpDual,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionSpec {
    pub padic: Option<u32>,
    pub fil: Option<usize>,
    pub pi_truncation: Option<u32>,
}

/// Ordinary-form data: filtration constants, Frobenius units and an
/// optional first-order direction in the order `v10, v20, v20p, v21, alpha`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeInput {
    pub v10: i64,
    pub v20: i64,
    pub v20p: i64,
    pub v21: i64,
    pub alpha: [i64; 3],
    pub eps: Option<[i64; 7]>,
}

/// Frobenius entries as `[[k, c_k], ...]`: `delta_k` coefficients over `Z/p^N`,
/// or powers of `u^e` over `F_p`.
pub type MatrixInput = Vec<Vec<Vec<(usize, i64)>>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    pub prime: u32,
    pub weights: [u32; 3],
    #[serde(default)]
    pub precision: PrecisionSpec,
    #[serde(default)]
    pub coefficients: Coefficients,
    pub frobenius: Option<MatrixInput>,
    pub filtration: Option<String>,
    pub gauge: Option<GaugeInput>,
    /// Second gauge for isomorphism queries.
    pub compare_with: Option<GaugeInput>,
    /// Diagonal basis change `e_i -> t_i e_i` applied to `gauge` for comparison.
    pub rescale: Option<[i64; 3]>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub partial: Option<Value>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into(), partial: None }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence(_) => EXIT_NO_CONVERGENCE,
        Error::InvalidInput(_)
        | Error::GenericityViolation(_)
        | Error::ContextMismatch
        | Error::TruncationTooSmall { .. }
        | Error::WeightMismatch
        | Error::NoMonodromy
        | Error::NonUnit => EXIT_INPUT,
        _ => EXIT_ASSERTION,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string(), partial: None }
    }
}

type Outcome = std::result::Result<(Value, Vec<String>), Failure>;

pub struct Settings {
    pub precision: Option<u32>,
    pub fil: Option<usize>,
    pub seed: Option<u64>,
    pub transcript: bool,
}

fn ctx_of(doc: &InputDoc) -> std::result::Result<PrimeCtx, Failure> {
    PrimeCtx::new(doc.prime, doc.weights).map_err(Failure::from)
}

fn seed_of(doc: &InputDoc, s: &Settings) -> u64 {
    s.seed.or(doc.seed).unwrap_or(0)
}

fn require_standard_filtration(doc: &InputDoc) -> std::result::Result<(), Failure> {
    match doc.filtration.as_deref() {
        None | Some("standard") => Ok(()),
        Some(other) => Err(Failure::input(format!("unsupported filtration shape {other:?}; only \"standard\""))),
    }
}

fn matrix_shape(m: &MatrixInput) -> std::result::Result<(), Failure> {
    if m.len() != 3 || m.iter().any(|r| r.len() != 3) {
        return Err(Failure::input("frobenius must be a 3x3 array of coefficient lists"));
    }
    Ok(())
}

fn parse_r_matrix(ctx: PrimeCtx, rctx: &std::sync::Arc<RCtx>, m: &MatrixInput) -> std::result::Result<DDMatrix<RElem>, Failure> {
    matrix_shape(m)?;
    let mut entries: Vec<RElem> = Vec::with_capacity(9);
    for row in m {
        for pairs in row {
            let pairs: Vec<(usize, i128)> = pairs.iter().map(|&(k, c)| (k, c as i128)).collect();
            entries.push(RElem::from_pairs(rctx, &pairs)?);
        }
    }
    Ok(DDMatrix::new(ctx, std::array::from_fn(|i| std::array::from_fn(|j| entries[3 * i + j].clone()))))
}

fn parse_s0_matrix(ctx: PrimeCtx, m: &MatrixInput) -> std::result::Result<DDMatrix<S0<Fq>>, Failure> {
    matrix_shape(m)?;
    let p = ctx.p();
    let mut entries = Vec::with_capacity(9);
    for row in m {
        for pairs in row {
            let mut c = vec![Fq::new(0, p); p as usize];
            for &(k, v) in pairs {
                if k >= p as usize {
                    return Err(Failure::input(format!("power of u^e {k} is at least p")));
                }
                c[k] += Fq::new(v, p);
            }
            entries.push(S0::from_coeffs(p, &c));
        }
    }
    Ok(DDMatrix::new(ctx, std::array::from_fn(|i| std::array::from_fn(|j| entries[3 * i + j].clone()))))
}

fn gauge_from_input(ctx: PrimeCtx, g: &GaugeInput) -> std::result::Result<OrdinaryModule<Fq>, Failure> {
    let p = ctx.p();
    let f = |v| Fq::new(v, p);
    let data = GaugeData { v10: f(g.v10), v20: f(g.v20), v20p: f(g.v20p), v21: f(g.v21), lambda: g.alpha.map(f) };
    Ok(OrdinaryModule::new(ctx, data)?)
}

fn gauge_json<C: Scalar>(g: &GaugeData<C>, val: impl Fn(C) -> u64) -> Value {
    json!({
        "v10": val(g.v10),
        "v21": val(g.v21),
        "v20": val(g.v20),
        "v20p": val(g.v20p),
        "lambda": g.lambda.map(&val),
    })
}

fn fq_gauge_json(g: &GaugeData<Fq>) -> Value {
    gauge_json(g, |x| x.value() as u64)
}

/// Ordinary module from the `gauge` block, or from a mod-p Frobenius matrix.
fn ordinary_module(doc: &InputDoc) -> std::result::Result<OrdinaryModule<Fq>, Failure> {
    let ctx = ctx_of(doc)?;
    if let Some(g) = &doc.gauge {
        return gauge_from_input(ctx, g);
    }
    let Some(m) = &doc.frobenius else {
        return Err(Failure::input("need a gauge block or an F_p frobenius matrix"));
    };
    if doc.coefficients != Coefficients::Fp {
        return Err(Failure::input("deriving an ordinary form needs F_p coefficients"));
    }
    require_standard_filtration(doc)?;
    let a = parse_s0_matrix(ctx, m)?;
    let g = ordinary_form_modp(&Filtration::standard(Fq::new(0, ctx.p())), &a)?;
    Ok(OrdinaryModule::new(ctx, g)?)
}

fn cmd_validate(doc: &InputDoc, s: &Settings) -> Outcome {
    let generic = check_strong_genericity(doc.prime, doc.weights);
    let mut checks = vec![json!({"check": "strong_genericity", "ok": generic})];
    let mut lines = vec![format!("strongly generic: {generic}")];
    let ctx_ok = PrimeCtx::new(doc.prime, doc.weights);
    checks.push(json!({"check": "prime_and_weights", "ok": ctx_ok.is_ok()}));
    let filtration_ok = require_standard_filtration(doc).is_ok();
    checks.push(json!({"check": "filtration_standard", "ok": filtration_ok}));
    let mut ok = generic && ctx_ok.is_ok() && filtration_ok;
    if let (Ok(ctx), Some(m)) = (ctx_ok, &doc.frobenius) {
        let verdict = match doc.coefficients {
            Coefficients::ZpN => {
                let n = s.precision.or(doc.precision.padic).unwrap_or(8);
                let fil = s.fil.or(doc.precision.fil).unwrap_or((n as usize + 3).min(doc.prime as usize));
                RCtx::new(doc.prime, n, fil)
                    .map_err(Failure::from)
                    .and_then(|rc| parse_r_matrix(ctx, &rc, m))
                    .map(|a| subset_member(&a, SubsetTag::GL))
            }
            _ => parse_s0_matrix(ctx, m)
                .map(|a| a.is_lower_triangular() && (0..3).all(|i| !a.entry(i, i).coeff(0).is_zero())),
        };
        let fr_ok = matches!(verdict, Ok(true));
        checks.push(json!({"check": "frobenius_invertible", "ok": fr_ok}));
        lines.push(format!("frobenius well formed and invertible: {fr_ok}"));
        ok &= fr_ok;
    }
    lines.push(format!("valid: {ok}"));
    let report = json!({"valid": ok, "checks": checks});
    if ok {
        Ok((report, lines))
    } else {
        Err(Failure { code: EXIT_INPUT, message: "input failed validation".into(), partial: Some(report) })
    }
}

fn cmd_gauge(doc: &InputDoc, s: &Settings) -> Outcome {
    let ctx = ctx_of(doc)?;
    if doc.coefficients != Coefficients::ZpN {
        return Err(Failure::input("gauge needs ZpN coefficients; use gauge-modp for F_p"));
    }
    require_standard_filtration(doc)?;
    let n = s.precision.or(doc.precision.padic).unwrap_or(8);
    let fil = s.fil.or(doc.precision.fil).unwrap_or(n as usize + 3);
    let rc = RCtx::new(ctx.p(), n, fil)?;
    let m = doc.frobenius.as_ref().ok_or_else(|| Failure::input("missing frobenius"))?;
    let a = parse_r_matrix(ctx, &rc, m)?;
    match diagonalize(&a, n) {
        Ok(run) => {
            let mut report = json!({
                "precision": n,
                "fil": fil,
                "iterations": run.iterations,
                "verified": run.transcript.all_verified(),
                "gauge": gauge_json(&run.gauge, |x: ZpN| x.value()),
            });
            if s.transcript {
                report["transcript"] = serde_json::to_value(&run.transcript).expect("serializable");
            }
            let g = &run.gauge;
            let lines = vec![
                format!("converged after {} steps at precision p^{n}", run.iterations),
                format!("v10 = {}, v21 = {}, v20 = {} + {} E", g.v10, g.v21, g.v20, g.v20p),
                format!("lambda = ({}, {}, {})", g.lambda[0], g.lambda[1], g.lambda[2]),
                format!("all step identities verified: {}", run.transcript.all_verified()),
            ];
            Ok((report, lines))
        }
        Err(fail) => {
            let partial = s.transcript.then(|| serde_json::to_value(&fail.transcript).expect("serializable"));
            Err(Failure { code: exit_code(&fail.error), message: fail.error.to_string(), partial })
        }
    }
}

fn cmd_gauge_modp(doc: &InputDoc) -> Outcome {
    let ctx = ctx_of(doc)?;
    if doc.coefficients != Coefficients::Fp {
        return Err(Failure::input("gauge-modp needs Fp coefficients"));
    }
    require_standard_filtration(doc)?;
    let m = doc.frobenius.as_ref().ok_or_else(|| Failure::input("missing frobenius"))?;
    let a = parse_s0_matrix(ctx, m)?;
    let g = ordinary_form_modp(&Filtration::standard(Fq::new(0, ctx.p())), &a)?;
    let lines = vec![
        format!("ordinary form: v10 = {}, v21 = {}, v20 = {} + {} u^e", g.v10, g.v21, g.v20, g.v20p),
        format!("alpha = ({}, {}, {})", g.lambda[0], g.lambda[1], g.lambda[2]),
    ];
    Ok((json!({ "gauge": fq_gauge_json(&g) }), lines))
}

fn cmd_monodromy_dual(doc: &InputDoc) -> Outcome {
    let ctx = ctx_of(doc)?;
    let g = doc.gauge.as_ref().ok_or_else(|| Failure::input("Fp-dual monodromy needs a gauge block"))?;
    let d = g.eps.unwrap_or([0; 7]);
    let p = ctx.p();
    let c = |re: i64, eps: i64| Dual::new(Fq::new(re, p), Fq::new(eps, p));
    let data = GaugeData {
        v10: c(g.v10, d[0]),
        v20: c(g.v20, d[1]),
        v20p: c(g.v20p, d[2]),
        v21: c(g.v21, d[3]),
        lambda: [c(g.alpha[0], d[4]), c(g.alpha[1], d[5]), c(g.alpha[2], d[6])],
    };
    let m = OrdinaryModule::new(ctx, data)?;
    let exists = monodromy_exists(&m)?;
    let axioms = match monodromy_closed_form(&m) {
        Ok(nd) => Some(verify_monodromy_axioms(&m, &nd)),
        Err(Error::NoMonodromy) => None,
        Err(e) => return Err(e.into()),
    };
    let lines = vec![format!("exists over F[eps]: {exists}"), format!("closed form satisfies axioms: {axioms:?}")];
    Ok((json!({"exists": exists, "closed_form_axioms": axioms}), lines))
}

fn cmd_monodromy(doc: &InputDoc) -> Outcome {
    if doc.coefficients == Coefficients::FpDual {
        return cmd_monodromy_dual(doc);
    }
    let m = ordinary_module(doc)?;
    let exists = monodromy_exists(&m)?;
    let oracle = monodromy_bruteforce(&m);
    let mut report = json!({
        "gauge": fq_gauge_json(m.gauge()),
        "exists": exists,
        "oracle_solvable": oracle.is_some(),
        "oracle_dimension": oracle.as_ref().map(|s| s.dimension()),
    });
    let mut lines = vec![
        format!("exists: {exists}"),
        format!("oracle solvable: {}", oracle.is_some()),
    ];
    if exists {
        let nd = monodromy_closed_form(&m)?;
        let axioms = verify_monodromy_axioms(&m, &nd);
        let member = oracle.as_ref().is_some_and(|s| s.contains(&nd));
        let variant = sign_variant(&m)?;
        let variant_ok = verify_monodromy_axioms(&m, &variant);
        report["closed_form"] = serde_json::to_value(MonodromyReport::from(&nd)).expect("serializable");
        report["closed_form_axioms"] = json!(axioms);
        report["closed_form_in_oracle"] = json!(member);
        report["sign_variant_axioms"] = json!(variant_ok);
        let show = |x: &S0<Fq>| {
            x.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| format!("{c}*u^{}", k as u32 * m.ctx().e())).collect::<Vec<_>>().join(" + ")
        };
        lines.push(format!("P10 = {}", or_zero(show(&nd.p10))));
        lines.push(format!("P21 = {}", or_zero(show(&nd.p21))));
        lines.push(format!("P20 = {}", or_zero(show(&nd.p20))));
        lines.push(format!("closed form passes axioms: {axioms}, lies in oracle set: {member}"));
        lines.push(format!("sign-variant P10 passes axioms: {variant_ok}"));
        if !(axioms && member) {
            return Err(Failure { code: EXIT_ASSERTION, message: "closed form rejected by the oracle".into(), partial: Some(report) });
        }
    }
    if exists != oracle.is_some() {
        return Err(Failure { code: EXIT_ASSERTION, message: "oracle disagrees with the existence test".into(), partial: Some(report) });
    }
    Ok((report, lines))
}

fn or_zero(s: String) -> String {
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn poly_matrix_json(m: &PolyMatrix) -> Value {
    json!(m.iter().map(|r| r.iter().map(|x| x.to_pairs()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn cmd_etale(doc: &InputDoc) -> Outcome {
    let m = ordinary_module(doc)?;
    let t = doc.precision.pi_truncation.unwrap_or_else(|| default_truncation(m.ctx()));
    let em = to_etale(&m, t)?;
    let d = descend_isotypic(&em)?;
    let det_val = em.det_valuation();
    let lines = vec![
        format!("pi truncation {t}, det valuation {det_val:?} (3e = {})", 3 * m.ctx().e()),
        format!("descended diagonal exponents {:?}", d.diagonal_exponents),
    ];
    let report = json!({
        "pi_truncation": t,
        "frobenius": poly_matrix_json(&em.frob),
        "det_valuation": det_val,
        "descended": poly_matrix_json(&d.frob),
        "diagonal_exponents": d.diagonal_exponents,
    });
    Ok((report, lines))
}

fn cmd_fl(doc: &InputDoc) -> Outcome {
    let m = ordinary_module(doc)?;
    let ctx = *m.ctx();
    let fl = to_fl(&m)?;
    let em = to_etale(&m, doc.precision.pi_truncation.unwrap_or_else(|| default_truncation(&ctx)))?;
    let coherent = strip_twist(&ctx, &descend_isotypic(&em)?)? == fl.frob;
    let mut report = json!({"fl": FLReport::from(&fl), "pipeline_coherent": coherent});
    let mut lines = vec![
        format!("Hodge-Tate weights {:?}", fl.hodge_tate),
        format!("Frobenius {:?}", FLReport::from(&fl).frob),
        format!("agrees with the descended etale module: {coherent}"),
    ];
    let mut others = Vec::new();
    if let Some(g) = &doc.compare_with {
        others.push(("compare_with", gauge_from_input(ctx, g)?));
    }
    if let Some(t) = doc.rescale {
        let t = t.map(|v| Fq::new(v, ctx.p()));
        others.push(("rescale", rescale_gauge(&m, t)?));
    }
    for (label, other) in others {
        let f2 = to_fl(&other)?;
        let right = fl_isomorphic(&fl, &f2)?;
        let conj = fl_isomorphic_conjugate(&fl, &f2)?;
        report[label] = json!({"fl": FLReport::from(&f2), "isomorphic": right, "isomorphic_by_conjugation": conj});
        lines.push(format!("{label}: isomorphic {right}, by conjugation {conj}"));
    }
    if !coherent {
        return Err(Failure { code: EXIT_ASSERTION, message: "pipeline incoherent".into(), partial: Some(report) });
    }
    Ok((report, lines))
}

fn cmd_dims(doc: &InputDoc, s: &Settings) -> Outcome {
    let ctx = ctx_of(doc)?;
    let seed = seed_of(doc, s);
    let mut report = json!({});
    let mut lines = Vec::new();
    if doc.gauge.is_some() || doc.frobenius.is_some() {
        let m = ordinary_module(doc)?;
        let q = tangent_space(TangentKind::Quasi, &m)?;
        report["quasi"] = serde_json::to_value(&q).expect("serializable");
        lines.push(format!("tangent dimension without monodromy: {}", q.dimension));
        if monodromy_exists(&m)? {
            let w = tangent_space(TangentKind::WithMonodromy, &m)?;
            lines.push(format!("tangent dimension with monodromy: {} (forced zero: {:?})", w.dimension, w.forced_zero));
            report["with_monodromy"] = serde_json::to_value(&w).expect("serializable");
        }
    }
    let samples = doc.samples.unwrap_or(100);
    let locus = monodromy_locus_report(ctx, seed, samples, 5, 3)?;
    lines.push(format!(
        "sampled {} points: {} admissible, {} disagreements with v20 = 0",
        locus.sampled_total, locus.sampled_admissible, locus.disagreements
    ));
    lines.push(format!("v20 sweep over F_{}: {} admissible", ctx.p(), locus.sweep_admissible));
    lines.push(format!("lines inside the locus closed: {}/{}", locus.lines_closed, locus.lines_checked));
    report["locus"] = serde_json::to_value(&locus).expect("serializable");
    if locus.disagreements != 0 || locus.sweep_admissible != 1 {
        return Err(Failure { code: EXIT_ASSERTION, message: "locus differs from v20 = 0".into(), partial: Some(report) });
    }
    Ok((report, lines))
}

fn cmd_selftest(seed: u64) -> Outcome {
    let results = run_selftest(seed);
    let lines = results.iter().map(|r| format!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)).collect();
    let report = json!({ "suites": results });
    if results.iter().all(|r| r.passed) {
        Ok((report, lines))
    } else {
        Err(Failure { code: EXIT_ASSERTION, message: "self-test failed".into(), partial: Some(report) })
    }
}

/// Runs one command on a parsed document (absent only for `selftest`).
pub fn execute(command: Command, doc: Option<&InputDoc>, s: &Settings) -> Outcome {
    if command == Command::Selftest {
        return cmd_selftest(s.seed.or(doc.and_then(|d| d.seed)).unwrap_or(0));
    }
    let doc = doc.ok_or_else(|| Failure::input("--input is required for this command"))?;
    match command {
        Command::Validate => cmd_validate(doc, s),
        Command::Gauge => cmd_gauge(doc, s),
        Command::GaugeModp => cmd_gauge_modp(doc),
        Command::Monodromy => cmd_monodromy(doc),
        Command::Etale => cmd_etale(doc),
        Command::Fl => cmd_fl(doc),
        Command::Dims => cmd_dims(doc, s),
        Command::Selftest => unreachable!(),
    }
}

/// Command from its kebab-case name.
pub fn parse_command(name: &str) -> Option<Command> {
    <Command as ValueEnum>::from_str(name, true).ok()
}

pub fn parse_document(text: &str) -> std::result::Result<InputDoc, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::input(format!("schema error: {e}")))
}

/// Rendered report and exit code.
pub fn render(command: Command, outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Machine => {
            let doc = match outcome {
                Ok((result, _)) => json!({"command": command, "status": "ok", "result": result}),
                Err(f) => json!({
                    "command": command,
                    "status": "error",
                    "exit_code": f.code,
                    "message": f.message,
                    "partial": f.partial,
                }),
            };
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Text => match outcome {
            Ok((_, lines)) => lines.iter().map(|l| format!("{l}\n")).collect(),
            Err(f) => format!("error: {}\n", f.message),
        },
    }
}

/// Full driver used by the binary; returns the exit code.
pub fn run(args: Args, out: &mut impl std::io::Write, err: &mut impl std::io::Write) -> i32 {
    let Some(command) = args.command.or(args.command_pos) else {
        let _ = writeln!(err, "error: no command given (use --command NAME)");
        return EXIT_INPUT;
    };
    let doc = match &args.input {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_document(&text) {
                Ok(d) => Some(d),
                Err(f) => {
                    let _ = write!(out, "{}", render(command, &Err(f), args.format));
                    return EXIT_INPUT;
                }
            },
            Err(e) => {
                let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
                return EXIT_INPUT;
            }
        },
        None => None,
    };
    let settings = Settings { precision: args.precision, fil: args.fil, seed: args.seed, transcript: args.transcript };
    let outcome = execute(command, doc.as_ref(), &settings);
    let _ = write!(out, "{}", render(command, &outcome, args.format));
    match outcome {
        Ok(_) => EXIT_OK,
        Err(f) => f.code,
    }
}
