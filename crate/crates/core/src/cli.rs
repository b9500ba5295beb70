//! Command-line front end. Every command produces one report, printed as text
//! or as a single JSON document, and an exit status.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cup::CupEngine;
use crate::decomp::{abelian_ring, format_group_algebra_element, DecompositionContext, RingElement};
use crate::error::{Error, Result};
use crate::groups::{build_group, builtin, symmetric3, FiniteGroup, GroupSpec};
use crate::identities::{coboundary_invariance, identity_suite, IdentityCheck};
use crate::kgmodules::trivial_module;
use crate::linalg::{check_prime, FpMatrix};
use crate::resolutions::{
    auto_backend, build_resolution, default_window, tate_cohomology, Backend, SizeBudget, TateEngine,
};
use crate::ringpres::{
    extract, parse_relation_file, presentation_for, radical_report, s3_generators, s3_named_elements,
    verify_presentation, verify_relation, verify_relations, RadicalEntry, RadicalStatus, RelationVerdict,
    RingPresentation, DEFAULT_MAX_LENGTH, S3_EXTRA_RELATIONS, S3_RELATIONS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Window used by `demo-s3`, large enough for the cubic nilpotency relations.
pub const DEMO_WINDOW: i32 = 6;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    #[value(alias = "json")]
    Structured,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Auto,
    Generic,
    Cyclic,
    Bar,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Dimensions of the Tate–Hochschild cohomology and of each stabilizer's share.
    Dims,
    /// Dimensions of Tate cohomology with trivial coefficients.
    Tate,
    /// Extract a ring presentation inside the window.
    Ring,
    /// Check the relations listed in a file.
    Verify,
    /// Compare the double-coset product with the direct cup product.
    OracleCheck,
    /// Run the identity suite for restriction, corestriction, conjugation and θ/π.
    Props,
    /// End-to-end computation for S3 in characteristic 3.
    DemoS3,
}

#[derive(Debug, Parser)]
#[command(name = "tatehh", version, about = "Tate and Tate–Hochschild cohomology of finite groups over F_p")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Built-in group name (C1..C12, C2xC2, S3, D4, Q8) or a JSON/TOML group file.
    #[arg(long, global = true, default_value = "S3")]
    pub group: String,
    #[arg(long, global = true, default_value_t = 3)]
    pub prime: u32,
    /// Degrees n with |n| <= W.
    #[arg(long, global = true, default_value_t = 4)]
    pub window: i32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, global = true)]
    pub relations: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = BackendChoice::Auto)]
    pub backend: BackendChoice,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub command: Command,
    pub group: String,
    pub prime: u32,
    pub window: i32,
    pub format: Format,
    pub relations: Option<PathBuf>,
    pub backend: BackendChoice,
    pub seed: u64,
}

impl From<Cli> for JobSpec {
    fn from(c: Cli) -> Self {
        JobSpec {
            command: c.command,
            group: c.group,
            prime: c.prime,
            window: c.window,
            format: c.format,
            relations: c.relations,
            backend: c.backend,
            seed: c.seed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub command: Command,
    pub group: String,
    pub order: usize,
    pub p: u32,
    pub window: i32,
    pub backend: String,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimRow {
    pub degree: i32,
    pub total: usize,
    pub components: Vec<usize>,
    pub direct: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitInfo {
    pub representative: String,
    pub stabilizer_order: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub metadata: Option<Metadata>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub orbits: Vec<OrbitInfo>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub dims: Vec<DimRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tate: Vec<(i32, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub presentation: Option<RingPresentation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub radical: Vec<RadicalEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationVerdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub properties: Vec<IdentityCheck>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn finalize(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed)
            && self.relations.iter().all(|r| r.passed)
            && self.properties.iter().all(|c| c.passed);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut o = String::new();
        if let Some(m) = &self.metadata {
            let _ = writeln!(
                o,
                "group {} (order {}), p = {}, window {}, backend {}, seed {}",
                m.group, m.order, m.p, m.window, m.backend, m.seed
            );
        }
        if !self.orbits.is_empty() {
            let _ = writeln!(o, "orbits:");
            for (i, orb) in self.orbits.iter().enumerate() {
                let _ = writeln!(o, "  {}: g = {}, |H_i| = {}", i + 1, orb.representative, orb.stabilizer_order);
            }
        }
        if !self.dims.is_empty() {
            let _ = writeln!(o, "{:>4}  {:>5}  components", "n", "total");
            for r in &self.dims {
                let comps: Vec<String> = r.components.iter().map(usize::to_string).collect();
                let _ = writeln!(o, "{:>4}  {:>5}  ({})", r.degree, r.total, comps.join(", "));
            }
        }
        if !self.tate.is_empty() {
            let _ = writeln!(o, "{:>4}  dim", "n");
            for (n, d) in &self.tate {
                let _ = writeln!(o, "{n:>4}  {d}");
            }
        }
        if let Some(pres) = &self.presentation {
            let gens: Vec<String> = pres.generators.iter().map(|g| format!("{} (degree {})", g.name, g.degree)).collect();
            let _ = writeln!(o, "generators: {}", if gens.is_empty() { "none".into() } else { gens.join(", ") });
            let _ = writeln!(o, "relations:");
            for r in &pres.relations {
                let _ = writeln!(o, "  {}", r.text);
            }
            let _ = writeln!(o, "note: {}", pres.note);
        }
        if !self.radical.is_empty() {
            let _ = writeln!(o, "nilpotency:");
            for r in &self.radical {
                let status = match &r.status {
                    RadicalStatus::Nilpotent(k) if r.generator.contains('^') => format!("({})^{k} = 0", r.generator),
                    RadicalStatus::Nilpotent(k) => format!("{}^{k} = 0", r.generator),
                    RadicalStatus::Unit => "invertible".into(),
                    RadicalStatus::NotNilpotentInWindow => "not nilpotent inside the window".into(),
                };
                let _ = writeln!(o, "  {}: {status}", r.generator);
            }
        }
        if !self.relations.is_empty() {
            let _ = writeln!(o, "relation checks:");
            for r in &self.relations {
                let _ = write!(o, "  [{}] {}", if r.passed { "pass" } else { "FAIL" }, r.relation);
                if let Some(e) = &r.error {
                    let _ = write!(o, " ({e})");
                } else if !r.witness.is_empty() {
                    let _ = write!(o, " (witness {:?})", r.witness);
                }
                o.push('\n');
            }
        }
        if !self.properties.is_empty() {
            let _ = writeln!(o, "identities:");
            for c in &self.properties {
                let _ = writeln!(o, "  [{}] {} ({})", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(o, "checks:");
            for c in &self.checks {
                let _ = writeln!(o, "  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
        }
        let _ = writeln!(o, "{}", if self.passed { "OK" } else { "FAILED" });
        o
    }
}

pub struct Outcome {
    pub output: String,
    pub status: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SizeBudget(_) => EXIT_BUDGET,
        Error::Inconsistent(_) => EXIT_VERIFICATION,
        _ => EXIT_BAD_INPUT,
    }
}

/// Resolves a built-in name or reads a group file (`.toml`, otherwise JSON).
pub fn load_group(source: &str) -> Result<FiniteGroup> {
    if let Some(g) = builtin(source) {
        return Ok(g);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(Error::InvalidGroup(format!("{source} is neither a built-in group nor a readable file")));
    }
    let text = std::fs::read_to_string(path)?;
    let spec: GroupSpec = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
        toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?
    };
    build_group(&spec)
}

fn backend_for(choice: BackendChoice, group: &FiniteGroup, p: u32) -> Backend {
    match choice {
        BackendChoice::Auto => auto_backend(group, p),
        BackendChoice::Generic => Backend::Reduced,
        BackendChoice::Cyclic => Backend::Cyclic,
        BackendChoice::Bar => Backend::Bar,
    }
}

pub fn run(job: &JobSpec) -> Outcome {
    match run_inner(job) {
        Ok(report) => Outcome {
            status: if report.passed { EXIT_OK } else { EXIT_VERIFICATION },
            output: report.render(job.format),
        },
        Err(e) => Outcome {
            output: format!("error: {e}\n"),
            status: exit_code(&e),
        },
    }
}

fn run_inner(job: &JobSpec) -> Result<Report> {
    check_prime(job.prime)?;
    if job.window < 1 {
        return Err(Error::Invalid("the window must be at least 1".into()));
    }
    let (group, window) = match job.command {
        Command::DemoS3 => (Arc::new(symmetric3()), DEMO_WINDOW),
        _ => (Arc::new(load_group(&job.group)?), job.window),
    };
    let p = if job.command == Command::DemoS3 { 3 } else { job.prime };
    let backend = backend_for(job.backend, &group, p);
    let budget = SizeBudget::default();
    let mut report = Report {
        metadata: Some(Metadata {
            command: job.command,
            group: group.name().to_string(),
            order: group.order(),
            p,
            window,
            backend: backend.to_string(),
            seed: job.seed,
        }),
        ..Report::default()
    };
    match job.command {
        Command::Tate => {
            let res = build_resolution(&group, p, default_window(window), backend, &budget)?;
            let engine = TateEngine::new(res);
            let k = Arc::new(trivial_module(&group, p)?);
            for n in -window..=window {
                report.tate.push((n, tate_cohomology(&engine, &k, n)?.dim()));
            }
        }
        Command::Dims => {
            let ctx = DecompositionContext::for_group(&group, p, window, Some(backend), &budget)?;
            dims_section(&ctx, &mut report)?;
            if group.is_abelian() {
                let ab = abelian_ring(&group, p, window, &budget)?;
                let ok = ab.dims.iter().zip(&report.dims).all(|(a, r)| a.1 == r.total);
                report.check("abelian_shortcut", ok, ab.structure);
            }
        }
        Command::Ring => {
            let ctx = DecompositionContext::for_group(&group, p, window, Some(backend), &budget)?;
            let pres = extract(&ctx, DEFAULT_MAX_LENGTH)?;
            report.relations = verify_presentation(&ctx, &pres)?;
            report.radical = radical_report(&ctx, &pres)?;
            report.presentation = Some(pres);
        }
        Command::Verify => {
            let path = job
                .relations
                .as_ref()
                .ok_or_else(|| Error::Invalid("verify needs --relations <path>".into()))?;
            let text = std::fs::read_to_string(path)?;
            let rels = parse_relation_file(&text)?;
            let ctx = DecompositionContext::for_group(&group, p, window, Some(backend), &budget)?;
            let names = match s3_named_elements(&ctx) {
                Ok(named) => named,
                Err(_) => extract(&ctx, DEFAULT_MAX_LENGTH)?.names(),
            };
            let texts: Vec<&str> = rels.iter().map(|r| r.0.as_str()).collect();
            report.relations = verify_relations(&ctx, &names, &texts)?;
        }
        Command::OracleCheck => {
            let ctx = DecompositionContext::for_group(&group, p, window, Some(backend), &budget)?;
            let bound = window.min(2);
            let (count, failure) = oracle_comparison(&ctx, bound)?;
            report.check(
                "double_coset_formula_vs_direct_cup",
                failure.is_none(),
                failure.unwrap_or_else(|| format!("{count} basis pairs with |i|, |j| <= {bound}")),
            );
        }
        Command::Props => {
            let res = build_resolution(&group, p, default_window(window), backend, &budget)?;
            let cup = CupEngine::new(Arc::new(TateEngine::new(res)));
            let degrees = (-window.min(2), window.min(3));
            report.properties = identity_suite(&cup, degrees)?;
            report.properties.push(coboundary_invariance(cup.tate(), degrees, 64, job.seed)?);
        }
        Command::DemoS3 => demo_s3(&mut report, backend, &budget)?,
    }
    report.finalize();
    Ok(report)
}

fn dims_section(ctx: &DecompositionContext, report: &mut Report) -> Result<()> {
    let group = ctx.acting_group();
    report.orbits = ctx
        .orbit_reps()
        .iter()
        .zip(ctx.stabilizers())
        .map(|(&g, s)| OrbitInfo {
            representative: group.label(g).to_string(),
            stabilizer_order: s.order(),
        })
        .collect();
    let w = ctx.window();
    let mut mismatch = Vec::new();
    for n in -w..=w {
        let components = ctx.component_dims(n)?;
        let total = components.iter().sum();
        let direct = ctx.direct_dim(n)?;
        if direct != total {
            mismatch.push(n);
        }
        report.dims.push(DimRow {
            degree: n,
            total,
            components,
            direct,
        });
    }
    report.check(
        "decomposition_matches_direct",
        mismatch.is_empty(),
        if mismatch.is_empty() {
            "sum of stabilizer dimensions equals the direct computation".to_string()
        } else {
            format!("mismatch in degrees {mismatch:?}")
        },
    );
    Ok(())
}

/// Compares the two products on every pair of decomposed basis elements with
/// `|i|, |j| <= bound` and `|i + j|` inside the window.
pub fn oracle_comparison(ctx: &DecompositionContext, bound: i32) -> Result<(usize, Option<String>)> {
    let mut count = 0;
    for i in -bound..=bound {
        for j in -bound..=bound {
            if (i + j).abs() > ctx.window() {
                continue;
            }
            let (di, dj) = (ctx.total_dim(i)?, ctx.total_dim(j)?);
            for a in 0..di {
                for b in 0..dj {
                    let x = basis_element(i, di, a);
                    let y = basis_element(j, dj, b);
                    count += 1;
                    if ctx.multiply(&x, &y)? != ctx.oracle_multiply(&x, &y)? {
                        return Ok((count, Some(format!("degrees ({i}, {j}), basis pair ({a}, {b})"))));
                    }
                }
            }
        }
    }
    Ok((count, None))
}

fn basis_element(degree: i32, dim: usize, i: usize) -> RingElement {
    let mut coords = vec![0; dim];
    coords[i] = 1;
    RingElement { degree, coords }
}

/// Expected per-degree totals for S3 in characteristic 3 on `n = -4..4`.
pub const S3_TOTALS: [usize; 9] = [2, 1, 1, 2, 2, 1, 1, 2, 2];

fn demo_s3(report: &mut Report, backend: Backend, budget: &SizeBudget) -> Result<()> {
    let group = Arc::new(symmetric3());
    let ctx = DecompositionContext::for_group(&group, 3, DEMO_WINDOW, Some(backend), budget)?;
    dims_section(&ctx, report)?;

    let totals: Vec<usize> = (-4..=4).map(|n| ctx.total_dim(n)).collect::<Result<_>>()?;
    report.check("graded_dimensions", totals == S3_TOTALS, format!("{totals:?} for n = -4..4"));
    let orders: Vec<usize> = ctx.stabilizers().iter().map(|s| s.order()).collect();
    let third_zero = (-4..=4).all(|n| ctx.component_dims(n).map(|d| d[2] == 0).unwrap_or(false));
    report.check(
        "stabilizers",
        orders == [6, 3, 2] && third_zero,
        format!("orders {orders:?}, third summand vanishes: {third_zero}"),
    );

    let mut round_trip = true;
    for n in -4..=4 {
        let a = ctx.assemble_matrix(n)?;
        let d = ctx.decompose_matrix(n)?;
        let id = FpMatrix::identity(3, a.cols());
        round_trip &= d.mul(&a) == id && a.mul(&d) == id;
    }
    report.check("decompose_assemble_inverse", round_trip, "n = -4..4");

    let named = s3_named_elements(&ctx)?;
    let center = ctx.degree_zero_center(&named["E2"])?;
    let label = format_group_algebra_element(&group, &center);
    report.check("E2_is_class_sum", center == [0, 1, 0, 1, 0, 0], format!("E2 = {label}"));

    // ψ₂(1) ⌣ ψ₂(w₁) = −W₁ through the double-coset formula.
    let n_orbit = 1;
    let comp = |name: &str| ctx.component(&named[name], n_orbit);
    let trace = ctx.product_formula(n_orbit, &comp("E2")?, n_orbit, &comp("W1")?)?;
    let got: Vec<u32> = trace.components.concat();
    let minus_w1: Vec<u32> = named["W1"].coords.iter().map(|&c| (3 - c) % 3).collect();
    report.check(
        "E2_times_W1",
        got == minus_w1,
        format!("{} double-coset summands", trace.summands.len()),
    );

    let (count, failure) = oracle_comparison(&ctx, 2)?;
    report.check(
        "oracle_equivalence",
        failure.is_none(),
        failure.unwrap_or_else(|| format!("{count} basis pairs with |i|, |j| <= 2")),
    );

    let extracted = extract(&ctx, DEFAULT_MAX_LENGTH)?;
    let degrees = extracted.generator_degrees();
    let own = verify_presentation(&ctx, &extracted)?;
    report.check(
        "extracted_generator_degrees",
        degrees == [3, 4, -4, 0, 1, 2, -2],
        format!("{degrees:?}"),
    );
    report.check(
        "extracted_relations_hold",
        own.iter().all(|v| v.passed),
        format!("{} relations", own.len()),
    );

    let pres = presentation_for(&ctx, s3_generators(&named), DEFAULT_MAX_LENGTH)?;
    let names = pres.names();
    let mut all_names = named.clone();
    all_names.extend(names);
    for r in S3_RELATIONS.iter().chain(S3_EXTRA_RELATIONS) {
        let e = crate::ringpres::parse_relation(r)?;
        report.relations.push(verify_relation(&ctx, &all_names, r, &e));
    }
    report.radical = radical_report(&ctx, &pres)?;
    let expect = [
        ("C", RadicalStatus::Nilpotent(2)),
        ("W1", RadicalStatus::Nilpotent(2)),
        ("W2", RadicalStatus::Nilpotent(3)),
        ("W2^-1", RadicalStatus::Nilpotent(3)),
        ("z", RadicalStatus::Unit),
        ("z^-1", RadicalStatus::Unit),
    ];
    let radical_ok = expect
        .iter()
        .all(|(n, s)| report.radical.iter().any(|r| r.generator == *n && r.status == *s));
    report.check("radical", radical_ok, "C^2 = W1^2 = W2^3 = (W2^-1)^3 = 0, z invertible");
    report.presentation = Some(pres);
    Ok(())
}

/// Binary entry point; returns the process exit status.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    let job = JobSpec::from(cli);
    let out = run(&job);
    if out.status == EXIT_BAD_INPUT || out.status == EXIT_BUDGET {
        eprint!("{}", out.output);
    } else {
        print!("{}", out.output);
    }
    out.status
}
