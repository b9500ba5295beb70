use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use tatehh::cli::oracle_comparison;
use tatehh::cup::CupEngine;
use tatehh::decomp::{abelian_ring, DecompositionContext};
use tatehh::groups::{cyclic, klein_four, symmetric3, FiniteGroup, Subgroup};
use tatehh::identities::identity_suite;
use tatehh::kgmodules::{conjugation_module, induce, regular_module, trivial_module, KGModule, ModulePairing};
use tatehh::linalg::{neg_mod, FpMatrix};
use tatehh::maps::MapCache;
use tatehh::resolutions::{
    build_resolution, default_window, ordinary_cohomology, ordinary_homology, tate_cohomology, Backend, SizeBudget,
    TateEngine,
};
use tatehh::ringpres::{
    radical_report, s3_generators, s3_named_elements, verify_relations, presentation_for, RadicalStatus,
    DEFAULT_MAX_LENGTH, S3_EXTRA_RELATIONS, S3_RELATIONS,
};
use tatehh::Result;

type Outcome = Result<std::result::Result<String, String>>;
type Criterion = (&'static str, fn() -> Outcome);

fn verdict(ok: bool, good: String, bad: String) -> std::result::Result<String, String> {
    if ok {
        Ok(good)
    } else {
        Err(bad)
    }
}

fn s3() -> Arc<FiniteGroup> {
    Arc::new(symmetric3())
}

fn rotations(g: &Arc<FiniteGroup>) -> Subgroup {
    Subgroup::new(g, &[0, 1, 3]).unwrap()
}

fn engine(g: &Arc<FiniteGroup>, p: u32, w: i32, backend: Backend) -> Result<TateEngine> {
    Ok(TateEngine::new(build_resolution(g, p, default_window(w), backend, &SizeBudget::default())?))
}

fn graded_dimensions() -> Outcome {
    let start = Instant::now();
    let g = s3();
    let ctx = DecompositionContext::for_group(&g, 3, 4, None, &SizeBudget::default())?;
    // Independent references: the normalized bar complex of S3 and the periodic resolution of C3 itself.
    let bar = engine(&g, 3, 1, Backend::Bar)?;
    let budget = SizeBudget::default();
    let c3 = Arc::new(cyclic(3));
    let c3_engine = engine(&c3, 3, 4, Backend::Cyclic)?;
    let k = Arc::new(trivial_module(&g, 3)?);
    let k3 = Arc::new(trivial_module(&c3, 3)?);
    let expected = [2, 1, 1, 2, 2, 1, 1, 2, 2];
    let mut totals = Vec::new();
    let mut split_ok = true;
    for n in -4..=4 {
        let comps = ctx.component_dims(n)?;
        let whole = match n {
            1.. => ordinary_cohomology(&k, n as usize, &budget)?,
            ..=-2 => ordinary_homology(&k, (-n - 1) as usize, &budget)?,
            _ => tate_cohomology(&bar, &k, n)?.dim(),
        };
        let rot = tate_cohomology(&c3_engine, &k3, n)?.dim();
        split_ok &= comps == [whole, rot, 0];
        let total = ctx.total_dim(n)?;
        split_ok &= total == ctx.direct_dim(n)?;
        totals.push(total);
    }
    let elapsed = start.elapsed();
    Ok(verdict(
        totals == expected && split_ok,
        format!("totals {totals:?}, split matches, {:.2}s", elapsed.as_secs_f64()),
        format!("totals {totals:?}, split ok {split_ok}"),
    ))
}

fn relation_suite() -> Outcome {
    let g = s3();
    let ctx = DecompositionContext::for_group(&g, 3, 6, None, &SizeBudget::default())?;
    let named = s3_named_elements(&ctx)?;
    let texts: Vec<&str> = S3_RELATIONS.iter().chain(S3_EXTRA_RELATIONS).copied().collect();
    let verdicts = verify_relations(&ctx, &named, &texts)?;
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.passed).map(|v| v.relation.as_str()).collect();

    let pres = presentation_for(&ctx, s3_generators(&named), DEFAULT_MAX_LENGTH)?;
    let radical = radical_report(&ctx, &pres)?;
    let status = |name: &str| radical.iter().find(|r| r.generator == name).map(|r| r.status.clone());
    let nil_ok = status("C") == Some(RadicalStatus::Nilpotent(2))
        && status("W1") == Some(RadicalStatus::Nilpotent(2))
        && status("W2") == Some(RadicalStatus::Nilpotent(3))
        && status("W2^-1") == Some(RadicalStatus::Nilpotent(3));

    // Negative control: a false relation must be rejected.
    let control = verify_relations(&ctx, &named, &["W2^2 = x*C"])?;
    Ok(verdict(
        failed.is_empty() && nil_ok && !control[0].passed,
        format!("{} relations and nilpotency orders hold", verdicts.len()),
        format!("failed {failed:?}, nilpotency ok {nil_ok}, control rejected {}", !control[0].passed),
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut counts = Vec::new();
    for (g, p) in [(s3(), 3), (Arc::new(klein_four()), 2)] {
        let ctx = DecompositionContext::for_group(&g, p, 4, None, &SizeBudget::default())?;
        let (count, failure) = oracle_comparison(&ctx, 2)?;
        if let Some(f) = failure {
            return Ok(Err(format!("{} over F_{p}: {f}", g.name())));
        }
        counts.push(format!("{} {count} pairs", g.name()));
    }
    Ok(Ok(counts.join(", ")))
}

fn abelian_case() -> Outcome {
    let w = 4;
    for (n_ord, p, expected) in [(3, 3, 3), (2, 2, 2)] {
        let g = Arc::new(cyclic(n_ord));
        let ctx = DecompositionContext::for_group(&g, p, w, None, &SizeBudget::default())?;
        let shortcut = abelian_ring(&g, p, w, &SizeBudget::default())?;
        for n in -w..=w {
            let via_decomp = ctx.total_dim(n)?;
            let via_shortcut = shortcut.dims.iter().find(|d| d.0 == n).map(|d| d.1);
            if via_decomp != expected || via_shortcut != Some(expected) {
                return Ok(Err(format!(
                    "C{n_ord} over F_{p}, degree {n}: decomposition {via_decomp}, shortcut {via_shortcut:?}"
                )));
            }
        }
    }
    Ok(Ok(format!("C3/F3 gives 3 and C2/F2 gives 2 for |n| <= {w} by both routes")))
}

fn identity_checks() -> Outcome {
    let g = s3();
    let cup = CupEngine::new(Arc::new(engine(&g, 3, 4, Backend::Reduced)?));
    let checks = identity_suite(&cup, (-2, 3))?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let cases: usize = checks.iter().map(|c| c.cases).sum();
    Ok(verdict(
        failed.is_empty() && checks.len() == 16,
        format!("{} identities, {cases} cases", checks.len()),
        format!("failed {failed:?}"),
    ))
}

fn structural_properties() -> Outcome {
    let g = s3();
    let budget = SizeBudget::default();
    let tate = Arc::new(engine(&g, 3, 5, Backend::Reduced)?);
    let mut problems = Vec::new();
    let modules: Vec<Arc<KGModule>> = vec![
        Arc::new(trivial_module(&g, 3)?),
        Arc::new(conjugation_module(&g, 3)?),
        Arc::new(regular_module(&g, 3)?),
    ];

    for m in &modules {
        for n in 1..=4 {
            if tate_cohomology(&tate, m, n)?.dim() != ordinary_cohomology(m, n as usize, &budget)? {
                problems.push(format!("positive degree {n} for {}", m.name()));
            }
        }
        for n in -4..=-2 {
            let h = ordinary_homology(m, (-(n + 1)) as usize, &budget)?;
            if tate_cohomology(&tate, m, n)?.dim() != h {
                problems.push(format!("negative degree {n} for {}", m.name()));
            }
        }
    }

    for (a, b) in [(0, 1), (1, 2), (0, 0)] {
        let sum = Arc::new(modules[a].direct_sum(&modules[b])?);
        for n in -3..=3 {
            let lhs = tate_cohomology(&tate, &sum, n)?.dim();
            let rhs = tate_cohomology(&tate, &modules[a], n)?.dim() + tate_cohomology(&tate, &modules[b], n)?.dim();
            if lhs != rhs {
                problems.push(format!("additivity in degree {n}"));
            }
        }
    }

    let c2 = Subgroup::new(&g, &[0, 2]).unwrap();
    for sub in [rotations(&g), c2] {
        let (hg, _) = sub.as_group();
        let hg = Arc::new(hg);
        let kh = trivial_module(&hg, 3)?;
        let ind = Arc::new(induce(&kh, &sub)?);
        let own = engine(&hg, 3, 4, Backend::Bar)?;
        let kh = Arc::new(kh);
        for n in -4..=4 {
            let lhs = tate_cohomology(&tate, &ind, n)?.dim();
            let rhs = tate_cohomology(&own, &kh, n)?.dim();
            if lhs != rhs {
                problems.push(format!("induction from order {} in degree {n}: {lhs} vs {rhs}", sub.order()));
            }
        }
    }

    let cup = CupEngine::new(tate.clone());
    let k = modules[0].clone();
    let kk = ModulePairing::trivial(&k)?;
    let n_sub = rotations(&g);
    for sub in [Subgroup::whole(&g), n_sub.clone()] {
        for i in -2..=2 {
            for j in -2..=2 {
                let (si, sj) = (tate.space(&sub, &k, i)?, tate.space(&sub, &k, j)?);
                for a in 0..si.dim() {
                    for b in 0..sj.dim() {
                        let (x, y) = (si.basis_class(a), sj.basis_class(b));
                        let xy = cup.cup(&x, &y, &kk)?.coords;
                        let mut yx = cup.cup(&y, &x, &kk)?.coords;
                        if (i * j) % 2 != 0 {
                            yx.iter_mut().for_each(|c| *c = neg_mod(*c, 3));
                        }
                        if xy != yx {
                            problems.push(format!("commutativity in degrees ({i}, {j})"));
                        }
                    }
                }
            }
        }
    }
    let w1 = tate.space(&n_sub, &k, 1)?.basis_class(0);
    if !cup.cup(&w1, &w1, &kk)?.is_zero() {
        problems.push("w1^2 is nonzero".into());
    }

    let maps = MapCache::new(tate.clone());
    let whole = Subgroup::whole(&g);
    let b = 2;
    for n in -4..=4 {
        let res = maps.res(&whole, &n_sub, &k, n)?;
        let conj = maps.conj(b, &n_sub, &k, n)?;
        let d = conj.matrix.rows();
        let fixed = conj.matrix.sub(&FpMatrix::identity(3, d)).kernel_basis();
        let image_rank = res.matrix.rank();
        let inside = res.matrix.columns().iter().all(|c| conj.matrix.mul_vec(c) == *c);
        if image_rank != fixed.len() || !inside {
            problems.push(format!("restriction image in degree {n}: rank {image_rank}, fixed {}", fixed.len()));
        }
    }

    Ok(verdict(
        problems.is_empty(),
        "ordinary comparison, additivity, induction, commutativity, w1^2 = 0, fixed points".into(),
        problems.join("; "),
    ))
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_tatehh"))
            .args(["demo-s3", "--format", "structured", "--seed", "11"])
            .output()
            .map_err(tatehh::Error::from)
    };
    let (a, b) = (run()?, run()?);
    Ok(verdict(
        a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty(),
        format!("{} identical bytes", a.stdout.len()),
        format!("status {:?}/{:?}, equal {}", a.status.code(), b.status.code(), a.stdout == b.stdout),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("S3 over F3 graded dimensions", graded_dimensions),
        ("S3 relation suite", relation_suite),
        ("double-coset product equals direct product", oracle_equivalence),
        ("abelian case", abelian_case),
        ("identity suite", identity_checks),
        ("structural properties", structural_properties),
        ("determinism of demo-s3", determinism),
    ];
    let mut all = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = match f() {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!("criterion {}: {} {name} ({detail})", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
