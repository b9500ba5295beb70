//! Cross-checks against quantities computed here by independent means.

use std::sync::Arc;

use tatehh::decomp::DecompositionContext;
use tatehh::groups::{builtin, cyclic, FiniteGroup, Subgroup};
use tatehh::kgmodules::{induce, trivial_module};
use tatehh::resolutions::{
    auto_backend, build_resolution, default_window, ordinary_cohomology, ordinary_homology, tate_cohomology,
    SizeBudget, TateEngine,
};

fn tate_dims(g: &Arc<FiniteGroup>, p: u32, w: i32) -> Vec<usize> {
    let res = build_resolution(g, p, default_window(w), auto_backend(g, p), &SizeBudget::default()).unwrap();
    let engine = TateEngine::new(res);
    let k = Arc::new(trivial_module(g, p).unwrap());
    (-w..=w).map(|n| tate_cohomology(&engine, &k, n).unwrap().dim()).collect()
}

/// Centralizer of `x` by scanning the multiplication table.
fn centralizer(g: &Arc<FiniteGroup>, x: usize) -> Subgroup {
    let members: Vec<usize> = (0..g.order()).filter(|&h| g.mul(h, x) == g.mul(x, h)).collect();
    Subgroup::new(g, &members).unwrap()
}

fn class_reps(g: &FiniteGroup) -> Vec<usize> {
    let mut seen = vec![false; g.order()];
    let mut reps = Vec::new();
    for x in 0..g.order() {
        if seen[x] {
            continue;
        }
        reps.push(x);
        for h in 0..g.order() {
            seen[g.mul(g.mul(h, x), g.inv(h))] = true;
        }
    }
    reps
}

#[test]
fn cyclic_groups_against_the_periodic_complex() {
    // With trivial coefficients the periodic complex has maps 0 and multiplication by n,
    // so every Tate group is k when p divides n and zero otherwise.
    for n in [2, 3, 4, 5, 6, 9] {
        for p in [2, 3, 5] {
            let expected = usize::from(n % p as usize == 0);
            let g = Arc::new(cyclic(n));
            assert_eq!(tate_dims(&g, p, 3), vec![expected; 7], "C{n} over F{p}");
        }
    }
}

#[test]
fn hochschild_dimensions_from_brute_force_centralizers() {
    for (name, p, w) in [("S3", 3, 3), ("D4", 2, 2), ("Q8", 2, 2), ("C2xC2", 2, 2), ("C6", 3, 3), ("C4", 2, 2)] {
        let g = Arc::new(builtin(name).unwrap());
        let ctx = DecompositionContext::for_group(&g, p, w, None, &SizeBudget::default()).unwrap();
        let mut expected = vec![0; (2 * w + 1) as usize];
        for x in class_reps(&g) {
            let (c, _) = centralizer(&g, x).as_group();
            for (e, d) in expected.iter_mut().zip(tate_dims(&Arc::new(c), p, w)) {
                *e += d;
            }
        }
        let got: Vec<usize> = (-w..=w).map(|n| ctx.total_dim(n).unwrap()).collect();
        let direct: Vec<usize> = (-w..=w).map(|n| ctx.direct_dim(n).unwrap()).collect();
        assert_eq!(got, expected, "{name}");
        assert_eq!(direct, expected, "{name}");
    }
}

#[test]
fn abelian_dimension_is_order_times_trivial() {
    for (name, p) in [("C3", 3), ("C4", 2), ("C2xC2", 2), ("C6", 2)] {
        let g = Arc::new(builtin(name).unwrap());
        let ctx = DecompositionContext::for_group(&g, p, 3, None, &SizeBudget::default()).unwrap();
        let trivial = tate_dims(&g, p, 3);
        for (i, n) in (-3..=3).enumerate() {
            assert_eq!(ctx.total_dim(n).unwrap(), g.order() * trivial[i], "{name} degree {n}");
        }
    }
}

#[test]
fn positive_and_negative_degrees_against_bar_complex() {
    let budget = SizeBudget::default();
    for (name, p) in [("Q8", 2), ("D4", 2), ("S3", 3), ("C2xC2", 2)] {
        let g = Arc::new(builtin(name).unwrap());
        let dims = tate_dims(&g, p, 3);
        let k = trivial_module(&g, p).unwrap();
        for n in 1..=3 {
            assert_eq!(dims[(n + 3) as usize], ordinary_cohomology(&k, n as usize, &budget).unwrap(), "{name} H^{n}");
        }
        for n in -3..=-2 {
            let h = ordinary_homology(&k, (-n - 1) as usize, &budget).unwrap();
            assert_eq!(dims[(n + 3) as usize], h, "{name} H_{}", -n - 1);
        }
    }
}

#[test]
fn quaternion_group_has_period_four() {
    let g = Arc::new(builtin("Q8").unwrap());
    let dims = tate_dims(&g, 2, 4);
    for i in 0..dims.len() - 4 {
        assert_eq!(dims[i], dims[i + 4]);
    }
    assert_eq!(&dims[4..8], &[1, 2, 2, 1]);
}

#[test]
fn induced_modules_follow_subgroup_cohomology() {
    let budget = SizeBudget::default();
    for name in ["S3", "D4"] {
        let g = Arc::new(builtin(name).unwrap());
        let p = if name == "S3" { 3 } else { 2 };
        let res = build_resolution(&g, p, default_window(3), auto_backend(&g, p), &budget).unwrap();
        let engine = TateEngine::new(res);
        for x in class_reps(&g) {
            let sub = Subgroup::generated(&g, &[x]);
            let (h, _) = sub.as_group();
            let h = Arc::new(h);
            let ind = Arc::new(induce(&trivial_module(&h, p).unwrap(), &sub).unwrap());
            assert_eq!(ind.dim(), g.order() / h.order());
            let lhs: Vec<usize> = (-3..=3).map(|n| tate_cohomology(&engine, &ind, n).unwrap().dim()).collect();
            assert_eq!(lhs, tate_dims(&h, p, 3), "{name}, subgroup generated by {x}");
        }
    }
}
