use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use tatehh::decomp::{DecompositionContext, RingElement};
use tatehh::groups::{all_subgroups, builtin, double_coset_reps, symmetric3, Subgroup};
use tatehh::linalg::{subquotient_basis, EchelonSpan, FpMatrix};
use tatehh::resolutions::SizeBudget;

fn matrix(p: u32, rows: usize, cols: usize) -> impl Strategy<Value = FpMatrix> {
    prop::collection::vec(0..p as i64, rows * cols)
        .prop_map(move |v| FpMatrix::from_rows(p, &v.chunks(cols).map(|r| r.to_vec()).collect::<Vec<_>>()))
}

fn count_kernel(a: &FpMatrix) -> usize {
    let (p, n) = (a.p() as usize, a.cols());
    (0..p.pow(n as u32))
        .filter(|&code| {
            let v: Vec<u32> = (0..n).map(|i| ((code / p.pow(i as u32)) % p) as u32).collect();
            a.mul_vec(&v).iter().all(|&x| x == 0)
        })
        .count()
}

proptest! {
    #[test]
    fn solve_round_trip(a in matrix(5, 4, 6), x0 in prop::collection::vec(0u32..5, 6)) {
        let b = a.mul_vec(&x0);
        let x = a.solve(&b).expect("consistent system");
        prop_assert_eq!(a.mul_vec(&x), b);
    }

    #[test]
    fn rank_of_transpose(a in matrix(3, 5, 4)) {
        prop_assert_eq!(a.rank(), a.transpose().rank());
    }

    #[test]
    fn rank_nullity(a in matrix(7, 4, 6)) {
        let ker = a.kernel_basis();
        prop_assert_eq!(a.rank() + ker.len(), a.cols());
        for v in &ker {
            prop_assert!(a.mul_vec(v).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn kernel_size_by_enumeration(a in matrix(3, 3, 4)) {
        prop_assert_eq!(count_kernel(&a), 3usize.pow(a.kernel_basis().len() as u32));
    }

    #[test]
    fn product_rank_bound(a in matrix(2, 4, 5), b in matrix(2, 5, 3)) {
        prop_assert!(a.mul(&b).rank() <= a.rank().min(b.rank()));
    }

    #[test]
    fn subquotient_dimension(z in matrix(3, 4, 6), pick in matrix(3, 4, 2)) {
        // B is spanned by combinations of the columns of Z, so B ⊆ Z.
        let zc = z.transpose().columns();
        let bm = z.transpose().mul(&pick);
        let q = subquotient_basis(3, 6, &zc, &bm.columns()).unwrap();
        prop_assert_eq!(q.dim(), z.rank() - bm.rank());
        for v in bm.columns() {
            prop_assert!(q.is_boundary(&v));
        }
    }

    #[test]
    fn echelon_span_tracks_rank(a in matrix(5, 6, 4)) {
        let mut span = EchelonSpan::new(5, 4);
        for r in 0..a.rows() {
            span.insert(a.row(r));
        }
        prop_assert_eq!(span.dim(), a.rank());
    }

    #[test]
    fn group_axioms(name in prop::sample::select(vec!["S3", "D4", "Q8", "C2xC2", "C6"]), a in 0usize..8, b in 0usize..8, c in 0usize..8) {
        let g = builtin(name).unwrap();
        let n = g.order();
        let (a, b, c) = (a % n, b % n, c % n);
        prop_assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
        prop_assert_eq!(g.mul(a, g.inv(a)), g.identity());
        prop_assert_eq!(g.conj(a, g.conj(b, c)), g.conj(g.mul(a, b), c));
    }

    #[test]
    fn double_cosets_partition(name in prop::sample::select(vec!["S3", "D4", "Q8"]), i in 0usize..16, j in 0usize..16) {
        let g = Arc::new(builtin(name).unwrap());
        let subs = all_subgroups(&g);
        let (h, k) = (&subs[i % subs.len()], &subs[j % subs.len()]);
        let mut seen = vec![0u32; g.order()];
        for x in double_coset_reps(h, k) {
            let mut cell: Vec<usize> = h.members().iter().flat_map(|&a| k.members().iter().map(move |&b| (a, b)))
                .map(|(a, b)| g.mul(g.mul(a, x), b)).collect();
            cell.sort_unstable();
            cell.dedup();
            for y in cell {
                seen[y] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }
}

fn s3_context() -> &'static DecompositionContext {
    static CTX: OnceLock<DecompositionContext> = OnceLock::new();
    CTX.get_or_init(|| {
        DecompositionContext::for_group(&Arc::new(symmetric3()), 3, 4, None, &SizeBudget::default()).unwrap()
    })
}

fn element(degree: i32, seed: Vec<u32>) -> RingElement {
    let dim = s3_context().total_dim(degree).unwrap();
    RingElement {
        degree,
        coords: (0..dim).map(|i| seed[i % seed.len()] % 3).collect(),
    }
}

fn ring_element(range: std::ops::RangeInclusive<i32>) -> impl Strategy<Value = RingElement> {
    (range, prop::collection::vec(0u32..3, 1..5)).prop_map(|(n, seed)| element(n, seed))
}

fn negate(x: &mut RingElement) {
    x.coords.iter_mut().for_each(|c| *c = (3 - *c) % 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn formula_product_equals_direct(x in ring_element(-2..=2), y in ring_element(-2..=2)) {
        let ctx = s3_context();
        prop_assert_eq!(ctx.multiply(&x, &y).unwrap(), ctx.oracle_multiply(&x, &y).unwrap());
    }

    #[test]
    fn graded_commutative(x in ring_element(-2..=2), y in ring_element(-2..=2)) {
        let ctx = s3_context();
        let xy = ctx.multiply(&x, &y).unwrap();
        let mut yx = ctx.multiply(&y, &x).unwrap();
        if (x.degree * y.degree) % 2 != 0 {
            negate(&mut yx);
        }
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn associative(x in ring_element(-1..=1), y in ring_element(-1..=1), z in ring_element(-1..=1)) {
        let ctx = s3_context();
        let left = ctx.multiply(&ctx.multiply(&x, &y).unwrap(), &z).unwrap();
        let right = ctx.multiply(&x, &ctx.multiply(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn unit_is_neutral(x in ring_element(-4..=4)) {
        let ctx = s3_context();
        let one = ctx.unit().unwrap();
        prop_assert_eq!(&ctx.multiply(&one, &x).unwrap(), &x);
        prop_assert_eq!(&ctx.multiply(&x, &one).unwrap(), &x);
    }

    #[test]
    fn decompose_inverts_assemble(x in ring_element(-4..=4)) {
        let ctx = s3_context();
        let zeta = ctx.assemble_element(&x).unwrap();
        prop_assert_eq!(ctx.decompose_element(&zeta).unwrap(), x);
    }

    #[test]
    fn restriction_lands_in_fixed_points(n in -4i32..=4, seed in prop::collection::vec(0u32..3, 1..4)) {
        let ctx = s3_context();
        let g = ctx.acting_group();
        let whole = Subgroup::whole(g);
        let rot = Subgroup::new(g, &[0, 1, 3]).unwrap();
        let k = ctx.trivial();
        let space = ctx.tate().space(&whole, k, n).unwrap();
        let coords: Vec<u32> = (0..space.dim()).map(|i| seed[i % seed.len()]).collect();
        let class = space.class(coords);
        let r = ctx.maps().res(&whole, &rot, k, n).unwrap().apply(&class);
        let c = ctx.maps().conj(2, &rot, k, n).unwrap().apply(&r);
        prop_assert_eq!(c.coords, r.coords);
    }
}
