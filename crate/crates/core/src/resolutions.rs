//! Complete resolutions of `k` over `kG`, cochain complexes and Tate cohomology.
//!
//! Every term `X_n` is a free `kG`-module of rank `r_n`. Its `k`-basis is indexed
//! by `s * |G| + h`, standing for `h · e_s`; group elements act by `h ↦ g h`.
//! Differentials are dense matrices on these expanded bases. Negative terms are
//! duals `X_{-n-1} = Hom_k(X_n, k)` with the dual basis, which carries the same
//! indexing and the same permutation action; their differentials are plain
//! transposes, and the splice `X_0 → X_{-1}` is `ε^T ε`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, RightCosets, Subgroup};
use crate::kgmodules::KGModule;
use crate::linalg::{check_prime, is_zero_vec, mul_mod, reduce, EchelonSpan, FpMatrix, LinearSolver, Subquotient};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Unnormalized bar resolution, spliced with its dual.
    Bar,
    /// Free resolution built from greedily chosen kernel generators, spliced with its dual.
    Reduced,
    /// Two-periodic resolution of a cyclic group whose order is divisible by `p`.
    Cyclic,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Bar => "bar",
            Backend::Reduced => "generic",
            Backend::Cyclic => "cyclic",
        })
    }
}

/// Limits on the size of resolution terms.
#[derive(Clone, Copy, Debug)]
pub struct SizeBudget {
    pub max_term_dim: usize,
    pub max_matrix_entries: usize,
}

impl Default for SizeBudget {
    fn default() -> Self {
        SizeBudget {
            max_term_dim: 20_000,
            max_matrix_entries: 30_000_000,
        }
    }
}

pub struct CompleteResolution {
    group: Arc<FiniteGroup>,
    p: u32,
    lo: i32,
    hi: i32,
    backend: Backend,
    ranks: Vec<usize>,
    diffs: Vec<Option<FpMatrix>>,
    augmentation: Vec<u32>,
    solvers: Vec<OnceLock<LinearSolver>>,
}

impl fmt::Debug for CompleteResolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CompleteResolution({}, p={}, [{}, {}], {}, ranks {:?})",
            self.group.name(),
            self.p,
            self.lo,
            self.hi,
            self.backend,
            self.ranks
        )
    }
}

/// The default degree window `[-(w+1), w+1]` for queries up to `|n| = w`.
pub fn default_window(w: i32) -> (i32, i32) {
    (-(w + 1), w + 1)
}

impl CompleteResolution {
    /// Splices a free resolution `d_1, ..., d_N` of `k` (with `X_0 = kG` and the
    /// augmentation summing coordinates) with its dual over the window `[lo, hi]`.
    fn splice(
        group: &Arc<FiniteGroup>,
        p: u32,
        backend: Backend,
        (lo, hi): (i32, i32),
        pos_ranks: &[usize],
        pos_diffs: Vec<FpMatrix>,
    ) -> Self {
        let n = group.order();
        let rank_of = |m: i32| -> usize {
            if m >= 0 {
                pos_ranks[m as usize]
            } else {
                pos_ranks[(-m - 1) as usize]
            }
        };
        let ranks: Vec<usize> = (lo..=hi).map(rank_of).collect();
        let augmentation = vec![1 % p; n];
        let eps = FpMatrix::from_columns(p, n, std::slice::from_ref(&augmentation)).transpose();
        let diffs: Vec<Option<FpMatrix>> = (lo..=hi)
            .map(|m| {
                if m == lo {
                    None
                } else if m >= 1 {
                    Some(pos_diffs[(m - 1) as usize].clone())
                } else if m == 0 {
                    Some(eps.transpose().mul(&eps))
                } else {
                    Some(pos_diffs[(-m - 1) as usize].transpose())
                }
            })
            .collect();
        let solvers = (lo..=hi).map(|_| OnceLock::new()).collect();
        CompleteResolution {
            group: group.clone(),
            p,
            lo,
            hi,
            backend,
            ranks,
            diffs,
            augmentation,
            solvers,
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn window(&self) -> (i32, i32) {
        (self.lo, self.hi)
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn contains_degree(&self, n: i32) -> bool {
        (self.lo..=self.hi).contains(&n)
    }

    fn check_degree(&self, n: i32) -> Result<usize> {
        if self.contains_degree(n) {
            Ok((n - self.lo) as usize)
        } else {
            Err(Error::Window {
                degree: n,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// `kG`-rank of `X_n`.
    pub fn rank(&self, n: i32) -> Result<usize> {
        Ok(self.ranks[self.check_degree(n)?])
    }

    /// `k`-dimension of `X_n`.
    pub fn dim(&self, n: i32) -> Result<usize> {
        Ok(self.rank(n)? * self.group.order())
    }

    /// `d_n : X_n → X_{n-1}`, defined for `lo < n ≤ hi`.
    pub fn differential(&self, n: i32) -> Result<&FpMatrix> {
        let i = self.check_degree(n)?;
        self.diffs[i].as_ref().ok_or(Error::Window {
            degree: n - 1,
            lo: self.lo,
            hi: self.hi,
        })
    }

    /// Cached solver for `d_n x = b`.
    pub fn solver(&self, n: i32) -> Result<&LinearSolver> {
        let d = self.differential(n)?;
        let i = self.check_degree(n)?;
        Ok(self.solvers[i].get_or_init(|| LinearSolver::new(d)))
    }

    /// Values of `ε` on the `k`-basis of `X_0`.
    pub fn augmentation(&self) -> &[u32] {
        &self.augmentation
    }

    /// Image of the basis index `s|G| + h` under `g`.
    #[inline]
    pub fn act_index(&self, g: usize, idx: usize) -> usize {
        let n = self.group.order();
        (idx / n) * n + self.group.mul(g, idx % n)
    }

    /// `g · v` for a vector of `X_n` (any degree; the action is the same permutation).
    pub fn act(&self, g: usize, v: &[u32]) -> Vec<u32> {
        let mut out = vec![0; v.len()];
        for (i, &x) in v.iter().enumerate() {
            if x != 0 {
                out[self.act_index(g, i)] = x;
            }
        }
        out
    }

    /// Checks `d_{n-1} d_n = 0`, exactness in the window interior and equivariance.
    pub fn verify(&self) -> Result<()> {
        for n in (self.lo + 2)..=self.hi {
            if !self.differential(n - 1)?.mul(self.differential(n)?).is_zero() {
                return Err(Error::Inconsistent(format!("d_{} d_{} != 0", n - 1, n)));
            }
        }
        for n in (self.lo + 1)..self.hi {
            let r = self.differential(n)?.rank() + self.differential(n + 1)?.rank();
            if r != self.dim(n)? {
                return Err(Error::Inconsistent(format!("not exact at degree {n}")));
            }
        }
        for n in (self.lo + 1)..=self.hi {
            let d = self.differential(n)?;
            for g in 0..self.group.order() {
                for c in 0..d.cols() {
                    let col = d.column(c);
                    if self.act(g, &col) != d.column(self.act_index(g, c)) {
                        return Err(Error::Inconsistent(format!("d_{n} is not equivariant")));
                    }
                }
            }
        }
        if self.contains_degree(1) && self.contains_degree(0) {
            let eps = FpMatrix::from_columns(self.p, self.augmentation.len(), std::slice::from_ref(&self.augmentation));
            if !eps.transpose().mul(self.differential(1)?).is_zero() {
                return Err(Error::Inconsistent("ε d_1 != 0".into()));
            }
        }
        Ok(())
    }
}

fn budget_check(budget: &SizeBudget, rows: usize, cols: usize) -> Result<()> {
    if rows.max(cols) > budget.max_term_dim || rows.saturating_mul(cols) > budget.max_matrix_entries {
        return Err(Error::SizeBudget(format!("a {rows} x {cols} differential exceeds the budget")));
    }
    Ok(())
}

fn required_top(lo: i32, hi: i32) -> usize {
    hi.max(-lo).max(1) as usize
}

fn check_window(lo: i32, hi: i32) -> Result<()> {
    if lo > -1 || hi < 1 {
        return Err(Error::Invalid(format!("window [{lo}, {hi}] must contain [-1, 1]")));
    }
    Ok(())
}

/// Expands kG-generator images into the dense matrix of the `kG`-linear map.
fn expand_generators(group: &FiniteGroup, p: u32, target_dim: usize, gens: &[Vec<u32>]) -> FpMatrix {
    let n = group.order();
    let mut m = FpMatrix::zeros(p, target_dim, gens.len() * n);
    for (t, v) in gens.iter().enumerate() {
        for h in 0..n {
            for (i, &x) in v.iter().enumerate() {
                if x != 0 {
                    m.set((i / n) * n + group.mul(h, i % n), t * n + h, x);
                }
            }
        }
    }
    m
}

/// The unnormalized bar resolution, spliced with its dual.
pub fn standard_complete_resolution(
    group: &Arc<FiniteGroup>,
    p: u32,
    window: (i32, i32),
    budget: &SizeBudget,
) -> Result<CompleteResolution> {
    check_prime(p)?;
    check_window(window.0, window.1)?;
    let n = group.order();
    let top = required_top(window.0, window.1);
    let mut ranks = vec![1usize];
    let mut diffs = Vec::new();
    for deg in 1..=top {
        let r = n.checked_pow(deg as u32).ok_or_else(|| Error::SizeBudget("bar rank overflow".into()))?;
        let rows = ranks[deg - 1] * n;
        budget_check(budget, rows, r * n)?;
        let gens: Vec<Vec<u32>> = (0..r).map(|t| bar_boundary(group, p, deg, t)).collect();
        diffs.push(expand_generators(group, p, rows, &gens));
        ranks.push(r);
    }
    Ok(CompleteResolution::splice(group, p, Backend::Bar, window, &ranks, diffs))
}

/// Digits of a bar tuple index, most significant first.
pub fn bar_tuple(n: usize, len: usize, mut t: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for i in (0..len).rev() {
        out[i] = t % n;
        t /= n;
    }
    out
}

pub fn bar_index(n: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &g| acc * n + g)
}

/// `d[g_1 | ... | g_m]` as a vector of `X_{m-1}` in the expanded basis.
fn bar_boundary(group: &FiniteGroup, p: u32, m: usize, t: usize) -> Vec<u32> {
    let n = group.order();
    let tup = bar_tuple(n, m, t);
    let mut v = vec![0u32; n.pow(m as u32 - 1) * n];
    let mut add = |tuple: &[usize], h: usize, sign: i64| {
        let i = bar_index(n, tuple) * n + h;
        v[i] = reduce(v[i] as i64 + sign, p);
    };
    add(&tup[1..], tup[0], 1);
    for i in 0..m - 1 {
        let mut merged = tup[..i].to_vec();
        merged.push(group.mul(tup[i], tup[i + 1]));
        merged.extend_from_slice(&tup[i + 2..]);
        add(&merged, 0, if (i + 1) % 2 == 0 { 1 } else { -1 });
    }
    add(&tup[..m - 1], 0, if m.is_multiple_of(2) { 1 } else { -1 });
    v
}

/// A free resolution whose generators are chosen greedily from each kernel,
/// spliced with its dual.
pub fn reduced_complete_resolution(
    group: &Arc<FiniteGroup>,
    p: u32,
    window: (i32, i32),
    budget: &SizeBudget,
) -> Result<CompleteResolution> {
    check_prime(p)?;
    check_window(window.0, window.1)?;
    let n = group.order();
    let top = required_top(window.0, window.1);
    let eps = FpMatrix::from_columns(p, n, &[vec![1 % p; n]]).transpose();
    let mut kernel = eps.kernel_basis();
    let mut ranks = vec![1usize];
    let mut diffs = Vec::new();
    for deg in 1..=top {
        let rows = ranks[deg - 1] * n;
        let gens = kernel_generators(group, p, rows, &kernel);
        budget_check(budget, rows, gens.len() * n)?;
        let d = expand_generators(group, p, rows, &gens);
        kernel = d.kernel_basis();
        ranks.push(gens.len());
        diffs.push(d);
    }
    Ok(CompleteResolution::splice(group, p, Backend::Reduced, window, &ranks, diffs))
}

fn orbit_span(group: &FiniteGroup, p: u32, dim: usize, vs: &[&Vec<u32>]) -> EchelonSpan {
    let mut span = EchelonSpan::new(p, dim);
    for v in vs {
        for g in 0..group.order() {
            span.insert(&act_vec(group, g, v));
        }
    }
    span
}

fn act_vec(group: &FiniteGroup, g: usize, v: &[u32]) -> Vec<u32> {
    let n = group.order();
    let mut out = vec![0; v.len()];
    for (i, &x) in v.iter().enumerate() {
        if x != 0 {
            out[(i / n) * n + group.mul(g, i % n)] = x;
        }
    }
    out
}

/// A generating set of the `kG`-submodule spanned by `kernel`: repeatedly add the
/// candidate with the largest new orbit span, then drop redundant generators
/// scanning from the last one.
fn kernel_generators(group: &FiniteGroup, p: u32, dim: usize, kernel: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let target = kernel.len();
    let mut chosen: Vec<Vec<u32>> = Vec::new();
    let mut span = EchelonSpan::new(p, dim);
    while span.dim() < target {
        let mut best: Option<(usize, EchelonSpan)> = None;
        for (i, v) in kernel.iter().enumerate() {
            if span.contains(v) {
                continue;
            }
            let mut s = span.clone();
            for g in 0..group.order() {
                s.insert(&act_vec(group, g, v));
            }
            if best.as_ref().is_none_or(|(_, b)| s.dim() > b.dim()) {
                best = Some((i, s));
            }
        }
        let (i, s) = best.expect("kernel vectors outside the span exist");
        chosen.push(kernel[i].clone());
        span = s;
    }
    let mut i = chosen.len();
    while i > 0 {
        i -= 1;
        let others: Vec<&Vec<u32>> = chosen.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).collect();
        if orbit_span(group, p, dim, &others).dim() == target {
            chosen.remove(i);
        }
    }
    chosen
}

/// The two-periodic resolution of a cyclic group with `p | |G|`: `d_n` is
/// right multiplication by `t - 1` for odd `n` and by the norm for even `n`.
pub fn cyclic_periodic_resolution(group: &Arc<FiniteGroup>, p: u32, window: (i32, i32)) -> Result<CompleteResolution> {
    check_prime(p)?;
    check_window(window.0, window.1)?;
    let n = group.order();
    let t = group
        .cyclic_generator()
        .ok_or_else(|| Error::Backend(format!("{} is not cyclic", group.name())))?;
    if !(n as u32).is_multiple_of(p) {
        return Err(Error::Backend(format!(
            "p = {p} does not divide |G| = {n}; all Tate cohomology vanishes"
        )));
    }
    let mut minus = vec![0u32; n];
    minus[t] = 1;
    minus[0] = p - 1;
    if t == 0 {
        minus[0] = 0;
    }
    let norm = vec![1 % p; n];
    let d_odd = expand_generators(group, p, n, &[minus]);
    let d_even = expand_generators(group, p, n, &[norm]);
    let (lo, hi) = window;
    let diffs = (lo..=hi)
        .map(|m| {
            if m == lo {
                None
            } else if m.rem_euclid(2) == 1 {
                Some(d_odd.clone())
            } else {
                Some(d_even.clone())
            }
        })
        .collect();
    Ok(CompleteResolution {
        group: group.clone(),
        p,
        lo,
        hi,
        backend: Backend::Cyclic,
        ranks: vec![1; (hi - lo + 1) as usize],
        diffs,
        augmentation: vec![1 % p; n],
        solvers: (lo..=hi).map(|_| OnceLock::new()).collect(),
    })
}

/// Picks the backend for `auto`: cyclic when the group is cyclic of order divisible by `p`.
pub fn auto_backend(group: &FiniteGroup, p: u32) -> Backend {
    if (group.order() as u32).is_multiple_of(p) && group.cyclic_generator().is_some() {
        Backend::Cyclic
    } else {
        Backend::Reduced
    }
}

pub fn build_resolution(
    group: &Arc<FiniteGroup>,
    p: u32,
    window: (i32, i32),
    backend: Backend,
    budget: &SizeBudget,
) -> Result<CompleteResolution> {
    match backend {
        Backend::Bar => standard_complete_resolution(group, p, window, budget),
        Backend::Reduced => reduced_complete_resolution(group, p, window, budget),
        Backend::Cyclic => cyclic_periodic_resolution(group, p, window),
    }
}

/// `Ĥ^n(V, M)` computed from a complete resolution of the ambient group.
///
/// Cochains `Hom_{kV}(X_n, M)` are stored by their values at the `kV`-basis
/// `c · e_t`, where `c` runs over right coset representatives of `V`. The
/// coordinate index is `(t * #cosets + c) * dim M + i`.
pub struct CohomologySpace {
    resolution: Arc<CompleteResolution>,
    sub: Subgroup,
    module: Arc<KGModule>,
    degree: i32,
    cosets: RightCosets,
    rank: usize,
    sq: Option<Subquotient>,
}

impl fmt::Debug for CohomologySpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Ĥ^{}({:?}, {}) dim {}",
            self.degree,
            self.sub,
            self.module.name(),
            self.dim()
        )
    }
}

impl CohomologySpace {
    pub fn resolution(&self) -> &Arc<CompleteResolution> {
        &self.resolution
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.sub
    }

    pub fn module(&self) -> &Arc<KGModule> {
        &self.module
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn p(&self) -> u32 {
        self.resolution.p()
    }

    pub fn dim(&self) -> usize {
        self.sq.as_ref().map_or(0, |s| s.dim())
    }

    pub fn cochain_dim(&self) -> usize {
        self.rank * self.cosets.reps.len() * self.module.dim()
    }

    pub fn cosets(&self) -> &RightCosets {
        &self.cosets
    }

    /// Representative cocycle of the `i`-th basis class.
    pub fn basis_rep(&self, i: usize) -> Vec<u32> {
        self.sq.as_ref().expect("nonzero space").reps()[i].clone()
    }

    /// Coordinates of the class of a cocycle.
    pub fn project(&self, cochain: &[u32]) -> Result<Vec<u32>> {
        match &self.sq {
            None => Ok(Vec::new()),
            Some(sq) => sq
                .project(cochain)
                .ok_or_else(|| Error::Inconsistent(format!("not a cocycle in degree {}", self.degree))),
        }
    }

    /// A representative cocycle with the given coordinates.
    pub fn lift(&self, coords: &[u32]) -> Vec<u32> {
        match &self.sq {
            None => vec![0; self.cochain_dim()],
            Some(sq) => sq.lift(coords, self.p()),
        }
    }

    pub fn class(self: &Arc<Self>, coords: Vec<u32>) -> CohomologyClass {
        assert_eq!(coords.len(), self.dim());
        let rep = self.lift(&coords);
        CohomologyClass {
            space: self.clone(),
            coords,
            rep,
        }
    }

    pub fn basis_class(self: &Arc<Self>, i: usize) -> CohomologyClass {
        let mut c = vec![0; self.dim()];
        c[i] = 1;
        self.class(c)
    }

    pub fn zero(self: &Arc<Self>) -> CohomologyClass {
        self.class(vec![0; self.dim()])
    }

    pub fn class_of(self: &Arc<Self>, cocycle: Vec<u32>) -> Result<CohomologyClass> {
        let coords = self.project(&cocycle)?;
        Ok(CohomologyClass {
            space: self.clone(),
            coords,
            rep: cocycle,
        })
    }

    /// Values of the cochain on every `k`-basis element `h e_s` of `X_n`,
    /// indexed `(s|G| + h) * dim M + i`.
    pub fn full_table(&self, cochain: &[u32]) -> Vec<u32> {
        let g = self.resolution.group();
        let n = g.order();
        let md = self.module.dim();
        let ncos = self.cosets.reps.len();
        let mut out = vec![0; self.rank * n * md];
        for s in 0..self.rank {
            for h in 0..n {
                let c = self.cosets.coset_of[h];
                let v = self.cosets.factor[h];
                let base = (s * ncos + c) * md;
                let val = self.module.act(v, &cochain[base..base + md]);
                out[(s * n + h) * md..(s * n + h + 1) * md].copy_from_slice(&val);
            }
        }
        out
    }

    /// Reads a `V`-equivariant value table back into cochain coordinates.
    pub fn from_full_table(&self, table: &[u32]) -> Vec<u32> {
        let n = self.resolution.group().order();
        let md = self.module.dim();
        let ncos = self.cosets.reps.len();
        let mut out = vec![0; self.cochain_dim()];
        for s in 0..self.rank {
            for (c, &rep) in self.cosets.reps.iter().enumerate() {
                let src = (s * n + rep) * md;
                out[(s * ncos + c) * md..(s * ncos + c + 1) * md].copy_from_slice(&table[src..src + md]);
            }
        }
        out
    }

    /// Value of the cochain at a vector of `X_n`.
    pub fn evaluate(&self, table: &[u32], x: &[u32]) -> Vec<u32> {
        let p = self.p();
        let md = self.module.dim();
        let mut out = vec![0u32; md];
        for (i, &c) in x.iter().enumerate() {
            if c != 0 {
                for (k, o) in out.iter_mut().enumerate() {
                    let v = table[i * md + k];
                    if v != 0 {
                        *o = ((*o as u64 + c as u64 * v as u64) % p as u64) as u32;
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CohomologyClass {
    pub space: Arc<CohomologySpace>,
    pub coords: Vec<u32>,
    pub rep: Vec<u32>,
}

impl CohomologyClass {
    pub fn degree(&self) -> i32 {
        self.space.degree()
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.coords)
    }

    /// Linear combination `a · self + b · other` in the same space.
    pub fn combine(&self, a: u32, other: &CohomologyClass, b: u32) -> CohomologyClass {
        assert!(Arc::ptr_eq(&self.space, &other.space), "classes live in different spaces");
        let p = self.space.p();
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&x, &y)| ((mul_mod(a, x, p) as u64 + mul_mod(b, y, p) as u64) % p as u64) as u32)
            .collect();
        let rep = self
            .rep
            .iter()
            .zip(&other.rep)
            .map(|(&x, &y)| ((mul_mod(a, x, p) as u64 + mul_mod(b, y, p) as u64) % p as u64) as u32)
            .collect();
        CohomologyClass {
            space: self.space.clone(),
            coords,
            rep,
        }
    }

    pub fn scale(&self, a: u32) -> CohomologyClass {
        self.combine(a, self, 0)
    }
}

type SpaceKey = (Vec<usize>, usize, i32);

/// Builds and caches cochain complexes and cohomology spaces over one resolution.
pub struct TateEngine {
    resolution: Arc<CompleteResolution>,
    spaces: Mutex<HashMap<SpaceKey, Arc<CohomologySpace>>>,
    coboundaries: Mutex<HashMap<SpaceKey, Arc<FpMatrix>>>,
}

impl fmt::Debug for TateEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TateEngine({:?})", self.resolution)
    }
}

fn module_key(m: &Arc<KGModule>) -> usize {
    Arc::as_ptr(m) as usize
}

impl TateEngine {
    pub fn new(resolution: CompleteResolution) -> Self {
        Self::from_arc(Arc::new(resolution))
    }

    pub fn from_arc(resolution: Arc<CompleteResolution>) -> Self {
        TateEngine {
            resolution,
            spaces: Mutex::new(HashMap::new()),
            coboundaries: Mutex::new(HashMap::new()),
        }
    }

    pub fn resolution(&self) -> &Arc<CompleteResolution> {
        &self.resolution
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.resolution.group()
    }

    pub fn p(&self) -> u32 {
        self.resolution.p()
    }

    /// Degrees `n` for which `Ĥ^n` is computable: both neighbours must exist.
    pub fn cohomology_window(&self) -> (i32, i32) {
        let (lo, hi) = self.resolution.window();
        (lo + 1, hi - 1)
    }

    fn check_module(&self, sub: &Subgroup, m: &KGModule) -> Result<()> {
        if !Arc::ptr_eq(sub.parent(), self.group()) {
            return Err(Error::NotSubgroup("subgroup of a different group".into()));
        }
        if !Arc::ptr_eq(m.group(), self.group()) || m.p() != self.p() {
            return Err(Error::InvalidModule("module over a different group algebra".into()));
        }
        Ok(())
    }

    /// Coboundary `δ^n : C^n(V, M) → C^{n+1}(V, M)`, `δ f = f ∘ d_{n+1}`.
    pub fn coboundary(&self, sub: &Subgroup, m: &Arc<KGModule>, n: i32) -> Result<Arc<FpMatrix>> {
        self.check_module(sub, m)?;
        let key = (sub.members().to_vec(), module_key(m), n);
        if let Some(d) = self.coboundaries.lock().expect("cache lock").get(&key) {
            return Ok(d.clone());
        }
        let res = &self.resolution;
        let d = res.differential(n + 1)?;
        let g = res.group();
        let gn = g.order();
        let cos = sub.right_cosets();
        let ncos = cos.reps.len();
        let md = m.dim();
        let (r_src, r_dst) = (res.rank(n)?, res.rank(n + 1)?);
        let p = res.p();
        let mut delta = FpMatrix::zeros(p, r_dst * ncos * md, r_src * ncos * md);
        for t in 0..r_dst {
            for (c, &rep) in cos.reps.iter().enumerate() {
                let col = d.column(t * gn + rep);
                let row0 = (t * ncos + c) * md;
                for (i, &coef) in col.iter().enumerate() {
                    if coef == 0 {
                        continue;
                    }
                    let (s, h) = (i / gn, i % gn);
                    let col0 = (s * ncos + cos.coset_of[h]) * md;
                    let rho = m.action(cos.factor[h]);
                    for a in 0..md {
                        for b in 0..md {
                            let v = rho.get(a, b);
                            if v != 0 {
                                delta.add_at(row0 + a, col0 + b, mul_mod(coef, v, p));
                            }
                        }
                    }
                }
            }
        }
        let delta = Arc::new(delta);
        self.coboundaries.lock().expect("cache lock").insert(key, delta.clone());
        Ok(delta)
    }

    /// `Ĥ^n(V, M)` for a subgroup `V` and a `G`-module `M` restricted to `V`.
    pub fn space(&self, sub: &Subgroup, m: &Arc<KGModule>, n: i32) -> Result<Arc<CohomologySpace>> {
        self.check_module(sub, m)?;
        let key = (sub.members().to_vec(), module_key(m), n);
        if let Some(s) = self.spaces.lock().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let res = &self.resolution;
        let (lo, hi) = self.cohomology_window();
        if n < lo || n > hi {
            return Err(Error::Window { degree: n, lo, hi });
        }
        let cosets = sub.right_cosets();
        let rank = res.rank(n)?;
        let dim = rank * cosets.reps.len() * m.dim();
        let sq = if !(sub.order() as u32).is_multiple_of(res.p()) {
            None
        } else {
            let next = self.coboundary(sub, m, n)?;
            let prev = self.coboundary(sub, m, n - 1)?;
            let z = next.kernel_basis();
            let b = prev.columns();
            Some(crate::linalg::subquotient_basis(res.p(), dim, &z, &b)?)
        };
        let space = Arc::new(CohomologySpace {
            resolution: res.clone(),
            sub: sub.clone(),
            module: m.clone(),
            degree: n,
            cosets,
            rank,
            sq,
        });
        self.spaces.lock().expect("cache lock").insert(key, space.clone());
        Ok(space)
    }

    /// Checks `δ^n δ^{n-1} = 0` on the cochain complex of `(V, M)`.
    pub fn check_cochain_complex(&self, sub: &Subgroup, m: &Arc<KGModule>, n: i32) -> Result<bool> {
        let a = self.coboundary(sub, m, n - 1)?;
        let b = self.coboundary(sub, m, n)?;
        Ok(b.mul(&a).is_zero())
    }
}

/// `dim Ĥ^n(G, M)` over the whole group.
pub fn tate_cohomology(engine: &TateEngine, m: &Arc<KGModule>, n: i32) -> Result<Arc<CohomologySpace>> {
    engine.space(&Subgroup::whole(engine.group()), m, n)
}

/// Normalized bar cochains: functions on `(G \ {1})^n` with values in `M`,
/// indexed `tuple * dim M + i` with tuples over the nonidentity elements.
fn normalized_coboundary(group: &FiniteGroup, m: &KGModule, n: usize) -> FpMatrix {
    let q = group.order() - 1;
    let md = m.dim();
    let p = m.p();
    let src = q.pow(n as u32);
    let dst = q.pow(n as u32 + 1);
    let mut delta = FpMatrix::zeros(p, dst * md, src * md);
    let enc = |tuple: &[usize]| -> Option<usize> {
        tuple.iter().try_fold(0usize, |acc, &g| if g == 0 { None } else { Some(acc * q + g - 1) })
    };
    for t in 0..dst {
        let tup: Vec<usize> = bar_tuple(q, n + 1, t).into_iter().map(|x| x + 1).collect();
        let row0 = t * md;
        // g_1 f(g_2, ..., g_{n+1})
        if let Some(s) = enc(&tup[1..]) {
            let rho = m.action(tup[0]);
            for a in 0..md {
                for b in 0..md {
                    delta.add_at(row0 + a, s * md + b, rho.get(a, b));
                }
            }
        }
        for i in 0..n {
            let mut merged = tup[..i].to_vec();
            merged.push(group.mul(tup[i], tup[i + 1]));
            merged.extend_from_slice(&tup[i + 2..]);
            if let Some(s) = enc(&merged) {
                let sign = if (i + 1) % 2 == 0 { 1 } else { p - 1 };
                for a in 0..md {
                    delta.add_at(row0 + a, s * md + a, sign);
                }
            }
        }
        if let Some(s) = enc(&tup[..n]) {
            let sign = if (n + 1).is_multiple_of(2) { 1 } else { p - 1 };
            for a in 0..md {
                delta.add_at(row0 + a, s * md + a, sign);
            }
        }
    }
    delta
}

/// Normalized bar chains of `M ⊗_{kG} B`, with `M` made a right module by `m · g = g^{-1} m`.
fn normalized_boundary(group: &FiniteGroup, m: &KGModule, n: usize) -> FpMatrix {
    let q = group.order() - 1;
    let md = m.dim();
    let p = m.p();
    let src = q.pow(n as u32);
    let dst = q.pow(n as u32 - 1);
    let mut del = FpMatrix::zeros(p, dst * md, src * md);
    let enc = |tuple: &[usize]| -> Option<usize> {
        tuple.iter().try_fold(0usize, |acc, &g| if g == 0 { None } else { Some(acc * q + g - 1) })
    };
    for t in 0..src {
        let tup: Vec<usize> = bar_tuple(q, n, t).into_iter().map(|x| x + 1).collect();
        let col0 = t * md;
        if let Some(s) = enc(&tup[1..]) {
            let rho = m.action(group.inv(tup[0]));
            for a in 0..md {
                for b in 0..md {
                    del.add_at(s * md + a, col0 + b, rho.get(a, b));
                }
            }
        }
        for i in 0..n - 1 {
            let mut merged = tup[..i].to_vec();
            merged.push(group.mul(tup[i], tup[i + 1]));
            merged.extend_from_slice(&tup[i + 2..]);
            if let Some(s) = enc(&merged) {
                let sign = if (i + 1) % 2 == 0 { 1 } else { p - 1 };
                for a in 0..md {
                    del.add_at(s * md + a, col0 + a, sign);
                }
            }
        }
        if let Some(s) = enc(&tup[..n - 1]) {
            let sign = if n.is_multiple_of(2) { 1 } else { p - 1 };
            for a in 0..md {
                del.add_at(s * md + a, col0 + a, sign);
            }
        }
    }
    del
}

fn chain_size_check(group: &FiniteGroup, m: &KGModule, top: usize, budget: &SizeBudget) -> Result<()> {
    let q = group.order().saturating_sub(1);
    let dim = q.checked_pow(top as u32).and_then(|x| x.checked_mul(m.dim()));
    match dim {
        Some(d) if d <= budget.max_term_dim => Ok(()),
        _ => Err(Error::SizeBudget(format!("bar cochains in degree {top} are too large"))),
    }
}

/// `dim H^n(G, M)` from the normalized bar complex.
pub fn ordinary_cohomology(m: &KGModule, n: usize, budget: &SizeBudget) -> Result<usize> {
    let group = m.group();
    chain_size_check(group, m, n + 1, budget)?;
    let next = normalized_coboundary(group, m, n);
    let ker = next.cols() - next.rank();
    let im = if n == 0 { 0 } else { normalized_coboundary(group, m, n - 1).rank() };
    Ok(ker - im)
}

/// `dim H_n(G, M)` from the normalized bar complex.
pub fn ordinary_homology(m: &KGModule, n: usize, budget: &SizeBudget) -> Result<usize> {
    let group = m.group();
    chain_size_check(group, m, n + 1, budget)?;
    let q = group.order() - 1;
    let chains = q.pow(n as u32) * m.dim();
    let ker = if n == 0 { chains } else { chains - normalized_boundary(group, m, n).rank() };
    let im = normalized_boundary(group, m, n + 1).rank();
    Ok(ker - im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{cyclic, klein_four, symmetric3};
    use crate::kgmodules::{conjugation_module, trivial_module};

    fn s3() -> Arc<FiniteGroup> {
        Arc::new(symmetric3())
    }

    fn dims(engine: &TateEngine, m: &Arc<KGModule>, sub: &Subgroup, range: std::ops::RangeInclusive<i32>) -> Vec<usize> {
        range.map(|n| engine.space(sub, m, n).unwrap().dim()).collect()
    }

    #[test]
    fn bar_ranks_and_exactness() {
        let g = s3();
        let res = standard_complete_resolution(&g, 3, (-3, 3), &SizeBudget::default()).unwrap();
        assert_eq!(res.rank(2).unwrap(), 36);
        assert_eq!(res.rank(-3).unwrap(), 36);
        assert_eq!(res.differential(1).unwrap().rank() + res.differential(2).unwrap().rank(), 36);
        res.verify().unwrap();
        assert!(res.differential(0).unwrap().mul(res.differential(1).unwrap()).is_zero());
        assert!(res.differential(-1).unwrap().mul(res.differential(0).unwrap()).is_zero());
    }

    #[test]
    fn bar_budget() {
        let g = s3();
        let tiny = SizeBudget {
            max_term_dim: 100,
            max_matrix_entries: 10_000,
        };
        assert!(matches!(
            standard_complete_resolution(&g, 3, (-4, 4), &tiny),
            Err(Error::SizeBudget(_))
        ));
        assert!(standard_complete_resolution(&g, 3, (0, 3), &tiny).is_err());
    }

    #[test]
    fn reduced_resolution_is_exact() {
        for (grp, p) in [(s3(), 3), (s3(), 2), (Arc::new(klein_four()), 2), (Arc::new(cyclic(4)), 2)] {
            let res = reduced_complete_resolution(&grp, p, (-6, 6), &SizeBudget::default()).unwrap();
            res.verify().unwrap();
        }
    }

    #[test]
    fn cyclic_resolution() {
        let c3 = Arc::new(cyclic(3));
        let res = cyclic_periodic_resolution(&c3, 3, (-5, 5)).unwrap();
        res.verify().unwrap();
        // norm * (t - 1) = 0
        assert!(res.differential(2).unwrap().mul(res.differential(1).unwrap()).is_zero());
        let engine = TateEngine::new(res);
        let k = Arc::new(trivial_module(&c3, 3).unwrap());
        assert_eq!(dims(&engine, &k, &Subgroup::whole(&c3), -4..=4), vec![1; 9]);
        assert!(cyclic_periodic_resolution(&c3, 2, (-2, 2)).is_err());
        assert!(cyclic_periodic_resolution(&s3(), 3, (-2, 2)).is_err());
    }

    #[test]
    fn c2_periodic_cohomology_direct() {
        // Over F_2 both t - 1 and the norm are t + 1, of rank 1 on kC_2,
        // so every kernel and image is one-dimensional.
        let c2 = Arc::new(cyclic(2));
        let res = cyclic_periodic_resolution(&c2, 2, (-4, 4)).unwrap();
        for n in -3..=4 {
            assert_eq!(res.differential(n).unwrap().rank(), 1);
        }
        let engine = TateEngine::new(res);
        let k = Arc::new(trivial_module(&c2, 2).unwrap());
        assert_eq!(dims(&engine, &k, &Subgroup::whole(&c2), -3..=3), vec![1; 7]);
    }

    #[test]
    fn s3_trivial_coefficients() {
        let g = s3();
        let res = reduced_complete_resolution(&g, 3, (-7, 7), &SizeBudget::default()).unwrap();
        let engine = TateEngine::new(res);
        let k = Arc::new(trivial_module(&g, 3).unwrap());
        let whole = Subgroup::whole(&g);
        assert_eq!(dims(&engine, &k, &whole, -4..=4), vec![1, 0, 0, 1, 1, 0, 0, 1, 1]);
        let n = Subgroup::generated(&g, &[1]);
        assert_eq!(dims(&engine, &k, &n, -6..=6), vec![1; 13]);
        let h3 = Subgroup::generated(&g, &[2]);
        assert_eq!(dims(&engine, &k, &h3, -6..=6), vec![0; 13]);
        for deg in -5..=5 {
            assert!(engine.check_cochain_complex(&whole, &k, deg).unwrap());
        }
    }

    #[test]
    fn backends_agree_on_dimensions() {
        let g = s3();
        let k = Arc::new(trivial_module(&g, 3).unwrap());
        let bar = TateEngine::new(standard_complete_resolution(&g, 3, (-3, 3), &SizeBudget::default()).unwrap());
        let red = TateEngine::new(reduced_complete_resolution(&g, 3, (-3, 3), &SizeBudget::default()).unwrap());
        let w = Subgroup::whole(&g);
        assert_eq!(dims(&bar, &k, &w, -2..=2), dims(&red, &k, &w, -2..=2));
        let kc = Arc::new(conjugation_module(&g, 3).unwrap());
        let kc2 = kc.clone();
        assert_eq!(dims(&bar, &kc, &w, -2..=2), dims(&red, &kc2, &w, -2..=2));

        let c3 = Arc::new(cyclic(3));
        let k3 = Arc::new(trivial_module(&c3, 3).unwrap());
        let w3 = Subgroup::whole(&c3);
        let bar = TateEngine::new(standard_complete_resolution(&c3, 3, (-4, 4), &SizeBudget::default()).unwrap());
        let cyc = TateEngine::new(cyclic_periodic_resolution(&c3, 3, (-4, 4)).unwrap());
        assert_eq!(dims(&bar, &k3, &w3, -3..=3), dims(&cyc, &k3, &w3, -3..=3));
    }

    #[test]
    fn ordinary_groups() {
        let g = s3();
        let k = trivial_module(&g, 3).unwrap();
        let b = SizeBudget::default();
        assert_eq!(ordinary_cohomology(&k, 0, &b).unwrap(), 1);
        assert_eq!(ordinary_cohomology(&k, 1, &b).unwrap(), 0);
        assert_eq!(ordinary_cohomology(&k, 3, &b).unwrap(), 1);
        assert_eq!(ordinary_homology(&k, 0, &b).unwrap(), 1);
        assert_eq!(ordinary_homology(&k, 3, &b).unwrap(), 1);
        let c3 = Arc::new(cyclic(3));
        let k3 = trivial_module(&c3, 3).unwrap();
        assert_eq!(ordinary_homology(&k3, 1, &b).unwrap(), 1);
        assert_eq!(ordinary_cohomology(&k3, 2, &b).unwrap(), 1);
    }

    #[test]
    fn coboundaries_project_to_zero() {
        let g = s3();
        let engine = TateEngine::new(reduced_complete_resolution(&g, 3, (-4, 4), &SizeBudget::default()).unwrap());
        let m = Arc::new(conjugation_module(&g, 3).unwrap());
        let n = Subgroup::generated(&g, &[1]);
        for deg in -2..=2 {
            let sp = engine.space(&n, &m, deg).unwrap();
            let prev = engine.coboundary(&n, &m, deg - 1).unwrap();
            for col in prev.columns() {
                assert!(is_zero_vec(&sp.project(&col).unwrap()));
            }
            for i in 0..sp.dim() {
                let mut e = vec![0; sp.dim()];
                e[i] = 1;
                assert_eq!(sp.project(&sp.basis_rep(i)).unwrap(), e);
                let t = sp.full_table(&sp.basis_rep(i));
                assert_eq!(sp.from_full_table(&t), sp.basis_rep(i));
            }
        }
    }

    #[test]
    fn window_errors() {
        let g = s3();
        let engine = TateEngine::new(reduced_complete_resolution(&g, 3, (-3, 3), &SizeBudget::default()).unwrap());
        let k = Arc::new(trivial_module(&g, 3).unwrap());
        assert!(matches!(tate_cohomology(&engine, &k, 3), Err(Error::Window { .. })));
        assert!(tate_cohomology(&engine, &k, 2).is_ok());
    }
}
