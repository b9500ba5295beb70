//! Cup products on Tate cohomology.
//!
//! The main route lifts a cocycle `g ∈ Hom_V(X_j, N)` to a `V`-chain map
//! `G_m : X_{m+j} → Y_m ⊗ N` (diagonal action on the tensor product) with
//! `(ε ⊗ 1) G_0 = g`, extending upward by solving against `d ⊗ 1` and downward
//! by solving `G_{m-1} d = (d ⊗ 1) G_m`, which is possible because free `kV`-modules
//! are injective. The product of `f ∈ Hom_V(X_i, M)` with `g` is
//! `(-1)^{ij} μ (f ⊗ 1) G_i`.
//!
//! Explicit diagonal approximations (Alexander–Whitney on the bar resolution and
//! the standard formulas on the periodic resolution of a cyclic group) give an
//! independent route used for cross-checks.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::groups::{RightCosets, Subgroup};
use crate::kgmodules::{KGModule, ModulePairing};
use crate::linalg::{add_mod, mul_mod, neg_mod, FpMatrix};
use crate::resolutions::{bar_index, bar_tuple, Backend, CohomologyClass, CompleteResolution, TateEngine};

/// A `V`-chain map `G_m : X_{m+shift} → Y_m ⊗ N`, extended lazily in both directions.
pub struct ChainLift {
    src: Arc<CompleteResolution>,
    dst: Arc<CompleteResolution>,
    cosets: RightCosets,
    module: Arc<KGModule>,
    shift: i32,
    maps: BTreeMap<i32, FpMatrix>,
}

impl ChainLift {
    /// Starts the lift of a cocycle given by its value table on `X_shift`
    /// (indexed `basis * dim N + i`).
    pub fn new(
        src: &Arc<CompleteResolution>,
        dst: &Arc<CompleteResolution>,
        sub: &Subgroup,
        module: &Arc<KGModule>,
        shift: i32,
        table: &[u32],
    ) -> Result<Self> {
        if !Arc::ptr_eq(src.group(), dst.group()) || src.p() != dst.p() {
            return Err(Error::Invalid("resolutions over different group algebras".into()));
        }
        if dst.rank(0)? != 1 {
            return Err(Error::Invalid("target resolution must start with X_0 = kG".into()));
        }
        let cosets = sub.right_cosets();
        let nd = module.dim();
        let gn = src.group().order();
        let src_dim = src.dim(shift)?;
        let d0 = dst.dim(0)?;
        let mut g0 = FpMatrix::zeros(src.p(), d0 * nd, src_dim);
        for col in 0..src_dim {
            // h e_t with h = v c goes to v e_1 ⊗ g(h e_t)
            let v = cosets.factor[col % gn];
            for a in 0..nd {
                g0.set(v * nd + a, col, table[col * nd + a]);
            }
        }
        let mut maps = BTreeMap::new();
        maps.insert(0, g0);
        Ok(ChainLift {
            src: src.clone(),
            dst: dst.clone(),
            cosets,
            module: module.clone(),
            shift,
            maps,
        })
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    /// Diagonal action of `v` on a vector of `Y_m ⊗ N`.
    fn act_tensor(&self, v: usize, y: &[u32]) -> Vec<u32> {
        let nd = self.module.dim();
        let p = self.dst.p();
        let rho = self.module.action(v);
        let mut out = vec![0u32; y.len()];
        for x in 0..y.len() / nd {
            let block = &y[x * nd..(x + 1) * nd];
            if block.iter().all(|&c| c == 0) {
                continue;
            }
            let xi = self.dst.act_index(v, x);
            for b in 0..nd {
                let mut acc = 0u64;
                for (a, &c) in block.iter().enumerate() {
                    acc += rho.get(b, a) as u64 * c as u64;
                }
                out[xi * nd + b] = (acc % p as u64) as u32;
            }
        }
        out
    }

    /// Expands values on the `kV`-basis `c e_t` (ordered `t * #cosets + c`) to a full matrix.
    fn expand(&self, rows: usize, src_rank: usize, values: &[Vec<u32>]) -> FpMatrix {
        let gn = self.src.group().order();
        let ncos = self.cosets.reps.len();
        let mut m = FpMatrix::zeros(self.dst.p(), rows, src_rank * gn);
        for t in 0..src_rank {
            for h in 0..gn {
                let c = self.cosets.coset_of[h];
                let v = self.cosets.factor[h];
                let col = self.act_tensor(v, &values[t * ncos + c]);
                for (r, &x) in col.iter().enumerate() {
                    if x != 0 {
                        m.set(r, t * gn + h, x);
                    }
                }
            }
        }
        m
    }

    /// `G_m`, computing intermediate steps as needed.
    pub fn get(&mut self, m: i32) -> Result<&FpMatrix> {
        if m > 0 {
            let mut top = *self.maps.keys().next_back().expect("G_0 exists");
            while top < m {
                self.step_up(top + 1)?;
                top += 1;
            }
        } else {
            let mut bottom = *self.maps.keys().next().expect("G_0 exists");
            while bottom > m {
                self.step_down(bottom - 1)?;
                bottom -= 1;
            }
        }
        Ok(&self.maps[&m])
    }

    /// Solves `(d_m ⊗ 1) G_m = G_{m-1} d_{m+shift}` on generators.
    fn step_up(&mut self, m: i32) -> Result<()> {
        let nd = self.module.dim();
        let d_src = self.src.differential(m + self.shift)?;
        let solver = self.dst.solver(m)?;
        let prev = &self.maps[&(m - 1)];
        let rank = self.src.rank(m + self.shift)?;
        let gn = self.src.group().order();
        let dim_m = self.dst.dim(m)?;
        let dim_prev = self.dst.dim(m - 1)?;
        let mut values = Vec::with_capacity(rank * self.cosets.reps.len());
        for t in 0..rank {
            for &c in &self.cosets.reps {
                let rhs = prev.mul_vec(&d_src.column(t * gn + c));
                let mut y = vec![0u32; dim_m * nd];
                for a in 0..nd {
                    let col: Vec<u32> = (0..dim_prev).map(|x| rhs[x * nd + a]).collect();
                    let sol = solver.solve(&col).ok_or_else(|| {
                        Error::Inconsistent(format!("upward lift to degree {m} has no solution"))
                    })?;
                    for (x, v) in sol.into_iter().enumerate() {
                        y[x * nd + a] = v;
                    }
                }
                values.push(y);
            }
        }
        let full = self.expand(dim_m * nd, rank, &values);
        self.maps.insert(m, full);
        Ok(())
    }

    /// Solves `G_{m} d_{m+1+shift} = (d_{m+1} ⊗ 1) G_{m+1}` for the `kV`-generator values of `G_m`.
    fn step_down(&mut self, m: i32) -> Result<()> {
        let p = self.dst.p();
        let nd = self.module.dim();
        let gn = self.src.group().order();
        let ncos = self.cosets.reps.len();
        let d_src = self.src.differential(m + 1 + self.shift)?;
        let d_dst = self.dst.differential(m + 1)?;
        let upper = &self.maps[&(m + 1)];
        let big_d = self.dst.dim(m)? * nd;
        // R = (d ⊗ 1) G_{m+1}, only needed on generators of X_{m+1+shift}.
        let kron = d_dst.kron(&FpMatrix::identity(p, nd));
        let rank_hi = self.src.rank(m + 1 + self.shift)?;
        let rank_lo = self.src.rank(m + self.shift)?;
        let unknowns = rank_lo * ncos;
        let equations = rank_hi * ncos;
        let mut a = FpMatrix::zeros(p, equations * big_d, unknowns * big_d);
        let mut b = vec![0u32; equations * big_d];
        // Diagonal action matrices, built once per element of V.
        let mut action_cache: HashMap<usize, FpMatrix> = HashMap::new();
        for t in 0..rank_hi {
            for (ci, &c) in self.cosets.reps.iter().enumerate() {
                let eq = t * ncos + ci;
                let rhs = kron.mul_vec(&upper.column(t * gn + c));
                b[eq * big_d..(eq + 1) * big_d].copy_from_slice(&rhs);
                for (idx, coef) in d_src.column(t * gn + c).into_iter().enumerate() {
                    if coef == 0 {
                        continue;
                    }
                    let (s, h) = (idx / gn, idx % gn);
                    let unk = s * ncos + self.cosets.coset_of[h];
                    let v = self.cosets.factor[h];
                    let act = action_cache.entry(v).or_insert_with(|| {
                        let cols: Vec<Vec<u32>> = (0..big_d)
                            .map(|i| {
                                let mut e = vec![0u32; big_d];
                                e[i] = 1;
                                self.act_tensor(v, &e)
                            })
                            .collect();
                        FpMatrix::from_columns(p, big_d, &cols)
                    });
                    for r in 0..big_d {
                        for q in 0..big_d {
                            let x = act.get(r, q);
                            if x != 0 {
                                a.add_at(eq * big_d + r, unk * big_d + q, mul_mod(coef, x, p));
                            }
                        }
                    }
                }
            }
        }
        let sol = a
            .solve(&b)
            .ok_or_else(|| Error::Inconsistent(format!("downward lift to degree {m} has no solution")))?;
        let values: Vec<Vec<u32>> = (0..unknowns).map(|u| sol[u * big_d..(u + 1) * big_d].to_vec()).collect();
        let full = self.expand(big_d, rank_lo, &values);
        self.maps.insert(m, full);
        Ok(())
    }
}

type LiftKey = (Vec<usize>, usize, i32, usize);

/// Cup products over a single resolution, with lifts memoized per basis class.
pub struct CupEngine {
    tate: Arc<TateEngine>,
    lifts: Mutex<HashMap<LiftKey, Arc<Mutex<ChainLift>>>>,
}

impl CupEngine {
    pub fn new(tate: Arc<TateEngine>) -> Self {
        CupEngine {
            tate,
            lifts: Mutex::new(HashMap::new()),
        }
    }

    pub fn tate(&self) -> &Arc<TateEngine> {
        &self.tate
    }

    fn basis_lift(&self, sub: &Subgroup, n_mod: &Arc<KGModule>, j: i32, b: usize) -> Result<Arc<Mutex<ChainLift>>> {
        let key = (sub.members().to_vec(), Arc::as_ptr(n_mod) as usize, j, b);
        if let Some(l) = self.lifts.lock().expect("cache lock").get(&key) {
            return Ok(l.clone());
        }
        let space = self.tate.space(sub, n_mod, j)?;
        let table = space.full_table(&space.basis_rep(b));
        let res = self.tate.resolution();
        let lift = Arc::new(Mutex::new(ChainLift::new(res, res, sub, n_mod, j, &table)?));
        self.lifts.lock().expect("cache lock").insert(key, lift.clone());
        Ok(lift)
    }

    /// `α ⌣ β` composed with the pairing `M ⊗ N → L`.
    pub fn cup(&self, alpha: &CohomologyClass, beta: &CohomologyClass, pair: &ModulePairing) -> Result<CohomologyClass> {
        let (sa, sb) = (&alpha.space, &beta.space);
        if sa.subgroup() != sb.subgroup() {
            return Err(Error::Invalid("cup of classes over different subgroups".into()));
        }
        if !Arc::ptr_eq(sa.resolution(), self.tate.resolution()) || !Arc::ptr_eq(sb.resolution(), self.tate.resolution()) {
            return Err(Error::Invalid("classes come from a different resolution".into()));
        }
        if !Arc::ptr_eq(sa.module(), &pair.left) || !Arc::ptr_eq(sb.module(), &pair.right) {
            return Err(Error::InvalidModule("pairing does not match the coefficient modules".into()));
        }
        let sub = sa.subgroup();
        let (i, j) = (sa.degree(), sb.degree());
        let target = self.tate.space(sub, &pair.out, i + j)?;
        let p = self.tate.p();
        let mut total = vec![0u32; target.cochain_dim()];
        if target.dim() == 0 || alpha.is_zero() || beta.is_zero() {
            return Ok(target.zero());
        }
        let f_table = sa.full_table(&alpha.rep);
        for (b, &coef) in beta.coords.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            let lift = self.basis_lift(sub, sb.module(), j, b)?;
            let mut lift = lift.lock().expect("lift lock");
            let gi = lift.get(i)?;
            let part = pair_through(&target, gi, &f_table, pair, sa.module().dim(), p);
            for (t, x) in total.iter_mut().zip(part) {
                *t = add_mod(*t, mul_mod(coef, x, p), p);
            }
        }
        if (i * j).rem_euclid(2) == 1 {
            for t in total.iter_mut() {
                *t = neg_mod(*t, p);
            }
        }
        target.class_of(total)
    }

    /// The unit of `Ĥ^0(V, k)`: the class of the augmentation.
    pub fn unit(&self, sub: &Subgroup, k: &Arc<KGModule>) -> Result<CohomologyClass> {
        unit_class(&self.tate, sub, k, 0)
    }
}

/// The class of `x ↦ ε(x) e_a` in `Ĥ^0(V, M)` for a basis vector `e_a` fixed by `V`.
pub fn unit_class(tate: &TateEngine, sub: &Subgroup, m: &Arc<KGModule>, a: usize) -> Result<CohomologyClass> {
    let space = tate.space(sub, m, 0)?;
    let md = m.dim();
    let mut table = vec![0u32; space.resolution().dim(0)? * md];
    for (x, &e) in space.resolution().augmentation().iter().enumerate() {
        table[x * md + a] = e;
    }
    space.class_of(space.from_full_table(&table))
}

/// Cochain `x ↦ μ((f ⊗ 1) G(x))` on the `kV`-generators of the target degree.
fn pair_through(
    target: &crate::resolutions::CohomologySpace,
    gi: &FpMatrix,
    f_table: &[u32],
    pair: &ModulePairing,
    md: usize,
    p: u32,
) -> Vec<u32> {
    let nd = pair.right.dim();
    let ld = pair.out.dim();
    let gn = target.resolution().group().order();
    let ncos = target.cosets().reps.len();
    let rank = gi.cols() / gn;
    // μ(F(x) ⊗ e_a) for every basis x of X_i and a of N.
    let xdim = gi.rows() / nd;
    let mut images: Vec<Option<Vec<u32>>> = vec![None; xdim * nd];
    let mut out = vec![0u32; target.cochain_dim()];
    for t in 0..rank {
        for (ci, &c) in target.cosets().reps.iter().enumerate() {
            let col = gi.column(t * gn + c);
            let base = (t * ncos + ci) * ld;
            for (r, &z) in col.iter().enumerate() {
                if z == 0 {
                    continue;
                }
                let (x, a) = (r / nd, r % nd);
                let img = images[r].get_or_insert_with(|| {
                    let mut e = vec![0u32; nd];
                    e[a] = 1;
                    pair.apply(&f_table[x * md..(x + 1) * md], &e)
                });
                for (l, &v) in img.iter().enumerate() {
                    if v != 0 {
                        out[base + l] = add_mod(out[base + l], mul_mod(z, v, p), p);
                    }
                }
            }
        }
    }
    out
}

/// One component `Γ_{r,s} : X_{r+s} → X_r ⊗ X_s` of a diagonal approximation,
/// stored by the images of the `kG`-generators of `X_{r+s}` as sparse vectors
/// indexed `x * dim X_s + y`.
#[derive(Clone, Debug)]
pub struct DiagonalComponent {
    pub r: i32,
    pub s: i32,
    pub generator_images: Vec<Vec<(usize, u32)>>,
}

/// The diagonal component on the bar resolution (`r, s ≥ 0`) or on the cyclic
/// periodic resolution (any `r, s`).
pub fn diagonal_component(res: &CompleteResolution, r: i32, s: i32) -> Result<DiagonalComponent> {
    let n = r + s;
    for d in [r, s, n] {
        if !res.contains_degree(d) {
            return Err(Error::Window {
                degree: d,
                lo: res.window().0,
                hi: res.window().1,
            });
        }
    }
    let g = res.group();
    let gn = g.order();
    let p = res.p();
    match res.backend() {
        Backend::Bar => {
            if r < 0 || s < 0 {
                return Err(Error::Backend("bar diagonal is only available for r, s ≥ 0".into()));
            }
            let ys = res.dim(s)?;
            let images = (0..res.rank(n)?)
                .map(|t| {
                    let tup = bar_tuple(gn, n as usize, t);
                    let (front, back) = tup.split_at(r as usize);
                    let prod = front.iter().fold(0, |acc, &x| g.mul(acc, x));
                    let x = bar_index(gn, front) * gn;
                    let y = bar_index(gn, back) * gn + prod;
                    vec![(x * ys + y, 1 % p)]
                })
                .collect();
            Ok(DiagonalComponent {
                r,
                s,
                generator_images: images,
            })
        }
        Backend::Cyclic => {
            let t = g.cyclic_generator().expect("cyclic backend");
            let mut powers = vec![0usize; gn];
            for i in 1..gn {
                powers[i] = g.mul(powers[i - 1], t);
            }
            let r_odd = r.rem_euclid(2) == 1;
            let s_odd = s.rem_euclid(2) == 1;
            let image = if !r_odd {
                vec![(0, 1 % p)]
            } else if !s_odd {
                vec![(powers[1], 1 % p)]
            } else {
                let mut v = Vec::new();
                for i in 0..gn {
                    for j in i + 1..gn {
                        v.push((powers[i] * gn + powers[j], 1 % p));
                    }
                }
                v
            };
            Ok(DiagonalComponent {
                r,
                s,
                generator_images: vec![image],
            })
        }
        Backend::Reduced => Err(Error::Backend(
            "explicit diagonal components exist only for the bar and cyclic backends".into(),
        )),
    }
}

impl DiagonalComponent {
    /// Dense matrix of the full `kG`-linear map (diagonal action on the target).
    pub fn to_matrix(&self, res: &CompleteResolution) -> Result<FpMatrix> {
        let gn = res.group().order();
        let (xr, xs) = (res.dim(self.r)?, res.dim(self.s)?);
        let cols = res.dim(self.r + self.s)?;
        let mut m = FpMatrix::zeros(res.p(), xr * xs, cols);
        for (t, img) in self.generator_images.iter().enumerate() {
            for h in 0..gn {
                for &(idx, c) in img {
                    let (x, y) = (idx / xs, idx % xs);
                    let row = res.act_index(h, x) * xs + res.act_index(h, y);
                    m.set(row, t * gn + h, add_mod(m.get(row, t * gn + h), c, res.p()));
                }
            }
        }
        Ok(m)
    }
}

/// Checks `(d_{r+1} ⊗ 1) Γ_{r+1,s} + (-1)^r (1 ⊗ d_{s+1}) Γ_{r,s+1} = Γ_{r,s} d_{r+s+1}`
/// for every `(r, s)` with `r + s = n - 1` and all involved degrees in the window.
pub fn verify_diagonal_chain_map(res: &CompleteResolution, n: i32, r_range: (i32, i32)) -> Result<bool> {
    let p = res.p();
    for r in r_range.0..=r_range.1 {
        let s = n - 1 - r;
        let upper_left = diagonal_component(res, r + 1, s)?.to_matrix(res)?;
        let upper_right = diagonal_component(res, r, s + 1)?.to_matrix(res)?;
        let lower = diagonal_component(res, r, s)?.to_matrix(res)?;
        let id_s = FpMatrix::identity(p, res.dim(s)?);
        let id_r = FpMatrix::identity(p, res.dim(r)?);
        let left = res.differential(r + 1)?.kron(&id_s).mul(&upper_left);
        let mut right = id_r.kron(res.differential(s + 1)?).mul(&upper_right);
        if r.rem_euclid(2) == 1 {
            right = right.scale(p - 1);
        }
        let rhs = lower.mul(res.differential(n)?);
        if left.add(&right) != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `μ (f ⊗ g) Γ_{i,j}` projected into `Ĥ^{i+j}(V, L)`.
pub fn cup_via_diagonal(
    tate: &TateEngine,
    alpha: &CohomologyClass,
    beta: &CohomologyClass,
    pair: &ModulePairing,
    gamma: &DiagonalComponent,
) -> Result<CohomologyClass> {
    let (sa, sb) = (&alpha.space, &beta.space);
    let res = tate.resolution();
    let p = res.p();
    if gamma.r != sa.degree() || gamma.s != sb.degree() {
        return Err(Error::Invalid("diagonal component has the wrong bidegree".into()));
    }
    let sub = sa.subgroup();
    let target = tate.space(sub, &pair.out, gamma.r + gamma.s)?;
    let fa = sa.full_table(&alpha.rep);
    let fb = sb.full_table(&beta.rep);
    let (md, nd, ld) = (pair.left.dim(), pair.right.dim(), pair.out.dim());
    let xs = res.dim(gamma.s)?;
    let ncos = target.cosets().reps.len();
    let mut out = vec![0u32; target.cochain_dim()];
    for (t, img) in gamma.generator_images.iter().enumerate() {
        for (ci, &c) in target.cosets().reps.iter().enumerate() {
            let base = (t * ncos + ci) * ld;
            for &(idx, coef) in img {
                let (x, y) = (idx / xs, idx % xs);
                let (x, y) = (res.act_index(c, x), res.act_index(c, y));
                let v = pair.apply(&fa[x * md..(x + 1) * md], &fb[y * nd..(y + 1) * nd]);
                for (l, &val) in v.iter().enumerate() {
                    out[base + l] = add_mod(out[base + l], mul_mod(coef, val, p), p);
                }
            }
        }
    }
    target.class_of(out)
}

/// A comparison chain map `X → Y` between two complete resolutions of `k`
/// over the same group, used to move classes from `Y` to `X`.
pub struct Comparison {
    lift: Mutex<ChainLift>,
    from: Arc<TateEngine>,
}

impl Comparison {
    pub fn new(from: &Arc<TateEngine>, to: &Arc<TateEngine>, sub: &Subgroup, k: &Arc<KGModule>) -> Result<Self> {
        let src = from.resolution();
        let aug = src.augmentation().to_vec();
        let lift = ChainLift::new(src, to.resolution(), sub, k, 0, &aug)?;
        Ok(Comparison {
            lift: Mutex::new(lift),
            from: from.clone(),
        })
    }

    /// Pulls a class on `Y` back along `Φ_n : X_n → Y_n`.
    pub fn transport(&self, class: &CohomologyClass) -> Result<CohomologyClass> {
        let space = &class.space;
        let n = space.degree();
        let target = self.from.space(space.subgroup(), space.module(), n)?;
        let table = space.full_table(&class.rep);
        let mut lift = self.lift.lock().expect("lift lock");
        let phi = lift.get(n)?;
        let md = space.module().dim();
        let gn = target.resolution().group().order();
        let ncos = target.cosets().reps.len();
        let mut out = vec![0u32; target.cochain_dim()];
        for t in 0..phi.cols() / gn {
            for (ci, &c) in target.cosets().reps.iter().enumerate() {
                let val = space.evaluate(&table, &phi.column(t * gn + c));
                out[(t * ncos + ci) * md..(t * ncos + ci + 1) * md].copy_from_slice(&val);
            }
        }
        debug_assert_eq!(md * phi.cols() / gn * ncos, out.len());
        target.class_of(out)
    }
}
