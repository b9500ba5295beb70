//! The additive decomposition `Ĥ*(H, kG) ≅ ⊕_i Ĥ*(H_i, k)` over the orbits of
//! an action of `H` on `G`, the maps `ψ_i = cor^H_{H_i} ∘ θ_{g_i}`, and the
//! double-coset product formula, which multiplies directly in decomposed
//! coordinates. With `H = G` acting by conjugation this computes the
//! Tate–Hochschild cohomology ring of `kG`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::cup::{unit_class, CupEngine};
use crate::error::{Error, Result};
use crate::groups::{double_coset_reps, locate_product_datum, FiniteGroup, GroupAction, Subgroup};
use crate::kgmodules::{action_multiplication_pairing, trivial_module, KGModule, ModulePairing};
use crate::linalg::{add_mod, mul_mod, FpMatrix};
use crate::maps::{conjugation, corestriction, restriction, MapCache};
use crate::resolutions::{
    auto_backend, build_resolution, default_window, Backend, CohomologyClass, SizeBudget, TateEngine,
};

/// An element of the decomposed ring in a single degree, in orbit-major
/// coordinates (the concatenation of coordinates in each `Ĥ^n(H_i, k)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingElement {
    pub degree: i32,
    pub coords: Vec<u32>,
}

impl RingElement {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// A class of `Ĥ^n(H, kG)` split into its orbit components.
#[derive(Clone, Debug)]
pub struct DecomposedClass {
    pub degree: i32,
    pub components: Vec<Vec<u32>>,
}

/// One double coset's contribution to a product.
#[derive(Clone, Debug)]
pub struct Summand {
    pub x: usize,
    pub k: usize,
    pub y: usize,
    pub v: Subgroup,
    pub value: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct ProductTrace {
    pub degree: i32,
    pub components: Vec<Vec<u32>>,
    pub summands: Vec<Summand>,
}

/// Degrees and basis indices of a product of two basis elements.
type ProductKey = (i32, usize, i32, usize);

pub struct DecompositionContext {
    action: GroupAction,
    window: i32,
    cup: CupEngine,
    maps: MapCache,
    k: Arc<KGModule>,
    kk: ModulePairing,
    mu: ModulePairing,
    reps: Vec<usize>,
    stabilizers: Vec<Subgroup>,
    whole: Subgroup,
    products: Mutex<HashMap<ProductKey, Vec<u32>>>,
}

impl std::fmt::Debug for DecompositionContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DecompositionContext({:?}, window {})", self.action, self.window)
    }
}

impl DecompositionContext {
    /// Builds the context for degrees `|n| ≤ window` on one resolution of the
    /// acting group; every stabilizer uses the same resolution by restriction.
    pub fn build(action: GroupAction, p: u32, window: i32, backend: Option<Backend>, budget: &SizeBudget) -> Result<Self> {
        let h = action.actor().clone();
        let backend = backend.unwrap_or_else(|| auto_backend(&h, p));
        let res = build_resolution(&h, p, default_window(window), backend, budget)?;
        res.verify()?;
        let tate = Arc::new(TateEngine::new(res));
        let k = Arc::new(trivial_module(&h, p)?);
        let kk = ModulePairing::trivial(&k)?;
        let mu = action_multiplication_pairing(&action, p)?;
        let reps = action.orbit_reps();
        let stabilizers = reps.iter().map(|&g| action.orbit_stabilizer(g).1).collect();
        Ok(DecompositionContext {
            window,
            cup: CupEngine::new(tate.clone()),
            maps: MapCache::new(tate),
            k,
            kk,
            mu,
            reps,
            stabilizers,
            whole: Subgroup::whole(&h),
            action,
            products: Mutex::new(HashMap::new()),
        })
    }

    /// Conjugation action of `G` on itself.
    pub fn for_group(group: &Arc<FiniteGroup>, p: u32, window: i32, backend: Option<Backend>, budget: &SizeBudget) -> Result<Self> {
        Self::build(GroupAction::conjugation(group), p, window, backend, budget)
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn acting_group(&self) -> &Arc<FiniteGroup> {
        self.action.actor()
    }

    pub fn p(&self) -> u32 {
        self.cup.tate().p()
    }

    pub fn window(&self) -> i32 {
        self.window
    }

    pub fn tate(&self) -> &Arc<TateEngine> {
        self.cup.tate()
    }

    pub fn cup_engine(&self) -> &CupEngine {
        &self.cup
    }

    pub fn maps(&self) -> &MapCache {
        &self.maps
    }

    pub fn trivial(&self) -> &Arc<KGModule> {
        &self.k
    }

    /// The coefficient module `kG` with the action of `H`.
    pub fn coefficients(&self) -> &Arc<KGModule> {
        &self.mu.out
    }

    pub fn trivial_pairing(&self) -> &ModulePairing {
        &self.kk
    }

    pub fn multiplication(&self) -> &ModulePairing {
        &self.mu
    }

    pub fn orbit_reps(&self) -> &[usize] {
        &self.reps
    }

    pub fn stabilizers(&self) -> &[Subgroup] {
        &self.stabilizers
    }

    pub fn num_orbits(&self) -> usize {
        self.reps.len()
    }

    fn check_degree(&self, n: i32) -> Result<()> {
        if n.abs() > self.window {
            return Err(Error::Window {
                degree: n,
                lo: -self.window,
                hi: self.window,
            });
        }
        Ok(())
    }

    /// `dim Ĥ^n(H_i, k)` for every orbit.
    pub fn component_dims(&self, n: i32) -> Result<Vec<usize>> {
        self.check_degree(n)?;
        self.stabilizers
            .iter()
            .map(|s| Ok(self.tate().space(s, &self.k, n)?.dim()))
            .collect()
    }

    pub fn total_dim(&self, n: i32) -> Result<usize> {
        Ok(self.component_dims(n)?.iter().sum())
    }

    /// `dim Ĥ^n(H, kG)` computed directly.
    pub fn direct_dim(&self, n: i32) -> Result<usize> {
        self.check_degree(n)?;
        Ok(self.tate().space(&self.whole, self.coefficients(), n)?.dim())
    }

    /// Orbit and local index of a decomposed basis index.
    pub fn split_index(&self, n: i32, idx: usize) -> Result<(usize, usize)> {
        let mut rest = idx;
        for (i, d) in self.component_dims(n)?.into_iter().enumerate() {
            if rest < d {
                return Ok((i, rest));
            }
            rest -= d;
        }
        Err(Error::Invalid(format!("basis index {idx} out of range in degree {n}")))
    }

    fn offsets(&self, n: i32) -> Result<Vec<usize>> {
        let mut acc = 0;
        let mut out = Vec::new();
        for d in self.component_dims(n)? {
            out.push(acc);
            acc += d;
        }
        Ok(out)
    }

    /// The class in `Ĥ^n(H_i, k)` with the given coordinates.
    pub fn component_class(&self, i: usize, n: i32, coords: Vec<u32>) -> Result<CohomologyClass> {
        Ok(self.tate().space(&self.stabilizers[i], &self.k, n)?.class(coords))
    }

    /// `ψ_i(α) = cor^H_{H_i} θ_{g_i}(α)`.
    pub fn assemble(&self, i: usize, alpha: &CohomologyClass) -> Result<CohomologyClass> {
        self.check_degree(alpha.degree())?;
        let n = alpha.degree();
        let theta = self.maps.theta(self.reps[i], &self.stabilizers[i], &self.k, self.coefficients(), n)?;
        let cor = self.maps.cor(&self.stabilizers[i], &self.whole, self.coefficients(), n)?;
        Ok(cor.apply(&theta.apply(alpha)))
    }

    /// Matrix of `ψ_i` in degree `n`.
    pub fn psi_matrix(&self, i: usize, n: i32) -> Result<FpMatrix> {
        self.check_degree(n)?;
        let theta = self.maps.theta(self.reps[i], &self.stabilizers[i], &self.k, self.coefficients(), n)?;
        let cor = self.maps.cor(&self.stabilizers[i], &self.whole, self.coefficients(), n)?;
        Ok(cor.after(&theta).matrix)
    }

    /// `Σ_i ψ_i`, from decomposed coordinates to `Ĥ^n(H, kG)`.
    pub fn assemble_matrix(&self, n: i32) -> Result<FpMatrix> {
        let target = self.tate().space(&self.whole, self.coefficients(), n)?.dim();
        let mut m = FpMatrix::zeros(self.p(), target, 0);
        for i in 0..self.num_orbits() {
            m = m.hstack(&self.psi_matrix(i, n)?);
        }
        Ok(m)
    }

    /// Component `i` is `π_{g_i}(res^H_{H_i} ζ)`.
    pub fn decompose(&self, zeta: &CohomologyClass) -> Result<DecomposedClass> {
        let n = zeta.degree();
        self.check_degree(n)?;
        let mut components = Vec::new();
        for i in 0..self.num_orbits() {
            let res = self.maps.res(&self.whole, &self.stabilizers[i], self.coefficients(), n)?;
            let pi = self.maps.pi(self.reps[i], &self.stabilizers[i], self.coefficients(), &self.k, n)?;
            components.push(pi.apply(&res.apply(zeta)).coords);
        }
        Ok(DecomposedClass { degree: n, components })
    }

    pub fn decompose_matrix(&self, n: i32) -> Result<FpMatrix> {
        let src = self.tate().space(&self.whole, self.coefficients(), n)?.dim();
        let mut m = FpMatrix::zeros(self.p(), 0, src);
        for i in 0..self.num_orbits() {
            let res = self.maps.res(&self.whole, &self.stabilizers[i], self.coefficients(), n)?;
            let pi = self.maps.pi(self.reps[i], &self.stabilizers[i], self.coefficients(), &self.k, n)?;
            m = m.vstack(&pi.after(&res).matrix);
        }
        Ok(m)
    }

    pub fn flatten(&self, d: &DecomposedClass) -> RingElement {
        RingElement {
            degree: d.degree,
            coords: d.components.concat(),
        }
    }

    /// `Σ_i ψ_i(α_i)` for a ring element.
    pub fn assemble_element(&self, x: &RingElement) -> Result<CohomologyClass> {
        let space = self.tate().space(&self.whole, self.coefficients(), x.degree)?;
        let coords = self.assemble_matrix(x.degree)?.mul_vec(&x.coords);
        Ok(space.class(coords))
    }

    pub fn decompose_element(&self, zeta: &CohomologyClass) -> Result<RingElement> {
        Ok(self.flatten(&self.decompose(zeta)?))
    }

    /// The double-coset product formula for `α ∈ Ĥ^a(H_i, k)` and `β ∈ Ĥ^b(H_j, k)`.
    pub fn product_formula(&self, i: usize, alpha: &CohomologyClass, j: usize, beta: &CohomologyClass) -> Result<ProductTrace> {
        let n = alpha.degree() + beta.degree();
        self.check_degree(alpha.degree())?;
        self.check_degree(beta.degree())?;
        self.check_degree(n)?;
        let tate = self.tate();
        let mut components: Vec<Vec<u32>> = self.component_dims(n)?.into_iter().map(|d| vec![0; d]).collect();
        let mut summands = Vec::new();
        let p = self.p();
        for x in double_coset_reps(&self.stabilizers[i], &self.stabilizers[j]) {
            let d = locate_product_datum(&self.action, &self.reps, &self.stabilizers, i, j, x)?;
            let h = self.action.actor();
            let yx = h.mul(d.y, x);
            let a = restriction(tate, &conjugation(tate, d.y, alpha)?, &d.v)?;
            let b = restriction(tate, &conjugation(tate, yx, beta)?, &d.v)?;
            let prod = self.cup.cup(&a, &b, &self.kk)?;
            let value = corestriction(tate, &prod, &self.stabilizers[d.k])?.coords;
            for (c, &v) in components[d.k].iter_mut().zip(&value) {
                *c = add_mod(*c, v, p);
            }
            summands.push(Summand {
                x,
                k: d.k,
                y: d.y,
                v: d.v,
                value,
            });
        }
        Ok(ProductTrace {
            degree: n,
            components,
            summands,
        })
    }

    /// Product of two decomposed basis elements, memoized.
    pub fn basis_product(&self, n1: i32, a: usize, n2: i32, b: usize) -> Result<Vec<u32>> {
        let key = (n1, a, n2, b);
        if let Some(v) = self.products.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let (i, la) = self.split_index(n1, a)?;
        let (j, lb) = self.split_index(n2, b)?;
        let alpha = self.tate().space(&self.stabilizers[i], &self.k, n1)?.basis_class(la);
        let beta = self.tate().space(&self.stabilizers[j], &self.k, n2)?.basis_class(lb);
        let trace = self.product_formula(i, &alpha, j, &beta)?;
        let v = trace.components.concat();
        self.products.lock().expect("cache lock").insert(key, v.clone());
        Ok(v)
    }

    /// Product in decomposed coordinates through the double-coset formula.
    pub fn multiply(&self, x: &RingElement, y: &RingElement) -> Result<RingElement> {
        let n = x.degree + y.degree;
        let p = self.p();
        let mut out = vec![0u32; self.total_dim(n)?];
        for (a, &ca) in x.coords.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (b, &cb) in y.coords.iter().enumerate() {
                if cb == 0 {
                    continue;
                }
                let c = mul_mod(ca, cb, p);
                for (o, v) in out.iter_mut().zip(self.basis_product(x.degree, a, y.degree, b)?) {
                    *o = add_mod(*o, mul_mod(c, v, p), p);
                }
            }
        }
        Ok(RingElement { degree: n, coords: out })
    }

    /// Product computed as a cup product on `Ĥ*(H, kG)` with the multiplication pairing.
    pub fn direct_oracle_product(&self, a: &CohomologyClass, b: &CohomologyClass) -> Result<CohomologyClass> {
        self.check_degree(a.degree() + b.degree())?;
        self.cup.cup(a, b, &self.mu)
    }

    /// Product of decomposed elements through the oracle, returned decomposed.
    pub fn oracle_multiply(&self, x: &RingElement, y: &RingElement) -> Result<RingElement> {
        let prod = self.direct_oracle_product(&self.assemble_element(x)?, &self.assemble_element(y)?)?;
        self.decompose_element(&prod)
    }

    /// `ψ_1(1)`.
    pub fn unit(&self) -> Result<RingElement> {
        let one = unit_class(self.tate(), &self.stabilizers[0], &self.k, 0)?;
        let mut coords = vec![0u32; self.total_dim(0)?];
        let off = self.offsets(0)?;
        for (l, &c) in one.coords.iter().enumerate() {
            coords[off[0] + l] = c;
        }
        Ok(RingElement { degree: 0, coords })
    }

    /// `ψ_i` of a component class, as a ring element.
    pub fn embed(&self, i: usize, alpha: &CohomologyClass) -> Result<RingElement> {
        let n = alpha.degree();
        let mut coords = vec![0u32; self.total_dim(n)?];
        let off = self.offsets(n)?;
        for (l, &c) in alpha.coords.iter().enumerate() {
            coords[off[i] + l] = c;
        }
        Ok(RingElement { degree: n, coords })
    }

    /// The component of a ring element along orbit `i`.
    pub fn component(&self, x: &RingElement, i: usize) -> Result<CohomologyClass> {
        let off = self.offsets(x.degree)?;
        let dims = self.component_dims(x.degree)?;
        self.component_class(i, x.degree, x.coords[off[i]..off[i] + dims[i]].to_vec())
    }

    /// Value in `kG` of a degree-0 representative at the generator of `X_0`: an
    /// element of the centre of `kG` (modulo norms) when `H = G` acts by conjugation.
    pub fn degree_zero_center(&self, x: &RingElement) -> Result<Vec<u32>> {
        if x.degree != 0 {
            return Err(Error::Invalid("only degree-0 elements have a centre interpretation".into()));
        }
        let class = self.assemble_element(x)?;
        let md = self.coefficients().dim();
        Ok(class.rep[..md].to_vec())
    }
}

/// `kG` element as a sum of labelled group elements.
pub fn format_group_algebra_element(group: &FiniteGroup, coords: &[u32]) -> String {
    let terms: Vec<String> = coords
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(g, &c)| if c == 1 { group.label(g).to_string() } else { format!("{c}{}", group.label(g)) })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Graded dimensions `|G| · dim Ĥ^n(G, k)` for an abelian group, `n ∈ [-w, w]`.
#[derive(Clone, Debug)]
pub struct AbelianRing {
    pub structure: String,
    pub dims: Vec<(i32, usize)>,
}

pub fn abelian_ring(group: &Arc<FiniteGroup>, p: u32, window: i32, budget: &SizeBudget) -> Result<AbelianRing> {
    if !group.is_abelian() {
        return Err(Error::InvalidGroup(format!("{} is not abelian", group.name())));
    }
    let res = build_resolution(group, p, default_window(window), auto_backend(group, p), budget)?;
    let tate = TateEngine::new(res);
    let k = Arc::new(trivial_module(group, p)?);
    let whole = Subgroup::whole(group);
    let dims = (-window..=window)
        .map(|n| Ok((n, group.order() * tate.space(&whole, &k, n)?.dim())))
        .collect::<Result<Vec<_>>>()?;
    Ok(AbelianRing {
        structure: format!("k{} ⊗ Ĥ*({}, k)", group.name(), group.name()),
        dims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{cyclic, klein_four, symmetric3};
    use crate::linalg::is_zero_vec;

    fn s3_ctx(w: i32) -> DecompositionContext {
        DecompositionContext::for_group(&Arc::new(symmetric3()), 3, w, None, &SizeBudget::default()).unwrap()
    }

    #[test]
    fn s3_context_shape() {
        let ctx = s3_ctx(2);
        assert_eq!(ctx.num_orbits(), 3);
        let orders: Vec<usize> = ctx.stabilizers().iter().map(|s| s.order()).collect();
        assert_eq!(orders, vec![6, 3, 2]);
        for n in -2..=2 {
            assert_eq!(ctx.component_dims(n).unwrap()[2], 0);
            assert_eq!(ctx.total_dim(n).unwrap(), ctx.direct_dim(n).unwrap());
        }
        assert_eq!(ctx.total_dim(0).unwrap(), 2);
    }

    #[test]
    fn abelian_contexts() {
        let v4 = Arc::new(klein_four());
        let ctx = DecompositionContext::for_group(&v4, 2, 1, None, &SizeBudget::default()).unwrap();
        assert_eq!(ctx.num_orbits(), 4);
        assert!(ctx.stabilizers().iter().all(|s| s.is_whole()));
        let c3 = Arc::new(cyclic(3));
        let ring = abelian_ring(&c3, 3, 3, &SizeBudget::default()).unwrap();
        assert!(ring.dims.iter().all(|&(_, d)| d == 3));
        let c2 = Arc::new(cyclic(2));
        let ring = abelian_ring(&c2, 3, 2, &SizeBudget::default()).unwrap();
        assert!(ring.dims.iter().all(|&(_, d)| d == 0));
        assert!(abelian_ring(&Arc::new(symmetric3()), 3, 2, &SizeBudget::default()).is_err());
    }

    #[test]
    fn round_trip() {
        let ctx = s3_ctx(3);
        for n in -3..=3 {
            let a = ctx.assemble_matrix(n).unwrap();
            let d = ctx.decompose_matrix(n).unwrap();
            let dim = a.cols();
            assert_eq!(d.mul(&a), FpMatrix::identity(3, dim), "degree {n}");
            assert_eq!(a.mul(&d), FpMatrix::identity(3, dim), "degree {n}");
        }
    }

    #[test]
    fn unit_and_e2() {
        let ctx = s3_ctx(1);
        let one = ctx.unit().unwrap();
        assert_eq!(ctx.degree_zero_center(&one).unwrap(), vec![1, 0, 0, 0, 0, 0]);
        let sp = ctx.tate().space(&ctx.stabilizers()[1], ctx.trivial(), 0).unwrap();
        let e2 = ctx.embed(1, &unit_class(ctx.tate(), &ctx.stabilizers()[1], ctx.trivial(), 0).unwrap()).unwrap();
        assert_eq!(sp.dim(), 1);
        // E2 is the class sum a + a^2.
        assert_eq!(ctx.degree_zero_center(&e2).unwrap(), vec![0, 1, 0, 1, 0, 0]);
        let sq = ctx.multiply(&e2, &e2).unwrap();
        let expect: Vec<u32> = e2.coords.iter().zip(&one.coords).map(|(&a, &b)| (a + 3 - b) % 3).collect();
        assert_eq!(sq.coords, expect);
        assert_eq!(ctx.oracle_multiply(&e2, &e2).unwrap().coords, expect);
        assert_eq!(ctx.multiply(&one, &e2).unwrap(), e2);
    }

    #[test]
    fn formula_matches_oracle_small() {
        let ctx = s3_ctx(2);
        for n1 in -1..=1 {
            for n2 in -1..=1 {
                for a in 0..ctx.total_dim(n1).unwrap() {
                    for b in 0..ctx.total_dim(n2).unwrap() {
                        let mut x = vec![0; ctx.total_dim(n1).unwrap()];
                        x[a] = 1;
                        let mut y = vec![0; ctx.total_dim(n2).unwrap()];
                        y[b] = 1;
                        let (x, y) = (RingElement { degree: n1, coords: x }, RingElement { degree: n2, coords: y });
                        assert_eq!(ctx.multiply(&x, &y).unwrap(), ctx.oracle_multiply(&x, &y).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn summands_are_traced() {
        let ctx = s3_ctx(1);
        let n3 = &ctx.stabilizers()[1];
        let alpha = ctx.tate().space(n3, ctx.trivial(), 0).unwrap().basis_class(0);
        let trace = ctx.product_formula(1, &alpha, 1, &alpha).unwrap();
        assert_eq!(trace.summands.len(), 2);
        assert!(trace.summands.iter().all(|s| s.v.is_subgroup_of(&ctx.stabilizers()[s.k])));
        assert!(!is_zero_vec(&trace.components.concat()));
    }
}
