//! Restriction, corestriction, conjugation and the coefficient maps
//! `θ_a : k → kG` (`1 ↦ e_a`) and `π_a : kG → k` (coordinate at `a`),
//! all computed on cochain value tables and then projected.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::groups::Subgroup;
use crate::kgmodules::KGModule;
use crate::linalg::{add_mod, FpMatrix};
use crate::resolutions::{CohomologyClass, CohomologySpace, TateEngine};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MapKind {
    Res,
    Cor,
    Conj(usize),
    Theta(usize),
    Pi(usize),
    Composite,
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Res => write!(f, "res"),
            MapKind::Cor => write!(f, "cor"),
            MapKind::Conj(g) => write!(f, "conj({g})"),
            MapKind::Theta(a) => write!(f, "theta({a})"),
            MapKind::Pi(a) => write!(f, "pi({a})"),
            MapKind::Composite => write!(f, "composite"),
        }
    }
}

/// A linear map between cohomology spaces in class coordinates.
#[derive(Clone, Debug)]
pub struct CohomologyMap {
    pub source: Arc<CohomologySpace>,
    pub target: Arc<CohomologySpace>,
    pub matrix: FpMatrix,
    pub kind: MapKind,
}

impl CohomologyMap {
    pub fn apply(&self, class: &CohomologyClass) -> CohomologyClass {
        assert!(Arc::ptr_eq(&class.space, &self.source), "class is not in the source space");
        self.target.class(self.matrix.mul_vec(&class.coords))
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &CohomologyMap) -> CohomologyMap {
        assert!(Arc::ptr_eq(&first.target, &self.source), "maps do not compose");
        CohomologyMap {
            source: first.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&first.matrix),
            kind: MapKind::Composite,
        }
    }

    /// Builds the coordinate matrix of a class-level map from its values on basis classes.
    pub fn from_fn(
        source: &Arc<CohomologySpace>,
        target: &Arc<CohomologySpace>,
        kind: MapKind,
        f: impl Fn(&CohomologyClass) -> Result<CohomologyClass>,
    ) -> Result<CohomologyMap> {
        let mut cols = Vec::with_capacity(source.dim());
        for i in 0..source.dim() {
            let img = f(&source.basis_class(i))?;
            if !Arc::ptr_eq(&img.space, target) {
                return Err(Error::Inconsistent("map landed in an unexpected space".into()));
            }
            cols.push(img.coords);
        }
        Ok(CohomologyMap {
            source: source.clone(),
            target: target.clone(),
            matrix: FpMatrix::from_columns(source.p(), target.dim(), &cols),
            kind,
        })
    }
}

/// `res^V_W`: the cochain is unchanged and re-read over `W`.
pub fn restriction(engine: &TateEngine, class: &CohomologyClass, sub: &Subgroup) -> Result<CohomologyClass> {
    let src = &class.space;
    if !sub.is_subgroup_of(src.subgroup()) {
        return Err(Error::NotSubgroup(format!("{sub:?} is not contained in {:?}", src.subgroup())));
    }
    let target = engine.space(sub, src.module(), src.degree())?;
    let table = src.full_table(&class.rep);
    target.class_of(target.from_full_table(&table))
}

/// `cor^V_W`: `(cor f)(x) = Σ_g g f(g^-1 x)` over left coset representatives of `W` in `V`.
pub fn corestriction(engine: &TateEngine, class: &CohomologyClass, sup: &Subgroup) -> Result<CohomologyClass> {
    let src = &class.space;
    let sub = src.subgroup();
    if !sub.is_subgroup_of(sup) {
        return Err(Error::NotSubgroup(format!("{sub:?} is not contained in {sup:?}")));
    }
    corestriction_with_reps(engine, class, sup, &sub.left_coset_reps_in(sup))
}

/// Corestriction with an explicit set of left coset representatives.
pub fn corestriction_with_reps(
    engine: &TateEngine,
    class: &CohomologyClass,
    sup: &Subgroup,
    reps: &[usize],
) -> Result<CohomologyClass> {
    let src = &class.space;
    let sub = src.subgroup();
    if !sub.is_subgroup_of(sup) {
        return Err(Error::NotSubgroup(format!("{sub:?} is not contained in {sup:?}")));
    }
    let target = engine.space(sup, src.module(), src.degree())?;
    let table = src.full_table(&class.rep);
    let mut out = vec![0u32; table.len()];
    for &g in reps {
        let moved = translate_table(src, &table, g);
        for (o, v) in out.iter_mut().zip(moved) {
            *o = add_mod(*o, v, src.p());
        }
    }
    target.class_of(target.from_full_table(&out))
}

/// `g*`: `(g* f)(x) = g f(g^-1 x)`, a class over `g V g^-1`.
pub fn conjugation(engine: &TateEngine, g: usize, class: &CohomologyClass) -> Result<CohomologyClass> {
    let src = &class.space;
    let target = engine.space(&src.subgroup().conjugate(g), src.module(), src.degree())?;
    let table = translate_table(src, &src.full_table(&class.rep), g);
    target.class_of(target.from_full_table(&table))
}

/// Value table of `x ↦ g f(g^-1 x)`.
fn translate_table(space: &CohomologySpace, table: &[u32], g: usize) -> Vec<u32> {
    let res = space.resolution();
    let grp = res.group();
    let n = grp.order();
    let m = space.module();
    let md = m.dim();
    let ginv = grp.inv(g);
    let mut out = vec![0u32; table.len()];
    for idx in 0..table.len() / md {
        let src = (idx / n) * n + grp.mul(ginv, idx % n);
        let val = m.act(g, &table[src * md..(src + 1) * md]);
        out[idx * md..(idx + 1) * md].copy_from_slice(&val);
    }
    out
}

fn fixes_basis_vector(m: &KGModule, sub: &Subgroup, a: usize) -> bool {
    sub.members().iter().all(|&v| {
        let act = m.action(v);
        (0..m.dim()).all(|r| act.get(r, a) == u32::from(r == a) && act.get(a, r) == u32::from(r == a))
    })
}

/// `θ_a*`: postcompose a class with `k → M`, `1 ↦ e_a`.
pub fn theta_push(
    engine: &TateEngine,
    a: usize,
    class: &CohomologyClass,
    target_module: &Arc<KGModule>,
) -> Result<CohomologyClass> {
    let src = &class.space;
    if src.module().dim() != 1 || !src.module().is_trivial_action() {
        return Err(Error::InvalidModule("θ expects a class with trivial coefficients".into()));
    }
    if a >= target_module.dim() || !fixes_basis_vector(target_module, src.subgroup(), a) {
        return Err(Error::NotSubgroup(format!("the subgroup does not stabilize basis vector {a}")));
    }
    let target = engine.space(src.subgroup(), target_module, src.degree())?;
    let table = src.full_table(&class.rep);
    let md = target_module.dim();
    let mut out = vec![0u32; table.len() * md];
    for (i, &v) in table.iter().enumerate() {
        out[i * md + a] = v;
    }
    target.class_of(target.from_full_table(&out))
}

/// `π_a*`: postcompose a class with the coordinate at `a`.
pub fn pi_push(engine: &TateEngine, a: usize, class: &CohomologyClass, k: &Arc<KGModule>) -> Result<CohomologyClass> {
    let src = &class.space;
    let m = src.module();
    if k.dim() != 1 || !k.is_trivial_action() {
        return Err(Error::InvalidModule("π targets the trivial module".into()));
    }
    if a >= m.dim() || !fixes_basis_vector(m, src.subgroup(), a) {
        return Err(Error::NotSubgroup(format!("the subgroup does not stabilize basis vector {a}")));
    }
    let target = engine.space(src.subgroup(), k, src.degree())?;
    let table = src.full_table(&class.rep);
    let md = m.dim();
    let out: Vec<u32> = (0..table.len() / md).map(|i| table[i * md + a]).collect();
    target.class_of(target.from_full_table(&out))
}

type MapKey = (Vec<usize>, Vec<usize>, usize, usize, i32, MapKind);

/// Memoized coordinate matrices of the maps above.
pub struct MapCache {
    engine: Arc<TateEngine>,
    cache: Mutex<HashMap<MapKey, Arc<CohomologyMap>>>,
}

impl MapCache {
    pub fn new(engine: Arc<TateEngine>) -> Self {
        MapCache {
            engine,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn engine(&self) -> &Arc<TateEngine> {
        &self.engine
    }

    fn memo(
        &self,
        key: MapKey,
        build: impl FnOnce() -> Result<CohomologyMap>,
    ) -> Result<Arc<CohomologyMap>> {
        if let Some(m) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(build()?);
        self.cache.lock().expect("cache lock").insert(key, m.clone());
        Ok(m)
    }

    fn key(a: &Subgroup, b: &Subgroup, m1: &Arc<KGModule>, m2: &Arc<KGModule>, n: i32, kind: MapKind) -> MapKey {
        (
            a.members().to_vec(),
            b.members().to_vec(),
            Arc::as_ptr(m1) as usize,
            Arc::as_ptr(m2) as usize,
            n,
            kind,
        )
    }

    pub fn res(&self, from: &Subgroup, to: &Subgroup, m: &Arc<KGModule>, n: i32) -> Result<Arc<CohomologyMap>> {
        self.memo(Self::key(from, to, m, m, n, MapKind::Res), || {
            let s = self.engine.space(from, m, n)?;
            let t = self.engine.space(to, m, n)?;
            CohomologyMap::from_fn(&s, &t, MapKind::Res, |c| restriction(&self.engine, c, to))
        })
    }

    pub fn cor(&self, from: &Subgroup, to: &Subgroup, m: &Arc<KGModule>, n: i32) -> Result<Arc<CohomologyMap>> {
        self.memo(Self::key(from, to, m, m, n, MapKind::Cor), || {
            let s = self.engine.space(from, m, n)?;
            let t = self.engine.space(to, m, n)?;
            CohomologyMap::from_fn(&s, &t, MapKind::Cor, |c| corestriction(&self.engine, c, to))
        })
    }

    pub fn conj(&self, g: usize, from: &Subgroup, m: &Arc<KGModule>, n: i32) -> Result<Arc<CohomologyMap>> {
        let to = from.conjugate(g);
        self.memo(Self::key(from, &to, m, m, n, MapKind::Conj(g)), || {
            let s = self.engine.space(from, m, n)?;
            let t = self.engine.space(&to, m, n)?;
            CohomologyMap::from_fn(&s, &t, MapKind::Conj(g), |c| conjugation(&self.engine, g, c))
        })
    }

    pub fn theta(
        &self,
        a: usize,
        sub: &Subgroup,
        k: &Arc<KGModule>,
        m: &Arc<KGModule>,
        n: i32,
    ) -> Result<Arc<CohomologyMap>> {
        self.memo(Self::key(sub, sub, k, m, n, MapKind::Theta(a)), || {
            let s = self.engine.space(sub, k, n)?;
            let t = self.engine.space(sub, m, n)?;
            CohomologyMap::from_fn(&s, &t, MapKind::Theta(a), |c| theta_push(&self.engine, a, c, m))
        })
    }

    pub fn pi(&self, a: usize, sub: &Subgroup, m: &Arc<KGModule>, k: &Arc<KGModule>, n: i32) -> Result<Arc<CohomologyMap>> {
        self.memo(Self::key(sub, sub, m, k, n, MapKind::Pi(a)), || {
            let s = self.engine.space(sub, m, n)?;
            let t = self.engine.space(sub, k, n)?;
            CohomologyMap::from_fn(&s, &t, MapKind::Pi(a), |c| pi_push(&self.engine, a, c, k))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{symmetric3, FiniteGroup};
    use crate::kgmodules::{conjugation_module, trivial_module};
    use crate::resolutions::{reduced_complete_resolution, SizeBudget};

    struct Fixture {
        g: Arc<FiniteGroup>,
        engine: Arc<TateEngine>,
        k: Arc<KGModule>,
        kg: Arc<KGModule>,
    }

    fn fixture() -> Fixture {
        let g = Arc::new(symmetric3());
        let engine = Arc::new(TateEngine::new(
            reduced_complete_resolution(&g, 3, (-5, 5), &SizeBudget::default()).unwrap(),
        ));
        let k = Arc::new(trivial_module(&g, 3).unwrap());
        let kg = Arc::new(conjugation_module(&g, 3).unwrap());
        Fixture { g, engine, k, kg }
    }

    #[test]
    fn restriction_to_whole_is_identity() {
        let f = fixture();
        let cache = MapCache::new(f.engine.clone());
        let w = Subgroup::whole(&f.g);
        for n in -3..=3 {
            let m = cache.res(&w, &w, &f.kg, n).unwrap();
            assert_eq!(m.matrix, FpMatrix::identity(3, m.source.dim()));
            let c = cache.cor(&w, &w, &f.kg, n).unwrap();
            assert_eq!(c.matrix, FpMatrix::identity(3, c.source.dim()));
        }
    }

    #[test]
    fn restriction_to_h3_vanishes() {
        let f = fixture();
        let h3 = Subgroup::generated(&f.g, &[2]);
        let w = Subgroup::whole(&f.g);
        for n in -3..=3 {
            let sp = f.engine.space(&w, &f.k, n).unwrap();
            for i in 0..sp.dim() {
                assert!(restriction(&f.engine, &sp.basis_class(i), &h3).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn cor_res_is_index() {
        let f = fixture();
        let cache = MapCache::new(f.engine.clone());
        let w = Subgroup::whole(&f.g);
        let n3 = Subgroup::generated(&f.g, &[1]);
        for n in -3..=3 {
            let r = cache.res(&w, &n3, &f.k, n).unwrap();
            let c = cache.cor(&n3, &w, &f.k, n).unwrap();
            let comp = c.after(&r);
            assert_eq!(comp.matrix, FpMatrix::identity(3, r.source.dim()).scale(2));
        }
    }

    #[test]
    fn conj_inside_is_identity() {
        let f = fixture();
        let cache = MapCache::new(f.engine.clone());
        let n3 = Subgroup::generated(&f.g, &[1]);
        for n in -3..=3 {
            let m = cache.conj(1, &n3, &f.k, n).unwrap();
            assert_eq!(m.matrix, FpMatrix::identity(3, m.source.dim()));
            // b acts as -1 on the cohomology of N in degrees 1 and 2 (and their shifts by 4).
            let b = cache.conj(2, &n3, &f.k, n).unwrap();
            let expect = if n.rem_euclid(4) == 1 || n.rem_euclid(4) == 2 { 2 } else { 1 };
            assert_eq!(b.matrix, FpMatrix::identity(3, 1).scale(expect), "degree {n}");
        }
    }

    #[test]
    fn pi_theta_kronecker() {
        let f = fixture();
        let n3 = Subgroup::generated(&f.g, &[1]);
        for n in -2..=2 {
            let sp = f.engine.space(&n3, &f.k, n).unwrap();
            for i in 0..sp.dim() {
                let c = sp.basis_class(i);
                for a in [0usize, 1, 3] {
                    let t = theta_push(&f.engine, a, &c, &f.kg).unwrap();
                    for b in [0usize, 1, 3] {
                        let back = pi_push(&f.engine, b, &t, &f.k).unwrap();
                        if a == b {
                            assert_eq!(back.coords, c.coords);
                        } else {
                            assert!(back.is_zero());
                        }
                    }
                }
            }
        }
        // b does not centralize a.
        let sp = f.engine.space(&n3, &f.k, 0).unwrap();
        assert!(theta_push(&f.engine, 2, &sp.basis_class(0), &f.kg).is_err());
    }

    #[test]
    fn maps_ignore_added_coboundaries() {
        let f = fixture();
        let w = Subgroup::whole(&f.g);
        let n3 = Subgroup::generated(&f.g, &[1]);
        for n in -2..=2 {
            let sp = f.engine.space(&n3, &f.kg, n).unwrap();
            let prev = f.engine.coboundary(&n3, &f.kg, n - 1).unwrap();
            for i in 0..sp.dim() {
                let c = sp.basis_class(i);
                let mut rep = c.rep.clone();
                let bcol = prev.column(i % prev.cols().max(1));
                for (r, b) in rep.iter_mut().zip(bcol) {
                    *r = add_mod(*r, b, 3);
                }
                let shifted = sp.class_of(rep).unwrap();
                assert_eq!(shifted.coords, c.coords);
                let a = corestriction(&f.engine, &c, &w).unwrap();
                let b = corestriction(&f.engine, &shifted, &w).unwrap();
                assert_eq!(a.coords, b.coords);
                let a = conjugation(&f.engine, 2, &c).unwrap();
                let b = conjugation(&f.engine, 2, &shifted).unwrap();
                assert_eq!(a.coords, b.coords);
            }
        }
    }

    #[test]
    fn cor_independent_of_coset_reps() {
        let f = fixture();
        let w = Subgroup::whole(&f.g);
        let n3 = Subgroup::generated(&f.g, &[1]);
        for n in -2..=2 {
            let sp = f.engine.space(&n3, &f.kg, n).unwrap();
            for i in 0..sp.dim() {
                let c = sp.basis_class(i);
                let a = corestriction(&f.engine, &c, &w).unwrap();
                // {a, ba} instead of {e, b}
                let other = [1, f.g.mul(2, 1)];
                let b = corestriction_with_reps(&f.engine, &c, &w, &other).unwrap();
                assert_eq!(a.coords, b.coords);
            }
        }
    }
}
