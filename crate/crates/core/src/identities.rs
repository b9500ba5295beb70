//! Exhaustive checks of the standard identities between restriction,
//! corestriction, conjugation, `θ_a*`, `π_a*` and cup products, run over the
//! whole subgroup lattice of a group on every basis class in a degree range.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cup::CupEngine;
use crate::error::Result;
use crate::groups::{all_subgroups, double_coset_reps, Subgroup};
use crate::kgmodules::{conjugation_module, multiplication_pairing, trivial_module, KGModule, ModulePairing};
use crate::linalg::{add_mod, mul_mod};
use crate::maps::{conjugation, corestriction, pi_push, restriction, theta_push};
use crate::resolutions::{CohomologyClass, TateEngine};

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

struct Tally {
    name: &'static str,
    cases: usize,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            failure: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            name: self.name.to_string(),
            passed: self.failure.is_none(),
            cases: self.cases,
            detail: self.failure.unwrap_or_else(|| format!("{} cases", self.cases)),
        }
    }
}

fn same(a: &CohomologyClass, b: &CohomologyClass) -> bool {
    a.degree() == b.degree() && a.space.subgroup().members() == b.space.subgroup().members() && a.coords == b.coords
}

fn add(a: &CohomologyClass, b: &CohomologyClass) -> CohomologyClass {
    let p = a.space.p();
    let coords = a.coords.iter().zip(&b.coords).map(|(&x, &y)| add_mod(x, y, p)).collect();
    a.space.class(coords)
}

fn scaled(a: &CohomologyClass, c: u32) -> Vec<u32> {
    a.coords.iter().map(|&x| mul_mod(x, c, a.space.p())).collect()
}

fn members(s: &Subgroup) -> &[usize] {
    s.members()
}

/// Runs every identity for `n ∈ [lo, hi]`; bilinear identities use pairs whose
/// total degree also lies in `[lo, hi]`.
pub fn identity_suite(cup: &CupEngine, degrees: (i32, i32)) -> Result<Vec<IdentityCheck>> {
    let tate = cup.tate();
    let group = tate.group().clone();
    let p = tate.p();
    let k = Arc::new(trivial_module(&group, p)?);
    let kk = ModulePairing::trivial(&k)?;
    let mu = multiplication_pairing(&group, p)?;
    let kg = mu.left.clone();
    let modules: Vec<(&Arc<KGModule>, &ModulePairing)> = vec![(&k, &kk), (&kg, &mu)];
    let subs = all_subgroups(&group);
    let whole = Subgroup::whole(&group);
    let (lo, hi) = degrees;
    let basis = |sub: &Subgroup, m: &Arc<KGModule>, n: i32| -> Result<Vec<CohomologyClass>> {
        let sp = tate.space(sub, m, n)?;
        Ok((0..sp.dim()).map(|i| sp.basis_class(i)).collect())
    };
    let pairs: Vec<(i32, i32)> = (lo..=hi)
        .flat_map(|i| (lo..=hi).map(move |j| (i, j)))
        .filter(|&(i, j)| (lo..=hi).contains(&(i + j)))
        .collect();

    let mut t_comp = Tally::new("conj_composition");
    let mut t_inner = Tally::new("conj_inner_trivial");
    let mut t_corres = Tally::new("cor_after_res");
    let mut t_rest = Tally::new("res_transitive");
    let mut t_cort = Tally::new("cor_transitive");
    let mut t_cres = Tally::new("conj_res_commute");
    let mut t_ccor = Tally::new("conj_cor_commute");
    let mut t_resm = Tally::new("res_multiplicative");
    let mut t_frl = Tally::new("frobenius_left");
    let mut t_frr = Tally::new("frobenius_right");
    let mut t_conjm = Tally::new("conj_multiplicative");
    let mut t_mackey = Tally::new("mackey_double_coset");
    let mut t_tconj = Tally::new("theta_conj_equivariance");
    let mut t_tmul = Tally::new("theta_multiplicative");
    let mut t_tcomm = Tally::new("theta_pi_commute_res_cor");
    let mut t_kron = Tally::new("pi_theta_kronecker");

    for n in lo..=hi {
        for &(m, _) in &modules {
            for h in &subs {
                let cls = basis(h, m, n)?;
                for beta in &cls {
                    for g1 in 0..group.order() {
                        let c1 = conjugation(tate, g1, beta)?;
                        if h.contains(g1) {
                            t_inner.check(same(&c1, beta), || format!("g={g1} on {:?} degree {n}", members(h)));
                        }
                        for g2 in 0..group.order() {
                            let lhs = conjugation(tate, g1, &conjugation(tate, g2, beta)?)?;
                            let rhs = conjugation(tate, group.mul(g1, g2), beta)?;
                            t_comp.check(same(&lhs, &rhs), || format!("g1={g1} g2={g2} on {:?} degree {n}", members(h)));
                        }
                    }
                }
                for kk_ in subs.iter().filter(|s| s.is_subgroup_of(h)) {
                    let index = (h.order() / kk_.order()) as u32 % p;
                    for beta in &cls {
                        let r = restriction(tate, beta, kk_)?;
                        let back = corestriction(tate, &r, h)?;
                        t_corres.check(back.coords == scaled(beta, index), || {
                            format!("{:?} ≤ {:?} degree {n}", members(kk_), members(h))
                        });
                        for g in 0..group.order() {
                            let lhs = conjugation(tate, g, &r)?;
                            let rhs = restriction(tate, &conjugation(tate, g, beta)?, &kk_.conjugate(g))?;
                            t_cres.check(same(&lhs, &rhs), || format!("g={g} {:?} ≤ {:?}", members(kk_), members(h)));
                        }
                        for kk2 in subs.iter().filter(|s| s.is_subgroup_of(kk_)) {
                            let lhs = restriction(tate, &r, kk2)?;
                            let rhs = restriction(tate, beta, kk2)?;
                            t_rest.check(same(&lhs, &rhs), || {
                                format!("{:?} ≤ {:?} ≤ {:?}", members(kk2), members(kk_), members(h))
                            });
                        }
                    }
                    for gamma in basis(kk_, m, n)? {
                        let c = corestriction(tate, &gamma, h)?;
                        for g in 0..group.order() {
                            let lhs = conjugation(tate, g, &c)?;
                            let rhs = corestriction(tate, &conjugation(tate, g, &gamma)?, &h.conjugate(g))?;
                            t_ccor.check(same(&lhs, &rhs), || format!("g={g} {:?} ≤ {:?}", members(kk_), members(h)));
                        }
                        for kk2 in subs.iter().filter(|s| s.is_subgroup_of(kk_)) {
                            for delta in basis(kk2, m, n)? {
                                let lhs = corestriction(tate, &corestriction(tate, &delta, kk_)?, h)?;
                                let rhs = corestriction(tate, &delta, h)?;
                                t_cort.check(same(&lhs, &rhs), || {
                                    format!("{:?} ≤ {:?} ≤ {:?}", members(kk2), members(kk_), members(h))
                                });
                            }
                        }
                    }
                }
                // Mackey inside the whole group: res_K cor^G_H = Σ cor^K_{K∩xH} res x*.
                for kk_ in &subs {
                    let reps = double_coset_reps(kk_, h);
                    for beta in &cls {
                        let lhs = restriction(tate, &corestriction(tate, beta, &whole)?, kk_)?;
                        let mut rhs = tate.space(kk_, m, n)?.zero();
                        for &x in &reps {
                            let xh = h.conjugate(x);
                            let v = kk_.intersect(&xh);
                            let term = corestriction(tate, &restriction(tate, &conjugation(tate, x, beta)?, &v)?, kk_)?;
                            rhs = add(&rhs, &term);
                        }
                        t_mackey.check(same(&lhs, &rhs), || format!("H={:?} K={:?} degree {n}", members(h), members(kk_)));
                    }
                }
            }
        }
    }

    for &(i, j) in &pairs {
        for &(m, pair) in &modules {
            for h in &subs {
                let a_cls = basis(h, m, i)?;
                let b_cls = basis(h, m, j)?;
                for a in &a_cls {
                    for b in &b_cls {
                        let prod = cup.cup(a, b, pair)?;
                        for g in 0..group.order() {
                            let lhs = conjugation(tate, g, &prod)?;
                            let rhs = cup.cup(&conjugation(tate, g, a)?, &conjugation(tate, g, b)?, pair)?;
                            t_conjm.check(same(&lhs, &rhs), || format!("g={g} on {:?} degrees ({i},{j})", members(h)));
                        }
                        for kk_ in subs.iter().filter(|s| s.is_subgroup_of(h)) {
                            let lhs = restriction(tate, &prod, kk_)?;
                            let rhs = cup.cup(&restriction(tate, a, kk_)?, &restriction(tate, b, kk_)?, pair)?;
                            t_resm.check(same(&lhs, &rhs), || {
                                format!("{:?} ≤ {:?} degrees ({i},{j})", members(kk_), members(h))
                            });
                        }
                    }
                }
                // Frobenius reciprocity for K ≤ h.
                for kk_ in subs.iter().filter(|s| s.is_subgroup_of(h)) {
                    for b1 in basis(kk_, m, i)? {
                        for a2 in &b_cls {
                            let lhs = corestriction(tate, &cup.cup(&b1, &restriction(tate, a2, kk_)?, pair)?, h)?;
                            let rhs = cup.cup(&corestriction(tate, &b1, h)?, a2, pair)?;
                            t_frl.check(same(&lhs, &rhs), || {
                                format!("{:?} ≤ {:?} degrees ({i},{j})", members(kk_), members(h))
                            });
                        }
                    }
                    for a1 in &a_cls {
                        for b2 in basis(kk_, m, j)? {
                            let lhs = corestriction(tate, &cup.cup(&restriction(tate, a1, kk_)?, &b2, pair)?, h)?;
                            let rhs = cup.cup(a1, &corestriction(tate, &b2, h)?, pair)?;
                            t_frr.check(same(&lhs, &rhs), || {
                                format!("{:?} ≤ {:?} degrees ({i},{j})", members(kk_), members(h))
                            });
                        }
                    }
                }
            }
        }
    }

    // θ and π for the conjugation module, over subgroups of centralizers.
    let centralizes = |v: &Subgroup, a: usize| v.members().iter().all(|&x| group.conj(x, a) == a);
    for n in lo..=hi {
        for v in &subs {
            let alphas = basis(v, &k, n)?;
            let zetas = basis(v, &kg, n)?;
            for a in (0..group.order()).filter(|&a| centralizes(v, a)) {
                for alpha in &alphas {
                    let th = theta_push(tate, a, alpha, &kg)?;
                    for hh in 0..group.order() {
                        let lhs = conjugation(tate, hh, &th)?;
                        let rhs = theta_push(tate, group.conj(hh, a), &conjugation(tate, hh, alpha)?, &kg)?;
                        t_tconj.check(same(&lhs, &rhs), || format!("h={hh} a={a} on {:?} degree {n}", members(v)));
                    }
                    for b in (0..group.order()).filter(|&b| centralizes(v, b)) {
                        let back = pi_push(tate, b, &th, &k)?;
                        let expect = if a == b { alpha.coords.clone() } else { vec![0; alpha.coords.len()] };
                        t_kron.check(back.coords == expect, || format!("a={a} b={b} on {:?} degree {n}", members(v)));
                    }
                }
                for w in subs.iter().filter(|s| s.is_subgroup_of(v)) {
                    for alpha in &alphas {
                        let lhs = restriction(tate, &theta_push(tate, a, alpha, &kg)?, w)?;
                        let rhs = theta_push(tate, a, &restriction(tate, alpha, w)?, &kg)?;
                        t_tcomm.check(same(&lhs, &rhs), || format!("res θ a={a} {:?} ≤ {:?}", members(w), members(v)));
                    }
                    for zeta in &zetas {
                        let lhs = restriction(tate, &pi_push(tate, a, zeta, &k)?, w)?;
                        let rhs = pi_push(tate, a, &restriction(tate, zeta, w)?, &k)?;
                        t_tcomm.check(same(&lhs, &rhs), || format!("res π a={a} {:?} ≤ {:?}", members(w), members(v)));
                    }
                    for beta in basis(w, &k, n)? {
                        let lhs = corestriction(tate, &theta_push(tate, a, &beta, &kg)?, v)?;
                        let rhs = theta_push(tate, a, &corestriction(tate, &beta, v)?, &kg)?;
                        t_tcomm.check(same(&lhs, &rhs), || format!("cor θ a={a} {:?} ≤ {:?}", members(w), members(v)));
                    }
                    for zeta in basis(w, &kg, n)? {
                        let lhs = corestriction(tate, &pi_push(tate, a, &zeta, &k)?, v)?;
                        let rhs = pi_push(tate, a, &corestriction(tate, &zeta, v)?, &k)?;
                        t_tcomm.check(same(&lhs, &rhs), || format!("cor π a={a} {:?} ≤ {:?}", members(w), members(v)));
                    }
                }
            }
        }
    }
    for &(i, j) in &pairs {
        for v in &subs {
            let fixed: Vec<usize> = (0..group.order()).filter(|&a| centralizes(v, a)).collect();
            for alpha in basis(v, &k, i)? {
                for beta in basis(v, &k, j)? {
                    let prod = cup.cup(&alpha, &beta, &kk)?;
                    for &a in &fixed {
                        let ta = theta_push(tate, a, &alpha, &kg)?;
                        for &b in &fixed {
                            let lhs = cup.cup(&ta, &theta_push(tate, b, &beta, &kg)?, &mu)?;
                            let rhs = theta_push(tate, group.mul(a, b), &prod, &kg)?;
                            t_tmul.check(same(&lhs, &rhs), || {
                                format!("a={a} b={b} on {:?} degrees ({i},{j})", members(v))
                            });
                        }
                    }
                }
            }
        }
    }

    Ok([
        t_comp, t_inner, t_corres, t_rest, t_cort, t_cres, t_ccor, t_resm, t_frl, t_frr, t_conjm, t_mackey, t_tconj,
        t_tmul, t_tcomm, t_kron,
    ]
    .into_iter()
    .map(Tally::finish)
    .collect())
}

/// Adds seeded random coboundaries to class representatives and checks that
/// restriction, corestriction and conjugation ignore them.
pub fn coboundary_invariance(tate: &TateEngine, degrees: (i32, i32), samples: usize, seed: u64) -> Result<IdentityCheck> {
    let group = tate.group().clone();
    let p = tate.p();
    let modules = [
        Arc::new(trivial_module(&group, p)?),
        Arc::new(conjugation_module(&group, p)?),
    ];
    let subs = all_subgroups(&group);
    let pairs: Vec<(usize, usize)> = (0..subs.len())
        .flat_map(|a| (0..subs.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| subs[a].is_subgroup_of(&subs[b]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("coboundary_invariance");
    for _ in 0..samples {
        let (a, b) = pairs[rng.gen_range(0..pairs.len())];
        let (small, big) = (&subs[a], &subs[b]);
        let m = &modules[rng.gen_range(0..modules.len())];
        let n = rng.gen_range(degrees.0..=degrees.1);
        let g = rng.gen_range(0..group.order());
        for (sub, target) in [(big, small), (small, big)] {
            let sp = tate.space(sub, m, n)?;
            let coords: Vec<u32> = (0..sp.dim()).map(|_| rng.gen_range(0..p)).collect();
            let class = sp.class(coords);
            let delta = tate.coboundary(sub, m, n - 1)?;
            let c: Vec<u32> = (0..delta.cols()).map(|_| rng.gen_range(0..p)).collect();
            let rep: Vec<u32> = class.rep.iter().zip(delta.mul_vec(&c)).map(|(&x, y)| add_mod(x, y, p)).collect();
            let moved = sp.class_of(rep)?;
            let image = |x: &CohomologyClass| -> Result<CohomologyClass> {
                if target.is_subgroup_of(sub) {
                    restriction(tate, x, target)
                } else {
                    corestriction(tate, x, target)
                }
            };
            let same_map = same(&image(&class)?, &image(&moved)?);
            let same_conj = same(&conjugation(tate, g, &class)?, &conjugation(tate, g, &moved)?);
            tally.check(moved.coords == class.coords && same_map && same_conj, || {
                format!("{:?} -> {:?} degree {n}", members(sub), members(target))
            });
        }
    }
    Ok(tally.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{cyclic, symmetric3};
    use crate::resolutions::{build_resolution, default_window, Backend, SizeBudget};

    fn engine(g: crate::groups::FiniteGroup, p: u32, w: i32) -> CupEngine {
        let g = Arc::new(g);
        let res = build_resolution(&g, p, default_window(w), Backend::Reduced, &SizeBudget::default()).unwrap();
        CupEngine::new(Arc::new(TateEngine::new(res)))
    }

    #[test]
    fn cyclic_suite_passes() {
        let cup = engine(cyclic(3), 3, 3);
        let checks = identity_suite(&cup, (-1, 2)).unwrap();
        assert_eq!(checks.len(), 16);
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
            assert!(c.cases > 0, "{} ran no cases", c.name);
        }
    }

    #[test]
    fn coboundaries_are_invisible() {
        let cup = engine(symmetric3(), 3, 3);
        let a = coboundary_invariance(cup.tate(), (-2, 2), 40, 7).unwrap();
        assert!(a.passed, "{}", a.detail);
        assert_eq!(a.cases, 80);
        assert_eq!(a, coboundary_invariance(cup.tate(), (-2, 2), 40, 7).unwrap());
    }

    #[test]
    fn s3_suite_small_window() {
        let cup = engine(symmetric3(), 3, 2);
        for c in identity_suite(&cup, (0, 1)).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
