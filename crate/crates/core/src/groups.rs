//! Finite groups as dense Cayley tables, plus subgroups, cosets, double cosets,
//! conjugacy classes and actions of one group on another by automorphisms.
//!
//! Elements are indices `0..n` with the identity at index 0. Every choice of
//! representative (class, coset, double coset, orbit) is the least index in
//! its set, so all downstream bases are reproducible.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest group order accepted by the permutation-closure constructor.
pub const DEFAULT_CLOSURE_BOUND: usize = 512;

pub struct FiniteGroup {
    name: String,
    n: usize,
    table: Vec<usize>,
    inv: Vec<usize>,
    labels: Vec<String>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.n)
    }
}

impl FiniteGroup {
    /// Validates a Cayley table and relabels it so the identity sits at index 0.
    pub fn from_cayley_table(
        name: impl Into<String>,
        rows: &[Vec<usize>],
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty Cayley table".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::InvalidGroup(format!("row {i} has length {} != {n}", r.len())));
            }
            let mut seen = vec![false; n];
            for &x in r {
                if x >= n || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidGroup(format!("row {i} is not a permutation of 0..{n}")));
                }
            }
        }
        for c in 0..n {
            let mut seen = vec![false; n];
            for r in rows {
                if std::mem::replace(&mut seen[r[c]], true) {
                    return Err(Error::InvalidGroup(format!("column {c} repeats an entry")));
                }
            }
        }
        let Some(e) = (0..n).find(|&e| (0..n).all(|x| rows[e][x] == x && rows[x][e] == x)) else {
            return Err(Error::InvalidGroup("no identity element".into()));
        };
        let triples: Box<dyn Iterator<Item = (usize, usize, usize)>> = if n <= 64 {
            Box::new((0..n).flat_map(move |a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c)))))
        } else {
            // Deterministic sample of triples.
            Box::new((0..20_000usize).map(move |t| {
                let h = t.wrapping_mul(2_654_435_761) ^ (t >> 3);
                (h % n, (h / n) % n, (h / (n * n) + t) % n)
            }))
        };
        for (a, b, c) in triples {
            if rows[rows[a][b]][c] != rows[a][rows[b][c]] {
                return Err(Error::InvalidGroup(format!("not associative at ({a}, {b}, {c})")));
            }
        }
        // Swap e <-> 0.
        let relabel = |x: usize| {
            if x == e {
                0
            } else if x == 0 {
                e
            } else {
                x
            }
        };
        let mut table = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                table[relabel(a) * n + relabel(b)] = relabel(rows[a][b]);
            }
        }
        let mut inv = vec![0; n];
        for a in 0..n {
            inv[a] = (0..n).find(|&b| table[a * n + b] == 0).expect("Latin square has inverses");
        }
        let labels = match labels {
            Some(l) if l.len() == n => (0..n).map(|i| l[relabel(i)].clone()).collect(),
            Some(_) => return Err(Error::InvalidGroup("label count differs from order".into())),
            None => (0..n).map(|i| if i == 0 { "e".to_string() } else { format!("g{i}") }).collect(),
        };
        Ok(FiniteGroup {
            name: name.into(),
            n,
            table,
            inv,
            labels,
        })
    }

    /// Closes a set of permutations (one-line image notation) under composition.
    ///
    /// The product `x * y` is `x ∘ y` (apply `y` first). Elements are numbered in
    /// breadth-first order from the identity using right multiplication by the
    /// generators; labels are words in `a, b, c, ...`.
    pub fn from_permutations(name: impl Into<String>, gens: &[Vec<usize>], bound: usize) -> Result<Self> {
        let degree = gens.first().map_or(0, |g| g.len());
        for g in gens {
            if g.len() != degree {
                return Err(Error::InvalidGroup("generators act on different point sets".into()));
            }
            let mut seen = vec![false; degree];
            for &x in g {
                if x >= degree || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidGroup(format!("{g:?} is not a permutation")));
                }
            }
        }
        let ident: Vec<usize> = (0..degree).collect();
        let compose = |x: &[usize], y: &[usize]| -> Vec<usize> { y.iter().map(|&i| x[i]).collect() };
        let mut elems = vec![ident.clone()];
        let mut words = vec![String::new()];
        let mut index = std::collections::HashMap::new();
        index.insert(ident, 0usize);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (gi, g) in gens.iter().enumerate() {
                let prod = compose(&elems[i], g);
                if !index.contains_key(&prod) {
                    if elems.len() >= bound {
                        return Err(Error::InvalidGroup(format!("closure exceeds the bound of {bound} elements")));
                    }
                    index.insert(prod.clone(), elems.len());
                    let mut w = words[i].clone();
                    w.push((b'a' + (gi as u8 % 26)) as char);
                    words.push(w);
                    queue.push_back(elems.len());
                    elems.push(prod);
                }
            }
        }
        let n = elems.len();
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).map(|b| index[&compose(&elems[a], &elems[b])]).collect())
            .collect();
        let labels = words.iter().map(|w| compress_word(w)).collect();
        Self::from_cayley_table(name, &rows, Some(labels))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `h g h^-1`.
    #[inline]
    pub fn conj(&self, h: usize, g: usize) -> usize {
        self.mul(self.mul(h, g), self.inv[h])
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn element_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn pow(&self, g: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, g))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Least-index generator when the group is cyclic.
    pub fn cyclic_generator(&self) -> Option<usize> {
        (0..self.n).find(|&g| self.element_order(g) == self.n)
    }

    pub fn cayley_rows(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|a| (0..self.n).map(|b| self.mul(a, b)).collect()).collect()
    }
}

fn compress_word(w: &str) -> String {
    if w.is_empty() {
        return "e".into();
    }
    let mut out = String::new();
    let chars: Vec<char> = w.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut j = i;
        while j < chars.len() && chars[j] == c {
            j += 1;
        }
        out.push(c);
        if j - i > 1 {
            out.push_str(&format!("^{}", j - i));
        }
        i = j;
    }
    out
}

/// A subgroup stored as a sorted member list with a membership mask.
#[derive(Clone)]
pub struct Subgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent) && self.members == other.members
    }
}

impl Eq for Subgroup {}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.members.iter().map(|&g| self.parent.label(g)).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

impl Subgroup {
    pub fn new(parent: &Arc<FiniteGroup>, members: &[usize]) -> Result<Self> {
        let n = parent.order();
        let mut mask = vec![false; n];
        for &g in members {
            if g >= n {
                return Err(Error::NotSubgroup(format!("element {g} out of range")));
            }
            mask[g] = true;
        }
        if !mask[0] {
            return Err(Error::NotSubgroup("missing identity".into()));
        }
        let members: Vec<usize> = (0..n).filter(|&g| mask[g]).collect();
        for &a in &members {
            if !mask[parent.inv(a)] {
                return Err(Error::NotSubgroup("not closed under inverses".into()));
            }
            for &b in &members {
                if !mask[parent.mul(a, b)] {
                    return Err(Error::NotSubgroup("not closed under products".into()));
                }
            }
        }
        Ok(Subgroup {
            parent: parent.clone(),
            members,
            mask,
        })
    }

    pub fn whole(parent: &Arc<FiniteGroup>) -> Self {
        Subgroup {
            parent: parent.clone(),
            members: (0..parent.order()).collect(),
            mask: vec![true; parent.order()],
        }
    }

    pub fn trivial(parent: &Arc<FiniteGroup>) -> Self {
        let mut mask = vec![false; parent.order()];
        mask[0] = true;
        Subgroup {
            parent: parent.clone(),
            members: vec![0],
            mask,
        }
    }

    /// Subgroup generated by the given elements.
    pub fn generated(parent: &Arc<FiniteGroup>, gens: &[usize]) -> Self {
        let n = parent.order();
        let mut mask = vec![false; n];
        mask[0] = true;
        let mut members = vec![0];
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            for &g in gens {
                let y = parent.mul(x, g);
                if !mask[y] {
                    mask[y] = true;
                    members.push(y);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        Subgroup {
            parent: parent.clone(),
            members,
            mask,
        }
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn index(&self) -> usize {
        self.parent.order() / self.members.len()
    }

    #[inline]
    pub fn contains(&self, g: usize) -> bool {
        self.mask[g]
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent) && self.members.iter().all(|&g| other.contains(g))
    }

    pub fn is_whole(&self) -> bool {
        self.members.len() == self.parent.order()
    }

    /// `g H g^-1`.
    pub fn conjugate(&self, g: usize) -> Subgroup {
        let mut members: Vec<usize> = self.members.iter().map(|&h| self.parent.conj(g, h)).collect();
        members.sort_unstable();
        let mut mask = vec![false; self.parent.order()];
        for &m in &members {
            mask[m] = true;
        }
        Subgroup {
            parent: self.parent.clone(),
            members,
            mask,
        }
    }

    pub fn intersect(&self, other: &Subgroup) -> Subgroup {
        assert!(Arc::ptr_eq(&self.parent, &other.parent));
        let members: Vec<usize> = self.members.iter().copied().filter(|&g| other.contains(g)).collect();
        let mut mask = vec![false; self.parent.order()];
        for &m in &members {
            mask[m] = true;
        }
        Subgroup {
            parent: self.parent.clone(),
            members,
            mask,
        }
    }

    /// Least-index representatives of the left cosets `gH` inside `within`.
    pub fn left_coset_reps_in(&self, within: &Subgroup) -> Vec<usize> {
        let g = &self.parent;
        let mut seen = vec![false; g.order()];
        let mut reps = Vec::new();
        for &x in within.members() {
            if seen[x] {
                continue;
            }
            reps.push(x);
            for &h in &self.members {
                seen[g.mul(x, h)] = true;
            }
        }
        reps
    }

    /// Least-index representatives of the left cosets `gH` in the parent group.
    pub fn left_coset_reps(&self) -> Vec<usize> {
        self.left_coset_reps_in(&Subgroup::whole(&self.parent))
    }

    /// Decomposition of the parent group into right cosets `H c`.
    pub fn right_cosets(&self) -> RightCosets {
        let g = &self.parent;
        let n = g.order();
        let mut coset_of = vec![usize::MAX; n];
        let mut factor = vec![0; n];
        let mut reps = Vec::new();
        for x in 0..n {
            if coset_of[x] != usize::MAX {
                continue;
            }
            let ci = reps.len();
            reps.push(x);
            for &h in &self.members {
                let y = g.mul(h, x);
                coset_of[y] = ci;
                factor[y] = h;
            }
        }
        RightCosets {
            reps,
            coset_of,
            factor,
        }
    }

    /// The subgroup as a group in its own right, with the embedding of its elements.
    pub fn as_group(&self) -> (FiniteGroup, Vec<usize>) {
        let pos = |x: usize| self.members.binary_search(&x).expect("closed");
        let rows: Vec<Vec<usize>> = self
            .members
            .iter()
            .map(|&a| self.members.iter().map(|&b| pos(self.parent.mul(a, b))).collect())
            .collect();
        let labels = self.members.iter().map(|&g| self.parent.label(g).to_string()).collect();
        let grp = FiniteGroup::from_cayley_table(format!("{}<{}>", self.parent.name(), self.order()), &rows, Some(labels))
            .expect("subgroup table is a group");
        (grp, self.members.clone())
    }
}

/// `G = ⊔ H c`; every `x` factors uniquely as `factor[x] * reps[coset_of[x]]`.
#[derive(Clone, Debug)]
pub struct RightCosets {
    pub reps: Vec<usize>,
    pub coset_of: Vec<usize>,
    pub factor: Vec<usize>,
}

/// Least-index representatives `x` with `G = ⊔ H x K`.
pub fn double_coset_reps(h: &Subgroup, k: &Subgroup) -> Vec<usize> {
    let g = h.parent();
    let mut seen = vec![false; g.order()];
    let mut reps = Vec::new();
    for x in 0..g.order() {
        if seen[x] {
            continue;
        }
        reps.push(x);
        for &a in h.members() {
            let ax = g.mul(a, x);
            for &b in k.members() {
                seen[g.mul(ax, b)] = true;
            }
        }
    }
    reps
}

/// Every subgroup of a small group, sorted by order and then by member list.
pub fn all_subgroups(group: &Arc<FiniteGroup>) -> Vec<Subgroup> {
    let mut found: Vec<Subgroup> = Vec::new();
    let mut frontier: Vec<Subgroup> = Vec::new();
    for g in 0..group.order() {
        let s = Subgroup::generated(group, &[g]);
        if !found.contains(&s) {
            found.push(s.clone());
            frontier.push(s);
        }
    }
    while let Some(s) = frontier.pop() {
        for g in 0..group.order() {
            if s.contains(g) {
                continue;
            }
            let mut gens = s.members().to_vec();
            gens.push(g);
            let t = Subgroup::generated(group, &gens);
            if !found.contains(&t) {
                found.push(t.clone());
                frontier.push(t);
            }
        }
    }
    found.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.members().cmp(b.members())));
    found
}

#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    pub rep: usize,
    pub members: Vec<usize>,
    pub centralizer: Subgroup,
}

/// Conjugacy classes ordered by least-index representative.
pub fn conjugacy_data(group: &Arc<FiniteGroup>) -> Vec<ConjugacyClass> {
    let action = GroupAction::conjugation(group);
    action
        .orbit_reps()
        .into_iter()
        .map(|rep| {
            let (members, centralizer) = action.orbit_stabilizer(rep);
            ConjugacyClass {
                rep,
                members,
                centralizer,
            }
        })
        .collect()
}

/// An action of `actor` on `target` by group automorphisms.
#[derive(Clone)]
pub struct GroupAction {
    actor: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    act: Vec<Vec<usize>>,
}

impl fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupAction({} on {})", self.actor.name(), self.target.name())
    }
}

impl GroupAction {
    /// Validates the table `act[h][g] = h·g`.
    pub fn new(actor: &Arc<FiniteGroup>, target: &Arc<FiniteGroup>, act: Vec<Vec<usize>>) -> Result<Self> {
        let (h_n, g_n) = (actor.order(), target.order());
        if act.len() != h_n || act.iter().any(|r| r.len() != g_n) {
            return Err(Error::InvalidGroup("action table has the wrong shape".into()));
        }
        for (h, perm) in act.iter().enumerate() {
            let mut seen = vec![false; g_n];
            for &x in perm {
                if x >= g_n || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidGroup(format!("action of {h} is not a permutation")));
                }
            }
            for x in 0..g_n {
                for y in 0..g_n {
                    if perm[target.mul(x, y)] != target.mul(perm[x], perm[y]) {
                        return Err(Error::InvalidGroup(format!("action of {h} is not an automorphism")));
                    }
                }
            }
        }
        if act[0].iter().enumerate().any(|(i, &x)| i != x) {
            return Err(Error::InvalidGroup("identity does not act trivially".into()));
        }
        for a in 0..h_n {
            for b in 0..h_n {
                let ab = actor.mul(a, b);
                if (0..g_n).any(|x| act[ab][x] != act[a][act[b][x]]) {
                    return Err(Error::InvalidGroup("action is not a homomorphism".into()));
                }
            }
        }
        Ok(GroupAction {
            actor: actor.clone(),
            target: target.clone(),
            act,
        })
    }

    pub fn conjugation(group: &Arc<FiniteGroup>) -> Self {
        let n = group.order();
        let act = (0..n).map(|h| (0..n).map(|g| group.conj(h, g)).collect()).collect();
        GroupAction {
            actor: group.clone(),
            target: group.clone(),
            act,
        }
    }

    pub fn trivial(actor: &Arc<FiniteGroup>, target: &Arc<FiniteGroup>) -> Self {
        let act = (0..actor.order()).map(|_| (0..target.order()).collect()).collect();
        GroupAction {
            actor: actor.clone(),
            target: target.clone(),
            act,
        }
    }

    pub fn actor(&self) -> &Arc<FiniteGroup> {
        &self.actor
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    #[inline]
    pub fn apply(&self, h: usize, g: usize) -> usize {
        self.act[h][g]
    }

    /// Sorted orbit of `g` and its stabilizer.
    pub fn orbit_stabilizer(&self, g: usize) -> (Vec<usize>, Subgroup) {
        let mut orbit: Vec<usize> = (0..self.actor.order()).map(|h| self.apply(h, g)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        let stab: Vec<usize> = (0..self.actor.order()).filter(|&h| self.apply(h, g) == g).collect();
        let stab = Subgroup::new(&self.actor, &stab).expect("stabilizers are subgroups");
        (orbit, stab)
    }

    /// Least-index orbit representatives in increasing order.
    pub fn orbit_reps(&self) -> Vec<usize> {
        let mut seen = vec![false; self.target.order()];
        let mut reps = Vec::new();
        for g in 0..self.target.order() {
            if seen[g] {
                continue;
            }
            reps.push(g);
            for h in 0..self.actor.order() {
                seen[self.apply(h, g)] = true;
            }
        }
        reps
    }

    /// Orbit index of each target element, relative to `reps`.
    pub fn orbit_index(&self, reps: &[usize]) -> Vec<usize> {
        let mut idx = vec![usize::MAX; self.target.order()];
        for (i, &r) in reps.iter().enumerate() {
            for h in 0..self.actor.order() {
                idx[self.apply(h, r)] = i;
            }
        }
        idx
    }
}

/// The data `(k, y, V)` attached to a double coset representative `x` in the
/// product formula: `g_k = ^y g_i · ^{yx} g_j` and `V = ^{yx}H_j ∩ ^y H_i`.
#[derive(Clone, Debug)]
pub struct OrbitProductDatum {
    pub i: usize,
    pub j: usize,
    pub x: usize,
    pub k: usize,
    pub y: usize,
    pub v: Subgroup,
}

/// Finds `k`, the least `y` and `V` for the double coset representative `x`.
pub fn locate_product_datum(
    action: &GroupAction,
    reps: &[usize],
    stabilizers: &[Subgroup],
    i: usize,
    j: usize,
    x: usize,
) -> Result<OrbitProductDatum> {
    let (h, g) = (action.actor(), action.target());
    if i >= reps.len() || j >= reps.len() {
        return Err(Error::Invalid(format!("orbit index out of range ({i}, {j})")));
    }
    if x >= h.order() {
        return Err(Error::Invalid(format!("{x} is not an element of the acting group")));
    }
    let u = g.mul(reps[i], action.apply(x, reps[j]));
    let orbit_of = action.orbit_index(reps);
    let k = orbit_of[u];
    let y = (0..h.order())
        .find(|&y| action.apply(y, u) == reps[k])
        .ok_or_else(|| Error::Inconsistent("no y maps the product into its orbit representative".into()))?;
    let yx = h.mul(y, x);
    debug_assert_eq!(g.mul(action.apply(y, reps[i]), action.apply(yx, reps[j])), reps[k]);
    let v = stabilizers[j].conjugate(yx).intersect(&stabilizers[i].conjugate(y));
    if !v.is_subgroup_of(&stabilizers[k]) {
        return Err(Error::Inconsistent("V is not contained in H_k".into()));
    }
    Ok(OrbitProductDatum { i, j, x, k, y, v })
}

/// Serialized group description accepted by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub cayley_table: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub perm_generators: Option<Vec<Vec<usize>>>,
}

pub fn build_group(spec: &GroupSpec) -> Result<FiniteGroup> {
    let g = match (&spec.cayley_table, &spec.perm_generators) {
        (Some(t), None) => FiniteGroup::from_cayley_table(spec.name.clone(), t, None)?,
        (None, Some(gens)) => FiniteGroup::from_permutations(spec.name.clone(), gens, DEFAULT_CLOSURE_BOUND)?,
        _ => {
            return Err(Error::InvalidGroup(
                "exactly one of cayley_table and perm_generators must be given".into(),
            ))
        }
    };
    if let Some(order) = spec.order {
        if order != g.order() {
            return Err(Error::InvalidGroup(format!("declared order {order} but the group has order {}", g.order())));
        }
    }
    Ok(g)
}

pub fn cyclic(n: usize) -> FiniteGroup {
    let rows: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    let labels = (0..n)
        .map(|i| match i {
            0 => "e".to_string(),
            1 => "a".to_string(),
            _ => format!("a^{i}"),
        })
        .collect();
    FiniteGroup::from_cayley_table(format!("C{n}"), &rows, Some(labels)).expect("cyclic group")
}

pub fn klein_four() -> FiniteGroup {
    FiniteGroup::from_permutations("C2xC2", &[vec![1, 0, 2, 3], vec![0, 1, 3, 2]], 8).expect("Klein four-group")
}

/// `S_3` generated by `a = (0 1 2)` and `b = (0 1)`.
pub fn symmetric3() -> FiniteGroup {
    FiniteGroup::from_permutations("S3", &[vec![1, 2, 0], vec![1, 0, 2]], 8).expect("S3")
}

pub fn dihedral8() -> FiniteGroup {
    FiniteGroup::from_permutations("D4", &[vec![1, 2, 3, 0], vec![0, 3, 2, 1]], 16).expect("D4")
}

pub fn quaternion8() -> FiniteGroup {
    // Elements (sign, unit) with unit in {1, i, j, k}; index = 4 * (sign bit) + unit.
    let unit_mul = |a: usize, b: usize| -> (bool, usize) {
        match (a, b) {
            (0, x) | (x, 0) => (false, x),
            (x, y) if x == y => (true, 0),
            (1, 2) => (false, 3),
            (2, 3) => (false, 1),
            (3, 1) => (false, 2),
            (2, 1) => (true, 3),
            (3, 2) => (true, 1),
            (1, 3) => (true, 2),
            _ => unreachable!(),
        }
    };
    let rows: Vec<Vec<usize>> = (0..8)
        .map(|a| {
            (0..8)
                .map(|b| {
                    let (neg, u) = unit_mul(a % 4, b % 4);
                    let sign = (a / 4 + b / 4 + neg as usize) % 2;
                    sign * 4 + u
                })
                .collect()
        })
        .collect();
    let labels = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"].iter().map(|s| s.to_string()).collect();
    FiniteGroup::from_cayley_table("Q8", &rows, Some(labels)).expect("Q8")
}

/// Built-in library: `C1`..`C12`, `C2xC2` (`V4`), `S3`, `D4` (`D8`), `Q8`.
pub fn builtin(name: &str) -> Option<FiniteGroup> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "c2xc2" | "v4" | "k4" | "klein" => Some(klein_four()),
        "s3" | "sym3" => Some(symmetric3()),
        "d4" | "d8" => Some(dihedral8()),
        "q8" => Some(quaternion8()),
        _ => {
            let n: usize = lower.strip_prefix('c')?.parse().ok()?;
            (1..=12).contains(&n).then(|| cyclic(n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> Arc<FiniteGroup> {
        Arc::new(symmetric3())
    }

    #[test]
    fn builds_small_groups() {
        assert_eq!(symmetric3().order(), 6);
        assert_eq!(FiniteGroup::from_permutations("C3", &[vec![1, 2, 0]], 8).unwrap().order(), 3);
        let v4 = klein_four();
        assert_eq!(v4.order(), 4);
        assert!(v4.is_abelian());
        assert!(v4.cyclic_generator().is_none());
        assert_eq!(dihedral8().order(), 8);
        assert_eq!(quaternion8().order(), 8);
        assert!(!quaternion8().is_abelian());
    }

    #[test]
    fn s3_labels_follow_generators() {
        let g = symmetric3();
        assert_eq!(g.labels(), &["e", "a", "b", "a^2", "ab", "ba"]);
        let a = 1;
        let b = 2;
        assert_eq!(g.element_order(a), 3);
        assert_eq!(g.element_order(b), 2);
        // ab = ba^2
        assert_eq!(g.mul(a, b), g.mul(b, g.mul(a, a)));
    }

    #[test]
    fn rejects_bad_tables() {
        let not_latin = vec![vec![0, 1], vec![0, 1]];
        assert!(FiniteGroup::from_cayley_table("x", &not_latin, None).is_err());
        // A Latin square with identity that is not associative (order 5 loop).
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(FiniteGroup::from_cayley_table("loop", &loop5, None).is_err());
        assert!(FiniteGroup::from_permutations("big", &[vec![1, 2, 3, 4, 5, 0], vec![1, 0, 2, 3, 4, 5]], 100).is_err());
    }

    #[test]
    fn identity_is_relabelled_to_zero() {
        // Z/2 with identity written as 1.
        let t = vec![vec![1, 0], vec![0, 1]];
        let g = FiniteGroup::from_cayley_table("c2", &t, None).unwrap();
        assert_eq!(g.mul(0, 1), 1);
        assert_eq!(g.mul(1, 1), 0);
    }

    #[test]
    fn s3_conjugacy_data() {
        let g = s3();
        let classes = conjugacy_data(&g);
        let reps: Vec<usize> = classes.iter().map(|c| c.rep).collect();
        assert_eq!(reps, vec![0, 1, 2]);
        let orders: Vec<usize> = classes.iter().map(|c| c.centralizer.order()).collect();
        assert_eq!(orders, vec![6, 3, 2]);
        for c in &classes {
            assert_eq!(c.members.len() * c.centralizer.order(), 6);
        }
        assert_eq!(classes[1].centralizer.members(), &[0, 1, 3]);
    }

    #[test]
    fn abelian_classes_are_singletons() {
        let g = Arc::new(klein_four());
        let classes = conjugacy_data(&g);
        assert_eq!(classes.len(), 4);
        assert!(classes.iter().all(|c| c.members.len() == 1 && c.centralizer.is_whole()));
    }

    #[test]
    fn orbit_stabilizer_examples() {
        let g = s3();
        let (orbit, stab) = GroupAction::conjugation(&g).orbit_stabilizer(1);
        assert_eq!(orbit, vec![1, 3]);
        assert_eq!(stab.order(), 3);
        let triv = GroupAction::trivial(&g, &g);
        let (orbit, stab) = triv.orbit_stabilizer(4);
        assert_eq!(orbit, vec![4]);
        assert!(stab.is_whole());
        for x in 0..6 {
            let (o, s) = GroupAction::conjugation(&g).orbit_stabilizer(x);
            assert_eq!(o.len() * s.order(), 6);
        }
    }

    #[test]
    fn coset_and_double_coset_reps() {
        let g = s3();
        let whole = Subgroup::whole(&g);
        let triv = Subgroup::trivial(&g);
        let n = Subgroup::generated(&g, &[1]);
        assert_eq!(whole.left_coset_reps(), vec![0]);
        assert_eq!(triv.left_coset_reps(), (0..6).collect::<Vec<_>>());
        assert_eq!(n.left_coset_reps(), vec![0, 2]);
        assert_eq!(double_coset_reps(&whole, &whole), vec![0]);
        assert_eq!(double_coset_reps(&n, &n), vec![0, 2]);
        assert_eq!(double_coset_reps(&triv, &triv), (0..6).collect::<Vec<_>>());
        let h3 = Subgroup::generated(&g, &[2]);
        let d = double_coset_reps(&h3, &h3);
        let total: usize = d
            .iter()
            .map(|&x| {
                let mut s: Vec<usize> = h3
                    .members()
                    .iter()
                    .flat_map(|&a| h3.members().iter().map(move |&b| (a, b)))
                    .map(|(a, b)| g.mul(g.mul(a, x), b))
                    .collect();
                s.sort_unstable();
                s.dedup();
                s.len()
            })
            .sum();
        assert_eq!(total, 6);
    }

    #[test]
    fn right_cosets_factor_uniquely() {
        let g = s3();
        let n = Subgroup::generated(&g, &[1]);
        let rc = n.right_cosets();
        assert_eq!(rc.reps.len(), 2);
        for x in 0..6 {
            assert!(n.contains(rc.factor[x]));
            assert_eq!(g.mul(rc.factor[x], rc.reps[rc.coset_of[x]]), x);
        }
    }

    #[test]
    fn s3_subgroup_lattice() {
        let subs = all_subgroups(&s3());
        let orders: Vec<usize> = subs.iter().map(|s| s.order()).collect();
        assert_eq!(orders, vec![1, 2, 2, 2, 3, 6]);
    }

    #[test]
    fn product_datum_examples() {
        let g = s3();
        let action = GroupAction::conjugation(&g);
        let classes = conjugacy_data(&g);
        let reps: Vec<usize> = classes.iter().map(|c| c.rep).collect();
        let stabs: Vec<Subgroup> = classes.iter().map(|c| c.centralizer.clone()).collect();
        for x in 0..6 {
            let d = locate_product_datum(&action, &reps, &stabs, 0, 0, x).unwrap();
            assert_eq!(d.k, 0);
        }
        // a * a = a^2 is conjugate to a by b.
        let d = locate_product_datum(&action, &reps, &stabs, 1, 1, 0).unwrap();
        assert_eq!(d.k, 1);
        let brute: Vec<usize> = (0..6).filter(|&y| g.conj(y, g.mul(1, 1)) == 1).collect();
        assert_eq!(d.y, brute[0]);
        assert_eq!(d.y, 2);
        let d = locate_product_datum(&action, &reps, &stabs, 1, 2, 0).unwrap();
        assert_eq!(d.k, 2);
        assert!(d.v.is_subgroup_of(&stabs[2]));
    }

    #[test]
    fn product_datum_y_ambiguity() {
        let g = s3();
        let action = GroupAction::conjugation(&g);
        let classes = conjugacy_data(&g);
        let reps: Vec<usize> = classes.iter().map(|c| c.rep).collect();
        let stabs: Vec<Subgroup> = classes.iter().map(|c| c.centralizer.clone()).collect();
        for i in 0..3 {
            for j in 0..3 {
                for x in double_coset_reps(&stabs[i], &stabs[j]) {
                    let d = locate_product_datum(&action, &reps, &stabs, i, j, x).unwrap();
                    for &h in stabs[d.k].members() {
                        let y2 = g.mul(h, d.y);
                        let lhs = g.mul(g.conj(y2, reps[i]), g.conj(g.mul(y2, x), reps[j]));
                        assert_eq!(lhs, reps[d.k]);
                    }
                }
            }
        }
    }

    #[test]
    fn builtin_library() {
        for name in ["C1", "C7", "C12", "C2xC2", "S3", "D4", "Q8"] {
            assert!(builtin(name).is_some(), "{name}");
        }
        assert!(builtin("C13").is_none());
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn group_spec_json() {
        let spec: GroupSpec =
            serde_json::from_str(r#"{"name":"S3","order":6,"perm_generators":[[1,2,0],[1,0,2]]}"#).unwrap();
        assert_eq!(build_group(&spec).unwrap().order(), 6);
        let bad: GroupSpec = serde_json::from_str(r#"{"name":"x","order":5,"perm_generators":[[1,0]]}"#).unwrap();
        assert!(build_group(&bad).is_err());
    }
}
