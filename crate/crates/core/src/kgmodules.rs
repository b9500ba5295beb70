//! Finite-dimensional modules over the group algebra `kG`, stored as one action
//! matrix per group element.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupAction, Subgroup};
use crate::linalg::{check_prime, FpMatrix};

#[derive(Clone)]
pub struct KGModule {
    group: Arc<FiniteGroup>,
    p: u32,
    dim: usize,
    action: Vec<FpMatrix>,
    name: String,
}

impl fmt::Debug for KGModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KGModule({}, dim {} over F_{} {})", self.name, self.dim, self.p, self.group.name())
    }
}

impl KGModule {
    /// Builds a module from one matrix per group element and checks it is a representation.
    pub fn from_matrices(group: &Arc<FiniteGroup>, p: u32, action: Vec<FpMatrix>, name: impl Into<String>) -> Result<Self> {
        check_prime(p)?;
        let n = group.order();
        if action.len() != n {
            return Err(Error::InvalidModule(format!("expected {n} action matrices, got {}", action.len())));
        }
        let dim = action[0].rows();
        if action.iter().any(|m| m.rows() != dim || m.cols() != dim || m.p() != p) {
            return Err(Error::InvalidModule("action matrices have inconsistent shapes".into()));
        }
        let m = KGModule {
            group: group.clone(),
            p,
            dim,
            action,
            name: name.into(),
        };
        m.check_representation()?;
        Ok(m)
    }

    /// A permutation module: `g` sends basis vector `i` to `perm[g][i]`.
    pub fn permutation(group: &Arc<FiniteGroup>, p: u32, perm: &[Vec<usize>], name: impl Into<String>) -> Result<Self> {
        let dim = perm.first().map_or(0, |r| r.len());
        let action = perm
            .iter()
            .map(|images| {
                let mut m = FpMatrix::zeros(p, dim, dim);
                for (i, &j) in images.iter().enumerate() {
                    m.set(j, i, 1);
                }
                m
            })
            .collect();
        Self::from_matrices(group, p, action, name)
    }

    fn check_representation(&self) -> Result<()> {
        let n = self.group.order();
        if self.action[0] != FpMatrix::identity(self.p, self.dim) {
            return Err(Error::InvalidModule("identity does not act as the identity".into()));
        }
        let pairs: Vec<(usize, usize)> = if n <= 16 {
            (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
        } else {
            (0..n).map(|a| (a, (a * 7 + 3) % n)).chain((0..n).map(|a| (a, self.group.inv(a)))).collect()
        };
        for (a, b) in pairs {
            if self.action[self.group.mul(a, b)] != self.action[a].mul(&self.action[b]) {
                return Err(Error::InvalidModule(format!(
                    "action is not multiplicative at ({}, {})",
                    self.group.label(a),
                    self.group.label(b)
                )));
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn action(&self, g: usize) -> &FpMatrix {
        &self.action[g]
    }

    pub fn act(&self, g: usize, v: &[u32]) -> Vec<u32> {
        self.action[g].mul_vec(v)
    }

    pub fn is_trivial_action(&self) -> bool {
        let id = FpMatrix::identity(self.p, self.dim);
        self.action.iter().all(|m| *m == id)
    }

    /// Vectors fixed by every element of `sub`.
    pub fn fixed_subspace(&self, sub: &Subgroup) -> Vec<Vec<u32>> {
        let id = FpMatrix::identity(self.p, self.dim);
        let mut stacked = FpMatrix::zeros(self.p, 0, self.dim);
        for &g in sub.members() {
            stacked = stacked.vstack(&self.action[g].sub(&id));
        }
        stacked.kernel_basis()
    }

    /// The module viewed over `sub` as a group in its own right.
    pub fn restrict(&self, sub: &Subgroup) -> KGModule {
        let (h, emb) = sub.as_group();
        KGModule {
            group: Arc::new(h),
            p: self.p,
            dim: self.dim,
            action: emb.iter().map(|&g| self.action[g].clone()).collect(),
            name: format!("res({})", self.name),
        }
    }

    pub fn direct_sum(&self, other: &KGModule) -> Result<KGModule> {
        self.same_ring(other)?;
        let d = self.dim + other.dim;
        let action = (0..self.group.order())
            .map(|g| {
                let mut m = FpMatrix::zeros(self.p, d, d);
                for r in 0..self.dim {
                    for c in 0..self.dim {
                        m.set(r, c, self.action[g].get(r, c));
                    }
                }
                for r in 0..other.dim {
                    for c in 0..other.dim {
                        m.set(self.dim + r, self.dim + c, other.action[g].get(r, c));
                    }
                }
                m
            })
            .collect();
        Ok(KGModule {
            group: self.group.clone(),
            p: self.p,
            dim: d,
            action,
            name: format!("{}+{}", self.name, other.name),
        })
    }

    /// Tensor product over `k` with the diagonal action; basis index `i * other.dim + j`.
    pub fn tensor(&self, other: &KGModule) -> Result<KGModule> {
        self.same_ring(other)?;
        let action = (0..self.group.order()).map(|g| self.action[g].kron(&other.action[g])).collect();
        Ok(KGModule {
            group: self.group.clone(),
            p: self.p,
            dim: self.dim * other.dim,
            action,
            name: format!("{}*{}", self.name, other.name),
        })
    }

    /// Contragredient module: `g` acts by the transpose of `g^-1`.
    pub fn dual(&self) -> KGModule {
        let action = (0..self.group.order()).map(|g| self.action[self.group.inv(g)].transpose()).collect();
        KGModule {
            group: self.group.clone(),
            p: self.p,
            dim: self.dim,
            action,
            name: format!("{}^*", self.name),
        }
    }

    fn same_ring(&self, other: &KGModule) -> Result<()> {
        if !Arc::ptr_eq(&self.group, &other.group) || self.p != other.p {
            return Err(Error::InvalidModule("modules over different group algebras".into()));
        }
        Ok(())
    }

    /// Checks that `f` (rows = other.dim, cols = self.dim) commutes with the action.
    pub fn is_homomorphism_to(&self, other: &KGModule, f: &FpMatrix) -> bool {
        f.rows() == other.dim
            && f.cols() == self.dim
            && (0..self.group.order()).all(|g| f.mul(&self.action[g]) == other.action[g].mul(f))
    }
}

pub fn trivial_module(group: &Arc<FiniteGroup>, p: u32) -> Result<KGModule> {
    let action = vec![FpMatrix::identity(p, 1); group.order()];
    KGModule::from_matrices(group, p, action, "k")
}

/// `kG` with `g · e_x = e_{g x g^-1}`.
pub fn conjugation_module(group: &Arc<FiniteGroup>, p: u32) -> Result<KGModule> {
    let n = group.order();
    let perm: Vec<Vec<usize>> = (0..n).map(|g| (0..n).map(|x| group.conj(g, x)).collect()).collect();
    KGModule::permutation(group, p, &perm, "kG^conj")
}

/// `kG` with left multiplication.
pub fn regular_module(group: &Arc<FiniteGroup>, p: u32) -> Result<KGModule> {
    let n = group.order();
    let perm: Vec<Vec<usize>> = (0..n).map(|g| (0..n).map(|x| group.mul(g, x)).collect()).collect();
    KGModule::permutation(group, p, &perm, "kG")
}

/// Induction `kG ⊗_{kH} M` for a module `m` over `sub` viewed as a group
/// (its elements are the subgroup members in increasing order).
///
/// Basis index `c * dim(M) + i` stands for `c_c ⊗ m_i` where `c_c` runs over the
/// least-index left coset representatives of `sub`.
pub fn induce(m: &KGModule, sub: &Subgroup) -> Result<KGModule> {
    let g = sub.parent();
    if m.group().order() != sub.order() {
        return Err(Error::InvalidModule("module group does not match the subgroup".into()));
    }
    let reps = sub.left_coset_reps();
    let pos = |h: usize| sub.members().binary_search(&h).expect("member");
    let coset_of = |x: usize| -> (usize, usize) {
        // x = c_j h
        for (j, &c) in reps.iter().enumerate() {
            let h = g.mul(g.inv(c), x);
            if sub.contains(h) {
                return (j, h);
            }
        }
        unreachable!("cosets cover the group")
    };
    let d = m.dim();
    let big = reps.len() * d;
    let action = (0..g.order())
        .map(|x| {
            let mut a = FpMatrix::zeros(m.p(), big, big);
            for (ci, &c) in reps.iter().enumerate() {
                let (cj, h) = coset_of(g.mul(x, c));
                let block = m.action(pos(h));
                for r in 0..d {
                    for s in 0..d {
                        a.set(cj * d + r, ci * d + s, block.get(r, s));
                    }
                }
            }
            a
        })
        .collect();
    KGModule::from_matrices(g, m.p(), action, format!("ind({})", m.name()))
}

/// A bilinear equivariant map `M × N → L`, stored as a `dim L × (dim M · dim N)` matrix.
#[derive(Clone, Debug)]
pub struct ModulePairing {
    pub left: Arc<KGModule>,
    pub right: Arc<KGModule>,
    pub out: Arc<KGModule>,
    pub matrix: FpMatrix,
}

impl ModulePairing {
    pub fn new(left: Arc<KGModule>, right: Arc<KGModule>, out: Arc<KGModule>, matrix: FpMatrix) -> Result<Self> {
        if matrix.rows() != out.dim() || matrix.cols() != left.dim() * right.dim() {
            return Err(Error::InvalidModule("pairing matrix has the wrong shape".into()));
        }
        let tensor = left.tensor(&right)?;
        if !tensor.is_homomorphism_to(&out, &matrix) {
            return Err(Error::InvalidModule("pairing is not equivariant".into()));
        }
        Ok(ModulePairing { left, right, out, matrix })
    }

    /// `k ⊗ k → k`.
    pub fn trivial(k: &Arc<KGModule>) -> Result<Self> {
        Self::new(k.clone(), k.clone(), k.clone(), FpMatrix::identity(k.p(), 1))
    }

    /// `k ⊗ M → M` by scalar multiplication.
    pub fn scalar_left(k: &Arc<KGModule>, m: &Arc<KGModule>) -> Result<Self> {
        Self::new(k.clone(), m.clone(), m.clone(), FpMatrix::identity(m.p(), m.dim()))
    }

    /// `M ⊗ k → M` by scalar multiplication.
    pub fn scalar_right(m: &Arc<KGModule>, k: &Arc<KGModule>) -> Result<Self> {
        Self::new(m.clone(), k.clone(), m.clone(), FpMatrix::identity(m.p(), m.dim()))
    }

    pub fn apply(&self, m: &[u32], n: &[u32]) -> Vec<u32> {
        let p = self.matrix.p();
        let mut out = vec![0u32; self.out.dim()];
        let nd = self.right.dim();
        for (i, &a) in m.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in n.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let c = (a as u64 * b as u64 % p as u64) as u32;
                let col = i * nd + j;
                for (r, o) in out.iter_mut().enumerate() {
                    let v = self.matrix.get(r, col);
                    if v != 0 {
                        *o = ((*o as u64 + c as u64 * v as u64) % p as u64) as u32;
                    }
                }
            }
        }
        out
    }
}

/// `kG^conj ⊗ kG^conj → kG^conj`, `e_x ⊗ e_y ↦ e_{xy}`.
pub fn multiplication_pairing(group: &Arc<FiniteGroup>, p: u32) -> Result<ModulePairing> {
    action_multiplication_pairing(&GroupAction::conjugation(group), p)
}

/// `kG` as a module over the acting group `H`, with `h · e_x = e_{h·x}`.
pub fn action_module(action: &GroupAction, p: u32) -> Result<KGModule> {
    let (h, g) = (action.actor(), action.target());
    let perm: Vec<Vec<usize>> = (0..h.order())
        .map(|a| (0..g.order()).map(|x| action.apply(a, x)).collect())
        .collect();
    KGModule::permutation(h, p, &perm, format!("k{}", g.name()))
}

/// Multiplication of the target group as an `H`-equivariant pairing on [`action_module`].
pub fn action_multiplication_pairing(action: &GroupAction, p: u32) -> Result<ModulePairing> {
    let g = action.target();
    let m = Arc::new(action_module(action, p)?);
    let n = g.order();
    let mut mat = FpMatrix::zeros(p, n, n * n);
    for x in 0..n {
        for y in 0..n {
            mat.set(g.mul(x, y), x * n + y, 1);
        }
    }
    ModulePairing::new(m.clone(), m.clone(), m, mat)
}

/// For `[G:H]` prime to `p`, the equivariant projection of `ind_H^G k` onto its
/// trivial summand, `(1 / [G:H]) Σ_c e_c ↦` the coset sum. Returns the
/// idempotent as a matrix, or `None` when `p` divides the index.
pub fn trivial_summand_projection(sub: &Subgroup, p: u32) -> Result<Option<FpMatrix>> {
    let idx = sub.index() as u32 % p;
    if idx == 0 {
        return Ok(None);
    }
    let inv = crate::linalg::inv_mod(idx, p);
    let n = sub.index();
    let mut e = FpMatrix::zeros(p, n, n);
    for r in 0..n {
        for c in 0..n {
            e.set(r, c, inv);
        }
    }
    Ok(Some(e))
}
