//! Graded vector spaces and the Koszul-sign tensor algebra.
//!
//! A [`GradedSpace`] is a list of parity bits, one per basis vector. Operators
//! are stored as dense complex matrices tagged with an operator parity
//! ([`SuperOp`]); the graded Kronecker product [`kron_graded`] carries the
//! Koszul sign `(-1)^{|B||b|}` that makes the matrix representation of
//! `A ⊗ B` multiplicative: `mat(A⊗B)·mat(A'⊗B') = mat(AA' ⊗ BB')·(-1)^{|A'||B|}`.
//! On top of that sit the supertrace, the supertranspose, the symmetric-group
//! action through graded flips, (anti)symmetrizers, and wedge-space restriction.

use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// A finite-dimensional Z2-graded vector space: one parity bit per basis vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSpace {
    parities: Vec<u8>,
}

impl GradedSpace {
    /// Standard space `C^{m|n}`: `m` even basis vectors followed by `n` odd ones.
    pub fn standard(m: usize, n: usize) -> Self {
        let mut parities = vec![0u8; m];
        parities.extend(std::iter::repeat_n(1u8, n));
        GradedSpace { parities }
    }

    /// Space with an explicit parity list. Tensor and wedge spaces interleave
    /// parities, so no ordering is imposed here; only `standard` sorts.
    pub fn from_parities(parities: Vec<u8>) -> Self {
        assert!(parities.iter().all(|&p| p <= 1), "parity bits must be 0 or 1");
        GradedSpace { parities }
    }

    pub fn dim(&self) -> usize {
        self.parities.len()
    }

    /// Number of even basis vectors.
    pub fn even_count(&self) -> usize {
        self.parities.iter().filter(|&&p| p == 0).count()
    }

    /// Number of odd basis vectors.
    pub fn odd_count(&self) -> usize {
        self.parities.iter().filter(|&&p| p == 1).count()
    }

    /// Superdimension `m - n`.
    pub fn sdim(&self) -> i64 {
        self.even_count() as i64 - self.odd_count() as i64
    }

    /// Parity bit of basis vector `i` (0-based).
    pub fn parity(&self, i: usize) -> u8 {
        self.parities[i]
    }

    pub fn parities(&self) -> &[u8] {
        &self.parities
    }

    /// Kronecker-flattened tensor product; the parity of a pure tensor is the
    /// sum of the factor parities.
    pub fn tensor(&self, other: &GradedSpace) -> GradedSpace {
        let mut parities = Vec::with_capacity(self.dim() * other.dim());
        for &p in &self.parities {
            for &q in &other.parities {
                parities.push((p + q) % 2);
            }
        }
        GradedSpace { parities }
    }

    pub fn tensor_many(factors: &[&GradedSpace]) -> GradedSpace {
        let mut acc = GradedSpace::from_parities(vec![0]);
        for f in factors {
            acc = acc.tensor(f);
        }
        acc
    }

    /// `k`-fold tensor power.
    pub fn power(&self, k: usize) -> GradedSpace {
        let refs: Vec<&GradedSpace> = std::iter::repeat_n(self, k).collect();
        GradedSpace::tensor_many(&refs)
    }

    /// Sign `kappa_a`: `+1` for even basis index `a`, `-1` for odd.
    pub fn kappa(&self, i: usize) -> f64 {
        if self.parities[i] == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Ordered list of tensor factors together with the flattened space and the
/// multi-index bookkeeping (`flatten` and `unflatten` are mutually inverse).
#[derive(Debug, Clone)]
pub struct TensorSpace {
    pub factors: Vec<GradedSpace>,
    pub flattened: GradedSpace,
}

impl TensorSpace {
    pub fn new(factors: Vec<GradedSpace>) -> Self {
        let refs: Vec<&GradedSpace> = factors.iter().collect();
        let flattened = GradedSpace::tensor_many(&refs);
        TensorSpace { factors, flattened }
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        assert_eq!(multi.len(), self.factors.len());
        let mut idx = 0;
        for (i, &a) in multi.iter().enumerate() {
            debug_assert!(a < self.factors[i].dim());
            idx = idx * self.factors[i].dim() + a;
        }
        idx
    }

    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0; self.factors.len()];
        for i in (0..self.factors.len()).rev() {
            let d = self.factors[i].dim();
            multi[i] = idx % d;
            idx /= d;
        }
        multi
    }
}

/// Operator parity tag. Sign-sensitive operations split `Mixed` operators into
/// homogeneous parts first; [`SuperOp::parity_split`] is the helper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpParity {
    Even,
    Odd,
    Mixed,
}

impl OpParity {
    fn compose(self, other: OpParity) -> OpParity {
        match (self, other) {
            (OpParity::Mixed, _) | (_, OpParity::Mixed) => OpParity::Mixed,
            (OpParity::Even, x) | (x, OpParity::Even) => x,
            (OpParity::Odd, OpParity::Odd) => OpParity::Even,
        }
    }

    fn join(self, other: OpParity) -> OpParity {
        if self == other {
            self
        } else {
            OpParity::Mixed
        }
    }
}

/// Dense complex operator between graded spaces, tagged with its parity.
#[derive(Debug, Clone)]
pub struct SuperOp {
    /// Codomain (row space).
    pub cod: GradedSpace,
    /// Domain (column space).
    pub dom: GradedSpace,
    pub mat: DMatrix<C64>,
    parity: OpParity,
}

fn infer_parity(cod: &GradedSpace, dom: &GradedSpace, mat: &DMatrix<C64>) -> OpParity {
    let mut has_even = false;
    let mut has_odd = false;
    for c in 0..mat.ncols() {
        for r in 0..mat.nrows() {
            if mat[(r, c)].norm_sqr() > 0.0 {
                if (cod.parity(r) + dom.parity(c)).is_multiple_of(2) {
                    has_even = true;
                } else {
                    has_odd = true;
                }
            }
        }
    }
    match (has_even, has_odd) {
        (true, true) => OpParity::Mixed,
        (false, true) => OpParity::Odd,
        _ => OpParity::Even,
    }
}

impl SuperOp {
    /// Wrap a matrix; the parity tag is inferred from the nonzero pattern.
    pub fn new(cod: GradedSpace, dom: GradedSpace, mat: DMatrix<C64>) -> Self {
        assert_eq!(mat.nrows(), cod.dim(), "row count must match codomain");
        assert_eq!(mat.ncols(), dom.dim(), "column count must match domain");
        let parity = infer_parity(&cod, &dom, &mat);
        SuperOp { cod, dom, mat, parity }
    }

    pub fn zeros(cod: GradedSpace, dom: GradedSpace) -> Self {
        let mat = DMatrix::zeros(cod.dim(), dom.dim());
        SuperOp { cod, dom, mat, parity: OpParity::Even }
    }

    pub fn identity(space: &GradedSpace) -> Self {
        let mat = DMatrix::identity(space.dim(), space.dim());
        SuperOp { cod: space.clone(), dom: space.clone(), mat, parity: OpParity::Even }
    }

    /// Matrix unit `E_ab` (0-based indices): `E_ab v_c = delta_bc v_a`.
    pub fn matrix_unit(space: &GradedSpace, a: usize, b: usize) -> Self {
        let mut mat = DMatrix::zeros(space.dim(), space.dim());
        mat[(a, b)] = C64::new(1.0, 0.0);
        let parity = if (space.parity(a) + space.parity(b)).is_multiple_of(2) {
            OpParity::Even
        } else {
            OpParity::Odd
        };
        SuperOp { cod: space.clone(), dom: space.clone(), mat, parity }
    }

    /// Rank-one map `space -> C` selecting the `a`-th coordinate.
    pub fn bra(space: &GradedSpace, a: usize) -> Self {
        let scalar = GradedSpace::from_parities(vec![0]);
        let mut mat = DMatrix::zeros(1, space.dim());
        mat[(0, a)] = C64::new(1.0, 0.0);
        let parity = if space.parity(a) == 0 { OpParity::Even } else { OpParity::Odd };
        SuperOp { cod: scalar, dom: space.clone(), mat, parity }
    }

    pub fn diagonal(space: &GradedSpace, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), space.dim());
        let mat = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries));
        SuperOp { cod: space.clone(), dom: space.clone(), mat, parity: OpParity::Even }
    }

    pub fn parity(&self) -> OpParity {
        self.parity
    }

    /// Override the inferred parity tag (used when zero matrices stand in for
    /// homogeneous operators of known parity).
    pub fn with_parity(mut self, parity: OpParity) -> Self {
        self.parity = parity;
        self
    }

    pub fn is_square(&self) -> bool {
        self.cod == self.dom
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, c: C64) -> SuperOp {
        SuperOp { cod: self.cod.clone(), dom: self.dom.clone(), mat: &self.mat * c, parity: self.parity }
    }

    pub fn add(&self, other: &SuperOp) -> SuperOp {
        assert_eq!(self.cod, other.cod, "codomain mismatch in add");
        assert_eq!(self.dom, other.dom, "domain mismatch in add");
        SuperOp {
            cod: self.cod.clone(),
            dom: self.dom.clone(),
            mat: &self.mat + &other.mat,
            parity: self.parity.join(other.parity),
        }
    }

    pub fn sub(&self, other: &SuperOp) -> SuperOp {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Operator composition `self ∘ other`.
    pub fn compose(&self, other: &SuperOp) -> SuperOp {
        assert_eq!(self.dom, other.cod, "inner spaces must match in compose");
        SuperOp {
            cod: self.cod.clone(),
            dom: other.dom.clone(),
            mat: &self.mat * &other.mat,
            parity: self.parity.compose(other.parity),
        }
    }

    pub fn commutator(&self, other: &SuperOp) -> SuperOp {
        self.compose(other).sub(&other.compose(self))
    }

    /// Apply to a coordinate vector.
    pub fn apply(&self, v: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
        &self.mat * v
    }

    /// Split into (even, odd) homogeneous parts.
    pub fn parity_split(&self) -> (SuperOp, SuperOp) {
        let mut even = DMatrix::zeros(self.mat.nrows(), self.mat.ncols());
        let mut odd = DMatrix::zeros(self.mat.nrows(), self.mat.ncols());
        for c in 0..self.mat.ncols() {
            for r in 0..self.mat.nrows() {
                if (self.cod.parity(r) + self.dom.parity(c)).is_multiple_of(2) {
                    even[(r, c)] = self.mat[(r, c)];
                } else {
                    odd[(r, c)] = self.mat[(r, c)];
                }
            }
        }
        (
            SuperOp { cod: self.cod.clone(), dom: self.dom.clone(), mat: even, parity: OpParity::Even },
            SuperOp { cod: self.cod.clone(), dom: self.dom.clone(), mat: odd, parity: OpParity::Odd },
        )
    }

    /// Supertrace `str(A) = sum_a (-1)^{|a|} A(a,a)`.
    pub fn supertrace(&self) -> Result<C64> {
        if self.cod != self.dom {
            return Err(Error::NonSquare { rows: self.mat.nrows(), cols: self.mat.ncols() });
        }
        let mut s = C64::new(0.0, 0.0);
        for a in 0..self.dom.dim() {
            let sign = if self.dom.parity(a) == 0 { 1.0 } else { -1.0 };
            s += self.mat[(a, a)] * sign;
        }
        Ok(s)
    }

    /// Supertranspose: linear extension of `E_ab -> (-1)^{|a||b|+|a|} E_ba`.
    pub fn supertranspose(&self) -> SuperOp {
        assert!(self.is_square(), "supertranspose needs a square operator");
        let n = self.dom.dim();
        let mut mat = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let pa = self.dom.parity(a) as u32;
                let pb = self.dom.parity(b) as u32;
                let sign = if (pa * pb + pa).is_multiple_of(2) { 1.0 } else { -1.0 };
                mat[(b, a)] = self.mat[(a, b)] * sign;
            }
        }
        SuperOp { cod: self.dom.clone(), dom: self.cod.clone(), mat, parity: self.parity }
    }
}

/// Graded Kronecker product of (possibly rectangular) operators.
///
/// Entry `((a,c),(b,d)) = A(a,b) B(c,d) (-1)^{|B| |b|}` where `|b|` is the
/// parity of basis vector `b` in the domain of `A`. Mixed-parity `B` is split
/// into homogeneous parts first; the rule is bilinear.
pub fn kron_graded(a: &SuperOp, b: &SuperOp) -> SuperOp {
    if b.parity == OpParity::Mixed {
        let (be, bo) = b.parity_split();
        return kron_graded(a, &be).add(&kron_graded(a, &bo));
    }
    let cod = a.cod.tensor(&b.cod);
    let dom = a.dom.tensor(&b.dom);
    let (ar, ac) = (a.mat.nrows(), a.mat.ncols());
    let (br, bc) = (b.mat.nrows(), b.mat.ncols());
    let mut mat = DMatrix::zeros(ar * br, ac * bc);
    for bi in 0..ac {
        let sign = if b.parity == OpParity::Odd && a.dom.parity(bi) == 1 { -1.0 } else { 1.0 };
        for ai in 0..ar {
            let aval = a.mat[(ai, bi)];
            if aval.norm_sqr() == 0.0 {
                continue;
            }
            let f = aval * sign;
            for di in 0..bc {
                for ci in 0..br {
                    mat[(ai * br + ci, bi * bc + di)] = f * b.mat[(ci, di)];
                }
            }
        }
    }
    SuperOp { cod, dom, mat, parity: a.parity.compose(b.parity) }
}

/// Left-associated graded Kronecker product of several operators.
pub fn kron_many(ops: &[&SuperOp]) -> SuperOp {
    assert!(!ops.is_empty());
    let mut acc = ops[0].clone();
    for op in &ops[1..] {
        acc = kron_graded(&acc, op);
    }
    acc
}

/// Graded flip `P(v ⊗ w) = (-1)^{|v||w|} w ⊗ v` on `V ⊗ V`,
/// i.e. `P = Σ E_ab ⊗ E_ba (-1)^{|b|}`.
pub fn flip(space: &GradedSpace) -> SuperOp {
    let n = space.dim();
    let ts = space.tensor(space);
    let mut mat = DMatrix::zeros(n * n, n * n);
    for b in 0..n {
        for a in 0..n {
            let sign = if space.parity(a) * space.parity(b) == 1 { -1.0 } else { 1.0 };
            mat[(a * n + b, b * n + a)] = C64::new(sign, 0.0);
        }
    }
    SuperOp { cod: ts.clone(), dom: ts, mat, parity: OpParity::Even }
}

/// Matrix of a permutation acting on a tensor product of graded spaces with
/// Koszul signs: basis vector `e_{i_1..i_k}` is sent to the reordered basis
/// vector with sign `(-1)^{#{odd inversions}}`.
///
/// `perm[j]` is the destination slot of factor `j`, so the operator equals the
/// product of graded flips realizing the permutation.
pub fn graded_permutation(factors: &[&GradedSpace], perm: &[usize]) -> SuperOp {
    let k = factors.len();
    assert_eq!(perm.len(), k);
    let src = TensorSpace::new(factors.iter().map(|&f| f.clone()).collect());
    let mut dst_factors = vec![GradedSpace::from_parities(vec![0]); k];
    for (j, &p) in perm.iter().enumerate() {
        dst_factors[p] = factors[j].clone();
    }
    let dst = TensorSpace::new(dst_factors);
    let dim = src.flattened.dim();
    let mut mat = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let multi = src.unflatten(col);
        // Koszul sign: pairs (i, j), i < j, whose order is reversed and whose
        // entries are both odd.
        let mut sign = 1.0;
        for i in 0..k {
            for j in (i + 1)..k {
                if perm[i] > perm[j]
                    && factors[i].parity(multi[i]) == 1
                    && factors[j].parity(multi[j]) == 1
                {
                    sign = -sign;
                }
            }
        }
        let mut dst_multi = vec![0usize; k];
        for (j, &p) in perm.iter().enumerate() {
            dst_multi[p] = multi[j];
        }
        let row = dst.flatten(&dst_multi);
        mat[(row, col)] = C64::new(sign, 0.0);
    }
    SuperOp { cod: dst.flattened, dom: src.flattened, mat, parity: OpParity::Even }
}

/// Embed an operator acting on a subset of tensor factors into the full
/// product, with Koszul signs handled through a signed index permutation.
///
/// `positions` lists, for each tensor factor of `op`'s domain, the slot it
/// occupies in `factors` (all distinct). `op`'s domain must equal the tensor
/// product of those factor spaces in the listed order, and its codomain the same.
pub fn embed(op: &SuperOp, factors: &[&GradedSpace], positions: &[usize]) -> SuperOp {
    let k = factors.len();
    let r = positions.len();
    assert!(r <= k);
    // Permutation sending the chosen slots to the front, in order, and the
    // rest behind in increasing order.
    let mut perm = vec![usize::MAX; k];
    for (i, &p) in positions.iter().enumerate() {
        perm[p] = i;
    }
    let mut next = r;
    for slot in perm.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    assert_eq!(op.cod.dim(), op.dom.dim(), "embed expects a square operator");
    let src = TensorSpace::new(factors.iter().map(|&f| f.clone()).collect());
    let dim = src.flattened.dim();
    let dim_front = op.dom.dim();
    let dim_rest = dim / dim_front;
    // Signed permutation original -> (chosen..., rest...), as index arrays.
    let mut fwd = vec![0usize; dim];
    let mut sgn = vec![1.0f64; dim];
    let mut dst_radix = vec![0usize; k];
    for (j, &p) in perm.iter().enumerate() {
        dst_radix[p] = factors[j].dim();
    }
    for col in 0..dim {
        let multi = src.unflatten(col);
        let mut sign = 1.0;
        for i in 0..k {
            for j in (i + 1)..k {
                if perm[i] > perm[j]
                    && factors[i].parity(multi[i]) == 1
                    && factors[j].parity(multi[j]) == 1
                {
                    sign = -sign;
                }
            }
        }
        let mut dst_multi = vec![0usize; k];
        for (j, &p) in perm.iter().enumerate() {
            dst_multi[p] = multi[j];
        }
        let mut row = 0usize;
        for (p, &d) in dst_radix.iter().enumerate() {
            row = row * d + dst_multi[p];
        }
        fwd[col] = row;
        sgn[col] = sign;
    }
    let mut inv = vec![0usize; dim];
    for (col, &row) in fwd.iter().enumerate() {
        inv[row] = col;
    }
    // result[r, c] = sgn[r] sgn[c] X[a, b] δ_{e, f} with fwd[r] = (a, e),
    // fwd[c] = (b, f); the identity block carries no Koszul sign.
    let mut mat = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let fc = fwd[c];
        let b = fc / dim_rest;
        let f = fc % dim_rest;
        for a in 0..op.cod.dim() {
            let x = op.mat[(a, b)];
            if x.norm_sqr() == 0.0 {
                continue;
            }
            let rr = inv[a * dim_rest + f];
            mat[(rr, c)] = x * (sgn[rr] * sgn[c]);
        }
    }
    SuperOp::new(src.flattened.clone(), src.flattened, mat)
}

/// Partial supertrace over the first factor of `F ⊗ S`.
///
/// For `X = mat(A ⊗ B)` this returns `str(A)·B` for all homogeneous `A`, `B`;
/// the parity twist `(-1)^{|a|(|c|+|d|)}` makes that hold for odd `B` too.
pub fn supertrace_first(x: &SuperOp, first: &GradedSpace, rest: &GradedSpace) -> SuperOp {
    let df = first.dim();
    let ds = rest.dim();
    assert_eq!(x.mat.nrows(), df * ds, "operator does not live on the stated product");
    assert!(x.is_square(), "partial supertrace needs a square operator");
    let mut mat = DMatrix::zeros(ds, ds);
    for c in 0..ds {
        for d in 0..ds {
            let pcd = (rest.parity(c) + rest.parity(d)) % 2;
            let mut s = C64::new(0.0, 0.0);
            for a in 0..df {
                let pa = first.parity(a);
                let mut sign = if pa == 1 { -1.0 } else { 1.0 };
                if pa == 1 && pcd == 1 {
                    sign = -sign;
                }
                s += x.mat[(a * ds + c, a * ds + d)] * sign;
            }
            mat[(c, d)] = s;
        }
    }
    SuperOp::new(rest.clone(), rest.clone(), mat)
}

/// Symmetrizer/antisymmetrizer data on `V^{⊗k}` together with the wedge basis.
pub struct Projectors {
    /// Symmetrizer `H_k = (1/k!) Σ_σ σ`.
    pub sym: SuperOp,
    /// Antisymmetrizer `A_k = (1/k!) Σ_σ sign(σ) σ`.
    pub antisym: SuperOp,
    pub wedge: WedgeBasis,
}

/// Basis of the wedge power: multi-indices `a_1 < … < a_b ≤ m < a_{b+1} ≤ … ≤ a_k`
/// (strictly increasing on even indices, weakly increasing on odd ones),
/// listed lexicographically. The inclusion sends the `J`-th basis vector to
/// `A_k e_J`; the projection reads the coordinate of `e_J` back off, scaled by
/// `k!/|stab(J)|`, so that `proj ∘ incl = id` exactly.
pub struct WedgeBasis {
    pub indices: Vec<Vec<usize>>,
    /// Graded space of the wedge power (parity of a wedge vector is the sum of
    /// its factor parities).
    pub space: GradedSpace,
    /// Inclusion `Λ^k V -> V^{⊗k}` (columns are antisymmetrized basis tensors).
    pub incl: SuperOp,
    /// Projection `V^{⊗k} -> Λ^k V` with `proj ∘ incl = id`.
    pub proj: SuperOp,
}

fn wedge_indices(k: usize, m: usize, n: usize) -> Vec<Vec<usize>> {
    let nn = m + n;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, k: usize, m: usize, nn: usize, next_min: usize) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in next_min..nn {
            cur.push(a);
            // even indices (a < m) may not repeat; odd ones may.
            let nm = if a < m { a + 1 } else { a };
            rec(out, cur, k, m, nn, nm);
            cur.pop();
        }
    }
    rec(&mut out, &mut cur, k, m, nn, 0);
    out
}

fn stabilizer_order(idx: &[usize]) -> f64 {
    let mut ord = 1.0;
    let mut run = 1usize;
    for i in 1..idx.len() {
        if idx[i] == idx[i - 1] {
            run += 1;
            ord *= run as f64;
        } else {
            run = 1;
        }
    }
    ord
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(k, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, &mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

fn perm_sign(perm: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..perm.len() {
        for j in (i + 1)..perm.len() {
            if perm[i] > perm[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Symmetrizer, antisymmetrizer and wedge basis on `V^{⊗k}`.
///
/// The symmetric group acts through products of graded flips; the wedge basis
/// spans the image of the antisymmetrizer.
pub fn projectors(k: usize, space: &GradedSpace) -> Result<Projectors> {
    if k == 0 {
        return Err(Error::InvalidInput("k = 0: the trivial wedge power is handled by callers".into()));
    }
    let factors: Vec<&GradedSpace> = std::iter::repeat_n(space, k).collect();
    let power = space.power(k);
    let dim = power.dim();
    let mut sym = DMatrix::zeros(dim, dim);
    let mut anti = DMatrix::zeros(dim, dim);
    for perm in permutations(k) {
        let mat = graded_permutation(&factors, &perm);
        let sign = perm_sign(&perm);
        sym += &mat.mat;
        anti += &mat.mat * C64::new(sign, 0.0);
    }
    let fact = (1..=k).product::<usize>() as f64;
    sym /= C64::new(fact, 0.0);
    anti /= C64::new(fact, 0.0);
    let antisym = SuperOp::new(power.clone(), power.clone(), anti);
    let sym = SuperOp::new(power.clone(), power.clone(), sym);

    let m = space.even_count();
    let n = space.odd_count();
    let indices = wedge_indices(k, m, n);
    let ts = TensorSpace::new(factors.iter().map(|&f| f.clone()).collect());
    let wedge_parities: Vec<u8> =
        indices.iter().map(|idx| (idx.iter().map(|&a| space.parity(a) as usize).sum::<usize>() % 2) as u8).collect();
    let wspace = GradedSpace::from_parities(wedge_parities);
    let mut incl = DMatrix::zeros(dim, indices.len());
    let mut proj = DMatrix::zeros(indices.len(), dim);
    for (j, idx) in indices.iter().enumerate() {
        let col = ts.flatten(idx);
        let mut e = DMatrix::zeros(dim, 1);
        e[(col, 0)] = C64::new(1.0, 0.0);
        let w = &antisym.mat * &e;
        incl.set_column(j, &w.column(0));
        // Distinct admissible multi-indices have distinct multisets, so their
        // antisymmetrizations have disjoint support; reading off the e_J
        // coordinate inverts the inclusion exactly.
        let scale = fact / stabilizer_order(idx);
        proj[(j, col)] = C64::new(scale, 0.0);
    }
    let incl = SuperOp::new(power.clone(), wspace.clone(), incl);
    let proj = SuperOp::new(wspace.clone(), power, proj);
    Ok(Projectors { sym, antisym, wedge: WedgeBasis { indices, space: wspace, incl, proj } })
}

/// Restrict an operator on `V^{⊗k}` that preserves the image of the
/// antisymmetrizer to the wedge basis coordinates.
///
/// Invariance (`A_k X A_k = X A_k` within `tol`, relative) is checked first and
/// violation is reported as an error.
pub fn wedge_restrict(x: &SuperOp, pr: &Projectors, tol: f64) -> Result<SuperOp> {
    let a = &pr.antisym;
    let xa = x.compose(a);
    let axa = a.compose(&xa);
    let denom = xa.norm().max(1.0);
    let residual = axa.sub(&xa).norm() / denom;
    if residual > tol {
        return Err(Error::InvarianceViolation { residual });
    }
    Ok(pr.wedge.proj.compose(&x.compose(&pr.wedge.incl)))
}

/// Restrict an operator on a product of antisymmetrizer-invariant blocks
/// `V^{⊗k_1} ⊗ … ⊗ V^{⊗k_r} ⊗ (trailing factors)` to the wedge coordinates of
/// every block, leaving the trailing factors untouched.
pub fn wedge_restrict_blocks(
    x: &SuperOp,
    blocks: &[&Projectors],
    trailing: &GradedSpace,
    tol: f64,
) -> Result<SuperOp> {
    let mut incl = SuperOp::identity(trailing);
    let mut proj = SuperOp::identity(trailing);
    let mut anti = SuperOp::identity(trailing);
    for pr in blocks.iter().rev() {
        incl = kron_graded(&pr.wedge.incl, &incl);
        proj = kron_graded(&pr.wedge.proj, &proj);
        anti = kron_graded(&pr.antisym, &anti);
    }
    let xa = x.compose(&anti);
    let axa = anti.compose(&xa);
    let residual = axa.sub(&xa).norm() / xa.norm().max(1.0);
    if residual > tol {
        return Err(Error::InvarianceViolation { residual });
    }
    Ok(proj.compose(&x.compose(&incl)))
}

/// Number of admissible wedge multi-indices, `Σ_{i+j=k} C(m,i) C(n+j-1,j)`.
pub fn wedge_dim(k: usize, m: usize, n: usize) -> usize {
    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let mut r = 1usize;
        for i in 0..k {
            r = r * (n - i) / (i + 1);
        }
        r
    }
    (0..=k)
        .map(|i| {
            let j = k - i;
            let stars = if n == 0 { usize::from(j == 0) } else { binom(n + j - 1, j) };
            binom(m, i) * stars
        })
        .sum()
}
