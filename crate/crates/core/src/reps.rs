//! gl(m|n) highest weight modules, evaluation chains, and the monodromy
//! matrix with its fused powers.
//!
//! Modules are concrete: the vector representation, wedge powers of it, and
//! cyclic submodules of tensor powers generated from a singular vector by
//! lowering operators. A chain is a list of modules with evaluation points
//! plus a diagonal twist; its monodromy is assembled as a product of one
//! rational factor per site, giving a [`RationalMatrixFunction`] on
//! `V ⊗ (chain space)` with denominator `Π_i (u - z_i)`.

use crate::graded::{
    embed, kron_graded, projectors, supertrace_first, wedge_restrict_blocks, GradedSpace, SuperOp,
};
use crate::rmatrix::RationalMatrixFunction;
use crate::{Error, Result, C64, DIM_CAP};
use nalgebra::{DMatrix, DVector};

/// Highest weight of a gl(m|n) module: one component per basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmnWeight {
    pub components: Vec<C64>,
}

impl GlmnWeight {
    pub fn new(components: Vec<C64>) -> Self {
        GlmnWeight { components }
    }

    pub fn from_reals(components: &[f64]) -> Self {
        GlmnWeight { components: components.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }
}

/// Finite-dimensional gl(m|n) module with a distinguished singular weight
/// vector. The generator action is stored as one dense matrix per pair
/// `(a, b)`, in the module's own orthonormal homogeneous basis.
#[derive(Debug, Clone)]
pub struct HighestWeightModule {
    /// Algebra size N = m + n (parities of indices come from `algebra`).
    pub algebra: GradedSpace,
    pub space: GradedSpace,
    pub weight: GlmnWeight,
    /// Coordinates of the highest weight vector in the module basis.
    pub hw: DVector<C64>,
    action: Vec<DMatrix<C64>>,
}

impl HighestWeightModule {
    /// Action matrix of the generator `e_ab` (0-based indices).
    pub fn act(&self, a: usize, b: usize) -> SuperOp {
        let nn = self.algebra.dim();
        SuperOp::new(self.space.clone(), self.space.clone(), self.action[a * nn + b].clone())
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Largest residual of the defining supercommutator relations
    /// `[e_ab, e_cd] = δ_bc e_ad - (-1)^{(|a|+|b|)(|c|+|d|)} δ_ad e_cb`
    /// over all generator pairs.
    pub fn commutator_residual(&self) -> f64 {
        let nn = self.algebra.dim();
        let par = |a: usize, b: usize| (self.algebra.parity(a) + self.algebra.parity(b)) % 2;
        let mut worst: f64 = 0.0;
        for a in 0..nn {
            for b in 0..nn {
                let x = self.act(a, b);
                for c in 0..nn {
                    for d in 0..nn {
                        let y = self.act(c, d);
                        let sign = if par(a, b) * par(c, d) == 1 { -1.0 } else { 1.0 };
                        let lhs = x.compose(&y).sub(&y.compose(&x).scale(C64::new(sign, 0.0)));
                        let mut rhs = SuperOp::zeros(self.space.clone(), self.space.clone());
                        if b == c {
                            rhs = rhs.add(&self.act(a, d));
                        }
                        if a == d {
                            rhs = rhs.sub(&self.act(c, b).scale(C64::new(sign, 0.0)));
                        }
                        worst = worst.max(lhs.sub(&rhs).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Vector representation: `e_ab -> E_ab` on `C^{m|n}`, highest weight
/// `(1, 0, …, 0)`, highest vector `v_1`.
pub fn vector_rep(m: usize, n: usize) -> HighestWeightModule {
    let algebra = GradedSpace::standard(m, n);
    let nn = m + n;
    assert!(nn >= 1);
    let mut action = Vec::with_capacity(nn * nn);
    for a in 0..nn {
        for b in 0..nn {
            action.push(SuperOp::matrix_unit(&algebra, a, b).mat);
        }
    }
    let mut weight = vec![C64::new(0.0, 0.0); nn];
    weight[0] = C64::new(1.0, 0.0);
    let mut hw = DVector::zeros(nn);
    hw[0] = C64::new(1.0, 0.0);
    HighestWeightModule {
        algebra: algebra.clone(),
        space: algebra,
        weight: GlmnWeight::new(weight),
        hw,
        action,
    }
}

/// Wedge power of the vector representation: `e_ab -> (Σ_i E_ab^{(i)})|_{Λ^k}`.
/// The highest vector is the lexicographically first admissible multi-index.
pub fn wedge_rep(k: usize, m: usize, n: usize) -> Result<HighestWeightModule> {
    let algebra = GradedSpace::standard(m, n);
    let nn = m + n;
    let pr = projectors(k, &algebra)?;
    if pr.wedge.indices.is_empty() {
        return Err(Error::ZeroWedge);
    }
    let factors: Vec<&GradedSpace> = std::iter::repeat_n(&algebra, k).collect();
    let trailing = GradedSpace::from_parities(vec![0]);
    let mut action = Vec::with_capacity(nn * nn);
    for a in 0..nn {
        for b in 0..nn {
            let mut sum = SuperOp::zeros(algebra.power(k), algebra.power(k));
            for i in 0..k {
                sum = sum.add(&embed(&SuperOp::matrix_unit(&algebra, a, b), &factors, &[i]));
            }
            action.push(wedge_restrict_blocks(&sum, &[&pr], &trailing, 1e-8)?.mat);
        }
    }
    // Weight of the first admissible multi-index: occupation count per index.
    let first = &pr.wedge.indices[0];
    let weight: Vec<C64> = (0..nn)
        .map(|a| C64::new(first.iter().filter(|&&x| x == a).count() as f64, 0.0))
        .collect();
    let mut hw = DVector::zeros(pr.wedge.indices.len());
    hw[0] = C64::new(1.0, 0.0);
    Ok(HighestWeightModule {
        algebra,
        space: pr.wedge.space.clone(),
        weight: GlmnWeight::new(weight),
        hw,
        action,
    })
}

/// Cyclic highest weight module inside `(C^{m|n})^{⊗p}`, generated from a
/// singular weight vector by lowering operators.
///
/// The closure is built breadth-first with rank-revealing orthogonalization;
/// generator matrices are written in the resulting orthonormal homogeneous
/// basis. Fails when `hw` is not singular, not a weight vector, not parity
/// homogeneous, or when the closure exceeds the dimension cap.
pub fn cyclic_hw_module(m: usize, n: usize, p: usize, hw: &DVector<C64>) -> Result<HighestWeightModule> {
    let algebra = GradedSpace::standard(m, n);
    let nn = m + n;
    let ambient = algebra.power(p);
    if hw.len() != ambient.dim() {
        return Err(Error::DimensionMismatch(format!(
            "highest vector has length {} but the ambient space has dimension {}",
            hw.len(),
            ambient.dim()
        )));
    }
    let factors: Vec<&GradedSpace> = std::iter::repeat_n(&algebra, p).collect();
    let gen = |a: usize, b: usize| -> SuperOp {
        let mut sum = SuperOp::zeros(ambient.clone(), ambient.clone());
        for i in 0..p {
            sum = sum.add(&embed(&SuperOp::matrix_unit(&algebra, a, b), &factors, &[i]));
        }
        sum
    };
    let scale = hw.norm();
    if scale < 1e-12 {
        return Err(Error::InvalidInput("highest vector is zero".into()));
    }
    // Parity homogeneity.
    let parity_of = |v: &DVector<C64>| -> Result<u8> {
        let mut found: Option<u8> = None;
        for i in 0..v.len() {
            if v[i].norm() > 1e-10 * scale {
                let pi = ambient.parity(i);
                match found {
                    None => found = Some(pi),
                    Some(q) if q != pi => {
                        return Err(Error::InvalidInput(
                            "highest vector is not parity homogeneous".into(),
                        ))
                    }
                    _ => {}
                }
            }
        }
        Ok(found.unwrap_or(0))
    };
    parity_of(hw)?;
    // Singularity and weight.
    let mut weight = Vec::with_capacity(nn);
    for a in 0..nn {
        for b in (a + 1)..nn {
            let raised = gen(a, b).apply(hw);
            let residual = raised.norm() / scale;
            if residual > 1e-9 {
                return Err(Error::NotSingular { residual });
            }
        }
        let diag = gen(a, a).apply(hw);
        let lambda = hw.dotc(&diag) / C64::new(scale * scale, 0.0);
        let residual = (&diag - hw * lambda).norm() / scale;
        if residual > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "highest vector is not an eigenvector of e_{a}{a} (residual {residual:.3e})"
            )));
        }
        weight.push(lambda);
    }
    // Breadth-first closure under lowering operators, orthonormalized.
    let mut basis: Vec<DVector<C64>> = vec![hw / C64::new(scale, 0.0)];
    let mut queue = 0usize;
    while queue < basis.len() {
        let v = basis[queue].clone();
        queue += 1;
        for a in 0..nn {
            for b in (a + 1)..nn {
                let mut w = gen(b, a).apply(&v);
                for u in &basis {
                    let c = u.dotc(&w);
                    w -= u * c;
                }
                let norm = w.norm();
                if norm > 1e-9 {
                    if basis.len() + 1 > DIM_CAP {
                        return Err(Error::DimensionCap { dim: basis.len() + 1, cap: DIM_CAP });
                    }
                    basis.push(w / C64::new(norm, 0.0));
                }
            }
        }
    }
    let dim = basis.len();
    let mut bmat = DMatrix::zeros(ambient.dim(), dim);
    for (j, v) in basis.iter().enumerate() {
        bmat.set_column(j, v);
    }
    let parities: Vec<u8> = basis.iter().map(parity_of).collect::<Result<Vec<_>>>()?;
    let space = GradedSpace::from_parities(parities);
    let bh = bmat.adjoint();
    let mut action = Vec::with_capacity(nn * nn);
    for a in 0..nn {
        for b in 0..nn {
            let big = gen(a, b);
            let image = &big.mat * &bmat;
            let coords = &bh * &image;
            // Invariance of the closure under the full generator set.
            let residual = (&image - &bmat * &coords).norm();
            if residual > 1e-8 {
                return Err(Error::InvarianceViolation { residual });
            }
            action.push(coords);
        }
    }
    let mut hw_coords = DVector::zeros(dim);
    hw_coords[0] = C64::new(1.0, 0.0);
    Ok(HighestWeightModule {
        algebra,
        space,
        weight: GlmnWeight::new(weight),
        hw: hw_coords,
        action,
    })
}

/// Cyclic module generated from the tensor power of the top vector,
/// `v_1 ⊗ … ⊗ v_1` in `(C^{m|n})^{⊗p}`.
pub fn cyclic_power_module(m: usize, n: usize, p: usize) -> Result<HighestWeightModule> {
    let dim = (m + n).pow(p as u32);
    let mut hw = DVector::zeros(dim);
    hw[0] = C64::new(1.0, 0.0);
    cyclic_hw_module(m, n, p, &hw)
}

/// Spin-chain data: gl(m|n) sites with evaluation points and a diagonal twist.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub m: usize,
    pub n: usize,
    pub sites: Vec<(HighestWeightModule, C64)>,
    /// Diagonal twist entries (length N).
    pub twist: Vec<C64>,
}

impl ChainSpec {
    pub fn new(m: usize, n: usize, sites: Vec<(HighestWeightModule, C64)>, twist: Vec<C64>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidInput("a chain needs at least one site".into()));
        }
        if twist.len() != m + n {
            return Err(Error::InvalidInput(format!(
                "twist has {} entries, expected {}",
                twist.len(),
                m + n
            )));
        }
        let dim: usize = sites.iter().map(|(module, _)| module.dim()).product();
        if dim > DIM_CAP {
            return Err(Error::DimensionCap { dim, cap: DIM_CAP });
        }
        for (module, _) in &sites {
            if module.algebra != GradedSpace::standard(m, n) {
                return Err(Error::InvalidInput("site module algebra mismatch".into()));
            }
        }
        Ok(ChainSpec { m, n, sites, twist })
    }

    pub fn aux_space(&self) -> GradedSpace {
        GradedSpace::standard(self.m, self.n)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn evaluation_points(&self) -> Vec<C64> {
        self.sites.iter().map(|&(_, z)| z).collect()
    }

    /// Flattened chain space (tensor product of the site spaces).
    pub fn space(&self) -> GradedSpace {
        let refs: Vec<&GradedSpace> = self.sites.iter().map(|(module, _)| &module.space).collect();
        GradedSpace::tensor_many(&refs)
    }

    pub fn dim(&self) -> usize {
        self.sites.iter().map(|(module, _)| module.dim()).product()
    }

    /// Tensor product of the site highest weight vectors.
    pub fn highest_vector(&self) -> DVector<C64> {
        let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
        for (module, _) in &self.sites {
            v = kron_vec(&v, &module.hw);
        }
        v
    }

    /// Generator `e_ab` acting on site `i` only, embedded in the chain space.
    pub fn site_op(&self, i: usize, a: usize, b: usize) -> SuperOp {
        let spaces: Vec<&GradedSpace> = self.sites.iter().map(|(mo, _)| &mo.space).collect();
        embed(&self.sites[i].0.act(a, b), &spaces, &[i])
    }

    /// Diagonal chain action `Σ_i e_ab^{(i)}`.
    pub fn gl_op(&self, a: usize, b: usize) -> SuperOp {
        let space = self.space();
        let mut sum = SuperOp::zeros(space.clone(), space);
        for i in 0..self.sites.len() {
            sum = sum.add(&self.site_op(i, a, b));
        }
        sum
    }

    /// Sum of the site weights, component-wise.
    pub fn total_weight(&self) -> Vec<C64> {
        let nn = self.m + self.n;
        let mut total = vec![C64::new(0.0, 0.0); nn];
        for (module, _) in &self.sites {
            for a in 0..nn {
                total[a] += module.weight.components[a];
            }
        }
        total
    }

    pub fn twist_op(&self) -> SuperOp {
        SuperOp::diagonal(&self.aux_space(), &self.twist)
    }
}

pub fn kron_vec(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Monodromy matrix of a chain: a rational operator on `V ⊗ M` with
/// denominator `Π_i (u - z_i)`, the product of one factor per site with the
/// last site leftmost.
#[derive(Debug, Clone)]
pub struct Monodromy {
    pub aux: GradedSpace,
    pub chain_space: GradedSpace,
    pub rmf: RationalMatrixFunction,
}

/// Assemble the monodromy matrix of the chain.
pub fn monodromy(chain: &ChainSpec) -> Monodromy {
    let aux = chain.aux_space();
    let chain_space = chain.space();
    let nn = aux.dim();
    let mut factors: Vec<RationalMatrixFunction> = Vec::with_capacity(chain.len());
    for i in 0..chain.len() {
        let z = chain.sites[i].1;
        let full = aux.tensor(&chain_space);
        let id = SuperOp::identity(&full);
        // (u - z)·Id + Σ_ab E_ab ⊗ κ_b e_ba^{(i)}.
        let mut constant = id.scale(-z);
        for a in 0..nn {
            for b in 0..nn {
                let sign = C64::new(aux.kappa(b), 0.0);
                let term =
                    kron_graded(&SuperOp::matrix_unit(&aux, a, b), &chain.site_op(i, b, a)).scale(sign);
                constant = constant.add(&term);
            }
        }
        let mut f = RationalMatrixFunction::linear(&constant, &id);
        f.poles = vec![(z, 1)];
        factors.push(f);
    }
    let mut rmf = factors.pop().unwrap();
    for f in factors.into_iter().rev() {
        // Later factors were pushed later; the product is F_l ... F_1.
        rmf = rmf.mul(&f);
    }
    Monodromy { aux, chain_space, rmf }
}

impl Monodromy {
    pub fn eval(&self, u: C64) -> Result<SuperOp> {
        self.rmf.eval(u)
    }

    pub fn pole_distance(&self, u: C64) -> f64 {
        self.rmf.pole_distance(u)
    }

    /// The generating-series entry `T_ab(u)` as a rational operator on the
    /// chain space: `T(u) = Σ_ab E_ab ⊗ T_ab(u)`.
    pub fn entry(&self, a: usize, b: usize) -> RationalMatrixFunction {
        let dm = self.chain_space.dim();
        let sign = {
            let pab = (self.aux.parity(a) + self.aux.parity(b)) % 2;
            if pab == 1 && self.aux.parity(b) == 1 {
                -1.0
            } else {
                1.0
            }
        };
        let num: Vec<DMatrix<C64>> = self
            .rmf
            .num
            .iter()
            .map(|c| c.view((a * dm, b * dm), (dm, dm)).into_owned() * C64::new(sign, 0.0))
            .collect();
        RationalMatrixFunction {
            cod: self.chain_space.clone(),
            dom: self.chain_space.clone(),
            num,
            poles: self.rmf.poles.clone(),
        }
    }
}

/// Fused monodromy `T^{∧k}(u)`: the product
/// `T^{(k,ch)}(u) T^{(k-1,ch)}(u-1) … T^{(1,ch)}(u-k+1)` with the auxiliary
/// block restricted to `Λ^k V`. Invariance of the wedge block is verified.
pub fn fused_monodromy(chain: &ChainSpec, k: usize, u: C64) -> Result<SuperOp> {
    let aux = chain.aux_space();
    let chain_space = chain.space();
    let mono = monodromy(chain);
    fused_monodromy_from(&mono, &aux, &chain_space, k, u)
}

/// Same as [`fused_monodromy`] but reusing a precomputed monodromy.
pub fn fused_monodromy_from(
    mono: &Monodromy,
    aux: &GradedSpace,
    chain_space: &GradedSpace,
    k: usize,
    u: C64,
) -> Result<SuperOp> {
    for j in 0..k {
        let point = u - C64::new(j as f64, 0.0);
        if mono.pole_distance(point) < 1e-8 {
            return Err(Error::PoleCollision { point });
        }
    }
    if k == 1 {
        return mono.eval(u);
    }
    let pr = projectors(k, aux)?;
    let mut spaces: Vec<&GradedSpace> = std::iter::repeat_n(aux, k).collect();
    spaces.push(chain_space);
    let mut prod: Option<SuperOp> = None;
    for i in (1..=k).rev() {
        let arg = u - C64::new((k - i) as f64, 0.0);
        let ti = embed(&mono.eval(arg)?, &spaces, &[i - 1, k]);
        prod = Some(match prod {
            None => ti,
            Some(p) => p.compose(&ti),
        });
    }
    wedge_restrict_blocks(&prod.unwrap(), &[&pr], chain_space, 1e-7)
}

/// Supertrace of an operator on `(wedge aux) ⊗ M` over the auxiliary factor.
pub fn trace_out_aux(x: &SuperOp, aux: &GradedSpace, rest: &GradedSpace) -> SuperOp {
    supertrace_first(x, aux, rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrix::{fused_r_wedge, r_matrix};
    use crate::Sampler;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn vector_chain(m: usize, n: usize, zs: &[C64], twist: &[C64]) -> ChainSpec {
        let sites = zs.iter().map(|&z| (vector_rep(m, n), z)).collect();
        ChainSpec::new(m, n, sites, twist.to_vec()).unwrap()
    }

    #[test]
    fn vector_rep_basics() {
        let v = vector_rep(1, 1);
        assert_eq!(v.weight.components, vec![c(1.0, 0.0), c(0.0, 0.0)]);
        // e_21 v1 = v2 and e_12 v2 = v1.
        let lowered = v.act(1, 0).apply(&v.hw);
        assert!((lowered[1] - c(1.0, 0.0)).norm() < 1e-14);
        let raised = v.act(0, 1).apply(&lowered);
        assert!((raised[0] - c(1.0, 0.0)).norm() < 1e-14);
        for (m, n) in [(1usize, 1usize), (2, 1), (1, 2), (2, 2), (3, 1)] {
            assert!(vector_rep(m, n).commutator_residual() < 1e-12, "({m},{n})");
        }
    }

    #[test]
    fn wedge_rep_weights_and_commutators() {
        let w = wedge_rep(2, 2, 0).unwrap();
        assert_eq!(w.dim(), 1);
        assert_eq!(w.weight.components, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let w = wedge_rep(2, 1, 1).unwrap();
        assert_eq!(w.weight.components, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(w.commutator_residual() < 1e-12);
        assert!(wedge_rep(3, 2, 0).is_err());
    }

    #[test]
    fn cyclic_module_from_vector_hw_recovers_vector_rep() {
        let m = 1;
        let n = 1;
        let mut hw = DVector::zeros(2);
        hw[0] = c(1.0, 0.0);
        let module = cyclic_hw_module(m, n, 1, &hw).unwrap();
        assert_eq!(module.dim(), 2);
        assert_eq!(module.weight.components, vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(module.commutator_residual() < 1e-12);
    }

    #[test]
    fn cyclic_module_symmetric_square() {
        // v1 ⊗ v1 in (C^{2|0})^{⊗2} generates the 3-dimensional module of
        // weight (2, 0).
        let mut hw = DVector::zeros(4);
        hw[0] = c(1.0, 0.0);
        let module = cyclic_hw_module(2, 0, 2, &hw).unwrap();
        assert_eq!(module.dim(), 3);
        assert_eq!(module.weight.components, vec![c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(module.commutator_residual() < 1e-11);
        // A non-singular vector is rejected.
        let mut bad = DVector::zeros(4);
        bad[2] = c(1.0, 0.0); // v2 ⊗ v1 is not singular
        assert!(cyclic_hw_module(2, 0, 2, &bad).is_err());
    }

    #[test]
    fn one_site_vector_monodromy_is_normalized_r() {
        let z = c(0.3, -0.2);
        let chain = vector_chain(1, 1, &[z], &[c(1.0, 0.0), c(1.0, 0.0)]);
        let mono = monodromy(&chain);
        let mut s = Sampler::new(5);
        let v = chain.aux_space();
        let r = r_matrix(&v);
        for _ in 0..4 {
            let u = s.point(&[z]);
            let lhs = mono.eval(u).unwrap();
            let rhs = r.eval(u - z).unwrap().scale(C64::new(1.0, 0.0) / (u - z));
            assert!(lhs.sub(&rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_entries_act_on_highest_vector_by_weight_ratios() {
        // T_aa(u) v+ = Π_i (u - z_i + κ_a Λ_i^a)/(u - z_i) v+ on a 2-site
        // chain mixing a vector site and a wedge site.
        let m = 2;
        let n = 1;
        let z1 = c(0.4, 0.1);
        let z2 = c(-0.8, 0.5);
        let sites = vec![(vector_rep(m, n), z1), (wedge_rep(2, m, n).unwrap(), z2)];
        let chain = ChainSpec::new(m, n, sites, vec![c(1.0, 0.0); 3]).unwrap();
        let mono = monodromy(&chain);
        let vp = chain.highest_vector();
        let aux = chain.aux_space();
        let mut s = Sampler::new(6);
        for _ in 0..3 {
            let u = s.point(&[z1, z2]);
            for a in 0..3 {
                let taa = mono.entry(a, a).eval(u).unwrap();
                let mut expect = C64::new(1.0, 0.0);
                for (module, z) in &chain.sites {
                    let lam = module.weight.components[a];
                    expect *= (u - z + lam * aux.kappa(a)) / (u - z);
                }
                let out = taa.apply(&vp);
                assert!((&out - &vp * expect).norm() < 1e-11, "a={a}");
            }
        }
    }

    #[test]
    fn lower_triangular_entries_annihilate_highest_vector() {
        let chain = vector_chain(2, 1, &[c(0.2, 0.0), c(-0.5, 0.3)], &[c(1.0, 0.0); 3]);
        let mono = monodromy(&chain);
        let vp = chain.highest_vector();
        let u = c(1.1, 0.7);
        for a in 0..3 {
            for b in (a + 1)..3 {
                let tba = mono.entry(b, a).eval(u).unwrap();
                assert!(tba.apply(&vp).norm() < 1e-12, "T_{b}{a} v+ != 0");
            }
        }
    }

    #[test]
    fn rtt_relation_on_chain() {
        let chain = vector_chain(1, 1, &[c(0.3, 0.2), c(-0.6, -0.1)], &[c(1.0, 0.0); 2]);
        let mono = monodromy(&chain);
        let v = chain.aux_space();
        let mspace = chain.space();
        let spaces = [&v, &v, &mspace];
        let mut s = Sampler::new(7);
        for _ in 0..3 {
            let u = s.point(&chain.evaluation_points());
            let w = s.point(&chain.evaluation_points());
            let r12 = crate::rmatrix::r_at(&v, u - w, &spaces, 0, 1);
            let t13 = embed(&mono.eval(u).unwrap(), &spaces, &[0, 2]);
            let t23 = embed(&mono.eval(w).unwrap(), &spaces, &[1, 2]);
            let lhs = r12.compose(&t13).compose(&t23);
            let rhs = t23.compose(&t13).compose(&r12);
            let res = lhs.sub(&rhs).norm() / lhs.norm().max(1.0);
            assert!(res < 1e-9, "RTT residual {res:.3e}");
        }
    }

    #[test]
    fn gl_symmetry_of_monodromy() {
        let chain = vector_chain(2, 1, &[c(0.4, 0.0), c(-0.2, 0.6)], &[c(1.0, 0.0); 3]);
        let mono = monodromy(&chain);
        let aux = chain.aux_space();
        let mspace = chain.space();
        let u = c(1.3, -0.8);
        let t = mono.eval(u).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let big = kron_graded(&SuperOp::matrix_unit(&aux, a, b), &SuperOp::identity(&mspace))
                    .add(&kron_graded(&SuperOp::identity(&aux), &chain.gl_op(a, b)));
                let res = big.commutator(&t).norm() / t.norm().max(1.0);
                assert!(res < 1e-11, "symmetry residual {res:.3e} at ({a},{b})");
            }
        }
    }

    #[test]
    fn monodromy_denominator_is_exact() {
        // Entries times Π (u - z_i) are polynomial: interpolate through
        // deg+1 nodes and compare at extra points.
        let chain = vector_chain(1, 1, &[c(0.25, 0.1), c(-0.4, -0.3)], &[c(1.0, 0.0); 2]);
        let mono = monodromy(&chain);
        let entry = mono.entry(0, 1);
        assert_eq!(entry.num_degree(), chain.len());
        let mut s = Sampler::new(8);
        let nodes: Vec<C64> = s.points(entry.num.len(), &chain.evaluation_points());
        let probe = s.point(&chain.evaluation_points());
        for r in 0..entry.dim() {
            for cc in 0..entry.dim() {
                let vals: Vec<C64> = nodes
                    .iter()
                    .map(|&u| entry.eval(u).unwrap().mat[(r, cc)] * entry.den_eval(u))
                    .collect();
                let fit = crate::poly::NewtonInterp::fit(&nodes, &vals);
                let direct = entry.eval(probe).unwrap().mat[(r, cc)] * entry.den_eval(probe);
                assert!((fit.eval(probe) - direct).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn fused_monodromy_reduces_to_monodromy_and_has_unit_limit() {
        let chain = vector_chain(1, 1, &[c(0.3, 0.1)], &[c(1.0, 0.0); 2]);
        let mono = monodromy(&chain);
        let u = c(0.9, 0.4);
        let f1 = fused_monodromy(&chain, 1, u).unwrap();
        assert!(f1.sub(&mono.eval(u).unwrap()).norm() < 1e-12);
        // Large-u limit of T^{∧2} is the identity.
        let big = c(1.0e6, 0.0);
        let f2 = fused_monodromy(&chain, 2, big).unwrap();
        let id = SuperOp::identity(&f2.cod.clone());
        assert!(f2.sub(&id).norm() < 1e-4);
    }

    #[test]
    fn fused_rtt_2_1() {
        let chain = vector_chain(1, 1, &[c(0.2, -0.3)], &[c(1.0, 0.0); 2]);
        let v = chain.aux_space();
        let mspace = chain.space();
        let mono = monodromy(&chain);
        let pr2 = projectors(2, &v).unwrap();
        let w2 = pr2.wedge.space.clone();
        let spaces = [&w2, &v, &mspace];
        let mut s = Sampler::new(9);
        let mut poles = chain.evaluation_points();
        for z in chain.evaluation_points() {
            poles.push(z + c(1.0, 0.0));
        }
        for _ in 0..2 {
            let u = s.point(&poles);
            let w = s.point(&poles);
            let r12 = embed(&fused_r_wedge(2, 1, &v, u - w).unwrap(), &spaces, &[0, 1]);
            let t13 = embed(
                &fused_monodromy_from(&mono, &v, &mspace, 2, u).unwrap(),
                &spaces,
                &[0, 2],
            );
            let t23 = embed(&mono.eval(w).unwrap(), &spaces, &[1, 2]);
            let lhs = r12.compose(&t13).compose(&t23);
            let rhs = t23.compose(&t13).compose(&r12);
            let res = lhs.sub(&rhs).norm() / lhs.norm().max(1.0);
            assert!(res < 1e-9, "fused RTT residual {res:.3e}");
        }
    }

    #[test]
    fn chain_validation() {
        assert!(ChainSpec::new(1, 1, vec![], vec![c(1.0, 0.0); 2]).is_err());
        let sites = vec![(vector_rep(1, 1), c(0.0, 0.0))];
        assert!(ChainSpec::new(1, 1, sites, vec![c(1.0, 0.0)]).is_err());
    }
}
