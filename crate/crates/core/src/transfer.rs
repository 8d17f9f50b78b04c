//! Higher transfer matrices of a chain and the difference-operator families
//! built from them.
//!
//! Two commuting families are computed by explicit supertraces over small
//! auxiliary spaces: the antisymmetrizer family restricts the fused monodromy
//! to a wedge power, the symmetrizer family inserts the symmetrizer on the
//! full tensor power. The generating-series identities tying the two together
//! (termwise inverse difference operators, factorial-ratio coefficient
//! extraction) are verified, not used as the computational route.

use crate::graded::{embed, kron_graded, projectors, supertrace_first, GradedSpace, SuperOp};
use crate::poly::CRat;
use crate::reps::{fused_monodromy_from, monodromy, ChainSpec, Monodromy};
use crate::rmatrix::wedge_power_of;
use crate::{Error, Result, C64};

/// Falling factorial `x (x-1) … (x-r+1)` for integer `x` (possibly negative).
///
/// Ratios of factorials in the superdimension are always assembled through
/// this product, cancelling symbolically before any value is substituted.
pub fn falling(x: i64, r: usize) -> f64 {
    let mut acc = 1.0;
    for t in 0..r as i64 {
        acc *= (x - t) as f64;
    }
    acc
}

/// Generalized binomial `C(x, r) = x(x-1)…(x-r+1)/r!` for integer `x`.
pub fn gen_binomial(x: i64, r: usize) -> f64 {
    let mut fact = 1.0;
    for t in 1..=r {
        fact *= t as f64;
    }
    falling(x, r) / fact
}

/// Pointwise transfer-matrix evaluator for one chain; caches the monodromy.
pub struct TransferEngine {
    pub chain: ChainSpec,
    pub mono: Monodromy,
    aux: GradedSpace,
    space: GradedSpace,
}

impl TransferEngine {
    pub fn new(chain: &ChainSpec) -> Self {
        let mono = monodromy(chain);
        let aux = chain.aux_space();
        let space = chain.space();
        TransferEngine { chain: chain.clone(), mono, aux, space }
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    /// Poles of the degree-`k` family: `z_i + j` for `0 <= j < k`.
    pub fn poles(&self, k: usize) -> Vec<C64> {
        let mut out = Vec::new();
        for &z in &self.chain.evaluation_points() {
            for j in 0..k.max(1) {
                out.push(z + C64::new(j as f64, 0.0));
            }
        }
        out
    }

    fn check_poles(&self, k: usize, u: C64) -> Result<()> {
        for j in 0..k {
            let point = u - C64::new(j as f64, 0.0);
            if self.mono.pole_distance(point) < 1e-8 {
                return Err(Error::PoleCollision { point });
            }
        }
        Ok(())
    }

    /// Antisymmetrizer-family transfer matrix
    /// `str_{Λ^k}(Q^{∧k} T^{∧k}(u))`; `k = 0` is the identity.
    pub fn transfer_antisym(&self, k: usize, u: C64) -> Result<SuperOp> {
        if k == 0 {
            return Ok(SuperOp::identity(&self.space));
        }
        self.check_poles(k, u)?;
        let fused = fused_monodromy_from(&self.mono, &self.aux, &self.space, k, u)?;
        let pr = projectors(k, &self.aux)?;
        let qk = wedge_power_of(&self.chain.twist_op(), &pr)?;
        let big = kron_graded(&qk, &SuperOp::identity(&self.space)).compose(&fused);
        Ok(supertrace_first(&big, &pr.wedge.space, &self.space))
    }

    /// Symmetrizer-family transfer matrix
    /// `str_{V^{⊗k}}(H_k Q^{(1)}…Q^{(k)} T^{(1)}(u) … T^{(k)}(u-k+1))`;
    /// `k = 0` is the identity.
    pub fn transfer_sym(&self, k: usize, u: C64) -> Result<SuperOp> {
        if k == 0 {
            return Ok(SuperOp::identity(&self.space));
        }
        self.check_poles(k, u)?;
        let pr = projectors(k, &self.aux)?;
        let mut spaces: Vec<&GradedSpace> = std::iter::repeat_n(&self.aux, k).collect();
        spaces.push(&self.space);
        let mut prod: Option<SuperOp> = None;
        for i in 0..k {
            let ti = embed(
                &self.mono.eval(u - C64::new(i as f64, 0.0))?,
                &spaces,
                &[i, k],
            );
            prod = Some(match prod {
                None => ti,
                Some(p) => p.compose(&ti),
            });
        }
        let mut pref = kron_graded(&pr.sym, &SuperOp::identity(&self.space));
        let q = self.chain.twist_op();
        for i in 0..k {
            pref = pref.compose(&embed(&q, &spaces, &[i]));
        }
        let big = pref.compose(&prod.unwrap());
        Ok(supertrace_first(&big, &self.aux.power(k), &self.space))
    }

    /// Supertrace of `Q^{∧k}` (the `u -> ∞` limit of the antisym family).
    pub fn twist_wedge_trace(&self, k: usize) -> Result<C64> {
        if k == 0 {
            return Ok(C64::new(1.0, 0.0));
        }
        let pr = projectors(k, &self.aux)?;
        wedge_power_of(&self.chain.twist_op(), &pr)?.supertrace()
    }
}

/// Residuals of the termwise product of the two generating series:
/// `Σ_{k=0}^{l} (-1)^k T_k(u) S_{l-k}(u-k) = δ_{l0}` for `0 <= l <= max_order`,
/// where `T` is the antisymmetrizer family and `S` the symmetrizer one.
pub fn berezinian_series_check(
    engine: &TransferEngine,
    max_order: usize,
    u: C64,
) -> Result<Vec<f64>> {
    let mut residuals = Vec::with_capacity(max_order + 1);
    for l in 0..=max_order {
        let mut acc = SuperOp::zeros(engine.space.clone(), engine.space.clone());
        for k in 0..=l {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let t = engine.transfer_antisym(k, u)?;
            let s = engine.transfer_sym(l - k, u - C64::new(k as f64, 0.0))?;
            acc = acc.add(&t.compose(&s).scale(C64::new(sign, 0.0)));
        }
        if l == 0 {
            acc = acc.sub(&SuperOp::identity(&engine.space));
        }
        residuals.push(acc.norm() / (engine.space.dim() as f64).sqrt());
    }
    Ok(residuals)
}

/// Signed coefficients `c_k` of the order-`l` difference operator
/// `str_{V^{⊗l}}((Π_i (1 - Q^{(i)} T^{(i)}(u) e^{-∂})) A_l) = Σ_k c_k(u) e^{-k∂}`,
/// computed by expanding the ordered product over subsets.
pub fn dlq_operator(engine: &TransferEngine, l: usize, u: C64) -> Result<Vec<SuperOp>> {
    if l == 0 {
        return Ok(vec![SuperOp::identity(&engine.space)]);
    }
    engine.check_poles(l, u)?;
    let aux = &engine.aux;
    let mut spaces: Vec<&GradedSpace> = std::iter::repeat_n(aux, l).collect();
    spaces.push(&engine.space);
    let pr = projectors(l, aux)?;
    let anti = kron_graded(&pr.antisym, &SuperOp::identity(&engine.space));
    let q = engine.chain.twist_op();
    let mut coeffs =
        vec![SuperOp::zeros(engine.space.clone(), engine.space.clone()); l + 1];
    for mask in 0..(1u32 << l) {
        let subset: Vec<usize> = (0..l).filter(|i| mask & (1 << i) != 0).collect();
        let k = subset.len();
        let mut term: Option<SuperOp> = None;
        for (j, &i) in subset.iter().enumerate() {
            let qt = embed(&q, &spaces, &[i])
                .compose(&embed(&engine.mono.eval(u - C64::new(j as f64, 0.0))?, &spaces, &[i, l]));
            term = Some(match term {
                None => qt,
                Some(p) => p.compose(&qt),
            });
        }
        let big = match term {
            None => anti.clone(),
            Some(p) => p.compose(&anti),
        };
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let traced = supertrace_first(&big, &aux.power(l), &engine.space).scale(C64::new(sign, 0.0));
        coeffs[k] = coeffs[k].add(&traced);
    }
    Ok(coeffs)
}

/// Expected coefficients of [`dlq_operator`] through the antisymmetrizer
/// family: `c_k = (-1)^k C(N-k, l-k) T_k(u)` with `N` the superdimension.
pub fn dlq_reference(engine: &TransferEngine, l: usize, u: C64) -> Result<Vec<SuperOp>> {
    let sdim = engine.chain.aux_space().sdim();
    let mut coeffs = Vec::with_capacity(l + 1);
    for k in 0..=l {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let c = gen_binomial(sdim - k as i64, l - k) * sign;
        coeffs.push(engine.transfer_antisym(k, u)?.scale(C64::new(c, 0.0)));
    }
    Ok(coeffs)
}

/// Binomial-averaged family
/// `S_k(u) = Σ_i (-1)^{k-i} C(N-i, k-i) T_i(u)`.
pub fn s_operator(engine: &TransferEngine, k: usize, u: C64) -> Result<SuperOp> {
    let sdim = engine.chain.aux_space().sdim();
    let mut acc = SuperOp::zeros(engine.space.clone(), engine.space.clone());
    for i in 0..=k {
        let sign = if (k - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        let c = gen_binomial(sdim - i as i64, k - i) * sign;
        acc = acc.add(&engine.transfer_antisym(i, u)?.scale(C64::new(c, 0.0)));
    }
    Ok(acc)
}

/// Residual of the binomial relation tying the `S`-family to the transfer
/// matrices: for each `l <= max_order` and the given formal values `y`,
/// `Σ_k (-1)^k C(N-k, l-k) S_k(u) y^{l-k} = Σ_i (-1)^i C(N-i, l-i) T_i(u) (y+1)^{l-i}`.
pub fn s_binomial_residual(
    engine: &TransferEngine,
    max_order: usize,
    u: C64,
    ys: &[C64],
) -> Result<f64> {
    let sdim = engine.chain.aux_space().sdim();
    let mut worst: f64 = 0.0;
    for l in 0..=max_order {
        for &y in ys {
            let mut lhs = SuperOp::zeros(engine.space.clone(), engine.space.clone());
            let mut rhs = lhs.clone();
            for k in 0..=l {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let c = gen_binomial(sdim - k as i64, l - k) * sign;
                lhs = lhs.add(&s_operator(engine, k, u)?.scale(C64::new(c, 0.0) * y.powu((l - k) as u32)));
                rhs = rhs.add(
                    &engine
                        .transfer_antisym(k, u)?
                        .scale(C64::new(c, 0.0) * (y + C64::new(1.0, 0.0)).powu((l - k) as u32)),
                );
            }
            worst = worst.max(lhs.sub(&rhs).norm() / rhs.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// Finite difference-operator series `Σ_k c_k(u) e^{-k∂}` with exact rational
/// coefficients, truncated at a fixed order.
#[derive(Debug, Clone)]
pub struct ScalarDiffOp {
    /// `coeffs[k]` multiplies `e^{-k∂}`.
    pub coeffs: Vec<CRat>,
}

impl ScalarDiffOp {
    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![CRat::zero(); order + 1];
        coeffs[0] = CRat::one();
        ScalarDiffOp { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `1 - x e^{-∂}` padded to the given order.
    pub fn one_minus(x: &CRat, order: usize) -> Self {
        let mut coeffs = vec![CRat::zero(); order + 1];
        coeffs[0] = CRat::one();
        if order >= 1 {
            coeffs[1] = x.scale(C64::new(-1.0, 0.0));
        }
        ScalarDiffOp { coeffs }
    }

    /// Geometric-series inverse `(1 - x e^{-∂})^{-1} = Σ_k Π_{r<k} x(u-r) e^{-k∂}`.
    pub fn geometric_inverse(x: &CRat, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut acc = CRat::one();
        coeffs.push(acc.clone());
        for k in 0..order {
            acc = acc.mul(&x.shift(C64::new(-(k as f64), 0.0)));
            coeffs.push(acc.clone());
        }
        ScalarDiffOp { coeffs }
    }

    /// Product with the shift rule `(f e^{-j∂})(g e^{-k∂}) = f g(·-j) e^{-(j+k)∂}`,
    /// truncated at the smaller order.
    pub fn mul(&self, other: &ScalarDiffOp) -> ScalarDiffOp {
        let order = self.order().min(other.order());
        let mut coeffs = vec![CRat::zero(); order + 1];
        for j in 0..=order {
            if self.coeffs.get(j).is_none_or(|c| c.is_zero()) {
                continue;
            }
            for k in 0..=(order - j) {
                if other.coeffs.get(k).is_none_or(|c| c.is_zero()) {
                    continue;
                }
                let shifted = other.coeffs[k].shift(C64::new(-(j as f64), 0.0));
                coeffs[j + k] = coeffs[j + k].add(&self.coeffs[j].mul(&shifted));
            }
        }
        ScalarDiffOp { coeffs }
    }

    pub fn eval_coeff(&self, k: usize, u: C64) -> C64 {
        self.coeffs.get(k).map(|c| c.eval(u)).unwrap_or_else(|| C64::new(0.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::CPoly;
    use crate::reps::vector_rep;
    use crate::Sampler;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn gl11_chain(zs: &[C64], q: &[C64]) -> ChainSpec {
        let sites = zs.iter().map(|&z| (vector_rep(1, 1), z)).collect();
        ChainSpec::new(1, 1, sites, q.to_vec()).unwrap()
    }

    #[test]
    fn transfer_one_is_signed_twisted_trace() {
        // On one gl(1|1) site, T_{1,Q}(u) = q1 T_11(u) - q2 T_22(u).
        let z = c(0.2, 0.4);
        let q = [c(1.7, 0.1), c(0.6, -0.5)];
        let chain = gl11_chain(&[z], &q);
        let engine = TransferEngine::new(&chain);
        let mut s = Sampler::new(21);
        for _ in 0..4 {
            let u = s.point(&[z]);
            let t = engine.transfer_antisym(1, u).unwrap();
            let t11 = engine.mono.entry(0, 0).eval(u).unwrap();
            let t22 = engine.mono.entry(1, 1).eval(u).unwrap();
            let expect = t11.scale(q[0]).sub(&t22.scale(q[1]));
            assert!(t.sub(&expect).norm() < 1e-12);
        }
    }

    #[test]
    fn transfer_families_commute() {
        let zs = [c(0.3, 0.1), c(-0.5, -0.2)];
        let q = [c(1.3, 0.2), c(0.4, -0.7)];
        let chain = gl11_chain(&zs, &q);
        let engine = TransferEngine::new(&chain);
        let mut s = Sampler::new(22);
        let poles = engine.poles(2);
        for _ in 0..2 {
            let u = s.point(&poles);
            let v = s.point(&poles);
            for k in 1..=2usize {
                for l in 1..=2usize {
                    let a = engine.transfer_antisym(k, u).unwrap();
                    let b = engine.transfer_antisym(l, v).unwrap();
                    let res = a.commutator(&b).norm() / (a.norm() * b.norm()).max(1.0);
                    assert!(res < 1e-11, "[T{k},T{l}] residual {res:.3e}");
                    let bs = engine.transfer_sym(l, v).unwrap();
                    let res = a.commutator(&bs).norm() / (a.norm() * bs.norm()).max(1.0);
                    assert!(res < 1e-11, "[T{k},S{l}] residual {res:.3e}");
                }
            }
        }
    }

    #[test]
    fn transfer_commutes_with_cartan_for_distinct_twist() {
        let zs = [c(0.3, 0.1), c(-0.4, 0.2)];
        let q = [c(1.5, 0.0), c(0.3, 0.0)];
        let chain = gl11_chain(&zs, &q);
        let engine = TransferEngine::new(&chain);
        let u = c(1.2, 0.9);
        for k in 1..=2usize {
            let t = engine.transfer_antisym(k, u).unwrap();
            for a in 0..2 {
                let h = chain.gl_op(a, a);
                let res = t.commutator(&h).norm() / t.norm().max(1.0);
                assert!(res < 1e-11, "Cartan residual {res:.3e}");
            }
        }
    }

    #[test]
    fn sym_one_equals_antisym_one() {
        let chain = gl11_chain(&[c(0.1, 0.3)], &[c(1.2, 0.1), c(0.8, -0.3)]);
        let engine = TransferEngine::new(&chain);
        let u = c(1.4, -0.6);
        let a = engine.transfer_antisym(1, u).unwrap();
        let b = engine.transfer_sym(1, u).unwrap();
        assert!(a.sub(&b).norm() < 1e-12);
    }

    #[test]
    fn berezinian_convolution_vanishes() {
        let zs = [c(0.3, 0.15), c(-0.45, -0.3)];
        let q = [c(1.4, 0.3), c(0.7, -0.6)];
        let chain = gl11_chain(&zs, &q);
        let engine = TransferEngine::new(&chain);
        let mut s = Sampler::new(23);
        let poles = engine.poles(4);
        let u = s.point(&poles);
        let residuals = berezinian_series_check(&engine, 3, u).unwrap();
        for (l, r) in residuals.iter().enumerate() {
            assert!(*r < 1e-9, "order {l} residual {r:.3e}");
        }
    }

    #[test]
    fn dlq_coefficients_match_factorial_ratios() {
        // gl(1|1) has superdimension 0, exercising the zero/negative
        // cancellation in the ratios.
        let zs = [c(0.2, 0.1), c(-0.6, 0.4)];
        let q = [c(1.2, 0.5), c(0.5, -0.8)];
        let chain = gl11_chain(&zs, &q);
        let engine = TransferEngine::new(&chain);
        let mut s = Sampler::new(24);
        let poles = engine.poles(3);
        let u = s.point(&poles);
        for l in 1..=2usize {
            let got = dlq_operator(&engine, l, u).unwrap();
            let expect = dlq_reference(&engine, l, u).unwrap();
            for k in 0..=l {
                let res = got[k].sub(&expect[k]).norm() / expect[k].norm().max(1.0);
                assert!(res < 1e-10, "l={l} k={k} residual {res:.3e}");
            }
        }
        // l = 1 explicit: c_0 = N·Id (= 0 here), c_1 = -T_1(u).
        let got = dlq_operator(&engine, 1, u).unwrap();
        assert!(got[0].norm() < 1e-12);
        assert!(got[1].add(&engine.transfer_antisym(1, u).unwrap()).norm() < 1e-11);
    }

    #[test]
    fn falling_factorial_ratios() {
        assert_eq!(falling(0, 2), 0.0);
        assert_eq!(falling(-1, 1), -1.0);
        assert_eq!(falling(-1, 2), 2.0);
        assert_eq!(gen_binomial(-1, 2), 1.0);
        assert_eq!(gen_binomial(3, 2), 3.0);
    }

    #[test]
    fn s_family_binomial_relation() {
        let zs = [c(0.25, 0.2)];
        let q = [c(1.1, 0.4), c(0.6, -0.2)];
        let chain = gl11_chain(&zs, &q);
        let engine = TransferEngine::new(&chain);
        let mut s = Sampler::new(25);
        let u = s.point(&engine.poles(3));
        let ys = [c(0.0, 0.0), c(0.7, -0.4), c(-1.2, 0.5)];
        let res = s_binomial_residual(&engine, 2, u, &ys).unwrap();
        assert!(res < 1e-10, "binomial relation residual {res:.3e}");
    }

    #[test]
    fn transfer_asymptotics() {
        let zs = [c(0.3, 0.0), c(-0.2, 0.5)];
        let q = [c(1.5, 0.3), c(0.8, -0.4)];
        let chain = gl11_chain(&zs, &q);
        let engine = TransferEngine::new(&chain);
        let u = c(1.0e6, 0.0);
        for k in 1..=2usize {
            let t = engine.transfer_antisym(k, u).unwrap();
            let limit = SuperOp::identity(engine.space()).scale(engine.twist_wedge_trace(k).unwrap());
            assert!(t.sub(&limit).norm() < 1e-4, "k={k}");
        }
    }

    #[test]
    fn transfer_rationality_by_interpolation() {
        // Clearing Π_i Π_{j<k} (u - j - z_i) from T_k leaves a polynomial.
        let zs = [c(0.3, 0.2), c(-0.5, -0.1)];
        let q = [c(1.2, 0.0), c(0.7, 0.0)];
        let chain = gl11_chain(&zs, &q);
        let engine = TransferEngine::new(&chain);
        let k = 2;
        let den = |u: C64| -> C64 {
            let mut d = c(1.0, 0.0);
            for &z in &zs {
                for j in 0..k {
                    d *= u - z - c(j as f64, 0.0);
                }
            }
            d
        };
        // Cleared entries are polynomials of degree <= 2·k·(site count).
        let deg = 2 * k * zs.len();
        let mut s = Sampler::new(26);
        let poles = engine.poles(k);
        let nodes = s.points(deg + 1, &poles);
        let probe = s.point(&poles);
        let dim = engine.space().dim();
        let samples: Vec<SuperOp> = nodes
            .iter()
            .map(|&u| engine.transfer_antisym(k, u).unwrap().scale(den(u)))
            .collect();
        let direct = engine.transfer_antisym(k, probe).unwrap().scale(den(probe));
        for r in 0..dim {
            for cc in 0..dim {
                let vals: Vec<C64> = samples.iter().map(|t| t.mat[(r, cc)]).collect();
                let fit = crate::poly::NewtonInterp::fit(&nodes, &vals);
                assert!((fit.eval(probe) - direct.mat[(r, cc)]).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn pole_collisions_are_rejected() {
        let z = c(0.3, 0.1);
        let chain = gl11_chain(&[z], &[c(1.0, 0.0), c(1.0, 0.0)]);
        let engine = TransferEngine::new(&chain);
        assert!(matches!(
            engine.transfer_antisym(2, z + c(1.0, 0.0)),
            Err(crate::Error::PoleCollision { .. })
        ));
    }

    #[test]
    fn scalar_diff_op_algebra() {
        let x = CRat::new(CPoly::from_roots(&[c(0.3, 0.1)]), vec![(c(-0.8, 0.4), 1)]);
        let y = CRat::new(CPoly::one(), vec![(c(1.1, -0.2), 1)]);
        let a = ScalarDiffOp::one_minus(&x, 4);
        let b = ScalarDiffOp::one_minus(&y, 4);
        let ab = a.mul(&b);
        // (1 - x e^{-∂})(1 - y e^{-∂}) = 1 - (x + y) e^{-∂} + x y(·-1) e^{-2∂}.
        let u = c(0.9, 0.6);
        assert!((ab.eval_coeff(0, u) - c(1.0, 0.0)).norm() < 1e-13);
        assert!((ab.eval_coeff(1, u) + x.eval(u) + y.eval(u)).norm() < 1e-13);
        let expect2 = x.eval(u) * y.eval(u - c(1.0, 0.0));
        assert!((ab.eval_coeff(2, u) - expect2).norm() < 1e-13);
        // Geometric inverse really inverts.
        let inv = ScalarDiffOp::geometric_inverse(&x, 4);
        let prod = a.mul(&inv);
        assert!((prod.eval_coeff(0, u) - c(1.0, 0.0)).norm() < 1e-12);
        for k in 1..=4 {
            assert!(prod.eval_coeff(k, u).norm() < 1e-12, "k={k}");
        }
        // Associativity on the truncated algebra.
        let lhs = a.mul(&b).mul(&inv);
        let rhs = a.mul(&b.mul(&inv));
        for k in 0..=4 {
            assert!((lhs.eval_coeff(k, u) - rhs.eval_coeff(k, u)).norm() < 1e-12);
        }
    }
}
