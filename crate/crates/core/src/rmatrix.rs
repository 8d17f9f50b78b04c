//! The rational R-matrix `R(u) = u + P`, Yang–Baxter checks, and the fused
//! R-matrices on wedge powers.
//!
//! [`RationalMatrixFunction`] is the workhorse: a matrix-polynomial numerator
//! over a scalar factored denominator. Monodromy matrices and their fused
//! products are values of this type, so rationality statements (denominator
//! exactness, asymptotics) can be checked on coefficients instead of samples.

use crate::graded::{
    embed, flip, kron_graded, projectors, wedge_restrict_blocks, GradedSpace, Projectors, SuperOp,
};
use crate::poly::CPoly;
use crate::{Error, Result, Sampler, C64};
use nalgebra::DMatrix;

/// Matrix-valued rational function of one spectral parameter: numerator is a
/// matrix polynomial (coefficients low-to-high), denominator a scalar monic
/// polynomial kept in factored form.
#[derive(Debug, Clone)]
pub struct RationalMatrixFunction {
    pub cod: GradedSpace,
    pub dom: GradedSpace,
    /// Matrix coefficients of the numerator, low-to-high degree.
    pub num: Vec<DMatrix<C64>>,
    /// Denominator roots with multiplicities (monic denominator).
    pub poles: Vec<(C64, u32)>,
}

impl RationalMatrixFunction {
    pub fn from_constant(op: &SuperOp) -> Self {
        RationalMatrixFunction {
            cod: op.cod.clone(),
            dom: op.dom.clone(),
            num: vec![op.mat.clone()],
            poles: vec![],
        }
    }

    /// `c0 + c1 u` over denominator 1.
    pub fn linear(c0: &SuperOp, c1: &SuperOp) -> Self {
        assert_eq!(c0.cod, c1.cod);
        assert_eq!(c0.dom, c1.dom);
        RationalMatrixFunction {
            cod: c0.cod.clone(),
            dom: c0.dom.clone(),
            num: vec![c0.mat.clone(), c1.mat.clone()],
            poles: vec![],
        }
    }

    pub fn dim(&self) -> usize {
        self.cod.dim()
    }

    pub fn num_degree(&self) -> usize {
        self.num.len().saturating_sub(1)
    }

    pub fn den_poly(&self) -> CPoly {
        let mut p = CPoly::one();
        for &(r, mult) in &self.poles {
            for _ in 0..mult {
                p = p.mul(&CPoly::linear(r));
            }
        }
        p
    }

    pub fn den_eval(&self, u: C64) -> C64 {
        self.poles.iter().fold(C64::new(1.0, 0.0), |acc, &(r, m)| acc * (u - r).powu(m))
    }

    /// Distance from `u` to the nearest pole.
    pub fn pole_distance(&self, u: C64) -> f64 {
        self.poles.iter().map(|&(r, _)| (u - r).norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, u: C64) -> Result<SuperOp> {
        let d = self.den_eval(u);
        if d.norm() < 1e-12 {
            return Err(Error::PoleCollision { point: u });
        }
        let mut mat = DMatrix::zeros(self.cod.dim(), self.dom.dim());
        let mut upow = C64::new(1.0, 0.0);
        for c in &self.num {
            mat += c * upow;
            upow *= u;
        }
        mat /= d;
        Ok(SuperOp::new(self.cod.clone(), self.dom.clone(), mat))
    }

    /// Pointwise product `(f·g)(u) = f(u) g(u)`: numerators convolve,
    /// denominators multiply.
    pub fn mul(&self, other: &RationalMatrixFunction) -> RationalMatrixFunction {
        assert_eq!(self.dom, other.cod, "inner spaces must match");
        let n = self.num.len() + other.num.len() - 1;
        let rows = self.cod.dim();
        let cols = other.dom.dim();
        let mut num = vec![DMatrix::zeros(rows, cols); n];
        for (i, a) in self.num.iter().enumerate() {
            for (j, b) in other.num.iter().enumerate() {
                num[i + j] += a * b;
            }
        }
        let mut poles = self.poles.clone();
        for &(r, p) in &other.poles {
            match poles.iter_mut().find(|(q, _)| (*q - r).norm() < 1e-9) {
                Some(entry) => entry.1 += p,
                None => poles.push((r, p)),
            }
        }
        RationalMatrixFunction { cod: self.cod.clone(), dom: other.dom.clone(), num, poles }
    }

    pub fn add(&self, other: &RationalMatrixFunction) -> RationalMatrixFunction {
        assert_eq!(self.cod, other.cod);
        assert_eq!(self.dom, other.dom);
        // Common denominator by max multiplicity.
        let mut poles = self.poles.clone();
        for &(r, p) in &other.poles {
            match poles.iter_mut().find(|(q, _)| (*q - r).norm() < 1e-9) {
                Some(entry) => entry.1 = entry.1.max(p),
                None => poles.push((r, p)),
            }
        }
        let mult_at = |list: &[(C64, u32)], r: C64| {
            list.iter().find(|(q, _)| (*q - r).norm() < 1e-9).map(|&(_, p)| p).unwrap_or(0)
        };
        let lift = |f: &RationalMatrixFunction| {
            let mut extra = CPoly::one();
            for &(r, p) in &poles {
                for _ in mult_at(&f.poles, r)..p {
                    extra = extra.mul(&CPoly::linear(r));
                }
            }
            let mut num =
                vec![DMatrix::zeros(f.cod.dim(), f.dom.dim()); f.num.len() + extra.degree()];
            for (i, c) in f.num.iter().enumerate() {
                for (j, &e) in extra.coeffs.iter().enumerate() {
                    num[i + j] += c * e;
                }
            }
            num
        };
        let na = lift(self);
        let nb = lift(other);
        let len = na.len().max(nb.len());
        let mut num = vec![DMatrix::zeros(self.cod.dim(), self.dom.dim()); len];
        for (i, c) in na.into_iter().enumerate() {
            num[i] += c;
        }
        for (i, c) in nb.into_iter().enumerate() {
            num[i] += c;
        }
        RationalMatrixFunction { cod: self.cod.clone(), dom: self.dom.clone(), num, poles }
    }

    pub fn scale(&self, s: C64) -> RationalMatrixFunction {
        RationalMatrixFunction {
            cod: self.cod.clone(),
            dom: self.dom.clone(),
            num: self.num.iter().map(|c| c * s).collect(),
            poles: self.poles.clone(),
        }
    }

    /// Entry `(a, b)` of the numerator as a scalar polynomial.
    pub fn entry_num(&self, a: usize, b: usize) -> CPoly {
        CPoly::new(self.num.iter().map(|c| c[(a, b)]).collect())
    }

    /// Cancel poles at which the whole numerator matrix vanishes; the
    /// denominator stays monic. Evaluation is unchanged.
    pub fn reduce(&self) -> RationalMatrixFunction {
        let scale = self
            .num
            .iter()
            .flat_map(|c| c.iter())
            .map(|x| x.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let mut num = self.num.clone();
        let mut poles: Vec<(C64, u32)> = Vec::new();
        for &(r, mult) in &self.poles {
            let mut remaining = mult;
            'outer: while remaining > 0 && num.len() > 1 {
                let rows = self.cod.dim();
                let cols = self.dom.dim();
                let mut quot = vec![DMatrix::zeros(rows, cols); num.len() - 1];
                for a in 0..rows {
                    for b in 0..cols {
                        let p = CPoly::new(num.iter().map(|c| c[(a, b)]).collect());
                        let (q, rem) = p.div_linear(r);
                        if rem.norm() > 1e-9 * scale {
                            break 'outer;
                        }
                        for (i, &c) in q.coeffs.iter().enumerate() {
                            quot[i][(a, b)] = c;
                        }
                    }
                }
                num = quot;
                remaining -= 1;
            }
            if remaining > 0 {
                poles.push((r, remaining));
            }
        }
        RationalMatrixFunction { cod: self.cod.clone(), dom: self.dom.clone(), num, poles }
    }
}

/// Rational R-matrix `R(u) = u + P` on `V ⊗ V`.
pub fn r_matrix(space: &GradedSpace) -> RationalMatrixFunction {
    let p = flip(space);
    let id = SuperOp::identity(&space.power(2));
    RationalMatrixFunction::linear(&p, &id)
}

/// `R` evaluated at `u` and embedded at slots `(i, j)` of the listed factors.
pub fn r_at(space: &GradedSpace, u: C64, spaces: &[&GradedSpace], i: usize, j: usize) -> SuperOp {
    let r = r_matrix(space).eval(u).expect("polynomial R-matrix cannot have poles");
    embed(&r, spaces, &[i, j])
}

/// Largest relative residual of the Yang–Baxter equation
/// `R12(u-v) R13(u) R23(v) = R23(v) R13(u) R12(u-v)` over the samples.
pub fn yang_baxter_residual(space: &GradedSpace, samples: &[(C64, C64)]) -> f64 {
    let spaces = [space, space, space];
    let mut worst: f64 = 0.0;
    for &(u, v) in samples {
        let r12 = r_at(space, u - v, &spaces, 0, 1);
        let r13 = r_at(space, u, &spaces, 0, 2);
        let r23 = r_at(space, v, &spaces, 1, 2);
        let lhs = r12.compose(&r13).compose(&r23);
        let rhs = r23.compose(&r13).compose(&r12);
        worst = worst.max(lhs.sub(&rhs).norm() / lhs.norm().max(1.0));
    }
    worst
}

/// Residual of the inversion relation `R(u) R^{(21)}(-u) = (1-u^2)·Id`.
pub fn r_inversion_residual(space: &GradedSpace, samples: &[C64]) -> f64 {
    let rm = r_matrix(space);
    let spaces = [space, space];
    let mut worst: f64 = 0.0;
    for &u in samples {
        let r = rm.eval(u).unwrap();
        let rneg = rm.eval(-u).unwrap();
        let r21 = embed(&rneg, &spaces, &[1, 0]);
        let prod = r.compose(&r21);
        let expect = SuperOp::identity(&space.power(2)).scale(C64::new(1.0, 0.0) - u * u);
        worst = worst.max(prod.sub(&expect).norm() / expect.norm().max(1.0));
    }
    worst
}

/// Fused R-matrix on `Λ^k V ⊗ Λ^l V`: the ordered product of shifted
/// fundamental R-matrices restricted to the wedge blocks. The product runs
/// right-to-left over the first index and left-to-right over the second, the
/// `(i, j)` factor carrying argument `u + i - j - k + l`.
pub fn fused_r_wedge(k: usize, l: usize, space: &GradedSpace, u: C64) -> Result<SuperOp> {
    let pk = projectors(k, space)?;
    let pl = projectors(l, space)?;
    let total: Vec<&GradedSpace> = std::iter::repeat_n(space, k + l).collect();
    let mut prod = SuperOp::identity(&space.power(k + l));
    for i in (1..=k).rev() {
        for j in 1..=l {
            let arg = u + C64::new((i as f64) - (j as f64) - (k as f64) + (l as f64), 0.0);
            let f = r_at(space, arg, &total, i - 1, k + j - 1);
            prod = prod.compose(&f);
        }
    }
    let trailing = GradedSpace::from_parities(vec![0]);
    wedge_restrict_blocks(&prod, &[&pk, &pl], &trailing, 1e-8)
}

/// Side of the reduced (linear-in-u) R-matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedSide {
    /// `R_{∧k,∧1}(u)` on `Λ^k V ⊗ V`.
    Left,
    /// `R_{∧1,∧k}(u)` on `V ⊗ Λ^k V`.
    Right,
}

/// Reduced fused R-matrix from its explicit linear-in-u form:
/// `R_{∧k,∧1}(u) = u + Σ_{a,b} (Σ_i E_ab^{(i)})|_{Λ^k} ⊗ E_ba (-1)^{|b|}` and
/// `R_{∧1,∧k}(u) = u + k - 1 + Σ_{a,b} E_ab ⊗ (Σ_i E_ba^{(i)})|_{Λ^k} (-1)^{|b|}`.
pub fn reduced_r(k: usize, space: &GradedSpace, side: ReducedSide, u: C64) -> Result<SuperOp> {
    let pr = projectors(k, space)?;
    if pr.wedge.indices.is_empty() {
        return Err(Error::ZeroWedge);
    }
    let n = space.dim();
    let factors: Vec<&GradedSpace> = std::iter::repeat_n(space, k).collect();
    let trailing = GradedSpace::from_parities(vec![0]);
    let wedge_action = |a: usize, b: usize| -> Result<SuperOp> {
        let mut sum = SuperOp::zeros(space.power(k), space.power(k));
        for i in 0..k {
            sum = sum.add(&embed(&SuperOp::matrix_unit(space, a, b), &factors, &[i]));
        }
        wedge_restrict_blocks(&sum, &[&pr], &trailing, 1e-8)
    };
    let wspace = &pr.wedge.space;
    match side {
        ReducedSide::Left => {
            let mut acc = SuperOp::identity(&wspace.tensor(space)).scale(u);
            for a in 0..n {
                for b in 0..n {
                    let sign = if space.parity(b) == 1 { -1.0 } else { 1.0 };
                    let term = kron_graded(&wedge_action(a, b)?, &SuperOp::matrix_unit(space, b, a))
                        .scale(C64::new(sign, 0.0));
                    acc = acc.add(&term);
                }
            }
            Ok(acc)
        }
        ReducedSide::Right => {
            let shift = u + C64::new(k as f64 - 1.0, 0.0);
            let mut acc = SuperOp::identity(&space.tensor(wspace)).scale(shift);
            for a in 0..n {
                for b in 0..n {
                    let sign = if space.parity(b) == 1 { -1.0 } else { 1.0 };
                    let term = kron_graded(&SuperOp::matrix_unit(space, a, b), &wedge_action(b, a)?)
                        .scale(C64::new(sign, 0.0));
                    acc = acc.add(&term);
                }
            }
            Ok(acc)
        }
    }
}

/// Residuals of the ordered R-products against the symmetrizer and
/// antisymmetrizer with their scalar prefactors.
#[derive(Debug, Clone)]
pub struct FusionReport {
    pub sym_residual: f64,
    pub antisym_residual: f64,
}

/// Check that the ordered products of `R^{(ij)}` at arguments `j-i` (resp.
/// `i-j`) equal `H_k Π_j j^{k-j+1}` (resp. `A_k (-1)^k Π_j (-j)^{k-j+1}`),
/// in both product orders.
pub fn fusion_product_check(k: usize, space: &GradedSpace) -> Result<FusionReport> {
    if k > 4 {
        return Err(Error::InvalidInput("fusion product check supports k <= 4".into()));
    }
    let pr = projectors(k, space)?;
    let spaces: Vec<&GradedSpace> = std::iter::repeat_n(space, k).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 1..=k {
        for j in (i + 1)..=k {
            pairs.push((i, j));
        }
    }
    let ordered_product = |args: &dyn Fn(usize, usize) -> f64, reverse: bool| -> SuperOp {
        let mut prod = SuperOp::identity(&space.power(k));
        let iter: Vec<(usize, usize)> =
            if reverse { pairs.iter().rev().cloned().collect() } else { pairs.clone() };
        for (i, j) in iter {
            let f = r_at(space, C64::new(args(i, j), 0.0), &spaces, i - 1, j - 1);
            prod = prod.compose(&f);
        }
        prod
    };
    let mut sym_scalar = 1.0f64;
    let mut antisym_scalar = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    for j in 1..=k {
        sym_scalar *= (j as f64).powi((k - j + 1) as i32);
        antisym_scalar *= (-(j as f64)).powi((k - j + 1) as i32);
    }
    let h_expect = pr.sym.scale(C64::new(sym_scalar, 0.0));
    let a_expect = pr.antisym.scale(C64::new(antisym_scalar, 0.0));
    let mut sym_residual: f64 = 0.0;
    let mut antisym_residual: f64 = 0.0;
    for reverse in [false, true] {
        let hs = ordered_product(&|i, j| j as f64 - i as f64, reverse);
        let anti = ordered_product(&|i, j| i as f64 - j as f64, reverse);
        sym_residual = sym_residual.max(hs.sub(&h_expect).norm() / h_expect.norm().max(1.0));
        antisym_residual =
            antisym_residual.max(anti.sub(&a_expect).norm() / a_expect.norm().max(1.0));
    }
    Ok(FusionReport { sym_residual, antisym_residual })
}

/// Residual of the factorization of the fused R-matrix through the reduced
/// one: `R^{∧k,∧1}(u) = R_{∧k,∧1}(u) Π_{i=1}^{k-1} (u-i)` and
/// `R^{∧1,∧k}(u) = R_{∧1,∧k}(u) Π_{i=0}^{k-2} (u+i)`.
pub fn reduced_factorization_residual(
    k: usize,
    space: &GradedSpace,
    samples: &[C64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &u in samples {
        let fused_l = fused_r_wedge(k, 1, space, u)?;
        let mut scalar = C64::new(1.0, 0.0);
        for i in 1..k {
            scalar *= u - C64::new(i as f64, 0.0);
        }
        let red_l = reduced_r(k, space, ReducedSide::Left, u)?.scale(scalar);
        worst = worst.max(fused_l.sub(&red_l).norm() / red_l.norm().max(1.0));

        let fused_r = fused_r_wedge(1, k, space, u)?;
        let mut scalar = C64::new(1.0, 0.0);
        for i in 0..k.saturating_sub(1) {
            scalar *= u + C64::new(i as f64, 0.0);
        }
        let red_right = reduced_r(k, space, ReducedSide::Right, u)?.scale(scalar);
        worst = worst.max(fused_r.sub(&red_right).norm() / red_right.norm().max(1.0));
    }
    Ok(worst)
}

/// Residual of the reduced-R inversion relation
/// `R_{∧k,∧1}(u) (R_{∧1,∧k}(-u))^{(21)} = (u+1)(k-u)·Id`.
pub fn reduced_inversion_residual(k: usize, space: &GradedSpace, samples: &[C64]) -> Result<f64> {
    let pr = projectors(k, space)?;
    let wspace = pr.wedge.space.clone();
    let mut worst: f64 = 0.0;
    for &u in samples {
        let left = reduced_r(k, space, ReducedSide::Left, u)?;
        let right = reduced_r(k, space, ReducedSide::Right, -u)?;
        let spaces = [&wspace, space];
        let right21 = embed(&right, &spaces, &[1, 0]);
        let prod = left.compose(&right21);
        let expect = SuperOp::identity(&wspace.tensor(space))
            .scale((u + C64::new(1.0, 0.0)) * (C64::new(k as f64, 0.0) - u));
        worst = worst.max(prod.sub(&expect).norm() / expect.norm().max(1.0));
    }
    Ok(worst)
}

/// Residual of the fused Yang–Baxter equation on `Λ^k ⊗ Λ^l ⊗ V`.
pub fn fused_ybe_residual(
    k: usize,
    l: usize,
    space: &GradedSpace,
    samples: &[(C64, C64)],
) -> Result<f64> {
    let pk = projectors(k, space)?;
    let pl = projectors(l, space)?;
    let wk = pk.wedge.space.clone();
    let wl = pl.wedge.space.clone();
    let spaces = [&wk, &wl, space];
    let mut worst: f64 = 0.0;
    for &(u, v) in samples {
        let r12 = embed(&fused_r_wedge(k, l, space, u - v)?, &spaces, &[0, 1]);
        let r13 = embed(&fused_r_wedge(k, 1, space, u)?, &spaces, &[0, 2]);
        let r23 = embed(&fused_r_wedge(l, 1, space, v)?, &spaces, &[1, 2]);
        let lhs = r12.compose(&r13).compose(&r23);
        let rhs = r23.compose(&r13).compose(&r12);
        worst = worst.max(lhs.sub(&rhs).norm() / lhs.norm().max(1.0));
    }
    Ok(worst)
}

/// Commutator residual `[R^{∧k,∧l}(u), Q^{∧k} ⊗ Q^{∧l}]` for a diagonal twist.
pub fn fused_twist_commutator_residual(
    k: usize,
    l: usize,
    space: &GradedSpace,
    q_diag: &[C64],
    u: C64,
) -> Result<f64> {
    let pk = projectors(k, space)?;
    let pl = projectors(l, space)?;
    let q = SuperOp::diagonal(space, q_diag);
    let qk = wedge_power_of(&q, &pk)?;
    let ql = wedge_power_of(&q, &pl)?;
    let rf = fused_r_wedge(k, l, space, u)?;
    let qq = kron_graded(&qk, &ql);
    let comm = rf.commutator(&qq);
    Ok(comm.norm() / (rf.norm() * qq.norm()).max(1.0))
}

/// Restriction `Q^{∧k}` of `Q^{⊗k}` to the wedge power.
pub fn wedge_power_of(q: &SuperOp, pr: &Projectors) -> Result<SuperOp> {
    let k = pr.wedge.indices.first().map(|i| i.len()).unwrap_or(1);
    let mut big = q.clone();
    for _ in 1..k {
        big = kron_graded(&big, q);
    }
    let trailing = GradedSpace::from_parities(vec![0]);
    wedge_restrict_blocks(&big, &[pr], &trailing, 1e-8)
}

/// Sample points for R-matrix identities, drawn away from the integer shifts
/// that appear in fused products.
pub fn fusion_samples(sampler: &mut Sampler, n: usize, k_max: usize) -> Vec<C64> {
    let poles: Vec<C64> =
        (-(k_max as i64)..=k_max as i64).map(|j| C64::new(j as f64, 0.0)).collect();
    sampler.points(n, &poles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn r_at_zero_is_flip() {
        let v = GradedSpace::standard(1, 1);
        let r0 = r_matrix(&v).eval(c(0.0, 0.0)).unwrap();
        assert!(r0.sub(&flip(&v)).norm() < 1e-14);
    }

    #[test]
    fn yang_baxter_holds_small_spaces() {
        let mut s = Sampler::new(42);
        for (m, n) in [(1usize, 1usize), (2, 1), (1, 2), (2, 2), (3, 1), (4, 0)] {
            let v = GradedSpace::standard(m, n);
            let samples: Vec<(C64, C64)> = (0..5).map(|_| (s.point(&[]), s.point(&[]))).collect();
            let res = yang_baxter_residual(&v, &samples);
            assert!(res < 1e-10, "YBE residual {res:.3e} for ({m},{n})");
        }
    }

    #[test]
    fn inversion_relation() {
        let mut s = Sampler::new(43);
        let v = GradedSpace::standard(1, 1);
        let res = r_inversion_residual(&v, &s.points(5, &[]));
        assert!(res < 1e-12);
    }

    #[test]
    fn fused_1_1_is_plain_r() {
        let v = GradedSpace::standard(1, 1);
        let u = c(0.7, 0.3);
        let fused = fused_r_wedge(1, 1, &v, u).unwrap();
        let plain = r_matrix(&v).eval(u).unwrap();
        assert!(fused.sub(&plain).norm() < 1e-12);
    }

    #[test]
    fn fusion_products_match_projectors() {
        let v = GradedSpace::standard(1, 1);
        // k = 2: R(1) = 2 H_2 and R(-1) = -2 A_2.
        let pr = projectors(2, &v).unwrap();
        let spaces = [&v, &v];
        let r1 = r_at(&v, c(1.0, 0.0), &spaces, 0, 1);
        assert!(r1.sub(&pr.sym.scale(c(2.0, 0.0))).norm() < 1e-13);
        let rm1 = r_at(&v, c(-1.0, 0.0), &spaces, 0, 1);
        assert!(rm1.sub(&pr.antisym.scale(c(-2.0, 0.0))).norm() < 1e-13);
        for (m, n) in [(1usize, 1usize), (2, 0), (2, 1)] {
            let v = GradedSpace::standard(m, n);
            let rep = fusion_product_check(3, &v).unwrap();
            assert!(rep.sym_residual < 1e-10, "H residual {} ({m},{n})", rep.sym_residual);
            assert!(rep.antisym_residual < 1e-10, "A residual {} ({m},{n})", rep.antisym_residual);
        }
    }

    #[test]
    fn reduced_r_matches_fused_and_inverts() {
        let mut s = Sampler::new(44);
        let v = GradedSpace::standard(1, 1);
        let samples = fusion_samples(&mut s, 4, 3);
        let res = reduced_factorization_residual(2, &v, &samples).unwrap();
        assert!(res < 1e-10, "factorization residual {res:.3e}");
        for k in [2usize, 3] {
            let res = reduced_inversion_residual(k, &v, &samples).unwrap();
            assert!(res < 1e-10, "inversion residual {res:.3e} k={k}");
        }
        // R_{∧1,∧1}(u) = R(u).
        let u = samples[0];
        let red = reduced_r(1, &v, ReducedSide::Left, u).unwrap();
        let plain = r_matrix(&v).eval(u).unwrap();
        assert!(red.sub(&plain).norm() < 1e-12);
    }

    #[test]
    fn fused_ybe_2_1_1() {
        let mut s = Sampler::new(45);
        let v = GradedSpace::standard(1, 1);
        let poles: Vec<C64> = (-3..=3).map(|j| c(j as f64, 0.0)).collect();
        let samples: Vec<(C64, C64)> =
            (0..3).map(|_| (s.point(&poles), s.point(&poles))).collect();
        let res = fused_ybe_residual(2, 1, &v, &samples).unwrap();
        assert!(res < 1e-9, "fused YBE residual {res:.3e}");
    }

    #[test]
    fn fused_r_commutes_with_diagonal_twist_powers() {
        let mut s = Sampler::new(46);
        let v = GradedSpace::standard(1, 1);
        let q = [c(1.3, 0.4), c(0.6, -0.9)];
        let poles: Vec<C64> = (-3..=3).map(|j| c(j as f64, 0.0)).collect();
        let u = s.point(&poles);
        let res = fused_twist_commutator_residual(2, 1, &v, &q, u).unwrap();
        assert!(res < 1e-11, "twist commutator residual {res:.3e}");
    }

    #[test]
    fn rational_matrix_function_algebra() {
        let mut s = Sampler::new(47);
        let v = GradedSpace::standard(1, 1);
        let r = r_matrix(&v);
        let f = r.mul(&r).add(&r.scale(c(0.5, 0.2)));
        for _ in 0..10 {
            let u = s.point(&[]);
            let ru = r.eval(u).unwrap();
            let direct = ru.compose(&ru).add(&ru.scale(c(0.5, 0.2)));
            assert!(f.eval(u).unwrap().sub(&direct).norm() < 1e-11);
        }
        // reduce() cancels a manufactured common factor and preserves eval.
        let root = c(0.9, -0.2);
        let mut num = vec![DMatrix::zeros(4, 4); f.num.len() + 1];
        for (i, cmat) in f.num.iter().enumerate() {
            num[i] += cmat * (-root);
            num[i + 1] += cmat;
        }
        let lifted = RationalMatrixFunction {
            cod: f.cod.clone(),
            dom: f.dom.clone(),
            num,
            poles: vec![(root, 1)],
        };
        let red = lifted.reduce();
        assert!(red.poles.is_empty());
        let u = s.point(&[root]);
        assert!(red.eval(u).unwrap().sub(&f.eval(u).unwrap()).norm() < 1e-10);
    }
}
