//! Mirror duality between gl(m|n) and gl(n|m) chains.
//!
//! The mirror of a vector-representation chain lives on `C^{n|m}` with
//! negated evaluation points, reversed twist diagonal and unchanged site
//! order. Under the graded basis reversal (with one Koszul sign per odd
//! factor weighted by its distance from the last site), the antisymmetrizer
//! transfer family maps onto the symmetrizer family of the mirror at the
//! reflected spectral point, and the Bethe operator maps onto the mirror
//! Bethe operator twisted by the entry-transposing, argument-negating
//! automorphism. All conventions below are pinned by the unit tests.

use super::{bv_operator, bv_operator_twisted, BetheParams};
use crate::graded::{GradedSpace, SuperOp};
use crate::reps::{vector_rep, ChainSpec};
use crate::transfer::TransferEngine;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// The identification `C^{m|n} chain -> C^{n|m} chain`: per-site basis
/// reversal `v_a -> v_{N+1-a}` with the sign `(-1)^{Σ_i |a_i| (ℓ-1-i)}`.
pub fn mirror_iso(site: &GradedSpace, sites: usize) -> SuperOp {
    let d = site.dim();
    let total = d.pow(sites as u32);
    // Index a pairs with N+1-a and the parity flips (the identification is an
    // odd map), so the standard order of the mirror space is preserved.
    let msite =
        GradedSpace::from_parities(site.parities().iter().rev().map(|&p| 1 - p).collect());
    let mut mat = DMatrix::zeros(total, total);
    for col in 0..total {
        let mut idx = col;
        let mut multi = vec![0usize; sites];
        for i in (0..sites).rev() {
            multi[i] = idx % d;
            idx /= d;
        }
        let mut sign = 1.0;
        for (i, &a) in multi.iter().enumerate() {
            if site.parity(a) == 1 && (sites - 1 - i) % 2 == 1 {
                sign = -sign;
            }
        }
        let mut row = 0usize;
        for &a in &multi {
            row = row * d + (d - 1 - a);
        }
        mat[(row, col)] = C64::new(sign, 0.0);
    }
    let dom = {
        let refs: Vec<&GradedSpace> = std::iter::repeat_n(site, sites).collect();
        GradedSpace::tensor_many(&refs)
    };
    let cod = {
        let refs: Vec<&GradedSpace> = std::iter::repeat_n(&msite, sites).collect();
        GradedSpace::tensor_many(&refs)
    };
    SuperOp::new(cod, dom, mat)
}

/// The mirror of a vector-representation chain: gl(n|m) sites at the negated
/// evaluation points (same order) with the reversed twist diagonal.
pub fn mirror_chain(chain: &ChainSpec) -> Result<ChainSpec> {
    let nn = chain.m + chain.n;
    for (module, _) in &chain.sites {
        if module.dim() != nn || module.weight.components[0] != C64::new(1.0, 0.0) {
            return Err(Error::InvalidInput(
                "mirror construction is defined for vector-representation chains".into(),
            ));
        }
    }
    let sites = chain
        .sites
        .iter()
        .map(|&(_, z)| (vector_rep(chain.n, chain.m), -z))
        .collect();
    let twist = chain.twist.iter().rev().cloned().collect();
    ChainSpec::new(chain.n, chain.m, sites, twist)
}

/// Residual of the transfer-matrix mirror identity
/// `T_k(u) = (-1)^k Φ^{-1} S̃_k(-u + k - 1) Φ` between the antisymmetrizer
/// family of the chain and the symmetrizer family of its mirror.
pub fn transfer_duality_residual(chain: &ChainSpec, k_max: usize, u_samples: &[C64]) -> Result<f64> {
    let mirror = mirror_chain(chain)?;
    let engine = TransferEngine::new(chain);
    let mirror_engine = TransferEngine::new(&mirror);
    let phi = mirror_iso(&chain.aux_space(), chain.len());
    let phi_inv = SuperOp::new(phi.dom.clone(), phi.cod.clone(), phi.mat.transpose());
    let mut worst: f64 = 0.0;
    for k in 1..=k_max {
        for &u in u_samples {
            let t = engine.transfer_antisym(k, u)?;
            let v = -u + C64::new(k as f64 - 1.0, 0.0);
            let s = mirror_engine.transfer_sym(k, v)?;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let conj = phi_inv.compose(&s).compose(&phi).scale(C64::new(sign, 0.0));
            worst = worst.max(t.sub(&conj).norm() / t.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// Outcome of the Bethe-vector mirror comparison.
#[derive(Debug, Clone)]
pub struct MirrorVectorReport {
    /// Deviation of the two vectors from exact proportionality.
    pub proportionality_residual: f64,
    /// The proportionality scalar.
    pub ratio: C64,
}

/// Compare the Bethe vector with its mirror: the mapped vector
/// `Φ B_ξ(t) v+` against the twisted mirror Bethe operator (built at the
/// block-reversed parameters) applied to `Φ v+`. The two agree up to a
/// unimodular scalar.
pub fn bethe_mirror_ratio(chain: &ChainSpec, params: &BetheParams) -> Result<MirrorVectorReport> {
    let mirror = mirror_chain(chain)?;
    let phi = mirror_iso(&chain.aux_space(), chain.len());
    let mapped = {
        let b = bv_operator(chain, params)?.apply(&chain.highest_vector());
        phi.apply(&b)
    };
    let reversed = BetheParams::new(
        params.t.iter().rev().map(|lvl| lvl.iter().rev().cloned().collect()).collect(),
    );
    let target = bv_operator_twisted(&mirror, &reversed)?.apply(&phi.apply(&chain.highest_vector()));
    let norm_mapped = mapped.norm();
    let norm_target = target.norm();
    if norm_mapped < 1e-12 || norm_target < 1e-12 {
        return Err(Error::InvalidInput("mirror comparison on a vanishing Bethe vector".into()));
    }
    let ratio = mapped.dotc(&target) / C64::new(norm_mapped * norm_mapped, 0.0);
    let residual = (&mapped * ratio - &target).norm() / norm_target;
    Ok(MirrorVectorReport { proportionality_residual: residual, ratio })
}

/// Residual of the Gaudin mirror identity
/// `D_l(u, ∂) = (-1)^l Φ^{-1} [S̃_l]†(-u, -∂) Φ`
/// between the antisymmetrizer family of the chain and the formal adjoint of
/// the symmetrizer family of the mirror. Coefficient-wise (depth `r`):
/// `C_r(u) = (-1)^r Φ^{-1} [Σ_{k≤r} (-1)^{l-k} C(l-k, r-k) C̃_k^{(r-k)}](-u) Φ`.
pub fn gaudin_duality_residual(
    system: &crate::gaudin::GaudinSystem,
    l_max: usize,
    u_samples: &[C64],
) -> Result<f64> {
    use crate::gaudin::{gaudin_diff_op, GaudinSystem, ProjectorKind};
    use crate::pdo::DiffRing;
    use crate::transfer::gen_binomial;
    let chain = &system.chain;
    let mirror = mirror_chain(chain)?;
    let mirror_system = GaudinSystem::new(mirror, system.xi.xi.iter().rev().cloned().collect())?;
    let phi = mirror_iso(&chain.aux_space(), chain.len());
    let phi_inv = phi.mat.transpose();
    let mut worst: f64 = 0.0;
    for l in 1..=l_max {
        let d = gaudin_diff_op(system, l, ProjectorKind::Antisym)?;
        let s = gaudin_diff_op(&mirror_system, l, ProjectorKind::Sym)?;
        for r in 0..=l {
            // Formal-adjoint coefficient at depth r.
            let mut adj_parts: Vec<crate::pdo::RatMat> = Vec::new();
            for k in 0..=r {
                let mut coeff = s.coeffs[k].clone();
                for _ in 0..(r - k) {
                    coeff = coeff.derivative();
                }
                let factor = gen_binomial((l - k) as i64, r - k)
                    * if (l - k) % 2 == 0 { 1.0 } else { -1.0 };
                adj_parts.push(coeff.scale(C64::new(factor, 0.0)));
            }
            for &u in u_samples {
                let dmat = d.coeffs[r].eval(u);
                let mut adj = DMatrix::zeros(chain.dim(), chain.dim());
                for part in &adj_parts {
                    adj += part.eval(-u);
                }
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                let conj = &phi_inv * adj * &phi.mat * C64::new(sign, 0.0);
                let scale = dmat.norm().max(1.0);
                worst = worst.max((dmat - conj).norm() / scale);
            }
        }
    }
    Ok(worst)
}
