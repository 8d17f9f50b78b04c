//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with its residuals and elapsed time.
//!
//! Run with `cargo test -p superchain-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use superchain_core::bethe::duality::{bethe_mirror_ratio, transfer_duality_residual};
use superchain_core::bethe::{
    bae_system, bv_recursive, bv_supertrace, eigencheck_xxx, grid_starts, singular_check,
    solve_bae, solve_gaudin_bae, BetheParams, BetheSystemXXX, ExcitationProfile, NewtonOpts,
};
use superchain_core::gaudin::{
    berezinian_extract, classical_limit_check, gaudin_eigencheck, gaudin_singular_check,
    sym_diff_check, GaudinSystem,
};
use superchain_core::graded::{wedge_dim, GradedSpace};
use superchain_core::poly::NewtonInterp;
use superchain_core::reps::{vector_rep, ChainSpec};
use superchain_core::rmatrix::{
    fusion_product_check, fusion_samples, r_inversion_residual, reduced_factorization_residual,
    reduced_inversion_residual, yang_baxter_residual,
};
use superchain_core::transfer::{berezinian_series_check, dlq_operator, dlq_reference, TransferEngine};
use superchain_core::{Sampler, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn vector_chain(m: usize, n: usize, zs: &[C64], twist: &[C64]) -> ChainSpec {
    let sites = zs.iter().map(|&z| (vector_rep(m, n), z)).collect();
    ChainSpec::new(m, n, sites, twist.to_vec()).unwrap()
}

fn mixed_gl21_chain(twist: &[C64]) -> ChainSpec {
    let sites = vec![
        (vector_rep(2, 1), c(0.35, 0.05)),
        (superchain_core::reps::wedge_rep(2, 2, 1).unwrap(), c(-0.5, -0.15)),
    ];
    ChainSpec::new(2, 1, sites, twist.to_vec()).unwrap()
}

fn report(criterion: usize, pass: bool, detail: &str, elapsed: Duration) {
    println!(
        "criterion {criterion:2}: {} ({detail}; {:.2}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

fn budget(criterion: usize, elapsed: Duration, limit: Duration) {
    assert!(
        elapsed <= limit,
        "criterion {criterion} exceeded its runtime budget: {:?} > {:?}",
        elapsed,
        limit
    );
}

#[test]
fn criterion_01_r_matrix_identities() {
    let start = Instant::now();
    let tol = 1e-9;
    let mut worst: f64 = 0.0;
    let mut s = Sampler::new(1001);
    let mut dims = Vec::new();
    for m in 0..=4usize {
        for n in 0..=4usize {
            if m + n < 1 || m + n > 4 {
                continue;
            }
            dims.push((m, n));
        }
    }
    for &(m, n) in &dims {
        let v = GradedSpace::standard(m, n);
        let pair_samples: Vec<(C64, C64)> =
            (0..3).map(|_| (s.point(&[]), s.point(&[]))).collect();
        worst = worst.max(yang_baxter_residual(&v, &pair_samples));
        worst = worst.max(r_inversion_residual(&v, &s.points(3, &[])));
        for k in 2..=3usize {
            let rep = fusion_product_check(k, &v).unwrap();
            worst = worst.max(rep.sym_residual).max(rep.antisym_residual);
            if wedge_dim(k, m, n) == 0 {
                continue;
            }
            let samples = fusion_samples(&mut s, if k == 3 { 1 } else { 2 }, k + 1);
            worst = worst.max(reduced_factorization_residual(k, &v, &samples).unwrap());
            worst = worst.max(reduced_inversion_residual(k, &v, &samples).unwrap());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst < tol;
    report(1, pass, &format!("worst residual {worst:.3e} over {} spaces", dims.len()), elapsed);
    assert!(pass, "worst R-matrix identity residual {worst:.3e} >= {tol:.1e}");
    budget(1, elapsed, Duration::from_secs(10));
}

#[test]
fn criterion_02_transfer_commutativity() {
    let start = Instant::now();
    let tol = 1e-9;
    let mut worst: f64 = 0.0;
    let mut s = Sampler::new(1002);
    let cases: Vec<(usize, usize, usize)> =
        vec![(1, 1, 3), (2, 1, 2), (1, 2, 2), (3, 0, 2), (0, 2, 2)];
    for &(m, n, sites) in &cases {
        let nn = m + n;
        let zs: Vec<C64> = (0..sites).map(|i| c(0.37 * i as f64 - 0.31, 0.21 - 0.17 * i as f64)).collect();
        let twist: Vec<C64> =
            (0..nn).map(|a| c(1.2 + 0.35 * a as f64, 0.4 - 0.3 * a as f64)).collect();
        let chain = vector_chain(m, n, &zs, &twist);
        let engine = TransferEngine::new(&chain);
        let poles = engine.poles(3);
        for _ in 0..3 {
            let u = s.point(&poles);
            let v = s.point(&poles);
            for k in 1..=2usize {
                for l in 1..=2usize {
                    let a = engine.transfer_antisym(k, u).unwrap();
                    let b = engine.transfer_antisym(l, v).unwrap();
                    let bs = engine.transfer_sym(l, v).unwrap();
                    let asym = engine.transfer_sym(k, u).unwrap();
                    for (x, y) in [(&a, &b), (&a, &bs), (&asym, &bs)] {
                        let res = x.commutator(y).norm() / (x.norm() * y.norm()).max(1.0);
                        worst = worst.max(res);
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst < tol;
    report(2, pass, &format!("worst commutator {worst:.3e} over {} chains", cases.len()), elapsed);
    assert!(pass, "worst transfer commutator {worst:.3e} >= {tol:.1e}");
    budget(2, elapsed, Duration::from_secs(30));
}

#[test]
fn criterion_03_generating_series_identities() {
    let start = Instant::now();
    let tol = 1e-9;
    let mut worst: f64 = 0.0;
    let mut s = Sampler::new(1003);
    // Superdimension 0 chain.
    let gl11 = vector_chain(
        1,
        1,
        &[c(0.3, 0.15), c(-0.45, -0.3)],
        &[c(1.4, 0.3), c(0.7, -0.6)],
    );
    // Superdimension 1 chain.
    let gl21 = vector_chain(
        2,
        1,
        &[c(0.25, 0.1), c(-0.4, 0.2)],
        &[c(1.3, 0.2), c(0.8, -0.3), c(0.5, 0.45)],
    );
    for (chain, lmax_conv, lmax_dlq) in [(&gl11, 3usize, 3usize), (&gl21, 2, 2)] {
        let engine = TransferEngine::new(chain);
        let poles = engine.poles(4);
        let u = s.point(&poles);
        for r in berezinian_series_check(&engine, lmax_conv, u).unwrap() {
            worst = worst.max(r);
        }
        for l in 1..=lmax_dlq {
            let got = dlq_operator(&engine, l, u).unwrap();
            let expect = dlq_reference(&engine, l, u).unwrap();
            for k in 0..=l {
                worst = worst.max(got[k].sub(&expect[k]).norm() / expect[k].norm().max(1.0));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst < tol;
    report(3, pass, &format!("worst series residual {worst:.3e}"), elapsed);
    assert!(pass, "worst generating-series residual {worst:.3e} >= {tol:.1e}");
    budget(3, elapsed, Duration::from_secs(30));
}

#[test]
fn criterion_04_bethe_vector_cross_oracle() {
    let start = Instant::now();
    let tol = 1e-8;
    let mut worst: f64 = 0.0;
    let mut s = Sampler::new(1004);
    let gl11 = vector_chain(1, 1, &[c(0.3, 0.1), c(-0.6, -0.4)], &[c(1.0, 0.0); 2]);
    let gl21 = vector_chain(2, 1, &[c(0.25, 0.15), c(-0.55, -0.35)], &[c(1.0, 0.0); 3]);
    let mut cases: Vec<(&ChainSpec, Vec<usize>)> = Vec::new();
    cases.push((&gl11, vec![1]));
    cases.push((&gl11, vec![2]));
    cases.push((&gl21, vec![1, 1]));
    for (chain, xi) in cases {
        let aux = chain.aux_space();
        let mut done = 0;
        while done < 5 {
            let t: Vec<Vec<C64>> = xi
                .iter()
                .map(|&cnt| (0..cnt).map(|_| s.point(&chain.evaluation_points())).collect())
                .collect();
            let params = BetheParams::new(t);
            if params.offdiagonal_margin(chain.m, &aux) < 0.05 {
                continue;
            }
            let a = bv_supertrace(chain, &params).unwrap();
            let b = bv_recursive(chain, &params).unwrap();
            let denom = a.norm().max(b.norm()).max(1e-30);
            worst = worst.max((&a - &b).norm() / denom);
            done += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = worst < tol;
    report(4, pass, &format!("worst cross-oracle deviation {worst:.3e}"), elapsed);
    assert!(pass, "worst Bethe-vector cross-oracle deviation {worst:.3e} >= {tol:.1e}");
    budget(4, elapsed, Duration::from_secs(60));
}

fn eigencheck_case(
    chain: &ChainSpec,
    xi: Vec<usize>,
    starts: &[Vec<C64>],
    sampler: &mut Sampler,
) -> (f64, usize) {
    let system = BetheSystemXXX::new(chain.clone(), xi.clone()).unwrap();
    let profile = ExcitationProfile::new(xi);
    let sols = solve_bae(chain, &profile, starts, &NewtonOpts::default()).unwrap();
    let engine = TransferEngine::new(chain);
    let poles = engine.poles(4);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let zs = chain.evaluation_points();
    for sol in sols.iter().filter(|s| s.converged && s.offdiagonal) {
        // Roots that collide with an evaluation point are artifacts of the
        // polynomial clearing (the Bethe vector has a pole there); skip them.
        if sol.params.flatten().iter().any(|t| zs.iter().any(|z| (t - z).norm() < 1e-6)) {
            continue;
        }
        let samples = sampler.points(2, &poles);
        let rep = eigencheck_xxx(&system, &sol.params, 2, &samples, 3).unwrap();
        if !rep.conclusive {
            continue;
        }
        worst = worst.max(rep.max_residual());
        checked += 1;
    }
    (worst, checked)
}

#[test]
fn criterion_05_xxx_eigenvalue_theorem() {
    let start = Instant::now();
    let tol = 1e-8;
    let mut s = Sampler::new(1005);
    // gl(1|1), two sites, generic twist, one excitation: full 5x5 grid.
    let gl11 = vector_chain(
        1,
        1,
        &[c(0.4, 0.0), c(-0.7, 0.1)],
        &[c(1.9, 0.2), c(0.8, -0.3)],
    );
    let (worst11, checked11) = eigencheck_case(&gl11, vec![1], &grid_starts(&gl11, 5, 2.5), &mut s);
    assert!(checked11 >= 2, "expected at least two conclusive gl(1|1) eigenchecks");
    // gl(2|1), vector site + degree-2 wedge site (nonzero second weight keeps
    // every nesting level nondegenerate), profile (1,1): random multi-starts.
    let gl21 = mixed_gl21_chain(&[c(1.6, 0.1), c(0.9, -0.25), c(0.45, 0.3)]);
    let starts: Vec<Vec<C64>> = (0..24).map(|_| vec![s.box_point(2.5), s.box_point(2.5)]).collect();
    let (worst21, checked21) = eigencheck_case(&gl21, vec![1, 1], &starts, &mut s);
    assert!(checked21 >= 1, "expected at least one conclusive gl(2|1) eigencheck");
    let worst = worst11.max(worst21);
    let elapsed = start.elapsed();
    let pass = worst < tol;
    report(
        5,
        pass,
        &format!("worst eigen residual {worst:.3e} over {} solutions", checked11 + checked21),
        elapsed,
    );
    assert!(pass, "worst eigencheck residual {worst:.3e} >= {tol:.1e}");
    budget(5, elapsed, Duration::from_secs(120));
}

#[test]
fn criterion_06_singular_vectors_at_identity_twist() {
    let start = Instant::now();
    let tol = 1e-8;
    let mut worst: f64 = 0.0;
    let mut s = Sampler::new(1006);
    let mut checked = 0usize;
    // Identity-twist versions of the criterion-5 systems.
    let gl11 = vector_chain(1, 1, &[c(0.4, 0.0), c(-0.7, 0.1)], &[c(1.0, 0.0); 2]);
    let gl21 = mixed_gl21_chain(&[c(1.0, 0.0); 3]);
    let starts21: Vec<Vec<C64>> =
        (0..24).map(|_| vec![s.box_point(2.5), s.box_point(2.5)]).collect();
    for (chain, xi, starts) in [
        (&gl11, vec![1usize], grid_starts(&gl11, 5, 2.5)),
        (&gl21, vec![1, 1], starts21),
    ] {
        let system = BetheSystemXXX::new(chain.clone(), xi.clone()).unwrap();
        let profile = ExcitationProfile::new(xi);
        let sols = solve_bae(chain, &profile, &starts, &NewtonOpts::default()).unwrap();
        let zs = chain.evaluation_points();
        for sol in sols.iter().filter(|s| s.converged && s.offdiagonal) {
            if sol.params.flatten().iter().any(|t| zs.iter().any(|z| (t - z).norm() < 1e-6)) {
                continue;
            }
            let rep = singular_check(&system, &sol.params).unwrap();
            if !rep.conclusive {
                continue;
            }
            worst = worst.max(rep.raising_residual).max(rep.weight_residual);
            checked += 1;
        }
    }
    assert!(checked >= 2, "expected singular checks on both systems");
    let elapsed = start.elapsed();
    let pass = worst < tol;
    report(6, pass, &format!("worst singular residual {worst:.3e} over {checked} solutions"), elapsed);
    assert!(pass, "worst singular-vector residual {worst:.3e} >= {tol:.1e}");
    budget(6, elapsed, Duration::from_secs(120));
}

#[test]
fn criterion_07_mirror_duality() {
    let start = Instant::now();
    let tol = 1e-9;
    let mut s = Sampler::new(1007);
    let mut worst: f64 = 0.0;
    // Transfer-matrix mirror for gl(1|1) and gl(2|1).
    let gl11 = vector_chain(
        1,
        1,
        &[c(0.31, 0.17), c(-0.42, -0.23)],
        &[c(1.2, 0.3), c(0.7, -0.4)],
    );
    let gl21 = vector_chain(2, 1, &[c(0.27, -0.11)], &[c(1.3, 0.1), c(0.8, -0.2), c(0.5, 0.4)]);
    for chain in [&gl11, &gl21] {
        let mut poles = Vec::new();
        for &z in &chain.evaluation_points() {
            for j in -2i32..=2 {
                poles.push(z + c(j as f64, 0.0));
                poles.push(-z + c(j as f64, 0.0));
            }
        }
        let samples = s.points(3, &poles);
        worst = worst.max(transfer_duality_residual(chain, 2, &samples).unwrap());
    }
    // Bethe-vector mirror: constant ratio of unit modulus.
    let free11 = vector_chain(1, 1, &[c(0.31, 0.17), c(-0.42, -0.23)], &[c(1.0, 0.0); 2]);
    let free21 = vector_chain(2, 1, &[c(0.27, -0.11), c(-0.33, 0.21)], &[c(1.0, 0.0); 3]);
    let cases: Vec<(&ChainSpec, BetheParams)> = vec![
        (&free11, BetheParams::new(vec![vec![c(1.21, 0.43)]])),
        (&free21, BetheParams::new(vec![vec![c(1.21, 0.43)], vec![c(1.58, 0.14)]])),
    ];
    let mut worst_ratio: f64 = 0.0;
    for (chain, params) in cases {
        let rep = bethe_mirror_ratio(chain, &params).unwrap();
        worst = worst.max(rep.proportionality_residual);
        worst_ratio = worst_ratio.max((rep.ratio.norm() - 1.0).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst < tol && worst_ratio < 1e-9;
    report(
        7,
        pass,
        &format!("worst duality residual {worst:.3e}, |ratio|-1 up to {worst_ratio:.3e}"),
        elapsed,
    );
    assert!(pass, "duality residual {worst:.3e} or ratio deviation {worst_ratio:.3e} too large");
    budget(7, elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_08_gaudin_extraction() {
    let start = Instant::now();
    let mut s = Sampler::new(1008);
    let chain = vector_chain(
        1,
        1,
        &[c(0.4, 0.0), c(-0.5, 0.3)],
        &[c(0.9, 0.1), c(0.3, -0.2)],
    );
    let system = GaudinSystem::new(chain.clone(), vec![1]).unwrap();
    let zs = chain.evaluation_points();
    let u = s.point(&zs);
    let v = s.point(&zs);
    let at_u = berezinian_extract(&system, 3, u).unwrap();
    let at_v = berezinian_extract(&system, 3, v).unwrap();
    let consistency = at_u.consistency.max(at_v.consistency);
    let mut commutator: f64 = 0.0;
    for r in 1..=3usize {
        for t in 1..=3usize {
            let a = &at_u.g[r];
            let b = &at_v.g[t];
            commutator = commutator
                .max(a.compose(b).sub(&b.compose(a)).norm() / (a.norm() * b.norm()).max(1.0));
        }
    }
    let inverse: f64 = sym_diff_check(&system, 2, u)
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max);
    // Superdimension 1 system exercises the nonzero-factorial path.
    let chain21 = vector_chain(
        2,
        1,
        &[c(0.3, 0.1), c(-0.45, -0.2)],
        &[c(0.8, 0.15), c(0.35, -0.25), c(0.2, 0.4)],
    );
    let system21 = GaudinSystem::new(chain21, vec![1, 0]).unwrap();
    let consistency21 = berezinian_extract(&system21, 3, s.point(&zs)).unwrap().consistency;
    let elapsed = start.elapsed();
    let pass = consistency < 1e-10 && consistency21 < 1e-10 && commutator < 1e-9 && inverse < 1e-9;
    report(
        8,
        pass,
        &format!(
            "consistency {:.3e}, commutators {commutator:.3e}, inverse series {inverse:.3e}",
            consistency.max(consistency21)
        ),
        elapsed,
    );
    assert!(consistency < 1e-10 && consistency21 < 1e-10, "extraction consistency failed");
    assert!(commutator < 1e-9, "hierarchy commutator {commutator:.3e} >= 1e-9");
    assert!(inverse < 1e-9, "inverse-series residual {inverse:.3e} >= 1e-9");
    budget(8, elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_09_gaudin_eigenvalue_theorem() {
    let start = Instant::now();
    let tol = 1e-8;
    let mut s = Sampler::new(1009);
    let chain = vector_chain(
        1,
        1,
        &[c(0.6, 0.0), c(-0.8, 0.0)],
        &[c(0.8, 0.0), c(0.25, 0.0)],
    );
    let system = GaudinSystem::new(chain.clone(), vec![1]).unwrap();
    let profile = ExcitationProfile::new(vec![1]);
    let sols =
        solve_gaudin_bae(&chain, &profile, &grid_starts(&chain, 5, 2.0), &NewtonOpts::default())
            .unwrap();
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for sol in sols.iter().filter(|s| s.converged && s.offdiagonal) {
        let samples = s.points(2, &chain.evaluation_points());
        let rep = gaudin_eigencheck(&system, &sol.params, 2, &samples).unwrap();
        if rep.conclusive {
            worst = worst.max(rep.max_residual());
            checked += 1;
        }
    }
    assert!(checked >= 1, "no conclusive Gaudin eigencheck");
    // K = 0 singular-vector check.
    let chain0 = vector_chain(1, 1, &[c(0.6, 0.0), c(-0.8, 0.0)], &[c(0.0, 0.0); 2]);
    let system0 = GaudinSystem::new(chain0.clone(), vec![1]).unwrap();
    let sols0 =
        solve_gaudin_bae(&chain0, &profile, &grid_starts(&chain0, 5, 2.0), &NewtonOpts::default())
            .unwrap();
    let mut singular_checked = 0usize;
    for sol in sols0.iter().filter(|s| s.converged && s.offdiagonal) {
        let rep = gaudin_singular_check(&system0, &sol.params).unwrap();
        if rep.conclusive {
            worst = worst.max(rep.raising_residual).max(rep.weight_residual);
            singular_checked += 1;
        }
    }
    assert!(singular_checked >= 1, "no conclusive K = 0 singular check");
    let elapsed = start.elapsed();
    let pass = worst < tol;
    report(9, pass, &format!("worst Gaudin residual {worst:.3e}"), elapsed);
    assert!(pass, "worst Gaudin eigen/singular residual {worst:.3e} >= {tol:.1e}");
    budget(9, elapsed, Duration::from_secs(120));
}

#[test]
fn criterion_10_degeneration_slopes() {
    let start = Instant::now();
    let chain = vector_chain(
        1,
        1,
        &[c(0.6, 0.0), c(-0.8, 0.0)],
        &[c(0.8, 0.0), c(0.25, 0.0)],
    );
    let system = GaudinSystem::new(chain, vec![1]).unwrap();
    let params = BetheParams::new(vec![vec![c(1.7, 0.3)]]);
    let eps = [1e-1, 1e-2, 1e-3];
    let rep = classical_limit_check(&system, &params, c(1.1, 0.2), &eps).unwrap();
    let slopes = [
        ("monodromy", rep.monodromy_slope.unwrap()),
        ("bethe-vector", rep.bethe_vector_slope.unwrap()),
        ("bae-ratio", rep.ratio_slope.unwrap()),
    ];
    let elapsed = start.elapsed();
    let pass = slopes.iter().all(|&(_, s)| (1.9..=2.1).contains(&s));
    let detail = slopes
        .iter()
        .map(|(name, s)| format!("{name} {s:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    report(10, pass, &detail, elapsed);
    for (name, slope) in slopes {
        assert!((1.9..=2.1).contains(&slope), "{name} slope {slope} outside [1.9, 2.1]");
    }
    budget(10, elapsed, Duration::from_secs(60));
}

#[test]
fn xxx_grid_matches_polynomial_root_oracle() {
    // Companion-style oracle behind the criterion-5 grid search: the cleared
    // one-variable equation is quadratic and the grid recovers both roots.
    let chain = vector_chain(1, 1, &[c(0.4, 0.0), c(-0.7, 0.1)], &[c(1.9, 0.2), c(0.8, -0.3)]);
    let profile = ExcitationProfile::new(vec![1]);
    let system = bae_system(&chain, &profile);
    let nodes = [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.5)];
    let vals: Vec<C64> = nodes.iter().map(|&t| system.residual(&[t])[0]).collect();
    let poly = NewtonInterp::fit(&nodes, &vals).to_poly();
    let mut roots = poly.roots().unwrap();
    let sols =
        solve_bae(&chain, &profile, &grid_starts(&chain, 5, 2.5), &NewtonOpts::default()).unwrap();
    assert_eq!(sols.len(), roots.len());
    for sol in &sols {
        let t0 = sol.params.t[0][0];
        let (idx, _) = roots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t0).norm().partial_cmp(&(b.1 - t0).norm()).unwrap())
            .unwrap();
        assert!((roots[idx] - t0).norm() < 1e-8);
        roots.remove(idx);
    }
}
