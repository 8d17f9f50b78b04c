//! Command pipelines: each maps a validated configuration onto library calls
//! and flattens the outcomes into report rows.

use superchain_core::bethe::duality::{bethe_mirror_ratio, transfer_duality_residual};
use superchain_core::bethe::{
    eigencheck_xxx, grid_starts, singular_check, solve_bae, solve_gaudin_bae, BetheParams,
    BetheSystemXXX, ExcitationProfile, NewtonOpts, SolutionReport,
};
use superchain_core::gaudin::{
    berezinian_extract, classical_limit_check, gaudin_eigencheck, gaudin_singular_check,
    sym_diff_check, GaudinSystem,
};
use superchain_core::graded::wedge_dim;
use superchain_core::reps::ChainSpec;
use superchain_core::rmatrix::{
    fused_twist_commutator_residual, fused_ybe_residual, fusion_product_check,
    r_inversion_residual, reduced_factorization_residual, reduced_inversion_residual,
    yang_baxter_residual,
};
use superchain_core::transfer::{berezinian_series_check, dlq_operator, dlq_reference, TransferEngine};
use superchain_core::{Error, Sampler, C64};

use crate::config::{build_chain, require_distinct_points, RunConfig};
use crate::report::{Report, SolutionEntry};

pub enum CommandError {
    Config(String),
    Internal(String),
}

impl From<superchain_core::Error> for CommandError {
    fn from(e: superchain_core::Error) -> Self {
        match e {
            Error::InvalidInput(msg) => CommandError::Config(msg),
            other => CommandError::Internal(other.to_string()),
        }
    }
}

impl From<crate::config::ConfigError> for CommandError {
    fn from(e: crate::config::ConfigError) -> Self {
        CommandError::Config(e.0)
    }
}

type CmdResult = Result<Report, CommandError>;

fn solution_entry(sol: &SolutionReport) -> SolutionEntry {
    SolutionEntry {
        t: sol
            .params
            .t
            .iter()
            .map(|lvl| lvl.iter().map(|z| [z.re, z.im]).collect())
            .collect(),
        residual: sol.residual_norm,
        iterations: sol.iterations,
        offdiagonal: sol.offdiagonal,
        converged: sol.converged,
    }
}

fn newton_starts(chain: &ChainSpec, xi: &ExcitationProfile, sampler: &mut Sampler) -> Vec<Vec<C64>> {
    if xi.total() == 1 {
        grid_starts(chain, 5, 2.5)
    } else {
        (0..12 * xi.total().max(1))
            .map(|_| (0..xi.total()).map(|_| sampler.box_point(2.5)).collect())
            .collect()
    }
}

fn near_evaluation_point(chain: &ChainSpec, sol: &SolutionReport) -> bool {
    let zs = chain.evaluation_points();
    sol.params.flatten().iter().any(|t| zs.iter().any(|z| (t - z).norm() < 1e-6))
}

fn offdiagonal_params(
    chain: &ChainSpec,
    xi: &[usize],
    sampler: &mut Sampler,
) -> Result<BetheParams, CommandError> {
    let aux = chain.aux_space();
    for _ in 0..200 {
        let t: Vec<Vec<C64>> = xi
            .iter()
            .map(|&cnt| (0..cnt).map(|_| sampler.point(&chain.evaluation_points())).collect())
            .collect();
        let params = BetheParams::new(t);
        if params.offdiagonal_margin(chain.m, &aux) > 0.05 {
            return Ok(params);
        }
    }
    Err(CommandError::Internal("could not sample off-diagonal parameters".into()))
}

pub fn check_ybe(config: &RunConfig) -> CmdResult {
    let mut report = Report::new("check-ybe", config);
    let space = superchain_core::graded::GradedSpace::standard(config.m, config.n);
    let mut sampler = Sampler::new(config.seed);
    let pairs: Vec<(C64, C64)> =
        (0..config.samples).map(|_| (sampler.point(&[]), sampler.point(&[]))).collect();
    report.push("yang-baxter", yang_baxter_residual(&space, &pairs), config.tol);
    report.push(
        "r-inversion",
        r_inversion_residual(&space, &sampler.points(config.samples, &[])),
        config.tol,
    );
    Ok(report)
}

pub fn check_fusion(config: &RunConfig) -> CmdResult {
    let mut report = Report::new("check-fusion", config);
    let space = superchain_core::graded::GradedSpace::standard(config.m, config.n);
    let mut sampler = Sampler::new(config.seed);
    for k in 2..=3usize {
        let rep = fusion_product_check(k, &space)?;
        report.push(format!("fusion-product-sym-k{k}"), rep.sym_residual, config.tol);
        report.push(format!("fusion-product-antisym-k{k}"), rep.antisym_residual, config.tol);
        if wedge_dim(k, config.m, config.n) == 0 {
            continue;
        }
        let samples = superchain_core::rmatrix::fusion_samples(&mut sampler, 2, k + 1);
        report.push(
            format!("reduced-factorization-k{k}"),
            reduced_factorization_residual(k, &space, &samples)?,
            config.tol,
        );
        report.push(
            format!("reduced-inversion-k{k}"),
            reduced_inversion_residual(k, &space, &samples)?,
            config.tol,
        );
    }
    if wedge_dim(2, config.m, config.n) > 0 {
        let poles: Vec<C64> = (-3..=3).map(|j| C64::new(j as f64, 0.0)).collect();
        let pairs: Vec<(C64, C64)> =
            (0..2).map(|_| (sampler.point(&poles), sampler.point(&poles))).collect();
        report.push("fused-ybe-2-1-1", fused_ybe_residual(2, 1, &space, &pairs)?, config.tol);
        let twist: Vec<C64> = config.twist.iter().map(|&[re, im]| C64::new(re, im)).collect();
        report.push(
            "fused-twist-commutator",
            fused_twist_commutator_residual(2, 1, &space, &twist, sampler.point(&poles))?,
            config.tol,
        );
    }
    Ok(report)
}

pub fn check_transfer(config: &RunConfig) -> CmdResult {
    let mut report = Report::new("check-transfer", config);
    let chain = build_chain(config)?;
    let engine = TransferEngine::new(&chain);
    let mut sampler = Sampler::new(config.seed);
    let poles = engine.poles(4);
    let mut comm_anti: f64 = 0.0;
    let mut comm_mixed: f64 = 0.0;
    for _ in 0..config.samples {
        let u = sampler.point(&poles);
        let v = sampler.point(&poles);
        for k in 1..=2usize {
            for l in 1..=2usize {
                let a = engine.transfer_antisym(k, u)?;
                let b = engine.transfer_antisym(l, v)?;
                let bs = engine.transfer_sym(l, v)?;
                comm_anti =
                    comm_anti.max(a.commutator(&b).norm() / (a.norm() * b.norm()).max(1.0));
                comm_mixed =
                    comm_mixed.max(a.commutator(&bs).norm() / (a.norm() * bs.norm()).max(1.0));
            }
        }
    }
    report.push("transfer-commutators", comm_anti, config.tol);
    report.push("mixed-family-commutators", comm_mixed, config.tol);
    let u = sampler.point(&poles);
    for (l, residual) in berezinian_series_check(&engine, 3, u)?.into_iter().enumerate() {
        report.push(format!("series-convolution-l{l}"), residual, config.tol);
    }
    for l in 1..=2usize {
        let got = dlq_operator(&engine, l, u)?;
        let expect = dlq_reference(&engine, l, u)?;
        let mut worst: f64 = 0.0;
        for k in 0..=l {
            worst = worst.max(got[k].sub(&expect[k]).norm() / expect[k].norm().max(1.0));
        }
        report.push(format!("difference-operator-coefficients-l{l}"), worst, config.tol);
    }
    Ok(report)
}

pub fn solve_bae_cmd(config: &RunConfig) -> CmdResult {
    let mut report = Report::new("solve-bae", config);
    let chain = build_chain(config)?;
    let xi = ExcitationProfile::new(config.xi.clone());
    let mut sampler = Sampler::new(config.seed);
    let starts = newton_starts(&chain, &xi, &mut sampler);
    let opts = NewtonOpts::default();
    let sols = solve_bae(&chain, &xi, &starts, &opts)?;
    for (i, sol) in sols.iter().enumerate() {
        report.push(format!("solution-{i}-residual"), sol.residual_norm, opts.tol.max(1e-10));
        report.solutions.push(solution_entry(sol));
    }
    if sols.is_empty() {
        report.push("converged-solutions", 1.0, 0.0); // fails: nothing converged
    }
    Ok(report)
}

pub fn verify_xxx(config: &RunConfig) -> CmdResult {
    let mut report = Report::new("verify-xxx", config);
    let chain = build_chain(config)?;
    let system = BetheSystemXXX::new(chain.clone(), config.xi.clone())
        .map_err(|e| CommandError::Config(e.to_string()))?;
    let xi = ExcitationProfile::new(config.xi.clone());
    let mut sampler = Sampler::new(config.seed);
    let starts = newton_starts(&chain, &xi, &mut sampler);
    let sols = solve_bae(&chain, &xi, &starts, &NewtonOpts::default())?;
    let engine = TransferEngine::new(&chain);
    let poles = engine.poles(4);
    let identity_twist = config.twist.iter().all(|&[re, im]| (re - 1.0).abs() + im.abs() < 1e-12);
    let mut usable = 0usize;
    for (i, sol) in sols.iter().enumerate() {
        report.solutions.push(solution_entry(sol));
        if !sol.converged || !sol.offdiagonal || near_evaluation_point(&chain, sol) {
            continue;
        }
        let samples = sampler.points(config.samples.min(3), &poles);
        let rep = eigencheck_xxx(&system, &sol.params, 2, &samples, 3)?;
        if !rep.conclusive {
            report.push(format!("solution-{i}-degenerate-vector"), 0.0, config.tol);
            continue;
        }
        usable += 1;
        let action = rep.action_residuals.iter().map(|&(_, _, r)| r).fold(0.0, f64::max);
        let series = rep.series_residuals.iter().map(|&(_, _, r)| r).fold(0.0, f64::max);
        report.push(format!("solution-{i}-eigenvector"), action, 1e-8_f64.max(config.tol));
        report.push(format!("solution-{i}-eigenvalue-series"), series, 1e-8_f64.max(config.tol));
        if identity_twist {
            let sing = singular_check(&system, &sol.params)?;
            if sing.conclusive {
                report.push(
                    format!("solution-{i}-singular"),
                    sing.raising_residual.max(sing.weight_residual),
                    1e-8_f64.max(config.tol),
                );
            }
        }
    }
    if usable == 0 {
        report.push("usable-solutions", 1.0, 0.0);
    }
    Ok(report)
}

pub fn verify_gaudin(config: &RunConfig) -> CmdResult {
    let mut report = Report::new("verify-gaudin", config);
    require_distinct_points(config)?;
    let chain = build_chain(config)?;
    let system = GaudinSystem::new(chain.clone(), config.xi.clone())
        .map_err(|e| CommandError::Config(e.to_string()))?;
    let xi = ExcitationProfile::new(config.xi.clone());
    let mut sampler = Sampler::new(config.seed);
    let zs = chain.evaluation_points();
    // Hierarchy self-tests.
    let u = sampler.point(&zs);
    let extraction = berezinian_extract(&system, 3, u)?;
    report.push("extraction-consistency", extraction.consistency, config.tol.min(1e-10));
    let v = sampler.point(&zs);
    let at_v = berezinian_extract(&system, 2, v)?;
    let mut comm: f64 = 0.0;
    for r in 1..=2usize {
        for s in 1..=2usize {
            let a = &extraction.g[r];
            let b = &at_v.g[s];
            comm = comm.max(a.compose(b).sub(&b.compose(a)).norm() / (a.norm() * b.norm()).max(1.0));
        }
    }
    report.push("hierarchy-commutators", comm, config.tol);
    for (l, residual) in sym_diff_check(&system, 2, u)?.into_iter().enumerate() {
        report.push(format!("inverse-series-w{l}"), residual, config.tol);
    }
    // Solve and verify eigenvectors.
    let starts = newton_starts(&chain, &xi, &mut sampler);
    let sols = solve_gaudin_bae(&chain, &xi, &starts, &NewtonOpts::default())?;
    let zero_twist = config.twist.iter().all(|&[re, im]| re.abs() + im.abs() < 1e-12);
    let mut usable = 0usize;
    for (i, sol) in sols.iter().enumerate() {
        report.solutions.push(solution_entry(sol));
        if !sol.converged || !sol.offdiagonal || near_evaluation_point(&chain, sol) {
            continue;
        }
        let samples = sampler.points(config.samples.min(2), &zs);
        let rep = gaudin_eigencheck(&system, &sol.params, 2, &samples)?;
        if !rep.conclusive {
            report.push(format!("solution-{i}-degenerate-vector"), 0.0, config.tol);
            continue;
        }
        usable += 1;
        report.push(
            format!("solution-{i}-eigenvector"),
            rep.max_residual(),
            1e-8_f64.max(config.tol),
        );
        if zero_twist {
            let sing = gaudin_singular_check(&system, &sol.params)?;
            if sing.conclusive {
                report.push(
                    format!("solution-{i}-singular"),
                    sing.raising_residual.max(sing.weight_residual),
                    1e-8_f64.max(config.tol),
                );
            }
        }
    }
    if usable == 0 && xi.total() > 0 {
        report.push("usable-solutions", 1.0, 0.0);
    }
    Ok(report)
}

pub fn check_duality(config: &RunConfig) -> CmdResult {
    let mut report = Report::new("check-duality", config);
    let chain = build_chain(config)?;
    let mut sampler = Sampler::new(config.seed);
    let mut poles = Vec::new();
    for &z in &chain.evaluation_points() {
        for j in -2i32..=2 {
            poles.push(z + C64::new(j as f64, 0.0));
            poles.push(-z + C64::new(j as f64, 0.0));
        }
    }
    let samples = sampler.points(config.samples, &poles);
    report.push(
        "transfer-mirror",
        transfer_duality_residual(&chain, 2, &samples)?,
        config.tol,
    );
    if config.xi.iter().any(|&x| x > 0) {
        let params = offdiagonal_params(&chain, &config.xi, &mut sampler)?;
        let rep = bethe_mirror_ratio(&chain, &params)?;
        report.push("bethe-mirror-proportionality", rep.proportionality_residual, config.tol);
        report.push("bethe-mirror-unimodularity", (rep.ratio.norm() - 1.0).abs(), config.tol);
    }
    Ok(report)
}

pub fn limit_sweep(config: &RunConfig) -> CmdResult {
    let mut report = Report::new("limit-sweep", config);
    require_distinct_points(config)?;
    let chain = build_chain(config)?;
    let system = GaudinSystem::new(chain.clone(), config.xi.clone())
        .map_err(|e| CommandError::Config(e.to_string()))?;
    let mut sampler = Sampler::new(config.seed);
    let params = if config.xi.iter().any(|&x| x > 0) {
        offdiagonal_params(&chain, &config.xi, &mut sampler)?
    } else {
        BetheParams::new(config.xi.iter().map(|_| vec![]).collect())
    };
    let u = sampler.point(&chain.evaluation_points());
    let eps = [1e-1, 1e-2, 1e-3];
    let rep = classical_limit_check(&system, &params, u, &eps)?;
    if let Some(slope) = rep.monodromy_slope {
        report.push_slope("monodromy-slope", slope, 0.1);
    }
    match rep.bethe_vector_slope {
        Some(slope) => report.push_slope("bethe-vector-slope", slope, 0.1),
        None => report.push("bethe-vector-remainder", 0.0, config.tol),
    }
    if let Some(slope) = rep.ratio_slope {
        report.push_slope("bae-ratio-slope", slope, 0.1);
    }
    Ok(report)
}
