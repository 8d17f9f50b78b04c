//! Bethe ansatz equations in polynomial-cleared form and a multi-start Newton
//! solver with analytic Jacobians.
//!
//! Every residual is a sum of two signed products of affine factors in the
//! parameters, so values and exact gradients come from one product-rule pass.

use super::{BetheParams, ExcitationProfile};
use crate::reps::ChainSpec;
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Affine form `c + Σ coeff_v · t_v` over the flattened parameter vector.
#[derive(Debug, Clone)]
struct Affine {
    c: C64,
    lin: Vec<(usize, f64)>,
}

impl Affine {
    fn eval(&self, t: &[C64]) -> C64 {
        let mut v = self.c;
        for &(idx, w) in &self.lin {
            v += t[idx] * w;
        }
        v
    }
}

/// One signed product of affine factors.
#[derive(Debug, Clone)]
struct Term {
    coef: C64,
    factors: Vec<Affine>,
}

impl Term {
    fn eval(&self, t: &[C64]) -> C64 {
        self.factors.iter().fold(self.coef, |acc, f| acc * f.eval(t))
    }

    fn grad_into(&self, t: &[C64], grad: &mut [C64]) {
        let vals: Vec<C64> = self.factors.iter().map(|f| f.eval(t)).collect();
        for (fi, f) in self.factors.iter().enumerate() {
            let mut rest = self.coef;
            for (vi, &v) in vals.iter().enumerate() {
                if vi != fi {
                    rest *= v;
                }
            }
            for &(idx, w) in &f.lin {
                grad[idx] += rest * w;
            }
        }
    }
}

/// Cleared-polynomial residual system for the XXX Bethe ansatz equations.
pub struct BaeSystem {
    terms: Vec<[Term; 2]>,
    pub vars: usize,
}

/// Build the cleared residuals
/// `F_{a,i} = -kappa_a Q_a Π_j (t_i^a - z_j + kappa_a Λ_j^a) ·
///            y_{a-1}(t_i^a + kappa_a) y_a(t_i^a - kappa_a) y_{a+1}(t_i^a)
///            - kappa_{a+1} Q_{a+1} Π_j (t_i^a - z_j + kappa_{a+1} Λ_j^{a+1}) ·
///            y_{a-1}(t_i^a) y_a(t_i^a + kappa_{a+1}) y_{a+1}(t_i^a - kappa_{a+1})`.
pub fn bae_system(chain: &ChainSpec, xi: &ExcitationProfile) -> BaeSystem {
    let aux = chain.aux_space();
    let var_index = |a: usize, i: usize| -> usize { xi.before(a) + i };
    let mut terms = Vec::new();
    for a0 in 0..xi.levels() {
        let kappa_a = aux.kappa(a0);
        let kappa_a1 = aux.kappa(a0 + 1);
        for i in 0..xi.xi[a0] {
            let v0 = var_index(a0, i);
            // Shared closure building y_b(t_i^a + shift) factors. The self
            // factor (b, l) = (a, i) cancels in the linear part and leaves
            // the constant shift, which the affine form handles on its own.
            let y_factors = |level: isize, shift: f64| -> Vec<Affine> {
                let mut out = Vec::new();
                if level < 0 || level as usize >= xi.levels() {
                    return out;
                }
                let b = level as usize;
                for l in 0..xi.xi[b] {
                    let vl = var_index(b, l);
                    let mut lin = vec![(v0, 1.0)];
                    if vl == v0 {
                        lin.push((v0, -1.0));
                    } else {
                        lin.push((vl, -1.0));
                    }
                    out.push(Affine { c: C64::new(shift, 0.0), lin });
                }
                out
            };
            let site_factors = |kappa: f64, column: usize| -> Vec<Affine> {
                chain
                    .sites
                    .iter()
                    .map(|(module, z)| Affine {
                        c: -z + module.weight.components[column] * kappa,
                        lin: vec![(v0, 1.0)],
                    })
                    .collect()
            };
            let mut f1 = Vec::new();
            f1.extend(site_factors(kappa_a, a0));
            f1.extend(y_factors(a0 as isize - 1, kappa_a));
            f1.extend(y_factors(a0 as isize, -kappa_a));
            f1.extend(y_factors(a0 as isize + 1, 0.0));
            let t1 = Term { coef: C64::new(-kappa_a, 0.0) * chain.twist[a0], factors: f1 };
            let mut f2 = Vec::new();
            f2.extend(site_factors(kappa_a1, a0 + 1));
            f2.extend(y_factors(a0 as isize - 1, 0.0));
            f2.extend(y_factors(a0 as isize, kappa_a1));
            f2.extend(y_factors(a0 as isize + 1, -kappa_a1));
            let t2 = Term { coef: C64::new(-kappa_a1, 0.0) * chain.twist[a0 + 1], factors: f2 };
            terms.push([t1, t2]);
        }
    }
    BaeSystem { terms, vars: xi.total() }
}

impl BaeSystem {
    pub fn residual(&self, t: &[C64]) -> Vec<C64> {
        self.terms.iter().map(|[t1, t2]| t1.eval(t) + t2.eval(t)).collect()
    }

    pub fn jacobian(&self, t: &[C64]) -> DMatrix<C64> {
        let mut jac = DMatrix::zeros(self.terms.len(), self.vars);
        for (row, [t1, t2]) in self.terms.iter().enumerate() {
            let mut grad = vec![C64::new(0.0, 0.0); self.vars];
            t1.grad_into(t, &mut grad);
            t2.grad_into(t, &mut grad);
            for (col, g) in grad.into_iter().enumerate() {
                jac[(row, col)] = g;
            }
        }
        jac
    }
}

/// Cleared residual values of the XXX Bethe ansatz equations at `params`.
pub fn bae_residual(chain: &ChainSpec, params: &BetheParams) -> Vec<C64> {
    let xi = params.profile();
    let system = bae_system(chain, &xi);
    system.residual(&params.flatten())
}

/// Newton solver options.
#[derive(Debug, Clone)]
pub struct NewtonOpts {
    pub tol: f64,
    pub max_iter: usize,
    pub dedup_radius: f64,
    /// Margin below which a solution is flagged as not off-diagonal.
    pub offdiag_threshold: f64,
}

impl Default for NewtonOpts {
    fn default() -> Self {
        NewtonOpts { tol: 1e-12, max_iter: 50, dedup_radius: 1e-8, offdiag_threshold: 1e-6 }
    }
}

/// One converged (or abandoned) Newton run.
#[derive(Debug, Clone)]
pub struct SolutionReport {
    pub params: BetheParams,
    pub residual_norm: f64,
    pub iterations: usize,
    pub offdiagonal: bool,
    pub converged: bool,
}

fn canonicalize(params: &mut BetheParams) {
    for lvl in params.t.iter_mut() {
        lvl.sort_by(|a, b| {
            (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(std::cmp::Ordering::Equal)
        });
    }
}

fn sup_norm(fv: &[C64]) -> f64 {
    fv.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Newton with backtracking: halve the step until the residual decreases.
/// Rational systems have flat far fields where the full step explodes; the
/// damping widens the basins without touching local quadratic convergence.
fn newton_run<F, J>(
    f: &F,
    jac: &J,
    start: &[C64],
    opts: &NewtonOpts,
) -> (Vec<C64>, f64, usize, bool)
where
    F: Fn(&[C64]) -> Vec<C64>,
    J: Fn(&[C64]) -> DMatrix<C64>,
{
    let mut t: Vec<C64> = start.to_vec();
    let mut norm = sup_norm(&f(&t));
    for iter in 0..opts.max_iter {
        if norm < opts.tol {
            return (t, norm, iter, true);
        }
        let j = jac(&t);
        let rhs = DVector::from_vec(f(&t));
        let step = match j.lu().solve(&rhs) {
            Some(step) if step.norm().is_finite() => step,
            _ => return (t, norm, iter, false),
        };
        let mut accepted = false;
        let mut lambda = 1.0f64;
        for _ in 0..12 {
            let trial: Vec<C64> =
                t.iter().zip(step.iter()).map(|(ti, si)| ti - si * lambda).collect();
            let trial_norm = sup_norm(&f(&trial));
            if trial_norm.is_finite() && trial_norm < norm {
                t = trial;
                norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return (t, norm, iter, false);
        }
    }
    (t, norm, opts.max_iter, norm < opts.tol)
}

fn collect_solutions<F, J>(
    f: F,
    jac: J,
    starts: &[Vec<C64>],
    xi: &ExcitationProfile,
    chain: &ChainSpec,
    opts: &NewtonOpts,
) -> Vec<SolutionReport>
where
    F: Fn(&[C64]) -> Vec<C64> + Sync,
    J: Fn(&[C64]) -> DMatrix<C64> + Sync,
{
    let aux = chain.aux_space();
    let mut runs: Vec<(usize, SolutionReport)> = starts
        .par_iter()
        .enumerate()
        .map(|(idx, start)| {
            let (t, residual_norm, iterations, converged) = newton_run(&f, &jac, start, opts);
            let mut params = BetheParams::from_flat(xi, &t);
            canonicalize(&mut params);
            // Reorder the odd-adjacent level by real part before the shift test.
            let offdiagonal = params.is_offdiagonal(chain.m, &aux, opts.offdiag_threshold);
            (idx, SolutionReport { params, residual_norm, iterations, offdiagonal, converged })
        })
        .collect();
    runs.sort_by_key(|&(idx, _)| idx);
    // Deterministic dedup in start order.
    let mut out: Vec<SolutionReport> = Vec::new();
    for (_, rep) in runs {
        if !rep.converged {
            continue;
        }
        let flat = rep.params.flatten();
        let dup = out.iter().any(|existing| {
            let other = existing.params.flatten();
            flat.iter().zip(other.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
                < opts.dedup_radius
        });
        if !dup {
            out.push(rep);
        }
    }
    out
}

/// Multi-start Newton on the cleared XXX Bethe ansatz equations.
///
/// Starts are supplied as flattened parameter vectors; converged runs are
/// deduplicated deterministically (by start index order) and each surviving
/// solution carries its off-diagonality flag.
pub fn solve_bae(
    chain: &ChainSpec,
    xi: &ExcitationProfile,
    starts: &[Vec<C64>],
    opts: &NewtonOpts,
) -> Result<Vec<SolutionReport>> {
    if xi.total() == 0 {
        return Ok(vec![SolutionReport {
            params: BetheParams::new(xi.xi.iter().map(|_| vec![]).collect()),
            residual_norm: 0.0,
            iterations: 0,
            offdiagonal: true,
            converged: true,
        }]);
    }
    if starts.is_empty() {
        return Err(Error::InvalidInput("no Newton starts supplied".into()));
    }
    let system = bae_system(chain, xi);
    let f = |t: &[C64]| system.residual(t);
    let jac = |t: &[C64]| system.jacobian(t);
    Ok(collect_solutions(f, jac, starts, xi, chain, opts))
}

/// Rational-form residuals of the Gaudin Bethe ansatz equations:
/// `K_a - K_{a+1} + Σ_j (kappa_a Λ_j^a - kappa_{a+1} Λ_j^{a+1})/(t_i^a - z_j)
///  + Σ_j kappa_a/(t_i^a - t_j^{a-1}) - Σ_{j≠i} (kappa_a + kappa_{a+1})/(t_i^a - t_j^a)
///  + Σ_j kappa_{a+1}/(t_i^a - t_j^{a+1})`.
pub fn gaudin_bae_residual(chain: &ChainSpec, params: &BetheParams) -> Result<Vec<C64>> {
    let aux = chain.aux_space();
    let xi = params.profile();
    let mut out = Vec::with_capacity(xi.total());
    for a0 in 0..xi.levels() {
        let kappa_a = aux.kappa(a0);
        let kappa_a1 = aux.kappa(a0 + 1);
        for i in 0..xi.xi[a0] {
            let x = params.t[a0][i];
            let mut val = chain.twist[a0] - chain.twist[a0 + 1];
            for (module, z) in &chain.sites {
                let num = module.weight.components[a0] * kappa_a
                    - module.weight.components[a0 + 1] * kappa_a1;
                let d = x - z;
                if d.norm() < 1e-12 && num.norm() > 1e-12 {
                    return Err(Error::CoincidentParameters { dist: d.norm() });
                }
                if d.norm() >= 1e-12 {
                    val += num / d;
                }
            }
            if a0 >= 1 {
                for &y in &params.t[a0 - 1] {
                    let d = x - y;
                    if d.norm() < 1e-12 {
                        return Err(Error::CoincidentParameters { dist: d.norm() });
                    }
                    val += C64::new(kappa_a, 0.0) / d;
                }
            }
            for (j, &y) in params.t[a0].iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = x - y;
                if d.norm() < 1e-12 {
                    return Err(Error::CoincidentParameters { dist: d.norm() });
                }
                val -= C64::new(kappa_a + kappa_a1, 0.0) / d;
            }
            if a0 + 1 < xi.levels() {
                for &y in &params.t[a0 + 1] {
                    let d = x - y;
                    if d.norm() < 1e-12 {
                        return Err(Error::CoincidentParameters { dist: d.norm() });
                    }
                    val += C64::new(kappa_a1, 0.0) / d;
                }
            }
            out.push(val);
        }
    }
    Ok(out)
}

fn gaudin_jacobian(chain: &ChainSpec, xi: &ExcitationProfile, t: &[C64]) -> DMatrix<C64> {
    let aux = chain.aux_space();
    let vars = xi.total();
    let var_index = |a: usize, i: usize| -> usize { xi.before(a) + i };
    let mut jac = DMatrix::zeros(vars, vars);
    let params = BetheParams::from_flat(xi, t);
    let mut row = 0usize;
    for a0 in 0..xi.levels() {
        let kappa_a = aux.kappa(a0);
        let kappa_a1 = aux.kappa(a0 + 1);
        for i in 0..xi.xi[a0] {
            let x = params.t[a0][i];
            let v0 = var_index(a0, i);
            // d/dx of c/(x - y) is -c/(x-y)^2; d/dy is +c/(x-y)^2.
            let mut add = |col: usize, val: C64| {
                jac[(row, col)] += val;
            };
            for (module, z) in &chain.sites {
                let num = module.weight.components[a0] * kappa_a
                    - module.weight.components[a0 + 1] * kappa_a1;
                let d = x - z;
                add(v0, -num / (d * d));
            }
            if a0 >= 1 {
                for (l, &y) in params.t[a0 - 1].iter().enumerate() {
                    let d = x - y;
                    let g = C64::new(kappa_a, 0.0) / (d * d);
                    add(v0, -g);
                    add(var_index(a0 - 1, l), g);
                }
            }
            for (j, &y) in params.t[a0].iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = x - y;
                let g = C64::new(kappa_a + kappa_a1, 0.0) / (d * d);
                add(v0, g);
                add(var_index(a0, j), -g);
            }
            if a0 + 1 < xi.levels() {
                for (l, &y) in params.t[a0 + 1].iter().enumerate() {
                    let d = x - y;
                    let g = C64::new(kappa_a1, 0.0) / (d * d);
                    add(v0, -g);
                    add(var_index(a0 + 1, l), g);
                }
            }
            row += 1;
        }
    }
    jac
}

/// Multi-start Newton on the Gaudin Bethe ansatz equations.
pub fn solve_gaudin_bae(
    chain: &ChainSpec,
    xi: &ExcitationProfile,
    starts: &[Vec<C64>],
    opts: &NewtonOpts,
) -> Result<Vec<SolutionReport>> {
    if xi.total() == 0 {
        return Ok(vec![SolutionReport {
            params: BetheParams::new(xi.xi.iter().map(|_| vec![]).collect()),
            residual_norm: 0.0,
            iterations: 0,
            offdiagonal: true,
            converged: true,
        }]);
    }
    if starts.is_empty() {
        return Err(Error::InvalidInput("no Newton starts supplied".into()));
    }
    let f = |t: &[C64]| {
        let params = BetheParams::from_flat(xi, t);
        gaudin_bae_residual(chain, &params)
            .unwrap_or_else(|_| vec![C64::new(f64::INFINITY, 0.0); xi.total()])
    };
    let jac = |t: &[C64]| gaudin_jacobian(chain, xi, t);
    Ok(collect_solutions(f, jac, starts, xi, chain, opts))
}

/// Rectangular grid of single-variable starts `re + i·im` used for 1-parameter
/// systems, centered on the evaluation points.
pub fn grid_starts(chain: &ChainSpec, per_axis: usize, radius: f64) -> Vec<Vec<C64>> {
    let zs = chain.evaluation_points();
    let center = zs.iter().sum::<C64>() / C64::new(zs.len() as f64, 0.0);
    let mut starts = Vec::with_capacity(per_axis * per_axis);
    for i in 0..per_axis {
        for j in 0..per_axis {
            let fr = if per_axis == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64 };
            let fi = if per_axis == 1 { 0.0 } else { -1.0 + 2.0 * j as f64 / (per_axis - 1) as f64 };
            starts.push(vec![center + C64::new(radius * fr, radius * fi)]);
        }
    }
    starts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::BetheParams;
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
    fn one_site_root_in_closed_form() {
        // Q1 (t - z + 1) = Q2 (t - z): root t* = z - Q1/(Q1 - Q2).
        let z = c(0.0, 0.0);
        let q = [c(2.0, 0.0), c(1.0, 0.0)];
        let chain = gl11_chain(&[z], &q);
        let xi = ExcitationProfile::new(vec![1]);
        let root = z - q[0] / (q[0] - q[1]);
        let params = BetheParams::new(vec![vec![root]]);
        let res = bae_residual(&chain, &params);
        assert!(res[0].norm() < 1e-12);
        // Newton from the grid converges to it.
        let sols = solve_bae(&chain, &xi, &grid_starts(&chain, 5, 2.5), &NewtonOpts::default()).unwrap();
        assert_eq!(sols.len(), 1);
        assert!((sols[0].params.t[0][0] - root).norm() < 1e-9);
        assert!((sols[0].params.t[0][0] - c(-2.0, 0.0)).norm() < 1e-9);
        assert!(sols[0].offdiagonal);
    }

    #[test]
    fn empty_profile_gives_trivial_solution() {
        let chain = gl11_chain(&[c(0.0, 0.0)], &[c(2.0, 0.0), c(1.0, 0.0)]);
        let xi = ExcitationProfile::new(vec![0]);
        let sols = solve_bae(&chain, &xi, &[], &NewtonOpts::default()).unwrap();
        assert_eq!(sols.len(), 1);
        assert!(sols[0].converged);
        assert_eq!(sols[0].params.flatten().len(), 0);
    }

    #[test]
    fn residual_is_polynomial_in_each_variable() {
        let zs = [c(0.3, 0.1), c(-0.4, 0.2)];
        let q = [c(1.5, 0.2), c(0.7, -0.3)];
        let chain = gl11_chain(&zs, &q);
        let xi = ExcitationProfile::new(vec![1]);
        let system = bae_system(&chain, &xi);
        // Degree <= site count + neighbors; interpolate and compare.
        let mut s = Sampler::new(51);
        let deg = zs.len() + 1;
        let nodes: Vec<C64> = s.points(deg + 1, &[]);
        let vals: Vec<C64> = nodes.iter().map(|&t| system.residual(&[t])[0]).collect();
        let fit = crate::poly::NewtonInterp::fit(&nodes, &vals);
        let probe = s.point(&[]);
        assert!((fit.eval(probe) - system.residual(&[probe])[0]).norm() < 1e-10);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let zs = [c(0.3, 0.1), c(-0.4, 0.2)];
        let q = [c(1.5, 0.2), c(0.7, -0.3)];
        let chain = gl11_chain(&zs, &q);
        let xi = ExcitationProfile::new(vec![2]);
        let system = bae_system(&chain, &xi);
        let t = [c(0.9, 0.4), c(-1.2, 0.8)];
        let jac = system.jacobian(&t);
        let h = 1e-6;
        for col in 0..2 {
            let mut tp = t.to_vec();
            tp[col] += c(h, 0.0);
            let mut tm = t.to_vec();
            tm[col] -= c(h, 0.0);
            let fp = system.residual(&tp);
            let fm = system.residual(&tm);
            for row in 0..2 {
                let fd = (fp[row] - fm[row]) / c(2.0 * h, 0.0);
                assert!((jac[(row, col)] - fd).norm() < 1e-5, "({row},{col})");
            }
        }
    }

    #[test]
    fn two_site_grid_recovers_all_quadratic_roots() {
        // The cleared 1-variable equation is a quadratic; the companion-style
        // root oracle must agree with the multi-start solutions.
        let zs = [c(0.4, 0.0), c(-0.7, 0.0)];
        let q = [c(1.9, 0.0), c(0.8, 0.0)];
        let chain = gl11_chain(&zs, &q);
        let xi = ExcitationProfile::new(vec![1]);
        let system = bae_system(&chain, &xi);
        // Interpolate the residual into coefficients and take its roots.
        let nodes = [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.5)];
        let vals: Vec<C64> = nodes.iter().map(|&t| system.residual(&[t])[0]).collect();
        let poly: CPoly = crate::poly::NewtonInterp::fit(&nodes, &vals).to_poly();
        assert_eq!(poly.degree(), 2);
        let mut roots = poly.roots().unwrap();
        let sols = solve_bae(&chain, &xi, &grid_starts(&chain, 5, 2.5), &NewtonOpts::default()).unwrap();
        assert_eq!(sols.len(), 2, "expected both quadratic roots");
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

    #[test]
    fn gaudin_single_equation_root() {
        // K1 - K2 + 1/(t - z) = 0 at t* = z - 1/(K1 - K2).
        let z = c(0.2, 0.1);
        let k = [c(1.4, 0.0), c(0.3, 0.0)];
        let chain = gl11_chain(&[z], &k);
        let params = BetheParams::new(vec![vec![z - c(1.0, 0.0) / (k[0] - k[1])]]);
        let res = gaudin_bae_residual(&chain, &params).unwrap();
        assert!(res[0].norm() < 1e-12);
        let xi = ExcitationProfile::new(vec![1]);
        let sols =
            solve_gaudin_bae(&chain, &xi, &grid_starts(&chain, 5, 2.0), &NewtonOpts::default())
                .unwrap();
        assert_eq!(sols.len(), 1);
        assert!((sols[0].params.t[0][0] - params.t[0][0]).norm() < 1e-9);
    }
}
