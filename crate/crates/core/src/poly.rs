//! Complex polynomials and rational functions of one variable.
//!
//! [`CPoly`] stores coefficients low-to-high. [`CRat`] keeps its denominator
//! in factored form `Π (u - r_i)^{p_i}` (monic by construction), which makes
//! derivatives exact and lets common factors cancel by checking the numerator
//! at the recorded roots. This covers everything the chain calculus needs:
//! evaluation points, Bethe-parameter polynomials, difference-operator
//! coefficients and the derivative calculus behind pseudo-differential
//! expansions.

use crate::{Error, Result, C64};

const ZERO_COEFF: f64 = 1e-13;

/// Dense complex polynomial, coefficients low-to-high.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoly {
    pub coeffs: Vec<C64>,
}

impl CPoly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut p = CPoly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        CPoly { coeffs: vec![] }
    }

    pub fn constant(c: C64) -> Self {
        CPoly::new(vec![c])
    }

    pub fn one() -> Self {
        CPoly::constant(C64::new(1.0, 0.0))
    }

    /// The monomial `u`.
    pub fn x() -> Self {
        CPoly { coeffs: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)] }
    }

    /// Monic linear factor `u - root`.
    pub fn linear(root: C64) -> Self {
        CPoly { coeffs: vec![-root, C64::new(1.0, 0.0)] }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut p = CPoly::one();
        for &r in roots {
            p = p.mul(&CPoly::linear(r));
        }
        p
    }

    fn trim(&mut self) {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        while let Some(last) = self.coeffs.last() {
            if last.norm() <= ZERO_COEFF * scale {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, u: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    pub fn add(&self, other: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        CPoly::new(coeffs)
    }

    pub fn neg(&self) -> CPoly {
        CPoly { coeffs: self.coeffs.iter().map(|&c| -c).collect() }
    }

    pub fn sub(&self, other: &CPoly) -> CPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: C64) -> CPoly {
        CPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &CPoly) -> CPoly {
        if self.is_zero() || other.is_zero() {
            return CPoly::zero();
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        CPoly::new(coeffs)
    }

    pub fn derivative(&self) -> CPoly {
        if self.coeffs.len() <= 1 {
            return CPoly::zero();
        }
        CPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * C64::new((i + 1) as f64, 0.0))
                .collect(),
        )
    }

    /// Substitute `u -> u + shift`.
    pub fn shift(&self, shift: C64) -> CPoly {
        // Horner on (u + shift): fold from the top coefficient.
        let mut acc = CPoly::zero();
        let xs = CPoly::new(vec![shift, C64::new(1.0, 0.0)]);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&xs).add(&CPoly::constant(c));
        }
        acc
    }

    /// Synthetic division by the monic factor `u - root`; the remainder is
    /// returned alongside the quotient.
    pub fn div_linear(&self, root: C64) -> (CPoly, C64) {
        if self.is_zero() {
            return (CPoly::zero(), C64::new(0.0, 0.0));
        }
        let n = self.coeffs.len();
        let mut q = vec![C64::new(0.0, 0.0); n - 1];
        let mut carry = C64::new(0.0, 0.0);
        for i in (0..n).rev() {
            let v = self.coeffs[i] + carry;
            if i == 0 {
                return (CPoly::new(q), v);
            }
            q[i - 1] = v;
            carry = v * root;
        }
        unreachable!()
    }

    /// All roots, via Durand–Kerner iteration (small degrees only).
    pub fn roots(&self) -> Result<Vec<C64>> {
        let deg = self.degree();
        if self.is_zero() {
            return Err(Error::InvalidInput("zero polynomial has no finite root set".into()));
        }
        if deg == 0 {
            return Ok(vec![]);
        }
        let lead = *self.coeffs.last().unwrap();
        let monic: Vec<C64> = self.coeffs.iter().map(|&c| c / lead).collect();
        let mut zs: Vec<C64> = (0..deg)
            .map(|i| C64::new(0.4, 0.9).powu(i as u32 + 1))
            .collect();
        for _ in 0..200 {
            let mut max_step = 0.0f64;
            let old = zs.clone();
            for i in 0..deg {
                let mut denom = C64::new(1.0, 0.0);
                for j in 0..deg {
                    if j != i {
                        denom *= old[i] - old[j];
                    }
                }
                let p = eval_monic(&monic, old[i]);
                let step = p / denom;
                zs[i] = old[i] - step;
                max_step = max_step.max(step.norm());
            }
            if max_step < 1e-14 {
                break;
            }
        }
        for &z in &zs {
            if eval_monic(&monic, z).norm() > 1e-6 * (1.0 + z.norm().powi(deg as i32)) {
                return Err(Error::NoConvergence(200));
            }
        }
        Ok(zs)
    }
}

fn eval_monic(coeffs: &[C64], u: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * u + c;
    }
    acc
}

/// Rational function `num / Π (u - r_i)^{p_i}` with a factored monic denominator.
#[derive(Debug, Clone)]
pub struct CRat {
    pub num: CPoly,
    /// Distinct pole locations with multiplicities.
    pub poles: Vec<(C64, u32)>,
}

const POLE_MATCH: f64 = 1e-9;

impl CRat {
    pub fn new(num: CPoly, poles: Vec<(C64, u32)>) -> Self {
        let mut r = CRat { num, poles };
        r.normalize();
        r
    }

    pub fn from_poly(p: CPoly) -> Self {
        CRat { num: p, poles: vec![] }
    }

    pub fn constant(c: C64) -> Self {
        CRat::from_poly(CPoly::constant(c))
    }

    pub fn zero() -> Self {
        CRat::from_poly(CPoly::zero())
    }

    pub fn one() -> Self {
        CRat::from_poly(CPoly::one())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.poles.clear();
            return;
        }
        self.poles.retain(|&(_, p)| p > 0);
        self.poles.sort_by(|a, b| {
            (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap()
        });
        // Merge coincident recorded roots.
        let mut merged: Vec<(C64, u32)> = Vec::new();
        for &(r, p) in &self.poles {
            if let Some(last) = merged.last_mut() {
                if (last.0 - r).norm() < POLE_MATCH {
                    last.1 += p;
                    continue;
                }
            }
            merged.push((r, p));
        }
        self.poles = merged;
    }

    /// Denominator as an expanded polynomial (monic).
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
        let mut d = C64::new(1.0, 0.0);
        for &(r, mult) in &self.poles {
            d *= (u - r).powu(mult);
        }
        d
    }

    pub fn eval(&self, u: C64) -> C64 {
        self.num.eval(u) / self.den_eval(u)
    }

    /// Distance from `u` to the nearest recorded pole (infinite when there are none).
    pub fn pole_distance(&self, u: C64) -> f64 {
        self.poles.iter().map(|&(r, _)| (u - r).norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn mul(&self, other: &CRat) -> CRat {
        let mut poles = self.poles.clone();
        poles.extend(other.poles.iter().cloned());
        CRat::new(self.num.mul(&other.num), poles)
    }

    pub fn scale(&self, s: C64) -> CRat {
        CRat { num: self.num.scale(s), poles: self.poles.clone() }
    }

    pub fn add(&self, other: &CRat) -> CRat {
        // Common denominator: max multiplicity per root.
        let mut poles: Vec<(C64, u32)> = self.poles.clone();
        for &(r, p) in &other.poles {
            match poles.iter_mut().find(|(q, _)| (*q - r).norm() < POLE_MATCH) {
                Some(entry) => entry.1 = entry.1.max(p),
                None => poles.push((r, p)),
            }
        }
        let mut num_a = self.num.clone();
        let mut num_b = other.num.clone();
        for &(r, p) in &poles {
            let pa = self.mult_at(r);
            let pb = other.mult_at(r);
            for _ in pa..p {
                num_a = num_a.mul(&CPoly::linear(r));
            }
            for _ in pb..p {
                num_b = num_b.mul(&CPoly::linear(r));
            }
        }
        CRat::new(num_a.add(&num_b), poles)
    }

    pub fn sub(&self, other: &CRat) -> CRat {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    fn mult_at(&self, r: C64) -> u32 {
        self.poles
            .iter()
            .find(|(q, _)| (*q - r).norm() < POLE_MATCH)
            .map(|&(_, p)| p)
            .unwrap_or(0)
    }

    pub fn inv(&self) -> Result<CRat> {
        if self.num.is_zero() {
            return Err(Error::InvalidInput("division by the zero rational function".into()));
        }
        // New denominator = old numerator: factor it completely.
        let roots = self.num.roots()?;
        let lead = *self.num.coeffs.last().unwrap();
        let num = self.den_poly().scale(C64::new(1.0, 0.0) / lead);
        let poles = roots.into_iter().map(|r| (r, 1)).collect();
        Ok(CRat::new(num, poles))
    }

    pub fn div(&self, other: &CRat) -> Result<CRat> {
        Ok(self.mul(&other.inv()?))
    }

    /// Exact derivative: `(n/D)' = (n' - n Σ p_i/(u-r_i)) / D`, assembled with
    /// each pole multiplicity raised by one.
    pub fn derivative(&self) -> CRat {
        if self.poles.is_empty() {
            return CRat::from_poly(self.num.derivative());
        }
        // Q = product of distinct linear factors.
        let distinct: Vec<C64> = self.poles.iter().map(|&(r, _)| r).collect();
        let q = CPoly::from_roots(&distinct);
        // S = Σ_i p_i Π_{j≠i} (u - r_j).
        let mut s = CPoly::zero();
        for (i, &(r, p)) in self.poles.iter().enumerate() {
            let others: Vec<C64> =
                distinct.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
            let _ = r;
            s = s.add(&CPoly::from_roots(&others).scale(C64::new(p as f64, 0.0)));
        }
        let num = self.num.derivative().mul(&q).sub(&self.num.mul(&s));
        let poles = self.poles.iter().map(|&(r, p)| (r, p + 1)).collect();
        CRat::new(num, poles)
    }

    /// Substitute `u -> u + shift` (poles move to `r - shift`).
    pub fn shift(&self, shift: C64) -> CRat {
        CRat {
            num: self.num.shift(shift),
            poles: self.poles.iter().map(|&(r, p)| (r - shift, p)).collect(),
        }
    }

    /// Cancel recorded poles at which the numerator vanishes, and report a
    /// monic-denominator form. Evaluation is unchanged.
    pub fn reduce(&self) -> CRat {
        let mut num = self.num.clone();
        let mut poles: Vec<(C64, u32)> = Vec::new();
        let scale = num.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        for &(r, mult) in &self.poles {
            let mut remaining = mult;
            while remaining > 0 {
                let (q, rem) = num.div_linear(r);
                if rem.norm() <= 1e-9 * scale {
                    num = q;
                    remaining -= 1;
                } else {
                    break;
                }
            }
            if remaining > 0 {
                poles.push((r, remaining));
            }
        }
        CRat::new(num, poles)
    }
}

/// Newton-form polynomial interpolation through the given nodes.
///
/// Serves as the generic polynomial oracle: fit through `deg+1` samples, then
/// compare the fit against extra samples.
pub struct NewtonInterp {
    nodes: Vec<C64>,
    coeffs: Vec<C64>,
}

impl NewtonInterp {
    pub fn fit(nodes: &[C64], values: &[C64]) -> Self {
        assert_eq!(nodes.len(), values.len());
        let n = nodes.len();
        let mut coeffs = values.to_vec();
        for level in 1..n {
            for i in (level..n).rev() {
                coeffs[i] = (coeffs[i] - coeffs[i - 1]) / (nodes[i] - nodes[i - level]);
            }
        }
        NewtonInterp { nodes: nodes.to_vec(), coeffs }
    }

    pub fn eval(&self, u: C64) -> C64 {
        let n = self.coeffs.len();
        let mut acc = self.coeffs[n - 1];
        for i in (0..n - 1).rev() {
            acc = acc * (u - self.nodes[i]) + self.coeffs[i];
        }
        acc
    }

    /// Expand to monomial coefficients.
    pub fn to_poly(&self) -> CPoly {
        let n = self.coeffs.len();
        let mut acc = CPoly::constant(self.coeffs[n - 1]);
        for i in (0..n - 1).rev() {
            acc = acc.mul(&CPoly::linear(self.nodes[i])).add(&CPoly::constant(self.coeffs[i]));
        }
        acc
    }
}
