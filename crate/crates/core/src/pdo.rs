//! Pseudo-differential operator series `Σ_r c_r(u) ∂^{p-r}` with exact
//! coefficient calculus.
//!
//! The product rule `∂^r a = Σ_s C(r, s) a_{[s]} ∂^{r-s}` needs derivatives of
//! the coefficients, so the coefficient ring must supply an exact derivative;
//! scalar rational functions and square matrices of them both qualify. Series
//! are truncated at a fixed number of retained orders below the leading
//! exponent, and every retained order is exact.

use crate::graded::GradedSpace;
use crate::poly::CRat;
use crate::transfer::gen_binomial;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// Coefficient ring for pseudo-differential series.
pub trait DiffRing: Clone {
    fn ring_zero(&self) -> Self;
    fn ring_one(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, s: C64) -> Self;
    fn derivative(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl DiffRing for CRat {
    fn ring_zero(&self) -> Self {
        CRat::zero()
    }
    fn ring_one(&self) -> Self {
        CRat::one()
    }
    fn add(&self, other: &Self) -> Self {
        CRat::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        CRat::mul(self, other)
    }
    fn scale(&self, s: C64) -> Self {
        CRat::scale(self, s)
    }
    fn derivative(&self) -> Self {
        CRat::derivative(self)
    }
    fn is_zero(&self) -> bool {
        CRat::is_zero(self)
    }
}

/// Square matrix with rational-function entries (row-major).
#[derive(Debug, Clone)]
pub struct RatMat {
    pub dim: usize,
    pub entries: Vec<CRat>,
}

impl RatMat {
    pub fn zero(dim: usize) -> Self {
        RatMat { dim, entries: vec![CRat::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = RatMat::zero(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = CRat::one();
        }
        m
    }

    pub fn from_constant(mat: &DMatrix<C64>) -> Self {
        let dim = mat.nrows();
        assert_eq!(dim, mat.ncols());
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(CRat::constant(mat[(r, c)]));
            }
        }
        RatMat { dim, entries }
    }

    /// Constant matrix divided by `(u - pole)`.
    pub fn simple_pole(mat: &DMatrix<C64>, pole: C64) -> Self {
        let mut m = RatMat::from_constant(mat);
        for e in m.entries.iter_mut() {
            if !e.is_zero() {
                *e = CRat::new(e.num.clone(), vec![(pole, 1)]);
            }
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &CRat {
        &self.entries[r * self.dim + c]
    }

    pub fn eval(&self, u: C64) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                let e = self.at(r, c);
                if !e.is_zero() {
                    out[(r, c)] = e.eval(u);
                }
            }
        }
        out
    }

    /// Right-multiply by a constant matrix.
    pub fn mul_const_right(&self, mat: &DMatrix<C64>) -> RatMat {
        let dim = self.dim;
        let mut out = RatMat::zero(dim);
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = CRat::zero();
                for k in 0..dim {
                    let a = self.at(r, k);
                    if a.is_zero() || mat[(k, c)].norm() == 0.0 {
                        continue;
                    }
                    acc = acc.add(&a.scale(mat[(k, c)]));
                }
                out.entries[r * dim + c] = acc;
            }
        }
        out
    }

    /// Partial supertrace over a leading graded factor: the matrix is viewed
    /// on `first ⊗ rest` and traced down to `rest`, with the same parity
    /// twist as the numeric version.
    pub fn supertrace_first(&self, first: &GradedSpace, rest: &GradedSpace) -> RatMat {
        let df = first.dim();
        let ds = rest.dim();
        assert_eq!(self.dim, df * ds);
        let mut out = RatMat::zero(ds);
        for c in 0..ds {
            for d in 0..ds {
                let pcd = (rest.parity(c) + rest.parity(d)) % 2;
                let mut acc = CRat::zero();
                for a in 0..df {
                    let pa = first.parity(a);
                    let mut sign = if pa == 1 { -1.0 } else { 1.0 };
                    if pa == 1 && pcd == 1 {
                        sign = -sign;
                    }
                    let e = self.at(a * ds + c, a * ds + d);
                    if !e.is_zero() {
                        acc = acc.add(&e.scale(C64::new(sign, 0.0)));
                    }
                }
                out.entries[c * ds + d] = acc;
            }
        }
        out
    }
}

impl DiffRing for RatMat {
    fn ring_zero(&self) -> Self {
        RatMat::zero(self.dim)
    }
    fn ring_one(&self) -> Self {
        RatMat::identity(self.dim)
    }
    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.add(b))
            .collect();
        RatMat { dim: self.dim, entries }
    }
    fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut out = RatMat::zero(dim);
        for r in 0..dim {
            for k in 0..dim {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..dim {
                    let b = other.at(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = r * dim + c;
                    out.entries[idx] = out.entries[idx].add(&a.mul(b));
                }
            }
        }
        out
    }
    fn scale(&self, s: C64) -> Self {
        RatMat { dim: self.dim, entries: self.entries.iter().map(|e| e.scale(s)).collect() }
    }
    fn derivative(&self) -> Self {
        RatMat { dim: self.dim, entries: self.entries.iter().map(|e| e.derivative()).collect() }
    }
    fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }
}

/// Truncated pseudo-differential series `Σ_{r=0..order} coeffs[r] ∂^{lead - r}`.
#[derive(Debug, Clone)]
pub struct PdoSeries<T: DiffRing> {
    pub lead: i64,
    pub coeffs: Vec<T>,
}

impl<T: DiffRing> PdoSeries<T> {
    pub fn new(lead: i64, coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty());
        PdoSeries { lead, coeffs }
    }

    /// The constant series `one · ∂^0`, truncated at `order`.
    pub fn one(template: &T, order: usize) -> Self {
        let mut coeffs = vec![template.ring_zero(); order + 1];
        coeffs[0] = template.ring_one();
        PdoSeries { lead: 0, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `∂^e`, if retained.
    pub fn coeff_of_power(&self, e: i64) -> Option<&T> {
        let r = self.lead - e;
        if r < 0 {
            None
        } else {
            self.coeffs.get(r as usize)
        }
    }

    /// Drop leading zero coefficients (exact zeros only), lowering `lead`.
    pub fn trim_leading(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs[0].is_zero() {
            self.coeffs.remove(0);
            self.lead -= 1;
        }
        self
    }

    /// Product with the composition rule `∂^r a = Σ_s C(r, s) a_{[s]} ∂^{r-s}`,
    /// truncated at the smaller retained order.
    pub fn mul(&self, other: &PdoSeries<T>) -> PdoSeries<T> {
        let order = self.order().min(other.order());
        let zero = self.coeffs[0].ring_zero();
        let mut coeffs = vec![zero.clone(); order + 1];
        for i in 0..=self.order().min(order) {
            if self.coeffs[i].is_zero() {
                continue;
            }
            let r = self.lead - i as i64;
            // Precompute derivatives of the other coefficients as needed.
            for j in 0..=other.order() {
                if i + j > order || other.coeffs[j].is_zero() {
                    continue;
                }
                let mut deriv = other.coeffs[j].clone();
                for s in 0..=(order - i - j) {
                    let c = gen_binomial(r, s);
                    if c != 0.0 {
                        let term = self.coeffs[i].mul(&deriv).scale(C64::new(c, 0.0));
                        coeffs[i + j + s] = coeffs[i + j + s].add(&term);
                    }
                    if i + j + s < order {
                        deriv = deriv.derivative();
                    }
                }
            }
        }
        PdoSeries { lead: self.lead + other.lead, coeffs }
    }

    pub fn add(&self, other: &PdoSeries<T>) -> PdoSeries<T> {
        // Align leading exponents; retained orders shrink to the overlap.
        let lead = self.lead.max(other.lead);
        let last = (self.lead - self.order() as i64).min(other.lead - other.order() as i64);
        let len = (lead - last) as usize + 1;
        let zero = self.coeffs[0].ring_zero();
        let mut coeffs = vec![zero; len];
        for (src, base) in [(self, self.lead), (other, other.lead)] {
            for (r, c) in src.coeffs.iter().enumerate() {
                let slot = (lead - base) as usize + r;
                coeffs[slot] = coeffs[slot].add(c);
            }
        }
        PdoSeries { lead, coeffs }
    }

    pub fn scale(&self, s: C64) -> PdoSeries<T> {
        PdoSeries { lead: self.lead, coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }
}

/// First-order factor `∂ - a`, truncated at `order`.
pub fn linear_factor<T: DiffRing>(a: &T, order: usize) -> PdoSeries<T> {
    let mut coeffs = vec![a.ring_zero(); order + 1];
    coeffs[0] = a.ring_one();
    if order >= 1 {
        coeffs[1] = a.scale(C64::new(-1.0, 0.0));
    }
    PdoSeries { lead: 1, coeffs }
}

/// Inverse of a series with unit leading coefficient, solved order by order:
/// `A · A^{-1} = 1` up to the retained order.
pub fn pdo_inv_monic(a: &PdoSeries<CRat>) -> Result<PdoSeries<CRat>> {
    let order = a.order();
    let one = CRat::one();
    let lead_dev = a.coeffs[0].sub(&one);
    if !lead_dev.is_zero() {
        return Err(Error::InvalidInput(
            "pseudo-differential inversion requires a unit leading coefficient".into(),
        ));
    }
    let mut b = PdoSeries::<CRat> {
        lead: -a.lead,
        coeffs: vec![CRat::zero(); order + 1],
    };
    b.coeffs[0] = CRat::one();
    for r in 1..=order {
        let prod = a.mul(&b);
        // prod should be 1; kill the coefficient at depth r.
        let defect = prod.coeffs[r].clone();
        if defect.is_zero() {
            continue;
        }
        b.coeffs[r] = b.coeffs[r].sub(&defect);
    }
    Ok(b)
}
