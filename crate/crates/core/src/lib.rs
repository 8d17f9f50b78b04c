//! Numerical workbench for supersymmetric gl(m|n) XXX spin chains and Gaudin
//! models: graded tensor algebra, rational R-matrices and their fusion,
//! monodromy and transfer matrices, Bethe ansatz equations and vectors, and
//! the pseudo-differential calculus behind the Gaudin hierarchy.
//!
//! Everything is dense complex linear algebra at desk scale. Values are
//! immutable after construction and all operations are pure functions, so
//! sharing across threads is safe without synchronization.



pub mod bethe;
pub mod gaudin;
pub mod graded;
pub mod pdo;
pub mod reps;
pub mod transfer;

pub mod poly;

pub mod rmatrix;


use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex64;

/// Default relative comparison tolerance.
pub const REL_TOL: f64 = 1e-9;
/// Default absolute comparison tolerance.
pub const ABS_TOL: f64 = 1e-12;
/// Hard cap on the dimension of any chain space; constructors fail fast beyond it.
pub const DIM_CAP: usize = 4096;

/// `true` when `a` and `b` agree within the default mixed tolerance.
pub fn approx_eq(a: C64, b: C64) -> bool {
    (a - b).norm() <= ABS_TOL + REL_TOL * a.norm().max(b.norm())
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-square operator ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("subspace invariance violated (residual {residual:.3e})")]
    InvarianceViolation { residual: f64 },
    #[error("evaluation point {point} collides with a pole")]
    PoleCollision { point: C64 },
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("vector is not singular (raising residual {residual:.3e})")]
    NotSingular { residual: f64 },
    #[error("parameters too close to a forbidden hyperplane (distance {dist:.3e})")]
    CoincidentParameters { dist: f64 },
    #[error("zero-dimensional wedge power")]
    ZeroWedge,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Seeded sample-point generator.
///
/// Points are drawn from the annulus `0.5 < |u| < 2` and rejected while any
/// listed pole is closer than 0.1, so residual checks stay well conditioned.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn point(&mut self, poles: &[C64]) -> C64 {
        loop {
            let re: f64 = self.rng.gen_range(-2.0..2.0);
            let im: f64 = self.rng.gen_range(-2.0..2.0);
            let u = C64::new(re, im);
            let r = u.norm();
            if r <= 0.5 || r >= 2.0 {
                continue;
            }
            if poles.iter().all(|p| (u - p).norm() >= 0.1) {
                return u;
            }
        }
    }

    pub fn points(&mut self, n: usize, poles: &[C64]) -> Vec<C64> {
        (0..n).map(|_| self.point(poles)).collect()
    }

    /// Uniform complex number in the square `[-s, s] x [-s, s]i`.
    pub fn box_point(&mut self, s: f64) -> C64 {
        C64::new(self.rng.gen_range(-s..s), self.rng.gen_range(-s..s))
    }
}
