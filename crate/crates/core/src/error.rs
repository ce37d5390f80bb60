//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("grid: n too small (n = {0}, need n >= 4)")]
    NTooSmall(usize),
    #[error("grid mismatch: operands live on different grids ({0} vs {1} nodes per side)")]
    GridMismatch(usize, usize),
    #[error("helmholtz: kappa^2 = {kappa_sq:.6} is within relative tolerance {tol:.1e} of the Dirichlet eigenvalue pi^2({m}^2 + {n}^2) = {eigenvalue:.6}")]
    NearEigenvalue {
        kappa_sq: f64,
        eigenvalue: f64,
        m: usize,
        n: usize,
        tol: f64,
    },
    #[error("helmholtz: band factorization broke down at pivot {0}")]
    SingularFactor(usize),
    #[error("nonlinear solve diverged after {iterations} iterations (last update norm {last_update:.3e}); boundary data outside the smallness regime")]
    Diverged { iterations: usize, last_update: f64 },
    #[error("smallness probe: no amplitude levels supplied")]
    NoLevels,
    #[error("partial DN map: boundary data is nonzero outside Gamma_1 (node {node}, |value| = {magnitude:.3e})")]
    SupportViolation { node: usize, magnitude: f64 },
    #[error("cgo: frequency decomposition degenerate: z is isotropic (z.z = 0) with z != 0 and kappa != 0")]
    Degenerate,
    #[error("cgo: exponent magnitude {0:.1} exceeds the overflow guard (700)")]
    Overflow(f64),
    #[error("cgo: cutoff profile is nonzero on the accessible arcs (node {0})")]
    CutoffOverlapsGamma(usize),
    #[error("decay diagnostic: need at least 3 samples with distinct h, got {0}")]
    InsufficientSamples(usize),
    #[error("frequency plan: band radius {band:.3} exceeds 3*kappa = {limit:.3} (real plane-wave regime)")]
    BandTooWide { band: f64, limit: f64 },
    #[error("fourier moments: dataset has no record for lattice frequency ({0:.3}, {1:.3})")]
    MissingRecord(f64, f64),
    #[error("relative error: reference potential has zero norm")]
    ZeroDenominator,
    #[error("runge probe: point ({0:.3}, {1:.3}) is not an interior node")]
    NotInterior(f64, f64),
    #[error("runge probe: no basis size up to {cap} achieves |v(x0)| >= 0.1 * sup|v| (best ratio {best:.3e})")]
    ProbeFailed { cap: usize, best: f64 },
    #[error("maxwell: vector is off the characteristic variety (|xi.xi - (kh)^2| = {0:.3e})")]
    OffVariety(f64),
    #[error("maxwell: SHG families require kh < 1, got kh = {0:.3}")]
    ShgDegenerate(f64),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
