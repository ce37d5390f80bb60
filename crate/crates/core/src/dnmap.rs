//! Dirichlet-to-Neumann maps of the nonlinear problem, their second
//! linearizations, and the boundary moment pairing.
//!
//! The mixed second derivative of the solution map at zero boundary data
//! satisfies the linear problem `-Δw - κ²w + 2 q v⁽¹⁾ v⁽²⁾ = 0`, `w|∂Ω = 0`,
//! where `v⁽ˡ⁾` solve the linearized equation with data `f_l`. Pairing the
//! measured `∂ν w` against a third data function `f₀` (through its solution
//! `v⁽⁰⁾`) produces the boundary moment
//!
//! ```text
//! μ = ∮ ∂ν w · f₀ dS = 2 ∫ q v⁽¹⁾ v⁽²⁾ v⁽⁰⁾ dx + O(h²),
//! ```
//!
//! the bridge from boundary measurements to interior information. Both sides
//! of the pairing are implemented here; `volume_moment_oracle` stays
//! independent of the measurement path and serves as its cross-check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    boundary_quadrature_bilinear, volume_quadrature, BoundaryFunction, BoundaryPartition, Field,
};
use crate::helmholtz::{neumann_trace, solve_dirichlet, HelmholtzOperator};
use crate::nonlinear::{solve_nonlinear, Potential, DEFAULT_MAX_ITER, DEFAULT_TOL};

pub const DEFAULT_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    FiniteDifference,
    Analytic,
}

/// One inverse-problem measurement: the data triple, the step used for the
/// finite-difference linearization, and the resulting boundary moment.
#[derive(Debug, Clone)]
pub struct MomentRecord {
    pub f1: BoundaryFunction,
    pub f2: BoundaryFunction,
    pub f0: BoundaryFunction,
    pub eps: f64,
    pub moment: Complex64,
    pub method: MomentMethod,
}

/// Full DN map: Neumann trace of the nonlinear solution with data `f`.
pub fn dn_map(op: &HelmholtzOperator, q: &Potential, f: &BoundaryFunction) -> Result<BoundaryFunction> {
    let report = solve_nonlinear(op, q, f, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Ok(neumann_trace(op.grid(), &report.solution))
}

/// Partial DN map: input supported in Γ₁, output read on Γ₂ (zeros elsewhere).
pub fn partial_dn(
    op: &HelmholtzOperator,
    q: &Potential,
    f: &BoundaryFunction,
    part: &BoundaryPartition,
) -> Result<BoundaryFunction> {
    let grid = op.grid();
    for (k, b) in grid.boundary_nodes().iter().enumerate() {
        let mag = f.values[k].norm();
        if mag > 0.0 && !part.in_gamma1(b.s) {
            return Err(Error::SupportViolation {
                node: b.node,
                magnitude: mag,
            });
        }
    }
    let full = dn_map(op, q, f)?;
    Ok(full.masked(grid, &part.gamma2))
}

/// Mixed central difference of the DN map in the two data amplitudes:
/// `[Λ(εf₁+εf₂) - Λ(εf₁-εf₂) - Λ(-εf₁+εf₂) + Λ(-εf₁-εf₂)] / (4ε²)`.
/// Λ(0) = 0, so no center evaluation is needed.
pub fn second_linearization_fd(
    op: &HelmholtzOperator,
    q: &Potential,
    f1: &BoundaryFunction,
    f2: &BoundaryFunction,
    eps: f64,
) -> Result<BoundaryFunction> {
    if eps <= 0.0 {
        return Err(Error::Invalid(format!("eps must be > 0, got {eps}")));
    }
    let e = Complex64::new(eps, 0.0);
    let pp = dn_map(op, q, &f1.scale(e).add(&f2.scale(e)))?;
    let pm = dn_map(op, q, &f1.scale(e).add(&f2.scale(-e)))?;
    let mp = dn_map(op, q, &f1.scale(-e).add(&f2.scale(e)))?;
    let mm = dn_map(op, q, &f1.scale(-e).add(&f2.scale(-e)))?;
    let scale = 1.0 / (4.0 * eps * eps);
    let mut out = pp;
    for k in 0..out.values.len() {
        out.values[k] = (out.values[k] - pm.values[k] - mp.values[k] + mm.values[k]) * scale;
        out.support_mask[k] = true;
    }
    Ok(out)
}

/// Finite-difference linearization with an automatic Richardson error
/// estimate: evaluates the stencil at `eps` and `eps/2` and returns the
/// `eps/2` result together with `‖d(ε) - d(ε/2)‖_∞ / 3`, the leading-order
/// estimate of its remaining O(ε²) error.
pub fn second_linearization_fd_estimated(
    op: &HelmholtzOperator,
    q: &Potential,
    f1: &BoundaryFunction,
    f2: &BoundaryFunction,
    eps: f64,
) -> Result<(BoundaryFunction, f64)> {
    let coarse = second_linearization_fd(op, q, f1, f2, eps)?;
    let fine = second_linearization_fd(op, q, f1, f2, eps / 2.0)?;
    let estimate = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / 3.0;
    Ok((fine, estimate))
}

/// Exact second linearization through the linearized system: solve `v⁽¹⁾`,
/// `v⁽²⁾`, then `w` with source `-2 q v⁽¹⁾ v⁽²⁾` and zero boundary data, and
/// return `∂ν w`.
pub fn second_linearization_analytic(
    op: &HelmholtzOperator,
    q: &Potential,
    f1: &BoundaryFunction,
    f2: &BoundaryFunction,
) -> Result<BoundaryFunction> {
    let grid = op.grid();
    let v1 = solve_dirichlet(op, &Field::zeros(grid), f1)?;
    let v2 = solve_dirichlet(op, &Field::zeros(grid), f2)?;
    let mut source = Field::zeros(grid);
    for k in 0..grid.node_count() {
        source.values[k] = -2.0 * q.values[k] * v1.values[k] * v2.values[k];
    }
    let w = solve_dirichlet(op, &source, &grid.zero_boundary())?;
    Ok(neumann_trace(grid, &w))
}

/// Boundary moment `μ = ∮ d2 · f₀ dS` (bilinear pairing, no conjugation).
pub fn boundary_moment(
    op: &HelmholtzOperator,
    d2: &BoundaryFunction,
    f0: &BoundaryFunction,
) -> Result<Complex64> {
    boundary_quadrature_bilinear(op.grid(), d2, f0)
}

/// Independent volume route `2 ∫ q v⁽¹⁾ v⁽²⁾ v⁽⁰⁾ dx` computed directly from
/// the three linear solves; the oracle side of the integral identity.
pub fn volume_moment_oracle(
    op: &HelmholtzOperator,
    q: &Potential,
    f1: &BoundaryFunction,
    f2: &BoundaryFunction,
    f0: &BoundaryFunction,
) -> Result<Complex64> {
    let grid = op.grid();
    let v1 = solve_dirichlet(op, &Field::zeros(grid), f1)?;
    let v2 = solve_dirichlet(op, &Field::zeros(grid), f2)?;
    let v0 = solve_dirichlet(op, &Field::zeros(grid), f0)?;
    let two_q = Field {
        n: q.n,
        values: q.values.iter().map(|v| 2.0 * v).collect(),
    };
    volume_quadrature(grid, &two_q, &v1, &v2, &v0)
}
