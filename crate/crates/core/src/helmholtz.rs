//! Discrete linear Helmholtz Dirichlet problem `(-Δ - κ²)u = F` in Ω,
//! `u = f` on ∂Ω, on the 5-point stencil, solved by a banded direct
//! factorization that is computed once and reused for every right-hand side.
//!
//! Boundary values are lifted to the right-hand side (row elimination), so the
//! interior matrix stays symmetric. An eigenvalue guard rejects wavenumbers
//! whose square falls within a relative tolerance of the unit square's
//! Dirichlet spectrum `π²(m² + n²)`, the discrete stand-in for the excluded
//! set of resonant wavenumbers of the continuum problem.

use num_complex::Complex64;
use std::sync::Arc;

use crate::band::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::grid::{BoundaryFunction, Field, Grid};

pub const EIGENVALUE_GUARD_TOL: f64 = 1e-3;
/// Mode cutoff for the analytic spectrum scan.
pub const EIGENVALUE_CUTOFF: usize = 64;

/// Nearest analytic Dirichlet eigenvalue `π²(m² + n²)` to `kappa_sq`,
/// with its mode indices and relative distance.
pub fn nearest_eigenvalue(kappa_sq: f64) -> (f64, usize, usize, f64) {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let mut best = (f64::INFINITY, 0usize, 0usize, f64::INFINITY);
    for m in 1..=EIGENVALUE_CUTOFF {
        for n in 1..=EIGENVALUE_CUTOFF {
            let lambda = pi2 * (m * m + n * n) as f64;
            let rel = (kappa_sq - lambda).abs() / lambda;
            if rel < best.3 {
                best = (lambda, m, n, rel);
            }
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct HelmholtzOperator {
    kappa: f64,
    grid: Arc<Grid>,
    lu: BandLu,
    /// Interior nodes pinned to zero (cavity support); empty when absent.
    hole: Vec<bool>,
}

/// Assemble and factor the interior operator at wavenumber `kappa`.
pub fn assemble(grid: &Grid, kappa: f64) -> Result<HelmholtzOperator> {
    assemble_with_hole(grid, kappa, None)
}

/// Variant with interior nodes pinned to zero: rows in `hole` become
/// identity rows and couplings into them are dropped, which imposes a
/// homogeneous Dirichlet condition on the pinned set.
pub fn assemble_with_hole(grid: &Grid, kappa: f64, hole: Option<&[bool]>) -> Result<HelmholtzOperator> {
    if kappa < 0.0 {
        return Err(Error::Invalid(format!("kappa must be >= 0, got {kappa}")));
    }
    let kappa_sq = kappa * kappa;
    let (lambda, m, n, rel) = nearest_eigenvalue(kappa_sq);
    if rel < EIGENVALUE_GUARD_TOL {
        return Err(Error::NearEigenvalue {
            kappa_sq,
            eigenvalue: lambda,
            m,
            n,
            tol: EIGENVALUE_GUARD_TOL,
        });
    }
    if let Some(h) = hole {
        if h.len() != grid.node_count() {
            return Err(Error::Invalid("hole mask length != node count".into()));
        }
    }
    let hole: Vec<bool> = match hole {
        Some(h) => h.to_vec(),
        None => vec![false; grid.node_count()],
    };

    let ng = grid.n();
    let rows = grid.interior_count();
    let band = ng - 2;
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut mat = BandMatrix::new(rows, band, band);
    for (r, &node) in grid.interior_nodes().iter().enumerate() {
        if hole[node] {
            mat.set(r, r, Complex64::new(1.0, 0.0));
            continue;
        }
        mat.set(r, r, Complex64::new(4.0 * inv_h2 - kappa_sq, 0.0));
        for nb in neighbors(ng, node) {
            if let Some(rc) = grid.interior_row(nb) {
                if !hole[nb] {
                    mat.set(r, rc, Complex64::new(-inv_h2, 0.0));
                }
            }
        }
    }
    let lu = mat.factor().map_err(|e| match e {
        Error::SingularFactor(_) => {
            let (lambda, m, n, _) = nearest_eigenvalue(kappa_sq);
            Error::NearEigenvalue {
                kappa_sq,
                eigenvalue: lambda,
                m,
                n,
                tol: EIGENVALUE_GUARD_TOL,
            }
        }
        other => other,
    })?;
    Ok(HelmholtzOperator {
        kappa,
        grid: Arc::new(grid.clone()),
        lu,
        hole,
    })
}

fn neighbors(ng: usize, node: usize) -> [usize; 4] {
    [node - 1, node + 1, node - ng, node + ng]
}

impl HelmholtzOperator {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn has_hole(&self) -> bool {
        self.hole.iter().any(|&b| b)
    }

    pub fn in_hole(&self, node: usize) -> bool {
        self.hole[node]
    }

    /// Stencil action `(-Δ_h - κ²)u` at every interior row, using the field's
    /// own boundary values. Hole rows return the field value itself.
    pub fn apply(&self, u: &Field) -> Vec<Complex64> {
        let ng = self.grid.n();
        let inv_h2 = 1.0 / (self.grid.h() * self.grid.h());
        let kappa_sq = self.kappa * self.kappa;
        self.grid
            .interior_nodes()
            .iter()
            .map(|&node| {
                if self.hole[node] {
                    return u.values[node];
                }
                let mut acc = (4.0 * inv_h2 - kappa_sq) * u.values[node];
                for nb in neighbors(ng, node) {
                    if !self.hole[nb] {
                        acc -= inv_h2 * u.values[nb];
                    }
                }
                acc
            })
            .collect()
    }

    /// Lifted interior matrix action on an interior vector (boundary = 0).
    pub fn apply_interior(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.grid.interior_count());
        let ng = self.grid.n();
        let inv_h2 = 1.0 / (self.grid.h() * self.grid.h());
        let kappa_sq = self.kappa * self.kappa;
        self.grid
            .interior_nodes()
            .iter()
            .enumerate()
            .map(|(r, &node)| {
                if self.hole[node] {
                    return v[r];
                }
                let mut acc = (4.0 * inv_h2 - kappa_sq) * v[r];
                for nb in neighbors(ng, node) {
                    if let Some(rc) = self.grid.interior_row(nb) {
                        if !self.hole[nb] {
                            acc -= inv_h2 * v[rc];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// Sup norm of `(-Δ_h - κ²)u - F` over interior rows.
    pub fn residual_sup(&self, u: &Field, source: &Field) -> f64 {
        self.apply(u)
            .iter()
            .zip(self.grid.interior_nodes())
            .map(|(a, &node)| {
                let want = if self.hole[node] {
                    Complex64::new(0.0, 0.0)
                } else {
                    source.values[node]
                };
                (a - want).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Solve the Dirichlet problem with volume source `source` and boundary data `f`.
/// The returned field equals `f` exactly on boundary nodes.
pub fn solve_dirichlet(op: &HelmholtzOperator, source: &Field, f: &BoundaryFunction) -> Result<Field> {
    let grid = op.grid();
    if source.n != grid.n() || f.n != grid.n() {
        return Err(Error::GridMismatch(grid.n(), source.n));
    }
    let ng = grid.n();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut rhs: Vec<Complex64> = Vec::with_capacity(grid.interior_count());
    for &node in grid.interior_nodes() {
        if op.hole[node] {
            rhs.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let mut acc = source.values[node];
        for nb in neighbors(ng, node) {
            if let Some(pos) = grid.boundary_position(nb) {
                acc += inv_h2 * f.values[pos];
            }
        }
        rhs.push(acc);
    }
    op.lu.solve(&mut rhs);

    let mut out = Field::zeros(grid);
    for (r, &node) in grid.interior_nodes().iter().enumerate() {
        out.values[node] = rhs[r];
    }
    for b in grid.boundary_nodes() {
        let pos = grid.boundary_position(b.node).unwrap();
        out.values[b.node] = f.values[pos];
    }
    Ok(out)
}

/// Outward normal derivative `ν · ∇u` on the boundary loop, by second-order
/// one-sided differences along each face the node belongs to. Corner nodes
/// combine both one-sided axis derivatives with the averaged corner normal.
pub fn neumann_trace(grid: &Grid, u: &Field) -> BoundaryFunction {
    let ng = grid.n();
    let two_h = 2.0 * grid.h();
    let val = |i: usize, j: usize| u.values[j * ng + i];
    let mut out = grid.zero_boundary();
    for (pos, b) in grid.boundary_nodes().iter().enumerate() {
        let (i, j) = (b.node % ng, b.node / ng);
        let mut d = Complex64::new(0.0, 0.0);
        if b.normal[0] != 0.0 {
            let dx = if i == 0 {
                (-3.0 * val(0, j) + 4.0 * val(1, j) - val(2, j)) / two_h
            } else {
                (3.0 * val(ng - 1, j) - 4.0 * val(ng - 2, j) + val(ng - 3, j)) / two_h
            };
            d += b.normal[0] * dx;
        }
        if b.normal[1] != 0.0 {
            let dy = if j == 0 {
                (-3.0 * val(i, 0) + 4.0 * val(i, 1) - val(i, 2)) / two_h
            } else {
                (3.0 * val(i, ng - 1) - 4.0 * val(i, ng - 2) + val(i, ng - 3)) / two_h
            };
            d += b.normal[1] * dy;
        }
        out.values[pos] = d;
        out.support_mask[pos] = true;
    }
    out
}
