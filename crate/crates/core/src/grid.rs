//! Discretization of the domain: a uniform lattice on the unit square with
//! indexed interior/boundary nodes, outward normals, an arclength
//! parametrization of the boundary loop, and trapezoid quadrature on both the
//! interior and the boundary.
//!
//! Node ids are `j * n + i` for lattice coordinates `(i, j)`, physical
//! coordinates `(i h, j h)` with `h = 1/(n-1)`. The boundary loop is ordered
//! counterclockwise starting at the origin corner; every boundary node carries
//! arclength `s`, a unit outward normal and a quadrature weight. Corner
//! normals are the normalized average of the two incident edge normals, and
//! corner weights are half a weight per incident edge (which sums back to `h`
//! on the square).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Rectangle,
}

/// One node on the boundary loop.
#[derive(Debug, Clone)]
pub struct BoundaryNode {
    /// Flat node id on the lattice.
    pub node: usize,
    /// Arclength from the origin corner, counterclockwise.
    pub s: f64,
    /// Unit outward normal.
    pub normal: [f64; 2],
    /// Trapezoid quadrature weight.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Grid {
    kind: GridKind,
    n: usize,
    h: f64,
    /// node id -> interior row, None on the boundary.
    interior_index: Vec<Option<usize>>,
    /// interior row -> node id.
    interior_nodes: Vec<usize>,
    /// Boundary loop, counterclockwise from the origin corner.
    boundary: Vec<BoundaryNode>,
    /// node id -> position in `boundary`, None in the interior.
    boundary_pos: Vec<Option<usize>>,
}

pub fn build_grid(kind: GridKind, n: usize) -> Result<Grid> {
    if n < 4 {
        return Err(Error::NTooSmall(n));
    }
    let h = 1.0 / (n - 1) as f64;
    let total = n * n;

    let mut interior_index = vec![None; total];
    let mut interior_nodes = Vec::with_capacity((n - 2) * (n - 2));
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let node = j * n + i;
            interior_index[node] = Some(interior_nodes.len());
            interior_nodes.push(node);
        }
    }

    // Counterclockwise loop: bottom, right, top, left. Each segment holds
    // n-1 nodes; consecutive nodes are lattice neighbors, so s advances by h.
    let m = n - 1;
    let mut walk: Vec<usize> = Vec::with_capacity(4 * m);
    walk.extend(0..m); //                        (i, 0)
    walk.extend((0..m).map(|j| j * n + m)); //   (m, j)
    walk.extend((0..m).map(|i| m * n + (m - i))); // (m-i, m)
    walk.extend((0..m).map(|j| (m - j) * n)); // (0, m-j)

    let diag = std::f64::consts::FRAC_1_SQRT_2;
    let mut boundary = Vec::with_capacity(4 * m);
    let mut boundary_pos = vec![None; total];
    for (pos, &node) in walk.iter().enumerate() {
        let (i, j) = (node % n, node / n);
        let normal = match (i, j) {
            (0, 0) => [-diag, -diag],
            (i2, 0) if i2 == m => [diag, -diag],
            (i2, j2) if i2 == m && j2 == m => [diag, diag],
            (0, j2) if j2 == m => [-diag, diag],
            (_, 0) => [0.0, -1.0],
            (i2, _) if i2 == m => [1.0, 0.0],
            (_, j2) if j2 == m => [0.0, 1.0],
            (0, _) => [-1.0, 0.0],
            _ => unreachable!("interior node on boundary walk"),
        };
        boundary_pos[node] = Some(pos);
        boundary.push(BoundaryNode {
            node,
            s: pos as f64 * h,
            normal,
            weight: h,
        });
    }

    Ok(Grid {
        kind,
        n,
        h,
        interior_index,
        interior_nodes,
        boundary,
        boundary_pos,
    })
}

impl Grid {
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Nodes per side.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh spacing, `1/(n-1)`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    pub fn interior_count(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.len()
    }

    /// Total arclength of the boundary loop.
    pub fn boundary_length(&self) -> f64 {
        self.boundary.len() as f64 * self.h
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        j * self.n + i
    }

    pub fn coords(&self, node: usize) -> [f64; 2] {
        let (i, j) = (node % self.n, node / self.n);
        [i as f64 * self.h, j as f64 * self.h]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary_pos[node].is_some()
    }

    pub fn interior_row(&self, node: usize) -> Option<usize> {
        self.interior_index[node]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    pub fn boundary_nodes(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    /// Position of a node in the boundary loop, if it is a boundary node.
    pub fn boundary_position(&self, node: usize) -> Option<usize> {
        self.boundary_pos[node]
    }

    pub fn same_grid(&self, other: &Grid) -> Result<()> {
        if self.n == other.n && self.kind == other.kind {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.n, other.n))
        }
    }

    /// Evaluate a function of position at every node.
    pub fn field_from_fn(&self, mut f: impl FnMut([f64; 2]) -> Complex64) -> Field {
        Field {
            n: self.n,
            values: (0..self.node_count()).map(|k| f(self.coords(k))).collect(),
        }
    }

    pub fn constant_field(&self, c: Complex64) -> Field {
        Field {
            n: self.n,
            values: vec![c; self.node_count()],
        }
    }

    /// Evaluate a function of position on the boundary loop (full support).
    pub fn boundary_from_fn(&self, f: impl Fn([f64; 2]) -> Complex64) -> BoundaryFunction {
        BoundaryFunction {
            n: self.n,
            values: self.boundary.iter().map(|b| f(self.coords(b.node))).collect(),
            support_mask: vec![true; self.boundary.len()],
        }
    }

    pub fn zero_boundary(&self) -> BoundaryFunction {
        BoundaryFunction {
            n: self.n,
            values: vec![Complex64::new(0.0, 0.0); self.boundary.len()],
            support_mask: vec![false; self.boundary.len()],
        }
    }

    /// Restriction of a field to the boundary loop.
    pub fn trace(&self, field: &Field) -> BoundaryFunction {
        BoundaryFunction {
            n: self.n,
            values: self.boundary.iter().map(|b| field.values[b.node]).collect(),
            support_mask: vec![true; self.boundary.len()],
        }
    }
}

/// Complex-valued function on all grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Field {
        grid.constant_field(Complex64::new(0.0, 0.0))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Field {
        Field {
            n: self.n,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }
}

/// Complex-valued function on the boundary loop with a support mask.
/// Values are zero wherever the mask is false.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    pub n: usize,
    pub values: Vec<Complex64>,
    pub support_mask: Vec<bool>,
}

impl BoundaryFunction {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> BoundaryFunction {
        BoundaryFunction {
            n: self.n,
            values: self.values.iter().map(|v| v.conj()).collect(),
            support_mask: self.support_mask.clone(),
        }
    }

    pub fn scale(&self, c: Complex64) -> BoundaryFunction {
        let zero = c.norm() == 0.0;
        BoundaryFunction {
            n: self.n,
            values: self.values.iter().map(|v| v * c).collect(),
            support_mask: if zero {
                vec![false; self.support_mask.len()]
            } else {
                self.support_mask.clone()
            },
        }
    }

    /// Pointwise sum; the support is the union of supports.
    pub fn add(&self, other: &BoundaryFunction) -> BoundaryFunction {
        assert_eq!(self.n, other.n, "boundary functions on different grids");
        BoundaryFunction {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            support_mask: self
                .support_mask
                .iter()
                .zip(&other.support_mask)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    /// Zero out values outside the given arcs and shrink the mask accordingly.
    pub fn masked(&self, grid: &Grid, arcs: &[(f64, f64)]) -> BoundaryFunction {
        let mut out = self.clone();
        for (k, b) in grid.boundary_nodes().iter().enumerate() {
            if !arc_contains(arcs, b.s) {
                out.values[k] = Complex64::new(0.0, 0.0);
                out.support_mask[k] = false;
            }
        }
        out
    }
}

/// Two sets of open boundary arcs, as closed-open arclength intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryPartition {
    pub gamma1: Vec<(f64, f64)>,
    pub gamma2: Vec<(f64, f64)>,
}

/// Boundary loop length of the unit square, the only domain kind in v1.
pub const BOUNDARY_LENGTH: f64 = 4.0;

impl BoundaryPartition {
    pub fn new(gamma1: Vec<(f64, f64)>, gamma2: Vec<(f64, f64)>) -> Result<Self> {
        if gamma1.is_empty() || gamma2.is_empty() {
            return Err(Error::Invalid("partition: both arc sets must be nonempty".into()));
        }
        for &(a, b) in gamma1.iter().chain(gamma2.iter()) {
            if b <= a {
                return Err(Error::Invalid(format!("partition: empty arc [{a}, {b})")));
            }
            if a < 0.0 || b > BOUNDARY_LENGTH {
                return Err(Error::Invalid(format!(
                    "partition: arc [{a}, {b}) outside the boundary length {BOUNDARY_LENGTH}"
                )));
            }
        }
        Ok(BoundaryPartition { gamma1, gamma2 })
    }

    pub fn in_gamma1(&self, s: f64) -> bool {
        arc_contains(&self.gamma1, s)
    }

    pub fn in_gamma2(&self, s: f64) -> bool {
        arc_contains(&self.gamma2, s)
    }
}

pub fn arc_contains(arcs: &[(f64, f64)], s: f64) -> bool {
    arcs.iter().any(|&(a, b)| s >= a && s < b)
}

/// Trapezoid approximation of the boundary pairing `∮ g1 conj(g2) dS`.
/// Exact for constants times the boundary length.
pub fn boundary_quadrature(
    grid: &Grid,
    g1: &BoundaryFunction,
    g2: &BoundaryFunction,
) -> Result<Complex64> {
    if g1.n != grid.n || g2.n != grid.n {
        return Err(Error::GridMismatch(g1.n, g2.n));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, b) in grid.boundary.iter().enumerate() {
        acc += b.weight * g1.values[k] * g2.values[k].conj();
    }
    Ok(acc)
}

/// Bilinear variant without conjugation, `∮ g1 g2 dS`.
pub fn boundary_quadrature_bilinear(
    grid: &Grid,
    g1: &BoundaryFunction,
    g2: &BoundaryFunction,
) -> Result<Complex64> {
    boundary_quadrature(grid, g1, &g2.conj())
}

/// Composite trapezoid approximation of `∫ a b c d dx` over the square.
pub fn volume_quadrature(grid: &Grid, a: &Field, b: &Field, c: &Field, d: &Field) -> Result<Complex64> {
    for f in [a, b, c, d] {
        if f.n != grid.n {
            return Err(Error::GridMismatch(grid.n, f.n));
        }
    }
    let n = grid.n;
    let h2 = grid.h * grid.h;
    let edge = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let wj = edge(j);
        for i in 0..n {
            let k = j * n + i;
            let w = h2 * wj * edge(i);
            acc += w * a.values[k] * b.values[k] * c.values[k] * d.values[k];
        }
    }
    Ok(acc)
}
