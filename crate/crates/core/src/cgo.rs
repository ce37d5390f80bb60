//! Complex geometrical optics machinery: frequency vectors on the
//! characteristic variety `ζ·ζ = κ²` (bilinear dot, no conjugation),
//! decomposition of a target frequency into two on-variety vectors,
//! exponential solutions `e^{-i x·ζ/h}`, boundary-killing correction terms,
//! and the exponential-decay diagnostic for their H¹ norms.
//!
//! The accessible boundary piece sits on the square's right face `x₁ = 1`;
//! the module works in the local frame `t = x₁ - 1` (domain in `t ≤ 0`,
//! accessible face at `t = 0`), recorded in [`CutoffProfile`]. With
//! `Im ζ₁ > 0` the exponential decays like `e^{t Im ζ₁ / h}` away from the
//! face, so Dirichlet data supported at depth `c` produces corrections of
//! size `e^{-(c/h) Im ζ₁}`: the decay measured by [`decay_diagnostic`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::helmholtz::{solve_dirichlet, HelmholtzOperator};

/// Exponent magnitude above which `exp` would overflow to infinity.
pub const OVERFLOW_GUARD: f64 = 700.0;

/// Complex frequency vector carrying its variety constraint `ζ·ζ = κ²`.
#[derive(Debug, Clone)]
pub struct CVector {
    pub components: Vec<Complex64>,
    pub kappa_target: f64,
    pub constraint_residual: f64,
}

impl CVector {
    pub fn new(components: Vec<Complex64>, kappa_target: f64) -> Self {
        let dot: Complex64 = components.iter().map(|z| z * z).sum();
        let constraint_residual = (dot - kappa_target * kappa_target).norm();
        CVector {
            components,
            kappa_target,
            constraint_residual,
        }
    }

    /// Bilinear square `ζ·ζ`.
    pub fn self_dot(&self) -> Complex64 {
        self.components.iter().map(|z| z * z).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn on_variety(&self) -> bool {
        self.constraint_residual <= 1e-12 * self.norm_sqr().max(1.0)
    }

    pub fn imag(&self) -> Vec<f64> {
        self.components.iter().map(|z| z.im).collect()
    }
}

/// The anchor vector `(i, ±√(κ² + 1))` on the variety.
pub fn variety_anchor(kappa: f64, positive: bool) -> CVector {
    let s = (kappa * kappa + 1.0).sqrt();
    let second = if positive { s } else { -s };
    CVector::new(
        vec![Complex64::new(0.0, 1.0), Complex64::new(second, 0.0)],
        kappa,
    )
}

fn perp(z: [Complex64; 2]) -> [Complex64; 2] {
    [z[1], -z[0]]
}

/// Split `z = ζ + η` with both summands on the variety: `ζ = z/2 + w`,
/// `η = z/2 - w` where `w ⊥ z` (bilinear) and `w·w = κ² - z·z/4`, principal
/// square-root branch. At `z = 0` the direction of `w` is free; the tie-break
/// puts it along the second axis.
pub fn decompose_frequency(z: [Complex64; 2], kappa: f64) -> Result<(CVector, CVector)> {
    let zz = z[0] * z[0] + z[1] * z[1];
    let znorm2 = z[0].norm_sqr() + z[1].norm_sqr();
    let target = Complex64::new(kappa * kappa, 0.0) - zz / 4.0;
    // adding +0.0 canonicalizes a negative-zero imaginary part so the
    // principal square root lands on the documented side of the branch cut
    let canon = |w: Complex64| Complex64::new(w.re + 0.0, w.im + 0.0);
    let w: [Complex64; 2] = if znorm2 == 0.0 {
        let lambda = canon(target).sqrt();
        [Complex64::new(0.0, 0.0), lambda]
    } else {
        if zz.norm() <= 1e-14 * znorm2 {
            // isotropic z: every vector orthogonal to z is itself isotropic,
            // so w·w = κ² has no solution unless κ = 0
            if kappa != 0.0 {
                return Err(Error::Degenerate);
            }
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
        } else {
            let lambda = canon(target / zz).sqrt();
            let p = perp(z);
            [lambda * p[0], lambda * p[1]]
        }
    };
    let zeta = CVector::new(vec![z[0] / 2.0 + w[0], z[1] / 2.0 + w[1]], kappa);
    let eta = CVector::new(vec![z[0] / 2.0 - w[0], z[1] / 2.0 - w[1]], kappa);
    Ok((zeta, eta))
}

/// The field `e^{-i x·ζ/h}` on grid nodes (global coordinates).
pub fn cgo_exponential(zeta: &CVector, h: f64, grid: &Grid) -> Result<Field> {
    if h <= 0.0 {
        return Err(Error::Invalid(format!("h must be > 0, got {h}")));
    }
    let im = zeta.imag();
    // max of |x·Im ζ| over the square is attained at a corner
    let max_exp = (im[0].abs() + im[1].abs()) / h;
    if max_exp > OVERFLOW_GUARD {
        return Err(Error::Overflow(max_exp));
    }
    let zc = [zeta.components[0], zeta.components[1]];
    Ok(grid.field_from_fn(|[x, y]| {
        (-Complex64::new(0.0, 1.0) * (x * zc[0] + y * zc[1]) / h).exp()
    }))
}

/// Interior 5-point residual of the exponential against `(-Δ_h - ζ·ζ/h²)`.
/// Zero in the continuum whenever ζ is on the variety for κ = h·(wavenumber).
pub fn exponential_residual(grid: &Grid, zeta: &CVector, h: f64) -> Result<f64> {
    let u = cgo_exponential(zeta, h, grid)?;
    let mult = zeta.self_dot() / (h * h);
    let ng = grid.n();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut worst = 0.0_f64;
    for &node in grid.interior_nodes() {
        let stencil = (4.0 * u.values[node]
            - u.values[node - 1]
            - u.values[node + 1]
            - u.values[node - ng]
            - u.values[node + ng])
            * inv_h2;
        worst = worst.max((stencil - mult * u.values[node]).norm());
    }
    Ok(worst)
}

/// Smooth ramp from 1 (deep side) to 0 (accessible side) in the local frame
/// `t = x₁ - 1`: equals 1 for `t ≤ -2c`, 0 for `t ≥ -c`, monotone between.
#[derive(Debug, Clone)]
pub struct CutoffProfile {
    pub c: f64,
    pub order: usize,
    /// Translation from global to local coordinates.
    pub face_offset: [f64; 2],
    values: Vec<f64>,
}

impl CutoffProfile {
    pub fn new(grid: &Grid, c: f64, order: usize) -> Result<Self> {
        if !(c > 0.0 && 2.0 * c < 1.0) {
            return Err(Error::Invalid(format!(
                "cutoff depth c must satisfy 0 < 2c < 1, got {c}"
            )));
        }
        let face_offset = [1.0, 0.0];
        let values = (0..grid.node_count())
            .map(|k| {
                let [x, _] = grid.coords(k);
                let t = x - face_offset[0];
                ramp(t, c, order)
            })
            .collect();
        Ok(CutoffProfile {
            c,
            order,
            face_offset,
            values,
        })
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn local(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0] - self.face_offset[0], x[1] - self.face_offset[1]]
    }
}

fn ramp(t: f64, c: f64, order: usize) -> f64 {
    if t <= -2.0 * c {
        1.0
    } else if t >= -c {
        0.0
    } else {
        let s = (-c - t) / c; // 0 at t = -c, 1 at t = -2c
        match order {
            0 | 1 => s,
            2 | 3 => s * s * (3.0 - 2.0 * s),
            _ => s * s * s * (10.0 - 15.0 * s + 6.0 * s * s),
        }
    }
}

/// Solve the correction problem: Dirichlet data `-χ e^{-i x·ζ/h}` (local
/// frame), zero source. Returns the correction field and its discrete H¹
/// norm. The combined field `e^{-i x·ζ/h} + w` then vanishes on the boundary
/// region where χ = 1.
pub fn cgo_correction(
    op: &HelmholtzOperator,
    zeta: &CVector,
    h: f64,
    chi: &CutoffProfile,
    gamma_arcs: &[(f64, f64)],
) -> Result<(Field, f64)> {
    let grid = op.grid();
    let kh = op.kappa() * h;
    let mismatch = (zeta.self_dot() - kh * kh).norm();
    if mismatch > 1e-9 * zeta.norm_sqr().max(1.0) {
        return Err(Error::Invalid(format!(
            "zeta is not on the variety for kappa*h = {kh:.6} (|zeta.zeta - (kh)^2| = {mismatch:.3e})"
        )));
    }
    // the cutoff must vanish on the accessible arcs
    for b in grid.boundary_nodes() {
        if crate::grid::arc_contains(gamma_arcs, b.s) && chi.value(b.node) > 1e-12 {
            return Err(Error::CutoffOverlapsGamma(b.node));
        }
    }
    let zc = [zeta.components[0], zeta.components[1]];
    let im = zeta.imag();
    let mut max_exp = 0.0_f64;
    let mut data = grid.zero_boundary();
    for (pos, b) in grid.boundary_nodes().iter().enumerate() {
        let lx = chi.local(grid.coords(b.node));
        max_exp = max_exp.max((lx[0] * im[0] + lx[1] * im[1]).abs() / h);
        let chi_b = chi.value(b.node);
        if chi_b != 0.0 {
            let e = (-Complex64::new(0.0, 1.0) * (lx[0] * zc[0] + lx[1] * zc[1]) / h).exp();
            data.values[pos] = -chi_b * e;
            data.support_mask[pos] = true;
        }
    }
    if max_exp > OVERFLOW_GUARD {
        return Err(Error::Overflow(max_exp));
    }
    let w = solve_dirichlet(op, &Field::zeros(grid), &data)?;
    let norm = h1_norm(grid, &w);
    Ok((w, norm))
}

/// The exponential in the correction's local frame, for combined-field checks.
pub fn cgo_exponential_local(
    zeta: &CVector,
    h: f64,
    chi: &CutoffProfile,
    grid: &Grid,
) -> Result<Field> {
    let zc = [zeta.components[0], zeta.components[1]];
    let im = zeta.imag();
    let mut max_exp = 0.0_f64;
    for k in 0..grid.node_count() {
        let lx = chi.local(grid.coords(k));
        max_exp = max_exp.max((lx[0] * im[0] + lx[1] * im[1]).abs() / h);
    }
    if max_exp > OVERFLOW_GUARD {
        return Err(Error::Overflow(max_exp));
    }
    Ok(grid.field_from_fn(|x| {
        let lx = chi.local(x);
        (-Complex64::new(0.0, 1.0) * (lx[0] * zc[0] + lx[1] * zc[1]) / h).exp()
    }))
}

/// Discrete H¹ graph norm: `h² Σ|u|² + Σ_edges |u_a - u_b|²`, square-rooted.
pub fn h1_norm(grid: &Grid, u: &Field) -> f64 {
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let mut acc = 0.0;
    for v in &u.values {
        acc += h2 * v.norm_sqr();
    }
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if i + 1 < n {
                acc += (u.values[k + 1] - u.values[k]).norm_sqr();
            }
            if j + 1 < n {
                acc += (u.values[k + n] - u.values[k]).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Slope of log(norm) against 1/h.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Least-squares fit of `log(norm)` against `1/h` over the ladder samples.
pub fn decay_diagnostic(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.len() < 3 {
        return Err(Error::InsufficientSamples(samples.len()));
    }
    let mut hs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    if hs.len() < 3 {
        return Err(Error::InsufficientSamples(hs.len()));
    }
    for &(h, norm) in samples {
        if h <= 0.0 || norm <= 0.0 {
            return Err(Error::Invalid(format!(
                "decay samples need h > 0 and norm > 0, got ({h}, {norm})"
            )));
        }
    }
    let xs: Vec<f64> = samples.iter().map(|&(h, _)| 1.0 / h).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, n)| n.ln()).collect();
    let m = samples.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = m * sxx - sx * sx;
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(DecayFit {
        slope,
        intercept,
        residual,
    })
}
