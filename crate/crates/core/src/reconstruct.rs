//! Recovery of the potential from second-order DN data: the boundary moment
//! for a plane-wave probe triple with `ξ₁ + ξ₂ + ξ₀ = z` equals `2 q̂(z)`
//! (the solution product collapses to `e^{-i x·z}`), so a lattice of such
//! triples fills a disk of Fourier moments, and a Gaussian-windowed discrete
//! inverse transform produces the nodal reconstruction.
//!
//! Probes are real plane waves, which confines the lattice to the band
//! `|z| ≤ 3κ`: the triple construction peels `ξ₀ = κ ẑ` off `z` and splits
//! the remainder `y` into `y/2 ± t` with `t ⊥ y`, `|t|² = κ² - |y|²/4`,
//! which needs `|y| ≤ 2κ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dnmap::{
    boundary_moment, second_linearization_analytic, second_linearization_fd, MomentMethod,
    MomentRecord,
};
use crate::error::{Error, Result};
use crate::grid::{volume_quadrature, BoundaryFunction, Field, Grid};
use crate::helmholtz::HelmholtzOperator;
use crate::nonlinear::Potential;

/// A probe frequency, possibly complex: the trace is
/// `e^{-i x·(re + i·im)} = e^{x·im} e^{-i x·re}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProbeFreq {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl ProbeFreq {
    pub fn real(v: [f64; 2]) -> ProbeFreq {
        ProbeFreq {
            re: v,
            im: [0.0, 0.0],
        }
    }

    pub fn is_real(&self) -> bool {
        self.im == [0.0, 0.0]
    }

    /// `|ξ·ξ - κ²|` (bilinear square).
    pub fn variety_residual(&self, kappa: f64) -> f64 {
        let dot = Complex64::new(
            self.re[0] * self.re[0] - self.im[0] * self.im[0] + self.re[1] * self.re[1]
                - self.im[1] * self.im[1],
            2.0 * (self.re[0] * self.im[0] + self.re[1] * self.im[1]),
        );
        (dot - kappa * kappa).norm()
    }
}

/// One lattice frequency with its on-variety probe triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEntry {
    pub z: [f64; 2],
    pub xi1: ProbeFreq,
    pub xi2: ProbeFreq,
    pub xi0: ProbeFreq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeRegime {
    /// Real plane waves, band limited to `|z| ≤ 3κ`.
    Real,
    /// Complex exponentials beyond the real band; growing amplitudes
    /// exponentially amplify solver noise (see the cgo decay diagnostics).
    Cgo,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyPlan {
    pub kappa: f64,
    pub band_radius: f64,
    pub lattice_step: f64,
    pub probes: ProbeRegime,
    pub entries: Vec<PlanEntry>,
}

fn perp(v: [f64; 2]) -> [f64; 2] {
    [v[1], -v[0]]
}

/// The probe triple for one lattice frequency: peel `ξ₀ = κ ẑ` off `z`, then
/// split the remainder `y` into `y/2 ± t` with `t ⊥ y` and
/// `t·t = κ² - |y|²/4`; `t` turns imaginary beyond the real band.
fn build_triple(kappa: f64, z: [f64; 2], allow_complex: bool) -> Result<PlanEntry> {
    let zn = (z[0] * z[0] + z[1] * z[1]).sqrt();
    let zhat = if zn == 0.0 { [1.0, 0.0] } else { [z[0] / zn, z[1] / zn] };
    let xi0 = [kappa * zhat[0], kappa * zhat[1]];
    let y = [z[0] - xi0[0], z[1] - xi0[1]];
    let yn = (y[0] * y[0] + y[1] * y[1]).sqrt();
    let t_sq = kappa * kappa - yn * yn / 4.0;
    let t_dir = if yn == 0.0 { perp(zhat) } else { perp([y[0] / yn, y[1] / yn]) };
    let half = [y[0] / 2.0, y[1] / 2.0];
    let (xi1, xi2) = if t_sq >= -1e-12 * kappa * kappa {
        let t_len = t_sq.max(0.0).sqrt();
        let t = [t_len * t_dir[0], t_len * t_dir[1]];
        (
            ProbeFreq::real([half[0] + t[0], half[1] + t[1]]),
            ProbeFreq::real([half[0] - t[0], half[1] - t[1]]),
        )
    } else {
        if !allow_complex {
            return Err(Error::BandTooWide {
                band: zn,
                limit: 3.0 * kappa,
            });
        }
        let s = (-t_sq).sqrt();
        // the probe trace carries exp(x.im); past the f64 range the solves
        // would silently fill with infinities
        if s * std::f64::consts::SQRT_2 > crate::cgo::OVERFLOW_GUARD {
            return Err(Error::Overflow(s * std::f64::consts::SQRT_2));
        }
        let im = [s * t_dir[0], s * t_dir[1]];
        (
            ProbeFreq { re: half, im },
            ProbeFreq {
                re: half,
                im: [-im[0], -im[1]],
            },
        )
    };
    let entry = PlanEntry {
        z,
        xi1,
        xi2,
        xi0: ProbeFreq::real(xi0),
    };
    for xi in [&entry.xi1, &entry.xi2, &entry.xi0] {
        debug_assert!(
            xi.variety_residual(kappa) <= 1e-12 * (kappa * kappa).max(1.0),
            "off variety"
        );
    }
    Ok(entry)
}

fn plan_lattice(
    kappa: f64,
    band_radius: f64,
    lattice_step: f64,
    probes: ProbeRegime,
) -> Result<FrequencyPlan> {
    if kappa <= 0.0 || lattice_step <= 0.0 || band_radius < 0.0 {
        return Err(Error::Invalid(
            "plan needs kappa > 0, lattice_step > 0, band_radius >= 0".into(),
        ));
    }
    let reach = (band_radius / lattice_step).floor() as i64;
    let mut entries = Vec::new();
    for m in -reach..=reach {
        for l in -reach..=reach {
            let z = [m as f64 * lattice_step, l as f64 * lattice_step];
            let zn = (z[0] * z[0] + z[1] * z[1]).sqrt();
            if zn > band_radius * (1.0 + 1e-12) {
                continue;
            }
            entries.push(build_triple(kappa, z, probes == ProbeRegime::Cgo)?);
        }
    }
    Ok(FrequencyPlan {
        kappa,
        band_radius,
        lattice_step,
        probes,
        entries,
    })
}

/// Build the real plane-wave probe plan for a symmetric lattice of step
/// `lattice_step` within `|z| ≤ band_radius ≤ 3κ`.
pub fn plan_frequencies(kappa: f64, band_radius: f64, lattice_step: f64) -> Result<FrequencyPlan> {
    let limit = 3.0 * kappa;
    if band_radius > limit * (1.0 + 1e-12) {
        return Err(Error::BandTooWide {
            band: band_radius,
            limit,
        });
    }
    plan_lattice(kappa, band_radius, lattice_step, ProbeRegime::Real)
}

/// CGO-probe variant: the band is unrestricted, at the price of exponentially
/// growing probe amplitudes beyond `|z| = 3κ`.
pub fn plan_frequencies_cgo(kappa: f64, band_radius: f64, lattice_step: f64) -> Result<FrequencyPlan> {
    plan_lattice(kappa, band_radius, lattice_step, ProbeRegime::Cgo)
}

/// Boundary trace of the probe exponential `e^{-i x·ξ}`.
pub fn probe_trace(grid: &Grid, xi: &ProbeFreq) -> BoundaryFunction {
    let (re, im) = (xi.re, xi.im);
    grid.boundary_from_fn(move |[x, y]| {
        (x * im[0] + y * im[1]).exp()
            * (-Complex64::new(0.0, 1.0) * (re[0] * x + re[1] * y)).exp()
    })
}

pub fn plane_wave_trace(grid: &Grid, xi: [f64; 2]) -> BoundaryFunction {
    probe_trace(grid, &ProbeFreq::real(xi))
}

/// Run the measurement for one plan entry: second linearization of the DN map
/// with the probe pair, paired against the compensating data. With a
/// partition, the probe traces are masked to Γ₁, the compensating data to
/// Γ₂, and the measured trace is read on Γ₂ only (which loses nothing since
/// the pairing weight is supported there).
pub fn simulate_moment(
    op: &HelmholtzOperator,
    q: &Potential,
    entry: &PlanEntry,
    method: MomentMethod,
    eps: f64,
    part: Option<&crate::grid::BoundaryPartition>,
) -> Result<MomentRecord> {
    let grid = op.grid();
    let mut f1 = probe_trace(grid, &entry.xi1);
    let mut f2 = probe_trace(grid, &entry.xi2);
    let mut f0 = probe_trace(grid, &entry.xi0);
    if let Some(p) = part {
        f1 = f1.masked(grid, &p.gamma1);
        f2 = f2.masked(grid, &p.gamma1);
        f0 = f0.masked(grid, &p.gamma2);
    }
    let mut d2 = match method {
        MomentMethod::FiniteDifference => second_linearization_fd(op, q, &f1, &f2, eps)?,
        MomentMethod::Analytic => second_linearization_analytic(op, q, &f1, &f2)?,
    };
    if let Some(p) = part {
        d2 = d2.masked(grid, &p.gamma2);
    }
    let moment = boundary_moment(op, &d2, &f0)?;
    Ok(MomentRecord {
        f1,
        f2,
        f0,
        eps,
        moment,
        method,
    })
}

/// One measured moment tagged with its lattice frequency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentSample {
    pub z: [f64; 2],
    pub moment: [f64; 2],
}

/// Fourier coefficients `q̂(z)` keyed by lattice frequency, carrying the
/// lattice geometry needed by the inverse transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentTable {
    pub kappa: f64,
    pub band_radius: f64,
    pub lattice_step: f64,
    pub entries: Vec<([f64; 2], [f64; 2])>,
}

impl MomentTable {
    pub fn qhat(&self, k: usize) -> Complex64 {
        Complex64::new(self.entries[k].1[0], self.entries[k].1[1])
    }
}

/// Extract `q̂(z) = μ(z)/2` for every plan frequency from measured samples.
pub fn fourier_moments(samples: &[MomentSample], plan: &FrequencyPlan) -> Result<MomentTable> {
    let mut entries = Vec::with_capacity(plan.entries.len());
    for e in &plan.entries {
        let found = samples.iter().find(|s| {
            (s.z[0] - e.z[0]).abs() <= 1e-9 && (s.z[1] - e.z[1]).abs() <= 1e-9
        });
        let s = found.ok_or(Error::MissingRecord(e.z[0], e.z[1]))?;
        let qhat = Complex64::new(s.moment[0], s.moment[1]) / 2.0;
        entries.push((e.z, [qhat.re, qhat.im]));
    }
    Ok(MomentTable {
        kappa: plan.kappa,
        band_radius: plan.band_radius,
        lattice_step: plan.lattice_step,
        entries,
    })
}

/// Oracle table: `q̂(z) = ∫ q e^{-i x·z} dx` by direct quadrature.
pub fn direct_moments(grid: &Grid, q: &Potential, plan: &FrequencyPlan) -> Result<MomentTable> {
    let one = grid.constant_field(Complex64::new(1.0, 0.0));
    let qf = q.as_field();
    let mut entries = Vec::with_capacity(plan.entries.len());
    for e in &plan.entries {
        let z = e.z;
        let wave = grid.field_from_fn(|[x, y]| {
            (-Complex64::new(0.0, 1.0) * (z[0] * x + z[1] * y)).exp()
        });
        let qhat = volume_quadrature(grid, &qf, &wave, &one, &one)?;
        entries.push((z, [qhat.re, qhat.im]));
    }
    Ok(MomentTable {
        kappa: plan.kappa,
        band_radius: plan.band_radius,
        lattice_step: plan.lattice_step,
        entries,
    })
}

/// Window width for which the Gaussian falls to 0.1 at the band edge.
pub fn default_window_sigma(band_radius: f64) -> f64 {
    (2.0 * (10.0_f64).ln()).sqrt() / band_radius
}

/// Windowed discrete inverse transform
/// `q_rec(x) = (2π)^{-2} Σ_z w(z) q̂(z) e^{+i x·z} Δz²`,
/// `w(z) = exp(-|z|² σ²/2)`.
pub fn invert_fourier(moments: &MomentTable, grid: &Grid, window_sigma: Option<f64>) -> Potential {
    let sigma = window_sigma.unwrap_or_else(|| default_window_sigma(moments.band_radius));
    let scale = moments.lattice_step * moments.lattice_step
        / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.node_count()];
    for k in 0..moments.entries.len() {
        let (z, _) = moments.entries[k];
        let w = (-(z[0] * z[0] + z[1] * z[1]) * sigma * sigma / 2.0).exp();
        let coeff = moments.qhat(k) * w * scale;
        for node in 0..grid.node_count() {
            let [x, y] = grid.coords(node);
            let phase = Complex64::new(0.0, z[0] * x + z[1] * y).exp();
            values[node] += coeff * phase;
        }
    }
    Potential::from_values(grid.n(), values).expect("finite by construction")
}

/// `‖q_rec - q_true‖_{L²} / ‖q_true‖_{L²}` via volume quadrature.
pub fn relative_error(grid: &Grid, q_true: &Potential, q_rec: &Potential) -> Result<f64> {
    let one = grid.constant_field(Complex64::new(1.0, 0.0));
    let diff = Field {
        n: q_true.n,
        values: q_rec
            .values
            .iter()
            .zip(&q_true.values)
            .map(|(a, b)| a - b)
            .collect(),
    };
    let num = volume_quadrature(grid, &diff, &diff.conj(), &one, &one)?.re.max(0.0).sqrt();
    let tf = q_true.as_field();
    let den = volume_quadrature(grid, &tf, &tf.conj(), &one, &one)?.re.max(0.0).sqrt();
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}
