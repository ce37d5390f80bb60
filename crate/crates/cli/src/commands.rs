//! The seven workflow commands, each reading its configuration sections and
//! writing JSON/CSV/PGM artifacts into the output directory. Every failure
//! names the stage it came from; the error kind maps onto the exit code.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use helmlab_core::cgo::{
    cgo_correction, decay_diagnostic, variety_anchor, CutoffProfile,
};
use helmlab_core::dnmap::MomentMethod;
use helmlab_core::error::Error as CoreError;
use helmlab_core::grid::{build_grid, BoundaryFunction, BoundaryPartition, Field, Grid, GridKind};
use helmlab_core::helmholtz::assemble;
use helmlab_core::io::{
    dataset_from_json, dataset_to_json, decay_csv, field_to_csv, grid_to_json, ladder_csv, pgm16,
    DatasetFile, GridSpec, MomentRecordDto, PgmSidecar,
};
use helmlab_core::maxwell::{
    amplitude_product_bound, em_plane_wave, kerr_anchor_eta, kerr_anchor_xi, kerr_family,
    kerr_identity_quadrature, on_variety_vector, recover_chi_direction, recovery_matrix,
    shg_family, shg_identity_quadrature, BoxGrid3, CVec3, MaxwellCoefficients, Medium,
};
use helmlab_core::nonlinear::{solve_nonlinear, Potential};
use helmlab_core::reconstruct::{
    direct_moments, fourier_moments, invert_fourier, plan_frequencies, plan_frequencies_cgo,
    relative_error, simulate_moment, MomentSample, ProbeRegime,
};
use helmlab_core::runge::{cavity_discrepancy, disk_mask, runge_approximate, square_region, RungeProblem};

use crate::config::{Config, ConfigError};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Data(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Data(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Data(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Attach the failing stage name and sort the core error into an exit class.
fn at_stage(stage: &str, e: CoreError) -> CliError {
    let msg = format!("stage {stage}: {e}");
    match e {
        CoreError::NearEigenvalue { .. }
        | CoreError::Diverged { .. }
        | CoreError::SingularFactor(_)
        | CoreError::Overflow(_)
        | CoreError::ProbeFailed { .. }
        | CoreError::Degenerate => CliError::Numerical(msg),
        CoreError::GridMismatch(_, _)
        | CoreError::MissingRecord(_, _)
        | CoreError::ZeroDenominator => CliError::Data(msg),
        _ => CliError::Config(msg),
    }
}

fn write_out(out: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("cannot create output directory: {e}")))?;
    fs::write(out.join(name), bytes)
        .map_err(|e| CliError::Config(format!("cannot write {name}: {e}")))?;
    Ok(())
}

fn grid_from_config(cfg: &Config) -> Result<Grid, CliError> {
    let n = cfg.get_usize("grid", "n")?;
    build_grid(GridKind::Rectangle, n).map_err(|e| at_stage("build_grid", e))
}

fn potential_from_config(cfg: &Config, grid: &Grid, section: &str) -> Result<Potential, CliError> {
    if !cfg.has_section(section) {
        return Ok(Potential::zero(grid));
    }
    match cfg.get(section, "kind")? {
        "zero" => Ok(Potential::zero(grid)),
        "constant" => {
            let value = cfg.get_f64(section, "value")?;
            Ok(Potential::constant(grid, Complex64::new(value, 0.0)))
        }
        "gaussian" => {
            let cx = cfg.get_f64(section, "center_x")?;
            let cy = cfg.get_f64(section, "center_y")?;
            let width = cfg.get_f64(section, "width")?;
            let amplitude = cfg.get_f64(section, "amplitude")?;
            if width <= 0.0 {
                return Err(CliError::Config(format!(
                    "config error: [{section}] key 'width' must be > 0"
                )));
            }
            Ok(Potential::gaussian(grid, [cx, cy], width, amplitude))
        }
        "file" => {
            let path = cfg.get(section, "path")?;
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("config error: [{section}] path '{path}': {e}"))
            })?;
            read_potential_csv(grid, &text, section)
        }
        other => Err(CliError::Config(format!(
            "config error: [{section}] kind '{other}' is not zero|constant|gaussian|file"
        ))),
    }
}

fn read_potential_csv(grid: &Grid, text: &str, section: &str) -> Result<Potential, CliError> {
    let mut values = vec![Complex64::new(0.0, 0.0); grid.node_count()];
    let mut seen = 0usize;
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 6 {
            return Err(CliError::Config(format!(
                "config error: [{section}] file line {}: expected i,j,x,y,re,im",
                lineno + 1
            )));
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "config error: [{section}] file line {}: '{s}' is not a number",
                    lineno + 1
                ))
            })
        };
        let i = parse(cols[0])? as usize;
        let j = parse(cols[1])? as usize;
        if i >= grid.n() || j >= grid.n() {
            return Err(CliError::Config(format!(
                "config error: [{section}] file line {}: node ({i},{j}) outside the {0}x{0} grid",
                grid.n(),
            )));
        }
        values[grid.node(i, j)] = Complex64::new(parse(cols[4])?, parse(cols[5])?);
        seen += 1;
    }
    if seen != grid.node_count() {
        return Err(CliError::Config(format!(
            "config error: [{section}] file holds {seen} nodes, grid needs {}",
            grid.node_count()
        )));
    }
    Potential::from_values(grid.n(), values).map_err(|e| at_stage("potential", e))
}

fn boundary_data_from_config(cfg: &Config, grid: &Grid, kappa: f64) -> Result<BoundaryFunction, CliError> {
    let shape = cfg.get_or("data", "shape", "planewave");
    let amplitude = cfg.get_f64_or("data", "amplitude", 1e-3)?;
    let f = match shape {
        "planewave" => {
            let dx = cfg.get_f64_or("data", "dir_x", 1.0)?;
            let dy = cfg.get_f64_or("data", "dir_y", 0.0)?;
            let norm = (dx * dx + dy * dy).sqrt();
            if norm == 0.0 {
                return Err(CliError::Config(
                    "config error: [data] direction must be nonzero".into(),
                ));
            }
            let d = [dx / norm, dy / norm];
            grid.boundary_from_fn(move |[x, y]| {
                (-Complex64::new(0.0, 1.0) * kappa * (d[0] * x + d[1] * y)).exp()
            })
        }
        "constant" => grid.boundary_from_fn(|_| Complex64::new(1.0, 0.0)),
        "cosine" => grid.boundary_from_fn(move |[x, _]| Complex64::new((kappa * x).cos(), 0.0)),
        other => {
            return Err(CliError::Config(format!(
                "config error: [data] shape '{other}' is not planewave|constant|cosine"
            )))
        }
    };
    Ok(f.scale(Complex64::new(amplitude, 0.0)))
}

fn partition_from_config(cfg: &Config) -> Result<Option<BoundaryPartition>, CliError> {
    if !cfg.has_section("partition") {
        return Ok(None);
    }
    let gamma1 = cfg.get_arcs("partition", "gamma1")?;
    let gamma2 = cfg.get_arcs("partition", "gamma2")?;
    let part = BoundaryPartition::new(gamma1, gamma2).map_err(|e| at_stage("partition", e))?;
    Ok(Some(part))
}

#[derive(Serialize)]
struct ForwardGridReport {
    n: usize,
    h: f64,
    iterations: usize,
    converged: bool,
    residual_history: Vec<f64>,
    interior_residual: f64,
    manufactured_error: Option<f64>,
}

#[derive(Serialize)]
struct ForwardReport {
    kappa: f64,
    grids: Vec<ForwardGridReport>,
    observed_orders: Vec<f64>,
}

pub fn cmd_forward(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let kappa = cfg.get_f64("problem", "kappa")?;
    let base_n = cfg.get_usize("grid", "n")?;
    let grids: Vec<usize> = match cfg.maybe("problem", "refine") {
        Some(_) => cfg.get_usize_list("problem", "refine")?,
        None => vec![base_n],
    };
    let tol = cfg.get_f64_or("solver", "tol", 1e-12)?;
    let max_iter = cfg.get_usize_or("solver", "max_iter", 100)?;

    let mut reports = Vec::new();
    let mut finest: Option<(Grid, Field)> = None;
    for &n in &grids {
        let grid = build_grid(GridKind::Rectangle, n).map_err(|e| at_stage("build_grid", e))?;
        let q = potential_from_config(cfg, &grid, "potential")?;
        let f = boundary_data_from_config(cfg, &grid, kappa)?;
        let op = assemble(&grid, kappa).map_err(|e| at_stage("assemble", e))?;
        let report = solve_nonlinear(&op, &q, &f, tol, max_iter)
            .map_err(|e| at_stage("solve_nonlinear", e))?;
        let mut source = Field::zeros(&grid);
        for k in 0..grid.node_count() {
            let u = report.solution.values[k];
            source.values[k] = -q.values[k] * u * u;
        }
        let interior_residual = op.residual_sup(&report.solution, &source);

        // manufactured error is available for the linear plane-wave run
        let manufactured_error = if q.sup_norm() == 0.0
            && cfg.get_or("data", "shape", "planewave") == "planewave"
        {
            let amplitude = cfg.get_f64_or("data", "amplitude", 1e-3)?;
            let dx = cfg.get_f64_or("data", "dir_x", 1.0)?;
            let dy = cfg.get_f64_or("data", "dir_y", 0.0)?;
            let norm = (dx * dx + dy * dy).sqrt();
            let d = [dx / norm, dy / norm];
            let exact = grid.field_from_fn(|[x, y]| {
                amplitude * (-Complex64::new(0.0, 1.0) * kappa * (d[0] * x + d[1] * y)).exp()
            });
            Some(
                report
                    .solution
                    .values
                    .iter()
                    .zip(&exact.values)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max),
            )
        } else {
            None
        };
        reports.push(ForwardGridReport {
            n,
            h: grid.h(),
            iterations: report.iterations,
            converged: report.converged,
            residual_history: report.residual_history.clone(),
            interior_residual,
            manufactured_error,
        });
        finest = Some((grid, report.solution));
    }

    let mut observed_orders = Vec::new();
    for w in reports.windows(2) {
        if let (Some(e1), Some(e2)) = (w[0].manufactured_error, w[1].manufactured_error) {
            observed_orders.push((e1 / e2).ln() / (w[0].h / w[1].h).ln());
        }
    }

    let (grid, solution) = finest.expect("at least one grid");
    write_out(out, "solution.csv", field_to_csv(&grid, &solution).as_bytes())?;
    write_out(out, "grid.json", grid_to_json(&grid).as_bytes())?;
    let mut convergence = String::from("n,h,manufactured_error\n");
    for r in &reports {
        convergence.push_str(&format!(
            "{},{},{}\n",
            r.n,
            r.h,
            r.manufactured_error.map_or(String::from(""), |e| e.to_string())
        ));
    }
    write_out(out, "convergence.csv", convergence.as_bytes())?;
    let report = ForwardReport {
        kappa,
        grids: reports,
        observed_orders,
    };
    write_out(
        out,
        "residual_report.json",
        serde_json::to_string_pretty(&report).unwrap().as_bytes(),
    )?;
    Ok(())
}

pub fn cmd_simulate(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let kappa = cfg.get_f64("problem", "kappa")?;
    let grid = grid_from_config(cfg)?;
    let q = potential_from_config(cfg, &grid, "potential")?;
    let band = cfg.get_f64("plan", "band_radius")?;
    let step = cfg.get_f64("plan", "lattice_step")?;
    let eps = cfg.get_f64_or("measurement", "eps", 1e-3)?;
    let method = match cfg.get_or("measurement", "method", "fd") {
        "fd" => MomentMethod::FiniteDifference,
        "analytic" => MomentMethod::Analytic,
        other => {
            return Err(CliError::Config(format!(
                "config error: [measurement] method '{other}' is not fd|analytic"
            )))
        }
    };
    let part = partition_from_config(cfg)?;
    let probes = match cfg.get_or("plan", "probes", "real") {
        "real" => ProbeRegime::Real,
        "cgo" => ProbeRegime::Cgo,
        other => {
            return Err(CliError::Config(format!(
                "config error: [plan] probes '{other}' is not real|cgo"
            )))
        }
    };
    let plan = match probes {
        ProbeRegime::Real => plan_frequencies(kappa, band, step),
        ProbeRegime::Cgo => plan_frequencies_cgo(kappa, band, step),
    }
    .map_err(|e| at_stage("plan_frequencies", e))?;
    let op = assemble(&grid, kappa).map_err(|e| at_stage("assemble", e))?;

    let records: Vec<MomentRecordDto> = plan
        .entries
        .par_iter()
        .map(|entry| {
            simulate_moment(&op, &q, entry, method, eps, part.as_ref())
                .map(|rec| MomentRecordDto::new(entry.z, &rec))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| {
            let hint = if matches!(e, CoreError::Diverged { .. }) {
                "; try a smaller eps or run the smallness probe"
            } else {
                ""
            };
            match at_stage("simulate_moment", e) {
                CliError::Numerical(m) => CliError::Numerical(format!("{m}{hint}")),
                other => other,
            }
        })?;

    let dataset = DatasetFile {
        grid: GridSpec {
            kind: GridKind::Rectangle,
            n: grid.n(),
        },
        kappa,
        band_radius: band,
        lattice_step: step,
        probes,
        partition: part,
        records,
    };
    write_out(out, "dataset.json", dataset_to_json(&dataset).as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct ErrorReport {
    relative_error_vs_truth: f64,
    relative_error_vs_projection: f64,
}

pub fn cmd_reconstruct(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let path = cfg.get("input", "dataset")?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("config error: [input] dataset '{path}': {e}")))?;
    let dataset = dataset_from_json(&text).map_err(|e| at_stage("dataset", e))?;

    let n = cfg.get_usize("grid", "n")?;
    let kappa = cfg.get_f64("problem", "kappa")?;
    if dataset.grid.n != n {
        return Err(CliError::Data(format!(
            "dataset grid n = {} does not match config n = {n}",
            dataset.grid.n
        )));
    }
    if (dataset.kappa - kappa).abs() > 1e-12 * kappa.abs().max(1.0) {
        return Err(CliError::Data(format!(
            "dataset kappa = {} does not match config kappa = {kappa}",
            dataset.kappa
        )));
    }
    let grid = build_grid(dataset.grid.kind, n).map_err(|e| at_stage("build_grid", e))?;
    let plan = match dataset.probes {
        ProbeRegime::Real => {
            plan_frequencies(dataset.kappa, dataset.band_radius, dataset.lattice_step)
        }
        ProbeRegime::Cgo => {
            plan_frequencies_cgo(dataset.kappa, dataset.band_radius, dataset.lattice_step)
        }
    }
    .map_err(|e| at_stage("plan_frequencies", e))?;
    let samples: Vec<MomentSample> = dataset.records.iter().map(|r| r.sample()).collect();
    let table = fourier_moments(&samples, &plan).map_err(|e| at_stage("fourier_moments", e))?;
    let sigma = match cfg.maybe("reconstruct", "window_sigma") {
        Some(_) => Some(cfg.get_f64("reconstruct", "window_sigma")?),
        None => None,
    };
    let q_rec = invert_fourier(&table, &grid, sigma);

    write_out(
        out,
        "moments.json",
        serde_json::to_string_pretty(&table).unwrap().as_bytes(),
    )?;
    let magnitudes: Vec<f64> = q_rec.values.iter().map(|v| v.norm()).collect();
    let (bytes, lo, hi) = pgm16(&grid, &magnitudes);
    write_out(out, "q_rec.pgm", &bytes)?;
    let sidecar = PgmSidecar {
        width: grid.n(),
        height: grid.n(),
        min: lo,
        max: hi,
        row0: "y=1".into(),
    };
    write_out(
        out,
        "q_rec.json",
        serde_json::to_string_pretty(&sidecar).unwrap().as_bytes(),
    )?;

    if cfg.has_section("truth") {
        let truth = potential_from_config(cfg, &grid, "truth")?;
        // a zero truth has no relative scale; fall back to the absolute L2
        // norm of the reconstruction
        let err_truth = if truth.sup_norm() == 0.0 {
            let one = grid.constant_field(Complex64::new(1.0, 0.0));
            let rec_field = q_rec.as_field();
            helmlab_core::grid::volume_quadrature(&grid, &rec_field, &rec_field.conj(), &one, &one)
                .map_err(|e| at_stage("relative_error", e))?
                .re
                .max(0.0)
                .sqrt()
        } else {
            relative_error(&grid, &truth, &q_rec).map_err(|e| at_stage("relative_error", e))?
        };
        let oracle = direct_moments(&grid, &truth, &plan).map_err(|e| at_stage("direct_moments", e))?;
        let projection = invert_fourier(&oracle, &grid, sigma);
        let err_proj = relative_error(&grid, &projection, &q_rec)
            .map_err(|e| at_stage("relative_error", e))?;
        let mut csv = String::from("metric,value\n");
        csv.push_str(&format!("relative_error_vs_truth,{err_truth}\n"));
        csv.push_str(&format!("relative_error_vs_projection,{err_proj}\n"));
        write_out(out, "error.csv", csv.as_bytes())?;
        write_out(
            out,
            "error.json",
            serde_json::to_string_pretty(&ErrorReport {
                relative_error_vs_truth: err_truth,
                relative_error_vs_projection: err_proj,
            })
            .unwrap()
            .as_bytes(),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DecayReport {
    slope: f64,
    intercept: f64,
    fit_residual: f64,
    samples: Vec<(f64, f64)>,
}

pub fn cmd_cgo_decay(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let kappa = cfg.get_f64("problem", "kappa")?;
    let grid = grid_from_config(cfg)?;
    let c = cfg.get_f64_or("cgo", "cutoff_c", 0.25)?;
    let order = cfg.get_usize_or("cgo", "cutoff_order", 5)?;
    let ladder = cfg.get_f64_list("cgo", "h_ladder")?;
    let arcs = match cfg.maybe("cgo", "arcs") {
        Some(_) => cfg.get_arcs("cgo", "arcs")?,
        None => vec![(1.0, 2.0)], // right face of the unit square
    };
    let positive = cfg.get_or("cgo", "sign", "+") != "-";

    let op = assemble(&grid, kappa).map_err(|e| at_stage("assemble", e))?;
    let chi = CutoffProfile::new(&grid, c, order).map_err(|e| at_stage("cutoff", e))?;
    let samples: Vec<(f64, f64)> = ladder
        .par_iter()
        .map(|&h| {
            let zeta = variety_anchor(kappa * h, positive);
            cgo_correction(&op, &zeta, h, &chi, &arcs).map(|(_, norm)| (h, norm))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| at_stage("cgo_correction", e))?;
    let fit = decay_diagnostic(&samples).map_err(|e| at_stage("decay_diagnostic", e))?;
    write_out(
        out,
        "decay.csv",
        decay_csv(&samples, fit.slope, fit.intercept).as_bytes(),
    )?;
    write_out(
        out,
        "decay.json",
        serde_json::to_string_pretty(&DecayReport {
            slope: fit.slope,
            intercept: fit.intercept,
            fit_residual: fit.residual,
            samples,
        })
        .unwrap()
        .as_bytes(),
    )?;
    Ok(())
}

pub fn cmd_runge(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let kappa = cfg.get_f64("problem", "kappa")?;
    let grid = grid_from_config(cfg)?;
    let modes = cfg.get_usize_list("runge", "modes")?;
    let arcs = cfg.get_arcs("runge", "arcs")?;
    let cx = cfg.get_f64_or("runge", "region_center_x", 0.5)?;
    let cy = cfg.get_f64_or("runge", "region_center_y", 0.5)?;
    let radius = cfg.get_f64_or("runge", "region_radius", 0.15)?;
    let dx = cfg.get_f64_or("runge", "dir_x", 1.0)?;
    let dy = cfg.get_f64_or("runge", "dir_y", 0.0)?;
    let dn = (dx * dx + dy * dy).sqrt();
    if dn == 0.0 {
        return Err(CliError::Config(
            "config error: [runge] direction must be nonzero".into(),
        ));
    }
    let d = [dx / dn, dy / dn];
    let op = assemble(&grid, kappa).map_err(|e| at_stage("assemble", e))?;
    let target = grid.field_from_fn(|[x, y]| {
        (-Complex64::new(0.0, 1.0) * kappa * (d[0] * x + d[1] * y)).exp()
    });
    let region = square_region(&grid, [cx, cy], radius);
    let mut rows = Vec::new();
    for &n_modes in &modes {
        let problem = RungeProblem {
            region: region.clone(),
            control_arcs: arcs.clone(),
            n_modes,
            target: target.clone(),
            lambda: None,
        };
        let sol = runge_approximate(&op, &problem).map_err(|e| at_stage("runge_approximate", e))?;
        rows.push((n_modes, sol.residual));
    }
    write_out(out, "ladder.csv", ladder_csv(&rows).as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct CavityReport {
    baseline: f64,
    discrepancy: f64,
    ratio: Option<f64>,
}

pub fn cmd_cavity(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let kappa = cfg.get_f64("problem", "kappa")?;
    let grid = grid_from_config(cfg)?;
    let d1c = [
        cfg.get_f64("cavity", "d1_center_x")?,
        cfg.get_f64("cavity", "d1_center_y")?,
    ];
    let d1r = cfg.get_f64("cavity", "d1_radius")?;
    let d2c = [
        cfg.get_f64("cavity", "d2_center_x")?,
        cfg.get_f64("cavity", "d2_center_y")?,
    ];
    let d2r = cfg.get_f64("cavity", "d2_radius")?;
    let modes = cfg.get_usize_or("cavity", "modes", 8)?;
    let g = cfg.get_f64_or("cavity", "g", 1.0)?;
    let arcs = match cfg.maybe("cavity", "arcs") {
        Some(_) => cfg.get_arcs("cavity", "arcs")?,
        None => vec![(0.0, 4.0)],
    };
    let d1 = disk_mask(&grid, d1c, d1r);
    let d2 = disk_mask(&grid, d2c, d2r);
    let baseline = cavity_discrepancy(&grid, kappa, &d1, &d1, &arcs, modes, g)
        .map_err(|e| at_stage("cavity_discrepancy", e))?;
    let discrepancy = cavity_discrepancy(&grid, kappa, &d1, &d2, &arcs, modes, g)
        .map_err(|e| at_stage("cavity_discrepancy", e))?;
    let report = CavityReport {
        baseline,
        discrepancy,
        ratio: (baseline > 0.0).then(|| discrepancy / baseline),
    };
    write_out(
        out,
        "cavity.json",
        serde_json::to_string_pretty(&report).unwrap().as_bytes(),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct IdentityCheck {
    name: String,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ShgCaseReport {
    case: usize,
    varsigma: Vec<[f64; 2]>,
    a_varsigma: Vec<[f64; 2]>,
    constraint_residual: f64,
    orthogonality_residual: f64,
    identity_value: [f64; 2],
}

#[derive(Serialize)]
struct MaxwellReport {
    k: f64,
    h: f64,
    kh: f64,
    samples: usize,
    kerr_anchor_xi: Vec<[f64; 2]>,
    kerr_anchor_eta: Vec<[f64; 2]>,
    kerr_identity_value: [f64; 2],
    shg_cases: Vec<ShgCaseReport>,
    recovery_condition_number: f64,
    checks: Vec<IdentityCheck>,
    all_pass: bool,
}

fn cvec_pairs(v: &CVec3) -> Vec<[f64; 2]> {
    v.0.iter().map(|z| [z.re, z.im]).collect()
}

/// 2-norm condition number of the fixed 3×3 recovery matrix by power
/// iteration on MᴴM and its inverse.
fn recovery_condition_number() -> f64 {
    let m = recovery_matrix();
    let mut mhm = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                mhm[i][j] += m[l][i].conj() * m[l][j];
            }
        }
    }
    let matvec = |v: &[Complex64; 3]| {
        let mut w = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            for j in 0..3 {
                w[i] += mhm[i][j] * v[j];
            }
        }
        w
    };
    let norm = |v: &[Complex64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut v = [Complex64::new(1.0, 0.0); 3];
    let mut large = 0.0;
    for _ in 0..100 {
        let w = matvec(&v);
        large = norm(&w);
        for (a, b) in v.iter_mut().zip(&w) {
            *a = b / large;
        }
    }
    let a: Vec<Vec<Complex64>> = mhm.iter().map(|r| r.to_vec()).collect();
    let mut u = [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.1), Complex64::new(-0.3, 0.2)];
    let mut inv_large = 0.0;
    for _ in 0..100 {
        let w = helmlab_core::band::dense_solve(&a, &u).expect("recovery matrix invertible");
        let w = [w[0], w[1], w[2]];
        inv_large = norm(&w);
        for (x, y) in u.iter_mut().zip(&w) {
            *x = y / inv_large;
        }
    }
    (large * inv_large).sqrt()
}

pub fn cmd_maxwell_verify(cfg: &Config, out: &Path, seed: u64) -> Result<(), CliError> {
    let k = cfg.get_f64_or("maxwell", "k", 1.0)?;
    let h = cfg.get_f64_or("maxwell", "h", 0.3)?;
    let samples = cfg.get_usize_or("maxwell", "samples", 100)?;
    let box_n = cfg.get_usize_or("maxwell", "box_n", 17)?;
    let kh = k * h;
    if kh >= 1.0 {
        return Err(CliError::Config(format!(
            "config error: [maxwell] requires k*h < 1 for the SHG families, got {kh}"
        )));
    }
    let medium = Medium::unit(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_on_variety = |rng: &mut ChaCha8Rng| loop {
        let im = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let dir = [
            rng.gen_range(-1.0_f64..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        if let Some(v) = on_variety_vector(kh, im, dir) {
            return v;
        }
    };
    let rand_cvec = |rng: &mut ChaCha8Rng| {
        CVec3([
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ])
    };

    let mut checks = Vec::new();
    let push = |name: &str, residual: f64, tolerance: f64, checks: &mut Vec<IdentityCheck>| {
        checks.push(IdentityCheck {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        });
    };

    // plane-wave Maxwell residuals on random on-variety samples
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let xi = rand_on_variety(&mut rng);
        let a = rand_cvec(&mut rng);
        let b = rand_cvec(&mut rng);
        let wave = em_plane_wave(xi, a, b, h, &medium).map_err(|e| at_stage("em_plane_wave", e))?;
        let scale = wave.e_amp.norm().max(wave.h_amp.norm()).max(1.0);
        worst = worst.max(wave.maxwell_residual(&medium) / scale);
    }
    push("plane_wave_maxwell_residual", worst, 1e-10, &mut checks);

    // Kerr orthogonality
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let xi = rand_on_variety(&mut rng);
        let eta = rand_on_variety(&mut rng);
        let fam = kerr_family(xi, eta, h, &medium).map_err(|e| at_stage("kerr_family", e))?;
        let h1 = &fam.waves[0].h_amp;
        for j in [1usize, 2, 3] {
            let other = &fam.waves[j].h_amp;
            let scale = h1.norm().max(1.0) * other.norm().max(1.0);
            worst = worst.max(h1.dot(&other.conj()).norm() / scale);
        }
    }
    push("kerr_orthogonality", worst, 1e-10, &mut checks);

    // SHG constraints for all three cases
    let mut worst = 0.0_f64;
    for case in 1..=3 {
        let fam = shg_family(case, k, h).map_err(|e| at_stage("shg_family", e))?;
        let s = fam.varsigma;
        worst = worst.max((s.dot(&s) - 4.0 * kh * kh).norm() / s.norm_sqr().max(1.0));
        worst = worst.max(s.dot(&fam.a_varsigma).norm() / s.norm().max(1.0));
    }
    push("shg_constraints", worst, 1e-10, &mut checks);

    // identity quadratures: vanish for equal coefficients; record the
    // nonzero values for a unit coefficient difference
    let grid3 = BoxGrid3::new(box_n).map_err(|e| at_stage("box_grid", e))?;
    let coeffs = MaxwellCoefficients::from_fns(
        grid3,
        |[x, y, z]| Complex64::new(x + y, z),
        |[x, y, z]| Complex64::new(x * y * z, -y),
        |[x, _, z]| CVec3([
            Complex64::new(x, 0.0),
            Complex64::new(0.0, z),
            Complex64::new(1.0, 0.0),
        ]),
    );
    let fam = kerr_family(kerr_anchor_xi(kh), kerr_anchor_eta(kh), h, &medium)
        .map_err(|e| at_stage("kerr_family", e))?;
    let kerr_equal = kerr_identity_quadrature(&coeffs, &coeffs, &fam, &grid3)
        .map_err(|e| at_stage("kerr_identity_quadrature", e))?;
    let unit_q = MaxwellCoefficients::constant(
        grid3,
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        CVec3::zero(),
    );
    let zero_c = MaxwellCoefficients::constant(
        grid3,
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        CVec3::zero(),
    );
    let kerr_identity_value = kerr_identity_quadrature(&unit_q, &zero_c, &fam, &grid3)
        .map_err(|e| at_stage("kerr_identity_quadrature", e))?;
    let mut shg_equal = 0.0_f64;
    let mut shg_cases = Vec::new();
    let unit_chi = MaxwellCoefficients::constant(
        grid3,
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        CVec3::real(1.0, 0.0, 0.0),
    );
    for case in 1..=3 {
        let shg_fam = shg_family(case, k, h).map_err(|e| at_stage("shg_family", e))?;
        shg_equal = shg_equal.max(
            shg_identity_quadrature(&coeffs, &coeffs, &shg_fam, &grid3)
                .map_err(|e| at_stage("shg_identity_quadrature", e))?
                .norm(),
        );
        let value = shg_identity_quadrature(&unit_chi, &zero_c, &shg_fam, &grid3)
            .map_err(|e| at_stage("shg_identity_quadrature", e))?;
        let s = shg_fam.varsigma;
        shg_cases.push(ShgCaseReport {
            case,
            varsigma: cvec_pairs(&s),
            a_varsigma: cvec_pairs(&shg_fam.a_varsigma),
            constraint_residual: (s.dot(&s) - 4.0 * kh * kh).norm(),
            orthogonality_residual: s.dot(&shg_fam.a_varsigma).norm(),
            identity_value: [value.re, value.im],
        });
    }
    push(
        "identity_vanishes_for_equal_coefficients",
        kerr_equal.norm().max(shg_equal),
        1e-10,
        &mut checks,
    );

    // amplitude product limit: Richardson extrapolation to h = 0
    let value_at = |hh: f64| {
        amplitude_product_bound(kerr_anchor_xi(k * hh), kerr_anchor_eta(k * hh), hh, 1e-9)
    };
    let p1 = value_at(1e-2).map_err(|e| at_stage("amplitude_product_bound", e))?;
    let p2 = value_at(5e-3).map_err(|e| at_stage("amplitude_product_bound", e))?;
    let extrapolated = (4.0 * p2 - p1) / 3.0;
    push(
        "amplitude_product_limit_32",
        (extrapolated - 32.0).abs(),
        1e-4,
        &mut checks,
    );

    // recovery roundtrip
    let m = recovery_matrix();
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let chi = rand_cvec(&mut rng);
        let moments: Vec<Complex64> = m
            .iter()
            .map(|row| CVec3([row[0], row[1], row[2]]).dot(&chi))
            .collect();
        let rec = recover_chi_direction(moments[0], moments[1], moments[2]);
        worst = worst.max(rec.sub(&chi).norm() / chi.norm().max(1.0));
    }
    push("chi_recovery_roundtrip", worst, 1e-12, &mut checks);

    let all_pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!(
            "{}: residual {:.3e} (tol {:.1e}) {}",
            c.name,
            c.residual,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let report = MaxwellReport {
        k,
        h,
        kh,
        samples,
        kerr_anchor_xi: cvec_pairs(&kerr_anchor_xi(kh)),
        kerr_anchor_eta: cvec_pairs(&kerr_anchor_eta(kh)),
        kerr_identity_value: [kerr_identity_value.re, kerr_identity_value.im],
        shg_cases,
        recovery_condition_number: recovery_condition_number(),
        checks,
        all_pass,
    };
    write_out(
        out,
        "maxwell_report.json",
        serde_json::to_string_pretty(&report).unwrap().as_bytes(),
    )?;
    if !all_pass {
        return Err(CliError::Numerical(
            "stage maxwell_verify: at least one identity check failed".into(),
        ));
    }
    Ok(())
}
