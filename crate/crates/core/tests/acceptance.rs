//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them). Tolerances
//! are pinned here, not computed.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use helmlab_core::cgo::{cgo_correction, decay_diagnostic, variety_anchor, CutoffProfile};
use helmlab_core::dnmap::{
    boundary_moment, second_linearization_analytic, second_linearization_fd, volume_moment_oracle,
    MomentMethod,
};
use helmlab_core::grid::{
    build_grid, BoundaryFunction, BoundaryPartition, Field, Grid, GridKind,
};
use helmlab_core::helmholtz::{assemble, solve_dirichlet};
use helmlab_core::maxwell::{
    amplitude_product_bound, em_plane_wave, kerr_anchor_eta, kerr_anchor_xi, kerr_family,
    kerr_identity_quadrature, on_variety_vector, recover_chi_direction, recovery_matrix,
    shg_family, shg_identity_quadrature, BoxGrid3, CVec3, MaxwellCoefficients, Medium,
};
use helmlab_core::nonlinear::{solve_nonlinear, Potential};
use helmlab_core::reconstruct::{
    direct_moments, fourier_moments, invert_fourier, plan_frequencies, relative_error,
    simulate_moment, MomentSample,
};
use helmlab_core::runge::{
    cavity_discrepancy, disk_mask, runge_approximate, square_region, RungeProblem,
};
use helmlab_core::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn plane_wave_field(grid: &Grid, xi: [f64; 2]) -> Field {
    grid.field_from_fn(|[x, y]| (-c(0.0, 1.0) * (xi[0] * x + xi[1] * y)).exp())
}

#[test]
fn criterion_01_forward_convergence() {
    let start = Instant::now();
    let kappa = 1.0;
    let mut errors = Vec::new();
    let mut hs = Vec::new();
    for n in [33usize, 65, 129] {
        let grid = build_grid(GridKind::Rectangle, n).unwrap();
        let op = assemble(&grid, kappa).unwrap();
        let exact = plane_wave_field(&grid, [kappa, 0.0]);
        let u = solve_dirichlet(&op, &Field::zeros(&grid), &grid.trace(&exact)).unwrap();
        let err = u
            .values
            .iter()
            .zip(&exact.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        errors.push(err);
        hs.push(grid.h());
    }
    let mut orders = Vec::new();
    for k in 1..errors.len() {
        orders.push((errors[k - 1] / errors[k]).ln() / (hs[k - 1] / hs[k]).ln());
    }
    let elapsed = start.elapsed().as_secs_f64();
    for &order in &orders {
        assert!(
            (1.8..=2.2).contains(&order),
            "observed order {order} outside [1.8, 2.2]"
        );
    }
    assert!(elapsed < 10.0, "runtime {elapsed:.2}s exceeds 10s");
    println!(
        "criterion 1 (forward convergence): PASS: orders {orders:?}, runtime {elapsed:.2}s"
    );
}

#[test]
fn criterion_02_contraction_solver() {
    let grid = build_grid(GridKind::Rectangle, 65).unwrap();
    let op = assemble(&grid, 1.0).unwrap();
    let q = Potential::constant(&grid, c(1.0, 0.0));
    let shape = grid.boundary_from_fn(|[x, _]| (-c(0.0, 1.0) * x).exp());

    let report = solve_nonlinear(&op, &q, &shape.scale(c(1e-3, 0.0)), 1e-12, 100).unwrap();
    assert!(report.iterations <= 15, "{} iterations", report.iterations);
    let eventual_ratio = report
        .residual_history
        .windows(2)
        .map(|w| w[1] / w[0])
        .last()
        .unwrap();
    assert!(eventual_ratio < 0.5, "eventual ratio {eventual_ratio}");
    let mut source = Field::zeros(&grid);
    for k in 0..grid.node_count() {
        let u = report.solution.values[k];
        source.values[k] = -q.values[k] * u * u;
    }
    let residual = op.residual_sup(&report.solution, &source);
    assert!(residual <= 1e-8, "interior residual {residual}");

    // amplitude 10: the destabilizing phase leaves the contraction regime
    let diverged = solve_nonlinear(&op, &q, &shape.scale(c(-10.0, 0.0)), 1e-12, 100);
    assert!(matches!(diverged, Err(Error::Diverged { .. })));
    println!(
        "criterion 2 (contraction solver): PASS: {} iterations, eventual ratio {eventual_ratio:.3e}, residual {residual:.3e}, divergence detected at amplitude 10",
        report.iterations
    );
}

/// Random smooth potential and boundary data used by criteria 3 and 4.
fn random_smooth_potential(grid: &Grid, rng: &mut ChaCha8Rng) -> Potential {
    let a = rng.gen_range(1.0..2.0);
    let fx = rng.gen_range(1.0..3.0);
    let fy = rng.gen_range(1.0..3.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    Potential::from_fn(grid, |[x, y]| {
        c(a * (0.5 + 0.5 * (fx * x + phase).sin() * (fy * y).cos()), 0.0)
    })
}

fn random_smooth_boundary(grid: &Grid, rng: &mut ChaCha8Rng) -> BoundaryFunction {
    let m = rng.gen_range(1..3) as f64;
    let ar = rng.gen_range(0.5..1.0);
    let ai = rng.gen_range(-0.5..0.5);
    grid.boundary_from_fn(move |[x, y]| {
        c(2.0 + ar * (m * x).cos() * (m * y).sin(), ai * (m * (x - y)).sin())
    })
}

#[test]
fn criterion_03_linearization_oracle_equivalence() {
    let grid = build_grid(GridKind::Rectangle, 65).unwrap();
    let op = assemble(&grid, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst_gap = 0.0_f64;
    let mut worst_rate: Option<f64> = None;
    for trial in 0..10 {
        let q = random_smooth_potential(&grid, &mut rng);
        let f1 = random_smooth_boundary(&grid, &mut rng);
        let f2 = random_smooth_boundary(&grid, &mut rng);
        let exact = second_linearization_analytic(&op, &q, &f1, &f2).unwrap();
        let gap_at = |eps: f64| {
            let fd = second_linearization_fd(&op, &q, &f1, &f2, eps).unwrap();
            fd.values
                .iter()
                .zip(&exact.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        let g1 = gap_at(1e-3);
        assert!(g1 <= 1e-4, "trial {trial}: gap {g1} at eps 1e-3");
        worst_gap = worst_gap.max(g1);
        let g2 = gap_at(5e-4);
        let rate = g1 / g2;
        assert!(
            (3.0..=5.0).contains(&rate),
            "trial {trial}: Richardson rate {rate} outside [3, 5]"
        );
        worst_rate = Some(worst_rate.map_or(rate, |r: f64| r.min(rate)));
    }
    println!(
        "criterion 3 (linearization oracles): PASS: worst gap {worst_gap:.3e} <= 1e-4, halving rate ~{:.2}",
        worst_rate.unwrap()
    );
}

#[test]
fn criterion_04_integral_identity() {
    let grid = build_grid(GridKind::Rectangle, 65).unwrap();
    let op = assemble(&grid, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    // left edge is s in [3, 4); bottom edge s in [0, 1)
    let part = BoundaryPartition::new(vec![(3.0, 4.0)], vec![(0.0, 1.0)]).unwrap();
    let mut worst_full = 0.0_f64;
    let mut worst_partial = 0.0_f64;
    for trial in 0..10 {
        let q = random_smooth_potential(&grid, &mut rng);

        // full data
        let f1 = random_smooth_boundary(&grid, &mut rng);
        let f2 = random_smooth_boundary(&grid, &mut rng);
        let f0 = random_smooth_boundary(&grid, &mut rng);
        let d2 = second_linearization_fd(&op, &q, &f1, &f2, 1e-3).unwrap();
        let mu = boundary_moment(&op, &d2, &f0).unwrap();
        let oracle = volume_moment_oracle(&op, &q, &f1, &f2, &f0).unwrap();
        let rel = (mu - oracle).norm() / oracle.norm();
        assert!(rel <= 1e-2, "trial {trial} full: relative gap {rel}");
        worst_full = worst_full.max(rel);

        // partial data: probes in Γ₁, compensating data in Γ₂, trace on Γ₂
        let g1 = random_arc_bump(&grid, &part.gamma1, &mut rng);
        let g2 = random_arc_bump(&grid, &part.gamma1, &mut rng);
        let g0 = random_arc_bump(&grid, &part.gamma2, &mut rng);
        let d2 = second_linearization_fd(&op, &q, &g1, &g2, 1e-3)
            .unwrap()
            .masked(&grid, &part.gamma2);
        let mu = boundary_moment(&op, &d2, &g0).unwrap();
        let oracle = volume_moment_oracle(&op, &q, &g1, &g2, &g0).unwrap();
        let rel = (mu - oracle).norm() / oracle.norm();
        assert!(rel <= 1e-2, "trial {trial} partial: relative gap {rel}");
        worst_partial = worst_partial.max(rel);
    }
    println!(
        "criterion 4 (integral identity): PASS: worst relative gap: full {worst_full:.3e}, partial {worst_partial:.3e} <= 1e-2"
    );
}

fn random_arc_bump(grid: &Grid, arcs: &[(f64, f64)], rng: &mut ChaCha8Rng) -> BoundaryFunction {
    let a1 = rng.gen_range(0.7..1.0);
    let a2 = rng.gen_range(-0.3..0.3);
    let mut out = grid.zero_boundary();
    for (k, b) in grid.boundary_nodes().iter().enumerate() {
        for &(lo, hi) in arcs {
            if b.s >= lo && b.s < hi {
                let t = (b.s - lo) / (hi - lo);
                let base = (std::f64::consts::PI * t).sin();
                let second = (2.0 * std::f64::consts::PI * t).sin();
                out.values[k] = c(a1 * base + a2 * second, 0.0);
                out.support_mask[k] = true;
            }
        }
    }
    out
}

#[test]
fn criterion_05_reconstruction() {
    let start = Instant::now();
    let kappa = 6.0;
    let grid = build_grid(GridKind::Rectangle, 65).unwrap();
    let op = assemble(&grid, kappa).unwrap();
    let q = Potential::gaussian(&grid, [0.5, 0.5], 0.3, 1.0);
    let plan = plan_frequencies(kappa, 2.0 * kappa, 1.0).unwrap();

    let samples: Vec<MomentSample> = plan
        .entries
        .iter()
        .map(|entry| {
            let rec =
                simulate_moment(&op, &q, entry, MomentMethod::FiniteDifference, 1e-3, None)
                    .unwrap();
            MomentSample {
                z: entry.z,
                moment: [rec.moment.re, rec.moment.im],
            }
        })
        .collect();
    let table = fourier_moments(&samples, &plan).unwrap();
    let q_rec = invert_fourier(&table, &grid, None);
    let err_truth = relative_error(&grid, &q, &q_rec).unwrap();

    let projection = invert_fourier(&direct_moments(&grid, &q, &plan).unwrap(), &grid, None);
    let err_projection = relative_error(&grid, &projection, &q_rec).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    assert!(err_truth <= 0.30, "error vs truth {err_truth}");
    assert!(err_projection <= 0.10, "error vs projection {err_projection}");
    assert!(elapsed < 300.0, "runtime {elapsed:.1}s exceeds 5 minutes");
    println!(
        "criterion 5 (reconstruction): PASS: error vs q {err_truth:.3}, vs band projection {err_projection:.3e}, runtime {elapsed:.1}s ({} moments)",
        plan.entries.len()
    );
}

#[test]
fn criterion_06_cgo_decay() {
    let grid = build_grid(GridKind::Rectangle, 129).unwrap();
    let op = assemble(&grid, 1.0).unwrap();
    let chi = CutoffProfile::new(&grid, 0.25, 5).unwrap();
    let mut samples = Vec::new();
    for &h in &[0.2, 0.1, 0.05] {
        let zeta = variety_anchor(op.kappa() * h, true);
        assert_eq!(zeta.components[0], c(0.0, 1.0), "Im zeta_1 = 1 anchor");
        let (_, norm) = cgo_correction(&op, &zeta, h, &chi, &[(1.0, 2.0)]).unwrap();
        samples.push((h, norm));
    }
    let fit = decay_diagnostic(&samples).unwrap();
    assert!(fit.slope <= -0.1, "slope {} above -0.1", fit.slope);
    println!(
        "criterion 6 (CGO decay): PASS: fitted slope {:.3} <= -0.1 over ladder {:?}",
        fit.slope,
        samples.iter().map(|s| s.0).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_07_runge_density_trend() {
    let grid = build_grid(GridKind::Rectangle, 65).unwrap();
    let op = assemble(&grid, 1.0).unwrap();
    let kappa = op.kappa();
    let wave = plane_wave_field(&grid, [kappa, 0.0]);

    // partial control from the bottom edge: strictly nonincreasing ladder
    let mut ladder = Vec::new();
    for n_modes in [4usize, 8, 16, 32] {
        let problem = RungeProblem {
            region: square_region(&grid, [0.5, 0.5], 0.2),
            control_arcs: vec![(0.0, 1.0)],
            n_modes,
            target: wave.clone(),
            lambda: None,
        };
        ladder.push(runge_approximate(&op, &problem).unwrap().residual);
    }
    for w in ladder.windows(2) {
        assert!(w[1] < w[0], "ladder not strictly decreasing: {:?}", ladder);
    }

    // full-boundary control of an oblique plane wave
    let d = [0.6, 0.8];
    let oblique = plane_wave_field(&grid, [kappa * d[0], kappa * d[1]]);
    let problem = RungeProblem {
        region: square_region(&grid, [0.5, 0.5], 0.15),
        control_arcs: vec![(0.0, 4.0)],
        n_modes: 16,
        target: oblique,
        lambda: None,
    };
    let full = runge_approximate(&op, &problem).unwrap().residual;
    assert!(full <= 1e-6, "full-boundary residual {full}");
    println!(
        "criterion 7 (Runge density trend): PASS: one-edge ladder {ladder:?} strictly decreasing, full-boundary residual {full:.3e} <= 1e-6"
    );
}

#[test]
fn criterion_08_cavity_discrimination() {
    let grid = build_grid(GridKind::Rectangle, 33).unwrap();
    let d1 = disk_mask(&grid, [0.45, 0.5], 0.15);
    let d2 = disk_mask(&grid, [0.55, 0.5], 0.15);
    let arcs = [(0.0, 4.0)];
    let baseline = cavity_discrepancy(&grid, 1.0, &d1, &d1, &arcs, 8, 1.0).unwrap();
    let shifted = cavity_discrepancy(&grid, 1.0, &d1, &d2, &arcs, 8, 1.0).unwrap();
    assert!(
        shifted >= 5.0 * baseline,
        "shifted {shifted} < 5 x baseline {baseline}"
    );
    // the ordering alone is vacuous when the baseline is exactly zero, so
    // also demand genuinely positive evidence from the shifted configuration
    assert!(shifted > 1e-6, "shifted discrepancy {shifted} is not positive evidence");
    println!(
        "criterion 8 (cavity discrimination): PASS: baseline {baseline:.3e}, shifted {shifted:.3e} (>= 5x and positive)"
    );
}

#[test]
fn criterion_09_maxwell_exact_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let k = 1.0;
    let h = 0.3;
    let kh = k * h;
    let medium = Medium::unit(k);
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
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let xi = rand_on_variety(&mut rng);
        let eta = rand_on_variety(&mut rng);
        let a = CVec3([
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ]);
        let b = CVec3([
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ]);
        // plane-wave Maxwell residuals
        let wave = em_plane_wave(xi, a, b, h, &medium).unwrap();
        let scale = wave.e_amp.norm().max(wave.h_amp.norm()).max(1.0);
        worst = worst.max(wave.maxwell_residual(&medium) / scale);
        // Kerr orthogonality
        let fam = kerr_family(xi, eta, h, &medium).unwrap();
        let h1 = &fam.waves[0].h_amp;
        for j in [1usize, 2, 3] {
            let other = &fam.waves[j].h_amp;
            let s = h1.norm().max(1.0) * other.norm().max(1.0);
            worst = worst.max(h1.dot(&other.conj()).norm() / s);
        }
    }
    // SHG constraints across the kh range
    for case in 1..=3 {
        for kh_case in [0.05, 0.3, 0.7, 0.99] {
            let fam = shg_family(case, kh_case, 1.0).unwrap();
            let s = fam.varsigma;
            worst = worst.max((s.dot(&s) - 4.0 * kh_case * kh_case).norm() / s.norm_sqr());
            worst = worst.max(s.dot(&fam.a_varsigma).norm() / s.norm());
        }
    }
    // identity quadratures vanish for equal coefficients
    let grid3 = BoxGrid3::new(17).unwrap();
    let coeffs = MaxwellCoefficients::from_fns(
        grid3,
        |[x, y, z]| c(x * y, z),
        |[x, y, z]| c(x + y - z, 0.2),
        |[x, y, _]| CVec3([c(x, 0.0), c(y, 0.3), c(1.0, 0.0)]),
    );
    let fam = kerr_family(kerr_anchor_xi(kh), kerr_anchor_eta(kh), h, &medium).unwrap();
    worst = worst.max(
        kerr_identity_quadrature(&coeffs, &coeffs, &fam, &grid3)
            .unwrap()
            .norm(),
    );
    let shg = shg_family(1, k, h).unwrap();
    worst = worst.max(
        shg_identity_quadrature(&coeffs, &coeffs, &shg, &grid3)
            .unwrap()
            .norm(),
    );
    assert!(worst <= 1e-10, "worst identity residual {worst}");

    // amplitude-product limit via O(h²) extrapolation
    let value_at = |hh: f64| {
        amplitude_product_bound(kerr_anchor_xi(k * hh), kerr_anchor_eta(k * hh), hh, 1e-9).unwrap()
    };
    let p1 = value_at(1e-2);
    let p2 = value_at(5e-3);
    let extrapolated = (4.0 * p2 - p1) / 3.0;
    assert!(
        (extrapolated - 32.0).abs() <= 1e-4,
        "extrapolated limit {extrapolated}"
    );
    println!(
        "criterion 9 (Maxwell identities): PASS: worst residual {worst:.3e} <= 1e-10, amplitude-product limit {extrapolated:.6} (= 32 within O(h²))"
    );
}

#[test]
fn criterion_10_chi_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let m = recovery_matrix();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let chi = CVec3([
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ]);
        let moments: Vec<Complex64> = m
            .iter()
            .map(|row| CVec3([row[0], row[1], row[2]]).dot(&chi))
            .collect();
        let rec = recover_chi_direction(moments[0], moments[1], moments[2]);
        worst = worst.max(rec.sub(&chi).norm() / chi.norm().max(1.0));
    }
    assert!(worst <= 1e-12, "worst recovery error {worst}");
    println!("criterion 10 (chi recovery): PASS: worst roundtrip error {worst:.3e} <= 1e-12");
}
